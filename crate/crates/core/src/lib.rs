//! Fair randomized allocation of a shared cache across tenants.
//!
//! A batch of per-tenant query demands competes for a byte-budgeted cache.
//! The crate models feasible cache configurations and lotteries over them,
//! computes exact weighted welfare, and implements allocation policies
//! ranging from static partitioning to exact proportional fairness, plus a
//! discrete-event simulator and fairness audits (sharing incentive, Pareto
//! efficiency, core membership).

pub mod allocators;
pub mod audit;
mod compact;
pub mod error;
pub mod exec;
pub mod heuristics;
pub mod instances;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod mw;
pub mod sim;
pub mod welfare;
pub mod workload;

pub use error::{Error, Result};
pub use model::{
    Allocation, BatchInstance, Configuration, Query, QueryDemand, Tenant, TenantId, View, ViewId,
};
pub use welfare::{welfare, WelfareMode, WelfareSolution};
