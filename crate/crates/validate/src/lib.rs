//! Acceptance suite for `starfd`: independent oracles, per-criterion checks
//! and a shared cache of desk-scale runs.
//!
//! ```no_run
//! let suite = starfd_validate::Suite::new();
//! let reports = suite.run_all(|r| println!("{}", r.line()));
//! assert!(reports.iter().all(|r| r.passed));
//! ```

pub mod cache;
pub mod checks;
pub mod criteria;
pub mod fixtures;
pub mod oracle;

pub use criteria::{CriterionReport, Suite, CRITERIA};
