//! Test-function suites, relative error against a serial reference, and
//! report summaries.

mod comembership;
mod metrics;
mod report;
mod suites;

pub use comembership::{assign_clusters, comembership_matrix};
pub use metrics::{effective_sample_size, joint_trim_mask, quantile, relative_error, summarize, Summary, NEAR_ZERO};
pub use report::{Algorithm, EvaluationReport, FunctionResult};
pub use suites::{estimate_expectations, SuiteTag, TestFunction, TestFunctionSuite};
