pub mod bounds;
pub mod centers;
pub mod curves;
pub mod flow;
pub mod oracle;
pub mod poincare;
pub mod realroots;
pub mod report;
pub mod sweep;
pub mod trigpoly;

mod dopri;
mod quad;
