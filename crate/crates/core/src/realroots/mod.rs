//! Polynomial infrastructure in extended precision: dense univariate and
//! bivariate polynomials, Sturm sequences, resultants and certified
//! real-root isolation.

pub mod bipoly;
pub mod resultant;
pub mod sturm;
pub mod unipoly;
pub mod xfloat;

pub use bipoly::BiPoly;
pub use resultant::{resultant, Eliminate};
pub use sturm::{isolate_and_refine, isolate_at, real_roots_f64, sturm_count, RealRoot, SturmChain};
pub use unipoly::UniPoly;
pub use xfloat::{XComplex, XFloat, PREC_DEFAULT, PREC_HIGH};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    /// A sign could not be certified at the given precision.
    #[error("sign evaluation is ambiguous at {prec} bits")]
    AmbiguousSign { prec: usize },
    /// Ambiguity persisted after escalating the precision.
    #[error("polynomial is ill-conditioned: signs remain ambiguous after precision escalation")]
    IllConditioned,
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
}
