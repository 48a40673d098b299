pub mod barrier;
pub mod error;
pub mod generate;
pub mod graph;
pub mod hyperbolic;
pub mod linalg;
pub mod mixedchar;
pub mod realstable;
pub mod scalar;
pub mod seeded;
pub mod solver;
pub mod srdist;
pub mod unipoly;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use unipoly::{RootList, UniPoly};

pub type Rational = num_rational::BigRational;
pub type ExactPoly = UniPoly<Rational>;
pub type FloatPoly = UniPoly<f64>;
