//! Quasirandomness of additive sets and Cayley hypergraphs.
//!
//! Gowers uniformity norms and Fourier analysis on finite abelian groups,
//! hypergraph homomorphism densities, Cayley hypergraphs, octahedral and cut
//! norms, the SystemCut linear-system rewriting, and verification suites.
//! Numerical kernels are generic over [`Scalar`] (`f64`, `f32`, [`BigRational`]).

pub(crate) mod backtrack;
pub mod budget;
pub mod cayley;
pub mod error;
pub mod fourier;
pub mod function;
pub mod group;
pub mod harness;
pub mod hypergraph;
pub mod io;
pub mod linear_systems;
pub mod norms;
pub mod sampling;
pub mod scalar;
pub mod template;
pub mod tensor;

pub use budget::Limits;
pub use cayley::{CayleySpec, Payload};
pub use error::{Error, Result};
pub use function::{AdditiveSet, GroupFunction};
pub use group::{Element, FiniteAbelianGroup};
pub use harness::{CheckResult, Suite, SuiteConfig};
pub use hypergraph::Hypergraph;
pub use linear_systems::{LinearForm01, LinearSystem, VarId};
pub use norms::{CutWitness, Engine, EngineBudget};
pub use num_rational::BigRational;
pub use scalar::Scalar;
pub use template::TemplateGraph;
pub use tensor::{DenseTensor, TensorView};

pub type GroupFunctionF64 = GroupFunction<f64>;
pub type GroupFunctionF32 = GroupFunction<f32>;
pub type GroupFunctionQ = GroupFunction<BigRational>;
pub type HypergraphF64 = Hypergraph<f64>;
pub type HypergraphQ = Hypergraph<BigRational>;
pub type TensorF64 = DenseTensor<f64>;
pub type TensorQ = DenseTensor<BigRational>;
