//! Exact polynomial models of functions, polyvector fields, differential
//! forms, polydifferential operators and Hochschild chains, together with the
//! brackets, products and differentials connecting them.

mod exterior;
pub mod chain;

pub mod diffop;
pub mod form;
pub mod poly;
pub mod series;
pub mod star;
pub mod vector;

pub use chain::{boundary, boundary_with_product, cap_with_product, hkr_chain, parse_chain, HochschildChain};
pub use diffop::{gerstenhaber_bracket, gerstenhaber_circle, hkr_cochain, PolyDiffOp};
pub use form::{contract, lie_derivative, DiffForm};
pub use poly::{factorial, multinomial, rat, Ef64, Poly, Rat, Scalar};
pub use series::{convolve, HbarSeries};
pub use star::{cochain_cup, hochschild_b, hochschild_b_series, hochschild_d, hochschild_d_series, cochain_cap_chain, mc_residual, StarAlgebra};
pub use vector::{bivector, schouten, schouten_standard, PolyVectorField};
