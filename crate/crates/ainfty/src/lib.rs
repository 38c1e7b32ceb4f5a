//! Exact-arithmetic engine for finite-dimensional A∞-algebras and
//! A∞-bimodules over semisimple base rings `R = K^m`.
//!
//! The crate computes, with no floating point anywhere:
//!
//! * bimodule calculus — diagonal, shift, dual, sign twist, tensor product
//!   over the algebra, morphism complexes and their cohomology;
//! * Hochschild chain and cochain complexes, per-weight or length-truncated,
//!   with the duality and cyclic-rotation isomorphisms;
//! * self-conjugation maps `K_i` on `H^*(hom(P^{⊗i}, A))`, with a classical
//!   (associative) oracle pipeline for cross-checking;
//! * noncommutative divisors on `A ⊕ P[1]`: assembly and extraction,
//!   sections, the weight-filtered deformation complex with its long exact
//!   sequence, and an order-by-order Maurer–Cartan solver;
//! * noncommutative pencils: one-parameter families of divisors over the
//!   projective line, their sections, base locus, and formal deformations.

pub mod ainfty;
pub mod bimodule;
pub mod conventions;
pub mod fixtures;
pub mod graded;
pub mod hochschild;
pub mod homcx;
pub mod matrix;
pub mod scalar;
pub mod tensor;
pub mod words;
