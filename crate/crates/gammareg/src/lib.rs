//! Numerical convex analysis on sampled functions.
//!
//! The crate computes discrete Legendre-Fenchel conjugates and convex
//! envelopes (1D via lower convex hulls, 2D via the downward facets of
//! a 3D hull), and uses them to build and measure a family of
//! perturbed convex functions whose distance to their envelope decays
//! no faster than a prescribed modulus: for a modulus φ the profile
//! `v_t = v + t·g` keeps `v_t(0) - (v_t)**(0)` above a positive
//! multiple of `t·φ(t)` while the sup distance stays `o(t)`.
//!
//! Modules:
//! - [`gridfn`]: grids, piecewise-linear sampled functions, quadrature
//! - [`conjugate`]: conjugation and biconjugation on sampled data
//! - [`envelope`]: convex envelopes in 1D and 2D
//! - [`construct`]: the modulus-driven perturbation family
//! - [`analysis`]: gap measurements, ratio curves, consistency checks
//! - [`acceptance`]: the end-to-end verification suite
//! - [`io`]: CSV formats

pub mod acceptance;
pub mod analysis;
pub mod conjugate;
pub mod construct;
pub mod envelope;
pub mod error;
pub mod gridfn;
pub mod io;

pub use analysis::{GridCfg, RatioCurve, RatioSample};
pub use conjugate::{biconjugate, biconjugate_auto, lf_conjugate, lf_conjugate_bruteforce, SlopeGrid};
pub use construct::{build_2d, build_v, g_eval, CounterexampleKit, PhiSpec};
pub use envelope::hull3d::{lower_hull_3d, Facet};
pub use envelope::{envelope_1d, envelope_2d, EnvelopeResult1D, EnvelopeResult2D};
pub use error::{Error, Result};
pub use gridfn::{Grid1D, Grid2D, SampledFn1D, SampledFn2D};
