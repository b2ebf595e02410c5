//! Numerical machinery for the extremal first-eigenvalue metric on the Klein bottle.
//!
//! The crate is organised bottom-up:
//!
//! * [`elliptic`]: complete elliptic integrals K, E, Π and the extremal constant.
//! * [`odecore`]: the coupled ODE for (φ₁, φ₂), its first integrals, integration,
//!   period detection and solution classification.
//! * [`geometry`]: quadrics, the parabolic coordinates (u, v) and the oscillation
//!   intervals of the separated system.
//! * [`periods`]: hyper-elliptic periods T_u, T_v, their ratio and rational targets.
//! * [`spectral`]: Sturm–Liouville spectra of metrics of revolution.
//!
//! [`quadrature`], [`roots`] and [`dop853`] are general-purpose numerical kernels.

// Tabulated coefficients carry more digits than f64 holds; negated comparisons reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod dop853;
pub mod elliptic;
pub mod geometry;
pub mod odecore;
pub mod periods;
pub mod quadrature;
pub mod roots;
pub mod spectral;

/// √(3/8): the initial value whose solution yields the extremal metric.
pub const P_EXTREMAL: f64 = 0.612_372_435_695_794_5;

/// √3/2: the initial value whose solution decays to the origin.
pub const P_DECAY: f64 = 0.866_025_403_784_438_6;
