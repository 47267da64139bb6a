//! False discovery envelopes for multiple testing with discrete, heterogeneous
//! null distributions.
//!
//! A p-value family ([`PValueFamily`]) is turned into a bound `V(S)` on the
//! number of false discoveries in any selection `S`, either through a
//! reference family of regions with null-count bounds ([`ReferenceFamily`])
//! or through shortcuts of local tests ([`LocalTests`]). [`MethodFit`] wraps
//! the shipped methods behind one interface.

pub mod cdf;
pub mod discrete;
pub mod error;
pub mod family;
pub mod hetero;
pub mod homogeneous;
pub mod methods;
pub mod num;
pub mod reference;

pub use cdf::StepCdf;
pub use discrete::{binom_test, fisher_test, uniformize, DiscreteTest, Table2x2};
pub use error::{Error, Result};
pub use family::PValueFamily;
pub use local_tests::{brute_vip, ghs_m0, ghs_shortcut, BruteForceOracle, LocalTests, SimesTable};
pub use methods::{CurveRow, EnvelopeCurve, Method, MethodFit, MethodInfo};
pub use reference::{
    brute_vstar, fdx_select, interpolate_nested, InterpolatedEnvelope, ReferenceFamily, Regions, Structure,
};

/// Library version; downstream caches key on it so results never outlive an upgrade.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
