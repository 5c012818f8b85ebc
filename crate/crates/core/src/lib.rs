//! Information geometry of the closed probability simplex.
//!
//! Finite sample spaces only. The crate covers
//!
//! - points of `Δ(Ω)` with tracked support, contrasts and the statistical
//!   bundle ([`simplex`]);
//! - Fisher scores of one-parameter curves that may touch the boundary
//!   ([`curve`]);
//! - exponential and mixture transports, the exponential chart and
//!   exponential geodesics ([`transport`]);
//! - natural gradients, entropy production and natural-gradient flows
//!   ([`gradient`]);
//! - exact symbolic derivation `ṗ = s·p` and linear score relations of
//!   binomial models ([`poly`]);
//! - the built-in example curves ([`zoo`]) and the acceptance checks
//!   ([`acceptance`]).

pub mod acceptance;
pub mod curve;
pub mod error;
pub mod gradient;
pub mod numeric;
pub mod poly;
pub mod simplex;
pub mod transport;
pub mod zoo;

pub use curve::{fisher_information, score, sqrt_embedding, velocity, DiffMode, ParamCurve, ScoreResult};
pub use error::{Error, Result};
pub use gradient::{
    cramer_rao_gap, directional_derivative_check, entropy, entropy_gradient, entropy_production,
    natural_gradient, natural_gradient_flow, FlowDirection, FlowTrajectory, Functional,
};
pub use simplex::{
    center, contrast_basis, inner_product, make_distribution, tangent_membership, BundleElement,
    ContrastVector, DistributionRecord, ProbabilityVector, SampleSpace, SupportIndicator,
};
pub use transport::{
    cumulant, cumulant_flow_derivative, displacement, duality_gap, e_transport, exp_geodesic_point,
    geodesic_ode_residual, kl, m_transport, ExpGeodesic,
};
