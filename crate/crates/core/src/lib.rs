//! Spectral density functions of group-ring multiplication operators,
//! approximated through finite quotients of residually finite groups.
//!
//! A self-adjoint element `z = w·w*` of a group ring is encoded as a
//! labelled connected marked graph (a *Cayley lcmg*): vertices are group
//! elements, and each vertex `x` has an edge `x -> x·s` labelled with the
//! coefficient of `s` in `z`. The Markov-type operator of that graph is right
//! multiplication by `z`, so the spectral measure at the basepoint gives the
//! spectral density function of `w`.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: exact group models and nested quotient chains.
//! * [`ring`]: formal sums over group elements, involution and projection.
//! * [`lcmg`]: labelled graphs, Cayley construction, balls, isomorphism and
//!   the ball metric.
//! * [`spectral`]: Markov-type operators, walk moments, Kesten measures,
//!   spectral density functions and l2-Betti numbers.
//! * [`oracle`]: Fourier ground truth for free abelian groups.
//! * [`convergence`]: runs a quotient chain and compares against the limit.

pub mod convergence;
pub mod error;
pub mod group;
pub mod lcmg;
pub mod oracle;
pub mod ring;
pub mod spectral;

pub use num_bigint::BigInt;
pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use group::{
    FiniteGroup, Group, GroupElement, GroupModel, Quotient, QuotientChain, QuotientElement,
    Schedule,
};
pub use lcmg::{Ball, CayleyLcmg, InfiniteCayley, Lcmg, MetricValue};
pub use ring::{RingElement, SymmetrizedSupport};
pub use spectral::{Atom, KestenMeasure, MarkovOperator, SpectralDensityFunction};

/// Default cap on quotient order for enumeration and dense eigensolves.
pub const DEFAULT_ORDER_CAP: usize = 20_000;
/// Default cap on the exponent accepted by moment computations.
pub const DEFAULT_MOMENT_CAP: usize = 20;
/// Default cap on ball radius in the infinite Cayley graph.
pub const DEFAULT_RADIUS_CAP: usize = 16;
/// Absolute per-component tolerance used when comparing edge labels.
pub const LABEL_TOLERANCE: f64 = 1e-12;
