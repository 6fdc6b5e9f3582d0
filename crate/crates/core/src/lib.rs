//! Dynamics on the flat 2-torus, its antipodal sphere quotient, and the
//! covering plane: the hyperbolic toral automorphism given by the matrix
//! (2,1;1,1), an area-preserving twist perturbation of its linear model with
//! a ladder of exact fixed points, chain-based stability and escape
//! experiments, and a closed-form pseudo-orbit shadowing solver with a
//! lift–shadow–project pipeline for the quotient.

pub mod error;
pub mod hyperbolic;
pub mod perturbation;
pub mod quotient;
pub mod shadowing;
pub mod spaces;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use hyperbolic::{AnosovMap, EigenChart, HyperCoord, LinearModel};
pub use perturbation::{ChartBoxes, PerturbedMap, PerturbedTorusMap, RegionClass, RegionSpec, TwistParams};
pub use quotient::SphereMap;
pub use shadowing::{PseudoOrbit, ShadowResult};
pub use spaces::{Chain, PlanePoint, Point, SpherePoint, TorusPoint};
pub use stability::{EscapeCertificate, HalfCwProbe, StabilityReport};

/// An invertible discrete-time system on a metric point type.
pub trait Dynamics {
    type P: Point;

    fn apply(&self, p: Self::P) -> Self::P;
    fn apply_inv(&self, p: Self::P) -> Self::P;

    fn iterate(&self, p: Self::P, n: i64) -> Self::P {
        let mut q = p;
        if n >= 0 {
            for _ in 0..n {
                q = self.apply(q);
            }
        } else {
            for _ in 0..-n {
                q = self.apply_inv(q);
            }
        }
        q
    }
}
