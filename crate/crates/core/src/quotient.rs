//! The homeomorphism of the antipodal-quotient sphere induced by the toral
//! automorphism. The linear map commutes with p ↦ −p, so it descends to
//! the quotient; everything is computed through canonical torus
//! representatives, with no embedding of the sphere into R³.

use serde::Serialize;

use crate::error::Result;
use crate::hyperbolic::AnosovMap;
use crate::spaces::{sphere_canon, Chain, SpherePoint, TorusPoint};
use crate::stability::{diameter_window, StabilityReport, Verdict};
use crate::Dynamics;

/// The induced homeomorphism g : S² → S² with q ∘ f = g ∘ q.
#[derive(Debug, Clone, Copy)]
pub struct SphereMap {
    base: AnosovMap,
}

impl SphereMap {
    pub fn new(base: AnosovMap) -> Self {
        Self { base }
    }

    pub fn standard() -> Self {
        Self::new(AnosovMap::standard())
    }

    #[inline]
    pub fn base(&self) -> &AnosovMap {
        &self.base
    }
}

impl Dynamics for SphereMap {
    type P = SpherePoint;

    fn apply(&self, s: SpherePoint) -> SpherePoint {
        sphere_canon(self.base.apply(s.rep()))
    }

    fn apply_inv(&self, s: SpherePoint) -> SpherePoint {
        sphere_canon(self.base.apply_inv(s.rep()))
    }
}

/// The four cone points of the quotient: classes of the fixed points of
/// the involution p ↦ −p, each with a single lift.
pub fn cone_points() -> [SpherePoint; 4] {
    [
        sphere_canon(TorusPoint::new(0.0, 0.0)),
        sphere_canon(TorusPoint::new(0.5, 0.0)),
        sphere_canon(TorusPoint::new(0.0, 0.5)),
        sphere_canon(TorusPoint::new(0.5, 0.5)),
    ]
}

/// Expansivity evidence for one sphere chain: the stability window and the
/// first step whose diameter exceeds ξ.
#[derive(Debug, Clone, Serialize)]
pub struct CwChainRecord {
    pub first_violation: Option<i64>,
    pub initial_diam: f64,
}

/// Sampled continuum-wise expansivity evidence on the sphere: every chain
/// of the family must exceed diameter ξ at some step within |n| ≤ N. The
/// verdict is evidence over the sampled family, never a proof.
#[derive(Debug, Clone, Serialize)]
pub struct CwEvidenceReport {
    pub xi: f64,
    pub horizon: u32,
    pub diam_floor: f64,
    pub family_size: usize,
    pub all_violated: bool,
    pub max_first_violation: Option<i64>,
    pub records: Vec<CwChainRecord>,
    pub note: String,
}

pub fn cw_evidence_sphere(
    map: &SphereMap,
    xi: f64,
    family: &[Chain<SpherePoint>],
    horizon: u32,
    diam_floor: f64,
    eta: f64,
    budget: usize,
) -> Result<CwEvidenceReport> {
    let mut records = Vec::with_capacity(family.len());
    let mut all_violated = true;
    let mut max_first: Option<i64> = None;
    for chain in family {
        let initial_diam = chain.diam();
        if initial_diam < diam_floor {
            return Err(crate::error::Error::InvalidInput(format!(
                "chain diameter {initial_diam} below the floor {diam_floor}"
            )));
        }
        let diams = diameter_window(map, chain, horizon, eta, budget)?;
        let at = |step: i64| diams[(step + horizon as i64) as usize];
        let mut first = None;
        'scan: for k in 0..=horizon as i64 {
            for step in [k, -k] {
                if at(step) > xi {
                    first = Some(step);
                    break 'scan;
                }
            }
        }
        if let Some(s) = first {
            max_first = Some(max_first.map_or(s.abs(), |m: i64| m.max(s.abs())));
        } else {
            all_violated = false;
        }
        records.push(CwChainRecord { first_violation: first, initial_diam });
    }
    Ok(CwEvidenceReport {
        xi,
        horizon,
        diam_floor,
        family_size: family.len(),
        all_violated,
        max_first_violation: max_first,
        records,
        note: "sampled evidence over the given chain family; not a proof of \
               continuum-wise expansivity"
            .to_string(),
    })
}

/// Convenience wrapper: the stability report of one sphere chain under g.
pub fn sphere_stability(
    map: &SphereMap,
    chain: &Chain<SpherePoint>,
    xi: f64,
    horizon: u32,
    eta: f64,
    budget: usize,
) -> Result<StabilityReport> {
    let diams = diameter_window(map, chain, horizon, eta, budget)?;
    let at = |step: i64| diams[(step + horizon as i64) as usize];
    let mut first_violation = None;
    'scan: for k in 0..=horizon as i64 {
        for step in [k, -k] {
            if at(step) > xi {
                first_violation = Some(step);
                break 'scan;
            }
        }
    }
    Ok(StabilityReport {
        horizon,
        diams,
        verdict: if first_violation.is_some() {
            Verdict::Violated
        } else {
            Verdict::Stable
        },
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Point;
    use crate::stability::sphere_arc_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    const EPS: f64 = 1e-12;

    #[test]
    fn g_fixes_the_origin_class() {
        let g = SphereMap::standard();
        let o = sphere_canon(TorusPoint::new(0.0, 0.0));
        assert_eq!(g.apply(o), o);
    }

    #[test]
    fn g_moves_half_zero_to_zero_half() {
        let g = SphereMap::standard();
        let s = sphere_canon(TorusPoint::new(0.5, 0.0));
        assert_eq!(g.apply(s), sphere_canon(TorusPoint::new(0.0, 0.5)));
    }

    #[test]
    fn g_is_independent_of_the_lift() {
        let g = SphereMap::standard();
        let f = g.base();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100_000 {
            let p = TorusPoint::new(rng.gen(), rng.gen());
            assert_eq!(sphere_canon(f.apply(p)), sphere_canon(f.apply(p.antipode())));
        }
    }

    #[test]
    fn conjugacy_with_the_quotient_map() {
        let g = SphereMap::standard();
        let f = g.base();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..100_000 {
            let p = TorusPoint::new(rng.gen(), rng.gen());
            let lhs = sphere_canon(f.apply(p));
            let rhs = g.apply(sphere_canon(p));
            assert!(lhs.dist(rhs) < EPS);
        }
    }

    #[test]
    fn g_inverse_round_trip() {
        let g = SphereMap::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10_000 {
            let s = sphere_canon(TorusPoint::new(rng.gen(), rng.gen()));
            assert!(g.apply_inv(g.apply(s)).dist(s) < 1e-13);
        }
    }

    #[test]
    fn cone_points_form_a_g_invariant_quadruple() {
        let g = SphereMap::standard();
        let cones = cone_points();
        assert_eq!(cones.len(), 4);
        // Each cone point is its own antipode, hence a single lift.
        for c in &cones {
            assert_eq!(c.rep().antipode(), c.rep());
        }
        // g permutes the set: the origin is fixed and the other three form
        // a 3-cycle.
        for c in &cones {
            let image = g.apply(*c);
            assert!(cones.iter().any(|d| *d == image));
        }
        let orbit = [
            sphere_canon(TorusPoint::new(0.5, 0.0)),
            sphere_canon(TorusPoint::new(0.0, 0.5)),
            sphere_canon(TorusPoint::new(0.5, 0.5)),
        ];
        assert_eq!(g.apply(orbit[0]), orbit[1]);
        assert_eq!(g.apply(orbit[1]), orbit[2]);
        assert_eq!(g.apply(orbit[2]), orbit[0]);
    }

    #[test]
    fn g_bijective_on_canonical_grid() {
        // Canonical representatives of the 512×512 dyadic grid; the grid
        // is antipodally closed and all arithmetic is exact.
        let g = SphereMap::standard();
        let n = 512;
        let mut classes = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = TorusPoint::new(i as f64 / n as f64, j as f64 / n as f64);
                let s = sphere_canon(p);
                if s.rep() == p {
                    classes.push(s);
                }
            }
        }
        let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(classes.len());
        for (idx, s) in classes.iter().enumerate() {
            let image = g.apply(*s);
            let key = (image.rep().x().to_bits(), image.rep().y().to_bits());
            assert!(seen.insert(key, idx).is_none(), "image collision");
            assert_eq!(g.apply_inv(image), *s);
        }
        assert_eq!(seen.len(), classes.len());
    }

    #[test]
    fn cw_evidence_on_seeded_family() {
        let g = SphereMap::standard();
        let xi = 0.02;
        let family = sphere_arc_family(30, 1e-3, 1e-4, 2024).unwrap();
        let horizon = ((xi / 1e-3f64).ln() / g.base().lambda().ln()).ceil() as u32 + 2;
        assert_eq!(horizon, 6);
        let report = cw_evidence_sphere(&g, xi, &family, horizon, 1e-3, 1e-4, 1_000_000).unwrap();
        assert!(report.all_violated);
        assert!(report.max_first_violation.unwrap() <= horizon as i64);
    }

    #[test]
    fn cw_evidence_rejects_degenerate_chains() {
        let g = SphereMap::standard();
        let tiny = Chain::singleton(sphere_canon(TorusPoint::new(0.4, 0.3)), 1e-4);
        let r = cw_evidence_sphere(&g, 0.02, &[tiny], 4, 1e-3, 1e-4, 1_000_000);
        assert!(r.is_err());
    }
}
