//! δ-pseudo-orbits and a closed-form shadowing solver for the hyperbolic
//! toral automorphism: unwrap the orbit to the covering plane by nearest
//! lifts, split the per-step errors into eigen-coordinates, and sum the
//! geometric series that cancels the unstable accumulation. The sphere
//! quotient is shadowed by lifting its pseudo-orbits to the torus,
//! solving there, and projecting back; the quotient map is open with
//! modulus ν = ρ and 1-Lipschitz, so the bound survives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::AnosovMap;
use crate::quotient::SphereMap;
use crate::spaces::{PlanePoint, Point, SpherePoint, TorusPoint};
use crate::Dynamics;

/// Per-step nearest-lift offsets beyond this threshold make the unwrap
/// ambiguous; the solver refuses rather than wrap silently.
pub const UNWRAP_LIMIT: f64 = 0.25;

/// A finite sequence with per-step error below delta:
/// dist(f(x_k), x_{k+1}) < δ for all consecutive pairs.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoOrbit<P: Point> {
    pts: Vec<P>,
    delta: f64,
}

impl<P: Point> PseudoOrbit<P> {
    /// Validate the defining inequality against the generating map.
    pub fn new<D: Dynamics<P = P>>(map: &D, pts: Vec<P>, delta: f64) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        for (k, w) in pts.windows(2).enumerate() {
            let gap = map.apply(w[0]).dist(w[1]);
            if gap >= delta {
                return Err(Error::InvalidInput(format!(
                    "not a {delta}-pseudo-orbit: step {k} has error {gap}"
                )));
            }
        }
        Ok(Self { pts, delta })
    }

    #[inline]
    pub fn pts(&self) -> &[P] {
        &self.pts
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }
}

/// Point types that accept a small additive displacement, for pseudo-orbit
/// generation.
pub trait NoisyPoint: Point {
    fn nudge(self, dx: f64, dy: f64) -> Self;
}

impl NoisyPoint for TorusPoint {
    fn nudge(self, dx: f64, dy: f64) -> Self {
        TorusPoint::new(self.x() + dx, self.y() + dy)
    }
}

impl NoisyPoint for SpherePoint {
    fn nudge(self, dx: f64, dy: f64) -> Self {
        SpherePoint::from_torus(self.rep().nudge(dx, dy))
    }
}

/// Seeded δ-pseudo-orbit: x_{k+1} = f(x_k) + noise with the noise uniform
/// in the disk of radius 0.99·δ.
pub fn make_pseudo_orbit<D>(
    map: &D,
    x0: D::P,
    length: usize,
    delta: f64,
    seed: u64,
) -> Result<PseudoOrbit<D::P>>
where
    D: Dynamics,
    D::P: NoisyPoint,
{
    if length == 0 {
        return Err(Error::InvalidInput("length must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(length);
    pts.push(x0);
    for _ in 1..length {
        let r = 0.99 * delta * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let next = map.apply(*pts.last().unwrap()).nudge(r * theta.cos(), r * theta.sin());
        pts.push(next);
    }
    PseudoOrbit::new(map, pts, delta)
}

/// A shadowing point together with the verified deviation and the a
/// priori bound 2δ/(λ−1).
#[derive(Debug, Clone, Serialize)]
pub struct ShadowResult<P: Point> {
    pub point: P,
    pub eps_achieved: f64,
    pub eps_bound: f64,
}

/// Unwrap a torus pseudo-orbit to the covering plane by nearest-lift
/// continuation, returning the lifts and the per-step plane errors
/// e_k = x̂_{k+1} − A·x̂_k.
fn unwrap_orbit(
    map: &AnosovMap,
    po: &PseudoOrbit<TorusPoint>,
) -> Result<(Vec<PlanePoint>, Vec<PlanePoint>)> {
    let pts = po.pts();
    let mut lifts = Vec::with_capacity(pts.len());
    let mut errors = Vec::with_capacity(pts.len().saturating_sub(1));
    lifts.push(PlanePoint::new(pts[0].x(), pts[0].y()));
    for k in 1..pts.len() {
        let predicted = map.apply_plane(lifts[k - 1]);
        let lift = pts[k].lift_near(predicted);
        let e = PlanePoint::new(lift.x - predicted.x, lift.y - predicted.y);
        let offset = e.x.abs().max(e.y.abs());
        if offset >= UNWRAP_LIMIT {
            return Err(Error::UnwrapAmbiguity { step: k - 1, offset });
        }
        lifts.push(lift);
        errors.push(e);
    }
    Ok((lifts, errors))
}

/// Closed-form shadowing for the linear hyperbolic automorphism. The
/// correction at time 0 sums the future errors' unstable components with
/// weights λ^{-(j+1)}; the stable component needs no correction on a
/// forward-finite orbit (the series over past errors is empty), which only
/// tightens the bound.
pub fn shadow_solve(
    map: &AnosovMap,
    po: &PseudoOrbit<TorusPoint>,
) -> Result<ShadowResult<TorusPoint>> {
    let (lifts, errors) = unwrap_orbit(map, po)?;
    let lambda = map.lambda();
    let e_u = map.e_u();

    let mut c_u = 0.0;
    let mut weight = 1.0 / lambda;
    for e in &errors {
        c_u += weight * (e.x * e_u.x + e.y * e_u.y);
        weight /= lambda;
    }
    let x = TorusPoint::new(lifts[0].x + c_u * e_u.x, lifts[0].y + c_u * e_u.y);
    let eps_bound = 2.0 * po.delta() / (lambda - 1.0);
    let (_, eps_achieved) = shadow_verify(map, po, x, eps_bound);
    Ok(ShadowResult { point: x, eps_achieved, eps_bound })
}

/// Check dist(f^n(x), x_n) ≤ ε over the recorded window; returns the
/// verdict and the maximum deviation.
pub fn shadow_verify<D: Dynamics>(
    map: &D,
    po: &PseudoOrbit<D::P>,
    x: D::P,
    eps: f64,
) -> (bool, f64) {
    let mut q = x;
    let mut max_dev = 0.0f64;
    for (k, target) in po.pts().iter().enumerate() {
        if k > 0 {
            q = map.apply(q);
        }
        max_dev = max_dev.max(q.dist(*target));
    }
    (max_dev <= eps, max_dev)
}

/// Openness modulus of the antipodal quotient: q(B_ρ(x)) ⊇ B_ν(q(x)) with
/// ν = ρ, because the quotient metric is realized by an optimal lift.
pub fn openness_modulus(rho: f64) -> f64 {
    rho
}

/// Lift a sphere pseudo-orbit to a torus pseudo-orbit with the same delta:
/// start from the canonical representative and inductively pick the
/// preimage closer to the image of the previous lift.
pub fn lift_pseudo_orbit(
    f: &AnosovMap,
    po: &PseudoOrbit<SpherePoint>,
) -> Result<PseudoOrbit<TorusPoint>> {
    let pts = po.pts();
    let mut lifted = Vec::with_capacity(pts.len());
    lifted.push(pts[0].rep());
    for k in 1..pts.len() {
        let predicted = f.apply(lifted[k - 1]);
        let [a, b] = pts[k].lifts();
        let next = if predicted.dist(b) < predicted.dist(a) { b } else { a };
        lifted.push(next);
    }
    PseudoOrbit::new(f, lifted, po.delta())
}

/// Shadow a sphere pseudo-orbit by lifting, solving on the torus, and
/// projecting. The projection is 1-Lipschitz, so the sphere deviation is
/// bounded by the torus one.
pub fn sphere_shadow(
    g: &SphereMap,
    po: &PseudoOrbit<SpherePoint>,
) -> Result<ShadowResult<SpherePoint>> {
    let lifted = lift_pseudo_orbit(g.base(), po)?;
    let torus = shadow_solve(g.base(), &lifted)?;
    let point = SpherePoint::from_torus(torus.point);
    let (_, eps_achieved) = shadow_verify(g, po, point, torus.eps_bound);
    Ok(ShadowResult {
        point,
        eps_achieved,
        eps_bound: torus.eps_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::sphere_canon;

    const EPS: f64 = 1e-12;

    fn true_orbit(map: &AnosovMap, x0: TorusPoint, length: usize) -> PseudoOrbit<TorusPoint> {
        let mut pts = vec![x0];
        for _ in 1..length {
            pts.push(map.apply(*pts.last().unwrap()));
        }
        PseudoOrbit::new(map, pts, 1e-9).unwrap()
    }

    #[test]
    fn generator_satisfies_invariant_and_is_deterministic() {
        let f = AnosovMap::standard();
        let x0 = TorusPoint::new(0.3, 0.7);
        let a = make_pseudo_orbit(&f, x0, 100, 1e-3, 99).unwrap();
        let b = make_pseudo_orbit(&f, x0, 100, 1e-3, 99).unwrap();
        for (p, q) in a.pts().iter().zip(b.pts()) {
            assert_eq!(p, q);
        }
        for w in a.pts().windows(2) {
            assert!(f.apply(w[0]).dist(w[1]) < 1e-3);
        }
        let c = make_pseudo_orbit(&f, x0, 100, 1e-3, 100).unwrap();
        assert!(a.pts()[1] != c.pts()[1]);
    }

    #[test]
    fn tiny_delta_recovers_true_orbit() {
        let f = AnosovMap::standard();
        let po = make_pseudo_orbit(&f, TorusPoint::new(0.2, 0.9), 50, 1e-13, 7).unwrap();
        let exact = true_orbit(&f, TorusPoint::new(0.2, 0.9), 50);
        for (p, q) in po.pts().iter().zip(exact.pts()) {
            assert!(p.dist(*q) < 1e-10);
        }
    }

    #[test]
    fn true_orbit_shadows_itself() {
        let f = AnosovMap::standard();
        let po = true_orbit(&f, TorusPoint::new(0.135, 0.246), 40);
        let result = shadow_solve(&f, &po).unwrap();
        assert!(result.point.dist(po.pts()[0]) < 1e-10);
        assert!(result.eps_achieved < 1e-10);
    }

    #[test]
    fn single_unstable_kick_has_geometric_correction() {
        let f = AnosovMap::standard();
        let lambda = f.lambda();
        let d = 5e-4;
        for kick_at in [0usize, 1, 2, 4] {
            let mut pts = vec![TorusPoint::new(0.31, 0.41)];
            for k in 1..6 {
                let mut next = f.apply(*pts.last().unwrap());
                if k == kick_at + 1 {
                    next = TorusPoint::new(next.x() + d * f.e_u().x, next.y() + d * f.e_u().y);
                }
                pts.push(next);
            }
            let po = PseudoOrbit::new(&f, pts, 1e-3).unwrap();
            let result = shadow_solve(&f, &po).unwrap();
            let correction = result.point.dist(po.pts()[0]);
            let expected = d * lambda.powi(-(kick_at as i32 + 1));
            assert!(
                (correction - expected).abs() < 1e-12,
                "kick at {kick_at}: {correction} vs {expected}"
            );
        }
    }

    #[test]
    fn random_orbits_meet_the_bound() {
        let f = AnosovMap::standard();
        let delta = 1e-4;
        let bound = 2.0 * delta / (f.lambda() - 1.0);
        for seed in 0..50 {
            let x0 = TorusPoint::new(0.17 + seed as f64 * 0.013, 0.58);
            let po = make_pseudo_orbit(&f, x0, 200, delta, seed).unwrap();
            let result = shadow_solve(&f, &po).unwrap();
            assert!(result.eps_achieved <= bound, "seed {seed}: {}", result.eps_achieved);
            let (ok, _) = shadow_verify(&f, &po, result.point, result.eps_achieved);
            assert!(ok);
        }
    }

    #[test]
    fn verify_rejects_unstable_displacement() {
        let f = AnosovMap::standard();
        let po = make_pseudo_orbit(&f, TorusPoint::new(0.4, 0.8), 20, 1e-4, 3).unwrap();
        let result = shadow_solve(&f, &po).unwrap();
        let eps = result.eps_achieved.max(1e-6);
        let bad = TorusPoint::new(
            result.point.x() + 10.0 * eps * f.e_u().x,
            result.point.y() + 10.0 * eps * f.e_u().y,
        );
        let (ok, dev) = shadow_verify(&f, &po, bad, eps);
        assert!(!ok);
        assert!(dev > eps);
        // Any point passes with eps the diameter of the space.
        let (ok, _) = shadow_verify(&f, &po, bad, 0.5f64.sqrt());
        assert!(ok);
    }

    #[test]
    fn unwrap_ambiguity_is_an_error() {
        let f = AnosovMap::standard();
        let po = make_pseudo_orbit(&f, TorusPoint::new(0.1, 0.1), 200, 0.3, 12).unwrap();
        match shadow_solve(&f, &po) {
            Err(Error::UnwrapAmbiguity { offset, .. }) => assert!(offset >= UNWRAP_LIMIT),
            other => panic!("expected unwrap ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn openness_modulus_is_identity_and_realized_by_lifts() {
        assert_eq!(openness_modulus(0.1), 0.1);
        assert_eq!(openness_modulus(0.0), 0.0);
        assert!(openness_modulus(0.2) >= openness_modulus(0.1));
        // Exhibit lifts: for y' within ρ of q(x), some lift of y' is
        // within ρ of x.
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let rho = 0.1;
        for _ in 0..10_000 {
            let x = TorusPoint::new(rng.gen(), rng.gen());
            let y = sphere_canon(TorusPoint::new(rng.gen(), rng.gen()));
            if sphere_canon(x).dist(y) < rho {
                let best = y.lifts().iter().map(|l| x.dist(*l)).fold(f64::INFINITY, f64::min);
                assert!(best < rho + EPS);
            }
        }
    }

    #[test]
    fn lift_round_trips_and_preserves_delta() {
        let f = AnosovMap::standard();
        let g = SphereMap::new(f);
        let delta = 1e-3;
        let torus_po = make_pseudo_orbit(&f, TorusPoint::new(0.21, 0.34), 60, delta, 5).unwrap();
        let sphere_pts: Vec<SpherePoint> =
            torus_po.pts().iter().map(|&p| sphere_canon(p)).collect();
        let sphere_po = PseudoOrbit::new(&g, sphere_pts, delta).unwrap();
        let lifted = lift_pseudo_orbit(&f, &sphere_po).unwrap();
        assert_eq!(lifted.delta(), delta);
        // q ∘ lift reproduces the input.
        for (l, s) in lifted.pts().iter().zip(sphere_po.pts()) {
            assert_eq!(sphere_canon(*l), *s);
        }
        // The lift agrees with the original orbit up to a global antipody.
        let direct = lifted.pts()[0].dist(torus_po.pts()[0]) < EPS;
        let flipped = lifted.pts()[0].dist(torus_po.pts()[0].antipode()) < EPS;
        assert!(direct || flipped);
        let check = |l: &TorusPoint, t: &TorusPoint| {
            if direct {
                l.dist(*t) < EPS
            } else {
                l.dist(t.antipode()) < EPS
            }
        };
        for (l, t) in lifted.pts().iter().zip(torus_po.pts()) {
            assert!(check(l, t));
        }
    }

    #[test]
    fn sphere_shadowing_meets_the_torus_bound() {
        let f = AnosovMap::standard();
        let g = SphereMap::new(f);
        let delta = 1e-4;
        let bound = 2.0 * delta / (f.lambda() - 1.0);
        for seed in 0..20 {
            let x0 = sphere_canon(TorusPoint::new(0.37 + 0.017 * seed as f64, 0.11));
            let po = make_pseudo_orbit(&g, x0, 200, delta, seed).unwrap();
            let result = sphere_shadow(&g, &po).unwrap();
            assert!(result.eps_achieved <= bound, "seed {seed}");
            let (ok, _) = shadow_verify(&g, &po, result.point, result.eps_achieved);
            assert!(ok);
        }
    }

    #[test]
    fn sphere_projection_never_increases_eps() {
        let f = AnosovMap::standard();
        let g = SphereMap::new(f);
        let delta = 1e-4;
        let torus_po = make_pseudo_orbit(&f, TorusPoint::new(0.61, 0.43), 100, delta, 8).unwrap();
        let torus_result = shadow_solve(&f, &torus_po).unwrap();
        let sphere_pts: Vec<SpherePoint> =
            torus_po.pts().iter().map(|&p| sphere_canon(p)).collect();
        let sphere_po = PseudoOrbit::new(&g, sphere_pts, delta).unwrap();
        let (_, sphere_dev) =
            shadow_verify(&g, &sphere_po, sphere_canon(torus_result.point), torus_result.eps_bound);
        assert!(sphere_dev <= torus_result.eps_achieved + EPS);
    }

    #[test]
    fn true_sphere_orbit_has_zero_eps() {
        let f = AnosovMap::standard();
        let g = SphereMap::new(f);
        let mut pts = vec![sphere_canon(TorusPoint::new(0.23, 0.57))];
        for _ in 1..30 {
            pts.push(g.apply(*pts.last().unwrap()));
        }
        let po = PseudoOrbit::new(&g, pts, 1e-9).unwrap();
        let result = sphere_shadow(&g, &po).unwrap();
        assert!(result.eps_achieved < 1e-10);
    }

    #[test]
    fn serialization_field_names() {
        let f = AnosovMap::standard();
        let po = make_pseudo_orbit(&f, TorusPoint::new(0.1, 0.2), 3, 1e-3, 1).unwrap();
        let v = serde_json::to_value(&po).unwrap();
        assert!(v.get("pts").is_some() && v.get("delta").is_some());
        let result = shadow_solve(&f, &po).unwrap();
        let v = serde_json::to_value(&result).unwrap();
        assert!(v.get("point").is_some());
        assert!(v.get("eps_achieved").is_some());
        assert!(v.get("eps_bound").is_some());
    }
}
