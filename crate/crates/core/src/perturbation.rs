//! The perturbed linear model T̃: regions D± and E in canonical (u,v)
//! coordinates, a compactly supported area-preserving twist replacing the
//! nonconstructive boundary extension, the homothetic levels D_n = D/2ⁿ,
//! the assembled map with a fixed point u_n = (2⁻ⁿ, 2⁻ⁿ) on every level
//! n ≥ n₀, and its embedding into the torus through the eigen chart.
//!
//! In (u,v) = (xy, ½ln(y/x)) coordinates the region D = D⁺ ∪ D⁻ is the
//! rectangle [1/2, 2] × [−½lnλ, (3/2)lnλ], the linear model is the shear
//! (u, v − lnλ), and E = T(D) is the same u-band with the v-band shifted
//! down by lnλ. The homothety v ↦ v/2ⁿ divides u by 4ⁿ and leaves v
//! unchanged, so level membership is read off the u-band alone.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::{AnosovMap, EigenChart, HyperCoord, LinearModel};
use crate::spaces::{PlanePoint, Point, TorusPoint};
use crate::Dynamics;

/// Below this value of u = xy the dyadic level index is no longer reliable
/// in double precision; the map falls back to the unmodified shear and
/// flags the result.
pub const UNDERFLOW_U: f64 = 1e-300;

/// The u- and v-bands of D, E and their dyadic levels.
#[derive(Debug, Clone, Copy)]
pub struct RegionSpec {
    lambda: f64,
    ln_lambda: f64,
    /// v-band of D: [−½lnλ, (3/2)lnλ].
    v_lo: f64,
    v_hi: f64,
    /// v-band of E = T(D): [−(3/2)lnλ, ½lnλ].
    ev_lo: f64,
    ev_hi: f64,
}

/// Where a plane point sits relative to the level regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionClass {
    /// Interior of D⁺ at this level: u·4ⁿ ∈ (1, 2), v inside the band.
    DPlus(u32),
    /// Interior of D⁻ at this level: u·4ⁿ ∈ (1/2, 1).
    DMinus(u32),
    /// The arc l_D at this level: u·4ⁿ = 1 exactly. Interior to D_n as a
    /// whole; the twist acts across it.
    ArcLD(u32),
    /// Interior of E_n for this level, outside every D_m.
    EInterior(u32),
    /// On the topological boundary of some D_n or E_n, where the perturbed
    /// map agrees with the shear exactly.
    Boundary,
    Outside,
}

impl RegionClass {
    /// Level index when the point is interior to D_n (including the arc).
    pub fn d_level(&self) -> Option<u32> {
        match self {
            RegionClass::DPlus(n) | RegionClass::DMinus(n) | RegionClass::ArcLD(n) => Some(*n),
            _ => None,
        }
    }
}

impl RegionSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::InvalidInput(format!("lambda must exceed 1, got {lambda}")));
        }
        let ln_lambda = lambda.ln();
        Ok(Self {
            lambda,
            ln_lambda,
            v_lo: -0.5 * ln_lambda,
            v_hi: 1.5 * ln_lambda,
            ev_lo: -1.5 * ln_lambda,
            ev_hi: 0.5 * ln_lambda,
        })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn ln_lambda(&self) -> f64 {
        self.ln_lambda
    }

    /// v-band [−½lnλ, (3/2)lnλ] of D.
    #[inline]
    pub fn v_band(&self) -> (f64, f64) {
        (self.v_lo, self.v_hi)
    }

    /// v-band of E = T(D).
    #[inline]
    pub fn e_v_band(&self) -> (f64, f64) {
        (self.ev_lo, self.ev_hi)
    }

    /// Upper u-edge of the level-n band: the hyperbola H_n: u = 2·4⁻ⁿ.
    #[inline]
    pub fn hyperbola_u(n: u32) -> f64 {
        // 2^(1-2n), exact in f64 for every level of interest.
        f64::powi(2.0, 1 - 2 * n as i32)
    }

    /// Dyadic level and scaled coordinate for u ∈ (0, 2]: the unique n ≥ 0
    /// with u·4ⁿ ∈ [1/2, 2], or None for u > 2 or nonpositive u.
    fn u_level(u: f64) -> Option<(u32, f64)> {
        if !(u > 0.0) || u > 2.0 {
            return None;
        }
        // First guess from logarithms, then correct against the exact
        // power-of-two edges.
        let mut n = (0.5 * (2.0 / u).log2()).floor() as i64;
        if n < 0 {
            n = 0;
        }
        loop {
            let hi = f64::powi(2.0, 1 - 2 * n as i32);
            let lo = 0.25 * hi;
            if u > hi {
                n -= 1;
                if n < 0 {
                    return None;
                }
            } else if u < lo {
                n += 1;
            } else {
                let scaled = u * f64::powi(4.0, n as i32);
                return Some((n as u32, scaled));
            }
        }
    }

    /// Classify a plane point against the level regions.
    pub fn locate(&self, p: PlanePoint) -> RegionClass {
        if !(p.x > 0.0 && p.y > 0.0) {
            return RegionClass::Outside;
        }
        let u = p.x * p.y;
        if u < UNDERFLOW_U {
            return RegionClass::Outside;
        }
        let Some((n, scaled)) = Self::u_level(u) else {
            return RegionClass::Outside;
        };
        let v = 0.5 * (p.y / p.x).ln();

        let in_v_open = v > self.v_lo && v < self.v_hi;
        let on_v_edge = v == self.v_lo || v == self.v_hi;
        let in_ev_open = v > self.ev_lo && v < self.ev_hi;
        let on_ev_edge = v == self.ev_lo || v == self.ev_hi;

        if scaled == 2.0 || scaled == 0.5 {
            // On a hyperbola H_m, the shared u-edge of adjacent levels.
            if (v >= self.v_lo && v <= self.v_hi) || (v >= self.ev_lo && v <= self.ev_hi) {
                return RegionClass::Boundary;
            }
            return RegionClass::Outside;
        }
        if in_v_open {
            return if scaled == 1.0 {
                RegionClass::ArcLD(n)
            } else if scaled > 1.0 {
                RegionClass::DPlus(n)
            } else {
                RegionClass::DMinus(n)
            };
        }
        if on_v_edge {
            return RegionClass::Boundary;
        }
        if in_ev_open {
            return RegionClass::EInterior(n);
        }
        if on_ev_edge {
            return RegionClass::Boundary;
        }
        RegionClass::Outside
    }

    /// Level whose open D-interior contains the point, if any.
    pub fn d_interior_level(&self, p: PlanePoint) -> Option<u32> {
        self.locate(p).d_level()
    }

    /// Level whose open E-interior contains the point, if any. Independent
    /// of D-membership; D and E overlap where their v-bands intersect.
    pub fn e_interior_level(&self, p: PlanePoint) -> Option<u32> {
        if !(p.x > 0.0 && p.y > 0.0) {
            return None;
        }
        let u = p.x * p.y;
        if u < UNDERFLOW_U {
            return None;
        }
        let (n, scaled) = Self::u_level(u)?;
        if scaled <= 0.5 || scaled >= 2.0 {
            return None;
        }
        let v = 0.5 * (p.y / p.x).ln();
        (v > self.ev_lo && v < self.ev_hi).then_some(n)
    }

    /// Corners of the (u,v) rectangles of D and E, in plane coordinates.
    pub fn corner_points(&self) -> Vec<PlanePoint> {
        let mut out = Vec::with_capacity(8);
        for (lo, hi) in [(self.v_lo, self.v_hi), (self.ev_lo, self.ev_hi)] {
            for u in [0.5, 2.0] {
                for v in [lo, hi] {
                    out.push(HyperCoord { u, v }.to_plane());
                }
            }
        }
        out
    }

    /// Diameter of E = T(D) in plane coordinates, from a dense boundary
    /// sampling that includes the exact corners. The diameter of a compact
    /// set is attained on its boundary.
    pub fn diam_e0(&self) -> f64 {
        let per_side = 256;
        let mut pts = Vec::with_capacity(4 * per_side + 4);
        let (lo, hi) = (self.ev_lo, self.ev_hi);
        for i in 0..=per_side {
            let t = i as f64 / per_side as f64;
            let u = 0.5 + 1.5 * t;
            let v = lo + (hi - lo) * t;
            pts.push(HyperCoord { u, v: lo }.to_plane());
            pts.push(HyperCoord { u, v: hi }.to_plane());
            pts.push(HyperCoord { u: 0.5, v }.to_plane());
            pts.push(HyperCoord { u: 2.0, v }.to_plane());
        }
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                best = best.max(pts[i].dist(pts[j]));
            }
        }
        best
    }

    /// Largest Euclidean norm over D ∪ E, attained at the u = 2,
    /// |v| = (3/2)lnλ corners: √(2λ³ + 2λ⁻³).
    pub fn max_corner_norm(&self) -> f64 {
        let l3 = self.lambda.powi(3);
        (2.0 * l3 + 2.0 / l3).sqrt()
    }
}

/// A compactly supported area-preserving twist of the (u,v) plane about
/// the center (1, ½lnλ): rigid rotation by π inside radius r* = ½lnλ,
/// interpolated rotation in the annulus up to R₀, identity outside. For
/// eigenvalues with ½lnλ ≥ 1/2 the support disk would not fit inside D;
/// conjugating by the area-preserving squeeze (u,v) ↦ (au, v/a) restores
/// the fit.
#[derive(Debug, Clone, Copy)]
pub struct TwistParams {
    ln_lambda: f64,
    r_star: f64,
    r0: f64,
    a: f64,
}

impl TwistParams {
    pub const DEFAULT_R0: f64 = 0.49;

    pub fn new(lambda: f64, r0: f64, a: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::InvalidInput(format!("lambda must exceed 1, got {lambda}")));
        }
        if !(a >= 1.0) {
            return Err(Error::GeometryGate(format!("squeeze factor must be >= 1, got {a}")));
        }
        let ln_lambda = lambda.ln();
        let r_star = 0.5 * ln_lambda / a;
        let clearance = (0.5 * a).min(ln_lambda / a);
        if !(r_star < r0 && r0 < clearance) {
            return Err(Error::GeometryGate(format!(
                "twist disk does not fit: need r* = {r_star} < R0 = {r0} < {clearance}"
            )));
        }
        Ok(Self { ln_lambda, r_star, r0, a })
    }

    pub fn standard(lambda: f64) -> Result<Self> {
        Self::new(lambda, Self::DEFAULT_R0, 1.0)
    }

    #[inline]
    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    #[inline]
    pub fn r0(&self) -> f64 {
        self.r0
    }

    #[inline]
    pub fn squeeze(&self) -> f64 {
        self.a
    }

    /// Twist angle profile: π on [0, r*], linear down to 0 at R₀, zero
    /// beyond.
    pub fn angle(&self, r: f64) -> f64 {
        if r <= self.r_star {
            PI
        } else if r < self.r0 {
            PI * (self.r0 - r) / (self.r0 - self.r_star)
        } else {
            0.0
        }
    }

    fn tau_signed(&self, h: HyperCoord, sign: f64) -> HyperCoord {
        // Work in squeezed coordinates w = (au, v/a), center (a, ½lnλ/a).
        let wu = self.a * h.u - self.a;
        let wv = h.v / self.a - 0.5 * self.ln_lambda / self.a;
        let r = wu.hypot(wv);
        if r >= self.r0 {
            return h;
        }
        let (ru, rv) = if r <= self.r_star {
            // Rotation by π as exact negation; keeps the level fixed
            // points bit-exact.
            (-wu, -wv)
        } else {
            let alpha = sign * self.angle(r);
            let (s, c) = alpha.sin_cos();
            (c * wu - s * wv, s * wu + c * wv)
        };
        HyperCoord {
            u: (ru + self.a) / self.a,
            v: (rv + 0.5 * self.ln_lambda / self.a) * self.a,
        }
    }

    /// The twist τ in (u,v) coordinates. Bijective; Jacobian 1 away from
    /// the circles r ∈ {r*, R₀}.
    pub fn tau(&self, h: HyperCoord) -> HyperCoord {
        self.tau_signed(h, 1.0)
    }

    /// Inverse twist: rotation by −α(r).
    pub fn tau_inv(&self, h: HyperCoord) -> HyperCoord {
        self.tau_signed(h, -1.0)
    }
}

/// The boxes of the escape geometry in chart coordinates: K = [−ξ, ξ]²,
/// L = [−ξ/2, ξ/2]², and W the open ball of radius δ/2 about the origin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChartBoxes {
    pub xi: f64,
    pub delta: f64,
}

impl ChartBoxes {
    pub const DEFAULT_XI: f64 = 0.02;
    pub const DEFAULT_DELTA: f64 = 0.02;

    pub fn new(xi: f64, delta: f64) -> Result<Self> {
        if !(xi > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "xi and delta must be positive, got xi = {xi}, delta = {delta}"
            )));
        }
        if delta > xi {
            return Err(Error::GeometryGate(format!(
                "W ⊆ L requires delta <= xi, got delta = {delta} > xi = {xi}"
            )));
        }
        Ok(Self { xi, delta })
    }

    pub fn standard() -> Self {
        Self::new(Self::DEFAULT_XI, Self::DEFAULT_DELTA).expect("defaults are valid")
    }

    #[inline]
    pub fn in_k(&self, p: PlanePoint) -> bool {
        p.x.abs() <= self.xi && p.y.abs() <= self.xi
    }

    #[inline]
    pub fn in_l(&self, p: PlanePoint) -> bool {
        p.x.abs() <= 0.5 * self.xi && p.y.abs() <= 0.5 * self.xi
    }

    #[inline]
    pub fn in_w(&self, p: PlanePoint) -> bool {
        p.norm() < 0.5 * self.delta
    }

    /// Membership in T(K) = [−λξ, λξ] × [−ξ/λ, ξ/λ].
    #[inline]
    pub fn in_tk(&self, p: PlanePoint, lambda: f64) -> bool {
        p.x.abs() <= lambda * self.xi && p.y.abs() <= self.xi / lambda
    }
}

/// Smallest n₀ with (max corner norm of D ∪ E)·2⁻ⁿ ≤ δ/2, so that
/// D_n ∪ E_n ⊆ W for every n ≥ n₀.
pub fn compute_n0(regions: &RegionSpec, boxes: &ChartBoxes) -> u32 {
    let norm = regions.max_corner_norm();
    let half_delta = 0.5 * boxes.delta;
    let mut n = 0u32;
    while norm * f64::powi(2.0, -(n as i32)) > half_delta {
        n += 1;
    }
    n
}

/// Statistics of a finite-difference Jacobian sweep.
#[derive(Debug, Clone, Serialize)]
pub struct JacobianStats {
    pub samples: usize,
    pub max_abs_dev: f64,
}

/// One Monte Carlo mass comparison: the Lebesgue measure of the image of a
/// rectangle against the measure of the rectangle itself.
#[derive(Debug, Clone, Serialize)]
pub struct MassCheck {
    pub rect: [f64; 4],
    pub true_mass: f64,
    pub est_mass: f64,
    pub sigma: f64,
    pub samples: usize,
}

impl MassCheck {
    pub fn within_3_sigma(&self) -> bool {
        (self.est_mass - self.true_mass).abs() <= 3.0 * self.sigma
    }

    pub fn ratio(&self) -> f64 {
        self.est_mass / self.true_mass
    }
}

/// Area-preservation evidence for a map over a region.
#[derive(Debug, Clone, Serialize)]
pub struct AreaReport {
    pub jacobian: JacobianStats,
    pub masses: Vec<MassCheck>,
}

impl AreaReport {
    pub fn passes(&self, jac_tol: f64) -> bool {
        self.jacobian.max_abs_dev < jac_tol && self.masses.iter().all(MassCheck::within_3_sigma)
    }
}

/// The assembled perturbation T̃ of the linear model on the covering
/// plane: T with the modification T_n = M_n ∘ T₀ ∘ M_n⁻¹ applied on D_n
/// for every level n ≥ n₀, where T₀ = T ∘ τ in (u,v) coordinates. Levels
/// are resolved lazily from the u-band, with no truncation.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedMap {
    linear: LinearModel,
    regions: RegionSpec,
    twist: TwistParams,
    boxes: ChartBoxes,
    n0: u32,
}

impl PerturbedMap {
    pub fn new(
        linear: LinearModel,
        twist: TwistParams,
        boxes: ChartBoxes,
        n0_override: Option<u32>,
    ) -> Result<Self> {
        let regions = RegionSpec::new(linear.lambda())?;
        let n0_min = compute_n0(&regions, &boxes);
        let n0 = match n0_override {
            None => n0_min,
            Some(n) if n >= n0_min => n,
            Some(n) => {
                return Err(Error::GeometryGate(format!(
                    "n0 = {n} leaves D_n ⊄ W; need n0 >= {n0_min}"
                )))
            }
        };
        Ok(Self { linear, regions, twist, boxes, n0 })
    }

    pub fn standard() -> Self {
        let linear = LinearModel::standard();
        let twist = TwistParams::standard(linear.lambda()).expect("default twist fits");
        Self::new(linear, twist, ChartBoxes::standard(), None).expect("defaults are valid")
    }

    #[inline]
    pub fn n0(&self) -> u32 {
        self.n0
    }

    #[inline]
    pub fn linear(&self) -> &LinearModel {
        &self.linear
    }

    #[inline]
    pub fn regions(&self) -> &RegionSpec {
        &self.regions
    }

    #[inline]
    pub fn twist(&self) -> &TwistParams {
        &self.twist
    }

    #[inline]
    pub fn boxes(&self) -> &ChartBoxes {
        &self.boxes
    }

    /// The level-n fixed point u_n = (2⁻ⁿ, 2⁻ⁿ).
    pub fn fixed_point(n: u32) -> PlanePoint {
        let s = f64::powi(2.0, -(n as i32));
        PlanePoint::new(s, s)
    }

    /// T₀ = T ∘ τ on the unscaled region D. Errors when the point is not
    /// in D (up to a relative float tolerance on the band membership).
    pub fn t0_apply(&self, p: PlanePoint) -> Result<PlanePoint> {
        if !(p.x > 0.0 && p.y > 0.0) {
            return Err(Error::OutsideFirstQuadrant);
        }
        let u = p.x * p.y;
        let v = 0.5 * (p.y / p.x).ln();
        let tol = 1e-12;
        let (v_lo, v_hi) = self.regions.v_band();
        if u < 0.5 * (1.0 - tol)
            || u > 2.0 * (1.0 + tol)
            || v < v_lo - tol
            || v > v_hi + tol
        {
            return Err(Error::OutsideRegion);
        }
        Ok(self.t0_unchecked(p))
    }

    /// T₀ without the domain check; identity-twist points take the exact
    /// linear path.
    fn t0_unchecked(&self, p: PlanePoint) -> PlanePoint {
        let h = HyperCoord {
            u: p.x * p.y,
            v: 0.5 * (p.y / p.x).ln(),
        };
        let t = self.twist.tau(h);
        if t == h {
            // Twist is the identity here; T exactly.
            return self.linear.apply(p);
        }
        HyperCoord {
            u: t.u,
            v: t.v - self.regions.ln_lambda(),
        }
        .to_plane()
    }

    fn t0_inv_unchecked(&self, q: PlanePoint) -> PlanePoint {
        // T₀⁻¹ = τ⁻¹ ∘ T⁻¹.
        let h = HyperCoord {
            u: q.x * q.y,
            v: 0.5 * (q.y / q.x).ln() + self.regions.ln_lambda(),
        };
        let t = self.twist.tau_inv(h);
        if t == h {
            return self.linear.apply_inv(q);
        }
        t.to_plane()
    }

    /// T̃ with an underflow flag: u = xy below the guard is mapped by the
    /// unmodified shear and flagged.
    pub fn apply_flagged(&self, p: PlanePoint) -> (PlanePoint, bool) {
        if p.x > 0.0 && p.y > 0.0 {
            let u = p.x * p.y;
            if u < UNDERFLOW_U {
                return (self.linear.apply(p), true);
            }
            if let Some(n) = self.regions.d_interior_level(p) {
                if n >= self.n0 {
                    let scale = f64::powi(2.0, n as i32);
                    let big = self.t0_unchecked(p.scale(scale));
                    return (big.scale(1.0 / scale), false);
                }
            }
        }
        (self.linear.apply(p), false)
    }

    pub fn apply_inv_flagged(&self, q: PlanePoint) -> (PlanePoint, bool) {
        if q.x > 0.0 && q.y > 0.0 {
            let u = q.x * q.y;
            if u < UNDERFLOW_U {
                return (self.linear.apply_inv(q), true);
            }
            if let Some(n) = self.regions.e_interior_level(q) {
                if n >= self.n0 {
                    let scale = f64::powi(2.0, n as i32);
                    let big = self.t0_inv_unchecked(q.scale(scale));
                    return (big.scale(1.0 / scale), false);
                }
            }
        }
        (self.linear.apply_inv(q), false)
    }

    /// C⁰ distance bound between T̃_{n−1} and T̃_n: 2⁻ⁿ·diam E₀.
    pub fn c0_level_distance(&self, n: u32) -> f64 {
        f64::powi(2.0, -(n as i32)) * self.regions.diam_e0()
    }

    /// Finite-difference Jacobian sweep of T̃ over the interior of the
    /// level-n₀ copy of D, away from the non-smooth circles and the region
    /// boundaries. Samples are uniform in area ((u,v) is unit-Jacobian).
    pub fn jacobian_check(&self, samples: usize, seed: u64) -> JacobianStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = f64::powi(2.0, -(self.n0 as i32));
        let h = 1e-6 * scale;
        let (v_lo, v_hi) = self.regions.v_band();
        // Exclusion margin around the non-smooth set, in blown-up (u,v).
        let margin = 1e-3;
        let mut max_dev = 0.0f64;
        let mut accepted = 0;
        while accepted < samples {
            let u = rng.gen_range(0.5..2.0);
            let v = rng.gen_range(v_lo..v_hi);
            if u - 0.5 < margin || 2.0 - u < margin || v - v_lo < margin || v_hi - v < margin {
                continue;
            }
            let wu = self.twist.squeeze() * (u - 1.0);
            let wv = (v - 0.5 * self.regions.ln_lambda()) / self.twist.squeeze();
            let r = wu.hypot(wv);
            if (r - self.twist.r_star()).abs() < margin || (r - self.twist.r0()).abs() < margin {
                continue;
            }
            let p = HyperCoord { u, v }.to_plane().scale(scale);
            let f = |p: PlanePoint| self.apply_flagged(p).0;
            let dx1 = f(PlanePoint::new(p.x + h, p.y));
            let dx0 = f(PlanePoint::new(p.x - h, p.y));
            let dy1 = f(PlanePoint::new(p.x, p.y + h));
            let dy0 = f(PlanePoint::new(p.x, p.y - h));
            let jxx = (dx1.x - dx0.x) / (2.0 * h);
            let jyx = (dx1.y - dx0.y) / (2.0 * h);
            let jxy = (dy1.x - dy0.x) / (2.0 * h);
            let jyy = (dy1.y - dy0.y) / (2.0 * h);
            let det = jxx * jyy - jxy * jyx;
            max_dev = max_dev.max((det - 1.0).abs());
            accepted += 1;
        }
        JacobianStats { samples, max_abs_dev: max_dev }
    }

    /// Monte Carlo comparison of μ(T̃(A)) against μ(A) for an axis-aligned
    /// rectangle A = [x0,x1]×[y0,y1]. Membership in the image is decided
    /// through the inverse map; the bounding box of the image is taken
    /// from a dense boundary sweep, slightly inflated.
    pub fn mass_check(&self, rect: [f64; 4], samples: usize, seed: u64) -> MassCheck {
        let [x0, x1, y0, y1] = rect;
        let true_mass = (x1 - x0) * (y1 - y0);
        // Bounding box of the image from the image of the boundary; a
        // homeomorphism attains coordinate extremes there.
        let per_side = 2048;
        let mut bx0 = f64::INFINITY;
        let mut bx1 = f64::NEG_INFINITY;
        let mut by0 = f64::INFINITY;
        let mut by1 = f64::NEG_INFINITY;
        for i in 0..=per_side {
            let t = i as f64 / per_side as f64;
            for p in [
                PlanePoint::new(x0 + t * (x1 - x0), y0),
                PlanePoint::new(x0 + t * (x1 - x0), y1),
                PlanePoint::new(x0, y0 + t * (y1 - y0)),
                PlanePoint::new(x1, y0 + t * (y1 - y0)),
            ] {
                let q = self.apply_flagged(p).0;
                bx0 = bx0.min(q.x);
                bx1 = bx1.max(q.x);
                by0 = by0.min(q.y);
                by1 = by1.max(q.y);
            }
        }
        let pad_x = 0.01 * (bx1 - bx0);
        let pad_y = 0.01 * (by1 - by0);
        bx0 -= pad_x;
        bx1 += pad_x;
        by0 -= pad_y;
        by1 += pad_y;
        let box_mass = (bx1 - bx0) * (by1 - by0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0usize;
        for _ in 0..samples {
            let q = PlanePoint::new(rng.gen_range(bx0..bx1), rng.gen_range(by0..by1));
            let p = self.apply_inv_flagged(q).0;
            if p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1 {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / samples as f64;
        let est_mass = box_mass * p_hat;
        let sigma = box_mass * (p_hat * (1.0 - p_hat) / samples as f64).sqrt();
        MassCheck { rect, true_mass, est_mass, sigma, samples }
    }

    /// Area-preservation evidence: the Jacobian sweep plus Monte Carlo
    /// mass checks on two rectangles inside D_{n₀}, one centered on the
    /// level fixed point and one straddling the twist annulus.
    pub fn verify_area(&self, jac_samples: usize, mc_samples: usize, seed: u64) -> AreaReport {
        let jacobian = self.jacobian_check(jac_samples, seed);
        let s = f64::powi(2.0, -(self.n0 as i32));
        let rects = [
            [0.75 * s, 1.25 * s, 0.75 * s, 1.25 * s],
            [0.9 * s, 1.6 * s, 0.85 * s, 1.3 * s],
        ];
        let masses = rects
            .iter()
            .enumerate()
            .map(|(i, &r)| self.mass_check(r, mc_samples, seed ^ (0x9e37 + i as u64)))
            .collect();
        AreaReport { jacobian, masses }
    }
}

impl Dynamics for PerturbedMap {
    type P = PlanePoint;

    fn apply(&self, p: PlanePoint) -> PlanePoint {
        self.apply_flagged(p).0
    }

    fn apply_inv(&self, p: PlanePoint) -> PlanePoint {
        self.apply_inv_flagged(p).0
    }
}

/// The corresponding perturbation g of the toral automorphism f: equal to
/// φ ∘ T̃ ∘ φ⁻¹ where the chart sees a modified level, equal to f
/// everywhere else. All modifications lie inside the ball W of radius
/// δ/2, so dist_C0(f, g) ≤ diam W = δ.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedTorusMap {
    anosov: AnosovMap,
    chart: EigenChart,
    plane: PerturbedMap,
}

impl PerturbedTorusMap {
    pub fn new(anosov: AnosovMap, chart: EigenChart, plane: PerturbedMap) -> Result<Self> {
        let xi = plane.boxes().xi;
        let lambda = anosov.lambda();
        let k_corner = (2.0f64).sqrt() * xi;
        let tk_corner = (lambda * xi).hypot(xi / lambda);
        if k_corner.max(tk_corner) >= chart.r_v() {
            return Err(Error::GeometryGate(format!(
                "K ∪ T(K) must fit inside the chart: corner norm {} >= r_V = {}",
                k_corner.max(tk_corner),
                chart.r_v()
            )));
        }
        if (plane.linear().lambda() - lambda).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "plane model and toral automorphism must share the eigenvalue".into(),
            ));
        }
        Ok(Self { anosov, chart, plane })
    }

    pub fn standard() -> Self {
        let anosov = AnosovMap::standard();
        let chart = EigenChart::standard(&anosov);
        Self::new(anosov, chart, PerturbedMap::standard()).expect("defaults are valid")
    }

    #[inline]
    pub fn anosov(&self) -> &AnosovMap {
        &self.anosov
    }

    #[inline]
    pub fn chart(&self) -> &EigenChart {
        &self.chart
    }

    #[inline]
    pub fn plane(&self) -> &PerturbedMap {
        &self.plane
    }

    /// The torus fixed point p_n = φ(u_n).
    pub fn torus_fixed_point(&self, n: u32) -> TorusPoint {
        self.chart
            .chart_to_torus(PerturbedMap::fixed_point(n))
            .expect("ladder points lie inside the chart")
    }
}

impl Dynamics for PerturbedTorusMap {
    type P = TorusPoint;

    fn apply(&self, t: TorusPoint) -> TorusPoint {
        if let Ok(p) = self.chart.torus_to_chart(t) {
            if let Some(n) = self.plane.regions().d_interior_level(p) {
                if n >= self.plane.n0() {
                    let q = self.plane.apply(p);
                    return self
                        .chart
                        .chart_to_torus(q)
                        .expect("modified levels stay inside W");
                }
            }
        }
        self.anosov.apply(t)
    }

    fn apply_inv(&self, t: TorusPoint) -> TorusPoint {
        if let Ok(q) = self.chart.torus_to_chart(t) {
            if let Some(n) = self.plane.regions().e_interior_level(q) {
                if n >= self.plane.n0() {
                    let p = self.plane.apply_inv(q);
                    return self
                        .chart
                        .chart_to_torus(p)
                        .expect("modified levels stay inside W");
                }
            }
        }
        self.anosov.apply_inv(t)
    }
}
