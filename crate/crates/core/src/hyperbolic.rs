//! The linear Anosov diffeomorphism of the torus, its eigen-structure and
//! isometric local chart, the hyperbolic linear model T(x,y) = (λx, λ⁻¹y),
//! and the canonical area-preserving coordinates (u,v) = (xy, ½ln(y/x)) in
//! which T is the shear (u, v − ln λ).

use crate::error::{Error, Result};
use crate::spaces::{PlanePoint, Point, TorusPoint};
use crate::Dynamics;

/// Residual tolerance for the cached eigen-structure.
const EIGEN_TOL: f64 = 1e-12;

/// A hyperbolic toral automorphism given by a symmetric unimodular integer
/// matrix. Only (2,1;1,1) is validated; the eigen-structure is orthonormal
/// because the matrix is symmetric.
#[derive(Debug, Clone, Copy)]
pub struct AnosovMap {
    m: [[i64; 2]; 2],
    lambda: f64,
    e_u: PlanePoint,
    e_s: PlanePoint,
}

impl AnosovMap {
    /// The map of the torus given by the matrix (2,1;1,1), with
    /// λ = (3+√5)/2.
    pub fn standard() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("standard matrix is hyperbolic")
    }

    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det != 1 {
            return Err(Error::InvalidInput(format!("matrix must have determinant 1, got {det}")));
        }
        if m[0][1] != m[1][0] {
            return Err(Error::InvalidInput("matrix must be symmetric".into()));
        }
        let trace = (m[0][0] + m[1][1]) as f64;
        if trace <= 2.0 {
            return Err(Error::InvalidInput("matrix must be hyperbolic (trace > 2)".into()));
        }
        // Eigenvalues λ, λ⁻¹ of a det-1 symmetric matrix; unit eigenvectors.
        let disc = (trace * trace - 4.0).sqrt();
        let lambda = (trace + disc) / 2.0;
        let unit = |vx: f64, vy: f64| {
            let n = vx.hypot(vy);
            PlanePoint::new(vx / n, vy / n)
        };
        let b = m[0][1] as f64;
        let e_u = unit(b, lambda - m[0][0] as f64);
        let s = unit(b, 1.0 / lambda - m[0][0] as f64);
        // Orient the contracting eigenvector so det [e_u e_s] = +1.
        let e_s = if e_u.x * s.y - e_u.y * s.x > 0.0 {
            s
        } else {
            PlanePoint::new(-s.x, -s.y)
        };
        Ok(Self { m, lambda, e_u, e_s })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn ln_lambda(&self) -> f64 {
        self.lambda.ln()
    }

    #[inline]
    pub fn e_u(&self) -> PlanePoint {
        self.e_u
    }

    #[inline]
    pub fn e_s(&self) -> PlanePoint {
        self.e_s
    }

    #[inline]
    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.m
    }

    /// Matrix action on the covering plane.
    pub fn apply_plane(&self, p: PlanePoint) -> PlanePoint {
        PlanePoint::new(
            self.m[0][0] as f64 * p.x + self.m[0][1] as f64 * p.y,
            self.m[1][0] as f64 * p.x + self.m[1][1] as f64 * p.y,
        )
    }

    /// Inverse matrix action on the covering plane.
    pub fn apply_plane_inv(&self, p: PlanePoint) -> PlanePoint {
        // (a b; c d)⁻¹ = (d -b; -c a) for determinant 1.
        PlanePoint::new(
            self.m[1][1] as f64 * p.x - self.m[0][1] as f64 * p.y,
            -self.m[1][0] as f64 * p.x + self.m[0][0] as f64 * p.y,
        )
    }

    /// Largest eigen-residual ‖A e − μ e‖ over both eigenpairs.
    pub fn eigen_residual(&self) -> f64 {
        let r1 = {
            let v = self.apply_plane(self.e_u);
            v.dist(self.e_u.scale(self.lambda))
        };
        let r2 = {
            let v = self.apply_plane(self.e_s);
            v.dist(self.e_s.scale(1.0 / self.lambda))
        };
        r1.max(r2)
    }
}

impl Dynamics for AnosovMap {
    type P = TorusPoint;

    fn apply(&self, p: TorusPoint) -> TorusPoint {
        let q = self.apply_plane(PlanePoint::new(p.x(), p.y()));
        TorusPoint::new(q.x, q.y)
    }

    fn apply_inv(&self, p: TorusPoint) -> TorusPoint {
        let q = self.apply_plane_inv(PlanePoint::new(p.x(), p.y()));
        TorusPoint::new(q.x, q.y)
    }
}

/// The isometric, area-preserving local chart φ : V → T² about the fixed
/// point of the automorphism: rotation onto the eigenbasis followed by
/// reduction mod 1. Satisfies f ∘ φ = φ ∘ T on the chart domain.
#[derive(Debug, Clone, Copy)]
pub struct EigenChart {
    e_u: PlanePoint,
    e_s: PlanePoint,
    r_v: f64,
}

impl EigenChart {
    pub const DEFAULT_RADIUS: f64 = 0.2;

    pub fn new(map: &AnosovMap, r_v: f64) -> Result<Self> {
        if !(r_v > 0.0 && r_v <= 0.5) {
            return Err(Error::GeometryGate(format!(
                "chart radius must lie in (0, 1/2], got {r_v}"
            )));
        }
        if map.eigen_residual() > EIGEN_TOL {
            return Err(Error::GeometryGate("eigenvector residual too large".into()));
        }
        Ok(Self {
            e_u: map.e_u(),
            e_s: map.e_s(),
            r_v,
        })
    }

    pub fn standard(map: &AnosovMap) -> Self {
        Self::new(map, Self::DEFAULT_RADIUS).expect("default radius is valid")
    }

    #[inline]
    pub fn r_v(&self) -> f64 {
        self.r_v
    }

    /// φ: chart coordinates to the torus. The rotation has columns
    /// (e_u, e_s) and determinant +1.
    pub fn chart_to_torus(&self, p: PlanePoint) -> Result<TorusPoint> {
        let norm = p.norm();
        if norm >= self.r_v {
            return Err(Error::OutsideChart { norm, r_v: self.r_v });
        }
        Ok(TorusPoint::new(
            self.e_u.x * p.x + self.e_s.x * p.y,
            self.e_u.y * p.x + self.e_s.y * p.y,
        ))
    }

    /// φ⁻¹ near the fixed point: nearest lift to the origin, rotated back.
    pub fn torus_to_chart(&self, t: TorusPoint) -> Result<PlanePoint> {
        let l = t.centered_lift();
        let p = PlanePoint::new(
            self.e_u.x * l.x + self.e_u.y * l.y,
            self.e_s.x * l.x + self.e_s.y * l.y,
        );
        let norm = p.norm();
        if norm >= self.r_v {
            return Err(Error::OutsideChart { norm, r_v: self.r_v });
        }
        Ok(p)
    }
}

/// The area-preserving linear model T(x,y) = (λx, λ⁻¹y). Leaves every
/// hyperbola xy = k invariant and maps the line y = kx into y = kλ⁻²x.
#[derive(Debug, Clone, Copy)]
pub struct LinearModel {
    lambda: f64,
}

impl LinearModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::InvalidInput(format!("lambda must exceed 1, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn standard() -> Self {
        Self {
            lambda: AnosovMap::standard().lambda(),
        }
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn ln_lambda(&self) -> f64 {
        self.lambda.ln()
    }
}

impl Dynamics for LinearModel {
    type P = PlanePoint;

    fn apply(&self, p: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.lambda * p.x, p.y / self.lambda)
    }

    fn apply_inv(&self, p: PlanePoint) -> PlanePoint {
        PlanePoint::new(p.x / self.lambda, self.lambda * p.y)
    }
}

/// Canonical hyperbolic coordinates on the open first quadrant:
/// u = xy, v = ½ln(y/x). The change of coordinates has Jacobian
/// determinant 1 everywhere, and the linear model becomes the shear
/// (u, v) ↦ (u, v − ln λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperCoord {
    pub u: f64,
    pub v: f64,
}

impl HyperCoord {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u > 0.0) {
            return Err(Error::OutsideFirstQuadrant);
        }
        Ok(Self { u, v })
    }

    /// (x, y) ↦ (xy, ½ln(y/x)), defined on the open first quadrant.
    pub fn from_plane(p: PlanePoint) -> Result<Self> {
        if !(p.x > 0.0 && p.y > 0.0) {
            return Err(Error::OutsideFirstQuadrant);
        }
        Ok(Self {
            u: p.x * p.y,
            v: 0.5 * (p.y / p.x).ln(),
        })
    }

    /// (u, v) ↦ (√u·e^{−v}, √u·e^{v}).
    pub fn to_plane(self) -> PlanePoint {
        let r = self.u.sqrt();
        PlanePoint::new(r * (-self.v).exp(), r * self.v.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-12;

    fn lambda_exact() -> f64 {
        (3.0 + 5.0f64.sqrt()) / 2.0
    }

    #[test]
    fn eigen_residuals_below_tolerance() {
        let f = AnosovMap::standard();
        assert!(f.eigen_residual() < EPS);
        assert!((f.lambda() - lambda_exact()).abs() < EPS);
    }

    #[test]
    fn eigenbasis_is_positively_oriented() {
        let f = AnosovMap::standard();
        let det = f.e_u().x * f.e_s().y - f.e_u().y * f.e_s().x;
        assert!((det - 1.0).abs() < EPS);
        // Symmetric matrix: eigenvectors orthogonal.
        let dot = f.e_u().x * f.e_s().x + f.e_u().y * f.e_s().y;
        assert!(dot.abs() < EPS);
    }

    #[test]
    fn anosov_fixes_origin() {
        let f = AnosovMap::standard();
        assert_eq!(f.apply(TorusPoint::new(0.0, 0.0)), TorusPoint::new(0.0, 0.0));
    }

    #[test]
    fn anosov_half_half_maps_to_half_zero() {
        let f = AnosovMap::standard();
        assert_eq!(f.apply(TorusPoint::new(0.5, 0.5)), TorusPoint::new(0.5, 0.0));
    }

    #[test]
    fn anosov_inverse_round_trip() {
        let f = AnosovMap::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
            assert!(f.apply_inv(f.apply(p)).dist(p) < 1e-13);
            assert!(f.apply(f.apply_inv(p)).dist(p) < 1e-13);
        }
    }

    #[test]
    fn rejects_non_unimodular_and_non_hyperbolic() {
        assert!(AnosovMap::new([[2, 0], [0, 2]]).is_err());
        assert!(AnosovMap::new([[1, 0], [0, 1]]).is_err());
        assert!(AnosovMap::new([[2, 1], [3, 1]]).is_err());
    }

    #[test]
    fn linear_model_unit_point() {
        let t = LinearModel::standard();
        let q = t.apply(PlanePoint::new(1.0, 1.0));
        assert!((q.x - lambda_exact()).abs() < EPS);
        assert!((q.y - 1.0 / lambda_exact()).abs() < EPS);
    }

    #[test]
    fn linear_model_preserves_hyperbolas() {
        let t = LinearModel::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = PlanePoint::new(rng.gen_range(0.01..3.0), rng.gen_range(0.01..3.0));
            let q = t.apply(p);
            assert!((q.x * q.y - p.x * p.y).abs() < 1e-12 * (1.0 + p.x * p.y));
        }
    }

    #[test]
    fn linear_model_shears_lines() {
        // y = kx maps into y = kλ⁻²x.
        let t = LinearModel::standard();
        let k = 0.7;
        for x in [0.1, 1.0, 2.5] {
            let q = t.apply(PlanePoint::new(x, k * x));
            let slope = q.y / q.x;
            assert!((slope - k / (lambda_exact() * lambda_exact())).abs() < EPS);
        }
    }

    #[test]
    fn hyper_coords_unit_point() {
        let h = HyperCoord::from_plane(PlanePoint::new(1.0, 1.0)).unwrap();
        assert_eq!(h.u, 1.0);
        assert_eq!(h.v, 0.0);
    }

    #[test]
    fn hyper_coords_closed_form_inverse() {
        let p = HyperCoord::new(2.0, 0.0).unwrap().to_plane();
        assert!((p.x - 2.0f64.sqrt()).abs() < EPS);
        assert!((p.y - 2.0f64.sqrt()).abs() < EPS);
    }

    #[test]
    fn hyper_coords_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            let p = PlanePoint::new(rng.gen_range(0.01..4.0), rng.gen_range(0.01..4.0));
            let q = HyperCoord::from_plane(p).unwrap().to_plane();
            assert!(p.dist(q) < 1e-12 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn hyper_coords_rejects_closed_quadrant_boundary() {
        assert!(HyperCoord::from_plane(PlanePoint::new(0.0, 1.0)).is_err());
        assert!(HyperCoord::from_plane(PlanePoint::new(1.0, -0.2)).is_err());
        assert!(HyperCoord::new(0.0, 1.0).is_err());
    }

    #[test]
    fn linear_model_is_a_shear_in_hyper_coords() {
        let t = LinearModel::standard();
        let ln_lambda = t.ln_lambda();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let p = PlanePoint::new(rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
            let h = HyperCoord::from_plane(p).unwrap();
            let h2 = HyperCoord::from_plane(t.apply(p)).unwrap();
            assert!((h2.u - h.u).abs() < 1e-12 * (1.0 + h.u));
            assert!((h2.v - (h.v - ln_lambda)).abs() < 1e-12);
        }
    }

    #[test]
    fn uv_chart_jacobian_is_one() {
        // Finite-difference determinant of (x,y) ↦ (u,v) at random
        // first-quadrant points.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10_000 {
            let x: f64 = rng.gen_range(0.05..3.0);
            let y: f64 = rng.gen_range(0.05..3.0);
            let h = 1e-6 * x.max(y).max(1.0);
            let f = |x: f64, y: f64| HyperCoord::from_plane(PlanePoint::new(x, y)).unwrap();
            let ux = (f(x + h, y).u - f(x - h, y).u) / (2.0 * h);
            let uy = (f(x, y + h).u - f(x, y - h).u) / (2.0 * h);
            let vx = (f(x + h, y).v - f(x - h, y).v) / (2.0 * h);
            let vy = (f(x, y + h).v - f(x, y - h).v) / (2.0 * h);
            let det = ux * vy - uy * vx;
            assert!((det - 1.0).abs() < 1e-6, "det = {det} at ({x}, {y})");
        }
    }

    #[test]
    fn chart_fixes_origin() {
        let f = AnosovMap::standard();
        let chart = EigenChart::standard(&f);
        let t = chart.chart_to_torus(PlanePoint::new(0.0, 0.0)).unwrap();
        assert_eq!(t, TorusPoint::new(0.0, 0.0));
    }

    #[test]
    fn chart_conjugacy_holds_on_domain() {
        let f = AnosovMap::standard();
        let chart = EigenChart::standard(&f);
        let t = LinearModel::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        while checked < 10_000 {
            let p = PlanePoint::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            if p.norm() >= chart.r_v() || t.apply(p).norm() >= chart.r_v() {
                continue;
            }
            let lhs = f.apply(chart.chart_to_torus(p).unwrap());
            let rhs = chart.chart_to_torus(t.apply(p)).unwrap();
            assert!(lhs.dist(rhs) < EPS);
            checked += 1;
        }
    }

    #[test]
    fn chart_is_an_isometry() {
        let f = AnosovMap::standard();
        let chart = EigenChart::standard(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..1000 {
            let p = PlanePoint::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
            let q = PlanePoint::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
            let dt = chart
                .chart_to_torus(p)
                .unwrap()
                .dist(chart.chart_to_torus(q).unwrap());
            assert!((dt - p.dist(q)).abs() < EPS);
        }
    }

    #[test]
    fn chart_round_trip_and_domain_error() {
        let f = AnosovMap::standard();
        let chart = EigenChart::standard(&f);
        let p = PlanePoint::new(0.05, -0.03);
        let back = chart.torus_to_chart(chart.chart_to_torus(p).unwrap()).unwrap();
        assert!(p.dist(back) < EPS);
        assert!(matches!(
            chart.chart_to_torus(PlanePoint::new(0.3, 0.0)),
            Err(Error::OutsideChart { .. })
        ));
        assert!(chart.torus_to_chart(TorusPoint::new(0.5, 0.5)).is_err());
    }

    #[test]
    fn eigen_segments_grow_and_contract_at_rate_lambda() {
        let f = AnosovMap::standard();
        let lam = f.lambda();
        // Segment through the origin along e_u: diameter multiplies by λ per
        // step while the lift stays below the wrap scale; along e_s it
        // contracts by λ⁻¹.
        for (dir, rate) in [(f.e_u(), lam), (f.e_s(), 1.0 / lam)] {
            let len = 1e-4;
            let mut a = TorusPoint::new(dir.x * len, dir.y * len);
            let mut b = TorusPoint::new(-dir.x * len, -dir.y * len);
            let mut d = a.dist(b);
            for _ in 0..4 {
                a = f.apply(a);
                b = f.apply(b);
                let d2 = a.dist(b);
                assert!((d2 / d - rate).abs() < 0.01 * rate);
                d = d2;
            }
        }
    }
}
