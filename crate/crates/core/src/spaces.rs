//! Points, metrics, and chain approximations of continua on the flat torus
//! T² = R²/Z², the covering plane, and the antipodal quotient sphere
//! S² = T²/(p ~ −p).

use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Reduce a coordinate into [0, 1). `rem_euclid` can round a tiny negative
/// residue up to exactly 1.0, which the explicit fix-up maps back to 0.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Shortest signed representative of a coordinate difference, in [-1/2, 1/2).
#[inline]
fn wrap_signed(d: f64) -> f64 {
    wrap_unit(d + 0.5) - 0.5
}

/// A metric point type with a canonical short-path interpolation, the
/// minimum needed to propagate chains.
pub trait Point: Copy + std::fmt::Debug {
    fn dist(self, other: Self) -> f64;

    /// Point at parameter `t` in [0, 1] on the canonical short path from
    /// `self` to `other`.
    fn lerp(self, other: Self, t: f64) -> Self;
}

/// A point of the flat torus with both coordinates normalized into [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x: wrap_unit(x),
            y: wrap_unit(y),
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    /// The antipodal point −p mod 1.
    pub fn antipode(&self) -> Self {
        Self::new(-self.x, -self.y)
    }

    /// The representative of this point in [-1/2, 1/2)², the lift nearest
    /// to the origin.
    pub fn centered_lift(&self) -> PlanePoint {
        PlanePoint::new(wrap_signed(self.x), wrap_signed(self.y))
    }

    /// The lift of this point nearest to the plane point `anchor`.
    pub fn lift_near(&self, anchor: PlanePoint) -> PlanePoint {
        PlanePoint::new(
            anchor.x + wrap_signed(self.x - anchor.x),
            anchor.y + wrap_signed(self.y - anchor.y),
        )
    }
}

impl Point for TorusPoint {
    /// Euclidean distance minimized over integer translates; the per-axis
    /// minimum realizes it on the square torus. Range [0, √2/2].
    fn dist(self, other: Self) -> f64 {
        let dx = wrap_signed(self.x - other.x).abs();
        let dy = wrap_signed(self.y - other.y).abs();
        dx.hypot(dy)
    }

    fn lerp(self, other: Self, t: f64) -> Self {
        let dx = wrap_signed(other.x - self.x);
        let dy = wrap_signed(other.y - self.y);
        Self::new(self.x + t * dx, self.y + t * dy)
    }
}

impl Serialize for TorusPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&self.x)?;
        tup.serialize_element(&self.y)?;
        tup.end()
    }
}

/// A point of the covering plane or of a local chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite());
        Self { x, y }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Point for PlanePoint {
    fn dist(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

impl Serialize for PlanePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&self.x)?;
        tup.serialize_element(&self.y)?;
        tup.end()
    }
}

/// An antipodal class {p, −p} of the torus, stored as its canonical
/// representative: the lexicographically smaller of the two lifts in [0,1)².
/// The four self-antipodal points (coordinates in {0, 1/2}) represent
/// themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    rep: TorusPoint,
}

impl SpherePoint {
    /// The canonical map q : T² → S².
    pub fn from_torus(p: TorusPoint) -> Self {
        let a = p;
        let b = p.antipode();
        let rep = if (b.x, b.y) < (a.x, a.y) { b } else { a };
        Self { rep }
    }

    #[inline]
    pub fn rep(&self) -> TorusPoint {
        self.rep
    }

    /// Both torus lifts of the class. Self-antipodal classes report the
    /// same lift twice.
    pub fn lifts(&self) -> [TorusPoint; 2] {
        [self.rep, self.rep.antipode()]
    }
}

impl Point for SpherePoint {
    /// Quotient metric: the torus distance minimized over the two lifts.
    fn dist(self, other: Self) -> f64 {
        self.rep
            .dist(other.rep)
            .min(self.rep.dist(other.rep.antipode()))
    }

    fn lerp(self, other: Self, t: f64) -> Self {
        // Interpolate on the torus toward whichever lift of `other` is
        // nearer, then project back.
        let d_rep = self.rep.dist(other.rep);
        let d_anti = self.rep.dist(other.rep.antipode());
        let target = if d_anti < d_rep {
            other.rep.antipode()
        } else {
            other.rep
        };
        Self::from_torus(self.rep.lerp(target, t))
    }
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rep.serialize(serializer)
    }
}

/// Canonical representative of the antipodal class of `p`.
pub fn sphere_canon(p: TorusPoint) -> SpherePoint {
    SpherePoint::from_torus(p)
}

/// Hausdorff distance between nonempty finite point sets: the maximum of
/// the two directed distances under the ambient metric.
pub fn hausdorff_dist<P: Point>(a: &[P], b: &[P]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let directed = |from: &[P], to: &[P]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| p.dist(*q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// An ordered finite point sequence with a mesh bound, the computational
/// surrogate for a continuum. All continuum claims are interpreted at mesh
/// resolution.
#[derive(Debug, Clone)]
pub struct Chain<P: Point> {
    pts: Vec<P>,
    eta: f64,
}

impl<P: Point> Chain<P> {
    /// Build a chain, checking the mesh invariant: consecutive points at
    /// distance at most `eta`.
    pub fn new(pts: Vec<P>, eta: f64) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
        }
        for (i, w) in pts.windows(2).enumerate() {
            let gap = w[0].dist(w[1]);
            if gap > eta {
                return Err(Error::MeshViolation { index: i, gap, eta });
            }
        }
        Ok(Self { pts, eta })
    }

    /// Build a chain from control points, subdividing each edge along the
    /// canonical short path until the mesh bound holds.
    pub fn from_path(control: &[P], eta: f64) -> Result<Self> {
        if control.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
        }
        let mut pts = vec![control[0]];
        for w in control.windows(2) {
            let gap = w[0].dist(w[1]);
            let pieces = (gap / eta).ceil().max(1.0) as usize;
            for i in 1..=pieces {
                pts.push(w[0].lerp(w[1], i as f64 / pieces as f64));
            }
        }
        Self::new(pts, eta)
    }

    pub fn singleton(p: P, eta: f64) -> Self {
        Self { pts: vec![p], eta }
    }

    #[inline]
    pub fn pts(&self) -> &[P] {
        &self.pts
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Maximum pairwise distance over the chain points.
    pub fn diam(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.pts.len() {
            for j in (i + 1)..self.pts.len() {
                best = best.max(self.pts[i].dist(self.pts[j]));
            }
        }
        best
    }

    /// Smallest distance from any chain point to `p`.
    pub fn dist_to(&self, p: P) -> f64 {
        self.pts
            .iter()
            .map(|q| q.dist(p))
            .fold(f64::INFINITY, f64::min)
    }
}
