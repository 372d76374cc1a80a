//! Hyperbolic plane kernel in the hyperboloid model.
//!
//! Points live on the upper sheet of `x1² + x2² − x3² = −1` with the
//! Minkowski form `⟨u,v⟩ = u1v1 + u2v2 − u3v3`. Curvature is −1. Every
//! operation here is a closed-form expression; nothing iterates.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tangent norms below this are treated as zero (degenerate edges).
pub const ZERO_LENGTH: f64 = 1e-14;

#[inline]
pub fn minkowski(u: &Vec3, v: &Vec3) -> f64 {
    u.x * v.x + u.y * v.y - u.z * v.z
}

const J: Matrix3<f64> = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);

/// A point of the hyperbolic plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint(Vec3);

impl HPoint {
    pub const ORIGIN: HPoint = HPoint(Vec3::new(0.0, 0.0, 1.0));

    /// The point whose first two hyperboloid coordinates are `(x, y)`.
    pub fn from_spatial(x: f64, y: f64) -> Self {
        HPoint(Vec3::new(x, y, (1.0 + x * x + y * y).sqrt()))
    }

    /// Puts a vector that is already (nearly) on the sheet back onto it by
    /// recomputing the third coordinate from the first two.
    pub fn resheet(v: Vec3) -> Self {
        Self::from_spatial(v.x, v.y)
    }

    /// Rescales a future-pointing timelike vector onto the sheet. Vectors
    /// that have drifted off the timelike cone keep their spatial part.
    pub fn project(v: Vec3) -> Self {
        let s = -minkowski(&v, &v);
        let v = if s > 0.0 && v.z > 0.0 { v / s.sqrt() } else { v };
        Self::from_spatial(v.x, v.y)
    }

    /// Wraps raw coordinates without re-projecting. Used by readers that
    /// must reproduce stored coordinates bit for bit.
    pub fn from_coords_unchecked(v: Vec3) -> Self {
        HPoint(v)
    }

    /// The point at distance `r` from the origin in direction `theta`.
    pub fn polar(r: f64, theta: f64) -> Self {
        let s = r.sinh();
        HPoint(Vec3::new(s * theta.cos(), s * theta.sin(), r.cosh()))
    }

    #[inline]
    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    /// `|⟨p,p⟩ + 1|`, zero for an exact point.
    pub fn sheet_residual(&self) -> f64 {
        (minkowski(&self.0, &self.0) + 1.0).abs()
    }

    /// Coordinates in the Poincaré disk.
    pub fn to_poincare(&self) -> (f64, f64) {
        let d = 1.0 + self.0.z;
        (self.0.x / d, self.0.y / d)
    }

    /// Coordinates in the Beltrami–Klein disk, where geodesics are chords.
    pub fn to_klein(&self) -> (f64, f64) {
        (self.0.x / self.0.z, self.0.y / self.0.z)
    }

    pub fn from_klein(x: f64, y: f64) -> Self {
        let s = (1.0 - x * x - y * y).max(f64::MIN_POSITIVE).sqrt();
        HPoint(Vec3::new(x / s, y / s, 1.0 / s))
    }
}

/// A tangent vector at a point of the hyperbolic plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVec {
    base: HPoint,
    vec: Vec3,
}

impl TangentVec {
    /// Builds a tangent at `base`, removing any component along `base`.
    pub fn new(base: HPoint, vec: Vec3) -> Self {
        let p = base.0;
        let vec = vec + minkowski(&vec, &p) * p;
        TangentVec { base, vec }
    }

    pub fn zero(base: HPoint) -> Self {
        TangentVec {
            base,
            vec: Vec3::zeros(),
        }
    }

    #[inline]
    pub fn base(&self) -> HPoint {
        self.base
    }

    #[inline]
    pub fn vec(&self) -> &Vec3 {
        &self.vec
    }

    /// Coordinates in the orthonormal frame of [`TangentVec::frame`].
    pub fn local(&self) -> (f64, f64) {
        let u = Boost::to(&self.base).pull(&self.vec);
        (u.x, u.y)
    }

    pub fn norm(&self) -> f64 {
        let (x, y) = self.local();
        x.hypot(y)
    }

    /// Inner product with a tangent at the same base point.
    pub fn dot(&self, other: &TangentVec) -> f64 {
        let b = Boost::to(&self.base);
        let (u, v) = (b.pull(&self.vec), b.pull(&other.vec));
        u.x * v.x + u.y * v.y
    }

    pub fn scale(&self, c: f64) -> Self {
        TangentVec {
            base: self.base,
            vec: self.vec * c,
        }
    }

    /// Sum of two tangents; `other` is assumed to share the base point.
    pub fn add(&self, other: &TangentVec) -> Self {
        TangentVec {
            base: self.base,
            vec: self.vec + other.vec,
        }
    }

    pub fn sub(&self, other: &TangentVec) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// An orthonormal, positively oriented frame at `base`.
    pub fn frame(base: HPoint) -> (TangentVec, TangentVec) {
        let b = Boost::to(&base);
        (
            TangentVec::new(base, b.push(&Vec3::x())),
            TangentVec::new(base, b.push(&Vec3::y())),
        )
    }
}

/// Hyperbolic distance.
///
/// Evaluated as `2·asinh(|q − p|/2)` with the Minkowski norm of the chord,
/// which equals `arccosh(−⟨p,q⟩)` but keeps full relative precision for
/// nearby points.
pub fn dist(p: &HPoint, q: &HPoint) -> f64 {
    let d = q.0 - p.0;
    let chord2 = minkowski(&d, &d);
    if chord2 <= 0.0 {
        return 0.0;
    }
    let s = 0.5 * chord2.sqrt();
    if s < 1.0 {
        2.0 * s.asinh()
    } else {
        (-minkowski(&p.0, &q.0)).max(1.0).acosh()
    }
}

pub fn exp(v: &TangentVec) -> HPoint {
    let p = v.base;
    let b = Boost::to(&p);
    let u = b.pull(&v.vec);
    let n = u.x.hypot(u.y);
    if n == 0.0 {
        return p;
    }
    // displacement from p in its own frame: (sinh n · û, cosh n − 1)
    let s = n.sinh() / n;
    let h = 2.0 * (0.5 * n).sinh().powi(2);
    HPoint::resheet(p.0 + b.push(&Vec3::new(u.x * s, u.y * s, h)))
}

/// Planar coordinates of `q` seen from `p`: the boost taking `p` to the
/// origin, applied to `q − p` so that rounding in the boost cancels for
/// nearby points.
fn seen_from(b: &Boost, p: &HPoint, q: &HPoint) -> (f64, f64) {
    let d = b.pull(&(q.0 - p.0));
    (d.x, d.y)
}

/// Inverse of [`exp`]: the tangent at `p` pointing at `q` with length
/// `dist(p, q)`.
pub fn log(p: &HPoint, q: &HPoint) -> TangentVec {
    if p == q {
        return TangentVec::zero(*p);
    }
    let b = Boost::to(p);
    let (x, y) = seen_from(&b, p, q);
    let rho = x.hypot(y);
    if rho == 0.0 {
        return TangentVec::zero(*p);
    }
    let k = rho.asinh() / rho;
    TangentVec::new(*p, b.push(&Vec3::new(x * k, y * k, 0.0)))
}

/// The boost carrying the origin to a point, applied with compensated dot
/// products.
struct Boost([[f64; 3]; 3]);

impl Boost {
    fn to(p: &HPoint) -> Self {
        let (x, y, z) = (p.0.x, p.0.y, p.0.z);
        let k = 1.0 / (1.0 + z);
        Boost([[1.0 + x * x * k, x * y * k, x], [x * y * k, 1.0 + y * y * k, y], [x, y, z]])
    }

    fn push(&self, v: &Vec3) -> Vec3 {
        let v = [v.x, v.y, v.z];
        Vec3::new(dot3(&self.0[0], &v), dot3(&self.0[1], &v), dot3(&self.0[2], &v))
    }

    /// The inverse `J Bᵀ J`.
    fn pull(&self, v: &Vec3) -> Vec3 {
        let b = &self.0;
        let v = [v.x, v.y, v.z];
        let col = |j: usize| [b[0][j], b[1][j], -b[2][j]];
        Vec3::new(dot3(&col(0), &v), dot3(&col(1), &v), -dot3(&col(2), &v))
    }
}

pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Dot product accumulated with error-free transforms.
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for k in 0..3 {
        let (p, e) = two_prod(a[k], b[k]);
        let (t, f) = two_sum(s, p);
        s = t;
        c += e + f;
    }
    s + c
}

/// Parallel transport of `v` (based at `p`) along the geodesic from `p` to `q`.
///
/// Worked in the frame at `p`, where `p` is the origin and the transport is
/// the differential of the translation to `q`.
pub fn transport(p: &HPoint, q: &HPoint, v: &TangentVec) -> TangentVec {
    if p == q {
        return TangentVec::new(*q, v.vec);
    }
    let b = Boost::to(p);
    let u = b.pull(&v.vec);
    let (x, y) = seen_from(&b, p, q);
    let z = (1.0 + x * x + y * y).sqrt();
    let c = (x * u.x + y * u.y) / (1.0 + z);
    let moved = Vec3::new(u.x + c * x, u.y + c * y, c * (1.0 + z));
    TangentVec::new(*q, b.push(&moved))
}

/// Signed Minkowski volume `det[u, v, p]`.
fn volume(u: &Vec3, v: &Vec3, p: &Vec3) -> f64 {
    Matrix3::from_columns(&[*u, *v, *p]).determinant()
}

/// Unsigned angle between two tangents at the same point, in `[0, π]`.
pub fn angle(u: &TangentVec, v: &TangentVec) -> Result<f64> {
    let b = Boost::to(&u.base);
    let (a, c) = (b.pull(&u.vec), b.pull(&v.vec));
    planar_angle((a.x, a.y), (c.x, c.y)).ok_or(Error::ZeroVector)
}

fn planar_angle(a: (f64, f64), b: (f64, f64)) -> Option<f64> {
    if a.0.hypot(a.1) < ZERO_LENGTH || b.0.hypot(b.1) < ZERO_LENGTH {
        return None;
    }
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    Some(cross.abs().atan2(dot))
}

/// Orientation of the pair `(u, v)` in the tangent plane: +1 when positively
/// oriented, −1 when negatively oriented, 0 when parallel.
pub fn oriented_side(u: &TangentVec, v: &TangentVec) -> i8 {
    let b = Boost::to(&u.base);
    let (a, c) = (b.pull(&u.vec), b.pull(&v.vec));
    let det = a.x * c.y - a.y * c.x;
    let scale = a.x.hypot(a.y) * c.x.hypot(c.y);
    if scale == 0.0 || det.abs() <= ZERO_LENGTH * scale {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    }
}

/// Inner angles of the geodesic triangle `pqr` at `p`, `q`, `r`. Corners
/// with a degenerate side get angle 0.
pub fn triangle_angles(p: &HPoint, q: &HPoint, r: &HPoint) -> [f64; 3] {
    let corner = |a: &HPoint, b: &HPoint, c: &HPoint| {
        let frame = Boost::to(a);
        planar_angle(seen_from(&frame, a, b), seen_from(&frame, a, c)).unwrap_or(0.0)
    };
    [corner(p, q, r), corner(q, r, p), corner(r, p, q)]
}

/// Area of the geodesic triangle `pqr` as its angle deficit.
pub fn triangle_area(p: &HPoint, q: &HPoint, r: &HPoint) -> f64 {
    if dist(p, q) < ZERO_LENGTH || dist(q, r) < ZERO_LENGTH || dist(r, p) < ZERO_LENGTH {
        return 0.0;
    }
    let [a, b, c] = triangle_angles(p, q, r);
    (PI - a - b - c).max(0.0)
}

/// Area of `pqr` from vertex coordinates alone:
/// `tan(A/2) = |det[p,q,r]| / (1 + cosh a + cosh b + cosh c)`.
/// Shares no code path with [`triangle_area`].
pub fn triangle_area_det(p: &HPoint, q: &HPoint, r: &HPoint) -> f64 {
    let num = volume(&p.0, &(q.0 - p.0), &(r.0 - p.0)).abs();
    let den = 1.0 - minkowski(&p.0, &q.0) - minkowski(&q.0, &r.0) - minkowski(&r.0, &p.0);
    2.0 * num.atan2(den)
}

/// The geodesic midpoint of `p` and `q`.
pub fn midpoint(p: &HPoint, q: &HPoint) -> HPoint {
    HPoint::project(p.0 + q.0)
}

/// Normalized-sum centroid of a set of points (the centroid of the
/// Minkowski mass, projected back onto the sheet).
pub fn centroid(points: &[HPoint]) -> HPoint {
    HPoint::project(points.iter().fold(Vec3::zeros(), |acc, p| acc + p.0))
}

/// A random point at distance at most `max_dist` from `center`, with
/// uniformly distributed direction and distance.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, center: &HPoint, max_dist: f64) -> HPoint {
    let r = rng.random_range(0.0..=max_dist);
    let theta = rng.random_range(0.0..2.0 * PI);
    Isometry::translation_to(*center).apply(&HPoint::polar(r, theta))
}

/// A random tangent at `base` with norm at most `max_norm`.
pub fn sample_tangent<R: Rng + ?Sized>(rng: &mut R, base: &HPoint, max_norm: f64) -> TangentVec {
    let r = rng.random_range(0.0..=max_norm);
    let theta = rng.random_range(0.0..2.0 * PI);
    let (e1, e2) = TangentVec::frame(*base);
    e1.scale(r * theta.cos()).add(&e2.scale(r * theta.sin()))
}

/// An orientation-preserving isometry of the hyperbolic plane, i.e. an
/// element of SO⁺(2,1) acting on hyperboloid coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    mat: Matrix3<f64>,
}

impl Default for Isometry {
    fn default() -> Self {
        Self::identity()
    }
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            mat: Matrix3::identity(),
        }
    }

    /// Wraps a matrix, re-orthonormalizing it against the Minkowski form.
    pub fn from_matrix(mat: Matrix3<f64>) -> Result<Self> {
        Isometry { mat }.project()
    }

    /// Wraps a matrix as is.
    pub fn from_matrix_unchecked(mat: Matrix3<f64>) -> Self {
        Isometry { mat }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.mat
    }

    /// Rotation by `theta` about the origin.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Isometry {
            mat: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        }
    }

    /// Translation by `t` along the geodesic through the origin in the
    /// `x1` direction.
    pub fn boost_x(t: f64) -> Self {
        let (s, c) = (t.sinh(), t.cosh());
        Isometry {
            mat: Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c),
        }
    }

    /// The transvection along the geodesic from the origin that carries the
    /// origin to `p`.
    pub fn translation_to(p: HPoint) -> Self {
        let r = dist(&HPoint::ORIGIN, &p);
        if r == 0.0 {
            return Self::identity();
        }
        let theta = p.0.y.atan2(p.0.x);
        Self::rotation(theta)
            .compose(&Self::boost_x(r))
            .compose(&Self::rotation(-theta))
    }

    /// A random isometry moving the origin by at most `max_dist`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, max_dist: f64) -> Self {
        let a = rng.random_range(0.0..2.0 * PI);
        let b = rng.random_range(0.0..2.0 * PI);
        let t = rng.random_range(0.0..=max_dist);
        Self::rotation(a)
            .compose(&Self::boost_x(t))
            .compose(&Self::rotation(b))
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        HPoint::resheet(self.mat * p.0)
    }

    pub fn apply_tangent(&self, v: &TangentVec) -> TangentVec {
        TangentVec::new(self.apply(&v.base), self.mat * v.vec)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Self {
        Isometry {
            mat: self.mat * other.mat,
        }
    }

    /// `J Gᵀ J`, the exact inverse for any matrix preserving `J`.
    pub fn inverse(&self) -> Self {
        Isometry {
            mat: J * self.mat.transpose() * J,
        }
    }

    /// Minkowski Gram–Schmidt on the columns: the third column is made a
    /// unit timelike vector, the first two unit spacelike vectors orthogonal
    /// to it and to each other.
    pub fn project(&self) -> Result<Self> {
        let mut t: Vec3 = self.mat.column(2).into();
        let tt = -minkowski(&t, &t);
        if tt <= 0.0 {
            return Err(Error::NotOrthochronous);
        }
        t /= tt.sqrt();
        if t.z <= 0.0 {
            return Err(Error::NotOrthochronous);
        }
        let mut e1: Vec3 = self.mat.column(0).into();
        e1 += minkowski(&e1, &t) * t;
        e1 /= minkowski(&e1, &e1).sqrt();
        let mut e2: Vec3 = self.mat.column(1).into();
        e2 += minkowski(&e2, &t) * t;
        e2 -= minkowski(&e2, &e1) * e1;
        e2 /= minkowski(&e2, &e2).sqrt();
        let mat = Matrix3::from_columns(&[e1, e2, t]);
        if !mat.iter().all(|x| x.is_finite()) {
            return Err(Error::NotOrthochronous);
        }
        if mat.determinant() < 0.0 {
            return Err(Error::OrientationReversing);
        }
        Ok(Isometry { mat })
    }

    /// Entrywise ∞-norm distance between the matrices.
    pub fn max_abs_diff(&self, other: &Isometry) -> f64 {
        (self.mat - other.mat).amax()
    }

    /// Largest entry of `GᵀJG − J`.
    pub fn form_residual(&self) -> f64 {
        (self.mat.transpose() * J * self.mat - J).amax()
    }

    /// Whether the matrix is in SO⁺(2,1) up to `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.form_residual() < tol
            && (self.mat.determinant() - 1.0).abs() < tol
            && self.mat[(2, 2)] > 0.0
    }
}
