//! Embedding certificates and randomized comparison-geometry oracles.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gmap::GeodesicMapping;
use crate::hyp2::{self, dist, HPoint, Isometry, ZERO_LENGTH};
use crate::weights::corner_angles;

pub const VERTEX_TOLERANCE: f64 = 1e-9;
pub const FACE_TOLERANCE: f64 = 1e-10;
pub const AREA_TOLERANCE: f64 = 1e-8;

/// The three corners of face `f` in the universal cover, anchored at the
/// lift of its first vertex.
pub fn face_points(m: &GeodesicMapping, f: usize) -> [HPoint; 3] {
    let [i, j, k] = m.complex().faces()[f];
    let c = m.complex();
    let head = |a, b| m.head(c.dart(a, b).expect("face side is an edge"));
    [m.lifts()[i], head(i, j), head(i, k)]
}

/// `+1` for a counterclockwise face, `−1` for a flipped one.
pub fn orientation(m: &GeodesicMapping, f: usize) -> Result<i8> {
    let [i, j, k] = m.complex().faces()[f];
    let c = m.complex();
    let (Some(dj), Some(dk)) = (c.dart(i, j), c.dart(i, k)) else {
        return Err(Error::DegenerateFace(f));
    };
    let u = m.edge_vector(dj);
    let v = m.edge_vector(dk);
    let jk = c.dart(j, k).map(|d| m.edge_length(d)).unwrap_or(0.0);
    if u.norm() <= ZERO_LENGTH || v.norm() <= ZERO_LENGTH || jk <= ZERO_LENGTH {
        return Err(Error::DegenerateFace(f));
    }
    Ok(hyp2::oriented_side(&u, &v))
}

/// `|Σ_σ θ^i_σ − 2π|` at every vertex.
pub fn vertex_angle_sums(m: &GeodesicMapping) -> Result<Vec<f64>> {
    let c = m.complex();
    let mut sums = vec![0.0; c.vertex_count()];
    for f in 0..c.faces().len() {
        let angles = corner_angles(m, f)?;
        for (v, a) in c.faces()[f].iter().zip(angles) {
            sums[*v] += a;
        }
    }
    Ok(sums.into_iter().map(|s| (s - 2.0 * PI).abs()).collect())
}

/// Per-face `|θ_i + θ_j + θ_k + area − π|`, with the area taken from vertex
/// coordinates, and the total `|Σ area − 2π|χ||`.
pub fn gauss_bonnet(m: &GeodesicMapping) -> Result<(Vec<f64>, f64)> {
    let c = m.complex();
    let mut per_face = Vec::with_capacity(c.faces().len());
    let mut total = 0.0;
    for f in 0..c.faces().len() {
        let [a, b, d] = corner_angles(m, f)?;
        let [p, q, r] = face_points(m, f);
        let area = hyp2::triangle_area_det(&p, &q, &r);
        total += area;
        per_face.push((a + b + d + area - PI).abs());
    }
    let target = 2.0 * PI * (c.euler_char().unsigned_abs() as f64);
    Ok((per_face, (total - target).abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingReport {
    /// Orientation sign per face; 0 for degenerate faces.
    pub orientations: Vec<i8>,
    pub face_residuals: Vec<f64>,
    pub vertex_residuals: Vec<f64>,
    pub total_area: f64,
    pub total_area_residual: f64,
    pub degenerate: Vec<usize>,
    /// Pairs of faces whose interiors overlap in the universal cover, when
    /// the pairwise check was run.
    pub overlaps: Option<Vec<(usize, usize)>>,
    pub pass: bool,
}

impl EmbeddingReport {
    pub fn flipped(&self) -> Vec<usize> {
        self.orientations
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .map(|(f, _)| f)
            .collect()
    }

    pub fn max_vertex_residual(&self) -> f64 {
        self.vertex_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_face_residual(&self) -> f64 {
        self.face_residuals.iter().copied().fold(0.0, f64::max)
    }

    fn judge(&mut self) {
        self.pass = self.degenerate.is_empty()
            && self.orientations.iter().all(|&s| s == 1)
            && self.max_vertex_residual() < VERTEX_TOLERANCE
            && self.max_face_residual() < FACE_TOLERANCE
            && self.total_area_residual < AREA_TOLERANCE
            && self.overlaps.as_ref().is_none_or(|o| o.is_empty());
    }
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    items.into_iter().collect::<Vec<_>>().join(" ")
}

impl fmt::Display for EmbeddingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", if self.pass { "pass" } else { "fail" })?;
        writeln!(f, "faces: {}", self.orientations.len())?;
        writeln!(f, "vertices: {}", self.vertex_residuals.len())?;
        let flipped = self.flipped();
        writeln!(f, "flipped_faces: {}", flipped.len())?;
        if !flipped.is_empty() {
            writeln!(f, "flipped: {}", list(flipped.iter().map(|x| x.to_string())))?;
        }
        writeln!(f, "degenerate_faces: {}", self.degenerate.len())?;
        if !self.degenerate.is_empty() {
            writeln!(f, "degenerate: {}", list(self.degenerate.iter().map(|x| x.to_string())))?;
        }
        writeln!(f, "max_vertex_angle_residual: {:e}", self.max_vertex_residual())?;
        writeln!(f, "max_face_residual: {:e}", self.max_face_residual())?;
        writeln!(f, "total_area: {:.16e}", self.total_area)?;
        writeln!(f, "total_area_residual: {:e}", self.total_area_residual)?;
        if let Some(o) = &self.overlaps {
            writeln!(f, "overlapping_pairs: {}", o.len())?;
        }
        Ok(())
    }
}

/// Orientation, angle sums and Gauss–Bonnet in one pass. Never fails; a
/// broken mapping yields a failing report.
pub fn embedding_report(m: &GeodesicMapping) -> EmbeddingReport {
    let c = m.complex();
    let nf = c.faces().len();
    let mut report = EmbeddingReport {
        orientations: vec![0; nf],
        face_residuals: vec![0.0; nf],
        vertex_residuals: vec![0.0; c.vertex_count()],
        total_area: 0.0,
        total_area_residual: 0.0,
        degenerate: Vec::new(),
        overlaps: None,
        pass: false,
    };
    let mut sums = vec![0.0; c.vertex_count()];
    for f in 0..nf {
        match (orientation(m, f), corner_angles(m, f)) {
            (Ok(s), Ok(angles)) => {
                report.orientations[f] = s;
                let [p, q, r] = face_points(m, f);
                let area = hyp2::triangle_area_det(&p, &q, &r);
                report.total_area += area;
                report.face_residuals[f] = (angles.iter().sum::<f64>() + area - PI).abs();
                for (v, a) in c.faces()[f].iter().zip(angles) {
                    sums[*v] += a;
                }
            }
            _ => report.degenerate.push(f),
        }
    }
    for (res, s) in report.vertex_residuals.iter_mut().zip(sums) {
        *res = (s - 2.0 * PI).abs();
    }
    let target = 2.0 * PI * (c.euler_char().unsigned_abs() as f64);
    report.total_area_residual = (report.total_area - target).abs();
    report.judge();
    report
}

/// [`embedding_report`] plus a pairwise overlap test between all faces and
/// their deck translates near the fundamental domain.
pub fn embedding_report_paranoid(m: &GeodesicMapping) -> EmbeddingReport {
    let mut report = embedding_report(m);
    report.overlaps = Some(overlapping_faces(m));
    report.judge();
    report
}

/// A face moved near the base point, in Klein coordinates.
struct Placed {
    face: usize,
    centre: HPoint,
    radius: f64,
    corners: [HPoint; 3],
}

fn place(corners: [HPoint; 3], face: usize) -> Placed {
    let centre = hyp2::centroid(&corners);
    let radius = corners.iter().map(|p| dist(&centre, p)).fold(0.0, f64::max);
    Placed {
        face,
        centre,
        radius,
        corners,
    }
}

/// Interior overlap of two Euclidean triangles by separating axes. Shared
/// edges and vertices do not count.
fn triangles_overlap(a: &[(f64, f64); 3], b: &[(f64, f64); 3]) -> bool {
    let scale = a.iter().chain(b).map(|p| p.0.abs().max(p.1.abs())).fold(1e-300, f64::max);
    let tol = 1e-9 * scale;
    for tri in [a, b] {
        for e in 0..3 {
            let (p, q) = (tri[e], tri[(e + 1) % 3]);
            let n = (q.1 - p.1, p.0 - q.0);
            let len = n.0.hypot(n.1);
            if len == 0.0 {
                continue;
            }
            let proj = |t: &[(f64, f64); 3]| {
                let vals = t.map(|x| (x.0 * n.0 + x.1 * n.1) / len);
                (vals.iter().copied().fold(f64::MAX, f64::min), vals.iter().copied().fold(f64::MIN, f64::max))
            };
            let (a0, a1) = proj(a);
            let (b0, b1) = proj(b);
            if a1 <= b0 + tol || b1 <= a0 + tol {
                return false;
            }
        }
    }
    true
}

fn overlapping_faces(m: &GeodesicMapping) -> Vec<(usize, usize)> {
    let group = m.group();
    let to_origin = Isometry::translation_to(group.base()).inverse();
    let placed: Vec<Placed> = (0..m.complex().faces().len())
        .map(|f| {
            let pts = face_points(m, f);
            let (_, g) = group.reduce(&hyp2::centroid(&pts));
            place(pts.map(|p| to_origin.apply(&g.iso.apply(&p))), f)
        })
        .collect();
    let reach = placed.iter().map(|p| dist(&p.centre, &HPoint::ORIGIN) + p.radius).fold(0.0, f64::max);
    let translates = m.group().within(2.0 * reach);

    let mut out = Vec::new();
    for a in &placed {
        let ka = a.corners.map(|p| p.to_klein());
        for b in &placed {
            if b.face < a.face {
                continue;
            }
            for h in &translates {
                let moved = to_origin.compose(&h.iso).compose(&to_origin.inverse());
                let centre = moved.apply(&b.centre);
                if dist(&a.centre, &centre) >= a.radius + b.radius {
                    continue;
                }
                if a.face == b.face && h.word.is_empty() {
                    continue;
                }
                let kb = b.corners.map(|p| moved.apply(&p).to_klein());
                if triangles_overlap(&ka, &kb) {
                    out.push((a.face, b.face));
                    break;
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cat0Report {
    pub samples: usize,
    /// Largest `|v(z,x) − v(z,y)| − d(x,y)` over random triples.
    pub max_violation_first: f64,
    /// Largest `d(x,y)² − (v(x,y)·v(x,z) + v(y,x)·v(y,z))` over random triples.
    pub max_violation_second: f64,
    /// Random triples violating either inequality by more than 1e−12.
    pub violations: usize,
    /// Largest deviation from equality over collinear triples, both
    /// inequalities.
    pub collinear_error: f64,
    /// Smallest slack over triples pushed 1e−3 off a geodesic.
    pub near_degenerate_slack: f64,
}

fn cat0_terms(x: &HPoint, y: &HPoint, z: &HPoint) -> (f64, f64) {
    let dxy = dist(x, y);
    let first = hyp2::log(z, x).sub(&hyp2::log(z, y)).norm() - dxy;
    let second = dxy * dxy - (hyp2::log(x, y).dot(&hyp2::log(x, z)) + hyp2::log(y, x).dot(&hyp2::log(y, z)));
    (first, second)
}

/// Checks `|v(z,x) − v(z,y)| ≤ d(x,y)` and
/// `v(x,y)·v(x,z) + v(y,x)·v(y,z) ≥ d(x,y)²` on random triples with
/// pairwise distances at most 5, and equality on collinear ones.
pub fn cat0_oracle(samples: usize, seed: u64) -> Cat0Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Cat0Report {
        samples,
        near_degenerate_slack: f64::INFINITY,
        ..Default::default()
    };
    let mut drawn = 0;
    while drawn < samples {
        let x = hyp2::sample_point(&mut rng, &HPoint::ORIGIN, 2.5);
        let y = hyp2::sample_point(&mut rng, &HPoint::ORIGIN, 2.5);
        let z = hyp2::sample_point(&mut rng, &HPoint::ORIGIN, 2.5);
        if dist(&x, &y) > 5.0 || dist(&y, &z) > 5.0 || dist(&z, &x) > 5.0 {
            continue;
        }
        drawn += 1;
        let (a, b) = cat0_terms(&x, &y, &z);
        report.max_violation_first = report.max_violation_first.max(a);
        report.max_violation_second = report.max_violation_second.max(b);
        if a > 1e-12 || b > 1e-12 {
            report.violations += 1;
        }

        // collinear: z on the geodesic through x and y
        let v = hyp2::log(&x, &y);
        if v.norm() < 1e-3 {
            continue;
        }
        let s: f64 = rng.random_range(0.05..0.95);
        let z = hyp2::exp(&v.scale(s));
        let (a, b) = cat0_terms(&x, &y, &z);
        report.collinear_error = report.collinear_error.max(a.abs()).max(b.abs());

        // pushed off the geodesic by 1e−3
        let (e1, e2) = hyp2::TangentVec::frame(z);
        let along = hyp2::log(&z, &y);
        let normal = if e1.dot(&along).abs() < e2.dot(&along).abs() { e1 } else { e2 };
        let normal = normal.sub(&along.scale(normal.dot(&along) / along.dot(&along)));
        let off = hyp2::exp(&normal.scale(1e-3 / normal.norm()));
        let (a, b) = cat0_terms(&x, &y, &off);
        report.near_degenerate_slack = report.near_degenerate_slack.min(-a).min(-b);
    }
    report
}
