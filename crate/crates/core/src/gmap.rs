//! Geodesic mappings of a triangulated surface, stored as one lift per
//! vertex plus a deck transformation per directed edge.
//!
//! Edge `(i, j)` is the image of the geodesic segment from `x_i` to
//! `A_ij·x_j` in the universal cover. Lifts are a gauge choice: replacing
//! `x_i` by `B·x_i` and relabelling the darts at `i` describes the same map
//! of the surface.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fuchsian::{product_residual, GroupElement, SurfaceGroup};
use crate::hyp2::{self, dist, HPoint, TangentVec, Vec3};
use crate::simplicial::Complex;

/// A deck transformation attached to a directed edge.
pub type Label = GroupElement;

/// Labels compare equal when their matrices agree to this tolerance; deck
/// transformations are discrete, so anything far below their separation
/// works.
pub const LABEL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct DeckLabels {
    labels: Vec<Label>,
}

impl DeckLabels {
    pub fn new(labels: Vec<Label>) -> Self {
        DeckLabels { labels }
    }

    pub fn get(&self, dart: usize) -> &Label {
        &self.labels[dart]
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Positive weights on the directed edges of a complex, indexed by dart.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
}

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((d, w)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidWeights(format!("entry {d} is {w}")));
        }
        Ok(Weights { values })
    }

    pub fn uniform(complex: &Complex) -> Self {
        Weights {
            values: vec![1.0; complex.dart_count()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, dart: usize) -> f64 {
        self.values[dart]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Weights::new(self.values.iter().map(|w| w * c).collect())
    }

    /// Condition number `max w / min w`.
    pub fn condition(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::MIN, f64::max);
        let min = self.values.iter().copied().fold(f64::MAX, f64::min);
        max / min
    }

    /// Whether `w_ij = w_ji` for every edge.
    pub fn is_symmetric(&self, complex: &Complex) -> bool {
        (0..self.values.len()).all(|d| self.values[d] == self.values[complex.reverse(d)])
    }

    fn check_len(&self, complex: &Complex) -> Result<()> {
        if self.values.len() != complex.dart_count() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} directed edges",
                self.values.len(),
                complex.dart_count()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicMapping {
    complex: Arc<Complex>,
    group: Arc<SurfaceGroup>,
    labels: DeckLabels,
    lifts: Vec<HPoint>,
}

impl GeodesicMapping {
    pub fn new(complex: Arc<Complex>, group: Arc<SurfaceGroup>, labels: DeckLabels, lifts: Vec<HPoint>) -> Self {
        assert_eq!(labels.len(), complex.dart_count());
        assert_eq!(lifts.len(), complex.vertex_count());
        GeodesicMapping {
            complex,
            group,
            labels,
            lifts,
        }
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn complex_arc(&self) -> Arc<Complex> {
        self.complex.clone()
    }

    pub fn group(&self) -> &SurfaceGroup {
        &self.group
    }

    pub fn group_arc(&self) -> Arc<SurfaceGroup> {
        self.group.clone()
    }

    pub fn labels(&self) -> &DeckLabels {
        &self.labels
    }

    pub fn lifts(&self) -> &[HPoint] {
        &self.lifts
    }

    /// Label of the directed edge `(i, j)`. Panics if it is not an edge.
    pub fn label(&self, i: usize, j: usize) -> &Label {
        let d = self
            .complex
            .dart(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) is not an edge"));
        self.labels.get(d)
    }

    /// Same labels and complex, new lifts.
    pub fn with_lifts(&self, lifts: Vec<HPoint>) -> Self {
        GeodesicMapping::new(self.complex.clone(), self.group.clone(), self.labels.clone(), lifts)
    }

    /// `A_ij·x_j` for dart `d = (i, j)`.
    pub fn head(&self, d: usize) -> HPoint {
        let (_, j) = self.complex.darts()[d];
        self.labels.get(d).iso.apply(&self.lifts[j])
    }

    /// `v(x_i, A_ij x_j)`, the initial velocity of edge `d` at its tail.
    pub fn edge_vector(&self, d: usize) -> TangentVec {
        let (i, _) = self.complex.darts()[d];
        hyp2::log(&self.lifts[i], &self.head(d))
    }

    pub fn edge_vectors(&self) -> Vec<TangentVec> {
        (0..self.complex.dart_count())
            .map(|d| self.edge_vector(d))
            .collect()
    }

    pub fn edge_length(&self, d: usize) -> f64 {
        let (i, _) = self.complex.darts()[d];
        dist(&self.lifts[i], &self.head(d))
    }

    /// `r_i = Σ_j w_ij v(x_i, A_ij x_j)`.
    pub fn residue(&self, w: &Weights, i: usize) -> TangentVec {
        self.complex
            .outgoing(i)
            .fold(TangentVec::zero(self.lifts[i]), |acc, d| {
                acc.add(&self.edge_vector(d).scale(w.get(d)))
            })
    }

    /// Residue vectors and total outgoing weights `W_i` at every vertex.
    pub fn residues(&self, w: &Weights) -> Result<Vec<(TangentVec, f64)>> {
        w.check_len(&self.complex)?;
        Ok((0..self.complex.vertex_count())
            .map(|i| {
                let total: f64 = self.complex.outgoing(i).map(|d| w.get(d)).sum();
                (self.residue(w, i), total)
            })
            .collect())
    }

    /// `μ = max_i |r_i| / W_i`; zero exactly at the balanced mapping.
    pub fn max_normalized_residual(&self, w: &Weights) -> Result<f64> {
        Ok(self
            .residues(w)?
            .iter()
            .map(|(r, total)| r.norm() / total)
            .fold(0.0, f64::max))
    }

    /// Discrete Dirichlet energy `½ Σ_{ij∈E} ½(w_ij + w_ji) l_ij²`.
    pub fn energy(&self, w: &Weights) -> Result<f64> {
        w.check_len(&self.complex)?;
        let c = &self.complex;
        Ok(c.edges()
            .iter()
            .map(|e| {
                let d = c.dart(e[0], e[1]).expect("edge has darts");
                let sym = 0.5 * (w.get(d) + w.get(c.reverse(d)));
                let l = self.edge_length(d);
                sym * l * l
            })
            .sum::<f64>()
            * 0.5)
    }

    /// Moves the lift of vertex `i` to `B·x_i` and relabels its darts so
    /// that the underlying map is unchanged. New labels get short words and
    /// matrices evaluated from them.
    pub fn gauge(&self, i: usize, b: &GroupElement) -> Self {
        if b.word.is_empty() {
            return self.clone();
        }
        let mut labels = self.labels.labels.clone();
        let b_inv = b.inverse();
        let canon = |h: GroupElement| self.group.canonical(&h).unwrap_or(h);
        for d in self.complex.outgoing(i) {
            let r = self.complex.reverse(d);
            labels[d] = canon(b.compose(&labels[d]));
            labels[r] = canon(labels[r].compose(&b_inv));
        }
        let mut lifts = self.lifts.clone();
        lifts[i] = b.iso.apply(&lifts[i]);
        GeodesicMapping::new(self.complex.clone(), self.group.clone(), DeckLabels::new(labels), lifts)
    }

    /// Moves every lift by an independent random tangent of norm at most
    /// `radius`.
    pub fn perturbed<R: rand::Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> Self {
        let lifts = self
            .lifts
            .iter()
            .map(|x| hyp2::exp(&hyp2::sample_tangent(rng, x, radius)))
            .collect();
        self.with_lifts(lifts)
    }

    /// Moves vertex 0 into the fundamental domain with [`SurfaceGroup::reduce`].
    pub fn normalize_gauge(&self) -> Self {
        let (_, g) = self.group.reduce(&self.lifts[0]);
        self.gauge(0, &g)
    }

    /// Recomputes every label matrix from its word, which re-projects it
    /// onto the isometry group and discards accumulated roundoff.
    pub fn project_labels(&self) -> Self {
        let labels = self
            .labels
            .labels
            .iter()
            .map(|l| GroupElement {
                word: l.word.clone(),
                iso: self.group.evaluate(&l.word).unwrap_or(l.iso),
            })
            .collect();
        GeodesicMapping::new(
            self.complex.clone(),
            self.group.clone(),
            DeckLabels::new(labels),
            self.lifts.clone(),
        )
    }

    /// Whether both mappings use the same complex and the same labels.
    pub fn same_class(&self, other: &GeodesicMapping) -> Result<()> {
        if self.complex.faces() != other.complex.faces()
            || self.complex.vertex_count() != other.complex.vertex_count()
        {
            return Err(Error::InvalidComplex("mappings are on different complexes".into()));
        }
        for (d, (a, b)) in self
            .labels
            .labels
            .iter()
            .zip(&other.labels.labels)
            .enumerate()
        {
            if a.iso.max_abs_diff(&b.iso) > LABEL_TOLERANCE {
                let (i, j) = self.complex.darts()[d];
                return Err(Error::LabelMismatch(i, j));
            }
        }
        Ok(())
    }

    /// `‖A_ij A_jk A_ki − I‖_∞` for every face.
    pub fn cocycle_residuals(&self) -> Vec<f64> {
        self.complex
            .faces()
            .iter()
            .map(|&[i, j, k]| {
                product_residual(&[&self.label(i, j).iso, &self.label(j, k).iso, &self.label(k, i).iso])
            })
            .collect()
    }

    /// `‖A_ji − A_ij⁻¹‖_∞` for every dart.
    pub fn involution_residuals(&self) -> Vec<f64> {
        (0..self.complex.dart_count())
            .map(|d| {
                let r = self.complex.reverse(d);
                self.labels
                    .get(r)
                    .iso
                    .max_abs_diff(&self.labels.get(d).iso.inverse())
            })
            .collect()
    }

    /// Largest deviation of a label's matrix from the matrix of its word.
    pub fn word_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for l in &self.labels.labels {
            worst = worst.max(self.group.evaluate(&l.word)?.max_abs_diff(&l.iso));
        }
        Ok(worst)
    }
}

/// Sup distance between two mappings in the same homotopy class.
///
/// The distance between corresponding points of two geodesics is convex in
/// a CAT(0) space, so the supremum over the 1-skeleton is attained at a
/// vertex.
pub fn distance_x(a: &GeodesicMapping, b: &GeodesicMapping) -> Result<f64> {
    a.same_class(b)?;
    Ok(a.lifts
        .iter()
        .zip(&b.lifts)
        .map(|(p, q)| dist(p, q))
        .fold(0.0, f64::max))
}

/// Accumulates `Σ_j w_ij v(x_i, A_ij x_j)` for all vertices in one pass;
/// returns `(r_i, W_i)` as raw vectors for the solver's inner loop.
pub(crate) fn residue_field(m: &GeodesicMapping, w: &Weights, out: &mut Vec<(Vec3, f64)>) {
    let c = m.complex();
    out.clear();
    for i in 0..c.vertex_count() {
        let xi = m.lifts[i];
        let mut r = Vec3::zeros();
        let mut total = 0.0;
        for d in c.outgoing(i) {
            let wd = w.get(d);
            r += wd * hyp2::log(&xi, &m.head(d)).vec();
            total += wd;
        }
        out.push((r, total));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::builtin_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh() -> GeodesicMapping {
        builtin_mesh(&SurfaceGroup::regular(2).unwrap()).unwrap()
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(Weights::new(vec![1.0, 0.0]).is_err());
        assert!(Weights::new(vec![1.0, -2.0]).is_err());
        assert!(Weights::new(vec![1.0, f64::NAN]).is_err());
        let w = Weights::new(vec![1.0, 4.0, 2.0]).unwrap();
        assert_eq!(w.condition(), 4.0);
    }

    #[test]
    fn edge_vectors_are_symmetric_under_reversal() {
        let m = mesh();
        for d in 0..m.complex().dart_count() {
            let r = m.complex().reverse(d);
            let v = m.edge_vector(d);
            let u = m.edge_vector(r);
            assert!((v.norm() - u.norm()).abs() < 1e-11);
            assert!((v.norm() - m.edge_length(d)).abs() < 1e-12);
            // carrying v to the head and comparing with −v(j,i) in the same frame
            let head = m.head(d);
            let back = m.labels().get(d).iso.apply_tangent(&u);
            let moved = hyp2::transport(&v.base(), &head, &v);
            assert!((moved.vec() + back.vec()).amax() < 1e-10);
        }
    }

    #[test]
    fn degenerate_edge_has_zero_vector() {
        let m = mesh();
        let (i, j) = m.complex().darts()[0];
        let mut lifts = m.lifts().to_vec();
        lifts[i] = m.label(i, j).iso.apply(&lifts[j]);
        let m = m.with_lifts(lifts);
        assert!(m.edge_vector(0).norm() < 1e-14);
    }

    #[test]
    fn residue_linearity() {
        let m = mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = m.complex().dart_count();
        let w1 = Weights::new((0..n).map(|_| rng.random_range(0.5..2.0)).collect()).unwrap();
        let w2 = Weights::new((0..n).map(|_| rng.random_range(0.5..2.0)).collect()).unwrap();
        let (a, b) = (0.3, 1.7);
        let mix = Weights::new(
            w1.values()
                .iter()
                .zip(w2.values())
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        for i in 0..m.complex().vertex_count() {
            let lhs = m.residue(&mix, i);
            let rhs = m.residue(&w1, i).scale(a).add(&m.residue(&w2, i).scale(b));
            assert!((lhs.vec() - rhs.vec()).amax() < 1e-13);
            let doubled = m.residue(&w1.scaled(2.0).unwrap(), i);
            assert_eq!(*doubled.vec(), m.residue(&w1, i).vec() * 2.0);
        }
    }

    #[test]
    fn single_free_vertex_midpoint_is_balanced() {
        // the residue of a vertex with two unit-weight neighbours at the
        // midpoint of the geodesic joining them vanishes
        let a = HPoint::polar(1.0, 0.0);
        let b = HPoint::polar(1.0, 2.0);
        let mid = hyp2::midpoint(&a, &b);
        let r = hyp2::log(&mid, &a).add(&hyp2::log(&mid, &b));
        assert!(r.norm() < 1e-15);
    }

    #[test]
    fn energy_zero_and_scaling() {
        let m = mesh();
        let w = Weights::uniform(m.complex());
        let e = m.energy(&w).unwrap();
        assert!(e > 0.0);
        assert!((m.energy(&w.scaled(3.0).unwrap()).unwrap() - 3.0 * e).abs() < 1e-12 * e);
        // collapse everything onto one point with identity labels
        let t = Complex::tetrahedron();
        let ids = vec![GroupElement::identity(); t.dart_count()];
        let flat = GeodesicMapping::new(
            Arc::new(t),
            m.group_arc(),
            DeckLabels::new(ids),
            vec![HPoint::ORIGIN; 4],
        );
        assert_eq!(flat.energy(&Weights::uniform(flat.complex())).unwrap(), 0.0);
    }

    #[test]
    fn gauge_preserves_geometry() {
        let m = mesh();
        let w = Weights::uniform(m.complex());
        let g = m.group();
        let b = g.generator(0);
        let i = 17;
        let gm = m.gauge(i, &b);
        assert!(dist(&gm.lifts()[i], &b.iso.apply(&m.lifts()[i])) < 1e-12);
        for d in 0..m.complex().dart_count() {
            assert!((gm.edge_length(d) - m.edge_length(d)).abs() < 1e-10);
        }
        for v in 0..m.complex().vertex_count() {
            assert!((gm.residue(&w, v).norm() - m.residue(&w, v).norm()).abs() < 1e-10);
        }
        assert!((gm.energy(&w).unwrap() - m.energy(&w).unwrap()).abs() < 1e-10);
        assert!(gm.cocycle_residuals().iter().all(|&r| r < 1e-9));
        assert!(gm.involution_residuals().iter().all(|&r| r < 1e-10));
        assert!(gm.word_residual().unwrap() < 1e-9);

        let same = m.gauge(i, &GroupElement::identity());
        assert_eq!(same.lifts(), m.lifts());
        assert_eq!(same.labels(), m.labels());
    }

    #[test]
    fn corrupted_label_breaks_cocycle() {
        let m = mesh();
        let mut labels = m.labels().as_slice().to_vec();
        labels[5] = labels[5].compose(&m.group().generator(1));
        let bad = GeodesicMapping::new(m.complex_arc(), m.group_arc(), DeckLabels::new(labels), m.lifts().to_vec());
        let res = bad.cocycle_residuals();
        let f = m.complex().dart_face(5).unwrap();
        assert!(res[f] > 1e-3);
    }

    #[test]
    fn distance_x_basics() {
        let m = mesh();
        assert_eq!(distance_x(&m, &m).unwrap(), 0.0);
        let mut lifts = m.lifts().to_vec();
        let (e1, _) = TangentVec::frame(lifts[3]);
        lifts[3] = hyp2::exp(&e1.scale(0.3));
        let moved = m.with_lifts(lifts);
        assert!((distance_x(&m, &moved).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(distance_x(&m, &moved).unwrap(), distance_x(&moved, &m).unwrap());

        let other = m.gauge(3, &m.group().generator(0));
        assert!(matches!(distance_x(&m, &other), Err(Error::LabelMismatch(..))));
    }
}
