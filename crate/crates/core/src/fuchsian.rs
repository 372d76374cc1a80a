//! The deck group of a closed genus-g surface, realized on the regular
//! hyperbolic 4g-gon with interior angles 2π/4g.
//!
//! Sides of the polygon are numbered counterclockwise starting at angle 0;
//! side `k` is paired with side `k ^ 2`. Generators are stored in the order
//! `a1 b1 A1 B1 a2 b2 A2 B2 ...` (capitals are inverses) and each one takes
//! the polygon to its neighbour across the side returned by [`side_of`],
//! carrying the paired side onto that side. With this placement the
//! product of all generators in stored order is the identity.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::hyp2::{self, dist, two_prod, two_sum, HPoint, Isometry, Vec3};

/// Number of matrix products after which a running product is re-projected.
pub const PROJECT_EVERY: usize = 256;

/// A word in the generators, stored as generator indices.
///
/// Index `4j` is `a_{j+1}`, `4j+1` is `b_{j+1}`, `4j+2` is `a_{j+1}⁻¹` and
/// `4j+3` is `b_{j+1}⁻¹`. Words are kept freely reduced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(s: usize) -> Self {
        Word(vec![s as u16])
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&s| inverse_index(s)).collect())
    }

    /// Freely reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Self {
        let mut out = self.0.clone();
        for &s in &other.0 {
            match out.last() {
                Some(&t) if t == inverse_index(s) => {
                    out.pop();
                }
                _ => out.push(s),
            }
        }
        Word(out)
    }
}

#[inline]
fn inverse_index(s: u16) -> u16 {
    s ^ 2
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &s in &self.0 {
            let letter = ['a', 'b', 'A', 'B'][(s % 4) as usize];
            write!(f, "{}{}", letter, s / 4 + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        if text == "e" {
            return Ok(Word::identity());
        }
        let bad = || Error::BadWord(text.to_string());
        let bytes = text.as_bytes();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let kind = match bytes[i] {
                b'a' => 0,
                b'b' => 1,
                b'A' => 2,
                b'B' => 3,
                _ => return Err(bad()),
            };
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let j: u16 = text[start..i].parse().map_err(|_| bad())?;
            if j == 0 {
                return Err(bad());
            }
            letters.push(4 * (j - 1) + kind);
        }
        // re-reduce in case the text was not reduced
        Ok(Word::identity().concat(&Word(letters)))
    }
}

/// A deck transformation together with a word that produces it.
///
/// The matrix is what computations use; the word is what gets written to
/// disk.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub word: Word,
    pub iso: Isometry,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement {
            word: Word::identity(),
            iso: Isometry::identity(),
        }
    }

    pub fn compose(&self, other: &GroupElement) -> Self {
        GroupElement {
            word: self.word.concat(&other.word),
            iso: self.iso.compose(&other.iso),
        }
    }

    pub fn inverse(&self) -> Self {
        GroupElement {
            word: self.word.inverse(),
            iso: self.iso.inverse(),
        }
    }
}

/// The fundamental group of a closed genus-g surface as a Fuchsian group.
#[derive(Clone, Debug)]
pub struct SurfaceGroup {
    genus: usize,
    generators: Vec<Isometry>,
    polygon: Vec<HPoint>,
    base: HPoint,
}

/// The half-turn about `q`: `x ↦ −x − 2⟨x,q⟩q`.
fn half_turn(q: Vec3) -> Matrix3<f64> {
    let jq = Vec3::new(q.x, q.y, -q.z);
    -Matrix3::identity() - 2.0 * q * jq.transpose()
}

/// `(cos, sin)` of `m·π/n`, reduced to the first octant so that large
/// multiples cost no accuracy.
fn cos_sin_pi_frac(m: i64, n: i64) -> (f64, f64) {
    // angle in units of π/(4n): 8n units per full turn
    let units = (4 * m).rem_euclid(8 * n);
    let octant = units / n;
    let rem = units % n;
    let t = |u: i64| u as f64 * PI / (4 * n) as f64;
    // reflect within the octant pair so the evaluated angle is ≤ π/4
    let (c, s) = if octant % 2 == 0 {
        let (s, c) = t(rem).sin_cos();
        (c, s)
    } else {
        let (s, c) = t(n - rem).sin_cos();
        (s, c)
    };
    // rotate by octant/2 quarter turns
    match octant / 2 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// A 3×3 matrix of double-double numbers `(hi, lo)`.
#[derive(Clone, Copy)]
struct DdMatrix([[(f64, f64); 3]; 3]);

/// `‖M_1 ⋯ M_n − I‖_∞` with the product accumulated in double-double, so
/// the result reflects the factors and not the multiplication.
pub fn product_residual(factors: &[&Isometry]) -> f64 {
    factors
        .iter()
        .fold(DdMatrix::identity(), |acc, m| acc.mul(m.matrix()))
        .distance_to_identity()
}

impl DdMatrix {
    fn identity() -> Self {
        let mut m = [[(0.0, 0.0); 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            row[r] = (1.0, 0.0);
        }
        DdMatrix(m)
    }

    fn from(m: &Matrix3<f64>) -> Self {
        let mut out = [[(0.0, 0.0); 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = (m[(r, c)], 0.0);
            }
        }
        DdMatrix(out)
    }

    /// `self · m` for an ordinary matrix `m`.
    fn mul(&self, m: &Matrix3<f64>) -> Self {
        let mut next = [[(0.0, 0.0); 3]; 3];
        for (r, row) in next.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                let mut sum = (0.0, 0.0);
                for k in 0..3 {
                    let (hi, lo) = self.0[r][k];
                    let (p, e) = two_prod(hi, m[(k, c)]);
                    sum = dd_add(sum, (p, e + lo * m[(k, c)]));
                }
                *x = sum;
            }
        }
        DdMatrix(next)
    }

    fn round(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.0[r][c].0 + self.0[r][c].1)
    }

    fn distance_to_identity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, row) in self.0.iter().enumerate() {
            for (c, &(hi, lo)) in row.iter().enumerate() {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max(((hi - target) + lo).abs());
            }
        }
        worst
    }
}

fn dd_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(x.0, y.0);
    let e = e + x.1 + y.1;
    let hi = s + e;
    (hi, e - (hi - s))
}

/// Index of the side paired with side `s`.
pub fn paired_side(s: usize) -> usize {
    s ^ 2
}

/// The polygon side across which generator `slot` moves the polygon.
pub fn side_of(slot: usize) -> usize {
    if slot % 2 == 1 {
        slot ^ 2
    } else {
        slot
    }
}

/// Inverse of [`side_of`] (the map is an involution).
pub fn slot_of(side: usize) -> usize {
    side_of(side)
}

impl SurfaceGroup {
    /// The regular 4g-gon group centred at the origin.
    pub fn regular(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::GenusTooSmall(genus));
        }
        let sides = 4 * genus;
        let step = 2.0 * PI / sides as f64;
        let interior = step;
        // right triangle (center, side midpoint, vertex) with angles
        // π/N at the center and interior/2 at the vertex
        let half_center = PI / sides as f64;
        let circum = (1.0 / (half_center.tan() * (interior / 2.0).tan())).acosh();
        let cosh_in = (interior / 2.0).cos() / half_center.sin();

        let polygon: Vec<HPoint> = (0..sides)
            .map(|k| HPoint::polar(circum, k as f64 * step))
            .collect();

        // generator across side k: a polygon rotation carrying side k ^ 2
        // onto side k, then the half-turn about the midpoint of side k;
        // inverses come from the exact J Gᵀ J
        let sinh_in = (cosh_in * cosh_in - 1.0).sqrt();
        let mut generators = vec![Isometry::identity(); sides];
        for j in 0..genus {
            for side in [4 * j, 4 * j + 1] {
                let (c, s) = cos_sin_pi_frac(2 * side as i64 + 1, sides as i64);
                let midpoint = Vec3::new(sinh_in * c, sinh_in * s, cosh_in);
                let (rc, rs) = cos_sin_pi_frac(2 * (side as i64 - paired_side(side) as i64), sides as i64);
                let rot = Matrix3::new(rc, -rs, 0.0, rs, rc, 0.0, 0.0, 0.0, 1.0);
                let g = Isometry::from_matrix_unchecked(half_turn(midpoint) * rot);
                generators[slot_of(side)] = g;
                generators[slot_of(paired_side(side))] = g.inverse();
            }
        }

        Ok(SurfaceGroup {
            genus,
            generators,
            polygon,
            base: HPoint::ORIGIN,
        })
    }

    /// Assembles a group from stored parts without checking invariants.
    pub fn from_parts(genus: usize, generators: Vec<Isometry>, polygon: Vec<HPoint>, base: HPoint) -> Self {
        SurfaceGroup {
            genus,
            generators,
            polygon,
            base,
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn polygon(&self) -> &[HPoint] {
        &self.polygon
    }

    pub fn base(&self) -> HPoint {
        self.base
    }

    pub fn generator(&self, s: usize) -> GroupElement {
        GroupElement {
            word: Word::generator(s),
            iso: self.generators[s],
        }
    }

    /// The matrix of a word. Products are accumulated in double-double
    /// arithmetic and re-projected every [`PROJECT_EVERY`] factors.
    pub fn evaluate(&self, word: &Word) -> Result<Isometry> {
        let mut acc = DdMatrix::identity();
        for (n, &s) in word.letters().iter().enumerate() {
            let s = s as usize;
            if s >= self.generators.len() {
                return Err(Error::BadWord(word.to_string()));
            }
            acc = acc.mul(self.generators[s].matrix());
            if (n + 1) % PROJECT_EVERY == 0 {
                let projected = Isometry::from_matrix_unchecked(acc.round()).project()?;
                acc = DdMatrix::from(projected.matrix());
            }
        }
        Ok(Isometry::from_matrix_unchecked(acc.round()))
    }

    /// The same deck transformation with a short word and a freshly
    /// evaluated matrix. The word comes from greedy descent of `h·base`,
    /// which lands back on the base point for any element of the group.
    pub fn canonical(&self, h: &GroupElement) -> Result<GroupElement> {
        let (q, g) = self.reduce(&h.iso.apply(&self.base));
        if dist(&q, &self.base) > 1e-6 {
            // not an orbit point of the base; keep the element as given
            return Ok(h.clone());
        }
        let word = g.word.inverse();
        let iso = self.evaluate(&word)?;
        Ok(GroupElement { word, iso })
    }

    pub fn element(&self, word: Word) -> Result<GroupElement> {
        let iso = self.evaluate(&word)?;
        Ok(GroupElement { word, iso })
    }

    /// `‖a1 b1 a1⁻¹ b1⁻¹ ··· ag bg ag⁻¹ bg⁻¹ − I‖_∞`.
    ///
    /// The product is accumulated in double-double arithmetic, so the value
    /// reflects the stored matrices rather than roundoff in the check.
    pub fn relator_residual(&self) -> f64 {
        self.generators
            .iter()
            .fold(DdMatrix::identity(), |acc, g| acc.mul(g.matrix()))
            .distance_to_identity()
    }

    /// Interior angle of the polygon at each vertex.
    pub fn polygon_angles(&self) -> Vec<f64> {
        let n = self.polygon.len();
        (0..n)
            .map(|k| {
                let v = &self.polygon[k];
                let prev = hyp2::log(v, &self.polygon[(k + n - 1) % n]);
                let next = hyp2::log(v, &self.polygon[(k + 1) % n]);
                hyp2::angle(&next, &prev).unwrap_or(0.0)
            })
            .collect()
    }

    /// Hyperbolic area of the fundamental polygon.
    pub fn polygon_area(&self) -> f64 {
        let n = self.polygon.len() as f64;
        (n - 2.0) * PI - self.polygon_angles().iter().sum::<f64>()
    }

    /// For each generator `s`, the largest distance between the image of the
    /// paired side's endpoints and the endpoints of side `s` (reversed).
    pub fn side_pairing_check(&self) -> Vec<f64> {
        let n = self.polygon.len();
        (0..n)
            .map(|slot| {
                let s = side_of(slot);
                let p = paired_side(s);
                let g = &self.generators[slot];
                let e0 = dist(&g.apply(&self.polygon[p]), &self.polygon[(s + 1) % n]);
                let e1 = dist(&g.apply(&self.polygon[(p + 1) % n]), &self.polygon[s]);
                e0.max(e1)
            })
            .collect()
    }

    /// Greedy descent toward the base point: repeatedly applies whichever
    /// generator brings the point closest to the base, while that strictly
    /// helps. Returns the reduced point and the element `g` with `q = g·p`.
    pub fn reduce(&self, p: &HPoint) -> (HPoint, GroupElement) {
        let mut q = *p;
        let mut g = GroupElement::identity();
        let mut d = dist(&q, &self.base);
        // each accepted move lowers d by a definite amount for a discrete group
        for _ in 0..100_000 {
            let best = self
                .generators
                .iter()
                .enumerate()
                .map(|(s, h)| {
                    let hq = h.apply(&q);
                    (s, hq, dist(&hq, &self.base))
                })
                .min_by(|a, b| a.2.total_cmp(&b.2));
            match best {
                Some((s, hq, dh)) if dh < d - 1e-13 => {
                    q = hq;
                    d = dh;
                    g = self.generator(s).compose(&g);
                }
                _ => break,
            }
        }
        if g.word.len() >= PROJECT_EVERY {
            if let Ok(iso) = g.iso.project() {
                g.iso = iso;
            }
        }
        (q, g)
    }

    /// Group elements moving the base point by at most `reach`, found by
    /// breadth-first search over generators.
    pub fn within(&self, reach: f64) -> Vec<GroupElement> {
        let mut found = vec![GroupElement::identity()];
        let mut frontier = vec![GroupElement::identity()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for e in &frontier {
                for s in 0..self.generators.len() {
                    let cand = e.compose(&self.generator(s));
                    if dist(&cand.iso.apply(&self.base), &self.base) > reach + 1e-9 {
                        continue;
                    }
                    if found.iter().all(|o| o.iso.max_abs_diff(&cand.iso) > 1e-6) {
                        found.push(cand.clone());
                        next.push(cand);
                    }
                }
            }
            frontier = next;
        }
        found
    }

    /// All distinct group elements of word length at most `max_len`.
    pub fn ball(&self, max_len: usize) -> Vec<GroupElement> {
        let mut out = vec![GroupElement::identity()];
        let mut frontier = vec![GroupElement::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for e in &frontier {
                for s in 0..self.generators.len() {
                    let cand = e.compose(&self.generator(s));
                    if out.iter().all(|o| o.iso.max_abs_diff(&cand.iso) > 1e-6) {
                        out.push(cand.clone());
                        next.push(cand);
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn genus_two_octagon() {
        let g = SurfaceGroup::regular(2).unwrap();
        assert_eq!(g.generators().len(), 8);
        for a in g.polygon_angles() {
            assert!((a - PI / 4.0).abs() < 1e-12);
        }
        let total: f64 = g.polygon_angles().iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-9);
        assert!((g.polygon_area() - 4.0 * PI).abs() < 1e-9);
        assert!(g.relator_residual() < 1e-9, "{}", g.relator_residual());
        for iso in g.generators() {
            assert!(iso.is_valid(1e-10));
        }
    }

    #[test]
    fn genus_three_group() {
        let g = SurfaceGroup::regular(3).unwrap();
        assert_eq!(g.generators().len(), 12);
        assert!(g.relator_residual() < 1e-9);
        assert!(g.side_pairing_check().iter().all(|&r| r < 1e-9));
        assert!((g.polygon_area() - 8.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn genus_too_small() {
        assert!(matches!(SurfaceGroup::regular(1), Err(Error::GenusTooSmall(1))));
        assert!(matches!(SurfaceGroup::regular(0), Err(Error::GenusTooSmall(0))));
    }

    #[test]
    fn side_pairings_close_up() {
        let g = SurfaceGroup::regular(2).unwrap();
        assert!(g.side_pairing_check().iter().all(|&r| r < 1e-9));
    }

    #[test]
    fn perturbed_generator_is_detected() {
        let g = SurfaceGroup::regular(2).unwrap();
        let mut gens = g.generators().to_vec();
        let mut m = *gens[0].matrix();
        m[(0, 2)] += 1e-3;
        gens[0] = Isometry::from_matrix_unchecked(m);
        let bad = SurfaceGroup::from_parts(2, gens, g.polygon().to_vec(), g.base());
        let res = bad.side_pairing_check();
        assert!(res[0] > 1e-4, "{}", res[0]);
    }

    #[test]
    fn generators_pair_with_inverses() {
        let g = SurfaceGroup::regular(2).unwrap();
        for s in 0..8 {
            let prod = g.generators()[s].compose(&g.generators()[s ^ 2]);
            assert!(prod.max_abs_diff(&Isometry::identity()) < 1e-10);
        }
    }

    #[test]
    fn word_text_roundtrip_and_reduction() {
        let w: Word = "a1B1A2b2".parse().unwrap();
        assert_eq!(w.letters(), &[0, 3, 6, 5]);
        assert_eq!(w.to_string(), "a1B1A2b2");
        assert_eq!(w.concat(&w.inverse()), Word::identity());
        assert_eq!(Word::identity().to_string(), "e");
        assert_eq!("e".parse::<Word>().unwrap(), Word::identity());
        assert_eq!("a1A1b2".parse::<Word>().unwrap().to_string(), "b2");
        assert!("c1".parse::<Word>().is_err());
        assert!("a0".parse::<Word>().is_err());
        assert!("a".parse::<Word>().is_err());
    }

    #[test]
    fn reduce_interior_and_orbit_points() {
        let g = SurfaceGroup::regular(2).unwrap();
        let p = HPoint::polar(0.3, 1.0);
        let (q, e) = g.reduce(&p);
        assert_eq!(q, p);
        assert!(e.word.is_empty());

        let orbit = g.generators()[0].apply(&g.base());
        let (q, e) = g.reduce(&orbit);
        assert!(dist(&q, &g.base()) < 1e-10);
        assert_eq!(e.word.to_string(), "A1");
        assert!(e.iso.max_abs_diff(&g.generators()[2]) < 1e-10);
    }

    #[test]
    fn reduce_descends_and_is_gauge_consistent() {
        let g = SurfaceGroup::regular(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = hyp2::sample_point(&mut rng, &g.base(), 10.0);
            let (q, e) = g.reduce(&p);
            assert!(dist(&q, &g.base()) <= dist(&p, &g.base()) + 1e-12);
            assert!(dist(&e.iso.apply(&p), &q) < 1e-8 * (1.0 + dist(&p, &g.base())).exp());
            // no single generator improves the result
            for h in g.generators() {
                assert!(dist(&q, &g.base()) <= dist(&h.apply(&q), &g.base()) + 1e-12);
            }
            let word_iso = g.evaluate(&e.word).unwrap();
            assert!(word_iso.max_abs_diff(&e.iso) < 1e-6);
        }
        for _ in 0..200 {
            let p = hyp2::sample_point(&mut rng, &g.base(), 4.0);
            let s = rng.random_range(0..8);
            let (q1, _) = g.reduce(&p);
            let (q2, _) = g.reduce(&g.generators()[s].apply(&p));
            assert!(dist(&q1, &q2) < 1e-9);
        }
    }

    use rand::Rng;

    #[test]
    fn ball_has_distinct_elements() {
        let g = SurfaceGroup::regular(2).unwrap();
        let b = g.ball(1);
        assert_eq!(b.len(), 9);
    }
}
