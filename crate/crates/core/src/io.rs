//! Plain-text formats for groups, meshes, mappings and weights.
//!
//! Reals are written with 17 significant digits, which reproduces every
//! `f64` exactly on reading. Label matrices are never stored; they are
//! evaluated from their words.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::fuchsian::{GroupElement, SurfaceGroup, Word};
use crate::gmap::{DeckLabels, GeodesicMapping, Weights};
use crate::hyp2::{HPoint, Isometry, Vec3};
use crate::simplicial::Complex;

pub const MESH_HEADER: &str = "hyptutte-mesh v1";
pub const WEIGHTS_HEADER: &str = "hyptutte-weights v1";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Non-blank, non-comment lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(n, l)| (n + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(Error::parse(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| *l)
    }

    fn expect(&mut self, text: &str) -> Result<()> {
        let (n, l) = self.next(text)?;
        if l != text {
            return Err(Error::parse(n, format!("expected {text:?}, found {l:?}")));
        }
        Ok(())
    }

    /// A `key value` line with a non-negative integer value.
    fn count(&mut self, key: &str) -> Result<usize> {
        let (n, l) = self.next(key)?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::parse(n, format!("expected \"{key} <count>\", found {l:?}")));
        }
        let value = parts
            .next()
            .ok_or_else(|| Error::parse(n, format!("missing {key} count")))?;
        value
            .parse()
            .map_err(|_| Error::parse(n, format!("bad {key} count {value:?}")))
    }

    fn finish(&mut self) -> Result<()> {
        if let Some((n, l)) = self.inner.next() {
            return Err(Error::parse(n, format!("trailing content {l:?}")));
        }
        Ok(())
    }
}

fn fields<const N: usize>(n: usize, line: &str) -> Result<[&str; N]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    parts
        .try_into()
        .map_err(|p: Vec<&str>| Error::parse(n, format!("expected {N} fields, found {}", p.len())))
}

fn int(n: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::parse(n, format!("bad index {s:?}")))
}

fn float(n: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::parse(n, format!("bad number {s:?}")))
}

/// `genus g`, then per generator its word and three matrix rows.
pub fn write_group(g: &SurfaceGroup) -> String {
    let mut out = format!("genus {}\n", g.genus());
    for (s, iso) in g.generators().iter().enumerate() {
        writeln!(out, "generator {}", Word::generator(s)).unwrap();
        let m = iso.matrix();
        for r in 0..3 {
            writeln!(out, "{} {} {}", real(m[(r, 0)]), real(m[(r, 1)]), real(m[(r, 2)])).unwrap();
        }
    }
    out
}

/// Reads generators written by [`write_group`]. The polygon and base point
/// are those of the regular group of the same genus.
pub fn parse_group(text: &str) -> Result<SurfaceGroup> {
    let mut lines = Lines::new(text);
    let genus = lines.count("genus")?;
    let regular = SurfaceGroup::regular(genus)?;
    let mut generators = Vec::with_capacity(4 * genus);
    for s in 0..4 * genus {
        let (n, l) = lines.next("generator")?;
        let [key, word] = fields::<2>(n, l)?;
        if key != "generator" || word.parse::<Word>().ok() != Some(Word::generator(s)) {
            return Err(Error::parse(n, format!("expected \"generator {}\"", Word::generator(s))));
        }
        let mut m = Matrix3::zeros();
        for r in 0..3 {
            let (n, l) = lines.next("matrix row")?;
            let row = fields::<3>(n, l)?;
            for (c, x) in row.iter().enumerate() {
                m[(r, c)] = float(n, x)?;
            }
        }
        generators.push(Isometry::from_matrix_unchecked(m));
    }
    lines.finish()?;
    Ok(SurfaceGroup::from_parts(
        genus,
        generators,
        regular.polygon().to_vec(),
        regular.base(),
    ))
}

fn write_mesh_body(m: &GeodesicMapping, out: &mut String) {
    let c = m.complex();
    writeln!(out, "{MESH_HEADER}").unwrap();
    writeln!(out, "genus {}", m.group().genus()).unwrap();
    writeln!(out, "vertices {}", c.vertex_count()).unwrap();
    writeln!(out, "darts {}", c.dart_count()).unwrap();
    for (d, &(i, j)) in c.darts().iter().enumerate() {
        writeln!(out, "{i} {j} {}", m.labels().get(d).word).unwrap();
    }
    writeln!(out, "faces {}", c.faces().len()).unwrap();
    for [i, j, k] in c.faces() {
        writeln!(out, "{i} {j} {k}").unwrap();
    }
}

/// The mesh file: complex and deck labels.
pub fn write_mesh(m: &GeodesicMapping) -> String {
    let mut out = String::new();
    write_mesh_body(m, &mut out);
    out
}

/// The mapping file: the mesh file followed by one lift per vertex.
pub fn write_mapping(m: &GeodesicMapping) -> String {
    let mut out = String::new();
    write_mesh_body(m, &mut out);
    writeln!(out, "lifts {}", m.lifts().len()).unwrap();
    for p in m.lifts() {
        let v = p.coords();
        writeln!(out, "{} {} {}", real(v[0]), real(v[1]), real(v[2])).unwrap();
    }
    out
}

/// Reads a mesh or mapping file. Without a lifts section every vertex
/// starts at the base point.
pub fn parse_mapping(text: &str) -> Result<GeodesicMapping> {
    let mut lines = Lines::new(text);
    lines.expect(MESH_HEADER)?;
    let genus = lines.count("genus")?;
    let group = Arc::new(SurfaceGroup::regular(genus)?);
    let n = lines.count("vertices")?;
    let darts = lines.count("darts")?;
    let mut words = Vec::with_capacity(darts);
    for _ in 0..darts {
        let (ln, l) = lines.next("dart")?;
        let [i, j, w] = fields::<3>(ln, l)?;
        let word: Word = w.parse().map_err(|_| Error::parse(ln, format!("bad word {w:?}")))?;
        words.push((ln, int(ln, i)?, int(ln, j)?, word));
    }
    let nf = lines.count("faces")?;
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next("face")?;
        let [i, j, k] = fields::<3>(ln, l)?;
        faces.push([int(ln, i)?, int(ln, j)?, int(ln, k)?]);
    }
    let complex = Arc::new(Complex::from_faces(n, faces)?);
    if darts != complex.dart_count() {
        return Err(Error::InvalidComplex(format!(
            "{darts} labelled darts for {} directed edges",
            complex.dart_count()
        )));
    }
    let mut labels: Vec<Option<GroupElement>> = vec![None; darts];
    for (ln, i, j, word) in words {
        let d = complex
            .dart(i, j)
            .ok_or_else(|| Error::parse(ln, format!("({i}, {j}) is not an edge")))?;
        if labels[d].is_some() {
            return Err(Error::parse(ln, format!("dart ({i}, {j}) listed twice")));
        }
        let iso = group
            .evaluate(&word)
            .map_err(|_| Error::parse(ln, format!("word {word} uses unknown generators")))?;
        labels[d] = Some(GroupElement { word, iso });
    }
    let labels = labels.into_iter().map(|l| l.expect("every dart labelled")).collect();

    let lifts = if lines.peek().is_some() {
        let count = lines.count("lifts")?;
        if count != n {
            return Err(Error::parse(lines.last, format!("{count} lifts for {n} vertices")));
        }
        let mut lifts = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = lines.next("lift")?;
            let [x, y, z] = fields::<3>(ln, l)?;
            let p = Vec3::new(float(ln, x)?, float(ln, y)?, float(ln, z)?);
            let lift = HPoint::from_coords_unchecked(p);
            if !(lift.sheet_residual() < 1e-6 && p[2] > 0.0) {
                return Err(Error::parse(ln, "lift is not on the hyperboloid"));
            }
            lifts.push(lift);
        }
        lifts
    } else {
        vec![group.base(); n]
    };
    lines.finish()?;
    Ok(GeodesicMapping::new(complex, group, DeckLabels::new(labels), lifts))
}

pub fn write_weights(c: &Complex, w: &Weights) -> String {
    let mut out = format!("{WEIGHTS_HEADER}\ndarts {}\n", w.len());
    for (d, &(i, j)) in c.darts().iter().enumerate() {
        writeln!(out, "{i} {j} {}", real(w.get(d))).unwrap();
    }
    out
}

/// Reads a weights file for complex `c`. Non-positive entries are rejected
/// with [`Error::InvalidWeights`].
pub fn parse_weights(c: &Complex, text: &str) -> Result<Weights> {
    let mut lines = Lines::new(text);
    lines.expect(WEIGHTS_HEADER)?;
    let darts = lines.count("darts")?;
    if darts != c.dart_count() {
        return Err(Error::parse(lines.last, format!("{darts} weights for {} directed edges", c.dart_count())));
    }
    let mut values = vec![f64::NAN; darts];
    let mut seen = vec![false; darts];
    for _ in 0..darts {
        let (ln, l) = lines.next("weight")?;
        let [i, j, v] = fields::<3>(ln, l)?;
        let (i, j) = (int(ln, i)?, int(ln, j)?);
        let d = c
            .dart(i, j)
            .ok_or_else(|| Error::parse(ln, format!("({i}, {j}) is not an edge")))?;
        if std::mem::replace(&mut seen[d], true) {
            return Err(Error::parse(ln, format!("dart ({i}, {j}) listed twice")));
        }
        values[d] = float(ln, v)?;
    }
    lines.finish()?;
    Weights::new(values)
}
