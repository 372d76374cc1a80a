//! Combinatorial triangulations of closed oriented surfaces.
//!
//! A [`Complex`] stores its vertex count, undirected edges and oriented
//! faces as given; directed edges ("darts") are derived from the edge set
//! and indexed in lexicographic `(i, j)` order, which fixes the neighbour
//! order used everywhere else.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fuchsian::{GroupElement, SurfaceGroup};
use crate::gmap::{DeckLabels, GeodesicMapping};
use crate::hyp2::{self, dist, HPoint, ZERO_LENGTH};

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    n: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    darts: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    reverse: Vec<usize>,
    dart_face: Vec<Option<usize>>,
}

/// One violated invariant found by [`Complex::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Issue {
    VertexOutOfRange { face: usize },
    SelfLoop { edge: [usize; 2] },
    RepeatedVertex { face: usize },
    DuplicateEdge { edge: [usize; 2] },
    DuplicateFace { face: usize },
    MissingEdge { edge: [usize; 2] },
    UnusedEdge { edge: [usize; 2] },
    NonManifoldEdge { edge: [usize; 2], faces: usize },
    BoundaryEdge { edge: [usize; 2] },
    InconsistentOrientation { dart: (usize, usize) },
    NonManifoldVertex { vertex: usize },
    IsolatedVertex { vertex: usize },
    Disconnected { components: usize },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// The result of [`Complex::validate`]; empty iff the complex is a closed,
/// connected, consistently oriented triangulated surface.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

fn key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Complex {
    /// Builds a complex from raw parts without checking anything. Use
    /// [`Complex::validate`] before relying on it.
    pub fn new(n: usize, edges: Vec<[usize; 2]>, faces: Vec<[usize; 3]>) -> Self {
        let mut pairs: Vec<(usize, usize)> = edges
            .iter()
            .filter(|e| e[0] != e[1] && e[0] < n && e[1] < n)
            .flat_map(|e| [(e[0], e[1]), (e[1], e[0])])
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let darts = pairs;

        let mut offsets = vec![0; n + 1];
        for &(i, _) in &darts {
            offsets[i + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }

        let mut c = Complex {
            n,
            edges,
            faces,
            darts,
            offsets,
            reverse: Vec::new(),
            dart_face: Vec::new(),
        };
        c.reverse = (0..c.darts.len())
            .map(|d| {
                let (i, j) = c.darts[d];
                c.dart(j, i).unwrap_or(d)
            })
            .collect();
        let mut dart_face = vec![None; c.darts.len()];
        for (f, face) in c.faces.iter().enumerate() {
            for k in 0..3 {
                if let Some(d) = c.dart(face[k], face[(k + 1) % 3]) {
                    dart_face[d].get_or_insert(f);
                }
            }
        }
        c.dart_face = dart_face;
        c
    }

    /// Builds a complex whose edge set is read off the faces, and checks it.
    pub fn from_faces(n: usize, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mut edges: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|f| [key(f[0], f[1]), key(f[1], f[2]), key(f[2], f[0])])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let c = Complex::new(n, edges, faces);
        let report = c.validate();
        if !report.is_valid() {
            return Err(Error::InvalidComplex(
                report
                    .issues
                    .iter()
                    .take(5)
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            ));
        }
        Ok(c)
    }

    /// Boundary of the tetrahedron, the smallest triangulated sphere.
    pub fn tetrahedron() -> Self {
        Complex::from_faces(4, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
            .expect("tetrahedron is a valid complex")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn darts(&self) -> &[(usize, usize)] {
        &self.darts
    }

    pub fn dart_count(&self) -> usize {
        self.darts.len()
    }

    /// Index of the directed edge `(i, j)`.
    pub fn dart(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n {
            return None;
        }
        let range = self.offsets[i]..self.offsets[i + 1];
        self.darts[range.clone()]
            .binary_search_by(|&(_, b)| b.cmp(&j))
            .ok()
            .map(|k| range.start + k)
    }

    /// Darts leaving vertex `i`, in increasing order of their head.
    pub fn outgoing(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// The dart running the opposite way.
    pub fn reverse(&self, d: usize) -> usize {
        self.reverse[d]
    }

    /// The face containing dart `d` as one of its oriented sides.
    pub fn dart_face(&self, d: usize) -> Option<usize> {
        self.dart_face[d]
    }

    pub fn euler_char(&self) -> i64 {
        self.n as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Lists every violated surface invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.n;

        let mut edge_set = HashSet::new();
        for e in &self.edges {
            if e[0] == e[1] {
                issues.push(Issue::SelfLoop { edge: *e });
            } else if !edge_set.insert(key(e[0], e[1])) {
                issues.push(Issue::DuplicateEdge { edge: key(e[0], e[1]) });
            }
        }

        let mut face_keys = HashSet::new();
        let mut edge_faces: HashMap<[usize; 2], usize> = HashMap::new();
        let mut dart_uses: HashMap<(usize, usize), usize> = HashMap::new();
        let mut good_faces = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            if face.iter().any(|&v| v >= n) {
                issues.push(Issue::VertexOutOfRange { face: f });
                continue;
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                issues.push(Issue::RepeatedVertex { face: f });
                continue;
            }
            let mut sorted = *face;
            sorted.sort_unstable();
            if !face_keys.insert(sorted) {
                issues.push(Issue::DuplicateFace { face: f });
            }
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                *edge_faces.entry(key(a, b)).or_default() += 1;
                *dart_uses.entry((a, b)).or_default() += 1;
            }
            good_faces.push(*face);
        }

        let mut missing: Vec<_> = edge_faces
            .keys()
            .filter(|e| !edge_set.contains(*e))
            .copied()
            .collect();
        missing.sort_unstable();
        issues.extend(missing.into_iter().map(|edge| Issue::MissingEdge { edge }));

        let mut sorted_edges: Vec<_> = edge_set.iter().copied().collect();
        sorted_edges.sort_unstable();
        for e in &sorted_edges {
            match edge_faces.get(e).copied().unwrap_or(0) {
                0 => issues.push(Issue::UnusedEdge { edge: *e }),
                1 => issues.push(Issue::BoundaryEdge { edge: *e }),
                2 => {}
                k => issues.push(Issue::NonManifoldEdge { edge: *e, faces: k }),
            }
        }
        let mut bad_darts: Vec<_> = dart_uses
            .iter()
            .filter(|(_, &k)| k > 1)
            .map(|(&d, _)| d)
            .collect();
        bad_darts.sort_unstable();
        issues.extend(
            bad_darts
                .into_iter()
                .map(|dart| Issue::InconsistentOrientation { dart }),
        );

        // vertex links: the corners around a manifold vertex form one cycle
        let mut corners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for face in &good_faces {
            for k in 0..3 {
                corners[face[k]].push((face[(k + 1) % 3], face[(k + 2) % 3]));
            }
        }
        for (v, link) in corners.iter().enumerate() {
            if link.is_empty() {
                issues.push(Issue::IsolatedVertex { vertex: v });
                continue;
            }
            let next: HashMap<usize, usize> = link.iter().copied().collect();
            if next.len() != link.len() {
                issues.push(Issue::NonManifoldVertex { vertex: v });
                continue;
            }
            let start = link[0].0;
            let mut cur = start;
            let mut steps = 0;
            while let Some(&nx) = next.get(&cur) {
                steps += 1;
                cur = nx;
                if cur == start || steps > link.len() {
                    break;
                }
            }
            if cur != start || steps != link.len() {
                issues.push(Issue::NonManifoldVertex { vertex: v });
            }
        }

        // connectivity through the edge set
        if n > 0 {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for e in &sorted_edges {
                if e[0] < n && e[1] < n {
                    let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
                    parent[a] = b;
                }
            }
            let components = (0..n).filter(|&v| find(&mut parent, v) == v).count();
            if components > 1 {
                issues.push(Issue::Disconnected { components });
            }
        }

        ValidationReport { issues }
    }
}

/// A face given by its three vertices and, for each corner, the deck
/// transformation placing that vertex's lift in the face's frame.
pub(crate) type FramedFace = [(usize, GroupElement); 3];

/// Assembles a mapping from faces expressed in local frames. The label of
/// dart `(a, b)` is `P_a⁻¹ P_b` for the frames `P` of any face containing
/// it; the first face seen wins.
pub(crate) fn from_framed_faces(
    group: Arc<SurfaceGroup>,
    lifts: Vec<HPoint>,
    framed: &[FramedFace],
) -> Result<GeodesicMapping> {
    let faces: Vec<[usize; 3]> = framed.iter().map(|f| [f[0].0, f[1].0, f[2].0]).collect();
    let complex = Arc::new(Complex::from_faces(lifts.len(), faces)?);
    let mut labels: Vec<Option<GroupElement>> = vec![None; complex.dart_count()];
    for face in framed {
        for k in 0..3 {
            let (a, pa) = &face[k];
            let (b, pb) = &face[(k + 1) % 3];
            let d = complex.dart(*a, *b).expect("face edge present");
            if labels[d].is_none() {
                let lab = group.canonical(&pa.inverse().compose(pb))?;
                let r = complex.reverse(d);
                labels[r] = Some(lab.inverse());
                labels[d] = Some(lab);
            }
        }
    }
    let labels = labels
        .into_iter()
        .map(|l| l.ok_or_else(|| Error::InvalidComplex("dart without a face".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicMapping::new(
        complex,
        group,
        DeckLabels::new(labels),
        lifts,
    ))
}

/// Splits a geodesic triangle into the six triangles of its barycentric
/// subdivision, keeping orientation.
fn barycentric(tri: &[HPoint; 3]) -> [[HPoint; 3]; 6] {
    let [p, q, r] = *tri;
    let mpq = hyp2::midpoint(&p, &q);
    let mqr = hyp2::midpoint(&q, &r);
    let mrp = hyp2::midpoint(&r, &p);
    let c = hyp2::centroid(&[p, q, r]);
    [
        [p, mpq, c],
        [mpq, q, c],
        [q, mqr, c],
        [mqr, r, c],
        [r, mrp, c],
        [mrp, p, c],
    ]
}

const SAME_POINT: f64 = 1e-9;

fn find_point(points: &[HPoint], p: &HPoint) -> Option<usize> {
    points.iter().position(|q| dist(p, q) < SAME_POINT)
}

/// The builtin triangulation of the surface: the fundamental polygon coned
/// to its centre, followed by two barycentric subdivisions. Vertex 0 is the
/// polygon centre. Lifts lie in the closed fundamental polygon.
pub fn builtin_mesh(group: &SurfaceGroup) -> Result<GeodesicMapping> {
    let polygon = group.polygon();
    let sides = polygon.len();
    let mut tris: Vec<[HPoint; 3]> = (0..sides)
        .map(|k| [group.base(), polygon[k], polygon[(k + 1) % sides]])
        .collect();
    for _ in 0..2 {
        tris = tris.iter().flat_map(barycentric).collect();
    }

    // distinct points of the cover, in order of first appearance
    let mut points: Vec<HPoint> = Vec::new();
    let corners: Vec<[usize; 3]> = tris
        .iter()
        .map(|t| {
            let mut idx = [0; 3];
            for (k, p) in t.iter().enumerate() {
                idx[k] = match find_point(&points, p) {
                    Some(i) => i,
                    None => {
                        points.push(*p);
                        points.len() - 1
                    }
                };
            }
            idx
        })
        .collect();

    // orbit relation: q = g_s · p among the points on the polygon boundary
    let mut links: Vec<Vec<(usize, usize)>> = vec![Vec::new(); points.len()];
    for (a, p) in points.iter().enumerate() {
        for (s, g) in group.generators().iter().enumerate() {
            if let Some(b) = find_point(&points, &g.apply(p)) {
                if b != a {
                    links[a].push((s, b));
                }
            }
        }
    }

    // quotient classes, with the element carrying each class's first point
    // to every other member
    let mut class = vec![usize::MAX; points.len()];
    let mut frame: Vec<GroupElement> = vec![GroupElement::identity(); points.len()];
    let mut reps: Vec<usize> = Vec::new();
    for start in 0..points.len() {
        if class[start] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(start);
        class[start] = id;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &(s, b) in &links[a] {
                if class[b] == usize::MAX {
                    class[b] = id;
                    frame[b] = group.generator(s).compose(&frame[a]);
                    queue.push_back(b);
                }
            }
        }
    }

    let lifts: Vec<HPoint> = reps.iter().map(|&r| points[r]).collect();
    let framed: Vec<FramedFace> = corners
        .iter()
        .map(|c| {
            [
                (class[c[0]], frame[c[0]].clone()),
                (class[c[1]], frame[c[1]].clone()),
                (class[c[2]], frame[c[2]].clone()),
            ]
        })
        .collect();
    from_framed_faces(Arc::new(group.clone()), lifts, &framed)
}

/// 1→4 midpoint subdivision. The vertex added on edge `{i, j}` (stored
/// with `i < j`) sits at the geodesic midpoint of `x_i` and `A_ij·x_j`; the
/// dart from it to `i` is labelled by the identity and the dart to `j` by
/// `A_ij`. Old lifts are kept as they are.
pub fn subdivide(m: &GeodesicMapping) -> Result<GeodesicMapping> {
    let c = m.complex();
    let n = c.vertex_count();
    let mut lifts = m.lifts().to_vec();
    let mut mid_of: HashMap<[usize; 2], usize> = HashMap::new();
    for e in c.edges() {
        let [i, j] = key(e[0], e[1]);
        let d = c.dart(i, j).expect("edge has darts");
        let xj = m.labels().get(d).iso.apply(&m.lifts()[j]);
        if dist(&m.lifts()[i], &xj) < ZERO_LENGTH {
            return Err(Error::DegenerateEdge(i, j, dist(&m.lifts()[i], &xj)));
        }
        mid_of.insert([i, j], lifts.len());
        lifts.push(hyp2::midpoint(&m.lifts()[i], &xj));
    }
    debug_assert_eq!(lifts.len(), n + c.edges().len());

    let mut framed = Vec::with_capacity(4 * c.faces().len());
    for face in c.faces() {
        let [i, j, k] = *face;
        let frames = [
            GroupElement::identity(),
            m.label(i, j).clone(),
            m.label(i, k).clone(),
        ];
        let corner = |v: usize| frames[face.iter().position(|&u| u == v).unwrap()].clone();
        // a midpoint is placed in the face frame by the frame of its lower end
        let mid = |a: usize, b: usize| {
            let e = key(a, b);
            (mid_of[&e], corner(e[0]))
        };
        let (mij, mjk, mki) = (mid(i, j), mid(j, k), mid(k, i));
        framed.push([(i, corner(i)), mij.clone(), mki.clone()]);
        framed.push([(j, corner(j)), mjk.clone(), mij.clone()]);
        framed.push([(k, corner(k)), mki.clone(), mjk.clone()]);
        framed.push([mij, mjk, mki]);
    }
    from_framed_faces(m.group_arc(), lifts, &framed)
}
