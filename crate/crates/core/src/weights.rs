//! Mean value coordinates and morphing through weight space.

use crate::balance::{solve, solve_warm, SolverConfig};
use crate::error::{Error, Result};
use crate::gmap::{GeodesicMapping, Weights};
use crate::hyp2::{self, ZERO_LENGTH};
use crate::verify;

/// Inner angles of face `f` at its three corners, measured between the
/// outgoing edge vectors.
pub fn corner_angles(m: &GeodesicMapping, f: usize) -> Result<[f64; 3]> {
    let [i, j, k] = m.complex().faces()[f];
    let c = m.complex();
    let dart = |a: usize, b: usize| c.dart(a, b).ok_or(Error::DegenerateFace(f));
    let corner = |a: usize, b: usize, z: usize| -> Result<f64> {
        let u = m.edge_vector(dart(a, b)?);
        let v = m.edge_vector(dart(a, z)?);
        if u.norm() <= ZERO_LENGTH || v.norm() <= ZERO_LENGTH {
            return Err(Error::DegenerateFace(f));
        }
        hyp2::angle(&u, &v).map_err(|_| Error::DegenerateFace(f))
    };
    Ok([corner(i, j, k)?, corner(j, k, i)?, corner(k, i, j)?])
}

/// `(tan(α/2) + tan(β/2)) / ℓ`.
pub fn mvc_weight(alpha: f64, beta: f64, len: f64) -> f64 {
    ((alpha / 2.0).tan() + (beta / 2.0).tan()) / len
}

/// Mean value coordinates of an embedded mapping.
///
/// For dart `(i, j)`, `α` and `β` are the corner angles at `i` in the two
/// faces on either side of the edge.
pub fn mvc(m: &GeodesicMapping) -> Result<Weights> {
    let c = m.complex();
    let mut angles = Vec::with_capacity(c.faces().len());
    for f in 0..c.faces().len() {
        match verify::orientation(m, f) {
            Ok(1) => {}
            Ok(_) => return Err(Error::NotEmbedded(format!("face {f} is not positively oriented"))),
            Err(_) => return Err(Error::NotEmbedded(format!("face {f} is degenerate"))),
        }
        angles.push(corner_angles(m, f).map_err(|_| Error::NotEmbedded(format!("face {f} is degenerate")))?);
    }
    let corner_at = |face: usize, v: usize| {
        let pos = c.faces()[face].iter().position(|&x| x == v).expect("vertex on face");
        angles[face][pos]
    };
    let mut values = Vec::with_capacity(c.dart_count());
    for d in 0..c.dart_count() {
        let (i, _) = c.darts()[d];
        let missing = || Error::NotEmbedded(format!("dart {d} is a boundary edge"));
        let left = c.dart_face(d).ok_or_else(missing)?;
        let right = c.dart_face(c.reverse(d)).ok_or_else(missing)?;
        values.push(mvc_weight(corner_at(left, i), corner_at(right, i), m.edge_length(d)));
    }
    Weights::new(values).map_err(|e| Error::NotEmbedded(e.to_string()))
}

fn check_same_len(w0: &Weights, w1: &Weights) -> Result<()> {
    if w0.len() != w1.len() {
        return Err(Error::InvalidWeights(format!(
            "cannot interpolate {} and {} weights",
            w0.len(),
            w1.len()
        )));
    }
    Ok(())
}

/// `(1 − t)·w0 + t·w1`.
pub fn interpolate(w0: &Weights, w1: &Weights, t: f64) -> Result<Weights> {
    check_same_len(w0, w1)?;
    if t == 0.0 {
        return Ok(w0.clone());
    }
    if t == 1.0 {
        return Ok(w1.clone());
    }
    Weights::new(
        w0.values()
            .iter()
            .zip(w1.values())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect(),
    )
}

/// `w0^(1 − t) · w1^t`, entrywise.
pub fn interpolate_log(w0: &Weights, w1: &Weights, t: f64) -> Result<Weights> {
    check_same_len(w0, w1)?;
    if t == 0.0 {
        return Ok(w0.clone());
    }
    if t == 1.0 {
        return Ok(w1.clone());
    }
    Weights::new(
        w0.values()
            .iter()
            .zip(w1.values())
            .map(|(a, b)| ((1.0 - t) * a.ln() + t * b.ln()).exp())
            .collect(),
    )
}

#[derive(Clone, Debug)]
pub struct MorphPlan {
    pub m0: GeodesicMapping,
    pub m1: GeodesicMapping,
    pub frames: usize,
    pub cfg: SolverConfig,
    pub log_space: bool,
    /// Solve every frame from `m0` instead of the previous frame.
    pub cold: bool,
}

impl MorphPlan {
    pub fn new(m0: GeodesicMapping, m1: GeodesicMapping, frames: usize) -> Self {
        MorphPlan {
            m0,
            m1,
            frames,
            cfg: SolverConfig::default(),
            log_space: false,
            cold: false,
        }
    }
}

/// Frames `Φ(w_t)` for `t = k/(N−1)`, where `w_t` runs from `mvc(m0)` to
/// `mvc(m1)`. Every frame is checked with [`verify::embedding_report`].
pub fn morph(plan: &MorphPlan) -> Result<Vec<GeodesicMapping>> {
    if plan.frames < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 frames, got {}", plan.frames)));
    }
    plan.cfg.validate()?;
    plan.m0.same_class(&plan.m1)?;
    for (name, m) in [("first", &plan.m0), ("last", &plan.m1)] {
        if !verify::embedding_report(m).pass {
            return Err(Error::NotEmbedded(format!("{name} endpoint fails verification")));
        }
    }
    let w0 = mvc(&plan.m0)?;
    let w1 = mvc(&plan.m1)?;
    let mut frames: Vec<GeodesicMapping> = Vec::with_capacity(plan.frames);
    for k in 0..plan.frames {
        let t = k as f64 / (plan.frames - 1) as f64;
        let w = if plan.log_space {
            interpolate_log(&w0, &w1, t)?
        } else {
            interpolate(&w0, &w1, t)?
        };
        let result = match frames.last() {
            Some(prev) if !plan.cold => solve_warm(prev, &w, &plan.cfg),
            _ => solve(&plan.m0, &w, &plan.cfg),
        };
        let frame = match result {
            Ok((frame, _)) => frame,
            Err(Error::NoConvergence(mut trace)) => {
                trace.t = Some(t);
                return Err(Error::NoConvergence(trace));
            }
            Err(e) => return Err(e),
        };
        if !verify::embedding_report(&frame).pass {
            return Err(Error::NotEmbedded(format!("frame {k} (t = {t})")));
        }
        frames.push(frame);
    }
    Ok(frames)
}
