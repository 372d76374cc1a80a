//! Damped fixed-point iteration for the balanced mapping.
//!
//! Each sweep moves every vertex simultaneously along its normalized
//! residue, `x_i ← exp(τ r_i / W_i)`. Sweeps that would increase
//! `μ = max_i |r_i| / W_i` are retried with a smaller step.

use crate::error::{Error, Result};
use crate::gmap::{residue_field, GeodesicMapping, Weights};
use crate::hyp2::{self, HPoint, TangentVec, Vec3};

/// Sweeps between gauge normalizations of vertex 0.
pub const NORMALIZE_EVERY: usize = 64;

/// Step halvings tried before a sweep is declared stalled.
const MAX_BACKTRACKS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub backtrack: f64,
    /// Seed for randomized starts; the iteration itself is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: 0.5,
            eps: 1e-10,
            max_iters: 200_000,
            backtrack: 0.5,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau must lie in (0, 1], got {}", self.tau)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "backtrack must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveTrace {
    /// `μ` of every iterate, starting with the initial mapping.
    pub residuals: Vec<f64>,
    /// Step size of every accepted sweep.
    pub steps: Vec<f64>,
    /// Accepted sweeps.
    pub sweeps: usize,
    /// Rejected trial steps.
    pub rejections: usize,
    /// Morph parameter of the failing solve, if any.
    pub t: Option<f64>,
}

impl SolveTrace {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn mu(field: &[(Vec3, f64)], lifts: &[HPoint]) -> f64 {
    field
        .iter()
        .zip(lifts)
        .map(|((r, total), x)| TangentVec::new(*x, *r).norm() / total)
        .fold(0.0, f64::max)
}

fn advance(lifts: &[HPoint], field: &[(Vec3, f64)], tau: f64) -> Vec<HPoint> {
    lifts
        .iter()
        .zip(field)
        .map(|(x, (r, total))| hyp2::exp(&TangentVec::new(*x, r * (tau / total))))
        .collect()
}

/// One Jacobi sweep. Returns the new mapping and `μ` before the step.
pub fn step(m: &GeodesicMapping, w: &Weights, tau: f64) -> Result<(GeodesicMapping, f64)> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidConfig(format!("tau must lie in (0, 1], got {tau}")));
    }
    m.residues(w)?;
    let mut field = Vec::new();
    residue_field(m, w, &mut field);
    let before = mu(&field, m.lifts());
    Ok((m.with_lifts(advance(m.lifts(), &field, tau)), before))
}

/// Iterates [`step`] from `m0` until `μ < eps`.
pub fn solve(m0: &GeodesicMapping, w: &Weights, cfg: &SolverConfig) -> Result<(GeodesicMapping, SolveTrace)> {
    cfg.validate()?;
    m0.residues(w)?;
    let mut trace = SolveTrace::default();
    let mut m = m0.clone();
    let mut field = Vec::new();
    let mut trial = Vec::new();
    residue_field(&m, w, &mut field);
    let mut current = mu(&field, m.lifts());
    trace.residuals.push(current);

    while current >= cfg.eps {
        if trace.sweeps >= cfg.max_iters {
            return Err(Error::NoConvergence(Box::new(trace)));
        }
        let mut tau = cfg.tau;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = m.with_lifts(advance(m.lifts(), &field, tau));
            residue_field(&candidate, w, &mut trial);
            let next = mu(&trial, candidate.lifts());
            if next <= current {
                accepted = Some((candidate, next));
                break;
            }
            trace.rejections += 1;
            tau *= cfg.backtrack;
        }
        let Some((candidate, next)) = accepted else {
            return Err(Error::NoConvergence(Box::new(trace)));
        };
        m = candidate;
        std::mem::swap(&mut field, &mut trial);
        current = next;
        trace.sweeps += 1;
        trace.steps.push(tau);
        trace.residuals.push(current);

        if trace.sweeps % NORMALIZE_EVERY == 0 {
            m = m.normalize_gauge().project_labels();
            residue_field(&m, w, &mut field);
            current = mu(&field, m.lifts());
        }
    }
    Ok((m, trace))
}

/// [`solve`] started from a previous solution for nearby weights.
pub fn solve_warm(prev: &GeodesicMapping, w: &Weights, cfg: &SolverConfig) -> Result<(GeodesicMapping, SolveTrace)> {
    solve(prev, w, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::SurfaceGroup;
    use crate::gmap::distance_x;
    use crate::simplicial::builtin_mesh;

    fn mesh() -> GeodesicMapping {
        builtin_mesh(&SurfaceGroup::regular(2).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        for bad in [
            SolverConfig { tau: 0.0, ..Default::default() },
            SolverConfig { tau: 1.5, ..Default::default() },
            SolverConfig { eps: 0.0, ..Default::default() },
            SolverConfig { max_iters: 0, ..Default::default() },
            SolverConfig { backtrack: 1.0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn converges_and_restarts_at_fixed_point() {
        let m = mesh();
        let w = Weights::uniform(m.complex());
        let (sol, trace) = solve(&m, &w, &SolverConfig::default()).unwrap();
        assert!(trace.final_residual() < 1e-10);
        assert!(sol.max_normalized_residual(&w).unwrap() < 1e-10);
        assert_eq!(trace.steps.len(), trace.sweeps);

        let (again, t2) = solve(&sol, &w, &SolverConfig::default()).unwrap();
        assert_eq!(t2.sweeps, 0);
        assert_eq!(again.lifts(), sol.lifts());

        let (stepped, before) = step(&sol, &w, 0.5).unwrap();
        assert!(before < 1e-10);
        assert!(distance_x(&stepped, &sol).unwrap() < 0.5 * 1e-10);
    }

    #[test]
    fn residual_sequence_is_monotone() {
        let m = mesh();
        let w = Weights::uniform(m.complex());
        let cfg = SolverConfig { eps: 1e-6, ..Default::default() };
        let (_, trace) = solve(&m, &w, &cfg).unwrap();
        for pair in trace.residuals.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn gives_up_after_max_iters() {
        let m = mesh();
        let w = Weights::uniform(m.complex());
        let cfg = SolverConfig { max_iters: 3, ..Default::default() };
        match solve(&m, &w, &cfg) {
            Err(Error::NoConvergence(trace)) => {
                assert_eq!(trace.sweeps, 3);
                assert!(trace.final_residual() > 1e-10);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn mu_is_gauge_invariant() {
        let m = mesh();
        let w = Weights::uniform(m.complex());
        let g = m.group().generator(2);
        let gm = m.gauge(40, &g);
        let (_, a) = step(&m, &w, 0.5).unwrap();
        let (_, b) = step(&gm, &w, 0.5).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
