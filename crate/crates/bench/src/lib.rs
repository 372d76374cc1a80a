//! Fixtures shared by the benchmarks in `benches/`.

use hyptutte::simplicial::{builtin_mesh, subdivide};
use hyptutte::{solve, GeodesicMapping, SolverConfig, SurfaceGroup, Weights};

/// The builtin genus-2 mesh after `refine` subdivisions.
pub fn mesh(refine: usize) -> GeodesicMapping {
    let mut m = builtin_mesh(&SurfaceGroup::regular(2).expect("genus 2")).expect("builtin mesh");
    for _ in 0..refine {
        m = subdivide(&m).expect("subdivision");
    }
    m
}

/// [`mesh`] balanced for uniform weights.
pub fn balanced(refine: usize) -> GeodesicMapping {
    let m = mesh(refine);
    let w = Weights::uniform(m.complex());
    solve(&m, &w, &SolverConfig::default()).expect("solver converges").0
}
