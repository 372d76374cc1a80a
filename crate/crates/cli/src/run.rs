use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hyptutte::simplicial::{builtin_mesh, subdivide};
use hyptutte::verify::{embedding_report, embedding_report_paranoid};
use hyptutte::weights::{morph, mvc, MorphPlan};
use hyptutte::{io, solve, Error, GeodesicMapping, SolveTrace, SurfaceGroup, Weights};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SolverArgs;
use crate::render::{svg, RenderStyle};

#[derive(Debug, Parser)]
#[command(name = "hyptutte", version, about = "Balanced geodesic triangulations of hyperbolic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the builtin mesh of a genus-g surface
    Mesh {
        #[arg(long, default_value_t = 2)]
        genus: usize,
        /// Number of midpoint subdivisions
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Find the balanced mapping for the given weights
    Solve {
        /// Mesh or mapping file; lifts, when present, are the starting point
        mesh: PathBuf,
        #[arg(short, long, conflicts_with = "uniform", required_unless_present = "uniform")]
        weights: Option<PathBuf>,
        /// Use weight 1 on every directed edge
        #[arg(long)]
        uniform: bool,
        /// Perturb every starting lift by a random tangent of at most this norm
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the residual history here
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Mean value coordinates of an embedded mapping
    Mvc {
        mapping: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check that a mapping is an embedded geodesic triangulation
    Verify {
        mapping: PathBuf,
        /// Also test every pair of faces for overlap in the universal cover
        #[arg(long)]
        paranoid: bool,
    },
    /// Interpolate between two embedded mappings through their MVC weights
    Morph {
        first: PathBuf,
        last: PathBuf,
        #[arg(long, default_value_t = 16)]
        frames: usize,
        /// Interpolate weights geometrically instead of linearly
        #[arg(long)]
        log_space: bool,
        /// Solve every frame from the first mapping
        #[arg(long)]
        cold: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        style: RenderStyle,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Draw a mapping in the Poincaré disk
    Render {
        mapping: PathBuf,
        #[command(flatten)]
        style: RenderStyle,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(1, format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotEmbedded(_) => 2,
            Error::NoConvergence(_) => 3,
            Error::LabelMismatch(..) => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn load_mapping(path: &Path) -> Result<GeodesicMapping, Failure> {
    io::parse_mapping(&read(path)?).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn trace_text(trace: &SolveTrace) -> String {
    let mut out = String::from("# sweep mu step\n");
    for (k, mu) in trace.residuals.iter().enumerate() {
        let step = if k == 0 { 0.0 } else { trace.steps[k - 1] };
        out.push_str(&format!("{k} {mu:.6e} {step:.6e}\n"));
    }
    out
}

fn cmd_mesh(genus: usize, refine: usize, out: &Path) -> Result<String, Failure> {
    let group = SurfaceGroup::regular(genus)?;
    let mut m = builtin_mesh(&group)?;
    for _ in 0..refine {
        m = subdivide(&m)?;
    }
    write(out, &io::write_mapping(&m))?;
    let c = m.complex();
    Ok(format!(
        "vertices {}\nedges {}\nfaces {}\neuler {}\n",
        c.vertex_count(),
        c.edges().len(),
        c.faces().len(),
        c.euler_char()
    ))
}

fn cmd_solve(
    mesh: &Path,
    weights: Option<&Path>,
    noise: f64,
    solver: &SolverArgs,
    trace_path: Option<&Path>,
    out: &Path,
) -> Result<String, Failure> {
    let cfg = solver.resolve()?;
    let mut m = load_mapping(mesh)?;
    let w = match weights {
        Some(path) => io::parse_weights(m.complex(), &read(path)?)
            .map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?,
        None => Weights::uniform(m.complex()),
    };
    if noise < 0.0 {
        return Err(Failure::new(1, format!("noise must be non-negative, got {noise}")));
    }
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        m = m.perturbed(&mut rng, noise);
    }
    match solve(&m, &w, &cfg) {
        Ok((sol, trace)) => {
            if let Some(path) = trace_path {
                write(path, &trace_text(&trace))?;
            }
            write(out, &io::write_mapping(&sol.normalize_gauge()))?;
            Ok(format!(
                "mu {:e}\nsweeps {}\nrejections {}\n",
                trace.final_residual(),
                trace.sweeps,
                trace.rejections
            ))
        }
        Err(Error::NoConvergence(trace)) => {
            let text = trace_text(&trace);
            match trace_path {
                Some(path) => write(path, &text)?,
                None => eprint!("{text}"),
            }
            Err(Error::NoConvergence(trace).into())
        }
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_morph(
    first: &Path,
    last: &Path,
    frames: usize,
    log_space: bool,
    cold: bool,
    solver: &SolverArgs,
    style: &RenderStyle,
    out_dir: &Path,
) -> Result<String, Failure> {
    let m0 = load_mapping(first)?.normalize_gauge();
    let m1 = load_mapping(last)?.normalize_gauge();
    let mut plan = MorphPlan::new(m0, m1, frames);
    plan.cfg = solver.resolve()?;
    plan.log_space = log_space;
    plan.cold = cold;
    let result = morph(&plan)?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;
    for (k, frame) in result.iter().enumerate() {
        let frame = frame.normalize_gauge();
        write(&out_dir.join(format!("frame_{k:03}.map")), &io::write_mapping(&frame))?;
        let picture = svg(&frame, style).map_err(|e| Failure::new(1, e))?;
        write(&out_dir.join(format!("frame_{k:03}.svg")), &picture)?;
    }
    Ok(format!("frames {}\n", result.len()))
}

/// Runs one command and returns what it prints on success.
pub fn execute(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Mesh { genus, refine, out } => cmd_mesh(*genus, *refine, out),
        Command::Solve {
            mesh,
            weights,
            noise,
            solver,
            trace,
            out,
            ..
        } => cmd_solve(mesh, weights.as_deref(), *noise, solver, trace.as_deref(), out),
        Command::Mvc { mapping, out } => {
            let m = load_mapping(mapping)?;
            let w = mvc(&m)?;
            write(out, &io::write_weights(m.complex(), &w))?;
            Ok(format!("condition {:e}\n", w.condition()))
        }
        Command::Verify { mapping, paranoid } => {
            let m = load_mapping(mapping)?;
            let report = if *paranoid {
                embedding_report_paranoid(&m)
            } else {
                embedding_report(&m)
            };
            if report.pass {
                Ok(report.to_string())
            } else {
                print!("{report}");
                Err(Failure::new(2, "verification failed"))
            }
        }
        Command::Morph {
            first,
            last,
            frames,
            log_space,
            cold,
            solver,
            style,
            out_dir,
        } => cmd_morph(first, last, *frames, *log_space, *cold, solver, style, out_dir),
        Command::Render { mapping, style, out } => {
            let m = load_mapping(mapping)?;
            write(out, &svg(&m, style).map_err(|e| Failure::new(1, e))?)?;
            Ok(String::new())
        }
    }
}
