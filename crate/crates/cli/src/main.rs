//! `l1fill`: command-line front end.
//!
//! Exit codes: 0 success, 1 validation failed, 2 malformed input,
//! 3 mathematical failure, 4 I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use l1fill::chains::{AffineChain, Chain, ChainJson};
use l1fill::fillnorm;
use l1fill::hypvolume::{self, FillingSpec, VnTable};
use l1fill::lattice::{self, LatticeBasis, LatticeJson};
use l1fill::pipeline::{self, PipelineConfig, PipelineConfigJson};
use l1fill::rational;
use l1fill::torus::{self, CellComplex};

#[derive(Parser)]
#[command(name = "l1fill", version, about = "Exact l1 fillings on flat tori and simplicial-volume bookkeeping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write JSON here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// LLL-reduce a lattice basis.
    Reduce {
        #[arg(long)]
        input: PathBuf,
    },
    /// Triangulate the flat torus of a lattice.
    Triangulate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Certified Lebesgue bound of the star cover; without an input,
    /// estimate the fatness constant of dimension `--dim` by sampling.
    Fatness {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fill a null-homologous straight cycle: input `{"basis": ..., "cycle": ...}`.
    Fill {
        #[arg(long)]
        input: PathBuf,
    },
    /// The affine filling constant C_2(d, s).
    C2 {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        s: usize,
        /// Evaluate on this lattice instead of the standard one.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Regular ideal simplex volume v_n; with `--vol`, the bound report.
    Vn {
        n: usize,
        #[arg(long)]
        vn_table: Option<PathBuf>,
        /// Hyperbolic volume of the cusped manifold.
        #[arg(long)]
        vol: Option<f64>,
        /// Filling subtori: `[{"name": ..., "subtorus": <lattice>}]`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the filling pipeline on a configuration.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Check the pseudomanifold conditions: `{"tops": [[...]], "singular": [[...]]}`.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
}

enum Failure {
    Input(String),
    Math(String),
    Io(String),
}

impl From<l1fill::Error> for Failure {
    fn from(e: l1fill::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Math(e.to_string())
        }
    }
}

type Outcome = Result<(Value, String, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_lattice(path: &Path) -> Result<LatticeBasis, Failure> {
    Ok(LatticeBasis::from_json(&read_json::<LatticeJson>(path)?)?)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn fmt(r: &l1fill::Rational) -> String {
    rational::format(r)
}

fn reduce(input: &Path) -> Outcome {
    let b = read_lattice(input)?;
    let (r, u) = lattice::lll_reduce_with_transform(&b)?;
    let sines = lattice::babai_angles(&r);
    let text = format!("reduced basis of rank {}; min sin(angle) = {:.6}", r.rank(), sines.iter().cloned().fold(1.0, f64::min));
    let u: Vec<Vec<String>> = u.iter().map(|row| row.iter().map(ToString::to_string).collect()).collect();
    Ok((json!({"basis": to_value(&r.to_json()), "transform": u, "sin_angles": sines}), text, true))
}

fn triangulate(input: &Path) -> Outcome {
    let t = torus::triangulate(&read_lattice(input)?)?;
    let counts: Vec<usize> = (0..=t.dim()).map(|k| t.cell_count(k)).collect();
    Ok((to_value(&t.to_json()), format!("{}-torus, cells per dimension {counts:?}, {} top simplices", t.dim(), t.top_count()), true))
}

fn fatness(input: Option<&Path>, grid: Option<usize>, dim: Option<usize>, samples: usize, seed: u64) -> Outcome {
    match (input, dim) {
        (Some(p), _) => {
            let b = read_lattice(p)?;
            if b.rank() > 3 {
                return Err(l1fill::Error::DimensionTooLarge(b.rank(), 3).into());
            }
            let t = torus::triangulate(&b)?;
            let g = grid.unwrap_or_else(|| torus::default_grid(t.dim()));
            let s = torus::star_cover(&t, g);
            let v = json!({
                "lebesgue_lb": fmt(&s.lebesgue_lb),
                "lebesgue_lb_float": rational::to_f64(&s.lebesgue_lb),
                "lipschitz_sq": fmt(&s.lipschitz_sq),
                "grid": s.grid,
                "grid_min_margin": fmt(&s.grid_min_margin),
                "star_regions": s.regions.len(),
            });
            Ok((v, format!("certified Lebesgue number >= {:.6}", rational::to_f64(&s.lebesgue_lb)), true))
        }
        (None, Some(d)) => {
            let k = torus::estimate_kd(d, samples, seed)?;
            Ok((json!({"dim": d, "samples": samples, "seed": seed, "kd_estimate": k}), format!("K_{d} estimate {k:.6}"), true))
        }
        (None, None) => Err(Failure::Input("fatness needs --input or --dim".into())),
    }
}

#[derive(Deserialize)]
struct FillInput {
    basis: LatticeJson,
    cycle: ChainJson,
}

fn fill(input: &Path) -> Outcome {
    let j: FillInput = read_json(input)?;
    let b = LatticeBasis::from_json(&j.basis)?;
    let z: AffineChain = Chain::from_json(&j.cycle)?;
    let cert = fillnorm::fill_cycle(&z, &b, z.dim())?;
    cert.recheck()?;
    let text = format!(
        "filling norm {} <= {} x {} (cover degree {}); boundary rechecked",
        cert.norm,
        cert.constant_used,
        l1fill::torus::canonical_chain(&cert.basis, &z).l1_norm(),
        cert.cover_degree
    );
    Ok((to_value(&cert.to_json()), text, true))
}

fn c2(dim: usize, s: usize, input: Option<&Path>) -> Outcome {
    let b = match input {
        Some(p) => read_lattice(p)?,
        None => LatticeBasis::standard(dim),
    };
    if b.rank() != dim {
        return Err(Failure::Input(format!("lattice has rank {}, expected {dim}", b.rank())));
    }
    let v = fillnorm::c2_constant(&torus::triangulate(&b)?, s)?;
    let text = format!("C_2({dim},{s}) {} {} ({})", if v.exact { "=" } else { "<=" }, v.value, v.method);
    let k = fillnorm::c1_constant(s) + &v.value;
    Ok((json!({"dim": dim, "s": s, "c2": to_value(&v), "c1": fmt(&fillnorm::c1_constant(s)), "k": fmt(&k)}), text, true))
}

fn vn(n: usize, table: Option<&Path>, vol: Option<f64>, input: Option<&Path>) -> Outcome {
    let table = table.map(|p| read(p).and_then(|t| Ok(VnTable::parse(&t)?))).transpose()?;
    match vol {
        None => {
            let v = hypvolume::regular_ideal_volume(n, table.as_ref())?;
            let text = format!("v_{n} = {:.10} ({})", v.value, v.provenance);
            Ok((to_value(&v), text, true))
        }
        Some(vol) => {
            let fillings: Vec<FillingSpec> = input.map(read_json).transpose()?.unwrap_or_default();
            let r = hypvolume::bound_report(n, vol, &fillings, table.as_ref())?;
            Ok((to_value(&r), r.to_text(), true))
        }
    }
}

fn run_pipeline(input: &Path, epsilon: Option<&str>) -> Outcome {
    let j: PipelineConfigJson = read_json(input)?;
    let mut cfg = PipelineConfig::from_json(&j)?;
    if let Some(e) = epsilon {
        cfg.epsilon = rational::parse(e)?;
    }
    let out = pipeline::run_pipeline(&cfg)?;
    let tr = &out.trace;
    let mut text = String::new();
    for s in &tr.stages {
        let torus = s.torus.map_or(String::new(), |t| format!("[{t}]"));
        text.push_str(&format!("{:<20}{:<5}{:>14}  {}\n", s.stage, torus, s.norm.to_string(), s.citation));
    }
    text.push_str(&format!("output norm {} <= {} = {} + (2 + {} * {}) * {}", tr.output_norm, tr.bound, tr.input_norm, tr.k_constant, tr.t, tr.epsilon));
    Ok((to_value(&out.to_json()), text, true))
}

#[derive(Deserialize)]
struct ValidateInput {
    tops: Vec<Vec<usize>>,
    #[serde(default)]
    singular: Vec<Vec<usize>>,
}

fn validate(input: &Path) -> Outcome {
    let j: ValidateInput = read_json(input)?;
    let c = CellComplex::from_simplices(&j.tops, &j.singular)?;
    let r = torus::validate_pseudomanifold(&c);
    let text = format!("{}-pseudomanifold check {}", r.dim, if r.passed { "passed" } else { "FAILED" });
    Ok((to_value(&r), text, r.passed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("L1FILL_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Reduce { input } => reduce(input),
        Command::Triangulate { input } => triangulate(input),
        Command::Fatness { input, grid, dim, samples, seed } => fatness(input.as_deref(), *grid, *dim, *samples, *seed),
        Command::Fill { input } => fill(input),
        Command::C2 { dim, s, input } => c2(*dim, *s, input.as_deref()),
        Command::Vn { n, vn_table, vol, input } => vn(*n, vn_table.as_deref(), *vol, input.as_deref()),
        Command::Pipeline { input, epsilon } => run_pipeline(input, epsilon.as_deref()),
        Command::Validate { input } => validate(input),
    };
    match outcome {
        Ok((value, text, ok)) => {
            let body = serde_json::to_string_pretty(&value).expect("json") + "\n";
            let written = match &cli.output {
                Some(p) => fs::write(p, body).map_err(|e| format!("{}: {e}", p.display())),
                None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(4);
            }
            eprintln!("{text}");
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: malformed input: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Math(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}
