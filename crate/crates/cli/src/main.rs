mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sobolev_dr::complex::{cone, regular_simplex, simplex_boundary};
use sobolev_dr::contract::{assemble, cohomology_dims, contract, verify_contraction, ContractOutcome, MatrixComplex};
use sobolev_dr::derham::{derham_map, verify_split, verify_stokes, whitney, whitney_normalized, Pairing};
use sobolev_dr::io;
use sobolev_dr::mollify::{regularize, verify_homotopy, GridForm, MollifierConfig};
use sobolev_dr::nontrivial::{verify_nontriviality, NontrivialityReport};
use sobolev_dr::polyform::PolyForm;
use sobolev_dr::{Error, MetricComplex, PiSequence};

use report::RunReport;

#[derive(Parser)]
#[command(name = "sobolev-dr", version, about = "L_pi exterior calculus on simplicial complexes")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Oriented,
    Metric,
}

impl From<PairingArg> for Pairing {
    fn from(p: PairingArg) -> Self {
        match p {
            PairingArg::Oriented => Pairing::Oriented,
            PairingArg::Metric => Pairing::Metric,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check connectivity, the degree bound N and edge lengths in [1/L, L].
    Validate {
        complex: PathBuf,
        #[arg(long = "L", default_value_t = 1.0)]
        scale: f64,
        #[arg(long = "N", default_value_t = 6)]
        max_degree: usize,
    },
    /// Barycentric subdivision; writes the complex to --out or stdout.
    Subdivide {
        complex: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// L_p or L_pi norm of a cochain or a polynomial form.
    Norm {
        complex: PathBuf,
        #[arg(long, conflicts_with = "form", required_unless_present = "form")]
        cochain: Option<PathBuf>,
        #[arg(long)]
        form: Option<PathBuf>,
        #[arg(long, required_unless_present = "pi")]
        p: Option<f64>,
        /// Comma-separated exponents p_0,...,p_n.
        #[arg(long, value_delimiter = ',', conflicts_with = "p")]
        pi: Option<Vec<f64>>,
    },
    /// Integrate a polynomial form over the simplices of its degree.
    Derham {
        complex: PathBuf,
        #[arg(long)]
        form: PathBuf,
        #[arg(long, value_enum, default_value_t = PairingArg::Oriented)]
        pairing: PairingArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Whitney form of a cochain.
    Whitney {
        complex: PathBuf,
        #[arg(long)]
        cochain: PathBuf,
        /// Divide by the self-pairing so that integration recovers the cochain.
        #[arg(long)]
        normalized: bool,
        #[arg(long, value_enum, default_value_t = PairingArg::Oriented)]
        pairing: PairingArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Dimensions of simplicial cohomology.
    Cohomology {
        complex: PathBuf,
        #[arg(long)]
        augment: bool,
    },
    /// Contracting homotopy of the cochain complex.
    Contract {
        complex: PathBuf,
        #[arg(long)]
        augment: bool,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the coboundary matrices here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

#[derive(Subcommand)]
enum Suite {
    /// Integration of normalized Whitney forms returns the cochain.
    Split {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Defaults to the subdivided regular 3-simplex.
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PairingArg::Oriented)]
        pairing: PairingArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Integration commutes with d on random polynomial forms.
    Stokes {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        poly_degree: u32,
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// dA + Ad = R - 1 on a polynomial test form over the unit ball.
    Mollify {
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Grid cells per unit length, h = 1/grid.
        #[arg(long, default_value_t = 256)]
        grid: u32,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Form degree.
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Contractions on cones and simplices, obstructions on spheres.
    Contract {
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// The bump-family counterexample for an increasing exponent pair.
    Nontrivial {
        #[arg(long, default_value_t = 2.0)]
        pk: f64,
        #[arg(long, default_value_t = 4.0)]
        pk1: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Largest truncation; 10^2, 10^4, ... up to it are run.
        #[arg(long, default_value = "1e4")]
        trunc: String,
        /// Write the partial sums here instead of after the report.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Failure modes that map to exit code 2.
enum Failure {
    Io(PathBuf, std::io::Error),
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "{m}"),
        }
    }
}

type Outcome = Result<(RunReport, Option<String>), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_complex(path: &Path) -> Result<MetricComplex, Failure> {
    Ok(io::read_complex(&read(path)?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok((report, extra)) => {
            print!("{report}");
            if let Some(text) = extra {
                println!();
                print!("{text}");
            }
            eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { complex, scale, max_degree } => cmd_validate(complex, *scale, *max_degree),
        Command::Subdivide { complex, out } => cmd_subdivide(complex, out.as_deref()),
        Command::Norm { complex, cochain, form, p, pi } => cmd_norm(complex, cochain.as_deref(), form.as_deref(), *p, pi.as_deref()),
        Command::Derham { complex, form, pairing, out } => cmd_derham(complex, form, (*pairing).into(), out.as_deref()),
        Command::Whitney { complex, cochain, normalized, pairing, out } => {
            cmd_whitney(complex, cochain, *normalized, (*pairing).into(), out.as_deref())
        }
        Command::Cohomology { complex, augment } => cmd_cohomology(complex, *augment),
        Command::Contract { complex, augment, tol, dump } => cmd_contract(complex, *augment, *tol, dump.as_deref()),
        Command::Verify { suite } => cmd_verify(suite, cli.seed),
    }
}

fn cmd_validate(path: &Path, scale: f64, max_degree: usize) -> Outcome {
    let k = load_complex(path)?;
    let g = k.validate_bounded_geometry(scale, max_degree);
    let mut r = RunReport::new("validate");
    r.input("complex", path.display()).input("L", scale).input("N", max_degree);
    r.result("dim", k.dim())
        .result("simplices", k.total_count())
        .result("max_vertex_degree", g.max_vertex_degree)
        .result("min_edge_length", g.min_edge_length)
        .result("max_edge_length", g.max_edge_length);
    for (s, why) in &g.violations {
        r.result("violation", format!("{s} {why}"));
    }
    r.pass = g.passes;
    Ok((r, None))
}

fn cmd_subdivide(path: &Path, out: Option<&Path>) -> Outcome {
    let k = load_complex(path)?;
    let sub = k.barycentric_subdivide();
    let mut r = RunReport::new("subdivide");
    r.input("complex", path.display());
    r.result("top_simplices", sub.maximal_simplices().len()).result("simplices", sub.total_count());
    let text = io::write_complex(&sub);
    match out {
        Some(p) => {
            write(p, &text)?;
            r.result("written", p.display());
            Ok((r, None))
        }
        None => Ok((r, Some(text))),
    }
}

fn cmd_norm(path: &Path, cochain: Option<&Path>, form: Option<&Path>, p: Option<f64>, pi: Option<&[f64]>) -> Outcome {
    let k = load_complex(path)?;
    let mut r = RunReport::new("norm");
    r.input("complex", path.display());
    let pi = pi.map(|e| PiSequence::new(e.to_vec(), k.dim())).transpose()?;
    if let Some(c) = cochain {
        r.input("cochain", c.display());
        let c = io::read_cochain(&read(c)?, &k)?;
        match (&pi, p) {
            (Some(pi), _) => r.result("pi_norm", c.pi_norm(pi)?),
            (None, Some(p)) => r.result("lp_norm", c.lp_norm(p)?),
            _ => return Err(Failure::Usage("give --p or --pi".into())),
        };
    } else if let Some(f) = form {
        r.input("form", f.display());
        let w = io::read_polyform(&read(f)?, &k)?;
        match (&pi, p) {
            (Some(pi), _) => {
                let rep = w.norm_report(&k, pi)?;
                r.result("lp_norm", rep.lp).result("sl_pi_norm", rep.sl_pi).result("omega_pi_norm", rep.omega_pi)
            }
            (None, Some(p)) => r.result("lp_norm", w.lp_norm(&k, p)?),
            _ => return Err(Failure::Usage("give --p or --pi".into())),
        };
    } else {
        return Err(Failure::Usage("give --cochain or --form".into()));
    }
    if let Some(p) = p {
        r.input("p", p);
    }
    if let Some(pi) = &pi {
        r.input("pi", pi.exponents().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    }
    Ok((r, None))
}

fn pairing_name(p: Pairing) -> &'static str {
    match p {
        Pairing::Oriented => "oriented",
        Pairing::Metric => "metric",
    }
}

fn emit(r: &mut RunReport, text: String, out: Option<&Path>) -> Result<Option<String>, Failure> {
    match out {
        Some(p) => {
            write(p, &text)?;
            r.result("written", p.display());
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn cmd_derham(path: &Path, form: &Path, pairing: Pairing, out: Option<&Path>) -> Outcome {
    let k = load_complex(path)?;
    let w = io::read_polyform(&read(form)?, &k)?;
    let c = derham_map(&w, &k, w.degree(), pairing)?;
    let mut r = RunReport::new("derham");
    r.input("complex", path.display()).input("form", form.display()).input("pairing", pairing_name(pairing));
    r.result("degree", c.degree()).result("nonzero_entries", c.support_len());
    let extra = emit(&mut r, io::write_cochain(&c), out)?;
    Ok((r, extra))
}

fn cmd_whitney(path: &Path, cochain: &Path, normalized: bool, pairing: Pairing, out: Option<&Path>) -> Outcome {
    let k = load_complex(path)?;
    let c = io::read_cochain(&read(cochain)?, &k)?;
    let w = if normalized { whitney_normalized(&c, pairing) } else { whitney(&c) };
    let mut r = RunReport::new("whitney");
    r.input("complex", path.display()).input("cochain", cochain.display()).input("normalized", normalized);
    if normalized {
        r.input("pairing", pairing_name(pairing));
    }
    r.result("degree", w.degree()).result("pieces", w.pieces().count());
    let extra = emit(&mut r, io::write_polyform(&w), out)?;
    Ok((r, extra))
}

fn join_dims(d: &[usize]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn matrix_complex(path: &Path, augment: bool) -> Result<MatrixComplex, Failure> {
    let m = assemble(&load_complex(path)?)?;
    Ok(if augment { m.augment() } else { m })
}

fn cmd_cohomology(path: &Path, augment: bool) -> Outcome {
    let m = matrix_complex(path, augment)?;
    let mut r = RunReport::new("cohomology");
    r.input("complex", path.display()).input("augment", augment);
    r.result("dims", join_dims(m.dims())).result("cohomology", join_dims(&cohomology_dims(&m)));
    Ok((r, None))
}

fn contraction_results(r: &mut RunReport, m: &MatrixComplex, tol: f64, prefix: &str) -> Result<bool, Failure> {
    match contract(m) {
        ContractOutcome::Contracted { contraction, steps } => {
            let closure = steps.iter().map(|s| s.alpha_closure).fold(0.0, f64::max);
            let rep = verify_contraction(m, &contraction, tol)?;
            r.result(&format!("{prefix}contracted"), true)
                .result(&format!("{prefix}lowest_degree"), contraction.lowest())
                .check(&format!("{prefix}alpha_closure"), format!("{closure:e}"), closure <= tol)
                .result(&format!("{prefix}identity_residual"), format!("{:e}", rep.max_residual));
            Ok(rep.passes && closure <= tol)
        }
        ContractOutcome::Failed(f) => {
            r.result(&format!("{prefix}contracted"), false)
                .result(&format!("{prefix}failed_degree"), f.degree)
                .result(&format!("{prefix}residual"), format!("{:e}", f.residual))
                .result(&format!("{prefix}obstructed"), join_dims(&f.obstructed));
            Ok(false)
        }
    }
}

fn cmd_contract(path: &Path, augment: bool, tol: f64, dump: Option<&Path>) -> Outcome {
    let m = matrix_complex(path, augment)?;
    let mut r = RunReport::new("contract");
    r.input("complex", path.display()).input("augment", augment).input("tol", tol);
    if let Some(p) = dump {
        write(p, &io::write_matrix_complex(&m))?;
        r.result("dump", p.display());
    }
    r.pass = contraction_results(&mut r, &m, tol, "")?;
    Ok((r, None))
}

fn cmd_verify(suite: &Suite, seed: u64) -> Outcome {
    match suite {
        Suite::Split { k, samples, complex, pairing, tol } => {
            let host = suite_complex(complex.as_deref())?;
            let pairing: Pairing = (*pairing).into();
            let rep = verify_split(&host, *k, *samples, pairing, seed)?;
            let mut r = RunReport::new("verify split");
            r.input("k", k).input("samples", samples).input("seed", seed).input("pairing", pairing_name(pairing));
            r.result("simplices", host.total_count()).result("sample_count", rep.sample_count);
            r.check("max_identity_error", format!("{:e}", rep.max_identity_error), rep.max_identity_error <= *tol);
            r.result("derham_ratio", rep.derham_ratio).result("whitney_ratio", rep.whitney_ratio);
            r.pass &= rep.sample_count == *samples;
            Ok((r, None))
        }
        Suite::Stokes { k, samples, poly_degree, complex, tol } => {
            let host = suite_complex(complex.as_deref())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..*samples {
                let w = PolyForm::random(&host, *k, *poly_degree, false, &mut rng)?;
                worst = worst.max(verify_stokes(&w, &host)?.max_stokes_error);
            }
            let mut r = RunReport::new("verify stokes");
            r.input("k", k).input("samples", samples).input("poly_degree", poly_degree).input("seed", seed);
            r.check("max_stokes_error", format!("{worst:e}"), worst <= *tol);
            Ok((r, None))
        }
        Suite::Mollify { n, grid, eps, tol, k } => verify_mollify(*n, *grid, *eps, *tol, *k),
        Suite::Contract { tol } => verify_contract_suite(*tol),
        Suite::Nontrivial { pk, pk1, eps, trunc, csv } => verify_nontrivial(*pk, *pk1, *eps, trunc, csv.as_deref()),
    }
}

fn suite_complex(path: Option<&Path>) -> Result<MetricComplex, Failure> {
    match path {
        Some(p) => load_complex(p),
        None => Ok(regular_simplex(3).barycentric_subdivide()),
    }
}

/// Polynomial test forms on the unit ball, by dimension and degree.
fn test_form(n: usize, k: usize) -> Option<(&'static str, fn(&[f64]) -> Vec<f64>)> {
    Some(match (n, k) {
        (1, 0) => ("x^3 - x", |x| vec![x[0].powi(3) - x[0]]),
        (1, 1) => ("(x^2 + 1) dx", |x| vec![x[0] * x[0] + 1.0]),
        (2, 0) => ("x^2 y", |x| vec![x[0] * x[0] * x[1]]),
        (2, 1) => ("x y dx + x^2 dy", |x| vec![x[0] * x[1], x[0] * x[0]]),
        (2, 2) => ("(1 + x^2) dx dy", |x| vec![1.0 + x[0] * x[0]]),
        _ => return None,
    })
}

fn verify_mollify(n: usize, grid: u32, eps: f64, tol: f64, k: usize) -> Outcome {
    let (name, f) = test_form(n, k).ok_or_else(|| Failure::Usage(format!("no test form for n = {n}, k = {k}")))?;
    let h = 1.0 / f64::from(grid);
    let cfg = MollifierConfig::new(eps)?;
    let w = GridForm::sample(n, h, k, f)?;
    let rep = verify_homotopy(&w, &cfg, tol)?;
    let one = GridForm::sample(n, h, 0, |_| vec![1.0])?;
    let r_one = regularize(&one, &cfg).sub(&one)?.max_abs();
    let mut r = RunReport::new("verify mollify");
    r.input("n", n).input("h", h).input("eps", eps).input("tol", tol).input("form", name);
    r.check("residual", format!("{:e}", rep.residual), rep.passes)
        .result("collar", rep.collar)
        .result("nodes_checked", rep.nodes_checked)
        .check("constant_defect", format!("{r_one:e}"), r_one <= 1e-12);
    Ok((r, None))
}

fn verify_contract_suite(tol: f64) -> Outcome {
    let mut r = RunReport::new("verify contract");
    r.input("tol", tol);
    for d in 1..=3 {
        let m = assemble(&regular_simplex(d))?.augment();
        let ok = contraction_results(&mut r, &m, tol, &format!("simplex{d}."))?;
        r.check(&format!("simplex{d}.pass"), ok, ok);
    }
    for d in [2, 3] {
        let sphere = simplex_boundary(d);
        let m = assemble(&cone(&sphere))?.augment();
        let ok = contraction_results(&mut r, &m, tol, &format!("cone{d}."))?;
        r.check(&format!("cone{d}.pass"), ok, ok);
        let m = assemble(&sphere)?;
        let dims = cohomology_dims(&m);
        let expected: Vec<usize> = (0..dims.len()).filter(|&i| dims[i] > 0).collect();
        r.result(&format!("sphere{d}.cohomology"), join_dims(&dims));
        let obstructed = match contract(&m) {
            ContractOutcome::Failed(f) => f.obstructed,
            ContractOutcome::Contracted { .. } => Vec::new(),
        };
        r.check(&format!("sphere{d}.obstructed"), join_dims(&obstructed), obstructed == expected);
    }
    Ok((r, None))
}

fn verify_nontrivial(pk: f64, pk1: f64, eps: f64, trunc: &str, csv_path: Option<&Path>) -> Outcome {
    let top: f64 = trunc.parse().map_err(|_| Failure::Usage(format!("cannot parse truncation {trunc:?}")))?;
    if !(top >= 1.0 && top <= 1e8 && top.fract() == 0.0) {
        return Err(Failure::Usage(format!("truncation {trunc} must be an integer in [1, 1e8]")));
    }
    let top = top as usize;
    let mut ms: Vec<usize> = std::iter::successors(Some(100usize), |m| Some(m * 100)).take_while(|m| *m < top).collect();
    ms.push(top);
    let pi = PiSequence::new(vec![pk, pk1], 1)?;
    let rep = verify_nontriviality(&pi, eps, &ms)?;
    let mut r = RunReport::new("verify nontrivial");
    r.input("pk", pk).input("pk1", pk1).input("eps", eps).input("truncations", join_dims(&ms));
    for t in &rep.truncations {
        let pre = format!("m{}.", t.m);
        r.check(&format!("{pre}kernel_max"), format!("{:e}", t.kernel.max_form.max(t.kernel.max_dform)), t.kernel_ok)
            .check(&format!("{pre}upper_tail_bound"), format!("{:e}", t.form_upper.tail_bound.unwrap_or(f64::NAN)), t.cauchy_ok)
            .check(
                &format!("{pre}lower_partial_sum"),
                t.dform_lower.partial_sums.last().map_or(0.0, |p| p.sum),
                t.divergence_ok,
            )
            .check(&format!("{pre}image_gap"), format!("{:e}", t.image_deviation), t.gap_ok);
    }
    r.check("swapped_all_converge", rep.control.all_converge, rep.control.all_converge);
    r.pass &= rep.passes;
    let csv = partial_sums_csv(&rep).map_err(|e| Failure::Usage(e.to_string()))?;
    match csv_path {
        Some(p) => {
            write(p, &csv)?;
            r.result("csv", p.display());
            Ok((r, None))
        }
        None => Ok((r, Some(csv))),
    }
}

/// `m, S_m^{p_k}, S_m^{p_{k+1}}, tail_bound` for the largest truncation.
fn partial_sums_csv(rep: &NontrivialityReport) -> Result<String, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "S_pk", "S_pk1", "tail_bound"])?;
    if let Some(t) = rep.truncations.last() {
        for (lo, hi) in t.dform_lower.partial_sums.iter().zip(&t.form_upper.partial_sums) {
            let tail = hi.tail_bound.map_or(String::new(), |x| x.to_string());
            w.write_record([lo.m.to_string(), lo.sum.to_string(), hi.sum.to_string(), tail])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
