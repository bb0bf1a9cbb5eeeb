//! Command-line front end: counting, distributions, beta sets, bias
//! LPs, non-signaling LPs with certificates, certificate verification,
//! error bounds, the fixed-distribution experiments, the four-node grid
//! scan, the quantum protocol simulator, and figure-data export.
//!
//! Exit codes: 0 success, 1 a check or verification failed, 2 usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nonsignal::bounds::{
    self, bias_lp_ring, bias_lp_segment, compose_exponential, error_lower_bound, gamma,
    n4_infeasibility_scan, witness_from_json, witness_to_json,
};
use nonsignal::frames::{Budget, Context};
use nonsignal::lp::{
    certificate_from_json, certificate_to_json, lp_from_json, lp_to_json, verify_certificate,
};
use nonsignal::lp_build::{build_lp, densify_primal, verify_nonsignaling, BuiltLp};
use nonsignal::rational::{format_rat, parse_rat, rat_to_f64, Rat};
use nonsignal::ring::{
    beta_ring_csv, beta_segment_csv, count_colorings, distinct_beta_ring, distinct_beta_segment,
    uniform_same_color_prob,
};
use nonsignal::solver::{by_name, LpSolver};

#[derive(Parser)]
#[command(name = "nonsignal", version, about = "non-signaling coloring toolkit")]
struct Cli {
    /// Worker threads for parallel scans and checks (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LpArgs {
    /// LP solving strategy: "exact" or "presolve"
    #[arg(long, default_value = "presolve")]
    solver: String,
    /// Maximum number of frames per constraint collection
    #[arg(long, default_value_t = 2)]
    max_frames: usize,
    /// Maximum total frame length per collection (default: node count)
    #[arg(long)]
    max_total_len: Option<usize>,
    /// Write the LP to this JSON file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the optimality certificate to this JSON file
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Print every marginal constraint in readable form
    #[arg(long)]
    dump_constraints: bool,
    /// Skip the exhaustive full-family non-signaling check
    #[arg(long)]
    skip_full_check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Count proper colorings of a segment of length l (equal/unequal endpoints) and the l-ring
    Count {
        #[arg(long)]
        l: u64,
    },
    /// Same-color probability at distance d under the uniform proper ring distribution
    UniformProb {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Distinct same-color statistics vectors, exported as CSV
    Beta {
        #[arg(long, conflicts_with = "segment")]
        ring: Option<usize>,
        #[arg(long)]
        segment: Option<usize>,
        #[arg(long)]
        proper_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal pairwise-bias LP; writes the witness as JSON
    BiasLp {
        #[arg(long, conflicts_with = "segment")]
        ring: Option<usize>,
        #[arg(long)]
        segment: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Improper-coloring penalty of a stored witness
    Gamma {
        #[arg(long)]
        witness: PathBuf,
    },
    /// Ring non-signaling LP: optimum with exact certificate
    RingLp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Solve over raw colorings instead of rotation classes
        #[arg(long)]
        no_class_reduction: bool,
        /// Quotient by color permutations as well (on by default; pass false to disable)
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        color_sym: bool,
        #[command(flatten)]
        lp: LpArgs,
    },
    /// Segment non-signaling LP: optimum with exact certificate
    SegmentLp {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        color_sym: bool,
        #[command(flatten)]
        lp: LpArgs,
    },
    /// Check a stored certificate against a stored LP
    Verify {
        #[arg(long)]
        lp: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Exponential composition bound q^floor(n/(k+r))
    Bound {
        #[arg(long)]
        q: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long)]
        n: usize,
    },
    /// The two fixed match experiments on the 11-ring
    Experiments11,
    /// Grid scan proving no perfect independent 4-ring coloring exists
    N4Scan {
        #[arg(long, default_value_t = 1000)]
        grid: u64,
    },
    /// Simulate a quantum one-way ring protocol
    Qsim {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        check_independence: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the output distribution as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Figure data: 4 = bias vs n, 5 = ring witness, 6 = segment witness grid
    Figures {
        #[arg(long)]
        which: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

fn show(x: &Rat) -> String {
    format!("{} (~{:.6})", format_rat(x), rat_to_f64(x))
}

fn write_out(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("error: thread pool already initialized");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Count { l } => {
            let (a, b) = count_colorings(l);
            println!("a_{l} = {a}");
            println!("b_{l} = {b}");
        }
        Command::UniformProb { n, d } => {
            let p = uniform_same_color_prob(n, d);
            println!("{}", show(&p));
        }
        Command::Beta {
            ring,
            segment,
            proper_only,
            out,
        } => {
            let csv = beta_csv_cached(ring, segment, proper_only)?;
            match out {
                Some(path) => write_out(&path, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::BiasLp { ring, segment, out } => {
            let mut witness = match (ring, segment) {
                (Some(n), None) => bias_lp_ring(n),
                (None, Some(k)) => bias_lp_segment(k),
                _ => anyhow::bail!("pass exactly one of --ring N or --segment K"),
            };
            println!("delta = {}", show(&witness.delta));
            if let Some(path) = out {
                witness.gamma = None;
                write_out(&path, &witness_to_json(&witness))?;
            }
        }
        Command::Gamma { witness } => {
            let w = witness_from_json(&std::fs::read_to_string(&witness)?)
                .map_err(anyhow::Error::msg)?;
            let g = gamma(&w);
            println!("gamma = {}", show(&g));
            let bound = error_lower_bound(&w.delta, &g);
            println!("epsilon_lower = {}", show(&bound.epsilon_lower));
            println!("success_upper = {}", show(&bound.success_upper));
        }
        Command::RingLp {
            n,
            r,
            no_class_reduction,
            color_sym,
            lp,
        } => {
            let built = build_lp(
                Context::Ring { n },
                r,
                !no_class_reduction,
                color_sym,
                budget(&lp, n),
            );
            return solve_and_report(built, &lp);
        }
        Command::SegmentLp { k, r, color_sym, lp } => {
            let built = build_lp(Context::Segment { k }, r, false, color_sym, budget(&lp, k));
            return solve_and_report(built, &lp);
        }
        Command::Verify { lp, cert } => {
            let lp = lp_from_json(&std::fs::read_to_string(&lp)?).map_err(anyhow::Error::msg)?;
            let cert = certificate_from_json(&std::fs::read_to_string(&cert)?)
                .map_err(anyhow::Error::msg)?;
            match verify_certificate(&lp, &cert) {
                Ok(()) => println!("certificate OK, objective = {}", show(&cert.objective)),
                Err(rej) => {
                    println!("certificate REJECTED: {rej}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Bound { q, k, r, n } => {
            let q = parse_rat(&q).map_err(|e| anyhow::anyhow!("bad rational for --q: {e:?}"))?;
            let value = compose_exponential(&q, k, r, n);
            println!(
                "({})^{} = {}",
                format_rat(&q),
                n / (k + r),
                show(&value)
            );
        }
        Command::Experiments11 => {
            let rep = bounds::experiments11();
            println!("min_bias = {}", show(&rep.min_bias));
            println!("colorings_scanned = {}", rep.colorings_scanned);
            println!("per_coloring_check = {}", rep.per_coloring_check);
            if !rep.per_coloring_check {
                return Ok(ExitCode::from(1));
            }
        }
        Command::N4Scan { grid } => {
            let rep = n4_infeasibility_scan(grid);
            println!("grid_points = {}", rep.grid_points);
            println!("all_negative = {}", rep.all_negative);
            println!("worst_q = {}", show(&rep.worst_q));
            println!(
                "worst_point = ({}/{g}, {}/{g}, {}/{g})",
                rep.worst_point.0,
                rep.worst_point.1,
                rep.worst_point.2,
                g = grid
            );
            if !rep.all_negative {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Qsim {
            spec,
            check_independence,
            tol,
            out,
        } => {
            let spec = nonsignal::qsim::protocol_from_json(&std::fs::read_to_string(&spec)?)
                .map_err(anyhow::Error::msg)?;
            let dist = nonsignal::qsim::run_protocol(&spec);
            println!("outcomes = {}", dist.probabilities.len());
            if let Some(path) = out {
                write_out(&path, &dist.to_csv())?;
            }
            let cyclic = nonsignal::qsim::check_cyclicity(&dist, tol);
            println!("cyclicity = {cyclic}");
            let mut failed = !cyclic;
            if check_independence {
                let rep = nonsignal::qsim::check_independence(&dist, spec.r, tol);
                println!(
                    "independence = {} (max deviation {:e})",
                    rep.passed, rep.max_deviation
                );
                failed |= !rep.passed;
            }
            if failed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Figures { which, out } => {
            std::fs::create_dir_all(&out)?;
            match which {
                4 => {
                    let mut rows = Vec::new();
                    for n in 11..=16 {
                        let w = bias_lp_ring(n);
                        let g = gamma(&w);
                        let bound = error_lower_bound(&w.delta, &g);
                        rows.push((n, w.delta, bound.epsilon_lower));
                    }
                    let mut csv = String::from("n,delta,delta_float,epsilon_lower,epsilon_lower_float\n");
                    for (n, d, e) in &rows {
                        csv.push_str(&format!(
                            "{n},{},{},{},{}\n",
                            format_rat(d),
                            rat_to_f64(d),
                            format_rat(e),
                            rat_to_f64(e)
                        ));
                    }
                    write_out(&out.join("bias-vs-n.csv"), &csv)?;
                }
                5 => {
                    let w = bias_lp_ring(11);
                    write_out(&out.join("witness-n11.csv"), &bounds::witness_csv(&w))?;
                }
                6 => {
                    let w = bias_lp_segment(15);
                    write_out(&out.join("witness-grid-k15.csv"), &bounds::witness_grid_csv(&w))?;
                }
                other => anyhow::bail!("unknown figure {other}; use 4, 5, or 6"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn budget(lp: &LpArgs, nodes: usize) -> Budget {
    Budget::capped(lp.max_frames, lp.max_total_len.unwrap_or(nodes))
}

fn solver_by_name(name: &str) -> anyhow::Result<Box<dyn LpSolver>> {
    by_name(name).ok_or_else(|| anyhow::anyhow!("unknown solver {name:?}; use exact or presolve"))
}

fn solve_and_report(built: BuiltLp, args: &LpArgs) -> anyhow::Result<ExitCode> {
    if args.dump_constraints {
        for line in nonsignal::lp_build::constraint_descriptions(&built) {
            println!("{line}");
        }
    }
    if let Some(path) = &args.out {
        write_out(path, &lp_to_json(&built.lp))?;
    }
    let solver = solver_by_name(&args.solver)?;
    let cert = match solver.solve(&built.lp) {
        nonsignal::solver::SolveOutcome::Optimal(cert) => cert,
        other => anyhow::bail!("LP did not solve to optimality: {other:?}"),
    };
    println!("{}", show(&cert.objective));
    if let Some(path) = &args.cert {
        write_out(path, &certificate_to_json(&cert))?;
    }
    if !args.skip_full_check {
        let primal = densify_primal(&built, &cert);
        match verify_nonsignaling(
            built.context,
            built.gap,
            built.rotation_quotient,
            &built.classes.class_of,
            &primal,
        ) {
            Ok(()) => println!("full non-signaling family check: OK"),
            Err(v) => {
                println!(
                    "full non-signaling family check: VIOLATED at frames {:?} placement {:?}; raise --max-frames/--max-total-len",
                    v.frames, v.omega
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Distinct beta sets are pure functions of (context, size, properness);
/// NONSIGNAL_CACHE_DIR short-circuits recomputation.
fn beta_csv_cached(
    ring: Option<usize>,
    segment: Option<usize>,
    proper_only: bool,
) -> anyhow::Result<String> {
    let (label, size) = match (ring, segment) {
        (Some(n), None) => ("ring", n),
        (None, Some(k)) => ("segment", k),
        _ => anyhow::bail!("pass exactly one of --ring N or --segment K"),
    };
    let cache = std::env::var_os("NONSIGNAL_CACHE_DIR").map(|dir| {
        PathBuf::from(dir).join(format!(
            "beta-{label}-{size}-{}.csv",
            if proper_only { "proper" } else { "all" }
        ))
    });
    if let Some(path) = &cache {
        if let Ok(text) = std::fs::read_to_string(path) {
            return Ok(text);
        }
    }
    let csv = match (ring, segment) {
        (Some(n), None) => beta_ring_csv(&distinct_beta_ring(n, proper_only), n),
        (None, Some(k)) => beta_segment_csv(&distinct_beta_segment(k, proper_only), k),
        _ => unreachable!(),
    };
    if let Some(path) = &cache {
        if let Some(parent) = path.parent() {
            let _ = std::fs::create_dir_all(parent);
        }
        let _ = std::fs::write(path, &csv);
    }
    Ok(csv)
}
