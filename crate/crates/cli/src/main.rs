use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use widths_core::besov_embedding::{classify, Case3Term, Part};
use widths_core::cli_report::{fmt_g12, load_param_file, parse_n_grid, run_sweep, SweepSpec};
use widths_core::discretization_cover::{build_cover, rank_budget_ratio, verify_cover, CoverConfig, JStar};
use widths_core::scalar::Scalar;
use widths_core::width_formulas::{linear_width_upper, phi, phi0, psi};
use widths_core::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_TIE: u8 = 3;
const EXIT_CERT: u8 = 4;
const EXIT_COVER: u8 = 5;

#[derive(Parser)]
#[command(name = "widths-lab", version, about = "Widths of mixed-norm balls and weighted Besov embeddings")]
struct Cli {
    /// Worker threads for parallel stages (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Phi,
    Psi,
    Phi0,
    LinearUpper,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a closed-form width order.
    Formula {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
    },
    /// Classify the width asymptotics of a parameter file.
    Classify {
        file: PathBuf,
        /// Overrides the file's `part` (default 1).
        #[arg(long)]
        part: Option<Part>,
    },
    /// Kolmogorov width estimates over an n-grid, compared with the two-sided order.
    Sweep {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        /// `a..b`, `a..b:step` or a comma list.
        #[arg(long)]
        n_grid: String,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Outer iterations per restart.
        #[arg(long, default_value_t = 120)]
        outer: usize,
        /// CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the dyadic covering at level N and verify it.
    Cover {
        #[arg(long = "N")]
        n_level: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// `0` or `top`.
        #[arg(long, default_value = "0")]
        jstar: JStar,
        #[arg(long, default_value_t = 0)]
        s: u8,
        /// Random deep levels checked beyond the exhaustive range.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Atlas dump destination (skipped when absent).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn default_seed() -> u64 {
    std::env::var("WIDTHS_LAB_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::NoStrictMinimizer(_) => EXIT_TIE,
        Error::NonConvergence { .. } => EXIT_CERT,
        _ => EXIT_INPUT,
    }
}

fn fail(err: Error) -> ExitCode {
    match &err {
        Error::NoStrictMinimizer(ix) => {
            let ix: Vec<String> = ix.iter().map(usize::to_string).collect();
            println!("tie: {{{}}}", ix.join(","));
        }
        Error::Case3Degenerate => println!("Case3Degenerate"),
        _ => {}
    }
    eprintln!("error: {err}");
    ExitCode::from(exit_for(&err))
}

fn io_fail(what: &str, e: std::io::Error) -> ExitCode {
    eprintln!("error: {what}: {e}");
    ExitCode::from(EXIT_INPUT)
}

fn cmd_formula(kind: Kind, m: u64, k: u64, n: u64, p1: f64, p2: f64, q1: f64, q2: f64) -> Result<String, Error> {
    Ok(match kind {
        Kind::Phi => format!("{} PHI", fmt_g12(phi(n, m * k, p1, p2)?)),
        Kind::Psi => format!("{} PSI", fmt_g12(psi(n, m * k, p1, p2)?)),
        Kind::Phi0 => {
            let r = phi0(m, k, n, p1, p2, q1, q2)?;
            let extra = if r.extrapolated { " EXTRAPOLATED" } else { "" };
            format!("{} {}{extra}", fmt_g12(r.value), r.tag)
        }
        Kind::LinearUpper => format!("{} LINEAR_UPPER", fmt_g12(linear_width_upper(m, k, n, p1, q1, p2, q2)?)),
    })
}

fn cmd_classify(file: &PathBuf, part: Option<Part>) -> Result<String, Error> {
    let pf = load_param_file(file)?;
    let part = part.or(pf.part).unwrap_or(Part::One);
    let a = classify(&pf.params, part)?;
    let mut out = String::new();
    out.push_str(&format!("kind={}\n", a.kind));
    for (j, th, si) in &a.candidates {
        out.push_str(&format!("candidate j={j} theta={} sigma={}\n", g(th), g(si)));
    }
    if let Some(c) = &a.case3 {
        let dom = match c.dominant {
            Case3Term::Power => "power",
            Case3Term::Rho => "rho",
        };
        out.push_str(&format!(
            "case3 power_exponent={} rho_exponent={} dominant={dom}\n",
            g(&c.power_exponent),
            g(&c.rho_exponent)
        ));
    }
    out.push_str(&format!("order n^(-{})*rho(n^{})\n", g(&a.theta), g(&a.sigma)));
    match a.j_star {
        Some(j) => out.push_str(&format!("j*={j} theta={} sigma={}", g(&a.theta), g(&a.sigma))),
        None => out.push_str(&format!("j*=none theta={} sigma={}", g(&a.theta), g(&a.sigma))),
    }
    Ok(out)
}

fn g<T: Scalar>(x: &T) -> String {
    fmt_g12(x.to_f64())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("warning: worker pool already initialised: {e}");
        }
    }
    match cli.cmd {
        Cmd::Formula { kind, m, k, n, p1, p2, q1, q2 } => match cmd_formula(kind, m, k, n, p1, p2, q1, q2) {
            Ok(line) => {
                println!("{line}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Cmd::Classify { file, part } => match cmd_classify(&file, part) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Cmd::Sweep { m, k, p1, p2, q1, q2, n_grid, restarts, seed, outer, out } => {
            let n_grid = match parse_n_grid(&n_grid) {
                Ok(g) => g,
                Err(e) => return fail(e),
            };
            let spec = SweepSpec { m, k, p1, q1, p2, q2, n_grid, restarts, outer, seed: seed.unwrap_or_else(default_seed) };
            let outcome = match run_sweep(&spec) {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            let written = match &out {
                Some(path) => File::create(path)
                    .map_err(|e| io_fail(&path.display().to_string(), e))
                    .and_then(|f| {
                        outcome.result.write_csv(BufWriter::new(f)).map_err(fail)
                    }),
                None => {
                    let stdout = std::io::stdout();
                    outcome.result.write_csv(stdout.lock()).map_err(fail)
                }
            };
            if let Err(code) = written {
                return code;
            }
            let summary = outcome.result.summary_line(outcome.middle_slope, outcome.local_exponent);
            if out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            if !outcome.uncertified.is_empty() {
                eprintln!("error: estimates at n = {:?} failed certification", outcome.uncertified);
                return ExitCode::from(EXIT_CERT);
            }
            ExitCode::SUCCESS
        }
        Cmd::Cover { n_level, d, eps, jstar, s, samples, seed, dump } => {
            let cfg = CoverConfig::new(n_level, d, eps, jstar, s);
            let atlas = match build_cover(&cfg) {
                Ok(a) => a,
                Err(e) => return fail(e),
            };
            if let Some(path) = &dump {
                let res = File::create(path).and_then(|f| {
                    let mut w = BufWriter::new(f);
                    w.write_all(atlas.dump().as_bytes())?;
                    w.flush()
                });
                if let Err(e) = res {
                    return io_fail(&path.display().to_string(), e);
                }
            }
            let report = verify_cover(&atlas, atlas.nu_cap, samples, seed.unwrap_or_else(default_seed));
            println!("families={}", atlas.families.len());
            println!("nu_cap={}", atlas.nu_cap);
            println!("rank_budget_ratio={}", fmt_g12(rank_budget_ratio(&atlas)));
            println!("budget_ratio={}", fmt_g12(atlas.budget_ratio()));
            println!("checked={}", report.checked);
            println!("gaps={}", report.gaps.len());
            if let Some(g) = report.gaps.first() {
                eprintln!("error: first uncovered point nu={} shell={:?}", g.nu, g.shell);
                return ExitCode::from(EXIT_COVER);
            }
            ExitCode::SUCCESS
        }
    }
}
