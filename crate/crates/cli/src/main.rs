//! `sfree`: squares, the δ family, distinctness verdicts and trivialization certificates.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 verification failure,
//! 3 internal inconsistency.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::{json, Value};

use sfree_core::construction::{
    brute_force_check, build_sigma_square, build_square_a, build_square_b, certify_distinct, check_prime, delta,
    family, trivialize, unit_search, verify_certificate, Certificate, DeltaSpec, Verdict,
};
use sfree_core::coeff::{CoeffRing, RingPresentation};
use sfree_core::milnor::{check_exactness, MilnorSquare, SquareDescriptor};
use sfree_core::AlgebraError;

#[derive(Parser, Debug)]
#[command(name = "sfree", version, about = "Stably free modules over Z[C_p x C_p x F_m]: squares, certificates, verdicts")]
struct RunConfig {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    A,
    B,
    Sigma,
}

#[derive(Args, Debug, Clone)]
struct PrimeArgs {
    /// The prime p.
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Rank of the free group.
    #[arg(long, default_value_t = 2)]
    m: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized fibre-product checks on one of the squares.
    CheckSquare {
        #[command(flatten)]
        fam: PrimeArgs,
        #[arg(long, value_enum, ignore_case = true, default_value_t = Which::A)]
        which: Which,
        /// Invariant factors of G for `--which sigma`, e.g. `2,2`.
        #[arg(long, value_delimiter = ',')]
        group: Vec<usize>,
        /// Exponent vector of a generator of H, e.g. `1,0`; repeatable.
        #[arg(long)]
        subgroup: Vec<String>,
        /// Square descriptor (JSON) to check instead of a built-in square.
        #[arg(long, conflicts_with = "which")]
        square: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Print a square as a JSON descriptor (input for `check-square --square`).
    DescribeSquare {
        #[command(flatten)]
        fam: PrimeArgs,
        #[arg(long, value_enum, ignore_case = true, default_value_t = Which::A)]
        which: Which,
        #[arg(long, value_delimiter = ',')]
        group: Vec<usize>,
        #[arg(long)]
        subgroup: Vec<String>,
    },
    /// δ_n, its y-adic layers and the commutator it comes from.
    GenModule {
        #[command(flatten)]
        fam: PrimeArgs,
        #[arg(long)]
        n: u64,
    },
    /// Decide whether δ_n and δ_n2 give the same class, and cross-check by brute force.
    Certify {
        #[command(flatten)]
        fam: PrimeArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        n2: u64,
        /// Word length bound for the brute-force cross-check.
        #[arg(long, default_value_t = 4)]
        len_bound: usize,
    },
    /// Elementary factorization of diag(δ_n, 1) lifted to Z[C_p x F_m].
    Trivialize {
        #[command(flatten)]
        fam: PrimeArgs,
        #[arg(long)]
        n: u64,
    },
    /// Re-check a certificate written by `trivialize`.
    VerifyCertificate { file: PathBuf },
    /// δ_1 .. δ_N with the pairwise verdict matrix.
    Family {
        #[command(flatten)]
        fam: PrimeArgs,
        /// Number of family members.
        #[arg(long)]
        n: u64,
    },
    /// Bounded search for nontrivial units of R[F_m].
    UnitSearch {
        /// Coefficient ring: `zeta4`, `z`, `fpcp` (F_p[C_p]) or a JSON ring presentation file.
        #[arg(long, default_value = "zeta4")]
        ring: String,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        support_bound: usize,
        #[arg(long, default_value_t = 2)]
        height_bound: u64,
        #[arg(long, default_value_t = 1)]
        len_bound: usize,
    },
}

/// Failure with its exit code.
struct Fail(u8, String);

impl Fail {
    fn usage(e: impl std::fmt::Display) -> Self {
        Fail(1, e.to_string())
    }
    fn verify(e: impl std::fmt::Display) -> Self {
        Fail(2, e.to_string())
    }
    fn internal(e: impl std::fmt::Display) -> Self {
        Fail(3, e.to_string())
    }
}

/// Validation problems are the caller's fault; anything else means a check did not hold.
fn classify(e: AlgebraError) -> Fail {
    match e {
        AlgebraError::InvalidInput(_)
        | AlgebraError::InvalidRing(_)
        | AlgebraError::InvalidHom(_)
        | AlgebraError::NonMonicRelation(_)
        | AlgebraError::Parse { .. }
        | AlgebraError::Unsupported(_) => Fail::usage(e),
        _ => Fail::internal(e),
    }
}

struct Output {
    text: String,
    json: Value,
    /// Nonzero exit after printing.
    status: u8,
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(t) = std::env::var("SFREE_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SFREE_THREADS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    match run(&cfg) {
        Ok(out) => {
            let body = match cfg.format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
            };
            if let Err(e) = emit(&cfg, &body) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(out.status)
        }
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn emit(cfg: &RunConfig, body: &str) -> std::io::Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().write_all(body.as_bytes()),
    }
}

fn parse_subgroup(gens: &[String]) -> Result<Vec<Vec<i64>>, Fail> {
    gens.iter()
        .map(|g| {
            g.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| Fail::usage(format!("bad subgroup generator `{g}`"))))
                .collect()
        })
        .collect()
}

fn build_square(fam: &PrimeArgs, which: Which, group: &[usize], subgroup: &[String]) -> Result<MilnorSquare, Fail> {
    match which {
        Which::A => build_square_a(fam.p, fam.m).map_err(classify),
        Which::B => build_square_b(fam.p, fam.m).map_err(classify),
        Which::Sigma => {
            if group.is_empty() || subgroup.is_empty() {
                return Err(Fail::usage("--which sigma needs --group and --subgroup"));
            }
            build_sigma_square(group, &parse_subgroup(subgroup)?, fam.m).map_err(classify)
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn run(cfg: &RunConfig) -> Result<Output, Fail> {
    match &cfg.command {
        Command::CheckSquare { fam, which, group, subgroup, square, samples } => {
            if *samples == 0 {
                return Err(Fail::usage("--samples must be positive"));
            }
            let sq = match square {
                Some(path) => {
                    let d: SquareDescriptor = serde_json::from_str(&read_file(path)?).map_err(Fail::usage)?;
                    MilnorSquare::from_descriptor(&d).map_err(classify)?
                }
                None => build_square(fam, *which, group, subgroup)?,
            };
            let mut rng = StdRng::seed_from_u64(cfg.seed);
            let rep = check_exactness(&sq, *samples, &mut rng);
            let mut text = format!(
                "square {}: {} round trips, {} compatible pairs\n",
                rep.square, rep.round_trips_checked, rep.pairs_checked
            );
            for f in &rep.failures {
                text.push_str(&format!("  FAIL {f}\n"));
            }
            text.push_str(if rep.is_clean() { "exact: yes\n" } else { "exact: NO\n" });
            let status = if rep.is_clean() { 0 } else { 2 };
            Ok(Output { text, json: json!(rep), status })
        }
        Command::DescribeSquare { fam, which, group, subgroup } => {
            let sq = build_square(fam, *which, group, subgroup)?;
            let d = sq.descriptor();
            let body = serde_json::to_string_pretty(&d).expect("serializable") + "\n";
            Ok(Output { text: body, json: json!(d), status: 0 })
        }
        Command::GenModule { fam, n } => {
            let spec = DeltaSpec::new(fam.p, fam.m, *n).map_err(classify)?;
            let rep = delta(&spec).and_then(|d| d.report()).map_err(classify)?;
            let mut text = format!("delta_{} over {}\n  {}\n", rep.n, rep.ring, rep.delta);
            for l in &rep.y_layers {
                text.push_str(&format!("  T_{} = {}    [{}]\n", l.k, l.layer, l.formula));
            }
            Ok(Output { text, json: json!(rep), status: 0 })
        }
        Command::Certify { fam, n, n2, len_bound } => {
            if *n == 0 || *n2 == 0 {
                return Err(Fail::usage("indices must be at least 1"));
            }
            check_prime(fam.p).map_err(classify)?;
            let verdict = certify_distinct(fam.p, fam.m, *n, *n2).map_err(classify)?;
            let bf = brute_force_check(fam.p, fam.m, *n, *n2, *len_bound).map_err(classify)?;
            let agree = verdict.agrees_with(&bf);
            let replay = verdict.replay().map_err(classify)?;
            let mut text = format!("delta_{n} vs delta_{n2} (p = {}, m = {}): {:?}\n", fam.p, fam.m, verdict.verdict);
            for e in &verdict.trace {
                text.push_str(&format!("  [y^{}] {}  =>  {}\n", e.layer, e.constraint, e.resolution));
            }
            text.push_str(&format!(
                "brute force (|w| <= {}, {} words x {} units): {} hits; agreement: {}\n",
                bf.len_bound,
                bf.words_checked,
                bf.units_checked,
                bf.hits.len(),
                if agree { "yes" } else { "NO" }
            ));
            let json = json!({ "verdict": verdict, "brute_force": bf, "agree": agree, "replay": replay });
            if !agree || !replay {
                eprintln!("error: decision procedure and brute force disagree");
                return Ok(Output { text, json, status: 3 });
            }
            Ok(Output { text, json, status: 0 })
        }
        Command::Trivialize { fam, n } => {
            let spec = DeltaSpec::new(fam.p, fam.m, *n).map_err(classify)?;
            let cert = trivialize(spec.p, spec.m, spec.n).map_err(classify)?;
            let body = serde_json::to_string_pretty(&cert).expect("serializable") + "\n";
            Ok(Output { text: body, json: json!(cert), status: 0 })
        }
        Command::VerifyCertificate { file } => {
            let src = read_file(file)?;
            let cert: Certificate = serde_json::from_str(&src).map_err(|e| Fail::verify(format!("malformed certificate: {e}")))?;
            let check = verify_certificate(&cert);
            let mut text = format!(
                "certificate for delta_{} (p = {}, m = {}): {} factors\n",
                cert.n, cert.p, cert.m, check.factors
            );
            for f in &check.failures {
                text.push_str(&format!("  FAIL {f}\n"));
            }
            text.push_str(if check.ok() { "verified: yes\n" } else { "verified: NO\n" });
            let status = if check.ok() { 0 } else { 2 };
            Ok(Output { text, json: json!(check), status })
        }
        Command::Family { fam, n } => {
            check_prime(fam.p).map_err(classify)?;
            let rep = family(fam.p, fam.m, *n).map_err(classify)?;
            let mut text = format!("delta_1 .. delta_{} over F_{}[C_{}][F_{}]\n", rep.count, rep.p, rep.p, rep.m);
            for (i, d) in rep.deltas.iter().enumerate() {
                text.push_str(&format!("  delta_{} = {d}\n", i + 1));
            }
            for row in &rep.matrix {
                let cells: Vec<&str> =
                    row.iter().map(|v| if *v == Verdict::Distinct { "D" } else { "=" }).collect();
                text.push_str(&format!("  {}\n", cells.join(" ")));
            }
            let status = if rep.off_diagonal_distinct && rep.diagonal_equivalent { 0 } else { 3 };
            Ok(Output { text, json: json!(rep), status })
        }
        Command::UnitSearch { ring, p, m, support_bound, height_bound, len_bound } => {
            if *support_bound == 0 {
                return Err(Fail::usage("--support-bound must be positive"));
            }
            let r: Arc<CoeffRing> = match ring.as_str() {
                "zeta4" => CoeffRing::univariate("x", sfree_core::coeff::cyclotomic(4), 0).map_err(classify)?,
                "z" => CoeffRing::scalars(0),
                "fpcp" => {
                    check_prime(*p).map_err(classify)?;
                    CoeffRing::abelian_group_ring(&["x"], &[*p as usize], *p).map_err(classify)?
                }
                path => {
                    let pres: RingPresentation =
                        serde_json::from_str(&read_file(&PathBuf::from(path))?).map_err(Fail::usage)?;
                    CoeffRing::from_presentation(&pres).map_err(classify)?
                }
            };
            let rep = unit_search(&r, *m, *support_bound, *height_bound, *len_bound).map_err(classify)?;
            let text = format!(
                "{}[F_{}]: {} candidates, {} units found, {} nontrivial\n{}",
                rep.ring,
                rep.m,
                rep.candidates,
                rep.units.len(),
                rep.nontrivial.len(),
                rep.nontrivial.iter().map(|u| format!("  {u}\n")).collect::<String>()
            );
            Ok(Output { text, json: json!(rep), status: 0 })
        }
    }
}
