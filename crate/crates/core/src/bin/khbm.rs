use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use khbm_core::acceptance::{run_all, CriterionResult};
use khbm_core::banach_mazur::{default_candidates, sandwich_report, BMBoundReport, Methods, Transform};
use khbm_core::combinatorics::{verify_lemma1, Lemma1Report, SubsetRatioInput};
use khbm_core::distributions::L2ConstantVariant;
use khbm_core::functional::{
    ipf_exact, ipf_monte_carlo, verify_theorem1, verify_theorem1_l2, BoundSide, IpResult, Theorem1Report,
};
use khbm_core::hanner::{falsify_hanner, hanner_gap, Counterexample, HannerMode, HannerReport, HannerVerdict};
use khbm_core::parse::{parse_atoms, parse_exponent, parse_list, parse_norm, read_vectors};
use khbm_core::report::{fmt_f64, fmt_opt, fnv1a_hash, CsvTable, Envelope, SlackInfo};
use khbm_core::{khinchine_constants, Error, KhinchineConstants, DEFAULT_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "khbm", version, about = "Generalized Khinchine inequalities and Banach-Mazur distance bounds")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for every randomized computation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on the number of terms an exact enumeration may visit.
    #[arg(long, global = true, env = "KHBM_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Khinchine constants A_p and B_p.
    Constants {
        /// One or more exponents, comma separated.
        #[arg(long, value_delimiter = ',', required_unless_present = "grid")]
        p: Vec<f64>,
        /// `lo hi points`: a log-spaced grid of exponents.
        #[arg(long, num_args = 3, value_names = ["LO", "HI", "POINTS"])]
        grid: Option<Vec<f64>>,
    },
    /// The moment functional I_p(v, f).
    Ipf {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        atoms: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        norm: String,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Two-sided bounds on the mean of (S_J / S)^alpha over k-subsets.
    Lemma1 {
        /// Comma-separated nonnegative entries.
        #[arg(long, conflicts_with = "random")]
        x: Option<String>,
        /// Subset size; all sizes when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// One or more exponents, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 2.0, 3.0])]
        alpha: Vec<f64>,
        /// `n trials`: random sweep, seeded by --seed.
        #[arg(long, num_args = 2, value_names = ["N", "TRIALS"], conflicts_with = "x")]
        random: Option<Vec<usize>>,
    },
    /// Hanner type / cotype checks and counterexample search.
    Hanner {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Expected dimension; must match the norm.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Cotype)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Check this tuple exactly instead of searching.
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Banach-Mazur distance sandwich for d(l^p, l^q) in dimension n.
    Bm {
        #[arg(long, num_args = 3, value_names = ["P", "Q", "N"], required = true)]
        pair: Vec<String>,
        #[arg(long, value_enum, default_value_t = MethodsArg::All)]
        methods: MethodsArg,
        /// identity,hadamard,diag:<d1,d2,...>
        #[arg(long)]
        transforms: Option<String>,
    },
    /// Checks the generalized Khinchine bounds on one input.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1 {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        atoms: String,
        #[arg(long)]
        p: f64,
        /// Hanner cotype / type exponent asserted for the norm; defaults to p.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        norm: String,
        #[arg(long, value_enum, default_value_t = Side::Both)]
        side: Side,
        /// Use the L^2 constants with q = p.
        #[arg(long)]
        l2: bool,
        /// With --l2, use the max form of the lower constant instead of the min form.
        #[arg(long, requires = "l2")]
        paper_l2_constant: bool,
    },
    /// Runs the full acceptance suite.
    Acceptance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Type,
    Cotype,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodsArg {
    All,
    Thm2,
    Prop4,
    Cor1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Lower,
    Upper,
    Both,
}

/// Exit status: 0 all checks pass, 1 a genuine violation, 2 bad input.
struct Output {
    text: String,
    violation: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut text = out.text;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            // A closed pipe (`khbm ... | head`) is not an error worth a panic.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if out.violation {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn envelope<T: Serialize>(g: &Global, sub: &str, result: T) -> String {
    Envelope::new(sub, g.seed, g.budget, SlackInfo::default(), result).to_json()
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Constants { p, grid } => constants(g, p, grid.as_deref()),
        Command::Ipf {
            vectors,
            atoms,
            p,
            norm,
            method,
            samples,
        } => ipf(g, vectors, atoms, *p, norm, *method, *samples),
        Command::Lemma1 { x, k, alpha, random } => lemma1(g, x.as_deref(), *k, alpha, random.as_deref()),
        Command::Hanner {
            norm,
            q,
            n,
            d,
            mode,
            trials,
            vectors,
        } => hanner(g, norm, *q, *n, *d, *mode, *trials, vectors.as_deref()),
        Command::Bm {
            pair,
            methods,
            transforms,
        } => bm(g, pair, *methods, transforms.as_deref()),
        Command::VerifyTheorem1 {
            vectors,
            atoms,
            p,
            q,
            norm,
            side,
            l2,
            paper_l2_constant,
        } => theorem1(g, vectors, atoms, *p, *q, norm, *side, *l2, *paper_l2_constant),
        Command::Acceptance => acceptance(g),
    }
}

fn constants(g: &Global, ps: &[f64], grid: Option<&[f64]>) -> Result<Output, Error> {
    let mut exps: Vec<f64> = ps.to_vec();
    if let Some(&[lo, hi, points]) = grid {
        if !(lo >= 1.0 && hi >= lo && points >= 1.0 && points.fract() == 0.0) {
            return Err(Error::Domain("--grid needs 1 <= LO <= HI and an integer POINTS >= 1".into()));
        }
        let m = points as usize;
        exps.extend((0..m).map(|i| {
            if m == 1 {
                lo
            } else {
                lo * (hi / lo).powf(i as f64 / (m - 1) as f64)
            }
        }));
    }
    let rows: Vec<KhinchineConstants> = exps.iter().map(|&p| khinchine_constants(p)).collect::<Result<_, _>>()?;
    let text = match g.format {
        Format::Json => {
            if rows.len() == 1 {
                envelope(g, "constants", rows[0])
            } else {
                envelope(g, "constants", &rows[..])
            }
        }
        Format::Csv => {
            let mut t = CsvTable::new(&["p", "a_p", "b_p", "one", "two_power", "gamma_term"]);
            for k in &rows {
                t.push(vec![
                    fmt_f64(k.p),
                    fmt_f64(k.a_p),
                    fmt_f64(k.b_p),
                    fmt_f64(k.set_elements[0]),
                    fmt_f64(k.set_elements[1]),
                    fmt_f64(k.set_elements[2]),
                ]);
            }
            t.render()
        }
    };
    Ok(Output { text, violation: false })
}

#[derive(Serialize)]
struct IpfOutput {
    norm: String,
    p: f64,
    n: usize,
    d: usize,
    #[serde(flatten)]
    result: IpResult,
    /// `mean ± 4·stderr` mapped to I_p; Monte Carlo only.
    interval: Option<(f64, f64)>,
}

fn ipf(
    g: &Global,
    vectors: &std::path::Path,
    atoms: &str,
    p: f64,
    norm: &str,
    method: Method,
    samples: u64,
) -> Result<Output, Error> {
    let v = read_vectors(vectors)?;
    let f = parse_atoms(atoms)?;
    let norm = parse_norm(norm)?;
    let result = match method {
        Method::Exact => ipf_exact(&v, &f, p, &norm, g.budget)?,
        Method::Mc => ipf_monte_carlo(&v, &f, p, &norm, samples, g.seed)?,
    };
    let interval = result.stderr.map(|_| result.interval(p, 4.0));
    let out = IpfOutput {
        norm: norm.to_string(),
        p,
        n: v.n(),
        d: v.d(),
        result,
        interval,
    };
    let text = match g.format {
        Format::Json => envelope(g, "ipf", &out),
        Format::Csv => {
            let mut t = CsvTable::new(&["value", "pth_power", "method", "stderr", "terms_evaluated"]);
            t.push(vec![
                fmt_f64(out.result.value),
                fmt_f64(out.result.pth_power),
                match method {
                    Method::Exact => "exact".into(),
                    Method::Mc => "monte_carlo".into(),
                },
                fmt_opt(out.result.stderr),
                out.result.terms_evaluated.to_string(),
            ]);
            t.render()
        }
    };
    Ok(Output { text, violation: false })
}

#[derive(Serialize)]
struct Lemma1Row {
    x_hash: String,
    n: usize,
    k: usize,
    alpha: f64,
    #[serde(flatten)]
    report: Lemma1Report,
}

fn lemma1(
    g: &Global,
    x: Option<&str>,
    k: Option<usize>,
    alphas: &[f64],
    random: Option<&[usize]>,
) -> Result<Output, Error> {
    let inputs: Vec<Vec<f64>> = match (x, random) {
        (Some(x), _) => vec![parse_list(x)?],
        (None, Some(&[n, trials])) => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            (0..trials)
                .map(|_| (0..n).map(|_| rng.random_range(0.0..10.0)).collect())
                .collect()
        }
        _ => return Err(Error::Domain("lemma1 needs --x or --random N TRIALS".into())),
    };
    let mut rows = Vec::new();
    for xv in &inputs {
        let n = xv.len();
        let ks: Vec<usize> = match k {
            Some(k) => vec![k],
            None => (1..=n).collect(),
        };
        let hash = fnv1a_hash(xv);
        for &kk in &ks {
            for &alpha in alphas {
                let report = verify_lemma1(&SubsetRatioInput::new(xv.clone(), kk, alpha)?)?;
                rows.push(Lemma1Row {
                    x_hash: hash.clone(),
                    n,
                    k: kk,
                    alpha,
                    report,
                });
            }
        }
    }
    let violation = rows.iter().any(|r| !r.report.holds);
    let text = match g.format {
        Format::Json => envelope(g, "lemma1", &rows),
        Format::Csv => {
            let mut t = CsvTable::new(&["x_hash", "k", "alpha", "ratio", "lo", "hi", "holds"]);
            for r in &rows {
                t.push(vec![
                    r.x_hash.clone(),
                    r.k.to_string(),
                    fmt_f64(r.alpha),
                    fmt_f64(r.report.ratio),
                    fmt_f64(r.report.lo),
                    fmt_f64(r.report.hi),
                    r.report.holds.to_string(),
                ]);
            }
            t.render()
        }
    };
    Ok(Output { text, violation })
}

#[derive(Serialize)]
struct HannerOutput {
    norm: String,
    q: f64,
    n: usize,
    mode: HannerMode,
    verdict: HannerVerdict,
    /// Present for an exact check of a given tuple.
    report: Option<HannerReport>,
    trials: Option<usize>,
    counterexample: Option<Counterexample>,
}

#[allow(clippy::too_many_arguments)]
fn hanner(
    g: &Global,
    norm: &str,
    q: f64,
    n: usize,
    d: Option<usize>,
    mode: Mode,
    trials: usize,
    vectors: Option<&std::path::Path>,
) -> Result<Output, Error> {
    let norm = parse_norm(norm)?;
    if let Some(d) = d {
        if d != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                got: d,
            });
        }
    }
    let mode = match mode {
        Mode::Type => HannerMode::Type,
        Mode::Cotype => HannerMode::Cotype,
    };
    let consistent = match mode {
        HannerMode::Type => HannerVerdict::TypeConsistent,
        HannerMode::Cotype => HannerVerdict::CotypeConsistent,
    };
    let out = match vectors {
        Some(path) => {
            let v = read_vectors(path)?;
            let rep = hanner_gap(&norm, &v, q)?;
            HannerOutput {
                norm: norm.to_string(),
                q,
                n: v.n(),
                mode,
                verdict: rep.verdict(mode),
                report: Some(rep),
                trials: None,
                counterexample: None,
            }
        }
        None => {
            let ce = falsify_hanner(&norm, q, n, mode, trials, g.seed)?;
            HannerOutput {
                norm: norm.to_string(),
                q,
                n,
                mode,
                verdict: ce.as_ref().map(|c| c.report.verdict(mode)).unwrap_or(consistent),
                report: None,
                trials: Some(trials),
                counterexample: ce,
            }
        }
    };
    let violation = out.verdict != consistent;
    let text = match g.format {
        Format::Json => envelope(g, "hanner", &out),
        Format::Csv => {
            let mut t = CsvTable::new(&["norm", "q", "n", "verdict", "lhs", "rhs", "gap"]);
            let rep = out.report.as_ref().or(out.counterexample.as_ref().map(|c| &c.report));
            t.push(vec![
                out.norm.clone(),
                fmt_f64(q),
                out.n.to_string(),
                serde_json::to_value(out.verdict)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                fmt_opt(rep.map(|r| r.lhs)),
                fmt_opt(rep.map(|r| r.rhs)),
                fmt_opt(rep.map(|r| r.gap)),
            ]);
            t.render()
        }
    };
    Ok(Output { text, violation })
}

fn parse_transforms(spec: &str) -> Result<Vec<Transform>, Error> {
    let mut out = Vec::new();
    let mut diag: Option<Vec<f64>> = None;
    for tok in spec.split(',').map(str::trim) {
        if let Some(first) = tok.strip_prefix("diag:") {
            if let Some(d) = diag.take() {
                out.push(Transform::Diagonal { entries: d });
            }
            diag = Some(parse_list(first)?);
            continue;
        }
        if let Some(d) = diag.as_mut() {
            if let Ok(v) = tok.parse::<f64>() {
                d.push(v);
                continue;
            }
            out.push(Transform::Diagonal { entries: diag.take().unwrap_or_default() });
        }
        match tok {
            "identity" => out.push(Transform::Identity),
            "hadamard" => out.push(Transform::Hadamard),
            other => return Err(Error::Parse(format!("unknown transform '{other}'"))),
        }
    }
    if let Some(d) = diag {
        out.push(Transform::Diagonal { entries: d });
    }
    Ok(out)
}

fn bm(g: &Global, pair: &[String], methods: MethodsArg, transforms: Option<&str>) -> Result<Output, Error> {
    let p = parse_exponent(&pair[0])?;
    let q = parse_exponent(&pair[1])?;
    let n: usize = pair[2]
        .parse()
        .map_err(|_| Error::Parse(format!("invalid dimension '{}'", pair[2])))?;
    let candidates = match transforms {
        Some(t) => parse_transforms(t)?,
        None => default_candidates(n),
    };
    let methods = match methods {
        MethodsArg::All => Methods::All,
        MethodsArg::Thm2 => Methods::Thm2,
        MethodsArg::Prop4 => Methods::Prop4,
        MethodsArg::Cor1 => Methods::Cor1,
    };
    let rep: BMBoundReport = sandwich_report(p, q, n, methods, &candidates)?;
    let text = match g.format {
        Format::Json => envelope(g, "bm", &rep),
        Format::Csv => {
            let mut t = CsvTable::new(&["method", "value", "witness_p", "rigorous", "known", "upper", "consistent"]);
            let known = fmt_opt(rep.known_exact);
            let upper = fmt_opt(rep.upper_bound.as_ref().map(|u| u.value));
            for b in &rep.lower_bounds {
                t.push(vec![
                    b.method.clone(),
                    fmt_f64(b.value),
                    fmt_opt(b.witness_p),
                    b.rigorous.to_string(),
                    known.clone(),
                    upper.clone(),
                    rep.consistent.to_string(),
                ]);
            }
            t.render()
        }
    };
    Ok(Output {
        text,
        violation: !rep.consistent,
    })
}

#[allow(clippy::too_many_arguments)]
fn theorem1(
    g: &Global,
    vectors: &std::path::Path,
    atoms: &str,
    p: f64,
    q: Option<f64>,
    norm: &str,
    side: Side,
    l2: bool,
    paper_max: bool,
) -> Result<Output, Error> {
    let v = read_vectors(vectors)?;
    let f = parse_atoms(atoms)?;
    let norm = parse_norm(norm)?;
    let q = q.unwrap_or(p);
    let sides = match side {
        Side::Lower => vec![BoundSide::Lower],
        Side::Upper => vec![BoundSide::Upper],
        Side::Both => vec![BoundSide::Lower, BoundSide::Upper],
    };
    let variant = if paper_max {
        L2ConstantVariant::PaperMax
    } else {
        L2ConstantVariant::Min
    };
    let reports: Vec<Theorem1Report> = sides
        .iter()
        .map(|&s| {
            if l2 {
                verify_theorem1_l2(&v, &f, p, &norm, s, variant, g.budget)
            } else {
                verify_theorem1(&v, &f, p, q, &norm, s, g.budget)
            }
        })
        .collect::<Result<_, _>>()?;
    let violation = reports.iter().any(|r| !r.holds);
    let text = match g.format {
        Format::Json => envelope(g, "verify-theorem1", &reports),
        Format::Csv => {
            let mut t = CsvTable::new(&["side", "p", "q", "i_p", "constant", "l2_norm", "rhs", "margin", "holds"]);
            for r in &reports {
                t.push(vec![
                    match r.side {
                        BoundSide::Lower => "lower".into(),
                        BoundSide::Upper => "upper".into(),
                    },
                    fmt_f64(r.p),
                    fmt_f64(r.q),
                    fmt_f64(r.i_p),
                    fmt_f64(r.bound_constant),
                    fmt_f64(r.l2_norm),
                    fmt_f64(r.rhs),
                    fmt_f64(r.margin),
                    r.holds.to_string(),
                ]);
            }
            t.render()
        }
    };
    Ok(Output { text, violation })
}

fn acceptance(g: &Global) -> Result<Output, Error> {
    let results: Vec<CriterionResult> = run_all(g.seed);
    for r in &results {
        eprintln!("{}", r.line());
    }
    let violation = results.iter().any(|r| !r.passed);
    let text = match g.format {
        Format::Json => envelope(g, "acceptance", &results),
        Format::Csv => {
            let mut t = CsvTable::new(&["id", "name", "passed", "detail"]);
            for r in &results {
                t.push(vec![
                    r.id.to_string(),
                    r.name.clone(),
                    r.passed.to_string(),
                    format!("\"{}\"", r.detail.replace('"', "'")),
                ]);
            }
            t.render()
        }
    };
    Ok(Output { text, violation })
}
