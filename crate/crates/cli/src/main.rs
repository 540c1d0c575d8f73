mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use cwlab::asymptotics::{
    absorption_threshold, higher_root_model, higher_root_theta, square_root_model, theta_exponent,
    MainTermModel,
};
use cwlab::cw_sums::{bw_block_sum, g_sum, g_sum_f64, GSumSpec, GValue, Point, Root};
use cwlab::divisors::{divisor_sum_restricted, is_square, sigma_alpha, DivisorSpec, SumValue};
use cwlab::experiments::{
    as_fit_input, cw_series, fit_loglog, residual_series, slope_stability, GridSpec,
};
use cwlab::exponent_pairs::{
    block_bound_exponents, parse_rational, settled_alpha_range, ExponentPair, JCase, Rational,
    TransformWord,
};
use cwlab::numeric::{format_hp, hp};
use cwlab::summatory::{summatory_bruteforce, summatory_fast, Term};
use cwlab::{CwError, Exponent};

use output::{Format, Table};

/// Largest range accepted by `divisor --x`.
const DIVISOR_RANGE_LIMIT: u64 = 1_000_000;

/// Slope change (dropping the largest point) above which `fit` warns.
const STABILITY_WARN: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(
    name = "cwlab",
    version,
    about = "Restricted divisor sums, Chowla-Walum sums and exponent pairs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "CWLAB_THREADS", default_value_t = 0, global = true)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Restricted divisor sum sigma_{a,alpha}(n) for one n or every n <= x.
    #[command(after_help = "Columns: command,n,a,alpha,restricted,full,is_square")]
    Divisor {
        #[arg(long, conflicts_with = "x", required_unless_present = "x")]
        n: Option<u64>,
        /// Every n in 1..=x (at most 10^6).
        #[arg(long)]
        x: Option<u64>,
        #[arg(long, default_value_t = 2)]
        a: u32,
        #[arg(long, default_value = "0")]
        alpha: Exponent,
    },
    /// Chowla-Walum sum G_{a,alpha,j}(x).
    #[command(after_help = "Columns: command,a,alpha,j,x,cutoff,mode,value,decimal")]
    Gsum {
        #[arg(long, default_value = "2")]
        a: Root,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        alpha: Exponent,
        #[arg(long, default_value_t = 1)]
        j: u32,
        #[arg(long)]
        x: Point,
        /// Force the floating-point path.
        #[arg(long)]
        float: bool,
    },
    /// Block sum sum_{n < m <= 2n} psi(4x/(4m + a) + b/4).
    #[command(after_help = "Columns: command,n,x,a,b,value,decimal")]
    Bw {
        /// Block start N (>= 3).
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: Point,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        a: i32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        b: i32,
    },
    /// Summatory function sum_{n <= x} sigma_{a,alpha}(n).
    #[command(
        after_help = "Columns: command,x,a,alpha,mode,total,brute,term_main,term_power,term_half,term_psi\n\
        Exit status 3 when --mode both finds the two routes disagreeing."
    )]
    Summatory {
        #[arg(long, default_value_t = 2)]
        a: u32,
        #[arg(long, default_value = "0")]
        alpha: Exponent,
        #[arg(long)]
        x: u64,
        #[arg(long, value_enum, default_value_t = Mode::Fast)]
        mode: Mode,
    },
    /// Main-term model, theta and absorption threshold.
    #[command(
        after_help = "Columns: command,a,alpha,cw,theta,absorption_threshold,model,x,model_value"
    )]
    Asympt {
        #[arg(long, default_value_t = 2)]
        a: u32,
        #[arg(long, default_value = "0")]
        alpha: Exponent,
        /// Assume the conjectured Chowla-Walum bound (a = 2 only).
        #[arg(long, default_value_t = false, action = ArgAction::Set)]
        cw: bool,
        /// Evaluate the model here (>= 2).
        #[arg(long)]
        x: Option<Point>,
    },
    /// Exponent-pair words, block-bound exponents and the settled range.
    #[command(
        after_help = "Columns: command,seed,word,pair,j_case,primary_offset,secondary_offset,\
        primary_exponent,secondary_exponent,settled_range\n\
        Offsets print as 'c + (p)/a' unless --a is given. The exponent and offset columns stay empty without --j."
    )]
    Pairs {
        /// Word over {A, B} with optional powers, applied rightmost first, e.g. BA^2.
        #[arg(long, default_value = "")]
        word: TransformWord,
        #[arg(long, default_value = "13/84,55/84")]
        seed: ExponentPair,
        /// Bernoulli index selecting the bound (1, or any j >= 2).
        #[arg(long)]
        j: Option<u32>,
        #[arg(long, default_value = "0", value_parser = parse_rational)]
        alpha: Rational,
        #[arg(long, value_parser = parse_rational)]
        a: Option<Rational>,
    },
    /// Residual series against the main-term model, or G values when --j is given, with a log-log fit.
    #[command(
        after_help = "Columns: command,kind,a,alpha,j,x,value,model_value,residual,slope,intercept,\
        points_used,points_dropped,slope_shift\n\
        kind is 'summatory' or 'gsum'; the fit columns repeat on every row."
    )]
    Fit {
        #[arg(long, default_value_t = 2)]
        a: u32,
        #[arg(long, default_value = "0")]
        alpha: Exponent,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long, default_value_t = false, action = ArgAction::Set)]
        cw: bool,
        /// Geometric grid x0:ratio:count.
        #[arg(long, default_value = "10000:2:24")]
        grid: GridSpec,
    },
    /// Reduced-scale invariant checks; exit status 3 if any fails.
    #[command(after_help = "Columns: command,check,passed,detail")]
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fast,
    Brute,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CwError) -> u8 {
    match e {
        CwError::InvariantBreach(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> cwlab::Result<()> {
    let table = match cli.command {
        Command::Divisor { n, x, a, alpha } => divisor(n, x, a, alpha)?,
        Command::Gsum {
            a,
            alpha,
            j,
            x,
            float,
        } => gsum(a, alpha, j, x, float)?,
        Command::Bw { n, x, a, b } => bw(n, x, a, b)?,
        Command::Summatory { a, alpha, x, mode } => summatory(a, alpha, x, mode)?,
        Command::Asympt { a, alpha, cw, x } => asympt(a, alpha, cw, x)?,
        Command::Pairs {
            word,
            seed,
            j,
            alpha,
            a,
        } => pairs(&word, &seed, j, &alpha, a.as_ref())?,
        Command::Fit {
            a,
            alpha,
            j,
            cw,
            grid,
        } => fit(a, alpha, j, cw, &grid)?,
        Command::Verify => return verify(&cli.global),
    };
    emit(&table, &cli.global)
}

fn emit(table: &Table, global: &Global) -> cwlab::Result<()> {
    let io_err = |e: io::Error| CwError::InvalidInput(format!("cannot write output: {e}"));
    match &global.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
            table.write(global.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let mut w = io::stdout().lock();
            table.write(global.format, &mut w).map_err(io_err)
        }
    }
}

fn f64_cell(v: f64) -> String {
    format!("{v:e}")
}

fn sum_cell(v: SumValue) -> String {
    match v {
        SumValue::Exact(w) => w.to_string(),
        SumValue::Real(r) => f64_cell(r),
    }
}

fn term_cell(t: &Term) -> String {
    match t {
        Term::Exact(q) => q.to_string(),
        Term::Approx(v) => f64_cell(*v),
    }
}

fn divisor(n: Option<u64>, x: Option<u64>, a: u32, alpha: Exponent) -> cwlab::Result<Table> {
    let spec = DivisorSpec::new(a, alpha)?;
    let range = match (n, x) {
        (Some(n), _) => n..=n,
        (None, Some(x)) if x > DIVISOR_RANGE_LIMIT => {
            return Err(CwError::Refused(format!(
                "--x {x} exceeds {DIVISOR_RANGE_LIMIT}"
            )))
        }
        (None, Some(x)) => 1..=x,
        (None, None) => return Err(CwError::InvalidInput("give --n or --x".into())),
    };
    let mut t = Table::new(
        "divisor",
        &[
            "command",
            "n",
            "a",
            "alpha",
            "restricted",
            "full",
            "is_square",
        ],
    );
    for n in range {
        t.push(vec![
            n.to_string(),
            a.to_string(),
            alpha.to_string(),
            sum_cell(divisor_sum_restricted(n, &spec)?),
            sum_cell(sigma_alpha(n, alpha)?),
            is_square(n).to_string(),
        ]);
    }
    Ok(t)
}

fn gvalue_cells(v: &GValue) -> [String; 2] {
    match v {
        GValue::Exact(q) => [q.to_string(), format_hp(&hp(q))],
        GValue::Float(f) => [f64_cell(*f), f64_cell(*f)],
    }
}

fn gsum(a: Root, alpha: Exponent, j: u32, x: Point, float: bool) -> cwlab::Result<Table> {
    let spec = GSumSpec::new(a, alpha, j, x)?;
    let (mode, value) = if spec.is_exact() && !float {
        ("exact", g_sum(&spec)?)
    } else {
        ("float", GValue::Float(g_sum_f64(&spec)?))
    };
    let [value, decimal] = gvalue_cells(&value);
    let mut t = Table::new(
        "gsum",
        &[
            "command", "a", "alpha", "j", "x", "cutoff", "mode", "value", "decimal",
        ],
    );
    t.push(vec![
        spec.a().to_string(),
        alpha.to_string(),
        j.to_string(),
        x.to_string(),
        spec.cutoff()?.to_string(),
        mode.into(),
        value,
        decimal,
    ]);
    Ok(t)
}

fn bw(n: u64, x: Point, a: i32, b: i32) -> cwlab::Result<Table> {
    let [value, decimal] = gvalue_cells(&bw_block_sum(n, x, a, b)?);
    let mut t = Table::new("bw", &["command", "n", "x", "a", "b", "value", "decimal"]);
    t.push(vec![
        n.to_string(),
        x.to_string(),
        a.to_string(),
        b.to_string(),
        value,
        decimal,
    ]);
    Ok(t)
}

fn summatory(a: u32, alpha: Exponent, x: u64, mode: Mode) -> cwlab::Result<Table> {
    let spec = DivisorSpec::new(a, alpha)?;
    let fast = match mode {
        Mode::Brute => None,
        _ => {
            let b = summatory_fast(x, &spec)?;
            b.check_interchange()?;
            Some(b)
        }
    };
    let brute = match mode {
        Mode::Fast => None,
        _ => Some(summatory_bruteforce(x, &spec)?),
    };
    if let (Some(f), Some(b)) = (&fast, brute) {
        let agree = match (f.total, b) {
            (SumValue::Exact(p), SumValue::Exact(q)) => p == q,
            (p, q) => {
                let (p, q) = (p.to_f64(), q.to_f64());
                (p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1.0)
            }
        };
        if !agree {
            return Err(CwError::InvariantBreach(format!(
                "fast total {} differs from brute force {}",
                f.total, b
            )));
        }
    }
    let mode_name = match mode {
        Mode::Fast => "fast",
        Mode::Brute => "brute",
        Mode::Both => "both",
    };
    let terms = match &fast {
        Some(f) => f.terms().map(term_cell).to_vec(),
        None => vec![String::new(); 4],
    };
    let mut t = Table::new(
        "summatory",
        &[
            "command",
            "x",
            "a",
            "alpha",
            "mode",
            "total",
            "brute",
            "term_main",
            "term_power",
            "term_half",
            "term_psi",
        ],
    );
    let total = fast
        .as_ref()
        .map(|f| f.total)
        .or(brute)
        .map(sum_cell)
        .unwrap_or_default();
    let mut row = vec![
        x.to_string(),
        a.to_string(),
        alpha.to_string(),
        mode_name.into(),
        total,
        brute.map(sum_cell).unwrap_or_default(),
    ];
    row.extend(terms);
    t.push(row);
    Ok(t)
}

fn model_for(a: u32, alpha: Exponent, cw: bool) -> cwlab::Result<MainTermModel> {
    match a {
        2 => square_root_model(alpha, cw),
        _ if cw => Err(CwError::InvalidInput(
            "--cw true applies to a = 2 only".into(),
        )),
        _ => higher_root_model(alpha, a),
    }
}

fn asympt(a: u32, alpha: Exponent, cw: bool, x: Option<Point>) -> cwlab::Result<Table> {
    let model = model_for(a, alpha, cw)?;
    let (theta, threshold) = if a == 2 {
        (
            theta_exponent(alpha, cw),
            absorption_threshold(cw).to_string(),
        )
    } else {
        (higher_root_theta(alpha, a), String::new())
    };
    let (x_cell, value_cell) = match x {
        Some(p) => {
            let xv = match p {
                Point::Int(v) => hp(v),
                Point::Real(v) => hp(v),
            };
            if xv.is_nan() || xv < 2 {
                return Err(CwError::InvalidInput(format!("x = {p} must be >= 2")));
            }
            (p.to_string(), format_hp(&model.eval(&xv)))
        }
        None => (String::new(), String::new()),
    };
    let mut t = Table::new(
        "asympt",
        &[
            "command",
            "a",
            "alpha",
            "cw",
            "theta",
            "absorption_threshold",
            "model",
            "x",
            "model_value",
        ],
    );
    t.push(vec![
        a.to_string(),
        alpha.to_string(),
        cw.to_string(),
        theta.to_string(),
        threshold,
        model.to_string(),
        x_cell,
        value_cell,
    ]);
    Ok(t)
}

fn pairs(
    word: &TransformWord,
    seed: &ExponentPair,
    j: Option<u32>,
    alpha: &Rational,
    a: Option<&Rational>,
) -> cwlab::Result<Table> {
    let pair = word.apply(seed);
    let mut cells = vec![String::new(); 5];
    if let Some(j) = j {
        let case = match j {
            0 => return Err(CwError::InvalidInput("--j must be >= 1".into())),
            1 => JCase::One,
            _ => JCase::AtLeastTwo,
        };
        let bound = block_bound_exponents(&pair, case, alpha)?;
        cells[0] = if case == JCase::One { "1" } else { ">=2" }.into();
        match a {
            Some(a) if *a <= 1 => {
                return Err(CwError::InvalidInput(format!("a = {a} must exceed 1")))
            }
            Some(a) => {
                cells[1] = bound.primary_offset(a).to_string();
                cells[2] = bound.secondary_offset(a).to_string();
                cells[3] = bound.primary_exponent(a, alpha).to_string();
                cells[4] = bound.secondary_exponent(a, alpha).to_string();
            }
            None => {
                cells[1] = bound.primary.to_string();
                cells[2] = bound.secondary.to_string();
            }
        }
    }
    let settled = settled_alpha_range(&pair).map_or_else(|| "none".to_string(), |r| r.to_string());
    let mut t = Table::new(
        "pairs",
        &[
            "command",
            "seed",
            "word",
            "pair",
            "j_case",
            "primary_offset",
            "secondary_offset",
            "primary_exponent",
            "secondary_exponent",
            "settled_range",
        ],
    );
    let mut row = vec![seed.to_string(), word.to_string(), pair.to_string()];
    row.extend(cells);
    row.push(settled);
    t.push(row);
    Ok(t)
}

const FIT_COLUMNS: &[&str] = &[
    "command",
    "kind",
    "a",
    "alpha",
    "j",
    "x",
    "value",
    "model_value",
    "residual",
    "slope",
    "intercept",
    "points_used",
    "points_dropped",
    "slope_shift",
];

/// Series kind, per-point cells (x, value, model, residual) and fit input.
type FitData = (&'static str, Vec<[String; 4]>, Vec<(f64, f64)>);

fn fit(a: u32, alpha: Exponent, j: Option<u32>, cw: bool, grid: &GridSpec) -> cwlab::Result<Table> {
    let mut t = Table::new("fit", FIT_COLUMNS);
    let (kind, rows, series): FitData = match j {
        Some(j) => {
            let g = cw_series(Root::Int(a), alpha, j, grid)?;
            let rows = g
                .iter()
                .map(|&(x, v)| [x.to_string(), f64_cell(v), String::new(), f64_cell(v)])
                .collect();
            let series = g.iter().map(|&(x, v)| (x as f64, v)).collect();
            ("gsum", rows, series)
        }
        None => {
            let spec = DivisorSpec::new(a, alpha)?;
            let model = model_for(a, alpha, cw)?;
            let res = residual_series(&spec, &model, grid)?;
            let rows = res
                .iter()
                .map(|p| {
                    [
                        p.x.to_string(),
                        sum_cell(p.exact),
                        format_hp(&p.model_value),
                        format_hp(&p.residual),
                    ]
                })
                .collect();
            ("summatory", rows, as_fit_input(&res))
        }
    };
    let report = fit_loglog(&series)?;
    let shift = slope_stability(&series).ok();
    if let Some(s) = shift.filter(|&s| s > STABILITY_WARN) {
        eprintln!("warning: dropping the largest point moves the slope by {s:.3}");
    }
    let j_cell = j.map(|j| j.to_string()).unwrap_or_default();
    for [x, value, model, residual] in rows {
        t.push(vec![
            kind.into(),
            a.to_string(),
            alpha.to_string(),
            j_cell.clone(),
            x,
            value,
            model,
            residual,
            f64_cell(report.slope),
            f64_cell(report.intercept),
            report.n_points_used.to_string(),
            report.n_dropped_zero.to_string(),
            shift.map(f64_cell).unwrap_or_default(),
        ]);
    }
    Ok(t)
}

fn verify(global: &Global) -> cwlab::Result<()> {
    let results = cwlab::verify::run_all();
    let mut t = Table::new("verify", &["command", "check", "passed", "detail"]);
    for r in &results {
        t.push(vec![r.name.into(), r.passed.to_string(), r.detail.clone()]);
    }
    emit(&t, global)?;
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CwError::InvariantBreach(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
