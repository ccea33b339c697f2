//! Command-line front end.

use crate::arith::ExponentTuple;
use crate::characters::{character_group, CharacterGroup, DirichletCharacter};
use crate::constants::{
    b_ell, c_chi_fourth, c_ell_q, c_k_alpha, d_chi_nu, f_x, h_qc, ConstantResult, DEFAULT_CUTOFF,
};
use crate::error::{Error, Result};
use crate::moments::{
    alpha_minus_one, check_rational, diagonal_prediction, hurwitz_moment, l_moment, p_coeff_oracle,
    p_mean_square, splitting_ratio, twisted_main_term, z_mean_square, MomentEstimate, QuadratureSpec,
    SplitVariant,
};
use crate::rmt::{model_moment, model_prediction};
use crate::verify::{run_suite, Suite};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "HURWITZ_MOMENTS_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "hurwitz-moments", version, about = "Moments of Hurwitz zeta and Dirichlet L-functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print one JSON object per line instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Append rows to this CSV file (header written when the file is new).
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = WORKERS_ENV, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
    /// Write 0 in the `seconds` column so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Prime cutoff for Euler-product constants.
    #[arg(short = 'P', long = "cutoff", global = true, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: u64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SpecArgs {
    #[arg(long, default_value_t = 0.125)]
    pub panel_width: f64,
    #[arg(long, default_value_t = 7)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 4)]
    pub max_refinements: usize,
}

impl From<SpecArgs> for QuadratureSpec {
    fn from(a: SpecArgs) -> Self {
        QuadratureSpec {
            panel_width: a.panel_width,
            nodes_per_panel: a.nodes,
            refine_tol: a.refine_tol,
            max_refinements: a.max_refinements,
        }
    }
}

/// `A/Q` with `gcd(A, Q) = 1` and `1 <= A <= Q`.
pub fn parse_alpha(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, q) = s.split_once('/').ok_or_else(|| format!("expected A/Q, got '{s}'"))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
    let q: u64 = q.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
    check_rational(a, q).map_err(|e| e.to_string())?;
    Ok((a, q))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dirichlet characters.
    Characters {
        #[command(subcommand)]
        action: CharactersCmd,
    },
    /// Euler-product and closed-form constants.
    Constant {
        #[command(subcommand)]
        which: ConstantCmd,
    },
    /// M_k(T; alpha) = int_T^{2T} |zeta(1/2+it, alpha)|^{2k} dt.
    Moment {
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_alpha, value_name = "A/Q")]
        alpha: (u64, u64),
        #[arg(long = "T")]
        t: f64,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// M_k(T; chi) = int_T^{2T} |L(1/2+it, chi)|^{2k} dt.
    Lmoment {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        k: u32,
        #[arg(long = "T")]
        t: f64,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Splitting ratio of the mean square of L^l.
    Split {
        #[arg(long)]
        q: u64,
        /// Exponent tuple as `index:exponent,...`.
        #[arg(long)]
        ell: String,
        #[arg(long = "X")]
        x: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, value_enum, default_value_t = Variant::Short)]
        variant: Variant,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// int_T^{2T} |Z_X(1/2+it, chi)|^2 dt.
    Zmoment {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        chi: usize,
        #[arg(long = "X")]
        x: f64,
        #[arg(long = "T")]
        t: f64,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Mean square of the short Euler product P*_X^l and its coefficient oracle.
    Pmoment {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        ell: String,
        #[arg(long = "X")]
        x: f64,
        #[arg(long = "T")]
        t: f64,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Diagonal prediction for M_k(T; alpha).
    Predict {
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_alpha, value_name = "A/Q")]
        alpha: (u64, u64),
        #[arg(long = "T")]
        t: f64,
        /// Also integrate the off-diagonal terms.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Twisted main term M' with b = alpha_{-1}.
    Twisted {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        chi: usize,
        #[arg(long = "X")]
        x: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 0.05)]
        theta: f64,
    },
    /// Random-matrix model moment against its prediction.
    Rmt {
        #[arg(long)]
        m: u32,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "X")]
        x: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Identity and consistency checks.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Short,
    Exact,
}

#[derive(Debug, Subcommand)]
pub enum CharactersCmd {
    /// List the characters mod q in index order.
    List {
        #[arg(long)]
        q: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConstantCmd {
    /// c_k(a/q).
    Ck {
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_alpha, value_name = "A/Q", default_value = "1/1")]
        alpha: (u64, u64),
    },
    /// c_l(q).
    Cl {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        ell: String,
    },
    /// b(l).
    B {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        ell: String,
    },
    /// F_X(l).
    Fx {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        ell: String,
        #[arg(long = "X")]
        x: f64,
    },
    /// H^q_c(kappa).
    Mertens {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        kappa: f64,
        #[arg(long = "X")]
        x: f64,
    },
    /// C(chi), the fourth-moment constant.
    Fourth {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        chi: usize,
    },
    /// D(chi, nu), the mixed second-moment constant.
    Dpair {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        nu: usize,
    },
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub worker_count: usize,
    pub cutoff: u64,
    pub csv: Option<PathBuf>,
    pub json: bool,
    pub timing: bool,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> RunConfig {
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        RunConfig {
            worker_count: cli.workers.map_or(default_workers, |w| w as usize),
            cutoff: cli.cutoff,
            csv: cli.csv.clone(),
            json: cli.json,
            timing: !cli.no_timing,
        }
    }
}

/// One output record; the CSV columns and JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub k: Option<u32>,
    pub alpha_num: Option<u64>,
    pub alpha_den: Option<u64>,
    pub q: Option<u64>,
    #[serde(rename = "X")]
    pub x: Option<f64>,
    pub value: f64,
    pub quad_err: Option<f64>,
    pub nodes: Option<u64>,
    pub seconds: f64,
}

impl Row {
    fn empty(value: f64) -> Row {
        Row {
            t: None,
            k: None,
            alpha_num: None,
            alpha_den: None,
            q: None,
            x: None,
            value,
            quad_err: None,
            nodes: None,
            seconds: 0.0,
        }
    }

    fn from_estimate(e: &MomentEstimate) -> Row {
        Row {
            t: Some(e.t),
            quad_err: Some(e.quad_error_est),
            nodes: Some(e.node_count as u64),
            seconds: e.wall_time,
            ..Row::empty(e.value)
        }
    }
}

/// Appends rows to `path`, writing the header only if the file is empty.
pub fn append_csv(path: &PathBuf, rows: &[Row]) -> Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn group_char(q: u64, index: usize) -> Result<(CharacterGroup, DirichletCharacter)> {
    let g = character_group(q)?;
    let chi = g.character(index)?.clone();
    Ok((g, chi))
}

fn tuple(q: u64, text: &str) -> Result<ExponentTuple> {
    let g = character_group(q)?;
    ExponentTuple::parse(&g, text)
}

struct Output {
    rows: Vec<Row>,
    /// `(label, value)` lines for the human table.
    table: Vec<(String, String)>,
    /// Replaces the rows in `--json` mode when set.
    json: Option<serde_json::Value>,
}

impl Output {
    fn row(row: Row) -> Output {
        Output {
            rows: vec![row],
            table: Vec::new(),
            json: None,
        }
    }

    fn with(mut self, label: &str, value: impl ToString) -> Output {
        self.table.push((label.to_string(), value.to_string()));
        self
    }
}

fn constant_output(r: ConstantResult, mut row: Row) -> Output {
    row.quad_err = Some(r.tail_bound);
    Output::row(row)
        .with("value", r.value)
        .with("tail_bound", format!("{:.3e}", r.tail_bound))
        .with("cutoff", r.cutoff)
}

fn warn(e: &MomentEstimate) {
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    if !e.converged {
        eprintln!(
            "warning: quadrature not converged ({} refinements, {} nodes dropped)",
            e.refinements, e.discarded_nodes
        );
    }
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<Output> {
    Ok(match command {
        Command::Characters {
            action: CharactersCmd::List { q },
        } => {
            let g = character_group(*q)?;
            let mut table = Vec::new();
            let mut objs = Vec::new();
            for chi in g.characters() {
                let values: Vec<String> = g
                    .units()
                    .iter()
                    .map(|&a| {
                        let p = chi.value_exponent(a).expect("unit");
                        format!("{}/{}", p.num(), p.den())
                    })
                    .collect();
                table.push((
                    format!("chi[{}]", chi.index()),
                    format!(
                        "conductor {} order {} {} {} values {}",
                        chi.conductor(),
                        chi.order(),
                        if chi.is_primitive() { "primitive" } else { "imprimitive" },
                        if chi.is_even() { "even" } else { "odd" },
                        values.join(" ")
                    ),
                ));
                objs.push(serde_json::json!({
                    "index": chi.index(),
                    "conductor": chi.conductor(),
                    "order": chi.order(),
                    "primitive": chi.is_primitive(),
                    "even": chi.is_even(),
                    "units": g.units(),
                    "value_phases": values,
                }));
            }
            Output {
                rows: Vec::new(),
                table,
                json: Some(serde_json::Value::Array(objs)),
            }
        }
        Command::Constant { which } => constant(which, cfg)?,
        Command::Moment { k, alpha, t, spec } => {
            let e = hurwitz_moment(*k, alpha.0, alpha.1, *t, &(*spec).into())?;
            warn(&e);
            let row = Row {
                k: Some(*k),
                alpha_num: Some(alpha.0),
                alpha_den: Some(alpha.1),
                q: Some(alpha.1),
                ..Row::from_estimate(&e)
            };
            Output::row(row)
                .with("M_k(T; alpha)", e.value)
                .with("mean", e.mean())
                .with("quad_err", format!("{:.3e}", e.quad_error_est))
        }
        Command::Lmoment { q, chi, k, t, spec } => {
            let (_, c) = group_char(*q, *chi)?;
            let e = l_moment(*k, &c, *t, &(*spec).into())?;
            warn(&e);
            let row = Row {
                k: Some(*k),
                q: Some(*q),
                ..Row::from_estimate(&e)
            };
            Output::row(row).with("M_k(T; chi)", e.value).with("mean", e.mean())
        }
        Command::Split {
            q,
            ell,
            x,
            t,
            variant,
            spec,
        } => {
            let ell = tuple(*q, ell)?;
            let v = match variant {
                Variant::Short => SplitVariant::ShortProduct,
                Variant::Exact => SplitVariant::Exact,
            };
            let r = splitting_ratio(&ell, *x, *t, &(*spec).into(), v)?;
            warn(&r.estimate);
            let row = Row {
                k: Some(ell.weight()),
                q: Some(*q),
                x: Some(*x),
                ..Row::from_estimate(&r.estimate)
            };
            Output::row(row)
                .with("ratio", r.ratio)
                .with("mean |L^l|^2", r.l_mean)
                .with("mean |P^l|^2", r.p_mean)
                .with("mean |Z^l|^2", r.z_mean)
        }
        Command::Zmoment { q, chi, x, t, spec } => {
            let (_, c) = group_char(*q, *chi)?;
            let e = z_mean_square(&c, *x, *t, &(*spec).into())?;
            warn(&e);
            let prediction = ((c.conductor() as f64) * t).ln()
                / (crate::arith::special::EULER_GAMMA.exp() * x.ln());
            let row = Row {
                k: Some(1),
                q: Some(*q),
                x: Some(*x),
                ..Row::from_estimate(&e)
            };
            Output::row(row)
                .with("int |Z_X|^2", e.value)
                .with("mean", e.mean())
                .with("log(q* T) / (e^gamma log X)", prediction)
                .with("ratio", e.mean() / prediction)
        }
        Command::Pmoment { q, ell, x, t, spec } => {
            let ell = tuple(*q, ell)?;
            let e = p_mean_square(&ell, *x, *t, &(*spec).into())?;
            warn(&e);
            let oracle = p_coeff_oracle(&ell, *x)?;
            let row = Row {
                k: Some(ell.weight()),
                q: Some(*q),
                x: Some(*x),
                ..Row::from_estimate(&e)
            };
            Output::row(row)
                .with("int |P*_X^l|^2", e.value)
                .with("mean", e.mean())
                .with("coefficient oracle", oracle)
        }
        Command::Predict {
            k,
            alpha,
            t,
            full,
            spec,
        } => {
            let d = diagonal_prediction(*k, alpha.0, alpha.1, *t, &(*spec).into(), *full)?;
            warn(&d.estimate);
            let row = Row {
                k: Some(*k),
                alpha_num: Some(alpha.0),
                alpha_den: Some(alpha.1),
                q: Some(alpha.1),
                ..Row::from_estimate(&d.estimate)
            };
            let mut out = Output::row(row)
                .with("prediction", d.value)
                .with("primary diagonal", d.primary_diagonal)
                .with("secondary diagonal", d.secondary_diagonal);
            if let (Some(a), Some(b), Some(f)) = (d.major_off_diagonal, d.minor_off_diagonal, d.full) {
                out = out
                    .with("major off-diagonal", a)
                    .with("minor off-diagonal", b)
                    .with("full expansion", f);
            }
            out
        }
        Command::Twisted { q, chi, x, t, theta } => {
            let (_, c) = group_char(*q, *chi)?;
            let n_max = t.powf(*theta).floor().max(1.0) as u64;
            let b = alpha_minus_one(*x, n_max)?;
            let m = twisted_main_term(*t, &c, |n| b.value(n), *theta)?;
            let target = ((*q as f64) * t).ln() / (crate::arith::special::EULER_GAMMA.exp() * x.ln());
            let row = Row {
                t: Some(*t),
                q: Some(*q),
                x: Some(*x),
                ..Row::empty(m)
            };
            Output::row(row)
                .with("M'", m)
                .with("log(qT) / (e^gamma log X)", target)
                .with("ratio", m / target)
        }
        Command::Rmt {
            m,
            n,
            x,
            samples,
            seed,
        } => {
            let start = std::time::Instant::now();
            let e = model_moment(*m, *n, *x, *samples, *seed)?;
            let p = model_prediction(*m, *n, *x)?;
            let z = if e.std_error > 0.0 {
                (e.mean - p) / e.std_error
            } else {
                0.0
            };
            let row = Row {
                k: Some(*m),
                x: Some(*x),
                quad_err: Some(e.std_error),
                nodes: Some(*samples as u64),
                seconds: start.elapsed().as_secs_f64(),
                ..Row::empty(e.mean)
            };
            let json = serde_json::json!({
                "m": m, "N": n, "X": x, "samples": samples, "seed": seed,
                "mean": e.mean, "std_error": e.std_error, "prediction": p, "z_score": z,
            });
            Output {
                json: Some(serde_json::Value::Array(vec![json])),
                ..Output::row(row)
            }
            .with("mean", e.mean)
            .with("std_error", e.std_error)
            .with("prediction", p)
            .with("z_score", z)
        }
        Command::Verify { .. } => unreachable!("handled by run"),
    })
}

fn constant(which: &ConstantCmd, cfg: &RunConfig) -> Result<Output> {
    let p = cfg.cutoff;
    Ok(match which {
        ConstantCmd::Ck { k, alpha } => {
            let r = c_k_alpha(*k, alpha.0, alpha.1, p)?;
            let row = Row {
                k: Some(*k),
                alpha_num: Some(alpha.0),
                alpha_den: Some(alpha.1),
                q: Some(alpha.1),
                ..Row::empty(r.value)
            };
            constant_output(r, row)
        }
        ConstantCmd::Cl { q, ell } => {
            let ell = tuple(*q, ell)?;
            let row = Row {
                k: Some(ell.weight()),
                q: Some(*q),
                ..Row::empty(0.0)
            };
            let r = c_ell_q(&ell, p);
            constant_output(r, Row { value: r.value, ..row })
        }
        ConstantCmd::B { q, ell } => {
            let ell = tuple(*q, ell)?;
            let r = b_ell(&ell, p);
            let row = Row {
                k: Some(ell.weight()),
                q: Some(*q),
                ..Row::empty(r.value)
            };
            constant_output(r, row)
        }
        ConstantCmd::Fx { q, ell, x } => {
            let ell = tuple(*q, ell)?;
            let r = f_x(&ell, *x, p)?;
            let row = Row {
                k: Some(ell.weight()),
                q: Some(*q),
                x: Some(*x),
                ..Row::empty(r.value)
            };
            constant_output(r, row)
        }
        ConstantCmd::Mertens { q, c, kappa, x } => {
            let r = h_qc(*q, *c, *kappa, *x, p)?;
            let literal = crate::constants::mertens_ap(*q, *c, *kappa, *x)?;
            let row = Row {
                q: Some(*q),
                x: Some(*x),
                ..Row::empty(r.value)
            };
            constant_output(r, row).with("finite product up to X", literal)
        }
        ConstantCmd::Fourth { q, chi } => {
            let (_, c) = group_char(*q, *chi)?;
            let v = c_chi_fourth(&c);
            let row = Row {
                k: Some(2),
                q: Some(*q),
                ..Row::empty(v)
            };
            Output::row(row).with("value", v)
        }
        ConstantCmd::Dpair { q, chi, nu } => {
            let (g, c) = group_char(*q, *chi)?;
            let n = g.character(*nu)?;
            let r = d_chi_nu(&c, n, p)?;
            let row = Row {
                k: Some(2),
                q: Some(*q),
                ..Row::empty(r.value)
            };
            constant_output(r, row)
        }
    })
}

fn emit(out: &Output, cfg: &RunConfig) -> Result<()> {
    let mut rows = out.rows.clone();
    if !cfg.timing {
        for r in rows.iter_mut() {
            r.seconds = 0.0;
        }
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    if cfg.json {
        match &out.json {
            Some(serde_json::Value::Array(items)) => {
                for item in items {
                    writeln!(w, "{}", serde_json::to_string(item)?)?;
                }
            }
            Some(other) => writeln!(w, "{}", serde_json::to_string(other)?)?,
            None => {
                for r in &rows {
                    writeln!(w, "{}", serde_json::to_string(r)?)?;
                }
            }
        }
    } else {
        let width = out.table.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        for (label, value) in &out.table {
            writeln!(w, "{label:<width$}  {value}")?;
        }
    }
    if let Some(path) = &cfg.csv {
        if !rows.is_empty() {
            append_csv(path, &rows)?;
        }
    }
    Ok(())
}

fn verify(suite: Suite, cfg: &RunConfig) -> Result<bool> {
    let mut reports = run_suite(suite);
    if !cfg.timing {
        for r in reports.iter_mut() {
            r.seconds = 0.0;
        }
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for r in &reports {
        if cfg.json {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        } else {
            writeln!(
                w,
                "{:<13} {:<24} {:<4} {:>8.2}s  {}",
                r.suite,
                r.check,
                if r.passed { "pass" } else { "FAIL" },
                r.seconds,
                r.detail
            )?;
        }
    }
    Ok(reports.iter().all(|r| r.passed))
}

/// Runs a parsed command line; returns the process exit status.
pub fn run(cli: Cli) -> Result<bool> {
    let cfg = RunConfig::from_cli(&cli);
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build_global()
        .map_err(|e| Error::Usage(e.to_string()))?;
    if let Command::Verify { suite } = cli.command {
        return verify(suite, &cfg);
    }
    let out = execute(&cli.command, &cfg)?;
    emit(&out, &cfg)?;
    Ok(true)
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
