//! Subcommand definitions and dispatch.

use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use mse_core::blowdown::{self, ConvergenceConfig, LevelSetConfig, VelocityConfig};
use mse_core::bounds::{self, AdmissibleTriple, QuadraticSurd};
use mse_core::isoparametric::{self, ExceptionalLink};
use mse_core::ops::{self, OpsError};
use mse_core::poly::{parse, parse_rational, Field, Polynomial, SamplerConfig};
use mse_core::search::{self, Classification};
use mse_core::structure::{self, FactoredLeading, Verdict};

use crate::config::parse_search_file;
use crate::manifest::{to_csv, to_json, RunManifest};

#[derive(Parser, Debug)]
#[command(
    name = "msepoly",
    version,
    about = "Exact polynomial tools for the minimal surface equation"
)]
pub struct Cli {
    /// Record wall time in the manifest (reruns are then no longer byte-identical).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// L(P) = |grad P|^2 ΔP - Σ P_i P_j P_ij.
    ApplyL(PolyArgs),
    /// ΔP + L(P) and its graded components.
    Residual(PolyArgs),
    /// The graded system E_0, ..., E_{3m-4}.
    Grade(PolyArgs),
    /// λ with L(P) = λ |x|^{2(m-2)} P, if any.
    Eigen(PolyArgs),
    /// Structure checks on P_m = p^k Q_m.
    CheckStructure(StructureArgs),
    /// Degree window μ± and admissible (m, k, deg p, deg Q_m).
    Bounds(BoundsArgs),
    /// Cartan-Münzner checks, catalog entries and exclusion cases.
    Isopara(IsoArgs),
    /// The arithmetic chain on R^8.
    R8,
    /// Convergence of translated blow-downs (CSV).
    Blowdown(BlowdownArgs),
    /// Least-squares search driven by a flat config file.
    Search(SearchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Serialize)]
pub struct PolyArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long)]
    pub n: usize,
    /// `q` or `qsqrt:<d>`.
    #[arg(long, default_value = "q")]
    pub field: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug, Serialize)]
pub struct StructureArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub qm: String,
    /// Full polynomial P whose lower-order chain is checked (needs k >= 3).
    #[arg(long)]
    pub full: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: i64,
    #[arg(long)]
    pub enumerate: bool,
    #[arg(long, default_value_t = 9)]
    pub k_max: u32,
    #[arg(long, default_value_t = 40)]
    pub m_max: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum LinkTag {
    S1xs5,
    So8xso2,
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false, id = "mode")]
pub struct IsoMode {
    /// Check the Cartan-Münzner identities for --poly.
    #[arg(long)]
    pub check_cm: bool,
    /// Run the exclusion analysis for g in {1, 2, 3, 4, 6}.
    #[arg(long)]
    pub case: Option<u32>,
    /// Catalog entry for (g, l) = (--catalog, --l).
    #[arg(long)]
    pub catalog: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct IsoArgs {
    #[command(flatten)]
    pub mode: IsoMode,
    #[arg(long, required_if_eq("check_cm", "true"))]
    pub poly: Option<String>,
    #[arg(long, required_if_eq("check_cm", "true"))]
    pub n: Option<usize>,
    #[arg(long, default_value = "q")]
    pub field: String,
    #[arg(long, requires = "catalog")]
    pub l: Option<i64>,
    #[arg(long, value_enum, requires = "catalog")]
    pub tag: Option<LinkTag>,
}

#[derive(Args, Debug, Serialize)]
pub struct BlowdownArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: String,
    /// Strictly decreasing rationals.
    #[arg(long, default_value = "1,1/2,1/4,1/8,1/16")]
    pub lambdas: String,
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 400)]
    pub lines: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Emit the velocity table on {P_m = t} instead of the convergence table.
    #[arg(long)]
    pub velocity: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub config: std::path::PathBuf,
    /// Overrides the config file's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config file's restart count.
    #[arg(long)]
    pub restarts: Option<usize>,
}

pub enum Failure {
    Input(String),
    Internal(String),
}

pub struct Done {
    pub output: String,
    pub code: u8,
}

impl Done {
    fn ok(output: String) -> Self {
        Done { output, code: 0 }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn ops_failure(e: OpsError) -> Failure {
    match e {
        OpsError::Invariant(msg) => Failure::Internal(msg),
        other => input(other),
    }
}

struct Context {
    start: Instant,
    timing: bool,
}

impl Context {
    fn manifest(
        &self,
        command: &str,
        config: impl Serialize,
        seed: Option<u64>,
        inputs: Vec<String>,
    ) -> RunManifest {
        let mut m = RunManifest::new(command, config, seed, inputs);
        if self.timing {
            m.wall_time_ms = Some(self.start.elapsed().as_millis());
        }
        m
    }
}

fn parse_field(text: &str) -> Result<Field, Failure> {
    if text == "q" {
        return Ok(Field::Rational);
    }
    let d = text
        .strip_prefix("qsqrt:")
        .and_then(|d| d.parse::<u64>().ok())
        .ok_or_else(|| Failure::Input(format!("field must be q or qsqrt:<d>, got {text:?}")))?;
    Field::quadratic(d).map_err(input)
}

fn parse_poly(text: &str, n: usize, field: Field) -> Result<Polynomial, Failure> {
    parse(text, n, field).map_err(|e| Failure::Input(format!("{text:?}: {e}")))
}

fn parse_rat(text: &str) -> Result<BigRational, Failure> {
    parse_rational(text.trim()).ok_or_else(|| Failure::Input(format!("not a rational: {text:?}")))
}

pub fn run(cli: &Cli) -> Result<Done, Failure> {
    let ctx = Context {
        start: Instant::now(),
        timing: cli.timing,
    };
    match &cli.command {
        Command::ApplyL(a) => apply_l(&ctx, a),
        Command::Residual(a) => residual(&ctx, a),
        Command::Grade(a) => grade(&ctx, a),
        Command::Eigen(a) => eigen(&ctx, a),
        Command::CheckStructure(a) => check_structure(&ctx, a),
        Command::Bounds(a) => bounds_cmd(&ctx, a),
        Command::Isopara(a) => isopara(&ctx, a),
        Command::R8 => {
            let m = ctx.manifest("r8", serde_json::json!({}), None, vec![]);
            Ok(Done::ok(to_json(&m, &bounds::r8_chain())))
        }
        Command::Blowdown(a) => blowdown_cmd(&ctx, a),
        Command::Search(a) => search_cmd(&ctx, a),
    }
}

#[derive(Serialize)]
struct PolyResult {
    #[serde(serialize_with = "mse_core::report::serialize_display")]
    result: Polynomial,
}

fn apply_l(ctx: &Context, a: &PolyArgs) -> Result<Done, Failure> {
    let p = parse_poly(&a.poly, a.n, parse_field(&a.field)?)?;
    let l = ops::l_operator(&p);
    Ok(Done::ok(match a.format {
        Format::Text => format!("{l}\n"),
        Format::Json => to_json(
            &ctx.manifest("apply-l", a, None, vec![a.poly.clone()]),
            &PolyResult { result: l },
        ),
    }))
}

#[derive(Serialize)]
struct ResidualReport {
    #[serde(serialize_with = "mse_core::report::serialize_display")]
    residual: Polynomial,
    graded: Vec<ops::GradedEquation>,
}

fn residual(ctx: &Context, a: &PolyArgs) -> Result<Done, Failure> {
    let p = parse_poly(&a.poly, a.n, parse_field(&a.field)?)?;
    let r = ops::mse_residual(&p);
    let graded = if p.degree().is_some_and(|d| d >= 2) && p.constant_term().is_zero() {
        let sys = ops::graded_mse_system(&p).map_err(ops_failure)?;
        if sys.reassemble(p.n(), p.field()) != r {
            return Err(Failure::Internal(
                "graded components do not sum to the residual".into(),
            ));
        }
        sys.surviving().cloned().collect()
    } else {
        vec![]
    };
    Ok(Done::ok(match a.format {
        Format::Text => {
            let mut s = format!("{r}\n");
            for e in &graded {
                s.push_str(&format!("E_{}: {}\n", e.degree, e.equation));
            }
            s
        }
        Format::Json => to_json(
            &ctx.manifest("residual", a, None, vec![a.poly.clone()]),
            &ResidualReport {
                residual: r,
                graded,
            },
        ),
    }))
}

fn grade(ctx: &Context, a: &PolyArgs) -> Result<Done, Failure> {
    let p = parse_poly(&a.poly, a.n, parse_field(&a.field)?)?;
    let sys = ops::graded_mse_system(&p).map_err(ops_failure)?;
    Ok(Done::ok(match a.format {
        Format::Text => sys
            .equations
            .iter()
            .map(|e| format!("E_{}: {}\n", e.degree, e.equation))
            .collect(),
        Format::Json => to_json(&ctx.manifest("grade", a, None, vec![a.poly.clone()]), &sys),
    }))
}

#[derive(Serialize)]
struct EigenReport {
    #[serde(serialize_with = "serialize_opt_display")]
    lambda: Option<mse_core::Coefficient>,
}

fn serialize_opt_display<T: std::fmt::Display, S: serde::Serializer>(
    v: &Option<T>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.collect_str(x),
        None => s.serialize_none(),
    }
}

fn eigen(ctx: &Context, a: &PolyArgs) -> Result<Done, Failure> {
    let p = parse_poly(&a.poly, a.n, parse_field(&a.field)?)?;
    let lambda = ops::eigen_relation(&p).map_err(ops_failure)?;
    Ok(Done::ok(match a.format {
        Format::Text => match &lambda {
            Some(l) => format!("{l}\n"),
            None => "none\n".to_string(),
        },
        Format::Json => to_json(
            &ctx.manifest("eigen", a, None, vec![a.poly.clone()]),
            &EigenReport { lambda },
        ),
    }))
}

fn check_structure(ctx: &Context, a: &StructureArgs) -> Result<Done, Failure> {
    let p = parse_poly(&a.p, a.n, Field::Rational)?;
    let qm = parse_poly(&a.qm, a.n, Field::Rational)?;
    let fl = FactoredLeading::new(p, a.k, qm).map_err(input)?;
    let cfg = SamplerConfig {
        samples: a.samples,
        seed: a.seed,
    };
    let mut report = structure::check_leading(&fl, cfg).map_err(input)?;
    let mut inputs = vec![a.p.clone(), a.qm.clone()];
    if let Some(full) = &a.full {
        let full_p = parse_poly(full, a.n, Field::Rational)?;
        let chain = structure::check_lower_order(&full_p, &fl).map_err(input)?;
        report = report.with_lower_order(chain);
        inputs.push(full.clone());
    }
    let code = if report.verdict == Verdict::Inconclusive {
        3
    } else {
        0
    };
    let m = ctx.manifest("check-structure", a, Some(a.seed), inputs);
    Ok(Done {
        output: to_json(&m, &report),
        code,
    })
}

#[derive(Serialize)]
struct BoundsReport {
    n: i64,
    mu_minus: QuadraticSurd,
    mu_plus: QuadraticSurd,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissible: Option<Vec<AdmissibleTriple>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimum_m: Option<u32>,
}

fn bounds_cmd(ctx: &Context, a: &BoundsArgs) -> Result<Done, Failure> {
    let (mu_minus, mu_plus) = bounds::mu_bounds(a.n).map_err(input)?;
    let admissible = if a.enumerate {
        Some(bounds::enumerate_admissible(a.n, a.k_max, a.m_max).map_err(input)?)
    } else {
        None
    };
    let minimum_m = admissible.as_ref().and_then(|v| v.first().map(|t| t.m));
    let report = BoundsReport {
        n: a.n,
        mu_minus,
        mu_plus,
        admissible,
        minimum_m,
    };
    Ok(Done::ok(to_json(
        &ctx.manifest("bounds", a, None, vec![]),
        &report,
    )))
}

fn isopara(ctx: &Context, a: &IsoArgs) -> Result<Done, Failure> {
    let mut inputs = vec![];
    let output = if a.mode.check_cm {
        let (text, n) = (a.poly.as_ref().expect("required"), a.n.expect("required"));
        let p = parse_poly(text, n, parse_field(&a.field)?)?;
        inputs.push(text.clone());
        let report = isoparametric::cartan_munzner_check(&p).map_err(input)?;
        to_json(&ctx.manifest("isopara", a, None, inputs), &report)
    } else if let Some(g) = a.mode.case {
        let report = isoparametric::exclusion_case(g).map_err(input)?;
        to_json(&ctx.manifest("isopara", a, None, inputs), &report)
    } else {
        let g = a.mode.catalog.expect("group requires a mode");
        let l =
            a.l.ok_or_else(|| Failure::Input("--catalog needs --l".into()))?;
        let tag = a.tag.map(|t| match t {
            LinkTag::S1xs5 => ExceptionalLink::S1xS5,
            LinkTag::So8xso2 => ExceptionalLink::SO8xSO2,
        });
        let report = isoparametric::catalog(g, l, tag).map_err(input)?;
        to_json(&ctx.manifest("isopara", a, None, inputs), &report)
    };
    Ok(Done::ok(output))
}

fn blowdown_cmd(ctx: &Context, a: &BlowdownArgs) -> Result<Done, Failure> {
    let p = parse_poly(&a.poly, a.n, Field::Rational)?;
    let t = parse_rat(&a.t)?;
    let lambdas = a
        .lambdas
        .split(',')
        .map(parse_rat)
        .collect::<Result<Vec<_>, _>>()?;
    let level = LevelSetConfig {
        lines: a.lines,
        radius: a.radius,
        seed: a.seed,
        ..Default::default()
    };
    let m = ctx.manifest("blowdown", a, Some(a.seed), vec![a.poly.clone()]);
    if a.velocity {
        use num_traits::ToPrimitive;
        let tf = t.to_f64().unwrap_or(f64::NAN);
        let pm = p.homogeneous_component(p.degree().unwrap_or(0));
        let points: Vec<Vec<f64>> = blowdown::level_set_sample(&pm, tf, &level)
            .into_iter()
            .map(|lp| lp.point)
            .collect();
        let report = blowdown::velocity_lemma_check(&p, tf, &points, &VelocityConfig::default())
            .map_err(input)?;
        return Ok(Done::ok(match a.format {
            TableFormat::Csv => to_csv(&m, &report.to_csv()),
            TableFormat::Json => to_json(&m, &report),
        }));
    }
    let cfg = ConvergenceConfig {
        radius: a.radius,
        level,
        ..Default::default()
    };
    let report = blowdown::convergence_report(&p, &t, &lambdas, &cfg).map_err(input)?;
    let code = if report.non_increasing { 0 } else { 3 };
    Ok(Done {
        output: match a.format {
            TableFormat::Csv => to_csv(&m, &report.to_csv()),
            TableFormat::Json => to_json(&m, &report),
        },
        code,
    })
}

fn search_cmd(ctx: &Context, a: &SearchArgs) -> Result<Done, Failure> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.config.display())))?;
    let mut file = parse_search_file(&text).map_err(Failure::Input)?;
    if let Some(seed) = a.seed {
        file.search.seed = seed;
    }
    if let Some(r) = a.restarts {
        file.search.restarts = r;
    }
    let ansatz = file.ansatz().map_err(Failure::Input)?;
    let outcome = search::search(&ansatz, file.target, &file.search);
    let check = search::residual(&ansatz, &outcome.coefficients, file.target).map_err(input)?;
    if (check - outcome.best_residual).abs() > 1e-12 * outcome.best_residual.max(1.0) {
        return Err(Failure::Internal(
            "reported residual does not re-evaluate".into(),
        ));
    }
    let code = if outcome.classification == Classification::Inconclusive {
        3
    } else {
        0
    };
    let m = ctx.manifest("search", &file, Some(file.search.seed), vec![text]);
    Ok(Done {
        output: to_json(&m, &outcome),
        code,
    })
}
