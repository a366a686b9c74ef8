//! `mforest` command line: argument parsing, subcommand drivers and report
//! rendering. Exit status is 0 on success, 1 on validation errors and 2 when
//! `verify` finds a mismatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::enumerate::{forest_census, forest_cofactor_check, oracle_q, tree_cofactor_check};
use crate::forest::{block_structure, forest_accessibility_with, forest_distance};
use crate::graph::WeightedMultigraph;
use crate::indices::{classical_indices, derivative_indices, DegreeMode, IndexReport};
use crate::io::{format_number, matrix_csv, matrix_rows, parse_document, parse_endpoint, GraphDocument};
use crate::perturbation::{rank_one_certificate, EdgeIncrement, UpdateChain};
use crate::rwd::{enumerate_rwd, series_partial_sum_scaled, weight_bound, RWD_MAX_VERTICES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

/// Longest route length checked by `verify` against matrix powers.
const VERIFY_RWD_LENGTH: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "mforest", version, about = "Forest accessibilities, forest distance and sociometric indices")]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Graph file (plain edge list or JSON document).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Significant digits of numeric output (default 17).
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Accessibility matrix, det(I + alpha L), forest distance and block certificate.
    Compute(Common),
    /// Derivative (and, for digraphs, classical) sociometric indices.
    Indices {
        #[command(flatten)]
        common: Common,
        /// Use summed arc weights instead of choice presence for degrees.
        #[arg(long)]
        weighted_degrees: bool,
    },
    /// Apply edge-weight increments by rank-one updates.
    Update {
        #[command(flatten)]
        common: Common,
        /// `K T DELTA`: raise the k-t conductance by DELTA. Repeatable.
        #[arg(long = "edge", num_args = 3, value_names = ["K", "T", "DELTA"], required = true)]
        edges: Vec<String>,
        /// Full re-solve after this many chained updates.
        #[arg(long)]
        refresh: Option<usize>,
    },
    /// Series expansion of Q, its convergence bound and diagnostics.
    Series {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Cross-check the solver against brute-force enumeration.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_vertices: Option<usize>,
        #[arg(long)]
        max_edges: Option<usize>,
    },
}

/// A validation failure: message for stderr, exit status 1.
#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

/// Runs the CLI on `argv` (including the program name).
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let stream: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(CliError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Compute(common) => {
            let (_, g, cfg) = load(&common, base)?;
            out.write_all(render_compute(&g, &cfg)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Indices { common, weighted_degrees } => {
            let (_, g, cfg) = load(&common, base)?;
            let mode = if weighted_degrees { DegreeMode::Weighted } else { DegreeMode::Presence };
            out.write_all(render_indices(&g, &cfg, mode)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Update { common, edges, refresh } => {
            let (doc, g, mut cfg) = load(&common, base)?;
            if let Some(r) = refresh {
                cfg.refresh_interval = r;
            }
            let increments = parse_increments(&doc, &edges)?;
            out.write_all(render_update(&g, &cfg, &increments)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Series { common, terms } => {
            let (_, g, mut cfg) = load(&common, base)?;
            if let Some(t) = terms {
                cfg.terms = t;
            }
            out.write_all(render_series(&g, &cfg)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Verify { common, max_vertices, max_edges } => {
            let (_, g, mut cfg) = load(&common, base)?;
            if let Some(v) = max_vertices {
                cfg.limits.max_vertices = v;
            }
            if let Some(m) = max_edges {
                cfg.limits.max_edges = m;
            }
            let checks = verify_graph(&g, &cfg)?;
            for c in &checks {
                let status = match (c.informational, c.passed) {
                    (true, _) => "INFO",
                    (false, true) => "PASS",
                    (false, false) => "FAIL",
                };
                writeln!(out, "{status} {} {}", c.name, c.detail)?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                writeln!(err, "{failed} verification check(s) failed")?;
                Ok(EXIT_MISMATCH)
            } else {
                Ok(EXIT_OK)
            }
        }
    }
}

pub fn load_document(path: &Path) -> Result<GraphDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn load(common: &Common, mut cfg: RunConfig) -> Result<(GraphDocument, WeightedMultigraph, RunConfig), CliError> {
    if let Some(a) = common.alpha {
        cfg.alpha = a;
    }
    if let Some(f) = common.format {
        cfg.format = f;
    }
    if let Some(d) = common.digits {
        cfg.digits = d;
    }
    cfg.validate()?;
    let doc = load_document(&common.input)?;
    let g = doc.to_graph()?;
    Ok((doc, g, cfg))
}

fn parse_increments(doc: &GraphDocument, raw: &[String]) -> Result<Vec<EdgeIncrement>, CliError> {
    raw.chunks(3)
        .map(|c| {
            let k = doc.vertex(&parse_endpoint(&c[0]))?;
            let t = doc.vertex(&parse_endpoint(&c[1]))?;
            let delta: f64 = c[2].parse().map_err(|_| CliError(format!("invalid increment {:?}", c[2])))?;
            Ok(EdgeIncrement::new(k, t, delta)?)
        })
        .collect()
}

fn labels(g: &WeightedMultigraph) -> Vec<String> {
    (0..g.n()).map(|v| g.label(v)).collect()
}

fn num(x: f64, cfg: &RunConfig) -> String {
    format_number(x, cfg.digits)
}

/// `x` rounded to the configured digits, for JSON output.
fn rounded(x: f64, cfg: &RunConfig) -> f64 {
    if cfg.digits >= crate::io::FULL_DIGITS {
        x
    } else {
        num(x, cfg).parse().unwrap_or(x)
    }
}

fn rounded_rows(m: &DMatrix<f64>, cfg: &RunConfig) -> Vec<Vec<f64>> {
    matrix_rows(&m.map(|x| rounded(x, cfg)))
}

fn rounded_vec(v: &[f64], cfg: &RunConfig) -> Vec<f64> {
    v.iter().map(|&x| rounded(x, cfg)).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ComputeJson {
    labels: Vec<String>,
    alpha: f64,
    det_w: f64,
    q: Vec<Vec<f64>>,
    d: Option<Vec<Vec<f64>>>,
    block_structure: Option<bool>,
}

pub fn render_compute(g: &WeightedMultigraph, cfg: &RunConfig) -> Result<String, CliError> {
    let acc = forest_accessibility_with(&g.kirchhoff(), cfg.alpha, &cfg.tolerances)?;
    let (dist, blocks) = if g.is_directed() {
        (None, None)
    } else {
        let d = forest_distance(&acc)?;
        let b = block_structure(&acc, &g.components(), cfg.tolerances.structural_zero)?;
        (Some(d), Some(b))
    };
    let labels = labels(g);
    Ok(match cfg.format {
        OutputFormat::Csv => {
            let mut s = format!("# Q\n{}", matrix_csv(acc.q(), &labels, cfg.digits));
            s += &format!("# det_w\n{}\n", num(acc.det_w(), cfg));
            if let (Some(d), Some(b)) = (dist, blocks) {
                s += &format!("# d\n{}", matrix_csv(d.matrix(), &labels, cfg.digits));
                s += &format!("# block_structure\n{b}\n");
            }
            s
        }
        OutputFormat::Json => to_json(&ComputeJson {
            labels,
            alpha: acc.alpha(),
            det_w: rounded(acc.det_w(), cfg),
            q: rounded_rows(acc.q(), cfg),
            d: dist.map(|d| rounded_rows(d.matrix(), cfg)),
            block_structure: blocks,
        }),
    })
}

pub fn index_report(g: &WeightedMultigraph, cfg: &RunConfig, mode: DegreeMode) -> Result<IndexReport, CliError> {
    let acc = forest_accessibility_with(&g.kirchhoff(), cfg.alpha, &cfg.tolerances)?;
    let classical = if g.is_directed() { Some(classical_indices(g, mode)?) } else { None };
    Ok(IndexReport { derivative: Some(derivative_indices(&acc)), classical })
}

pub fn render_indices(g: &WeightedMultigraph, cfg: &RunConfig, mode: DegreeMode) -> Result<String, CliError> {
    let mut report = index_report(g, cfg, mode)?;
    if cfg.format == OutputFormat::Json {
        if let Some(d) = &mut report.derivative {
            d.solitariness = rounded_vec(&d.solitariness, cfg);
            d.provinciality_ratio = rounded_vec(&d.provinciality_ratio, cfg);
            d.provinciality_diff = rounded_vec(&d.provinciality_diff, cfg);
            d.dissociation = rounded(d.dissociation, cfg);
            d.heterogeneity = rounded(d.heterogeneity, cfg);
        }
        if let Some(c) = &mut report.classical {
            c.status = rounded_vec(&c.status, cfg);
            c.effusiveness = rounded_vec(&c.effusiveness, cfg);
            c.reciprocity = rounded_vec(&c.reciprocity, cfg);
            c.reciprocity_per_choice = rounded_vec(&c.reciprocity_per_choice, cfg);
            c.density = rounded(c.density, cfg);
            c.cohesion = rounded(c.cohesion, cfg);
            c.status_heterogeneity = rounded(c.status_heterogeneity, cfg);
        }
        return Ok(to_json(&report));
    }
    let d = report.derivative.expect("always computed");
    let mut s = String::from("vertex,solitariness,provinciality_ratio,provinciality_diff");
    if report.classical.is_some() {
        s += ",status,effusiveness,reciprocity";
    }
    s.push('\n');
    for v in 0..g.n() {
        s += &format!(
            "{},{},{},{}",
            g.label(v),
            num(d.solitariness[v], cfg),
            num(d.provinciality_ratio[v], cfg),
            num(d.provinciality_diff[v], cfg)
        );
        if let Some(c) = &report.classical {
            s += &format!(",{},{},{}", num(c.status[v], cfg), num(c.effusiveness[v], cfg), num(c.reciprocity[v], cfg));
        }
        s.push('\n');
    }
    s += "# group\n";
    s += &format!("alpha,{}\n", num(d.alpha, cfg));
    s += &format!("directed,{}\n", d.directed);
    s += &format!("dissociation,{}\n", num(d.dissociation, cfg));
    s += &format!("heterogeneity,{}\n", num(d.heterogeneity, cfg));
    if let Some(c) = &report.classical {
        s += &format!("density,{}\n", num(c.density, cfg));
        s += &format!("cohesion,{}\n", num(c.cohesion, cfg));
        s += &format!("status_heterogeneity,{}\n", num(c.status_heterogeneity, cfg));
        s += &format!("normalization,{}\n", num(c.normalization, cfg));
    }
    Ok(s)
}

#[derive(Serialize)]
struct IncrementJson {
    k: usize,
    t: usize,
    delta: f64,
    h: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    delta_q: Vec<Vec<f64>>,
    delta_d: Vec<Vec<f64>>,
    rank_one: bool,
}

#[derive(Serialize)]
struct UpdateJson {
    labels: Vec<String>,
    alpha: f64,
    q_before: Vec<Vec<f64>>,
    increments: Vec<IncrementJson>,
    q_after: Vec<Vec<f64>>,
    d_after: Vec<Vec<f64>>,
}

pub fn render_update(
    g: &WeightedMultigraph,
    cfg: &RunConfig,
    increments: &[EdgeIncrement],
) -> Result<String, CliError> {
    let mut chain = UpdateChain::new(g.clone(), cfg.alpha, cfg.tolerances, cfg.refresh_interval)?;
    let before = chain.accessibility().q().clone();
    let mut reports = Vec::new();
    for inc in increments {
        reports.push(chain.apply(inc)?);
    }
    let labels = labels(g);
    let after = chain.accessibility().q();
    let d_after = chain.distance().matrix();
    Ok(match cfg.format {
        OutputFormat::Csv => {
            let mut s = format!("# Q before\n{}", matrix_csv(&before, &labels, cfg.digits));
            for r in &reports {
                let inc = r.increment;
                s += &format!(
                    "# increment {} {} {}\nh,{}\nrank_one,{}\n",
                    labels[inc.k()],
                    labels[inc.t()],
                    num(inc.delta(), cfg),
                    num(r.h, cfg),
                    rank_one_certificate(r, cfg.rank_one_tol)
                );
                s += &format!("# delta_q\n{}", matrix_csv(&r.delta_q, &labels, cfg.digits));
                s += &format!("# delta_d\n{}", matrix_csv(&r.delta_d, &labels, cfg.digits));
            }
            s += &format!("# Q after\n{}", matrix_csv(after, &labels, cfg.digits));
            s += &format!("# d after\n{}", matrix_csv(d_after, &labels, cfg.digits));
            s
        }
        OutputFormat::Json => to_json(&UpdateJson {
            labels,
            alpha: cfg.alpha,
            q_before: rounded_rows(&before, cfg),
            increments: reports
                .iter()
                .map(|r| IncrementJson {
                    k: r.increment.k(),
                    t: r.increment.t(),
                    delta: r.increment.delta(),
                    h: rounded(r.h, cfg),
                    left: rounded_vec(r.left.as_slice(), cfg),
                    right: rounded_vec(r.right.as_slice(), cfg),
                    delta_q: rounded_rows(&r.delta_q, cfg),
                    delta_d: rounded_rows(&r.delta_d, cfg),
                    rank_one: rank_one_certificate(r, cfg.rank_one_tol),
                })
                .collect(),
            q_after: rounded_rows(after, cfg),
            d_after: rounded_rows(d_after, cfg),
        }),
    })
}

#[derive(Serialize)]
struct SeriesJson {
    labels: Vec<String>,
    alpha: f64,
    terms: usize,
    weight_bound: Option<f64>,
    scaled_weight_bound: Option<f64>,
    max_multiplicity: usize,
    edges_within_bound: bool,
    gershgorin_radius: f64,
    spectrally_safe: bool,
    terms_nondecreasing: bool,
    term_norms: Vec<f64>,
    partial_sum: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    max_abs_error: f64,
}

pub fn render_series(g: &WeightedMultigraph, cfg: &RunConfig) -> Result<String, CliError> {
    let bound = weight_bound(g);
    let l = g.kirchhoff();
    let series = series_partial_sum_scaled(&l, cfg.alpha, cfg.terms);
    let acc = forest_accessibility_with(&l, cfg.alpha, &cfg.tolerances)?;
    let error = (&series.sum - acc.q()).amax();
    let scaled_bound = bound.bound.map(|b| b / cfg.alpha);
    let edges_within = match scaled_bound {
        Some(b) => bound.max_edge_weight < b,
        None => true,
    };
    let labels = labels(g);
    let opt = |x: Option<f64>| x.map_or("unbounded".to_string(), |b| num(b, cfg));
    Ok(match cfg.format {
        OutputFormat::Csv => {
            let mut s = String::from("# bound\n");
            s += &format!("weight_bound,{}\n", opt(bound.bound));
            s += &format!("scaled_weight_bound,{}\n", opt(scaled_bound));
            s += &format!("max_multiplicity,{}\n", bound.max_multiplicity);
            s += &format!("edges_within_bound,{edges_within}\n");
            s += &format!("gershgorin_radius,{}\n", num(series.gershgorin_radius, cfg));
            s += &format!("spectrally_safe,{}\n", series.spectrally_safe());
            s += &format!("terms_nondecreasing,{}\n", series.terms_nondecreasing());
            s += &format!("max_abs_error,{}\n", num(error, cfg));
            s += "# term_norms\n";
            for (t, norm) in series.term_norms.iter().enumerate() {
                s += &format!("{t},{}\n", num(*norm, cfg));
            }
            s += &format!("# partial_sum\n{}", matrix_csv(&series.sum, &labels, cfg.digits));
            s += &format!("# Q\n{}", matrix_csv(acc.q(), &labels, cfg.digits));
            s
        }
        OutputFormat::Json => to_json(&SeriesJson {
            labels,
            alpha: cfg.alpha,
            terms: cfg.terms,
            weight_bound: bound.bound,
            scaled_weight_bound: scaled_bound,
            max_multiplicity: bound.max_multiplicity,
            edges_within_bound: edges_within,
            gershgorin_radius: rounded(series.gershgorin_radius, cfg),
            spectrally_safe: series.spectrally_safe(),
            terms_nondecreasing: series.terms_nondecreasing(),
            term_norms: rounded_vec(&series.term_norms, cfg),
            partial_sum: rounded_rows(&series.sum, cfg),
            q: rounded_rows(acc.q(), cfg),
            max_abs_error: rounded(error, cfg),
        }),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Reported for information only; never fails verification.
    pub informational: bool,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail, informational: false }
}

fn info(name: &'static str, detail: String) -> Check {
    Check { name, passed: true, detail, informational: true }
}

/// The oracle suite behind `verify`: enumeration against the solver plus
/// the structural properties of the accessibility matrix.
pub fn verify_graph(g: &WeightedMultigraph, cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let tol = cfg.tolerances.stochastic;
    let mut checks = Vec::new();
    let acc = forest_accessibility_with(&g.kirchhoff(), cfg.alpha, &cfg.tolerances)?;
    // alpha-scaled forests are the forests of the graph with scaled weights.
    let scaled = g.scaled(cfg.alpha)?;
    let oracle = oracle_q(&scaled, &cfg.limits)?;
    let dev = (acc.q() - &oracle).amax();
    checks.push(check("matrix_forest_theorem", dev <= tol, format!("max|Q - oracle| = {dev:e}")));

    let census = forest_census(&scaled, &cfg.limits)?;
    let rel = (acc.det_w() - census.total_weight).abs() / census.total_weight;
    checks.push(check(
        "det_equals_forest_weight",
        rel <= tol,
        format!("det = {}, forests = {}", acc.det_w(), census.total_weight),
    ));

    let lemma = forest_cofactor_check(&scaled, &cfg.limits, tol)?;
    checks.push(check("forest_cofactors", lemma.passed, format!("max deviation {:e}", lemma.max_cofactor_deviation)));

    let trees = tree_cofactor_check(&scaled, &cfg.limits, tol)?;
    checks.push(check("tree_cofactors", trees.passed, format!("max deviation {:e}", trees.max_deviation)));

    checks.push(check(
        "stochastic",
        acc.is_stochastic(tol),
        format!(
            "row {:e}, column {:e}, asymmetry {:e}, min {:e}",
            acc.max_row_sum_error(),
            acc.max_column_sum_error(),
            acc.max_asymmetry(),
            acc.min_entry()
        ),
    ));

    if g.is_directed() {
        // Diagonal dominance is only guaranteed for undirected graphs.
        checks.push(info("diagonal_dominance", format!("margin {:e}", acc.diagonal_dominance_margin())));
    } else {
        let margin = acc.diagonal_dominance_margin();
        checks.push(check("diagonal_dominance", g.n() == 1 || margin > 0.0, format!("margin {margin:e}")));
        let blocks = block_structure(&acc, &g.components(), cfg.tolerances.structural_zero)?;
        checks.push(check("block_structure", blocks, format!("{} component(s)", g.components().len())));
        let d = forest_distance(&acc)?;
        checks.push(check(
            "metric_axioms",
            d.satisfies_metric_axioms(tol),
            format!("triangle violation {:e}", d.max_triangle_violation().max(0.0)),
        ));
    }

    if g.n() <= RWD_MAX_VERTICES {
        let m = g.kirchhoff().matrix() * (-cfg.alpha);
        let mut power = DMatrix::<f64>::identity(g.n(), g.n());
        let mut worst: f64 = 0.0;
        for t in 0..=VERIFY_RWD_LENGTH {
            for i in 0..g.n() {
                for j in 0..g.n() {
                    let c = enumerate_rwd(&scaled, i, j, t)?;
                    worst = worst.max((c.signed() - power[(i, j)]).abs() / power[(i, j)].abs().max(1.0));
                }
            }
            power = &power * &m;
        }
        checks.push(check(
            "routes_with_drains",
            worst <= tol,
            format!("max deviation {worst:e} up to length {VERIFY_RWD_LENGTH}"),
        ));
    }
    Ok(checks)
}
