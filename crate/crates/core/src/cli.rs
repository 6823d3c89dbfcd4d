//! Command-line front end. [`run`] parses arguments and returns the exit code with
//! the rendered output, so the binary is a thin wrapper.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{self, CalculusError, FourierSymbol, NumericMatrix, Verdict, MAX_NODES};
use crate::catalog;
use crate::demo::{demo_e2_blowup, DemoConfig};
use crate::lie::{LieAlgebra, LieAlgebraSpec, LieError};
use crate::ncfunc::{CompactBox, FunctionMode, NCFunctionElement, NcError, NcSpec};
use crate::pbw::{MultiIndex, PbwAlgebra, PbwError, UEAElement};
use crate::poly::{Polynomial, PolynomialSpec};
use crate::reps::{build_adapted_system, catalog_system, tilde_pi, AdaptedSystem, RepError};
use crate::scalar::Scalar;
use crate::seminorm_lab::{rho_embed, verify_domination, MatrixNorm, SeminormError, SeminormSpec};
use crate::sheaf::{glue, region_dim, GlueOutcome, LocalSection, OpenRegion, RegionSpec, SheafError};

pub const MAX_S: f64 = 1e6;
pub const MAX_SAMPLES: usize = 4096;
pub const MAX_ORDER: u32 = 12;
pub const MAX_M: u32 = 16;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{name} = {value} exceeds the cap {cap}")]
    Budget { name: &'static str, value: String, cap: String },
    #[error("format {0} is not available for this command")]
    Format(&'static str),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Pbw(#[from] PbwError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Nc(#[from] NcError),
    #[error(transparent)]
    Seminorm(#[from] SeminormError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Input(_) => "input",
            CliError::Budget { .. } => "budget",
            CliError::Format(_) => "format",
            CliError::Lie(_) => "lie",
            CliError::Pbw(_) => "pbw",
            CliError::Rep(_) => "representation",
            CliError::Nc(_) => "ncfunc",
            CliError::Seminorm(_) => "seminorm",
            CliError::Calculus(_) => "calculus",
            CliError::Sheaf(_) => "sheaf",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CalculusKind {
    Ordered,
    Weyl,
    Taylor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Window {
    Gaussian,
    Cutoff,
}

#[derive(Debug, Parser)]
#[command(name = "trilie", version, about = "Exact tooling for smooth functions of noncommuting variables over triangular Lie algebras")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Seed for randomly generated elements.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Clone)]
pub struct AlgebraArg {
    /// Lie algebra JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Catalog name: abelian:<m>, af1, heisenberg, heisenberg-c, e2, tri:<p>.
    #[arg(long)]
    pub algebra: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct ElementArgs {
    #[command(flatten)]
    pub alg: AlgebraArg,
    /// Element in PBW text form; random when omitted.
    #[arg(long)]
    pub element: Option<String>,
    /// Truncation order of the nilpotent part.
    #[arg(long = "n-trunc", default_value_t = 3)]
    pub n_trunc: u32,
    /// Box `lo:hi,...` in the complement variables; defaults to `[-1,1]^k`.
    #[arg(long = "box")]
    pub region: Option<String>,
    /// Derivative order of the seminorm.
    #[arg(long, default_value_t = 0)]
    pub order: u32,
    #[arg(long, default_value = "row")]
    pub norm: MatrixNorm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jacobi identity, solvability, nilpotency and the triangular flag.
    Check(AlgebraArg),
    /// Product of PBW expressions, optionally truncated in the nilpotent degree.
    Mul {
        #[command(flatten)]
        alg: AlgebraArg,
        #[arg(required = true)]
        factors: Vec<String>,
        #[arg(long = "n-trunc")]
        n_trunc: Option<u32>,
    },
    /// Adapted system of representations.
    Adapt(AlgebraArg),
    /// Tensor representation for a multi-index and optionally the matrix function of an element.
    Rep {
        #[command(flatten)]
        alg: AlgebraArg,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        element: Option<String>,
    },
    /// Coefficient seminorms and representation seminorms of an element.
    Seminorm(ElementArgs),
    /// Domination of a coefficient seminorm by representation seminorms.
    Dominate {
        #[command(flatten)]
        args: ElementArgs,
        #[arg(long)]
        beta: String,
    },
    /// Fit of `||exp(isb)||` against `(1+|s|)^alpha`.
    Growth {
        /// JSON matrix, file, `jordan:<d>` or `rotation`.
        #[arg(long)]
        matrix: String,
        #[arg(long = "s-max", default_value_t = 1000.0)]
        s_max: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value = "op2")]
        norm: MatrixNorm,
    },
    /// Resolvent norms approaching and leaving the real axis.
    Resolvent {
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 25)]
        points: usize,
    },
    /// Functional calculus of a tuple of matrices.
    Fc {
        /// JSON list of matrices or a file.
        #[arg(long)]
        matrices: String,
        #[arg(long, value_enum, default_value_t = CalculusKind::Ordered)]
        calculus: CalculusKind,
        /// Polynomial factor as JSON `{"e1,e2": "c"}`; constant 1 when omitted.
        #[arg(long)]
        poly: Option<String>,
        #[arg(long, value_enum, default_value_t = Window::Gaussian)]
        window: Window,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = MAX_NODES)]
        nodes: usize,
    },
    /// Gluing of local sections described by a cover file.
    Sheaf {
        #[arg(long)]
        input: PathBuf,
    },
    /// Approximation of `1/(z^2+1)` and the growth of the commutator coefficient.
    DemoE2 {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 4, 8])]
        m: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<u32>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Include wall-clock times (not byte-reproducible).
        #[arg(long)]
        timings: bool,
    },
}

/// Rendered result of one command.
#[derive(Debug, Default)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub csv: Option<String>,
}

impl Report {
    fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Text => Ok(self.text.clone()),
            OutputFormat::Json => Ok(serde_json::to_string_pretty(&self.json).expect("serializable") + "\n"),
            OutputFormat::Csv => self.csv.clone().ok_or(CliError::Format("csv")),
        }
    }
}

/// Exit code with captured streams.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            return failure(&err);
        }
    };
    match execute(&cfg).and_then(|r| r.render(cfg.format)) {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(e) => failure(&e),
    }
}

fn failure(e: &CliError) -> Outcome {
    Outcome { code: e.exit_code(), stdout: String::new(), stderr: e.to_json().to_string() + "\n" }
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match &cfg.command {
        Command::Check(a) => check(a),
        Command::Mul { alg, factors, n_trunc } => mul(alg, factors, *n_trunc),
        Command::Adapt(a) => adapt(a),
        Command::Rep { alg, beta, element } => rep(alg, beta, element.as_deref()),
        Command::Seminorm(a) => seminorm(a, cfg.seed),
        Command::Dominate { args, beta } => dominate(args, beta, cfg.seed),
        Command::Growth { matrix, s_max, samples, norm } => growth(matrix, *s_max, *samples, *norm),
        Command::Resolvent { matrix, points } => resolvent(matrix, *points),
        Command::Fc { matrices, calculus, poly, window, width, nodes } => {
            fc(matrices, *calculus, poly.as_deref(), *window, *width, *nodes)
        }
        Command::Sheaf { input } => sheaf(input),
        Command::DemoE2 { m, degrees, tol, timings } => demo(m, degrees, *tol, *timings),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))
}

/// Spec of the algebra without validating the Jacobi identity.
fn algebra_spec(a: &AlgebraArg) -> Result<(String, LieAlgebraSpec), CliError> {
    match (&a.input, &a.algebra) {
        (Some(p), None) => Ok((p.display().to_string(), parse_json(&read(p)?)?)),
        (None, Some(name)) => {
            let lie = catalog::algebra(name).ok_or_else(|| CliError::Input(format!("unknown catalog algebra `{name}`")))?;
            Ok((name.clone(), lie.to_spec()))
        }
        _ => Err(CliError::Usage("exactly one of --input and --algebra is required".into())),
    }
}

fn load_algebra(a: &AlgebraArg) -> Result<LieAlgebra, CliError> {
    Ok(LieAlgebra::from_spec(&algebra_spec(a)?.1)?)
}

fn load_system(a: &AlgebraArg) -> Result<AdaptedSystem, CliError> {
    match (&a.input, &a.algebra) {
        (None, Some(name)) => Ok(catalog_system(name)?),
        _ => Ok(build_adapted_system(&load_algebra(a)?)?),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn check(a: &AlgebraArg) -> Result<Report, CliError> {
    let (name, spec) = algebra_spec(a)?;
    let lie = match LieAlgebra::from_spec(&spec) {
        Ok(l) => l,
        Err(LieError::JacobiViolation { triple, residual }) => {
            let labels = spec.basis.clone().unwrap_or_else(|| (1..=spec.dim).map(|i| format!("e{i}")).collect());
            let t = [triple.0, triple.1, triple.2].map(|i| labels[i - 1].clone());
            let residual: Vec<String> = residual.iter().map(Scalar::to_string).collect();
            return Ok(Report {
                text: format!("algebra: {name} (dim {})\njacobi: no, fails on ({}, {}, {})\n", spec.dim, t[0], t[1], t[2]),
                json: json!({ "algebra": name, "dim": spec.dim, "jacobi": false, "triple": t, "residual": residual }),
                csv: None,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let solvable = lie.is_solvable();
    let nilpotent = lie.is_nilpotent();
    let label = |w: usize| lie.labels().get(w.wrapping_sub(1)).cloned().unwrap_or_else(|| "none".into());
    let (triangular, witness, charpoly) = match lie.triangular_flag() {
        Ok(_) => (true, None, None),
        Err(LieError::NotTriangular { witness, charpoly } | LieError::IrrationalEigenvalues { witness, charpoly }) => {
            (false, Some(label(witness)), Some(charpoly))
        }
        Err(LieError::NotSolvable(_)) => (false, None, None),
        Err(e) => return Err(e.into()),
    };
    let nilradical = if solvable { Some(lie.nilradical()?.dim()) } else { None };
    let mut text = String::new();
    writeln!(text, "algebra: {name} (dim {}, {})", lie.dim(), format!("{:?}", lie.field()).to_lowercase()).unwrap();
    writeln!(text, "jacobi: yes").unwrap();
    match &witness {
        Some(w) => writeln!(text, "solvable: {}, triangular: no, witness {w}", yes(solvable)).unwrap(),
        None => writeln!(text, "solvable: {}, triangular: {}", yes(solvable), yes(triangular)).unwrap(),
    }
    if let Some(c) = &charpoly {
        writeln!(text, "characteristic polynomial: {c}").unwrap();
    }
    writeln!(text, "nilpotent: {}", yes(nilpotent)).unwrap();
    if let Some(d) = nilradical {
        writeln!(text, "nilradical dimension: {d}").unwrap();
    }
    Ok(Report {
        text,
        json: json!({
            "algebra": name, "dim": lie.dim(), "jacobi": true, "solvable": solvable, "nilpotent": nilpotent,
            "triangular": triangular, "witness": witness, "charpoly": charpoly, "nilradical_dim": nilradical,
        }),
        csv: None,
    })
}

fn mul(a: &AlgebraArg, factors: &[String], n_trunc: Option<u32>) -> Result<Report, CliError> {
    let alg = PbwAlgebra::new(load_algebra(a)?)?;
    let parsed: Vec<UEAElement> = factors.iter().map(|f| UEAElement::parse(&alg, f)).collect::<Result<_, _>>()?;
    let mut acc = parsed[0].clone();
    if let Some(n) = n_trunc {
        acc = acc.truncate_n_degree(n);
        for f in &parsed[1..] {
            acc = acc.mul_truncated(f, n);
        }
        let e = NCFunctionElement::from_uea(&acc, n);
        Ok(Report { text: format!("{e}\n"), json: serde_json::to_value(e.to_spec()).expect("serializable"), csv: None })
    } else {
        for f in &parsed[1..] {
            acc = acc.try_mul(f)?;
        }
        Ok(Report { text: format!("{acc}\n"), json: json!({ "text": acc.to_string(), "terms": acc.to_spec() }), csv: None })
    }
}

fn matrix_rows(m: &crate::linalg::SparseMatrix) -> Vec<Vec<String>> {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j).to_string()).collect()).collect()
}

fn adapt(a: &AlgebraArg) -> Result<Report, CliError> {
    let sys = load_system(a)?;
    let labels = sys.algebra().lie().labels().to_vec();
    let mu: Vec<Vec<String>> = sys.mu_table().iter().map(|r| r.iter().map(Scalar::to_string).collect()).collect();
    let mut text = String::new();
    writeln!(text, "basis: {}", labels.join(" ")).unwrap();
    writeln!(text, "complement dimension: {}", sys.split()).unwrap();
    writeln!(text, "representations: {}", sys.reps().iter().map(|r| r.dim().to_string()).collect::<Vec<_>>().join(" ")).unwrap();
    writeln!(text, "nilpotent images: {}", yes(sys.all_nilpotent())).unwrap();
    writeln!(text, "shift free: {}", yes(sys.is_shift_free())).unwrap();
    for (r, row) in mu.iter().enumerate() {
        writeln!(text, "mu[{}]: {}", r + 1, row.join(" ")).unwrap();
    }
    Ok(Report {
        text,
        json: json!({
            "basis": labels, "split": sys.split(),
            "reps": sys.reps().iter().map(|r| r.to_spec()).collect::<Vec<_>>(),
            "mu": mu, "nilpotent": sys.all_nilpotent(), "shift_free": sys.is_shift_free(),
        }),
        csv: None,
    })
}

fn parse_beta(text: &str, n: usize) -> Result<MultiIndex, CliError> {
    let v: Vec<u32> = if text.trim().is_empty() {
        Vec::new()
    } else {
        text.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| CliError::Input(format!("bad multi-index `{text}`")))).collect::<Result<_, _>>()?
    };
    if v.len() != n {
        return Err(CliError::Input(format!("multi-index `{text}` has {} entries, expected {n}", v.len())));
    }
    Ok(MultiIndex(v))
}

fn complement_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("l{i}")).collect()
}

fn rep(a: &AlgebraArg, beta: &str, element: Option<&str>) -> Result<Report, CliError> {
    let sys = load_system(a)?;
    let alg = sys.algebra().clone();
    let beta = parse_beta(beta, alg.nil_dim())?;
    let pi = sys.tensor_rep(&beta);
    let shift: Vec<String> = sys.shift_vector(&beta).iter().map(Scalar::to_string).collect();
    let lead = matrix_rows(&sys.leading_image(&beta));
    let mut text = String::new();
    writeln!(text, "dimension: {}", pi.dim()).unwrap();
    writeln!(text, "shift: {}", shift.join(" ")).unwrap();
    writeln!(text, "leading image:").unwrap();
    for row in &lead {
        writeln!(text, "  {}", row.join(" ")).unwrap();
    }
    let mut json = json!({ "dim": pi.dim(), "shift": shift, "leading_image": lead, "rep": pi.to_spec() });
    if let Some(src) = element {
        let e = UEAElement::parse(&alg, src)?;
        let f = tilde_pi(&pi, &e);
        let names = complement_names(alg.split());
        let mut entries = Vec::new();
        writeln!(text, "matrix function:").unwrap();
        for i in 0..f.dim() {
            for j in 0..f.dim() {
                if let Some(p) = f.poly(i, j).filter(|p| !p.is_zero()) {
                    let s = p.to_string_with(&names);
                    writeln!(text, "  ({}, {}): {s}", i + 1, j + 1).unwrap();
                    entries.push(json!({ "row": i + 1, "col": j + 1, "poly": s }));
                }
            }
        }
        json["matrix_function"] = Value::Array(entries);
    }
    Ok(Report { text, json, csv: None })
}

fn element_for(args: &ElementArgs, alg: &Arc<PbwAlgebra>, seed: u64) -> Result<NCFunctionElement, CliError> {
    if args.n_trunc > MAX_ORDER {
        return Err(CliError::Budget { name: "n-trunc", value: args.n_trunc.to_string(), cap: MAX_ORDER.to_string() });
    }
    let a = match &args.element {
        Some(src) => UEAElement::parse(alg, src)?,
        None => UEAElement::random(&mut ChaCha8Rng::seed_from_u64(seed), alg, 3, 4),
    };
    Ok(NCFunctionElement::from_uea(&a, args.n_trunc))
}

fn region_for(args: &ElementArgs, k: usize) -> Result<CompactBox, CliError> {
    let bx = match &args.region {
        Some(s) => CompactBox::parse(s)?,
        None => CompactBox::cube(k, -1, 1),
    };
    if bx.dim() != k {
        return Err(CliError::Input(format!("box has dimension {}, expected {k}", bx.dim())));
    }
    Ok(bx)
}

fn seminorm(args: &ElementArgs, seed: u64) -> Result<Report, CliError> {
    let sys = load_system(&args.alg)?;
    let alg = sys.algebra().clone();
    let a = element_for(args, &alg, seed)?;
    let bx = region_for(args, alg.split())?;
    let betas: Vec<MultiIndex> = a.coefficients().keys().cloned().collect();
    let spec = SeminormSpec::new(bx.clone(), args.order, args.norm);
    let rho = rho_embed(&a, &sys, &betas, &spec)?;
    let mut text = format!("element: {a}\nbox: {bx}, order {}\n", args.order);
    let mut csv = String::from("beta,coefficient,representation\n");
    let mut rows = Vec::new();
    for (b, r) in betas.iter().zip(&rho) {
        let c = a.seminorm(b, &bx, args.order).value;
        let key = b.0.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        writeln!(text, "[{key}]: coefficient {c:.9e}, representation {r:.9e}").unwrap();
        writeln!(csv, "\"{key}\",{c:e},{r:e}").unwrap();
        rows.push(json!({ "beta": b.0, "coefficient": c, "representation": r }));
    }
    Ok(Report { text, json: json!({ "element": a.to_string(), "box": bx.to_string(), "order": args.order, "rows": rows }), csv: Some(csv) })
}

fn dominate(args: &ElementArgs, beta: &str, seed: u64) -> Result<Report, CliError> {
    let sys = load_system(&args.alg)?;
    let alg = sys.algebra().clone();
    let a = element_for(args, &alg, seed)?;
    let bx = region_for(args, alg.split())?;
    let beta = parse_beta(beta, alg.nil_dim())?;
    let r = verify_domination(&a, &beta, &bx, args.order, &sys, args.norm, &[(beta.clone(), bx.clone(), args.order)])?;
    let text = format!(
        "element: {a}\nlhs = {:.9e}\nrhs = {:.9e}\nC = {}\npass: {}\n",
        r.lhs,
        r.rhs,
        r.constant_exact.clone().unwrap_or_else(|| format!("{:.9e}", r.constant)),
        yes(r.pass)
    );
    let csv = format!("lhs,rhs,C,pass\n{:e},{:e},{:e},{}\n", r.lhs, r.rhs, r.constant, r.pass);
    Ok(Report { text, json: serde_json::to_value(&r).expect("serializable"), csv: Some(csv) })
}

fn value_to_f64(v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| CliError::Input(format!("bad number {n}"))),
        Value::String(s) => s.parse::<Scalar>().map(|x| x.to_f64()).map_err(|_| CliError::Input(format!("bad scalar `{s}`"))),
        other => Err(CliError::Input(format!("expected a number, got {other}"))),
    }
}

fn matrix_from_value(v: &Value) -> Result<NumericMatrix, CliError> {
    let rows = v.as_array().ok_or_else(|| CliError::Input("matrix must be a list of rows".into()))?;
    let n = rows.len();
    let mut m = NumericMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_array().filter(|r| r.len() == n).ok_or_else(|| CliError::Input("matrix must be square".into()))?;
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = value_to_f64(x)?;
        }
    }
    if n == 0 {
        return Err(CliError::Input("empty matrix".into()));
    }
    Ok(m)
}

fn json_source(src: &str) -> Result<Value, CliError> {
    let text = if src.trim_start().starts_with('[') || src.trim_start().starts_with('{') { src.to_string() } else { read(Path::new(src))? };
    parse_json(&text)
}

fn load_matrix(src: &str) -> Result<NumericMatrix, CliError> {
    if let Some(d) = src.strip_prefix("jordan:") {
        let d: usize = d.parse().map_err(|_| CliError::Input(format!("bad size `{d}`")))?;
        if d == 0 || d > 64 {
            return Err(CliError::Input(format!("jordan block size {d} outside 1..=64")));
        }
        return Ok(calculus::jordan_block(d));
    }
    if src == "rotation" {
        return Ok(NumericMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }
    matrix_from_value(&json_source(src)?)
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Polynomial { alpha } => format!("polynomial (alpha = {alpha:.4})"),
        Verdict::Exponential => "exponential".into(),
        Verdict::Inconclusive => "inconclusive".into(),
    }
}

fn growth(src: &str, s_max: f64, samples: usize, norm: MatrixNorm) -> Result<Report, CliError> {
    if !(s_max.is_finite() && s_max <= MAX_S) {
        return Err(CliError::Budget { name: "s-max", value: s_max.to_string(), cap: MAX_S.to_string() });
    }
    if samples > MAX_SAMPLES {
        return Err(CliError::Budget { name: "samples", value: samples.to_string(), cap: MAX_SAMPLES.to_string() });
    }
    let b = load_matrix(src)?;
    let r = calculus::exp_growth_scan(&b, s_max, samples, norm)?;
    let mut csv = String::from("s,norm\n");
    for (s, v) in &r.samples {
        writeln!(csv, "{s:e},{v:e}").unwrap();
    }
    let text = format!(
        "verdict: {}\nalpha = {:.4}, K = {:.4}, residual = {:.3e}, tail slope = {:.4}\n",
        verdict_text(&r.verdict),
        r.alpha,
        r.constant,
        r.residual,
        r.tail_slope
    );
    Ok(Report { text, json: serde_json::to_value(&r).expect("serializable"), csv: Some(csv) })
}

fn resolvent(src: &str, points: usize) -> Result<Report, CliError> {
    if points > MAX_SAMPLES {
        return Err(CliError::Budget { name: "points", value: points.to_string(), cap: MAX_SAMPLES.to_string() });
    }
    let b = load_matrix(src)?;
    let r = calculus::resolvent_scan(&b, None, points)?;
    let mut csv = String::from("re,im,norm\n");
    for row in &r.rows {
        writeln!(csv, "{:e},{:e},{:e}", row.re, row.im, row.norm).unwrap();
    }
    let text = format!(
        "blow-up exponent near the axis: {:.4}\ndecay exponent far from the axis: {:.4}\n",
        r.blow_up_exponent, r.decay_exponent
    );
    Ok(Report { text, json: serde_json::to_value(&r).expect("serializable"), csv: Some(csv) })
}

fn complex_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn fc(src: &str, kind: CalculusKind, poly: Option<&str>, window: Window, width: f64, nodes: usize) -> Result<Report, CliError> {
    if nodes > MAX_NODES {
        return Err(CliError::Budget { name: "nodes", value: nodes.to_string(), cap: MAX_NODES.to_string() });
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(CliError::Input(format!("width must be positive, got {width}")));
    }
    let list = json_source(src)?;
    let bs: Vec<NumericMatrix> = list
        .as_array()
        .ok_or_else(|| CliError::Input("expected a list of matrices".into()))?
        .iter()
        .map(matrix_from_value)
        .collect::<Result<_, _>>()?;
    let m = bs.len();
    let p = match poly {
        Some(s) => Polynomial::from_spec(m, &parse_json::<PolynomialSpec>(s)?).map_err(CliError::Input)?,
        None => Polynomial::one(m),
    };
    let widths = vec![width; m];
    let symbol = match window {
        Window::Gaussian => FourierSymbol::poly_gaussian(&p, &widths),
        Window::Cutoff => {
            let sbox = FourierSymbol::spectral_box(&bs);
            let hw: Vec<f64> = sbox.iter().map(|r| r.max(width)).collect();
            FourierSymbol::poly_cutoff(&p, &hw)
        }
    };
    let (value, extra) = match kind {
        CalculusKind::Ordered => {
            let q = calculus::ordered_fc_quadrature_with(&symbol, &bs, nodes)?;
            (q.value, json!({ "nodes": q.nodes, "change": q.change, "tail_estimate": q.tail_estimate }))
        }
        CalculusKind::Weyl => {
            let q = calculus::weyl_fc_quadrature_with(&symbol, &bs, nodes)?;
            (q.value, json!({ "nodes": q.nodes, "change": q.change, "tail_estimate": q.tail_estimate }))
        }
        CalculusKind::Taylor => {
            let f = symbol.to_coefficient().ok_or_else(|| CliError::Input("symbol has no closed form".into()))?;
            (calculus::ordered_fc_taylor(&f, &bs)?, json!({}))
        }
    };
    let mut text = String::new();
    for i in 0..value.nrows() {
        let row: Vec<String> = (0..value.ncols()).map(|j| format!("{:.9e}{:+.3e}i", value[(i, j)].re, value[(i, j)].im)).collect();
        writeln!(text, "{}", row.join("  ")).unwrap();
    }
    let mut csv = String::from("row,col,re,im\n");
    for i in 0..value.nrows() {
        for j in 0..value.ncols() {
            writeln!(csv, "{},{},{:e},{:e}", i + 1, j + 1, value[(i, j)].re, value[(i, j)].im).unwrap();
        }
    }
    let mut json = json!({ "value": complex_rows(&value) });
    if let (Value::Object(o), Value::Object(e)) = (&mut json, extra) {
        o.extend(e);
    }
    Ok(Report { text, json, csv: Some(csv) })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ElementSource {
    Text(String),
    Spec(NcSpec),
}

#[derive(Deserialize)]
struct SectionFile {
    region: RegionSpec,
    element: ElementSource,
}

#[derive(Deserialize)]
struct CoverFile {
    algebra: Value,
    #[serde(rename = "N", default = "default_order")]
    order: u32,
    sections: Vec<SectionFile>,
}

fn default_order() -> u32 {
    3
}

fn sheaf(path: &Path) -> Result<Report, CliError> {
    let cover: CoverFile = parse_json(&read(path)?)?;
    let lie = match &cover.algebra {
        Value::String(name) => catalog::algebra(name).ok_or_else(|| CliError::Input(format!("unknown catalog algebra `{name}`")))?,
        v => LieAlgebra::from_spec(&serde_json::from_value(v.clone()).map_err(|e| CliError::Input(e.to_string()))?)?,
    };
    let mode = FunctionMode::for_field(lie.field());
    let alg = PbwAlgebra::new(lie)?;
    let dim = region_dim(mode, alg.split());
    let mut regions = Vec::new();
    let mut sections = Vec::new();
    for s in &cover.sections {
        let region = OpenRegion::from_spec(dim, &s.region)?;
        let e = match &s.element {
            ElementSource::Text(t) => NCFunctionElement::from_uea(&UEAElement::parse(&alg, t)?, cover.order),
            ElementSource::Spec(spec) => NCFunctionElement::from_spec(&alg, spec)?,
        };
        sections.push(LocalSection::new(e, region.clone())?);
        regions.push(region);
    }
    let outcome = glue(&regions, &sections)?;
    let report = outcome.report();
    let text = match &outcome {
        GlueOutcome::Glued { section, verdict } => {
            format!("glued: yes ({verdict:?})\ndomain: {}\nsection: {}\n", section.domain(), section.element())
        }
        GlueOutcome::Mismatch(w) => format!(
            "glued: no\nwitness: sections {} and {}, beta {:?}, point ({}), values {} vs {}\n",
            w.first + 1,
            w.second + 1,
            w.beta,
            w.point.join(", "),
            w.values[0],
            w.values[1]
        ),
    };
    Ok(Report { text, json: serde_json::to_value(&report).expect("serializable"), csv: None })
}

fn demo(ms: &[u32], degrees: &[u32], tol: f64, timings: bool) -> Result<Report, CliError> {
    if let Some(&m) = ms.iter().find(|&&m| m < 1 || m > MAX_M) {
        return Err(CliError::Budget { name: "m", value: m.to_string(), cap: MAX_M.to_string() });
    }
    if !degrees.is_empty() && degrees.len() != ms.len() {
        return Err(CliError::Input(format!("{} degrees given for {} regions", degrees.len(), ms.len())));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Input(format!("tolerance must be positive, got {tol}")));
    }
    let cfg = DemoConfig { ms: ms.to_vec(), degrees: degrees.to_vec(), tolerance: tol, ..DemoConfig::default() };
    let rows = demo_e2_blowup(&cfg);
    let mut text = String::from("   m  degree  points  fit residual     sup|g_n|   sup target   sup|g_n - target|  within 10%  identity\n");
    let mut csv = String::from("m,degree,points,fit_residual,sup_g,sup_target,sup_error,within_10_percent,converged\n");
    for r in &rows {
        let ident = match r.identity_exact {
            Some(true) => "exact",
            Some(false) => "FAILED",
            None => "-",
        };
        write!(
            text,
            "{:>4}  {:>6}  {:>6}  {:>12.3e}  {:>11.6}  {:>11.6}  {:>18.3e}  {:>10}  {:>8}",
            r.m,
            r.degree,
            r.grid_points,
            r.fit_residual,
            r.sup_g,
            r.sup_target,
            r.sup_error,
            yes(r.within_10_percent),
            ident
        )
        .unwrap();
        if timings {
            write!(text, "  {:.2}s", r.seconds).unwrap();
        }
        text.push('\n');
        writeln!(
            csv,
            "{},{},{},{:e},{:e},{:e},{:e},{},{}",
            r.m, r.degree, r.grid_points, r.fit_residual, r.sup_g, r.sup_target, r.sup_error, r.within_10_percent, r.converged
        )
        .unwrap();
    }
    let mut json = serde_json::to_value(&rows).expect("serializable");
    if !timings {
        if let Value::Array(items) = &mut json {
            for it in items {
                if let Value::Object(o) = it {
                    o.remove("seconds");
                }
            }
        }
    }
    Ok(Report { text, json: json!({ "rows": json }), csv: Some(csv) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn out(args: &[&str]) -> Outcome {
        run(std::iter::once("trilie").chain(args.iter().copied()))
    }

    #[test]
    fn euclidean_check() {
        let o = out(&["check", "--algebra", "e2"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("solvable: yes, triangular: no, witness e1"), "{}", o.stdout);
    }

    #[test]
    fn affine_product() {
        let o = out(&["mul", "--algebra", "af1", "e2*e1"]);
        assert_eq!(o.stdout, "e1*e2 - e2\n");
    }

    #[test]
    fn errors_are_json() {
        let o = out(&["mul", "--algebra", "nope", "e1"]);
        assert_eq!(o.code, 1);
        let v: Value = serde_json::from_str(&o.stderr).unwrap();
        assert_eq!(v["error"]["kind"], "input");
        let o = out(&["frobnicate"]);
        assert_eq!(o.code, 2);
        assert!(serde_json::from_str::<Value>(&o.stderr).is_ok());
    }
}
