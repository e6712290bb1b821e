mod spec;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use fracperim::constants::{doubling_constant, estimate_constants, StructuralConstants};
use fracperim::covers::{
    boundary_balls, boxing_cover, cz_decomposition, density_radius, five_r_cover, local_boxing_cover, Ball, BallCover,
};
use fracperim::functionals::{
    coarea_rhs, fractional_energy, fractional_perimeter, graph_perimeter, lip, lip_r, mean_and_deviation, EnergyValue,
    Kernel,
};
use fracperim::generators;
use fracperim::io::{parse_space, space_to_json, SCHEMA_VERSION};
use fracperim::kernels::{rho_sandwich_check, rho_tail};
use fracperim::lab::{
    annuli_report, equivalence_gauge, frac_iso_best, frac_iso_report, report, sweep, theta_iso_report, Family,
    FamilySpec, InequalityKind, InequalityReport, ReportParams, SweepOptions, ThetaSweep, Witness,
};
use fracperim::serde_float::to_value as num;
use fracperim::{Error, MetricMeasureSpace, PointSet};

use spec::{parse_balls, parse_function, parse_grid, parse_set};

#[derive(Parser)]
#[command(name = "fracperim", version, about = "Fractional perimeters, covers and inequality diagnostics on finite metric measure spaces")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "FRACPERIM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark space.
    Gen(GenArgs),
    /// Evaluate a single functional.
    Compute(ComputeArgs),
    /// Estimate the structural constants of a space.
    Constants(ConstantsArgs),
    /// Build a ball cover and its certificate.
    Cover(CoverArgs),
    /// Evaluate one inequality or lemma instance.
    Verify(VerifyArgs),
    /// Sweep an inequality over a θ grid and a test family.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Grid,
    Weighted,
    Snowflake,
    Bowtie,
    Bowtie2d,
    RandomEuclidean,
    RandomGraph,
}

#[derive(Args)]
struct GenArgs {
    generator: Generator,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Points per side (grid, weighted, snowflake, bowtie2d), per wing (bowtie) or in total (random).
    #[arg(long)]
    n: usize,
    /// Weight exponent of `weighted`.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Index of the weight singularity of `weighted`.
    #[arg(long, default_value_t = 0)]
    origin: usize,
    /// Snowflake exponent.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra random edges of `random-graph`.
    #[arg(long, default_value_t = 0)]
    extra: usize,
    /// Base space for `weighted` and `snowflake`; a grid of `--dim`/`--n` otherwise.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Perimeter,
    Energy,
    Coarea,
    GraphPerimeter,
    BallMass,
    Deviation,
    RhoSandwich,
    RhoTail,
    Lip,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Asymmetric,
    Symmetric,
}

#[derive(Args)]
struct ComputeArgs {
    quantity: Quantity,
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    set: Option<String>,
    #[arg(long, default_value = "all")]
    omega: String,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum, default_value = "asymmetric")]
    kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long)]
    center: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "c-mu")]
    c_mu: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    space: PathBuf,
    /// Exponent of the lower Ahlfors bound; the fitted lower-mass exponent by default.
    #[arg(long = "ahlfors-q")]
    ahlfors_q: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Algorithm {
    FiveR,
    Cz,
    Boundary,
    Boxing,
    LocalBoxing,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    set: Option<String>,
    /// Starting ball center (cz, boundary, local_boxing).
    #[arg(long)]
    center: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Scale index of the boundary construction; the smallest admissible by default.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long)]
    kappa: Option<f64>,
    /// five_r candidates: `all:R` or `file:PATH`.
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long = "c-mu")]
    c_mu: Option<f64>,
    #[arg(long, visible_alias = "emit")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    kind: InequalityKind,
    #[arg(long)]
    space: PathBuf,
    /// Set or function specification, depending on the kind.
    #[arg(long)]
    witness: String,
    #[arg(long)]
    theta: Option<f64>,
    /// Lebesgue exponent; `Q/(Q−θ)` with the fitted `Q` by default.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long)]
    center: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    no_rescale: bool,
    #[arg(long = "c-mu")]
    c_mu: Option<f64>,
    /// Scale index of the fractional isoperimetric lemma; the best admissible by default.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    inner_center: Option<usize>,
    #[arg(long)]
    inner_radius: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    kind: Option<InequalityKind>,
    /// `A:B:N` or a comma list.
    #[arg(long, default_value = "0.1:0.9:9")]
    thetas: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma list of families; the default family otherwise.
    #[arg(long)]
    families: Option<String>,
    #[arg(long, default_value_t = 4)]
    random_members: usize,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long)]
    no_rescale: bool,
    #[arg(long, default_value_t = 16)]
    max_centers: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Emit Poincaré/relative-isoperimetric gauges per θ instead of a sweep.
    #[arg(long)]
    equivalence: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Space file could not be read or decoded.
    Load(Error),
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_precondition() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Load(e) => write!(f, "cannot load space: {e}"),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn load_space(path: &PathBuf) -> CliResult<MetricMeasureSpace> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Load(Error::Io(format!("{}: {e}", path.display()))))?;
    parse_space(&text).map_err(Failure::Load)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Lib(Error::Io(format!("{}: {e}", p.display())))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Lib(Error::Io(e.to_string())))
        }
    }
}

fn emit_json(out: &Option<PathBuf>, value: Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    emit(out, &text)
}

/// Serializes `value` and prepends the schema version.
fn versioned(value: impl serde::Serialize) -> Value {
    let mut map = Map::new();
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    match serde_json::to_value(value).expect("serializable") {
        Value::Object(inner) => map.extend(inner),
        other => {
            map.insert("value".into(), other);
        }
    }
    Value::Object(map)
}

fn gen(args: GenArgs) -> CliResult<()> {
    let base = || -> CliResult<MetricMeasureSpace> {
        match &args.base {
            Some(p) => load_space(p),
            None => Ok(generators::grid(args.dim, args.n)?),
        }
    };
    let space = match args.generator {
        Generator::Grid => generators::grid(args.dim, args.n)?,
        Generator::Weighted => generators::weighted_space(&base()?, args.alpha, args.origin)?,
        Generator::Snowflake => generators::snowflake(&base()?, args.eps)?,
        Generator::Bowtie => generators::bowtie(args.n)?,
        Generator::Bowtie2d => generators::bowtie_2d(args.n)?,
        Generator::RandomEuclidean => generators::random_euclidean(args.n, args.seed)?,
        Generator::RandomGraph => generators::random_graph(args.n, args.extra, args.seed)?,
    };
    let mut text = space_to_json(&space);
    text.push('\n');
    emit(&args.out, &text)
}

fn energy_json(quantity: &str, v: EnergyValue, started: Instant) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "quantity": quantity,
        "value": num(v.value),
        "theta": v.theta,
        "domain_size": v.domain_size,
        "pair_count": v.pair_count,
        "wall_time_ms": started.elapsed().as_secs_f64() * 1e3,
    })
}

fn compute(args: ComputeArgs) -> CliResult<()> {
    let space = load_space(&args.space)?;
    let started = Instant::now();
    let omega = || parse_set(&space, &args.omega);
    let theta = || required(args.theta, "theta");
    let function = || -> CliResult<Vec<f64>> { Ok(parse_function(&space, &required(args.function.as_deref(), "function")?)?) };
    let set = || -> CliResult<PointSet> { Ok(parse_set(&space, required(args.set.as_deref(), "set")?)?) };
    let scalar = |quantity: &str, value: f64, extra: Value| {
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "quantity": quantity,
            "value": num(value),
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
            m.insert("wall_time_ms".into(), (started.elapsed().as_secs_f64() * 1e3).into());
        }
        v
    };
    let value = match args.quantity {
        Quantity::Perimeter => {
            let v = fractional_perimeter(&space, &set()?, &omega()?, theta()?)?;
            energy_json("perimeter", v, started)
        }
        Quantity::Energy => {
            let kernel = match args.kernel {
                KernelArg::Asymmetric => Kernel::Asymmetric,
                KernelArg::Symmetric => Kernel::Symmetric,
            };
            let v = fractional_energy(&space, &function()?, &omega()?, theta()?, kernel)?;
            let mut j = energy_json("energy", v, started);
            j["kernel"] = serde_json::to_value(kernel).expect("serializable");
            j
        }
        Quantity::Coarea => energy_json("coarea", coarea_rhs(&space, &function()?, &omega()?, theta()?)?, started),
        Quantity::GraphPerimeter => {
            let v = graph_perimeter(&space, &set()?, &omega()?)?;
            scalar("graph_perimeter", v, json!({}))
        }
        Quantity::BallMass => {
            let (c, r) = (required(args.center, "center")?, required(args.radius, "radius")?);
            scalar("ball_mass", space.ball_measure(c, r)?, json!({"center": c, "radius": r}))
        }
        Quantity::Deviation => {
            let (mean, dev) = mean_and_deviation(&space, &function()?, &set()?, args.q)?;
            scalar("deviation", dev, json!({"mean": num(mean), "q": args.q}))
        }
        Quantity::RhoSandwich => {
            let c_mu = match args.c_mu {
                Some(c) => c,
                None => doubling_constant(&space)?,
            };
            let r = rho_sandwich_check(&space, theta()?, c_mu)?;
            let mut v = versioned(&r);
            v["quantity"] = "rho_sandwich".into();
            v["passed"] = r.passed().into();
            v
        }
        Quantity::RhoTail => {
            let (t, delta) = (theta()?, required(args.delta, "delta")?);
            scalar("rho_tail", rho_tail(&space, t, delta)?, json!({"theta": t, "delta": delta}))
        }
        Quantity::Lip => {
            let x = required(args.center, "center")?;
            let u = function()?;
            let v = match args.radius {
                Some(r) => lip_r(&space, &u, x, r)?,
                None => lip(&space, &u, x)?,
            };
            scalar("lip", v, json!({"center": x, "radius": args.radius}))
        }
    };
    emit_json(&args.out, value)
}

fn constants(args: ConstantsArgs) -> CliResult<()> {
    let space = load_space(&args.space)?;
    let c = estimate_constants(&space, args.ahlfors_q)?;
    let mut v = versioned(&c);
    v["q_effective"] = c.q_effective().into();
    emit_json(&args.out, v)
}

fn c_mu_or_estimate(space: &MetricMeasureSpace, c_mu: Option<f64>) -> CliResult<f64> {
    Ok(match c_mu {
        Some(c) => c,
        None => doubling_constant(space)?,
    })
}

fn cover(args: CoverArgs) -> CliResult<()> {
    let space = load_space(&args.space)?;
    let set = || -> CliResult<PointSet> { Ok(parse_set(&space, required(args.set.as_deref(), "set")?)?) };
    let b0 = || -> CliResult<Ball> { Ok(Ball::new(required(args.center, "center")?, required(args.radius, "radius")?)) };
    let mut params = Map::new();
    let (name, result): (&str, BallCover) = match args.algorithm {
        Algorithm::FiveR => {
            let spec = required(args.candidates.as_deref(), "candidates")?;
            params.insert("candidates".into(), spec.into());
            ("five_r", five_r_cover(&space, &parse_balls(&space, spec)?)?)
        }
        Algorithm::Cz => {
            let (b, lambda, c_mu) = (b0()?, required(args.lambda, "lambda")?, c_mu_or_estimate(&space, args.c_mu)?);
            params.insert("lambda".into(), lambda.into());
            params.insert("c_mu".into(), c_mu.into());
            ("cz", cz_decomposition(&space, b, &set()?, lambda, c_mu)?)
        }
        Algorithm::Boundary => {
            let (b, lambda) = (b0()?, required(args.lambda, "lambda")?);
            let e = set()?;
            let constants = estimate_constants(&space, None)?;
            params.insert("lambda".into(), lambda.into());
            params.insert("k".into(), serde_json::to_value(args.k).expect("serializable"));
            ("boundary", boundary_balls(&space, b, &e, lambda, args.k, &constants)?)
        }
        Algorithm::Boxing => {
            let (theta, c_mu) = (required(args.theta, "theta")?, c_mu_or_estimate(&space, args.c_mu)?);
            params.insert("theta".into(), theta.into());
            params.insert("tau".into(), args.tau.into());
            params.insert("c_mu".into(), c_mu.into());
            ("boxing", boxing_cover(&space, &set()?, theta, args.tau, c_mu)?)
        }
        Algorithm::LocalBoxing => {
            let b = b0()?;
            let (kappa, theta) = (required(args.kappa, "kappa")?, required(args.theta, "theta")?);
            let c_mu = c_mu_or_estimate(&space, args.c_mu)?;
            params.insert("kappa".into(), kappa.into());
            params.insert("theta".into(), theta.into());
            params.insert("c_mu".into(), c_mu.into());
            ("local_boxing", local_boxing_cover(&space, b, &set()?, kappa, theta, c_mu)?)
        }
    };
    if let Some(s) = &args.set {
        params.insert("set".into(), s.as_str().into());
    }
    if let (Some(c), Some(r)) = (args.center, args.radius) {
        params.insert("ball".into(), json!({"center": c, "radius": r}));
    }
    let passed = result.certificate.passed();
    let mut v = versioned(&result);
    v["algorithm"] = name.into();
    v["parameters"] = Value::Object(params);
    v["passed"] = passed.into();
    emit_json(&args.out, v)
}

fn witness(space: &MetricMeasureSpace, kind: InequalityKind, spec: &str) -> CliResult<Witness> {
    Ok(if kind.takes_function() {
        Witness::function(spec, parse_function(space, spec)?)
    } else {
        Witness::set(spec, parse_set(space, spec)?)
    })
}

fn verify(args: VerifyArgs) -> CliResult<()> {
    let space = load_space(&args.space)?;
    let kind = args.kind;
    let w = witness(&space, kind, &args.witness)?;
    let ball = || -> CliResult<Ball> { Ok(Ball::new(required(args.center, "center")?, required(args.radius, "radius")?)) };
    let r: InequalityReport = match kind {
        InequalityKind::FracIsoLemma => {
            let c = estimate_constants(&space, None)?;
            match args.k {
                Some(k) => frac_iso_report(&space, ball()?, &w, k, c.q_effective())?,
                None => frac_iso_best(&space, ball()?, &w, c.q_effective())?,
            }
        }
        InequalityKind::AnnuliLemma => {
            let c = estimate_constants(&space, None)?;
            let b1 = Ball::new(required(args.inner_center, "inner-center")?, required(args.inner_radius, "inner-radius")?);
            annuli_report(&space, ball()?, b1, &w, required(args.a, "a")?, required(args.eps, "eps")?, &c)?
        }
        InequalityKind::ThetaIsoLemma => {
            let x0 = required(args.center, "center")?;
            let gamma = required(args.gamma, "gamma")?;
            let radius = match args.radius {
                Some(r) => r,
                None => density_radius(&space, &w.to_set(&space), x0, gamma).1,
            };
            theta_iso_report(&space, &w, x0, radius, gamma, required(args.theta, "theta")?, !args.no_rescale)?
        }
        _ => {
            let theta = required(args.theta, "theta")?;
            let q = match (args.q, kind) {
                (Some(q), _) => q,
                (None, InequalityKind::Boxing) => 1.0,
                (None, _) => estimate_constants(&space, None)?.default_q(theta),
            };
            let mut params = ReportParams::new(theta, q);
            params.tau = args.tau;
            params.rescale = !args.no_rescale;
            params.c_mu = args.c_mu;
            if kind.takes_ball() {
                params = params.with_ball(ball()?);
            }
            report(&space, kind, &params, &w)?
        }
    };
    emit_json(&args.out, versioned(&r))
}

fn family_spec(args: &SweepArgs) -> CliResult<FamilySpec> {
    let mut spec = match &args.families {
        Some(list) => FamilySpec::new(
            list.split(',').map(|s| Family::parse(s.trim())).collect::<fracperim::Result<_>>()?,
            args.seed,
        ),
        None => FamilySpec::default_with_seed(args.seed),
    };
    spec.random_members = args.random_members;
    Ok(spec)
}

fn csv_float(v: f64) -> String {
    format!("{v}")
}

fn sweep_csv(result: &ThetaSweep) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Lib(Error::Io(e.to_string()));
    w.write_record([
        "schema_version",
        "theta",
        "kind",
        "q",
        "max_ratio",
        "median_ratio",
        "witness_id",
        "evaluated",
        "skipped",
        "rescaled",
    ])
    .map_err(io)?;
    for p in &result.points {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            csv_float(p.theta),
            result.kind.name().to_string(),
            p.q.map(csv_float).unwrap_or_default(),
            csv_float(p.max_ratio),
            csv_float(p.median_ratio),
            p.argmax.clone(),
            p.evaluated.to_string(),
            p.skipped.to_string(),
            result.rescaled.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Lib(Error::Io(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

fn run_sweep(args: SweepArgs) -> CliResult<()> {
    let space = load_space(&args.space)?;
    let grid = parse_grid(&args.thetas)?;
    let family = family_spec(&args)?;
    let options = SweepOptions {
        q: args.q,
        tau: args.tau,
        rescale: !args.no_rescale,
        max_centers: args.max_centers,
        ..SweepOptions::default()
    };
    if args.equivalence {
        let q_d = match args.q {
            Some(_) => None,
            None => Some(estimate_constants(&space, None)?),
        };
        let gauges = grid
            .iter()
            .map(|&theta| {
                let q = args.q.unwrap_or_else(|| q_d.as_ref().map(|c: &StructuralConstants| c.default_q(theta)).expect("estimated"));
                equivalence_gauge(&space, theta, q, &family, &options)
            })
            .collect::<fracperim::Result<Vec<_>>>()?;
        return emit_json(&args.out, json!({"schema_version": SCHEMA_VERSION, "family": family, "gauges": gauges}));
    }
    let kind = required(args.kind, "kind")?;
    let result = sweep(&space, kind, &grid, &family, &options)?;
    match args.format {
        Format::Csv => emit(&args.out, &sweep_csv(&result)?),
        Format::Json => emit_json(&args.out, versioned(&result)),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Compute(a) => compute(a),
        Command::Constants(a) => constants(a),
        Command::Cover(a) => cover(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
