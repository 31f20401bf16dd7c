use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use frobstab::code::Code;
use frobstab::codefile::{emit_code_file, format_row, parse_code_file};
use frobstab::isometry::{
    classify_ambient_isometries, enumerate_monomial_group, enumerate_symp_group, extension_search, CodeMap, GroupMode,
};
use frobstab::metrics::relative_distance;
use frobstab::pauli::{quantum_code, realize_matrix, stabilizer_lift};
use frobstab::reduction::{
    all_free_stabilizers, compare_relative_distances, conjecture_search, distance_chain_report, SearchRecord,
    SearchSummary, RNG_NAME,
};
use frobstab::{verify_frobenius, Category, Error, Limits, LocalRing};

#[derive(Parser)]
#[command(name = "frobstab", version, about = "Stabilizer codes over finite local Frobenius rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Code file (`ring:`, `n:`, `generators:`).
    #[arg(long, global = true)]
    code: Option<PathBuf>,
    /// Ring spec, e.g. Z4, GF4, F2u2, F2XY.
    #[arg(long, global = true)]
    ring: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// Lift the size guards on enumerations.
    #[arg(long, global = true)]
    force: bool,
    /// Write the JSON report to a file, or to standard output with `-`.
    #[arg(long, global = true)]
    json: Option<String>,
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Code file whose generator rows are the images of the `--code` rows (extend).
    #[arg(long, global = true)]
    target: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy, ValueEnum)]
enum Command {
    /// Verify the ring axioms and print ring data.
    RingInfo,
    /// Self-orthogonality and freeness.
    Check,
    /// Symplectic dual.
    Dual,
    /// d_s(C), d_s(C^perp) and dist.
    Distance,
    /// Distances of the code and of its reduction to the residue field.
    Reduce,
    /// Standard form im(I_k M | N1 N2) with its isometry trail.
    StandardForm,
    /// Stabilizer generators with phases.
    Lift,
    /// Matrices of the lifted generators and the code-space dimension.
    Realize,
    /// Monomial or full isometry group of the code.
    IsometryGroup,
    /// Extension of the map sending --code rows to --target rows.
    Extend,
    /// Weight- and form-preserving linear maps of R^2n versus SL2-monomials.
    Classify,
    /// Compare dist of random free stabilizer codes with their reductions.
    Search,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug)]
struct Failure {
    exit: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e.category() {
            Category::Guard => 1,
            Category::Invalid => 2,
            Category::Consistency => 3,
        };
        Failure { exit, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { exit: 2, message: message.into() }
}

type Outcome = Result<Output, Failure>;

/// Report body plus human-readable summary lines.
struct Output {
    ring: Option<String>,
    outputs: Value,
    text: Vec<String>,
    /// A checked relation failed; exit 3 after reporting.
    violated: bool,
    /// JSON-lines written instead of one report (search).
    lines: Option<Vec<String>>,
}

impl Output {
    fn new(ring: Option<String>, outputs: Value, text: Vec<String>) -> Self {
        Output { ring, outputs, text, violated: false, lines: None }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: String,
    ring: Option<&'a str>,
    inputs: Value,
    outputs: &'a Value,
    seed: u64,
    guard: Value,
    version: &'static str,
    elapsed_ms: u128,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

impl Cli {
    fn limits(&self) -> Limits {
        Limits { force: self.force }
    }

    fn load_code(&self) -> Result<Code, Failure> {
        let path = self.code.as_ref().ok_or_else(|| invalid("--code <file> is required"))?;
        load(path)
    }

    fn ring(&self) -> Result<Arc<LocalRing>, Failure> {
        let spec = self.ring.as_ref().ok_or_else(|| invalid("--ring <spec> is required"))?;
        Ok(LocalRing::parse(spec)?)
    }

    fn n(&self) -> Result<usize, Failure> {
        self.n.filter(|&n| n > 0).ok_or_else(|| invalid("--n <positive int> is required"))
    }
}

fn load(path: &Path) -> Result<Code, Failure> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_code_file(&text)?)
}

fn rows(v: &[Vec<u8>]) -> Vec<String> {
    v.iter().map(|r| format_row(r)).collect()
}

fn ring_info(cli: &Cli) -> Outcome {
    let ring = cli.ring()?;
    let report = verify_frobenius(&ring)?;
    let mut text = vec![
        format!("ring {}: |R|={} char={} N={}", report.ring, report.cardinality, report.characteristic, report.phase_order),
        format!("socle generator {}; |m|={} generated by {:?}", report.socle_generator, report.maximal_ideal_size, report.maximal_ideal_generators),
        format!("residue field size {}; checks passed: {}", report.residue_field_size, report.checks.join(", ")),
    ];
    if let Some(legend) = ring.legend() {
        text.push(format!("legend: {legend}"));
    }
    let mut value = to_value(&report);
    value["legend"] = json!(ring.legend());
    Ok(Output::new(Some(ring.name()), value, text))
}

fn check(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let (mu, minimal) = c.minimal_generators();
    let out = json!({
        "n": c.n(),
        "cardinality": c.cardinality(),
        "self_orthogonal": c.is_self_orthogonal(),
        "free": c.is_free(),
        "free_rank": c.free_rank(),
        "minimal_generators": mu,
        "minimal_generator_rows": minimal,
    });
    let text = vec![format!(
        "self_orthogonal={} free={} minimal_generators={} |C|={}",
        c.is_self_orthogonal(),
        c.is_free(),
        mu,
        c.cardinality()
    )];
    Ok(Output::new(Some(c.ring().name()), out, text))
}

fn dual(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let d = c.dual()?;
    let out = json!({"cardinality": d.cardinality(), "generators": d.generators()});
    Ok(Output::new(Some(c.ring().name()), out, vec![emit_code_file(&d).trim_end().to_string()]))
}

fn distance(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let r = relative_distance(&c, cli.limits())?;
    let text = vec![format!(
        "d_s(C)={} d_s(C^perp)={} dist={} pure={} self_dual={} (|C^perp|={})",
        r.ds_code.as_ref().map_or("-".into(), |m| m.weight.to_string()),
        r.ds_dual.weight,
        r.dist.weight,
        r.pure,
        r.self_dual,
        r.dual_cardinality
    )];
    Ok(Output::new(Some(c.ring().name()), to_value(&r), text))
}

fn reduce(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let r = distance_chain_report(&c, cli.limits())?;
    let opt = |x: Option<usize>| x.map_or("-".into(), |v| v.to_string());
    let mut text = vec![
        format!("dist_ring={} dist_field={} lnk_quantity={}", r.dist_ring, r.dist_field, opt(r.lnk_quantity)),
        format!(
            "d_s(C)={} d_s(reduced)={} d_s(reduced colon)={} free={} reduced_pure={}",
            opt(r.ds_code),
            opt(r.ds_reduced),
            opt(r.ds_colon_reduced),
            r.free,
            r.reduced_pure
        ),
        format!(
            "verdicts: chain={:?} free_equality={:?} relative={:?}",
            r.verdict_chain, r.verdict_free_equality, r.verdict_relative
        ),
    ];
    text.extend(r.notes.iter().map(|n| format!("note: {n}")));
    let mut out = Output::new(Some(c.ring().name()), to_value(&r), text);
    out.violated = r.violated();
    Ok(out)
}

fn standard_form(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let sf = c.standard_form()?;
    let out = json!({
        "k": sf.k,
        "M": sf.m.row_vecs(),
        "N1": sf.n1.row_vecs(),
        "N2": sf.n2.row_vecs(),
        "trail": sf.trail,
        "generators": sf.code.generators(),
    });
    let mut text = vec![format!("k={} trail={:?}", sf.k, sf.trail)];
    text.extend(rows(sf.code.generators()));
    Ok(Output::new(Some(c.ring().name()), out, text))
}

fn lift(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let s = stabilizer_lift(&c)?;
    let out = json!({
        "phase_order": c.ring().phase_order(),
        "generators": s.generators(),
        "orders": s.orders(),
        "group_order": s.order(),
    });
    let mut text = vec![format!("|S|={} (phase exponents mod {})", s.order(), c.ring().phase_order())];
    text.extend(s.generators().iter().zip(s.orders()).map(|(g, m)| format!("{g}  order {m}")));
    Ok(Output::new(Some(c.ring().name()), out, text))
}

fn realize(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let ring = c.ring();
    let s = stabilizer_lift(&c)?;
    let elements = s.elements(cli.limits())?;
    let q = quantum_code(ring, c.n(), &elements, cli.limits())?;
    let matrices = s
        .generators()
        .iter()
        .map(|g| {
            let m = realize_matrix(ring, g, cli.limits())?;
            Ok(json!({
                "element": g,
                "matrix": (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }))
        })
        .collect::<Result<Vec<Value>, Error>>()?;
    let basis: Vec<Vec<[f64; 2]>> = q.basis.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect();
    let out = json!({"generators": matrices, "dimension": q.dimension, "group_order": elements.len(), "basis": basis});
    let text = vec![format!("dim Q = {} = {}^{} / {}", q.dimension, ring.size(), c.n(), elements.len())];
    Ok(Output::new(Some(ring.name()), out, text))
}

fn isometry_group(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let mode = cli.mode.as_deref().unwrap_or("monomial");
    let (symp, group_mode) = match mode {
        "monomial" => (false, GroupMode::Code),
        "monomial-dual" => (false, GroupMode::DualFixingCode),
        "symp" => (true, GroupMode::Code),
        "symp-dual" => (true, GroupMode::DualFixingCode),
        other => return Err(invalid(format!("unknown --mode {other:?} (monomial, monomial-dual, symp, symp-dual)"))),
    };
    let (value, order) = if symp {
        let g = enumerate_symp_group(&c, group_mode, cli.limits())?;
        (to_value(&g), g.order)
    } else {
        let g = enumerate_monomial_group(&c, group_mode, cli.limits())?;
        (to_value(&g), g.order)
    };
    Ok(Output::new(Some(c.ring().name()), value, vec![format!("{mode} group order {order}")]))
}

fn extend(cli: &Cli) -> Outcome {
    let c = cli.load_code()?;
    let target = load(cli.target.as_ref().ok_or_else(|| invalid("--target <file> is required"))?)?;
    if target.ring().spec() != c.ring().spec() || target.n() != c.n() {
        return Err(invalid("--target must have the same ring and length"));
    }
    let f = CodeMap::from_generator_images(c.clone(), target.generators(), cli.limits())?;
    let isometry = f.is_symplectic_isometry(cli.limits())?;
    let r = extension_search(&f, cli.limits())?;
    let verdict = match &r.found {
        Some(m) => format!("extends: {}", m.describe()),
        None => format!("no extension among {} SL2-monomials", r.total),
    };
    let out = json!({"symplectic_isometry": isometry, "extension": r});
    Ok(Output::new(Some(c.ring().name()), out, vec![format!("symplectic isometry: {isometry}"), verdict]))
}

fn classify(cli: &Cli) -> Outcome {
    let ring = cli.ring()?;
    let n = cli.n.unwrap_or(1);
    let r = classify_ambient_isometries(&ring, n, cli.seed, cli.limits())?;
    let text = vec![format!(
        "{} isometries among {} {} linear maps; |SL2|={} monomial group order {}; matches monomials: {}",
        r.isometries,
        r.examined,
        if r.exhaustive { "(all)" } else { "sampled" },
        r.sl2_order,
        r.monomial_group_order,
        r.matches_monomials
    )];
    Ok(Output::new(Some(ring.name()), to_value(&r), text))
}

fn search(cli: &Cli) -> Outcome {
    let ring = cli.ring()?;
    let n = cli.n()?;
    let k = cli.k.unwrap_or(1);
    let records: Vec<SearchRecord> = match cli.mode.as_deref().unwrap_or("random") {
        "random" => conjecture_search(&ring, n, k, cli.trials, cli.seed, cli.limits())?,
        "exhaustive" => {
            if ring.name() != "Z4" || n > 2 {
                return Err(invalid("exhaustive mode is limited to Z4 with n <= 2"));
            }
            all_free_stabilizers(&ring, n, k, cli.limits())?
                .iter()
                .enumerate()
                .map(|(i, c)| compare_relative_distances(c, i as u64, cli.limits()))
                .collect::<Result<_, _>>()?
        }
        other => return Err(invalid(format!("unknown --mode {other:?} (random, exhaustive)"))),
    };
    let summary = SearchSummary::from_records(&records);
    let mut text = vec![format!(
        "{} trials ({RNG_NAME}, seeds {}..): {} equalities, {} strict, {} violations",
        summary.trials,
        cli.seed,
        summary.equalities,
        summary.strict.len(),
        summary.violations.len()
    )];
    for r in &summary.strict {
        text.push(format!(
            "COUNTEREXAMPLE CANDIDATE seed={} dist_ring={} dist_field={} rows={:?}",
            r.seed, r.dist_ring, r.dist_field, r.matrices
        ));
    }
    let lines = records.iter().map(|r| serde_json::to_string(r).expect("serializable")).collect();
    let mut out = Output::new(Some(ring.name()), to_value(&summary), text);
    out.violated = !summary.violations.is_empty();
    out.lines = Some(lines);
    Ok(out)
}

fn inputs(cli: &Cli) -> Value {
    json!({
        "code": cli.code.as_ref().map(|p| p.display().to_string()),
        "target": cli.target.as_ref().map(|p| p.display().to_string()),
        "ring": cli.ring,
        "n": cli.n,
        "k": cli.k,
        "trials": cli.trials,
        "mode": cli.mode,
    })
}

fn emit(cli: &Cli, out: &Output, elapsed_ms: u128) -> Result<(), Failure> {
    let report = Report {
        command: cli.command.name(),
        ring: out.ring.as_deref(),
        inputs: inputs(cli),
        outputs: &out.outputs,
        seed: cli.seed,
        guard: json!({"force": cli.force}),
        version: env!("CARGO_PKG_VERSION"),
        elapsed_ms,
    };
    let body = match &out.lines {
        Some(lines) => lines.iter().map(|l| format!("{l}\n")).collect::<String>(),
        None => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
    };
    match cli.json.as_deref() {
        Some("-") => {
            print!("{body}");
            if out.lines.is_some() {
                eprintln!("{}", out.text.join("\n"));
            }
        }
        Some(path) => {
            fs::write(path, body).map_err(|e| invalid(format!("cannot write {path}: {e}")))?;
            println!("{}", out.text.join("\n"));
        }
        None => println!("{}", out.text.join("\n")),
    }
    std::io::stdout().flush().ok();
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    let out = match cli.command {
        Command::RingInfo => ring_info(cli),
        Command::Check => check(cli),
        Command::Dual => dual(cli),
        Command::Distance => distance(cli),
        Command::Reduce => reduce(cli),
        Command::StandardForm => standard_form(cli),
        Command::Lift => lift(cli),
        Command::Realize => realize(cli),
        Command::IsometryGroup => isometry_group(cli),
        Command::Extend => extend(cli),
        Command::Classify => classify(cli),
        Command::Search => search(cli),
    }?;
    emit(cli, &out, start.elapsed().as_millis())?;
    Ok(out.violated)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: a checked distance relation was violated");
            ExitCode::from(3)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit)
        }
    }
}
