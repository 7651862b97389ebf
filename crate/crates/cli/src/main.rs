use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use philab_core::counterex::{describe_module, describe_resolution, FamilySpec, VerificationReport, Workbench};
use philab_core::engine::{engine, ENGINE_NAMES};
use philab_core::exactla::DEFAULT_PRIME;
use philab_core::igusa::{phi, psi, ClassRegistry, PsiValue, DEFAULT_ORBIT_CAP};
use philab_core::perchain::{periodic_decompose, periodic_syzygy_power, wrap, BoundedComplex, PeriodicComplex};
use philab_core::quiver::{parse_presentation, Algebra};
use philab_core::repmod::{decompose, syzygy, Module, ModuleJson};
use philab_core::trunres::iterate_syzygy;
use philab_core::{Error, Field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "philab", version, about = "Syzygies, φ-dimension and the X/Y counterexample families")]
struct Cli {
    /// Characteristic of the ground field.
    #[arg(long, global = true, env = "PHILAB_PRIME", default_value_t = DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Journal of isomorphism classes, reused across runs.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// φ (and ψ with --cutoff) of a module.
    Phi(PhiArgs),
    /// Run the full verification for a range of k.
    Counterexample(CounterArgs),
    /// Ω^t of a module or of a family, decomposed.
    Syzygy(SyzygyArgs),
}

#[derive(Args, Debug)]
struct ModuleInput {
    /// Builtin name (A, A3CT, A_tensor_A3CT) or a presentation file.
    #[arg(long, default_value = "A")]
    algebra: String,
    /// Literal such as `S3+S4`, `P1^2`, or a module JSON file.
    #[arg(long)]
    module: Option<String>,
}

#[derive(Args, Debug)]
struct PhiArgs {
    #[command(flatten)]
    input: ModuleInput,
    /// Also compute ψ, giving up on projective dimensions beyond this.
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args, Debug)]
struct CounterArgs {
    /// A single k or an inclusive range `a..b`.
    #[arg(long, default_value = "1")]
    k: String,
    #[arg(long)]
    exact_phi: bool,
    #[arg(long, default_value = "formula", value_parser = clap::builder::PossibleValuesParser::new(ENGINE_NAMES))]
    engine: String,
    /// Include wall-clock timings (makes the output non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug)]
struct SyzygyArgs {
    #[command(flatten)]
    input: ModuleInput,
    /// X<k>, Y<k> or Z<k>_<i>, over A.
    #[arg(long, conflicts_with = "module")]
    family: Option<String>,
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Work with the wrapped complex over the 3-periodic tensor algebra.
    #[arg(long)]
    periodic: bool,
    #[arg(long, default_value = "formula", value_parser = clap::builder::PossibleValuesParser::new(ENGINE_NAMES))]
    engine: String,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<Error>() {
            Some(Error::Parse { .. } | Error::Config(_) | Error::Invalid(_)) => 2,
            Some(Error::DecompositionFailure(_)) => 3,
            _ => 1,
        };
        Failure { code, err }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        anyhow::Error::from(err).into()
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        err: anyhow!(msg.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let field = Field::new(cli.prime)?;
    let (report, code) = match &cli.command {
        Command::Phi(a) => (cmd_phi(cli, field, a)?, 0),
        Command::Syzygy(a) => (cmd_syzygy(cli, field, a)?, 0),
        Command::Counterexample(a) => cmd_counterexample(cli, field, a)?,
    };
    emit(cli, &report)?;
    Ok(code)
}

/// A finished report, in both renderings.
struct Report {
    json: Value,
    text: String,
}

fn emit(cli: &Cli, r: &Report) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&r.json).map_err(anyhow::Error::from)? + "\n",
        Format::Text => r.text.clone(),
    };
    match &cli.out {
        None => {
            std::io::stdout().write_all(body.as_bytes()).map_err(anyhow::Error::from)?;
        }
        Some(path) => write_atomic(path, body.as_bytes())?,
    }
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_algebra(name: &str, field: Field) -> anyhow::Result<Arc<Algebra>> {
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(Arc::new(parse_presentation(&text, field)?));
    }
    Ok(Algebra::builtin(name, field)?)
}

/// `S<i>`, `P<i>`, joined by `+`, each optionally raised to `^n`.
fn parse_module_literal(alg: &Arc<Algebra>, lit: &str) -> anyhow::Result<Module> {
    let n = alg.vertex_count();
    let mut parts = Vec::new();
    for term in lit.split('+').map(str::trim) {
        let bad = || Error::Config(format!("cannot read module term {term:?}"));
        let (base, power) = match term.split_once('^') {
            Some((b, e)) => (b.trim(), e.trim().parse::<usize>().map_err(|_| bad())?),
            None => (term, 1),
        };
        let mut chars = base.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let v: usize = chars.as_str().parse().map_err(|_| bad())?;
        if v == 0 || v > n {
            return Err(Error::Config(format!("vertex {v} out of range 1..={n}")).into());
        }
        let m = match kind {
            'S' | 's' => Module::simple(alg, v - 1),
            'P' | 'p' => Module::projective(alg, v - 1),
            _ => return Err(bad().into()),
        };
        parts.push(m.power(power));
    }
    Ok(Module::direct_sum(&parts.iter().collect::<Vec<_>>())?)
}

fn load_module(alg: &Arc<Algebra>, spec: &str) -> anyhow::Result<Module> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let json: ModuleJson = serde_json::from_str(&text).map_err(Error::from)?;
        return Ok(json.to_module(alg)?);
    }
    parse_module_literal(alg, spec)
}

fn open_registry(cli: &Cli, alg: &Arc<Algebra>) -> anyhow::Result<ClassRegistry> {
    Ok(match &cli.registry {
        Some(p) => ClassRegistry::open(alg, p)?,
        None => ClassRegistry::new(alg),
    })
}

fn cmd_phi(cli: &Cli, field: Field, a: &PhiArgs) -> Result<Report, Failure> {
    let alg = load_algebra(&a.input.algebra, field)?;
    let lit = a.input.module.as_deref().ok_or_else(|| usage("phi needs --module"))?;
    let m = load_module(&alg, lit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut reg = open_registry(cli, &alg)?;
    let rep = phi(&m, &mut reg, &mut rng, DEFAULT_ORBIT_CAP)?;
    let psi_value = match a.cutoff {
        Some(c) => Some(psi(&m, c, &mut reg, &mut rng)?),
        None => None,
    };
    let trail: Vec<Value> = rep
        .orbit
        .iter()
        .map(|&id| {
            let r = reg.representative(id);
            json!({"class": id, "dims": r.dims(), "name": describe_module(r)})
        })
        .collect();
    let mut text = format!("algebra {}, module {}\nφ = {}\nranks r_t: {:?}\n", alg.name(), lit, rep.phi, rep.ranks);
    match &psi_value {
        Some(PsiValue::Exact(n)) => text.push_str(&format!("ψ = {n}\n")),
        Some(PsiValue::AtLeastUnknown { phi, finite_max, undetermined }) => text.push_str(&format!(
            "ψ ≥ {} ({undetermined} projective dimensions beyond the cutoff)\n",
            phi + finite_max
        )),
        None => {}
    }
    text.push_str("syzygy classes:\n");
    for t in &trail {
        text.push_str(&format!("  [{}] {} {}\n", t["class"], t["name"].as_str().unwrap_or(""), t["dims"]));
    }
    Ok(Report {
        json: json!({
            "algebra": alg.name(),
            "module": lit,
            "phi": rep.phi,
            "ranks": rep.ranks,
            "psi": psi_value,
            "summand_classes": rep.summand_classes,
            "classes": trail,
        }),
        text,
    })
}

fn parse_k_range(s: &str) -> Result<Vec<usize>, Failure> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("cannot read k range {s:?}")));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let k = num(s)?;
            (k, k)
        }
    };
    if lo == 0 {
        return Err(usage("k must be at least 1"));
    }
    if hi < lo {
        return Err(usage(format!("empty k range {s:?}")));
    }
    Ok((lo..=hi).collect())
}

fn cmd_counterexample(cli: &Cli, field: Field, a: &CounterArgs) -> Result<(Report, u8), Failure> {
    let ks = parse_k_range(&a.k)?;
    if cli.registry.is_some() {
        eprintln!("note: --registry is not used by counterexample");
    }
    // One worker per k; each gets its own seed so that results do not
    // depend on scheduling.
    let results: Vec<Result<VerificationReport, Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = ks
            .iter()
            .map(|&k| {
                s.spawn(move || {
                    let mut wb = Workbench::new(field, cli.seed.wrapping_add(k as u64), &a.engine)?;
                    wb.record_timings = a.timings;
                    wb.verify_main(k, a.exact_phi)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut reports = Vec::new();
    for r in results {
        reports.push(r?);
    }
    let mut code = 0;
    for r in &reports {
        if !r.passes() {
            code = 4;
            eprintln!("k = {}: verification failed; certificate {:?}", r.k, r.certificate);
        }
    }
    let text = reports.iter().map(VerificationReport::render_text).collect::<Vec<_>>().join("\n");
    let json = serde_json::to_value(&reports).map_err(anyhow::Error::from)?;
    Ok((Report { json, text }, code))
}

fn periodic_summary(p: &PeriodicComplex, mult: usize) -> (Value, String) {
    let layers: Vec<String> = (0..3).map(|c| describe_module(p.layer(c))).collect();
    let line = format!("{}{}", if mult > 1 { format!("{mult} × ") } else { String::new() }, layers.join(" | "));
    (
        json!({"multiplicity": mult, "layer_dims": p.layer_dims(), "layers": layers, "dim": p.total_dim()}),
        line,
    )
}

fn cmd_syzygy(cli: &Cli, field: Field, a: &SyzygyArgs) -> Result<Report, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let t = a.t;
    if let Some(fam) = &a.family {
        let spec: FamilySpec = fam.parse()?;
        let mut wb = Workbench::new(field, cli.seed, &a.engine)?;
        let x = wb.family(spec)?;
        let mut text = format!("{spec}: {}\n", describe_resolution(&x).join(" <- "));
        if a.periodic {
            let parts = engine(&a.engine)?.syzygy_parts(&x, t)?;
            let mut summands = Vec::new();
            text.push_str(&format!("Ω^{t} W{spec}, classes [-1] | [0] | [1]:\n"));
            for p in &parts {
                for (z, mult) in periodic_decompose(p, &mut rng)? {
                    let (j, line) = periodic_summary(&z, mult);
                    text.push_str(&format!("  {line}\n"));
                    summands.push(j);
                }
            }
            let count: usize = summands.iter().map(|s| s["multiplicity"].as_u64().unwrap_or(0) as usize).sum();
            text.push_str(&format!("{count} indecomposable summands\n"));
            return Ok(Report {
                json: json!({"family": spec.to_string(), "t": t, "periodic": true, "summands": summands, "count": count}),
                text,
            });
        }
        let pieces = iterate_syzygy(&x, t)?;
        text.push_str(&format!("Ω^{t} {spec} as truncated resolutions:\n"));
        let shapes: Vec<Vec<String>> = pieces.iter().map(describe_resolution).collect();
        for s in &shapes {
            text.push_str(&format!("  {}\n", s.join(" <- ")));
        }
        return Ok(Report {
            json: json!({"family": spec.to_string(), "t": t, "periodic": false, "pieces": shapes}),
            text,
        });
    }
    let alg = load_algebra(&a.input.algebra, field)?;
    let lit = a.input.module.as_deref().ok_or_else(|| usage("syzygy needs --module or --family"))?;
    let m = load_module(&alg, lit)?;
    if a.periodic {
        let p = periodic_syzygy_power(&wrap(&BoundedComplex::stalk(&m, 0)), t)?;
        let mut summands = Vec::new();
        let mut text = format!("Ω^{t} W({lit}), classes [-1] | [0] | [1]:\n");
        if !p.is_zero() {
            for (z, mult) in periodic_decompose(&p, &mut rng)? {
                let (j, line) = periodic_summary(&z, mult);
                text.push_str(&format!("  {line}\n"));
                summands.push(j);
            }
        } else {
            text.push_str("  0\n");
        }
        return Ok(Report {
            json: json!({"algebra": alg.name(), "module": lit, "t": t, "periodic": true, "summands": summands}),
            text,
        });
    }
    let mut omega = m;
    for _ in 0..t {
        omega = syzygy(&omega);
    }
    let mut summands: Vec<(Module, usize)> = if omega.is_zero() { Vec::new() } else { decompose(&omega, &mut rng)?.summands };
    summands.sort_by_cached_key(|(z, _)| describe_module(z));
    let names: Vec<String> = summands
        .iter()
        .map(|(z, n)| if *n == 1 { describe_module(z) } else { format!("({})^{n}", describe_module(z)) })
        .collect();
    let shown = if names.is_empty() { "0".to_string() } else { names.join(" ⊕ ") };
    let text = format!("Ω^{t} {lit} = {shown}\ndims {:?}\n", omega.dims());
    let json_summands: Vec<Value> = summands
        .iter()
        .map(|(z, n)| json!({"name": describe_module(z), "dims": z.dims(), "multiplicity": n}))
        .collect();
    Ok(Report {
        json: json!({"algebra": alg.name(), "module": lit, "t": t, "dims": omega.dims(), "summands": json_summands}),
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        let a = Algebra::builtin("A", Field::default()).unwrap();
        let m = parse_module_literal(&a, "S3+S4").unwrap();
        assert_eq!(m.dims(), &[0, 0, 1, 1]);
        let m = parse_module_literal(&a, "P1^2 + S2").unwrap();
        assert_eq!(m.dims(), &[2, 3, 0, 0]);
        for bad in ["Q1", "S9", "S0", "P1^x", ""] {
            assert!(parse_module_literal(&a, bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("1..3").ok().unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_k_range("2").ok().unwrap(), vec![2]);
        assert_eq!(parse_k_range("1..=2").ok().unwrap(), vec![1, 2]);
        assert_eq!(parse_k_range("0").err().unwrap().code, 2);
        assert!(parse_k_range("3..1").is_err());
    }
}
