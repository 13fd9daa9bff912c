//! Command-line entry point: parameter inspection, single transaction runs,
//! the benchmark suite, and report verification.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 parameter error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fhe::{Context, EncryptionParameters, Preset, Scheme};
use smob::bench::{
    self, audit_summary, estimate_cost, qualitative_flags, run_transaction_bench, time_operation,
    BenchOp, BenchReport, CountingAllocator, Environment, MemoryApprox, ReportFormat,
    PAPER_INSTANCE_CORES, PAPER_PRICE_PER_HOUR_USD,
};
use smob::transactions::{run_transaction, verify_outcome, TransactionKind, Verdict, WorkloadSpec};
use smob::transport::TransportKind;
use smob::SmobError;

#[global_allocator]
static ALLOC: CountingAllocator = CountingAllocator;

#[derive(Parser)]
#[command(name = "smob", about = "Encrypted smart-mobility transaction simulator and benchmark")]
struct Cli {
    /// JSON config file with the same keys as the flags; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the encryption parameters for a preset.
    Params(ParamsArgs),
    /// Run one transaction end to end and verify it against the oracle.
    Run(RunArgs),
    /// Run the benchmark suite and emit a report.
    Bench(BenchArgs),
    /// Check a previously emitted JSON report for internal consistency.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ParamsArgs {
    /// desk | paper
    #[arg(long)]
    preset: Option<String>,
    /// bfv | bgv | ckks | all
    #[arg(long)]
    scheme: Option<String>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// t1 | t2 | t3
    #[arg(long)]
    transaction: Option<String>,
    /// bfv | bgv | ckks
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    providers: Option<usize>,
    /// desk | paper
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// inproc | tcp
    #[arg(long)]
    transport: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-provider prices in cents; defaults to 100 per provider.
    #[arg(long, value_delimiter = ',')]
    prices: Option<Vec<f64>>,
    #[arg(long)]
    discount: Option<f64>,
    #[arg(long)]
    bonus: Option<f64>,
    /// Provider index that supplies the encrypted discount/bonus pair.
    #[arg(long)]
    db_provider: Option<usize>,
    /// Audit ciphertexts by their content category rather than readability.
    #[arg(long)]
    strict_content: bool,
}

#[derive(Args, Clone)]
struct BenchArgs {
    /// Comma-separated subset of bfv,bgv,ckks.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Comma-separated subset of t1,t2,t3.
    #[arg(long, value_delimiter = ',')]
    transactions: Option<Vec<String>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    providers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// inproc | tcp
    #[arg(long)]
    transport: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv | plotdata
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    price_per_hour: Option<f64>,
    #[arg(long)]
    instance_cores: Option<u32>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report file emitted by `smob bench --format json`.
    #[arg(long = "in")]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let result = match cli.cmd {
        Cmd::Params(a) => cmd_params(a, &config),
        Cmd::Run(a) => cmd_run(a, &config),
        Cmd::Bench(a) => cmd_bench(a, &config),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: SmobError) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e {
        SmobError::Verification(_) => 1,
        SmobError::Io(_) | SmobError::Transport(_) => 3,
        _ => 2,
    };
    ExitCode::from(code)
}

fn load_config(path: Option<&Path>) -> Result<Value, SmobError> {
    match path {
        None => Ok(Value::Null),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| SmobError::Config(format!("config {}: {e}", p.display())))
        }
    }
}

/// Flag value if given, else the config key, else the default.
fn pick<T: Clone, F: FnOnce(&Value) -> Option<T>>(
    flag: Option<T>,
    config: &Value,
    key: &str,
    from: F,
    default: T,
) -> T {
    flag.or_else(|| config.get(key).and_then(from))
        .unwrap_or(default)
}

fn pick_str(flag: Option<String>, config: &Value, key: &str, default: &str) -> String {
    pick(
        flag,
        config,
        key,
        |v| v.as_str().map(str::to_string),
        default.to_string(),
    )
}

fn parse_schemes(s: &[String]) -> Result<Vec<Scheme>, SmobError> {
    if s.len() == 1 && s[0] == "all" {
        return Ok(vec![Scheme::Bfv, Scheme::Bgv, Scheme::Ckks]);
    }
    s.iter().map(|n| Ok(Scheme::from_name(n)?)).collect()
}

fn parse_transport(s: &str) -> Result<TransportKind, SmobError> {
    match s {
        "inproc" => Ok(TransportKind::Inproc),
        "tcp" => Ok(TransportKind::Tcp),
        other => Err(SmobError::Config(format!("unknown transport {other}"))),
    }
}

fn params_json(p: &EncryptionParameters) -> Value {
    json!({
        "scheme": p.scheme.name(),
        "preset": p.preset.map(|x| x.name()),
        "n": p.n,
        "coeff_modulus_bits": p.coeff_modulus_bits,
        "total_modulus_bits": p.coeff_modulus_bits.iter().sum::<u32>(),
        "plain_modulus": p.plain_modulus,
        "scale_bits": p.scale_bits,
        "error_stddev": p.error_stddev,
        "relin_base_bits": p.relin_base_bits,
    })
}

fn cmd_params(a: ParamsArgs, config: &Value) -> Result<(), SmobError> {
    let preset = Preset::from_name(&pick_str(a.preset, config, "preset", "desk"))?;
    let scheme = pick_str(a.scheme, config, "scheme", "all");
    let schemes = parse_schemes(&[scheme])?;
    let out: Vec<Value> = schemes
        .iter()
        .map(|&s| params_json(&EncryptionParameters::preset(s, preset)))
        .collect();
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}

fn workload_from(a: &RunArgs, config: &Value, providers: usize) -> WorkloadSpec {
    let prices = a
        .prices
        .clone()
        .or_else(|| {
            config.get("prices").and_then(|v| {
                v.as_array()
                    .map(|xs| xs.iter().filter_map(Value::as_f64).collect())
            })
        })
        .unwrap_or_else(|| vec![100.0; providers]);
    let mut w = WorkloadSpec::new(
        prices,
        pick(a.discount, config, "discount", Value::as_f64, 2.0),
        pick(a.bonus, config, "bonus", Value::as_f64, 50.0),
    );
    w.db_provider = pick(a.db_provider, config, "db_provider", |v| {
        v.as_u64().map(|x| x as usize)
    }, 0);
    w
}

fn cmd_run(a: RunArgs, config: &Value) -> Result<(), SmobError> {
    let kind = TransactionKind::from_name(&pick_str(
        a.transaction.clone(),
        config,
        "transaction",
        "t1",
    ))?;
    let scheme = Scheme::from_name(&pick_str(a.scheme.clone(), config, "scheme", "bfv"))?;
    let preset = Preset::from_name(&pick_str(a.preset.clone(), config, "preset", "desk"))?;
    let providers = pick(a.providers, config, "providers", |v| {
        v.as_u64().map(|x| x as usize)
    }, 2);
    let seed = pick(a.seed, config, "seed", Value::as_u64, 1);
    let transport = parse_transport(&pick_str(a.transport.clone(), config, "transport", "inproc"))?;
    let w = workload_from(&a, config, providers);

    let ctx = Context::new(EncryptionParameters::preset(scheme, preset))?;
    let outcome = run_transaction(kind, &ctx, &w, seed, transport)?;
    let verdict = verify_outcome(&outcome, &w, &ctx)?;
    let doc = json!({
        "transaction": kind.name(),
        "scheme": scheme.name(),
        "preset": preset.name(),
        "providers": providers,
        "seed": seed,
        "transport": transport.name(),
        "total": outcome.total,
        "verdict": verdict,
        "audit": {
            "messages": outcome.audit.message_count(),
            "violations": outcome.audit.violations,
            "warnings": outcome.audit.warnings,
        },
        "op_counts": outcome
            .op_counts()
            .iter()
            .map(|(op, c)| json!({"op": op, "count": c}))
            .collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&doc).unwrap();
    match &a.out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    if verdict != Verdict::Ok {
        return Err(SmobError::Verification(format!("{verdict:?}")));
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs, config: &Value) -> Result<(), SmobError> {
    let schemes = parse_schemes(&a.schemes.clone().unwrap_or_else(|| {
        config
            .get("schemes")
            .and_then(|v| {
                v.as_array().map(|xs| {
                    xs.iter()
                        .filter_map(|x| x.as_str().map(str::to_string))
                        .collect()
                })
            })
            .unwrap_or_else(|| vec!["all".into()])
    }))?;
    let kinds: Vec<TransactionKind> = a
        .transactions
        .clone()
        .unwrap_or_else(|| vec!["t1".into(), "t2".into(), "t3".into()])
        .iter()
        .map(|n| TransactionKind::from_name(n))
        .collect::<Result<_, _>>()?;
    let preset = Preset::from_name(&pick_str(a.preset.clone(), config, "preset", "desk"))?;
    let reps = pick(a.reps, config, "reps", |v| v.as_u64().map(|x| x as usize), 500);
    let providers = pick(a.providers, config, "providers", |v| {
        v.as_u64().map(|x| x as usize)
    }, 2);
    let seed = pick(a.seed, config, "seed", Value::as_u64, 1);
    let transport = parse_transport(&pick_str(a.transport.clone(), config, "transport", "inproc"))?;
    let format = ReportFormat::from_name(&pick_str(a.format.clone(), config, "format", "json"))?;
    let price = pick(
        a.price_per_hour,
        config,
        "price_per_hour",
        Value::as_f64,
        PAPER_PRICE_PER_HOUR_USD,
    );
    let cores = pick(a.instance_cores, config, "instance_cores", |v| {
        v.as_u64().map(|x| x as u32)
    }, PAPER_INSTANCE_CORES);
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("smob_report.json"));

    bench::reset_allocator_peak();
    // Transactions repeat a bounded number of times; whole-transaction reps
    // beyond this add little and dominate wall time at the large preset.
    let tx_reps = reps.min(25).max(1);
    let w = WorkloadSpec::new(vec![100.0; providers], 2.0, 50.0);

    let mut operations = Vec::new();
    let mut transactions = Vec::new();
    let mut sizes = std::collections::BTreeMap::new();
    let mut outcomes = Vec::new();
    for &scheme in &schemes {
        let ctx = Context::new(EncryptionParameters::preset(scheme, preset))?;
        for op in BenchOp::ALL {
            // Context creation is timed once, separately from the rest.
            let op_reps = if op == BenchOp::ContextCreation { 1 } else { reps };
            operations.push(time_operation(op, &ctx, op_reps, seed)?);
        }
        for &kind in &kinds {
            transactions.push(run_transaction_bench(
                kind, &ctx, &w, tx_reps, seed, transport,
            )?);
            // One audited run per cell feeds the report's audit block.
            let o = run_transaction(kind, &ctx, &w, seed, transport)?;
            match verify_outcome(&o, &w, &ctx)? {
                Verdict::Ok => outcomes.push(o),
                v => return Err(SmobError::Verification(format!("{v:?}"))),
            }
        }
        sizes.insert(scheme.name().to_string(), bench::measure_sizes(&ctx, seed)?);
    }

    let cpu_seconds = transactions.iter().map(|t| t.total_ns).sum::<f64>() / 1e9;
    let serialized_total: usize = sizes.values().flat_map(|m| m.values()).sum();
    let report = BenchReport {
        environment: Environment::detect(),
        params: json!({
            "preset": preset.name(),
            "schemes": schemes.iter().map(|s| s.name()).collect::<Vec<_>>(),
            "transactions": kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
            "providers": providers,
            "reps": reps,
            "transaction_reps": tx_reps,
            "seed": seed,
            "transport": transport.name(),
            "per_scheme": schemes
                .iter()
                .map(|&s| params_json(&EncryptionParameters::preset(s, preset)))
                .collect::<Vec<_>>(),
        }),
        flags: qualitative_flags(&operations),
        operations,
        transactions,
        sizes,
        memory_approx: MemoryApprox {
            serialized_total_bytes: serialized_total,
            allocator_peak_bytes: Some(bench::allocator_peak_bytes()),
            paper_ref_mb: bench::paper_memory_refs(),
        },
        cost: estimate_cost(cpu_seconds, price, cores)?,
        audit: audit_summary(&outcomes),
    };
    let files = bench::emit_report(&report, format, &out)?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), SmobError> {
    let text = std::fs::read_to_string(&a.input)?;
    let report: BenchReport = serde_json::from_str(&text)
        .map_err(|e| SmobError::Verification(format!("report does not match schema: {e}")))?;
    let mut problems = Vec::new();
    for t in &report.transactions {
        if !t.verified {
            problems.push(format!("{} {} not verified", t.kind.name(), t.scheme));
        }
        // Aggregation consistency: total equals the sum of party phase means.
        let sum: f64 = t
            .parties
            .iter()
            .flat_map(|p| p.phase_ns.values())
            .sum();
        if (sum - t.total_ns).abs() > 0.01 * t.total_ns.max(1.0) {
            problems.push(format!(
                "{} {}: party phases sum to {sum:.0} ns but total is {:.0} ns",
                t.kind.name(),
                t.scheme,
                t.total_ns
            ));
        }
    }
    if report.audit.violations > 0 {
        problems.push(format!("audit reports {} violations", report.audit.violations));
    }
    for m in &report.operations {
        if m.reps == 0 {
            problems.push(format!("operation {} {} has zero repetitions", m.op, m.scheme));
        }
    }
    if problems.is_empty() {
        println!("report ok: {} operations, {} transactions, {} audited messages",
            report.operations.len(),
            report.transactions.len(),
            report.audit.messages
        );
        Ok(())
    } else {
        for p in &problems {
            eprintln!("verify: {p}");
        }
        Err(SmobError::Verification(format!("{} problems", problems.len())))
    }
}
