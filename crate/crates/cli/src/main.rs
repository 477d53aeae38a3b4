mod render;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use weipe_core::bench::{aggregate, run_manifest, BenchError, SessionManifest};
use weipe_core::corpus::validate_corpus;
use weipe_core::service::{error_body, identify_body, serve};
use weipe_core::{
    normalize_email, Engine, EngineConfig, FixedClock, Service, ServiceConfig, Threshold,
};

const EXIT_INPUT: u8 = 2;
const EXIT_NOTHING_FOUND: u8 = 3;
const EXIT_SETUP: u8 = 4;
const EXIT_INVALID_CORPUS: u8 = 5;

#[derive(Parser)]
#[command(name = "weipe", version, about = "Identify people on the web from an e-mail address")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Look up one address and print what was found.
    Identify(IdentifyArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Replay session manifests and write success-rate tables.
    Bench(BenchArgs),
    /// Fixture corpus utilities.
    Fixtures {
        #[command(subcommand)]
        action: FixturesCommand,
    },
}

#[derive(Args)]
struct EngineSource {
    /// Engine configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fixture corpus; overrides the configured one.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct IdentifyArgs {
    email: String,
    /// Results kept per provider.
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..=i64::from(weipe_core::model::MAX_EPS)))]
    eps: Option<i64>,
    #[command(flatten)]
    source: EngineSource,
    /// Print the service's JSON body instead of the text report.
    #[arg(long)]
    json: bool,
    /// Pin the clock (RFC 3339) for reproducible output.
    #[arg(long, value_name = "TIME", value_parser = parse_time)]
    fixed_time: Option<FixedClock>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[command(flatten)]
    source: EngineSource,
    /// Append one JSON line per lookup to this file.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Cache lifetime in seconds; defaults to the configured value.
    #[arg(long)]
    ttl: Option<u64>,
    #[arg(long)]
    no_cache: bool,
    /// Directory with the built web UI.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    #[arg(long, value_name = "TIME", value_parser = parse_time)]
    fixed_time: Option<FixedClock>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    source: EngineSource,
    /// Output directory for results.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Check naming, JSON shape and page references.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
}

fn parse_time(s: &str) -> Result<FixedClock, String> {
    FixedClock::parse(s).map_err(|e| format!("expected an RFC 3339 time: {e}"))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn setup(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SETUP,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn load_config(source: &EngineSource) -> Result<EngineConfig, Failure> {
    if let Some(corpus) = &source.corpus {
        if !corpus.is_dir() {
            return Err(Failure::setup(format!("corpus {} is not a directory", corpus.display())));
        }
    }
    match &source.config {
        Some(path) => EngineConfig::load(path).map_err(|e| Failure::setup(format!("config: {e}"))),
        None if source.corpus.is_some() => Ok(EngineConfig::default()),
        None => Err(Failure::setup("either --config or --corpus is required")),
    }
}

fn build_engine(source: &EngineSource, config: &EngineConfig) -> Result<Engine, Failure> {
    if source.corpus.is_none() {
        if let Some(corpus) = config.corpus.as_deref().filter(|c| !c.is_dir()) {
            return Err(Failure::setup(format!("corpus {} is not a directory", corpus.display())));
        }
    }
    Engine::from_config(config, source.corpus.as_deref())
        .map_err(|e| Failure::setup(format!("providers: {e}")))
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Runtime::new().map_err(|e| Failure::setup(format!("runtime: {e}")))
}

fn identify(args: IdentifyArgs) -> Outcome {
    let email = normalize_email(&args.email).map_err(|e| Failure::input(format!("invalid_email: {e}")))?;
    let eps = args.eps.map(|n| Threshold::new(n).expect("range checked by clap"));
    let config = load_config(&args.source)?;
    let mut engine = build_engine(&args.source, &config)?;
    if let Some(clock) = args.fixed_time {
        engine = engine.with_clock(Arc::new(clock));
    }
    let nothing = |code: &str| {
        if args.json {
            println!("{}", error_body(code));
        } else {
            println!("no information found");
        }
        Ok(EXIT_NOTHING_FOUND)
    };
    if engine.registry().is_empty() {
        eprintln!("weipe: no providers registered");
        return nothing("engine_unavailable");
    }
    let identity = runtime()?
        .block_on(engine.identify(&email, eps))
        .map_err(|e| Failure::setup(e.to_string()))?;
    if identity.all_providers_failed() {
        for q in identity.sources_queried() {
            eprintln!("weipe: {} {}", q.source.provider_name, q.status.as_str());
        }
        return nothing("all_providers_failed");
    }
    let found = identity.summary_success() || identity.blog_success();
    if args.json {
        println!("{}", identify_body(&identity, false));
    } else if found {
        print!("{}", render::report(&identity));
    } else {
        println!("no information found");
    }
    Ok(if found { 0 } else { EXIT_NOTHING_FOUND })
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    {
        let mut term = match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(s) => s,
            Err(_) => return interrupt.await,
        };
        tokio::select! {
            _ = interrupt => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    interrupt.await;
}

fn serve_cmd(args: ServeArgs) -> Outcome {
    let config = load_config(&args.source)?;
    let mut engine = build_engine(&args.source, &config)?;
    if let Some(clock) = args.fixed_time {
        engine = engine.with_clock(Arc::new(clock));
    }
    let service = Service::new(
        Arc::new(engine),
        ServiceConfig {
            cache_enabled: !args.no_cache,
            ttl_s: args.ttl.unwrap_or(config.cache_ttl_s()),
            log_path: args.log,
            ui_dir: args.ui_dir,
        },
    )
    .map_err(|e| Failure::setup(format!("search log: {e}")))?;
    let rt = runtime()?;
    rt.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::setup(format!("cannot listen on {addr}: {e}")))?;
        let local: SocketAddr = listener
            .local_addr()
            .map_err(|e| Failure::setup(e.to_string()))?;
        println!("listening on http://{local}");
        serve(listener, Arc::new(service), shutdown_signal())
            .await
            .map_err(|e| Failure::setup(format!("server: {e}")))?;
        eprintln!("weipe: shut down");
        Ok(0)
    })
}

fn bench_failure(e: BenchError) -> Failure {
    match e {
        BenchError::NoSessions => Failure::input("no sessions"),
        e @ (BenchError::EmptySession
        | BenchError::DuplicateEmail(_)
        | BenchError::InvalidEmail { .. }) => Failure::input(e.to_string()),
        e => Failure::setup(e.to_string()),
    }
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::setup(format!("cannot write {}: {e}", path.display())))
}

fn bench(args: BenchArgs) -> Outcome {
    let manifest = SessionManifest::load(&args.manifest)
        .map_err(|e| Failure::setup(format!("manifest {}: {e}", args.manifest.display())))?;
    manifest.resolve().map_err(bench_failure)?;
    let config = load_config(&args.source)?;
    let engine = build_engine(&args.source, &config)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::setup(format!("cannot create {}: {e}", args.out.display())))?;
    let csv_path = args.out.join("results.csv");
    let json_path = args.out.join("summary.json");
    // Fail on an unwritable destination before spending time on lookups.
    for p in [&csv_path, &json_path] {
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(p)
            .map_err(|e| Failure::setup(format!("cannot write {}: {e}", p.display())))?;
    }

    let reports = runtime()?
        .block_on(run_manifest(&manifest, &engine))
        .map_err(bench_failure)?;
    let agg = aggregate(&reports).map_err(bench_failure)?;
    let csv = agg.to_csv();
    write_output(&csv_path, &csv)?;
    write_output(&json_path, &(agg.summary_json() + "\n"))?;
    print!("{csv}");
    println!(
        "summary_rate {} ({:.3}), blog_rate {} ({:.3})",
        agg.summary_rate,
        agg.summary_rate_f64(),
        agg.blog_rate,
        agg.blog_rate_f64()
    );
    Ok(0)
}

fn validate(corpus: &Path) -> Outcome {
    let violations = validate_corpus(corpus)
        .map_err(|e| Failure::setup(format!("corpus {}: {e}", corpus.display())))?;
    if violations.is_empty() {
        println!("corpus ok: {}", corpus.display());
        return Ok(0);
    }
    for v in &violations {
        println!("{v}");
    }
    eprintln!("weipe: {} violation(s)", violations.len());
    Ok(EXIT_INVALID_CORPUS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Identify(args) => identify(args),
        Command::Serve(args) => serve_cmd(args),
        Command::Bench(args) => bench(args),
        Command::Fixtures {
            action: FixturesCommand::Validate { corpus },
        } => validate(&corpus),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("weipe: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
