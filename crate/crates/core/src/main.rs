use std::fmt::Write as _;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use impact_screen::api::{self, ApiError, ErrorCode, EstimateRequest, ParseRequest};
use impact_screen::band::ScreeningBand;
use impact_screen::catalog::{load_catalog, Catalog, CatalogError, RequestType};
use impact_screen::report::{build_observatory, export_table, EstimateResult, ExportFormat, DISCLAIMER};
use impact_screen::server::{self, AppState, BIND_ENV, CATALOG_ENV, DEFAULT_BIND};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

/// Screening estimates of LLM inference and training energy and carbon.
#[derive(Parser)]
#[command(name = "impact-screen", version)]
struct Cli {
    /// Catalog bundle directory; the shipped bundle when absent.
    #[arg(long, global = true, env = CATALOG_ENV, value_name = "DIR")]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-request (and annual, with a volume) energy and carbon bands.
    Estimate(EstimateArgs),
    /// Show the scenario extracted from a description.
    Parse {
        description: String,
        #[arg(long)]
        json: bool,
    },
    /// Comparison table of every catalog model at the standardized request.
    Observatory {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Load and validate a catalog bundle.
    Validate,
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = BIND_ENV, default_value = DEFAULT_BIND, value_name = "ADDR")]
        bind: SocketAddr,
    },
}

#[derive(Args)]
struct EstimateArgs {
    /// Model id, name or alias.
    #[arg(long)]
    model: Option<String>,
    /// One-sentence description of the feature; explicit flags override it.
    #[arg(long, value_name = "SENTENCE")]
    describe: Option<String>,
    #[arg(long = "in", value_name = "N")]
    input_tokens: Option<u64>,
    #[arg(long = "out", value_name = "N")]
    output_tokens: Option<u64>,
    #[arg(long, value_name = "N")]
    per_month: Option<u64>,
    #[arg(long, value_name = "CC")]
    country: Option<String>,
    #[arg(long, value_parser = parse_request_type)]
    request_type: Option<RequestType>,
    /// Print the API response instead of the report.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

fn parse_request_type(s: &str) -> Result<RequestType, String> {
    s.parse()
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure {
            code: if e.is_io() { EXIT_RUNTIME } else { EXIT_VALIDATION },
            message: format!("catalog: {e}"),
        }
    }
}

fn api_exit_code(code: ErrorCode) -> u8 {
    match code {
        ErrorCode::BadRequest | ErrorCode::BadFormat | ErrorCode::InvalidTokens | ErrorCode::InvalidVolume => {
            EXIT_USAGE
        }
        _ => EXIT_RUNTIME,
    }
}

/// Human text for an API error, with its suggestions or diagnostics.
fn describe_error(e: &ApiError) -> String {
    let Some(details) = &e.details else {
        return format!("error: {}", e.message);
    };
    let mut out = String::new();
    if let Some(list) = details["suggestions"].as_array() {
        let items: Vec<&str> = list.iter().filter_map(|v| v.as_str()).collect();
        let _ = write!(out, "error: {}", e.message);
        if !items.iter().all(|i| e.message.contains(i)) {
            let _ = write!(out, "\n  suggestions: {}", items.join(", "));
        }
    }
    if let Some(diagnostics) = details["diagnostics"].as_array() {
        out.push_str("error: the description could not be turned into a scenario");
        for d in diagnostics {
            let items: Vec<&str> = d["suggestions"]
                .as_array()
                .map(|l| l.iter().filter_map(|v| v.as_str()).collect())
                .unwrap_or_default();
            let _ = write!(
                out,
                "\n  {}: {}\n    try: {}",
                d["kind"].as_str().unwrap_or("diagnostic"),
                d["message"].as_str().unwrap_or(""),
                items.join(" | ")
            );
        }
    }
    out
}

fn api_failure(catalog: &Catalog, e: ApiError, json: bool) -> Failure {
    let code = api_exit_code(e.code);
    if json {
        print!("{}", api::error_json(catalog, e.clone()));
    }
    Failure {
        code,
        message: describe_error(&e),
    }
}

fn load(dir: &Option<PathBuf>) -> Result<Catalog, Failure> {
    match dir {
        Some(d) => Ok(load_catalog(d)?),
        None => Ok(Catalog::shipped()),
    }
}

fn band_line(label: &str, band: &ScreeningBand) -> String {
    let [low, central, high] = band.display();
    format!("  {label:<8}{central} {}  (band {low} .. {high})", band.unit)
}

fn render_estimate(catalog: &Catalog, r: &EstimateResult) -> String {
    let i = &r.inference;
    let s = &r.scenario;
    let name = catalog
        .model(&i.model_id)
        .map(|m| m.display_name.as_str())
        .unwrap_or(&i.model_id);
    let mut out = String::new();
    let _ = writeln!(out, "Screening estimate for {name} ({})", i.model_id);
    let _ = writeln!(out);
    let _ = writeln!(out, "Scenario");
    for part in impact_screen::parser::render_scenario(s).split("; ") {
        let _ = writeln!(out, "  {part}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Per request ({} input / {} output tokens, {} at {} gCO2e/kWh)",
        s.token_load.input_tokens(),
        s.token_load.output_tokens(),
        i.country_code,
        i.carbon_intensity_g_per_kwh
    );
    let _ = writeln!(out, "{}", band_line("energy", &i.energy_wh));
    let _ = writeln!(out, "{}", band_line("carbon", &i.carbon_g));
    if let Some(a) = &r.annualized {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Annual ({} requests/month, {} requests/year)",
            a.requests_per_month, a.requests_per_year
        );
        let _ = writeln!(out, "{}", band_line("energy", &a.annual_energy_kwh));
        let _ = writeln!(out, "{}", band_line("carbon", &a.annual_carbon));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Assumptions ledger");
    for a in &i.assumptions {
        let _ = writeln!(out, "  {a}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{DISCLAIMER}");
    let _ = writeln!(out, "Methodology {}", catalog.methodology_version());
    out
}

fn estimate(catalog: &Catalog, args: EstimateArgs) -> Result<(), Failure> {
    if args.model.is_none() && args.describe.is_none() {
        return Err(Failure {
            code: EXIT_USAGE,
            message: "error: give --model or --describe".into(),
        });
    }
    let req = EstimateRequest {
        description: args.describe,
        model: args.model,
        request_type: args.request_type,
        input_tokens: args.input_tokens,
        output_tokens: args.output_tokens,
        requests_per_month: args.per_month,
        country: args.country,
        ..Default::default()
    };
    let (result, response) = api::estimate(catalog, &req).map_err(|e| api_failure(catalog, e, args.json))?;
    if args.json {
        print!("{}", api::to_json(catalog, response));
    } else {
        print!("{}", render_estimate(catalog, &result));
    }
    Ok(())
}

fn parse(catalog: &Catalog, description: String, json: bool) -> Result<(), Failure> {
    let response = api::parse(catalog, &ParseRequest { description }).map_err(|e| api_failure(catalog, e, json))?;
    if json {
        print!("{}", api::to_json(catalog, response));
    } else {
        println!("Parsed scenario (screening input)");
        for part in response.summary.split("; ") {
            println!("  {part}");
        }
    }
    Ok(())
}

fn observatory(catalog: &Catalog, format: Format, output: Option<PathBuf>) -> Result<(), Failure> {
    let format = match format {
        Format::Table => ExportFormat::Table,
        Format::Csv => ExportFormat::Csv,
        Format::Json => ExportFormat::Json,
    };
    let bytes = export_table(&build_observatory(catalog), format, &catalog.methodology_version());
    match output {
        Some(path) => std::fs::write(&path, bytes)
            .map_err(|e| Failure::runtime(format!("error: cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::runtime(format!("error: {e}"))),
    }
}

fn validate(dir: &Option<PathBuf>) -> Result<(), Failure> {
    let catalog = load(dir)?;
    println!(
        "catalog ok: {} models, {} countries, methodology {}",
        catalog.models.len(),
        catalog.countries.len(),
        catalog.methodology_version()
    );
    Ok(())
}

fn serve(catalog: Catalog, dir: Option<PathBuf>, bind: SocketAddr) -> Result<(), Failure> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::runtime(format!("error: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| Failure::runtime(format!("error: cannot bind {bind}: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| Failure::runtime(format!("error: {e}")))?;
        let state = AppState::new(catalog);
        eprintln!("listening on http://{addr}");
        #[cfg(unix)]
        if let Some(dir) = dir {
            spawn_reload_on_hangup(state.clone(), dir);
        }
        #[cfg(not(unix))]
        let _ = dir;
        server::serve(listener, state)
            .await
            .map_err(|e| Failure::runtime(format!("error: {e}")))
    })
}

/// SIGHUP reloads the catalog directory; a bundle that fails validation is
/// reported and the previous one keeps serving.
#[cfg(unix)]
fn spawn_reload_on_hangup(state: AppState, dir: PathBuf) {
    use tokio::signal::unix::{signal, SignalKind};
    tokio::spawn(async move {
        let Ok(mut hup) = signal(SignalKind::hangup()) else {
            return;
        };
        while hup.recv().await.is_some() {
            match state.reload_from(&dir) {
                Ok(()) => eprintln!("catalog reloaded from {}", dir.display()),
                Err(e) => eprintln!("catalog reload failed, keeping previous bundle: {e}"),
            }
        }
    });
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Validate = cli.command {
        return validate(&cli.catalog);
    }
    let catalog = load(&cli.catalog)?;
    match cli.command {
        Command::Estimate(args) => estimate(&catalog, args),
        Command::Parse { description, json } => parse(&catalog, description, json),
        Command::Observatory { format, output } => observatory(&catalog, format, output),
        Command::Serve { bind } => serve(catalog, cli.catalog, bind),
        Command::Validate => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
