use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use fdenvelope_core::{fdx_select, Error as CoreError, Method, MethodFit, PValueFamily};
use fdenvelope_service::{AppState, ServiceConfig};
use fdenvelope_sim::{coverage_mc, monte_carlo_slack, run_simulation, Design, SimConfig, SimError};
use serde::Serialize;

use crate::{Command, InputArgs, SimArgs};

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, configuration or input data.
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure::Runtime(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) | Failure::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidInput { .. }
            | CoreError::InvalidAlpha { .. }
            | CoreError::UnknownMethod(_)
            | CoreError::IndexOutOfRange { .. } => Failure::Config(err.to_string()),
            _ => Failure::Runtime(err.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(err: SimError) -> Self {
        match err {
            SimError::Config { .. } => Failure::Config(err.to_string()),
            SimError::Method { ref method, ref source } => match Failure::from(source.clone()) {
                Failure::Config(msg) => Failure::Config(format!("{method}: {msg}")),
                Failure::Runtime(msg) => Failure::Runtime(format!("{method}: {msg}")),
            },
            SimError::Core(e) => e.into(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Simulate { sim, out } => simulate(&sim, &out),
        Command::Envelopes { input, methods, alpha, out } => envelopes(&input, &methods, alpha, out.as_deref()),
        Command::Coverage { sim, trials, out } => coverage(&sim, trials, out.as_deref()),
        Command::Select { input, method, alpha, gamma } => select(&input, method, alpha, gamma),
        Command::Serve { addr, data_dir, max_m } => {
            let state = AppState::open(ServiceConfig { max_m, data_dir })
                .map_err(|e| Failure::Runtime(format!("cannot open data directory: {e}")))?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
            eprintln!("listening on http://{addr}");
            runtime
                .block_on(fdenvelope_service::serve(addr, Arc::new(state)))
                .map_err(|e| Failure::Runtime(format!("server failed: {e}")))
        }
    }
}

fn sim_config(args: &SimArgs) -> CliResult<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => SimConfig::default(),
    };
    macro_rules! apply {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = &args.$flag { cfg.$field = v.clone(); })*
        };
    }
    apply!(m => m, subjects => subjects, pi0 => pi0, pi0prime => pi0_prime, q => q, alpha => alpha,
        methods => methods, seed => seed, reps => replicates);
    if cfg.methods.is_empty() {
        return Err(Failure::Config("at least one method required".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn simulate(args: &SimArgs, out: &Path) -> CliResult {
    let cfg = sim_config(args)?;
    let runs = run_simulation(&cfg)?;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    write(&out.join("curves.csv"), &runs.curves_csv())?;
    write(&out.join("medians.csv"), &runs.medians_csv())?;
    let config = serde_json::to_string_pretty(&cfg).expect("config serializes");
    write(&out.join("config.json"), &(config + "\n"))?;
    println!("{} replicates x {} methods written to {}", cfg.replicates, cfg.methods.len(), out.display());
    Ok(())
}

fn load_family(args: &InputArgs) -> CliResult<PValueFamily> {
    let path = &args.input;
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let family = if is_csv {
        let sidecar = match &args.cdfs {
            Some(p) => fs::read_to_string(p).map_err(|e| Failure::io(p, e))?,
            None => "{}".to_string(),
        };
        PValueFamily::from_csv(text.as_bytes(), &sidecar)
    } else {
        PValueFamily::from_json(&text)
    };
    family.map_err(|e| match Failure::from(e) {
        Failure::Config(msg) | Failure::Runtime(msg) => Failure::Config(format!("{}: {msg}", path.display())),
    })
}

fn envelopes(input: &InputArgs, methods: &[Method], alpha: f64, out: Option<&Path>) -> CliResult {
    let fam = load_family(input)?;
    let mut csv = String::from("method,k,index,p_k,vhat,dhat\n");
    for &method in methods {
        let curve =
            MethodFit::new(method, &fam, alpha).and_then(|fit| fit.curve()).map_err(|e| prefix(method, e.into()))?;
        for (row, index) in curve.rows.iter().zip(&curve.order) {
            csv.push_str(&format!("{method},{},{index},{},{},{}\n", row.k, row.p_k, row.vhat, row.dhat));
        }
    }
    match out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn prefix(method: Method, failure: Failure) -> Failure {
    match failure {
        Failure::Config(msg) => Failure::Config(format!("{method}: {msg}")),
        Failure::Runtime(msg) => Failure::Runtime(format!("{method}: {msg}")),
    }
}

fn coverage(args: &SimArgs, trials: Option<Vec<u64>>, out: Option<&Path>) -> CliResult {
    let mut cfg = sim_config(args)?;
    if let Some(trials) = trials {
        cfg.design = Design::BinomialNull { trials };
        cfg.validate()?;
    }
    let report = coverage_mc(&cfg)?;
    let limit = cfg.alpha + monte_carlo_slack(cfg.alpha, cfg.replicates);
    println!("{:<22} {:>10} {:>8}  (limit {limit:.4})", "method", "violations", "rate");
    for row in &report.rows {
        let flag = if row.within_tolerance(cfg.alpha) { "" } else { "  above limit" };
        println!("{:<22} {:>10} {:>8.4}{flag}", row.method.name(), row.violations, row.rate);
    }
    if let Some(path) = out {
        write(path, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Selection<'a> {
    method: Method,
    alpha: f64,
    gamma: f64,
    k: usize,
    vhat: usize,
    fdp_bound: f64,
    selection: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<&'a str>>,
}

fn select(input: &InputArgs, method: Method, alpha: f64, gamma: f64) -> CliResult {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Failure::Config(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let fam = load_family(input)?;
    let curve =
        MethodFit::new(method, &fam, alpha).and_then(|fit| fit.curve()).map_err(|e| prefix(method, e.into()))?;
    let vhat = curve.vhat();
    let k = fdx_select(&vhat, gamma);
    let v = if k == 0 { 0 } else { vhat[k - 1] };
    let chosen = &curve.order[..k];
    let labels = fam.labels().map(|l| chosen.iter().map(|&i| l[i].as_str()).collect());
    let out = Selection {
        method,
        alpha,
        gamma,
        k,
        vhat: v,
        fdp_bound: v as f64 / k.max(1) as f64,
        selection: chosen,
        labels,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("selection serializes"));
    Ok(())
}
