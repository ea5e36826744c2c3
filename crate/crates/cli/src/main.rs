use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semisym::analysis::run_analysis;
use semisym::config::{load_config, AnalysisConfig, ConfigError, Format, Sampling};
use semisym::expr::Expr;
use semisym::relativity::FluidParams;
use semisym::report::{render_analysis, render_selftest};
use semisym::selftest::{run_selftest, SelftestOptions};

#[derive(Parser)]
#[command(name = "semisym", version, about = "Semi-symmetric metric connection analysis")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Report format: text or machine.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of sample points.
    #[arg(long, global = true)]
    points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse the configuration in a TOML file.
    Analyze { config: PathBuf },
    /// Analyse a catalog metric: minkowski, desitter-flat, flrw, grw-generic, grw.
    Builtin {
        name: String,
        /// Catalog parameter, e.g. `f=cosh(t)` or `n=5`.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Perfect fluid, e.g. `sigma=1,p=-1,lambda=3,k=1`; `rho=p` aliases the pressure.
        #[arg(long, value_name = "KEY=VALUE,...")]
        fluid: Option<String>,
    },
    /// Run the acceptance suite.
    Selftest,
}

fn split_kv(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_fluid(spec: &str, coords: &[String]) -> Result<FluidParams, String> {
    let mut sigma = None;
    let mut p = None;
    let mut rho = None;
    let mut lambda = 0.0;
    let mut k = 1.0;
    for part in spec.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, val) = split_kv(part)?;
        let expr = |v: &str| Expr::parse(v, coords).map_err(|e| format!("--fluid {key}: {e}"));
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("--fluid {key}: {e}"));
        match key.as_str() {
            "sigma" => sigma = Some(expr(&val)?),
            "p" => p = Some(expr(&val)?),
            "rho" if val == "p" => rho = Some(None),
            "rho" => rho = Some(Some(expr(&val)?)),
            "lambda" => lambda = num(&val)?,
            "k" => k = num(&val)?,
            _ => return Err(format!("--fluid: unknown key `{key}`")),
        }
    }
    let (Some(sigma), Some(p)) = (sigma, p) else {
        return Err("--fluid needs both sigma and p".into());
    };
    let mut fp = FluidParams::new(sigma, p)
        .with_lambda(lambda)
        .with_k(k)
        .map_err(|e| format!("--fluid: {e}"))?;
    match rho {
        Some(None) => fp = fp.rho_from_pressure(),
        Some(Some(r)) => fp = fp.with_rho(r),
        None => {}
    }
    Ok(fp)
}

fn apply_overrides(cfg: &mut AnalysisConfig, g: &Global) -> Result<(), String> {
    if let Some(f) = g.format {
        cfg.format = f;
    }
    if let Some(t) = g.tol {
        if !(t > 0.0) {
            return Err(format!("--tol must be positive, got {t}"));
        }
        cfg.tol.residual = t;
    }
    let explicit = matches!(cfg.sampling, Sampling::Explicit(_));
    if explicit && (g.seed.is_some() || g.points.is_some()) {
        return Err("--seed and --points do not apply to explicit sample points".into());
    }
    if let Some(s) = g.seed {
        cfg.set_seed(s);
    }
    if let Some(n) = g.points {
        if n == 0 {
            return Err("--points must be positive".into());
        }
        cfg.set_count(n);
    }
    Ok(())
}

fn config_error(e: ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(2)
}

fn analyse(mut cfg: AnalysisConfig, g: &Global) -> ExitCode {
    if let Err(e) = apply_overrides(&mut cfg, g) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run_analysis(&cfg) {
        Ok(r) => {
            print!("{}", render_analysis(&r, cfg.format));
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { config } => match load_config(&config) {
            Ok(cfg) => analyse(cfg, &cli.global),
            Err(e) => config_error(e),
        },
        Command::Builtin { name, params, fluid } => {
            let params = match params.iter().map(|s| split_kv(s)).collect::<Result<Vec<_>, _>>() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: --param: {e}");
                    return ExitCode::from(2);
                }
            };
            let mut cfg = match AnalysisConfig::from_builtin(&name, &params) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if let Some(spec) = fluid {
                match parse_fluid(&spec, cfg.metric.coords()) {
                    Ok(fp) => cfg.fluid = Some(fp),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            analyse(cfg, &cli.global)
        }
        Command::Selftest => {
            let d = SelftestOptions::default();
            let opts = SelftestOptions {
                seed: cli.global.seed.unwrap_or(d.seed),
                points: cli.global.points.unwrap_or(d.points).max(1),
            };
            let r = run_selftest(opts);
            print!("{}", render_selftest(&r, cli.global.format.unwrap_or_default()));
            ExitCode::from(r.exit_code() as u8)
        }
    }
}
