//! `gshift`: command line front end for the Gaussian shift channel toolkit.
//!
//! Subcommands mirror the library modules: `capacity` sweeps the channel
//! capacity solver, `fer` runs Monte Carlo frame-error-rate experiments,
//! `power` and `rllcap` print the exact code metrics and constraint
//! capacities, and `verify` runs the cross-module invariant suite. Every
//! table-producing run can emit a JSON manifest capturing the full parameter
//! set; rerunning with the same parameters reproduces the table byte for
//! byte.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use gshift_core::capacity::{
    build_truncated_channel, capacity_sweep, maximize_capacity, mi_gradient, normalized_mi,
    AscentOptions, InputDistribution, SchemeFamily,
};
use gshift_core::channel::QuantizationScheme;
use gshift_core::codes::{verify_roundtrip, CodeId};
use gshift_core::fer::{predict_fer_asymptotic, run_fer, AwgnConfig, SimConfig};
use gshift_core::metrics::{power_report, rll_capacity, rll_capacity_spectral, RllConstraint};

/// Environment variable overriding the default master seed.
const SEED_ENV: &str = "GSHIFT_SEED";

#[derive(Parser)]
#[command(name = "gshift", version, about = "Discretized Gaussian shift channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity of the truncated runlength channel over a parameter grid.
    Capacity {
        /// Input alphabet sizes, comma separated.
        #[arg(long = "L", value_name = "LIST", default_value = "4")]
        l: String,
        /// Noise levels: comma list or start:stop:step grid.
        #[arg(long, value_name = "GRID", default_value = "0.05:0.4:0.05")]
        eps: String,
        /// Quantizer family: rounding, optimal-thresholds, or both.
        #[arg(long, default_value = "rounding")]
        scheme: String,
        /// Output truncation threshold.
        #[arg(long = "threshold-prob", default_value_t = 1e-8)]
        threshold_prob: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the table here (CSV); a manifest goes to <OUT>.manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo frame error rate.
    Fer {
        /// Code ids (see `power --code all` for the list) or "all".
        #[arg(long, default_value = "all")]
        code: String,
        #[arg(long, value_name = "GRID", default_value = "0.1")]
        eps: String,
        /// Quantizer: matched (per-code default) or rounding.
        #[arg(long, default_value = "matched")]
        scheme: String,
        /// Info bits per frame.
        #[arg(long, default_value_t = 40)]
        k: usize,
        /// Desk-scale default; raise to 100000000 for the full protocol.
        #[arg(long = "max-frames", default_value_t = 1_000_000)]
        max_frames: u64,
        #[arg(long = "target-errors", default_value_t = 200)]
        target_errors: u64,
        /// Optional bit-level AWGN sweep, dB grid.
        #[arg(long = "snr-db", value_name = "GRID")]
        snr_db: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact power metrics and rates of the built-in codes.
    Power {
        #[arg(long, default_value = "all")]
        code: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Capacity of a runlength constraint.
    Rllcap {
        /// Admissible zero-run lengths, comma separated.
        #[arg(long)]
        zeros: String,
        /// Admissible one-run lengths, comma separated.
        #[arg(long)]
        ones: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross-module invariant suite; nonzero exit on any failure.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parameter echo sufficient to reproduce an output file.
#[derive(Serialize)]
struct RunManifest {
    subcommand: &'static str,
    parameters: serde_json::Value,
    master_seed: u64,
    toolkit_version: &'static str,
    output: Option<String>,
    created_unix: u64,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Capacity { l, eps, scheme, threshold_prob, seed, out } => {
            cmd_capacity(&l, &eps, &scheme, threshold_prob, resolve_seed(seed)?, out)
        }
        Command::Fer {
            code,
            eps,
            scheme,
            k,
            max_frames,
            target_errors,
            snr_db,
            seed,
            out,
        } => cmd_fer(
            &code,
            &eps,
            &scheme,
            k,
            max_frames,
            target_errors,
            snr_db.as_deref(),
            resolve_seed(seed)?,
            out,
        ),
        Command::Power { code, out } => cmd_power(&code, out),
        Command::Rllcap { zeros, ones, out } => cmd_rllcap(&zeros, &ones, out),
        Command::Verify { seed } => cmd_verify(resolve_seed(seed)?),
    }
}

/// Seed precedence: explicit flag, then the environment override, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}

/// Grids are either comma lists ("0.1,0.2") or inclusive start:stop:step
/// ranges ("0.05:0.4:0.025"); endpoints are kept when within 1e-12.
fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(Into::into))
            .collect::<Result<Vec<f64>>>()?,
        [start, stop, step] => {
            let (start, stop, step) =
                (start.parse::<f64>()?, stop.parse::<f64>()?, step.parse::<f64>()?);
            if step <= 0.0 || stop < start {
                bail!("grid {s:?}: need start <= stop and step > 0");
            }
            let mut out = Vec::new();
            let mut i = 0u32;
            loop {
                let v = start + f64::from(i) * step;
                if v > stop + 1e-12 {
                    break;
                }
                out.push(v.min(stop));
                i += 1;
            }
            out
        }
        _ => bail!("grid {s:?}: expected VALUE[,VALUE..] or START:STOP:STEP"),
    };
    if grid.is_empty() {
        bail!("grid {s:?} is empty");
    }
    Ok(grid)
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|v| v.trim().parse::<u32>().map_err(Into::into))
        .collect()
}

fn parse_codes(s: &str) -> Result<Vec<CodeId>> {
    if s == "all" {
        return Ok(CodeId::ALL.to_vec());
    }
    s.split(',')
        .map(|name| CodeId::from_str(name.trim()).map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

/// Write `table` to `out` (or stdout), plus a manifest alongside.
fn emit(
    table: String,
    out: Option<PathBuf>,
    subcommand: &'static str,
    parameters: serde_json::Value,
    master_seed: u64,
) -> Result<()> {
    match out {
        None => {
            print!("{table}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(&path, &table)
                .with_context(|| format!("writing {}", path.display()))?;
            let manifest = RunManifest {
                subcommand,
                parameters,
                master_seed,
                toolkit_version: env!("CARGO_PKG_VERSION"),
                output: Some(path.display().to_string()),
                created_unix: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            };
            let mpath = manifest_path(&path);
            std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n")
                .with_context(|| format!("writing {}", mpath.display()))?;
            eprintln!("wrote {} and {}", path.display(), mpath.display());
            Ok(())
        }
    }
}

fn manifest_path(out: &std::path::Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn cmd_capacity(
    l_arg: &str,
    eps_arg: &str,
    scheme_arg: &str,
    threshold_prob: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let l_list = parse_u32_list(l_arg)?;
    let eps = parse_grid(eps_arg)?;
    let families: Vec<SchemeFamily> = match scheme_arg {
        "rounding" => vec![SchemeFamily::Rounding],
        "optimal-thresholds" => vec![SchemeFamily::MinimaxThresholds],
        "both" => vec![SchemeFamily::Rounding, SchemeFamily::MinimaxThresholds],
        other => bail!("unknown scheme {other:?}: use rounding, optimal-thresholds or both"),
    };
    let options = AscentOptions { seed, ..Default::default() };
    let cells = capacity_sweep(&l_list, &eps, &families, threshold_prob, &options)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut table = String::from("scheme,L,threshold_prob,epsilon,capacity,iterations,converged,f_X\n");
    for cell in &cells {
        match &cell.outcome {
            Ok(res) => {
                let fx = res
                    .optimizer
                    .probs
                    .iter()
                    .map(|p| format!("{p:.12}"))
                    .collect::<Vec<_>>()
                    .join(";");
                writeln!(
                    table,
                    "{},{},{:e},{:.6},{:.9},{},{},{}",
                    cell.family.name(),
                    cell.l,
                    cell.threshold_probability,
                    cell.epsilon,
                    res.capacity,
                    res.iterations,
                    res.strict_max_verified,
                    fx
                )?;
            }
            Err(msg) => {
                writeln!(
                    table,
                    "{},{},{:e},{:.6},error: {msg},,false,",
                    cell.family.name(),
                    cell.l,
                    cell.threshold_probability,
                    cell.epsilon
                )?;
            }
        }
    }
    let params = serde_json::json!({
        "L": l_list,
        "eps": eps_arg,
        "scheme": scheme_arg,
        "threshold_prob": threshold_prob,
    });
    emit(table, out, "capacity", params, seed)
}

#[allow(clippy::too_many_arguments)]
fn cmd_fer(
    code_arg: &str,
    eps_arg: &str,
    scheme_arg: &str,
    k: usize,
    max_frames: u64,
    target_errors: u64,
    snr_arg: Option<&str>,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let codes = parse_codes(code_arg)?;
    let eps = parse_grid(eps_arg)?;
    let snr_grid: Option<Vec<f64>> = snr_arg.map(parse_grid).transpose()?;

    let mut table =
        String::from("code,scheme,epsilon,snr_db,k,frames,errors,fer,ci_lo,ci_hi,predicted,seed\n");
    for &code in &codes {
        let (scheme, scheme_name): (QuantizationScheme, &str) = match scheme_arg {
            "matched" => (code.matched_scheme(), "matched"),
            "rounding" => (QuantizationScheme::rounding(), "rounding"),
            other => bail!("unknown scheme {other:?}: use matched or rounding"),
        };
        for &epsilon in &eps {
            let snrs: Vec<Option<f64>> = match &snr_grid {
                Some(g) => g.iter().copied().map(Some).collect(),
                None => vec![None],
            };
            for snr in snrs {
                let config = SimConfig {
                    code,
                    epsilon,
                    scheme: scheme.clone(),
                    k,
                    max_frames,
                    target_errors,
                    master_seed: seed,
                    awgn: snr.map(AwgnConfig::on_off_keying),
                };
                let started = Instant::now();
                let mut res = run_fer(&config).map_err(|e| anyhow::anyhow!("{e}"))?;
                res.elapsed_seconds = Some(started.elapsed().as_secs_f64());
                let predicted = predict_fer_asymptotic(code, &scheme, k, epsilon)
                    .map(|p| format!("{p:.12}"))
                    .unwrap_or_default();
                writeln!(
                    table,
                    "{},{scheme_name},{epsilon:.6},{},{k},{},{},{:.12},{:.12},{:.12},{predicted},{seed}",
                    code.name(),
                    snr.map(|s| format!("{s:.3}")).unwrap_or_default(),
                    res.frames_sent,
                    res.frame_errors,
                    res.fer,
                    res.ci_lo,
                    res.ci_hi,
                )?;
            }
        }
    }
    let params = serde_json::json!({
        "code": code_arg,
        "eps": eps_arg,
        "scheme": scheme_arg,
        "k": k,
        "max_frames": max_frames,
        "target_errors": target_errors,
        "snr_db": snr_arg,
    });
    emit(table, out, "fer", params, seed)
}

fn cmd_power(code_arg: &str, out: Option<PathBuf>) -> Result<()> {
    let codes = parse_codes(code_arg)?;
    let mut table = String::from("code,rate,average,min_sustainable,local_min,window_bound\n");
    for &code in &codes {
        let report = power_report(code).map_err(|e| anyhow::anyhow!("{e}"))?;
        writeln!(
            table,
            "{},{},{},{},{},{}",
            code.name(),
            code.rate(),
            report.average,
            report.min_sustainable,
            report.local_min,
            report.window_bound
        )?;
    }
    let params = serde_json::json!({ "code": code_arg });
    emit(table, out, "power", params, 0)
}

fn cmd_rllcap(zeros_arg: &str, ones_arg: &str, out: Option<PathBuf>) -> Result<()> {
    let zeros = parse_u32_list(zeros_arg)?;
    let ones = parse_u32_list(ones_arg)?;
    let c = RllConstraint::new(zeros, ones).map_err(|e| anyhow::anyhow!("{e}"))?;
    let cap = rll_capacity(&c).map_err(|e| anyhow::anyhow!("{e}"))?;
    let table = format!("zeros,ones,capacity\n\"{zeros_arg}\",\"{ones_arg}\",{cap:.9}\n");
    let params = serde_json::json!({ "zeros": zeros_arg, "ones": ones_arg });
    emit(table, out, "rllcap", params, 0)
}

/// Cross-module invariant suite; prints one line per check.
fn cmd_verify(seed: u64) -> Result<()> {
    let mut failures = 0u32;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}{}", if ok { "PASS" } else { "FAIL" }, if detail.is_empty() {
            String::new()
        } else {
            format!(" ({detail})")
        });
        if !ok {
            failures += 1;
        }
    };

    for code in CodeId::ALL {
        let ok = verify_roundtrip(code, 12).is_ok();
        check(&format!("roundtrip {} k<=12", code.name()), ok, String::new());
    }

    for code in CodeId::ALL {
        match power_report(code) {
            Ok(r) => check(
                &format!("power metrics {}", code.name()),
                true,
                format!("avg {} sust {} local {}", r.average, r.min_sustainable, r.local_min),
            ),
            Err(e) => check(&format!("power metrics {}", code.name()), false, format!("{e}")),
        }
    }

    for code in CodeId::ALL {
        let c = code.constraint();
        let (a, b) = (rll_capacity(&c), rll_capacity_spectral(&c));
        let ok = match (&a, &b) {
            (Ok(x), Ok(y)) => (x - y).abs() < 1e-9,
            _ => false,
        };
        check(
            &format!("constraint capacity dual-route {}", code.name()),
            ok,
            format!("{:?} vs {:?}", a.ok(), b.ok()),
        );
    }

    {
        let ch = build_truncated_channel(3, 1e-8, &QuantizationScheme::rounding(), 0.15)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let d = InputDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let grad = mi_gradient(&ch, &d).map_err(|e| anyhow::anyhow!("{e}"))?;
        let h = 1e-6;
        let mut ok = true;
        for x in 0..2 {
            let mut up = vec![0.5, 0.3, 0.2];
            let mut dn = up.clone();
            up[x] += h;
            up[2] -= h;
            dn[x] -= h;
            dn[2] += h;
            let vu = normalized_mi(&ch, &InputDistribution::new(up).unwrap()).unwrap();
            let vd = normalized_mi(&ch, &InputDistribution::new(dn).unwrap()).unwrap();
            let fd = (vu - vd) / (2.0 * h);
            ok &= (grad[x] - fd).abs() <= 1e-5 * fd.abs().max(1.0);
        }
        check("capacity gradient vs finite differences", ok, String::new());

        let opts = AscentOptions { seed, ..Default::default() };
        let res = maximize_capacity(&ch, &opts).map_err(|e| anyhow::anyhow!("{e}"))?;
        check(
            "capacity ascent converges and verifies",
            res.strict_max_verified && res.gradient_norm < 1e-8,
            format!("capacity {:.9}", res.capacity),
        );

        let ch2 = build_truncated_channel(2, 1e-8, &QuantizationScheme::rounding(), 0.01)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let res2 = maximize_capacity(&ch2, &opts).map_err(|e| anyhow::anyhow!("{e}"))?;
        let rll = rll_capacity(&RllConstraint::new(vec![1, 2], vec![1, 2]).unwrap()).unwrap();
        check(
            "noiseless-limit capacity matches constraint capacity",
            (res2.capacity - rll).abs() < 5e-3,
            format!("{:.6} vs {:.6}", res2.capacity, rll),
        );
    }

    {
        let pred = predict_fer_asymptotic(
            CodeId::Vl01_0111,
            &CodeId::Vl01_0111.matched_scheme(),
            40,
            0.15,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut cfg = SimConfig::standard(CodeId::Vl01_0111, 0.15, seed);
        cfg.max_frames = 100_000;
        let res = run_fer(&cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
        let ok = res.frame_errors >= 200 && ((res.fer - pred) / pred).abs() < 0.25;
        check(
            "monte carlo matches closed-form prediction",
            ok,
            format!("fer {:.6} vs {pred:.6}", res.fer),
        );
    }

    if failures > 0 {
        bail!("{failures} check(s) failed");
    }
    println!("all checks passed");
    Ok(())
}
