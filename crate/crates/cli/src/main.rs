use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gammaodds::comparison::{compare, parse_models, reported_params, ModelId};
use gammaodds::data::load_csv;
use gammaodds::fit::{mle_fit, FitOptions};
use gammaodds::gof::{gof_report, EdfVariant};
use gammaodds::parse::{parse_grid, parse_params};
use gammaodds::{wheaton, Dataset, Error, OEGammaDist};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const EXIT_FIT: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "gammaodds", version, about = "Fit and evaluate gamma-odds lifetime distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-likelihood fit of one model
    Fit {
        #[arg(long, default_value = "m2")]
        model: String,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit several models and rank them by AIC
    Compare {
        #[arg(long, default_value = "m1,m2,m6")]
        models: String,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// pdf, cdf and hazard of the (1-Exp)/Exp gamma distribution on a grid
    Curves {
        /// alpha,beta,lambda
        #[arg(long)]
        params: String,
        /// start:stop:count
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Draw a reproducible sample
    Sample {
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Moments, shape coefficients and Renyi entropy
    Moments {
        #[arg(long)]
        params: String,
        /// Highest raw moment
        #[arg(long, default_value_t = 4)]
        order: u32,
        /// Renyi order
        #[arg(long, default_value_t = 2.0)]
        eta: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Goodness-of-fit statistics at given parameters
    Gof {
        #[arg(long, default_value = "m2")]
        model: String,
        /// parameters in the model's fitting coordinates
        #[arg(long)]
        params: String,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV path, or "wheaton" for the embedded flood data
    #[arg(long, default_value = "wheaton")]
    data: String,
    /// column name or 0-based index
    #[arg(long)]
    column: Option<String>,
    /// EDF statistic variant: cb or unmodified
    #[arg(long, default_value = "cb")]
    edf: String,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

/// A rendered report and the exit code it should end with.
struct Report {
    json: Value,
    tsv: String,
    code: u8,
}

impl Report {
    fn ok(json: Value, tsv: String) -> Self {
        Self { json, tsv, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        Error::FitFailure { .. } => EXIT_FIT,
        e if e.is_data_error() => EXIT_DATA,
        _ => EXIT_INTERNAL,
    }
}

/// Rounds to 10 significant digits so output is stable across platforms.
fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.9e}").parse().unwrap_or(v)
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(round_sig(v))
    } else {
        Value::Null
    }
}

/// Applies [`round_sig`] to every number in a JSON tree.
fn round_tree(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(round_tree).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_tree(v))).collect()),
        other => other,
    }
}

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{}", round_sig(v))
    } else {
        format!("{v}")
    }
}

fn load_data(args: &DataArgs) -> Result<Dataset, Error> {
    if args.data == "wheaton" && args.column.is_none() {
        Ok(wheaton())
    } else {
        load_csv(&args.data, args.column.as_deref())
    }
}

fn oe_dist(params: &str) -> Result<OEGammaDist, Error> {
    let p = parse_params(params)?;
    if p.len() != 3 {
        return Err(Error::Usage(format!("expected alpha,beta,lambda; got {} value(s)", p.len())));
    }
    OEGammaDist::new(p[0], p[1], p[2]).map_err(|e| Error::Usage(e.to_string()))
}

fn run_fit(model: &str, data: &DataArgs) -> Result<Report, Error> {
    let id: ModelId = model.parse()?;
    let variant: EdfVariant = data.edf.parse()?;
    let ds = load_data(data)?;
    let m = id.model();
    let fit = mle_fit(m.as_ref(), &ds.values, &FitOptions::default())?;
    let gof = gof_report(m.as_ref(), &ds.values, &fit.theta_hat, fit.loglik, variant)?;
    let params = reported_params(m.as_ref(), &fit);
    let mut tsv = String::from("name\tvalue\tstd_error\n");
    for p in &params {
        tsv += &format!("{}\t{}\t{}\n", p.name, cell(p.value), cell(p.std_error));
    }
    for (k, v) in [
        ("loglik", fit.loglik),
        ("aic", gof.aic),
        ("aicc", gof.aicc),
        ("bic", gof.bic),
        ("hqic", gof.hqic),
        ("a_squared", gof.a_squared),
        ("w_squared", gof.w_squared),
    ] {
        tsv += &format!("{k}\t{}\t\n", cell(v));
    }
    let code = if fit.converged { 0 } else { EXIT_FIT };
    let json = json!({
        "dataset": ds.name,
        "model": id.id(),
        "name": m.name(),
        "params": params,
        "fit": fit,
        "gof": gof,
    });
    Ok(Report { json, tsv, code })
}

fn run_compare(models: &str, data: &DataArgs) -> Result<Report, Error> {
    let ids = parse_models(models)?;
    let variant: EdfVariant = data.edf.parse()?;
    let ds = load_data(data)?;
    let rows = compare(&ids, &ds.values, &FitOptions::default(), variant);
    let mut tsv = String::from("model\tname\tloglik\taic\taicc\tbic\thqic\ta_squared\tw_squared\tparams\terror\n");
    for r in &rows {
        let ll = r.fit.as_ref().map_or(f64::NAN, |f| f.loglik);
        let g = |f: fn(&gammaodds::GofReport) -> f64| r.gof.as_ref().map_or(f64::NAN, f);
        let params: Vec<String> = r.params.iter().map(|p| format!("{}={}", p.name, cell(p.value))).collect();
        tsv += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.model,
            r.name,
            cell(ll),
            cell(g(|g| g.aic)),
            cell(g(|g| g.aicc)),
            cell(g(|g| g.bic)),
            cell(g(|g| g.hqic)),
            cell(g(|g| g.a_squared)),
            cell(g(|g| g.w_squared)),
            params.join(";"),
            r.error.as_deref().unwrap_or("")
        );
    }
    let code = if rows.iter().any(|r| r.failed()) { EXIT_FIT } else { 0 };
    let json = json!({ "dataset": ds.name, "n": ds.n(), "variant": variant, "rows": rows });
    Ok(Report { json, tsv, code })
}

fn run_curves(params: &str, grid: &str) -> Result<Report, Error> {
    let d = oe_dist(params)?;
    let xs = parse_grid(grid)?;
    let mut tsv = String::from("x\tpdf\tcdf\thazard\n");
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let pdf = d.pdf(x);
        let cdf = d.cdf(x);
        let hazard = d.hazard(x).unwrap_or(f64::NAN);
        tsv += &format!("{}\t{}\t{}\t{}\n", cell(x), cell(pdf), cell(cdf), cell(hazard));
        rows.push(json!({ "x": num(x), "pdf": num(pdf), "cdf": num(cdf), "hazard": num(hazard) }));
    }
    Ok(Report::ok(json!({ "params": [d.alpha(), d.beta(), d.lambda()], "rows": rows }), tsv))
}

fn run_sample(params: &str, n: usize, seed: u64) -> Result<Report, Error> {
    let d = oe_dist(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = d.sample(n, &mut rng);
    let mut tsv = String::from("x\n");
    for &x in &xs {
        tsv += &format!("{}\n", cell(x));
    }
    Ok(Report::ok(json!({ "params": [d.alpha(), d.beta(), d.lambda()], "seed": seed, "values": xs }), tsv))
}

fn run_moments(params: &str, order: u32, eta: f64) -> Result<Report, Error> {
    let d = oe_dist(params)?;
    if order == 0 || order > 12 {
        return Err(Error::Usage(format!("--order must be between 1 and 12, got {order}")));
    }
    let mut entries: Vec<(String, Result<f64, Error>)> = Vec::new();
    for m in 1..=order {
        entries.push((format!("raw_{m}"), d.moment(m)));
    }
    for m in 2..=order {
        entries.push((format!("central_{m}"), d.central_moment(m)));
    }
    entries.push(("skewness".into(), d.skewness()));
    entries.push(("kurtosis".into(), d.kurtosis()));
    entries.push(("mgf_threshold".into(), Ok(d.mgf_threshold())));
    entries.push((format!("renyi_{eta}"), d.renyi_entropy(eta)));
    let mut tsv = String::from("quantity\tvalue\n");
    let mut obj = serde_json::Map::new();
    let mut errors = serde_json::Map::new();
    for (k, v) in entries {
        match v {
            Ok(v) => {
                tsv += &format!("{k}\t{}\n", cell(v));
                obj.insert(k, num(v));
            }
            Err(e) => {
                tsv += &format!("{k}\t\n");
                obj.insert(k.clone(), Value::Null);
                errors.insert(k, json!(e.to_string()));
            }
        }
    }
    let json = json!({ "params": [d.alpha(), d.beta(), d.lambda()], "eta": eta, "values": obj, "errors": errors });
    Ok(Report::ok(json, tsv))
}

fn run_gof(model: &str, params: &str, data: &DataArgs) -> Result<Report, Error> {
    let id: ModelId = model.parse()?;
    let variant: EdfVariant = data.edf.parse()?;
    let m = id.model();
    let theta = parse_params(params)?;
    let names = m.param_names();
    if theta.len() != names.len() {
        return Err(Error::Usage(format!("{} expects {} parameter(s): {}", id, names.len(), names.join(","))));
    }
    if theta.iter().zip(m.param_positive()).any(|(t, pos)| pos && *t <= 0.0) {
        return Err(Error::Usage(format!("{id} parameters must be positive")));
    }
    let ds = load_data(data)?;
    m.validate_data(&ds.values)?;
    let loglik = m.log_likelihood(&ds.values, &theta);
    let gof = gof_report(m.as_ref(), &ds.values, &theta, loglik, variant)?;
    let mut tsv = String::from("quantity\tvalue\n");
    for (k, v) in [
        ("loglik", loglik),
        ("aic", gof.aic),
        ("aicc", gof.aicc),
        ("bic", gof.bic),
        ("hqic", gof.hqic),
        ("a_squared", gof.a_squared),
        ("w_squared", gof.w_squared),
    ] {
        tsv += &format!("{k}\t{}\n", cell(v));
    }
    let json = json!({ "dataset": ds.name, "model": id.id(), "theta": theta, "loglik": loglik, "gof": gof });
    Ok(Report::ok(json, tsv))
}

fn emit(report: &Report, out: &OutArgs) -> Result<(), Error> {
    let text = match out.format {
        Format::Json => {
            let v = round_tree(report.json.clone());
            serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))? + "\n"
        }
        Format::Tsv => report.tsv.clone(),
    };
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let (report, out) = match &cli.command {
        Command::Fit { model, data, out } => (run_fit(model, data)?, out),
        Command::Compare { models, data, out } => (run_compare(models, data)?, out),
        Command::Curves { params, grid, out } => (run_curves(params, grid)?, out),
        Command::Sample { params, n, seed, out } => (run_sample(params, *n, *seed)?, out),
        Command::Moments { params, order, eta, out } => (run_moments(params, *order, *eta)?, out),
        Command::Gof { model, params, data, out } => (run_gof(model, params, data)?, out),
    };
    emit(&report, out)?;
    Ok(report.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
