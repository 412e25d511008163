//! The `asep-lab` command line.
//!
//! Every subcommand writes its tables into the output directory together with
//! `manifest.json`, which records the argument vector, the parsed parameters,
//! the seed, the crate version and `git describe`. A JSON config file passed
//! with `--config` supplies flags by long name; flags given on the command
//! line take precedence.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::{line_hitting_time, HitOutcome, SimulationParams};
use crate::error::{invalid, Error, Result};
use crate::experiments::{
    auxiliary_identity_mc, event_b_mc, exact_mixing_curve, grid_from_c, grid_from_times, merge_tv,
    profile_report, replicas, step_fluct_mc, tail_length, tv_lower_bound_mc, tv_upper_bound_mc,
    write_event_b_csv, write_identity_csv, write_profile_csv, write_tv_csv, ExperimentConfig,
    IdentityMcParams, StartMode, MIXING_STATE_CAP,
};
use crate::hecke::{verify_identity_grid, DEFAULT_WALK_CAP};
use crate::lattice::{make_named_config, ConfigName};
use crate::tracy_widom::{f_alpha, f_gue, g_time, QuadratureSpec, RescaleParams, F_GUE_MIN_S};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ASEP_LAB_OUT";
const DEFAULT_OUT_DIR: &str = "asep-lab-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "asep-lab",
    version,
    about = "Exclusion-process cutoff laboratory",
    arg_required_else_help = true
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory [default: $ASEP_LAB_OUT or ./asep-lab-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON object of flags keyed by long name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct Rate {
    /// Right jump rate p in (1/2, 1].
    #[arg(long, conflicts_with = "ratio", allow_negative_numbers = true)]
    p: Option<f64>,
    /// Asymmetry Q = q/p in [0, 1).
    #[arg(long = "Q", id = "ratio", allow_negative_numbers = true)]
    ratio: Option<f64>,
}

impl Rate {
    fn params(&self) -> Result<SimulationParams> {
        match (self.p, self.ratio) {
            (Some(p), None) => SimulationParams::new(p),
            (None, Some(q)) => SimulationParams::from_ratio(q),
            _ => invalid("give exactly one of --p or --Q"),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct CGrid {
    /// Explicit comma-separated c values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c_max: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
}

impl CGrid {
    fn values(&self) -> Result<Vec<f64>> {
        match (self.c.is_empty(), self.c_min, self.c_max) {
            (false, None, None) => Ok(self.c.clone()),
            (true, Some(lo), Some(hi)) => linspace(lo, hi, self.step),
            (true, None, None) => Ok(Vec::new()),
            _ => invalid("give either --c or both --c-min and --c-max"),
        }
    }
}

fn linspace(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return invalid(format!("bad range [{lo}, {hi}] with step {step}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return invalid("range has too many points");
    }
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct Sizes {
    #[arg(long = "N", id = "n", value_name = "N")]
    n: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct Mc {
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Exact Hecke-algebra check of the walk/Mallows distribution identity.
    HeckeVerify {
        #[arg(long = "S", id = "s")]
        s: usize,
        #[arg(long = "R", id = "r")]
        r: usize,
        #[arg(long = "M", id = "m")]
        m: usize,
        /// Comma-separated Q values.
        #[arg(long = "Q", id = "q", value_delimiter = ',', required = true)]
        q: Vec<f64>,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_WALK_CAP)]
        cap: u64,
    },
    /// Tables of F_GUE(s) and of the predicted profile 1 - F_GUE(c f(alpha)).
    TwTable {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        grid: CGrid,
        #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
        s_min: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        s_max: f64,
        #[arg(long, default_value_t = 0.1)]
        s_step: f64,
        /// Quadrature nodes.
        #[arg(long, default_value_t = 60)]
        nodes: usize,
    },
    /// Full sweep: TV bounds, exact curve when small, step profile and B_N(c).
    Profile {
        #[command(flatten)]
        size: Sizes,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        grid: CGrid,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 0.25)]
        lower_exponent: f64,
        #[arg(long, default_value_t = 0.1)]
        window_exponent: f64,
        #[command(flatten)]
        rescale: Rescale,
        /// Skip the exact curve.
        #[arg(long)]
        no_exact: bool,
        #[arg(long, default_value_t = 0.08)]
        tolerance: f64,
    },
    /// Exact d(t) by uniformization over all configurations.
    MixExact {
        #[command(flatten)]
        size: Sizes,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        grid: CGrid,
        /// Explicit times instead of c values.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        /// xi0, xi1 or worst.
        #[arg(long, default_value = "xi0")]
        from: StartMode,
        #[arg(long, default_value_t = MIXING_STATE_CAP)]
        cap: u64,
    },
    /// Monte Carlo lower and upper bounds on d(t).
    MixMc {
        #[command(flatten)]
        size: Sizes,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        grid: CGrid,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 0.25)]
        lower_exponent: f64,
    },
    /// Samples of the line hitting time of zeta^1 from zeta^0.
    Hitting {
        #[command(flatten)]
        size: Sizes,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        mc: Mc,
        /// Censoring time [default: g(k, 6)].
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Fluctuation profile of a step-data particle against 1 - F_GUE.
    StepFluct {
        #[command(flatten)]
        size: Sizes,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        grid: CGrid,
        #[command(flatten)]
        mc: Mc,
        #[command(flatten)]
        rescale: Rescale,
    },
    /// Monte Carlo comparison of both sides of the auxiliary-process identity.
    IdentityMc {
        #[arg(long = "S", id = "s")]
        s: usize,
        #[arg(long = "R", id = "r")]
        r: usize,
        #[arg(long = "M", id = "m")]
        m: usize,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
        #[arg(long, allow_negative_numbers = true)]
        y: i64,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        mc: Mc,
        /// Allowed |lhs - rhs| in combined standard errors.
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
    },
    /// Monte Carlo estimate of P(B_N(c)) against F_GUE(c f(alpha)).
    EventB {
        #[command(flatten)]
        size: Sizes,
        #[command(flatten)]
        rate: Rate,
        #[command(flatten)]
        grid: CGrid,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 0.1)]
        window_exponent: f64,
    },
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct Rescale {
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c_prime: f64,
    #[arg(long, default_value_t = 0.0)]
    kappa_prime: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c_double_prime: f64,
}

impl Rescale {
    fn params(&self) -> RescaleParams {
        RescaleParams {
            c: 0.0,
            kappa: self.kappa,
            c_prime: self.c_prime,
            kappa_prime: self.kappa_prime,
            c_double_prime: self.c_double_prime,
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::HeckeVerify { .. } => "hecke-verify",
            Command::TwTable { .. } => "tw-table",
            Command::Profile { .. } => "profile",
            Command::MixExact { .. } => "mix-exact",
            Command::MixMc { .. } => "mix-mc",
            Command::Hitting { .. } => "hitting",
            Command::StepFluct { .. } => "step-fluct",
            Command::IdentityMc { .. } => "identity-mc",
            Command::EventB { .. } => "event-b",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Profile { mc, .. }
            | Command::MixMc { mc, .. }
            | Command::Hitting { mc, .. }
            | Command::StepFluct { mc, .. }
            | Command::IdentityMc { mc, .. }
            | Command::EventB { mc, .. } => Some(mc.seed),
            _ => None,
        }
    }
}

/// Result of a subcommand: written files, a stdout summary and whether an
/// identity check failed.
struct Outcome {
    files: Vec<PathBuf>,
    stdout: String,
    verified: bool,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let w = self.create(name)?;
        serde_json::to_writer_pretty(w, value)?;
        Ok(())
    }
}

/// Insert flags from a JSON config file that the command line does not already
/// set. Arrays become comma-separated values, `true` a bare flag.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(rest) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(rest));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path)?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)? else {
        return Err(Error::Parse(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    };
    let given: Vec<String> = argv
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut out = argv.clone();
    for (key, value) in map {
        let flag = key.replace('_', "-");
        if given.contains(&flag) {
            continue;
        }
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::Parse(format!(
                "config key {key}: unsupported value {other}"
            ))),
        };
        let text = match &value {
            Value::Bool(false) | Value::Null => continue,
            Value::Bool(true) => {
                out.push(format!("--{flag}").into());
                continue;
            }
            Value::Array(items) => items
                .iter()
                .map(scalar)
                .collect::<Result<Vec<_>>>()?
                .join(","),
            v => scalar(v)?,
        };
        out.push(format!("--{flag}={text}").into());
    }
    Ok(out)
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Parse `argv` (including the program name), run the subcommand and return
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };
    match execute(&cli, &argv) {
        Ok(o) => {
            print!("{}", o.stdout);
            if o.verified {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(cli: &Cli, argv: &[OsString]) -> Result<Outcome> {
    let dir = output_dir(cli);
    fs::create_dir_all(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut out = Output {
        dir: dir.clone(),
        files: Vec::new(),
    };
    let outcome = pool.install(|| dispatch(&cli.command, &mut out))?;
    let manifest = json!({
        "tool": "asep-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "git_describe": env!("ASEP_GIT_DESCRIBE"),
        "command": cli.command.name(),
        "argv": argv.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "params": &cli.command,
        "seed": cli.command.seed(),
        "threads": cli.threads,
        "outputs": outcome.files.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
        "verified": outcome.verified,
    });
    let mut m = Output {
        dir,
        files: Vec::new(),
    };
    m.json("manifest.json", &manifest)?;
    Ok(outcome)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn summary(out: &Output, extra: Value) -> String {
    let mut v =
        json!({ "outputs": out.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() });
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    format!("{v}\n")
}

fn done(out: &mut Output, extra: Value, verified: bool) -> Result<Outcome> {
    let stdout = summary(out, extra);
    Ok(Outcome {
        files: std::mem::take(&mut out.files),
        stdout,
        verified,
    })
}

fn dispatch(cmd: &Command, out: &mut Output) -> Result<Outcome> {
    use std::io::Write;
    match cmd {
        Command::HeckeVerify {
            s,
            r,
            m,
            q,
            t,
            tolerance,
            cap,
        } => {
            let reports = verify_identity_grid(&[(*s, *r, *m)], q, t, *tolerance, *cap)?;
            let mut w = out.create("hecke.jsonl")?;
            let mut stdout = String::new();
            for rep in &reports {
                let line = serde_json::to_string(rep)?;
                writeln!(w, "{line}")?;
                stdout.push_str(&line);
                stdout.push('\n');
            }
            w.flush()?;
            let verified = reports.iter().all(|r| r.passed);
            Ok(Outcome {
                files: std::mem::take(&mut out.files),
                stdout,
                verified,
            })
        }
        Command::TwTable {
            alpha,
            grid,
            s_min,
            s_max,
            s_step,
            nodes,
        } => {
            let quad = QuadratureSpec::with_nodes(*nodes);
            quad.validate()?;
            let f = f_alpha(*alpha)?;
            let ss = linspace(*s_min, *s_max, *s_step)?;
            if ss.first().is_some_and(|&s| s < F_GUE_MIN_S) {
                return invalid(format!("s grid must start at or above {F_GUE_MIN_S}"));
            }
            let mut w = out.create("tw_cdf.csv")?;
            writeln!(w, "s,F_GUE")?;
            for s in ss {
                writeln!(w, "{s},{}", f_gue(s, &quad)?)?;
            }
            w.flush()?;
            let cs = grid.values()?;
            let mut w = out.create("tw_profile.csv")?;
            writeln!(w, "c,predicted")?;
            for c in &cs {
                let s = c * f;
                let cdf = if s < F_GUE_MIN_S {
                    0.0
                } else {
                    f_gue(s, &quad)?
                };
                writeln!(w, "{c},{}", 1.0 - cdf)?;
            }
            w.flush()?;
            done(out, json!({ "f_alpha": f }), true)
        }
        Command::Profile {
            size,
            rate,
            grid,
            mc,
            lower_exponent,
            window_exponent,
            rescale,
            no_exact,
            tolerance,
        } => {
            let params = rate.params()?;
            let config = ExperimentConfig {
                n: size.n,
                k: size.k,
                p: params.p(),
                c_grid: grid.values()?,
                reps: mc.reps,
                seed: mc.seed,
                lower_exponent: *lower_exponent,
                window_exponent: *window_exponent,
                kappa: rescale.kappa,
                c_prime: rescale.c_prime,
                kappa_prime: rescale.kappa_prime,
                c_double_prime: rescale.c_double_prime,
                exact: !no_exact,
                tolerance: *tolerance,
            };
            let report = profile_report(&config)?;
            write_tv_csv(&mut out.create("tv_curve.csv")?, &report.tv_curve)?;
            write_profile_csv(&mut out.create("profile.csv")?, &report.profile)?;
            write_event_b_csv(&mut out.create("event_b.csv")?, &report.event_b)?;
            out.json("report.json", &report)?;
            let extra = json!({ "kolmogorov": report.kolmogorov, "within_tolerance": report.within_tolerance });
            done(out, extra, true)
        }
        Command::MixExact {
            size,
            rate,
            grid,
            times,
            from,
            cap,
        } => {
            let params = rate.params()?;
            let points = if times.is_empty() {
                grid_from_c(size.n, size.k, params, &grid.values()?)?
            } else if grid.values()?.is_empty() {
                grid_from_times(size.n, size.k, params, times)?
            } else {
                return invalid("give either c values or --times, not both");
            };
            let rows = exact_mixing_curve(size.n, size.k, params, &points, *from, *cap)?;
            write_tv_csv(&mut out.create("tv_curve.csv")?, &rows)?;
            done(out, json!({}), true)
        }
        Command::MixMc {
            size,
            rate,
            grid,
            mc,
            lower_exponent,
        } => {
            let params = rate.params()?;
            let points = grid_from_c(size.n, size.k, params, &grid.values()?)?;
            let l = tail_length(size.n, size.k, *lower_exponent)?;
            let upper = tv_upper_bound_mc(
                size.n,
                size.k,
                params,
                &points,
                mc.reps,
                crate::rng::derive(mc.seed, 1),
            )?;
            let lower = tv_lower_bound_mc(
                size.n,
                size.k,
                params,
                &points,
                l,
                mc.reps,
                crate::rng::derive(mc.seed, 2),
            )?;
            let rows = merge_tv(&[upper, lower])?;
            write_tv_csv(&mut out.create("tv_curve.csv")?, &rows)?;
            done(out, json!({ "tail_length": l }), true)
        }
        Command::Hitting {
            size,
            rate,
            mc,
            t_max,
        } => {
            let params = rate.params()?;
            let cap = match t_max {
                Some(t) => *t,
                None => g_time(size.n, size.k, 6.0, params.p(), params.q())?,
            };
            if !(cap >= 0.0) || !cap.is_finite() {
                return invalid(format!(
                    "censoring time {cap} must be finite and nonnegative"
                ));
            }
            let line = |name| {
                Ok::<_, Error>(
                    make_named_config(name, size.n, size.k)?
                        .into_line()
                        .expect("line"),
                )
            };
            let (start, target) = (line(ConfigName::Zeta0)?, line(ConfigName::Zeta1)?);
            crate::experiments::check_reps(mc.reps)?;
            let hits = replicas(mc.reps, mc.seed, |rng, _| {
                line_hitting_time(&start, &target, params, rng, cap)
            })?;
            let mut w = out.create("hitting.csv")?;
            writeln!(w, "rep,time,hit")?;
            for (i, h) in hits.iter().enumerate() {
                match h {
                    HitOutcome::Hit(t) => writeln!(w, "{i},{t},true")?,
                    HitOutcome::Timeout => writeln!(w, "{i},{cap},false")?,
                }
            }
            w.flush()?;
            let censored = hits.iter().filter(|h| **h == HitOutcome::Timeout).count();
            done(out, json!({ "t_max": cap, "censored": censored }), true)
        }
        Command::StepFluct {
            size,
            rate,
            grid,
            mc,
            rescale,
        } => {
            let params = rate.params()?;
            let rows = step_fluct_mc(
                size.n,
                size.k,
                params,
                &grid.values()?,
                &rescale.params(),
                mc.reps,
                mc.seed,
            )?;
            write_profile_csv(&mut out.create("profile.csv")?, &rows)?;
            done(
                out,
                json!({ "kolmogorov": crate::experiments::kolmogorov_distance(&rows) }),
                true,
            )
        }
        Command::IdentityMc {
            s,
            r,
            m,
            t,
            x,
            y,
            rate,
            mc,
            sigmas,
        } => {
            let params = rate.params()?;
            let p = IdentityMcParams {
                s: *s,
                r: *r,
                m: *m,
                t: *t,
                x: *x,
                y: *y,
                reps: mc.reps,
                seed: mc.seed,
            };
            let res = auxiliary_identity_mc(params, &p)?;
            write_identity_csv(&mut out.create("identity.csv")?, &[res])?;
            let z = res.z_score();
            done(out, json!({ "z_score": z }), z <= *sigmas)
        }
        Command::EventB {
            size,
            rate,
            grid,
            mc,
            window_exponent,
        } => {
            let params = rate.params()?;
            let rows = event_b_mc(
                size.n,
                size.k,
                params,
                &grid.values()?,
                *window_exponent,
                mc.reps,
                mc.seed,
            )?;
            write_event_b_csv(&mut out.create("event_b.csv")?, &rows)?;
            done(out, json!({}), true)
        }
    }
}
