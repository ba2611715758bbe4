use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use fairdiv_core::aw::{self, AWInterval};
use fairdiv_core::dc::{gain_region, scenario_from_json, selfish_curve, Scenario, SearchConfig};
use fairdiv_core::format::{csv_num, Csv};
use fairdiv_core::nash::{self, Society};
use fairdiv_core::repeated::{
    builtin_alice_strategy, builtin_bob_strategy, equilibrium_verify, expected_total_gains,
    walk_gain_identity_check, RepeatedGameSpec,
};
use fairdiv_core::{bundled, Error};
use serde_json::json;

const EXIT_VALIDATION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "fairdiv", version, about = "Fair division under information asymmetry")]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vertices of the (G_A, G_B) region at spying rate R.
    DcRegion {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        rate: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Selfish gains G_sel_A, G_sel_B over a rate grid.
    DcSelfishCurve {
        #[arg(long)]
        scenario: String,
        /// `lo:hi:step`
        #[arg(long, default_value = "0:1:0.05")]
        rates: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Checks the built-in repeated-game profile for profitable deviations.
    RepeatedVerify {
        #[arg(long)]
        game: String,
        /// Number of stages; defaults to the game file's `n`.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated tremble levels.
        #[arg(long, default_value = "1e-2,1e-3")]
        epsilons: String,
        /// Report expected gains divided by the number of stages.
        #[arg(long)]
        normalize: bool,
        /// Sampled paths for the walk identity check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Two-item adjusted-winner allocation.
    Aw2 {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// Alice's true gain against announcement over a grid.
    AwPsiCurve {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 999)]
        points: usize,
    },
    /// Gain from k binary questions about Bob's valuation.
    AwSpy {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b_min: f64,
        #[arg(long)]
        b_max: f64,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
    },
    /// Optimal cluster-uniform Nash welfare.
    NashOpt {
        #[arg(long)]
        society: String,
    },
    /// Welfare gain from splitting one cluster against its information bound.
    NashRefineBound {
        #[arg(long)]
        society: String,
        #[arg(long)]
        cluster: usize,
        /// Parts as member lists, e.g. `0,2;1,3`.
        #[arg(long)]
        refinement: String,
    },
    /// Checks a scenario, game or society document.
    Validate { input: String },
}

#[derive(Args)]
struct SearchArgs {
    /// Channel grid step.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Message alphabet size.
    #[arg(long)]
    messages: Option<usize>,
}

impl SearchArgs {
    fn config(&self) -> anyhow::Result<SearchConfig> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::invalid("--step", format!("{} is outside (0, 1]", self.step)).into());
        }
        Ok(SearchConfig { step: self.step, messages: self.messages, ..Default::default() })
    }
}

/// Reads a file, falling back to the bundled documents by name.
fn load(name: &str) -> anyhow::Result<String> {
    let p = Path::new(name);
    if p.exists() {
        return fs::read_to_string(p).with_context(|| format!("reading {name}"));
    }
    let base = p.file_name().and_then(|s| s.to_str()).unwrap_or(name);
    bundled::get(base)
        .or_else(|| bundled::get(&format!("{base}.json")))
        .map(str::to_owned)
        .ok_or_else(|| Error::invalid("input", format!("{name}: no such file or bundled document")).into())
}

fn load_scenario(name: &str) -> anyhow::Result<Scenario> {
    Ok(scenario_from_json(&load(name)?)?)
}

/// A game document, or the game paired with a bundled scenario.
fn load_game(name: &str) -> anyhow::Result<RepeatedGameSpec> {
    let text = load(name)?;
    match RepeatedGameSpec::from_json(&text) {
        Ok(g) => Ok(g),
        Err(e) => {
            let stem = name.trim_end_matches(".json");
            match bundled::get(&format!("{stem}_game.json")) {
                Some(t) if !Path::new(name).exists() => Ok(RepeatedGameSpec::from_json(t)?),
                _ => Err(e.into()),
            }
        }
    }
}

fn load_society(name: &str) -> anyhow::Result<Society> {
    Ok(Society::from_json(&load(name)?)?)
}

fn parse_rates(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |why: &str| anyhow!(Error::invalid("--rates", format!("`{spec}`: {why}")));
    let nums = parts
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad("expected lo:hi:step"))?;
    let [lo, hi, step] = nums[..] else { return Err(bad("expected lo:hi:step")) };
    if !(lo >= 0.0 && hi >= lo && step > 0.0) {
        return Err(bad("need 0 <= lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| (lo + i as f64 * step).min(hi)).collect())
}

fn parse_list(flag: &str, spec: &str) -> anyhow::Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| anyhow!(Error::invalid(flag, format!("`{s}` is not a number"))))
        })
        .collect()
}

fn parse_refinement(spec: &str) -> anyhow::Result<Vec<Vec<usize>>> {
    spec.split(';')
        .map(|part| {
            part.split(',')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| {
                        anyhow!(Error::invalid("--refinement", format!("`{s}` is not a member index")))
                    })
                })
                .collect()
        })
        .collect()
}

fn open_unit(flag: &str, x: f64) -> anyhow::Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(flag, format!("{x} is outside (0, 1)")).into())
    }
}

fn interval(lo: f64, hi: f64) -> anyhow::Result<AWInterval> {
    AWInterval::new(lo, hi).map_err(Into::into)
}

/// Runs the command; the flag is false when a verification failed.
fn run(cli: &Cli) -> anyhow::Result<(String, bool)> {
    let mut ok = true;
    let out = match &cli.command {
        Command::DcRegion { scenario, rate, search } => {
            let s = load_scenario(scenario)?;
            let poly = gain_region(&s, *rate, &search.config()?)?;
            let mut csv = Csv::new(&["g_a", "g_b"]);
            for &(x, y) in poly.vertices() {
                csv.row(&[x, y]);
            }
            csv.to_string()
        }
        Command::DcSelfishCurve { scenario, rates, search } => {
            let s = load_scenario(scenario)?;
            let rows = selfish_curve(&s, &parse_rates(rates)?, &search.config()?)?;
            let mut csv = Csv::new(&["rate", "g_sel_a", "g_sel_b", "delta_sel"]);
            for r in rows {
                csv.row(&[r.rate, r.g_sel_a, r.g_sel_b, r.delta_sel]);
            }
            csv.to_string()
        }
        Command::RepeatedVerify { game, n, epsilons, normalize, samples } => {
            let spec = load_game(game)?;
            let n = n.unwrap_or(spec.n);
            let report = equilibrium_verify(&spec, n, &parse_list("--epsilons", epsilons)?)?;
            let walk = walk_gain_identity_check(&spec, n, *samples, cli.seed);
            let (ga, gb) = expected_total_gains(&spec, &builtin_alice_strategy(), &builtin_bob_strategy(), n)?;
            let scale = if *normalize { n as f64 } else { 1.0 };
            ok = report.pass && walk;
            let doc = json!({
                "n": n,
                "pass": ok,
                "expected_gains": { "alice": ga / scale, "bob": gb / scale, "normalized": normalize },
                "walk_identity": { "samples": samples, "seed": cli.seed, "holds": walk },
                "epsilons": report.epsilons,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Command::Aw2 { a, b } => {
            let (x, y) = aw::aw2(*a, *b)?;
            let mut csv = Csv::new(&["alice_item1", "alice_item2", "alice_gain", "bob_gain"]);
            let ga = a * x + (1.0 - a) * y;
            let gb = b * (1.0 - x) + (1.0 - b) * (1.0 - y);
            csv.row(&[x, y, ga, gb]);
            csv.to_string()
        }
        Command::AwPsiCurve { a, b, points } => {
            if *points == 0 {
                return Err(Error::invalid("--points", "at least one point is required").into());
            }
            open_unit("--a", *a)?;
            open_unit("--b", *b)?;
            let mut csv = Csv::new(&["a_tilde", "psi"]);
            for i in 1..=*points {
                let t = i as f64 / (*points + 1) as f64;
                if let Ok(v) = aw::psi(t, *a, *b) {
                    csv.row(&[t, v]);
                }
            }
            csv.to_string()
        }
        Command::AwSpy { a, b_min, b_max, k_max } => {
            open_unit("--a", *a)?;
            let iv = interval(*b_min, *b_max)?;
            let tilde = aw::tilde_delta_bound(*a, &iv);
            let mut csv = Csv::new(&["k", "Delta_star", "k_times_tilde"]);
            for k in 0..=*k_max {
                let d = if k == 0 { 0.0 } else { aw::delta_star(*a, &iv, k) };
                csv.raw_row(&[k.to_string(), csv_num(d), csv_num(tilde.budget_bound(k as f64))]);
            }
            csv.to_string()
        }
        Command::NashOpt { society } => {
            let s = load_society(society)?;
            let opt = nash::optimize_policy(&s)?;
            ok = opt.certificate <= 1.0 + nash::CERTIFICATE_TOL;
            let doc = json!({
                "log_welfare": opt.log_welfare,
                "log2_w": opt.log2_w(&s),
                "certificate": opt.certificate,
                "certified": ok,
                "iterations": opt.iterations,
                "converged": opt.converged,
                "bundles": opt.policy.bundles,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Command::NashRefineBound { society, cluster, refinement } => {
            let s = load_society(society)?;
            let r = nash::refinement_bound_check(&s, *cluster, &parse_refinement(refinement)?)?;
            ok = r.pass;
            serde_json::to_string_pretty(&r)? + "\n"
        }
        Command::Validate { input } => format!("OK {}\n", validate(&load(input)?)?),
    };
    Ok((out, ok))
}

/// Checks a document and names its kind.
fn validate(text: &str) -> anyhow::Result<&'static str> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let has = |k: &str| v.get(k).is_some();
    if has("pairs") {
        RepeatedGameSpec::from_json(text)?;
        Ok("game")
    } else if has("members") {
        Society::from_json(text)?;
        Ok("society")
    } else if has("valuations") {
        scenario_from_json(text)?;
        Ok("scenario")
    } else {
        bail!(Error::invalid("document", "expected a scenario, game or society"))
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_VALIDATION;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Unreachable(_)) => EXIT_INTERNAL,
        Some(_) => EXIT_VALIDATION,
        None => EXIT_INTERNAL,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("FAIRDIV_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::invalid("FAIRDIV_THREADS", format!("`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|(text, ok)| {
        emit(&cli, &text)?;
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("fairdiv: verification failed");
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(e) => {
            eprintln!("fairdiv: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
