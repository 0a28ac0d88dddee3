//! `p2e` — command-line front end for the play-to-earn market model.
//!
//! One subcommand per model surface: trade-plan computation, incentive
//! schedules and equilibrium checks, the best-response probe, scenario
//! simulation and calibration, profit-model evaluation and fitting, and
//! trade-ledger analytics. Every run writes a manifest next to its result
//! and is reproducible from the recorded seed.
//!
//! Exit codes: 0 success, 1 domain/validation error, 2 I/O error. Errors
//! are emitted as one JSON line on stderr. Set `P2E_LOG` for verbosity.

mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use p2e_core::{econ, ledger, mechanism, opt, profile, regress, sim};
use serde::Serialize;

use report::{emit, to_json, Manifest};

#[derive(Parser)]
#[command(name = "p2e", version, about = "Play-to-earn market model toolkit")]
struct Cli {
    /// Increase log verbosity (also honors the P2E_LOG env var).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trading-plan operations.
    #[command(subcommand)]
    Opt(OptCommand),
    /// Incentive-mechanism operations.
    #[command(subcommand)]
    Mech(MechCommand),
    /// Market simulation.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Linear profit model.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Trade-ledger analytics.
    #[command(subcommand)]
    Ledger(LedgerCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Result file; a `<out>.manifest.json` sibling is written alongside.
    #[arg(long)]
    out: PathBuf,
    /// Output format; CSV is a lossy tabular projection of the JSON.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum OptCommand {
    /// Identify optimal buy/sell slots for each profile in a CSV.
    Points {
        /// Profile CSV with columns `asset_id,t,value` (t is 1-based).
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum MechCommand {
    /// Compute per-slot incentive amounts for each profile.
    Incentives {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify the all-bid strategy against single-slot deviations.
    Equilibrium {
        #[arg(long)]
        profile: PathBuf,
        /// Player count N.
        #[arg(long, default_value_t = 100)]
        players: u32,
        /// Demand constant c.
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the alternating undercutting probe.
    Probe {
        /// Number of competing sellers.
        #[arg(long, default_value_t = 2)]
        sellers: usize,
        /// Initial posted price.
        #[arg(long, default_value_t = 10.0)]
        v0: f64,
        /// Price floor sellers will not cross.
        #[arg(long, default_value_t = 1.0)]
        floor: f64,
        /// Undercut amount per move.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Execute a scenario and report run statistics.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's run count.
        #[arg(long)]
        runs: Option<u32>,
        /// Force the published parameter set N=100, K=100, T=12, L=0, U=10000.
        #[arg(long)]
        paper_defaults: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bisect the demand constant c to a target mean per-trade profit.
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        /// Target mean per-trade profit.
        #[arg(long)]
        target: f64,
        /// Relative tolerance on the achieved profit.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paper_defaults: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum FitCommand {
    /// Evaluate the affine profit model over a model-table CSV.
    Eval {
        /// Model table CSV: `game,alpha,avg_trade_price,beta,
        /// circulation_rate,gamma,mean_profit,estimated_profit`.
        #[arg(long)]
        table: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit the profit model to samples by ordinary least squares.
    Run {
        /// Samples CSV: `game,avg_trade_price,circulation_rate,mean_profit`.
        #[arg(long)]
        samples: PathBuf,
        /// Constrain gamma to a comma-separated grid, e.g. "100,200,300".
        #[arg(long)]
        gamma_grid: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum LedgerCommand {
    /// Ingest a trades CSV and compute every per-game metric.
    Analyze {
        /// Trades CSV: `game,token_id,seller,buyer,price_usd,timestamp`.
        #[arg(long)]
        trades: PathBuf,
        /// Optional rates CSV (`date,token_symbol,usd_per_token`); prices
        /// are then read in token units and converted per trade day.
        #[arg(long, requires = "symbol")]
        rates: Option<PathBuf>,
        /// Token symbol to convert with.
        #[arg(long)]
        symbol: Option<String>,
        /// Also write rejected rows to this CSV.
        #[arg(long)]
        rejects: Option<PathBuf>,
        /// Re-stabilization search horizon in days.
        #[arg(long, default_value_t = 14)]
        horizon: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // usage problems are validation failures, not I/O
            let _ = err.print();
            return ExitCode::from(1);
        }
    };

    let default_level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(
        env_logger::Env::new().filter("P2E_LOG").default_filter_or(default_level),
    )
    .init();

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = classify(&err);
            eprintln!(
                "{}",
                serde_json::json!({ "error": format!("{err:#}"), "kind": kind })
            );
            ExitCode::from(if kind == "io" { 2 } else { 1 })
        }
    }
}

fn classify(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(core_err) = cause.downcast_ref::<p2e_core::Error>() {
            return match core_err {
                p2e_core::Error::Io(_) | p2e_core::Error::Csv(_) => "io",
                _ => "domain",
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "domain"
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Opt(OptCommand::Points { profile, output }) => opt_points(&profile, &output),
        Command::Mech(MechCommand::Incentives { profile, output }) => {
            mech_incentives(&profile, &output)
        }
        Command::Mech(MechCommand::Equilibrium {
            profile,
            players,
            c,
            output,
        }) => mech_equilibrium(&profile, players, c, &output),
        Command::Mech(MechCommand::Probe {
            sellers,
            v0,
            floor,
            step,
            max_iters,
            output,
        }) => mech_probe(sellers, v0, floor, step, max_iters, &output),
        Command::Sim(SimCommand::Run {
            scenario,
            seed,
            runs,
            paper_defaults,
            output,
        }) => sim_run(&scenario, seed, runs, paper_defaults, &output),
        Command::Sim(SimCommand::Calibrate {
            scenario,
            target,
            tol,
            seed,
            paper_defaults,
            output,
        }) => sim_calibrate(&scenario, target, tol, seed, paper_defaults, &output),
        Command::Fit(FitCommand::Eval { table, output }) => fit_eval(&table, &output),
        Command::Fit(FitCommand::Run {
            samples,
            gamma_grid,
            output,
        }) => fit_run(&samples, gamma_grid.as_deref(), &output),
        Command::Ledger(LedgerCommand::Analyze {
            trades,
            rates,
            symbol,
            rejects,
            horizon,
            output,
        }) => ledger_analyze(
            &trades,
            rates.as_deref(),
            symbol.as_deref(),
            rejects.as_deref(),
            horizon,
            &output,
        ),
    }
}

fn read_profiles(path: &Path) -> Result<Vec<profile::BasicProfile>> {
    profile::read_profiles_file(path)
        .with_context(|| format!("loading profiles from {}", path.display()))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(writer.into_inner()?)
}

fn opt_points(profile_path: &Path, output: &OutputArgs) -> Result<()> {
    let profiles = read_profiles(profile_path)?;
    let records: Vec<opt::PlanRecord> = profiles
        .iter()
        .map(|p| opt::compute_opt(p).map(|plan| opt::PlanRecord::from(&plan)))
        .collect::<p2e_core::error::Result<_>>()?;

    let payload = match output.format {
        Format::Json => to_json(&records)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                asset_id: &'a str,
                payoff: f64,
                buys: String,
                sells: String,
            }
            let rows: Vec<Row> = records
                .iter()
                .map(|r| Row {
                    asset_id: &r.asset_id,
                    payoff: r.payoff,
                    buys: join(&r.buys),
                    sells: join(&r.sells),
                })
                .collect();
            csv_bytes(&rows)?
        }
    };
    let mut manifest = Manifest::new(
        "opt points",
        serde_json::json!({ "profile": profile_path, "format": format!("{:?}", output.format) }),
        None,
    );
    manifest.add_input(profile_path)?;
    emit(&output.out, &payload, &manifest)
}

fn join(slots: &[usize]) -> String {
    slots
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn mech_incentives(profile_path: &Path, output: &OutputArgs) -> Result<()> {
    let profiles = read_profiles(profile_path)?;
    let mut records = Vec::new();
    for p in &profiles {
        let plan = opt::compute_opt(p)?;
        let schedule = mechanism::incentive_schedule(p, &plan)?;
        records.push(schedule.to_record());
    }
    let payload = match output.format {
        Format::Json => to_json(&records)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                asset_id: &'a str,
                t: usize,
                w: f64,
            }
            let rows: Vec<Row> = records
                .iter()
                .flat_map(|r| {
                    r.slots.iter().map(move |s| Row {
                        asset_id: &r.asset_id,
                        t: s.t,
                        w: s.w,
                    })
                })
                .collect();
            csv_bytes(&rows)?
        }
    };
    let mut manifest = Manifest::new(
        "mech incentives",
        serde_json::json!({ "profile": profile_path }),
        None,
    );
    manifest.add_input(profile_path)?;
    emit(&output.out, &payload, &manifest)
}

fn mech_equilibrium(profile_path: &Path, players: u32, c: f64, output: &OutputArgs) -> Result<()> {
    let profiles = read_profiles(profile_path)?;
    let params = econ::EconomyParams {
        players,
        assets: profiles.len().max(1) as u32,
        lifespan: profiles.iter().map(|p| p.len()).max().unwrap_or(1) as u32,
        c,
        f: 0.0,
        c0: 0.0,
        v0: 0.0,
        floor: 0.0,
        cap: f64::MAX,
    };

    #[derive(Serialize)]
    struct Row {
        asset_id: String,
        is_equilibrium: bool,
        worst_deviation_gain: f64,
        symmetric_payoff: f64,
    }
    #[derive(Serialize)]
    struct Report {
        asset_id: String,
        #[serde(flatten)]
        check: mechanism::EquilibriumReport,
    }

    let mut reports = Vec::new();
    for p in &profiles {
        let plan = opt::compute_opt(p)?;
        let schedule = mechanism::incentive_schedule(p, &plan)?;
        let check = mechanism::equilibrium_check(p, &schedule, &params)?;
        reports.push(Report {
            asset_id: p.asset_id.clone(),
            check,
        });
    }

    let payload = match output.format {
        Format::Json => to_json(&reports)?,
        Format::Csv => {
            let rows: Vec<Row> = reports
                .iter()
                .map(|r| Row {
                    asset_id: r.asset_id.clone(),
                    is_equilibrium: r.check.is_equilibrium,
                    worst_deviation_gain: r.check.worst_deviation_gain,
                    symmetric_payoff: r.check.symmetric_payoff,
                })
                .collect();
            csv_bytes(&rows)?
        }
    };
    let mut manifest = Manifest::new(
        "mech equilibrium",
        serde_json::json!({ "profile": profile_path, "players": players, "c": c }),
        None,
    );
    manifest.add_input(profile_path)?;
    emit(&output.out, &payload, &manifest)
}

fn mech_probe(
    sellers: usize,
    v0: f64,
    floor: f64,
    step: f64,
    max_iters: usize,
    output: &OutputArgs,
) -> Result<()> {
    let params = econ::EconomyParams {
        players: sellers.max(1) as u32,
        assets: 1,
        lifespan: 1,
        c: 0.0,
        f: 0.0,
        c0: 0.0,
        v0,
        floor: 0.0,
        cap: v0.max(floor),
    };
    let report = mechanism::best_response_probe(&params, sellers, floor, step, max_iters)?;
    let payload = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                cycled: bool,
                iterations: usize,
                cycle_len: usize,
            }
            csv_bytes(&[Row {
                cycled: report.cycled,
                iterations: report.iterations,
                cycle_len: report.cycle.len(),
            }])?
        }
    };
    let manifest = Manifest::new(
        "mech probe",
        serde_json::json!({
            "sellers": sellers, "v0": v0, "floor": floor,
            "step": step, "max_iters": max_iters
        }),
        None,
    );
    emit(&output.out, &payload, &manifest)
}

fn load_scenario(
    path: &Path,
    seed: Option<u64>,
    runs: Option<u32>,
    paper_defaults: bool,
) -> Result<sim::Scenario> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let mut scenario: sim::Scenario = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing scenario {}", path.display()))?;
    if paper_defaults {
        scenario.economy.players = 100;
        scenario.economy.assets = 100;
        scenario.economy.lifespan = 12;
        scenario.economy.floor = 0.0;
        scenario.economy.cap = 10_000.0;
    }
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(runs) = runs {
        scenario.runs = runs;
    }
    Ok(scenario)
}

fn sim_run(
    scenario_path: &Path,
    seed: Option<u64>,
    runs: Option<u32>,
    paper_defaults: bool,
    output: &OutputArgs,
) -> Result<()> {
    let scenario = load_scenario(scenario_path, seed, runs, paper_defaults)?;
    let aggregate = sim::monte_carlo(&scenario)?;
    let first_run = sim::simulate(&scenario, sim::mix_seed(scenario.seed, 0))?;

    #[derive(Serialize)]
    struct RunReport {
        scenario_seed: u64,
        runs: u32,
        aggregate: sim::MonteCarloAggregate,
        first_run: sim::RunResult,
    }
    let report = RunReport {
        scenario_seed: scenario.seed,
        runs: scenario.runs,
        aggregate,
        first_run,
    };
    let payload = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                metric: &'a str,
                mean: f64,
                stdev: f64,
                ci95_half_width: f64,
            }
            let a = &report.aggregate;
            csv_bytes(&[
                Row {
                    metric: "mean_player_profit",
                    mean: a.mean_player_profit.mean,
                    stdev: a.mean_player_profit.stdev,
                    ci95_half_width: a.mean_player_profit.ci95_half_width,
                },
                Row {
                    metric: "mean_trade_profit",
                    mean: a.mean_trade_profit.mean,
                    stdev: a.mean_trade_profit.stdev,
                    ci95_half_width: a.mean_trade_profit.ci95_half_width,
                },
                Row {
                    metric: "platform_profit",
                    mean: a.platform_profit.mean,
                    stdev: a.platform_profit.stdev,
                    ci95_half_width: a.platform_profit.ci95_half_width,
                },
            ])?
        }
    };
    let mut manifest = Manifest::new(
        "sim run",
        serde_json::to_value(&scenario)?,
        Some(scenario.seed),
    );
    manifest.add_input(scenario_path)?;
    emit(&output.out, &payload, &manifest)
}

fn sim_calibrate(
    scenario_path: &Path,
    target: f64,
    tol: f64,
    seed: Option<u64>,
    paper_defaults: bool,
    output: &OutputArgs,
) -> Result<()> {
    let mut scenario = load_scenario(scenario_path, seed, None, paper_defaults)?;
    scenario.incentive.enabled = false;
    let result = sim::calibrate_c(&scenario, target, tol)?;
    let payload = match output.format {
        Format::Json => to_json(&result)?,
        Format::Csv => csv_bytes(&[&result])?,
    };
    let mut manifest = Manifest::new(
        "sim calibrate",
        serde_json::json!({
            "scenario": serde_json::to_value(&scenario)?,
            "target": target,
            "tol": tol
        }),
        Some(scenario.seed),
    );
    manifest.add_input(scenario_path)?;
    emit(&output.out, &payload, &manifest)
}

fn fit_eval(table_path: &Path, output: &OutputArgs) -> Result<()> {
    let rows = regress::read_model_table_file(table_path)
        .with_context(|| format!("loading model table {}", table_path.display()))?;
    if rows.is_empty() {
        return Err(anyhow!("model table {} has no rows", table_path.display()));
    }

    #[derive(Serialize)]
    struct EvalRow {
        game: String,
        computed: f64,
        table: f64,
        abs_diff: f64,
    }
    let eval_rows: Vec<EvalRow> = rows
        .iter()
        .map(|row| {
            let computed = regress::estimate_profit(&row.params(), &row.aggregates());
            EvalRow {
                game: row.game.clone(),
                computed,
                table: row.estimated_profit,
                abs_diff: (computed - row.estimated_profit).abs(),
            }
        })
        .collect();
    let max_abs_diff = eval_rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);

    #[derive(Serialize)]
    struct EvalReport {
        rows: Vec<EvalRow>,
        max_abs_diff: f64,
    }
    let report = EvalReport {
        rows: eval_rows,
        max_abs_diff,
    };
    let payload = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => csv_bytes(&report.rows)?,
    };
    let mut manifest = Manifest::new(
        "fit eval",
        serde_json::json!({ "table": table_path }),
        None,
    );
    manifest.add_input(table_path)?;
    emit(&output.out, &payload, &manifest)
}

fn fit_run(samples_path: &Path, gamma_grid: Option<&str>, output: &OutputArgs) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct SampleRow {
        #[allow(dead_code)]
        game: String,
        avg_trade_price: f64,
        circulation_rate: f64,
        mean_profit: f64,
    }
    let mut reader = csv::Reader::from_path(samples_path)
        .with_context(|| format!("loading samples {}", samples_path.display()))?;
    let mut samples = Vec::new();
    for row in reader.deserialize() {
        let row: SampleRow = row.map_err(p2e_core::Error::from)?;
        samples.push(regress::GameAggregates {
            avg_trade_price: row.avg_trade_price,
            circulation_rate: row.circulation_rate,
            mean_profit: row.mean_profit,
        });
    }

    let (params, residuals) = match gamma_grid {
        None => regress::fit_profit_model(&samples)?,
        Some(grid) => {
            let grid: Vec<f64> = grid
                .split(',')
                .map(|g| g.trim().parse::<f64>().map_err(|_| anyhow!("bad gamma '{g}'")))
                .collect::<Result<_>>()?;
            regress::fit_profit_model_gamma_grid(&samples, &grid)?
        }
    };

    #[derive(Serialize)]
    struct FitReport {
        params: regress::ProfitModelParams,
        residuals: Vec<f64>,
        rss: f64,
    }
    let report = FitReport {
        params,
        rss: residuals.iter().map(|r| r * r).sum(),
        residuals,
    };
    let payload = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => csv_bytes(&[&report.params])?,
    };
    let mut manifest = Manifest::new(
        "fit run",
        serde_json::json!({ "samples": samples_path, "gamma_grid": gamma_grid }),
        None,
    );
    manifest.add_input(samples_path)?;
    emit(&output.out, &payload, &manifest)
}

fn ledger_analyze(
    trades_path: &Path,
    rates_path: Option<&Path>,
    symbol: Option<&str>,
    rejects_path: Option<&Path>,
    horizon: u32,
    output: &OutputArgs,
) -> Result<()> {
    let file = std::fs::File::open(trades_path)
        .with_context(|| format!("opening trades file {}", trades_path.display()))?;
    let rates = match rates_path {
        None => None,
        Some(path) => {
            let rates_file = std::fs::File::open(path)
                .with_context(|| format!("opening rates file {}", path.display()))?;
            Some(ledger::RatesTable::from_csv(rates_file)?)
        }
    };
    let ingest = match (&rates, symbol) {
        (Some(table), Some(symbol)) => ledger::ingest_with_rates(file, Some((table, symbol)))?,
        _ => ledger::ingest(file)?,
    };

    #[derive(Serialize)]
    struct GameReport {
        game: String,
        trades: usize,
        traded_tokens: usize,
        circulation_rate: f64,
        holder_count: usize,
        odi: f64,
        top_concentration: BTreeMap<String, f64>,
        intervals: Option<ledger::IntervalSummary>,
        profits: ProfitSummary,
        big_day: ledger::BigDay,
        restable: ledger::Restable,
    }
    #[derive(Serialize)]
    struct ProfitSummary {
        average: Option<f64>,
        median: Option<f64>,
        mode: Option<f64>,
        developer_average: Option<f64>,
        player_trade_count: usize,
        wins: usize,
        losses: usize,
    }

    let mut games = Vec::new();
    for game in ingest.ledger.games() {
        let sub = ingest.ledger.filter_game(&game);
        let snapshot = sub.holdings();
        let mut top_concentration = BTreeMap::new();
        for n in [1usize, 10, 25, 50] {
            top_concentration.insert(n.to_string(), ledger::top_concentration(&snapshot, n)?);
        }
        let profits = ledger::profit_chains(&sub);
        let day = ledger::big_day(&sub)?;
        let restable = ledger::price_restable(&sub, day.date, horizon)?;
        games.push(GameReport {
            game: game.clone(),
            trades: sub.len(),
            traded_tokens: sub.traded_token_count(),
            circulation_rate: ledger::circulation_rate(&sub)?,
            holder_count: snapshot.wallet_count(),
            odi: ledger::odi(&snapshot)?,
            top_concentration,
            intervals: ledger::inter_purchase_intervals(&sub).summary,
            profits: ProfitSummary {
                average: profits.average,
                median: profits.median,
                mode: profits.mode,
                developer_average: profits.developer_average,
                player_trade_count: profits.player_trade_count,
                wins: profits.wins,
                losses: profits.losses,
            },
            big_day: day,
            restable,
        });
    }

    #[derive(Serialize)]
    struct AnalyzeReport {
        games: Vec<GameReport>,
        reject_count: usize,
        rejects: Vec<ledger::RejectedRow>,
    }
    let report = AnalyzeReport {
        games,
        reject_count: ingest.rejects.len(),
        rejects: ingest.rejects.clone(),
    };

    if let Some(path) = rejects_path {
        report::write_atomic(path, &csv_bytes(&ingest.rejects)?)?;
    }

    let payload = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                game: String,
                trades: usize,
                traded_tokens: usize,
                circulation_rate: f64,
                odi: f64,
                top1: f64,
                top10: f64,
                big_day: String,
                big_day_share: f64,
                avg_profit: Option<f64>,
                median_profit: Option<f64>,
                developer_avg: Option<f64>,
            }
            let rows: Vec<Row> = report
                .games
                .iter()
                .map(|g| Row {
                    game: g.game.clone(),
                    trades: g.trades,
                    traded_tokens: g.traded_tokens,
                    circulation_rate: g.circulation_rate,
                    odi: g.odi,
                    top1: g.top_concentration["1"],
                    top10: g.top_concentration["10"],
                    big_day: g.big_day.date.to_string(),
                    big_day_share: g.big_day.share_of_total,
                    avg_profit: g.profits.average,
                    median_profit: g.profits.median,
                    developer_avg: g.profits.developer_average,
                })
                .collect();
            csv_bytes(&rows)?
        }
    };
    let mut manifest = Manifest::new(
        "ledger analyze",
        serde_json::json!({
            "trades": trades_path,
            "rates": rates_path,
            "symbol": symbol,
            "horizon": horizon
        }),
        None,
    );
    manifest.add_input(trades_path)?;
    if let Some(path) = rates_path {
        manifest.add_input(path)?;
    }
    emit(&output.out, &payload, &manifest)
}
