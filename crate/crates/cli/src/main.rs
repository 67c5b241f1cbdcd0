mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use adoption_core::closed_form::unsubsidized_trajectory;
use adoption_core::model::classify_equilibria;
use adoption_core::scenarios::{reproduce, Cell, Table};
use adoption_core::subsidy::{
    check_bistable_start, default_grid, full_subsidy_analysis, min_duration, noext_cost_at_target,
    noext_cost_decreasing_condition, noext_required_duration, subsidized_trajectory, sweep,
    ConstantLevelSubsidy,
};
use adoption_core::validation::validate;
use adoption_core::{Error, Trajectory};
use clap::{Parser, Subcommand};

use config::{RawConfig, ScenarioConfig, SubsidyKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Assumption(String),
    #[error("validation failed")]
    ValidationFailed,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Assumption(_) | Error::InfeasibleSubsidy { .. } | Error::Singular(_) => {
                CliError::Assumption(e.to_string())
            }
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed => 1,
            CliError::Invalid(_) | CliError::Io(_) | CliError::Csv(_) => 2,
            CliError::Assumption(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "adoption",
    version,
    about = "Adoption dynamics under constant-level subsidies"
)]
struct Cli {
    /// Scenario file of `key = value` lines.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set x0=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// CSV destination (a directory for `reproduce`). Overrides `output`.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibria, their stability and the band edges.
    Equilibria,
    /// Sampled closed-form path under the configured subsidy.
    Simulate,
    /// Minimum duration and cost over a grid of subsidy levels.
    Sweep,
    /// Thresholds and outcome of a full subsidy held for `duration`.
    FullSubsidy,
    /// Duration and cost to reach `target` without an externality.
    Noext,
    /// Closed forms against the numerical oracle.
    Validate,
    /// Data files of a built-in example (1 to 4).
    Reproduce { example: u32 },
}

fn load(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    for s in &cli.set {
        raw.set(s)?;
    }
    ScenarioConfig::from_raw(&raw)
}

fn emit(cli: &Cli, cfg: &ScenarioConfig, table: &Table) -> Result<(), CliError> {
    let dest = cli.output.as_deref().or(cfg.output.as_deref());
    if let Some(p) = output::emit(table, dest)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn equilibria(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let report = classify_equilibria(&cfg.params)?;
    let show = |v: Option<f64>| v.map_or("undefined".to_owned(), |v| v.to_string());
    eprintln!(
        "case {} ({:?}); x°(c) = {}; band edges {} and {}",
        report.case_id(),
        report.case,
        show(report.interior),
        show(report.band_low),
        show(report.band_high),
    );
    let mut t = Table::new("equilibria", &["level", "stability"]);
    for eq in &report.equilibria {
        t.push(vec![eq.level.into(), eq.stability.as_str().into()]);
    }
    emit(cli, cfg, &t)
}

fn configured_path(cfg: &ScenarioConfig) -> Result<Trajectory, CliError> {
    let p = &cfg.params;
    let (level, duration) = match cfg.subsidy {
        SubsidyKind::None => return Ok(unsubsidized_trajectory(p, cfg.t0, cfg.x0)?),
        SubsidyKind::Cls => (cfg.level.expect("checked"), cfg.duration.expect("checked")),
        SubsidyKind::Full => {
            check_bistable_start(p, cfg.x0)?;
            (p.cost, cfg.duration.expect("checked"))
        }
        SubsidyKind::MinDuration => {
            let level = cfg.level.expect("checked");
            let d = min_duration(p, cfg.x0, level)?.ok_or_else(|| {
                CliError::Assumption(format!(
                    "the knee is only reached asymptotically at level {level}"
                ))
            })?;
            (level, d)
        }
    };
    let cls = ConstantLevelSubsidy::new(level, duration, cfg.t0)?;
    cls.check_cost(p.cost)?;
    Ok(subsidized_trajectory(p, &cls, cfg.x0)?)
}

fn simulate(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let path = configured_path(cfg)?;
    let limit = path.limit().map_or("none".to_owned(), |v| v.to_string());
    eprintln!("limit {limit}");
    let mut t = Table::new("trajectory", &["t", "x", "phase"]);
    for s in path.sample(cfg.t_end, cfg.step)? {
        t.push(vec![s.t.into(), s.x.into(), s.phase.as_str().into()]);
    }
    emit(cli, cfg, &t)
}

fn sweep_cmd(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let report = sweep(p, cfg.x0, &default_grid(p, cfg.x0, cfg.grid_points)?)?;
    let b = &report.bounds;
    let labels: Vec<&str> = report
        .sign_pattern
        .trends
        .iter()
        .map(|t| t.label())
        .collect();
    eprintln!(
        "minimum subsidy {}; thresholds {} {} {}; cost pattern {}; cost turn {}",
        b.minimum,
        b.decay_end,
        b.direct_end,
        b.crossing_end,
        labels.join(","),
        report
            .sign_pattern
            .turn()
            .map_or("none".to_owned(), |v| v.to_string()),
    );
    let mut t = Table::new(
        "sweep",
        &[
            "s", "s_over_e", "feasible", "T_hat", "S", "regime", "method", "frontier",
        ],
    );
    for r in &report.rows {
        t.push(vec![
            r.level.into(),
            r.level_over_e.into(),
            r.feasible().into(),
            r.duration.into(),
            r.cost.map(|c| c.value).into(),
            r.row.as_str().into(),
            r.cost.map_or("none", |c| c.method.as_str()).into(),
            r.frontier.into(),
        ]);
    }
    emit(cli, cfg, &t)
}

fn full_subsidy(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let duration = cfg
        .duration
        .ok_or_else(|| CliError::Invalid("full-subsidy needs `duration`".into()))?;
    let r = full_subsidy_analysis(&cfg.params, cfg.x0, duration)?;
    let mut t = Table::new("full_subsidy", &["quantity", "value"]);
    let th = r.thresholds;
    let rows: [(&str, Cell); 8] = [
        ("band_low_time", th.band_low.into()),
        ("knee_time", th.knee.into()),
        ("band_high_time", th.band_high.into()),
        ("duration", r.duration.into()),
        ("interval", r.interval.as_str().into()),
        ("released_at", r.released_at.into()),
        ("final_equilibrium", r.final_equilibrium.into()),
        ("cost", r.cost.into()),
    ];
    for (name, v) in rows {
        t.push(vec![name.into(), v]);
    }
    emit(cli, cfg, &t)
}

fn noext(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    if p.has_externality() {
        return Err(CliError::Assumption(format!(
            "noext needs externality = 0, got {}",
            p.externality
        )));
    }
    let target = cfg
        .target
        .ok_or_else(|| CliError::Invalid("noext needs `target`".into()))?;
    let dist = p.affinity();
    let n = cfg.grid_points - 1;
    let mut t = Table::new("noext", &["s", "T", "S", "cost_decreasing_condition"]);
    for i in 0..=n {
        let s = cfg.s_from + (cfg.s_to - cfg.s_from) * i as f64 / n as f64;
        t.push(vec![
            s.into(),
            noext_required_duration(&dist, p.cost, p.gamma, s, cfg.x0, target).into(),
            noext_cost_at_target(&dist, p.cost, p.gamma, s, cfg.x0, target).into(),
            noext_cost_decreasing_condition(&dist, p.cost, s).into(),
        ]);
    }
    emit(cli, cfg, &t)
}

fn validate_cmd(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let report = validate(&cfg.setup())?;
    let mut t = Table::new(
        "validation",
        &["check", "measured", "tolerance", "passed", "note"],
    );
    for c in &report.checks {
        eprintln!(
            "{} {}: {:e} (tolerance {:e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.note
        );
        t.push(vec![
            c.name.into(),
            c.measured.into(),
            c.tolerance.into(),
            c.passed.into(),
            c.note.as_str().into(),
        ]);
    }
    emit(cli, cfg, &t)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::ValidationFailed)
    }
}

fn reproduce_cmd(cli: &Cli, example: u32) -> Result<(), CliError> {
    let tables = reproduce(example)?;
    let dir = match &cli.output {
        Some(d) => output::resolve(d),
        None => std::env::var_os(output::OUT_DIR_VAR)
            .map_or_else(|| PathBuf::from("out"), PathBuf::from),
    };
    fs::create_dir_all(&dir)?;
    for t in &tables {
        let path = dir.join(format!("{}.csv", t.name));
        output::write_table(fs::File::create(&path)?, t)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Reproduce { example } = cli.command {
        return reproduce_cmd(cli, example);
    }
    let cfg = load(cli)?;
    match cli.command {
        Command::Equilibria => equilibria(cli, &cfg),
        Command::Simulate => simulate(cli, &cfg),
        Command::Sweep => sweep_cmd(cli, &cfg),
        Command::FullSubsidy => full_subsidy(cli, &cfg),
        Command::Noext => noext(cli, &cfg),
        Command::Validate => validate_cmd(cli, &cfg),
        Command::Reproduce { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
