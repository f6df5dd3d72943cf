use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anesthesia_core::io::{
    cohort_metrics_csv, curve_csv, parse_scenario, render_svg_plot, sweep_csv, to_json,
    write_trajectory_csv, CohortMetricsRow, ParseError, PlotSpec, Series,
};
use anesthesia_core::metrics::{ce_bis_curve, tune_tf2, MaintenanceTemplate, MetricsReport};
use anesthesia_core::patient::{builtin_cohort, cohort_csv, cohort_tsv, PkPreset, VirtualPatient};
use anesthesia_core::sim::{run_closed_loop, run_many, run_open_loop, InfusionProfile, Scenario};
use anesthesia_core::{control::ControlError, sim::SimError, sim::SimErrorKind, Error, Trajectory};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "anesthesia", version, about = "Closed-loop propofol anesthesia simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in patient cohort.
    ListPatients {
        #[arg(long, value_enum, default_value_t = TableFormat::Table)]
        format: TableFormat,
    },
    /// Run a closed-loop scenario and write its trajectory as CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Trajectory CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG plot of the BIS signals.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Constant-rate infusion without feedback.
    OpenLoop {
        #[arg(long)]
        patient: u32,
        /// Infusion rate [mg/min].
        #[arg(long)]
        rate: f64,
        /// Duration [min].
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 1.0 / 60.0)]
        step: f64,
        #[arg(long, value_enum, default_value_t = Preset::Corrected)]
        preset: Preset,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run a scenario on all 13 patients and print a metrics table.
    Cohort {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Sweep the F2 time constant and select it by degradation ratio.
    TuneTf2 {
        /// Inclusive grid `START:STOP:STEP` [min].
        #[arg(long, default_value = "0.25:20:0.25")]
        grid: String,
        #[arg(long, default_value_t = 0.30)]
        threshold: f64,
        /// Scenario whose controller settings seed the sweep.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Effect-site concentration to BIS curves.
    Curve {
        /// Patient id, or `all`.
        #[arg(long)]
        patient: String,
        #[arg(long, default_value_t = 20.0)]
        ce_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Corrected,
    Uncorrected,
}

impl From<Preset> for PkPreset {
    fn from(p: Preset) -> Self {
        match p {
            Preset::Corrected => PkPreset::SchniderCorrected,
            Preset::Uncorrected => PkPreset::Uncorrected,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn invalid(key: &str, constraint: impl Into<String>) -> Error {
    Error::Parse(ParseError::Invalid {
        key: key.into(),
        constraint: constraint.into(),
    })
}

/// A run whose signals went non-finite is a controller failure.
fn check_finite(traj: &Trajectory) -> Result<(), Error> {
    if traj.is_well_formed() {
        Ok(())
    } else {
        let step = traj.records.iter().position(|r| !r.is_finite()).unwrap_or(0);
        Err(Error::Sim(SimError {
            step,
            kind: SimErrorKind::Control(ControlError::Diverged),
        }))
    }
}

fn bis_plot(traj: &Trajectory, title: &str) -> Result<String, Error> {
    let t = traj.times();
    let mut series = vec![
        Series::new("BIS (true)", &t, &traj.series(|r| r.bis_true)),
        Series::new("BIS (measured)", &t, &traj.series(|r| r.bis_measured)),
    ];
    if traj.records.iter().all(|r| r.bis_filtered.is_some()) {
        series.push(Series::new("BIS (filtered)", &t, &traj.series(|r| r.bis_filtered.unwrap_or_default())));
    }
    Ok(render_svg_plot(&series, &PlotSpec::bis(title))?)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = match parts.as_slice() {
        [a, b, c] => [a, b, c]
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| invalid("grid", format!("`{spec}`: {e}")))?,
        _ => return Err(invalid("grid", format!("expected START:STOP:STEP, got `{spec}`"))),
    };
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || start < 0.0 || step <= 0.0 || stop < start {
        return Err(invalid("grid", "need 0 <= START <= STOP and STEP > 0"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::ListPatients { format } => {
            print!(
                "{}",
                match format {
                    TableFormat::Table => cohort_tsv(),
                    TableFormat::Csv => cohort_csv(),
                }
            );
        }
        Command::Simulate { scenario, out, plot } => {
            let s = parse_scenario(&read(&scenario)?)?;
            let traj = run_closed_loop(&s)?;
            check_finite(&traj)?;
            if let Some(p) = &plot {
                write(p, &bis_plot(&traj, &format!("patient {}", s.patient.id))?)?;
            }
            emit(out.as_deref(), &write_trajectory_csv(&traj))?;
            if out.is_some() {
                let report = MetricsReport::from_trajectory(&traj, s.controller.target_bis)?;
                println!("{}", to_json(&report));
            }
        }
        Command::OpenLoop { patient, rate, duration, step, preset, out, plot } => {
            let p = VirtualPatient::builtin(patient, preset.into()).map_err(|e| match e {
                anesthesia_core::patient::ModelError::UnknownPatient(id) => Error::Parse(ParseError::UnknownPatient(id)),
                other => Error::Model(other),
            })?;
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(invalid("rate", "must be finite and >= 0"));
            }
            let traj = run_open_loop(&p, &InfusionProfile::constant(rate), duration, step)?;
            if let Some(path) = &plot {
                write(path, &bis_plot(&traj, &format!("patient {patient}, {rate} mg/min"))?)?;
            }
            emit(out.as_deref(), &write_trajectory_csv(&traj))?;
        }
        Command::Cohort { scenario, format, plot } => {
            let base = parse_scenario(&read(&scenario)?)?;
            let cohort = builtin_cohort::<f64>(base.patient.preset)?;
            let scenarios: Vec<Scenario<f64>> = cohort
                .into_iter()
                .map(|p| Scenario { patient: p, ..base.clone() })
                .collect();
            let mut rows = Vec::with_capacity(scenarios.len());
            let mut trajectories = Vec::with_capacity(scenarios.len());
            for (s, result) in scenarios.iter().zip(run_many(&scenarios)) {
                let traj = result?;
                check_finite(&traj)?;
                let last = traj.last().expect("validated scenarios run at least one step");
                rows.push(CohortMetricsRow {
                    id: s.patient.id,
                    report: MetricsReport::from_trajectory(&traj, s.controller.target_bis)?,
                    bis_final: last.bis_true,
                    u_final: last.u,
                });
                trajectories.push((s.patient.id, traj));
            }
            if let Some(path) = &plot {
                let series: Vec<Series> = trajectories
                    .iter()
                    .map(|(id, t)| Series::new(format!("patient {id}"), &t.times(), &t.series(|r| r.bis_true)))
                    .collect();
                write(path, &render_svg_plot(&series, &PlotSpec::bis("cohort BIS"))?)?;
            }
            match format {
                ReportFormat::Csv => print!("{}", cohort_metrics_csv(&rows)),
                ReportFormat::Json => println!("{}", to_json(&rows)),
            }
        }
        Command::TuneTf2 { grid, threshold, scenario, format, plot } => {
            let grid = parse_grid(&grid)?;
            if threshold.is_nan() {
                return Err(invalid("threshold", "must be a number"));
            }
            let (template, preset) = match &scenario {
                Some(path) => {
                    let s = parse_scenario(&read(path)?)?;
                    (MaintenanceTemplate::from_scenario(&s), s.patient.preset)
                }
                None => (MaintenanceTemplate::default(), PkPreset::default()),
            };
            let cohort = builtin_cohort::<f64>(preset)?;
            let sweep = tune_tf2(&grid, threshold, &cohort, &template)?;
            if let Some(path) = &plot {
                let series = [Series::new("d(tf2)", &sweep.grid, &sweep.d_values)];
                let spec = PlotSpec {
                    title: "IAE degradation ratio".into(),
                    x_label: "tf2 [min]".into(),
                    y_label: "d".into(),
                    y_range: None,
                };
                write(path, &render_svg_plot(&series, &spec)?)?;
            }
            match format {
                ReportFormat::Csv => print!("{}", sweep_csv(&sweep)),
                ReportFormat::Json => println!("{}", to_json(&sweep)),
            }
            eprintln!("selected tf2 = {} min (threshold {threshold})", sweep.selected_tf2);
        }
        Command::Curve { patient, ce_max, points, plot } => {
            let cohort = builtin_cohort::<f64>(PkPreset::default())?;
            let chosen: Vec<_> = if patient.eq_ignore_ascii_case("all") {
                cohort
            } else {
                let id: u32 = patient
                    .parse()
                    .map_err(|_| invalid("patient", format!("expected an id or `all`, got `{patient}`")))?;
                vec![cohort
                    .into_iter()
                    .find(|p| p.id == id)
                    .ok_or(Error::Parse(ParseError::UnknownPatient(id)))?]
            };
            let curves: Vec<(u32, Vec<(f64, f64)>)> = chosen
                .iter()
                .map(|p| Ok((p.id, ce_bis_curve(&p.hill, ce_max, points)?)))
                .collect::<Result<_, Error>>()?;
            if let Some(path) = &plot {
                let series: Vec<Series> = curves
                    .iter()
                    .map(|(id, pts)| Series { label: format!("patient {id}"), points: pts.clone() })
                    .collect();
                let spec = PlotSpec {
                    title: "BIS vs effect-site concentration".into(),
                    x_label: "Ce [mg/L]".into(),
                    ..PlotSpec::bis("")
                };
                write(path, &render_svg_plot(&series, &spec)?)?;
            }
            print!("{}", curve_csv(&curves));
        }
    }
    Ok(())
}
