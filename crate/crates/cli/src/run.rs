//! Runs a validated configuration and writes its data files and manifest.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use phonon_gauge::dynamics::{
    array_experiment, link_transfer_point, plaquette_experiment, tuned_plaquette_spacing,
    ArrayShape, DrivenSetup, ExactModel, LinkPoint, LinkScan, PlaquetteFlux, PlaquetteParams,
    PlaquetteRun,
};
use phonon_gauge::spectra::{
    edge_state_report, flat_band_report, flux_sweep, gap_windows, rhombic_ladder_matrix,
    square_lattice_matrix, Cluster, EdgeState, FluxPoint,
};
use phonon_gauge::{
    dressed_factor, Boundary, Complex64, Direction, DriveSpec, EvolutionResult, FrequencyWeighting,
    LaserParams, Layout, SpectrumResult,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, Format, Value};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{experiment}: {source}")]
    Simulation {
        experiment: Experiment,
        source: phonon_gauge::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// `1` for rejected inputs, `2` for numerical or I/O failures.
    pub fn exit_code(&self) -> u8 {
        use phonon_gauge::Error::*;
        match self {
            RunError::Simulation { source, .. } => match source {
                InvalidGeometry(_)
                | Configuration(_)
                | InvalidParameter(_)
                | InvalidSite { .. } => 1,
                _ => 2,
            },
            RunError::Io { .. } => 2,
        }
    }
}

/// A file produced by an experiment, held in memory until written.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub files: Vec<OutputFile>,
    /// Derived quantities recorded in the manifest.
    pub derived: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    software: &'static str,
    version: &'static str,
    experiment: Experiment,
    format: Format,
    parameters: &'a BTreeMap<String, Value>,
    derived: &'a BTreeMap<String, serde_json::Value>,
    files: Vec<&'a str>,
    wall_clock_seconds: f64,
}

pub const MANIFEST: &str = "manifest.json";

/// Runs the experiment and writes its files plus `manifest.json` into `dir`.
pub fn run_to_directory(
    config: &ExperimentConfig,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let start = Instant::now();
    let outputs = run_experiment(config, format)?;
    let elapsed = start.elapsed().as_secs_f64();
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for f in &outputs.files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: config.experiment,
        format,
        parameters: &config.values,
        derived: &outputs.derived,
        files: outputs.files.iter().map(|f| f.name.as_str()).collect(),
        wall_clock_seconds: elapsed,
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    fs::write(&path, text).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(written)
}

/// Computes all output files of an experiment without touching the disk.
pub fn run_experiment(config: &ExperimentConfig, format: Format) -> Result<Outputs, RunError> {
    let sim = |source| RunError::Simulation {
        experiment: config.experiment,
        source,
    };
    match config.experiment {
        Experiment::DressedMap => dressed_map(config, format),
        Experiment::LinkScan => link_scan(config, format),
        Experiment::Plaquette => plaquette(config, format),
        Experiment::LadderSpectrum => ladder_spectrum(config, format),
        Experiment::FluxSweep => ladder_sweep(config, format),
        Experiment::Butterfly => butterfly(config, format),
        Experiment::Custom => custom(config, format),
    }
    .map_err(sim)
}

type Sim<T> = phonon_gauge::Result<T>;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn json_file(name: &str, value: &impl Serialize) -> OutputFile {
    OutputFile {
        name: format!("{name}.json"),
        contents: serde_json::to_string_pretty(value).expect("results serialise") + "\n",
    }
}

fn csv_file(name: &str, contents: String) -> OutputFile {
    OutputFile {
        name: format!("{name}.csv"),
        contents,
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

fn boundary(config: &ExperimentConfig) -> Boundary {
    match config.text("numerics.boundary") {
        "periodic" => Boundary::Periodic,
        _ => Boundary::Open,
    }
}

fn dressed_map(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let order = config.int("physics.order") as u32;
    let etas = grid(
        0.0,
        config.float("numerics.eta_max"),
        config.int("numerics.eta_points"),
    );
    let phases = grid(0.0, TAU, config.int("numerics.phase_points"));
    let table: Vec<Vec<f64>> = etas
        .par_iter()
        .map(|&eta| {
            phases
                .iter()
                .map(|&p| Ok(dressed_factor(order, eta, p)?.norm()))
                .collect::<Sim<Vec<f64>>>()
        })
        .collect::<Sim<_>>()?;
    let file = match format {
        Format::Json => json_file(
            "dressed_map",
            &json!({ "order": order, "eta": etas, "phase_difference": phases, "abs_factor": table }),
        ),
        Format::Csv => {
            let header = ["eta", "phase_difference", "abs_factor"].map(String::from);
            let rows = etas.iter().zip(&table).flat_map(|(eta, row)| {
                phases
                    .iter()
                    .zip(row)
                    .map(move |(p, f)| vec![num(*eta), num(*p), num(*f)])
            });
            csv_file("dressed_map", csv(&header, rows))
        }
    };
    Ok(Outputs {
        files: vec![file],
        derived: BTreeMap::new(),
    })
}

fn driven_setup(config: &ExperimentConfig, phases: (f64, f64)) -> Sim<DrivenSetup> {
    let order = config.int("physics.order") as u32;
    let drive =
        if config.experiment != Experiment::Custom || config.text("physics.drive") == "laser" {
            let eta = config.float("physics.lamb_dicke");
            let laser = LaserParams {
                rabi: config.float("physics.rabi"),
                beat: config.float("physics.beat"),
                lamb_dicke: [eta; 3],
            };
            DriveSpec::laser(laser, Direction::Z, order, phases.0, phases.1)?
        } else {
            DriveSpec::cosine(
                config.float("physics.drive_frequency"),
                config.float("physics.drive_strength"),
                order,
                phases.0,
                phases.1,
            )?
        };
    let initial_site = match config.experiment {
        Experiment::Custom => config.int("numerics.initial_site"),
        _ => 0,
    };
    Ok(DrivenSetup {
        gradient: config.float("physics.gradient"),
        beta: config.float("physics.beta"),
        drive,
        exact: match config.text("numerics.exact_model") {
            "cosine" => ExactModel::Cosine,
            _ => ExactModel::Laser,
        },
        n_max: config.int("numerics.n_max"),
        steps_per_period: config.float("numerics.steps_per_period"),
        counter_rotating: config.boolean("numerics.counter_rotating"),
        cutoff_range: 3.0,
        weighting: FrequencyWeighting::Reference,
        initial_site,
    })
}

fn link_scan(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let setup = driven_setup(config, (0.0, 0.0))?;
    let phases = grid(0.0, TAU, config.int("numerics.phase_points"));
    let points: Vec<LinkPoint> = phases
        .par_iter()
        .map(|&p| link_transfer_point(&setup, p))
        .collect::<Sim<_>>()?;
    let scan = LinkScan {
        exact: setup.exact.kind(),
        points,
    };
    let mut derived = BTreeMap::new();
    derived.insert("max_disagreement".into(), json!(scan.max_disagreement()));
    derived.insert("drive_strength".into(), json!(setup.drive.strength));
    let file = match format {
        Format::Json => json_file("link_scan", &scan),
        Format::Csv => {
            let header = [
                "phase_difference",
                "coupling",
                "t_star",
                "transfer_effective",
                "transfer_exact",
                "norm_drift_effective",
                "norm_drift_exact",
            ]
            .map(String::from);
            let rows = scan.points.iter().map(|p| {
                vec![
                    num(p.phase_difference),
                    num(p.coupling),
                    opt(p.t_star),
                    opt(p.transfer_effective),
                    opt(p.transfer_exact),
                    opt(p.norm_drift_effective),
                    opt(p.norm_drift_exact),
                ]
            });
            csv_file("link_scan", csv(&header, rows))
        }
    };
    Ok(Outputs {
        files: vec![file],
        derived,
    })
}

fn spacing(config: &ExperimentConfig, drive: &DriveSpec) -> Sim<f64> {
    match config.values.get("physics.d_y") {
        Some(Value::Text(s)) if s == "tuned" => tuned_plaquette_spacing(drive),
        Some(Value::Text(_)) => {
            let f = dressed_factor(drive.order, drive.strength, drive.phase_x)?.norm();
            Ok(f.powf(-2.0 / 3.0))
        }
        _ => Ok(config.float("physics.d_y")),
    }
}

fn series_csv(runs: &[&EvolutionResult]) -> String {
    let mut header = vec!["time".to_string()];
    for r in runs {
        header.extend((0..r.n_sites()).map(|i| format!("{}_{i}", r.model.name())));
    }
    let rows = (0..runs[0].times.len()).map(|k| {
        let mut row = vec![num(runs[0].times[k])];
        for r in runs {
            row.extend(r.populations[k].iter().map(|&p| num(p)));
        }
        row
    });
    csv(&header, rows)
}

fn plaquette(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let fluxes: Vec<PlaquetteFlux> = match config.text("physics.plaquette_flux") {
        "zero" => vec![PlaquetteFlux::Zero],
        "pi" => vec![PlaquetteFlux::Pi],
        _ => vec![PlaquetteFlux::Zero, PlaquetteFlux::Pi],
    };
    let runs: Vec<(PlaquetteFlux, PlaquetteRun)> = fluxes
        .par_iter()
        .map(|&flux| {
            let (px, py) = flux.phases();
            let setup = driven_setup(config, (px, py))?;
            let d_y = spacing(config, &setup.drive)?;
            let params = PlaquetteParams {
                d_y: Some(d_y),
                window: config.float("numerics.window"),
                samples: config.int("numerics.samples"),
                ..PlaquetteParams::new(setup, flux)
            };
            Ok((flux, plaquette_experiment(&params)?))
        })
        .collect::<Sim<_>>()?;
    let mut derived = BTreeMap::new();
    let mut files = Vec::new();
    for (flux, run) in &runs {
        let tag = match flux {
            PlaquetteFlux::Zero => "zero",
            PlaquetteFlux::Pi => "pi",
        };
        derived.insert(
            format!("{tag}_flux"),
            json!({
                "d_y": run.d_y,
                "coupling_x": run.coupling_x,
                "coupling_y": run.coupling_y,
                "flux": run.flux,
                "t_final": run.t_final,
                "max_population_site_3_effective": run.effective.site_series(2).into_iter().fold(0.0, f64::max),
                "max_population_site_3_exact": run.exact.site_series(2).into_iter().fold(0.0, f64::max),
                "norm_drift_exact": run.exact.max_norm_drift(),
            }),
        );
        files.push(match format {
            Format::Json => json_file(&format!("plaquette_{tag}"), run),
            Format::Csv => csv_file(
                &format!("plaquette_{tag}"),
                series_csv(&[&run.effective, &run.exact]),
            ),
        });
    }
    Ok(Outputs { files, derived })
}

#[derive(Serialize)]
struct LadderReport<'a> {
    spectrum: &'a SpectrumResult,
    clusters: &'a [Cluster],
    gap_windows: &'a [(f64, f64)],
    edge_states: &'a [EdgeState],
}

fn ladder_spectrum(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let (j1, j2, phi) = (
        config.float("physics.j1"),
        config.float("physics.j2"),
        config.float("physics.flux"),
    );
    let cells = config.int("numerics.cells");
    let spectrum = rhombic_ladder_matrix(cells, j1, j2, phi, boundary(config))?.spectrum()?;
    let bulk = rhombic_ladder_matrix(cells, j1, j2, phi, Boundary::Periodic)?.spectrum()?;
    let clusters = flat_band_report(&spectrum, None);
    let windows = gap_windows(&bulk.eigenvalues, 1e-6 * bulk.scale());
    let edges = edge_state_report(&spectrum, &windows);
    let mut derived = BTreeMap::new();
    derived.insert("sites".into(), json!(spectrum.len()));
    derived.insert("edge_states".into(), json!(edges.len()));
    let files = match format {
        Format::Json => vec![json_file(
            "ladder_spectrum",
            &LadderReport {
                spectrum: &spectrum,
                clusters: &clusters,
                gap_windows: &windows,
                edge_states: &edges,
            },
        )],
        Format::Csv => {
            let header = [
                "index",
                "energy",
                "ipr",
                "boundary_weight",
                "band_label",
                "edge_state",
            ]
            .map(String::from);
            let rows = (0..spectrum.len()).map(|k| {
                vec![
                    k.to_string(),
                    num(spectrum.eigenvalues[k]),
                    num(spectrum.ipr[k]),
                    num(spectrum.boundary_weight[k]),
                    spectrum.band_labels[k].to_string(),
                    edges.iter().any(|e| e.index == k).to_string(),
                ]
            });
            let cluster_rows = clusters
                .iter()
                .map(|c| vec![num(c.energy), c.count.to_string(), num(c.spread)]);
            vec![
                csv_file("ladder_spectrum", csv(&header, rows)),
                csv_file(
                    "ladder_clusters",
                    csv(
                        &["energy", "count", "spread"].map(String::from),
                        cluster_rows,
                    ),
                ),
            ]
        }
    };
    Ok(Outputs { files, derived })
}

fn sweep_file(name: &str, column: &str, points: &[FluxPoint], format: Format) -> OutputFile {
    match format {
        Format::Json => json_file(name, &points),
        Format::Csv => {
            let n = points.first().map_or(0, |p| p.eigenvalues.len());
            let mut header = vec![column.to_string(), "min_gap".to_string()];
            header.extend((0..n).map(|k| format!("e_{k}")));
            let rows = points.iter().map(|p| {
                let mut row = vec![num(p.flux), opt(p.min_gap)];
                row.extend(p.eigenvalues.iter().map(|&e| num(e)));
                row
            });
            csv_file(name, csv(&header, rows))
        }
    }
}

fn parallel_sweep<F>(builder: F, fluxes: &[f64], bands: Option<usize>) -> Sim<Vec<FluxPoint>>
where
    F: Fn(f64) -> Sim<DMatrix<Complex64>> + Sync,
{
    let per_point: Vec<Vec<FluxPoint>> = fluxes
        .par_iter()
        .map(|&phi| flux_sweep(&builder, &[phi], bands))
        .collect::<Sim<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn ladder_sweep(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let (j1, j2) = (config.float("physics.j1"), config.float("physics.j2"));
    let cells = config.int("numerics.cells");
    let b = boundary(config);
    let fluxes = grid(-PI, PI, config.int("numerics.flux_points"));
    let bands = (b == Boundary::Periodic).then_some(3);
    let points = parallel_sweep(
        |phi| Ok(rhombic_ladder_matrix(cells, j1, j2, phi, b)?.hamiltonian),
        &fluxes,
        bands,
    )?;
    let mut derived = BTreeMap::new();
    if let Some(smallest) = points.iter().filter_map(|p| p.min_gap).reduce(f64::min) {
        derived.insert("smallest_gap".into(), json!(smallest));
    }
    Ok(Outputs {
        files: vec![sweep_file("flux_sweep", "flux", &points, format)],
        derived,
    })
}

fn butterfly(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let (jx, jy, m_max) = (
        config.float("physics.jx"),
        config.float("physics.jy"),
        config.int("physics.m_max"),
    );
    let (lx, ly) = (config.int("numerics.lx"), config.int("numerics.ly"));
    let b = boundary(config);
    let alphas = grid(0.0, TAU, config.int("numerics.flux_points"));
    let points = parallel_sweep(
        |alpha| Ok(square_lattice_matrix(lx, ly, alpha, jx, jy, m_max, b)?.hamiltonian),
        &alphas,
        None,
    )?;
    Ok(Outputs {
        files: vec![sweep_file("butterfly", "alpha", &points, format)],
        derived: BTreeMap::new(),
    })
}

fn custom(config: &ExperimentConfig, format: Format) -> Sim<Outputs> {
    let phases = (
        config.float("physics.phase_x"),
        config.float("physics.phase_y"),
    );
    let setup = driven_setup(config, phases)?;
    let layout = match config.text("physics.layout") {
        "plaquette" => Layout::Plaquette,
        "rhombic_ladder" => Layout::RhombicLadder,
        "square" => Layout::Square,
        _ => Layout::Link,
    };
    let shape = ArrayShape {
        layout,
        nx: config.int("physics.nx"),
        ny: config.int("physics.ny"),
        d_y: spacing(config, &setup.drive)?,
    };
    let run = array_experiment(
        &setup,
        &shape,
        config.float("numerics.t_final"),
        config.int("numerics.samples"),
    )?;
    let bonds: Vec<_> = run
        .couplings
        .bonds()
        .map(|(i, j, v)| json!({ "i": i, "j": j, "re": v.re, "im": v.im }))
        .collect();
    let mut derived = BTreeMap::new();
    derived.insert("d_y".into(), json!(shape.d_y));
    derived.insert("bonds".into(), json!(bonds));
    derived.insert("norm_drift_exact".into(), json!(run.exact.max_norm_drift()));
    let file = match format {
        Format::Json => json_file(
            "dynamics",
            &json!({ "effective": run.effective, "exact": run.exact, "bonds": bonds }),
        ),
        Format::Csv => csv_file("dynamics", series_csv(&[&run.effective, &run.exact])),
    };
    Ok(Outputs {
        files: vec![file],
        derived,
    })
}
