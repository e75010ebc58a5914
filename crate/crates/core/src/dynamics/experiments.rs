use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::evolve::{evolve, EvolutionResult, EvolveSettings, ModelKind};
use super::hamiltonians::{
    default_time_step, CosineDrivenModel, EffectiveModel, Generator, LaserDrivenModel,
};
use crate::couplings::{
    bare_coupling_matrix, dressed_factor, effective_coupling_matrix, plaquette_flux,
    CouplingMatrix, CouplingOptions, FrequencyWeighting,
};
use crate::fock::FockSpace;
use crate::model::{
    build_array, ArrayParams, Direction, DriveMode, DriveSpec, LaserParams, Layout, TrapArray,
};
use crate::{Error, Result};

pub const DEFAULT_STEPS_PER_PERIOD: f64 = 100.0;

/// Effective couplings weaker than this (in units of `ω_ref`) leave a scan
/// point undefined.
pub const UNDEFINED_COUPLING: f64 = 1e-6;

/// Which lab-frame model is compared against the effective description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactModel {
    Cosine,
    Laser,
}

impl ExactModel {
    pub fn kind(self) -> ModelKind {
        match self {
            ExactModel::Cosine => ModelKind::CosineExact,
            ExactModel::Laser => ModelKind::LaserExact,
        }
    }
}

/// Physical and numerical parameters shared by the link and plaquette
/// experiments. The drive's phases are overwritten per experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivenSetup {
    pub gradient: f64,
    pub beta: f64,
    pub drive: DriveSpec,
    pub exact: ExactModel,
    pub n_max: usize,
    pub steps_per_period: f64,
    pub counter_rotating: bool,
    pub cutoff_range: f64,
    /// Prefactor convention of the effective couplings. The exact models
    /// always use the site frequencies.
    pub weighting: FrequencyWeighting,
    pub initial_site: usize,
}

impl DrivenSetup {
    /// Laser-driven link: `Δω = 0.05`, `η_z = 0.2`, `Ω_L = 0.75`, `β = 0.002`,
    /// `r = 1`, `n_max = 4`.
    pub fn link_preset() -> Self {
        Self::laser_preset(0.75, 4)
    }

    /// Laser-driven plaquette: as the link but `Ω_L = 0.25`, `n_max = 2`.
    pub fn plaquette_preset() -> Self {
        Self::laser_preset(0.25, 2)
    }

    fn laser_preset(rabi: f64, n_max: usize) -> Self {
        let laser = LaserParams {
            rabi,
            beat: 0.05,
            lamb_dicke: [0.2; 3],
        };
        DrivenSetup {
            gradient: 0.05,
            beta: 0.002,
            drive: DriveSpec::laser(laser, Direction::Z, 1, 0.0, 0.0)
                .expect("preset drive is valid"),
            exact: ExactModel::Laser,
            n_max,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            counter_rotating: false,
            cutoff_range: 3.0,
            weighting: FrequencyWeighting::Reference,
            initial_site: 0,
        }
    }

    fn array(&self, layout: Layout, nx: usize, ny: usize, d_y: f64) -> Result<TrapArray> {
        build_array(
            &ArrayParams::new(layout, nx, ny)
                .spacings(1.0, d_y)
                .gradient(self.gradient, self.drive.direction)
                .beta(self.beta),
        )
    }

    fn effective_options(&self) -> CouplingOptions {
        CouplingOptions {
            cutoff_range: self.cutoff_range,
            weighting: self.weighting,
        }
    }

    fn exact_drive(&self, drive: &DriveSpec) -> Result<DriveSpec> {
        match (self.exact, drive.mode()) {
            (ExactModel::Laser, DriveMode::Laser) | (ExactModel::Cosine, DriveMode::Cosine) => {
                Ok(drive.clone())
            }
            (ExactModel::Cosine, DriveMode::Laser) => {
                let d = DriveSpec::cosine(
                    drive.frequency,
                    drive.strength,
                    drive.order,
                    drive.phase_x,
                    drive.phase_y,
                )?;
                d.with_direction(drive.direction)
            }
            (ExactModel::Laser, DriveMode::Cosine) => Err(Error::Configuration(
                "the laser-exact model needs laser parameters".into(),
            )),
        }
    }

    fn exact_generator(
        &self,
        array: &TrapArray,
        drive: &DriveSpec,
        space: &FockSpace,
    ) -> Result<Box<dyn Generator>> {
        let drive = self.exact_drive(drive)?;
        let options = CouplingOptions {
            cutoff_range: self.cutoff_range,
            weighting: FrequencyWeighting::Site,
        };
        let bare = bare_coupling_matrix(array, drive.direction, &options)?;
        Ok(match self.exact {
            ExactModel::Cosine => Box::new(CosineDrivenModel::new(
                array,
                &drive,
                &bare,
                space,
                self.counter_rotating,
            )?),
            ExactModel::Laser => Box::new(LaserDrivenModel::new(
                array,
                &drive,
                &bare,
                space,
                self.counter_rotating,
            )?),
        })
    }

    fn run(
        &self,
        generator: &dyn Generator,
        space: &FockSpace,
        t_final: f64,
        samples: usize,
        model: ModelKind,
    ) -> Result<EvolutionResult> {
        let psi0 = space.single_excitation(self.initial_site)?;
        let dt = default_time_step(generator, self.steps_per_period);
        let mut result = evolve(
            generator,
            space,
            &psi0,
            &EvolveSettings {
                t_final,
                dt,
                samples,
            },
            model,
        )?;
        let p = &mut result.parameters;
        p.insert("gradient".into(), self.gradient);
        p.insert("beta".into(), self.beta);
        p.insert("drive_frequency".into(), self.drive.frequency);
        p.insert("drive_strength".into(), self.drive.strength);
        p.insert("order".into(), self.drive.order as f64);
        p.insert("n_max".into(), space.n_max() as f64);
        p.insert("steps_per_period".into(), self.steps_per_period);
        p.insert("initial_site".into(), self.initial_site as f64);
        if let Some(l) = self.drive.laser {
            p.insert("rabi".into(), l.rabi);
            p.insert("beat".into(), l.beat);
            p.insert(
                "lamb_dicke".into(),
                l.lamb_dicke[self.drive.direction.index()],
            );
        }
        Ok(result)
    }

    fn validate(&self, n_sites: usize) -> Result<()> {
        if !(self.steps_per_period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "steps per period must be positive, got {}",
                self.steps_per_period
            )));
        }
        if self.initial_site >= n_sites {
            return Err(Error::InvalidSite {
                site: self.initial_site,
                n_sites,
            });
        }
        Ok(())
    }
}

/// One phase-difference point of the link scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkPoint {
    pub phase_difference: f64,
    /// `|J_[r]|` of the effective link.
    pub coupling: f64,
    /// `π / (2|J_[r]|)`; `None` when the coupling is suppressed.
    pub t_star: Option<f64>,
    pub transfer_effective: Option<f64>,
    pub transfer_exact: Option<f64>,
    pub norm_drift_effective: Option<f64>,
    pub norm_drift_exact: Option<f64>,
}

impl LinkPoint {
    pub fn is_defined(&self) -> bool {
        self.t_star.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkScan {
    pub exact: ModelKind,
    pub points: Vec<LinkPoint>,
}

impl LinkScan {
    /// Largest `|n_2*(effective) − n_2*(exact)|` over defined points.
    pub fn max_disagreement(&self) -> f64 {
        self.points
            .iter()
            .filter_map(|p| Some((p.transfer_effective? - p.transfer_exact?).abs()))
            .fold(0.0, f64::max)
    }
}

/// Evolves the two-site link with `φ_x = Δφ` up to `t*` in both models and
/// records the population of the other site.
pub fn link_transfer_point(setup: &DrivenSetup, phase_difference: f64) -> Result<LinkPoint> {
    setup.validate(2)?;
    let array = setup.array(Layout::Link, 2, 1, 1.0)?;
    let drive = setup.drive.with_phases(phase_difference, 0.0);
    let eff = effective_coupling_matrix(&array, &drive, &setup.effective_options())?;
    let coupling = eff.get(1, 0).norm();
    let mut point = LinkPoint {
        phase_difference,
        coupling,
        t_star: None,
        transfer_effective: None,
        transfer_exact: None,
        norm_drift_effective: None,
        norm_drift_exact: None,
    };
    if coupling < UNDEFINED_COUPLING * array.base_frequency(drive.direction) {
        return Ok(point);
    }
    let t_star = FRAC_PI_2 / coupling;
    let target = 1 - setup.initial_site;
    let space = FockSpace::new(2, setup.n_max)?;

    let effective = EffectiveModel::new(&eff, &space)?;
    let r_eff = setup.run(&effective, &space, t_star, 1, ModelKind::Effective)?;
    let exact = setup.exact_generator(&array, &drive, &space)?;
    let r_exact = setup.run(exact.as_ref(), &space, t_star, 1, setup.exact.kind())?;

    point.t_star = Some(t_star);
    point.transfer_effective = Some(r_eff.final_populations()[target]);
    point.transfer_exact = Some(r_exact.final_populations()[target]);
    point.norm_drift_effective = Some(r_eff.max_norm_drift());
    point.norm_drift_exact = Some(r_exact.max_norm_drift());
    Ok(point)
}

/// [`link_transfer_point`] over a grid of phase differences.
pub fn link_transfer_scan(setup: &DrivenSetup, grid: &[f64]) -> Result<LinkScan> {
    let points = grid
        .iter()
        .map(|&p| link_transfer_point(setup, p))
        .collect::<Result<_>>()?;
    Ok(LinkScan {
        exact: setup.exact.kind(),
        points,
    })
}

/// Enclosed flux of the plaquette experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaquetteFlux {
    /// `φ_x = π`, `φ_y = 0`.
    Zero,
    /// `φ_x = π`, `φ_y = π`.
    Pi,
}

impl PlaquetteFlux {
    pub fn phases(self) -> (f64, f64) {
        match self {
            PlaquetteFlux::Zero => (PI, 0.0),
            PlaquetteFlux::Pi => (PI, PI),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaquetteParams {
    pub setup: DrivenSetup,
    pub flux: PlaquetteFlux,
    /// Spacing along `y`; `None` picks [`tuned_plaquette_spacing`].
    pub d_y: Option<f64>,
    /// Simulated duration in units of `π / |J_x|`.
    pub window: f64,
    pub samples: usize,
}

impl PlaquetteParams {
    pub fn new(setup: DrivenSetup, flux: PlaquetteFlux) -> Self {
        PlaquetteParams {
            setup,
            flux,
            d_y: None,
            window: 1.0,
            samples: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaquetteRun {
    pub effective: EvolutionResult,
    pub exact: EvolutionResult,
    pub d_y: f64,
    /// `|J_x|` and `|J_y|` of the effective plaquette bonds.
    pub coupling_x: f64,
    pub coupling_y: f64,
    /// Flux of the effective matrix around `1 → 2 → 3 → 4`.
    pub flux: f64,
    pub t_final: f64,
}

/// Spacing `d_y` (with `d_x = 1`) at which the dressed `x` bonds and the bare
/// `y` bonds of a plaquette have equal magnitude: `d_y = |ℱ_r(η_d, φ_x)|^{−1/3}`.
pub fn tuned_plaquette_spacing(drive: &DriveSpec) -> Result<f64> {
    let f = dressed_factor(drive.order, drive.strength, drive.phase_x)?.norm();
    if !(f > 0.0) {
        return Err(Error::Configuration(
            "x bonds are fully suppressed; no spacing equalises the plaquette".into(),
        ));
    }
    Ok(f.powf(-1.0 / 3.0))
}

/// Four-site plaquette with a single phonon on the initial site, evolved in
/// the effective and the exact model on a common time grid.
pub fn plaquette_experiment(params: &PlaquetteParams) -> Result<PlaquetteRun> {
    let setup = &params.setup;
    setup.validate(4)?;
    if !(params.window > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window must be positive, got {}",
            params.window
        )));
    }
    let (phase_x, phase_y) = params.flux.phases();
    let drive = setup.drive.with_phases(phase_x, phase_y);
    let d_y = match params.d_y {
        Some(d) => d,
        None => tuned_plaquette_spacing(&drive)?,
    };
    let array = setup.array(Layout::Plaquette, 2, 1, d_y)?;
    let eff = effective_coupling_matrix(&array, &drive, &setup.effective_options())?;
    let (coupling_x, coupling_y) = (eff.get(1, 0).norm(), eff.get(3, 0).norm());
    if coupling_x < UNDEFINED_COUPLING * array.base_frequency(drive.direction) {
        return Err(Error::Configuration(
            "x bonds of the plaquette are suppressed".into(),
        ));
    }
    let flux = plaquette_flux(&eff, &[0, 1, 2, 3])?;
    let t_final = params.window * PI / coupling_x;

    let space = FockSpace::new(4, setup.n_max)?;
    let effective = EffectiveModel::new(&eff, &space)?;
    let mut r_eff = setup.run(
        &effective,
        &space,
        t_final,
        params.samples,
        ModelKind::Effective,
    )?;
    let exact = setup.exact_generator(&array, &drive, &space)?;
    let mut r_exact = setup.run(
        exact.as_ref(),
        &space,
        t_final,
        params.samples,
        setup.exact.kind(),
    )?;
    for r in [&mut r_eff, &mut r_exact] {
        r.parameters.insert("phase_x".into(), phase_x);
        r.parameters.insert("phase_y".into(), phase_y);
        r.parameters.insert("d_y".into(), d_y);
    }
    Ok(PlaquetteRun {
        effective: r_eff,
        exact: r_exact,
        d_y,
        coupling_x,
        coupling_y,
        flux,
        t_final,
    })
}

/// Effective matrix of the plaquette experiment, for inspection.
pub fn plaquette_coupling_matrix(params: &PlaquetteParams) -> Result<CouplingMatrix> {
    let (phase_x, phase_y) = params.flux.phases();
    let drive = params.setup.drive.with_phases(phase_x, phase_y);
    let d_y = match params.d_y {
        Some(d) => d,
        None => tuned_plaquette_spacing(&drive)?,
    };
    let array = params.setup.array(Layout::Plaquette, 2, 1, d_y)?;
    effective_coupling_matrix(&array, &drive, &params.setup.effective_options())
}

/// Geometry of a free-form driven array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayShape {
    pub layout: Layout,
    pub nx: usize,
    pub ny: usize,
    pub d_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayRun {
    pub effective: EvolutionResult,
    pub exact: EvolutionResult,
    pub couplings: CouplingMatrix,
}

/// Any array under `setup.drive` (phases taken as given), one phonon on the
/// initial site, evolved to `t_final` in both models.
pub fn array_experiment(
    setup: &DrivenSetup,
    shape: &ArrayShape,
    t_final: f64,
    samples: usize,
) -> Result<ArrayRun> {
    let array = setup.array(shape.layout, shape.nx, shape.ny, shape.d_y)?;
    setup.validate(array.len())?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    let couplings = effective_coupling_matrix(&array, &setup.drive, &setup.effective_options())?;
    let space = FockSpace::new(array.len(), setup.n_max)?;
    let effective = EffectiveModel::new(&couplings, &space)?;
    let r_eff = setup.run(&effective, &space, t_final, samples, ModelKind::Effective)?;
    let exact = setup.exact_generator(&array, &setup.drive, &space)?;
    let r_exact = setup.run(exact.as_ref(), &space, t_final, samples, setup.exact.kind())?;
    Ok(ArrayRun {
        effective: r_eff,
        exact: r_exact,
        couplings,
    })
}
