use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonians::Generator;
use crate::fock::FockSpace;
use crate::{Error, Result};

/// Integration aborts once `|‖ψ‖² − 1|` exceeds this.
pub const NORM_ABORT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Effective,
    CosineExact,
    LaserExact,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Effective => "effective",
            ModelKind::CosineExact => "cosine_exact",
            ModelKind::LaserExact => "laser_exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveSettings {
    pub t_final: f64,
    /// Largest allowed step; the actual step divides `t_final` evenly.
    pub dt: f64,
    /// Number of output intervals; `samples + 1` records including `t = 0`.
    pub samples: usize,
}

/// Site populations and norm on the output grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub model: ModelKind,
    pub times: Vec<f64>,
    /// `populations[k][i] = ⟨a†_i a_i⟩` at `times[k]`.
    pub populations: Vec<Vec<f64>>,
    /// `‖ψ‖²` at `times[k]`.
    pub norms: Vec<f64>,
    /// Step actually used.
    pub dt: f64,
    pub parameters: BTreeMap<String, f64>,
}

impl EvolutionResult {
    pub fn n_sites(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    pub fn site_series(&self, site: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[site]).collect()
    }

    pub fn total_population(&self) -> Vec<f64> {
        self.populations.iter().map(|p| p.iter().sum()).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norms
            .iter()
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().map_or(&[], Vec::as_slice)
    }

    /// Largest pointwise population difference to another run on the same grid.
    pub fn max_population_difference(&self, other: &EvolutionResult) -> f64 {
        self.populations
            .iter()
            .zip(&other.populations)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum()
}

/// Integrates `i dψ/dt = H(t) ψ` with the classical fourth-order Runge-Kutta
/// scheme at a fixed step.
pub fn evolve<G: Generator + ?Sized>(
    generator: &G,
    space: &FockSpace,
    psi0: &[Complex64],
    settings: &EvolveSettings,
    model: ModelKind,
) -> Result<EvolutionResult> {
    let dim = generator.dim();
    if dim != space.dim() || psi0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi0.len().min(space.dim()),
        });
    }
    let EvolveSettings {
        t_final,
        dt,
        samples,
    } = *settings;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "final time must be finite and non-negative, got {t_final}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "at least one output interval is required".into(),
        ));
    }
    let n0 = norm_sqr(psi0);
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "initial state is not normalised (‖ψ‖² = {n0})"
        )));
    }

    let per_sample = if t_final == 0.0 {
        1
    } else {
        ((t_final / samples as f64) / dt).ceil().max(1.0) as usize
    };
    let steps = per_sample * samples;
    let h = t_final / steps as f64;

    let mut psi = psi0.to_vec();
    let mut times = Vec::with_capacity(samples + 1);
    let mut populations = Vec::with_capacity(samples + 1);
    let mut norms = Vec::with_capacity(samples + 1);
    times.push(0.0);
    populations.push(space.populations(&psi));
    norms.push(n0);

    let zero = Complex64::new(0.0, 0.0);
    let mut k = [
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
    ];
    let mut stage = vec![zero; dim];
    let minus_i = Complex64::new(0.0, -1.0);

    for step in 0..steps {
        let t = step as f64 * h;
        generator.apply(t, &psi, &mut k[0]);
        for (s, (p, k1)) in stage.iter_mut().zip(psi.iter().zip(&k[0])) {
            *s = p + minus_i * k1 * (0.5 * h);
        }
        generator.apply(t + 0.5 * h, &stage, &mut k[1]);
        for (s, (p, k2)) in stage.iter_mut().zip(psi.iter().zip(&k[1])) {
            *s = p + minus_i * k2 * (0.5 * h);
        }
        generator.apply(t + 0.5 * h, &stage, &mut k[2]);
        for (s, (p, k3)) in stage.iter_mut().zip(psi.iter().zip(&k[2])) {
            *s = p + minus_i * k3 * h;
        }
        generator.apply(t + h, &stage, &mut k[3]);
        let w = minus_i * (h / 6.0);
        for (idx, p) in psi.iter_mut().enumerate() {
            *p += w * (k[0][idx] + 2.0 * k[1][idx] + 2.0 * k[2][idx] + k[3][idx]);
        }

        let norm = norm_sqr(&psi);
        let time = (step + 1) as f64 * h;
        if !((norm - 1.0).abs() <= NORM_ABORT) {
            return Err(Error::IntegrationFailure {
                dt: h,
                time,
                drift: (norm - 1.0).abs(),
            });
        }
        if (step + 1) % per_sample == 0 {
            times.push(time);
            populations.push(space.populations(&psi));
            norms.push(norm);
        }
    }

    Ok(EvolutionResult {
        model,
        times,
        populations,
        norms,
        dt: h,
        parameters: BTreeMap::new(),
    })
}
