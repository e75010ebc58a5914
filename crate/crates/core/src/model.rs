//! Microtrap array geometry and periodic driving.
//!
//! Sites carry integer lattice coordinates `(i_x, i_y)` and an ideal
//! equilibrium position `(i_x d_x, i_y d_y, 0)`. Trap frequencies are stored
//! per site and per direction; the graded direction carries a linear gradient
//! `ω + Δω·i_x`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coulomb strengths above this are flagged by [`TrapArray::validity_warnings`].
pub const WEAK_COUPLING_LIMIT: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
    Z,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::X, Direction::Y, Direction::Z];

    pub fn index(self) -> usize {
        match self {
            Direction::X => 0,
            Direction::Y => 1,
            Direction::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::X => "x",
            Direction::Y => "y",
            Direction::Z => "z",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// A chain along `x`; two sites form the elementary link.
    Link,
    /// Four sites ordered around one square plaquette.
    Plaquette,
    /// Three-leg rhombic ladder with plaquettes arranged along a diagonal.
    RhombicLadder,
    /// Rectangular `nx × ny` patch of the square lattice.
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    /// Integer lattice coordinates `(i_x, i_y)`.
    pub coords: [i64; 2],
    /// Equilibrium position in units of the reference spacing.
    pub position: [f64; 3],
}

/// Input to [`build_array`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayParams {
    pub layout: Layout,
    /// Columns along `x` (link, square) or unit cells (rhombic ladder).
    pub nx: usize,
    /// Rows along `y` (square only).
    pub ny: usize,
    pub d_x: f64,
    pub d_y: f64,
    /// Base trap frequency per direction `x, y, z`.
    pub base_frequencies: [f64; 3],
    /// Frequency step per unit `i_x`, applied to `graded`.
    pub gradient: f64,
    pub graded: Direction,
    /// Dimensionless Coulomb strength `e²/(M ω² d_x³)`.
    pub beta: f64,
}

impl ArrayParams {
    /// Parameters with a gradient on `z`, unit base frequencies and unit spacings.
    pub fn new(layout: Layout, nx: usize, ny: usize) -> Self {
        ArrayParams {
            layout,
            nx,
            ny,
            d_x: 1.0,
            d_y: 1.0,
            base_frequencies: [1.0; 3],
            gradient: 0.0,
            graded: Direction::Z,
            beta: 0.0,
        }
    }

    pub fn spacings(mut self, d_x: f64, d_y: f64) -> Self {
        self.d_x = d_x;
        self.d_y = d_y;
        self
    }

    pub fn gradient(mut self, gradient: f64, graded: Direction) -> Self {
        self.gradient = gradient;
        self.graded = graded;
        self
    }

    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn base_frequencies(mut self, base: [f64; 3]) -> Self {
        self.base_frequencies = base;
        self
    }
}

/// An immutable microtrap array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapArray {
    layout: Layout,
    sites: Vec<Site>,
    frequencies: Vec<[f64; 3]>,
    d_x: f64,
    d_y: f64,
    base_frequencies: [f64; 3],
    gradient: f64,
    graded: Direction,
    beta: f64,
}

/// Builds the site list and per-site trap frequencies for a layout.
pub fn build_array(params: &ArrayParams) -> Result<TrapArray> {
    let ArrayParams {
        layout,
        nx,
        ny,
        d_x,
        d_y,
        ..
    } = *params;
    if !(d_x > 0.0 && d_x.is_finite()) || !(d_y > 0.0 && d_y.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "spacings must be positive, got d_x = {d_x}, d_y = {d_y}"
        )));
    }
    if let Some(w) = params.base_frequencies.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::InvalidGeometry(format!(
            "trap frequency must be positive, got {w}"
        )));
    }
    if !(params.beta >= 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "beta must be non-negative, got {}",
            params.beta
        )));
    }

    let coords: Vec<[i64; 2]> = match layout {
        Layout::Link => {
            if nx == 0 {
                return Err(Error::InvalidGeometry(
                    "link needs at least one site".into(),
                ));
            }
            (0..nx as i64).map(|i| [i, 0]).collect()
        }
        // Ordered around the cycle 1 → 2 → 3 → 4.
        Layout::Plaquette => vec![[0, 0], [1, 0], [1, 1], [0, 1]],
        Layout::Square => {
            if nx == 0 || ny == 0 {
                return Err(Error::InvalidGeometry(format!(
                    "square lattice needs positive dimensions, got {nx} x {ny}"
                )));
            }
            let mut c = Vec::with_capacity(nx * ny);
            for iy in 0..ny as i64 {
                for ix in 0..nx as i64 {
                    c.push([ix, iy]);
                }
            }
            c
        }
        Layout::RhombicLadder => {
            if nx == 0 {
                return Err(Error::InvalidGeometry(
                    "rhombic ladder needs at least one cell".into(),
                ));
            }
            // Cell j: a_j = (j, j+1), b_j = (j, j), c_j = (j+1, j); closing hub b_p.
            let mut c = Vec::with_capacity(3 * nx + 1);
            for j in 0..nx as i64 {
                c.push([j, j + 1]);
                c.push([j, j]);
                c.push([j + 1, j]);
            }
            c.push([nx as i64, nx as i64]);
            c
        }
    };

    let sites: Vec<Site> = coords
        .iter()
        .map(|&[ix, iy]| Site {
            coords: [ix, iy],
            position: [ix as f64 * d_x, iy as f64 * d_y, 0.0],
        })
        .collect();

    let g = params.graded.index();
    let frequencies: Vec<[f64; 3]> = sites
        .iter()
        .map(|s| {
            let mut w = params.base_frequencies;
            w[g] += params.gradient * s.coords[0] as f64;
            w
        })
        .collect();
    if let Some((i, w)) = frequencies
        .iter()
        .enumerate()
        .find(|(_, w)| w.iter().any(|x| !(*x > 0.0)))
    {
        return Err(Error::InvalidGeometry(format!(
            "site {i} has a non-positive trap frequency {w:?}"
        )));
    }

    Ok(TrapArray {
        layout,
        sites,
        frequencies,
        d_x,
        d_y,
        base_frequencies: params.base_frequencies,
        gradient: params.gradient,
        graded: params.graded,
        beta: params.beta,
    })
}

impl TrapArray {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &Site {
        &self.sites[i]
    }

    pub fn frequency(&self, site: usize, direction: Direction) -> f64 {
        self.frequencies[site][direction.index()]
    }

    pub fn frequencies(&self, direction: Direction) -> Vec<f64> {
        self.frequencies
            .iter()
            .map(|w| w[direction.index()])
            .collect()
    }

    pub fn base_frequency(&self, direction: Direction) -> f64 {
        self.base_frequencies[direction.index()]
    }

    pub fn spacings(&self) -> (f64, f64) {
        (self.d_x, self.d_y)
    }

    pub fn gradient(&self) -> f64 {
        self.gradient
    }

    pub fn graded_direction(&self) -> Direction {
        self.graded
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Separation vector `r⁰_i − r⁰_j`.
    pub fn separation(&self, i: usize, j: usize) -> [f64; 3] {
        let (a, b) = (self.sites[i].position, self.sites[j].position);
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    /// Chebyshev distance in lattice steps.
    pub fn lattice_distance(&self, i: usize, j: usize) -> i64 {
        let (a, b) = (self.sites[i].coords, self.sites[j].coords);
        (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
    }

    /// Human-readable notes on parameters outside the regime where the
    /// harmonic, number-conserving description is trustworthy.
    pub fn validity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.beta > WEAK_COUPLING_LIMIT {
            out.push(format!(
                "beta = {} is not small; rotating-wave treatment of the Coulomb coupling is questionable",
                self.beta
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveMode {
    Cosine,
    Laser,
}

/// Raman laser parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    /// Rabi frequency `Ω_L`.
    pub rabi: f64,
    /// Beat-note detuning `ω_L`.
    pub beat: f64,
    /// Lamb-Dicke parameter per direction `x, y, z`.
    pub lamb_dicke: [f64; 3],
}

/// Periodic modulation `η_d ω_d cos(ω_d τ + φ_i)` of the trap frequencies,
/// optionally realised by a Raman laser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub frequency: f64,
    pub strength: f64,
    pub order: u32,
    pub phase_x: f64,
    pub phase_y: f64,
    /// Simulated (driven) direction.
    pub direction: Direction,
    pub laser: Option<LaserParams>,
}

impl DriveSpec {
    pub fn cosine(
        frequency: f64,
        strength: f64,
        order: u32,
        phase_x: f64,
        phase_y: f64,
    ) -> Result<Self> {
        let d = DriveSpec {
            frequency,
            strength,
            order,
            phase_x,
            phase_y,
            direction: Direction::Z,
            laser: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// Laser drive; `ω_d = ω_L` and `η_d ω_d = Ω_L η²` with `η` the
    /// Lamb-Dicke parameter of `direction`.
    pub fn laser(
        laser: LaserParams,
        direction: Direction,
        order: u32,
        phase_x: f64,
        phase_y: f64,
    ) -> Result<Self> {
        if !(laser.beat > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "laser beat frequency must be positive, got {}",
                laser.beat
            )));
        }
        let eta = laser.lamb_dicke[direction.index()];
        let d = DriveSpec {
            frequency: laser.beat,
            strength: laser.rabi * eta * eta / laser.beat,
            order,
            phase_x,
            phase_y,
            direction,
            laser: Some(laser),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn mode(&self) -> DriveMode {
        if self.laser.is_some() {
            DriveMode::Laser
        } else {
            DriveMode::Cosine
        }
    }

    pub fn with_phases(&self, phase_x: f64, phase_y: f64) -> Self {
        DriveSpec {
            phase_x,
            phase_y,
            ..self.clone()
        }
    }

    pub fn with_direction(&self, direction: Direction) -> Result<Self> {
        match self.laser {
            Some(l) => DriveSpec::laser(l, direction, self.order, self.phase_x, self.phase_y),
            None => Ok(DriveSpec {
                direction,
                ..self.clone()
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParameter(
                "resonance order must be a positive integer".into(),
            ));
        }
        if !(self.frequency > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "drive frequency must be positive, got {}",
                self.frequency
            )));
        }
        if !(self.strength >= 0.0) || !self.strength.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drive strength must be non-negative, got {}",
                self.strength
            )));
        }
        if let Some(l) = &self.laser {
            if !(l.rabi >= 0.0) || l.lamb_dicke.iter().any(|e| !(*e >= 0.0)) {
                return Err(Error::InvalidParameter(
                    "Rabi frequency and Lamb-Dicke parameters must be non-negative".into(),
                ));
            }
            let eta = l.lamb_dicke[self.direction.index()];
            let lhs = self.strength * self.frequency;
            let rhs = l.rabi * eta * eta;
            if (self.frequency - l.beat).abs() > 1e-12 * l.beat
                || (lhs - rhs).abs() > 1e-12 * rhs.max(1e-300)
            {
                return Err(Error::InvalidParameter(
                    "laser identifications ω_d = ω_L and η_d ω_d = Ω_L η² do not hold".into(),
                ));
            }
        }
        Ok(())
    }

    /// Site phase `φ_i = φ_x i_x + φ_y i_y`.
    pub fn site_phase(&self, site: &Site) -> f64 {
        self.phase_x * site.coords[0] as f64 + self.phase_y * site.coords[1] as f64
    }

    /// Optical phase `Δk·r⁰_i = −φ_i`.
    pub fn laser_phase(&self, site: &Site) -> f64 {
        -self.site_phase(site)
    }

    /// Checks `r ω_d = Δω` against the array's gradient.
    pub fn check_resonance(&self, array: &TrapArray) -> Result<()> {
        let dw = array.gradient();
        if dw == 0.0 {
            return Err(Error::Configuration(
                "photon-assisted tunneling needs a frequency gradient along x".into(),
            ));
        }
        if array.graded_direction() != self.direction {
            return Err(Error::Configuration(format!(
                "gradient is on {} but the drive acts on {}",
                array.graded_direction().name(),
                self.direction.name()
            )));
        }
        let detuning = self.order as f64 * self.frequency - dw.abs();
        if detuning.abs() > 1e-9 * dw.abs() {
            return Err(Error::Configuration(format!(
                "drive is off resonance: r ω_d = {} but Δω = {}",
                self.order as f64 * self.frequency,
                dw
            )));
        }
        Ok(())
    }
}
