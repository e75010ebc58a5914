//! Bare dipolar couplings, the photon-assisted dressing factor, and
//! plaquette fluxes.

mod bessel;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{Direction, DriveSpec, TrapArray};
use crate::{Error, Result};

pub use bessel::{bessel_j, bessel_j_orders, MAX_ARGUMENT};

/// How the `1/√(ω_i ω_j)` zero-point prefactor of the dipolar coupling is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyWeighting {
    /// Use each site's own trap frequency.
    #[default]
    Site,
    /// Use the base frequency for every site (`J_c = −β ω` for an axial link).
    Reference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingOptions {
    /// Couplings beyond this Chebyshev lattice distance are dropped.
    pub cutoff_range: f64,
    pub weighting: FrequencyWeighting,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        CouplingOptions {
            cutoff_range: 3.0,
            weighting: FrequencyWeighting::Site,
        }
    }
}

/// Drive parameters a dressed matrix was built with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dressing {
    pub order: u32,
    pub strength: f64,
    pub phase_x: f64,
    pub phase_y: f64,
}

/// Hermitian hopping matrix with zero diagonal; entry `(i, j)` is the
/// coefficient of `a†_i a_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<Complex64>,
    direction: Direction,
    dressing: Option<Dressing>,
}

impl CouplingMatrix {
    pub fn zeros(n: usize, direction: Direction) -> Self {
        CouplingMatrix {
            entries: DMatrix::zeros(n, n),
            direction,
            dressing: None,
        }
    }

    /// Wraps an explicit matrix; fails unless it is exactly Hermitian with zero diagonal.
    pub fn from_matrix(entries: DMatrix<Complex64>, direction: Direction) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let n = entries.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            dev = dev.max(entries[(i, i)].norm());
            for j in 0..i {
                dev = dev.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if dev != 0.0 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(CouplingMatrix {
            entries,
            direction,
            dressing: None,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Sets `(i, j)` and its Hermitian partner.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert_ne!(i, j, "coupling matrices have no diagonal");
        self.entries[(i, j)] = value;
        self.entries[(j, i)] = value.conj();
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn dressing(&self) -> Option<&Dressing> {
        self.dressing.as_ref()
    }

    /// Bonds `(i, j)` with `i > j` and a nonzero amplitude.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let n = self.n();
        (0..n)
            .flat_map(move |i| (0..i).map(move |j| (i, j, self.entries[(i, j)])))
            .filter(|(_, _, v)| *v != Complex64::new(0.0, 0.0))
    }

    /// Local gauge transformation `J_ij → e^{iθ_i} J_ij e^{−iθ_j}`.
    pub fn gauge_transform(&self, theta: &[f64]) -> Self {
        assert_eq!(theta.len(), self.n());
        let mut out = self.clone();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j {
                    out.entries[(i, j)] =
                        self.entries[(i, j)] * Complex64::from_polar(1.0, theta[i] - theta[j]);
                }
            }
        }
        // Keep exact Hermiticity after rounding.
        for i in 0..self.n() {
            for j in 0..i {
                out.entries[(j, i)] = out.entries[(i, j)].conj();
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            self.entries[(i, i)] == Complex64::new(0.0, 0.0)
                && (0..i).all(|j| self.entries[(i, j)] == self.entries[(j, i)].conj())
        })
    }
}

/// Dipolar coupling `J^α_{c;ij}` between all site pairs within the cutoff.
pub fn bare_coupling_matrix(
    array: &TrapArray,
    direction: Direction,
    options: &CouplingOptions,
) -> Result<CouplingMatrix> {
    if !(options.cutoff_range >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff range must be at least one lattice step, got {}",
            options.cutoff_range
        )));
    }
    let n = array.len();
    let w_ref = array.base_frequency(direction);
    let a = direction.index();
    let mut m = CouplingMatrix::zeros(n, direction);
    for i in 0..n {
        for j in 0..i {
            let r = array.separation(i, j);
            let d2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            if d2 == 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "sites {j} and {i} coincide"
                )));
            }
            if array.lattice_distance(i, j) as f64 > options.cutoff_range + 1e-9 {
                continue;
            }
            let prefactor = match options.weighting {
                FrequencyWeighting::Site => {
                    w_ref * w_ref
                        / (array.frequency(i, direction) * array.frequency(j, direction)).sqrt()
                }
                FrequencyWeighting::Reference => w_ref,
            };
            let geometry = (3.0 * r[a] * r[a] - d2) / (d2 * d2 * d2.sqrt());
            let value = -0.5 * array.beta() * prefactor * geometry;
            m.set(i, j, Complex64::new(value, 0.0));
        }
    }
    Ok(m)
}

/// Number of Bessel orders kept on each side of the dressing series.
pub fn series_cutoff(strength: f64) -> usize {
    25 + (3.0 * strength).ceil() as usize
}

/// `ℱ_r(η, Δφ) = Σ_s J_s(η) J_{s+r}(η) e^{i(s + r/2)Δφ}`.
pub fn dressed_factor(order: u32, strength: f64, phase_difference: f64) -> Result<Complex64> {
    if !(strength >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive strength must be non-negative, got {strength}"
        )));
    }
    let s_max = series_cutoff(strength);
    let r = order as usize;
    let positive = bessel_j_orders(s_max + r, strength)?;
    let j = |k: i64| -> f64 {
        let m = k.unsigned_abs() as usize;
        if k < 0 && m % 2 == 1 {
            -positive[m]
        } else {
            positive[m]
        }
    };
    let half_r = 0.5 * order as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for s in -(s_max as i64)..=(s_max as i64) {
        let amp = j(s) * j(s + r as i64);
        if amp != 0.0 {
            sum += Complex64::from_polar(amp, (s as f64 + half_r) * phase_difference);
        }
    }
    Ok(sum)
}

/// Photon-assisted coupling matrix for the driven direction.
///
/// Bonds that step one column up in `x` are dressed by `ℱ_r` and the phase
/// `e^{−i(r/2)(φ_i+φ_j)}`; bonds within a column keep the bare value; bonds
/// spanning two or more columns are off resonance and dropped.
pub fn effective_coupling_matrix(
    array: &TrapArray,
    drive: &DriveSpec,
    options: &CouplingOptions,
) -> Result<CouplingMatrix> {
    drive.check_resonance(array)?;
    let direction = drive.direction;
    let bare = bare_coupling_matrix(array, direction, options)?;
    let r = drive.order;
    let sign = array.gradient().signum() as i64;
    let mut m = CouplingMatrix::zeros(array.len(), direction);
    for i in 0..array.len() {
        for j in 0..i {
            let jc = bare.get(i, j);
            if jc == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (si, sj) = (array.site(i), array.site(j));
            let step = (si.coords[0] - sj.coords[0]) * sign;
            // Orient each assisted bond from the lower to the higher trap frequency.
            let (hi, lo) = match step {
                0 => {
                    m.set(i, j, jc);
                    continue;
                }
                1 => (i, j),
                -1 => (j, i),
                _ => continue,
            };
            let (phi_hi, phi_lo) = (
                drive.site_phase(array.site(hi)),
                drive.site_phase(array.site(lo)),
            );
            let f = dressed_factor(r, drive.strength, phi_hi - phi_lo)?;
            let gauge = Complex64::from_polar(1.0, -0.5 * r as f64 * (phi_hi + phi_lo));
            m.set(hi, lo, jc * f * gauge);
        }
    }
    m.dressing = Some(Dressing {
        order: r,
        strength: drive.strength,
        phase_x: drive.phase_x,
        phase_y: drive.phase_y,
    });
    Ok(m)
}

/// Gauge-invariant phase `arg Π_k J[s_k][s_{k+1}]` around a closed cycle,
/// in `(−π, π]`. The counterclockwise plaquette `[i, i+x̂, i+x̂+ŷ, i+ŷ]`
/// of a dressed matrix gives `−r φ_y`.
pub fn plaquette_flux(matrix: &CouplingMatrix, cycle: &[usize]) -> Result<f64> {
    if cycle.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a cycle needs at least 3 sites, got {}",
            cycle.len()
        )));
    }
    let n = matrix.n();
    if let Some(&s) = cycle.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidSite {
            site: s,
            n_sites: n,
        });
    }
    let mut phase = 0.0;
    for (k, &from) in cycle.iter().enumerate() {
        let to = cycle[(k + 1) % cycle.len()];
        let j = matrix.get(from, to);
        if j.norm() == 0.0 {
            return Err(Error::BrokenCycle { from, to });
        }
        phase += j.arg();
    }
    Ok(wrap_phase(phase))
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut p = phase.rem_euclid(TAU);
    if p > PI {
        p -= TAU;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_array, ArrayParams, Layout};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Integral representation of J_n, independent of the recurrence.
    fn j_oracle(n: i64, x: f64) -> f64 {
        let m = 512;
        (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    fn link(nx: usize) -> TrapArray {
        build_array(
            &ArrayParams::new(Layout::Link, nx, 1)
                .gradient(0.05, Direction::Z)
                .beta(0.002),
        )
        .unwrap()
    }

    #[test]
    fn suppressed_at_two_pi() {
        for eta in [0.1, 0.3, 0.6, 1.0, 2.0] {
            assert!(dressed_factor(1, eta, 2.0 * PI).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn zeroth_order_at_zero_phase_is_one() {
        for eta in [0.0, 0.4, 1.7, 3.0] {
            assert!((dressed_factor(0, eta, 0.0).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn first_order_at_pi() {
        let f = dressed_factor(1, 0.6, PI).unwrap().norm();
        assert!((f - 0.498).abs() < 1e-3);
        assert!((f - j_oracle(1, 1.2).abs()).abs() < 1e-13);
    }

    #[test]
    fn closed_form_on_grid() {
        for r in 0..4u32 {
            for a in 0..=20 {
                for b in 0..=20 {
                    let eta = 2.0 * a as f64 / 20.0;
                    let dphi = 2.0 * PI * b as f64 / 20.0;
                    let series = dressed_factor(r, eta, dphi).unwrap().norm();
                    let closed = j_oracle(r as i64, 2.0 * eta * (0.5 * dphi).sin()).abs();
                    assert!((series - closed).abs() < 1e-10, "r={r} η={eta} Δφ={dphi}");
                }
            }
        }
    }

    #[test]
    fn vanishing_drive_limit() {
        for r in 0..3 {
            let f = dressed_factor(r, 1e-9, 1.3).unwrap();
            let want = if r == 0 { 1.0 } else { 0.0 };
            assert!((f.norm() - want).abs() < 1e-8);
        }
    }

    #[test]
    fn first_order_map_shape() {
        // Zero on Δφ ∈ {0, 2π}; for η ≲ 0.9 the maximum over Δφ sits at π.
        for a in 1..=20 {
            let eta = 0.1 * a as f64;
            assert!(dressed_factor(1, eta, 0.0).unwrap().norm() < 1e-12);
            assert!(dressed_factor(1, eta, 2.0 * PI).unwrap().norm() < 1e-12);
            if eta <= 0.9 {
                let at_pi = dressed_factor(1, eta, PI).unwrap().norm();
                for b in 0..=64 {
                    let dphi = 2.0 * PI * b as f64 / 64.0;
                    assert!(dressed_factor(1, eta, dphi).unwrap().norm() <= at_pi + 1e-15);
                }
            }
        }
    }

    #[test]
    fn negative_strength_rejected() {
        assert!(dressed_factor(1, -0.1, 0.0).is_err());
        assert!(matches!(
            dressed_factor(1, 60.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bare_link_couplings() {
        let flat = build_array(&ArrayParams::new(Layout::Link, 2, 1).beta(0.002)).unwrap();
        let opts = CouplingOptions::default();
        let jx = bare_coupling_matrix(&flat, Direction::X, &opts).unwrap();
        assert!((jx.get(1, 0).re + 0.002).abs() < 1e-18);
        let jz = bare_coupling_matrix(&flat, Direction::Z, &opts).unwrap();
        assert!((jz.get(1, 0).re - 0.001).abs() < 1e-18);
        assert!(jx.is_hermitian() && jz.is_hermitian());

        let far = build_array(
            &ArrayParams::new(Layout::Link, 2, 1)
                .spacings(2.0, 1.0)
                .beta(0.002),
        )
        .unwrap();
        let jf = bare_coupling_matrix(&far, Direction::X, &opts).unwrap();
        assert!((jf.get(1, 0).re * 8.0 - jx.get(1, 0).re).abs() < 1e-18);
    }

    #[test]
    fn bare_frequency_weighting() {
        let a = link(2);
        let site = bare_coupling_matrix(&a, Direction::Z, &CouplingOptions::default()).unwrap();
        let reference = bare_coupling_matrix(
            &a,
            Direction::Z,
            &CouplingOptions {
                weighting: FrequencyWeighting::Reference,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((reference.get(0, 1).re - 0.001).abs() < 1e-18);
        assert!((site.get(0, 1).re - 0.001 / 1.05f64.sqrt()).abs() < 1e-17);
    }

    #[test]
    fn cutoff_and_validation() {
        let a = link(6);
        let m = bare_coupling_matrix(&a, Direction::Z, &CouplingOptions::default()).unwrap();
        assert_ne!(m.get(3, 0).re, 0.0);
        assert_eq!(m.get(4, 0).re, 0.0);
        assert!(bare_coupling_matrix(
            &a,
            Direction::Z,
            &CouplingOptions {
                cutoff_range: 0.5,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn from_matrix_rejects_non_hermitian() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 1.0);
        m[(1, 0)] = c(1.0, 1.0);
        assert!(matches!(
            CouplingMatrix::from_matrix(m.clone(), Direction::Z),
            Err(Error::NotHermitian(_))
        ));
        m[(1, 0)] = c(1.0, -1.0);
        assert!(CouplingMatrix::from_matrix(m.clone(), Direction::Z).is_ok());
        m[(0, 0)] = c(0.1, 0.0);
        assert!(CouplingMatrix::from_matrix(m, Direction::Z).is_err());
    }

    #[test]
    fn undriven_x_bonds_vanish() {
        let a = build_array(
            &ArrayParams::new(Layout::Square, 3, 3)
                .gradient(0.05, Direction::Z)
                .beta(0.002),
        )
        .unwrap();
        let bare = bare_coupling_matrix(&a, Direction::Z, &CouplingOptions::default()).unwrap();
        let d = DriveSpec::cosine(0.05, 0.0, 1, 0.4, 0.9).unwrap();
        let m = effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                let same_column = a.site(i).coords[0] == a.site(j).coords[0];
                if same_column {
                    assert_eq!(m.get(i, j), bare.get(i, j));
                } else {
                    assert_eq!(m.get(i, j).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn effective_requires_resonance_and_gradient() {
        let a = link(2);
        let off = DriveSpec::cosine(0.03, 0.6, 1, PI, 0.0).unwrap();
        assert!(matches!(
            effective_coupling_matrix(&a, &off, &CouplingOptions::default()),
            Err(Error::Configuration(_))
        ));
        let flat = build_array(&ArrayParams::new(Layout::Link, 2, 1).beta(0.002)).unwrap();
        let d = DriveSpec::cosine(0.05, 0.6, 1, PI, 0.0).unwrap();
        assert!(effective_coupling_matrix(&flat, &d, &CouplingOptions::default()).is_err());
    }

    #[test]
    fn effective_link_value() {
        let a = link(2);
        let d = DriveSpec::cosine(0.05, 0.6, 1, 0.8, 0.0).unwrap();
        let opts = CouplingOptions {
            weighting: FrequencyWeighting::Reference,
            ..Default::default()
        };
        let m = effective_coupling_matrix(&a, &d, &opts).unwrap();
        let want =
            0.001 * dressed_factor(1, 0.6, 0.8).unwrap() * Complex64::from_polar(1.0, -0.5 * 0.8);
        assert!((m.get(1, 0) - want).norm() < 1e-18);
        assert!(m.is_hermitian());
        assert_eq!(m.dressing().unwrap().order, 1);
    }

    #[test]
    fn beyond_nearest_column_dropped() {
        let a = link(4);
        let d = DriveSpec::cosine(0.05, 0.6, 1, PI, 0.0).unwrap();
        let m = effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap();
        assert_ne!(m.get(1, 0).norm(), 0.0);
        assert_eq!(m.get(2, 0).norm(), 0.0);
        assert_eq!(m.get(3, 0).norm(), 0.0);
    }

    fn square(n: usize) -> TrapArray {
        build_array(
            &ArrayParams::new(Layout::Square, n, n)
                .gradient(0.05, Direction::Z)
                .beta(0.002),
        )
        .unwrap()
    }

    fn ccw_plaquettes(n: usize) -> Vec<Vec<usize>> {
        let idx = |x: usize, y: usize| y * n + x;
        let mut out = Vec::new();
        for y in 0..n - 1 {
            for x in 0..n - 1 {
                out.push(vec![
                    idx(x, y),
                    idx(x + 1, y),
                    idx(x + 1, y + 1),
                    idx(x, y + 1),
                ]);
            }
        }
        out
    }

    #[test]
    fn diagonal_bonds_vanish_for_complementary_phases() {
        let a = square(3);
        let phi_y = 1.1;
        let d = DriveSpec::cosine(0.05, 0.6, 1, 2.0 * PI - phi_y, phi_y).unwrap();
        let m = effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap();
        // (0,0) -> (1,1): Δφ = φ_x + φ_y = 2π
        assert!(m.get(4, 0).norm() < 1e-12 * m.get(1, 0).norm());
        assert!(m.get(8, 4).norm() < 1e-12 * m.get(1, 0).norm());
    }

    #[test]
    fn pi_flux_square_lattice() {
        let a = square(4);
        let d = DriveSpec::cosine(0.05, 0.6, 1, 0.3, PI).unwrap();
        let m = effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap();
        for cyc in ccw_plaquettes(4) {
            let f = plaquette_flux(&m, &cyc).unwrap();
            assert!((f.abs() - PI).abs() < 1e-12, "{f}");
        }
    }

    #[test]
    fn plaquette_flux_is_minus_r_phi_y() {
        for r in 1..=2u32 {
            let a = build_array(
                &ArrayParams::new(Layout::Square, 3, 3)
                    .gradient(0.05 * r as f64, Direction::Z)
                    .beta(0.002),
            )
            .unwrap();
            let d = DriveSpec::cosine(0.05, 0.6, r, 0.5, 0.7).unwrap();
            let m = effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap();
            for cyc in ccw_plaquettes(3) {
                let f = plaquette_flux(&m, &cyc).unwrap();
                assert!((f - wrap_phase(-(r as f64) * 0.7)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flux_of_real_positive_couplings_is_zero() {
        let mut m = CouplingMatrix::zeros(3, Direction::Z);
        m.set(1, 0, c(1.0, 0.0));
        m.set(2, 1, c(0.5, 0.0));
        m.set(0, 2, c(2.0, 0.0));
        assert_eq!(plaquette_flux(&m, &[0, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn broken_cycle_and_bad_input() {
        let mut m = CouplingMatrix::zeros(4, Direction::Z);
        m.set(1, 0, c(1.0, 0.0));
        m.set(2, 1, c(1.0, 0.0));
        assert!(matches!(
            plaquette_flux(&m, &[0, 1, 2]),
            Err(Error::BrokenCycle { from: 2, to: 0 })
        ));
        assert!(plaquette_flux(&m, &[0, 1]).is_err());
        assert!(plaquette_flux(&m, &[0, 1, 7]).is_err());
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn gauge_invariance_of_flux(theta in proptest::collection::vec(-10.0f64..10.0, 16),
                                    phi_x in -PI..PI, phi_y in -PI..PI, eta in 0.0f64..2.0) {
            let a = square(4);
            let d = DriveSpec::cosine(0.05, eta, 1, phi_x, phi_y).unwrap();
            let m = effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap();
            let g = m.gauge_transform(&theta);
            prop_assert!(g.is_hermitian());
            for cyc in ccw_plaquettes(4) {
                let (f0, f1) = match (plaquette_flux(&m, &cyc), plaquette_flux(&g, &cyc)) {
                    (Ok(f0), Ok(f1)) => (f0, f1),
                    _ => continue,
                };
                let diff = wrap_phase(f0 - f1);
                prop_assert!(diff.abs() < 1e-10);
            }
        }

        #[test]
        fn effective_matrices_are_hermitian(phi_x in -7.0f64..7.0, phi_y in -7.0f64..7.0, eta in 0.0f64..3.0) {
            let a = square(3);
            let d = DriveSpec::cosine(0.05, eta, 1, phi_x, phi_y).unwrap();
            prop_assert!(effective_coupling_matrix(&a, &d, &CouplingOptions::default()).unwrap().is_hermitian());
        }
    }
}
