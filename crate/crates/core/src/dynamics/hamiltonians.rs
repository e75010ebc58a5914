use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::couplings::CouplingMatrix;
use crate::fock::{local_displacement, FockSpace};
use crate::model::{DriveMode, DriveSpec, TrapArray};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A time-dependent Hamiltonian that can act on a state vector.
pub trait Generator: Sync {
    fn dim(&self) -> usize;

    /// Writes `H(t) psi` into `out`.
    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]);

    /// Largest angular frequency scale present: oscillation frequencies of
    /// the time dependence or the operator norm, whichever is larger.
    fn max_frequency(&self) -> f64;
}

/// Adapts a closure `t -> H(t)` returning dense matrices.
pub struct DenseGenerator<F> {
    hamiltonian_at: F,
    dim: usize,
    max_frequency: f64,
}

impl<F: Fn(f64) -> DMatrix<Complex64> + Sync> DenseGenerator<F> {
    pub fn new(dim: usize, max_frequency: f64, hamiltonian_at: F) -> Self {
        DenseGenerator {
            hamiltonian_at,
            dim,
            max_frequency,
        }
    }
}

impl<F: Fn(f64) -> DMatrix<Complex64> + Sync> Generator for DenseGenerator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let h = (self.hamiltonian_at)(t);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..self.dim).map(|j| h[(i, j)] * psi[j]).sum();
        }
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TermKind {
    /// `a†_i a_j`
    Hop,
    /// `a_i a_j`
    Annihilate,
    /// `a†_i a†_j`
    Create,
}

#[derive(Clone, Copy, Debug)]
struct Term {
    i: usize,
    j: usize,
    kind: TermKind,
    amplitude: Complex64,
}

#[derive(Clone, Copy, Debug)]
struct Transition {
    row: u32,
    col: u32,
    factor: f64,
}

/// Fock-space action of the two-site terms of a coupling matrix.
#[derive(Clone, Debug)]
struct HoppingTable {
    terms: Vec<Term>,
    /// Transitions of term `t` are `transitions[offsets[t]..offsets[t + 1]]`.
    offsets: Vec<usize>,
    transitions: Vec<Transition>,
}

impl HoppingTable {
    fn new(matrix: &CouplingMatrix, space: &FockSpace, counter_rotating: bool) -> Self {
        let n = matrix.n();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = matrix.get(i, j);
                if v != ZERO {
                    terms.push(Term {
                        i,
                        j,
                        kind: TermKind::Hop,
                        amplitude: v,
                    });
                }
            }
        }
        if counter_rotating {
            for i in 0..n {
                for j in 0..i {
                    let v = matrix.get(i, j);
                    if v != ZERO {
                        terms.push(Term {
                            i,
                            j,
                            kind: TermKind::Annihilate,
                            amplitude: v,
                        });
                        terms.push(Term {
                            i,
                            j,
                            kind: TermKind::Create,
                            amplitude: v.conj(),
                        });
                    }
                }
            }
        }

        let n_max = space.n_max();
        let mut transitions = Vec::new();
        let mut offsets = vec![0];
        for term in &terms {
            let (si, sj) = (space.stride(term.i), space.stride(term.j));
            for col in 0..space.dim() {
                let (ni, nj) = (space.occupation(col, term.i), space.occupation(col, term.j));
                let (row, factor) = match term.kind {
                    TermKind::Hop if nj > 0 && ni < n_max => {
                        (col - sj + si, ((nj * (ni + 1)) as f64).sqrt())
                    }
                    TermKind::Annihilate if ni > 0 && nj > 0 => {
                        (col - si - sj, ((ni * nj) as f64).sqrt())
                    }
                    TermKind::Create if ni < n_max && nj < n_max => {
                        (col + si + sj, (((ni + 1) * (nj + 1)) as f64).sqrt())
                    }
                    _ => continue,
                };
                transitions.push(Transition {
                    row: row as u32,
                    col: col as u32,
                    factor,
                });
            }
            offsets.push(transitions.len());
        }
        HoppingTable {
            terms,
            offsets,
            transitions,
        }
    }

    /// Coefficients in a frame rotating with site phases `theta`.
    fn coefficients(&self, theta: Option<&[f64]>, out: &mut Vec<Complex64>) {
        out.clear();
        out.extend(self.terms.iter().map(|t| match theta {
            None => t.amplitude,
            Some(th) => {
                let phase = match t.kind {
                    TermKind::Hop => th[t.i] - th[t.j],
                    TermKind::Annihilate => -(th[t.i] + th[t.j]),
                    TermKind::Create => th[t.i] + th[t.j],
                };
                t.amplitude * Complex64::from_polar(1.0, phase)
            }
        }));
    }

    fn by_term(&self) -> impl Iterator<Item = (usize, &[Transition])> + '_ {
        self.offsets
            .windows(2)
            .enumerate()
            .map(|(t, w)| (t, &self.transitions[w[0]..w[1]]))
    }

    fn accumulate(&self, coefficients: &[Complex64], psi: &[Complex64], out: &mut [Complex64]) {
        for (t, transitions) in self.by_term() {
            let c = coefficients[t];
            for tr in transitions {
                out[tr.row as usize] += c * (tr.factor * psi[tr.col as usize]);
            }
        }
    }

    fn add_dense(&self, coefficients: &[Complex64], out: &mut DMatrix<Complex64>) {
        for (t, transitions) in self.by_term() {
            for tr in transitions {
                out[(tr.row as usize, tr.col as usize)] += coefficients[t] * tr.factor;
            }
        }
    }

    /// Maximum absolute row sum, an upper bound on the operator norm.
    fn row_sum_bound(&self, dim: usize) -> f64 {
        let mut rows = vec![0.0; dim];
        for (t, transitions) in self.by_term() {
            let a = self.terms[t].amplitude.norm();
            for tr in transitions {
                rows[tr.row as usize] += a * tr.factor;
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Largest `|θ̇|`-type frequency for terms with per-site frame frequencies.
    fn max_term_frequency(&self, rates: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| match t.kind {
                TermKind::Hop => (rates[t.i] - rates[t.j]).abs(),
                _ => rates[t.i] + rates[t.j],
            })
            .fold(0.0, f64::max)
    }
}

fn check_space(matrix: &CouplingMatrix, space: &FockSpace) -> Result<()> {
    if matrix.n() != space.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: space.n_sites(),
            found: matrix.n(),
        });
    }
    Ok(())
}

fn check_dense(space: &FockSpace) -> Result<()> {
    if space.dim() > crate::fock::DENSE_CAPACITY {
        return Err(Error::Capacity {
            dim: space.dim(),
            limit: crate::fock::DENSE_CAPACITY,
        });
    }
    Ok(())
}

/// Number-conserving tight-binding Hamiltonian `Σ_{i>j} (J_ij a†_i a_j + h.c.)`
/// in the rotating frame.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    dim: usize,
    table: HoppingTable,
    coefficients: Vec<Complex64>,
    norm_bound: f64,
}

impl EffectiveModel {
    pub fn new(matrix: &CouplingMatrix, space: &FockSpace) -> Result<Self> {
        check_space(matrix, space)?;
        let table = HoppingTable::new(matrix, space, false);
        let mut coefficients = Vec::new();
        table.coefficients(None, &mut coefficients);
        let norm_bound = table.row_sum_bound(space.dim());
        Ok(EffectiveModel {
            dim: space.dim(),
            table,
            coefficients,
            norm_bound,
        })
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        self.table.add_dense(&self.coefficients, &mut h);
        h
    }
}

impl Generator for EffectiveModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, _t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        self.table.accumulate(&self.coefficients, psi, out);
    }

    fn max_frequency(&self) -> f64 {
        self.norm_bound
    }
}

/// Dense effective Hamiltonian on the truncated space.
pub fn effective_hamiltonian(
    matrix: &CouplingMatrix,
    space: &FockSpace,
) -> Result<DMatrix<Complex64>> {
    check_dense(space)?;
    Ok(EffectiveModel::new(matrix, space)?.matrix())
}

fn diagonal_number_term(space: &FockSpace, onsite: &[f64], h: &mut DMatrix<Complex64>) {
    for b in 0..space.dim() {
        let e: f64 = onsite
            .iter()
            .enumerate()
            .map(|(s, w)| w * space.occupation(b, s) as f64)
            .sum();
        h[(b, b)] += Complex64::new(e, 0.0);
    }
}

/// Lab-frame trap Hamiltonian with cosine-modulated trap frequencies and
/// bare dipolar hopping.
///
/// As a [`Generator`] it acts in the interaction picture with respect to
/// the full diagonal part, where the hopping acquires the phases
/// `θ_i(t) − θ_j(t)`, `θ_i(t) = ω_i t + η_d (sin(ω_d t + φ_i) − sin φ_i)`.
/// Populations are identical in both frames.
#[derive(Clone, Debug)]
pub struct CosineDrivenModel {
    space: FockSpace,
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    drive: DriveSpec,
    table: HoppingTable,
    max_frequency: f64,
}

impl CosineDrivenModel {
    pub fn new(
        array: &TrapArray,
        drive: &DriveSpec,
        bare: &CouplingMatrix,
        space: &FockSpace,
        counter_rotating: bool,
    ) -> Result<Self> {
        if drive.mode() != DriveMode::Cosine {
            return Err(Error::Configuration(
                "cosine-driven model needs a cosine drive".into(),
            ));
        }
        check_space(bare, space)?;
        if array.len() != space.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: space.n_sites(),
                found: array.len(),
            });
        }
        let frequencies = array.frequencies(drive.direction);
        let phases = array.sites().iter().map(|s| drive.site_phase(s)).collect();
        let table = HoppingTable::new(bare, space, counter_rotating);
        let modulation = 2.0 * drive.strength * drive.frequency;
        let max_frequency = (table.max_term_frequency(&frequencies) + modulation)
            .max(drive.frequency)
            .max(table.row_sum_bound(space.dim()));
        Ok(CosineDrivenModel {
            space: space.clone(),
            frequencies,
            phases,
            drive: drive.clone(),
            table,
            max_frequency,
        })
    }

    fn frame_phases(&self, t: f64) -> Vec<f64> {
        let (wd, eta) = (self.drive.frequency, self.drive.strength);
        self.frequencies
            .iter()
            .zip(&self.phases)
            .map(|(w, p)| w * t + eta * ((wd * t + p).sin() - p.sin()))
            .collect()
    }

    /// Lab-frame `H(τ)`.
    pub fn matrix_at(&self, tau: f64) -> Result<DMatrix<Complex64>> {
        check_dense(&self.space)?;
        let d = self.space.dim();
        let mut h = DMatrix::zeros(d, d);
        let (wd, eta) = (self.drive.frequency, self.drive.strength);
        let onsite: Vec<f64> = self
            .frequencies
            .iter()
            .zip(&self.phases)
            .map(|(w, p)| w + eta * wd * (wd * tau + p).cos())
            .collect();
        diagonal_number_term(&self.space, &onsite, &mut h);
        let mut c = Vec::new();
        self.table.coefficients(None, &mut c);
        self.table.add_dense(&c, &mut h);
        Ok(h)
    }
}

impl Generator for CosineDrivenModel {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        let theta = self.frame_phases(t);
        let mut c = Vec::with_capacity(self.table.terms.len());
        self.table.coefficients(Some(&theta), &mut c);
        self.table.accumulate(&c, psi, out);
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

/// Lab-frame `H(τ)` for the cosine drive.
pub fn cosine_driven_hamiltonian(
    array: &TrapArray,
    drive: &DriveSpec,
    bare: &CouplingMatrix,
    space: &FockSpace,
    tau: f64,
) -> Result<DMatrix<Complex64>> {
    CosineDrivenModel::new(array, drive, bare, space, false)?.matrix_at(tau)
}

/// Trap plus bare hopping plus the full Raman coupling
/// `(Ω_L/2) Σ_i [e^{i(θ_i − ω_L τ)} e^{iη(a_i + a†_i)} + h.c.]`.
///
/// As a [`Generator`] it acts in the interaction picture with respect to
/// `Σ ω_i a†_i a_i`, with the state-independent part of the laser term
/// removed (a global phase).
#[derive(Clone, Debug)]
pub struct LaserDrivenModel {
    space: FockSpace,
    frequencies: Vec<f64>,
    optical_phases: Vec<f64>,
    rabi: f64,
    beat: f64,
    displacement: DMatrix<Complex64>,
    table: HoppingTable,
    max_frequency: f64,
}

impl LaserDrivenModel {
    pub fn new(
        array: &TrapArray,
        drive: &DriveSpec,
        bare: &CouplingMatrix,
        space: &FockSpace,
        counter_rotating: bool,
    ) -> Result<Self> {
        let laser = match (drive.mode(), drive.laser) {
            (DriveMode::Laser, Some(l)) => l,
            _ => {
                return Err(Error::Configuration(
                    "laser-driven model needs laser parameters".into(),
                ))
            }
        };
        check_space(bare, space)?;
        if array.len() != space.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: space.n_sites(),
                found: array.len(),
            });
        }
        let frequencies = array.frequencies(drive.direction);
        let optical_phases = array.sites().iter().map(|s| drive.laser_phase(s)).collect();
        let eta = laser.lamb_dicke[drive.direction.index()];
        let displacement = local_displacement(space.n_max(), eta)?;
        let table = HoppingTable::new(bare, space, counter_rotating);

        let w_top = frequencies.iter().fold(0.0f64, |a, w| a.max(*w));
        let oscillation =
            (space.n_max() as f64 * w_top + laser.beat).max(table.max_term_frequency(&frequencies));
        // Row-sum bound of one site operator once the scalar part is removed.
        let d = space.n_max() + 1;
        let site_bound = (0..d)
            .map(|m| {
                (0..d)
                    .map(|n| {
                        if n == m {
                            (displacement[(m, m)] - displacement[(0, 0)]).norm()
                        } else {
                            0.5 * (displacement[(m, n)].norm() + displacement[(n, m)].norm())
                        }
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let amplitude =
            table.row_sum_bound(space.dim()) + laser.rabi * site_bound * space.n_sites() as f64;
        Ok(LaserDrivenModel {
            space: space.clone(),
            frequencies,
            optical_phases,
            rabi: laser.rabi,
            beat: laser.beat,
            displacement,
            table,
            max_frequency: oscillation.max(amplitude),
        })
    }

    /// Single-site laser operator `(Ω/2)(e^{iχ} D + e^{−iχ} D†)` in the frame
    /// rotating at `rate`, optionally without its `|0⟩⟨0|` scalar part.
    fn site_operator(
        &self,
        chi: f64,
        rate: f64,
        t: f64,
        remove_scalar: bool,
    ) -> DMatrix<Complex64> {
        let d = self.space.n_max() + 1;
        let e = Complex64::from_polar(1.0, chi);
        let half = 0.5 * self.rabi;
        // rot(m, n) = z^{m−n}
        let z = Complex64::from_polar(1.0, rate * t);
        let mut powers = Vec::with_capacity(d);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..d {
            powers.push(acc);
            acc *= z;
        }
        let mut g = DMatrix::zeros(d, d);
        for n in 0..d {
            for m in 0..d {
                let rot = if m >= n {
                    powers[m - n]
                } else {
                    powers[n - m].conj()
                };
                g[(m, n)] = half
                    * rot
                    * (e * self.displacement[(m, n)] + e.conj() * self.displacement[(n, m)].conj());
            }
        }
        if remove_scalar {
            let shift = half * 2.0 * (e * self.displacement[(0, 0)]).re;
            for m in 0..d {
                g[(m, m)] -= shift;
            }
        }
        g
    }

    /// Lab-frame `H(τ)`.
    pub fn matrix_at(&self, tau: f64) -> Result<DMatrix<Complex64>> {
        check_dense(&self.space)?;
        let d = self.space.dim();
        let mut h = DMatrix::zeros(d, d);
        diagonal_number_term(&self.space, &self.frequencies, &mut h);
        let mut c = Vec::new();
        self.table.coefficients(None, &mut c);
        self.table.add_dense(&c, &mut h);
        for (site, theta) in self.optical_phases.iter().enumerate() {
            let g = self.site_operator(theta - self.beat * tau, 0.0, 0.0, false);
            h += self.space.embed(site, &g)?;
        }
        Ok(h)
    }
}

impl Generator for LaserDrivenModel {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        let theta: Vec<f64> = self.frequencies.iter().map(|w| w * t).collect();
        let mut c = Vec::with_capacity(self.table.terms.len());
        self.table.coefficients(Some(&theta), &mut c);
        self.table.accumulate(&c, psi, out);
        for (site, phase) in self.optical_phases.iter().enumerate() {
            let g = self.site_operator(phase - self.beat * t, self.frequencies[site], t, true);
            self.space.apply_local(site, &g, psi, out);
        }
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

/// Lab-frame `H(τ)` for the Raman laser drive.
pub fn laser_driven_hamiltonian(
    array: &TrapArray,
    drive: &DriveSpec,
    bare: &CouplingMatrix,
    space: &FockSpace,
    tau: f64,
) -> Result<DMatrix<Complex64>> {
    LaserDrivenModel::new(array, drive, bare, space, false)?.matrix_at(tau)
}

/// Default step `2π / (ω_max · steps_per_period)`.
pub fn default_time_step<G: Generator + ?Sized>(generator: &G, steps_per_period: f64) -> f64 {
    TAU / (generator.max_frequency() * steps_per_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{bare_coupling_matrix, CouplingOptions};
    use crate::dynamics::{evolve, EvolveSettings, ModelKind};
    use crate::fock::LadderKind;
    use crate::model::{build_array, ArrayParams, Direction, LaserParams, Layout};

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    fn link(gradient: f64, beta: f64) -> (TrapArray, CouplingMatrix) {
        let a = build_array(
            &ArrayParams::new(Layout::Link, 2, 1)
                .gradient(gradient, Direction::Z)
                .beta(beta),
        )
        .unwrap();
        let bare = bare_coupling_matrix(&a, Direction::Z, &CouplingOptions::default()).unwrap();
        (a, bare)
    }

    #[test]
    fn effective_zero_matrix_is_zero_operator() {
        let space = FockSpace::new(3, 2).unwrap();
        let h = effective_hamiltonian(&CouplingMatrix::zeros(3, Direction::Z), &space).unwrap();
        assert_eq!(max_abs(&h), 0.0);
    }

    #[test]
    fn effective_two_site_single_excitation_block() {
        let mut m = CouplingMatrix::zeros(2, Direction::Z);
        m.set(1, 0, Complex64::new(0.0, 0.0021));
        let space = FockSpace::new(2, 4).unwrap();
        let h = effective_hamiltonian(&m, &space).unwrap();
        let (one0, zero1) = (
            space.index_of(&[1, 0]).unwrap(),
            space.index_of(&[0, 1]).unwrap(),
        );
        assert_eq!(h[(zero1, one0)], m.get(1, 0));
        assert_eq!(h[(one0, zero1)], m.get(0, 1));
        assert_eq!(h[(one0, one0)], Complex64::new(0.0, 0.0));
        assert_eq!(max_abs(&(h.adjoint() - &h)), 0.0);
    }

    #[test]
    fn effective_mismatched_space_is_rejected() {
        let space = FockSpace::new(3, 1).unwrap();
        let err =
            effective_hamiltonian(&CouplingMatrix::zeros(2, Direction::Z), &space).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn hopping_conserves_total_number() {
        let a = build_array(&ArrayParams::new(Layout::Square, 2, 2).beta(0.01)).unwrap();
        let m = bare_coupling_matrix(&a, Direction::Z, &CouplingOptions::default()).unwrap();
        let space = FockSpace::new(4, 2).unwrap();
        let h = effective_hamiltonian(&m, &space).unwrap();
        let mut n = DMatrix::zeros(space.dim(), space.dim());
        for s in 0..4 {
            n += space.ladder_matrix(s, LadderKind::Number).unwrap();
        }
        assert!(max_abs(&(&n * &h - &h * &n)) < 1e-12);
    }

    #[test]
    fn undriven_link_splits_by_twice_the_coupling() {
        let (a, bare) = link(0.0, 0.01);
        let drive = DriveSpec::cosine(0.1, 0.0, 1, 0.0, 0.0).unwrap();
        let space = FockSpace::new(2, 1).unwrap();
        let h = cosine_driven_hamiltonian(&a, &drive, &bare, &space, 0.7).unwrap();
        let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let j = bare.get(1, 0).norm();
        assert!((e[2] - e[1] - 2.0 * j).abs() < 1e-14);
        assert!((e[1] + e[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cosine_hamiltonian_is_periodic_and_starts_at_full_modulation() {
        let (a, bare) = link(0.05, 0.002);
        let drive = DriveSpec::cosine(0.05, 0.6, 1, 0.0, 0.0).unwrap();
        let space = FockSpace::new(2, 2).unwrap();
        let h0 = cosine_driven_hamiltonian(&a, &drive, &bare, &space, 0.0).unwrap();
        for site in 0..2 {
            let mut occ = [0, 0];
            occ[site] = 1;
            let k = space.index_of(&occ).unwrap();
            let expect = a.frequency(site, Direction::Z) + 0.6 * 0.05;
            assert!((h0[(k, k)].re - expect).abs() < 1e-15);
        }
        let tau = 3.3;
        let period = std::f64::consts::TAU / 0.05;
        let h1 = cosine_driven_hamiltonian(&a, &drive, &bare, &space, tau).unwrap();
        let h2 = cosine_driven_hamiltonian(&a, &drive, &bare, &space, tau + period).unwrap();
        assert!(max_abs(&(h1 - h2)) < 1e-13);
    }

    #[test]
    fn cosine_model_rejects_laser_drive() {
        let (a, bare) = link(0.05, 0.002);
        let laser = LaserParams {
            rabi: 0.75,
            beat: 0.05,
            lamb_dicke: [0.2; 3],
        };
        let drive = DriveSpec::laser(laser, Direction::Z, 1, 0.0, 0.0).unwrap();
        let space = FockSpace::new(2, 2).unwrap();
        assert!(matches!(
            cosine_driven_hamiltonian(&a, &drive, &bare, &space, 0.0),
            Err(Error::Configuration(_))
        ));
        let cosine = DriveSpec::cosine(0.05, 0.6, 1, 0.0, 0.0).unwrap();
        assert!(matches!(
            laser_driven_hamiltonian(&a, &cosine, &bare, &space, 0.0),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn laser_without_rabi_is_the_bare_trap() {
        let (a, bare) = link(0.05, 0.002);
        let space = FockSpace::new(2, 3).unwrap();
        let laser = LaserParams {
            rabi: 0.0,
            beat: 0.05,
            lamb_dicke: [0.2; 3],
        };
        let drive = DriveSpec::laser(laser, Direction::Z, 1, 0.4, 0.0).unwrap();
        let h = laser_driven_hamiltonian(&a, &drive, &bare, &space, 1.7).unwrap();
        let still = DriveSpec::cosine(0.05, 0.0, 1, 0.0, 0.0).unwrap();
        let h0 = cosine_driven_hamiltonian(&a, &still, &bare, &space, 1.7).unwrap();
        assert!(max_abs(&(h - h0)) < 1e-15);
    }

    #[test]
    fn laser_without_lamb_dicke_is_a_scalar_drive() {
        let (a, bare) = link(0.05, 0.002);
        let space = FockSpace::new(2, 3).unwrap();
        let laser = LaserParams {
            rabi: 0.75,
            beat: 0.05,
            lamb_dicke: [0.0; 3],
        };
        let drive = DriveSpec::laser(laser, Direction::Z, 1, 0.4, 0.0).unwrap();
        let tau = 2.9;
        let h = laser_driven_hamiltonian(&a, &drive, &bare, &space, tau).unwrap();
        let still = DriveSpec::cosine(0.05, 0.0, 1, 0.0, 0.0).unwrap();
        let h0 = cosine_driven_hamiltonian(&a, &still, &bare, &space, tau).unwrap();
        let scalar: f64 = a
            .sites()
            .iter()
            .map(|s| 0.75 * (drive.laser_phase(s) - 0.05 * tau).cos())
            .sum();
        let diff =
            h - h0 - DMatrix::identity(space.dim(), space.dim()) * Complex64::new(scalar, 0.0);
        assert!(max_abs(&diff) < 1e-14);
    }

    #[test]
    fn link_preset_builds_a_25_dimensional_hermitian_operator() {
        let (a, bare) = link(0.05, 0.002);
        let laser = LaserParams {
            rabi: 0.75,
            beat: 0.05,
            lamb_dicke: [0.2; 3],
        };
        let drive = DriveSpec::laser(laser, Direction::Z, 1, std::f64::consts::PI, 0.0).unwrap();
        assert!((drive.strength - 0.6).abs() < 1e-15);
        let space = FockSpace::new(2, 4).unwrap();
        let h = laser_driven_hamiltonian(&a, &drive, &bare, &space, 12.5).unwrap();
        assert_eq!((h.nrows(), h.ncols()), (25, 25));
        assert!(max_abs(&(h.adjoint() - &h)) < 1e-15);
    }

    /// Lab-frame and interaction-frame integrations must give the same populations.
    fn frames_agree(drive: &DriveSpec, counter_rotating: bool) {
        let a = build_array(
            &ArrayParams::new(Layout::Link, 2, 1)
                .gradient(0.3, Direction::Z)
                .beta(0.1),
        )
        .unwrap();
        let bare = bare_coupling_matrix(&a, Direction::Z, &CouplingOptions::default()).unwrap();
        let space = FockSpace::new(2, 2).unwrap();
        let psi0 = space.single_excitation(0).unwrap();
        let settings = EvolveSettings {
            t_final: 25.0,
            dt: 2e-3,
            samples: 10,
        };
        let (frame, lab): (Box<dyn Generator>, Box<dyn Generator>) = match drive.mode() {
            DriveMode::Cosine => {
                let m = CosineDrivenModel::new(&a, drive, &bare, &space, counter_rotating).unwrap();
                let lab = m.clone();
                (
                    Box::new(m),
                    Box::new(DenseGenerator::new(space.dim(), 1.0, move |t| {
                        lab.matrix_at(t).unwrap()
                    })),
                )
            }
            DriveMode::Laser => {
                let m = LaserDrivenModel::new(&a, drive, &bare, &space, counter_rotating).unwrap();
                let lab = m.clone();
                (
                    Box::new(m),
                    Box::new(DenseGenerator::new(space.dim(), 1.0, move |t| {
                        lab.matrix_at(t).unwrap()
                    })),
                )
            }
        };
        let r1 = evolve(
            frame.as_ref(),
            &space,
            &psi0,
            &settings,
            ModelKind::Effective,
        )
        .unwrap();
        let r2 = evolve(lab.as_ref(), &space, &psi0, &settings, ModelKind::Effective).unwrap();
        let moved = r1
            .populations
            .iter()
            .map(|p| (p[1] - 0.0).abs())
            .fold(0.0, f64::max);
        assert!(moved > 1e-3, "no dynamics to compare");
        assert!(
            r1.max_population_difference(&r2) < 1e-7,
            "{}",
            r1.max_population_difference(&r2)
        );
    }

    #[test]
    fn cosine_frames_agree() {
        frames_agree(&DriveSpec::cosine(0.3, 0.8, 1, 0.9, 0.0).unwrap(), false);
        frames_agree(&DriveSpec::cosine(0.3, 0.8, 1, 0.9, 0.0).unwrap(), true);
    }

    #[test]
    fn laser_frames_agree() {
        let laser = LaserParams {
            rabi: 0.3,
            beat: 0.3,
            lamb_dicke: [0.3; 3],
        };
        let drive = DriveSpec::laser(laser, Direction::Z, 1, 1.3, 0.0).unwrap();
        frames_agree(&drive, false);
        frames_agree(&drive, true);
    }

    #[test]
    fn default_step_resolves_the_fastest_frequency() {
        let (a, bare) = link(0.05, 0.002);
        let laser = LaserParams {
            rabi: 0.75,
            beat: 0.05,
            lamb_dicke: [0.2; 3],
        };
        let drive = DriveSpec::laser(laser, Direction::Z, 1, 0.0, 0.0).unwrap();
        let space = FockSpace::new(2, 4).unwrap();
        let m = LaserDrivenModel::new(&a, &drive, &bare, &space, false).unwrap();
        assert!(m.max_frequency() >= 4.0 * 1.05 + 0.05 - 1e-12);
        let dt = default_time_step(&m, 40.0);
        assert!((dt - TAU / (40.0 * m.max_frequency())).abs() < 1e-15);
    }
}
