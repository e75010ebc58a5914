//! Single-particle spectra of the rhombic ladder and the square lattice.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::couplings::{dressed_factor, CouplingMatrix};
use crate::model::Direction;
use crate::{Error, Result};

/// Tolerance of the Hermiticity check in [`eigensystem`].
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Grouping of sites into unit cells along the open direction, plus the
/// outermost cell at each end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitCells {
    pub cells: Vec<Vec<usize>>,
    /// Sites of the first and last cell, which may differ from
    /// `cells[0]` and `cells[last]` when the ends are mirror images.
    pub ends: [Vec<usize>; 2],
    pub boundary: Boundary,
}

impl UnitCells {
    /// Ends are the first and last cell.
    pub fn new(cells: Vec<Vec<usize>>, boundary: Boundary) -> Self {
        let ends = [
            cells.first().cloned().unwrap_or_default(),
            cells.last().cloned().unwrap_or_default(),
        ];
        UnitCells {
            cells,
            ends,
            boundary,
        }
    }

    /// Every site its own cell, in index order.
    pub fn sites(n: usize, boundary: Boundary) -> Self {
        Self::new((0..n).map(|i| vec![i]).collect(), boundary)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Probability per cell.
    pub fn cell_weights(&self, v: &[Complex64]) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| c.iter().map(|&i| v[i].norm_sqr()).sum())
            .collect()
    }

    /// Probability on the two end cells; zero without edges.
    pub fn boundary_weight(&self, v: &[Complex64]) -> f64 {
        if self.boundary == Boundary::Periodic {
            return 0.0;
        }
        let mut sites: Vec<usize> = self.ends.iter().flatten().copied().collect();
        sites.sort_unstable();
        sites.dedup();
        sites.iter().map(|&i| v[i].norm_sqr()).sum()
    }
}

/// A single-particle Hamiltonian with its cell structure.
#[derive(Clone, Debug, PartialEq)]
pub struct TightBinding {
    pub hamiltonian: DMatrix<Complex64>,
    pub cells: UnitCells,
    pub flux: f64,
}

impl TightBinding {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn coupling_matrix(&self) -> Result<CouplingMatrix> {
        CouplingMatrix::from_matrix(self.hamiltonian.clone(), Direction::Z)
    }

    pub fn spectrum(&self) -> Result<SpectrumResult> {
        let mut s = eigensystem_with_cells(&self.hamiltonian, &self.cells)?;
        s.flux = Some(self.flux);
        Ok(s)
    }
}

fn add_bond(h: &mut DMatrix<Complex64>, i: usize, j: usize, value: Complex64) {
    h[(i, j)] += value;
    h[(j, i)] += value.conj();
}

/// Rhombic (diamond) ladder
/// `Σ_j J_1(b†_j a_j + c†_j b_{j+1}) + J_2(b†_j c_j + e^{iφ} a†_j b_{j+1}) + h.c.`
///
/// Sites are ordered `a_j, b_j, c_j` per cell. Open ladders end on a hub
/// `b_p` (`3p + 1` sites, the hub counted in the last cell); periodic ones
/// identify `b_p` with `b_0` (`3p` sites).
pub fn rhombic_ladder_matrix(
    cells: usize,
    j1: f64,
    j2: f64,
    phi: f64,
    boundary: Boundary,
) -> Result<TightBinding> {
    if cells == 0 {
        return Err(Error::InvalidGeometry(
            "rhombic ladder needs at least one cell".into(),
        ));
    }
    if !(j1 > 0.0 && j1.is_finite()) || !(j2 >= 0.0 && j2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ladder couplings must be positive, got J1 = {j1}, J2 = {j2}"
        )));
    }
    let n = match boundary {
        Boundary::Open => 3 * cells + 1,
        Boundary::Periodic => 3 * cells,
    };
    let (a, b, c) = (|j: usize| 3 * j, |j: usize| 3 * j + 1, |j: usize| 3 * j + 2);
    let next_hub = |j: usize| match (j + 1 == cells, boundary) {
        (false, _) => b(j + 1),
        (true, Boundary::Open) => 3 * cells,
        (true, Boundary::Periodic) => b(0),
    };
    let mut h = DMatrix::zeros(n, n);
    let real = |x: f64| Complex64::new(x, 0.0);
    for j in 0..cells {
        add_bond(&mut h, b(j), a(j), real(j1));
        add_bond(&mut h, c(j), next_hub(j), real(j1));
        add_bond(&mut h, b(j), c(j), real(j2));
        add_bond(&mut h, a(j), next_hub(j), Complex64::from_polar(j2, phi));
    }
    let mut groups: Vec<Vec<usize>> = (0..cells).map(|j| vec![a(j), b(j), c(j)]).collect();
    let mut unit_cells = UnitCells::new(groups.clone(), boundary);
    if boundary == Boundary::Open {
        groups[cells - 1].push(3 * cells);
        let last = cells - 1;
        unit_cells = UnitCells {
            cells: groups,
            ends: [vec![a(0), b(0), c(0)], vec![a(last), c(last), 3 * cells]],
            boundary,
        };
    }
    Ok(TightBinding {
        hamiltonian: h,
        cells: unit_cells,
        flux: phi,
    })
}

/// Ratio `J_2 / J_1 = |ℱ_r(η_d, Δφ)| (d_y/d_x)³` of a ladder realised with
/// plaquettes along a diagonal.
pub fn ladder_coupling_ratio(
    order: u32,
    strength: f64,
    phase_difference: f64,
    d_x: f64,
    d_y: f64,
) -> Result<f64> {
    if !(d_x > 0.0) || !(d_y > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "spacings must be positive, got d_x = {d_x}, d_y = {d_y}"
        )));
    }
    Ok(dressed_factor(order, strength, phase_difference)?.norm() * (d_y / d_x).powi(3))
}

/// Landau-gauge square lattice: `a†_i a_{i+x̂}` carries `J_x e^{−iα i_y}`,
/// `a†_i a_{i+mŷ}` carries `J_y / m³` for `m ≤ m_max`. Sites are row-major,
/// cells are columns of constant `i_x`. Periodic boundaries wrap both axes
/// and need `α L_y ≡ 0 (mod 2π)` for a uniform flux.
pub fn square_lattice_matrix(
    lx: usize,
    ly: usize,
    alpha: f64,
    jx: f64,
    jy: f64,
    m_max: usize,
    boundary: Boundary,
) -> Result<TightBinding> {
    if lx == 0 || ly == 0 {
        return Err(Error::InvalidGeometry(format!(
            "lattice dimensions must be positive, got {lx} x {ly}"
        )));
    }
    if m_max == 0 {
        return Err(Error::InvalidParameter(
            "dipolar cutoff must be at least 1".into(),
        ));
    }
    let n = lx * ly;
    let idx = |ix: usize, iy: usize| iy * lx + ix;
    let mut h = DMatrix::zeros(n, n);
    let periodic = boundary == Boundary::Periodic;
    for iy in 0..ly {
        for ix in 0..lx {
            if ix + 1 < lx || (periodic && lx > 2) {
                let to = idx((ix + 1) % lx, iy);
                add_bond(
                    &mut h,
                    idx(ix, iy),
                    to,
                    Complex64::from_polar(jx, -alpha * iy as f64),
                );
            }
            for m in 1..=m_max {
                let value = Complex64::new(jy / (m * m * m) as f64, 0.0);
                if iy + m < ly {
                    add_bond(&mut h, idx(ix, iy), idx(ix, iy + m), value);
                } else if periodic && 2 * m < ly {
                    add_bond(&mut h, idx(ix, iy), idx(ix, (iy + m) % ly), value);
                }
            }
        }
    }
    let cells = (0..lx)
        .map(|ix| (0..ly).map(|iy| idx(ix, iy)).collect())
        .collect();
    Ok(TightBinding {
        hamiltonian: h,
        cells: UnitCells::new(cells, boundary),
        flux: alpha,
    })
}

/// Eigen-decomposition with per-state metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; its largest component
    /// is real and positive.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// `Σ_i |v_i|⁴`.
    pub ipr: Vec<f64>,
    pub boundary_weight: Vec<f64>,
    /// Index of the eigenvalue cluster each state belongs to.
    pub band_labels: Vec<usize>,
    pub flux: Option<f64>,
    pub cells: UnitCells,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn cell_weights(&self, state: usize) -> Vec<f64> {
        self.cells.cell_weights(&self.eigenvectors[state])
    }

    pub fn scale(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let d = hermiticity_defect(m);
    if !(d <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian(d));
    }
    Ok(())
}

/// Ascending eigenvalues only.
pub fn eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    check_hermitian(matrix)?;
    let mut e: Vec<f64> = matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Full spectrum treating every site as its own cell.
pub fn eigensystem(matrix: &DMatrix<Complex64>) -> Result<SpectrumResult> {
    eigensystem_with_cells(matrix, &UnitCells::sites(matrix.nrows(), Boundary::Open))
}

pub fn eigensystem_with_cells(
    matrix: &DMatrix<Complex64>,
    cells: &UnitCells,
) -> Result<SpectrumResult> {
    check_hermitian(matrix)?;
    let n = matrix.nrows();
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for &k in &order {
        eigenvalues.push(eig.eigenvalues[k]);
        let mut v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        let top = v.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if let Some(pivot) = v.iter().find(|c| c.norm() >= top * (1.0 - 1e-12)).copied() {
            let phase = pivot.conj() / pivot.norm();
            for c in &mut v {
                *c *= phase;
            }
        }
        eigenvectors.push(v);
    }
    let ipr = eigenvectors
        .iter()
        .map(|v| v.iter().map(|c| c.norm_sqr().powi(2)).sum())
        .collect();
    let boundary_weight = eigenvectors
        .iter()
        .map(|v| cells.boundary_weight(v))
        .collect();
    let tol = default_cluster_tol(&eigenvalues);
    let mut band_labels = Vec::with_capacity(n);
    for (label, c) in cluster_sorted(&eigenvalues, tol).iter().enumerate() {
        band_labels.extend(std::iter::repeat_n(label, c.count));
    }
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        ipr,
        boundary_weight,
        band_labels,
        flux: None,
        cells: cells.clone(),
    })
}

/// A group of nearly degenerate eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub energy: f64,
    pub count: usize,
    pub spread: f64,
}

/// `1e-8 · max|E|`.
pub fn default_cluster_tol(eigenvalues: &[f64]) -> f64 {
    1e-8 * eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()))
}

/// Greedy clustering of ascending values: a value joins the current
/// cluster while it lies within `tol` of the cluster's lowest member.
fn cluster_sorted(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[start] > tol {
            if i > start {
                let members = &values[start..i];
                out.push(Cluster {
                    energy: members.iter().sum::<f64>() / members.len() as f64,
                    count: members.len(),
                    spread: members[members.len() - 1] - members[0],
                });
            }
            start = i;
        }
    }
    out
}

/// Eigenvalue clusters; `cluster_tol` defaults to [`default_cluster_tol`].
pub fn flat_band_report(spectrum: &SpectrumResult, cluster_tol: Option<f64>) -> Vec<Cluster> {
    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(&spectrum.eigenvalues));
    cluster_sorted(&spectrum.eigenvalues, tol)
}

/// Open energy intervals between bulk bands. Bulk eigenvalues closer than
/// `band_tol` are joined into one band.
pub fn gap_windows(bulk_eigenvalues: &[f64], band_tol: f64) -> Vec<(f64, f64)> {
    let mut sorted = bulk_eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .filter(|w| w[1] - w[0] > band_tol)
        .map(|w| (w[0], w[1]))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeState {
    pub index: usize,
    pub energy: f64,
    pub boundary_weight: f64,
    /// From `P(d) ∝ e^{−2d/ξ}` over the distance `d` to the nearer end, in
    /// unit cells; zero for states confined to the end cells, `None` if the
    /// weight does not decay.
    pub localization_length: Option<f64>,
}

/// States strictly inside a gap window with more than half their weight
/// on the end cells.
pub fn edge_state_report(spectrum: &SpectrumResult, windows: &[(f64, f64)]) -> Vec<EdgeState> {
    if spectrum.cells.boundary == Boundary::Periodic {
        return Vec::new();
    }
    let margin = default_cluster_tol(&spectrum.eigenvalues);
    spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(k, &e)| {
            spectrum.boundary_weight[k] > 0.5
                && windows
                    .iter()
                    .any(|&(lo, hi)| e > lo + margin && e < hi - margin)
        })
        .map(|(k, &e)| EdgeState {
            index: k,
            energy: e,
            boundary_weight: spectrum.boundary_weight[k],
            localization_length: localization_length(&spectrum.cell_weights(k)),
        })
        .collect()
}

fn localization_length(cell_weights: &[f64]) -> Option<f64> {
    let n = cell_weights.len();
    if n == 0 {
        return None;
    }
    let mut by_distance = vec![0.0; n.div_ceil(2)];
    for (c, w) in cell_weights.iter().enumerate() {
        by_distance[c.min(n - 1 - c)] += w;
    }
    let top = by_distance.iter().fold(0.0f64, |m, w| m.max(*w));
    let points: Vec<(f64, f64)> = by_distance
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 1e-12 * top)
        .map(|(d, w)| (d as f64, w.ln()))
        .collect();
    if points.len() < 2 {
        return Some(0.0);
    }
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -2.0 / slope)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxPoint {
    pub flux: f64,
    pub eigenvalues: Vec<f64>,
    /// Smallest gap between consecutive bands when the band count is known.
    pub min_gap: Option<f64>,
}

/// Spectra over a flux grid. With `bands = Some(q)` the ascending spectrum
/// is split into `q` equal blocks and the smallest gap between adjacent
/// blocks is reported.
pub fn flux_sweep<F>(builder: F, grid: &[f64], bands: Option<usize>) -> Result<Vec<FluxPoint>>
where
    F: Fn(f64) -> Result<DMatrix<Complex64>>,
{
    grid.iter()
        .map(|&phi| {
            let e = eigenvalues(&builder(phi)?)?;
            let min_gap = match bands {
                None => None,
                Some(q) => Some(min_band_gap(&e, q)?),
            };
            Ok(FluxPoint {
                flux: phi,
                eigenvalues: e,
                min_gap,
            })
        })
        .collect()
}

/// Smallest gap between `q` equal blocks of an ascending spectrum.
pub fn min_band_gap(ascending: &[f64], q: usize) -> Result<f64> {
    let n = ascending.len();
    if q < 2 || !n.is_multiple_of(q) {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n} levels into {q} equal bands"
        )));
    }
    let size = n / q;
    Ok((1..q)
        .map(|b| ascending[b * size] - ascending[b * size - 1])
        .fold(f64::INFINITY, f64::min))
}
