//! Truncated multi-site bosonic Fock space.
//!
//! Basis states are occupation vectors `(n_1, …, n_N)` with `n_i ≤ n_max`,
//! ordered lexicographically with site 1 varying slowest.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default limit on the Fock-space dimension.
pub const DEFAULT_CAPACITY: usize = 1_000_000;
/// Largest dimension for which dense operator matrices are built.
pub const DENSE_CAPACITY: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderKind {
    Lower,
    Raise,
    Number,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_sites: usize,
    n_max: usize,
    dim: usize,
    strides: Vec<usize>,
}

impl FockSpace {
    pub fn new(n_sites: usize, n_max: usize) -> Result<Self> {
        Self::with_capacity(n_sites, n_max, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(n_sites: usize, n_max: usize, limit: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParameter(
                "a Fock space needs at least one site".into(),
            ));
        }
        let base = n_max + 1;
        let mut dim: usize = 1;
        for _ in 0..n_sites {
            dim = dim
                .checked_mul(base)
                .filter(|d| *d <= limit)
                .ok_or(Error::Capacity {
                    dim: (base as f64).powi(n_sites as i32).min(usize::MAX as f64) as usize,
                    limit,
                })?;
        }
        let mut strides = vec![1; n_sites];
        for i in (0..n_sites.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * base;
        }
        Ok(FockSpace {
            n_sites,
            n_max,
            dim,
            strides,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn occupation(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % (self.n_max + 1)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.n_sites)
            .map(|s| self.occupation(index, s))
            .collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: occupations.len(),
            });
        }
        if let Some(&n) = occupations.iter().find(|&&n| n > self.n_max) {
            return Err(Error::InvalidParameter(format!(
                "occupation {n} exceeds n_max = {}",
                self.n_max
            )));
        }
        Ok(occupations
            .iter()
            .zip(&self.strides)
            .map(|(n, s)| n * s)
            .sum())
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site < self.n_sites {
            Ok(())
        } else {
            Err(Error::InvalidSite {
                site,
                n_sites: self.n_sites,
            })
        }
    }

    /// `a†_site |0…0⟩`.
    pub fn single_excitation(&self, site: usize) -> Result<Vec<Complex64>> {
        self.check_site(site)?;
        if self.n_max == 0 {
            return Err(Error::InvalidParameter(
                "n_max = 0 admits no excitation".into(),
            ));
        }
        let mut psi = vec![Complex64::new(0.0, 0.0); self.dim];
        psi[self.strides[site]] = Complex64::new(1.0, 0.0);
        Ok(psi)
    }

    /// Expectation values `⟨a†_i a_i⟩` for every site.
    pub fn populations(&self, psi: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_sites];
        for (b, amp) in psi.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (s, o) in out.iter_mut().enumerate() {
                *o += p * self.occupation(b, s) as f64;
            }
        }
        out
    }

    fn check_dense(&self) -> Result<()> {
        if self.dim > DENSE_CAPACITY {
            Err(Error::Capacity {
                dim: self.dim,
                limit: DENSE_CAPACITY,
            })
        } else {
            Ok(())
        }
    }

    /// `a`, `a†` or `a†a` on `site`, identity elsewhere.
    pub fn ladder_matrix(&self, site: usize, kind: LadderKind) -> Result<DMatrix<Complex64>> {
        self.embed(site, &local_ladder(self.n_max, kind))
    }

    /// Embeds a single-site `(n_max+1)`-square operator at `site`.
    pub fn embed(&self, site: usize, local: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        self.check_site(site)?;
        self.check_dense()?;
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let stride = self.strides[site];
        for col in 0..self.dim {
            let n = self.occupation(col, site);
            let base = col - n * stride;
            for m in 0..=self.n_max {
                let v = local[(m, n)];
                if v != Complex64::new(0.0, 0.0) {
                    out[(base + m * stride, col)] = v;
                }
            }
        }
        Ok(out)
    }

    /// `out += O_site · psi` for a single-site operator, without building the
    /// full matrix.
    pub fn apply_local(
        &self,
        site: usize,
        local: &DMatrix<Complex64>,
        psi: &[Complex64],
        out: &mut [Complex64],
    ) {
        let stride = self.strides[site];
        let width = self.n_max + 1;
        let block = stride * width;
        // Column-major: element (m, n) sits at m + n * width.
        let l = local.as_slice();
        for (p, o) in psi.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
            for inner in 0..stride {
                for (n, column) in l.chunks_exact(width).enumerate() {
                    let amp = p[inner + n * stride];
                    if amp == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (m, v) in column.iter().enumerate() {
                        o[inner + m * stride] += v * amp;
                    }
                }
            }
        }
    }

    /// `exp(iη(a + a†))` on `site`.
    pub fn displacement_exponential(&self, site: usize, eta: f64) -> Result<DMatrix<Complex64>> {
        self.check_site(site)?;
        self.embed(site, &local_displacement(self.n_max, eta)?)
    }
}

/// Truncated single-mode ladder operator of size `n_max + 1`.
pub fn local_ladder(n_max: usize, kind: LadderKind) -> DMatrix<Complex64> {
    let d = n_max + 1;
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        let v = Complex64::new((n as f64).sqrt(), 0.0);
        match kind {
            LadderKind::Lower => m[(n - 1, n)] = v,
            LadderKind::Raise => m[(n, n - 1)] = v,
            LadderKind::Number => m[(n, n)] = Complex64::new(n as f64, 0.0),
        }
    }
    m
}

/// Single-mode `exp(iη(a + a†))`, built from the eigendecomposition of the
/// truncated position operator so the result is unitary on the truncated space.
pub fn local_displacement(n_max: usize, eta: f64) -> Result<DMatrix<Complex64>> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Lamb-Dicke parameter must be non-negative, got {eta}"
        )));
    }
    let d = n_max + 1;
    let mut x = DMatrix::<f64>::zeros(d, d);
    for n in 1..d {
        let v = (n as f64).sqrt();
        x[(n - 1, n)] = v;
        x[(n, n - 1)] = v;
    }
    let eig = x.symmetric_eigen();
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, eta * eig.eigenvalues[k]);
        for i in 0..d {
            let vi = eig.eigenvectors[(i, k)];
            for j in 0..d {
                out[(i, j)] += phase * vi * eig.eigenvectors[(j, k)];
            }
        }
    }
    Ok(out)
}
