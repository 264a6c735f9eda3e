//! Channel models: the exact eigen-representation, the first-stage
//! epsilon-rank truncation, the second-stage replication matrices and the
//! single-shared-latent reference parameterisation.

mod replication;
mod rng;
mod sampling;

pub use replication::{divisors, p3_objective, select_replication, solve_p3, P3Solution};
pub use sampling::{
    exact_max_gains, reference_max_gains, sample_exact, sample_exact_complex, sample_ghat_matrix,
    sample_ghat_complex, sample_gtilde_matrix, sample_gtilde_complex, sample_reference_fas1,
    sample_stage1, sample_stage1_complex, stage1_max_gains, ComplexSampleBatch, MatrixSampleBatch,
};

use crate::covariance::SpectralModel;
use crate::error::{FasError, Result};
use crate::linalg::Matrix;
use std::sync::Arc;

pub(crate) use rng::fill_half_normals as fill_latents;

pub(crate) fn latent_streams(seed: u64) -> rng::DrawStreams {
    rng::DrawStreams::new(seed)
}

/// Given the residual variance `rest_raw`, produce `(part, rest)` with
/// `part + rest == total` bit-exactly and `rest` as close to `rest_raw` as
/// representable (nudged by an ulp when rounding requires it). A tiny
/// positive `rest` survives alongside `part == total`.
fn exact_complement(total: f64, rest_raw: f64) -> (f64, f64) {
    let mut rest = rest_raw.clamp(0.0, total);
    for _ in 0..4 {
        let part = total - rest;
        if part + rest == total && part >= 0.0 {
            return (part, rest);
        }
        rest = if part + rest > total {
            f64::from_bits(rest.to_bits() - 1)
        } else {
            f64::from_bits(rest.to_bits() + 1)
        };
    }
    let part = total - rest;
    (part, rest)
}

/// First-stage approximation: the channel keeps the `eps_rank` dominant
/// eigendirections as shared latents and replaces the discarded tail with an
/// independent per-port residual of matching power.
///
/// Per port `k` the model stores the mixture power
/// `m_k = sum_{l <= eps_rank} s_l u_{k,l}^2` and the residual deviation
/// `tau_k = sqrt(sigma^2 - m_k)`, with `m_k + tau_k^2 = sigma^2` exact in
/// the stored representation.
#[derive(Debug, Clone)]
pub struct Stage1Model {
    spectral: Arc<SpectralModel>,
    eps_rank: usize,
    /// `basis[k * eps_rank + l] = sqrt(s_l) u_{k,l}`.
    basis: Vec<f64>,
    mixture_power: Vec<f64>,
    residual_var: Vec<f64>,
    residual_std: Vec<f64>,
}

impl Stage1Model {
    pub fn new(spectral: Arc<SpectralModel>, eps_rank: usize) -> Result<Self> {
        let n = spectral.n_ports();
        if eps_rank < 1 || eps_rank >= n {
            return Err(FasError::Construction(format!(
                "eps_rank must satisfy 1 <= eps_rank < N, got {eps_rank} with N = {n}"
            )));
        }
        let sigma2 = spectral.config().sigma2;
        let mut basis = vec![0.0f64; n * eps_rank];
        for l in 0..eps_rank {
            // Round-off can leave tiny negative tail eigenvalues; clamp
            // before the square root.
            let root = spectral.eigenvalues()[l].max(0.0).sqrt();
            for k in 0..n {
                basis[k * eps_rank + l] = root * spectral.eigenvectors().at(k, l);
            }
        }
        let mut mixture_power = Vec::with_capacity(n);
        let mut residual_var = Vec::with_capacity(n);
        let mut residual_std = Vec::with_capacity(n);
        for k in 0..n {
            let raw: f64 = basis[k * eps_rank..(k + 1) * eps_rank]
                .iter()
                .map(|b| b * b)
                .sum();
            let (m, v) = exact_complement(sigma2, raw);
            if v == 0.0 {
                return Err(FasError::Construction(format!(
                    "residual scale vanishes at port {k}: eps_rank {eps_rank} leaves no independent term"
                )));
            }
            mixture_power.push(m);
            residual_var.push(v);
            residual_std.push(v.sqrt());
        }
        Ok(Stage1Model {
            spectral,
            eps_rank,
            basis,
            mixture_power,
            residual_var,
            residual_std,
        })
    }

    /// Build directly from a config and an explicit rank.
    pub fn from_spectral(spectral: SpectralModel, eps_rank: usize) -> Result<Self> {
        Self::new(Arc::new(spectral), eps_rank)
    }

    pub fn spectral(&self) -> &SpectralModel {
        &self.spectral
    }

    pub fn eps_rank(&self) -> usize {
        self.eps_rank
    }

    pub fn n_ports(&self) -> usize {
        self.spectral.n_ports()
    }

    /// Latent dimension of the first-stage outage integral, `2 * eps_rank`.
    pub fn latent_dimension(&self) -> usize {
        2 * self.eps_rank
    }

    /// Fraction of multi-fold integrals removed relative to the exact
    /// `N`-fold representation, `(N - 2 eps_rank) / N`.
    pub fn integral_reduction(&self) -> f64 {
        let n = self.n_ports() as f64;
        (n - self.latent_dimension() as f64) / n
    }

    /// `sqrt(s_l) u_{k,l}` for the retained directions of port `k`.
    pub fn basis_row(&self, k: usize) -> &[f64] {
        &self.basis[k * self.eps_rank..(k + 1) * self.eps_rank]
    }

    /// `m_k`: power the retained eigenvectors capture at port `k`.
    pub fn mixture_power(&self) -> &[f64] {
        &self.mixture_power
    }

    /// `tau_k^2 = sigma^2 - m_k`.
    pub fn residual_var(&self) -> &[f64] {
        &self.residual_var
    }

    /// `tau_k`: Rician scale of the independent residual at port `k`.
    pub fn residual_std(&self) -> &[f64] {
        &self.residual_std
    }

    pub fn sigma2(&self) -> f64 {
        self.spectral.config().sigma2
    }

    /// Covariance of the first-stage vector (Proposition 2 block):
    /// `sigma^2` on the diagonal, `sum_{l <= eps_rank} s_l u_{i,l} u_{j,l}`
    /// off it.
    pub fn port_covariance(&self) -> Matrix {
        let n = self.n_ports();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.sigma2()
            } else {
                let bi = self.basis_row(i);
                let bj = self.basis_row(j);
                bi.iter().zip(bj).map(|(x, y)| x * y).sum()
            }
        })
    }
}

/// Second-stage model: a first-stage model plus the replication count `R`
/// used by the power-of-single-integral formula.
#[derive(Debug, Clone)]
pub struct Stage2Model {
    stage1: Stage1Model,
    replication: usize,
}

impl Stage2Model {
    pub fn new(stage1: Stage1Model, replication: usize) -> Result<Self> {
        if replication < 1 {
            return Err(FasError::Construction(
                "replication count must be at least 1".into(),
            ));
        }
        Ok(Stage2Model {
            stage1,
            replication,
        })
    }

    pub fn stage1(&self) -> &Stage1Model {
        &self.stage1
    }

    pub fn replication(&self) -> usize {
        self.replication
    }

    /// Covariance of one row of the row-independent replication matrix
    /// (Proposition 3 block): `sigma^2` on the diagonal, `m_k` off it.
    pub fn row_covariance(&self, port: usize) -> Matrix {
        let r = self.replication;
        let m = self.stage1.mixture_power()[port];
        let s2 = self.stage1.sigma2();
        Matrix::from_fn(r, r, |i, j| if i == j { s2 } else { m })
    }
}

/// Which sampler produced a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    Exact,
    Stage1,
    Reference,
}

/// Magnitude samples, one row of `n_ports` gains per draw.
#[derive(Debug, Clone)]
pub struct ChannelSampleBatch {
    pub gains: Vec<f64>,
    pub draws: usize,
    pub n_ports: usize,
    pub seed: u64,
    pub model_tag: ModelTag,
}

impl ChannelSampleBatch {
    pub fn row(&self, draw: usize) -> &[f64] {
        &self.gains[draw * self.n_ports..(draw + 1) * self.n_ports]
    }

    /// Per-draw maximum gain, the selection-combining statistic.
    pub fn max_gains(&self) -> Vec<f64> {
        (0..self.draws)
            .map(|d| self.row(d).iter().cloned().fold(0.0f64, f64::max))
            .collect()
    }
}

/// Covariance of the exact-model parameterisation rebuilt from the
/// eigenpairs (the Appendix-A identity): entry `(i, j)` is
/// `sum_l s_l u_{i,l} u_{j,l}` with `sigma^2` forced on the diagonal.
pub fn exact_model_covariance(spectral: &SpectralModel) -> Matrix {
    let n = spectral.n_ports();
    let sigma2 = spectral.config().sigma2;
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            sigma2
        } else {
            (0..n)
                .map(|l| {
                    spectral.eigenvalues()[l].max(0.0)
                        * spectral.eigenvectors().at(i, l)
                        * spectral.eigenvectors().at(j, l)
                })
                .sum()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::FasConfig;

    fn model(n: usize, w: f64, s2: f64, rank: usize) -> Stage1Model {
        let spectral = SpectralModel::new(FasConfig::new(n, w, s2, 0.0).unwrap()).unwrap();
        Stage1Model::from_spectral(spectral, rank).unwrap()
    }

    #[test]
    fn stage1_power_split_is_exact() {
        let m = model(24, 1.0, 10.0, 4);
        for k in 0..24 {
            let mk = m.mixture_power()[k];
            let vk = m.residual_var()[k];
            assert_eq!(mk + vk, 10.0, "port {k}");
            assert!(mk >= 0.0 && mk <= 10.0);
            assert!(m.residual_std()[k] > 0.0);
        }
    }

    #[test]
    fn stage1_rejects_degenerate_ranks() {
        let spectral =
            Arc::new(SpectralModel::new(FasConfig::new(8, 0.5, 1.0, 0.0).unwrap()).unwrap());
        assert!(Stage1Model::new(spectral.clone(), 0).is_err());
        assert!(Stage1Model::new(spectral.clone(), 8).is_err());
        assert!(Stage1Model::new(spectral, 7).is_ok());
    }

    #[test]
    fn latent_accounting_matches_rank() {
        let m = model(50, 1.0, 1.0, 4);
        assert_eq!(m.latent_dimension(), 8);
        assert!((m.integral_reduction() - 42.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn exact_model_covariance_matches_jake() {
        // Appendix-A identity at a small size; the acceptance suite sweeps
        // the full grid.
        let spectral = SpectralModel::new(FasConfig::new(9, 0.7, 2.0, 0.0).unwrap()).unwrap();
        let rebuilt = exact_model_covariance(&spectral);
        let direct = spectral.covariance();
        for i in 0..9 {
            for j in 0..9 {
                assert!(
                    (rebuilt.at(i, j) - direct.at(i, j)).abs() < 1e-9 * 2.0,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn exact_complement_edge_cases() {
        let (m, v) = exact_complement(10.0, 10.0);
        assert_eq!(m + v, 10.0);
        let (m, v) = exact_complement(1.0, 0.0);
        assert_eq!(m, 0.0);
        assert_eq!(v, 1.0);
        let (m, v) = exact_complement(7.3, 5.1);
        assert_eq!(m + v, 7.3);
    }
}
