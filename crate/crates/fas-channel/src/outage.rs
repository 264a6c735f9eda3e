//! CDF and outage-probability evaluators.
//!
//! The outage event at SNR target `gamma_th / Gamma` (dB) is
//! `{g_FAS < r_th}` with `r_th = sigma 10^{dB/20}`, so every evaluator here
//! is a CDF of the selection-combining maximum evaluated at one point:
//!
//! * [`stage1_cdf`] — Monte Carlo over the `2 x eps-rank` shared latents of
//!   the first-stage model; conditionally on the latents the ports are
//!   independent Ricians, so each draw contributes a product of
//!   `1 - Q1` factors (accumulated in log domain);
//! * [`stage2_cdf`] — deterministic product over ports of single
//!   Gauss-Laguerre integrals raised to `1/R`, the power-of-single-integral
//!   form of the replication construction;
//! * [`reference_fas1_cdf`] — the single-shared-latent reference model,
//!   whose deterministic first port truncates the latent integral at
//!   `r^2 / sigma^2`;
//! * [`EmpiricalCdf`] / [`ks_distance_values`] — Monte Carlo oracles and the
//!   sup-distance metric used for every figure-level comparison.

use crate::channel::{Stage1Model, Stage2Model};
use crate::covariance::FasConfig;
use crate::error::{FasError, Result};
use crate::quad::{adaptive_simpson, GaussLaguerre};
use crate::specfun::{log_one_minus_q1, Accuracy};
use std::f64::consts::SQRT_2;

/// Marcum budget for the evaluators: tight tolerance, roomy term cap so the
/// far quadrature nodes (huge noncentralities) still converge.
pub(crate) const EVAL_ACC: Accuracy = Accuracy {
    abs_tol: 1e-13,
    max_terms: 6000,
};

/// Sorted Monte Carlo samples with CDF evaluation.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(FasError::Domain("empirical CDF needs samples".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(FasError::Domain("empirical CDF samples must be finite".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= r`.
    pub fn eval(&self, r: f64) -> f64 {
        let count = self.sorted.partition_point(|&x| x <= r);
        count as f64 / self.sorted.len() as f64
    }

    /// Order-statistic quantile (`p` in `[0, 1]`).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }
}

/// Build the empirical CDF of the per-draw maximum of a sample batch.
pub fn empirical_cdf(batch: &crate::channel::ChannelSampleBatch) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(batch.max_gains())
}

/// An outage question: the magnitude below which the best port is in outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageQuery {
    pub config: FasConfig,
    pub threshold_magnitude: f64,
}

impl OutageQuery {
    /// Threshold from the config's SNR target: `r_th = sigma 10^{dB/20}`.
    pub fn new(config: FasConfig) -> Result<Self> {
        config.validate()?;
        Ok(OutageQuery {
            config,
            threshold_magnitude: config.threshold_magnitude(),
        })
    }

    /// Explicit threshold; must be consistent with the config's SNR target.
    pub fn with_threshold(config: FasConfig, threshold_magnitude: f64) -> Result<Self> {
        config.validate()?;
        if !(threshold_magnitude > 0.0) {
            return Err(FasError::Domain(
                "threshold magnitude must be positive".into(),
            ));
        }
        let implied = config.threshold_magnitude();
        if (threshold_magnitude - implied).abs() > 1e-9 * implied {
            return Err(FasError::Domain(format!(
                "threshold {threshold_magnitude} inconsistent with snr_target_db (expected {implied})"
            )));
        }
        Ok(OutageQuery {
            config,
            threshold_magnitude,
        })
    }
}

/// Scheme used for the semi-infinite single integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadScheme {
    GaussLaguerre,
    Adaptive,
}

/// Quadrature parameters for the deterministic evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub scheme: QuadScheme,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 96,
            scheme: QuadScheme::GaussLaguerre,
            rel_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(FasError::Config(format!(
                "quadrature needs at least 8 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(FasError::Config("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

/// One Monte Carlo CDF estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// How the first-stage latent pairs are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatentSampling {
    /// Counter-keyed ChaCha streams (the default, one stream per draw).
    Pseudo,
    /// Halton low-discrepancy points mapped through the normal quantile;
    /// the seed offsets the start index. The reported standard error is the
    /// usual sample estimate and is conservative for this scheme.
    Halton,
}

/// First-stage CDF on a grid of magnitudes, sharing the latent draws across
/// the whole grid.
///
/// Each draw samples the `2 x eps-rank` latents, forms the per-port
/// noncentrality `z_k`, and multiplies the conditional Rician CDFs
/// `1 - Q1(sqrt(2 z_k)/tau_k, sqrt(2) r/tau_k)` over ports in log domain.
/// The estimate at each grid point is the sample mean over draws, reported
/// with its standard error.
pub fn stage1_cdf_grid(
    model: &Stage1Model,
    r_grid: &[f64],
    mc_draws: usize,
    seed: u64,
) -> Result<Vec<CdfEstimate>> {
    stage1_cdf_grid_with(model, r_grid, mc_draws, seed, LatentSampling::Pseudo)
}

/// Grid evaluator with an explicit latent scheme.
pub fn stage1_cdf_grid_with(
    model: &Stage1Model,
    r_grid: &[f64],
    mc_draws: usize,
    seed: u64,
    sampling: LatentSampling,
) -> Result<Vec<CdfEstimate>> {
    if mc_draws < 100 {
        return Err(FasError::Domain(format!(
            "stage-1 Monte Carlo needs at least 100 draws, got {mc_draws}"
        )));
    }
    for &r in r_grid {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(FasError::Domain(format!("invalid magnitude {r} in grid")));
        }
    }
    let n = model.n_ports();
    let rank = model.eps_rank();
    let tau = model.residual_std();
    let beta: Vec<f64> = tau.iter().map(|t| SQRT_2 / t).collect();

    // grid points with r > 0 go through the kernel; r == 0 is exactly 0
    let active: Vec<usize> = (0..r_grid.len()).filter(|&j| r_grid[j] > 0.0).collect();
    let mut sums = vec![0.0f64; r_grid.len()];
    let mut sumsq = vec![0.0f64; r_grid.len()];

    let streams = crate::channel::latent_streams(seed);
    let halton = HaltonNormals::new(2 * rank, seed);
    let mut a = vec![0.0f64; rank];
    let mut b = vec![0.0f64; rank];
    let mut log_prod = vec![0.0f64; r_grid.len()];

    for d in 0..mc_draws {
        match sampling {
            LatentSampling::Pseudo => {
                let mut rng = streams.for_draw(d as u64);
                crate::channel::fill_latents(&mut rng, &mut a);
                crate::channel::fill_latents(&mut rng, &mut b);
            }
            LatentSampling::Halton => halton.fill(d, &mut a, &mut b),
        }
        for slot in log_prod.iter_mut() {
            *slot = 0.0;
        }
        for k in 0..n {
            let row = model.basis_row(k);
            let mut zr = 0.0;
            let mut zi = 0.0;
            for l in 0..rank {
                zr += row[l] * a[l];
                zi += row[l] * b[l];
            }
            let z = zr * zr + zi * zi;
            let alpha = (2.0 * z).sqrt() / tau[k];
            for &j in &active {
                log_prod[j] += log_one_minus_q1(alpha, beta[k] * r_grid[j], &EVAL_ACC)?;
            }
        }
        for &j in &active {
            let v = log_prod[j].exp();
            sums[j] += v;
            sumsq[j] += v * v;
        }
    }

    let nf = mc_draws as f64;
    Ok((0..r_grid.len())
        .map(|j| {
            let mean = sums[j] / nf;
            let var = ((sumsq[j] / nf - mean * mean).max(0.0)) * nf / (nf - 1.0);
            CdfEstimate {
                value: mean,
                std_error: (var / nf).sqrt(),
            }
        })
        .collect())
}

/// First-stage CDF at a single magnitude.
pub fn stage1_cdf(
    model: &Stage1Model,
    r: f64,
    mc_draws: usize,
    seed: u64,
) -> Result<CdfEstimate> {
    Ok(stage1_cdf_grid(model, &[r], mc_draws, seed)?[0])
}

/// First-stage outage probability: the CDF at the query threshold.
pub fn stage1_outage(
    model: &Stage1Model,
    query: &OutageQuery,
    mc_draws: usize,
    seed: u64,
) -> Result<CdfEstimate> {
    stage1_cdf(model, query.threshold_magnitude, mc_draws, seed)
}

/// Reusable second-stage evaluator: per-port constants plus the quadrature
/// rules, so CDF sweeps do not rebuild the Laguerre nodes at every point.
pub struct Stage2Evaluator {
    replication: f64,
    /// per port: (alpha scale `sqrt(2 m_k)/tau_k`, magnitude scale `sqrt2/tau_k`)
    ports: Vec<(f64, f64)>,
    scheme: QuadScheme,
    rel_tol: f64,
    rule: Option<GaussLaguerre>,
    rule_check: Option<GaussLaguerre>,
    /// Largest node of the base rule; fixes the rescaling for both rules so
    /// the node-doubling check compares estimates of the same integral form.
    base_max_node: f64,
}

impl Stage2Evaluator {
    pub fn new(model: &Stage2Model, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        let stage1 = model.stage1();
        let ports = (0..stage1.n_ports())
            .map(|k| {
                let m = stage1.mixture_power()[k];
                let t = stage1.residual_std()[k];
                ((2.0 * m.max(0.0)).sqrt() / t, SQRT_2 / t)
            })
            .collect();
        let (rule, rule_check) = match quad.scheme {
            QuadScheme::GaussLaguerre => (
                Some(GaussLaguerre::new(quad.nodes)?),
                Some(GaussLaguerre::new(2 * quad.nodes)?),
            ),
            QuadScheme::Adaptive => (None, None),
        };
        let base_max_node = rule.as_ref().map(|r| r.max_node()).unwrap_or(1.0);
        Ok(Stage2Evaluator {
            replication: model.replication() as f64,
            ports,
            scheme: quad.scheme,
            rel_tol: quad.rel_tol,
            rule,
            rule_check,
            base_max_node,
        })
    }

    /// Mass of `e^{-u} (1 - Q1(alpha sqrt(u), b))^R` effectively ends where
    /// the Rician miss probability has decayed ~`e^{-50}`:
    /// `u_end = ((b + 10/sqrt(R)) / alpha)^2`.
    fn mass_end(&self, alpha_scale: f64, b: f64) -> f64 {
        let t = (b + 10.0 / self.replication.sqrt()) / alpha_scale;
        t * t
    }

    /// `ln F(r)`: the sum over ports of `ln(single integral) / R`.
    ///
    /// Each port integral is rescaled as `u = s v` so that its mass spans a
    /// fixed fraction of the node range instead of hiding between the first
    /// nodes (small residual scales concentrate everything near `u = 0`).
    /// The rescaled terms `w_i e^{(1-s) u_i} phi(s u_i)` are assembled in
    /// log form; they are bounded by `e^{-s u_i} poly` so nothing overflows.
    fn log_cdf_with_rule(&self, r: f64, rule: &GaussLaguerre) -> Result<f64> {
        let span = 0.35 * self.base_max_node;
        let mut log_f = 0.0f64;
        for &(alpha_scale, beta) in &self.ports {
            let b = beta * r;
            if alpha_scale < 1e-150 {
                // no shared-latent power at this port: the factor is the
                // plain Rician CDF, no integral needed
                log_f += log_one_minus_q1(0.0, b, &EVAL_ACC)?;
                continue;
            }
            let s = (self.mass_end(alpha_scale, b) / span).clamp(1e-280, 1.0);
            let mut integral = 0.0f64;
            for (&u, &lw) in rule.nodes().iter().zip(rule.log_weights()) {
                let lq = log_one_minus_q1(alpha_scale * (s * u).sqrt(), b, &EVAL_ACC)?;
                integral += (lw + (1.0 - s) * u + self.replication * lq).exp();
            }
            log_f += (s.ln() + integral.ln()) / self.replication;
        }
        Ok(log_f)
    }

    fn log_cdf_adaptive(&self, r: f64) -> Result<f64> {
        let mut log_f = 0.0f64;
        for &(alpha_scale, beta) in &self.ports {
            let b = beta * r;
            let mut kernel_err: Option<FasError> = None;
            let mut f = |v: f64| -> f64 {
                if v <= 0.0 {
                    return 0.0;
                }
                let u = -v.ln();
                match log_one_minus_q1(alpha_scale * u.max(0.0).sqrt(), b, &EVAL_ACC) {
                    Ok(lq) => (self.replication * lq).exp(),
                    Err(e) => {
                        kernel_err.get_or_insert(e);
                        0.0
                    }
                }
            };
            let integral = adaptive_simpson(&mut f, 0.0, 1.0, self.rel_tol, 40)?;
            if let Some(e) = kernel_err {
                return Err(e);
            }
            log_f += integral.ln() / self.replication;
        }
        Ok(log_f)
    }

    /// Deterministic CDF value in `[0, 1]`.
    ///
    /// Under the Gauss-Laguerre scheme the value is recomputed with twice
    /// the nodes; disagreement beyond `rel_tol` (in log domain, i.e.
    /// relative on the CDF) is an accuracy error reporting both values.
    pub fn cdf(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(FasError::Domain(format!("invalid magnitude {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        match self.scheme {
            QuadScheme::GaussLaguerre => {
                let l1 = self.log_cdf_with_rule(r, self.rule.as_ref().unwrap())?;
                let l2 = self.log_cdf_with_rule(r, self.rule_check.as_ref().unwrap())?;
                let both_zero = l1 == f64::NEG_INFINITY && l2 == f64::NEG_INFINITY;
                let negligible = l1.max(l2) < -600.0;
                if !both_zero && !negligible && (l1 - l2).abs() > self.rel_tol * (1.0 + l2.abs())
                {
                    return Err(FasError::Accuracy {
                        message: format!(
                            "Gauss-Laguerre self-check failed at r = {r}: F_n = {:e}, F_2n = {:e}",
                            l1.exp(),
                            l2.exp()
                        ),
                        partial: l2.exp(),
                        error_estimate: (l1.exp() - l2.exp()).abs(),
                    });
                }
                Ok(l2.exp().clamp(0.0, 1.0))
            }
            QuadScheme::Adaptive => Ok(self.log_cdf_adaptive(r)?.exp().clamp(0.0, 1.0)),
        }
    }
}

/// Second-stage CDF at one magnitude (builds the evaluator on the fly; use
/// [`Stage2Evaluator`] directly for sweeps).
pub fn stage2_cdf(model: &Stage2Model, r: f64, quad: &QuadratureSpec) -> Result<f64> {
    Stage2Evaluator::new(model, quad)?.cdf(r)
}

/// Second-stage outage probability: the CDF at the query threshold.
pub fn stage2_outage(model: &Stage2Model, query: &OutageQuery, quad: &QuadratureSpec) -> Result<f64> {
    stage2_cdf(model, query.threshold_magnitude, quad)
}

/// CDF of the reference single-shared-latent model at magnitude `r`.
///
/// Port 1 equals `sigma` times the latent, so conditioning on the latent
/// power `z ~ Exp(1)` truncates the integral at `r^2 / sigma^2`:
///
/// ```text
/// F(r) = int_0^{r^2/sigma^2} e^{-z} prod_{k=2}^{N}
///        (1 - Q1(mu_k sqrt(2z)/sqrt(1-mu_k^2),
///                sqrt(2) r / (sigma sqrt(1-mu_k^2)))) dz
/// ```
pub fn reference_fas1_cdf(config: &FasConfig, r: f64, quad: &QuadratureSpec) -> Result<f64> {
    config.validate()?;
    quad.validate()?;
    if config.n_ports < 2 {
        return Err(FasError::Domain(
            "the reference model needs at least 2 ports".into(),
        ));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(FasError::Domain(format!("invalid magnitude {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let n = config.n_ports;
    let sigma = config.sigma2.sqrt();
    let c = config.spacing_ratio();
    let mut alpha_coef = Vec::with_capacity(n - 1);
    let mut b_arg = Vec::with_capacity(n - 1);
    for k in 1..n {
        let mu = crate::specfun::bessel::j0(2.0 * std::f64::consts::PI * k as f64 * c);
        let res = 1.0 - mu * mu;
        if res <= 0.0 {
            return Err(FasError::Domain(format!(
                "degenerate residual at port {}: |mu| = {}",
                k + 1,
                mu.abs()
            )));
        }
        let denom = res.sqrt();
        alpha_coef.push(mu * SQRT_2 / denom);
        b_arg.push(SQRT_2 * r / (sigma * denom));
    }
    let z_max = r * r / config.sigma2;
    let mut kernel_err: Option<FasError> = None;
    let mut f = |z: f64| -> f64 {
        let sz = z.max(0.0).sqrt();
        let mut log_p = -z;
        for (ac, bk) in alpha_coef.iter().zip(&b_arg) {
            match log_one_minus_q1((ac * sz).abs(), *bk, &EVAL_ACC) {
                Ok(lq) => log_p += lq,
                Err(e) => {
                    kernel_err.get_or_insert(e);
                    return 0.0;
                }
            }
        }
        log_p.exp()
    };
    let value = adaptive_simpson(&mut f, 0.0, z_max, quad.rel_tol, 40)?;
    if let Some(e) = kernel_err {
        return Err(e);
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Reference-model outage probability at the query threshold.
pub fn reference_outage_fas1(
    config: &FasConfig,
    query: &OutageQuery,
    quad: &QuadratureSpec,
) -> Result<f64> {
    reference_fas1_cdf(config, query.threshold_magnitude, quad)
}

/// Uniform comparison grid from 0 to the oracle's 99.99th percentile.
pub fn default_ks_grid(oracle: &EmpiricalCdf, points: usize) -> Vec<f64> {
    let upper = oracle.quantile(0.9999);
    let p = points.max(2);
    (0..p).map(|i| upper * i as f64 / (p - 1) as f64).collect()
}

/// Number of grid points behind every figure-level KS comparison.
pub const KS_GRID_POINTS: usize = 512;

/// Sup distance between two CDF evaluations on a shared grid.
pub fn ks_distance_values(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sup distance between two closures over a grid.
pub fn ks_distance_fn(
    mut f: impl FnMut(f64) -> f64,
    mut g: impl FnMut(f64) -> f64,
    grid: &[f64],
) -> f64 {
    grid.iter()
        .map(|&r| (f(r) - g(r)).abs())
        .fold(0.0, f64::max)
}

/// The 1-alpha Dvoretzky-Kiefer-Wolfowitz band half-width for `n` samples.
pub fn dkw_bound(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Halton points in `[0,1)^dim` mapped through the normal quantile to
/// variance-1/2 latents.
struct HaltonNormals {
    bases: Vec<u64>,
    offset: usize,
}

impl HaltonNormals {
    fn new(dim: usize, seed: u64) -> Self {
        const PRIMES: [u64; 20] = [
            2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
        ];
        let bases = (0..dim).map(|i| PRIMES[i % PRIMES.len()]).collect();
        HaltonNormals {
            bases,
            offset: (seed % 65_536) as usize,
        }
    }

    fn fill(&self, draw: usize, a: &mut [f64], b: &mut [f64]) {
        let index = (draw + self.offset + 1) as u64;
        let rank = a.len();
        for l in 0..rank {
            a[l] = normal_quantile(radical_inverse(index, self.bases[l]))
                * std::f64::consts::FRAC_1_SQRT_2;
            b[l] = normal_quantile(radical_inverse(index, self.bases[rank + l]))
                * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 0.0f64;
    let mut denom = 1.0f64;
    while i > 0 {
        denom *= base as f64;
        inv += (i % base) as f64 / denom;
        i /= base;
    }
    // keep strictly inside (0, 1) for the quantile map
    inv.clamp(1e-12, 1.0 - 1e-12)
}

/// Acklam's rational approximation of the standard normal quantile
/// (absolute error below 1.2e-9; plenty for a variance-reduction option).
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_exact, Stage1Model};
    use crate::covariance::SpectralModel;
    use std::sync::Arc;

    fn stage1(n: usize, w: f64, s2: f64, rank: usize) -> Stage1Model {
        let sp = SpectralModel::new(FasConfig::new(n, w, s2, 0.0).unwrap()).unwrap();
        Stage1Model::new(Arc::new(sp), rank).unwrap()
    }

    #[test]
    fn empirical_cdf_basics() {
        let cdf = EmpiricalCdf::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(cdf.eval(0.5), 0.0);
        assert!((cdf.eval(1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((cdf.eval(2.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cdf.eval(10.0), 1.0);
        assert!(EmpiricalCdf::new(vec![]).is_err());
        assert!(EmpiricalCdf::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn rayleigh_empirical_within_dkw() {
        // N = 1: |g| is Rayleigh with E|g|^2 = sigma^2.
        let sp = SpectralModel::new(FasConfig::new(1, 1.0, 1.0, 0.0).unwrap()).unwrap();
        let batch = sample_exact(&sp, 200_000, 321).unwrap();
        let emp = empirical_cdf(&batch).unwrap();
        let bound = dkw_bound(200_000, 0.01);
        let grid = default_ks_grid(&emp, KS_GRID_POINTS);
        let ks = ks_distance_fn(
            |r| emp.eval(r),
            |r| 1.0 - (-r * r).exp(),
            &grid,
        );
        assert!(ks < bound, "ks {ks} vs dkw {bound}");
    }

    #[test]
    fn stage1_cdf_edges() {
        let m = stage1(10, 1.0, 10.0, 3);
        let z = stage1_cdf(&m, 0.0, 200, 5).unwrap();
        assert_eq!(z.value, 0.0);
        let hi = stage1_cdf(&m, 60.0, 200, 5).unwrap();
        assert!(hi.value > 0.999999, "{}", hi.value);
        assert!(stage1_cdf(&m, -1.0, 200, 5).is_err());
        assert!(stage1_cdf(&m, 1.0, 50, 5).is_err());
    }

    #[test]
    fn stage1_outage_equals_cdf_at_threshold() {
        let m = stage1(10, 1.0, 10.0, 3);
        let cfg = *m.spectral().config();
        let query = OutageQuery::new(cfg).unwrap();
        let a = stage1_outage(&m, &query, 400, 9).unwrap();
        let b = stage1_cdf(&m, query.threshold_magnitude, 400, 9).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn stage2_cdf_edges_and_determinism() {
        let s1 = stage1(10, 1.0, 10.0, 3);
        let m = Stage2Model::new(s1, 4).unwrap();
        let quad = QuadratureSpec::default();
        assert_eq!(stage2_cdf(&m, 0.0, &quad).unwrap(), 0.0);
        let hi = stage2_cdf(&m, 50.0, &quad).unwrap();
        assert!(hi > 0.999999);
        let a = stage2_cdf(&m, 3.0, &quad).unwrap();
        let b = stage2_cdf(&m, 3.0, &quad).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        // monotone on a coarse grid
        let eval = Stage2Evaluator::new(&m, &quad).unwrap();
        let mut prev = 0.0;
        for i in 0..40 {
            let v = eval.cdf(0.4 * i as f64).unwrap();
            assert!(v + 1e-12 >= prev);
            prev = v;
        }
    }

    #[test]
    fn stage2_adaptive_scheme_agrees_with_laguerre() {
        let s1 = stage1(6, 0.8, 2.0, 2);
        let m = Stage2Model::new(s1, 3).unwrap();
        let gl = QuadratureSpec::default();
        let ad = QuadratureSpec {
            scheme: QuadScheme::Adaptive,
            ..Default::default()
        };
        for &r in &[0.5, 1.0, 1.8, 3.0] {
            let a = stage2_cdf(&m, r, &gl).unwrap();
            let b = stage2_cdf(&m, r, &ad).unwrap();
            assert!((a - b).abs() < 1e-6 * (1.0 + a), "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_cdf_edges() {
        let cfg = FasConfig::new(10, 1.0, 10.0, 0.0).unwrap();
        let quad = QuadratureSpec::default();
        assert_eq!(reference_fas1_cdf(&cfg, 0.0, &quad).unwrap(), 0.0);
        let hi = reference_fas1_cdf(&cfg, 40.0, &quad).unwrap();
        assert!(hi > 0.999, "{hi}");
        let mut prev = 0.0;
        for i in 0..30 {
            let v = reference_fas1_cdf(&cfg, 0.3 * i as f64, &quad).unwrap();
            assert!(v + 1e-12 >= prev, "not monotone at {i}");
            prev = v;
        }
    }

    #[test]
    fn halton_agrees_with_pseudo() {
        let m = stage1(8, 1.0, 10.0, 2);
        let grid = [1.0, 2.5, 4.0];
        let mc = stage1_cdf_grid(&m, &grid, 4000, 17).unwrap();
        let qmc =
            stage1_cdf_grid_with(&m, &grid, 4000, 17, LatentSampling::Halton).unwrap();
        for (a, b) in mc.iter().zip(&qmc) {
            assert!(
                (a.value - b.value).abs() < 4.0 * (a.std_error + 1e-3),
                "{} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn ks_identical_inputs_is_zero() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let f = |r: f64| 1.0 - (-r).exp();
        assert_eq!(ks_distance_fn(f, f, &grid), 0.0);
    }

    #[test]
    fn normal_quantile_sanity() {
        assert!((normal_quantile(0.5)).abs() < 1e-9);
        assert!((normal_quantile(0.975) - 1.959964).abs() < 1e-5);
        assert!((normal_quantile(0.025) + 1.959964).abs() < 1e-5);
    }
}
