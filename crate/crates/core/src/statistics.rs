//! Sojourn histograms, exact stationary densities, time-average trackers and
//! the Gaussian / first-integral monitors used to check the samplers.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EtaMode, ExtendedState, NoiseConfig};
use crate::error::{Error, Result};
use crate::model::{
    energy_functional, local_potential, local_potential_d1, local_potential_d2, LatticeSpec,
    NonlinearityParams,
};

/// Number of batches used for batch-means standard errors.
pub const NUM_BATCHES: usize = 16;

/// Fixed-width histogram on `[lo, hi)`; values outside (or NaN) land in `out_of_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    total: u64,
    out_of_range: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bins", "need at least one bin"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "lo/hi",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self {
            lo,
            hi,
            counts: vec![0; bins],
            total: 0,
            out_of_range: 0,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn out_of_range(&self) -> u64 {
        self.out_of_range
    }

    pub fn in_range(&self) -> u64 {
        self.total - self.out_of_range
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    /// Left and right edges of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.width();
        let left = self.lo + w * i as f64;
        let right = if i + 1 == self.bins() {
            self.hi
        } else {
            self.lo + w * (i + 1) as f64
        };
        (left, right)
    }

    #[inline]
    pub fn accumulate(&mut self, value: f64) {
        self.total += 1;
        if value >= self.lo && value < self.hi {
            let idx = ((value - self.lo) / (self.hi - self.lo) * self.bins() as f64) as usize;
            // rounding can push values just below hi into a non-existent bin
            let idx = idx.min(self.bins() - 1);
            self.counts[idx] += 1;
        } else {
            self.out_of_range += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.bins() != other.bins() {
            return Err(Error::DomainMismatch(format!(
                "cannot merge [{}, {}]x{} with [{}, {}]x{}",
                self.lo,
                self.hi,
                self.bins(),
                other.lo,
                other.hi,
                other.bins()
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.out_of_range += other.out_of_range;
        Ok(())
    }

    /// Fraction of in-range samples per bin; sums to 1 when any sample is in range.
    pub fn bin_masses(&self) -> Vec<f64> {
        let n = self.in_range();
        if n == 0 {
            return vec![0.0; self.bins()];
        }
        self.counts.iter().map(|&c| c as f64 / n as f64).collect()
    }

    /// In-range density; integrates to 1 over `[lo, hi]`.
    pub fn density(&self) -> Vec<f64> {
        let w = self.width();
        self.bin_masses().into_iter().map(|m| m / w).collect()
    }

    /// Empirical in-range mass strictly below `x`, interpolating within the bin.
    pub fn mass_below(&self, x: f64) -> f64 {
        let masses = self.bin_masses();
        let mut acc = 0.0;
        for (i, m) in masses.iter().enumerate() {
            let (left, right) = self.edges(i);
            if x >= right {
                acc += m;
            } else if x > left {
                acc += m * (x - left) / (right - left);
            }
        }
        acc
    }
}

/// Composite Simpson integral of uniformly spaced samples (odd count ≥ 3).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len();
    debug_assert!(m >= 3 && m % 2 == 1);
    let mut odd = 0.0;
    let mut even = 0.0;
    for (j, v) in values.iter().enumerate().take(m - 1).skip(1) {
        if j % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[m - 1])
}

/// A normalized density sampled on a uniform grid spanning `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub lo: f64,
    pub hi: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Partition constant of the unnormalized density on `[lo, hi]`.
    pub norm: f64,
}

impl DensityGrid {
    pub(crate) fn check_grid(lo: f64, hi: f64, m: usize) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "lo/hi",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        if m < 3 || m.is_multiple_of(2) {
            return Err(Error::invalid(
                "m",
                format!("grid size must be odd and >= 3, got {m}"),
            ));
        }
        Ok(())
    }

    pub(crate) fn uniform_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        let h = (hi - lo) / (m - 1) as f64;
        (0..m).map(|j| lo + h * j as f64).collect()
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.grid.len() - 1) as f64
    }

    pub fn integral(&self) -> f64 {
        simpson(&self.values, self.step())
    }

    /// `∫ f(u) ρ(u) du` by Simpson on the grid.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let weighted: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(&u, &r)| f(u) * r)
            .collect();
        simpson(&weighted, self.step())
    }

    /// Mass in each of `bins` equal cells, by Simpson within each cell.
    /// The grid must have an even number of intervals per cell.
    pub fn bin_masses(&self, bins: usize) -> Result<Vec<f64>> {
        let intervals = self.grid.len() - 1;
        if bins == 0 || !intervals.is_multiple_of(2 * bins) {
            return Err(Error::DomainMismatch(format!(
                "grid of {} intervals is not aligned with {bins} bins",
                intervals
            )));
        }
        let per = intervals / bins;
        let h = self.step();
        Ok((0..bins)
            .map(|b| simpson(&self.values[b * per..=(b + 1) * per], h))
            .collect())
    }

    /// `∫ |ρ - σ| du` against a density on the same grid.
    pub fn l1_to(&self, other: &DensityGrid) -> Result<f64> {
        if self.grid.len() != other.grid.len() || self.lo != other.lo || self.hi != other.hi {
            return Err(Error::DomainMismatch("density grids differ".into()));
        }
        let diff: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(simpson(&diff, self.step()))
    }
}

/// Single-cell stationary density `ρ(u) = Z⁻¹ exp(-V(u)/D)` restricted to `[lo, hi]`.
pub fn exact_density(
    p: &NonlinearityParams,
    d: f64,
    lo: f64,
    hi: f64,
    m: usize,
) -> Result<DensityGrid> {
    DensityGrid::check_grid(lo, hi, m)?;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::invalid("D", format!("must be positive, got {d}")));
    }
    let grid = DensityGrid::uniform_grid(lo, hi, m);
    let exponent: Vec<f64> = grid.iter().map(|&u| -local_potential(u, p) / d).collect();
    let shift = exponent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut values: Vec<f64> = exponent.iter().map(|e| (e - shift).exp()).collect();
    let h = (hi - lo) / (m - 1) as f64;
    let integral = simpson(&values, h);
    if !(integral.is_finite() && integral > 0.0) {
        return Err(Error::Divergence {
            variable: "exact density normalization".into(),
            time: None,
        });
    }
    values.iter_mut().for_each(|v| *v /= integral);
    Ok(DensityGrid {
        lo,
        hi,
        grid,
        values,
        norm: integral * shift.exp(),
    })
}

/// Exact density on a grid aligned with `h`'s bins (`refine` Simpson panels per bin).
pub fn exact_density_for(
    h: &Histogram,
    p: &NonlinearityParams,
    d: f64,
    refine: usize,
) -> Result<DensityGrid> {
    let m = h.bins() * 2 * refine.max(1) + 1;
    exact_density(p, d, h.lo(), h.hi(), m)
}

/// `Σ_bins |empirical mass - exact mass|`, in `[0, 2]`.
pub fn l1_distance(h: &Histogram, d: &DensityGrid) -> Result<f64> {
    if h.lo() != d.lo || h.hi() != d.hi {
        return Err(Error::DomainMismatch(format!(
            "histogram on [{}, {}] vs density on [{}, {}]",
            h.lo(),
            h.hi(),
            d.lo,
            d.hi
        )));
    }
    let exact = d.bin_masses(h.bins())?;
    Ok(h.bin_masses()
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// `Σ_bins |mass_a - mass_b|` between two histograms on the same bins.
pub fn histogram_l1(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.lo() != b.lo() || a.hi() != b.hi() || a.bins() != b.bins() {
        return Err(Error::DomainMismatch(
            "histograms use different bins".into(),
        ));
    }
    Ok(a.bin_masses()
        .iter()
        .zip(b.bin_masses())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// `∫ (V')² ρ du - D ∫ V'' ρ du` for the single-cell stationary density.
///
/// Vanishes up to quadrature error and boundary flux; choose `[lo, hi]` wide
/// enough that `ρ` is negligible at both ends.
pub fn fd_quadrature_residual(
    p: &NonlinearityParams,
    d: f64,
    lo: f64,
    hi: f64,
    m: usize,
) -> Result<f64> {
    let rho = exact_density(p, d, lo, hi, m)?;
    let grad_sq = rho.expectation(|u| local_potential_d1(u, p).powi(2));
    let curv = rho.expectation(|u| local_potential_d2(u, p));
    Ok(grad_sq - d * curv)
}

/// Quantities tracked along trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `Σ (∂_i E)²`
    GradSq,
    /// `Σ ∂_i² E`
    HessTrace,
    /// `λ Σ ∂_i² E`
    LambdaHess,
    /// `Σ η_i ∂_i E` (synchronous: `η Σ ∂_i E`)
    EtaGrad,
    Lambda,
    LambdaSq,
    /// Mean of the η components.
    Eta,
    /// Mean of the squared η components.
    EtaSq,
    Energy,
    FirstIntegral,
}

impl Observable {
    pub const COUNT: usize = 10;

    pub const ALL: [Observable; Observable::COUNT] = [
        Observable::GradSq,
        Observable::HessTrace,
        Observable::LambdaHess,
        Observable::EtaGrad,
        Observable::Lambda,
        Observable::LambdaSq,
        Observable::Eta,
        Observable::EtaSq,
        Observable::Energy,
        Observable::FirstIntegral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::GradSq => "grad_sq",
            Observable::HessTrace => "hess_trace",
            Observable::LambdaHess => "lambda_hess",
            Observable::EtaGrad => "eta_grad",
            Observable::Lambda => "lambda",
            Observable::LambdaSq => "lambda_sq",
            Observable::Eta => "eta",
            Observable::EtaSq => "eta_sq",
            Observable::Energy => "energy",
            Observable::FirstIntegral => "first_integral",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One record of every tracked observable.
pub type Record = [f64; Observable::COUNT];

/// A time average with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value| ≤ k · std_error`
    pub fn within(&self, k: f64) -> bool {
        self.value.abs() <= k * self.std_error
    }
}

/// Running sums of every observable plus closed batches for standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningAverages {
    batch_len: u64,
    count: u64,
    sums: Record,
    open: Record,
    open_count: u64,
    batches: Vec<Record>,
}

impl RunningAverages {
    /// Tracker closing a batch every `batch_len` records.
    pub fn new(batch_len: u64) -> Self {
        Self {
            batch_len: batch_len.max(1),
            count: 0,
            sums: [0.0; Observable::COUNT],
            open: [0.0; Observable::COUNT],
            open_count: 0,
            batches: Vec::new(),
        }
    }

    /// Tracker sized for `expected` records split into [`NUM_BATCHES`] batches.
    pub fn for_records(expected: u64) -> Self {
        Self::new(expected / NUM_BATCHES as u64)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn push(&mut self, record: &Record) {
        for ((sum, open), &x) in self.sums.iter_mut().zip(&mut self.open).zip(record) {
            *sum += x;
            *open += x;
        }
        self.count += 1;
        self.open_count += 1;
        if self.open_count == self.batch_len {
            self.close_batch();
        }
    }

    fn close_batch(&mut self) {
        let c = self.open_count as f64;
        self.batches.push(self.open.map(|x| x / c));
        self.open = [0.0; Observable::COUNT];
        self.open_count = 0;
    }

    /// Combine with another tracker; batches are concatenated in order.
    pub fn merge(&mut self, other: &RunningAverages) {
        for k in 0..Observable::COUNT {
            self.sums[k] += other.sums[k];
            self.open[k] += other.open[k];
        }
        self.count += other.count;
        self.open_count += other.open_count;
        self.batches.extend_from_slice(&other.batches);
        if self.open_count >= self.batch_len {
            self.close_batch();
        }
    }

    pub fn mean(&self, obs: Observable) -> f64 {
        self.sums[obs.index()] / self.count as f64
    }

    /// Time average of `Σ_k c_k · obs_k` with a batch-means standard error.
    pub fn linear(&self, terms: &[(f64, Observable)]) -> Estimate {
        let combine = |r: &Record| terms.iter().map(|&(c, o)| c * r[o.index()]).sum::<f64>();
        let value = combine(&self.sums) / self.count as f64;
        let b = self.batches.len();
        let std_error = if b < 2 {
            f64::INFINITY
        } else {
            let means: Vec<f64> = self.batches.iter().map(combine).collect();
            let m = means.iter().sum::<f64>() / b as f64;
            let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
            (var / b as f64).sqrt()
        };
        Estimate { value, std_error }
    }

    pub fn estimate(&self, obs: Observable) -> Estimate {
        self.linear(&[(1.0, obs)])
    }
}

/// `-⟨Σ(∂_i E)²⟩ + D ⟨Σ ∂_i² E⟩` with its batch-means standard error.
pub fn fd_residual(avg: &RunningAverages, d: f64) -> Result<Estimate> {
    if avg.count() == 0 {
        return Err(Error::invalid("averages", "no records accumulated"));
    }
    Ok(avg.linear(&[(-1.0, Observable::GradSq), (d, Observable::HessTrace)]))
}

/// `I = E[u] + ½ Q_λ λ² + ½ Q_η Σ η_i² - D ζ`, conserved by the deterministic extended dynamics.
pub fn first_integral(
    x: &ExtendedState,
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<f64> {
    x.check_shape(spec, cfg.eta_mode)?;
    let energy = energy_functional(&x.u, spec, p)?;
    let eta_sq: f64 = x.eta.iter().map(|e| e * e).sum();
    Ok(
        energy + 0.5 * cfg.q_lambda * x.lambda * x.lambda + 0.5 * cfg.q_eta * eta_sq
            - cfg.d * x.zeta,
    )
}

/// Fill one [`Record`] from an extended state and its gradient / Hessian trace.
pub fn extended_record(
    x: &ExtendedState,
    grad: &[f64],
    hess_trace: f64,
    energy: f64,
    cfg: &NoiseConfig,
) -> Record {
    let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
    let eta_grad = match cfg.eta_mode {
        EtaMode::Independent => x.eta.iter().zip(grad).map(|(e, g)| e * g).sum(),
        EtaMode::Synchronous => x.eta[0] * grad.iter().sum::<f64>(),
    };
    let ne = x.eta.len() as f64;
    let eta_sq: f64 = x.eta.iter().map(|e| e * e).sum();
    let mut r = [0.0; Observable::COUNT];
    r[Observable::GradSq.index()] = grad_sq;
    r[Observable::HessTrace.index()] = hess_trace;
    r[Observable::LambdaHess.index()] = x.lambda * hess_trace;
    r[Observable::EtaGrad.index()] = eta_grad;
    r[Observable::Lambda.index()] = x.lambda;
    r[Observable::LambdaSq.index()] = x.lambda * x.lambda;
    r[Observable::Eta.index()] = x.eta.iter().sum::<f64>() / ne;
    r[Observable::EtaSq.index()] = eta_sq / ne;
    r[Observable::Energy.index()] = energy;
    r[Observable::FirstIntegral.index()] =
        energy + 0.5 * cfg.q_lambda * x.lambda * x.lambda + 0.5 * cfg.q_eta * eta_sq
            - cfg.d * x.zeta;
    r
}

/// Record for a Langevin state; thermostat observables are zero.
pub fn langevin_record(grad: &[f64], hess_trace: f64, energy: f64) -> Record {
    let mut r = [0.0; Observable::COUNT];
    r[Observable::GradSq.index()] = grad.iter().map(|g| g * g).sum();
    r[Observable::HessTrace.index()] = hess_trace;
    r[Observable::Energy.index()] = energy;
    r[Observable::FirstIntegral.index()] = energy;
    r
}

/// Online mean and central moments up to fourth order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let mut m = Self::new();
        xs.iter().for_each(|&x| m.push(x));
        m
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        self.mean += delta * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        self.m2 / self.n as f64
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.n as f64 * self.m4 / (self.m2 * self.m2) - 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianThresholds {
    pub min_samples: u64,
    /// Mean must satisfy `|mean| < mean_se_factor · SE`.
    pub mean_se_factor: f64,
    pub variance_rel: f64,
    pub kurtosis_abs: f64,
}

impl Default for GaussianThresholds {
    fn default() -> Self {
        Self {
            min_samples: 10_000,
            mean_se_factor: 3.0,
            variance_rel: 0.05,
            kurtosis_abs: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianReport {
    pub count: u64,
    pub mean: f64,
    pub mean_std_error: f64,
    pub variance: f64,
    pub expected_variance: f64,
    pub excess_kurtosis: f64,
    pub mean_ok: bool,
    pub variance_ok: bool,
    pub kurtosis_ok: bool,
    pub pass: bool,
}

/// Check that samples look like `N(0, expected_var)`.
///
/// `mean_std_error` should account for autocorrelation (e.g. batch means);
/// pass `None` to use the i.i.d. value `sqrt(var / n)`.
pub fn gaussian_check(
    moments: &Moments,
    mean_std_error: Option<f64>,
    expected_var: f64,
    thresholds: &GaussianThresholds,
) -> Result<GaussianReport> {
    if moments.count() < thresholds.min_samples {
        return Err(Error::invalid(
            "samples",
            format!(
                "need at least {} samples, got {}",
                thresholds.min_samples,
                moments.count()
            ),
        ));
    }
    let variance = moments.variance();
    let se = mean_std_error.unwrap_or_else(|| (variance / moments.count() as f64).sqrt());
    let kurt = moments.excess_kurtosis();
    let mean_ok = moments.mean().abs() < thresholds.mean_se_factor * se;
    let variance_ok = (variance / expected_var - 1.0).abs() < thresholds.variance_rel;
    let kurtosis_ok = kurt.abs() < thresholds.kurtosis_abs;
    Ok(GaussianReport {
        count: moments.count(),
        mean: moments.mean(),
        mean_std_error: se,
        variance,
        expected_variance: expected_var,
        excess_kurtosis: kurt,
        mean_ok,
        variance_ok,
        kurtosis_ok,
        pass: mean_ok && variance_ok && kurtosis_ok,
    })
}

/// [`gaussian_check`] on a sample slice, with a batch-means standard error for the mean.
pub fn gaussian_check_samples(
    samples: &[f64],
    expected_var: f64,
    thresholds: &GaussianThresholds,
) -> Result<GaussianReport> {
    let moments = Moments::from_samples(samples);
    let batch = samples.len() / NUM_BATCHES;
    let se = if batch == 0 {
        None
    } else {
        let means: Vec<f64> = samples
            .chunks_exact(batch)
            .take(NUM_BATCHES)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        let m = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
        Some((var / means.len() as f64).sqrt())
    };
    gaussian_check(&moments, se, expected_var, thresholds)
}
