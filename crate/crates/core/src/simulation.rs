//! Synthetic stationary graph signals built from Laplacian eigenvectors plus
//! i.i.d. Gaussian noise, the two reference scenarios, and a Monte-Carlo
//! estimate of reconstruction error.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::graph::{build_laplacian, builtin_karate, knn_gaussian_graph, Graph, Metric, ShiftOperator};
use crate::linalg::{CMatrix, C64};
use crate::pca::{fit, select_q, AnalysisReport, GFreqPcaModel, QPolicy};
use crate::signal::{default_labels, MultivariateGraphSignal};
use crate::spectral::{
    assemble_spectral_matrices, Estimator, SpectralMatrixField, WindowEnsemble,
    DEFAULT_WINDOW_COUNT, DEFAULT_WINDOW_VARIANCE,
};

const US_SENSOR_COORDS: &str = include_str!("../data/us_sensor_coords.csv");
pub const US_SENSOR_VERTICES: usize = 218;
pub const US_SENSOR_NEIGHBORS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphChoice {
    Karate,
    UsSensor,
    Custom,
}

/// One basis signal `amplitude · v_k` with `k` a 1-based frequency index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub freq_index: usize,
    pub amplitude: f64,
}

/// `X_i = Σ_k c_ik v_k + σ s_i δ_i` with δ_i standard normal per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModel {
    pub graph: GraphChoice,
    pub labels: Vec<String>,
    pub components: Vec<Vec<Component>>,
    pub sigma: f64,
    pub noise_scale: Vec<f64>,
    pub seed: u64,
}

fn comps(list: &[(usize, f64)]) -> Vec<Component> {
    list.iter()
        .map(|&(freq_index, amplitude)| Component {
            freq_index,
            amplitude,
        })
        .collect()
}

/// Twelve dimensions on the karate club Laplacian: 1-3 on v_10, 4-6 on
/// v_20, 7-9 on both, 10-12 noise only; σ = 0.5.
pub fn karate_model() -> SyntheticModel {
    let components = vec![
        comps(&[(10, 1.0)]),
        comps(&[(10, 2.5)]),
        comps(&[(10, 3.5)]),
        comps(&[(20, 2.0)]),
        comps(&[(20, 1.7)]),
        comps(&[(20, 3.2)]),
        comps(&[(10, 2.1), (20, 0.9)]),
        comps(&[(10, 1.4), (20, 2.0)]),
        comps(&[(10, 2.5), (20, 2.2)]),
        vec![],
        vec![],
        vec![],
    ];
    SyntheticModel {
        graph: GraphChoice::Karate,
        labels: default_labels(12),
        components,
        sigma: 0.5,
        noise_scale: vec![1.0; 12],
        seed: 0,
    }
}

/// Twelve dimensions on the US sensor kNN graph over v_50, v_100, v_150;
/// the last dimension is noise with doubled standard deviation.
pub fn us_sensor_model(coords: &[[f64; 2]]) -> SyntheticModel {
    if coords.len() != US_SENSOR_VERTICES {
        log::warn!(
            "US sensor design expects {US_SENSOR_VERTICES} coordinates, got {}",
            coords.len()
        );
    }
    let components = vec![
        comps(&[(50, 3.0)]),
        comps(&[(50, 1.5)]),
        comps(&[(50, 2.0)]),
        comps(&[(100, 2.0)]),
        comps(&[(100, 4.0)]),
        comps(&[(100, 3.0)]),
        comps(&[(150, 5.0)]),
        comps(&[(150, 2.0)]),
        comps(&[(150, 1.5)]),
        comps(&[(50, 2.0), (100, 4.0)]),
        comps(&[(100, 3.0), (150, 2.5)]),
        vec![],
    ];
    let mut noise_scale = vec![1.0; 12];
    noise_scale[11] = 2.0;
    SyntheticModel {
        graph: GraphChoice::UsSensor,
        labels: default_labels(12),
        components,
        sigma: 0.5,
        noise_scale,
        seed: 0,
    }
}

/// Bundled (latitude, longitude) layout of 218 sensor stations.
pub fn us_sensor_coords() -> Vec<[f64; 2]> {
    crate::io::parse_coords(US_SENSOR_COORDS.as_bytes())
        .expect("bundled coordinates are well formed")
        .0
}

/// 7-nearest-neighbour Gaussian graph over the bundled coordinates.
pub fn us_sensor_graph() -> Graph {
    knn_gaussian_graph(&us_sensor_coords(), US_SENSOR_NEIGHBORS, Metric::Haversine)
        .expect("bundled coordinates build a valid graph")
}

impl SyntheticModel {
    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn noise_sd(&self, dim: usize) -> f64 {
        self.sigma * self.noise_scale[dim]
    }

    /// Distinct 1-based frequency indices carrying signal, ascending.
    pub fn frequencies(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.components.iter().flatten().map(|c| c.freq_index).collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// Amplitude vector `c^(k) = (c_1k, …, c_pk)` at a 1-based frequency.
    pub fn amplitudes_at(&self, freq_index: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.p(),
            self.components.iter().map(|cs| {
                cs.iter()
                    .filter(|c| c.freq_index == freq_index)
                    .map(|c| c.amplitude)
                    .sum()
            }),
        )
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_len("noise multipliers", self.p(), self.noise_scale.len())?;
        check_len("dimension labels", self.p(), self.labels.len())?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation(format!("noise level {} must be ≥ 0", self.sigma)));
        }
        if self.noise_scale.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::validation("noise multipliers must be ≥ 0"));
        }
        for c in self.components.iter().flatten() {
            if c.freq_index == 0 || c.freq_index > n {
                return Err(Error::validation(format!(
                    "frequency index {} outside 1..={n}",
                    c.freq_index
                )));
            }
        }
        Ok(())
    }

    /// The noise-free part `Σ_k c_ik v_k` as an n×p matrix.
    pub fn deterministic_part(&self, so: &ShiftOperator) -> Result<CMatrix> {
        self.validate(so.n())?;
        let mut x = CMatrix::zeros(so.n(), self.p());
        for (i, cs) in self.components.iter().enumerate() {
            for c in cs {
                let v = so.eigenvectors().column(c.freq_index - 1);
                let mut col = x.column_mut(i);
                col.axpy(C64::new(c.amplitude, 0.0), &v, C64::new(1.0, 0.0));
            }
        }
        Ok(x)
    }
}

/// Seed for replicate `r` of a run seeded with `seed`.
fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Derive an independent seed for a named sub-stream (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn draw_values(
    model: &SyntheticModel,
    base: &CMatrix,
    rng: &mut ChaCha8Rng,
) -> CMatrix {
    let mut x = base.clone();
    for j in 0..model.p() {
        let sd = model.noise_sd(j);
        for i in 0..x.nrows() {
            let z: f64 = StandardNormal.sample(rng);
            x[(i, j)].re += sd * z;
        }
    }
    x
}

/// One realization of the model, reproducible from `seed`.
pub fn draw(
    model: &SyntheticModel,
    so: &ShiftOperator,
    seed: u64,
) -> Result<MultivariateGraphSignal> {
    let base = model.deterministic_part(so)?;
    let mut rng = replicate_rng(seed, 0);
    MultivariateGraphSignal::new(draw_values(model, &base, &mut rng), model.labels.clone())
}

/// Second-moment spectral field of the model:
/// `P(λ_ℓ) = Σ_{k = ℓ} c^(k) c^(k)ᵀ + diag(σ_i²)`.
pub fn exact_field(model: &SyntheticModel, so: &ShiftOperator) -> Result<SpectralMatrixField> {
    let n = so.n();
    model.validate(n)?;
    let p = model.p();
    let noise = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |i, _| {
        C64::new(model.noise_sd(i).powi(2), 0.0)
    }));
    let mut mats = vec![noise; n];
    for k in model.frequencies() {
        let c = model.amplitudes_at(k).map(|a| C64::new(a, 0.0));
        mats[k - 1] += &c * c.transpose();
    }
    SpectralMatrixField::new(mats, model.labels.clone())
}

/// Mean over `replicates` fresh draws of `Σ_i ‖X_i - X̂_i‖²`, reconstructing
/// through `fitted` at rank `q`.
pub fn monte_carlo_mse(
    model: &SyntheticModel,
    fitted: &GFreqPcaModel,
    q: usize,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::validation("need at least one replicate"));
    }
    let fitted = fitted.with_rank(q)?;
    let so = fitted.shift_operator().clone();
    check_len("model dimensions", fitted.p(), model.p())?;
    let base = model.deterministic_part(&so)?;
    let one = |r: usize| -> Result<f64> {
        let mut rng = replicate_rng(seed, r as u64);
        let x = MultivariateGraphSignal::new(draw_values(model, &base, &mut rng), model.labels.clone())?;
        let xh = fitted.inverse_transform(&fitted.transform(&x)?)?;
        Ok((x.values() - xh.values()).norm_squared())
    };
    mean_over(replicates, one)
}

/// Monte-Carlo error of arbitrary per-frequency reconstruction filters
/// `X̂ = offsets + V [Â(λ_ℓ) (Vᴴ X)_ℓ]`, on the same draws as
/// [`monte_carlo_mse`] for the same `seed`.
pub fn monte_carlo_mse_filters(
    model: &SyntheticModel,
    so: &ShiftOperator,
    filters: &[CMatrix],
    offsets: &CMatrix,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::validation("need at least one replicate"));
    }
    check_len("filter count", so.n(), filters.len())?;
    let base = model.deterministic_part(so)?;
    let offset_coeffs = so.gft_columns(offsets)?;
    let one = |r: usize| -> Result<f64> {
        let mut rng = replicate_rng(seed, r as u64);
        let x = draw_values(model, &base, &mut rng);
        let z = so.gft_columns(&x)?;
        let mut err = 0.0;
        for (l, a) in filters.iter().enumerate() {
            let zl = z.row(l).transpose();
            let resid = &zl - a * &zl - offset_coeffs.row(l).transpose();
            err += resid.norm_squared();
        }
        Ok(err)
    };
    mean_over(replicates, one)
}

fn mean_over(count: usize, f: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<f64> {
    #[cfg(feature = "parallel")]
    let vals: Vec<f64> = (0..count).into_par_iter().map(f).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let vals: Vec<f64> = (0..count).map(f).collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Karate,
    UsSensor,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "karate" => Ok(Scenario::Karate),
            "us-sensor" => Ok(Scenario::UsSensor),
            other => Err(Error::validation(format!(
                "unknown scenario '{other}' (expected karate or us-sensor)"
            ))),
        }
    }
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Karate => "karate",
            Scenario::UsSensor => "us-sensor",
        }
    }

    pub fn graph(self) -> Graph {
        match self {
            Scenario::Karate => builtin_karate(),
            Scenario::UsSensor => us_sensor_graph(),
        }
    }

    pub fn model(self) -> SyntheticModel {
        match self {
            Scenario::Karate => karate_model(),
            Scenario::UsSensor => us_sensor_model(&us_sensor_coords()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorChoice {
    Exact,
    Periodogram,
    Windowed {
        windows: usize,
        variance: f64,
        correct_bias: bool,
    },
}

impl Default for EstimatorChoice {
    fn default() -> Self {
        EstimatorChoice::Windowed {
            windows: DEFAULT_WINDOW_COUNT,
            variance: DEFAULT_WINDOW_VARIANCE,
            correct_bias: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub seed: u64,
    pub estimator: EstimatorChoice,
    pub policy: QPolicy,
    /// Overrides the model's noise level σ.
    pub noise: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            seed: 1,
            estimator: EstimatorChoice::default(),
            policy: QPolicy::default(),
            noise: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub model: SyntheticModel,
    pub signal: MultivariateGraphSignal,
    pub fitted: GFreqPcaModel,
    pub report: AnalysisReport,
    pub reconstruction: MultivariateGraphSignal,
}

impl SimulationRun {
    pub fn residual(&self) -> CMatrix {
        self.signal.values() - self.reconstruction.values()
    }
}

/// Draw, center, estimate the spectral field, fit, choose q and reconstruct.
pub fn simulate_on(
    so: Arc<ShiftOperator>,
    model: SyntheticModel,
    config: &SimulationConfig,
) -> Result<SimulationRun> {
    let model = match config.noise {
        Some(s) => model.with_sigma(s),
        None => model,
    };
    let signal = draw(&model, &so, config.seed)?;
    let (centered, means) = signal.centered();
    let field = match config.estimator {
        EstimatorChoice::Exact => exact_field(&model, &so)?,
        EstimatorChoice::Periodogram => {
            assemble_spectral_matrices(&centered, &so, Estimator::Periodogram, false)?
        }
        EstimatorChoice::Windowed {
            windows,
            variance,
            correct_bias,
        } => {
            let ensemble =
                WindowEnsemble::new(windows, variance, derive_seed(config.seed, 1), so.n())?;
            let estimator = Estimator::Windowed {
                ensemble: &ensemble,
                correct_bias,
            };
            assemble_spectral_matrices(&centered, &so, estimator, true)?
        }
    };
    let full = fit(&field, &means, so)?;
    let q = select_q(&full, config.policy)?;
    let fitted = full.with_rank(q)?;
    let report = fitted.report(&model.frequencies())?;
    let reconstruction = fitted.inverse_transform(&fitted.transform(&signal)?)?;
    Ok(SimulationRun {
        model,
        signal,
        fitted,
        report,
        reconstruction,
    })
}

pub fn simulate(scenario: Scenario, config: &SimulationConfig) -> Result<SimulationRun> {
    let so = Arc::new(build_laplacian(&scenario.graph())?);
    simulate_on(so, scenario.model(), config)
}
