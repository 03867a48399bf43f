//! Browser demo: run a bundled simulation, inspect optimal scalings and
//! reconstruct at a chosen rank. Results cross the JS boundary as JSON text.

use std::sync::Arc;

use gfpca::graph::build_laplacian;
use gfpca::pca::{top_indices, GFreqPcaModel, QPolicy};
use gfpca::simulation::{simulate_on, EstimatorChoice, Scenario, SimulationConfig, SimulationRun};
use gfpca::ShiftOperator;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct SimulationView {
    pub scenario: &'static str,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub lambdas: Vec<f64>,
    pub envelope: Vec<f64>,
    pub peaks: Vec<usize>,
    pub signal_frequencies: Vec<usize>,
    pub scree: Vec<f64>,
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ScalingView {
    pub freq_index: usize,
    pub lambda: f64,
    pub labels: Vec<String>,
    pub modulus: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Normalized true amplitudes when the frequency carries signal.
    pub expected: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct ReconstructionView {
    pub q: usize,
    pub total_squared_residual: f64,
    pub theoretical_error: f64,
    pub signal_norms: Vec<f64>,
    pub residual_norms: Vec<f64>,
}

/// Plain Rust state behind the JS session.
pub struct Demo {
    scenario: Scenario,
    so: Arc<ShiftOperator>,
    run: Option<SimulationRun>,
}

impl Demo {
    pub fn new(scenario: &str) -> Result<Demo, String> {
        let scenario: Scenario = scenario.parse().map_err(|e: gfpca::Error| e.to_string())?;
        let so = build_laplacian(&scenario.graph()).map_err(|e| e.to_string())?;
        Ok(Demo {
            scenario,
            so: Arc::new(so),
            run: None,
        })
    }

    pub fn simulate(
        &mut self,
        seed: u64,
        windows: usize,
        variance: f64,
        noise: Option<f64>,
    ) -> Result<SimulationView, String> {
        let config = SimulationConfig {
            seed,
            estimator: EstimatorChoice::Windowed {
                windows,
                variance,
                correct_bias: false,
            },
            policy: QPolicy::default(),
            noise,
        };
        let run = simulate_on(self.so.clone(), self.scenario.model(), &config)
            .map_err(|e| e.to_string())?;
        let frequencies = run.model.frequencies();
        let view = SimulationView {
            scenario: self.scenario.name(),
            n: self.so.n(),
            p: run.signal.p(),
            q: run.fitted.q(),
            lambdas: run.report.lambdas.clone(),
            envelope: run.report.envelope.clone(),
            peaks: top_indices(&run.report.envelope, frequencies.len()),
            signal_frequencies: frequencies,
            scree: run.report.scree.fractions.clone(),
            cumulative: run.report.scree.cumulative.clone(),
        };
        self.run = Some(run);
        Ok(view)
    }

    fn current(&self) -> Result<&SimulationRun, String> {
        self.run.as_ref().ok_or_else(|| "run a simulation first".to_string())
    }

    pub fn scaling(&self, freq_index: usize) -> Result<ScalingView, String> {
        let run = self.current()?;
        let u = run.fitted.optimal_scaling(freq_index).map_err(|e| e.to_string())?;
        let c = run.model.amplitudes_at(freq_index);
        let norm = c.norm();
        Ok(ScalingView {
            freq_index,
            lambda: self.so.eigenvalues()[freq_index - 1],
            labels: run.model.labels.clone(),
            modulus: u.iter().map(|z| z.norm()).collect(),
            re: u.iter().map(|z| z.re).collect(),
            im: u.iter().map(|z| z.im).collect(),
            expected: (norm > 0.0).then(|| c.iter().map(|v| v / norm).collect()),
        })
    }

    pub fn reconstruct(&self, q: usize) -> Result<ReconstructionView, String> {
        let run = self.current()?;
        let model: GFreqPcaModel = run.fitted.with_rank(q).map_err(|e| e.to_string())?;
        let x = &run.signal;
        let xh = model
            .transform(x)
            .and_then(|y| model.inverse_transform(&y))
            .map_err(|e| e.to_string())?;
        let resid = x.values() - xh.values();
        Ok(ReconstructionView {
            q,
            total_squared_residual: resid.norm_squared(),
            theoretical_error: model.theoretical_error(q).map_err(|e| e.to_string())?,
            signal_norms: x.values().column_iter().map(|c| c.norm()).collect(),
            residual_norms: resid.column_iter().map(|c| c.norm()).collect(),
        })
    }
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct Session {
    inner: Demo,
}

#[wasm_bindgen]
impl Session {
    /// `scenario` is `karate` or `us-sensor`.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: &str) -> Result<Session, JsError> {
        Ok(Session {
            inner: Demo::new(scenario).map_err(|e| JsError::new(&e))?,
        })
    }

    /// Negative `noise` keeps the scenario's own noise level.
    pub fn simulate(
        &mut self,
        seed: u32,
        windows: u32,
        variance: f64,
        noise: f64,
    ) -> Result<String, JsError> {
        let noise = (noise >= 0.0).then_some(noise);
        to_json(self.inner.simulate(seed as u64, windows as usize, variance, noise))
    }

    pub fn scaling(&self, freq_index: u32) -> Result<String, JsError> {
        to_json(self.inner.scaling(freq_index as usize))
    }

    pub fn reconstruct(&self, q: u32) -> Result<String, JsError> {
        to_json(self.inner.reconstruct(q as usize))
    }
}
