use std::fs;
use std::path::Path;
use std::sync::Arc;

use gfpca::baseline::glpca_fit;
use gfpca::graph::{build_laplacian, knn_gaussian_graph, Graph};
use gfpca::io::{
    read_coords, read_edge_list, read_model, read_signal, write_density, write_edge_list,
    write_embedding, write_envelope, write_model, write_real_matrix, write_scaling, write_scree,
    write_signal, ModelDocument, Preprocessing,
};
use gfpca::pca::{fit as fit_model, select_q, top_indices, GFreqPcaModel, QPolicy};
use gfpca::simulation::{simulate_on, EstimatorChoice, SimulationConfig};
use gfpca::spectral::{assemble_spectral_matrices, Estimator, SpectralMatrixField, WindowEnsemble};
use gfpca::{CMatrix, MultivariateGraphSignal, ShiftOperator};
use log::info;
use serde::Serialize;

use crate::{
    BaselineArgs, CliError, CliResult, EstimatorArgs, EstimatorKind, FitArgs, GraphArgs,
    RankArgs, ReconstructArgs, SimulateArgs,
};

fn estimator_choice(a: &EstimatorArgs) -> CliResult<EstimatorChoice> {
    Ok(match a.estimator {
        EstimatorKind::Exact => EstimatorChoice::Exact,
        EstimatorKind::Periodogram => EstimatorChoice::Periodogram,
        EstimatorKind::Windowed => {
            if a.windows == 0 {
                return Err(CliError::Usage("--windows must be at least 1".into()));
            }
            if !(a.window_variance >= 0.0 && a.window_variance.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--window-variance must be finite and nonnegative, got {}",
                    a.window_variance
                )));
            }
            EstimatorChoice::Windowed {
                windows: a.windows,
                variance: a.window_variance,
                correct_bias: a.bias_correct,
            }
        }
    })
}

fn q_policy(a: &RankArgs) -> CliResult<QPolicy> {
    if let Some(q) = a.q {
        return Ok(QPolicy::Fixed(q));
    }
    if a.elbow {
        return Ok(QPolicy::Elbow);
    }
    if !(a.q_threshold > 0.0 && a.q_threshold <= 1.0) {
        return Err(CliError::Usage(format!(
            "--q-threshold must lie in (0, 1], got {}",
            a.q_threshold
        )));
    }
    Ok(QPolicy::CumulativeThreshold(a.q_threshold))
}

fn with_path<T>(path: &Path, r: gfpca::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn load_graph(a: &GraphArgs) -> CliResult<Graph> {
    match (&a.graph, &a.coords) {
        (Some(path), _) => with_path(path, read_edge_list(path)),
        (None, Some(path)) => {
            let (pts, metric) = with_path(path, read_coords(path))?;
            Ok(knn_gaussian_graph(&pts, a.knn, metric)?)
        }
        (None, None) => Err(CliError::Usage("one of --graph or --coords is required".into())),
    }
}

fn load_signal(path: &Path, so: &ShiftOperator, log1p: bool) -> CliResult<MultivariateGraphSignal> {
    let signal = with_path(path, read_signal(path))?;
    if signal.n() != so.n() {
        return Err(CliError::Usage(format!(
            "signal has {} rows but the graph has {} vertices",
            signal.n(),
            so.n()
        )));
    }
    Ok(if log1p { signal.log1p()? } else { signal })
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct EstimatorSummary {
    kind: &'static str,
    windows: Option<usize>,
    window_variance: Option<f64>,
    bias_correct: Option<bool>,
}

impl From<EstimatorChoice> for EstimatorSummary {
    fn from(c: EstimatorChoice) -> Self {
        match c {
            EstimatorChoice::Exact => EstimatorSummary {
                kind: "exact",
                windows: None,
                window_variance: None,
                bias_correct: None,
            },
            EstimatorChoice::Periodogram => EstimatorSummary {
                kind: "periodogram",
                windows: None,
                window_variance: None,
                bias_correct: None,
            },
            EstimatorChoice::Windowed {
                windows,
                variance,
                correct_bias,
            } => EstimatorSummary {
                kind: "windowed",
                windows: Some(windows),
                window_variance: Some(variance),
                bias_correct: Some(correct_bias),
            },
        }
    }
}

#[derive(Serialize)]
struct SimulationSummary {
    scenario: &'static str,
    seed: u64,
    n: usize,
    p: usize,
    q: usize,
    sigma: f64,
    estimator: EstimatorSummary,
    signal_frequencies: Vec<usize>,
    envelope_peaks: Vec<usize>,
    scree_fractions: Vec<f64>,
    scree_cumulative: Vec<f64>,
    theoretical_errors: Vec<f64>,
    total_squared_residual: f64,
    shift_hash: String,
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let config = SimulationConfig {
        seed: a.seed,
        estimator: estimator_choice(&a.estimator)?,
        policy: q_policy(&a.rank)?,
        noise: a.noise,
    };
    let graph = a.scenario.graph();
    let so = Arc::new(build_laplacian(&graph)?);
    let run = simulate_on(so.clone(), a.scenario.model(), &config)?;
    prepare_out(&a.out)?;

    let report = &run.report;
    write_envelope(a.out.join("envelope.csv"), &report.lambdas, &report.envelope)?;
    write_scree(a.out.join("scree.csv"), &report.scree)?;
    for (k, u) in &report.scalings {
        let c = run.model.amplitudes_at(*k);
        let expected: Vec<f64> = c.unscale(c.norm()).iter().copied().collect();
        write_scaling(
            a.out.join(format!("scalings_{k}.csv")),
            &run.model.labels,
            u,
            Some(&expected),
        )?;
    }

    let residual = run.residual();
    let rows: Vec<[f64; 2]> = (0..run.signal.p())
        .map(|i| [run.signal.values().column(i).norm(), residual.column(i).norm()])
        .collect();
    write_residual_norms(&a.out.join("residual_norms.csv"), &run.model.labels, &rows)?;
    write_signal(a.out.join("signal.csv"), &run.signal)?;
    write_edge_list(a.out.join("graph.csv"), &graph)?;

    let frequencies = run.model.frequencies();
    let summary = SimulationSummary {
        scenario: a.scenario.name(),
        seed: a.seed,
        n: so.n(),
        p: run.signal.p(),
        q: run.fitted.q(),
        sigma: run.model.sigma,
        estimator: config.estimator.into(),
        envelope_peaks: report.envelope_peaks(frequencies.len()),
        signal_frequencies: frequencies,
        scree_fractions: report.scree.fractions.clone(),
        scree_cumulative: report.scree.cumulative.clone(),
        theoretical_errors: report.theoretical_errors.clone(),
        total_squared_residual: residual.norm_squared(),
        shift_hash: so.content_hash().to_string(),
    };
    write_json(&a.out.join("summary.json"), &summary)?;
    println!(
        "{}: q = {}, PC1 fraction {:.4}, envelope peaks {:?}",
        summary.scenario, summary.q, summary.scree_fractions[0], summary.envelope_peaks
    );
    Ok(())
}

fn write_residual_norms(path: &Path, labels: &[String], rows: &[[f64; 2]]) -> CliResult<()> {
    let mut text = String::from("dimension,label,signal_norm,residual_norm\n");
    for (i, (label, r)) in labels.iter().zip(rows).enumerate() {
        text.push_str(&format!("{},{},{},{}\n", i + 1, label, r[0], r[1]));
    }
    fs::write(path, text)?;
    Ok(())
}

fn estimate_field(
    signal: &MultivariateGraphSignal,
    so: &ShiftOperator,
    choice: EstimatorChoice,
    seed: u64,
) -> CliResult<SpectralMatrixField> {
    let field = match choice {
        EstimatorChoice::Exact => {
            return Err(CliError::Usage(
                "the exact estimator needs a known model; use it with simulate".into(),
            ))
        }
        EstimatorChoice::Periodogram => {
            assemble_spectral_matrices(signal, so, Estimator::Periodogram, false)?
        }
        EstimatorChoice::Windowed {
            windows,
            variance,
            correct_bias,
        } => {
            let ensemble = WindowEnsemble::new(windows, variance, seed, so.n())?;
            let est = Estimator::Windowed {
                ensemble: &ensemble,
                correct_bias,
            };
            assemble_spectral_matrices(signal, so, est, true)?
        }
    };
    Ok(field)
}

#[derive(Serialize)]
struct FitSummary {
    n: usize,
    p: usize,
    q: usize,
    labels: Vec<String>,
    estimator: EstimatorSummary,
    preprocessing: Preprocessing,
    scree_fractions: Vec<f64>,
    scree_cumulative: Vec<f64>,
    theoretical_errors: Vec<f64>,
    shift_hash: String,
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    let choice = estimator_choice(&a.estimator)?;
    let policy = q_policy(&a.rank)?;
    let so = Arc::new(build_laplacian(&load_graph(&a.graph)?)?);
    let signal = load_signal(&a.signal, &so, a.log1p)?;
    let (input, means) = if a.center {
        signal.centered()
    } else {
        (signal.clone(), CMatrix::zeros(signal.n(), signal.p()))
    };
    let field = estimate_field(&input, &so, choice, a.seed)?;
    let full = fit_model(&field, &means, so.clone())?;
    let q = select_q(&full, policy)?;
    let model = full.with_rank(q)?;
    info!("fitted n = {}, p = {}, q = {q}", model.n(), model.p());

    prepare_out(&a.out)?;
    let prep = Preprocessing {
        centered: a.center,
        log1p: a.log1p,
    };
    write_model(a.out.join("model.json"), &ModelDocument::from_model(&model, prep))?;
    write_reports(&a.out, &model)?;
    for i in 0..model.p() {
        write_density(
            a.out.join(format!("gpsd_{}.csv", i + 1)),
            &field.density(i, i),
            so.eigenvalues(),
        )?;
    }
    let scree = model.scree()?;
    let summary = FitSummary {
        n: model.n(),
        p: model.p(),
        q,
        labels: model.labels().to_vec(),
        estimator: choice.into(),
        preprocessing: prep,
        theoretical_errors: (1..=model.p())
            .map(|k| model.theoretical_error(k))
            .collect::<Result<_, _>>()?,
        scree_fractions: scree.fractions.clone(),
        scree_cumulative: scree.cumulative.clone(),
        shift_hash: so.content_hash().to_string(),
    };
    write_json(&a.out.join("summary.json"), &summary)?;
    let peaks = top_indices(&model.spectral_envelope(), 3.min(model.n()));
    println!(
        "q = {q}, PC1 fraction {:.4}, largest envelope values at {:?}",
        scree.fractions[0], peaks
    );
    Ok(())
}

fn write_reports(out: &Path, model: &GFreqPcaModel) -> CliResult<()> {
    write_envelope(
        out.join("envelope.csv"),
        model.shift_operator().eigenvalues(),
        &model.spectral_envelope(),
    )?;
    write_scree(out.join("scree.csv"), &model.scree()?)?;
    Ok(())
}

pub fn reconstruct(a: &ReconstructArgs) -> CliResult<()> {
    let doc = with_path(&a.model, read_model(&a.model))?;
    let prep = doc.preprocessing;
    let so = Arc::new(build_laplacian(&load_graph(&a.graph)?)?);
    let mut model = doc.into_model(so.clone())?;
    if let Some(q) = a.q {
        model = model.with_rank(q)?;
    }
    let signal = load_signal(&a.signal, &so, prep.log1p)?;
    let recon = model.inverse_transform(&model.transform(&signal)?)?;
    let residual = signal.real_part() - recon.real_part();

    prepare_out(&a.out)?;
    write_real_matrix(a.out.join("reconstruction.csv"), signal.labels(), &recon.real_part())?;
    write_real_matrix(a.out.join("residuals.csv"), signal.labels(), &residual)?;
    let total = residual.norm_squared();
    println!("total squared residual: {total}");
    Ok(())
}

#[derive(Serialize)]
struct BaselineSummary {
    n: usize,
    p: usize,
    q: usize,
    alpha: f64,
    objective: f64,
    smoothness: f64,
}

pub fn baseline(a: &BaselineArgs) -> CliResult<()> {
    let so = build_laplacian(&load_graph(&a.graph)?)?;
    let signal = load_signal(&a.signal, &so, a.log1p)?;
    let signal = if a.center { signal.centered().0 } else { signal };
    let x = signal.real_part();
    let model = glpca_fit(&x, &so, a.alpha, a.q)?;

    prepare_out(&a.out)?;
    write_embedding(a.out.join("glpca_q.csv"), &model.embedding)?;
    let summary = BaselineSummary {
        n: so.n(),
        p: signal.p(),
        q: a.q,
        alpha: a.alpha,
        objective: model.objective,
        smoothness: model.smoothness,
    };
    write_json(&a.out.join("glpca_summary.json"), &summary)?;
    println!("objective: {}", model.objective);
    Ok(())
}
