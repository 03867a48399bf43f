//! CSV and JSON formats.
//!
//! | file | columns |
//! |------|---------|
//! | edge list | `src,dst,weight` (0-based vertices) |
//! | coordinates | `id,x,y` (euclidean) or `id,lat,lon` (haversine) |
//! | signal | one column per dimension, header = labels, one row per vertex |
//! | density | `freq_index,lambda,re,im` |
//! | envelope | `freq_index,lambda,envelope` |
//! | scree | `pc,fraction,cumulative` |
//! | embedding | `vertex,pc1..pcq` |
//!
//! Frequency indices are 1-based. Models are stored as JSON documents
//! carrying the shift operator's content hash.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Metric, ShiftOperator};
use crate::linalg::{CMatrix, CVector, C64};
use crate::pca::{GFreqPcaModel, Scree};
use crate::signal::MultivariateGraphSignal;
use crate::spectral::SpectralDensity;

fn expect_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?.clone();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::validation(format!(
            "expected header '{}', found '{}'",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(field: &str, what: &str, row: usize) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("row {row}: cannot parse {what} '{field}'")))
}

pub fn parse_edge_list(reader: impl Read) -> Result<Vec<Edge>> {
    let mut rdr = csv::Reader::from_reader(reader);
    expect_header(&mut rdr, &["src", "dst", "weight"])?;
    let mut edges = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        edges.push(Edge::new(
            parse_field(&rec[0], "src", row)?,
            parse_field(&rec[1], "dst", row)?,
            parse_field(&rec[2], "weight", row)?,
        ));
    }
    Ok(edges)
}

/// Undirected graph from an edge-list CSV; n is one past the largest index.
/// Zero-weight edges may be used to declare otherwise isolated vertices.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let edges = parse_edge_list(File::open(path)?)?;
    let n = edges.iter().map(|e| e.src.max(e.dst) + 1).max().unwrap_or(0);
    Graph::undirected(n, edges)
}

pub fn write_edge_list(path: impl AsRef<Path>, graph: &Graph) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["src", "dst", "weight"])?;
    for e in graph.edges() {
        w.write_record([e.src.to_string(), e.dst.to_string(), e.weight.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Coordinates ordered by id, and the metric implied by the header.
pub fn parse_coords(reader: impl Read) -> Result<(Vec<[f64; 2]>, Metric)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let metric = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["id", "x", "y"] => Metric::Euclidean,
        ["id", "lat", "lon"] => Metric::Haversine,
        _ => {
            return Err(Error::validation(format!(
                "expected header 'id,x,y' or 'id,lat,lon', found '{}'",
                header.join(",")
            )))
        }
    };
    let mut rows: Vec<(usize, [f64; 2])> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        rows.push((
            parse_field(&rec[0], "id", row)?,
            [parse_field(&rec[1], "coordinate", row)?, parse_field(&rec[2], "coordinate", row)?],
        ));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(Error::validation("coordinate ids must be exactly 0..n"));
    }
    Ok((rows.into_iter().map(|r| r.1).collect(), metric))
}

pub fn read_coords(path: impl AsRef<Path>) -> Result<(Vec<[f64; 2]>, Metric)> {
    parse_coords(File::open(path)?)
}

pub fn parse_signal(reader: impl Read) -> Result<MultivariateGraphSignal> {
    let mut rdr = csv::Reader::from_reader(reader);
    let labels: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if labels.is_empty() || labels.iter().all(|l| l.is_empty()) {
        return Err(Error::validation("signal file has no header"));
    }
    let p = labels.len();
    let mut data = Vec::new();
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != p {
            return Err(Error::validation(format!(
                "row {} has {} columns, header has {p}",
                i + 1,
                rec.len()
            )));
        }
        for f in rec.iter() {
            data.push(parse_field::<f64>(f, "value", i + 1)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::validation("signal file has no rows"));
    }
    let values = DMatrix::from_row_slice(n, p, &data);
    MultivariateGraphSignal::from_real(&values, labels)
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<MultivariateGraphSignal> {
    parse_signal(File::open(path)?)
}

/// Writes real parts; signals from this crate's pipelines are real.
pub fn write_signal(path: impl AsRef<Path>, signal: &MultivariateGraphSignal) -> Result<()> {
    write_real_matrix(path, signal.labels(), &signal.real_part())
}

pub fn write_real_matrix(
    path: impl AsRef<Path>,
    labels: &[String],
    values: &DMatrix<f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(labels)?;
    for row in values.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_density(
    path: impl AsRef<Path>,
    density: &SpectralDensity,
    lambdas: &[f64],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_index", "lambda", "re", "im"])?;
    for (l, (z, lam)) in density.values().iter().zip(lambdas).enumerate() {
        w.write_record([
            (l + 1).to_string(),
            lam.to_string(),
            z.re.to_string(),
            z.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Returns the density and the λ column.
pub fn read_density(path: impl AsRef<Path>) -> Result<(SpectralDensity, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    expect_header(&mut rdr, &["freq_index", "lambda", "re", "im"])?;
    let mut vals = Vec::new();
    let mut lambdas = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        lambdas.push(parse_field(&rec[1], "lambda", i + 1)?);
        vals.push(C64::new(
            parse_field(&rec[2], "re", i + 1)?,
            parse_field(&rec[3], "im", i + 1)?,
        ));
    }
    Ok((SpectralDensity::new(CVector::from_vec(vals)), lambdas))
}

pub fn write_envelope(path: impl AsRef<Path>, lambdas: &[f64], envelope: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_index", "lambda", "envelope"])?;
    for (l, (lam, e)) in lambdas.iter().zip(envelope).enumerate() {
        w.write_record([(l + 1).to_string(), lam.to_string(), e.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Returns `(lambdas, envelope)`.
pub fn read_envelope(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    expect_header(&mut rdr, &["freq_index", "lambda", "envelope"])?;
    let mut lambdas = Vec::new();
    let mut env = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        lambdas.push(parse_field(&rec[1], "lambda", i + 1)?);
        env.push(parse_field(&rec[2], "envelope", i + 1)?);
    }
    Ok((lambdas, env))
}

pub fn write_scree(path: impl AsRef<Path>, scree: &Scree) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pc", "fraction", "cumulative"])?;
    for (i, (f, c)) in scree.fractions.iter().zip(&scree.cumulative).enumerate() {
        w.write_record([(i + 1).to_string(), f.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scree(path: impl AsRef<Path>) -> Result<Scree> {
    let mut rdr = csv::Reader::from_path(path)?;
    expect_header(&mut rdr, &["pc", "fraction", "cumulative"])?;
    let mut fractions = Vec::new();
    let mut cumulative = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        fractions.push(parse_field(&rec[1], "fraction", i + 1)?);
        cumulative.push(parse_field(&rec[2], "cumulative", i + 1)?);
    }
    Ok(Scree {
        fractions,
        cumulative,
    })
}

/// gLPCA embedding rows: `vertex,pc1..pcq`.
pub fn write_embedding(path: impl AsRef<Path>, embedding: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["vertex".to_string()];
    header.extend((1..=embedding.ncols()).map(|i| format!("pc{i}")));
    w.write_record(&header)?;
    for (v, row) in embedding.row_iter().enumerate() {
        let mut rec = vec![v.to_string()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embedding(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let q = rdr.headers()?.len().saturating_sub(1);
    let mut data = Vec::new();
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for f in rec.iter().skip(1) {
            data.push(parse_field::<f64>(f, "value", i + 1)?);
        }
        n += 1;
    }
    Ok(DMatrix::from_row_slice(n, q, &data))
}

/// Optimal scaling rows: `dimension,label,re,im,modulus`, plus `expected`
/// when reference amplitudes are supplied.
pub fn write_scaling(
    path: impl AsRef<Path>,
    labels: &[String],
    scaling: &CVector,
    expected: Option<&[f64]>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["dimension", "label", "re", "im", "modulus"];
    if expected.is_some() {
        header.push("expected");
    }
    w.write_record(&header)?;
    for (i, z) in scaling.iter().enumerate() {
        let mut rec = vec![
            (i + 1).to_string(),
            labels[i].clone(),
            z.re.to_string(),
            z.im.to_string(),
            z.norm().to_string(),
        ];
        if let Some(e) = expected {
            rec.push(e[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub centered: bool,
    pub log1p: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub index: usize,
    pub lambda: f64,
    pub tau: Vec<f64>,
    /// Row-major p×p.
    pub u_re: Vec<f64>,
    pub u_im: Vec<f64>,
}

/// Serialized form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub labels: Vec<String>,
    pub shift_hash: String,
    pub preprocessing: Preprocessing,
    pub frequencies: Vec<FrequencyEntry>,
    /// Per dimension, length n.
    pub means_re: Vec<Vec<f64>>,
    pub means_im: Vec<Vec<f64>>,
    pub offsets_re: Vec<Vec<f64>>,
    pub offsets_im: Vec<Vec<f64>>,
}

pub const MODEL_FORMAT: &str = "gfpca-model";

fn split_columns(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    m.column_iter()
        .map(|c| (c.iter().map(|z| z.re).collect(), c.iter().map(|z| z.im).collect()))
        .unzip()
}

impl ModelDocument {
    pub fn from_model(model: &GFreqPcaModel, preprocessing: Preprocessing) -> Self {
        let p = model.p();
        let lambdas = model.shift_operator().eigenvalues();
        let frequencies = (0..model.n())
            .map(|l| {
                let u = model.basis(l);
                let entries: Vec<C64> = (0..p)
                    .flat_map(|i| (0..p).map(move |j| (i, j)))
                    .map(|(i, j)| u[(i, j)])
                    .collect();
                FrequencyEntry {
                    index: l + 1,
                    lambda: lambdas[l],
                    tau: model.eigenvalues(l).to_vec(),
                    u_re: entries.iter().map(|z| z.re).collect(),
                    u_im: entries.iter().map(|z| z.im).collect(),
                }
            })
            .collect();
        let (means_re, means_im) = split_columns(model.means());
        let (offsets_re, offsets_im) = split_columns(&model.offsets());
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: 1,
            n: model.n(),
            p,
            q: model.q(),
            labels: model.labels().to_vec(),
            shift_hash: model.shift_operator().content_hash().to_string(),
            preprocessing,
            frequencies,
            means_re,
            means_im,
            offsets_re,
            offsets_im,
        }
    }

    /// Rebuild the model against `so`, refusing a different shift operator.
    pub fn into_model(self, so: Arc<ShiftOperator>) -> Result<GFreqPcaModel> {
        if self.format != MODEL_FORMAT {
            return Err(Error::validation(format!("unknown model format '{}'", self.format)));
        }
        if self.shift_hash != so.content_hash() {
            return Err(Error::HashMismatch {
                expected: self.shift_hash,
                found: so.content_hash().to_string(),
            });
        }
        let (n, p) = (self.n, self.p);
        crate::error::check_len("frequency entries", n, self.frequencies.len())?;
        crate::error::check_len("mean vectors", p, self.means_re.len())?;
        crate::error::check_len("mean vectors", p, self.means_im.len())?;
        let mut taus = Vec::with_capacity(n);
        let mut bases = Vec::with_capacity(n);
        for f in self.frequencies {
            crate::error::check_len("basis entries", p * p, f.u_re.len())?;
            crate::error::check_len("basis entries", p * p, f.u_im.len())?;
            let entries: Vec<C64> =
                f.u_re.iter().zip(&f.u_im).map(|(&r, &i)| C64::new(r, i)).collect();
            bases.push(CMatrix::from_row_slice(p, p, &entries));
            taus.push(f.tau);
        }
        let mut means = CMatrix::zeros(n, p);
        for (j, (re, im)) in self.means_re.iter().zip(&self.means_im).enumerate() {
            crate::error::check_len("mean length", n, re.len())?;
            crate::error::check_len("mean length", n, im.len())?;
            for i in 0..n {
                means[(i, j)] = C64::new(re[i], im[i]);
            }
        }
        GFreqPcaModel::from_eigenstructure(so, self.labels, taus, bases, means, self.q)
    }
}

pub fn write_model(path: impl AsRef<Path>, doc: &ModelDocument) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, doc)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelDocument> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
