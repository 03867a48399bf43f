use std::str::FromStr;

use crate::error::{Error, Result};

use super::{Edge, Graph};

const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Great-circle distance; coordinates are (latitude, longitude) in degrees.
    Haversine,
}

impl Metric {
    pub fn distance(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        match self {
            Metric::Euclidean => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
            Metric::Haversine => {
                let (lat1, lat2) = (a[0].to_radians(), b[0].to_radians());
                let dlat = lat2 - lat1;
                let dlon = (b[1] - a[1]).to_radians();
                let h = (dlat / 2.0).sin().powi(2)
                    + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
                2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
            }
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "haversine" => Ok(Metric::Haversine),
            other => Err(Error::validation(format!("unknown metric '{other}'"))),
        }
    }
}

/// Symmetric k-nearest-neighbour graph with Gaussian weights.
///
/// `i ~ j` when either vertex is among the other's `k` nearest (distance ties
/// go to the lower index). Weights are `exp(-d(i,j)^2 / ave^2)` where `ave`
/// is the mean distance over all unordered pairs of points.
pub fn knn_gaussian_graph(coords: &[[f64; 2]], k: usize, metric: Metric) -> Result<Graph> {
    let n = coords.len();
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::validation(format!(
            "k = {k} needs at least {} points, got {n}",
            k + 1
        )));
    }
    if coords.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::validation("non-finite coordinate"));
    }

    let mut dist = vec![0.0; n * n];
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(coords[i], coords[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
            total += d;
        }
    }
    let ave = total / (n * (n - 1) / 2) as f64;
    if ave <= 0.0 {
        return Err(Error::Degenerate("all points coincide".into()));
    }

    let mut edges = Vec::new();
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist[i * n + a].total_cmp(&dist[i * n + b]).then(a.cmp(&b)));
        for &j in &others[..k] {
            let d = dist[i * n + j];
            edges.push(Edge::new(i, j, (-(d * d) / (ave * ave)).exp()));
        }
    }
    Graph::undirected(n, edges)?.with_coords(coords.to_vec())
}
