//! One-dimensional K-means (Lloyd) with seeded restarts, elbow curves and
//! pollution-level labelling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Standardizer;

pub const MAX_ITER: usize = 300;
pub const RESTARTS: usize = 10;
pub const DEFAULT_K_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PollutionLevel {
    Low,
    Moderate,
    High,
}

impl PollutionLevel {
    pub fn name(self) -> &'static str {
        match self {
            PollutionLevel::Low => "Low Pollution",
            PollutionLevel::Moderate => "Moderate Pollution",
            PollutionLevel::High => "High Pollution",
        }
    }
}

impl fmt::Display for PollutionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// Centers in the space the points were supplied in.
    pub centers: Vec<f64>,
    /// Centers mapped back through `scaling`.
    pub raw_centers: Vec<f64>,
    pub scaling: Standardizer,
    pub assignments: BTreeMap<String, usize>,
    pub wcss: f64,
    /// Cluster index → label, only after [`label_clusters`].
    pub labels: Option<Vec<PollutionLevel>>,
    /// Restart that produced this model and its Lloyd iteration count.
    pub restart: usize,
    pub iterations: usize,
}

impl ClusterModel {
    /// Records the transform the points were standardized with.
    pub fn with_scaling(mut self, scaling: Standardizer) -> Self {
        self.raw_centers = self.centers.iter().map(|c| scaling.inverse(*c)).collect();
        self.scaling = scaling;
        self
    }

    pub fn label_of(&self, id: &str) -> Option<PollutionLevel> {
        let c = *self.assignments.get(id)?;
        self.labels.as_ref().map(|l| l[c])
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for c in self.assignments.values() {
            sizes[*c] += 1;
        }
        sizes
    }
}

pub(crate) struct LloydRun {
    pub centers: Vec<f64>,
    pub assign: Vec<usize>,
    pub wcss: f64,
    pub iterations: usize,
    /// WCSS after each center update.
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
}

fn wcss(values: &[f64], centers: &[f64], assign: &[usize]) -> f64 {
    values.iter().zip(assign).map(|(v, &c)| (v - centers[c]).powi(2)).sum()
}

fn nearest(v: f64, centers: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (v - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Reseeds empty clusters at the point farthest from its own center.
fn repair_empty(values: &[f64], centers: &mut [f64], assign: &mut [usize]) {
    let k = centers.len();
    loop {
        let mut counts = vec![0usize; k];
        for &c in assign.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        let donor = (0..values.len()).filter(|&i| counts[assign[i]] > 1).max_by(|&a, &b| {
            let da = (values[a] - centers[assign[a]]).abs();
            let db = (values[b] - centers[assign[b]]).abs();
            // Prefer the lower index on equal distance.
            da.total_cmp(&db).then(b.cmp(&a))
        });
        let Some(i) = donor else {
            return;
        };
        centers[empty] = values[i];
        assign[i] = empty;
    }
}

pub(crate) fn lloyd(values: &[f64], init: Vec<f64>) -> LloydRun {
    let k = init.len();
    let mut centers = init;
    let mut assign: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..MAX_ITER {
        iterations += 1;
        let mut next: Vec<usize> = values.iter().map(|v| nearest(*v, &centers)).collect();
        repair_empty(values, &mut centers, &mut next);
        if next == assign {
            break;
        }
        assign = next;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (v, &c) in values.iter().zip(&assign) {
            sums[c] += v;
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        history.push(wcss(values, &centers, &assign));
    }
    LloydRun {
        wcss: wcss(values, &centers, &assign),
        centers,
        assign,
        iterations,
        history,
    }
}

/// Centers at the (i + 0.5)/k quantiles, linearly interpolated.
pub(crate) fn quantile_init(values: &[f64], k: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (0..k)
        .map(|i| {
            let pos = (i as f64 + 0.5) / k as f64 * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let t = pos - lo as f64;
            sorted[lo] * (1.0 - t) + sorted[hi] * t
        })
        .collect()
}

fn check_points(points: &[(String, f64)], k: usize) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Argument("k-means: no points".into()));
    }
    if k == 0 || k > points.len() {
        return Err(Error::Argument(format!(
            "k-means: k = {k} must be in 1..={}",
            points.len()
        )));
    }
    if let Some((id, v)) = points.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Argument(format!("k-means: non-finite value {v} for `{id}`")));
    }
    let ids: BTreeSet<&str> = points.iter().map(|(id, _)| id.as_str()).collect();
    if ids.len() != points.len() {
        return Err(Error::Argument("k-means: point ids must be unique".into()));
    }
    Ok(())
}

/// Best of [`RESTARTS`] Lloyd runs by WCSS.
///
/// Restart 0 starts from quantile centers; the rest pick `k` distinct points
/// with a generator seeded from `seed`. Ties keep the earliest restart.
pub fn kmeans_fit(points: &[(String, f64)], k: usize, seed: u64) -> Result<ClusterModel> {
    check_points(points, k)?;
    let values: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best: Option<(usize, LloydRun)> = None;
    for restart in 0..RESTARTS {
        let init = if restart == 0 {
            quantile_init(&values, k)
        } else {
            let mut idx = rand::seq::index::sample(&mut rng, values.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| values[i]).collect()
        };
        let run = lloyd(&values, init);
        if best.as_ref().is_none_or(|(_, b)| run.wcss < b.wcss) {
            best = Some((restart, run));
        }
    }
    let (restart, run) = best.expect("at least one restart");
    let assignments = points
        .iter()
        .zip(&run.assign)
        .map(|((id, _), c)| (id.clone(), *c))
        .collect();
    Ok(ClusterModel {
        k,
        raw_centers: run.centers.clone(),
        centers: run.centers,
        scaling: Standardizer::identity(),
        assignments,
        wcss: run.wcss,
        labels: None,
        restart,
        iterations: run.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    /// `(k, WCSS)` for k = 1..=k_max.
    pub points: Vec<(usize, f64)>,
    pub knee: usize,
}

impl ElbowCurve {
    pub fn wcss(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|(kk, _)| *kk == k).map(|(_, w)| *w)
    }
}

/// Index of the point farthest from the chord joining the first and last
/// points; ties go to the earliest.
pub fn knee_index(curve: &[(f64, f64)]) -> usize {
    let (x1, y1) = curve[0];
    let (x2, y2) = curve[curve.len() - 1];
    let norm = ((y2 - y1).powi(2) + (x2 - x1).powi(2)).sqrt();
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, &(x, y)) in curve.iter().enumerate() {
        let d = if norm == 0.0 {
            0.0
        } else {
            ((y2 - y1) * x - (x2 - x1) * y + x2 * y1 - y2 * x1).abs() / norm
        };
        if d > best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

pub fn elbow_curve(points: &[(String, f64)], k_max: usize, seed: u64) -> Result<ElbowCurve> {
    if k_max < 2 {
        return Err(Error::Argument(format!("elbow: k_max = {k_max} must be at least 2")));
    }
    if k_max > points.len() {
        return Err(Error::Argument(format!(
            "elbow: k_max = {k_max} exceeds {} points",
            points.len()
        )));
    }
    let curve = (1..=k_max)
        .map(|k| kmeans_fit(points, k, seed).map(|m| (k, m.wcss)))
        .collect::<Result<Vec<_>>>()?;
    let xy: Vec<(f64, f64)> = curve.iter().map(|(k, w)| (*k as f64, *w)).collect();
    let knee = curve[knee_index(&xy)].0;
    Ok(ElbowCurve { points: curve, knee })
}

/// Labels a 3-cluster model Low/Moderate/High by ascending raw center.
pub fn label_clusters(mut model: ClusterModel) -> Result<ClusterModel> {
    if model.k != 3 {
        return Err(Error::Argument(format!(
            "pollution labels need k = 3, got k = {}",
            model.k
        )));
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| model.raw_centers[a].total_cmp(&model.raw_centers[b]).then(a.cmp(&b)));
    let mut labels = vec![PollutionLevel::Low; 3];
    for (rank, &c) in order.iter().enumerate() {
        labels[c] = [PollutionLevel::Low, PollutionLevel::Moderate, PollutionLevel::High][rank];
    }
    model.labels = Some(labels);
    Ok(model)
}
