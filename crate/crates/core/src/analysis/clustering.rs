use serde::Serialize;

use super::report::{Cell, Exclusion, StudyReport, Table};
use crate::cluster::{elbow_curve, kmeans_fit, label_clusters, ClusterModel, ElbowCurve};
use crate::data::{Dataset, LAST_OBSERVED_YEAR};
use crate::error::{Error, Result};
use crate::stats::Standardizer;

/// Published 2023 cluster centers (µg/m³), Low / Moderate / High.
pub const REFERENCE_CENTERS: [f64; 3] = [20.74, 41.09, 76.80];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStudy {
    pub k: usize,
    pub k_max: usize,
    pub seed: u64,
    /// `(country, raw 2023 PM2.5)` in dataset order.
    pub points: Vec<(String, f64)>,
    pub scaling: Standardizer,
    pub elbow: ElbowCurve,
    pub model: ClusterModel,
    pub exclusions: Vec<Exclusion>,
}

/// Standardizes 2023 PM2.5, draws the elbow curve and fits `k` clusters.
///
/// Countries without a 2023 value are excluded; under zero fill they take
/// part with their fabricated 0. `k_max` is capped at the number of points.
pub fn cluster_study(ds: &Dataset, k: usize, k_max: usize, seed: u64) -> Result<ClusterStudy> {
    let mut points = Vec::new();
    let mut exclusions = Vec::new();
    for r in ds.records() {
        match r.pm25_2023() {
            Some(v) => points.push((r.country.clone(), v)),
            None => exclusions.push(Exclusion::new(&r.country, "no 2023 PM2.5 value")),
        }
    }
    if points.len() < 2 {
        return Err(Error::EmptyStudy(format!(
            "clustering needs at least 2 countries with 2023 PM2.5, found {}",
            points.len()
        )));
    }
    if k == 0 || k > points.len() {
        return Err(Error::Argument(format!("k = {k} must be in 1..={}", points.len())));
    }
    let raw: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    let scaling = Standardizer::fit(&raw)?;
    let scaled: Vec<(String, f64)> = points
        .iter()
        .map(|(id, v)| (id.clone(), scaling.transform(*v)))
        .collect();

    let k_max = k_max.min(points.len());
    let elbow = elbow_curve(&scaled, k_max, seed)?;
    let mut model = kmeans_fit(&scaled, k, seed)?.with_scaling(scaling);
    if k == 3 {
        model = label_clusters(model)?;
    }
    Ok(ClusterStudy {
        k,
        k_max,
        seed,
        points,
        scaling,
        elbow,
        model,
        exclusions,
    })
}

impl ClusterStudy {
    /// Cluster indices ordered by ascending raw center.
    pub fn cluster_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by(|&a, &b| {
            self.model.raw_centers[a]
                .total_cmp(&self.model.raw_centers[b])
                .then(a.cmp(&b))
        });
        order
    }

    pub fn report(&self, ds: &Dataset) -> StudyReport {
        let mut report = StudyReport::new("cluster", ds);
        report
            .param("feature", format!("pm25_{LAST_OBSERVED_YEAR}"))
            .param("k", self.k)
            .param("k_max", self.k_max)
            .param("seed", self.seed)
            .param("standardization", "population z-score");
        report.included = self.points.iter().map(|(c, _)| c.clone()).collect();
        report.exclusions = self.exclusions.clone();

        let labels = |c: usize| self.model.labels.as_ref().map(|l| l[c].name().to_string());
        let mut members = Table::new(
            "clusters",
            &["country", "pm25_2023", "standardized", "cluster", "label"],
        );
        for (country, v) in &self.points {
            let c = self.model.assignments[country];
            members.push(vec![
                country.as_str().into(),
                (*v).into(),
                self.scaling.transform(*v).into(),
                c.into(),
                labels(c).map_or(Cell::Empty, Cell::Text),
            ]);
        }

        let sizes = self.model.cluster_sizes();
        let mut centers = Table::new(
            "cluster_centers",
            &[
                "cluster",
                "label",
                "center_standardized",
                "center_pm25",
                "size",
                "reference_pm25",
                "deviation",
            ],
        );
        for (rank, &c) in self.cluster_order().iter().enumerate() {
            let reference = (self.k == 3).then(|| REFERENCE_CENTERS[rank]);
            centers.push(vec![
                c.into(),
                labels(c).map_or(Cell::Empty, Cell::Text),
                self.model.centers[c].into(),
                self.model.raw_centers[c].into(),
                sizes[c].into(),
                Cell::opt(reference),
                Cell::opt(reference.map(|r| self.model.raw_centers[c] - r)),
            ]);
        }

        let mut elbow = Table::new("elbow", &["k", "wcss"]);
        for (k, w) in &self.elbow.points {
            elbow.push(vec![(*k).into(), (*w).into()]);
        }

        report
            .summarize("knee", self.elbow.knee)
            .summarize("wcss", self.model.wcss)
            .summarize(
                "centers_pm25_ascending",
                self.cluster_order()
                    .iter()
                    .map(|&c| self.model.raw_centers[c])
                    .collect::<Vec<_>>(),
            );
        report.tables.extend([members, centers, elbow]);
        report.finish()
    }
}
