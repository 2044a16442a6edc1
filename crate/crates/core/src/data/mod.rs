//! Country-level PM2.5 records and the CSV ingestion pipeline.
//!
//! A [`Dataset`] is built once (from CSV or the embedded table) and is
//! immutable afterwards.

mod embedded;
mod load;

pub use embedded::{embedded_paper_dataset, EMBEDDED_SOURCE};
pub use load::{load_dataset, parse_number, write_dataset, CSV_HEADER};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FIRST_YEAR: i32 = 2018;
/// Last year with observed data; 2024 only ever holds forecasts.
pub const LAST_OBSERVED_YEAR: i32 = 2023;
pub const FORECAST_YEAR: i32 = 2024;
pub const LAST_DEATH_YEAR: i32 = 2021;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionId {
    CentralAsia,
    EastAsia,
    SouthAsia,
    SoutheastAsia,
    WestAsia,
}

impl RegionId {
    pub const ALL: [RegionId; 5] = [
        RegionId::CentralAsia,
        RegionId::EastAsia,
        RegionId::SouthAsia,
        RegionId::SoutheastAsia,
        RegionId::WestAsia,
    ];

    /// Display name, also used as the CSV token.
    pub fn name(self) -> &'static str {
        match self {
            RegionId::CentralAsia => "Central Asia",
            RegionId::EastAsia => "East Asia",
            RegionId::SouthAsia => "South Asia",
            RegionId::SoutheastAsia => "Southeast Asia",
            RegionId::WestAsia => "West Asia",
        }
    }

    /// Case-insensitive match ignoring whitespace, `-` and `_`.
    pub fn from_token(token: &str) -> Option<RegionId> {
        let key: String = token
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "centralasia" => Some(RegionId::CentralAsia),
            "eastasia" => Some(RegionId::EastAsia),
            "southasia" => Some(RegionId::SouthAsia),
            "southeastasia" => Some(RegionId::SoutheastAsia),
            "westasia" => Some(RegionId::WestAsia),
            _ => None,
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegionId::from_token(s).ok_or_else(|| Error::Argument(format!("unknown region `{s}`")))
    }
}

/// Optional yearly values over a fixed, inclusive span of years.
///
/// Present values are always finite and nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSeries {
    first: i32,
    values: Vec<Option<f64>>,
}

impl YearSeries {
    pub fn empty(first: i32, last: i32) -> Self {
        assert!(first <= last, "empty year span");
        YearSeries {
            first,
            values: vec![None; (last - first + 1) as usize],
        }
    }

    /// PM2.5 series covering 2018..=2024.
    pub fn pm25() -> Self {
        Self::empty(FIRST_YEAR, FORECAST_YEAR)
    }

    /// Death-rate series covering 2018..=2021.
    pub fn deaths() -> Self {
        Self::empty(FIRST_YEAR, LAST_DEATH_YEAR)
    }

    /// Builds a series from `(year, value)` pairs, rejecting bad years or values.
    pub fn from_pairs(first: i32, last: i32, pairs: &[(i32, f64)]) -> Result<Self> {
        let mut s = Self::empty(first, last);
        for &(year, v) in pairs {
            s.set(year, Some(v))?;
        }
        Ok(s)
    }

    pub fn first_year(&self) -> i32 {
        self.first
    }

    pub fn last_year(&self) -> i32 {
        self.first + self.values.len() as i32 - 1
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first..=self.last_year()
    }

    pub fn covers(&self, year: i32) -> bool {
        year >= self.first && year <= self.last_year()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        if self.covers(year) {
            self.values[(year - self.first) as usize]
        } else {
            None
        }
    }

    pub fn set(&mut self, year: i32, value: Option<f64>) -> Result<()> {
        if !self.covers(year) {
            return Err(Error::Argument(format!(
                "year {year} outside {}..={}",
                self.first,
                self.last_year()
            )));
        }
        if let Some(v) = value {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Argument(format!(
                    "value {v} for {year} must be finite and nonnegative"
                )));
            }
        }
        self.values[(year - self.first) as usize] = value;
        Ok(())
    }

    /// Present `(year, value)` pairs in year order.
    pub fn present(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|v| (self.first + i as i32, v)))
    }

    /// Values for every year of `from..=to`, or `None` if any is missing.
    pub fn window(&self, from: i32, to: i32) -> Option<Vec<f64>> {
        (from..=to).map(|y| self.get(y)).collect()
    }

    /// Present values within `from..=to`.
    pub fn present_in(&self, from: i32, to: i32) -> Vec<f64> {
        self.present()
            .filter(|(y, _)| *y >= from && *y <= to)
            .map(|(_, v)| v)
            .collect()
    }

    pub fn count_present(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryRecord {
    pub country: String,
    pub region: RegionId,
    pub pm25: YearSeries,
    pub population: Option<f64>,
    pub area: Option<f64>,
    pub density: Option<f64>,
    pub deaths: YearSeries,
    /// Years whose PM2.5 value was fabricated as 0 by [`FillPolicy::ZeroFill`].
    pub zero_filled: Vec<i32>,
}

impl CountryRecord {
    /// Builds a record, deriving density from population and area.
    pub fn new(
        country: impl Into<String>,
        region: RegionId,
        pm25: YearSeries,
        population: Option<f64>,
        area: Option<f64>,
        deaths: YearSeries,
    ) -> Result<Self> {
        let country = country.into();
        let bad = |m: String| Error::Argument(format!("{country}: {m}"));
        if country.trim().is_empty() {
            return Err(Error::Argument("country name is empty".into()));
        }
        if let Some(p) = population {
            if !p.is_finite() || p < 0.0 {
                return Err(bad(format!("population {p} must be finite and nonnegative")));
            }
        }
        if let Some(a) = area {
            if !a.is_finite() || a <= 0.0 {
                return Err(bad(format!("area {a} must be strictly positive")));
            }
        }
        let density = match (population, area) {
            (Some(p), Some(a)) => Some(p / a),
            _ => None,
        };
        Ok(CountryRecord {
            country,
            region,
            pm25,
            population,
            area,
            density,
            deaths,
            zero_filled: Vec::new(),
        })
    }

    pub fn pm25_2023(&self) -> Option<f64> {
        self.pm25.get(LAST_OBSERVED_YEAR)
    }

    /// PM2.5 as measured, ignoring any zero fill.
    pub fn observed_pm25(&self, year: i32) -> Option<f64> {
        if self.zero_filled.contains(&year) {
            None
        } else {
            self.pm25.get(year)
        }
    }

    /// The PM2.5 series with zero-filled years removed.
    pub fn observed_series(&self) -> YearSeries {
        let mut s = self.pm25.clone();
        for &y in &self.zero_filled {
            s.set(y, None).expect("filled year is in span");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FillPolicy {
    /// Missing PM2.5 observations in 2018..=2023 become 0.
    ZeroFill,
    /// Missing observations stay missing.
    #[default]
    Exclude,
}

impl FillPolicy {
    pub fn name(self) -> &'static str {
        match self {
            FillPolicy::ZeroFill => "zero",
            FillPolicy::Exclude => "exclude",
        }
    }
}

impl FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "zerofill" | "zero-fill" => Ok(FillPolicy::ZeroFill),
            "exclude" => Ok(FillPolicy::Exclude),
            other => Err(Error::Argument(format!("unknown fill policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<CountryRecord>,
    fill_policy: FillPolicy,
    source: String,
}

impl Dataset {
    /// Validates uniqueness and applies the fill policy.
    pub fn new(mut records: Vec<CountryRecord>, fill_policy: FillPolicy, source: impl Into<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.country.clone()) {
                return Err(Error::DuplicateCountry(r.country.clone()));
            }
        }
        for r in &mut records {
            r.pm25 = r.observed_series();
            r.zero_filled.clear();
            if fill_policy == FillPolicy::ZeroFill {
                for year in FIRST_YEAR..=LAST_OBSERVED_YEAR {
                    if r.pm25.get(year).is_none() {
                        r.pm25.set(year, Some(0.0))?;
                        r.zero_filled.push(year);
                    }
                }
            }
        }
        Ok(Dataset {
            records,
            fill_policy,
            source: source.into(),
        })
    }

    pub fn records(&self) -> &[CountryRecord] {
        &self.records
    }

    pub fn fill_policy(&self) -> FillPolicy {
        self.fill_policy
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, country: &str) -> Option<&CountryRecord> {
        self.records.iter().find(|r| r.country == country)
    }

    pub fn pm25(&self, country: &str, year: i32) -> Option<f64> {
        self.get(country).and_then(|r| r.pm25.get(year))
    }

    pub fn in_region(&self, region: RegionId) -> impl Iterator<Item = &CountryRecord> {
        self.records.iter().filter(move |r| r.region == region)
    }

    /// Same records reinterpreted under another fill policy.
    ///
    /// Fabricated zeros are tracked, so switching back to `Exclude` restores
    /// the original gaps.
    pub fn with_fill_policy(&self, fill_policy: FillPolicy) -> Result<Self> {
        Dataset::new(self.records.clone(), fill_policy, self.source.clone())
    }
}
