use super::{CountryRecord, Dataset, FillPolicy, RegionId, YearSeries, FIRST_YEAR, FORECAST_YEAR};

use RegionId::*;

type Entry = (RegionId, &'static str, &'static [(i32, f64)]);

/// Country PM2.5 values (µg/m³) quoted in the published regional trend
/// narratives. Countries named without numeric values carry an empty series.
const TABLE: &[Entry] = &[
    (SouthAsia, "Bangladesh", &[(2018, 79.9), (2023, 97.1)]),
    (SouthAsia, "India", &[(2018, 54.4), (2023, 72.5)]),
    (SouthAsia, "Pakistan", &[(2020, 66.8), (2021, 59.0)]),
    (SouthAsia, "Nepal", &[(2018, 42.4), (2023, 54.1)]),
    (SouthAsia, "Sri Lanka", &[(2018, 19.3), (2023, 32.0)]),
    (SouthAsia, "Maldives", &[(2018, 15.3), (2019, 10.9)]),
    (CentralAsia, "Kazakhstan", &[(2021, 21.9), (2023, 29.8)]),
    (CentralAsia, "Uzbekistan", &[(2020, 42.8), (2023, 34.3)]),
    (CentralAsia, "Kyrgyzstan", &[(2020, 50.8)]),
    (CentralAsia, "Tajikistan", &[(2020, 59.4)]),
    (SoutheastAsia, "Indonesia", &[(2021, 51.7), (2023, 42.0)]),
    (SoutheastAsia, "Thailand", &[(2018, 23.3), (2023, 26.4)]),
    (SoutheastAsia, "Vietnam", &[(2021, 34.1), (2023, 32.9)]),
    (SoutheastAsia, "Philippines", &[(2018, 13.5), (2023, 14.6)]),
    (SoutheastAsia, "Malaysia", &[(2018, 22.5), (2021, 19.4)]),
    (SoutheastAsia, "Singapore", &[(2018, 13.4), (2023, 14.8)]),
    (SoutheastAsia, "Myanmar", &[]),
    (SoutheastAsia, "Laos", &[]),
    (
        SoutheastAsia,
        "Cambodia",
        &[(2018, 22.8), (2019, 8.3), (2021, 21.1), (2023, 20.1)],
    ),
    (EastAsia, "China", &[(2018, 32.5), (2023, 42.2)]),
    (EastAsia, "Japan", &[(2018, 9.1), (2023, 12.0)]),
    (EastAsia, "South Korea", &[(2018, 19.2), (2023, 24.0)]),
    (EastAsia, "Taiwan", &[(2018, 20.2), (2020, 15.0), (2023, 18.5)]),
    (EastAsia, "Mongolia", &[(2018, 22.5), (2021, 62.0), (2023, 58.5)]),
    (EastAsia, "Macao SAR", &[(2018, 16.2), (2023, 21.2)]),
    (EastAsia, "Hong Kong SAR", &[(2018, 14.5), (2023, 20.2)]),
    (WestAsia, "Turkey", &[(2021, 18.7), (2023, 21.9)]),
    (WestAsia, "Saudi Arabia", &[(2019, 41.5), (2021, 22.1)]),
    (WestAsia, "Iraq", &[(2019, 80.1), (2021, 39.6)]),
    (WestAsia, "Israel", &[(2021, 16.9), (2023, 18.6)]),
    (WestAsia, "Qatar", &[(2018, 37.6), (2021, 44.3)]),
    (WestAsia, "Bahrain", &[(2018, 39.2), (2023, 59.8)]),
    (WestAsia, "Kuwait", &[(2019, 55.8), (2021, 34.0), (2023, 56.0)]),
    (
        WestAsia,
        "United Arab Emirates",
        &[(2018, 43.0), (2021, 29.2), (2023, 49.9)],
    ),
    (WestAsia, "Armenia", &[(2018, 26.4), (2020, 33.9)]),
    (WestAsia, "Azerbaijan", &[]),
    (WestAsia, "Georgia", &[]),
];

/// Source tag for the built-in dataset.
pub const EMBEDDED_SOURCE: &str = "embedded:published-narrative-values";

/// The built-in desk-scale dataset. No population, area or death data.
pub fn embedded_paper_dataset() -> Dataset {
    let records = TABLE
        .iter()
        .map(|(region, country, values)| {
            let pm25 = YearSeries::from_pairs(FIRST_YEAR, FORECAST_YEAR, values).expect("embedded values are valid");
            CountryRecord::new(*country, *region, pm25, None, None, YearSeries::deaths())
                .expect("embedded record is valid")
        })
        .collect();
    Dataset::new(records, FillPolicy::Exclude, EMBEDDED_SOURCE).expect("embedded countries are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoted_lookups() {
        let ds = embedded_paper_dataset();
        assert_eq!(ds.pm25("China", 2023), Some(42.2));
        assert_eq!(ds.pm25("Mongolia", 2021), Some(62.0));
        assert_eq!(ds.pm25("Maldives", 2023), None);
        assert_eq!(ds.pm25("Maldives", 2019), Some(10.9));
    }

    #[test]
    fn has_no_death_or_population_data() {
        let ds = embedded_paper_dataset();
        assert!(ds.records().iter().all(|r| r.deaths.count_present() == 0));
        assert!(ds.records().iter().all(|r| r.density.is_none()));
    }

    #[test]
    fn twenty_four_countries_report_2023() {
        let ds = embedded_paper_dataset();
        let n = ds.records().iter().filter(|r| r.pm25_2023().is_some()).count();
        assert_eq!(n, 24);
    }
}
