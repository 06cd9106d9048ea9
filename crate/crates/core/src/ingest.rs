//! Observed degree series, degree composition, and reconstruction of the
//! latent undergraduate and graduate stocks.
//!
//! Reconstruction inverts the observation equations year by year, so the
//! consistency report produced here is an in-sample check: bachelor's and
//! total graduate flows are reproduced by construction and master's/doctoral
//! errors only reflect the fixed composition split against year-to-year
//! variation.

use std::fmt;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

const HEADER: [&str; 4] = ["year", "bachelors", "masters", "doctorates"];

/// Raw bytes of the bundled sample.
pub static BUNDLED_SAMPLE: &str = include_str!("../data/synthetic_degrees.csv");

/// Degrees awarded in one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeRecord {
    pub year: i32,
    pub bachelors: f64,
    pub masters: f64,
    pub doctorates: f64,
}

impl DegreeRecord {
    pub fn graduate(&self) -> f64 {
        self.masters + self.doctorates
    }
}

/// Annual degree completions over a contiguous range of years.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSeries {
    records: Vec<DegreeRecord>,
}

impl DegreeSeries {
    /// Sorts by year and validates: at least two records, contiguous years,
    /// finite nonnegative counts.
    pub fn new(mut records: Vec<DegreeRecord>) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::Parse(format!(
                "series needs at least 2 records, got {}",
                records.len()
            )));
        }
        records.sort_by_key(|r| r.year);
        for r in &records {
            for (field, v) in [
                ("bachelors", r.bachelors),
                ("masters", r.masters),
                ("doctorates", r.doctorates),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Parse(format!(
                        "year {}: field `{field}`: negative or non-finite count {v}",
                        r.year
                    )));
                }
            }
        }
        if let Some(w) = records.windows(2).find(|w| w[1].year != w[0].year + 1) {
            return Err(Error::Parse(format!(
                "non-contiguous years: {} followed by {}",
                w[0].year, w[1].year
            )));
        }
        Ok(DegreeSeries { records })
    }

    pub fn records(&self) -> &[DegreeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_year(&self) -> i32 {
        self.records[0].year
    }

    pub fn last(&self) -> &DegreeRecord {
        self.records.last().expect("validated series is nonempty")
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        DegreeSeries {
            records: self
                .records
                .iter()
                .map(|r| DegreeRecord {
                    year: r.year,
                    bachelors: r.bachelors * factor,
                    masters: r.masters * factor,
                    doctorates: r.doctorates * factor,
                })
                .collect(),
        }
    }

    /// Appends records for the following years. The caller guarantees
    /// contiguity and nonnegativity.
    pub(crate) fn extend(&mut self, extra: impl IntoIterator<Item = DegreeRecord>) {
        self.records.extend(extra);
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(HEADER).map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.year.to_string(),
                r.bachelors.to_string(),
                r.masters.to_string(),
                r.doctorates.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// The synthetic 1970-2020 sample shipped with the crate.
pub fn bundled_sample() -> DegreeSeries {
    parse_degree_csv(BUNDLED_SAMPLE.as_bytes()).expect("bundled sample is valid")
}

/// Parses `year,bachelors,masters,doctorates` CSV (LF or CRLF, integer or
/// decimal counts).
pub fn parse_degree_csv<R: Read>(source: R) -> Result<DegreeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::Parse("missing header".into()));
    }
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected header `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            HEADER.join(",")
        )));
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse(format!("row {row_no}: {e}")))?;
        if row.len() != HEADER.len() {
            return Err(Error::Parse(format!(
                "row {row_no}: expected {} fields, found {}",
                HEADER.len(),
                row.len()
            )));
        }
        let year: i32 = row[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row_no}: field `year`: invalid year `{}`", &row[0])))?;
        let mut counts = [0.0; 3];
        for (k, slot) in counts.iter_mut().enumerate() {
            let field = HEADER[k + 1];
            let raw = &row[k + 1];
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::Parse(format!("row {row_no}: field `{field}`: invalid number `{raw}`")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parse(format!(
                    "row {row_no}: field `{field}`: negative count {v}"
                )));
            }
            *slot = v;
        }
        records.push(DegreeRecord {
            year,
            bachelors: counts[0],
            masters: counts[1],
            doctorates: counts[2],
        });
    }
    if records.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    DegreeSeries::new(records)
}

/// Master's and doctoral shares of all graduate degrees over the series.
pub fn estimate_composition(series: &DegreeSeries) -> Result<(f64, f64)> {
    let masters: f64 = series.records.iter().map(|r| r.masters).sum();
    let total: f64 = series.records.iter().map(DegreeRecord::graduate).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateComposition);
    }
    let r_m = masters / total;
    Ok((r_m, 1.0 - r_m))
}

/// Latent stocks recovered from degree flows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructedStocks {
    pub years: Vec<i32>,
    pub undergrad: Vec<f64>,
    pub graduate: Vec<f64>,
    pub g_u: f64,
    pub g_g: f64,
    pub r_m: f64,
    pub r_d: f64,
}

/// `U_t = B_s(t) / g_U`, `G_t = (M_s(t) + D_s(t)) / g_G`.
pub fn reconstruct_stocks(series: &DegreeSeries, params: &ModelParams) -> Result<ReconstructedStocks> {
    if params.g_u <= 0.0 {
        return Err(Error::DivisionGuard(
            "g_U must be > 0 to reconstruct undergraduate stocks".into(),
        ));
    }
    if params.g_g <= 0.0 {
        return Err(Error::DivisionGuard(
            "g_G must be > 0 to reconstruct graduate stocks".into(),
        ));
    }
    let recs = series.records();
    Ok(ReconstructedStocks {
        years: recs.iter().map(|r| r.year).collect(),
        undergrad: recs.iter().map(|r| r.bachelors / params.g_u).collect(),
        graduate: recs.iter().map(|r| r.graduate() / params.g_g).collect(),
        g_u: params.g_u,
        g_g: params.g_g,
        r_m: params.r_m,
        r_d: params.r_d,
    })
}

/// Degree flows generated by the stocks through the observation equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedFlows {
    pub year: i32,
    pub bachelors: f64,
    pub masters: f64,
    pub doctorates: f64,
}

pub fn implied_degree_flows(stocks: &ReconstructedStocks, params: &ModelParams) -> Vec<ImpliedFlows> {
    stocks
        .years
        .iter()
        .zip(stocks.undergrad.iter().zip(&stocks.graduate))
        .map(|(&year, (&u, &g))| {
            let grad = params.g_g * g;
            ImpliedFlows {
                year,
                bachelors: params.g_u * u,
                masters: params.r_m * grad,
                doctorates: params.r_d * grad,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Bachelors,
    Masters,
    Doctorates,
    /// Master's plus doctoral degrees.
    Graduate,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Bachelors,
        Channel::Masters,
        Channel::Doctorates,
        Channel::Graduate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Bachelors => "bachelors",
            Channel::Masters => "masters",
            Channel::Doctorates => "doctorates",
            Channel::Graduate => "graduate",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRow {
    pub year: i32,
    pub channel: Channel,
    pub observed: f64,
    pub implied: f64,
    /// `|implied - observed| / observed`; zero when both vanish, absent when
    /// only the observation does.
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub r_m: f64,
    pub r_d: f64,
}

impl ConsistencyReport {
    pub const NOTE: &'static str = "in-sample consistency check: stocks are reconstructed from the same \
        degree series, so bachelor's and total graduate flows match by construction; master's and doctoral \
        errors reflect only the fixed composition split. This is not out-of-sample validation.";

    pub fn max_rel_error(&self, channel: Channel) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.channel == channel)
            .filter_map(|r| r.rel_error)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))))
    }

    /// CSV with columns `year,channel,observed,implied,rel_error`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["year", "channel", "observed", "implied", "rel_error"])
            .map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.year.to_string(),
                r.channel.to_string(),
                r.observed.to_string(),
                r.implied.to_string(),
                r.rel_error.map(|e| e.to_string()).unwrap_or_default(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

fn rel_error(observed: f64, implied: f64) -> Option<f64> {
    if observed != 0.0 {
        Some((implied - observed).abs() / observed)
    } else if implied == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Compares observed flows with those implied by the reconstructed stocks,
/// using the composition in `params`.
pub fn consistency_report(series: &DegreeSeries, params: &ModelParams) -> Result<ConsistencyReport> {
    let stocks = reconstruct_stocks(series, params)?;
    let implied = implied_degree_flows(&stocks, params);
    let mut rows = Vec::with_capacity(series.len() * Channel::ALL.len());
    for (obs, imp) in series.records().iter().zip(&implied) {
        for channel in Channel::ALL {
            let (o, i) = match channel {
                Channel::Bachelors => (obs.bachelors, imp.bachelors),
                Channel::Masters => (obs.masters, imp.masters),
                Channel::Doctorates => (obs.doctorates, imp.doctorates),
                Channel::Graduate => (obs.graduate(), imp.masters + imp.doctorates),
            };
            rows.push(ConsistencyRow {
                year: obs.year,
                channel,
                observed: o,
                implied: i,
                rel_error: rel_error(o, i),
            });
        }
    }
    Ok(ConsistencyReport {
        rows,
        r_m: params.r_m,
        r_d: params.r_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamName;
    use proptest::prelude::*;

    fn series(rows: &[(i32, f64, f64, f64)]) -> DegreeSeries {
        DegreeSeries::new(
            rows.iter()
                .map(|&(year, bachelors, masters, doctorates)| DegreeRecord {
                    year,
                    bachelors,
                    masters,
                    doctorates,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let s = parse_degree_csv(
            "year,bachelors,masters,doctorates\n1970,24801,5636,1236\n1971,24937,5191,1199".as_bytes(),
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.records()[1].masters, 5191.0);
    }

    #[test]
    fn parses_crlf_decimals_and_unsorted_rows() {
        let s = parse_degree_csv("year,bachelors,masters,doctorates\r\n1971,1.5,2,3\r\n1970,4,5.25,6\r\n".as_bytes())
            .unwrap();
        assert_eq!(s.first_year(), 1970);
        assert_eq!(s.records()[0].masters, 5.25);
        assert_eq!(s.records()[1].bachelors, 1.5);
    }

    #[test]
    fn parse_errors() {
        let err = |text: &str| parse_degree_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err("").contains("missing header"));
        assert!(err("year,bachelors,masters,doctorates\n1970,1,1,1\n1970,1,1,1").contains("non-contiguous years"));
        assert!(err("year,bachelors,masters,doctorates\n1970,1,1,1\n1972,1,1,1").contains("non-contiguous years"));
        let e = err("year,bachelors,masters,doctorates\n1970,1,1,1\n1971,1,abc,1");
        assert!(e.contains("row 2") && e.contains("masters"), "{e}");
        let e = err("year,bachelors,masters,doctorates\n1970,1,1,1\n1971,1,1,-4");
        assert!(e.contains("doctorates") && e.contains("negative"), "{e}");
        assert!(err("year,ba,masters,doctorates\n1970,1,1,1\n1971,1,1,1").contains("unexpected header"));
        assert!(err("year,bachelors,masters,doctorates\n1970,1,1,1").contains("at least 2"));
    }

    #[test]
    fn bundled_sample_shape() {
        let s = bundled_sample();
        assert_eq!(s.len(), 51);
        assert_eq!(s.first_year(), 1970);
        assert_eq!(s.last().year, 2020);
        let (r_m, _) = estimate_composition(&s).unwrap();
        assert!((r_m - 0.80).abs() < 0.02, "{r_m}");
    }

    #[test]
    fn composition_examples() {
        let (m, d) = estimate_composition(&series(&[(2000, 1.0, 80.0, 20.0), (2001, 1.0, 80.0, 20.0)])).unwrap();
        assert!((m - 0.8).abs() < 1e-15 && (d - 0.2).abs() < 1e-15);
        let (m, d) = estimate_composition(&series(&[(2000, 1.0, 0.0, 10.0), (2001, 1.0, 0.0, 0.0)])).unwrap();
        assert_eq!((m, d), (0.0, 1.0));
        let zero = series(&[(2000, 5.0, 0.0, 0.0), (2001, 5.0, 0.0, 0.0)]);
        assert!(matches!(estimate_composition(&zero), Err(Error::DegenerateComposition)));
    }

    #[test]
    fn reconstruction_examples() {
        let s = series(&[(2000, 1_400.0, 850.0, 0.0), (2001, 0.0, 0.0, 0.0)]);
        let st = reconstruct_stocks(&s, &ModelParams::BASELINE).unwrap();
        assert!((st.undergrad[0] - 10_000.0).abs() < 1e-9);
        assert!((st.graduate[0] - 5_000.0).abs() < 1e-9);
        assert_eq!(st.graduate[1], 0.0);
        let bad = ModelParams::BASELINE.with(ParamName::GG, 0.0);
        assert!(matches!(reconstruct_stocks(&s, &bad), Err(Error::DivisionGuard(_))));
    }

    #[test]
    fn implied_flow_examples() {
        let stocks = ReconstructedStocks {
            years: vec![2000, 2001],
            undergrad: vec![10_000.0, 0.0],
            graduate: vec![5_000.0, 0.0],
            g_u: 0.14,
            g_g: 0.17,
            r_m: 0.8,
            r_d: 0.2,
        };
        let f = implied_degree_flows(&stocks, &ModelParams::BASELINE);
        assert!((f[0].bachelors - 1_400.0).abs() < 1e-9);
        assert!((f[0].masters - 680.0).abs() < 1e-9);
        assert!((f[0].doctorates - 170.0).abs() < 1e-9);
        assert_eq!((f[1].bachelors, f[1].masters, f[1].doctorates), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_composition_has_zero_error() {
        let s = series(&[
            (2000, 100.0, 80.0, 20.0),
            (2001, 130.0, 160.0, 40.0),
            (2002, 90.0, 40.0, 10.0),
        ]);
        let report = consistency_report(&s, &ModelParams::BASELINE).unwrap();
        assert!(report.max_rel_error(Channel::Masters).unwrap() < 1e-12);
        assert!(report.max_rel_error(Channel::Bachelors).unwrap() < 1e-12);
    }

    #[test]
    fn composition_drift_errors() {
        // masters share 0.75, 0.80, 0.85 of 100 graduate degrees
        let s = series(&[
            (2000, 1.0, 75.0, 25.0),
            (2001, 1.0, 80.0, 20.0),
            (2002, 1.0, 85.0, 15.0),
        ]);
        let report = consistency_report(&s, &ModelParams::BASELINE).unwrap();
        let m = report.max_rel_error(Channel::Masters).unwrap();
        let d = report.max_rel_error(Channel::Doctorates).unwrap();
        assert!((m - (0.8 / 0.75 - 1.0)).abs() < 1e-12, "{m}");
        assert!((d - (0.2 / 0.15 - 1.0)).abs() < 1e-12, "{d}");
    }

    #[test]
    fn zero_observation_marks_error_absent() {
        assert_eq!(rel_error(0.0, 0.0), Some(0.0));
        assert_eq!(rel_error(0.0, 3.0), None);
    }

    fn arb_series() -> impl Strategy<Value = DegreeSeries> {
        (
            1900i32..2100,
            prop::collection::vec((0u32..100_000, 0u32..20_000, 0u32..5_000), 2..40),
        )
            .prop_map(|(start, rows)| {
                series(
                    &rows
                        .iter()
                        .enumerate()
                        .map(|(i, &(b, m, d))| (start + i as i32, b as f64, m as f64 + 0.25, d as f64))
                        .collect::<Vec<_>>(),
                )
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(s in arb_series()) {
            let back = parse_degree_csv(s.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn reconstruction_round_trip(s in arb_series(), g_u in 0.01..1.0f64, g_g in 0.01..1.0f64) {
            let params = ModelParams { g_u, g_g, a_u: 0.0, a_g: 0.0, ..ModelParams::BASELINE };
            let stocks = reconstruct_stocks(&s, &params).unwrap();
            for (obs, imp) in s.records().iter().zip(implied_degree_flows(&stocks, &params)) {
                prop_assert!((imp.bachelors - obs.bachelors).abs() <= 1e-12 * obs.bachelors.max(1.0));
                let grad = imp.masters + imp.doctorates;
                prop_assert!((grad - obs.graduate()).abs() <= 1e-12 * obs.graduate().max(1.0));
            }
        }

        #[test]
        fn composition_scale_invariant(s in arb_series(), k in 0.01..100.0f64) {
            let (a, _) = estimate_composition(&s).unwrap();
            let (b, _) = estimate_composition(&s.scaled(k)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
