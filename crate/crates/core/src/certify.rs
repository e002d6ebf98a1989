//! Per-dimension certificates: build the construction for dimension `n`,
//! run every check, and assemble `|K|·diam²` against `12/n²`.

use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::curvature::{analytic_bound, max_abs_curvature};
use crate::error::{Error, Result};
use crate::exactalg::{
    build_polynomial, charpoly_exact, companion_matrix, is_unimodular, PolySpec,
};
use crate::quotient::{conjugator, diameter_upper, lattice_invariance_check, CONJUGATION_TOL};
use crate::solvgroup::assemble_generator;
use crate::spectra::{
    check_not_nilcoverable, cross_check, roots_closed_form, verify_spectral_bound,
};

pub const SCHEMA: &str = "pinch-cert/1";
pub const DEFAULT_BUDGET: usize = 4096;
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Slack allowed between the sampled curvature maximum and `11/4·λ_max²`.
pub const CURVATURE_SLACK: f64 = 1e-6;
/// Minimum `max |e^{λ_i} − 1|` accepted as evidence of an eigenvalue off the
/// unit circle.
pub const WITNESS_MIN: f64 = 0.01;
/// Largest `log2 h` tried by the automatic lattice refinement.
pub const MAX_H_EXPONENT: u32 = 30;

/// `√(12/11)`, the diameter threshold that turns `|K| ≤ 11/n²` into
/// `|K|·diam² < 12/n²`.
pub fn diameter_threshold() -> f64 {
    (12.0f64 / 11.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub h: Option<u64>,
    pub budget: usize,
    pub seed: u64,
    /// Select `h` against the diameter bound with base diameter 1 instead
    /// of 1/2.
    pub paper_mode: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            h: None,
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
            paper_mode: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub spec: PolySpec,
    pub polynomial: String,
    pub unimodular: bool,
    pub charpoly_matches: bool,
    pub root_cross_check: f64,
    pub lambda_max: f64,
    pub two_over_n: f64,
    pub spectral_bound_holds: bool,
    pub spectral_margin: f64,
    pub curv_bound: f64,
    pub curv_sampled_max: f64,
    pub curv_samples: usize,
    pub conjugation_residual: f64,
    pub lattice_invariance: f64,
    pub h: u64,
    pub fiber_sup: f64,
    pub diam_upper: f64,
    pub diam_upper_paper: f64,
    pub product: f64,
    pub product_paper: f64,
    pub target: f64,
    pub passes: bool,
    pub passes_paper_mode: bool,
    pub not_nilcoverable_witness: f64,
    pub budget: usize,
    pub seed: u64,
    /// Wall-clock time; left out of JSON so that certificates are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub runtime_ms: u64,
}

/// Runs the whole pipeline for dimension `n`.
pub fn certify_dimension(
    n: usize,
    h: Option<u64>,
    budget: usize,
    seed: u64,
) -> Result<Certificate> {
    certify_with(
        n,
        &CertifyOptions {
            h,
            budget,
            seed,
            paper_mode: false,
        },
    )
}

pub fn certify_with(n: usize, opts: &CertifyOptions) -> Result<Certificate> {
    let start = Instant::now();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension {n} < 2")));
    }
    if opts.h == Some(0) {
        return Err(Error::InvalidArgument("h must be positive".into()));
    }
    let spec = PolySpec::for_dimension(n).map_err(Error::at("polynomial"))?;
    let poly = build_polynomial(&spec).map_err(Error::at("polynomial"))?;

    let t = companion_matrix(&poly).map_err(Error::at("companion"))?;
    let charpoly_matches = charpoly_exact(&t) == poly;
    let unimodular = is_unimodular(&t);
    if !charpoly_matches || !unimodular {
        return Err(Error::CheckFailed {
            stage: "companion",
            detail: format!("charpoly match {charpoly_matches}, unimodular {unimodular}"),
        });
    }

    let closed = roots_closed_form(&spec).map_err(Error::at("spectrum"))?;
    let (_, root_cross_check) = cross_check(&closed, &poly).map_err(Error::at("spectrum"))?;
    if closed.lambda_sum().abs() > 1e-12 {
        return Err(Error::CheckFailed {
            stage: "spectrum",
            detail: format!("sum of lambda is {:e}", closed.lambda_sum()),
        });
    }
    let spectral = verify_spectral_bound(&closed);
    let witness = closed
        .lambdas()
        .iter()
        .map(|l| (l.exp() - 1.0).abs())
        .fold(0.0, f64::max);
    if !check_not_nilcoverable(&closed, 1e-12) || witness <= WITNESS_MIN {
        return Err(Error::CheckFailed {
            stage: "spectrum",
            detail: format!("all eigenvalues lie on the unit circle (witness {witness:e})"),
        });
    }

    let a = assemble_generator(&closed).map_err(Error::at("generator"))?;
    let lattice = conjugator(&t, &closed).map_err(Error::at("lattice"))?;
    let invariance = lattice_invariance_check(&lattice, &a);
    if !(invariance < CONJUGATION_TOL) {
        return Err(Error::CheckFailed {
            stage: "lattice",
            detail: format!("lattice invariance defect {invariance:e}"),
        });
    }

    let curv_bound = analytic_bound(&closed);
    let report = max_abs_curvature(&a, opts.budget, opts.seed).map_err(Error::at("curvature"))?;
    if report.max_abs > curv_bound * (1.0 + CURVATURE_SLACK) {
        return Err(Error::CheckFailed {
            stage: "curvature",
            detail: format!("sampled |K| {} exceeds bound {curv_bound}", report.max_abs),
        });
    }

    let target = 12.0 / (n * n) as f64;
    let acceptable =
        |upper: f64| upper < diameter_threshold() && curv_bound * upper * upper < target;
    let (h, diam) = match opts.h {
        Some(h) => (
            h,
            diameter_upper(&lattice.with_h(h), &a).map_err(Error::at("diameter"))?,
        ),
        None => {
            let mut chosen = None;
            for e in 0..=MAX_H_EXPONENT {
                let h = 1u64 << e;
                let d = diameter_upper(&lattice.with_h(h), &a).map_err(Error::at("diameter"))?;
                let upper = if opts.paper_mode {
                    d.upper_paper
                } else {
                    d.upper
                };
                let last = e == MAX_H_EXPONENT;
                if acceptable(upper) || last {
                    chosen = Some((h, d));
                    break;
                }
            }
            chosen.expect("loop always chooses")
        }
    };

    let product = curv_bound * diam.upper * diam.upper;
    let product_paper = curv_bound * diam.upper_paper * diam.upper_paper;
    Ok(Certificate {
        n,
        spec,
        polynomial: poly.to_string(),
        unimodular,
        charpoly_matches,
        root_cross_check,
        lambda_max: closed.lambda_max,
        two_over_n: 2.0 / n as f64,
        spectral_bound_holds: spectral.holds,
        spectral_margin: spectral.margin,
        curv_bound,
        curv_sampled_max: report.max_abs,
        curv_samples: report.samples_used,
        conjugation_residual: lattice.residual,
        lattice_invariance: invariance,
        h,
        fiber_sup: diam.fiber_sup,
        diam_upper: diam.upper,
        diam_upper_paper: diam.upper_paper,
        product,
        product_paper,
        target,
        passes: product < target,
        passes_paper_mode: product_paper < target,
        not_nilcoverable_witness: witness,
        budget: opts.budget,
        seed: opts.seed,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// One row of a multi-dimension table; failures are kept in-row.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TableRow {
    pub fn passes(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.passes)
    }
}

/// Certificates for every dimension in `dims` (only even ones when
/// `even_only`), computed independently.
pub fn table(dims: RangeInclusive<usize>, even_only: bool, opts: &CertifyOptions) -> Vec<TableRow> {
    let dims: Vec<usize> = dims.filter(|n| !even_only || n % 2 == 0).collect();
    dims.into_par_iter()
        .map(|n| match certify_with(n, opts) {
            Ok(c) => TableRow {
                n,
                certificate: Some(c),
                error: None,
            },
            Err(e) => TableRow {
                n,
                certificate: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Rounds a float to 15 significant digits.
pub fn round_sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num
                .as_f64()
                .map(round_sig15)
                .and_then(serde_json::Number::from_f64)
            {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Versioned JSON document wrapping `payload` under `key`, with every float
/// rounded to 15 significant digits.
pub fn to_canonical_json<T: Serialize>(key: &str, payload: &T) -> Result<String> {
    let mut body = serde_json::to_value(payload)?;
    round_floats(&mut body);
    let mut doc = serde_json::Map::new();
    doc.insert("schema".into(), Value::String(SCHEMA.into()));
    doc.insert(key.into(), body);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
    s.push('\n');
    Ok(s)
}

pub fn certificate_json(c: &Certificate) -> Result<String> {
    to_canonical_json("certificate", c)
}

pub fn table_json(rows: &[TableRow]) -> Result<String> {
    to_canonical_json("certificates", &rows)
}

pub const CSV_COLUMNS: [&str; 20] = [
    "n",
    "k",
    "sign",
    "odd_factor",
    "lambda_max",
    "two_over_n",
    "spectral_ok",
    "curv_bound",
    "curv_sampled",
    "h",
    "diam_upper",
    "diam_upper_paper",
    "product",
    "product_paper",
    "target",
    "passes",
    "passes_paper_mode",
    "witness",
    "seed",
    "runtime_ms",
];

fn fmt_f(x: f64) -> String {
    format!("{}", round_sig15(x))
}

/// CSV with the fixed column set; rows that failed carry only `n` and
/// `passes = false`.
pub fn table_csv(rows: &[TableRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for row in rows {
        let record: Vec<String> = match &row.certificate {
            Some(c) => vec![
                c.n.to_string(),
                c.spec.k.to_string(),
                c.spec.sign.to_string(),
                c.spec.odd_factor.to_string(),
                fmt_f(c.lambda_max),
                fmt_f(c.two_over_n),
                c.spectral_bound_holds.to_string(),
                fmt_f(c.curv_bound),
                fmt_f(c.curv_sampled_max),
                c.h.to_string(),
                fmt_f(c.diam_upper),
                fmt_f(c.diam_upper_paper),
                fmt_f(c.product),
                fmt_f(c.product_paper),
                fmt_f(c.target),
                c.passes.to_string(),
                c.passes_paper_mode.to_string(),
                fmt_f(c.not_nilcoverable_witness),
                c.seed.to_string(),
                c.runtime_ms.to_string(),
            ],
            None => {
                let mut r = vec![String::new(); CSV_COLUMNS.len()];
                r[0] = row.n.to_string();
                r[15] = "false".into();
                r[16] = "false".into();
                r
            }
        };
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const BUDGET: usize = 256;

    #[test]
    fn n4_defaults() {
        let c = certify_dimension(4, None, BUDGET, 1).unwrap();
        assert_abs_diff_eq!(c.lambda_max, 0.481_211_825_059_603_5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.curv_bound, 0.636_803_256_587_284_6, epsilon = 1e-12);
        assert_abs_diff_eq!(c.target, 0.75, epsilon = 1e-15);
        assert!(c.passes);
        assert!(c.spectral_bound_holds);
        assert!(c.curv_sampled_max <= c.curv_bound * (1.0 + 1e-6));
        assert!(c.diam_upper < diameter_threshold());
    }

    #[test]
    fn n3_passes_despite_spectral_gap() {
        let c = certify_dimension(3, None, BUDGET, 1).unwrap();
        assert!(!c.spectral_bound_holds);
        assert!(c.spectral_margin < 0.0);
        assert!(c.passes);
        assert!(c.diam_upper > 0.5 && c.diam_upper < 0.73);
        assert_abs_diff_eq!(c.target, 12.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn n2_witness_is_golden_ratio() {
        let c = certify_dimension(2, None, BUDGET, 1).unwrap();
        assert_abs_diff_eq!(
            c.not_nilcoverable_witness,
            1.618_033_988_749_895,
            epsilon = 1e-12
        );
    }

    #[test]
    fn explicit_h_and_errors() {
        let coarse = certify_dimension(4, Some(1), BUDGET, 1).unwrap();
        let fine = certify_dimension(4, Some(64), BUDGET, 1).unwrap();
        assert_eq!(fine.h, 64);
        assert!(fine.product < coarse.product);
        assert!(fine.product / fine.target < coarse.product / coarse.target);
        assert!(certify_dimension(1, None, BUDGET, 1).is_err());
        assert!(certify_dimension(4, Some(0), BUDGET, 1).is_err());
        let err = certify_dimension(4, None, 2, 1).unwrap_err();
        assert!(err.to_string().starts_with("curvature:"), "{err}");
    }

    #[test]
    fn paper_mode_selection() {
        let opts = CertifyOptions {
            budget: BUDGET,
            paper_mode: true,
            ..Default::default()
        };
        let c = certify_with(4, &opts).unwrap();
        assert!(c.passes_paper_mode);
        assert!(c.passes);
        assert!(c.diam_upper_paper < diameter_threshold());
    }

    #[test]
    fn empty_table() {
        #[allow(clippy::reversed_empty_ranges)]
        let rows = table(5..=4, false, &CertifyOptions::default());
        assert!(rows.is_empty());
        let csv = table_csv(&rows).unwrap();
        assert_eq!(csv.trim(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn table_keeps_failures_in_row() {
        let opts = CertifyOptions {
            budget: 6,
            ..Default::default()
        };
        // budget 6 covers the coordinate planes of n = 2 (three) but not n = 4 (ten)
        let rows = table(2..=4, true, &opts);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].certificate.is_some());
        assert!(rows[1].error.is_some());
        let csv = table_csv(&rows).unwrap();
        let last = csv.lines().last().unwrap();
        assert!(last.starts_with("4,"));
        let json: Value = serde_json::from_str(&table_json(&rows).unwrap()).unwrap();
        assert_eq!(json["schema"], SCHEMA);
        assert!(json["certificates"][1]["error"].is_string());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig15(0.1 + 0.2), 0.3);
        assert_eq!(round_sig15(1.0 / 3.0), 0.333_333_333_333_333);
        assert_eq!(round_sig15(0.0), 0.0);
    }

    #[test]
    fn json_is_deterministic_and_versioned() {
        let a = certificate_json(&certify_dimension(5, None, BUDGET, 9).unwrap()).unwrap();
        let b = certificate_json(&certify_dimension(5, None, BUDGET, 9).unwrap()).unwrap();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], "pinch-cert/1");
        assert!(v["certificate"].get("runtime_ms").is_none());
        assert_eq!(v["certificate"]["spec"]["k"], 2);
    }
}
