//! Result records and their CSV / JSON encodings.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use pulsewell::resolvent::{Status, SurvivalResult};
use pulsewell::PulseParams;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One evaluated parameter point. Numeric cells are always finite; failed
/// points carry zeros and a non-`ok` flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub lambda: f64,
    pub omega: f64,
    pub alpha: f64,
    pub re_r: f64,
    pub im_r: f64,
    pub abs_r: f64,
    pub probability: f64,
    pub err_estimate: f64,
    pub depth_used: usize,
    pub digits_used: u32,
    pub flag: String,
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

impl Record {
    pub fn from_result(params: &PulseParams, result: &SurvivalResult) -> Self {
        let values = [result.r.re, result.r.im, result.probability, result.err_estimate];
        let flag = if values.iter().all(|v| v.is_finite()) {
            result.status.as_str().to_string()
        } else {
            "nonfinite".to_string()
        };
        Self {
            lambda: params.lambda,
            omega: params.omega,
            alpha: params.alpha,
            re_r: finite(result.r.re),
            im_r: finite(result.r.im),
            abs_r: finite(result.r.norm()),
            probability: finite(result.probability),
            err_estimate: finite(result.err_estimate),
            depth_used: result.depth_used,
            digits_used: result.digits_used,
            flag,
        }
    }

    pub fn failed(lambda: f64, omega: f64, alpha: f64, err: &pulsewell::Error) -> Self {
        Self {
            lambda,
            omega,
            alpha,
            re_r: 0.0,
            im_r: 0.0,
            abs_r: 0.0,
            probability: 0.0,
            err_estimate: 0.0,
            depth_used: 0,
            digits_used: 0,
            flag: error_flag(err).to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.flag == Status::Converged.as_str()
    }
}

pub fn error_flag(err: &pulsewell::Error) -> &'static str {
    use pulsewell::Error::*;
    match err {
        Unconverged { .. } => "unconverged",
        PrecisionExhausted { .. } => "precision_exhausted",
        QuadratureFailure { .. } => "quadrature_failure",
        ZeroArgument(_) | SingularCoefficient(_) => "singular",
        _ => "error",
    }
}

/// Write rows of any serializable record type with a header row.
pub fn write_rows<R: Serialize, W: Write>(rows: &[R], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn result(r: Complex64) -> SurvivalResult {
        SurvivalResult {
            r,
            probability: r.norm_sqr(),
            err_estimate: 1e-13,
            depth_used: 9,
            digits_used: 15,
            abs_term_total: 1.0,
            status: Status::Converged,
        }
    }

    #[test]
    fn csv_has_the_documented_columns() {
        let p = PulseParams::new(1.0, 3.0, 0.0).unwrap();
        let rec = Record::from_result(&p, &result(Complex64::new(0.0, 1.0)));
        let mut buf = Vec::new();
        write_rows(&[rec], Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "lambda,omega,alpha,re_r,im_r,abs_r,probability,err_estimate,depth_used,digits_used,flag"
        );
        assert_eq!(lines.next().unwrap(), "1.0,3.0,0.0,0.0,1.0,1.0,1.0,1e-13,9,15,ok");
    }

    #[test]
    fn non_finite_values_are_flagged_not_written() {
        let p = PulseParams::new(1.0, 3.0, 1.0).unwrap();
        let rec = Record::from_result(&p, &result(Complex64::new(f64::NAN, 1.0)));
        assert_eq!(rec.flag, "nonfinite");
        assert_eq!(rec.re_r, 0.0);
        assert!(!rec.is_ok());
    }
}
