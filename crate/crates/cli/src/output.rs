use std::io::Write;

use serde::Serialize;

use crate::config::Format;

/// One sweep point. Column order is the CSV contract; absent values are empty (CSV) or
/// `null` (JSON).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub alpha: f64,
    pub q: Option<f64>,
    pub chi: Option<f64>,
    #[serde(rename = "D_linear")]
    pub d_linear: Option<f64>,
    /// `10 log10(D_linear)`; empty when `D_linear` is zero.
    #[serde(rename = "D_dB")]
    pub d_db: Option<f64>,
    pub p1: Option<f64>,
    pub mu1: Option<f64>,
    pub eta1: Option<f64>,
    #[serde(rename = "D_emp_mean")]
    pub d_emp_mean: Option<f64>,
    #[serde(rename = "D_emp_stderr")]
    pub d_emp_stderr: Option<f64>,
    pub rate_bits: Option<f64>,
    pub gamma_opt: Option<f64>,
    pub converged: bool,
    /// Why the point failed, if it did.
    pub error: Option<String>,
}

impl Row {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, converged: true, ..Self::default() }
    }

    pub fn set_distortion(&mut self, d: f64) {
        self.d_linear = Some(d);
        self.d_db = (d > 0.0).then(|| 10.0 * d.log10());
    }

    pub fn fail(&mut self, why: impl std::fmt::Display) {
        self.converged = false;
        let why = why.to_string();
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {why}"),
            None => why,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfdmRow {
    pub seed: u64,
    #[serde(rename = "L")]
    pub subcarriers: usize,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "N")]
    pub antennas: usize,
    pub ks: f64,
    pub unitarity_residual: f64,
    pub pass: bool,
}

/// Run metadata: written as a leading `# meta key=value ...` line in CSV and as the `meta`
/// object in JSON.
pub type Meta = Vec<(&'static str, String)>;

pub fn emit<R: Serialize>(out: &mut dyn Write, format: Format, meta: &Meta, rows: &[R]) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(out, "# meta {}", line.join(" "))?;
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(std::io::Error::other)?;
            }
            w.flush()
        }
        Format::Json => {
            let meta: serde_json::Map<String, serde_json::Value> =
                meta.iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone()))).collect();
            let doc = serde_json::json!({ "meta": meta, "rows": rows });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = Row::new(2.0);
        r.set_distortion(0.1);
        let mut buf = Vec::new();
        emit(&mut buf, Format::Csv, &vec![("seed", "1".into())], &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# meta seed=1");
        assert_eq!(
            lines[1],
            "alpha,q,chi,D_linear,D_dB,p1,mu1,eta1,D_emp_mean,D_emp_stderr,rate_bits,gamma_opt,converged,error"
        );
        assert_eq!(lines[2], "2.0,,,0.1,-10.0,,,,,,,,true,");
    }

    #[test]
    fn zero_distortion_has_no_db() {
        let mut r = Row::new(1.0);
        r.set_distortion(0.0);
        assert_eq!(r.d_db, None);
    }
}
