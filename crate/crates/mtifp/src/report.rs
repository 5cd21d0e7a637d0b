//! Convergence tables and their CSV form.
//!
//! ```text
//! # mti-fp report v1
//! #axis,temporal
//! #<key>,<value>
//! eps,resolution,error,rate
//! 0.5,0.2,0.717,
//! 0.5,0.05,0.0572,1.82
//! ...
//! max,0.2,0.717,
//! ```
//!
//! Errors and rates are written in shortest round-trip form, so parsing a
//! report gives back the same numbers. A failed cell has error `NaN`.

use std::fmt::Write as _;

pub const HEADER: &str = "# mti-fp report v1";
pub const COLUMNS: &str = "eps,resolution,error,rate";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Columns halve `h`.
    Spatial,
    /// Columns quarter `τ`.
    Temporal,
}

impl Axis {
    pub fn factor(self) -> f64 {
        match self {
            Axis::Spatial => 2.0,
            Axis::Temporal => 4.0,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Axis::Spatial => "spatial",
            Axis::Temporal => "temporal",
        }
    }
    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "spatial" => Some(Axis::Spatial),
            "temporal" => Some(Axis::Temporal),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub eps: f64,
    /// One error per column of [`ConvergenceReport::resolutions`].
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub axis: Axis,
    /// `h` or `τ` per column, coarse to fine.
    pub resolutions: Vec<f64>,
    pub rows: Vec<Row>,
    pub metadata: Vec<(String, String)>,
}

/// `log(e_coarse/e_fine)/log(factor)` between neighbouring columns;
/// `None` in the first column.
pub fn rates(errors: &[f64], factor: f64) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in errors.windows(2) {
        out.push(Some((w[0] / w[1]).ln() / factor.ln()));
    }
    out.truncate(errors.len());
    out
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("report header missing")]
    Header,
}

impl ConvergenceReport {
    pub fn row(&self, eps: f64) -> Option<&Row> {
        self.rows.iter().find(|r| r.eps == eps)
    }

    pub fn row_rates(&self, row: &Row) -> Vec<Option<f64>> {
        rates(&row.errors, self.axis.factor())
    }

    /// Columnwise max over ε; a failed cell poisons its column.
    pub fn uniform_row(&self) -> Vec<f64> {
        (0..self.resolutions.len())
            .map(|k| {
                self.rows.iter().map(|r| r.errors[k]).fold(f64::NEG_INFINITY, |m, e| {
                    if m.is_nan() || e.is_nan() {
                        f64::NAN
                    } else {
                        m.max(e)
                    }
                })
            })
            .collect()
    }

    pub fn uniform_rates(&self) -> Vec<Option<f64>> {
        rates(&self.uniform_row(), self.axis.factor())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}");
        let _ = writeln!(s, "#axis,{}", self.axis.name());
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "#{k},{v}");
        }
        let _ = writeln!(s, "{COLUMNS}");
        let mut emit = |eps: &str, errors: &[f64], rates: &[Option<f64>]| {
            for ((res, e), r) in self.resolutions.iter().zip(errors).zip(rates) {
                let r = r.map(|r| r.to_string()).unwrap_or_default();
                let _ = writeln!(s, "{eps},{res},{e},{r}");
            }
        };
        for row in &self.rows {
            emit(&row.eps.to_string(), &row.errors, &self.row_rates(row));
        }
        if !self.rows.is_empty() {
            emit("max", &self.uniform_row(), &self.uniform_rates());
        }
        s
    }

    /// Inverse of [`to_csv`](Self::to_csv). Rates and the uniform row are
    /// recomputed and must match the stored ones.
    pub fn from_csv(text: &str) -> Result<ConvergenceReport, ParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(ParseError::Header),
        }
        let bad = |line: usize, reason: &str| ParseError::Line { line: line + 1, reason: reason.to_owned() };
        let num = |line: usize, s: &str| s.parse::<f64>().map_err(|_| bad(line, &format!("not a number: {s:?}")));

        let mut axis = None;
        let mut metadata = Vec::new();
        let mut resolutions: Vec<f64> = Vec::new();
        let mut rows: Vec<Row> = Vec::new();
        let mut stored: Vec<(usize, String, f64, f64, Option<f64>)> = Vec::new();
        let mut in_body = false;
        for (i, line) in lines {
            if !in_body {
                if line == COLUMNS {
                    in_body = true;
                    continue;
                }
                let Some(kv) = line.strip_prefix('#') else { return Err(bad(i, "expected metadata or column header")) };
                let (k, v) = kv.split_once(',').ok_or_else(|| bad(i, "metadata needs key,value"))?;
                if k == "axis" {
                    axis = Some(Axis::parse(v).ok_or_else(|| bad(i, "unknown axis"))?);
                } else {
                    metadata.push((k.to_owned(), v.to_owned()));
                }
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(i, "expected 4 fields"));
            }
            let res = num(i, f[1])?;
            let err = num(i, f[2])?;
            let rate = if f[3].is_empty() { None } else { Some(num(i, f[3])?) };
            stored.push((i, f[0].to_owned(), res, err, rate));
            if f[0] == "max" {
                continue;
            }
            let eps = num(i, f[0])?;
            match rows.last_mut() {
                Some(r) if r.eps == eps => r.errors.push(err),
                _ => rows.push(Row { eps, errors: vec![err] }),
            }
            if rows.len() == 1 {
                resolutions.push(res);
            }
        }
        let axis = axis.ok_or(ParseError::Header)?;
        let report = ConvergenceReport { axis, resolutions, rows, metadata };
        if report.rows.iter().any(|r| r.errors.len() != report.resolutions.len()) {
            return Err(ParseError::Line { line: 0, reason: "rows have different lengths".into() });
        }
        // the stored derived values must be what we would write
        let again = report.to_csv();
        let ours: Vec<&str> = again.lines().skip_while(|l| *l != COLUMNS).skip(1).collect();
        for (k, (i, ..)) in stored.iter().enumerate() {
            let theirs = text.lines().nth(*i).unwrap_or_default();
            if ours.get(k) != Some(&theirs) {
                return Err(bad(*i, "row disagrees with the recomputed rates or uniform row"));
            }
        }
        if ours.len() != stored.len() {
            return Err(ParseError::Line { line: 0, reason: "missing uniform row".into() });
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ConvergenceReport {
        ConvergenceReport {
            axis: Axis::Temporal,
            resolutions: vec![0.2, 0.05, 0.0125],
            rows: vec![
                Row { eps: 0.5, errors: vec![0.717, 5.72e-2, 3.5e-3] },
                Row { eps: 0.25, errors: vec![0.54, 0.158, 1.12e-2] },
            ],
            metadata: vec![("scenario".into(), "gaussian".into()), ("norm".into(), "H2, weight 1+mu^2+mu^4".into())],
        }
    }

    #[test]
    fn rate_convention() {
        let r = rates(&[1.0, 0.25, 1.0 / 16.0], 4.0);
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() - 1.0).abs() < 1e-15 && (r[2].unwrap() - 1.0).abs() < 1e-15);
        let s = sample();
        let rr = s.row_rates(&s.rows[0]);
        assert!((rr[1].unwrap() - (0.717f64 / 5.72e-2).ln() / 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_row_is_columnwise_max() {
        let s = sample();
        assert_eq!(s.uniform_row(), vec![0.717, 0.158, 1.12e-2]);
        let mut f = s.clone();
        f.rows[1].errors[1] = f64::NAN;
        assert!(f.uniform_row()[1].is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let text = s.to_csv();
        assert!(text.starts_with("# mti-fp report v1\n#axis,temporal\n#scenario,gaussian\n"));
        assert!(text.contains("\nmax,0.05,0.158,"));
        let back = ConvergenceReport::from_csv(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn failed_cells_survive_the_round_trip() {
        let mut s = sample();
        s.rows[0].errors[2] = f64::NAN;
        let back = ConvergenceReport::from_csv(&s.to_csv()).unwrap();
        assert!(back.rows[0].errors[2].is_nan());
        assert_eq!(back.to_csv(), s.to_csv());
    }

    #[test]
    fn tampered_rows_are_rejected() {
        let text = sample().to_csv().replace("0.5,0.05,0.0572,", "0.5,0.05,0.0571,");
        assert!(ConvergenceReport::from_csv(&text).is_err());
        assert!(ConvergenceReport::from_csv("eps,resolution,error,rate\n").is_err());
    }
}
