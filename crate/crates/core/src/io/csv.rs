use std::fmt::Write as _;

use serde::Serialize;

use super::ParseError;
use crate::metrics::{MetricsReport, SweepResult};
use crate::sim::{Record, Trajectory};
use crate::Scalar;

/// Formats `x` with six significant digits, `%g` style: fixed notation for
/// exponents in `-4..6`, scientific otherwise, trailing zeros removed.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = Option<f64>>) {
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if let Some(v) = f {
            out.push_str(&fmt_sig6(v));
        }
    }
    out.push('\n');
}

/// Trajectory as CSV; controller columns are blank for open-loop runs.
pub fn write_trajectory_csv<T: Scalar>(traj: &Trajectory<T>) -> String {
    let mut out = Trajectory::<T>::COLUMNS.join(",");
    out.push('\n');
    for r in &traj.records {
        push_row(&mut out, r.columns().map(|c| c.map(|v| v.as_f64())));
    }
    out
}

/// Reads back a CSV produced by [`write_trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory<f64>, ParseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| ParseError::Syntax("empty CSV".into()))?;
    let expected = Trajectory::<f64>::COLUMNS.join(",");
    if header != expected {
        return Err(ParseError::Syntax(format!("unexpected header `{header}`")));
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(ParseError::Syntax(format!("row {}: expected 12 fields, got {}", n + 1, fields.len())));
        }
        let mut v = [None; 12];
        for (slot, f) in v.iter_mut().zip(&fields) {
            if !f.is_empty() {
                *slot = Some(
                    f.parse::<f64>()
                        .map_err(|e| ParseError::Syntax(format!("row {}: `{f}`: {e}", n + 1)))?,
                );
            }
        }
        let req = |i: usize| {
            v[i].ok_or_else(|| {
                ParseError::Syntax(format!("row {}: `{}` is required", n + 1, Trajectory::<f64>::COLUMNS[i]))
            })
        };
        records.push(Record {
            t: req(0)?,
            bis_true: req(1)?,
            bis_measured: req(2)?,
            bis_filtered: v[3],
            u: req(4)?,
            c1: req(5)?,
            c2: req(6)?,
            c3: req(7)?,
            ce_true: req(8)?,
            ce_model: v[9],
            i_t: v[10],
            ce_ref: v[11],
        });
    }
    Ok(Trajectory { records })
}

/// One line of the cohort summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortMetricsRow<T> {
    pub id: u32,
    pub report: MetricsReport<T>,
    pub bis_final: T,
    pub u_final: T,
}

pub fn cohort_metrics_csv<T: Scalar>(rows: &[CohortMetricsRow<T>]) -> String {
    let mut out =
        String::from("id,iae,induction_time_min,min_bis_post_crossing,steady_state_error,max_u,bis_final,u_final\n");
    for row in rows {
        let r = &row.report;
        let _ = write!(out, "{},", row.id);
        push_row(
            &mut out,
            [
                Some(r.iae),
                r.induction_time,
                r.min_bis_post_crossing,
                Some(r.steady_state_error),
                Some(r.max_u),
                Some(row.bis_final),
                Some(row.u_final),
            ]
            .map(|c| c.map(|v| v.as_f64())),
        );
    }
    out
}

pub fn sweep_csv<T: Scalar>(sweep: &SweepResult<T>) -> String {
    let mut out = String::from("tf2_min,d\n");
    for (g, d) in sweep.grid.iter().zip(&sweep.d_values) {
        push_row(&mut out, [Some(g.as_f64()), Some(d.as_f64())]);
    }
    out
}

/// Ce-to-BIS curves, one block of rows per patient id.
pub fn curve_csv<T: Scalar>(curves: &[(u32, Vec<(T, T)>)]) -> String {
    let mut out = String::from("id,ce,bis\n");
    for (id, points) in curves {
        for (ce, bis) in points {
            let _ = write!(out, "{id},");
            push_row(&mut out, [Some(ce.as_f64()), Some(bis.as_f64())]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (50.0, "50"),
            (1.0 / 60.0, "0.0166667"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e6"),
            (0.000123456789, "0.000123457"),
            (0.0000123456789, "1.23457e-5"),
            (9.9999996, "10"),
            (-44.80999, "-44.81"),
            (999999.6, "1e6"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_sig6(x), want, "{x}");
        }
    }

    #[test]
    fn sig6_relative_error_bound() {
        let mut x = 1.234567891e-9;
        while x < 1e9 {
            for s in [x, -x] {
                let back: f64 = fmt_sig6(s).parse().unwrap();
                assert!(((back - s) / s).abs() <= 5e-6, "{s} -> {back}");
            }
            x *= 3.7;
        }
    }

    #[test]
    fn header_and_blank_columns() {
        let r = Record {
            t: 0.5,
            bis_true: 90.0,
            bis_measured: 91.25,
            bis_filtered: None,
            u: 10.0,
            c1: 1.0,
            c2: 0.5,
            c3: 0.25,
            ce_true: 0.125,
            ce_model: None,
            i_t: None,
            ce_ref: None,
        };
        let csv = write_trajectory_csv(&Trajectory { records: vec![r] });
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t_min,bis_true,bis_measured,bis_filtered,u_mg_min,c1,c2,c3,ce_true,ce_model,i_t,ce_ref"
        );
        assert_eq!(lines.next().unwrap(), "0.5,90,91.25,,10,1,0.5,0.25,0.125,,,");
        let back = parse_trajectory_csv(&csv).unwrap();
        assert_eq!(back.records, vec![r]);
    }

    #[test]
    fn rejects_bad_csv() {
        assert!(parse_trajectory_csv("").is_err());
        assert!(parse_trajectory_csv("a,b\n").is_err());
        let header = Trajectory::<f64>::COLUMNS.join(",");
        assert!(parse_trajectory_csv(&format!("{header}\n1,2\n")).is_err());
        assert!(parse_trajectory_csv(&format!("{header}\n,1,1,,1,1,1,1,1,,,\n")).is_err());
        assert!(parse_trajectory_csv(&format!("{header}\nx,1,1,,1,1,1,1,1,,,\n")).is_err());
    }
}
