use crate::error::{Error, Result};
use crate::format::sci;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub values: Vec<f64>,
    pub converged: bool,
}

/// Ordered sweep data: one axis, several named signals.
///
/// The axis is strictly monotonic; a sweep run from high to low is stored
/// in the order it was run. Non-converged points are kept and flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub axis_name: String,
    pub axis_unit: String,
    pub signals: Vec<String>,
    points: Vec<SweepPoint>,
}

impl SweepSeries {
    pub fn new(axis_name: &str, axis_unit: &str, signals: Vec<String>) -> Self {
        SweepSeries {
            axis_name: axis_name.into(),
            axis_unit: axis_unit.into(),
            signals,
            points: Vec::new(),
        }
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, x: f64, values: Vec<f64>, converged: bool) -> Result<()> {
        if values.len() != self.signals.len() {
            return Err(Error::Analysis(format!(
                "point has {} values for {} signals",
                values.len(),
                self.signals.len()
            )));
        }
        if !x.is_finite() {
            return Err(Error::Analysis("non-finite axis value".into()));
        }
        if converged && values.iter().any(|v| v.is_nan()) {
            return Err(Error::Analysis(format!("NaN in converged point at {x}")));
        }
        if let [.., a, b] = self.points.as_slice() {
            if (b.x - a.x) * (x - b.x) <= 0.0 {
                return Err(Error::Analysis(format!("axis value {x} breaks monotonic order")));
            }
        } else if let [a] = self.points.as_slice() {
            if x == a.x {
                return Err(Error::Analysis(format!("repeated axis value {x}")));
            }
        }
        self.points.push(SweepPoint { x, values, converged });
        Ok(())
    }

    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s.eq_ignore_ascii_case(name))
    }

    pub fn axis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.values[index]).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    /// Copy with points in increasing-axis order.
    pub fn ascending(&self) -> SweepSeries {
        let mut s = self.clone();
        if s.points.len() > 1 && s.points[0].x > s.points[1].x {
            s.points.reverse();
        }
        s
    }

    /// `axis,<signals>` header, `%.12e` numbers, `,#NC` on non-converged rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis");
        for s in &self.signals {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&sci(p.x));
            for v in &p.values {
                out.push(',');
                out.push_str(&sci(*v));
            }
            if !p.converged {
                out.push_str(",#NC");
            }
            out.push('\n');
        }
        out
    }

    /// JSON object with the axis, signal names and one entry per point.
    /// Non-finite values are written as `null`.
    pub fn to_json(&self) -> String {
        let text = |s: &str| serde_json::to_string(s).expect("string serializes");
        let num = |v: f64| if v.is_finite() { sci(v) } else { "null".into() };
        let mut out = format!(
            "{{\n  \"axis\": {},\n  \"unit\": {},\n  \"signals\": [",
            text(&self.axis_name),
            text(&self.axis_unit)
        );
        out.push_str(&self.signals.iter().map(|s| text(s)).collect::<Vec<_>>().join(", "));
        out.push_str("],\n  \"points\": [");
        for (k, p) in self.points.iter().enumerate() {
            out.push_str(if k == 0 { "\n    " } else { ",\n    " });
            let values: Vec<String> = p.values.iter().map(|v| num(*v)).collect();
            out.push_str(&format!(
                "{{\"x\": {}, \"values\": [{}], \"converged\": {}}}",
                num(p.x),
                values.join(", "),
                p.converged
            ));
        }
        out.push_str(if self.points.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut s = SweepSeries::new("iin", "A", vec!["v(out)".into()]);
        assert_eq!(s.to_csv(), "axis,v(out)\n");
        s.push(0.0, vec![1.0], true).unwrap();
        s.push(1.0, vec![f64::NAN], false).unwrap();
        s.push(2.0, vec![3.0], true).unwrap();
        let csv = s.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(
            csv.lines().nth(2).unwrap(),
            "1.000000000000e+00,nan,#NC"
        );
    }

    #[test]
    fn rejects_non_monotonic_axis() {
        let mut s = SweepSeries::new("x", "", vec![]);
        s.push(0.0, vec![], true).unwrap();
        s.push(-1.0, vec![], true).unwrap();
        assert!(s.push(0.5, vec![], true).is_err());
        assert!(SweepSeries::new("x", "", vec![]).push(0.0, vec![1.0], true).is_err());
    }

    #[test]
    fn nan_only_allowed_when_flagged() {
        let mut s = SweepSeries::new("x", "", vec!["a".into()]);
        assert!(s.push(0.0, vec![f64::NAN], true).is_err());
    }

    #[test]
    fn json_layout() {
        let mut s = SweepSeries::new("time", "s", vec!["v(a)".into()]);
        s.push(0.0, vec![0.5], true).unwrap();
        s.push(1.0, vec![f64::NAN], false).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["signals"][0], "v(a)");
        assert_eq!(v["points"][0]["values"][0], 0.5);
        assert!(v["points"][1]["values"][0].is_null());
        assert_eq!(v["points"][1]["converged"], false);
        let empty: serde_json::Value = serde_json::from_str(&SweepSeries::new("x", "", vec![]).to_json()).unwrap();
        assert_eq!(empty["points"].as_array().unwrap().len(), 0);
    }
}
