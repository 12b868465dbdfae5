//! Curve files: JSON `{"dim", "vertices", "is_arclength"}` and plain CSV
//! with one vertex per row.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MengerError, Result};
use crate::geometry::ClosedCurve;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub is_arclength: bool,
}

impl From<&ClosedCurve> for CurveJson {
    fn from(c: &ClosedCurve) -> Self {
        Self {
            dim: c.dim(),
            vertices: c.rows(),
            is_arclength: c.is_arclength(),
        }
    }
}

impl TryFrom<CurveJson> for ClosedCurve {
    type Error = MengerError;

    /// A claimed arc-length flag is verified, not trusted.
    fn try_from(j: CurveJson) -> Result<Self> {
        let c = ClosedCurve::from_rows(j.dim, &j.vertices)?;
        if j.is_arclength && !c.is_arclength() {
            return Err(MengerError::NotArclength(c.edge_ratio()));
        }
        Ok(c)
    }
}

pub fn curve_to_json(c: &ClosedCurve) -> String {
    serde_json::to_string_pretty(&CurveJson::from(c)).expect("curve serializes")
}

pub fn curve_from_json(s: &str) -> Result<ClosedCurve> {
    let j: CurveJson = serde_json::from_str(s)?;
    j.try_into()
}

pub fn curve_to_csv(c: &ClosedCurve) -> String {
    let mut out = String::new();
    for row in c.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Rows separated by commas or whitespace; `#` starts a comment line.
pub fn curve_from_csv(s: &str) -> Result<ClosedCurve> {
    let mut rows = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| MengerError::Parse(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let dim = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| MengerError::InvalidCurve("empty curve file".into()))?;
    ClosedCurve::from_rows(dim, &rows)
}

/// Reads a curve, choosing the format by extension (`.csv` or JSON).
pub fn read_curve(path: &Path) -> Result<ClosedCurve> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("txt") => curve_from_csv(&text),
        _ => curve_from_json(&text),
    }
}

pub fn write_curve(path: &Path, c: &ClosedCurve) -> Result<()> {
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("txt") => curve_to_csv(c),
        _ => curve_to_json(c),
    };
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_preset, Preset};

    #[test]
    fn json_roundtrip() {
        let c = make_preset(&Preset::TorusKnot { a: 2, b: 3 }, 24, 3).unwrap();
        let back = curve_from_json(&curve_to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn csv_roundtrip() {
        let c = make_preset(&Preset::Ellipse { aspect: 2.0 }, 20, 2).unwrap();
        let back = curve_from_csv(&curve_to_csv(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_short_curves_and_false_claims() {
        let short = r#"{"dim":2,"vertices":[[0,0],[1,0]],"is_arclength":true}"#;
        assert!(matches!(
            curve_from_json(short),
            Err(MengerError::InvalidCurve(_))
        ));
        let lie = r#"{"dim":2,"vertices":[[0,0],[2,0],[1,1],[0,1]],"is_arclength":true}"#;
        assert!(matches!(
            curve_from_json(lie),
            Err(MengerError::NotArclength(_))
        ));
        let honest = r#"{"dim":2,"vertices":[[0,0],[2,0],[1,1],[0,1]],"is_arclength":false}"#;
        assert!(curve_from_json(honest).is_ok());
        let extra = r#"{"dim":2,"vertices":[[0,0],[1,0],[0,1]],"is_arclength":false,"x":1}"#;
        assert!(matches!(curve_from_json(extra), Err(MengerError::Parse(_))));
    }

    #[test]
    fn files_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let c = make_preset(&Preset::Circle, 12, 2).unwrap();
        for name in ["c.json", "c.csv"] {
            let p = dir.path().join(name);
            write_curve(&p, &c).unwrap();
            assert_eq!(read_curve(&p).unwrap(), c);
        }
    }
}
