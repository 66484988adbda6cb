//! CSV contract: header `sweep,P_LB,P_UB,P_PB,P_IGN,meets_LB,pi_star`.
//! Numbers use 12 significant digits in scientific notation, missing
//! values are empty cells, and `pi_star` joins the allocation with `;`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::run::CurvePoint;

pub const HEADER: [&str; 7] = ["sweep", "P_LB", "P_UB", "P_PB", "P_IGN", "meets_LB", "pi_star"];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: bad `{column}` value `{value}`")]
    BadValue { line: u64, column: &'static str, value: String },
    #[error("unexpected header {0:?}")]
    BadHeader(Vec<String>),
}

pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

fn record(p: &CurvePoint) -> [String; 7] {
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    [
        format_number(p.sweep),
        format_number(p.p_lb),
        format_number(p.p_ub),
        opt(p.p_pb),
        opt(p.p_ign),
        p.meets_lb.map(|b| b.to_string()).unwrap_or_default(),
        p.pi_star.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(";"),
    ]
}

pub fn write_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for p in points {
        w.write_record(record(p))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(points: &[CurvePoint], path: &Path) -> Result<(), OutputError> {
    let io = |source| OutputError::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(points, &mut buf)?;
    buf.flush().map_err(io)
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<CurvePoint>, OutputError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(OutputError::BadHeader(header));
    }
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64, OutputError> {
            cell(i).parse().map_err(|_| OutputError::BadValue { line, column: HEADER[i], value: cell(i).to_string() })
        };
        let opt = |i: usize| if cell(i).is_empty() { Ok(None) } else { num(i).map(Some) };
        let meets_lb = match cell(5) {
            "" => None,
            "true" => Some(true),
            "false" => Some(false),
            v => return Err(OutputError::BadValue { line, column: HEADER[5], value: v.to_string() }),
        };
        let pi_star = if cell(6).is_empty() {
            Vec::new()
        } else {
            cell(6)
                .split(';')
                .map(|s| s.parse().map_err(|_| OutputError::BadValue { line, column: HEADER[6], value: s.to_string() }))
                .collect::<Result<_, _>>()?
        };
        points.push(CurvePoint {
            sweep: num(0)?,
            p_lb: num(1)?,
            p_ub: num(2)?,
            p_pb: opt(3)?,
            p_ign: opt(4)?,
            meets_lb,
            pi_star,
        });
    }
    Ok(points)
}

pub fn read_csv(path: &Path) -> Result<Vec<CurvePoint>, OutputError> {
    let file = std::fs::File::open(path).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })?;
    parse_csv(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64, pb: Option<f64>) -> CurvePoint {
        CurvePoint {
            sweep: x,
            p_lb: 1.0 / 3.0,
            p_ub: 2.0,
            pi_star: vec![0.25, 0.75],
            p_pb: pb,
            p_ign: Some(std::f64::consts::PI),
            meets_lb: pb.map(|_| true),
        }
    }

    #[test]
    fn three_points_four_lines() {
        let mut buf = Vec::new();
        write_csv(&[point(0.0, None), point(0.5, Some(1.0)), point(1.0, None)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "sweep,P_LB,P_UB,P_PB,P_IGN,meets_LB,pi_star");
        assert_eq!(
            lines[1],
            "0.00000000000e0,3.33333333333e-1,2.00000000000e0,,3.14159265359e0,,2.50000000000e-1;7.50000000000e-1"
        );
        assert!(lines[2].contains(",1.00000000000e0,") && lines[2].contains(",true,"));
    }

    #[test]
    fn empty_cells_read_back_as_absent() {
        let mut buf = Vec::new();
        write_csv(&[point(0.0, None)], &mut buf).unwrap();
        let back = parse_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].p_pb, None);
        assert_eq!(back[0].meets_lb, None);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(matches!(parse_csv("a,b\n1,2\n".as_bytes()), Err(OutputError::BadHeader(_))));
    }
}
