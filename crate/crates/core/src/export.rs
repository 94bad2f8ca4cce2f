//! CSV output with 12 significant digits, and the matching reader for
//! factor-space designs.

use crate::error::DesignError;
use crate::exchange::Design;
use crate::geometry::PiRegion;

/// Decimal rendering of `x` rounded to 12 significant digits.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("round-trip of formatted float");
    format!("{rounded}")
}

/// CSV with a header row and numeric body.
pub fn numeric_csv(headers: &[String], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).expect("write to memory");
    for r in rows {
        w.write_record(r.iter().map(|x| format_sig(*x))).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
}

fn with_run(headers: Vec<String>, rows: Vec<Vec<f64>>) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut h = vec!["run".to_string()];
    h.extend(headers);
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = vec![(i + 1) as f64];
            v.extend(r);
            v
        })
        .collect();
    (h, rows)
}

/// Runnable factor settings, one row per run.
pub fn factor_csv(region: &PiRegion, factors: &[Vec<f64>]) -> String {
    let (h, rows) = with_run(region.factor_box.names.clone(), factors.to_vec());
    numeric_csv(&h, &rows)
}

/// π values and their scaled log coordinates, one row per run.
pub fn pi_csv(region: &PiRegion, scaled: &[Vec<f64>]) -> String {
    let names = &region.map.group_names;
    let mut headers: Vec<String> = names.clone();
    headers.extend(names.iter().map(|n| format!("scaled_{n}")));
    let rows: Vec<Vec<f64>> = scaled
        .iter()
        .map(|s| {
            let logpi = region.scaling().unscale(s);
            let mut row: Vec<f64> = logpi.iter().map(|x| x.exp()).collect();
            row.extend(s.iter().copied());
            row
        })
        .collect();
    let (h, rows) = with_run(headers, rows);
    numeric_csv(&h, &rows)
}

/// Factor columns, π columns and scaled columns together.
pub fn design_csv(region: &PiRegion, design: &Design) -> String {
    let factors = design.factors(region);
    let scaled = design.scaled(region);
    let names = &region.map.group_names;
    let mut headers = region.factor_box.names.clone();
    headers.extend(names.iter().cloned());
    headers.extend(names.iter().map(|n| format!("scaled_{n}")));
    let rows: Vec<Vec<f64>> = factors
        .iter()
        .zip(&scaled)
        .map(|(v, s)| {
            let mut row = v.clone();
            row.extend(region.scaling().unscale(s).iter().map(|x| x.exp()));
            row.extend(s.iter().copied());
            row
        })
        .collect();
    let (h, rows) = with_run(headers, rows);
    numeric_csv(&h, &rows)
}

/// Log-π images of the box vertices.
pub fn vertex_csv(region: &PiRegion) -> String {
    numeric_csv(&region.map.group_names, region.vertices())
}

/// `group,log_lo,log_hi,lo,hi`: the bounding box in log and π units.
pub fn bounding_box_csv(region: &PiRegion) -> String {
    let (lo, hi) = region.bounding_box();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "log_lo", "log_hi", "lo", "hi"]).expect("write to memory");
    for (j, name) in region.map.group_names.iter().enumerate() {
        w.write_record([
            name.clone(),
            format_sig(lo[j]),
            format_sig(hi[j]),
            format_sig(lo[j].exp()),
            format_sig(hi[j].exp()),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
}

/// Plain-text account of `log π = U log v + c` and the cube scaling.
pub fn region_report(region: &PiRegion) -> String {
    let map = &region.map;
    let names = &region.factor_box.names;
    let mut s = format!("log pi = U log v + c over factors {}\n", names.join(", "));
    for (j, g) in map.group_names.iter().enumerate() {
        let row: Vec<String> = (0..map.p()).map(|i| format_sig(map.u[(j, i)])).collect();
        s.push_str(&format!(
            "  {g}: U = [{}], c = {}, scaled = (log {g} - {}) / {}\n",
            row.join(", "),
            format_sig(map.c[j]),
            format_sig(region.scaling().mid[j]),
            format_sig(region.scaling().half[j])
        ));
    }
    for (name, v) in &region.factor_box.constants {
        s.push_str(&format!("  constant {name} = {}\n", format_sig(*v)));
    }
    s
}

/// One two-column CSV per coordinate pair: `(file stem, contents)`.
pub fn projection_csvs(prefix: &str, names: &[String], points: &[Vec<f64>]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p[i], p[j]]).collect();
            out.push((
                format!("{prefix}_{}_{}", sanitize(&names[i]), sanitize(&names[j])),
                numeric_csv(&[names[i].clone(), names[j].clone()], &rows),
            ));
        }
    }
    out
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// Reads factor settings from a CSV whose header names every factor; other
/// columns are ignored.
pub fn read_factor_csv(text: &str, names: &[String]) -> Result<Vec<Vec<f64>>, DesignError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| DesignError::Invalid(format!("design csv: {e}")))?
        .clone();
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h.trim() == n)
                .ok_or_else(|| DesignError::Invalid(format!("design csv has no column {n:?}")))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| DesignError::Invalid(format!("design csv: {e}")))?;
        let row = cols
            .iter()
            .map(|&c| {
                rec.get(c).unwrap_or("").trim().parse::<f64>().map_err(|e| {
                    DesignError::Invalid(format!("design csv row {}: column {}: {e}", line + 2, headers[c].to_string()))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.1 + 0.2), "0.3");
        assert_eq!(format_sig(123456.7890123456), "123456.789012");
        assert_eq!(format_sig(-2.5e-7), "-0.00000025");
        assert_eq!(format_sig(f64::INFINITY), "inf");
        let x = std::f64::consts::PI;
        let back: f64 = format_sig(x).parse().unwrap();
        assert!((back - x).abs() < 1e-11 * x);
    }

    #[test]
    fn csv_round_trip() {
        let names = vec!["a".to_string(), "b".to_string()];
        let text = numeric_csv(&names, &[vec![1.0, 2.5], vec![3.0, 4.0]]);
        assert_eq!(text, "a,b\n1,2.5\n3,4\n");
        let rows = read_factor_csv(&text, &["b".to_string()]).unwrap();
        assert_eq!(rows, vec![vec![2.5], vec![4.0]]);
        assert!(read_factor_csv(&text, &["c".to_string()]).is_err());
    }

    #[test]
    fn projections_cover_every_pair() {
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let p = projection_csvs("d", &names, &[vec![1.0, 2.0, 3.0]]);
        assert_eq!(p.len(), 3);
        assert_eq!(p[2].0, "d_y_z");
        assert_eq!(p[2].1, "y,z\n2,3\n");
    }
}
