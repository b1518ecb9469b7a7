//! CSV artifacts. Floats are written with 17 significant digits so they
//! re-parse to the same bits.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hybrid_pdem_core::propagation::{CdfMember, PBoxResult};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().with_context(|| format!("not a number: `{s}`"))
}

pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    let n = columns.first().map_or(0, |c| c.len());
    for k in 0..n {
        w.write_record(columns.iter().map(|c| fmt_f64(c[k])))?;
    }
    w.flush()?;
    Ok(())
}

/// Bound curves as `x, lower_cdf, upper_cdf`.
pub fn write_bounds(path: &Path, r: &PBoxResult) -> Result<()> {
    write_columns(path, &["x", "lower_cdf", "upper_cdf"], &[&r.x, &r.lower, &r.upper])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn read_bounds(path: &Path) -> Result<Bounds> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != ["x", "lower_cdf", "upper_cdf"] {
        bail!("schema mismatch in {}: expected columns x, lower_cdf, upper_cdf, found {:?}", path.display(), header);
    }
    let mut b = Bounds { x: vec![], lower: vec![], upper: vec![] };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            bail!("schema mismatch in {} row {}: {} fields", path.display(), i + 2, rec.len());
        }
        b.x.push(parse_f64(&rec[0])?);
        b.lower.push(parse_f64(&rec[1])?);
        b.upper.push(parse_f64(&rec[2])?);
    }
    Ok(b)
}

/// Long format: one column per epistemic coordinate, then `x, cdf`.
pub fn write_conditionals(path: &Path, names: &[String], x: &[f64], members: &[CdfMember]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<String> = names.iter().map(|n| format!("theta_{n}")).collect();
    header.push("x".into());
    header.push("cdf".into());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for m in members {
        for (k, &xv) in x.iter().enumerate() {
            row.clear();
            row.extend(m.theta.iter().map(|&t| fmt_f64(t)));
            row.push(fmt_f64(xv));
            row.push(fmt_f64(m.cdf[k]));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a long-format conditional table back into members.
pub fn read_conditionals(path: &Path) -> Result<(Vec<String>, Vec<f64>, Vec<CdfMember>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let ne = header.len().checked_sub(2).filter(|_| header.ends_with(&["x".into(), "cdf".into()]));
    let Some(ne) = ne else { bail!("schema mismatch in {}: {:?}", path.display(), header) };
    let names = header[..ne].iter().map(|h| h.trim_start_matches("theta_").to_owned()).collect();
    // x is strictly increasing within a member, so a drop starts the next
    let mut members: Vec<CdfMember> = Vec::new();
    let mut x: Vec<f64> = Vec::new();
    let mut last = f64::INFINITY;
    for rec in r.records() {
        let rec = rec?;
        let theta = (0..ne).map(|i| parse_f64(&rec[i])).collect::<Result<Vec<_>>>()?;
        let xv = parse_f64(&rec[ne])?;
        if xv <= last {
            members.push(CdfMember { label: format!("member {}", members.len()), theta, cdf: vec![] });
        }
        if members.len() == 1 {
            x.push(xv);
        }
        members.last_mut().unwrap().cdf.push(parse_f64(&rec[ne + 1])?);
        last = xv;
    }
    if let Some(bad) = members.iter().find(|m| m.cdf.len() != x.len()) {
        bail!("schema mismatch in {}: member with {} rows, expected {}", path.display(), bad.cdf.len(), x.len());
    }
    Ok((names, x, members))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(parse_f64(&fmt_f64(v)).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn bounds_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        let r = PBoxResult {
            x: vec![0.1, 0.2 + 1e-17, 1.0 / 3.0],
            lower: vec![0.0, 0.1, 1.0],
            upper: vec![0.3, std::f64::consts::FRAC_1_SQRT_2, 1.0],
            family: vec![],
            node_conditionals: vec![],
            epistemic_names: vec![],
            provenance: Default::default(),
        };
        write_bounds(&p, &r).unwrap();
        let b = read_bounds(&p).unwrap();
        assert_eq!((b.x, b.lower, b.upper), (r.x, r.lower, r.upper));
    }

    #[test]
    fn conditionals_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let x = vec![0.0, 0.5, 1.0];
        let m = vec![
            CdfMember { label: "a".into(), theta: vec![1.0, 2.0], cdf: vec![0.0, 0.25, 1.0] },
            CdfMember { label: "b".into(), theta: vec![1.0, 2.0], cdf: vec![0.0, 0.5, 1.0] },
            CdfMember { label: "c".into(), theta: vec![3.0, 2.0], cdf: vec![0.1, 0.7, 1.0] },
        ];
        write_conditionals(&p, &["m".into(), "v".into()], &x, &m).unwrap();
        let (names, x2, m2) = read_conditionals(&p).unwrap();
        assert_eq!(names, vec!["m", "v"]);
        assert_eq!(x2, x);
        assert_eq!(m2.len(), 3);
        for (a, b) in m.iter().zip(&m2) {
            assert_eq!((&a.theta, &a.cdf), (&b.theta, &b.cdf));
        }
    }

    #[test]
    fn wrong_header_is_a_schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        std::fs::write(&p, "x,lo,hi\n1,0,1\n").unwrap();
        assert!(read_bounds(&p).unwrap_err().to_string().contains("schema mismatch"));
    }
}
