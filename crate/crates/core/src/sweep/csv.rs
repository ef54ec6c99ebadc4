//! CSV output of sweep records.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sweep::SweepRecord;

pub const COLUMNS: [&str; 15] = [
    "delta",
    "u",
    "j",
    "zeta",
    "phi",
    "nth",
    "g2_b",
    "n_b1",
    "n_b2",
    "g2_a",
    "n_a",
    "tau",
    "g2_tau",
    "converged",
    "error_code",
];

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes an optional `# comment` line, the header and one row per record.
pub fn write_csv<W: Write>(mut out: W, records: &[SweepRecord], comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        let row = [
            format_g(r.delta),
            format_g(r.u),
            format_g(r.j),
            format_g(r.zeta),
            format_g(r.phi),
            format_g(r.nth),
            opt(r.g2_b),
            opt(r.n_b1),
            opt(r.n_b2),
            opt(r.g2_a),
            opt(r.n_a),
            opt(r.tau),
            opt(r.g2_tau),
            r.converged.map(|c| if c { "1" } else { "0" }.to_string()).unwrap_or_default(),
            r.error_code.clone().unwrap_or_default(),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_num(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Io(format!("bad number {s:?}")))
}

/// Reads a file produced by [`write_csv`]; comment lines are skipped.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Io(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let num = |i: usize| parse_num(&row[i]);
        let req = |i: usize| -> Result<f64> {
            num(i)?.ok_or_else(|| Error::Io(format!("missing {}", COLUMNS[i])))
        };
        out.push(SweepRecord {
            delta: req(0)?,
            u: req(1)?,
            j: req(2)?,
            zeta: req(3)?,
            phi: req(4)?,
            nth: req(5)?,
            g2_b: num(6)?,
            n_b1: num(7)?,
            n_b2: num(8)?,
            g2_a: num(9)?,
            n_a: num(10)?,
            tau: num(11)?,
            g2_tau: num(12)?,
            converged: match &row[13] {
                "" => None,
                "1" => Some(true),
                "0" => Some(false),
                other => return Err(Error::Io(format!("bad converged flag {other:?}"))),
            },
            error_code: Some(row[14].to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_formatting() {
        assert_eq!(format_g(0.0), "0");
        assert_eq!(format_g(1.0), "1");
        assert_eq!(format_g(0.1), "0.1");
        assert_eq!(format_g(-2.5), "-2.5");
        assert_eq!(format_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g(123456.7890123456), "123456.789012");
        assert_eq!(format_g(1.5e-5), "1.5e-05");
        assert_eq!(format_g(1e-4), "0.0001");
        assert_eq!(format_g(1e12), "1e+12");
        assert_eq!(format_g(999999999999.9), "1e+12");
        assert_eq!(format_g(f64::NAN), "nan");
    }

    #[test]
    fn formatted_values_parse_back_to_twelve_digits() {
        for x in [0.123456789012345, 7.77e-9, -3.0e21, 0.75 + 1.25 * (7.0 / 60.0)] {
            let y: f64 = format_g(x).parse().unwrap();
            assert!((x - y).abs() <= 5e-12 * x.abs(), "{x} {y}");
            assert_eq!(format_g(y), format_g(x));
        }
    }
}
