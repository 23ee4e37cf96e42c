//! Number formatting and CSV emission.

use std::io::Write;

use seqdisc_core::linalg::CMatrix;

/// `x` with 15 significant digits, trailing zeros trimmed (like `%.15g`).
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn fmt_complex(z: seqdisc_core::Complex64) -> String {
    if z.im == 0.0 {
        fmt_num(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", fmt_num(z.re), fmt_num(-z.im))
    } else {
        format!("{}+{}i", fmt_num(z.re), fmt_num(z.im))
    }
}

pub fn fmt_matrix(m: &CMatrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|row| format!("[{}]", row.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

/// CSV with a header row, LF line endings, numbers via [`fmt_num`].
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|x| fmt_num(*x)))?;
    }
    out.flush()
}

pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}
