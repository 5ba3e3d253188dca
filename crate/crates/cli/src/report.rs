//! Report formatting: tab-separated tables with 6-significant-digit values
//! and full-precision JSON sidecars.

use std::fs;
use std::io;
use std::path::Path;

/// Format with a fixed number of significant digits, plain decimal notation,
/// `.` as the decimal separator.
pub fn fmt_sig(x: f64, sig: u32) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = sig as i32 - 1 - exponent;
    if decimals <= 0 {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    } else {
        format!("{:.*}", decimals as usize, x)
    }
}

/// Optional value for a TSV cell; empty when absent.
pub fn opt_sig(x: Option<f64>) -> String {
    x.map(|v| fmt_sig(v, 6)).unwrap_or_default()
}

/// Write a TSV table: header row plus data rows, `\t`-separated,
/// `\n`-terminated. Byte-identical across runs for identical rows.
pub fn write_tsv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    fs::write(path, out)
}
