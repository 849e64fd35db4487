//! CSV writing helpers.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Shortest decimal representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Twelve significant digits.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Build a CSV body from a header and equal-length columns.
pub fn csv(header: &[&str], columns: &[&[f64]], fmt: fn(f64) -> String) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = String::with_capacity(rows * columns.len() * 24);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        for (i, c) in columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt(c[r]));
        }
        out.push('\n');
    }
    out
}

/// Trace export: `t,inversion[,P0..Pcutoff]` with twelve significant digits.
pub fn trace_csv(times: &[f64], inversion: &[f64], populations: Option<&[Vec<f64>]>) -> String {
    let mut out = String::from("t,inversion");
    let dim = populations.and_then(|p| p.first()).map_or(0, Vec::len);
    for k in 0..dim {
        let _ = write!(out, ",P{k}");
    }
    out.push('\n');
    for (i, (&t, &x)) in times.iter().zip(inversion).enumerate() {
        out.push_str(&fmt_sig12(t));
        out.push(',');
        out.push_str(&fmt_sig12(x));
        if let Some(p) = populations {
            for &v in &p[i] {
                out.push(',');
                out.push_str(&fmt_sig12(v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_or_print(path: Option<&Path>, body: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, body)
        }
        None => {
            use io::Write;
            io::stdout().lock().write_all(body.as_bytes())
        }
    }
}
