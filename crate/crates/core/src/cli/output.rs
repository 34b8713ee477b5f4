//! Number formatting, flat CSV rendering and the SVG chart.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::bounds::SweepRow;

/// `%.12g`: 12 significant digits, shortest of fixed/exponent form, trailing
/// zeros dropped. Independent of locale.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn scalar_cell(v: &Value) -> String {
    match v {
        Value::Null => "nan".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => fmt_g12(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar_cell(scalar))),
    }
}

/// Any report as a two-column `key,value` CSV; nested fields get dotted or
/// indexed keys.
pub fn key_value_csv<S: Serialize>(report: &S) -> Result<String, String> {
    let value = serde_json::to_value(report).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(|e| e.to_string())?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(|e| e.to_string())?;
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

pub fn json<S: Serialize>(report: &S) -> Result<String, String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    s.push('\n');
    Ok(s)
}

pub const SWEEP_HEADER: [&str; 8] = [
    "r",
    "B_max",
    "B_SLD",
    "B_RLD",
    "B_Fisher",
    "B_Husimi",
    "v",
    "vg_minus_C",
];

pub fn sweep_csv(rows: &[SweepRow<f64>]) -> Result<String, String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(|e| e.to_string())?;
    for r in rows {
        let cells = [
            r.r,
            r.b_max,
            r.b_sld,
            r.b_rld,
            r.b_fisher,
            r.b_husimi,
            r.v,
            r.vg_minus_c,
        ]
        .map(fmt_g12);
        w.write_record(&cells).map_err(|e| e.to_string())?;
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

const SERIES: [(&str, &str); 5] = [
    ("B_max", "#d62728"),
    ("B_Fisher", "#1f77b4"),
    ("B_SLD", "#2ca02c"),
    ("B_RLD", "#9467bd"),
    ("B_Husimi", "#ff7f0e"),
];

fn series_value(row: &SweepRow<f64>, i: usize) -> f64 {
    match i {
        0 => row.b_max,
        1 => row.b_fisher,
        2 => row.b_sld,
        3 => row.b_rld,
        _ => row.b_husimi,
    }
}

/// Line chart of the bound columns against `r`. Rows with non-finite or (on
/// a log axis) non-positive values are skipped.
pub fn sweep_svg(rows: &[SweepRow<f64>], log_y: bool) -> String {
    let usable = |v: f64| v.is_finite() && (!log_y || v > 0.0);
    let ty = |v: f64| if log_y { v.log10() } else { v };

    let xs: Vec<f64> = rows.iter().map(|r| r.r).filter(|x| x.is_finite()).collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in &xs {
        x0 = x0.min(x);
        x1 = x1.max(x);
    }
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in rows {
        for i in 0..SERIES.len() {
            let v = series_value(row, i);
            if usable(v) {
                y0 = y0.min(ty(v));
                y1 = y1.max(ty(v));
            }
        }
    }
    if !(x0 < x1) {
        x0 = if x0.is_finite() { x0 - 0.5 } else { 0.0 };
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y0 = if y0.is_finite() { y0 - 0.5 } else { 0.0 };
        y1 = y0 + 1.0;
    }
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let label_y = if log_y { 10f64.powf(fy) } else { fy };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(fx),
            HEIGHT - MARGIN_B + 18.0,
            fmt_tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            py(fy) + 4.0,
            fmt_tick(label_y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">r</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0
    );
    for (i, (name, color)) in SERIES.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .filter(|row| row.r.is_finite() && usable(series_value(row, i)))
            .map(|row| format!("{:.2},{:.2}", px(row.r), py(ty(series_value(row, i)))))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = MARGIN_T + 20.0 + 20.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, lx + 30.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        trim_zeros(format!("{v:.3}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_c_printf() {
        let cases = [
            (0.5, "0.5"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (std::f64::consts::PI, "3.14159265359"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (7.452978717123105, "7.45297871712"),
            (1e100, "1e+100"),
            (0.0, "0"),
            (f64::NAN, "nan"),
            (99999999999.99999, "100000000000"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g12(x), want, "{x}");
        }
    }

    #[test]
    fn flattening() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            m: [[f64; 2]; 2],
            ok: bool,
        }
        let csv = key_value_csv(&R {
            a: 0.1,
            m: [[1.0, 2.0], [3.0, 4.0]],
            ok: true,
        })
        .unwrap();
        assert_eq!(
            csv,
            "key,value\na,0.1\nm[0][0],1\nm[0][1],2\nm[1][0],3\nm[1][1],4\nok,true\n"
        );
    }

    #[test]
    fn svg_is_deterministic_and_skips_bad_rows() {
        let row = |r: f64, v: f64| SweepRow {
            r,
            b_max: v,
            b_sld: v / 2.0,
            b_rld: v / 3.0,
            b_fisher: v / 2.0,
            b_husimi: v,
            v: 1.0,
            vg_minus_c: 0.0,
            error: None,
        };
        let rows = vec![row(0.1, 10.0), row(0.5, f64::NAN), row(0.9, 2.0)];
        let a = sweep_svg(&rows, true);
        assert_eq!(a, sweep_svg(&rows, true));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 5);
        assert!(!a.contains("NaN"));
    }
}
