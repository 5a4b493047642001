//! Text output: numbers with nine significant digits, JSON with stable key
//! order, CSV and SVG figure data.

use serde_json::Value;
use std::fmt::Write;

/// `v` with nine significant digits, e.g. `0.400000000`. Magnitudes below
/// `1e-4` or from `1e12` up use scientific notation (`7.57145791e-17`). Zero
/// prints as `0.000000000`.
pub fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.000000000".into();
    }
    // The exponent after rounding to nine digits, so 9.9999999996 counts as 10.
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-4..12).contains(&exp) {
        return sci;
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Pretty JSON with two-space indentation; floats go through [`sig9`].
pub fn json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&sig9(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            // Short arrays of scalars stay on one line.
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(i, depth, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                indent(depth + 1, out);
                write_value(i, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, val)) in map.iter().enumerate() {
                indent(depth + 1, out);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(val, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            indent(depth, out);
            out.push('}');
        }
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Figure data: `t`, one column per firm, then the aggregate.
pub struct FigureTable {
    pub t: Vec<f64>,
    pub firms: Vec<Vec<f64>>,
    pub aggregate: Vec<f64>,
}

impl FigureTable {
    pub fn csv(&self) -> String {
        let mut out = String::from("t");
        for j in 0..self.firms.len() {
            write!(out, ",F_{}", j + 1).unwrap();
        }
        out.push_str(",F\n");
        for (i, t) in self.t.iter().enumerate() {
            out.push_str(&sig9(*t));
            for col in &self.firms {
                out.push(',');
                out.push_str(&sig9(col[i]));
            }
            out.push(',');
            out.push_str(&sig9(self.aggregate[i]));
            out.push('\n');
        }
        out
    }

    /// Line chart of every column over `t ∈ [0, 1]`; the aggregate is drawn
    /// thick and black over thin colored firm curves.
    pub fn svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 40.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
        let top = self.aggregate.iter().chain(self.firms.iter().flatten()).cloned().fold(0.0, f64::max).max(1e-12) * 1.1;
        let px = |t: f64| M + t * (W - 2.0 * M);
        let py = |y: f64| H - M - y / top * (H - 2.0 * M);
        let line = |ys: &[f64]| {
            let mut s = String::new();
            for (k, (t, y)) in self.t.iter().zip(ys).enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                write!(s, "{:.2},{:.2}", px(*t), py(*y)).unwrap();
            }
            s
        };
        let mut out = String::new();
        writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
        writeln!(out, r#"  <rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(
            out,
            r##"  <path d="M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2}" fill="none" stroke="#888" stroke-width="1"/>"##,
            px(0.0),
            py(top),
            px(0.0),
            py(0.0),
            px(1.0),
            py(0.0)
        )
        .unwrap();
        for (j, col) in self.firms.iter().enumerate() {
            writeln!(
                out,
                r#"  <polyline class="firm" data-firm="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                j + 1,
                COLORS[j % COLORS.len()],
                line(col)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"  <polyline class="aggregate" fill="none" stroke="black" stroke-width="3" stroke-dasharray="8 4" points="{}"/>"#,
            line(&self.aggregate)
        )
        .unwrap();
        writeln!(out, r#"  <text x="{:.2}" y="{:.2}" font-size="12">t</text>"#, W - M + 8.0, py(0.0) + 4.0).unwrap();
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.4), "0.400000000");
        assert_eq!(sig9(0.0), "0.000000000");
        assert_eq!(sig9(0.52913368), "0.529133680");
        assert_eq!(sig9(5.0), "5.00000000");
        assert_eq!(sig9(1234.5), "1234.50000");
        assert_eq!(sig9(-2.5e-4), "-0.000250000000");
        assert_eq!(sig9(7.571457911e-17), "7.57145791e-17");
        assert_eq!(sig9(9.9999999996), "10.0000000");
        assert_eq!(sig9(12345678901.0), "12345678901");
        assert_eq!(sig9(1.5e13), "1.50000000e13");
        assert_eq!(sig9(-1e-300 * 1e-300), "0.000000000");
    }

    #[test]
    fn json_layout() {
        let v = serde_json::json!({"b": 1, "a": [0.5, 2], "c": {"d": [[1.0]]}});
        assert_eq!(
            json(&v),
            "{\n  \"b\": 1,\n  \"a\": [0.500000000, 2],\n  \"c\": {\n    \"d\": [\n      [1.00000000]\n    ]\n  }\n}\n"
        );
    }

    #[test]
    fn csv_shape() {
        let t = FigureTable { t: vec![0.0, 1.0], firms: vec![vec![0.0, 1.0]], aggregate: vec![0.0, 1.0] };
        assert_eq!(t.csv(), "t,F_1,F\n0.000000000,0.000000000,0.000000000\n1.00000000,1.00000000,1.00000000\n");
        assert!(t.svg().contains("class=\"aggregate\""));
    }
}
