//! Analysis output: series and band CSV, a JSON report and one SVG chart per word.

use std::fmt::Write as _;

use semdrift_core::shift::{BaselineBand, DetectionParams, ShiftReport};
use serde_json::{json, Value};

/// A word that could not be analyzed, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordError {
    pub word: String,
    pub message: String,
}

fn csv_bytes(rows: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        rows(&mut w).expect("writing CSV to memory");
        w.flush().expect("writing CSV to memory");
    }
    buf
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `word,transition,span_a,span_b,cosine,count_a,count_b`; an undefined cosine is empty.
pub fn series_csv(reports: &[ShiftReport], labels: &[String]) -> Vec<u8> {
    csv_bytes(|w| {
        w.write_record(["word", "transition", "span_a", "span_b", "cosine", "count_a", "count_b"])?;
        for r in reports {
            let s = &r.series;
            for (t, v) in s.values.iter().enumerate() {
                w.write_record([
                    r.word.clone(),
                    t.to_string(),
                    labels[t].clone(),
                    labels[t + 1].clone(),
                    opt(*v),
                    s.occurrence_counts[t].to_string(),
                    s.occurrence_counts[t + 1].to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// `transition,mean,std,n_effective`.
pub fn band_csv(band: &BaselineBand) -> Vec<u8> {
    csv_bytes(|w| {
        w.write_record(["transition", "mean", "std", "n_effective"])?;
        for t in 0..band.transitions() {
            w.write_record([
                t.to_string(),
                opt(band.means[t]),
                opt(band.stds[t]),
                band.n_effective[t].to_string(),
            ])?;
        }
        Ok(())
    })
}

/// JSON has no infinities, so they are written as the strings `"inf"` and `"-inf"`.
fn num(v: Option<f64>) -> Value {
    match v {
        None => Value::Null,
        Some(x) if x == f64::INFINITY => json!("inf"),
        Some(x) if x == f64::NEG_INFINITY => json!("-inf"),
        Some(x) => json!(x),
    }
}

pub struct ReportContext<'a> {
    pub labels: &'a [String],
    pub params: &'a DetectionParams,
    /// First-attestation year of a sense, where a dictionary gives one.
    pub dictionary_year: &'a dyn Fn(&str) -> Option<i32>,
}

pub fn report_json(
    ctx: &ReportContext<'_>,
    band: &BaselineBand,
    reports: &[ShiftReport],
    errors: &[WordError],
) -> String {
    let labels = ctx.labels;
    let band_rows: Vec<Value> = (0..band.transitions())
        .map(|t| {
            json!({
                "transition": t,
                "span_a": labels[t],
                "span_b": labels[t + 1],
                "mean": num(band.means[t]),
                "std": num(band.stds[t]),
                "n_effective": band.n_effective[t],
                "excluded": band.excluded[t],
            })
        })
        .collect();
    let words: Vec<Value> = reports
        .iter()
        .map(|r| {
            let s = &r.series;
            let rows: Vec<Value> = r
                .scores
                .iter()
                .map(|sc| {
                    let t = sc.transition;
                    json!({
                        "transition": t,
                        "span_a": labels[t],
                        "span_b": labels[t + 1],
                        "cosine": num(s.values[t]),
                        "count_a": s.occurrence_counts[t],
                        "count_b": s.occurrence_counts[t + 1],
                        "z": num(sc.z),
                        "relative_drop": num(sc.relative_drop),
                        "enough_occurrences": sc.enough_occurrences,
                        "flagged": sc.flagged,
                    })
                })
                .collect();
            json!({
                "word": r.word,
                "dictionary_year": (ctx.dictionary_year)(&r.word),
                "flagged": r.flagged_transitions(),
                "series": rows,
            })
        })
        .collect();
    let errors: Vec<Value> = errors
        .iter()
        .map(|e| json!({ "word": e.word, "error": e.message }))
        .collect();
    let p = ctx.params;
    let doc = json!({
        "params": {
            "z_threshold": p.z_threshold,
            "min_relative_drop": p.min_relative_drop,
            "min_occurrences": p.min_occurrences,
        },
        "baseline": {
            "sample_size": band.sample_size,
            "sample_seed": band.sample_seed,
            "transitions": band_rows,
        },
        "words": words,
        "errors": errors,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    s.push('\n');
    s
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 64.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Polyline points, broken into runs where values are missing.
fn runs(values: &[Option<f64>], x: impl Fn(usize) -> f64, y: impl Fn(f64) -> f64) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for (t, v) in values.iter().enumerate() {
        match v {
            Some(v) => {
                let _ = write!(cur, "{}{:.1},{:.1}", if cur.is_empty() { "" } else { " " }, x(t), y(*v));
            }
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Dotted line for the word, solid line for the baseline mean with a shaded one-deviation
/// band, red circles on flagged transitions and a dashed marker at `dictionary_transition`.
pub fn svg_chart(
    report: &ShiftReport,
    band: &BaselineBand,
    labels: &[String],
    dictionary_transition: Option<usize>,
) -> String {
    let n = report.series.values.len();
    let values = &report.series.values;
    let lows = (0..n).map(|t| band.means[t].zip(band.stds[t]).map(|(m, s)| m - s));
    let mut lo = values
        .iter()
        .flatten()
        .copied()
        .chain(lows.flatten())
        .fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        lo = 0.0;
    }
    lo = (lo - 0.05).clamp(-1.0, 0.9);
    let hi = 1.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |t: usize| LEFT + if n > 1 { plot_w * t as f64 / (n - 1) as f64 } else { plot_w / 2.0 };
    let y = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="20" font-size="14">{} self-similarity</text>"#,
        escape(&report.word)
    );

    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#e0e0e0"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            yy + 4.0
        );
    }
    for t in 0..n {
        let xx = x(t);
        let _ = writeln!(
            s,
            r#"<text x="{xx:.1}" y="{:.1}" text-anchor="end" transform="rotate(-35 {xx:.1} {:.1})">{}→{}</text>"#,
            HEIGHT - BOTTOM + 14.0,
            HEIGHT - BOTTOM + 14.0,
            escape(&labels[t]),
            escape(&labels[t + 1])
        );
    }

    let upper: Vec<String> = (0..n)
        .filter_map(|t| band.means[t].zip(band.stds[t]).map(|(m, sd)| format!("{:.1},{:.1}", x(t), y((m + sd).min(hi)))))
        .collect();
    let lower: Vec<String> = (0..n)
        .rev()
        .filter_map(|t| band.means[t].zip(band.stds[t]).map(|(m, sd)| format!("{:.1},{:.1}", x(t), y((m - sd).max(lo)))))
        .collect();
    if upper.len() > 1 {
        let _ = writeln!(
            s,
            r##"<polygon points="{} {}" fill="#9ab" fill-opacity="0.25" stroke="none"/>"##,
            upper.join(" "),
            lower.join(" ")
        );
    }
    for pts in runs(&band.means, x, y) {
        let _ = writeln!(s, r##"<polyline points="{pts}" fill="none" stroke="#345" stroke-width="2"/>"##);
    }
    for pts in runs(values, x, y) {
        let _ = writeln!(
            s,
            r##"<polyline points="{pts}" fill="none" stroke="#26c" stroke-width="2" stroke-dasharray="2 4" stroke-linecap="round"/>"##
        );
    }
    for (t, v) in values.iter().enumerate() {
        if let Some(v) = v {
            let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="#26c"/>"##, x(t), y(*v));
        }
    }
    for sc in report.flagged() {
        if let Some(v) = values[sc.transition] {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.1}" cy="{:.1}" r="6" fill="none" stroke="#d22" stroke-width="2.5"/>"##,
                x(sc.transition),
                y(v)
            );
        }
    }
    if let Some(t) = dictionary_transition.filter(|&t| t < n) {
        let xx = x(t);
        let _ = writeln!(
            s,
            r##"<line x1="{xx:.1}" y1="{TOP}" x2="{xx:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="6 3"/><text x="{:.1}" y="{:.1}" fill="#666">dictionary</text>"##,
            HEIGHT - BOTTOM,
            xx + 4.0,
            TOP + 12.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="20" text-anchor="end" fill="#666">dotted: word  solid: baseline mean ± std  red: flagged</text>"##,
        WIDTH - RIGHT
    );
    s.push_str("</svg>\n");
    s
}
