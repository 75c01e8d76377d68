//! CSV and SVG emission. CSV is the source of truth; the SVG charts are a
//! convenience view. Output is byte-deterministic for a given record set:
//! fixed headers, fixed float formatting, rows pre-sorted by the caller.

use std::fmt::Write as _;

use crate::metrics::{FeasibilityRecord, GapRecord, SummaryRow};

/// RFC-4180-style escaping: quote when a field contains a comma, a quote
/// or a line break.
fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let encoded: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&encoded.join(","));
        out.push('\n');
    }
    out
}

pub const GAP_HEADER: [&str; 12] = [
    "id",
    "n",
    "m",
    "ts_scheme",
    "temporal_mode",
    "status",
    "exact_cost",
    "hamiltonian_exact",
    "approx_distributional",
    "approx_sampled",
    "gap_distributional",
    "gap_sampled",
];

pub fn gaps_csv(records: &[GapRecord]) -> String {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|g| {
            vec![
                g.id.clone(),
                g.n.to_string(),
                g.m.to_string(),
                g.ts_scheme.clone(),
                g.temporal_mode.clone(),
                g.status.clone(),
                fmt_opt(g.exact_cost),
                g.hamiltonian_exact.to_string(),
                fmt_f64(g.approx_distributional),
                fmt_f64(g.approx_sampled),
                fmt_opt(g.gap_distributional),
                fmt_opt(g.gap_sampled),
            ]
        })
        .collect();
    write_csv(&GAP_HEADER, &rows)
}

pub const FEASIBILITY_HEADER: [&str; 10] = [
    "id",
    "n",
    "m",
    "ts_scheme",
    "temporal_mode",
    "predicted_distributional",
    "predicted_sampled",
    "actual",
    "class_distributional",
    "class_sampled",
];

pub fn feasibility_csv(records: &[FeasibilityRecord]) -> String {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|f| {
            vec![
                f.id.clone(),
                f.n.to_string(),
                f.m.to_string(),
                f.ts_scheme.clone(),
                f.temporal_mode.clone(),
                f.predicted_distributional.to_string(),
                f.predicted_sampled.to_string(),
                f.actual.map(|a| a.to_string()).unwrap_or_default(),
                f.class_distributional.map(|c| c.short().to_string()).unwrap_or_default(),
                f.class_sampled.map(|c| c.short().to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(&FEASIBILITY_HEADER, &rows)
}

pub const SUMMARY_HEADER: [&str; 16] = [
    "n",
    "m",
    "ts_scheme",
    "temporal_mode",
    "instances",
    "solved",
    "infeasible",
    "timeouts",
    "mean_abs_gap_distributional",
    "mean_abs_gap_sampled",
    "median_gap_distributional",
    "median_gap_sampled",
    "fp_rate_distributional",
    "fn_rate_distributional",
    "fp_rate_sampled",
    "fn_rate_sampled",
];

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let encoded: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.m.to_string(),
                r.ts_scheme.clone(),
                r.temporal_mode.clone(),
                r.instances.to_string(),
                r.solved.to_string(),
                r.infeasible.to_string(),
                r.timeouts.to_string(),
                fmt_opt(r.mean_abs_gap_distributional),
                fmt_opt(r.mean_abs_gap_sampled),
                fmt_opt(r.median_gap_distributional),
                fmt_opt(r.median_gap_sampled),
                fmt_opt(r.fp_rate_distributional),
                fmt_opt(r.fn_rate_distributional),
                fmt_opt(r.fp_rate_sampled),
                fmt_opt(r.fn_rate_sampled),
            ]
        })
        .collect();
    write_csv(&SUMMARY_HEADER, &encoded)
}

/// A plain grouped bar chart: one group per label, one bar per series.
pub fn bar_chart_svg(title: &str, series: &[&str], groups: &[(String, Vec<Option<f64>>)]) -> String {
    const WIDTH: f64 = 760.0;
    const HEIGHT: f64 = 420.0;
    const MARGIN_L: f64 = 60.0;
    const MARGIN_B: f64 = 60.0;
    const MARGIN_T: f64 = 40.0;
    const PALETTE: [&str; 4] = ["#4878a8", "#e49444", "#6a9f58", "#d1605e"];

    let max_val = groups
        .iter()
        .flat_map(|(_, vs)| vs.iter().flatten())
        .fold(0.0f64, |m, &v| m.max(v))
        .max(1e-9);
    let plot_w = WIDTH - MARGIN_L - 20.0;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let group_w = plot_w / groups.len().max(1) as f64;
    let bar_w = (group_w * 0.8) / series.len().max(1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        title
    );
    // y axis with four gridlines
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let y = MARGIN_T + plot_h * (1.0 - frac);
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN_L}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#ddd\"/>",
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.1}</text>",
            MARGIN_L - 6.0,
            y + 4.0,
            max_val * frac
        );
    }
    for (gi, (label, values)) in groups.iter().enumerate() {
        let base_x = MARGIN_L + gi as f64 * group_w + group_w * 0.1;
        for (si, value) in values.iter().enumerate() {
            if let Some(v) = value {
                let h = plot_h * (v / max_val);
                let x = base_x + si as f64 * bar_w;
                let y = MARGIN_T + plot_h - h;
                let _ = write!(
                    svg,
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{}\"/>",
                    bar_w * 0.92,
                    PALETTE[si % PALETTE.len()]
                );
            }
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            base_x + group_w * 0.4,
            MARGIN_T + plot_h + 16.0,
            label
        );
    }
    for (si, name) in series.iter().enumerate() {
        let x = MARGIN_L + 10.0 + si as f64 * 180.0;
        let y = HEIGHT - 18.0;
        let _ = writeln!(
            svg,
            "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            y - 10.0,
            PALETTE[si % PALETTE.len()],
            x + 16.0,
            y,
            name
        );
    }
    svg.push_str("</svg>\n");
    svg
}
