//! Box-and-whisker plots as standalone SVG with a CSV of the plotted numbers.

use std::fmt::Write as _;

use thiserror::Error;

use super::format_sig;

#[derive(Debug, Error, PartialEq)]
pub enum BoxPlotError {
    #[error("group `{0}` has no values")]
    EmptyGroup(String),
    #[error("group `{0}` contains a non-finite value")]
    NonFinite(String),
}

/// Type-7 quantile of sorted data: linear interpolation at `(n - 1) p`.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiveNumberSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme values within 1.5 IQR of the box.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

pub fn five_number_summary(values: &[f64]) -> Option<FiveNumberSummary> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (q1, q3) = (quantile_type7(&v, 0.25), quantile_type7(&v, 0.75));
    let fence = 1.5 * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - fence, q3 + fence);
    let inside = v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x));
    let lower_whisker = inside.clone().fold(f64::INFINITY, f64::min);
    let upper_whisker = inside.fold(f64::NEG_INFINITY, f64::max);
    Some(FiveNumberSummary {
        n: v.len(),
        min: v[0],
        q1,
        median: quantile_type7(&v, 0.5),
        q3,
        max: v[v.len() - 1],
        lower_whisker,
        upper_whisker,
        outliers: v.iter().copied().filter(|x| !(lo_fence..=hi_fence).contains(x)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxPlot {
    pub svg: String,
    pub csv: String,
    pub summaries: Vec<(String, FiveNumberSummary)>,
}

const WIDTH: f64 = 420.0;
const HEIGHT: f64 = 320.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 270.0;
const BOX_HALF: f64 = 40.0;

/// Draws one box per group. Every number shown in the SVG is printed from
/// the same formatted strings as the CSV.
pub fn emit_boxplot(groups: &[(&str, &[f64])], index_name: &str) -> Result<BoxPlot, BoxPlotError> {
    let mut summaries = Vec::with_capacity(groups.len());
    for (name, values) in groups {
        if values.is_empty() {
            return Err(BoxPlotError::EmptyGroup((*name).to_owned()));
        }
        let s = five_number_summary(values).ok_or_else(|| BoxPlotError::NonFinite((*name).to_owned()))?;
        summaries.push(((*name).to_owned(), s));
    }

    let mut csv = String::from("group,n,min,q1,median,q3,max,lower_whisker,upper_whisker,outliers\n");
    for (name, s) in &summaries {
        let outliers: Vec<String> = s.outliers.iter().map(|&o| format_sig(o)).collect();
        let _ = writeln!(
            csv,
            "{name},{},{},{},{},{},{},{},{},{}",
            s.n,
            format_sig(s.min),
            format_sig(s.q1),
            format_sig(s.median),
            format_sig(s.q3),
            format_sig(s.max),
            format_sig(s.lower_whisker),
            format_sig(s.upper_whisker),
            outliers.join(";")
        );
    }

    let lo = summaries.iter().map(|(_, s)| s.min).fold(f64::INFINITY, f64::min);
    let hi = summaries.iter().map(|(_, s)| s.max).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let y = |v: f64| BOTTOM - (v - lo) / span * (BOTTOM - TOP);
    let slot = WIDTH / summaries.len() as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(index_name));
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(index_name)
    );
    for (i, (name, s)) in summaries.iter().enumerate() {
        let cx = slot * (i as f64 + 0.5);
        let (left, right) = (cx - BOX_HALF, cx + BOX_HALF);
        let _ = writeln!(svg, r#"<g class="group">"#);
        let _ = writeln!(
            svg,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(s.upper_whisker),
            y(s.q3)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(s.q1),
            y(s.lower_whisker)
        );
        for w in [s.lower_whisker, s.upper_whisker] {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
                cx - BOX_HALF / 2.0,
                y(w),
                cx + BOX_HALF / 2.0,
                y(w)
            );
        }
        let _ = writeln!(
            svg,
            r##"<rect x="{left:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#dde6f0" stroke="black"/>"##,
            y(s.q3),
            2.0 * BOX_HALF,
            (y(s.q1) - y(s.q3)).max(0.0)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{left:.2}" y1="{:.2}" x2="{right:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            y(s.median),
            y(s.median)
        );
        for &o in &s.outliers {
            let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#, y(o));
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, cx + 6.0, y(o) + 4.0, format_sig(o));
        }
        for (label, v) in [("median", s.median), ("q1", s.q1), ("q3", s.q3)] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" class="{label}">{}</text>"#,
                right + 4.0,
                y(v) + 4.0,
                format_sig(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{} (n={})</text>"#,
            BOTTOM + 30.0,
            escape(name),
            s.n
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(BoxPlot { svg, csv, summaries })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_length_quartiles() {
        let s = five_number_summary(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn single_value_is_degenerate_box() {
        let s = five_number_summary(&[7.0]).unwrap();
        assert_eq!([s.min, s.q1, s.median, s.q3, s.max], [7.0; 5]);
    }

    #[test]
    fn outlier_beyond_fence() {
        let s = five_number_summary(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(s.outliers, vec![100.0]);
        assert_eq!(s.upper_whisker, 4.0);
    }

    #[test]
    fn empty_group_rejected() {
        let err = emit_boxplot(&[("patient", &[1.0]), ("control", &[])], "x").unwrap_err();
        assert_eq!(err, BoxPlotError::EmptyGroup("control".into()));
    }
}
