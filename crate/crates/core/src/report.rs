//! Text tables and reliability-diagram graphics.

use std::fmt::Write as _;

use crate::analysis::{CorrelationReport, LanguageTable, ParallelCorrelation};
use crate::metrics::ReliabilityTable;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    /// Aligned plain text.
    #[default]
    Table,
    Csv,
    Markdown,
}

/// Percent with two decimals, as reported in result tables.
pub fn percent(fraction: f64) -> String {
    format!("{:.2}", fraction * 100.0)
}

fn render(header: &[&str], rows: &[Vec<String>], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        OutputFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let rule: Vec<&str> = header.iter().map(|_| "---").collect();
            let _ = writeln!(out, "| {} |", rule.join(" | "));
            for row in rows {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
        OutputFormat::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: &mut dyn Iterator<Item = &str>| {
                let padded: Vec<String> = cells
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (c, w))| {
                        if i == 0 {
                            format!("{c:<w$}")
                        } else {
                            format!("{c:>w$}")
                        }
                    })
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            out.push_str(&line(&mut header.iter().copied()));
            out.push('\n');
            for row in rows {
                out.push_str(&line(&mut row.iter().map(String::as_str)));
                out.push('\n');
            }
        }
    }
    out
}

/// Per-language EM and ECE (both in percent) followed by the macro rows.
pub fn language_table(table: &LanguageTable, format: OutputFormat) -> String {
    let mut rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.language.clone(),
                r.n.to_string(),
                percent(r.em_rate),
                percent(r.ece),
            ]
        })
        .collect();
    for avg in std::iter::once(&table.macro_all).chain(&table.macro_non_english) {
        rows.push(vec![
            avg.label.to_string(),
            avg.n.to_string(),
            percent(avg.em_rate),
            percent(avg.ece),
        ]);
    }
    render(&["language", "n", "em", "ece"], &rows, format)
}

pub fn correlation_table(report: &CorrelationReport, format: OutputFormat) -> String {
    let rows: Vec<Vec<String>> = report
        .correlations
        .iter()
        .map(|c| {
            vec![
                c.feature.clone(),
                c.r.map_or_else(|| "NA".to_string(), |r| format!("{r:.4}")),
                c.n.to_string(),
            ]
        })
        .collect();
    render(&["feature", "r", "n"], &rows, format)
}

pub fn parallel_table<'a, I>(rows: I, format: OutputFormat) -> String
where
    I: IntoIterator<Item = (&'a String, &'a ParallelCorrelation)>,
{
    let rows: Vec<Vec<String>> = rows
        .into_iter()
        .map(|(lang, c)| {
            vec![
                lang.clone(),
                c.r.map_or_else(|| "NA".to_string(), |r| format!("{r:.4}")),
                c.shared.to_string(),
            ]
        })
        .collect();
    render(&["language", "r", "n"], &rows, format)
}

const SIZE: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Standalone SVG reliability diagram: one bar per bin at the bin's mean
/// accuracy, the `y = x` diagonal, and the ECE (percent) in the title.
pub fn reliability_svg(table: &ReliabilityTable) -> String {
    let plot = SIZE - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + v * plot;
    let y = |v: f64| SIZE - MARGIN - v * plot;
    let m = table.num_bins() as f64;
    let ece = percent(table.ece());

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"  <title>Reliability diagram (ECE = {ece})</title>"#);
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">ECE = {ece}</text>"#,
        SIZE / 2.0
    );
    let _ = writeln!(
        svg,
        r##"  <rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(svg, r#"  <g class="bars">"#);
    for b in &table.bins {
        let left = x((b.bin - 1) as f64 / m);
        let width = plot / m;
        let acc = if b.count > 0 { b.mean_accuracy } else { 0.0 };
        let top = y(acc);
        let _ = writeln!(
            svg,
            r##"    <rect class="bar" data-bin="{}" data-count="{}" x="{left:.3}" y="{top:.3}" width="{width:.3}" height="{:.3}" fill="#4c72b0" stroke="#fff"/>"##,
            b.bin,
            b.count,
            SIZE - MARGIN - top
        );
    }
    let _ = writeln!(svg, "  </g>");
    let _ = writeln!(
        svg,
        r##"  <line class="diagonal" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#c44e52" stroke-dasharray="4 4"/>"##,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">confidence</text>"#,
        SIZE / 2.0,
        SIZE - 15.0
    );
    let _ = writeln!(
        svg,
        r#"  <text x="15" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">accuracy</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}
