//! Human-readable rendering of the metrics table, plus optional plots.
//!
//! The renderer is deliberately forgiving about columns: it pretty-prints the
//! ones it knows, merges confidence-interval triplets into single columns,
//! warns about (but preserves) columns it has never heard of, and adds a
//! token-savings column whenever the table gives it enough to compute one.

use std::path::PathBuf;

use clap::Args;

use crate::config::AppConfig;
use crate::error::{write_artifact, CliError, CliResult};
use crate::plot;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Metrics table from a simulate run (comma-separated, with header).
    #[arg(long, value_name = "FILE")]
    pub metrics: PathBuf,

    /// Also write accuracy-vs-tokens and token-cost charts (SVG).
    #[arg(long)]
    pub plot: bool,
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn cell(&self, row: usize, col: Option<usize>) -> &str {
        col.map(|c| self.rows[row][c].as_str()).unwrap_or("")
    }
}

fn parse_table(text: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::data(format!("metrics table header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        return Err(CliError::data("metrics table has no columns"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::data(format!("metrics table row {}: {e}", i + 1)))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(Table { headers, rows })
}

fn parse_number(cell: &str, header: &str, row: usize) -> CliResult<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>().map(Some).map_err(|_| {
        CliError::data(format!("row {}: column {header} holds non-numeric value {cell:?}", row + 1))
    })
}

/// How a known column renders. CI triplets are handled separately.
fn known_format(header: &str) -> Option<(&'static str, fn(f64) -> String)> {
    match header {
        "baseline" => Some(("baseline", |_| unreachable!("text column"))),
        "accuracy" => Some(("accuracy", |v| format!("{v:.4}"))),
        "consistency" => Some(("consistency", |v| format!("{v:.4}"))),
        "mean_tokens" => Some(("tokens", |v| format!("{v:.1}"))),
        "mean_latency_s" => Some(("latency_s", |v| format!("{v:.2}"))),
        "ece" => Some(("ece", |v| format!("{v:.4}"))),
        "fast_fraction" => Some(("fast_frac", |v| format!("{v:.4}"))),
        "routing_accuracy" => Some(("routing_acc", |v| format!("{v:.4}"))),
        "false_positive_rate" => Some(("fp_rate", |v| format!("{v:.4}"))),
        "false_negative_rate" => Some(("fn_rate", |v| format!("{v:.4}"))),
        "final_tau" => Some(("final_tau", |v| format!("{v:.3}"))),
        "token_savings_vs_slow" => Some(("savings_vs_slow", |v| format!("{:+.1}%", v * 100.0))),
        _ => None,
    }
}

/// Confidence-interval triplets merged into one display column each.
const CI_GROUPS: [(&str, &str, &str, &str); 2] = [
    (
        "acc_delta_vs_fast",
        "acc_delta_vs_fast_lo",
        "acc_delta_vs_fast_hi",
        "d_acc_vs_fast [95% CI]",
    ),
    (
        "acc_delta_vs_slow",
        "acc_delta_vs_slow_lo",
        "acc_delta_vs_slow_hi",
        "d_acc_vs_slow [95% CI]",
    ),
];

fn align(columns: &[(String, bool, Vec<String>)]) -> String {
    let widths: Vec<usize> = columns
        .iter()
        .map(|(header, _, cells)| {
            cells.iter().map(|c| c.len()).chain([header.len()]).max().unwrap_or(0)
        })
        .collect();
    let n_rows = columns.first().map(|(_, _, c)| c.len()).unwrap_or(0);

    let render_line = |fields: Vec<&str>| -> String {
        let line: Vec<String> = fields
            .iter()
            .zip(widths.iter().copied())
            .zip(columns)
            .map(|((f, w), (_, right_align, _))| {
                if *right_align {
                    format!("{f:>w$}")
                } else {
                    format!("{f:<w$}")
                }
            })
            .collect();
        format!("{}\n", line.join("  ").trim_end())
    };

    let mut out = String::new();
    out.push_str(&render_line(columns.iter().map(|(h, _, _)| h.as_str()).collect()));
    let dashes: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&render_line(dashes.iter().map(String::as_str).collect()));
    for r in 0..n_rows {
        out.push_str(&render_line(columns.iter().map(|(_, _, c)| c[r].as_str()).collect()));
    }
    out
}

/// Render a metrics CSV into an aligned text table.
pub fn render_metrics_table(csv_text: &str) -> CliResult<String> {
    let table = parse_table(csv_text)?;
    let n_rows = table.rows.len();

    // Token savings: use the table's own column when present; otherwise
    // derive one against the uniform_slow row when possible.
    let savings_present = table.column("token_savings_vs_slow").is_some();
    let derived_savings: Option<Vec<String>> = if savings_present {
        None
    } else {
        let tokens_col = table.column("mean_tokens");
        let baseline_col = table.column("baseline");
        match (tokens_col, baseline_col) {
            (Some(tc), Some(bc)) => {
                let slow_row = (0..n_rows).find(|&r| table.rows[r][bc] == "uniform_slow");
                match slow_row {
                    Some(sr) => {
                        let slow_tokens =
                            parse_number(&table.rows[sr][tc], "mean_tokens", sr)?.unwrap_or(0.0);
                        if slow_tokens > 0.0 {
                            let mut cells = Vec::with_capacity(n_rows);
                            for r in 0..n_rows {
                                let cell = match parse_number(&table.rows[r][tc], "mean_tokens", r)? {
                                    Some(v) => format!("{:+.1}%", (1.0 - v / slow_tokens) * 100.0),
                                    None => String::new(),
                                };
                                cells.push(cell);
                            }
                            Some(cells)
                        } else {
                            None
                        }
                    }
                    None => None,
                }
            }
            _ => None,
        }
    };

    // Columns consumed by a CI merge.
    let mut merged_members: Vec<&str> = Vec::new();
    let mut ci_columns: Vec<(String, Vec<String>)> = Vec::new();
    for (mean_h, lo_h, hi_h, display) in CI_GROUPS {
        if let (Some(mc), Some(lc), Some(hc)) =
            (table.column(mean_h), table.column(lo_h), table.column(hi_h))
        {
            let mut cells = Vec::with_capacity(n_rows);
            for r in 0..n_rows {
                let mean = parse_number(&table.rows[r][mc], mean_h, r)?;
                let lo = parse_number(&table.rows[r][lc], lo_h, r)?;
                let hi = parse_number(&table.rows[r][hc], hi_h, r)?;
                cells.push(match (mean, lo, hi) {
                    (Some(m), Some(l), Some(h)) => format!("{m:+.4} [{l:+.4}, {h:+.4}]"),
                    _ => String::new(),
                });
            }
            merged_members.extend([mean_h, lo_h, hi_h]);
            ci_columns.push((display.to_string(), cells));
        }
    }

    // Assemble display columns in input order.
    let mut columns: Vec<(String, bool, Vec<String>)> = Vec::new();
    let mut ci_iter = ci_columns.into_iter();
    for (ci, header) in table.headers.iter().enumerate() {
        if merged_members.contains(&header.as_str()) {
            // The mean column of each group anchors the merged column's
            // position; lo/hi vanish.
            if CI_GROUPS.iter().any(|g| g.0 == header) {
                let (display, cells) = ci_iter.next().expect("one merged column per group");
                columns.push((display, true, cells));
            }
            continue;
        }
        match known_format(header) {
            Some((display, _)) if header == "baseline" => {
                let cells = (0..n_rows).map(|r| table.rows[r][ci].clone()).collect();
                columns.push((display.to_string(), false, cells));
            }
            Some((display, fmt)) => {
                let mut cells = Vec::with_capacity(n_rows);
                for r in 0..n_rows {
                    cells.push(match parse_number(&table.rows[r][ci], header, r)? {
                        Some(v) => fmt(v),
                        None => String::new(),
                    });
                }
                columns.push((display.to_string(), true, cells));
            }
            None => {
                eprintln!("warning: unknown column `{header}` passed through unformatted");
                let cells = (0..n_rows).map(|r| table.rows[r][ci].clone()).collect();
                columns.push((header.clone(), false, cells));
            }
        }
    }
    if let Some(cells) = derived_savings {
        columns.push(("savings_vs_slow".to_string(), true, cells));
    }

    let mut out = align(&columns);
    if table.column("routing_accuracy").is_some() {
        out.push_str(
            "routing_acc / fp_rate / fn_rate are measured against the cost-penalized oracle strategy\n",
        );
    }
    Ok(out)
}

pub fn cmd_report(config: &AppConfig, args: &ReportArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.metrics)
        .map_err(|e| CliError::io(format!("reading {}: {e}", args.metrics.display())))?;
    print!("{}", render_metrics_table(&text)?);

    if args.plot {
        let table = parse_table(&text)?;
        let baseline = table.column("baseline");
        let tokens = table.column("mean_tokens");
        let accuracy = table.column("accuracy");
        let (Some(_), Some(tc), Some(ac)) = (baseline, tokens, accuracy) else {
            return Err(CliError::data(
                "plotting needs baseline, mean_tokens, and accuracy columns",
            ));
        };
        let mut points = Vec::new();
        let mut bars = Vec::new();
        for r in 0..table.rows.len() {
            let label = table.cell(r, baseline).to_string();
            let x = parse_number(table.cell(r, Some(tc)), "mean_tokens", r)?;
            let y = parse_number(table.cell(r, Some(ac)), "accuracy", r)?;
            if let (Some(x), Some(y)) = (x, y) {
                points.push(plot::PlotPoint { label: label.clone(), x, y });
                bars.push(plot::BarDatum { label, value: x });
            }
        }
        let dir = config
            .output_dir
            .clone()
            .or_else(|| args.metrics.parent().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        write_artifact(
            &dir,
            "accuracy_vs_tokens.svg",
            &plot::scatter_svg("Accuracy vs token cost", "mean tokens", "accuracy", &points),
        )?;
        write_artifact(
            &dir,
            "tokens_bar.svg",
            &plot::bar_svg("Mean token cost per baseline", "mean tokens", &bars),
        )?;
        println!("plots written to {}", dir.display());
    }
    Ok(())
}
