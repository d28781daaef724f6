//! Report emission: canonical JSON, or per-task tables with an `all` column
//! followed by one column per class, values as 1-decimal percentages.

use serde::{Deserialize, Serialize};

use super::stats::StatsReport;
use crate::error::{Error, Result};
use crate::instance_metrics::{ApMetric, ApReport, PERSON_CLASS};
use crate::maskcore::Task;
use crate::semantic_metrics::{MeanPolicy, SemanticReport};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub semantic: Vec<SemanticReport>,
    pub ap: Vec<ApReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableBlock {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl TableBlock {
    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn value(&self, label: &str, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.row(label)?.values[c]
    }
}

fn percent(v: Option<f64>) -> Option<f64> {
    v.map(|x| x * 100.0)
}

fn block_for<'a>(blocks: &'a mut Vec<TableBlock>, title: &str, columns: impl FnOnce() -> Vec<String>) -> &'a mut TableBlock {
    let pos = match blocks.iter().position(|b| b.title == title) {
        Some(p) => p,
        None => {
            blocks.push(TableBlock {
                title: title.to_owned(),
                columns: columns(),
                rows: Vec::new(),
            });
            blocks.len() - 1
        }
    };
    &mut blocks[pos]
}

fn task_columns(taxonomy: &Taxonomy, task: Task) -> Vec<String> {
    let catalog = taxonomy.catalog(task);
    std::iter::once("all".to_owned())
        .chain((1..=catalog.class_count() as u16).map(|c| catalog.short_name(c).to_owned()))
        .collect()
}

/// Lays out metric reports as table blocks, one block per label space.
pub fn table_blocks(bundle: &ReportBundle, taxonomy: &Taxonomy, policy: MeanPolicy) -> Vec<TableBlock> {
    let mut blocks: Vec<TableBlock> = Vec::new();
    for s in &bundle.semantic {
        let catalog = taxonomy.catalog(s.task);
        let mut values = vec![percent(s.mean(policy))];
        values.extend((1..=catalog.class_count() as u16).map(|c| {
            percent(s.per_class.get(catalog.name(c)).copied().flatten())
        }));
        let label = match policy {
            MeanPolicy::ForegroundOnly => "mIoU",
            MeanPolicy::WithBackground => "mIoU (with background)",
        };
        block_for(&mut blocks, s.task.name(), || task_columns(taxonomy, s.task)).rows.push(TableRow {
            label: label.to_owned(),
            values,
        });
    }
    for r in &bundle.ap {
        match (r.metric, r.task) {
            (ApMetric::ApP, _) | (_, None) => {
                let block = block_for(&mut blocks, PERSON_CLASS, || vec!["all".to_owned()]);
                block.rows.push(TableRow {
                    label: r.metric.label().to_owned(),
                    values: vec![percent(r.overall)],
                });
            }
            (_, Some(task)) => {
                let catalog = taxonomy.catalog(task);
                let mut values = vec![percent(r.overall)];
                values.extend((1..=catalog.class_count() as u16).map(|c| percent(r.volume(catalog.name(c)))));
                block_for(&mut blocks, task.name(), || task_columns(taxonomy, task)).rows.push(TableRow {
                    label: r.metric.label().to_owned(),
                    values,
                });
            }
        }
    }
    if let Some(stats) = &bundle.stats {
        for task in Task::SEMANTIC {
            let Some(counts) = stats.images_per_label.get(task.name()) else {
                continue;
            };
            let catalog = taxonomy.catalog(task);
            let title = format!("images per label: {task}");
            let mut values = vec![Some(stats.images as f64)];
            values.extend((1..=catalog.class_count() as u16).map(|c| counts.get(catalog.name(c)).map(|&n| n as f64)));
            block_for(&mut blocks, &title, || task_columns(taxonomy, task)).rows.push(TableRow {
                label: "images".to_owned(),
                values,
            });
        }
    }
    blocks
}

fn format_cell(v: Option<f64>, integer: bool) -> String {
    match v {
        None => "-".to_owned(),
        Some(x) if integer => format!("{x:.0}"),
        Some(x) => format!("{x:.1}"),
    }
}

pub fn render_blocks(blocks: &[TableBlock]) -> String {
    let mut out = String::new();
    if blocks.is_empty() {
        out.push_str("| metric | all |\n|---|---|\n");
        return out;
    }
    for (i, block) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let integer = block.title.starts_with("images per label");
        out.push_str(&format!("## {}\n", block.title));
        out.push_str("| metric |");
        for c in &block.columns {
            out.push_str(&format!(" {c} |"));
        }
        out.push('\n');
        out.push_str(&"|---".repeat(block.columns.len() + 1));
        out.push_str("|\n");
        for row in &block.rows {
            out.push_str(&format!("| {} |", row.label));
            for &v in &row.values {
                out.push_str(&format!(" {} |", format_cell(v, integer)));
            }
            out.push('\n');
        }
    }
    out
}

fn cells(line: &str) -> Vec<String> {
    let trimmed = line.trim();
    let inner = trimmed.strip_prefix('|').unwrap_or(trimmed);
    let inner = inner.strip_suffix('|').unwrap_or(inner);
    inner.split('|').map(|c| c.trim().to_owned()).collect()
}

/// Reads back tables produced by [`render_blocks`].
pub fn parse_table(text: &str) -> Result<Vec<TableBlock>> {
    let mut blocks: Vec<TableBlock> = Vec::new();
    let mut current: Option<TableBlock> = None;
    let bad = |line: &str| Error::InvalidConfig(format!("unreadable table line `{line}`"));
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(title) = line.strip_prefix("## ") {
            blocks.extend(current.take());
            current = Some(TableBlock {
                title: title.to_owned(),
                columns: Vec::new(),
                rows: Vec::new(),
            });
        } else if line.starts_with("|---") {
            continue;
        } else if line.starts_with('|') {
            let mut row = cells(line);
            let block = current.get_or_insert_with(|| TableBlock {
                title: String::new(),
                columns: Vec::new(),
                rows: Vec::new(),
            });
            if block.columns.is_empty() {
                row.remove(0);
                block.columns = row;
            } else {
                let label = row.remove(0);
                if row.len() != block.columns.len() {
                    return Err(bad(line));
                }
                let values = row
                    .iter()
                    .map(|c| match c.as_str() {
                        "-" => Ok(None),
                        v => v.parse::<f64>().map(Some).map_err(|_| bad(line)),
                    })
                    .collect::<Result<_>>()?;
                block.rows.push(TableRow { label, values });
            }
        } else {
            return Err(bad(line));
        }
    }
    blocks.extend(current);
    Ok(blocks)
}

pub fn emit_report(bundle: &ReportBundle, format: ReportFormat, taxonomy: &Taxonomy, policy: MeanPolicy) -> String {
    match format {
        ReportFormat::Json => crate::json::to_canonical_string(bundle),
        ReportFormat::Table => render_blocks(&table_blocks(bundle, taxonomy, policy)),
    }
}
