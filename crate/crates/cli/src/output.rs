//! The fixed, versioned CSV row schema shared by every command and
//! experiment. Columns keep their names across experiments; the JSON sidecar
//! documents what each column holds for a given experiment kind.

use std::fmt;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "schema_version,experiment,q,k,a_product,a_norm,observed,main,error,shape_r1,shape_r2,shape_r3";

/// One CSV cell: an exact integer, a float, or empty when the column does
/// not apply to the experiment at hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub q: u64,
    pub k: usize,
    pub a_product: u128,
    pub a_norm: f64,
    pub observed: Cell,
    pub main: Cell,
    pub error: Cell,
    pub shape_r1: Cell,
    pub shape_r2: Cell,
    pub shape_r3: Cell,
}

pub fn csv_line(experiment: &str, row: &Row) -> String {
    format!(
        "{SCHEMA_VERSION},{experiment},{},{},{},{},{},{},{},{},{},{}",
        row.q,
        row.k,
        row.a_product,
        row.a_norm,
        row.observed,
        row.main,
        row.error,
        row.shape_r1,
        row.shape_r2,
        row.shape_r3
    )
}

/// The complete CSV document: header plus one line per row, `\n`-separated,
/// trailing newline. Built in memory so a run writes its file in one shot.
pub fn csv_document(experiment: &str, rows: &[Row]) -> String {
    let mut doc = String::with_capacity(64 * (rows.len() + 1));
    doc.push_str(CSV_HEADER);
    doc.push('\n');
    for row in rows {
        doc.push_str(&csv_line(experiment, row));
        doc.push('\n');
    }
    doc
}
