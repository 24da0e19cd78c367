//! Numeric CSV tables.

use std::str::FromStr;

use quadratik_core::{DataMatrix, GroupLabels};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, Result};

/// Field delimiter, written as a name (`comma`, `tab`, `semicolon`,
/// `space`, `pipe`) or as the single character itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Delimiter(u8);

impl Delimiter {
    pub const COMMA: Self = Self(b',');
    pub const TAB: Self = Self(b'\t');

    pub fn byte(self) -> u8 {
        self.0
    }
}

impl Default for Delimiter {
    fn default() -> Self {
        Self::COMMA
    }
}

impl FromStr for Delimiter {
    type Err = ApiError;
    fn from_str(s: &str) -> Result<Self> {
        let b = match s.to_ascii_lowercase().as_str() {
            "comma" => b',',
            "tab" | "\\t" => b'\t',
            "semicolon" => b';',
            "space" => b' ',
            "pipe" => b'|',
            _ if s.len() == 1 && s.is_ascii() => s.as_bytes()[0],
            _ => return Err(ApiError::invalid(format!("unsupported delimiter {s:?}"))),
        };
        Ok(Self(b))
    }
}

impl TryFrom<String> for Delimiter {
    type Error = ApiError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Delimiter> for String {
    fn from(d: Delimiter) -> String {
        match d.0 {
            b',' => "comma".into(),
            b'\t' => "tab".into(),
            b';' => "semicolon".into(),
            b' ' => "space".into(),
            b'|' => "pipe".into(),
            b => (b as char).to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    #[serde(default)]
    pub delimiter: Delimiter,
    #[serde(default)]
    pub has_header: bool,
}

/// A dense numeric table with optional column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: usize,
    pub columns: usize,
    /// Row-major cells.
    values: Vec<f64>,
    /// File line of each row, for error messages.
    #[serde(skip)]
    lines: Vec<usize>,
}

impl Table {
    pub fn from_matrix(x: &DataMatrix) -> Self {
        Self { header: None, rows: x.n(), columns: x.d(), values: x.as_slice().to_vec(), lines: Vec::new() }
    }

    pub fn parse(bytes: &[u8], opts: CsvOptions) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(opts.delimiter.byte())
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let mut header = None;
        let mut values = Vec::new();
        let mut columns = 0;
        let mut rows = 0;
        let mut lines = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| ApiError::Parse {
                row: e.position().map_or(i + 1, |p| p.line() as usize),
                column: 0,
                message: e.to_string(),
            })?;
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            if record.iter().all(str::is_empty) {
                continue;
            }
            if opts.has_header && header.is_none() && rows == 0 {
                columns = record.len();
                header = Some(record.iter().map(str::to_string).collect());
                continue;
            }
            if columns == 0 {
                columns = record.len();
            }
            if record.len() != columns {
                return Err(ApiError::Parse {
                    row: line,
                    column: record.len().min(columns) + 1,
                    message: format!("expected {columns} fields, found {}", record.len()),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| ApiError::Parse {
                    row: line,
                    column: j + 1,
                    message: format!("non-numeric cell {cell:?}"),
                })?;
                if !v.is_finite() {
                    return Err(ApiError::Parse { row: line, column: j + 1, message: format!("non-finite cell {cell:?}") });
                }
                values.push(v);
            }
            rows += 1;
            lines.push(line);
        }
        if rows == 0 {
            return Err(ApiError::Parse { row: 1, column: 1, message: "no data rows".into() });
        }
        Ok(Self { header, rows, columns, values, lines })
    }

    fn line(&self, i: usize) -> usize {
        self.lines.get(i).copied().unwrap_or(i + 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.columns + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_matrix(&self) -> Result<DataMatrix> {
        Ok(DataMatrix::new(self.values.clone(), self.rows, self.columns)?)
    }

    /// Split off the 1-based column `col` as integer group labels.
    pub fn split_labels(&self, col: usize) -> Result<(DataMatrix, GroupLabels)> {
        if col == 0 || col > self.columns {
            return Err(ApiError::invalid(format!("label column {col} is outside 1..={}", self.columns)));
        }
        if self.columns < 2 {
            return Err(ApiError::invalid("no data columns remain after removing the label column"));
        }
        let j = col - 1;
        let mut labels = Vec::with_capacity(self.rows);
        let mut values = Vec::with_capacity(self.rows * (self.columns - 1));
        for i in 0..self.rows {
            let v = self.get(i, j);
            labels.push(integral(v).ok_or_else(|| ApiError::Parse {
                row: self.line(i),
                column: col,
                message: format!("label {v} is not an integer"),
            })?);
            values.extend((0..self.columns).filter(|&c| c != j).map(|c| self.get(i, c)));
        }
        Ok((DataMatrix::new(values, self.rows, self.columns - 1)?, GroupLabels::new(labels)?))
    }

    /// Read a label vector from the first column.
    pub fn labels(&self) -> Result<GroupLabels> {
        let labels = (0..self.rows)
            .map(|i| {
                let v = self.get(i, 0);
                integral(v).ok_or_else(|| ApiError::Parse {
                    row: self.line(i),
                    column: 1,
                    message: format!("label {v} is not an integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupLabels::new(labels)?)
    }
}

fn integral(v: f64) -> Option<i64> {
    (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}
