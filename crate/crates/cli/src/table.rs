//! CSV tables: header row, UTF-8, LF line endings.

use std::io::{Read, Write};

use crate::error::CliError;
use crate::format::parse_opt;

/// A rectangular table of text cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.as_ref().to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let wrap = |e: csv::Error| CliError::Data(e.to_string());
        out.write_record(&self.headers).map_err(wrap)?;
        for row in &self.rows {
            out.write_record(row).map_err(wrap)?;
        }
        out.flush().map_err(|e| CliError::io("writing CSV", e))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn read<R: Read>(r: R) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let wrap = |e: csv::Error| CliError::Data(e.to_string());
        let headers = rdr.headers().map_err(wrap)?.iter().map(str::to_owned).collect();
        let rows = rdr
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()).map_err(wrap))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// A numeric column; empty cells become `None`.
    pub fn f64_column(&self, name: &str) -> Result<Vec<Option<f64>>, CliError> {
        let i = self
            .column_index(name)
            .ok_or_else(|| CliError::Data(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .map(|row| parse_opt(&row[i]).transpose().map_err(CliError::Data))
            .collect()
    }

    pub fn text_column(&self, name: &str) -> Result<Vec<&str>, CliError> {
        let i = self
            .column_index(name)
            .ok_or_else(|| CliError::Data(format!("no column {name:?}")))?;
        Ok(self.rows.iter().map(|row| row[i].as_str()).collect())
    }
}
