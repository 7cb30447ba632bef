//! Export and import of grid label matrices.
//!
//! CSV: header `symbol,0,1,..` (subcarrier indices), then one row per OFDM
//! symbol holding channel label strings. JSON: dimensions, a legend and
//! run-length-encoded labels in symbol-major order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ChannelKind, Direction, ResourceGrid};
use crate::numerology::{GridDimensions, SUBCARRIERS_PER_RB, SYMBOLS_PER_SLOT};

#[derive(Debug, Error)]
pub enum OccupancyError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed occupancy map: {0}")]
    Malformed(String),
}

/// Row-major (one row per symbol) copy of a grid's labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyMap {
    pub subcarriers: usize,
    pub symbols: usize,
    pub direction: Direction,
    pub labels: Vec<ChannelKind>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OccupancyJson {
    subcarriers: usize,
    symbols: usize,
    direction: Direction,
    order: String,
    legend: Vec<ChannelKind>,
    /// `[label, run length]` pairs.
    runs: Vec<(ChannelKind, usize)>,
}

pub fn occupancy_map(grid: &ResourceGrid) -> OccupancyMap {
    OccupancyMap {
        subcarriers: grid.dims().subcarriers,
        symbols: grid.dims().symbols_per_frame,
        direction: grid.direction(),
        labels: grid.labels().to_vec(),
    }
}

impl OccupancyMap {
    pub fn row(&self, symbol: usize) -> &[ChannelKind] {
        &self.labels[symbol * self.subcarriers..(symbol + 1) * self.subcarriers]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), OccupancyError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = Vec::with_capacity(self.subcarriers + 1);
        header.push("symbol".to_string());
        header.extend((0..self.subcarriers).map(|sc| sc.to_string()));
        w.write_record(&header)?;
        for sym in 0..self.symbols {
            let mut record = Vec::with_capacity(self.subcarriers + 1);
            record.push(sym.to_string());
            record.extend(self.row(sym).iter().map(|k| k.as_str().to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, OccupancyError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let subcarriers = r.headers()?.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| {
            OccupancyError::Malformed("header must list at least one subcarrier".into())
        })?;
        let mut labels = Vec::new();
        let mut symbols = 0;
        for record in r.records() {
            let record = record?;
            for field in record.iter().skip(1) {
                labels.push(field.parse::<ChannelKind>().map_err(OccupancyError::Malformed)?);
            }
            symbols += 1;
        }
        if labels.len() != subcarriers * symbols {
            return Err(OccupancyError::Malformed("ragged rows".into()));
        }
        let direction = infer_direction(&labels);
        Ok(OccupancyMap { subcarriers, symbols, direction, labels })
    }

    pub fn to_json(&self) -> Result<String, OccupancyError> {
        let mut runs: Vec<(ChannelKind, usize)> = Vec::new();
        for &k in &self.labels {
            match runs.last_mut() {
                Some((last, n)) if *last == k => *n += 1,
                _ => runs.push((k, 1)),
            }
        }
        let doc = OccupancyJson {
            subcarriers: self.subcarriers,
            symbols: self.symbols,
            direction: self.direction,
            order: "symbol_major".into(),
            legend: ChannelKind::ALL.to_vec(),
            runs,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self, OccupancyError> {
        let doc: OccupancyJson = serde_json::from_str(text)?;
        if doc.order != "symbol_major" {
            return Err(OccupancyError::Malformed(format!("unsupported order {:?}", doc.order)));
        }
        let labels: Vec<ChannelKind> = doc
            .runs
            .iter()
            .flat_map(|&(k, n)| std::iter::repeat_n(k, n))
            .collect();
        if labels.len() != doc.subcarriers * doc.symbols {
            return Err(OccupancyError::Malformed(format!(
                "runs cover {} REs, expected {}",
                labels.len(),
                doc.subcarriers * doc.symbols
            )));
        }
        Ok(OccupancyMap {
            subcarriers: doc.subcarriers,
            symbols: doc.symbols,
            direction: doc.direction,
            labels,
        })
    }

    /// Rebuilds a grid from the exported labels.
    pub fn into_grid(self) -> Result<ResourceGrid, OccupancyError> {
        if !self.subcarriers.is_multiple_of(SUBCARRIERS_PER_RB) || !self.symbols.is_multiple_of(SYMBOLS_PER_SLOT) {
            return Err(OccupancyError::Malformed(
                "dimensions are not whole RBs and slots".into(),
            ));
        }
        let dims = GridDimensions {
            rb_count: self.subcarriers / SUBCARRIERS_PER_RB,
            subcarriers: self.subcarriers,
            slots_per_frame: self.symbols / SYMBOLS_PER_SLOT,
            symbols_per_frame: self.symbols,
            res_per_frame: self.subcarriers * self.symbols,
        };
        Ok(ResourceGrid::from_labels(dims, self.direction, self.labels))
    }
}

fn infer_direction(labels: &[ChannelKind]) -> Direction {
    labels
        .iter()
        .find_map(|k| k.direction())
        .unwrap_or(Direction::Downlink)
}
