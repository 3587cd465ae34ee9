//! Delimited-text control logs used to replay manual flights.
//!
//! One record per line: `tick,drone_id,forward,right,climb,yaw_rate,gimbal_rate`
//! with a header row. A record with tick `k` is applied by the step that
//! advances the world from tick `k` to `k + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::drone::ControlInput;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    pub tick: u64,
    pub drone_id: u32,
    pub forward: f64,
    pub right: f64,
    pub climb: f64,
    pub yaw_rate: f64,
    pub gimbal_rate: f64,
}

impl ControlRecord {
    pub fn new(tick: u64, drone_id: u32, input: ControlInput) -> Self {
        ControlRecord {
            tick,
            drone_id,
            forward: input.forward,
            right: input.right,
            climb: input.climb,
            yaw_rate: input.yaw_rate,
            gimbal_rate: input.gimbal_rate,
        }
    }

    pub fn input(&self) -> ControlInput {
        ControlInput {
            forward: self.forward,
            right: self.right,
            climb: self.climb,
            yaw_rate: self.yaw_rate,
            gimbal_rate: self.gimbal_rate,
        }
    }
}

pub fn read_control_log(text: &str) -> Result<Vec<ControlRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let records = reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Parse(format!("control log row {}: {e}", i + 1))))
        .collect::<Result<Vec<ControlRecord>>>()?;
    if records.windows(2).any(|w| w[1].tick < w[0].tick) {
        return Err(Error::Parse("control log ticks must be non-decreasing".into()));
    }
    Ok(records)
}

pub fn write_control_log(records: &[ControlRecord]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer.serialize(r).map_err(|e| Error::Export(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}
