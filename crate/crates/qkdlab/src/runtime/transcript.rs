//! Per-round transcript records and their line-delimited JSON serialization
//! (one JSON object per round).

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

use super::board::PublicAnnouncement;
use super::channel::TransitRecord;

#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub kind: String,
    pub alice_symbol: u32,
    pub bob_symbol: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charlie_symbol: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eve_symbol: Option<u32>,
    pub detected: bool,
    /// Channel transits of this round (custody trace).
    pub transits: Vec<TransitRecord>,
    /// Announcements made during this round.
    pub announcements: Vec<PublicAnnouncement>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
}

impl Transcript {
    /// Writes one JSON object per round.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}
