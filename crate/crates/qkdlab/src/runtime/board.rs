//! The public classical board: an append-only announcement list readable by
//! every party and by the interceptor.

use serde::{Deserialize, Serialize};

use super::PartyId;

/// Operation notices used by the classical-communication protocol variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoticeKind {
    /// Sender applied an extra key rotation before encoding; the receiver
    /// must compensate before decoding.
    CompensateRotation,
    /// Sender applied no encoding operation; the receiver measures directly.
    NoOperation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Payload {
    /// A publicly compared symbol. Check announcements carry the round
    /// position, not just the value.
    CheckValue { position: usize, value: u32 },
    Notice { notice: NoticeKind },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicAnnouncement {
    pub round: usize,
    pub announcer: PartyId,
    pub payload: Payload,
}

/// Append-only, never erased.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PublicBoard {
    entries: Vec<PublicAnnouncement>,
}

impl PublicBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, ann: PublicAnnouncement) {
        self.entries.push(ann);
    }

    pub fn entries(&self) -> &[PublicAnnouncement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
