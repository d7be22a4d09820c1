//! Protocol execution fabric: party roles, subsystem custody, the
//! interceptable quantum channel, the public classical board, and per-round
//! transcripts.

mod board;
mod channel;
mod custody;
mod session;
mod transcript;

pub use board::{NoticeKind, Payload, PublicAnnouncement, PublicBoard};
pub use channel::{EveCtx, Interceptor, QuantumChannel, TransitRecord};
pub use custody::{CustodyLedger, Holder};
pub use session::{RoundOperator, Session, SessionRng};
pub use transcript::{RoundRecord, Transcript};

use serde::{Deserialize, Serialize};

/// Protocol participants. `Eve` never appears in a protocol schedule; she
/// exists only as the channel interceptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartyId {
    Alice,
    Bob,
    Charlie,
    Eve,
}

impl std::fmt::Display for PartyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PartyId::Alice => "alice",
            PartyId::Bob => "bob",
            PartyId::Charlie => "charlie",
            PartyId::Eve => "eve",
        };
        f.write_str(s)
    }
}
