//! Custody ledger: which party currently holds each subsystem.
//!
//! A gate application is legal only if the acting party holds every touched
//! subsystem; in-transit subsystems can be acted on only by the active
//! interceptor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::qcore::Label;

use super::PartyId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Holder {
    Party(PartyId),
    InTransit,
}

#[derive(Debug, Clone, Default)]
pub struct CustodyLedger {
    holders: BTreeMap<Label, Holder>,
}

impl CustodyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, label: Label, holder: Holder) {
        self.holders.insert(label, holder);
    }

    pub fn remove(&mut self, label: &Label) {
        self.holders.remove(label);
    }

    pub fn holder_of(&self, label: &Label) -> Result<Holder> {
        self.holders
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// No-op when `party` holds every named subsystem; custody error
    /// otherwise. Never silently ignored by callers.
    pub fn assert_custody(&self, party: PartyId, labels: &[&Label]) -> Result<()> {
        for l in labels {
            match self.holder_of(l)? {
                Holder::Party(p) if p == party => {}
                holder => {
                    return Err(Error::Custody(format!(
                        "{party} does not hold `{l}` (held by {holder:?})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn set_in_transit(&mut self, label: &Label) -> Result<()> {
        let h = self
            .holders
            .get_mut(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        *h = Holder::InTransit;
        Ok(())
    }

    pub fn labels_held_by(&self, party: PartyId) -> Vec<Label> {
        self.holders
            .iter()
            .filter(|(_, h)| matches!(h, Holder::Party(p) if *p == party))
            .map(|(l, _)| l.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.holders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holders.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assert_custody_paths() {
        let mut ledger = CustodyLedger::new();
        ledger.assign("A".into(), Holder::Party(PartyId::Alice));
        ledger.assign("B".into(), Holder::Party(PartyId::Bob));
        assert!(ledger.assert_custody(PartyId::Alice, &[&"A".into()]).is_ok());
        assert!(matches!(
            ledger.assert_custody(PartyId::Eve, &[&"B".into()]),
            Err(Error::Custody(_))
        ));
        assert!(matches!(
            ledger.assert_custody(PartyId::Alice, &[&"C".into()]),
            Err(Error::UnknownLabel(_))
        ));
    }
}
