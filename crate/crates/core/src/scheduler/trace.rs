//! Scheduler decision traces, dumpable as JSON lines.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::topology::LinkId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    /// A transmitter announced the link as its candidate.
    Request,
    /// The receiver granted the link.
    Grant,
    /// The link was rejected by some receiver and muted.
    Reject,
    Schedule,
    Mute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub slot: usize,
    pub iteration: usize,
    pub link: LinkId,
    pub action: Action,
    pub weight: f64,
}

/// Collects [`TraceEvent`]s when enabled; a no-op otherwise.
#[derive(Debug, Clone, Default)]
pub struct DecisionTrace {
    enabled: bool,
    slot: usize,
    events: Vec<TraceEvent>,
}

impl DecisionTrace {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            ..Self::default()
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Starts a new slot, dropping the events of the previous one.
    pub fn begin_slot(&mut self, slot: usize) {
        self.slot = slot;
        self.events.clear();
    }

    pub fn record(&mut self, iteration: usize, link: LinkId, action: Action, weight: f64) {
        if self.enabled {
            self.events.push(TraceEvent {
                slot: self.slot,
                iteration,
                link,
                action,
                weight,
            });
        }
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_trace_records_nothing() {
        let mut t = DecisionTrace::disabled();
        t.record(1, 0, Action::Schedule, 1.0);
        assert!(t.events().is_empty());
    }

    #[test]
    fn jsonl_round_trip() {
        let mut t = DecisionTrace::new(true);
        t.begin_slot(4);
        t.record(1, 7, Action::Grant, 2.5);
        let line = t.to_jsonl();
        assert_eq!(
            line,
            "{\"slot\":4,\"iteration\":1,\"link\":7,\"action\":\"grant\",\"weight\":2.5}\n"
        );
        let back: TraceEvent = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(back, t.events()[0]);
    }
}
