use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::engine::{Response, Session};
use super::SessionError;
use crate::graph::{ItemId, PersonId};

/// A session command, as sent by a client or stored in a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    State,
    Advance,
    BattlePair,
    BattleChoice { winner: ItemId },
    RoundView,
    RoundSelect { person: PersonId },
    Result,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::State => f.write_str("state"),
            Command::Advance => f.write_str("advance"),
            Command::BattlePair => f.write_str("battle_pair"),
            Command::BattleChoice { winner } => write!(f, "battle_choice {winner}"),
            Command::RoundView => f.write_str("round_view"),
            Command::RoundSelect { person } => write!(f, "round_select {person}"),
            Command::Result => f.write_str("result"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    /// Milliseconds since the session was created.
    pub at_ms: u64,
    #[serde(flatten)]
    pub command: Command,
    /// Error code the command is expected to fail with, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_error: Option<String>,
}

/// Every command of one session, with the session seed. Replaying it
/// against the same snapshot reproduces the session exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub seed: u64,
    pub commands: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayError {
    pub index: usize,
    pub command: Command,
    pub kind: ReplayMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayMismatch {
    Failed(SessionError),
    UnexpectedSuccess { expected: String },
    WrongError { expected: String, got: SessionError },
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "transcript command #{} ({}): ",
            self.index + 1,
            self.command
        )?;
        match &self.kind {
            ReplayMismatch::Failed(e) => write!(f, "{}: {e}", e.name()),
            ReplayMismatch::UnexpectedSuccess { expected } => {
                write!(f, "expected error {expected} but the command succeeded")
            }
            ReplayMismatch::WrongError { expected, got } => {
                write!(f, "expected error {expected}, got {}: {got}", got.name())
            }
        }
    }
}

impl std::error::Error for ReplayError {}

impl Transcript {
    /// Replays every command against `session`, created at `created_at`.
    /// Returns the responses of successful commands.
    pub fn replay(
        &self,
        session: &mut Session,
        created_at: Duration,
    ) -> Result<Vec<Response>, ReplayError> {
        let mut responses = Vec::with_capacity(self.commands.len());
        for (index, entry) in self.commands.iter().enumerate() {
            let now = created_at + Duration::from_millis(entry.at_ms);
            let outcome = session.apply(&entry.command, now);
            let mismatch = match (outcome, &entry.expect_error) {
                (Ok(r), None) => {
                    responses.push(r);
                    continue;
                }
                (Err(e), Some(code)) if e.code() == code || e.name() == code => continue,
                (Err(e), None) => ReplayMismatch::Failed(e),
                (Ok(_), Some(code)) => ReplayMismatch::UnexpectedSuccess {
                    expected: code.clone(),
                },
                (Err(e), Some(code)) => ReplayMismatch::WrongError {
                    expected: code.clone(),
                    got: e,
                },
            };
            return Err(ReplayError {
                index,
                command: entry.command.clone(),
                kind: mismatch,
            });
        }
        Ok(responses)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_wire_format() {
        let t = Transcript {
            seed: 7,
            commands: vec![
                TranscriptEntry {
                    at_ms: 0,
                    command: Command::Advance,
                    expect_error: None,
                },
                TranscriptEntry {
                    at_ms: 1500,
                    command: Command::RoundSelect {
                        person: "p01".into(),
                    },
                    expect_error: Some("already_selected".into()),
                },
            ],
        };
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "seed": 7,
                "commands": [
                    {"at_ms": 0, "cmd": "advance"},
                    {"at_ms": 1500, "cmd": "round_select", "person": "p01", "expect_error": "already_selected"}
                ]
            })
        );
        assert_eq!(serde_json::from_value::<Transcript>(json).unwrap(), t);
    }
}
