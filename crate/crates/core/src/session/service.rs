use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::engine::{Response, Session};
use super::journal::{Command, Transcript, TranscriptEntry};
use super::{
    BattleChoiceView, BattlePairView, RoundView, SelectionView, SessionError, StateView, Step,
};
use crate::clock::Clock;
use crate::feedback::GameReport;
use crate::game::ScoringParams;
use crate::graph::{
    default_stranger_pool, load_snapshot, snapshot_to_json, ItemId, Person, PersonId,
    ProfileSnapshot,
};

/// Opaque session token: 128 random bits, hex encoded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    fn generate() -> Self {
        let mut bytes = [0u8; 16];
        OsRng.fill_bytes(&mut bytes);
        Token(hex::encode(bytes))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Token {
    fn from(s: &str) -> Self {
        Token(s.to_owned())
    }
}

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub session_ttl: Duration,
    pub max_sessions: usize,
    pub params: ScoringParams,
    pub stranger_pool: Arc<[Person]>,
    /// Append-only session journal; sessions are restored from it on start.
    pub journal_path: Option<PathBuf>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            session_ttl: Duration::from_secs(30 * 60),
            max_sessions: 1024,
            params: ScoringParams::default(),
            stranger_pool: default_stranger_pool().into(),
            journal_path: None,
        }
    }
}

struct Entry {
    session: Session,
    /// Session time at creation.
    created_at: Duration,
    /// Session time equals `base` plus service time elapsed since `anchor`.
    base: Duration,
    anchor: Duration,
    last_access: Duration,
    last_wall_ms: u64,
    transcript: Vec<TranscriptEntry>,
}

impl Entry {
    fn session_now(&self, now: Duration) -> Duration {
        self.base + now.saturating_sub(self.anchor)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum JournalRecord {
    Create {
        token: Token,
        seed: u64,
        wall_ms: u64,
        snapshot: serde_json::Value,
    },
    Command {
        token: Token,
        wall_ms: u64,
        entry: TranscriptEntry,
    },
    Drop {
        token: Token,
    },
}

fn wall_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

struct Inner {
    sessions: RwLock<HashMap<Token, Arc<Mutex<Entry>>>>,
    clock: Arc<dyn Clock>,
    opts: ServiceOptions,
    journal: Option<Mutex<File>>,
}

/// Thread-safe session store. Commands on one session are serialized;
/// different sessions proceed independently.
#[derive(Clone)]
pub struct SessionService {
    inner: Arc<Inner>,
}

impl fmt::Debug for SessionService {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionService")
            .field("sessions", &self.len())
            .field("clock", &self.inner.clock)
            .finish()
    }
}

impl SessionService {
    pub fn new(clock: Arc<dyn Clock>, opts: ServiceOptions) -> io::Result<Self> {
        let (sessions, journal) = match &opts.journal_path {
            None => (HashMap::new(), None),
            Some(path) => {
                let sessions = restore(path, clock.as_ref(), &opts)?;
                let file = rewrite_journal(path, &sessions)?;
                (sessions, Some(Mutex::new(file)))
            }
        };
        Ok(Self {
            inner: Arc::new(Inner {
                sessions: RwLock::new(sessions),
                clock,
                opts,
                journal,
            }),
        })
    }

    /// In-memory service without a journal.
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Self::new(clock, ServiceOptions::default()).expect("no journal, no I/O")
    }

    pub fn options(&self) -> &ServiceOptions {
        &self.inner.opts
    }

    pub fn len(&self) -> usize {
        self.inner.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Clock reading truncated to whole milliseconds, so live sessions and
    /// their transcripts see identical times.
    fn now(&self) -> Duration {
        Duration::from_millis(self.inner.clock.now().as_millis() as u64)
    }

    fn journal(&self, record: &JournalRecord) {
        if let Some(journal) = &self.inner.journal {
            let mut line = serde_json::to_string(record).expect("journal records serialize");
            line.push('\n');
            let mut file = journal.lock().unwrap();
            if let Err(e) = file.write_all(line.as_bytes()).and_then(|_| file.flush()) {
                log::warn!("session journal write failed: {e}");
            }
        }
    }

    pub fn create_session(
        &self,
        snapshot: Arc<ProfileSnapshot>,
        seed: Option<u64>,
    ) -> Result<(Token, Step), SessionError> {
        let seed = seed.unwrap_or_else(|| OsRng.next_u64());
        let session = Session::new(
            snapshot.clone(),
            seed,
            self.inner.opts.params,
            self.inner.opts.stranger_pool.clone(),
        )?;
        if self.len() >= self.inner.opts.max_sessions {
            self.purge_expired();
            if self.len() >= self.inner.opts.max_sessions {
                return Err(SessionError::StoreFull);
            }
        }

        let now = self.now();
        let token = Token::generate();
        let step = session.step();
        self.inner.sessions.write().unwrap().insert(
            token.clone(),
            Arc::new(Mutex::new(Entry {
                session,
                created_at: now,
                base: now,
                anchor: now,
                last_access: now,
                last_wall_ms: wall_ms(),
                transcript: Vec::new(),
            })),
        );
        if self.inner.journal.is_some() {
            self.journal(&JournalRecord::Create {
                token: token.clone(),
                seed,
                wall_ms: wall_ms(),
                snapshot: serde_json::from_str(&snapshot_to_json(&snapshot))
                    .expect("snapshot json is valid"),
            });
        }
        Ok((token, step))
    }

    fn entry(&self, token: &Token) -> Result<Arc<Mutex<Entry>>, SessionError> {
        self.inner
            .sessions
            .read()
            .unwrap()
            .get(token)
            .cloned()
            .ok_or(SessionError::UnknownSession)
    }

    fn expired(&self, entry: &Entry, now: Duration) -> bool {
        now.saturating_sub(entry.last_access) > self.inner.opts.session_ttl
    }

    fn remove(&self, token: &Token) {
        if self.inner.sessions.write().unwrap().remove(token).is_some() {
            self.journal(&JournalRecord::Drop {
                token: token.clone(),
            });
        }
    }

    /// Runs one command against a session and records it in the transcript.
    pub fn run(&self, token: &Token, command: Command) -> Result<Response, SessionError> {
        let entry = self.entry(token)?;
        let mut guard = entry.lock().unwrap();
        let now = self.now();
        if self.expired(&guard, now) {
            drop(guard);
            self.remove(token);
            return Err(SessionError::UnknownSession);
        }
        let session_now = guard.session_now(now);
        let result = guard.session.apply(&command, session_now);
        let record = TranscriptEntry {
            at_ms: session_now.saturating_sub(guard.created_at).as_millis() as u64,
            command,
            expect_error: result.as_ref().err().map(|e| e.code().to_owned()),
        };
        guard.last_access = now;
        guard.last_wall_ms = wall_ms();
        if self.inner.journal.is_some() {
            self.journal(&JournalRecord::Command {
                token: token.clone(),
                wall_ms: guard.last_wall_ms,
                entry: record.clone(),
            });
        }
        guard.transcript.push(record);
        result
    }

    pub fn state(&self, token: &Token) -> Result<StateView, SessionError> {
        match self.run(token, Command::State)? {
            Response::State(v) => Ok(v),
            other => Err(unexpected(other)),
        }
    }

    pub fn advance(&self, token: &Token) -> Result<Step, SessionError> {
        match self.run(token, Command::Advance)? {
            Response::Step(s) => Ok(s),
            other => Err(unexpected(other)),
        }
    }

    pub fn battle_pair(&self, token: &Token) -> Result<BattlePairView, SessionError> {
        match self.run(token, Command::BattlePair)? {
            Response::BattlePair(v) => Ok(v),
            other => Err(unexpected(other)),
        }
    }

    pub fn battle_choice(
        &self,
        token: &Token,
        winner: ItemId,
    ) -> Result<BattleChoiceView, SessionError> {
        match self.run(token, Command::BattleChoice { winner })? {
            Response::BattleChoice(v) => Ok(v),
            other => Err(unexpected(other)),
        }
    }

    pub fn round_view(&self, token: &Token) -> Result<RoundView, SessionError> {
        match self.run(token, Command::RoundView)? {
            Response::Round(v) => Ok(v),
            other => Err(unexpected(other)),
        }
    }

    pub fn round_select(
        &self,
        token: &Token,
        person: PersonId,
    ) -> Result<SelectionView, SessionError> {
        match self.run(token, Command::RoundSelect { person })? {
            Response::Selection(v) => Ok(v),
            other => Err(unexpected(other)),
        }
    }

    pub fn result(&self, token: &Token) -> Result<GameReport, SessionError> {
        match self.run(token, Command::Result)? {
            Response::Report(r) => Ok(*r),
            other => Err(unexpected(other)),
        }
    }

    pub fn transcript(&self, token: &Token) -> Result<Transcript, SessionError> {
        let entry = self.entry(token)?;
        let guard = entry.lock().unwrap();
        Ok(Transcript {
            seed: guard.session.seed(),
            commands: guard.transcript.clone(),
        })
    }

    /// Read-only access to the server-side session state.
    pub fn inspect<R>(
        &self,
        token: &Token,
        f: impl FnOnce(&Session) -> R,
    ) -> Result<R, SessionError> {
        let entry = self.entry(token)?;
        let guard = entry.lock().unwrap();
        Ok(f(&guard.session))
    }

    /// Drops sessions idle for longer than the TTL. Returns how many went.
    pub fn purge_expired(&self) -> usize {
        let now = self.now();
        let expired: Vec<Token> = self
            .inner
            .sessions
            .read()
            .unwrap()
            .iter()
            .filter(|(_, e)| e.try_lock().is_ok_and(|e| self.expired(&e, now)))
            .map(|(t, _)| t.clone())
            .collect();
        for token in &expired {
            self.remove(token);
        }
        expired.len()
    }
}

fn unexpected(r: Response) -> SessionError {
    SessionError::Internal(format!("unexpected response {r:?}"))
}

/// Rebuilds live sessions from the journal. Sessions idle past the TTL (by
/// wall clock) are dropped; surviving sessions resume with their game clock
/// where the last recorded command left it.
fn restore(
    path: &std::path::Path,
    clock: &dyn Clock,
    opts: &ServiceOptions,
) -> io::Result<HashMap<Token, Arc<Mutex<Entry>>>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(e),
    };

    struct Pending {
        seed: u64,
        snapshot: serde_json::Value,
        last_wall: u64,
        commands: Vec<TranscriptEntry>,
    }
    let mut order = Vec::new();
    let mut pending: HashMap<Token, Pending> = HashMap::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JournalRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("skipping unreadable journal line: {e}");
                continue;
            }
        };
        match record {
            JournalRecord::Create {
                token,
                seed,
                wall_ms,
                snapshot,
            } => {
                order.push(token.clone());
                pending.insert(
                    token,
                    Pending {
                        seed,
                        snapshot,
                        last_wall: wall_ms,
                        commands: Vec::new(),
                    },
                );
            }
            JournalRecord::Command {
                token,
                wall_ms,
                entry,
            } => {
                if let Some(p) = pending.get_mut(&token) {
                    p.last_wall = wall_ms;
                    p.commands.push(entry);
                }
            }
            JournalRecord::Drop { token } => {
                pending.remove(&token);
            }
        }
    }

    let now_wall = wall_ms();
    let now = Duration::from_millis(clock.now().as_millis() as u64);
    let mut sessions = HashMap::new();
    for token in order {
        let Some(p) = pending.remove(&token) else {
            continue;
        };
        if now_wall.saturating_sub(p.last_wall) > opts.session_ttl.as_millis() as u64 {
            continue;
        }
        let Ok(snapshot) = load_snapshot(p.snapshot.to_string().as_bytes()) else {
            log::warn!("dropping journaled session {token}: snapshot no longer loads");
            continue;
        };
        let Ok(mut session) = Session::new(
            Arc::new(snapshot),
            p.seed,
            opts.params,
            opts.stranger_pool.clone(),
        ) else {
            continue;
        };
        // Session time restarts at zero and resumes where the last command
        // left off; downtime does not count against the active round.
        let elapsed = Duration::from_millis(p.commands.last().map_or(0, |e| e.at_ms));
        for entry in &p.commands {
            // Outcomes were already delivered to the client; only the state matters.
            let _ = session.apply(&entry.command, Duration::from_millis(entry.at_ms));
        }
        sessions.insert(
            token,
            Arc::new(Mutex::new(Entry {
                session,
                created_at: Duration::ZERO,
                base: elapsed,
                anchor: now,
                last_access: now,
                last_wall_ms: p.last_wall,
                transcript: p.commands,
            })),
        );
    }
    Ok(sessions)
}

fn rewrite_journal(
    path: &std::path::Path,
    sessions: &HashMap<Token, Arc<Mutex<Entry>>>,
) -> io::Result<File> {
    let tmp = path.with_extension("compact");
    {
        let mut out = io::BufWriter::new(File::create(&tmp)?);
        for (token, entry) in sessions {
            let entry = entry.lock().unwrap();
            let create = JournalRecord::Create {
                token: token.clone(),
                seed: entry.session.seed(),
                wall_ms: entry.last_wall_ms,
                snapshot: serde_json::from_str(&snapshot_to_json(entry.session.snapshot()))
                    .expect("snapshot json is valid"),
            };
            writeln!(out, "{}", serde_json::to_string(&create)?)?;
            for e in &entry.transcript {
                let rec = JournalRecord::Command {
                    token: token.clone(),
                    wall_ms: entry.last_wall_ms,
                    entry: e.clone(),
                };
                writeln!(out, "{}", serde_json::to_string(&rec)?)?;
            }
        }
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    OpenOptions::new().append(true).open(path)
}
