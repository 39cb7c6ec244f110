//! The `privcheck` command line.
//!
//! [`run`] takes its arguments and streams explicitly so tests can drive it
//! without spawning a process. Exit codes: 0 success, 1 domain failure,
//! 2 input error.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::clock::{MockClock, MonotonicClock};
use crate::config::Config;
use crate::feedback::GameReport;
use crate::graph::{
    demo_snapshot, load_snapshot, snapshot_to_json, validate_snapshot, ProfileSnapshot,
};
use crate::session::{
    BattleChoiceView, BriefingFor, Response, ServiceOptions, Session, SessionError, SessionService,
    Step, Transcript,
};
use crate::sim::{simulate, BattlePolicy, PlayerPolicy};
use crate::synth::{gen_snapshot, GenParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "privcheck",
    version,
    about = "Privacy-awareness game over profile snapshots"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for generation, simulation and new sessions.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct SnapshotSource {
    /// Snapshot JSON file.
    #[arg(required_unless_present = "demo")]
    pub snapshot: Option<PathBuf>,
    /// Use the bundled demo profile instead of a file.
    #[arg(long, conflicts_with = "snapshot")]
    pub demo: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BattlePolicyArg {
    TrueOrder,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Check a snapshot against the minimum profile requirements.
    Validate(SnapshotSource),
    /// Write a synthetic snapshot.
    GenSnapshot {
        #[arg(long, default_value_t = 12)]
        contacts: usize,
        #[arg(long, default_value_t = 9)]
        items: usize,
        #[arg(long, default_value_t = 2)]
        lists: usize,
        #[arg(long, default_value_t = 0.2)]
        public_fraction: f64,
        #[arg(long, default_value_t = 20)]
        strangers: usize,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Play many sessions with simulated players and summarise the scores.
    Simulate {
        #[command(flatten)]
        source: SnapshotSource,
        #[arg(long, default_value_t = 100)]
        sessions: usize,
        /// Probability of misjudging each gallery entry.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Seconds between two picks.
        #[arg(long, default_value_t = 0.5)]
        reaction: f64,
        #[arg(long, value_enum, default_value = "true-order")]
        battle_policy: BattlePolicyArg,
        /// Print one CSV row per session instead of the summary.
        #[arg(long)]
        csv: bool,
    },
    /// Play a session in the terminal, or replay a recorded transcript.
    Play {
        #[command(flatten)]
        source: SnapshotSource,
        /// Replay this transcript and print the report.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Write the transcript of an interactive game here.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Run the HTTP JSON API.
    Serve {
        /// Overrides the configured listen address.
        #[arg(long)]
        listen: Option<std::net::SocketAddr>,
    },
}

/// Why a command stopped, mapped onto an exit code.
enum Failure {
    Input(String),
    Domain(String),
}

type CmdResult = Result<i32, Failure>;

pub struct Io<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

pub fn run<I, T>(args: I, io: Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(io.err, "{e}")
            } else {
                write!(io.out, "{e}")
            };
            return code;
        }
    };
    let Io { input, out, err } = io;
    match dispatch(cli, input, out) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    let json = cli.json;
    let seed = cli.seed;
    let config = Config::load(cli.config.as_deref()).map_err(|e| Failure::Input(e.to_string()))?;
    match cli.command {
        CliCommand::Validate(source) => cmd_validate(&source, json, out),
        CliCommand::GenSnapshot {
            contacts,
            items,
            lists,
            public_fraction,
            strangers,
            output,
        } => {
            let params = GenParams {
                contacts,
                items,
                lists,
                public_fraction,
                strangers,
            };
            cmd_gen_snapshot(&params, seed.unwrap_or(0), output.as_deref(), out)
        }
        CliCommand::Simulate {
            source,
            sessions,
            epsilon,
            reaction,
            battle_policy,
            csv,
        } => {
            let policy = PlayerPolicy {
                perception_error: epsilon,
                reaction_seconds_per_pick: reaction,
                battle_policy: match battle_policy {
                    BattlePolicyArg::TrueOrder => BattlePolicy::TrueOrder,
                    BattlePolicyArg::Random => BattlePolicy::Random,
                },
            };
            let opts = service_options(&config)?;
            let snapshot = read_source(&source)?;
            cmd_simulate(
                snapshot,
                policy,
                sessions,
                seed.unwrap_or(0),
                &opts,
                json,
                csv,
                out,
            )
        }
        CliCommand::Play {
            source,
            transcript,
            record,
        } => {
            let opts = service_options(&config)?;
            let snapshot = read_source(&source)?;
            match transcript {
                Some(path) => cmd_replay(snapshot, &path, &opts, json, out),
                None => cmd_interactive(snapshot, seed, &opts, record.as_deref(), input, out),
            }
        }
        CliCommand::Serve { listen } => {
            let mut config = config;
            if let Some(addr) = listen {
                config.listen = addr;
            }
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Failure::Domain(format!("cannot start runtime: {e}")))?;
            runtime
                .block_on(crate::http::serve(config))
                .map_err(|e| Failure::Domain(e.to_string()))?;
            Ok(EXIT_OK)
        }
    }
}

fn service_options(config: &Config) -> Result<ServiceOptions, Failure> {
    config
        .service_options()
        .map_err(|e| Failure::Input(e.to_string()))
}

fn read_source(source: &SnapshotSource) -> Result<ProfileSnapshot, Failure> {
    match &source.snapshot {
        None => Ok(demo_snapshot()),
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            load_snapshot(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
    }
}

fn io_err(e: std::io::Error) -> Failure {
    Failure::Domain(format!("write failed: {e}"))
}

fn cmd_validate(source: &SnapshotSource, json: bool, out: &mut dyn Write) -> CmdResult {
    let snapshot = read_source(source)?;
    let report = validate_snapshot(&snapshot);
    if json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| io_err(e.into()))?;
        writeln!(out).map_err(io_err)?;
    } else if report.ok {
        writeln!(
            out,
            "ok: {} non-public shared items, {} contacts, {} strangers",
            report.non_public_item_count,
            snapshot.contacts().len(),
            snapshot.strangers().len()
        )
        .map_err(io_err)?;
    } else {
        writeln!(out, "invalid snapshot:").map_err(io_err)?;
        for finding in &report.violations {
            writeln!(out, "  - {finding}").map_err(io_err)?;
        }
    }
    Ok(if report.ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_gen_snapshot(
    params: &GenParams,
    seed: u64,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let snapshot = gen_snapshot(params, seed).map_err(|e| Failure::Input(e.to_string()))?;
    let text = snapshot_to_json(&snapshot);
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes()).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    snapshot: ProfileSnapshot,
    policy: PlayerPolicy,
    sessions: usize,
    seed: u64,
    opts: &ServiceOptions,
    json: bool,
    csv: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let run = simulate(Arc::new(snapshot), policy, sessions, seed, opts).map_err(|e| match e {
        crate::sim::SimError::InvalidPolicy(msg) => Failure::Input(msg),
        other => Failure::Domain(other.to_string()),
    })?;
    if csv {
        writeln!(
            out,
            "session,session_seed,total,awareness_index,smiley,rounds_won"
        )
        .map_err(io_err)?;
        for (i, s) in run.sessions.iter().enumerate() {
            let won = s.report.round_results.iter().filter(|r| r.won).count();
            writeln!(
                out,
                "{i},{},{},{},{},{won}",
                s.session_seed,
                s.report.total,
                s.report.awareness_index,
                serde_json::to_value(s.report.smiley)
                    .unwrap()
                    .as_str()
                    .unwrap_or("")
            )
            .map_err(io_err)?;
        }
    } else if json {
        serde_json::to_writer_pretty(&mut *out, &run.summary).map_err(|e| io_err(e.into()))?;
        writeln!(out).map_err(io_err)?;
    } else {
        let s = &run.summary;
        writeln!(
            out,
            "{} sessions, seed {}, epsilon {}, {} s/pick",
            s.sessions, s.seed, s.policy.perception_error, s.policy.reaction_seconds_per_pick
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "score     mean {:.1}  p50 {}  p95 {}",
            s.score.mean, s.score.p50, s.score.p95
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "awareness mean {:.3}  p50 {:.3}  p95 {:.3}",
            s.awareness_index.mean, s.awareness_index.p50, s.awareness_index.p95
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "smileys   sad {}  neutral {}  happy {}",
            s.smileys.sad, s.smileys.neutral, s.smileys.happy
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "rounds    won {}  lost {}",
            s.rounds_won, s.rounds_lost
        )
        .map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_replay(
    snapshot: ProfileSnapshot,
    path: &Path,
    opts: &ServiceOptions,
    json: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let transcript: Transcript = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut session = Session::new(
        Arc::new(snapshot),
        transcript.seed,
        opts.params,
        opts.stranger_pool.clone(),
    )
    .map_err(|e| Failure::Domain(e.to_string()))?;
    let responses = transcript
        .replay(&mut session, Duration::ZERO)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let report = responses.into_iter().rev().find_map(|r| match r {
        Response::Report(report) => Some(*report),
        _ => None,
    });
    match report {
        Some(report) => {
            write_report(&report, json, out)?;
            Ok(EXIT_OK)
        }
        None => {
            writeln!(out, "transcript ended at step {}", session.step()).map_err(io_err)?;
            Ok(EXIT_FAILURE)
        }
    }
}

fn write_report(report: &GameReport, json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    if json {
        serde_json::to_writer_pretty(&mut *out, report).map_err(|e| io_err(e.into()))?;
        return writeln!(out).map_err(io_err);
    }
    for (i, r) in report.round_results.iter().enumerate() {
        writeln!(
            out,
            "round {}  {:<8} {:>6} points  {} wrong, {} missed",
            i + 1,
            r.item,
            r.points,
            r.wrong_picks.len(),
            r.missed_viewers.len()
        )
        .map_err(io_err)?;
    }
    writeln!(out, "base score      {:>6}", report.base_score).map_err(io_err)?;
    writeln!(out, "list bonus     +{:>6}", report.list_bonus).map_err(io_err)?;
    writeln!(out, "public penalty -{:>6}", report.public_penalty).map_err(io_err)?;
    writeln!(
        out,
        "total           {:>6}  ({:?})",
        report.total, report.smiley
    )
    .map_err(io_err)?;
    writeln!(out, "awareness index {:.3}", report.awareness_index).map_err(io_err)?;
    for rec in &report.recommendations {
        writeln!(out, "* {}", rec.rationale).map_err(io_err)?;
    }
    writeln!(out, "{}", report.share_message).map_err(io_err)
}

fn cmd_interactive(
    snapshot: ProfileSnapshot,
    seed: Option<u64>,
    opts: &ServiceOptions,
    record: Option<&Path>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> CmdResult {
    let service = SessionService::new(Arc::new(MonotonicClock::new()), opts.clone())
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let (token, mut step) = service
        .create_session(Arc::new(snapshot), seed)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let domain = |e: SessionError| Failure::Domain(e.to_string());
    let mut read_line = |out: &mut dyn Write, prompt: &str| -> Result<Option<String>, Failure> {
        write!(out, "{prompt}").map_err(io_err)?;
        out.flush().map_err(io_err)?;
        let mut line = String::new();
        match input.read_line(&mut line) {
            Ok(0) | Err(_) => Ok(None),
            Ok(_) => Ok(Some(line.trim().to_owned())),
        }
    };

    let finished = loop {
        match step {
            Step::Motivation => {
                writeln!(out, "Do you know who can see your shared items?").map_err(io_err)?;
            }
            Step::Briefing(next) => {
                let what = match next {
                    BriefingFor::ItemBattle => {
                        "item battle: pick the more personal item of each pair"
                    }
                    BriefingFor::Game => "find your friends: select everyone who can see the item",
                    BriefingFor::ScoreFeedback => "score and feedback",
                };
                writeln!(out, "\n-- next: {what} --").map_err(io_err)?;
            }
            Step::ItemBattle => {
                let mut pair = service.battle_pair(&token).map_err(domain)?;
                let done = loop {
                    writeln!(
                        out,
                        "battle {}: which is more personal?\n  [a] {}\n  [b] {}",
                        pair.round_no, pair.item_a.content_ref, pair.item_b.content_ref
                    )
                    .map_err(io_err)?;
                    let Some(answer) = read_line(out, "> ")? else {
                        break false;
                    };
                    let winner = match answer.as_str() {
                        "a" => pair.item_a.id.clone(),
                        "b" => pair.item_b.id.clone(),
                        _ => continue,
                    };
                    match service.battle_choice(&token, winner).map_err(domain)? {
                        BattleChoiceView::Next(next) => pair = next,
                        BattleChoiceView::Done { step: s, .. } => {
                            step = s;
                            break true;
                        }
                    }
                };
                if !done {
                    break false;
                }
                continue;
            }
            Step::Game(round_no) => {
                let view = service.round_view(&token).map_err(domain)?;
                writeln!(
                    out,
                    "\nround {round_no}: who can see {}?  score {}  hearts {}",
                    view.item.content_ref, view.score, view.hearts
                )
                .map_err(io_err)?;
                for (i, tile) in view.gallery.iter().enumerate() {
                    let mark = view
                        .marks
                        .iter()
                        .find(|m| m.person_id == tile.person_id)
                        .map_or("  ", |m| match m.frame {
                            crate::game::Frame::Green => "ok",
                            crate::game::Frame::Red => "xx",
                        });
                    writeln!(out, "  {:>2} {mark} {}", i + 1, tile.display_name).map_err(io_err)?;
                }
                let Some(answer) = read_line(out, "pick a number> ")? else {
                    break false;
                };
                let Some(tile) = answer
                    .parse::<usize>()
                    .ok()
                    .and_then(|n| n.checked_sub(1))
                    .and_then(|n| view.gallery.get(n))
                else {
                    continue;
                };
                match service.round_select(&token, tile.person_id.clone()) {
                    Ok(sel) => {
                        writeln!(
                            out,
                            "{:?}: score {}, hearts {}",
                            sel.outcome, sel.score, sel.hearts
                        )
                        .map_err(io_err)?;
                        step = sel.step;
                    }
                    Err(SessionError::AlreadySelected(_)) => {}
                    Err(e) => return Err(domain(e)),
                }
                continue;
            }
            Step::ScoreFeedback | Step::Finished => {
                let report = service.result(&token).map_err(domain)?;
                writeln!(out).map_err(io_err)?;
                write_report(&report, false, out)?;
                break true;
            }
        }
        if read_line(out, "[enter] ")?.is_none() {
            break false;
        }
        step = service.advance(&token).map_err(domain)?;
    };

    if let Some(path) = record {
        let transcript = service.transcript(&token).map_err(domain)?;
        let text = serde_json::to_string_pretty(&transcript).expect("transcript serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))?;
    }
    if finished {
        Ok(EXIT_OK)
    } else {
        writeln!(out, "\ngame abandoned").map_err(io_err)?;
        Ok(EXIT_FAILURE)
    }
}

/// Drives a full scripted session and returns its transcript; used by the
/// examples to produce reproducible fixtures.
pub fn scripted_session(
    snapshot: Arc<ProfileSnapshot>,
    seed: u64,
    seconds_per_pick: f64,
) -> Result<Transcript, SessionError> {
    let clock = Arc::new(MockClock::new());
    let service = SessionService::new(clock.clone(), ServiceOptions::default())
        .map_err(|e| SessionError::Internal(e.to_string()))?;
    let (token, _) = service.create_session(snapshot.clone(), Some(seed))?;
    service.advance(&token)?;
    service.advance(&token)?;
    let order = snapshot.item_ids();
    let rank = |id: &crate::graph::ItemId| order.iter().position(|i| i == id);
    let mut pair = service.battle_pair(&token)?;
    while let BattleChoiceView::Next(next) = {
        let winner = if rank(&pair.item_a.id) <= rank(&pair.item_b.id) {
            pair.item_a.id.clone()
        } else {
            pair.item_b.id.clone()
        };
        service.battle_choice(&token, winner)?
    } {
        pair = next;
    }
    let mut step = service.advance(&token)?;
    let pick = Duration::from_secs_f64(seconds_per_pick);
    while let Step::Game(_) = step {
        let viewers: Vec<_> = service.inspect(&token, |s| {
            s.active_round()
                .map(|r| {
                    r.gallery()
                        .iter()
                        .filter(|g| g.is_viewer)
                        .map(|g| g.person.clone())
                        .collect()
                })
                .unwrap_or_default()
        })?;
        for person in viewers {
            clock.advance(pick);
            step = service.round_select(&token, person)?.step;
        }
    }
    service.advance(&token)?;
    service.result(&token)?;
    service.transcript(&token)
}
