mod common;

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use privcheck::clock::MockClock;
use privcheck::feedback::GameReport;
use privcheck::graph::PersonId;
use privcheck::session::{BattleChoiceView, ServiceOptions, SessionService, Step, Token};

fn service_at(journal: Option<&Path>, start: Duration) -> (Arc<MockClock>, SessionService) {
    let clock = Arc::new(MockClock::new());
    clock.set(start);
    let service = SessionService::new(
        clock.clone(),
        ServiceOptions {
            journal_path: journal.map(Path::to_owned),
            ..ServiceOptions::default()
        },
    )
    .unwrap();
    (clock, service)
}

fn viewers(service: &SessionService, token: &Token) -> Vec<PersonId> {
    service
        .inspect(token, |s| {
            s.active_round()
                .map(|r| {
                    r.gallery()
                        .iter()
                        .filter(|g| g.is_viewer && !r.selected().contains(&g.person))
                        .map(|g| g.person.clone())
                        .collect()
                })
                .unwrap_or_default()
        })
        .unwrap()
}

/// Plays the demo with one pick every 1.3 s. When `restart_after` picks
/// have been made, the service is torn down and rebuilt from the journal on
/// a fresh clock starting at `restart_clock`.
fn play(
    journal: Option<&Path>,
    restart_after: Option<usize>,
    restart_clock: Duration,
) -> GameReport {
    let (mut clock, mut service) = service_at(journal, Duration::from_secs(500));
    let (token, _) = service.create_session(common::demo(), Some(21)).unwrap();
    service.advance(&token).unwrap();
    service.advance(&token).unwrap();
    let mut pair = service.battle_pair(&token).unwrap();
    while let BattleChoiceView::Next(next) = service
        .battle_choice(&token, pair.item_b.id.clone())
        .unwrap()
    {
        pair = next;
    }
    let mut step = service.advance(&token).unwrap();
    let mut picks = 0;
    while let Step::Game(_) = step {
        let person = viewers(&service, &token)[0].clone();
        clock.advance(Duration::from_millis(1300));
        step = service.round_select(&token, person).unwrap().step;
        picks += 1;
        if Some(picks) == restart_after {
            drop(service);
            (clock, service) = service_at(journal, restart_clock);
            assert_eq!(service.len(), 1);
            // The rebuilt session answers with the same state.
            assert_eq!(service.state(&token).unwrap().step, step);
        }
    }
    service.advance(&token).unwrap();
    service.result(&token).unwrap()
}

#[test]
fn resumed_session_matches_uninterrupted_one() {
    let reference = play(None, None, Duration::ZERO);

    for (restart_after, restart_clock) in [(3, Duration::ZERO), (7, Duration::from_secs(10_000))] {
        let dir = tempfile::tempdir().unwrap();
        let journal = dir.path().join("sessions.jsonl");
        let resumed = play(Some(&journal), Some(restart_after), restart_clock);
        assert_eq!(resumed, reference, "restart after {restart_after} picks");
    }
}

#[test]
fn journal_is_compacted_and_drops_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let journal = dir.path().join("sessions.jsonl");
    let ttl = Duration::from_secs(60);
    let clock = Arc::new(MockClock::new());
    let opts = ServiceOptions {
        journal_path: Some(journal.clone()),
        session_ttl: ttl,
        ..ServiceOptions::default()
    };
    let service = SessionService::new(clock.clone(), opts.clone()).unwrap();
    let (keep, _) = service.create_session(common::demo(), Some(1)).unwrap();
    service.create_session(common::demo(), Some(2)).unwrap();
    for _ in 0..3 {
        service.state(&keep).unwrap();
    }
    clock.advance(Duration::from_secs(61));
    // Touching an expired session drops it; the purge takes the other one.
    service.advance(&keep).unwrap_err();
    assert_eq!(service.purge_expired(), 1);
    drop(service);

    let lines_before = std::fs::read_to_string(&journal).unwrap().lines().count();
    let restored = SessionService::new(Arc::new(MockClock::new()), opts).unwrap();
    assert!(restored.is_empty());
    let lines_after = std::fs::read_to_string(&journal).unwrap().lines().count();
    assert!(lines_after < lines_before);
    assert_eq!(lines_after, 0);
}

#[test]
fn restored_transcript_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let journal = dir.path().join("j.jsonl");
    let (clock, service) = service_at(Some(&journal), Duration::ZERO);
    let (token, _) = service.create_session(common::demo(), Some(5)).unwrap();
    service.advance(&token).unwrap();
    clock.advance(Duration::from_millis(250));
    service.battle_pair(&token).unwrap_err();
    let before = service.transcript(&token).unwrap();
    drop(service);

    let (_, service) = service_at(Some(&journal), Duration::ZERO);
    assert_eq!(service.transcript(&token).unwrap(), before);
    assert_eq!(
        before.commands[1].expect_error.as_deref(),
        Some("wrong_step")
    );
    assert_eq!(before.commands[1].at_ms, 250);
}
