mod common;

use std::sync::Arc;
use std::time::Duration;

use proptest::prelude::*;

use privcheck::game::{ScoringParams, SelectionOutcome};
use privcheck::graph::{default_stranger_pool, PersonId};
use privcheck::session::{
    BattleChoiceView, BriefingFor, Command, Response, Session, SessionError, Step,
};

use common::{demo, mock_service, secs};

fn new_session(seed: u64) -> Session {
    Session::new(
        demo(),
        seed,
        ScoringParams::default(),
        default_stranger_pool().into(),
    )
    .unwrap()
}

fn successors(step: Step) -> Vec<Step> {
    use BriefingFor::*;
    match step {
        Step::Motivation => vec![Step::Briefing(ItemBattle)],
        Step::Briefing(ItemBattle) => vec![Step::ItemBattle],
        Step::ItemBattle => vec![Step::Briefing(Game)],
        Step::Briefing(Game) => vec![Step::Game(1)],
        Step::Game(5) => vec![Step::Briefing(ScoreFeedback)],
        Step::Game(i) => vec![Step::Game(i + 1)],
        Step::Briefing(ScoreFeedback) => vec![Step::ScoreFeedback],
        Step::ScoreFeedback => vec![Step::Finished],
        Step::Finished => vec![],
    }
}

fn check_invariants(s: &Session) -> Result<(), TestCaseError> {
    let done = s.rounds_done().len();
    match s.step() {
        Step::Game(i) => {
            prop_assert_eq!(done, i as usize - 1);
            prop_assert!(s.active_round().is_some());
        }
        Step::Briefing(BriefingFor::ScoreFeedback) | Step::ScoreFeedback | Step::Finished => {
            prop_assert_eq!(done, 5);
            prop_assert!(s.active_round().is_none());
        }
        _ => {
            prop_assert_eq!(done, 0);
            prop_assert!(s.active_round().is_none());
        }
    }
    let past_battle = !matches!(
        s.step(),
        Step::Motivation | Step::Briefing(BriefingFor::ItemBattle) | Step::ItemBattle
    );
    prop_assert_eq!(s.game_items().len(), if past_battle { 5 } else { 0 });
    Ok(())
}

fn pick_command(s: &Session, kind: u8, idx: usize) -> Command {
    let items = s.snapshot().item_ids();
    match kind % 7 {
        0 => Command::State,
        1 => Command::Advance,
        2 => Command::BattlePair,
        3 => {
            let winner = match s.battle_plan().and_then(|p| p.current_pair()) {
                Some(pair) if idx.is_multiple_of(3) => pair.a.clone(),
                Some(pair) if idx % 3 == 1 => pair.b.clone(),
                _ => items[idx % items.len()].clone(),
            };
            Command::BattleChoice { winner }
        }
        4 => Command::RoundView,
        5 => {
            let gallery: Vec<PersonId> = s
                .active_round()
                .map(|r| r.gallery().iter().map(|g| g.person.clone()).collect())
                .unwrap_or_default();
            let person = if gallery.is_empty() || idx.is_multiple_of(11) {
                PersonId::from("nobody")
            } else {
                gallery[idx % gallery.len()].clone()
            };
            Command::RoundSelect { person }
        }
        _ => Command::Result,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_commands_keep_the_session_consistent(
        seed in any::<u64>(),
        script in proptest::collection::vec((any::<u8>(), any::<usize>(), 0u64..15_000), 1..250),
    ) {
        let mut session = new_session(seed);
        let mut now = Duration::ZERO;
        for (kind, idx, dt_ms) in script {
            now += Duration::from_millis(dt_ms);
            let cmd = pick_command(&session, kind, idx);
            let before_step = session.step();

            let mut settled = session.clone();
            settled.settle(now);
            let settled_debug = format!("{settled:?}");

            match session.apply(&cmd, now) {
                Ok(_) => {}
                Err(e) => {
                    prop_assert_ne!(e.code(), "internal");
                    prop_assert_eq!(format!("{session:?}"), settled_debug, "failed {} changed state", cmd);
                }
            }
            let after = session.step();
            prop_assert!(
                after == before_step
                    || successors(before_step).contains(&after)
                    || successors(settled.step()).contains(&after)
                    || after == settled.step(),
                "{} -> {} via {}", before_step, after, cmd
            );
            check_invariants(&session)?;
        }
    }
}

#[test]
fn happy_path_walk() {
    let (clock, service) = mock_service();
    let (token, step) = service.create_session(demo(), Some(9)).unwrap();
    assert_eq!(step, Step::Motivation);
    assert_eq!(
        service.advance(&token).unwrap(),
        Step::Briefing(BriefingFor::ItemBattle)
    );
    assert!(matches!(
        service.battle_pair(&token),
        Err(SessionError::WrongStep { .. })
    ));
    assert_eq!(service.advance(&token).unwrap(), Step::ItemBattle);

    let first = service.battle_pair(&token).unwrap();
    assert_eq!(
        service.battle_pair(&token).unwrap(),
        first,
        "pair is stable until a choice"
    );
    assert_eq!(first.round_no, 1);
    let stale = first.item_a.id.clone();
    let mut pair = first;
    let mut choices = 0;
    let done = loop {
        choices += 1;
        match service
            .battle_choice(&token, pair.item_b.id.clone())
            .unwrap()
        {
            BattleChoiceView::Next(next) => pair = next,
            BattleChoiceView::Done { step, game_items } => break (step, game_items),
        }
    };
    assert_eq!(choices, 10);
    assert_eq!(done.0, Step::Briefing(BriefingFor::Game));
    assert_eq!(done.1.len(), 5);
    assert!(matches!(
        service.battle_choice(&token, stale),
        Err(SessionError::WrongStep { .. })
    ));
    assert!(matches!(
        service.result(&token),
        Err(SessionError::WrongStep { .. })
    ));

    assert_eq!(service.advance(&token).unwrap(), Step::Game(1));
    for round_no in 1..=5u8 {
        let view = service.round_view(&token).unwrap();
        assert_eq!(view.round_no, round_no);
        assert_eq!(view.score, 10_000, "fresh round starts at full score");
        assert_eq!(view.gallery.len(), 20);
        assert!(matches!(
            service.advance(&token),
            Err(SessionError::IllegalTransition(Step::Game(_)))
        ));
        let viewers: Vec<PersonId> = service
            .inspect(&token, |s| {
                s.active_round()
                    .unwrap()
                    .gallery()
                    .iter()
                    .filter(|g| g.is_viewer)
                    .map(|g| g.person.clone())
                    .collect()
            })
            .unwrap();
        clock.advance(secs(1.0));
        let first = service.round_select(&token, viewers[0].clone()).unwrap();
        if viewers.len() > 1 {
            assert_eq!(first.outcome, SelectionOutcome::Correct);
            assert!(matches!(
                service.round_select(&token, viewers[0].clone()),
                Err(SessionError::AlreadySelected(_))
            ));
        }
        let mut last = first;
        for v in &viewers[1..] {
            last = service.round_select(&token, v.clone()).unwrap();
        }
        assert_eq!(last.outcome, SelectionOutcome::WonRound);
        let expected = if round_no < 5 {
            Step::Game(round_no + 1)
        } else {
            Step::Briefing(BriefingFor::ScoreFeedback)
        };
        assert_eq!(last.step, expected);
    }
    assert_eq!(service.advance(&token).unwrap(), Step::ScoreFeedback);
    let report = service.result(&token).unwrap();
    assert_eq!(report.round_results.len(), 5);
    // One pick after one second in every round: 9800 per round.
    assert!(report.round_results.iter().all(|r| r.points == 9_800));
    assert_eq!(report.base_score, 49_000);
    assert_eq!(
        report.total,
        report.base_score + report.list_bonus - report.public_penalty
    );
    assert_eq!(service.state(&token).unwrap().step, Step::Finished);
    assert_eq!(
        service.result(&token).unwrap(),
        report,
        "result is stable once finished"
    );
}

#[test]
fn five_wrong_picks_lose_the_round_and_flow_moves_on() {
    let mut s = new_session(4);
    let t = Duration::ZERO;
    for _ in 0..2 {
        s.apply(&Command::Advance, t).unwrap();
    }
    while let Some(pair) = s.battle_plan().and_then(|p| p.current_pair()).cloned() {
        s.apply(&Command::BattleChoice { winner: pair.a }, t)
            .unwrap();
    }
    s.apply(&Command::Advance, t).unwrap();
    let wrong: Vec<PersonId> = s
        .active_round()
        .unwrap()
        .gallery()
        .iter()
        .filter(|g| !g.is_viewer)
        .map(|g| g.person.clone())
        .take(5)
        .collect();
    let mut last = None;
    for p in wrong {
        last = Some(s.apply(&Command::RoundSelect { person: p }, t).unwrap());
    }
    let Some(Response::Selection(sel)) = last else {
        panic!("selection expected")
    };
    assert_eq!(sel.outcome, SelectionOutcome::LostRound);
    assert_eq!(sel.step, Step::Game(2));
    assert_eq!(s.rounds_done()[0].points, 0);
    assert!(!s.rounds_done()[0].won);
}

#[test]
fn timed_out_round_settles_on_next_command() {
    let mut s = new_session(8);
    for _ in 0..2 {
        s.apply(&Command::Advance, Duration::ZERO).unwrap();
    }
    while let Some(pair) = s.battle_plan().and_then(|p| p.current_pair()).cloned() {
        s.apply(&Command::BattleChoice { winner: pair.b }, Duration::ZERO)
            .unwrap();
    }
    s.apply(&Command::Advance, Duration::ZERO).unwrap();
    let person = s.active_round().unwrap().gallery()[0].person.clone();

    let late = s
        .apply(&Command::RoundSelect { person }, secs(50.0))
        .unwrap();
    let Response::Selection(sel) = late else {
        panic!()
    };
    assert_eq!(sel.outcome, SelectionOutcome::LostRound);
    assert_eq!(sel.frame, None);
    assert_eq!(sel.step, Step::Game(2));
    assert!(s.rounds_done()[0].selected.is_empty());
    assert_eq!(s.active_round().unwrap().started_at(), secs(50.0));
}

#[test]
fn same_seed_same_battle_schedule() {
    let (_, service) = mock_service();
    let mut schedules = Vec::new();
    for _ in 0..2 {
        let (token, _) = service.create_session(demo(), Some(77)).unwrap();
        service.advance(&token).unwrap();
        service.advance(&token).unwrap();
        let mut seen = Vec::new();
        let mut pair = service.battle_pair(&token).unwrap();
        loop {
            seen.push((pair.item_a.id.clone(), pair.item_b.id.clone()));
            match service
                .battle_choice(&token, pair.item_a.id.clone())
                .unwrap()
            {
                BattleChoiceView::Next(next) => pair = next,
                BattleChoiceView::Done { .. } => break,
            }
        }
        schedules.push(seen);
    }
    assert_eq!(schedules[0], schedules[1]);
}

#[test]
fn invalid_and_unplayable_snapshots_are_refused() {
    use privcheck::graph::{load_snapshot, snapshot_to_json};
    let mut doc: serde_json::Value = serde_json::from_str(&snapshot_to_json(&demo())).unwrap();
    let items = doc["items"].as_array_mut().unwrap();
    for item in items.iter_mut().take(3) {
        item["audience"] = serde_json::json!({"mode": "public"});
    }
    let six = Arc::new(load_snapshot(doc.to_string().as_bytes()).unwrap());
    let (_, service) = mock_service();
    match service.create_session(six, None) {
        Err(SessionError::InvalidSnapshot(report)) => {
            assert_eq!(report.non_public_item_count, 6);
        }
        other => panic!("expected InvalidSnapshot, got {other:?}"),
    }

    let mut doc: serde_json::Value = serde_json::from_str(&snapshot_to_json(&demo())).unwrap();
    for item in doc["items"].as_array_mut().unwrap() {
        item["audience"] = serde_json::json!({"mode": "only_me"});
    }
    let hidden = Arc::new(load_snapshot(doc.to_string().as_bytes()).unwrap());
    assert!(matches!(
        service.create_session(hidden, None),
        Err(SessionError::UnplayableSnapshot {
            eligible: 0,
            needed: 5
        })
    ));
}

#[test]
fn unknown_and_expired_tokens() {
    use privcheck::session::{ServiceOptions, SessionService, Token};
    let clock = Arc::new(privcheck::clock::MockClock::new());
    let service = SessionService::new(
        clock.clone(),
        ServiceOptions {
            session_ttl: Duration::from_secs(60),
            max_sessions: 2,
            ..ServiceOptions::default()
        },
    )
    .unwrap();
    assert!(matches!(
        service.state(&Token::from("00")),
        Err(SessionError::UnknownSession)
    ));
    let (a, _) = service.create_session(demo(), None).unwrap();
    let (_b, _) = service.create_session(demo(), None).unwrap();
    assert!(matches!(
        service.create_session(demo(), None),
        Err(SessionError::StoreFull)
    ));
    assert_ne!(a.as_str().len(), 0);
    assert_eq!(a.as_str().len(), 32);

    clock.advance(Duration::from_secs(61));
    assert!(matches!(
        service.state(&a),
        Err(SessionError::UnknownSession)
    ));
    assert_eq!(service.purge_expired(), 1);
    assert!(service.create_session(demo(), None).is_ok());
}

#[test]
fn transcript_replays_to_the_same_report() {
    let t = privcheck::cli::scripted_session(demo(), 5, 0.7).unwrap();
    let mut reports = Vec::new();
    for _ in 0..3 {
        let mut s = new_session(t.seed);
        let out = t.replay(&mut s, Duration::ZERO).unwrap();
        let Some(Response::Report(r)) = out.last().cloned() else {
            panic!()
        };
        reports.push(serde_json::to_string(&r).unwrap());
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}
