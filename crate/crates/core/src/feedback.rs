//! Score & Feedback: overall score, smiley, awareness index and recommendations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ItemId, ListId, PersonId, ProfileSnapshot};

pub const POINTS_PER_LIST: u32 = 1000;
pub const MAX_BONUS_LISTS: usize = 5;
pub const PUBLIC_ITEM_PENALTY: u32 = 200;
/// Totals below this get the sad smiley.
pub const NEUTRAL_FROM: u32 = 15_000;
/// Totals above this get the happy smiley.
pub const HAPPY_ABOVE: u32 = 32_500;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackError {
    #[error("expected {expected} round results, got {got}")]
    WrongRoundCount { expected: usize, got: usize },
    #[error("no rounds to evaluate")]
    NoRounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundResult {
    pub item: ItemId,
    pub points: u32,
    pub won: bool,
    /// Selected tiles that could not see the item, in click order.
    pub wrong_picks: Vec<PersonId>,
    /// Displayed viewers the player never selected.
    pub missed_viewers: Vec<PersonId>,
    pub selected: BTreeSet<PersonId>,
    pub displayed_viewers: BTreeSet<PersonId>,
}

impl RoundResult {
    /// Overlap between perceived (selected) and actual (displayed viewer) sets.
    pub fn jaccard(&self) -> f64 {
        let union = self.selected.union(&self.displayed_viewers).count();
        if union == 0 {
            return 1.0;
        }
        let inter = self.selected.intersection(&self.displayed_viewers).count();
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smiley {
    Sad,
    Neutral,
    Happy,
}

pub fn smiley(total: u32) -> Smiley {
    if total < NEUTRAL_FROM {
        Smiley::Sad
    } else if total <= HAPPY_ABOVE {
        Smiley::Neutral
    } else {
        Smiley::Happy
    }
}

/// Lists that are defined (non-empty) and used by at least one item audience.
pub fn used_friend_lists(s: &ProfileSnapshot) -> Vec<ListId> {
    let referenced: BTreeSet<&ListId> = s
        .items()
        .iter()
        .flat_map(|i| i.audience.referenced_lists())
        .collect();
    s.friend_lists()
        .iter()
        .filter(|l| l.is_defined() && referenced.contains(&l.id))
        .map(|l| l.id.clone())
        .collect()
}

pub fn friend_list_bonus(s: &ProfileSnapshot) -> u32 {
    POINTS_PER_LIST * used_friend_lists(s).len().min(MAX_BONUS_LISTS) as u32
}

pub fn public_item_penalty(s: &ProfileSnapshot) -> u32 {
    PUBLIC_ITEM_PENALTY * s.items().iter().filter(|i| i.audience.is_public()).count() as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub base: u32,
    pub list_bonus: u32,
    pub public_penalty: u32,
    pub total: u32,
}

pub fn overall_score(
    rounds: &[RoundResult],
    s: &ProfileSnapshot,
    expected_rounds: usize,
) -> Result<ScoreBreakdown, FeedbackError> {
    if rounds.len() != expected_rounds {
        return Err(FeedbackError::WrongRoundCount {
            expected: expected_rounds,
            got: rounds.len(),
        });
    }
    let base: u32 = rounds.iter().map(|r| r.points).sum();
    let list_bonus = friend_list_bonus(s);
    let public_penalty = public_item_penalty(s);
    Ok(ScoreBreakdown {
        base,
        list_bonus,
        public_penalty,
        total: (base + list_bonus).saturating_sub(public_penalty),
    })
}

/// Mean per-round Jaccard overlap between selections and displayed viewers.
pub fn awareness_index(rounds: &[RoundResult]) -> Result<f64, FeedbackError> {
    if rounds.is_empty() {
        return Err(FeedbackError::NoRounds);
    }
    Ok(rounds.iter().map(RoundResult::jaccard).sum::<f64>() / rounds.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommendationCode {
    ReviewPublicItems,
    CreateFriendLists,
    UseTargetedSharing,
    ReconsiderFriendshipSemantics,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub items: Vec<ItemId>,
    pub lists: Vec<ListId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub code: RecommendationCode,
    pub rationale: String,
    pub evidence: Evidence,
}

const LOW_AWARENESS: f64 = 0.5;
const MIN_DEFINED_LISTS: usize = 2;

/// Rule-based recommendations, most severe first.
pub fn recommendations(s: &ProfileSnapshot, rounds: &[RoundResult]) -> Vec<Recommendation> {
    let mut out = Vec::new();

    let public: Vec<ItemId> = s
        .items()
        .iter()
        .filter(|i| i.audience.is_public())
        .map(|i| i.id.clone())
        .collect();
    if !public.is_empty() {
        out.push(Recommendation {
            code: RecommendationCode::ReviewPublicItems,
            rationale: format!(
                "{} of your items are visible to anyone, including people you have never met. \
                 Restrict them to the people you actually want to reach.",
                public.len()
            ),
            evidence: Evidence {
                items: public,
                lists: vec![],
            },
        });
    }

    let defined: Vec<ListId> = s
        .friend_lists()
        .iter()
        .filter(|l| l.is_defined())
        .map(|l| l.id.clone())
        .collect();
    if defined.len() < MIN_DEFINED_LISTS {
        out.push(Recommendation {
            code: RecommendationCode::CreateFriendLists,
            rationale: "Group your contacts into friend lists such as family, colleagues or \
                        close friends so you can choose who sees each item."
                .to_owned(),
            evidence: Evidence {
                items: vec![],
                lists: defined,
            },
        });
    }

    let broad: Vec<ItemId> = s
        .items()
        .iter()
        .filter(|i| i.audience.is_broad())
        .map(|i| i.id.clone())
        .collect();
    if broad.len() * 2 > s.items().len() {
        out.push(Recommendation {
            code: RecommendationCode::UseTargetedSharing,
            rationale: format!(
                "{} of your {} items go to all contacts or the public. Share personal items \
                 with a friend list or a custom audience instead.",
                broad.len(),
                s.items().len()
            ),
            evidence: Evidence {
                items: broad,
                lists: vec![],
            },
        });
    }

    if let Ok(index) = awareness_index(rounds) {
        if index < LOW_AWARENESS {
            out.push(Recommendation {
                code: RecommendationCode::ReconsiderFriendshipSemantics,
                rationale: "Who you picked and who can really see your items differ a lot. \
                            A friend on a social network is not always a friend in real life; \
                            check who is in your contact list and what they can see."
                    .to_owned(),
                evidence: Evidence {
                    items: rounds
                        .iter()
                        .filter(|r| r.jaccard() < LOW_AWARENESS)
                        .map(|r| r.item.clone())
                        .collect(),
                    lists: vec![],
                },
            });
        }
    }

    out.sort_by_key(|r| r.code);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub round_results: Vec<RoundResult>,
    pub base_score: u32,
    pub list_bonus: u32,
    pub public_penalty: u32,
    pub total: u32,
    pub smiley: Smiley,
    pub awareness_index: f64,
    pub recommendations: Vec<Recommendation>,
    pub share_message: String,
}

pub fn build_report(
    s: &ProfileSnapshot,
    rounds: Vec<RoundResult>,
    expected_rounds: usize,
) -> Result<GameReport, FeedbackError> {
    let score = overall_score(&rounds, s, expected_rounds)?;
    let awareness_index = awareness_index(&rounds)?;
    let recommendations = recommendations(s, &rounds);
    Ok(GameReport {
        base_score: score.base,
        list_bonus: score.list_bonus,
        public_penalty: score.public_penalty,
        total: score.total,
        smiley: smiley(score.total),
        awareness_index,
        recommendations,
        share_message: share_message(score.total),
        round_results: rounds,
    })
}

pub fn share_message(total: u32) -> String {
    format!("I scored {total} points on PrivCheck. Can you beat me?")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::{item, snapshot_with};
    use crate::graph::{Audience, AudienceTarget};

    fn result(points: u32, selected: &[&str], viewers: &[&str]) -> RoundResult {
        let selected: BTreeSet<PersonId> = selected.iter().map(|s| PersonId::from(*s)).collect();
        let displayed_viewers: BTreeSet<PersonId> =
            viewers.iter().map(|s| PersonId::from(*s)).collect();
        RoundResult {
            item: "i0".into(),
            points,
            won: points > 0,
            wrong_picks: selected.difference(&displayed_viewers).cloned().collect(),
            missed_viewers: displayed_viewers.difference(&selected).cloned().collect(),
            selected,
            displayed_viewers,
        }
    }

    fn lists_snapshot(defined: usize, used: usize, public: usize) -> ProfileSnapshot {
        let names: Vec<String> = (0..defined).map(|i| format!("L{i}")).collect();
        let lists: Vec<(&str, &[&str])> = names.iter().map(|n| (n.as_str(), &["p1"][..])).collect();
        let mut items: Vec<_> = (0..used)
            .map(|i| {
                item(
                    &format!("l{i}"),
                    Audience::Lists([names[i].as_str().into()].into()),
                )
            })
            .collect();
        items.extend((0..7).map(|i| item(&format!("c{i}"), Audience::Contacts)));
        items.extend((0..public).map(|i| item(&format!("pub{i}"), Audience::Public)));
        snapshot_with(4, &lists, items)
    }

    #[test]
    fn smiley_boundaries() {
        assert_eq!(smiley(0), Smiley::Sad);
        assert_eq!(smiley(14_999), Smiley::Sad);
        assert_eq!(smiley(15_000), Smiley::Neutral);
        assert_eq!(smiley(32_500), Smiley::Neutral);
        assert_eq!(smiley(32_501), Smiley::Happy);
    }

    #[test]
    fn list_bonus_counts_defined_and_used_lists() {
        assert_eq!(friend_list_bonus(&lists_snapshot(0, 0, 0)), 0);
        assert_eq!(friend_list_bonus(&lists_snapshot(3, 2, 0)), 2000);
        assert_eq!(friend_list_bonus(&lists_snapshot(7, 7, 0)), 5000);
    }

    #[test]
    fn empty_list_earns_nothing_even_when_used() {
        let s = snapshot_with(
            3,
            &[("empty", &[]), ("full", &["p1"])],
            vec![item(
                "i1",
                Audience::Custom {
                    allow: [
                        AudienceTarget::List("empty".into()),
                        AudienceTarget::List("full".into()),
                    ]
                    .into(),
                    deny: Default::default(),
                },
            )],
        );
        assert_eq!(friend_list_bonus(&s), 1000);
    }

    #[test]
    fn public_penalty_is_linear() {
        assert_eq!(public_item_penalty(&lists_snapshot(0, 0, 0)), 0);
        assert_eq!(public_item_penalty(&lists_snapshot(0, 0, 3)), 600);
        assert_eq!(public_item_penalty(&lists_snapshot(0, 0, 100)), 20_000);
    }

    #[test]
    fn overall_score_examples() {
        let s = lists_snapshot(5, 5, 0);
        let perfect: Vec<_> = (0..5).map(|_| result(10_000, &["a"], &["a"])).collect();
        let b = overall_score(&perfect, &s, 5).unwrap();
        assert_eq!(b.total, 55_000);

        let lost: Vec<_> = (0..5).map(|_| result(0, &[], &["a"])).collect();
        let b = overall_score(&lost, &lists_snapshot(0, 0, 2), 5).unwrap();
        assert_eq!(
            (b.base, b.list_bonus, b.public_penalty, b.total),
            (0, 0, 400, 0)
        );

        let mixed: Vec<_> = [9000, 6000, 0, 8200, 10_000]
            .iter()
            .map(|&p| result(p, &["a"], &["a"]))
            .collect();
        let b = overall_score(&mixed, &lists_snapshot(2, 2, 3), 5).unwrap();
        assert_eq!(
            (b.base, b.list_bonus, b.public_penalty),
            (33_200, 2000, 600)
        );
        assert_eq!(b.total, 34_600);
        assert_eq!(b.base + b.list_bonus - b.public_penalty, b.total);

        assert_eq!(
            overall_score(&mixed[..4], &s, 5),
            Err(FeedbackError::WrongRoundCount {
                expected: 5,
                got: 4
            })
        );
    }

    #[test]
    fn awareness_examples() {
        let exact: Vec<_> = (0..5)
            .map(|_| result(1, &["a", "b"], &["a", "b"]))
            .collect();
        assert_eq!(awareness_index(&exact), Ok(1.0));
        assert_eq!(result(0, &["a", "b", "x"], &["a", "b", "c"]).jaccard(), 0.5);
        assert_eq!(result(0, &[], &["a", "b", "c", "d"]).jaccard(), 0.0);
        assert_eq!(result(0, &[], &[]).jaccard(), 1.0);
        assert_eq!(awareness_index(&[]), Err(FeedbackError::NoRounds));
    }

    #[test]
    fn recommendations_for_listless_public_profile() {
        let s = lists_snapshot(0, 0, 3);
        let recs = recommendations(&s, &[result(1, &["a"], &["a"])]);
        let codes: Vec<_> = recs.iter().map(|r| r.code).collect();
        assert_eq!(
            codes,
            vec![
                RecommendationCode::ReviewPublicItems,
                RecommendationCode::CreateFriendLists,
                RecommendationCode::UseTargetedSharing
            ]
        );
        assert_eq!(recs[0].evidence.items.len(), 3);
        for id in recs.iter().flat_map(|r| &r.evidence.items) {
            assert!(s.item(id).is_some());
        }
    }

    #[test]
    fn careful_profile_gets_no_recommendations() {
        let names = ["a", "b", "c", "d", "e"];
        let lists: Vec<(&str, &[&str])> = names.iter().map(|n| (*n, &["p1"][..])).collect();
        let items: Vec<_> = names
            .iter()
            .map(|n| item(&format!("i{n}"), Audience::Lists([(*n).into()].into())))
            .chain((0..2).map(|i| item(&format!("c{i}"), Audience::Contacts)))
            .collect();
        let s = snapshot_with(3, &lists, items);
        // Index 0.95: four perfect rounds and one at 0.75.
        let mut rounds: Vec<_> = (0..4).map(|_| result(1, &["a"], &["a"])).collect();
        rounds.push(result(1, &["a", "b", "c"], &["a", "b", "c", "d"]));
        assert!((awareness_index(&rounds).unwrap() - 0.95).abs() < 1e-12);
        assert!(recommendations(&s, &rounds).is_empty());
    }

    #[test]
    fn low_awareness_triggers_friendship_advice() {
        let s = lists_snapshot(5, 5, 0);
        let rounds: Vec<_> = [
            result(0, &["x"], &["a"]),
            result(0, &["a", "x", "y"], &["a"]),
            result(1, &["a"], &["a"]),
        ]
        .into();
        let index = awareness_index(&rounds).unwrap();
        assert!(index < 0.5, "{index}");
        let recs = recommendations(&s, &rounds);
        assert!(recs
            .iter()
            .any(|r| r.code == RecommendationCode::ReconsiderFriendshipSemantics));
    }

    #[test]
    fn share_text() {
        assert_eq!(
            share_message(34_600),
            "I scored 34600 points on PrivCheck. Can you beat me?"
        );
    }
}
