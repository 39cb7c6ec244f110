use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{PersonId, ProfileSnapshot};

/// Fewest non-public items a playable profile must share.
pub const MIN_NON_PUBLIC_ITEMS: usize = 7;
/// Fewest strangers a snapshot must ship for gallery composition.
pub const MIN_STRANGERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Finding {
    TooFewNonPublicItems { found: usize, required: usize },
    TooFewStrangers { found: usize, required: usize },
    DuplicateId { category: String, id: String },
    OwnerListedAsContact,
    OwnerListedAsStranger,
    ContactIsStranger { person: PersonId },
    ListMemberNotContact { list: String, person: PersonId },
    EmptyDisplayName { person: PersonId },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewNonPublicItems { found, required } => write!(
                f,
                "only {found} non-public shared items; minimum {required} required"
            ),
            Self::TooFewStrangers { found, required } => {
                write!(f, "only {found} strangers; minimum {required} required")
            }
            Self::DuplicateId { category, id } => write!(f, "duplicate {category} id {id}"),
            Self::OwnerListedAsContact => f.write_str("owner is listed among contacts"),
            Self::OwnerListedAsStranger => f.write_str("owner is listed among strangers"),
            Self::ContactIsStranger { person } => {
                write!(f, "{person} is both a contact and a stranger")
            }
            Self::ListMemberNotContact { list, person } => {
                write!(f, "friend list {list} has non-contact member {person}")
            }
            Self::EmptyDisplayName { person } => write!(f, "{person} has an empty display name"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub non_public_item_count: usize,
    pub violations: Vec<Finding>,
}

pub fn validate_snapshot(s: &ProfileSnapshot) -> ValidationReport {
    let mut violations = Vec::new();

    let non_public_item_count = s.items().iter().filter(|i| !i.audience.is_public()).count();
    if non_public_item_count < MIN_NON_PUBLIC_ITEMS {
        violations.push(Finding::TooFewNonPublicItems {
            found: non_public_item_count,
            required: MIN_NON_PUBLIC_ITEMS,
        });
    }
    if s.strangers().len() < MIN_STRANGERS {
        violations.push(Finding::TooFewStrangers {
            found: s.strangers().len(),
            required: MIN_STRANGERS,
        });
    }

    let owner = &s.owner().id;
    if s.contacts().iter().any(|p| &p.id == owner) {
        violations.push(Finding::OwnerListedAsContact);
    }
    if s.strangers().iter().any(|p| &p.id == owner) {
        violations.push(Finding::OwnerListedAsStranger);
    }

    duplicates(
        "contact",
        s.contacts().iter().map(|p| p.id.as_str()),
        &mut violations,
    );
    duplicates(
        "stranger",
        s.strangers().iter().map(|p| p.id.as_str()),
        &mut violations,
    );
    duplicates(
        "friend list",
        s.friend_lists().iter().map(|l| l.id.as_str()),
        &mut violations,
    );
    duplicates(
        "item",
        s.items().iter().map(|i| i.id.as_str()),
        &mut violations,
    );

    let contacts: BTreeSet<&PersonId> = s.contacts().iter().map(|p| &p.id).collect();
    for p in s.strangers().iter().filter(|p| contacts.contains(&p.id)) {
        violations.push(Finding::ContactIsStranger {
            person: p.id.clone(),
        });
    }
    for list in s.friend_lists() {
        for member in list.members.iter().filter(|m| !contacts.contains(m)) {
            violations.push(Finding::ListMemberNotContact {
                list: list.id.to_string(),
                person: member.clone(),
            });
        }
    }
    for p in std::iter::once(s.owner())
        .chain(s.contacts())
        .chain(s.strangers())
        .filter(|p| p.display_name.trim().is_empty())
    {
        violations.push(Finding::EmptyDisplayName {
            person: p.id.clone(),
        });
    }

    ValidationReport {
        ok: violations.is_empty(),
        non_public_item_count,
        violations,
    }
}

fn duplicates<'a>(category: &str, ids: impl Iterator<Item = &'a str>, out: &mut Vec<Finding>) {
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for id in ids {
        if !seen.insert(id) && reported.insert(id) {
            out.push(Finding::DuplicateId {
                category: category.to_owned(),
                id: id.to_owned(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::{item, snapshot_with};
    use crate::graph::{Audience, FriendList, ProfileSnapshot};

    fn items(non_public: usize, public: usize) -> Vec<crate::graph::SharedItem> {
        (0..non_public)
            .map(|i| item(&format!("n{i}"), Audience::Contacts))
            .chain((0..public).map(|i| item(&format!("p{i}"), Audience::Public)))
            .collect()
    }

    #[test]
    fn seven_non_public_items_pass() {
        let r = validate_snapshot(&snapshot_with(5, &[], items(7, 0)));
        assert!(r.ok, "{:?}", r.violations);
        assert_eq!(r.non_public_item_count, 7);
    }

    #[test]
    fn six_non_public_plus_public_fail() {
        let r = validate_snapshot(&snapshot_with(5, &[], items(6, 5)));
        assert!(!r.ok);
        assert_eq!(r.non_public_item_count, 6);
        assert_eq!(
            r.violations,
            vec![Finding::TooFewNonPublicItems {
                found: 6,
                required: 7
            }]
        );
        assert!(r.violations[0].to_string().contains("minimum 7"));
    }

    #[test]
    fn list_with_stranger_member_is_reported() {
        let base = snapshot_with(5, &[("family", &["p1"])], items(8, 0));
        let stranger = base.strangers()[0].id.clone();
        let mutated = ProfileSnapshot::new(
            base.owner().clone(),
            base.contacts().to_vec(),
            vec![FriendList::new(
                "family",
                "Family",
                [PersonId::from("p1"), stranger.clone()],
            )],
            base.items().to_vec(),
            base.strangers().to_vec(),
        )
        .unwrap();
        let r = validate_snapshot(&mutated);
        assert!(!r.ok);
        assert_eq!(r.non_public_item_count, 8);
        assert_eq!(
            r.violations,
            vec![Finding::ListMemberNotContact {
                list: "family".into(),
                person: stranger
            }]
        );
    }

    #[test]
    fn structural_violations_are_reported() {
        let base = snapshot_with(3, &[], items(7, 0));
        let mut contacts = base.contacts().to_vec();
        contacts.push(contacts[0].clone());
        contacts.push(base.owner().clone());
        contacts.push(base.strangers()[0].clone());
        let mut strangers = base.strangers()[..4].to_vec();
        strangers[1].display_name = " ".into();
        let s = ProfileSnapshot::new(
            base.owner().clone(),
            contacts,
            vec![],
            base.items().to_vec(),
            strangers,
        )
        .unwrap();
        let r = validate_snapshot(&s);
        assert!(!r.ok);
        let codes: Vec<_> = r
            .violations
            .iter()
            .map(|f| {
                serde_json::to_value(f).unwrap()["code"]
                    .as_str()
                    .unwrap()
                    .to_owned()
            })
            .collect();
        for expected in [
            "too_few_strangers",
            "owner_listed_as_contact",
            "duplicate_id",
            "contact_is_stranger",
            "empty_display_name",
        ] {
            assert!(
                codes.iter().any(|c| c == expected),
                "missing {expected} in {codes:?}"
            );
        }
    }
}
