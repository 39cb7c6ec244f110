#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;

use privcheck::clock::MockClock;
use privcheck::graph::{
    demo_snapshot, Audience, AudienceTarget, FriendList, ItemKind, Person, PersonId, PersonKind,
    ProfileSnapshot, SharedItem,
};
use privcheck::session::{ServiceOptions, SessionService};

/// A random but reference-consistent snapshot: at most 20 persons in total
/// (owner, contacts, strangers), at most 10 items, every audience mode.
pub fn random_snapshot(rng: &mut impl Rng) -> ProfileSnapshot {
    let n_contacts = rng.gen_range(0..=12);
    let n_strangers = rng.gen_range(0..=19 - n_contacts);
    let owner = Person::new("owner", "Owner", PersonKind::Owner);
    let contacts: Vec<Person> = (0..n_contacts)
        .map(|i| Person::new(format!("c{i}"), format!("Contact {i}"), PersonKind::Contact))
        .collect();
    let strangers: Vec<Person> = (0..n_strangers)
        .map(|i| {
            Person::new(
                format!("s{i}"),
                format!("Stranger {i}"),
                PersonKind::Stranger,
            )
        })
        .collect();
    let lists: Vec<FriendList> = (0..rng.gen_range(0..=4))
        .map(|i| {
            let k = rng.gen_range(0..=contacts.len());
            let members: Vec<PersonId> = contacts
                .choose_multiple(rng, k)
                .map(|p| p.id.clone())
                .collect();
            FriendList::new(format!("l{i}"), format!("List {i}"), members)
        })
        .collect();

    let everyone: Vec<PersonId> = std::iter::once(owner.id.clone())
        .chain(contacts.iter().map(|p| p.id.clone()))
        .chain(strangers.iter().map(|p| p.id.clone()))
        .collect();
    let items = (0..rng.gen_range(1..=10))
        .map(|i| {
            let audience = match rng.gen_range(0..5) {
                0 => Audience::Public,
                1 => Audience::Contacts,
                2 => Audience::OnlyMe,
                3 if !lists.is_empty() => {
                    let k = rng.gen_range(1..=lists.len());
                    Audience::Lists(
                        lists
                            .choose_multiple(rng, k)
                            .map(|l| l.id.clone())
                            .collect(),
                    )
                }
                3 => Audience::Contacts,
                _ => {
                    let mut allow = BTreeSet::new();
                    for _ in 0..rng.gen_range(0..4) {
                        if !lists.is_empty() && rng.gen_bool(0.4) {
                            allow.insert(AudienceTarget::List(
                                lists.choose(rng).unwrap().id.clone(),
                            ));
                        } else {
                            allow.insert(AudienceTarget::Person(
                                everyone.choose(rng).unwrap().clone(),
                            ));
                        }
                    }
                    let deny = (0..rng.gen_range(0..3))
                        .map(|_| everyone.choose(rng).unwrap().clone())
                        .collect();
                    Audience::Custom { allow, deny }
                }
            };
            SharedItem {
                id: format!("i{i}").into(),
                kind: ItemKind::Picture,
                content_ref: format!("p{i}.jpg"),
                audience,
                shared_at: Utc.timestamp_opt(1_600_000_000 + i as i64, 0).unwrap(),
            }
        })
        .collect();
    ProfileSnapshot::new(owner, contacts, lists, items, strangers).expect("consistent references")
}

/// Brute-force rule evaluation for one person, written independently of
/// the library's set algebra.
pub fn can_see(s: &ProfileSnapshot, audience: &Audience, person: &PersonId) -> bool {
    if *person == s.owner().id {
        return false;
    }
    let in_list = |list: &privcheck::graph::ListId| {
        s.friend_lists()
            .iter()
            .any(|l| &l.id == list && l.members.contains(person))
    };
    match audience {
        Audience::Public => true,
        Audience::Contacts => s.contacts().iter().any(|c| &c.id == person),
        Audience::OnlyMe => false,
        Audience::Lists(lists) => lists.iter().any(in_list),
        Audience::Custom { allow, deny } => {
            let allowed = allow.iter().any(|t| match t {
                AudienceTarget::Person(p) => p == person,
                AudienceTarget::List(l) => in_list(l),
            });
            allowed && !deny.contains(person)
        }
    }
}

pub fn all_persons(s: &ProfileSnapshot) -> Vec<PersonId> {
    std::iter::once(s.owner())
        .chain(s.contacts())
        .chain(s.strangers())
        .map(|p| p.id.clone())
        .collect()
}

pub fn demo() -> Arc<ProfileSnapshot> {
    Arc::new(demo_snapshot())
}

pub fn mock_service() -> (Arc<MockClock>, SessionService) {
    let clock = Arc::new(MockClock::new());
    let service = SessionService::new(clock.clone(), ServiceOptions::default()).unwrap();
    (clock, service)
}

pub fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s)
}

/// Recursively collects object keys of a JSON value.
pub fn json_keys(v: &serde_json::Value, out: &mut BTreeSet<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                out.insert(k.clone());
                json_keys(v, out);
            }
        }
        serde_json::Value::Array(items) => items.iter().for_each(|v| json_keys(v, out)),
        _ => {}
    }
}

/// Keys that would leak who can see an item.
pub const VIEWER_KEYS: &[&str] = &[
    "is_viewer",
    "viewer",
    "viewers",
    "displayed_viewers",
    "missed_viewers",
    "persons",
    "includes_everyone",
];
