//! Synthetic profile snapshots with a requested shape.

use chrono::{DateTime, Duration as ChronoDuration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{
    default_stranger_pool, Audience, AudienceTarget, FriendList, ItemId, ItemKind, Person,
    PersonKind, ProfileSnapshot, SharedItem, MIN_NON_PUBLIC_ITEMS, MIN_STRANGERS,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub contacts: usize,
    pub items: usize,
    pub lists: usize,
    /// Share of items posted publicly, rounded to the nearest item.
    pub public_fraction: f64,
    /// Strangers copied from the bundled pool.
    pub strangers: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            contacts: 12,
            items: 9,
            lists: 2,
            public_fraction: 0.2,
            strangers: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("infeasible parameters: {0}")]
pub struct InfeasibleParameters(pub String);

const FIRST: &[&str] = &[
    "Ada", "Ben", "Chloe", "Dario", "Elif", "Farah", "Gus", "Hana", "Ivo", "Jonas", "Kira", "Lena",
    "Mats", "Nadia", "Omar", "Pia", "Quinn", "Rosa", "Sami", "Tess", "Uli", "Vera", "Wim", "Yara",
    "Zeno",
];
const LAST: &[&str] = &[
    "Albers",
    "Brandt",
    "Costa",
    "Dimitrov",
    "Engel",
    "Fischer",
    "Gruber",
    "Haas",
    "Ilic",
    "Jansen",
    "Keller",
    "Lindqvist",
    "Moreau",
    "Novak",
    "Oliveira",
    "Petrov",
    "Richter",
    "Schulz",
    "Tanaka",
    "Vogel",
    "Weber",
    "Young",
    "Zimmer",
];
const LIST_NAMES: &[&str] = &[
    "Family",
    "Colleagues",
    "Close friends",
    "Neighbours",
    "Sports club",
    "Book club",
    "University",
    "Band",
    "Travel buddies",
    "School parents",
];

fn check(p: &GenParams) -> Result<usize, InfeasibleParameters> {
    if p.contacts == 0 {
        return Err(InfeasibleParameters(
            "at least one contact is required".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p.public_fraction) {
        return Err(InfeasibleParameters(format!(
            "public fraction {} is outside [0, 1]",
            p.public_fraction
        )));
    }
    let public = (p.public_fraction * p.items as f64).round() as usize;
    let non_public = p.items - public;
    if non_public < MIN_NON_PUBLIC_ITEMS {
        return Err(InfeasibleParameters(format!(
            "{} items at public fraction {} leave {non_public} non-public items; {MIN_NON_PUBLIC_ITEMS} required",
            p.items, p.public_fraction
        )));
    }
    let pool = default_stranger_pool().len();
    if p.strangers < MIN_STRANGERS || p.strangers > pool {
        return Err(InfeasibleParameters(format!(
            "strangers must be between {MIN_STRANGERS} and {pool}, got {}",
            p.strangers
        )));
    }
    Ok(public)
}

/// Generates a snapshot that passes validation and has at least five
/// game-eligible items. Identical parameters and seed give an identical
/// snapshot.
pub fn gen_snapshot(p: &GenParams, seed: u64) -> Result<ProfileSnapshot, InfeasibleParameters> {
    let public = check(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut name = || {
        format!(
            "{} {}",
            FIRST.choose(&mut rng).unwrap(),
            LAST.choose(&mut rng).unwrap()
        )
    };
    let owner = Person::new("me", name(), PersonKind::Owner);
    let contacts: Vec<Person> = (1..=p.contacts)
        .map(|i| Person::new(format!("c{i:03}"), name(), PersonKind::Contact))
        .collect();

    let lists: Vec<FriendList> = (1..=p.lists)
        .map(|i| {
            let size = rng.gen_range(1..=p.contacts.min(6));
            let members: Vec<_> = contacts
                .choose_multiple(&mut rng, size)
                .map(|c| c.id.clone())
                .collect();
            let label = LIST_NAMES[(i - 1) % LIST_NAMES.len()];
            let name = if i > LIST_NAMES.len() {
                format!("{label} {}", i / LIST_NAMES.len() + 1)
            } else {
                label.to_owned()
            };
            FriendList::new(format!("l{i:02}"), name, members)
        })
        .collect();

    // Public items are spread over the timeline rather than bunched up.
    let mut public_slots = vec![false; p.items];
    for slot in public_slots.iter_mut().take(public) {
        *slot = true;
    }
    public_slots.shuffle(&mut rng);

    let epoch: DateTime<Utc> = DateTime::from_timestamp(1_700_000_000, 0).expect("valid epoch");
    let mut non_public_seen = 0;
    let items = public_slots
        .iter()
        .enumerate()
        .map(|(i, &is_public)| {
            let audience = if is_public {
                Audience::Public
            } else {
                non_public_seen += 1;
                // Keep the first seven non-public items visible to someone so
                // the game always has enough eligible items.
                if non_public_seen > MIN_NON_PUBLIC_ITEMS && rng.gen_bool(0.2) {
                    Audience::OnlyMe
                } else {
                    restricted_audience(&mut rng, &contacts, &lists)
                }
            };
            let kind = if rng.gen_bool(0.6) {
                ItemKind::Picture
            } else {
                ItemKind::StatusMessage
            };
            let content_ref = match kind {
                ItemKind::Picture => format!("photos/{:03}.jpg", i + 1),
                ItemKind::StatusMessage => format!("status/{:03}.txt", i + 1),
            };
            SharedItem {
                id: ItemId::new(format!("i{:03}", i + 1)),
                kind,
                content_ref,
                audience,
                shared_at: epoch + ChronoDuration::hours(rng.gen_range(1..72) * (i as i64 + 1)),
            }
        })
        .collect();

    let strangers = default_stranger_pool()[..p.strangers].to_vec();
    Ok(
        ProfileSnapshot::new(owner, contacts, lists, items, strangers)
            .expect("generated references always resolve"),
    )
}

/// An audience of contacts, lists or a custom rule; never empty.
fn restricted_audience(
    rng: &mut ChaCha8Rng,
    contacts: &[Person],
    lists: &[FriendList],
) -> Audience {
    let choice = if lists.is_empty() {
        rng.gen_range(0..2) * 2
    } else {
        rng.gen_range(0..3)
    };
    match choice {
        0 => Audience::Contacts,
        1 => {
            let n = rng.gen_range(1..=lists.len().min(2));
            Audience::Lists(
                lists
                    .choose_multiple(rng, n)
                    .map(|l| l.id.clone())
                    .collect(),
            )
        }
        _ => {
            // The first allowed person is never denied, so someone can see it.
            let mut picked = contacts.choose_multiple(rng, 3.min(contacts.len()));
            let anchor = picked.next().expect("at least one contact").id.clone();
            let mut allow = std::collections::BTreeSet::from([AudienceTarget::Person(anchor)]);
            if let Some(list) = lists.choose(rng) {
                allow.insert(AudienceTarget::List(list.id.clone()));
            }
            let deny = picked.next().map(|c| c.id.clone()).into_iter().collect();
            Audience::Custom { allow, deny }
        }
    }
}
