//! Profile snapshots, audience rules and visibility resolution.

mod model;
mod strangers;
mod validate;
mod visibility;
mod wire;

use thiserror::Error;

pub use model::{
    Audience, AudienceMode, AudienceTarget, FriendList, ItemId, ItemKind, ListId, Person, PersonId,
    PersonKind, ProfileSnapshot, SharedItem,
};
pub use strangers::{default_stranger_pool, demo_profile_json, parse_stranger_pool};
pub use validate::{
    validate_snapshot, Finding, ValidationReport, MIN_NON_PUBLIC_ITEMS, MIN_STRANGERS,
};
pub use visibility::{eligible_game_items, resolve_audience, resolve_visibility, ViewerSet};
pub use wire::{load_snapshot, snapshot_to_json, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot document: {0}")]
    Parse(String),
    #[error("snapshot schema violation: {0}")]
    Schema(String),
    #[error("dangling reference: {0}")]
    Reference(String),
    #[error("unknown item {0}")]
    UnknownItem(ItemId),
}

/// The bundled demo profile, parsed.
pub fn demo_snapshot() -> ProfileSnapshot {
    load_snapshot(demo_profile_json().as_bytes()).expect("bundled demo profile is valid")
}

#[cfg(test)]
pub(crate) mod testutil {
    use chrono::{TimeZone, Utc};

    use super::*;

    pub fn item(id: &str, audience: Audience) -> SharedItem {
        SharedItem {
            id: id.into(),
            kind: ItemKind::Picture,
            content_ref: format!("{id}.jpg"),
            audience,
            shared_at: Utc.with_ymd_and_hms(2013, 11, 1, 12, 0, 0).unwrap(),
        }
    }

    /// Contacts `p1..=pN`, the given lists, and 20 strangers from the default pool.
    pub fn snapshot_with(
        contacts: usize,
        lists: &[(&str, &[&str])],
        items: Vec<SharedItem>,
    ) -> ProfileSnapshot {
        ProfileSnapshot::new(
            Person::new("me", "Me", PersonKind::Owner),
            (1..=contacts)
                .map(|i| Person::new(format!("p{i}"), format!("Contact {i}"), PersonKind::Contact))
                .collect(),
            lists
                .iter()
                .map(|(id, members)| FriendList::new(*id, *id, members.iter().copied()))
                .collect(),
            items,
            default_stranger_pool()[..20].to_vec(),
        )
        .unwrap()
    }
}
