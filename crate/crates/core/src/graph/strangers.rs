use std::sync::OnceLock;

use super::model::{Person, PersonKind};
use super::wire::PersonDoc;
use super::SnapshotError;

const DEFAULT_POOL: &str = include_str!("../../data/strangers.json");
const DEMO_PROFILE: &str = include_str!("../../data/demo_profile.json");

/// The bundled pool of 40 synthetic strangers.
pub fn default_stranger_pool() -> &'static [Person] {
    static POOL: OnceLock<Vec<Person>> = OnceLock::new();
    POOL.get_or_init(|| {
        parse_stranger_pool(DEFAULT_POOL.as_bytes()).expect("bundled pool is valid")
    })
}

/// Parses a stranger pool file: a JSON array of `{id, display_name, avatar_ref?}`.
pub fn parse_stranger_pool(raw: &[u8]) -> Result<Vec<Person>, SnapshotError> {
    let docs: Vec<PersonDoc> =
        serde_json::from_slice(raw).map_err(|e| SnapshotError::Parse(e.to_string()))?;
    docs.into_iter()
        .map(|d| d.into_person(PersonKind::Stranger))
        .collect()
}

/// Raw bytes of the bundled demo profile (12 contacts, 5 friend lists, 9 items).
pub fn demo_profile_json() -> &'static str {
    DEMO_PROFILE
}
