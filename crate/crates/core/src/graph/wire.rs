//! Snapshot JSON document (schema version 1).

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::model::{
    Audience, AudienceMode, AudienceTarget, FriendList, ItemId, ItemKind, ListId, Person, PersonId,
    PersonKind, ProfileSnapshot, SharedItem,
};
use super::strangers::default_stranger_pool;
use super::SnapshotError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotDoc {
    schema_version: u32,
    owner: PersonDoc,
    contacts: Vec<PersonDoc>,
    #[serde(default)]
    friend_lists: Vec<ListDoc>,
    items: Vec<ItemDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strangers: Option<Vec<PersonDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct PersonDoc {
    pub id: String,
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avatar_ref: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ListDoc {
    id: String,
    name: String,
    members: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ItemDoc {
    id: String,
    kind: ItemKind,
    content_ref: String,
    audience: AudienceDoc,
    shared_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AudienceDoc {
    mode: AudienceMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lists: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    allow: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    deny: Vec<String>,
}

/// Parses and links a snapshot document.
///
/// A document without a `strangers` key gets the bundled default pool.
pub fn load_snapshot(raw: &[u8]) -> Result<ProfileSnapshot, SnapshotError> {
    let doc: SnapshotDoc = serde_json::from_slice(raw).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => SnapshotError::Schema(e.to_string()),
            _ => SnapshotError::Parse(e.to_string()),
        }
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(SnapshotError::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }

    let owner = doc.owner.into_person(PersonKind::Owner)?;
    let contacts = doc
        .contacts
        .into_iter()
        .map(|p| p.into_person(PersonKind::Contact))
        .collect::<Result<Vec<_>, _>>()?;
    let strangers = match doc.strangers {
        Some(list) => list
            .into_iter()
            .map(|p| p.into_person(PersonKind::Stranger))
            .collect::<Result<Vec<_>, _>>()?,
        None => default_stranger_pool().to_vec(),
    };
    let friend_lists = doc
        .friend_lists
        .into_iter()
        .map(|l| {
            non_empty(&l.id, "friend list id")?;
            Ok(FriendList::new(l.id, l.name, l.members))
        })
        .collect::<Result<Vec<_>, SnapshotError>>()?;

    let list_ids: BTreeSet<&str> = friend_lists.iter().map(|l| l.id.as_str()).collect();
    let person_ids: BTreeSet<&str> = std::iter::once(&owner)
        .chain(&contacts)
        .chain(&strangers)
        .map(|p| p.id.as_str())
        .collect();

    let items = doc
        .items
        .into_iter()
        .map(|item| {
            non_empty(&item.id, "item id")?;
            let audience = item
                .audience
                .into_audience(&item.id, &list_ids, &person_ids)?;
            Ok(SharedItem {
                id: ItemId::new(item.id),
                kind: item.kind,
                content_ref: item.content_ref,
                audience,
                shared_at: item.shared_at,
            })
        })
        .collect::<Result<Vec<_>, SnapshotError>>()?;

    ProfileSnapshot::new(owner, contacts, friend_lists, items, strangers)
}

/// Serializes a snapshot back into its document form (pretty-printed, stable ordering).
pub fn snapshot_to_json(s: &ProfileSnapshot) -> String {
    let person = |p: &Person| PersonDoc {
        id: p.id.to_string(),
        display_name: p.display_name.clone(),
        avatar_ref: p.avatar_ref.clone(),
    };
    let doc = SnapshotDoc {
        schema_version: SCHEMA_VERSION,
        owner: person(s.owner()),
        contacts: s.contacts().iter().map(person).collect(),
        friend_lists: s
            .friend_lists()
            .iter()
            .map(|l| ListDoc {
                id: l.id.to_string(),
                name: l.name.clone(),
                members: l.members.iter().map(ToString::to_string).collect(),
            })
            .collect(),
        items: s
            .items()
            .iter()
            .map(|i| ItemDoc {
                id: i.id.to_string(),
                kind: i.kind,
                content_ref: i.content_ref.clone(),
                audience: AudienceDoc::from_audience(&i.audience),
                shared_at: i.shared_at,
            })
            .collect(),
        strangers: Some(s.strangers().iter().map(person).collect()),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("snapshot document serializes");
    out.push('\n');
    out
}

fn non_empty(id: &str, what: &str) -> Result<(), SnapshotError> {
    if id.trim().is_empty() {
        Err(SnapshotError::Schema(format!("{what} must be non-empty")))
    } else {
        Ok(())
    }
}

impl PersonDoc {
    pub(crate) fn into_person(self, kind: PersonKind) -> Result<Person, SnapshotError> {
        non_empty(&self.id, "person id")?;
        Ok(Person {
            id: PersonId::new(self.id),
            display_name: self.display_name,
            avatar_ref: self.avatar_ref,
            kind,
        })
    }
}

impl AudienceDoc {
    fn into_audience(
        self,
        item: &str,
        lists: &BTreeSet<&str>,
        persons: &BTreeSet<&str>,
    ) -> Result<Audience, SnapshotError> {
        let stray = |field: &str, present: bool| {
            if present {
                Err(SnapshotError::Schema(format!(
                    "item {item}: `{field}` is not allowed for audience mode {:?}",
                    self.mode
                )))
            } else {
                Ok(())
            }
        };
        match self.mode {
            AudienceMode::Public | AudienceMode::Contacts | AudienceMode::OnlyMe => {
                stray("lists", !self.lists.is_empty())?;
                stray("allow", !self.allow.is_empty())?;
                stray("deny", !self.deny.is_empty())?;
            }
            AudienceMode::Lists => {
                stray("allow", !self.allow.is_empty())?;
                stray("deny", !self.deny.is_empty())?;
                if self.lists.is_empty() {
                    return Err(SnapshotError::Schema(format!(
                        "item {item}: audience mode lists needs at least one list"
                    )));
                }
            }
            AudienceMode::Custom => stray("lists", !self.lists.is_empty())?,
        }

        Ok(match self.mode {
            AudienceMode::Public => Audience::Public,
            AudienceMode::Contacts => Audience::Contacts,
            AudienceMode::OnlyMe => Audience::OnlyMe,
            AudienceMode::Lists => {
                Audience::Lists(self.lists.into_iter().map(ListId::new).collect())
            }
            AudienceMode::Custom => {
                let allow = self
                    .allow
                    .into_iter()
                    .map(
                        |id| match (lists.contains(id.as_str()), persons.contains(id.as_str())) {
                            (true, false) => Ok(AudienceTarget::List(ListId::new(id))),
                            (false, true) => Ok(AudienceTarget::Person(PersonId::new(id))),
                            (true, true) => Err(SnapshotError::Reference(format!(
                                "item {item}: allow entry {id} names both a list and a person"
                            ))),
                            (false, false) => Err(SnapshotError::Reference(format!(
                                "item {item}: allow entry {id} is neither a list nor a person"
                            ))),
                        },
                    )
                    .collect::<Result<_, _>>()?;
                Audience::Custom {
                    allow,
                    deny: self.deny.into_iter().map(PersonId::new).collect(),
                }
            }
        })
    }

    fn from_audience(a: &Audience) -> Self {
        let mut doc = Self {
            mode: a.mode(),
            lists: Vec::new(),
            allow: Vec::new(),
            deny: Vec::new(),
        };
        match a {
            Audience::Lists(lists) => doc.lists = lists.iter().map(ToString::to_string).collect(),
            Audience::Custom { allow, deny } => {
                doc.allow = allow.iter().map(|t| t.as_str().to_owned()).collect();
                doc.deny = deny.iter().map(ToString::to_string).collect();
            }
            _ => {}
        }
        doc
    }
}
