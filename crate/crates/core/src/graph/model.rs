use std::collections::{BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::SnapshotError;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// Identifier of a contact, stranger or the profile owner.
    PersonId
);
id_type!(
    /// Identifier of a shared item.
    ItemId
);
id_type!(
    /// Identifier of a friend list.
    ListId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonKind {
    Owner,
    Contact,
    Stranger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub id: PersonId,
    pub display_name: String,
    pub avatar_ref: Option<String>,
    pub kind: PersonKind,
}

impl Person {
    pub fn new(id: impl Into<String>, display_name: impl Into<String>, kind: PersonKind) -> Self {
        Self {
            id: PersonId::new(id),
            display_name: display_name.into(),
            avatar_ref: None,
            kind,
        }
    }

    pub fn with_avatar(mut self, avatar_ref: impl Into<String>) -> Self {
        self.avatar_ref = Some(avatar_ref.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FriendList {
    pub id: ListId,
    pub name: String,
    pub members: BTreeSet<PersonId>,
}

impl FriendList {
    pub fn new<I, P>(id: impl Into<String>, name: impl Into<String>, members: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: Into<PersonId>,
    {
        Self {
            id: ListId::new(id),
            name: name.into(),
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    /// A list counts as defined once it has at least one member.
    pub fn is_defined(&self) -> bool {
        !self.members.is_empty()
    }
}

/// Entry of a custom audience's allow set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AudienceTarget {
    Person(PersonId),
    List(ListId),
}

impl AudienceTarget {
    pub fn as_str(&self) -> &str {
        match self {
            Self::Person(p) => p.as_str(),
            Self::List(l) => l.as_str(),
        }
    }
}

/// Per-item visibility rule. Deny is applied after the allow set is expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Audience {
    Public,
    Contacts,
    OnlyMe,
    Lists(BTreeSet<ListId>),
    Custom {
        allow: BTreeSet<AudienceTarget>,
        deny: BTreeSet<PersonId>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudienceMode {
    Public,
    Contacts,
    OnlyMe,
    Lists,
    Custom,
}

impl Audience {
    pub fn mode(&self) -> AudienceMode {
        match self {
            Self::Public => AudienceMode::Public,
            Self::Contacts => AudienceMode::Contacts,
            Self::OnlyMe => AudienceMode::OnlyMe,
            Self::Lists(_) => AudienceMode::Lists,
            Self::Custom { .. } => AudienceMode::Custom,
        }
    }

    pub fn is_public(&self) -> bool {
        matches!(self, Self::Public)
    }

    /// True for audiences that reach every contact (or more).
    pub fn is_broad(&self) -> bool {
        matches!(self, Self::Public | Self::Contacts)
    }

    /// Lists referenced by a `Lists` audience or the allow side of a `Custom` one.
    pub fn referenced_lists(&self) -> impl Iterator<Item = &ListId> {
        let (lists, allow) = match self {
            Self::Lists(lists) => (Some(lists), None),
            Self::Custom { allow, .. } => (None, Some(allow)),
            _ => (None, None),
        };
        lists
            .into_iter()
            .flatten()
            .chain(allow.into_iter().flatten().filter_map(|t| match t {
                AudienceTarget::List(l) => Some(l),
                AudienceTarget::Person(_) => None,
            }))
    }

    /// Persons named directly in a `Custom` audience (allow and deny).
    pub fn referenced_persons(&self) -> impl Iterator<Item = &PersonId> {
        let (allow, deny) = match self {
            Self::Custom { allow, deny } => (Some(allow), Some(deny)),
            _ => (None, None),
        };
        allow
            .into_iter()
            .flatten()
            .filter_map(|t| match t {
                AudienceTarget::Person(p) => Some(p),
                AudienceTarget::List(_) => None,
            })
            .chain(deny.into_iter().flatten())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Picture,
    StatusMessage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedItem {
    pub id: ItemId,
    pub kind: ItemKind,
    pub content_ref: String,
    pub audience: Audience,
    pub shared_at: DateTime<Utc>,
}

/// The read-only profile document every game is played against.
///
/// Construction checks that every id reference resolves; the remaining
/// semantic rules are reported by [`validate_snapshot`](super::validate_snapshot).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSnapshot {
    owner: Person,
    contacts: Vec<Person>,
    friend_lists: Vec<FriendList>,
    items: Vec<SharedItem>,
    strangers: Vec<Person>,
    persons: HashMap<PersonId, usize>,
}

impl ProfileSnapshot {
    pub fn new(
        owner: Person,
        contacts: Vec<Person>,
        friend_lists: Vec<FriendList>,
        items: Vec<SharedItem>,
        strangers: Vec<Person>,
    ) -> Result<Self, SnapshotError> {
        let owner = Person {
            kind: PersonKind::Owner,
            ..owner
        };
        let contacts: Vec<Person> = contacts
            .into_iter()
            .map(|p| Person {
                kind: PersonKind::Contact,
                ..p
            })
            .collect();
        let strangers: Vec<Person> = strangers
            .into_iter()
            .map(|p| Person {
                kind: PersonKind::Stranger,
                ..p
            })
            .collect();

        let mut persons = HashMap::new();
        persons.insert(owner.id.clone(), usize::MAX);
        for (i, p) in contacts.iter().chain(strangers.iter()).enumerate() {
            persons.entry(p.id.clone()).or_insert(i);
        }

        let snapshot = Self {
            owner,
            contacts,
            friend_lists,
            items,
            strangers,
            persons,
        };
        snapshot.check_references()?;
        Ok(snapshot)
    }

    fn check_references(&self) -> Result<(), SnapshotError> {
        for list in &self.friend_lists {
            if let Some(p) = list.members.iter().find(|p| !self.knows_person(p)) {
                return Err(SnapshotError::Reference(format!(
                    "friend list {} has unknown member {p}",
                    list.id
                )));
            }
        }
        for item in &self.items {
            if let Some(l) = item
                .audience
                .referenced_lists()
                .find(|l| self.list(l).is_none())
            {
                return Err(SnapshotError::Reference(format!(
                    "item {} references unknown list {l}",
                    item.id
                )));
            }
            if let Some(p) = item
                .audience
                .referenced_persons()
                .find(|p| !self.knows_person(p))
            {
                return Err(SnapshotError::Reference(format!(
                    "item {} references unknown person {p}",
                    item.id
                )));
            }
        }
        Ok(())
    }

    fn knows_person(&self, id: &PersonId) -> bool {
        self.persons.contains_key(id)
    }

    pub fn owner(&self) -> &Person {
        &self.owner
    }

    pub fn contacts(&self) -> &[Person] {
        &self.contacts
    }

    pub fn friend_lists(&self) -> &[FriendList] {
        &self.friend_lists
    }

    pub fn items(&self) -> &[SharedItem] {
        &self.items
    }

    pub fn strangers(&self) -> &[Person] {
        &self.strangers
    }

    pub fn item(&self, id: &ItemId) -> Option<&SharedItem> {
        self.items.iter().find(|i| &i.id == id)
    }

    pub fn list(&self, id: &ListId) -> Option<&FriendList> {
        self.friend_lists.iter().find(|l| &l.id == id)
    }

    /// Looks up a contact or stranger by id. The owner is not returned.
    pub fn person(&self, id: &PersonId) -> Option<&Person> {
        self.persons
            .get(id)
            .and_then(|&i| self.contacts.iter().chain(self.strangers.iter()).nth(i))
    }

    pub fn is_contact(&self, id: &PersonId) -> bool {
        self.contacts.iter().any(|p| &p.id == id)
    }

    pub fn is_stranger(&self, id: &PersonId) -> bool {
        self.strangers.iter().any(|p| &p.id == id)
    }

    pub fn item_ids(&self) -> Vec<ItemId> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }
}
