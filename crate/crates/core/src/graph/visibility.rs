use std::collections::BTreeSet;

use serde::Serialize;

use super::model::{Audience, AudienceTarget, ItemId, PersonId, ProfileSnapshot};
use super::SnapshotError;

/// The persons who can actually see an item. The owner is never listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewerSet {
    pub persons: BTreeSet<PersonId>,
    pub includes_everyone: bool,
}

impl ViewerSet {
    /// Membership test that also covers persons outside the snapshot (for
    /// example strangers drawn from the bundled pool): they see an item only
    /// when it is public.
    pub fn contains(&self, person: &PersonId) -> bool {
        self.includes_everyone || self.persons.contains(person)
    }

    pub fn contact_viewers<'a>(
        &'a self,
        s: &'a ProfileSnapshot,
    ) -> impl Iterator<Item = &'a PersonId> + 'a {
        self.persons.iter().filter(|p| s.is_contact(p))
    }
}

pub fn resolve_visibility(item: &ItemId, s: &ProfileSnapshot) -> Result<ViewerSet, SnapshotError> {
    let item = s
        .item(item)
        .ok_or_else(|| SnapshotError::UnknownItem(item.clone()))?;
    Ok(resolve_audience(&item.audience, s))
}

pub fn resolve_audience(audience: &Audience, s: &ProfileSnapshot) -> ViewerSet {
    let contacts = || s.contacts().iter().map(|p| p.id.clone());
    let list_members = |id| {
        s.list(id)
            .into_iter()
            .flat_map(|l| l.members.iter().cloned())
    };

    let (mut persons, includes_everyone): (BTreeSet<PersonId>, bool) = match audience {
        Audience::Public => (
            contacts()
                .chain(s.strangers().iter().map(|p| p.id.clone()))
                .collect(),
            true,
        ),
        Audience::Contacts => (contacts().collect(), false),
        Audience::OnlyMe => (BTreeSet::new(), false),
        Audience::Lists(lists) => (lists.iter().flat_map(list_members).collect(), false),
        Audience::Custom { allow, deny } => {
            let mut allowed: BTreeSet<PersonId> = allow
                .iter()
                .flat_map(|target| -> Box<dyn Iterator<Item = PersonId> + '_> {
                    match target {
                        AudienceTarget::Person(p) => Box::new(std::iter::once(p.clone())),
                        AudienceTarget::List(l) => Box::new(list_members(l)),
                    }
                })
                .collect();
            allowed.retain(|p| !deny.contains(p));
            (allowed, false)
        }
    };
    persons.remove(&s.owner().id);
    ViewerSet {
        persons,
        includes_everyone,
    }
}

/// Items whose viewer set contains at least one contact.
pub fn eligible_game_items(s: &ProfileSnapshot) -> Vec<ItemId> {
    s.items()
        .iter()
        .filter(|item| {
            resolve_audience(&item.audience, s)
                .contact_viewers(s)
                .next()
                .is_some()
        })
        .map(|item| item.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::{item, snapshot_with};
    use crate::graph::{Audience, AudienceTarget};

    fn ids(v: &[&str]) -> BTreeSet<PersonId> {
        v.iter().map(|s| PersonId::from(*s)).collect()
    }

    #[test]
    fn contacts_audience_is_every_contact() {
        let s = snapshot_with(
            12,
            &[("family", &["p1", "p2"])],
            vec![item("i1", Audience::Contacts)],
        );
        let v = resolve_visibility(&"i1".into(), &s).unwrap();
        assert_eq!(v.persons.len(), 12);
        assert!(v.persons.iter().all(|p| s.is_contact(p)));
        assert!(!v.includes_everyone);
    }

    #[test]
    fn single_list_audience_is_its_members() {
        let s = snapshot_with(
            5,
            &[("family", &["p1", "p2"])],
            vec![item("i1", Audience::Lists(["family".into()].into()))],
        );
        assert_eq!(
            resolve_visibility(&"i1".into(), &s).unwrap().persons,
            ids(&["p1", "p2"])
        );
    }

    #[test]
    fn custom_deny_applies_after_allow_expansion() {
        let audience = Audience::Custom {
            allow: [
                AudienceTarget::List("family".into()),
                AudienceTarget::Person("p3".into()),
            ]
            .into(),
            deny: ["p2".into()].into(),
        };
        let s = snapshot_with(5, &[("family", &["p1", "p2"])], vec![item("i1", audience)]);
        assert_eq!(
            resolve_visibility(&"i1".into(), &s).unwrap().persons,
            ids(&["p1", "p3"])
        );
    }

    #[test]
    fn public_includes_strangers_and_sets_flag() {
        let s = snapshot_with(3, &[], vec![item("i1", Audience::Public)]);
        let v = resolve_visibility(&"i1".into(), &s).unwrap();
        assert!(v.includes_everyone);
        assert_eq!(v.persons.len(), 3 + s.strangers().len());
        assert!(v.contains(&"someone-outside".into()));
    }

    #[test]
    fn only_me_is_empty_and_owner_never_listed() {
        let s = snapshot_with(3, &[], vec![item("i1", Audience::OnlyMe)]);
        assert!(resolve_visibility(&"i1".into(), &s)
            .unwrap()
            .persons
            .is_empty());

        let s = snapshot_with(
            3,
            &[],
            vec![item(
                "i1",
                Audience::Custom {
                    allow: [AudienceTarget::Person("me".into())].into(),
                    deny: Default::default(),
                },
            )],
        );
        assert!(resolve_visibility(&"i1".into(), &s)
            .unwrap()
            .persons
            .is_empty());
    }

    #[test]
    fn unknown_item_is_an_error() {
        let s = snapshot_with(3, &[], vec![]);
        assert!(matches!(
            resolve_visibility(&"nope".into(), &s),
            Err(SnapshotError::UnknownItem(_))
        ));
    }

    #[test]
    fn eligibility_excludes_empty_and_contactless_viewer_sets() {
        let mut items: Vec<_> = (0..7)
            .map(|i| item(&format!("c{i}"), Audience::Contacts))
            .collect();
        items.push(item("secret", Audience::OnlyMe));
        items.push(item(
            "denied",
            Audience::Custom {
                allow: [AudienceTarget::List("family".into())].into(),
                deny: ["p1".into(), "p2".into()].into(),
            },
        ));
        let s = snapshot_with(4, &[("family", &["p1", "p2"])], items);
        let eligible = eligible_game_items(&s);
        assert_eq!(eligible.len(), 7);
        assert!(!eligible.contains(&"secret".into()));
        assert!(!eligible.contains(&"denied".into()));
    }
}
