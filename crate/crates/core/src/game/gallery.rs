use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GameError, ScoringParams};
use crate::graph::{
    default_stranger_pool, resolve_audience, AudienceMode, Person, PersonId, PersonKind,
    ProfileSnapshot, SharedItem,
};

/// One tile of a round's gallery. `is_viewer` and `kind` stay server-side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GalleryEntry {
    pub person: PersonId,
    pub display_name: String,
    pub avatar_ref: Option<String>,
    pub kind: PersonKind,
    pub is_viewer: bool,
}

/// How many contacts a gallery of `size` tiles draws for an item's audience.
///
/// Audiences reaching every contact split the gallery evenly between contacts
/// and strangers. Restricted audiences use four fifths contacts, of which at
/// most three fifths of the gallery are viewers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Composition {
    pub contact_slots: usize,
    pub max_viewer_slots: Option<usize>,
}

impl Composition {
    pub fn for_mode(mode: AudienceMode, size: usize) -> Self {
        match mode {
            AudienceMode::Public | AudienceMode::Contacts | AudienceMode::OnlyMe => Self {
                contact_slots: size / 2,
                max_viewer_slots: None,
            },
            AudienceMode::Lists | AudienceMode::Custom => Self {
                contact_slots: size * 4 / 5,
                max_viewer_slots: Some(size * 3 / 5),
            },
        }
    }
}

pub fn compose_gallery(
    item: &SharedItem,
    s: &ProfileSnapshot,
    seed: u64,
) -> Result<Vec<GalleryEntry>, GameError> {
    compose_gallery_with(
        item,
        s,
        seed,
        &ScoringParams::default(),
        default_stranger_pool(),
    )
}

/// Draws the gallery for one round.
///
/// Contact slots the profile cannot fill (too few contacts, or too few
/// non-viewer contacts for a restricted audience) are backfilled with
/// strangers. Strangers come from the snapshot first and from `pool` when
/// the snapshot runs out. Deterministic for a given seed.
pub fn compose_gallery_with(
    item: &SharedItem,
    s: &ProfileSnapshot,
    seed: u64,
    params: &ScoringParams,
    pool: &[Person],
) -> Result<Vec<GalleryEntry>, GameError> {
    let viewers = resolve_audience(&item.audience, s);
    let (contact_viewers, contact_others): (Vec<&Person>, Vec<&Person>) = s
        .contacts()
        .iter()
        .partition(|p| viewers.persons.contains(&p.id));
    if contact_viewers.is_empty() {
        return Err(GameError::IneligibleItem(item.id.clone()));
    }

    let size = params.gallery_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let composition = Composition::for_mode(item.audience.mode(), size);

    let mut chosen: Vec<&Person> = match composition.max_viewer_slots {
        None => s
            .contacts()
            .choose_multiple(&mut rng, composition.contact_slots)
            .collect(),
        Some(cap) => {
            let take_viewers = contact_viewers.len().min(cap);
            let take_others = contact_others
                .len()
                .min(composition.contact_slots - take_viewers);
            let mut picked: Vec<&Person> = contact_viewers
                .choose_multiple(&mut rng, take_viewers)
                .copied()
                .collect();
            picked.extend(
                contact_others
                    .choose_multiple(&mut rng, take_others)
                    .copied(),
            );
            picked
        }
    };

    let mut taken: BTreeSet<&PersonId> = chosen.iter().map(|p| &p.id).collect();
    taken.insert(&s.owner().id);
    let local: Vec<&Person> = s
        .strangers()
        .iter()
        .filter(|p| !taken.contains(&p.id) && !s.is_contact(&p.id))
        .collect();
    let needed = size - chosen.len();
    chosen.extend(
        local
            .choose_multiple(&mut rng, needed.min(local.len()))
            .copied(),
    );

    if chosen.len() < size {
        let known: BTreeSet<&PersonId> = chosen
            .iter()
            .map(|p| &p.id)
            .chain(std::iter::once(&s.owner().id))
            .chain(s.contacts().iter().map(|p| &p.id))
            .chain(s.strangers().iter().map(|p| &p.id))
            .collect();
        let extra: Vec<&Person> = pool.iter().filter(|p| !known.contains(&p.id)).collect();
        let needed = size - chosen.len();
        if extra.len() < needed {
            return Err(GameError::NotEnoughPersons {
                needed: size,
                available: chosen.len() + extra.len(),
            });
        }
        chosen.extend(extra.choose_multiple(&mut rng, needed).copied());
    }

    chosen.shuffle(&mut rng);
    Ok(chosen
        .into_iter()
        .map(|p| GalleryEntry {
            person: p.id.clone(),
            display_name: p.display_name.clone(),
            avatar_ref: p.avatar_ref.clone(),
            kind: if s.is_contact(&p.id) {
                PersonKind::Contact
            } else {
                PersonKind::Stranger
            },
            is_viewer: viewers.contains(&p.id),
        })
        .collect())
}
