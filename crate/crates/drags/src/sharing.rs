//! Maximal sharing of equal substructure.
//!
//! Sharing works on the subdrags generated by single vertices. Two such
//! subdrags are mergeable when their bare versions, roots ignored, are
//! equimorphic. A sharing step keeps one representative, redirects the
//! edges that reach the other member from outside, moves the member's
//! roots onto their images, and deletes what became unreachable. Merging
//! raises the indegree of shared vertices, so unlike every operation in
//! the algebra module this one does not preserve indegrees; it preserves
//! the multiset of roots and the set of variables.
//!
//! Classes are processed smallest first. That keeps the interior of every
//! merged member already maximally shared, which is what makes the step
//! order irrelevant up to equimorphism; the diamond property test pins
//! this down on generated drags.

use crate::drag::{Drag, VertexId};
use crate::morphism::{equimorphic, find_iso, BARE};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// One family of vertex-generated subdrags with pairwise bare-equimorphic
/// shapes. Members are the generated vertex sets, ordered by smallest id;
/// the first member is the representative that survives sharing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharingClass {
    pub members: Vec<BTreeSet<VertexId>>,
}

impl SharingClass {
    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    /// Vertex count of a member subdrag; all members agree.
    pub fn size(&self) -> usize {
        self.members.first().map_or(0, |m| m.len())
    }

    pub fn representative(&self) -> &BTreeSet<VertexId> {
        &self.members[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SharingError {
    /// The class is trivial, stale, or a smaller nontrivial class exists.
    NotMinimalClass { reason: String },
}

impl fmt::Display for SharingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SharingError::NotMinimalClass { reason } => {
                write!(f, "not a minimal nontrivial class: {}", reason)
            }
        }
    }
}

impl std::error::Error for SharingError {}

fn distinct_closures(d: &Drag) -> Vec<BTreeSet<VertexId>> {
    let mut seen: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    let mut out = Vec::new();
    for v in d.vertex_ids() {
        let c = d.accessible([v]);
        let key: Vec<VertexId> = c.iter().copied().collect();
        if seen.insert(key) {
            out.push(c);
        }
    }
    out
}

/// Groups the distinct vertex-generated subdrags by bare equimorphism.
/// Classes come smallest member first, ties by lowest generator id.
pub fn sharing_classes(d: &Drag) -> Vec<SharingClass> {
    let closures = distinct_closures(d);
    let mut buckets: Vec<(Drag, Vec<BTreeSet<VertexId>>)> = Vec::new();
    for c in closures {
        let sub = d.subdrag(c.iter().copied());
        match buckets
            .iter_mut()
            .find(|(rep, _)| find_iso(rep, &sub, BARE, &BTreeMap::new()).is_some())
        {
            Some((_, members)) => members.push(c),
            None => buckets.push((sub, vec![c])),
        }
    }
    let mut classes: Vec<SharingClass> = buckets
        .into_iter()
        .map(|(_, mut members)| {
            members.sort_by_key(|m| m.iter().next().copied());
            SharingClass { members }
        })
        .collect();
    classes.sort_by_key(|c| {
        (c.size(), c.members[0].iter().next().copied())
    });
    classes
}

/// No two distinct vertex-generated subdrags have equimorphic bare forms.
pub fn is_maximally_shared(d: &Drag) -> bool {
    sharing_classes(d).iter().all(|c| c.is_trivial())
}

/// Minimality of a nontrivial class: every strictly smaller subdrag inside
/// a member must already be alone in its own class.
fn check_minimal(d: &Drag, class: &SharingClass) -> Result<(), SharingError> {
    if class.is_trivial() {
        return Err(SharingError::NotMinimalClass { reason: "class is trivial".into() });
    }
    let all = sharing_classes(d);
    if !all.iter().any(|c| c == class) {
        return Err(SharingError::NotMinimalClass {
            reason: "class does not belong to this drag".into(),
        });
    }
    for m in &class.members {
        for &v in m.iter() {
            let inner = d.accessible([v]);
            if inner == *m {
                continue;
            }
            let owner = all
                .iter()
                .find(|c| c.members.contains(&inner))
                .expect("closures are classified");
            if !owner.is_trivial() {
                return Err(SharingError::NotMinimalClass {
                    reason: "a member contains a smaller shareable subdrag".into(),
                });
            }
        }
    }
    Ok(())
}

/// Merges the lowest-id non-representative member of a minimal nontrivial
/// class into the representative.
pub fn share_step(d: &Drag, class: &SharingClass) -> Result<Drag, SharingError> {
    check_minimal(d, class)?;
    let kept = &class.members[0];
    let merged = &class.members[1];
    let sub_m = d.subdrag(merged.iter().copied());
    let sub_k = d.subdrag(kept.iter().copied());
    // Members may overlap; the identity pin keeps shared structure in
    // place. A cyclic overlap can force a non-identity matching, in which
    // case any bare equimorphism does.
    let pinned: BTreeMap<VertexId, VertexId> = merged
        .intersection(kept)
        .map(|&v| (v, v))
        .collect();
    let o = find_iso(&sub_m, &sub_k, BARE, &pinned)
        .or_else(|| find_iso(&sub_m, &sub_k, BARE, &BTreeMap::new()))
        .ok_or_else(|| SharingError::NotMinimalClass {
            reason: "members are not bare-equimorphic".into(),
        })?;

    let mut out = d.clone();
    for e in d.edges() {
        if merged.contains(&e.head)
            && !merged.contains(&e.tail)
            && !kept.contains(&e.tail)
        {
            out.set_successor(e.tail, e.index, o[&e.head]);
        }
    }
    for &v in merged.iter() {
        if !kept.contains(&v) {
            out.add_roots(o[&v], d.roots(v));
            out.remove_vertex(v);
        }
    }
    Ok(out)
}

/// Iterates sharing steps, smallest class first, to the unique fixpoint.
/// The trace holds the drag after each step.
pub fn shared_normal_form_trace(d: &Drag) -> (Drag, Vec<Drag>) {
    let mut cur = d.clone();
    let mut trace = Vec::new();
    while let Some(class) = sharing_classes(&cur).into_iter().find(|c| !c.is_trivial()) {
        let next = share_step(&cur, &class).expect("smallest nontrivial class is minimal");
        trace.push(next.clone());
        cur = next;
    }
    (cur, trace)
}

pub fn shared_normal_form(d: &Drag) -> Drag {
    shared_normal_form_trace(d).0
}

/// Drags are sharing-equivalent when their maximally shared forms are
/// equimorphic, roots included.
pub fn sharing_equivalent(a: &Drag, b: &Drag) -> bool {
    equimorphic(&shared_normal_form(a), &shared_normal_form(b))
}
