//! Pushout diagnostics for spans of drag embeddings.
//!
//! A span is a base drag embedded into two hosts, each host given as the
//! product of the base with a rewriting extension. Drags do not always have
//! pushouts: an edge added by one leg consumes a root of the base, and a
//! second leg aiming at the same vertex may find none left. The root budget
//! test below is necessary for a pushout to exist; when it holds, the only
//! possible pushout object is the product of the base with the summed
//! contexts under the joined switchboard, and the candidate injections can
//! be checked for monomorphy separately. Condition success and construction
//! success are reported independently, since the condition is not known to
//! be sufficient.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{check_safe, product, sum, Switchboard};
use crate::drag::{Drag, VertexId};
use crate::morphism::VertexMap;
use crate::rewrite::RewritingExtension;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PushoutError {
    /// The root budget inequality fails at this base vertex: the joined
    /// composition would need more edges into it than it has roots.
    ConditionFailed { vertex: VertexId },
    /// The span itself is broken: overlapping contexts, a leg that does
    /// not compose, or wires that clash when joined.
    MalformedSpan { reason: String },
}

impl fmt::Display for PushoutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PushoutError::ConditionFailed { vertex } => {
                write!(f, "vertex {} lacks roots for the joined composition", vertex)
            }
            PushoutError::MalformedSpan { reason } => {
                write!(f, "malformed span: {}", reason)
            }
        }
    }
}

impl std::error::Error for PushoutError {}

fn malformed(reason: impl Into<String>) -> PushoutError {
    PushoutError::MalformedSpan { reason: reason.into() }
}

fn leg(d0: &Drag, e: &RewritingExtension) -> Result<Drag, PushoutError> {
    product(&e.context, d0, &e.switchboard)
        .map_err(|err| malformed(format!("a leg does not compose: {}", err)))
}

fn disjointness(
    d0: &Drag,
    e1: &RewritingExtension,
    e2: &RewritingExtension,
) -> Result<(), PushoutError> {
    if e1.context.vertex_ids().any(|v| e2.context.contains(v)) {
        return Err(malformed("the two contexts share a vertex"));
    }
    if e1.context.vertex_ids().chain(e2.context.vertex_ids()).any(|v| d0.contains(v)) {
        return Err(malformed("a context shares a vertex with the base"));
    }
    Ok(())
}

/// Edges a leg adds on top of the base, counted at one base vertex.
fn added_preds(v: VertexId, base: &Drag, leg: &Drag) -> usize {
    let in_leg = if leg.contains(v) { leg.pred_count(v) } else { 0 };
    in_leg.saturating_sub(base.pred_count(v))
}

fn condition_witness(d0: &Drag, d1: &Drag, d2: &Drag) -> Option<VertexId> {
    d0.vertex_ids()
        .find(|&v| d0.roots(v) < added_preds(v, d0, d1) + added_preds(v, d0, d2))
}

/// The root budget test: every base vertex must hold enough roots to pay
/// for the entering edges both legs add. Spans whose legs do not compose
/// or whose contexts overlap fail the test.
pub fn pushout_condition(
    d0: &Drag,
    e1: &RewritingExtension,
    e2: &RewritingExtension,
) -> bool {
    if disjointness(d0, e1, e2).is_err() {
        return false;
    }
    let (Ok(d1), Ok(d2)) = (leg(d0, e1), leg(d0, e2)) else {
        return false;
    };
    condition_witness(d0, &d1, &d2).is_none()
}

/// Maps a leg vertex into the joined object: surviving vertices keep their
/// identity, vertices that vanish in the join follow their wire chain.
fn resolve_into(v: VertexId, sb: &Switchboard, d3: &Drag) -> Option<VertexId> {
    let mut cur = v;
    for _ in 0..=sb.left.len() + sb.right.len() {
        if d3.contains(cur) {
            return Some(cur);
        }
        cur = sb.left.target_of(cur).or_else(|| sb.right.target_of(cur))?;
    }
    None
}

fn natural_injection(
    from: &Drag,
    d3: &Drag,
    sb: &Switchboard,
) -> Result<VertexMap, PushoutError> {
    let mut map = BTreeMap::new();
    for v in from.vertex_ids() {
        let image = resolve_into(v, sb, d3)
            .ok_or_else(|| malformed("a leg vertex has no image in the joined object"))?;
        map.insert(v, image);
    }
    Ok(VertexMap::new(from.clone(), d3.clone(), map))
}

/// The only candidate pushout object of the span: the base composed with
/// the summed contexts under the joined switchboard, together with the
/// natural injections from both legs. The injections are returned
/// unjudged; run them through the monomorphism checker to see whether the
/// candidate really completes the square. When the joined switchboard is
/// safe the object equals the sum of the two legs, shared base part and
/// all.
pub fn pushout_object(
    d0: &Drag,
    e1: &RewritingExtension,
    e2: &RewritingExtension,
) -> Result<(Drag, VertexMap, VertexMap), PushoutError> {
    disjointness(d0, e1, e2)?;
    let d1 = leg(d0, e1)?;
    let d2 = leg(d0, e2)?;
    if let Some(vertex) = condition_witness(d0, &d1, &d2) {
        return Err(PushoutError::ConditionFailed { vertex });
    }

    let joined_context = sum(&e1.context, &e2.context)
        .map_err(|err| malformed(format!("contexts do not sum: {}", err)))?;
    let left = e1
        .switchboard
        .left
        .union(&e2.switchboard.left)
        .map_err(|err| malformed(format!("left wires clash: {}", err)))?;
    let right = e1
        .switchboard
        .right
        .union(&e2.switchboard.right)
        .map_err(|err| malformed(format!("a base sprout is plugged twice: {}", err)))?;
    let sb = Switchboard::new(left, right);
    let d3 = product(&joined_context, d0, &sb)
        .map_err(|err| malformed(format!("the joined composition fails: {}", err)))?;

    let o1 = natural_injection(&d1, &d3, &sb)?;
    let o2 = natural_injection(&d2, &d3, &sb)?;
    // Safety alone does not force the legs to be summable: a base sprout
    // plugged by only one leg leaves the legs disagreeing on the shared
    // part. When safe and summable, the sum must be the object.
    debug_assert!(
        !matches!(check_safe(&e1.context, &e2.context, d0, &sb), Ok(true))
            || sum(&d1, &d2).map_or(true, |joined| joined == d3),
        "a safe summable join must distribute over the legs"
    );
    Ok((d3, o1, o2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WireSet;
    use crate::morphism::{check_monomorphism, is_morphism};
    use crate::text::parse_drag;

    fn v(d: &Drag, name: &str) -> VertexId {
        d.find_by_name(name).unwrap()
    }

    /// A context of one fresh symbol vertex aiming one edge at `target`.
    fn arrow_leg(symbol: &str, target: VertexId) -> RewritingExtension {
        let context =
            parse_drag(&format!("{{p{0}: {0}(s{0}); s{0}: $s{0}}}", symbol)).unwrap();
        let sprout = context.find_by_name(&format!("s{}", symbol)).unwrap();
        RewritingExtension {
            context,
            switchboard: Switchboard::new(
                WireSet::new([(sprout, target)]).unwrap(),
                WireSet::new([]).unwrap(),
            ),
        }
    }

    fn empty_leg() -> RewritingExtension {
        RewritingExtension {
            context: Drag::empty(),
            switchboard: Switchboard::default(),
        }
    }

    #[test]
    fn one_root_cannot_pay_for_two_entering_edges() {
        let d0 = parse_drag("{v: a[1]}").unwrap();
        let e1 = arrow_leg("f", v(&d0, "v"));
        let e2 = arrow_leg("g", v(&d0, "v"));
        assert!(!pushout_condition(&d0, &e1, &e2));
        assert_eq!(
            pushout_object(&d0, &e1, &e2).unwrap_err(),
            PushoutError::ConditionFailed { vertex: v(&d0, "v") }
        );
    }

    #[test]
    fn doubling_the_root_makes_the_span_complete() {
        let d0 = parse_drag("{v: a[2]}").unwrap();
        let e1 = arrow_leg("f", v(&d0, "v"));
        let e2 = arrow_leg("g", v(&d0, "v"));
        assert!(pushout_condition(&d0, &e1, &e2));
        let (d3, o1, o2) = pushout_object(&d0, &e1, &e2).unwrap();
        assert_eq!(d3.len(), 3);
        let a = v(&d3, "v");
        assert_eq!(d3.pred_count(a), 2);
        assert_eq!(d3.roots(a), 0);
        assert!(check_monomorphism(&o1));
        assert!(check_monomorphism(&o2));
        // Each leg keeps one root on the base vertex, the join spends both.
        assert_eq!(o1.source.roots(a), 1);
        assert_eq!(o2.source.roots(a), 1);
    }

    #[test]
    fn an_empty_context_leaves_the_other_leg_as_the_object() {
        let d0 = parse_drag("{v: a[1]}").unwrap();
        let e1 = arrow_leg("f", v(&d0, "v"));
        let e2 = empty_leg();
        assert!(pushout_condition(&d0, &e1, &e2));
        let (d3, o1, o2) = pushout_object(&d0, &e1, &e2).unwrap();
        assert_eq!(d3, product(&e1.context, &d0, &e1.switchboard).unwrap());
        assert!(check_monomorphism(&o1));
        assert!(check_monomorphism(&o2));
        assert!(o1.map.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn overlapping_contexts_are_rejected() {
        let d0 = parse_drag("{v: a[2]}").unwrap();
        let e1 = arrow_leg("f", v(&d0, "v"));
        assert!(!pushout_condition(&d0, &e1, &e1));
        assert!(matches!(
            pushout_object(&d0, &e1, &e1).unwrap_err(),
            PushoutError::MalformedSpan { .. }
        ));
    }

    #[test]
    fn a_plugged_base_sprout_resolves_through_the_join() {
        // The base plugs its sprout into the second context only; the
        // injection from the first leg must follow that wire.
        let d0 = parse_drag("{h: h[1](s); s: $s}").unwrap();
        let context = parse_drag("{c: c[1]}").unwrap();
        let c = context.find_by_name("c").unwrap();
        let e2 = RewritingExtension {
            context,
            switchboard: Switchboard::new(
                WireSet::new([]).unwrap(),
                WireSet::new([(v(&d0, "s"), c)]).unwrap(),
            ),
        };
        let e1 = empty_leg();
        let (d3, o1, o2) = pushout_object(&d0, &e1, &e2).unwrap();
        assert!(!d3.contains(v(&d0, "s")));
        assert_eq!(o1.map[&v(&d0, "s")], c);
        assert!(is_morphism(&o1));
        assert!(check_monomorphism(&o2));
        assert_eq!(d3.successors(v(&d0, "h")), [c]);
        assert_eq!(d3.roots(c), 0);
    }

    #[test]
    fn separated_targets_join_safely_and_distribute() {
        let d0 = parse_drag("{v: a[1]; u: b[1]}").unwrap();
        let e1 = arrow_leg("f", v(&d0, "v"));
        let e2 = arrow_leg("g", v(&d0, "u"));
        let d1 = product(&e1.context, &d0, &e1.switchboard).unwrap();
        let d2 = product(&e2.context, &d0, &e2.switchboard).unwrap();
        let joined = Switchboard::new(
            e1.switchboard.left.union(&e2.switchboard.left).unwrap(),
            WireSet::new([]).unwrap(),
        );
        assert_eq!(
            check_safe(&e1.context, &e2.context, &d0, &joined),
            Ok(true)
        );
        let (d3, o1, o2) = pushout_object(&d0, &e1, &e2).unwrap();
        assert_eq!(sum(&d1, &d2).unwrap(), d3);
        assert!(check_monomorphism(&o1));
        assert!(check_monomorphism(&o2));
    }

    // Any cocone of morphisms commuting over the span factors through the
    // object by exactly one vertex map.
    #[test]
    fn the_object_mediates_uniquely_into_small_cocones() {
        let d0 = parse_drag("{v: a[2]}").unwrap();
        let e1 = arrow_leg("f", v(&d0, "v"));
        let e2 = arrow_leg("g", v(&d0, "v"));
        let (d3, o1, o2) = pushout_object(&d0, &e1, &e2).unwrap();

        // The cocone: the object itself under its own injections.
        let t = d3.clone();
        let verts: Vec<VertexId> = d3.vertex_ids().collect();
        let images: Vec<VertexId> = t.vertex_ids().collect();
        let mut mediators = Vec::new();
        let mut stack = vec![Vec::<VertexId>::new()];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == verts.len() {
                let map: BTreeMap<VertexId, VertexId> =
                    verts.iter().copied().zip(prefix.iter().copied()).collect();
                let m = VertexMap::new(d3.clone(), t.clone(), map.clone());
                let commutes = o1.map.iter().all(|(a, b)| map[b] == o1.map[a])
                    && o2.map.iter().all(|(a, b)| map[b] == o2.map[a]);
                if commutes && is_morphism(&m) {
                    mediators.push(map);
                }
                continue;
            }
            for &im in &images {
                let mut next = prefix.clone();
                next.push(im);
                stack.push(next);
            }
        }
        assert_eq!(mediators.len(), 1);
        assert!(mediators[0].iter().all(|(a, b)| a == b));
    }
}
