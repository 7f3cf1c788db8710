//! The drag algebra: sum, wiring and the composition product.
//!
//! Sum glues two drags along their shared vertices. Sharing an edge is free;
//! an edge present on one side only consumes a root of its head on the other
//! side, which is what keeps indegrees stable. Two drags are compatible when
//! their shared part agrees structurally and every shared vertex has enough
//! indegree to pay for the union of incoming edges.
//!
//! Wiring plugs sprouts into other vertices. A wire `s ~> r` removes the
//! sprout s, re-aims the edges that entered s at r, and spends pred(s) of
//! r's roots. A wire set is well behaved when no sprout is wired twice, no
//! chain of wires loops, and every target can pay for all the plugs that
//! reach it through chains. Well behaved wirings can be applied one maximal
//! wire at a time in any order without changing the outcome; the property
//! tests pin that down.
//!
//! The product composes two disjoint drags across a switchboard (a wire set
//! in each direction). In debug builds the product is computed twice, by
//! recursive elimination and by the direct resolution formula, and the two
//! answers are compared; release builds run only the direct form.

use crate::drag::{Drag, VertexId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireError {
    /// A sprout is the origin of two wires.
    DuplicateOrigin { origin: VertexId },
    /// The target cannot pay for the plugs that reach it.
    InsufficientRoots { target: VertexId, needed: usize, available: usize },
    /// Wires chain back onto themselves; the cycle is reported in order.
    SproutCycle { cycle: Vec<VertexId> },
    /// A wire references a vertex missing from the drag.
    UnknownVertex { vertex: VertexId },
    /// A wire starts at an internal vertex.
    OriginNotSprout { origin: VertexId },
    /// A wire may not plug a sprout into itself.
    SelfWire { origin: VertexId },
}

impl fmt::Display for WireError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireError::DuplicateOrigin { origin } => {
                write!(f, "sprout {} is wired twice", origin)
            }
            WireError::InsufficientRoots { target, needed, available } => write!(
                f,
                "target {} needs {} roots for its plugs but has {}",
                target, needed, available
            ),
            WireError::SproutCycle { cycle } => {
                let names: Vec<String> = cycle.iter().map(|v| v.to_string()).collect();
                write!(f, "wires cycle through {}", names.join(" ~> "))
            }
            WireError::UnknownVertex { vertex } => {
                write!(f, "wire references unknown vertex {}", vertex)
            }
            WireError::OriginNotSprout { origin } => {
                write!(f, "wire origin {} is not a sprout", origin)
            }
            WireError::SelfWire { origin } => {
                write!(f, "sprout {} wired to itself", origin)
            }
        }
    }
}

impl std::error::Error for WireError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    /// Sum of drags whose shared part disagrees.
    IncompatibleDrags { reason: String },
    /// Product factors must not share vertices.
    NotDisjoint { vertex: VertexId },
    /// The union of the two wire directions is not well behaved.
    NotASwitchboard(WireError),
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::IncompatibleDrags { reason } => {
                write!(f, "incompatible drags: {}", reason)
            }
            AlgebraError::NotDisjoint { vertex } => {
                write!(f, "product factors share vertex {}", vertex)
            }
            AlgebraError::NotASwitchboard(e) => write!(f, "not a switchboard: {}", e),
        }
    }
}

impl std::error::Error for AlgebraError {}

impl From<WireError> for AlgebraError {
    fn from(e: WireError) -> AlgebraError {
        AlgebraError::NotASwitchboard(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Wire {
    pub origin: VertexId,
    pub target: VertexId,
}

/// A finite map from sprouts to plug targets, kept sorted by origin.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WireSet {
    wires: Vec<Wire>,
}

impl WireSet {
    pub fn empty() -> WireSet {
        WireSet { wires: Vec::new() }
    }

    pub fn new<I: IntoIterator<Item = (VertexId, VertexId)>>(
        pairs: I,
    ) -> Result<WireSet, WireError> {
        let mut wires: Vec<Wire> =
            pairs.into_iter().map(|(origin, target)| Wire { origin, target }).collect();
        wires.sort();
        for pair in wires.windows(2) {
            if pair[0].origin == pair[1].origin {
                return Err(WireError::DuplicateOrigin { origin: pair[0].origin });
            }
        }
        for w in &wires {
            if w.origin == w.target {
                return Err(WireError::SelfWire { origin: w.origin });
            }
        }
        Ok(WireSet { wires })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Wire> {
        self.wires.iter()
    }

    pub fn len(&self) -> usize {
        self.wires.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wires.is_empty()
    }

    pub fn target_of(&self, origin: VertexId) -> Option<VertexId> {
        self.wires.iter().find(|w| w.origin == origin).map(|w| w.target)
    }

    pub fn origins(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.wires.iter().map(|w| w.origin)
    }

    pub fn union(&self, other: &WireSet) -> Result<WireSet, WireError> {
        WireSet::new(
            self.iter().chain(other.iter()).map(|w| (w.origin, w.target)),
        )
    }
}

/// Wires for a product: `left` plugs sprouts of the first factor into the
/// second, `right` the other way around.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Switchboard {
    pub left: WireSet,
    pub right: WireSet,
}

impl Switchboard {
    pub fn new(left: WireSet, right: WireSet) -> Switchboard {
        Switchboard { left, right }
    }

    pub fn flip(&self) -> Switchboard {
        Switchboard { left: self.right.clone(), right: self.left.clone() }
    }

    pub fn combined(&self) -> Result<WireSet, WireError> {
        self.left.union(&self.right)
    }
}

/// Compatibility for sums: the shared vertices must carry the same labels
/// and successor lists in both drags, agree on indegree, and be able to pay
/// for the union of their incoming edges.
pub fn check_compatible(a: &Drag, b: &Drag) -> Result<(), AlgebraError> {
    let shared: Vec<VertexId> = a.vertex_ids().filter(|v| b.contains(*v)).collect();
    for &v in &shared {
        if a.label(v) != b.label(v) {
            return Err(AlgebraError::IncompatibleDrags {
                reason: format!("labels of shared vertex {} differ", a.name(v)),
            });
        }
        if a.successors(v) != b.successors(v) {
            return Err(AlgebraError::IncompatibleDrags {
                reason: format!("successors of shared vertex {} differ", a.name(v)),
            });
        }
        if a.indegree(v) != b.indegree(v) {
            return Err(AlgebraError::IncompatibleDrags {
                reason: format!(
                    "indegree of shared vertex {} differs ({} vs {})",
                    a.name(v),
                    a.indegree(v),
                    b.indegree(v)
                ),
            });
        }
    }
    // Successor closure: an edge of one side whose tail is shared is an edge
    // of both sides (successor equality above), so its head is shared too.
    // What remains is the root budget at each shared vertex.
    for &v in &shared {
        let union_preds = union_pred_count(a, b, v);
        if union_preds > a.indegree(v) {
            return Err(AlgebraError::IncompatibleDrags {
                reason: format!(
                    "shared vertex {} receives {} edges in the union but has indegree {}",
                    a.name(v),
                    union_preds,
                    a.indegree(v)
                ),
            });
        }
    }
    Ok(())
}

pub fn compatible(a: &Drag, b: &Drag) -> bool {
    check_compatible(a, b).is_ok()
}

/// Incoming edges of v in the union graph. Edges are identified by
/// (tail, position), so an edge present on both sides counts once.
fn union_pred_count(a: &Drag, b: &Drag, v: VertexId) -> usize {
    let mut seen: BTreeSet<(VertexId, usize)> = BTreeSet::new();
    for e in a.edges() {
        if e.head == v {
            seen.insert((e.tail, e.index));
        }
    }
    for e in b.edges() {
        if e.head == v {
            seen.insert((e.tail, e.index));
        }
    }
    seen.len()
}

/// Glues two compatible drags along their shared vertices. Indegrees are
/// preserved: a shared vertex pays one root for every incoming edge the
/// other side adds.
pub fn sum(a: &Drag, b: &Drag) -> Result<Drag, AlgebraError> {
    check_compatible(a, b)?;
    let mut out = a.clone();
    for v in b.vertex_ids() {
        if !out.contains(v) {
            out.insert_data(v, b.data(v).clone());
        }
    }
    for v in a.vertex_ids().filter(|v| b.contains(*v)) {
        let roots = a.indegree(v) - union_pred_count(a, b, v);
        out.set_roots(v, roots);
    }
    debug_assert!(out.validate().is_ok());
    Ok(out)
}

/// The subdrag of the sum generated by the shared vertices.
pub fn intersection(a: &Drag, b: &Drag) -> Result<Drag, AlgebraError> {
    let s = sum(a, b)?;
    let shared: Vec<VertexId> = a.vertex_ids().filter(|v| b.contains(*v)).collect();
    Ok(s.subdrag(shared))
}

fn wire_sanity(d: &Drag, ws: &WireSet) -> Result<(), WireError> {
    for w in ws.iter() {
        if !d.contains(w.origin) {
            return Err(WireError::UnknownVertex { vertex: w.origin });
        }
        if !d.contains(w.target) {
            return Err(WireError::UnknownVertex { vertex: w.target });
        }
        if !d.is_sprout(w.origin) {
            return Err(WireError::OriginNotSprout { origin: w.origin });
        }
    }
    Ok(())
}

/// All origins that chain to `v` through the wire set, `v` excluded.
fn chained_origins(ws: &WireSet, v: VertexId) -> Vec<VertexId> {
    let mut into: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for w in ws.iter() {
        into.entry(w.target).or_default().push(w.origin);
    }
    let mut out = Vec::new();
    let mut stack = vec![v];
    let mut seen = BTreeSet::new();
    while let Some(t) = stack.pop() {
        for &o in into.get(&t).into_iter().flatten() {
            if seen.insert(o) {
                out.push(o);
                stack.push(o);
            }
        }
    }
    out
}

/// Functionality, acyclicity and the root budget along chains:
/// at every wire target r, the predecessors of all sprouts that reach r
/// through chains of wires fit into r's roots.
pub fn check_well_behaved(d: &Drag, ws: &WireSet) -> Result<(), WireError> {
    wire_sanity(d, ws)?;
    // Cycle detection along origin -> target hops.
    for start in ws.origins() {
        let mut path = vec![start];
        let mut cur = start;
        while let Some(next) = ws.target_of(cur) {
            if let Some(i) = path.iter().position(|&v| v == next) {
                return Err(WireError::SproutCycle { cycle: path[i..].to_vec() });
            }
            path.push(next);
            cur = next;
        }
    }
    for w in ws.iter() {
        let t = w.target;
        let needed: usize = chained_origins(ws, t).iter().map(|&o| d.pred_count(o)).sum();
        if needed > d.roots(t) {
            return Err(WireError::InsufficientRoots {
                target: t,
                needed,
                available: d.roots(t),
            });
        }
    }
    Ok(())
}

/// Applies one wire: re-aims the edges entering the origin at the target,
/// spends pred(origin) of the target's roots, and drops the origin together
/// with its own roots.
pub fn elementary_wiring(d: &Drag, wire: Wire) -> Result<Drag, WireError> {
    let ws = WireSet::new([(wire.origin, wire.target)])?;
    wire_sanity(d, &ws)?;
    let preds = d.pred_count(wire.origin);
    if preds > d.roots(wire.target) {
        return Err(WireError::InsufficientRoots {
            target: wire.target,
            needed: preds,
            available: d.roots(wire.target),
        });
    }
    let mut out = d.clone();
    out.redirect_edges_into(wire.origin, wire.target);
    out.set_roots(wire.target, out.roots(wire.target) - preds);
    out.remove_vertex(wire.origin);
    Ok(out)
}

/// Applies a whole well behaved wire set by repeatedly taking a maximal
/// wire (one whose origin is not the target of a remaining wire). The
/// outcome does not depend on the elimination order; ties go to the lowest
/// origin id for determinism.
pub fn wiring(d: &Drag, ws: &WireSet) -> Result<Drag, WireError> {
    check_well_behaved(d, ws)?;
    let mut out = d.clone();
    let mut remaining: Vec<Wire> = ws.iter().copied().collect();
    while !remaining.is_empty() {
        let targets: BTreeSet<VertexId> = remaining.iter().map(|w| w.target).collect();
        let pick = remaining
            .iter()
            .position(|w| !targets.contains(&w.origin))
            .expect("acyclic wire sets always have a maximal wire");
        let wire = remaining.remove(pick);
        out = elementary_wiring(&out, wire)?;
    }
    Ok(out)
}

/// Follows wires from `v` to the vertex that finally receives its plugs,
/// returning it with its post-wiring root count.
pub fn resolution(d: &Drag, ws: &WireSet, v: VertexId) -> Result<(VertexId, usize), WireError> {
    check_well_behaved(d, ws)?;
    let mut cur = v;
    while let Some(next) = ws.target_of(cur) {
        cur = next;
    }
    let spent: usize = chained_origins(ws, cur).iter().map(|&o| d.pred_count(o)).sum();
    Ok((cur, d.roots(cur) - spent))
}

/// Coherence: wiring must treat all sprouts of one variable alike. Requires
/// fullness (a variable is wired completely or not at all) and, for every
/// wired variable, that the final plug targets generate equimorphic
/// subdrags of the wired result.
pub fn check_coherent(d: &Drag, ws: &WireSet) -> Result<bool, WireError> {
    check_well_behaved(d, ws)?;
    if !check_fullness(d, ws) {
        return Ok(false);
    }
    let dw = wiring(d, ws)?;
    for var in d.variables() {
        let wired: Vec<VertexId> = d
            .sprouts_of(&var)
            .into_iter()
            .filter(|s| ws.target_of(*s).is_some())
            .collect();
        if wired.len() < 2 {
            continue;
        }
        let mut reps: Vec<VertexId> = Vec::new();
        for s in wired {
            let (r, _) = resolution(d, ws, s)?;
            reps.push(r);
        }
        if !pairwise_equimorphic_subdrags(&dw, &reps) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strong coherence compares the direct wire targets inside the original
/// drag instead of the resolutions inside the wired one.
pub fn check_strongly_coherent(d: &Drag, ws: &WireSet) -> Result<bool, WireError> {
    check_well_behaved(d, ws)?;
    if !check_fullness(d, ws) {
        return Ok(false);
    }
    for var in d.variables() {
        let targets: Vec<VertexId> = d
            .sprouts_of(&var)
            .into_iter()
            .filter_map(|s| ws.target_of(s))
            .collect();
        if targets.len() < 2 {
            continue;
        }
        if !pairwise_equimorphic_subdrags(d, &targets) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_fullness(d: &Drag, ws: &WireSet) -> bool {
    for var in d.variables() {
        let sprouts = d.sprouts_of(&var);
        let wired = sprouts.iter().filter(|s| ws.target_of(**s).is_some()).count();
        if wired != 0 && wired != sprouts.len() {
            return false;
        }
    }
    true
}

fn pairwise_equimorphic_subdrags(d: &Drag, vs: &[VertexId]) -> bool {
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            if a == b {
                continue;
            }
            let da = d.subdrag([a]);
            let db = d.subdrag([b]);
            if crate::morphism::find_iso(&da, &db, crate::morphism::EQUI, &BTreeMap::new())
                .is_none()
            {
                return false;
            }
        }
    }
    true
}

fn check_switchboard_shape(a: &Drag, b: &Drag, sb: &Switchboard) -> Result<(), AlgebraError> {
    for w in sb.left.iter() {
        if !a.contains(w.origin) || !a.is_sprout(w.origin) {
            return Err(AlgebraError::NotASwitchboard(WireError::OriginNotSprout {
                origin: w.origin,
            }));
        }
        if !b.contains(w.target) {
            return Err(AlgebraError::NotASwitchboard(WireError::UnknownVertex {
                vertex: w.target,
            }));
        }
    }
    for w in sb.right.iter() {
        if !b.contains(w.origin) || !b.is_sprout(w.origin) {
            return Err(AlgebraError::NotASwitchboard(WireError::OriginNotSprout {
                origin: w.origin,
            }));
        }
        if !a.contains(w.target) {
            return Err(AlgebraError::NotASwitchboard(WireError::UnknownVertex {
                vertex: w.target,
            }));
        }
    }
    Ok(())
}

/// Composition product of two disjoint drags across a switchboard.
///
/// Both factors keep their surviving vertices and ids. Coherence is not
/// enforced here; callers that need it run [`check_coherent`] first.
pub fn product(a: &Drag, b: &Drag, sb: &Switchboard) -> Result<Drag, AlgebraError> {
    if let Some(v) = a.vertex_ids().find(|v| b.contains(*v)) {
        return Err(AlgebraError::NotDisjoint { vertex: v });
    }
    check_switchboard_shape(a, b, sb)?;
    let all = sb.combined().map_err(AlgebraError::NotASwitchboard)?;
    let joined = a.juxtapose(b);
    check_well_behaved(&joined, &all).map_err(AlgebraError::NotASwitchboard)?;

    let direct = product_direct(&joined, &all);
    #[cfg(debug_assertions)]
    {
        let recursive = wiring(&joined, &all).expect("well behaved wire sets apply");
        debug_assert_eq!(
            direct, recursive,
            "direct and recursive products must agree"
        );
    }
    Ok(direct)
}

/// Resolution formula for the product: drop all wire origins, re-aim edges
/// at resolutions, and charge each surviving vertex for the plugs that
/// resolve to it.
fn product_direct(joined: &Drag, all: &WireSet) -> Drag {
    let removed: BTreeSet<VertexId> = all.origins().collect();
    let mut res: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for o in all.origins() {
        let mut cur = o;
        while let Some(next) = all.target_of(cur) {
            cur = next;
        }
        res.insert(o, cur);
    }
    let mut out = Drag::empty();
    for v in joined.vertex_ids() {
        if removed.contains(&v) {
            continue;
        }
        let successors = joined
            .successors(v)
            .iter()
            .map(|w| *res.get(w).unwrap_or(w))
            .collect();
        let spent: usize = res
            .iter()
            .filter(|(_, &r)| r == v)
            .map(|(&o, _)| joined.pred_count(o))
            .sum();
        out.insert_vertex(
            v,
            joined.name(v).to_string(),
            joined.label(v).clone(),
            successors,
            joined.roots(v) - spent,
        );
    }
    out
}

/// Safety of a switchboard for a product with a sum, `(d + e) * c`. Safe
/// switchboards distribute: the product can be taken against d and e
/// separately and the results summed.
///
/// With g the part shared by d and e, and h the subdrag of c generated by
/// the targets of g's wires, safety demands that h only wires back into g,
/// that separate plugs of d and e meeting at a common target do so inside
/// h, and that no chain bounces from the private part of d through c into
/// the private part of e (or the other way around).
pub fn check_safe(d: &Drag, e: &Drag, c: &Drag, sb: &Switchboard) -> Result<bool, AlgebraError> {
    let g: BTreeSet<VertexId> = d.vertex_ids().filter(|v| e.contains(*v)).collect();
    let joined = sum(d, e)?;
    check_switchboard_shape(&joined, c, sb)?;

    let g_targets: Vec<VertexId> = sb
        .left
        .iter()
        .filter(|w| g.contains(&w.origin))
        .map(|w| w.target)
        .collect();
    let h: BTreeSet<VertexId> = c.accessible(g_targets);

    // (1) wires out of h land in g.
    for w in sb.right.iter() {
        if h.contains(&w.origin) && !g.contains(&w.target) {
            return Ok(false);
        }
    }

    // (2) private plugs of d and e that meet do so inside h.
    for wd in sb.left.iter() {
        if !d.contains(wd.origin) || g.contains(&wd.origin) {
            continue;
        }
        for we in sb.left.iter() {
            if !e.contains(we.origin) || g.contains(&we.origin) {
                continue;
            }
            if wd.target == we.target && !h.contains(&wd.target) {
                return Ok(false);
            }
        }
    }

    // (3) no bounce: private d, through c, into private e; and symmetric.
    let private_d: BTreeSet<VertexId> = {
        let reach = d.accessible(g.iter().copied());
        d.vertex_ids().filter(|v| !reach.contains(v)).collect()
    };
    let private_e: BTreeSet<VertexId> = {
        let reach = e.accessible(g.iter().copied());
        e.vertex_ids().filter(|v| !reach.contains(v)).collect()
    };
    for w in sb.left.iter() {
        let (from_d, from_e) =
            (private_d.contains(&w.origin), private_e.contains(&w.origin));
        if !from_d && !from_e {
            continue;
        }
        if let Some(back) = sb.right.target_of(w.target) {
            if from_d && private_e.contains(&back) {
                return Ok(false);
            }
            if from_e && private_d.contains(&back) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Regroups the wires of a nested product `(d * c) * e` as `d * (c * e)`.
/// Returns the switchboard for the inner product `c * e` and, given its
/// result, the outer one. Wire targets that disappear inside the inner
/// product are re-aimed at their resolutions.
pub fn reassociate(
    d: &Drag,
    c: &Drag,
    e: &Drag,
    outer_first: &Switchboard,
    outer_second: &Switchboard,
) -> Result<(Switchboard, Switchboard), AlgebraError> {
    // Classify every wire by which factors it connects.
    let mut ce_pairs: Vec<(VertexId, VertexId)> = Vec::new();
    let mut d_side: Vec<(VertexId, VertexId)> = Vec::new();
    let all: Vec<Wire> = outer_first
        .left
        .iter()
        .chain(outer_first.right.iter())
        .chain(outer_second.left.iter())
        .chain(outer_second.right.iter())
        .copied()
        .collect();
    for w in &all {
        let origin_in = |x: &Drag| x.contains(w.origin);
        let target_in = |x: &Drag| x.contains(w.target);
        if (origin_in(c) && target_in(e)) || (origin_in(e) && target_in(c)) {
            ce_pairs.push((w.origin, w.target));
        } else if origin_in(d) || target_in(d) {
            d_side.push((w.origin, w.target));
        } else {
            return Err(AlgebraError::NotASwitchboard(WireError::UnknownVertex {
                vertex: w.origin,
            }));
        }
    }
    let inner_left = WireSet::new(
        ce_pairs.iter().filter(|(o, _)| c.contains(*o)).copied(),
    )?;
    let inner_right = WireSet::new(
        ce_pairs.iter().filter(|(o, _)| e.contains(*o)).copied(),
    )?;
    let inner = Switchboard::new(inner_left, inner_right);
    let inner_all = inner.combined()?;

    // Outer wires chase their targets through the inner eliminations.
    let resolve = |v: VertexId| {
        let mut cur = v;
        while let Some(next) = inner_all.target_of(cur) {
            cur = next;
        }
        cur
    };
    let outer_left = WireSet::new(
        d_side
            .iter()
            .filter(|(o, _)| d.contains(*o))
            .map(|&(o, t)| (o, resolve(t))),
    )?;
    let outer_right = WireSet::new(
        d_side
            .iter()
            .filter(|(o, _)| !d.contains(*o))
            .map(|&(o, t)| (o, resolve(t))),
    )?;
    Ok((inner, Switchboard::new(outer_left, outer_right)))
}
