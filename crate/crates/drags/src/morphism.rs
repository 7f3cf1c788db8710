//! Maps between drags.
//!
//! The strongest relation here is equimorphism: a bijection preserving
//! labels, root counts and positioned edges. Variable names count as labels,
//! so sprouts over different variables never correspond; display names do
//! not count. Bare equimorphism additionally ignores root counts, and
//! [`same_up_to_names`] additionally requires display names to agree (useful
//! when comparing against hand written literals).
//!
//! A plain morphism is weaker than a graph homomorphism in one direction and
//! stronger in another: several vertices may collapse onto one, but
//! indegrees must add up, and equimorphic generated subdrags must stay
//! equimorphic after mapping. Monomorphisms (injective on internal vertices
//! and on isolated sprouts) are the match maps used by rewriting.

use crate::drag::{Drag, Edge, Label, VertexId};
use std::collections::{BTreeMap, BTreeSet};

/// A vertex map between two owned drags. Nothing is checked at construction;
/// the check functions below classify it.
#[derive(Clone, Debug)]
pub struct VertexMap {
    pub source: Drag,
    pub target: Drag,
    pub map: BTreeMap<VertexId, VertexId>,
}

impl VertexMap {
    pub fn new(source: Drag, target: Drag, map: BTreeMap<VertexId, VertexId>) -> VertexMap {
        VertexMap { source, target, map }
    }

    pub fn apply(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(&v).copied()
    }

    pub fn is_total(&self) -> bool {
        self.source.vertex_ids().all(|v| {
            self.map.get(&v).map(|w| self.target.contains(*w)).unwrap_or(false)
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct IsoOpts {
    pub roots: bool,
    pub names: bool,
    pub vars: bool,
}

pub(crate) const EQUI: IsoOpts = IsoOpts { roots: true, names: false, vars: true };
pub(crate) const BARE: IsoOpts = IsoOpts { roots: false, names: false, vars: true };
pub(crate) const NAMED: IsoOpts = IsoOpts { roots: true, names: true, vars: true };
/// Variables may be renamed, but the renaming must be a bijection.
pub(crate) const RENAMED: IsoOpts = IsoOpts { roots: true, names: false, vars: false };
/// Neither roots nor variable names count; only labeled shape does.
pub(crate) const SHAPE: IsoOpts = IsoOpts { roots: false, names: false, vars: false };

fn label_key(d: &Drag, v: VertexId, opts: IsoOpts) -> (bool, String, usize) {
    match d.label(v) {
        Label::Var(x) => (true, if opts.vars { x.clone() } else { String::new() }, 0),
        Label::Internal { symbol } => (false, symbol.clone(), d.successors(v).len()),
    }
}

fn vertex_compatible(a: &Drag, b: &Drag, va: VertexId, vb: VertexId, opts: IsoOpts) -> bool {
    if label_key(a, va, opts) != label_key(b, vb, opts) {
        return false;
    }
    if opts.roots && a.roots(va) != b.roots(vb) {
        return false;
    }
    if opts.names && a.name(va) != b.name(vb) {
        return false;
    }
    a.pred_count(va) == b.pred_count(vb)
}

#[derive(Clone)]
struct IsoState {
    map: BTreeMap<VertexId, VertexId>,
    rev: BTreeMap<VertexId, VertexId>,
    vars: BTreeMap<String, String>,
    vars_rev: BTreeMap<String, String>,
}

impl IsoState {
    /// Extends the state by `va -> vb` and forces successors pointwise.
    /// Returns false on any conflict.
    fn assign(
        &mut self,
        a: &Drag,
        b: &Drag,
        va: VertexId,
        vb: VertexId,
        opts: IsoOpts,
        allowed: &dyn Fn(VertexId, VertexId) -> bool,
    ) -> bool {
        if let Some(&w) = self.map.get(&va) {
            return w == vb;
        }
        if self.rev.contains_key(&vb) {
            return false;
        }
        if !vertex_compatible(a, b, va, vb, opts) || !allowed(va, vb) {
            return false;
        }
        if !opts.vars {
            if let (Some(x), Some(y)) = (a.variable(va), b.variable(vb)) {
                match (self.vars.get(x), self.vars_rev.get(y)) {
                    (Some(y0), _) if y0 != y => return false,
                    (_, Some(x0)) if x0 != x => return false,
                    _ => {
                        self.vars.insert(x.to_string(), y.to_string());
                        self.vars_rev.insert(y.to_string(), x.to_string());
                    }
                }
            }
        }
        self.map.insert(va, vb);
        self.rev.insert(vb, va);
        let sa: Vec<VertexId> = a.successors(va).to_vec();
        let sb: Vec<VertexId> = b.successors(vb).to_vec();
        debug_assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.into_iter().zip(sb) {
            if !self.assign(a, b, x, y, opts, allowed) {
                return false;
            }
        }
        true
    }
}

fn iso_search(
    a: &Drag,
    b: &Drag,
    opts: IsoOpts,
    state: IsoState,
    allowed: &dyn Fn(VertexId, VertexId) -> bool,
) -> Option<BTreeMap<VertexId, VertexId>> {
    let next = a.vertex_ids().find(|v| !state.map.contains_key(v));
    let va = match next {
        None => return Some(state.map),
        Some(v) => v,
    };
    for vb in b.vertex_ids() {
        if state.rev.contains_key(&vb) {
            continue;
        }
        let mut branch = state.clone();
        if branch.assign(a, b, va, vb, opts, allowed) {
            if let Some(done) = iso_search(a, b, opts, branch, allowed) {
                return Some(done);
            }
        }
    }
    None
}

/// Searches for a bijection witnessing equimorphism (or a weaker variant,
/// per `opts`). `pinned` pre-commits part of the map; entries that cannot be
/// honored make the search fail.
pub(crate) fn find_iso(
    a: &Drag,
    b: &Drag,
    opts: IsoOpts,
    pinned: &BTreeMap<VertexId, VertexId>,
) -> Option<BTreeMap<VertexId, VertexId>> {
    find_iso_constrained(a, b, opts, pinned, &|_, _| true)
}

/// [`find_iso`] with a veto on candidate pairs. The closure must be a
/// per-pair predicate; returning false prunes that branch only.
pub(crate) fn find_iso_constrained(
    a: &Drag,
    b: &Drag,
    opts: IsoOpts,
    pinned: &BTreeMap<VertexId, VertexId>,
    allowed: &dyn Fn(VertexId, VertexId) -> bool,
) -> Option<BTreeMap<VertexId, VertexId>> {
    if a.len() != b.len() || a.edge_count() != b.edge_count() {
        return None;
    }
    let mut sig_a: Vec<(bool, String, usize)> =
        a.vertex_ids().map(|v| label_key(a, v, opts)).collect();
    let mut sig_b: Vec<(bool, String, usize)> =
        b.vertex_ids().map(|v| label_key(b, v, opts)).collect();
    sig_a.sort();
    sig_b.sort();
    if sig_a != sig_b {
        return None;
    }
    let mut state = IsoState {
        map: BTreeMap::new(),
        rev: BTreeMap::new(),
        vars: BTreeMap::new(),
        vars_rev: BTreeMap::new(),
    };
    for (&va, &vb) in pinned {
        if !state.assign(a, b, va, vb, opts, allowed) {
            return None;
        }
    }
    iso_search(a, b, opts, state, allowed)
}

/// True iff the given total map is an equimorphism: bijective, label and
/// root preserving, and edge preserving position by position.
pub fn check_equimorphism(m: &VertexMap) -> bool {
    if !m.is_total() || m.map.len() != m.source.len() {
        return false;
    }
    let images: BTreeSet<VertexId> = m.map.values().copied().collect();
    if images.len() != m.target.len() || m.source.len() != m.target.len() {
        return false;
    }
    for v in m.source.vertex_ids() {
        let w = m.map[&v];
        if !vertex_compatible(&m.source, &m.target, v, w, EQUI) {
            return false;
        }
        let mapped: Vec<VertexId> = m.source.successors(v).iter().map(|x| m.map[x]).collect();
        if mapped != m.target.successors(w) {
            return false;
        }
    }
    true
}

pub fn find_equimorphism(a: &Drag, b: &Drag) -> Option<VertexMap> {
    find_iso(a, b, EQUI, &BTreeMap::new())
        .map(|map| VertexMap::new(a.clone(), b.clone(), map))
}

pub fn equimorphic(a: &Drag, b: &Drag) -> bool {
    find_iso(a, b, EQUI, &BTreeMap::new()).is_some()
}

/// Equimorphism with root counts ignored.
pub fn bare_equimorphic(a: &Drag, b: &Drag) -> bool {
    find_iso(a, b, BARE, &BTreeMap::new()).is_some()
}

/// Equimorphism that also matches display names. Strict enough to compare a
/// computed drag against a hand written literal.
pub fn same_up_to_names(a: &Drag, b: &Drag) -> bool {
    find_iso(a, b, NAMED, &BTreeMap::new()).is_some()
}

/// Outcome of [`check_morphism`]: empty `failures` means the map is a
/// morphism. `ambiguous_sprouts` flags sprouts whose image coincides with
/// the image of an internal vertex; such maps are legal but the indegree
/// bookkeeping at the shared image deserves a second look at call sites.
#[derive(Debug, Clone)]
pub struct MorphismReport {
    pub failures: Vec<String>,
    pub ambiguous_sprouts: Vec<VertexId>,
}

impl MorphismReport {
    pub fn is_morphism(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn check_morphism(m: &VertexMap) -> MorphismReport {
    morphism_report(m, false)
}

fn morphism_report(m: &VertexMap, relax_rooted_isolated: bool) -> MorphismReport {
    let mut failures = Vec::new();
    let src = &m.source;
    let tgt = &m.target;
    for v in src.vertex_ids() {
        match m.map.get(&v) {
            None => failures.push(format!("vertex {} is unmapped", src.name(v))),
            Some(w) if !tgt.contains(*w) => {
                failures.push(format!("image of {} is not in the target", src.name(v)))
            }
            _ => {}
        }
    }
    if !failures.is_empty() {
        return MorphismReport { failures, ambiguous_sprouts: Vec::new() };
    }

    // (1) internal vertices keep their symbol and arity.
    for u in src.internals() {
        let w = m.map[&u];
        if !tgt.is_internal(w)
            || tgt.label(w).symbol() != src.label(u).symbol()
            || tgt.successors(w).len() != src.successors(u).len()
        {
            failures.push(format!(
                "internal vertex {} maps to {} with a different label",
                src.name(u),
                tgt.name(w)
            ));
        }
    }

    // (2) isolated sprouts land on isolated sprouts. In relaxed mode a
    // rooted isolated sprout may land anywhere: its plug consumes no roots.
    for s in src.sprouts() {
        if src.is_isolated_sprout(s) {
            if relax_rooted_isolated && src.roots(s) > 0 {
                continue;
            }
            let w = m.map[&s];
            if !tgt.is_isolated_sprout(w) {
                failures.push(format!(
                    "isolated sprout {} maps to non-isolated vertex {}",
                    src.name(s),
                    tgt.name(w)
                ));
            }
        }
    }

    // (3) at every image of an internal vertex, the indegrees of its
    // internal preimages add up to the image's indegree.
    let internal_images: BTreeSet<VertexId> = src.internals().map(|u| m.map[&u]).collect();
    for &v in &internal_images {
        let total: usize = src
            .internals()
            .filter(|u| m.map[u] == v)
            .map(|u| src.indegree(u))
            .sum();
        if total != tgt.indegree(v) {
            failures.push(format!(
                "indegree sum {} at {} does not match its indegree {}",
                total,
                tgt.name(v),
                tgt.indegree(v)
            ));
        }
    }

    // (4) successors map pointwise.
    for u in src.internals() {
        let w = m.map[&u];
        if tgt.is_internal(w) && tgt.successors(w).len() == src.successors(u).len() {
            for (i, x) in src.successors(u).iter().enumerate() {
                if m.map[x] != tgt.successors(w)[i] {
                    failures.push(format!(
                        "successor {} of {} does not map onto the successor of its image",
                        i + 1,
                        src.name(u)
                    ));
                }
            }
        }
    }

    // (5) equimorphic generated subdrags keep equimorphic images. Two kinds
    // of source pairs qualify: sprouts over one variable, and vertex pairs
    // whose generated subdrags are equimorphic outright.
    let ids: Vec<VertexId> = src.vertex_ids().collect();
    for (i, &u) in ids.iter().enumerate() {
        for &v in &ids[i + 1..] {
            if m.map[&u] == m.map[&v] {
                continue;
            }
            let same_var = src.is_sprout(u)
                && src.is_sprout(v)
                && src.variable(u) == src.variable(v);
            let pair_qualifies = same_var || {
                let du = src.subdrag([u]);
                let dv = src.subdrag([v]);
                du.len() == dv.len() && find_iso(&du, &dv, EQUI, &BTreeMap::new()).is_some()
            };
            if pair_qualifies {
                let iu = tgt.subdrag([m.map[&u]]);
                let iv = tgt.subdrag([m.map[&v]]);
                if find_iso(&iu, &iv, EQUI, &BTreeMap::new()).is_none() {
                    failures.push(format!(
                        "images of {} and {} generate non-equimorphic subdrags",
                        src.name(u),
                        src.name(v)
                    ));
                }
            }
        }
    }

    let internal_image_set = internal_images;
    let ambiguous_sprouts = src
        .sprouts()
        .filter(|s| internal_image_set.contains(&m.map[s]))
        .collect();
    MorphismReport { failures, ambiguous_sprouts }
}

pub fn is_morphism(m: &VertexMap) -> bool {
    check_morphism(m).is_morphism()
}

/// Morphism, injective on internal vertices and on isolated sprouts.
pub fn check_monomorphism(m: &VertexMap) -> bool {
    monomorphism_with(m, false)
}

fn monomorphism_with(m: &VertexMap, relax_rooted_isolated: bool) -> bool {
    if !morphism_report(m, relax_rooted_isolated).is_morphism() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for u in m.source.internals() {
        if !seen.insert(m.map[&u]) {
            return false;
        }
    }
    let mut seen = BTreeSet::new();
    for s in m.source.sprouts() {
        if m.source.is_isolated_sprout(s) && !seen.insert(m.map[&s]) {
            return false;
        }
    }
    true
}

/// Bijective morphism.
pub fn check_isomorphism(m: &VertexMap) -> bool {
    if m.source.len() != m.target.len() {
        return false;
    }
    let images: BTreeSet<VertexId> = m.map.values().copied().collect();
    images.len() == m.map.len() && m.map.len() == m.source.len() && is_morphism(m)
}

/// Monomorphism that is the identity on internal vertices. The shape under
/// which a pattern sits literally inside a host drag; sprouts may still move.
pub fn is_injection(m: &VertexMap) -> bool {
    m.source.internals().all(|u| m.map.get(&u) == Some(&u)) && check_monomorphism(m)
}

/// [`is_injection`] under the relaxed sprout condition: a rooted isolated
/// sprout may sit on any vertex, since its plug consumes no roots.
pub(crate) fn is_injection_relaxed(m: &VertexMap) -> bool {
    m.source.internals().all(|u| m.map.get(&u) == Some(&u)) && monomorphism_with(m, true)
}

/// Composes two maps. The middle drags must be the same value.
pub fn compose(first: &VertexMap, second: &VertexMap) -> Option<VertexMap> {
    if first.target != second.source {
        return None;
    }
    let mut map = BTreeMap::new();
    for (&v, w) in &first.map {
        map.insert(v, *second.map.get(w)?);
    }
    Some(VertexMap::new(first.source.clone(), second.target.clone(), map))
}

/// All monomorphisms from `pattern` into `host`, ordered by their image
/// tuples over the pattern's vertices in id order.
pub fn enumerate_monomorphisms(pattern: &Drag, host: &Drag) -> Vec<VertexMap> {
    enumerate_monos(pattern, host, false)
}

/// Like [`enumerate_monomorphisms`], except rooted isolated sprouts of the
/// pattern may land on arbitrary vertices. Their plugs consume no roots, so
/// the composition identities still hold; the rewrite search for right hand
/// sides needs this latitude.
pub(crate) fn enumerate_monomorphisms_relaxed(pattern: &Drag, host: &Drag) -> Vec<VertexMap> {
    enumerate_monos(pattern, host, true)
}

fn enumerate_monos(pattern: &Drag, host: &Drag, relax_rooted_isolated: bool) -> Vec<VertexMap> {
    let internals: Vec<VertexId> = pattern.internals().collect();
    let mut results: Vec<BTreeMap<VertexId, VertexId>> = Vec::new();
    let state: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    assign_internals(pattern, host, &internals, 0, state, &mut results);

    let mut out = Vec::new();
    for map in results {
        let m = VertexMap::new(pattern.clone(), host.clone(), map);
        if !m.is_total() {
            continue;
        }
        if relax_rooted_isolated {
            if mono_conditions_relaxed(&m) {
                out.push(m);
            }
        } else if check_monomorphism(&m) {
            out.push(m);
        }
    }
    out.sort_by_key(|m| {
        m.source.vertex_ids().map(|v| m.map[&v]).collect::<Vec<_>>()
    });
    out.dedup_by(|a, b| a.map == b.map);
    out
}

fn assign_internals(
    pattern: &Drag,
    host: &Drag,
    internals: &[VertexId],
    i: usize,
    state: BTreeMap<VertexId, VertexId>,
    results: &mut Vec<BTreeMap<VertexId, VertexId>>,
) {
    if i == internals.len() {
        // Internal structure fixed; sprouts without internal predecessors
        // remain. They range over every host vertex; the final morphism
        // check culls illegal images.
        let free: Vec<VertexId> =
            pattern.sprouts().filter(|s| !state.contains_key(s)).collect();
        assign_free_sprouts(host, &free, 0, state, results);
        return;
    }
    let u = internals[i];
    if let Some(&w) = state.get(&u) {
        // Already forced through a predecessor's successor list.
        if host.is_internal(w) {
            assign_internals(pattern, host, internals, i + 1, state, results);
        }
        return;
    }
    for w in host.vertex_ids() {
        if !host.is_internal(w)
            || host.label(w).symbol() != pattern.label(u).symbol()
            || host.successors(w).len() != pattern.successors(u).len()
            || host.indegree(w) != pattern.indegree(u)
        {
            continue;
        }
        // Injectivity on internals; sprout images may still collide with w.
        if internals.iter().any(|v| state.get(v) == Some(&w)) {
            continue;
        }
        let mut branch = state.clone();
        if force(pattern, host, &mut branch, u, w) {
            assign_internals(pattern, host, internals, i + 1, branch, results);
        }
    }
}

/// Forces `u -> w` and, for internal `u`, its successors pointwise.
fn force(
    pattern: &Drag,
    host: &Drag,
    state: &mut BTreeMap<VertexId, VertexId>,
    u: VertexId,
    w: VertexId,
) -> bool {
    if let Some(&prev) = state.get(&u) {
        return prev == w;
    }
    state.insert(u, w);
    if pattern.is_internal(u) {
        if !host.is_internal(w)
            || host.label(w).symbol() != pattern.label(u).symbol()
            || host.successors(w).len() != pattern.successors(u).len()
            || host.indegree(w) != pattern.indegree(u)
        {
            return false;
        }
        let ps: Vec<VertexId> = pattern.successors(u).to_vec();
        let hs: Vec<VertexId> = host.successors(w).to_vec();
        for (x, y) in ps.into_iter().zip(hs) {
            if !force(pattern, host, state, x, y) {
                return false;
            }
        }
    }
    true
}

fn assign_free_sprouts(
    host: &Drag,
    free: &[VertexId],
    i: usize,
    state: BTreeMap<VertexId, VertexId>,
    results: &mut Vec<BTreeMap<VertexId, VertexId>>,
) {
    if i == free.len() {
        results.push(state);
        return;
    }
    let s = free[i];
    for w in host.vertex_ids() {
        let mut branch = state.clone();
        branch.insert(s, w);
        assign_free_sprouts(host, free, i + 1, branch, results);
    }
}

/// Monomorphism conditions with (2) waived for rooted isolated sprouts.
fn mono_conditions_relaxed(m: &VertexMap) -> bool {
    if !morphism_report(m, true).is_morphism() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for u in m.source.internals() {
        if !seen.insert(m.map[&u]) {
            return false;
        }
    }
    let mut seen = BTreeSet::new();
    for s in m.source.sprouts() {
        if m.source.is_isolated_sprout(s) && !seen.insert(m.map[&s]) {
            return false;
        }
    }
    true
}

/// How an edge of the target relates to a monomorphic image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeClass {
    /// Image of a pattern edge between internal vertices.
    Inside,
    /// Image of a pattern edge into a sprout: the edge the plug at that
    /// sprout travels through.
    Created { pattern_edge: Edge },
    /// Tail outside the image, head on it.
    Entering,
    /// Both endpoints off the internal image.
    Outside,
}

/// Classifies every target edge relative to a monomorphism. Total and
/// exclusive: each edge gets exactly one class.
pub fn categorize_edges(m: &VertexMap) -> Result<Vec<(Edge, EdgeClass)>, String> {
    if !check_monomorphism(m) {
        return Err("edge classification needs a monomorphism".to_string());
    }
    let src = &m.source;
    let tgt = &m.target;
    let image_of_internal: BTreeMap<VertexId, VertexId> =
        src.internals().map(|u| (m.map[&u], u)).collect();
    let mut out = Vec::new();
    for e in tgt.edges() {
        let class = if let Some(&u) = image_of_internal.get(&e.tail) {
            let x = src.successors(u)[e.index];
            if src.is_internal(x) {
                EdgeClass::Inside
            } else {
                EdgeClass::Created { pattern_edge: Edge { tail: u, index: e.index, head: x } }
            }
        } else if image_of_internal.contains_key(&e.head) {
            EdgeClass::Entering
        } else {
            EdgeClass::Outside
        };
        out.push((e, class));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_drag;

    fn map_by_names(src: &Drag, tgt: &Drag, pairs: &[(&str, &str)]) -> VertexMap {
        let map = pairs
            .iter()
            .map(|(a, b)| (src.find_by_name(a).unwrap(), tgt.find_by_name(b).unwrap()))
            .collect();
        VertexMap::new(src.clone(), tgt.clone(), map)
    }

    #[test]
    fn renamed_copy_is_equimorphic() {
        let a = parse_drag("{f: f[1](x, g); g: g(x); x: $x}").unwrap();
        let b = parse_drag("{p: f[1](z, q); q: g(z); z: $x}").unwrap();
        assert!(equimorphic(&a, &b));
        assert!(!same_up_to_names(&a, &b));
    }

    #[test]
    fn variable_names_are_labels() {
        let a = parse_drag("{f: f(x); x: $y}").unwrap();
        let b = parse_drag("{f: f(x); x: $z}").unwrap();
        assert!(!equimorphic(&a, &b));
    }

    #[test]
    fn root_counts_matter_unless_bare() {
        let a = parse_drag("{a: a[2]}").unwrap();
        let b = parse_drag("{a: a[1]}").unwrap();
        assert!(!equimorphic(&a, &b));
        assert!(bare_equimorphic(&a, &b));
    }

    #[test]
    fn cycle_rotations_are_equimorphic() {
        let a = parse_drag("{f: f(g); g: f(f)}").unwrap();
        let b = parse_drag("{p: f(q); q: f(p)}").unwrap();
        assert!(equimorphic(&a, &b));
    }

    #[test]
    fn ordered_successors_distinguish() {
        let a = parse_drag("{f: f(x, y); x: $x; y: $y}").unwrap();
        let b = parse_drag("{f: f(y, x); x: $x; y: $y}").unwrap();
        assert!(!equimorphic(&a, &b));
    }

    #[test]
    fn collapse_map_is_a_morphism() {
        // Both internal vertices fold onto a loop vertex of matching total
        // indegree.
        let src = parse_drag("{f: f[1](g); g: f[1](x); x: $x}").unwrap();
        let tgt = parse_drag("{h: f[2](h)}").unwrap();
        let m = map_by_names(&src, &tgt, &[("f", "h"), ("g", "h"), ("x", "h")]);
        let report = check_morphism(&m);
        assert!(report.is_morphism(), "{:?}", report.failures);
        assert_eq!(report.ambiguous_sprouts.len(), 1);
        assert!(!check_monomorphism(&m));
    }

    #[test]
    fn indegree_sum_violation_is_caught() {
        let src = parse_drag("{f: f[1](x); x: $x}").unwrap();
        let tgt = parse_drag("{g: f[2](y); y: $y}").unwrap();
        let m = map_by_names(&src, &tgt, &[("f", "g"), ("x", "y")]);
        assert!(!is_morphism(&m));
    }

    #[test]
    fn same_variable_sprouts_need_equimorphic_images() {
        let src = parse_drag("{f: f(x1, x2); x1: $x; x2: $x}").unwrap();
        let tgt = parse_drag("{f: f(a, b); a: a; b: b[1]}").unwrap();
        let m = map_by_names(&src, &tgt, &[("f", "f"), ("x1", "a"), ("x2", "b")]);
        assert!(!is_morphism(&m));
        let tgt2 = parse_drag("{f: f(a, b); a: a; b: a}").unwrap();
        let m2 = map_by_names(&src, &tgt2, &[("f", "f"), ("x1", "a"), ("x2", "b")]);
        // Both images restore to a with one root; equimorphic, so fine.
        assert!(is_morphism(&m2), "{:?}", check_morphism(&m2).failures);
    }

    #[test]
    fn injection_is_identity_on_internals_only() {
        let d = parse_drag("{f: f[1](x); x: $x}").unwrap();
        let host = parse_drag("{a: a[1]}").unwrap();
        // Build a target that contains f literally, with the sprout slot
        // filled by the plug target a.
        let f = d.find_by_name("f").unwrap();
        let x = d.find_by_name("x").unwrap();
        let a = host.find_by_name("a").unwrap();
        let mut tgt = d.juxtapose(&host);
        tgt.redirect_edges_into(x, a);
        tgt.remove_vertex(x);
        let map = [(f, f), (x, a)].into_iter().collect();
        let m = VertexMap::new(d.clone(), tgt, map);
        assert!(is_injection(&m), "{:?}", check_morphism(&m).failures);
    }

    #[test]
    fn enumerate_finds_both_images() {
        let pat = parse_drag("{h: h[1](x1, x2); x1: $x; x2: $x}").unwrap();
        let host = parse_drag("{f: f(a1, h); a1: a[1]; h: h(a2, a2); a2: a}").unwrap();
        let monos = enumerate_monomorphisms(&pat, &host);
        assert_eq!(monos.len(), 1);
        let m = &monos[0];
        let h_pat = pat.find_by_name("h").unwrap();
        let h_host = host.find_by_name("h").unwrap();
        assert_eq!(m.map[&h_pat], h_host);
    }

    #[test]
    fn enumerate_handles_bounce_images() {
        let pat = parse_drag("{f: f[4](x1, x2, x3); x1: $x1[1]; x2: $x2[1]; x3: $x3}").unwrap();
        let host = parse_drag("{f: f[1](h, f, h); h: h[1](f, f, h)}").unwrap();
        let monos = enumerate_monomorphisms(&pat, &host);
        assert_eq!(monos.len(), 1);
        let m = &monos[0];
        let x2 = pat.find_by_name("x2").unwrap();
        let f_host = host.find_by_name("f").unwrap();
        assert_eq!(m.map[&x2], f_host, "sprout with indegree 2 lands on f");
    }

    #[test]
    fn categorize_covers_every_edge_once() {
        let pat = parse_drag("{h: h[1](x1, x2); x1: $x; x2: $x}").unwrap();
        let host = parse_drag("{f: f(a1, h); a1: a[1]; h: h(a2, a2); a2: a}").unwrap();
        let m = &enumerate_monomorphisms(&pat, &host)[0];
        let classes = categorize_edges(m).unwrap();
        assert_eq!(classes.len(), host.edge_count());
        let created = classes
            .iter()
            .filter(|(_, c)| matches!(c, EdgeClass::Created { .. }))
            .count();
        let entering = classes
            .iter()
            .filter(|(_, c)| matches!(c, EdgeClass::Entering))
            .count();
        let outside = classes.iter().filter(|(_, c)| matches!(c, EdgeClass::Outside)).count();
        assert_eq!(created, 2);
        assert_eq!(entering, 1);
        assert_eq!(outside, 1);
    }

    #[test]
    fn composition_of_morphisms_is_a_morphism() {
        let a = parse_drag("{f: f[1](x); x: $x}").unwrap();
        let b = parse_drag("{g: f[1](y); y: $y}").unwrap();
        let c = parse_drag("{h: f[1](z); z: $z}").unwrap();
        let m1 = map_by_names(&a, &b, &[("f", "g"), ("x", "y")]);
        let m2 = map_by_names(&b, &c, &[("g", "h"), ("y", "z")]);
        assert!(is_morphism(&m1) && is_morphism(&m2));
        let m = compose(&m1, &m2).unwrap();
        assert!(is_morphism(&m));
    }
}
