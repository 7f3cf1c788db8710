//! The drag data structure.
//!
//! A drag is a finite set of vertices, each carrying a display name, a label,
//! an ordered successor list and a root count. Internal vertices are labeled
//! with a function symbol and their arity is the length of the successor
//! list; sprouts are labeled with a variable name and never have successors.
//! Several sprouts may carry the same variable. Roots are multiplicities,
//! not flags: a vertex can be rooted many times, and sprouts can be rooted.
//!
//! The indegree of a vertex is its number of incoming edges plus its root
//! count. Most operations in the crate preserve indegrees pointwise; the
//! helpers here maintain that discipline (restriction converts severed
//! incoming edges into roots).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Identity of a vertex. Fresh ids come from a process-wide counter, so ids
/// never collide across drags built in the same session; two drags that share
/// an id intentionally share that vertex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u64);

impl VertexId {
    pub fn fresh() -> VertexId {
        VertexId(NEXT_ID.fetch_add(1, Ordering::Relaxed))
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Returns a variable name of the form `_cutN` that no parser accepts as
/// input, so freshly cut sprouts never collide with user variables.
pub fn fresh_cut_var() -> String {
    format!("_cut{}", NEXT_ID.fetch_add(1, Ordering::Relaxed))
}

/// Derives a fresh variable name from an existing one. Used when a rule is
/// renamed apart from the drag it is matched against. The result stays a
/// plain identifier so printed drags can be read back.
pub fn fresh_var_from(base: &str) -> String {
    let stem = match base.rfind('_') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit())
            && !base[i + 1..].is_empty() =>
        {
            &base[..i]
        }
        _ => base,
    };
    format!("{}_{}", stem, NEXT_ID.fetch_add(1, Ordering::Relaxed))
}

/// Like [`fresh_var_from`], but guaranteed to avoid a given set of names.
pub(crate) fn fresh_var_avoiding(base: &str, avoid: &std::collections::BTreeSet<String>) -> String {
    loop {
        let v = fresh_var_from(base);
        if !avoid.contains(&v) {
            return v;
        }
    }
}

/// Vertex label: a function symbol for internal vertices, a variable name
/// for sprouts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Label {
    Internal { symbol: String },
    Var(String),
}

impl Label {
    pub fn internal(symbol: &str) -> Label {
        Label::Internal { symbol: symbol.to_string() }
    }

    pub fn var(name: &str) -> Label {
        Label::Var(name.to_string())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Label::Var(_))
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Label::Internal { symbol } => Some(symbol),
            Label::Var(_) => None,
        }
    }

    pub fn variable(&self) -> Option<&str> {
        match self {
            Label::Var(x) => Some(x),
            Label::Internal { .. } => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct VertexData {
    pub(crate) name: String,
    pub(crate) label: Label,
    pub(crate) successors: Vec<VertexId>,
    pub(crate) roots: usize,
}

/// An edge, identified by its tail and the 0-based position in the tail's
/// successor list. Textual and DOT output show positions 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Edge {
    pub tail: VertexId,
    pub index: usize,
    pub head: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DragError {
    /// The same function symbol is used with two different arities.
    ArityMismatch { symbol: String, seen: usize, expected: usize },
    /// A sprout was given successors.
    SproutWithSuccessors { vertex: String },
    /// A successor references a vertex that is not part of the drag.
    DanglingSuccessor { vertex: String, index: usize },
    /// A root or edge was attached to an id the builder never produced.
    UnknownVertex { vertex: String },
}

impl fmt::Display for DragError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DragError::ArityMismatch { symbol, seen, expected } => write!(
                f,
                "symbol '{}' used with arity {} after arity {}",
                symbol, seen, expected
            ),
            DragError::SproutWithSuccessors { vertex } => {
                write!(f, "sprout '{}' has successors", vertex)
            }
            DragError::DanglingSuccessor { vertex, index } => write!(
                f,
                "successor {} of '{}' is not a vertex of the drag",
                index + 1,
                vertex
            ),
            DragError::UnknownVertex { vertex } => {
                write!(f, "unknown vertex '{}'", vertex)
            }
        }
    }
}

impl std::error::Error for DragError {}

/// The central graph type. Vertices are kept in id order, which makes every
/// traversal in the crate deterministic.
#[derive(Clone, PartialEq, Eq)]
pub struct Drag {
    vertices: BTreeMap<VertexId, VertexData>,
}

impl fmt::Debug for Drag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::print_drag(self))
    }
}

impl Default for Drag {
    fn default() -> Self {
        Drag::empty()
    }
}

impl Drag {
    pub fn empty() -> Drag {
        Drag { vertices: BTreeMap::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub(crate) fn data(&self, v: VertexId) -> &VertexData {
        &self.vertices[&v]
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.vertices[&v].name
    }

    pub fn label(&self, v: VertexId) -> &Label {
        &self.vertices[&v].label
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[&v].successors
    }

    pub fn roots(&self, v: VertexId) -> usize {
        self.vertices[&v].roots
    }

    pub fn is_sprout(&self, v: VertexId) -> bool {
        self.vertices[&v].label.is_var()
    }

    pub fn is_internal(&self, v: VertexId) -> bool {
        !self.is_sprout(v)
    }

    pub fn variable(&self, v: VertexId) -> Option<&str> {
        self.vertices[&v].label.variable()
    }

    pub fn internals(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().filter(|(_, d)| !d.label.is_var()).map(|(v, _)| *v)
    }

    pub fn sprouts(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().filter(|(_, d)| d.label.is_var()).map(|(v, _)| *v)
    }

    /// All edges in (tail id, position) order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (&v, data) in &self.vertices {
            for (i, &w) in data.successors.iter().enumerate() {
                out.push(Edge { tail: v, index: i, head: w });
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.values().map(|d| d.successors.len()).sum()
    }

    /// Number of incoming edges, counting one per occurrence in a successor
    /// list.
    pub fn pred_count(&self, v: VertexId) -> usize {
        self.vertices
            .values()
            .map(|d| d.successors.iter().filter(|&&w| w == v).count())
            .sum()
    }

    /// Incoming edges plus roots. The quantity preserved by restriction,
    /// sum, wiring and rewriting.
    pub fn indegree(&self, v: VertexId) -> usize {
        self.pred_count(v) + self.roots(v)
    }

    pub fn total_roots(&self) -> usize {
        self.vertices.values().map(|d| d.roots).sum()
    }

    /// A sprout no edge points at. Roots do not disqualify it.
    pub fn is_isolated_sprout(&self, v: VertexId) -> bool {
        self.is_sprout(v) && self.pred_count(v) == 0
    }

    pub fn find_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().find(|(_, d)| d.name == name).map(|(v, _)| *v)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.sprouts().filter_map(|s| self.variable(s).map(str::to_string)).collect()
    }

    pub fn sprouts_of(&self, var: &str) -> Vec<VertexId> {
        self.sprouts().filter(|&s| self.variable(s) == Some(var)).collect()
    }

    /// Everything reachable from `from` by following successor edges,
    /// including `from` itself.
    pub fn accessible<I: IntoIterator<Item = VertexId>>(&self, from: I) -> BTreeSet<VertexId> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut stack: Vec<VertexId> = from.into_iter().filter(|v| self.contains(*v)).collect();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.successors(v).iter().copied());
            }
        }
        seen
    }

    /// Keeps exactly the vertices in `keep`. Severed incoming edges become
    /// extra roots on their heads; severed outgoing edges are re-aimed at
    /// fresh rootless cut sprouts, one per lost head. Indegrees of kept
    /// vertices are unchanged.
    pub fn restriction(&self, keep: &BTreeSet<VertexId>) -> Drag {
        let mut out: BTreeMap<VertexId, VertexData> = BTreeMap::new();
        for (&v, data) in &self.vertices {
            if keep.contains(&v) {
                out.insert(v, data.clone());
            }
        }
        let mut cut_sprouts: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut extra: Vec<(VertexId, VertexData)> = Vec::new();
        for (&v, data) in &self.vertices {
            if keep.contains(&v) {
                // Outgoing edges to lost vertices bend to a shared cut sprout.
                let succs = out.get_mut(&v).unwrap();
                for slot in succs.successors.iter_mut() {
                    if !keep.contains(slot) {
                        let s = *cut_sprouts.entry(*slot).or_insert_with(|| {
                            let id = VertexId::fresh();
                            let var = fresh_cut_var();
                            extra.push((
                                id,
                                VertexData {
                                    name: var.clone(),
                                    label: Label::Var(var),
                                    successors: Vec::new(),
                                    roots: 0,
                                },
                            ));
                            id
                        });
                        *slot = s;
                    }
                }
            } else {
                // Incoming edges from lost vertices become roots on the head.
                for &w in &data.successors {
                    if keep.contains(&w) {
                        out.get_mut(&w).unwrap().roots += 1;
                    }
                }
            }
        }
        out.extend(extra);
        Drag { vertices: out }
    }

    /// The subdrag generated by `gens`: the restriction to everything
    /// accessible from them. Closed under successors, so no cut sprouts
    /// appear; severed sharing shows up as extra roots.
    pub fn subdrag<I: IntoIterator<Item = VertexId>>(&self, gens: I) -> Drag {
        let closure = self.accessible(gens);
        self.restriction(&closure)
    }

    /// The complement of [`Drag::subdrag`]: the restriction to the vertices
    /// not accessible from `gens`.
    pub fn context<I: IntoIterator<Item = VertexId>>(&self, gens: I) -> Drag {
        let closure = self.accessible(gens);
        let keep: BTreeSet<VertexId> =
            self.vertex_ids().filter(|v| !closure.contains(v)).collect();
        self.restriction(&keep)
    }

    /// Connected components. Vertices are connected through edges in either
    /// direction and through shared variables: all sprouts carrying the same
    /// variable belong to one component, since plugging treats them as one
    /// unit.
    pub fn component_sets(&self) -> Vec<BTreeSet<VertexId>> {
        let ids: Vec<VertexId> = self.vertex_ids().collect();
        let index: BTreeMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(parent, a), find(parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        };
        for e in self.edges() {
            union(&mut parent, index[&e.tail], index[&e.head]);
        }
        let mut by_var: BTreeMap<&str, VertexId> = BTreeMap::new();
        for s in self.sprouts() {
            let x = self.variable(s).unwrap();
            if let Some(&first) = by_var.get(x) {
                union(&mut parent, index[&first], index[&s]);
            } else {
                by_var.insert(x, s);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
        for (i, &v) in ids.iter().enumerate() {
            groups.entry(find(&mut parent, i)).or_default().insert(v);
        }
        groups.into_values().collect()
    }

    /// Components as drags. Each is an exact slice: components are closed in
    /// both edge directions, so the restriction neither cuts nor adds roots.
    pub fn components(&self) -> Vec<Drag> {
        self.component_sets().iter().map(|set| self.restriction(set)).collect()
    }

    /// Checks the structural invariants: successor lists only reference
    /// vertices of the drag, sprouts have none, and every occurrence of a
    /// function symbol has the same arity.
    pub fn validate(&self) -> Result<(), DragError> {
        let mut arities: BTreeMap<&str, usize> = BTreeMap::new();
        for (&v, data) in &self.vertices {
            match &data.label {
                Label::Var(_) => {
                    if !data.successors.is_empty() {
                        return Err(DragError::SproutWithSuccessors {
                            vertex: self.describe(v),
                        });
                    }
                }
                Label::Internal { symbol } => {
                    let n = data.successors.len();
                    if let Some(&m) = arities.get(symbol.as_str()) {
                        if m != n {
                            return Err(DragError::ArityMismatch {
                                symbol: symbol.clone(),
                                seen: n,
                                expected: m,
                            });
                        }
                    } else {
                        arities.insert(symbol, n);
                    }
                }
            }
            for (i, w) in data.successors.iter().enumerate() {
                if !self.vertices.contains_key(w) {
                    return Err(DragError::DanglingSuccessor {
                        vertex: self.describe(v),
                        index: i,
                    });
                }
            }
        }
        Ok(())
    }

    fn describe(&self, v: VertexId) -> String {
        let data = &self.vertices[&v];
        if data.name.is_empty() {
            format!("{}", v)
        } else {
            data.name.clone()
        }
    }

    /// Termination measure: internal weight (internal vertices plus edges
    /// between internal vertices), then the multiset of sprout indegrees,
    /// then the multiset of per-variable sprout counts. Multisets of
    /// naturals are compared by their descending sort, so the derived
    /// lexicographic order on [`Measure`] is the intended one.
    pub fn measure(&self) -> Measure {
        let internal_edges = self
            .edges()
            .iter()
            .filter(|e| self.is_internal(e.tail) && self.is_internal(e.head))
            .count();
        let weight = self.internals().count() + internal_edges;
        let mut sprout_indegrees: Vec<usize> =
            self.sprouts().map(|s| self.indegree(s)).collect();
        sprout_indegrees.sort_unstable_by(|a, b| b.cmp(a));
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in self.sprouts() {
            *counts.entry(self.variable(s).unwrap()).or_insert(0) += 1;
        }
        let mut variable_counts: Vec<usize> = counts.into_values().collect();
        variable_counts.sort_unstable_by(|a, b| b.cmp(a));
        Measure { weight, sprout_indegrees, variable_counts }
    }

    // Mutators below stay crate-internal; the public surface goes through
    // the named operations and the builder.

    pub(crate) fn insert_vertex(
        &mut self,
        id: VertexId,
        name: String,
        label: Label,
        successors: Vec<VertexId>,
        roots: usize,
    ) {
        self.vertices.insert(id, VertexData { name, label, successors, roots });
    }

    pub(crate) fn insert_data(&mut self, id: VertexId, data: VertexData) {
        self.vertices.insert(id, data);
    }

    pub(crate) fn remove_vertex(&mut self, v: VertexId) {
        self.vertices.remove(&v);
    }

    pub(crate) fn set_roots(&mut self, v: VertexId, roots: usize) {
        self.vertices.get_mut(&v).unwrap().roots = roots;
    }

    pub(crate) fn add_roots(&mut self, v: VertexId, extra: usize) {
        self.vertices.get_mut(&v).unwrap().roots += extra;
    }

    pub(crate) fn set_successor(&mut self, v: VertexId, index: usize, w: VertexId) {
        self.vertices.get_mut(&v).unwrap().successors[index] = w;
    }

    pub(crate) fn set_name(&mut self, v: VertexId, name: String) {
        self.vertices.get_mut(&v).unwrap().name = name;
    }

    pub(crate) fn set_label(&mut self, v: VertexId, label: Label) {
        self.vertices.get_mut(&v).unwrap().label = label;
    }

    /// Re-aims every edge whose head is `from` at `to`. Positions are kept.
    pub(crate) fn redirect_edges_into(&mut self, from: VertexId, to: VertexId) {
        for data in self.vertices.values_mut() {
            for slot in data.successors.iter_mut() {
                if *slot == from {
                    *slot = to;
                }
            }
        }
    }

    /// Replaces the id of a vertex everywhere, key and successor slots
    /// alike. The new id must not already be present.
    pub(crate) fn rename_id(&mut self, old: VertexId, new: VertexId) {
        debug_assert!(!self.vertices.contains_key(&new));
        if let Some(data) = self.vertices.remove(&old) {
            self.vertices.insert(new, data);
            self.redirect_edges_into(old, new);
        }
    }

    /// Deep copy with fresh ids. Names are kept; the map sends old ids to
    /// new ones.
    pub fn clone_fresh(&self) -> (Drag, BTreeMap<VertexId, VertexId>) {
        let map: BTreeMap<VertexId, VertexId> =
            self.vertex_ids().map(|v| (v, VertexId::fresh())).collect();
        let mut out = Drag::empty();
        for (&v, data) in &self.vertices {
            let successors = data.successors.iter().map(|w| map[w]).collect();
            out.insert_vertex(map[&v], data.name.clone(), data.label.clone(), successors, data.roots);
        }
        (out, map)
    }

    /// Disjoint union without compatibility bookkeeping. Callers must know
    /// the id sets are disjoint.
    pub(crate) fn juxtapose(&self, other: &Drag) -> Drag {
        let mut out = self.clone();
        for (&v, data) in &other.vertices {
            debug_assert!(!out.vertices.contains_key(&v));
            out.vertices.insert(v, data.clone());
        }
        out
    }
}

/// Drag measure, ordered lexicographically; see [`Drag::measure`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Measure {
    pub weight: usize,
    pub sprout_indegrees: Vec<usize>,
    pub variable_counts: Vec<usize>,
}

/// Incremental construction with validation at the end.
///
/// ```
/// use drags::DragBuilder;
/// let mut b = DragBuilder::new();
/// let f = b.internal("f", "f");
/// let x = b.sprout("x", "x");
/// b.set_successors(f, vec![x]);
/// b.add_roots(f, 1);
/// let d = b.finish().unwrap();
/// assert_eq!(d.indegree(x), 1);
/// ```
pub struct DragBuilder {
    drag: Drag,
    error: Option<DragError>,
}

impl DragBuilder {
    pub fn new() -> DragBuilder {
        DragBuilder { drag: Drag::empty(), error: None }
    }

    pub fn internal(&mut self, name: &str, symbol: &str) -> VertexId {
        let id = VertexId::fresh();
        self.drag.insert_vertex(id, name.to_string(), Label::internal(symbol), Vec::new(), 0);
        id
    }

    pub fn sprout(&mut self, name: &str, var: &str) -> VertexId {
        let id = VertexId::fresh();
        self.drag.insert_vertex(id, name.to_string(), Label::var(var), Vec::new(), 0);
        id
    }

    pub fn set_successors(&mut self, v: VertexId, successors: Vec<VertexId>) {
        if !self.drag.contains(v) {
            self.fail(DragError::UnknownVertex { vertex: format!("{}", v) });
            return;
        }
        self.drag.vertices.get_mut(&v).unwrap().successors = successors;
    }

    pub fn add_roots(&mut self, v: VertexId, count: usize) {
        if !self.drag.contains(v) {
            self.fail(DragError::UnknownVertex { vertex: format!("{}", v) });
            return;
        }
        self.drag.add_roots(v, count);
    }

    fn fail(&mut self, e: DragError) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }

    pub fn finish(self) -> Result<Drag, DragError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.drag.validate()?;
        Ok(self.drag)
    }
}

impl Default for DragBuilder {
    fn default() -> Self {
        DragBuilder::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_drag;

    #[test]
    fn indegree_counts_roots_and_edges() {
        let d = parse_drag("{f: f[1](x); h: h[4](x); x: $x[1]}").unwrap();
        let x = d.find_by_name("x").unwrap();
        let h = d.find_by_name("h").unwrap();
        assert_eq!(d.pred_count(x), 2);
        assert_eq!(d.indegree(x), 3);
        assert_eq!(d.indegree(h), 4);
    }

    #[test]
    fn validate_rejects_arity_clash() {
        let mut b = DragBuilder::new();
        let f1 = b.internal("f1", "f");
        let f2 = b.internal("f2", "f");
        b.set_successors(f1, vec![f2]);
        assert!(matches!(b.finish(), Err(DragError::ArityMismatch { .. })));
    }

    #[test]
    fn restriction_preserves_indegrees_of_kept_vertices() {
        let d = parse_drag("{f: f(g, a); g: g(a); a: a[1]}").unwrap();
        let g = d.find_by_name("g").unwrap();
        let a = d.find_by_name("a").unwrap();
        let keep: BTreeSet<VertexId> = [g, a].into_iter().collect();
        let r = d.restriction(&keep);
        assert_eq!(r.indegree(g), d.indegree(g));
        assert_eq!(r.indegree(a), d.indegree(a));
        assert_eq!(r.roots(g), 1);
        assert_eq!(r.roots(a), 2);
        assert!(r.validate().is_ok());
    }

    #[test]
    fn restriction_shares_one_cut_sprout_per_lost_head() {
        let d = parse_drag("{f: f(a); g: g(a); a: a}").unwrap();
        let f = d.find_by_name("f").unwrap();
        let g = d.find_by_name("g").unwrap();
        let keep: BTreeSet<VertexId> = [f, g].into_iter().collect();
        let r = d.restriction(&keep);
        assert_eq!(r.sprouts().count(), 1);
        let s = r.sprouts().next().unwrap();
        assert_eq!(r.successors(f), &[s]);
        assert_eq!(r.successors(g), &[s]);
        assert_eq!(r.roots(s), 0);
    }

    #[test]
    fn subdrag_restores_severed_sharing_as_roots() {
        let d = parse_drag("{f: f(a); g: g(a); a: a}").unwrap();
        let g = d.find_by_name("g").unwrap();
        let a = d.find_by_name("a").unwrap();
        let s = d.subdrag([g]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.roots(a), 1);
        assert_eq!(s.indegree(a), d.indegree(a));
    }

    #[test]
    fn context_is_the_inaccessible_rest() {
        let d = parse_drag("{f: f(g); g: g(a); a: a}").unwrap();
        let g = d.find_by_name("g").unwrap();
        let f = d.find_by_name("f").unwrap();
        let c = d.context([g]);
        assert!(c.contains(f));
        assert_eq!(c.len(), 2);
        assert!(c.sprouts().count() == 1);
    }

    #[test]
    fn same_variable_sprouts_share_a_component() {
        let d = parse_drag("{f: f(x1); g: g(x2); x1: $x; x2: $x}").unwrap();
        assert_eq!(d.component_sets().len(), 1);
        let e = parse_drag("{f: f(x1); g: g(y1); x1: $x; y1: $y}").unwrap();
        assert_eq!(e.component_sets().len(), 2);
    }

    #[test]
    fn components_slice_exactly() {
        let d = parse_drag("{f: f[1](a); a: a; g: g[2]}").unwrap();
        let parts = d.components();
        assert_eq!(parts.len(), 2);
        let glued = parts[0].juxtapose(&parts[1]);
        assert_eq!(glued, d);
    }

    #[test]
    fn measure_orders_by_weight_then_sprout_indegrees() {
        let big = parse_drag("{f: f(g); g: g(x); x: $x}").unwrap();
        let small = parse_drag("{f: f(x); x: $x}").unwrap();
        assert!(small.measure() < big.measure());
        let shared = parse_drag("{f: f(x, x); x: $x}").unwrap();
        let split = parse_drag("{f: f(x, y); x: $x; y: $y}").unwrap();
        assert!(split.measure() < shared.measure());
    }

    #[test]
    fn accessibility_follows_cycles() {
        let d = parse_drag("{f: f(g); g: g(f)}").unwrap();
        let f = d.find_by_name("f").unwrap();
        assert_eq!(d.accessible([f]).len(), 2);
    }
}
