//! Rules, matches and the rewrite step.
//!
//! A rule is a pair of compatible drags together with a multiset
//! correspondence between their root occurrences. Applying a rule to a host
//! drag means factoring the host as `product(context, lhs, switchboard)`,
//! transporting the switchboard through the root correspondence, and
//! multiplying the context back with the right hand side. The factorization
//! witness is a [`RewritingExtension`]; [`extension_from_injection`] builds
//! it directly from an occurrence of the left hand side.
//!
//! Matching is up to injections: internal vertices of the pattern land on
//! themselves after grafting, sprouts may land anywhere the indegrees allow.
//! [`apply`] is the functional step (one result per strategy);
//! [`rewrites_to`] is the relational one, which also covers steps that
//! duplicate or collapse shared structure; [`joinable_modulo_sharing`]
//! searches both relations' common reducts up to sharing equivalence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::algebra::{product, AlgebraError, Switchboard, WireSet};
use crate::drag::{fresh_var_avoiding, Drag, Label, VertexId};
use crate::morphism::{
    enumerate_monomorphisms, enumerate_monomorphisms_relaxed, find_iso, find_iso_constrained,
    is_injection_relaxed, VertexMap, EQUI, RENAMED, SHAPE,
};
use crate::sharing::{shared_normal_form, sharing_equivalent};

/// Multiset of root correspondences from left to right rule vertices.
///
/// One pair per root occurrence: a vertex carrying n roots appears n times
/// as a source, and every right hand root occurrence is hit exactly once.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RootMap {
    pairs: Vec<(VertexId, VertexId)>,
}

impl RootMap {
    pub fn new<I: IntoIterator<Item = (VertexId, VertexId)>>(pairs: I) -> RootMap {
        let mut pairs: Vec<(VertexId, VertexId)> = pairs.into_iter().collect();
        pairs.sort();
        RootMap { pairs }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(VertexId, VertexId)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Targets of the pairs at `source`, with multiplicity.
    pub fn targets_at(&self, source: VertexId) -> Vec<VertexId> {
        self.pairs.iter().filter(|(s, _)| *s == source).map(|&(_, t)| t).collect()
    }

    fn source_counts(&self) -> BTreeMap<VertexId, usize> {
        let mut out = BTreeMap::new();
        for &(s, _) in &self.pairs {
            *out.entry(s).or_insert(0) += 1;
        }
        out
    }

    fn target_counts(&self) -> BTreeMap<VertexId, usize> {
        let mut out = BTreeMap::new();
        for &(_, t) in &self.pairs {
            *out.entry(t).or_insert(0) += 1;
        }
        out
    }

    fn remapped(
        &self,
        src: &BTreeMap<VertexId, VertexId>,
        tgt: &BTreeMap<VertexId, VertexId>,
    ) -> RootMap {
        RootMap::new(self.pairs.iter().map(|&(a, b)| {
            (src.get(&a).copied().unwrap_or(a), tgt.get(&b).copied().unwrap_or(b))
        }))
    }
}

fn root_occurrences(d: &Drag) -> BTreeMap<VertexId, usize> {
    d.vertex_ids().filter(|&v| d.roots(v) > 0).map(|v| (v, d.roots(v))).collect()
}

/// A rewrite rule: left and right drags, the root correspondence, and the
/// vertices both sides share.
///
/// Both sides may carry no roots at all; neither side needs to be
/// accessible. The only structural demands are that left sprouts have
/// predecessors (so matching pins them), that shared vertices agree on
/// label and successors, and that the root map is a bijection between root
/// occurrences.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub name: String,
    lhs: Drag,
    rhs: Drag,
    rootmap: RootMap,
    shared: BTreeSet<VertexId>,
}

impl Rule {
    pub fn new(
        name: impl Into<String>,
        lhs: Drag,
        rhs: Drag,
        rootmap: RootMap,
    ) -> Result<Rule, RewriteError> {
        let malformed = |reason: String| Err(RewriteError::MalformedRule { reason });
        if let Some(s) = lhs.sprouts().find(|&s| lhs.pred_count(s) == 0) {
            return malformed(format!("left sprout '{}' has no predecessor", lhs.name(s)));
        }
        // The sides never coexist, so shared vertices only need to agree
        // structurally; no root budget is involved.
        let mismatch = lhs.vertex_ids().filter(|&v| rhs.contains(v)).find(|&v| {
            lhs.label(v) != rhs.label(v) || lhs.successors(v) != rhs.successors(v)
        });
        if mismatch.is_some() {
            return malformed("shared vertices disagree on label or successors".to_string());
        }
        for &(a, b) in rootmap.iter() {
            if !lhs.contains(a) || !rhs.contains(b) {
                return malformed("root map mentions a vertex outside the rule".to_string());
            }
        }
        if rootmap.source_counts() != root_occurrences(&lhs)
            || rootmap.target_counts() != root_occurrences(&rhs)
        {
            return malformed(
                "root map is not a bijection between root occurrences".to_string(),
            );
        }
        let shared: BTreeSet<VertexId> = lhs.vertex_ids().filter(|v| rhs.contains(*v)).collect();
        Ok(Rule { name: name.into(), lhs, rhs, rootmap, shared })
    }

    pub fn lhs(&self) -> &Drag {
        &self.lhs
    }

    pub fn rhs(&self) -> &Drag {
        &self.rhs
    }

    pub fn rootmap(&self) -> &RootMap {
        &self.rootmap
    }

    pub fn shared(&self) -> &BTreeSet<VertexId> {
        &self.shared
    }

    /// Stringent rules lose no variables left to right, so no plug is ever
    /// dropped and the functional step is defined.
    pub fn is_stringent(&self) -> bool {
        self.lhs.variables().is_subset(&self.rhs.variables())
    }

    /// A copy with fresh vertex ids and fresh sprout variables, avoiding
    /// `avoid`. Shared vertices stay shared; the root map follows.
    pub fn renamed_apart(&self, avoid: &BTreeSet<String>) -> Rule {
        let mut ids: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for v in self.lhs.vertex_ids().chain(self.rhs.vertex_ids()) {
            ids.entry(v).or_insert_with(VertexId::fresh);
        }
        let mut taken = avoid.clone();
        let mut vars: BTreeMap<String, String> = BTreeMap::new();
        let mut all_vars: Vec<String> = self.lhs.variables().into_iter().collect();
        all_vars.extend(self.rhs.variables());
        all_vars.sort();
        all_vars.dedup();
        for x in all_vars {
            let nx = fresh_var_avoiding(&x, &taken);
            taken.insert(nx.clone());
            vars.insert(x, nx);
        }
        let lhs = remap_drag(&self.lhs, &ids, &vars);
        let rhs = remap_drag(&self.rhs, &ids, &vars);
        let rootmap = self.rootmap.remapped(&ids, &ids);
        let shared = self.shared.iter().map(|v| ids[v]).collect();
        Rule { name: self.name.clone(), lhs, rhs, rootmap, shared }
    }
}

/// Rebuilds a drag over new vertex ids, renaming sprout variables along the
/// way. Sprouts take their new variable as display name; internal vertices
/// keep theirs.
fn remap_drag(
    d: &Drag,
    ids: &BTreeMap<VertexId, VertexId>,
    vars: &BTreeMap<String, String>,
) -> Drag {
    let mut out = Drag::empty();
    for v in d.vertex_ids() {
        let successors = d.successors(v).iter().map(|w| ids[w]).collect();
        let (name, label) = match d.label(v) {
            Label::Var(x) => {
                let nx = vars.get(x).cloned().unwrap_or_else(|| x.clone());
                (nx.clone(), Label::Var(nx))
            }
            l => (d.name(v).to_string(), l.clone()),
        };
        out.insert_vertex(ids[&v], name, label, successors, d.roots(v));
    }
    out
}

/// Left patterns: accessible from the roots, and no sprout dangles without
/// a predecessor.
pub fn is_pattern(d: &Drag) -> bool {
    is_right_pattern(d) && d.sprouts().all(|s| d.pred_count(s) > 0)
}

/// Right patterns only need accessibility.
pub fn is_right_pattern(d: &Drag) -> bool {
    let rooted: Vec<VertexId> = d.vertex_ids().filter(|&v| d.roots(v) > 0).collect();
    d.accessible(rooted).len() == d.len()
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RewriteError {
    /// The rule violates a structural invariant of [`Rule::new`].
    MalformedRule { reason: String },
    /// The rule drops variables left to right; the functional step is
    /// undefined for it.
    NotStringent,
    /// An operation precondition does not hold for these inputs.
    PreconditionViolated { reason: String },
    /// Same-variable plugs of this match land on inequivalent subdrags, so
    /// no transported switchboard can rewrite coherently.
    NotStronglyCompatible,
    /// The transported switchboard is not well behaved (plug cycle or root
    /// deficit): the occurrence is a non-match for this rule.
    RhsSwitchboardIllFormed,
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::MalformedRule { reason } => write!(f, "malformed rule: {}", reason),
            RewriteError::NotStringent => {
                write!(f, "rule drops variables and cannot be applied functionally")
            }
            RewriteError::PreconditionViolated { reason } => {
                write!(f, "precondition violated: {}", reason)
            }
            RewriteError::NotStronglyCompatible => {
                write!(f, "match wires one variable to inequivalent subdrags")
            }
            RewriteError::RhsSwitchboardIllFormed => {
                write!(f, "transported switchboard is not well behaved")
            }
        }
    }
}

impl std::error::Error for RewriteError {}

/// A factorization witness for one occurrence of a pattern inside a host:
/// `product(context, pattern, switchboard)` rebuilds the host.
///
/// `switchboard.left` wires context sprouts to pattern vertices (it covers
/// every rooted pattern vertex); `switchboard.right` wires every pattern
/// sprout into the context.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RewritingExtension {
    pub context: Drag,
    pub switchboard: Switchboard,
}

impl RewritingExtension {
    /// Structural sanity against a pattern. Checked: both wire sets aim
    /// across sides, every pattern sprout is wired, wired context sprouts
    /// carry pairwise distinct variables, and every rooted internal pattern
    /// vertex receives a wire.
    pub fn validate(&self, pattern: &Drag) -> Result<(), RewriteError> {
        let fail = |reason: String| Err(RewriteError::PreconditionViolated { reason });
        for w in self.switchboard.left.iter() {
            if !self.context.contains(w.origin) || !self.context.is_sprout(w.origin) {
                return fail("context wire does not start at a context sprout".to_string());
            }
            if !pattern.contains(w.target) {
                return fail("context wire does not target the pattern".to_string());
            }
        }
        let mut seen_vars = BTreeSet::new();
        for w in self.switchboard.left.iter() {
            let var = self.context.variable(w.origin).unwrap_or_default().to_string();
            if !seen_vars.insert(var) {
                return fail("two wired context sprouts share a variable".to_string());
            }
        }
        for w in self.switchboard.right.iter() {
            if !pattern.contains(w.origin) || !pattern.is_sprout(w.origin) {
                return fail("pattern wire does not start at a pattern sprout".to_string());
            }
            if !self.context.contains(w.target) {
                return fail("pattern wire does not target the context".to_string());
            }
        }
        for s in pattern.sprouts() {
            if self.switchboard.right.target_of(s).is_none() {
                return fail(format!("pattern sprout '{}' is not wired", pattern.name(s)));
            }
        }
        for v in pattern.vertex_ids() {
            if pattern.roots(v) > 0 && !self.switchboard.left.iter().any(|w| w.target == v) {
                return fail(format!(
                    "rooted pattern vertex '{}' receives no wire",
                    pattern.name(v)
                ));
            }
        }
        Ok(())
    }
}

/// Vertex ids equal, and label, successors and roots agree pointwise.
/// Display names are allowed to differ.
fn same_shape(a: &Drag, b: &Drag) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.vertex_ids().all(|v| {
        b.contains(v)
            && a.label(v) == b.label(v)
            && a.successors(v) == b.successors(v)
            && a.roots(v) == b.roots(v)
    })
}

/// Builds the rewriting extension for an injective occurrence of `pattern`
/// in `host`: internal pattern vertices are host vertices, sprouts map
/// wherever `map` sends them.
///
/// The context keeps every host vertex outside the pattern. Host edges
/// entering the pattern are re-aimed at fresh wired sprouts; a pattern
/// sprout whose image lies inside the pattern is bounced through a fresh
/// isolated context sprout carrying the sprout's indegree as roots; rooted
/// pattern vertices nothing wires to yet get a fresh plugless sprout.
/// Context roots keep host indegrees intact.
pub fn extension_from_injection(
    pattern: &Drag,
    host: &Drag,
    map: &BTreeMap<VertexId, VertexId>,
) -> Result<RewritingExtension, RewriteError> {
    extension_with_detached_edges(pattern, host, map, &[])
}

/// [`extension_from_injection`] with a choice of host edges re-aimed at
/// fresh wired sprouts instead of kept in the context. Each entry names a
/// context edge occurrence (source vertex, successor slot) and the pattern
/// sprout it routes through; the edge must point at that sprout's image, so
/// the recomposition chains back to the same vertex and the image gains the
/// corresponding context root. Factorizations differ only in this choice,
/// and the relational step must search all of them.
fn extension_with_detached_edges(
    pattern: &Drag,
    host: &Drag,
    map: &BTreeMap<VertexId, VertexId>,
    detach: &[(VertexId, usize, VertexId)],
) -> Result<RewritingExtension, RewriteError> {
    let fail = |reason: &str| {
        Err(RewriteError::PreconditionViolated { reason: reason.to_string() })
    };
    let m = VertexMap::new(pattern.clone(), host.clone(), map.clone());
    if !is_injection_relaxed(&m) {
        return fail("the vertex map is not an injection of the pattern");
    }
    if pattern.sprouts().any(|s| pattern.is_isolated_sprout(s) && pattern.roots(s) == 0) {
        return fail("the pattern has a rootless isolated sprout");
    }
    if pattern.sprouts().any(|s| host.contains(s)) {
        return fail("the pattern shares a sprout with the host");
    }

    let inside: BTreeSet<VertexId> = pattern.internals().collect();
    let outside: Vec<VertexId> =
        host.vertex_ids().filter(|v| !inside.contains(v)).collect();
    for &(w, slot, s) in detach {
        let aimed = host.successors(w).get(slot).copied();
        if inside.contains(&w)
            || !pattern.is_sprout(s)
            || aimed != map.get(&s).copied()
            || aimed.is_none_or(|v| inside.contains(&v))
        {
            return fail("a detached edge does not point at its sprout's image");
        }
    }
    let mut avoid: BTreeSet<String> = host.variables();
    avoid.extend(pattern.variables());

    let mut context = Drag::empty();
    let mut left: Vec<(VertexId, VertexId)> = Vec::new();
    let mut right: Vec<(VertexId, VertexId)> = Vec::new();

    let mut fresh_sprout = |context: &mut Drag, base: &str, roots: usize| {
        let var = fresh_var_avoiding(base, &avoid);
        avoid.insert(var.clone());
        let t = VertexId::fresh();
        context.insert_vertex(t, var.clone(), Label::Var(var), Vec::new(), roots);
        t
    };

    for &w in &outside {
        let mut successors = Vec::new();
        for (i, &h) in host.successors(w).iter().enumerate() {
            if inside.contains(&h) {
                let t = fresh_sprout(&mut context, "y", 0);
                left.push((t, h));
                successors.push(t);
            } else if let Some(&(_, _, s)) =
                detach.iter().find(|&&(dw, di, _)| dw == w && di == i)
            {
                let t = fresh_sprout(&mut context, "z", 0);
                left.push((t, s));
                successors.push(t);
            } else {
                successors.push(h);
            }
        }
        context.insert_vertex(
            w,
            host.name(w).to_string(),
            host.label(w).clone(),
            successors,
            0,
        );
    }
    for s in pattern.sprouts() {
        let image = map[&s];
        if inside.contains(&image) {
            let t = fresh_sprout(&mut context, "z", pattern.indegree(s));
            right.push((s, t));
            left.push((t, image));
        } else {
            right.push((s, image));
        }
    }
    // Coverage: every rooted pattern vertex, sprouts included, must receive
    // a wire so that transported switchboards stay comparable.
    let rooted: Vec<VertexId> = pattern.vertex_ids().filter(|&v| pattern.roots(v) > 0).collect();
    for v in rooted {
        if !left.iter().any(|&(_, tv)| tv == v) {
            let t = fresh_sprout(&mut context, "w", 0);
            left.push((t, v));
        }
    }
    for &w in &outside {
        context.set_roots(w, host.indegree(w) - context.pred_count(w));
    }

    let switchboard = Switchboard::new(
        WireSet::new(left).expect("fresh wire origins are distinct"),
        WireSet::new(right).expect("each pattern sprout is wired once"),
    );
    let ext = RewritingExtension { context, switchboard };
    debug_assert!(ext.validate(pattern).is_ok());
    #[cfg(debug_assertions)]
    {
        let rebuilt = product(&ext.context, pattern, &ext.switchboard)
            .expect("a constructed extension recomposes");
        debug_assert!(same_shape(&rebuilt, host), "recomposition must reproduce the host");
    }
    Ok(ext)
}

/// One occurrence of a rule in a host drag: the grafted rule instance
/// (fresh ids and variables, left internals renamed onto their host
/// images), the injection from the grafted left side into the host, and
/// the factorization extension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Match {
    pub rule: Rule,
    pub map: BTreeMap<VertexId, VertexId>,
    pub ext: RewritingExtension,
}

/// Grafts a pattern onto its image: internal vertices take their host id
/// and display name. Returns the grafted pattern, the id substitution and
/// the induced injection map.
fn graft(
    pattern: &Drag,
    host: &Drag,
    mono: &BTreeMap<VertexId, VertexId>,
) -> (Drag, BTreeMap<VertexId, VertexId>, BTreeMap<VertexId, VertexId>) {
    let mut grafted = pattern.clone();
    let mut subst = BTreeMap::new();
    for u in pattern.internals() {
        let image = mono[&u];
        grafted.rename_id(u, image);
        grafted.set_name(image, host.name(image).to_string());
        subst.insert(u, image);
    }
    let injection = grafted
        .vertex_ids()
        .map(|v| if grafted.is_sprout(v) { (v, mono[&v]) } else { (v, v) })
        .collect();
    (grafted, subst, injection)
}

/// Enumerates the occurrences of `rule`'s left side in `host`. The rule is
/// renamed apart once per call; each monomorphism is grafted and paired
/// with its extension.
pub fn find_matches(rule: &Rule, host: &Drag) -> Vec<Match> {
    let inst = rule.renamed_apart(&host.variables());
    let mut out = Vec::new();
    for mono in enumerate_monomorphisms(&inst.lhs, host) {
        let (lhs, subst, injection) = graft(&inst.lhs, host, &mono.map);
        let mut rhs = inst.rhs.clone();
        for (&old, &new) in &subst {
            if inst.shared.contains(&old) {
                rhs.rename_id(old, new);
                rhs.set_name(new, host.name(new).to_string());
            }
        }
        let shared_subst: BTreeMap<VertexId, VertexId> = subst
            .iter()
            .filter(|(old, _)| inst.shared.contains(old))
            .map(|(&a, &b)| (a, b))
            .collect();
        let rootmap = inst.rootmap.remapped(&subst, &shared_subst);
        let shared = inst.shared.iter().map(|v| subst.get(v).copied().unwrap_or(*v)).collect();
        let Ok(ext) = extension_from_injection(&lhs, host, &injection) else {
            continue;
        };
        let rule = Rule { name: inst.name.clone(), lhs, rhs, rootmap, shared };
        out.push(Match { rule, map: injection, ext });
    }
    out
}

/// How [`apply`] plugs the right hand side's variables.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Strategy {
    /// All right occurrences of a variable share one left plug target.
    #[default]
    Share,
    /// Right occurrences claim equivalent targets while their roots last,
    /// then fresh copies of the plugged subdrag are appended to the
    /// context.
    Clone,
    /// Right occurrences cycle through the left targets in order.
    AsLeft,
}

/// Assigns each wired context sprout a right hand root target, consuming
/// `pred(origin)` root pairs per wire. Plugless wires settle on the first
/// target with pairs to spare.
fn assign_transport(
    ctx: &Drag,
    origins: &[VertexId],
    idx: usize,
    counts: &mut BTreeMap<VertexId, usize>,
    out: &mut Vec<(VertexId, VertexId)>,
) -> bool {
    if idx == origins.len() {
        return true;
    }
    let origin = origins[idx];
    let k = ctx.pred_count(origin);
    let candidates: Vec<VertexId> = counts.keys().copied().collect();
    for w in candidates {
        if counts[&w] < k {
            continue;
        }
        *counts.get_mut(&w).unwrap() -= k;
        out.push((origin, w));
        if assign_transport(ctx, origins, idx + 1, counts, out) {
            return true;
        }
        out.pop();
        *counts.get_mut(&w).unwrap() += k;
    }
    false
}

/// Applies a matched rule to the host it was found in.
///
/// The context wires are transported through the root map; the right
/// sprouts are wired per `strategy`; the result is the product of the
/// (possibly extended) context with the right hand side. Failures of the
/// transported switchboard are reported as errors, never as panics, so a
/// caller can treat them as a non-match.
pub fn apply(host: &Drag, m: &Match, strategy: Strategy) -> Result<Drag, RewriteError> {
    let rule = &m.rule;
    if !rule.is_stringent() {
        return Err(RewriteError::NotStringent);
    }
    if !rule.rhs.variables().is_subset(&rule.lhs.variables()) {
        return Err(RewriteError::PreconditionViolated {
            reason: "right side introduces variables absent on the left".to_string(),
        });
    }
    let ctx = &m.ext.context;
    #[cfg(debug_assertions)]
    {
        let rebuilt = product(ctx, &rule.lhs, &m.ext.switchboard)
            .expect("a match extension recomposes");
        debug_assert!(same_shape(&rebuilt, host), "match does not factor this host");
    }
    let _ = host;

    // Plug targets of the left sprouts, per variable and in sprout id order.
    let mut left_targets: BTreeMap<String, Vec<VertexId>> = BTreeMap::new();
    for s in rule.lhs.sprouts() {
        let Some(t) = m.ext.switchboard.right.target_of(s) else {
            return Err(RewriteError::PreconditionViolated {
                reason: "a left sprout of the match is not wired".to_string(),
            });
        };
        left_targets
            .entry(rule.lhs.variable(s).unwrap_or_default().to_string())
            .or_default()
            .push(t);
    }
    // A coherent match plugs all sprouts of one variable into equivalent
    // subdrags; nothing can be rewritten functionally otherwise.
    for targets in left_targets.values() {
        for pair in targets.windows(2) {
            let a = ctx.subdrag([pair[0]]);
            let b = ctx.subdrag([pair[1]]);
            if find_iso(&a, &b, EQUI, &BTreeMap::new()).is_none() {
                return Err(RewriteError::NotStronglyCompatible);
            }
        }
    }

    // Context wires move from left root vertices to their right images.
    let mut by_target: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for w in m.ext.switchboard.left.iter() {
        by_target.entry(w.target).or_default().push(w.origin);
    }
    let mut left_wires: Vec<(VertexId, VertexId)> = Vec::new();
    for (v, mut origins) in by_target {
        origins.sort();
        let mut counts: BTreeMap<VertexId, usize> = BTreeMap::new();
        for t in rule.rootmap.targets_at(v) {
            *counts.entry(t).or_insert(0) += 1;
        }
        if counts.is_empty() {
            return Err(RewriteError::RhsSwitchboardIllFormed);
        }
        let mut assigned = Vec::new();
        if !assign_transport(ctx, &origins, 0, &mut counts, &mut assigned) {
            return Err(RewriteError::RhsSwitchboardIllFormed);
        }
        left_wires.extend(assigned);
    }

    // Right sprouts, per variable.
    let mut ctx_aug = ctx.clone();
    let mut right_wires: Vec<(VertexId, VertexId)> = Vec::new();
    let mut budget: BTreeMap<VertexId, usize> =
        ctx.vertex_ids().map(|v| (v, ctx.roots(v))).collect();
    let rhs_vars = rule.rhs.variables();
    for var in rhs_vars {
        let lhs_plugs = &left_targets[&var];
        let mut rhs_sprouts = rule.rhs.sprouts_of(&var);
        rhs_sprouts.sort();
        match strategy {
            Strategy::Share => {
                for t in rhs_sprouts {
                    right_wires.push((t, lhs_plugs[0]));
                }
            }
            Strategy::AsLeft => {
                for (j, t) in rhs_sprouts.into_iter().enumerate() {
                    right_wires.push((t, lhs_plugs[j % lhs_plugs.len()]));
                }
            }
            Strategy::Clone => {
                let class = ctx.subdrag([lhs_plugs[0]]);
                for t in rhs_sprouts {
                    let need = rule.rhs.pred_count(t);
                    let candidate = ctx_aug.vertex_ids().find(|&v| {
                        budget.get(&v).copied().unwrap_or(0) >= need
                            && find_iso(&ctx_aug.subdrag([v]), &class, EQUI, &BTreeMap::new())
                                .is_some()
                    });
                    let target = match candidate {
                        Some(v) => v,
                        None => {
                            let (mut copy, ids) = class.clone_fresh();
                            let mut avoid = ctx_aug.variables();
                            avoid.extend(rule.rhs.variables());
                            for s in copy.sprouts().collect::<Vec<_>>() {
                                let base =
                                    copy.variable(s).unwrap_or_default().to_string();
                                let fresh = fresh_var_avoiding(&base, &avoid);
                                avoid.insert(fresh.clone());
                                copy.set_label(s, Label::Var(fresh.clone()));
                                copy.set_name(s, fresh);
                            }
                            for v in copy.vertex_ids() {
                                budget.insert(v, copy.roots(v));
                            }
                            ctx_aug = ctx_aug.juxtapose(&copy);
                            ids[&lhs_plugs[0]]
                        }
                    };
                    *budget.get_mut(&target).unwrap() -= need;
                    right_wires.push((t, target));
                }
            }
        }
    }

    let switchboard = Switchboard::new(
        WireSet::new(left_wires).expect("context sprouts are wired at most once"),
        WireSet::new(right_wires).expect("right sprouts are wired at most once"),
    );
    let grew = ctx_aug.len() != ctx.len();
    let result = product(&ctx_aug, &rule.rhs, &switchboard).map_err(|e| match e {
        AlgebraError::NotASwitchboard(_) => RewriteError::RhsSwitchboardIllFormed,
        AlgebraError::IncompatibleDrags { reason } => {
            RewriteError::PreconditionViolated { reason }
        }
        AlgebraError::NotDisjoint { .. } => RewriteError::PreconditionViolated {
            reason: "rule right side shares vertices with the context".to_string(),
        },
    })?;
    #[cfg(debug_assertions)]
    {
        if !grew {
            let transported =
                RewritingExtension { context: ctx.clone(), switchboard: switchboard.clone() };
            debug_assert!(
                strongly_compatible(rule, &m.ext, &transported),
                "transported switchboards stay strongly compatible"
            );
        }
        for v in result.vertex_ids().filter(|&v| ctx_aug.contains(v)) {
            debug_assert_eq!(
                result.indegree(v),
                ctx_aug.indegree(v),
                "surviving context vertices keep their indegree"
            );
        }
        debug_assert!(result.validate().is_ok());
    }
    let _ = grew;
    Ok(result)
}

fn subdrags_related(
    c1: &Drag,
    v1: VertexId,
    c2: &Drag,
    v2: VertexId,
    opts: crate::morphism::IsoOpts,
) -> bool {
    find_iso(&c1.subdrag([v1]), &c2.subdrag([v2]), opts, &BTreeMap::new()).is_some()
}

/// Same-variable sprouts across the rule must be plugged into subdrags of
/// the same labeled shape (roots and variable names free).
fn variable_plugs_agree(
    rule: &Rule,
    e1: &RewritingExtension,
    e2: &RewritingExtension,
    opts: crate::morphism::IsoOpts,
) -> bool {
    for var in rule.lhs.variables() {
        for s in rule.lhs.sprouts_of(&var) {
            let Some(a) = e1.switchboard.right.target_of(s) else { return false };
            for t in rule.rhs.sprouts_of(&var) {
                let Some(b) = e2.switchboard.right.target_of(t) else { return false };
                if !subdrags_related(&e1.context, a, &e2.context, b, opts) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether two extensions rewrite the same occurrence: `e1` factors some
/// drag through the rule's left side, `e2` factors another through its
/// right side, and the two agree up to the root map.
///
/// Contexts must correspond either by a root preserving isomorphism (with
/// context wires following the root map), or, when neither side wires a
/// context sprout, up to sharing equivalence. Same-variable plugs must
/// generate subdrags of the same labeled shape.
pub fn compatible_extensions(
    rule: &Rule,
    e1: &RewritingExtension,
    e2: &RewritingExtension,
) -> bool {
    if !variable_plugs_agree(rule, e1, e2, SHAPE) {
        return false;
    }
    let wired1: BTreeSet<VertexId> = e1.switchboard.left.origins().collect();
    let wired2: BTreeSet<VertexId> = e2.switchboard.left.origins().collect();
    let allowed = |s: VertexId, t: VertexId| -> bool {
        match (wired1.contains(&s), wired2.contains(&t)) {
            (false, false) => true,
            (true, true) => {
                let from = e1.switchboard.left.target_of(s).unwrap();
                let to = e2.switchboard.left.target_of(t).unwrap();
                rule.rootmap.targets_at(from).contains(&to)
            }
            _ => false,
        }
    };
    let iso_tier =
        find_iso_constrained(&e1.context, &e2.context, RENAMED, &BTreeMap::new(), &allowed)
            .is_some();
    if iso_tier {
        return true;
    }
    wired1.is_empty()
        && wired2.is_empty()
        && find_iso(
            &shared_normal_form(&e1.context),
            &shared_normal_form(&e2.context),
            RENAMED,
            &BTreeMap::new(),
        )
        .is_some()
}

/// The tight variant used by the functional step: identical contexts,
/// context wires mapped exactly through the root map, and same-variable
/// plugs generating fully equimorphic subdrags.
pub fn strongly_compatible(
    rule: &Rule,
    e1: &RewritingExtension,
    e2: &RewritingExtension,
) -> bool {
    if e1.context != e2.context {
        return false;
    }
    let dom1: BTreeSet<VertexId> = e1.switchboard.left.origins().collect();
    let dom2: BTreeSet<VertexId> = e2.switchboard.left.origins().collect();
    if dom1 != dom2 {
        return false;
    }
    for w in e1.switchboard.left.iter() {
        let moved = e2.switchboard.left.target_of(w.origin).unwrap();
        if !rule.rootmap.targets_at(w.target).contains(&moved) {
            return false;
        }
    }
    variable_plugs_agree(rule, e1, e2, EQUI)
}

/// Extensions of one side of a rule in a host: each monomorphism grafted
/// and turned into a factorization.
fn side_extensions(
    pattern: &Drag,
    host: &Drag,
) -> Vec<(RewritingExtension, BTreeMap<VertexId, VertexId>)> {
    let mut out = Vec::new();
    for mono in enumerate_monomorphisms_relaxed(pattern, host) {
        let (grafted, subst, injection) = graft(pattern, host, &mono.map);
        let inside: BTreeSet<VertexId> = grafted.internals().collect();
        // Host edges into a sprout image may stay context edges or be
        // re-aimed through that sprout; every combination is a distinct
        // factorization of the host.
        let mut candidates: Vec<(VertexId, usize, VertexId)> = Vec::new();
        for s in grafted.sprouts() {
            let image = injection[&s];
            if inside.contains(&image) {
                continue;
            }
            for w in host.vertex_ids().filter(|v| !inside.contains(v)) {
                for (i, &h) in host.successors(w).iter().enumerate() {
                    if h == image {
                        candidates.push((w, i, s));
                    }
                }
            }
        }
        candidates.truncate(12);
        'mask: for mask in 0u32..(1 << candidates.len()) {
            let chosen: Vec<(VertexId, usize, VertexId)> = (0..candidates.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| candidates[i])
                .collect();
            for (a, ca) in chosen.iter().enumerate() {
                if chosen[a + 1..].iter().any(|cb| (ca.0, ca.1) == (cb.0, cb.1)) {
                    continue 'mask;
                }
            }
            if let Ok(ext) =
                extension_with_detached_edges(&grafted, host, &injection, &chosen)
            {
                out.push((ext, subst.clone()));
            }
        }
    }
    out
}

/// The relational step: true when some left factorization of `d` and some
/// right factorization of `d2` are compatible. Unlike [`apply`] this
/// accepts non-stringent rules and steps that duplicate or collapse shared
/// structure.
pub fn rewrites_to(rule: &Rule, d: &Drag, d2: &Drag) -> bool {
    let mut avoid = d.variables();
    avoid.extend(d2.variables());
    let inst = rule.renamed_apart(&avoid);
    let lefts = side_extensions(&inst.lhs, d);
    if lefts.is_empty() {
        return false;
    }
    let rights = side_extensions(&inst.rhs, d2);
    for (el, subst_l) in &lefts {
        for (er, subst_r) in &rights {
            let lhs = {
                let mut g = inst.lhs.clone();
                for (&old, &new) in subst_l {
                    g.rename_id(old, new);
                }
                g
            };
            let rhs = {
                let mut g = inst.rhs.clone();
                for (&old, &new) in subst_r {
                    g.rename_id(old, new);
                }
                g
            };
            let rootmap = inst.rootmap.remapped(subst_l, subst_r);
            let shared = lhs.vertex_ids().filter(|v| rhs.contains(*v)).collect();
            let grafted =
                Rule { name: inst.name.clone(), lhs, rhs, rootmap, shared };
            if compatible_extensions(&grafted, el, er) {
                return true;
            }
        }
    }
    false
}

/// One functional step per match, preferring shared plugs and falling back
/// to cloning when the shared wiring is not well behaved.
fn successors_of(rules: &[Rule], d: &Drag) -> Vec<Drag> {
    let mut out = Vec::new();
    for rule in rules {
        for m in find_matches(rule, d) {
            match apply(d, &m, Strategy::Share) {
                Ok(next) => out.push(next),
                Err(_) => {
                    if let Ok(next) = apply(d, &m, Strategy::Clone) {
                        out.push(next);
                    }
                }
            }
        }
    }
    out
}

fn push_new(states: &mut Vec<Drag>, frontier: &mut Vec<usize>, d: Drag) {
    if states.iter().any(|s| find_iso(s, &d, EQUI, &BTreeMap::new()).is_some()) {
        return;
    }
    states.push(d);
    frontier.push(states.len() - 1);
}

/// Breadth-first search for a common reduct modulo sharing: `Some(true)`
/// when `d1 ->* u` and `d2 ->* v` with `u` and `v` sharing equivalent
/// within `step_limit` steps per side, `Some(false)` when both sides are
/// exhausted first, `None` when the bound cuts the search off.
pub fn joinable_modulo_sharing(
    rules: &[Rule],
    d1: &Drag,
    d2: &Drag,
    step_limit: usize,
) -> Option<bool> {
    let mut left = vec![d1.clone()];
    let mut right = vec![d2.clone()];
    let mut lfront = vec![0usize];
    let mut rfront = vec![0usize];
    if sharing_equivalent(d1, d2) {
        return Some(true);
    }
    for _ in 0..step_limit {
        if lfront.is_empty() && rfront.is_empty() {
            return Some(false);
        }
        let lnext: Vec<Drag> =
            lfront.iter().flat_map(|&i| successors_of(rules, &left[i])).collect();
        let rnext: Vec<Drag> =
            rfront.iter().flat_map(|&i| successors_of(rules, &right[i])).collect();
        lfront = Vec::new();
        rfront = Vec::new();
        for d in lnext {
            push_new(&mut left, &mut lfront, d);
        }
        for d in rnext {
            push_new(&mut right, &mut rfront, d);
        }
        for l in &left {
            for r in &right {
                if sharing_equivalent(l, r) {
                    return Some(true);
                }
            }
        }
    }
    if lfront.is_empty() && rfront.is_empty() {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::{equimorphic, same_up_to_names, NAMED};
    use crate::text::parse_drag;

    fn d(src: &str) -> Drag {
        parse_drag(src).unwrap()
    }

    fn v(g: &Drag, name: &str) -> VertexId {
        g.find_by_name(name).unwrap()
    }

    fn rule(name: &str, lhs: &str, rhs: &str, roots: &[(&str, &str)]) -> Rule {
        let l = d(lhs);
        let r = d(rhs);
        let pairs: Vec<_> = roots.iter().map(|&(a, b)| (v(&l, a), v(&r, b))).collect();
        Rule::new(name, l, r, RootMap::new(pairs)).unwrap()
    }

    /// `h^[1](x, x) -> k^[1](x, x)` with one shared variable.
    fn collapse_rule() -> Rule {
        rule(
            "collapse",
            "{h: h[1](x1, x2); x1: $x; x2: $x}",
            "{k: k[1](x3, x4); x3: $x; x4: $x}",
            &[("h", "k")],
        )
    }

    /// The host with one rooted `a`, one shared `a`, and a rootless `f`
    /// hanging over the `h` redex.
    fn figure_host() -> Drag {
        d("{f: f(a1, h); a1: a[1]; h: h(a2, a2); a2: a}")
    }

    /// `g^[1](y^[2]) -> y^[3]` with the sprout shared between the sides.
    fn collect_rule() -> Rule {
        let l = d("{g: g[1](y); y: $y[2]}");
        let mut r = d("{y: $y[3]}");
        let ly = v(&l, "y");
        let ry = v(&r, "y");
        r.rename_id(ry, ly);
        let g = v(&l, "g");
        Rule::new("collect", l, r, RootMap::new([(g, ly), (ly, ly), (ly, ly)])).unwrap()
    }

    #[test]
    fn root_map_must_cover_both_sides() {
        let l = d("{h: h[1](x); x: $x}");
        let r = d("{k: k[2](x); x: $x}");
        let h = v(&l, "h");
        let k = v(&r, "k");
        let err = Rule::new("bad", l, r, RootMap::new([(h, k)])).unwrap_err();
        assert!(matches!(err, RewriteError::MalformedRule { .. }));
    }

    #[test]
    fn left_sprouts_need_a_predecessor() {
        let l = d("{h: h[1](x); x: $x; loose: $z}");
        let r = d("{k: k[1](x); x: $x}");
        let h = v(&l, "h");
        let k = v(&r, "k");
        let err = Rule::new("bad", l, r, RootMap::new([(h, k)])).unwrap_err();
        assert!(matches!(err, RewriteError::MalformedRule { .. }));
    }

    #[test]
    fn stringency_reads_the_variable_sets() {
        assert!(collapse_rule().is_stringent());
        let dropping = rule(
            "drop",
            "{h: h[1](x); x: $x}",
            "{k: k[1]}",
            &[("h", "k")],
        );
        assert!(!dropping.is_stringent());
    }

    #[test]
    fn pattern_predicates() {
        assert!(is_pattern(&d("{h: h[1](x); x: $x}")));
        assert!(!is_pattern(&d("{h: h(x); x: $x}")));
        assert!(is_right_pattern(&d("{k: k[1]}")));
        assert!(!is_right_pattern(&d("{k: k[1]; stray: b}")));
    }

    #[test]
    fn renaming_apart_freshens_ids_and_variables() {
        let r = collapse_rule();
        let avoid: BTreeSet<String> = ["x".to_string()].into();
        let inst = r.renamed_apart(&avoid);
        let old_ids: BTreeSet<VertexId> =
            r.lhs().vertex_ids().chain(r.rhs().vertex_ids()).collect();
        assert!(inst.lhs().vertex_ids().all(|v| !old_ids.contains(&v)));
        assert!(inst.lhs().variables().is_disjoint(&avoid));
        assert_eq!(inst.lhs().variables(), inst.rhs().variables());
        assert!(find_iso(inst.lhs(), r.lhs(), RENAMED, &BTreeMap::new()).is_some());
        assert_eq!(inst.rootmap().len(), 1);
    }

    // The running example: a drag with two f-successors, one of them the
    // redex of an arity-two pattern whose sprouts both land inside it.
    #[test]
    fn extension_construction_bounces_inner_sprouts() {
        let host = d("{h: h[1](f, f, h); f: f[1](h, f, h)}");
        let h = v(&host, "h");
        let f = v(&host, "f");
        let mut pattern = d("{f: f[4](x1, x2, x3); x1: $x1[1]; x2: $x2[1]; x3: $x3}");
        pattern.rename_id(v(&pattern, "f"), f);
        let map: BTreeMap<VertexId, VertexId> = [
            (f, f),
            (v(&pattern, "x1"), h),
            (v(&pattern, "x2"), f),
            (v(&pattern, "x3"), h),
        ]
        .into();
        let ext = extension_from_injection(&pattern, &host, &map).unwrap();

        // Context: h keeps its self loop, gains two wired sprouts for the
        // edges that entered f, and three roots; the bounced sprout carries
        // the indegree of x2; the rooted sprouts x1, x2 get plugless covers.
        assert_eq!(ext.context.len(), 6);
        assert_eq!(ext.context.roots(h), 3);
        let bounced: Vec<VertexId> = ext
            .context
            .sprouts()
            .filter(|&s| ext.context.roots(s) == 2)
            .collect();
        assert_eq!(bounced.len(), 1);
        assert_eq!(ext.switchboard.left.len(), 5);
        let into_f =
            ext.switchboard.left.iter().filter(|w| w.target == f).count();
        assert_eq!(into_f, 3);
        for s in [v(&pattern, "x1"), v(&pattern, "x2")] {
            assert_eq!(
                ext.switchboard.left.iter().filter(|w| w.target == s).count(),
                1
            );
        }
        assert_eq!(ext.switchboard.right.len(), 3);
        assert_eq!(ext.switchboard.right.target_of(v(&pattern, "x2")), Some(bounced[0]));
        let rebuilt = product(&ext.context, &pattern, &ext.switchboard).unwrap();
        assert!(same_up_to_names(&rebuilt, &host));
    }

    #[test]
    fn extension_for_a_rooted_isolated_sprout_adds_only_a_cover() {
        let host = figure_host();
        let pattern = d("{s: $s[1]}");
        let s = v(&pattern, "s");
        let map: BTreeMap<VertexId, VertexId> = [(s, v(&host, "h"))].into();
        let ext = extension_from_injection(&pattern, &host, &map).unwrap();
        // The context is the host plus one plugless sprout covering the
        // pattern's root.
        assert_eq!(ext.context.len(), host.len() + 1);
        for w in host.vertex_ids() {
            assert_eq!(ext.context.roots(w), host.roots(w));
            assert_eq!(ext.context.successors(w), host.successors(w));
        }
        let cover = ext.switchboard.left.origins().next().unwrap();
        assert!(ext.context.is_isolated_sprout(cover));
        assert_eq!(ext.context.roots(cover), 0);
        assert_eq!(ext.switchboard.left.target_of(cover), Some(s));
        assert_eq!(ext.switchboard.right.target_of(s), Some(v(&host, "h")));
    }

    #[test]
    fn extension_preconditions_are_reported() {
        let host = figure_host();
        let pattern = d("{h: h[1](x1, x2); x1: $x; x2: $x}");
        // Internal vertex not mapped to itself: not an injection.
        let map: BTreeMap<VertexId, VertexId> = [
            (v(&pattern, "h"), v(&host, "h")),
            (v(&pattern, "x1"), v(&host, "a2")),
            (v(&pattern, "x2"), v(&host, "a2")),
        ]
        .into();
        let err = extension_from_injection(&pattern, &host, &map).unwrap_err();
        assert!(matches!(err, RewriteError::PreconditionViolated { .. }));

        let loose = d("{s: $s}");
        let map: BTreeMap<VertexId, VertexId> = [(v(&loose, "s"), v(&host, "h"))].into();
        let err = extension_from_injection(&loose, &host, &map).unwrap_err();
        assert!(matches!(err, RewriteError::PreconditionViolated { .. }));
    }

    #[test]
    fn the_figure_host_has_exactly_one_match() {
        let host = figure_host();
        let matches = find_matches(&collapse_rule(), &host);
        assert_eq!(matches.len(), 1);
        let m = &matches[0];
        assert!(m.rule.lhs().contains(v(&host, "h")));
        let expected = d("{f: f(a1, z); a1: a[1]; z: $z; a2: a[2]}");
        assert!(find_iso(&m.ext.context, &expected, RENAMED, &BTreeMap::new()).is_some());
        assert!(m.ext.validate(m.rule.lhs()).is_ok());
    }

    #[test]
    fn a_missing_symbol_finds_no_match() {
        let host = d("{c: c[1]}");
        assert!(find_matches(&collapse_rule(), &host).is_empty());
    }

    #[test]
    fn apply_share_reuses_one_plug_target() {
        let host = figure_host();
        let m = &find_matches(&collapse_rule(), &host)[0];
        let out = apply(&host, m, Strategy::Share).unwrap();
        let expected = d("{f: f(a1, k); a1: a[1]; k: k(a2, a2); a2: a}");
        assert!(same_up_to_names(&out, &expected));
    }

    #[test]
    fn apply_as_left_mirrors_the_match_wiring() {
        let host = figure_host();
        let m = &find_matches(&collapse_rule(), &host)[0];
        let out = apply(&host, m, Strategy::AsLeft).unwrap();
        let expected = d("{f: f(a1, k); a1: a[1]; k: k(a2, a2); a2: a}");
        assert!(same_up_to_names(&out, &expected));
    }

    #[test]
    fn apply_clone_spreads_plugs_over_equivalent_sources() {
        let host = figure_host();
        let m = &find_matches(&collapse_rule(), &host)[0];
        let out = apply(&host, m, Strategy::Clone).unwrap();
        let expected = d("{f: f(a1, k); a1: a; k: k(a1, a2); a2: a[1]}");
        assert!(same_up_to_names(&out, &expected));
    }

    #[test]
    fn apply_clone_appends_copies_when_roots_run_out() {
        let host = d("{f: f[1](a1); a1: a}");
        let duplicate = rule(
            "duplicate",
            "{f: f[1](x); x: $x}",
            "{h: h[1](x1, x2); x1: $x; x2: $x}",
            &[("f", "h")],
        );
        let m = &find_matches(&duplicate, &host)[0];
        assert_eq!(
            apply(&host, m, Strategy::Share).unwrap_err(),
            RewriteError::RhsSwitchboardIllFormed
        );
        let out = apply(&host, m, Strategy::Clone).unwrap();
        let expected = d("{h: h[1](p, q); p: a; q: a}");
        assert!(equimorphic(&out, &expected));
    }

    #[test]
    fn apply_collects_garbage_through_root_transfer() {
        let host = d("{f: f[1](h); g: g[1](h); h: h[1](h)}");
        let m = &find_matches(&collect_rule(), &host)[0];
        let out = apply(&host, m, Strategy::Share).unwrap();
        let expected = d("{f: f[1](h); h: h[2](h)}");
        assert!(same_up_to_names(&out, &expected));
    }

    #[test]
    fn apply_keeps_context_indegrees() {
        let host = figure_host();
        let m = &find_matches(&collapse_rule(), &host)[0];
        let out = apply(&host, m, Strategy::Share).unwrap();
        for name in ["f", "a1", "a2"] {
            let w = v(&host, name);
            assert_eq!(out.indegree(w), host.indegree(w));
        }
    }

    #[test]
    fn a_constant_rule_rewrites_through_a_plugless_wire() {
        let host = d("{a: a[1]}");
        let constant = rule("flip", "{a: a[1]}", "{b: b[1]}", &[("a", "b")]);
        let m = &find_matches(&constant, &host)[0];
        let out = apply(&host, m, Strategy::Share).unwrap();
        assert!(same_up_to_names(&out, &d("{b: b[1]}")));
    }

    #[test]
    fn shared_rule_vertices_survive_with_their_identity() {
        let host = d("{f: f[1](c); c: c}");
        let l = d("{f: f[1](c); c: c}");
        let mut r = d("{g: g[1](c); c: c}");
        r.rename_id(v(&r, "c"), v(&l, "c"));
        let g = v(&r, "g");
        let keep = Rule::new("keep", l.clone(), r, RootMap::new([(v(&l, "f"), g)])).unwrap();
        assert_eq!(keep.shared().len(), 1);
        let m = &find_matches(&keep, &host)[0];
        let out = apply(&host, m, Strategy::Share).unwrap();
        assert!(same_up_to_names(&out, &d("{g: g[1](c); c: c}")));
        assert!(out.contains(v(&host, "c")));
    }

    #[test]
    fn root_maps_aimed_outside_the_rule_are_rejected() {
        let l = d("{f: f[1](c); c: c}");
        let r = d("{g: g[1](c); c: c}");
        let err =
            Rule::new("keep", l.clone(), r, RootMap::new([(v(&l, "f"), VertexId::fresh())]))
                .unwrap_err();
        assert!(matches!(err, RewriteError::MalformedRule { .. }));
    }

    #[test]
    fn a_transported_plug_cycle_is_a_non_match() {
        let host = d("{v: i(v)}");
        let identity = rule("identity", "{i: i[1](x); x: $x}", "{x: $x[1]}", &[("i", "x")]);
        let m = &find_matches(&identity, &host)[0];
        assert_eq!(
            apply(&host, m, Strategy::Share).unwrap_err(),
            RewriteError::RhsSwitchboardIllFormed
        );
    }

    #[test]
    fn incoherent_occurrences_cannot_rewrite() {
        let host = d("{h: h[1](a, b); a: a; b: b}");
        // Matching already refuses to send one variable to two subdrags of
        // different shapes.
        assert!(find_matches(&collapse_rule(), &host).is_empty());

        // A hand-built match over the same occurrence trips the coherence
        // guard inside apply instead.
        let inst = collapse_rule().renamed_apart(&host.variables());
        let mut lhs = inst.lhs.clone();
        let h_rule = lhs.internals().next().unwrap();
        let h = v(&host, "h");
        lhs.rename_id(h_rule, h);
        let rootmap = inst.rootmap.remapped(&[(h_rule, h)].into(), &BTreeMap::new());
        let rule = Rule {
            name: inst.name.clone(),
            lhs: lhs.clone(),
            rhs: inst.rhs.clone(),
            rootmap,
            shared: BTreeSet::new(),
        };
        let a = v(&host, "a");
        let b = v(&host, "b");
        let mut sprouts: Vec<VertexId> = lhs.sprouts().collect();
        sprouts.sort();
        let map: BTreeMap<VertexId, VertexId> =
            [(h, h), (sprouts[0], a), (sprouts[1], b)].into();
        let mut context = host.clone();
        context.remove_vertex(h);
        context.set_roots(a, 1);
        context.set_roots(b, 1);
        let w = VertexId::fresh();
        context.insert_vertex(w, "w".to_string(), Label::var("w"), Vec::new(), 0);
        let ext = RewritingExtension {
            context,
            switchboard: Switchboard::new(
                WireSet::new([(w, h)]).unwrap(),
                WireSet::new([(sprouts[0], a), (sprouts[1], b)]).unwrap(),
            ),
        };
        let m = Match { rule, map, ext };
        for strategy in [Strategy::Share, Strategy::Clone, Strategy::AsLeft] {
            assert_eq!(
                apply(&host, &m, strategy).unwrap_err(),
                RewriteError::NotStronglyCompatible
            );
        }
    }

    #[test]
    fn non_stringent_rules_are_rejected_by_apply() {
        let host = d("{h: h[1](x); x: $x}");
        let dropping = rule("drop", "{h: h[1](x); x: $x}", "{k: k[1]}", &[("h", "k")]);
        let m = &find_matches(&dropping, &host)[0];
        assert_eq!(apply(&host, m, Strategy::Share).unwrap_err(), RewriteError::NotStringent);
    }

    #[test]
    fn the_figure_wirings_are_strongly_compatible() {
        let host = figure_host();
        let m = &find_matches(&collapse_rule(), &host)[0];
        let k = v(m.rule.rhs(), "k");
        let mut rhs_sprouts: Vec<VertexId> = m.rule.rhs().sprouts().collect();
        rhs_sprouts.sort();
        let z = m.ext.switchboard.left.origins().next().unwrap();
        let a1 = v(&host, "a1");
        let a2 = v(&host, "a2");
        let upper = RewritingExtension {
            context: m.ext.context.clone(),
            switchboard: Switchboard::new(
                WireSet::new([(z, k)]).unwrap(),
                WireSet::new([(rhs_sprouts[0], a2), (rhs_sprouts[1], a2)]).unwrap(),
            ),
        };
        assert!(strongly_compatible(&m.rule, &m.ext, &upper));
        assert!(compatible_extensions(&m.rule, &m.ext, &upper));

        let lower = RewritingExtension {
            context: m.ext.context.clone(),
            switchboard: Switchboard::new(
                WireSet::new([(z, k)]).unwrap(),
                WireSet::new([(rhs_sprouts[0], a1), (rhs_sprouts[1], a2)]).unwrap(),
            ),
        };
        assert!(compatible_extensions(&m.rule, &m.ext, &lower));
    }

    #[test]
    fn wires_that_disobey_the_root_map_are_incompatible() {
        let host = d("{g: g[1](h); h: h(a); a: a}");
        let nest = rule(
            "nest",
            "{h: h[1](x); x: $x}",
            "{k: k[1](k2); k2: k2(x); x: $x}",
            &[("h", "k")],
        );
        let m = &find_matches(&nest, &host)[0];
        let t = m.ext.switchboard.left.origins().next().unwrap();
        let x = m.rule.rhs().sprouts().next().unwrap();
        let a = v(&host, "a");
        let k = v(m.rule.rhs(), "k");
        let k2 = v(m.rule.rhs(), "k2");
        let good = RewritingExtension {
            context: m.ext.context.clone(),
            switchboard: Switchboard::new(
                WireSet::new([(t, k)]).unwrap(),
                WireSet::new([(x, a)]).unwrap(),
            ),
        };
        assert!(strongly_compatible(&m.rule, &m.ext, &good));
        let bad = RewritingExtension {
            context: m.ext.context.clone(),
            switchboard: Switchboard::new(
                WireSet::new([(t, k2)]).unwrap(),
                WireSet::new([(x, a)]).unwrap(),
            ),
        };
        assert!(!strongly_compatible(&m.rule, &m.ext, &bad));
        assert!(!compatible_extensions(&m.rule, &m.ext, &bad));
    }

    /// `f(x, x) -> g(x, x)` with no roots anywhere, as used by the
    /// term-versus-drag comparison.
    fn rootless_rule() -> Rule {
        rule(
            "relabel",
            "{f: f(x1, x2); x1: $x; x2: $x}",
            "{g: g(x3, x4); x3: $x; x4: $x}",
            &[],
        )
    }

    #[test]
    fn relational_rewriting_clones_shared_arguments() {
        let shared = d("{f: f(a1, a1); a1: a}");
        let unshared = d("{g: g(b1, b2); b1: a; b2: a}");
        assert!(rewrites_to(&rootless_rule(), &shared, &unshared));
    }

    #[test]
    fn relational_rewriting_collapses_duplicate_arguments() {
        let unshared = d("{f: f(a1, a2); a1: a; a2: a}");
        let shared = d("{g: g(b1, b1); b1: a}");
        assert!(rewrites_to(&rootless_rule(), &unshared, &shared));
    }

    #[test]
    fn unrelated_drags_are_not_in_the_relation() {
        let shared = d("{f: f(a1, a1); a1: a}");
        assert!(!rewrites_to(&rootless_rule(), &shared, &d("{c: c[1]}")));
    }

    #[test]
    fn cloning_makes_duplicating_rules_joinable() {
        let rules = vec![
            rule(
                "unfold-f",
                "{f: f[1](x); x: $x}",
                "{h: h[1](x1, x2); x1: $x; x2: $x}",
                &[("f", "h")],
            ),
            rule(
                "unfold-g",
                "{g: g[1](x); x: $x}",
                "{h: h[1](x1, x2); x1: $x; x2: $x}",
                &[("g", "h")],
            ),
        ];
        let d1 = d("{f: f[1](a1); a1: a}");
        let d2 = d("{g: g[1](a1); a1: a}");
        assert_eq!(joinable_modulo_sharing(&rules, &d1, &d2, 4), Some(true));
    }

    #[test]
    fn identical_drags_join_without_rules() {
        let g = figure_host();
        assert_eq!(joinable_modulo_sharing(&[], &g, &g, 0), Some(true));
    }

    #[test]
    fn distinct_normal_forms_never_join() {
        let rules = vec![
            rule("left", "{a: a[1]}", "{b: b[1]}", &[("a", "b")]),
            rule("right", "{c: c[1]}", "{e: e[1]}", &[("c", "e")]),
        ];
        let d1 = d("{a: a[1]}");
        let d2 = d("{c: c[1]}");
        assert_eq!(joinable_modulo_sharing(&rules, &d1, &d2, 5), Some(false));
    }

    #[test]
    fn share_and_clone_results_stay_sharing_equivalent() {
        let host = figure_host();
        let m = &find_matches(&collapse_rule(), &host)[0];
        let shared = apply(&host, m, Strategy::Share).unwrap();
        let cloned = apply(&host, m, Strategy::Clone).unwrap();
        assert!(sharing_equivalent(&shared, &cloned));
        assert!(find_iso(&shared, &cloned, NAMED, &BTreeMap::new()).is_none());
    }
}
