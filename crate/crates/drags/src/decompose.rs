//! Decomposition of a drag into an expression over atomic drags.
//!
//! An atomic drag is a single internal vertex whose successors are pairwise
//! distinct rootless sprouts with pairwise distinct variables, or a bundle
//! of sprouts sharing one variable. Everything else can be split: separate
//! connected components become a sum, a self loop or an internal vertex
//! with a predecessor is detached across a product, and a variable whose
//! sprouts are shared, multiple or rooted is pulled out as a sprout bundle.
//!
//! Each split strictly shrinks the measure ⟨internal weight, sprout
//! indegrees, variable multiplicities⟩, so `atomize` terminates, and every
//! split evaluates back to its input exactly, ids and roots included. The
//! fixed trigger priority (components, loop, vertex, unshare) makes the
//! resulting expression reproducible.

use crate::algebra::{product, sum, AlgebraError, Switchboard, WireSet};
use crate::drag::{fresh_var_avoiding, Drag, Label, VertexId};
use crate::text::print_drag;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DragExpression {
    Atom(Drag),
    Sum(Box<DragExpression>, Box<DragExpression>),
    Product(Box<DragExpression>, Box<DragExpression>, Switchboard),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trigger {
    Atomic,
    MultiComponent,
    NonFlatLoop { vertex: VertexId, index: usize },
    NonFlatEdge { vertex: VertexId },
    FlatShared { variable: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    NotApplicable { reason: String },
    Algebra(AlgebraError),
}

impl fmt::Display for DecomposeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecomposeError::NotApplicable { reason } => {
                write!(f, "step not applicable: {}", reason)
            }
            DecomposeError::Algebra(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for DecomposeError {}

impl From<AlgebraError> for DecomposeError {
    fn from(e: AlgebraError) -> DecomposeError {
        DecomposeError::Algebra(e)
    }
}

fn not_applicable(reason: impl Into<String>) -> DecomposeError {
    DecomposeError::NotApplicable { reason: reason.into() }
}

impl DragExpression {
    pub fn atoms(&self) -> Vec<&Drag> {
        match self {
            DragExpression::Atom(d) => vec![d],
            DragExpression::Sum(l, r) | DragExpression::Product(l, r, _) => {
                let mut out = l.atoms();
                out.extend(r.atoms());
                out
            }
        }
    }

    /// True when every leaf satisfies [`is_atomic`].
    pub fn fully_atomic(&self) -> bool {
        self.atoms().iter().all(|d| is_atomic(d))
    }

    /// Leaf vertices that do not occur in `original`; decomposition only
    /// ever invents sprouts, so these are the fresh sprouts of the
    /// expression.
    pub fn fresh_sprouts(&self, original: &Drag) -> BTreeSet<VertexId> {
        self.atoms()
            .iter()
            .flat_map(|d| d.vertex_ids())
            .filter(|v| !original.contains(*v))
            .collect()
    }

    fn collect_names(&self, names: &mut BTreeMap<VertexId, String>) {
        match self {
            DragExpression::Atom(d) => {
                for v in d.vertex_ids() {
                    names.insert(v, d.name(v).to_string());
                }
            }
            DragExpression::Sum(l, r) | DragExpression::Product(l, r, _) => {
                l.collect_names(names);
                r.collect_names(names);
            }
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &BTreeMap<VertexId, String>) -> fmt::Result {
        match self {
            DragExpression::Atom(d) => write!(f, "{}", print_drag(d)),
            DragExpression::Sum(l, r) => {
                write!(f, "(")?;
                l.fmt_with(f, names)?;
                write!(f, " ++ ")?;
                r.fmt_with(f, names)?;
                write!(f, ")")
            }
            DragExpression::Product(l, r, sb) => {
                write!(f, "(")?;
                l.fmt_with(f, names)?;
                write!(f, " >< {{")?;
                let name = |v: VertexId| {
                    names.get(&v).cloned().unwrap_or_else(|| v.to_string())
                };
                let mut first = true;
                for w in sb.left.iter().chain(sb.right.iter()) {
                    if !first {
                        write!(f, ", ")?;
                    }
                    first = false;
                    write!(f, "{} ~> {}", name(w.origin), name(w.target))?;
                }
                write!(f, "}} ")?;
                r.fmt_with(f, names)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for DragExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = BTreeMap::new();
        self.collect_names(&mut names);
        self.fmt_with(f, &names)
    }
}

/// Atomicity: one internal vertex carrying all indegree as roots, with
/// pairwise distinct rootless sprout successors labeled by pairwise
/// distinct variables; or sprouts only, sharing a single variable. The
/// empty drag is a degenerate atom.
pub fn is_atomic(d: &Drag) -> bool {
    let internals: Vec<VertexId> = d.internals().collect();
    match internals.len() {
        0 => d.variables().len() <= 1,
        1 => {
            let v = internals[0];
            let succ = d.successors(v);
            let distinct: BTreeSet<VertexId> = succ.iter().copied().collect();
            if distinct.len() != succ.len() || distinct.len() != d.len() - 1 {
                return false;
            }
            let mut vars = BTreeSet::new();
            for &s in succ {
                if s == v || !d.is_sprout(s) || d.roots(s) != 0 {
                    return false;
                }
                if !vars.insert(d.variable(s).unwrap().to_string()) {
                    return false;
                }
            }
            true
        }
        _ => false,
    }
}

/// A variable blocks atomicity unless it has exactly one sprout, referenced
/// exactly once and rootless.
fn shared_variable(d: &Drag) -> Option<String> {
    for var in d.variables() {
        let sprouts = d.sprouts_of(&var);
        if sprouts.len() != 1 {
            return Some(var);
        }
        let s = sprouts[0];
        if d.pred_count(s) != 1 || d.roots(s) != 0 {
            return Some(var);
        }
    }
    None
}

/// The first applicable trigger, in priority order: atomic, components,
/// loop, internal vertex with a predecessor, shared variable.
pub fn classify(d: &Drag) -> Trigger {
    if is_atomic(d) {
        return Trigger::Atomic;
    }
    if d.component_sets().len() > 1 {
        return Trigger::MultiComponent;
    }
    if let Some(e) = d.edges().into_iter().find(|e| e.tail == e.head) {
        return Trigger::NonFlatLoop { vertex: e.tail, index: e.index };
    }
    // Detach the qualifying vertex of maximal indegree, ties to the lowest
    // id, for a reproducible expression.
    let pick = d
        .internals()
        .filter(|&v| d.edges().iter().any(|e| e.head == v && e.tail != v))
        .max_by(|&a, &b| {
            d.indegree(a).cmp(&d.indegree(b)).then(b.cmp(&a))
        });
    if let Some(v) = pick {
        return Trigger::NonFlatEdge { vertex: v };
    }
    if let Some(var) = shared_variable(d) {
        return Trigger::FlatShared { variable: var };
    }
    // A connected flat drag with no qualifying vertex and no blocking
    // variable is atomic, so this point is unreachable for valid drags.
    Trigger::Atomic
}

/// Splits a multi-component drag into a right-nested sum, components in
/// order of their smallest vertex id.
pub fn step_components(d: &Drag) -> Result<DragExpression, DecomposeError> {
    let parts = d.components();
    if parts.len() < 2 {
        return Err(not_applicable("drag is connected"));
    }
    let mut it = parts.into_iter().rev();
    let mut expr = DragExpression::Atom(it.next().unwrap());
    for c in it {
        expr = DragExpression::Sum(Box::new(DragExpression::Atom(c)), Box::new(expr));
    }
    Ok(expr)
}

fn fresh_sprout(rest: &mut Drag, avoid: &mut BTreeSet<String>, stem: &str, roots: usize) -> VertexId {
    let var = fresh_var_avoiding(stem, avoid);
    avoid.insert(var.clone());
    let id = VertexId::fresh();
    rest.insert_vertex(id, var.clone(), Label::var(&var), Vec::new(), roots);
    id
}

fn vertex_parts(d: &Drag, v: VertexId) -> Result<(Drag, Drag, Switchboard), DecomposeError> {
    if !d.contains(v) || !d.is_internal(v) {
        return Err(not_applicable("vertex is not internal"));
    }
    if !d.edges().iter().any(|e| e.head == v && e.tail != v) {
        return Err(not_applicable("vertex has no predecessor besides itself"));
    }
    let mut avoid = d.variables();
    let succ: Vec<VertexId> = d.successors(v).to_vec();
    let loops = succ.iter().filter(|&&w| w == v).count();

    let mut rest = d.clone();
    let replacement = fresh_sprout(&mut rest, &mut avoid, "x", loops);
    // Every successor occurrence gives its root back when the detached
    // vertex leaves; the atom's wires spend those roots again.
    let mut occurrences: BTreeMap<VertexId, usize> = BTreeMap::new();
    for &w in &succ {
        if w != v {
            *occurrences.entry(w).or_default() += 1;
        }
    }
    for (&w, &n) in &occurrences {
        rest.add_roots(w, n);
    }
    rest.redirect_edges_into(v, replacement);
    rest.remove_vertex(v);

    let mut atom = Drag::empty();
    let mut atom_sprouts = Vec::with_capacity(succ.len());
    for _ in &succ {
        atom_sprouts.push(fresh_sprout(&mut atom, &mut avoid, "x", 0));
    }
    atom.insert_vertex(
        v,
        d.name(v).to_string(),
        d.label(v).clone(),
        atom_sprouts.clone(),
        d.indegree(v),
    );

    let left = WireSet::new(
        atom_sprouts
            .iter()
            .zip(&succ)
            .map(|(&s, &w)| (s, if w == v { replacement } else { w })),
    )
    .expect("fresh origins are distinct");
    let right = WireSet::new([(replacement, v)]).expect("single wire");
    Ok((atom, rest, Switchboard::new(left, right)))
}

/// Detaches an internal vertex with an outside predecessor: the vertex
/// becomes an atom holding its indegree as roots, the remainder gets one
/// fresh sprout in its place.
pub fn step_vertex(d: &Drag, v: VertexId) -> Result<DragExpression, DecomposeError> {
    let (atom, rest, sb) = vertex_parts(d, v)?;
    Ok(DragExpression::Product(
        Box::new(DragExpression::Atom(atom)),
        Box::new(DragExpression::Atom(rest)),
        sb,
    ))
}

fn loop_parts(d: &Drag, v: VertexId, index: usize) -> Result<(Drag, Drag, Switchboard), DecomposeError> {
    let is_loop = d.contains(v)
        && d.successors(v).get(index).copied() == Some(v);
    if !is_loop {
        return Err(not_applicable("no loop at that position"));
    }
    let mut avoid = d.variables();
    let mut rest = d.clone();
    let cut = fresh_sprout(&mut rest, &mut avoid, "x", 0);
    rest.set_successor(v, index, cut);
    rest.add_roots(v, 1);

    let mut atom = Drag::empty();
    let t = fresh_sprout(&mut atom, &mut avoid, "x", 1);
    let left = WireSet::new([(cut, t)]).expect("single wire");
    let right = WireSet::new([(t, v)]).expect("single wire");
    Ok((rest, atom, Switchboard::new(left, right)))
}

/// Cuts one self loop by routing it through a single rooted sprout atom.
pub fn step_loop(d: &Drag, v: VertexId, index: usize) -> Result<DragExpression, DecomposeError> {
    let (rest, atom, sb) = loop_parts(d, v, index)?;
    Ok(DragExpression::Product(
        Box::new(DragExpression::Atom(rest)),
        Box::new(DragExpression::Atom(atom)),
        sb,
    ))
}

fn unshare_parts(d: &Drag, var: &str) -> Result<(Drag, Drag, Switchboard), DecomposeError> {
    let sprouts = d.sprouts_of(var);
    if sprouts.is_empty() {
        return Err(not_applicable("variable has no sprouts"));
    }
    let plain = sprouts.len() == 1
        && d.pred_count(sprouts[0]) == 1
        && d.roots(sprouts[0]) == 0;
    if plain {
        return Err(not_applicable("variable is already a plain argument"));
    }
    let members: BTreeSet<VertexId> = sprouts.iter().copied().collect();
    let mut avoid = d.variables();
    let mut rest = d.clone();
    let mut wires: Vec<(VertexId, VertexId)> = Vec::new();
    for e in d.edges() {
        if members.contains(&e.head) {
            let t = fresh_sprout(&mut rest, &mut avoid, "x", 0);
            rest.set_successor(e.tail, e.index, t);
            wires.push((t, e.head));
        }
    }
    let mut atom = Drag::empty();
    for &s in &sprouts {
        atom.insert_vertex(
            s,
            d.name(s).to_string(),
            d.label(s).clone(),
            Vec::new(),
            d.indegree(s),
        );
        rest.remove_vertex(s);
    }
    let left = WireSet::new(wires).expect("fresh origins are distinct");
    Ok((rest, atom, Switchboard::new(left, WireSet::empty())))
}

/// Pulls all sprouts of one variable out into a bundle atom; their
/// occurrences in the remainder become fresh, pairwise distinct sprouts.
pub fn step_unshare(d: &Drag, var: &str) -> Result<DragExpression, DecomposeError> {
    let (rest, atom, sb) = unshare_parts(d, var)?;
    Ok(DragExpression::Product(
        Box::new(DragExpression::Atom(rest)),
        Box::new(DragExpression::Atom(atom)),
        sb,
    ))
}

/// Decomposes a drag completely; the returned step count is the number of
/// splits performed.
pub fn atomize_counted(d: &Drag) -> (DragExpression, usize) {
    match classify(d) {
        Trigger::Atomic => (DragExpression::Atom(d.clone()), 0),
        Trigger::MultiComponent => {
            let parts = d.components();
            debug_assert!(parts.iter().all(|c| c.measure() < d.measure()));
            let mut steps = 1;
            let mut it = parts.into_iter().rev();
            let (mut expr, n) = atomize_counted(&it.next().unwrap());
            steps += n;
            for c in it {
                let (sub, n) = atomize_counted(&c);
                steps += n;
                expr = DragExpression::Sum(Box::new(sub), Box::new(expr));
            }
            (expr, steps)
        }
        Trigger::NonFlatLoop { vertex, index } => {
            let (rest, atom, sb) = loop_parts(d, vertex, index).expect("trigger matched");
            debug_assert!(rest.measure() < d.measure());
            let (sub, n) = atomize_counted(&rest);
            (
                DragExpression::Product(
                    Box::new(sub),
                    Box::new(DragExpression::Atom(atom)),
                    sb,
                ),
                n + 1,
            )
        }
        Trigger::NonFlatEdge { vertex } => {
            let (atom, rest, sb) = vertex_parts(d, vertex).expect("trigger matched");
            debug_assert!(rest.measure() < d.measure());
            let (sub, n) = atomize_counted(&rest);
            (
                DragExpression::Product(
                    Box::new(DragExpression::Atom(atom)),
                    Box::new(sub),
                    sb,
                ),
                n + 1,
            )
        }
        Trigger::FlatShared { variable } => {
            let (rest, atom, sb) = unshare_parts(d, &variable).expect("trigger matched");
            debug_assert!(rest.measure() < d.measure());
            let (sub, n) = atomize_counted(&rest);
            (
                DragExpression::Product(
                    Box::new(sub),
                    Box::new(DragExpression::Atom(atom)),
                    sb,
                ),
                n + 1,
            )
        }
    }
}

pub fn atomize(d: &Drag) -> DragExpression {
    atomize_counted(d).0
}

/// Folds an expression back into a drag.
pub fn evaluate(e: &DragExpression) -> Result<Drag, AlgebraError> {
    match e {
        DragExpression::Atom(d) => Ok(d.clone()),
        DragExpression::Sum(l, r) => sum(&evaluate(l)?, &evaluate(r)?),
        DragExpression::Product(l, r, sb) => product(&evaluate(l)?, &evaluate(r)?, sb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_drag;

    fn worked_example() -> Drag {
        parse_drag(
            "{f1: f(f2, h2); f2: f(h1, h2); h1: h(h1); h2: h(h3); h3: h(f2)}",
        )
        .unwrap()
    }

    #[test]
    fn atom_shapes() {
        assert!(is_atomic(&parse_drag("{f: f[2](x, y); x: $x; y: $y}").unwrap()));
        assert!(is_atomic(&parse_drag("{x: $x[3]}").unwrap()));
        assert!(is_atomic(&parse_drag("{x: $x[1]; y: $x}").unwrap()));
        // Same variable twice, rooted argument, repeated argument: all split.
        assert!(!is_atomic(&parse_drag("{f: f(x, y); x: $x; y: $x}").unwrap()));
        assert!(!is_atomic(&parse_drag("{f: f(x); x: $x[1]}").unwrap()));
        assert!(!is_atomic(&parse_drag("{f: f(x, x); x: $x}").unwrap()));
        assert!(!is_atomic(&parse_drag("{f: f(g); g: a}").unwrap()));
    }

    #[test]
    fn classify_priority() {
        let d = parse_drag("{f: f[2](x, y); x: $x; y: $y}").unwrap();
        assert_eq!(classify(&d), Trigger::Atomic);
        let d = parse_drag("{a: a; b: b}").unwrap();
        assert_eq!(classify(&d), Trigger::MultiComponent);
        let d = parse_drag("{g: g(a); a: a}").unwrap();
        let a = d.find_by_name("a").unwrap();
        assert_eq!(classify(&d), Trigger::NonFlatEdge { vertex: a });
        let d = parse_drag("{f: f(f)}").unwrap();
        let f = d.find_by_name("f").unwrap();
        assert_eq!(classify(&d), Trigger::NonFlatLoop { vertex: f, index: 0 });
        let d = parse_drag("{f: f(x, y); x: $x; y: $x}").unwrap();
        assert_eq!(classify(&d), Trigger::FlatShared { variable: "x".into() });
    }

    #[test]
    fn constant_detachment_matches_the_one_edge_example() {
        let d = parse_drag("{g: g(a); a: a}").unwrap();
        let a = d.find_by_name("a").unwrap();
        let expr = step_vertex(&d, a).unwrap();
        match &expr {
            DragExpression::Product(l, r, sb) => {
                let (atom, rest) = match (l.as_ref(), r.as_ref()) {
                    (DragExpression::Atom(x), DragExpression::Atom(y)) => (x, y),
                    _ => panic!("expected two leaves"),
                };
                assert_eq!(atom.len(), 1);
                assert_eq!(atom.roots(a), 1);
                assert_eq!(rest.len(), 2);
                assert!(sb.left.is_empty());
                assert_eq!(sb.right.len(), 1);
            }
            _ => panic!("expected a product"),
        }
        assert_eq!(evaluate(&expr).unwrap(), d);
    }

    #[test]
    fn loop_step_cuts_one_loop() {
        let d = parse_drag("{f: f(f)}").unwrap();
        let f = d.find_by_name("f").unwrap();
        let expr = step_loop(&d, f, 0).unwrap();
        match &expr {
            DragExpression::Product(l, r, sb) => {
                let (rest, atom) = match (l.as_ref(), r.as_ref()) {
                    (DragExpression::Atom(x), DragExpression::Atom(y)) => (x, y),
                    _ => panic!("expected two leaves"),
                };
                assert_eq!(rest.roots(f), 1);
                assert_eq!(atom.len(), 1);
                assert_eq!(atom.total_roots(), 1);
                assert_eq!(sb.left.len(), 1);
                assert_eq!(sb.right.len(), 1);
            }
            _ => panic!("expected a product"),
        }
        assert_eq!(evaluate(&expr).unwrap(), d);
    }

    #[test]
    fn double_loop_needs_two_steps() {
        let d = parse_drag("{f: f(f, f)}").unwrap();
        let (expr, steps) = atomize_counted(&d);
        assert!(expr.fully_atomic());
        assert_eq!(evaluate(&expr).unwrap(), d);
        // Two loop cuts leave an atom; nothing more to split.
        assert_eq!(steps, 2);
    }

    #[test]
    fn unshare_splits_two_sprouts_and_a_shared_one() {
        let d = parse_drag("{f: f(s, t); s: $x; t: $x}").unwrap();
        let expr = step_unshare(&d, "x").unwrap();
        match &expr {
            DragExpression::Product(_, r, sb) => {
                let atom = match r.as_ref() {
                    DragExpression::Atom(x) => x,
                    _ => panic!("expected a leaf"),
                };
                assert_eq!(atom.len(), 2);
                assert!(atom.vertex_ids().all(|v| atom.roots(v) == 1));
                assert_eq!(sb.left.len(), 2);
            }
            _ => panic!("expected a product"),
        }
        assert_eq!(evaluate(&expr).unwrap(), d);

        let d = parse_drag("{f: f(s, s); s: $x}").unwrap();
        let s = d.find_by_name("s").unwrap();
        let expr = step_unshare(&d, "x").unwrap();
        match &expr {
            DragExpression::Product(_, r, sb) => {
                let atom = match r.as_ref() {
                    DragExpression::Atom(x) => x,
                    _ => panic!("expected a leaf"),
                };
                assert_eq!(atom.len(), 1);
                assert_eq!(atom.roots(s), 2);
                assert_eq!(sb.left.len(), 2);
            }
            _ => panic!("expected a product"),
        }
        assert_eq!(evaluate(&expr).unwrap(), d);
    }

    #[test]
    fn vertex_step_keeps_self_loops_intact() {
        // Detaching a vertex that still has a loop routes the loop through
        // the replacement sprout; the replacement carries one root per loop.
        let d = parse_drag("{g: g(f); f: f(f, a); a: a}").unwrap();
        let f = d.find_by_name("f").unwrap();
        let expr = step_vertex(&d, f).unwrap();
        assert_eq!(evaluate(&expr).unwrap(), d);
    }

    #[test]
    fn atomize_round_trips_the_worked_example() {
        let d = worked_example();
        let (expr, _) = atomize_counted(&d);
        assert!(expr.fully_atomic());
        assert_eq!(evaluate(&expr).unwrap(), d);
        // One fresh sprout per incoming edge (seven), one more for the loop,
        // and one kept intermediate from unsharing the detached vertex's
        // replacement: nine in total.
        assert_eq!(expr.fresh_sprouts(&d).len(), 9);
    }

    #[test]
    fn worked_example_first_split_detaches_f2() {
        let d = worked_example();
        let f2 = d.find_by_name("f2").unwrap();
        let h1 = d.find_by_name("h1").unwrap();
        // The loop is cut first; the vertex split follows on the remainder.
        let (rest, _, _) = loop_parts(&d, h1, 0).unwrap();
        match classify(&rest) {
            Trigger::NonFlatEdge { vertex } => assert_eq!(vertex, f2),
            t => panic!("unexpected trigger {:?}", t),
        }
        let expr = step_vertex(&rest, f2).unwrap();
        match &expr {
            DragExpression::Product(l, _, sb) => {
                let atom = match l.as_ref() {
                    DragExpression::Atom(x) => x,
                    _ => panic!("expected a leaf"),
                };
                assert_eq!(atom.roots(f2), 2);
                assert_eq!(atom.len(), 3);
                assert_eq!(sb.left.len(), 2);
                assert_eq!(sb.right.len(), 1);
            }
            _ => panic!("expected a product"),
        }
        assert_eq!(evaluate(&expr).unwrap(), rest);
    }

    #[test]
    fn atomize_on_an_atom_is_a_leaf() {
        let d = parse_drag("{f: f[1](x, y); x: $x; y: $y}").unwrap();
        assert_eq!(atomize(&d), DragExpression::Atom(d));
    }

    #[test]
    fn components_sum_right_nested() {
        let d = parse_drag("{a: a; b: b; c: c}").unwrap();
        let expr = step_components(&d).unwrap();
        match &expr {
            DragExpression::Sum(_, r) => {
                assert!(matches!(r.as_ref(), DragExpression::Sum(_, _)));
            }
            _ => panic!("expected a sum"),
        }
        assert_eq!(evaluate(&expr).unwrap(), d);
    }

    #[test]
    fn every_step_shrinks_the_measure() {
        let d = worked_example();
        let mut stack = vec![d];
        while let Some(cur) = stack.pop() {
            match classify(&cur) {
                Trigger::Atomic => {}
                Trigger::MultiComponent => {
                    for c in cur.components() {
                        assert!(c.measure() < cur.measure());
                        stack.push(c);
                    }
                }
                Trigger::NonFlatLoop { vertex, index } => {
                    let (rest, _, _) = loop_parts(&cur, vertex, index).unwrap();
                    assert!(rest.measure() < cur.measure());
                    stack.push(rest);
                }
                Trigger::NonFlatEdge { vertex } => {
                    let (_, rest, _) = vertex_parts(&cur, vertex).unwrap();
                    assert!(rest.measure() < cur.measure());
                    stack.push(rest);
                }
                Trigger::FlatShared { variable } => {
                    let (rest, _, _) = unshare_parts(&cur, &variable).unwrap();
                    assert!(rest.measure() < cur.measure());
                    stack.push(rest);
                }
            }
        }
    }

    #[test]
    fn expression_printer_shows_structure() {
        let d = parse_drag("{g: g(a); a: a}").unwrap();
        let a = d.find_by_name("a").unwrap();
        let expr = step_vertex(&d, a).unwrap();
        let text = format!("{}", expr);
        assert!(text.contains(" >< {"));
        assert!(text.contains("~> a"));
    }
}
