//! First order terms, a naive term rewriter, and the encoding of terms and
//! term rewriting systems as drags.
//!
//! A term encodes as a tree-shaped drag with one vertex per position and one
//! sprout per variable occurrence; the head may carry a root. A term rule
//! encodes as a drag rule whose sides are single-rooted encodings joined by
//! the forced singleton root map. [`check_faithfulness`] sweeps a term's
//! reachable reducts and asserts both directions of the correspondence:
//! every term step has a drag counterpart, and every functional drag step
//! lands on the encoding of some term step up to sharing equivalence.
//!
//! The term rewriter here is deliberately independent of the drag engine:
//! position enumeration and syntactic matching over the [`Term`] tree only.
//! It exists to be an oracle, not to be fast.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::drag::{Drag, Label, VertexId};
use crate::algebra::WireSet;
use crate::rewrite::{apply, find_matches, rewrites_to, RootMap, Rule, Strategy};
use crate::sharing::sharing_equivalent;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Fun(String, Vec<Term>),
    Var(String),
}

impl Term {
    pub fn fun(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Fun(symbol.into(), args)
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(symbol: impl Into<String>) -> Term {
        Term::Fun(symbol.into(), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Fun(_, args) => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    /// All positions in preorder; the head is the empty position.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        if let Term::Fun(_, args) = self {
            for (i, a) in args.iter().enumerate() {
                for mut p in a.positions() {
                    p.insert(0, i);
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn subterm(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::Fun(_, args) => args.get(i)?.subterm(rest),
                Term::Var(_) => None,
            },
        }
    }

    /// The term with the subterm at `pos` replaced.
    pub fn replace(&self, pos: &[usize], with: &Term) -> Option<Term> {
        match pos.split_first() {
            None => Some(with.clone()),
            Some((&i, rest)) => match self {
                Term::Fun(f, args) => {
                    let mut args = args.clone();
                    let slot = args.get(i)?;
                    *args.get_mut(i)? = slot.replace(rest, with)?;
                    Some(Term::Fun(f.clone(), args))
                }
                Term::Var(_) => None,
            },
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Fun(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{}", x),
            Term::Fun(sym, args) => {
                write!(f, "{}", sym)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TermError {
    /// The left side of a term rule is a bare variable.
    VariableLhs,
    /// One symbol occurs with two different argument counts.
    ArityMismatch { symbol: String },
    /// The right side uses a variable the left side does not bind.
    ExtraVariable { name: String },
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::VariableLhs => write!(f, "left side of a term rule is a variable"),
            TermError::ArityMismatch { symbol } => {
                write!(f, "symbol '{}' is used with two different arities", symbol)
            }
            TermError::ExtraVariable { name } => {
                write!(f, "right side variable '{}' is not bound on the left", name)
            }
        }
    }
}

impl std::error::Error for TermError {}

fn collect_arities(t: &Term, map: &mut BTreeMap<String, usize>) -> Result<(), TermError> {
    if let Term::Fun(f, args) = t {
        let known = *map.entry(f.clone()).or_insert(args.len());
        if known != args.len() {
            return Err(TermError::ArityMismatch { symbol: f.clone() });
        }
        for a in args {
            collect_arities(a, map)?;
        }
    }
    Ok(())
}

/// A term rewrite rule `lhs => rhs`. Left sides are patterns (not bare
/// variables), right sides only use left variables, and every symbol keeps
/// one arity across the rule.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TermRule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl TermRule {
    pub fn new(name: impl Into<String>, lhs: Term, rhs: Term) -> Result<TermRule, TermError> {
        if lhs.is_var() {
            return Err(TermError::VariableLhs);
        }
        let mut arities = BTreeMap::new();
        collect_arities(&lhs, &mut arities)?;
        collect_arities(&rhs, &mut arities)?;
        if let Some(name) = rhs.variables().difference(&lhs.variables()).next() {
            return Err(TermError::ExtraVariable { name: name.clone() });
        }
        Ok(TermRule { name: name.into(), lhs, rhs })
    }
}

fn match_at(pattern: &Term, subject: &Term, subst: &mut BTreeMap<String, Term>) -> bool {
    match pattern {
        Term::Var(x) => match subst.get(x) {
            Some(bound) => bound == subject,
            None => {
                subst.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::Fun(f, args) => match subject {
            Term::Fun(g, brgs) if f == g && args.len() == brgs.len() => {
                args.iter().zip(brgs).all(|(a, b)| match_at(a, b, subst))
            }
            _ => false,
        },
    }
}

pub fn apply_subst(t: &Term, subst: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Var(x) => subst.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Fun(f, args) => {
            Term::Fun(f.clone(), args.iter().map(|a| apply_subst(a, subst)).collect())
        }
    }
}

/// Every one-step reduct of `t`, as (rule index, position, result) triples
/// in preorder position order.
pub fn term_steps(rules: &[TermRule], t: &Term) -> Vec<(usize, Vec<usize>, Term)> {
    let mut out = Vec::new();
    for pos in t.positions() {
        let sub = t.subterm(&pos).expect("enumerated positions exist");
        for (ri, rule) in rules.iter().enumerate() {
            let mut subst = BTreeMap::new();
            if match_at(&rule.lhs, sub, &mut subst) {
                let replaced = t
                    .replace(&pos, &apply_subst(&rule.rhs, &subst))
                    .expect("enumerated positions exist");
                out.push((ri, pos.clone(), replaced));
            }
        }
    }
    out
}

fn encode_into(t: &Term, d: &mut Drag) -> VertexId {
    let v = VertexId::fresh();
    match t {
        Term::Var(x) => {
            d.insert_vertex(v, x.clone(), Label::var(x), Vec::new(), 0);
        }
        Term::Fun(f, args) => {
            let successors: Vec<VertexId> = args.iter().map(|a| encode_into(a, d)).collect();
            d.insert_vertex(v, f.clone(), Label::internal(f), successors, 0);
        }
    }
    v
}

/// The tree-shaped drag of a term: one vertex per position, one sprout per
/// variable occurrence (occurrences of one variable stay distinct vertices
/// with the same label), and one root at the head when `rooted`.
pub fn encode_term(t: &Term, rooted: bool) -> Drag {
    let mut d = Drag::empty();
    let head = encode_into(t, &mut d);
    if rooted {
        d.set_roots(head, 1);
    }
    d
}

/// The head vertex of a tree-shaped drag: the one vertex nothing points to.
pub fn term_head(d: &Drag) -> Option<VertexId> {
    let mut heads = d.vertex_ids().filter(|&v| d.pred_count(v) == 0);
    let head = heads.next()?;
    heads.next().is_none().then_some(head)
}

/// Encodes `l => r` with `n` roots at both heads and the n-fold root map
/// between them. `n = 1` is the term rule encoding; `n = 0` gives the
/// rootless rules used for dag-style relational rewriting. A schema over
/// all root counts is realized by picking `n` to match the indegree of the
/// intended occurrence.
pub fn encode_rule_with_roots(
    name: impl Into<String>,
    l: &Term,
    r: &Term,
    n: usize,
) -> Result<Rule, TermError> {
    if l.is_var() {
        return Err(TermError::VariableLhs);
    }
    let mut arities = BTreeMap::new();
    collect_arities(l, &mut arities)?;
    collect_arities(r, &mut arities)?;
    let mut lhs = encode_term(l, false);
    let mut rhs = encode_term(r, false);
    let lh = term_head(&lhs).expect("term encodings have a head");
    let rh = term_head(&rhs).expect("term encodings have a head");
    lhs.set_roots(lh, n);
    rhs.set_roots(rh, n);
    let rootmap = RootMap::new(std::iter::repeat_n((lh, rh), n));
    Ok(Rule::new(name, lhs, rhs, rootmap).expect("term encodings form valid rules"))
}

/// The standard encoding of a term rule: single-rooted sides, singleton
/// root map.
pub fn encode_rule(name: impl Into<String>, l: &Term, r: &Term) -> Result<Rule, TermError> {
    encode_rule_with_roots(name, l, r, 1)
}

/// Encodes a substitution against a pattern drag: one single-rooted copy of
/// `xσ` per sprout occurrence of `x` in the pattern, plus the switchboard
/// wiring each sprout to its own copy's head. Sprouts whose variable is
/// unbound stay unwired.
pub fn encode_subst(subst: &BTreeMap<String, Term>, pattern: &Drag) -> (Drag, WireSet) {
    let mut sum = Drag::empty();
    let mut wires = Vec::new();
    for s in pattern.sprouts() {
        let Some(x) = pattern.variable(s) else { continue };
        let Some(image) = subst.get(x) else { continue };
        let head = encode_into(image, &mut sum);
        sum.set_roots(head, 1);
        wires.push((s, head));
    }
    (sum, WireSet::new(wires).expect("pattern sprouts are distinct"))
}

/// Outcome of a faithfulness sweep: how many direction checks ran and
/// which of them failed.
#[derive(Clone, Debug, Default)]
pub struct FaithfulnessReport {
    pub pairs_checked: usize,
    pub violations: Vec<String>,
}

impl FaithfulnessReport {
    pub fn is_faithful(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sweeps every term reachable from `t` in at most `depth` steps and checks
/// the correspondence both ways: each term step must be mirrored by the
/// relational drag step between the encodings, and each functional drag
/// step (shared plugs first, cloning as the fallback) must land on the
/// encoding of some term step up to sharing equivalence.
///
/// Rules that drop variable occurrences have no exact drag counterpart
/// (the dropped subterm would survive as context garbage); the sweep
/// reports such steps as violations rather than hiding them.
pub fn check_faithfulness(
    rules: &[TermRule],
    t: &Term,
    depth: usize,
) -> Result<FaithfulnessReport, TermError> {
    let mut arities = BTreeMap::new();
    for rule in rules {
        collect_arities(&rule.lhs, &mut arities)?;
        collect_arities(&rule.rhs, &mut arities)?;
    }
    collect_arities(t, &mut arities)?;
    let encoded: Vec<Rule> = rules
        .iter()
        .map(|r| encode_rule(&r.name, &r.lhs, &r.rhs))
        .collect::<Result<_, _>>()?;

    let mut report = FaithfulnessReport::default();
    let mut seen: Vec<Term> = vec![t.clone()];
    let mut frontier: Vec<Term> = vec![t.clone()];
    for _ in 0..=depth {
        let mut next: Vec<Term> = Vec::new();
        for s in &frontier {
            let ds = encode_term(s, true);
            let steps = term_steps(rules, s);
            for (ri, pos, t2) in &steps {
                report.pairs_checked += 1;
                if !rewrites_to(&encoded[*ri], &ds, &encode_term(t2, true)) {
                    report.violations.push(format!(
                        "term step {} -> {} (rule {}, position {:?}) has no drag counterpart",
                        s, t2, rules[*ri].name, pos
                    ));
                }
            }
            for (ri, rule) in encoded.iter().enumerate() {
                for m in find_matches(rule, &ds) {
                    let result = apply(&ds, &m, Strategy::Share)
                        .or_else(|_| apply(&ds, &m, Strategy::Clone));
                    let Ok(d2) = result else { continue };
                    report.pairs_checked += 1;
                    let mirrored = steps.iter().any(|(rj, _, t2)| {
                        *rj == ri && sharing_equivalent(&encode_term(t2, true), &d2)
                    });
                    if !mirrored {
                        report.violations.push(format!(
                            "drag step from {} (rule {}) matches no term step up to sharing",
                            s, rules[ri].name
                        ));
                    }
                }
            }
            for (_, _, t2) in steps {
                if !seen.contains(&t2) {
                    seen.push(t2.clone());
                    next.push(t2);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(report)
}
