//! Line oriented textual syntax.
//!
//! A drag literal lists one vertex per declaration inside braces:
//!
//! ```text
//! {f: f[1](x); h: h[4](x); x: $x[1]}
//! ```
//!
//! `name: symbol[roots](args)` declares an internal vertex; `name: $var[roots]`
//! declares a sprout. Root counts default to 0 and nullary argument lists may
//! be omitted. `#` starts a comment that runs to the end of the line. Wire
//! lists are comma separated `origin ~> target` pairs over vertex names.
//!
//! A rule file holds any number of
//!
//! ```text
//! rule collapse: {i: i[1](x); x: $x} => {x: $x[1]} roots {i -> x}
//! ```
//!
//! where names appearing in both bodies denote the same vertex and `roots`
//! pairs left root occurrences with right ones, one pair per occurrence. A
//! TRS file holds one `l => r` term pair per line, with an optional leading
//! `vars: x, acc` header naming the variables; without the header,
//! identifiers from `x y z u v w` followed only by digits are variables.
//!
//! Printing is the inverse: `parse_drag(print_drag(d))` reproduces `d` up to
//! vertex ids. Printed names are made unique first, so the round trip never
//! conflates vertices.

use crate::drag::{Drag, DragError, Label, VertexId};
use crate::rewrite::{RootMap, Rule};
use crate::term::{Term, TermRule};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextError {
    Syntax { line: usize, col: usize, msg: String },
    Validation(String),
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextError::Syntax { line, col, msg } => {
                write!(f, "syntax error at {}:{}: {}", line, col, msg)
            }
            TextError::Validation(msg) => write!(f, "invalid input: {}", msg),
        }
    }
}

impl std::error::Error for TextError {}

impl From<DragError> for TextError {
    fn from(e: DragError) -> TextError {
        TextError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(usize),
    Dollar,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    /// `=>`
    FatArrow,
    /// `->`
    ThinArrow,
    /// `~>`
    WaveArrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{}'", s),
            Tok::Number(n) => write!(f, "'{}'", n),
            Tok::Dollar => write!(f, "'$'"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::Colon => write!(f, "':'"),
            Tok::Semi => write!(f, "';'"),
            Tok::Comma => write!(f, "','"),
            Tok::FatArrow => write!(f, "'=>'"),
            Tok::ThinArrow => write!(f, "'->'"),
            Tok::WaveArrow => write!(f, "'~>'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, TextError> {
    Err(TextError::Syntax { line, col, msg: msg.into() })
}

impl Lexer {
    fn new(src: &str) -> Result<Lexer, TextError> {
        let mut toks = Vec::new();
        let mut chars = src.chars().peekable();
        let (mut line, mut col) = (1usize, 1usize);
        while let Some(&c) = chars.peek() {
            let (tl, tc) = (line, col);
            let bump = |chars: &mut std::iter::Peekable<std::str::Chars>,
                            line: &mut usize,
                            col: &mut usize| {
                let c = chars.next().unwrap();
                if c == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                c
            };
            if c.is_whitespace() {
                bump(&mut chars, &mut line, &mut col);
                continue;
            }
            if c == '#' {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    bump(&mut chars, &mut line, &mut col);
                }
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        s.push(bump(&mut chars, &mut line, &mut col));
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), tl, tc));
                continue;
            }
            if c.is_ascii_digit() {
                let mut n = 0usize;
                while let Some(&c2) = chars.peek() {
                    if let Some(d) = c2.to_digit(10) {
                        n = n.saturating_mul(10).saturating_add(d as usize);
                        bump(&mut chars, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Number(n), tl, tc));
                continue;
            }
            let c = bump(&mut chars, &mut line, &mut col);
            let tok = match c {
                '$' => Tok::Dollar,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '=' => match chars.peek() {
                    Some('>') => {
                        bump(&mut chars, &mut line, &mut col);
                        Tok::FatArrow
                    }
                    _ => return err(tl, tc, "expected '=>'"),
                },
                '-' => match chars.peek() {
                    Some('>') => {
                        bump(&mut chars, &mut line, &mut col);
                        Tok::ThinArrow
                    }
                    _ => return err(tl, tc, "expected '->'"),
                },
                '~' => match chars.peek() {
                    Some('>') => {
                        bump(&mut chars, &mut line, &mut col);
                        Tok::WaveArrow
                    }
                    _ => return err(tl, tc, "expected '~>'"),
                },
                other => return err(tl, tc, format!("unexpected character '{}'", other)),
            };
            toks.push((tok, tl, tc));
        }
        toks.push((Tok::Eof, line, col));
        Ok(Lexer { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].1, self.toks[self.pos].2)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), TextError> {
        let (l, c) = self.here();
        let got = self.next();
        if &got == want {
            Ok(())
        } else {
            err(l, c, format!("expected {}, found {}", want, got))
        }
    }

    fn ident(&mut self) -> Result<String, TextError> {
        let (l, c) = self.here();
        match self.next() {
            Tok::Ident(s) => Ok(s),
            got => err(l, c, format!("expected an identifier, found {}", got)),
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VertexDecl {
    pub(crate) name: String,
    pub(crate) label: Label,
    pub(crate) roots: usize,
    pub(crate) args: Vec<String>,
    pub(crate) line: usize,
    pub(crate) col: usize,
}

/// Parses the interior of a drag body after the opening brace; consumes the
/// closing brace.
fn parse_decls(lx: &mut Lexer) -> Result<Vec<VertexDecl>, TextError> {
    let mut decls = Vec::new();
    loop {
        if matches!(lx.peek(), Tok::RBrace) {
            lx.next();
            return Ok(decls);
        }
        let (line, col) = lx.here();
        let name = lx.ident()?;
        lx.expect(&Tok::Colon)?;
        let label = if matches!(lx.peek(), Tok::Dollar) {
            lx.next();
            let (vl, vc) = lx.here();
            let var = lx.ident()?;
            if var.starts_with("_cut") {
                return err(vl, vc, "variable names starting with '_cut' are reserved");
            }
            Label::var(&var)
        } else {
            Label::internal(&lx.ident()?)
        };
        let mut roots = 0usize;
        if matches!(lx.peek(), Tok::LBracket) {
            lx.next();
            let (nl, nc) = lx.here();
            roots = match lx.next() {
                Tok::Number(n) => n,
                got => return err(nl, nc, format!("expected a root count, found {}", got)),
            };
            lx.expect(&Tok::RBracket)?;
        }
        let mut args = Vec::new();
        if matches!(lx.peek(), Tok::LParen) {
            if label.is_var() {
                return err(line, col, format!("sprout '{}' cannot take arguments", name));
            }
            lx.next();
            if !matches!(lx.peek(), Tok::RParen) {
                loop {
                    args.push(lx.ident()?);
                    if matches!(lx.peek(), Tok::Comma) {
                        lx.next();
                    } else {
                        break;
                    }
                }
            }
            lx.expect(&Tok::RParen)?;
        }
        decls.push(VertexDecl { name, label, roots, args, line, col });
        match lx.peek() {
            Tok::Semi => {
                lx.next();
            }
            Tok::RBrace => {}
            _ => {
                let (l, c) = lx.here();
                return err(l, c, format!("expected ';' or '}}', found {}", lx.next()));
            }
        }
    }
}

/// Ids for a body's declarations: fresh ones, except names carried over
/// from `shared` (how rule literals share vertices between their sides).
fn assign_ids(
    decls: &[VertexDecl],
    shared: &BTreeMap<String, VertexId>,
) -> Result<BTreeMap<String, VertexId>, TextError> {
    let mut ids: BTreeMap<String, VertexId> = BTreeMap::new();
    for d in decls {
        if ids.contains_key(d.name.as_str()) {
            return err(d.line, d.col, format!("vertex '{}' declared twice", d.name));
        }
        let id = shared.get(&d.name).copied().unwrap_or_else(VertexId::fresh);
        ids.insert(d.name.clone(), id);
    }
    Ok(ids)
}

fn build_drag_with(
    decls: &[VertexDecl],
    ids: &BTreeMap<String, VertexId>,
) -> Result<Drag, TextError> {
    let mut drag = Drag::empty();
    for d in decls {
        let mut successors = Vec::new();
        for a in &d.args {
            match ids.get(a.as_str()) {
                Some(&id) => successors.push(id),
                None => {
                    return err(d.line, d.col, format!("'{}' references undeclared vertex '{}'", d.name, a))
                }
            }
        }
        drag.insert_vertex(ids[d.name.as_str()], d.name.clone(), d.label.clone(), successors, d.roots);
    }
    drag.validate()?;
    Ok(drag)
}

pub(crate) fn build_drag(decls: &[VertexDecl]) -> Result<Drag, TextError> {
    let ids = assign_ids(decls, &BTreeMap::new())?;
    build_drag_with(decls, &ids)
}

/// Parses a single drag literal. Trailing input is rejected.
pub fn parse_drag(src: &str) -> Result<Drag, TextError> {
    let mut lx = Lexer::new(src)?;
    lx.expect(&Tok::LBrace)?;
    let decls = parse_decls(&mut lx)?;
    if !lx.at_eof() {
        let (l, c) = lx.here();
        return err(l, c, format!("trailing input: {}", lx.next()));
    }
    build_drag(&decls)
}

/// Parses a comma separated wire list such as `x ~> y, y ~> h` into name
/// pairs. Resolution against actual drags happens at the call site.
pub fn parse_wire_names(src: &str) -> Result<Vec<(String, String)>, TextError> {
    let mut lx = Lexer::new(src)?;
    let mut out = Vec::new();
    if lx.at_eof() {
        return Ok(out);
    }
    loop {
        let origin = lx.ident()?;
        lx.expect(&Tok::WaveArrow)?;
        let target = lx.ident()?;
        out.push((origin, target));
        if matches!(lx.peek(), Tok::Comma) {
            lx.next();
            if lx.at_eof() {
                break;
            }
        } else {
            break;
        }
    }
    if !lx.at_eof() {
        let (l, c) = lx.here();
        return err(l, c, format!("trailing input: {}", lx.next()));
    }
    Ok(out)
}

/// Display names made unique: vertices whose names are empty or clash get an
/// id suffix. Falls back to suffixing everything when a suffixed name still
/// collides with a plain one, so the result is always injective.
fn disambiguate(base: &BTreeMap<VertexId, String>) -> BTreeMap<VertexId, String> {
    let mut used: BTreeMap<&str, usize> = BTreeMap::new();
    for b in base.values() {
        *used.entry(b.as_str()).or_insert(0) += 1;
    }
    let pick = |v: VertexId, b: &str, force: bool| {
        if b.is_empty() {
            format!("v{}", v.as_u64())
        } else if force || used[b] > 1 {
            format!("{}_{}", b, v.as_u64())
        } else {
            b.to_string()
        }
    };
    let first: BTreeMap<VertexId, String> =
        base.iter().map(|(&v, b)| (v, pick(v, b, false))).collect();
    let distinct: std::collections::BTreeSet<&String> = first.values().collect();
    if distinct.len() == first.len() {
        first
    } else {
        base.iter().map(|(&v, b)| (v, pick(v, b, true))).collect()
    }
}

pub(crate) fn unique_names(d: &Drag) -> BTreeMap<VertexId, String> {
    disambiguate(&d.vertex_ids().map(|v| (v, d.name(v).to_string())).collect())
}

/// One naming for both sides of a rule. Shared vertices appear once, so they
/// keep a single name; unrelated same-named vertices on opposite sides are
/// split apart, which is what keeps printed rules from conflating them.
fn unique_names_union(lhs: &Drag, rhs: &Drag) -> BTreeMap<VertexId, String> {
    let mut base: BTreeMap<VertexId, String> = BTreeMap::new();
    for v in lhs.vertex_ids() {
        base.insert(v, lhs.name(v).to_string());
    }
    for v in rhs.vertex_ids() {
        base.entry(v).or_insert_with(|| rhs.name(v).to_string());
    }
    disambiguate(&base)
}

fn print_body(d: &Drag, names: &BTreeMap<VertexId, String>) -> String {
    let mut parts = Vec::new();
    for v in d.vertex_ids() {
        let mut s = format!("{}: ", names[&v]);
        match d.label(v) {
            Label::Var(x) => {
                s.push('$');
                s.push_str(x);
            }
            Label::Internal { symbol } => s.push_str(symbol),
        }
        if d.roots(v) > 0 {
            s.push_str(&format!("[{}]", d.roots(v)));
        }
        let succ = d.successors(v);
        if !succ.is_empty() {
            let args: Vec<&str> = succ.iter().map(|w| names[w].as_str()).collect();
            s.push_str(&format!("({})", args.join(", ")));
        }
        parts.push(s);
    }
    format!("{{{}}}", parts.join("; "))
}

/// Canonical single line literal for a drag. Vertices appear in id order.
pub fn print_drag(d: &Drag) -> String {
    print_body(d, &unique_names(d))
}

fn expect_keyword(lx: &mut Lexer, word: &str) -> Result<(), TextError> {
    let (l, c) = lx.here();
    match lx.next() {
        Tok::Ident(s) if s == word => Ok(()),
        got => err(l, c, format!("expected '{}', found {}", word, got)),
    }
}

/// Parses a rule file: any number of
/// `rule name: {lhs} => {rhs} roots {a -> b, ...}` items.
pub fn parse_rules(src: &str) -> Result<Vec<Rule>, TextError> {
    let mut lx = Lexer::new(src)?;
    let mut rules = Vec::new();
    while !lx.at_eof() {
        expect_keyword(&mut lx, "rule")?;
        let name = lx.ident()?;
        lx.expect(&Tok::Colon)?;
        lx.expect(&Tok::LBrace)?;
        let lhs_decls = parse_decls(&mut lx)?;
        lx.expect(&Tok::FatArrow)?;
        lx.expect(&Tok::LBrace)?;
        let rhs_decls = parse_decls(&mut lx)?;
        expect_keyword(&mut lx, "roots")?;
        lx.expect(&Tok::LBrace)?;
        let mut pairs = Vec::new();
        if !matches!(lx.peek(), Tok::RBrace) {
            loop {
                let (pl, pc) = lx.here();
                let source = lx.ident()?;
                lx.expect(&Tok::ThinArrow)?;
                let target = lx.ident()?;
                pairs.push((source, target, pl, pc));
                if matches!(lx.peek(), Tok::Comma) {
                    lx.next();
                } else {
                    break;
                }
            }
        }
        lx.expect(&Tok::RBrace)?;
        let lhs_ids = assign_ids(&lhs_decls, &BTreeMap::new())?;
        let rhs_ids = assign_ids(&rhs_decls, &lhs_ids)?;
        let lhs = build_drag_with(&lhs_decls, &lhs_ids)?;
        let rhs = build_drag_with(&rhs_decls, &rhs_ids)?;
        let mut rootmap = Vec::new();
        for (source, target, pl, pc) in pairs {
            let s = match lhs_ids.get(source.as_str()) {
                Some(&id) => id,
                None => {
                    return err(pl, pc, format!("root source '{}' is not a left vertex", source))
                }
            };
            let t = match rhs_ids.get(target.as_str()) {
                Some(&id) => id,
                None => {
                    return err(pl, pc, format!("root target '{}' is not a right vertex", target))
                }
            };
            rootmap.push((s, t));
        }
        let rule = Rule::new(name, lhs, rhs, RootMap::new(rootmap))
            .map_err(|e| TextError::Validation(e.to_string()))?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Single line literal for a rule; parses back via `parse_rules` as long as
/// the rule's name is an identifier.
pub fn print_rule(r: &Rule) -> String {
    let names = unique_names_union(r.lhs(), r.rhs());
    let pairs: Vec<String> = r
        .rootmap()
        .iter()
        .map(|(a, b)| format!("{} -> {}", names[a], names[b]))
        .collect();
    format!(
        "rule {}: {} => {} roots {{{}}}",
        r.name,
        print_body(r.lhs(), &names),
        print_body(r.rhs(), &names),
        pairs.join(", ")
    )
}

/// How identifiers in term syntax split into variables and constants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum VarConvention {
    /// One of `x y z u v w` followed only by digits.
    #[default]
    Default,
    /// Exactly the listed names.
    Declared(BTreeSet<String>),
}

impl VarConvention {
    pub fn is_var(&self, name: &str) -> bool {
        match self {
            VarConvention::Default => {
                let mut cs = name.chars();
                matches!(cs.next(), Some('x' | 'y' | 'z' | 'u' | 'v' | 'w'))
                    && cs.all(|c| c.is_ascii_digit())
            }
            VarConvention::Declared(set) => set.contains(name),
        }
    }
}

fn parse_term_tokens(lx: &mut Lexer, vars: &VarConvention) -> Result<Term, TextError> {
    let (l, c) = lx.here();
    let head = lx.ident()?;
    if matches!(lx.peek(), Tok::LParen) {
        if vars.is_var(&head) {
            return err(l, c, format!("variable '{}' cannot take arguments", head));
        }
        lx.next();
        let mut args = Vec::new();
        if !matches!(lx.peek(), Tok::RParen) {
            loop {
                args.push(parse_term_tokens(lx, vars)?);
                if matches!(lx.peek(), Tok::Comma) {
                    lx.next();
                } else {
                    break;
                }
            }
        }
        lx.expect(&Tok::RParen)?;
        Ok(Term::fun(head, args))
    } else if vars.is_var(&head) {
        Ok(Term::var(head))
    } else {
        Ok(Term::constant(head))
    }
}

/// Parses one term such as `f(g(x), a)`. Trailing input is rejected.
pub fn parse_term(src: &str, vars: &VarConvention) -> Result<Term, TextError> {
    let mut lx = Lexer::new(src)?;
    let t = parse_term_tokens(&mut lx, vars)?;
    if !lx.at_eof() {
        let (l, c) = lx.here();
        return err(l, c, format!("trailing input: {}", lx.next()));
    }
    Ok(t)
}

/// Parses a TRS file and also reports which variable convention it used, so
/// callers can parse further terms consistently.
pub fn parse_trs_with_vars(src: &str) -> Result<(Vec<TermRule>, VarConvention), TextError> {
    let mut lx = Lexer::new(src)?;
    let mut vars = VarConvention::Default;
    if matches!(lx.peek(), Tok::Ident(s) if s == "vars") && matches!(lx.peek_at(1), Tok::Colon) {
        let header_line = lx.here().0;
        lx.next();
        lx.next();
        let mut set = BTreeSet::new();
        // The header owns the rest of its line and nothing more.
        while !lx.at_eof() && lx.here().0 == header_line {
            match lx.peek() {
                Tok::Comma => {
                    lx.next();
                }
                Tok::Ident(_) => {
                    set.insert(lx.ident()?);
                }
                _ => break,
            }
        }
        vars = VarConvention::Declared(set);
    }
    let mut rules = Vec::new();
    while !lx.at_eof() {
        let lhs = parse_term_tokens(&mut lx, &vars)?;
        lx.expect(&Tok::FatArrow)?;
        let rhs = parse_term_tokens(&mut lx, &vars)?;
        let rule = TermRule::new(format!("r{}", rules.len() + 1), lhs, rhs)
            .map_err(|e| TextError::Validation(e.to_string()))?;
        rules.push(rule);
    }
    Ok((rules, vars))
}

/// Parses a TRS file: one `l => r` pair per line, optional `vars:` header.
pub fn parse_trs(src: &str) -> Result<Vec<TermRule>, TextError> {
    parse_trs_with_vars(src).map(|(rules, _)| rules)
}
