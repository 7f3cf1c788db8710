//! Drags are finite directed graphs with ordered edges, a root multiset and
//! named variable leaves (sprouts). They compose by plugging sprouts into
//! roots, which makes them a convenient middle ground between terms, dags and
//! general graphs: cycles and sharing are first class, yet matching and
//! rewriting still work position by position, the way they do for terms.
//!
//! The crate is organized bottom up:
//!
//! * [`drag`]: the graph type itself, validity, accessibility, restriction,
//!   connected components and the termination measure.
//! * [`morphism`]: structure maps between drags, from equimorphisms (label
//!   and root preserving isomorphisms) down to plain morphisms, plus the
//!   matcher used by rewriting.
//! * [`algebra`]: sum, wiring and the composition product, with the
//!   well-behavedness and coherence checks that guard them.
//! * [`decompose`]: every drag as an expression over atomic drags, and the
//!   evaluator that folds such expressions back.
//! * [`sharing`]: maximal sharing, the step relation that merges equimorphic
//!   subdrags and the induced equivalence.
//! * [`rewrite`]: rules with root maps, match enumeration, context
//!   extensions and the rewrite step.
//! * [`term`]: encoding of ordinary first order terms and term rewriting
//!   systems, with a faithfulness checker against a naive term rewriter.
//! * [`category`]: pushout-style diagnostics for pairs of extensions.
//! * [`text`] and [`dot`]: a line oriented literal syntax and Graphviz
//!   output.

pub mod algebra;
pub mod category;
pub mod decompose;
pub mod dot;
pub mod drag;
pub mod morphism;
pub mod rewrite;
pub mod sharing;
pub mod term;
pub mod text;

pub use drag::{Drag, DragBuilder, DragError, Edge, Label, Measure, VertexId};
pub use rewrite::{Match, RewriteError, RewritingExtension, RootMap, Rule, Strategy};
pub use term::{Term, TermError, TermRule};
