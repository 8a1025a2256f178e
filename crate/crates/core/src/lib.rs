//! Exact jet-level algebra for map-germs between singular germs: group
//! actions, order-by-order equivalence solving, quivers of germ maps and
//! unfolding normal forms.

mod build;
pub mod engine;
pub mod error;
pub mod expr;
pub mod field;
pub mod germs;
pub mod ifs;
pub mod groups;
pub mod ideal;
pub mod jet;
pub mod linalg;
pub mod parse;
pub mod quiver;
pub mod sample;
pub mod solver;
pub mod tangent;
pub mod vars;

pub use error::{Error, Result};
pub use field::{Field, Scalar};
pub use jet::Jet;
pub use vars::{BlockKind, Monomial, MonomialIndex, VariableSet};
pub use parse::parse_jet;
pub use ideal::IdealJet;
pub use germs::{GermMap, LocalRingPresentation, Ring, UnfoldingView, ValidityReport};
pub use groups::{
    filtered_member, linearize_contact, Automorphism, ContactElem, FilteredSubgroupSpec, GroupElement, GroupTag,
    KElem, LRElem, LinearContact,
};
pub use solver::{
    map_order, probe_orbit_closure, solve_equivalence, Branch, Constraint, ConstraintKind, ProbeReport, Scope,
    SolveOutcome, SolveReport, SolveRequest,
};
pub use quiver::{
    check_rectangles, grade_vertices, purify, solve_quiver, solve_with_base_change, unfolding_normal_form,
    validate_quiver, Ambient, NonPureSolution, NormalFormOutcome, NormalFormReport, NormalFormRequest,
    PurifyReport, QuiverDefect, QuiverEdge, QuiverMorphismProblem, QuiverOutcome, QuiverReport, QuiverSpec,
    QuiverValidity, VertexGrade, VertexMorphism,
};
