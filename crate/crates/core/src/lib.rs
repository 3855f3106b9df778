//! Simplicity analysis for algebras attached to contracting self-similar
//! groups, working from the nucleus given as a finite automaton.
//!
//! The pipeline:
//!
//! 1. [`presentation`] parses and validates the automaton (letter actions,
//!    restrictions, bisimulation-reduced states) and can close a generating
//!    set towards the nucleus under a depth bound.
//! 2. [`structure`] extracts the letter-fixing subgraph with its cyclic
//!    vertices, decides Hausdorffness, enumerates the maximal subgroups of
//!    strongly-fixing elements through the subset digraph, and builds the
//!    power-set Schreier graph with its minimal vertices.
//! 3. [`verdict`] reconstructs each maximal subgroup's multiplication table,
//!    stacks coset projection matrices over the minimal vertices, and turns
//!    exact rank and Smith normal form computations ([`linalg`]) into the
//!    final verdict: Hausdorff flag, simplicity of the complex and
//!    C*-algebras (one answer, by design), the set of characteristics where
//!    simplicity fails, and explicit witness elements.
//! 4. [`oracle`] re-derives the simplicity answer along the older
//!    equivalence-relation graph and is used to cross-check the engine.

pub mod dot;
pub mod linalg;
pub mod oracle;
pub mod presentation;
pub mod scc;
pub mod structure;
pub mod verdict;

pub use presentation::{
    bisimilar, identify_in_nucleus, nucleus_closure, parse_presentation,
    serialize_presentation, ClosureError, Factor, FormalProduct, Letter, NucleusAutomaton,
    ParseError, State, StateId, Word,
};
pub use structure::{
    build_delta, build_strongfix, cyclic_subsets, hausdorff_witness, is_hausdorff,
    maximal_cyclic_subgroups, strong_fix_set, CyclicSubgroupWitness, DeltaGraph,
    StrongFixGraph, SubsetError, SubsetVertex, DEFAULT_SUBSET_CAPACITY,
};
pub use verdict::{
    analyze_matrix, coset_matrix, decide_simplicity, group_table, verify_witness,
    EngineError, EngineOptions, GroupTable, NonsimpleCharacteristics, SimplicityAnalysis,
    SimplicityVerdict,
};
