//! The simplicity verdict.
//!
//! For every maximal strongly-fixing subgroup the decision reduces to exact
//! linear algebra: stack the indicator rows of the left cosets of H ∩ Y over
//! all minimal vertices Y of the power-set graph, and ask over which fields
//! the stacked matrix has full column rank. Full rank over the rationals
//! everywhere means the complex algebra (equivalently the C*-algebra) is
//! simple; the primes dividing the last invariant factor of the Smith normal
//! form are then the characteristics that still fail. A rank-deficient
//! matrix over the rationals defeats every characteristic at once. The
//! Hausdorff case short-circuits: all the projections are injective, so the
//! algebras are simple over every field.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{
    kernel_mod_p, rank_mod_p, rational_kernel, rational_rank, smith_normal_form, IntMatrix,
    SnfResult,
};
use crate::presentation::{
    identify_in_nucleus, FormalProduct, NucleusAutomaton, StateId, Word,
};
use crate::structure::{
    build_delta, build_strongfix, hausdorff_witness, maximal_cyclic_subgroups,
    CyclicSubgroupWitness, DeltaGraph, StrongFixGraph, SubsetError, SubsetVertex,
    DEFAULT_SUBSET_CAPACITY,
};

/// Multiplication table of a finite group realized on nucleus states.
#[derive(Clone, Debug)]
pub struct GroupTable {
    elements: Vec<StateId>,
    identity: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[StateId] {
        &self.elements
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn index_of(&self, g: StateId) -> Option<usize> {
        self.elements.binary_search(&g).ok()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.mul[i * self.elements.len() + j]
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inv[i]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupTableError {
    #[error("product {left}*{right} = {product} falls outside the candidate subgroup")]
    NotClosed { left: String, right: String, product: String },
    #[error("product {left}*{right} does not identify inside the nucleus")]
    NotInNucleus { left: String, right: String },
    #[error("group law failure: {0}")]
    LawViolation(String),
}

/// Reconstructs the group structure on a subset of nucleus states by
/// identifying every pairwise product back inside the nucleus.
pub fn group_table(
    aut: &NucleusAutomaton,
    elems: &SubsetVertex,
) -> Result<GroupTable, GroupTableError> {
    let elements: Vec<StateId> = elems.members().to_vec();
    let n = elements.len();
    let name = |g: StateId| aut.state_name(g).to_string();
    let identity = elements
        .binary_search(&aut.identity())
        .map_err(|_| GroupTableError::LawViolation("identity not among the elements".into()))?;

    let mut mul = vec![0usize; n * n];
    for (i, &g) in elements.iter().enumerate() {
        for (j, &h) in elements.iter().enumerate() {
            let p = FormalProduct::state(g).product(&FormalProduct::state(h));
            let Some(gh) = identify_in_nucleus(aut, &p) else {
                return Err(GroupTableError::NotInNucleus { left: name(g), right: name(h) });
            };
            let Ok(k) = elements.binary_search(&gh) else {
                return Err(GroupTableError::NotClosed {
                    left: name(g),
                    right: name(h),
                    product: name(gh),
                });
            };
            mul[i * n + j] = k;
        }
    }

    let mut inv = vec![usize::MAX; n];
    for i in 0..n {
        match (0..n).find(|&j| mul[i * n + j] == identity && mul[j * n + i] == identity) {
            Some(j) => inv[i] = j,
            None => {
                return Err(GroupTableError::LawViolation(format!(
                    "element {} has no inverse",
                    name(elements[i])
                )))
            }
        }
    }
    for i in 0..n {
        if mul[identity * n + i] != i || mul[i * n + identity] != i {
            return Err(GroupTableError::LawViolation("identity law fails".into()));
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if mul[mul[i * n + j] * n + k] != mul[i * n + mul[j * n + k]] {
                    return Err(GroupTableError::LawViolation(format!(
                        "associativity fails at ({}, {}, {})",
                        name(elements[i]),
                        name(elements[j]),
                        name(elements[k])
                    )));
                }
            }
        }
    }

    Ok(GroupTable { elements, identity, mul, inv })
}

/// Left cosets of the subgroup H ∩ Y inside the table's group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSystem {
    /// Element indices of H ∩ Y, sorted.
    pub subgroup: Vec<usize>,
    /// Partition into left cosets, each sorted, ordered by least member.
    pub cosets: Vec<Vec<usize>>,
}

pub fn coset_system(table: &GroupTable, y: &SubsetVertex) -> Result<CosetSystem, GroupTableError> {
    let n = table.order();
    let subgroup: Vec<usize> = (0..n).filter(|&i| y.contains(table.elements()[i])).collect();
    if !subgroup.contains(&table.identity_index()) {
        return Err(GroupTableError::LawViolation(
            "intersection with a minimal vertex misses the identity".into(),
        ));
    }
    for &s in &subgroup {
        if !subgroup.contains(&table.inv(s)) {
            return Err(GroupTableError::LawViolation(
                "intersection with a minimal vertex is not inverse-closed".into(),
            ));
        }
        for &t in &subgroup {
            if !subgroup.contains(&table.mul(s, t)) {
                return Err(GroupTableError::LawViolation(
                    "intersection with a minimal vertex is not product-closed".into(),
                ));
            }
        }
    }

    let mut seen = vec![false; n];
    let mut cosets = Vec::new();
    for g in 0..n {
        if seen[g] {
            continue;
        }
        let mut coset: Vec<usize> = subgroup.iter().map(|&s| table.mul(g, s)).collect();
        coset.sort_unstable();
        coset.dedup();
        for &m in &coset {
            seen[m] = true;
        }
        cosets.push(coset);
    }
    Ok(CosetSystem { subgroup, cosets })
}

/// Stacks the coset indicator rows of H ∩ Y over every given minimal vertex:
/// row r sums the coefficients of one coset, so the kernel is exactly the set
/// of elements killed by all the projections.
pub fn coset_matrix(
    table: &GroupTable,
    minimal: &[SubsetVertex],
) -> Result<IntMatrix, GroupTableError> {
    let n = table.order();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for y in minimal {
        let system = coset_system(table, y)?;
        for coset in &system.cosets {
            let mut row = vec![0i64; n];
            for &m in coset {
                row[m] = 1;
            }
            rows.push(row);
        }
    }
    Ok(IntMatrix::from_rows_i64(&rows))
}

/// Everything the characteristic analysis extracts from one coset matrix.
#[derive(Clone, Debug)]
pub struct IntMatrixAnalysis {
    pub matrix: IntMatrix,
    pub rank_q: usize,
    pub full_column_rank: bool,
    pub kernel_q: Vec<Vec<BigInt>>,
    pub snf: SnfResult,
    /// Primes dividing the last invariant factor; empty when the matrix is
    /// rank-deficient over the rationals (every characteristic fails then).
    pub bad_primes: Vec<u64>,
}

/// Rational rank first; if full, the Smith normal form pins down the finitely
/// many characteristics that can still lose rank.
pub fn analyze_matrix(matrix: IntMatrix) -> IntMatrixAnalysis {
    let rank_q = rational_rank(&matrix);
    let full_column_rank = rank_q == matrix.cols();
    let kernel_q = rational_kernel(&matrix);
    let snf = smith_normal_form(&matrix);
    debug_assert_eq!(snf.rank, rank_q);
    let bad_primes = if full_column_rank {
        prime_factors(&snf.diagonal[snf.diagonal.len() - 1])
    } else {
        Vec::new()
    };
    IntMatrixAnalysis { matrix, rank_q, full_column_rank, kernel_q, snf, bad_primes }
}

fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2u32);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.to_u64().expect("small prime factor"));
            while (&n % &d).is_zero() {
                n = &n / &d;
            }
        }
        d += 1;
    }
    if n > BigInt::from(1u32) {
        out.push(n.to_u64().expect("prime factor fits u64"));
    }
    out
}

/// Either every characteristic (including 0) or a finite ascending prime set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonsimpleCharacteristics {
    All,
    Primes(Vec<u64>),
}

impl Serialize for NonsimpleCharacteristics {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            NonsimpleCharacteristics::All => serializer.serialize_str("all"),
            NonsimpleCharacteristics::Primes(ps) => {
                let mut seq = serializer.serialize_seq(Some(ps.len()))?;
                for p in ps {
                    seq.serialize_element(p)?;
                }
                seq.end()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupReport {
    pub elements: Vec<String>,
    pub witness_word: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub subgroup_index: usize,
    /// 0 marks a rational (characteristic-zero) witness.
    pub characteristic: u64,
    /// Nonzero coefficients only, keyed by state name.
    pub coefficients: BTreeMap<String, i64>,
}

/// The serializable verdict; field order is fixed for golden-file stability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicityVerdict {
    pub hausdorff: bool,
    pub complex_simple: bool,
    /// Always equal to `complex_simple`: the two simplicity questions have
    /// the same answer for these groupoids, and the verdict encodes that.
    pub cstar_simple: bool,
    pub nonsimple_characteristics: NonsimpleCharacteristics,
    pub maximal_subgroups: Vec<SubgroupReport>,
    pub witnesses: Vec<WitnessReport>,
}

impl SimplicityVerdict {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdict serializes");
        s.push('\n');
        s
    }

    /// Whether the algebra is simple over fields of the given characteristic
    /// (0 or a prime).
    pub fn simple_in_characteristic(&self, characteristic: u64) -> bool {
        match &self.nonsimple_characteristics {
            NonsimpleCharacteristics::All => false,
            NonsimpleCharacteristics::Primes(ps) => {
                characteristic == 0 || !ps.contains(&characteristic)
            }
        }
    }
}

/// Per-subgroup working data kept alongside the verdict.
#[derive(Clone, Debug)]
pub struct SubgroupAnalysis {
    pub witness: CyclicSubgroupWitness,
    pub table: GroupTable,
    pub analysis: IntMatrixAnalysis,
}

/// Full result of the decision procedure, including the intermediate graphs.
#[derive(Clone, Debug)]
pub struct SimplicityAnalysis {
    pub verdict: SimplicityVerdict,
    pub strongfix: StrongFixGraph,
    pub delta: DeltaGraph,
    pub hausdorff_witness: Option<(StateId, Word)>,
    /// Empty when the Hausdorff short-circuit fired.
    pub subgroups: Vec<SubgroupAnalysis>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(
        "subset digraph over {cyclic} cyclic states needs 2^{exponent} vertices, \
         exceeding the capacity of {capacity}"
    )]
    CapacityExceeded { cyclic: usize, exponent: usize, capacity: u64 },
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

impl From<SubsetError> for EngineError {
    fn from(e: SubsetError) -> Self {
        match e {
            SubsetError::CapacityExceeded { cyclic, exponent, capacity } => {
                EngineError::CapacityExceeded { cyclic, exponent, capacity }
            }
            SubsetError::Inconsistent(msg) => EngineError::Inconsistency(msg),
        }
    }
}

impl From<GroupTableError> for EngineError {
    fn from(e: GroupTableError) -> Self {
        EngineError::Inconsistency(e.to_string())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    /// Cap on subset-digraph vertices (2^|C\{e}| must not exceed it).
    pub capacity: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { capacity: DEFAULT_SUBSET_CAPACITY }
    }
}

/// Decides Hausdorffness and simplicity over every characteristic.
pub fn decide_simplicity(
    aut: &NucleusAutomaton,
    options: EngineOptions,
) -> Result<SimplicityAnalysis, EngineError> {
    let strongfix = build_strongfix(aut);
    let hw = hausdorff_witness(&strongfix);
    let delta = build_delta(aut);

    if hw.is_none() {
        // Hausdorff: every H_w ∩ Y is trivial, all projections are
        // injective, nothing more to check.
        let verdict = SimplicityVerdict {
            hausdorff: true,
            complex_simple: true,
            cstar_simple: true,
            nonsimple_characteristics: NonsimpleCharacteristics::Primes(Vec::new()),
            maximal_subgroups: Vec::new(),
            witnesses: Vec::new(),
        };
        return Ok(SimplicityAnalysis {
            verdict,
            strongfix,
            delta,
            hausdorff_witness: None,
            subgroups: Vec::new(),
        });
    }

    let maximal = maximal_cyclic_subgroups(aut, &strongfix, options.capacity)?;
    let minimal_subsets: Vec<SubsetVertex> = delta
        .minimal_vertices()
        .into_iter()
        .map(|v| delta.vertex(v).clone())
        .collect();

    let mut subgroups = Vec::with_capacity(maximal.len());
    let mut reports = Vec::with_capacity(maximal.len());
    let mut witnesses: Vec<WitnessReport> = Vec::new();
    let mut complex_simple = true;
    let mut bad_primes: Vec<u64> = Vec::new();

    for (index, witness) in maximal.into_iter().enumerate() {
        let table = group_table(aut, &witness.elements)?;
        let matrix = coset_matrix(&table, &minimal_subsets)?;
        let analysis = analyze_matrix(matrix);

        reports.push(SubgroupReport {
            elements: witness
                .elements
                .members()
                .iter()
                .map(|&g| aut.state_name(g).to_string())
                .collect(),
            witness_word: aut.display_word(&witness.word),
        });

        if !analysis.full_column_rank {
            complex_simple = false;
            let v = analysis.kernel_q.first().ok_or_else(|| {
                EngineError::Inconsistency("rank-deficient matrix with empty kernel".into())
            })?;
            witnesses.push(witness_report(aut, &table, index, 0, v)?);
        } else {
            for &p in &analysis.bad_primes {
                if !bad_primes.contains(&p) {
                    bad_primes.push(p);
                }
                let basis = kernel_mod_p(&analysis.matrix, p)
                    .map_err(|e| EngineError::Inconsistency(e.to_string()))?;
                let v: Vec<BigInt> = basis
                    .first()
                    .ok_or_else(|| {
                        EngineError::Inconsistency(format!(
                            "prime {p} divides the last invariant factor but the kernel mod {p} is empty"
                        ))
                    })?
                    .iter()
                    .map(|&x| BigInt::from(x))
                    .collect();
                witnesses.push(witness_report(aut, &table, index, p, &v)?);
            }
        }
        subgroups.push(SubgroupAnalysis { witness, table, analysis });
    }

    bad_primes.sort_unstable();
    let nonsimple = if complex_simple {
        NonsimpleCharacteristics::Primes(bad_primes)
    } else {
        NonsimpleCharacteristics::All
    };

    // Re-check every emitted witness against the projections it claims to kill.
    for w in &witnesses {
        let sub = &subgroups[w.subgroup_index];
        let coeffs = coefficient_vector(aut, &sub.table, &w.coefficients);
        if !verify_witness(&sub.table, &minimal_subsets, &coeffs, w.characteristic)? {
            return Err(EngineError::Inconsistency(format!(
                "emitted witness for subgroup {} fails verification in characteristic {}",
                w.subgroup_index, w.characteristic
            )));
        }
    }

    let verdict = SimplicityVerdict {
        hausdorff: false,
        complex_simple,
        cstar_simple: complex_simple,
        nonsimple_characteristics: nonsimple,
        maximal_subgroups: reports,
        witnesses,
    };
    Ok(SimplicityAnalysis {
        verdict,
        strongfix,
        delta,
        hausdorff_witness: hw,
        subgroups,
    })
}

fn witness_report(
    aut: &NucleusAutomaton,
    table: &GroupTable,
    index: usize,
    characteristic: u64,
    coeffs: &[BigInt],
) -> Result<WitnessReport, EngineError> {
    let mut map = BTreeMap::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let name = aut.state_name(table.elements()[i]).to_string();
        let value = c.to_i64().ok_or_else(|| {
            EngineError::Inconsistency("witness coefficient exceeds i64".into())
        })?;
        map.insert(name, value);
    }
    Ok(WitnessReport { subgroup_index: index, characteristic, coefficients: map })
}

fn coefficient_vector(
    aut: &NucleusAutomaton,
    table: &GroupTable,
    coefficients: &BTreeMap<String, i64>,
) -> Vec<BigInt> {
    table
        .elements()
        .iter()
        .map(|&g| BigInt::from(*coefficients.get(aut.state_name(g)).unwrap_or(&0)))
        .collect()
}

/// True iff the vector is nonzero over the field of the given characteristic
/// and every coset sum over every minimal vertex vanishes there.
pub fn verify_witness(
    table: &GroupTable,
    minimal: &[SubsetVertex],
    coeffs: &[BigInt],
    characteristic: u64,
) -> Result<bool, GroupTableError> {
    assert_eq!(coeffs.len(), table.order());
    let reduces_to_zero = |x: &BigInt| -> bool {
        if characteristic == 0 {
            x.is_zero()
        } else {
            (x % BigInt::from(characteristic)).is_zero()
        }
    };
    if coeffs.iter().all(reduces_to_zero) {
        return Ok(false);
    }
    for y in minimal {
        let system = coset_system(table, y)?;
        for coset in &system.cosets {
            let sum: BigInt = coset.iter().map(|&m| coeffs[m].clone()).sum();
            if !reduces_to_zero(&sum) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Independent mod-p rank check used by the invariants test suite: the rank
/// over F_p must equal the number of invariant factors not divisible by p.
pub fn snf_rank_mod_p(analysis: &IntMatrixAnalysis, p: u64) -> (usize, usize) {
    let by_elimination = rank_mod_p(&analysis.matrix, p).expect("prime modulus");
    let bp = BigInt::from(p);
    let by_snf = analysis
        .snf
        .diagonal
        .iter()
        .filter(|d| !d.is_zero() && !(*d % &bp).is_zero())
        .count();
    (by_elimination, by_snf)
}
