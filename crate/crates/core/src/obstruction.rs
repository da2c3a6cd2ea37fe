//! The no-vertex-faithful-representation engine.
//!
//! A representation of a closed graph manifold that is faithful at a block
//! `v` forces every neighbor of `v` to carry a noncentral fiber of
//! projectively infinite order, hence an Abelian restriction. Whichever
//! maximal noncentral Abelian component such a neighbor belongs to, the
//! fiber relations of its members assemble into an integer matrix equation
//! `E·f = c` whose right-hand side involves only central symbols. When every
//! block of the manifold is strictly diagonally dominant, each row of `E`
//! strictly dominates its off-diagonal *and* right-hand-side mass, so
//! `det(E) ≠ 0`, and `det(E)·f = adj(E)·c` pins every member fiber to a root
//! of a central element — projectively *finite* order. The contradiction
//! rules the representation out.
//!
//! The actual component depends on the hypothetical representation, so
//! [`certify_no_vertex_faithful`] quantifies over every candidate: all
//! connected vertex subsets meeting the neighborhood of each vertex,
//! combined with every admissible set of ignored internal edges. A candidate
//! that ignores edges is not induced downstairs; the double-cover step
//! ([`crate::covers::induce_component_cover`]) lifts it to an induced
//! component upstairs, where the same matrix argument applies. The resulting
//! [`Certificate`] is pure data: every entry, inequality, determinant, and
//! solution can be recomputed from the manifold description alone.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::covers::{self, CoversError, InducedComponent};
use crate::linalg::{exact_div, IntMatrix};
use crate::manifold::{BlockId, EdgeKey, GraphManifold, ManifoldError};

#[derive(Debug, Error)]
pub enum ObstructionError {
    #[error("manifold fails validation: {0}")]
    InvalidManifold(String),
    #[error("manifold is not closed: block `{0}` has a free boundary torus")]
    NotClosed(BlockId),
    #[error("manifold is not strictly diagonally dominant at block `{0}`")]
    NotSdd(BlockId),
    #[error("block `{0}` has no glued neighbor")]
    IsolatedBlock(BlockId),
    #[error(
        "component is not induced; lift it through covers::induce_component_cover \
         and build the matrix on the cover"
    )]
    NotInduced,
    #[error("component vertices must be nonempty and connected")]
    NotConnected,
    #[error("associated matrix is singular")]
    SingularMatrix,
    #[error("candidate enumeration supports at most 64 blocks, got {0}")]
    TooManyBlocks(usize),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Cover(#[from] CoversError),
}

/// A connected set of blocks hypothesized to carry an Abelian restriction
/// with noncentral fibers.
///
/// `induced` records whether the candidate keeps every internal edge of the
/// manifold between its members. Only induced components admit an associated
/// matrix directly; the others go through the double cover first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianComponent {
    pub vertices: BTreeSet<BlockId>,
    pub induced: bool,
}

impl AbelianComponent {
    /// Builds a candidate from its vertex set and the internal edges it
    /// ignores, checking that what remains is nonempty and connected.
    pub fn new(
        m: &GraphManifold,
        vertices: BTreeSet<BlockId>,
        excluded: &BTreeSet<EdgeKey>,
    ) -> Result<Self, ObstructionError> {
        if vertices.is_empty() {
            return Err(ObstructionError::NotConnected);
        }
        for v in &vertices {
            m.block(v)?;
        }
        let kept: Vec<EdgeKey> = m
            .edges()
            .iter()
            .filter(|e| vertices.contains(&e.v) && vertices.contains(&e.w))
            .map(|e| e.key())
            .filter(|k| !excluded.contains(k))
            .collect();
        if !subset_connected(&vertices, &kept) {
            return Err(ObstructionError::NotConnected);
        }
        Ok(AbelianComponent {
            vertices,
            induced: excluded.is_empty(),
        })
    }
}

/// True when `vertices` is connected using only the listed edges.
fn subset_connected(vertices: &BTreeSet<BlockId>, edges: &[EdgeKey]) -> bool {
    let Some(start) = vertices.iter().next() else {
        return false;
    };
    let mut adjacency: BTreeMap<&BlockId, Vec<&BlockId>> = BTreeMap::new();
    for EdgeKey(a, b) in edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for n in adjacency.get(v).into_iter().flatten() {
            if vertices.contains(*n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == vertices.len()
}

/// The product `b_v` of the intersection indices over all glued neighbors
/// of `v`. Dividing it by any single index leaves an integer, which is what
/// lets the fiber relations stay inside group multiplication.
pub fn fiber_product(m: &GraphManifold, v: &BlockId) -> Result<BigInt, ObstructionError> {
    m.block(v)?;
    let mut product = BigInt::one();
    let mut glued = false;
    for e in m.edges_at(v) {
        glued = true;
        product *= &e.glue.b;
    }
    if !glued {
        return Err(ObstructionError::IsolatedBlock(v.clone()));
    }
    Ok(product)
}

/// One row of the dominance inequality `|bᵢkᵢ| > Σ|off-diagonal| + Σ|rhs|`.
///
/// The right-hand-side mass is included: the proof needs the diagonal to
/// dominate everything the row ever touches, not just the matrix part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowDominance {
    pub member: BlockId,
    pub diagonal: BigInt,
    pub off_diagonal_sum: BigInt,
    pub rhs_sum: BigInt,
}

impl RowDominance {
    pub fn holds(&self) -> bool {
        self.diagonal.abs() > &self.off_diagonal_sum + &self.rhs_sum
    }
}

/// The integer matrix of fiber relations for an induced component, together
/// with the right-hand side expressed over the central symbols of external
/// neighbors.
///
/// Row `i` states `bᵢkᵢ·fᵢ − Σ_{j adjacent in the component} (bᵢ/b_{j,i})·fⱼ
/// = Σ_{w external} (bᵢ/b_{w,i})·c_w`.
#[derive(Clone, Debug)]
pub struct AssociatedMatrix {
    members: Vec<BlockId>,
    matrix: IntMatrix,
    rhs: Vec<Vec<(BlockId, BigInt)>>,
}

impl AssociatedMatrix {
    /// Member blocks in row/column order (sorted by id).
    pub fn members(&self) -> &[BlockId] {
        &self.members
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Per row: external central symbols and their integer coefficients.
    pub fn rhs(&self) -> &[Vec<(BlockId, BigInt)>] {
        &self.rhs
    }

    pub fn row_dominance(&self) -> Vec<RowDominance> {
        let n = self.members.len();
        (0..n)
            .map(|i| {
                let mut off = BigInt::zero();
                for j in 0..n {
                    if j != i {
                        off += self.matrix.get(i, j).abs();
                    }
                }
                let rhs = self.rhs[i]
                    .iter()
                    .fold(BigInt::zero(), |acc, (_, c)| acc + c.abs());
                RowDominance {
                    member: self.members[i].clone(),
                    diagonal: self.matrix.get(i, i).clone(),
                    off_diagonal_sum: off,
                    rhs_sum: rhs,
                }
            })
            .collect()
    }

    pub fn is_strictly_dominant(&self) -> bool {
        self.row_dominance().iter().all(RowDominance::holds)
    }
}

/// Assembles the associated matrix of an induced component.
///
/// Every division `bᵢ/b_{w,i}` is exact by construction of `bᵢ`; the
/// diagonal is assembled as the integer sum `Σ (bᵢ/b_{w,i})·a_{w,i}` and
/// cross-checked against the rational product `bᵢ·kᵢ`.
pub fn associated_matrix(
    m: &GraphManifold,
    comp: &AbelianComponent,
) -> Result<AssociatedMatrix, ObstructionError> {
    if !comp.induced {
        return Err(ObstructionError::NotInduced);
    }
    for v in &comp.vertices {
        m.block(v)?;
    }
    let internal: Vec<EdgeKey> = m
        .edges()
        .iter()
        .filter(|e| comp.vertices.contains(&e.v) && comp.vertices.contains(&e.w))
        .map(|e| e.key())
        .collect();
    if !subset_connected(&comp.vertices, &internal) {
        return Err(ObstructionError::NotConnected);
    }

    let members: Vec<BlockId> = comp.vertices.iter().cloned().collect();
    let index: BTreeMap<&BlockId, usize> = members.iter().zip(0..).collect();
    let n = members.len();
    let mut entries = vec![BigInt::zero(); n * n];
    let mut rhs = Vec::with_capacity(n);
    for (i, u) in members.iter().enumerate() {
        let b_u = fiber_product(m, u)?;
        let mut diagonal = BigInt::zero();
        let mut external: BTreeMap<BlockId, BigInt> = BTreeMap::new();
        for e in m.edges_at(u) {
            let w = if e.v == *u { &e.w } else { &e.v };
            let (a_wu, b_wu) = m.fiber_expansion(u, e);
            let quota = exact_div(&b_u, &b_wu);
            diagonal += &quota * a_wu;
            match index.get(w) {
                Some(&j) => entries[i * n + j] -= quota,
                None => *external.entry(w.clone()).or_default() += quota,
            }
        }
        let check = BigRational::from_integer(b_u) * m.charge(u)?;
        assert_eq!(
            BigRational::from_integer(diagonal.clone()),
            check,
            "diagonal of row {u} disagrees with b·k"
        );
        entries[i * n + i] = diagonal;
        rhs.push(external.into_iter().collect());
    }
    Ok(AssociatedMatrix {
        members,
        matrix: IntMatrix::new(n, entries),
        rhs,
    })
}

/// Formal solution `det·fᵢ = Σ mⱼ·cⱼ` of the matrix equation, one linear
/// combination of external central symbols per member.
///
/// Each member fiber is thereby a `det`-th root of a central element, hence
/// of projectively finite order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalFiberSolution {
    pub determinant: BigInt,
    pub members: Vec<BlockId>,
    /// Member-aligned coefficient lists over external central symbols.
    pub coefficients: Vec<Vec<(BlockId, BigInt)>>,
}

/// Solves `E·f = c` formally by the adjugate: `det(E)·f = adj(E)·c`.
///
/// The result is substituted back into every row before returning, so a
/// returned solution is unconditionally consistent.
pub fn solve_fibers(a: &AssociatedMatrix) -> Result<FormalFiberSolution, ObstructionError> {
    let det = a.matrix().det();
    if det.is_zero() {
        return Err(ObstructionError::SingularMatrix);
    }
    let adj = a.matrix().adjugate();
    let n = a.members().len();
    let mut coefficients = Vec::with_capacity(n);
    for i in 0..n {
        let mut combo: BTreeMap<BlockId, BigInt> = BTreeMap::new();
        for k in 0..n {
            let weight = adj.get(i, k);
            if weight.is_zero() {
                continue;
            }
            for (symbol, c) in &a.rhs()[k] {
                *combo.entry(symbol.clone()).or_default() += weight * c;
            }
        }
        combo.retain(|_, c| !c.is_zero());
        coefficients.push(combo.into_iter().collect::<Vec<_>>());
    }

    for r in 0..n {
        let mut got: BTreeMap<&BlockId, BigInt> = BTreeMap::new();
        for (k, combo) in coefficients.iter().enumerate() {
            let m_rk = a.matrix().get(r, k);
            if m_rk.is_zero() {
                continue;
            }
            for (symbol, c) in combo {
                *got.entry(symbol).or_default() += m_rk * c;
            }
        }
        got.retain(|_, c| !c.is_zero());
        let want: BTreeMap<&BlockId, BigInt> = a.rhs()[r]
            .iter()
            .map(|(symbol, c)| (symbol, &det * c))
            .collect();
        assert_eq!(got, want, "fiber solution fails substitution in row {r}");
    }

    Ok(FormalFiberSolution {
        determinant: det,
        members: a.members().to_vec(),
        coefficients,
    })
}

/// Bounds on the candidate enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Largest candidate vertex-set size enumerated.
    pub size_bound: usize,
    /// Largest internal-edge count for which ignored-edge subsets are
    /// enumerated; above it only the induced candidate is analyzed.
    pub cut_bound: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            size_bound: 12,
            cut_bound: 12,
        }
    }
}

/// Double-cover step taken for a candidate that ignores internal edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverStep {
    /// Ignored edges downstairs; the cover cuts exactly these.
    pub cut: Vec<EdgeKey>,
    /// Sheet-0 lift of the pinned neighbor, anchoring the induced component
    /// upstairs.
    pub anchor: BlockId,
}

/// Analysis of one candidate component at one vertex: the matrix, the
/// dominance inequalities, and the formal solution that pins the fibers.
#[derive(Clone, Debug)]
pub struct ComponentRecord {
    /// Candidate vertex set downstairs.
    pub vertices: Vec<BlockId>,
    /// Internal edges the candidate ignores.
    pub excluded: Vec<EdgeKey>,
    /// Present exactly when `excluded` is nonempty.
    pub cover: Option<CoverStep>,
    pub matrix: AssociatedMatrix,
    pub dominance: Vec<RowDominance>,
    pub solution: FormalFiberSolution,
    /// Member adjacent to the analyzed vertex (its lift, in the cover case)
    /// whose fiber the solution pins to projectively finite order, against
    /// the projectively infinite order forced by faithfulness.
    pub pinned: BlockId,
}

/// All candidate analyses for one potential faithful vertex.
#[derive(Clone, Debug)]
pub struct VertexRecord {
    pub vertex: BlockId,
    pub neighbors: Vec<BlockId>,
    pub components: Vec<ComponentRecord>,
    /// Enumeration limits hit at this vertex; empty means exhaustive.
    pub gaps: Vec<String>,
}

impl VertexRecord {
    pub fn exhaustive(&self) -> bool {
        self.gaps.is_empty()
    }
}

/// The full obstruction certificate: per-vertex candidate analyses over the
/// whole manifold, in canonical order.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub manifold: GraphManifold,
    pub options: CertifyOptions,
    pub vertices: Vec<VertexRecord>,
}

impl Certificate {
    /// True when no enumeration bound was hit anywhere.
    pub fn exhaustive(&self) -> bool {
        self.vertices.iter().all(VertexRecord::exhaustive)
    }
}

/// Runs the whole argument on a closed, strictly diagonally dominant
/// manifold and returns the re-checkable certificate.
///
/// Vertices are analyzed in parallel; records are sorted by vertex id and
/// then by `(vertices, excluded)`, so the output is deterministic.
pub fn certify_no_vertex_faithful(
    m: &GraphManifold,
    options: &CertifyOptions,
) -> Result<Certificate, ObstructionError> {
    let report = m.validate();
    if !report.is_valid() {
        return Err(ObstructionError::InvalidManifold(report.to_string()));
    }
    for (id, block) in m.blocks() {
        if block.free_boundaries > 0 {
            return Err(ObstructionError::NotClosed(id.clone()));
        }
    }
    for id in m.blocks().keys() {
        if !m.is_sdd_block(id)? {
            return Err(ObstructionError::NotSdd(id.clone()));
        }
    }
    if m.blocks().len() > 64 {
        return Err(ObstructionError::TooManyBlocks(m.blocks().len()));
    }

    let ids: Vec<BlockId> = m.blocks().keys().cloned().collect();
    let vertices = ids
        .par_iter()
        .map(|v| analyze_vertex(m, v, options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Certificate {
        manifold: m.clone(),
        options: options.clone(),
        vertices,
    })
}

fn analyze_vertex(
    m: &GraphManifold,
    v: &BlockId,
    options: &CertifyOptions,
) -> Result<VertexRecord, ObstructionError> {
    let neighbors: Vec<BlockId> = m.neighbors(v).into_iter().collect();
    let mut gaps = Vec::new();
    let candidates = connected_candidates(m, v, options.size_bound, &mut gaps)?;

    let mut components = Vec::new();
    for s in &candidates {
        let internal: Vec<EdgeKey> = m
            .edges()
            .iter()
            .filter(|e| s.contains(&e.v) && s.contains(&e.w))
            .map(|e| e.key())
            .collect();
        let cuts: Vec<BTreeSet<EdgeKey>> = if internal.len() <= options.cut_bound {
            (0..1u64 << internal.len())
                .map(|mask| {
                    internal
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, k)| k.clone())
                        .collect::<BTreeSet<_>>()
                })
                .filter(|x| {
                    let kept: Vec<EdgeKey> = internal
                        .iter()
                        .filter(|k| !x.contains(k))
                        .cloned()
                        .collect();
                    subset_connected(s, &kept)
                })
                .collect()
        } else {
            gaps.push(format!(
                "candidate {{{}}} has {} internal edges, above the ignored-edge bound {}; \
                 only the induced candidate was analyzed",
                join_ids(s.iter()),
                internal.len(),
                options.cut_bound
            ));
            vec![BTreeSet::new()]
        };
        for x in cuts {
            components.push(analyze_candidate(m, v, s, &x)?);
        }
    }
    components.sort_by(|a, b| (&a.vertices, &a.excluded).cmp(&(&b.vertices, &b.excluded)));
    Ok(VertexRecord {
        vertex: v.clone(),
        neighbors,
        components,
        gaps,
    })
}

fn analyze_candidate(
    m: &GraphManifold,
    v: &BlockId,
    s: &BTreeSet<BlockId>,
    x: &BTreeSet<EdgeKey>,
) -> Result<ComponentRecord, ObstructionError> {
    let pinned_base = s
        .iter()
        .find(|w| m.edge_between(v, w).is_some())
        .expect("candidate meets the neighborhood of the analyzed vertex")
        .clone();
    let vertices: Vec<BlockId> = s.iter().cloned().collect();
    let excluded: Vec<EdgeKey> = x.iter().cloned().collect();

    let (target, comp, cover, pinned);
    if x.is_empty() {
        comp = AbelianComponent::new(m, s.clone(), &BTreeSet::new())?;
        target = m.clone();
        cover = None;
        pinned = pinned_base;
    } else {
        match covers::induce_component_cover(m, s, x)? {
            InducedComponent::Unchanged { .. } => {
                unreachable!("a nonempty cut never leaves the component unchanged")
            }
            InducedComponent::Disconnected { voltage } => {
                // A cut internal to a connected candidate always closes an
                // odd cycle, so this arm would mean the enumeration fed an
                // inconsistent candidate.
                unreachable!(
                    "double cover disconnected for cut {:?} despite a connected candidate \
                     (odd cycles: {})",
                    x,
                    voltage
                        .cycle_parities
                        .iter()
                        .filter(|(_, odd)| *odd)
                        .count()
                )
            }
            InducedComponent::Covered {
                cover: built,
                vertices: lifted,
            } => {
                let anchor = covers::lifted_id(&pinned_base, 0);
                let members = if lifted.contains(&anchor) {
                    lifted
                } else {
                    let all: BTreeSet<BlockId> = s
                        .iter()
                        .flat_map(|b| [covers::lifted_id(b, 0), covers::lifted_id(b, 1)])
                        .collect();
                    covers::component_within(&built.total, &all, &anchor)
                };
                comp = AbelianComponent::new(&built.total, members, &BTreeSet::new())?;
                target = built.total;
                cover = Some(CoverStep {
                    cut: excluded.clone(),
                    anchor: anchor.clone(),
                });
                pinned = anchor;
            }
        }
    }

    let matrix = associated_matrix(&target, &comp)?;
    let dominance = matrix.row_dominance();
    assert!(
        dominance.iter().all(RowDominance::holds),
        "blockwise dominance failed to carry over to the matrix at {v}"
    );
    let solution = solve_fibers(&matrix)?;
    Ok(ComponentRecord {
        vertices,
        excluded,
        cover,
        matrix,
        dominance,
        solution,
        pinned,
    })
}

/// Enumerates every connected subset of `V ∖ {v}` of size at most
/// `size_bound` that meets the neighborhood of `v`, each exactly once.
fn connected_candidates(
    m: &GraphManifold,
    v: &BlockId,
    size_bound: usize,
    gaps: &mut Vec<String>,
) -> Result<Vec<BTreeSet<BlockId>>, ObstructionError> {
    let others: Vec<BlockId> = m.blocks().keys().filter(|id| *id != v).cloned().collect();
    let n = others.len();
    if n > 64 {
        return Err(ObstructionError::TooManyBlocks(n + 1));
    }
    if n > size_bound {
        gaps.push(format!(
            "connected candidates larger than {size_bound} blocks were not enumerated"
        ));
    }
    let cap = size_bound.min(n) as u32;
    let mut adj = vec![0u64; n];
    for (i, a) in others.iter().enumerate() {
        for (j, b) in others.iter().enumerate() {
            if i != j && m.edge_between(a, b).is_some() {
                adj[i] |= 1 << j;
            }
        }
    }
    let neighbor_mask = others
        .iter()
        .enumerate()
        .filter(|(_, w)| m.edge_between(v, w).is_some())
        .fold(0u64, |acc, (i, _)| acc | 1 << i);

    // Grow connected sets rooted at their smallest index: each connected
    // subset is emitted exactly once.
    let mut masks = Vec::new();
    for root in 0..n {
        let forbidden = (1u64 << root) - 1;
        extend_connected(&adj, cap, 1 << root, forbidden, &mut masks);
    }

    let mut sets: Vec<BTreeSet<BlockId>> = masks
        .into_iter()
        .filter(|mask| mask & neighbor_mask != 0)
        .map(|mask| {
            others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, id)| id.clone())
                .collect()
        })
        .collect();
    sets.sort_by(|a, b| {
        a.iter()
            .collect::<Vec<_>>()
            .cmp(&b.iter().collect::<Vec<_>>())
    });
    Ok(sets)
}

fn extend_connected(adj: &[u64], cap: u32, set: u64, forbidden: u64, out: &mut Vec<u64>) {
    out.push(set);
    if set.count_ones() >= cap {
        return;
    }
    let mut frontier = {
        let mut acc = 0u64;
        let mut s = set;
        while s != 0 {
            acc |= adj[s.trailing_zeros() as usize];
            s &= s - 1;
        }
        acc & !set & !forbidden
    };
    let mut forbidden = forbidden;
    while frontier != 0 {
        let bit = frontier & frontier.wrapping_neg();
        frontier &= !bit;
        extend_connected(adj, cap, set | bit, forbidden, out);
        forbidden |= bit;
    }
}

fn join_ids<'a>(ids: impl Iterator<Item = &'a BlockId>) -> String {
    ids.map(BlockId::as_str).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Edge, GluingMatrix, SeifertBlock};

    fn id(s: &str) -> BlockId {
        BlockId::from(s)
    }

    fn manifold(blocks: &[&str], edges: &[(&str, &str, [i64; 4])]) -> GraphManifold {
        let blocks = blocks
            .iter()
            .map(|s| {
                (
                    id(s),
                    SeifertBlock {
                        genus: 2,
                        free_boundaries: 0,
                    },
                )
            })
            .collect();
        let edges = edges
            .iter()
            .map(|(v, w, [a, b, c, d])| Edge {
                v: id(v),
                w: id(w),
                glue: GluingMatrix::from_i64(*a, *b, *c, *d),
            })
            .collect();
        GraphManifold::new(blocks, edges)
    }

    fn two_block() -> GraphManifold {
        manifold(&["v", "w"], &[("v", "w", [2, 1, 5, 2])])
    }

    fn int(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn fiber_product_multiplies_intersection_indices() {
        let m = two_block();
        assert_eq!(fiber_product(&m, &id("v")).unwrap(), int(1));

        let m = manifold(
            &["u", "x", "y"],
            &[("u", "x", [1, 2, 1, 1]), ("u", "y", [1, -3, -1, 2])],
        );
        assert_eq!(fiber_product(&m, &id("u")).unwrap(), int(-6));

        let star = manifold(
            &["c", "p", "q", "r"],
            &[
                ("c", "p", [2, 1, 5, 2]),
                ("c", "q", [2, 1, 5, 2]),
                ("c", "r", [2, 1, 5, 2]),
            ],
        );
        assert_eq!(fiber_product(&star, &id("c")).unwrap(), int(1));
    }

    #[test]
    fn fiber_product_rejects_isolated_blocks() {
        let m = manifold(&["solo"], &[]);
        assert!(matches!(
            fiber_product(&m, &id("solo")),
            Err(ObstructionError::IsolatedBlock(_))
        ));
    }

    #[test]
    fn two_block_matrices_are_the_charges() {
        let m = two_block();
        // First-listed block carries charge −2, second +2.
        let comp_v =
            AbelianComponent::new(&m, BTreeSet::from([id("v")]), &BTreeSet::new()).unwrap();
        let a = associated_matrix(&m, &comp_v).unwrap();
        assert_eq!(*a.matrix().get(0, 0), int(-2));
        assert_eq!(a.rhs()[0], vec![(id("w"), int(1))]);

        let comp_w =
            AbelianComponent::new(&m, BTreeSet::from([id("w")]), &BTreeSet::new()).unwrap();
        let a = associated_matrix(&m, &comp_w).unwrap();
        assert_eq!(*a.matrix().get(0, 0), int(2));
        assert_eq!(a.rhs()[0], vec![(id("v"), int(1))]);
    }

    /// Path x—p—q where p and q form the component: the matrix is the
    /// worked 2×2 example, and the adjugate solve pins both fibers to
    /// multiples of the single external central symbol.
    #[test]
    fn two_member_component_solves_against_one_central_symbol() {
        let m = manifold(
            &["p", "q", "x"],
            &[("p", "q", [-2, 1, 1, 0]), ("x", "p", [2, 1, 3, 1])],
        );
        let comp = AbelianComponent::new(&m, BTreeSet::from([id("p"), id("q")]), &BTreeSet::new())
            .unwrap();
        let a = associated_matrix(&m, &comp).unwrap();
        assert_eq!(
            (0..2)
                .map(|i| (0..2)
                    .map(|j| a.matrix().get(i, j).clone())
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            vec![vec![int(2), int(-1)], vec![int(-1), int(-2)]],
        );
        assert_eq!(a.rhs()[0], vec![(id("x"), int(1))]);
        assert_eq!(a.rhs()[1], vec![]);

        let sol = solve_fibers(&a).unwrap();
        assert_eq!(sol.determinant, int(-5));
        assert_eq!(sol.coefficients[0], vec![(id("x"), int(-2))]);
        assert_eq!(sol.coefficients[1], vec![(id("x"), int(1))]);

        // Dominance bookkeeping: row p fails (2 ≯ 1 + 1), row q holds.
        let dom = a.row_dominance();
        assert!(!dom[0].holds());
        assert!(dom[1].holds());
        assert!(!a.is_strictly_dominant());
        assert!(IntMatrix::from_rows(&[vec![2, -1], vec![-1, -2]]).is_sdd());
    }

    #[test]
    fn non_induced_components_are_rejected_with_cover_guidance() {
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "c"],
            &[("a", "b", g), ("b", "c", g), ("a", "c", g)],
        );
        let comp = AbelianComponent::new(
            &m,
            BTreeSet::from([id("a"), id("b"), id("c")]),
            &BTreeSet::from([EdgeKey::new(id("b"), id("c"))]),
        )
        .unwrap();
        assert!(!comp.induced);
        let err = associated_matrix(&m, &comp).unwrap_err();
        assert!(err.to_string().contains("induce_component_cover"));

        // Excluding the only path through the set leaves it disconnected.
        let split = AbelianComponent::new(
            &m,
            BTreeSet::from([id("a"), id("b")]),
            &BTreeSet::from([EdgeKey::new(id("a"), id("b"))]),
        );
        assert!(matches!(split, Err(ObstructionError::NotConnected)));
    }

    #[test]
    fn certify_rejects_bad_inputs() {
        let mut blocks: BTreeMap<BlockId, SeifertBlock> = BTreeMap::new();
        blocks.insert(
            id("v"),
            SeifertBlock {
                genus: 2,
                free_boundaries: 1,
            },
        );
        blocks.insert(
            id("w"),
            SeifertBlock {
                genus: 2,
                free_boundaries: 0,
            },
        );
        let open = GraphManifold::new(
            blocks,
            vec![Edge {
                v: id("v"),
                w: id("w"),
                glue: GluingMatrix::from_i64(2, 1, 5, 2),
            }],
        );
        assert!(matches!(
            certify_no_vertex_faithful(&open, &CertifyOptions::default()),
            Err(ObstructionError::NotClosed(_))
        ));

        let lax = manifold(&["v", "w"], &[("v", "w", [1, 1, 2, 1])]);
        assert!(matches!(
            certify_no_vertex_faithful(&lax, &CertifyOptions::default()),
            Err(ObstructionError::NotSdd(_))
        ));

        let broken = manifold(&["v", "w"], &[("v", "w", [1, 0, 0, 1])]);
        assert!(matches!(
            certify_no_vertex_faithful(&broken, &CertifyOptions::default()),
            Err(ObstructionError::InvalidManifold(_))
        ));
    }

    #[test]
    fn certify_two_block_manifold_at_both_vertices() {
        let m = two_block();
        let cert = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        assert!(cert.exhaustive());
        assert_eq!(cert.vertices.len(), 2);

        let at_v = &cert.vertices[0];
        assert_eq!(at_v.vertex, id("v"));
        assert_eq!(at_v.components.len(), 1);
        let rec = &at_v.components[0];
        assert_eq!(rec.vertices, vec![id("w")]);
        assert_eq!(*rec.matrix.matrix().get(0, 0), int(2));
        assert_eq!(rec.solution.determinant, int(2));
        assert_eq!(rec.solution.coefficients[0], vec![(id("v"), int(1))]);
        assert_eq!(rec.pinned, id("w"));
        assert!(rec.dominance[0].holds());

        let at_w = &cert.vertices[1];
        let rec = &at_w.components[0];
        assert_eq!(*rec.matrix.matrix().get(0, 0), int(-2));
        assert_eq!(rec.solution.determinant, int(-2));
        assert_eq!(rec.solution.coefficients[0], vec![(id("w"), int(1))]);
        assert_eq!(rec.pinned, id("v"));
    }

    /// Triangle hung off a fourth vertex: candidates at `v` include the full
    /// triangle with one edge ignored, which routes through the double cover
    /// and produces six-member matrices upstairs.
    #[test]
    fn certify_walks_ignored_edges_through_the_double_cover() {
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "c", "v"],
            &[("a", "b", g), ("b", "c", g), ("a", "c", g), ("v", "a", g)],
        );
        let cert = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        assert!(cert.exhaustive());

        let at_v = cert.vertices.iter().find(|r| r.vertex == id("v")).unwrap();
        // {a}, {a,b}, {a,c}, and {a,b,c} with each of ∅/{ab}/{ac}/{bc} ignored.
        assert_eq!(at_v.components.len(), 7);
        let covered: Vec<&ComponentRecord> = at_v
            .components
            .iter()
            .filter(|r| !r.excluded.is_empty())
            .collect();
        assert_eq!(covered.len(), 3);
        for rec in covered {
            let step = rec.cover.as_ref().unwrap();
            assert_eq!(step.cut, rec.excluded);
            assert_eq!(step.anchor, id("a.0"));
            assert_eq!(rec.pinned, id("a.0"));
            // The cut closes an odd cycle, so both sheets fuse into one
            // six-member component.
            assert_eq!(rec.matrix.members().len(), 6);
            assert!(rec.dominance.iter().all(RowDominance::holds));
            assert!(!rec.solution.determinant.is_zero());
            // External symbols upstairs are the two lifts of v.
            let symbols: BTreeSet<&BlockId> = rec
                .solution
                .coefficients
                .iter()
                .flatten()
                .map(|(s, _)| s)
                .collect();
            assert!(symbols.contains(&id("v.0")) && symbols.contains(&id("v.1")));
        }

        // Canonical record order: sorted by vertex set, then ignored edges.
        let keys: Vec<(Vec<BlockId>, Vec<EdgeKey>)> = at_v
            .components
            .iter()
            .map(|r| (r.vertices.clone(), r.excluded.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn enumeration_bounds_leave_explicit_gaps() {
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "c", "v"],
            &[("a", "b", g), ("b", "c", g), ("a", "c", g), ("v", "a", g)],
        );
        let tight = CertifyOptions {
            size_bound: 1,
            cut_bound: 12,
        };
        let cert = certify_no_vertex_faithful(&m, &tight).unwrap();
        assert!(!cert.exhaustive());
        let at_v = cert.vertices.iter().find(|r| r.vertex == id("v")).unwrap();
        assert_eq!(at_v.components.len(), 1);
        assert!(at_v.gaps[0].contains("larger than 1"));

        let no_cuts = CertifyOptions {
            size_bound: 12,
            cut_bound: 2,
        };
        let cert = certify_no_vertex_faithful(&m, &no_cuts).unwrap();
        assert!(!cert.exhaustive());
        let at_v = cert.vertices.iter().find(|r| r.vertex == id("v")).unwrap();
        // The triangle candidate only appears in induced form.
        assert_eq!(at_v.components.len(), 4);
        assert!(at_v.gaps.iter().any(|g| g.contains("ignored-edge bound")));
    }

    #[test]
    fn certificates_are_deterministic() {
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "c", "v"],
            &[("a", "b", g), ("b", "c", g), ("a", "c", g), ("v", "a", g)],
        );
        let one = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        let two = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        for (x, y) in one.vertices.iter().zip(&two.vertices) {
            assert_eq!(x.vertex, y.vertex);
            assert_eq!(x.components.len(), y.components.len());
            for (cx, cy) in x.components.iter().zip(&y.components) {
                assert_eq!(cx.vertices, cy.vertices);
                assert_eq!(cx.excluded, cy.excluded);
                assert_eq!(cx.solution, cy.solution);
            }
        }
    }
}
