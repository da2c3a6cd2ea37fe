//! Cut-and-copy double covers and invariant scaling.
//!
//! Given a set of edges (the *cut*), the double cover takes two copies of
//! every block and reroutes each cut edge across the copies, reusing the same
//! gluing matrices. This is the cover classified by the `Z/2` voltage that is
//! `1` exactly on the cut: it is connected precisely when some cycle crosses
//! the cut an odd number of times. Because gluings are reused, every local
//! invariant (charge, intersection indices, diagonal dominance) is carried
//! block-for-block onto the cover.
//!
//! The practical use is [`induce_component_cover`]: a vertex set whose
//! analysis should ignore some internal edges is not an induced subgraph
//! downstairs, but its lift inside a suitable double cover is, which is what
//! the obstruction pipeline needs.

use crate::manifold::{BlockId, Edge, EdgeKey, GraphManifold, ManifoldError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoversError {
    #[error("manifold fails validation: {0}")]
    InvalidManifold(String),
    #[error("cut names edge {0}, which is not an edge of the manifold")]
    UnknownCutEdge(EdgeKey),
    #[error("unknown block `{0}`")]
    UnknownBlock(BlockId),
    #[error(
        "component vertices must be nonempty and connected once all internal edges are present"
    )]
    NotConnected,
    #[error("excluded edge {0} is not internal to the component")]
    ExcludedNotInternal(EdgeKey),
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// A covering manifold together with its projection data.
#[derive(Clone, Debug)]
pub struct CoverGraph {
    /// The covering manifold itself.
    pub total: GraphManifold,
    /// Projection on blocks: cover id → base id.
    pub block_map: BTreeMap<BlockId, BlockId>,
    /// Sheet of each cover block (0 or 1).
    pub sheet: BTreeMap<BlockId, u8>,
    /// Projection on edges: cover edge key → base edge key.
    pub edge_map: BTreeMap<EdgeKey, EdgeKey>,
}

/// The `Z/2` voltage analysis of a cut: parities of the fundamental cycles of
/// a spanning tree. The cover is connected iff some parity is odd.
#[derive(Clone, Debug)]
pub struct VoltageCheck {
    pub tree_edges: Vec<EdgeKey>,
    /// One entry per co-tree edge: its fundamental cycle's crossing parity.
    pub cycle_parities: Vec<(EdgeKey, bool)>,
    pub any_odd: bool,
}

/// Outcome of cutting and copying along a set of edges.
#[derive(Clone, Debug)]
pub enum DoubleCover {
    Connected(CoverGraph),
    /// The voltage vanishes on every cycle and the cover falls apart into two
    /// disjoint copies; both are returned with the failing voltage analysis.
    Disconnected {
        components: Vec<CoverGraph>,
        voltage: VoltageCheck,
    },
}

pub(crate) fn lifted_id(base: &BlockId, sheet: u8) -> BlockId {
    BlockId::new(format!("{base}.{sheet}"))
}

fn voltage_check(m: &GraphManifold, cut: &BTreeSet<EdgeKey>) -> VoltageCheck {
    let mut parity: BTreeMap<BlockId, bool> = BTreeMap::new();
    let mut tree_edges = Vec::new();
    let mut in_tree: BTreeSet<EdgeKey> = BTreeSet::new();
    if let Some(start) = m.blocks().keys().next() {
        parity.insert(start.clone(), false);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(v) = queue.pop_front() {
            let pv = parity[&v];
            for e in m.edges_at(&v) {
                let other = if e.v == v { e.w.clone() } else { e.v.clone() };
                if parity.contains_key(&other) {
                    continue;
                }
                let key = e.key();
                parity.insert(other.clone(), pv ^ cut.contains(&key));
                tree_edges.push(key.clone());
                in_tree.insert(key);
                queue.push_back(other);
            }
        }
    }
    let mut cycle_parities = Vec::new();
    for e in m.edges() {
        let key = e.key();
        if in_tree.contains(&key) {
            continue;
        }
        let odd = parity[&e.v] ^ parity[&e.w] ^ cut.contains(&key);
        cycle_parities.push((key, odd));
    }
    let any_odd = cycle_parities.iter().any(|(_, odd)| *odd);
    VoltageCheck {
        tree_edges,
        cycle_parities,
        any_odd,
    }
}

/// Builds the double cover cut along `cut`. Every base edge lifts to two
/// edges with the same gluing matrix; cut edges swap sheets.
pub fn double_cover_cut(
    m: &GraphManifold,
    cut: &BTreeSet<EdgeKey>,
) -> Result<DoubleCover, CoversError> {
    let report = m.validate();
    if !report.is_valid() {
        return Err(CoversError::InvalidManifold(report.to_string()));
    }
    let edge_keys: BTreeSet<EdgeKey> = m.edges().iter().map(|e| e.key()).collect();
    for key in cut {
        if !edge_keys.contains(key) {
            return Err(CoversError::UnknownCutEdge(key.clone()));
        }
    }

    let mut blocks = BTreeMap::new();
    let mut block_map = BTreeMap::new();
    let mut sheet = BTreeMap::new();
    for (id, b) in m.blocks() {
        for s in [0u8, 1u8] {
            let lid = lifted_id(id, s);
            blocks.insert(lid.clone(), *b);
            block_map.insert(lid.clone(), id.clone());
            sheet.insert(lid, s);
        }
    }
    let mut edges = Vec::new();
    let mut edge_map = BTreeMap::new();
    for e in m.edges() {
        let crossing = cut.contains(&e.key());
        for s in [0u8, 1u8] {
            let target = if crossing { 1 - s } else { s };
            let lifted = Edge {
                v: lifted_id(&e.v, s),
                w: lifted_id(&e.w, target),
                glue: e.glue.clone(),
            };
            edge_map.insert(lifted.key(), e.key());
            edges.push(lifted);
        }
    }
    let total = GraphManifold::new(blocks, edges);
    let components = total.connected_components();
    let cover = CoverGraph {
        total,
        block_map,
        sheet,
        edge_map,
    };
    if components.len() <= 1 {
        return Ok(DoubleCover::Connected(cover));
    }
    let voltage = voltage_check(m, cut);
    let parts = components
        .into_iter()
        .map(|verts| restrict_cover(&cover, &verts))
        .collect();
    Ok(DoubleCover::Disconnected {
        components: parts,
        voltage,
    })
}

fn restrict_cover(cover: &CoverGraph, vertices: &BTreeSet<BlockId>) -> CoverGraph {
    let blocks = cover
        .total
        .blocks()
        .iter()
        .filter(|(id, _)| vertices.contains(*id))
        .map(|(id, b)| (id.clone(), *b))
        .collect();
    let edges: Vec<Edge> = cover
        .total
        .edges()
        .iter()
        .filter(|e| vertices.contains(&e.v) && vertices.contains(&e.w))
        .cloned()
        .collect();
    let edge_map = edges
        .iter()
        .map(|e| (e.key(), cover.edge_map[&e.key()].clone()))
        .collect();
    CoverGraph {
        total: GraphManifold::new(blocks, edges),
        block_map: cover
            .block_map
            .iter()
            .filter(|(id, _)| vertices.contains(*id))
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect(),
        sheet: cover
            .sheet
            .iter()
            .filter(|(id, _)| vertices.contains(*id))
            .map(|(a, b)| (a.clone(), *b))
            .collect(),
        edge_map,
    }
}

/// Checks that the projection respects everything it should: gluing matrices
/// on edges, and per block the degree, charge, intersection-index multiset,
/// and diagonal dominance status.
pub fn cover_invariants_preserved(
    m: &GraphManifold,
    cover: &CoverGraph,
) -> Result<bool, CoversError> {
    for (ck, bk) in &cover.edge_map {
        let ce = cover
            .total
            .edge_between(&ck.0, &ck.1)
            .ok_or_else(|| CoversError::UnknownCutEdge(ck.clone()))?;
        let be = m
            .edge_between(&bk.0, &bk.1)
            .ok_or_else(|| CoversError::UnknownCutEdge(bk.clone()))?;
        if ce.glue != be.glue {
            return Ok(false);
        }
    }
    for (cid, bid) in &cover.block_map {
        if cover.total.block(cid)? != m.block(bid)? {
            return Ok(false);
        }
        if cover.total.degree(cid) != m.degree(bid) {
            return Ok(false);
        }
        if cover.total.charge(cid)? != m.charge(bid)? {
            return Ok(false);
        }
        if cover.total.is_sdd_block(cid)? != m.is_sdd_block(bid)? {
            return Ok(false);
        }
        let mut cover_idx: Vec<BigInt> = cover
            .total
            .edges_at(cid)
            .map(|e| e.glue.b.clone())
            .collect();
        let mut base_idx: Vec<BigInt> = m.edges_at(bid).map(|e| e.glue.b.clone()).collect();
        cover_idx.sort();
        base_idx.sort();
        if cover_idx != base_idx {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Charge and reciprocal sum of a block, scaled by a covering multiplicity.
/// Scaling by a positive integer preserves the strict dominance comparison,
/// so `is_sdd` here agrees with the base block's status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledInvariants {
    pub block: BlockId,
    pub multiplicity: u32,
    pub charge: BigRational,
    pub reciprocal_sum: BigRational,
}

impl ScaledInvariants {
    pub fn is_sdd(&self) -> bool {
        self.charge.abs() > self.reciprocal_sum
    }
}

/// Scales a block's invariants by a covering multiplicity, as they appear at
/// a degree-`multiplicity` lift of the block.
pub fn scale_invariants(
    m: &GraphManifold,
    v: &BlockId,
    multiplicity: u32,
) -> Result<ScaledInvariants, CoversError> {
    if multiplicity == 0 {
        return Err(CoversError::ZeroMultiplicity);
    }
    let factor = BigRational::from_integer(BigInt::from(multiplicity));
    Ok(ScaledInvariants {
        block: v.clone(),
        multiplicity,
        charge: m.charge(v)? * &factor,
        reciprocal_sum: m.reciprocal_sum(v)? * factor,
    })
}

/// Outcome of making a vertex set induced by passing to a double cover.
#[derive(Clone, Debug)]
pub enum InducedComponent {
    /// No edges were excluded; the set is induced downstairs as it stands.
    Unchanged { vertices: BTreeSet<BlockId> },
    /// The cut-and-copy cover is connected and the lift of the component in
    /// it is induced.
    Covered {
        cover: CoverGraph,
        vertices: BTreeSet<BlockId>,
    },
    /// The requested cut disconnects the double cover; the voltage analysis
    /// explains why. The caller may retry with a different cut.
    Disconnected { voltage: VoltageCheck },
}

/// Lifts a connected vertex set into the double cover cut along its excluded
/// internal edges, where the lift is an induced connected component.
pub fn induce_component_cover(
    m: &GraphManifold,
    vertices: &BTreeSet<BlockId>,
    excluded: &BTreeSet<EdgeKey>,
) -> Result<InducedComponent, CoversError> {
    if vertices.is_empty() {
        return Err(CoversError::NotConnected);
    }
    for v in vertices {
        m.block(v)?;
    }
    let internal: BTreeSet<EdgeKey> = m
        .edges()
        .iter()
        .filter(|e| vertices.contains(&e.v) && vertices.contains(&e.w))
        .map(|e| e.key())
        .collect();
    for key in excluded {
        if !internal.contains(key) {
            return Err(CoversError::ExcludedNotInternal(key.clone()));
        }
    }
    if !connected_within(m, vertices) {
        return Err(CoversError::NotConnected);
    }
    if excluded.is_empty() {
        return Ok(InducedComponent::Unchanged {
            vertices: vertices.clone(),
        });
    }
    match double_cover_cut(m, excluded)? {
        DoubleCover::Disconnected { voltage, .. } => Ok(InducedComponent::Disconnected { voltage }),
        DoubleCover::Connected(cover) => {
            let lifted: BTreeSet<BlockId> = vertices
                .iter()
                .flat_map(|v| [lifted_id(v, 0), lifted_id(v, 1)])
                .collect();
            let anchor = lifted_id(vertices.iter().next().expect("nonempty"), 0);
            let comp = component_within(&cover.total, &lifted, &anchor);
            Ok(InducedComponent::Covered {
                cover,
                vertices: comp,
            })
        }
    }
}

/// True when `set` is connected in the subgraph it induces.
fn connected_within(m: &GraphManifold, set: &BTreeSet<BlockId>) -> bool {
    let Some(start) = set.iter().next() else {
        return false;
    };
    component_within(m, set, start).len() == set.len()
}

/// Connected component of `anchor` inside the subgraph induced on `set`.
pub(crate) fn component_within(
    m: &GraphManifold,
    set: &BTreeSet<BlockId>,
    anchor: &BlockId,
) -> BTreeSet<BlockId> {
    let mut seen = BTreeSet::from([anchor.clone()]);
    let mut queue = VecDeque::from([anchor.clone()]);
    while let Some(v) = queue.pop_front() {
        for n in m.neighbors(&v) {
            if set.contains(&n) && seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{GluingMatrix, SeifertBlock};

    fn id(s: &str) -> BlockId {
        BlockId::from(s)
    }

    fn key(a: &str, b: &str) -> EdgeKey {
        EdgeKey::new(id(a), id(b))
    }

    fn cycle(n: usize) -> GraphManifold {
        let ids: Vec<BlockId> = (0..n).map(|i| BlockId::new(format!("v{i}"))).collect();
        let blocks = ids
            .iter()
            .map(|i| {
                (
                    i.clone(),
                    SeifertBlock {
                        genus: 2,
                        free_boundaries: 0,
                    },
                )
            })
            .collect();
        let edges = (0..n)
            .map(|i| Edge {
                v: ids[i].clone(),
                w: ids[(i + 1) % n].clone(),
                glue: GluingMatrix::from_i64(2, 1, 5, 2),
            })
            .collect();
        GraphManifold::new(blocks, edges)
    }

    fn path(n: usize) -> GraphManifold {
        let ids: Vec<BlockId> = (0..n).map(|i| BlockId::new(format!("v{i}"))).collect();
        let blocks = ids
            .iter()
            .enumerate()
            .map(|(i, idv)| {
                let free = if i == 0 || i == n - 1 { 1 } else { 0 };
                (
                    idv.clone(),
                    SeifertBlock {
                        genus: 2,
                        free_boundaries: free,
                    },
                )
            })
            .collect();
        let edges = (0..n - 1)
            .map(|i| Edge {
                v: ids[i].clone(),
                w: ids[i + 1].clone(),
                glue: GluingMatrix::from_i64(2, 1, 5, 2),
            })
            .collect();
        GraphManifold::new(blocks, edges)
    }

    #[test]
    fn cutting_one_edge_of_a_triangle_gives_a_hexagon() {
        let m = cycle(3);
        let cut = BTreeSet::from([key("v0", "v1")]);
        let DoubleCover::Connected(cover) = double_cover_cut(&m, &cut).unwrap() else {
            panic!("odd cycle crossing the cut once must connect the cover");
        };
        assert_eq!(cover.total.blocks().len(), 6);
        assert_eq!(cover.total.edges().len(), 6);
        for v in cover.total.blocks().keys() {
            assert_eq!(cover.total.degree(v), 2);
        }
        // It is a single 6-cycle: distance between the two lifts of v2 is 3.
        assert_eq!(
            cover
                .total
                .graph_distance(&id("v2.0"), &id("v2.1"))
                .unwrap(),
            Some(3)
        );
        assert!(cover_invariants_preserved(&m, &cover).unwrap());
    }

    #[test]
    fn empty_cut_doubles_disconnectedly() {
        let m = cycle(3);
        let out = double_cover_cut(&m, &BTreeSet::new()).unwrap();
        let DoubleCover::Disconnected {
            components,
            voltage,
        } = out
        else {
            panic!("empty cut yields two disjoint copies");
        };
        assert_eq!(components.len(), 2);
        assert!(!voltage.any_odd);
        for part in &components {
            assert_eq!(part.total.blocks().len(), 3);
            assert!(part.total.validate().is_valid());
            assert!(cover_invariants_preserved(&m, part).unwrap());
        }
    }

    #[test]
    fn tree_cuts_never_connect() {
        // In a tree every edge is a bridge: no cycle crosses the cut oddly.
        let m = path(4);
        let cut = BTreeSet::from([key("v1", "v2")]);
        let out = double_cover_cut(&m, &cut).unwrap();
        assert!(matches!(out, DoubleCover::Disconnected { .. }));
    }

    #[test]
    fn connectivity_matches_the_voltage_parity() {
        let m = cycle(4);
        // Even crossing count on the only cycle: disconnected.
        let even = BTreeSet::from([key("v0", "v1"), key("v2", "v3")]);
        assert!(matches!(
            double_cover_cut(&m, &even).unwrap(),
            DoubleCover::Disconnected { .. }
        ));
        // Odd crossing count: connected.
        let odd = BTreeSet::from([key("v0", "v1")]);
        assert!(matches!(
            double_cover_cut(&m, &odd).unwrap(),
            DoubleCover::Connected(_)
        ));
    }

    #[test]
    fn corrupting_a_cover_glue_is_detected() {
        let m = cycle(3);
        let cut = BTreeSet::from([key("v0", "v1")]);
        let DoubleCover::Connected(mut cover) = double_cover_cut(&m, &cut).unwrap() else {
            panic!("connected");
        };
        assert!(cover_invariants_preserved(&m, &cover).unwrap());
        let mut edges: Vec<Edge> = cover.total.edges().to_vec();
        edges[0].glue = GluingMatrix::from_i64(3, 1, 8, 3);
        cover.total = GraphManifold::new(cover.total.blocks().clone(), edges);
        assert!(!cover_invariants_preserved(&m, &cover).unwrap());
    }

    #[test]
    fn unknown_cut_edges_are_rejected() {
        let m = cycle(3);
        let cut = BTreeSet::from([key("v0", "nope")]);
        assert!(matches!(
            double_cover_cut(&m, &cut),
            Err(CoversError::UnknownCutEdge(_))
        ));
    }

    #[test]
    fn scaling_preserves_strict_dominance_exactly() {
        let m = cycle(3);
        let base_sdd = m.is_sdd_block(&id("v0")).unwrap();
        for mult in 1..=5 {
            let s = scale_invariants(&m, &id("v0"), mult).unwrap();
            assert_eq!(
                s.charge,
                m.charge(&id("v0")).unwrap() * BigRational::from_integer(BigInt::from(mult))
            );
            assert_eq!(s.is_sdd(), base_sdd);
        }
        assert!(matches!(
            scale_invariants(&m, &id("v0"), 0),
            Err(CoversError::ZeroMultiplicity)
        ));
    }

    #[test]
    fn induce_returns_the_component_unchanged_without_exclusions() {
        let m = cycle(4);
        let verts = BTreeSet::from([id("v0"), id("v1")]);
        let out = induce_component_cover(&m, &verts, &BTreeSet::new()).unwrap();
        let InducedComponent::Unchanged { vertices } = out else {
            panic!("no exclusions");
        };
        assert_eq!(vertices, verts);
    }

    #[test]
    fn excluding_one_square_edge_lifts_to_an_eight_cycle() {
        let m = cycle(4);
        let verts: BTreeSet<BlockId> = m.blocks().keys().cloned().collect();
        let excl = BTreeSet::from([key("v0", "v1")]);
        let out = induce_component_cover(&m, &verts, &excl).unwrap();
        let InducedComponent::Covered { cover, vertices } = out else {
            panic!("square cut once stays connected upstairs");
        };
        assert_eq!(vertices.len(), 8, "both sheets fuse into one component");
        for v in &vertices {
            assert_eq!(cover.total.degree(v), 2);
        }
        assert_eq!(
            cover
                .total
                .graph_distance(&id("v0.0"), &id("v0.1"))
                .unwrap(),
            Some(4),
            "the lifted component is a single 8-cycle"
        );
    }

    #[test]
    fn induce_reports_disconnecting_cuts() {
        let m = cycle(4);
        let verts: BTreeSet<BlockId> = m.blocks().keys().cloned().collect();
        let excl = BTreeSet::from([key("v0", "v1"), key("v2", "v3")]);
        let out = induce_component_cover(&m, &verts, &excl).unwrap();
        let InducedComponent::Disconnected { voltage } = out else {
            panic!("even cut must disconnect");
        };
        assert!(!voltage.any_odd);
    }

    #[test]
    fn induce_rejects_external_exclusions_and_scattered_vertices() {
        let m = cycle(4);
        let verts = BTreeSet::from([id("v0"), id("v1")]);
        let excl = BTreeSet::from([key("v1", "v2")]);
        assert!(matches!(
            induce_component_cover(&m, &verts, &excl),
            Err(CoversError::ExcludedNotInternal(_))
        ));
        let scattered = BTreeSet::from([id("v0"), id("v2")]);
        assert!(matches!(
            induce_component_cover(&m, &scattered, &BTreeSet::new()),
            Err(CoversError::NotConnected)
        ));
    }
}
