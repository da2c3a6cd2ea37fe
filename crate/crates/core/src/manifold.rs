//! Dual graphs of graph manifolds in normal form.
//!
//! A manifold is described by its JSJ dual graph: one vertex per Seifert
//! block (a trivial circle bundle over a genus ≥ 2 surface with boundary),
//! one edge per gluing torus. The normal form keeps the graph simple and
//! connected, with every gluing matrix in `GL(2, Z)` of determinant `−1` and
//! a nonzero lower-left-to-fiber pairing (the intersection index `b`).
//!
//! Conventions. An edge is stored as an ordered pair `(v, w)` with matrix
//! `G`; `G` carries the `w`-side torus basis `(fiber_w; section_w)` to the
//! `v`-side basis, so `(f_v; z_v) = G · (f_w; z_w)`. With
//! `G = [[a, b], [c, d]]` that makes the neighbor fiber expansions
//!
//! ```text
//! f_w = −d·f_v + b·z_v        f_v = a·f_w + b·z_w
//! ```
//!
//! so the edge contributes slope `−d/b` to the charge of `v` and `a/b` to the
//! charge of `w`, and the intersection index `b` is symmetric as stored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Name of a Seifert block, as written in manifold files.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub String);

impl BlockId {
    pub fn new(s: impl Into<String>) -> Self {
        BlockId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BlockId {
    fn from(s: &str) -> Self {
        BlockId(s.to_owned())
    }
}

/// Unordered pair of block ids naming an edge of the (simple) dual graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey(pub BlockId, pub BlockId);

impl EdgeKey {
    /// Normalizes so the lexicographically smaller id comes first.
    pub fn new(a: BlockId, b: BlockId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }

    pub fn contains(&self, v: &BlockId) -> bool {
        self.0 == *v || self.1 == *v
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// A trivial circle bundle over a surface of genus `genus` with
/// `free_boundaries` boundary tori left unglued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeifertBlock {
    pub genus: u32,
    pub free_boundaries: u32,
}

/// An element of `GL(2, Z)`; gluings in normal form have determinant `−1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GluingMatrix {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl GluingMatrix {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        GluingMatrix { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        GluingMatrix::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// Inverse of a determinant `−1` matrix: `[[−d, b], [c, −a]]`.
    pub fn inverse_det_neg_one(&self) -> GluingMatrix {
        GluingMatrix::new(-&self.d, self.b.clone(), self.c.clone(), -&self.a)
    }
}

impl fmt::Display for GluingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A gluing torus: `glue` carries the `w`-side basis to the `v`-side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub v: BlockId,
    pub w: BlockId,
    pub glue: GluingMatrix,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(self.v.clone(), self.w.clone())
    }
}

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("unknown block `{0}`")]
    UnknownBlock(BlockId),
    #[error("no edge between `{0}` and `{1}`")]
    NoSuchEdge(BlockId, BlockId),
    #[error("edge `{0}` has intersection index zero; slopes are undefined")]
    ZeroIntersection(EdgeKey),
    #[error("rebase offsets at `{block}` must sum to zero, got {sum}")]
    UnbalancedOffsets { block: BlockId, sum: BigInt },
    #[error("rebase offset names edge `{0}`, which is not incident to the rebased block")]
    OffsetNotIncident(EdgeKey),
}

/// A single violation of the normal form, as reported by [`GraphManifold::validate`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("manifold has no blocks")]
    Empty,
    #[error("edge {edge} refers to undeclared block `{id}`")]
    UnknownBlock { edge: EdgeKey, id: BlockId },
    #[error("block `{0}` is glued to itself; the dual graph must be simple")]
    SelfLoop(BlockId),
    #[error("blocks {0} are joined by more than one edge; the dual graph must be simple")]
    MultiEdge(EdgeKey),
    #[error("edge {edge} has determinant {det}, expected -1")]
    BadDeterminant { edge: EdgeKey, det: BigInt },
    #[error("edge {0} has intersection index zero (the b entry of the gluing matrix)")]
    ZeroIntersection(EdgeKey),
    #[error("block `{id}` has genus {genus}; blocks must have genus at least 2")]
    LowGenus { id: BlockId, genus: u32 },
    #[error("dual graph is disconnected")]
    Disconnected,
}

/// Result of checking a manifold against the normal form.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// The dual graph of a graph manifold: blocks keyed by id plus gluing edges,
/// kept in a canonical order (ids ascending, edges by unordered key).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphManifold {
    blocks: BTreeMap<BlockId, SeifertBlock>,
    edges: Vec<Edge>,
}

impl GraphManifold {
    pub fn new(blocks: BTreeMap<BlockId, SeifertBlock>, mut edges: Vec<Edge>) -> Self {
        edges.sort_by(|x, y| (x.key(), &x.v, &x.w, &x.glue).cmp(&(y.key(), &y.v, &y.w, &y.glue)));
        GraphManifold { blocks, edges }
    }

    pub fn blocks(&self) -> &BTreeMap<BlockId, SeifertBlock> {
        &self.blocks
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn block(&self, id: &BlockId) -> Result<&SeifertBlock, ManifoldError> {
        self.blocks
            .get(id)
            .ok_or_else(|| ManifoldError::UnknownBlock(id.clone()))
    }

    pub fn edges_at<'a>(&'a self, v: &'a BlockId) -> impl Iterator<Item = &'a Edge> {
        self.edges.iter().filter(move |e| e.v == *v || e.w == *v)
    }

    pub fn edge_between(&self, v: &BlockId, w: &BlockId) -> Option<&Edge> {
        let key = EdgeKey::new(v.clone(), w.clone());
        self.edges.iter().find(|e| e.key() == key)
    }

    pub fn neighbors(&self, v: &BlockId) -> BTreeSet<BlockId> {
        self.edges_at(v)
            .map(|e| if e.v == *v { e.w.clone() } else { e.v.clone() })
            .collect()
    }

    pub fn degree(&self, v: &BlockId) -> usize {
        self.edges_at(v).count()
    }

    /// Number of boundary tori of the block: glued plus free.
    pub fn boundary_count(&self, v: &BlockId) -> Result<usize, ManifoldError> {
        Ok(self.degree(v) + self.block(v)?.free_boundaries as usize)
    }

    /// True when every boundary torus of every block is glued.
    pub fn is_closed(&self) -> bool {
        self.blocks.values().all(|b| b.free_boundaries == 0)
    }

    /// Checks the normal form and reports every violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.blocks.is_empty() {
            violations.push(Violation::Empty);
        }
        for (id, b) in &self.blocks {
            if b.genus < 2 {
                violations.push(Violation::LowGenus {
                    id: id.clone(),
                    genus: b.genus,
                });
            }
        }
        let mut seen_keys: BTreeSet<EdgeKey> = BTreeSet::new();
        for e in &self.edges {
            let key = e.key();
            for id in [&e.v, &e.w] {
                if !self.blocks.contains_key(id) {
                    violations.push(Violation::UnknownBlock {
                        edge: key.clone(),
                        id: id.clone(),
                    });
                }
            }
            if e.v == e.w {
                violations.push(Violation::SelfLoop(e.v.clone()));
            } else if !seen_keys.insert(key.clone()) {
                violations.push(Violation::MultiEdge(key.clone()));
            }
            let det = e.glue.det();
            if det != BigInt::from(-1) {
                violations.push(Violation::BadDeterminant {
                    edge: key.clone(),
                    det,
                });
            }
            if e.glue.b.is_zero() {
                violations.push(Violation::ZeroIntersection(key));
            }
        }
        if !self.blocks.is_empty() && !self.is_connected() {
            violations.push(Violation::Disconnected);
        }
        ValidationReport { violations }
    }

    fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Connected components of the dual graph, each as a set of block ids,
    /// ordered by smallest member. Edges mentioning undeclared blocks are
    /// ignored.
    pub fn connected_components(&self) -> Vec<BTreeSet<BlockId>> {
        let mut out = Vec::new();
        let mut unvisited: BTreeSet<BlockId> = self.blocks.keys().cloned().collect();
        while let Some(start) = unvisited.iter().next().cloned() {
            let mut comp = BTreeSet::from([start.clone()]);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for n in self.neighbors(&v) {
                    if self.blocks.contains_key(&n) && comp.insert(n.clone()) {
                        queue.push_back(n);
                    }
                }
            }
            for v in &comp {
                unvisited.remove(v);
            }
            out.push(comp);
        }
        out
    }

    /// The intersection index of the edge between `v` and `w`: the `b` entry
    /// of the gluing matrix, which is the same seen from either side.
    pub fn intersection_index(&self, v: &BlockId, w: &BlockId) -> Result<BigInt, ManifoldError> {
        self.block(v)?;
        self.block(w)?;
        let e = self
            .edge_between(v, w)
            .ok_or_else(|| ManifoldError::NoSuchEdge(v.clone(), w.clone()))?;
        Ok(e.glue.b.clone())
    }

    /// Slope contributed to `v` by edge `e` (which must be incident to `v`):
    /// the fiber of the far block expanded in `v`'s torus basis.
    fn slope_at(&self, v: &BlockId, e: &Edge) -> Result<BigRational, ManifoldError> {
        if e.glue.b.is_zero() {
            return Err(ManifoldError::ZeroIntersection(e.key()));
        }
        let (num, den) = self.fiber_expansion(v, e);
        Ok(BigRational::new(num, den))
    }

    /// Coefficients `(a, b)` expanding the adjacent block's fiber in the
    /// basis of `v`'s side of edge `e`: the neighbor's fiber maps to
    /// `a·f_v + b·z_v`. Read from the stored matrix directly when `v` is the
    /// second endpoint, from its inverse when `v` is the first.
    pub(crate) fn fiber_expansion(&self, v: &BlockId, e: &Edge) -> (BigInt, BigInt) {
        let num = if e.v == *v {
            -&e.glue.d
        } else {
            e.glue.a.clone()
        };
        (num, e.glue.b.clone())
    }

    /// The charge of a block: the sum of neighbor-fiber slopes over its glued
    /// boundary tori. Free boundaries contribute nothing.
    pub fn charge(&self, v: &BlockId) -> Result<BigRational, ManifoldError> {
        self.block(v)?;
        let mut k = BigRational::zero();
        for e in self.edges_at(v) {
            k += self.slope_at(v, e)?;
        }
        Ok(k)
    }

    /// Sum of reciprocal absolute intersection indices over the glued
    /// boundaries of `v` — the comparison mass for diagonal dominance.
    pub fn reciprocal_sum(&self, v: &BlockId) -> Result<BigRational, ManifoldError> {
        self.block(v)?;
        let mut s = BigRational::zero();
        for e in self.edges_at(v) {
            if e.glue.b.is_zero() {
                return Err(ManifoldError::ZeroIntersection(e.key()));
            }
            s += BigRational::new(BigInt::from(1), e.glue.b.abs());
        }
        Ok(s)
    }

    /// Strict diagonal dominance at one block: `|charge| > Σ 1/|b|`, compared
    /// exactly over the rationals.
    pub fn is_sdd_block(&self, v: &BlockId) -> Result<bool, ManifoldError> {
        Ok(self.charge(v)?.abs() > self.reciprocal_sum(v)?)
    }

    /// Strict diagonal dominance at every block.
    pub fn is_sdd(&self) -> Result<bool, ManifoldError> {
        for v in self.blocks.keys() {
            if !self.is_sdd_block(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Length of the shortest edge path from `v` to `w`, or `None` if they
    /// lie in different components.
    pub fn graph_distance(&self, v: &BlockId, w: &BlockId) -> Result<Option<u32>, ManifoldError> {
        self.block(v)?;
        self.block(w)?;
        let mut dist = BTreeMap::from([(v.clone(), 0u32)]);
        let mut queue = VecDeque::from([v.clone()]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if u == *w {
                return Ok(Some(du));
            }
            for n in self.neighbors(&u) {
                if !dist.contains_key(&n) {
                    dist.insert(n.clone(), du + 1);
                    queue.push_back(n);
                }
            }
        }
        Ok(None)
    }

    /// Waldhausen rebasing at `v`: replaces the section of the boundary torus
    /// along each listed edge `e` by `section + n_e · fiber`. The offsets must
    /// sum to zero (edges not listed get offset zero); each listed slope at
    /// `v` then shifts by `−n_e`, determinants and intersection indices are
    /// untouched, and every charge — including at `v` — is preserved.
    pub fn waldhausen_rebase(
        &self,
        v: &BlockId,
        offsets: &BTreeMap<EdgeKey, BigInt>,
    ) -> Result<GraphManifold, ManifoldError> {
        self.block(v)?;
        let incident: BTreeSet<EdgeKey> = self.edges_at(v).map(|e| e.key()).collect();
        let mut sum = BigInt::zero();
        for (key, n) in offsets {
            if !incident.contains(key) {
                return Err(ManifoldError::OffsetNotIncident(key.clone()));
            }
            sum += n;
        }
        if !sum.is_zero() {
            return Err(ManifoldError::UnbalancedOffsets {
                block: v.clone(),
                sum,
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let Some(n) = offsets.get(&e.key()) else {
                    return e.clone();
                };
                let g = &e.glue;
                let glue = if e.v == *v {
                    // left-multiply by [[1, 0], [n, 1]]
                    GluingMatrix::new(g.a.clone(), g.b.clone(), n * &g.a + &g.c, n * &g.b + &g.d)
                } else {
                    // right-multiply by [[1, 0], [−n, 1]]
                    GluingMatrix::new(&g.a - &g.b * n, g.b.clone(), &g.c - &g.d * n, g.d.clone())
                };
                Edge {
                    v: e.v.clone(),
                    w: e.w.clone(),
                    glue,
                }
            })
            .collect();
        Ok(GraphManifold::new(self.blocks.clone(), edges))
    }
}
