//! Constructive counterpart to the obstruction: on a tree-shaped manifold
//! with free boundary tori at the leaves, a vertex-faithful representation
//! into the motion group does exist, and this module builds one.
//!
//! The build has two stages. [`seed_faithful_rep`] equips one block with a
//! faithful representation: the block's surface-with-boundary group is free
//! of rank `2g + l − 1`, and its generators are sent to hyperbolic classes in
//! Schottky position — evenly rotated axes with expansion `spread` — whose
//! ping-pong arcs are recorded and numerically re-verified in a
//! [`PingPongCertificate`]. The fiber generator goes to a central element
//! with nonzero exact coordinate, so the whole block group `F × Z` embeds:
//! projective faithfulness comes from ping-pong, central injectivity from
//! the nonzero coordinate.
//!
//! [`extend_along_tree`] then walks the dual tree away from the root. Each
//! tree edge determines the child's shared-torus images: the gluing matrix is
//! applied to the parent's fiber and section images inside the motion group.
//! Everything else about the child is chosen Abelianly — surface generators
//! go to the identity, unglued boundaries to centralizer members, and one
//! remaining boundary slot absorbs the closing relation `Π[aᵢ,bᵢ] = Πcⱼ`.
//! Leaves must keep a free boundary precisely so that this closing slot
//! exists. The result is faithful at the root and Abelian elsewhere; nothing
//! stronger is claimed (and in general nothing stronger is true).
//!
//! [`verify_rep`] re-checks a finished representation against the manifold:
//! block relations, fiber centrality, edge compatibility, Abelianity off the
//! root, and the root's faithfulness certificate. [`RepresentationDoc`]
//! serializes representations losslessly — hex-float matrix bits and exact
//! rational centrals — so an independent process can reload and re-verify
//! bit for bit.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{
    f64_from_hex, f64_to_hex, manifold_hash, manifold_to_text, parse_manifold,
    rational_from_string, rational_to_string, ScalarError,
};
use crate::manifold::{BlockId, Edge, GraphManifold, ManifoldError, SeifertBlock};
use crate::motion::{commutes, ElementClass, ExactTag, MotionElement, ProjClass, Tolerances};

/// Smallest ping-pong slack the builder accepts; below this the interval
/// arithmetic is too close to rounding noise to witness faithfulness.
pub const MIN_MARGIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("manifold fails validation: {0}")]
    InvalidManifold(String),
    #[error("dual graph is not a tree")]
    NotATree,
    #[error("leaf block `{0}` has no free boundary torus to absorb the closing relation")]
    LeafWithoutFreeBoundary(BlockId),
    #[error("block has no boundary torus; its surface group is not free")]
    NoBoundary,
    #[error("fiber image must have a nonzero central coordinate")]
    ZeroFiberCentral,
    #[error("ping-pong margin {margin:e} is below the required {required:e}; increase the spread")]
    MarginTooSmall { margin: f64, required: f64 },
    #[error("boundary slot {slot} is out of range for {count} boundary tori")]
    BadSlot { slot: usize, count: usize },
    #[error(
        "chosen image for boundary slot {slot} does not commute with the determined torus images"
    )]
    NotInCentralizer { slot: usize },
    #[error("chosen images for boundary slots {a} and {b} do not commute with each other")]
    ChoicesDoNotCommute { a: usize, b: usize },
    #[error("no unconstrained boundary slot remains to absorb the closing relation")]
    NoFreeSlot,
    #[error("gluing entry {0} exceeds the supported exponent range")]
    EntryTooLarge(BigInt),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// Generator layout of a block's fundamental group: surface generators
/// `a₁,b₁,…,a_g,b_g`, boundary generators `c₁,…,c_l` and the central fiber
/// `f`, subject to the single relation `Π[aᵢ,bᵢ] = Πcⱼ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockPresentation {
    pub genus: u32,
    /// Total boundary count `l`: glued tori plus free tori.
    pub boundaries: usize,
}

impl BlockPresentation {
    /// Layout for `block` when `glued` of its boundary tori attach to
    /// neighbors.
    pub fn new(block: &SeifertBlock, glued: usize) -> Self {
        BlockPresentation {
            genus: block.genus,
            boundaries: glued + block.free_boundaries as usize,
        }
    }

    pub fn surface_rank(&self) -> usize {
        2 * self.genus as usize
    }

    /// Rank of the free group underlying the surface-with-boundary group:
    /// every generator except the last boundary, which the relation
    /// determines. Requires `l ≥ 1`; a closed block has no free presentation.
    pub fn free_rank(&self) -> usize {
        assert!(
            self.boundaries >= 1,
            "closed blocks have no free presentation"
        );
        self.surface_rank() + self.boundaries - 1
    }
}

/// What a boundary slot of a block is attached to. The canonical layout
/// lists glued neighbors in sorted order, then the free tori.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundarySlot {
    Glued(BlockId),
    Free,
}

/// Canonical boundary layout of `v`: one slot per glued neighbor, sorted by
/// neighbor id, followed by one slot per free boundary torus.
pub fn boundary_slots(m: &GraphManifold, v: &BlockId) -> Result<Vec<BoundarySlot>, ManifoldError> {
    let block = m.block(v)?;
    let mut slots: Vec<BoundarySlot> = m
        .neighbors(v)
        .into_iter()
        .map(BoundarySlot::Glued)
        .collect();
    slots.extend(std::iter::repeat_n(
        BoundarySlot::Free,
        block.free_boundaries as usize,
    ));
    Ok(slots)
}

fn glued_slot(slots: &[BoundarySlot], neighbor: &BlockId) -> usize {
    slots
        .iter()
        .position(|s| matches!(s, BoundarySlot::Glued(w) if w == neighbor))
        .expect("neighbor occupies a glued slot")
}

/// Closed arc on the direction circle, coordinates taken mod 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleArc {
    pub center: f64,
    pub radius: f64,
}

fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Witness that the seed generators sit in ping-pong position: the `2m` arcs
/// are pairwise disjoint and each generator maps the complement of its
/// repelling arc strictly inside its attracting arc. By the ping-pong lemma
/// the generators then present a free group, so the seed representation is
/// faithful on the projective level. `margin` records the worst slack over
/// all inclusions and disjointness gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct PingPongCertificate {
    pub generators: Vec<ProjClass>,
    /// Per generator: (attracting arc, repelling arc).
    pub intervals: Vec<(CircleArc, CircleArc)>,
    pub margin: f64,
}

impl PingPongCertificate {
    /// Re-derives the margin from the stored generators and arcs: the
    /// smallest inclusion slack and pairwise gap. A nonpositive value means
    /// the data does not witness ping-pong.
    pub fn recompute_margin(&self) -> f64 {
        if self.generators.is_empty() || self.generators.len() != self.intervals.len() {
            return f64::NEG_INFINITY;
        }
        let arcs: Vec<CircleArc> = self
            .intervals
            .iter()
            .flat_map(|(attract, repel)| [*attract, *repel])
            .collect();
        let mut margin = f64::INFINITY;
        for (i, x) in arcs.iter().enumerate() {
            for y in &arcs[i + 1..] {
                margin = margin.min(circle_dist(x.center, y.center) - x.radius - y.radius);
            }
        }
        for (g, (attract, repel)) in self.generators.iter().zip(&self.intervals) {
            margin = margin.min(inclusion_margin(g, repel, attract));
            margin = margin.min(inclusion_margin(&g.inv(), attract, repel));
        }
        margin
    }
}

/// Slack of "`g` maps the complement of `source` inside `target`". The
/// complement is the arc between `source`'s endpoints through the opposite
/// fixed point; its image is the arc between the endpoint images through the
/// attracting point and misses the fixed point inside `source`, so checking
/// the two endpoint images against the target arc bounds the whole image.
fn inclusion_margin(g: &ProjClass, source: &CircleArc, target: &CircleArc) -> f64 {
    let ends = [source.center + source.radius, source.center - source.radius];
    ends.iter()
        .map(|p| target.radius - circle_dist(g.act(p.rem_euclid(1.0)), target.center))
        .fold(f64::INFINITY, f64::min)
}

/// Expansion that comfortably verifies ping-pong for `free_rank` generators.
/// With axes spaced `1/(2m)` apart and arcs of radius `r = 1/(6m)`, this
/// spread sends the worst point of each repelling complement to distance
/// `r/2` from the attracting fixed point, leaving an inclusion margin of
/// about `1/(12m)`.
pub fn default_spread(free_rank: usize) -> f64 {
    let r = 1.0 / (6.0 * free_rank as f64);
    (1.0 / ((PI * r).tan() * (PI * r / 2.0).tan())).sqrt()
}

/// Seed inputs: the exact central coordinate of the fiber image and the
/// hyperbolic expansion of the Schottky generators (`None` picks
/// [`default_spread`]).
#[derive(Clone, Debug)]
pub struct SeedParams {
    pub fiber_central: BigRational,
    pub spread: Option<f64>,
}

/// Images of one block's presentation generators: `surface` holds
/// `a₁,b₁,…,a_g,b_g`, `boundaries` holds `c₁,…,c_l` in the order of
/// [`boundary_slots`], and `fiber` holds `f`.
#[derive(Clone, Debug)]
pub struct BlockRep {
    pub surface: Vec<MotionElement>,
    pub boundaries: Vec<MotionElement>,
    pub fiber: MotionElement,
}

/// A representation of the manifold group: faithful at `root`, Abelian on
/// every other block, compatible with the gluings.
#[derive(Clone, Debug)]
pub struct Representation {
    pub root: BlockId,
    pub blocks: BTreeMap<BlockId, BlockRep>,
    pub certificate: PingPongCertificate,
}

/// `Π[aᵢ,bᵢ]` over consecutive surface pairs.
fn commutator_product(surface: &[MotionElement], tol: &Tolerances) -> MotionElement {
    let mut acc = MotionElement::identity();
    for pair in surface.chunks_exact(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let k = a.mul(b, tol).mul(&a.inv(tol), tol).mul(&b.inv(tol), tol);
        acc = acc.mul(&k, tol);
    }
    acc
}

/// Builds a faithful representation of one block's group `F_{2g+l−1} × Z`,
/// where `l` counts `glued` tori reserved for neighbors plus the block's own
/// free boundaries.
///
/// The free generators — all surface generators and all boundary generators
/// but the last — go to the hyperbolic classes `R(xᵢ)·D(spread)·R(xᵢ)⁻¹`
/// with axes at `xᵢ = i/(2m)`. Attracting and repelling arcs of radius
/// `1/(6m)` around the `2m` fixed points are checked to be pairwise disjoint
/// and correctly mapped; the recorded margin must reach [`MIN_MARGIN`] or
/// the construction is refused. The last boundary is not free: the relation
/// forces `c_l = (c₁⋯c_{l−1})⁻¹·Π[aᵢ,bᵢ]`. The fiber goes to the central
/// element with exact coordinate `fiber_central`, which must be nonzero —
/// a trivial fiber image kills central injectivity.
pub fn seed_faithful_rep(
    block: &SeifertBlock,
    glued: usize,
    params: &SeedParams,
    tol: &Tolerances,
) -> Result<(BlockRep, PingPongCertificate), RepError> {
    let pres = BlockPresentation::new(block, glued);
    if pres.boundaries == 0 {
        return Err(RepError::NoBoundary);
    }
    if params.fiber_central.is_zero() {
        return Err(RepError::ZeroFiberCentral);
    }
    let m = pres.free_rank();
    let spread = params.spread.unwrap_or_else(|| default_spread(m));
    let radius = 1.0 / (6.0 * m as f64);
    let stretch = ProjClass::diagonal(spread);
    let mut generators = Vec::with_capacity(m);
    let mut intervals = Vec::with_capacity(m);
    for i in 0..m {
        let axis = i as f64 / (2.0 * m as f64);
        let turn = ProjClass::rotation(axis);
        generators.push(turn.mul(&stretch).mul(&turn.inv()));
        intervals.push((
            CircleArc {
                center: axis,
                radius,
            },
            CircleArc {
                center: (axis + 0.5).rem_euclid(1.0),
                radius,
            },
        ));
    }
    let mut certificate = PingPongCertificate {
        generators,
        intervals,
        margin: 0.0,
    };
    let margin = certificate.recompute_margin();
    // Negated comparison on purpose: a NaN margin must be rejected, and
    // `margin < MIN_MARGIN` would let it through.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(margin >= MIN_MARGIN) {
        return Err(RepError::MarginTooSmall {
            margin,
            required: MIN_MARGIN,
        });
    }
    certificate.margin = margin;

    let images: Vec<MotionElement> = certificate
        .generators
        .iter()
        .map(|g| MotionElement::from_parts(*g, BigRational::zero()))
        .collect();
    let surface = images[..pres.surface_rank()].to_vec();
    let mut boundaries = images[pres.surface_rank()..].to_vec();
    let mut lead = MotionElement::identity();
    for c in &boundaries {
        lead = lead.mul(c, tol);
    }
    boundaries.push(lead.inv(tol).mul(&commutator_product(&surface, tol), tol));
    let fiber = MotionElement::central(params.fiber_central.clone());
    Ok((
        BlockRep {
            surface,
            boundaries,
            fiber,
        },
        certificate,
    ))
}

/// Child-side images on a shared torus, obtained by pushing the parent's
/// fiber and section images through the gluing matrix.
#[derive(Clone, Debug)]
pub struct DeterminedBoundary {
    /// Boundary slot of the child that carries the shared torus.
    pub slot: usize,
    /// Image of the child's fiber class.
    pub fiber: MotionElement,
    /// Image of the child's section class on this torus.
    pub section: MotionElement,
}

/// Fills in a child block Abelianly around one determined boundary.
///
/// Surface generators go to the identity. Boundary slots other than the
/// determined one take the entries of `free_choices` (absent slots default
/// to the identity); every choice must centralize the determined images and
/// commute with the other choices, or the image would not be Abelian. The
/// highest slot left unconstrained absorbs the closing relation
/// `c₁⋯c_l = Π[aᵢ,bᵢ]`, so the block relation holds on the nose; if every
/// slot is spoken for the extension is impossible and `NoFreeSlot` is
/// returned.
pub fn extend_abelian(
    child: &SeifertBlock,
    boundary_count: usize,
    determined: &DeterminedBoundary,
    free_choices: &BTreeMap<usize, MotionElement>,
    tol: &Tolerances,
) -> Result<BlockRep, RepError> {
    if determined.slot >= boundary_count {
        return Err(RepError::BadSlot {
            slot: determined.slot,
            count: boundary_count,
        });
    }
    if !commutes(&determined.fiber, &determined.section, tol) {
        return Err(RepError::NotInCentralizer {
            slot: determined.slot,
        });
    }
    for (&slot, choice) in free_choices {
        if slot >= boundary_count || slot == determined.slot {
            return Err(RepError::BadSlot {
                slot,
                count: boundary_count,
            });
        }
        if !commutes(choice, &determined.fiber, tol) || !commutes(choice, &determined.section, tol)
        {
            return Err(RepError::NotInCentralizer { slot });
        }
    }
    for (&a, ca) in free_choices {
        for (&b, cb) in free_choices.range(a + 1..) {
            if !commutes(ca, cb, tol) {
                return Err(RepError::ChoicesDoNotCommute { a, b });
            }
        }
    }
    let closing = (0..boundary_count)
        .rev()
        .find(|s| *s != determined.slot && !free_choices.contains_key(s))
        .ok_or(RepError::NoFreeSlot)?;

    let surface = vec![MotionElement::identity(); 2 * child.genus as usize];
    let mut boundaries: Vec<MotionElement> = (0..boundary_count)
        .map(|s| {
            if s == determined.slot {
                determined.section.clone()
            } else if let Some(choice) = free_choices.get(&s) {
                choice.clone()
            } else {
                MotionElement::identity()
            }
        })
        .collect();
    // prefix · c_closing · suffix = Π[aᵢ,bᵢ]
    let mut prefix = MotionElement::identity();
    for c in &boundaries[..closing] {
        prefix = prefix.mul(c, tol);
    }
    let mut suffix = MotionElement::identity();
    for c in &boundaries[closing + 1..] {
        suffix = suffix.mul(c, tol);
    }
    let target = commutator_product(&surface, tol);
    boundaries[closing] = prefix.inv(tol).mul(&target, tol).mul(&suffix.inv(tol), tol);
    Ok(BlockRep {
        surface,
        boundaries,
        fiber: determined.fiber.clone(),
    })
}

/// Exponents `[α, β, γ, δ]` expressing the child's torus basis in the
/// parent's: `ρ(f_child) = ρ(f_parent)^α·ρ(z_parent)^β` and
/// `ρ(z_child) = ρ(f_parent)^γ·ρ(z_parent)^δ`. The stored matrix expands the
/// first endpoint's classes in the second endpoint's basis, so it applies
/// directly when the child is listed first and through its inverse
/// otherwise.
fn child_exponents(edge: &Edge, child: &BlockId) -> Result<[i64; 4], RepError> {
    let g = &edge.glue;
    let raw = if edge.v == *child {
        [g.a.clone(), g.b.clone(), g.c.clone(), g.d.clone()]
    } else {
        [-&g.d, g.b.clone(), g.c.clone(), -&g.a]
    };
    let mut out = [0i64; 4];
    for (slot, n) in out.iter_mut().zip(&raw) {
        *slot = n
            .to_i64()
            .ok_or_else(|| RepError::EntryTooLarge(n.clone()))?;
    }
    Ok(out)
}

/// `x^a·y^b` for commuting `x`, `y`, multiplied one letter at a time in the
/// order that keeps the running product's sup-norm smallest. Commutativity
/// makes every order the same group element, but not the same floats: when
/// `x` and `y` are near-inverse powers of a common hyperbolic, the naive
/// `pow`-then-multiply route builds norm-`‖x‖^a·‖y‖^b` intermediates whose
/// final cancellation costs exactly the accuracy the edge checks need.
/// Gluing exponents are small; absurdly large ones fall back to the fast
/// route rather than looping.
fn commuting_word(
    x: &MotionElement,
    a: i64,
    y: &MotionElement,
    b: i64,
    tol: &Tolerances,
) -> MotionElement {
    let steps = a.unsigned_abs().saturating_add(b.unsigned_abs());
    if steps > 4096 {
        return x.pow(a, tol).mul(&y.pow(b, tol), tol);
    }
    let xs = if a >= 0 { x.clone() } else { x.inv(tol) };
    let ys = if b >= 0 { y.clone() } else { y.inv(tol) };
    let mut left = a.unsigned_abs();
    let mut right = b.unsigned_abs();
    let mut acc = MotionElement::identity();
    while left > 0 || right > 0 {
        let with_x = (left > 0).then(|| acc.mul(&xs, tol));
        let with_y = (right > 0).then(|| acc.mul(&ys, tol));
        acc = match (with_x, with_y) {
            (Some(p), Some(q)) => {
                if p.proj().sup_norm() <= q.proj().sup_norm() {
                    left -= 1;
                    p
                } else {
                    right -= 1;
                    q
                }
            }
            (Some(p), None) => {
                left -= 1;
                p
            }
            (None, Some(q)) => {
                right -= 1;
                q
            }
            (None, None) => unreachable!("loop guard"),
        };
    }
    acc
}

/// Builds a representation of the whole manifold group: a ping-pong seed at
/// `root`, extended Abelianly along the dual tree in breadth-first order.
///
/// Checked up front: the manifold passes validation, the dual graph is a
/// tree, and every block of degree ≤ 1 keeps a free boundary torus (leaves
/// need one for the closing slot; this also covers the single-block
/// manifold, where the seed is the whole answer).
///
/// For each tree edge the child's fiber and section images are the
/// gluing-matrix word in the parent's — the evaluation order is immaterial
/// because the two parent images always commute here (at the root the fiber
/// is central; below the root both live in an Abelian block image), so
/// [`commuting_word`] picks the numerically gentlest one. Children of the
/// root must end up with noncentral fiber images — the gluing has `b ≠ 0`
/// and the root's section images are nontrivial reduced words of the free
/// seed — and the builder asserts as much.
pub fn extend_along_tree(
    m: &GraphManifold,
    root: &BlockId,
    params: &SeedParams,
    tol: &Tolerances,
) -> Result<Representation, RepError> {
    let report = m.validate();
    if !report.is_valid() {
        return Err(RepError::InvalidManifold(report.to_string()));
    }
    if m.edges().len() + 1 != m.blocks().len() {
        return Err(RepError::NotATree);
    }
    for (id, block) in m.blocks() {
        if m.degree(id) <= 1 && block.free_boundaries == 0 {
            return Err(RepError::LeafWithoutFreeBoundary(id.clone()));
        }
    }
    let (root_rep, certificate) = seed_faithful_rep(m.block(root)?, m.degree(root), params, tol)?;
    let mut blocks = BTreeMap::from([(root.clone(), root_rep)]);
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(parent) = queue.pop_front() {
        for child in m.neighbors(&parent) {
            if blocks.contains_key(&child) {
                continue;
            }
            let edge = m.edge_between(&parent, &child).expect("neighbor edge");
            let parent_slots = boundary_slots(m, &parent)?;
            let parent_rep = &blocks[&parent];
            let f_parent = parent_rep.fiber.clone();
            let z_parent = parent_rep.boundaries[glued_slot(&parent_slots, &child)].clone();
            let [ff, fz, zf, zz] = child_exponents(edge, &child)?;
            let fiber = commuting_word(&f_parent, ff, &z_parent, fz, tol);
            let section = commuting_word(&f_parent, zf, &z_parent, zz, tol);
            if parent == *root {
                assert!(
                    fiber.classify(tol) != ElementClass::Central,
                    "fiber image at `{child}` collapsed to a central element; the root's \
                     section image must be noncentral and the gluing must have b ≠ 0"
                );
            }
            let child_slots = boundary_slots(m, &child)?;
            let child_rep = extend_abelian(
                m.block(&child)?,
                child_slots.len(),
                &DeterminedBoundary {
                    slot: glued_slot(&child_slots, &parent),
                    fiber,
                    section,
                },
                &BTreeMap::new(),
                tol,
            )?;
            blocks.insert(child.clone(), child_rep);
            queue.push_back(child);
        }
    }
    Ok(Representation {
        root: root.clone(),
        blocks,
        certificate,
    })
}

/// One named verification check with its outcome and a short account of the
/// worst deviation found.
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of [`verify_rep`]: the five checks in fixed order.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub checks: Vec<CheckItem>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Looks up the images of `id` and confirms they have the shape the block
/// demands; structural problems come back as messages, not panics.
fn block_images<'r>(
    m: &GraphManifold,
    rep: &'r Representation,
    id: &BlockId,
) -> Result<&'r BlockRep, String> {
    let block = m.block(id).map_err(|e| e.to_string())?;
    let images = rep
        .blocks
        .get(id)
        .ok_or_else(|| format!("block `{id}` has no images"))?;
    let surface = 2 * block.genus as usize;
    let slots = m.degree(id) + block.free_boundaries as usize;
    if images.surface.len() != surface || images.boundaries.len() != slots {
        return Err(format!(
            "block `{id}` should carry {surface} surface and {slots} boundary images, \
             found {} and {}",
            images.surface.len(),
            images.boundaries.len()
        ));
    }
    Ok(images)
}

/// Projective commutation defect, in the same metric [`commutes`] uses:
/// the distance between `AB` and `BA`.
fn commutation_defect(a: &MotionElement, b: &MotionElement) -> f64 {
    let ab = a.proj().mul(b.proj());
    let ba = b.proj().mul(a.proj());
    ab.dist(&ba)
}

/// Checks `rep` against `m`, each check within `eps`:
///
/// 1. `relation` — every block satisfies `Π[aᵢ,bᵢ]·(Πcⱼ)⁻¹ = 1`;
/// 2. `fiber-centralized` — every fiber image commutes with every generator
///    image of its block;
/// 3. `edge-compatibility` — shared-torus images match across every edge
///    under the gluing matrix;
/// 4. `abelian-blocks` — on non-root blocks all images pairwise commute;
/// 5. `root-faithfulness` — the recorded ping-pong certificate still
///    verifies with positive margin, its generators are the root's images,
///    and the root fiber is central with nonzero exact coordinate.
///
/// Structural problems (missing blocks, wrong image counts) fail the checks
/// that need the data; nothing here errors or panics.
pub fn verify_rep(m: &GraphManifold, rep: &Representation, eps: f64) -> VerificationReport {
    let tol = Tolerances {
        comm: eps,
        ..Tolerances::default()
    };
    let mut checks = Vec::with_capacity(5);

    // 1: block relations.
    let mut worst = 0.0f64;
    let mut site = String::from("-");
    let mut broken: Option<String> = None;
    for id in m.blocks().keys() {
        match block_images(m, rep, id) {
            Err(e) => {
                broken = Some(e);
                break;
            }
            Ok(images) => {
                let lhs = commutator_product(&images.surface, &tol);
                let mut rhs = MotionElement::identity();
                for c in &images.boundaries {
                    rhs = rhs.mul(c, &tol);
                }
                let d = lhs.dist(&rhs);
                if d >= worst {
                    worst = d;
                    site = id.to_string();
                }
            }
        }
    }
    checks.push(match broken {
        Some(e) => CheckItem {
            name: "relation",
            pass: false,
            detail: e,
        },
        None => CheckItem {
            name: "relation",
            pass: worst <= eps,
            detail: format!("max defect {worst:.3e} (block `{site}`)"),
        },
    });

    // 2: fiber images centralize their blocks.
    let mut worst = 0.0f64;
    let mut site = String::from("-");
    let mut broken: Option<String> = None;
    for id in m.blocks().keys() {
        match block_images(m, rep, id) {
            Err(e) => {
                broken = Some(e);
                break;
            }
            Ok(images) => {
                for g in images.surface.iter().chain(&images.boundaries) {
                    let d = commutation_defect(&images.fiber, g);
                    if d >= worst {
                        worst = d;
                        site = id.to_string();
                    }
                }
            }
        }
    }
    checks.push(match broken {
        Some(e) => CheckItem {
            name: "fiber-centralized",
            pass: false,
            detail: e,
        },
        None => CheckItem {
            name: "fiber-centralized",
            pass: worst <= eps,
            detail: format!("max commutation defect {worst:.3e} (block `{site}`)"),
        },
    });

    // 3: edge compatibility.
    let mut worst = 0.0f64;
    let mut site = String::from("-");
    let mut broken: Option<String> = None;
    for edge in m.edges() {
        let (first, second) = match (block_images(m, rep, &edge.v), block_images(m, rep, &edge.w)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                broken = Some(e);
                break;
            }
        };
        let slots_v = boundary_slots(m, &edge.v).expect("endpoint exists");
        let slots_w = boundary_slots(m, &edge.w).expect("endpoint exists");
        let z_first = &first.boundaries[glued_slot(&slots_v, &edge.w)];
        let z_second = &second.boundaries[glued_slot(&slots_w, &edge.v)];
        let [a, b, c, d] = match child_exponents(edge, &edge.v) {
            Ok(e) => e,
            Err(e) => {
                broken = Some(e.to_string());
                break;
            }
        };
        let expected_f = commuting_word(&second.fiber, a, z_second, b, &tol);
        let expected_z = commuting_word(&second.fiber, c, z_second, d, &tol);
        let defect = expected_f.dist(&first.fiber).max(expected_z.dist(z_first));
        if defect >= worst {
            worst = defect;
            site = edge.key().to_string();
        }
    }
    checks.push(match broken {
        Some(e) => CheckItem {
            name: "edge-compatibility",
            pass: false,
            detail: e,
        },
        None => CheckItem {
            name: "edge-compatibility",
            pass: worst <= eps,
            detail: format!("max defect {worst:.3e} (edge `{site}`)"),
        },
    });

    // 4: Abelian images away from the root.
    let mut worst = 0.0f64;
    let mut site = String::from("-");
    let mut broken: Option<String> = None;
    let mut seen_non_root = false;
    for id in m.blocks().keys().filter(|id| **id != rep.root) {
        seen_non_root = true;
        match block_images(m, rep, id) {
            Err(e) => {
                broken = Some(e);
                break;
            }
            Ok(images) => {
                let all: Vec<&MotionElement> = images
                    .surface
                    .iter()
                    .chain(&images.boundaries)
                    .chain(std::iter::once(&images.fiber))
                    .collect();
                for (i, x) in all.iter().enumerate() {
                    for y in &all[i + 1..] {
                        let d = commutation_defect(x, y);
                        if d >= worst {
                            worst = d;
                            site = id.to_string();
                        }
                    }
                }
            }
        }
    }
    checks.push(match broken {
        Some(e) => CheckItem {
            name: "abelian-blocks",
            pass: false,
            detail: e,
        },
        None if !seen_non_root => CheckItem {
            name: "abelian-blocks",
            pass: true,
            detail: "no non-root blocks".to_string(),
        },
        None => CheckItem {
            name: "abelian-blocks",
            pass: worst <= eps,
            detail: format!("max commutation defect {worst:.3e} (block `{site}`)"),
        },
    });

    // 5: root faithfulness certificate.
    checks.push(match block_images(m, rep, &rep.root) {
        Err(e) => CheckItem {
            name: "root-faithfulness",
            pass: false,
            detail: e,
        },
        Ok(images) => {
            let margin = rep.certificate.recompute_margin();
            let central_ok = images.fiber.classify(&tol) == ElementClass::Central
                && !images.fiber.central_part().is_zero();
            let free_rank = images.surface.len() + images.boundaries.len() - 1;
            let mut generators_ok = rep.certificate.generators.len() == free_rank;
            if generators_ok {
                for (g, image) in rep
                    .certificate
                    .generators
                    .iter()
                    .zip(images.surface.iter().chain(&images.boundaries))
                {
                    if g.dist(image.proj()) > eps {
                        generators_ok = false;
                        break;
                    }
                }
            }
            let mut notes = vec![format!("margin {margin:.3e}")];
            if !central_ok {
                notes.push("fiber image is not a nonzero central element".to_string());
            }
            if !generators_ok {
                notes.push("certificate generators do not match the root images".to_string());
            }
            CheckItem {
                name: "root-faithfulness",
                pass: margin > 0.0 && central_ok && generators_ok,
                detail: notes.join("; "),
            }
        }
    });

    VerificationReport { checks }
}

pub const REP_SCHEMA_VERSION: u32 = 1;
pub const REP_KIND: &str = "tree-representation";

#[derive(Debug, Error)]
pub enum RepDocError {
    #[error("representation document is not valid JSON: {0}")]
    Json(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("unsupported document kind `{0}`")]
    Kind(String),
    #[error("embedded manifold does not parse: {0}")]
    BadManifold(String),
    #[error("manifold hash mismatch: recorded {recorded}, computed {computed}")]
    HashMismatch { recorded: String, computed: String },
    #[error("bad scalar in document: {0}")]
    Scalar(#[from] ScalarError),
    #[error("root block `{0}` is not in the manifold")]
    UnknownRoot(String),
    #[error("block `{0}` is not in the manifold")]
    UnknownBlock(String),
    #[error("duplicate images for block `{0}`")]
    DuplicateBlock(String),
    #[error("matrix entries for an image of block `{0}` are not finite")]
    BadMatrix(String),
    #[error("exactness tag disagrees with the stored matrix for an image of block `{0}`")]
    TagMismatch(String),
    #[error("ping-pong certificate data is malformed")]
    BadCertificate,
}

/// Lossless serialized form of a [`Representation`] together with the
/// manifold it represents. Matrix entries are stored as hex float bits (with
/// a human-readable decimal shadow), central coordinates and rotation tags
/// as exact rationals, so reloading reproduces every element bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationDoc {
    pub schema_version: u32,
    pub tool_version: String,
    pub kind: String,
    pub manifold: String,
    pub manifold_sha256: String,
    pub root: String,
    pub certificate: PingPongDoc,
    pub blocks: Vec<BlockImagesDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PingPongDoc {
    /// Row-major hex-float entries of each generator class.
    pub generators: Vec<[String; 4]>,
    pub intervals: Vec<ArcPairDoc>,
    pub margin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcPairDoc {
    pub attracting: ArcDoc,
    pub repelling: ArcDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub center: String,
    pub radius: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockImagesDoc {
    pub id: String,
    pub surface: Vec<ElementDoc>,
    pub boundaries: Vec<ElementDoc>,
    pub fiber: ElementDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    /// Authoritative row-major matrix bits.
    pub matrix: [String; 4],
    /// Decimal shadow of `matrix`, informational only.
    pub matrix_readable: [f64; 4],
    /// Exact central coordinate, `p/q`.
    pub central: String,
    pub tag: Option<TagDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagDoc {
    Central,
    Rotation { amount: String },
}

fn element_doc(e: &MotionElement) -> ElementDoc {
    let m = e.proj().entries();
    let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
    ElementDoc {
        matrix: flat.map(f64_to_hex),
        matrix_readable: flat,
        central: rational_to_string(e.central_part()),
        tag: e.exact_tag().map(|t| match t {
            ExactTag::Central => TagDoc::Central,
            ExactTag::Rotation(r) => TagDoc::Rotation {
                amount: rational_to_string(r),
            },
        }),
    }
}

fn element_from_doc(doc: &ElementDoc, block: &str) -> Result<MotionElement, RepDocError> {
    let mut flat = [0.0f64; 4];
    for (slot, hex) in flat.iter_mut().zip(&doc.matrix) {
        *slot = f64_from_hex(hex)?;
    }
    if flat.iter().any(|x| !x.is_finite()) {
        return Err(RepDocError::BadMatrix(block.to_string()));
    }
    let proj = ProjClass::from_entries_unchecked([[flat[0], flat[1]], [flat[2], flat[3]]]);
    let central = rational_from_string(&doc.central)?;
    let tag = match &doc.tag {
        None => None,
        Some(TagDoc::Central) => {
            if proj.entries() != [[1.0, 0.0], [0.0, 1.0]] {
                return Err(RepDocError::TagMismatch(block.to_string()));
            }
            Some(ExactTag::Central)
        }
        Some(TagDoc::Rotation { amount }) => {
            let r = rational_from_string(amount)?;
            let fits = r > BigRational::zero() && r < BigRational::from_integer(1.into());
            let expected = r
                .to_f64()
                .filter(|_| fits)
                .map(ProjClass::rotation)
                .ok_or_else(|| RepDocError::TagMismatch(block.to_string()))?;
            if expected.entries() != proj.entries() {
                return Err(RepDocError::TagMismatch(block.to_string()));
            }
            Some(ExactTag::Rotation(r))
        }
    };
    Ok(MotionElement::from_raw_parts(proj, central, tag))
}

impl RepresentationDoc {
    pub fn from_representation(m: &GraphManifold, rep: &Representation) -> RepresentationDoc {
        RepresentationDoc {
            schema_version: REP_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            kind: REP_KIND.to_string(),
            manifold: manifold_to_text(m),
            manifold_sha256: manifold_hash(m),
            root: rep.root.as_str().to_string(),
            certificate: PingPongDoc {
                generators: rep
                    .certificate
                    .generators
                    .iter()
                    .map(|g| {
                        let e = g.entries();
                        [e[0][0], e[0][1], e[1][0], e[1][1]].map(f64_to_hex)
                    })
                    .collect(),
                intervals: rep
                    .certificate
                    .intervals
                    .iter()
                    .map(|(attract, repel)| ArcPairDoc {
                        attracting: arc_doc(attract),
                        repelling: arc_doc(repel),
                    })
                    .collect(),
                margin: f64_to_hex(rep.certificate.margin),
            },
            blocks: rep
                .blocks
                .iter()
                .map(|(id, images)| BlockImagesDoc {
                    id: id.as_str().to_string(),
                    surface: images.surface.iter().map(element_doc).collect(),
                    boundaries: images.boundaries.iter().map(element_doc).collect(),
                    fiber: element_doc(&images.fiber),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<RepresentationDoc, RepDocError> {
        serde_json::from_str(text).map_err(|e| RepDocError::Json(e.to_string()))
    }

    /// Rebuilds the manifold and the representation, checking the schema,
    /// the manifold hash, block identities, matrix finiteness, and that
    /// every exactness tag matches its stored matrix bits.
    pub fn reconstruct(&self) -> Result<(GraphManifold, Representation), RepDocError> {
        if self.schema_version != REP_SCHEMA_VERSION {
            return Err(RepDocError::SchemaVersion(self.schema_version));
        }
        if self.kind != REP_KIND {
            return Err(RepDocError::Kind(self.kind.clone()));
        }
        let m =
            parse_manifold(&self.manifold).map_err(|e| RepDocError::BadManifold(e.to_string()))?;
        let computed = manifold_hash(&m);
        if computed != self.manifold_sha256 {
            return Err(RepDocError::HashMismatch {
                recorded: self.manifold_sha256.clone(),
                computed,
            });
        }
        let root = BlockId::new(self.root.as_str());
        if m.block(&root).is_err() {
            return Err(RepDocError::UnknownRoot(self.root.clone()));
        }
        if self.certificate.generators.len() != self.certificate.intervals.len() {
            return Err(RepDocError::BadCertificate);
        }
        let mut generators = Vec::with_capacity(self.certificate.generators.len());
        for entries in &self.certificate.generators {
            let mut flat = [0.0f64; 4];
            for (slot, hex) in flat.iter_mut().zip(entries) {
                *slot = f64_from_hex(hex)?;
            }
            if flat.iter().any(|x| !x.is_finite()) {
                return Err(RepDocError::BadCertificate);
            }
            generators.push(ProjClass::from_entries_unchecked([
                [flat[0], flat[1]],
                [flat[2], flat[3]],
            ]));
        }
        let mut intervals = Vec::with_capacity(self.certificate.intervals.len());
        for pair in &self.certificate.intervals {
            intervals.push((
                arc_from_doc(&pair.attracting)?,
                arc_from_doc(&pair.repelling)?,
            ));
        }
        let margin = f64_from_hex(&self.certificate.margin)?;
        let mut blocks = BTreeMap::new();
        for block_doc in &self.blocks {
            let id = BlockId::new(block_doc.id.as_str());
            if m.block(&id).is_err() {
                return Err(RepDocError::UnknownBlock(block_doc.id.clone()));
            }
            if blocks.contains_key(&id) {
                return Err(RepDocError::DuplicateBlock(block_doc.id.clone()));
            }
            let surface = block_doc
                .surface
                .iter()
                .map(|e| element_from_doc(e, &block_doc.id))
                .collect::<Result<Vec<_>, _>>()?;
            let boundaries = block_doc
                .boundaries
                .iter()
                .map(|e| element_from_doc(e, &block_doc.id))
                .collect::<Result<Vec<_>, _>>()?;
            let fiber = element_from_doc(&block_doc.fiber, &block_doc.id)?;
            blocks.insert(
                id,
                BlockRep {
                    surface,
                    boundaries,
                    fiber,
                },
            );
        }
        Ok((
            m,
            Representation {
                root,
                blocks,
                certificate: PingPongCertificate {
                    generators,
                    intervals,
                    margin,
                },
            },
        ))
    }
}

fn arc_doc(arc: &CircleArc) -> ArcDoc {
    ArcDoc {
        center: f64_to_hex(arc.center),
        radius: f64_to_hex(arc.radius),
    }
}

fn arc_from_doc(doc: &ArcDoc) -> Result<CircleArc, RepDocError> {
    let center = f64_from_hex(&doc.center)?;
    let radius = f64_from_hex(&doc.radius)?;
    if !center.is_finite() || !radius.is_finite() {
        return Err(RepDocError::BadCertificate);
    }
    Ok(CircleArc { center, radius })
}
