//! Serialized obstruction certificates and their independent checker.
//!
//! A certificate document is plain JSON with every integer in decimal
//! strings, every rational as `p/q`, and a canonical ordering throughout, so
//! two runs over the same manifold produce byte-identical files (modulo the
//! recorded tool version). [`check_certificate`] replays the whole pipeline
//! from the embedded manifold text and demands a bit-exact match, and
//! independently audits the claimed arithmetic: dominance sums, determinants
//! (recomputed from the claimed entries), and the substitution identity
//! `E·(det·f) = det·rhs` for every recorded solution.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::format::{manifold_hash, manifold_to_text, parse_manifold, rational_to_string};
use crate::linalg::IntMatrix;
use crate::manifold::GraphManifold;
use crate::obstruction::{
    certify_no_vertex_faithful, Certificate, CertifyOptions, ComponentRecord,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const CERTIFICATE_KIND: &str = "no-vertex-faithful-representation";

pub fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub schema_version: u32,
    pub tool_version: String,
    pub kind: String,
    /// Canonical manifold text; everything below is re-derivable from it.
    pub manifold: String,
    pub manifold_sha256: String,
    pub size_bound: usize,
    pub cut_bound: usize,
    pub blocks: Vec<BlockSummaryDoc>,
    pub exhaustive: bool,
    pub conclusion: String,
    pub vertices: Vec<VertexDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSummaryDoc {
    pub id: String,
    pub genus: u32,
    pub free_boundaries: u32,
    pub degree: usize,
    pub charge: String,
    pub reciprocal_sum: String,
    pub strictly_dominant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub vertex: String,
    pub neighbors: Vec<String>,
    pub exhaustive: bool,
    pub gaps: Vec<String>,
    pub components: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub vertices: Vec<String>,
    pub excluded_edges: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cover: Option<CoverDoc>,
    pub members: Vec<String>,
    pub matrix: Vec<Vec<String>>,
    pub rhs: Vec<Vec<TermDoc>>,
    pub dominance: Vec<DominanceDoc>,
    pub determinant: String,
    pub fibers: Vec<FiberDoc>,
    pub pinned: String,
    pub conclusion: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub cut: Vec<String>,
    pub anchor: String,
}

/// One `coefficient·central(symbol)` term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub symbol: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominanceDoc {
    pub member: String,
    pub diagonal: String,
    pub off_diagonal_sum: String,
    pub rhs_sum: String,
    pub holds: bool,
}

/// `determinant·fiber(member) = Σ terms`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberDoc {
    pub member: String,
    pub terms: Vec<TermDoc>,
}

impl CertificateDoc {
    pub fn from_certificate(cert: &Certificate) -> CertificateDoc {
        let m = &cert.manifold;
        let blocks = m
            .blocks()
            .iter()
            .map(|(id, b)| BlockSummaryDoc {
                id: id.to_string(),
                genus: b.genus,
                free_boundaries: b.free_boundaries,
                degree: m.degree(id),
                charge: rational_to_string(&m.charge(id).expect("block exists")),
                reciprocal_sum: rational_to_string(&m.reciprocal_sum(id).expect("block exists")),
                strictly_dominant: m.is_sdd_block(id).expect("block exists"),
            })
            .collect();
        let vertices: Vec<VertexDoc> = cert
            .vertices
            .iter()
            .map(|v| VertexDoc {
                vertex: v.vertex.to_string(),
                neighbors: v.neighbors.iter().map(ToString::to_string).collect(),
                exhaustive: v.exhaustive(),
                gaps: v.gaps.clone(),
                components: v
                    .components
                    .iter()
                    .map(|c| component_doc(&v.vertex.to_string(), c))
                    .collect(),
            })
            .collect();
        let conclusion = if cert.exhaustive() {
            "every vertex is obstructed: each candidate Abelian component yields an \
             invertible associated matrix pinning a neighbor fiber to projectively finite \
             order, contradicting the projectively infinite order forced by vertex \
             faithfulness"
                .to_string()
        } else {
            "every enumerated candidate is obstructed, but enumeration bounds were hit; \
             see the per-vertex gap lists"
                .to_string()
        };
        CertificateDoc {
            schema_version: SCHEMA_VERSION,
            tool_version: tool_version(),
            kind: CERTIFICATE_KIND.to_string(),
            manifold: manifold_to_text(m),
            manifold_sha256: manifold_hash(m),
            size_bound: cert.options.size_bound,
            cut_bound: cert.options.cut_bound,
            blocks,
            exhaustive: cert.exhaustive(),
            conclusion,
            vertices,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<CertificateDoc, CheckError> {
        serde_json::from_str(text).map_err(|e| CheckError::Json(e.to_string()))
    }
}

fn component_doc(vertex: &str, rec: &ComponentRecord) -> ComponentDoc {
    let n = rec.matrix.members().len();
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rec.matrix.matrix().get(i, j).to_string())
                .collect()
        })
        .collect();
    let terms = |list: &[(crate::manifold::BlockId, BigInt)]| {
        list.iter()
            .map(|(s, c)| TermDoc {
                symbol: s.to_string(),
                coefficient: c.to_string(),
            })
            .collect::<Vec<_>>()
    };
    ComponentDoc {
        vertices: rec.vertices.iter().map(ToString::to_string).collect(),
        excluded_edges: rec.excluded.iter().map(ToString::to_string).collect(),
        cover: rec.cover.as_ref().map(|c| CoverDoc {
            cut: c.cut.iter().map(ToString::to_string).collect(),
            anchor: c.anchor.to_string(),
        }),
        members: rec
            .matrix
            .members()
            .iter()
            .map(ToString::to_string)
            .collect(),
        matrix,
        rhs: rec.matrix.rhs().iter().map(|row| terms(row)).collect(),
        dominance: rec
            .dominance
            .iter()
            .map(|d| DominanceDoc {
                member: d.member.to_string(),
                diagonal: d.diagonal.to_string(),
                off_diagonal_sum: d.off_diagonal_sum.to_string(),
                rhs_sum: d.rhs_sum.to_string(),
                holds: d.holds(),
            })
            .collect(),
        determinant: rec.solution.determinant.to_string(),
        fibers: rec
            .solution
            .members
            .iter()
            .zip(&rec.solution.coefficients)
            .map(|(member, coeffs)| FiberDoc {
                member: member.to_string(),
                terms: terms(coeffs),
            })
            .collect(),
        pinned: rec.pinned.to_string(),
        conclusion: format!(
            "determinant {} is nonzero, so every member fiber is a root of a combination \
             of external central elements (projectively finite order); member {} is \
             adjacent to {}, where faithfulness forces projectively infinite order — \
             contradiction",
            rec.solution.determinant, rec.pinned, vertex
        ),
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("certificate is not readable JSON: {0}")]
    Json(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("unsupported certificate kind `{0}`")]
    Kind(String),
    #[error("embedded manifold does not parse: {0}")]
    BadManifold(String),
    #[error("manifold hash mismatch: recorded {recorded}, recomputed {computed}")]
    HashMismatch { recorded: String, computed: String },
    #[error("arithmetic audit failed: {0}")]
    Audit(String),
    #[error("replay failed: {0}")]
    Replay(String),
    #[error("replay does not reproduce the certificate: first difference at {0}")]
    Mismatch(String),
}

/// Steps performed by a successful check, for reporting.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub steps: Vec<String>,
}

/// Replays and audits a certificate from nothing but its own contents.
pub fn check_certificate(doc: &CertificateDoc) -> Result<CheckReport, CheckError> {
    let mut steps = Vec::new();
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CheckError::SchemaVersion(doc.schema_version));
    }
    if doc.kind != CERTIFICATE_KIND {
        return Err(CheckError::Kind(doc.kind.clone()));
    }
    steps.push(format!(
        "schema version {SCHEMA_VERSION}, kind `{CERTIFICATE_KIND}`"
    ));

    let m = parse_manifold(&doc.manifold).map_err(|e| CheckError::BadManifold(e.to_string()))?;
    let computed = manifold_hash(&m);
    if computed != doc.manifold_sha256 {
        return Err(CheckError::HashMismatch {
            recorded: doc.manifold_sha256.clone(),
            computed,
        });
    }
    steps.push(format!(
        "manifold parses ({} block(s), {} edge(s)), sha256 matches",
        m.blocks().len(),
        m.edges().len()
    ));

    audit_arithmetic(doc, &m)?;
    steps.push(format!(
        "arithmetic audit: {} vertex records, dominance, determinants, and substitution \
         identities all verified",
        doc.vertices.len()
    ));

    let options = CertifyOptions {
        size_bound: doc.size_bound,
        cut_bound: doc.cut_bound,
    };
    let fresh =
        certify_no_vertex_faithful(&m, &options).map_err(|e| CheckError::Replay(e.to_string()))?;
    let mut fresh_doc = CertificateDoc::from_certificate(&fresh);
    fresh_doc.tool_version = doc.tool_version.clone();
    if fresh_doc != *doc {
        let a = serde_json::to_value(doc).expect("document serializes");
        let b = serde_json::to_value(&fresh_doc).expect("document serializes");
        let path = first_difference(&a, &b, "certificate".to_string())
            .unwrap_or_else(|| "certificate".to_string());
        return Err(CheckError::Mismatch(path));
    }
    steps.push("full replay reproduces the certificate bit-exactly".to_string());

    Ok(CheckReport { steps })
}

fn parse_int(s: &str, what: &str) -> Result<BigInt, CheckError> {
    s.parse::<BigInt>()
        .map_err(|_| CheckError::Audit(format!("{what} is not an integer: `{s}`")))
}

/// Verifies the claimed numbers directly, without rerunning the certifier:
/// block invariants against the manifold, dominance sums and determinants
/// against the claimed matrices, and the substitution identity for every
/// claimed solution.
fn audit_arithmetic(doc: &CertificateDoc, m: &GraphManifold) -> Result<(), CheckError> {
    use crate::manifold::BlockId;

    let fail = |msg: String| Err(CheckError::Audit(msg));

    if doc.blocks.len() != m.blocks().len() {
        return fail("block summary count differs from the manifold".to_string());
    }
    for summary in &doc.blocks {
        let id = BlockId::new(summary.id.clone());
        let block = m
            .block(&id)
            .map_err(|_| CheckError::Audit(format!("summary names unknown block `{id}`")))?;
        let charge = rational_to_string(&m.charge(&id).expect("block exists"));
        let recip = rational_to_string(&m.reciprocal_sum(&id).expect("block exists"));
        if summary.genus != block.genus
            || summary.free_boundaries != block.free_boundaries
            || summary.degree != m.degree(&id)
            || summary.charge != charge
            || summary.reciprocal_sum != recip
            || summary.strictly_dominant != m.is_sdd_block(&id).expect("block exists")
        {
            return fail(format!(
                "block summary for `{id}` disagrees with the manifold"
            ));
        }
    }

    if doc.exhaustive != doc.vertices.iter().all(|v| v.gaps.is_empty()) {
        return fail("exhaustive flag disagrees with the gap lists".to_string());
    }

    for vrec in &doc.vertices {
        let vid = BlockId::new(vrec.vertex.clone());
        let neighbors: Vec<String> = m.neighbors(&vid).iter().map(ToString::to_string).collect();
        if vrec.neighbors != neighbors {
            return fail(format!(
                "neighbor list of `{vid}` disagrees with the manifold"
            ));
        }
        if vrec.exhaustive != vrec.gaps.is_empty() {
            return fail(format!(
                "exhaustive flag of `{vid}` disagrees with its gaps"
            ));
        }
        if vrec.components.is_empty() {
            return fail(format!(
                "vertex `{vid}` has no analyzed component, so no contradiction is witnessed"
            ));
        }
        for (ci, comp) in vrec.components.iter().enumerate() {
            let at = format!("vertex `{vid}`, component {ci}");
            audit_component(&at, vrec, comp)?;
        }
    }
    Ok(())
}

fn audit_component(at: &str, vrec: &VertexDoc, comp: &ComponentDoc) -> Result<(), CheckError> {
    let fail = |msg: String| Err(CheckError::Audit(msg));
    let n = comp.members.len();
    if comp.matrix.len() != n
        || comp.matrix.iter().any(|row| row.len() != n)
        || comp.rhs.len() != n
        || comp.dominance.len() != n
        || comp.fibers.len() != n
    {
        return fail(format!("{at}: matrix shape is inconsistent"));
    }

    let mut entries = Vec::with_capacity(n * n);
    for row in &comp.matrix {
        for s in row {
            entries.push(parse_int(s, &format!("{at}: matrix entry"))?);
        }
    }
    let matrix = IntMatrix::new(n, entries);

    for (i, dom) in comp.dominance.iter().enumerate() {
        if dom.member != comp.members[i] {
            return fail(format!("{at}: dominance row {i} names the wrong member"));
        }
        let diagonal = parse_int(&dom.diagonal, &format!("{at}: diagonal"))?;
        if diagonal != *matrix.get(i, i) {
            return fail(format!("{at}: diagonal of row {i} differs from the matrix"));
        }
        let mut off = BigInt::zero();
        for j in 0..n {
            if j != i {
                off += matrix.get(i, j).abs();
            }
        }
        let mut rhs_mass = BigInt::zero();
        for term in &comp.rhs[i] {
            rhs_mass += parse_int(&term.coefficient, &format!("{at}: rhs coefficient"))?.abs();
        }
        if parse_int(&dom.off_diagonal_sum, &format!("{at}: off-diagonal sum"))? != off
            || parse_int(&dom.rhs_sum, &format!("{at}: rhs sum"))? != rhs_mass
        {
            return fail(format!("{at}: dominance sums of row {i} are wrong"));
        }
        if !dom.holds || diagonal.abs() <= off + rhs_mass {
            return fail(format!("{at}: row {i} is not strictly dominant"));
        }
    }

    let det = parse_int(&comp.determinant, &format!("{at}: determinant"))?;
    if det.is_zero() {
        return fail(format!("{at}: determinant is zero"));
    }
    if matrix.det() != det {
        return fail(format!("{at}: determinant does not match the matrix"));
    }

    // Substitution: row r of E applied to the claimed det-scaled fibers must
    // equal det times the claimed right-hand side, symbol by symbol.
    use std::collections::BTreeMap;
    let mut fiber_terms: Vec<BTreeMap<&str, BigInt>> = Vec::with_capacity(n);
    for (i, fiber) in comp.fibers.iter().enumerate() {
        if fiber.member != comp.members[i] {
            return fail(format!("{at}: fiber {i} names the wrong member"));
        }
        let mut map = BTreeMap::new();
        for term in &fiber.terms {
            let c = parse_int(&term.coefficient, &format!("{at}: fiber coefficient"))?;
            if map.insert(term.symbol.as_str(), c).is_some() {
                return fail(format!("{at}: fiber {i} repeats symbol `{}`", term.symbol));
            }
        }
        fiber_terms.push(map);
    }
    for r in 0..n {
        let mut got: BTreeMap<&str, BigInt> = BTreeMap::new();
        for (k, terms) in fiber_terms.iter().enumerate() {
            let weight = matrix.get(r, k);
            if weight.is_zero() {
                continue;
            }
            for (symbol, c) in terms {
                *got.entry(symbol).or_default() += weight * c;
            }
        }
        got.retain(|_, c| !c.is_zero());
        let mut want: BTreeMap<&str, BigInt> = BTreeMap::new();
        for term in &comp.rhs[r] {
            let c = parse_int(&term.coefficient, &format!("{at}: rhs coefficient"))?;
            want.insert(term.symbol.as_str(), &det * c);
        }
        want.retain(|_, c| !c.is_zero());
        if got != want {
            return fail(format!("{at}: solution fails substitution in row {r}"));
        }
    }

    if !comp.members.contains(&comp.pinned) {
        return fail(format!("{at}: pinned fiber is not a member"));
    }
    match &comp.cover {
        None => {
            if !vrec.neighbors.contains(&comp.pinned) {
                return fail(format!(
                    "{at}: pinned fiber is not a neighbor of the vertex"
                ));
            }
            if !comp.excluded_edges.is_empty() {
                return fail(format!("{at}: ignored edges recorded without a cover step"));
            }
        }
        Some(cover) => {
            if cover.cut != comp.excluded_edges || comp.excluded_edges.is_empty() {
                return fail(format!("{at}: cover cut disagrees with the ignored edges"));
            }
            if cover.anchor != comp.pinned {
                return fail(format!(
                    "{at}: cover anchor disagrees with the pinned fiber"
                ));
            }
            let base = comp
                .pinned
                .strip_suffix(".0")
                .ok_or_else(|| CheckError::Audit(format!("{at}: pinned lift is not on sheet 0")))?;
            if !vrec.neighbors.iter().any(|w| w == base) {
                return fail(format!("{at}: pinned lift does not cover a neighbor"));
            }
            for cut in &cover.cut {
                let touches = cut.split('-').any(|side| side == vrec.vertex);
                if touches {
                    return fail(format!("{at}: cover cut touches the analyzed vertex"));
                }
            }
        }
    }
    Ok(())
}

/// Path of the first leaf where two JSON values differ.
fn first_difference(a: &Value, b: &Value, path: String) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                match y.get(k) {
                    Some(vb) => {
                        if let Some(hit) = first_difference(va, vb, format!("{path}.{k}")) {
                            return Some(hit);
                        }
                    }
                    None => return Some(format!("{path}.{k} (missing in replay)")),
                }
            }
            for k in y.keys() {
                if !x.contains_key(k) {
                    return Some(format!("{path}.{k} (only in replay)"));
                }
            }
            None
        }
        (Value::Array(x), Value::Array(y)) => {
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                if let Some(hit) = first_difference(va, vb, format!("{path}[{i}]")) {
                    return Some(hit);
                }
            }
            if x.len() != y.len() {
                return Some(format!("{path} (length {} vs {})", x.len(), y.len()));
            }
            None
        }
        _ => (a != b).then(|| format!("{path}: `{a}` vs `{b}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{BlockId, Edge, GluingMatrix, SeifertBlock};
    use std::collections::BTreeMap;

    fn manifold(blocks: &[&str], edges: &[(&str, &str, [i64; 4])]) -> GraphManifold {
        let blocks = blocks
            .iter()
            .map(|s| {
                (
                    BlockId::from(*s),
                    SeifertBlock {
                        genus: 2,
                        free_boundaries: 0,
                    },
                )
            })
            .collect::<BTreeMap<_, _>>();
        let edges = edges
            .iter()
            .map(|(v, w, [a, b, c, d])| Edge {
                v: BlockId::from(*v),
                w: BlockId::from(*w),
                glue: GluingMatrix::from_i64(*a, *b, *c, *d),
            })
            .collect();
        GraphManifold::new(blocks, edges)
    }

    fn two_block_doc() -> CertificateDoc {
        let m = manifold(&["v", "w"], &[("v", "w", [2, 1, 5, 2])]);
        let cert = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        CertificateDoc::from_certificate(&cert)
    }

    #[test]
    fn json_round_trip_is_identity() {
        let doc = two_block_doc();
        let json = doc.to_json();
        let back = CertificateDoc::from_json(&json).unwrap();
        assert_eq!(doc, back);
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn fresh_certificates_check_cleanly() {
        let doc = two_block_doc();
        let report = check_certificate(&doc).unwrap();
        assert_eq!(report.steps.len(), 4);

        // The recorded tool version is informational, not load-bearing.
        let mut relabeled = doc;
        relabeled.tool_version = "0.0.0-elsewhere".to_string();
        check_certificate(&relabeled).unwrap();
    }

    #[test]
    fn cover_bearing_certificates_check_cleanly() {
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "c", "v"],
            &[("a", "b", g), ("b", "c", g), ("a", "c", g), ("v", "a", g)],
        );
        let cert = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        let doc = CertificateDoc::from_certificate(&cert);
        assert!(doc
            .vertices
            .iter()
            .any(|v| v.components.iter().any(|c| c.cover.is_some())));
        check_certificate(&doc).unwrap();
    }

    #[test]
    fn partial_certificates_replay_with_their_own_bounds() {
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "c", "v"],
            &[("a", "b", g), ("b", "c", g), ("a", "c", g), ("v", "a", g)],
        );
        let opts = CertifyOptions {
            size_bound: 1,
            cut_bound: 0,
        };
        let cert = certify_no_vertex_faithful(&m, &opts).unwrap();
        let doc = CertificateDoc::from_certificate(&cert);
        assert!(!doc.exhaustive);
        assert_eq!(doc.size_bound, 1);
        check_certificate(&doc).unwrap();
    }

    #[test]
    fn corrupted_certificates_are_refused() {
        let doc = two_block_doc();

        let mut bad = doc.clone();
        bad.schema_version = 99;
        assert!(matches!(
            check_certificate(&bad),
            Err(CheckError::SchemaVersion(99))
        ));

        let mut bad = doc.clone();
        bad.manifold = bad.manifold.replace("genus 2", "genus 3");
        assert!(matches!(
            check_certificate(&bad),
            Err(CheckError::HashMismatch { .. })
        ));

        // A flipped determinant digit fails the recomputation audit.
        let mut bad = doc.clone();
        bad.vertices[1].components[0].determinant = "2".to_string();
        let err = check_certificate(&bad).unwrap_err();
        assert!(err.to_string().contains("determinant"), "{err}");

        // A tampered solution coefficient fails the substitution identity.
        let mut bad = doc.clone();
        bad.vertices[0].components[0].fibers[0].terms[0].coefficient = "3".to_string();
        let err = check_certificate(&bad).unwrap_err();
        assert!(err.to_string().contains("substitution"), "{err}");

        // A dominance sum no one computed fails the audit.
        let mut bad = doc.clone();
        bad.vertices[0].components[0].dominance[0].rhs_sum = "0".to_string();
        let err = check_certificate(&bad).unwrap_err();
        assert!(err.to_string().contains("dominance"), "{err}");

        // Unknown fields are rejected at parse time.
        let json = doc.to_json().replace(
            "\"schema_version\": 1,",
            "\"schema_version\": 1,\n  \"junk\": true,",
        );
        assert!(matches!(
            CertificateDoc::from_json(&json),
            Err(CheckError::Json(_))
        ));
    }

    #[test]
    fn replay_catches_silent_substitutions() {
        // Swap in a different (still arithmetically coherent) pinned member:
        // the audit alone cannot object to pinning a different neighbor, but
        // the replay comparison can.
        let g = [3, 1, -8, -3];
        let m = manifold(
            &["a", "b", "v"],
            &[("a", "b", g), ("v", "a", g), ("v", "b", g)],
        );
        let cert = certify_no_vertex_faithful(&m, &CertifyOptions::default()).unwrap();
        let doc = CertificateDoc::from_certificate(&cert);
        check_certificate(&doc).unwrap();

        let at_v = doc.vertices.iter().position(|r| r.vertex == "v").unwrap();
        let mut bad = doc.clone();
        // Candidate {a, b} pins `a`; claim `b` instead.
        let target = bad.vertices[at_v]
            .components
            .iter_mut()
            .find(|c| c.vertices == ["a", "b"] && c.excluded_edges.is_empty())
            .unwrap();
        assert_eq!(target.pinned, "a");
        target.pinned = "b".to_string();
        target.conclusion = target.conclusion.replace("member a", "member b");
        let err = check_certificate(&bad).unwrap_err();
        assert!(matches!(err, CheckError::Mismatch(_)), "{err}");
    }
}
