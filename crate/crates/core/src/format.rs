//! File formats: the line-oriented manifold description plus the scalar
//! codecs shared by the JSON documents (decimal big integers, `p/q`
//! rationals, and bit-exact hexadecimal floats).
//!
//! A manifold file is a sequence of directives, one per line:
//!
//! ```text
//! # two genus-2 blocks glued along a single torus
//! block v genus 2 free 0
//! block w genus 2 free 0
//! edge v w glue 2 1 5 2
//! ```
//!
//! `block <id> genus <n> free <n>` declares a Seifert block; `edge <v> <w>
//! glue <a> <b> <c> <d>` glues two declared blocks with the matrix
//! `[[a, b], [c, d]]` (carrying the `w`-side torus basis to the `v`-side).
//! Blank lines are skipped and `#` starts a comment. Ids are made of ASCII
//! letters, digits, `_`, and `.` — no dashes, so `v-w` can name an edge
//! unambiguously on the command line.
//!
//! [`manifold_to_text`] emits a canonical form (blocks then edges, each
//! sorted), so equal manifolds serialize to identical bytes and
//! [`manifold_hash`] is well defined.

use crate::manifold::{BlockId, Edge, GluingMatrix, GraphManifold, SeifertBlock};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: unknown directive `{word}` (expected `block` or `edge`)")]
    UnknownDirective { line: usize, word: String },
    #[error("line {line}: expected {expected}")]
    Malformed { line: usize, expected: &'static str },
    #[error("line {line}: `{token}` is not an integer")]
    BadInteger { line: usize, token: String },
    #[error("line {line}: `{token}` is not a valid count")]
    BadCount { line: usize, token: String },
    #[error("line {line}: invalid id `{token}` (ids use ASCII letters, digits, `_`, and `.`)")]
    BadId { line: usize, token: String },
    #[error("line {line}: block `{id}` declared twice")]
    DuplicateBlock { line: usize, id: String },
    #[error("line {line}: edge glues block `{id}` to itself")]
    SelfLoop { line: usize, id: String },
}

fn valid_id(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn parse_id(line: usize, token: &str) -> Result<BlockId, ParseError> {
    if valid_id(token) {
        Ok(BlockId::new(token))
    } else {
        Err(ParseError::BadId {
            line,
            token: token.to_owned(),
        })
    }
}

fn parse_int(line: usize, token: &str) -> Result<BigInt, ParseError> {
    BigInt::from_str(token).map_err(|_| ParseError::BadInteger {
        line,
        token: token.to_owned(),
    })
}

fn parse_count(line: usize, token: &str) -> Result<u32, ParseError> {
    token.parse::<u32>().map_err(|_| ParseError::BadCount {
        line,
        token: token.to_owned(),
    })
}

/// Parses a manifold file. Syntax problems are reported with their line
/// number; semantic problems (determinants, connectivity, ...) are left to
/// [`GraphManifold::validate`].
pub fn parse_manifold(text: &str) -> Result<GraphManifold, ParseError> {
    let mut blocks: BTreeMap<BlockId, SeifertBlock> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0] {
            "block" => {
                if tokens.len() != 6 || tokens[2] != "genus" || tokens[4] != "free" {
                    return Err(ParseError::Malformed {
                        line,
                        expected: "`block <id> genus <n> free <n>`",
                    });
                }
                let id = parse_id(line, tokens[1])?;
                let genus = parse_count(line, tokens[3])?;
                let free = parse_count(line, tokens[5])?;
                if blocks
                    .insert(
                        id.clone(),
                        SeifertBlock {
                            genus,
                            free_boundaries: free,
                        },
                    )
                    .is_some()
                {
                    return Err(ParseError::DuplicateBlock { line, id: id.0 });
                }
            }
            "edge" => {
                if tokens.len() != 8 || tokens[3] != "glue" {
                    return Err(ParseError::Malformed {
                        line,
                        expected: "`edge <v> <w> glue <a> <b> <c> <d>`",
                    });
                }
                let v = parse_id(line, tokens[1])?;
                let w = parse_id(line, tokens[2])?;
                if v == w {
                    return Err(ParseError::SelfLoop { line, id: v.0 });
                }
                let a = parse_int(line, tokens[4])?;
                let b = parse_int(line, tokens[5])?;
                let c = parse_int(line, tokens[6])?;
                let d = parse_int(line, tokens[7])?;
                edges.push(Edge {
                    v,
                    w,
                    glue: GluingMatrix::new(a, b, c, d),
                });
            }
            word => {
                return Err(ParseError::UnknownDirective {
                    line,
                    word: word.to_owned(),
                })
            }
        }
    }
    Ok(GraphManifold::new(blocks, edges))
}

/// Canonical text form: blocks in id order, then edges in storage order
/// (already canonical). Parsing the output reproduces the manifold exactly.
pub fn manifold_to_text(m: &GraphManifold) -> String {
    let mut out = String::new();
    for (id, b) in m.blocks() {
        out.push_str(&format!(
            "block {} genus {} free {}\n",
            id, b.genus, b.free_boundaries
        ));
    }
    for e in m.edges() {
        out.push_str(&format!(
            "edge {} {} glue {} {} {} {}\n",
            e.v, e.w, e.glue.a, e.glue.b, e.glue.c, e.glue.d
        ));
    }
    out
}

/// SHA-256 of the canonical text, as lowercase hex.
pub fn manifold_hash(m: &GraphManifold) -> String {
    let digest = Sha256::digest(manifold_to_text(m).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("`{0}` is not a rational (expected `p` or `p/q` with nonzero q)")]
    BadRational(String),
    #[error("`{0}` is not a bit-exact float (expected 0x followed by 16 hex digits)")]
    BadHexFloat(String),
}

/// Renders a rational as `p` or `p/q` (reduced, positive denominator).
pub fn rational_to_string(q: &BigRational) -> String {
    q.to_string()
}

/// Parses `p` or `p/q` into an exact rational.
pub fn rational_from_string(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::BadRational(s.to_owned());
    match s.split_once('/') {
        None => {
            let n = BigInt::from_str(s.trim()).map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
        Some((num, den)) => {
            let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
    }
}

/// Bit-exact float encoding: `0x` plus the 16 hex digits of the IEEE-754 bits.
pub fn f64_to_hex(x: f64) -> String {
    format!("{:#018x}", x.to_bits())
}

/// Inverse of [`f64_to_hex`].
pub fn f64_from_hex(s: &str) -> Result<f64, ScalarError> {
    let bad = || ScalarError::BadHexFloat(s.to_owned());
    let digits = s.strip_prefix("0x").ok_or_else(bad)?;
    if digits.len() != 16 {
        return Err(bad());
    }
    let bits = u64::from_str_radix(digits, 16).map_err(|_| bad())?;
    Ok(f64::from_bits(bits))
}
