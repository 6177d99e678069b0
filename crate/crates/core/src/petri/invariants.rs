use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::num::normalize_row;

use super::algebra::{incidence, IncidenceMatrices};
use super::net::PlaceTransitionNet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum InvariantKind {
    Place,
    Transition,
}

/// A non-negative integer vector with coprime entries, over places (`A·y = 0`)
/// or transitions (`Aᵀ·x = 0`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Invariant {
    pub kind: InvariantKind,
    #[serde(serialize_with = "ser_big")]
    pub vector: Vec<BigInt>,
    pub minimal: bool,
}

fn ser_big<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl Invariant {
    /// The entries as machine integers, if they fit.
    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.vector.iter().map(ToPrimitive::to_u64).collect()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.vector.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i).collect()
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vector.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Farkas output: every vector emitted by elimination, and the subset with
/// minimal support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantSet {
    pub kind: InvariantKind,
    pub raw: Vec<Invariant>,
    pub minimal: Vec<Invariant>,
}

impl InvariantSet {
    pub fn minimal_u64(&self) -> Vec<Vec<u64>> {
        self.minimal.iter().filter_map(Invariant::to_u64).collect()
    }

    pub fn raw_u64(&self) -> Vec<Vec<u64>> {
        self.raw.iter().filter_map(Invariant::to_u64).collect()
    }
}

/// Farkas elimination. `d` has one row per unknown; the result holds the
/// non-negative integer vectors `y ≠ 0` with `yᵀ·d = 0`, each divided by its
/// gcd, sorted and without duplicates.
pub fn farkas(d: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = d.len();
    let m = d.first().map_or(0, Vec::len);
    // Each row is [d_i | e_i].
    let mut rows: Vec<Vec<BigInt>> = d
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|k| if k == i { BigInt::from(1) } else { BigInt::zero() }));
            row
        })
        .collect();
    for j in 0..m {
        let mut next: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        let (pos, neg): (Vec<&Vec<BigInt>>, Vec<&Vec<BigInt>>) = {
            let pos = rows.iter().filter(|r| r[j].is_positive()).collect();
            let neg = rows.iter().filter(|r| r[j].is_negative()).collect();
            (pos, neg)
        };
        for r in rows.iter().filter(|r| r[j].is_zero()) {
            next.insert(r.clone());
        }
        for p in &pos {
            for q in &neg {
                let (a, b) = (q[j].abs(), p[j].abs());
                let mut row: Vec<BigInt> = p.iter().zip(q.iter()).map(|(x, y)| &a * x + &b * y).collect();
                normalize_row(&mut row);
                next.insert(row);
            }
        }
        rows = next.into_iter().collect();
    }
    let mut out: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for r in rows {
        let mut v = r[m..].to_vec();
        if v.iter().any(|x| !x.is_zero()) {
            normalize_row(&mut v);
            out.insert(v);
        }
    }
    out.into_iter().collect()
}

/// Keeps the vectors whose support contains no other vector's support.
pub fn minimal_support(vectors: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let supports: Vec<BTreeSet<usize>> = vectors
        .iter()
        .map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i).collect())
        .collect();
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let dominated = supports.iter().enumerate().any(|(k, s)| {
            k != i && s.is_subset(&supports[i]) && (s.len() < supports[i].len() || k < i)
        });
        if !dominated {
            out.push(v.clone());
        }
    }
    out
}

fn to_set(kind: InvariantKind, vectors: Vec<Vec<BigInt>>) -> InvariantSet {
    let k = kind;
    let minimal_vecs = minimal_support(&vectors);
    let raw = vectors
        .iter()
        .map(|v| Invariant { kind: k, vector: v.clone(), minimal: minimal_vecs.contains(v) })
        .collect();
    let minimal = minimal_vecs.into_iter().map(|v| Invariant { kind: k, vector: v, minimal: true }).collect();
    InvariantSet { kind, raw, minimal }
}

fn transpose(a: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// P-invariants: `y ≥ 0`, `y ≠ 0` over places with `A·y = 0`.
pub fn p_invariants(net: &PlaceTransitionNet) -> InvariantSet {
    p_invariants_of(&incidence(net))
}

pub fn p_invariants_of(inc: &IncidenceMatrices<BigInt>) -> InvariantSet {
    to_set(InvariantKind::Place, farkas(&transpose(&inc.a, inc.places.len())))
}

/// T-invariants: `x ≥ 0`, `x ≠ 0` over transitions with `Aᵀ·x = 0`.
pub fn t_invariants(net: &PlaceTransitionNet) -> InvariantSet {
    t_invariants_of(&incidence(net))
}

pub fn t_invariants_of(inc: &IncidenceMatrices<BigInt>) -> InvariantSet {
    to_set(InvariantKind::Transition, farkas(&inc.a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn farkas_on_a_cycle() {
        // Three places in a ring: one conserved sum.
        let d = big(&[&[-1, 0, 1], &[1, -1, 0], &[0, 1, -1]]);
        assert_eq!(farkas(&d), big(&[&[1, 1, 1]]));
    }

    #[test]
    fn minimal_filter_drops_supersets() {
        let v = big(&[&[1, 1, 0], &[1, 0, 0], &[2, 1, 1]]);
        assert_eq!(minimal_support(&v), big(&[&[1, 0, 0]]));
    }
}
