//! Bounded exhaustive search for units of `R[F_m]`.
//!
//! Candidates have at most `support_bound` terms on words of length `≤ len_bound`, each
//! coefficient a nonzero element of `R` with integer coordinates of absolute value
//! `≤ height_bound` (all residues in positive characteristic). An element counts as a unit when
//! a two-sided inverse exists inside the same box. Since augmentation `R[F_m] → R` is a ring map,
//! only candidates whose augmentation is a unit of `R` (as recognized by
//! [`CoeffElem::unit_inverse`]) are paired, and only with candidates of inverse augmentation.
//! An empty result is evidence, not proof.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduced_words;
use crate::coeff::{CoeffElem, CoeffRing};
use crate::error::{AlgebraError, Result};
use crate::group_ring::GrElem;
use crate::word::Word;

const MAX_BOX: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSearchReport {
    pub ring: String,
    pub m: u32,
    pub support_bound: usize,
    pub height_bound: u64,
    pub len_bound: usize,
    pub candidates: usize,
    pub paired: usize,
    pub units: Vec<String>,
    pub nontrivial: Vec<String>,
}

fn coefficient_box(ring: &Arc<CoeffRing>, height: u64) -> Result<Vec<CoeffElem>> {
    let basis = ring.basis();
    let n = ring.characteristic();
    let values: Vec<BigInt> = if n.is_zero() {
        let h = height as i64;
        (-h..=h).map(BigInt::from).collect()
    } else {
        let n: u64 = n.try_into().map_err(|_| AlgebraError::InvalidInput("characteristic too large".into()))?;
        (0..n).map(BigInt::from).collect()
    };
    let total = values.len().checked_pow(basis.len() as u32).filter(|&t| t <= MAX_BOX);
    let total = total.ok_or_else(|| AlgebraError::InvalidInput("coefficient box too large".into()))?;
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let terms: Vec<_> = basis
            .iter()
            .map(|e| {
                let v = values[idx % values.len()].clone();
                idx /= values.len();
                (e.clone(), v)
            })
            .collect();
        let c = CoeffElem::from_terms(ring, terms);
        if !c.is_zero() {
            out.push(c);
        }
    }
    Ok(out)
}

/// `base units × ⟨invertible variables⟩`, closed under multiplication (capped).
fn trivial_coefficient_units(ring: &Arc<CoeffRing>) -> HashSet<CoeffElem> {
    let n = ring.characteristic();
    let mut seeds: Vec<CoeffElem> = if n.is_zero() {
        vec![CoeffElem::one(ring), CoeffElem::constant(ring, -1)]
    } else {
        let mut v = Vec::new();
        let mut c = BigInt::one();
        while &c < n {
            if c.gcd(n).is_one() {
                v.push(CoeffElem::constant(ring, c.clone()));
            }
            c += 1;
        }
        v
    };
    let gens: Vec<CoeffElem> = ring
        .relations()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.coeff(0).abs().is_one())
        .map(|(i, _)| CoeffElem::var(ring, i))
        .collect();
    let mut seen: HashSet<CoeffElem> = seeds.iter().cloned().collect();
    while let Some(c) = seeds.pop() {
        if seen.len() > 10_000 {
            break;
        }
        for g in &gens {
            let next = c.mul(g);
            if seen.insert(next.clone()) {
                seeds.push(next);
            }
        }
    }
    seen
}

fn combinations(k: usize, n: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(k, n - 1);
    for mut c in combinations(k - 1, n - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

pub fn unit_search(
    ring: &Arc<CoeffRing>,
    m: u32,
    support_bound: usize,
    height_bound: u64,
    len_bound: usize,
) -> Result<UnitSearchReport> {
    if support_bound == 0 {
        return Err(AlgebraError::InvalidInput("support bound must be positive".into()));
    }
    let coeffs = coefficient_box(ring, height_bound)?;
    let words: Vec<Word> = reduced_words(m, len_bound);
    let mut candidates: Vec<GrElem> = Vec::new();
    let mut total = 0usize;
    for k in 1..=support_bound.min(words.len()) {
        for ws in combinations(k, words.len()) {
            let count = coeffs.len().pow(k as u32);
            if total + count > 50 * MAX_BOX {
                return Err(AlgebraError::InvalidInput("search box too large".into()));
            }
            for mut idx in 0..count {
                let terms: Vec<(Word, CoeffElem)> = ws
                    .iter()
                    .map(|&wi| {
                        let c = coeffs[idx % coeffs.len()].clone();
                        idx /= coeffs.len();
                        (words[wi].clone(), c)
                    })
                    .collect();
                total += 1;
                let sum = terms.iter().fold(CoeffElem::zero(ring), |acc, (_, c)| acc.add(c));
                if sum.unit_inverse().is_ok() {
                    candidates.push(GrElem::from_terms(ring, m, terms));
                }
            }
        }
    }
    let mut by_aug: HashMap<CoeffElem, Vec<usize>> = HashMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_aug.entry(c.augmentation()).or_default().push(i);
    }
    let mut units: Vec<GrElem> = candidates
        .par_iter()
        .filter(|a| {
            let want = a.augmentation().unit_inverse().expect("filtered on unit augmentation");
            by_aug.get(&want).is_some_and(|bs| {
                bs.iter().any(|&j| {
                    let b = &candidates[j];
                    a.mul(b).is_one() && b.mul(a).is_one()
                })
            })
        })
        .cloned()
        .collect();
    units.sort_by(|a, b| a.terms().keys().cmp(b.terms().keys()).then_with(|| a.to_string().cmp(&b.to_string())));
    let trivial = trivial_coefficient_units(ring);
    let is_trivial = |u: &GrElem| u.terms().len() == 1 && u.terms().values().all(|c| trivial.contains(c));
    let nontrivial = units.iter().filter(|u| !is_trivial(u)).map(|u| u.to_string()).collect();
    Ok(UnitSearchReport {
        ring: ring.to_string(),
        m,
        support_bound,
        height_bound,
        len_bound,
        candidates: total,
        paired: candidates.len(),
        units: units.iter().map(|u| u.to_string()).collect(),
        nontrivial,
    })
}
