//! Deciding whether `[δ_n] = [δ_n']` in the double coset space, assuming the unit groups of the
//! two corners consist of trivial units.
//!
//! A coincidence means `δ_n = γ · w · δ_n' · v` with `γ ∈ F_p[C_p]*` and `w, v ∈ F_m`. We allow
//! `γ` to be any unit of `F_p[C_p]`, which only enlarges the search space. Writing
//! `γ = c + d·y + O(y²)`:
//!
//! * `y⁰`: `1 = c·w·v`, so `c = 1` and `v = w⁻¹`;
//! * `y¹`: `T₁(n) = d + w·T₁(n')·w⁻¹`. Conjugation permutes words and fixes the identity, so `d`
//!   is read off the identity coefficient and the remaining words must be matched bijectively,
//!   coefficient for coefficient. Each matching is a system of conjugation equations in `F_m`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{delta, DeltaSpec};
use crate::coeff::{CoeffElem, CoeffRing};
use crate::error::{AlgebraError, Result};
use crate::group_ring::GrElem;
use crate::word::{solve_conjugation, solve_conjugation_system, SolutionSet, Word};

type Term = (Word, CoeffElem);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Distinct,
    Equivalent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub layer: usize,
    pub constraint: String,
    pub resolution: String,
}

/// `δ_n = γ · w · δ_n' · v`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub gamma: String,
    pub w: String,
    pub v: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctnessVerdict {
    pub p: u64,
    pub m: u32,
    pub n: u64,
    pub n2: u64,
    pub verdict: Verdict,
    pub trace: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witness>,
}

fn eq_text(g: &Word, tau: &Word, m: u32) -> String {
    format!("w*({})*w^-1 = {}", g.display_with(m), tau.display_with(m))
}

fn parse_eq(s: &str, m: u32) -> Result<(Word, Word)> {
    let bad = || AlgebraError::InvalidInput(format!("unreadable equation `{s}`"));
    let (lhs, rhs) = s.split_once(" = ").ok_or_else(bad)?;
    let inner = lhs.strip_prefix("w*(").and_then(|x| x.strip_suffix(")*w^-1")).ok_or_else(bad)?;
    Ok((Word::parse(inner, m)?, Word::parse(rhs, m)?))
}

/// All bijections `0..k → 0..k` (k is 2 in practice).
fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

fn describe_failure(eqs: &[(Word, Word)], m: u32) -> String {
    let mut parts = Vec::new();
    for (g, tau) in eqs {
        match solve_conjugation(g, tau) {
            None => {
                return format!("{} is not conjugate to {}", g.display_with(m), tau.display_with(m));
            }
            Some(c) => parts.push(format!("w in {}*<{}>", c.w0.display_with(m), c.root.display_with(m))),
        }
    }
    format!("{}; these sets do not meet", parts.join(" and "))
}

fn split_identity(layer: &GrElem) -> (CoeffElem, Vec<(Word, CoeffElem)>) {
    let id = layer.coeff_of(&Word::identity());
    let rest = layer.terms().iter().filter(|(w, _)| !w.is_identity()).map(|(w, c)| (w.clone(), c.clone())).collect();
    (id, rest)
}

/// Complete decision from the `y⁰` and `y¹` layers (see the module docs).
pub fn certify_distinct(p: u64, m: u32, n: u64, n2: u64) -> Result<DistinctnessVerdict> {
    let dn = delta(&DeltaSpec::new(p, m, n)?)?;
    let dn2 = delta(&DeltaSpec::new(p, m, n2)?)?;
    let mut trace = Vec::new();

    if !dn.layers[0].is_one() || !dn2.layers[0].is_one() {
        return Err(AlgebraError::Verification("y^0 layer of delta is not 1".into()));
    }
    trace.push(TraceEntry {
        layer: 0,
        constraint: "1 = c*w*v with c in F_p^*, w, v in F_m".into(),
        resolution: "c = 1, v = w^-1".into(),
    });

    let (id_l, left) = split_identity(&dn.layers[1]);
    let (id_r, right) = split_identity(&dn2.layers[1]);
    let d1 = id_l.sub(&id_r);
    trace.push(TraceEntry {
        layer: 1,
        constraint: format!("identity coefficient: {id_l} = d + {id_r}"),
        resolution: format!("d = {d1}"),
    });

    let mut solutions: Vec<SolutionSet> = Vec::new();
    if left.len() != right.len() {
        trace.push(TraceEntry {
            layer: 1,
            constraint: format!("{} words against {} words", left.len(), right.len()),
            resolution: "conjugation cannot match supports of different size".into(),
        });
    } else {
        for perm in permutations(left.len()) {
            let pairs: Vec<(&Term, &Term)> =
                perm.iter().enumerate().map(|(i, &j)| (&right[i], &left[j])).collect();
            let eqs: Vec<(Word, Word)> = pairs.iter().map(|(r, l)| (r.0.clone(), l.0.clone())).collect();
            let constraint = eqs.iter().map(|(g, tau)| eq_text(g, tau, m)).collect::<Vec<_>>().join("; ");
            if let Some((r, l)) = pairs.iter().find(|(r, l)| r.1 != l.1) {
                trace.push(TraceEntry {
                    layer: 1,
                    constraint,
                    resolution: format!(
                        "coefficients differ in F_{p}: {} on {} vs {} on {}",
                        r.1,
                        r.0.display_with(m),
                        l.1,
                        l.0.display_with(m)
                    ),
                });
                continue;
            }
            let sol = solve_conjugation_system(&eqs);
            let resolution = match &sol {
                SolutionSet::Empty => describe_failure(&eqs, m),
                SolutionSet::Finite(v) if v.is_empty() => describe_failure(&eqs, m),
                SolutionSet::Finite(v) => format!(
                    "w in {{{}}}",
                    v.iter().map(|w| w.display_with(m)).collect::<Vec<_>>().join(", ")
                ),
                SolutionSet::Coset(c) => format!("w in {}*<{}>", c.w0.display_with(m), c.root.display_with(m)),
            };
            trace.push(TraceEntry { layer: 1, constraint, resolution });
            if !sol.is_empty() {
                solutions.push(sol);
            }
        }
    }

    if solutions.is_empty() {
        return Ok(DistinctnessVerdict { p, m, n, n2, verdict: Verdict::Distinct, trace, witnesses: None });
    }
    // layers 0 and 1 admit a candidate: finish with an exact witness
    let mut candidates = Vec::new();
    for sol in &solutions {
        match sol {
            SolutionSet::Finite(v) => candidates.extend(v.iter().cloned()),
            SolutionSet::Coset(c) => candidates.extend((-3..=3).map(|k| c.w0.mul(&c.root.pow(k)))),
            SolutionSet::Empty => {}
        }
    }
    for w in candidates {
        if let Some(gamma) = coefficient_quotient(&dn.value, &dn2.value, &w)? {
            trace.push(TraceEntry {
                layer: 2,
                constraint: "delta_n = gamma*w*delta_n'*w^-1".into(),
                resolution: format!("holds with gamma = {gamma}, w = {}", w.display_with(m)),
            });
            let witnesses = Witness { gamma: gamma.to_string(), w: w.display_with(m), v: w.inv().display_with(m) };
            return Ok(DistinctnessVerdict { p, m, n, n2, verdict: Verdict::Equivalent, trace, witnesses: Some(witnesses) });
        }
    }
    Err(AlgebraError::Verification(format!(
        "layers 0 and 1 allow delta_{n} ~ delta_{n2} but no exact witness was found"
    )))
}

/// `γ = δ · (w δ' w⁻¹)⁻¹` when it lies in `F_p[C_p]*` (identity word only, unit coefficient).
fn coefficient_quotient(d: &GrElem, d2: &GrElem, w: &Word) -> Result<Option<CoeffElem>> {
    let inv = d2.conjugate_by(w).try_inverse()?;
    let g = d.mul(&inv);
    if g.terms().keys().any(|u| !u.is_identity()) {
        return Ok(None);
    }
    let c = g.coeff_of(&Word::identity());
    Ok(c.unit_inverse().is_ok().then_some(c))
}

impl DistinctnessVerdict {
    /// Re-solves every layer-1 matching with the free-group solver. A `Distinct` verdict replays
    /// when no matching has a solution; an `Equivalent` one when the witness multiplies out.
    pub fn replay(&self) -> Result<bool> {
        match self.verdict {
            Verdict::Distinct => {
                for e in self.trace.iter().filter(|e| e.layer == 1 && e.constraint.starts_with("w*(")) {
                    if e.resolution.starts_with("coefficients differ") {
                        continue;
                    }
                    let eqs = e.constraint.split("; ").map(|s| parse_eq(s, self.m)).collect::<Result<Vec<_>>>()?;
                    if !solve_conjugation_system(&eqs).is_empty() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Verdict::Equivalent => {
                let wit = self.witnesses.as_ref().ok_or_else(|| AlgebraError::InvalidInput("missing witness".into()))?;
                let d = delta(&DeltaSpec::new(self.p, self.m, self.n)?)?;
                let d2 = delta(&DeltaSpec::new(self.p, self.m, self.n2)?)?;
                let r = d.spec.coeff_ring();
                let gamma = CoeffElem::parse(&r, &wit.gamma)?;
                let w = Word::parse(&wit.w, self.m)?;
                let v = Word::parse(&wit.v, self.m)?;
                let rhs = GrElem::from_coeff(gamma, self.m).mul(&d2.value.left_word(&w).right_word(&v));
                Ok(rhs == d.value)
            }
        }
    }

    /// Whether a brute-force run is consistent with this verdict.
    pub fn agrees_with(&self, bf: &BruteForceReport) -> bool {
        match self.verdict {
            Verdict::Distinct => bf.hits.is_empty(),
            Verdict::Equivalent => {
                let within = self
                    .witnesses
                    .as_ref()
                    .and_then(|w| Word::parse(&w.w, self.m).ok())
                    .is_some_and(|w| w.len() <= bf.len_bound);
                !within || !bf.hits.is_empty()
            }
        }
    }
}

/// Reduced words of length at most `len`, shortlex order.
pub fn reduced_words(m: u32, len: usize) -> Vec<Word> {
    let mut strata: Vec<Vec<Vec<i64>>> = vec![vec![vec![]]];
    for _ in 0..len {
        let last = strata.last().unwrap();
        let mut next = Vec::new();
        for w in last {
            for g in 1..=m as i64 {
                for l in [g, -g] {
                    if w.last() != Some(&-l) {
                        let mut w2 = w.clone();
                        w2.push(l);
                        next.push(w2);
                    }
                }
            }
        }
        strata.push(next);
    }
    let mut out: Vec<Word> = strata.into_iter().flatten().map(Word::from_letters).collect();
    out.sort();
    out
}

/// Every element of `ring` with augmentation prime to the characteristic: the unit group of a
/// local `F_p[C_p]`.
fn local_units(ring: &std::sync::Arc<CoeffRing>) -> Vec<CoeffElem> {
    let p: u64 = ring.characteristic().try_into().expect("prime characteristic");
    let basis = ring.basis();
    let total = (p as usize).pow(basis.len() as u32);
    (0..total)
        .map(|mut idx| {
            let terms: Vec<_> = basis
                .iter()
                .map(|e| {
                    let c = (idx % p as usize) as i64;
                    idx /= p as usize;
                    (e.clone(), c.into())
                })
                .collect();
            CoeffElem::from_terms(ring, terms)
        })
        .filter(|c| !(c.augmentation() % p).eq(&0.into()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceHit {
    pub gamma: String,
    pub w: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceReport {
    pub p: u64,
    pub m: u32,
    pub n: u64,
    pub n2: u64,
    pub len_bound: usize,
    pub words_checked: usize,
    pub units_checked: usize,
    pub hits: Vec<BruteForceHit>,
}

/// Tests `δ_n = γ · w · δ_n' · w⁻¹` for every reduced `w` with `|w| ≤ len_bound` and every unit
/// `γ` of `F_p[C_p]`, by exact multiplication.
pub fn brute_force_check(p: u64, m: u32, n: u64, n2: u64, len_bound: usize) -> Result<BruteForceReport> {
    let dn = delta(&DeltaSpec::new(p, m, n)?)?;
    let dn2 = delta(&DeltaSpec::new(p, m, n2)?)?;
    let ring = dn.spec.coeff_ring();
    let units = local_units(&ring);
    let words = reduced_words(m, len_bound);
    let hits: Vec<BruteForceHit> = words
        .par_iter()
        .flat_map_iter(|w| {
            let x = dn2.value.conjugate_by(w);
            units
                .iter()
                .filter(|g| x.scale(g) == dn.value)
                .map(|g| BruteForceHit { gamma: g.to_string(), w: w.display_with(m) })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(BruteForceReport {
        p,
        m,
        n,
        n2,
        len_bound,
        words_checked: words.len(),
        units_checked: units.len(),
        hits,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub p: u64,
    pub m: u32,
    pub count: u64,
    pub deltas: Vec<String>,
    /// `matrix[i][j]` compares `δ_{i+1}` with `δ_{j+1}`.
    pub matrix: Vec<Vec<Verdict>>,
    pub off_diagonal_distinct: bool,
    pub diagonal_equivalent: bool,
}

/// `δ_1 .. δ_count` with the pairwise verdicts.
pub fn family(p: u64, m: u32, count: u64) -> Result<FamilyReport> {
    if count == 0 {
        return Err(AlgebraError::InvalidInput("family size must be positive".into()));
    }
    let deltas = (1..=count)
        .map(|n| delta(&DeltaSpec::new(p, m, n)?)?.report().map(|r| r.delta))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(u64, u64)> = (1..=count).flat_map(|i| (1..=count).map(move |j| (i, j))).collect();
    let verdicts = cells
        .par_iter()
        .map(|&(i, j)| certify_distinct(p, m, i, j).map(|v| v.verdict))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix: BTreeMap<usize, Vec<Verdict>> = BTreeMap::new();
    for (k, v) in verdicts.into_iter().enumerate() {
        matrix.entry(k / count as usize).or_default().push(v);
    }
    let matrix: Vec<Vec<Verdict>> = matrix.into_values().collect();
    let off = matrix.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| i == j || *v == Verdict::Distinct));
    let diag = matrix.iter().enumerate().all(|(i, r)| r[i] == Verdict::Equivalent);
    Ok(FamilyReport { p, m, count, deltas, matrix, off_diagonal_distinct: off, diagonal_equivalent: diag })
}
