//! Reduced words in the free group `F_m`, and the conjugation equations
//! `w g w⁻¹ = target` over it.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{AlgebraError, Result};
use crate::parse::{parse_expr, TextAlgebra};

/// A reduced word, stored as syllables `(generator, exponent)` with 1-based generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    syllables: Vec<(u32, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn gen(g: u32) -> Self {
        Self::gen_pow(g, 1)
    }

    pub fn gen_pow(g: u32, e: i64) -> Self {
        assert!(g >= 1, "generators are 1-based");
        Self::from_syllables([(g, e)])
    }

    pub fn from_syllables<I: IntoIterator<Item = (u32, i64)>>(syl: I) -> Self {
        let mut out: Vec<(u32, i64)> = Vec::new();
        for (g, e) in syl {
            push_syllable(&mut out, g, e);
        }
        Word { syllables: out }
    }

    /// Letters as signed generator indices: `g` or `-g`.
    pub fn from_letters<I: IntoIterator<Item = i64>>(letters: I) -> Self {
        Self::from_syllables(letters.into_iter().map(|l| (l.unsigned_abs() as u32, l.signum())))
    }

    pub fn syllables(&self) -> &[(u32, i64)] {
        &self.syllables
    }

    pub fn letters(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.len());
        for &(g, e) in &self.syllables {
            for _ in 0..e.unsigned_abs() {
                v.push(g as i64 * e.signum());
            }
        }
        v
    }

    /// Length in letters.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// Largest generator index occurring (0 for the identity).
    pub fn max_gen(&self) -> u32 {
        self.syllables.iter().map(|&(g, _)| g).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.syllables.clone();
        for &(g, e) in &other.syllables {
            push_syllable(&mut out, g, e);
        }
        Word { syllables: out }
    }

    pub fn inv(&self) -> Word {
        Word { syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut acc = Word::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// `self * g * self⁻¹`
    pub fn conjugate(&self, g: &Word) -> Word {
        self.mul(g).mul(&self.inv())
    }

    /// Returns `(core, conjugator)` with `self = conjugator · core · conjugator⁻¹` and `core`
    /// cyclically reduced.
    pub fn cyclically_reduce(&self) -> (Word, Word) {
        let l = self.letters();
        let (mut i, mut j) = (0usize, l.len());
        while j >= i + 2 && l[i] == -l[j - 1] {
            i += 1;
            j -= 1;
        }
        (Word::from_letters(l[i..j].iter().copied()), Word::from_letters(l[..i].iter().copied()))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let l = self.letters();
        l.len() < 2 || l[0] != -l[l.len() - 1]
    }

    /// The maximal root `r` with `self = r^k`, `k ≥ 1`. The identity is its own root.
    pub fn root(&self) -> Word {
        let (core, conj) = self.cyclically_reduce();
        let l = core.letters();
        let n = l.len();
        for d in 1..=n {
            if n % d == 0 && (d..n).all(|i| l[i] == l[i - d]) {
                return conj.conjugate(&Word::from_letters(l[..d].iter().copied()));
            }
        }
        self.clone()
    }

    pub fn commutes_with(&self, other: &Word) -> bool {
        self.mul(other) == other.mul(self)
    }

    /// Cyclic rotation of a cyclically reduced word: `letters[k..] letters[..k]`.
    fn rotate(letters: &[i64], k: usize) -> Vec<i64> {
        letters[k..].iter().chain(&letters[..k]).copied().collect()
    }

    pub fn display_with(&self, m: u32) -> String {
        if self.is_identity() {
            return "1".into();
        }
        self.syllables
            .iter()
            .map(|&(g, e)| {
                let name = gen_name(g, m);
                if e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn parse(src: &str, m: u32) -> Result<Word> {
        parse_expr(src)?.eval(&WordCtx { m })
    }

    fn sort_key(&self) -> Vec<u64> {
        self.letters()
            .into_iter()
            .map(|l| 2 * (l.unsigned_abs() - 1) + u64::from(l < 0))
            .collect()
    }
}

fn push_syllable(out: &mut Vec<(u32, i64)>, g: u32, e: i64) {
    if e == 0 {
        return;
    }
    match out.last_mut() {
        Some(last) if last.0 == g => {
            last.1 += e;
            if last.1 == 0 {
                out.pop();
            }
        }
        _ => out.push((g, e)),
    }
}

/// Shortlex: shorter words first, then letterwise with `g1 < g1⁻¹ < g2 < ...`.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(self.max_gen().max(2)))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.display_with(self.max_gen().max(2)))
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s, u32::MAX).map_err(serde::de::Error::custom)
    }
}

/// `s`, `t` when `m == 2`, otherwise `g1, g2, ...`.
pub fn gen_name(g: u32, m: u32) -> String {
    match (m, g) {
        (2, 1) => "s".into(),
        (2, 2) => "t".into(),
        _ => format!("g{g}"),
    }
}

/// Generator index for a name: `s`/`t` (only when `m ≥ 2`) or `g<k>` with `k ≤ m`.
pub fn gen_index(name: &str, m: u32) -> Option<u32> {
    let g = match name {
        "s" => 1,
        "t" => 2,
        _ => name.strip_prefix('g')?.parse().ok()?,
    };
    (g >= 1 && g <= m).then_some(g)
}

struct WordCtx {
    m: u32,
}

impl TextAlgebra for WordCtx {
    type Value = Word;
    fn int(&self, n: &BigInt) -> Result<Word> {
        if n.is_one() {
            Ok(Word::identity())
        } else {
            Err(AlgebraError::Parse { pos: 0, msg: format!("`{n}` is not a word") })
        }
    }
    fn ident(&self, name: &str) -> Result<Word> {
        gen_index(name, self.m)
            .map(Word::gen)
            .ok_or_else(|| AlgebraError::Parse { pos: 0, msg: format!("unknown generator `{name}`") })
    }
    fn add(&self, _: Word, _: Word) -> Result<Word> {
        Err(AlgebraError::Parse { pos: 0, msg: "sum in a word".into() })
    }
    fn mul(&self, a: Word, b: Word) -> Result<Word> {
        Ok(a.mul(&b))
    }
    fn neg(&self, _: Word) -> Result<Word> {
        Err(AlgebraError::Parse { pos: 0, msg: "negation in a word".into() })
    }
    fn pow(&self, a: Word, e: i64) -> Result<Word> {
        Ok(a.pow(e))
    }
}

/// Solution set `{ w₀ · r^k : k ∈ Z }` of `w g w⁻¹ = target`; `root` is the maximal root of `g`,
/// which generates its centralizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjugators {
    pub w0: Word,
    pub root: Word,
}

impl Conjugators {
    pub fn contains(&self, w: &Word) -> bool {
        // w₀⁻¹ w must be a power of the root; powers of a cyclically reduced word have
        // length |k| * |core|, which bounds the search.
        let d = self.w0.inv().mul(w);
        if d.is_identity() {
            return true;
        }
        if self.root.is_identity() {
            return false;
        }
        let (core, conj) = self.root.cyclically_reduce();
        let inner = conj.inv().mul(&d).mul(&conj);
        let k = inner.len() / core.len();
        k > 0 && (inner == core.pow(k as i64) || inner == core.pow(-(k as i64)))
    }
}

/// All `w` with `w g w⁻¹ = target`, or `None` when `target` is not conjugate to `g`.
///
/// Cyclically reduced conjugates are cyclic rotations of each other, so the search is over
/// rotations of the cyclically reduced core of `g`.
pub fn solve_conjugation(g: &Word, target: &Word) -> Option<Conjugators> {
    assert!(!g.is_identity(), "solve_conjugation needs g != 1");
    let (cg, a) = g.cyclically_reduce();
    let (ct, b) = target.cyclically_reduce();
    if cg.len() != ct.len() {
        return None;
    }
    let lg = cg.letters();
    let lt = ct.letters();
    for k in 0..lg.len() {
        if Word::rotate(&lg, k) == lt {
            // ct = P⁻¹ cg P with P = lg[..k]
            let p = Word::from_letters(lg[..k].iter().copied());
            let w0 = b.mul(&p.inv()).mul(&a.inv());
            debug_assert_eq!(&w0.conjugate(g), target);
            return Some(Conjugators { w0, root: g.root() });
        }
    }
    None
}

/// Simultaneous solutions of several conjugation equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionSet {
    Empty,
    /// Infinite coset `w₀⟨r⟩`.
    Coset(Conjugators),
    Finite(Vec<Word>),
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SolutionSet::Empty) || matches!(self, SolutionSet::Finite(v) if v.is_empty())
    }
}

/// Intersects the solution sets of `w g_i w⁻¹ = target_i`.
///
/// Restricting `w = w₀ r^k` to a further equation `w g w⁻¹ = τ` gives `ρ^k h ρ^{-k} = τ'` with
/// `r = c ρ c⁻¹`, `ρ` cyclically reduced, `h = c⁻¹ g c`, `τ' = c⁻¹ w₀⁻¹ τ w₀ c`. If `h` does not
/// commute with `ρ`, the axes of `h` and `ρ` in the Cayley tree overlap in fewer than
/// `|h| + |ρ|` edges, so `|ρ^k h ρ^{-k}| ≥ 2|k||ρ| - 3|h| - 2|ρ|`; solutions therefore have
/// `|k| ≤ (|τ'| + 3|h|) / (2|ρ|) + 1`; the window searched is one wider than that.
pub fn solve_conjugation_system(eqs: &[(Word, Word)]) -> SolutionSet {
    let mut set: Option<SolutionSet> = None;
    for (g, tau) in eqs {
        set = Some(match set {
            None => match solve_conjugation(g, tau) {
                Some(c) => SolutionSet::Coset(c),
                None => SolutionSet::Empty,
            },
            Some(SolutionSet::Empty) => SolutionSet::Empty,
            Some(SolutionSet::Finite(ws)) => {
                SolutionSet::Finite(ws.into_iter().filter(|w| &w.conjugate(g) == tau).collect())
            }
            Some(SolutionSet::Coset(c)) => restrict_coset(&c, g, tau),
        });
    }
    match set {
        Some(SolutionSet::Finite(v)) if v.is_empty() => SolutionSet::Empty,
        Some(s) => s,
        None => SolutionSet::Coset(Conjugators { w0: Word::identity(), root: Word::identity() }),
    }
}

fn restrict_coset(c: &Conjugators, g: &Word, tau: &Word) -> SolutionSet {
    if c.root.is_identity() {
        return if &c.w0.conjugate(g) == tau {
            SolutionSet::Finite(vec![c.w0.clone()])
        } else {
            SolutionSet::Empty
        };
    }
    let (rho, conj) = c.root.cyclically_reduce();
    let h = conj.inv().conjugate(g);
    let tau1 = conj.inv().mul(&c.w0.inv()).conjugate(tau);
    if h.commutes_with(&rho) {
        return if h == tau1 { SolutionSet::Coset(c.clone()) } else { SolutionSet::Empty };
    }
    let bound = ((tau1.len() + 3 * h.len()) / (2 * rho.len()) + 2) as i64;
    let hits: Vec<Word> = (-bound..=bound)
        .filter(|&k| rho.pow(k).conjugate(&h) == tau1)
        .map(|k| c.w0.mul(&c.root.pow(k)))
        .collect();
    SolutionSet::Finite(hits)
}
