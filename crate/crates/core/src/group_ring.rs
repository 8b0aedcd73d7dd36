//! `R[F_m]` for a commutative coefficient ring `R`; with `R = Z[G]` this is `Z[G × F_m]`.
//!
//! Coefficients commute with words, so products are a double convolution: words multiply by
//! free reduction, coefficients by the ring product.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coeff::{same_ring, CoeffElem, CoeffHom, CoeffRing, CoeffSection};
use crate::error::{AlgebraError, Result};
use crate::parse::{parse_expr, TextAlgebra};
use crate::word::{gen_index, Word};

#[derive(Clone, PartialEq, Eq)]
pub struct GrElem {
    coeff_ring: Arc<CoeffRing>,
    m: u32,
    terms: BTreeMap<Word, CoeffElem>,
}

impl std::hash::Hash for GrElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.m.hash(state);
        self.terms.hash(state);
    }
}

/// One `{word, coeff}` record of the JSON form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub word: String,
    pub coeff: String,
}

impl GrElem {
    pub fn zero(ring: &Arc<CoeffRing>, m: u32) -> Self {
        GrElem { coeff_ring: ring.clone(), m, terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<CoeffRing>, m: u32) -> Self {
        Self::from_coeff(CoeffElem::one(ring), m)
    }

    pub fn from_coeff(c: CoeffElem, m: u32) -> Self {
        Self::term(c, Word::identity(), m)
    }

    pub fn word(ring: &Arc<CoeffRing>, m: u32, w: Word) -> Self {
        Self::term(CoeffElem::one(ring), w, m)
    }

    pub fn term(c: CoeffElem, w: Word, m: u32) -> Self {
        assert!(w.max_gen() <= m, "word uses a generator beyond F_{m}");
        let ring = c.ring().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        GrElem { coeff_ring: ring, m, terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, CoeffElem)>>(ring: &Arc<CoeffRing>, m: u32, terms: I) -> Self {
        let mut out = Self::zero(ring, m);
        for (w, c) in terms {
            assert!(same_ring(c.ring(), ring), "coefficient ring mismatch");
            out.add_term(w, c);
        }
        out
    }

    fn add_term(&mut self, w: Word, c: CoeffElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(existing) => {
                let s = existing.add(&c);
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn coeff_ring(&self) -> &Arc<CoeffRing> {
        &self.coeff_ring
    }

    pub fn rank(&self) -> u32 {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<Word, CoeffElem> {
        &self.terms
    }

    pub fn coeff_of(&self, w: &Word) -> CoeffElem {
        self.terms.get(w).cloned().unwrap_or_else(|| CoeffElem::zero(&self.coeff_ring))
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff_of(&Word::identity()).is_one()
    }

    pub fn same_ring_as(&self, other: &Self) -> bool {
        self.m == other.m && same_ring(&self.coeff_ring, &other.coeff_ring)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_ring_as(other) {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(&self.coeff_ring, self.m);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.mul(wb), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("ring mismatch in add")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("ring mismatch in sub")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("ring mismatch in mul")
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn pow(&self, e: u64) -> Self {
        (0..e).fold(Self::one(&self.coeff_ring, self.m), |acc, _| acc.mul(self))
    }

    /// `c · self` for a central coefficient `c`.
    pub fn scale(&self, c: &CoeffElem) -> Self {
        self.map_coeffs(|a| a.mul(c))
    }

    fn map_coeffs(&self, f: impl Fn(&CoeffElem) -> CoeffElem) -> Self {
        Self::from_terms(&self.coeff_ring, self.m, self.terms.iter().map(|(w, c)| (w.clone(), f(c))))
    }

    fn map_words(&self, f: impl Fn(&Word) -> Word) -> Self {
        Self::from_terms(&self.coeff_ring, self.m, self.terms.iter().map(|(w, c)| (f(w), c.clone())))
    }

    /// `w · self · w⁻¹`
    pub fn conjugate_by(&self, w: &Word) -> Self {
        self.map_words(|u| w.conjugate(u))
    }

    pub fn left_word(&self, w: &Word) -> Self {
        self.map_words(|u| w.mul(u))
    }

    pub fn right_word(&self, w: &Word) -> Self {
        self.map_words(|u| u.mul(w))
    }

    /// Sum of the coefficients.
    pub fn augmentation(&self) -> CoeffElem {
        self.terms.values().fold(CoeffElem::zero(&self.coeff_ring), |acc, c| acc.add(c))
    }

    /// Coefficient homomorphisms extend word-wise.
    pub fn apply_hom(&self, h: &CoeffHom) -> Result<Self> {
        if !same_ring(h.source(), &self.coeff_ring) {
            return Err(AlgebraError::RingMismatch);
        }
        let terms: Vec<_> = self.terms.iter().map(|(w, c)| (w.clone(), h.apply(c))).collect();
        Ok(Self::from_terms(h.target(), self.m, terms))
    }

    pub fn lift_through(&self, s: &CoeffSection) -> Result<Self> {
        if !same_ring(s.source(), &self.coeff_ring) {
            return Err(AlgebraError::RingMismatch);
        }
        let terms: Vec<_> = self.terms.iter().map(|(w, c)| (w.clone(), s.lift(c))).collect();
        Ok(Self::from_terms(s.target(), self.m, terms))
    }

    /// Trivial unit `c·w` with `c` a recognized coefficient unit: inverse `c⁻¹·w⁻¹`.
    pub fn monomial_inverse(&self) -> Result<Self> {
        if self.terms.len() != 1 {
            return Err(AlgebraError::NotAUnit);
        }
        let (w, c) = self.terms.iter().next().unwrap();
        Ok(Self::term(c.unit_inverse()?, w.inv(), self.m))
    }

    /// Two-sided inverse of `1 + n` with `n` nilpotent: `Σ (-n)^k` until the powers vanish.
    ///
    /// Requires every coefficient of `self - 1` to lie in the augmentation ideal of a local
    /// `F_p[P]` (`P` a finite abelian `p`-group).
    pub fn inverse_unipotent(&self) -> Result<Self> {
        let one = Self::one(&self.coeff_ring, self.m);
        let n = self.sub(&one);
        let p = self.coeff_ring.is_local_p_group_algebra().ok_or(AlgebraError::NotAUnit)?;
        if n.terms.values().any(|c| !c.augmentation().is_zero()) {
            return Err(AlgebraError::NotAUnit);
        }
        let nil_index: usize = self.coeff_ring.degrees().iter().map(|d| d - 1).sum::<usize>() + 1;
        let support = n.terms.len().max(1);
        let bound = ((p as usize - 1) * support).max(nil_index);
        let minus_n = n.neg();
        let mut inv = one.clone();
        let mut power = minus_n.clone();
        let mut steps = 0;
        while !power.is_zero() {
            if steps >= bound {
                return Err(AlgebraError::UnipotentFail(bound));
            }
            inv = inv.add(&power);
            power = power.mul(&minus_n);
            steps += 1;
        }
        if !inv.mul(self).is_one() || !self.mul(&inv).is_one() {
            return Err(AlgebraError::Verification("unipotent inverse".into()));
        }
        Ok(inv)
    }

    /// Inverse for the units this crate recognizes: trivial units `c·w`, and over a local
    /// `F_p[P]` anything of the form `c·w·(1 + n)` with `n` nilpotent.
    pub fn try_inverse(&self) -> Result<Self> {
        if let Ok(inv) = self.monomial_inverse() {
            return Ok(inv);
        }
        if self.coeff_ring.is_local_p_group_algebra().is_none() {
            return Err(AlgebraError::NotAUnit);
        }
        // the image in F_p[F_m] must be a trivial unit c·w
        let mut lead = self.terms.iter().filter(|(_, c)| !c.augmentation().is_zero());
        let (w, c) = match (lead.next(), lead.next()) {
            (Some((w, c)), None) => (w.clone(), c.augmentation()),
            _ => return Err(AlgebraError::NotAUnit),
        };
        let c_inv = CoeffElem::constant(&self.coeff_ring, c).unit_inverse()?;
        let unipotent = self.scale(&c_inv).right_word(&w.inv());
        let inv = GrElem::word(&self.coeff_ring, self.m, w.inv()).mul(&unipotent.inverse_unipotent()?).scale(&c_inv);
        if !inv.mul(self).is_one() || !self.mul(&inv).is_one() {
            return Err(AlgebraError::Verification("inverse".into()));
        }
        Ok(inv)
    }

    /// Basis change of `F_p[x]/(x^p - 1)` coefficients to powers of `y = 1 - x`.
    pub fn y_adic_expand(&self) -> Result<YAdicExpansion> {
        let p = y_adic_prime(&self.coeff_ring)?;
        let fp = CoeffRing::scalars(p);
        let mut layers = vec![GrElem::zero(&fp, self.m); p as usize];
        for (w, c) in &self.terms {
            for (k, layer) in layers.iter_mut().enumerate() {
                // coefficient of y^k in Σ c_j (1 - y)^j
                let mut acc = BigInt::zero();
                for (e, cj) in c.terms() {
                    let j = e[0] as u64;
                    if j as usize >= k {
                        acc += cj * binomial(BigInt::from(j), BigInt::from(k as u64));
                    }
                }
                if k % 2 == 1 {
                    acc = -acc;
                }
                let val = CoeffElem::constant(&fp, acc);
                layer.add_term(w.clone(), val);
            }
        }
        Ok(YAdicExpansion { p, layers })
    }

    pub fn parse(ring: &Arc<CoeffRing>, m: u32, src: &str) -> Result<Self> {
        parse_expr(src)?.eval(&GrCtx { ring, m })
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(w, c)| TermRecord { word: w.display_with(self.m), coeff: c.to_string() })
            .collect()
    }

    pub fn from_records(ring: &Arc<CoeffRing>, m: u32, recs: &[TermRecord]) -> Result<Self> {
        let mut out = Self::zero(ring, m);
        for r in recs {
            out.add_term(Word::parse(&r.word, m)?, CoeffElem::parse(ring, &r.coeff)?);
        }
        Ok(out)
    }

    /// Random element with `support` terms on words of length ≤ `max_len`.
    pub fn random<R: Rng + ?Sized>(
        ring: &Arc<CoeffRing>,
        m: u32,
        rng: &mut R,
        support: usize,
        max_len: usize,
        height: i64,
    ) -> Self {
        let mut out = Self::zero(ring, m);
        for _ in 0..support {
            let w = random_word(rng, m, max_len);
            out.add_term(w, CoeffElem::random(ring, rng, height, 0.7));
        }
        out
    }

    fn term_texts(&self) -> Vec<(bool, String)> {
        self.terms
            .iter()
            .map(|(w, c)| {
                if w.is_identity() {
                    let t = c.to_string();
                    return match t.strip_prefix('-') {
                        Some(rest) if c.num_terms() == 1 => (true, rest.to_string()),
                        _ => (false, t),
                    };
                }
                let wt = w.display_with(self.m);
                match c.printable_single_term() {
                    Some((e, k)) => {
                        let mono = c.render_monomial(&e);
                        let mag = k.abs();
                        let mut parts = Vec::new();
                        if !mag.is_one() {
                            parts.push(mag.to_string());
                        }
                        if !mono.is_empty() {
                            parts.push(mono);
                        }
                        parts.push(wt);
                        (k.is_negative(), parts.join("*"))
                    }
                    None => (false, format!("({c})*{wt}")),
                }
            })
            .collect()
    }
}

pub fn random_word<R: Rng + ?Sized>(rng: &mut R, m: u32, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::from_letters((0..len).map(|_| {
        let g = rng.gen_range(1..=m) as i64;
        if rng.gen_bool(0.5) {
            g
        } else {
            -g
        }
    }))
}

/// The prime `p` when the ring is `F_p[x]/(x^p - 1)`.
pub fn y_adic_prime(ring: &CoeffRing) -> Result<u64> {
    match ring.is_local_p_group_algebra() {
        Some(p) if ring.nvars() == 1 && ring.degrees()[0] == p as usize => Ok(p),
        _ => Err(AlgebraError::InvalidInput(format!("{ring} is not F_p[x]/(x^p - 1)"))),
    }
}

fn join_terms(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, body)) in parts.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

impl fmt::Display for GrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_terms(self.term_texts()))
    }
}

impl fmt::Debug for GrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrElem({self} in {}[F_{}])", self.coeff_ring, self.m)
    }
}

/// Layers `T_0, .., T_{p-1}` over `F_p` with `a = Σ y^k T_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YAdicExpansion {
    pub p: u64,
    pub layers: Vec<GrElem>,
}

impl YAdicExpansion {
    /// `Σ y^k T_k` inside `ring = F_p[x]/(x^p - 1)`.
    pub fn reconstruct(&self, ring: &Arc<CoeffRing>) -> Result<GrElem> {
        if y_adic_prime(ring)? != self.p {
            return Err(AlgebraError::RingMismatch);
        }
        let m = self.layers.first().map(|l| l.m).unwrap_or(2);
        let y = CoeffElem::one(ring).sub(&CoeffElem::var(ring, 0));
        let mut out = GrElem::zero(ring, m);
        for (k, layer) in self.layers.iter().enumerate() {
            let yk = y.pow(k as u64);
            for (w, c) in &layer.terms {
                out.add_term(w.clone(), yk.scale(&c.constant_term()));
            }
        }
        Ok(out)
    }

    /// `T_0 + (y)*(T_1) + (y)^2*(T_2) + ...` with `y` written out as `1 - x` in the ring.
    pub fn to_text(&self, ring: &Arc<CoeffRing>) -> Result<String> {
        y_adic_prime(ring)?;
        let y = CoeffElem::one(ring).sub(&CoeffElem::var(ring, 0));
        let yt = format!("({})", y.to_compact_string());
        let mut parts = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.is_zero() {
                continue;
            }
            if k == 0 {
                parts.extend(layer.term_texts());
                continue;
            }
            let ypow = if k == 1 { yt.clone() } else { format!("{yt}^{k}") };
            parts.push((false, format!("{ypow}*({layer})")));
        }
        Ok(join_terms(parts))
    }
}

struct GrCtx<'a> {
    ring: &'a Arc<CoeffRing>,
    m: u32,
}

impl TextAlgebra for GrCtx<'_> {
    type Value = GrElem;
    fn int(&self, n: &BigInt) -> Result<GrElem> {
        Ok(GrElem::from_coeff(CoeffElem::constant(self.ring, n.clone()), self.m))
    }
    fn ident(&self, name: &str) -> Result<GrElem> {
        if let Some(i) = self.ring.var_index(name) {
            return Ok(GrElem::from_coeff(CoeffElem::var(self.ring, i), self.m));
        }
        gen_index(name, self.m)
            .map(|g| GrElem::word(self.ring, self.m, Word::gen(g)))
            .ok_or_else(|| AlgebraError::Parse { pos: 0, msg: format!("unknown identifier `{name}`") })
    }
    fn add(&self, a: GrElem, b: GrElem) -> Result<GrElem> {
        a.try_add(&b)
    }
    fn mul(&self, a: GrElem, b: GrElem) -> Result<GrElem> {
        a.try_mul(&b)
    }
    fn neg(&self, a: GrElem) -> Result<GrElem> {
        Ok(a.neg())
    }
    fn pow(&self, a: GrElem, e: i64) -> Result<GrElem> {
        if e >= 0 {
            return Ok(a.pow(e as u64));
        }
        Ok(a.try_inverse()?.pow(e.unsigned_abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp_cp(p: usize) -> Arc<CoeffRing> {
        CoeffRing::abelian_group_ring(&["x"], &[p], p as u64).unwrap()
    }

    fn g(r: &Arc<CoeffRing>, s: &str) -> GrElem {
        GrElem::parse(r, 2, s).unwrap()
    }

    #[test]
    fn products() {
        let r3 = fp_cp(3);
        assert_eq!(g(&r3, "(1 + (1-x)*t) * (1 - (1-x)*t)"), g(&r3, "1 - (1-x)^2*t^2"));
        let r2 = fp_cp(2);
        assert!(g(&r2, "(1 + (1-x)*t) * (1 + (1-x)*t)").is_one());
        let a = g(&r3, "x*s + 2*t^-1");
        assert_eq!(a.mul(&GrElem::one(&r3, 2)), a);
    }

    #[test]
    fn unipotent_inverses() {
        let r3 = fp_cp(3);
        let a = g(&r3, "1 + (1-x)*t");
        assert_eq!(a.inverse_unipotent().unwrap(), g(&r3, "1 - (1-x)*t + (1-x)^2*t^2"));
        let r2 = fp_cp(2);
        let b = g(&r2, "1 + (1-x)*t");
        assert_eq!(b.inverse_unipotent().unwrap(), b);
        assert!(GrElem::one(&r2, 2).inverse_unipotent().unwrap().is_one());
        // x is not 1 + nilpotent
        assert!(g(&r2, "x*t").inverse_unipotent().is_err());
    }

    #[test]
    fn general_local_units() {
        let r3 = fp_cp(3);
        let a = g(&r3, "2*x*s*(1 + (1-x)*t)");
        let inv = a.try_inverse().unwrap();
        assert!(a.mul(&inv).is_one());
        assert!(g(&r3, "s + t").try_inverse().is_err());
    }

    #[test]
    fn y_adic_examples() {
        let r2 = fp_cp(2);
        let e = g(&r2, "x").y_adic_expand().unwrap();
        let fp = CoeffRing::scalars(2);
        assert_eq!(e.layers[0], GrElem::one(&fp, 2));
        assert_eq!(e.layers[1], GrElem::one(&fp, 2));
        assert_eq!(e.layers.len(), 2);
    }

    #[test]
    fn augmentation_examples() {
        let r3 = fp_cp(3);
        assert_eq!(g(&r3, "1 + (1-x)*t").augmentation(), CoeffElem::parse(&r3, "2 - x").unwrap());
        assert_eq!(g(&r3, "1-x").augmentation(), CoeffElem::parse(&r3, "1-x").unwrap());
        assert!(g(&r3, "t - s*t*s^-1").augmentation().is_zero());
    }

    #[test]
    fn hom_extends_wordwise() {
        let z2 = CoeffRing::abelian_group_ring(&["x"], &[2], 0).unwrap();
        let f2 = fp_cp(2);
        let psi = CoeffHom::by_name(&z2, &f2).unwrap();
        let a = g(&z2, "(3 + 2*x)*s");
        assert_eq!(a.apply_hom(&psi).unwrap(), g(&f2, "s"));
    }

    #[test]
    fn display_round_trip() {
        let r3 = fp_cp(3);
        for s in ["1 + (1-x)*t", "-t + 2*x*s^-1*t", "x - s", "(1 + x)*s*t*s^-1 - 1", "0"] {
            let a = g(&r3, s);
            assert_eq!(g(&r3, &a.to_string()), a, "{s} printed as {a}");
        }
        let r2 = fp_cp(2);
        assert_eq!(g(&r2, "1 + (1+x)*t").to_string(), "1 + (1 + x)*t");
    }

    #[test]
    fn y_adic_text() {
        let r2 = fp_cp(2);
        let d = g(&r2, "1 + (1+x)*(t + s*t*s^-1)");
        let text = d.y_adic_expand().unwrap().to_text(&r2).unwrap();
        assert_eq!(text, "1 + (1+x)*(t + s*t*s^-1)");
        assert_eq!(g(&r2, &text), d);
    }

    #[test]
    fn records_round_trip() {
        let r3 = fp_cp(3);
        let a = g(&r3, "1 + (1-x)*t - x*s^2");
        let back = GrElem::from_records(&r3, 2, &a.to_records()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn mismatch() {
        let a = GrElem::one(&fp_cp(2), 2);
        let b = GrElem::one(&fp_cp(3), 2);
        assert_eq!(a.try_mul(&b), Err(AlgebraError::RingMismatch));
        let c = GrElem::one(&fp_cp(2), 3);
        assert_eq!(a.try_add(&c), Err(AlgebraError::RingMismatch));
    }
}
