use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly::{is_prime, reduce_mod, UPoly};
use crate::error::{AlgebraError, Result};
use crate::parse::{parse_expr, TextAlgebra};

pub type Exponents = Vec<u32>;

/// `Z[x_1..x_k] / (f_1(x_1), ..., f_k(x_k))`, optionally with coefficients mod `N`.
#[derive(Debug)]
pub struct CoeffRing {
    vars: Vec<String>,
    relations: Vec<UPoly>,
    characteristic: BigInt,
    // reduction tables: powers[v][e] = x_v^e reduced, dense, length deg_v
    powers: Vec<Vec<Vec<BigInt>>>,
}

impl PartialEq for CoeffRing {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars
            && self.relations == other.relations
            && self.characteristic == other.characteristic
    }
}
impl Eq for CoeffRing {}

impl CoeffRing {
    pub fn new(vars: Vec<String>, relations: Vec<UPoly>, characteristic: BigInt) -> Result<Arc<Self>> {
        if vars.len() != relations.len() {
            return Err(AlgebraError::InvalidRing("one relation per variable".into()));
        }
        if characteristic.is_negative() || characteristic.is_one() {
            return Err(AlgebraError::InvalidRing(format!("characteristic {characteristic}")));
        }
        for (i, v) in vars.iter().enumerate() {
            let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok || vars[..i].contains(v) {
                return Err(AlgebraError::InvalidRing(format!("bad variable name `{v}`")));
            }
        }
        for (v, r) in vars.iter().zip(&relations) {
            if !r.is_monic() || r.degree() == Some(0) {
                return Err(AlgebraError::NonMonicRelation(v.clone()));
            }
        }
        let powers = relations
            .iter()
            .map(|r| {
                let d = r.degree().unwrap();
                let mut table = Vec::with_capacity(2 * d + 1);
                for e in 0..=2 * d {
                    let (_, rem) = UPoly::monomial(1, e).div_rem_monic(r).unwrap();
                    let mut dense: Vec<BigInt> = (0..d).map(|i| rem.coeff(i)).collect();
                    for c in &mut dense {
                        *c = reduce_mod(c, &characteristic);
                    }
                    table.push(dense);
                }
                table
            })
            .collect();
        Ok(Arc::new(CoeffRing { vars, relations, characteristic, powers }))
    }

    /// `Z` or `Z/N` with no variables.
    pub fn scalars(characteristic: u64) -> Arc<Self> {
        Self::new(vec![], vec![], characteristic.into()).expect("valid scalar ring")
    }

    pub fn univariate(var: &str, relation: UPoly, characteristic: u64) -> Result<Arc<Self>> {
        Self::new(vec![var.to_string()], vec![relation], characteristic.into())
    }

    /// `Z[x_1..] / (x_1^{n_1} - 1, ...)` (or mod `N`): the group ring of a finite abelian group.
    pub fn abelian_group_ring(vars: &[&str], orders: &[usize], characteristic: u64) -> Result<Arc<Self>> {
        Self::new(
            vars.iter().map(|s| s.to_string()).collect(),
            orders.iter().map(|&n| UPoly::x_pow_minus_one(n)).collect(),
            characteristic.into(),
        )
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn relations(&self) -> &[UPoly] {
        &self.relations
    }

    pub fn characteristic(&self) -> &BigInt {
        &self.characteristic
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.relations.iter().map(|r| r.degree().unwrap()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Prime characteristic with every relation of the form `x^{p^k} - 1`: a local ring whose
    /// maximal ideal `(x_i - 1)` is nilpotent.
    pub fn is_local_p_group_algebra(&self) -> Option<u64> {
        let p: u64 = self.characteristic.clone().try_into().ok()?;
        if !is_prime(p) {
            return None;
        }
        for r in &self.relations {
            let d = r.degree().unwrap();
            if *r != UPoly::x_pow_minus_one(d) {
                return None;
            }
            let mut q = d as u64;
            while q.is_multiple_of(p) {
                q /= p;
            }
            if q != 1 {
                return None;
            }
        }
        Some(p)
    }

    /// All canonical monomial exponent vectors, in printing order.
    pub fn basis(&self) -> Vec<Exponents> {
        let mut out: Vec<Exponents> = vec![vec![]];
        for d in self.degrees() {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..d as u32).map(move |k| {
                        let mut e2 = e.clone();
                        e2.push(k);
                        e2
                    })
                })
                .collect();
        }
        out.sort_by(|a, b| monomial_order(a, b));
        out
    }

    pub fn presentation(&self) -> RingPresentation {
        RingPresentation {
            variables: self.vars.clone(),
            relations: self.vars.iter().zip(&self.relations).map(|(v, r)| r.display_in(v)).collect(),
            characteristic: self.characteristic.to_string().parse().unwrap_or(0),
        }
    }

    pub fn from_presentation(p: &RingPresentation) -> Result<Arc<Self>> {
        let rels = p
            .variables
            .iter()
            .zip(&p.relations)
            .map(|(v, r)| UPoly::parse_in(r, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p.variables.clone(), rels, p.characteristic.into())
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.characteristic.is_zero() {
            "Z".to_string()
        } else {
            format!("Z/{}", self.characteristic)
        };
        if self.vars.is_empty() {
            return f.write_str(&base);
        }
        let rels: Vec<String> =
            self.vars.iter().zip(&self.relations).map(|(v, r)| r.display_in(v)).collect();
        write!(f, "{base}[{}]/({})", self.vars.join(","), rels.join(", "))
    }
}

/// Serialized ring: variable names, one relation per variable, characteristic (0 = integers).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingPresentation {
    pub variables: Vec<String>,
    pub relations: Vec<String>,
    pub characteristic: u64,
}

fn monomial_order(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

/// An element of a [`CoeffRing`] in canonical form.
#[derive(Clone)]
pub struct CoeffElem {
    ring: Arc<CoeffRing>,
    terms: BTreeMap<Exponents, BigInt>,
}

impl PartialEq for CoeffElem {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}
impl Eq for CoeffElem {}

impl Hash for CoeffElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

pub(crate) fn same_ring(a: &Arc<CoeffRing>, b: &Arc<CoeffRing>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl CoeffElem {
    /// Build from raw (possibly unreduced) terms.
    pub fn from_terms<I>(ring: &Arc<CoeffRing>, raw: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, BigInt)>,
    {
        let mut acc: HashMap<Exponents, BigInt> = HashMap::new();
        let degs = ring.degrees();
        for (e, c) in raw {
            assert_eq!(e.len(), ring.nvars(), "exponent vector length");
            if c.is_zero() {
                continue;
            }
            if e.iter().zip(&degs).all(|(&k, &d)| (k as usize) < d) {
                *acc.entry(e).or_default() += c;
                continue;
            }
            // expand every overflowing variable through its power table
            let mut partial: Vec<(Exponents, BigInt)> = vec![(Vec::with_capacity(e.len()), c)];
            for (v, &k) in e.iter().enumerate() {
                let d = degs[v];
                if (k as usize) < d {
                    for (pe, _) in &mut partial {
                        pe.push(k);
                    }
                    continue;
                }
                let row = ring.powers[v]
                    .get(k as usize)
                    .unwrap_or_else(|| panic!("exponent {k} exceeds reduction table"));
                let mut next = Vec::new();
                for (pe, pc) in &partial {
                    for (j, rc) in row.iter().enumerate() {
                        if rc.is_zero() {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne.push(j as u32);
                        next.push((ne, pc * rc));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                *acc.entry(pe).or_default() += pc;
            }
        }
        let n = &ring.characteristic;
        let terms = acc
            .into_iter()
            .filter_map(|(e, c)| {
                let c = reduce_mod(&c, n);
                (!c.is_zero()).then_some((e, c))
            })
            .collect();
        CoeffElem { ring: ring.clone(), terms }
    }

    pub fn zero(ring: &Arc<CoeffRing>) -> Self {
        CoeffElem { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<CoeffRing>) -> Self {
        Self::constant(ring, 1)
    }

    pub fn constant(ring: &Arc<CoeffRing>, c: impl Into<BigInt>) -> Self {
        Self::from_terms(ring, [(vec![0; ring.nvars()], c.into())])
    }

    pub fn var(ring: &Arc<CoeffRing>, index: usize) -> Self {
        let mut e = vec![0; ring.nvars()];
        e[index] = 1;
        Self::from_terms(ring, [(e, BigInt::one())])
    }

    pub fn monomial(ring: &Arc<CoeffRing>, c: impl Into<BigInt>, exps: Exponents) -> Self {
        // raise each variable separately to keep exponents inside the reduction tables
        let mut out = Self::constant(ring, c);
        for (v, &k) in exps.iter().enumerate() {
            if k > 0 {
                out = out.mul(&Self::var(ring, v).pow(k as u64));
            }
        }
        out
    }

    /// Univariate polynomial evaluated at variable `index`.
    pub fn from_poly(ring: &Arc<CoeffRing>, index: usize, p: &UPoly) -> Self {
        let x = Self::var(ring, index);
        let mut acc = Self::zero(ring);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(&x).add(&Self::constant(ring, c.clone()));
        }
        acc
    }

    pub fn ring(&self) -> &Arc<CoeffRing> {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().all(|(e, c)| c.is_one() && e.iter().all(|&k| k == 0))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&vec![0; self.ring.nvars()]).cloned().unwrap_or_default()
    }

    /// Sum of all coefficients (image under every `x_i -> 1`), reduced mod the characteristic.
    pub fn augmentation(&self) -> BigInt {
        let s: BigInt = self.terms.values().sum();
        reduce_mod(&s, &self.ring.characteristic)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let raw = self.terms.iter().chain(&other.terms).map(|(e, c)| (e.clone(), c.clone()));
        Ok(Self::from_terms(&self.ring, raw))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                raw.push((e, ca * cb));
            }
        }
        Ok(Self::from_terms(&self.ring, raw))
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
        Self::from_terms(&self.ring, self.terms.iter().map(|(e, c)| (e.clone(), -c)))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_terms(&self.ring, self.terms.iter().map(|(e, a)| (e.clone(), a * c)))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division of every coefficient by `d`; fails if some coefficient is not divisible.
    /// Only meaningful in characteristic zero.
    pub fn div_exact(&self, d: &BigInt) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(AlgebraError::Division(format!("{c} by {d}")));
            }
            terms.insert(e.clone(), q);
        }
        Ok(Self::from_terms(&self.ring, terms))
    }

    /// Inverse of a unit this crate can recognize, verified by multiplication.
    ///
    /// * prime characteristic `p` with every relation `x^{p^k} - 1` (a local ring): a unit iff
    ///   the augmentation is nonzero mod `p`; inverted by a geometric series in the nilpotent part.
    /// * otherwise only `c * monomial` with `c` a unit of the base ring and every occurring
    ///   variable invertible (relation with constant term `±1`).
    pub fn unit_inverse(&self) -> Result<Self> {
        let inv = if self.ring.is_local_p_group_algebra().is_some() {
            self.local_inverse()?
        } else {
            self.monomial_inverse()?
        };
        if !self.mul(&inv).is_one() {
            return Err(AlgebraError::Verification("unit inverse check".into()));
        }
        Ok(inv)
    }

    fn local_inverse(&self) -> Result<Self> {
        let p = self.ring.characteristic.clone();
        let aug = self.augmentation();
        if aug.is_zero() {
            return Err(AlgebraError::NotAUnit);
        }
        let aug_inv = mod_inverse(&aug, &p).ok_or(AlgebraError::NotAUnit)?;
        // a = aug * (1 - n) with n nilpotent
        let one = Self::one(&self.ring);
        let n = one.sub(&self.scale(&aug_inv));
        let mut inv = one.clone();
        let mut power = n.clone();
        let bound = self.ring.basis().len() + 1;
        for _ in 0..bound {
            if power.is_zero() {
                return Ok(inv.scale(&aug_inv));
            }
            inv = inv.add(&power);
            power = power.mul(&n);
        }
        Err(AlgebraError::UnipotentFail(bound))
    }

    fn monomial_inverse(&self) -> Result<Self> {
        if self.terms.len() != 1 {
            return Err(AlgebraError::NotAUnit);
        }
        let (e, c) = self.terms.iter().next().unwrap();
        let n = &self.ring.characteristic;
        let c_inv = if n.is_zero() {
            if c.is_one() || *c == -BigInt::one() {
                c.clone()
            } else {
                return Err(AlgebraError::NotAUnit);
            }
        } else {
            mod_inverse(c, n).ok_or(AlgebraError::NotAUnit)?
        };
        let mut inv = Self::constant(&self.ring, c_inv);
        for (v, &k) in e.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let rel = &self.ring.relations[v];
            let c0 = rel.coeff(0);
            let sign = if c0.is_one() {
                BigInt::one()
            } else if c0 == -BigInt::one() {
                -BigInt::one()
            } else {
                return Err(AlgebraError::NotAUnit);
            };
            // x * (x^{d-1} + c_{d-1} x^{d-2} + ... + c_1) = -c0
            let tail = UPoly::new(rel.coeffs()[1..].to_vec());
            let x_inv = Self::from_poly(&self.ring, v, &tail).scale(&(-sign));
            inv = inv.mul(&x_inv.pow(k as u64));
        }
        Ok(inv)
    }

    pub fn random<R: Rng + ?Sized>(ring: &Arc<CoeffRing>, rng: &mut R, height: i64, density: f64) -> Self {
        let n = ring.characteristic.clone();
        let mut raw = Vec::new();
        for e in ring.basis() {
            if !rng.gen_bool(density) {
                continue;
            }
            let c = if n.is_zero() {
                BigInt::from(rng.gen_range(-height..=height))
            } else {
                let bound: i64 = n.clone().try_into().unwrap_or(i64::MAX);
                BigInt::from(rng.gen_range(0..bound))
            };
            raw.push((e, c));
        }
        Self::from_terms(ring, raw)
    }

    pub fn parse(ring: &Arc<CoeffRing>, src: &str) -> Result<Self> {
        parse_expr(src)?.eval(&CoeffCtx { ring })
    }

    /// Terms in printing order with balanced coefficients (`(-N/2, N/2]` in characteristic `N`).
    fn printable_terms(&self) -> Vec<(Exponents, BigInt)> {
        let n = &self.ring.characteristic;
        let mut v: Vec<_> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let c = if !n.is_zero() && c * 2 > *n { c - n } else { c.clone() };
                (e.clone(), c)
            })
            .collect();
        v.sort_by(|a, b| monomial_order(&a.0, &b.0));
        v
    }

    fn render(&self, sep_plus: &str, sep_minus: &str) -> String {
        let terms = self.printable_terms();
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { sep_minus } else { sep_plus });
            }
            let mag = c.abs();
            let mono = self.monomial_text(e);
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }

    fn monomial_text(&self, e: &[u32]) -> String {
        let parts: Vec<String> = e
            .iter()
            .zip(&self.ring.vars)
            .filter(|(k, _)| **k > 0)
            .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
            .collect();
        parts.join("*")
    }

    /// Like `Display` but without spaces around `+`/`-`: `1+x`.
    pub fn to_compact_string(&self) -> String {
        self.render("+", "-")
    }

    /// Text suitable as a factor in a product: parenthesized unless a single
    /// unsigned monomial.
    pub fn factor_text(&self) -> String {
        let t = self.to_string();
        let terms = self.printable_terms();
        if terms.len() == 1 && !terms[0].1.is_negative() {
            t
        } else {
            format!("({t})")
        }
    }

    /// Single-term element with positive printed coefficient (so it needs no parentheses).
    pub(crate) fn printable_single_term(&self) -> Option<(Exponents, BigInt)> {
        let t = self.printable_terms();
        (t.len() == 1).then(|| t[0].clone())
    }

    pub(crate) fn render_monomial(&self, e: &[u32]) -> String {
        self.monomial_text(e)
    }
}

impl fmt::Display for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(" + ", " - "))
    }
}

impl fmt::Debug for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoeffElem({self} in {})", self.ring)
    }
}

pub fn mod_inverse(a: &BigInt, n: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(n);
    if !g.gcd.is_one() && g.gcd != -BigInt::one() {
        return None;
    }
    let x = if g.gcd.is_one() { g.x } else { -g.x };
    Some(x.mod_floor(n))
}

pub(crate) struct CoeffCtx<'a> {
    pub ring: &'a Arc<CoeffRing>,
}

impl TextAlgebra for CoeffCtx<'_> {
    type Value = CoeffElem;
    fn int(&self, n: &BigInt) -> Result<CoeffElem> {
        Ok(CoeffElem::constant(self.ring, n.clone()))
    }
    fn ident(&self, name: &str) -> Result<CoeffElem> {
        self.ring
            .var_index(name)
            .map(|i| CoeffElem::var(self.ring, i))
            .ok_or_else(|| AlgebraError::Parse { pos: 0, msg: format!("unknown variable `{name}`") })
    }
    fn add(&self, a: CoeffElem, b: CoeffElem) -> Result<CoeffElem> {
        a.try_add(&b)
    }
    fn mul(&self, a: CoeffElem, b: CoeffElem) -> Result<CoeffElem> {
        a.try_mul(&b)
    }
    fn neg(&self, a: CoeffElem) -> Result<CoeffElem> {
        Ok(a.neg())
    }
    fn pow(&self, a: CoeffElem, e: i64) -> Result<CoeffElem> {
        if e >= 0 {
            Ok(a.pow(e as u64))
        } else {
            Ok(a.unit_inverse()?.pow(e.unsigned_abs()))
        }
    }
}
