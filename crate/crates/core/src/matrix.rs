//! Square matrices over the rings of this crate, elementary/diagonal factorizations and their
//! certificates.

use std::fmt;

use crate::coeff::CoeffElem;
use crate::error::{AlgebraError, Result};
use crate::group_ring::GrElem;

/// Ring operations the matrix layer needs. Rings may be noncommutative.
pub trait RingElem: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn r_add(&self, other: &Self) -> Self;
    fn r_mul(&self, other: &Self) -> Self;
    fn r_neg(&self) -> Self;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn r_is_zero(&self) -> bool;
    /// Two-sided inverse, if this element is a unit the ring recognizes.
    fn r_inverse(&self) -> Result<Self>;
    fn same_ring(&self, other: &Self) -> bool;

    fn r_sub(&self, other: &Self) -> Self {
        self.r_add(&other.r_neg())
    }
    fn r_is_one(&self) -> bool {
        *self == self.one_like()
    }
}

impl RingElem for CoeffElem {
    fn r_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn r_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn r_neg(&self) -> Self {
        self.neg()
    }
    fn zero_like(&self) -> Self {
        CoeffElem::zero(self.ring())
    }
    fn one_like(&self) -> Self {
        CoeffElem::one(self.ring())
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_inverse(&self) -> Result<Self> {
        self.unit_inverse()
    }
    fn same_ring(&self, other: &Self) -> bool {
        crate::coeff::same_ring(self.ring(), other.ring())
    }
}

impl RingElem for GrElem {
    fn r_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn r_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn r_neg(&self) -> Self {
        self.neg()
    }
    fn zero_like(&self) -> Self {
        GrElem::zero(self.coeff_ring(), self.rank())
    }
    fn one_like(&self) -> Self {
        GrElem::one(self.coeff_ring(), self.rank())
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_inverse(&self) -> Result<Self> {
        self.try_inverse()
    }
    fn same_ring(&self, other: &Self) -> bool {
        self.same_ring_as(other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix<E> {
    n: usize,
    entries: Vec<E>,
}

impl<E: RingElem> RMatrix<E> {
    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::Shape("matrix must be square and nonempty".into()));
        }
        let entries: Vec<E> = rows.into_iter().flatten().collect();
        if entries.iter().any(|e| !e.same_ring(&entries[0])) {
            return Err(AlgebraError::RingMismatch);
        }
        Ok(RMatrix { n, entries })
    }

    pub fn identity(n: usize, template: &E) -> Self {
        let mut m = Self::zero(n, template);
        for i in 0..n {
            m.entries[i * n + i] = template.one_like();
        }
        m
    }

    pub fn zero(n: usize, template: &E) -> Self {
        RMatrix { n, entries: vec![template.zero_like(); n * n] }
    }

    pub fn diagonal(entries: &[E]) -> Self {
        let n = entries.len();
        let mut m = Self::zero(n, &entries[0]);
        for (i, d) in entries.iter().enumerate() {
            m.entries[i * n + i] = d.clone();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<E>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(AlgebraError::Shape(format!("{}x{} times {}x{}", self.n, self.n, other.n, other.n)));
        }
        if !self.entries[0].same_ring(&other.entries[0]) {
            return Err(AlgebraError::RingMismatch);
        }
        let n = self.n;
        let mut out = Self::zero(n, &self.entries[0]);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.r_is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.r_is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).r_add(&a.r_mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("matrix product")
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let e = self.get(i, j);
                if i == j {
                    e.r_is_one()
                } else {
                    e.r_is_zero()
                }
            })
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).r_is_zero()))
    }

    pub fn map<F: RingElem>(&self, f: impl Fn(&E) -> F) -> RMatrix<F> {
        RMatrix { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map<F: RingElem>(&self, f: impl Fn(&E) -> Result<F>) -> Result<RMatrix<F>> {
        Ok(RMatrix { n: self.n, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    fn template(&self) -> &E {
        &self.entries[0]
    }
}

/// `E(i, j; a) = I + a·ε(i, j)` (0-based indices) or an invertible diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ElemFactor<E> {
    Elementary { i: usize, j: usize, a: E },
    Diagonal { entries: Vec<E>, inverses: Vec<E> },
}

impl<E: RingElem> ElemFactor<E> {
    pub fn elementary(i: usize, j: usize, a: E) -> Result<Self> {
        if i == j {
            return Err(AlgebraError::InvalidInput("elementary factor needs i != j".into()));
        }
        Ok(ElemFactor::Elementary { i, j, a })
    }

    /// Checks `d_k · inv_k = inv_k · d_k = 1` for every entry.
    pub fn diagonal(entries: Vec<E>, inverses: Vec<E>) -> Result<Self> {
        if entries.is_empty() || entries.len() != inverses.len() {
            return Err(AlgebraError::Shape("diagonal factor".into()));
        }
        for (d, inv) in entries.iter().zip(&inverses) {
            if !d.r_mul(inv).r_is_one() || !inv.r_mul(d).r_is_one() {
                return Err(AlgebraError::BadInverse);
            }
        }
        Ok(ElemFactor::Diagonal { entries, inverses })
    }

    pub fn is_elementary(&self) -> bool {
        matches!(self, ElemFactor::Elementary { .. })
    }

    pub fn inverse(&self) -> Self {
        match self {
            ElemFactor::Elementary { i, j, a } => ElemFactor::Elementary { i: *i, j: *j, a: a.r_neg() },
            ElemFactor::Diagonal { entries, inverses } => {
                ElemFactor::Diagonal { entries: inverses.clone(), inverses: entries.clone() }
            }
        }
    }

    pub fn to_matrix(&self, n: usize, template: &E) -> Result<RMatrix<E>> {
        match self {
            ElemFactor::Elementary { i, j, a } => {
                if *i >= n || *j >= n {
                    return Err(AlgebraError::Shape(format!("E({},{}) in size {n}", i + 1, j + 1)));
                }
                let mut m = RMatrix::identity(n, template);
                m.set(*i, *j, a.clone());
                Ok(m)
            }
            ElemFactor::Diagonal { entries, .. } => {
                if entries.len() != n {
                    return Err(AlgebraError::Shape("diagonal length".into()));
                }
                Ok(RMatrix::diagonal(entries))
            }
        }
    }

    pub fn map<F: RingElem>(&self, f: impl Fn(&E) -> F) -> ElemFactor<F> {
        match self {
            ElemFactor::Elementary { i, j, a } => ElemFactor::Elementary { i: *i, j: *j, a: f(a) },
            ElemFactor::Diagonal { entries, inverses } => ElemFactor::Diagonal {
                entries: entries.iter().map(&f).collect(),
                inverses: inverses.iter().map(&f).collect(),
            },
        }
    }
}

/// An ordered product of factors together with the matrix it is claimed to equal.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList<E> {
    pub n: usize,
    pub factors: Vec<ElemFactor<E>>,
    pub claimed: RMatrix<E>,
}

impl<E: RingElem> FactorList<E> {
    /// Builds the list with its product as the claim.
    pub fn from_factors(n: usize, factors: Vec<ElemFactor<E>>, template: &E) -> Result<Self> {
        let claimed = product(n, &factors, template)?;
        Ok(FactorList { n, factors, claimed })
    }

    pub fn product(&self) -> Result<RMatrix<E>> {
        product(self.n, &self.factors, self.claimed.template())
    }

    /// Re-multiplies the factors and compares with the claimed product exactly.
    pub fn verify(&self) -> Result<()> {
        if self.product()? == self.claimed {
            Ok(())
        } else {
            Err(AlgebraError::Verification("factor product differs from claimed matrix".into()))
        }
    }

    pub fn all_elementary(&self) -> bool {
        self.factors.iter().all(ElemFactor::is_elementary)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

fn product<E: RingElem>(n: usize, factors: &[ElemFactor<E>], template: &E) -> Result<RMatrix<E>> {
    let mut acc = RMatrix::identity(n, template);
    for f in factors {
        acc = acc.try_mul(&f.to_matrix(n, template)?)?;
    }
    Ok(acc)
}

fn check_inverse<E: RingElem>(u: &E, u_inv: &E) -> Result<()> {
    if u.r_mul(u_inv).r_is_one() && u_inv.r_mul(u).r_is_one() {
        Ok(())
    } else {
        Err(AlgebraError::BadInverse)
    }
}

/// The six elementary factors of `diag(u, u⁻¹)`:
/// `E₁₂(u) E₂₁(-u⁻¹) E₁₂(u) · E₁₂(-1) E₂₁(1) E₁₂(-1)`.
pub fn whitehead_diag<E: RingElem>(u: &E, u_inv: &E) -> Result<FactorList<E>> {
    check_inverse(u, u_inv)?;
    let one = u.one_like();
    let factors = vec![
        ElemFactor::Elementary { i: 0, j: 1, a: u.clone() },
        ElemFactor::Elementary { i: 1, j: 0, a: u_inv.r_neg() },
        ElemFactor::Elementary { i: 0, j: 1, a: u.clone() },
        ElemFactor::Elementary { i: 0, j: 1, a: one.r_neg() },
        ElemFactor::Elementary { i: 1, j: 0, a: one.clone() },
        ElemFactor::Elementary { i: 0, j: 1, a: one.r_neg() },
    ];
    let fl = FactorList { n: 2, factors, claimed: RMatrix::diagonal(&[u.clone(), u_inv.clone()]) };
    fl.verify()?;
    Ok(fl)
}

/// `diag(αβα⁻¹β⁻¹, 1) = diag(α, α⁻¹) · diag(β, β⁻¹) · diag((βα)⁻¹, βα)`, each expanded by
/// [`whitehead_diag`]: 18 elementary factors.
pub fn commutator_diag<E: RingElem>(alpha: &E, alpha_inv: &E, beta: &E, beta_inv: &E) -> Result<FactorList<E>> {
    check_inverse(alpha, alpha_inv)?;
    check_inverse(beta, beta_inv)?;
    let ba = beta.r_mul(alpha);
    let ba_inv = alpha_inv.r_mul(beta_inv);
    let mut factors = Vec::with_capacity(18);
    for (u, ui) in [(alpha, alpha_inv), (beta, beta_inv), (&ba_inv, &ba)] {
        factors.extend(whitehead_diag(u, ui)?.factors);
    }
    let comm = alpha.r_mul(beta).r_mul(alpha_inv).r_mul(beta_inv);
    let fl = FactorList { n: 2, factors, claimed: RMatrix::diagonal(&[comm, alpha.one_like()]) };
    fl.verify()?;
    Ok(fl)
}

/// Replaces each `E(i, j; a)` by `E(i, j; lift(a))`. The claim becomes the product of the lifts.
pub fn lift_factors<E: RingElem, F: RingElem>(
    fl: &FactorList<E>,
    lift: impl Fn(&E) -> F,
    template: &F,
) -> Result<FactorList<F>> {
    if !fl.all_elementary() {
        return Err(AlgebraError::InvalidInput("only elementary factors can be lifted".into()));
    }
    let factors: Vec<ElemFactor<F>> = fl.factors.iter().map(|f| f.map(&lift)).collect();
    FactorList::from_factors(fl.n, factors, template)
}

/// Moves every diagonal factor to the front: returns `(d, d⁻¹, elementaries)` with
/// `Π factors = diag(d) · Π elementaries`, using `E(i,j;a)·D = D·E(i,j; d_i⁻¹ a d_j)`.
pub fn normalize_diagonal_left<E: RingElem>(
    n: usize,
    factors: &[ElemFactor<E>],
    template: &E,
) -> (Vec<E>, Vec<E>, Vec<ElemFactor<E>>) {
    let mut d = vec![template.one_like(); n];
    let mut d_inv = d.clone();
    let mut tail: Vec<ElemFactor<E>> = Vec::new();
    for f in factors.iter().rev() {
        match f {
            ElemFactor::Elementary { i, j, a } => {
                let a2 = d_inv[*i].r_mul(a).r_mul(&d[*j]);
                tail.push(ElemFactor::Elementary { i: *i, j: *j, a: a2 });
            }
            ElemFactor::Diagonal { entries, inverses } => {
                for k in 0..n {
                    d[k] = entries[k].r_mul(&d[k]);
                    d_inv[k] = d_inv[k].r_mul(&inverses[k]);
                }
            }
        }
    }
    tail.reverse();
    (d, d_inv, tail)
}

fn diag_left_list<E: RingElem>(n: usize, factors: &[ElemFactor<E>], claimed: RMatrix<E>) -> Result<FactorList<E>> {
    let template = claimed.template().clone();
    let (d, d_inv, elems) = normalize_diagonal_left(n, factors, &template);
    let mut out = vec![ElemFactor::diagonal(d, d_inv)?];
    out.extend(elems);
    let fl = FactorList { n, factors: out, claimed };
    fl.verify()?;
    Ok(fl)
}

/// Gaussian diagonalization over a field (every nonzero element invertible): returns
/// `D · Π E = m` with `D` first. Fails when `m` is singular.
pub fn gaussian_diagonalize<F: RingElem>(m: &RMatrix<F>) -> Result<FactorList<F>> {
    let n = m.size();
    let mut x = m.clone();
    let mut left: Vec<ElemFactor<F>> = Vec::new();
    let mut right: Vec<ElemFactor<F>> = Vec::new();
    for c in 0..n {
        if x.get(c, c).r_is_zero() {
            let r = (c + 1..n)
                .find(|&r| !x.get(r, c).r_is_zero())
                .ok_or_else(|| AlgebraError::Verification("singular matrix over the quotient field".into()))?;
            let e = ElemFactor::Elementary { i: c, j: r, a: x.template().one_like() };
            x = e.to_matrix(n, x.template())?.mul(&x);
            left.push(e);
        }
        let piv_inv = x.get(c, c).r_inverse()?;
        clear_pivot(&mut x, c, &piv_inv, 0..n, &mut left, &mut right)?;
    }
    if !x.is_diagonal() {
        return Err(AlgebraError::Verification("elimination left off-diagonal entries".into()));
    }
    rebuild(m, x, left, right, vec![])
}

/// Clears row and column `c` of `x` using the pivot at `(c, c)`, touching only indices in `range`.
fn clear_pivot<E: RingElem>(
    x: &mut RMatrix<E>,
    c: usize,
    piv_inv: &E,
    range: std::ops::Range<usize>,
    left: &mut Vec<ElemFactor<E>>,
    right: &mut Vec<ElemFactor<E>>,
) -> Result<()> {
    let n = x.size();
    for r in range.clone() {
        if r == c || x.get(r, c).r_is_zero() {
            continue;
        }
        let e = ElemFactor::Elementary { i: r, j: c, a: x.get(r, c).r_mul(piv_inv).r_neg() };
        *x = e.to_matrix(n, x.template())?.mul(x);
        left.push(e);
    }
    for k in range {
        if k == c || x.get(c, k).r_is_zero() {
            continue;
        }
        let e = ElemFactor::Elementary { i: c, j: k, a: piv_inv.r_mul(x.get(c, k)).r_neg() };
        *x = x.mul(&e.to_matrix(n, x.template())?);
        right.push(e);
    }
    Ok(())
}

/// From `L_t⋯L_1 · a · R_1⋯R_s = diag` (and an extra right tail `a · tail = x`-style correction
/// already folded into `suffix`) rebuild `a = L_1⁻¹⋯L_t⁻¹ · diag · R_s⁻¹⋯R_1⁻¹ · suffix`.
fn rebuild<E: RingElem>(
    a: &RMatrix<E>,
    diag: RMatrix<E>,
    left: Vec<ElemFactor<E>>,
    right: Vec<ElemFactor<E>>,
    suffix: Vec<ElemFactor<E>>,
) -> Result<FactorList<E>> {
    let n = a.size();
    let d: Vec<E> = (0..n).map(|i| diag.get(i, i).clone()).collect();
    let d_inv = d.iter().map(|e| e.r_inverse()).collect::<Result<Vec<_>>>()?;
    let mut seq: Vec<ElemFactor<E>> = left.iter().map(ElemFactor::inverse).collect();
    seq.push(ElemFactor::diagonal(d, d_inv)?);
    seq.extend(right.iter().rev().map(ElemFactor::inverse));
    seq.extend(suffix);
    diag_left_list(n, &seq, a.clone())
}

/// How the caller certifies that the input to [`diagonal_reduce_nilpotent`] is invertible.
#[derive(Debug, Clone)]
pub enum InvertibilityWitness<E> {
    Inverse(RMatrix<E>),
    Factors(FactorList<E>),
}

/// A nilpotent two-sided ideal `I` of `Λ`, given by the quotient map `Λ → Λ/I` and a section.
pub struct NilpotentQuotient<'a, E, Q> {
    pub reduce: &'a dyn Fn(&E) -> Q,
    pub lift: &'a dyn Fn(&Q) -> E,
}

/// Re-factors an invertible `a` over `Λ` as `D̂ · Π Ê`, given a diagonalizer for `Λ/I`.
///
/// Write `ψ(a) = D E`, lift `D⁻¹` and `E⁻¹` to `D̂`, `Ê`, so `X = a Ê D̂ ≡ I (mod I)`. Each diagonal
/// entry of `X` is then `1 + nilpotent`, hence a unit, and row/column operations clear the
/// off-diagonal part pivot by pivot from the last index down.
pub fn diagonal_reduce_nilpotent<E: RingElem, Q: RingElem>(
    a: &RMatrix<E>,
    witness: &InvertibilityWitness<E>,
    ideal: &NilpotentQuotient<'_, E, Q>,
    quotient_diagonalizer: impl Fn(&RMatrix<Q>) -> Result<FactorList<Q>>,
) -> Result<FactorList<E>> {
    let n = a.size();
    match witness {
        InvertibilityWitness::Inverse(b) => {
            if !a.try_mul(b)?.is_identity() || !b.try_mul(a)?.is_identity() {
                return Err(AlgebraError::BadInverse);
            }
        }
        InvertibilityWitness::Factors(fl) => {
            if fl.product()? != *a {
                return Err(AlgebraError::Verification("provenance factors do not multiply to the input".into()));
            }
        }
    }
    let qa = a.map(|e| (ideal.reduce)(e));
    let qfl = quotient_diagonalizer(&qa)?;
    qfl.verify()?;
    if qfl.claimed != qa {
        return Err(AlgebraError::Verification("quotient diagonalizer answered for another matrix".into()));
    }
    let qtemplate = qa.get(0, 0).clone();
    let (_, qd_inv, qelems) = normalize_diagonal_left(n, &qfl.factors, &qtemplate);

    // Ê lifts E⁻¹ = E_k⁻¹ ⋯ E_1⁻¹, D̂ lifts D⁻¹
    let e_hat: Vec<ElemFactor<E>> = qelems.iter().rev().map(|f| f.inverse().map(|q| (ideal.lift)(q))).collect();
    let dhat: Vec<E> = qd_inv.iter().map(|q| (ideal.lift)(q)).collect();
    let dhat_inv = dhat.iter().map(|e| e.r_inverse()).collect::<Result<Vec<_>>>()?;
    let template = a.get(0, 0).clone();
    let mut x = a.clone();
    for f in &e_hat {
        x = x.try_mul(&f.to_matrix(n, &template)?)?;
    }
    x = x.try_mul(&RMatrix::diagonal(&dhat))?;

    let mut left = Vec::new();
    let mut right = Vec::new();
    for c in (0..n).rev() {
        let piv_inv = x
            .get(c, c)
            .r_inverse()
            .map_err(|_| AlgebraError::Verification(format!("pivot {} is not a unit", c + 1)))?;
        clear_pivot(&mut x, c, &piv_inv, 0..c + 1, &mut left, &mut right)?;
    }
    if !x.is_diagonal() {
        return Err(AlgebraError::Verification("reduction left off-diagonal entries".into()));
    }
    // a = X · D̂⁻¹ · Ê⁻¹
    let mut suffix = vec![ElemFactor::diagonal(dhat_inv, dhat)?];
    suffix.extend(e_hat.iter().rev().map(ElemFactor::inverse));
    rebuild(a, x, left, right, suffix)
}
