//! Dense univariate integer polynomials: relations, cyclotomic polynomials
//! and the norm identities used to reconstruct fibre-product elements.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{AlgebraError, Result};
use crate::parse::{parse_expr, TextAlgebra};

/// Integer polynomial, coefficients stored lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UPoly {
    coeffs: Vec<BigInt>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        UPoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// `c * x^e`
    pub fn monomial(c: impl Into<BigInt>, e: usize) -> Self {
        let mut v = vec![BigInt::zero(); e + 1];
        v[e] = c.into();
        Self::new(v)
    }

    /// `x^n - 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        Self::monomial(1, n).sub(&Self::constant(1))
    }

    /// `1 + x^a + x^{2a} + ... + x^{(count-1)a}`
    pub fn geometric(a: usize, count: usize) -> Self {
        let mut v = vec![BigInt::zero(); a * count.saturating_sub(1) + 1];
        for i in 0..count {
            v[i * a] = BigInt::one();
        }
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::new(v)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Division with remainder by a monic polynomial.
    pub fn div_rem_monic(&self, divisor: &Self) -> Result<(Self, Self)> {
        if !divisor.is_monic() {
            return Err(AlgebraError::Division("non-monic divisor".into()));
        }
        let d = divisor.degree().expect("monic implies nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = std::mem::take(&mut rem[k]);
            if c.is_zero() {
                continue;
            }
            for i in 0..d {
                rem[k - d + i] -= &c * &divisor.coeffs[i];
            }
            quot[k - d] = c;
        }
        rem.truncate(d);
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        let x = BigInt::from(x);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
    }

    pub fn display_in(&self, var: &str) -> String {
        let mut out = String::new();
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn parse_in(src: &str, var: &str) -> Result<Self> {
        parse_expr(src)?.eval(&PolyCtx { var })
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("x"))
    }
}

struct PolyCtx<'a> {
    var: &'a str,
}

impl TextAlgebra for PolyCtx<'_> {
    type Value = UPoly;
    fn int(&self, n: &BigInt) -> Result<UPoly> {
        Ok(UPoly::constant(n.clone()))
    }
    fn ident(&self, name: &str) -> Result<UPoly> {
        if name == self.var {
            Ok(UPoly::monomial(1, 1))
        } else {
            Err(AlgebraError::Parse { pos: 0, msg: format!("unknown variable `{name}`") })
        }
    }
    fn add(&self, a: UPoly, b: UPoly) -> Result<UPoly> {
        Ok(a.add(&b))
    }
    fn mul(&self, a: UPoly, b: UPoly) -> Result<UPoly> {
        Ok(a.mul(&b))
    }
    fn neg(&self, a: UPoly) -> Result<UPoly> {
        Ok(a.neg())
    }
    fn pow(&self, a: UPoly, e: i64) -> Result<UPoly> {
        if e < 0 {
            return Err(AlgebraError::Parse { pos: 0, msg: "negative power of a polynomial".into() });
        }
        Ok((0..e).fold(UPoly::constant(1), |acc, _| acc.mul(&a)))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The `d`-th cyclotomic polynomial, by dividing `x^d - 1` by `Φ_e` for every proper divisor `e`.
pub fn cyclotomic(d: usize) -> UPoly {
    assert!(d >= 1, "cyclotomic index must be positive");
    let mut p = UPoly::x_pow_minus_one(d);
    for e in 1..d {
        if d.is_multiple_of(e) {
            let (q, r) = p.div_rem_monic(&cyclotomic(e)).expect("cyclotomic polynomials are monic");
            debug_assert!(r.is_zero());
            p = q;
        }
    }
    p
}

/// Returns `q` with `(1 + z + ... + z^{count-1}) - q(z)(z - 1) = count` where `z = x^step`.
///
/// `q = Σ_{i=0}^{count-2} (count-1-i) z^i`. The identity is checked before returning.
pub fn norm_identity(step: usize, count: usize) -> Result<UPoly> {
    let mut v = vec![BigInt::zero(); step * count.saturating_sub(2) + 1];
    for i in 0..count.saturating_sub(1) {
        v[i * step] = BigInt::from(count - 1 - i);
    }
    let q = UPoly::new(v);
    let sigma = UPoly::geometric(step, count);
    let lhs = sigma.sub(&q.mul(&UPoly::x_pow_minus_one(step)));
    if lhs != UPoly::constant(count as u64) {
        return Err(AlgebraError::Verification(format!(
            "norm identity failed for step {step}, count {count}: got {lhs}"
        )));
    }
    Ok(q)
}

/// `q` with `Φ_{p²}(x) - q(x)(x^p - 1) = p`.
pub fn cyclotomic_identity(p: u64) -> Result<UPoly> {
    if !is_prime(p) {
        return Err(AlgebraError::InvalidInput(format!("{p} is not prime")));
    }
    let p = p as usize;
    let q = norm_identity(p, p)?;
    let phi = cyclotomic(p * p);
    let check = phi.sub(&q.mul(&UPoly::x_pow_minus_one(p)));
    if check != UPoly::constant(p as u64) {
        return Err(AlgebraError::Verification(format!("Φ_{{{}}} identity: got {check}", p * p)));
    }
    Ok(q)
}

/// Reduce an integer into `[0, n)`; identity when `n == 0`.
pub fn reduce_mod(c: &BigInt, n: &BigInt) -> BigInt {
    if n.is_zero() {
        c.clone()
    } else {
        c.mod_floor(n)
    }
}
