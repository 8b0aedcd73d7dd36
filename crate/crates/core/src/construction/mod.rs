//! The concrete pipeline: the squares, the family `δ_n = (1+yt)·sⁿ·(1+yt)⁻¹·s⁻ⁿ` over
//! `F_p[C_p × F_m]`, the distinctness decision, trivialization certificates and unit searches.
//!
//! Throughout, `s = g1`, `t = g2`, `y = 1 - x` in `F_p[x]/(x^p - 1)`.

mod certificate;
mod distinct;
mod units;

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

pub use certificate::{trivialize, verify_certificate, Certificate, CertificateCheck, FactorRecord};
pub use distinct::{
    brute_force_check, certify_distinct, family, reduced_words, BruteForceHit, BruteForceReport, DistinctnessVerdict,
    FamilyReport, TraceEntry, Verdict, Witness,
};
pub use units::{unit_search, UnitSearchReport};

use crate::coeff::{is_prime, norm_identity, CoeffElem, CoeffHom, CoeffRing, UPoly};
use crate::error::{AlgebraError, Result};
use crate::group_ring::GrElem;
use crate::milnor::{MilnorSquare, PullbackData};
use crate::word::Word;

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(AlgebraError::InvalidInput(format!("{p} is not prime")))
    }
}

fn check_rank(m: u32) -> Result<()> {
    if m < 2 {
        return Err(AlgebraError::InvalidInput(format!("need m >= 2 free generators, got {m}")));
    }
    Ok(())
}

fn group_vars(k: usize) -> Vec<String> {
    match k {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        _ => (1..=k).map(|i| format!("x{i}")).collect(),
    }
}

/// `Z[G × F_m]`, `Z[G]/(Σ_H)[F_m]`, `Z[G/H × F_m]`, `(Z/N)[G/H × F_m]` for `G = Π C_{n_i}` and
/// `H` generated by the exponent vectors in `h_gens`, `N = |H|`.
///
/// Only subgroups inside a single cyclic factor are supported: then `H = ⟨x_i^a⟩` with
/// `a = gcd(n_i, e_i)`, `Σ_H = 1 + x_i^a + ... + x_i^{a(N-1)}`, and `G/H` keeps the variable
/// name `x_i` with relation `x_i^a = 1` (dropped when `a = 1`).
pub fn build_sigma_square(orders: &[usize], h_gens: &[Vec<i64>], m: u32) -> Result<MilnorSquare> {
    if orders.is_empty() || orders.contains(&0) {
        return Err(AlgebraError::InvalidInput("G needs positive invariant factors".into()));
    }
    let k = orders.len();
    if h_gens.iter().any(|g| g.len() != k) {
        return Err(AlgebraError::InvalidInput(format!("subgroup generators must have {k} exponents")));
    }
    let mut factor: Option<usize> = None;
    let mut a = 0usize;
    for g in h_gens {
        for (i, (&e, &n)) in g.iter().zip(orders).enumerate() {
            let e = e.rem_euclid(n as i64) as usize;
            if e == 0 {
                continue;
            }
            if factor.is_some_and(|f| f != i) {
                return Err(AlgebraError::Unsupported("H must lie in a single cyclic factor of G".into()));
            }
            factor = Some(i);
            a = a.gcd(&e);
        }
    }
    let i = factor.ok_or_else(|| AlgebraError::InvalidInput("H is trivial".into()))?;
    let ni = orders[i];
    a = a.gcd(&ni);
    let big_n = ni / a;
    let vars = group_vars(k);

    let a_ring = CoeffRing::new(vars.clone(), orders.iter().map(|&n| UPoly::x_pow_minus_one(n)).collect(), 0.into())?;
    let sigma_poly = UPoly::geometric(a, big_n);
    let minus_rels = orders
        .iter()
        .enumerate()
        .map(|(j, &n)| if j == i { sigma_poly.clone() } else { UPoly::x_pow_minus_one(n) })
        .collect();
    let a_minus = CoeffRing::new(vars.clone(), minus_rels, 0.into())?;
    let (q_vars, q_rels): (Vec<String>, Vec<UPoly>) = vars
        .iter()
        .zip(orders)
        .enumerate()
        .filter(|&(j, _)| j != i || a > 1)
        .map(|(j, (v, &n))| (v.clone(), UPoly::x_pow_minus_one(if j == i { a } else { n })))
        .unzip();
    let a_plus = CoeffRing::new(q_vars.clone(), q_rels.clone(), 0.into())?;
    let a0 = CoeffRing::new(q_vars, q_rels, BigInt::from(big_n))?;
    let homs = [
        CoeffHom::by_name(&a_ring, &a_plus)?,
        CoeffHom::by_name(&a_ring, &a_minus)?,
        CoeffHom::by_name(&a_plus, &a0)?,
        CoeffHom::by_name(&a_minus, &a0)?,
    ];
    let data = PullbackData {
        sigma: CoeffElem::from_poly(&a_ring, i, &sigma_poly),
        kappa: CoeffElem::from_poly(&a_ring, i, &UPoly::x_pow_minus_one(a)),
        q: CoeffElem::from_poly(&a_ring, i, &norm_identity(a, big_n)?),
        n: BigInt::from(big_n),
    };
    let g_name: Vec<String> = orders.iter().map(|n| format!("C{n}")).collect();
    let name = format!("sigma({};C{big_n})", g_name.join("x"));
    MilnorSquare::from_parts(&name, m, [a_ring, a_plus, a_minus, a0], homs, data)
}

/// `Z[C_{p²} × F_m]` over `Z[ζ_{p²}][F_m]` and `Z[C_p × F_m]`, meeting in `F_p[C_p × F_m]`.
pub fn build_square_a(p: u64, m: u32) -> Result<MilnorSquare> {
    check_prime(p)?;
    let p = p as usize;
    let mut sq = build_sigma_square(&[p * p], &[vec![p as i64]], m)?;
    sq.name = format!("A(p={p})");
    Ok(sq)
}

/// `Z[C_p × C_p × F_m]` with `x ↦ 1` on the `A₊` side: corners `Z[x,y]/(Σ_x, y^p - 1)`,
/// `Z[y]/(y^p - 1)` and `F_p[y]/(y^p - 1)`.
pub fn build_square_b(p: u64, m: u32) -> Result<MilnorSquare> {
    check_prime(p)?;
    let p = p as usize;
    let mut sq = build_sigma_square(&[p, p], &[vec![1, 0]], m)?;
    sq.name = format!("B(p={p})");
    Ok(sq)
}

/// Parameters of `δ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaSpec {
    pub p: u64,
    pub m: u32,
    pub n: u64,
}

impl DeltaSpec {
    pub fn new(p: u64, m: u32, n: u64) -> Result<Self> {
        check_prime(p)?;
        check_rank(m)?;
        if n == 0 {
            return Err(AlgebraError::InvalidInput("delta index n must be at least 1".into()));
        }
        Ok(DeltaSpec { p, m, n })
    }

    /// `F_p[x]/(x^p - 1)`.
    pub fn coeff_ring(&self) -> Arc<CoeffRing> {
        CoeffRing::abelian_group_ring(&["x"], &[self.p as usize], self.p).expect("valid group algebra")
    }
}

/// `δ_n` together with the commutator data it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    pub spec: DeltaSpec,
    pub alpha: GrElem,
    pub alpha_inv: GrElem,
    pub sigma: GrElem,
    pub sigma_inv: GrElem,
    pub value: GrElem,
    /// `T_0 .. T_{p-1}` over `F_p`.
    pub layers: Vec<GrElem>,
}

fn s_pow(e: i64) -> Word {
    Word::gen_pow(1, e)
}

fn t_pow(e: i64) -> Word {
    Word::gen_pow(2, e)
}

/// `T_k(n) = (-1)^k sⁿ t^k s⁻ⁿ + (-1)^{k-1} t sⁿ t^{k-1} s⁻ⁿ` (and `T_0 = 1`) over `F_p`.
pub fn closed_form_layer(spec: &DeltaSpec, k: usize) -> GrElem {
    let fp = CoeffRing::scalars(spec.p);
    let m = spec.m;
    if k == 0 {
        return GrElem::one(&fp, m);
    }
    let n = spec.n as i64;
    let sign = |e: usize| CoeffElem::constant(&fp, if e.is_multiple_of(2) { 1 } else { -1 });
    let w1 = s_pow(n).mul(&t_pow(k as i64)).mul(&s_pow(-n));
    let w2 = t_pow(1).mul(&s_pow(n)).mul(&t_pow(k as i64 - 1)).mul(&s_pow(-n));
    GrElem::term(sign(k), w1, m).add(&GrElem::term(sign(k - 1), w2, m))
}

/// `δ_n = α σ α⁻¹ σ⁻¹` with `α = 1 + y t`, `σ = sⁿ`, computed by exact multiplication and
/// checked against `δ σ α = α σ` and the closed-form layers.
pub fn delta(spec: &DeltaSpec) -> Result<Delta> {
    let spec = DeltaSpec::new(spec.p, spec.m, spec.n)?;
    let r = spec.coeff_ring();
    let m = spec.m;
    let y = CoeffElem::one(&r).sub(&CoeffElem::var(&r, 0));
    let alpha = GrElem::one(&r, m).add(&GrElem::term(y, t_pow(1), m));
    let alpha_inv = alpha.inverse_unipotent()?;
    let n = spec.n as i64;
    let sigma = GrElem::word(&r, m, s_pow(n));
    let sigma_inv = GrElem::word(&r, m, s_pow(-n));
    let value = alpha.mul(&sigma).mul(&alpha_inv).mul(&sigma_inv);
    if value.mul(&sigma).mul(&alpha) != alpha.mul(&sigma) {
        return Err(AlgebraError::Verification("delta fails the commutator identity".into()));
    }
    let layers = value.y_adic_expand()?.layers;
    for (k, layer) in layers.iter().enumerate() {
        if *layer != closed_form_layer(&spec, k) {
            return Err(AlgebraError::Verification(format!("layer {k} of delta_{} differs from T_{k}", spec.n)));
        }
    }
    Ok(Delta { spec, alpha, alpha_inv, sigma, sigma_inv, value, layers })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub k: usize,
    pub layer: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutatorWitness {
    pub alpha: String,
    pub alpha_inv: String,
    pub sigma: String,
    pub sigma_inv: String,
    pub identity: String,
}

/// JSON payload of `gen-module`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub p: u64,
    pub m: u32,
    pub n: u64,
    pub ring: String,
    /// `T_0 + (1-x)*(T_1) + ...`
    pub delta: String,
    /// Canonical monomial form.
    pub delta_expanded: String,
    pub y_layers: Vec<LayerRecord>,
    pub commutator_witness: CommutatorWitness,
}

fn layer_formula(k: usize) -> String {
    match k {
        0 => "1".into(),
        1 => "t - s^n*t*s^-n".into(),
        _ => format!("(-1)^{k}*s^n*t^{k}*s^-n + (-1)^{}*t*s^n*t^{}*s^-n", k - 1, k - 1),
    }
}

impl Delta {
    pub fn report(&self) -> Result<DeltaReport> {
        let r = self.spec.coeff_ring();
        let text = crate::group_ring::YAdicExpansion { p: self.spec.p, layers: self.layers.clone() }.to_text(&r)?;
        Ok(DeltaReport {
            p: self.spec.p,
            m: self.spec.m,
            n: self.spec.n,
            ring: r.to_string(),
            delta: text,
            delta_expanded: self.value.to_string(),
            y_layers: self
                .layers
                .iter()
                .enumerate()
                .map(|(k, l)| LayerRecord { k, layer: l.to_string(), formula: layer_formula(k) })
                .collect(),
            commutator_witness: CommutatorWitness {
                alpha: self.alpha.to_string(),
                alpha_inv: self.alpha_inv.to_string(),
                sigma: self.sigma.to_string(),
                sigma_inv: self.sigma_inv.to_string(),
                identity: "delta = alpha*sigma*alpha^-1*sigma^-1".into(),
            },
        })
    }
}
