//! `diag(δ_n, 1)` is a product of elementary matrices over `F_p[C_p × F_m]` whose entries lift
//! along `ψ₊` to `Z[C_p × F_m]`; the certificate records the lifted factors.

use serde::{Deserialize, Serialize};

use super::{build_square_a, delta, DeltaSpec};
use crate::coeff::{CoeffHom, CoeffRing, HomDescriptor, RingPresentation};
use crate::error::{AlgebraError, Result};
use crate::group_ring::GrElem;
use crate::matrix::{commutator_diag, lift_factors, ElemFactor, FactorList, RMatrix};

pub const CERTIFICATE_KIND: &str = "stably-free-trivialization";
pub const MAX_FACTORS: usize = 18;

/// `E(i, j; a)` with 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub i: usize,
    pub j: usize,
    pub a: String,
}

/// Self-contained: rings, the reduction map and every matrix are spelled out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub p: u64,
    pub m: u32,
    pub n: u64,
    pub lifted_ring: RingPresentation,
    pub target_ring: RingPresentation,
    pub psi_plus: HomDescriptor,
    pub factors: Vec<FactorRecord>,
    pub lifted_product: Vec<Vec<String>>,
    pub claimed_image: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub factors: usize,
    pub all_elementary: bool,
    pub lifted_product_matches: bool,
    pub image_matches: bool,
    pub claim_is_delta: bool,
    pub failures: Vec<String>,
}

impl CertificateCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn matrix_text(m: &RMatrix<GrElem>) -> Vec<Vec<String>> {
    m.rows().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
}

fn parse_matrix(rows: &[Vec<String>], ring: &std::sync::Arc<CoeffRing>, m: u32) -> Result<RMatrix<GrElem>> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| GrElem::parse(ring, m, s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    RMatrix::from_rows(rows)
}

/// Whitehead factors of `diag(δ_n, 1) = diag(α, α⁻¹)·diag(sⁿ, s⁻ⁿ)·diag((sⁿα)⁻¹, sⁿα)` over
/// `A₀`, lifted through the section of `ψ₊` (`F_p` coefficients to `{0, .., p-1}`).
pub fn trivialize(p: u64, m: u32, n: u64) -> Result<Certificate> {
    let d = delta(&DeltaSpec::new(p, m, n)?)?;
    let sq = build_square_a(p, m)?;
    let over_a0 = commutator_diag(&d.alpha, &d.alpha_inv, &d.sigma, &d.sigma_inv)?;
    let one = GrElem::one(&sq.a0, m);
    if over_a0.claimed != RMatrix::diagonal(&[d.value.clone(), one]) {
        return Err(AlgebraError::Verification("commutator factors do not give diag(delta, 1)".into()));
    }
    let lift = |e: &GrElem| e.lift_through(&sq.sec_plus).expect("entries live in A_0");
    let lifted = lift_factors(&over_a0, lift, &GrElem::one(&sq.a_plus, m))?;
    let factors = lifted
        .factors
        .iter()
        .map(|f| match f {
            ElemFactor::Elementary { i, j, a } => Ok(FactorRecord { i: i + 1, j: j + 1, a: a.to_string() }),
            ElemFactor::Diagonal { .. } => Err(AlgebraError::Verification("diagonal factor in lift".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let cert = Certificate {
        kind: CERTIFICATE_KIND.into(),
        p,
        m,
        n,
        lifted_ring: sq.a_plus.presentation(),
        target_ring: sq.a0.presentation(),
        psi_plus: sq.psi_plus.descriptor(),
        factors,
        lifted_product: matrix_text(&lifted.claimed),
        claimed_image: matrix_text(&over_a0.claimed),
    };
    let check = verify_certificate(&cert);
    if !check.ok() {
        return Err(AlgebraError::Verification(check.failures.join("; ")));
    }
    Ok(cert)
}

/// Re-parses and re-multiplies everything in the certificate. Never panics on bad input:
/// problems are collected in `failures`.
pub fn verify_certificate(cert: &Certificate) -> CertificateCheck {
    let mut check = CertificateCheck { factors: cert.factors.len(), ..Default::default() };
    if let Err(e) = verify_inner(cert, &mut check) {
        check.failures.push(e.to_string());
    }
    check
}

fn verify_inner(cert: &Certificate, check: &mut CertificateCheck) -> Result<()> {
    if cert.kind != CERTIFICATE_KIND {
        check.failures.push(format!("unknown certificate kind `{}`", cert.kind));
    }
    let lifted_ring = CoeffRing::from_presentation(&cert.lifted_ring)?;
    let target_ring = CoeffRing::from_presentation(&cert.target_ring)?;
    let psi = CoeffHom::from_descriptor_in(&cert.psi_plus, &lifted_ring, &target_ring)?;
    let m = cert.m;
    let template = GrElem::one(&lifted_ring, m);
    let factors = cert
        .factors
        .iter()
        .map(|f| {
            if f.i == 0 || f.j == 0 || f.i > 2 || f.j > 2 {
                return Err(AlgebraError::Shape(format!("factor index ({}, {})", f.i, f.j)));
            }
            ElemFactor::elementary(f.i - 1, f.j - 1, GrElem::parse(&lifted_ring, m, &f.a)?)
        })
        .collect::<Result<Vec<_>>>()?;
    check.all_elementary = true;
    if factors.len() > MAX_FACTORS {
        check.failures.push(format!("{} factors, more than {MAX_FACTORS}", factors.len()));
    }
    let product = FactorList::from_factors(2, factors, &template)?.claimed;
    check.lifted_product_matches = product == parse_matrix(&cert.lifted_product, &lifted_ring, m)?;
    if !check.lifted_product_matches {
        check.failures.push("recorded lifted product differs from the product of the factors".into());
    }
    let image = product.try_map(|e| e.apply_hom(&psi))?;
    let claimed = parse_matrix(&cert.claimed_image, &target_ring, m)?;
    check.image_matches = image == claimed;
    if !check.image_matches {
        check.failures.push("psi_plus image of the product differs from the claimed matrix".into());
    }
    let d = delta(&DeltaSpec::new(cert.p, m, cert.n)?)?;
    let expected = RMatrix::diagonal(&[d.value, GrElem::one(&d.spec.coeff_ring(), m)]);
    check.claim_is_delta = claimed == expected;
    if !check.claim_is_delta {
        check.failures.push(format!("claimed matrix is not diag(delta_{}, 1)", cert.n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_p2_n1() {
        let cert = trivialize(2, 2, 1).unwrap();
        assert_eq!(cert.factors.len(), 18);
        let check = verify_certificate(&cert);
        assert!(check.ok(), "{:?}", check.failures);
        assert!(check.all_elementary && check.image_matches && check.claim_is_delta);
        assert_eq!(cert.claimed_image[0][1], "0");
        assert_eq!(cert.claimed_image[1][1], "1");

        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert!(verify_certificate(&back).ok());
    }

    #[test]
    fn tampering_detected() {
        let mut cert = trivialize(3, 2, 2).unwrap();
        assert!(verify_certificate(&cert).ok());
        cert.factors[4].a = format!("{} + t", cert.factors[4].a);
        let check = verify_certificate(&cert);
        assert!(!check.ok());

        let mut cert = trivialize(2, 2, 1).unwrap();
        cert.claimed_image[0][0] = "1".into();
        assert!(!verify_certificate(&cert).ok());

        let mut cert = trivialize(2, 2, 1).unwrap();
        cert.factors[0].i = 7;
        assert!(!verify_certificate(&cert).ok());
        assert!(trivialize(2, 2, 0).is_err());
    }
}
