//! Milnor squares
//!
//! ```text
//!   A ──π₊──▶ A₊
//!   │π₋        │ψ₊
//!   ▼          ▼
//!   A₋ ──ψ₋──▶ A₀
//! ```
//!
//! with every corner an `R[F_m]` over a coefficient ring `R`. The fibre ring `A` is stored as its
//! own quotient ring, and [`MilnorSquare::pullback`] rebuilds an element of `A` from a compatible
//! pair, so the fibre-product property is something to test rather than assume.
//!
//! Every square here has the shape `A = Z[G]`, `A₋ = A/(σ)`, `A₊ = A/(κ)`, `A₀ = A₊/N` with
//! `σ - q·κ = N` in `A` (`σ` the norm element of a cyclic subgroup, `κ = generator - 1`).

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffElem, CoeffHom, CoeffRing, CoeffSection, RingPresentation};
use crate::error::{AlgebraError, Result};
use crate::group_ring::GrElem;
use crate::word::Word;

/// `σ - q·κ = N` in the coefficient ring of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackData {
    pub sigma: CoeffElem,
    pub kappa: CoeffElem,
    pub q: CoeffElem,
    pub n: BigInt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilnorSquare {
    pub name: String,
    pub m: u32,
    pub a: Arc<CoeffRing>,
    pub a_plus: Arc<CoeffRing>,
    pub a_minus: Arc<CoeffRing>,
    pub a0: Arc<CoeffRing>,
    pub pi_plus: CoeffHom,
    pub pi_minus: CoeffHom,
    pub psi_plus: CoeffHom,
    pub psi_minus: CoeffHom,
    /// Section of `ψ₊` (and one of `ψ₋`, used to manufacture compatible pairs).
    pub sec_plus: CoeffSection,
    pub sec_minus: CoeffSection,
    /// Canonical representatives of `A₊`, `A₋` read back in `A`.
    pub lift_plus: CoeffSection,
    pub lift_minus: CoeffSection,
    pub data: PullbackData,
}

/// Which of the two independent reconstructions to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullbackRoute {
    /// `lift₋(a₋) + σ·g`
    SigmaMultiple,
    /// `lift₊(a₊) + κ·g`
    KappaMultiple,
}

impl MilnorSquare {
    /// Assembles a square from rings and hom images. Sections and lifts are matched by variable
    /// name. The commutation `ψ₊π₊ = ψ₋π₋` is not enforced here: [`check_exactness`] reports it.
    pub fn from_parts(
        name: &str,
        m: u32,
        rings: [Arc<CoeffRing>; 4],
        homs: [CoeffHom; 4],
        data: PullbackData,
    ) -> Result<Self> {
        if m == 0 {
            return Err(AlgebraError::InvalidInput("free group rank must be positive".into()));
        }
        let [a, a_plus, a_minus, a0] = rings;
        let [pi_plus, pi_minus, psi_plus, psi_minus] = homs;
        let legs = [
            (&pi_plus, &a, &a_plus, "pi_plus"),
            (&pi_minus, &a, &a_minus, "pi_minus"),
            (&psi_plus, &a_plus, &a0, "psi_plus"),
            (&psi_minus, &a_minus, &a0, "psi_minus"),
        ];
        for (h, s, t, label) in legs {
            if h.source() != s || h.target() != t {
                return Err(AlgebraError::InvalidHom(format!("{label} has the wrong source or target")));
            }
        }
        for e in [&data.sigma, &data.kappa, &data.q] {
            if e.ring() != &a {
                return Err(AlgebraError::RingMismatch);
            }
        }
        let lhs = data.sigma.sub(&data.q.mul(&data.kappa));
        if lhs != CoeffElem::constant(&a, data.n.clone()) || data.n <= BigInt::from(1) {
            return Err(AlgebraError::Verification(format!("pullback identity gives {lhs}, not {}", data.n)));
        }
        let sq = MilnorSquare {
            name: name.to_string(),
            m,
            sec_plus: CoeffSection::by_name(&a0, &a_plus)?,
            sec_minus: CoeffSection::by_name(&a0, &a_minus)?,
            lift_plus: CoeffSection::by_name(&a_plus, &a)?,
            lift_minus: CoeffSection::by_name(&a_minus, &a)?,
            a,
            a_plus,
            a_minus,
            a0,
            pi_plus,
            pi_minus,
            psi_plus,
            psi_minus,
            data,
        };
        // ψ₊ must be surjective: its section has to be a right inverse on generators.
        for i in 0..sq.a0.nvars() {
            let x = CoeffElem::var(&sq.a0, i);
            if sq.psi_plus.apply(&sq.sec_plus.lift(&x)) != x {
                return Err(AlgebraError::InvalidHom("psi_plus section is not a right inverse".into()));
            }
        }
        Ok(sq)
    }

    /// Same square with `ψ₋` replaced; used to build negative controls.
    pub fn with_psi_minus(&self, psi_minus: CoeffHom) -> Result<Self> {
        if psi_minus.source() != &self.a_minus || psi_minus.target() != &self.a0 {
            return Err(AlgebraError::InvalidHom("psi_minus has the wrong source or target".into()));
        }
        let mut sq = self.clone();
        sq.psi_minus = psi_minus;
        Ok(sq)
    }

    pub fn pi_plus(&self, f: &GrElem) -> Result<GrElem> {
        f.apply_hom(&self.pi_plus)
    }

    pub fn pi_minus(&self, f: &GrElem) -> Result<GrElem> {
        f.apply_hom(&self.pi_minus)
    }

    pub fn psi_plus(&self, u: &GrElem) -> Result<GrElem> {
        u.apply_hom(&self.psi_plus)
    }

    pub fn psi_minus(&self, v: &GrElem) -> Result<GrElem> {
        v.apply_hom(&self.psi_minus)
    }

    /// Coefficient-level reconstruction along `route`.
    pub fn pullback_coeff(&self, a_plus: &CoeffElem, a_minus: &CoeffElem, route: PullbackRoute) -> Result<CoeffElem> {
        if a_plus.ring() != &self.a_plus || a_minus.ring() != &self.a_minus {
            return Err(AlgebraError::RingMismatch);
        }
        if self.psi_plus.apply(a_plus) != self.psi_minus.apply(a_minus) {
            return Err(AlgebraError::Incompatible);
        }
        let d = &self.data;
        match route {
            PullbackRoute::SigmaMultiple => {
                // π₊(σ) = N, so the A₊-discrepancy must be divisible by N
                let f0 = self.lift_minus.lift(a_minus);
                let diff = a_plus.sub(&self.pi_plus.apply(&f0));
                let g = self.lift_plus.lift(&diff.div_exact(&d.n)?);
                Ok(f0.add(&d.sigma.mul(&g)))
            }
            PullbackRoute::KappaMultiple => {
                // in A₋ σ = 0, so π₋(κ)·(-π₋(q)) = N
                let f0 = self.lift_plus.lift(a_plus);
                let r = a_minus.sub(&self.pi_minus.apply(&f0));
                let t = self.pi_minus.apply(&d.q).neg().mul(&r).div_exact(&d.n)?;
                Ok(f0.add(&d.kappa.mul(&self.lift_minus.lift(&t))))
            }
        }
    }

    /// The unique `f ∈ A` with `π₊(f) = a₊`, `π₋(f) = a₋`, or `Incompatible`.
    pub fn pullback(&self, a_plus: &GrElem, a_minus: &GrElem) -> Result<GrElem> {
        self.pullback_via(a_plus, a_minus, PullbackRoute::SigmaMultiple)
    }

    pub fn pullback_via(&self, a_plus: &GrElem, a_minus: &GrElem, route: PullbackRoute) -> Result<GrElem> {
        if a_plus.coeff_ring() != &self.a_plus || a_minus.coeff_ring() != &self.a_minus {
            return Err(AlgebraError::RingMismatch);
        }
        if a_plus.rank() != self.m || a_minus.rank() != self.m {
            return Err(AlgebraError::RingMismatch);
        }
        let mut words: Vec<&Word> = a_plus.support().chain(a_minus.support()).collect();
        words.sort();
        words.dedup();
        let mut terms = Vec::with_capacity(words.len());
        for w in words {
            let c = self.pullback_coeff(&a_plus.coeff_of(w), &a_minus.coeff_of(w), route)?;
            terms.push((w.clone(), c));
        }
        let f = GrElem::from_terms(&self.a, self.m, terms);
        if self.pi_plus(&f)? != *a_plus || self.pi_minus(&f)? != *a_minus {
            return Err(AlgebraError::Verification("reconstruction does not project back".into()));
        }
        Ok(f)
    }

    pub fn random_a<R: Rng + ?Sized>(&self, rng: &mut R) -> GrElem {
        GrElem::random(&self.a, self.m, rng, 3, 3, 3)
    }

    /// A compatible pair `(a₊, a₋)`: `a₋ = sec₋ψ₊(a₊) + N·r + π₋(κ)·r'`.
    pub fn random_compatible_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(GrElem, GrElem)> {
        let a_plus = GrElem::random(&self.a_plus, self.m, rng, 3, 3, 3);
        let base = self.psi_plus(&a_plus)?.lift_through(&self.sec_minus)?;
        let n = CoeffElem::constant(&self.a_minus, self.data.n.clone());
        let k = self.pi_minus.apply(&self.data.kappa);
        let r1 = GrElem::random(&self.a_minus, self.m, rng, 2, 3, 3).scale(&n);
        let r2 = GrElem::random(&self.a_minus, self.m, rng, 2, 3, 3).scale(&k);
        Ok((a_plus, base.add(&r1).add(&r2)))
    }

    pub fn descriptor(&self) -> SquareDescriptor {
        let imgs = |h: &CoeffHom| h.images().iter().map(|e| e.to_string()).collect();
        SquareDescriptor {
            name: self.name.clone(),
            m: self.m,
            a: self.a.presentation(),
            a_plus: self.a_plus.presentation(),
            a_minus: self.a_minus.presentation(),
            a0: self.a0.presentation(),
            pi_plus: imgs(&self.pi_plus),
            pi_minus: imgs(&self.pi_minus),
            psi_plus: imgs(&self.psi_plus),
            psi_minus: imgs(&self.psi_minus),
            sigma: self.data.sigma.to_string(),
            kappa: self.data.kappa.to_string(),
            q: self.data.q.to_string(),
            n: self.data.n.to_u64().unwrap_or(0),
        }
    }

    pub fn from_descriptor(d: &SquareDescriptor) -> Result<Self> {
        let a = CoeffRing::from_presentation(&d.a)?;
        let a_plus = CoeffRing::from_presentation(&d.a_plus)?;
        let a_minus = CoeffRing::from_presentation(&d.a_minus)?;
        let a0 = CoeffRing::from_presentation(&d.a0)?;
        let hom = |s: &Arc<CoeffRing>, t: &Arc<CoeffRing>, images: &[String]| -> Result<CoeffHom> {
            let ims = images.iter().map(|x| CoeffElem::parse(t, x)).collect::<Result<Vec<_>>>()?;
            CoeffHom::new(s, t, ims)
        };
        let homs = [
            hom(&a, &a_plus, &d.pi_plus)?,
            hom(&a, &a_minus, &d.pi_minus)?,
            hom(&a_plus, &a0, &d.psi_plus)?,
            hom(&a_minus, &a0, &d.psi_minus)?,
        ];
        let data = PullbackData {
            sigma: CoeffElem::parse(&a, &d.sigma)?,
            kappa: CoeffElem::parse(&a, &d.kappa)?,
            q: CoeffElem::parse(&a, &d.q)?,
            n: BigInt::from(d.n),
        };
        Self::from_parts(&d.name, d.m, [a, a_plus, a_minus, a0], homs, data)
    }
}

/// JSON form of a square: ring presentations, hom variable images and the pullback identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDescriptor {
    pub name: String,
    pub m: u32,
    pub a: RingPresentation,
    pub a_plus: RingPresentation,
    pub a_minus: RingPresentation,
    pub a0: RingPresentation,
    pub pi_plus: Vec<String>,
    pub pi_minus: Vec<String>,
    pub psi_plus: Vec<String>,
    pub psi_minus: Vec<String>,
    pub sigma: String,
    pub kappa: String,
    pub q: String,
    pub n: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub square: String,
    pub samples: usize,
    pub pairs_checked: usize,
    pub round_trips_checked: usize,
    pub failures: Vec<String>,
}

impl ExactnessReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Commutation on generators and random elements, the `ψ₊` section, round trips
/// `f ↦ (π₊f, π₋f) ↦ f`, and agreement of both reconstructions on random compatible pairs.
pub fn check_exactness<R: Rng + ?Sized>(sq: &MilnorSquare, samples: usize, rng: &mut R) -> ExactnessReport {
    let mut rep = ExactnessReport { square: sq.name.clone(), samples, ..Default::default() };
    let fail = |rep: &mut ExactnessReport, msg: String| {
        if rep.failures.len() < 20 {
            rep.failures.push(msg);
        } else if rep.failures.len() == 20 {
            rep.failures.push("further failures suppressed".into());
        }
    };
    let around = |c: &CoeffElem| {
        let l = sq.psi_plus.apply(&sq.pi_plus.apply(c));
        let r = sq.psi_minus.apply(&sq.pi_minus.apply(c));
        (l, r)
    };
    for i in 0..sq.a.nvars() {
        let (l, r) = around(&CoeffElem::var(&sq.a, i));
        if l != r {
            fail(&mut rep, format!("square does not commute on {}: {l} vs {r}", sq.a.vars()[i]));
        }
    }
    for _ in 0..samples {
        let c = CoeffElem::random(&sq.a, rng, 4, 0.7);
        let (l, r) = around(&c);
        if l != r {
            fail(&mut rep, format!("square does not commute on {c}"));
            break;
        }
        let x0 = CoeffElem::random(&sq.a0, rng, 4, 0.7);
        if sq.psi_plus.apply(&sq.sec_plus.lift(&x0)) != x0 {
            fail(&mut rep, format!("psi_plus section fails on {x0}"));
            break;
        }
    }
    for _ in 0..samples {
        let f = sq.random_a(rng);
        let checked = (|| -> Result<()> {
            let (ap, am) = (sq.pi_plus(&f)?, sq.pi_minus(&f)?);
            for route in [PullbackRoute::SigmaMultiple, PullbackRoute::KappaMultiple] {
                let g = sq.pullback_via(&ap, &am, route)?;
                if g != f {
                    return Err(AlgebraError::Verification(format!("{route:?} rebuilt {g}")));
                }
            }
            Ok(())
        })();
        rep.round_trips_checked += 1;
        if let Err(e) = checked {
            fail(&mut rep, format!("round trip of {f}: {e}"));
        }
    }
    for _ in 0..samples {
        let checked = (|| -> Result<()> {
            let (ap, am) = sq.random_compatible_pair(rng)?;
            let f1 = sq.pullback_via(&ap, &am, PullbackRoute::SigmaMultiple)?;
            let f2 = sq.pullback_via(&ap, &am, PullbackRoute::KappaMultiple)?;
            if f1 != f2 {
                return Err(AlgebraError::Verification(format!("routes disagree: {f1} vs {f2} for ({ap}, {am})")));
            }
            Ok(())
        })();
        rep.pairs_checked += 1;
        if let Err(e) = checked {
            fail(&mut rep, format!("compatible pair: {e}"));
        }
    }
    rep
}

/// `⟨A₊, A₋; α⟩ = {(u, v) : α·ψ₊(u) = ψ₋(v)}`, a right `A`-module.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Module {
    square: Arc<MilnorSquare>,
    alpha: GrElem,
    alpha_inv: GrElem,
}

/// Checks that `α` is a unit of `A₀[F_m]`. Without a witness the inverse is computed.
pub fn glue_rank1(sq: &Arc<MilnorSquare>, alpha: &GrElem, alpha_inv: Option<&GrElem>) -> Result<Rank1Module> {
    if alpha.coeff_ring() != &sq.a0 || alpha.rank() != sq.m {
        return Err(AlgebraError::RingMismatch);
    }
    let inv = match alpha_inv {
        Some(i) => i.clone(),
        None => alpha.try_inverse()?,
    };
    if !alpha.try_mul(&inv)?.is_one() || !inv.try_mul(alpha)?.is_one() {
        return Err(AlgebraError::BadInverse);
    }
    Ok(Rank1Module { square: sq.clone(), alpha: alpha.clone(), alpha_inv: inv })
}

impl Rank1Module {
    pub fn square(&self) -> &Arc<MilnorSquare> {
        &self.square
    }

    pub fn alpha(&self) -> &GrElem {
        &self.alpha
    }

    pub fn alpha_inv(&self) -> &GrElem {
        &self.alpha_inv
    }

    pub fn contains(&self, u: &GrElem, v: &GrElem) -> Result<bool> {
        Ok(self.alpha.try_mul(&self.square.psi_plus(u)?)? == self.square.psi_minus(v)?)
    }

    /// `(u, v)·f = (u·π₊(f), v·π₋(f))`
    pub fn act(&self, u: &GrElem, v: &GrElem, f: &GrElem) -> Result<(GrElem, GrElem)> {
        Ok((u.try_mul(&self.square.pi_plus(f)?)?, v.try_mul(&self.square.pi_minus(f)?)?))
    }

    /// A member with first coordinate `u`: `v = sec₋(α·ψ₊(u)) + noise` with noise in `ker ψ₋`.
    pub fn member_over(&self, u: &GrElem, noise: Option<&GrElem>) -> Result<(GrElem, GrElem)> {
        let sq = &self.square;
        let mut v = self.alpha.try_mul(&sq.psi_plus(u)?)?.lift_through(&sq.sec_minus)?;
        if let Some(z) = noise {
            if !sq.psi_minus(z)?.is_zero() {
                return Err(AlgebraError::InvalidInput("noise must lie in the kernel of psi_minus".into()));
            }
            v = v.try_add(z)?;
        }
        Ok((u.clone(), v))
    }

    pub fn class(&self) -> CosetClass {
        CosetClass { square: self.square.clone(), representative: self.alpha.clone() }
    }
}

/// A point of `ψ₋(A₋*)\A₀*/ψ₊(A₊*)` given by a representative unit. Whether two classes agree is
/// decided by the distinctness certifier, not here.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetClass {
    pub square: Arc<MilnorSquare>,
    pub representative: GrElem,
}

#[cfg(test)]
mod tests {
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    use super::*;
    use crate::coeff::{cyclotomic, norm_identity};

    /// Square A at the coefficient level for p = 2, assembled by hand.
    fn square_a2() -> MilnorSquare {
        let a = CoeffRing::abelian_group_ring(&["x"], &[4], 0).unwrap();
        let am = CoeffRing::univariate("x", cyclotomic(4), 0).unwrap();
        let ap = CoeffRing::abelian_group_ring(&["x"], &[2], 0).unwrap();
        let a0 = CoeffRing::abelian_group_ring(&["x"], &[2], 2).unwrap();
        let homs = [
            CoeffHom::by_name(&a, &ap).unwrap(),
            CoeffHom::by_name(&a, &am).unwrap(),
            CoeffHom::by_name(&ap, &a0).unwrap(),
            CoeffHom::by_name(&am, &a0).unwrap(),
        ];
        let q = norm_identity(2, 2).unwrap();
        let data = PullbackData {
            sigma: CoeffElem::from_poly(&a, 0, &cyclotomic(4)),
            kappa: CoeffElem::parse(&a, "x^2 - 1").unwrap(),
            q: CoeffElem::from_poly(&a, 0, &q),
            n: 2.into(),
        };
        MilnorSquare::from_parts("A", 2, [a, ap, am, a0], homs, data).unwrap()
    }

    #[test]
    fn pullback_example() {
        let sq = square_a2();
        let ap = GrElem::parse(&sq.a_plus, 2, "1 + 2*x").unwrap();
        let am = GrElem::one(&sq.a_minus, 2);
        let f = sq.pullback(&ap, &am).unwrap();
        assert_eq!(f, GrElem::parse(&sq.a, 2, "1 + x + x^3").unwrap());
        assert_eq!(sq.pullback_via(&ap, &am, PullbackRoute::KappaMultiple).unwrap(), f);

        let bad = GrElem::parse(&sq.a_minus, 2, "x").unwrap();
        assert_eq!(sq.pullback(&GrElem::one(&sq.a_plus, 2), &bad), Err(AlgebraError::Incompatible));
    }

    #[test]
    fn exactness_and_negative_control() {
        let sq = square_a2();
        let mut rng = StdRng::seed_from_u64(1);
        let rep = check_exactness(&sq, 50, &mut rng);
        assert!(rep.is_clean(), "{:?}", rep.failures);

        let broken = CoeffHom::new(&sq.a_minus, &sq.a0, vec![CoeffElem::one(&sq.a0)]).unwrap();
        let bad = sq.with_psi_minus(broken).unwrap();
        let rep = check_exactness(&bad, 20, &mut rng);
        assert!(!rep.is_clean());
    }

    #[test]
    fn descriptor_round_trip() {
        let sq = square_a2();
        let d = sq.descriptor();
        let json = serde_json::to_string(&d).unwrap();
        let back: SquareDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(MilnorSquare::from_descriptor(&back).unwrap(), sq);
    }

    #[test]
    fn rank_one_modules() {
        let sq = Arc::new(square_a2());
        let one = GrElem::one(&sq.a0, 2);
        let free = glue_rank1(&sq, &one, None).unwrap();
        assert!(free.contains(&GrElem::one(&sq.a_plus, 2), &GrElem::one(&sq.a_minus, 2)).unwrap());

        let delta = GrElem::parse(&sq.a0, 2, "1 + (1+x)*(t + s*t*s^-1)").unwrap();
        let m = glue_rank1(&sq, &delta, None).unwrap();
        let zp = GrElem::zero(&sq.a_plus, 2);
        let zm = GrElem::zero(&sq.a_minus, 2);
        assert!(m.contains(&zp, &zm).unwrap());
        assert!(!m.contains(&GrElem::one(&sq.a_plus, 2), &GrElem::one(&sq.a_minus, 2)).unwrap());

        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let u = GrElem::random(&sq.a_plus, 2, &mut rng, 2, 2, 2);
            let (u, v) = m.member_over(&u, None).unwrap();
            assert!(m.contains(&u, &v).unwrap());
            let f = sq.random_a(&mut rng);
            let (u2, v2) = m.act(&u, &v, &f).unwrap();
            assert!(m.contains(&u2, &v2).unwrap());
        }

        let y = GrElem::parse(&sq.a0, 2, "1 - x").unwrap();
        assert!(glue_rank1(&sq, &y, None).is_err());
        assert_eq!(glue_rank1(&sq, &delta, Some(&one)), Err(AlgebraError::BadInverse));
    }
}
