use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::poly::reduce_mod;
use super::ring::{same_ring, CoeffElem, CoeffRing, RingPresentation};
use crate::error::{AlgebraError, Result};

/// Ring homomorphism determined by the images of the source variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffHom {
    source: Arc<CoeffRing>,
    target: Arc<CoeffRing>,
    images: Vec<CoeffElem>,
}

impl CoeffHom {
    /// Checks characteristic compatibility and that every source relation vanishes on the images.
    pub fn new(source: &Arc<CoeffRing>, target: &Arc<CoeffRing>, images: Vec<CoeffElem>) -> Result<Self> {
        if images.len() != source.nvars() {
            return Err(AlgebraError::InvalidHom("one image per source variable".into()));
        }
        if images.iter().any(|im| !same_ring(im.ring(), target)) {
            return Err(AlgebraError::RingMismatch);
        }
        let (ns, nt) = (source.characteristic(), target.characteristic());
        if !ns.is_zero() && (nt.is_zero() || !(ns % nt).is_zero()) {
            return Err(AlgebraError::InvalidHom(format!(
                "characteristic {ns} does not map to characteristic {nt}"
            )));
        }
        for (i, (rel, im)) in source.relations().iter().zip(&images).enumerate() {
            let mut acc = CoeffElem::zero(target);
            for c in rel.coeffs().iter().rev() {
                acc = acc.mul(im).add(&CoeffElem::constant(target, c.clone()));
            }
            if !acc.is_zero() {
                return Err(AlgebraError::InvalidHom(format!(
                    "relation of `{}` maps to {acc}",
                    source.vars()[i]
                )));
            }
        }
        Ok(CoeffHom { source: source.clone(), target: target.clone(), images })
    }

    /// Sends each source variable to the target variable of the same name, or to `1` when absent.
    pub fn by_name(source: &Arc<CoeffRing>, target: &Arc<CoeffRing>) -> Result<Self> {
        let images = source
            .vars()
            .iter()
            .map(|v| match target.var_index(v) {
                Some(j) => CoeffElem::var(target, j),
                None => CoeffElem::one(target),
            })
            .collect();
        Self::new(source, target, images)
    }

    pub fn source(&self) -> &Arc<CoeffRing> {
        &self.source
    }

    pub fn target(&self) -> &Arc<CoeffRing> {
        &self.target
    }

    pub fn images(&self) -> &[CoeffElem] {
        &self.images
    }

    /// Whether coefficients are reduced on the way (target characteristic differs).
    pub fn reduces_characteristic(&self) -> bool {
        self.source.characteristic() != self.target.characteristic()
    }

    pub fn try_apply(&self, a: &CoeffElem) -> Result<CoeffElem> {
        if !same_ring(a.ring(), &self.source) {
            return Err(AlgebraError::RingMismatch);
        }
        let degs = self.source.degrees();
        // powers[v][k] = image_v^k
        let powers: Vec<Vec<CoeffElem>> = self
            .images
            .iter()
            .zip(&degs)
            .map(|(im, &d)| {
                let mut row = vec![CoeffElem::one(&self.target)];
                for k in 1..d {
                    row.push(row[k - 1].mul(im));
                }
                row
            })
            .collect();
        let nt = self.target.characteristic();
        let mut acc = CoeffElem::zero(&self.target);
        for (e, c) in a.terms() {
            let mut t = CoeffElem::constant(&self.target, reduce_mod(c, nt));
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[v][k as usize]);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    pub fn apply(&self, a: &CoeffElem) -> CoeffElem {
        self.try_apply(a).expect("element outside hom source")
    }

    /// `then ∘ self`
    pub fn then(&self, then: &CoeffHom) -> Result<CoeffHom> {
        if !same_ring(&self.target, &then.source) {
            return Err(AlgebraError::RingMismatch);
        }
        let images = self.images.iter().map(|im| then.apply(im)).collect();
        CoeffHom::new(&self.source, &then.target, images)
    }

    pub fn descriptor(&self) -> HomDescriptor {
        HomDescriptor {
            source: self.source.presentation(),
            target: self.target.presentation(),
            images: self.images.iter().map(|e| e.to_string()).collect(),
        }
    }

    pub fn from_descriptor(d: &HomDescriptor) -> Result<Self> {
        let source = CoeffRing::from_presentation(&d.source)?;
        let target = CoeffRing::from_presentation(&d.target)?;
        Self::from_descriptor_in(d, &source, &target)
    }

    pub fn from_descriptor_in(d: &HomDescriptor, source: &Arc<CoeffRing>, target: &Arc<CoeffRing>) -> Result<Self> {
        if d.source != source.presentation() || d.target != target.presentation() {
            return Err(AlgebraError::RingMismatch);
        }
        let images = d.images.iter().map(|s| CoeffElem::parse(target, s)).collect::<Result<Vec<_>>>()?;
        Self::new(source, target, images)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomDescriptor {
    pub source: RingPresentation,
    pub target: RingPresentation,
    pub images: Vec<String>,
}

/// Set-theoretic section on canonical representatives: copies each monomial's exponents along
/// `var_map` (source variable -> target variable) and keeps the integer coefficients as they are.
///
/// Used to lift `F_p` coefficients to `{0, .., p-1}`, and to embed canonical representatives of a
/// quotient back into the ring it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSection {
    source: Arc<CoeffRing>,
    target: Arc<CoeffRing>,
    var_map: Vec<usize>,
}

impl CoeffSection {
    pub fn new(source: &Arc<CoeffRing>, target: &Arc<CoeffRing>, var_map: Vec<usize>) -> Result<Self> {
        if var_map.len() != source.nvars() || var_map.iter().any(|&j| j >= target.nvars()) {
            return Err(AlgebraError::InvalidInput("section variable map".into()));
        }
        Ok(CoeffSection { source: source.clone(), target: target.clone(), var_map })
    }

    /// Map variables by name; every source variable must exist in the target.
    pub fn by_name(source: &Arc<CoeffRing>, target: &Arc<CoeffRing>) -> Result<Self> {
        let map = source
            .vars()
            .iter()
            .map(|v| {
                target
                    .var_index(v)
                    .ok_or_else(|| AlgebraError::InvalidInput(format!("variable `{v}` missing in section target")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, map)
    }

    pub fn source(&self) -> &Arc<CoeffRing> {
        &self.source
    }

    pub fn target(&self) -> &Arc<CoeffRing> {
        &self.target
    }

    pub fn var_map(&self) -> &[usize] {
        &self.var_map
    }

    pub fn lift(&self, a: &CoeffElem) -> CoeffElem {
        assert!(same_ring(a.ring(), &self.source), "element outside section source");
        let raw = a.terms().iter().map(|(e, c)| {
            let mut te = vec![0u32; self.target.nvars()];
            for (v, &k) in e.iter().enumerate() {
                te[self.var_map[v]] += k;
            }
            (te, c.clone())
        });
        CoeffElem::from_terms(&self.target, raw)
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::cyclotomic;
    use super::*;

    #[test]
    fn reduction_mod_two() {
        let zc2 = CoeffRing::abelian_group_ring(&["x"], &[2], 0).unwrap();
        let fc2 = CoeffRing::abelian_group_ring(&["x"], &[2], 2).unwrap();
        let psi_plus = CoeffHom::by_name(&zc2, &fc2).unwrap();
        assert!(psi_plus.reduces_characteristic());
        let a = CoeffElem::parse(&zc2, "3 + 2*x").unwrap();
        assert_eq!(psi_plus.apply(&a), CoeffElem::one(&fc2));

        let zi = CoeffRing::univariate("x", cyclotomic(4), 0).unwrap();
        let psi_minus = CoeffHom::by_name(&zi, &fc2).unwrap();
        assert_eq!(psi_minus.apply(&CoeffElem::var(&zi, 0)), CoeffElem::var(&fc2, 0));
    }

    #[test]
    fn kills_x_to_one() {
        // Z[x,y]/(x+1, y^2-1) -> F_2[y]/(y^2-1), x -> 1
        let src = CoeffRing::new(
            vec!["x".into(), "y".into()],
            vec![cyclotomic(2), cyclotomic(1).mul(&cyclotomic(2))],
            0.into(),
        )
        .unwrap();
        let tgt = CoeffRing::abelian_group_ring(&["y"], &[2], 2).unwrap();
        let phi = CoeffHom::by_name(&src, &tgt).unwrap();
        assert_eq!(phi.apply(&CoeffElem::var(&src, 0)), CoeffElem::one(&tgt));
        assert_eq!(phi.apply(&CoeffElem::var(&src, 1)), CoeffElem::var(&tgt, 0));
    }

    #[test]
    fn rejects_non_homs() {
        let z4 = CoeffRing::abelian_group_ring(&["x"], &[4], 0).unwrap();
        let z3 = CoeffRing::abelian_group_ring(&["x"], &[3], 0).unwrap();
        // x^4 - 1 does not vanish at x in Z[C_3]
        assert!(CoeffHom::by_name(&z4, &z3).is_err());
        // characteristic 2 cannot map to characteristic 0
        let f2 = CoeffRing::abelian_group_ring(&["x"], &[4], 2).unwrap();
        assert!(CoeffHom::by_name(&f2, &z4).is_err());
    }

    #[test]
    fn section_lifts_residues() {
        let fc3 = CoeffRing::abelian_group_ring(&["x"], &[3], 3).unwrap();
        let zc3 = CoeffRing::abelian_group_ring(&["x"], &[3], 0).unwrap();
        let s = CoeffSection::by_name(&fc3, &zc3).unwrap();
        let a = CoeffElem::parse(&fc3, "1 - x").unwrap();
        assert_eq!(s.lift(&a), CoeffElem::parse(&zc3, "1 + 2*x").unwrap());
        let psi = CoeffHom::by_name(&zc3, &fc3).unwrap();
        assert_eq!(psi.apply(&s.lift(&a)), a);
    }

    #[test]
    fn descriptor_round_trip() {
        let zc2 = CoeffRing::abelian_group_ring(&["x"], &[2], 0).unwrap();
        let fc2 = CoeffRing::abelian_group_ring(&["x"], &[2], 2).unwrap();
        let h = CoeffHom::by_name(&zc2, &fc2).unwrap();
        let back = CoeffHom::from_descriptor(&h.descriptor()).unwrap();
        assert_eq!(h, back);
    }
}
