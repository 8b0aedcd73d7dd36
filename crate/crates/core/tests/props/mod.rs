//! Property suites shared by the proptest tests and the acceptance runner. Each suite takes a
//! case count and returns the first counterexample as text.

#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use sfree_core::coeff::{cyclotomic, CoeffElem, CoeffRing};
use sfree_core::construction::{build_square_a, build_square_b, delta, DeltaSpec};
use sfree_core::group_ring::GrElem;
use sfree_core::milnor::{glue_rank1, MilnorSquare, PullbackRoute};
use sfree_core::word::{solve_conjugation, Word};

pub fn coeff_in(ring: Arc<CoeffRing>) -> impl Strategy<Value = CoeffElem> + Clone {
    let d = ring.basis().len();
    prop::collection::vec(-6i64..=6, d).prop_map(move |v| {
        let terms = ring.basis().into_iter().zip(v).map(|(e, c)| (e, BigInt::from(c)));
        CoeffElem::from_terms(&ring, terms)
    })
}

pub fn word(m: u32, max_len: usize) -> impl Strategy<Value = Word> + Clone {
    let m = m as i64;
    prop::collection::vec((1..=m, any::<bool>()), 0..=max_len)
        .prop_map(|ls| Word::from_letters(ls.into_iter().map(|(g, inv)| if inv { -g } else { g })))
}

pub fn gr_in(ring: Arc<CoeffRing>, m: u32, support: usize) -> impl Strategy<Value = GrElem> + Clone {
    prop::collection::vec((word(m, 3), coeff_in(ring.clone())), 0..=support)
        .prop_map(move |terms| GrElem::from_terms(&ring, m, terms))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn sample_rings() -> Vec<Arc<CoeffRing>> {
    vec![
        CoeffRing::abelian_group_ring(&["x"], &[4], 0).unwrap(),
        CoeffRing::univariate("x", cyclotomic(9), 0).unwrap(),
        CoeffRing::abelian_group_ring(&["x"], &[3], 3).unwrap(),
        CoeffRing::abelian_group_ring(&["x", "y"], &[2, 3], 0).unwrap(),
        CoeffRing::abelian_group_ring(&["x", "y"], &[2, 2], 2).unwrap(),
    ]
}

/// Commutative ring axioms for the coefficient rings, and associativity, distributivity and
/// identities for `R[F_2]`.
pub fn ring_axioms(cases: u32) -> Result<(), String> {
    for ring in sample_rings() {
        let c = coeff_in(ring.clone());
        report(runner(cases).run(&(c.clone(), c.clone(), c), |(a, b, d)| {
            check(a.add(&b) == b.add(&a), || "add commutes".into())?;
            check(a.mul(&b) == b.mul(&a), || "mul commutes".into())?;
            check(a.add(&b).add(&d) == a.add(&b.add(&d)), || "add associates".into())?;
            check(a.mul(&b).mul(&d) == a.mul(&b.mul(&d)), || "mul associates".into())?;
            check(a.mul(&b.add(&d)) == a.mul(&b).add(&a.mul(&d)), || "distributes".into())?;
            check(a.mul(&CoeffElem::one(&ring)) == a, || "unit".into())?;
            check(a.add(&a.neg()).is_zero(), || "negation".into())?;
            Ok(())
        }))?;
        let g = gr_in(ring.clone(), 2, 3);
        report(runner(cases).run(&(g.clone(), g.clone(), g), |(a, b, d)| {
            check(a.mul(&b).mul(&d) == a.mul(&b.mul(&d)), || format!("({a})({b})({d}) not associative"))?;
            check(a.mul(&b.add(&d)) == a.mul(&b).add(&a.mul(&d)), || "left distributive".into())?;
            check(b.add(&d).mul(&a) == b.mul(&a).add(&d.mul(&a)), || "right distributive".into())?;
            check(a.mul(&GrElem::one(&ring, 2)) == a && GrElem::one(&ring, 2).mul(&a) == a, || "identity".into())?;
            check(a.sub(&a).is_zero(), || "a - a".into())?;
            check(a.mul(&b).augmentation() == a.augmentation().mul(&b.augmentation()), || "augmentation".into())?;
            Ok(())
        }))?;
    }
    Ok(())
}

fn squares() -> Vec<MilnorSquare> {
    vec![build_square_a(2, 2).unwrap(), build_square_a(3, 2).unwrap(), build_square_b(2, 2).unwrap()]
}

/// The four legs of each square are additive and multiplicative on `A[F_2]`, and the square
/// commutes.
pub fn hom_multiplicativity(cases: u32) -> Result<(), String> {
    for sq in squares() {
        let g = gr_in(sq.a.clone(), 2, 3);
        report(runner(cases).run(&(g.clone(), g), |(f, h)| {
            for leg in [&sq.pi_plus, &sq.pi_minus] {
                let im = |x: &GrElem| x.apply_hom(leg).unwrap();
                check(im(&f.mul(&h)) == im(&f).mul(&im(&h)), || format!("{} not multiplicative", sq.name))?;
                check(im(&f.add(&h)) == im(&f).add(&im(&h)), || "not additive".into())?;
            }
            let (up, um) = (sq.pi_plus(&f).unwrap(), sq.pi_minus(&f).unwrap());
            let (vp, vm) = (sq.pi_plus(&h).unwrap(), sq.pi_minus(&h).unwrap());
            check(sq.psi_plus(&up.mul(&vp)).unwrap() == sq.psi_plus(&up).unwrap().mul(&sq.psi_plus(&vp).unwrap()), || {
                "psi_plus".into()
            })?;
            check(sq.psi_minus(&um.mul(&vm)).unwrap() == sq.psi_minus(&um).unwrap().mul(&sq.psi_minus(&vm).unwrap()), || {
                "psi_minus".into()
            })?;
            check(sq.psi_plus(&up).unwrap() == sq.psi_minus(&um).unwrap(), || format!("{} does not commute on {f}", sq.name))?;
            Ok(())
        }))?;
    }
    Ok(())
}

/// Free-group laws: inverses, associativity, reducedness, printing, cyclic reduction, roots and
/// conjugation solving.
pub fn word_laws(cases: u32) -> Result<(), String> {
    let w = word(3, 8);
    report(runner(cases).run(&(w.clone(), w.clone(), w), |(u, v, x)| {
        check(u.mul(&u.inv()).is_identity(), || format!("{u} * {u}^-1"))?;
        check(u.mul(&v).inv() == v.inv().mul(&u.inv()), || "inverse of product".into())?;
        check(u.mul(&v).mul(&x) == u.mul(&v.mul(&x)), || "associativity".into())?;
        let ls = u.letters();
        check(ls.windows(2).all(|p| p[0] != -p[1]), || format!("{u} not reduced"))?;
        check(u.len() == ls.len(), || "length".into())?;
        check(Word::parse(&u.display_with(3), 3).unwrap() == u, || format!("print/parse {u}"))?;
        let (core, conj) = u.cyclically_reduce();
        check(conj.conjugate(&core) == u && core.is_cyclically_reduced(), || format!("cyclic reduction of {u}"))?;
        if !u.is_identity() {
            let r = u.root();
            let n = u.len() as i64;
            check((1..=n).any(|k| r.pow(k) == u || r.pow(-k) == u), || format!("{u} is not a power of its root {r}"))?;
            check(r.root() == r, || format!("root {r} of {u} is not maximal"))?;
            check(r.commutes_with(&u), || "root commutes".into())?;
            let target = v.conjugate(&u);
            let sol = solve_conjugation(&u, &target);
            check(sol.as_ref().is_some_and(|c| c.contains(&v) && c.w0.conjugate(&u) == target), || {
                format!("conjugation {u} -> {target}")
            })?;
        }
        Ok(())
    }))
}

/// `a = Σ y^k T_k` reconstructs `a`, layers are `F_p`-valued, and the text form parses back.
pub fn y_adic_round_trip(cases: u32) -> Result<(), String> {
    for p in [2u64, 3, 5] {
        let ring = CoeffRing::abelian_group_ring(&["x"], &[p as usize], p).unwrap();
        report(runner(cases).run(&gr_in(ring.clone(), 2, 4), |a| {
            let e = a.y_adic_expand().unwrap();
            check(e.layers.len() == p as usize, || "layer count".into())?;
            check(e.reconstruct(&ring).unwrap() == a, || format!("y-adic round trip of {a}"))?;
            let text = e.to_text(&ring).unwrap();
            check(GrElem::parse(&ring, 2, &text).unwrap() == a, || format!("y-adic text `{text}`"))?;
            check(GrElem::parse(&ring, 2, &a.to_string()).unwrap() == a, || format!("text `{a}`"))?;
            Ok(())
        }))?;
    }
    Ok(())
}

/// Members of `⟨A₊, A₋; δ_n⟩` stay members under sums and the `A`-action.
pub fn module_membership(cases: u32) -> Result<(), String> {
    for (p, n) in [(2u64, 1u64), (3, 2)] {
        let sq = Arc::new(build_square_a(p, 2).unwrap());
        let d = delta(&DeltaSpec::new(p, 2, n).unwrap()).unwrap();
        let m = glue_rank1(&sq, &d.value, Some(&d.value.try_inverse().unwrap())).unwrap();
        let free = glue_rank1(&sq, &GrElem::one(&sq.a0, 2), None).unwrap();
        let u = gr_in(sq.a_plus.clone(), 2, 2);
        let f = gr_in(sq.a.clone(), 2, 2);
        let noise = gr_in(sq.a_minus.clone(), 2, 2);
        report(runner(cases).run(&(u.clone(), u, f.clone(), f, noise), |(u1, u2, f, g, z)| {
            // p·z and σ-type multiples lie in ker ψ₋
            let pz = z.scale(&CoeffElem::constant(&sq.a_minus, p as i64));
            let (a1, b1) = m.member_over(&u1, Some(&pz)).unwrap();
            let (a2, b2) = m.member_over(&u2, None).unwrap();
            check(m.contains(&a1, &b1).unwrap() && m.contains(&a2, &b2).unwrap(), || "constructed member".into())?;
            check(m.contains(&a1.add(&a2), &b1.add(&b2)).unwrap(), || "sum".into())?;
            let (c1, d1) = m.act(&a1, &b1, &f).unwrap();
            check(m.contains(&c1, &d1).unwrap(), || format!("action by {f}"))?;
            let (c2, d2) = m.act(&c1, &d1, &g).unwrap();
            let (c3, d3) = m.act(&a1, &b1, &f.mul(&g)).unwrap();
            check(c2 == c3 && d2 == d3, || "action is associative".into())?;
            let (e1, e2) = (sq.pi_plus(&f).unwrap(), sq.pi_minus(&f).unwrap());
            check(free.contains(&e1, &e2).unwrap(), || "free module contains images of A".into())?;
            check(sq.pullback_via(&e1, &e2, PullbackRoute::KappaMultiple).unwrap() == f, || "pullback".into())?;
            Ok(())
        }))?;
    }
    Ok(())
}

pub type Suite = fn(u32) -> Result<(), String>;

pub const SUITES: [(&str, Suite); 5] = [
    ("ring axioms", ring_axioms),
    ("hom multiplicativity", hom_multiplicativity),
    ("word reduction laws", word_laws),
    ("y-adic round trip", y_adic_round_trip),
    ("module membership", module_membership),
];
