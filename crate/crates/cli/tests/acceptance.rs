//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Every check recomputes its expected value independently of the code path under test
//! (hand evaluation, geometric series, exact products, the CLI binary).

#[path = "../../core/tests/props/mod.rs"]
mod props;

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sfree_core::coeff::{cyclotomic, cyclotomic_identity, CoeffElem, CoeffRing};
use sfree_core::construction::{
    brute_force_check, build_sigma_square, build_square_a, build_square_b, certify_distinct, delta, trivialize,
    unit_search, verify_certificate, DeltaSpec, Verdict,
};
use sfree_core::group_ring::GrElem;
use sfree_core::matrix::{
    diagonal_reduce_nilpotent, gaussian_diagonalize, ElemFactor, FactorList, InvertibilityWitness, NilpotentQuotient,
    RMatrix,
};
use sfree_core::milnor::{check_exactness, PullbackRoute};
use sfree_core::word::Word;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Φ_{p²} − q·(x^p − 1) = p, with q = Σ_{i<p-1} (p−1−i)·x^{pi}.
fn c1_cyclotomic() -> Result<String, String> {
    for p in [2usize, 3, 5, 7] {
        let q = cyclotomic_identity(p as u64).map_err(err)?;
        ensure(q.degree() == Some(p * (p - 2)), || format!("p = {p}: deg q = {:?}", q.degree()))?;
        for i in 0..=p * (p - 2) {
            let want = if i % p == 0 { (p - 1 - i / p) as i64 } else { 0 };
            ensure(q.coeff(i) == BigInt::from(want), || format!("p = {p}: coefficient of x^{i} is {}", q.coeff(i)))?;
        }
        let phi = cyclotomic(p * p);
        for k in 0..=p * (p - 1) {
            let want = i64::from(k % p == 0);
            ensure(phi.coeff(k) == BigInt::from(want), || format!("Phi_{}: coefficient of x^{k}", p * p))?;
        }
        // both sides have degree ≤ p(p−1); agreement at p(p−1)+1 points is an identity
        for x in 0..=(p * (p - 1)) as i64 {
            let xb = BigInt::from(x);
            let phi_x: BigInt = (0..p).map(|k| xb.pow((p * k) as u32)).sum();
            let q_x: BigInt = (0..=p * (p - 2)).map(|i| q.coeff(i) * xb.pow(i as u32)).sum();
            let lhs = phi_x - q_x * (xb.pow(p as u32) - 1);
            ensure(lhs == BigInt::from(p), || format!("p = {p}: identity fails at x = {x}: {lhs}"))?;
        }
    }
    Ok("p in {2,3,5,7}".into())
}

fn c2_squares() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(2);
    let mut squares = Vec::new();
    for p in [2, 3, 5] {
        squares.push(build_square_a(p, 2).map_err(err)?);
        squares.push(build_square_b(p, 2).map_err(err)?);
    }
    squares.push(build_sigma_square(&[4], &[vec![2]], 2).map_err(err)?);
    squares.push(build_sigma_square(&[2, 2], &[vec![1, 0]], 2).map_err(err)?);
    squares.push(build_sigma_square(&[12], &[vec![4]], 2).map_err(err)?);
    let mut pairs = 0;
    for sq in &squares {
        let rep = check_exactness(sq, 200, &mut rng);
        ensure(rep.is_clean(), || format!("{}: {:?}", sq.name, rep.failures))?;
        ensure(rep.pairs_checked == 200 && rep.round_trips_checked == 200, || "short sample".into())?;
        pairs += rep.pairs_checked;
        // the reconstruction projects back onto the pair it came from
        for _ in 0..20 {
            let (ap, am) = sq.random_compatible_pair(&mut rng).map_err(err)?;
            let f = sq.pullback_via(&ap, &am, PullbackRoute::KappaMultiple).map_err(err)?;
            ensure(sq.pi_plus(&f).map_err(err)? == ap && sq.pi_minus(&f).map_err(err)? == am, || {
                format!("{}: ({ap}, {am}) not recovered", sq.name)
            })?;
        }
    }
    Ok(format!("{} squares, {pairs} compatible pairs", squares.len()))
}

/// `(1 + yt)⁻¹ = Σ_{k<p} (−yt)^k` because `y^p = 0`.
fn geometric_inverse(p: u64, ring: &Arc<CoeffRing>, m: u32) -> GrElem {
    let y = CoeffElem::one(ring).sub(&CoeffElem::var(ring, 0));
    let minus_yt = GrElem::term(y, Word::gen(m), m).neg();
    let mut acc = GrElem::zero(ring, m);
    let mut pow = GrElem::one(ring, m);
    for _ in 0..p {
        acc = acc.add(&pow);
        pow = pow.mul(&minus_yt);
    }
    acc
}

fn c3_delta() -> Result<String, String> {
    let mut count = 0;
    for p in [2u64, 3] {
        let fp = CoeffRing::scalars(p);
        for n in 1..=10u64 {
            let d = delta(&DeltaSpec::new(p, 2, n).map_err(err)?).map_err(err)?;
            let r = d.spec.coeff_ring();
            let alpha = GrElem::parse(&r, 2, "1 + (1 - x)*t").map_err(err)?;
            let inv = geometric_inverse(p, &r, 2);
            ensure(alpha.mul(&inv).is_one() && inv.mul(&alpha).is_one(), || "geometric inverse".into())?;
            let sn = GrElem::word(&r, 2, Word::gen_pow(1, n as i64));
            let sn_inv = GrElem::word(&r, 2, Word::gen_pow(1, -(n as i64)));
            let comm = alpha.mul(&sn).mul(&inv).mul(&sn_inv);
            ensure(d.value == comm, || format!("p = {p}, n = {n}: delta {} vs commutator {comm}", d.value))?;
            ensure(d.layers[0].is_one(), || format!("p = {p}, n = {n}: y^0 layer {}", d.layers[0]))?;
            let t1 = GrElem::parse(&fp, 2, &format!("t - s^{n}*t*s^-{n}")).map_err(err)?;
            ensure(d.layers[1] == t1, || format!("p = {p}, n = {n}: y^1 layer {}", d.layers[1]))?;
            count += 1;
        }
    }
    Ok(format!("{count} deltas"))
}

fn c4_distinct() -> Result<String, String> {
    let mut distinct = 0;
    let mut diagonal = 0;
    for p in [2u64, 3] {
        for n in 1..=10u64 {
            for n2 in 1..=10u64 {
                let v = certify_distinct(p, 2, n, n2).map_err(err)?;
                let want = if n == n2 { Verdict::Equivalent } else { Verdict::Distinct };
                ensure(v.verdict == want, || format!("p = {p}: ({n}, {n2}) -> {:?}", v.verdict))?;
                ensure(v.replay().map_err(err)?, || format!("p = {p}: ({n}, {n2}) replay failed"))?;
                let bf = brute_force_check(p, 2, n, n2, 4).map_err(err)?;
                ensure(bf.hits.is_empty() == (n != n2), || format!("p = {p}: ({n}, {n2}) brute force {:?}", bf.hits))?;
                ensure(bf.units_checked == if p == 2 { 2 } else { 18 }, || "unit group size".into())?;
                ensure(v.agrees_with(&bf), || format!("p = {p}: ({n}, {n2}) decision and brute force disagree"))?;
                if n == n2 {
                    diagonal += 1;
                } else {
                    distinct += 1;
                }
            }
        }
    }
    Ok(format!("{distinct} distinct, {diagonal} equivalent, L = 4"))
}

fn c5_certificates() -> Result<String, String> {
    let dir = std::env::temp_dir().join(format!("sfree-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let mut count = 0;
    for p in [2u64, 3] {
        for n in 1..=5u64 {
            let c = trivialize(p, 2, n).map_err(err)?;
            ensure(c.factors.len() <= 18, || format!("{} factors", c.factors.len()))?;
            ensure(c.factors.iter().all(|f| f.i != f.j), || "non-elementary factor".into())?;
            let check = verify_certificate(&c);
            ensure(check.ok() && check.all_elementary && check.image_matches && check.claim_is_delta, || {
                format!("p = {p}, n = {n}: {:?}", check.failures)
            })?;
            // the claimed image is diag(δ_n, 1), written out from the explicit commutator
            let d = delta(&DeltaSpec::new(p, 2, n).map_err(err)?).map_err(err)?;
            ensure(c.claimed_image == [[d.value.to_string(), "0".into()], ["0".into(), "1".into()]], || {
                format!("claimed image {:?}", c.claimed_image)
            })?;
            let path = dir.join(format!("cert-{p}-{n}.json"));
            std::fs::write(&path, serde_json::to_string(&c).map_err(err)?).map_err(err)?;
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_sfree"))
                .arg("verify-certificate")
                .arg(&path)
                .output()
                .map_err(err)?;
            ensure(out.status.success(), || format!("verify-certificate exited {:?}", out.status.code()))?;
            count += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{count} certificates, verified in-process and by the CLI"))
}

fn random_unit(rng: &mut StdRng, r: &Arc<CoeffRing>) -> CoeffElem {
    loop {
        let e = CoeffElem::random(r, rng, 2, 0.8);
        if e.unit_inverse().is_ok() {
            return e;
        }
    }
}

fn random_factor(rng: &mut StdRng, r: &Arc<CoeffRing>, n: usize) -> ElemFactor<CoeffElem> {
    if rng.gen_bool(0.25) {
        let d: Vec<CoeffElem> = (0..n).map(|_| random_unit(rng, r)).collect();
        let inv = d.iter().map(|e| e.unit_inverse().unwrap()).collect();
        ElemFactor::diagonal(d, inv).unwrap()
    } else {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        ElemFactor::elementary(i, j, CoeffElem::random(r, rng, 2, 0.8)).unwrap()
    }
}

fn c6_euclidean() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(6);
    let mut count = 0;
    for p in [2u64, 3, 5] {
        let r = CoeffRing::abelian_group_ring(&["x"], &[p as usize], p).map_err(err)?;
        let fp = CoeffRing::scalars(p);
        let reduce = |e: &CoeffElem| CoeffElem::constant(&fp, e.augmentation());
        let lift = |q: &CoeffElem| CoeffElem::constant(&r, q.constant_term());
        let ideal = NilpotentQuotient { reduce: &reduce, lift: &lift };
        let one = CoeffElem::one(&r);
        for size in [2usize, 3] {
            for _ in 0..17 {
                let k = rng.gen_range(1..=12);
                let fs: Vec<_> = (0..k).map(|_| random_factor(&mut rng, &r, size)).collect();
                // product by plain matrix multiplication
                let a = fs
                    .iter()
                    .try_fold(RMatrix::identity(size, &one), |acc, f| acc.try_mul(&f.to_matrix(size, &one)?))
                    .map_err(err)?;
                let prov = FactorList::from_factors(size, fs, &one).map_err(err)?;
                let out =
                    diagonal_reduce_nilpotent(&a, &InvertibilityWitness::Factors(prov), &ideal, gaussian_diagonalize)
                        .map_err(err)?;
                ensure(matches!(out.factors.first(), Some(ElemFactor::Diagonal { .. })), || "leading D".into())?;
                ensure(out.factors[1..].iter().all(ElemFactor::is_elementary), || "trailing factors".into())?;
                let rebuilt = out
                    .factors
                    .iter()
                    .try_fold(RMatrix::identity(size, &one), |acc, f| acc.try_mul(&f.to_matrix(size, &one)?))
                    .map_err(err)?;
                ensure(rebuilt == a, || format!("p = {p}, n = {size}: D*prod E differs from the input"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} matrices"))
}

/// Units of `F_p[C_p]` by brute force on coefficient vectors with cyclic convolution.
fn local_unit_count(p: usize) -> usize {
    let all: Vec<Vec<usize>> = (0..p.pow(p as u32))
        .map(|mut i| {
            (0..p)
                .map(|_| {
                    let d = i % p;
                    i /= p;
                    d
                })
                .collect()
        })
        .collect();
    let conv = |a: &[usize], b: &[usize]| {
        let mut c = vec![0; p];
        for i in 0..p {
            for j in 0..p {
                c[(i + j) % p] = (c[(i + j) % p] + a[i] * b[j]) % p;
            }
        }
        c
    };
    let mut one = vec![0; p];
    one[0] = 1;
    all.iter().filter(|a| all.iter().any(|b| conv(a, b) == one)).count()
}

fn c7_units() -> Result<String, String> {
    let zi = CoeffRing::univariate("x", cyclotomic(4), 0).map_err(err)?;
    let r1 = unit_search(&zi, 2, 2, 2, 1).map_err(err)?;
    ensure(r1.nontrivial.is_empty(), || format!("Z[i][F_2]: {:?}", r1.nontrivial))?;
    ensure(r1.units.len() == 4 * 5, || format!("Z[i][F_2]: {} units", r1.units.len()))?;
    let z = CoeffRing::scalars(0);
    let r2 = unit_search(&z, 2, 2, 2, 1).map_err(err)?;
    ensure(r2.nontrivial.is_empty(), || format!("Z[F_2]: {:?}", r2.nontrivial))?;
    ensure(r2.units.len() == 2 * 5, || format!("Z[F_2]: {} units", r2.units.len()))?;
    // negative control: y = 1 - x, units c + d*y with c != 0 are 1 and 1 + y = x
    let f2c2 = CoeffRing::abelian_group_ring(&["x"], &[2], 2).map_err(err)?;
    let r3 = unit_search(&f2c2, 0, 1, 1, 0).map_err(err)?;
    let expected: Vec<String> = [(1, 0), (1, 1)]
        .iter()
        .map(|&(c, d)| {
            let y = CoeffElem::one(&f2c2).sub(&CoeffElem::var(&f2c2, 0));
            CoeffElem::constant(&f2c2, c).add(&y.mul(&CoeffElem::constant(&f2c2, d))).to_string()
        })
        .collect();
    let mut got = r3.units.clone();
    got.sort();
    let mut want = expected;
    want.sort();
    ensure(got == want, || format!("F_2[C_2]: {got:?} vs {want:?}"))?;
    ensure(r3.units.len() == local_unit_count(2), || "F_2[C_2] count".into())?;
    let f3c3 = CoeffRing::abelian_group_ring(&["x"], &[3], 3).map_err(err)?;
    let r4 = unit_search(&f3c3, 0, 1, 1, 0).map_err(err)?;
    ensure(r4.units.len() == local_unit_count(3), || format!("F_3[C_3]: {} units", r4.units.len()))?;
    Ok(format!(
        "Z[i][F_2] {} units, Z[F_2] {} units, none nontrivial; F_2[C_2] = {:?}; F_3[C_3] {} units",
        r1.units.len(),
        r2.units.len(),
        r3.units,
        r4.units.len()
    ))
}

fn c8_properties() -> Result<String, String> {
    for (name, suite) in props::SUITES {
        suite(500).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} suites x 500 cases", props::SUITES.len()))
}

fn main() {
    let criteria: [(&str, Check, u64); 8] = [
        ("cyclotomic identity", c1_cyclotomic, 1),
        ("square exactness", c2_squares, 10),
        ("delta family", c3_delta, 5),
        ("distinctness", c4_distinct, 60),
        ("stably-free certificates", c5_certificates, 30),
        ("generalized Euclidean lifting", c6_euclidean, 30),
        ("trivial-unit evidence", c7_units, 120),
        ("property suites", c8_properties, 30),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let res = check();
        let took = start.elapsed();
        let res = match res {
            Ok(msg) if took > Duration::from_secs(limit) => Err(format!("{msg}; over the time limit")),
            r => r,
        };
        let (tag, msg) = match &res {
            Ok(m) => ("PASS", m.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        if res.is_err() {
            failed += 1;
        }
        println!("criterion {}: {tag} {name} ({:.2} s, limit {limit} s): {msg}", i + 1, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
