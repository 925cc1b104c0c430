//! Acceptance gate: one test per criterion, each ending in a single
//! `[acceptance] <name>: PASS` line with the measured quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lehmerlab_core::arith::is_prime;
use lehmerlab_core::charsums::{
    principal_progression_count, second_moment, second_moment_bound, ProgressionInterval,
};
use lehmerlab_core::discrepancy::{box_discrepancy, region_discrepancy, DiscrepancyMode};
use lehmerlab_core::lehmer::{
    convex_hull, error_exponent_composite, hull_contains, inverse_pair_hull, threshold_exponent,
};
use lehmerlab_core::rat::{rat, rat_zero};
use lehmerlab_core::{
    CharacterGroup, Error, LehmerInstance, Modulus, RegionClass, RegionSpec, TorusBox,
};

fn random_instance_parts(
    rng: &mut ChaCha8Rng,
    q: u64,
    k: usize,
) -> (Vec<u64>, Vec<i64>, TorusBox) {
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    let a_max = 9.min(q - 1);
    for _ in 0..=k {
        let ai = loop {
            let c = rng.gen_range(1..=a_max);
            if lehmerlab_core::arith::gcd(c, q) == 1 {
                break c;
            }
        };
        a.push(ai);
        b.push(rng.gen_range(0..ai) as i64);
    }
    let mut alpha = Vec::with_capacity(k + 1);
    let mut beta = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        let den = rng.gen_range(2..=10i128);
        let lo = rng.gen_range(0..den);
        let hi = rng.gen_range(lo + 1..=den);
        alpha.push(rat(lo, den));
        beta.push(rat(hi, den));
    }
    (a, b, TorusBox::new(alpha, beta).unwrap())
}

#[test]
fn criterion_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut done = 0u32;
    let mut composite = 0u32;
    while done < 200 {
        let force_composite = composite < 50 && done >= 150 - composite;
        let q = loop {
            let c = rng.gen_range(6..=300u64);
            if force_composite && is_prime(c) {
                continue;
            }
            break c;
        };
        let k = rng.gen_range(1..=3usize);
        let m = Modulus::new(q).unwrap();
        let (a, b, sigma) = random_instance_parts(&mut rng, q, k);
        let inst = LehmerInstance::new(&m, a, b).unwrap();
        let direct = match inst.count_in_box(&sigma, 2_000_000) {
            Ok(n) => n,
            Err(Error::Capacity(_)) => continue,
            Err(e) => panic!("unexpected error: {e}"),
        };
        let via_chars = inst.count_in_box_charsum(&sigma).unwrap();
        assert_eq!(
            direct, via_chars,
            "q={q} k={k} a={:?} b={:?}",
            inst.a(),
            inst.b()
        );
        if !m.is_prime() {
            composite += 1;
        }
        done += 1;
    }
    assert!(composite >= 50, "only {composite} composite instances");
    println!(
        "[acceptance] oracle equivalence (dual counting routes): PASS \
         (200 instances, {composite} composite, exact equality)"
    );
}

#[test]
fn criterion_orthogonality() {
    for q in 2..=300u64 {
        let m = Modulus::new(q).unwrap();
        let g = CharacterGroup::new(&m);
        for u in 0..q {
            // The exact evaluator returns the normalized indicator: the raw
            // character sum is phi(q) exactly when u = 1 and 0 otherwise.
            let expect = if u == 1 { 1 } else { 0 };
            assert_eq!(g.orthogonality_sum_exact(u), expect, "q={q} u={u}");
        }
    }
    println!(
        "[acceptance] character orthogonality: PASS \
         (all u in [0, q), all q <= 300; sum is phi(q) at u=1 and 0 elsewhere, exact)"
    );
}

#[test]
fn criterion_second_moment() {
    let mut rng = ChaCha8Rng::seed_from_u64(4051);
    for case in 0..1000 {
        let q = rng.gen_range(3..=300u64);
        let m = Modulus::new(q).unwrap();
        let g = CharacterGroup::new(&m);
        let a = loop {
            let c = rng.gen_range(1..=10u64);
            if lehmerlab_core::arith::gcd(c, q) == 1 {
                break c;
            }
        };
        let l = rng.gen_range(1..=q);
        let k_off = rng.gen_range(0..=q - l);
        let b = rng.gen_range(0..a) as i64;
        let iv = ProgressionInterval::new(k_off, l, a, b).unwrap();
        let value = second_moment(&g, &iv).unwrap();
        let bound = second_moment_bound(&g, &iv);
        assert!(
            value <= bound + 1e-6,
            "case {case}: q={q} a={a} L={l}: {value} > {bound}"
        );
        if case < 100 {
            // The proof identity: the moment collapses to phi(q) times the
            // number of unit members, since the window is at most one period.
            let coincidences = iv.members().filter(|&n| m.is_unit(n)).count() as f64;
            let identity = m.phi() as f64 * coincidences;
            assert!(
                (value - identity).abs() <= 1e-6 * identity.max(1.0),
                "case {case}: q={q}: {value} vs {identity}"
            );
        }
    }
    println!(
        "[acceptance] second moment bound and proof identity: PASS \
         (1000 cases within 1e-6, 100 identity checks)"
    );
}

#[test]
fn criterion_principal_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(733);
    for case in 0..1000 {
        let q = rng.gen_range(3..=300u64);
        let m = Modulus::new(q).unwrap();
        let a = loop {
            let c = rng.gen_range(1..=12u64);
            if lehmerlab_core::arith::gcd(c, q) == 1 {
                break c;
            }
        };
        let l = rng.gen_range(1..=q);
        let k_off = rng.gen_range(0..=q - l);
        let b = rng.gen_range(0..a) as i64;
        let iv = ProgressionInterval::new(k_off, l, a, b).unwrap();
        let pc = principal_progression_count(&m, &iv).unwrap();
        assert!(
            pc.within_bound(),
            "case {case}: q={q} a={a}: |{} - {}| > {}",
            pc.exact,
            pc.main,
            pc.error_bound
        );
    }
    println!(
        "[acceptance] principal progression count within divisor bound: PASS (1000 cases, exact)"
    );
}

#[test]
fn criterion_trivial_moduli() {
    for q in 2..=500u64 {
        let m = Modulus::new(q).unwrap();
        let phi = m.phi();
        for k in 1..=3usize {
            let inst = LehmerInstance::new(&m, vec![1; k + 1], vec![0; k + 1]).unwrap();
            let count = inst.count_all(200_000_000).unwrap();
            assert_eq!(count, phi.pow(k as u32), "q={q} k={k}");
        }
    }
    println!(
        "[acceptance] unconstrained instances count phi(q)^k: PASS (q <= 500, k <= 3, exact)"
    );
}

#[test]
fn criterion_exponent_tables() {
    let thresholds = [(2, rat(3, 4)), (3, rat(4, 3)), (4, rat(15, 8)), (5, rat(5, 2)), (6, rat(35, 12))];
    for (k, expect) in thresholds {
        assert_eq!(threshold_exponent(k).unwrap(), expect, "k={k}");
    }
    for k in 2..=6u32 {
        assert_eq!(
            error_exponent_composite(k, 1).unwrap(),
            rat(k as i128 + 1, 2),
            "k={k}"
        );
    }
    println!(
        "[acceptance] exponent tables: PASS (thresholds 3/4, 4/3, 15/8, 5/2, 35/12; \
         r=1 exponent (k+1)/2 for k=2..6, exact rational equality)"
    );
}

#[test]
fn criterion_discrepancy_exact_kernel() {
    for n in 1..=32i128 {
        let f = lehmerlab_core::PointSet::new((0..n).map(|i| vec![rat(i, n)]).collect()).unwrap();
        let d = box_discrepancy(&f, DiscrepancyMode::Exact, 1 << 22).unwrap();
        assert_eq!(d, 1.0 / n as f64, "grid n={n}");
    }
    let f = lehmerlab_core::PointSet::new(vec![vec![rat_zero()], vec![rat(1, 2)]]).unwrap();
    assert_eq!(
        box_discrepancy(&f, DiscrepancyMode::Exact, 1 << 22).unwrap(),
        0.5
    );
    // Joint solution set of q = 5: the closed box [1/5, 4/5]^2 holds all four
    // points with volume 9/25, giving 16/25 (matches the brute-force oracle).
    let m = Modulus::new(5).unwrap();
    let inst = LehmerInstance::new(&m, vec![1, 1], vec![0, 0]).unwrap();
    let joint = inst.point_set_joint(1000).unwrap();
    assert_eq!(
        box_discrepancy(&joint, DiscrepancyMode::Exact, 1 << 22).unwrap(),
        0.64
    );
    println!(
        "[acceptance] exact discrepancy kernel: PASS (grids 1/N for N <= 32, half-mass 1/2, \
         joint q=5 set 16/25; all exact)"
    );
}

#[test]
fn criterion_transfer_bound() {
    // Ten one-dimensional and ten two-dimensional marginal sets against the
    // built-in ball; the box discrepancy is exact in every case.
    let one_d: [(u64, [u64; 2], [i64; 2]); 10] = [
        (409, [2, 3], [1, 2]),
        (613, [3, 4], [2, 1]),
        (809, [2, 5], [1, 3]),
        (1009, [1, 1], [0, 0]),
        (1213, [4, 3], [3, 0]),
        (1409, [2, 3], [0, 1]),
        (1609, [5, 2], [2, 1]),
        (1801, [3, 5], [1, 4]),
        (2003, [2, 7], [1, 5]),
        (2213, [6, 5], [5, 2]),
    ];
    let two_d: [(u64, [u64; 3], [i64; 3]); 10] = [
        (83, [9, 10, 11], [1, 2, 3]),
        (101, [7, 8, 9], [1, 1, 1]),
        (113, [9, 10, 7], [2, 3, 1]),
        (131, [8, 9, 10], [3, 4, 5]),
        (151, [10, 11, 9], [0, 1, 2]),
        (173, [9, 8, 11], [4, 3, 2]),
        (193, [10, 9, 11], [1, 0, 1]),
        (211, [9, 10, 8], [2, 2, 2]),
        (233, [11, 10, 9], [5, 6, 7]),
        (251, [9, 10, 11], [8, 9, 10]),
    ];
    let mut worst = 0.0f64;
    let mut run = |q: u64, a: &[u64], b: &[i64]| {
        let m = Modulus::new(q).unwrap();
        let inst = LehmerInstance::new(&m, a.to_vec(), b.to_vec()).unwrap();
        let f = inst.point_set_marginal(10_000_000).unwrap();
        let d = box_discrepancy(&f, DiscrepancyMode::Exact, 200_000_000).unwrap();
        let region = if f.dim() == 1 {
            RegionSpec::ball(vec![0.5], 0.25).unwrap()
        } else {
            RegionSpec::ball(vec![0.5, 0.5], 0.25).unwrap()
        };
        let class = RegionClass::calibrated(region).unwrap();
        let delta = region_discrepancy(&f, class.region()).unwrap();
        let bound = class.transfer_bound(d).unwrap();
        let ratio = delta / bound;
        println!(
            "  q={q} k={} points={} D={d:.6} C={:.6} delta={delta:.6} bound={bound:.6} ratio={ratio:.4}",
            inst.k(),
            f.len(),
            class.shell_constant()
        );
        assert!(
            delta <= 10.0 * bound,
            "q={q}: region discrepancy {delta} above 10x transfer bound {bound}"
        );
        if ratio > worst {
            worst = ratio;
        }
    };
    for (q, a, b) in &one_d {
        run(*q, a, b);
    }
    for (q, a, b) in &two_d {
        run(*q, a, b);
    }
    println!(
        "[acceptance] region discrepancy within 10x transfer bound: PASS \
         (20 instances, worst ratio {worst:.4})"
    );
}

#[test]
fn criterion_spread_and_hull_statistics() {
    // H(7) against the in-place exhaustive oracle.
    let m = Modulus::new(7).unwrap();
    let inst = LehmerInstance::new(&m, vec![1, 1], vec![0, 0]).unwrap();
    let h7 = inst.h_statistic(1000).unwrap();
    let oracle_h7 = (1..7u64)
        .filter(|&n| m.is_unit(n))
        .map(|n| n.abs_diff(m.inverse(n).unwrap()))
        .max()
        .unwrap();
    assert_eq!(h7, 2);
    assert_eq!(h7, oracle_h7);

    // V(5) against a direct orientation check of all 4 points.
    let m5 = Modulus::new(5).unwrap();
    let (hull5, v5) = inverse_pair_hull(&m5).unwrap();
    assert_eq!(v5, 4);
    let mut expected = vec![[1i64, 1], [2, 3], [3, 2], [4, 4]];
    let mut got = hull5.clone();
    expected.sort();
    got.sort();
    assert_eq!(got, expected);

    // Idempotence and containment across all primes up to 500.
    let mut checked = 0;
    for q in (3..=500u64).filter(|&q| is_prime(q)) {
        let m = Modulus::new(q).unwrap();
        let (hull, v) = inverse_pair_hull(&m).unwrap();
        assert_eq!(convex_hull(&hull), hull, "q={q} hull not idempotent");
        assert_eq!(v, hull.len());
        for n in 1..q {
            let p = [n as i64, m.inverse(n).unwrap() as i64];
            assert!(hull_contains(&hull, p), "q={q}: point {p:?} outside hull");
        }
        checked += 1;
    }
    println!(
        "[acceptance] spread and hull statistics: PASS \
         (H(7)=2, V(5)=4 vs exhaustive oracles; hull idempotence and containment \
         for {checked} primes q <= 500)"
    );
}
