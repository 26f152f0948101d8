//! Charge conventions against the closed dimension formulas, and link
//! pattern enumeration against an independent brute-force oracle.

use proptest::prelude::*;

use sle_lab::params::{make_kappa_params, verify_charge_conventions, KappaParams};
use sle_lab::pattern::{count_link_patterns, count_report, enumerate_link_patterns, LinkPattern};

const KAPPAS: [f64; 6] = [2.0, 8.0 / 3.0, 3.0, 4.0, 6.0, 8.0];

#[test]
fn kappa_parameter_table() {
    let p = make_kappa_params(4.0).unwrap();
    assert!((p.a - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(p.b.abs() < 1e-12);
    assert!((p.beta - 2.0).abs() < 1e-12);
    assert!((p.central_charge - 1.0).abs() < 1e-12);

    let p = make_kappa_params(2.0).unwrap();
    assert!((p.a - 1.0).abs() < 1e-12);
    assert!((p.b + 0.5).abs() < 1e-12);
    assert!((p.beta - 4.0).abs() < 1e-12);
    assert!((p.central_charge + 2.0).abs() < 1e-12);

    let p = make_kappa_params(8.0 / 3.0).unwrap();
    assert!((p.a - 0.75f64.sqrt()).abs() < 1e-12);
    assert!((p.b + 0.75f64.sqrt() / 3.0).abs() < 1e-12);
    assert!((p.beta - 3.0).abs() < 1e-12);
    assert!(p.central_charge.abs() < 1e-12);
}

#[test]
fn charge_conventions_full_sweep() {
    for &kappa in &KAPPAS {
        let p = KappaParams::new(kappa).unwrap();
        for n in 2..=6 {
            for m in 1..=n / 2 {
                let rep = verify_charge_conventions(&p, n, m).unwrap();
                assert!(rep.lambda_ground.is_finite());
                assert!(rep.lambda_excited.is_finite());
            }
        }
    }
}

#[test]
fn dimension_values_at_named_points() {
    let k4 = KappaParams::new(4.0).unwrap();
    let r = verify_charge_conventions(&k4, 2, 1).unwrap();
    assert!(r.lambda_ground.abs() < 1e-14);
    let r = verify_charge_conventions(&k4, 3, 1).unwrap();
    assert!((r.lambda_ground - 0.25).abs() < 1e-14);
    let k6 = KappaParams::new(6.0).unwrap();
    let r = verify_charge_conventions(&k6, 4, 1).unwrap();
    assert!((r.lambda_excited - 10.0 / 3.0).abs() < 1e-13);
}

/// All pairings of a 2m-subset of 1..=n, kept when no two arcs interleave.
fn brute_force_patterns(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn subsets(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == k {
            out.push(acc.clone());
            return;
        }
        for v in start..=n {
            acc.push(v);
            subsets(v + 1, n, k, acc, out);
            acc.pop();
        }
    }
    fn pairings(rest: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if rest.is_empty() {
            return vec![Vec::new()];
        }
        let a = rest[0];
        let mut out = Vec::new();
        for i in 1..rest.len() {
            let b = rest[i];
            let mut remaining: Vec<usize> = Vec::new();
            remaining.extend_from_slice(&rest[1..i]);
            remaining.extend_from_slice(&rest[i + 1..]);
            for mut tail in pairings(&remaining) {
                tail.insert(0, (a, b));
                out.push(tail);
            }
        }
        out
    }
    let crossing = |x: (usize, usize), y: (usize, usize)| -> bool {
        let (a, b) = x;
        let (c, d) = y;
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    };
    let mut supports = Vec::new();
    subsets(1, n, 2 * m, &mut Vec::new(), &mut supports);
    let mut found = Vec::new();
    for sup in supports {
        for arcs in pairings(&sup) {
            let planar = arcs
                .iter()
                .enumerate()
                .all(|(i, &x)| arcs[i + 1..].iter().all(|&y| !crossing(x, y)));
            // A ray must not be trapped under an arc: every point outside
            // the support has to see infinity, i.e. lie under no arc.
            let rays_free = (1..=n)
                .filter(|v| !sup.contains(v))
                .all(|v| arcs.iter().all(|&(a, b)| !(a < v && v < b)));
            if planar && rays_free {
                let mut sorted = arcs.clone();
                sorted.sort();
                found.push(sorted);
            }
        }
    }
    found.sort();
    found.dedup();
    found
}

#[test]
fn enumeration_matches_brute_force_up_to_n10() {
    for n in 1..=10 {
        for m in 0..=n / 2 {
            let oracle = brute_force_patterns(n, m);
            let got = enumerate_link_patterns(n, m).unwrap();
            let mut got_arcs: Vec<Vec<(usize, usize)>> =
                got.iter().map(|p| p.arcs.clone()).collect();
            got_arcs.sort();
            assert_eq!(got_arcs, oracle, "pattern set mismatch at ({n},{m})");
            assert_eq!(count_link_patterns(n, m).unwrap(), oracle.len());
        }
    }
}

#[test]
fn named_counts() {
    assert_eq!(count_link_patterns(4, 1).unwrap(), 3);
    assert_eq!(count_link_patterns(4, 2).unwrap(), 2);
    assert_eq!(count_link_patterns(6, 3).unwrap(), 5);
}

#[test]
fn count_report_juxtaposes_formulas_without_asserting_the_shifted_one() {
    let r = count_report(4, 2).unwrap();
    assert_eq!(r.enumerated, 2);
    assert_eq!(r.formula_shifted, -2);
    assert_eq!(r.formula_ballot, 2);
    for n in 1..=10 {
        for m in 1..=n / 2 {
            let r = count_report(n, m).unwrap();
            assert_eq!(r.formula_ballot as usize, r.enumerated, "ballot vs enumeration ({n},{m})");
        }
    }
}

#[test]
fn counts_are_unimodal_in_m() {
    for n in 2..=10 {
        let counts: Vec<usize> =
            (0..=n / 2).map(|m| count_link_patterns(n, m).unwrap()).collect();
        let mut decreasing = false;
        for w in counts.windows(2) {
            if w[1] < w[0] {
                decreasing = true;
            } else if decreasing && w[1] > w[0] {
                panic!("counts not unimodal for n={n}: {counts:?}");
            }
        }
    }
}

#[test]
fn display_parse_round_trip_over_all_small_patterns() {
    for n in 1..=8 {
        for m in 0..=n / 2 {
            for p in enumerate_link_patterns(n, m).unwrap() {
                let s = p.to_string();
                let q: LinkPattern = s.parse().unwrap();
                assert_eq!(p, q, "round trip failed for {s}");
            }
        }
    }
}

proptest! {
    #[test]
    fn charge_identities_hold_for_generic_kappa(kappa in 0.2f64..16.0, n in 2usize..=8, m in 1usize..=4) {
        prop_assume!(2 * m <= n);
        let p = KappaParams::new(kappa).unwrap();
        // Exponent relations behind the master function table.
        prop_assert!((p.a * p.a * kappa - 2.0).abs() < 1e-12);
        prop_assert!(((-2.0 * p.a) * p.a + 4.0 / kappa).abs() < 1e-12);
        prop_assert!((p.a * (p.a + p.b) - 0.5).abs() < 1e-12);
        // Both closed dimension formulas, ground and excited.
        prop_assert!(verify_charge_conventions(&p, n, m).is_ok());
    }

    #[test]
    fn enumerated_patterns_are_planar_and_distinct(n in 1usize..=9, m in 0usize..=4) {
        prop_assume!(2 * m <= n);
        let pats = enumerate_link_patterns(n, m).unwrap();
        let mut seen = std::collections::HashSet::new();
        for p in &pats {
            prop_assert!(seen.insert(format!("{p}")), "duplicate pattern {p}");
            for (i, &(a, b)) in p.arcs.iter().enumerate() {
                prop_assert!(a < b);
                for &(c, d) in &p.arcs[i + 1..] {
                    let crossed = (a < c && c < b && b < d) || (c < a && a < d && d < b);
                    prop_assert!(!crossed, "interleaving arcs in {p}");
                }
            }
        }
    }
}
