use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::Zero;
use quadbound_core::coding::*;
use quadbound_core::genfun::*;
use quadbound_core::series::{int, Rational};

fn window() -> Vec<(usize, usize)> {
    let mut w = Vec::new();
    for n in 0..=3 {
        for p in 1..=3 {
            w.push((n, p));
        }
    }
    w.push((4, 2));
    w.push((2, 4));
    w
}

fn returns_to_zero(c: &BoundaryCode) -> usize {
    let h = c.heights();
    (0..c.steps.len()).filter(|&i| h[i] == 0).count()
}

#[test]
fn decoded_maps_are_valid_and_round_trip() {
    for (n, p) in window() {
        let codes = enumerate_codes(n, p).unwrap();
        let mut seen = HashSet::new();
        for c in &codes {
            let m = decode(c).unwrap();
            assert!(validate_map(&m).is_empty(), "{:?}: {:?}", c, validate_map(&m));
            assert_eq!(m.area(), n);
            assert_eq!(m.half_perimeter(), p);
            assert_eq!(m.num_vertices(), n + p + 1);

            // labels are distances from the origin
            let dist = m.bfs(m.origin().unwrap());
            let mut v = 1;
            for t in &c.trees {
                for &l in t.labels() {
                    assert_eq!(dist[v] as i64, l);
                    v += 1;
                }
            }
            // the boundary read from the root is the path shifted by the base
            let ext = m.external_face();
            let h = c.heights();
            for j in 0..2 * p {
                let d = ext[(2 * p + 1 - j) % (2 * p)];
                assert_eq!(dist[m.tail(d)] as i64, h[j] + c.base as i64);
            }

            assert_eq!(encode(&m).unwrap(), *c);
            assert!(seen.insert(m.canonical_form()), "two codes give the same map");
        }
    }
}

#[test]
fn code_counts_match_series() {
    let k = build_kernel(4, 4);
    for (n, p) in window() {
        if p > 4 {
            continue;
        }
        let total = enumerate_codes(n, p).unwrap().len();
        assert_eq!(BigInt::from(total), closed_count(CountQuery { family: CountFamily::W, n, p }).unwrap());
        for d in 0..=n + 1 {
            let at = enumerate_codes_at_base(n, p, d).unwrap().len();
            assert_eq!(int(at as i64), *k.w_d(d).coeff(n, p), "W_{} at ({}, {})", d, n, p);
        }
    }
    assert_eq!(enumerate_codes(0, 1).unwrap().len(), 1);
    assert_eq!(enumerate_codes_at_base(2, 1, 0).unwrap().len(), 9);
}

#[test]
fn exact_laws_from_codes() {
    let k = build_kernel(4, 4);
    for (n, p) in window() {
        if p > 4 {
            continue;
        }
        // bulk-boundary: each pointed map has one code per closest boundary edge
        let codes = enumerate_codes(n, p).unwrap();
        let mut w = vec![Rational::zero(); n + 1];
        for c in &codes {
            w[c.base] += Rational::new(1.into(), (returns_to_zero(c) as i64).into());
        }
        let tot: Rational = w.iter().sum();
        let law = pmf_table(&k, &Ensemble::FixedNp { n, p }, Statistic::BulkBoundary).unwrap();
        for d in 0..=n {
            assert_eq!(&w[d] / &tot, law[d], "bulk d={} at ({}, {})", d, n, p);
        }

        // boundary-boundary: origin on the boundary, second point a uniform step
        let rooted = enumerate_codes_at_base(n, p, 0).unwrap();
        let mut hist = vec![0i64; p + 1];
        for c in &rooted {
            for &x in &c.heights()[..2 * p] {
                hist[x as usize] += 1;
            }
        }
        let law = pmf_table(&k, &Ensemble::FixedNp { n, p }, Statistic::BoundaryBoundary).unwrap();
        let norm = (2 * p * rooted.len()) as i64;
        for d in 0..=p {
            assert_eq!(Rational::new(hist[d].into(), norm.into()), law[d], "boundary d={} at ({}, {})", d, n, p);
        }
    }
}

#[test]
fn encode_rejects_a_root_away_from_the_minimum() {
    let codes = enumerate_codes(1, 2).unwrap();
    let c = codes.iter().find(|c| c.base == 0).unwrap();
    let m = decode(c).unwrap();
    let ext = m.external_face();
    // twin of the next boundary dart leaves a vertex at height 1
    let moved = m.clone().with_root(ext[ext.len() - 1] ^ 1);
    assert!(encode(&moved).is_err() || encode(&moved).unwrap() != *c);
    assert!(encode(&m.with_origin(None)).is_err());
}

#[test]
fn scale_guard() {
    assert!(matches!(enumerate_codes(9, 2), Err(CodingError::ScaleGuard { .. })));
}
