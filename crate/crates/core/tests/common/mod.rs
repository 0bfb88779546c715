//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use phire_core::field::MODULUS;
use phire_core::gates::{CompositePoly, Scalars};
use phire_core::{Binding, Fr};

pub fn modulus() -> BigUint {
    let bytes: Vec<u8> = MODULUS.iter().flat_map(|l| l.to_le_bytes()).collect();
    BigUint::from_bytes_le(&bytes)
}

pub fn to_big(x: &Fr) -> BigUint {
    BigUint::from_bytes_le(&x.to_bytes_le())
}

pub fn from_big(x: &BigUint) -> Fr {
    let mut b = x.to_bytes_le();
    b.resize(32, 0);
    Fr::from_bytes_le(&b.try_into().unwrap()).unwrap()
}

/// Modular inverse by the extended Euclidean algorithm.
pub fn egcd_inverse(x: &BigUint, p: &BigUint) -> BigUint {
    let (mut r0, mut r1) = (
        BigInt::from_biguint(Sign::Plus, p.clone()),
        BigInt::from_biguint(Sign::Plus, x.clone()),
    );
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    assert!(r0.is_one(), "not invertible");
    let p = BigInt::from_biguint(Sign::Plus, p.clone());
    ((t0 % &p + &p) % &p).to_biguint().unwrap()
}

fn fold(t: &[Fr], r: Fr) -> Vec<Fr> {
    t.chunks(2)
        .map(|c| (Fr::ONE - r) * c[0] + r * c[1])
        .collect()
}

fn eval_terms(poly: &CompositePoly, coeffs: &[Fr], values: &[Fr]) -> Fr {
    let mut sum = Fr::ZERO;
    for (term, c) in poly.terms.iter().zip(coeffs) {
        let mut v = *c;
        for &f in &term.factors {
            v *= values[f];
        }
        sum += v;
    }
    sum
}

/// Claim and round evaluations at `0..=degree` by summing the hypercube
/// directly, with the given challenges fixing earlier variables.
pub fn brute_force_rounds(
    poly: &CompositePoly,
    binding: &Binding,
    scalars: &Scalars,
    challenges: &[Fr],
) -> (Fr, Vec<Vec<Fr>>) {
    let coeffs = poly.term_coeffs(scalars).unwrap();
    let mut tables: Vec<Vec<Fr>> = poly
        .inputs
        .iter()
        .map(|m| binding.get(&m.id).unwrap().evals().to_vec())
        .collect();
    let n = tables[0].len();
    let claim = (0..n)
        .map(|x| {
            let vals: Vec<Fr> = tables.iter().map(|t| t[x]).collect();
            eval_terms(poly, &coeffs, &vals)
        })
        .sum();
    let d = poly.degree();
    let mut rounds = Vec::new();
    for &r in challenges {
        let half = tables[0].len() / 2;
        let mut evals = Vec::with_capacity(d + 1);
        for t in 0..=d {
            let t = Fr::from(t as u64);
            let mut s = Fr::ZERO;
            for x in 0..half {
                let vals: Vec<Fr> = tables
                    .iter()
                    .map(|tb| (Fr::ONE - t) * tb[2 * x] + t * tb[2 * x + 1])
                    .collect();
                s += eval_terms(poly, &coeffs, &vals);
            }
            evals.push(s);
        }
        rounds.push(evals);
        tables = tables.iter().map(|tb| fold(tb, r)).collect();
    }
    (claim, rounds)
}

/// Evaluates a round polynomial given by its values at `0..=d` with Lagrange's formula.
pub fn lagrange_eval(evals: &[Fr], r: Fr) -> Fr {
    let n = evals.len();
    let mut out = Fr::ZERO;
    for (i, &e) in evals.iter().enumerate() {
        let mut num = Fr::ONE;
        let mut den = Fr::ONE;
        for j in 0..n {
            if i != j {
                num *= r - Fr::from(j as u64);
                den *= Fr::from_i64(i as i64 - j as i64);
            }
        }
        out += e * num * den.inverse().unwrap();
    }
    out
}

/// Minimum node count for a degree-`d` term on `E` engines, by BFS over
/// remaining-factor counts.
pub fn bfs_nodes(d: usize, e: usize) -> usize {
    if d == 0 {
        return 0;
    }
    use std::collections::VecDeque;
    let mut seen = vec![false; d + 1];
    let mut q = VecDeque::new();
    // state: (remaining factors, has tmp, nodes so far)
    q.push_back((d, false, 0usize));
    while let Some((rem, tmp, nodes)) = q.pop_front() {
        if rem == 0 {
            return nodes;
        }
        let cap = if tmp { e - 1 } else { e };
        for take in 1..=cap.min(rem) {
            let next = rem - take;
            if next == 0 || !seen[next] {
                if next > 0 {
                    seen[next] = true;
                }
                q.push_back((next, true, nodes + 1));
            }
        }
    }
    unreachable!()
}
