//! NTT-based ring multiplication against an independent schoolbook oracle.

use fhe::ring::{ring_mul, Domain, Modulus, NttTable, RingElement, Sampler};

/// Quadratic negacyclic convolution in i128, reduced at the end. Shares no
/// code with the NTT path.
fn schoolbook_negacyclic(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut acc = vec![0i128; n];
    for i in 0..n {
        for j in 0..n {
            let prod = a[i] as i128 * b[j] as i128 % q as i128;
            let k = i + j;
            if k < n {
                acc[k] += prod;
            } else {
                acc[k - n] -= prod; // x^n = -1
            }
        }
    }
    acc.into_iter()
        .map(|x| x.rem_euclid(q as i128) as u64)
        .collect()
}

fn check_degree(n: usize, q: u64, pairs: usize, seed: u8) {
    let m = Modulus::new(q, n).unwrap();
    let table = NttTable::new(n, m).unwrap();
    let tables = vec![table];
    let moduli = vec![m];
    let mut s = Sampler::from_seed([seed; 32]);
    for _ in 0..pairs {
        let a = s.uniform(n, &moduli, Domain::Coefficient);
        let b = s.uniform(n, &moduli, Domain::Coefficient);
        let fast = ring_mul(&a, &b, &tables).unwrap();
        let slow = schoolbook_negacyclic(&a.residues()[0], &b.residues()[0], q);
        assert_eq!(fast.residues()[0], slow, "n = {n}, q = {q}");
    }
}

#[test]
fn matches_schoolbook_small_prime() {
    // q = 257 = 1 mod 2n for n in {8, 16, 64}; exercises heavy wraparound.
    for n in [8usize, 16, 64] {
        check_degree(n, 257, 200, n as u8);
    }
}

#[test]
fn matches_schoolbook_large_prime() {
    // 50-bit prime, all supported test degrees.
    let q = fhe::ring::generate_primes(50, 512, 1, &[]).unwrap()[0];
    for n in [8usize, 16, 64, 256] {
        check_degree(n, q, 100, 100 + n as u8);
    }
}

#[test]
fn identity_and_negacyclic_wrap() {
    let n = 8;
    let q = 257;
    let m = Modulus::new(q, n).unwrap();
    let tables = vec![NttTable::new(n, m).unwrap()];
    let moduli = vec![m];
    // x^4 * x^4 = x^8 = -1.
    let mut x4 = RingElement::zero(n, &moduli, Domain::Coefficient);
    x4.residues_mut()[0][4] = 1;
    let sq = ring_mul(&x4, &x4, &tables).unwrap();
    let mut expect = vec![0u64; n];
    expect[0] = q - 1;
    assert_eq!(sq.residues()[0], expect);
}
