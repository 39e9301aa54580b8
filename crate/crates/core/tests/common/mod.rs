//! Straight-from-the-definition reference computations, written without the
//! library's helpers so they can serve as an independent oracle.

#![allow(dead_code)]

use nlswap_core::{BoxTable, Scalar};

pub fn s(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

fn bits(word: u32, n: usize) -> Vec<u32> {
    (0..n).map(|i| (word >> i) & 1).collect()
}

fn word(bits: &[u32]) -> u32 {
    bits.iter().enumerate().map(|(i, b)| b << i).sum()
}

/// `√2·cos(π/2·w − π/4)` for `w = |y|`, tabulated over `w mod 4`.
pub fn coefficient(y_bits: &[u32]) -> i64 {
    [1, 1, -1, -1][(y_bits.iter().sum::<u32>() % 4) as usize]
}

pub fn chi(n: usize, b_prime: u8, b_bits: &[u32], y_bits: &[u32]) -> Scalar {
    let sign = if b_bits.iter().sum::<u32>() % 2 == 0 {
        1
    } else {
        -1
    };
    let denom = 3 * (1i64 << n);
    let zero = s(1 + 2 * coefficient(y_bits) * sign, denom);
    if b_prime == 0 {
        zero
    } else {
        s(1, 1i64 << n) - zero
    }
}

/// Unnormalized branch tables, indexed `(X << m) | A` over the survivors in
/// ascending order.
pub fn naive_branches(joint: &BoxTable, consumed: &[usize]) -> [Vec<Scalar>; 2] {
    let n = joint.parties();
    let k = consumed.len();
    let survivors: Vec<usize> = (0..n).filter(|p| !consumed.contains(p)).collect();
    let m = survivors.len();
    let mut out = [
        vec![Scalar::zero(); 1 << (2 * m)],
        vec![Scalar::zero(); 1 << (2 * m)],
    ];
    for b_prime in 0..2u8 {
        for xs in 0..1u32 << m {
            for as_ in 0..1u32 << m {
                let mut total = Scalar::zero();
                for y in 0..1u32 << k {
                    for b in 0..1u32 << k {
                        let (yb, bb) = (bits(y, k), bits(b, k));
                        let (xsb, asb) = (bits(xs, m), bits(as_, m));
                        let mut x_full = vec![0; n];
                        let mut a_full = vec![0; n];
                        for (slot, &p) in consumed.iter().enumerate() {
                            x_full[p] = yb[slot];
                            a_full[p] = bb[slot];
                        }
                        for (slot, &p) in survivors.iter().enumerate() {
                            x_full[p] = xsb[slot];
                            a_full[p] = asb[slot];
                        }
                        let p = joint.get(word(&x_full), word(&a_full));
                        total += chi(k, b_prime, &bb, &yb) * p;
                    }
                }
                out[b_prime as usize][((xs as usize) << m) | as_ as usize] = total;
            }
        }
    }
    out
}

/// `ξ·GSB_n + (1−ξ)·𝟙` from `⊕aᵢ = ⊕_{j<k} xⱼxₖ`.
pub fn isotropic(n: usize, xi: &Scalar) -> BoxTable {
    BoxTable::from_fn(n, |x, a| {
        let xb = bits(x, n);
        let pairs: u32 = (0..n)
            .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
            .map(|(j, k)| xb[j] * xb[k])
            .sum();
        let hit = a.count_ones() % 2 == pairs % 2;
        let uniform = s(1, 1i64 << n);
        let peak = if hit { s(2, 1i64 << n) } else { Scalar::zero() };
        xi * peak + (Scalar::one() - xi) * uniform
    })
    .unwrap()
}

/// Table whose entries are `hit` where the GSB rule holds and `miss` elsewhere.
pub fn two_valued(n: usize, hit: Scalar, miss: Scalar) -> BoxTable {
    let gsb = isotropic(n, &Scalar::one());
    BoxTable::quasi_from_fn(n, |x, a| {
        if gsb.get(x, a).is_zero() {
            miss.clone()
        } else {
            hit.clone()
        }
    })
    .unwrap()
}
