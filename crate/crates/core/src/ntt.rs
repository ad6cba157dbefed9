//! Truncated convolution modulo an arbitrary word-size modulus.
//!
//! Long products go through number-theoretic transforms over three (or four)
//! NTT-friendly primes and are recombined with Garner's algorithm directly
//! modulo the target. Short products use schoolbook multiplication.

use rayon::prelude::*;

const P1: u32 = 998_244_353;
const P2: u32 = 167_772_161;
const P3: u32 = 469_762_049;
const P4: u32 = 754_974_721;

/// Below this many coefficient products schoolbook wins.
const SCHOOLBOOK_WORK: usize = 1 << 16;
/// Transforms shorter than this run the primes sequentially.
const PARALLEL_LEN: usize = 1 << 15;

#[inline]
fn mulm<const P: u32>(a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) % P as u64) as u32
}

fn powm<const P: u32>(mut a: u32, mut e: u64) -> u32 {
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm::<P>(acc, a);
        }
        a = mulm::<P>(a, a);
        e >>= 1;
    }
    acc
}

fn generator(p: u32) -> u32 {
    match p {
        P1 | P2 | P3 => 3,
        P4 => 11,
        _ => unreachable!("unknown transform prime"),
    }
}

fn ntt<const P: u32>(a: &mut [u32], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let g = generator(P);
    let mut len = 2;
    while len <= n {
        let mut w = powm::<P>(g, ((P - 1) as u64) / len as u64);
        if invert {
            w = powm::<P>(w, (P - 2) as u64);
        }
        let half = len / 2;
        let mut roots = Vec::with_capacity(half);
        let mut x = 1u32;
        for _ in 0..half {
            roots.push(x);
            x = mulm::<P>(x, w);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = mulm::<P>(hi[k], roots[k]);
                let s = u + v;
                lo[k] = if s >= P { s - P } else { s };
                hi[k] = if u >= v { u - v } else { u + P - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = powm::<P>(n as u32 % P, (P - 2) as u64);
        for x in a.iter_mut() {
            *x = mulm::<P>(*x, n_inv);
        }
    }
}

fn cyclic<const P: u32>(a: &[u32], b: &[u32], size: usize) -> Vec<u32> {
    let mut fa = vec![0u32; size];
    let mut fb = vec![0u32; size];
    for (d, &s) in fa.iter_mut().zip(a) {
        *d = s % P;
    }
    for (d, &s) in fb.iter_mut().zip(b) {
        *d = s % P;
    }
    ntt::<P>(&mut fa, false);
    ntt::<P>(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = mulm::<P>(*x, *y);
    }
    ntt::<P>(&mut fa, true);
    fa
}

fn dispatch(p: u32, a: &[u32], b: &[u32], size: usize) -> Vec<u32> {
    match p {
        P1 => cyclic::<P1>(a, b, size),
        P2 => cyclic::<P2>(a, b, size),
        P3 => cyclic::<P3>(a, b, size),
        P4 => cyclic::<P4>(a, b, size),
        _ => unreachable!(),
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Number of transform primes needed so that their product exceeds the
/// largest possible exact convolution coefficient.
fn primes_needed(modulus: u32, terms: usize) -> usize {
    let bound = (terms as u128) * ((modulus as u128 - 1).pow(2));
    let three = P1 as u128 * P2 as u128 * P3 as u128;
    if bound < three {
        3
    } else {
        4
    }
}

/// Schoolbook truncated product, exposed as a test oracle.
pub fn schoolbook(a: &[u32], b: &[u32], modulus: u32, out_len: usize) -> Vec<u32> {
    let mut acc = vec![0u128; out_len];
    for (i, &x) in a.iter().enumerate().take(out_len) {
        if x == 0 {
            continue;
        }
        let lim = (out_len - i).min(b.len());
        for (j, &y) in b[..lim].iter().enumerate() {
            acc[i + j] += x as u128 * y as u128;
        }
    }
    acc.into_iter().map(|v| (v % modulus as u128) as u32).collect()
}

/// First `out_len` coefficients of `a * b`, reduced modulo `modulus`.
/// Inputs must already be reduced.
pub fn convolve(a: &[u32], b: &[u32], modulus: u32, out_len: usize) -> Vec<u32> {
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return vec![0; out_len];
    }
    if a.len().min(b.len()) < 32 || a.len() * b.len() <= SCHOOLBOOK_WORK {
        return schoolbook(a, b, modulus, out_len);
    }
    let full = a.len() + b.len() - 1;
    let size = full.next_power_of_two();
    let k = primes_needed(modulus, a.len().min(b.len()));
    let primes = &[P1, P2, P3, P4][..k];
    let residues: Vec<Vec<u32>> = if size >= PARALLEL_LEN {
        primes.par_iter().map(|&p| dispatch(p, a, b, size)).collect()
    } else {
        primes.iter().map(|&p| dispatch(p, a, b, size)).collect()
    };
    garner(&residues, primes, modulus, out_len.min(full), out_len)
}

fn garner(res: &[Vec<u32>], primes: &[u32], modulus: u32, valid: usize, out_len: usize) -> Vec<u32> {
    let k = primes.len();
    let p: Vec<u64> = primes.iter().map(|&x| x as u64).collect();
    // inv[i][j] = p_i^{-1} mod p_j for i < j
    let mut inv = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            inv[i][j] = inv_mod(p[i], p[j]);
        }
    }
    let m = modulus as u64;
    // prefix products of primes reduced mod the target modulus
    let mut pref = vec![1u64 % m; k];
    for i in 1..k {
        pref[i] = pref[i - 1] * (p[i - 1] % m) % m;
    }
    let mut out = vec![0u32; out_len];
    for (idx, slot) in out.iter_mut().enumerate().take(valid) {
        let mut digits = [0u64; 4];
        for j in 0..k {
            let mut x = res[j][idx] as u64;
            for i in 0..j {
                // x = (x - digit_i) * p_i^{-1} mod p_j
                let d = digits[i] % p[j];
                x = (x + p[j] - d) % p[j] * inv[i][j] % p[j];
            }
            digits[j] = x;
        }
        let mut v = 0u64;
        for j in 0..k {
            v = (v + digits[j] % m * pref[j]) % m;
        }
        *slot = v as u32;
    }
    out
}
