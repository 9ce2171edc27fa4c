//! Seeded random addresses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subarcs_core::Address;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn digits<R: Rng>(rng: &mut R, len: usize, from: &[u8]) -> Vec<u8> {
    (0..len).map(|_| from[rng.random_range(0..from.len())]).collect()
}

/// An eventually periodic address with a preperiod of 2 to 4 digits and a
/// period of 1 to 3 digits, all drawn from `0..=3`.
pub fn random_address<R: Rng>(rng: &mut R) -> Address {
    let pre_len = rng.random_range(2..=4);
    let pre = digits(rng, pre_len, &[0, 1, 2, 3]);
    let per_len = rng.random_range(1..=3);
    let per = digits(rng, per_len, &[0, 1, 2, 3]);
    Address::periodic(pre, per).expect("digits below 4")
}

/// Two random addresses lying in different first-level cells.
pub fn random_subarc<R: Rng>(rng: &mut R) -> (Address, Address) {
    let a = random_address(rng);
    loop {
        let b = random_address(rng);
        if a.digit(0).ok() != b.digit(0).ok() {
            return (a, b);
        }
    }
}

/// A point `1 2^k w` with `k <= n`, where `w` starts with 1 (or with 3 when
/// `k < n`) and continues with a random eventually periodic tail.
pub fn decomposition_address<R: Rng>(rng: &mut R, n: usize) -> Address {
    let k = rng.random_range(0..=n);
    let first = if k < n && rng.random_bool(0.5) { 3 } else { 1 };
    let mut pre = vec![1u8];
    pre.extend(std::iter::repeat_n(2, k));
    pre.push(first);
    let tail_len = rng.random_range(1..=3);
    pre.extend(digits(rng, tail_len, &[0, 1, 2, 3]));
    let per_len = rng.random_range(1..=2);
    let per = digits(rng, per_len, &[0, 1, 2, 3]);
    Address::periodic(pre, per).expect("digits below 4")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let (mut a, mut b) = (rng(42), rng(42));
        for _ in 0..20 {
            assert_eq!(random_subarc(&mut a), random_subarc(&mut b));
        }
    }

    #[test]
    fn subarc_endpoints_in_different_cells() {
        let mut r = rng(7);
        for _ in 0..50 {
            let (a, b) = random_subarc(&mut r);
            assert_ne!(a.digit(0).unwrap(), b.digit(0).unwrap());
        }
    }

    #[test]
    fn decomposition_addresses_have_the_right_shape() {
        let mut r = rng(3);
        for _ in 0..50 {
            let x = decomposition_address(&mut r, 2);
            assert_eq!(x.digit(0).unwrap(), 1);
            let k = x.run_length(1, 2).unwrap().unwrap();
            assert!(k <= 2);
            let next = x.digit(1 + k).unwrap();
            assert!(next == 1 || (next == 3 && k < 2));
        }
    }
}
