//! Small integer helpers shared by the group, Clifford and cyclotomic code.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn mod_inv(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = ((a % n) as i128, n as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(n as i128) as u64)
}

/// Prime factorization as `(p, r)` pairs with increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut r = 0;
            while n % p == 0 {
                n /= p;
                r += 1;
            }
            out.push((p, r));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Reduces a signed integer into `0..n`.
pub fn reduce(x: i64, n: u64) -> u64 {
    x.rem_euclid(n as i64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses_and_factors() {
        assert_eq!(mod_inv(2, 9), Some(5));
        assert_eq!(mod_inv(3, 9), None);
        assert_eq!(factorize(45), vec![(3, 2), (5, 1)]);
        assert_eq!(euler_phi(9), 6);
        assert_eq!(euler_phi(15), 8);
        assert!(is_prime(7) && !is_prime(9) && !is_prime(1));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(49, 7), 85_900_584);
        assert_eq!(binomial(25, 5), 53_130);
        assert_eq!(binomial(9, 3), 84);
        assert_eq!(binomial(3, 5), 0);
    }
}
