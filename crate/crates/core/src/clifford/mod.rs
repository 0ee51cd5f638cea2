//! `SL(2, Z/NZ)` for odd `N`, Clifford unitaries `U_F`, trace Gauss sums,
//! eigenvector extraction and the eigenvector spark-deficiency search.

mod eigen;
mod gauss;
mod unitary;

pub use eigen::*;
pub use gauss::*;
pub use unitary::*;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numtheory::{gcd, reduce};

/// `F = (a b; c d)` with `ad − bc ≡ 1 (mod n)`, `n` odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SL2ModN {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl fmt::Display for SL2ModN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{}) mod {}", self.a, self.b, self.c, self.d, self.n)
    }
}

fn mulmod(x: u64, y: u64, n: u64) -> u64 {
    (x as u128 * y as u128 % n as u128) as u64
}

impl SL2ModN {
    pub fn new(n: u64, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::Unsupported(format!("SL(2, Z/{n}Z) is only handled for odd n >= 3")));
        }
        let f = Self { n, a: reduce(a, n), b: reduce(b, n), c: reduce(c, n), d: reduce(d, n) };
        if f.det() != 1 {
            return Err(invalid(format!("det {f} = {} is not 1", f.det())));
        }
        Ok(f)
    }

    pub fn identity(n: u64) -> Result<Self> {
        Self::new(n, 1, 0, 0, 1)
    }

    /// The order-3 Zauner matrix `(0 −1; 1 −1)`.
    pub fn zauner(n: u64) -> Result<Self> {
        Self::new(n, 0, -1, 1, -1)
    }

    fn det(&self) -> u64 {
        let n = self.n;
        (mulmod(self.a, self.d, n) + n - mulmod(self.b, self.c, n)) % n
    }

    pub fn trace(&self) -> u64 {
        (self.a + self.d) % self.n
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "moduli differ");
        let n = self.n;
        let m = |x, y| mulmod(x, y, n);
        Self {
            n,
            a: (m(self.a, o.a) + m(self.b, o.c)) % n,
            b: (m(self.a, o.b) + m(self.b, o.d)) % n,
            c: (m(self.c, o.a) + m(self.d, o.c)) % n,
            d: (m(self.c, o.b) + m(self.d, o.d)) % n,
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self { n: self.n, a: 1, b: 0, c: 0, d: 1 };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0 && self.c == 0 && self.d == 1
    }

    /// Least `m ≥ 1` with `F^m = I`.
    pub fn order(&self) -> u64 {
        let mut cur = *self;
        let mut m = 1;
        while !cur.is_identity() {
            cur = cur.mul(self);
            m += 1;
        }
        m
    }

    /// `Fλ` for a column vector `λ = (λ₁, λ₂)`.
    pub fn apply(&self, l: (u64, u64)) -> (u64, u64) {
        let n = self.n;
        ((mulmod(self.a, l.0, n) + mulmod(self.b, l.1, n)) % n, (mulmod(self.c, l.0, n) + mulmod(self.d, l.1, n)) % n)
    }

    /// Entries reduced modulo a divisor `q` of `n`.
    pub fn reduce_mod(&self, q: u64) -> Result<Self> {
        if self.n % q != 0 {
            return Err(invalid(format!("{q} does not divide {}", self.n)));
        }
        Self::new(q, self.a as i64, self.b as i64, self.c as i64, self.d as i64)
    }

    pub fn b_invertible(&self) -> bool {
        gcd(self.b, self.n) == 1
    }

    pub fn d_invertible(&self) -> bool {
        gcd(self.d, self.n) == 1
    }

    /// All of `SL(2, Z/nZ)`, entries in lexicographic order `(a, b, c, d)`.
    pub fn all(n: u64) -> Result<Vec<Self>> {
        Self::identity(n)?;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let f = Self { n, a, b, c, d };
                        if f.det() == 1 {
                            out.push(f);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Uniform element, by rejection.
    pub fn random<R: Rng + ?Sized>(n: u64, rng: &mut R) -> Result<Self> {
        Self::identity(n)?;
        loop {
            let f = Self {
                n,
                a: rng.random_range(0..n),
                b: rng.random_range(0..n),
                c: rng.random_range(0..n),
                d: rng.random_range(0..n),
            };
            if f.det() == 1 {
                return Ok(f);
            }
        }
    }

    /// `⟨F⟩`-orbits on `(Z/nZ)²`, each listed from its smallest point, as
    /// shift-major indices `λ₁·n + λ₂`; orbits are ordered by that smallest
    /// point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let total = (n * n) as usize;
        let mut seen = vec![false; total];
        let mut out = Vec::new();
        for start in 0..total {
            if seen[start] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut cur = ((start as u64) / n, (start as u64) % n);
            loop {
                let idx = (cur.0 * n + cur.1) as usize;
                if seen[idx] {
                    break;
                }
                seen[idx] = true;
                orbit.push(idx);
                cur = self.apply(cur);
            }
            out.push(orbit);
        }
        out
    }
}

/// Number of `x ∈ (Z/NZ)²` whose orbit `x, Fx, …, F^{ord F − 1}x` has no
/// repetition.
pub fn count_f_full(f: &SL2ModN) -> u64 {
    let n = f.order() as usize;
    f.orbits().iter().filter(|o| o.len() == n).map(|o| o.len() as u64).sum()
}
