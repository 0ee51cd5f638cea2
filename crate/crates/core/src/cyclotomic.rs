//! Exact arithmetic in cyclotomic fields `Q(ζ_m)`.
//!
//! Elements are integer polynomials in `ζ` reduced modulo the cyclotomic
//! polynomial `Φ_m`, so an element is zero exactly when its coefficient vector
//! is. Only ring operations are needed here (determinants are taken by
//! division-free minor expansion), which keeps every coefficient an integer.
//! Coefficients are `i128`; overflow panics rather than wrapping.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::group::root_of_unity;

#[derive(Debug, PartialEq, Eq)]
pub struct CyclotomicField {
    order: u64,
    /// Monic `Φ_m`, lowest degree first.
    modulus: Vec<i128>,
    /// `ζ^k` reduced, for `k` in `0..order`.
    powers: Vec<Vec<i128>>,
}

fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let lead = *den.last().unwrap();
    let mut q = vec![0i128; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn] / lead;
        debug_assert_eq!(rem[i + dn] % lead, 0);
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Integer coefficients of `Φ_m`, lowest degree first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i128> {
    let mut num = vec![0i128; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in (1..m).filter(|d| m % d == 0) {
        num = poly_div_exact(&num, &cyclotomic_polynomial(d));
    }
    num
}

impl CyclotomicField {
    pub fn new(order: u64) -> Arc<Self> {
        assert!(order >= 1);
        let modulus = cyclotomic_polynomial(order);
        let deg = modulus.len() - 1;
        let mut powers = Vec::with_capacity(order as usize);
        let mut cur = vec![0i128; deg];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by ζ
            let mut next = vec![0i128; deg + 1];
            next[1..].copy_from_slice(&cur);
            reduce_in_place(&mut next, &modulus);
            next.truncate(deg);
            cur = next;
        }
        Arc::new(Self { order, modulus, powers })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn zero(self: &Arc<Self>) -> Cyclotomic {
        Cyclotomic { field: self.clone(), coeffs: vec![0; self.degree()] }
    }

    pub fn integer(self: &Arc<Self>, n: i128) -> Cyclotomic {
        let mut z = self.zero();
        z.coeffs[0] = n;
        z
    }

    /// `ζ^k`.
    pub fn zeta_pow(self: &Arc<Self>, k: u64) -> Cyclotomic {
        Cyclotomic { field: self.clone(), coeffs: self.powers[(k % self.order) as usize].clone() }
    }

    /// `re + i·im`; requires `4 | order`.
    pub fn gaussian(self: &Arc<Self>, re: i128, im: i128) -> Cyclotomic {
        assert!(self.order % 4 == 0, "Q(zeta_{}) does not contain i", self.order);
        let mut out = self.integer(re);
        let i = self.zeta_pow(self.order / 4);
        for (c, d) in out.coeffs.iter_mut().zip(&i.coeffs) {
            *c = c.checked_add(d.checked_mul(im).expect("overflow")).expect("overflow");
        }
        out
    }
}

fn reduce_in_place(p: &mut Vec<i128>, modulus: &[i128]) {
    let deg = modulus.len() - 1;
    while p.len() > deg {
        let c = p.pop().unwrap();
        if c != 0 {
            let base = p.len() - deg;
            for (j, &m) in modulus[..deg].iter().enumerate() {
                p[base + j] = p[base + j]
                    .checked_sub(c.checked_mul(m).expect("exact arithmetic overflow"))
                    .expect("exact arithmetic overflow");
            }
        }
    }
    p.resize(deg, 0);
}

#[derive(Clone, PartialEq, Eq)]
pub struct Cyclotomic {
    field: Arc<CyclotomicField>,
    coeffs: Vec<i128>,
}

impl Cyclotomic {
    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Complex conjugation, `ζ ↦ ζ⁻¹`.
    pub fn conj(&self) -> Self {
        let m = self.field.order;
        let mut out = self.field.zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = &self.field.powers[((m - k as u64 % m) % m) as usize];
            for (o, &v) in out.coeffs.iter_mut().zip(p) {
                *o = o.checked_add(c.checked_mul(v).expect("overflow")).expect("overflow");
            }
        }
        out
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.field.order;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| root_of_unity(k as u64, m) * c as f64)
            .sum()
    }

    fn assert_same_field(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field.order == other.field.order,
            "mixing Q(zeta_{}) and Q(zeta_{})",
            self.field.order,
            other.field.order
        );
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic(m={}, {:?})", self.field.order, self.coeffs)
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(mut self, rhs: Cyclotomic) -> Cyclotomic {
        self.assert_same_field(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = a.checked_add(b).expect("exact arithmetic overflow");
        }
        self
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        self + (-rhs)
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(mut self) -> Cyclotomic {
        for a in self.coeffs.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        &self * &rhs
    }
}

impl Mul for &Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.assert_same_field(rhs);
        let deg = self.coeffs.len();
        let mut prod = vec![0i128; 2 * deg.max(1) - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b != 0 {
                    prod[i + j] = prod[i + j]
                        .checked_add(a.checked_mul(b).expect("exact arithmetic overflow"))
                        .expect("exact arithmetic overflow");
                }
            }
        }
        reduce_in_place(&mut prod, &self.field.modulus);
        Cyclotomic { field: self.field.clone(), coeffs: prod }
    }
}

/// Determinant by column-wise Laplace expansion over row subsets,
/// `O(2ⁿ·n)` ring operations and no division. `rows` is a square matrix.
pub fn determinant(rows: &[Vec<Cyclotomic>]) -> Cyclotomic {
    let n = rows.len();
    assert!(n > 0 && rows.iter().all(|r| r.len() == n), "square matrix required");
    assert!(n < 26, "minor expansion is limited to n < 26");
    let field = rows[0][0].field.clone();
    // dp[S] = det(rows S, columns 0..|S|)
    let mut dp: Vec<Option<Cyclotomic>> = vec![None; 1 << n];
    dp[0] = Some(field.integer(1));
    for mask in 0usize..(1 << n) {
        let Some(cur) = dp[mask].take() else { continue };
        let col = mask.count_ones() as usize;
        if col == n {
            return cur;
        }
        for r in 0..n {
            if mask & (1 << r) != 0 || rows[r][col].is_zero() {
                continue;
            }
            let above = (mask >> (r + 1)).count_ones();
            let term = &cur * &rows[r][col];
            let term = if above % 2 == 1 { -term } else { term };
            let next = mask | (1 << r);
            dp[next] = Some(match dp[next].take() {
                Some(acc) => acc + term,
                None => term,
            });
        }
    }
    field.zero()
}
