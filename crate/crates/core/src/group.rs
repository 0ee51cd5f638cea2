//! Finite abelian groups as products of cyclic groups, their characters,
//! subgroup embeddings and the CRT index bijection for odd cyclic groups.
//!
//! Elements and characters are coordinate tuples; the dual group is
//! identified with the group itself through the pairing
//! `ξ(x) = exp(2πi Σ xᵢyᵢ/nᵢ)`. Enumeration is lexicographic with the last
//! coordinate varying fastest.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numtheory::{factorize, gcd, lcm, mod_inv};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    moduli: Vec<u64>,
    order: usize,
    exponent: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<u64>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character(pub Vec<u64>);

impl FiniteAbelianGroup {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(invalid("a group needs at least one modulus"));
        }
        if let Some(m) = moduli.iter().find(|&&m| m < 2) {
            return Err(invalid(format!("modulus {m} is smaller than 2")));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m as usize))
            .ok_or_else(|| invalid("group order overflows"))?;
        let exponent = moduli.iter().fold(1, |acc, &m| lcm(acc, m));
        Ok(Self { moduli: moduli.to_vec(), order, exponent })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// Least common multiple of the moduli; every pairing value is a power of
    /// a primitive root of unity of this order.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Cyclic iff the moduli are pairwise coprime.
    pub fn is_cyclic(&self) -> bool {
        for i in 0..self.moduli.len() {
            for j in i + 1..self.moduli.len() {
                if gcd(self.moduli[i], self.moduli[j]) > 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        assert!(index < self.order, "index {index} out of range for order {}", self.order);
        let mut coords = vec![0; self.moduli.len()];
        for (c, &m) in coords.iter_mut().zip(&self.moduli).rev() {
            *c = (index % m as usize) as u64;
            index /= m as usize;
        }
        GroupElement(coords)
    }

    pub fn index_of(&self, x: &GroupElement) -> usize {
        debug_assert!(self.contains(x));
        x.0.iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (&c, &m)| acc * m as usize + c as usize)
    }

    pub fn character_at(&self, index: usize) -> Character {
        Character(self.element_at(index).0)
    }

    pub fn character_index(&self, xi: &Character) -> usize {
        self.index_of(&GroupElement(xi.0.clone()))
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.0.len() == self.moduli.len() && x.0.iter().zip(&self.moduli).all(|(&c, &m)| c < m)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(|i| self.element_at(i))
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        (0..self.order).map(|i| self.character_at(i))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.moduli.len()])
    }

    pub fn trivial_character(&self) -> Character {
        Character(vec![0; self.moduli.len()])
    }

    /// Reduces arbitrary signed coordinates into canonical form.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.moduli.len() {
            return Err(invalid(format!(
                "element has {} coordinates, group has rank {}",
                coords.len(),
                self.moduli.len()
            )));
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| c.rem_euclid(m as i64) as u64)
                .collect(),
        ))
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((&a, &b), &m)| (a + b) % m)
                .collect(),
        )
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        GroupElement(x.0.iter().zip(&self.moduli).map(|(&a, &m)| (m - a) % m).collect())
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, k: u64, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&a, &m)| ((a as u128 * k as u128) % m as u128) as u64)
                .collect(),
        )
    }

    /// Additive order of an element.
    pub fn element_order(&self, x: &GroupElement) -> u64 {
        x.0.iter()
            .zip(&self.moduli)
            .fold(1, |acc, (&a, &m)| lcm(acc, m / gcd(a, m)))
    }

    fn check_shape(&self, coords: &[u64]) -> Result<()> {
        if coords.len() != self.moduli.len() || coords.iter().zip(&self.moduli).any(|(&c, &m)| c >= m) {
            return Err(invalid(format!("{coords:?} is not a member of {self}")));
        }
        Ok(())
    }

    /// Numerator `k` of the pairing phase `ξ(x) = exp(2πi k / exponent)`.
    pub fn pairing_phase(&self, xi: &Character, x: &GroupElement) -> u64 {
        let l = self.exponent as u128;
        let mut acc: u128 = 0;
        for ((&y, &c), &m) in xi.0.iter().zip(&x.0).zip(&self.moduli) {
            let scale = l / m as u128;
            acc = (acc + (y as u128 * c as u128 % m as u128) * scale) % l;
        }
        acc as u64
    }

    /// `ξ(x)`, checked for shape.
    pub fn pairing(&self, xi: &Character, x: &GroupElement) -> Result<Complex64> {
        self.check_shape(&xi.0)?;
        self.check_shape(&x.0)?;
        Ok(root_of_unity(self.pairing_phase(xi, x), self.exponent))
    }

    /// Unchecked pairing for hot loops.
    pub fn pairing_unchecked(&self, xi: &Character, x: &GroupElement) -> Complex64 {
        root_of_unity(self.pairing_phase(xi, x), self.exponent)
    }

    /// Table `t[ξ][x]` of pairing phase numerators in element order.
    pub fn phase_table(&self) -> Vec<Vec<u64>> {
        let elems: Vec<_> = self.elements().collect();
        self.characters()
            .map(|xi| elems.iter().map(|x| self.pairing_phase(&xi, x)).collect())
            .collect()
    }

    /// Embedding of `Z/pZ × Z/pZ` for the smallest prime `p` dividing two
    /// distinct moduli, with generators `(nᵢ/p)·eᵢ` and `(nⱼ/p)·eⱼ`.
    /// `None` exactly when the group is cyclic.
    pub fn find_p_square_subgroup(&self) -> Option<(u64, SubgroupEmbedding)> {
        let mut best: Option<(u64, usize, usize)> = None;
        for i in 0..self.moduli.len() {
            for j in i + 1..self.moduli.len() {
                let g = gcd(self.moduli[i], self.moduli[j]);
                if g > 1 {
                    let p = factorize(g)[0].0;
                    if best.is_none_or(|(q, _, _)| p < q) {
                        best = Some((p, i, j));
                    }
                }
            }
        }
        let (p, i, j) = best?;
        let mut gi = vec![0; self.rank()];
        gi[i] = self.moduli[i] / p;
        let mut gj = vec![0; self.rank()];
        gj[j] = self.moduli[j] / p;
        let sub = FiniteAbelianGroup::new(&[p, p]).expect("p >= 2");
        let emb = SubgroupEmbedding::new(self.clone(), sub, vec![GroupElement(gi), GroupElement(gj)])
            .expect("generators of order p in distinct coordinates embed Z/p x Z/p");
        Some((p, emb))
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Parses the literal syntax `n1xn2x...xnk`, e.g. `3x3` or `7`.
impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let moduli = s
            .split(['x', 'X'])
            .map(|part| {
                part.trim()
                    .parse::<u64>()
                    .map_err(|_| invalid(format!("cannot parse group literal {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&moduli)
    }
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = Error;

    fn try_from(moduli: Vec<u64>) -> Result<Self> {
        Self::new(&moduli)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.moduli
    }
}

pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    // exact values on the axes keep δ-like inputs free of rounding noise
    if 4 * k == n {
        return Complex64::new(0.0, 1.0);
    }
    if 2 * k == n {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == 3 * n {
        return Complex64::new(0.0, -1.0);
    }
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// An injective homomorphism `H → G` given by the images of the standard
/// generators of `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupEmbedding {
    pub host: FiniteAbelianGroup,
    pub sub: FiniteAbelianGroup,
    pub generator_images: Vec<GroupElement>,
}

impl SubgroupEmbedding {
    pub fn new(
        host: FiniteAbelianGroup,
        sub: FiniteAbelianGroup,
        generator_images: Vec<GroupElement>,
    ) -> Result<Self> {
        if generator_images.len() != sub.rank() {
            return Err(invalid("one image per generator of the subgroup is required"));
        }
        for (img, &m) in generator_images.iter().zip(sub.moduli()) {
            host.check_shape(&img.0)?;
            // homomorphism: the image of a generator of order m must be killed by m
            if host.scale(m, img) != host.zero() {
                return Err(invalid(format!("image {img:?} is not annihilated by {m}")));
            }
        }
        let emb = Self { host, sub, generator_images };
        let mut seen = std::collections::HashSet::with_capacity(emb.sub.order());
        for h in emb.sub.elements() {
            if !seen.insert(emb.map(&h)) {
                return Err(invalid("embedding is not injective"));
            }
        }
        Ok(emb)
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let images = (0..group.rank())
            .map(|i| {
                let mut c = vec![0; group.rank()];
                c[i] = 1;
                GroupElement(c)
            })
            .collect();
        Self::new(group.clone(), group.clone(), images).expect("identity embedding")
    }

    pub fn map(&self, h: &GroupElement) -> GroupElement {
        h.0.iter()
            .zip(&self.generator_images)
            .fold(self.host.zero(), |acc, (&c, img)| self.host.add(&acc, &self.host.scale(c, img)))
    }

    pub fn index(&self) -> usize {
        self.host.order() / self.sub.order()
    }
}

/// All characters of `G` whose restriction along `emb` equals `xi_h`.
/// The restriction is compared exactly, as phases in `Q/Z`, on every element
/// of `H`.
pub fn character_extensions(xi_h: &Character, emb: &SubgroupEmbedding) -> Result<Vec<Character>> {
    emb.sub.check_shape(&xi_h.0)?;
    let (g, h) = (&emb.host, &emb.sub);
    let (lg, lh) = (g.exponent() as u128, h.exponent() as u128);
    let sub_elems: Vec<(GroupElement, GroupElement)> = h.elements().map(|e| (emb.map(&e), e)).collect();
    let out: Vec<Character> = g
        .characters()
        .filter(|xi| {
            sub_elems.iter().all(|(img, e)| {
                g.pairing_phase(xi, img) as u128 * lh == h.pairing_phase(xi_h, e) as u128 * lg
            })
        })
        .collect();
    if out.len() != emb.index() {
        return Err(Error::Internal(format!(
            "found {} extensions, expected |G/H| = {}",
            out.len(),
            emb.index()
        )));
    }
    Ok(out)
}

/// CRT bijection `Z/NZ ≅ Π Z/qᵢZ` over the prime-power factors `qᵢ` of an
/// odd `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtBijection {
    n: u64,
    moduli: Vec<u64>,
}

impl CrtBijection {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::Unsupported(format!("CRT index bijection needs odd N >= 3, got {n}")));
        }
        let moduli = factorize(n).into_iter().map(|(p, r)| p.pow(r)).collect();
        Ok(Self { n, moduli })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn forward(&self, x: u64) -> Vec<u64> {
        self.moduli.iter().map(|&q| x % q).collect()
    }

    pub fn backward(&self, residues: &[u64]) -> u64 {
        let n = self.n as u128;
        residues.iter().zip(&self.moduli).fold(0u128, |acc, (&r, &q)| {
            let m = self.n / q;
            let inv = mod_inv(m % q, q).expect("coprime factors") as u128;
            (acc + (r as u128 % q as u128) * inv % q as u128 * m as u128) % n
        }) as u64
    }

    /// `perm[k]` is the standard index of the `k`-th Kronecker basis vector,
    /// Kronecker order being lexicographic in the factor residues.
    pub fn kronecker_permutation(&self) -> Vec<usize> {
        let tuples = FiniteAbelianGroup::new(&self.moduli).expect("moduli >= 3");
        tuples.elements().map(|t| self.backward(&t.0) as usize).collect()
    }
}
