//! Windows, time–frequency shifts, displacement operators, Gabor systems, the
//! unnormalized Fourier transform and the short-time Fourier transform.
//!
//! Inner products conjugate the second argument, `⟨x, y⟩ = Σ xᵢ ȳᵢ`. The STFT
//! entry at `(x, ξ)` is `⟨M_ξ T_x φ, f̄⟩ = Σ_g ξ(g) φ(g − x) f(g)`, with no
//! conjugation of `f`. Tables over `G × Ĝ` are shift-major: entry
//! `index(x)·N + index(ξ)`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{root_of_unity, Character, FiniteAbelianGroup, GroupElement};
use crate::linalg::CMatrix;
use crate::rng;

/// Default relative zero threshold for support counting.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

impl Window {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(invalid(format!(
                "window has {} entries, group {group} has order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(Self { group, values })
    }

    pub fn from_real(group: FiniteAbelianGroup, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        Self { group: group.clone(), values: vec![Complex64::new(0.0, 0.0); group.order()] }
    }

    pub fn delta(group: &FiniteAbelianGroup, at: &GroupElement) -> Self {
        let mut w = Self::zeros(group);
        w.values[group.index_of(at)] = Complex64::new(1.0, 0.0);
        w
    }

    pub fn ones(group: &FiniteAbelianGroup) -> Self {
        Self { group: group.clone(), values: vec![Complex64::new(1.0, 0.0); group.order()] }
    }

    /// Complex-Gaussian window from an existing stream.
    pub fn random<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> Self {
        Self { group: group.clone(), values: rng::complex_gaussian_vec(rng, group.order()) }
    }

    /// Complex-Gaussian window drawn from `seed`.
    pub fn seeded(group: &FiniteAbelianGroup, seed: u64) -> Self {
        Self::random(group, &mut rng::seeded(seed))
    }

    /// Window with Gaussian-integer entries, parts uniform in `-bound..=bound`,
    /// redrawn until every entry is nonzero.
    pub fn gaussian_integer<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R, bound: i64) -> Self {
        let values = (0..group.order())
            .map(|_| loop {
                let (re, im) = rng::gaussian_integer(rng, bound);
                if re != 0 || im != 0 {
                    break Complex64::new(re as f64, im as f64);
                }
            })
            .collect();
        Self { group: group.clone(), values }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, g: &GroupElement) -> Complex64 {
        self.values[self.group.index_of(g)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Window) -> Self {
        Self {
            group: self.group.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    /// `⟨self, other⟩ = Σ self(g)·conj(other(g))`.
    pub fn inner(&self, other: &Window) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn as_vector(&self) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(&self.values)
    }

    fn same_group(&self, other: &FiniteAbelianGroup) -> Result<()> {
        if &self.group != other {
            return Err(invalid(format!("window lives on {}, not on {other}", self.group)));
        }
        Ok(())
    }
}

/// A point `λ = (x, ξ)` of `G × Ĝ`. Serialized as `[[shift…], [freq…]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(GroupElement, Character)", into = "(GroupElement, Character)")]
pub struct TimeFrequencyPoint {
    pub shift: GroupElement,
    pub freq: Character,
}

impl TimeFrequencyPoint {
    pub fn new(shift: GroupElement, freq: Character) -> Self {
        Self { shift, freq }
    }

    /// Shift-major index in `0..N²`.
    pub fn index(&self, group: &FiniteAbelianGroup) -> usize {
        group.index_of(&self.shift) * group.order() + group.character_index(&self.freq)
    }

    pub fn from_index(group: &FiniteAbelianGroup, index: usize) -> Self {
        let n = group.order();
        Self { shift: group.element_at(index / n), freq: group.character_at(index % n) }
    }
}

impl From<(GroupElement, Character)> for TimeFrequencyPoint {
    fn from((shift, freq): (GroupElement, Character)) -> Self {
        Self { shift, freq }
    }
}

impl From<TimeFrequencyPoint> for (GroupElement, Character) {
    fn from(p: TimeFrequencyPoint) -> Self {
        (p.shift, p.freq)
    }
}

/// All of `G × Ĝ`, shift-major.
pub fn all_points(group: &FiniteAbelianGroup) -> Vec<TimeFrequencyPoint> {
    (0..group.order() * group.order()).map(|i| TimeFrequencyPoint::from_index(group, i)).collect()
}

/// `T_x f(g) = f(g − x)`.
pub fn translate(f: &Window, x: &GroupElement) -> Result<Window> {
    let g = f.group();
    if !g.contains(x) {
        return Err(invalid(format!("{x:?} is not an element of {g}")));
    }
    let values = g.elements().map(|e| f.at(&g.sub(&e, x))).collect();
    Ok(Window { group: g.clone(), values })
}

/// `M_ξ f(g) = ξ(g) f(g)`.
pub fn modulate(f: &Window, xi: &Character) -> Result<Window> {
    let g = f.group();
    if !g.contains(&GroupElement(xi.0.clone())) {
        return Err(invalid(format!("{xi:?} is not a character of {g}")));
    }
    let values = g
        .elements()
        .zip(f.values())
        .map(|(e, v)| g.pairing_unchecked(xi, &e) * v)
        .collect();
    Ok(Window { group: g.clone(), values })
}

/// `π(λ) f = M_ξ T_x f`.
pub fn tf_shift(f: &Window, lambda: &TimeFrequencyPoint) -> Result<Window> {
    modulate(&translate(f, &lambda.shift)?, &lambda.freq)
}

/// Precomputed index and phase tables for applying all `π(λ)` quickly.
#[derive(Clone, Debug)]
pub struct ShiftTables {
    group: FiniteAbelianGroup,
    /// `sub[x][g] = index(g − x)`
    sub: Vec<Vec<usize>>,
    /// `chars[ξ][g] = ξ(g)`
    chars: Vec<Vec<Complex64>>,
}

impl ShiftTables {
    pub fn new(group: &FiniteAbelianGroup) -> Self {
        let elems: Vec<GroupElement> = group.elements().collect();
        let sub = elems
            .iter()
            .map(|x| elems.iter().map(|g| group.index_of(&group.sub(g, x))).collect())
            .collect();
        let l = group.exponent();
        let chars = group
            .phase_table()
            .into_iter()
            .map(|row| row.into_iter().map(|k| root_of_unity(k, l)).collect())
            .collect();
        Self { group: group.clone(), sub, chars }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// Writes `π(λ)f` for the shift-major point index into `out`.
    pub fn shift_into(&self, f: &[Complex64], point: usize, out: &mut [Complex64]) {
        let n = self.group.order();
        let (x, xi) = (point / n, point % n);
        let sub = &self.sub[x];
        let ch = &self.chars[xi];
        for g in 0..n {
            out[g] = ch[g] * f[sub[g]];
        }
    }

    pub fn shifted(&self, f: &[Complex64], point: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        self.shift_into(f, point, &mut out);
        out
    }
}

/// Column matrix of a Gabor system; column `j` is `π(λⱼ) f`.
#[derive(Clone, Debug)]
pub struct FrameMatrix {
    pub points: Vec<TimeFrequencyPoint>,
    pub matrix: CMatrix,
}

impl FrameMatrix {
    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn columns(&self, idx: &[usize]) -> CMatrix {
        self.matrix.select_columns(idx)
    }
}

pub fn gabor_matrix(f: &Window, points: &[TimeFrequencyPoint]) -> Result<FrameMatrix> {
    let g = f.group();
    let mut seen = std::collections::HashSet::with_capacity(points.len());
    for p in points {
        if !g.contains(&p.shift) || !g.contains(&GroupElement(p.freq.0.clone())) {
            return Err(invalid(format!("point {p:?} does not belong to {g}")));
        }
        if !seen.insert(p) {
            return Err(invalid(format!("duplicate time-frequency point {p:?}")));
        }
    }
    let tables = ShiftTables::new(g);
    let n = g.order();
    let mut matrix = CMatrix::zeros(n, points.len());
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for (j, p) in points.iter().enumerate() {
        tables.shift_into(f.values(), p.index(g), &mut col);
        matrix.column_mut(j).copy_from_slice(&col);
    }
    Ok(FrameMatrix { points: points.to_vec(), matrix })
}

/// The full Weyl–Heisenberg orbit `{π(λ)f : λ ∈ G × Ĝ}` as an `N × N²` matrix.
pub fn full_frame(f: &Window) -> FrameMatrix {
    gabor_matrix(f, &all_points(f.group())).expect("all points are distinct")
}

/// Displacement operator `D_λ = τ^{λ₁λ₂} T^{λ₁} M^{λ₂}` on `C^N`, `N` odd,
/// with `τ = ω^{(N+1)/2}`.
pub fn displacement(n: u64, lambda: (u64, u64)) -> Result<CMatrix> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::Unsupported(format!("displacement operators need odd N >= 3, got {n}")));
    }
    let (a, b) = (lambda.0 % n, lambda.1 % n);
    let half = (n + 1) / 2;
    let nn = n as usize;
    let mut d = CMatrix::zeros(nn, nn);
    let tau_exp = (a * b % n) * half % n;
    for col in 0..n {
        // (T^a M^b e_col) = ω^{b·col} e_{col+a}
        let row = (col + a) % n;
        let k = (tau_exp + b * col) % n;
        d[(row as usize, col as usize)] = root_of_unity(k, n);
    }
    Ok(d)
}

/// Unnormalized Fourier transform `f̂(ξ) = Σ_g ξ(g) f(g)`, indexed by
/// character order.
pub fn fourier(f: &Window) -> Window {
    let g = f.group();
    let l = g.exponent();
    let values = g
        .phase_table()
        .iter()
        .map(|row| row.iter().zip(f.values()).map(|(&k, v)| root_of_unity(k, l) * v).sum())
        .collect();
    Window { group: g.clone(), values }
}

/// Short-time Fourier transform `V_φ f`, shift-major over `G × Ĝ`.
pub fn stft(phi: &Window, f: &Window) -> Result<Vec<Complex64>> {
    phi.same_group(f.group())?;
    let tables = ShiftTables::new(phi.group());
    Ok(stft_with(&tables, phi.values(), f.values()))
}

pub(crate) fn stft_with(tables: &ShiftTables, phi: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
    let n = phi.len();
    let mut out = Vec::with_capacity(n * n);
    for x in 0..n {
        let sub = &tables.sub[x];
        let prod: Vec<Complex64> = (0..n).map(|g| phi[sub[g]] * f[g]).collect();
        for xi in 0..n {
            let ch = &tables.chars[xi];
            out.push((0..n).map(|g| ch[g] * prod[g]).sum());
        }
    }
    out
}

/// Support count with an indeterminacy flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportCount {
    pub count: usize,
    /// Some entry's relative magnitude fell inside the borderline band.
    pub borderline: bool,
}

/// Borderline band `(lo, hi)` for a zero threshold: `(1e-12, 1e-6)` at the
/// default threshold, widened to stay three decades around `tol`.
pub fn borderline_band(tol: f64) -> (f64, f64) {
    ((tol * 1e-3).min(1e-12), (tol * 1e3).max(1e-6))
}

/// Number of entries with `|vᵢ| > tol·scale`, flagging entries whose relative
/// magnitude lies in the borderline band.
pub fn support_count_scaled(v: &[Complex64], tol: f64, scale: f64) -> SupportCount {
    if scale == 0.0 {
        return SupportCount { count: 0, borderline: false };
    }
    let (lo, hi) = borderline_band(tol);
    let mut count = 0;
    let mut borderline = false;
    for x in v {
        let r = x.norm() / scale;
        if r > tol {
            count += 1;
        }
        if r > lo && r < hi {
            borderline = true;
        }
    }
    SupportCount { count, borderline }
}

/// `‖v‖₀` relative to `max_j |v_j|`; zero for the zero vector.
pub fn support_count(v: &[Complex64], tol: f64) -> usize {
    support_report(v, tol).count
}

pub fn support_report(v: &[Complex64], tol: f64) -> SupportCount {
    let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    support_count_scaled(v, tol, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn cyc(n: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn translate_examples() {
        let g = cyc(4);
        let d0 = Window::delta(&g, &g.zero());
        let d1 = Window::delta(&g, &GroupElement(vec![1]));
        assert_eq!(translate(&d0, &GroupElement(vec![1])).unwrap(), d1);
        assert_eq!(translate(&d1, &g.zero()).unwrap(), d1);
        let f = Window::from_real(cyc(3), &[1.0, 2.0, 3.0]).unwrap();
        let t = translate(&f, &GroupElement(vec![1])).unwrap();
        assert_eq!(t, Window::from_real(cyc(3), &[3.0, 1.0, 2.0]).unwrap());
    }

    #[test]
    fn modulate_examples() {
        let g = cyc(2);
        let f = Window::ones(&g);
        assert_eq!(modulate(&f, &g.trivial_character()).unwrap(), f);
        let m = modulate(&f, &Character(vec![1])).unwrap();
        assert!(close(m.values(), Window::from_real(g, &[1.0, -1.0]).unwrap().values(), 1e-15));
        let g5 = cyc(5);
        let x = GroupElement(vec![3]);
        let xi = Character(vec![2]);
        let m = modulate(&Window::delta(&g5, &x), &xi).unwrap();
        let expected = Window::delta(&g5, &x).scale(g5.pairing(&xi, &x).unwrap());
        assert!(close(m.values(), expected.values(), 1e-15));
    }

    #[test]
    fn tf_shift_of_delta() {
        let g = cyc(3);
        let d0 = Window::delta(&g, &g.zero());
        let lam = TimeFrequencyPoint::new(GroupElement(vec![1]), Character(vec![1]));
        let v = tf_shift(&d0, &lam).unwrap();
        let w3 = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!(close(v.values(), &[0.0.into(), w3, 0.0.into()], 1e-15));
        let id = TimeFrequencyPoint::new(g.zero(), g.trivial_character());
        assert_eq!(tf_shift(&d0, &id).unwrap(), d0);
    }

    #[test]
    fn projective_commutation_and_unitarity() {
        let mut rng = seeded(3);
        for m in [vec![4], vec![2, 2], vec![6], vec![4, 4]] {
            let g = FiniteAbelianGroup::new(&m).unwrap();
            for _ in 0..20 {
                let f = Window::random(&g, &mut rng);
                for x in g.elements() {
                    for xi in g.characters() {
                        let mt = modulate(&translate(&f, &x).unwrap(), &xi).unwrap();
                        let tm = translate(&modulate(&f, &xi).unwrap(), &x).unwrap();
                        let phase = g.pairing(&xi, &x).unwrap();
                        let diff = mt.values().iter().zip(tm.values()).map(|(a, b)| (a - phase * b).norm()).fold(0.0, f64::max);
                        assert!(diff < 1e-12 * f.max_abs());
                        assert!((mt.norm() - f.norm()).abs() < 1e-12 * f.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn gabor_matrix_shapes() {
        let g = cyc(3);
        let f = Window::seeded(&g, 1);
        assert_eq!(full_frame(&f).matrix.shape(), (3, 9));
        let d0 = Window::delta(&g, &g.zero());
        let pts: Vec<_> = g.elements().map(|x| TimeFrequencyPoint::new(x, g.trivial_character())).collect();
        let fm = gabor_matrix(&d0, &pts).unwrap();
        assert_eq!(fm.matrix, CMatrix::identity(3, 3));
        let dup = vec![pts[0].clone(), pts[0].clone()];
        assert!(matches!(gabor_matrix(&d0, &dup), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn displacement_examples() {
        assert_eq!(displacement(5, (0, 0)).unwrap(), CMatrix::identity(5, 5));
        // N = 3, λ = (1,1): τ·T·M with τ = ω₃²
        let w = |k: u64| root_of_unity(k, 3);
        let mut t = CMatrix::zeros(3, 3);
        let mut m = CMatrix::zeros(3, 3);
        for j in 0..3 {
            t[((j + 1) % 3, j)] = 1.0.into();
            m[(j, j)] = w(j as u64);
        }
        let expected = t * m * w(2);
        assert!((displacement(3, (1, 1)).unwrap() - expected).norm() < 1e-14);
        for a in 0..5 {
            for b in 0..5 {
                let d = displacement(5, (a, b)).unwrap();
                assert!(crate::linalg::unitarity_residual(&d) < 1e-13);
            }
        }
        assert!(matches!(displacement(4, (1, 1)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn displacements_compose_projectively() {
        let n = 5;
        for a in 0..n * n {
            for b in 0..n * n {
                let (l, m) = ((a / n, a % n), (b / n, b % n));
                let prod = displacement(n, l).unwrap() * displacement(n, m).unwrap();
                let sum = displacement(n, ((l.0 + m.0) % n, (l.1 + m.1) % n)).unwrap();
                let s = crate::linalg::fitted_phase(&prod, &sum);
                assert!((s.norm() - 1.0).abs() < 1e-12);
                assert!(crate::linalg::projective_residual(&prod, &sum) < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_examples() {
        let g = cyc(5);
        let d0 = Window::delta(&g, &g.zero());
        assert!(close(fourier(&d0).values(), Window::ones(&g).values(), 1e-15));
        let f1 = fourier(&Window::ones(&g));
        assert!(close(f1.values(), Window::delta(&g, &g.zero()).scale(5.0.into()).values(), 1e-12));
        let g6 = cyc(6);
        let f = Window::seeded(&g6, 9);
        let fh = fourier(&f);
        assert!((fh.norm().powi(2) - 6.0 * f.norm().powi(2)).abs() < 1e-10 * f.norm().powi(2));
    }

    #[test]
    fn double_fourier_is_reflection() {
        for n in 2..=12 {
            let g = cyc(n);
            let f = Window::seeded(&g, n);
            let ff = fourier(&fourier(&f));
            for x in g.elements() {
                let expected = f.at(&g.neg(&x)) * n as f64;
                assert!((ff.at(&x) - expected).norm() < 1e-10 * n as f64 * f.max_abs());
            }
        }
    }

    #[test]
    fn stft_examples() {
        for n in [2u64, 3, 5] {
            let g = cyc(n);
            let d0 = Window::delta(&g, &g.zero());
            let v = stft(&d0, &d0).unwrap();
            assert_eq!(support_count(&v, ZERO_TOL), n as usize);
            for xi in 0..n as usize {
                assert_eq!(v[xi], Complex64::new(1.0, 0.0));
            }
        }
        let g2 = cyc(2);
        let v = stft(&Window::ones(&g2), &Window::ones(&g2)).unwrap();
        assert_eq!(support_count(&v, ZERO_TOL), 2);
        let f = Window::seeded(&cyc(4), 2);
        let phi = Window::seeded(&cyc(4), 3);
        let v = stft(&phi, &f).unwrap();
        let direct: Complex64 = phi.values().iter().zip(f.values()).map(|(a, b)| a * b).sum();
        assert_eq!(v[0], direct);
    }

    #[test]
    fn support_count_examples() {
        assert_eq!(support_count(&[0.0.into(), 0.0.into(), 0.0.into()], ZERO_TOL), 0);
        assert_eq!(support_count(&[1.0.into(), 1e-15.into(), 2.0.into()], ZERO_TOL), 2);
        let g = cyc(5);
        assert_eq!(support_count(Window::delta(&g, &g.zero()).values(), ZERO_TOL), 1);
        assert!(support_report(&[1.0.into(), 1e-8.into()], ZERO_TOL).borderline);
        assert!(!support_report(&[1.0.into(), 1e-15.into()], ZERO_TOL).borderline);
    }

    #[test]
    fn shift_tables_agree_with_operators() {
        let g = FiniteAbelianGroup::new(&[4, 2]).unwrap();
        let f = Window::seeded(&g, 5);
        let tables = ShiftTables::new(&g);
        for (i, p) in all_points(&g).iter().enumerate() {
            assert_eq!(p.index(&g), i);
            let direct = tf_shift(&f, p).unwrap();
            assert!(close(&tables.shifted(f.values(), i), direct.values(), 1e-15));
        }
    }
}
