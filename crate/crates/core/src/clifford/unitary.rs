use num_complex::Complex64;

use super::SL2ModN;
use crate::error::{Error, Result};
use crate::gabor::displacement;
use crate::group::{root_of_unity, CrtBijection};
use crate::linalg::{kron, projective_residual, CMatrix};
use crate::numtheory::{gcd, mod_inv};

/// The global phase of every constructor is fixed to `θ = 0`.
pub const PHASE_CONVENTION: &str = "theta-zero";

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordUnitary {
    pub n: u64,
    pub matrix: CMatrix,
    pub source: SL2ModN,
    pub phase_convention: &'static str,
}

impl CliffordUnitary {
    fn new(source: SL2ModN, matrix: CMatrix) -> Self {
        Self { n: source.n, matrix, source, phase_convention: PHASE_CONVENTION }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// `(1/√N) Σ_{r,s} τ^{b⁻¹(as² − 2rs + dr²)} |r⟩⟨s|`, `τ = ω^{(N+1)/2}`.
pub fn u_prime(f: &SL2ModN) -> Result<CliffordUnitary> {
    let n = f.n;
    let binv = mod_inv(f.b, n).ok_or_else(|| Error::WrongConstructor(format!("b = {} is not invertible mod {n}", f.b)))?;
    let half = (n + 1) / 2;
    let nn = n as u128;
    let scale = 1.0 / (n as f64).sqrt();
    let m = CMatrix::from_fn(n as usize, n as usize, |r, s| {
        let (r, s) = (r as u128, s as u128);
        let q = (f.a as u128 * s % nn * s + f.d as u128 * r % nn * r + (nn - 2 * r * s % nn)) % nn;
        let e = q * binv as u128 % nn * half as u128 % nn;
        root_of_unity(e as u64, n) * scale
    });
    Ok(CliffordUnitary::new(*f, m))
}

/// `U_F = U_{F₁} U_{F₂}` with `F₁ = (0 −1; 1 0)` and `F₂ = (c d; −a −b)`, for
/// `b` not invertible and `d` invertible.
pub fn u_nonprime(f: &SL2ModN) -> Result<CliffordUnitary> {
    let n = f.n;
    if f.b_invertible() {
        return Err(Error::WrongConstructor(format!("{f} is prime; use the prime constructor")));
    }
    if !f.d_invertible() {
        return Err(Error::WrongConstructor(format!("neither b nor d of {f} is invertible")));
    }
    let f1 = SL2ModN::new(n, 0, -1, 1, 0)?;
    let f2 = SL2ModN::new(n, f.c as i64, f.d as i64, -(f.a as i64), -(f.b as i64))?;
    debug_assert_eq!(f1.mul(&f2), *f);
    let m = u_prime(&f1)?.matrix * u_prime(&f2)?.matrix;
    Ok(CliffordUnitary::new(*f, m))
}

fn local(f: &SL2ModN) -> Result<CliffordUnitary> {
    if f.b_invertible() {
        u_prime(f)
    } else if f.d_invertible() {
        u_nonprime(f)
    } else {
        Err(Error::Internal(format!("{f}: a prime-power component with b and d both singular")))
    }
}

/// Local factors of `F` over the prime-power moduli `qᵢ` of `N`. Under the
/// CRT basis map, `M_N` becomes `⊗ M_{qᵢ}^{cᵢ}` with `cᵢ = (N/qᵢ)⁻¹ mod qᵢ`,
/// so the factor over `qᵢ` represents `diag(1, cᵢ)·F·diag(1, cᵢ⁻¹)`.
pub fn crt_components(f: &SL2ModN) -> Result<Vec<SL2ModN>> {
    let crt = CrtBijection::new(f.n)?;
    crt.moduli()
        .iter()
        .map(|&q| {
            let co = (f.n / q) % q;
            let ci = mod_inv(co, q).expect("coprime factors");
            let b = f.b as u128 % q as u128 * co as u128 % q as u128;
            let c = f.c as u128 % q as u128 * ci as u128 % q as u128;
            SL2ModN::new(q, f.a as i64, b as i64, c as i64, f.d as i64)
        })
        .collect()
}

/// Kronecker product of the local factors, permuted back to the standard
/// basis of `C^N`.
pub fn u_general(f: &SL2ModN) -> Result<CliffordUnitary> {
    let parts = crt_components(f)?;
    let mut k = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for p in &parts {
        k = kron(&k, &local(p)?.matrix);
    }
    let perm = CrtBijection::new(f.n)?.kronecker_permutation();
    let n = f.n as usize;
    let mut m = CMatrix::zeros(n, n);
    for (i, &pi) in perm.iter().enumerate() {
        for (j, &pj) in perm.iter().enumerate() {
            m[(pi, pj)] = k[(i, j)];
        }
    }
    Ok(CliffordUnitary::new(*f, m))
}

/// Prime constructor when `b` is invertible, the two-factor product when
/// `d` is, the CRT construction otherwise.
pub fn clifford_unitary(f: &SL2ModN) -> Result<CliffordUnitary> {
    if f.b_invertible() {
        u_prime(f)
    } else if f.d_invertible() {
        u_nonprime(f)
    } else {
        u_general(f)
    }
}

/// `min_{|s|=1} ‖U D_λ U* − s·D_{Fλ}‖_F`.
pub fn covariance_residual(u: &CliffordUnitary, lambda: (u64, u64)) -> Result<f64> {
    let d = displacement(u.n, lambda)?;
    let lhs = &u.matrix * d * u.matrix.adjoint();
    let rhs = displacement(u.n, u.source.apply(lambda))?;
    Ok(projective_residual(&lhs, &rhs))
}

/// Largest covariance residual over all `N²` displacements.
pub fn max_covariance_residual(u: &CliffordUnitary) -> Result<f64> {
    let n = u.n;
    let mut worst = 0.0f64;
    for l1 in 0..n {
        for l2 in 0..n {
            worst = worst.max(covariance_residual(u, (l1, l2))?);
        }
    }
    Ok(worst)
}

/// Whether `N` has a prime factor dividing both `b` and `d` of `F`.
pub fn needs_crt(f: &SL2ModN) -> bool {
    gcd(f.b, f.n) > 1 && gcd(f.d, f.n) > 1
}
