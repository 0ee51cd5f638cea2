use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{clifford_unitary, CliffordUnitary, SL2ModN};
use crate::error::{invalid, Error, Result};
use crate::gabor::FrameMatrix;
use crate::group::root_of_unity;
use crate::linalg::{jacobi_svd, numerical_rank, scalar_of_identity, CMatrix, CVector, RANK_RATIO};
use crate::numtheory::gcd;
use crate::rng;
use crate::spark::{first_dependent_subset, rank_deficient_subset_search, SearchStrategy, DET_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenspace {
    pub eigenvalue: Complex64,
    pub basis: Vec<CVector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    /// Least `m` with `U^m` scalar.
    pub projective_order: usize,
    /// `U^m = s·I`.
    pub scalar: Complex64,
    pub spaces: Vec<Eigenspace>,
}

/// Least `m ≤ max_power` with `U^m` a scalar matrix, and that scalar.
pub fn projective_order(u: &CMatrix, max_power: usize) -> Option<(usize, Complex64)> {
    let mut p = u.clone();
    for m in 1..=max_power {
        if let Some(s) = scalar_of_identity(&p, 1e-9) {
            return Some((m, s));
        }
        p = &p * u;
    }
    None
}

/// Eigenspaces of a unitary of finite projective order through the
/// projectors `P_μ = (1/m) Σ_k μ^{−k} Ũ^k`, `Ũ = U / s^{1/m}`.
pub fn eigen_decomposition(u: &CMatrix, max_power: usize) -> Result<EigenDecomposition> {
    let n = u.nrows();
    let (m, s) = projective_order(u, max_power)
        .ok_or_else(|| Error::Internal(format!("no scalar power of U within {max_power} steps")))?;
    let root = Complex64::from_polar(1.0, s.arg() / m as f64);
    let ut = u / root;
    let mut powers = Vec::with_capacity(m);
    powers.push(CMatrix::identity(n, n));
    for k in 1..m {
        powers.push(&powers[k - 1] * &ut);
    }
    let mut spaces = Vec::new();
    let mut total = 0;
    for j in 0..m {
        let mu = root_of_unity(j as u64, m as u64);
        let mut p = CMatrix::zeros(n, n);
        for (k, pk) in powers.iter().enumerate() {
            p += pk * mu.powu(k as u32).conj();
        }
        p /= Complex64::new(m as f64, 0.0);
        let rank = p.trace().re.round() as usize;
        if rank == 0 {
            continue;
        }
        total += rank;
        let svd = jacobi_svd(&p);
        let basis: Vec<CVector> = (0..rank).map(|c| svd.u.column(c).into_owned()).collect();
        let lambda = mu * root;
        for v in &basis {
            let r = (u * v - v * lambda).norm();
            if r >= 1e-8 {
                return Err(Error::Internal(format!("eigen residual {r:.3e}")));
            }
        }
        spaces.push(Eigenspace { eigenvalue: lambda, basis });
    }
    if total != n {
        return Err(Error::Internal(format!("eigenspace ranks sum to {total}, not {n}")));
    }
    Ok(EigenDecomposition { projective_order: m, scalar: s, spaces })
}

/// Eigenspaces of `U_F`, with a search budget of `4N²` powers.
pub fn eigenvectors_by_projector(u: &CliffordUnitary) -> Result<EigenDecomposition> {
    let n = u.n as usize;
    eigen_decomposition(&u.matrix, 4 * n * n)
}

/// `{D_λ v : λ ∈ (Z/NZ)²}` as an `N × N²` matrix, column `λ₁·N + λ₂`.
pub fn displacement_frame(v: &CVector) -> CMatrix {
    let n = v.len();
    let nn = n as u64;
    let half = (nn + 1) / 2;
    let mut m = CMatrix::zeros(n, n * n);
    for a in 0..nn {
        for b in 0..nn {
            let col = (a * nn + b) as usize;
            let tau = a * b % nn * half % nn;
            for x in 0..nn {
                let row = ((x + a) % nn) as usize;
                m[(row, col)] = root_of_unity((tau + b * x) % nn, nn) * v[x as usize];
            }
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenStrategy {
    Exhaustive,
    Orbit,
    Randomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Dependent,
    /// Exhaustive search found every `N`-subset independent.
    FullSpark,
    /// A non-exhaustive search found nothing; this refutes nothing.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorResult {
    pub eigenvalue: Complex64,
    pub eigenspace_dim: usize,
    /// Basis index within the eigenspace; `None` for the random combination.
    pub basis_index: Option<usize>,
    pub outcome: Outcome,
    pub method: String,
    pub witness: Option<Vec<(u64, u64)>>,
    pub subsets_checked: Option<u128>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDeficiencyReport {
    pub n: u64,
    pub f: SL2ModN,
    /// `F' = F^{ord(F)/d}`, `d = gcd(ord F, N)`.
    pub reduced: SL2ModN,
    pub order: u64,
    pub reduced_order: u64,
    pub projective_order: usize,
    pub eigenspace_dims: Vec<usize>,
    pub results: Vec<EigenvectorResult>,
    pub all_dependent: bool,
    pub inconclusive: usize,
}

pub const RANDOM_FALLBACK_TRIALS: usize = 2000;

fn to_points(idx: &[usize], n: u64) -> Vec<(u64, u64)> {
    idx.iter().map(|&i| (i as u64 / n, i as u64 % n)).collect()
}

fn search(
    v: &CVector,
    reduced: &SL2ModN,
    strategy: EigenStrategy,
    workers: usize,
    seed: u64,
) -> Result<(Outcome, String, Option<Vec<usize>>, Option<u128>)> {
    let n = v.len();
    let matrix = displacement_frame(v);
    let frame = FrameMatrix { points: Vec::new(), matrix };
    let dependent = |w: &[usize]| numerical_rank(&frame.matrix.select_columns(w), RANK_RATIO) < w.len();
    match strategy {
        EigenStrategy::Exhaustive => {
            let out = first_dependent_subset(&frame.matrix, n, DET_TOL, workers);
            match out.witness {
                Some(w) if dependent(&w) => Ok((Outcome::Dependent, "exhaustive".into(), Some(w), Some(out.subsets_checked))),
                Some(w) => Err(Error::Internal(format!("determinant and rank criteria disagree on {w:?}"))),
                None => Ok((Outcome::FullSpark, "exhaustive".into(), None, Some(out.subsets_checked))),
            }
        }
        EigenStrategy::Orbit => {
            let orbits = SearchStrategy::OrbitGuided { orbits: reduced.orbits() };
            if let Some(w) = rank_deficient_subset_search(&frame, n, &orbits, workers)? {
                return Ok((Outcome::Dependent, "orbit".into(), Some(w), None));
            }
            let rnd = SearchStrategy::Randomized { trials: RANDOM_FALLBACK_TRIALS, seed };
            match rank_deficient_subset_search(&frame, n, &rnd, workers)? {
                Some(w) => Ok((Outcome::Dependent, "randomized-fallback".into(), Some(w), None)),
                None => Ok((Outcome::Inconclusive, "orbit+randomized".into(), None, None)),
            }
        }
        EigenStrategy::Randomized => {
            let rnd = SearchStrategy::Randomized { trials: RANDOM_FALLBACK_TRIALS, seed };
            match rank_deficient_subset_search(&frame, n, &rnd, workers)? {
                Some(w) => Ok((Outcome::Dependent, "randomized".into(), Some(w), None)),
                None => Ok((Outcome::Inconclusive, "randomized".into(), None, None)),
            }
        }
    }
}

/// For each eigenvector of `U_{F'}` (every basis vector of every eigenspace,
/// plus one seeded random combination in eigenspaces of dimension > 1),
/// searches `{D_λ v}` for a dependent `N`-subset.
pub fn eigen_deficiency_check(
    f: &SL2ModN,
    strategy: EigenStrategy,
    workers: usize,
    seed: u64,
) -> Result<EigenDeficiencyReport> {
    let n = f.n;
    let order = f.order();
    let d = gcd(order, n);
    if d == 1 {
        return Err(invalid(format!("gcd(ord F, N) = gcd({order}, {n}) = 1")));
    }
    let reduced = f.pow(order / d);
    let u = clifford_unitary(&reduced)?;
    let eig = eigenvectors_by_projector(&u)?;
    let mut r = rng::seeded(seed);
    let mut results = Vec::new();
    for space in &eig.spaces {
        let dim = space.basis.len();
        let mut vectors: Vec<(Option<usize>, CVector)> = space.basis.iter().cloned().enumerate().map(|(i, v)| (Some(i), v)).collect();
        if dim > 1 {
            let coef = rng::complex_gaussian_vec(&mut r, dim);
            let mut v = CVector::zeros(n as usize);
            for (c, b) in coef.iter().zip(&space.basis) {
                v += b * *c;
            }
            let norm = v.norm();
            vectors.push((None, v / Complex64::new(norm, 0.0)));
        }
        for (k, (basis_index, v)) in vectors.into_iter().enumerate() {
            let (outcome, method, w, checked) = search(&v, &reduced, strategy, workers, seed.wrapping_add(k as u64 + 1))?;
            results.push(EigenvectorResult {
                eigenvalue: space.eigenvalue,
                eigenspace_dim: dim,
                basis_index,
                outcome,
                method,
                witness: w.map(|w| to_points(&w, n)),
                subsets_checked: checked,
            });
        }
    }
    let all_dependent = results.iter().all(|r| r.outcome == Outcome::Dependent);
    let inconclusive = results.iter().filter(|r| r.outcome == Outcome::Inconclusive).count();
    Ok(EigenDeficiencyReport {
        n,
        f: *f,
        reduced,
        order,
        reduced_order: reduced.order(),
        projective_order: eig.projective_order,
        eigenspace_dims: eig.spaces.iter().map(|s| s.basis.len()).collect(),
        results,
        all_dependent,
        inconclusive,
    })
}
