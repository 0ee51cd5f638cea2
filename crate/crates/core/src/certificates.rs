//! Spark-deficiency certificates for non-cyclic groups.
//!
//! A certificate lists time–frequency points `Λ` with `|Λ| ≥ N` together with
//! a window `f` and a nonzero witness `w` orthogonal to every `π(λ)f`, so the
//! system `{π(λ)f : λ ∈ Λ}` has rank at most `N − 1`. Three constructions are
//! provided: the Klein set of `3N/2` points, the adjugate construction over
//! `Z/pZ × Z/pZ` with `2p² − 2` points, and the lift of a window-independent
//! `|H|`-point set from a subgroup `H` to `G`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{determinant, CyclotomicField, Cyclotomic};
use crate::error::{invalid, Error, Result};
use crate::gabor::{gabor_matrix, stft, support_count, ShiftTables, TimeFrequencyPoint, Window, ZERO_TOL};
use crate::group::{character_extensions, Character, FiniteAbelianGroup, GroupElement, SubgroupEmbedding};
use crate::linalg::{adjugate, null_vector, numerical_rank, CMatrix, RANK_RATIO};
use crate::numtheory::{is_prime, lcm};
use crate::rng;
use crate::spark::gaussian_integer_values;

pub const SCHEMA_VERSION: u32 = 1;
/// Relative tolerance for a declared orthogonality relation.
pub const RELATION_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Klein,
    PrimeSquare,
    Hereditary,
    Generic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub lambda_size: usize,
    /// Upper bound on the rank of `{π(λ)f : λ ∈ Λ}`.
    pub rank_bound: usize,
    /// Upper bound on the number of nonzero entries of `⟨π(λ)f, w⟩` over
    /// `G × Ĝ`, when the construction gives one.
    pub stft_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub subgroup: Option<SubgroupEmbedding>,
    pub parent: Option<Box<SparkCertificate>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparkCertificate {
    pub schema_version: u32,
    pub group: FiniteAbelianGroup,
    pub kind: CertificateKind,
    pub points: Vec<TimeFrequencyPoint>,
    pub witness: Option<Vec<Complex64>>,
    /// The window the witness was computed for.
    pub window: Option<Vec<Complex64>>,
    pub claims: Claims,
    pub provenance: Provenance,
}

impl SparkCertificate {
    pub fn window(&self) -> Option<Window> {
        self.window.as_ref().and_then(|v| Window::new(self.group.clone(), v.clone()).ok())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: CertificateKind,
    pub lambda_size: usize,
    pub relations_checked: usize,
    /// Largest `|⟨π(λ)f, w⟩| / (‖π(λ)f‖·‖w‖)`; exactly zero in exact mode.
    pub max_residual: f64,
    pub exact: bool,
    pub windows_tested: usize,
    pub max_rank: usize,
    pub rank_bound: usize,
}

fn inner(u: &[Complex64], w: &[Complex64]) -> Complex64 {
    u.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative residuals `|⟨π(λ)f, w⟩| / (‖π(λ)f‖·‖w‖)` in floating point.
pub fn relation_residuals(f: &Window, w: &[Complex64], points: &[TimeFrequencyPoint]) -> Vec<f64> {
    let g = f.group();
    let tables = ShiftTables::new(g);
    let wn = norm(w);
    points
        .iter()
        .map(|p| {
            let col = tables.shifted(f.values(), p.index(g));
            let d = norm(&col) * wn;
            if d == 0.0 {
                0.0
            } else {
                inner(&col, w).norm() / d
            }
        })
        .collect()
}

/// Exact inner products `⟨π(λ)f, w⟩` in `Q(ζ_m)`, `m = lcm(2·exponent, 4)`,
/// for Gaussian-integer `f` and `w`.
pub fn exact_relations(f: &Window, w: &[Complex64], points: &[TimeFrequencyPoint]) -> Result<Vec<Cyclotomic>> {
    let g = f.group();
    let l = g.exponent();
    let m = lcm(2 * l, 4);
    let field = CyclotomicField::new(m);
    let fv: Vec<Cyclotomic> =
        gaussian_integer_values(f.values())?.into_iter().map(|(a, b)| field.gaussian(a, b)).collect();
    let wc: Vec<Cyclotomic> = gaussian_integer_values(w)?.into_iter().map(|(a, b)| field.gaussian(a, -b)).collect();
    let elems: Vec<GroupElement> = g.elements().collect();
    Ok(points
        .iter()
        .map(|p| {
            elems.iter().enumerate().fold(field.zero(), |acc, (gi, e)| {
                if wc[gi].is_zero() {
                    return acc;
                }
                let src = g.index_of(&g.sub(e, &p.shift));
                let phase = g.pairing_phase(&p.freq, e) * (m / l);
                acc + &(&field.zeta_pow(phase) * &fv[src]) * &wc[gi]
            })
        })
        .collect())
}

fn is_gaussian_integer(v: &[Complex64]) -> bool {
    gaussian_integer_values(v).is_ok()
}

fn require_window_on(f: &Window, g: &FiniteAbelianGroup) -> Result<()> {
    if f.group() != g {
        return Err(invalid(format!("window lives on {}, expected {g}", f.group())));
    }
    if f.is_zero() {
        return Err(invalid("the window must be nonzero"));
    }
    Ok(())
}

/// Embedding of a Klein four-group into `g`.
pub fn klein_subgroup(g: &FiniteAbelianGroup) -> Result<SubgroupEmbedding> {
    match g.find_p_square_subgroup() {
        Some((2, emb)) => Ok(emb),
        _ => Err(Error::Unsupported(format!("{g} has no Klein four-subgroup"))),
    }
}

/// `{(a, ξ) : ξ|_K nontrivial, a ∈ K, ξ(a) = −1}`, characters in index order,
/// then `a` in the order of `K`'s own elements.
pub fn klein_points(emb: &SubgroupEmbedding) -> Vec<TimeFrequencyPoint> {
    let g = &emb.host;
    let half = g.exponent() / 2;
    let k: Vec<GroupElement> = emb.sub.elements().map(|h| emb.map(&h)).collect();
    let mut out = Vec::with_capacity(3 * g.order() / 2);
    for xi in g.characters() {
        for a in &k {
            if g.pairing_phase(&xi, a) == half {
                out.push(TimeFrequencyPoint::new(a.clone(), xi.clone()));
            }
        }
    }
    out
}

fn check_relations(f: &Window, w: &[Complex64], points: &[TimeFrequencyPoint]) -> Result<f64> {
    let res = relation_residuals(f, w, points);
    if let Some((i, r)) = res.iter().enumerate().find(|(_, &r)| !(r <= RELATION_TOL)) {
        return Err(Error::FailedVerification(format!(
            "relation {i} at point {:?} has residual {r:.3e}",
            points[i]
        )));
    }
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Klein certificate: the `3N/2` points of [`klein_points`] with witness `f̄`.
pub fn klein_certificate(g: &FiniteAbelianGroup, f: &Window) -> Result<SparkCertificate> {
    let emb = klein_subgroup(g)?;
    require_window_on(f, g)?;
    let points = klein_points(&emb);
    let witness: Vec<Complex64> = f.values().iter().map(|v| v.conj()).collect();
    check_relations(f, &witness, &points)?;
    let n = g.order();
    Ok(SparkCertificate {
        schema_version: SCHEMA_VERSION,
        group: g.clone(),
        kind: CertificateKind::Klein,
        claims: Claims { lambda_size: points.len(), rank_bound: n - 1, stft_bound: Some(n * n - points.len()) },
        points,
        witness: Some(witness),
        window: Some(f.values().to_vec()),
        provenance: Provenance { seed: None, subgroup: Some(emb), parent: None },
    })
}

fn tf(x: [u64; 2], xi: [u64; 2]) -> TimeFrequencyPoint {
    TimeFrequencyPoint::new(GroupElement(x.to_vec()), Character(xi.to_vec()))
}

/// The `2p² − 2` window-independent points over `Z/pZ × Z/pZ`, with the
/// second coordinate playing the role of `θ·F_p`: shifts `(0, t)` against
/// characters `(0, s)`, shifts `(t, 0)` against `(s, 0)`, then the pure
/// modulations `(0, s)` and `(s, 0)` for `s ≠ 0`.
pub fn prime_square_points(p: u64) -> Vec<TimeFrequencyPoint> {
    let mut out = Vec::with_capacity((2 * p * p - 2) as usize);
    for t in 1..p {
        for s in 0..p {
            out.push(tf([0, t], [0, s]));
        }
    }
    for t in 1..p {
        for s in 0..p {
            out.push(tf([t, 0], [s, 0]));
        }
    }
    for s in 1..p {
        out.push(tf([0, 0], [0, s]));
    }
    for s in 1..p {
        out.push(tf([0, 0], [s, 0]));
    }
    out
}

/// `z` arranged as the `p × p` matrix `Z[i][j] = z(i, j)`.
pub fn arrange(z: &Window) -> CMatrix {
    let p = z.group().moduli()[0] as usize;
    CMatrix::from_fn(p, p, |i, j| z.values()[i * p + j])
}

fn exact_adjugate(z: &CMatrix) -> Result<CMatrix> {
    let p = z.nrows();
    let field = CyclotomicField::new(4);
    let vals = gaussian_integer_values(z.as_slice())?;
    // column-major storage of nalgebra
    let at = |i: usize, j: usize| {
        let (a, b) = vals[j * p + i];
        field.gaussian(a, b)
    };
    let to_c = |c: &Cyclotomic| {
        let k = c.coeffs();
        Complex64::new(k[0] as f64, k[1] as f64)
    };
    let mut adj = CMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let rows: Vec<Vec<Cyclotomic>> = (0..p)
                .filter(|&r| r != i)
                .map(|r| (0..p).filter(|&c| c != j).map(|c| at(r, c)).collect())
                .collect();
            let d = determinant(&rows);
            let d = if (i + j) % 2 == 0 { d } else { -d };
            adj[(j, i)] = to_c(&d);
        }
    }
    Ok(adj)
}

/// Witness `x` with matrix `X = (adj Z)*`; exact for Gaussian-integer `z`.
pub fn prime_square_witness(z: &Window) -> Result<Vec<Complex64>> {
    let zm = arrange(z);
    let p = zm.nrows();
    let adj = if p > 1 && is_gaussian_integer(z.values()) && z.max_abs() < 1e3 {
        exact_adjugate(&zm)?
    } else {
        adjugate(&zm)
    };
    let x = adj.adjoint();
    let scale = z.max_abs().powi(p as i32 - 1);
    if x.iter().all(|v| v.norm() <= 1e-13 * scale) {
        return Err(Error::DegenerateInput(
            "every (p-1)x(p-1) minor of the arranged window vanishes; reseed the window".into(),
        ));
    }
    Ok((0..p * p).map(|k| x[(k / p, k % p)]).collect())
}

/// Residuals of `⟨Z_a, X_b⟩ = ⟨Z'_a, X'_b⟩ = δ_ab·det Z` over all `(a, b)`,
/// relative to `‖Z_a‖·‖X_b‖` (resp. rows).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjugateIdentity {
    pub det: Complex64,
    pub max_column_residual: f64,
    pub max_row_residual: f64,
}

pub fn adjugate_identity(z: &Window) -> Result<AdjugateIdentity> {
    let x = prime_square_witness(z)?;
    let p = z.group().moduli()[0] as usize;
    let zm = arrange(z);
    let xm = CMatrix::from_fn(p, p, |i, j| x[i * p + j]);
    let det = zm.determinant();
    let rel = |u: Vec<Complex64>, v: Vec<Complex64>, expected: Complex64| {
        let d = norm(&u) * norm(&v);
        let r = (inner(&u, &v) - expected).norm();
        if d == 0.0 {
            r
        } else {
            r / d
        }
    };
    let (mut col, mut row) = (0.0f64, 0.0f64);
    for a in 0..p {
        for b in 0..p {
            let e = if a == b { det } else { Complex64::new(0.0, 0.0) };
            col = col.max(rel(zm.column(a).iter().copied().collect(), xm.column(b).iter().copied().collect(), e));
            row = row.max(rel(zm.row(a).iter().copied().collect(), xm.row(b).iter().copied().collect(), e));
        }
    }
    Ok(AdjugateIdentity { det, max_column_residual: col, max_row_residual: row })
}

/// Adjugate certificate over `Z/pZ × Z/pZ`, `p` an odd prime.
pub fn prime_square_certificate(p: u64, z: &Window) -> Result<SparkCertificate> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(invalid(format!("p = {p} must be an odd prime")));
    }
    let g = FiniteAbelianGroup::new(&[p, p])?;
    require_window_on(z, &g)?;
    let witness = prime_square_witness(z)?;
    let points = prime_square_points(p);
    if is_gaussian_integer(z.values()) && is_gaussian_integer(&witness) {
        if let Some(i) = exact_relations(z, &witness, &points)?.iter().position(|c| !c.is_zero()) {
            return Err(Error::Internal(format!("exact relation {i} does not vanish")));
        }
    } else {
        check_relations(z, &witness, &points)?;
    }
    let n = g.order();
    Ok(SparkCertificate {
        schema_version: SCHEMA_VERSION,
        claims: Claims { lambda_size: points.len(), rank_bound: n - 1, stft_bound: Some(n * n - points.len()) },
        group: g.clone(),
        kind: CertificateKind::PrimeSquare,
        points,
        witness: Some(witness),
        window: Some(z.values().to_vec()),
        provenance: Provenance { seed: None, subgroup: None, parent: None },
    })
}

/// The first `|H|` points of a window-independent certificate, the input
/// shape the lift expects.
pub fn universal_subset(cert: &SparkCertificate) -> Result<SparkCertificate> {
    let n = cert.group.order();
    if !matches!(cert.kind, CertificateKind::Klein | CertificateKind::PrimeSquare) {
        return Err(invalid("only Klein and prime-square point sets are window independent"));
    }
    if cert.points.len() < n {
        return Err(invalid("certificate has fewer than |G| points"));
    }
    let points = cert.points[..n].to_vec();
    Ok(SparkCertificate {
        claims: Claims { lambda_size: n, rank_bound: n - 1, stft_bound: None },
        points,
        ..cert.clone()
    })
}

/// Witness for the lifted system: a null vector `f` of the restricted system
/// `{π(λᵢ)ψ|_H}` extended by zero off `H`, returned conjugated so that
/// `⟨π(λ)ψ, w⟩ = Σ_g (π(λ)ψ)(g)·F(g)`.
pub fn lift_witness(points_h: &[TimeFrequencyPoint], emb: &SubgroupEmbedding, psi: &Window) -> Result<Vec<Complex64>> {
    let (g, h) = (&emb.host, &emb.sub);
    let images: Vec<usize> = h.elements().map(|e| g.index_of(&emb.map(&e))).collect();
    let psi_h = Window::new(h.clone(), images.iter().map(|&i| psi.values()[i]).collect())?;
    let a = gabor_matrix(&psi_h, points_h)?.matrix;
    let (f, _) = null_vector(&a.transpose());
    let mut w = vec![Complex64::new(0.0, 0.0); g.order()];
    for (k, &i) in images.iter().enumerate() {
        w[i] = f[k].conj();
    }
    Ok(w)
}

/// Lifts a window-independent `|H|`-point certificate over `H` to `G`; the
/// stored witness is computed for `psi`.
pub fn hereditary_lift(cert_h: &SparkCertificate, emb: &SubgroupEmbedding, psi: &Window) -> Result<SparkCertificate> {
    if cert_h.group != emb.sub {
        return Err(invalid(format!("certificate lives on {}, embedding starts at {}", cert_h.group, emb.sub)));
    }
    if cert_h.points.len() != emb.sub.order() {
        return Err(invalid(format!(
            "hereditary input needs exactly |H| = {} points, got {}",
            emb.sub.order(),
            cert_h.points.len()
        )));
    }
    let g = &emb.host;
    require_window_on(psi, g)?;
    let mut points = Vec::with_capacity(g.order());
    for p in &cert_h.points {
        let shift = emb.map(&p.shift);
        for xi in character_extensions(&p.freq, emb)? {
            points.push(TimeFrequencyPoint::new(shift.clone(), xi));
        }
    }
    let witness = lift_witness(&cert_h.points, emb, psi)?;
    check_relations(psi, &witness, &points)?;
    let n = g.order();
    Ok(SparkCertificate {
        schema_version: SCHEMA_VERSION,
        group: g.clone(),
        kind: CertificateKind::Hereditary,
        claims: Claims { lambda_size: points.len(), rank_bound: n - 1, stft_bound: None },
        points,
        witness: Some(witness),
        window: Some(psi.values().to_vec()),
        provenance: Provenance { seed: cert_h.provenance.seed, subgroup: Some(emb.clone()), parent: Some(Box::new(cert_h.clone())) },
    })
}

/// Test windows drawn from stream 1 of `seed`.
pub fn test_windows(g: &FiniteAbelianGroup, count: usize, seed: u64) -> Vec<Window> {
    let mut r = rng::substream(seed, 1);
    (0..count).map(|_| Window::random(g, &mut r)).collect()
}

/// Certificate of spark deficiency for a non-cyclic `G`, checked against
/// `trials` random windows before it is returned.
pub fn certify_noncyclic(g: &FiniteAbelianGroup, trials: usize, seed: u64) -> Result<SparkCertificate> {
    let (p, emb) = g
        .find_p_square_subgroup()
        .ok_or_else(|| Error::Unsupported(format!("{g} is cyclic; full spark windows exist there")))?;
    let mut cert = if p == 2 {
        klein_certificate(g, &Window::seeded(g, seed))?
    } else {
        let h = emb.sub.clone();
        let mut attempt = 0u64;
        let base = loop {
            let z = Window::random(&h, &mut rng::substream(seed, 2 + attempt));
            match prime_square_certificate(p, &z) {
                Err(Error::DegenerateInput(_)) if attempt < 8 => attempt += 1,
                other => break other?,
            }
        };
        if emb.index() == 1 && &h == g {
            base
        } else {
            hereditary_lift(&universal_subset(&base)?, &emb, &Window::seeded(g, seed))?
        }
    };
    cert.provenance.seed = Some(seed);
    cert.provenance.subgroup = Some(emb);
    verify_certificate(&cert, &test_windows(g, trials, seed))?;
    Ok(cert)
}

/// Re-checks a certificate from scratch: structure and counts, the
/// orthogonality relations of the stored window and witness (exactly when
/// both are Gaussian integers), and the rank bound for the stored window and
/// every test window.
pub fn verify_certificate(cert: &SparkCertificate, test: &[Window]) -> Result<VerificationReport> {
    let g = &cert.group;
    let n = g.order();
    let fail = |msg: String| Err(Error::FailedVerification(msg));
    if cert.schema_version != SCHEMA_VERSION {
        return fail(format!("unknown schema version {}", cert.schema_version));
    }
    if cert.points.len() != cert.claims.lambda_size {
        return fail(format!("{} points listed, {} claimed", cert.points.len(), cert.claims.lambda_size));
    }
    if cert.claims.lambda_size < n || cert.claims.rank_bound >= n {
        return fail("claims do not imply spark deficiency".into());
    }
    let mut seen = std::collections::HashSet::new();
    for (i, p) in cert.points.iter().enumerate() {
        if !g.contains(&p.shift) || !g.contains(&GroupElement(p.freq.0.clone())) {
            return fail(format!("point {i} {p:?} is not in G x Ĝ"));
        }
        if !seen.insert(p) {
            return fail(format!("point {i} {p:?} is repeated"));
        }
    }
    let mut report = VerificationReport {
        kind: cert.kind,
        lambda_size: cert.points.len(),
        relations_checked: 0,
        max_residual: 0.0,
        exact: false,
        windows_tested: 0,
        max_rank: 0,
        rank_bound: cert.claims.rank_bound,
    };
    let stored = match &cert.window {
        Some(v) => Some(Window::new(g.clone(), v.clone()).map_err(|e| Error::FailedVerification(e.to_string()))?),
        None => None,
    };
    if let (Some(f), Some(w)) = (&stored, &cert.witness) {
        if w.len() != n || w.iter().all(|v| v.norm() == 0.0) {
            return fail("witness is zero or has the wrong length".into());
        }
        if f.is_zero() {
            return fail("window is zero".into());
        }
        if is_gaussian_integer(f.values()) && is_gaussian_integer(w) {
            let rel = exact_relations(f, w, &cert.points)?;
            if let Some(i) = rel.iter().position(|c| !c.is_zero()) {
                return fail(format!("exact relation {i} at point {:?} does not vanish", cert.points[i]));
            }
            report.exact = true;
        } else {
            report.max_residual = check_relations(f, w, &cert.points)?;
        }
        report.relations_checked = cert.points.len();
    }
    for (i, psi) in stored.iter().chain(test).enumerate() {
        if psi.group() != g {
            return Err(invalid(format!("test window {i} lives on {}", psi.group())));
        }
        let m = gabor_matrix(psi, &cert.points)?.matrix;
        let rank = numerical_rank(&m, RANK_RATIO);
        report.max_rank = report.max_rank.max(rank);
        if rank > cert.claims.rank_bound {
            return fail(format!("window {i}: rank {rank} exceeds the bound {}", cert.claims.rank_bound));
        }
    }
    report.windows_tested = stored.iter().count() + test.len();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftProbe {
    pub bound: usize,
    pub min_support: usize,
    pub max_support: usize,
    pub samples: usize,
    pub within_bound: bool,
}

/// Support of the table `λ ↦ ⟨π(λ)f, f̄⟩` for seeded random `f`, against
/// `N² − 3N/2`.
pub fn min_stft_support_probe(g: &FiniteAbelianGroup, trials: usize, seed: u64) -> Result<StftProbe> {
    klein_subgroup(g)?;
    let mut r = rng::seeded(seed);
    let windows: Vec<Window> = (0..trials).map(|_| Window::random(g, &mut r)).collect();
    stft_support_probe(g, &windows)
}

pub fn stft_support_probe(g: &FiniteAbelianGroup, windows: &[Window]) -> Result<StftProbe> {
    klein_subgroup(g)?;
    let n = g.order();
    let bound = n * n - 3 * n / 2;
    let mut probe = StftProbe { bound, min_support: usize::MAX, max_support: 0, samples: 0, within_bound: true };
    for f in windows {
        let s = support_count(&stft(f, f)?, ZERO_TOL);
        probe.min_support = probe.min_support.min(s);
        probe.max_support = probe.max_support.max(s);
        probe.within_bound &= s <= bound;
        probe.samples += 1;
    }
    Ok(probe)
}

/// Replaces point `index` by a uniformly random point of `G × Ĝ` not already
/// in `Λ`.
pub fn tamper<R: Rng + ?Sized>(cert: &SparkCertificate, index: usize, rng: &mut R) -> SparkCertificate {
    let g = &cert.group;
    let n = g.order();
    let mut out = cert.clone();
    loop {
        let p = TimeFrequencyPoint::from_index(g, rng.random_range(0..n * n));
        if !cert.points.contains(&p) {
            out.points[index] = p;
            return out;
        }
    }
}
