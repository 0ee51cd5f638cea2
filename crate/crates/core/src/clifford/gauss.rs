use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{crt_components, clifford_unitary, SL2ModN};
use crate::error::{invalid, Error, Result};
use crate::group::{root_of_unity, FiniteAbelianGroup, GroupElement};
use crate::numtheory::mod_inv;

/// `q : G → Q/Z` tabulated as numerators over a common denominator, in
/// element order of `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    group: FiniteAbelianGroup,
    den: u64,
    values: Vec<u64>,
}

impl QuadraticForm {
    /// Builds `q(x) = num(x)/den` and checks that `b^q` is bilinear.
    pub fn from_fn(group: FiniteAbelianGroup, den: u64, num: impl Fn(&GroupElement) -> i128) -> Result<Self> {
        if den == 0 {
            return Err(invalid("denominator must be positive"));
        }
        let values = group.elements().map(|x| num(&x).rem_euclid(den as i128) as u64).collect();
        let q = Self { group, den, values };
        if !q.is_bilinear() {
            return Err(invalid("q(x+y) − q(x) − q(y) is not bilinear"));
        }
        Ok(q)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self, i: usize) -> u64 {
        self.values[i]
    }

    fn add_idx(&self, i: usize, j: usize) -> usize {
        let g = &self.group;
        g.index_of(&g.add(&g.element_at(i), &g.element_at(j)))
    }

    /// `b^q(x, y)` as a numerator over `den`.
    pub fn bilinear(&self, i: usize, j: usize) -> u64 {
        let d = self.den;
        (self.values[self.add_idx(i, j)] + 2 * d - self.values[i] - self.values[j]) % d
    }

    fn generators(&self) -> Vec<usize> {
        let g = &self.group;
        (0..g.rank())
            .map(|k| {
                let mut c = vec![0; g.rank()];
                c[k] = 1;
                g.index_of(&GroupElement(c))
            })
            .collect()
    }

    /// Additivity of `b^q` in the first argument along each generator; with
    /// symmetry this is equivalent to bilinearity.
    pub fn is_bilinear(&self) -> bool {
        let n = self.group.order();
        let d = self.den;
        self.generators().iter().all(|&e| {
            (0..n).all(|x| {
                let xe = self.add_idx(x, e);
                (0..n).all(|y| self.bilinear(xe, y) == (self.bilinear(x, y) + self.bilinear(e, y)) % d)
            })
        })
    }

    /// `b^q(x + x', y) = b^q(x, y) + b^q(x', y)` for all triples.
    pub fn is_bilinear_exhaustive(&self) -> bool {
        let n = self.group.order();
        let d = self.den;
        (0..n).all(|x| {
            (0..n).all(|x2| {
                let s = self.add_idx(x, x2);
                (0..n).all(|y| self.bilinear(s, y) == (self.bilinear(x, y) + self.bilinear(x2, y)) % d)
            })
        })
    }

    /// Kernel `B` of `x ↦ b^q(x, ·)`.
    pub fn radical(&self) -> Vec<usize> {
        let gens = self.generators();
        (0..self.group.order()).filter(|&x| gens.iter().all(|&e| self.bilinear(x, e) == 0)).collect()
    }
}

/// `Γ(G, q) = |G|^{-1/2} Σ_x e^{2πi q(x)}`.
pub fn gauss_sum(q: &QuadraticForm) -> Complex64 {
    let s: Complex64 = q.values.iter().map(|&v| root_of_unity(v, q.den)).sum();
    s / (q.group.order() as f64).sqrt()
}

/// `|Γ(G, q)|` from the radical: `0` if `q(B) ≠ 0`, else `|B|^{1/2}`.
pub fn turaev_prediction(q: &QuadraticForm) -> f64 {
    let b = q.radical();
    if b.iter().any(|&x| q.values[x] != 0) {
        0.0
    } else {
        (b.len() as f64).sqrt()
    }
}

/// `q(r) = b⁻¹(t − 2)(N + 1) r² / 2N` on `Z/NZ`, with `Tr U_F = Γ(Z/NZ, q)`
/// for the prime constructor.
pub fn prime_trace_form(f: &SL2ModN) -> Result<QuadraticForm> {
    let n = f.n;
    let binv = mod_inv(f.b, n).ok_or_else(|| Error::WrongConstructor(format!("{f} is not prime")))?;
    let k = (binv as i128) * ((f.trace() as i128 + n as i128 - 2) % n as i128) % n as i128;
    let g = FiniteAbelianGroup::cyclic(n)?;
    QuadraticForm::from_fn(g, 2 * n, |x| {
        let r = x.0[0] as i128;
        k * (n as i128 + 1) * r * r
    })
}

/// `q(u, v) = (N + 1)/2N · (cd⁻¹u² + 2(1 − d⁻¹)uv − bd⁻¹v²)` on `(Z/NZ)²`,
/// with `Tr U_F = Γ((Z/NZ)², q)` for the two-factor constructor.
pub fn nonprime_trace_form(f: &SL2ModN) -> Result<QuadraticForm> {
    let n = f.n;
    let dinv = mod_inv(f.d, n).ok_or_else(|| Error::WrongConstructor(format!("d of {f} is not invertible")))? as i128;
    let ni = n as i128;
    let a = f.c as i128 * dinv % ni;
    let m = (1 - dinv).rem_euclid(ni);
    let c = (ni - f.b as i128 % ni) * dinv % ni;
    let g = FiniteAbelianGroup::new(&[n, n])?;
    QuadraticForm::from_fn(g, 2 * n, |x| {
        let (u, v) = (x.0[0] as i128, x.0[1] as i128);
        (ni + 1) * (a * u * u + 2 * m * u * v + c * v * v)
    })
}

/// Predicted `|Tr U_F|`, following the constructor dispatch; CRT factors
/// multiply.
pub fn trace_prediction(f: &SL2ModN) -> Result<f64> {
    if f.b_invertible() {
        Ok(turaev_prediction(&prime_trace_form(f)?))
    } else if f.d_invertible() {
        Ok(turaev_prediction(&nonprime_trace_form(f)?))
    } else {
        crt_components(f)?.iter().map(trace_prediction).product()
    }
}

/// Gauss sum of the trace form(s) of `F`, multiplied across CRT factors.
pub fn trace_gauss_sum(f: &SL2ModN) -> Result<Complex64> {
    if f.b_invertible() {
        Ok(gauss_sum(&prime_trace_form(f)?))
    } else if f.d_invertible() {
        Ok(gauss_sum(&nonprime_trace_form(f)?))
    } else {
        crt_components(f)?.iter().map(trace_gauss_sum).product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceScanReport {
    pub n: u64,
    pub group_size: usize,
    pub scanned: usize,
    pub coverage: f64,
    pub min_abs_trace: f64,
    pub argmin: Option<SL2ModN>,
    /// Largest `||Tr U_F| − prediction|`.
    pub max_prediction_error: f64,
    /// Largest `||Γ(q)| − prediction|` over the trace forms.
    pub max_gauss_error: f64,
    pub zero_predictions: usize,
}

struct TraceRow {
    f: SL2ModN,
    abs_trace: f64,
    prediction_error: f64,
    gauss_error: f64,
    predicted_zero: bool,
}

fn trace_row(f: &SL2ModN) -> Result<TraceRow> {
    let abs_trace = clifford_unitary(f)?.trace().norm();
    let predicted = trace_prediction(f)?;
    let gauss = trace_gauss_sum(f)?.norm();
    Ok(TraceRow {
        f: *f,
        abs_trace,
        prediction_error: (abs_trace - predicted).abs(),
        gauss_error: (gauss - predicted).abs(),
        predicted_zero: predicted == 0.0,
    })
}

/// `|Tr U_F|` over `SL(2, Z/NZ)` (the first `budget` elements in entry order),
/// cross-checked against the radical predictor.
pub fn trace_abs_scan(n: u64, budget: usize, workers: usize) -> Result<TraceScanReport> {
    let all = SL2ModN::all(n)?;
    let take = all.len().min(budget);
    let run = || all[..take].par_iter().map(trace_row).collect::<Result<Vec<_>>>();
    let rows = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run)?,
        Err(_) => run()?,
    };
    let mut rep = TraceScanReport {
        n,
        group_size: all.len(),
        scanned: take,
        coverage: take as f64 / all.len() as f64,
        min_abs_trace: f64::INFINITY,
        argmin: None,
        max_prediction_error: 0.0,
        max_gauss_error: 0.0,
        zero_predictions: 0,
    };
    for r in rows {
        if r.abs_trace < rep.min_abs_trace {
            rep.min_abs_trace = r.abs_trace;
            rep.argmin = Some(r.f);
        }
        rep.max_prediction_error = rep.max_prediction_error.max(r.prediction_error);
        rep.max_gauss_error = rep.max_gauss_error.max(r.gauss_error);
        rep.zero_predictions += r.predicted_zero as usize;
    }
    Ok(rep)
}
