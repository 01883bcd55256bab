//! Residual precursor ISI at the unbiased MMSE-DFE output.
//!
//! With the minimum-phase factor `g` of the equalizer input spectrum, the
//! precursor tap transform is `d(D) = N_0/(P_0−N_0)·(1 − 1/g*(D^{−*}))`,
//! whose causal-inverse coefficients follow the recursion
//! `a_0 = 1, a_{−k} = −Σ_m conj(g_m)·a_{−(k−m)}`. The normalized residual
//! interference is `ρ = Σ_k d_{−k}·X_k/√P_X`; its statistics (`σ_ρ`,
//! certified `|ρ|_max`, tail bounds) and the dominant-tap clusters drive
//! every bound formula downstream.

use crate::channel::Alphabet;
use crate::poly;
use crate::spectral::SpectralFactors;
use num_complex::Complex64;
use thiserror::Error;

/// Enumeration guard: largest dominant-tap count per alphabet
/// (`2^M` or `4^M` cluster centers).
pub fn max_clusters(alphabet: Alphabet) -> usize {
    match alphabet {
        Alphabet::Bpsk => 20,
        Alphabet::Qpsk => 10,
    }
}

/// Minimum pairwise root separation for the partial-fraction route.
const MIN_ROOT_SEPARATION: f64 = 1e-6;

/// Taps inspected by the ratio-test fallback for tail certification.
const RATIO_WINDOW: usize = 16;

/// Safety factor applied to the ratio-test tail estimate.
const RATIO_SAFETY: f64 = 2.0;

#[derive(Debug, Error)]
pub enum DfeError {
    #[error("precursor tail {tail:e} still above target {target:e} after {k} taps (inverse filter decays too slowly)")]
    TailNotConverged { k: usize, tail: f64, target: f64 },
    #[error("inverse-filter poles are not simple (separation {separation:e})")]
    RepeatedPoles { separation: f64 },
    #[error("root finding failed: {0}")]
    RootFindingFailure(#[from] poly::RootError),
    #[error("M = {m} exceeds the {max}-cluster enumeration guard")]
    TooManyClusters { m: usize, max: usize },
    #[error("M = {m} exceeds the {k_used} retained taps")]
    MExceedsTaps { m: usize, k_used: usize },
}

/// Precursor tap profile `d_{−1}, d_{−2}, …` (already normalized by
/// `√P_X`) with certified summary statistics.
#[derive(Debug, Clone)]
pub struct PrecursorProfile {
    /// `d[i]` holds `d_{−(i+1)}`.
    pub d: Vec<Complex64>,
    /// Certified upper bound on `|ρ|`: `Σ|d| + tail_bound`.
    pub rho_max: f64,
    /// `√(Σ|d|²)` over the retained taps; equals `σ_S/√P_X` up to the tail.
    pub sigma_rho: f64,
    /// Certified bound on the absolute sum of all truncated taps.
    pub tail_bound: f64,
    /// Number of retained taps.
    pub k_used: usize,
}

impl PrecursorProfile {
    /// Treats an explicit finite tap list as the entire profile (zero tail);
    /// the entry path for synthetic ρ distributions.
    pub fn from_taps(d: Vec<Complex64>) -> Self {
        let abs_sum: f64 = d.iter().map(|t| t.norm()).sum();
        let sq_sum: f64 = d.iter().map(|t| t.norm_sqr()).sum();
        let k_used = d.len();
        Self {
            d,
            rho_max: abs_sum,
            sigma_rho: sq_sum.sqrt(),
            tail_bound: 0.0,
            k_used,
        }
    }

    /// [`PrecursorProfile::from_taps`] for real taps.
    pub fn from_real_taps(d: &[f64]) -> Self {
        Self::from_taps(d.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    }

    /// `Σ|d_{−k}|` over the retained taps.
    pub fn abs_sum(&self) -> f64 {
        self.d.iter().map(|t| t.norm()).sum()
    }
}

/// Cluster decomposition `ρ = λ + μ`: the `M` largest-magnitude taps are
/// enumerated exactly (centers `λ_n`), the remainder is kept as the
/// residual `μ` with only its certified statistics.
#[derive(Debug, Clone)]
pub struct ClusterSet {
    pub m: usize,
    /// Indices into the profile's `d`, magnitude-ranked, ties to smaller lag.
    pub dominant_indices: Vec<usize>,
    /// Enumerated cluster centers in the evaluation domain: the `2^M`
    /// signed sums for BPSK, the `4^M` real-part values `λ^{(r)}_n` for
    /// QPSK (already divided by `√2`).
    pub lambda: Vec<f64>,
    /// `Σ of dominant |d|` in ρ units.
    pub lambda_max: f64,
    /// Certified residual spread `√(Σ non-dominant |d|² + tail²)` in ρ units.
    pub sigma_mu: f64,
    /// `rho_max − lambda_max` in ρ units (includes the certified tail).
    pub mu_max: f64,
    pub alphabet: Alphabet,
}

impl ClusterSet {
    /// Residual spread and range in the evaluation domain (`/√2` for the
    /// QPSK real-part statistic).
    pub fn residual_eval_stats(&self) -> (f64, f64) {
        match self.alphabet {
            Alphabet::Bpsk => (self.sigma_mu, self.mu_max),
            Alphabet::Qpsk => (
                self.sigma_mu * std::f64::consts::FRAC_1_SQRT_2,
                self.mu_max * std::f64::consts::FRAC_1_SQRT_2,
            ),
        }
    }
}

/// Per-pole data for the certified geometric tail.
struct PoleTail {
    /// `(|c_i|, |p_i|)` per pole: residue magnitude and decay ratio.
    terms: Vec<(f64, f64)>,
}

impl PoleTail {
    /// `Σ_i |c_i|·|p_i|^{K+1}/(1−|p_i|)`: bounds `Σ_{k>K} |a_{−k}|`.
    fn bound_after(&self, k: usize) -> f64 {
        self.terms
            .iter()
            .map(|&(c, p)| c * p.powi(k as i32 + 1) / (1.0 - p))
            .sum()
    }
}

/// Poles `p_i` and residues `c_i` of `1/q(w)` with
/// `q(w) = Σ_m conj(g_m) w^m`, so that `a_{−k} = Σ_i c_i·p_i^k`.
fn pole_residues(sf: &SpectralFactors) -> Result<Vec<(Complex64, Complex64)>, DfeError> {
    let q: Vec<Complex64> = sf.g.iter().map(|g| g.conj()).collect();
    let w_roots = poly::roots(&q)?;
    for (i, wi) in w_roots.iter().enumerate() {
        for wj in &w_roots[..i] {
            let separation = (wi - wj).norm();
            if separation <= MIN_ROOT_SEPARATION {
                return Err(DfeError::RepeatedPoles { separation });
            }
        }
    }
    Ok(w_roots
        .iter()
        .map(|&w| {
            let p = w.inv();
            let c = -p / poly::eval_derivative(&q, w);
            (p, c)
        })
        .collect())
}

fn pole_tail(sf: &SpectralFactors) -> Option<PoleTail> {
    let pairs = pole_residues(sf).ok()?;
    let mut terms = Vec::with_capacity(pairs.len());
    for (p, c) in pairs {
        let radius = p.norm();
        if radius >= 1.0 {
            return None;
        }
        terms.push((c.norm(), radius));
    }
    Some(PoleTail { terms })
}

/// Computes the precursor taps by power-series inversion of the
/// conjugate-reversed factor, truncating at the first `K ≤ k_max` where the
/// certified tail falls below `tail_tol·Σ|d|`.
///
/// The tail certificate is the per-pole geometric envelope from the
/// partial-fraction expansion; if root finding fails, a ratio test over the
/// last 16 taps with a 2× safety factor is used instead.
pub fn precursor_taps(
    sf: &SpectralFactors,
    n_0: f64,
    k_max: usize,
    tail_tol: f64,
) -> Result<PrecursorProfile, DfeError> {
    assert!(sf.p0 > n_0, "factorization must satisfy P_0 > N_0");
    let coef = n_0 / (sf.p0 - n_0);
    let nu = sf.g.len() - 1;
    if nu == 0 {
        return Ok(PrecursorProfile::from_taps(Vec::new()));
    }

    let q: Vec<Complex64> = sf.g.iter().map(|g| g.conj()).collect();
    let tail_by_poles = pole_tail(sf);

    let mut a: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    let mut d: Vec<Complex64> = Vec::new();
    let mut abs_sum = 0.0f64;
    let mut sq_sum = 0.0f64;

    for k in 1..=k_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=k.min(nu) {
            acc -= q[m] * a[k - m];
        }
        a.push(acc);
        let dk = -coef * acc;
        abs_sum += dk.norm();
        sq_sum += dk.norm_sqr();
        d.push(dk);

        let tail = match &tail_by_poles {
            Some(pt) => Some(coef * pt.bound_after(k)),
            None => ratio_tail(&a, coef),
        };
        if let Some(tail) = tail {
            let target = tail_tol * abs_sum.max(f64::MIN_POSITIVE);
            if tail <= target {
                return Ok(PrecursorProfile {
                    d,
                    rho_max: abs_sum + tail,
                    sigma_rho: sq_sum.sqrt(),
                    tail_bound: tail,
                    k_used: k,
                });
            }
        }
    }

    let tail = match &tail_by_poles {
        Some(pt) => coef * pt.bound_after(k_max),
        None => ratio_tail(&a, coef).unwrap_or(f64::INFINITY),
    };
    Err(DfeError::TailNotConverged {
        k: k_max,
        tail,
        target: tail_tol * abs_sum.max(f64::MIN_POSITIVE),
    })
}

/// Ratio-test tail: bounds the remainder by a geometric series with the
/// worst tap-to-tap ratio observed over the trailing window, doubled.
/// `None` until the window fills or when the ratio reaches one.
fn ratio_tail(a: &[Complex64], coef: f64) -> Option<f64> {
    if a.len() < RATIO_WINDOW + 1 {
        return None;
    }
    let window = &a[a.len() - RATIO_WINDOW - 1..];
    let mut worst = 0.0f64;
    for pair in window.windows(2) {
        let prev = pair[0].norm();
        let next = pair[1].norm();
        if prev == 0.0 {
            if next > 0.0 {
                return None;
            }
            continue;
        }
        worst = worst.max(next / prev);
    }
    if worst >= 1.0 {
        return None;
    }
    let last = a.last().unwrap().norm();
    Some(RATIO_SAFETY * coef * last * worst / (1.0 - worst))
}

/// `Σ_{k≤K_used}|d_{−k}| + tail_bound`: the certified `|ρ|_max` from the
/// computed profile.
pub fn rho_max_direct(p: &PrecursorProfile) -> f64 {
    p.abs_sum() + p.tail_bound
}

/// Certified `|ρ|_max` from the partial-fraction expansion alone: the first
/// `K` taps are summed exactly and the remainder is bounded pole by pole;
/// `K = 0` uses no computed taps at all.
pub fn rho_max_partial_fraction(
    sf: &SpectralFactors,
    n_0: f64,
    k: usize,
) -> Result<f64, DfeError> {
    assert!(sf.p0 > n_0, "factorization must satisfy P_0 > N_0");
    let coef = n_0 / (sf.p0 - n_0);
    let nu = sf.g.len() - 1;
    if nu == 0 {
        return Ok(0.0);
    }
    let pairs = pole_residues(sf)?;
    let mut terms = Vec::with_capacity(pairs.len());
    for (p, c) in &pairs {
        let radius = p.norm();
        if radius >= 1.0 {
            return Err(DfeError::TailNotConverged {
                k,
                tail: f64::INFINITY,
                target: 0.0,
            });
        }
        terms.push((c.norm(), radius));
    }
    let tail = PoleTail { terms }.bound_after(k);

    let q: Vec<Complex64> = sf.g.iter().map(|g| g.conj()).collect();
    let mut a: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    let mut head = 0.0f64;
    for i in 1..=k {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=i.min(nu) {
            acc -= q[m] * a[i - m];
        }
        a.push(acc);
        head += coef * acc.norm();
    }
    Ok(head + coef * tail)
}

/// Selects the `M` largest-magnitude taps (ties to the smaller lag),
/// enumerates the cluster centers, and assembles the residual statistics
/// `σ_μ² = Σ non-dominant |d|² + tail²` (summed directly, so a full
/// selection with zero tail is exactly zero) and `μ_max = rho_max − λ_max`.
pub fn select_clusters(
    p: &PrecursorProfile,
    m: usize,
    alphabet: Alphabet,
) -> Result<ClusterSet, DfeError> {
    let guard = max_clusters(alphabet);
    if m > guard {
        return Err(DfeError::TooManyClusters { m, max: guard });
    }
    if m > p.k_used {
        return Err(DfeError::MExceedsTaps { m, k_used: p.k_used });
    }

    let mut order: Vec<usize> = (0..p.d.len()).collect();
    order.sort_by(|&i, &j| {
        p.d[j]
            .norm()
            .total_cmp(&p.d[i].norm())
            .then(i.cmp(&j))
    });
    let dominant_indices: Vec<usize> = order[..m].to_vec();
    let mut dominant = vec![false; p.d.len()];
    for &i in &dominant_indices {
        dominant[i] = true;
    }

    let lambda = enumerate_centers(&dominant_indices.iter().map(|&i| p.d[i]).collect::<Vec<_>>(), alphabet);

    let lambda_max: f64 = dominant_indices.iter().map(|&i| p.d[i].norm()).sum();
    let residual2: f64 = (0..p.d.len())
        .filter(|&i| !dominant[i])
        .map(|i| p.d[i].norm_sqr())
        .sum();
    // Σ_tail |d|² ≤ (Σ_tail |d|)², so the truncated tail enters squared.
    let sigma_mu = (residual2 + p.tail_bound * p.tail_bound).sqrt();
    let mu_max = (p.rho_max - lambda_max).max(0.0);

    Ok(ClusterSet {
        m,
        dominant_indices,
        lambda,
        lambda_max,
        sigma_mu,
        mu_max,
        alphabet,
    })
}

/// Enumerates all symbol-pattern sums of the given taps in the evaluation
/// domain: `Σ ±d` for BPSK, `Re(Σ d·s)/√2` over `s ∈ {±1±j}` for QPSK.
pub fn enumerate_centers(taps: &[Complex64], alphabet: Alphabet) -> Vec<f64> {
    match alphabet {
        Alphabet::Bpsk => {
            let m = taps.len();
            (0..1usize << m)
                .map(|pattern| {
                    taps.iter()
                        .enumerate()
                        .map(|(j, d)| {
                            if pattern >> j & 1 == 0 {
                                d.re
                            } else {
                                -d.re
                            }
                        })
                        .sum()
                })
                .collect()
        }
        Alphabet::Qpsk => {
            let m = taps.len();
            let count = 4usize.pow(m as u32);
            (0..count)
                .map(|mut pattern| {
                    let mut acc = 0.0;
                    for d in taps {
                        let (sr, si) = match pattern & 3 {
                            0 => (1.0, 1.0),
                            1 => (1.0, -1.0),
                            2 => (-1.0, 1.0),
                            _ => (-1.0, -1.0),
                        };
                        // Re(d·(sr + j·si)) = re·sr − im·si
                        acc += d.re * sr - d.im * si;
                        pattern >>= 2;
                    }
                    acc * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        }
    }
}
