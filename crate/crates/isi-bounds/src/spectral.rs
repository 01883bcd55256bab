//! Spectral side of the equalizer pipeline: the geometric-mean power `P_0`
//! of the equalizer input spectrum `R_ss(θ) = P_X·R_hh(θ) + N_0`, its
//! monic minimum-phase factorization `R_ss = P_0·g(D)·g*(D^{−*})`, and the
//! decomposition of the error variance `σ_V²` into the Gaussian part
//! `σ_N²` and the residual-ISI part `σ_S²`, yielding the effective SNR
//! `R = P_X/σ_V²` and the noise fraction `φ = σ_N/σ_V`.

use crate::channel::Autocorrelation;
use crate::poly;
use crate::quad::{self, QuadError};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

/// FFT grid size for the cepstral factorization.
const CEPSTRUM_GRID: usize = 1 << 16;

/// Longest factor length retained by the series exponential.
const MAX_FACTOR_LEN: usize = 1024;

/// Relative magnitude below which a run of trailing factor taps is cut.
const TRUNCATION_REL: f64 = 1e-14;

/// Consecutive negligible taps required before truncating.
const TRUNCATION_RUN: usize = 8;

/// Default residual tolerance, relative to `R_ss` at lag zero.
pub const DEFAULT_FACTOR_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("quadrature failed while computing {what}: {source}")]
    QuadratureFailure {
        what: &'static str,
        source: QuadError,
    },
    #[error("spectral factorization residual {residual:e} exceeds tolerance {tolerance:e}")]
    FactorizationDiverged { residual: f64, tolerance: f64 },
    #[error("sampled spectrum is not positive (min {min:e})")]
    NonPositiveSpectrum { min: f64 },
    #[error("degenerate equalizer: P_0 = {p0} does not exceed N_0 = {n0}")]
    DegenerateDfe { p0: f64, n0: f64 },
}

/// Minimum-phase factorization `R_ss(D) = P_0·g(D)·g*(D^{−*})`.
///
/// `g` is monic (`g[0] = 1`) and causal; all reciprocal roots of its
/// conjugate-reversed polynomial `q(w) = Σ_m conj(g_m)·w^m` lie strictly
/// inside the unit circle, so the inverse filter `1/g*(D^{−*})` is causal
/// and stable.
#[derive(Debug, Clone)]
pub struct SpectralFactors {
    pub p0: f64,
    pub g: Vec<Complex64>,
    pub residual: f64,
}

impl SpectralFactors {
    /// Poles `p_i = 1/w_i` of the inverse filter, where `w_i` are the roots
    /// of the conjugate-reversed factor polynomial.
    pub fn poles(&self) -> Result<Vec<Complex64>, poly::RootError> {
        let q: Vec<Complex64> = self.g.iter().map(|g| g.conj()).collect();
        let q = trim_trailing_zeros(q);
        if q.len() <= 1 {
            return Ok(Vec::new());
        }
        Ok(poly::roots(&q)?.into_iter().map(|w| w.inv()).collect())
    }

    /// Largest pole magnitude; the geometric decay ratio of the inverse
    /// filter's impulse response. Zero for the trivial factor `g = (1)`.
    pub fn max_pole_radius(&self) -> Result<f64, poly::RootError> {
        Ok(self
            .poles()?
            .iter()
            .map(|p| p.norm())
            .fold(0.0f64, f64::max))
    }
}

fn trim_trailing_zeros(mut v: Vec<Complex64>) -> Vec<Complex64> {
    while v.len() > 1 && v.last().map(|c| c.norm() == 0.0).unwrap_or(false) {
        v.pop();
    }
    v
}

/// Error-variance split at the equalizer output.
#[derive(Debug, Clone, Copy)]
pub struct NoiseDecomposition {
    pub sigma_v2: f64,
    pub sigma_n2: f64,
    pub sigma_s2: f64,
    /// Effective SNR `R = P_X/σ_V² = (P_0 − N_0)/N_0`.
    pub r: f64,
    /// Noise fraction `φ = σ_N/σ_V ∈ (0, 1]`; exactly 1 for no-ISI channels.
    pub phi: f64,
}

/// `P_0 = exp((1/2π)·∫ log R_ss(θ) dθ)` by adaptive quadrature to relative
/// tolerance `1e-10`.
pub fn compute_p0(r: &Autocorrelation, p_x: f64, n_0: f64) -> Result<f64, SpectralError> {
    assert!(p_x > 0.0 && n_0 > 0.0, "P_X and N_0 must be positive");
    let integral = quad::adaptive_integrate(
        |theta| (p_x * r.psd_real(theta) + n_0).ln(),
        -PI,
        PI,
        1e-10,
        1 << 20,
    )
    .map_err(|source| SpectralError::QuadratureFailure {
        what: "the log-spectrum integral",
        source,
    })?;
    Ok((integral / (2.0 * PI)).exp())
}

/// Spectral factorization by the FFT-cepstral method with the default
/// residual tolerance.
pub fn spectral_factorize(
    r: &Autocorrelation,
    p_x: f64,
    n_0: f64,
) -> Result<SpectralFactors, SpectralError> {
    spectral_factorize_with(r, p_x, n_0, DEFAULT_FACTOR_TOL)
}

/// Spectral factorization by the FFT-cepstral method: sample
/// `log R_ss` on a `2^16` grid, take the causal cepstrum half, and
/// exponentiate the series to recover the monic causal factor `g`;
/// verified by reconstructing the autocorrelation of `√P_0·g`.
pub fn spectral_factorize_with(
    r: &Autocorrelation,
    p_x: f64,
    n_0: f64,
    tolerance: f64,
) -> Result<SpectralFactors, SpectralError> {
    assert!(p_x > 0.0 && n_0 > 0.0, "P_X and N_0 must be positive");
    let n = CEPSTRUM_GRID;

    let mut buf: Vec<Complex64> = (0..n)
        .map(|i| {
            let theta = 2.0 * PI * (i as f64) / (n as f64);
            Complex64::new(p_x * r.psd_real(theta) + n_0, 0.0)
        })
        .collect();
    let min = buf.iter().map(|s| s.re).fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(SpectralError::NonPositiveSpectrum { min });
    }
    for s in buf.iter_mut() {
        *s = Complex64::new(s.re.ln(), 0.0);
    }

    // c_k = (1/2π)∫ log R_ss·e^{jkθ} dθ ≈ (1/N)·Σ_i log R_ss(θ_i)·e^{j2πik/N}
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let cep: Vec<Complex64> = buf[..MAX_FACTOR_LEN.min(n / 2)]
        .iter()
        .map(|c| c * scale)
        .collect();
    let p0 = cep[0].re.exp();

    // series exponential: g = exp(Σ_{k≥1} c_k D^k) via the power-series
    // recurrence n·g_n = Σ_{m=1}^{n} m·c_m·g_{n−m}
    let glen = cep.len();
    let mut g = vec![Complex64::new(0.0, 0.0); glen];
    g[0] = Complex64::new(1.0, 0.0);
    for k in 1..glen {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=k {
            acc += (m as f64) * cep[m] * g[k - m];
        }
        g[k] = acc / (k as f64);
    }

    let g = truncate_factor(g);
    let residual = reconstruction_residual(&g, p0, r, p_x, n_0);
    if !(residual < tolerance) {
        return Err(SpectralError::FactorizationDiverged {
            residual,
            tolerance,
        });
    }
    Ok(SpectralFactors { p0, g, residual })
}

/// Cuts the factor at the start of the first run of `TRUNCATION_RUN`
/// consecutive taps below `TRUNCATION_REL`·max|g|.
fn truncate_factor(mut g: Vec<Complex64>) -> Vec<Complex64> {
    let max = g.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let floor = TRUNCATION_REL * max;
    let mut run = 0usize;
    for k in 0..g.len() {
        if g[k].norm() < floor {
            run += 1;
            if run == TRUNCATION_RUN {
                g.truncate(k + 1 - TRUNCATION_RUN);
                return g;
            }
        } else {
            run = 0;
        }
    }
    g
}

/// Max relative mismatch between `P_0·Σ_n g_n·conj(g_{n−k})` and the
/// lags of `R_ss = P_X·R_hh + N_0·δ`.
fn reconstruction_residual(
    g: &[Complex64],
    p0: f64,
    r: &Autocorrelation,
    p_x: f64,
    n_0: f64,
) -> f64 {
    let span = (g.len() - 1).max(r.span());
    let r0 = p_x * r.r0() + n_0;
    let mut worst = 0.0f64;
    for k in 0..=span {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in k..g.len() {
            acc += g[n] * g[n - k].conj();
        }
        acc *= p0;
        let direct = p_x * r.lag(k as i64)
            + if k == 0 {
                Complex64::new(n_0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        worst = worst.max((acc - direct).norm() / r0);
    }
    worst
}

/// Noise decomposition at the unbiased equalizer output: the integral
/// `J = ∫ R_hh/(R_hh + N_0/P_X) dθ` feeds
/// `σ_N² = P_X·P_0·N_0·J/(2π(P_0 − N_0)²)`, with `σ_V² = P_X·N_0/(P_0−N_0)`
/// and `σ_S² = σ_V² − σ_N²`.
///
/// A dead band of `1e-12·σ_V²` around zero snaps `σ_S²` to exactly zero (and
/// `φ` to exactly one) so that no-ISI channels do not inherit quadrature
/// noise.
pub fn noise_decomposition(
    r: &Autocorrelation,
    p_x: f64,
    n_0: f64,
    p0: f64,
) -> Result<NoiseDecomposition, SpectralError> {
    if !(p0 > n_0) {
        return Err(SpectralError::DegenerateDfe { p0, n0: n_0 });
    }
    let ratio = n_0 / p_x;
    let j = quad::adaptive_integrate(
        |theta| {
            let s = r.psd_real(theta);
            s / (s + ratio)
        },
        -PI,
        PI,
        1e-10,
        1 << 20,
    )
    .map_err(|source| SpectralError::QuadratureFailure {
        what: "the noise-variance integral",
        source,
    })?;

    let sigma_v2 = p_x * n_0 / (p0 - n_0);
    let mut sigma_n2 = p_x * p0 * n_0 * j / (2.0 * PI * (p0 - n_0) * (p0 - n_0));
    let mut sigma_s2 = sigma_v2 - sigma_n2;
    if sigma_s2 < 1e-12 * sigma_v2 {
        sigma_s2 = 0.0;
        sigma_n2 = sigma_v2;
    }
    let phi = if sigma_s2 == 0.0 {
        1.0
    } else {
        (sigma_n2 / sigma_v2).sqrt().min(1.0)
    };
    Ok(NoiseDecomposition {
        sigma_v2,
        sigma_n2,
        sigma_s2,
        r: (p0 - n_0) / n_0,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel;
    use approx::assert_relative_eq;

    #[test]
    fn identity_channel_p0_is_total_power() {
        let r = channel::identity().autocorrelation();
        let p0 = compute_p0(&r, 1.0, 0.1).unwrap();
        assert_relative_eq!(p0, 1.1, max_relative = 1e-10);
    }

    #[test]
    fn dicode_p0_matches_closed_form() {
        // (1/2π)∫log(a + b·cosθ)dθ = log((a + √(a²−b²))/2)
        let r = channel::dicode().autocorrelation();
        let p0 = compute_p0(&r, 1.0, 0.1).unwrap();
        let closed = (1.1 + 0.21f64.sqrt()) / 2.0;
        assert_relative_eq!(p0, closed, max_relative = 1e-9);
        assert_relative_eq!(p0, 0.779128, epsilon = 1e-6);
    }

    #[test]
    fn p0_scales_homogeneously() {
        let r = channel::epr4().autocorrelation();
        let base = compute_p0(&r, 1.0, 0.25).unwrap();
        let scaled = compute_p0(&r, 3.0, 0.75).unwrap();
        assert_relative_eq!(scaled, 3.0 * base, max_relative = 1e-9);
    }

    #[test]
    fn identity_factorization_is_trivial() {
        let r = channel::identity().autocorrelation();
        let sf = spectral_factorize(&r, 1.0, 0.1).unwrap();
        assert_relative_eq!(sf.p0, 1.1, max_relative = 1e-12);
        assert_eq!(sf.g.len(), 1);
        assert_eq!(sf.g[0], Complex64::new(1.0, 0.0));
        assert!(sf.max_pole_radius().unwrap() == 0.0);
    }

    #[test]
    fn dicode_factor_solves_endpoint_equations() {
        // P_0(1+g_1)² = R_ss(0) and P_0(1−g_1)² = R_ss(π) pin g_1 = 1/(2P_0)
        let r = channel::dicode().autocorrelation();
        let sf = spectral_factorize(&r, 1.0, 0.1).unwrap();
        assert_eq!(sf.g.len(), 2);
        let g1 = sf.g[1].re;
        assert_relative_eq!(sf.p0 * (1.0 + g1) * (1.0 + g1), 2.1, max_relative = 1e-9);
        assert_relative_eq!(sf.p0 * (1.0 - g1) * (1.0 - g1), 0.1, max_relative = 1e-7);
        assert_relative_eq!(g1, 1.0 / (2.0 * sf.p0), max_relative = 1e-9);
        assert_relative_eq!(g1, 0.641742, epsilon = 1e-6);
    }

    #[test]
    fn factor_length_matches_channel_memory_for_builtins() {
        for ch in channel::builtin_channels() {
            let r = ch.autocorrelation();
            let sf = spectral_factorize(&r, 1.0, 0.1).unwrap();
            assert_eq!(sf.g.len(), ch.memory() + 1, "length for {}", ch.label());
            assert!(sf.residual < 1e-9);
        }
    }

    #[test]
    fn factor_poles_inside_unit_circle_across_snr() {
        for ch in channel::builtin_channels() {
            let r = ch.autocorrelation();
            for snr_db in [-10.0, 0.0, 10.0, 14.0] {
                let n0 = crate::db_to_linear(-snr_db);
                let sf = spectral_factorize(&r, 1.0, n0).unwrap();
                let radius = sf.max_pole_radius().unwrap();
                assert!(
                    radius < 1.0 - 1e-8,
                    "{} at {snr_db} dB: pole radius {radius}",
                    ch.label()
                );
            }
        }
    }

    #[test]
    fn two_p0_routes_agree() {
        for ch in channel::builtin_channels() {
            let r = ch.autocorrelation();
            for snr_db in [-10.0, 2.0, 14.0] {
                let n0 = crate::db_to_linear(-snr_db);
                let quad_route = compute_p0(&r, 1.0, n0).unwrap();
                let fact_route = spectral_factorize(&r, 1.0, n0).unwrap().p0;
                assert_relative_eq!(quad_route, fact_route, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn identity_noise_decomposition_collapses() {
        let r = channel::identity().autocorrelation();
        let p0 = spectral_factorize(&r, 1.0, 0.1).unwrap().p0;
        let nd = noise_decomposition(&r, 1.0, 0.1, p0).unwrap();
        assert_relative_eq!(nd.sigma_v2, 0.1, max_relative = 1e-9);
        assert_eq!(nd.sigma_s2, 0.0);
        assert_eq!(nd.phi, 1.0);
        assert_relative_eq!(nd.r, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn dicode_noise_decomposition_matches_oracle() {
        // frozen from an independent high-resolution integration
        let r = channel::dicode().autocorrelation();
        let p0 = compute_p0(&r, 1.0, 0.1).unwrap();
        let nd = noise_decomposition(&r, 1.0, 0.1, p0).unwrap();
        assert_relative_eq!(nd.sigma_v2, 0.1472474768348053, max_relative = 1e-9);
        assert_relative_eq!(nd.sigma_n2, 0.1320659016381450, max_relative = 1e-9);
        assert_relative_eq!(nd.sigma_s2, 0.0151815751966603, max_relative = 1e-7);
        assert_relative_eq!(nd.phi, 0.9470467532605499, max_relative = 1e-9);
        assert_relative_eq!(nd.r, 6.791287847477921, max_relative = 1e-9);
    }

    #[test]
    fn variance_split_is_consistent_for_builtins() {
        for ch in channel::builtin_channels() {
            let r = ch.autocorrelation();
            for snr_db in [-10.0, 0.0, 14.0] {
                let n0 = crate::db_to_linear(-snr_db);
                let p0 = spectral_factorize(&r, 1.0, n0).unwrap().p0;
                let nd = noise_decomposition(&r, 1.0, n0, p0).unwrap();
                assert_relative_eq!(
                    nd.sigma_v2,
                    nd.sigma_n2 + nd.sigma_s2,
                    max_relative = 1e-9
                );
                assert!(nd.phi > 0.0 && nd.phi <= 1.0);
                assert_relative_eq!(nd.r, 1.0 / nd.sigma_v2, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn effective_snr_decreases_with_noise() {
        for ch in channel::builtin_channels() {
            let r = ch.autocorrelation();
            let mut last = f64::INFINITY;
            for n0 in [0.05, 0.1, 0.4, 1.0, 4.0] {
                let p0 = spectral_factorize(&r, 1.0, n0).unwrap().p0;
                let nd = noise_decomposition(&r, 1.0, n0, p0).unwrap();
                assert!(nd.r < last, "R not decreasing for {}", ch.label());
                last = nd.r;
            }
        }
    }

    #[test]
    fn degenerate_dfe_is_reported() {
        let r = channel::identity().autocorrelation();
        assert!(matches!(
            noise_decomposition(&r, 1.0, 0.1, 0.05),
            Err(SpectralError::DegenerateDfe { .. })
        ));
    }

    #[test]
    fn reconstruction_round_trip_across_grid() {
        for ch in channel::builtin_channels() {
            let r = ch.autocorrelation();
            for snr_db in (-10..=14).step_by(4) {
                let n0 = crate::db_to_linear(-(snr_db as f64));
                let sf = spectral_factorize(&r, 1.0, n0).unwrap();
                assert!(
                    sf.residual < 1e-9,
                    "{} at {snr_db} dB: residual {:e}",
                    ch.label(),
                    sf.residual
                );
            }
        }
    }
}
