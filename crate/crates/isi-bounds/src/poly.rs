//! Complex polynomial evaluation and root finding (Durand–Kerner with
//! Newton polish), sized for the short minimum-phase factors and
//! inverse-filter denominators that arise here (degree ≲ 32).

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("root iteration failed to converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Evaluates `p(w) = Σ_k coeffs[k]·w^k` by Horner's rule.
pub fn eval(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * w + c;
    }
    acc
}

/// Evaluates the derivative `p'(w)`.
pub fn eval_derivative(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * w + c * (k as f64);
    }
    acc
}

/// Finds all roots of `Σ_k coeffs[k]·w^k` (ascending coefficients, nonzero
/// leading coefficient) by simultaneous Durand–Kerner iteration followed by
/// a Newton polish. Roots are returned sorted by real then imaginary part.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, RootError> {
    assert!(
        coeffs.last().map(|c| c.norm() > 0.0).unwrap_or(false),
        "leading coefficient must be nonzero"
    );
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }

    // monic normalization
    let lead = coeffs[degree];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();

    // Cauchy bound on root magnitudes
    let radius = 1.0
        + monic[..degree]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);

    // non-symmetric starting angles avoid stalling on symmetric root sets
    let seed = Complex64::from_polar(1.0, 0.8);
    let mut w: Vec<Complex64> = (0..degree)
        .map(|k| {
            seed * Complex64::from_polar(
                0.5 * radius,
                2.0 * std::f64::consts::PI * (k as f64) / (degree as f64),
            )
        })
        .collect();

    let max_sweeps = 500;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= w[i] - w[j];
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates: nudge apart deterministically
                w[i] += Complex64::new(1e-8 * (1.0 + i as f64), 1e-8);
                max_step = f64::INFINITY;
                continue;
            }
            let step = eval(&monic, w[i]) / denom;
            w[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + w[i].norm()));
        }
        if max_step < 1e-14 {
            converged = true;
            break;
        }
    }

    // Newton polish sharpens each root to local machine precision
    for wi in w.iter_mut() {
        for _ in 0..4 {
            let d = eval_derivative(&monic, *wi);
            if d.norm() == 0.0 {
                break;
            }
            let step = eval(&monic, *wi) / d;
            *wi -= step;
            if step.norm() <= 1e-15 * (1.0 + wi.norm()) {
                break;
            }
        }
    }

    let residual = w
        .iter()
        .map(|&wi| eval(&monic, wi).norm() / (1.0 + wi.norm().powi(degree as i32)))
        .fold(0.0f64, f64::max);
    if !converged && residual > 1e-10 {
        return Err(RootError::NoConvergence {
            iterations: max_sweeps,
            residual,
        });
    }

    w.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(w)
}
