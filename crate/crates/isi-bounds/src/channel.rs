//! Finite-ISI channel models: tap sequences, input alphabets, the channel
//! autocorrelation `r_k = Σ_n h_n·conj(h_{n−k})`, and power-spectral-density
//! evaluation `R_hh(θ) = Σ_k r_k e^{−jkθ}`.
//!
//! Five classic example channels are built in, plus the trivial identity
//! channel for no-ISI baselines.

use num_complex::Complex64;
use thiserror::Error;

/// Number of uniform grid points on `[−π, π)` used for spectrum
/// nonnegativity checks.
pub const PSD_GRID: usize = 4096;

/// Numerical slack allowed below zero when checking spectrum nonnegativity.
pub const PSD_SLACK: f64 = 1e-12;

/// Input symbol alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    /// Antipodal binary signaling: `X ∈ {±√P_X}`.
    Bpsk,
    /// Quaternary signaling: `X ∈ √(P_X/2)·{±1±j}`.
    Qpsk,
}

impl Alphabet {
    /// Alphabet cardinality.
    pub fn size(self) -> usize {
        match self {
            Alphabet::Bpsk => 2,
            Alphabet::Qpsk => 4,
        }
    }

    /// `log |alphabet|` in nats: the zero-ISI rate ceiling.
    pub fn log_size_nats(self) -> f64 {
        (self.size() as f64).ln()
    }

    /// `log2 |alphabet|` in bits.
    pub fn log_size_bits(self) -> f64 {
        match self {
            Alphabet::Bpsk => 1.0,
            Alphabet::Qpsk => 2.0,
        }
    }
}

impl std::fmt::Display for Alphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alphabet::Bpsk => write!(f, "bpsk"),
            Alphabet::Qpsk => write!(f, "qpsk"),
        }
    }
}

/// Errors from channel construction and spectrum evaluation.
#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel tap list is empty")]
    EmptyTaps,
    #[error("all channel taps are zero")]
    ZeroTaps,
    #[error("tap {index} has nonzero imaginary part {imag} under the BPSK alphabet")]
    ComplexTapUnderBpsk { index: usize, imag: f64 },
    #[error("autocorrelation violates Hermitian symmetry at lag {lag}: residue {residue:e}")]
    HermitianViolation { lag: i64, residue: f64 },
    #[error("spectrum evaluation left imaginary residue {imag:e} against real part {real:e}")]
    ImaginaryResidue { real: f64, imag: f64 },
}

/// A causal finite-impulse-response channel `h(D) = Σ_n h_n D^n` together
/// with its input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelResponse {
    taps: Vec<Complex64>,
    alphabet: Alphabet,
    label: String,
}

impl ChannelResponse {
    /// Builds a channel, enforcing: nonempty taps, at least one nonzero
    /// tap, and purely real taps under BPSK.
    pub fn new(
        taps: Vec<Complex64>,
        alphabet: Alphabet,
        label: impl Into<String>,
    ) -> Result<Self, ChannelError> {
        if taps.is_empty() {
            return Err(ChannelError::EmptyTaps);
        }
        if !taps.iter().any(|t| t.norm() > 0.0) {
            return Err(ChannelError::ZeroTaps);
        }
        if alphabet == Alphabet::Bpsk {
            if let Some((index, tap)) = taps.iter().enumerate().find(|(_, t)| t.im != 0.0) {
                return Err(ChannelError::ComplexTapUnderBpsk {
                    index,
                    imag: tap.im,
                });
            }
        }
        Ok(Self {
            taps,
            alphabet,
            label: label.into(),
        })
    }

    /// Convenience constructor for real taps.
    pub fn from_real_taps(
        taps: &[f64],
        alphabet: Alphabet,
        label: impl Into<String>,
    ) -> Result<Self, ChannelError> {
        Self::new(
            taps.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
            alphabet,
            label,
        )
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Channel memory `ν` (tap count − 1).
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    /// Tap energy `Σ|h_n|²`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    /// Autocorrelation `r_k = Σ_n h_n·conj(h_{n−k})` for `k = −ν..ν`.
    pub fn autocorrelation(&self) -> Autocorrelation {
        let nu = self.memory();
        let lags = (0..=nu)
            .map(|k| {
                self.taps
                    .iter()
                    .enumerate()
                    .skip(k)
                    .map(|(n, h)| h * self.taps[n - k].conj())
                    .sum()
            })
            .collect();
        Autocorrelation { lags }
    }
}

/// Hermitian autocorrelation sequence `r_{−ν}..r_ν`, stored as the
/// nonnegative-lag half; negative lags are reconstructed by conjugation,
/// so Hermitian symmetry holds bitwise by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    lags: Vec<Complex64>,
}

impl Autocorrelation {
    /// Builds from an explicit full lag list `r_{−ν}..r_ν`, validating
    /// Hermitian symmetry `r_{−k} = conj(r_k)` within `1e-12` relative.
    pub fn from_lags(full: &[Complex64]) -> Result<Self, ChannelError> {
        assert!(full.len() % 2 == 1, "lag list must have odd length");
        let nu = full.len() / 2;
        let scale = full[nu].norm().max(1.0);
        for k in 1..=nu {
            let residue = (full[nu - k] - full[nu + k].conj()).norm();
            if residue > 1e-12 * scale {
                return Err(ChannelError::HermitianViolation {
                    lag: k as i64,
                    residue,
                });
            }
        }
        if full[nu].im.abs() > 1e-12 * scale {
            return Err(ChannelError::HermitianViolation {
                lag: 0,
                residue: full[nu].im.abs(),
            });
        }
        Ok(Self {
            lags: full[nu..].to_vec(),
        })
    }

    /// Largest stored lag `ν`.
    pub fn span(&self) -> usize {
        self.lags.len() - 1
    }

    /// `r_k` for any `k`, using `r_{−k} = conj(r_k)`.
    pub fn lag(&self, k: i64) -> Complex64 {
        let a = k.unsigned_abs() as usize;
        if a > self.span() {
            Complex64::new(0.0, 0.0)
        } else if k >= 0 {
            self.lags[a]
        } else {
            self.lags[a].conj()
        }
    }

    /// Zero-lag value `r_0` (real, total tap energy).
    pub fn r0(&self) -> f64 {
        self.lags[0].re
    }

    /// Evaluates `R_hh(θ) = Σ_k r_k e^{−jkθ}` over the full symmetric lag
    /// range and discards the imaginary residue after verifying
    /// `|imag| < 1e-9·|real| + 1e-12`.
    pub fn psd_eval(&self, theta: f64) -> Result<f64, ChannelError> {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in -(self.span() as i64)..=(self.span() as i64) {
            sum += self.lag(k) * Complex64::from_polar(1.0, -(k as f64) * theta);
        }
        if sum.im.abs() >= 1e-9 * sum.re.abs() + 1e-12 {
            return Err(ChannelError::ImaginaryResidue {
                real: sum.re,
                imag: sum.im,
            });
        }
        Ok(sum.re)
    }

    /// Real spectrum evaluation via `r_0 + 2·Re Σ_{k≥1} r_k e^{−jkθ}`,
    /// exact for Hermitian lags; the fast path for quadrature kernels.
    pub(crate) fn psd_real(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (k, r) in self.lags.iter().enumerate().skip(1) {
            let (s, c) = (k as f64 * theta).sin_cos();
            // Re(r·e^{−jkθ}) = re·cos(kθ) + im·sin(kθ)
            acc += r.re * c + r.im * s;
        }
        self.lags[0].re + 2.0 * acc
    }

    /// Minimum of the spectrum over the fixed check grid.
    pub fn min_psd_on_grid(&self) -> f64 {
        (0..PSD_GRID)
            .map(|i| {
                let theta = -std::f64::consts::PI
                    + 2.0 * std::f64::consts::PI * (i as f64) / (PSD_GRID as f64);
                self.psd_real(theta)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// The two-tap `2^{−1/2}(1 + D)` channel.
pub fn dicode() -> ChannelResponse {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    ChannelResponse::from_real_taps(&[a, a], Alphabet::Bpsk, "2^-1/2 (1 + D)").unwrap()
}

/// The four-tap `2^{−1}(1 + D − D² − D³)` channel.
pub fn epr4() -> ChannelResponse {
    ChannelResponse::from_real_taps(
        &[0.5, 0.5, -0.5, -0.5],
        Alphabet::Bpsk,
        "2^-1 (1 + D - D^2 - D^3)",
    )
    .unwrap()
}

/// The seven-tap symmetric lowpass channel `0.19 + 0.35D + 0.46D² + 0.5D³
/// + 0.46D⁴ + 0.35D⁵ + 0.19D⁶`.
pub fn lowpass7() -> ChannelResponse {
    ChannelResponse::from_real_taps(
        &[0.19, 0.35, 0.46, 0.5, 0.46, 0.35, 0.19],
        Alphabet::Bpsk,
        "0.19 + 0.35D + 0.46D^2 + 0.5D^3 + 0.46D^4 + 0.35D^5 + 0.19D^6",
    )
    .unwrap()
}

/// The eleven-tap channel `1.6099^{−1/2}·Σ_{i=0}^{10} D^i/(1 + (i−5)²)`.
pub fn cauchy11() -> ChannelResponse {
    let norm = 1.6099f64.sqrt().recip();
    let taps: Vec<f64> = (0..=10)
        .map(|i| {
            let k = i as f64 - 5.0;
            norm / (1.0 + k * k)
        })
        .collect();
    ChannelResponse::from_real_taps(
        &taps,
        Alphabet::Bpsk,
        "1.6099^-1/2 sum_i D^i / (1 + (i-5)^2)",
    )
    .unwrap()
}

/// The complex two-tap `2^{−1}{(1+j) + (1−j)D}` channel with QPSK inputs.
pub fn dicode_complex() -> ChannelResponse {
    ChannelResponse::new(
        vec![Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5)],
        Alphabet::Qpsk,
        "2^-1 {(1+j) + (1-j)D}",
    )
    .unwrap()
}

/// The single-tap no-ISI channel.
pub fn identity() -> ChannelResponse {
    ChannelResponse::from_real_taps(&[1.0], Alphabet::Bpsk, "1").unwrap()
}

/// The five built-in example channels, in their conventional order.
pub fn builtin_channels() -> Vec<ChannelResponse> {
    vec![dicode(), epr4(), lowpass7(), cauchy11(), dicode_complex()]
}

/// Name registry for the CLI: the five built-ins, positional aliases
/// `ch1..ch5`, and the identity channel.
pub fn channel_by_name(name: &str) -> Option<ChannelResponse> {
    match name {
        "identity" => Some(identity()),
        "dicode" | "ch1" => Some(dicode()),
        "epr4" | "ch2" => Some(epr4()),
        "lowpass7" | "ch3" => Some(lowpass7()),
        "cauchy11" | "ch4" => Some(cauchy11()),
        "dicode-complex" | "ch5" => Some(dicode_complex()),
        _ => None,
    }
}

/// Names accepted by [`channel_by_name`], excluding aliases.
pub fn channel_names() -> &'static [&'static str] {
    &[
        "identity",
        "dicode",
        "epr4",
        "lowpass7",
        "cauchy11",
        "dicode-complex",
    ]
}

/// Errors from channel spec files, with 1-based line numbers.
#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("line {line}: unknown directive `{directive}`")]
    UnknownDirective { line: usize, directive: String },
    #[error("line {line}: duplicate `{directive}` directive")]
    DuplicateDirective { line: usize, directive: String },
    #[error("line {line}: `alphabet` must be `bpsk` or `qpsk`, got `{value}`")]
    BadAlphabet { line: usize, value: String },
    #[error("line {line}: tap {index}: malformed value `{token}`")]
    BadTap {
        line: usize,
        index: usize,
        token: String,
    },
    #[error("line {line}: tap {index} has nonzero imaginary part under bpsk")]
    ComplexTapUnderBpsk { line: usize, index: usize },
    #[error("missing required `{directive}` directive")]
    MissingDirective { directive: &'static str },
    #[error("channel is invalid: {0}")]
    Invalid(#[from] ChannelError),
}

/// Parses the channel spec file format: one directive per line,
/// `#` starts a comment.
///
/// ```text
/// alphabet bpsk|qpsk
/// taps <re>[:<im>] <re>[:<im>] ...
/// label <free text>          # optional
/// ```
pub fn parse_channel_str(text: &str) -> Result<ChannelResponse, SpecFileError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut taps: Option<Vec<Complex64>> = None;
    let mut taps_line = 0usize;
    let mut label: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (directive, rest) = match content.split_once(char::is_whitespace) {
            Some((d, r)) => (d, r.trim()),
            None => (content, ""),
        };
        match directive {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(SpecFileError::DuplicateDirective {
                        line,
                        directive: "alphabet".into(),
                    });
                }
                alphabet = Some(match rest {
                    "bpsk" => Alphabet::Bpsk,
                    "qpsk" => Alphabet::Qpsk,
                    other => {
                        return Err(SpecFileError::BadAlphabet {
                            line,
                            value: other.into(),
                        })
                    }
                });
            }
            "taps" => {
                if taps.is_some() {
                    return Err(SpecFileError::DuplicateDirective {
                        line,
                        directive: "taps".into(),
                    });
                }
                let mut parsed = Vec::new();
                for (index, token) in rest.split_whitespace().enumerate() {
                    let (re_s, im_s) = match token.split_once(':') {
                        Some((r, i)) => (r, Some(i)),
                        None => (token, None),
                    };
                    let bad = || SpecFileError::BadTap {
                        line,
                        index,
                        token: token.into(),
                    };
                    let re: f64 = re_s.parse().map_err(|_| bad())?;
                    let im: f64 = match im_s {
                        Some(s) => s.parse().map_err(|_| bad())?,
                        None => 0.0,
                    };
                    parsed.push(Complex64::new(re, im));
                }
                taps = Some(parsed);
                taps_line = line;
            }
            "label" => {
                if label.is_some() {
                    return Err(SpecFileError::DuplicateDirective {
                        line,
                        directive: "label".into(),
                    });
                }
                label = Some(rest.to_string());
            }
            other => {
                return Err(SpecFileError::UnknownDirective {
                    line,
                    directive: other.into(),
                })
            }
        }
    }

    let alphabet = alphabet.ok_or(SpecFileError::MissingDirective {
        directive: "alphabet",
    })?;
    let taps = taps.ok_or(SpecFileError::MissingDirective { directive: "taps" })?;
    if alphabet == Alphabet::Bpsk {
        if let Some(index) = taps.iter().position(|t| t.im != 0.0) {
            return Err(SpecFileError::ComplexTapUnderBpsk {
                line: taps_line,
                index,
            });
        }
    }
    Ok(ChannelResponse::new(
        taps,
        alphabet,
        label.unwrap_or_default(),
    )?)
}

/// Reads and parses a channel spec file from disk.
pub fn load_channel_file(path: &std::path::Path) -> Result<ChannelResponse, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_channel_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
