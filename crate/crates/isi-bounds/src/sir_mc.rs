//! Monte-Carlo reference for the symmetric information rate.
//!
//! Simulates i.u.d. symbols through the tapped channel plus Gaussian noise
//! and runs the forward recursion of the symbol trellis to accumulate
//! `log p(y_k | y_{<k})` step by step, giving `ĥ(Y)`; the rate estimate is
//! `ĥ(Y) − h(N)`. Everything is deterministic given the seed:
//!
//! * one ChaCha8 stream per batch (`seed_from_u64(seed)` then
//!   `set_stream(batch)`), 20 batches, `n_symbols/20` counted steps each;
//! * per batch the draw order is: `ν` register-fill symbol indices, then
//!   per step one symbol index (`random::<u32>() & (|A|−1)`) followed by a
//!   Box–Muller pair (`u1 = 1 − random::<f64>()`, `u2 = random::<f64>()`);
//! * the first `10·ν` steps of each batch are burn-in: simulated and
//!   filtered, but excluded from the rate accumulator.
//!
//! Trellis states encode the last `ν` symbol indices in base `|A|` with the
//! most recent index in the least significant digit.

use crate::channel::{Alphabet, ChannelResponse};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// Number of independent batches behind every estimate.
pub const BATCHES: u64 = 20;

/// Largest tolerated channel memory per alphabet (`|A|^ν` states).
pub fn max_memory(alphabet: Alphabet) -> usize {
    match alphabet {
        Alphabet::Bpsk => 20,
        Alphabet::Qpsk => 10,
    }
}

#[derive(Debug, Error)]
pub enum SirError {
    #[error("channel memory {memory} exceeds the {max}-tap trellis guard")]
    StateSpaceTooLarge { memory: usize, max: usize },
    #[error("forward recursion underflowed at step {step}")]
    NumericalUnderflow { step: u64 },
    #[error("{n_symbols} symbols cannot fill {batches} batches")]
    TooFewSymbols { n_symbols: u64, batches: u64 },
}

/// Symbol trellis: per-(state, input) noiseless outputs for unit symbol
/// power, plus the state-update rule.
#[derive(Debug, Clone)]
pub struct TrellisSpec {
    alphabet: Alphabet,
    memory: usize,
    states: usize,
    /// `outputs[state·|A| + input]`.
    outputs: Vec<Complex64>,
}

impl TrellisSpec {
    /// Unit-power symbol value for an alphabet index.
    fn symbol(alphabet: Alphabet, idx: usize) -> Complex64 {
        match alphabet {
            Alphabet::Bpsk => Complex64::new(if idx == 0 { 1.0 } else { -1.0 }, 0.0),
            Alphabet::Qpsk => {
                let re = if idx & 2 == 0 { 1.0 } else { -1.0 };
                let im = if idx & 1 == 0 { 1.0 } else { -1.0 };
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    pub fn build(channel: &ChannelResponse) -> Result<Self, SirError> {
        let alphabet = channel.alphabet();
        let memory = channel.memory();
        let max = max_memory(alphabet);
        if memory > max {
            return Err(SirError::StateSpaceTooLarge { memory, max });
        }
        let a = alphabet.size();
        let states = a.pow(memory as u32);
        let taps = channel.taps();
        let mut outputs = vec![Complex64::new(0.0, 0.0); states * a];
        for state in 0..states {
            // digit i of the state is the index of the symbol i+1 steps back
            let mut past = Vec::with_capacity(memory);
            let mut rest = state;
            for _ in 0..memory {
                past.push(Self::symbol(alphabet, rest % a));
                rest /= a;
            }
            for input in 0..a {
                let mut y = taps[0] * Self::symbol(alphabet, input);
                for (i, x) in past.iter().enumerate() {
                    y += taps[i + 1] * x;
                }
                outputs[state * a + input] = y;
            }
        }
        Ok(Self {
            alphabet,
            memory,
            states,
            outputs,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Noiseless output for a `(state, input)` pair at unit symbol power.
    pub fn output(&self, state: usize, input: usize) -> Complex64 {
        self.outputs[state * self.alphabet.size() + input]
    }

    /// State after consuming `input`: drop the oldest digit, shift, insert.
    fn next_state(&self, state: usize, input: usize) -> usize {
        if self.memory == 0 {
            return 0;
        }
        let a = self.alphabet.size();
        input + (state % (self.states / a)) * a
    }
}

/// A seeded rate estimate; `rate` and `stderr` are in nats per symbol.
#[derive(Debug, Clone)]
pub struct SirEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub n_symbols: u64,
    pub seed: u64,
}

impl SirEstimate {
    pub fn rate_bits(&self) -> f64 {
        crate::nats_to_bits(self.rate)
    }

    pub fn stderr_bits(&self) -> f64 {
        crate::nats_to_bits(self.stderr)
    }
}

fn box_muller<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1 = 1.0 - rng.random::<f64>(); // (0, 1]: the log below stays finite
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// One batch: simulate `burn_in + steps` symbols and return the mean of
/// `log p(y_k | y_{<k})` over the counted steps.
fn run_batch(
    trellis: &TrellisSpec,
    n_0: f64,
    steps: u64,
    burn_in: u64,
    seed: u64,
    stream: u64,
) -> Result<f64, SirError> {
    let a = trellis.alphabet.size();
    let s_count = trellis.states;
    let complex = trellis.alphabet == Alphabet::Qpsk;
    let mask = (a - 1) as u32;
    let log_const = if complex {
        -(PI * n_0).ln()
    } else {
        -0.5 * (2.0 * PI * n_0).ln()
    };
    // real noise: variance N_0; complex: N_0/2 per component
    let noise_scale = if complex {
        (0.5 * n_0).sqrt()
    } else {
        n_0.sqrt()
    };
    let inv_spread = if complex { 1.0 / n_0 } else { 0.5 / n_0 };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let mut true_state = 0usize;
    for _ in 0..trellis.memory {
        let idx = (rng.random::<u32>() & mask) as usize;
        true_state = trellis.next_state(true_state, idx);
    }

    let mut alpha = vec![1.0f64 / s_count as f64; s_count];
    let mut next = vec![0.0f64; s_count];
    let mut weights = vec![f64::NEG_INFINITY; s_count * a];
    let ln_a = (a as f64).ln();
    let mut acc = 0.0f64;

    for step in 0..steps + burn_in {
        let idx = (rng.random::<u32>() & mask) as usize;
        let (n1, n2) = box_muller(&mut rng);
        let clean = trellis.output(true_state, idx);
        let y = if complex {
            clean + Complex64::new(noise_scale * n1, noise_scale * n2)
        } else {
            Complex64::new(clean.re + noise_scale * n1, 0.0)
        };
        true_state = trellis.next_state(true_state, idx);

        // joint log-weights ln α[s] − |y − out|²·inv_spread, max-shifted
        let mut wmax = f64::NEG_INFINITY;
        for s in 0..s_count {
            let la = if alpha[s] > 0.0 {
                alpha[s].ln()
            } else {
                f64::NEG_INFINITY
            };
            for input in 0..a {
                let d = y - trellis.outputs[s * a + input];
                let dist = if complex {
                    d.norm_sqr()
                } else {
                    d.re * d.re
                };
                let w = la - dist * inv_spread;
                weights[s * a + input] = w;
                if w > wmax {
                    wmax = w;
                }
            }
        }
        if !wmax.is_finite() {
            return Err(SirError::NumericalUnderflow { step });
        }

        next.iter_mut().for_each(|v| *v = 0.0);
        let mut tot = 0.0f64;
        for s in 0..s_count {
            for input in 0..a {
                let dw = weights[s * a + input] - wmax;
                // transitions below e^{-40} of the peak cannot move any
                // output digit; skipping them saves most exp calls
                if dw > -40.0 {
                    let c = dw.exp();
                    next[trellis.next_state(s, input)] += c;
                    tot += c;
                }
            }
        }
        if !(tot > 0.0) || !tot.is_finite() {
            return Err(SirError::NumericalUnderflow { step });
        }
        let inv_tot = 1.0 / tot;
        for (dst, src) in alpha.iter_mut().zip(&next) {
            *dst = src * inv_tot;
        }

        if step >= burn_in {
            // log p(y_k|y_{<k}) = wmax + ln tot − ln|A| + log_const
            acc += wmax + tot.ln() - ln_a + log_const;
        }
    }
    Ok(acc / steps as f64)
}

/// Estimates the symmetric information rate at `SNR = P_X/N_0` (unit
/// symbol power, unit-energy channel) from `n_symbols` counted symbols
/// split over [`BATCHES`] independent streams. The standard error is the
/// batch-mean spread divided by `√BATCHES`.
pub fn estimate_sir(
    channel: &ChannelResponse,
    snr_db: f64,
    n_symbols: u64,
    seed: u64,
) -> Result<SirEstimate, SirError> {
    let trellis = TrellisSpec::build(channel)?;
    let steps = n_symbols / BATCHES;
    if steps == 0 {
        return Err(SirError::TooFewSymbols {
            n_symbols,
            batches: BATCHES,
        });
    }
    let n_0 = 1.0 / crate::db_to_linear(snr_db);
    let burn_in = 10 * trellis.memory as u64;
    let h_noise = if trellis.alphabet == Alphabet::Qpsk {
        (PI * std::f64::consts::E * n_0).ln()
    } else {
        0.5 * (2.0 * PI * std::f64::consts::E * n_0).ln()
    };

    let rates: Vec<f64> = (0..BATCHES)
        .into_par_iter()
        .map(|batch| {
            run_batch(&trellis, n_0, steps, burn_in, seed, batch)
                .map(|mean_logp| -mean_logp - h_noise)
        })
        .collect::<Result<_, _>>()?;

    let b = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / b;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (b - 1.0);
    Ok(SirEstimate {
        rate: mean,
        stderr: (var / b).sqrt(),
        n_symbols: steps * BATCHES,
        seed,
    })
}
