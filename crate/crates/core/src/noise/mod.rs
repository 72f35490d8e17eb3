//! Band-limited dephasing noise, detuning draws, ensembles and Ramsey fits.
//!
//! A realization is a sum of `N` cosines with frequencies uniform on
//! `[0, ω_c)` and phases uniform on `[0, 2π)`,
//!
//! `γ(t) = α √(2ω_cΓ/N) Σⱼ cos(ωⱼt + φⱼ)`,
//!
//! whose RMS is `α √(ω_cΓ)`. Every draw comes from a ChaCha stream keyed on
//! `(seed, realization index, stream id)`, so realizations can be generated
//! in any order.

mod ensemble;
mod ramsey;
mod spectrum;

pub use ensemble::{noisy_ensemble, noisy_ensemble_with, EnsembleOptions, EnsembleResult};
pub use ramsey::{fit_decay_envelope, ramsey_signal, ramsey_t2star, DecayFit, RamseyResult};
pub use spectrum::{spectral_profile, SpectralProfile};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::units::TWO_PI;

/// Default number of tones per realization.
pub const DEFAULT_TONES: usize = 1000;
/// Default ensemble size.
pub const DEFAULT_REALIZATIONS: usize = 200;

const STREAM_NOISE: u64 = 0;
const STREAM_DETUNING: u64 = 1;
const REANCHOR: usize = 2048;

pub(crate) fn stream_rng(seed: u64, index: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(4).wrapping_add(stream));
    rng
}

/// Parameters of flat band-limited dephasing noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Cut-off `ω_c` in rad/µs.
    pub bandwidth: f64,
    /// One-sided spectral density `Γ` in rad²/µs.
    pub psd: f64,
    pub n_tones: usize,
    /// Multiplies every realization.
    pub alpha_corr: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(bandwidth: f64, psd: f64, n_tones: usize, seed: u64) -> Result<Self> {
        let s = NoiseSpec {
            bandwidth,
            psd,
            n_tones,
            alpha_corr: 1.0,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// Noise whose nominal RMS `√(ω_cΓ)` equals `rms` (rad/µs).
    pub fn from_rms(bandwidth: f64, rms: f64, n_tones: usize, seed: u64) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::domain(format!("noise bandwidth must be positive, got {bandwidth}")));
        }
        Self::new(bandwidth, rms * rms / bandwidth, n_tones, seed)
    }

    /// Noise from an amplitude spectral density quoted in MHz/√MHz, i.e.
    /// `γ_rms/2π = ASD·√(ω_c/2π)`, which gives `Γ = 2π·ASD²`.
    pub fn from_asd(bandwidth: f64, asd_mhz_per_sqrt_mhz: f64, n_tones: usize, seed: u64) -> Result<Self> {
        Self::new(bandwidth, TWO_PI * asd_mhz_per_sqrt_mhz * asd_mhz_per_sqrt_mhz, n_tones, seed)
    }

    pub fn with_alpha(mut self, alpha_corr: f64) -> Result<Self> {
        self.alpha_corr = alpha_corr;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::domain(format!("noise bandwidth must be positive, got {}", self.bandwidth)));
        }
        if !(self.psd.is_finite() && self.psd >= 0.0) {
            return Err(Error::domain(format!("noise spectral density must be non-negative, got {}", self.psd)));
        }
        if self.n_tones == 0 {
            return Err(Error::domain("noise needs at least one tone"));
        }
        if !(self.alpha_corr.is_finite() && self.alpha_corr >= 0.0) {
            return Err(Error::domain(format!("noise scale must be non-negative, got {}", self.alpha_corr)));
        }
        Ok(())
    }

    /// `α √(ω_cΓ)`.
    pub fn gamma_rms(&self) -> f64 {
        self.alpha_corr * (self.bandwidth * self.psd).sqrt()
    }

    /// Amplitude of each tone.
    pub fn tone_amplitude(&self) -> f64 {
        self.alpha_corr * (2.0 * self.bandwidth * self.psd / self.n_tones as f64).sqrt()
    }

    /// Long-time Ramsey decay rate `2πΓα²` of the ensemble coherence.
    pub fn dephasing_rate(&self) -> f64 {
        TWO_PI * self.psd * self.alpha_corr * self.alpha_corr
    }
}

/// One sampled trajectory `γ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    amplitude: f64,
    freqs: Vec<f64>,
    phases: Vec<f64>,
    seed: u64,
    index: u64,
}

pub fn sample_noise(spec: &NoiseSpec, index: u64) -> NoiseRealization {
    let mut rng = stream_rng(spec.seed, index, STREAM_NOISE);
    let mut freqs = Vec::with_capacity(spec.n_tones);
    let mut phases = Vec::with_capacity(spec.n_tones);
    for _ in 0..spec.n_tones {
        freqs.push(spec.bandwidth * rng.random::<f64>());
        phases.push(TWO_PI * rng.random::<f64>());
    }
    NoiseRealization {
        amplitude: spec.tone_amplitude(),
        freqs,
        phases,
        seed: spec.seed,
        index,
    }
}

impl NoiseRealization {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn tones(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.freqs.iter().copied().zip(self.phases.iter().copied())
    }

    pub fn tone_amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * self.tones().map(|(w, p)| (w * t + p).cos()).sum::<f64>()
    }

    /// `γ(t₀ + k·dt)` for `k = 0..n`, by phasor recurrence re-anchored
    /// every few thousand samples.
    pub fn sample_uniform(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        if self.amplitude == 0.0 {
            return out;
        }
        let tones: Vec<Tone> = self.tones().map(|(w, p)| Tone { w, p, re: 1.0, im: 0.0 }).collect();
        accumulate_tones(&tones, t0, dt, &mut out);
        for v in &mut out {
            *v *= self.amplitude;
        }
        out
    }

    /// `∫₀ᵗ γ` at `t = k·dt`, `k = 0..n`.
    pub fn phase_uniform(&self, dt: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        if self.amplitude == 0.0 {
            return out;
        }
        // ∫₀ᵗ cos(ωs + φ) ds = (sin(ωt + φ) − sin φ)/ω, with the ω → 0 limit t·cos φ.
        let mut tones = Vec::with_capacity(self.freqs.len());
        let mut offset = 0.0;
        let mut drift = 0.0;
        for (w, p) in self.tones() {
            if w * dt * n as f64 > 1e-6 {
                tones.push(Tone { w, p, re: 0.0, im: 1.0 / w });
                offset += p.sin() / w;
            } else {
                drift += p.cos();
            }
        }
        accumulate_tones(&tones, 0.0, dt, &mut out);
        for (k, v) in out.iter_mut().enumerate() {
            *v = self.amplitude * (*v - offset + k as f64 * dt * drift);
        }
        if let Some(first) = out.first_mut() {
            *first = 0.0;
        }
        out
    }
}

/// `re·cos(ωt + φ) + im·sin(ωt + φ)`.
#[derive(Clone, Copy)]
struct Tone {
    w: f64,
    p: f64,
    re: f64,
    im: f64,
}

const LANES: usize = 8;

/// Adds `Σ_j tone_j(t₀ + k·dt)` to `out[k]`. Tones advance by phasor
/// multiplication in interleaved groups so that independent recurrences
/// overlap, and restart from exact phases every `REANCHOR` samples.
fn accumulate_tones(tones: &[Tone], t0: f64, dt: f64, out: &mut [f64]) {
    for group in tones.chunks(LANES) {
        let mut g = [Tone { w: 0.0, p: 0.0, re: 0.0, im: 0.0 }; LANES];
        g[..group.len()].copy_from_slice(group);
        let (mut sr, mut si) = ([0.0; LANES], [0.0; LANES]);
        for j in 0..LANES {
            (si[j], sr[j]) = (g[j].w * dt).sin_cos();
        }
        for (b, block) in out.chunks_mut(REANCHOR).enumerate() {
            let t = t0 + (b * REANCHOR) as f64 * dt;
            let (mut zr, mut zi) = ([0.0; LANES], [0.0; LANES]);
            for j in 0..LANES {
                (zi[j], zr[j]) = (g[j].w * t + g[j].p).sin_cos();
            }
            for v in block.iter_mut() {
                let mut acc = 0.0;
                for j in 0..LANES {
                    acc += g[j].re * zr[j] + g[j].im * zi[j];
                    let r = zr[j] * sr[j] - zi[j] * si[j];
                    zi[j] = zr[j] * si[j] + zi[j] * sr[j];
                    zr[j] = r;
                }
                *v += acc;
            }
        }
    }
}

/// Static Gaussian detuning `δσz`, redrawn per realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSpec {
    /// Standard deviation in rad/µs.
    pub sigma: f64,
    pub seed: u64,
}

impl DetuningSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::domain(format!("detuning spread must be non-negative, got {sigma}")));
        }
        Ok(DetuningSpec { sigma, seed })
    }

    pub fn draw(&self, index: u64) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let mut rng = stream_rng(self.seed, index, STREAM_DETUNING);
        Normal::new(0.0, self.sigma).expect("validated sigma").sample(&mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    #[test]
    fn zero_psd_is_silent() {
        let r = sample_noise(&NoiseSpec::new(mhz(2.5), 0.0, 100, 1).unwrap(), 0);
        assert_eq!(r.eval(0.3), 0.0);
        assert!(r.sample_uniform(0.0, 0.01, 50).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_tone_amplitude() {
        let spec = NoiseSpec::new(mhz(1.0), 0.3, 1, 9).unwrap();
        let r = sample_noise(&spec, 4);
        assert!((r.tone_amplitude() - (2.0 * spec.bandwidth * spec.psd).sqrt()).abs() < 1e-15);
        let (w, p) = r.tones().next().unwrap();
        assert!((r.eval(0.7) - r.tone_amplitude() * (w * 0.7 + p).cos()).abs() < 1e-15);
    }

    #[test]
    fn rms_matches_spectral_density() {
        // 2.5 MHz bandwidth, nominal RMS 0.1 MHz, sampled over 1 ms.
        let spec = NoiseSpec::from_rms(mhz(2.5), mhz(0.1), DEFAULT_TONES, 42).unwrap();
        let r = sample_noise(&spec, 0);
        let n = 200_000;
        let g = r.sample_uniform(0.0, 1000.0 / n as f64, n);
        let rms = (g.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        let mean = g.iter().sum::<f64>() / n as f64;
        assert!((rms / spec.gamma_rms() - 1.0).abs() < 0.05, "rms ratio {}", rms / spec.gamma_rms());
        assert!(mean.abs() < 0.05 * spec.gamma_rms());
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let spec = NoiseSpec::from_rms(mhz(3.0), mhz(0.2), 50, 3).unwrap();
        let r = sample_noise(&spec, 7);
        let (t0, dt) = (0.013, 0.0007);
        let g = r.sample_uniform(t0, dt, 5000);
        for k in [0, 1, 2047, 2048, 4999] {
            assert!((g[k] - r.eval(t0 + k as f64 * dt)).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_integral_matches_quadrature() {
        let spec = NoiseSpec::from_rms(mhz(1.0), mhz(0.3), 20, 5).unwrap();
        let r = sample_noise(&spec, 2);
        let dt = 0.01;
        let phi = r.phase_uniform(dt, 301);
        let q = crate::numerics::integrate(&|t| r.eval(t), 0.0, 3.0, 1e-12).unwrap();
        assert!((phi[300] - q).abs() < 1e-9);
        assert_eq!(phi[0], 0.0);
    }

    #[test]
    fn streams_are_order_independent() {
        let spec = NoiseSpec::from_rms(mhz(1.0), mhz(0.1), 10, 77).unwrap();
        let a = sample_noise(&spec, 5);
        let _ = sample_noise(&spec, 4);
        assert_eq!(a, sample_noise(&spec, 5));
        assert_ne!(a, sample_noise(&spec, 6));
        let d = DetuningSpec::new(1.0, 77).unwrap();
        assert_eq!(d.draw(3), d.draw(3));
        assert_ne!(d.draw(3), d.draw(4));
    }

    #[test]
    fn asd_conversion() {
        // 0.079 MHz/√MHz over 2.5 MHz gives γ_rms/2π = 0.079·√2.5 MHz.
        let spec = NoiseSpec::from_asd(mhz(2.5), 0.079, 10, 0).unwrap();
        assert!((spec.gamma_rms() / TWO_PI - 0.079 * 2.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn invalid_specs() {
        assert!(NoiseSpec::new(0.0, 1.0, 10, 0).is_err());
        assert!(NoiseSpec::new(1.0, -1.0, 10, 0).is_err());
        assert!(NoiseSpec::new(1.0, 1.0, 0, 0).is_err());
        assert!(DetuningSpec::new(-1.0, 0).is_err());
    }
}
