use nalgebra::{DMatrix, DVector, Matrix5, Vector5};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{sample_noise, NoiseSpec};
use crate::error::{Error, Result};
use crate::units::TWO_PI;

const RAMSEY_SAMPLES: usize = 400;
const MAX_ITERATIONS: usize = 500;

/// Parameters of `A e^{−Γt} cos(νt + φ) + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub amplitude: f64,
    /// Decay rate `Γ_d` in 1/µs.
    pub rate: f64,
    /// Angular frequency `ν` in rad/µs.
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
    /// Covariance of `(A, Γ, ν, φ, c)`.
    pub covariance: [[f64; 5]; 5],
    pub residual_norm: f64,
    pub iterations: usize,
    /// Set when the signal carries no oscillation to fit.
    pub degenerate: bool,
}

impl DecayFit {
    pub fn rate_std(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        model(&self.params(), t)
    }

    fn params(&self) -> Vector5<f64> {
        Vector5::new(self.amplitude, self.rate, self.frequency, self.phase, self.offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyResult {
    pub times: Vec<f64>,
    pub signal: Vec<f64>,
    pub fit: DecayFit,
}

impl RamseyResult {
    pub fn t2star(&self) -> f64 {
        1.0 / self.fit.rate
    }
}

fn model(p: &Vector5<f64>, t: f64) -> f64 {
    p[0] * (-p[1] * t).exp() * (p[2] * t + p[3]).cos() + p[4]
}

/// Ensemble-averaged `|+x⟩` return probability after free evolution under
/// `(δ_R + γ(t))σz`, i.e. `⟨½(1 + cos(2δ_R t + 2Φ(t)))⟩` with `Φ = ∫γ`.
pub fn ramsey_signal(
    spec: &NoiseSpec,
    ramsey_detuning: f64,
    duration: f64,
    n_samples: usize,
    realizations: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(duration > 0.0) || n_samples < 10 || realizations == 0 {
        return Err(Error::domain("Ramsey run needs a positive duration, >= 10 samples and >= 1 realization"));
    }
    let dt = duration / (n_samples - 1) as f64;
    let times: Vec<f64> = (0..n_samples).map(|k| k as f64 * dt).collect();
    let members: Vec<Vec<f64>> = (0..realizations as u64)
        .into_par_iter()
        .map(|i| {
            let phi = sample_noise(spec, i).phase_uniform(dt, n_samples);
            times
                .iter()
                .zip(&phi)
                .map(|(t, p)| 0.5 * (1.0 + (2.0 * (ramsey_detuning * t + p)).cos()))
                .collect()
        })
        .collect();
    let mut signal = vec![0.0; n_samples];
    for m in &members {
        for (s, v) in signal.iter_mut().zip(m) {
            *s += v;
        }
    }
    signal.iter_mut().for_each(|s| *s /= realizations as f64);
    Ok((times, signal))
}

/// Simulated detuned Ramsey experiment and its decay fit. The fringe
/// frequency is `2δ_R` because the two levels split by `2δ_R`.
pub fn ramsey_t2star(spec: &NoiseSpec, ramsey_detuning: f64, duration: f64, realizations: usize) -> Result<RamseyResult> {
    let fringes = 2.0 * ramsey_detuning.abs() * duration / TWO_PI;
    if fringes < 5.0 {
        return Err(Error::domain(format!(
            "Ramsey window holds only {fringes:.2} fringes; at least 5 are needed"
        )));
    }
    let n = RAMSEY_SAMPLES.max((fringes * 16.0).ceil() as usize);
    let (times, signal) = ramsey_signal(spec, ramsey_detuning, duration, n, realizations)?;
    let fit = fit_decay_envelope(&times, &signal)?;
    Ok(RamseyResult { times, signal, fit })
}

/// Least-squares fit of `A e^{−Γt} cos(νt + φ) + c` with `Γ ≥ 0`.
pub fn fit_decay_envelope(times: &[f64], signal: &[f64]) -> Result<DecayFit> {
    let n = times.len();
    if n < 10 || signal.len() != n {
        return Err(Error::domain(format!(
            "decay fit needs >= 10 samples with matching times (got {n} times, {} values)",
            signal.len()
        )));
    }
    if times.iter().chain(signal).any(|v| !v.is_finite()) {
        return Err(Error::domain("decay fit input contains non-finite values"));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let spread = signal.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Ok(DecayFit {
            amplitude: 0.0,
            rate: 0.0,
            frequency: 0.0,
            phase: 0.0,
            offset: mean,
            covariance: [[0.0; 5]; 5],
            residual_norm: 0.0,
            iterations: 0,
            degenerate: true,
        });
    }

    let start = initial_guess(times, signal, mean);
    let fit = levenberg_marquardt(times, signal, start)?;
    Ok(fit)
}

fn initial_guess(times: &[f64], signal: &[f64], mean: f64) -> Vector5<f64> {
    let n = times.len();
    let span = times[n - 1] - times[0];
    let dt = span / (n - 1) as f64;
    let len = (4 * n).next_power_of_two();
    let mut buf: Vec<C64> = signal.iter().map(|v| C64::new(v - mean, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let peak = (1..len / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap_or(1);
    let nu = TWO_PI * peak as f64 / (len as f64 * dt);

    // Scan Γ on a log grid; for each, (A cos φ, A sin φ, c) solve linearly.
    let mut best = (f64::INFINITY, Vector5::new(0.0, 0.0, nu, 0.0, mean));
    let rates = std::iter::once(0.0).chain((0..=60).map(|k| 10f64.powf(-3.0 + 4.0 * k as f64 / 60.0) / span));
    for g in rates {
        let design = DMatrix::from_fn(n, 3, |i, j| {
            let t = times[i] - times[0];
            let e = (-g * t).exp();
            match j {
                0 => e * (nu * t).cos(),
                1 => -e * (nu * t).sin(),
                _ => 1.0,
            }
        });
        let rhs = DVector::from_column_slice(signal);
        let Ok(sol) = design.clone().svd(true, true).solve(&rhs, 1e-14) else { continue };
        let rss = (design * &sol - rhs).norm_squared();
        if rss < best.0 {
            let (a, b) = (sol[0], sol[1]);
            // shift the phase reference back from times[0] to t = 0
            let amp = a.hypot(b) * (g * times[0]).exp();
            let phase = b.atan2(a) - nu * times[0];
            best = (rss, Vector5::new(amp, g, nu, phase, sol[2]));
        }
    }
    best.1
}

fn residuals(times: &[f64], signal: &[f64], p: &Vector5<f64>) -> (Vec<f64>, f64) {
    let r: Vec<f64> = times.iter().zip(signal).map(|(t, y)| model(p, *t) - y).collect();
    let rss = r.iter().map(|v| v * v).sum();
    (r, rss)
}

fn normal_equations(times: &[f64], r: &[f64], p: &Vector5<f64>) -> (Matrix5<f64>, Vector5<f64>) {
    let mut jtj = Matrix5::zeros();
    let mut jtr = Vector5::zeros();
    for (t, res) in times.iter().zip(r) {
        let e = (-p[1] * t).exp();
        let (s, c) = (p[2] * t + p[3]).sin_cos();
        let j = Vector5::new(e * c, -t * p[0] * e * c, -t * p[0] * e * s, -p[0] * e * s, 1.0);
        jtj += j * j.transpose();
        jtr += j * *res;
    }
    (jtj, jtr)
}

fn levenberg_marquardt(times: &[f64], signal: &[f64], start: Vector5<f64>) -> Result<DecayFit> {
    let n = times.len();
    let mut p = start;
    let (mut r, mut rss) = residuals(times, signal, &p);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..MAX_ITERATIONS {
        iterations = it + 1;
        let (jtj, jtr) = normal_equations(times, &r, &p);
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for k in 0..5 {
                damped[(k, k)] += mu * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = p + step;
            trial[1] = trial[1].max(0.0);
            let (tr, trss) = residuals(times, signal, &trial);
            if trss.is_finite() && trss <= rss {
                let rel = (rss - trss) / rss.max(1e-300);
                let small_step = (trial - p).norm() <= 1e-12 * (p.norm() + 1e-12);
                p = trial;
                r = tr;
                rss = trss;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                if rel < 1e-14 || small_step || rss < 1e-28 * n as f64 {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            // no downhill step at any damping: a stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }
    let residual_norm = rss.sqrt();
    if !converged || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit {
            message: format!("Levenberg-Marquardt did not converge in {MAX_ITERATIONS} iterations"),
            residual_norm,
        });
    }
    // Canonical form: A ≥ 0 and φ ∈ (−π, π].
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[3] += std::f64::consts::PI;
    }
    p[3] = (p[3].sin()).atan2(p[3].cos());
    let (jtj, _) = normal_equations(times, &r, &p);
    let sigma2 = rss / (n as f64 - 5.0).max(1.0);
    let cov = jtj.try_inverse().map(|m| m * sigma2).unwrap_or_else(|| Matrix5::from_element(f64::NAN));
    let mut covariance = [[0.0; 5]; 5];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cov[(i, j)];
        }
    }
    Ok(DecayFit {
        amplitude: p[0],
        rate: p[1],
        frequency: p[2],
        phase: p[3],
        offset: p[4],
        covariance,
        residual_norm,
        iterations,
        degenerate: p[0].abs() < 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synth(a: f64, g: f64, nu: f64, phi: f64, c: f64, n: usize, span: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect();
        let y = t.iter().map(|t| a * (-g * t).exp() * (nu * t + phi).cos() + c).collect();
        (t, y)
    }

    #[test]
    fn exact_model_is_recovered() {
        let (t, y) = synth(0.45, 0.125, mhz(1.0), 0.3, 0.5, 400, 20.0);
        let f = fit_decay_envelope(&t, &y).unwrap();
        assert!((f.amplitude - 0.45).abs() < 1e-8);
        assert!((f.rate - 0.125).abs() < 1e-8);
        assert!((f.frequency - mhz(1.0)).abs() < 1e-8);
        assert!((f.phase - 0.3).abs() < 1e-8);
        assert!((f.offset - 0.5).abs() < 1e-8);
        assert!(!f.degenerate);
    }

    #[test]
    fn jittered_model_within_five_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let (t, mut y) = synth(0.5, 0.125, mhz(0.8), -1.0, 0.5, 400, 24.0);
            for v in &mut y {
                *v += 0.01 * rng.random_range(-1.0..1.0) * 3f64.sqrt();
            }
            let f = fit_decay_envelope(&t, &y).unwrap();
            assert!((f.rate / 0.125 - 1.0).abs() < 0.05, "rate {}", f.rate);
        }
    }

    #[test]
    fn constant_signal_is_degenerate() {
        let t: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let f = fit_decay_envelope(&t, &vec![0.7; 50]).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.rate, 0.0);
        assert!((f.offset - 0.7).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_decay_envelope(&[0.0; 5], &[1.0; 5]).is_err());
    }

    #[test]
    fn noiseless_ramsey_does_not_decay() {
        let spec = NoiseSpec::new(mhz(1.0), 0.0, 10, 0).unwrap();
        let r = ramsey_t2star(&spec, mhz(0.5), 10.0, 2).unwrap();
        assert!(r.fit.rate <= 3.0 * r.fit.rate_std() + 1e-9);
        assert!((r.fit.frequency - 2.0 * mhz(0.5)).abs() < 1e-6);
    }

    #[test]
    fn too_few_fringes_rejected() {
        let spec = NoiseSpec::new(mhz(1.0), 0.0, 10, 0).unwrap();
        assert!(matches!(ramsey_t2star(&spec, mhz(0.1), 10.0, 2), Err(Error::Domain(_))));
    }
}
