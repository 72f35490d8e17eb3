use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::protocols::ControlFields;
use crate::units::TWO_PI;

const PAD: usize = 4;

/// One-sided amplitude spectrum of `bz(t)` over the protocol window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    /// Angular frequencies in rad/µs.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Largest component away from zero frequency, `(ν, |B|)`.
    pub peak: Option<(f64, f64)>,
    /// Measured half width at half maximum of that peak, rad/µs.
    pub half_width: Option<f64>,
    /// `λ₀/(τΔ')`, the decay rate of the spectral envelope; `Δ' = αJ₀(2Ω)`
    /// for the Floquet drive and `Δ` otherwise.
    pub decay_rate: f64,
    /// `ω − λ₀/(τΔ')`, the lower edge of the protected band (Floquet only).
    pub knee: Option<f64>,
}

pub fn spectral_profile(fields: &ControlFields, n_samples: usize) -> Result<SpectralProfile> {
    if n_samples < 1024 || !n_samples.is_power_of_two() {
        return Err(Error::domain(format!("n_samples must be a power of two >= 1024, got {n_samples}")));
    }
    let tau = fields.tau();
    let dt = tau / n_samples as f64;
    let len = PAD * n_samples;
    let mut buf: Vec<C64> = (0..n_samples).map(|k| C64::new(fields.at(k as f64 * dt).z, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let half = len / 2;
    let scale = 1.0 / n_samples as f64;
    let frequencies: Vec<f64> = (0..=half).map(|k| TWO_PI * k as f64 / (len as f64 * dt)).collect();
    let amplitudes: Vec<f64> = (0..=half)
        .map(|k| if k == 0 { buf[0].norm() * scale } else { 2.0 * buf[k].norm() * scale })
        .collect();

    // Skip the zero-frequency lobe of the rectangular window.
    let skip = 2 * PAD + 1;
    let peak_idx = (skip..=half).max_by(|&a, &b| amplitudes[a].total_cmp(&amplitudes[b]));
    let peak = peak_idx.map(|k| (frequencies[k], amplitudes[k]));
    let half_width = peak_idx.and_then(|k| hwhm(&frequencies, &amplitudes, k));

    let (delta_eff, omega) = match (fields.params(), fields.floquet()) {
        (Some(p), Some((_, w))) => (p.effective_delta()?.abs(), Some(w)),
        (Some(p), None) => (p.delta, None),
        _ => (f64::NAN, None),
    };
    let lambda0 = fields.params().map_or(f64::NAN, |p| p.schedule.lambda0().abs());
    let decay_rate = lambda0 / (tau * delta_eff);
    Ok(SpectralProfile {
        frequencies,
        amplitudes,
        peak,
        half_width,
        decay_rate,
        knee: omega.map(|w| w - decay_rate),
    })
}

fn hwhm(f: &[f64], a: &[f64], k: usize) -> Option<f64> {
    let target = 0.5 * a[k];
    let cross = |i: usize, j: usize| f[i] + (target - a[i]) * (f[j] - f[i]) / (a[j] - a[i]);
    let mut lo = None;
    for i in (1..k).rev() {
        if a[i] < target {
            lo = Some(cross(i, i + 1));
            break;
        }
    }
    let mut hi = None;
    for i in k + 1..a.len() {
        if a[i] < target {
            hi = Some(cross(i - 1, i));
            break;
        }
    }
    Some(0.5 * (hi? - lo?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{fe_fields, lz_fields, ProtocolParams};
    use crate::schedules::SweepSchedule;
    use crate::units::mhz;

    fn fig3() -> ProtocolParams {
        ProtocolParams::new(mhz(0.1), SweepSchedule::linear(mhz(1.5), 6.0).unwrap())
            .unwrap()
            .with_floquet(mhz(6.0), std::f64::consts::FRAC_PI_4)
    }

    #[test]
    fn lz_spectrum_is_static() {
        let s = spectral_profile(&lz_fields(&fig3()), 4096).unwrap();
        assert!((s.amplitudes[0] - mhz(0.1)).abs() < 1e-12);
        // only the window's sinc sidelobes survive past the zero-frequency lobe
        assert!(s.amplitudes[9..].iter().all(|&a| a < 0.3 * s.amplitudes[0]));
        assert!(s.knee.is_none());
    }

    #[test]
    fn fe_peak_sits_at_floquet_frequency() {
        let s = spectral_profile(&fe_fields(&fig3()).unwrap(), 8192).unwrap();
        let (nu, _) = s.peak.unwrap();
        assert!((nu - mhz(6.0)).abs() < 0.05 * mhz(6.0));
        let w = s.half_width.unwrap();
        assert!((w / s.decay_rate - 1.0).abs() < 0.5, "width {w} vs {}", s.decay_rate);
    }

    #[test]
    fn sample_count_is_validated() {
        let f = lz_fields(&fig3());
        assert!(spectral_profile(&f, 1000).is_err());
        assert!(spectral_profile(&f, 512).is_err());
    }
}
