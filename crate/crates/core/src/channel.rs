//! Doubly-selective channels: the sampled spreading-function model acting on
//! `MN`-periodic waveforms, and the fractional-path Veh-A model built on top of it.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::ops::{Deref, DerefMut};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, SeededRng};
use crate::linalg::CMatrix;
use crate::scalar::{cis, czero, modulo, signed_rep, Scalar, Twiddles, C};

/// Transmit or receive samples `x[n]`, `n = ⌊Bt⌋ ∈ Z_MN`, read `MN`-periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWaveform<T>(pub Vec<C<T>>);

impl<T> Deref for TimeWaveform<T> {
    type Target = [C<T>];

    fn deref(&self) -> &[C<T>] {
        &self.0
    }
}

impl<T> DerefMut for TimeWaveform<T> {
    fn deref_mut(&mut self) -> &mut [C<T>] {
        &mut self.0
    }
}

/// Rectangular region of the delay-Doppler torus: delays `k_start..k_start+k_len` and
/// Dopplers `l_start..l_start+l_len`, both read modulo `MN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DdWindow {
    pub delay_start: i64,
    pub delay_len: usize,
    pub doppler_start: i64,
    pub doppler_len: usize,
}

impl DdWindow {
    /// `k ∈ {0..M−1}`, `l ∈ {−⌊N/2⌋..⌈N/2⌉−1}`.
    pub fn crystallization<T: Scalar>(cfg: &FrameConfig<T>) -> Self {
        Self {
            delay_start: 0,
            delay_len: cfg.m(),
            doppler_start: -((cfg.n() / 2) as i64),
            doppler_len: cfg.n(),
        }
    }

    /// Same extent as [`DdWindow::crystallization`] with the delay range also centred on zero,
    /// which captures the precursor taps of band-limited pulses.
    pub fn centered<T: Scalar>(cfg: &FrameConfig<T>) -> Self {
        Self {
            delay_start: -((cfg.m() / 2) as i64),
            ..Self::crystallization(cfg)
        }
    }

    /// Every lag `w1 − w2` between two points of the window: delays `|k| < delay_len`,
    /// Dopplers `|l| < doppler_len`, centred on the window's own offset difference of zero.
    pub fn differences(&self) -> Self {
        Self {
            delay_start: 1 - self.delay_len as i64,
            delay_len: 2 * self.delay_len - 1,
            doppler_start: 1 - self.doppler_len as i64,
            doppler_len: 2 * self.doppler_len - 1,
        }
    }

    /// A window is admissible when it fits inside one `M × N` crystallization period.
    pub fn validate<T: Scalar>(&self, cfg: &FrameConfig<T>) -> Result<()> {
        if self.delay_len == 0 || self.doppler_len == 0 || self.delay_len > cfg.m() || self.doppler_len > cfg.n() {
            return Err(Error::InvalidWindow(self.to_string()));
        }
        Ok(())
    }

    pub fn contains(&self, k: usize, l: usize, mn: usize) -> bool {
        modulo(k as i64 - self.delay_start, mn) < self.delay_len
            && modulo(l as i64 - self.doppler_start, mn) < self.doppler_len
    }

    /// Grid points `(k, l)` reduced modulo `mn`, delay-major.
    pub fn points(&self, mn: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.delay_len as i64).flat_map(move |dk| {
            (0..self.doppler_len as i64).map(move |dl| {
                (
                    modulo(self.delay_start + dk, mn),
                    modulo(self.doppler_start + dl, mn),
                )
            })
        })
    }
}

impl fmt::Display for DdWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k∈[{}, {}), l∈[{}, {})",
            self.delay_start,
            self.delay_start + self.delay_len as i64,
            self.doppler_start,
            self.doppler_start + self.doppler_len as i64
        )
    }
}

/// Sampled spreading function `h[k, l]` on the `MN × MN` torus, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingFunction<T> {
    cfg: FrameConfig<T>,
    taps: BTreeMap<(usize, usize), C<T>>,
}

impl<T: Scalar> SpreadingFunction<T> {
    pub fn new(cfg: &FrameConfig<T>) -> Self {
        Self {
            cfg: *cfg,
            taps: BTreeMap::new(),
        }
    }

    /// Builds from signed `(k, l, gain)` triples; indices are reduced mod `MN`, repeats accumulate.
    pub fn from_taps(cfg: &FrameConfig<T>, taps: impl IntoIterator<Item = (i64, i64, C<T>)>) -> Self {
        let mut h = Self::new(cfg);
        for (k, l, g) in taps {
            h.add(k, l, g);
        }
        h
    }

    /// `h = δ[k]δ[l]`.
    pub fn identity(cfg: &FrameConfig<T>) -> Self {
        Self::from_taps(cfg, [(0, 0, C::new(T::one(), T::zero()))])
    }

    pub fn cfg(&self) -> &FrameConfig<T> {
        &self.cfg
    }

    pub fn add(&mut self, k: i64, l: i64, gain: C<T>) {
        let mn = self.cfg.mn();
        *self.taps.entry((modulo(k, mn), modulo(l, mn))).or_insert_with(czero) += gain;
    }

    pub fn get(&self, k: i64, l: i64) -> C<T> {
        let mn = self.cfg.mn();
        self.taps
            .get(&(modulo(k, mn), modulo(l, mn)))
            .copied()
            .unwrap_or_else(czero)
    }

    /// Stored taps `((k, l), h[k, l])` with indices in `Z_MN`.
    pub fn taps(&self) -> impl Iterator<Item = ((usize, usize), C<T>)> + '_ {
        self.taps.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Positions whose magnitude exceeds `threshold`.
    pub fn support(&self, threshold: T) -> Vec<(usize, usize)> {
        self.taps
            .iter()
            .filter(|(_, v)| v.norm() > threshold)
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn energy(&self) -> T {
        self.taps.values().map(|v| v.norm_sqr()).sum()
    }

    /// Energy of the taps falling outside `window`.
    pub fn energy_outside(&self, window: &DdWindow) -> T {
        let mn = self.cfg.mn();
        self.taps
            .iter()
            .filter(|((k, l), _)| !window.contains(*k, *l, mn))
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }

    /// Keeps only taps inside `window`.
    pub fn restricted(&self, window: &DdWindow) -> Self {
        let mn = self.cfg.mn();
        Self {
            cfg: self.cfg,
            taps: self
                .taps
                .iter()
                .filter(|((k, l), _)| window.contains(*k, *l, mn))
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: C<T>) -> Self {
        Self {
            cfg: self.cfg,
            taps: self.taps.iter().map(|(k, v)| (*k, *v * factor)).collect(),
        }
    }

    /// Time-domain operator `G` with `y = G x` equal to [`apply_discrete_channel`]:
    /// `G[n, (n−k)_MN] = Σ_l h[k, l] e^{j2π l (n−k)/MN}`.
    pub fn time_operator(&self) -> CMatrix<T> {
        let mn = self.cfg.mn();
        let tw = Twiddles::<T>::new(mn);
        let mut g = CMatrix::zeros(mn, mn);
        for (&(k, l), &h) in &self.taps {
            if h.is_zero() {
                continue;
            }
            let mut m = (mn - k) % mn;
            let mut q = (l * m) % mn;
            for n in 0..mn {
                g[(n, m)] += h * tw.reduced(q);
                m += 1;
                q += l;
                if m == mn {
                    m = 0;
                    q = 0;
                }
                if q >= mn {
                    q -= mn;
                }
            }
        }
        g
    }
}

/// `y[n] = Σ_{k,l} h[k,l] x[(n−k)_MN] e^{j2π l (n−k)/MN}`, iterating only stored taps.
pub fn apply_discrete_channel<T: Scalar>(h: &SpreadingFunction<T>, x: &TimeWaveform<T>) -> Result<TimeWaveform<T>> {
    let mn = h.cfg().mn();
    if x.len() != mn {
        return Err(Error::DimensionMismatch {
            expected: mn,
            got: x.len(),
        });
    }
    let tw = Twiddles::<T>::new(mn);
    let mut y = vec![czero(); mn];
    for ((k, l), g) in h.taps() {
        if g.is_zero() {
            continue;
        }
        for (n, out) in y.iter_mut().enumerate() {
            let m = modulo(n as i64 - k as i64, mn);
            *out += g * x[m] * tw.at((l * m) as i64);
        }
    }
    Ok(TimeWaveform(y))
}

/// One propagation path with fractional delay and Doppler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path<T> {
    pub gain: C<T>,
    pub delay_s: T,
    pub doppler_hz: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalChannel<T> {
    pub paths: Vec<Path<T>>,
}

impl<T: Scalar> PhysicalChannel<T> {
    pub fn total_power(&self) -> T {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Rescales gains so that `Σ|gain|² = 1`.
    pub fn normalized(mut self) -> Self {
        let p = self.total_power();
        if p > T::zero() {
            let s = p.sqrt().recip();
            for path in &mut self.paths {
                path.gain *= s;
            }
        }
        self
    }

    /// CSV with header `gain_re,gain_im,delay_s,doppler_hz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gain_re,gain_im,delay_s,doppler_hz")?;
        for p in &self.paths {
            writeln!(
                w,
                "{},{},{},{}",
                p.gain.re.as_f64(),
                p.gain.im.as_f64(),
                p.delay_s.as_f64(),
                p.doppler_hz.as_f64()
            )?;
        }
        Ok(())
    }
}

/// Vehicular-A power-delay profile: delays in µs and relative powers in dB.
pub const VEH_A_DELAYS_US: [f64; 6] = [0.0, 0.31, 0.71, 1.09, 1.73, 2.51];
pub const VEH_A_POWERS_DB: [f64; 6] = [0.0, -1.0, -9.0, -10.0, -15.0, -20.0];

/// Draws one Veh-A realization: fixed delays, unit total power, uniform gain phases on
/// `[0, 2π)` and Dopplers `ν_i = ν_max cos θ_i` with `θ_i` uniform on `[−π, π)`.
pub fn sample_veh_a<T: Scalar>(_cfg: &FrameConfig<T>, vmax_hz: f64, rng: &mut SeededRng) -> PhysicalChannel<T> {
    let linear: Vec<f64> = VEH_A_POWERS_DB.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let total: f64 = linear.iter().sum();
    let paths = VEH_A_DELAYS_US
        .iter()
        .zip(&linear)
        .map(|(&tau_us, &p)| {
            let phase = 2.0 * std::f64::consts::PI * rng.uniform();
            let theta = std::f64::consts::PI * (2.0 * rng.uniform() - 1.0);
            Path {
                gain: cis::<T>(phase) * T::lit((p / total).sqrt()),
                delay_s: T::lit(tau_us / 1e6),
                doppler_hz: T::lit(vmax_hz * theta.cos()),
            }
        })
        .collect();
    PhysicalChannel { paths }
}

/// Gaussian-sinc pulse `p(t) = sinc(Bt)·exp(−α(Bt)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    alpha: f64,
    bandwidth: f64,
    period: usize,
}

/// Number of frame periods summed on each side when periodizing a windowed pulse.
const PERIOD_REPEATS: i64 = 4;

impl Pulse {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `p(t)` with `t` in seconds.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_normalized(self.bandwidth * t)
    }

    /// `p` at `u = Bt` resolution units.
    pub fn eval_normalized(&self, u: f64) -> f64 {
        sinc(u) * (-self.alpha * u * u).exp()
    }

    /// `MN`-periodic extension of the pulse at `u` resolution units.
    ///
    /// With `α = 0` this is exact circular sinc interpolation; otherwise the pulse is
    /// summed over ±4 frame periods.
    pub fn periodic(&self, u: f64) -> f64 {
        let mn = self.period as f64;
        if self.alpha == 0.0 {
            let s = (std::f64::consts::PI * u / mn).sin();
            if s.abs() < 1e-300 || (u / mn - (u / mn).round()).abs() < 1e-15 {
                return 1.0;
            }
            let num = (std::f64::consts::PI * u).sin();
            if self.period % 2 == 1 {
                num / (mn * s)
            } else {
                num / (mn * (std::f64::consts::PI * u / mn).tan())
            }
        } else {
            (-PERIOD_REPEATS..=PERIOD_REPEATS)
                .map(|q| self.eval_normalized(u - q as f64 * mn))
                .sum()
        }
    }

    /// Offsets beyond which the windowed pulse is below `e^{-40}` of its peak.
    fn reach(&self) -> usize {
        let half = self.period / 2;
        if self.alpha == 0.0 {
            half
        } else {
            ((40.0 / self.alpha).sqrt().ceil() as usize + 1).min(half)
        }
    }
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        let x = std::f64::consts::PI * u;
        x.sin() / x
    }
}

pub fn gaussian_sinc_pulse<T: Scalar>(cfg: &FrameConfig<T>, alpha: f64) -> Result<Pulse> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::NegativeAlpha(alpha));
    }
    Ok(Pulse {
        alpha,
        bandwidth: cfg.bandwidth().as_f64(),
        period: cfg.mn(),
    })
}

/// Time-domain operator `G` of the physical channel acting on the pulse-reconstructed,
/// `MN`-periodically extended waveform:
/// `G[n, m] = Σ_i gain_i e^{j2πν_i(n/B − τ_i)} p_per(n − m − Bτ_i)`.
pub fn physical_time_operator<T: Scalar>(phys: &PhysicalChannel<T>, pulse: &Pulse, cfg: &FrameConfig<T>) -> CMatrix<T> {
    let mn = cfg.mn();
    let b = cfg.bandwidth().as_f64();
    let mut g = CMatrix::zeros(mn, mn);
    for path in &phys.paths {
        let tau = path.delay_s.as_f64();
        let nu = path.doppler_hz.as_f64();
        let kernel: Vec<f64> = (0..mn).map(|d| pulse.periodic(d as f64 - b * tau)).collect();
        for n in 0..mn {
            let rot = path.gain * cis::<T>(2.0 * std::f64::consts::PI * nu * (n as f64 / b - tau));
            let row = g.row_mut(n);
            for (m, out) in row.iter_mut().enumerate() {
                let k = kernel[modulo(n as i64 - m as i64, mn)];
                if k != 0.0 {
                    *out += rot * T::lit(k);
                }
            }
        }
    }
    g
}

/// `y[n] = Σ_i gain_i · x_c(n/B − τ_i) · e^{j2πν_i(n/B − τ_i)}` with
/// `x_c(t) = Σ_m x[m] p_per(Bt − m)`.
pub fn apply_physical_channel<T: Scalar>(
    phys: &PhysicalChannel<T>,
    pulse: &Pulse,
    x: &TimeWaveform<T>,
    cfg: &FrameConfig<T>,
) -> Result<TimeWaveform<T>> {
    if x.len() != cfg.mn() || pulse.period != cfg.mn() {
        return Err(Error::DimensionMismatch {
            expected: cfg.mn(),
            got: x.len(),
        });
    }
    Ok(TimeWaveform(physical_time_operator(phys, pulse, cfg).matvec(x)?))
}

/// Effective delay-Doppler spreading function of the physical paths seen through a
/// separable Gaussian-sinc delay-Doppler pulse:
/// `h[k, l] = Σ_i gain_i p(k − Bτ_i) p(l − Tν_i) e^{j2πν_i(k/B − τ_i)}`.
///
/// Each path contributes over one `MN` period centred on its own location, using the
/// periodized pulse, so integer delays and Dopplers map to single taps exactly.
pub fn effective_spreading_function<T: Scalar>(
    phys: &PhysicalChannel<T>,
    pulse: &Pulse,
    cfg: &FrameConfig<T>,
) -> SpreadingFunction<T> {
    let mn = cfg.mn();
    let b = cfg.bandwidth().as_f64();
    let t = cfg.duration().as_f64();
    let reach = pulse.reach() as i64;
    let mut dense = vec![czero::<T>(); mn * mn];
    for path in &phys.paths {
        let tau = path.delay_s.as_f64();
        let nu = path.doppler_hz.as_f64();
        let (kc, lc) = ((b * tau).round() as i64, (t * nu).round() as i64);
        let span = |c: i64| {
            if 2 * reach as usize + 1 > mn {
                (c - reach)..(c - reach + mn as i64)
            } else {
                (c - reach)..(c + reach + 1)
            }
        };
        let doppler: Vec<(i64, f64)> = span(lc)
            .map(|l| (l, pulse.periodic(l as f64 - t * nu)))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        for k in span(kc) {
            let pk = pulse.periodic(k as f64 - b * tau);
            if pk == 0.0 {
                continue;
            }
            let rot = path.gain * cis::<T>(2.0 * std::f64::consts::PI * nu * (k as f64 / b - tau)) * T::lit(pk);
            let row = modulo(k, mn) * mn;
            for &(l, pl) in &doppler {
                dense[row + modulo(l, mn)] += rot * T::lit(pl);
            }
        }
    }
    let mut h = SpreadingFunction::new(cfg);
    for (idx, v) in dense.into_iter().enumerate() {
        if !v.is_zero() {
            h.taps.insert((idx / mn, idx % mn), v);
        }
    }
    h
}

/// Adds circularly-symmetric Gaussian noise of variance `σ² = 10^{−snr/10}` per sample
/// (unit transmit symbol energy, unit-power channel). Returns the noisy waveform and `σ²`.
pub fn add_noise<T: Scalar>(y: &TimeWaveform<T>, snr_db: f64, rng: &mut SeededRng) -> (TimeWaveform<T>, f64) {
    let var = noise_variance(snr_db);
    if var == 0.0 {
        return (y.clone(), 0.0);
    }
    let out = y.iter().map(|v| *v + rng.complex_normal::<T>(var)).collect();
    (TimeWaveform(out), var)
}

/// `σ² = 10^{−snr/10}`; zero at `+∞`.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Random on-grid channel inside `window`: every window point when `taps` is `None`,
/// otherwise `taps` distinct points, with i.i.d. `CN(0, 1)` gains.
pub fn random_on_grid_channel<T: Scalar>(
    cfg: &FrameConfig<T>,
    window: &DdWindow,
    taps: Option<usize>,
    rng: &mut SeededRng,
) -> SpreadingFunction<T> {
    let mn = cfg.mn();
    let mut points: Vec<(usize, usize)> = window.points(mn).collect();
    if let Some(count) = taps {
        // Partial Fisher-Yates for a deterministic distinct sample.
        let count = count.min(points.len());
        for i in 0..count {
            let j = i + rng.below(points.len() - i);
            points.swap(i, j);
        }
        points.truncate(count);
    }
    let mut h = SpreadingFunction::new(cfg);
    for (k, l) in points {
        h.add(k as i64, l as i64, rng.complex_normal(1.0));
    }
    h
}

/// Signed `(k, l)` of a stored tap, for display.
pub fn signed_tap(k: usize, l: usize, mn: usize) -> (i64, i64) {
    (signed_rep(k as i64, mn), signed_rep(l as i64, mn))
}
