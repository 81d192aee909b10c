//! Configuration-driven Monte-Carlo harness for the per-carrier energy, BER and NMSE
//! experiments and the property suite.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bases::{AfdmParams, Basis, SchemeId};
use crate::channel::{
    add_noise, effective_spreading_function, gaussian_sinc_pulse, physical_time_operator,
    random_on_grid_channel, sample_veh_a, DdWindow, PhysicalChannel, SpreadingFunction, TimeWaveform,
};
use crate::error::{Error, Result};
use crate::frame::{qam_demap, qam_map, FrameConfig, SeededRng};
use crate::linalg::CMatrix;
use crate::properties::{
    afdm_strongly_crystallized, check_lemma1_condition, check_non_selective, check_predictable,
    equivalence_report, strong_crystallization_afdm, PropertyVerdict, ON_GRID_TOL,
};
use crate::scalar::{Scalar, C};
use crate::transceiver::{
    default_pilot_index, effective_from_time_operator, estimate_pilot_channel, modulate, project, MmseFilter,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiMode {
    Perfect,
    Estimated,
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" => Ok(Self::Perfect),
            "estimated" => Ok(Self::Estimated),
            other => Err(Error::Config(format!("unknown csi mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotSnrPolicy {
    EqualToData,
}

impl FromStr for PilotSnrPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "equaltodata" => Ok(Self::EqualToData),
            other => Err(Error::Config(format!("unknown pilot snr policy `{other}`"))),
        }
    }
}

/// Channel family drawn per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Veh-A paths through the separable delay-Doppler Gaussian-sinc pulse.
    VehA,
    /// Veh-A paths acting on the pulse-reconstructed periodic waveform.
    VehAWaveform,
    Identity,
    /// Unit-energy i.i.d. Gaussian taps filling the crystallization window.
    OnGrid,
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "veh-a" | "veha" => Ok(Self::VehA),
            "veh-a-waveform" | "veha-waveform" => Ok(Self::VehAWaveform),
            "identity" => Ok(Self::Identity),
            "on-grid" | "ongrid" => Ok(Self::OnGrid),
            other => Err(Error::Config(format!("unknown channel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub delta_f: f64,
    pub schemes: Vec<SchemeId>,
    pub afdm: AfdmParams,
    pub vmax: f64,
    pub alpha: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub csi_mode: CsiMode,
    pub pilot_snr_policy: PilotSnrPolicy,
    pub qam_order: usize,
    pub channel: ChannelKind,
    pub pilot_index: Option<usize>,
    pub delay_window_start: i64,
    pub property_channels: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 13,
            n: 16,
            delta_f: 30e3,
            schemes: SchemeId::ALL.to_vec(),
            afdm: AfdmParams::new(8, 0.0),
            vmax: 815.0,
            alpha: 0.05,
            snr_grid_db: (0..=10).map(|i| 2.5 * i as f64).collect(),
            trials: 2000,
            master_seed: 1,
            csi_mode: CsiMode::Perfect,
            pilot_snr_policy: PilotSnrPolicy::EqualToData,
            qam_order: 4,
            channel: ChannelKind::VehA,
            pilot_index: None,
            delay_window_start: 0,
            property_channels: 10,
        }
    }
}

fn parse_num<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_snr(key: &str, value: &str) -> Result<f64> {
    match value.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        v => parse_num(key, v),
    }
}

/// Accepts `a,b,c` or a MATLAB-style range `start:step:stop`.
fn parse_snr_grid(value: &str) -> Result<Vec<f64>> {
    let key = "snr_grid_db";
    if value.contains(':') {
        let parts: Vec<f64> = value.split(':').map(|p| parse_num(key, p)).collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(Error::Config(format!("range `{value}` must be start:step:stop")));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(Error::Config(format!("empty or invalid range `{value}`")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    value.split(',').map(|v| parse_snr(key, v)).collect()
}

impl ExperimentConfig {
    /// Parses flat `key = value` text over the defaults. `#` starts a comment; unknown
    /// keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut afdm_delta: Option<i64> = None;
        let mut afdm_c2: Option<f64> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "m" => cfg.m = parse_num(key, value)?,
                "n" => cfg.n = parse_num(key, value)?,
                "delta_f" => cfg.delta_f = parse_num(key, value)?,
                "schemes" => {
                    cfg.schemes = value
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<Result<_>>()?
                }
                "afdm_delta" => afdm_delta = Some(parse_num(key, value)?),
                "afdm_c2" => afdm_c2 = Some(parse_num(key, value)?),
                "vmax" => cfg.vmax = parse_num(key, value)?,
                "alpha" => cfg.alpha = parse_num(key, value)?,
                "snr_grid_db" => cfg.snr_grid_db = parse_snr_grid(value)?,
                "trials" => cfg.trials = parse_num(key, value)?,
                "master_seed" => cfg.master_seed = parse_num(key, value)?,
                "csi_mode" => cfg.csi_mode = value.parse()?,
                "pilot_snr_policy" => cfg.pilot_snr_policy = value.parse()?,
                "qam_order" => cfg.qam_order = parse_num(key, value)?,
                "channel" => cfg.channel = value.parse()?,
                "pilot_index" => cfg.pilot_index = Some(parse_num(key, value)?),
                "delay_window_start" => cfg.delay_window_start = parse_num(key, value)?,
                "property_channels" => cfg.property_channels = parse_num(key, value)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        if afdm_delta.is_some() || afdm_c2.is_some() {
            cfg.afdm = AfdmParams::new(afdm_delta.unwrap_or(8), afdm_c2.unwrap_or(0.0));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::Config("snr values must be finite or +inf".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if self.vmax.is_nan() || self.vmax < 0.0 {
            return Err(Error::Config("vmax must be non-negative".into()));
        }
        let frame = self.frame::<f64>()?;
        if self.schemes.contains(&SchemeId::Otsm) && !self.n.is_power_of_two() {
            return Err(Error::Config(format!("OTSM requires a power-of-two N, got {}", self.n)));
        }
        if let Some(p) = self.pilot_index {
            if p >= frame.mn() {
                return Err(Error::PilotIndex { index: p, dim: frame.mn() });
            }
        }
        self.window(&frame).validate(&frame)?;
        gaussian_sinc_pulse(&frame, self.alpha)?;
        Ok(())
    }

    pub fn frame<T: Scalar>(&self) -> Result<FrameConfig<T>> {
        FrameConfig::new(self.m, self.n, T::lit(self.delta_f))
    }

    /// Estimation window: the crystallization window shifted to start at `delay_window_start`.
    pub fn window<T: Scalar>(&self, frame: &FrameConfig<T>) -> DdWindow {
        DdWindow {
            delay_start: self.delay_window_start,
            ..DdWindow::crystallization(frame)
        }
    }

    pub fn pilot<T: Scalar>(&self, frame: &FrameConfig<T>) -> usize {
        self.pilot_index.unwrap_or_else(|| default_pilot_index(frame))
    }

    fn bases<T: Scalar>(&self, frame: &FrameConfig<T>) -> Result<Vec<Basis<T>>> {
        self.schemes
            .iter()
            .map(|&s| Basis::generate(s, frame, (s == SchemeId::Afdm).then_some(self.afdm)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ber,
    Nmse,
    Energy,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Ber => "BER",
            Metric::Nmse => "NMSE",
            Metric::Energy => "ENERGY",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub scheme: SchemeId,
    pub snr_db: Option<f64>,
    pub metric: Metric,
    pub carrier_index: Option<usize>,
    pub value: f64,
    pub trials: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "experiment,scheme,snr_db,metric,carrier_index,value,trials,seed";

pub fn write_rows_csv<W: Write>(rows: &[ResultRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let snr = r.snr_db.map(|s| s.to_string()).unwrap_or_default();
        let carrier = r.carrier_index.map(|c| c.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{:e},{},{}",
            r.experiment,
            r.scheme.name(),
            snr,
            r.metric,
            carrier,
            r.value,
            r.trials,
            r.seed
        )?;
    }
    Ok(())
}

/// Mean and standard error of one (scheme, SNR) cell over independent trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub scheme: SchemeId,
    pub snr_db: f64,
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl CellStats {
    fn from_samples(scheme: SchemeId, snr_db: f64, samples: &[f64]) -> Self {
        let t = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / t;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        Self {
            scheme,
            snr_db,
            mean,
            std_err: (var / t).sqrt(),
            trials: samples.len(),
        }
    }

    /// `|μ_a − μ_b| / sqrt(SE_a² + SE_b²)`; zero when both cells are exact and equal.
    pub fn z_score(&self, other: &Self) -> f64 {
        let diff = (self.mean - other.mean).abs();
        let se = (self.std_err.powi(2) + other.std_err.powi(2)).sqrt();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }

    fn row(&self, experiment: &str, metric: Metric, seed: u64) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            scheme: self.scheme,
            snr_db: Some(self.snr_db),
            metric,
            carrier_index: None,
            value: self.mean,
            trials: self.trials,
            seed,
        }
    }
}

/// Stream carrying trial `t`'s channel and data bits.
fn trial_stream(trial: usize) -> u64 {
    (trial as u64) << 16
}

/// Stream carrying trial `t`'s noise at SNR index `j`.
fn noise_stream(trial: usize, snr_index: usize) -> u64 {
    trial_stream(trial) | (snr_index as u64 + 1)
}

/// One channel draw: its time-domain operator and, when defined, its spreading function.
pub struct ChannelDraw<T> {
    pub g: CMatrix<T>,
    pub physical: Option<PhysicalChannel<T>>,
    pub spreading: Option<SpreadingFunction<T>>,
}

/// Draws the configured channel from `rng`.
pub fn draw_channel<T: Scalar>(cfg: &ExperimentConfig, frame: &FrameConfig<T>, rng: &mut SeededRng) -> Result<ChannelDraw<T>> {
    let pulse = gaussian_sinc_pulse(frame, cfg.alpha)?;
    Ok(match cfg.channel {
        ChannelKind::VehA => {
            let phys = sample_veh_a(frame, cfg.vmax, rng);
            let h = effective_spreading_function(&phys, &pulse, frame);
            ChannelDraw {
                g: h.time_operator(),
                physical: Some(phys),
                spreading: Some(h),
            }
        }
        ChannelKind::VehAWaveform => {
            let phys = sample_veh_a(frame, cfg.vmax, rng);
            ChannelDraw {
                g: physical_time_operator(&phys, &pulse, frame),
                physical: Some(phys),
                spreading: None,
            }
        }
        ChannelKind::Identity => {
            let h = SpreadingFunction::identity(frame);
            ChannelDraw {
                g: h.time_operator(),
                physical: None,
                spreading: Some(h),
            }
        }
        ChannelKind::OnGrid => {
            let h = random_on_grid_channel(frame, &DdWindow::crystallization(frame), None, rng);
            let h = h.scaled(C::new(h.energy().sqrt().recip(), T::zero()));
            ChannelDraw {
                g: h.time_operator(),
                physical: None,
                spreading: Some(h),
            }
        }
    })
}

/// Per-carrier energies of every configured scheme over one channel draw (trial 0).
pub fn run_energy_profile(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_energy_profile_with::<f64>(cfg)
}

pub fn run_energy_profile_with<T: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let frame = cfg.frame::<T>()?;
    let mut rng = SeededRng::new(cfg.master_seed, trial_stream(0));
    let draw = draw_channel(cfg, &frame, &mut rng)?;
    let mut rows = Vec::new();
    for basis in cfg.bases(&frame)? {
        let h = effective_from_time_operator(&basis, &draw.g)?;
        for (i, e) in crate::properties::per_carrier_energy(&h).into_iter().enumerate() {
            rows.push(ResultRow {
                experiment: "energy".into(),
                scheme: basis.scheme(),
                snr_db: None,
                metric: Metric::Energy,
                carrier_index: Some(i),
                value: e,
                trials: 1,
                seed: cfg.master_seed,
            });
        }
    }
    Ok(rows)
}

/// Coefficient of variation (population standard deviation over mean) of one scheme's energy rows.
pub fn energy_cv(rows: &[ResultRow], scheme: SchemeId) -> f64 {
    let v: Vec<f64> = rows
        .iter()
        .filter(|r| r.scheme == scheme && r.metric == Metric::Energy)
        .map(|r| r.value)
        .collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
    var.sqrt() / mean
}

/// Per-trial outcome, indexed `[snr][scheme]`.
struct TrialOutcome {
    ber: Vec<Vec<f64>>,
    nmse: Vec<Vec<f64>>,
}

fn bit_errors(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn add_waveforms<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

struct Harness<T: Scalar> {
    cfg: ExperimentConfig,
    frame: FrameConfig<T>,
    bases: Vec<Basis<T>>,
    window: DdWindow,
    pilot: usize,
}

impl<T: Scalar> Harness<T> {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let frame = cfg.frame::<T>()?;
        Ok(Self {
            bases: cfg.bases(&frame)?,
            window: cfg.window(&frame),
            pilot: cfg.pilot(&frame),
            frame,
            cfg: cfg.clone(),
        })
    }

    fn trial(&self, t: usize, mode: CsiMode) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let mn = self.frame.mn();
        let mut rng = SeededRng::new(cfg.master_seed, trial_stream(t));
        let draw = draw_channel(cfg, &self.frame, &mut rng)?;
        let bits_per_frame = mn * crate::frame::Qam::new(cfg.qam_order)?.bits_per_symbol();
        let bits = rng.bits(bits_per_frame);
        let symbols = qam_map(&self.frame, &bits, cfg.qam_order)?;
        let clean: Vec<Vec<C<T>>> = self
            .bases
            .iter()
            .map(|b| draw.g.matvec(&modulate(b, &symbols)?))
            .collect::<Result<_>>()?;
        let g_energy = draw.g.frobenius_sq().as_f64();
        let pilot_amp = T::lit((mn as f64).sqrt());

        let mut out = TrialOutcome {
            ber: Vec::with_capacity(cfg.snr_grid_db.len()),
            nmse: Vec::with_capacity(cfg.snr_grid_db.len()),
        };
        for (j, &snr) in cfg.snr_grid_db.iter().enumerate() {
            let mut nrng = SeededRng::new(cfg.master_seed, noise_stream(t, j));
            let zero = TimeWaveform(vec![C::new(T::zero(), T::zero()); mn]);
            let (data_noise, var) = add_noise(&zero, snr, &mut nrng);
            let (pilot_noise, _) = add_noise(&zero, snr, &mut nrng);
            let shared = match mode {
                CsiMode::Perfect => Some(MmseFilter::new(&draw.g, var)?),
                CsiMode::Estimated => None,
            };
            let mut ber = Vec::with_capacity(self.bases.len());
            let mut nmse = Vec::with_capacity(self.bases.len());
            for (basis, y0) in self.bases.iter().zip(&clean) {
                let y = add_waveforms(y0, &data_noise);
                let estimated;
                let filter = match &shared {
                    Some(f) => f,
                    None => {
                        let pilot_tx: Vec<C<T>> = basis.carrier(self.pilot).iter().map(|v| *v * pilot_amp).collect();
                        let rx = add_waveforms(&draw.g.matvec(&pilot_tx)?, &pilot_noise);
                        let rx = TimeWaveform(rx.into_iter().map(|v| v / pilot_amp).collect());
                        let h_hat = estimate_pilot_channel(basis, self.pilot, &rx, &self.window)?;
                        let g_hat = h_hat.time_operator();
                        nmse.push(g_hat.distance_sq(&draw.g)?.as_f64() / g_energy);
                        estimated = MmseFilter::from_owned(g_hat, var)?;
                        &estimated
                    }
                };
                let x_hat = filter.apply(&y)?;
                let s_hat = project(basis, &TimeWaveform(x_hat))?;
                let decided = qam_demap(&s_hat, cfg.qam_order)?;
                ber.push(bit_errors(&bits, &decided) as f64 / bits.len() as f64);
            }
            out.ber.push(ber);
            out.nmse.push(nmse);
        }
        Ok(out)
    }

    fn run(&self, mode: CsiMode) -> Result<Vec<TrialOutcome>> {
        (0..self.cfg.trials)
            .into_par_iter()
            .map(|t| self.trial(t, mode))
            .collect()
    }

    fn summarize(&self, outcomes: &[TrialOutcome], pick: impl Fn(&TrialOutcome) -> &Vec<Vec<f64>>) -> Vec<CellStats> {
        let mut stats = Vec::new();
        for (bi, basis) in self.bases.iter().enumerate() {
            for (j, &snr) in self.cfg.snr_grid_db.iter().enumerate() {
                let samples: Vec<f64> = outcomes.iter().map(|o| pick(o)[j][bi]).collect();
                stats.push(CellStats::from_samples(basis.scheme(), snr, &samples));
            }
        }
        stats
    }
}

/// BER and, in estimated mode, NMSE statistics per (scheme, SNR), scheme-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    pub ber: Vec<CellStats>,
    pub nmse: Vec<CellStats>,
}

impl LinkStats {
    pub fn ber_cell(&self, scheme: SchemeId, snr_db: f64) -> Option<&CellStats> {
        self.ber.iter().find(|c| c.scheme == scheme && c.snr_db == snr_db)
    }

    pub fn nmse_cell(&self, scheme: SchemeId, snr_db: f64) -> Option<&CellStats> {
        self.nmse.iter().find(|c| c.scheme == scheme && c.snr_db == snr_db)
    }
}

/// Monte-Carlo link simulation in the requested CSI mode.
///
/// Every scheme sees the same channel, bits and noise in a given trial, and the channel and
/// bits are shared across SNR points.
pub fn run_link<T: Scalar>(cfg: &ExperimentConfig, mode: CsiMode) -> Result<LinkStats> {
    let harness = Harness::<T>::new(cfg)?;
    let outcomes = harness.run(mode)?;
    Ok(LinkStats {
        ber: harness.summarize(&outcomes, |o| &o.ber),
        nmse: match mode {
            CsiMode::Perfect => Vec::new(),
            CsiMode::Estimated => harness.summarize(&outcomes, |o| &o.nmse),
        },
    })
}

/// BER rows under `cfg.csi_mode`.
pub fn run_ber(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let stats = run_link::<f64>(cfg, cfg.csi_mode)?;
    let name = match cfg.csi_mode {
        CsiMode::Perfect => "ber_perfect",
        CsiMode::Estimated => "ber_estimated",
    };
    Ok(stats.ber.iter().map(|c| c.row(name, Metric::Ber, cfg.master_seed)).collect())
}

/// NMSE rows `‖Ĥ − H‖_F² / ‖H‖_F²` from single-pilot estimation.
pub fn run_nmse(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let stats = run_link::<f64>(cfg, CsiMode::Estimated)?;
    Ok(stats.nmse.iter().map(|c| c.row("nmse", Metric::Nmse, cfg.master_seed)).collect())
}

/// Rows of both estimated-CSI experiments from one pass: `(ber, nmse)`.
pub fn run_estimated(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<ResultRow>)> {
    let stats = run_link::<f64>(cfg, CsiMode::Estimated)?;
    Ok((
        stats.ber.iter().map(|c| c.row("ber_estimated", Metric::Ber, cfg.master_seed)).collect(),
        stats.nmse.iter().map(|c| c.row("nmse", Metric::Nmse, cfg.master_seed)).collect(),
    ))
}

/// Whether `scheme` is predicted non-selective, predictable and equivalent to Zak-OTFS.
pub fn predicted_delay_doppler(scheme: SchemeId, cfg: &ExperimentConfig) -> bool {
    match scheme {
        SchemeId::Ofdm => false,
        SchemeId::Afdm => afdm_strongly_crystallized(&cfg.afdm, cfg.m, cfg.n),
        _ => true,
    }
}

/// Runs the carrier-independence, predictability and non-selectivity checks for every configured scheme,
/// followed by the equivalence report.
///
/// Non-selectivity is evaluated on `property_channels` random on-grid channels and reported
/// by its worst draw.
pub fn run_property_suite(cfg: &ExperimentConfig) -> Result<Vec<PropertyVerdict>> {
    cfg.validate()?;
    let frame = cfg.frame::<f64>()?;
    let window = DdWindow::crystallization(&frame);
    let channels: Vec<CMatrix<f64>> = (0..cfg.property_channels.max(1))
        .map(|t| {
            let mut rng = SeededRng::new(cfg.master_seed, trial_stream(t));
            random_on_grid_channel(&frame, &window, None, &mut rng).time_operator()
        })
        .collect();
    let mut out = Vec::new();
    for basis in cfg.bases(&frame)? {
        let expected = predicted_delay_doppler(basis.scheme(), cfg);
        let mut worst: Option<PropertyVerdict> = None;
        for g in &channels {
            let v = check_non_selective(&effective_from_time_operator(&basis, g)?, ON_GRID_TOL);
            if worst.as_ref().is_none_or(|w| v.deviation > w.deviation) {
                worst = Some(v);
            }
        }
        out.push(worst.expect("at least one channel").with_expected(expected));
        out.push(check_predictable(&basis, &window, ON_GRID_TOL)?.with_expected(expected));
        out.push(check_lemma1_condition(&basis, ON_GRID_TOL).with_expected(expected));
    }
    out.extend(equivalence_report(&frame, &cfg.afdm)?);
    Ok(out)
}

/// One row of the reproduced comparison table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub scheme: SchemeId,
    pub non_selective: bool,
    pub predictable: bool,
    pub equivalent: bool,
}

/// Collapses suite verdicts into per-scheme table rows. A scheme is marked equivalent when
/// every applicable equivalence verdict for it passes.
pub fn table_one(verdicts: &[PropertyVerdict]) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for scheme in SchemeId::ALL {
        let mine: Vec<&PropertyVerdict> = verdicts.iter().filter(|v| v.scheme == Some(scheme)).collect();
        if mine.is_empty() {
            continue;
        }
        let all = |prefix: &str| {
            let hits: Vec<_> = mine
                .iter()
                .filter(|v| v.name.starts_with(prefix) && v.outcome != crate::properties::Outcome::NotApplicable)
                .collect();
            !hits.is_empty() && hits.iter().all(|v| v.pass())
        };
        rows.push(TableRow {
            scheme,
            non_selective: all("non-selective"),
            predictable: all("predictable"),
            equivalent: all("equivalence"),
        });
    }
    rows
}

pub fn write_table_csv<W: Write>(rows: &[TableRow], mut w: W) -> Result<()> {
    let mark = |b: bool| if b { "yes" } else { "no" };
    writeln!(w, "scheme,non_selective,predictable,equivalent")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.scheme.name(),
            mark(r.non_selective),
            mark(r.predictable),
            mark(r.equivalent)
        )?;
    }
    Ok(())
}

/// Empirical AFDM non-selectivity per `Δ` on one random on-grid channel per value:
/// `(Δ, measured pass, predicted by gcd(2Δ, MN) = N)`.
pub fn afdm_delta_sweep(cfg: &ExperimentConfig, deltas: impl IntoIterator<Item = i64>) -> Result<Vec<(i64, bool, bool)>> {
    let frame = cfg.frame::<f64>()?;
    let window = DdWindow::crystallization(&frame);
    deltas
        .into_iter()
        .map(|delta| {
            let mut rng = SeededRng::new(cfg.master_seed, delta as u64);
            let g = random_on_grid_channel(&frame, &window, None, &mut rng).time_operator();
            let basis = Basis::generate(SchemeId::Afdm, &frame, Some(AfdmParams::new(delta, cfg.afdm.c2())))?;
            let verdict = check_non_selective(&effective_from_time_operator(&basis, &g)?, ON_GRID_TOL);
            Ok((delta, verdict.pass(), strong_crystallization_afdm(delta, cfg.m, cfg.n)))
        })
        .collect()
}
