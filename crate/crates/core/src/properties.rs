//! Executable verdicts for non-selectivity, predictability, the crystallization
//! conditions and unitary equivalence between the delay-Doppler modulations.

use std::fmt;
use std::io::Write;

use num_integer::Integer;
use rustfft::FftPlanner;

use crate::bases::{change_of_basis, AfdmParams, Basis, SchemeId};
use crate::channel::{DdWindow, SpreadingFunction};
use crate::error::Result;
use crate::frame::FrameConfig;
use crate::scalar::{modulo, Scalar, C};
use crate::transceiver::{cross_ambiguity_window, EffectiveChannel};

/// Default tolerance for on-grid channels.
pub const ON_GRID_TOL: f64 = 1e-9;
/// Default tolerance for pulse-shaped fractional channels.
pub const FRACTIONAL_TOL: f64 = 1e-3;
/// Magnitude above which a tap counts as part of the channel support.
pub const SUPPORT_EPS: f64 = 1e-12;
/// Out-of-window energy fraction tolerated by the thresholded support test.
pub const SUPPORT_ENERGY_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotApplicable => "n/a",
        })
    }
}

/// One executable claim. `outcome` is `Pass` exactly when `deviation ≤ tolerance`;
/// `witness` locates the worst deviation, `expected` holds the predicted outcome if any.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyVerdict {
    pub name: String,
    pub scheme: Option<SchemeId>,
    pub outcome: Outcome,
    pub deviation: f64,
    pub tolerance: f64,
    pub witness: (i64, i64),
    pub detail: String,
    pub expected: Option<bool>,
}

impl PropertyVerdict {
    fn measured(name: impl Into<String>, scheme: Option<SchemeId>, deviation: f64, tolerance: f64, witness: (i64, i64), detail: String) -> Self {
        Self {
            name: name.into(),
            scheme,
            outcome: if deviation <= tolerance { Outcome::Pass } else { Outcome::Fail },
            deviation,
            tolerance,
            witness,
            detail,
            expected: None,
        }
    }

    fn not_applicable(name: impl Into<String>, scheme: Option<SchemeId>, reason: String) -> Self {
        Self {
            name: name.into(),
            scheme,
            outcome: Outcome::NotApplicable,
            deviation: f64::NAN,
            tolerance: f64::NAN,
            witness: (0, 0),
            detail: reason,
            expected: None,
        }
    }

    pub fn with_expected(mut self, expected: bool) -> Self {
        self.expected = Some(expected);
        self
    }

    pub fn pass(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    /// Whether the outcome matches the prediction; `None` without a prediction or when
    /// the check did not apply.
    pub fn agrees(&self) -> Option<bool> {
        match (self.outcome, self.expected) {
            (Outcome::NotApplicable, _) | (_, None) => None,
            (o, Some(e)) => Some((o == Outcome::Pass) == e),
        }
    }
}

impl fmt::Display for PropertyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scheme = self.scheme.map(|s| s.name()).unwrap_or("-");
        write!(f, "{:<44} {:<9} {:<4}", self.name, scheme, self.outcome)?;
        if self.outcome != Outcome::NotApplicable {
            write!(
                f,
                " dev={:.3e} tol={:.1e} at ({}, {})",
                self.deviation, self.tolerance, self.witness.0, self.witness.1
            )?;
        }
        if let Some(e) = self.expected {
            write!(f, " expected={}", if e { "pass" } else { "fail" })?;
        }
        if !self.detail.is_empty() {
            write!(f, " [{}]", self.detail)?;
        }
        Ok(())
    }
}

/// Plain-text report, one verdict per line.
pub fn write_report<W: Write>(verdicts: &[PropertyVerdict], mut w: W) -> Result<()> {
    for v in verdicts {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// CSV with header `name,scheme,pass,deviation,tolerance,witness_a,witness_b,expected`.
pub fn write_verdicts_csv<W: Write>(verdicts: &[PropertyVerdict], mut w: W) -> Result<()> {
    writeln!(w, "name,scheme,pass,deviation,tolerance,witness_a,witness_b,expected")?;
    for v in verdicts {
        let pass = match v.outcome {
            Outcome::Pass => "true",
            Outcome::Fail => "false",
            Outcome::NotApplicable => "na",
        };
        let expected = match v.expected {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        writeln!(
            w,
            "{},{},{},{:e},{:e},{},{},{}",
            v.name,
            v.scheme.map(|s| s.name()).unwrap_or(""),
            pass,
            v.deviation,
            v.tolerance,
            v.witness.0,
            v.witness.1,
            expected
        )?;
    }
    Ok(())
}

/// `E_i = (H^H H)[i, i]`, the squared norm of column `i`.
pub fn per_carrier_energy<T: Scalar>(h: &EffectiveChannel<T>) -> Vec<f64> {
    let m = h.matrix();
    let mut e = vec![0.0; m.cols()];
    for r in 0..m.rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            e[c] += v.norm_sqr().as_f64();
        }
    }
    e
}

/// Passes iff `max_{i,j} |E_i − E_j| / mean(E) ≤ tol`; the witness is `(argmax, argmin)`.
pub fn check_non_selective<T: Scalar>(h: &EffectiveChannel<T>, tol: f64) -> PropertyVerdict {
    let e = per_carrier_energy(h);
    let (mut imax, mut imin) = (0, 0);
    for (i, v) in e.iter().enumerate() {
        if *v > e[imax] {
            imax = i;
        }
        if *v < e[imin] {
            imin = i;
        }
    }
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let deviation = if mean > 0.0 { (e[imax] - e[imin]) / mean } else { 0.0 };
    PropertyVerdict::measured(
        "non-selective",
        Some(h.scheme()),
        deviation,
        tol,
        (imax as i64, imin as i64),
        format!("E_max={:.6e} E_min={:.6e}", e[imax], e[imin]),
    )
}

/// Evaluates `S_i(k1, k2, Δl) = Σ_n φ_i[(n−k2)] φ_i*[(n−k1)] e^{j2πΔl n/MN}` for every carrier,
/// `k1, k2 ∈ Z_M`, `|Δl| < N`, and passes iff each is carrier-independent to within `tol`.
/// The witness is `(carrier, k1 − k2)`.
pub fn check_lemma1_condition<T: Scalar>(basis: &Basis<T>, tol: f64) -> PropertyVerdict {
    let cfg = basis.cfg();
    let (m, n, mn) = (cfg.m(), cfg.n(), cfg.mn());
    let ifft = FftPlanner::<T>::new().plan_fft_inverse(mn);
    let dls: Vec<usize> = (-(n as i64) + 1..n as i64).map(|d| modulo(d, mn)).collect();
    let carriers: Vec<Vec<C<T>>> = (0..mn).map(|i| basis.carrier(i)).collect();
    let mut reference = vec![C::new(T::zero(), T::zero()); m * m * dls.len()];
    let mut worst = (0.0f64, (0i64, 0i64), String::new());
    let mut buf = vec![C::new(T::zero(), T::zero()); mn];
    for (i, phi) in carriers.iter().enumerate() {
        for k1 in 0..m {
            for k2 in 0..m {
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = phi[(t + mn - k2) % mn] * phi[(t + mn - k1) % mn].conj();
                }
                ifft.process(&mut buf);
                let base = (k1 * m + k2) * dls.len();
                for (slot, &dl) in dls.iter().enumerate() {
                    let v = buf[dl];
                    if i == 0 {
                        reference[base + slot] = v;
                    } else {
                        let d = (v - reference[base + slot]).norm().as_f64();
                        if d > worst.0 {
                            let signed = slot as i64 - (n as i64 - 1);
                            worst = (d, (i as i64, k1 as i64 - k2 as i64), format!("k1={k1} k2={k2} dl={signed}"));
                        }
                    }
                }
            }
        }
    }
    PropertyVerdict::measured("lemma1-condition", Some(basis.scheme()), worst.0, tol, worst.1, worst.2)
}

/// Passes iff every carrier's self-ambiguity equals carrier 0's to within `tol` at every lag
/// between two points of `window`, so that a pilot estimate of any channel supported on
/// `window` is the same whichever carrier carries the pilot.
/// The witness is the signed `(k, l)` lag of the largest deviation.
pub fn check_predictable<T: Scalar>(basis: &Basis<T>, window: &DdWindow, tol: f64) -> Result<PropertyVerdict> {
    window.validate(basis.cfg())?;
    let lags = window.differences();
    let self_amb = |i: usize| {
        let phi = basis.carrier(i);
        cross_ambiguity_window(&phi, &phi, &lags)
    };
    let reference = self_amb(0)?;
    let mut worst = (0.0f64, (0i64, 0i64), String::new());
    for i in 1..basis.dim() {
        for (((k, l), v), (_, r)) in self_amb(i)?.into_iter().zip(&reference) {
            let d = (v - *r).norm().as_f64();
            if d > worst.0 {
                worst = (d, (k, l), format!("carrier {i}"));
            }
        }
    }
    Ok(PropertyVerdict::measured("predictable", Some(basis.scheme()), worst.0, tol, worst.1, worst.2))
}

/// `gcd(2Δ, MN) = N`.
pub fn strong_crystallization_afdm(delta: i64, m: usize, n: usize) -> bool {
    (2 * delta).gcd(&((m * n) as i64)) == n as i64
}

/// Whether the AFDM parameters admit the strong crystallization condition; half-integer
/// `Δ` never does.
pub fn afdm_strongly_crystallized(params: &AfdmParams, m: usize, n: usize) -> bool {
    params.delta().is_some_and(|d| strong_crystallization_afdm(d, m, n))
}

/// True iff every tap above `1e-12` lies in `k ∈ {0..M−1}`, `l ∈ {−⌊N/2⌋..⌈N/2⌉−1}` mod `MN`.
pub fn weak_crystallization_support<T: Scalar>(h: &SpreadingFunction<T>) -> bool {
    let window = DdWindow::crystallization(h.cfg());
    let mn = h.cfg().mn();
    h.support(T::lit(SUPPORT_EPS))
        .into_iter()
        .all(|(k, l)| window.contains(k, l, mn))
}

/// Thresholded support test for fractional channels: out-of-window energy below
/// `fraction` of the total. Returns the verdict with the measured fraction as deviation.
pub fn weak_crystallization_energy<T: Scalar>(h: &SpreadingFunction<T>, window: &DdWindow, fraction: f64) -> PropertyVerdict {
    let total = h.energy().as_f64();
    let outside = h.energy_outside(window).as_f64();
    let ratio = if total > 0.0 { outside / total } else { 0.0 };
    PropertyVerdict::measured("weak-crystallization-energy", None, ratio, fraction, (0, 0), window.to_string())
}

/// Max over carriers and window points of `||A_{φ_i,φ_i}[k, l]| − δ[k]δ[l]|`.
fn lattice_sparsity<T: Scalar>(basis: &Basis<T>, window: &DdWindow, tol: f64) -> Result<PropertyVerdict> {
    let mut worst = (0.0f64, (0i64, 0i64), String::new());
    for i in 0..basis.dim() {
        let phi = basis.carrier(i);
        for ((k, l), v) in cross_ambiguity_window(&phi, &phi, window)? {
            let target = if k == 0 && l == 0 { 1.0 } else { 0.0 };
            let d = (v.norm().as_f64() - target).abs();
            if d > worst.0 {
                worst = (d, (k, l), format!("carrier {i}"));
            }
        }
    }
    Ok(PropertyVerdict::measured(
        "equivalence(c): |self-ambiguity| = delta",
        Some(basis.scheme()),
        worst.0,
        tol,
        worst.1,
        worst.2,
    ))
}

/// Unitary-equivalence checks:
/// (a) ODDM and Zak-OTFS columns coincide;
/// (b) the OTSM to Zak-OTFS change of basis is unitary and confined to delay-residue blocks;
/// (c) AFDM, ODDM, OTSM and Zak-OTFS carriers have `|A_{φ_i,φ_i}| = δ[k]δ[l]` on the
///     crystallization window;
/// (d) OFDM fails (c).
pub fn equivalence_report<T: Scalar>(cfg: &FrameConfig<T>, afdm: &AfdmParams) -> Result<Vec<PropertyVerdict>> {
    let (m, n) = (cfg.m(), cfg.n());
    let window = DdWindow::crystallization(cfg);
    let mut out = Vec::new();

    let zak = Basis::generate(SchemeId::ZakOtfs, cfg, None)?;
    let oddm = Basis::generate(SchemeId::Oddm, cfg, None)?;
    let diff = oddm.matrix().sub(zak.matrix())?.max_abs();
    out.push(
        PropertyVerdict::measured(
            "equivalence(a): ODDM == Zak-OTFS",
            Some(SchemeId::Oddm),
            diff.0.as_f64(),
            1e-12,
            (diff.1 .0 as i64, diff.1 .1 as i64),
            "max |phi_oddm - phi_zak| at (n, i)".into(),
        )
        .with_expected(true),
    );

    let otsm = if n.is_power_of_two() {
        Some(Basis::generate(SchemeId::Otsm, cfg, None)?)
    } else {
        None
    };
    match &otsm {
        Some(otsm) => {
            let u = change_of_basis(otsm, &zak)?;
            let (unit_dev, unit_at) = u.inner_gram().identity_deviation();
            let mut off = (T::zero(), (0usize, 0usize));
            for i in 0..u.rows() {
                for j in 0..u.cols() {
                    let a = u[(i, j)].norm();
                    if i % m != j % m && a > off.0 {
                        off = (a, (i, j));
                    }
                }
            }
            let (dev, at, what) = if off.0 > unit_dev {
                (off.0, off.1, "off-residue entry")
            } else {
                (unit_dev, unit_at, "U^H U - I")
            };
            out.push(
                PropertyVerdict::measured(
                    "equivalence(b): OTSM->Zak block unitary",
                    Some(SchemeId::Otsm),
                    dev.as_f64(),
                    1e-10,
                    (at.0 as i64, at.1 as i64),
                    what.into(),
                )
                .with_expected(true),
            );
        }
        None => out.push(PropertyVerdict::not_applicable(
            "equivalence(b): OTSM->Zak block unitary",
            Some(SchemeId::Otsm),
            format!("N = {n} is not a power of two"),
        )),
    }

    const LATTICE_TOL: f64 = 1e-10;
    let afdm_name = "equivalence(c): |self-ambiguity| = delta";
    if afdm_strongly_crystallized(afdm, m, n) {
        let basis = Basis::generate(SchemeId::Afdm, cfg, Some(*afdm))?;
        out.push(lattice_sparsity(&basis, &window, LATTICE_TOL)?.with_expected(true));
    } else {
        out.push(PropertyVerdict::not_applicable(
            afdm_name,
            Some(SchemeId::Afdm),
            format!("gcd(2*delta, MN) != N for 2*delta = {}", afdm.two_delta()),
        ));
    }
    out.push(lattice_sparsity(&oddm, &window, LATTICE_TOL)?.with_expected(true));
    match &otsm {
        Some(otsm) => out.push(lattice_sparsity(otsm, &window, LATTICE_TOL)?.with_expected(true)),
        None => out.push(PropertyVerdict::not_applicable(
            afdm_name,
            Some(SchemeId::Otsm),
            format!("N = {n} is not a power of two"),
        )),
    }
    out.push(lattice_sparsity(&zak, &window, LATTICE_TOL)?.with_expected(true));

    let ofdm = Basis::generate(SchemeId::Ofdm, cfg, None)?;
    let mut d = lattice_sparsity(&ofdm, &window, LATTICE_TOL)?.with_expected(false);
    d.name = "equivalence(d): OFDM self-ambiguity".into();
    out.push(d);
    Ok(out)
}
