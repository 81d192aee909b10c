//! Modulation, projection, effective channels, ambiguity surfaces, pilot-based
//! estimation and joint linear MMSE detection.

use std::sync::Arc;

use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::bases::{Basis, SchemeId};
use crate::channel::{DdWindow, SpreadingFunction, TimeWaveform};
use crate::error::{Error, Result};
use crate::frame::{FrameConfig, SymbolVector};
use crate::linalg::{CMatrix, Cholesky};
use crate::scalar::{czero, modulo, signed_rep, Scalar, Twiddles, C};

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `x[n] = Σ_i s[i] φ_i[n]`.
pub fn modulate<T: Scalar>(basis: &Basis<T>, s: &SymbolVector<T>) -> Result<TimeWaveform<T>> {
    let dim = basis.dim();
    check_len(dim, s.len())?;
    let mut x = vec![czero(); dim];
    for (i, &si) in s.iter().enumerate() {
        if si.is_zero() {
            continue;
        }
        for (n, phi) in basis.carrier_entries(i) {
            x[n] += si * phi;
        }
    }
    Ok(TimeWaveform(x))
}

/// `r[f] = Σ_n φ_f*[n] y[n]`.
pub fn project<T: Scalar>(basis: &Basis<T>, y: &TimeWaveform<T>) -> Result<SymbolVector<T>> {
    let dim = basis.dim();
    check_len(dim, y.len())?;
    let r = (0..dim)
        .map(|f| basis.carrier_entries(f).map(|(n, phi)| phi.conj() * y[n]).sum())
        .collect();
    Ok(SymbolVector(r))
}

/// Input-output matrix `H` coupling transmitted symbols to received projections.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel<T> {
    h: CMatrix<T>,
    scheme: SchemeId,
    cfg: FrameConfig<T>,
}

impl<T: Scalar> EffectiveChannel<T> {
    pub fn new(h: CMatrix<T>, scheme: SchemeId, cfg: &FrameConfig<T>) -> Result<Self> {
        check_len(cfg.mn(), h.rows())?;
        check_len(cfg.mn(), h.cols())?;
        Ok(Self { h, scheme, cfg: *cfg })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.h
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn cfg(&self) -> &FrameConfig<T> {
        &self.cfg
    }

    pub fn apply(&self, s: &SymbolVector<T>) -> Result<SymbolVector<T>> {
        Ok(SymbolVector(self.h.matvec(s)?))
    }
}

/// `H[f, i] = ⟨φ_f, channel(φ_i)⟩`, one channel application per carrier.
pub fn build_effective_h<T, F>(basis: &Basis<T>, channel: F) -> Result<EffectiveChannel<T>>
where
    T: Scalar,
    F: Fn(&TimeWaveform<T>) -> Result<TimeWaveform<T>>,
{
    let dim = basis.dim();
    let mut columns = Vec::with_capacity(dim);
    for i in 0..dim {
        let response = channel(&TimeWaveform(basis.carrier(i)))?;
        check_len(dim, response.len())?;
        columns.push(project(basis, &response)?.0);
    }
    EffectiveChannel::new(CMatrix::from_columns(&columns)?, basis.scheme(), basis.cfg())
}

/// `H = Φ^H G Φ` for a channel given by its time-domain operator `y = G x`.
pub fn effective_from_time_operator<T: Scalar>(basis: &Basis<T>, g: &CMatrix<T>) -> Result<EffectiveChannel<T>> {
    let phi = basis.matrix();
    let h = phi.adjoint().matmul(&g.matmul(phi)?)?;
    EffectiveChannel::new(h, basis.scheme(), basis.cfg())
}

/// Complex grid on the `MN × MN` delay-Doppler torus, indexed `[k, l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface<T> {
    mn: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> AmbiguitySurface<T> {
    pub fn zeros(mn: usize) -> Self {
        Self {
            mn,
            data: vec![czero(); mn * mn],
        }
    }

    /// Dense copy of a spreading function.
    pub fn from_spreading(h: &SpreadingFunction<T>) -> Self {
        let mut a = Self::zeros(h.cfg().mn());
        for ((k, l), v) in h.taps() {
            a.data[k * a.mn + l] = v;
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.mn
    }

    /// Value at `(k, l)`, both reduced modulo `MN`.
    pub fn get(&self, k: i64, l: i64) -> C<T> {
        self.data[modulo(k, self.mn) * self.mn + modulo(l, self.mn)]
    }

    pub fn set(&mut self, k: i64, l: i64, v: C<T>) {
        let idx = modulo(k, self.mn) * self.mn + modulo(l, self.mn);
        self.data[idx] = v;
    }

    /// Windowed read access: `((k, l), A[k, l])` with signed indices as laid out by `window`.
    pub fn window_view<'a>(&'a self, window: &'a DdWindow) -> impl Iterator<Item = ((i64, i64), C<T>)> + 'a {
        (0..window.delay_len as i64).flat_map(move |dk| {
            (0..window.doppler_len as i64).map(move |dl| {
                let (k, l) = (window.delay_start + dk, window.doppler_start + dl);
                ((k, l), self.get(k, l))
            })
        })
    }

    /// Nonzero entries `((k, l), value)` with indices in `Z_MN`.
    pub fn nonzeros(&self) -> impl Iterator<Item = ((usize, usize), C<T>)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(move |(idx, v)| ((idx / self.mn, idx % self.mn), *v))
    }

    /// Largest `|A − B|` and its position in signed coordinates.
    pub fn max_abs_diff(&self, other: &Self) -> Result<(T, (i64, i64))> {
        check_len(self.mn, other.mn)?;
        let mut best = (T::zero(), (0, 0));
        for (idx, (a, b)) in self.data.iter().zip(&other.data).enumerate() {
            let d = (*a - *b).norm();
            if d > best.0 {
                best = (
                    d,
                    (signed_rep((idx / self.mn) as i64, self.mn), signed_rep((idx % self.mn) as i64, self.mn)),
                );
            }
        }
        Ok(best)
    }

    /// Spreading function holding the values inside `window` and zero elsewhere.
    pub fn to_spreading(&self, cfg: &FrameConfig<T>, window: &DdWindow) -> Result<SpreadingFunction<T>> {
        check_len(cfg.mn(), self.mn)?;
        Ok(SpreadingFunction::from_taps(
            cfg,
            self.window_view(window).map(|((k, l), v)| (k, l, v)),
        ))
    }
}

struct AmbiguityEngine<T: Scalar> {
    mn: usize,
    fft: Arc<dyn Fft<T>>,
    tw: Twiddles<T>,
}

impl<T: Scalar> AmbiguityEngine<T> {
    fn new(mn: usize) -> Self {
        Self {
            mn,
            fft: FftPlanner::new().plan_fft_forward(mn),
            tw: Twiddles::new(mn),
        }
    }

    /// Row `k` of `A_{y,x}`: `A[k, l] = e^{j2πlk/MN} · DFT_n(y[n] x*[n−k])[l]`.
    fn row(&self, y: &[C<T>], x: &[C<T>], k: usize, buf: &mut Vec<C<T>>) {
        let mn = self.mn;
        buf.clear();
        buf.extend((0..mn).map(|n| y[n] * x[(n + mn - k) % mn].conj()));
        self.fft.process(buf);
        for (l, v) in buf.iter_mut().enumerate() {
            *v *= self.tw.at((l * k) as i64);
        }
    }
}

/// `A_{y,x}[k, l] = Σ_n y[n] x*[(n−k)_MN] e^{−j2π l (n−k)/MN}` on the full torus.
pub fn cross_ambiguity<T: Scalar>(y: &[C<T>], x: &[C<T>]) -> Result<AmbiguitySurface<T>> {
    let mn = x.len();
    check_len(mn, y.len())?;
    let engine = AmbiguityEngine::new(mn);
    let mut out = AmbiguitySurface::zeros(mn);
    let mut buf = Vec::with_capacity(mn);
    for k in 0..mn {
        engine.row(y, x, k, &mut buf);
        out.data[k * mn..(k + 1) * mn].copy_from_slice(&buf);
    }
    Ok(out)
}

/// Signed `(delay, Doppler)` lag.
pub type Lag = (i64, i64);

/// `A_{y,x}` restricted to the delays and Dopplers of `window`.
pub fn cross_ambiguity_window<T: Scalar>(y: &[C<T>], x: &[C<T>], window: &DdWindow) -> Result<Vec<(Lag, C<T>)>> {
    let mn = x.len();
    check_len(mn, y.len())?;
    let engine = AmbiguityEngine::new(mn);
    let mut buf = Vec::with_capacity(mn);
    let mut out = Vec::with_capacity(window.delay_len * window.doppler_len);
    for dk in 0..window.delay_len as i64 {
        let k = window.delay_start + dk;
        engine.row(y, x, modulo(k, mn), &mut buf);
        for dl in 0..window.doppler_len as i64 {
            let l = window.doppler_start + dl;
            out.push(((k, l), buf[modulo(l, mn)]));
        }
    }
    Ok(out)
}

/// `c[k, l] = Σ_{k', l'} a[k−k', l−l'] b[k', l'] e^{j2π k'(l−l')/MN}` over the nonzero entries.
pub fn twisted_convolve<T: Scalar>(a: &AmbiguitySurface<T>, b: &AmbiguitySurface<T>) -> Result<AmbiguitySurface<T>> {
    let mn = a.mn;
    check_len(mn, b.mn)?;
    let tw = Twiddles::<T>::new(mn);
    let bz: Vec<_> = b.nonzeros().collect();
    let mut c = AmbiguitySurface::zeros(mn);
    for ((ka, la), va) in a.nonzeros() {
        for &((kb, lb), vb) in &bz {
            let idx = ((ka + kb) % mn) * mn + (la + lb) % mn;
            c.data[idx] += va * vb * tw.at((kb * la) as i64);
        }
    }
    Ok(c)
}

/// Channel estimate from one received pilot frame carrying carrier `pilot_index` with unit
/// amplitude: `ĥ[k, l] = A_{y, φ_p}[k, l]` on `window`, zero elsewhere.
pub fn estimate_pilot_channel<T: Scalar>(
    basis: &Basis<T>,
    pilot_index: usize,
    y_pilot: &TimeWaveform<T>,
    window: &DdWindow,
) -> Result<SpreadingFunction<T>> {
    let cfg = basis.cfg();
    if pilot_index >= basis.dim() {
        return Err(Error::PilotIndex {
            index: pilot_index,
            dim: basis.dim(),
        });
    }
    window.validate(cfg)?;
    let taps = cross_ambiguity_window(y_pilot, &basis.carrier(pilot_index), window)?;
    Ok(SpreadingFunction::from_taps(cfg, taps.into_iter().map(|((k, l), v)| (k, l, v))))
}

/// Default pilot carrier: the centre of the delay-Doppler grid, `M·⌊N/2⌋ + ⌊M/2⌋`.
pub fn default_pilot_index<T: Scalar>(cfg: &FrameConfig<T>) -> usize {
    cfg.m() * (cfg.n() / 2) + cfg.m() / 2
}

/// Joint linear MMSE filter `r ↦ A^H (A A^H + σ² I)^{-1} r`, factored once for reuse.
#[derive(Debug, Clone)]
pub struct MmseFilter<T> {
    a: CMatrix<T>,
    chol: Cholesky<T>,
}

impl<T: Scalar> MmseFilter<T> {
    pub fn new(a: &CMatrix<T>, noise_var: f64) -> Result<Self> {
        Self::from_owned(a.clone(), noise_var)
    }

    pub fn from_owned(a: CMatrix<T>, noise_var: f64) -> Result<Self> {
        if noise_var.is_nan() || noise_var < 0.0 {
            return Err(Error::NegativeNoiseVariance(noise_var));
        }
        let mut gram = a.outer_gram();
        gram.add_diagonal(T::lit(noise_var));
        let chol = Cholesky::new(&gram)?;
        Ok(Self { a, chol })
    }

    pub fn apply(&self, r: &[C<T>]) -> Result<Vec<C<T>>> {
        self.a.adjoint_matvec(&self.chol.solve(r)?)
    }
}

/// `ŝ = H^H (H H^H + σ² I)^{-1} r`.
pub fn mmse_detect<T: Scalar>(h: &EffectiveChannel<T>, r: &SymbolVector<T>, noise_var: f64) -> Result<SymbolVector<T>> {
    check_len(h.matrix().rows(), r.len())?;
    Ok(SymbolVector(MmseFilter::new(h.matrix(), noise_var)?.apply(r)?))
}
