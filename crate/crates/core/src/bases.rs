//! The five orthonormal carrier families and maps between them.
//!
//! Carrier index `i` decomposes as `i = M·⌊i/M⌋ + (i)_M`, with `(i)_M` the delay
//! index and `⌊i/M⌋` the Doppler (or symbol) index.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frame::FrameConfig;
use crate::linalg::CMatrix;
use crate::scalar::{cis, root_of_unity, Scalar, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Ofdm,
    Afdm,
    Oddm,
    Otsm,
    ZakOtfs,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::Ofdm,
        SchemeId::Afdm,
        SchemeId::Oddm,
        SchemeId::Otsm,
        SchemeId::ZakOtfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Ofdm => "OFDM",
            SchemeId::Afdm => "AFDM",
            SchemeId::Oddm => "ODDM",
            SchemeId::Otsm => "OTSM",
            SchemeId::ZakOtfs => "Zak-OTFS",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "ofdm" => Ok(SchemeId::Ofdm),
            "afdm" => Ok(SchemeId::Afdm),
            "oddm" => Ok(SchemeId::Oddm),
            "otsm" => Ok(SchemeId::Otsm),
            "zak" | "zak-otfs" | "zakotfs" => Ok(SchemeId::ZakOtfs),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// AFDM chirp parameters `c1 = Δ/(MN)` and `c2`.
///
/// `Δ` is stored doubled so the half-integer OCDM case (`c1 = 1/(2MN)`) is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfdmParams {
    two_delta: i64,
    c2: f64,
}

impl AfdmParams {
    pub fn new(delta: i64, c2: f64) -> Self {
        Self {
            two_delta: 2 * delta,
            c2,
        }
    }

    /// Parameters with `Δ = two_delta / 2`, allowing half-integer `Δ`.
    pub fn from_two_delta(two_delta: i64, c2: f64) -> Self {
        Self { two_delta, c2 }
    }

    /// OCDM specialization `c1 = c2 = 1/(2MN)`.
    pub fn ocdm(mn: usize) -> Self {
        Self {
            two_delta: 1,
            c2: 1.0 / (2.0 * mn as f64),
        }
    }

    /// DFT-p-FDMA specialization `c1 = c2 = Δ/(MN)`.
    pub fn dft_p_fdma(delta: i64, mn: usize) -> Self {
        Self::new(delta, delta as f64 / mn as f64)
    }

    /// `Δ` when it is an integer.
    pub fn delta(&self) -> Option<i64> {
        (self.two_delta % 2 == 0).then_some(self.two_delta / 2)
    }

    pub fn two_delta(&self) -> i64 {
        self.two_delta
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn c1(&self, mn: usize) -> f64 {
        self.two_delta as f64 / (2.0 * mn as f64)
    }
}

/// An orthonormal family of `MN` carriers of length `MN`.
#[derive(Debug, Clone)]
pub struct Basis<T> {
    scheme: SchemeId,
    cfg: FrameConfig<T>,
    afdm: Option<AfdmParams>,
    /// Row `n`, column `i` holds `φ_i[n]`.
    carriers: CMatrix<T>,
    supports: Vec<Vec<usize>>,
}

impl<T: Scalar> Basis<T> {
    pub fn generate(scheme: SchemeId, cfg: &FrameConfig<T>, afdm: Option<AfdmParams>) -> Result<Self> {
        let (m, n) = (cfg.m(), cfg.n());
        let mn = cfg.mn();
        let carriers = match scheme {
            SchemeId::Ofdm => {
                let amp = 1.0 / (m as f64).sqrt();
                CMatrix::from_fn(mn, mn, |t, i| {
                    if i / m == t / m {
                        root_of_unity::<T>(((i * t) % m) as i64, m) * T::lit(amp)
                    } else {
                        C::zero()
                    }
                })
            }
            SchemeId::Afdm => {
                let p = afdm.ok_or(Error::MissingAfdmParams)?;
                let amp = 1.0 / (mn as f64).sqrt();
                let two_mn = 2 * mn as i128;
                CMatrix::from_fn(mn, mn, |t, i| {
                    // c1 n² = two_delta·n² / 2MN, reduced exactly before taking the angle.
                    let chirp_n = (p.two_delta as i128 * (t as i128) * (t as i128)).rem_euclid(two_mn);
                    let chirp_i = (p.c2 * (i as f64) * (i as f64)).fract();
                    let tone = ((t * i) % mn) as f64 / mn as f64;
                    let cycles = chirp_n as f64 / two_mn as f64 + chirp_i + tone;
                    cis::<T>(tau() * cycles) * T::lit(amp)
                })
            }
            SchemeId::Oddm => {
                let amp = 1.0 / (n as f64).sqrt();
                CMatrix::from_fn(mn, mn, |t, i| {
                    if i % m == t % m {
                        root_of_unity::<T>(((i / m) * (t / m) % n) as i64, n) * T::lit(amp)
                    } else {
                        C::zero()
                    }
                })
            }
            SchemeId::Otsm => {
                if !n.is_power_of_two() {
                    return Err(Error::OtsmNeedsPowerOfTwo(n));
                }
                let amp = T::lit(1.0 / (n as f64).sqrt());
                CMatrix::from_fn(mn, mn, |t, i| {
                    if i % m == t % m {
                        let sign = if ((i / m) & (t / m)).count_ones() % 2 == 0 {
                            T::one()
                        } else {
                            -T::one()
                        };
                        C::new(sign * amp, T::zero())
                    } else {
                        C::zero()
                    }
                })
            }
            SchemeId::ZakOtfs => {
                // Pulse train at n = (i)_M + dM, d ∈ Z_N, modulated by the tone e^{j2π d⌊i/M⌋/N}.
                let amp = 1.0 / (n as f64).sqrt();
                let mut mat = CMatrix::zeros(mn, mn);
                for i in 0..mn {
                    let (delay, doppler) = (i % m, i / m);
                    for d in 0..n {
                        mat[(delay + d * m, i)] += root_of_unity::<T>((d * doppler % n) as i64, n) * T::lit(amp);
                    }
                }
                mat
            }
        };
        Ok(Self::from_matrix(scheme, *cfg, afdm, carriers))
    }

    fn from_matrix(scheme: SchemeId, cfg: FrameConfig<T>, afdm: Option<AfdmParams>, carriers: CMatrix<T>) -> Self {
        let mn = carriers.cols();
        let supports = (0..mn)
            .map(|i| (0..carriers.rows()).filter(|&t| !carriers[(t, i)].is_zero()).collect())
            .collect();
        Self {
            scheme,
            cfg,
            afdm,
            carriers,
            supports,
        }
    }

    /// Replaces the carrier matrix; used to exercise the Gram check on malformed families.
    pub fn with_carriers(&self, carriers: CMatrix<T>) -> Result<Self> {
        let mn = self.cfg.mn();
        if carriers.rows() != mn || carriers.cols() != mn {
            return Err(Error::DimensionMismatch {
                expected: mn,
                got: carriers.rows(),
            });
        }
        Ok(Self::from_matrix(self.scheme, self.cfg, self.afdm, carriers))
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn cfg(&self) -> &FrameConfig<T> {
        &self.cfg
    }

    pub fn afdm(&self) -> Option<AfdmParams> {
        self.afdm
    }

    pub fn dim(&self) -> usize {
        self.carriers.cols()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.carriers
    }

    pub fn carrier(&self, i: usize) -> Vec<C<T>> {
        self.carriers.column(i)
    }

    /// Nonzero samples `(n, φ_i[n])` of carrier `i`.
    pub fn carrier_entries(&self, i: usize) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        self.supports[i].iter().map(move |&t| (t, self.carriers[(t, i)]))
    }

    /// Entry `(i, j)` is `Σ_n φ_i*[n] φ_j[n]`.
    pub fn gram_matrix(&self) -> CMatrix<T> {
        self.carriers.inner_gram()
    }

    /// Writes the carrier matrix as a `DDMB` file: 16-byte header (`b"DDMB"`, little-endian
    /// `u32` MN, eight reserved zero bytes) followed by the MN×MN matrix `[n][i] = φ_i[n]`
    /// in row-major order as little-endian `f32` (re, im) pairs.
    pub fn write_ddmb<W: Write>(&self, mut w: W) -> Result<()> {
        let mn = self.dim();
        w.write_all(b"DDMB")?;
        w.write_all(&(mn as u32).to_le_bytes())?;
        w.write_all(&[0u8; 8])?;
        for v in self.carriers.as_slice() {
            w.write_all(&(v.re.as_f64() as f32).to_le_bytes())?;
            w.write_all(&(v.im.as_f64() as f32).to_le_bytes())?;
        }
        Ok(())
    }
}

/// Reads a `DDMB` carrier matrix written by [`Basis::write_ddmb`].
pub fn read_ddmb<R: Read>(mut r: R) -> Result<CMatrix<f32>> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != b"DDMB" {
        return Err(Error::Config("not a DDMB file".into()));
    }
    let mn = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
    let mut body = vec![0u8; mn * mn * 8];
    r.read_exact(&mut body)?;
    let mut it = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")));
    Ok(CMatrix::from_fn(mn, mn, |_, _| {
        let re = it.next().expect("sized body");
        let im = it.next().expect("sized body");
        C::new(re, im)
    }))
}

/// `U = Φ_aᴴ Φ_b`, i.e. `U[i, j] = Σ_n φ_i^(a)*[n] φ_j^(b)[n]`, so that `Φ_b = Φ_a U`.
pub fn change_of_basis<T: Scalar>(a: &Basis<T>, b: &Basis<T>) -> Result<CMatrix<T>> {
    if a.cfg() != b.cfg() {
        return Err(Error::ConfigMismatch);
    }
    a.matrix().adjoint().matmul(b.matrix())
}

fn tau() -> f64 {
    2.0 * std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, n: usize) -> FrameConfig<f64> {
        FrameConfig::new(m, n, 30e3).unwrap()
    }

    fn all(c: &FrameConfig<f64>) -> Vec<Basis<f64>> {
        SchemeId::ALL
            .iter()
            .filter(|s| **s != SchemeId::Otsm || c.n().is_power_of_two())
            .map(|&s| Basis::generate(s, c, Some(AfdmParams::new(8, 0.0))).unwrap())
            .collect()
    }

    #[test]
    fn zak_first_carrier_is_a_pulse_train() {
        let b = Basis::generate(SchemeId::ZakOtfs, &cfg(13, 16), None).unwrap();
        for t in 0..208 {
            let v = b.matrix()[(t, 0)];
            let want = if t % 13 == 0 { 0.25 } else { 0.0 };
            assert!((v - C::new(want, 0.0)).norm() < 1e-15, "n = {t}");
        }
    }

    #[test]
    fn ofdm_first_carrier_is_first_symbol() {
        let b = Basis::generate(SchemeId::Ofdm, &cfg(13, 16), None).unwrap();
        let a = 1.0 / 13f64.sqrt();
        for t in 0..208 {
            let want = if t < 13 { a } else { 0.0 };
            assert!((b.matrix()[(t, 0)] - C::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn otsm_requires_power_of_two() {
        assert!(matches!(
            Basis::generate(SchemeId::Otsm, &cfg(13, 12), None),
            Err(Error::OtsmNeedsPowerOfTwo(12))
        ));
    }

    #[test]
    fn afdm_requires_params() {
        assert!(matches!(
            Basis::generate(SchemeId::Afdm, &cfg(4, 4), None),
            Err(Error::MissingAfdmParams)
        ));
    }

    #[test]
    fn all_bases_orthonormal() {
        for (m, n) in [(13, 16), (4, 4), (3, 8), (3, 5)] {
            let c = cfg(m, n);
            for b in all(&c) {
                let (dev, at) = b.gram_matrix().identity_deviation();
                assert!(dev < 1e-10, "{} at ({m},{n}): {dev} at {at:?}", b.scheme());
            }
        }
    }

    #[test]
    fn afdm_orthonormal_for_any_chirp() {
        let c = cfg(4, 4);
        for p in [
            AfdmParams::new(1, 0.0),
            AfdmParams::new(3, 0.37),
            AfdmParams::new(-5, 2.5),
            AfdmParams::ocdm(16),
            AfdmParams::dft_p_fdma(3, 16),
        ] {
            let b = Basis::generate(SchemeId::Afdm, &c, Some(p)).unwrap();
            assert!(b.gram_matrix().identity_deviation().0 < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn duplicated_column_is_detected() {
        let b = Basis::generate(SchemeId::ZakOtfs, &cfg(2, 2), None).unwrap();
        let mut m = b.matrix().clone();
        for t in 0..4 {
            m[(t, 1)] = m[(t, 0)];
        }
        let bad = b.with_carriers(m).unwrap();
        let g = bad.gram_matrix();
        assert!((g[(0, 1)] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(g.identity_deviation().0 > 0.99);
    }

    #[test]
    fn zak_two_point_frame_is_exact_identity_gram() {
        let b = Basis::generate(SchemeId::ZakOtfs, &cfg(1, 2), None).unwrap();
        let g = b.gram_matrix();
        assert_eq!(b.matrix()[(1, 1)], C::new(-1.0 / 2f64.sqrt(), 0.0));
        assert!(g.identity_deviation().0 <= 2.0 * f64::EPSILON);
        assert_eq!(g[(0, 1)], C::new(0.0, 0.0));
    }

    #[test]
    fn oddm_equals_zak() {
        let c = cfg(13, 16);
        let oddm = Basis::generate(SchemeId::Oddm, &c, None).unwrap();
        let zak = Basis::generate(SchemeId::ZakOtfs, &c, None).unwrap();
        let diff = oddm.matrix().sub(zak.matrix()).unwrap().max_abs().0;
        assert!(diff < 1e-12);
        let u = change_of_basis(&oddm, &zak).unwrap();
        assert!(u.identity_deviation().0 < 1e-12);
    }

    #[test]
    fn self_change_of_basis_is_identity() {
        let c = cfg(3, 4);
        for b in all(&c) {
            assert!(change_of_basis(&b, &b).unwrap().identity_deviation().0 < 1e-12);
        }
    }

    #[test]
    fn otsm_to_zak_preserves_delay_residue() {
        let c = cfg(3, 8);
        let otsm = Basis::generate(SchemeId::Otsm, &c, None).unwrap();
        let zak = Basis::generate(SchemeId::ZakOtfs, &c, None).unwrap();
        let u = change_of_basis(&otsm, &zak).unwrap();
        for i in 0..24 {
            for j in 0..24 {
                if i % 3 != j % 3 {
                    assert!(u[(i, j)].norm() < 1e-12);
                }
            }
        }
        assert!(u.inner_gram().identity_deviation().0 < 1e-12);
    }

    #[test]
    fn change_of_basis_rejects_mismatched_frames() {
        let a = Basis::generate(SchemeId::ZakOtfs, &cfg(2, 2), None).unwrap();
        let b = Basis::generate(SchemeId::ZakOtfs, &cfg(4, 1), None).unwrap();
        assert!(matches!(change_of_basis(&a, &b), Err(Error::ConfigMismatch)));
    }

    #[test]
    fn ddmb_round_trip() {
        let b = Basis::generate(SchemeId::Afdm, &cfg(2, 4), Some(AfdmParams::new(1, 0.0))).unwrap();
        let mut buf = Vec::new();
        b.write_ddmb(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"DDMB");
        assert_eq!(buf.len(), 16 + 64 * 8);
        let m = read_ddmb(buf.as_slice()).unwrap();
        for t in 0..8 {
            for i in 0..8 {
                let d = C::new(m[(t, i)].re as f64, m[(t, i)].im as f64) - b.matrix()[(t, i)];
                assert!(d.norm() < 1e-6);
            }
        }
    }

    #[test]
    fn scheme_names_parse() {
        for s in SchemeId::ALL {
            assert_eq!(s.name().parse::<SchemeId>().unwrap(), s);
        }
        assert_eq!("zak".parse::<SchemeId>().unwrap(), SchemeId::ZakOtfs);
        assert!("qpsk".parse::<SchemeId>().is_err());
    }
}
