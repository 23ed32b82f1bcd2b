//! Filter kernel design.
//!
//! Kernels come from two places. Brick-wall sets ([`ideal_kernels`]) indicate
//! contiguous eigenvalue-index blocks directly. Classical linear-phase filter
//! banks ([`ClassicalFilterSet`]) are carried over to a graph spectrum by
//! composing their real amplitude response with a frequency warp
//! ([`AlphaMap`]) that sends eigenvalue indices into `[0, 2π]`.
//!
//! The warp is where all the structure lives. Folding a length-`N` spectrum
//! into `M` blocks pairs index `(q, r)` with its images in every other block:
//! same-parity blocks pair at the same offset `r`, opposite-parity blocks at
//! the reflected offset `B-1-r` (`B = N/M`). The warp is built from exact
//! per-block constants so that
//!
//! - paired same-parity indices differ by an exact multiple of `2π/M` (R1),
//! - paired opposite-parity indices sum to an exact multiple of `2π/M` (R2),
//!
//! never a multiple of `2π` in either case. Classical alias cancellation on
//! the `2π/M` shift grid, plus the symmetry of linear-phase amplitudes under
//! `ω → -ω` and `ω → ω + 2π`, then forces every cross term of the folded
//! transform to cancel — which is exactly what the reconstruction oracles in
//! [`crate::bank`] measure.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;

use crate::sampling::Parity;
use crate::{Error, Result};

/// `M` real FIR filters of length `L = M·K` with alternating symmetry:
/// even-index channels are symmetric (`h[n] = h[L-1-n]`), odd-index channels
/// anti-symmetric. Analysis and synthesis share the same taps (orthogonal
/// sets only).
#[derive(Debug, Clone)]
pub struct ClassicalFilterSet {
    taps: Array2<f64>, // M × L
    overlap: usize,    // K
}

/// Residual report from [`verify_classical_pr`]: worst deviation of the
/// in-band product sum from its constant, worst aliasing sum modulus, and the
/// fitted constant `c²`.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalPrReport {
    pub max_distortion_residual: f64,
    pub max_alias_residual: f64,
    pub c_sq: f64,
}

impl ClassicalFilterSet {
    /// Orthonormal cosine block transform (`K = 1`):
    /// `h_m[n] = c_m·cos(πm(n+½)/M)`.
    ///
    /// Taps are computed for the first half and mirrored so the symmetry
    /// pattern holds bit-exactly, not merely to rounding.
    pub fn dct(m_channels: usize) -> Result<Self> {
        check_even_channels(m_channels)?;
        let m = m_channels;
        let mut taps = Array2::zeros((m, m));
        for ch in 0..m {
            let scale = if ch == 0 {
                (1.0 / m as f64).sqrt()
            } else {
                (2.0 / m as f64).sqrt()
            };
            for n in 0..m / 2 {
                let t = scale * (PI * ch as f64 * (n as f64 + 0.5) / m as f64).cos();
                taps[[ch, n]] = t;
                taps[[ch, m - 1 - n]] = if ch % 2 == 0 { t } else { -t };
            }
        }
        let set = ClassicalFilterSet { taps, overlap: 1 };
        set.validate(1e-12, 1e-12)?;
        Ok(set)
    }

    /// Lapped orthogonal transform (`K = 2`, length `2M`).
    ///
    /// Built from differences of adjacent cosine-transform rows: with
    /// `a_i = d_{2i} - d_{2i+1}`, channel `2i` is `½[a_i | reverse(a_i)]` and
    /// channel `2i+1` is `½[a_i | -reverse(a_i)]`. Rows are orthonormal and
    /// the half-overlap products vanish, so the set is paraunitary; the
    /// constructor re-verifies both its symmetry pattern and its
    /// reconstruction residuals rather than trusting the formula.
    pub fn lot(m_channels: usize) -> Result<Self> {
        check_even_channels(m_channels)?;
        if m_channels < 4 {
            return Err(Error::Design(format!(
                "lapped transform needs at least 4 channels, got {m_channels}"
            )));
        }
        let m = m_channels;
        let dct = ClassicalFilterSet::dct(m)?;
        let mut taps = Array2::zeros((m, 2 * m));
        for i in 0..m / 2 {
            let a: Vec<f64> = (0..m)
                .map(|n| dct.taps[[2 * i, n]] - dct.taps[[2 * i + 1, n]])
                .collect();
            for n in 0..m {
                let head = 0.5 * a[n];
                let tail = 0.5 * a[m - 1 - n];
                taps[[2 * i, n]] = head;
                taps[[2 * i, m + n]] = tail;
                taps[[2 * i + 1, n]] = head;
                taps[[2 * i + 1, m + n]] = -tail;
            }
        }
        let set = ClassicalFilterSet { taps, overlap: 2 };
        set.validate(1e-12, 1e-10)?;
        Ok(set)
    }

    pub fn m_channels(&self) -> usize {
        self.taps.nrows()
    }

    /// Tap count `L = M·K`.
    pub fn tap_len(&self) -> usize {
        self.taps.ncols()
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn taps(&self) -> &Array2<f64> {
        &self.taps
    }

    /// Complex frequency response `Σ_n h_m[n]·e^{-jωn}`.
    pub fn frequency_response(&self, channel: usize, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &h) in self.taps.row(channel).iter().enumerate() {
            acc += h * Complex64::from_polar(1.0, -omega * n as f64);
        }
        acc
    }

    /// Real amplitude with its (ideally zero) imaginary residue: the response
    /// with the linear-phase delay removed, `e^{j(L-1)ω/2}·𝙷_m(ω)`, times
    /// `-j` on anti-symmetric channels.
    pub fn amplitude_parts(&self, channel: usize, omega: f64) -> (f64, f64) {
        let l = self.tap_len();
        let mut z = Complex64::from_polar(1.0, 0.5 * (l as f64 - 1.0) * omega)
            * self.frequency_response(channel, omega);
        if channel % 2 == 1 {
            z *= Complex64::new(0.0, -1.0);
        }
        (z.re, z.im)
    }

    /// Real amplitude response; errors if the imaginary residue betrays a
    /// broken symmetry pattern.
    pub fn amplitude(&self, channel: usize, omega: f64) -> Result<f64> {
        let (re, im) = self.amplitude_parts(channel, omega);
        if im.abs() >= 1e-12 {
            return Err(Error::Design(format!(
                "amplitude of channel {channel} at ω = {omega} has imaginary residue {im:e}"
            )));
        }
        Ok(re)
    }

    fn validate(&self, symmetry_tol: f64, pr_tol: f64) -> Result<()> {
        let l = self.tap_len();
        if l != self.m_channels() * self.overlap {
            return Err(Error::Design("tap count must equal M·K".into()));
        }
        for ch in 0..self.m_channels() {
            let sign = if ch % 2 == 0 { 1.0 } else { -1.0 };
            for n in 0..l {
                let dev = (self.taps[[ch, n]] - sign * self.taps[[ch, l - 1 - n]]).abs();
                if dev >= symmetry_tol {
                    return Err(Error::Design(format!(
                        "channel {ch} violates its symmetry pattern at tap {n}: {dev:e}"
                    )));
                }
            }
        }
        let report = verify_classical_pr(self, 256)?;
        if report.max_distortion_residual >= pr_tol || report.max_alias_residual >= pr_tol {
            return Err(Error::Design(format!(
                "classical reconstruction residuals too large: distortion {:e}, alias {:e}",
                report.max_distortion_residual, report.max_alias_residual
            )));
        }
        Ok(())
    }
}

/// Evaluates the two classical reconstruction conditions on a uniform `ω`
/// grid over `[0, 2π)`: the in-band sum `Σ_m 𝙶*_m(ω)𝙷_m(ω)` must be a
/// constant `c²`, and for every shift `p = 1…M-1` the aliasing sum
/// `Σ_m 𝙶*_m(ω)𝙷_m(ω + 2πp/M)` must vanish. Synthesis equals analysis here,
/// so `𝙶*𝙷 = |𝙷|²` on the diagonal.
pub fn verify_classical_pr(
    set: &ClassicalFilterSet,
    grid_size: usize,
) -> Result<ClassicalPrReport> {
    if grid_size < 64 {
        return Err(Error::Validation(format!(
            "validation grid of {grid_size} points is too coarse (need >= 64)"
        )));
    }
    let m = set.m_channels();
    let mut band_sums = Vec::with_capacity(grid_size);
    let mut max_alias = 0.0f64;
    for k in 0..grid_size {
        let omega = 2.0 * PI * k as f64 / grid_size as f64;
        let responses: Vec<Complex64> =
            (0..m).map(|ch| set.frequency_response(ch, omega)).collect();
        let band: Complex64 = responses.iter().map(|h| h.conj() * h).sum();
        band_sums.push(band.re);
        for p in 1..m {
            let shift = 2.0 * PI * p as f64 / m as f64;
            let alias: Complex64 = (0..m)
                .map(|ch| responses[ch].conj() * set.frequency_response(ch, omega + shift))
                .sum();
            max_alias = max_alias.max(alias.norm());
        }
    }
    let c_sq = band_sums.iter().sum::<f64>() / grid_size as f64;
    let max_distortion = band_sums
        .iter()
        .fold(0.0f64, |acc, &s| acc.max((s - c_sq).abs()));
    Ok(ClassicalPrReport {
        max_distortion_residual: max_distortion,
        max_alias_residual: max_alias,
        c_sq,
    })
}

/// How the per-block base values of the frequency warp are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaBase {
    /// `β_r = π·λ_r/λ_max`: anchored to the global spectrum span. Block 0
    /// can then overflow its nominal width `π/M` when `M > 2`, which costs
    /// band selectivity but provably not reconstruction.
    GlobalEigenvalue,
    /// `β_r = (π/M)·λ_r/λ_{B-1}`: eigenvalue-anchored but rescaled so every
    /// block maps into its own classical band `[qπ/M, (q+1)π/M]`. The
    /// default.
    #[default]
    TiledEigenvalue,
    /// `β_r = (π/M)·(r+½)/B`: ignores eigenvalue spacing entirely; uniform
    /// in rank.
    TiledRank,
}

impl AlphaBase {
    pub const ALL: [AlphaBase; 3] = [
        AlphaBase::GlobalEigenvalue,
        AlphaBase::TiledEigenvalue,
        AlphaBase::TiledRank,
    ];
}

impl fmt::Display for AlphaBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlphaBase::GlobalEigenvalue => "global",
            AlphaBase::TiledEigenvalue => "tiled-eig",
            AlphaBase::TiledRank => "tiled-rank",
        };
        f.write_str(s)
    }
}

impl FromStr for AlphaBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(AlphaBase::GlobalEigenvalue),
            "tiled-eig" => Ok(AlphaBase::TiledEigenvalue),
            "tiled-rank" => Ok(AlphaBase::TiledRank),
            other => Err(Error::Validation(format!(
                "unknown warp base `{other}` (expected global, tiled-eig, or tiled-rank)"
            ))),
        }
    }
}

/// Frequency warp: one value in `[0, 2π]` per eigenvalue index, built from
/// exact block constants so the alias-pairing relations hold to rounding.
#[derive(Debug, Clone)]
pub struct AlphaMap {
    alphas: Array1<f64>,
    base: AlphaBase,
    m_channels: usize,
    max_relation_residual: f64,
}

impl AlphaMap {
    pub fn alphas(&self) -> &Array1<f64> {
        &self.alphas
    }

    pub fn base(&self) -> AlphaBase {
        self.base
    }

    pub fn m_channels(&self) -> usize {
        self.m_channels
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// Worst deviation of the pairing relations measured at construction.
    pub fn max_relation_residual(&self) -> f64 {
        self.max_relation_residual
    }
}

/// Builds the warp for `lambdas` (ascending, length divisible by `M`).
///
/// With block `q = ⌊iM/N⌋` and offset `r = i mod B`, the warp is
/// `α_i = πq/M + β_r` on even blocks and `α_i = π(q+1)/M − β_{B-1-r}` on odd
/// blocks. Eigenvalues enter only through the base values `β`, on the
/// shifted spectrum `λ - λ_0` so operators with negative eigenvalues (the
/// adjacency kind) warp identically to Laplacians.
///
/// Every alias pair is checked before returning: same-parity blocks must
/// differ by exactly `π(q'-q)/M` at equal offsets (R1), opposite-parity
/// blocks must sum to exactly `π(q+q'+1)/M` at reflected offsets (R2). Both
/// are nonzero multiples of `2π/M` modulo `2π` by construction.
pub fn build_alpha_map(
    lambdas: ArrayView1<f64>,
    m_channels: usize,
    base: AlphaBase,
) -> Result<AlphaMap> {
    check_even_channels(m_channels)?;
    let n = lambdas.len();
    if n == 0 || !n.is_multiple_of(m_channels) {
        return Err(Error::NotDivisible { n, m: m_channels });
    }
    if lambdas.windows(2).into_iter().any(|w| w[0] > w[1]) {
        return Err(Error::Validation(
            "eigenvalues must be ascending to build the warp".into(),
        ));
    }
    let b = n / m_channels;
    let mf = m_channels as f64;
    let shifted: Vec<f64> = lambdas.iter().map(|&l| l - lambdas[0]).collect();
    let betas: Vec<f64> = match base {
        AlphaBase::GlobalEigenvalue => {
            let span = shifted[n - 1];
            if span <= 0.0 {
                return Err(Error::Design(
                    "flat spectrum: eigenvalue span is zero".into(),
                ));
            }
            (0..b).map(|r| PI * shifted[r] / span).collect()
        }
        AlphaBase::TiledEigenvalue => {
            let span = shifted[b - 1];
            if span <= 0.0 {
                return Err(Error::Design(
                    "degenerate first block: eigenvalues λ_0 … λ_{B-1} are all equal".into(),
                ));
            }
            (0..b).map(|r| PI / mf * shifted[r] / span).collect()
        }
        AlphaBase::TiledRank => (0..b)
            .map(|r| PI / mf * (r as f64 + 0.5) / b as f64)
            .collect(),
    };

    let mut alphas = Array1::zeros(n);
    for q in 0..m_channels {
        for r in 0..b {
            alphas[q * b + r] = if q % 2 == 0 {
                PI * q as f64 / mf + betas[r]
            } else {
                PI * (q + 1) as f64 / mf - betas[b - 1 - r]
            };
        }
    }

    let mut worst = 0.0f64;
    for r in 0..b {
        for q in 0..m_channels {
            for qp in 0..m_channels {
                let residual = if q % 2 == qp % 2 {
                    let expected = PI * (qp as f64 - q as f64) / mf;
                    (alphas[qp * b + r] - alphas[q * b + r] - expected).abs()
                } else {
                    let expected = PI * (q + qp + 1) as f64 / mf;
                    (alphas[q * b + r] + alphas[qp * b + (b - 1 - r)] - expected).abs()
                };
                worst = worst.max(residual);
            }
        }
    }
    if worst > 1e-12 {
        return Err(Error::Design(format!(
            "alias-pairing relations violated: worst residual {worst:e}"
        )));
    }

    Ok(AlphaMap {
        alphas,
        base,
        m_channels,
        max_relation_residual: worst,
    })
}

/// `M` real spectral responses of length `N`, shared by analysis and
/// synthesis, with the measured reconstruction constant `c²` (the mean of
/// `Σ_m H_m(λ_i)²` over `i`, which equals the mean diagonal of the dense
/// transfer operator).
#[derive(Debug, Clone)]
pub struct KernelSet {
    responses: Array2<f64>, // M × N
    pr_constant_sq: f64,
    max_imag_residue: f64,
}

impl KernelSet {
    /// Wraps raw responses (e.g. loaded from disk), measuring `c²`.
    pub fn from_responses(responses: Array2<f64>) -> Result<Self> {
        check_even_channels(responses.nrows())?;
        let n = responses.ncols();
        if n == 0 || !n.is_multiple_of(responses.nrows()) {
            return Err(Error::NotDivisible {
                n,
                m: responses.nrows(),
            });
        }
        if responses.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("kernel responses must be finite".into()));
        }
        let c_sq = measured_constant(&responses);
        Ok(KernelSet {
            responses,
            pr_constant_sq: c_sq,
            max_imag_residue: 0.0,
        })
    }

    pub fn m_channels(&self) -> usize {
        self.responses.nrows()
    }

    pub fn n(&self) -> usize {
        self.responses.ncols()
    }

    pub fn responses(&self) -> &Array2<f64> {
        &self.responses
    }

    pub fn response(&self, channel: usize) -> ArrayView1<'_, f64> {
        self.responses.row(channel)
    }

    pub fn parity(&self, channel: usize) -> Parity {
        Parity::of_channel(channel)
    }

    pub fn pr_constant_sq(&self) -> f64 {
        self.pr_constant_sq
    }

    /// Worst imaginary residue seen during conversion (zero for brick-wall
    /// and loaded sets).
    pub fn max_imag_residue(&self) -> f64 {
        self.max_imag_residue
    }
}

fn measured_constant(responses: &Array2<f64>) -> f64 {
    let n = responses.ncols();
    let mut total = 0.0;
    for i in 0..n {
        let mut col = 0.0;
        for m in 0..responses.nrows() {
            col += responses[[m, i]] * responses[[m, i]];
        }
        total += col;
    }
    total / n as f64
}

/// Brick-wall kernels: channel `m` indicates eigenvalue indices with
/// `⌊iM/N⌋ = m`; `c² = 1`.
pub fn ideal_kernels(n: usize, m_channels: usize) -> Result<KernelSet> {
    check_even_channels(m_channels)?;
    if n == 0 || !n.is_multiple_of(m_channels) {
        return Err(Error::NotDivisible { n, m: m_channels });
    }
    let b = n / m_channels;
    let mut responses = Array2::zeros((m_channels, n));
    for ch in 0..m_channels {
        for r in 0..b {
            responses[[ch, ch * b + r]] = 1.0;
        }
    }
    KernelSet::from_responses(responses)
}

/// Carries a classical set onto a graph spectrum: `H_m(λ_i)` is the real
/// amplitude of channel `m` evaluated at the warped frequency `α_i`. The
/// complex evaluation must come out real to 1e-10 (it does whenever the
/// symmetry pattern holds); the worst residue is recorded on the result.
pub fn convert_filter_set(set: &ClassicalFilterSet, warp: &AlphaMap) -> Result<KernelSet> {
    if set.m_channels() != warp.m_channels() {
        return Err(Error::Validation(format!(
            "channel count mismatch: filters have {}, warp has {}",
            set.m_channels(),
            warp.m_channels()
        )));
    }
    let n = warp.n();
    let mut responses = Array2::zeros((set.m_channels(), n));
    let mut worst_im = 0.0f64;
    for ch in 0..set.m_channels() {
        for i in 0..n {
            let (re, im) = set.amplitude_parts(ch, warp.alphas()[i]);
            worst_im = worst_im.max(im.abs());
            responses[[ch, i]] = re;
        }
    }
    if worst_im >= 1e-10 {
        return Err(Error::Design(format!(
            "converted kernels have imaginary residue {worst_im:e}; \
             classical set violates its symmetry pattern"
        )));
    }
    let c_sq = measured_constant(&responses);
    Ok(KernelSet {
        responses,
        pr_constant_sq: c_sq,
        max_imag_residue: worst_im,
    })
}

fn check_even_channels(m: usize) -> Result<()> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::BadChannelCount(m));
    }
    Ok(())
}
