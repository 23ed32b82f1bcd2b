//! Frequency-domain sampling by index folding.
//!
//! Downsampling a length-`N` spectral vector to `N/M` never deletes
//! coefficients: the vector is cut into `M` contiguous blocks and the blocks
//! are summed, with every odd-numbered block reversed first (and negated for
//! odd-parity channels). Equivalently, the operator is the block matrix
//! `[I J I J …]` built from identity and counter-identity tiles, with signs
//! `[I -J I -J …]` in the odd-parity variant. Upsampling is the transpose.
//! Everything here is O(N) index arithmetic; the dense matrices exist only as
//! test oracles.

use ndarray::{Array1, Array2, ArrayView1};

use crate::spectral::{GraphSignal, SpectralBasis};
use crate::{Error, Result};

/// Sign pattern of a folding operator, tied to channel-index parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_channel(m: usize) -> Parity {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Folding geometry: length `n` split into `m_channels` blocks of `n /
/// m_channels`, with `parity` selecting the sign of reversed blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldSpec {
    n: usize,
    m_channels: usize,
    parity: Parity,
}

impl FoldSpec {
    pub fn new(n: usize, m_channels: usize, parity: Parity) -> Result<Self> {
        if m_channels < 2 || !m_channels.is_multiple_of(2) {
            return Err(Error::BadChannelCount(m_channels));
        }
        if n == 0 || !n.is_multiple_of(m_channels) {
            return Err(Error::NotDivisible { n, m: m_channels });
        }
        Ok(FoldSpec {
            n,
            m_channels,
            parity,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_channels(&self) -> usize {
        self.m_channels
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Block length `N/M`.
    pub fn block_len(&self) -> usize {
        self.n / self.m_channels
    }

    /// Row of the folding matrix whose column `i` holds its single nonzero:
    /// block offset for even blocks, reflected offset for odd blocks.
    pub fn source_row(&self, i: usize) -> usize {
        let b = self.block_len();
        let q = i / b;
        let r = i % b;
        if q.is_multiple_of(2) {
            r
        } else {
            b - 1 - r
        }
    }

    /// Sign of the single nonzero in column `i` of the folding matrix.
    pub fn source_sign(&self, i: usize) -> f64 {
        let q = i / self.block_len();
        if q.is_multiple_of(2) || self.parity == Parity::Even {
            1.0
        } else {
            -1.0
        }
    }

    /// Folds length `N` down to length `N/M`: block `q` contributes
    /// `±x[q·B + r]` (even `q`) or `±x[q·B + (B-1-r)]` (odd `q`) to output
    /// slot `r`.
    pub fn fold_down(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let b = self.block_len();
        let mut out = Array1::zeros(b);
        for q in 0..self.m_channels {
            let base = q * b;
            if q % 2 == 0 {
                for r in 0..b {
                    out[r] += x[base + r];
                }
            } else {
                let sign = if self.parity == Parity::Even {
                    1.0
                } else {
                    -1.0
                };
                for r in 0..b {
                    out[r] += sign * x[base + (b - 1 - r)];
                }
            }
        }
        Ok(out)
    }

    /// Transpose action: scatters length `N/M` back to length `N`, reversing
    /// (and signing) the odd blocks. `fold_down(unfold_up(y)) = M·y`.
    pub fn unfold_up(&self, y: ArrayView1<f64>) -> Result<Array1<f64>> {
        let b = self.block_len();
        if y.len() != b {
            return Err(Error::DimensionMismatch {
                expected: b,
                got: y.len(),
            });
        }
        let mut out = Array1::zeros(self.n);
        for i in 0..self.n {
            out[i] = self.source_sign(i) * y[self.source_row(i)];
        }
        Ok(out)
    }

    /// Dense `(N/M) × N` folding matrix; test oracle only.
    pub fn fold_matrix(&self) -> Array2<f64> {
        let mut s = Array2::zeros((self.block_len(), self.n));
        for i in 0..self.n {
            s[[self.source_row(i), i]] = self.source_sign(i);
        }
        s
    }
}

/// Full spectral downsampling: transform into `basis0`'s frequency domain,
/// fold with even parity, then leave the reduced frequency domain through the
/// orthonormal `u1`. The reduction factor is `basis0.n() / u1.nrows()`.
pub fn downsample_spectral(
    basis0: &SpectralBasis,
    u1: &Array2<f64>,
    signal: &GraphSignal,
) -> Result<GraphSignal> {
    let spec = reduced_fold_spec(basis0.n(), u1)?;
    let spectrum = basis0.gft(signal)?;
    let folded = spec.fold_down(spectrum.values().view())?;
    Ok(GraphSignal::new(u1.dot(&folded)))
}

/// Adjoint of [`downsample_spectral`]: into the reduced frequency domain via
/// `u1ᵀ`, unfold back to full length, then leave through `basis0`.
pub fn upsample_spectral(
    basis0: &SpectralBasis,
    u1: &Array2<f64>,
    reduced: &GraphSignal,
) -> Result<GraphSignal> {
    let spec = reduced_fold_spec(basis0.n(), u1)?;
    if reduced.len() != u1.nrows() {
        return Err(Error::DimensionMismatch {
            expected: u1.nrows(),
            got: reduced.len(),
        });
    }
    let unfolded = spec.unfold_up(u1.t().dot(reduced.values()).view())?;
    basis0.igft(&crate::spectral::Spectrum::new(unfolded))
}

fn reduced_fold_spec(n: usize, u1: &Array2<f64>) -> Result<FoldSpec> {
    let b = u1.nrows();
    if u1.ncols() != b || b == 0 || !n.is_multiple_of(b) {
        return Err(Error::NotDivisible { n, m: b.max(1) });
    }
    check_orthonormal(u1)?;
    FoldSpec::new(n, n / b, Parity::Even)
}

/// Shared guard for user-supplied reduced bases.
pub(crate) fn check_orthonormal(u: &Array2<f64>) -> Result<()> {
    let gram = u.t().dot(u);
    let b = u.nrows();
    for i in 0..b {
        for j in 0..b {
            let target = if i == j { 1.0 } else { 0.0 };
            if (gram[[i, j]] - target).abs() >= 1e-10 {
                return Err(Error::Validation(format!(
                    "reduced basis not orthonormal at ({i}, {j}): {:e}",
                    gram[[i, j]] - target
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, VariationKind};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn fold_matches_small_hand_cases() {
        let x = Array1::from(vec![1.0, 2.0, 3.0, 4.0]); // [a,b,c,d]
        let even = FoldSpec::new(4, 2, Parity::Even).unwrap();
        assert_eq!(even.fold_down(x.view()).unwrap().to_vec(), vec![5.0, 5.0]); // [a+d, b+c]
        let odd = FoldSpec::new(4, 2, Parity::Odd).unwrap();
        assert_eq!(odd.fold_down(x.view()).unwrap().to_vec(), vec![-3.0, -1.0]); // [a-d, b-c]
        let four = FoldSpec::new(4, 4, Parity::Odd).unwrap();
        assert_eq!(four.fold_down(x.view()).unwrap().to_vec(), vec![-2.0]); // a-b+c-d
    }

    #[test]
    fn unfold_matches_small_hand_cases() {
        let y = Array1::from(vec![5.0, 7.0]); // [p,q]
        let even = FoldSpec::new(4, 2, Parity::Even).unwrap();
        assert_eq!(
            even.unfold_up(y.view()).unwrap().to_vec(),
            vec![5.0, 7.0, 7.0, 5.0]
        );
        let odd = FoldSpec::new(4, 2, Parity::Odd).unwrap();
        assert_eq!(
            odd.unfold_up(y.view()).unwrap().to_vec(),
            vec![5.0, 7.0, -7.0, -5.0]
        );
    }

    #[test]
    fn fold_after_unfold_scales_by_channel_count() {
        let y = Array1::from(vec![1.25, -0.5]);
        for parity in [Parity::Even, Parity::Odd] {
            let spec = FoldSpec::new(4, 2, parity).unwrap();
            let round = spec
                .fold_down(spec.unfold_up(y.view()).unwrap().view())
                .unwrap();
            assert_eq!(round.to_vec(), vec![2.5, -1.0]); // exactly M·y
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(matches!(
            FoldSpec::new(12, 3, Parity::Even),
            Err(Error::BadChannelCount(3))
        ));
        assert!(matches!(
            FoldSpec::new(10, 4, Parity::Even),
            Err(Error::NotDivisible { n: 10, m: 4 })
        ));
        let spec = FoldSpec::new(8, 2, Parity::Even).unwrap();
        assert!(spec.fold_down(Array1::zeros(6).view()).is_err());
        assert!(spec.unfold_up(Array1::zeros(3).view()).is_err());
    }

    // Dense matvec in ascending column order — the same order the folding
    // loop visits sources, so agreement is exact, not approximate.
    fn dense_apply(s: &Array2<f64>, x: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(s.nrows());
        for j in 0..s.ncols() {
            for i in 0..s.nrows() {
                if s[[i, j]] != 0.0 {
                    out[i] += s[[i, j]] * x[j];
                }
            }
        }
        out
    }

    #[test]
    fn folding_equals_dense_operator_exactly() {
        for n in [8usize, 16, 64] {
            for m in [2usize, 4, 8] {
                for parity in [Parity::Even, Parity::Odd] {
                    let spec = FoldSpec::new(n, m, parity).unwrap();
                    let s = spec.fold_matrix();
                    let x = Array1::from_iter((0..n).map(|i| ((i * 31 % 17) as f64 - 8.0) * 0.37));
                    let dense = dense_apply(&s, &x);
                    let fast = spec.fold_down(x.view()).unwrap();
                    assert_eq!(dense.to_vec(), fast.to_vec());

                    let y = Array1::from_iter((0..n / m).map(|i| (i as f64 - 1.5) * 0.21));
                    let dense_up = dense_apply(&s.t().to_owned(), &y);
                    let fast_up = spec.unfold_up(y.view()).unwrap();
                    assert_eq!(dense_up.to_vec(), fast_up.to_vec());
                }
            }
        }
    }

    #[test]
    fn down_up_composition_is_scaled_identity() {
        // S̃_d S̃_u has integer entries, so the check is exact.
        for m in [2usize, 4] {
            for parity in [Parity::Even, Parity::Odd] {
                let spec = FoldSpec::new(16, m, parity).unwrap();
                let s = spec.fold_matrix();
                let prod = s.dot(&s.t());
                for i in 0..16 / m {
                    for j in 0..16 / m {
                        let want = if i == j { m as f64 } else { 0.0 };
                        assert_eq!(prod[[i, j]], want);
                    }
                }
            }
        }
    }

    #[test]
    fn up_down_composition_has_tile_structure() {
        // S̃_u S̃_d in block (q, q') is ±I when q+q' is even, ±J when odd.
        for m in [2usize, 4] {
            for parity in [Parity::Even, Parity::Odd] {
                let spec = FoldSpec::new(16, m, parity).unwrap();
                let s = spec.fold_matrix();
                let prod = s.t().dot(&s);
                let b = 16 / m;
                for q in 0..m {
                    for qp in 0..m {
                        let sign = spec.source_sign(q * b) * spec.source_sign(qp * b);
                        for r in 0..b {
                            for rp in 0..b {
                                let inside = if (q + qp) % 2 == 0 {
                                    r == rp // identity tile
                                } else {
                                    r + rp == b - 1 // counter-identity tile
                                };
                                let want = if inside { sign } else { 0.0 };
                                assert_eq!(prod[[q * b + r, qp * b + rp]], want);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn spectral_down_then_up_preserves_halfband_signals() {
        // A spectrum confined to the first N/(2M) indices survives the
        // down/up trip followed by ideal low-pass, because folding leaves
        // those slots untouched and unfolding mirrors them into high blocks
        // that the low-pass removes.
        let g = Graph::path(8).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::CombinatorialLaplacian).unwrap();
        let mut spectrum = Array1::zeros(8);
        spectrum[0] = 1.0;
        spectrum[1] = -0.6; // support {0, 1} = first N/(2M) indices for M = 2
        let f = basis
            .igft(&crate::spectral::Spectrum::new(spectrum.clone()))
            .unwrap();

        let u1 = Array2::eye(4);
        let down = downsample_spectral(&basis, &u1, &f).unwrap();
        let up = upsample_spectral(&basis, &u1, &down).unwrap();
        let kernel = Array1::from_iter((0..8).map(|i| if i < 4 { 1.0 } else { 0.0 }));
        let low = basis.apply_filter(&kernel, &up).unwrap();

        // Dense oracle: U diag(k) U^T U_up S_u U1^T U1 S_d U^T f.
        let spec = FoldSpec::new(8, 2, Parity::Even).unwrap();
        let s = spec.fold_matrix();
        let dense = basis
            .u()
            .dot(&Array2::from_diag(&kernel))
            .dot(&basis.u().t())
            .dot(basis.u())
            .dot(&s.t())
            .dot(&s)
            .dot(&basis.u().t())
            .dot(f.values());
        for i in 0..8 {
            assert_abs_diff_eq!(low.values()[i], dense[i], epsilon = 1e-12);
            assert_abs_diff_eq!(low.values()[i], f.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_reduced_basis_matches_plain_fold() {
        let g = Graph::path(8).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::CombinatorialLaplacian).unwrap();
        let f = GraphSignal::new((0..8).map(|i| (0.3 * i as f64).sin()).collect::<Vec<_>>());
        let down = downsample_spectral(&basis, &Array2::eye(4), &f).unwrap();
        let spec = FoldSpec::new(8, 2, Parity::Even).unwrap();
        let expected = spec
            .fold_down(basis.gft(&f).unwrap().values().view())
            .unwrap();
        assert_eq!(down.values().to_vec(), expected.to_vec());
    }

    #[test]
    fn dc_signal_downsamples_to_dc() {
        let g = Graph::path(8).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::CombinatorialLaplacian).unwrap();
        let f = GraphSignal::new(basis.u().column(0).to_owned());
        let down = downsample_spectral(&basis, &Array2::eye(4), &f).unwrap();
        assert_abs_diff_eq!(down.values()[0].abs(), 1.0, epsilon = 1e-10);
        for i in 1..4 {
            assert_abs_diff_eq!(down.values()[i], 0.0, epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn fold_and_unfold_are_adjoint(
            x in proptest::collection::vec(-10.0f64..10.0, 16),
            y in proptest::collection::vec(-10.0f64..10.0, 4),
        ) {
            for parity in [Parity::Even, Parity::Odd] {
                let spec = FoldSpec::new(16, 4, parity).unwrap();
                let xa = Array1::from(x.clone());
                let ya = Array1::from(y.clone());
                let lhs: f64 = spec
                    .fold_down(xa.view())
                    .unwrap()
                    .iter()
                    .zip(ya.iter())
                    .map(|(a, b)| a * b)
                    .sum();
                let rhs: f64 = xa
                    .iter()
                    .zip(spec.unfold_up(ya.view()).unwrap().iter())
                    .map(|(a, b)| a * b)
                    .sum();
                prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            }
        }
    }
}
