//! Eigenbasis of a variation operator and the transforms it induces.
//!
//! The decomposition is dense and complete: frequency-domain sampling
//! addresses the whole spectrum by index, so partial (Lanczos-style) spectra
//! are of no use here. Cost is O(N^3); callers that care should cache the
//! result (the CLI does, keyed by operator content).

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

use crate::graph::{Graph, VariationKind};
use crate::{Error, Result};

/// Vertex-domain signal: one value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal(Array1<f64>);

/// Frequency-domain signal: one coefficient per eigenvalue index.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Array1<f64>);

macro_rules! signal_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn new(values: impl Into<Array1<f64>>) -> Self {
                $ty(values.into())
            }

            pub fn values(&self) -> &Array1<f64> {
                &self.0
            }

            pub fn into_values(self) -> Array1<f64> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn norm(&self) -> f64 {
                self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
        }

        impl From<Array1<f64>> for $ty {
            fn from(values: Array1<f64>) -> Self {
                $ty(values)
            }
        }

        impl From<Vec<f64>> for $ty {
            fn from(values: Vec<f64>) -> Self {
                $ty(values.into())
            }
        }
    };
}

signal_impl!(GraphSignal);
signal_impl!(Spectrum);

/// Orthonormal eigenbasis `U` and ascending eigenvalues of a variation
/// operator. Immutable once built; shared freely across threads.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    u: Array2<f64>,
    lambdas: Array1<f64>,
    kind: VariationKind,
}

// Residual tolerances enforced on every constructed basis.
const ORTHO_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;
const EIGEN_MAX_ITER: usize = 50_000;

impl SpectralBasis {
    /// Full symmetric eigendecomposition of `graph`'s variation operator.
    ///
    /// Eigenvalues are sorted ascending for every kind, including adjacency.
    /// Eigenvector signs are fixed deterministically: in each column the entry
    /// of largest magnitude (lowest index on ties) is made non-negative, so
    /// identical inputs produce bit-identical bases across runs.
    pub fn new(graph: &Graph, kind: VariationKind) -> Result<Self> {
        let op = graph.operator(kind)?;
        let n = graph.n();
        let m = DMatrix::from_fn(n, n, |i, j| op[[i, j]]);
        let eigen = SymmetricEigen::try_new(m, f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::Eigen(format!("no convergence for n = {n}")))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));

        let lambdas = Array1::from_iter(order.iter().map(|&k| eigen.eigenvalues[k]));
        let mut u = Array2::zeros((n, n));
        for (col, &k) in order.iter().enumerate() {
            for row in 0..n {
                u[[row, col]] = eigen.eigenvectors[(row, k)];
            }
        }
        apply_sign_convention(&mut u);

        let basis = SpectralBasis { u, lambdas, kind };
        basis.check_orthonormal()?;
        basis.check_residual(&op)?;
        if kind.is_laplacian() && graph.is_connected() {
            if basis.lambdas[0].abs() > 1e-10 {
                return Err(Error::Eigen(format!(
                    "connected Laplacian should have a zero eigenvalue, got {:e}",
                    basis.lambdas[0]
                )));
            }
            if n > 1 && basis.lambdas[1] <= 1e-10 {
                return Err(Error::Eigen(format!(
                    "connected Laplacian should have positive second eigenvalue, got {:e}",
                    basis.lambdas[1]
                )));
            }
        }
        Ok(basis)
    }

    /// Rebuilds a basis from stored components (cache loads, tests).
    /// Orthonormality and eigenvalue ordering are re-validated; the values are
    /// taken as-is otherwise.
    pub fn from_parts(u: Array2<f64>, lambdas: Array1<f64>, kind: VariationKind) -> Result<Self> {
        let n = lambdas.len();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: u.nrows() * u.ncols(),
            });
        }
        if lambdas.windows(2).into_iter().any(|w| w[0] > w[1]) {
            return Err(Error::Validation("eigenvalues not ascending".into()));
        }
        let basis = SpectralBasis { u, lambdas, kind };
        basis.check_orthonormal()?;
        Ok(basis)
    }

    fn check_orthonormal(&self) -> Result<()> {
        let gram = self.u.t().dot(&self.u);
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[[i, j]] - target).abs());
            }
        }
        if worst >= ORTHO_TOL {
            return Err(Error::Eigen(format!(
                "eigenvector matrix not orthonormal: max deviation {worst:e}"
            )));
        }
        Ok(())
    }

    fn check_residual(&self, op: &Array2<f64>) -> Result<()> {
        let lu = op.dot(&self.u);
        let scale = self.lambdas.iter().fold(1.0f64, |acc, &l| acc.max(l.abs()));
        let mut worst = 0.0f64;
        for j in 0..self.n() {
            for i in 0..self.n() {
                worst = worst.max((lu[[i, j]] - self.u[[i, j]] * self.lambdas[j]).abs());
            }
        }
        if worst >= RESIDUAL_TOL * scale {
            return Err(Error::Eigen(format!(
                "eigenpair residual {worst:e} exceeds tolerance"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Eigenvector matrix; column `k` is the eigenvector for `lambdas()[k]`.
    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn lambdas(&self) -> &Array1<f64> {
        &self.lambdas
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas[self.lambdas.len() - 1]
    }

    pub fn kind(&self) -> VariationKind {
        self.kind
    }

    /// Forward transform `Uᵀ f`.
    pub fn gft(&self, signal: &GraphSignal) -> Result<Spectrum> {
        self.check_len(signal.len())?;
        Ok(Spectrum(self.u.t().dot(signal.values())))
    }

    /// Inverse transform `U f̃`.
    pub fn igft(&self, spectrum: &Spectrum) -> Result<GraphSignal> {
        self.check_len(spectrum.len())?;
        Ok(GraphSignal(self.u.dot(spectrum.values())))
    }

    /// `U diag(kernel) Uᵀ f`: pointwise spectral multiplication.
    pub fn apply_filter(&self, kernel: &Array1<f64>, signal: &GraphSignal) -> Result<GraphSignal> {
        self.check_len(kernel.len())?;
        let spectrum = self.gft(signal)?;
        self.igft(&Spectrum(kernel * spectrum.values()))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got,
            });
        }
        Ok(())
    }
}

/// Largest-magnitude entry per column (lowest index on ties) made
/// non-negative.
fn apply_sign_convention(u: &mut Array2<f64>) {
    for mut col in u.columns_mut() {
        let mut best = 0;
        let mut best_abs = col[0].abs();
        for (i, &x) in col.iter().enumerate().skip(1) {
            if x.abs() > best_abs {
                best = i;
                best_abs = x.abs();
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn path_basis(n: usize) -> SpectralBasis {
        SpectralBasis::new(
            &Graph::path(n).unwrap(),
            VariationKind::CombinatorialLaplacian,
        )
        .unwrap()
    }

    fn p16() -> &'static SpectralBasis {
        static BASIS: OnceLock<SpectralBasis> = OnceLock::new();
        BASIS.get_or_init(|| path_basis(16))
    }

    // Closed form for the path-graph Laplacian spectrum.
    fn path_lambda(n: usize, k: usize) -> f64 {
        2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos()
    }

    #[test]
    fn path_spectrum_matches_closed_form() {
        for n in [4usize, 8, 16, 64] {
            let basis = path_basis(n);
            for k in 0..n {
                assert_abs_diff_eq!(basis.lambdas()[k], path_lambda(n, k), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn connected_laplacian_has_constant_ground_mode() {
        let g = Graph::random_sensor(24, 4, 3).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::CombinatorialLaplacian).unwrap();
        assert_abs_diff_eq!(basis.lambdas()[0], 0.0, epsilon = 1e-10);
        let c = basis.u()[[0, 0]];
        assert!(c > 0.0);
        for i in 0..24 {
            assert_abs_diff_eq!(basis.u()[[i, 0]], c, epsilon = 1e-9);
        }
    }

    #[test]
    fn complete_graph_spectrum() {
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in (u + 1)..4 {
                edges.push((u, v, 1.0));
            }
        }
        let g = Graph::new(4, edges).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::CombinatorialLaplacian).unwrap();
        let expected = [0.0, 4.0, 4.0, 4.0];
        for k in 0..4 {
            assert_abs_diff_eq!(basis.lambdas()[k], expected[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn adjacency_eigenvalues_ascend_from_negative() {
        let g = Graph::path(8).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::Adjacency).unwrap();
        assert!(basis.lambdas()[0] < 0.0);
        assert!(basis.lambda_max() > 0.0);
        assert!(basis.lambdas().windows(2).into_iter().all(|w| w[0] <= w[1]));
    }

    #[test]
    fn build_is_bit_reproducible() {
        let g = Graph::random_sensor(32, 4, 11).unwrap();
        for kind in VariationKind::ALL {
            let a = SpectralBasis::new(&g, kind).unwrap();
            let b = SpectralBasis::new(&g, kind).unwrap();
            assert_eq!(a.lambdas().as_slice(), b.lambdas().as_slice());
            assert_eq!(a.u().as_slice(), b.u().as_slice());
        }
    }

    #[test]
    fn constant_signal_concentrates_at_dc() {
        let basis = p16();
        let f = GraphSignal::new(vec![3.0; 16]);
        let s = basis.gft(&f).unwrap();
        assert_abs_diff_eq!(s.values()[0].abs(), 12.0, epsilon = 1e-10); // 3·√16
        for k in 1..16 {
            assert_abs_diff_eq!(s.values()[k], 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn eigenvector_transforms_to_coordinate_vector() {
        let basis = p16();
        let f = GraphSignal::new(basis.u().column(3).to_owned());
        let s = basis.gft(&f).unwrap();
        for k in 0..16 {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(s.values()[k], want, epsilon = 1e-10);
        }
    }

    #[test]
    fn all_ones_kernel_is_identity() {
        let basis = p16();
        let f = GraphSignal::new((0..16).map(|i| (i as f64 * 0.7).cos()).collect::<Vec<_>>());
        let out = basis.apply_filter(&Array1::ones(16), &f).unwrap();
        for i in 0..16 {
            assert_abs_diff_eq!(out.values()[i], f.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn dc_projector_kernel_averages() {
        let basis = p16();
        let f = GraphSignal::new((0..16).map(|i| i as f64).collect::<Vec<_>>());
        let mut kernel = Array1::zeros(16);
        kernel[0] = 1.0;
        let out = basis.apply_filter(&kernel, &f).unwrap();
        let mean = 7.5;
        for i in 0..16 {
            assert_abs_diff_eq!(out.values()[i], mean, epsilon = 1e-10);
        }
    }

    #[test]
    fn filter_matches_dense_matrix_oracle() {
        let g = Graph::random_sensor(16, 3, 5).unwrap();
        let basis = SpectralBasis::new(&g, VariationKind::CombinatorialLaplacian).unwrap();
        let kernel = Array1::from_iter((0..16).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3));
        let f = GraphSignal::new(
            (0..16)
                .map(|i| ((i * 13 % 7) as f64) * 0.25)
                .collect::<Vec<_>>(),
        );

        let dense = basis
            .u()
            .dot(&Array2::from_diag(&kernel))
            .dot(&basis.u().t())
            .dot(f.values());
        let fast = basis.apply_filter(&kernel, &f).unwrap();
        for i in 0..16 {
            assert_abs_diff_eq!(fast.values()[i], dense[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let basis = p16();
        assert!(matches!(
            basis.gft(&GraphSignal::new(vec![0.0; 7])),
            Err(Error::DimensionMismatch {
                expected: 16,
                got: 7
            })
        ));
    }

    #[test]
    fn from_parts_rejects_non_orthonormal() {
        let basis = p16();
        let mut u = basis.u().clone();
        u[[0, 0]] += 1e-3;
        assert!(SpectralBasis::from_parts(
            u,
            basis.lambdas().clone(),
            VariationKind::CombinatorialLaplacian
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(values in proptest::collection::vec(-100.0f64..100.0, 16)) {
            let basis = p16();
            let f = GraphSignal::new(values);
            let s = basis.gft(&f).unwrap();
            let back = basis.igft(&s).unwrap();
            let err: f64 = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            prop_assert!(err < 1e-12 * (1.0 + f.norm()));
            let e_vertex: f64 = f.values().iter().map(|x| x * x).sum();
            let e_freq: f64 = s.values().iter().map(|x| x * x).sum();
            prop_assert!((e_vertex - e_freq).abs() <= 1e-10 * (1.0 + e_vertex));
        }
    }
}
