//! On-disk eigendecomposition cache.
//!
//! Full symmetric eigendecomposition is the dominant cost of every command,
//! so decompositions are cached keyed by the *content* of the variation
//! operator — regenerating a graph file reuses the cache as long as the
//! operator entries are bit-identical. A cached entry is trusted only if its
//! magic, kind tag, size, and content hash all match and the stored basis
//! still passes orthonormality validation; anything else produces a stderr
//! warning and a silent recompute, never wrong data.
//!
//! Layout (all integers and floats little-endian): `"SGFB1"` (5 bytes),
//! kind tag (1 byte), N (u64), operator hash (u64), N eigenvalues (f64),
//! N² eigenvector entries column-major (f64).

use std::path::{Path, PathBuf};

use sgfb_core::ndarray::{Array1, Array2, ShapeBuilder};

use sgfb_core::graph::{Graph, VariationKind};
use sgfb_core::spectral::SpectralBasis;

use crate::CliResult;

const MAGIC: &[u8; 5] = b"SGFB1";

/// `SGFB_CACHE_DIR` wins over the `--cache` flag; neither means no caching.
pub fn resolve_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    std::env::var_os("SGFB_CACHE_DIR")
        .map(PathBuf::from)
        .or(flag)
}

pub fn load_or_compute(
    graph: &Graph,
    kind: VariationKind,
    dir: Option<&Path>,
) -> CliResult<SpectralBasis> {
    let Some(dir) = dir else {
        return Ok(SpectralBasis::new(graph, kind)?);
    };
    let operator = graph.operator(kind)?;
    let hash = fnv1a(operator.iter());
    let n = graph.n();
    let path = dir.join(format!("{kind}-{n}-{hash:016x}.eig"));
    if let Some(basis) = try_load(&path, kind, n, hash) {
        return Ok(basis);
    }
    let basis = SpectralBasis::new(graph, kind)?;
    if let Err(err) = store(&path, &basis, hash) {
        eprintln!(
            "warning: could not write eigendecomposition cache {}: {err}",
            path.display()
        );
    }
    Ok(basis)
}

/// FNV-1a over the little-endian bytes of the operator entries in logical
/// row-major order.
fn fnv1a<'a>(values: impl Iterator<Item = &'a f64>) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for byte in v.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

fn kind_tag(kind: VariationKind) -> u8 {
    match kind {
        VariationKind::CombinatorialLaplacian => 0,
        VariationKind::NormalizedLaplacian => 1,
        VariationKind::Adjacency => 2,
    }
}

fn try_load(path: &Path, kind: VariationKind, n: usize, hash: u64) -> Option<SpectralBasis> {
    let bytes = std::fs::read(path).ok()?;
    match parse(&bytes, kind, n, hash) {
        Ok(basis) => Some(basis),
        Err(msg) => {
            eprintln!(
                "warning: ignoring eigendecomposition cache {}: {msg}",
                path.display()
            );
            None
        }
    }
}

fn parse(bytes: &[u8], kind: VariationKind, n: usize, hash: u64) -> Result<SpectralBasis, String> {
    let expected_len = MAGIC.len() + 1 + 8 + 8 + 8 * n + 8 * n * n;
    if bytes.len() != expected_len {
        return Err(format!(
            "size {} does not match expected {expected_len}",
            bytes.len()
        ));
    }
    if &bytes[..5] != MAGIC {
        return Err("bad magic".into());
    }
    if bytes[5] != kind_tag(kind) {
        return Err("variation kind tag mismatch".into());
    }
    let mut cursor = 6;
    let mut read_u64 = |bytes: &[u8]| {
        let v = u64::from_le_bytes(bytes[cursor..cursor + 8].try_into().unwrap());
        cursor += 8;
        v
    };
    if read_u64(bytes) != n as u64 {
        return Err("graph size mismatch".into());
    }
    if read_u64(bytes) != hash {
        return Err("operator content hash mismatch".into());
    }
    let mut floats = bytes[cursor..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let lambdas = Array1::from_iter(floats.by_ref().take(n));
    let u = Array2::from_shape_vec((n, n).f(), floats.collect())
        .map_err(|e| format!("eigenvector block malformed: {e}"))?;
    SpectralBasis::from_parts(u, lambdas, kind).map_err(|e| format!("stored basis invalid: {e}"))
}

fn store(path: &Path, basis: &SpectralBasis, hash: u64) -> std::io::Result<()> {
    let dir = path.parent().expect("cache path has a directory");
    std::fs::create_dir_all(dir)?;
    let n = basis.n();
    let mut bytes = Vec::with_capacity(MAGIC.len() + 1 + 16 + 8 * n + 8 * n * n);
    bytes.extend_from_slice(MAGIC);
    bytes.push(kind_tag(basis.kind()));
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    bytes.extend_from_slice(&hash.to_le_bytes());
    for v in basis.lambdas() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for column in basis.u().columns() {
        for v in column {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    // Write-then-rename so concurrent readers never observe a torn file.
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, &bytes)?;
    std::fs::rename(&tmp, path)
}
