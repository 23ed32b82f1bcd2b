//! Text formats: signals, coefficients, kernels, and plot data.
//!
//! All floats are printed with 17 significant digits (`{:.16e}`) so files
//! round-trip to the exact same bits. Lines starting with `#` are comments.

use sgfb_core::ndarray::{Array1, Array2};

use sgfb_core::bank::SubbandCoefficients;
use sgfb_core::design::KernelSet;
use sgfb_core::spectral::GraphSignal;
use sgfb_core::Error;

use crate::CliResult;

fn validation(msg: String) -> crate::CliError {
    Error::Validation(msg).into()
}

/// One value per line with a `# n=<N>` header.
pub fn render_values(values: &Array1<f64>) -> String {
    let mut out = format!("# n={}\n", values.len());
    for v in values {
        out.push_str(&format!("{v:.16e}\n"));
    }
    out
}

pub fn parse_signal(text: &str) -> CliResult<GraphSignal> {
    let mut declared: Option<usize> = None;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("n=") {
                declared = n.trim().parse().ok();
            }
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            validation(format!(
                "signal file line {}: `{line}` is not a number",
                lineno + 1
            ))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(validation("signal file contains no values".into()));
    }
    if let Some(n) = declared {
        if n != values.len() {
            return Err(validation(format!(
                "signal file declares n={n} but contains {} values",
                values.len()
            )));
        }
    }
    Ok(GraphSignal::new(values))
}

/// `channel,index,value` rows, channel-major.
pub fn render_coeffs(coeffs: &SubbandCoefficients) -> String {
    let mut out = format!(
        "# channels={} block={}\n",
        coeffs.m_channels(),
        coeffs.block_len()
    );
    for (m, channel) in coeffs.channels().iter().enumerate() {
        for (i, v) in channel.iter().enumerate() {
            out.push_str(&format!("{m},{i},{v:.16e}\n"));
        }
    }
    out
}

pub fn parse_coeffs(text: &str) -> CliResult<SubbandCoefficients> {
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || {
            validation(format!(
                "coefficient file line {}: expected `channel,index,value`, got `{line}`",
                lineno + 1
            ))
        };
        let channel: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        let index: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        let value: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        rows.push((channel, index, value));
    }
    if rows.is_empty() {
        return Err(validation("coefficient file contains no rows".into()));
    }
    let m = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let block = rows.iter().map(|r| r.1).max().unwrap() + 1;
    if rows.len() != m * block {
        return Err(validation(format!(
            "coefficient file has {} rows but implies {m} channels × {block} entries",
            rows.len()
        )));
    }
    let mut channels = vec![Array1::from_elem(block, f64::NAN); m];
    for (channel, index, value) in rows {
        let slot = &mut channels[channel][index];
        if !slot.is_nan() {
            return Err(validation(format!(
                "coefficient file repeats entry ({channel},{index})"
            )));
        }
        *slot = value;
    }
    if channels.iter().any(|c| c.iter().any(|v| v.is_nan())) {
        return Err(validation(
            "coefficient file is missing entries for some (channel, index) pairs".into(),
        ));
    }
    Ok(SubbandCoefficients::new(channels)?)
}

/// One comma-separated row of length N per channel.
pub fn render_kernels(kernels: &KernelSet) -> String {
    let mut out = format!("# channels={} n={}\n", kernels.m_channels(), kernels.n());
    for m in 0..kernels.m_channels() {
        let row: Vec<String> = kernels
            .response(m)
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_kernels(text: &str) -> CliResult<KernelSet> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| {
            validation(format!(
                "kernel file line {}: row contains a non-numeric entry",
                lineno + 1
            ))
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(validation("kernel file contains no rows".into()));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(validation("kernel file rows have unequal lengths".into()));
    }
    let m = rows.len();
    let mut responses = Array2::zeros((m, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            responses[[i, j]] = v;
        }
    }
    Ok(KernelSet::from_responses(responses)?)
}

/// Plot-ready table: `lambda,h0,…,h{M-1}` header, one row per eigenvalue.
pub fn render_plot(lambdas: &Array1<f64>, kernels: &KernelSet) -> String {
    let m = kernels.m_channels();
    let mut out = String::from("lambda");
    for ch in 0..m {
        out.push_str(&format!(",h{ch}"));
    }
    out.push('\n');
    for (i, &lambda) in lambdas.iter().enumerate() {
        out.push_str(&format!("{lambda:.16e}"));
        for ch in 0..m {
            out.push_str(&format!(",{:.16e}", kernels.responses()[[ch, i]]));
        }
        out.push('\n');
    }
    out
}
