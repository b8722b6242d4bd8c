use super::NetworkSpec;
use crate::artifact::{QuantizedWeights, ThresholdVector};
use crate::error::{Error, Result};
use crate::scalar::{round_half_away, Scalar};

const QMAX: f64 = 127.0;

/// Symmetric per-layer INT8 quantization of `values`.
///
/// `scale = max|w| / 127`, `q = round(w / scale)` (half away from zero),
/// clamped to ±127. An all-zero layer gets scale 1. Returns the integer
/// values and the scale in `T`.
pub fn quantize_layer<T: Scalar>(values: &[T]) -> Result<(Vec<i8>, T)> {
    if let Some(i) = values.iter().position(|w| !w.is_finite()) {
        return Err(Error::Quantization(format!("weight {i} is not finite")));
    }
    let max_abs = values.iter().fold(T::zero(), |m, w| m.max(w.abs()));
    if max_abs == T::zero() {
        return Ok((vec![0; values.len()], T::one()));
    }
    let qmax = T::of(QMAX);
    // w * 127 / max keeps exact halves exact (w / (max / 127) would not).
    let q = values
        .iter()
        .map(|&w| {
            let r = round_half_away(w * qmax / max_abs).max(-qmax).min(qmax);
            r.to_i8().expect("clamped to i8 range")
        })
        .collect();
    Ok((q, max_abs / qmax))
}

/// Quantizes the linear stage and the thresholds of `net` with one shared
/// scale. Weights come back source-major (`rows = in_dim`).
pub fn quantize<T: Scalar>(net: &NetworkSpec<T>) -> Result<(QuantizedWeights, ThresholdVector)> {
    let linear = net.linear();
    let (q, scale) = quantize_layer(&linear.weights)?;
    let max_abs = linear.weights.iter().fold(T::zero(), |m, w| m.max(w.abs()));

    let (rows, cols) = (linear.in_dim, linear.out_dim);
    let mut values = vec![0i8; rows * cols];
    for o in 0..cols {
        for i in 0..rows {
            values[i * cols + o] = q[o * rows + i];
        }
    }

    let thresholds = net
        .neuron_config
        .thresholds
        .iter()
        .enumerate()
        .map(|(n, &theta)| {
            if !theta.is_finite() {
                return Err(Error::Quantization(format!("threshold {n} is not finite")));
            }
            let units = if max_abs == T::zero() { theta } else { theta * T::of(QMAX) / max_abs };
            let r = round_half_away(units);
            let v = r
                .to_i32()
                .ok_or_else(|| Error::Quantization(format!("threshold {n} ({theta}) overflows i32 at scale {scale}")))?;
            if v <= 0 {
                return Err(Error::Quantization(format!(
                    "threshold {n} ({theta}) quantizes to {v} at scale {scale}"
                )));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;

    let weights = QuantizedWeights {
        values,
        scale: scale.to_f32().unwrap_or(f32::NAN),
        rows: rows as u32,
        cols: cols as u32,
    };
    Ok((weights, ThresholdVector { values: thresholds }))
}
