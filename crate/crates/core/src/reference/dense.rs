use super::InferenceResult;
use crate::artifact::{validate_artifact, DeploymentArtifact, ValidationLevel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseMode {
    /// Dequantized weights `s * q` on intensities scaled to [0, 1].
    Fp32,
    /// Integer weights on raw intensities, exact i64 accumulation.
    Int8,
}

/// Dense grouped-neuron classifier over the artifact's `WGHT` block. A class
/// scores the maximum activation in its group; the highest score wins, ties
/// to the lowest class.
#[derive(Debug, Clone)]
pub struct DenseBaseline<'a, T> {
    artifact: &'a DeploymentArtifact,
    dequantized: Vec<T>,
}

impl<'a, T: Scalar> DenseBaseline<'a, T> {
    pub fn new(artifact: &'a DeploymentArtifact) -> Result<Self> {
        let report = validate_artifact(artifact, ValidationLevel::Encodable);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        let s = T::of(artifact.weights.scale as f64);
        let dequantized = artifact.weights.values.iter().map(|&q| s * T::of(q as f64)).collect();
        Ok(DenseBaseline { artifact, dequantized })
    }

    fn check_len(&self, image: &[u8]) -> Result<()> {
        if image.len() != self.artifact.input_count() {
            return Err(Error::contract(format!(
                "image has {} values, artifact expects {}",
                image.len(),
                self.artifact.input_count()
            )));
        }
        Ok(())
    }

    /// Per-output activations `W x` with `x = intensity / 255`.
    pub fn activations_fp32(&self, image: &[u8]) -> Result<Vec<T>> {
        self.check_len(image)?;
        let cols = self.artifact.weights.cols as usize;
        let mut y = vec![T::zero(); cols];
        let norm = T::of(255.0);
        for (i, &p) in image.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let x = T::of(p as f64) / norm;
            for (acc, &w) in y.iter_mut().zip(&self.dequantized[i * cols..(i + 1) * cols]) {
                *acc += w * x;
            }
        }
        Ok(y)
    }

    pub fn activations_int8(&self, image: &[u8]) -> Result<Vec<i64>> {
        self.check_len(image)?;
        let w = &self.artifact.weights;
        let mut y = vec![0i64; w.cols as usize];
        for (i, &p) in image.iter().enumerate() {
            if p == 0 {
                continue;
            }
            for (acc, &q) in y.iter_mut().zip(w.row(i)) {
                *acc += q as i64 * p as i64;
            }
        }
        Ok(y)
    }

    pub fn class_scores_fp32(&self, image: &[u8]) -> Result<Vec<T>> {
        let y = self.activations_fp32(image)?;
        Ok(self.group_max(&y, T::neg_infinity()))
    }

    pub fn class_scores_int8(&self, image: &[u8]) -> Result<Vec<i64>> {
        let y = self.activations_int8(image)?;
        Ok(self.group_max(&y, i64::MIN))
    }

    fn group_max<V: PartialOrd + Copy>(&self, y: &[V], floor: V) -> Vec<V> {
        let d = &self.artifact.decode;
        let first = self.artifact.header.input_count;
        (0..d.num_classes)
            .map(|c| {
                let r = d.class_range(c);
                y[(r.start - first) as usize..(r.end - first) as usize].iter().fold(floor, |m, &v| if v > m { v } else { m })
            })
            .collect()
    }

    pub fn run(&self, image: &[u8], mode: DenseMode) -> Result<InferenceResult> {
        let label = match mode {
            DenseMode::Fp32 => argmax(&self.class_scores_fp32(image)?),
            DenseMode::Int8 => argmax(&self.class_scores_int8(image)?),
        };
        Ok(InferenceResult {
            label,
            class_first_spikes: vec![None; self.artifact.decode.num_classes as usize],
            no_spike: false,
            output_spikes: Vec::new(),
            counters: None,
        })
    }
}

/// Index of the first maximal element.
fn argmax<V: PartialOrd + Copy>(scores: &[V]) -> u32 {
    let mut best = 0;
    for (i, v) in scores.iter().enumerate() {
        if *v > scores[best] {
            best = i;
        }
    }
    best as u32
}

/// One-shot dense baseline in single precision.
pub fn run_dense_baseline(artifact: &DeploymentArtifact, image: &[u8], mode: DenseMode) -> Result<InferenceResult> {
    DenseBaseline::<f32>::new(artifact)?.run(image, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::testing::artifact_from_parts;

    #[test]
    fn single_active_score_wins() {
        // 3 pixels, 3 classes of 1: class 2 listens to pixel 1 only.
        let a = artifact_from_parts(3, 3, 1, vec![0, 0, 0, 0, 0, 50, 0, 0, 0], vec![1, 1, 1], 8);
        for mode in [DenseMode::Fp32, DenseMode::Int8] {
            assert_eq!(run_dense_baseline(&a, &[0, 200, 0], mode).unwrap().label, 2);
        }
    }

    #[test]
    fn zero_image_ties_to_class_zero() {
        let a = artifact_from_parts(2, 2, 2, vec![1, -2, 3, 4, 5, -6, 7, 8], vec![1; 4], 8);
        let d = DenseBaseline::<f64>::new(&a).unwrap();
        assert_eq!(d.class_scores_int8(&[0, 0]).unwrap(), vec![0, 0]);
        assert_eq!(d.run(&[0, 0], DenseMode::Fp32).unwrap().label, 0);
        assert!(!d.run(&[0, 0], DenseMode::Int8).unwrap().no_spike);
    }

    #[test]
    fn group_score_is_max_not_sum() {
        // class 0 = outputs {0,1} with activations {5, 5}; class 1 = {2,3} with {9, -20}.
        let a = artifact_from_parts(1, 2, 2, vec![5, 5, 9, -20], vec![1; 4], 8);
        let d = DenseBaseline::<f32>::new(&a).unwrap();
        assert_eq!(d.class_scores_int8(&[1]).unwrap(), vec![5, 9]);
        assert_eq!(d.run(&[1], DenseMode::Int8).unwrap().label, 1);
    }

    #[test]
    fn wrong_length_is_contract_error() {
        let a = artifact_from_parts(2, 1, 1, vec![1, 1], vec![1], 8);
        assert!(matches!(run_dense_baseline(&a, &[1], DenseMode::Fp32), Err(Error::Contract(_))));
    }
}
