//! Single-output dense layer with linear activation: `y = w · v + b`.

use rand::Rng;

use super::{shape_error, NnError};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub w: Vec<f64>,
    pub b: f64,
}

impl DenseParams {
    pub fn zeros(features: usize) -> Self {
        DenseParams {
            w: vec![0.0; features],
            b: 0.0,
        }
    }

    pub fn glorot<R: Rng>(features: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (features + 1) as f64).sqrt();
        DenseParams {
            w: (0..features).map(|_| rng.random_range(-bound..bound)).collect(),
            b: 0.0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + 1
    }
}

pub fn dense_forward(v: &[f64], p: &DenseParams) -> Result<f64, NnError> {
    if v.len() != p.w.len() {
        return Err(shape_error(
            "dense_forward",
            p.w.len().to_string(),
            v.len().to_string(),
        ));
    }
    Ok(p.w.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + p.b)
}

/// Gradients of `y = w · v + b` given ∂loss/∂y: returns (∂w, ∂b) packed as
/// `DenseParams` plus ∂v.
pub fn dense_backward(
    v: &[f64],
    p: &DenseParams,
    dy: f64,
) -> Result<(DenseParams, Vec<f64>), NnError> {
    if v.len() != p.w.len() {
        return Err(shape_error(
            "dense_backward",
            p.w.len().to_string(),
            v.len().to_string(),
        ));
    }
    let dw = v.iter().map(|x| dy * x).collect();
    let dv = p.w.iter().map(|w| dy * w).collect();
    Ok((DenseParams { w: dw, b: dy }, dv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_output_bias() {
        let p = DenseParams {
            w: vec![0.0; 3],
            b: 5.0,
        };
        assert_eq!(dense_forward(&[7.0, -2.0, 0.1], &p).unwrap(), 5.0);
    }

    #[test]
    fn unit_weight_picks_component() {
        let p = DenseParams {
            w: vec![1.0, 0.0, 0.0],
            b: 0.25,
        };
        assert_eq!(dense_forward(&[1.0, 0.0, 0.0], &p).unwrap(), 1.25);
    }

    #[test]
    fn backward_matches_definition() {
        let p = DenseParams {
            w: vec![2.0, -1.0],
            b: 0.5,
        };
        let (dp, dv) = dense_backward(&[3.0, 4.0], &p, 2.0).unwrap();
        assert_eq!(dp.w, [6.0, 8.0]);
        assert_eq!(dp.b, 2.0);
        assert_eq!(dv, [4.0, -2.0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = DenseParams::zeros(2);
        assert!(dense_forward(&[1.0], &p).is_err());
        assert!(dense_backward(&[1.0, 2.0, 3.0], &p, 1.0).is_err());
    }
}
