//! Finite-difference gradient checking.
//!
//! Central differences `(f(θ+ε) - f(θ-ε)) / 2ε` per parameter, compared
//! against analytic gradients block by block. Differences below the absolute
//! floor count as exact; everything else is scored by relative error
//! `|a - n| / max(|a|, |n|)`.

use std::ops::Range;

/// Named slice of the flat parameter vector.
#[derive(Debug, Clone)]
pub struct ParamBlock {
    pub name: String,
    pub range: Range<usize>,
}

impl ParamBlock {
    pub fn new(name: impl Into<String>, range: Range<usize>) -> Self {
        ParamBlock {
            name: name.into(),
            range,
        }
    }
}

/// Worst relative error observed per parameter block.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub blocks: Vec<(String, f64)>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|(_, e)| *e).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error() <= tol
    }
}

impl std::fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, err) in &self.blocks {
            writeln!(f, "{name}: max relative error {err:.3e}")?;
        }
        Ok(())
    }
}

/// Numeric gradient of `f` at `params` by central differences.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, params: &[f64], eps: f64) -> Vec<f64> {
    let mut theta = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let original = theta[k];
        theta[k] = original + eps;
        let plus = f(&theta);
        theta[k] = original - eps;
        let minus = f(&theta);
        theta[k] = original;
        grad.push((plus - minus) / (2.0 * eps));
    }
    grad
}

fn rel_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff <= floor {
        0.0
    } else {
        diff / analytic.abs().max(numeric.abs())
    }
}

/// Compare analytic gradients against central differences of `f`.
///
/// `blocks` names contiguous ranges of the flat parameter vector; the
/// report carries the worst relative error per block.
pub fn grad_check<F: Fn(&[f64]) -> f64>(
    f: F,
    params: &[f64],
    analytic: &[f64],
    blocks: &[ParamBlock],
    eps: f64,
    floor: f64,
) -> GradCheckReport {
    assert_eq!(params.len(), analytic.len(), "gradient length");
    let numeric = central_difference(f, params, eps);
    let blocks = blocks
        .iter()
        .map(|block| {
            let worst = block
                .range
                .clone()
                .map(|k| rel_error(analytic[k], numeric[k], floor))
                .fold(0.0, f64::max);
            (block.name.clone(), worst)
        })
        .collect();
    GradCheckReport { blocks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_checks_out() {
        // f(θ) = Σ θ_k², ∇f = 2θ
        let params = [0.5, -1.5, 2.0];
        let f = |t: &[f64]| t.iter().map(|v| v * v).sum::<f64>();
        let analytic: Vec<f64> = params.iter().map(|v| 2.0 * v).collect();
        let blocks = [ParamBlock::new("theta", 0..3)];
        let report = grad_check(f, &params, &analytic, &blocks, 1e-4, 1e-6);
        assert!(report.passes(1e-4), "{report}");
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let params = [1.0, 2.0];
        let f = |t: &[f64]| t.iter().map(|v| v * v).sum::<f64>();
        let wrong = [2.0, 3.0]; // second component should be 4
        let blocks = [ParamBlock::new("theta", 0..2)];
        let report = grad_check(f, &params, &wrong, &blocks, 1e-4, 1e-6);
        assert!(!report.passes(1e-4));
    }

    #[test]
    fn tiny_differences_pass_through_floor() {
        let params = [0.0];
        let f = |_: &[f64]| 0.0;
        let analytic = [5e-7];
        let blocks = [ParamBlock::new("theta", 0..1)];
        let report = grad_check(f, &params, &analytic, &blocks, 1e-4, 1e-6);
        assert_eq!(report.max_rel_error(), 0.0);
    }
}
