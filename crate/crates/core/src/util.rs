//! Small numeric helpers.

/// Compensated (Neumaier) summation; grid reductions run over up to N^3
/// points and plain accumulation would eat several digits at 64^3.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean of a slice using compensated summation.
pub(crate) fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // 1 + 1e16 - 1e16 should be 1, naive order-dependent sums lose it
        let vals = [1.0, 1e16, -1e16];
        assert_eq!(compensated_sum(vals.iter().copied()), 1.0);
    }

    #[test]
    fn mean_of_constant() {
        let vals = vec![0.3; 1000];
        assert!((mean(&vals) - 0.3).abs() < 1e-15);
    }
}
