//! Estimate-and-prepare: measure all `N` copies jointly, send the estimate
//! classically and let the receiver prepare the guessed state.

use crate::{Error, Result};

/// Optimal average fidelity `(N + 1)/(N + 2)` for `N` copies; independent of the channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationResult {
    pub n: usize,
    pub fidelity: f64,
}

impl EstimationResult {
    /// `(N + 1, N + 2)`
    pub fn as_fraction(&self) -> (u64, u64) {
        (self.n as u64 + 1, self.n as u64 + 2)
    }
}

pub fn estimation_fidelity(n: usize) -> Result<EstimationResult> {
    if n == 0 {
        return Err(Error::input("estimation needs at least one copy"));
    }
    let (num, den) = (n as f64 + 1.0, n as f64 + 2.0);
    Ok(EstimationResult {
        n,
        fidelity: num / den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(estimation_fidelity(1).unwrap().fidelity, 2.0 / 3.0);
        let nine = estimation_fidelity(9).unwrap();
        assert_eq!(nine.fidelity, 10.0 / 11.0);
        assert_eq!(nine.as_fraction(), (10, 11));
        assert!(estimation_fidelity(1_000_000_000).unwrap().fidelity < 1.0);
        assert!(estimation_fidelity(0).is_err());
    }

    #[test]
    fn strictly_increasing_and_bounded() {
        let mut prev = estimation_fidelity(1).unwrap().fidelity;
        for n in 2..=1_000_000 {
            let f = estimation_fidelity(n).unwrap().fidelity;
            assert!(f > prev, "n = {n}");
            assert!((2.0 / 3.0..1.0).contains(&f));
            prev = f;
        }
    }
}
