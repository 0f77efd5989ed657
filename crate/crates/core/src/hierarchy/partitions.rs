use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::MAX_DERIVATIVE_ORDER;

/// One term of `Delta_s`: exponents `(i_1, ..., i_s)` with `sum_k k i_k = s`,
/// standing for `D_1^{i_1} ... D_s^{i_s} / (i_1! ... i_s!)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorWord {
    exponents: Vec<usize>,
    denominator: u64,
}

impl OperatorWord {
    fn new(exponents: Vec<usize>) -> Self {
        let denominator = exponents
            .iter()
            .map(|&i| (1..=i as u64).product::<u64>())
            .product();
        OperatorWord {
            exponents,
            denominator,
        }
    }

    /// `exponents()[k - 1] = i_k`.
    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    /// `1 / (i_1! ... i_s!)`.
    pub fn weight(&self) -> f64 {
        1.0 / self.denominator as f64
    }

    pub fn weight_denominator(&self) -> u64 {
        self.denominator
    }

    pub fn order(&self) -> usize {
        self.exponents
            .iter()
            .enumerate()
            .map(|(k, &i)| (k + 1) * i)
            .sum()
    }

    /// Operator indices `k` repeated `i_k` times, ascending.
    pub fn operator_indices(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| std::iter::repeat_n(k + 1, i))
            .collect()
    }
}

/// Every word of `Delta_s`, one per integer partition of `s`. `s = 0` gives
/// the single empty word.
pub fn weighted_partitions(s: usize) -> Result<Vec<OperatorWord>> {
    if s > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderTooHigh {
            order: s,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let mut out = Vec::new();
    let mut exps = vec![0; s];
    fill(s, s, &mut exps, &mut out);
    Ok(out)
}

/// Distributes `remaining` over parts of size at most `largest`.
fn fill(remaining: usize, largest: usize, exps: &mut Vec<usize>, out: &mut Vec<OperatorWord>) {
    if remaining == 0 {
        out.push(OperatorWord::new(exps.clone()));
        return;
    }
    if largest == 0 {
        return;
    }
    for count in (0..=remaining / largest).rev() {
        exps[largest - 1] = count;
        fill(remaining - count * largest, largest - 1, exps, out);
    }
    exps[largest - 1] = 0;
}
