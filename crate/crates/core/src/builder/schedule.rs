use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Measured ancilla bits `c_1 … c_{N−1}` of one measurement step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Outcome(Vec<bool>);

impl Outcome {
    /// `bits[0]` is `c_1`.
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Outcome(bits)
    }

    /// The `index`-th of all `2^len` outcomes, with `c_i` = bit `i − 1`.
    pub fn from_index(index: usize, len: usize) -> Self {
        Outcome((0..len).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `c_i`, 1-based.
    pub fn bit(&self, i: usize) -> bool {
        self.0[i - 1]
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

/// Ket notation `|c_{N−1} … c_1⟩`: the rightmost character is `c_1`.
impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self
            .0
            .iter()
            .rev()
            .map(|b| if *b { '1' } else { '0' })
            .collect();
        write!(f, "|{s}⟩")
    }
}

impl FromStr for Outcome {
    type Err = Error;

    /// Accepts `|011⟩`, `|011>` or bare `011`, rightmost character `c_1`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('⟩')
            .trim_end_matches('>');
        body.chars()
            .rev()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidArgument(format!("bad outcome `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Outcome)
    }
}

/// Which particles receive the phase correction after one measurement step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionSchedule {
    pub outcome: Outcome,
    /// Particle indices (1-based, ascending).
    pub corrected_particles: Vec<usize>,
    /// True when the complementary set was corrected, leaving the state
    /// antisymmetric up to an overall minus sign.
    pub sign_flipped_globally: bool,
}

/// Corrections for step `n` (the `n`-th particle joins): with at most
/// `⌊n/2⌋` ones, correct every `p_i` with `c_i = 1`; otherwise correct every
/// `p_i` with `c_i = 0` and `p_n`. A weight of exactly `⌊n/2⌋` takes the
/// first branch.
pub fn schedule_corrections(outcome: &Outcome, n: usize) -> Result<CorrectionSchedule> {
    if n < 2 || outcome.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "outcome {outcome} has {} bits; step {n} needs {}",
            outcome.len(),
            n.saturating_sub(1)
        )));
    }
    let flip = outcome.weight() > n / 2;
    let mut corrected: Vec<usize> = (1..n).filter(|&i| outcome.bit(i) != flip).collect();
    if flip {
        corrected.push(n);
    }
    Ok(CorrectionSchedule {
        outcome: outcome.clone(),
        corrected_particles: corrected,
        sign_flipped_globally: flip,
    })
}
