//! Closed-form resource counts.

use serde::Serialize;

use crate::error::{Error, Result};

/// Comparators in a sorting network for `n` keys padded to `2^m`,
/// `m = ⌈log₂ n⌉`: `2^{m−2}(m² − m + 4) − 1`.
pub fn n_comp(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_comp needs N >= 2, got {n}"
        )));
    }
    let m = u64::from(64 - (n - 1).leading_zeros());
    Ok(((1u64 << m) * (m * m - m + 4)) / 4 - 1)
}

/// Open-controlled `C^ηX` uncompute gates of the deterministic recursion:
/// `N(N−1)/2`.
pub fn n_ctrl(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Particle counts `2..=max_n` where sorting needs at least as many
/// comparators as the recursion needs `C^ηX` gates.
pub fn crossover_set(max_n: u64) -> Vec<u64> {
    (2..=max_n)
        .filter(|&n| n_comp(n).expect("n >= 2") >= n_ctrl(n))
        .collect()
}

/// Sort `split` particles, then add the remaining ones recursively:
/// `(n_comp(split), Σ_{k=split+1..N} (k − 1))`.
pub fn hybrid_cost(n: u64, split: u64) -> Result<(u64, u64)> {
    if split < 2 || split > n {
        return Err(Error::InvalidArgument(format!(
            "split {split} must lie in 2..={n}"
        )));
    }
    Ok((n_comp(split)?, (split + 1..=n).map(|k| k - 1).sum()))
}

/// Expected number of phase corrections over a full measurement-based
/// build: step `n` measures `n − 1` fair bits, and a weight-`k` outcome
/// costs `min(k, n − k)` corrections.
pub fn avg_phase_corrections(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 2, got {n}")));
    }
    let mut total = 0.0;
    for step in 2..=n {
        // Binomial(step − 1, 1/2) probabilities, built iteratively.
        let trials = step - 1;
        let mut p = 0.5f64.powi(trials as i32);
        let mut acc = 0.0;
        for k in 0..=trials {
            acc += p * k.min(step - k) as f64;
            p *= (trials - k) as f64 / (k + 1) as f64;
        }
        total += acc;
    }
    Ok(total)
}

/// Structural counts of the deterministic recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BuilderCounts {
    pub u_blocks: u64,
    pub u_dagger_blocks: u64,
    pub cswaps: u64,
    pub cnx: u64,
}

pub fn builder_counts(n: u64, eta: u64) -> BuilderCounts {
    BuilderCounts {
        u_blocks: n * (n + 1) / 2,
        u_dagger_blocks: n_ctrl(n),
        cswaps: eta * n_ctrl(n),
        cnx: n_ctrl(n),
    }
}

/// One row of the resource table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceRow {
    pub n: u64,
    pub n_comp: u64,
    pub n_ctrl: u64,
    pub ratio: f64,
    pub crossover: bool,
    pub avg_corrections: f64,
    pub avg_corrections_ratio: f64,
}

pub fn resource_row(n: u64) -> Result<ResourceRow> {
    let comp = n_comp(n)?;
    let ctrl = n_ctrl(n);
    let avg = avg_phase_corrections(n)?;
    Ok(ResourceRow {
        n,
        n_comp: comp,
        n_ctrl: ctrl,
        ratio: comp as f64 / ctrl as f64,
        crossover: comp >= ctrl,
        avg_corrections: avg,
        avg_corrections_ratio: avg / ctrl as f64,
    })
}

/// T-gate scaling for antisymmetrizing one ordered integer product state
/// `|r_1 … r_N⟩` with `N_s` single-particle states.
pub const INTEGER_STATE_T_SCALING: &[(&str, &str)] = &[
    ("quadratic sorting-based approach", "O(N^2 log^2 N_s)"),
    (
        "odd-even mergesort on ordered input",
        "O(N log^2 N log N_s)",
    ),
    ("recursive swaps with ancilla uncompute", "O(N^2 log N_s)"),
];

/// T-gate scaling for antisymmetrizing a product of general orbitals.
pub const ORBITAL_STATE_T_SCALING: &[(&str, &str)] = &[
    ("ordered-superposition preparation then sort", "O(N N_s)"),
    (
        "recursive swaps, O(sqrt N_s)-T orbital preparation",
        "O(N^2 sqrt N_s)",
    ),
];
