//! Exhaustive enumeration over binary allocations; the verification oracle
//! for the threshold rule and the LP.

use crate::error::{Error, Result};
use crate::model::{show_gain, Allocation, ConstraintSet, GapKind, ModelParams, Population};

pub const DEFAULT_ENUMERATION_CAP: usize = 22;

/// Best binary allocation whose active gaps are all within
/// `constraints.tolerance`. Ties go to the lexicographically smallest
/// decision vector (user 0 most significant).
pub fn best_binary(
    pop: &Population,
    params: &ModelParams,
    constraints: &ConstraintSet,
    cap: usize,
) -> Result<Allocation> {
    let n = pop.len();
    if n > cap || n >= usize::BITS as usize {
        return Err(Error::PopulationTooLarge { n, cap });
    }
    let gains: Vec<f64> = pop.users().iter().map(|u| show_gain(u, params)).collect();
    let rows: Vec<Vec<f64>> = constraints
        .active()
        .map(|kind: GapKind| kind.row(pop))
        .collect::<Result<_>>()?;
    let tol = constraints.tolerance;

    let mut gaps = vec![0.0; rows.len()];
    let mut best: Option<(u64, f64)> = None;
    for mask in 0u64..(1u64 << n) {
        let shown = |i: usize| mask >> (n - 1 - i) & 1 == 1;
        gaps.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        for i in (0..n).filter(|&i| shown(i)) {
            value += gains[i];
            for (g, row) in gaps.iter_mut().zip(&rows) {
                *g += row[i];
            }
        }
        if gaps.iter().any(|g| g.abs() > tol) {
            continue;
        }
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((mask, value));
        }
    }
    let (mask, _) = best.ok_or(Error::NoFeasibleBinary { tolerance: tol })?;
    let bits: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
    Ok(Allocation::from_bits(&bits))
}
