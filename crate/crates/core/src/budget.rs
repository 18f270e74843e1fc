//! Cap on the number of cells any run may allocate.

use crate::error::{Error, Result};

/// Environment variable overriding [`DEFAULT_CELL_BUDGET`].
pub const CELL_BUDGET_ENV: &str = "IFS_LAB_CELL_BUDGET";

pub const DEFAULT_CELL_BUDGET: usize = 1 << 20;

/// Current budget; unparsable values fall back to the default.
pub fn cell_budget() -> usize {
    std::env::var(CELL_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CELL_BUDGET)
}

/// `n^m` as an exact integer (saturating).
pub fn cell_count(n: usize, m: usize) -> u128 {
    let mut c: u128 = 1;
    for _ in 0..m {
        c = c.saturating_mul(n as u128);
    }
    c
}

/// Ensures a single depth-`m` vector of `n^m` cells fits the budget.
pub fn check_cells(n: usize, m: usize) -> Result<usize> {
    check_cells_with(n, m, cell_budget())
}

pub fn check_cells_with(n: usize, m: usize, budget: usize) -> Result<usize> {
    let cells = cell_count(n, m);
    if cells > budget as u128 {
        return Err(Error::DepthOverflow { cells, budget });
    }
    Ok(cells as usize)
}

/// Cells held by a run that works at every depth up to `m_max` and one
/// level below it: `sum_{k=0}^{m_max+1} n^k`.
pub fn run_cells(n: usize, m_max: usize) -> u128 {
    (0..=m_max + 1).fold(0u128, |acc, k| acc.saturating_add(cell_count(n, k)))
}

pub fn check_run(n: usize, m_max: usize) -> Result<()> {
    let budget = cell_budget();
    let cells = run_cells(n, m_max);
    if cells > budget as u128 {
        return Err(Error::DepthOverflow { cells, budget });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(cell_count(4, 3), 64);
        assert_eq!(run_cells(4, 1), 1 + 4 + 16);
        assert!(run_cells(4, 9) > DEFAULT_CELL_BUDGET as u128);
        assert!(run_cells(4, 8) <= DEFAULT_CELL_BUDGET as u128);
        assert!(matches!(
            check_cells_with(4, 11, 1 << 20),
            Err(Error::DepthOverflow { .. })
        ));
        assert_eq!(check_cells_with(2, 3, 8), Ok(8));
    }
}
