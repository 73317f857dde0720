//! Geometric checkpoint grids and the finite-horizon limsup proxy.

use crate::error::{Error, Result};

/// Checkpoints `start, ⌈start·r⌉, …` up to and including `end`.
pub fn geometric_grid(start: u64, ratio: f64, end: u64) -> Result<Vec<u64>> {
    if start == 0 || end == 0 {
        return Err(Error::Invalid("checkpoint grid must start at 1 or above".into()));
    }
    if !(ratio > 1.0) {
        return Err(Error::Invalid(format!("checkpoint ratio {ratio} must exceed 1")));
    }
    let mut out = Vec::new();
    let mut x = start as f64;
    let mut last = 0u64;
    while (x as u64) < end {
        let n = x.ceil() as u64;
        if n > last && n < end {
            out.push(n);
            last = n;
        }
        x *= ratio;
    }
    out.push(end);
    Ok(out)
}

/// Default grid: ratio 1.3 starting at 10 (or at `end` if smaller).
pub fn default_grid(end: u64) -> Vec<u64> {
    geometric_grid(10.min(end.max(1)), 1.3, end.max(1)).expect("valid parameters")
}

/// Index where the last third of a grid of length `len` begins.
pub fn tail_start(len: usize) -> usize {
    len - len.div_ceil(3)
}

/// Maximum over the last third: the finite-horizon stand-in for `limsup`.
pub fn limsup_tail(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values[tail_start(values.len())..].iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Validates a user grid: strictly increasing, within `[1, horizon]`.
pub fn validate_grid(grid: &[u64], horizon: u64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty checkpoint grid".into()));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("checkpoints must be strictly increasing and positive".into()));
    }
    if *grid.last().unwrap() > horizon {
        return Err(Error::HorizonExceeded { requested: *grid.last().unwrap(), horizon });
    }
    Ok(())
}
