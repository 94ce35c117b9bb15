//! Wavefront evaluation of the lattice.
//!
//! Node `(i, j)` needs only its west neighbour in row `j` and its south
//! neighbour in row `j − 1`, so every row whose predecessor is strictly
//! ahead of it can advance by one node at the same time. Each wave computes
//! those nodes in parallel and then appends them in row order; the nodes
//! and their inputs are exactly the ones the sequential sweep uses, so the
//! result is bit-identical to it.

use conswave_core::coeffs::CoefficientField;
use conswave_core::goursat::{CharGrid, GridNode, GridRow, Solver};
use conswave_core::Result;
use rayon::prelude::*;

pub fn solve_parallel<F: CoefficientField + ?Sized>(solver: &Solver<'_, F>) -> Result<CharGrid> {
    let lat = &solver.lattice;
    let (nx, ny) = (lat.nx(), lat.ny());
    let mut rows: Vec<GridRow> =
        (0..ny).map(|j| GridRow { start: lat.first_col(j).unwrap_or(0), nodes: Vec::new() }).collect();
    let mut done: Vec<bool> = (0..ny).map(|j| lat.first_col(j).is_none()).collect();
    // Rows at or above a failed row are never needed: the sweep would stop there.
    let mut failed: Option<(usize, conswave_core::Error)> = None;
    let mut lo = 0;
    loop {
        while lo < ny && done[lo] {
            lo += 1;
        }
        let limit = failed.as_ref().map_or(ny, |f| f.0);
        let mut ready = Vec::new();
        for j in lo..limit {
            if done[j] {
                continue;
            }
            if j == 0 || done[j - 1] || rows[j - 1].end() > rows[j].end() {
                ready.push(j);
            }
        }
        if ready.is_empty() {
            break;
        }
        let out: Vec<Result<Option<GridNode>>> = ready
            .par_iter()
            .map(|&j| {
                let i = rows[j].end();
                let south = if j > 0 { rows[j - 1].get(i) } else { None };
                solver.node(i, j, rows[j].nodes.last(), south)
            })
            .collect();
        for (&j, r) in ready.iter().zip(out) {
            match r {
                Ok(Some(n)) => {
                    rows[j].nodes.push(n);
                    if rows[j].end() == nx {
                        done[j] = true;
                    }
                }
                Ok(None) => done[j] = true,
                Err(e) => {
                    done[j] = true;
                    if failed.as_ref().is_none_or(|f| j < f.0) {
                        failed = Some((j, e));
                    }
                }
            }
        }
    }
    if let Some((_, e)) = failed {
        return Err(e);
    }
    Ok(CharGrid::from_rows(lat.clone(), rows))
}
