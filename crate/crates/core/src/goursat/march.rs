use alloc::vec::Vec;

use super::lattice::{Lattice, SolveOptions, Solver};
use super::GridNode;
use crate::coeffs::CoefficientField;
use crate::initdata::InitialData;
use crate::Result;

/// The computed part of one lattice row: nodes `start..start + nodes.len()`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridRow {
    pub start: usize,
    pub nodes: Vec<GridNode>,
}

impl GridRow {
    #[inline]
    pub fn get(&self, i: usize) -> Option<&GridNode> {
        i.checked_sub(self.start).and_then(|k| self.nodes.get(k))
    }

    pub fn end(&self) -> usize {
        self.start + self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &GridNode)> {
        self.nodes.iter().enumerate().map(move |(k, n)| (self.start + k, n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub max_residual: f64,
    pub max_iterations: u32,
    pub min_sigma: f64,
    pub min_eta: f64,
    pub max_t: f64,
}

impl Default for SolveStats {
    fn default() -> Self {
        Self { nodes: 0, max_residual: 0.0, max_iterations: 0, min_sigma: 1.0, min_eta: 1.0, max_t: 0.0 }
    }
}

impl SolveStats {
    pub fn add(&mut self, n: &GridNode) {
        self.nodes += 1;
        self.max_residual = self.max_residual.max(n.residual);
        self.max_iterations = self.max_iterations.max(n.iterations);
        self.min_sigma = self.min_sigma.min(n.psx_e[1]).min(n.psx_w[1]);
        self.min_eta = self.min_eta.min(n.qez_n[1]).min(n.qez_s[1]);
        self.max_t = self.max_t.max(n.t);
    }
}

/// Sweep the lattice row by row (increasing `Ŷ`), each row west to east,
/// handing every finished row to `visit` together with the previous one.
/// Only two rows are held in memory.
pub fn march<F, V>(solver: &Solver<'_, F>, mut visit: V) -> Result<SolveStats>
where
    F: CoefficientField + ?Sized,
    V: FnMut(usize, Option<&GridRow>, &GridRow) -> Result<()>,
{
    let lat = &solver.lattice;
    let mut stats = SolveStats::default();
    let mut prev: Option<GridRow> = None;
    for j in 0..lat.ny() {
        let mut row = GridRow::default();
        if let Some(i0) = lat.first_col(j) {
            row.start = i0;
            for i in i0..lat.nx() {
                let south = prev.as_ref().and_then(|p| p.get(i));
                match solver.node(i, j, row.nodes.last(), south)? {
                    Some(n) => {
                        stats.add(&n);
                        row.nodes.push(n);
                    }
                    None => break,
                }
            }
        }
        visit(j, prev.as_ref(), &row)?;
        prev = Some(row);
    }
    Ok(stats)
}

/// Fully stored lattice solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CharGrid {
    pub lattice: Lattice,
    pub rows: Vec<GridRow>,
    pub stats: SolveStats,
}

impl CharGrid {
    pub fn from_rows(lattice: Lattice, rows: Vec<GridRow>) -> Self {
        let mut stats = SolveStats::default();
        for r in &rows {
            r.nodes.iter().for_each(|n| stats.add(n));
        }
        Self { lattice, rows, stats }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<&GridNode> {
        self.rows.get(j).and_then(|r| r.get(i))
    }

    /// All computed nodes as `(i, j, node)`, row by row.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &GridNode)> {
        self.rows.iter().enumerate().flat_map(|(j, r)| r.iter().map(move |(i, n)| (i, j, n)))
    }

    pub fn node_count(&self) -> usize {
        self.stats.nodes
    }

    /// `(X_i, Ŷ_j)`.
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.lattice.cols[i].coord, self.lattice.rows[j].coord)
    }

    /// Feed the stored rows through the same visitor [`march`] uses.
    pub fn replay<V>(&self, mut visit: V) -> Result<()>
    where
        V: FnMut(usize, Option<&GridRow>, &GridRow) -> Result<()>,
    {
        for (j, r) in self.rows.iter().enumerate() {
            visit(j, if j > 0 { Some(&self.rows[j - 1]) } else { None }, r)?;
        }
        Ok(())
    }
}

/// Build the lattice for `data` and march it sequentially.
pub fn solve<F: CoefficientField + ?Sized>(field: &F, data: &InitialData, opts: SolveOptions) -> Result<CharGrid> {
    let solver = Solver::new(field, data, opts)?;
    solve_with(&solver)
}

pub fn solve_with<F: CoefficientField + ?Sized>(solver: &Solver<'_, F>) -> Result<CharGrid> {
    let mut rows = Vec::with_capacity(solver.lattice.ny());
    let stats = march(solver, |_, _, r| {
        rows.push(r.clone());
        Ok(())
    })?;
    Ok(CharGrid { lattice: solver.lattice.clone(), rows, stats })
}
