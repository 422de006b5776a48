//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The basis is factorized by right-looking Gaussian elimination with a
//! Markowitz pivot choice and threshold partial pivoting. Basis changes after
//! a factorization are recorded as eta columns until the next refactor.

use alloc::vec;
use alloc::vec::Vec;

/// Relative threshold for accepting a pivot within its column.
const THRESHOLD: f64 = 0.1;
/// Entries below this magnitude are not accepted as pivots.
const SINGULAR_TOL: f64 = 1e-11;
/// Columns examined per elimination step when searching for a pivot.
const SEARCH_COLUMNS: usize = 4;

/// Rows and basis positions left over when the basis is singular.
#[derive(Debug)]
pub(crate) struct Singular {
    pub rows: Vec<usize>,
    pub positions: Vec<usize>,
}

#[derive(Default)]
struct Etas {
    pivot: Vec<usize>,
    start: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Etas {
    fn push(&mut self, pivot: usize, entries: impl Iterator<Item = (usize, f64)>) {
        self.pivot.push(pivot);
        self.start.push(self.idx.len());
        for (i, v) in entries {
            self.idx.push(i);
            self.val.push(v);
        }
    }

    fn len(&self) -> usize {
        self.pivot.len()
    }

    #[inline]
    fn entries(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let end = self.start.get(k + 1).copied().unwrap_or(self.idx.len());
        self.idx[self.start[k]..end].iter().copied().zip(self.val[self.start[k]..end].iter().copied())
    }
}

pub(crate) struct Factor {
    m: usize,
    /// Elimination etas: `x[i] -= l * x[pivot]`.
    lower: Etas,
    /// Step `k` eliminates row `u_row[k]` with basis position `u_col[k]`.
    u_row: Vec<usize>,
    u_col: Vec<usize>,
    u_diag: Vec<f64>,
    /// Off-diagonal entries of each U row, keyed by basis position.
    upper: Etas,
    /// Product-form updates since the factorization.
    updates: Etas,
}

impl Factor {
    /// Factorizes the `m x m` basis whose column at position `p` is given by
    /// `column(p)` as `(row, value)` pairs.
    pub fn new(m: usize, column: impl Fn(usize) -> Vec<(usize, f64)>) -> Result<Self, Singular> {
        let mut cols: Vec<Vec<(usize, f64)>> = (0..m).map(&column).collect();
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut row_count = vec![0usize; m];
        for (c, col) in cols.iter().enumerate() {
            for &(i, _) in col {
                row_cols[i].push(c);
                row_count[i] += 1;
            }
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut f = Factor {
            m,
            lower: Etas::default(),
            u_row: Vec::with_capacity(m),
            u_col: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            upper: Etas::default(),
            updates: Etas::default(),
        };
        let mut slot = vec![usize::MAX; m];
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
        for (c, col) in cols.iter().enumerate() {
            buckets[col.len()].push(c);
        }

        for _ in 0..m {
            let Some((pr, pc)) = choose_pivot(&cols, &mut buckets, &col_done, &row_count) else {
                break;
            };
            let pivot_pos = cols[pc].iter().position(|&(i, _)| i == pr).expect("pivot entry");
            let (_, pv) = cols[pc].swap_remove(pivot_pos);
            let l_entries: Vec<(usize, f64)> = cols[pc].iter().map(|&(i, a)| (i, a / pv)).collect();
            for &(i, _) in &cols[pc] {
                row_count[i] -= 1;
            }
            cols[pc].clear();
            col_done[pc] = true;
            row_done[pr] = true;

            // Pivot row, removed from its columns.
            let mut u_entries: Vec<(usize, f64)> = Vec::new();
            for &c in &row_cols[pr] {
                if col_done[c] {
                    continue;
                }
                if let Some(k) = cols[c].iter().position(|&(i, _)| i == pr) {
                    let (_, u) = cols[c].swap_remove(k);
                    u_entries.push((c, u));
                }
            }
            row_cols[pr].clear();

            if !l_entries.is_empty() {
                for &(c, u) in &u_entries {
                    let col = &mut cols[c];
                    for (k, &(i, _)) in col.iter().enumerate() {
                        slot[i] = k;
                    }
                    for &(i, l) in &l_entries {
                        let delta = -l * u;
                        if slot[i] != usize::MAX {
                            col[slot[i]].1 += delta;
                        } else {
                            slot[i] = col.len();
                            col.push((i, delta));
                            row_cols[i].push(c);
                            row_count[i] += 1;
                        }
                    }
                    for &(i, _) in col.iter() {
                        slot[i] = usize::MAX;
                    }
                }
                f.lower.push(pr, l_entries.into_iter());
            }
            for &(c, _) in &u_entries {
                buckets[cols[c].len()].push(c);
            }
            f.u_row.push(pr);
            f.u_col.push(pc);
            f.u_diag.push(pv);
            f.upper.push(pr, u_entries.into_iter());
        }

        if f.u_row.len() < m {
            return Err(Singular {
                rows: (0..m).filter(|&i| !row_done[i]).collect(),
                positions: (0..m).filter(|&c| !col_done[c]).collect(),
            });
        }
        Ok(f)
    }

    pub fn num_updates(&self) -> usize {
        self.updates.len()
    }

    /// Solves `B z = b`; `b` is indexed by row and `z` by basis position.
    pub fn ftran(&self, b: &mut [f64], z: &mut [f64]) {
        for k in 0..self.lower.len() {
            let v = b[self.lower.pivot[k]];
            if v != 0.0 {
                for (i, l) in self.lower.entries(k) {
                    b[i] -= l * v;
                }
            }
        }
        for k in (0..self.m).rev() {
            let mut s = b[self.u_row[k]];
            for (c, u) in self.upper.entries(k) {
                s -= u * z[c];
            }
            z[self.u_col[k]] = s / self.u_diag[k];
        }
        for k in 0..self.updates.len() {
            let r = self.updates.pivot[k];
            let t = z[r];
            if t != 0.0 {
                z[r] = 0.0;
                for (i, e) in self.updates.entries(k) {
                    z[i] += e * t;
                }
            }
        }
    }

    /// Solves `y^T B = c^T`; `c` is indexed by basis position and `y` by row.
    pub fn btran(&self, c: &mut [f64], y: &mut [f64]) {
        for k in (0..self.updates.len()).rev() {
            let r = self.updates.pivot[k];
            let s: f64 = self.updates.entries(k).map(|(i, e)| e * c[i]).sum();
            c[r] = s;
        }
        for k in 0..self.m {
            let w = c[self.u_col[k]] / self.u_diag[k];
            y[self.u_row[k]] = w;
            if w != 0.0 {
                for (col, u) in self.upper.entries(k) {
                    c[col] -= w * u;
                }
            }
        }
        for k in (0..self.lower.len()).rev() {
            let s: f64 = self.lower.entries(k).map(|(i, l)| l * y[i]).sum();
            y[self.lower.pivot[k]] -= s;
        }
    }

    /// Records the replacement of the column at position `r`, where `alpha`
    /// is the entering column already transformed by [`Factor::ftran`].
    pub fn update(&mut self, r: usize, alpha: &[f64]) {
        let ar = alpha[r];
        let entries = alpha.iter().enumerate().filter_map(|(i, &a)| {
            if i == r {
                Some((i, 1.0 / ar))
            } else if a != 0.0 {
                Some((i, -a / ar))
            } else {
                None
            }
        });
        self.updates.push(r, entries);
    }
}

/// Markowitz search over the sparsest few columns. Buckets hold columns by
/// entry count and may contain stale entries, which are dropped here.
fn choose_pivot(
    cols: &[Vec<(usize, f64)>],
    buckets: &mut [Vec<usize>],
    col_done: &[bool],
    row_count: &[usize],
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize, f64)> = None;
    let mut examined = 0usize;
    for (cnt, bucket) in buckets.iter_mut().enumerate().skip(1) {
        let mut k = 0;
        while k < bucket.len() {
            let c = bucket[k];
            if col_done[c] || cols[c].len() != cnt {
                bucket.swap_remove(k);
                continue;
            }
            k += 1;
            let max = cols[c].iter().fold(0.0_f64, |a, &(_, v)| a.max(v.abs()));
            if max < SINGULAR_TOL {
                continue;
            }
            examined += 1;
            for &(i, v) in &cols[c] {
                if v.abs() < THRESHOLD * max {
                    continue;
                }
                let cost = (row_count[i] - 1) * (cnt - 1);
                let better = match best {
                    None => true,
                    Some((_, _, bc, bv)) => cost < bc || (cost == bc && v.abs() > bv),
                };
                if better {
                    best = Some((i, c, cost, v.abs()));
                }
            }
            if best.is_some_and(|b| b.2 == 0) || examined >= SEARCH_COLUMNS {
                return best.map(|(i, c, _, _)| (i, c));
            }
        }
    }
    best.map(|(i, c, _, _)| (i, c))
}
