//! Compressed sparse row storage for complex matrices.
//!
//! The pattern is built once from element connectivity; element matrices are
//! then scattered in element order, so summation order (and therefore every
//! bit of the result) is independent of how the element work was scheduled.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Zero matrix whose pattern couples every pair of dofs sharing an element.
    pub fn from_element_pattern(n: usize, elements: &[Vec<usize>]) -> Result<Self> {
        for dofs in elements {
            if let Some(&bad) = dofs.iter().find(|&&d| d >= n) {
                return Err(Error::IndexOutOfRange { index: bad, len: n });
            }
        }
        // dof -> elements, in CSR form
        let mut count = vec![0usize; n + 1];
        for dofs in elements {
            for &d in dofs {
                count[d + 1] += 1;
            }
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut owner = vec![0usize; count[n]];
        for (t, dofs) in elements.iter().enumerate() {
            for &d in dofs {
                owner[fill[d]] = t;
                fill[d] += 1;
            }
        }

        let rows: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|r| {
                let mut cols: Vec<usize> =
                    owner[count[r]..count[r + 1]].iter().flat_map(|&t| elements[t].iter().copied()).collect();
                cols.sort_unstable();
                cols.dedup();
                cols
            })
            .collect();

        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for r in &rows {
            row_ptr.push(row_ptr.last().unwrap() + r.len());
        }
        let col_idx: Vec<usize> = rows.into_iter().flatten().collect();
        let values = vec![Complex64::new(0.0, 0.0); col_idx.len()];
        Ok(Self { nrows: n, ncols: n, row_ptr, col_idx, values })
    }

    /// Build from `(row, col, value)` triplets. Duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        for &(r, c, _) in triplets {
            if r >= nrows {
                return Err(Error::IndexOutOfRange { index: r, len: nrows });
            }
            if c >= ncols {
                return Err(Error::IndexOutOfRange { index: c, len: ncols });
            }
        }
        // stable, so duplicates keep their input order
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<Complex64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for i in order {
            let (r, c, v) = triplets[i];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn position(&self, r: usize, c: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        cols.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.position(r, c).map_or(Complex64::new(0.0, 0.0), |k| self.values[k])
    }

    /// Add a dense row-major element matrix on `dofs x dofs`.
    pub fn add_local(&mut self, dofs: &[usize], local: &[Complex64]) -> Result<()> {
        let m = dofs.len();
        if local.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: local.len() });
        }
        for (i, &r) in dofs.iter().enumerate() {
            for (j, &c) in dofs.iter().enumerate() {
                let k = self.position(r, c).ok_or_else(|| {
                    Error::InvalidArgument(format!("entry ({r}, {c}) is outside the sparsity pattern"))
                })?;
                self.values[k] += local[i * m + j];
            }
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: x.len() });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: y.len() });
        }
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        });
        Ok(())
    }

    /// `xᴴ A x`
    pub fn quadratic_form(&self, x: &[Complex64]) -> Result<Complex64> {
        let ax = self.matvec(x)?;
        Ok(dot(x, &ax))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max |a_ij - conj(a_ji)| / max |a_ij|`; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let d = (self.values[k] - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// Dump as CSV `row,col,re,im` for offline inspection.
    pub fn write_coo(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "row,col,re,im")?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r},{c},{:e},{:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// `xᴴ y`
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
