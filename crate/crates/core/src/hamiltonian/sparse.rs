use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermitian operator stored as its upper triangle in compressed rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

/// Accumulates `(row, col, value)` entries of a Hermitian operator. Entries
/// below the diagonal are folded onto their upper-triangle mirror.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        TripletBuilder {
            dim,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.dim && col < self.dim);
        if row <= col {
            self.entries.push((row, col, value));
        } else {
            self.entries.push((col, row, value.conj()));
        }
    }

    #[inline]
    pub fn push_real(&mut self, row: usize, col: usize, value: f64) {
        self.push(row, col, Complex64::new(value, 0.0));
    }

    pub fn extend_from(&mut self, op: &SparseHermitian) {
        self.entries.extend(op.entries());
    }

    /// Sums duplicates and drops entries with magnitude below `drop_tol`.
    /// Duplicates are summed in insertion order, so the result is reproducible.
    pub fn build(mut self, drop_tol: f64) -> SparseHermitian {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(self.entries.len());
        let mut iter = self.entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if (r2, c2) != (r, c) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if r == c {
                v.im = 0.0;
            }
            if v.norm() >= drop_tol && v.norm() > 0.0 {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseHermitian {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl SparseHermitian {
    pub fn zeros(dim: usize) -> Self {
        TripletBuilder::new(dim).build(0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored (upper-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Upper-triangle entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let (r, c, conj) = if row <= col {
            (row, col, false)
        } else {
            (col, row, true)
        };
        let span = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match span.binary_search(&c) {
            Ok(k) => {
                let v = self.vals[self.row_ptr[r] + k];
                if conj {
                    v.conj()
                } else {
                    v
                }
            }
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// `y = H x`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for r in 0..self.dim {
            let xr = x[r];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                let v = self.vals[k];
                acc += v * x[c];
                if c != r {
                    y[c] += v.conj() * xr;
                }
            }
            y[r] += acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `<x|H|x>` (real for Hermitian `H`).
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let hx = self.apply(x);
        x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for (r, c, v) in self.entries() {
            sums[r] += v.norm();
            if r != c {
                sums[c] += v.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn add(&self, other: &SparseHermitian, drop_tol: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut b = TripletBuilder::new(self.dim);
        b.extend_from(self);
        b.extend_from(other);
        b.build(drop_tol)
    }

    /// Largest entrywise difference between two operators.
    pub fn max_abs_diff(&self, other: &SparseHermitian) -> f64 {
        let neg = other.scaled(-1.0);
        self.add(&neg, 0.0)
            .vals
            .iter()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Rescales every stored entry by `factor(row, col)`.
    pub fn map_entries(&self, factor: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            for k in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.vals[k] *= factor(r, out.cols[k]);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
            m[(c, r)] = v.conj();
        }
        m
    }

    pub fn to_dense_real(&self) -> Option<DMatrix<f64>> {
        if !self.is_real() {
            return None;
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.re;
            m[(c, r)] = v.re;
        }
        Some(m)
    }

    /// Max-norm of the commutator `[A, B]`, computed exactly on the sparse structure.
    pub fn commutator_max(&self, other: &SparseHermitian) -> f64 {
        assert_eq!(self.dim, other.dim);
        let full = |op: &SparseHermitian| {
            let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); op.dim];
            for (r, c, v) in op.entries() {
                rows[r].push((c, v));
                if r != c {
                    rows[c].push((r, v.conj()));
                }
            }
            rows
        };
        let (a, b) = (full(self), full(other));
        let mut worst: f64 = 0.0;
        let mut acc = std::collections::HashMap::new();
        for r in 0..self.dim {
            acc.clear();
            for &(k, va) in &a[r] {
                for &(c, vb) in &b[k] {
                    *acc.entry(c).or_insert(Complex64::new(0.0, 0.0)) += va * vb;
                }
            }
            for &(k, vb) in &b[r] {
                for &(c, va) in &a[k] {
                    *acc.entry(c).or_insert(Complex64::new(0.0, 0.0)) -= vb * va;
                }
            }
            for v in acc.values() {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// Coordinate text dump: the dimension on the first line, then one
    /// `row col value` line per stored entry (`row col re im` when complex).
    pub fn write_coordinate(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{}", self.dim)?;
        let real = self.is_real();
        for (r, c, v) in self.entries() {
            if real {
                writeln!(w, "{r} {c} {}", v.re)?;
            } else {
                writeln!(w, "{r} {c} {} {}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    pub fn read_coordinate(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let dim: usize = lines
            .next()
            .ok_or_else(|| Error::Data("empty matrix dump".into()))??
            .trim()
            .parse()
            .map_err(|e| Error::Data(format!("dimension line: {e}")))?;
        let mut b = TripletBuilder::new(dim);
        for (n, line) in lines.enumerate() {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Data(format!("line {}: malformed entry {line:?}", n + 2));
            if fields.len() != 3 && fields.len() != 4 {
                return Err(bad());
            }
            let r: usize = fields[0].parse().map_err(|_| bad())?;
            let c: usize = fields[1].parse().map_err(|_| bad())?;
            let re: f64 = fields[2].parse().map_err(|_| bad())?;
            let im: f64 = match fields.get(3) {
                Some(s) => s.parse().map_err(|_| bad())?,
                None => 0.0,
            };
            if r >= dim || c >= dim || r > c {
                return Err(bad());
            }
            b.push(r, c, Complex64::new(re, im));
        }
        Ok(b.build(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn folds_lower_triangle_and_sums() {
        let mut b = TripletBuilder::new(3);
        b.push(0, 1, c(1.0, 2.0));
        b.push(1, 0, c(1.0, -2.0));
        b.push(2, 2, c(3.0, 0.0));
        b.push(2, 2, c(1e-20, 0.0));
        b.push(0, 2, c(1e-16, 0.0));
        let h = b.build(1e-14);
        assert_eq!(h.nnz(), 2);
        assert_eq!(h.get(0, 1), c(2.0, 4.0));
        assert_eq!(h.get(1, 0), c(2.0, -4.0));
        assert_eq!(h.get(0, 2), c(0.0, 0.0));
    }

    #[test]
    fn coordinate_dump_round_trips() {
        let mut b = TripletBuilder::new(4);
        b.push_real(0, 0, 1.0);
        b.push_real(0, 3, -0.25);
        b.push_real(2, 1, 0.1);
        let h = b.build(0.0);
        let mut out = Vec::new();
        h.write_coordinate(&mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert_eq!(text, "4\n0 0 1\n0 3 -0.25\n1 2 0.1\n");
        let back = SparseHermitian::read_coordinate(&out[..]).unwrap();
        assert_eq!(back, h);
        assert!(SparseHermitian::read_coordinate("2\n1 0 1\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn apply_matches_dense(entries in prop::collection::vec((0usize..6, 0usize..6, -2.0f64..2.0, -2.0f64..2.0), 0..20),
                               x in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6)) {
            let mut b = TripletBuilder::new(6);
            for (r, col, re, im) in entries {
                let im = if r == col { 0.0 } else { im };
                b.push(r, col, c(re, im));
            }
            let h = b.build(0.0);
            let x: Vec<Complex64> = x.into_iter().map(|(a, b)| c(a, b)).collect();
            let y = h.apply(&x);
            let dense = h.to_dense();
            prop_assert!((dense.adjoint() - &dense).norm() < 1e-14);
            for r in 0..6 {
                let mut acc = c(0.0, 0.0);
                for k in 0..6 { acc += dense[(r, k)] * x[k]; }
                prop_assert!((acc - y[r]).norm() < 1e-12);
            }
        }
    }
}
