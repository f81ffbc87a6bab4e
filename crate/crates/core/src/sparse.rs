//! Compressed sparse row operators and a reusable sparse LU.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};

use crate::error::{Error, Result};

/// Row-compressed matrix. Column indices are sorted and unique per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Duplicates are summed in the order they appear, so identical triplet
    /// lists give bit-identical matrices. Explicit zeros are kept.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut count = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            count[i + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut bucket: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        for &(i, j, v) in triplets {
            bucket[next[i]] = (j, v);
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for i in 0..nrows {
            let row = &mut bucket[count[i]..count[i + 1]];
            row.sort_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `selfᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    /// `yᵀ self x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                col_idx[next[j]] = i;
                vals[next[j]] = v;
                next[j] += 1;
            }
        }
        SparseOperator {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: count,
            col_idx,
            vals,
        }
    }

    pub fn scaled(&self, s: f64) -> SparseOperator {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s·other` on the union pattern.
    pub fn add_scaled(&self, s: f64, other: &SparseOperator) -> SparseOperator {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut vals = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ja, va)), Some((jb, vb))) if ja == jb => {
                        col_idx.push(ja);
                        vals.push(va + s * vb);
                        a.next();
                        b.next();
                    }
                    (Some((ja, va)), Some((jb, _))) if ja < jb => {
                        col_idx.push(ja);
                        vals.push(va);
                        a.next();
                    }
                    (Some((ja, va)), None) => {
                        col_idx.push(ja);
                        vals.push(va);
                        a.next();
                    }
                    (_, Some((jb, vb))) => {
                        col_idx.push(jb);
                        vals.push(s * vb);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.vals.iter().all(|v| v.is_finite())
    }

    /// `max |a_ij - a_ji| / max |a_ij|` (0 for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let t = self.transpose();
        let d = self.add_scaled(-1.0, &t);
        d.max_abs() / scale
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Sparse LU of a square [`SparseOperator`]. The symbolic analysis can be
/// reused for any matrix with the same pattern.
pub struct LuSolver {
    symbolic: SymbolicLu<usize>,
    pattern: (Vec<usize>, Vec<usize>),
    lu: Option<Lu<usize, f64>>,
    matrix: Option<SparseOperator>,
}

impl LuSolver {
    /// Relative residual every solve must reach.
    pub const RESIDUAL_LIMIT: f64 = 1e-9;

    pub fn analyze(a: &SparseOperator) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows, a.ncols
            )));
        }
        // the CSR arrays of A are the CSC arrays of Aᵀ
        let t = a.transpose();
        let sym = SymbolicSparseColMatRef::new_checked(t.ncols, t.nrows, &t.row_ptr, None, &t.col_idx);
        let symbolic = SymbolicLu::try_new(sym)
            .map_err(|e| Error::Singular(format!("symbolic factorization failed: {e:?}")))?;
        Ok(Self {
            symbolic,
            pattern: (t.row_ptr, t.col_idx),
            lu: None,
            matrix: None,
        })
    }

    pub fn matches_pattern(&self, a: &SparseOperator) -> bool {
        let t = a.transpose();
        self.pattern.0 == t.row_ptr && self.pattern.1 == t.col_idx
    }

    pub fn factor(&mut self, a: &SparseOperator) -> Result<()> {
        let t = a.transpose();
        if self.pattern.0 != t.row_ptr || self.pattern.1 != t.col_idx {
            return Err(Error::InvalidArgument("matrix pattern differs from the analyzed one".into()));
        }
        if !a.is_finite() {
            return Err(Error::Singular("matrix has non-finite entries".into()));
        }
        let sym = SymbolicSparseColMatRef::new_checked(t.ncols, t.nrows, &t.row_ptr, None, &t.col_idx);
        let mat = SparseColMatRef::new(sym, &t.vals);
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat)
            .map_err(|e| Error::Singular(format!("numeric factorization failed: {e:?}")))?;
        self.lu = Some(lu);
        self.matrix = Some(a.clone());
        Ok(())
    }

    /// One application of the factors, without refinement.
    fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        let lu = self
            .lu
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("solve called before factor".into()))?;
        let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
        let x = lu.solve(&rhs);
        Ok((0..b.len()).map(|i| x[i]).collect())
    }

    /// Solves with up to three steps of iterative refinement and checks the
    /// relative residual against [`Self::RESIDUAL_LIMIT`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let a = self
            .matrix
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("solve called before factor".into()))?;
        refine(a, b, |r| self.apply(r))
    }
}

/// Iterative refinement of `a x = b` with an approximate solver, checked
/// against [`LuSolver::RESIDUAL_LIMIT`].
fn refine(a: &SparseOperator, b: &[f64], apply: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.nrows;
    assert_eq!(b.len(), n);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = a.matvec(x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let mut x = apply(b)?;
    let mut res = f64::INFINITY;
    for _ in 0..4 {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("solution has non-finite entries".into()));
        }
        let r = residual(&x);
        res = norm2(&r) / bnorm;
        if res <= 1e-3 * LuSolver::RESIDUAL_LIMIT {
            break;
        }
        let dx = apply(&r)?;
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
    }
    res = res.min(norm2(&residual(&x)) / bnorm);
    if !(res <= LuSolver::RESIDUAL_LIMIT) {
        return Err(Error::Residual {
            residual: res,
            limit: LuSolver::RESIDUAL_LIMIT,
        });
    }
    Ok(x)
}

/// Sparse LU after exact elimination of a set of mutually uncoupled 2×2
/// diagonal blocks. The remaining Schur complement goes to [`LuSolver`];
/// the refinement is done against the full matrix.
pub struct CondensedLu {
    pairs: Vec<[usize; 2]>,
    /// Index in the Schur complement, `None` for eliminated unknowns.
    position: Vec<Option<usize>>,
    pattern: (Vec<usize>, Vec<usize>),
    inverses: Vec<[[f64; 2]; 2]>,
    schur: LuSolver,
    schur_dim: usize,
    matrix: Option<(SparseOperator, SparseOperator)>,
}

impl CondensedLu {
    /// `candidates` are tried in order; a pair is taken when both diagonal
    /// entries are stored and it is not coupled to an already taken pair.
    pub fn analyze(a: &SparseOperator, candidates: &[[usize; 2]]) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows, a.ncols
            )));
        }
        let n = a.nrows;
        let at = a.transpose();
        let mut taken = vec![false; n];
        let mut blocked = vec![false; n];
        let mut pairs = Vec::new();
        for &pair in candidates {
            let [c0, c1] = pair;
            if c0 == c1 || pair.iter().any(|&c| c >= n || taken[c] || blocked[c]) {
                continue;
            }
            let stored = |i: usize, j: usize| a.col_idx[a.row_ptr[i]..a.row_ptr[i + 1]].binary_search(&j).is_ok();
            if !stored(c0, c0) || !stored(c1, c1) {
                continue;
            }
            for &c in &pair {
                taken[c] = true;
                for (j, _) in a.row(c).chain(at.row(c)) {
                    blocked[j] = true;
                }
            }
            pairs.push(pair);
        }
        let mut position = vec![None; n];
        let mut next = 0;
        for (i, slot) in position.iter_mut().enumerate() {
            if !taken[i] {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut this = Self {
            pairs,
            position,
            pattern: (a.row_ptr.clone(), a.col_idx.clone()),
            inverses: Vec::new(),
            schur: LuSolver::analyze(&SparseOperator::zeros(0, 0))?,
            schur_dim: next,
            matrix: None,
        };
        let s = this.condense(a, &at, false)?;
        this.schur = LuSolver::analyze(&s)?;
        Ok(this)
    }

    /// Number of eliminated unknowns.
    pub fn n_eliminated(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn matches_pattern(&self, a: &SparseOperator) -> bool {
        self.pattern.0 == a.row_ptr && self.pattern.1 == a.col_idx
    }

    /// Schur complement. With `invert` the block inverses are stored; a
    /// singular block is an error.
    fn condense(&mut self, a: &SparseOperator, at: &SparseOperator, invert: bool) -> Result<SparseOperator> {
        let m = self.schur_dim;
        let pos = &self.position;
        let mut trip = Vec::with_capacity(a.nnz() + 40 * self.pairs.len());
        for i in 0..a.nrows {
            let Some(pi) = pos[i] else { continue };
            for (j, v) in a.row(i) {
                if let Some(pj) = pos[j] {
                    trip.push((pi, pj, v));
                }
            }
        }
        if invert {
            self.inverses.clear();
        }
        for &[c0, c1] in &self.pairs {
            let inv = if invert {
                let (a00, a01, a10, a11) = (a.get(c0, c0), a.get(c0, c1), a.get(c1, c0), a.get(c1, c1));
                let det = a00 * a11 - a01 * a10;
                let scale = a00.abs().max(a01.abs()).max(a10.abs()).max(a11.abs());
                if !(det.abs() > 1e-12 * scale * scale) {
                    return Err(Error::Singular(format!("eliminated 2x2 block at unknowns {c0}, {c1} is singular")));
                }
                let inv = [[a11 / det, -a01 / det], [-a10 / det, a00 / det]];
                self.inverses.push(inv);
                inv
            } else {
                [[0.0; 2]; 2]
            };
            // column entries (rows i) and row entries (columns j) of the pair
            let mut left: Vec<(usize, [f64; 2])> = Vec::new();
            for (k, &c) in [c0, c1].iter().enumerate() {
                for (i, v) in at.row(c) {
                    let Some(pi) = pos[i] else { continue };
                    match left.iter_mut().find(|e| e.0 == pi) {
                        Some(e) => e.1[k] = v,
                        None => {
                            let mut e = (pi, [0.0; 2]);
                            e.1[k] = v;
                            left.push(e);
                        }
                    }
                }
            }
            let mut right: Vec<(usize, [f64; 2])> = Vec::new();
            for (k, &c) in [c0, c1].iter().enumerate() {
                for (j, v) in a.row(c) {
                    let Some(pj) = pos[j] else { continue };
                    match right.iter_mut().find(|e| e.0 == pj) {
                        Some(e) => e.1[k] = v,
                        None => {
                            let mut e = (pj, [0.0; 2]);
                            e.1[k] = v;
                            right.push(e);
                        }
                    }
                }
            }
            for &(pi, l) in &left {
                let li = [l[0] * inv[0][0] + l[1] * inv[1][0], l[0] * inv[0][1] + l[1] * inv[1][1]];
                for &(pj, r) in &right {
                    trip.push((pi, pj, -(li[0] * r[0] + li[1] * r[1])));
                }
            }
        }
        Ok(SparseOperator::from_triplets(m, m, &trip))
    }

    pub fn factor(&mut self, a: &SparseOperator) -> Result<()> {
        if !self.matches_pattern(a) {
            return Err(Error::InvalidArgument("matrix pattern differs from the analyzed one".into()));
        }
        if !a.is_finite() {
            return Err(Error::Singular("matrix has non-finite entries".into()));
        }
        let at = a.transpose();
        let s = self.condense(a, &at, true)?;
        self.schur.factor(&s)?;
        self.matrix = Some((a.clone(), at));
        Ok(())
    }

    fn apply(&self, a: &SparseOperator, at: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
        let pos = &self.position;
        let mut reduced = vec![0.0; self.schur_dim];
        for (i, &p) in pos.iter().enumerate() {
            if let Some(p) = p {
                reduced[p] = b[i];
            }
        }
        // forward: b_R -= K_Rg K_gg⁻¹ b_g
        for (&[c0, c1], inv) in self.pairs.iter().zip(&self.inverses) {
            let y = [
                inv[0][0] * b[c0] + inv[0][1] * b[c1],
                inv[1][0] * b[c0] + inv[1][1] * b[c1],
            ];
            for (k, &c) in [c0, c1].iter().enumerate() {
                for (i, v) in at.row(c) {
                    if let Some(p) = pos[i] {
                        reduced[p] -= v * y[k];
                    }
                }
            }
        }
        let xr = self.schur.apply(&reduced)?;
        let mut x = vec![0.0; b.len()];
        for (i, &p) in pos.iter().enumerate() {
            if let Some(p) = p {
                x[i] = xr[p];
            }
        }
        // back: x_g = K_gg⁻¹ (b_g − K_gR x_R)
        for (&[c0, c1], inv) in self.pairs.iter().zip(&self.inverses) {
            let mut r = [b[c0], b[c1]];
            for (k, &c) in [c0, c1].iter().enumerate() {
                for (j, v) in a.row(c) {
                    if pos[j].is_some() {
                        r[k] -= v * x[j];
                    }
                }
            }
            x[c0] = inv[0][0] * r[0] + inv[0][1] * r[1];
            x[c1] = inv[1][0] * r[0] + inv[1][1] * r[1];
        }
        Ok(x)
    }

    /// Solve with refinement against the full matrix.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (a, at) = self
            .matrix
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("solve called before factor".into()))?;
        refine(a, b, |r| self.apply(a, at, r))
    }
}

/// One-shot factor and solve.
pub fn solve_sparse(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    let mut lu = LuSolver::analyze(a)?;
    lu.factor(a)?;
    lu.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = SparseOperator::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 4.0), (0, 0, 0.0)]);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(1, 2), 5.0);
        assert_eq!(a.get(0, 0), 0.0);
        assert_eq!(a.col_idx(), &[0, 1, 0, 2]);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![2.0, 8.0]);
        assert_eq!(a.matvec_t(&[1.0, 2.0]), vec![6.0, 2.0, 10.0]);
        let t = a.transpose();
        assert_eq!(t.transpose(), a);
        assert_eq!(t.get(2, 1), 5.0);
    }

    #[test]
    fn add_scaled_on_union_pattern() {
        let a = SparseOperator::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]);
        let b = SparseOperator::from_triplets(2, 2, &[(0, 1, 1.0), (1, 1, 2.0)]);
        let c = a.add_scaled(-0.5, &b);
        assert_eq!(c.to_dense(), vec![vec![1.0, -0.5], vec![0.0, 0.0]]);
        assert_eq!(c.nnz(), 3);
        assert!(b.asymmetry() > 0.0);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn lu_solves_and_reuses_pattern() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -2.0));
            }
        }
        let a = SparseOperator::from_triplets(n, n, &t);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&x);
        let mut lu = LuSolver::analyze(&a).unwrap();
        lu.factor(&a).unwrap();
        let y = lu.solve(&b).unwrap();
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-12));
        let a2 = a.scaled(2.0);
        assert!(lu.matches_pattern(&a2));
        lu.factor(&a2).unwrap();
        let y2 = lu.solve(&b).unwrap();
        assert!(x.iter().zip(&y2).all(|(p, q)| (0.5 * p - q).abs() < 1e-12));
        assert_eq!(lu.solve(&vec![0.0; n]).unwrap(), vec![0.0; n]);
    }

    /// 2D five-point-like operator on `n` pairs with a saddle tail.
    fn paired_operator(n: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            let (a, b) = (2 * i, 2 * i + 1);
            t.extend([(a, a, 4.0), (a, b, 0.5), (b, a, -0.3), (b, b, 3.0)]);
            if i + 1 < n {
                t.extend([(a, a + 2, -1.0), (a + 2, a, -1.2), (b, b + 2, -0.7), (b + 2, b, -1.0)]);
            }
            // coupling to one multiplier per four pairs, zero diagonal there
            let m = 2 * n + i / 4;
            t.extend([(a, m, 1.0), (m, a, 1.0), (b, m, -0.5), (m, b, -0.5)]);
        }
        let nm = n.div_ceil(4);
        SparseOperator::from_triplets(2 * n + nm, 2 * n + nm, &t)
    }

    #[test]
    fn condensed_lu_matches_plain_lu() {
        let a = paired_operator(24);
        let n = a.nrows();
        let candidates: Vec<[usize; 2]> = (0..24).map(|i| [2 * i, 2 * i + 1]).collect();
        let mut c = CondensedLu::analyze(&a, &candidates).unwrap();
        // neighbouring pairs are coupled, so every other one is taken
        assert_eq!(c.n_eliminated(), 24);
        c.factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (0.37 * i as f64).cos()).collect();
        let x = c.solve(&b).unwrap();
        let y = solve_sparse(&a, &b).unwrap();
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-10));
        let a2 = a.scaled(-3.0);
        assert!(c.matches_pattern(&a2));
        c.factor(&a2).unwrap();
        let x2 = c.solve(&b).unwrap();
        assert!(x2.iter().zip(&y).all(|(p, q)| (p + q / 3.0).abs() < 1e-10));
    }

    #[test]
    fn condensed_lu_rejects_singular_blocks() {
        let a = paired_operator(8);
        let mut c = CondensedLu::analyze(&a, &[[0, 1]]).unwrap();
        assert_eq!(c.n_eliminated(), 2);
        let zeroed = a.add_scaled(
            -1.0,
            &SparseOperator::from_triplets(a.nrows(), a.ncols(), &[(0, 0, 4.0), (0, 1, 0.5), (1, 0, -0.3), (1, 1, 3.0)]),
        );
        assert!(matches!(c.factor(&zeroed), Err(Error::Singular(_))));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SparseOperator::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(solve_sparse(&a, &[1.0, 0.0]).is_err());
    }
}
