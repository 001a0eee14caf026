//! The two-site superblock `(block + site) (site + block)` restricted to one
//! charge sector, with density-matrix decimation and wavefunction prediction.
//!
//! A superblock wavefunction is a list of dense matrices, one per pair of
//! enlarged sectors whose charges add up to the target. Matrices are stored
//! column-major in one flat vector so the Lanczos solver can treat them as a
//! plain vector.

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, SymmetricEigen};

use super::block::{Block, Enlarged};
use crate::lanczos::LinearOperator;

#[derive(Clone, Copy, Debug)]
pub(crate) struct PsiBlock {
    pub left: usize,
    pub right: usize,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl PsiBlock {
    fn span(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.rows * self.cols
    }
}

pub(crate) struct Superblock<'a> {
    pub left: &'a Enlarged,
    pub right: &'a Enlarged,
    pub hopping: f64,
    pub blocks: Vec<PsiBlock>,
    by_left: Vec<Option<usize>>,
    dim: usize,
}

impl<'a> Superblock<'a> {
    pub fn new(left: &'a Enlarged, right: &'a Enlarged, hopping: f64, target: u32) -> Self {
        let mut blocks = Vec::new();
        let mut by_left = vec![None; left.sector_count()];
        let mut offset = 0;
        for (a, &qa) in left.layout.charges.iter().enumerate() {
            if qa > target {
                break;
            }
            let Some(b) = right.layout.sector(target - qa) else { continue };
            let rows = left.layout.dims[a];
            let cols = right.layout.dims[b];
            by_left[a] = Some(blocks.len());
            blocks.push(PsiBlock { left: a, right: b, offset, rows, cols });
            offset += rows * cols;
        }
        Self { left, right, hopping, blocks, by_left, dim: offset }
    }

    pub fn block_for_left(&self, left_sector: usize) -> Option<&PsiBlock> {
        self.by_left.get(left_sector).copied().flatten().map(|i| &self.blocks[i])
    }

    pub fn view<'v>(&self, psi: &'v [f64], b: &PsiBlock) -> DMatrixView<'v, f64> {
        DMatrixView::from_slice(&psi[b.span()], b.rows, b.cols)
    }
}

impl LinearOperator for Superblock<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let t = self.hopping;
        for b in &self.blocks {
            let xb = self.view(x, b);
            {
                let mut yb = DMatrixViewMut::from_slice(&mut y[b.span()], b.rows, b.cols);
                yb.gemm(1.0, &self.left.ham[b.left], &xb, 1.0);
                yb.gemm(1.0, &xb, &self.right.ham[b.right], 1.0);
            }
            if t == 0.0 {
                continue;
            }
            // a^dag on the left site, a on the right site
            if let (Some(up), Some(r_low)) = (
                self.left.layout.sector(self.left.layout.charges[b.left] + 1),
                self.right.lower_t[b.right].as_ref(),
            ) {
                if let (Some(target), Some(l_low_t)) = (self.block_for_left(up), self.left.lower_t[up].as_ref()) {
                    let tmp = l_low_t * xb;
                    let mut yt = DMatrixViewMut::from_slice(&mut y[target.span()], target.rows, target.cols);
                    yt.gemm(-t, &tmp, r_low, 1.0);
                }
            }
            // a on the left site, a^dag on the right site
            if let Some(l_low) = self.left.lower[b.left].as_ref() {
                let q_left = self.left.layout.charges[b.left];
                let down = self.left.layout.sector(q_left - 1).expect("lowering target sector exists");
                let r_up = self.right.layout.sector(self.right.layout.charges[b.right] + 1);
                if let (Some(target), Some(r_up)) = (self.block_for_left(down), r_up) {
                    if let Some(r_low_up) = self.right.lower[r_up].as_ref() {
                        let tmp = l_low * xb;
                        let mut yt = DMatrixViewMut::from_slice(&mut y[target.span()], target.rows, target.cols);
                        yt.gemm(-t, &tmp, r_low_up, 1.0);
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

pub(crate) struct Truncation {
    /// Kept columns per enlarged sector of the decimated side.
    pub kept: Vec<Option<DMatrix<f64>>>,
    pub discarded_weight: f64,
    pub kept_states: usize,
}

/// Relative tolerance under which two density-matrix eigenvalues count as
/// one multiplet.
const MULTIPLET_TOL: f64 = 1e-9;
/// Eigenvalues below this are treated as numerical noise by the multiplet rule.
const MULTIPLET_FLOOR: f64 = 1e-12;

/// Number of leading eigenvalues to keep from a descending list: at most
/// `m`, extended so a degenerate multiplet is never split.
pub(crate) fn kept_count(sorted_desc: &[f64], m: usize) -> usize {
    let mut n = m.min(sorted_desc.len());
    if n == 0 {
        return 0;
    }
    let last = sorted_desc[n - 1];
    if last > MULTIPLET_FLOOR {
        while n < sorted_desc.len() && sorted_desc[n] >= last * (1.0 - MULTIPLET_TOL) {
            n += 1;
        }
    }
    n
}

/// Reduced density matrix of one side, diagonalized sector by sector and
/// truncated to `m` states.
pub(crate) fn truncate(sb: &Superblock, psi: &[f64], side: Side, m: usize) -> Truncation {
    let nsec = match side {
        Side::Left => sb.left.sector_count(),
        Side::Right => sb.right.sector_count(),
    };
    let mut eigs: Vec<Option<SymmetricEigen<f64, nalgebra::Dyn>>> = (0..nsec).map(|_| None).collect();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for b in &sb.blocks {
        let x = sb.view(psi, b);
        let (rho, sec) = match side {
            Side::Left => (x * x.transpose(), b.left),
            Side::Right => (x.transpose() * x, b.right),
        };
        let e = SymmetricEigen::new(rho);
        for (i, &v) in e.eigenvalues.iter().enumerate() {
            candidates.push((v.max(0.0), sec, i));
        }
        eigs[sec] = Some(e);
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let values: Vec<f64> = candidates.iter().map(|c| c.0).collect();
    let n = kept_count(&values, m);
    let discarded_weight = values[n..].iter().sum::<f64>();

    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); nsec];
    for &(_, sec, i) in &candidates[..n] {
        chosen[sec].push(i);
    }
    let kept = chosen
        .into_iter()
        .zip(eigs)
        .map(|(cols, e)| {
            let e = e?;
            if cols.is_empty() {
                return None;
            }
            let vecs = &e.eigenvectors;
            Some(DMatrix::from_fn(vecs.nrows(), cols.len(), |r, c| vecs[(r, cols[c])]))
        })
        .collect();
    Truncation { kept, discarded_weight, kept_states: n }
}

/// Carries the wavefunction one site to the right: the left enlarged block
/// was decimated into `new_left`, and the old right block is expanded into
/// `(site, smaller block)` through its stored transformation.
pub(crate) fn predict_right(
    old: &Superblock,
    psi: &[f64],
    new_left: &Block,
    old_right_block: &Block,
    new: &Superblock,
) -> Vec<f64> {
    let mut out = vec![0.0; new.dim()];
    for b in &old.blocks {
        let qa = old.left.layout.charges[b.left];
        let Some(k) = new_left.sector(qa) else { continue };
        let phi = new_left.transform[k].transpose() * old.view(psi, b);
        for c in &old.right.layout.components[b.right] {
            let rho = c.block_sector;
            let v = &old_right_block.transform[rho];
            let Some((lsec, lcomp)) = new.left.layout.find(k, c.site_state) else { continue };
            let Some(target) = new.block_for_left(lsec) else { continue };
            debug_assert_eq!(new.right.layout.charges[target.right], old_right_block.charges[rho]);
            let prod = phi.columns(c.offset, c.len) * v.transpose();
            let mut dst = DMatrixViewMut::from_slice(&mut out[target.span()], target.rows, target.cols);
            let mut rows = dst.rows_mut(lcomp.offset, lcomp.len);
            rows += prod;
        }
    }
    out
}

/// Mirror image of [`predict_right`].
pub(crate) fn predict_left(
    old: &Superblock,
    psi: &[f64],
    new_right: &Block,
    old_left_block: &Block,
    new: &Superblock,
) -> Vec<f64> {
    let mut out = vec![0.0; new.dim()];
    for b in &old.blocks {
        let qb = old.right.layout.charges[b.right];
        let Some(k) = new_right.sector(qb) else { continue };
        let phi = old.view(psi, b) * &new_right.transform[k];
        for c in &old.left.layout.components[b.left] {
            let lambda = c.block_sector;
            let u = &old_left_block.transform[lambda];
            let Some((rsec, rcomp)) = new.right.layout.find(k, c.site_state) else { continue };
            let Some(lsec) = new.left.layout.sector(old_left_block.charges[lambda]) else { continue };
            let Some(target) = new.block_for_left(lsec) else { continue };
            if target.right != rsec {
                continue;
            }
            let prod = u * phi.rows(c.offset, c.len);
            let mut dst = DMatrixViewMut::from_slice(&mut out[target.span()], target.rows, target.cols);
            let mut cols = dst.columns_mut(rcomp.offset, rcomp.len);
            cols += prod;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplets_are_not_split() {
        let v = [0.5, 0.2, 0.1, 0.1, 0.1, 0.0];
        assert_eq!(kept_count(&v, 3), 5);
        assert_eq!(kept_count(&v, 2), 2);
        // noise-level ties are cut at m
        let z = [0.9, 0.0, 0.0, 0.0];
        assert_eq!(kept_count(&z, 2), 2);
        assert_eq!(kept_count(&v, 10), 6);
    }
}
