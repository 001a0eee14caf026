//! Matrix product state view of a converged DMRG wavefunction.
//!
//! The block transformations of the final sweep are left- and
//! right-orthonormal site tensors; the two-site wavefunction in the middle is
//! split by a singular value decomposition. Measurements contract the
//! network with plain environment matrices, so they do not rely on the
//! canonical form being exact.

use nalgebra::DMatrix;

use super::block::{Block, Layout, LocalSite};
use super::superblock::Superblock;

#[derive(Clone, Debug)]
pub struct Mps {
    /// `tensors[i][s]` maps the left bond of site `i` to its right bond.
    tensors: Vec<Vec<DMatrix<f64>>>,
    photons: Vec<Vec<f64>>,
    excitations: Vec<Vec<f64>>,
    lower: Vec<Vec<Option<(usize, f64)>>>,
}

/// Tensor of a site added to the right of `prev` to form `next`.
fn left_tensor(prev: &Block, site: &LocalSite, next: &Block) -> Vec<DMatrix<f64>> {
    let layout = Layout::new(prev, site);
    let prev_off = prev.offsets();
    let next_off = next.offsets();
    let mut t = vec![DMatrix::zeros(prev.dim(), next.dim()); site.dim()];
    for (k, &q) in next.charges.iter().enumerate() {
        let sec = layout.sector(q).expect("kept sector comes from the enlarged block");
        let u = &next.transform[k];
        for c in &layout.components[sec] {
            let rows = prev_off[c.block_sector];
            let mut dst = t[c.site_state].view_mut((rows, next_off[k]), (c.len, u.ncols()));
            dst.copy_from(&u.rows(c.offset, c.len));
        }
    }
    t
}

/// Tensor of a site added to the left of `prev` to form `next`.
fn right_tensor(prev: &Block, site: &LocalSite, next: &Block) -> Vec<DMatrix<f64>> {
    let layout = Layout::new(prev, site);
    let prev_off = prev.offsets();
    let next_off = next.offsets();
    let mut t = vec![DMatrix::zeros(next.dim(), prev.dim()); site.dim()];
    for (k, &q) in next.charges.iter().enumerate() {
        let sec = layout.sector(q).expect("kept sector comes from the enlarged block");
        let v = &next.transform[k];
        for c in &layout.components[sec] {
            let cols = prev_off[c.block_sector];
            let mut dst = t[c.site_state].view_mut((next_off[k], cols), (v.ncols(), c.len));
            dst.copy_from(&v.rows(c.offset, c.len).transpose());
        }
    }
    t
}

impl Mps {
    /// Assembles the state `psi` of the superblock whose left block has
    /// `position` sites. `max_center` caps the bond created by splitting the
    /// two-site wavefunction; singular values below `1e-8` are dropped.
    pub(crate) fn from_superblock(
        sites: &[LocalSite],
        left_blocks: &[Option<Block>],
        right_blocks: &[Option<Block>],
        position: usize,
        sb: &Superblock,
        psi: &[f64],
        max_center: usize,
    ) -> Self {
        let l = sites.len();
        let r = l - position - 2;
        let mut tensors = Vec::with_capacity(l);
        for i in 0..position {
            let prev = left_blocks[i].as_ref().expect("left block stored");
            let next = left_blocks[i + 1].as_ref().expect("left block stored");
            tensors.push(left_tensor(prev, &sites[i], next));
        }

        // split the two-site wavefunction
        let mut singular: Vec<(f64, usize, usize)> = Vec::new();
        let mut svds = Vec::with_capacity(sb.blocks.len());
        for (bi, b) in sb.blocks.iter().enumerate() {
            let svd = sb.view(psi, b).into_owned().svd(true, true);
            for (k, &s) in svd.singular_values.iter().enumerate() {
                if s > 1e-8 {
                    singular.push((s, bi, k));
                }
            }
            svds.push(svd);
        }
        singular.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        singular.truncate(max_center.max(1));
        singular.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.cmp(&b.2)));
        let center_dim = singular.len();

        let left_block = left_blocks[position].as_ref().expect("left block stored");
        let right_block = right_blocks[r].as_ref().expect("right block stored");
        let left_off = left_block.offsets();
        let right_off = right_block.offsets();
        let mut a = vec![DMatrix::zeros(left_block.dim(), center_dim); sites[position].dim()];
        let mut c = vec![DMatrix::zeros(center_dim, right_block.dim()); sites[position + 1].dim()];
        for (col, &(s, bi, k)) in singular.iter().enumerate() {
            let b = &sb.blocks[bi];
            let u = svds[bi].u.as_ref().expect("left singular vectors requested");
            let vt = svds[bi].v_t.as_ref().expect("right singular vectors requested");
            for comp in &sb.left.layout.components[b.left] {
                let row0 = left_off[comp.block_sector];
                for j in 0..comp.len {
                    a[comp.site_state][(row0 + j, col)] = u[(comp.offset + j, k)];
                }
            }
            for comp in &sb.right.layout.components[b.right] {
                let col0 = right_off[comp.block_sector];
                for j in 0..comp.len {
                    c[comp.site_state][(col, col0 + j)] = s * vt[(k, comp.offset + j)];
                }
            }
        }
        tensors.push(a);
        tensors.push(c);

        for i in position + 2..l {
            let size = l - i;
            let next = right_blocks[size].as_ref().expect("right block stored");
            let prev = right_blocks[size - 1].as_ref().expect("right block stored");
            tensors.push(right_tensor(prev, &sites[i], next));
        }

        Self {
            tensors,
            photons: sites.iter().map(|s| s.photons.iter().map(|&p| p as f64).collect()).collect(),
            excitations: sites.iter().map(|s| s.excitation.iter().map(|&e| e as f64).collect()).collect(),
            lower: sites.iter().map(|s| s.lower.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t[0].ncols()).collect()
    }

    fn push_left(&self, env: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
        let t = &self.tensors[i];
        let mut out = DMatrix::zeros(t[0].ncols(), t[0].ncols());
        for ts in t {
            out += ts.transpose() * (env * ts);
        }
        out
    }

    fn left_envs(&self) -> Vec<DMatrix<f64>> {
        let mut envs = vec![DMatrix::from_element(1, 1, 1.0)];
        for i in 0..self.len() {
            let next = self.push_left(&envs[i], i);
            envs.push(next);
        }
        envs
    }

    fn right_envs(&self) -> Vec<DMatrix<f64>> {
        let l = self.len();
        let mut envs = vec![DMatrix::zeros(0, 0); l + 1];
        envs[l] = DMatrix::from_element(1, 1, 1.0);
        for i in (0..l).rev() {
            let t = &self.tensors[i];
            let mut out = DMatrix::zeros(t[0].nrows(), t[0].nrows());
            for ts in t {
                out += ts * (&envs[i + 1] * ts.transpose());
            }
            envs[i] = out;
        }
        envs
    }

    pub fn norm_sq(&self) -> f64 {
        self.left_envs()[self.len()][(0, 0)]
    }

    fn close(env: &DMatrix<f64>, right: &DMatrix<f64>) -> f64 {
        env.dot(right)
    }

    fn diagonal(&self, weights: &[Vec<f64>]) -> Vec<f64> {
        let left = self.left_envs();
        let right = self.right_envs();
        let norm = left[self.len()][(0, 0)];
        (0..self.len())
            .map(|i| {
                let mut acc = 0.0;
                for (s, ts) in self.tensors[i].iter().enumerate() {
                    if weights[i][s] != 0.0 {
                        acc += weights[i][s] * Self::close(&(ts.transpose() * (&left[i] * ts)), &right[i + 1]);
                    }
                }
                acc / norm
            })
            .collect()
    }

    /// `<n_j>` of photons on every site.
    pub fn site_photons(&self) -> Vec<f64> {
        self.diagonal(&self.photons)
    }

    /// Expected local excitation number on every site.
    pub fn site_excitations(&self) -> Vec<f64> {
        self.diagonal(&self.excitations)
    }

    /// `<a_j^dag a_l>` for all pairs.
    pub fn photon_correlations(&self) -> Vec<Vec<f64>> {
        let l = self.len();
        let left = self.left_envs();
        let right = self.right_envs();
        let norm = left[l][(0, 0)];
        let diag = self.site_photons();
        let mut corr = vec![vec![0.0; l]; l];
        for j in 0..l {
            corr[j][j] = diag[j];
            // a^dag on site j: bra state s, ket state s' with a|s> = amp|s'>
            let tj = &self.tensors[j];
            let mut g = DMatrix::zeros(tj[0].ncols(), tj[0].ncols());
            for (s, low) in self.lower[j].iter().enumerate() {
                if let Some((s2, amp)) = *low {
                    g += (tj[s].transpose() * (&left[j] * &tj[s2])) * amp;
                }
            }
            for k in j + 1..l {
                let tk = &self.tensors[k];
                // a on site k: ket s, bra s2
                let mut value = 0.0;
                for (s, low) in self.lower[k].iter().enumerate() {
                    if let Some((s2, amp)) = *low {
                        value += amp * Self::close(&(tk[s2].transpose() * (&g * &tk[s])), &right[k + 1]);
                    }
                }
                corr[j][k] = value / norm;
                corr[k][j] = value / norm;
                if k + 1 < l {
                    g = self.push_left(&g, k);
                }
            }
        }
        corr
    }
}
