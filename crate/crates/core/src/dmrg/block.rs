//! Renormalized blocks and their one-site enlargements.
//!
//! Every basis is graded by the total excitation number ("charge"). A block
//! stores its Hamiltonian as one dense matrix per charge sector and the photon
//! annihilator of its boundary site as matrices between neighbouring sectors.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::SiteTables;
use crate::site::ModelSpec;

/// Local data of one lattice site in the layout DMRG needs.
#[derive(Clone, Debug)]
pub(crate) struct LocalSite {
    pub excitation: Vec<u32>,
    pub photons: Vec<u32>,
    pub ham: DMatrix<f64>,
    /// `a |s> = amp |s'>` as `(s', amp)`.
    pub lower: Vec<Option<(usize, f64)>>,
}

impl LocalSite {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let tables = SiteTables::new(spec)?;
        let d = tables.dim();
        let mut ham = DMatrix::zeros(d, d);
        for (j, col) in tables.ham_cols.iter().enumerate() {
            for &(i, v) in col {
                ham[(i, j)] = v;
            }
        }
        Ok(Self {
            excitation: (0..d).map(|s| tables.basis.excitation(s)).collect(),
            photons: tables.basis.states().iter().map(|s| s.photons).collect(),
            ham,
            lower: tables.lower.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.excitation.len()
    }
}

/// A renormalized block of consecutive sites.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Block {
    pub sites: usize,
    /// Ascending sector charges.
    pub charges: Vec<u32>,
    pub ham: Vec<DMatrix<f64>>,
    /// Boundary-site annihilator from sector `k` to the sector of charge
    /// `charges[k] - 1` (rows index the lower sector).
    pub edge_lower: Vec<Option<DMatrix<f64>>>,
    /// Columns of kept states in the enlarged sector of equal charge.
    pub transform: Vec<DMatrix<f64>>,
}

impl Block {
    /// The block of zero sites: one vacuum state.
    pub fn empty() -> Self {
        Self {
            sites: 0,
            charges: vec![0],
            ham: vec![DMatrix::zeros(1, 1)],
            edge_lower: vec![None],
            transform: Vec::new(),
        }
    }

    pub fn sector(&self, charge: u32) -> Option<usize> {
        self.charges.binary_search(&charge).ok()
    }

    pub fn sector_dim(&self, k: usize) -> usize {
        self.ham[k].nrows()
    }

    pub fn dim(&self) -> usize {
        self.ham.iter().map(|h| h.nrows()).sum()
    }

    /// Global offset of every sector in the concatenated basis.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.ham
            .iter()
            .map(|h| {
                let o = acc;
                acc += h.nrows();
                o
            })
            .collect()
    }
}

/// One product component `(block sector, site state)` inside an enlarged sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Component {
    pub block_sector: usize,
    pub site_state: usize,
    pub offset: usize,
    pub len: usize,
}

/// Sector structure of `block x site`.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub charges: Vec<u32>,
    pub dims: Vec<usize>,
    pub components: Vec<Vec<Component>>,
    lookup: HashMap<(usize, usize), (usize, usize)>,
}

impl Layout {
    pub fn new(block: &Block, site: &LocalSite) -> Self {
        let mut by_charge: std::collections::BTreeMap<u32, Vec<(usize, usize)>> = Default::default();
        for (k, &q) in block.charges.iter().enumerate() {
            for s in 0..site.dim() {
                by_charge.entry(q + site.excitation[s]).or_default().push((k, s));
            }
        }
        let mut charges = Vec::new();
        let mut dims = Vec::new();
        let mut components = Vec::new();
        let mut lookup = HashMap::new();
        for (q, mut combos) in by_charge {
            combos.sort();
            let sec = charges.len();
            let mut offset = 0;
            let mut comps = Vec::with_capacity(combos.len());
            for (k, s) in combos {
                let len = block.sector_dim(k);
                lookup.insert((k, s), (sec, comps.len()));
                comps.push(Component { block_sector: k, site_state: s, offset, len });
                offset += len;
            }
            charges.push(q);
            dims.push(offset);
            components.push(comps);
        }
        Self { charges, dims, components, lookup }
    }

    pub fn sector(&self, charge: u32) -> Option<usize> {
        self.charges.binary_search(&charge).ok()
    }

    pub fn find(&self, block_sector: usize, site_state: usize) -> Option<(usize, Component)> {
        self.lookup.get(&(block_sector, site_state)).map(|&(sec, c)| (sec, self.components[sec][c]))
    }
}

/// `block x site` with its Hamiltonian and the new boundary annihilator.
#[derive(Clone, Debug)]
pub(crate) struct Enlarged {
    pub layout: Layout,
    pub ham: Vec<DMatrix<f64>>,
    /// Site annihilator from sector `k` to the sector of charge one lower.
    pub lower: Vec<Option<DMatrix<f64>>>,
    pub lower_t: Vec<Option<DMatrix<f64>>>,
}

impl Enlarged {
    /// `hopping` couples the new site to the block's boundary site.
    pub fn new(block: &Block, site: &LocalSite, hopping: f64) -> Self {
        let layout = Layout::new(block, site);
        let nsec = layout.charges.len();
        let mut ham: Vec<DMatrix<f64>> = layout.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();

        for (sec, comps) in layout.components.iter().enumerate() {
            let h = &mut ham[sec];
            for c in comps {
                let mut diag = h.view_mut((c.offset, c.offset), (c.len, c.len));
                diag += &block.ham[c.block_sector];
                for i in 0..c.len {
                    diag[(i, i)] += site.ham[(c.site_state, c.site_state)];
                }
                // local off-diagonal terms keep the block state
                for (sec2, c2) in (0..site.dim())
                    .filter(|&s2| s2 != c.site_state && site.ham[(s2, c.site_state)] != 0.0)
                    .filter_map(|s2| layout.find(c.block_sector, s2))
                {
                    debug_assert_eq!(sec2, sec);
                    let v = site.ham[(c2.site_state, c.site_state)];
                    for i in 0..c.len {
                        h[(c2.offset + i, c.offset + i)] += v;
                    }
                }
            }
        }

        if block.sites > 0 && hopping != 0.0 {
            // -t (a^dag_edge a_site + a_edge a^dag_site)
            for (sec, comps) in layout.components.iter().enumerate() {
                for c in comps {
                    let Some((s_low, amp)) = site.lower[c.site_state] else { continue };
                    let q_up = block.charges[c.block_sector] + 1;
                    let Some(k_up) = block.sector(q_up) else { continue };
                    let Some(edge) = &block.edge_lower[k_up] else { continue };
                    let Some((sec2, c2)) = layout.find(k_up, s_low) else { continue };
                    debug_assert_eq!(sec2, sec);
                    let h = &mut ham[sec];
                    // <k_up, s_low| a^dag_edge a_site |k, s> = amp * edge^T
                    let mut to = h.view_mut((c2.offset, c.offset), (c2.len, c.len));
                    to += edge.transpose() * (-hopping * amp);
                    let mut back = h.view_mut((c.offset, c2.offset), (c.len, c2.len));
                    back += edge * (-hopping * amp);
                }
            }
        }

        let mut lower: Vec<Option<DMatrix<f64>>> = vec![None; nsec];
        for (sec, comps) in layout.components.iter().enumerate() {
            let q = layout.charges[sec];
            if q == 0 {
                continue;
            }
            let Some(sec_low) = layout.sector(q - 1) else { continue };
            let mut m = DMatrix::zeros(layout.dims[sec_low], layout.dims[sec]);
            let mut any = false;
            for c in comps {
                let Some((s_low, amp)) = site.lower[c.site_state] else { continue };
                let (s2, c2) = layout.find(c.block_sector, s_low).expect("lowered component exists");
                debug_assert_eq!(s2, sec_low);
                for i in 0..c.len {
                    m[(c2.offset + i, c.offset + i)] = amp;
                }
                any = true;
            }
            if any {
                lower[sec] = Some(m);
            }
        }
        let lower_t = lower.iter().map(|m| m.as_ref().map(|m| m.transpose())).collect();
        Self { layout, ham, lower, lower_t }
    }

    pub fn sector_count(&self) -> usize {
        self.layout.charges.len()
    }
}

/// Renormalized block from an enlarged block and per-sector kept columns.
/// `kept[k]` is `None` (sector dropped) or an orthonormal column set.
pub(crate) fn renormalize(enlarged: &Enlarged, kept: Vec<Option<DMatrix<f64>>>, sites: usize) -> Block {
    let mut charges = Vec::new();
    let mut ham = Vec::new();
    let mut transform = Vec::new();
    let mut source = Vec::new();
    for (sec, u) in kept.into_iter().enumerate() {
        let Some(u) = u else { continue };
        if u.ncols() == 0 {
            continue;
        }
        charges.push(enlarged.layout.charges[sec]);
        ham.push(u.transpose() * &enlarged.ham[sec] * &u);
        transform.push(u);
        source.push(sec);
    }
    let mut edge_lower = vec![None; charges.len()];
    for (k, &q) in charges.iter().enumerate() {
        if q == 0 {
            continue;
        }
        let Ok(k_low) = charges.binary_search(&(q - 1)) else { continue };
        let Some(op) = &enlarged.lower[source[k]] else { continue };
        edge_lower[k] = Some(transform[k_low].transpose() * op * &transform[k]);
    }
    Block { sites, charges, ham, edge_lower, transform }
}
