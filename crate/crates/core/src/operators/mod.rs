//! Finite-difference Hamiltonians −div G grad + Vper + W on box grids.
//!
//! The grid is cell-centred, so every boundary condition is imposed through a
//! ghost node half a step outside the box: the ghost value is `g·φ_b` for the
//! adjacent boundary node `φ_b`, which turns the missing neighbour into a
//! diagonal correction `−c·g`.
//!
//! | condition  | ghost factor g        |
//! |------------|-----------------------|
//! | Dirichlet  | −1                    |
//! | Neumann    | +1                    |
//! | Mezincescu | (1 − ρh/2)/(1 + ρh/2) |
//! | Periodic   | wrapped neighbour     |
//!
//! With ρ taken from the periodically extended discrete ground state, the
//! Mezincescu factor equals Ψ(ghost)/Ψ(boundary), so the periodized Ψ is an
//! exact eigenvector of the box operator.

mod grid;

pub use grid::BoxGrid;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigensolve::{lowest_eigenpairs, SolverConfig};
use crate::error::{Error, Result};
use crate::harness::Fnv;
use crate::potential::{LatticeGeometry, PeriodicBackground};
use crate::sparse::CsrMatrix;

/// Boundary-condition tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Periodic,
    Mezincescu,
}

impl BcKind {
    pub fn name(self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
            BcKind::Periodic => "periodic",
            BcKind::Mezincescu => "mezincescu",
        }
    }
}

impl std::fmt::Display for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Robin coefficient ρ for every boundary face node of one grid shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoefficients {
    pub h: f64,
    pub shape: Vec<usize>,
    /// `faces[a] = [low face, high face]`, indexed by `BoxGrid::face_index`.
    pub faces: Vec<[Vec<f64>; 2]>,
}

impl BoundaryCoefficients {
    pub fn rho(&self, axis: usize, high: bool, face_index: usize) -> f64 {
        self.faces[axis][high as usize][face_index]
    }

    /// Ghost factor (1 − ρh/2)/(1 + ρh/2).
    pub fn ghost_factor(&self, axis: usize, high: bool, face_index: usize) -> f64 {
        let t = 0.5 * self.rho(axis, high, face_index) * self.h;
        (1.0 - t) / (1.0 + t)
    }

    pub fn max_abs(&self) -> f64 {
        self.faces.iter().flat_map(|f| f.iter().flatten()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
    Mezincescu(BoundaryCoefficients),
}

impl BoundaryCondition {
    pub fn kind(&self) -> BcKind {
        match self {
            BoundaryCondition::Dirichlet => BcKind::Dirichlet,
            BoundaryCondition::Neumann => BcKind::Neumann,
            BoundaryCondition::Periodic => BcKind::Periodic,
            BoundaryCondition::Mezincescu(_) => BcKind::Mezincescu,
        }
    }
}

/// Assembled operator with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteHamiltonian {
    pub matrix: CsrMatrix,
    pub grid: BoxGrid,
    pub bc: BcKind,
    /// FNV-1a hash of the potential (Vper + W) grid function bits.
    pub potential_hash: u64,
    /// Total γ subtracted so far (H = H_assembled − shift·I).
    pub shift: f64,
}

impl DiscreteHamiltonian {
    pub fn dof(&self) -> usize {
        self.matrix.dim()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Coordinate-list dump: header `dof h bc`, then one `row col value` line per entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {:.16e} {}", self.dof(), self.h(), self.bc)?;
        for i in 0..self.dof() {
            for (j, v) in self.matrix.row(i) {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

fn potential_hash(vper: &[f64], w: &[f64]) -> u64 {
    let mut h = Fnv::new();
    for (a, b) in vper.iter().zip(w) {
        h.write_u64((a + b).to_bits());
    }
    h.finish()
}

/// Assemble −div((MᵀM)⁻¹ grad) + Vper + W on `grid` with boundary condition `bc`.
///
/// `vper` and `w` are grid functions on the nodes of `grid`.
pub fn assemble_hamiltonian(
    geometry: &LatticeGeometry,
    vper: &[f64],
    w: &[f64],
    grid: &BoxGrid,
    bc: &BoundaryCondition,
) -> Result<DiscreteHamiltonian> {
    let n = grid.dof();
    let d = grid.dim();
    if geometry.dim() != d {
        return Err(Error::Shape {
            what: "grid dimension",
            expected: geometry.dim(),
            got: d,
        });
    }
    for (what, v) in [("Vper grid function", vper), ("W grid function", w)] {
        if v.len() != n {
            return Err(Error::Shape {
                what,
                expected: n,
                got: v.len(),
            });
        }
    }
    let metric = geometry.metric();
    let cross: Vec<(usize, usize, f64)> = (0..d)
        .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
        .filter_map(|(a, b)| {
            let g = metric[(a, b)];
            (g.abs() > 1e-15).then_some((a, b, g))
        })
        .collect();
    if !cross.is_empty() && matches!(bc.kind(), BcKind::Neumann | BcKind::Mezincescu) {
        return Err(Error::Unsupported(format!(
            "{} boundary condition needs an orthogonal lattice generator",
            bc.kind()
        )));
    }
    if let BoundaryCondition::Mezincescu(coef) = bc {
        if coef.shape != grid.shape() || (coef.h - grid.h()).abs() > 1e-15 {
            return Err(Error::Shape {
                what: "Mezincescu coefficient table size",
                expected: grid.dof(),
                got: coef.shape.iter().product(),
            });
        }
    }

    let h2 = grid.h() * grid.h();
    let coef: Vec<f64> = (0..d).map(|a| metric[(a, a)] / h2).collect();
    let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(n * (2 * d + 1 + 4 * cross.len()));
    let mut idx = vec![0usize; d];
    for node in 0..n {
        let mut rem = node;
        for (a, slot) in idx.iter_mut().enumerate() {
            let m = grid.nodes(a);
            *slot = rem % m;
            rem /= m;
        }
        let mut diag = vper[node] + w[node];
        for a in 0..d {
            let c = coef[a];
            let stride = grid.stride(a);
            let len = grid.nodes(a);
            diag += 2.0 * c;
            for high in [false, true] {
                let inside = if high { idx[a] + 1 < len } else { idx[a] > 0 };
                if inside {
                    let nb = if high { node + stride } else { node - stride };
                    t.push((node, nb, -c));
                    continue;
                }
                match bc {
                    BoundaryCondition::Dirichlet => diag += c,
                    BoundaryCondition::Neumann => diag -= c,
                    BoundaryCondition::Periodic => {
                        let nb = if high { node + stride - len * stride } else { node + (len - 1) * stride };
                        t.push((node, nb, -c));
                    }
                    BoundaryCondition::Mezincescu(coefs) => {
                        diag -= c * coefs.ghost_factor(a, high, grid.face_index(a, &idx));
                    }
                }
            }
        }
        for &(a, b, g) in &cross {
            let val = g / (2.0 * h2);
            for sa in [-1i64, 1] {
                for sb in [-1i64, 1] {
                    let ia = idx[a] as i64 + sa;
                    let ib = idx[b] as i64 + sb;
                    let (la, lb) = (grid.nodes(a) as i64, grid.nodes(b) as i64);
                    let (ia, ib) = if matches!(bc, BoundaryCondition::Periodic) {
                        (ia.rem_euclid(la), ib.rem_euclid(lb))
                    } else if ia < 0 || ia >= la || ib < 0 || ib >= lb {
                        continue;
                    } else {
                        (ia, ib)
                    };
                    let mut j = idx.clone();
                    j[a] = ia as usize;
                    j[b] = ib as usize;
                    t.push((node, grid.flat(&j), -val * (sa * sb) as f64));
                }
            }
        }
        t.push((node, node, diag));
    }
    Ok(DiscreteHamiltonian {
        matrix: CsrMatrix::from_triplets(n, t),
        grid: grid.clone(),
        bc: bc.kind(),
        potential_hash: potential_hash(vper, w),
        shift: 0.0,
    })
}

/// H − γ·I with the shift recorded.
pub fn shifted_operator(h: &DiscreteHamiltonian, gamma: f64) -> DiscreteHamiltonian {
    if gamma == 0.0 {
        return h.clone();
    }
    DiscreteHamiltonian {
        matrix: h.matrix.add_identity(-gamma),
        grid: h.grid.clone(),
        bc: h.bc,
        potential_hash: h.potential_hash,
        shift: h.shift + gamma,
    }
}

/// Positive normalized ground state of the periodic cell problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGroundState {
    pub dim: usize,
    pub n_h: usize,
    pub e0: f64,
    /// Values on the unit-cell grid, normalized so that Σ Ψ² h^d det M = 1.
    pub psi: Vec<f64>,
    pub psi_min: f64,
    pub psi_max: f64,
    /// E₂ − E₁ of the cell operator.
    pub gap: f64,
    pub residual: f64,
    /// Physical volume of one node, h^d det M.
    pub node_weight: f64,
}

impl PeriodicGroundState {
    /// Ψ extended periodically to every node of `grid`.
    pub fn periodized(&self, grid: &BoxGrid) -> Result<Vec<f64>> {
        if grid.n_h() != self.n_h || grid.dim() != self.dim {
            return Err(Error::Shape {
                what: "grid resolution for ground state",
                expected: self.n_h,
                got: grid.n_h(),
            });
        }
        Ok((0..grid.dof()).map(|n| self.psi[grid.cell_offset_index(n)]).collect())
    }

    /// ‖Ψ·1_D‖₂ in the physical measure.
    pub fn cell_norm(&self) -> f64 {
        (self.psi.iter().map(|v| v * v).sum::<f64>() * self.node_weight).sqrt()
    }
}

/// Lowest eigenpair of the periodic discretization on one cell.
pub fn periodic_ground_state(geometry: &LatticeGeometry, background: &PeriodicBackground, n_h: usize) -> Result<PeriodicGroundState> {
    let cell = BoxGrid::unit_cell(geometry.dim(), n_h)?;
    let vper = background.on_grid(&cell)?;
    let zero = vec![0.0; cell.dof()];
    let h = assemble_hamiltonian(geometry, &vper, &zero, &cell, &BoundaryCondition::Periodic)?;
    let cfg = SolverConfig {
        k: 2.min(cell.dof()),
        tol: 1e-11,
        ..SolverConfig::default()
    };
    let spec = lowest_eigenpairs(&h.matrix, &cfg)?;
    let e0 = spec.eigenvalues[0];
    let scale = 1.0 + e0.abs() + h.matrix.gershgorin_norm();
    let gap = if spec.eigenvalues.len() > 1 { spec.eigenvalues[1] - e0 } else { f64::INFINITY };
    if gap < 1e-9 * scale {
        return Err(Error::Invariant(format!(
            "periodic ground state is not simple (gap {gap:.3e})"
        )));
    }
    let mut psi: Vec<f64> = spec.eigenvectors.as_ref().expect("eigenvectors requested").column(0).iter().copied().collect();
    if psi.iter().sum::<f64>() < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
    let node_weight = cell.node_volume() * geometry.det();
    let norm = (psi.iter().map(|v| v * v).sum::<f64>() * node_weight).sqrt();
    psi.iter_mut().for_each(|v| *v /= norm);
    let psi_min = psi.iter().cloned().fold(f64::INFINITY, f64::min);
    let psi_max = psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if psi_min <= 0.0 {
        return Err(Error::Invariant(format!("ground state not strictly positive (min {psi_min:.3e})")));
    }
    let hp = h.matrix.apply(&psi);
    let residual = hp.iter().zip(&psi).map(|(a, b)| (a - e0 * b).powi(2)).sum::<f64>().sqrt()
        / psi.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(PeriodicGroundState {
        dim: geometry.dim(),
        n_h,
        e0,
        psi,
        psi_min,
        psi_max,
        gap,
        residual,
        node_weight,
    })
}

/// ρ = −∂_nΨ/Ψ at every boundary face node of `grid`, from the periodically
/// extended discrete Ψ: with b the boundary node and g its ghost,
/// ρ = −2(Ψ_g − Ψ_b)/(h(Ψ_g + Ψ_b)).
pub fn mezincescu_coefficients(psi: &PeriodicGroundState, grid: &BoxGrid) -> Result<BoundaryCoefficients> {
    if psi.psi.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Invariant("Mezincescu coefficients need a strictly positive ground state".into()));
    }
    if grid.n_h() != psi.n_h || grid.dim() != psi.dim {
        return Err(Error::Shape {
            what: "grid resolution for Mezincescu coefficients",
            expected: psi.n_h,
            got: grid.n_h(),
        });
    }
    let d = grid.dim();
    let n_h = grid.n_h();
    let h = grid.h();
    let cell = BoxGrid::unit_cell(d, n_h)?;
    let mut faces = Vec::with_capacity(d);
    for a in 0..d {
        let mut sides: [Vec<f64>; 2] = [vec![0.0; grid.face_len(a)], vec![0.0; grid.face_len(a)]];
        for node in 0..grid.dof() {
            let idx = grid.multi_index(node);
            for (s, high) in [(0usize, false), (1, true)] {
                let on_face = if high { idx[a] + 1 == grid.nodes(a) } else { idx[a] == 0 };
                if !on_face {
                    continue;
                }
                let mut off: Vec<usize> = idx.iter().map(|i| i % n_h).collect();
                let pb = psi.psi[cell.flat(&off)];
                off[a] = if high { 0 } else { n_h - 1 };
                let pg = psi.psi[cell.flat(&off)];
                sides[s][grid.face_index(a, &idx)] = -2.0 * (pg - pb) / (h * (pg + pb));
            }
        }
        faces.push(sides);
    }
    Ok(BoundaryCoefficients {
        h,
        shape: grid.shape(),
        faces,
    })
}

/// The boundary condition of kind `kind` on `grid`, building the Mezincescu
/// table from `ground` when needed.
pub fn boundary_condition(kind: BcKind, ground: Option<&PeriodicGroundState>, grid: &BoxGrid) -> Result<BoundaryCondition> {
    Ok(match kind {
        BcKind::Dirichlet => BoundaryCondition::Dirichlet,
        BcKind::Neumann => BoundaryCondition::Neumann,
        BcKind::Periodic => BoundaryCondition::Periodic,
        BcKind::Mezincescu => {
            let g = ground.ok_or_else(|| Error::Config("Mezincescu condition needs the periodic ground state".into()))?;
            BoundaryCondition::Mezincescu(mezincescu_coefficients(g, grid)?)
        }
    })
}
