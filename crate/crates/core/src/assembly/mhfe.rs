use super::element::rt0_mass;
use super::mesh::StructuredMesh;
use super::mfe::{check_antisymmetric, elasticity_part};
use super::system::{Discretization, DspSystem, SystemMeta};
use super::{stabilization, MaterialProps};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SparseMatrix};

/// Blocks of the mixed-hybrid four-field system: element-local fluxes w and
/// face multipliers π on every face.
#[derive(Clone, Debug)]
pub struct MhfeBlocks {
    pub mesh: StructuredMesh,
    pub a_uu: SparseMatrix,
    pub a_up: SparseMatrix,
    pub a_pu: SparseMatrix,
    pub a_pp: SparseMatrix,
    pub a_stab: SparseMatrix,
    pub a_ww: SparseMatrix,
    pub a_wp: SparseMatrix,
    pub a_pw: SparseMatrix,
    pub a_wpi: SparseMatrix,
    pub a_piw: SparseMatrix,
    pub b_u: Vec<f64>,
    pub b_p: Vec<f64>,
    pub b_pi: Vec<f64>,
}

pub fn assemble_mhfe(mesh: &StructuredMesh, props: &MaterialProps) -> Result<MhfeBlocks> {
    props.validate()?;
    let dim = mesh.dim();
    let m = mesh.cell_count();
    let nf = 2 * dim;
    let nw = m * nf;
    let el = elasticity_part(mesh, props);
    let mass = rt0_mass(dim, mesh.h(), props.mobility());

    let mut tww = Vec::with_capacity(nw * 2);
    let mut twp = Vec::with_capacity(nw);
    let mut twpi = Vec::with_capacity(nw);
    for cell in 0..m {
        let faces = mesh.cell_faces(cell);
        for (l, f) in faces.iter().enumerate() {
            let wl = cell * nf + l;
            for k in 0..nf {
                if mass[(l, k)] != 0.0 {
                    tww.push((wl, cell * nf + k, mass[(l, k)]));
                }
            }
            twp.push((wl, cell, -1.0));
            twpi.push((wl, f.index, 1.0));
        }
    }
    let a_wp = SparseMatrix::from_triplets(nw, m, &twp);
    let a_wpi = SparseMatrix::from_triplets(nw, mesh.face_count(), &twpi);
    Ok(MhfeBlocks {
        mesh: *mesh,
        a_uu: el.a_uu,
        a_up: el.a_pu.transpose().scaled(-1.0),
        a_pu: el.a_pu,
        a_pp: SparseMatrix::diagonal(&vec![props.storage * mesh.cell_measure(); m]).pruned(0.0),
        a_stab: stabilization(mesh, props),
        a_ww: SparseMatrix::from_triplets(nw, nw, &tww),
        a_pw: a_wp.transpose().scaled(-1.0),
        a_wp,
        a_piw: a_wpi.transpose(),
        a_wpi,
        b_u: el.b_u,
        b_p: vec![0.0; m],
        b_pi: vec![0.0; mesh.face_count()],
    })
}

/// Element-wise inverse of the block-diagonal A_ww.
fn block_inverse(a_ww: &SparseMatrix, block: usize) -> Result<SparseMatrix> {
    let n = a_ww.nrows();
    let mut t = Vec::with_capacity(n * block);
    for start in (0..n).step_by(block) {
        let idx: Vec<usize> = (start..start + block).collect();
        let local = a_ww.gather_dense(&idx);
        let inv = local.cholesky().map_err(|e| e.in_block("A_ww"))?;
        let mut e = vec![0.0; block];
        for j in 0..block {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let c = inv.solve(&e);
            for (i, v) in c.into_iter().enumerate() {
                t.push((start + i, start + j, v));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, &t))
}

/// Certifies D ⪰ 0: diagonal dominance with nonnegative diagonal, otherwise
/// a dense eigenvalue check.
fn check_semidefinite(d: &SparseMatrix) -> Result<()> {
    let mut dominant = true;
    for i in 0..d.nrows() {
        let (c, v) = d.row(i);
        let mut diag = 0.0;
        let mut off = 0.0;
        for (&j, &x) in c.iter().zip(v) {
            if j == i {
                diag = x;
            } else {
                off += x.abs();
            }
        }
        if diag < 0.0 || diag + 1e-12 * diag.abs() < off {
            dominant = false;
            break;
        }
    }
    if dominant {
        return Ok(());
    }
    let vals = symmetric_eigen(&d.to_dense(), false)?.values;
    let lmin = vals.first().copied().unwrap_or(0.0);
    if lmin < -1e-10 * d.max_abs() {
        return Err(Error::CondensationSign { lambda_min: lmin });
    }
    Ok(())
}

/// Eliminates the element fluxes w = A_ww⁻¹(...) and maps to
/// A = A_uu, B = -A_pu, C = Δt A_πw G A_wp, D = A_pp + A_stab - Δt A_pw G A_wp,
/// E = Δt A_πw G A_wπ with G = A_ww⁻¹.
///
/// The system is assembled in the symmetric block form from these blocks.
pub fn condense_mhfe(blocks: &MhfeBlocks, props: &MaterialProps) -> Result<DspSystem> {
    props.validate()?;
    check_antisymmetric(&blocks.a_up, &blocks.a_pu, "A_up + A_puᵀ")?;
    check_antisymmetric(&blocks.a_pw, &blocks.a_wp, "A_pw + A_wpᵀ")?;
    let dt = props.dt;
    let g = block_inverse(&blocks.a_ww, 2 * blocks.mesh.dim())?;
    let pig = blocks.a_piw.matmul(&g)?;
    let c = pig.matmul(&blocks.a_wp)?.scaled(dt);
    let e = pig.matmul(&blocks.a_wpi)?.scaled(dt);
    let pwg = blocks.a_pw.matmul(&g)?;
    let dcorr = pwg.matmul(&blocks.a_wp)?;
    let d = blocks.a_pp.add(&blocks.a_stab)?.add_scaled(1.0, &dcorr, -dt)?;
    check_semidefinite(&d)?;
    let mut rhs = blocks.b_u.clone();
    rhs.extend(blocks.b_p.iter().map(|v| -v));
    rhs.extend(blocks.b_pi.iter().map(|v| -dt * v));
    DspSystem::new(
        blocks.a_uu.clone(),
        blocks.a_pu.scaled(-1.0),
        c,
        d,
        e,
        rhs,
        SystemMeta { discretization: Discretization::Mhfe, mesh: blocks.mesh, props: props.clone() },
    )
}
