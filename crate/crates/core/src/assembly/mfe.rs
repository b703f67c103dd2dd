use super::element::{q1_divergence, q1_stiffness, rt0_mass};
use super::mesh::StructuredMesh;
use super::system::{Discretization, DspSystem, SystemMeta};
use super::{stabilization, MaterialProps};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Blocks of the mixed three-field system before the mapping to A, B, C, D, E.
#[derive(Clone, Debug)]
pub struct MfeBlocks {
    pub mesh: StructuredMesh,
    pub a_uu: SparseMatrix,
    pub a_up: SparseMatrix,
    pub a_pu: SparseMatrix,
    pub a_pp: SparseMatrix,
    pub a_pq: SparseMatrix,
    pub a_qp: SparseMatrix,
    pub a_qq: SparseMatrix,
    pub a_stab: SparseMatrix,
    pub b_u: Vec<f64>,
    pub b_p: Vec<f64>,
    pub b_q: Vec<f64>,
}

/// Elasticity part shared by both discretizations: stiffness, the coupling
/// (χ, b div η) and the traction load. Displacement dofs on the clamped
/// face x = 0 are kept with their diagonal and decoupled from everything else.
pub(crate) struct ElasticityPart {
    pub a_uu: SparseMatrix,
    pub a_pu: SparseMatrix,
    pub b_u: Vec<f64>,
}

pub(crate) fn elasticity_part(mesh: &StructuredMesh, props: &MaterialProps) -> ElasticityPart {
    let dim = mesh.dim();
    let h = mesh.h();
    let n = mesh.node_count() * dim;
    let (lambda, mu) = props.lame();
    let ke = q1_stiffness(dim, h, lambda, mu);
    let dv = q1_divergence(dim, h);
    let fixed: Vec<bool> = (0..n).map(|dof| mesh.node_coords(dof / dim)[0] == 0).collect();

    let nloc = (1usize << dim) * dim;
    let mut tk = Vec::with_capacity(mesh.cell_count() * nloc * nloc);
    let mut tb = Vec::with_capacity(mesh.cell_count() * nloc);
    for cell in 0..mesh.cell_count() {
        let nodes = mesh.cell_nodes(cell);
        let dofs: Vec<usize> = nodes.iter().flat_map(|&nd| (0..dim).map(move |c| nd * dim + c)).collect();
        for (a, &ga) in dofs.iter().enumerate() {
            for (b, &gb) in dofs.iter().enumerate() {
                if ga == gb || !(fixed[ga] || fixed[gb]) {
                    tk.push((ga, gb, ke[(a, b)]));
                }
            }
            if !fixed[ga] {
                tb.push((cell, ga, props.biot * dv[a]));
            }
        }
    }
    let a_uu = SparseMatrix::from_triplets(n, n, &tk);
    let a_pu = SparseMatrix::from_triplets(mesh.cell_count(), n, &tb).pruned(0.0);

    let mut b_u = vec![0.0; n];
    let top = dim - 1;
    let share = props.traction * mesh.face_measure() / (1usize << (dim - 1)) as f64;
    for node in 0..mesh.node_count() {
        let c = mesh.node_coords(node);
        if c[top] != mesh.cells() {
            continue;
        }
        // number of top faces touching this node
        let mut touching = 1usize;
        for &x in c.iter().take(dim - 1) {
            if x > 0 && x < mesh.cells() {
                touching *= 2;
            }
        }
        let dof = node * dim + top;
        if !fixed[dof] {
            b_u[dof] = -share * touching as f64;
        }
    }
    ElasticityPart { a_uu, a_pu, b_u }
}

/// Assembles the mixed (MFE) three-field blocks on a structured grid.
///
/// Flux unknowns live on every face except those on the faces x_d = 0,
/// where the normal flux is prescribed as zero; this gives p = d·N^d flux
/// unknowns (each cell owns its upper faces).
pub fn assemble_mfe(mesh: &StructuredMesh, props: &MaterialProps) -> Result<MfeBlocks> {
    props.validate()?;
    let dim = mesh.dim();
    let m = mesh.cell_count();
    let el = elasticity_part(mesh, props);

    let mut qdof = vec![usize::MAX; mesh.face_count()];
    let mut p = 0;
    for cell in 0..m {
        for f in mesh.cell_faces(cell) {
            if f.level > 0 && qdof[f.index] == usize::MAX {
                qdof[f.index] = p;
                p += 1;
            }
        }
    }
    // renumber in face order so the numbering does not depend on cell traversal
    let mut next = 0;
    for q in qdof.iter_mut() {
        if *q != usize::MAX {
            *q = next;
            next += 1;
        }
    }

    let mass = rt0_mass(dim, mesh.h(), props.mobility());
    let mut tq = Vec::new();
    let mut tpq = Vec::new();
    for cell in 0..m {
        let faces = mesh.cell_faces(cell);
        for (l, fl) in faces.iter().enumerate() {
            let ql = qdof[fl.index];
            if ql == usize::MAX {
                continue;
            }
            tpq.push((cell, ql, fl.sign));
            for (k, fk) in faces.iter().enumerate() {
                let qk = qdof[fk.index];
                if qk == usize::MAX || mass[(l, k)] == 0.0 {
                    continue;
                }
                tq.push((ql, qk, fl.sign * fk.sign * mass[(l, k)]));
            }
        }
    }
    let a_qq = SparseMatrix::from_triplets(p, p, &tq);
    let a_pq = SparseMatrix::from_triplets(m, p, &tpq);
    let a_qp = a_pq.transpose().scaled(-1.0);
    let a_up = el.a_pu.transpose().scaled(-1.0);
    let a_pp = SparseMatrix::diagonal(&vec![props.storage * mesh.cell_measure(); m]).pruned(0.0);

    Ok(MfeBlocks {
        mesh: *mesh,
        a_uu: el.a_uu,
        a_up,
        a_pu: el.a_pu,
        a_pp,
        a_pq,
        a_qp,
        a_qq,
        a_stab: stabilization(mesh, props),
        b_u: el.b_u,
        b_p: vec![0.0; m],
        b_q: vec![0.0; p],
    })
}

pub(crate) fn check_antisymmetric(a: &SparseMatrix, b: &SparseMatrix, what: &str) -> Result<()> {
    let diff = a.add(&b.transpose())?;
    let scale = a.max_abs().max(b.max_abs());
    if diff.max_abs() > 1e-14 * scale {
        return Err(Error::Assembly(format!("{what}: off by {:e}", diff.max_abs())));
    }
    Ok(())
}

/// Maps MFE blocks to the symmetric double saddle-point form:
/// A = A_uu, B = -A_pu, C = Δt A_qp, D = A_pp + A_stab, E = Δt A_qq,
/// with the pressure row negated and the flux row scaled by Δt.
pub fn mfe_to_dsp(blocks: &MfeBlocks, props: &MaterialProps) -> Result<DspSystem> {
    props.validate()?;
    check_antisymmetric(&blocks.a_up, &blocks.a_pu, "A_up + A_puᵀ")?;
    check_antisymmetric(&blocks.a_pq, &blocks.a_qp, "A_pq + A_qpᵀ")?;
    let dt = props.dt;
    let mut rhs = blocks.b_u.clone();
    rhs.extend(blocks.b_p.iter().map(|v| -v));
    rhs.extend(blocks.b_q.iter().map(|v| dt * v));
    DspSystem::new(
        blocks.a_uu.clone(),
        blocks.a_pu.scaled(-1.0),
        blocks.a_qp.scaled(dt),
        blocks.a_pp.add(&blocks.a_stab)?,
        blocks.a_qq.scaled(dt),
        rhs,
        SystemMeta { discretization: Discretization::Mfe, mesh: blocks.mesh, props: props.clone() },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_counts() {
        let mesh = StructuredMesh::new(2, 40).unwrap();
        let b = assemble_mfe(&mesh, &MaterialProps::default()).unwrap();
        assert_eq!(b.a_uu.nrows(), 3362);
        assert_eq!(b.a_pp.nrows(), 1600);
        assert_eq!(b.a_qq.nrows(), 3200);
        let mesh3 = StructuredMesh::new(3, 4).unwrap();
        let b3 = assemble_mfe(&mesh3, &MaterialProps::default()).unwrap();
        assert_eq!(b3.a_qq.nrows(), 3 * 64);
    }

    #[test]
    fn divergence_of_constant_velocity_field() {
        // global flux field φ = Σ_f |f| ψ_f for unit velocity along x: every
        // interior cell has zero net outflow
        let mesh = StructuredMesh::new(2, 4).unwrap();
        let b = assemble_mfe(&mesh, &MaterialProps::default()).unwrap();
        let p = b.a_qq.nrows();
        // x-faces come first in the flux numbering (axis-major face order)
        let nx = 16;
        let q: Vec<f64> = (0..p).map(|i| if i < nx { mesh.face_measure() } else { 0.0 }).collect();
        let div = b.a_pq.spmv(&q).unwrap();
        for cell in 0..mesh.cell_count() {
            let c = mesh.cell_coords(cell);
            let expect = if c[0] == 0 { mesh.face_measure() } else { 0.0 };
            assert!((div[cell] - expect).abs() < 1e-15, "cell {cell}");
        }
    }

    #[test]
    fn load_free_problem_has_zero_rhs() {
        let mesh = StructuredMesh::new(2, 3).unwrap();
        let props = MaterialProps { traction: 0.0, ..Default::default() };
        let sys = mfe_to_dsp(&assemble_mfe(&mesh, &props).unwrap(), &props).unwrap();
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn total_traction_is_applied() {
        let mesh = StructuredMesh::new(2, 5).unwrap();
        let props = MaterialProps::default();
        let b = assemble_mfe(&mesh, &props).unwrap();
        // the clamped corner node carries half a face of load that is dropped
        let total: f64 = b.b_u.iter().sum();
        let expect = -props.traction * (1.0 - 0.5 * mesh.h());
        assert!((total - expect).abs() < 1e-9);
    }
}
