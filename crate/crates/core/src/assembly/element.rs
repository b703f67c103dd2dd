use crate::linalg::DenseMatrix;

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

fn shape_grad(dim: usize, a: usize, xi: &[f64], h: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (k, gk) in g.iter_mut().enumerate().take(dim) {
        let mut v = 1.0 / h;
        for d in 0..dim {
            let up = (a >> d) & 1 == 1;
            v *= if d == k {
                if up { 1.0 } else { -1.0 }
            } else if up {
                xi[d]
            } else {
                1.0 - xi[d]
            };
        }
        *gk = v;
    }
    g
}

fn gauss_points(dim: usize) -> Vec<([f64; 3], f64)> {
    let mut out = Vec::new();
    for q in 0..1usize << dim {
        let mut xi = [0.0; 3];
        for d in 0..dim {
            xi[d] = GAUSS[(q >> d) & 1];
        }
        out.push((xi, 0.5f64.powi(dim as i32)));
    }
    out
}

/// Q1 element stiffness for λ div u div v + 2μ ε(u):ε(v) on a cell of side h.
/// Local dof `a * dim + c` is component c at local node a.
pub fn q1_stiffness(dim: usize, h: f64, lambda: f64, mu: f64) -> DenseMatrix {
    let nn = 1usize << dim;
    let nd = nn * dim;
    let vol = h.powi(dim as i32);
    let mut k = DenseMatrix::zeros(nd, nd);
    for (xi, w) in gauss_points(dim) {
        let grads: Vec<[f64; 3]> = (0..nn).map(|a| shape_grad(dim, a, &xi, h)).collect();
        let wq = w * vol;
        for a in 0..nn {
            for b in 0..nn {
                let ga = grads[a];
                let gb = grads[b];
                let dotg: f64 = (0..dim).map(|d| ga[d] * gb[d]).sum();
                for c in 0..dim {
                    for e in 0..dim {
                        let mut v = lambda * ga[c] * gb[e] + mu * ga[e] * gb[c];
                        if c == e {
                            v += mu * dotg;
                        }
                        k[(a * dim + c, b * dim + e)] += wq * v;
                    }
                }
            }
        }
    }
    k
}

/// ∫_cell ∂N_a/∂x_c for each local dof `a * dim + c`.
pub fn q1_divergence(dim: usize, h: f64) -> Vec<f64> {
    let nn = 1usize << dim;
    let vol = h.powi(dim as i32);
    let mut out = vec![0.0; nn * dim];
    for (xi, w) in gauss_points(dim) {
        for a in 0..nn {
            let g = shape_grad(dim, a, &xi, h);
            for c in 0..dim {
                out[a * dim + c] += w * vol * g[c];
            }
        }
    }
    out
}

/// RT0 mass matrix (1/mobility) ∫ φ_l · φ_m on one cell, for local basis
/// functions with unit outward flux, ordered as in `StructuredMesh::cell_faces`.
pub fn rt0_mass(dim: usize, h: f64, mobility: f64) -> DenseMatrix {
    let nf = 2 * dim;
    let s = h.powi(2 - dim as i32) / mobility;
    let mut m = DenseMatrix::zeros(nf, nf);
    for a in 0..dim {
        m[(2 * a, 2 * a)] = s / 3.0;
        m[(2 * a + 1, 2 * a + 1)] = s / 3.0;
        m[(2 * a, 2 * a + 1)] = -s / 6.0;
        m[(2 * a + 1, 2 * a)] = -s / 6.0;
    }
    m
}
