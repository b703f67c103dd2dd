//! Q1 displacement, RT0 flux and P0 pressure on the unit square or cube,
//! in mixed (MFE) and mixed-hybrid (MHFE) form, mapped onto the
//! double saddle-point block structure.

mod element;
mod mesh;
mod mfe;
mod mhfe;
mod system;

pub use element::{q1_divergence, q1_stiffness, rt0_mass};
pub use mesh::{Face, StructuredMesh};
pub use mfe::{assemble_mfe, mfe_to_dsp, MfeBlocks};
pub use mhfe::{assemble_mhfe, condense_mhfe, MhfeBlocks};
pub use system::{export_system, import_blocks, manufactured_rhs, Discretization, DspSystem, SystemMeta};

use crate::error::{Error, Result};

/// Material and time-step parameters (SI units).
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialProps {
    /// Young's modulus E.
    pub young: f64,
    /// Poisson ratio ν.
    pub poisson: f64,
    /// Biot coefficient b.
    pub biot: f64,
    /// Constrained specific storage S_ε.
    pub storage: f64,
    /// Isotropic permeability κ.
    pub permeability: f64,
    /// Fluid viscosity μ.
    pub viscosity: f64,
    /// Time step Δt.
    pub dt: f64,
    /// Magnitude of the downward traction on the top boundary.
    pub traction: f64,
    /// Multiplier of the macro-element stabilization weight b²|f|h/K_dr.
    pub stab_factor: f64,
}

impl Default for MaterialProps {
    fn default() -> Self {
        Self {
            young: 1e5,
            poisson: 0.4,
            biot: 1.0,
            storage: 0.0,
            permeability: 1e-7,
            viscosity: 1e3,
            dt: 1e-5,
            traction: 1e4,
            stab_factor: 0.25,
        }
    }
}

impl MaterialProps {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("{what} = {v} is out of range")));
        if !(self.young > 0.0) {
            return bad("young", self.young);
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return bad("poisson", self.poisson);
        }
        if !(self.permeability > 0.0) {
            return bad("permeability", self.permeability);
        }
        if !(self.viscosity > 0.0) {
            return bad("viscosity", self.viscosity);
        }
        if !(self.dt > 0.0) {
            return bad("dt", self.dt);
        }
        if !(self.storage >= 0.0) {
            return bad("storage", self.storage);
        }
        if !(self.stab_factor >= 0.0) {
            return bad("stab_factor", self.stab_factor);
        }
        if !self.biot.is_finite() || !self.traction.is_finite() {
            return Err(Error::Config("biot and traction must be finite".into()));
        }
        Ok(())
    }

    /// Lamé parameters (λ, μ).
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young, self.poisson);
        (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
    }

    /// Drained bulk modulus K_dr.
    pub fn bulk_drained(&self) -> f64 {
        self.young / (3.0 * (1.0 - 2.0 * self.poisson))
    }

    /// Fluid mobility κ/μ.
    pub fn mobility(&self) -> f64 {
        self.permeability / self.viscosity
    }
}

/// Macro-element jump stabilization on P0 pressures: for every pair of
/// face-neighbouring cells inside the same 2^d macro-element adds
/// w (e_i - e_j)(e_i - e_j)ᵀ with w = stab_factor · b² |f| h / K_dr.
pub(crate) fn stabilization(mesh: &StructuredMesh, props: &MaterialProps) -> crate::linalg::SparseMatrix {
    let m = mesh.cell_count();
    let w = props.stab_factor * props.biot * props.biot * mesh.face_measure() * mesh.h() / props.bulk_drained();
    let mut t = Vec::new();
    if w != 0.0 {
        for (i, j) in mesh.macro_pairs() {
            t.push((i, i, w));
            t.push((j, j, w));
            t.push((i, j, -w));
            t.push((j, i, -w));
        }
    }
    crate::linalg::SparseMatrix::from_triplets(m, m, &t)
}
