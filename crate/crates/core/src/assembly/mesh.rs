use crate::error::{Error, Result};

/// Uniform grid of `cells^dim` squares or cubes on the unit domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructuredMesh {
    dim: usize,
    cells: usize,
}

/// A cell face as seen from one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    /// Global face index.
    pub index: usize,
    /// Normal axis.
    pub axis: usize,
    /// +1 when the outward normal of the cell points along +axis.
    pub sign: f64,
    /// Position of the face along its axis, in 0..=cells.
    pub level: usize,
}

impl StructuredMesh {
    pub fn new(dim: usize, cells: usize) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
        }
        if cells < 1 {
            return Err(Error::Config("mesh needs at least one cell per direction".into()));
        }
        Ok(Self { dim, cells })
    }

    /// Mesh with spacing h; 1/h must be a positive integer.
    pub fn from_h(dim: usize, h: f64) -> Result<Self> {
        let c = (1.0 / h).round();
        if !(h > 0.0) || (c * h - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("1/h must be an integer, got h = {h}")));
        }
        Self::new(dim, c as usize)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn face_measure(&self) -> f64 {
        self.h().powi(self.dim as i32 - 1)
    }

    pub fn node_count(&self) -> usize {
        (self.cells + 1).pow(self.dim as u32)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    fn faces_per_axis(&self) -> usize {
        (self.cells + 1) * self.cells.pow(self.dim as u32 - 1)
    }

    pub fn face_count(&self) -> usize {
        self.dim * self.faces_per_axis()
    }

    pub fn node_index(&self, c: &[usize]) -> usize {
        let n = self.cells + 1;
        c.iter().rev().fold(0, |acc, &x| acc * n + x)
    }

    pub fn node_coords(&self, node: usize) -> [usize; 3] {
        let n = self.cells + 1;
        let mut out = [0; 3];
        let mut r = node;
        for o in out.iter_mut().take(self.dim) {
            *o = r % n;
            r /= n;
        }
        out
    }

    pub fn cell_index(&self, c: &[usize]) -> usize {
        c.iter().rev().fold(0, |acc, &x| acc * self.cells + x)
    }

    pub fn cell_coords(&self, cell: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut r = cell;
        for o in out.iter_mut().take(self.dim) {
            *o = r % self.cells;
            r /= self.cells;
        }
        out
    }

    /// Nodes of a cell in tensor order: bit d of the local index selects the
    /// upper node along axis d.
    pub fn cell_nodes(&self, cell: usize) -> Vec<usize> {
        let c = self.cell_coords(cell);
        (0..1usize << self.dim)
            .map(|a| {
                let mut p = [0; 3];
                for d in 0..self.dim {
                    p[d] = c[d] + ((a >> d) & 1);
                }
                self.node_index(&p[..self.dim])
            })
            .collect()
    }

    /// Index of the face normal to `axis` at the given position; coordinate
    /// `axis` runs over 0..=cells, the others over 0..cells.
    pub fn face_index(&self, axis: usize, pos: &[usize]) -> usize {
        let mut idx = 0;
        for d in (0..self.dim).rev() {
            let ext = if d == axis { self.cells + 1 } else { self.cells };
            idx = idx * ext + pos[d];
        }
        axis * self.faces_per_axis() + idx
    }

    /// Faces of a cell ordered (axis 0 minus, axis 0 plus, axis 1 minus, ...).
    pub fn cell_faces(&self, cell: usize) -> Vec<Face> {
        let c = self.cell_coords(cell);
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for s in 0..2 {
                let mut p = c;
                p[axis] += s;
                out.push(Face {
                    index: self.face_index(axis, &p[..self.dim]),
                    axis,
                    sign: if s == 1 { 1.0 } else { -1.0 },
                    level: p[axis],
                });
            }
        }
        out
    }

    /// Pairs (i, j), i < j, of face-neighbouring cells that lie in the same
    /// 2^d macro-element.
    pub fn macro_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for cell in 0..self.cell_count() {
            let c = self.cell_coords(cell);
            for axis in 0..self.dim {
                if c[axis] % 2 == 0 && c[axis] + 1 < self.cells {
                    let mut q = c;
                    q[axis] += 1;
                    out.push((cell, self.cell_index(&q[..self.dim])));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_in_two_and_three_dimensions() {
        let m2 = StructuredMesh::new(2, 40).unwrap();
        assert_eq!((m2.node_count(), m2.cell_count(), m2.face_count()), (1681, 1600, 3280));
        let m3 = StructuredMesh::new(3, 10).unwrap();
        assert_eq!((m3.node_count(), m3.cell_count(), m3.face_count()), (1331, 1000, 3300));
    }

    #[test]
    fn every_interior_face_has_two_cells() {
        let m = StructuredMesh::new(3, 3).unwrap();
        let mut count = vec![0; m.face_count()];
        for c in 0..m.cell_count() {
            for f in m.cell_faces(c) {
                count[f.index] += 1;
            }
        }
        let boundary = count.iter().filter(|&&k| k == 1).count();
        assert_eq!(boundary, 6 * 9);
        assert!(count.iter().all(|&k| k == 1 || k == 2));
    }

    #[test]
    fn from_h_requires_integer_reciprocal() {
        assert_eq!(StructuredMesh::from_h(2, 0.025).unwrap().cells(), 40);
        assert!(StructuredMesh::from_h(2, 0.3).is_err());
    }

    #[test]
    fn macro_pairs_per_full_macro() {
        let m = StructuredMesh::new(3, 4).unwrap();
        assert_eq!(m.macro_pairs().len(), 8 * 12);
    }
}
