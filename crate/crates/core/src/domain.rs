//! Finite input domains stored as a flat coordinate buffer.

use crate::error::{invalid, Result};

/// A finite ordered set of points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dim: usize,
    coords: Vec<f64>,
    grid: Option<GridShape>,
}

/// Shape of a uniform lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridShape {
    pub resolution: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points
            .first()
            .map(|p| p.as_ref().len())
            .ok_or_else(|| invalid("domain needs at least one point"))?;
        if dim == 0 {
            return Err(invalid("points must have positive dimension"));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(invalid("all domain points must share one dimension"));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self {
            dim,
            coords,
            grid: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    pub fn select(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        indices.iter().map(|&i| self.point(i).to_vec()).collect()
    }

    pub fn grid(&self) -> Option<&GridShape> {
        self.grid.as_ref()
    }

    /// Per-axis `(min, max)` over the points.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for (a, &x) in p.iter().enumerate() {
                lo[a] = lo[a].min(x);
                hi[a] = hi[a].max(x);
            }
        }
        (lo, hi)
    }
}

/// Uniform lattice with `resolution` points per axis, both endpoints
/// included, in row-major order (the last axis varies fastest).
pub fn make_grid(dim: usize, resolution: usize, lower: &[f64], upper: &[f64]) -> Result<Domain> {
    if dim == 0 || resolution == 0 {
        return Err(invalid("grid dimension and resolution must be positive"));
    }
    if lower.len() != dim || upper.len() != dim {
        return Err(invalid(format!("grid bounds must have {dim} entries per side")));
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
        return Err(invalid("grid bounds must be finite with lower <= upper"));
    }
    let count = resolution
        .checked_pow(dim as u32)
        .ok_or_else(|| invalid("grid too large"))?;
    let axis = |a: usize, j: usize| {
        if resolution == 1 {
            lower[a]
        } else {
            lower[a] + (upper[a] - lower[a]) * j as f64 / (resolution - 1) as f64
        }
    };
    let mut coords = Vec::with_capacity(count * dim);
    for i in 0..count {
        let mut rem = i;
        let mut idx = vec![0; dim];
        for a in (0..dim).rev() {
            idx[a] = rem % resolution;
            rem /= resolution;
        }
        coords.extend(idx.iter().enumerate().map(|(a, &j)| axis(a, j)));
    }
    Ok(Domain {
        dim,
        coords,
        grid: Some(GridShape {
            resolution,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_grid() {
        let g = make_grid(1, 3, &[0.0], &[1.0]).unwrap();
        assert_eq!(g.to_vecs(), vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn two_dimensional_grid_size_and_order() {
        let g = make_grid(2, 50, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.len(), 2500);
        assert_eq!(g.point(0), &[0.0, 0.0]);
        assert_eq!(g.point(1), &[0.0, 1.0 / 49.0]);
        assert_eq!(g.point(50), &[1.0 / 49.0, 0.0]);
        assert_eq!(g.point(2499), &[1.0, 1.0]);
        assert_eq!(g, make_grid(2, 50, &[0.0, 0.0], &[1.0, 1.0]).unwrap());
        assert!(g.points().all(|p| p.iter().all(|&x| (0.0..=1.0).contains(&x))));
    }

    #[test]
    fn invalid_grids() {
        assert!(make_grid(0, 3, &[], &[]).is_err());
        assert!(make_grid(1, 3, &[1.0], &[0.0]).is_err());
        assert!(make_grid(2, 3, &[0.0], &[1.0]).is_err());
        assert!(Domain::from_points::<Vec<f64>>(&[]).is_err());
        assert!(Domain::from_points(&[vec![0.0], vec![0.0, 1.0]]).is_err());
    }
}
