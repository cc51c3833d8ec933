//! Four-point cubic Lagrange interpolation on a periodic uniform grid.

use core::ops::{Add, Mul};

use crate::grid::Grid;

/// Interpolates grid samples at an arbitrary position, wrapping the stencil
/// periodically. Exact for polynomials up to degree three.
pub fn cubic<T>(grid: &Grid, values: &[T], x: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len() as isize;
    let u = (x - grid.x_min()) / grid.dx();
    let base = u.floor();
    let s = u - base;
    let i = base as isize;
    let at = |k: isize| values[(i + k).rem_euclid(n) as usize];
    let (sm1, sp1, sm2) = (s - 1.0, s + 1.0, s - 2.0);
    let w_m1 = -s * sm1 * sm2 / 6.0;
    let w_0 = sp1 * sm1 * sm2 / 2.0;
    let w_1 = -sp1 * s * sm2 / 2.0;
    let w_2 = sp1 * s * sm1 / 6.0;
    at(-1) * w_m1 + at(0) * w_0 + at(1) * w_1 + at(2) * w_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn reproduces_cubics() {
        let grid = Grid::new(-4.0, 4.0, 64).unwrap();
        let f = |x: f64| 0.3 * x * x * x - x * x + 2.0 * x - 0.5;
        let values: Vec<f64> = grid.points().map(f).collect();
        for &x in &[-1.234, 0.0, 0.01, 2.75] {
            assert!((cubic(&grid, &values, x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn hits_nodes() {
        let grid = Grid::new(0.0, 1.0, 16).unwrap();
        let values: Vec<f64> = (0..16).map(|k| (k * k) as f64).collect();
        for k in 0..16 {
            assert_eq!(cubic(&grid, &values, grid.point(k)), values[k]);
        }
    }
}
