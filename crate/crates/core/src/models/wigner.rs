use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{c64, real, CMatrix};

/// Spin matrices in the `(2l+1)`-dimensional irrep, rows ordered `m = l, l-1, .., -l`.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub lx: CMatrix,
    pub ly: CMatrix,
    pub lz: CMatrix,
}

/// Builds `L_x, L_y, L_z` from the ladder operators for spin `two_l / 2`.
pub fn spin_matrices(two_l: usize) -> SpinMatrices {
    let dim = two_l + 1;
    let l = two_l as f64 / 2.0;
    let m_of = |i: usize| l - i as f64;
    let mut lp = CMatrix::zeros(dim, dim);
    for i in 1..dim {
        let m = m_of(i);
        lp[(i - 1, i)] = real((l * (l + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lm = lp.adjoint();
    let lx = (&lp + &lm) * real(0.5);
    let ly = (&lp - &lm) * c64(0.0, -0.5);
    let lz = CMatrix::from_fn(dim, dim, |i, j| if i == j { real(m_of(i)) } else { real(0.0) });
    SpinMatrices { lx, ly, lz }
}


/// `d^l_{m'm}(theta) = <l m'| exp(-i theta L_y) |l m>` from the Wigner sum,
/// rows `m'` and columns `m` both descending from `+l`.
pub fn wigner_small_d(two_l: usize, theta: f64) -> Result<DMatrix<f64>> {
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    if two_l > 2000 {
        return Err(Error::InvalidArgument(format!("spin {two_l}/2 is too large")));
    }
    let dim = two_l + 1;
    let tl = two_l as i64;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut ln_fact = vec![0.0f64; dim + 1];
    for k in 2..=dim {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let ln_factorial = |n: i64| ln_fact[n as usize];
    Ok(DMatrix::from_fn(dim, dim, |row, col| {
        // doubled projections
        let mp = tl - 2 * row as i64;
        let m = tl - 2 * col as i64;
        let (jpmp, jmmp, jpm, jmm) = ((tl + mp) / 2, (tl - mp) / 2, (tl + m) / 2, (tl - m) / 2);
        let diff = (mp - m) / 2;
        let ln_prefactor = 0.5 * (ln_factorial(jpmp) + ln_factorial(jmmp) + ln_factorial(jpm) + ln_factorial(jmm));
        let lo = 0.max(-diff);
        let hi = jpm.min(jmmp);
        let mut sum = 0.0;
        for k in lo..=hi {
            let sign = if (diff + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let ln_denom = ln_factorial(jpm - k) + ln_factorial(k) + ln_factorial(diff + k) + ln_factorial(jmmp - k);
            sum += sign * (ln_prefactor - ln_denom).exp() * c.powi((tl - diff - 2 * k) as i32) * s.powi((diff + 2 * k) as i32);
        }
        sum
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{commutator, expm_skew};
    use std::f64::consts::PI;

    #[test]
    fn spin_half_and_one() {
        let s = spin_matrices(1);
        assert_eq!(s.lz[(0, 0)], real(0.5));
        assert_eq!(s.lx[(0, 1)], real(0.5));
        let s1 = spin_matrices(2);
        let i = c64(0.0, 1.0);
        assert!((commutator(&s1.lx, &s1.ly) - &s1.lz * i).norm() < 1e-14);
    }

    #[test]
    fn matches_matrix_exponential() {
        for two_l in 0..=10 {
            let ly = spin_matrices(two_l).ly;
            for &theta in &[0.0, 0.3, 1.1, PI / 2.0, 2.9, PI, -0.7] {
                let oracle = expm_skew(&ly, theta).unwrap();
                let d = wigner_small_d(two_l, theta).unwrap();
                for r in 0..=two_l {
                    for c in 0..=two_l {
                        assert!(oracle[(r, c)].im.abs() < 1e-12);
                        assert!((oracle[(r, c)].re - d[(r, c)]).abs() < 1e-12, "l={two_l}/2 theta={theta} ({r},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn spin_half_closed_form() {
        let t = 0.8;
        let d = wigner_small_d(1, t).unwrap();
        let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
        assert!((d[(0, 0)] - c).abs() < 1e-15);
        assert!((d[(0, 1)] + s).abs() < 1e-15);
        assert!((d[(1, 0)] - s).abs() < 1e-15);
    }

    #[test]
    fn large_spin_corner() {
        let d = wigner_small_d(200, 0.9).unwrap();
        assert!((d[(200, 200)] - (0.45f64).cos().powi(200)).abs() < 1e-12);
        assert!(d.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn orthogonal() {
        let d = wigner_small_d(7, 1.234).unwrap();
        let id = DMatrix::<f64>::identity(8, 8);
        assert!((d.transpose() * &d - id).norm() < 1e-12);
    }
}
