//! Small dense linear algebra on top of nalgebra: factor-and-solve helpers
//! plus evaluators for the matrix identities the regression bounds rest on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn cholesky(a: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    a.clone().cholesky().ok_or_else(|| {
        Error::Numeric(format!(
            "matrix of size {} is not positive definite (diagonal range {:e}..{:e})",
            a.nrows(),
            a.diagonal().min(),
            a.diagonal().max()
        ))
    })
}

/// Solves `A z = b` for symmetric positive definite `A`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(cholesky(a)?.solve(b))
}

/// `ln det A` for symmetric positive definite `A`.
pub fn spd_log_det(a: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky(a)?;
    Ok(2.0
        * chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.ln())
            .sum::<f64>())
}

/// Both sides of `B (aI + CB)⁻¹ = (aI + BC)⁻¹ B` for `B` of size n×m and `C`
/// of size m×n.
pub fn push_through_sides(
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    a: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, m) = b.shape();
    if c.shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            actual: c.len(),
        });
    }
    let small = DMatrix::identity(m, m) * a + c * b;
    let large = DMatrix::identity(n, n) * a + b * c;
    let singular = || Error::Numeric("singular matrix in push-through identity".into());
    // X (aI + CB) = B  ⇔  (aI + CB)' X' = B'.
    let left = small
        .transpose()
        .lu()
        .solve(&b.transpose())
        .ok_or_else(singular)?
        .transpose();
    let right = large.lu().solve(b).ok_or_else(singular)?;
    Ok((left, right))
}

/// Both sides of `det(I_n + BC/a) = det(I_m + CB/a)`, the form in which the
/// kernel bound uses the determinant identity. For `n ≠ m` the unscaled
/// `det(aI_n + BC)` differs from `det(aI_m + CB)` by `a^{n-m}`.
pub fn det_identity_sides(b: &DMatrix<f64>, c: &DMatrix<f64>, a: f64) -> Result<(f64, f64)> {
    let (n, m) = b.shape();
    if c.shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            actual: c.len(),
        });
    }
    let large = DMatrix::identity(n, n) + b * c / a;
    let small = DMatrix::identity(m, m) + c * b / a;
    Ok((large.determinant(), small.determinant()))
}

/// `min_θ θ'Aθ + c'θ`, evaluated at the minimizer `θ = -A⁻¹c/2`.
pub fn quadratic_min(a: &DMatrix<f64>, c: &DVector<f64>) -> Result<f64> {
    let theta = spd_solve(a, c)? * -0.5;
    Ok((theta.transpose() * a * &theta)[(0, 0)] + c.dot(&theta))
}

/// `min(θ'Aθ + b'θ + z'θ) - min(θ'Aθ + b'θ - z'θ)` by direct minimization,
/// paired with the closed form `-b'A⁻¹z`.
pub fn min_difference_sides(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<(f64, f64)> {
    let direct = quadratic_min(a, &(b + z))? - quadratic_min(a, &(b - z))?;
    let closed = -b.dot(&spd_solve(a, z)?);
    Ok((direct, closed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 0.5]));
        assert!((spd_log_det(&a).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(spd_log_det(&(a * -1.0)).is_err());
    }

    #[test]
    fn identities_on_a_small_example() {
        let b = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let c = DMatrix::from_row_slice(3, 2, &[0.3, 1.0, 2.0, -0.4, 1.5, 0.2]);
        let (l, r) = push_through_sides(&b, &c, 0.7).unwrap();
        assert!((l - r).abs().max() < 1e-12);
        let (d1, d2) = det_identity_sides(&b, &c, 0.7).unwrap();
        assert!((d1 - d2).abs() < 1e-12 * d1.abs());
    }

    #[test]
    fn quadratic_minimum_in_one_dimension() {
        // 2θ² + 4θ has minimum -2 at θ = -1.
        let a = DMatrix::from_element(1, 1, 2.0);
        assert!((quadratic_min(&a, &DVector::from_element(1, 4.0)).unwrap() + 2.0).abs() < 1e-15);
    }
}
