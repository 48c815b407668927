//! Float helpers. `core` has no transcendental functions, so everything goes
//! through `libm`; this also keeps results identical with and without `std`.

use nalgebra::{SMatrix, SVector};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Lower-triangular `L` with `L Lᵀ = m` for a symmetric PSD `m`.
///
/// Pivots at or below `1e-14` times the largest diagonal are treated as zero
/// and their column is cleared, so rank-deficient (including all-zero)
/// matrices are accepted.
pub fn psd_sqrt<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let mut l = SMatrix::<f64, N, N>::zeros();
    let scale = (0..N).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let tiny = 1e-14 * scale;
    for j in 0..N {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tiny {
            continue;
        }
        let djj = sqrt(d);
        l[(j, j)] = djj;
        for i in (j + 1)..N {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    l
}

/// Draws from `N(mean, cov)` given `psd_sqrt(cov)`.
pub fn gaussian<const N: usize, R: rand::Rng + ?Sized>(
    mean: &SVector<f64, N>,
    sqrt_cov: &SMatrix<f64, N, N>,
    rng: &mut R,
) -> SVector<f64, N> {
    use rand_distr::{Distribution, StandardNormal};
    let white = SVector::<f64, N>::from_fn(|_, _| StandardNormal.sample(rng));
    mean + sqrt_cov * white
}

pub fn symmetrize<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix4};

    #[test]
    fn psd_sqrt_reconstructs_full_rank() {
        let m = Matrix2::new(4.0, 2.0, 2.0, 3.0);
        let l = psd_sqrt(&m);
        assert!((l * l.transpose() - m).norm() < 1e-12);
        assert_eq!(l[(0, 1)], 0.0);
    }

    #[test]
    fn psd_sqrt_of_zero_is_zero() {
        assert_eq!(psd_sqrt(&Matrix4::<f64>::zeros()), Matrix4::zeros());
    }

    #[test]
    fn psd_sqrt_rank_deficient() {
        // rank one: v vᵀ
        let v = nalgebra::Vector4::new(1.0, 2.0, 0.0, -1.0);
        let m = v * v.transpose();
        let l = psd_sqrt(&m);
        assert!((l * l.transpose() - m).norm() < 1e-12);
    }
}
