//! Thin safe wrapper around LAPACK's general complex eigensolver (`?geev`).
//!
//! Truncating a unitary operator breaks unitarity, so the spectrum module
//! needs a full non-Hermitian dense solver rather than a Hermitian one.

use num_complex::Complex;

use crate::real::Real;

/// Scalars for which a LAPACK `geev` binding exists (`f32` -> `cgeev`,
/// `f64` -> `zgeev`).
pub trait EigScalar: Real {
    /// # Safety
    /// Raw LAPACK call; all pointers must reference buffers of the
    /// documented sizes for `?geev` with `jobvl='N'`, `jobvr='V'`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn geev(
        n: i32,
        a: *mut Complex<Self>,
        w: *mut Complex<Self>,
        vr: *mut Complex<Self>,
        work: *mut Complex<Self>,
        lwork: i32,
        rwork: *mut Self,
        info: *mut i32,
    );
}

macro_rules! impl_eig_scalar {
    ($t:ty, $geev:path) => {
        impl EigScalar for $t {
            unsafe fn geev(
                n: i32,
                a: *mut Complex<Self>,
                w: *mut Complex<Self>,
                vr: *mut Complex<Self>,
                work: *mut Complex<Self>,
                lwork: i32,
                rwork: *mut Self,
                info: *mut i32,
            ) {
                let jobvl = b'N' as std::ffi::c_char;
                let jobvr = b'V' as std::ffi::c_char;
                $geev(
                    &jobvl,
                    &jobvr,
                    &n,
                    a.cast(),
                    &n,
                    w.cast(),
                    std::ptr::null_mut(),
                    &1,
                    vr.cast(),
                    &n,
                    work.cast(),
                    &lwork,
                    rwork,
                    info,
                )
            }
        }
    };
}

impl_eig_scalar!(f32, lapack_sys::cgeev_);
impl_eig_scalar!(f64, lapack_sys::zgeev_);

/// Full eigendecomposition of a dense column-major complex matrix.
///
/// Returns `(eigenvalues, right_eigenvectors)` with eigenvectors stored
/// column-major, each normalized to unit Euclidean norm by LAPACK. On
/// failure the raw `info` code is returned.
pub fn eig_dense<T: EigScalar>(
    dim: usize,
    matrix: &[Complex<T>],
) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>), i32> {
    assert_eq!(matrix.len(), dim * dim, "matrix buffer size mismatch");
    let n = i32::try_from(dim).expect("dimension fits in i32");
    let zero = Complex::new(T::zero(), T::zero());

    let mut a = matrix.to_vec();
    let mut w = vec![zero; dim];
    let mut vr = vec![zero; dim * dim];
    let mut rwork = vec![T::zero(); 2 * dim];
    let mut info = 0i32;

    // Workspace query.
    let mut probe = [zero];
    unsafe {
        T::geev(
            n,
            a.as_mut_ptr(),
            w.as_mut_ptr(),
            vr.as_mut_ptr(),
            probe.as_mut_ptr(),
            -1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    let lwork = probe[0].re.to_f64().unwrap().max(1.0) as usize;
    let mut work = vec![zero; lwork];
    unsafe {
        T::geev(
            n,
            a.as_mut_ptr(),
            w.as_mut_ptr(),
            vr.as_mut_ptr(),
            work.as_mut_ptr(),
            lwork as i32,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    Ok((w, vr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_x_eigenpairs() {
        let z = Complex::new(0.0f64, 0.0);
        let one = Complex::new(1.0f64, 0.0);
        // column-major [[0, 1], [1, 0]]
        let m = vec![z, one, one, z];
        let (w, vr) = eig_dense(2, &m).unwrap();
        let mut eigs: Vec<f64> = w.iter().map(|v| v.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
        for col in 0..2 {
            let v = &vr[2 * col..2 * col + 2];
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            // residual ||A v - lambda v||
            let av = [v[1], v[0]];
            let r: f64 = av
                .iter()
                .zip(v)
                .map(|(a, b)| (a - w[col] * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn single_precision_path_works() {
        let z = Complex::new(0.0f32, 0.0);
        let m = vec![
            Complex::new(2.0f32, 0.0),
            z,
            z,
            Complex::new(-3.0f32, 0.0),
        ];
        let (w, _) = eig_dense(2, &m).unwrap();
        let mut eigs: Vec<f32> = w.iter().map(|v| v.re).collect();
        eigs.sort_by(f32::total_cmp);
        assert!((eigs[0] + 3.0).abs() < 1e-5);
        assert!((eigs[1] - 2.0).abs() < 1e-5);
    }
}
