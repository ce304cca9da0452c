//! Matrix-free preconditioned conjugate gradients for Hermitian positive
//! definite complex systems.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GpError, Result};
use crate::par;

type C = Complex64;

/// Outcome of one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `|b - A x| / |b|` (recursively updated residual).
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    pub rel_tol: f64,
    pub max_iter: usize,
}

fn dot(a: &[C], b: &[C]) -> C {
    par::sum(a.len(), C::new(0.0, 0.0), |k| a[k] * b[k].conj())
}

fn norm2(a: &[C]) -> f64 {
    par::sum(a.len(), 0.0, |k| a[k].norm_sqr())
}

/// Solves `A x = b` where `apply(v, out)` writes `A v`. `inv_diag` is the
/// Jacobi preconditioner (reciprocal diagonal), or `None`. `x` holds the
/// initial guess on entry.
pub fn pcg<F>(apply: F, inv_diag: Option<&[f64]>, b: &[C], x: &mut [C], s: CgSettings) -> Result<SolveStats>
where
    F: Fn(&[C], &mut [C]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    let bnorm = norm2(b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
        return Ok(SolveStats::default());
    }
    if !bnorm.is_finite() {
        return Err(GpError::NonFinite("Krylov right-hand side"));
    }
    let precond = |r: &[C], z: &mut [C]| match inv_diag {
        Some(d) => par::fill(z, |k| r[k] * d[k]),
        None => z.copy_from_slice(r),
    };

    let mut r = vec![C::new(0.0, 0.0); n];
    apply(x, &mut r);
    par::update(&mut r, |k, ax| b[k] - ax);
    let mut rel = norm2(&r).sqrt() / bnorm;
    if rel <= s.rel_tol {
        return Ok(SolveStats {
            iterations: 0,
            residual: rel,
        });
    }
    let mut z = vec![C::new(0.0, 0.0); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![C::new(0.0, 0.0); n];
    let mut rz = dot(&r, &z).re;

    for it in 1..=s.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&ap, &p).re;
        if !(pap > 0.0) {
            return Err(GpError::NotPositiveDefinite(pap));
        }
        let alpha = rz / pap;
        par::update(x, |k, v| v + p[k] * alpha);
        par::update(&mut r, |k, v| v - ap[k] * alpha);
        rel = norm2(&r).sqrt() / bnorm;
        if !rel.is_finite() {
            return Err(GpError::NonFinite("Krylov residual"));
        }
        if rel <= s.rel_tol {
            return Ok(SolveStats {
                iterations: it,
                residual: rel,
            });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        par::update(&mut p, |k, v| z[k] + v * beta);
    }
    Err(GpError::SolverDiverged {
        iterations: s.max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hpd(n: usize, seed: u64) -> DMatrix<C> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        &b * b.adjoint() + DMatrix::identity(n, n) * C::new(n as f64, 0.0)
    }

    #[test]
    fn solves_dense_hermitian_system() {
        let n = 40;
        let a = random_hpd(n, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b: Vec<C> = (0..n).map(|_| C::new(rng.gen(), rng.gen())).collect();
        let diag: Vec<f64> = (0..n).map(|i| 1.0 / a[(i, i)].re).collect();
        let mut x = vec![C::new(0.0, 0.0); n];
        let apply = |v: &[C], out: &mut [C]| {
            let y = &a * DVector::from_column_slice(v);
            out.copy_from_slice(y.as_slice());
        };
        let stats = pcg(
            apply,
            Some(&diag),
            &b,
            &mut x,
            CgSettings {
                rel_tol: 1e-12,
                max_iter: 200,
            },
        )
        .unwrap();
        assert!(stats.residual <= 1e-12);
        let exact = a.clone().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let err = (DVector::from_column_slice(&x) - exact).norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![C::new(1.0, 1.0); 3];
        let st = pcg(
            |v, o| o.copy_from_slice(v),
            None,
            &[C::new(0.0, 0.0); 3],
            &mut x,
            CgSettings {
                rel_tol: 1e-8,
                max_iter: 5,
            },
        )
        .unwrap();
        assert_eq!(st.iterations, 0);
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn indefinite_operator_detected() {
        let mut x = vec![C::new(0.0, 0.0); 2];
        let r = pcg(
            |v, o| {
                o[0] = -v[0];
                o[1] = -v[1];
            },
            None,
            &[C::new(1.0, 0.0); 2],
            &mut x,
            CgSettings {
                rel_tol: 1e-8,
                max_iter: 5,
            },
        );
        assert!(matches!(r, Err(GpError::NotPositiveDefinite(_))));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let n = 30;
        let a = random_hpd(n, 3);
        let b = vec![C::new(1.0, 0.0); n];
        let mut x = vec![C::new(0.0, 0.0); n];
        let apply = |v: &[C], out: &mut [C]| {
            let y = &a * DVector::from_column_slice(v);
            out.copy_from_slice(y.as_slice());
        };
        match pcg(
            apply,
            None,
            &b,
            &mut x,
            CgSettings {
                rel_tol: 1e-14,
                max_iter: 2,
            },
        ) {
            Err(GpError::SolverDiverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0 && residual < 1.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
