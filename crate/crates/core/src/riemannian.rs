//! Retraction, vector transports and constraint drift on the unit L² sphere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};
use crate::field::Field;
use crate::grid::{inner_l2, norm_l2, norm_l2_sqr};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    /// Identity: classical nonlinear CG.
    None,
    #[serde(alias = "vtdr")]
    DifferentiatedRetraction,
    #[default]
    #[serde(alias = "vtrs")]
    RiemannianSubmanifold,
}

/// `(u + xi) / |u + xi|`
pub fn retract(u: &Field, xi: &Field) -> Result<Field> {
    let mut w = u + xi;
    let n = norm_l2(&w);
    if !(n >= 1e-14) {
        return Err(GpError::DegenerateRetraction(n));
    }
    w.scale(1.0 / n);
    Ok(w)
}

/// `(u + tau d) / |u + tau d|` together with the pre-retraction drift.
pub fn retract_step(u: &Field, tau: f64, d: &Field) -> Result<(Field, f64)> {
    let mut w = u.clone();
    w.axpy(C::new(tau, 0.0), d);
    let n2 = norm_l2_sqr(&w);
    let n = n2.sqrt();
    if !(n >= 1e-14) {
        return Err(GpError::DegenerateRetraction(n));
    }
    w.scale(1.0 / n);
    Ok((w, (1.0 - n2).abs()))
}

#[inline]
fn pairing(a: &Field, b: &Field) -> C {
    let z = inner_l2(a, b);
    if cfg!(feature = "real-transport-pairing") {
        C::new(z.re, 0.0)
    } else {
        z
    }
}

/// Transports `xi` from `u` to `retract(u, eta)`.
///
/// With `w = u + eta`, the submanifold transport is
/// `xi - (<xi, w> / |w|^2) w` and the differentiated retraction divides that by
/// `|w|`.
pub fn transport(kind: TransportKind, u: &Field, eta: &Field, xi: &Field) -> Result<Field> {
    if kind == TransportKind::None {
        return Ok(xi.clone());
    }
    let w = u + eta;
    let n2 = norm_l2_sqr(&w);
    if !(n2.sqrt() >= 1e-14) {
        return Err(GpError::DegenerateTransport(n2.sqrt()));
    }
    let coef = pairing(xi, &w) / n2;
    let mut out = Field::lin_comb(C::new(1.0, 0.0), xi, -coef, &w);
    if kind == TransportKind::DifferentiatedRetraction {
        out.scale(1.0 / n2.sqrt());
    }
    Ok(out)
}

/// `|1 - |u|^2|`
pub fn drift(u_hat: &Field) -> f64 {
    (1.0 - norm_l2_sqr(u_hat)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Shape};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Grid::with_nodes(Shape::disk(1.0), 17).unwrap()
    }

    fn random_field(g: &Arc<Grid>, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len())
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::from_values(g, v).unwrap()
    }

    fn unit(g: &Arc<Grid>, seed: u64) -> Field {
        let mut u = random_field(g, seed);
        u.scale(1.0 / norm_l2(&u));
        u
    }

    fn tangent(u: &Field, seed: u64) -> Field {
        let x = random_field(u.grid(), seed);
        let lambda = inner_l2(&x, u).re;
        Field::lin_comb(C::new(1.0, 0.0), &x, C::new(-lambda, 0.0), u)
    }

    #[test]
    fn retract_fixed_point_and_zero_entry() {
        let g = grid();
        let u = unit(&g, 1);
        let r = retract(&u, &Field::zeros(&g)).unwrap();
        assert!(norm_l2(&(&r - &u)) < 1e-15);
        let xi = random_field(&g, 2);
        let r = retract(&Field::zeros(&g), &xi).unwrap();
        let mut expect = xi.clone();
        expect.scale(1.0 / norm_l2(&xi));
        assert!(norm_l2(&(&r - &expect)) < 1e-15);
        assert!(matches!(
            retract(&Field::zeros(&g), &Field::zeros(&g)),
            Err(GpError::DegenerateRetraction(_))
        ));
    }

    #[test]
    fn drift_examples() {
        let g = grid();
        let u = unit(&g, 3);
        assert!(drift(&u) < 1e-13);
        assert!((drift(&(&u * 2.0)) - 3.0).abs() < 1e-13);
        let pg = tangent(&u, 4);
        let tau = 0.3;
        let hat = &u - &(&pg * tau);
        let pred = tau * tau * norm_l2_sqr(&pg);
        assert!((drift(&hat) - pred).abs() < 1e-12 * pred);
        let (_, d) = retract_step(&u, -tau, &pg).unwrap();
        assert!((d - pred).abs() < 1e-12 * pred);
    }

    #[test]
    fn transport_collapses_to_projection_at_zero_step() {
        let g = grid();
        let u = unit(&g, 5);
        // tangent in the complex sense, i.e. <xi, u> = 0
        let x = random_field(&g, 6);
        let xi = Field::lin_comb(C::new(1.0, 0.0), &x, -inner_l2(&x, &u), &u);
        let t = transport(TransportKind::RiemannianSubmanifold, &u, &Field::zeros(&g), &xi).unwrap();
        assert!(norm_l2(&(&t - &xi)) < 1e-13 * norm_l2(&xi));
    }

    #[test]
    fn none_is_identity() {
        let g = grid();
        let u = unit(&g, 7);
        let xi = tangent(&u, 8);
        let t = transport(TransportKind::None, &u, &tangent(&u, 9), &xi).unwrap();
        assert_eq!(t.values(), xi.values());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn retract_has_unit_norm_and_scale_invariance(seed in 0u64..10_000, a in 0.1f64..10.0) {
            let g = grid();
            let u = unit(&g, seed);
            let xi = &random_field(&g, seed + 1) * 0.5;
            let r = retract(&u, &xi).unwrap();
            prop_assert!((norm_l2(&r) - 1.0).abs() < 1e-13);
            let r2 = retract(&(&u * a), &(&xi * a)).unwrap();
            prop_assert!(norm_l2(&(&r - &r2)) < 1e-13);
        }

        #[test]
        fn transports_differ_by_scalar_and_are_tangent(seed in 0u64..10_000, step in 0.01f64..2.0) {
            let g = grid();
            let u = unit(&g, seed);
            let eta = &tangent(&u, seed + 1) * step;
            let xi = tangent(&u, seed + 2);
            let t2 = transport(TransportKind::RiemannianSubmanifold, &u, &eta, &xi).unwrap();
            let t1 = transport(TransportKind::DifferentiatedRetraction, &u, &eta, &xi).unwrap();
            let w = norm_l2(&(&u + &eta));
            prop_assert!(norm_l2(&(&t1 - &(&t2 * (1.0 / w)))) < 1e-13 * norm_l2(&t2));
            let dest = retract(&u, &eta).unwrap();
            prop_assert!(inner_l2(&dest, &t2).re.abs() < 1e-12 * norm_l2(&xi));
            prop_assert!(inner_l2(&dest, &t1).re.abs() < 1e-12 * norm_l2(&xi));
        }

        #[test]
        fn transport_is_linear_in_xi(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = grid();
            let u = unit(&g, seed);
            let eta = tangent(&u, seed + 1);
            let (x, y) = (tangent(&u, seed + 2), tangent(&u, seed + 3));
            for kind in [TransportKind::DifferentiatedRetraction, TransportKind::RiemannianSubmanifold] {
                let comb = Field::lin_comb(C::new(a, 0.0), &x, C::new(b, 0.0), &y);
                let lhs = transport(kind, &u, &eta, &comb).unwrap();
                let rhs = Field::lin_comb(
                    C::new(a, 0.0), &transport(kind, &u, &eta, &x).unwrap(),
                    C::new(b, 0.0), &transport(kind, &u, &eta, &y).unwrap(),
                );
                prop_assert!(norm_l2(&(&lhs - &rhs)) < 1e-12 * (1.0 + norm_l2(&lhs)));
            }
        }
    }
}
