//! Independent oracles for the fast-field layer: elementary-function values,
//! an RK4 integration of the fast ODE, and composite-trapezoid quadrature.

use frontlab::fast_field::{
    fast_eigenvalues, fast_front_eval, jump_integral_j, stability_integrals, u_inhomogeneous, FastFront,
};
use frontlab::model::{CubicG, DecomposedReaction, LinearG, PowerH, ReactionSpec, TableH};
use proptest::prelude::*;

// Frozen from mpmath at 30 digits.
const U0_AT_1: f64 = 0.608_859_365_013_913_8;
const P0_AT_1: f64 = 0.444_975_419_821_943_1;
const UIN_AT_1: f64 = 0.526_917_392_417_928_4;
const J_AT_0: f64 = 0.942_809_041_582_063_4;
const J_AT_2: f64 = 4.898_979_485_566_356;

/// Composite trapezoid on [−X, X] with `n` panels.
fn trapezoid(f: impl Fn(f64) -> f64, x: f64, n: usize) -> f64 {
    let h = 2.0 * x / n as f64;
    let mut s = 0.5 * (f(-x) + f(x));
    for i in 1..n {
        s += f(-x + h * i as f64);
    }
    s * h
}

/// RK4 for `u'' = −(1+v0−u²)u` from the exact state at ξ = 0.
fn rk4_front(v0: f64, xi_end: f64, steps: usize) -> (f64, f64) {
    let s = 1.0 + v0;
    let rhs = |y: [f64; 2]| [y[1], -(s - y[0] * y[0]) * y[0]];
    let mut y = [0.0, s / 2f64.sqrt()];
    let h = xi_end / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    (y[0], y[1])
}

fn library() -> Vec<(&'static str, ReactionSpec)> {
    vec![
        ("power m=0", ReactionSpec::new(PowerH::new(1.0, 0).unwrap(), LinearG::new(-1.0))),
        ("power m=1", ReactionSpec::new(PowerH::new(1.0, 1).unwrap(), LinearG::new(-1.0))),
        ("power m=1 h0=-1", ReactionSpec::new(PowerH::new(-1.0, 1).unwrap(), LinearG::new(-1.0))),
        ("power m=2", ReactionSpec::new(PowerH::new(0.5, 2).unwrap(), CubicG { g1: -1.0, g2: 0.0, g3: 0.2 })),
        (
            "table",
            ReactionSpec::new(
                TableH::new(vec![vec![0.5, 0.3], vec![1.0, -0.2], vec![0.1]]),
                LinearG::new(-0.5),
            ),
        ),
        (
            "decomposed",
            DecomposedReaction::new(|u, v| (1.0 + v - u) * (u + 0.2 * v * u) - 0.7 * v).spec(),
        ),
    ]
}

#[test]
fn front_matches_elementary_values_and_ode() {
    let (u, p) = fast_front_eval(1.0, 0.0).unwrap();
    assert!((u - U0_AT_1).abs() < 1e-14);
    assert!((p - P0_AT_1).abs() < 1e-14);
    let (u_ode, p_ode) = rk4_front(0.0, 1.0, 2000);
    assert!((u - u_ode).abs() < 1e-11 && (p - p_ode).abs() < 1e-11);
    assert!((u_inhomogeneous(1.0, 0.0).unwrap() - UIN_AT_1).abs() < 1e-14);
    for v0 in [0.5, 3.0] {
        let (u, p) = fast_front_eval(2.5, v0).unwrap();
        let (uo, po) = rk4_front(v0, 2.5, 5000);
        assert!((u - uo).abs() < 1e-10 && (p - po).abs() < 1e-10);
    }
}

#[test]
fn u_in_tail_limit() {
    assert!((u_inhomogeneous(60.0, 0.0).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn u_in_solves_the_inhomogeneous_equation() {
    // u_in'' from the fast ODE: u0'' = −(s−u0²)u0 and u0''' = −(s−3u0²)u0'
    for v0 in [0.0, 0.8, 4.0] {
        let f = FastFront::new(v0).unwrap();
        let s = 1.0 + v0;
        let mut worst = 0.0f64;
        for i in 0..=4000 {
            let xi = -20.0 + 0.01 * i as f64;
            let (u0, p0) = (f.u0(xi), f.p0(xi));
            let u0pp = -(s - u0 * u0) * u0;
            let u0ppp = -(s - 3.0 * u0 * u0) * p0;
            let upp = (3.0 * u0pp + xi * u0ppp) / (2.0 * s);
            let r = upp + (s - 3.0 * u0 * u0) * f.u_in(xi) + u0;
            worst = worst.max(r.abs());
        }
        assert!(worst < 1e-8, "v0={v0}: residual {worst}");
    }
}

#[test]
fn j_closed_forms() {
    let spec = ReactionSpec::new(PowerH::new(1.0, 1).unwrap(), LinearG::new(-1.0));
    let j0 = jump_integral_j(0.0, &spec).unwrap().value;
    let j2 = jump_integral_j(2.0, &spec).unwrap().value;
    assert!((j0 - J_AT_0).abs() < 1e-9, "{j0}");
    assert!((j2 - J_AT_2).abs() < 1e-9, "{j2}");
    let f = FastFront::new(0.0).unwrap();
    let trap = trapezoid(|x| (1.0 - f.u0(x).powi(2)) * f.u0(x).powi(2), 40.0, 200_000);
    assert!((j0 - trap).abs() < 1e-9);
}

#[test]
fn stability_integral_closed_forms() {
    let c = ReactionSpec::new(PowerH::new(1.0, 0).unwrap(), LinearG::new(-1.0));
    for v0 in [0.0, 1.5] {
        let si = stability_integrals(v0, &c).unwrap();
        assert!(si.i2.abs() < 1e-12);
        let expected = 2.0 * 2f64.sqrt() * (1.0 + v0).sqrt();
        assert!((si.i1 - expected).abs() < 1e-9);
    }
    let q = ReactionSpec::new(PowerH::new(1.0, 1).unwrap(), LinearG::new(-1.0));
    let si = stability_integrals(0.0, &q).unwrap();
    assert!((si.i1 - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-9);
    assert!((si.i3 + 2f64.sqrt() / 3.0).abs() < 1e-9);
    let z = ReactionSpec::new(PowerH::new(0.0, 1).unwrap(), LinearG::new(-1.0));
    let si = stability_integrals(0.7, &z).unwrap();
    assert_eq!((si.i1, si.i2, si.i3), (0.0, 0.0, 0.0));
}

#[test]
fn i3_identity_across_library() {
    for (name, spec) in library() {
        for v0 in [0.0, 0.5, 2.0, 5.0] {
            let si = stability_integrals(v0, &spec).unwrap();
            let r = (si.i3 + 0.5 * si.i1).abs();
            assert!(r <= 1e-7 * (1.0 + si.i1.abs()), "{name} v0={v0}: {r:e}");
        }
    }
}

#[test]
fn fast_eigenvalue_table() {
    assert_eq!(fast_eigenvalues(0.0).unwrap(), (0.0, -1.5, -2.0));
    assert_eq!(fast_eigenvalues(1.0).unwrap(), (0.0, -3.0, -4.0));
}

proptest! {
    #[test]
    fn front_parity_and_hamiltonian(xi in 0.0f64..30.0, v0 in -0.95f64..9.0) {
        let f = FastFront::new(v0).unwrap();
        prop_assert!((f.u0(xi) + f.u0(-xi)).abs() <= 1e-12);
        prop_assert!((f.p0(xi) - f.p0(-xi)).abs() <= 1e-12);
        let s = 1.0 + v0;
        let u = f.u0(xi);
        let ham = 0.5 * f.p0(xi).powi(2) + 0.5 * s * u * u - 0.25 * u.powi(4);
        prop_assert!((ham - 0.25 * s * s).abs() <= 1e-10 * s.max(1.0).powi(2));
    }

    #[test]
    fn front_reaches_the_slow_manifold(v0 in -0.95f64..9.0) {
        let f = FastFront::new(v0).unwrap();
        let amp = (1.0 + v0).sqrt();
        prop_assert!((f.u0(f.cutoff()) - amp).abs() < 1e-8);
        prop_assert!((f.u0(-f.cutoff()) + amp).abs() < 1e-8);
    }

    #[test]
    fn p0_is_the_derivative(xi in -10.0f64..10.0, v0 in -0.5f64..5.0) {
        let f = FastFront::new(v0).unwrap();
        let h = 1e-3;
        let fd = (8.0 * (f.u0(xi + h) - f.u0(xi - h)) - (f.u0(xi + 2.0 * h) - f.u0(xi - 2.0 * h)))
            / (12.0 * h);
        prop_assert!((fd - f.p0(xi)).abs() <= 1e-10 * (1.0 + v0).powi(3));
    }

    #[test]
    fn j_scaling_law(v0 in -0.8f64..8.0, h0 in prop_oneof![Just(1.0), Just(-1.0), Just(2.5)]) {
        let spec = ReactionSpec::new(PowerH::new(h0, 1).unwrap(), LinearG::new(-1.0));
        let j0 = jump_integral_j(0.0, &spec).unwrap().value;
        let jv = jump_integral_j(v0, &spec).unwrap().value;
        let expected = (1.0 + v0).powf(1.5) * j0;
        prop_assert!((jv - expected).abs() <= 1e-8 * expected.abs());
    }
}
