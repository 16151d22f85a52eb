mod common;

use common::*;
use dq_core::fedosov::{solve_gamma, FedosovConnection, FedosovSolution};
use dq_core::forms::EForm;
use dq_core::fps::{q, Caps, Series};
use proptest::prelude::*;

fn caps() -> Caps {
    Caps::new(2, 6, 30)
}

fn solved(seed: u64, twist: bool) -> (FedosovSolution, rand_chacha::ChaCha8Rng) {
    let mut r = rng(seed);
    let caps = caps();
    let chart = random_darboux_chart(&mut r, caps);
    let conn = FedosovConnection::new(chart, standard_symplectic(caps)).unwrap();
    let omega = if twist {
        let c = series(&mut r, 2, caps, 2, 0, 1, 0).shift_eps(1);
        EForm::monomial_form(c, &[0, 1])
    } else {
        EForm::zero(2, caps, 2)
    };
    (solve_gamma(conn, &omega).unwrap(), r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn curvature_identity_and_bianchi(seed in any::<u64>()) {
        let mut r = rng(seed);
        let caps = caps();
        let conn = FedosovConnection::new(random_darboux_chart(&mut r, caps), standard_symplectic(caps)).unwrap();
        prop_assert!(conn.apply(conn.curvature()).unwrap().is_zero());
        prop_assert!(conn.curvature().eps_coefficient(0).is_zero());
        for p in 0..2 {
            let s = form(&mut r, 2, caps, p, 3, 3, 1, 1);
            let dd = conn.apply(&conn.apply(&s).unwrap()).unwrap();
            prop_assert_eq!(dd, conn.commutator(conn.curvature(), &s).unwrap());
        }
    }

    #[test]
    fn flatness_and_leibniz(seed in any::<u64>(), twist in any::<bool>()) {
        let (sol, mut r) = solved(seed, twist);
        let caps = caps();
        prop_assert!(dq_core::jet::delta_star(sol.gamma()).is_zero());
        prop_assert_eq!(sol.effective_curvature().unwrap(), sol.omega().clone());
        let conn = sol.connection();
        for p in 0..2 {
            let s = form(&mut r, 2, caps, p, 3, 3, 1, 1);
            prop_assert!(sol.dbar_apply(&sol.dbar_apply(&s).unwrap()).unwrap().is_zero());
        }
        let a = form(&mut r, 2, caps, 1, 2, 2, 1, 0);
        let b = form(&mut r, 2, caps, 0, 3, 3, 1, 0);
        let lhs = sol.dbar_apply(&conn.wedge_star(&a, &b).unwrap()).unwrap();
        let rhs = conn.wedge_star(&sol.dbar_apply(&a).unwrap(), &b).unwrap()
            .sub(&conn.wedge_star(&a, &sol.dbar_apply(&b).unwrap()).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn quantize_lands_in_kernel(seed in any::<u64>()) {
        let (sol, mut r) = solved(seed, false);
        let f = x_poly(&mut r, 2, caps(), 3, 2);
        let s = sol.quantize(&f).unwrap();
        prop_assert_eq!(s.sigma.eval_y0(), f);
        prop_assert!(sol.dbar_apply(&EForm::scalar(s.sigma)).unwrap().is_zero());
        let one = Series::one(2, caps());
        prop_assert_eq!(sol.quantize(&one).unwrap().sigma, one);
    }

    #[test]
    fn global_star_axioms(seed in any::<u64>()) {
        let (sol, mut r) = solved(seed, false);
        let caps = caps();
        let f = x_poly(&mut r, 2, caps, 2, 2);
        let g = x_poly(&mut r, 2, caps, 2, 2);
        let h = x_poly(&mut r, 2, caps, 2, 1);
        let one = Series::one(2, caps);
        prop_assert_eq!(sol.global_star(&f, &one).unwrap(), f.clone());
        prop_assert_eq!(sol.global_star(&one, &f).unwrap(), f.clone());
        let fg = sol.global_star(&f, &g).unwrap();
        let gf = sol.global_star(&g, &f).unwrap();
        let bracket = &f.diff_x(0).checked_mul(&g.diff_x(1)).unwrap() - &f.diff_x(1).checked_mul(&g.diff_x(0)).unwrap();
        prop_assert_eq!((&fg - &gf).eps_coefficient(1), bracket.scale(&q(2)));
        prop_assert_eq!(fg.eps_coefficient(0), f.checked_mul(&g).unwrap());
        let l = sol.global_star(&fg, &h).unwrap();
        let rr = sol.global_star(&f, &sol.global_star(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(l, rr);
    }
}
