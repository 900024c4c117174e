use extrapolab_core::applications::{layer_decompose, operator_n, operator_t};
use extrapolab_core::extrapolation::{gamma_optimize, OffDiagExponents};
use extrapolab_core::grid::{integrate, level_measure};
use extrapolab_core::lorentz::{
    cube_inverse_weak_norm, dyadic_level_sup, lorentz_norm, weak_norm, LorentzIndex,
};
use extrapolab_core::maximal::{maximal, multilinear_maximal};
use extrapolab_core::weights::{a1_constant, apr_constant, ExponentSystem};
use extrapolab_core::{DyadicCube, FamilySpec, Grid, GridFunction, MaximalConfig, Weight};
use proptest::prelude::*;

const LEVEL: u32 = 6;

fn grid() -> Grid {
    Grid::new(1, LEVEL).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], 1 << LEVEL)
}

fn positive() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..100.0, 1 << LEVEL)
}

fn func(v: Vec<f64>) -> GridFunction {
    GridFunction::new(grid(), v).unwrap()
}

fn weight(v: Vec<f64>) -> Weight {
    Weight::new(grid(), v).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) + 1e-300
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_norm_is_below_every_lorentz_norm(f in values(), w in positive(), p in 1.0f64..4.0, q in 0.3f64..6.0) {
        let (f, w) = (func(f), weight(w));
        let weak = weak_norm(&f, Some(&w), p).unwrap();
        let strong = lorentz_norm(&f, Some(&w), LorentzIndex::new(p, q).unwrap()).unwrap();
        prop_assert!(weak <= strong * (1.0 + 1e-12));
    }

    #[test]
    fn norms_are_homogeneous(f in values(), c in 0.01f64..100.0, p in 1.0f64..4.0, q in 0.5f64..4.0) {
        let f = func(f);
        let cf = f.scale(c).unwrap();
        let idx = LorentzIndex::new(p, q).unwrap();
        prop_assert!(close(lorentz_norm(&cf, None, idx).unwrap(), c * lorentz_norm(&f, None, idx).unwrap(), 1e-12));
        prop_assert!(close(weak_norm(&cf, None, p).unwrap(), c * weak_norm(&f, None, p).unwrap(), 1e-12));
    }

    #[test]
    fn norms_are_monotone(f in values(), extra in values(), p in 1.0f64..4.0, q in 0.5f64..4.0) {
        let f = func(f);
        let g = f.add(&func(extra)).unwrap();
        let idx = LorentzIndex::new(p, q).unwrap();
        prop_assert!(lorentz_norm(&f, None, idx).unwrap() <= lorentz_norm(&g, None, idx).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn integral_splits_over_children(f in values(), w in positive()) {
        let (f, w) = (func(f), weight(w));
        let whole = integrate(&f, &DyadicCube::unit(), Some(&w)).unwrap();
        let parts: f64 = DyadicCube::unit()
            .children(&grid())
            .unwrap()
            .iter()
            .map(|c| integrate(&f, c, Some(&w)).unwrap())
            .sum();
        prop_assert!(close(whole, parts, 1e-12));
    }

    #[test]
    fn level_measure_decreases(f in values(), t in 0.0f64..5.0, dt in 0.0f64..5.0) {
        let f = func(f);
        prop_assert!(level_measure(&f, t + dt, None).unwrap() <= level_measure(&f, t, None).unwrap());
    }

    #[test]
    fn maximal_dominates_and_is_controlled(f in values(), g in values()) {
        let (f, g) = (func(f), func(g));
        let dyadic = MaximalConfig::lebesgue(FamilySpec::DYADIC);
        let shifted = MaximalConfig::lebesgue(FamilySpec::SHIFTED);
        let mf = maximal(&f, &shifted).unwrap();
        let mg = maximal(&g, &shifted).unwrap();
        let md = maximal(&f, &dyadic).unwrap();
        let mm = multilinear_maximal(&[&f, &g], &shifted).unwrap();
        for i in 0..f.values().len() {
            prop_assert!(mf.values()[i] >= f.values()[i]);
            prop_assert!(mf.values()[i] >= md.values()[i]);
            prop_assert!(mm.values()[i] <= mf.values()[i] * mg.values()[i] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn characteristics_grow_with_the_family_and_ignore_scale(w in positive(), c in 0.01f64..100.0) {
        let w = weight(w);
        let d = a1_constant(&w, None, FamilySpec::DYADIC).unwrap().value;
        let s = a1_constant(&w, None, FamilySpec::SHIFTED).unwrap().value;
        prop_assert!(d >= 1.0 - 1e-12);
        prop_assert!(s >= d);
        let scaled = a1_constant(&w.scale(c).unwrap(), None, FamilySpec::SHIFTED).unwrap().value;
        prop_assert!(close(s, scaled, 1e-12));
    }

    #[test]
    fn vector_characteristic_ignores_scale(a in positive(), b in positive(), c in 0.1f64..10.0) {
        let sys = ExponentSystem::restricted(vec![2.0, 3.0]).unwrap();
        let ws = vec![weight(a), weight(b)];
        let base = apr_constant(&ws, &sys, FamilySpec::DYADIC).unwrap().value;
        let scaled = vec![ws[0].scale(c).unwrap(), ws[1].scale(c).unwrap()];
        prop_assert!(close(base, apr_constant(&scaled, &sys, FamilySpec::DYADIC).unwrap().value, 1e-12));
    }

    #[test]
    fn band_sup_brackets_the_weak_norm(w in positive(), q in 1.0f64..5.0, level in 0u32..LEVEL, k in 0i64..64) {
        let w = weight(w);
        let cube = DyadicCube::new(level, [k % (1i64 << level), 0], [0, 0]);
        let s = dyadic_level_sup(&w, &cube, q).unwrap();
        let n = cube_inverse_weak_norm(&w, &cube, q).unwrap();
        prop_assert!(s <= n * (1.0 + 1e-9));
        prop_assert!(n <= 2.0 * s * (1.0 + 1e-9));
    }

    #[test]
    fn offdiag_identities(r0 in 1.0f64..3.0, dp in 0.01f64..3.0, dq in 0.01f64..0.99, inv_s in 0.0f64..0.5, a in 0.05f64..1.0) {
        let p0 = r0 + dp;
        let q0 = p0 * (1.0 - dq).max(0.05);
        let s0 = if inv_s == 0.0 { f64::INFINITY } else { 1.0 / inv_s };
        if let Ok(x) = OffDiagExponents::new(r0, p0, q0, s0, a * p0) {
            let [e1, e2] = x.identity_residuals();
            prop_assert!(e1 < 1e-12 && e2 < 1e-12);
        }
    }

    #[test]
    fn gamma_is_a_minimizer(a in 0.01f64..100.0, b in 0.01f64..100.0, r0 in 0.5f64..3.0, beta in 0.05f64..3.0) {
        let (g, v) = gamma_optimize(a, b, r0, beta).unwrap();
        for s in [0.5, 0.9, 0.999, 1.001, 1.1, 2.0] {
            let t = g * s;
            prop_assert!(v <= (a * t.powf(-r0) + b * t.powf(r0 * beta)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn operator_n_scales_and_squares(f in values(), g in values(), a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let (f, g) = (func(f), func(g));
        let n = operator_n(&f, &g).unwrap();
        let ns = operator_n(&f.scale(a).unwrap(), &g.scale(b).unwrap()).unwrap();
        let t = operator_t(&f, &g).unwrap();
        for i in 0..n.values().len() {
            prop_assert!(close(ns.values()[i], a * b * n.values()[i], 1e-12));
            prop_assert!(close(t.values()[i] * t.values()[i], n.values()[i], 1e-12));
        }
    }

    #[test]
    fn layers_bracket_the_function(f in values()) {
        let f = func(f);
        let d = layer_decompose(&f);
        prop_assert!(d.brackets(&f));
        for (i, &v) in f.values().iter().enumerate() {
            let hits = d.layers().iter().filter(|(_, m)| m[i]).count();
            prop_assert_eq!(hits, usize::from(v > 0.0));
            if let Some((j, _)) = d.layers().iter().find(|(_, m)| m[i]) {
                // per-cell classification oracle
                let mut k = v.log2().floor() as i32;
                while 2f64.powi(k) > v {
                    k -= 1;
                }
                while 2f64.powi(k + 1) <= v {
                    k += 1;
                }
                prop_assert_eq!(*j, k);
            }
        }
    }
}
