use std::collections::BTreeSet;

use extrapolab_core::applications::{operator_n, operator_t};
use extrapolab_core::extrapolation::sawyer_ratio;
use extrapolab_core::grid::{cube_family, ess_bounds, integrate, level_measure};
use extrapolab_core::lorentz::{cube_inverse_weak_norm, lorentz_norm, weak_norm, LorentzIndex};
use extrapolab_core::maximal::{maximal, multilinear_maximal};
use extrapolab_core::weights::{a1_constant, generate, WeightKind};
use extrapolab_core::{DyadicCube, FamilySpec, Grid, GridFunction, MaximalConfig, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cells grouped by the cube that contains them, one system at a time.
fn classified_family(n: usize, shifted: bool) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    let mut side = n;
    while side >= 1 {
        let shifts: &[usize] = if shifted { &[0, 1, 2] } else { &[0] };
        for &t in shifts {
            let off = t * side / 3;
            let mut groups: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
            for c in 0..n {
                let k = (c as i64 - off as i64).div_euclid(side as i64);
                let e = groups.entry(k).or_insert((c, c + 1));
                e.0 = e.0.min(c);
                e.1 = e.1.max(c + 1);
            }
            out.extend(groups.into_values());
        }
        side /= 2;
    }
    out
}

#[test]
fn shifted_family_count_on_eight_cells() {
    let g = Grid::new(1, 3).unwrap();
    let oracle = classified_family(8, true);
    let fam = cube_family(&g, true);
    assert_eq!(fam.len(), oracle.len());
    assert_eq!(fam.len(), 23);
    let dyadic = cube_family(&g, false);
    assert_eq!(dyadic.len(), classified_family(8, false).len());
    assert_eq!(dyadic.len(), 15);
}

#[test]
fn half_interval_integral_matches_loop() {
    let g = Grid::new(1, 4).unwrap();
    let mut r = rng(1);
    let f = GridFunction::from_cells(g, |_| r.gen_range(0.0..5.0)).unwrap();
    let w = Weight::new(g, (0..16).map(|_| r.gen_range(0.1..3.0)).collect()).unwrap();
    let q = DyadicCube::new(1, [0, 0], [0, 0]);
    let mut s = 0.0;
    for i in 0..8 {
        s += f.values()[i] * w.values()[i] / 16.0;
    }
    let got = integrate(&f, &q, Some(&w)).unwrap();
    assert!((got - s).abs() < 1e-14);
}

#[test]
fn essential_bounds_match_sort() {
    let g = Grid::new(1, 6).unwrap();
    let mut r = rng(2);
    let f = GridFunction::from_cells(g, |_| r.gen_range(0.0..5.0)).unwrap();
    let q = DyadicCube::new(2, [1, 0], [0, 0]);
    let mut cells: Vec<f64> = f.values()[16..32].to_vec();
    cells.sort_by(f64::total_cmp);
    assert_eq!(ess_bounds(&f, &q).unwrap(), (cells[0], cells[15]));
}

#[test]
fn level_measure_matches_filter() {
    let g = Grid::new(1, 5).unwrap();
    let f = GridFunction::from_cells(g, |i| (i / 4) as f64).unwrap();
    for t in [0.0, 0.5, 1.0, 3.0, 6.5, 7.0, 9.0] {
        let count = f.values().iter().filter(|&&v| v > t).count();
        assert_eq!(level_measure(&f, t, None).unwrap(), count as f64 / 32.0);
    }
}

#[test]
fn weak_norm_two_step_example() {
    let g = Grid::new(1, 2).unwrap();
    let f = GridFunction::new(g, vec![2.0, 1.0, 1.0, 1.0]).unwrap();
    assert_eq!(weak_norm(&f, None, 1.0).unwrap(), 1.0);
}

#[test]
fn lorentz_norm_matches_aligned_quadrature() {
    // staircase values are multiples of 1/4 and max = 4, so the midpoint
    // nodes never straddle a jump and the t-integrand is piecewise constant
    let g = Grid::new(1, 6).unwrap();
    let mut r = rng(3);
    let f = GridFunction::from_cells(g, |_| r.gen_range(0..=16) as f64 / 4.0).unwrap();
    let (p, q) = (2.0, 1.0);
    let nodes = 1usize << 20;
    let top = 4.0;
    let h = top / nodes as f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 0..nodes {
        let t = (k as f64 + 0.5) * h;
        let mass = f.values().iter().filter(|&&v| v > t).count() as f64 / 64.0;
        let term = q * t.powf(q - 1.0) * mass.powf(q / p) * h;
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    let oracle = sum.powf(1.0 / q);
    let got = lorentz_norm(&f, None, LorentzIndex::new(p, q).unwrap()).unwrap();
    assert!((got - oracle).abs() <= 1e-9 * oracle, "{got} vs {oracle}");
}

#[test]
fn inverse_weak_norm_of_square_root_weight() {
    let g = Grid::new(1, 8).unwrap();
    let v = generate(&WeightKind::Power { exponent: -0.5 }, g, 0).unwrap();
    let q = 2.0;
    // brute force over the distinct values of v⁻¹
    let mut best = 0.0f64;
    for &s in v.values() {
        let t = 1.0 / s;
        let mass: f64 = v.values().iter().filter(|&&x| 1.0 / x >= t).map(|x| x / 256.0).sum();
        best = best.max(t * mass.powf(1.0 / q));
    }
    let got = cube_inverse_weak_norm(&v, &DyadicCube::unit(), q).unwrap();
    assert!((got - best).abs() < 1e-12 * best);
    // continuum: max_t t (2(1 - t))^{1/2} at t = 2/3
    assert!((got - (2.0f64 / 3.0).powf(1.5)).abs() < 0.01, "{got}");
}

/// Maximal function by scanning every dyadic interval containing each cell.
fn brute_maximal(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|x| {
            let mut best = f[x];
            let mut side = 1;
            while side <= n {
                let a = x / side * side;
                let avg = f[a..a + side].iter().sum::<f64>() / side as f64;
                best = best.max(avg);
                side *= 2;
            }
            best
        })
        .collect()
}

#[test]
fn dyadic_maximal_matches_brute_force() {
    let g = Grid::new(1, 3).unwrap();
    let f = GridFunction::from_cells(g, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
    let m = maximal(&f, &MaximalConfig::lebesgue(FamilySpec::DYADIC)).unwrap();
    assert_eq!(m.values()[4..], [0.5; 4]);
    let mut r = rng(4);
    let g6 = Grid::new(1, 6).unwrap();
    let h = GridFunction::from_cells(g6, |_| r.gen_range(0.0..1.0)).unwrap();
    let m = maximal(&h, &MaximalConfig::lebesgue(FamilySpec::DYADIC)).unwrap();
    for (a, b) in m.values().iter().zip(brute_maximal(h.values())) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn multilinear_small_interval() {
    let g = Grid::new(1, 6).unwrap();
    let f1 = GridFunction::from_cells(g, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
    let f2 = GridFunction::constant(g, 1.0).unwrap();
    let m = multilinear_maximal(&[&f1, &f2], &MaximalConfig::lebesgue(FamilySpec::DYADIC)).unwrap();
    assert!(m.values()[32..].iter().all(|&v| v == 0.0625));
}

#[test]
fn a1_of_inverse_square_root_is_near_two() {
    let g = Grid::new(1, 12).unwrap();
    let w = generate(&WeightKind::Power { exponent: -0.5 }, g, 0).unwrap();
    let c = a1_constant(&w, None, FamilySpec::SHIFTED).unwrap().value;
    assert!((c - 2.0).abs() <= 0.2, "{c}");
}

#[test]
fn sawyer_indicator_ratio_is_at_most_one() {
    let g = Grid::new(1, 8).unwrap();
    let one = Weight::ones(g);
    let mut r = rng(5);
    for _ in 0..20 {
        let a = r.gen_range(0..200);
        let b = r.gen_range(a + 1..=256);
        let f = GridFunction::from_cells(g, |i| if (a..b).contains(&i) { 1.0 } else { 0.0 }).unwrap();
        let ratio = sawyer_ratio(&f, &one, &one, &one, FamilySpec::DYADIC).unwrap();
        assert!(ratio <= 1.0 + 1e-12, "{ratio}");
    }
}

#[test]
fn operator_n_matches_filter_count() {
    let g = Grid::new(1, 5).unwrap();
    let mut r = rng(6);
    let f = GridFunction::from_cells(g, |_| if r.gen_bool(0.4) { r.gen_range(0.5..2.0) } else { 0.0 }).unwrap();
    let h = GridFunction::from_cells(g, |_| r.gen_range(0.0..1.0)).unwrap();
    let n = operator_n(&f, &h).unwrap();
    let dy = 1.0 / 32.0;
    for x in 0..32usize {
        let kernel: Vec<f64> = (0..32usize)
            .filter(|&s| s != x)
            .map(|s| {
                let j = s.abs_diff(x);
                let k = if j == 1 { 4.0 / (3.0 * dy * dy) } else { 1.0 / (j as f64 * dy).powi(2) };
                f.values()[s] * h.values()[s] * k
            })
            .collect();
        let mut best = 0.0f64;
        for &lam in &kernel {
            if lam > 0.0 {
                let count = kernel.iter().filter(|&&v| v >= lam).count() as f64;
                best = best.max(lam * (count * dy).powi(2));
            }
        }
        assert!((n.values()[x] - best).abs() <= 1e-12 * best.max(1e-300), "x = {x}");
    }
}

#[test]
fn operator_t_is_subadditive_on_disjoint_inputs() {
    let g = Grid::new(1, 7).unwrap();
    let mut r = rng(7);
    for _ in 0..100 {
        let split = r.gen_range(1..127);
        let base = GridFunction::from_cells(g, |_| r.gen_range(0.0..1.0)).unwrap();
        let f1 = GridFunction::from_cells(g, |i| if i < split { base.values()[i] } else { 0.0 }).unwrap();
        let f2 = GridFunction::from_cells(g, |i| if i >= split { base.values()[i] } else { 0.0 }).unwrap();
        let h = GridFunction::from_cells(g, |_| r.gen_range(0.0..1.0)).unwrap();
        let whole = operator_t(&base, &h).unwrap();
        let a = operator_t(&f1, &h).unwrap();
        let b = operator_t(&f2, &h).unwrap();
        for i in 0..128 {
            assert!(whole.values()[i] <= (a.values()[i] + b.values()[i]) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn operator_n_commutes_with_interior_translation() {
    let g = Grid::new(1, 7).unwrap();
    let mut r = rng(8);
    let f = GridFunction::from_cells(g, |i| if (40..60).contains(&i) { r.gen_range(0.0..1.0) } else { 0.0 }).unwrap();
    let shifted = GridFunction::from_cells(g, |i| if i >= 5 { f.values()[i - 5] } else { 0.0 }).unwrap();
    let a = operator_n(&f, &f).unwrap();
    let b = operator_n(&shifted, &shifted).unwrap();
    for x in 30..80 {
        assert!((a.values()[x] - b.values()[x + 5]).abs() <= 1e-12 * a.values()[x].max(1e-300));
    }
}
