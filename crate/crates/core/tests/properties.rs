//! Property tests for the invariants of each module.

use proptest::prelude::*;
use rbftune_core::bo::{self, BoConfig};
use rbftune_core::data::{
    ceil_count, floor_count, halton_points, random_points, split, DataSet, PointSet, SplitSpec,
    TestFunction,
};
use rbftune_core::gp::GpSurrogate;
use rbftune_core::kernels::{assemble, KernelFamily, RbfKernel};
use rbftune_core::loocv::{grid_search, loocv_error, rippa_errors};
use rbftune_core::rbf::{approximate, fit, interpolate};

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![
        Just(KernelFamily::Gaussian),
        Just(KernelFamily::Matern2),
        Just(KernelFamily::Wendland2)
    ]
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

fn min_separation(p: &PointSet) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        for j in 0..i {
            let d: f64 = p
                .point(i)
                .iter()
                .zip(p.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.min(d.sqrt());
        }
    }
    best
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ---- kernels ----

    #[test]
    fn profile_is_nonincreasing(fam in family(), eps in 0.05f64..20.0) {
        let k = RbfKernel::new(fam, eps).unwrap();
        let mut prev = k.phi(0.0).unwrap();
        prop_assert_eq!(prev, 1.0);
        for i in 1..=400 {
            let v = k.phi(i as f64 * 0.005).unwrap();
            prop_assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn wendland_vanishes_beyond_support(s in 1.0f64..1e6) {
        prop_assert_eq!(KernelFamily::Wendland2.profile(s), 0.0);
    }

    #[test]
    fn square_matrix_has_unit_diagonal(fam in family(), eps in 0.1f64..20.0, n in 1usize..40, seed: u64) {
        let p = random_points(n, 2, seed).unwrap();
        let k = assemble(&RbfKernel::new(fam, eps).unwrap(), &p, &p).unwrap();
        for i in 0..n {
            prop_assert_eq!(k.get(i, i), 1.0);
            for j in 0..n {
                prop_assert_eq!(k.get(i, j), k.get(j, i));
            }
        }
    }

    #[test]
    fn small_kernel_matrices_are_positive_definite(
        fam in family(), eps in 2.0f64..10.0, n in 2usize..8, seed: u64,
    ) {
        let p = random_points(n, 2, seed).unwrap();
        prop_assume!(min_separation(&p) >= 0.1);
        let k = assemble(&RbfKernel::new(fam, eps).unwrap(), &p, &p).unwrap();
        let eig = jacobi_eigenvalues(k.into_entries(), n);
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(lo > 0.0, "smallest eigenvalue {lo}");
    }

    // ---- data ----

    #[test]
    fn generated_points_stay_in_unit_cube(n in 1usize..300, dim in 1usize..6, seed: u64) {
        for p in [halton_points(n, dim).unwrap(), random_points(n, dim, seed).unwrap()] {
            prop_assert!(p.coords().iter().all(|&c| (0.0..=1.0).contains(&c)));
        }
        prop_assert_eq!(halton_points(n, dim).unwrap(), halton_points(n, dim).unwrap());
    }

    #[test]
    fn split_sizes_and_multiset(n in 2usize..=2000, seed: u64, frac_centers in 0.05f64..=1.0) {
        let ds = TestFunction::F1.sample(random_points(n, 2, seed).unwrap()).unwrap();
        let m = ceil_count(frac_centers, n).clamp(1, n);
        let centers = ds.locations().select(&(0..m).collect::<Vec<_>>());
        let s = split(&ds, &centers, SplitSpec { train_fraction: 0.8, seed }).unwrap();
        prop_assert_eq!(s.train.len(), floor_count(0.8, n));
        prop_assert_eq!(s.val.len(), ceil_count(0.2, n));
        prop_assert_eq!(s.train.len() + s.val.len(), n);

        let key = |p: &[f64], v: f64| (p[0].to_bits(), p[1].to_bits(), v.to_bits());
        let mut all: Vec<_> = ds.locations().iter().zip(ds.values()).map(|(p, &v)| key(p, v)).collect();
        let mut parts: Vec<_> = s.train.locations().iter().zip(s.train.values())
            .chain(s.val.locations().iter().zip(s.val.values()))
            .map(|(p, &v)| key(p, v))
            .collect();
        all.sort_unstable();
        parts.sort_unstable();
        prop_assert_eq!(all, parts);

        // a center is a training center exactly when its location trains
        let in_train = s.train.locations().locate(&centers);
        let kept = in_train.iter().filter(|p| p.is_some()).count();
        prop_assert_eq!(kept, s.train_centers.len());
        let train_has = |c: &[f64]| {
            s.train.locations().locate(&PointSet::new(2, c.to_vec()).unwrap())[0].is_some()
        };
        prop_assert!(s.train_centers.iter().all(train_has));
    }

    #[test]
    fn f2_is_point_symmetric(a in -0.5f64..=0.5, b in -0.5f64..=0.5) {
        let f = |x, y| TestFunction::F2.eval(&[x, y]).unwrap();
        // 0.5 ± a round differently, so compare to a few ulps
        prop_assert!((f(0.5 + a, 0.5 + b) - f(0.5 - a, 0.5 - b)).abs() <= 1e-14);
    }

    // ---- rbf ----

    #[test]
    fn interpolation_reproduces_nodes(fam in family(), eps in 3.0f64..10.0, n in 2usize..60) {
        let data = TestFunction::F1.sample(halton_points(n, 2).unwrap()).unwrap();
        let model = interpolate(RbfKernel::new(fam, eps).unwrap(), &data).unwrap();
        let back = model.evaluate(data.locations()).unwrap();
        let tol = 1e-6 * (1.0 + max_abs(data.values()));
        for (b, f) in back.iter().zip(data.values()) {
            prop_assert!((b - f).abs() <= tol);
        }
    }

    #[test]
    fn least_squares_is_stationary(
        fam in family(), eps in 2.0f64..8.0, n in 10usize..40, m_frac in 0.2f64..0.9,
        seed: u64, dir in proptest::collection::vec(-1.0f64..1.0, 40), h in 1e-6f64..1e-3,
    ) {
        let data = TestFunction::F2.sample(halton_points(n, 2).unwrap()).unwrap();
        let m = ((m_frac * n as f64) as usize).max(1);
        let centers = data.locations().select(&(0..m).collect::<Vec<_>>());
        let kernel = RbfKernel::new(fam, eps).unwrap();
        let model = approximate(kernel, &data, &centers).unwrap();
        let kt = assemble(&kernel, data.locations(), &centers).unwrap();
        let resid = |c: &[f64]| -> f64 {
            kt.mul_vec(c).iter().zip(data.values()).map(|(p, f)| (p - f) * (p - f)).sum()
        };
        let c = model.coefficients();
        let base = resid(c);
        let _ = seed;
        let perturbed: Vec<f64> = c.iter().zip(&dir).map(|(ci, d)| ci + h * d).collect();
        prop_assert!(resid(&perturbed) >= base * (1.0 - 1e-9) - 1e-18);
        // evaluation on the data equals the collocation block times the coefficients
        let ev = model.evaluate(data.locations()).unwrap();
        let kc = kt.mul_vec(c);
        for (a, b) in ev.iter().zip(&kc) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn fitting_is_linear_in_the_data(
        fam in family(), eps in 3.0f64..8.0, n in 5usize..40, alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
        subset in proptest::bool::ANY,
    ) {
        let locs = halton_points(n, 2).unwrap();
        let f = TestFunction::F1.sample(locs.clone()).unwrap();
        let g = TestFunction::F2.sample(locs.clone()).unwrap();
        let combo: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| alpha * a + beta * b).collect();
        let h = DataSet::new(locs.clone(), combo).unwrap();
        let centers = if subset { locs.select(&(0..(n / 2).max(1)).collect::<Vec<_>>()) } else { locs.clone() };
        let k = RbfKernel::new(fam, eps).unwrap();
        let q = random_points(25, 2, 1).unwrap();
        let ef = fit(k, &f, &centers).unwrap().evaluate(&q).unwrap();
        let eg = fit(k, &g, &centers).unwrap().evaluate(&q).unwrap();
        let eh = fit(k, &h, &centers).unwrap().evaluate(&q).unwrap();
        let scale = 1.0 + max_abs(&ef).max(max_abs(&eg)) * (alpha.abs() + beta.abs());
        for i in 0..q.len() {
            prop_assert!((eh[i] - (alpha * ef[i] + beta * eg[i])).abs() <= 1e-7 * scale);
        }
    }

    // ---- loocv ----

    #[test]
    fn loocv_error_ignores_row_order(fam in family(), eps in 1.0f64..10.0, n in 3usize..30, seed: u64) {
        let data = TestFunction::F1.sample(random_points(n, 2, seed).unwrap()).unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.rotate_left(seed as usize % n);
        idx.swap(0, n - 1);
        let a = loocv_error(fam, eps, &data);
        let b = loocv_error(fam, eps, &data.select(&idx));
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn scaling_values_scales_errors(fam in family(), eps in 1.0f64..10.0, n in 3usize..25, k in -10i32..10, seed: u64) {
        // a power of two scales every floating-point operation exactly
        let alpha = 2f64.powi(k);
        let data = TestFunction::F2.sample(random_points(n, 2, seed).unwrap()).unwrap();
        let scaled = data.scaled(alpha);
        let kern = RbfKernel::new(fam, eps).unwrap();
        let e = rippa_errors(&kern, &data).unwrap();
        let es = rippa_errors(&kern, &scaled).unwrap();
        for (a, b) in e.iter().zip(&es) {
            prop_assert_eq!(alpha * a, *b);
        }
        let g = grid_search(fam, &data, 20.0, 25).unwrap();
        let gs = grid_search(fam, &scaled, 20.0, 25).unwrap();
        prop_assert_eq!(g.best_epsilon, gs.best_epsilon);
        prop_assert_eq!(g.clone(), grid_search(fam, &data, 20.0, 25).unwrap());
    }

    #[test]
    fn scaling_by_any_positive_factor_scales_errors(fam in family(), eps in 1.0f64..10.0, n in 3usize..25, alpha in 0.01f64..100.0, seed: u64) {
        let data = TestFunction::F1.sample(random_points(n, 2, seed).unwrap()).unwrap();
        let kern = RbfKernel::new(fam, eps).unwrap();
        let e = rippa_errors(&kern, &data).unwrap();
        let es = rippa_errors(&kern, &data.scaled(alpha)).unwrap();
        let tol = 1e-9 * alpha * max_abs(&e);
        for (a, b) in e.iter().zip(&es) {
            prop_assert!((alpha * a - b).abs() <= tol);
        }
    }

    // ---- gp ----

    #[test]
    fn gp_posterior_invariants(
        xs in proptest::collection::vec(0.0f64..20.0, 1..12),
        ys_seed in proptest::collection::vec(-5.0f64..5.0, 12),
        queries in proptest::collection::vec(-5.0f64..25.0, 20),
    ) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let ys: Vec<f64> = ys_seed[..xs.len()].to_vec();
        let gp = GpSurrogate::fit(&xs, &ys).unwrap();
        let prior = gp.prior_std();
        for &q in &queries {
            let p = gp.predict(q);
            prop_assert!(p.std >= 0.0 && p.std <= prior * (1.0 + 1e-12));
        }
        if gp.jitter() <= 1e-8 {
            for (x, y) in xs.iter().zip(&ys) {
                prop_assert!((gp.predict(*x).mean - y).abs() <= 1e-6 * (1.0 + y.abs()));
            }
        }
        // permutation invariance
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.reverse();
        let xr: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let yr: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        let gr = GpSurrogate::fit(&xr, &yr).unwrap();
        for &q in &queries {
            let (a, b) = (gp.predict(q), gr.predict(q));
            prop_assert!((a.mean - b.mean).abs() <= 1e-8 * (1.0 + a.mean.abs()));
            prop_assert!((a.std - b.std).abs() <= 1e-8 * (1.0 + a.std));
        }
    }

    #[test]
    fn observing_a_point_never_raises_its_uncertainty(
        xs in proptest::collection::vec(0.0f64..20.0, 2..10),
        q in 0.0f64..20.0,
    ) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        prop_assume!(xs.iter().all(|x| (x - q).abs() >= 0.05));
        let ys: Vec<f64> = xs.iter().map(|x| (0.4 * x).cos()).collect();
        let before = GpSurrogate::fit(&xs, &ys).unwrap();
        let mut xa = xs.clone();
        let mut ya = ys.clone();
        xa.push(q);
        ya.push((0.4 * q).cos());
        let after = GpSurrogate::fit(&xa, &ya).unwrap();
        // compare in standardized units: both fits put the prior variance at 1
        let s0 = before.predict(q).std / before.prior_std();
        let s1 = after.predict(q).std / after.prior_std();
        prop_assert!(s1 <= s0 + 1e-9, "{s1} > {s0}");
    }

    // ---- bo ----

    #[test]
    fn bo_history_invariants(seed: u64, lo in 0.0f64..5.0, width in 0.5f64..20.0, c in 0.0f64..1.0) {
        let cfg = BoConfig {
            lo,
            hi: lo + width,
            nstart: 3,
            niter: 6,
            acquisition_candidates: 200,
            seed,
            ..Default::default()
        };
        let centre = lo + c * width;
        let f = |e: f64| Ok((e - centre).sin() - 0.1 * (e - centre).abs());
        let a = bo::optimize(f, &cfg).unwrap();
        let b = bo::optimize(f, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.history.iter().all(|&(x, _)| x > cfg.lo && x <= cfg.hi));
        let inc = a.incumbent_trace();
        prop_assert!(inc.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*inc.last().unwrap(), a.best_objective);
        let first = a.history.iter().position(|&(_, g)| g == a.best_objective).unwrap();
        prop_assert_eq!(a.history[first].0, a.best_epsilon);
    }
}
