//! Monte Carlo sanity checks on moderately sized runs.

use vsv_core::driver::StreamFactory;
use vsv_core::estimators::{estimate, summarize, EstimatorKind, EstimatorSetup};
use vsv_core::noise::fbm_increment_covariance;
use vsv_core::{BackendMode, KernelSpec, NoiseBackend, PathSimulator, PayoffSpec, TimeGrid, VsvModel};

fn reference(hurst: f64, steps: usize) -> PathSimulator {
    PathSimulator::new(VsvModel::reference(hurst).unwrap(), steps, BackendMode::Exact).unwrap()
}

#[test]
fn exact_fbm_terminal_variance() {
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let backend = NoiseBackend::build(&KernelSpec::fbm(0.7).unwrap(), &grid, BackendMode::Exact).unwrap();
    let streams = StreamFactory::new(42);
    let m = 100_000;
    let mut xi = vec![0.0; 16];
    let finals: Vec<f64> = (0..m)
        .map(|p| {
            streams.path(p).fill_normal(&mut xi, 1.0);
            backend.generate(&xi).unwrap()[16]
        })
        .collect();
    let var = finals.iter().map(|z| z * z).sum::<f64>() / m as f64;
    assert!((var - 1.0).abs() < 3.0 * (2.0 / m as f64).sqrt(), "{var}");
}

#[test]
fn exact_increment_covariance_is_recovered() {
    let grid = TimeGrid::new(1.0, 6).unwrap();
    let backend = NoiseBackend::build(&KernelSpec::fbm(0.3).unwrap(), &grid, BackendMode::Exact).unwrap();
    let target = fbm_increment_covariance(&grid, 0.3);
    let streams = StreamFactory::new(3);
    let m = 200_000;
    let mut acc = [[0.0; 6]; 6];
    let mut xi = vec![0.0; 6];
    for p in 0..m {
        streams.path(p).fill_normal(&mut xi, 1.0);
        let z = backend.generate(&xi).unwrap();
        let dz: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).collect();
        for i in 0..6 {
            for j in 0..6 {
                acc[i][j] += dz[i] * dz[j];
            }
        }
    }
    for i in 0..6 {
        for j in 0..6 {
            let emp = acc[i][j] / m as f64;
            let sd = (target[(i, i)] * target[(j, j)] / m as f64).sqrt() * 2.0;
            assert!((emp - target[(i, j)]).abs() < 4.0 * sd, "({i},{j}) {emp} vs {}", target[(i, j)]);
        }
    }
}

#[test]
fn brownian_backends_agree_in_law() {
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let exact = NoiseBackend::build(&KernelSpec::fbm(0.5).unwrap(), &grid, BackendMode::Exact).unwrap();
    let quad = NoiseBackend::build(&KernelSpec::fbm(0.5).unwrap(), &grid, BackendMode::Quadrature).unwrap();
    let streams = StreamFactory::new(8);
    let m = 50_000;
    let mut moments = [[0.0; 2]; 2];
    let mut xi = vec![0.0; 8];
    for p in 0..m {
        let mut rng = streams.path(p);
        rng.fill_normal(&mut xi, 1.0);
        let a = exact.generate(&xi).unwrap()[4];
        rng.fill_normal(&mut xi, grid.dt().sqrt());
        let b = quad.generate(&xi).unwrap()[4];
        moments[0][0] += a;
        moments[0][1] += a * a;
        moments[1][0] += b;
        moments[1][1] += b * b;
    }
    for mom in moments {
        assert!((mom[0] / m as f64).abs() < 4.0 * (0.5 / m as f64).sqrt());
        assert!((mom[1] / m as f64 - 0.5).abs() < 4.0 * 0.5 * (2.0 / m as f64).sqrt());
    }
}

#[test]
fn holder_proxy_is_stable_under_refinement() {
    let proxy = |n: usize| {
        let grid = TimeGrid::new(1.0, n).unwrap();
        let backend = NoiseBackend::build(&KernelSpec::fbm(0.7).unwrap(), &grid, BackendMode::Exact).unwrap();
        let streams = StreamFactory::new(1);
        let mut xi = vec![0.0; n];
        let mut worst = Vec::new();
        for p in 0..200 {
            streams.path(p).fill_normal(&mut xi, 1.0);
            let z = backend.generate(&xi).unwrap();
            let mut m: f64 = 0.0;
            for i in 0..=n {
                for j in i + 1..=n {
                    let dt = (j - i) as f64 / n as f64;
                    m = m.max((z[j] - z[i]).abs() / dt.powf(0.6));
                }
            }
            worst.push(m);
        }
        worst.sort_by(f64::total_cmp);
        worst[100]
    };
    let (a, b) = (proxy(64), proxy(128));
    assert!(a.is_finite() && b.is_finite());
    assert!(b < 1.5 * a, "{a} -> {b}");
}

#[test]
fn sandwich_holds_on_many_paths() {
    for h in [0.7, 0.3] {
        let sim = reference(h, 100);
        for b in sim.bundles(17, 0..2000).unwrap() {
            assert!(b.volatility[0].iter().all(|y| *y > 0.01 && *y < 5.0));
        }
    }
}

#[test]
fn price_and_density_moments() {
    let sim = reference(0.7, 200);
    let m = 10_000;
    let paths = sim.summaries(2024, m).unwrap();
    let prices: Vec<f64> = paths.iter().map(|p| p.log_price[0].exp()).collect();
    let s = summarize(&prices).unwrap();
    assert!((s.mean - 1.5f64.exp()).abs() < 3.0 * s.stderr + 0.02, "E S(T) {} ± {}", s.mean, s.stderr);

    let dens: Vec<f64> = paths.iter().map(|p| p.density).collect();
    let e = summarize(&dens).unwrap();
    assert!((e.mean - 1.0).abs() < 3.0 * e.stderr, "E[Ê_T] {} ± {}", e.mean, e.stderr);

    let ito: Vec<f64> = paths.iter().map(|p| p.ito).collect();
    let i = summarize(&ito).unwrap();
    assert!(i.mean.abs() < 3.0 * i.stderr);

    let df = sim.discount_factor();
    let disc: Vec<f64> = paths.iter().zip(&prices).map(|(p, s)| p.density * df * s).collect();
    let d = summarize(&disc).unwrap();
    assert!((d.mean - 1.0).abs() < 3.0 * d.stderr + 0.02, "{} ± {}", d.mean, d.stderr);
}

#[test]
fn constant_payoff_weights() {
    let sim = reference(0.3, 100);
    let paths = sim.summaries(5, 20_000).unwrap();
    let one = PayoffSpec::new(vec![vsv_core::Atom::indicator(0.0, 1.0)]).unwrap();
    let setup = EstimatorSetup { payoff: &one, weights: &[1.0], u11: 1.0, horizon: 1.0, discount: 1.0 };
    for kind in [EstimatorKind::Rep1, EstimatorKind::Rep2] {
        let r = estimate(kind, &setup, &paths, 100).unwrap();
        assert!((r.mean - 1.0).abs() < 3.0 * r.stderr, "{kind}: {} ± {}", r.mean, r.stderr);
    }
    // E[Ê_T (I₁ − corr)] = 0 exactly in discrete time, so the paired
    // difference between the measure-change samples and Ê_T is centred
    let mmm = estimate(EstimatorKind::MeasureChange, &setup, &paths, 100).unwrap();
    let diff: Vec<f64> = mmm.samples.iter().zip(&paths).map(|(s, p)| s - p.density).collect();
    let d = summarize(&diff).unwrap();
    assert!(d.mean.abs() < 3.0 * d.stderr, "{} ± {}", d.mean, d.stderr);
}

#[test]
fn estimators_agree_at_moderate_resolution() {
    let sim = reference(0.7, 100);
    let paths = sim.summaries(99, 10_000).unwrap();
    let payoff = PayoffSpec::digital_ladder();
    let setup = EstimatorSetup { payoff: &payoff, weights: &[1.0], u11: 1.0, horizon: 1.0, discount: 1.0 };
    let results: Vec<_> = [EstimatorKind::Naive, EstimatorKind::Rep1, EstimatorKind::Rep2, EstimatorKind::CondGauss]
        .into_iter()
        .map(|k| estimate(k, &setup, &paths, 100).unwrap())
        .collect();
    for a in &results {
        for b in &results {
            let tol = 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt() + 0.02;
            assert!((a.mean - b.mean).abs() < tol, "{} {} vs {} {}", a.kind, a.mean, b.kind, b.mean);
        }
    }
    let rep2 = &results[2];
    let cg = &results[3];
    assert!(cg.sd < 0.5 * rep2.sd);
    for p in &paths {
        let c = p.cond_gauss.unwrap();
        assert!(c.v1_sq * c.v2_sq >= 1.0 - 1e-12);
        assert!(c.covariance_det(1.0, 1.0) >= -1e-12);
    }
}

#[test]
fn conditional_gaussian_with_correlated_drivers() {
    use vsv_core::driver::SquareMatrix;
    use vsv_core::CorrelationStructure;

    let rho = 0.6;
    let sigma = SquareMatrix::from_rows(&[&[1.0, rho], &[rho, 1.0]]);
    let mut model = VsvModel::reference(0.7).unwrap();
    model.correlation = CorrelationStructure::new(sigma).unwrap();
    let u11 = model.correlation.u11();
    assert!((u11 - 0.8).abs() < 1e-12);
    let sim = PathSimulator::new(model, 50, BackendMode::Quadrature).unwrap();
    let paths = sim.summaries(17, 10_000).unwrap();
    let payoff = PayoffSpec::digital_ladder();
    let setup = EstimatorSetup { payoff: &payoff, weights: &[1.0], u11, horizon: 1.0, discount: 1.0 };
    let naive = estimate(EstimatorKind::Naive, &setup, &paths, 50).unwrap();
    let rep2 = estimate(EstimatorKind::Rep2, &setup, &paths, 50).unwrap();
    let cg = estimate(EstimatorKind::CondGauss, &setup, &paths, 50).unwrap();
    for other in [&naive, &rep2] {
        let tol = 3.0 * (cg.stderr.powi(2) + other.stderr.powi(2)).sqrt() + 0.02;
        assert!((cg.mean - other.mean).abs() < tol, "{} {} vs cond-gauss {}", other.kind, other.mean, cg.mean);
        // a u11² prefactor would scale every sample by u11
        let wrong = cg.mean * u11;
        assert!((wrong - other.mean).abs() > tol, "{} {} vs u² variant {wrong}", other.kind, other.mean);
    }
}
