// Temporary numeric exploration; removed before release.

use fas_channel::channel::{divisors, p3_objective, select_replication, solve_p3};
use fas_channel::covariance::*;
use fas_channel::outage::*;
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();

    if which == "tail" || which.is_empty() {
        // Criterion 2 feasibility: Jacobi eigenvalue floor at N=200, W=0.2.
        let t = Instant::now();
        let model = SpectralModel::new(FasConfig::new(200, 0.2, 1.0, 0.0).unwrap()).unwrap();
        let vals = model.eigenvalues();
        let above = vals.iter().filter(|&&s| s > 3e-15).count();
        println!(
            "N=200 W=0.2: eigen>3e-15: {above}  ({}s)",
            t.elapsed().as_secs_f32()
        );
        println!("  top: {:?}", &vals[..12.min(vals.len())]);
        println!("  ranks 8..16: {:?}", &vals[8..16]);
        println!("  mid tail (k=30,60,100,150,199): {:?}",
            [vals[30], vals[60], vals[100], vals[150], vals[199]]);
        let neg = vals.iter().filter(|&&s| s < 0.0).count();
        println!("  negatives: {neg}, min {}", vals[199]);
    }

    if which == "fit" || which.is_empty() {
        let t = Instant::now();
        let fit = fit_a_constant(&default_fit_pairs()).unwrap();
        println!(
            "fit_a: a = {} mse = {} cells = {} ({}s)",
            fit.a,
            fit.mse,
            fit.cells,
            t.elapsed().as_secs_f32()
        );
    }

    if which == "fitscan" {
        use fas_channel::linalg::Matrix;
        let pairs = default_fit_pairs();
        let mut cells = Vec::new();
        for &(n, w) in &pairs {
            let cfg = FasConfig::new(n, w, 1.0, 0.0).unwrap();
            let cov = build_jake_covariance(&cfg).unwrap();
            let vals = eigenvalues_only(&cov).unwrap();
            let eps = 1.0 / (2.0 * n as f64);
            let rank = vals.iter().take_while(|&&s| s > eps).count();
            let _ = Matrix::zeros(1, 1);
            cells.push((rank as f64, w * n as f64 / (n as f64 - 1.0)));
        }
        let sse = |a: f64| -> f64 {
            cells
                .iter()
                .map(|&(rank, geom)| {
                    let r = rank - (a * geom).ceil();
                    r * r
                })
                .sum()
        };
        let mut best = f64::INFINITY;
        for i in 0..50_001 {
            let a = 1.0 + 1e-4 * i as f64;
            best = best.min(sse(a));
        }
        println!("min sse = {best}");
        let mut runs: Vec<(f64, f64)> = Vec::new();
        let mut open: Option<f64> = None;
        for i in 0..50_001 {
            let a = 1.0 + 1e-4 * i as f64;
            if sse(a) == best {
                if open.is_none() {
                    open = Some(a);
                }
            } else if let Some(start) = open.take() {
                runs.push((start, 1.0 + 1e-4 * (i as f64 - 1.0)));
            }
        }
        if let Some(start) = open {
            runs.push((start, 6.0));
        }
        println!("global-min runs: {runs:?}");
        for a in [2.99, 3.05, 3.1, 3.1935, 3.25, 3.3, 3.4] {
            println!("sse({a}) = {}", sse(a));
        }
    }

    if which == "p3" || which.is_empty() {
        for (n, w) in [
            (12usize, 0.5f64),
            (12, 1.0),
            (24, 0.5),
            (24, 1.0),
            (36, 0.5),
            (36, 1.0),
            (100, 1.0),
            (2, 0.01),
        ] {
            let cfg = FasConfig::new(n, w, 1.0, 0.0).unwrap();
            let sol = solve_p3(&cfg).unwrap();
            let rstar = select_replication(&cfg).unwrap();
            let objs: Vec<(usize, f64)> = divisors(n)
                .into_iter()
                .map(|r| (r, p3_objective(&cfg, r).unwrap()))
                .collect();
            println!(
                "N={n} W={w}: p3 -> R={} (cond {}), R*={rstar}, objs: {:?}",
                sol.replication, sol.condition_satisfied, objs
            );
        }
    }

    if which == "ref" || which.is_empty() {
        let quad = QuadratureSpec::default();
        for n in [10usize, 50, 100, 150] {
            let t = Instant::now();
            let cfg = FasConfig::new(n, 1.0, 10.0, 0.0).unwrap();
            let q = OutageQuery::new(cfg).unwrap();
            let p = reference_outage_fas1(&cfg, &q, &quad).unwrap();
            println!(
                "reference outage N={n}: {p:.6e}  ({}s)",
                t.elapsed().as_secs_f32()
            );
        }
    }

    if which == "limit" || which.is_empty() {
        // Criterion 11: N=4000, c=0.01 eigenvalue CDF vs D(x).
        let t = Instant::now();
        let n = 4000usize;
        let c = 0.01;
        let w = c * (n as f64 - 1.0);
        let cfg = FasConfig::new(n, w, 1.0, 0.0).unwrap();
        let cov = build_jake_covariance(&cfg).unwrap();
        println!("build: {}s", t.elapsed().as_secs_f32());
        let t = Instant::now();
        let vals = eigenvalues_only(&cov).unwrap();
        println!("eigenvalues: {}s", t.elapsed().as_secs_f32());
        let mut sup = 0.0f64;
        let mut x = 1e-6f64;
        while x <= 100.0 {
            let dn = vals.iter().filter(|&&s| s <= x).count() as f64 / n as f64;
            let d = limiting_eigen_cdf(x, c, 1.0).unwrap();
            sup = sup.max((dn - d).abs());
            x *= 1.12;
        }
        println!("sup distance: {sup}");
    }
}
