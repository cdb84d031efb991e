//! Running the Monte Carlo harness programmatically: a small rate-curve
//! experiment, its CSV/JSON outputs, and log-log slope fits.

use symcov::harness::{
    run_experiment, slope_fit, write_outputs, ExperimentConfig, ExperimentKind,
};
use symcov::io::GroupSpec;

fn main() {
    let mut config = ExperimentConfig::new(ExperimentKind::Fig1Rates);
    config.p = 16;
    config.group = Some(GroupSpec::cyclic(16));
    config.n_grid = Some(vec![10, 20, 40, 80, 160, 320]);
    config.trials = Some(10);
    config.master_seed = 1;

    let summary = run_experiment(&config).unwrap();
    println!("{:>6} {:>14} {:>14}", "n", "empirical linf", "projected linf");
    let curves: Vec<_> = summary
        .curves
        .iter()
        .filter(|c| c.metric == "linf")
        .collect();
    for (e, p) in curves[0].points.iter().zip(&curves[1].points) {
        println!("{:>6} {:>14.4} {:>14.4}", e.n, e.mean, p.mean);
    }

    for curve in &curves {
        let pts: Vec<(usize, f64)> = curve.points.iter().map(|pt| (pt.n, pt.mean)).collect();
        let (slope, _, r2) = slope_fit(&pts).unwrap();
        println!("{} linf slope: {slope:.3} (r^2 = {r2:.3})", curve.method);
    }

    let out_dir = std::env::temp_dir().join("symcov_rate_example");
    let written = write_outputs(&config, &summary, &out_dir).unwrap();
    println!();
    for path in written {
        println!("wrote {}", path.display());
    }
}
