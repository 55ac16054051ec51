// convergence probe for the splitting solver on random and steering instances
use doa_core::rng::{complex_gaussian, rng_from_seed};
use doa_core::sparse::oracle::coordinate_descent;
use doa_core::sparse::*;
use ndarray::{Array1, Array2};

fn main() {
    let mut worst_gap = 0.0f64;
    let mut max_iters_seen = 0usize;
    let mut fails = 0usize;
    for seed in 0..100u64 {
        let m = 3 + (seed % 4) as usize;
        let n = 8 + (seed % 25) as usize;
        let mut rng = rng_from_seed(1000 + seed);
        let dict = Array2::from_shape_fn((m, n), |_| complex_gaussian(&mut rng, 1.0));
        let y = Array1::from_shape_fn(m, |_| complex_gaussian(&mut rng, 1.0));
        let mu = 0.2 * max_abs_correlation(&dict, &y);
        let problem = LassoProblem { dictionary: &dict, measurement: &y, penalty: mu };
        let sol = solve_l1(&problem, 1e-10, 100_000).unwrap();
        let cd = coordinate_descent(&dict, &y, mu, 1e-10, 200_000);
        let obj_cd = l1_objective(&dict, &y, &cd, mu);
        let gap = (sol.objective - obj_cd).abs() / obj_cd;
        worst_gap = worst_gap.max(gap);
        max_iters_seen = max_iters_seen.max(sol.iterations);
        if !sol.converged { fails += 1; println!("seed {seed}: NOT converged, gap {gap:.3e}"); }
        else if gap > 1e-7 { println!("seed {seed}: converged iters={} gap {gap:.3e}", sol.iterations); }
    }
    println!("worst gap {worst_gap:.3e}, max iters {max_iters_seen}, non-converged {fails}");
}
