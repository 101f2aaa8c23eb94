//! Tracks the Gaussian-weighted energy (the Huisken functional) along a run;
//! it should be nonincreasing in time up to discretization slack.

use obstacle_mcf::grid::Grid;
use obstacle_mcf::initial::Shape;
use obstacle_mcf::measures::{default_kernel, discrepancy_measure, energy_measure, huisken_functional};
use obstacle_mcf::solver::{run, stability_limit_parts, Scheme, SolverConfig};

fn main() {
    let epsilon = 0.05;
    let delta = epsilon * epsilon;
    let grid = Grid::new(2, 161, 2.0).unwrap();
    let dt = 0.9 * stability_limit_parts(2, grid.h(), epsilon, Some(delta), Scheme::Yosida);
    let config = SolverConfig {
        grid,
        shape: Shape::Sphere {
            center: [0.0; 3],
            radius: 0.5,
        },
        epsilon,
        delta: Some(delta),
        scheme: Scheme::Yosida,
        dt,
        t_end: 0.06,
        snapshot_every: usize::MAX - 1,
        diagnostics_every: 1000,
    };
    let out = run(&config).expect("simulation failed");
    let kernel = default_kernel(&config);

    println!("{:>10} {:>14} {:>14} {:>12}", "t", "energy", "huisken", "xi_sup");
    let mut prev = f64::INFINITY;
    for d in &out.diag {
        let h = huisken_functional(&d.state, kernel, config.dt).unwrap();
        let (xi_sup, _, _) = discrepancy_measure(&d.state);
        let marker = if h > prev { "  <- increased" } else { "" };
        println!(
            "{:>10.5} {:>14.8} {:>14.8} {:>12.3e}{marker}",
            d.state.t,
            energy_measure(&d.state, None),
            h,
            xi_sup
        );
        prev = h;
    }
}
