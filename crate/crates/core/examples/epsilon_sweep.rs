//! Refinement study with the coupling delta = eps^2, h = eps/4: the total
//! discrepancy mass max_t |xi|(box) should decrease as eps shrinks.
//!
//! Takes a few minutes at the smallest width; pass a custom list to trim it,
//! e.g. `cargo run --example epsilon_sweep -- 0.1 0.05`.

use obstacle_mcf::grid::Grid;
use obstacle_mcf::initial::Shape;
use obstacle_mcf::measures::xi_vanishing_study;
use obstacle_mcf::solver::{Scheme, SolverConfig};

fn main() {
    let epsilons: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("epsilon must be a number"))
        .collect();
    let epsilons = if epsilons.is_empty() {
        vec![0.1, 0.05, 0.025]
    } else {
        epsilons
    };

    let base = SolverConfig {
        grid: Grid::new(2, 161, 2.0).unwrap(),
        shape: Shape::Sphere {
            center: [0.0; 3],
            radius: 0.5,
        },
        epsilon: 0.05,
        delta: Some(0.0025),
        scheme: Scheme::Yosida,
        dt: 1e-6,
        t_end: 0.06,
        snapshot_every: usize::MAX - 1,
        diagnostics_every: usize::MAX - 1,
    };
    let table = xi_vanishing_study(&base, &epsilons).expect("sweep failed");
    println!("epsilon,max_xi_mass");
    for (eps, mass) in table {
        println!("{eps},{mass:.6e}");
    }
}
