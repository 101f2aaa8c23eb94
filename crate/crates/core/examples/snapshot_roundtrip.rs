//! Demonstrates deterministic persistence: runs a short simulation twice,
//! saves a snapshot, reloads it and verifies bit-exact agreement.

use obstacle_mcf::grid::Grid;
use obstacle_mcf::initial::Shape;
use obstacle_mcf::solver::{
    load_snapshot, run, save_snapshot, stability_limit_parts, Scheme, SolverConfig,
};

fn main() {
    let epsilon = 0.05;
    let grid = Grid::new(2, 161, 2.0).unwrap();
    let dt = 0.9 * stability_limit_parts(2, grid.h(), epsilon, Some(0.0025), Scheme::Yosida);
    let config = SolverConfig {
        grid,
        shape: Shape::Sphere {
            center: [0.0; 3],
            radius: 0.5,
        },
        epsilon,
        delta: Some(0.0025),
        scheme: Scheme::Yosida,
        dt,
        t_end: 0.002,
        snapshot_every: usize::MAX - 1,
        diagnostics_every: usize::MAX - 1,
    };

    let a = run(&config).expect("first run failed");
    let b = run(&config).expect("second run failed");
    let same = a
        .snapshots
        .last()
        .unwrap()
        .field
        .data()
        .iter()
        .zip(b.snapshots.last().unwrap().field.data())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    println!("two runs bit-identical: {same}");

    let dir = std::env::temp_dir().join("obstacle-mcf-roundtrip");
    let state = a.snapshots.last().unwrap();
    save_snapshot(state, &dir).expect("save failed");
    let loaded = load_snapshot(&dir).expect("load failed");
    let roundtrip = loaded
        .field
        .data()
        .iter()
        .zip(state.field.data())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    println!("snapshot round trip bit-exact: {roundtrip} ({})", dir.display());
}
