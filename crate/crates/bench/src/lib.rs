//! Fixtures shared by the benchmarks.

use aspir8::experiment::{build_experiment, Experiment, ExperimentConfig};
use aspir8::scheme::{interface_traces, NoObserver};
use aspir8::TraceData;

/// Insertion experiment with `n` cells per segment, advanced to `t` so the
/// tip carries nontrivial waves.
pub fn insertion_after(n: usize, t: f64) -> Experiment {
    let config = ExperimentConfig {
        n_cells: n,
        ..ExperimentConfig::insertion()
    };
    let Experiment { initial, solver } = build_experiment(&config).expect("preset is valid");
    let state = solver
        .run(initial, t, &mut NoObserver)
        .expect("warm-up run");
    Experiment {
        initial: state,
        solver,
    }
}

/// Tip traces, relaxation speed and device area of a warmed-up suction run.
pub fn suction_traces() -> (TraceData, f64, f64) {
    let config = ExperimentConfig {
        n_cells: 100,
        ..ExperimentConfig::suction()
    };
    let Experiment { initial, solver } = build_experiment(&config).expect("preset is valid");
    let state = solver
        .run(initial, 1e-3, &mut NoObserver)
        .expect("warm-up run");
    let trace = interface_traces(&state, &solver.params, &solver.catheter);
    (trace, solver.lambda(&state), solver.catheter.area)
}
