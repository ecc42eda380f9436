//! Steps-per-second of the default integrator.
use std::time::Instant;

use dopoq_core::engine::{run_trajectory, NullSampler};
use dopoq_core::Params;

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(64);
    let params = Params {
        n_points: n,
        pump_e: 0.99,
        dt: 1e-3,
        t_total: 1000.0,
        t_transient: 0.0,
        noise_enabled: std::env::args().nth(2).is_none(),
        ..Params::default()
    };
    let start = Instant::now();
    let out = run_trajectory(&params, 0, &mut NullSampler).unwrap();
    let secs = start.elapsed().as_secs_f64();
    println!(
        "N={n} steps={} {:.3} s  {:.0} steps/s",
        out.steps,
        secs,
        out.steps as f64 / secs
    );
}
