use entropica::capacity::{CapacitySolver, ChannelSpec, SolverOptions};
use entropica::density::{FamilySpec, GridConfig, MixtureComponent};
use std::time::Instant;

fn main() {
    let grid = GridConfig::default();
    let a = 3.0f64.sqrt();
    let noises: Vec<(&str, FamilySpec)> = vec![
        ("gauss", FamilySpec::Gaussian { mean: 0.0, variance: 1.0 }),
        ("uniform", FamilySpec::Uniform { lower: -a, upper: a }),
        ("laplace", FamilySpec::Laplace { location: 0.0, scale: 0.5f64.sqrt() }),
        ("mixture", FamilySpec::GaussMixture { components: vec![
            MixtureComponent { weight: 0.5, mean: -0.75, variance: 0.4375 },
            MixtureComponent { weight: 0.5, mean: 0.75, variance: 0.4375 },
        ]}),
    ];
    for (name, family) in noises {
        for snr in [0.1, 0.5, 1.0, 4.0, 10.0] {
            let noise = family.to_grid(&grid).unwrap();
            let ch = ChannelSpec::new(noise, snr).unwrap();
            let solver = CapacitySolver::new(SolverOptions::default());
            let t0 = Instant::now();
            match solver.capacity_power_constrained(&ch) {
                Ok(r) => println!(
                    "{name} snr={snr}: C={:.6} awgn={:.6} iters={} gap={:.2e} pw={:.6} s={:.4} dt={:.1}s",
                    r.capacity, 0.5f64 * (1.0 + snr).ln(), r.iterations, r.ba_gap, r.power_used, r.multiplier,
                    t0.elapsed().as_secs_f64()
                ),
                Err(e) => println!("{name} snr={snr}: ERR {e} dt={:.1}s", t0.elapsed().as_secs_f64()),
            }
        }
    }
}
