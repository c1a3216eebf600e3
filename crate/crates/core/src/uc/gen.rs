//! Seeded random power systems.
//!
//! Buses land uniformly in the unit square; pairs closer than the
//! neighbor radius become line candidates, and candidates are kept while
//! a Poisson draw at the mean-degree rate comes back nonzero, stopping
//! once the target line count is reached. Placements whose candidate
//! graph cannot be connected are redrawn wholesale, otherwise only the
//! line selection is redrawn, all from one seed stream so a fixed seed
//! reproduces the system bitwise.

use super::{Bus, BusKind, Generator, Line, Load, PowerSystem, UcError};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

/// Buses within this distance of each other are line candidates.
const NEIGHBOR_RADIUS: f64 = 0.4;
/// Mean node degree aimed for by the line selection.
const MEAN_DEGREE: f64 = 2.67;
/// Per-unit reactance per unit of line length.
const REACTANCE_PER_LENGTH: f64 = 0.1;
/// Combined budget for placement and line redraws.
const MAX_ATTEMPTS: usize = 100;

pub fn generate_power_system(n_buses: usize, seed: u64) -> Result<PowerSystem, UcError> {
    // Below four buses the floor-division type split places no
    // generator, so nothing smaller can validate.
    assert!(n_buses >= 4, "a generated network needs at least four buses");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poisson = Poisson::new(MEAN_DEGREE).expect("rate is positive");
    let target = (MEAN_DEGREE * n_buses as f64 / 2.0).round() as usize;
    let target = target.max(n_buses - 1);

    let mut held: Option<(Vec<(f64, f64)>, Vec<(usize, usize)>)> = None;
    for _ in 0..MAX_ATTEMPTS {
        let (positions, candidates) = match held.take() {
            Some(kept) => kept,
            None => {
                let positions: Vec<(f64, f64)> =
                    (0..n_buses).map(|_| (rng.random(), rng.random())).collect();
                let mut candidates = Vec::new();
                for i in 0..n_buses {
                    for j in i + 1..n_buses {
                        if distance(positions[i], positions[j]) <= NEIGHBOR_RADIUS {
                            candidates.push((i, j));
                        }
                    }
                }
                (positions, candidates)
            }
        };
        if !spans(n_buses, &candidates) {
            // No subset of these candidates can connect the network;
            // only a fresh placement helps.
            continue;
        }
        let mut order = candidates.clone();
        order.shuffle(&mut rng);
        let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(target);
        for &pair in &order {
            if chosen.len() >= target {
                break;
            }
            if poisson.sample(&mut rng) >= 1.0 {
                chosen.push(pair);
            }
        }
        if spans(n_buses, &chosen) {
            return Ok(assemble(n_buses, &positions, chosen, &mut rng));
        }
        held = Some((positions, candidates));
    }
    Err(UcError::GenerationFailure(format!(
        "no connected {n_buses}-bus network within {MAX_ATTEMPTS} attempts"
    )))
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// True when the edge set connects all `n` nodes.
fn spans(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut components = n;
    for &(i, j) in edges {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            components -= 1;
        }
    }
    components == 1
}

/// Unit-concentration Dirichlet draw: normalized standard exponentials.
fn dirichlet_shares(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let sum: f64 = raw.iter().sum();
    for v in &mut raw {
        *v /= sum;
    }
    raw
}

fn assemble(
    n: usize,
    positions: &[(f64, f64)],
    chosen: Vec<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> PowerSystem {
    // Half the buses carry load only, a fifth generate only, three tenths
    // do both; rounding leftovers are pure transfer buses.
    let n_load = n / 2;
    let n_gen = n / 5;
    let n_both = 3 * n / 10;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut kinds = vec![BusKind::Transfer; n];
    for &i in &idx[..n_load] {
        kinds[i] = BusKind::Load;
    }
    for &i in &idx[n_load..n_load + n_gen] {
        kinds[i] = BusKind::Generation;
    }
    for &i in &idx[n_load + n_gen..n_load + n_gen + n_both] {
        kinds[i] = BusKind::Both;
    }
    let buses: Vec<Bus> = kinds
        .iter()
        .zip(positions)
        .map(|(&kind, &(x, y))| Bus { kind, x, y })
        .collect();

    let mut generators = Vec::new();
    for (i, bus) in buses.iter().enumerate() {
        if !bus.kind.hosts_generator() {
            continue;
        }
        let p_max: f64 = rng.random_range(60.0..=600.0);
        let p_min = rng.random_range(0.2..=0.4) * p_max;
        // A ramp below the output floor would make cold starts
        // impossible, hence the max.
        let ramp = (rng.random_range(0.2..=0.4) * p_max).max(p_min);
        let startup_cost = rng.random_range(5.0..=1600.0);
        let energy_cost = rng.random_range(5.0..=30.0);
        let no_load_cost = rng.random_range(3.0 * energy_cost..=6.0 * energy_cost);
        let initially_on = rng.random_range(0..=1) == 1;
        generators.push(Generator {
            bus: i,
            p_max,
            p_min,
            ramp_up: ramp,
            ramp_down: ramp,
            startup_cost,
            shutdown_cost: startup_cost,
            energy_cost,
            no_load_cost,
            initially_on,
            p_initial: if initially_on { p_min } else { 0.0 },
        });
    }

    let load_buses: Vec<usize> = buses
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind.hosts_load())
        .map(|(i, _)| i)
        .collect();
    let shares = dirichlet_shares(load_buses.len(), rng);
    let loads: Vec<Load> = load_buses
        .into_iter()
        .zip(shares)
        .map(|(bus, share)| Load { bus, share })
        .collect();

    let total: f64 = generators.iter().map(|g| g.p_max).sum();
    let lines: Vec<Line> = chosen
        .into_iter()
        .map(|(i, j)| Line {
            from: i,
            to: j,
            reactance: distance(positions[i], positions[j]) * REACTANCE_PER_LENGTH,
            capacity: rng.random_range(0.15..=0.35) * total,
        })
        .collect();

    PowerSystem { buses, lines, generators, loads, reference_bus: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_regenerates_the_same_system() {
        let a = generate_power_system(8, 11).unwrap();
        let b = generate_power_system(8, 11).unwrap();
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
        let c = generate_power_system(8, 12).unwrap();
        assert_ne!(ja, serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn generated_systems_validate_across_sizes_and_seeds() {
        for n in 4..=10 {
            for seed in 0..5 {
                let sys = generate_power_system(n, seed).unwrap();
                sys.validate().unwrap_or_else(|e| panic!("n={n} seed={seed}: {e}"));
            }
        }
    }

    #[test]
    fn sampled_parameters_stay_in_their_ranges() {
        for seed in 0..10 {
            let sys = generate_power_system(10, seed).unwrap();
            let total = sys.total_capacity();
            for g in &sys.generators {
                assert!((60.0..=600.0).contains(&g.p_max));
                let frac = g.p_min / g.p_max;
                assert!((0.2..=0.4).contains(&frac), "floor fraction {frac}");
                assert!(g.ramp_up >= g.p_min);
                assert!(g.ramp_up <= 0.4 * g.p_max + 1e-9);
                assert_eq!(g.ramp_down, g.ramp_up);
                assert!((5.0..=1600.0).contains(&g.startup_cost));
                assert_eq!(g.shutdown_cost, g.startup_cost);
                assert!((5.0..=30.0).contains(&g.energy_cost));
                assert!(g.no_load_cost >= 3.0 * g.energy_cost);
                assert!(g.no_load_cost <= 6.0 * g.energy_cost);
                let want = if g.initially_on { g.p_min } else { 0.0 };
                assert_eq!(g.p_initial, want);
            }
            for line in &sys.lines {
                assert!(line.capacity >= 0.15 * total && line.capacity <= 0.35 * total);
                let d = distance(
                    (sys.buses[line.from].x, sys.buses[line.from].y),
                    (sys.buses[line.to].x, sys.buses[line.to].y),
                );
                assert!(d <= NEIGHBOR_RADIUS);
                assert!((line.reactance - d * REACTANCE_PER_LENGTH).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bus_type_split_follows_the_documented_fractions() {
        let sys = generate_power_system(30, 7).unwrap();
        let count = |k: BusKind| sys.buses.iter().filter(|b| b.kind == k).count();
        assert_eq!(count(BusKind::Load), 15);
        assert_eq!(count(BusKind::Generation), 6);
        assert_eq!(count(BusKind::Both), 9);
        assert_eq!(count(BusKind::Transfer), 0);
        assert_eq!(sys.generators.len(), 15);
        assert_eq!(sys.loads.len(), 24);

        // 8 buses leave one transfer bus after flooring.
        let sys = generate_power_system(8, 11).unwrap();
        assert_eq!(count_of(&sys, BusKind::Load), 4);
        assert_eq!(count_of(&sys, BusKind::Generation), 1);
        assert_eq!(count_of(&sys, BusKind::Both), 2);
        assert_eq!(count_of(&sys, BusKind::Transfer), 1);
        assert_eq!(sys.generators.len(), 3);
    }

    fn count_of(sys: &PowerSystem, k: BusKind) -> usize {
        sys.buses.iter().filter(|b| b.kind == k).count()
    }

    #[test]
    fn shares_are_positive_and_sum_to_one() {
        for seed in 0..5 {
            let sys = generate_power_system(12, seed).unwrap();
            let sum: f64 = sys.loads.iter().map(|l| l.share).sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(sys.loads.iter().all(|l| l.share > 0.0));
        }
    }
}
