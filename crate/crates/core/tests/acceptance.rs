//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use broodsim::abm::{account, NestRegistry};
use broodsim::analysis::{
    abm_vector_field, analytic_field, convergence_study, ess_search, mean_direction_cosine, EssSearchConfig,
};
use broodsim::dynamics::{integrate_trajectory, lattice, lattice_point, replicator_rhs};
use broodsim::{
    expected_payoffs, nash_equilibrium, payoff_residual, AgentType, ExactParams, ExactPoint, Model, Params, Point,
    PopulationCounts, Rational64,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_params(rng: &mut StdRng) -> (f64, f64, f64) {
    loop {
        let draw = |rng: &mut StdRng| 3.0 * (1.0 - rng.random::<f64>());
        let (h, e, i) = (draw(rng), draw(rng), draw(rng));
        if h - e - i > 0.0 {
            return (h, e, i);
        }
    }
}

fn equilibrium_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xA11CE);
    let (mut worst_residual, mut worst_gap) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (h, e, i) = random_params(&mut rng);
        let params = Params::new(h, e, i).map_err(|err| err.to_string())?;
        let ne = nash_equilibrium(&params).map_err(|err| err.to_string())?;
        let closed = [e * (h - e - i) / (h * (i + e)), e / h, i / (i + e)];
        let got = ne.as_array();
        for k in 0..3 {
            worst_gap = worst_gap.max((got[k] - closed[k]).abs());
        }
        worst_residual = worst_residual.max(payoff_residual(&ne, &params).map_err(|err| err.to_string())?);
    }
    ensure(worst_residual <= 1e-10, || format!("residual {worst_residual:e} > 1e-10"))?;
    ensure(worst_gap <= 1e-12, || format!("closed-form gap {worst_gap:e} > 1e-12"))?;
    Ok(format!("max residual {worst_residual:.2e}, max gap {worst_gap:.2e}"))
}

fn canonical_equilibrium() -> Outcome {
    let params = Params::new(2.0, 0.5, 0.5).unwrap();
    let ne = nash_equilibrium(&params).map_err(|err| err.to_string())?;
    let want = [0.25, 0.25, 0.5];
    let got = ne.as_array();
    ensure((0..3).all(|k| (got[k] - want[k]).abs() <= 1e-12), || format!("NE {got:?}"))?;
    let u = expected_payoffs(&ne, &params).finite().map_err(|err| err.to_string())?;
    ensure(u.iter().all(|x| (x - 1.0).abs() <= 1e-12), || format!("payoffs {u:?}"))?;
    Ok(format!("NE {got:?}, payoffs {u:?}"))
}

/// Every cheater choice vector for `cheaters` birds over `nests` nests.
fn all_choices(cheaters: u64, nests: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..cheaters {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..nests).map(move |n| {
                    let mut v = prefix.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    out
}

fn exhaustive_enumeration() -> Outcome {
    let r = |n: i64, d: i64| Rational64::new(n, d);
    let param_sets = [
        ExactParams::new(r(2, 1), r(1, 2), r(1, 2)).unwrap(),
        ExactParams::new(r(3, 1), r(1, 3), r(1, 4)).unwrap(),
        ExactParams::new(r(1, 1), r(3, 5), r(1, 2)).unwrap(),
    ];
    let mut states = 0;
    for params in &param_sets {
        for total in 1..=6u64 {
            for s in 0..=total {
                for i in 0..=total - s {
                    let c = total - s - i;
                    if s + i == 0 {
                        continue;
                    }
                    let counts = PopulationCounts::new(s, i, c).unwrap();
                    let choices = all_choices(c, s + i);
                    let mut sums = [Rational64::from_integer(0); 3];
                    for choice in &choices {
                        let registry = NestRegistry::from_choices(s + i, choice).unwrap();
                        let outcome = account(&counts, params, &registry);
                        for t in AgentType::ALL {
                            if let Some(m) = outcome.mean_utility[t] {
                                sums[t.index()] += m;
                            }
                        }
                        if i > 0 {
                            ensure(outcome.mean_utility[AgentType::Identifier] == Some(params.identifier_payoff()), || {
                                format!("identifier utility varies at ({s},{i},{c})")
                            })?;
                        }
                    }
                    let k = Rational64::from_integer(choices.len() as i64);
                    let point: ExactPoint = counts.proportions();
                    let analytic = expected_payoffs(&point, params);
                    let want = [analytic.sitter.finite().ok(), Some(analytic.identifier), Some(analytic.cheater)];
                    for t in AgentType::ALL {
                        if counts.get(t) == 0 {
                            continue;
                        }
                        let got = sums[t.index()] / k;
                        ensure(Some(got) == want[t.index()], || {
                            format!("({s},{i},{c}) {}: enumerated {got} vs closed form {:?}", t.name(), want[t.index()])
                        })?;
                    }
                    states += 1;
                }
            }
        }
    }
    Ok(format!("{states} population states matched exactly"))
}

fn monte_carlo_convergence() -> Outcome {
    let params = Params::new(2.0, 0.5, 0.5).unwrap();
    let ne = nash_equilibrium(&params).unwrap();
    let study = convergence_study(&ne, &params, 400, &[100, 400, 1600, 6400], 4).map_err(|err| err.to_string())?;
    let mut worst_z = 0.0f64;
    for row in &study.rows {
        for t in AgentType::ALL {
            let (mean, se) = (row.mean[t].unwrap(), row.stderr[t].unwrap());
            let gap = (mean - 1.0).abs();
            ensure(gap <= 3.0 * se + 1e-12, || {
                format!("reps {} {}: mean {mean} off by {gap:.3e} > 3 SE ({se:.3e})", row.reps, t.name())
            })?;
            if se > 0.0 {
                worst_z = worst_z.max(gap / se);
            }
        }
    }
    let mut slopes = Vec::new();
    for t in [AgentType::Sitter, AgentType::Cheater] {
        let slope = study.stderr_slope[t].ok_or_else(|| format!("no slope for {}", t.name()))?;
        ensure((slope + 0.5).abs() <= 0.1, || format!("{} stderr slope {slope:.3}", t.name()))?;
        slopes.push(slope);
    }
    Ok(format!("max |z| {worst_z:.2}, stderr slopes {slopes:.3?}"))
}

fn field_agreement() -> Outcome {
    let params = Params::new(2.0, 0.5, 0.5).unwrap();
    let abm = abm_vector_field(&params, 300, 150, 10, 0.0, 7).map_err(|err| err.to_string())?;
    let analytic = analytic_field(&params, 10).map_err(|err| err.to_string())?;
    let cosine = mean_direction_cosine(&abm, &analytic, 0.1).ok_or("no interior points compared")?;
    ensure(cosine >= 0.8, || format!("mean direction cosine {cosine:.4} < 0.8"))?;

    let ne = nash_equilibrium(&params).unwrap();
    let order = 20;
    let mut zeros = 0;
    for abc in lattice(order) {
        let p: Point = lattice_point(abc, order);
        let still = replicator_rhs(&p, &params).norm() <= 1e-12;
        let expected = p.is_vertex() || p.l1_distance(&ne) <= 1e-12;
        ensure(still == expected, || format!("zero-vector mismatch at {:?}", p.as_array()))?;
        zeros += usize::from(still);
    }
    ensure(zeros == 4, || format!("{zeros} zero vectors on the order-20 lattice, expected 4"))?;
    Ok(format!("mean cosine {cosine:.4}; zero vectors only at NE and vertices"))
}

fn ess_heuristic() -> Outcome {
    let params = Params::new(2.0, 0.5, 0.5).unwrap();
    let ne = nash_equilibrium(&params).unwrap();
    let result = ess_search(&params, &EssSearchConfig::default(), 1).map_err(|err| err.to_string())?;
    let interior: Vec<_> = result.interior_candidates().collect();
    ensure(interior.len() == 1, || format!("{} interior candidates", interior.len()))?;
    let c = interior[0];
    let dist = c.location.l1_distance(&ne);
    ensure(dist <= 0.02, || format!("interior candidate {:?} is {dist:.4} from NE", c.location.as_array()))?;
    ensure(!c.classification.is_asymptotically_stable(), || format!("classified {}", c.classification))?;
    ensure(!result.ess_found, || "ess_found is true".to_string())?;
    ensure(c.eigenvalues.iter().all(|z| z.re > 0.0), || format!("eigenvalues {:?}", c.eigenvalues))?;
    let (re, im) = (c.eigenvalues[0].re, c.eigenvalues[0].im.abs());
    ensure((re - 0.125).abs() <= 0.01 && (im - 0.484).abs() <= 0.01, || {
        format!("eigenvalues {re:.4} ± {im:.4}i, expected 0.125 ± 0.484i")
    })?;
    Ok(format!(
        "candidate {:.4?} ({}), eigenvalues {re:.4} ± {im:.4}i, {} candidates total",
        c.location.as_array(),
        c.classification,
        result.candidates.len()
    ))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_broodsim");
    let mut rng = StdRng::seed_from_u64(0x5EED);
    let run = |seed: u64, point: &str, mu: &str, workers: u64| -> Result<Vec<u8>, String> {
        let out = Command::new(bin)
            .args(["simulate", "--h", "2", "--e", "0.5", "--i", "0.5", "--n", "300", "--gens", "50"])
            .args(["--point", point, "--mu", mu, "--seed", &seed.to_string(), "--workers", &workers.to_string()])
            .output()
            .map_err(|err| err.to_string())?;
        ensure(out.status.success(), || format!("seed {seed}: exit {:?}", out.status.code()))?;
        Ok(out.stdout)
    };
    for k in 0..50 {
        let seed: u64 = rng.random();
        let a: f64 = rng.random_range(0.05..0.9);
        let b: f64 = rng.random_range(0.05..(0.95 - a));
        let point = format!("{a},{b},{}", 1.0 - a - b);
        let mu = if k % 2 == 0 { "0" } else { "0.01" };
        let reference = run(seed, &point, mu, 1)?;
        ensure(reference.iter().filter(|&&c| c == b'\n').count() == 51, || format!("seed {seed}: wrong row count"))?;
        for workers in [1, 2, 8] {
            for _ in 0..2 {
                ensure(run(seed, &point, mu, workers)? == reference, || {
                    format!("seed {seed}: output differs with {workers} workers")
                })?;
            }
        }
    }
    Ok("50 seeds x workers {1,2,8} x 2 repeats byte-identical".to_string())
}

fn conservation_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xC0C0A);
    let cases = 10_000;
    for case in 0..cases {
        let (h, e, i) = (rng.random_range(0.05..3.0), rng.random_range(0.05..3.0), rng.random_range(0.05..3.0));
        let params = Params::new(h, e, i).unwrap();
        let raw = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let total: f64 = raw.iter().sum();
        let p = Point::from_array(raw.map(|x| x / total)).map_err(|err| err.to_string())?;
        let sum: f64 = p.as_array().iter().sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("case {case}: share sum {sum}"))?;

        let v = replicator_rhs(&p, &params);
        ensure(v.component_sum().abs() <= 1e-12, || format!("case {case}: tangency {:e}", v.component_sum()))?;
        if case % 100 == 0 {
            let traj = integrate_trajectory(&p, &params, 0.01, 50).map_err(|err| err.to_string())?;
            for (_, q) in traj.samples() {
                let s: f64 = q.as_array().iter().sum();
                ensure((s - 1.0).abs() <= 1e-9 && q.as_array().iter().all(|&x| x >= 0.0), || {
                    format!("case {case}: trajectory left the simplex at {:?}", q.as_array())
                })?;
            }
        }

        let n = rng.random_range(1..=60u64);
        let counts = PopulationCounts::from_point(&p, n).map_err(|err| err.to_string())?;
        let mu = if case % 3 == 0 { 0.05 } else { 0.0 };
        let model = Model::new(counts, params, mu, rng.random()).map_err(|err| err.to_string())?;
        let (next, report) = model.step();
        let parasitic = if counts.nests() > 0 { counts.cheaters() } else { 0 };
        ensure(report.eggs_laid == counts.nests() + parasitic, || {
            format!("case {case}: {} eggs laid by {} nests and {} cheaters", report.eggs_laid, counts.nests(), counts.cheaters())
        })?;
        let hatched: u64 = report.eggs_hatched.iter().map(|(_, &k)| k).sum();
        ensure(hatched + report.eggs_discarded == report.eggs_laid, || format!("case {case}: eggs not conserved"))?;
        ensure(report.eggs_hatched[AgentType::Sitter] == counts.sitters(), || format!("case {case}: sitter eggs lost"))?;
        ensure(next.nest_registry().is_cleared(), || format!("case {case}: nests not cleared"))?;
        ensure(next.counts().total() == n && report.post_counts.total() == n, || {
            format!("case {case}: population {} -> {}", n, next.counts().total())
        })?;
        let q: Point = next.proportions();
        let s: f64 = q.as_array().iter().sum();
        ensure((s - 1.0).abs() <= 1e-9, || format!("case {case}: post-step share sum {s}"))?;
    }
    Ok(format!("{cases} randomized cases"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "equilibrium matches closed form", budget: Duration::from_secs(1), check: equilibrium_oracle },
        Criterion { id: 2, name: "canonical equilibrium and payoff", budget: Duration::from_secs(1), check: canonical_equilibrium },
        Criterion { id: 3, name: "exhaustive small-population enumeration", budget: Duration::from_secs(10), check: exhaustive_enumeration },
        Criterion { id: 4, name: "Monte Carlo convergence at equilibrium", budget: Duration::from_secs(120), check: monte_carlo_convergence },
        Criterion { id: 5, name: "agent-based field agrees with replicator field", budget: Duration::from_secs(300), check: field_agreement },
        Criterion { id: 6, name: "ESS search finds no ESS", budget: Duration::from_secs(300), check: ess_heuristic },
        Criterion { id: 7, name: "CLI output independent of workers and reruns", budget: Duration::from_secs(600), check: cli_determinism },
        Criterion { id: 8, name: "conservation laws", budget: Duration::from_secs(60), check: conservation_suite },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, budget {:?}", c.budget))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({}): {detail} [{elapsed:.2?}]", c.id, c.name),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {} ({}): {why} [{elapsed:.2?}]", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
