//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! runtime budget. Fixed seeds throughout; exits nonzero if any line fails.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use entwalk_cli::checks::run_selfcheck;
use entwalk_cli::config::DEFAULT_SEED;
use entwalk_cli::experiments::{run_area_volume, run_cutoff, run_entanglement_trace, run_purity_convergence};
use entwalk_cli::tripartite::{run_tripartite, Start};
use entwalk_cli::{EngineKind, Experiment, ExperimentConfig, Overrides};
use entwalk_core::chain::{
    expected_purity, initial_size_distribution, lemma1_bound, limit_size_distribution, purity_series,
    spectral_gap_numeric, theorem1_thresholds, ChainParams, ChainScope, ChainStart,
};
use entwalk_core::density::{entropy_vn, reduced_density};
use entwalk_core::ensemble::trial_rng;
use entwalk_core::gates::{GateEvent, GateMode};
use entwalk_core::oracles::{asymptotic_purity, page_average, stabilizer_pmf};
use entwalk_core::stabilizer::Tableau;
use entwalk_core::statevector::StateVector;
use entwalk_core::topology::Topology;
use rand::Rng;

type Outcome = Result<String, String>;

fn cfg(experiment: Experiment, o: Overrides) -> Result<ExperimentConfig, String> {
    ExperimentConfig::resolve(experiment, Overrides { seed: Some(DEFAULT_SEED), ..o }).map_err(|e| e.to_string())
}

fn grid(s: &str) -> Option<entwalk_cli::StepGrid> {
    Some(s.parse().expect("valid grid"))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn asymptotic_purity_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=12 {
        let limit = limit_size_distribution(&initial_size_distribution(n, ChainStart::BasisState).unwrap()).unwrap();
        for n_a in 1..n {
            let chain = expected_purity(&limit, n_a).unwrap();
            let formula = (2f64.powi(n_a as i32) + 2f64.powi((n - n_a) as i32)) / (2f64.powi(n as i32) + 1.0);
            worst = worst.max((chain - formula).abs());
        }
    }
    check(worst <= 1e-10, format!("max |chain − formula| = {worst:.2e} over N = 2..12, every N_A"))
}

fn purity_decay_bound() -> Outcome {
    let mut notes = Vec::new();
    for n in [4usize, 6, 8, 10] {
        let horizon = 20 * 9 * n * (n - 1);
        let start = initial_size_distribution(n, ChainStart::BasisState).unwrap();
        let series = purity_series(&start, n / 2, horizon).unwrap();
        let asym = asymptotic_purity(n / 2, n - n / 2).unwrap();
        if (series[0].limit - asym).abs() > 1e-14 {
            return Err(format!("N = {n}: chain limit {} vs formula {asym}", series[0].limit));
        }
        let worst = series.iter().map(|p| p.deviation.abs() / lemma1_bound(n, p.step)).fold(0.0, f64::max);
        if worst > 1.0 {
            return Err(format!("N = {n}: |deviation| / bound reaches {worst:.3}"));
        }
        notes.push(format!("N={n}: max ratio {worst:.2e} over {} steps", horizon + 1));
    }
    Ok(notes.join("; "))
}

fn cross_engine_purity() -> Outcome {
    let c = cfg(
        Experiment::PurityConvergence,
        Overrides {
            n: Some(vec![6]),
            na: Some(3),
            engine: Some(EngineKind::StateVector),
            mode: Some(GateMode::Haar),
            steps: grid("0,5,10,20,40,80"),
            trials: Some(2000),
            ..Default::default()
        },
    )?;
    let p = run_purity_convergence(&c).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in &p.rows {
        let (mc, se) = r.mc.ok_or("no Monte Carlo column")?;
        // Step 0 is deterministic (se = 0); allow rounding there.
        let z = (mc - r.exact).abs() / se.max(1e-12 / 3.0);
        worst = worst.max(z);
    }
    check(worst <= 3.0, format!("max |MC − exact| = {worst:.2} SE over n ∈ {{0,5,10,20,40,80}}"))
}

fn clifford_cross_validation() -> Outcome {
    const N: usize = 6;
    let cuts: Vec<Vec<usize>> =
        (1..(1usize << N) - 1).map(|m| (0..N).filter(|q| (m >> q) & 1 == 1).collect()).collect();
    let mut compared = 0usize;
    for seq in 0..100u64 {
        let mut rng = trial_rng(DEFAULT_SEED, 0xc11f, seq);
        let mut sv = StateVector::new_basis(N).unwrap();
        let mut tab = Tableau::new(N).unwrap();
        for step in 1..=200 {
            let ev = GateEvent::sample(N, Topology::AllToAll, GateMode::Clifford, &mut rng).unwrap();
            sv.apply_gate_event(&ev).unwrap();
            tab.apply_gate_event(&ev).unwrap();
            for cut in &cuts {
                let side: Vec<usize> =
                    if 2 * cut.len() <= N { cut.clone() } else { (0..N).filter(|q| !cut.contains(q)).collect() };
                let s = entropy_vn(&reduced_density(&sv, &side).unwrap()).unwrap();
                let e = tab.cut_entanglement(cut).unwrap() as f64;
                if (s - s.round()).abs() > 1e-9 || s.round() != e {
                    return Err(format!("sequence {seq}, step {step}, cut {cut:?}: statevector {s}, tableau {e}"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} cut evaluations agree (100 sequences × 200 steps × 62 cuts)"))
}

fn trace_mean(n: usize, n_a: usize, engine: EngineKind, steps: usize, trials: usize) -> Result<Vec<f64>, String> {
    let c = cfg(
        Experiment::Trace,
        Overrides {
            n: Some(vec![n]),
            na: Some(n_a),
            engine: Some(engine),
            steps: grid(&steps.to_string()),
            trials: Some(trials),
            ..Default::default()
        },
    )?;
    let tr = run_entanglement_trace(&c).map_err(|e| e.to_string())?;
    Ok(tr.ebits.iter().map(|r| r[0]).collect())
}

fn page_oracle() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, n_a, tol) in [(2usize, 1usize, 0.02), (4, 2, 0.03)] {
        let samples = trace_mean(n, n_a, EngineKind::StateVector, 50 * n * n, 10_000)?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let target = page_average(n_a, n - n_a).unwrap();
        ok &= (mean - target).abs() <= tol;
        notes.push(format!("N={n}: {mean:.4} vs {target:.4} ± {tol}"));
    }
    check(ok, notes.join("; "))
}

fn stabilizer_pmf_check() -> Outcome {
    let samples = trace_mean(2, 1, EngineKind::Stabilizer, 200, 10_000)?;
    let p1 = samples.iter().filter(|&&e| e == 1.0).count() as f64 / samples.len() as f64;
    let p0 = samples.iter().filter(|&&e| e == 0.0).count() as f64 / samples.len() as f64;
    let law = stabilizer_pmf(2, 1).unwrap();
    // 36 of the 60 two-qubit stabilizer states are product states.
    let exact_ok = (law[0] - 36.0 / 60.0).abs() < 1e-14 && (law[1] - 24.0 / 60.0).abs() < 1e-14;
    let ok = exact_ok && (p0 - 0.6).abs() <= 0.02 && (p1 - 0.4).abs() <= 0.02 && p0 + p1 == 1.0;
    check(ok, format!("P(0) = {p0:.4}, P(1) = {p1:.4} from 10^4 walks of 200 steps"))
}

fn spectral_gap() -> Outcome {
    let mut worst_gap_ratio = f64::INFINITY;
    for (scope, range) in [(ChainScope::Lumped, 3..=10usize), (ChainScope::FullSet, 3..=8)] {
        for n in range {
            let r = spectral_gap_numeric(n, scope).unwrap();
            let nf = n as f64;
            let floor = 4.0 / (9.0 * nf * (nf - 1.0));
            let upper = 1.0 - 4.0 / (9.0 * nf);
            if r.gap < floor {
                return Err(format!("{scope:?} N={n}: gap {} < {floor}", r.gap));
            }
            if (r.leading - 1.0).abs() > 1e-10 {
                return Err(format!("{scope:?} N={n}: leading eigenvalue {}", r.leading));
            }
            if let Some(bad) = r.nonunit_eigenvalues.iter().find(|&&l| l < -0.5 - 1e-12 || l > upper + 1e-12) {
                return Err(format!("{scope:?} N={n}: eigenvalue {bad} outside [−1/2, {upper}]"));
            }
            worst_gap_ratio = worst_gap_ratio.min(r.gap / floor);
        }
    }
    Ok(format!("lumped N=3..10 and full N=3..8 within bounds; min gap / floor = {worst_gap_ratio:.3}"))
}

fn moments() -> Outcome {
    let c = cfg(Experiment::Selfcheck, Overrides { trials: Some(100_000), ..Default::default() })?;
    let s = run_selfcheck(&c).map_err(|e| e.to_string())?;
    check(
        s.bloch_ok() && s.clifford_ok(),
        format!(
            "Haar max |E[r_u r_u'] − δ/3| = {:.2e}; 24-Clifford max error {:.1e}; Haar moment max z {:.2} (reported)",
            s.bloch_max_error,
            s.clifford_max_error(),
            s.haar_max_z()
        ),
    )
}

fn cutoff_trend() -> Outcome {
    let c = cfg(
        Experiment::Cutoff,
        Overrides {
            n: Some(vec![8, 12, 16]),
            engine: Some(EngineKind::Stabilizer),
            trials: Some(1000),
            ..Default::default()
        },
    )?;
    let sweep = run_cutoff(&c).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut widths = Vec::new();
    let mut notes = Vec::new();
    for curve in &sweep.curves {
        let pts = curve.series.points();
        let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
        let rel = curve.series.relative_width();
        ok &= first >= 0.9 && last <= 0.05 && rel.is_some();
        widths.push(rel.unwrap_or(f64::NAN));
        notes.push(format!("N={}: TV {first:.3}→{last:.3}, rel width {:.3}", curve.n, rel.unwrap_or(f64::NAN)));
    }
    ok &= widths.windows(2).all(|w| w[1] < w[0]);
    check(ok, notes.join("; "))
}

fn area_volume() -> Outcome {
    let c = cfg(
        Experiment::AreaVolume,
        Overrides {
            n: Some(vec![16]),
            topology: Some(Topology::Ring),
            engine: Some(EngineKind::Stabilizer),
            ..Default::default()
        },
    )?;
    let a = run_area_volume(&c).map_err(|e| e.to_string())?;
    let early = a.grid_index(8).ok_or("grid lacks n = N/2")?;
    let late = a.grid_index(20 * 16 * 16).ok_or("grid lacks n = 20·N²")?;
    let plateau: Vec<usize> = (0..a.blocks.len()).filter(|&b| a.blocks[b] >= 3).collect();
    let level = plateau.iter().map(|&b| a.mean[early][b]).sum::<f64>() / plateau.len() as f64;
    let flat = plateau.iter().all(|&b| (a.mean[early][b] - level).abs() <= 2.0 * a.stderr[early][b]);
    let worst_late = (0..a.blocks.len()).map(|b| (a.mean[late][b] - a.asymptotic[b]).abs()).fold(0.0, f64::max);
    check(
        flat && worst_late <= 0.1,
        format!(
            "n=8 plateau level {level:.3} (flat within 2 SE: {flat}); n=5120 max |mean − asymptote| = {worst_late:.3}"
        ),
    )
}

fn threshold_arithmetic() -> Outcome {
    let th = theorem1_thresholds(&ChainParams::new(3, 7, 0.01, 0).unwrap()).unwrap();
    if th.n_min != 3740 {
        return Err(format!("n_min = {}", th.n_min));
    }
    let mut rng = trial_rng(DEFAULT_SEED, 0x7e01, 0);
    for _ in 0..100 {
        let n_a = rng.random_range(1..=20usize);
        let n_b = n_a + rng.random_range(0..=20usize);
        let eps = rng.random_range(1e-6..0.999);
        let t = (n_b - n_a) as i32;
        let th = theorem1_thresholds(&ChainParams::new(n_a, n_b, eps, 0).unwrap()).unwrap();
        let bound = n_a as f64 - (2f64.powi(-t) + eps) / LN_2;
        if (th.entropy_lower_bound - bound).abs() > 1e-12 * bound.abs().max(1.0) {
            return Err(format!("N_A={n_a}, N_B={n_b}, ε={eps}: {} vs {bound}", th.entropy_lower_bound));
        }
    }
    Ok("n_min(N=10, ε=0.01) = 3740; entropy bound matches on 100 random draws".into())
}

fn tripartite_attractor() -> Outcome {
    let c = cfg(
        Experiment::Tripartite,
        Overrides { n: Some(vec![10]), na: Some(3), nb: Some(3), nc: Some(4), ..Default::default() },
    )?;
    let tp = run_tripartite(&c).map_err(|e| e.to_string())?;
    let target_x = page_average(4, 6).unwrap();
    if (tp.attractor_x - target_x).abs() > 1e-12 {
        return Err(format!("attractor x {} vs {target_x}", tp.attractor_x));
    }
    let mut settled = Vec::new();
    let mut ok = true;
    for start in Start::ALL {
        let s = tp.settle_step(start, 0.15);
        ok &= s.is_some();
        settled.push(format!("{}@{}", start.name(), s.map_or("never".into(), |v| v.to_string())));
    }
    let pearson = tp.transient_pearson(0.15).map_err(|e| e.to_string())?;
    check(
        ok,
        format!(
            "attractor ({target_x:.4}, {:.4}); settled {}; baseline Pearson(E_N, I) = {pearson:.4}",
            tp.attractor_y,
            settled.join(" ")
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("asymptotic purity identity", Duration::from_secs(1), asymptotic_purity_identity),
        ("purity decay bound", Duration::from_secs(10), purity_decay_bound),
        ("cross-engine purity", Duration::from_secs(120), cross_engine_purity),
        ("clifford cross-validation", Duration::from_secs(60), clifford_cross_validation),
        ("page oracle", Duration::from_secs(120), page_oracle),
        ("stabilizer pmf", Duration::from_secs(30), stabilizer_pmf_check),
        ("spectral gap", Duration::from_secs(60), spectral_gap),
        ("randomizing moments", Duration::from_secs(30), moments),
        ("cutoff trend", Duration::from_secs(600), cutoff_trend),
        ("area to volume", Duration::from_secs(300), area_volume),
        ("threshold arithmetic", Duration::from_secs(1), threshold_arithmetic),
        ("tripartite attractor", Duration::from_secs(600), tripartite_attractor),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = f();
        let elapsed = t0.elapsed();
        let in_budget = elapsed <= *budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_budget, d),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} ({:.2}s of {}s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_budget { "" } else { ", over budget" }
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
