//! The three engines checked against one another.

use entwalk_core::chain::{
    evolve, expected_purity, initial_size_distribution, monte_carlo_set_chain, ChainStart, SetChainStart,
};
use entwalk_core::convergence::{tv_distance, EntanglementHistogram};
use entwalk_core::density::{entropy_vn, purity, reduced_density};
use entwalk_core::ensemble::{mean_stderr, run_trials};
use entwalk_core::gates::{GateEvent, GateMode};
use entwalk_core::oracles::{asymptotic_purity, stabilizer_pmf};
use entwalk_core::stabilizer::{walk_step_stab, Tableau};
use entwalk_core::statevector::{walk_step, StateVector};
use entwalk_core::topology::Topology;
use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn haar_purity_samples(start: &StateVector, n_a: usize, steps: usize, trials: usize, seed: u64) -> Vec<f64> {
    let a: Vec<usize> = (0..n_a).collect();
    run_trials(trials, seed, 1, |_, rng| {
        let mut s = start.clone();
        for _ in 0..steps {
            walk_step(&mut s, Topology::AllToAll, GateMode::Haar, rng)?;
        }
        Ok::<_, entwalk_core::Error>(purity(&reduced_density(&s, &a)?))
    })
    .unwrap()
}

fn chain_purity(n: usize, n_a: usize, steps: usize) -> f64 {
    let d0 = initial_size_distribution(n, ChainStart::BasisState).unwrap();
    expected_purity(&evolve(&d0, steps).unwrap(), n_a).unwrap()
}

#[test]
fn one_haar_step_on_two_qubits() {
    let start = StateVector::new_basis(2).unwrap();
    let (m, se) = mean_stderr(&haar_purity_samples(&start, 1, 1, 10_000, 11));
    let exact = chain_purity(2, 1, 1);
    assert!((m - exact).abs() <= 3.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn haar_purity_at_fifty_steps_on_six_qubits() {
    let start = StateVector::new_basis(6).unwrap();
    let (m, se) = mean_stderr(&haar_purity_samples(&start, 3, 50, 10_000, 12));
    let exact = chain_purity(6, 3, 50);
    assert!((m - exact).abs() <= 3.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn clifford_events_agree_across_engines() {
    let n = 5;
    let logs = run_trials(20, 99, 2, |_, rng| {
        let mut tab = Tableau::new(n)?;
        let mut sv = StateVector::new_basis(n)?;
        for _ in 0..60 {
            let ev = GateEvent::sample(n, Topology::AllToAll, GateMode::Clifford, rng)?;
            tab.apply_gate_event(&ev)?;
            sv.apply_gate_event(&ev)?;
            for mask in 1..(1u32 << n) - 1 {
                let a: Vec<usize> = (0..n).filter(|&q| mask >> q & 1 == 1).collect();
                let e = tab.cut_entanglement(&a)? as f64;
                let s = entropy_vn(&reduced_density(&sv, &a)?)?;
                assert!((e - s).abs() < 1e-9);
            }
        }
        Ok::<_, entwalk_core::Error>(())
    });
    logs.unwrap();
}

#[test]
fn lumped_chain_matches_explicit_support_process() {
    for n in [3usize, 4, 6] {
        let a: Vec<bool> = (0..n).map(|q| q < n / 2).collect();
        let grid = [0usize, 1, 3, 10, 40];
        let trials = 40_000;
        let est = monte_carlo_set_chain(&SetChainStart::BasisState, &grid, trials, &a, 7 + n as u64).unwrap();
        let d0 = initial_size_distribution(n, ChainStart::BasisState).unwrap();
        for e in &est {
            let exact = evolve(&d0, e.step).unwrap();
            // One goodness-of-fit test per step rather than a 3σ test per
            // size class, which would trip by chance across ~100 cells.
            let mut chi2 = 0.0;
            let mut cells = 0;
            for (k, &p) in exact.probs().iter().enumerate() {
                let expected = p * trials as f64;
                if expected >= 5.0 {
                    chi2 += (e.size_counts[k] as f64 - expected).powi(2) / expected;
                    cells += 1;
                }
            }
            let critical = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.999);
            assert!(chi2 < critical, "N={n} step={}: chi2 {chi2} ≥ {critical}", e.step);
            let exact_purity = expected_purity(&exact, n / 2).unwrap();
            assert!((e.purity - exact_purity).abs() <= 3.0 * e.stderr.max(1e-12));
        }
    }
}

#[test]
fn set_chain_follows_a_non_exchangeable_start() {
    // Bell pairs (0,3) and (1,4), qubit 2 in |0⟩: every pair straddles the cut.
    let n = 5;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (b0, b1) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
        let idx = b0 | (b1 << 1) | (b0 << 3) | (b1 << 4);
        amps[idx] = Complex64::new(r * r, 0.0);
    }
    let start = StateVector::from_amplitudes(amps).unwrap();
    let steps = [0usize, 4, 12];
    let a_mask = [true, true, false, false, false];
    let set = monte_carlo_set_chain(&SetChainStart::from_state(&start).unwrap(), &steps, 40_000, &a_mask, 5).unwrap();
    for (i, &n_steps) in steps.iter().enumerate() {
        let (m, se) = mean_stderr(&haar_purity_samples(&start, 2, n_steps, 6000, 40 + i as u64));
        let combined = (se * se + set[i].stderr * set[i].stderr).sqrt();
        assert!((m - set[i].purity).abs() <= 3.0 * combined.max(1e-12), "step {n_steps}: {m} vs {}", set[i].purity);
    }
    // The exchangeable formula would say 1 at step 0; the true purity is 1/4.
    assert!((set[0].purity - 0.25).abs() <= 3.0 * set[0].stderr);
}

#[test]
fn long_run_stabilizer_histogram_and_purity() {
    let (n, n_a) = (8, 4);
    let samples = run_trials(10_000, 2024, 3, |_, rng| {
        let mut tab = Tableau::new(n)?;
        for _ in 0..10 * n * n {
            walk_step_stab(&mut tab, Topology::AllToAll, rng)?;
        }
        Ok::<_, entwalk_core::Error>(tab.block_entanglement(n_a)? as f64)
    })
    .unwrap();
    let hist = EntanglementHistogram::from_samples(&samples).unwrap();
    let tv = tv_distance(&hist.probabilities(n_a + 1).unwrap(), &stabilizer_pmf(n, n_a).unwrap()).unwrap();
    assert!(tv < 0.02, "tv = {tv}");
    let purities: Vec<f64> = samples.iter().map(|e| 2f64.powf(-e)).collect();
    let (m, se) = mean_stderr(&purities);
    let target = asymptotic_purity(n_a, n - n_a).unwrap();
    assert!((m - target).abs() <= 3.0 * se, "{m} ± {se} vs {target}");
}
