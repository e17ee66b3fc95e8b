//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values come from the brute-force helpers at the top of
//! this file, which share no code with the library's operators.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use qhsp::apps::{
    learn_global_symmetry, learn_hidden_cut, learn_stabilizer_group, learn_translation,
    mixed_state_failure_demo,
};
use qhsp::charpovm::{q_distribution, Copies, CopyProvider, SamplerKind};
use qhsp::fgroup::{enumerate_supergroups, generated_subgroup, GroupElement, GroupSpec, Subgroup};
use qhsp::harness::{
    generate_instance, run_experiment, wilson_interval, ExperimentConfig, FailureDemoConfig,
    InstanceSpec, LemmaConfig, NamedState, OracleCase, OracleConfig, Route, SweepConfig,
    TailConfig,
};
use qhsp::hsp::{sample_count, SolveOptions};
use qhsp::qstate::{apply_weyl_lifted, PureState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- oracles

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Digits of a basis index, qudit 0 most significant.
fn digits(mut idx: usize, n: usize, d: u64) -> Vec<u64> {
    let mut out = vec![0; n];
    for i in (0..n).rev() {
        out[i] = idx as u64 % d;
        idx /= d as usize;
    }
    out
}

fn index(ds: &[u64], d: u64) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d as usize + x as usize)
}

/// `tau^{-a.b} Z^a X^b v` with `Z|j> = omega^j|j>`, `X|j> = |j+1>` and
/// `tau = exp(i pi (d^2+1)/d)`, for integer (unreduced) `a`, `b`.
fn weyl_oracle(d: u64, n: usize, a: &[u64], b: &[u64], v: &[Complex64]) -> Vec<Complex64> {
    let dim = v.len();
    let ab: u64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let tau_phase = cis(-PI * (d * d + 1) as f64 / d as f64 * ab as f64);
    let mut out = vec![c(0.0, 0.0); dim];
    for (idx, amp) in v.iter().enumerate() {
        let shifted: Vec<u64> = digits(idx, n, d)
            .iter()
            .zip(b)
            .map(|(j, s)| (j + s) % d)
            .collect();
        let za: u64 = a.iter().zip(&shifted).map(|(x, j)| x * j).sum();
        out[index(&shifted, d)] += tau_phase * cis(2.0 * PI * za as f64 / d as f64) * amp;
    }
    out
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

fn max_diff(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// All labels `x = (a|b)` in `Z_d^{2k}`.
fn all_labels(d: u64, k: usize) -> Vec<Vec<u64>> {
    (0..(d as usize).pow(2 * k as u32))
        .map(|i| digits(i, 2 * k, d))
        .collect()
}

/// Phaseless stabilizer group of `psi` by scanning every Weyl label.
fn oracle_weyl_group(psi: &PureState) -> BTreeSet<Vec<u64>> {
    let (n, d) = (psi.n(), psi.d());
    all_labels(d, n)
        .into_iter()
        .filter(|x| {
            let w = weyl_oracle(d, n, &x[..n], &x[n..], psi.amps());
            inner(psi.amps(), &w).norm() > 1.0 - 1e-9
        })
        .collect()
}

/// Labels `x` in `Z_d^{2p}` whose tiled operator fixes `psi` up to phase.
fn oracle_blocked_group(psi: &PureState, p: usize) -> BTreeSet<Vec<u64>> {
    let (n, d) = (psi.n(), psi.d());
    all_labels(d, p)
        .into_iter()
        .filter(|x| {
            let a: Vec<u64> = (0..n).map(|i| x[i % p]).collect();
            let b: Vec<u64> = (0..n).map(|i| x[p + i % p]).collect();
            inner(psi.amps(), &weyl_oracle(d, n, &a, &b, psi.amps())).norm() > 1.0 - 1e-9
        })
        .collect()
}

/// `tr(rho_S^2)` from the reshaped amplitude matrix.
fn oracle_purity(psi: &PureState, subset: &[usize]) -> f64 {
    let n = psi.n();
    let inside: Vec<usize> = subset.to_vec();
    let outside: Vec<usize> = (0..n).filter(|i| !subset.contains(i)).collect();
    let (rows, cols) = (1usize << inside.len(), 1usize << outside.len());
    let mut m = vec![c(0.0, 0.0); rows * cols];
    for (idx, amp) in psi.amps().iter().enumerate() {
        let bits = digits(idx, n, 2);
        let r = inside.iter().fold(0, |acc, &q| acc * 2 + bits[q] as usize);
        let s = outside.iter().fold(0, |acc, &q| acc * 2 + bits[q] as usize);
        m[r * cols + s] = *amp;
    }
    let mut purity = 0.0;
    for r1 in 0..rows {
        for r2 in 0..rows {
            let rho: Complex64 = (0..cols)
                .map(|s| m[r1 * cols + s] * m[r2 * cols + s].conj())
                .sum();
            purity += rho.norm_sqr();
        }
    }
    purity
}

/// `k` with `T^k psi = psi`, `T` the cyclic qubit shift.
fn oracle_translation_group(psi: &PureState) -> BTreeSet<u64> {
    let n = psi.n();
    (0..n as u64)
        .filter(|&k| {
            psi.amps().iter().enumerate().all(|(idx, amp)| {
                let bits = digits(idx, n, 2);
                let rotated: Vec<u64> = (0..n).map(|i| bits[(i + k as usize) % n]).collect();
                (psi.amps()[index(&rotated, 2)] - amp).norm() < 1e-9
            })
        })
        .collect()
}

fn subsets_of(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1usize << n).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

fn element_set(h: &Subgroup) -> BTreeSet<Vec<u64>> {
    h.elements().into_iter().map(|g| g.0).collect()
}

// ------------------------------------------------------------- reporting

struct Gate {
    results: Vec<(String, bool)>,
    /// Exact-symmetry containment failures across criteria 6-10.
    containment_runs: u64,
    containment_violations: u64,
}

impl Gate {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        println!("{id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((id.to_string(), pass));
    }

    fn containment(&mut self, exact: &BTreeSet<Vec<u64>>, output: &BTreeSet<Vec<u64>>) {
        self.containment_runs += 1;
        if !exact.is_subset(output) {
            self.containment_violations += 1;
        }
    }
}

fn wilson_low(successes: u64, trials: u64) -> f64 {
    wilson_interval(successes, trials).0
}

// ------------------------------------------------------------- criteria

fn c1(gate: &mut Gate) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pairs = 0u64;
    for (d, n) in [(2u64, 1usize), (2, 2), (3, 1), (3, 2), (5, 1)] {
        let dim = (d as usize).pow(n as u32);
        let labels = all_labels(d, n);
        let tau = |k: i64| cis(PI * (d * d + 1) as f64 / d as f64 * k as f64);
        let omega = |k: i64| cis(2.0 * PI * k as f64 / d as f64);
        for x in &labels {
            for y in &labels {
                pairs += 1;
                let form: i64 = (0..n)
                    .map(|i| (x[i] * y[n + i]) as i64 - (y[i] * x[n + i]) as i64)
                    .sum();
                let sum: Vec<u64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
                for j in 0..dim {
                    let mut e = vec![c(0.0, 0.0); dim];
                    e[j] = c(1.0, 0.0);
                    let basis = PureState::new(n, d, e.clone()).unwrap();
                    let wy = apply_weyl_lifted(&basis, y).unwrap();
                    let wxy = apply_weyl_lifted(&wy, x).unwrap();
                    let wx = apply_weyl_lifted(&basis, x).unwrap();
                    let wyx = apply_weyl_lifted(&wx, y).unwrap();
                    let wsum = apply_weyl_lifted(&basis, &sum).unwrap();
                    // library operator against the oracle
                    worst = worst.max(max_diff(
                        wx.amps(),
                        &weyl_oracle(d, n, &x[..n], &x[n..], &e),
                    ));
                    let composed: Vec<Complex64> =
                        wsum.amps().iter().map(|v| tau(form) * v).collect();
                    worst = worst.max(max_diff(wxy.amps(), &composed));
                    let commuted: Vec<Complex64> =
                        wyx.amps().iter().map(|v| omega(form) * v).collect();
                    worst = worst.max(max_diff(wxy.amps(), &commuted));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    gate.record(
        "C1",
        worst <= 1e-12 && secs < 10.0,
        format!("Weyl composition/commutation over {pairs} label pairs, max error {worst:.1e} (<= 1e-12), {secs:.2}s (< 10s)"),
    );
}

fn c2(gate: &mut Gate) {
    let start = Instant::now();
    let mut worst_support = 0.0f64;
    let mut worst_mass = 0.0f64;
    let mut worst_q = 0.0f64;
    let mut supergroups = 0usize;
    for (d, n) in [(2u64, 3usize), (3, 2)] {
        for s in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * d + s);
            let inst =
                generate_instance(&InstanceSpec::Stabilizer { n, d }, None, &mut rng).unwrap();
            let rep = &inst.rep;
            let spec = rep.spec();
            let e = rep.expectations(&Copies::Identical(&inst.state)).unwrap();
            // q by the defining sum, pairing omega^{a.b' - a'.b}
            let labels: Vec<Vec<u64>> = all_labels(d, n);
            let q_oracle: Vec<f64> = labels
                .iter()
                .map(|lam| {
                    let s: Complex64 = labels
                        .iter()
                        .map(|g| {
                            let form: i64 = (0..n)
                                .map(|i| (g[i] * lam[n + i]) as i64 - (lam[i] * g[n + i]) as i64)
                                .sum();
                            cis(-2.0 * PI * form as f64 / d as f64)
                                * e[spec.index_of(&GroupElement(g.clone()))]
                        })
                        .sum();
                    s.re / labels.len() as f64
                })
                .collect();
            let q = q_distribution(rep, &Copies::Identical(&inst.state)).unwrap();
            for (lam, qo) in labels.iter().zip(&q_oracle) {
                worst_q = worst_q.max((q.prob(&GroupElement(lam.clone())) - qo).abs());
            }
            let h = &inst.ground_truth;
            let h_perp = h.annihilator();
            let mass = |k: &Subgroup| -> f64 {
                let members = element_set(k);
                labels
                    .iter()
                    .zip(&q_oracle)
                    .filter(|(l, _)| members.contains(*l))
                    .map(|(_, p)| p)
                    .sum()
            };
            worst_support = worst_support.max((mass(&h_perp) - 1.0).abs());
            for k in enumerate_supergroups(h, 1 << 12).unwrap() {
                supergroups += 1;
                let mean: Complex64 = k
                    .elements()
                    .iter()
                    .map(|g| e[spec.index_of(g)])
                    .sum::<Complex64>()
                    / k.order() as f64;
                worst_mass = worst_mass.max((mass(&k.annihilator()) - mean).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    gate.record(
        "C2",
        worst_support <= 1e-9 && worst_mass <= 1e-9 && worst_q <= 1e-9 && secs < 120.0,
        format!(
            "100 stabilizer states: |q(H^perp)-1| max {worst_support:.1e}, subgroup-mass identity max {worst_mass:.1e} over {supergroups} supergroups, library q vs oracle {worst_q:.1e} (all <= 1e-9), {secs:.1}s"
        ),
    );
}

fn c3(gate: &mut Gate) {
    let instances = vec![
        InstanceSpec::Stabilizer { n: 3, d: 2 },
        InstanceSpec::RotatedStabilizer { n: 2, epsilon: 0.1 },
        InstanceSpec::RotatedStabilizer {
            n: 3,
            epsilon: 0.05,
        },
        InstanceSpec::RotatedStabilizer {
            n: 3,
            epsilon: 0.25,
        },
        InstanceSpec::Cut { blocks: vec![2, 1] },
        InstanceSpec::Cut {
            blocks: vec![2, 2, 1],
        },
        InstanceSpec::Cut { blocks: vec![3, 2] },
        InstanceSpec::Cut { blocks: vec![5] },
        InstanceSpec::EntangledPair {
            n: 5,
            purity_gap: 0.1,
        },
        InstanceSpec::Translation { n: 12, period: 3 },
        InstanceSpec::Translation { n: 12, period: 4 },
        InstanceSpec::Translation { n: 8, period: 2 },
        InstanceSpec::Translation { n: 6, period: 6 },
        InstanceSpec::MomentumMix { n: 12, eta: 0.1 },
    ];
    let cfg = LemmaConfig {
        master_seed: 33,
        instances,
        repeats: 5,
        instance_seeds: None,
        solve_trials: 0,
        delta: 0.05,
        tolerance: 1e-9,
        subgroup_bound: 1 << 12,
        tail: None,
        fault_injection: None,
        output_dir: None,
        record_timing: false,
    };
    let report = run_experiment(&ExperimentConfig::LemmaCheck(cfg)).unwrap();
    let recs = report.records["instances"].as_array().unwrap();
    let margins: Vec<f64> = recs
        .iter()
        .filter_map(|r| r["gap_margin"].as_f64())
        .collect();
    let worst = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let violations = margins.iter().filter(|&&m| m > 1e-9).count();
    gate.record(
        "C3",
        violations == 0 && report.passed && margins.len() == recs.len(),
        format!(
            "{} instances (weyl n<=3, cut n<=5, translation n<=12): worst max_K q(K^perp) - (1 - eps_eff/2) = {worst:.3e}, {violations} violations",
            recs.len()
        ),
    );
}

fn oracle_cases(route: Route, states: &[NamedState]) -> Vec<OracleCase> {
    states
        .iter()
        .map(|s| OracleCase {
            route,
            state: s.clone(),
        })
        .collect()
}

fn c4(gate: &mut Gate) {
    let states = [
        NamedState::Zero { n: 1, d: 2 },
        NamedState::Plus { n: 1, d: 2 },
        NamedState::Haar {
            n: 1,
            d: 2,
            seed: 1,
        },
        NamedState::Zero { n: 2, d: 2 },
        NamedState::Plus { n: 2, d: 2 },
        NamedState::Bell,
        NamedState::Haar {
            n: 2,
            d: 2,
            seed: 2,
        },
    ];
    let cfg = OracleConfig {
        master_seed: 5,
        cases: oracle_cases(Route::BellDifference, &states),
        draws: 100_000,
        tv_threshold: 0.02,
        p_threshold: 0.001,
        exact_tolerance: 1e-9,
        output_dir: None,
        record_timing: false,
    };
    let report = run_experiment(&ExperimentConfig::OracleEquivalence(cfg)).unwrap();
    let recs = report.records.as_array().unwrap();
    let tv = recs
        .iter()
        .filter_map(|r| r["total_variation"].as_f64())
        .fold(0.0, f64::max);
    let p = recs
        .iter()
        .filter_map(|r| r["p_value"].as_f64())
        .fold(1.0, f64::min);
    gate.record(
        "C4",
        report.passed,
        format!("Bell difference on {} states at 1e5 draws: max TV {tv:.4} (<= 0.02), min chi-square p {p:.4} (> 0.001)", recs.len()),
    );
}

fn c5(gate: &mut Gate) {
    let mut states = Vec::new();
    for n in [2, 3, 4] {
        states.push(NamedState::Haar {
            n,
            d: 2,
            seed: 40 + n as u64,
        });
        states.push(NamedState::Ghz { n, d: 2 });
        states.push(NamedState::W { n });
        states.push(NamedState::Plus { n, d: 2 });
    }
    let cfg = OracleConfig {
        master_seed: 5,
        cases: oracle_cases(Route::FourierSampling, &states),
        draws: 1,
        tv_threshold: 0.02,
        p_threshold: 0.001,
        exact_tolerance: 1e-9,
        output_dir: None,
        record_timing: false,
    };
    let report = run_experiment(&ExperimentConfig::OracleEquivalence(cfg)).unwrap();
    let recs = report.records.as_array().unwrap();
    let worst = recs
        .iter()
        .filter_map(|r| r["max_abs_difference"].as_f64())
        .fold(0.0, f64::max);
    gate.record(
        "C5",
        report.passed,
        format!("controlled-translation register simulation vs q on {} states (n = 2, 3, 4): max |diff| {worst:.1e} (<= 1e-9)", recs.len()),
    );
}

fn c6(gate: &mut Gate) {
    let start = Instant::now();
    let delta = 0.05;
    let m = sample_count(&GroupSpec::symplectic(2, 3).unwrap(), 1.0, delta);
    let opts = SolveOptions {
        sampler: SamplerKind::Measurement,
        ..Default::default()
    };
    let mut successes = 0u64;
    let mut trials = 0u64;
    let mut phase_ok = true;
    let mut states: Vec<PureState> = vec![PureState::cluster_ring(6).unwrap()];
    for s in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + s);
        states.push(
            generate_instance(&InstanceSpec::Stabilizer { n: 3, d: 2 }, None, &mut rng)
                .unwrap()
                .state,
        );
    }
    for (i, psi) in states.iter().enumerate() {
        let oracle = oracle_weyl_group(psi);
        let r = learn_stabilizer_group(
            CopyProvider::identical(psi.clone()),
            1.0,
            delta,
            &opts,
            60 + i as u64,
        )
        .unwrap();
        let found = element_set(&r.phaseless);
        gate.containment(&oracle, &found);
        trials += 1;
        if found == oracle {
            successes += 1;
        }
        for g in &r.phased_generators {
            phase_ok &= g.apply(psi).unwrap().distance(psi) < 1e-9;
        }
    }
    let low = wilson_low(successes, trials);
    let secs = start.elapsed().as_secs_f64();
    gate.record(
        "C6",
        low >= 0.95 && phase_ok && secs < 300.0,
        format!(
            "cluster_ring(6) + 200 random (2,3) stabilizer states via Bell difference sampling, m = {m}: {successes}/{trials} exact, Wilson low {low:.3} (>= 0.95), signed generators fix the state: {phase_ok}, {secs:.1}s"
        ),
    );
}

fn c7(gate: &mut Gate) {
    let delta = 0.05;
    let mut successes = 0u64;
    for s in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + s);
        let psi = generate_instance(&InstanceSpec::Stabilizer { n: 2, d: 3 }, None, &mut rng)
            .unwrap()
            .state;
        let oracle = oracle_weyl_group(&psi);
        let r = learn_stabilizer_group(
            CopyProvider::identical(psi.clone()),
            1.0,
            delta,
            &SolveOptions::default(),
            s,
        )
        .unwrap();
        let found = element_set(&r.phaseless);
        gate.containment(&oracle, &found);
        let signed = r
            .phased_generators
            .iter()
            .all(|g| g.apply(&psi).unwrap().distance(&psi) < 1e-9);
        if found == oracle && signed {
            successes += 1;
        }
    }
    let low = wilson_low(successes, 100);
    gate.record("C7", low >= 0.95, format!("100 random (3,2) qutrit stabilizer states: {successes}/100 exact, Wilson low {low:.3} (>= 0.95)"));
}

fn c8(gate: &mut Gate) {
    let delta = 0.05;
    let opts = SolveOptions {
        sampler: SamplerKind::Measurement,
        ..Default::default()
    };
    let profiles: [&[usize]; 4] = [&[3, 3], &[2, 2, 2], &[4, 2], &[6]];
    let mut successes = 0u64;
    let mut purity_ok = true;
    let mut trials = 0u64;
    for (pi, blocks) in profiles.iter().enumerate() {
        for s in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(8000 + 100 * pi as u64 + s);
            let inst = generate_instance(
                &InstanceSpec::Cut {
                    blocks: blocks.to_vec(),
                },
                None,
                &mut rng,
            )
            .unwrap();
            let psi = &inst.state;
            let truth = inst.partition.clone().unwrap();
            let r = learn_hidden_cut(
                CopyProvider::identical(psi.clone()),
                inst.learner_epsilon(),
                delta,
                &opts,
                s,
            )
            .unwrap();
            trials += 1;
            // exact symmetries of the swap family: subsets of purity 1
            let mut oracle = BTreeSet::new();
            for subset in subsets_of(6) {
                let mask: Vec<u64> = (0..6).map(|i| subset.contains(&i) as u64).collect();
                let pure = oracle_purity(psi, &subset) > 1.0 - 1e-9;
                let union = truth.iter().all(|b| {
                    b.iter().all(|q| subset.contains(q)) || b.iter().all(|q| !subset.contains(q))
                });
                // both directions: unions of blocks have purity 1, others stay below 1 - gap
                purity_ok &= pure == union;
                if !union {
                    purity_ok &= oracle_purity(psi, &subset) <= 1.0 - inst.gap.epsilon + 1e-9;
                }
                if pure {
                    oracle.insert(mask);
                }
            }
            gate.containment(&oracle, &element_set(&r.subgroup));
            if r.partition == truth && element_set(&r.subgroup) == oracle {
                successes += 1;
            }
        }
    }
    let low = wilson_low(successes, trials);
    gate.record(
        "C8",
        low >= 0.95 && purity_ok,
        format!(
            "200 hidden-cut instances over profiles (3,3),(2,2,2),(4,2),(6) via swap-Bell sampling: {successes}/{trials} exact, Wilson low {low:.3} (>= 0.95), purity characterization on all subsets: {purity_ok}"
        ),
    );
}

fn c9(gate: &mut Gate) {
    let delta = 0.05;
    let opts = SolveOptions {
        sampler: SamplerKind::Measurement,
        ..Default::default()
    };
    let mut successes = 0u64;
    let mut trials = 0u64;
    for n in [4usize, 6, 8, 12] {
        for r in (1..=n as u64).filter(|r| (n as u64).is_multiple_of(*r)) {
            for s in 0..25u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(9000 + 1000 * n as u64 + 50 * r + s);
                let inst =
                    generate_instance(&InstanceSpec::Translation { n, period: r }, None, &mut rng)
                        .unwrap();
                let oracle: BTreeSet<Vec<u64>> = oracle_translation_group(&inst.state)
                    .into_iter()
                    .map(|k| vec![k])
                    .collect();
                let res = learn_translation(
                    CopyProvider::identical(inst.state.clone()),
                    inst.gap.epsilon,
                    delta,
                    &opts,
                    s,
                )
                .unwrap();
                let found = element_set(&res.subgroup);
                gate.containment(&oracle, &found);
                trials += 1;
                if res.r == r && found == oracle {
                    successes += 1;
                }
            }
        }
    }
    let low = wilson_low(successes, trials);
    gate.record(
        "C9",
        low >= 0.95,
        format!("translation periods: every divisor r of n in {{4,6,8,12}}, 25 states each: {successes}/{trials} exact, Wilson low {low:.3} (>= 0.95)"),
    );
}

fn c10(gate: &mut Gate) {
    let psi = PureState::cluster_ring(8).unwrap();
    let oracle = oracle_blocked_group(&psi, 2);
    let spec = GroupSpec::symplectic(2, 2).unwrap();
    // P_e = X on even sites, P_o = X on odd sites: b = (1,0), (0,1)
    let expected = element_set(
        &generated_subgroup(
            &spec,
            &[
                GroupElement(vec![0, 0, 1, 0]),
                GroupElement(vec![0, 0, 0, 1]),
            ],
        )
        .unwrap(),
    );
    let mut all = true;
    for seed in 0..25u64 {
        let r = learn_global_symmetry(
            CopyProvider::identical(psi.clone()),
            2,
            1.0,
            0.05,
            &SolveOptions::default(),
            seed,
        )
        .unwrap();
        let found = element_set(&r.phaseless);
        gate.containment(&oracle, &found);
        all &= found == expected && r.generator_strings() == ["+XIXIXIXI", "+IXIXIXIX"];
    }
    gate.record(
        "C10",
        all && oracle == expected,
        format!("cluster_ring(8), p = 2, 25 seeds: group <P_e, P_o> with + signs on every seed: {all}; oracle scan agrees: {}", oracle == expected),
    );
}

fn c11(gate: &mut Gate) {
    let tail = TailConfig {
        instance: InstanceSpec::RotatedStabilizer { n: 2, epsilon: 0.2 },
        m: 5,
        trials: 20_000,
        sigmas: 3.0,
    };
    let cfg = LemmaConfig {
        master_seed: 20261015,
        instances: Vec::new(),
        repeats: 1,
        instance_seeds: None,
        solve_trials: 0,
        delta: 0.05,
        tolerance: 1e-9,
        subgroup_bound: 1 << 12,
        tail: Some(tail),
        fault_injection: None,
        output_dir: None,
        record_timing: false,
    };
    let report = run_experiment(&ExperimentConfig::LemmaCheck(cfg)).unwrap();
    let elements = report.records["tail"]["elements"].as_array().unwrap();
    let worst = elements
        .iter()
        .filter_map(|e| e["excess"].as_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = gate.containment_violations == 0 && report.passed;
    gate.record(
        "C11",
        pass,
        format!(
            "exact-symmetry containment: {} violations in {} runs of C6-C10; tail over {} near-symmetries (m = 5, 20000 trials): worst rate - bound - 3 sigma = {worst:.4} (<= 0)",
            gate.containment_violations,
            gate.containment_runs,
            elements.len()
        ),
    );
}

fn sweep_config() -> SweepConfig {
    let mut points = Vec::new();
    for n in [2, 3, 4] {
        for epsilon in [0.005, 0.01, 0.02, 0.05] {
            points.push(InstanceSpec::RotatedStabilizer { n, epsilon });
        }
    }
    for n in [4, 6, 8, 12] {
        for eta in [0.02, 0.05, 0.1, 0.2] {
            points.push(InstanceSpec::MomentumMix { n, eta });
        }
    }
    for purity_gap in [0.1, 0.3, 0.5] {
        points.push(InstanceSpec::EntangledPair { n: 6, purity_gap });
    }
    for n in [2, 3, 4] {
        points.push(InstanceSpec::Stabilizer { n, d: 2 });
    }
    SweepConfig {
        master_seed: 20261015,
        trials: 1000,
        delta: 0.05,
        points,
        cap_factor: 4.0,
        slope_tolerance: 0.25,
        output_dir: None,
        record_timing: false,
    }
}

fn c12(gate: &mut Gate) {
    let report = run_experiment(&ExperimentConfig::Sweep(sweep_config())).unwrap();
    let rows = report.records["rows"].as_array().unwrap();
    let within = rows
        .iter()
        .filter(|r| {
            r["m_empirical_95"]
                .as_u64()
                .is_some_and(|m| m <= r["m_theory"].as_u64().unwrap())
        })
        .count();
    let fits: Vec<String> = report.records["fits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            format!(
                "{}/{} {:.2}",
                f["instance"].as_str().unwrap(),
                f["n"],
                f["slope"].as_f64().unwrap()
            )
        })
        .collect();
    gate.record(
        "C12",
        report.passed && within == rows.len(),
        format!(
            "m_empirical_95 <= m_theory at {within}/{} grid points; log-log slopes (target -1 weyl/translation, -2 cut, 25%): {}",
            rows.len(),
            fits.join(", ")
        ),
    );
}

fn c13(gate: &mut Gate) {
    let demo = mixed_state_failure_demo().unwrap();
    // oracle: SWAP on (|01><01| + |10><10|)/2 has trace 0, so
    // q(0) = (1 + 0)/2
    let expected = 0.5;
    let weak = demo.conjugation_invariant.mass_on_h_perp;
    let pure = demo.pure.mass_on_h_perp;
    gate.record(
        "C13",
        weak < 0.9 && (weak - expected).abs() < 1e-12 && (pure - 1.0).abs() < 1e-9 && demo.demonstrates_failure(),
        format!("invariant incoherent rho: q(H^perp) = {weak} (< 0.9, oracle 1/2); pure counterpart: {pure} (= 1 within 1e-9)"),
    );
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c14(gate: &mut Gate) {
    let dir = tempfile::tempdir().unwrap();
    let mut sweep = sweep_config();
    sweep.trials = 200;
    let configs = vec![
        ("sweep", ExperimentConfig::Sweep(sweep)),
        (
            "lemma",
            ExperimentConfig::LemmaCheck(LemmaConfig {
                master_seed: 14,
                instances: vec![
                    InstanceSpec::Stabilizer { n: 2, d: 2 },
                    InstanceSpec::Cut { blocks: vec![2, 2] },
                ],
                repeats: 3,
                instance_seeds: None,
                solve_trials: 5,
                delta: 0.05,
                tolerance: 1e-9,
                subgroup_bound: 1 << 12,
                tail: Some(TailConfig {
                    instance: InstanceSpec::RotatedStabilizer { n: 2, epsilon: 0.2 },
                    m: 5,
                    trials: 2000,
                    sigmas: 3.0,
                }),
                fault_injection: Some(qhsp::harness::FaultInjection { scale: 0.9 }),
                output_dir: None,
                record_timing: false,
            }),
        ),
        (
            "oracle",
            ExperimentConfig::OracleEquivalence(OracleConfig {
                master_seed: 14,
                cases: oracle_cases(
                    Route::SwapBell,
                    &[
                        NamedState::Bell,
                        NamedState::Haar {
                            n: 3,
                            d: 2,
                            seed: 3,
                        },
                    ],
                ),
                draws: 20_000,
                tv_threshold: 0.02,
                p_threshold: 0.001,
                exact_tolerance: 1e-9,
                output_dir: None,
                record_timing: false,
            }),
        ),
        (
            "demo",
            ExperimentConfig::FailureDemo(FailureDemoConfig {
                output_dir: None,
                record_timing: false,
            }),
        ),
    ];
    let mut identical = true;
    let mut files = 0usize;
    for (name, cfg) in configs {
        let out = dir.path().join(name);
        let cfg = match cfg {
            ExperimentConfig::Sweep(mut c) => {
                c.output_dir = Some(out.clone());
                ExperimentConfig::Sweep(c)
            }
            ExperimentConfig::LemmaCheck(mut c) => {
                c.output_dir = Some(out.clone());
                ExperimentConfig::LemmaCheck(c)
            }
            ExperimentConfig::OracleEquivalence(mut c) => {
                c.output_dir = Some(out.clone());
                ExperimentConfig::OracleEquivalence(c)
            }
            ExperimentConfig::FailureDemo(mut c) => {
                c.output_dir = Some(out.clone());
                ExperimentConfig::FailureDemo(c)
            }
        };
        run_experiment(&cfg).unwrap();
        let first = snapshot(&out);
        std::fs::remove_dir_all(&out).unwrap();
        run_experiment(&cfg).unwrap();
        let second = snapshot(&out);
        files += first.len();
        identical &= first == second;
    }
    let psi = PureState::cluster_ring(6).unwrap();
    let learn = || {
        let r = learn_stabilizer_group(
            CopyProvider::identical(psi.clone()),
            1.0,
            0.05,
            &SolveOptions::default(),
            3,
        )
        .unwrap();
        serde_json::to_vec(&r).unwrap()
    };
    identical &= learn() == learn();
    gate.record("C14", identical, format!("{files} report files from sweep, lemma (with replay artifacts), oracle and demo runs byte-identical on rerun; learner JSON identical: {identical}"));
}

fn main() {
    let started = Instant::now();
    let mut gate = Gate {
        results: Vec::new(),
        containment_runs: 0,
        containment_violations: 0,
    };
    c1(&mut gate);
    c2(&mut gate);
    c3(&mut gate);
    c4(&mut gate);
    c5(&mut gate);
    c6(&mut gate);
    c7(&mut gate);
    c8(&mut gate);
    c9(&mut gate);
    c10(&mut gate);
    c11(&mut gate);
    c12(&mut gate);
    c13(&mut gate);
    c14(&mut gate);
    let failed: Vec<&str> = gate
        .results
        .iter()
        .filter(|(_, p)| !p)
        .map(|(id, _)| id.as_str())
        .collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        gate.results.len() - failed.len(),
        gate.results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
