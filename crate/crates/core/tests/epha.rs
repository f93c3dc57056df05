use parsched::experiment::{generate_case, Case, GeneratorParams};
use parsched::pha::{run_epha, PhaConfig, PhaOutcome};
use parsched::scenario::{synthesize_pools, urology_moments, ScenarioSet};
use parsched::simulate::evaluate_expected;
use parsched::solver::{solve_by_orders, HighsBackend, SolveOptions, SolveStatus};

fn case(num_scenarios: usize, seed: u64) -> Case {
    let classes = synthesize_pools(&urology_moments(), 1000, 2020).unwrap();
    let params = GeneratorParams { num_patients: 4, num_irs: 2, num_ors: 2, num_scenarios, ..GeneratorParams::default() };
    generate_case(&params, &classes, seed).unwrap()
}

fn tight() -> SolveOptions {
    SolveOptions { gap: 1e-9, ..SolveOptions::default() }
}

#[test]
fn one_scenario_stops_after_first_iteration_at_the_optimum() {
    let c = case(1, 4);
    let out = run_epha(&c.instance, &c.scenarios, &PhaConfig::compact(), &HighsBackend, &tight(), None).unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations, 1);
    let exact = solve_by_orders(&c.instance, &c.scenarios, &HighsBackend, &tight(), true).unwrap();
    assert_eq!(exact.status, SolveStatus::Optimal);
    assert!((out.metrics.cost - exact.objective).abs() <= 1e-6 * exact.objective.max(1.0));
}

#[test]
fn never_beats_the_exact_optimum() {
    for seed in [2, 7] {
        let c = case(3, seed);
        let out = run_epha(&c.instance, &c.scenarios, &PhaConfig::compact(), &HighsBackend, &tight(), None).unwrap();
        let exact = solve_by_orders(&c.instance, &c.scenarios, &HighsBackend, &tight(), true).unwrap();
        let check = evaluate_expected(&c.instance, &out.schedule, &c.scenarios).unwrap().cost;
        assert!((check - out.metrics.cost).abs() < 1e-6);
        assert!(out.metrics.cost >= exact.objective - 1e-6, "seed {seed}: {} < {}", out.metrics.cost, exact.objective);
    }
}

#[test]
fn duplicating_every_scenario_changes_nothing() {
    let c = case(2, 5);
    let doubled = ScenarioSet::uniform(
        c.scenarios.scenarios.iter().flat_map(|s| [s.clone(), s.clone()]).collect(),
        c.scenarios.seed,
    );
    let cfg = PhaConfig::compact();
    let a = run_epha(&c.instance, &c.scenarios, &cfg, &HighsBackend, &tight(), None).unwrap();
    let b = run_epha(&c.instance, &doubled, &cfg, &HighsBackend, &tight(), None).unwrap();
    assert_eq!(a.schedule, b.schedule);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn trace_is_consistent() {
    let c = case(3, 9);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    let cfg = PhaConfig::compact();
    let out = run_epha(&c.instance, &c.scenarios, &cfg, &HighsBackend, &tight(), Some(&path)).unwrap();
    assert_eq!(out.trace.len(), out.iterations);
    let lines = std::fs::read_to_string(&path).unwrap();
    assert_eq!(lines.lines().count(), out.iterations);
    for (k, rec) in out.trace.iter().enumerate() {
        assert_eq!(rec.z, k + 1);
        assert!(rec.rho > 0.0 && rec.rho_next > 0.0);
        assert!(rec.rho_next <= rec.rho_cap + 1e-12, "z={}: {} > {}", rec.z, rec.rho_next, rec.rho_cap);
        assert_eq!(rec.consensus.len(), c.instance.len());
        assert_eq!(rec.objectives.len(), c.scenarios.len());
        if let Some(next) = out.trace.get(k + 1) {
            assert_eq!(next.rho, rec.rho_next);
        }
    }
}

#[test]
fn identical_scenarios_reach_the_extensive_form_optimum() {
    let c = case(1, 6);
    let same = ScenarioSet::uniform(vec![c.scenarios.scenarios[0].clone(); 3], c.scenarios.seed);
    let out = run_epha(&c.instance, &same, &PhaConfig::compact(), &HighsBackend, &tight(), None).unwrap();
    let exact = solve_by_orders(&c.instance, &same, &HighsBackend, &tight(), true).unwrap();
    assert!((out.metrics.cost - exact.objective).abs() <= 1e-6 * exact.objective.max(1.0));
}

#[test]
fn thread_count_does_not_change_the_outcome() {
    let c = case(3, 8);
    let run = |threads: usize| -> PhaOutcome {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_epha(&c.instance, &c.scenarios, &PhaConfig::compact(), &HighsBackend, &tight(), None).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.schedule, four.schedule);
    assert_eq!(one.iterations, four.iterations);
    let consensus = |o: &PhaOutcome| o.trace.iter().map(|t| t.consensus.clone()).collect::<Vec<_>>();
    assert_eq!(consensus(&one), consensus(&four));
}

#[test]
fn relabelling_scenarios_changes_nothing() {
    let c = case(3, 8);
    let mut reversed = c.scenarios.clone();
    reversed.scenarios.reverse();
    let cfg = PhaConfig::compact();
    let a = run_epha(&c.instance, &c.scenarios, &cfg, &HighsBackend, &tight(), None).unwrap();
    let b = run_epha(&c.instance, &reversed, &cfg, &HighsBackend, &tight(), None).unwrap();
    assert_eq!(a.schedule, b.schedule);
    assert!((a.metrics.cost - b.metrics.cost).abs() < 1e-9);
}
