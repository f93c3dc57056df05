//! Duration pools, scenario sampling and scenario-set transformations.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::domain::{AcuityClass, Instance, Moments};
use crate::error::{Error, Result};

pub const TURNOVER_MIN: f64 = 15.0;
pub const TURNOVER_MAX: f64 = 30.0;

const UROLOGY_MOMENTS: &str = include_str!("../data/urology_moments.csv");

/// One realization of induction, surgery and turnover durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub induction: Vec<f64>,
    pub surgery: Vec<f64>,
    pub turnover: Vec<f64>,
    pub probability: f64,
}

impl Scenario {
    pub fn new(induction: Vec<f64>, surgery: Vec<f64>, turnover: Vec<f64>, probability: f64) -> Self {
        Scenario { induction, surgery, turnover, probability }
    }

    pub fn len(&self) -> usize {
        self.induction.len()
    }

    pub fn is_empty(&self) -> bool {
        self.induction.is_empty()
    }

    /// `e + d + q` for patient `i`.
    pub fn occupancy(&self, i: usize) -> f64 {
        self.induction[i] + self.surgery[i] + self.turnover[i]
    }

    /// OR time after the surgery starts, `d + q`.
    pub fn or_time(&self, i: usize) -> f64 {
        self.surgery[i] + self.turnover[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
    pub seed: u64,
}

impl ScenarioSet {
    /// Wraps scenarios with equal probabilities.
    pub fn uniform(mut scenarios: Vec<Scenario>, seed: u64) -> Self {
        let n = scenarios.len();
        for s in &mut scenarios {
            s.probability = 1.0 / n as f64;
        }
        ScenarioSet { scenarios, seed }
    }

    pub fn single(scenario: Scenario) -> Self {
        ScenarioSet::uniform(vec![scenario], 0)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn validate(&self, num_patients: usize) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Validation("scenario set is empty".into()));
        }
        let mut total = 0.0;
        for (w, s) in self.scenarios.iter().enumerate() {
            if s.induction.len() != num_patients || s.surgery.len() != num_patients || s.turnover.len() != num_patients {
                return Err(Error::Validation(format!("scenario {w} does not cover {num_patients} patients")));
            }
            let durations = s.induction.iter().chain(&s.surgery).chain(&s.turnover);
            if durations.clone().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::Validation(format!("scenario {w} has a nonpositive duration")));
            }
            if !(s.probability > 0.0 && s.probability <= 1.0) {
                return Err(Error::Validation(format!("scenario {w} probability {} outside (0,1]", s.probability)));
            }
            total += s.probability;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("scenario probabilities sum to {total}")));
        }
        Ok(())
    }
}

/// One row of a moments table: class size and duration statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMoments {
    pub acuity: u32,
    pub count: f64,
    pub induction: Moments,
    pub surgery: Moments,
}

#[derive(Debug, Deserialize)]
struct MomentsRow {
    acuity: u32,
    count: f64,
    ind_mean: f64,
    ind_sd: f64,
    surg_mean: f64,
    surg_sd: f64,
}

#[derive(Debug, Deserialize)]
struct PoolRow {
    acuity: u32,
    kind: String,
    duration_minutes: f64,
}

fn parse_moments(reader: impl std::io::Read) -> Result<Vec<ClassMoments>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, row) in rdr.deserialize::<MomentsRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("moments row {}: {e}", line + 1)))?;
        if !seen.insert(row.acuity) {
            return Err(Error::Parse(format!("moments row {}: duplicate acuity {}", line + 1, row.acuity)));
        }
        if row.ind_mean <= 0.0 || row.surg_mean <= 0.0 || row.count < 0.0 {
            return Err(Error::Parse(format!("moments row {}: nonpositive mean or negative count", line + 1)));
        }
        out.push(ClassMoments {
            acuity: row.acuity,
            count: row.count,
            induction: Moments { mean: row.ind_mean, sd: row.ind_sd },
            surgery: Moments { mean: row.surg_mean, sd: row.surg_sd },
        });
    }
    if out.is_empty() {
        return Err(Error::Parse("moments file has no rows".into()));
    }
    Ok(out)
}

/// Reads a moments table with header `acuity,count,ind_mean,ind_sd,surg_mean,surg_sd`.
pub fn load_moments(path: &Path) -> Result<Vec<ClassMoments>> {
    parse_moments(std::fs::File::open(path)?)
}

/// The five urology acuity levels shipped with the crate.
pub fn urology_moments() -> Vec<ClassMoments> {
    parse_moments(UROLOGY_MOMENTS.as_bytes()).expect("bundled moments table parses")
}

pub fn parse_pools(reader: impl std::io::Read) -> Result<Vec<AcuityClass>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut pools: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (line, row) in rdr.deserialize::<PoolRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("pool row {}: {e}", line + 1)))?;
        if !row.duration_minutes.is_finite() || row.duration_minutes <= 0.0 {
            return Err(Error::Parse(format!(
                "pool row {}: nonpositive duration {}",
                line + 1,
                row.duration_minutes
            )));
        }
        let entry = pools.entry(row.acuity).or_default();
        match row.kind.trim() {
            "induction" => entry.0.push(row.duration_minutes),
            "surgery" => entry.1.push(row.duration_minutes),
            other => return Err(Error::Parse(format!("pool row {}: unknown kind {other:?}", line + 1))),
        }
    }
    if pools.is_empty() {
        return Err(Error::Parse("pool file has no rows".into()));
    }
    let sizes: Vec<f64> = pools.values().map(|(e, d)| e.len().max(d.len()) as f64).collect();
    let total: f64 = sizes.iter().sum();
    Ok(pools
        .into_iter()
        .zip(sizes)
        .map(|((id, (ind, surg)), size)| AcuityClass {
            id,
            label: format!("acuity {id}"),
            count_weight: size / total,
            induction_moments: Moments::of(&ind),
            surgery_moments: Moments::of(&surg),
            induction_pool: ind,
            surgery_pool: surg,
        })
        .collect())
}

/// Reads empirical pools from a CSV with header `acuity,kind,duration_minutes`.
///
/// Each class's `count_weight` is its share of records.
pub fn load_pools(path: &Path) -> Result<Vec<AcuityClass>> {
    parse_pools(std::fs::File::open(path)?)
}

pub fn write_pools(classes: &[AcuityClass], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["acuity", "kind", "duration_minutes"])?;
    for c in classes {
        for v in &c.induction_pool {
            w.write_record([c.id.to_string(), "induction".into(), v.to_string()])?;
        }
        for v in &c.surgery_pool {
            w.write_record([c.id.to_string(), "surgery".into(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn lognormal_pool(target: Moments, size: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if target.sd < 0.0 || !target.sd.is_finite() {
        return Err(Error::Validation(format!("standard deviation {} is negative", target.sd)));
    }
    if target.mean <= 0.0 {
        return Err(Error::Validation(format!("mean {} must be positive", target.mean)));
    }
    if target.sd == 0.0 {
        return Ok(vec![target.mean; size]);
    }
    let sigma2 = (1.0 + (target.sd / target.mean).powi(2)).ln();
    let mu = target.mean.ln() - sigma2 / 2.0;
    let sigma = sigma2.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    // Stratified quantiles keep sample moments close to the targets.
    let mut pool: Vec<f64> = (0..size)
        .map(|k| {
            let u = (k as f64 + 0.5) / size as f64;
            (mu + sigma * std_normal.inverse_cdf(u)).exp()
        })
        .collect();
    pool.shuffle(rng);
    Ok(pool)
}

/// Builds lognormal pools whose sample mean and sd track the given moments.
pub fn synthesize_pools(moments: &[ClassMoments], pool_size: usize, seed: u64) -> Result<Vec<AcuityClass>> {
    if pool_size < 30 {
        return Err(Error::Validation(format!("pool size {pool_size} is below 30")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = moments.iter().map(|m| m.count).sum();
    let mut out = Vec::with_capacity(moments.len());
    for m in moments {
        let induction_pool = lognormal_pool(m.induction, pool_size, &mut rng)?;
        let surgery_pool = lognormal_pool(m.surgery, pool_size, &mut rng)?;
        out.push(AcuityClass {
            id: m.acuity,
            label: format!("acuity {}", m.acuity),
            count_weight: if total > 0.0 { m.count / total } else { 1.0 / moments.len() as f64 },
            induction_moments: m.induction,
            surgery_moments: m.surgery,
            induction_pool,
            surgery_pool,
        });
    }
    Ok(out)
}

pub fn class_lookup(classes: &[AcuityClass], acuity: u32) -> Result<&AcuityClass> {
    classes
        .iter()
        .find(|c| c.id == acuity)
        .ok_or_else(|| Error::Validation(format!("no duration pool for acuity {acuity}")))
}

/// Draws `n` equiprobable scenarios: induction and surgery from the patient's class pools,
/// turnover uniform on [15, 30].
pub fn sample_scenarios(instance: &Instance, classes: &[AcuityClass], n: usize, seed: u64) -> Result<ScenarioSet> {
    if n == 0 {
        return Err(Error::Validation("scenario count must be at least 1".into()));
    }
    let mut per_patient = Vec::with_capacity(instance.len());
    for p in &instance.patients {
        let c = class_lookup(classes, p.acuity)?;
        if c.induction_pool.is_empty() || c.surgery_pool.is_empty() {
            return Err(Error::Validation(format!("acuity {} has an empty pool", c.id)));
        }
        per_patient.push(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenarios = Vec::with_capacity(n);
    for _ in 0..n {
        let mut e = Vec::with_capacity(instance.len());
        let mut d = Vec::with_capacity(instance.len());
        let mut q = Vec::with_capacity(instance.len());
        for c in &per_patient {
            e.push(c.induction_pool[rng.random_range(0..c.induction_pool.len())]);
            d.push(c.surgery_pool[rng.random_range(0..c.surgery_pool.len())]);
            q.push(rng.random_range(TURNOVER_MIN..=TURNOVER_MAX));
        }
        scenarios.push(Scenario::new(e, d, q, 0.0));
    }
    Ok(ScenarioSet::uniform(scenarios, seed))
}

/// Probability-weighted per-patient means.
pub fn mean_scenario(set: &ScenarioSet) -> Result<Scenario> {
    let first = set.scenarios.first().ok_or_else(|| Error::Validation("scenario set is empty".into()))?;
    let n = first.len();
    let mut mean = Scenario::new(vec![0.0; n], vec![0.0; n], vec![0.0; n], 1.0);
    let total: f64 = set.scenarios.iter().map(|s| s.probability).sum();
    for s in &set.scenarios {
        let p = s.probability / total;
        for i in 0..n {
            mean.induction[i] += p * s.induction[i];
            mean.surgery[i] += p * s.surgery[i];
            mean.turnover[i] += p * s.turnover[i];
        }
    }
    Ok(mean)
}

fn expected_total(set: &ScenarioSet, pick: impl Fn(&Scenario) -> &Vec<f64>) -> f64 {
    set.scenarios.iter().map(|s| s.probability * pick(s).iter().sum::<f64>()).sum()
}

/// Rescales turnover so that expected turnover over expected induction equals `ratio`.
pub fn scale_turnover(set: &ScenarioSet, ratio: f64) -> Result<ScenarioSet> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::Validation(format!("turnover ratio {ratio} must be positive")));
    }
    let e = expected_total(set, |s| &s.induction);
    let q = expected_total(set, |s| &s.turnover);
    if q <= 0.0 {
        return Err(Error::Validation("expected turnover is zero".into()));
    }
    let factor = ratio * e / q;
    let mut out = set.clone();
    for s in &mut out.scenarios {
        for v in &mut s.turnover {
            *v *= factor;
        }
    }
    Ok(out)
}

/// Ratio of expected turnover to expected induction.
pub fn turnover_ratio(set: &ScenarioSet) -> f64 {
    expected_total(set, |s| &s.turnover) / expected_total(set, |s| &s.induction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CostWeights, Patient};
    use proptest::prelude::*;

    fn instance(acuities: &[u32]) -> Instance {
        Instance {
            patients: acuities
                .iter()
                .enumerate()
                .map(|(i, &a)| Patient { id: i, acuity: a, or_id: i % 3 })
                .collect(),
            num_irs: 2,
            num_ors: 3,
            weights: CostWeights::baseline(),
            big_m: 1000.0,
            appointment_horizon: 100,
        }
    }

    fn sample_moments(pool: &[f64]) -> Moments {
        Moments::of(pool)
    }

    #[test]
    fn bundled_table_has_five_levels() {
        let m = urology_moments();
        assert_eq!(m.len(), 5);
        let counts: Vec<f64> = m.iter().map(|c| c.count).collect();
        assert_eq!(counts, vec![329.0, 640.0, 153.0, 345.0, 496.0]);
        assert_eq!(m[2].surgery, Moments { mean: 109.12, sd: 42.96 });
    }

    #[test]
    fn pool_weights_follow_record_counts() {
        let counts = [329usize, 640, 153, 345, 496];
        let mut text = String::from("acuity,kind,duration_minutes\n");
        for (k, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                text.push_str(&format!("{},induction,10\n{},surgery,20\n", k + 1, k + 1));
            }
        }
        let classes = parse_pools(text.as_bytes()).unwrap();
        let total: usize = counts.iter().sum();
        for (c, &n) in classes.iter().zip(&counts) {
            assert!((c.count_weight - n as f64 / total as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn single_class_pool_has_unit_weight() {
        let classes = parse_pools("acuity,kind,duration_minutes\n4,induction,12\n4,surgery,30\n".as_bytes()).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].count_weight, 1.0);
    }

    #[test]
    fn negative_duration_names_the_row() {
        let text = "acuity,kind,duration_minutes\n1,induction,12\n1,surgery,-3\n";
        let err = parse_pools(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }

    #[test]
    fn synthetic_pool_matches_acuity_two_induction() {
        let classes = synthesize_pools(&urology_moments(), 1000, 3).unwrap();
        let m = sample_moments(&classes[1].induction_pool);
        assert!((m.mean - 13.82).abs() <= 0.05 * 13.82);
        assert!((m.sd - 6.07).abs() <= 0.05 * 6.07);
    }

    #[test]
    fn zero_sd_gives_constant_pool() {
        let m = [ClassMoments {
            acuity: 1,
            count: 1.0,
            induction: Moments { mean: 12.0, sd: 0.0 },
            surgery: Moments { mean: 40.0, sd: 0.0 },
        }];
        let c = synthesize_pools(&m, 50, 1).unwrap();
        assert!(c[0].induction_pool.iter().all(|&v| v == 12.0));
    }

    #[test]
    fn acuity_five_surgery_moments_within_five_percent() {
        let classes = synthesize_pools(&urology_moments(), 10_000, 11).unwrap();
        let pool = &classes[4].surgery_pool;
        // Independent two-pass moment computation.
        let n = pool.len() as f64;
        let mean = pool.iter().sum::<f64>() / n;
        let sd = (pool.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 52.12).abs() <= 0.05 * 52.12, "mean {mean}");
        assert!((sd - 32.56).abs() <= 0.05 * 32.56, "sd {sd}");
    }

    #[test]
    fn negative_sd_is_rejected() {
        let m = [ClassMoments {
            acuity: 1,
            count: 1.0,
            induction: Moments { mean: 12.0, sd: -1.0 },
            surgery: Moments { mean: 40.0, sd: 1.0 },
        }];
        assert!(synthesize_pools(&m, 50, 1).is_err());
    }

    #[test]
    fn sampling_baseline_and_unit_sets() {
        let classes = synthesize_pools(&urology_moments(), 200, 1).unwrap();
        let inst = instance(&[1, 2, 3, 4, 5, 2, 1]);
        let set = sample_scenarios(&inst, &classes, 50, 9).unwrap();
        assert_eq!(set.len(), 50);
        assert!(set.scenarios.iter().all(|s| (s.probability - 0.02).abs() < 1e-15));
        set.validate(7).unwrap();
        let one = sample_scenarios(&inst, &classes, 1, 9).unwrap();
        assert_eq!(one.scenarios[0].probability, 1.0);
        for s in &set.scenarios {
            assert!(s.turnover.iter().all(|&q| (TURNOVER_MIN..=TURNOVER_MAX).contains(&q)));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let classes = synthesize_pools(&urology_moments(), 200, 1).unwrap();
        let inst = instance(&[1, 3, 5]);
        let a = sample_scenarios(&inst, &classes, 20, 42).unwrap();
        let b = sample_scenarios(&inst, &classes, 20, 42).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn missing_pool_is_an_error() {
        let classes = synthesize_pools(&urology_moments()[..2], 50, 1).unwrap();
        assert!(sample_scenarios(&instance(&[1, 4]), &classes, 3, 1).is_err());
    }

    #[test]
    fn mean_of_two_scenarios() {
        let set = ScenarioSet::uniform(
            vec![
                Scenario::new(vec![10.0], vec![30.0], vec![15.0], 0.0),
                Scenario::new(vec![20.0], vec![50.0], vec![25.0], 0.0),
            ],
            0,
        );
        let m = mean_scenario(&set).unwrap();
        assert_eq!((m.induction[0], m.surgery[0], m.turnover[0], m.probability), (15.0, 40.0, 20.0, 1.0));
        let single = ScenarioSet::single(set.scenarios[0].clone());
        assert_eq!(mean_scenario(&single).unwrap().induction, vec![10.0]);
    }

    #[test]
    fn mean_matches_direct_summation() {
        let classes = synthesize_pools(&urology_moments(), 200, 1).unwrap();
        let inst = instance(&[1, 2, 3, 4, 5, 2, 1]);
        let set = sample_scenarios(&inst, &classes, 50, 5).unwrap();
        let m = mean_scenario(&set).unwrap();
        for i in 0..7 {
            let mut acc = 0.0;
            for s in &set.scenarios {
                acc += s.probability * s.surgery[i];
            }
            assert!((m.surgery[i] - acc).abs() < 1e-9);
        }
    }

    #[test]
    fn turnover_scaling() {
        let classes = synthesize_pools(&urology_moments(), 200, 1).unwrap();
        let inst = instance(&[1, 2, 3, 4, 5, 2, 1]);
        let set = sample_scenarios(&inst, &classes, 50, 5).unwrap();
        let doubled = scale_turnover(&set, 2.0).unwrap();
        let e: f64 = doubled.scenarios.iter().map(|s| s.probability * s.induction.iter().sum::<f64>()).sum();
        let q: f64 = doubled.scenarios.iter().map(|s| s.probability * s.turnover.iter().sum::<f64>()).sum();
        assert!((q / e - 2.0).abs() < 1e-6);
        assert_eq!(doubled.scenarios[3].induction, set.scenarios[3].induction);
        let unit = scale_turnover(&set, 1.0).unwrap();
        let again = scale_turnover(&unit, 1.0).unwrap();
        for (a, b) in unit.scenarios.iter().zip(&again.scenarios) {
            for (x, y) in a.turnover.iter().zip(&b.turnover) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        let back = scale_turnover(&doubled, turnover_ratio(&set)).unwrap();
        for (a, b) in back.scenarios.iter().zip(&set.scenarios) {
            for (x, y) in a.turnover.iter().zip(&b.turnover) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        assert!(scale_turnover(&set, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn mean_is_linear_under_merging(
            a in prop::collection::vec(1.0f64..100.0, 4),
            b in prop::collection::vec(1.0f64..100.0, 6),
            wa in 0.1f64..0.9,
        ) {
            let part_a = ScenarioSet::uniform(a.iter().map(|&v| Scenario::new(vec![v], vec![v], vec![v], 0.0)).collect(), 0);
            let part_b = ScenarioSet::uniform(b.iter().map(|&v| Scenario::new(vec![v], vec![v], vec![v], 0.0)).collect(), 0);
            let mut merged = Vec::new();
            for s in &part_a.scenarios {
                merged.push(Scenario { probability: s.probability * wa, ..s.clone() });
            }
            for s in &part_b.scenarios {
                merged.push(Scenario { probability: s.probability * (1.0 - wa), ..s.clone() });
            }
            let m = mean_scenario(&ScenarioSet { scenarios: merged, seed: 0 }).unwrap();
            let ma = mean_scenario(&part_a).unwrap();
            let mb = mean_scenario(&part_b).unwrap();
            prop_assert!((m.induction[0] - (wa * ma.induction[0] + (1.0 - wa) * mb.induction[0])).abs() < 1e-9);
        }
    }
}
