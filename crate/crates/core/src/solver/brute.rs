use crate::domain::{FirstStageSchedule, Instance};
use crate::error::{Error, Result};
use crate::scenario::ScenarioSet;
use crate::simulate::evaluate_expected;

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub schedule: FirstStageSchedule,
    pub expected_cost: f64,
    pub candidates: usize,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == perm.len() {
            out.push(perm.clone());
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(k + 1, perm, out);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, &mut out);
    out
}

/// Nondecreasing sequences of length `n` over `0..=steps`.
fn monotone(n: usize, steps: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, lo: u32, steps: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in lo..=steps {
            cur.push(v);
            rec(n, v, steps, cur, out);
            cur.pop();
        }
    }
    rec(n, 0, steps, &mut cur, &mut out);
    out
}

/// Enumerates every sequence and every grid appointment vector, scoring each with the
/// exact second-stage evaluator. Intended as an oracle for tiny instances only.
pub fn brute_force_exact(
    instance: &Instance,
    set: &ScenarioSet,
    grid_step: u32,
    horizon: u32,
) -> Result<BruteForceResult> {
    let n = instance.len();
    if grid_step == 0 {
        return Err(Error::Validation("grid_step must be positive".into()));
    }
    let steps = horizon / grid_step;
    if n > 4 || steps > 12 || set.len() > 10 {
        return Err(Error::SizeGuard(format!(
            "brute force limited to 4 patients, 12 grid steps and 10 scenarios (got {n}, {steps}, {})",
            set.len()
        )));
    }
    set.validate(n)?;
    let grids = monotone(n, steps);
    let mut best: Option<BruteForceResult> = None;
    let mut candidates = 0;
    for order in permutations(n) {
        for g in &grids {
            let mut appointments = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                appointments[i] = g[pos] * grid_step;
            }
            let schedule = FirstStageSchedule { appointments, order: order.clone() };
            let cost = evaluate_expected(instance, &schedule, set)?.cost;
            candidates += 1;
            if best.as_ref().is_none_or(|b| cost < b.expected_cost - 1e-9) {
                best = Some(BruteForceResult { schedule, expected_cost: cost, candidates: 0 });
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::Validation("instance has no patients".into()))?;
    best.candidates = candidates;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_sizes() {
        assert_eq!(permutations(4).len(), 24);
        // multiset coefficient C(3 + 2, 2)
        assert_eq!(monotone(2, 3).len(), 10);
    }
}
