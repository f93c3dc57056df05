//! Sequencing rules and percentile-based appointment hedging.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{AcuityClass, FirstStageSchedule, Instance};
use crate::error::{Error, Result};
use crate::scenario::class_lookup;

pub const PERCENTILES: [u32; 5] = [50, 60, 70, 80, 90];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequencingRule {
    /// Shortest mean induction first.
    Spt,
    /// Longest mean induction first.
    Lpt,
    /// Smallest induction variance first.
    Var,
}

impl SequencingRule {
    pub const ALL: [SequencingRule; 3] = [SequencingRule::Spt, SequencingRule::Lpt, SequencingRule::Var];
}

impl fmt::Display for SequencingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequencingRule::Spt => "SPT",
            SequencingRule::Lpt => "LPT",
            SequencingRule::Var => "VAR",
        })
    }
}

impl FromStr for SequencingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SPT" => Ok(SequencingRule::Spt),
            "LPT" => Ok(SequencingRule::Lpt),
            "VAR" => Ok(SequencingRule::Var),
            _ => Err(Error::Validation(format!("unknown sequencing rule `{s}` (expected SPT, LPT or VAR)"))),
        }
    }
}

pub fn sequence(instance: &Instance, classes: &[AcuityClass], rule: SequencingRule) -> Result<Vec<usize>> {
    let keys = instance
        .patients
        .iter()
        .map(|p| {
            let c = class_lookup(classes, p.acuity)?;
            Ok(match rule {
                SequencingRule::Spt => c.induction_moments.mean,
                SequencingRule::Lpt => -c.induction_moments.mean,
                SequencingRule::Var => c.induction_moments.sd,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..instance.len()).collect();
    order.sort_by(|&i, &j| keys[i].total_cmp(&keys[j]).then(i.cmp(&j)));
    Ok(order)
}

/// Nearest-rank percentile of an unsorted sample.
pub fn nearest_rank(sample: &[f64], percentile: u32) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Validation("percentile of an empty pool".into()));
    }
    if percentile == 0 || percentile > 100 {
        return Err(Error::Validation(format!("percentile {percentile} outside 1..=100")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (percentile as usize * sorted.len()).div_ceil(100).max(1);
    Ok(sorted[rank - 1])
}

/// Induction-duration estimate per acuity level at one percentile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgingTable {
    pub percentile: u32,
    pub estimates: BTreeMap<u32, f64>,
}

impl HedgingTable {
    pub fn estimate(&self, acuity: u32) -> Result<f64> {
        self.estimates
            .get(&acuity)
            .copied()
            .ok_or_else(|| Error::Validation(format!("hedging table has no acuity {acuity}")))
    }
}

pub fn percentile_estimates(classes: &[AcuityClass], percentile: u32) -> Result<HedgingTable> {
    let estimates = classes
        .iter()
        .map(|c| {
            nearest_rank(&c.induction_pool, percentile)
                .map(|v| (c.id, v))
                .map_err(|_| Error::Validation(format!("acuity {} has an empty induction pool", c.id)))
        })
        .collect::<Result<_>>()?;
    Ok(HedgingTable { percentile, estimates })
}

/// Greedy appointment setting: the first |K| patients start at 0, each later patient is booked at
/// the earliest estimated IR release.
pub fn hedged_schedule(instance: &Instance, order: &[usize], table: &HedgingTable) -> Result<FirstStageSchedule> {
    let n = instance.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Validation("order is not a permutation of the patients".into()));
    }
    let mut free = vec![0.0_f64; instance.num_irs.max(1)];
    let mut appointments = vec![0_u32; n];
    for (pos, &i) in order.iter().enumerate() {
        let est = table.estimate(instance.patients[i].acuity)?;
        let k = if pos < free.len() {
            pos
        } else {
            (0..free.len()).min_by(|&x, &y| free[x].total_cmp(&free[y]).then(x.cmp(&y))).unwrap_or(0)
        };
        let a = if pos < free.len() { 0 } else { (free[k] - 1e-9).ceil().max(0.0) as u32 };
        appointments[i] = a;
        free[k] = a as f64 + est;
    }
    let schedule = FirstStageSchedule { appointments, order: order.to_vec() };
    schedule.validate(instance)?;
    Ok(schedule)
}
