use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Precedences and appointments fixed so far. Entries are never removed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixingLedger {
    pub num_patients: usize,
    pub orders: BTreeSet<(usize, usize)>,
    pub appointments: BTreeMap<usize, u32>,
}

impl FixingLedger {
    pub fn new(num_patients: usize) -> Self {
        FixingLedger { num_patients, ..Default::default() }
    }

    pub fn unfixed(&self) -> usize {
        self.num_patients - self.appointments.len()
    }

    pub fn order_fixed(&self, i: usize, j: usize) -> bool {
        self.orders.contains(&(i, j)) || self.orders.contains(&(j, i))
    }

    /// `reach[i][j]`: a chain of fixed precedences leads from i to j (reflexive).
    fn closure(&self, extra: Option<(usize, usize)>) -> Vec<Vec<bool>> {
        let n = self.num_patients;
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(i, j) in self.orders.iter().chain(extra.as_ref()) {
            reach[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }

    fn consistent(&self, reach: &[Vec<bool>], appointments: &BTreeMap<usize, u32>) -> bool {
        let n = self.num_patients;
        if (0..n).any(|i| (0..n).any(|j| i != j && reach[i][j] && reach[j][i])) {
            return false;
        }
        appointments.iter().all(|(&i, &ai)| appointments.iter().all(|(&j, &aj)| !reach[i][j] || ai <= aj))
    }

    /// Feasible interval for patient `i` implied by fixed appointments along fixed chains.
    pub fn bounds(&self, i: usize, horizon: u32) -> (u32, u32) {
        let reach = self.closure(None);
        let mut lo = 0;
        let mut hi = horizon;
        for (&j, &aj) in &self.appointments {
            if reach[j][i] {
                lo = lo.max(aj);
            }
            if reach[i][j] {
                hi = hi.min(aj);
            }
        }
        (lo, hi)
    }

    pub fn try_fix_order(&mut self, i: usize, j: usize) -> bool {
        if i == j || self.order_fixed(i, j) {
            return false;
        }
        let reach = self.closure(Some((i, j)));
        if !self.consistent(&reach, &self.appointments) {
            return false;
        }
        self.orders.insert((i, j));
        true
    }

    pub fn try_fix_appointment(&mut self, i: usize, value: u32) -> bool {
        if self.appointments.contains_key(&i) {
            return false;
        }
        let mut next = self.appointments.clone();
        next.insert(i, value);
        if !self.consistent(&self.closure(None), &next) {
            return false;
        }
        self.appointments = next;
        true
    }

    /// Fixes `i` at `value` clamped into its feasible interval; returns the stored value.
    pub fn force_fix_appointment(&mut self, i: usize, value: u32, horizon: u32) -> u32 {
        if let Some(&v) = self.appointments.get(&i) {
            return v;
        }
        let (lo, hi) = self.bounds(i, horizon);
        let v = value.clamp(lo, hi.max(lo));
        self.appointments.insert(i, v);
        v
    }

    /// Fixes every precedence chosen by at least `share` of the probability mass.
    /// `u[w][i][j]` is scenario w's precedence. Returns (fixed, rejected).
    pub fn fix_orders(&mut self, u: &[Vec<Vec<bool>>], probabilities: &[f64], share: f64) -> (usize, usize) {
        let n = self.num_patients;
        let (mut fixed, mut rejected) = (0, 0);
        for i in 0..n {
            for j in 0..n {
                if i == j || self.order_fixed(i, j) {
                    continue;
                }
                let s: f64 = u.iter().zip(probabilities).filter(|(uw, _)| uw[i][j]).map(|(_, p)| p).sum();
                if s + 1e-12 >= share {
                    if self.try_fix_order(i, j) {
                        fixed += 1;
                    } else {
                        rejected += 1;
                    }
                }
            }
        }
        (fixed, rejected)
    }

    /// Fixes `a_i` when one value carries at least `percent` of the probability mass.
    pub fn fix_appointments(&mut self, a: &[Vec<u32>], probabilities: &[f64], percent: f64) -> usize {
        let mut fixed = 0;
        for i in 0..self.num_patients {
            if self.appointments.contains_key(&i) {
                continue;
            }
            let mut mass: BTreeMap<u32, f64> = BTreeMap::new();
            for (row, &p) in a.iter().zip(probabilities) {
                *mass.entry(row[i]).or_default() += p;
            }
            let best = mass.iter().max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(x.0)));
            if let Some((&v, &m)) = best {
                if m + 1e-12 >= percent / 100.0 && self.try_fix_appointment(i, v) {
                    fixed += 1;
                }
            }
        }
        fixed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimous_order_is_fixed() {
        let mut l = FixingLedger::new(2);
        let u = vec![vec![vec![false, true], vec![false, false]]; 3];
        assert_eq!(l.fix_orders(&u, &[1.0 / 3.0; 3], 0.8), (1, 0));
        assert!(l.orders.contains(&(0, 1)));
    }

    #[test]
    fn share_exactly_at_threshold_counts() {
        let mut l = FixingLedger::new(2);
        let yes = vec![vec![false, true], vec![true, false]];
        let no = vec![vec![false, false], vec![true, false]];
        let u = vec![yes.clone(), yes.clone(), yes.clone(), yes, no];
        l.fix_orders(&u, &[0.2; 5], 0.8);
        assert!(l.orders.contains(&(0, 1)));
        // the reverse precedence is unanimous but now conflicts
        assert!(!l.orders.contains(&(1, 0)));
    }

    #[test]
    fn cycles_are_rejected() {
        let mut l = FixingLedger::new(3);
        assert!(l.try_fix_order(0, 1));
        assert!(l.try_fix_order(1, 2));
        assert!(!l.try_fix_order(2, 0));
        assert_eq!(l.orders.len(), 2);
    }

    #[test]
    fn appointments_respect_chains() {
        let mut l = FixingLedger::new(3);
        l.try_fix_order(0, 1);
        l.try_fix_order(1, 2);
        assert!(l.try_fix_appointment(2, 30));
        assert!(!l.try_fix_appointment(0, 31));
        assert!(l.try_fix_appointment(0, 10));
        assert_eq!(l.bounds(1, 100), (10, 30));
        assert_eq!(l.force_fix_appointment(1, 50, 100), 30);
        assert_eq!(l.unfixed(), 0);
    }

    #[test]
    fn appointment_needs_threshold_mass() {
        let mut l = FixingLedger::new(1);
        let a = vec![vec![5], vec![5], vec![7]];
        assert_eq!(l.fix_appointments(&a, &[1.0 / 3.0; 3], 100.0), 0);
        assert_eq!(l.fix_appointments(&a, &[1.0 / 3.0; 3], 60.0), 1);
        assert_eq!(l.appointments[&0], 5);
    }
}
