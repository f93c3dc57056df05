use std::collections::HashSet;

const QUANTUM: f64 = 1e-6;

/// Remembers every multiplier vector seen per patient.
#[derive(Debug, Clone, Default)]
pub struct CycleDetector {
    seen: Vec<HashSet<Vec<i64>>>,
}

impl CycleDetector {
    pub fn new(num_patients: usize) -> Self {
        CycleDetector { seen: vec![HashSet::new(); num_patients] }
    }

    /// Records `mu` (one entry per scenario) and reports whether it was seen before.
    pub fn observe(&mut self, patient: usize, mu: &[f64]) -> bool {
        let key: Vec<i64> = mu.iter().map(|m| (m / QUANTUM).round() as i64).collect();
        !self.seen[patient].insert(key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_multipliers_repeat() {
        let mut d = CycleDetector::new(1);
        assert!(!d.observe(0, &[1.0, -1.0]));
        assert!(d.observe(0, &[1.0, -1.0]));
    }

    #[test]
    fn increasing_multipliers_never_repeat() {
        let mut d = CycleDetector::new(1);
        for k in 0..100 {
            assert!(!d.observe(0, &[k as f64 * 0.5, 0.0]));
        }
    }

    #[test]
    fn period_three_detected_at_first_repeat() {
        let mut d = CycleDetector::new(2);
        let seq = [[0.3, -0.3], [0.1, -0.1], [-0.4, 0.4]];
        let hits: Vec<bool> = (0..6).map(|k| d.observe(1, &seq[k % 3])).collect();
        assert_eq!(hits, vec![false, false, false, true, true, true]);
    }

    #[test]
    fn quantum_absorbs_float_noise() {
        let mut d = CycleDetector::new(1);
        d.observe(0, &[0.1 + 0.2]);
        assert!(d.observe(0, &[0.3]));
    }
}
