//! Pure update rules used at the iteration barrier.

use super::PhaConfig;

/// Appointment-fixing threshold p^(z) in percent.
pub fn threshold(z: usize, cfg: &PhaConfig) -> f64 {
    if z <= cfg.limit_2 {
        let span = (cfg.limit_2 - 1).max(1) as f64;
        100.0 - 20.0 * (z.max(1) - 1) as f64 / span
    } else if z <= cfg.limit_3 {
        80.0
    } else if z <= cfg.limit_4 {
        70.0
    } else {
        60.0
    }
}

/// Active penalty cap at iteration `z`.
pub fn upper_limit(z: usize, cfg: &PhaConfig) -> f64 {
    if z <= cfg.limit_1 {
        cfg.rho_u1
    } else if z <= cfg.limit_5 {
        cfg.rho_u2
    } else {
        cfg.rho_u3
    }
}

/// Three-upper-limit penalty rule. `delta_d` and `delta_p` are (previous, current).
pub fn penalty_update(rho: f64, z: usize, delta_d: (f64, f64), delta_p: (f64, f64), cfg: &PhaConfig) -> f64 {
    let cap = upper_limit(z, cfg);
    if delta_d.1 > delta_d.0 {
        if rho < cap {
            (cfg.alpha * rho).min(cap)
        } else {
            cap
        }
    } else if delta_p.1 > delta_p.0 {
        if cfg.literal_reciprocal {
            if rho > 0.0 { (1.0 / (cfg.alpha * rho)).min(cap) } else { 0.0 }
        } else {
            rho / cfg.alpha
        }
    } else if rho > cap {
        cap
    } else {
        rho
    }
}

/// Probability-weighted mean per patient; `a[w][i]`.
pub fn update_consensus(a: &[Vec<f64>], probabilities: &[f64]) -> Vec<f64> {
    let n = a.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (row, &p) in a.iter().zip(probabilities) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += p * v;
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(first) = a.first().map(|row| row[i]) {
            if a.iter().all(|row| row[i] == first) {
                *o = first;
            }
        }
    }
    out
}

/// Sum over patients and scenarios of squared deviation from consensus.
pub fn dual_residual(a: &[Vec<f64>], consensus: &[f64]) -> f64 {
    a.iter().flat_map(|row| row.iter().zip(consensus).map(|(v, c)| (v - c).powi(2))).sum()
}

pub fn primal_drift(consensus: &[f64], previous: &[f64]) -> f64 {
    consensus.iter().zip(previous).map(|(a, b)| (a - b).powi(2)).sum()
}

pub fn round_half_up(x: f64) -> u32 {
    (x + 0.5 + 1e-9).floor().max(0.0) as u32
}
