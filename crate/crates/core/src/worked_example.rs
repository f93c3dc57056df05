//! A seven-patient, two-IR, three-OR day used throughout the docs and tests.
//!
//! Appointments, OR pre-assignments and the sequence follow the classic illustration of
//! parallel processing: patients 2 and 7 arrive at time 0 and are inducted side by side.
//! Durations are whole minutes; turnover is listed separately from surgery.

use crate::domain::{CostWeights, FirstStageSchedule, Instance, Patient};
use crate::scenario::Scenario;

/// Appointment per patient (patients are 0-indexed here, 1-indexed in labels).
pub const APPOINTMENTS: [u32; 7] = [20, 0, 55, 10, 38, 87, 0];
pub const OR_OF: [usize; 7] = [0, 0, 1, 1, 2, 2, 2];
/// Patients 7, 2, 4, 1, 5, 3, 6.
pub const ORDER: [usize; 7] = [6, 1, 3, 0, 4, 2, 5];
pub const INDUCTION: [f64; 7] = [23.0, 33.0, 3.0, 17.0, 10.0, 55.0, 18.0];
pub const SURGERY: [f64; 7] = [61.0, 5.0, 59.0, 23.0, 56.0, 76.0, 25.0];
pub const TURNOVER: [f64; 7] = [25.0, 17.0, 29.0, 29.0, 16.0, 16.0, 16.0];

pub fn instance() -> Instance {
    Instance {
        patients: OR_OF.iter().enumerate().map(|(i, &r)| Patient { id: i, acuity: 1, or_id: r }).collect(),
        num_irs: 2,
        num_ors: 3,
        weights: CostWeights::baseline(),
        big_m: 1000.0,
        appointment_horizon: 120,
    }
}

pub fn schedule() -> FirstStageSchedule {
    FirstStageSchedule { appointments: APPOINTMENTS.to_vec(), order: ORDER.to_vec() }
}

pub fn scenario() -> Scenario {
    Scenario::new(INDUCTION.to_vec(), SURGERY.to_vec(), TURNOVER.to_vec(), 1.0)
}
