//! Mean-function families for the functional simulations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeanId {
    M1,
    M2,
    M3,
    M4,
}

impl MeanId {
    pub const ALL: [MeanId; 4] = [MeanId::M1, MeanId::M2, MeanId::M3, MeanId::M4];

    pub fn name(self) -> &'static str {
        match self {
            MeanId::M1 => "M1",
            MeanId::M2 => "M2",
            MeanId::M3 => "M3",
            MeanId::M4 => "M4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Mean of group `group` (1-based) under family `id` with effect size `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFamily {
    pub id: MeanId,
    pub theta: f64,
    pub group: usize,
}

fn normal_density(t: f64, mean: f64, sd: f64) -> f64 {
    let z = (t - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

/// Baseline `mu_0(t)`.
pub fn baseline(id: MeanId, t: f64) -> f64 {
    match id {
        MeanId::M1 => 5.0 * (t - 0.5).powi(2),
        MeanId::M2 => 1.0,
        MeanId::M3 => -(normal_density(t, 0.25, 0.1) + normal_density(t, 0.75, 0.1)),
        MeanId::M4 => (2.0 * PI * t).sin().exp() / 2.0,
    }
}

/// Shape of the group effect; the mean is `mu_0(t) + theta * k * shift(t)`.
pub fn shift_shape(id: MeanId, t: f64) -> f64 {
    match id {
        MeanId::M1 => {
            (1..=10)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 * t;
                    (a.sin() + a.cos()) / (j * j) as f64
                })
                .sum::<f64>()
                / 50.0
        }
        MeanId::M2 => 1.0 / 40.0,
        MeanId::M3 => (1.0 + (10.0 * t - 2.0) * (10.0 * t - 5.0) * (10.0 * t - 8.0)) / 40.0,
        MeanId::M4 => (-(t - 0.5).powi(2) / 100.0).exp() / 25.0,
    }
}

pub fn mean_eval(family: &MeanFamily, t: f64) -> f64 {
    baseline(family.id, t) + family.theta * family.group as f64 * shift_shape(family.id, t)
}
