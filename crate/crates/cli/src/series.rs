//! Closed-loop runs and their recorded columns.

use pneumabond_core::actuator::{assemble_actuator, ACTUATOR_OBSERVABLES};
use pneumabond_core::{integrate, PdController};

use crate::config::Scenario;
use crate::error::Error;

/// CSV column names, in file order.
pub const COLUMNS: [&str; 12] = [
    "t", "x_L", "v_L", "P2_L", "P1_L", "x_R", "v_R", "P2_R", "P1_R", "z", "theta", "tau",
];

/// Columnar record of one run (SI units). `x_ref_l` and `x_ref_r` carry the
/// controller references for plotting and are not part of the CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub x_l: Vec<f64>,
    pub v_l: Vec<f64>,
    pub p2_l: Vec<f64>,
    pub p1_l: Vec<f64>,
    pub x_r: Vec<f64>,
    pub v_r: Vec<f64>,
    pub p2_r: Vec<f64>,
    pub p1_r: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
    pub x_ref_l: Vec<f64>,
    pub x_ref_r: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// The twelve CSV columns in [`COLUMNS`] order.
    pub fn columns(&self) -> [&[f64]; 12] {
        [
            &self.t,
            &self.x_l,
            &self.v_l,
            &self.p2_l,
            &self.p1_l,
            &self.x_r,
            &self.v_r,
            &self.p2_r,
            &self.p1_r,
            &self.z,
            &self.theta,
            &self.tau,
        ]
    }

    pub fn row(&self, i: usize) -> [f64; 12] {
        self.columns().map(|c| c[i])
    }
}

fn index(label: &str) -> usize {
    ACTUATOR_OBSERVABLES
        .iter()
        .position(|l| *l == label)
        .expect("actuator observable")
}

/// Integrates the two-sided actuator under PD control from rest.
pub fn run_scenario(scenario: &Scenario) -> Result<TimeSeries, Error> {
    scenario.validate()?;
    let model = assemble_actuator(&scenario.actuator());
    let controller = PdController::new(scenario.control, scenario.pressure_limit);
    let [x_l, v_l, p2_l, x_r, v_r, p2_r, p1_l, p1_r, z, theta, tau] =
        ACTUATOR_OBSERVABLES.map(index);

    let trajectory = integrate(
        &model,
        &vec![0.0; model.state_dim()],
        |t, y| {
            let (left, right) = controller.pressures(t, (y[x_l], y[v_l]), (y[x_r], y[v_r]));
            vec![left, right]
        },
        &scenario.solver,
    )?;

    let column = |i: usize| trajectory.observable_column(i);
    let references: Vec<_> = trajectory
        .times
        .iter()
        .map(|&t| controller.references(t))
        .collect();
    Ok(TimeSeries {
        t: trajectory.times.clone(),
        x_l: column(x_l),
        v_l: column(v_l),
        p2_l: column(p2_l),
        p1_l: column(p1_l),
        x_r: column(x_r),
        v_r: column(v_r),
        p2_r: column(p2_r),
        p1_r: column(p1_r),
        z: column(z),
        theta: column(theta),
        tau: column(tau),
        x_ref_l: references.iter().map(|r| r[0].0).collect(),
        x_ref_r: references.iter().map(|r| r[1].0).collect(),
    })
}
