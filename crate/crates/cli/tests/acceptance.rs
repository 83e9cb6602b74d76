//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pneumabond_cli::{load_config, run_scenario, write_csv, Scenario};
use pneumabond_core::actuator::{
    bellow_template, gas_capacitance, orifice_resistance, packet_derivatives, packet_model,
    volume_capacitance, PacketParams, PacketState,
};
use pneumabond_core::{
    assign_causality, compile, integrate, BondGraph, CausalityError, ElementKind, Method, Mode,
    SolverOptions, StateSpaceModel,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn derivation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let base = PacketParams::default();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut f = || rng.gen_range(0.5..2.0);
        let params = PacketParams {
            mass: base.mass * f(),
            damping: base.damping * f(),
            stiffness: base.stiffness * f(),
            discharge_coefficient: base.discharge_coefficient * f(),
            orifice_diameter: base.orifice_diameter * f(),
            area: base.area * f(),
            air_density: base.air_density * f(),
            gas_constant: base.gas_constant * f(),
            temperature: base.temperature * f(),
            column_length: base.column_length * f(),
            ..base
        };
        let state = PacketState::new(
            rng.gen_range(-0.05..0.05),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-2000.0..2000.0),
        );
        let p1 = rng.gen_range(-2000.0..2000.0);
        let template = bellow_template(&params);
        let model = compile(&template.graph).map_err(|e| e.to_string())?;
        let x = template.to_graph_state(state);
        let got = template.rates_to_packet(&x, &model.derivatives(0.0, &x, &[p1]));
        let want = packet_derivatives(state, p1, &params).map_err(|_| "non-finite oracle")?;
        worst = worst
            .max(rel_err(got.x, want.x))
            .max(rel_err(got.v, want.v))
            .max(rel_err(got.p2, want.p2));
    }
    ensure(
        worst <= 1e-12,
        format!("worst relative error {worst:.2e} over 1000 samples"),
    )
}

fn constitutive_values() -> Outcome {
    let p = PacketParams::default();
    let c1 = volume_capacitance(p.area, p.stiffness);
    let c2 = gas_capacitance(
        p.area,
        p.column_length,
        p.air_density,
        p.gas_constant,
        p.temperature,
    );
    let r = orifice_resistance(100.0, 0.0, p.discharge_coefficient, p.orifice_diameter);
    ensure(
        (c1 - 2.6331e-7).abs() <= 1e-11
            && (c2 - 9.4254e-7).abs() <= 1e-11
            && (r - 1562.5).abs() <= 1e-6,
        format!("C1 = {c1:.6e}, C2 = {c2:.6e}, R(100 Pa) = {r}"),
    )
}

fn step_response() -> Outcome {
    let model = packet_model(&PacketParams::default());
    let options = SolverOptions {
        method: Method::Rk4,
        dt: 1e-4,
        t_end: 2.0,
        record_stride: 20_000,
    };
    let traj =
        integrate(&model, &[0.0; 3], |_, _| vec![1000.0], &options).map_err(|e| e.to_string())?;
    let s = traj.states.last().ok_or("no rows")?;
    let (x, p2) = (s[0], s[2]);
    ensure(
        (p2 - 1000.0).abs() < 0.1 && (x - 0.0274286).abs() < 1e-4,
        format!("P2(2 s) = {p2:.6} Pa, x(2 s) = {x:.7} m"),
    )
}

fn final_error(method: Method, dt: f64) -> Result<f64, String> {
    let model = StateSpaceModel::autonomous(&["x", "p"], |_t, s, ds| {
        ds[0] = s[1];
        ds[1] = -s[0];
    });
    let options = SolverOptions {
        method,
        dt,
        t_end: 10.0,
        record_stride: 1000,
    };
    let traj =
        integrate(&model, &[1.0, 0.0], |_, _| Vec::new(), &options).map_err(|e| e.to_string())?;
    let s = &traj.final_state;
    Ok(((s[0] - 10f64.cos()).powi(2) + (s[1] + 10f64.sin()).powi(2)).sqrt())
}

fn integrator_order() -> Outcome {
    let rk4 = final_error(Method::Rk4, 0.01)? / final_error(Method::Rk4, 0.005)?;
    let euler = final_error(Method::Euler, 0.01)? / final_error(Method::Euler, 0.005)?;
    let decay = StateSpaceModel::autonomous(&["x"], |_t, x, dx| dx[0] = -x[0]);
    let options = SolverOptions {
        method: Method::Rk4,
        dt: 1e-3,
        t_end: 1.0,
        record_stride: 1000,
    };
    let traj = integrate(&decay, &[1.0], |_, _| Vec::new(), &options).map_err(|e| e.to_string())?;
    let x1 = traj.states.last().ok_or("no rows")?[0];
    ensure(
        (rk4 - 16.0).abs() <= 3.2
            && (euler - 2.0).abs() <= 0.4
            && (x1 - 0.3678794412).abs() <= 1e-9,
        format!("RK4 ratio {rk4:.3}, Euler ratio {euler:.3}, x(1) = {x1:.10}"),
    )
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn scenario(mode: Mode) -> Scenario {
    let mut s = Scenario::default();
    s.control.mode = mode;
    s
}

fn bending_mode() -> Outcome {
    let ts = run_scenario(&scenario(Mode::Bending)).map_err(|e| e.to_string())?;
    let z = max_abs(&ts.z);
    let theta = max_abs(&ts.theta);
    let anti = ts
        .x_l
        .iter()
        .zip(&ts.x_r)
        .fold(0.0f64, |m, (l, r)| m.max((l + r).abs()));
    ensure(
        z <= 1e-9 && theta > 0.0 && anti <= 1e-9 && ts.t.last() == Some(&20.0),
        format!("max|z| = {z:.2e} m, max|theta| = {theta:.4e} rad, max|xR + xL| = {anti:.2e} m"),
    )
}

/// Mean period from linearly interpolated zero crossings after `t0`.
fn crossing_period(t: &[f64], y: &[f64], t0: f64) -> Option<f64> {
    let mut crossings = Vec::new();
    for i in 1..t.len() {
        if t[i - 1] < t0 {
            continue;
        }
        let (a, b) = (y[i - 1], y[i]);
        if a != 0.0 && a.signum() != b.signum() {
            crossings.push(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings.last()? - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

fn extension_mode() -> Outcome {
    let ts = run_scenario(&scenario(Mode::Extension)).map_err(|e| e.to_string())?;
    let theta = max_abs(&ts.theta);
    let tau = max_abs(&ts.tau);
    let period = crossing_period(&ts.t, &ts.z, 10.0).ok_or("fewer than two zero crossings")?;
    let target = 2.0 * std::f64::consts::PI;
    ensure(
        theta <= 1e-9 && tau <= 1e-9 && (period - target).abs() <= 0.02 * target,
        format!("max|theta| = {theta:.2e} rad, max|tau| = {tau:.2e} N·m, z period {period:.4} s"),
    )
}

fn passivity() -> Outcome {
    let params = PacketParams::default();
    let options = SolverOptions {
        method: Method::Rk4,
        dt: 1e-4,
        t_end: 2.0,
        record_stride: 1,
    };
    let traj = integrate(
        &packet_model(&params),
        &[0.05, 0.0, 500.0],
        |_, _| vec![0.0],
        &options,
    )
    .map_err(|e| e.to_string())?;
    let energy: Vec<f64> = traj
        .states
        .iter()
        .map(|s| PacketState::new(s[0], s[1], s[2]).stored_energy(&params))
        .collect();
    let rise = energy
        .windows(2)
        .fold(f64::NEG_INFINITY, |m, w| m.max(w[1] - w[0]));
    ensure(
        rise <= 1e-9,
        format!(
            "largest per-step change {rise:.2e} J over {} steps, E: {:.4e} -> {:.4e} J",
            energy.len() - 1,
            energy[0],
            energy.last().unwrap()
        ),
    )
}

fn determinism_and_formats() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("empty.cfg");
    fs::write(&config, "").map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in 0..2 {
        let s = load_config(&config).map_err(|e| e.to_string())?;
        if s != Scenario::default() {
            return Err("empty config differs from the defaults".into());
        }
        let path = dir.path().join(format!("run{run}.csv"));
        write_csv(&run_scenario(&s).map_err(|e| e.to_string())?, &path)
            .map_err(|e| e.to_string())?;
        files.push(fs::read(&path).map_err(|e| e.to_string())?);
    }
    let s = load_config(&config).map_err(|e| e.to_string())?;
    let p = &s.packet;
    let c = &s.control;
    let table = [
        ("m", p.mass, 0.015),
        ("rb", p.damping, 0.4),
        ("k", p.stiffness, 350.0),
        ("cd", p.discharge_coefficient, 0.8),
        ("d_orifice", p.orifice_diameter, 0.008),
        ("area", p.area, 0.0096),
        ("mu", s.mu, 2.5),
        ("rho", p.air_density, 1.225),
        ("r_gas", p.gas_constant, 8.31451),
        ("temperature", p.temperature, 300.0),
        ("kp", c.kp, 40.0),
        ("kd", c.kd, 10.0),
        ("omega", c.omega, 1.0),
        ("amplitude", c.amplitude, 0.3),
    ];
    if let Some((name, got, want)) = table.iter().find(|(_, got, want)| got != want) {
        return Err(format!("default {name} = {got}, expected {want}"));
    }
    let text = String::from_utf8(files[0].clone()).map_err(|e| e.to_string())?;
    let header = text.lines().next().unwrap_or_default();
    ensure(
        files[0] == files[1]
            && header == "t,x_L,v_L,P2_L,P1_L,x_R,v_R,P2_R,P1_R,z,theta,tau"
            && !text.contains('\r'),
        format!(
            "{} bytes, {} lines, identical = {}, header `{header}`, {} defaults checked",
            files[0].len(),
            text.lines().count(),
            files[0] == files[1],
            table.len()
        ),
    )
}

fn causality_errors() -> Outcome {
    let mut g = BondGraph::new();
    let c1 = g
        .add_element(ElementKind::C(1.0))
        .map_err(|e| e.to_string())?;
    let j = g.add_element(ElementKind::J0).map_err(|e| e.to_string())?;
    let c2 = g
        .add_element(ElementKind::C(2.0))
        .map_err(|e| e.to_string())?;
    g.bond(c1, j).map_err(|e| e.to_string())?;
    g.bond(j, c2).map_err(|e| e.to_string())?;
    let two_c = assign_causality(&g).err();

    let mut g = BondGraph::new();
    let s1 = g
        .add_element(ElementKind::Se(1.0))
        .map_err(|e| e.to_string())?;
    let j = g.add_element(ElementKind::J0).map_err(|e| e.to_string())?;
    let s2 = g
        .add_element(ElementKind::Se(2.0))
        .map_err(|e| e.to_string())?;
    g.bond(s1, j).map_err(|e| e.to_string())?;
    g.bond(s2, j).map_err(|e| e.to_string())?;
    let two_se = assign_causality(&g).err();

    ensure(
        matches!(two_c, Some(CausalityError::DerivativeCausality(_)))
            && matches!(two_se, Some(CausalityError::CausalConflict(_))),
        format!("two C on 0: {two_c:?}; two SE on 0: {two_se:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("derivation oracle", derivation_oracle),
        ("constitutive values", constitutive_values),
        ("step response", step_response),
        ("integrator order", integrator_order),
        ("bending mode", bending_mode),
        ("extension mode", extension_mode),
        ("passivity", passivity),
        ("determinism and formats", determinism_and_formats),
        ("causality errors", causality_errors),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", n + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}. {name}: {detail}", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
