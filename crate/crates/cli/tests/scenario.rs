use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;

use pneumabond_cli::plot::PLOT_FILES;
use pneumabond_cli::{
    load_config, parse_config, render_plots, run_scenario, write_csv, Scenario, TimeSeries,
};
use pneumabond_core::{C2Mode, Method, Mode};

fn short(mode: Mode, t_end: f64) -> Scenario {
    let mut s = Scenario::default();
    s.control.mode = mode;
    s.solver.t_end = t_end;
    s
}

#[test]
fn empty_file_loads_table_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cfg");
    fs::write(&path, "").unwrap();
    let s = load_config(&path).unwrap();
    let p = &s.packet;
    assert_eq!(
        [
            p.mass,
            p.damping,
            p.stiffness,
            p.discharge_coefficient,
            p.orifice_diameter,
            p.area
        ],
        [0.015, 0.4, 350.0, 0.8, 0.008, 0.0096]
    );
    assert_eq!(s.mu, 2.5);
    assert_eq!(
        [p.air_density, p.gas_constant, p.temperature],
        [1.225, 8.31451, 300.0]
    );
    let c = &s.control;
    assert_eq!([c.kp, c.kd, c.omega, c.amplitude], [40.0, 10.0, 1.0, 0.3]);
    assert_eq!(c.mode, Mode::Bending);
    assert_eq!(s.solver.t_end, 20.0);
    assert_eq!(s.solver.dt, 1e-4);
    assert_eq!(s.solver.record_stride, 100);
    assert_eq!(s.solver.method, Method::Rk4);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_config("/nonexistent/scenario.cfg").unwrap_err();
    assert!(matches!(err, pneumabond_cli::Error::Io { .. }));
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-6f64..1e6, Just(0.1 + 0.2), Just(1.0 / 3.0)]
}

prop_compose! {
    fn scenario()(
        physical in proptest::collection::vec(positive(), 13),
        gains in proptest::collection::vec(0.0f64..1e3, 3),
        t_end in 0.0f64..100.0,
        stride in 1usize..10_000,
        flags in any::<(bool, bool, bool, bool)>(),
        limit in proptest::option::of(positive()),
        csv in "[a-z][a-z0-9_/ ]{0,12}\\.csv",
        plots in proptest::option::of("[a-z][a-z0-9_]{0,8}"),
    ) -> Scenario {
        let mut s = Scenario::default();
        let p = &mut s.packet;
        p.mass = physical[0];
        p.damping = physical[1];
        p.stiffness = physical[2];
        p.discharge_coefficient = physical[3];
        p.orifice_diameter = physical[4];
        p.area = physical[5];
        p.air_density = physical[6];
        p.gas_constant = physical[7];
        p.temperature = physical[8];
        p.column_length = physical[9];
        p.c2_mode = if flags.0 { C2Mode::StateDependent } else { C2Mode::Constant };
        p.volume_coupled = flags.1;
        s.mu = physical[10];
        s.control.omega = physical[11];
        s.solver.dt = physical[12];
        s.control.kp = gains[0];
        s.control.kd = gains[1];
        s.control.amplitude = gains[2];
        s.control.mode = if flags.2 { Mode::Extension } else { Mode::Bending };
        s.solver.method = if flags.3 { Method::Euler } else { Method::Rk4 };
        s.solver.t_end = t_end;
        s.solver.record_stride = stride;
        s.pressure_limit = limit;
        s.csv_path = PathBuf::from(csv);
        s.plot_dir = plots.map(PathBuf::from);
        s
    }
}

proptest! {
    #[test]
    fn config_round_trips(s in scenario()) {
        let text = s.to_config_string();
        prop_assert_eq!(parse_config(&text).unwrap(), s);
    }
}

#[test]
fn identical_scenarios_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = short(Mode::Bending, 2.0);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_csv(&run_scenario(&s).unwrap(), &a).unwrap();
    write_csv(&run_scenario(&s).unwrap(), &b).unwrap();
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn csv_rows_have_twelve_finite_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let mut s = short(Mode::Extension, 1.0);
    s.packet.c2_mode = C2Mode::StateDependent;
    s.packet.volume_coupled = true;
    let ts = run_scenario(&s).unwrap();
    write_csv(&ts, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x_L,v_L,P2_L,P1_L,x_R,v_R,P2_R,P1_R,z,theta,tau"
    );
    let mut rows = 0;
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 12);
        assert!(fields.iter().all(|v| v.is_finite()));
        rows += 1;
    }
    assert_eq!(rows, ts.len());
    assert_eq!(rows, 101);
}

#[test]
fn bending_run_renders_every_chart() {
    let dir = tempfile::tempdir().unwrap();
    let ts = run_scenario(&short(Mode::Bending, 1.0)).unwrap();
    render_plots(&ts, dir.path().join("nested/plots")).unwrap();
    for name in PLOT_FILES {
        let svg = fs::read_to_string(dir.path().join("nested/plots").join(name)).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<path"), "{name}");
        assert!(svg.contains("t (s)"));
    }
}

#[test]
fn header_only_series_renders_without_data() {
    let dir = tempfile::tempdir().unwrap();
    render_plots(&TimeSeries::default(), dir.path()).unwrap();
    for name in PLOT_FILES {
        let svg = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<path"), "{name}");
    }
}

#[test]
fn extension_rotation_chart_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let ts = run_scenario(&short(Mode::Extension, 1.0)).unwrap();
    assert!(ts.theta.iter().all(|v| *v == 0.0));
    render_plots(&ts, dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join("rotation.svg")).unwrap();
    let d = svg
        .lines()
        .find_map(|l| l.strip_prefix("<path d=\""))
        .unwrap();
    let d = &d[..d.find('"').unwrap()];
    let ys: Vec<&str> = d
        .split(" L")
        .map(|p| p.split(' ').nth(1).unwrap())
        .collect();
    assert!(ys.windows(2).all(|w| w[0] == w[1]));
}
