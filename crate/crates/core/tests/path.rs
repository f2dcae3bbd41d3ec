use stressnav::features::path_correlation_series;
use stressnav::{
    reverse_measurements, simulate_path, Direction, PathLabel, PathOptions, PathRecord, ScenarioSpec, TerminalReason,
    VesselSpec,
};

fn short_straight(y_c: f64, dt_ms: f64) -> PathRecord {
    let spec = ScenarioSpec::new(VesselSpec::straight(7.0, 15.0), 900.0, y_c, 0.4);
    let options = PathOptions {
        dt_ms,
        ..PathOptions::default()
    };
    simulate_path(&spec, &options).unwrap()
}

#[test]
fn centerline_robot_runs_straight_to_the_outlet() {
    let path = short_straight(0.0, 0.5);
    assert_eq!(path.terminal_reason, TerminalReason::ReachedOutlet);
    assert_eq!(path.label, PathLabel::Straight);
    for s in &path.samples {
        assert!(s.robot.center.y.abs() < 1e-6);
        assert!(s.motion.angular_velocity.abs() < 1e-4);
        assert!((s.robot.orientation - 0.4).abs() < 1e-6);
        assert!(!s.contact);
    }
    let last = path.samples.last().unwrap();
    let speed = path.samples[0].motion.speed();
    assert!(speed > 0.9 * 900.0 && speed < 900.0);
    // Stops at the first sample within 8 µm of the outlet at x = 30.
    let per_sample = speed * path.sample_ms * 1e-3;
    let x = last.robot.center.x;
    assert!(x >= 22.0 && x < 22.0 + per_sample, "stopped at {x}");
    let x0 = path.samples[0].robot.center.x;
    assert!((path.length() - (x - x0)).abs() < 1e-9);
}

#[test]
fn halving_the_step_changes_little() {
    let coarse = short_straight(1.5, 0.5);
    let fine = short_straight(1.5, 0.25);
    let n = coarse.samples.len().min(fine.samples.len());
    assert!(n > 10);
    let mut worst: f64 = 0.0;
    for (a, b) in coarse.samples[..n].iter().zip(&fine.samples[..n]) {
        assert_eq!(a.t, b.t);
        worst = worst.max((a.robot.center - b.robot.center).norm());
    }
    // Second-order stepping: the difference is a small fraction of a step.
    let step = 0.5e-3 * coarse.samples[0].motion.speed();
    assert!(worst < 0.01 * step, "worst drift {worst} µm");
}

#[test]
fn files_round_trip_and_reverse() {
    let path = short_straight(-1.0, 0.5);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.path");
    path.save(&file).unwrap();
    let back = PathRecord::load(&file).unwrap();
    assert_eq!(back.samples.len(), path.samples.len());
    for (a, b) in back.samples.iter().zip(&path.samples) {
        assert_eq!(a.t, b.t);
        assert_eq!(a.robot, b.robot);
        assert_eq!(a.motion, b.motion);
        assert_eq!(a.pattern, b.pattern);
    }

    let rev = reverse_measurements(&path);
    assert_eq!(rev.direction(), Direction::Reverse);
    let fwd = path_correlation_series(&path, 5.0).unwrap();
    let bwd = path_correlation_series(&rev, 5.0).unwrap();
    assert_eq!(fwd.len(), bwd.len());
    for (f, b) in fwd.iter().zip(bwd.iter().rev()) {
        assert!((f.c - b.c).abs() < 1e-10);
    }
}
