//! Acceptance gate: one test per contract criterion, each printing a single
//! PASS/FAIL line (visible with `-- --nocapture`). Tolerances are pinned
//! here and nowhere looser; a red test means the contract is broken.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ztkin::chain::{
    end_effector_jacobian, forward_kinematics, jacobian_partials, weighted_jacobian, RobotConfig,
    RobotModel,
};
use ztkin::experiment::{
    build_trajectory, csv_body, run_comparison, summarize, ActionSet, OptimizeMode, RunParams,
    Summary, TrajectoryParams,
};
use ztkin::geometry::{RigidTransform, Twist, Wrench};
use ztkin::mechanism::{
    actuator_to_tilt_azimuth, module_jacobians, module_transform, tilt_azimuth_to_actuator,
    ActuatorAngles, ModuleParams,
};
use ztkin::metrics::{dexterity, dexterity_gradient, rtr, rtr_gradient};
use ztkin::tpik::{
    solve_levels, Action, ControlObjective, LevelEval, ObjectiveKind, SolverParams, StepContext,
    Task, TaskKind, TpikSolver,
};

fn report(name: &str, ok: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

/// Central-difference geometric Jacobian of a pose map, linear rows first,
/// angular rows from the skew part of dR R^T. Independent of the library's
/// analytic chain rule.
fn fd_pose_jacobian(f: &dyn Fn(&[f64]) -> RigidTransform, q: &[f64], h: f64) -> DMatrix<f64> {
    let n = q.len();
    let r0t = f(q).rotation.transpose();
    let mut j = DMatrix::zeros(6, n);
    let mut w = q.to_vec();
    for i in 0..n {
        let q0 = w[i];
        w[i] = q0 + h;
        let tp = f(&w);
        w[i] = q0 - h;
        let tm = f(&w);
        w[i] = q0;
        let dv = (tp.translation - tm.translation) / (2.0 * h);
        let s: Matrix3<f64> = (tp.rotation - tm.rotation) * r0t / (2.0 * h);
        let wv = 0.5
            * Vector3::new(
                s[(2, 1)] - s[(1, 2)],
                s[(0, 2)] - s[(2, 0)],
                s[(1, 0)] - s[(0, 1)],
            );
        for r in 0..3 {
            j[(r, i)] = dv[r];
            j[(r + 3, i)] = wv[r];
        }
    }
    j
}

fn rel_err(analytic: &DMatrix<f64>, fd: &DMatrix<f64>) -> f64 {
    (analytic - fd).norm() / fd.norm().max(1e-9)
}

fn bent_config(model: &RobotModel, rng: &mut ChaCha8Rng, spread: f64) -> RobotConfig {
    let mut config = RobotConfig::straight(model);
    for i in 0..model.dof() {
        config.q[i] += rng.random_range(-spread..spread);
    }
    config
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn geometry_closure() {
    let model = RobotModel::rp120();
    let pose = forward_kinematics(&model, &RobotConfig::straight(&model)).unwrap();
    let height_err = (pose.translation.z - 1.9).abs();
    let axis_err = pose.translation.fixed_rows::<2>(0).norm();

    // Grid sweep of one module; the tilt limit must be hit to within the
    // sweep resolution.
    let p = ModuleParams::default();
    let grid = 200usize;
    let step = std::f64::consts::TAU / grid as f64;
    let mut max_tilt: f64 = 0.0;
    for i in 0..=grid {
        for k in 0..=grid {
            let q = ActuatorAngles::new(
                -std::f64::consts::PI + i as f64 * step,
                -std::f64::consts::PI + k as f64 * step,
            );
            max_tilt = max_tilt.max(actuator_to_tilt_azimuth(&q, &p).tilt.abs());
        }
    }
    let tilt_err = (max_tilt - std::f64::consts::FRAC_PI_6).abs();

    let ok = height_err < 1e-12 && axis_err < 1e-12 && tilt_err < step;
    report(
        "geometry closure",
        ok,
        &format!(
            "straight height err {height_err:.2e} m, module max-tilt err {tilt_err:.2e} rad \
             (grid step {step:.2e})"
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn model_round_trips() {
    let p = ModuleParams::default();

    // Forward -> chart -> both inverse branches -> forward, over a 50 x 50
    // actuator grid; compare poses.
    let grid = 50usize;
    let mut worst_pose = 0.0f64;
    for i in 0..grid {
        for k in 0..grid {
            let q = ActuatorAngles::new(
                -std::f64::consts::PI + (i as f64 + 0.5) / grid as f64 * std::f64::consts::TAU,
                -std::f64::consts::PI + (k as f64 + 0.5) / grid as f64 * std::f64::consts::TAU,
            );
            let want = module_transform(&q, &p);
            let bend = actuator_to_tilt_azimuth(&q, &p);
            let (first, second) = tilt_azimuth_to_actuator(&bend, &p).unwrap();
            for sol in [first, second] {
                let got = module_transform(&sol, &p);
                let err = (got.translation - want.translation).norm()
                    + (got.rotation - want.rotation).norm();
                worst_pose = worst_pose.max(err);
            }
        }
    }

    // Zero torsion: the rotation axis never has a vertical component.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_axis_z = 0.0f64;
    for _ in 0..1000 {
        let q = ActuatorAngles::new(
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let r = module_transform(&q, &p).rotation;
        let tilt = actuator_to_tilt_azimuth(&q, &p).tilt;
        // Unit axis from the skew part where the angle allows it; tiny tilts
        // have an ill-defined axis and a vanishing skew part instead.
        let skew_z = 0.5 * (r[(1, 0)] - r[(0, 1)]);
        let axis_z = if tilt.abs() > 1e-6 {
            skew_z / tilt.sin()
        } else {
            skew_z
        };
        worst_axis_z = worst_axis_z.max(axis_z.abs());
    }

    let ok = worst_pose < 1e-9 && worst_axis_z < 1e-12;
    report(
        "model round-trips",
        ok,
        &format!(
            "worst grid round-trip pose err {worst_pose:.2e}, worst torsion axis z \
             {worst_axis_z:.2e}"
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn differential_models_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n_cfg = 200usize;

    // Module Jacobian, actuator layer.
    let p = ModuleParams::default();
    let mut worst_module = 0.0f64;
    for _ in 0..n_cfg {
        let q = [
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        ];
        let analytic = module_jacobians(&ActuatorAngles::new(q[0], q[1]), &p).actuator;
        let analytic = DMatrix::from_column_slice(6, 2, analytic.as_slice());
        let fd = fd_pose_jacobian(
            &|v: &[f64]| module_transform(&ActuatorAngles::new(v[0], v[1]), &p),
            &q,
            1e-6,
        );
        worst_module = worst_module.max(rel_err(&analytic, &fd));
    }

    // Chain Jacobian at the tool point, full arm.
    let model = RobotModel::rp120();
    let mut worst_chain = 0.0f64;
    for _ in 0..n_cfg {
        let config = bent_config(&model, &mut rng, 0.9);
        let analytic = end_effector_jacobian(&model, &config).unwrap();
        let fd = fd_pose_jacobian(
            &|v: &[f64]| forward_kinematics(&model, &RobotConfig::from_slice(v)).unwrap(),
            config.q.as_slice(),
            1e-6,
        );
        worst_chain = worst_chain.max(rel_err(&analytic, &fd));
    }

    // Dexterity gradient against direct scalar differences.
    let h = 1e-5;
    let mut worst_dex = 0.0f64;
    for _ in 0..n_cfg {
        let config = bent_config(&model, &mut rng, 0.9);
        let jw = weighted_jacobian(&model, &config).unwrap();
        let partials = jacobian_partials(&model, &config, 1e-6).unwrap();
        let analytic = dexterity_gradient(&jw, &partials).unwrap();
        let mut fd = DVector::zeros(model.dof());
        let mut w = config.clone();
        for i in 0..model.dof() {
            let q0 = w.q[i];
            w.q[i] = q0 + h;
            let ep = dexterity(&weighted_jacobian(&model, &w).unwrap())
                .unwrap()
                .eta1;
            w.q[i] = q0 - h;
            let em = dexterity(&weighted_jacobian(&model, &w).unwrap())
                .unwrap()
                .eta1;
            w.q[i] = q0;
            fd[i] = (ep - em) / (2.0 * h);
        }
        worst_dex = worst_dex.max((&analytic - &fd).norm() / fd.norm().max(1e-9));
    }

    // Transmission-ratio gradient, random loads, same oracle pattern.
    let mut worst_rtr = 0.0f64;
    let mut done = 0usize;
    while done < n_cfg {
        let config = bent_config(&model, &mut rng, 0.9);
        let twist = Twist {
            linear: Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ),
            angular: Vector3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ),
        };
        let wrench = Wrench {
            force: Vector3::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
            ),
            moment: Vector3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ),
        };
        let jw = weighted_jacobian(&model, &config).unwrap();
        let partials = jacobian_partials(&model, &config, 1e-6).unwrap();
        let l = model.characteristic_length;
        let Ok(analytic) = rtr_gradient(&jw, &partials, &twist, &wrench, l) else {
            continue; // degenerate load draw; try another
        };
        let mut fd = DVector::zeros(model.dof());
        let mut w = config.clone();
        let mut degenerate = false;
        for i in 0..model.dof() {
            let q0 = w.q[i];
            w.q[i] = q0 + h;
            let ep = rtr(&weighted_jacobian(&model, &w).unwrap(), &twist, &wrench, l);
            w.q[i] = q0 - h;
            let em = rtr(&weighted_jacobian(&model, &w).unwrap(), &twist, &wrench, l);
            w.q[i] = q0;
            match (ep, em) {
                (Ok(ep), Ok(em)) => fd[i] = (ep - em) / (2.0 * h),
                _ => {
                    degenerate = true;
                    break;
                }
            }
        }
        if degenerate {
            continue;
        }
        worst_rtr = worst_rtr.max((&analytic - &fd).norm() / fd.norm().max(1e-9));
        done += 1;
    }

    let ok = worst_module < 1e-5 && worst_chain < 1e-5 && worst_dex < 1e-4 && worst_rtr < 1e-3;
    report(
        "differential models vs finite differences",
        ok,
        &format!(
            "module {worst_module:.2e} (tol 1e-5), chain {worst_chain:.2e} (tol 1e-5), \
             dexterity grad {worst_dex:.2e} (tol 1e-4), transmission grad {worst_rtr:.2e} \
             (tol 1e-3), {n_cfg} configs each"
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn priority_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = SolverParams::default();
    let mut worst_drift = 0.0f64;

    // 50 planar 3R instances: level 1 = in-plane position, level 2 = pitch.
    let planar = RobotModel::planar_arm(3, 0.4);
    for _ in 0..50 {
        let config = bent_config(&planar, &mut rng, 1.2);
        let j = end_effector_jacobian(&planar, &config).unwrap();
        let j1 = DMatrix::from_fn(2, 3, |r, c| j[([0, 2][r], c)]);
        let j2 = DMatrix::from_fn(1, 3, |_, c| j[(4, c)]);
        let x1 = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let x2 = DVector::from_fn(1, |_, _| rng.random_range(-1.0..1.0));

        let alone =
            solve_levels(&[LevelEval::new("p", j1.clone(), x1.clone())], 3, &params).unwrap();
        let both = solve_levels(
            &[LevelEval::new("p", j1, x1), LevelEval::new("o", j2, x2)],
            3,
            &params,
        )
        .unwrap();
        worst_drift = worst_drift.max((alone.level_residuals[0] - both.level_residuals[0]).abs());
    }

    // 50 full-arm instances: level 1 = tool pose rows, level 2 = two random
    // gradient-like rows.
    let model = RobotModel::rp120();
    let n = model.dof();
    for _ in 0..50 {
        let config = bent_config(&model, &mut rng, 0.9);
        let j1 = end_effector_jacobian(&model, &config).unwrap();
        let x1 = DVector::from_fn(6, |_, _| rng.random_range(-0.5..0.5));
        let j2 = DMatrix::from_fn(2, n, |_, _| rng.random_range(-1.0..1.0));
        let x2 = DVector::from_fn(2, |_, _| rng.random_range(-0.1..0.1));

        let alone = solve_levels(
            &[LevelEval::new("pose", j1.clone(), x1.clone())],
            n,
            &params,
        )
        .unwrap();
        let both = solve_levels(
            &[
                LevelEval::new("pose", j1, x1),
                LevelEval::new("extra", j2, x2),
            ],
            n,
            &params,
        )
        .unwrap();
        worst_drift = worst_drift.max((alone.level_residuals[0] - both.level_residuals[0]).abs());
    }

    // Inactive inequality tasks must be exact no-ops on the solution.
    let solver = TpikSolver::default();
    let mut worst_inactive = 0.0f64;
    for _ in 0..100 {
        let config = bent_config(&model, &mut rng, 0.9);
        let mut target = forward_kinematics(&model, &config).unwrap();
        target.translation += Vector3::new(
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
        );
        let ctx = StepContext::hold(target, Twist::zero(), Wrench::zero());

        let pose_only = Action::new(
            "pose",
            vec![Task::new(
                "pose",
                1,
                TaskKind::Pose,
                ControlObjective::equality(0.0, 1.0),
            )],
        );
        let far_range = ControlObjective::new(
            ObjectiveKind::Range {
                min: -20.0,
                max: 20.0,
            },
            1.0,
            0.0,
            0.5,
        )
        .unwrap();
        let with_sleeper = Action::new(
            "pose+sleeper",
            vec![
                Task::new(
                    "pose",
                    1,
                    TaskKind::Pose,
                    ControlObjective::equality(0.0, 1.0),
                ),
                Task::new("sleeper", 2, TaskKind::JointValue { index: 5 }, far_range),
            ],
        );

        let a = solver.solve(&pose_only, &model, &config, &ctx).unwrap();
        let b = solver.solve(&with_sleeper, &model, &config, &ctx).unwrap();
        worst_inactive = worst_inactive.max((a.q_dot - b.q_dot).norm());
    }

    let ok = worst_drift < 1e-9 && worst_inactive < 1e-12;
    report(
        "priority soundness",
        ok,
        &format!(
            "worst level-1 residual drift {worst_drift:.2e} over 100 instances (tol 1e-9), \
             worst inactive-task influence {worst_inactive:.2e} (tol 1e-12)"
        ),
    );
    assert!(ok);
}

// ------------------------------------------------------- criteria 5, 6 and 7

struct DeskFixture {
    summary: Summary,
    elapsed_s: f64,
}

static DESK: OnceLock<DeskFixture> = OnceLock::new();

/// Desk-scale paired comparison: trajectories 1 and 2, 20 repetitions each,
/// reference parameters throughout. Shared by the statistics, asymmetry and
/// timing criteria.
fn desk_fixture() -> &'static DeskFixture {
    DESK.get_or_init(|| {
        let model = RobotModel::rp120();
        let traj = TrajectoryParams::desk();
        let specs = vec![
            build_trajectory(1, &traj).unwrap(),
            build_trajectory(2, &traj).unwrap(),
        ];
        let params = RunParams::default();
        let actions = ActionSet::standard(&Default::default());
        let start = Instant::now();
        let outcome =
            run_comparison(&model, &specs, &actions, &params, OptimizeMode::Both).unwrap();
        let elapsed_s = start.elapsed().as_secs_f64();
        let summary = summarize(&outcome).unwrap();
        DeskFixture { summary, elapsed_s }
    })
}

#[test]
fn paired_comparison_statistics() {
    let fx = desk_fixture();
    let t1 = fx
        .summary
        .trajectories
        .iter()
        .find(|t| t.trajectory == 1)
        .expect("trajectory 1 summarized");

    let start = t1
        .improvement_start_eta
        .as_ref()
        .expect("paired start stats");
    let mean = t1.improvement_mean_eta.as_ref().expect("paired mean stats");
    let m1 = t1
        .improvement_mean_eta1
        .as_ref()
        .expect("paired eta1 stats");
    let m2 = t1
        .improvement_mean_eta2
        .as_ref()
        .expect("paired eta2 stats");

    let ok_pairs = start.pairs == 20;
    let ok_a = start.percent.mean > 0.0 && start.percent.median > 10.0;
    let ok_b = mean.percent.mean > 0.0;
    let ok_c = m1.percent.mean > 0.0 && m2.percent.mean > 0.0;
    let ok_d = mean.negative_fraction <= 0.20;
    let ok_time = fx.elapsed_s < 1800.0;
    let ok = ok_pairs && ok_a && ok_b && ok_c && ok_d && ok_time;
    report(
        "paired comparison statistics",
        ok,
        &format!(
            "{} pairs; start eta mean {:+.1}% median {:+.1}% (need >0, >+10); contour eta mean \
             {:+.1}% (need >0); eta1 {:+.1}% eta2 {:+.1}% (need >0); negative fraction {:.0}% \
             (cap 20%); comparison wall time {:.0} s (cap 1800)",
            start.pairs,
            start.percent.mean,
            start.percent.median,
            mean.percent.mean,
            m1.percent.mean,
            m2.percent.mean,
            100.0 * mean.negative_fraction,
            fx.elapsed_s
        ),
    );
    assert!(ok);
}

#[test]
fn sectoral_transmission_asymmetry() {
    let fx = desk_fixture();
    let mut ok = true;
    let mut parts = Vec::new();
    for id in [1u8, 2u8] {
        let t = fx
            .summary
            .trajectories
            .iter()
            .find(|t| t.trajectory == id)
            .expect("trajectory summarized");
        let raw = t.raw.as_ref().expect("raw arm present");
        let s = &raw.sector_rtr;
        let along_x = 0.5 * (s.b + s.d);
        let transverse = 0.5 * (s.a + s.c);
        ok &= along_x > transverse;
        parts.push(format!(
            "traj {id}: along-x {:.4} vs transverse {:.4} ({:+.0}%)",
            along_x,
            transverse,
            100.0 * (along_x / transverse - 1.0)
        ));
    }
    report("sectoral transmission asymmetry", ok, &parts.join("; "));
    assert!(ok);
}

#[test]
fn solver_step_time_envelope() {
    let fx = desk_fixture();
    let json = serde_json::to_value(&fx.summary).unwrap();
    let reported = json["mean_step_us"]
        .as_f64()
        .expect("mean_step_us in JSON summary");
    let ok = reported > 0.0 && reported < 5000.0;
    report(
        "solver step time envelope",
        ok,
        &format!("mean step {reported:.0} us over all solve calls (cap 5000 us)"),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn deterministic_outputs() {
    let model = RobotModel::rp120();
    let specs = vec![build_trajectory(1, &TrajectoryParams::desk()).unwrap()];
    let params = RunParams {
        repetitions: 2,
        ..RunParams::default()
    };
    let actions = ActionSet::standard(&Default::default());

    let run = || {
        run_comparison(&model, &specs, &actions, &params, OptimizeMode::Both)
            .unwrap()
            .records
            .iter()
            .map(csv_body)
            .collect::<Vec<_>>()
    };
    let first = run();
    let second = run();

    let ok = !first.is_empty() && first == second;
    report(
        "deterministic outputs",
        ok,
        &format!(
            "{} CSV bodies byte-identical across two identical runs",
            first.len()
        ),
    );
    assert!(ok);
}
