//! Acceptance gate: nine criteria covering the exponent algebra, the
//! thresholds, the a-priori mass bounds, positivity, discretization order,
//! the linear solver, the antiderivative sandwich, the qualitative
//! bounded/blow-up dichotomy, and determinism. Each test prints one
//! PASS line (visible with --nocapture); a failure names its criterion.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chemolab::grid::{integrate, Field, Grid};
use chemolab::harness::{convergence_table, run_simulation, RawConfig, RunConfig};
use chemolab::model::{ModelParams, SourceKind, Tau};
use chemolab::rational::{rat, rat_int, rat_to_f64, Rat};
use chemolab::regimes::{
    exponents, find_k_where, gradient_delta_production_threshold, mass_bound_gradient,
    mass_bound_nonlocal, nonlocal_delta_threshold, ExponentFlags, RegimeParams,
};
use chemolab::solver::{
    classify_run, elliptic_solve_v, fm2_closed_form, fm2_quadrature, fm2_upper_bound,
    parabolic_step_v, run, RunClassification, RunOptions, RunRecord, State, StepControl,
    Termination,
};

fn budget(criterion: &str, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "criterion {criterion}: FAIL - runtime {elapsed:.2?} over the {limit:?} budget"
    );
}

/// Random rational in [lo, hi] with denominator up to `max_den`.
fn rat_in(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rat {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range(lo * den..=hi * den);
    rat(num, den)
}

fn regime(n: u32, m1: Rat, m2: Rat, l: Rat, alpha: Rat, delta: Rat) -> RegimeParams {
    RegimeParams {
        n,
        m1,
        m2,
        l,
        alpha,
        beta: rat_int(2),
        delta,
        tau: Tau::Elliptic,
        source: SourceKind::NonlocalDamping,
        chi: 1.0,
        a: 1.0,
        b: 1.0,
        c: 1.0,
        production_scale: 1.0,
        measure: 1.0,
    }
}

// 1. The two delta biconditionals hold exactly at every admissible k, and
//    theta1 flattens to 1 as k grows.
#[test]
fn criterion_1_exponent_algebra() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0u32;
    while checked < 200 {
        let n = rng.gen_range(1..=3u32);
        let p = regime(
            n,
            rat_in(&mut rng, -1, 3, 8),
            rat_in(&mut rng, -1, 3, 8),
            {
                let den = rng.gen_range(1..=8);
                rat(rng.gen_range(1..=2 * den), den)
            },
            rat_in(&mut rng, 1, 3, 8),
            rat_in(&mut rng, 1, 3, 8),
        );
        let Some(k_found) = find_k_where(&p, 64, ExponentFlags::unconditional) else {
            continue;
        };
        let k = rat_int(k_found as i64) + rat_in(&mut rng, 0, 50, 8);
        let e = exponents(&k, &p).expect("exponents above k_found");

        let np1 = rat_int(n as i64 + 1);
        let growth_cut = rat_int(n as i64) * &p.alpha / &np1;
        let production_cut = rat_int(n as i64) * (&p.m2 + &p.l) / &np1;
        assert_eq!(
            e.sigma2_theta2_delta < rat_int(1),
            p.delta > growth_cut,
            "criterion 1: FAIL - sigma2 theta2/delta biconditional broke at k = {k}, {p:?}"
        );
        assert_eq!(
            e.sigma3_theta3_delta < rat_int(1),
            p.delta > production_cut,
            "criterion 1: FAIL - sigma3 theta3/delta biconditional broke at k = {k}, {p:?}"
        );

        let far = exponents(&rat_int(1_000_000), &p).expect("exponents at 1e6");
        let drift = rat_to_f64(&(far.theta1 - rat_int(1))).abs();
        assert!(
            drift <= 1e-4,
            "criterion 1: FAIL - theta1(1e6) off by {drift:.2e} for {p:?}"
        );
        checked += 1;
    }
    budget("1", start.elapsed(), Duration::from_secs(1));
    println!(
        "criterion 1 (exponent algebra): PASS - 200 tuples, {:.2?}",
        start.elapsed()
    );
}

// 2. The quoted thresholds at m1 = m2 = l = 1, exactly.
#[test]
fn criterion_2_threshold_regression() {
    let start = Instant::now();
    for n in 1..=4u32 {
        let p = regime(n, rat_int(1), rat_int(1), rat_int(1), rat_int(1), rat_int(2));
        assert_eq!(
            nonlocal_delta_threshold(&p),
            rat(n as i64 + 4, 2),
            "criterion 2: FAIL - nonlocal threshold at n = {n}"
        );
        assert_eq!(
            gradient_delta_production_threshold(&p),
            rat(2 * n as i64, n as i64 + 1),
            "criterion 2: FAIL - gradient production cut at n = {n}"
        );
        assert!(gradient_delta_production_threshold(&p) < rat_int(2));
    }
    let n2 = regime(2, rat_int(1), rat_int(1), rat_int(1), rat_int(1), rat_int(2));
    let n3 = regime(3, rat_int(1), rat_int(1), rat_int(1), rat_int(1), rat_int(2));
    assert_eq!(nonlocal_delta_threshold(&n2), rat_int(3));
    assert_eq!(nonlocal_delta_threshold(&n3), rat(7, 2));
    budget("2", start.elapsed(), Duration::from_secs(1));
    println!(
        "criterion 2 (threshold regression): PASS - {:.2?}",
        start.elapsed()
    );
}

struct RandomizedRun {
    record: RunRecord,
    mass_cap: f64,
}

fn draw_initial(rng: &mut ChaCha8Rng, grid: Grid) -> Field {
    if rng.gen_bool(0.5) {
        Field::constant(grid, rng.gen_range(0.5..2.0))
    } else {
        let background = rng.gen_range(0.2..1.0);
        let amplitude = rng.gen_range(0.0..2.0);
        let width: f64 = rng.gen_range(0.1..0.3);
        Field::from_fn(grid, |x, _| {
            background + amplitude * (-(x - 0.5) * (x - 0.5) / (2.0 * width * width)).exp()
        })
    }
}

fn randomized_run(rng: &mut ChaCha8Rng, source: SourceKind) -> RandomizedRun {
    // half-integer exponents: representative of real configs and exactly
    // representable, so the admissibility checks see clean rationals
    let grid = Grid::line(1.0, 128).expect("grid");
    let m1 = rat(rng.gen_range(1..=2), 2); // {1/2, 1}
    let m2 = rat(rng.gen_range(0..=2), 2); // {0, 1/2, 1}
    let l = rat(rng.gen_range(2..=4), 2); // {1, 3/2, 2}
    let alpha = rat(rng.gen_range(2..=3), 2); // {1, 3/2}
    let (beta, delta) = match source {
        SourceKind::NonlocalDamping => (
            &alpha + rat(rng.gen_range(1..=3), 2), // alpha + [1/2, 3/2]
            rat(rng.gen_range(2..=6), 2),          // [1, 3]
        ),
        SourceKind::GradientDamping => (
            rat(rng.gen_range(2..=5), 2), // [1, 5/2]
            rat(rng.gen_range(2..=4), 2), // [1, 2]
        ),
    };
    let tau = if rng.gen_bool(0.5) { Tau::Elliptic } else { Tau::Parabolic };
    let regime = RegimeParams {
        n: 1,
        m1,
        m2,
        l,
        alpha,
        beta,
        delta,
        tau,
        source,
        chi: rng.gen_range(0.1..1.5),
        a: rng.gen_range(0.5..2.0),
        b: rng.gen_range(0.5..2.0),
        c: rng.gen_range(0.0..1.0),
        production_scale: rng.gen_range(0.5..1.5),
        measure: grid.measure(),
    };
    let params = ModelParams {
        n: regime.n,
        m1: rat_to_f64(&regime.m1),
        m2: rat_to_f64(&regime.m2),
        chi: regime.chi,
        a: regime.a,
        b: regime.b,
        c: regime.c,
        alpha: rat_to_f64(&regime.alpha),
        beta: rat_to_f64(&regime.beta),
        delta: rat_to_f64(&regime.delta),
        tau,
        production_scale: regime.production_scale,
        production_exponent: rat_to_f64(&regime.l),
        source,
        measure: regime.measure,
        sources_enabled: true,
    };
    assert!(
        params.validate().is_empty(),
        "randomized draw violated admissibility: {params:?}"
    );

    let u0 = draw_initial(rng, grid);
    let v0 = elliptic_solve_v(&u0, &params).expect("initial signal");
    let mass0 = integrate(&u0, 1.0).expect("initial mass");
    let mass_cap = match source {
        SourceKind::NonlocalDamping => mass_bound_nonlocal(&regime, mass0).expect("mass bound"),
        SourceKind::GradientDamping => mass_bound_gradient(&regime, mass0).expect("mass bound"),
    };

    let control = StepControl {
        dt_max: 1.0,
        dt_min: 1e-9,
        cfl_safety: 0.45,
        t_end: 5.0,
        blowup_threshold: 1e6,
    };
    let opts = RunOptions {
        sample_interval: 0.25,
        series_k: 2.0,
        fm2_k: Some(2.0),
    };
    let record = run(State { u: u0, v: v0, t: 0.0 }, &params, &control, &opts).expect("run");
    RandomizedRun { record, mass_cap }
}

// 3 and 4. Randomized runs stay under the a-priori mass caps, and the
//    scheme never produces meaningfully negative densities or signals.
#[test]
fn criterion_3_and_4_mass_bounds_and_nonnegativity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for source in [SourceKind::NonlocalDamping, SourceKind::GradientDamping] {
        for trial in 0..20 {
            let RandomizedRun { record, mass_cap } = randomized_run(&mut rng, source);
            assert_eq!(
                record.termination,
                Termination::ReachedTEnd,
                "criterion 3: FAIL - {source:?} trial {trial} ended early: {:?}",
                record.termination
            );
            for row in &record.series {
                assert!(
                    row.mass <= 1.02 * mass_cap,
                    "criterion 3: FAIL - {source:?} trial {trial}: mass {} above 1.02 x {} at t = {}",
                    row.mass,
                    mass_cap,
                    row.t
                );
                assert!(
                    row.min_u >= -1e-14 && row.min_v >= -1e-14,
                    "criterion 4: FAIL - {source:?} trial {trial}: min u {} / min v {} at t = {}",
                    row.min_u,
                    row.min_v,
                    row.t
                );
            }
        }
    }
    budget("3", start.elapsed(), Duration::from_secs(120));
    println!(
        "criterion 3 (mass-bound monitor): PASS - 40 runs, {:.2?}",
        start.elapsed()
    );
    println!("criterion 4 (nonnegativity): PASS - every sample of those runs");
}

const STUDY: &str = "\
[model]
family = nonlocal
n = 1
m1 = 1
m2 = 1
l = 1
alpha = 1
beta = 2
delta = 2
chi = 0
a = 0
b = 0
c = 0
K = 1.0
tau = 0
sources_enabled = false

[grid]
dims = 1
cells = 32
extent = 1.0

[control]
t_end = 1.0

[initial]
kind = uniform
value = 1.0

[convergence]
manufactured = true
levels = 32, 64, 128
t_end = 0.1
";

// 5. Manufactured diffusion solution: second order in space.
#[test]
fn criterion_5_discretization_order() {
    let start = Instant::now();
    let raw = RawConfig::parse(STUDY).expect("parse");
    let cfg = RunConfig::from_raw(&raw, Path::new(".")).expect("build");
    let rows = convergence_table(&cfg).expect("study");
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let order = row.order.expect("order");
        assert!(
            order >= 1.9,
            "criterion 5: FAIL - order {order:.3} at {} cells",
            row.cells
        );
    }
    let last = rows.last().expect("rows");
    assert!(
        last.error <= 1e-3,
        "criterion 5: FAIL - error {:.3e} at {} cells",
        last.error,
        last.cells
    );
    budget("5", start.elapsed(), Duration::from_secs(30));
    println!(
        "criterion 5 (discretization order): PASS - orders {:.3}/{:.3}, err(128) = {:.2e}, {:.2?}",
        rows[1].order.unwrap(),
        rows[2].order.unwrap(),
        last.error,
        start.elapsed()
    );
}

/// Dense Gaussian-elimination solve of (I - L) v = f with the zero-flux
/// five-point (three-point in 1D) stencil, assembled independently of the
/// production operator.
fn dense_signal_solve(u: &Field, params: &ModelParams) -> Vec<f64> {
    let grid = u.grid();
    let (nx, ny) = grid.cells();
    let (hx, hy) = grid.spacing();
    let n = grid.num_cells();
    let mut a = vec![vec![0.0f64; n]; n];
    let mut f = vec![0.0f64; n];
    for j in 0..ny {
        for i in 0..nx {
            let row = j * nx + i;
            a[row][row] += 1.0;
            f[row] = params.production_scale * u.values()[row].powf(params.production_exponent);
            let mut couple = |other: usize, h: f64| {
                a[row][row] += 1.0 / (h * h);
                a[row][other] -= 1.0 / (h * h);
            };
            if i > 0 {
                couple(row - 1, hx);
            }
            if i + 1 < nx {
                couple(row + 1, hx);
            }
            if grid.dims() == 2 {
                if j > 0 {
                    couple(row - nx, hy);
                }
                if j + 1 < ny {
                    couple(row + nx, hy);
                }
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("pivot");
        a.swap(col, pivot);
        f.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            f[row] -= factor * f[col];
        }
    }
    let mut v = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut sum = f[row];
        for k in row + 1..n {
            sum -= a[row][k] * v[k];
        }
        v[row] = sum / a[row][row];
    }
    v
}

// 6. The iterative signal solves agree with a dense direct solve, and the
//    huge-step parabolic update lands on the elliptic balance.
#[test]
fn criterion_6_solver_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let params = ModelParams {
        n: 1,
        m1: 1.0,
        m2: 1.0,
        chi: 1.0,
        a: 1.0,
        b: 1.0,
        c: 0.0,
        alpha: 1.0,
        beta: 2.0,
        delta: 2.0,
        tau: Tau::Elliptic,
        production_scale: 1.3,
        production_exponent: 1.5,
        source: SourceKind::NonlocalDamping,
        measure: 1.0,
        sources_enabled: true,
    };
    let grids = [
        Grid::line(1.0, 16).expect("1d grid"),
        Grid::rect((1.0, 1.0), (8, 8)).expect("2d grid"),
    ];
    for grid in grids {
        let u = Field::from_fn(grid, |_, _| rng.gen_range(0.1..3.0));
        let v = elliptic_solve_v(&u, &params).expect("elliptic");
        let dense = dense_signal_solve(&u, &params);
        let scale = dense.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gap = v
            .values()
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            gap <= 1e-8 * scale,
            "criterion 6: FAIL - iterative vs dense gap {:.2e} on {:?} cells",
            gap / scale,
            grid.cells()
        );

        let stationary = parabolic_step_v(&Field::zeros(grid), &u, 1e6, &params).expect("step");
        let drift = stationary
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            drift <= 1e-4 * scale,
            "criterion 6: FAIL - huge-step parabolic vs elliptic gap {:.2e}",
            drift / scale
        );
    }
    budget("6", start.elapsed(), Duration::from_secs(5));
    println!(
        "criterion 6 (solver oracle equivalence): PASS - {:.2?}",
        start.elapsed()
    );
}

// 7. Quadrature of the taxis antiderivative matches its closed form, and
//    the sandwich inequalities hold.
#[test]
fn criterion_7_antiderivative_quadrature() {
    let start = Instant::now();
    for (k, m2) in [(2.0, 1.0), (3.0, 2.0), (4.0, 0.5)] {
        for u in [0.5, 1.0, 2.0] {
            let numeric = fm2_quadrature(u, k, m2).expect("quadrature");
            let closed = fm2_closed_form(u, k, m2);
            let upper = fm2_upper_bound(u, k, m2);
            assert!(
                (numeric - closed).abs() <= 1e-8 * (1.0 + closed.abs()),
                "criterion 7: FAIL - quadrature {numeric} vs closed form {closed} at (k, m2, u) = ({k}, {m2}, {u})"
            );
            assert!(
                closed >= 0.0 && closed <= upper + 1e-12,
                "criterion 7: FAIL - sandwich broke at (k, m2, u) = ({k}, {m2}, {u}): F = {closed}, cap = {upper}"
            );
        }
    }
    budget("7", start.elapsed(), Duration::from_secs(1));
    println!(
        "criterion 7 (antiderivative quadrature): PASS - 9 cases, {:.2?}",
        start.elapsed()
    );
}

// 8. Strong damping stays bounded; a concentrated aggregation-dominated
//    state is flagged as suspected blow-up.
#[test]
fn criterion_8_qualitative_dichotomy() {
    let start = Instant::now();

    let grid = Grid::rect((1.0, 1.0), (32, 32)).expect("grid");
    let damped = ModelParams {
        n: 2,
        m1: 1.0,
        m2: 1.0,
        chi: 1.0,
        a: 1.0,
        b: 1.0,
        c: 1.0,
        alpha: 1.0,
        beta: 2.0,
        delta: 4.0,
        tau: Tau::Elliptic,
        production_scale: 1.0,
        production_exponent: 1.0,
        source: SourceKind::NonlocalDamping,
        measure: grid.measure(),
        sources_enabled: true,
    };
    assert!(damped.validate().is_empty());
    let u0 = Field::from_fn(grid, |x, y| {
        0.5 + ((-(x - 0.5) * (x - 0.5) - (y - 0.5) * (y - 0.5)) / (2.0 * 0.2 * 0.2)).exp()
    });
    let initial_linf = u0.max_abs();
    let v0 = elliptic_solve_v(&u0, &damped).expect("signal");
    let control = StepControl {
        dt_max: 1.0,
        dt_min: 1e-9,
        cfl_safety: 0.5,
        t_end: 10.0,
        blowup_threshold: 1e6 * initial_linf,
    };
    let opts = RunOptions {
        sample_interval: 0.5,
        series_k: 2.0,
        fm2_k: Some(2.0),
    };
    let record = run(
        State { u: u0, v: v0, t: 0.0 },
        &damped,
        &control,
        &opts,
    )
    .expect("damped run");
    assert_eq!(
        classify_run(&record, &control),
        RunClassification::Bounded,
        "criterion 8: FAIL - strong damping did not classify bounded: {:?}",
        record.termination
    );
    assert!(
        record.max_linf_u() <= 10.0 * initial_linf,
        "criterion 8: FAIL - damped sup norm {} over 10 x initial {}",
        record.max_linf_u(),
        initial_linf
    );

    let sharp = Grid::rect((1.0, 1.0), (64, 64)).expect("grid");
    let undamped = ModelParams {
        a: 1e-6,
        b: 1e-6,
        c: 0.0,
        chi: 20.0,
        delta: 2.0,
        measure: sharp.measure(),
        ..damped
    };
    // mass of the bump is about 3.1, so chi x mass is far over the 4 pi
    // aggregation threshold of the classical parabolic-elliptic system
    let u0 = Field::from_fn(sharp, |x, y| {
        50.0 * ((-(x - 0.5) * (x - 0.5) - (y - 0.5) * (y - 0.5)) / (2.0 * 0.1 * 0.1)).exp()
    });
    let mass = integrate(&u0, 1.0).expect("mass");
    assert!(undamped.chi * mass > 4.0 * std::f64::consts::PI * 4.0);
    let v0 = elliptic_solve_v(&u0, &undamped).expect("signal");
    let control = StepControl {
        dt_max: 1.0,
        dt_min: 1e-6,
        cfl_safety: 0.5,
        t_end: 10.0,
        blowup_threshold: 20.0 * u0.max_abs(),
    };
    let record = run(
        State { u: u0, v: v0, t: 0.0 },
        &undamped,
        &control,
        &opts,
    )
    .expect("aggregation run");
    assert_eq!(
        classify_run(&record, &control),
        RunClassification::SuspectedBlowup,
        "criterion 8: FAIL - aggregation-dominated run classified {:?} ({:?})",
        classify_run(&record, &control),
        record.termination
    );

    budget("8", start.elapsed(), Duration::from_secs(300));
    println!(
        "criterion 8 (qualitative dichotomy): PASS - bounded and blow-up branches, {:.2?}",
        start.elapsed()
    );
}

// 9. Rerunning a config reproduces its artifacts byte for byte.
#[test]
fn criterion_9_determinism() {
    let start = Instant::now();
    let config_text = "\
[model]
family = nonlocal
n = 1
m1 = 1
m2 = 1
l = 1
alpha = 1
beta = 2
delta = 2
chi = 0.8
a = 1.0
b = 1.0
c = 0.2
K = 1.0
tau = 1

[grid]
dims = 1
cells = 48
extent = 1.0

[control]
t_end = 0.4

[initial]
kind = gaussian
center = 0.4
width = 0.15
amplitude = 2.0
background = 0.3

[outputs]
cadence = 0.1
";
    let dir = tempfile::tempdir().expect("tempdir");
    let raw = RawConfig::parse(config_text).expect("parse");
    let cfg = RunConfig::from_raw(&raw, dir.path()).expect("build");

    let first = run_simulation(&cfg, dir.path()).expect("first run");
    let series = std::fs::read(first.run_dir.join("series.csv")).expect("series");
    let final_u_csv = std::fs::read(first.run_dir.join("final_u.csv")).expect("final csv");
    let final_u_bin = std::fs::read(first.run_dir.join("final_u.bin")).expect("final bin");

    let second = run_simulation(&cfg, dir.path()).expect("second run");
    assert_eq!(first.run_dir, second.run_dir);
    assert_eq!(
        std::fs::read(second.run_dir.join("series.csv")).expect("series"),
        series,
        "criterion 9: FAIL - series.csv changed between reruns"
    );
    assert_eq!(
        std::fs::read(second.run_dir.join("final_u.csv")).expect("final csv"),
        final_u_csv,
        "criterion 9: FAIL - final_u.csv changed between reruns"
    );
    assert_eq!(
        std::fs::read(second.run_dir.join("final_u.bin")).expect("final bin"),
        final_u_bin,
        "criterion 9: FAIL - final_u.bin changed between reruns"
    );
    println!(
        "criterion 9 (determinism): PASS - byte-identical artifacts, {:.2?}",
        start.elapsed()
    );
}
