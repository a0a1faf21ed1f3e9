//! Conjugate gradients for the signal equations. Both the instantaneous
//! and the backward-Euler form are screened Poisson systems
//! `(sigma I - gamma Lap) v = rhs` with zero-flux boundaries; sigma > 0 and
//! gamma >= 0 make the operator symmetric positive definite, and the
//! M-matrix structure keeps the exact solution nonnegative for nonnegative
//! right-hand sides.

use crate::grid::{laplacian_neumann, Field};
use crate::model::ModelParams;

use super::SolverError;

/// Sup-norm residual tolerance relative to the right-hand side.
const RESIDUAL_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn apply(sigma: f64, gamma: f64, x: &Field) -> Field {
    let mut out = laplacian_neumann(x);
    for (o, &xi) in out.values_mut().iter_mut().zip(x.values()) {
        *o = sigma * xi - gamma * *o;
    }
    out
}

/// Thomas factorization of the 1D stencil for one `(sigma, gamma)` pair.
/// The matrix is strictly diagonally dominant (sigma > 0), so the sweep is
/// stable without pivoting; the factors depend only on the operator, so the
/// run loop reuses them across steps while the step size stays put.
pub(crate) struct TridiagFactors {
    sigma: f64,
    gamma: f64,
    w: f64,
    inv: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagFactors {
    fn compute(sigma: f64, gamma: f64, rhs: &Field) -> Self {
        let g = rhs.grid();
        let (nx, _) = g.cells();
        let h = g.spacing().0;
        let w = gamma / (h * h);

        let mut inv = vec![0.0; nx];
        let mut upper = vec![0.0; nx];
        inv[0] = 1.0 / (sigma + w);
        upper[0] = -w * inv[0];
        for i in 1..nx {
            let diag = if i + 1 < nx { sigma + 2.0 * w } else { sigma + w };
            inv[i] = 1.0 / (diag + w * upper[i - 1]);
            upper[i] = -w * inv[i];
        }
        TridiagFactors { sigma, gamma, w, inv, upper }
    }

    fn matches(&self, sigma: f64, gamma: f64, n: usize) -> bool {
        self.sigma == sigma && self.gamma == gamma && self.inv.len() == n
    }

    fn solve(&self, rhs: &Field) -> Field {
        let b = rhs.values();
        let nx = b.len();
        let mut x = vec![0.0; nx];
        x[0] = b[0] * self.inv[0];
        for i in 1..nx {
            x[i] = (b[i] + self.w * x[i - 1]) * self.inv[i];
        }
        for i in (0..nx - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
        Field::from_values(*rhs.grid(), x).expect("same grid")
    }
}

/// Solves `(sigma I - gamma Lap) x = rhs`: direct tridiagonal elimination in
/// 1D, matrix-free CG warm-started from `guess` in 2D. Accepts only when the
/// true sup-norm residual is below `RESIDUAL_TOL * |rhs|_inf`; negatives
/// below that noise level are flushed to zero so the discrete maximum
/// principle survives roundoff.
fn screened_poisson_solve(
    sigma: f64,
    gamma: f64,
    rhs: &Field,
    guess: &Field,
    factors: &mut Option<TridiagFactors>,
) -> Result<Field, SolverError> {
    let n = rhs.values().len();
    let b_inf = linf(rhs.values());
    if b_inf == 0.0 {
        return Ok(Field::zeros(*rhs.grid()));
    }
    let tol = RESIDUAL_TOL * b_inf;

    // constants are eigenvectors with eigenvalue sigma, so dividing solves
    // the system exactly; this also keeps uniform states bit-exact
    let first = rhs.values()[0];
    if rhs.values().iter().all(|&v| v == first) {
        return Ok(Field::constant(*rhs.grid(), first / sigma));
    }

    let mut x;
    if rhs.grid().dims() == 1 {
        if !factors.as_ref().is_some_and(|f| f.matches(sigma, gamma, n)) {
            *factors = Some(TridiagFactors::compute(sigma, gamma, rhs));
        }
        x = factors.as_ref().expect("just filled").solve(rhs);

        // verify in place: sup-norm residual of the assembled operator
        let ihx2 = {
            let h = rhs.grid().spacing().0;
            1.0 / (h * h)
        };
        let xv = x.values();
        let bv = rhs.values();
        let mut worst = 0.0f64;
        for i in 0..n {
            let left = if i > 0 { xv[i - 1] - xv[i] } else { 0.0 };
            let right = if i + 1 < n { xv[i + 1] - xv[i] } else { 0.0 };
            let lap = (left + right) * ihx2;
            worst = worst.max((bv[i] - (sigma * xv[i] - gamma * lap)).abs());
        }
        if worst <= tol {
            for val in x.values_mut() {
                if *val < 0.0 && *val >= -tol {
                    *val = 0.0;
                }
            }
            return Ok(x);
        }
        // cancellation spoiled the sweep; let CG polish from it
    } else {
        x = guess.clone();
    }

    let ax = apply(sigma, gamma, &x);
    let mut r = rhs.clone();
    for (ri, &axi) in r.values_mut().iter_mut().zip(ax.values()) {
        *ri -= axi;
    }
    let mut p = r.clone();
    let mut rr = dot(r.values(), r.values());

    let max_iters = 20 * n + 200;
    let mut residual = linf(r.values());
    for iterations in 0..=max_iters {
        if residual <= tol {
            // the recurrence residual drifts; accept only on the true one
            let ax = apply(sigma, gamma, &x);
            let true_res: Vec<f64> = rhs
                .values()
                .iter()
                .zip(ax.values())
                .map(|(b, a)| b - a)
                .collect();
            residual = linf(&true_res);
            if residual <= tol {
                for val in x.values_mut() {
                    if *val < 0.0 && *val >= -tol {
                        *val = 0.0;
                    }
                }
                return Ok(x);
            }
            r = Field::from_values(*rhs.grid(), true_res).expect("matching grid");
            p = r.clone();
            rr = dot(r.values(), r.values());
        }
        if iterations == max_iters {
            break;
        }
        let ap = apply(sigma, gamma, &p);
        let pap = dot(p.values(), ap.values());
        if !(pap > 0.0) {
            return Err(SolverError::LinearSolve {
                iterations,
                residual,
            });
        }
        let alpha = rr / pap;
        for (xi, &pi) in x.values_mut().iter_mut().zip(p.values()) {
            *xi += alpha * pi;
        }
        for (ri, &api) in r.values_mut().iter_mut().zip(ap.values()) {
            *ri -= alpha * api;
        }
        let rr_new = dot(r.values(), r.values());
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, &ri) in p.values_mut().iter_mut().zip(r.values()) {
            *pi = ri + beta * *pi;
        }
        residual = linf(r.values());
    }
    Err(SolverError::LinearSolve {
        iterations: max_iters,
        residual,
    })
}

/// Instantaneous signal: solves `(I - Lap) v = f(u)`.
pub fn elliptic_solve_v(u: &Field, params: &ModelParams) -> Result<Field, SolverError> {
    let rhs = params.production_field(u)?;
    screened_poisson_solve(1.0, 1.0, &rhs, &Field::zeros(*u.grid()), &mut None)
}

pub(crate) fn elliptic_solve_v_from(
    u: &Field,
    params: &ModelParams,
    guess: &Field,
    factors: &mut Option<TridiagFactors>,
) -> Result<Field, SolverError> {
    let rhs = params.production_field(u)?;
    screened_poisson_solve(1.0, 1.0, &rhs, guess, factors)
}

/// Evolving signal, one backward-Euler step:
/// `((1+dt) I - dt Lap) v_new = v + dt f(u)`. As dt grows this approaches
/// the instantaneous solve.
pub fn parabolic_step_v(
    v: &Field,
    u: &Field,
    dt: f64,
    params: &ModelParams,
) -> Result<Field, SolverError> {
    parabolic_step_v_cached(v, u, dt, params, &mut None)
}

pub(crate) fn parabolic_step_v_cached(
    v: &Field,
    u: &Field,
    dt: f64,
    params: &ModelParams,
    factors: &mut Option<TridiagFactors>,
) -> Result<Field, SolverError> {
    let f = params.production_field(u)?;
    let mut rhs = v.clone();
    for (r, &fi) in rhs.values_mut().iter_mut().zip(f.values()) {
        *r += dt * fi;
    }
    screened_poisson_solve(1.0 + dt, dt, &rhs, v, factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::{SourceKind, Tau};

    fn params(tau: Tau) -> ModelParams {
        ModelParams {
            n: 1,
            m1: 1.0,
            m2: 1.0,
            chi: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            alpha: 1.0,
            beta: 2.0,
            delta: 4.0,
            tau,
            production_scale: 1.0,
            production_exponent: 1.0,
            source: SourceKind::NonlocalDamping,
            measure: 1.0,
            sources_enabled: true,
        }
    }

    fn dense_neumann_solve(sigma: f64, gamma: f64, rhs: &[f64], h: f64) -> Vec<f64> {
        // direct Gaussian elimination on the same 1D stencil
        let n = rhs.len();
        let mut a = vec![vec![0.0; n]; n];
        let w = gamma / (h * h);
        for i in 0..n {
            a[i][i] = sigma;
            if i > 0 {
                a[i][i] += w;
                a[i][i - 1] -= w;
            }
            if i + 1 < n {
                a[i][i] += w;
                a[i][i + 1] -= w;
            }
        }
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
                .expect("rows");
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..n {
                let factor = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
        for col in (0..n).rev() {
            b[col] /= a[col][col];
            for row in 0..col {
                b[row] -= a[row][col] * b[col];
            }
        }
        b
    }

    #[test]
    fn uniform_density_gives_the_constant_signal_exactly() {
        let grid = Grid::line(1.0, 8).expect("grid");
        let p = ModelParams {
            production_scale: 2.0,
            production_exponent: 2.0,
            ..params(Tau::Elliptic)
        };
        let u = Field::constant(grid, 3.0);
        let v = elliptic_solve_v(&u, &p).expect("solve");
        for &x in v.values() {
            assert_eq!(x, 18.0);
        }
    }

    #[test]
    fn vacuum_gives_zero_signal() {
        let grid = Grid::line(1.0, 8).expect("grid");
        let v = elliptic_solve_v(&Field::zeros(grid), &params(Tau::Elliptic)).expect("solve");
        assert!(v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn elliptic_matches_dense_direct_solve() {
        let grid = Grid::line(1.0, 16).expect("grid");
        let u = Field::from_fn(grid, |x, _| 0.5 + x * x + 0.3 * (7.0 * x).sin().abs());
        let p = params(Tau::Elliptic);
        let v = elliptic_solve_v(&u, &p).expect("solve");
        let exact = dense_neumann_solve(1.0, 1.0, u.values(), grid.spacing().0);
        for (got, want) in v.values().iter().zip(&exact) {
            assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
        }
        assert!(v.min() >= 0.0);
    }

    #[test]
    fn compatible_constant_state_is_a_fixed_point() {
        let grid = Grid::line(2.0, 8).expect("grid");
        let u = Field::constant(grid, 2.0);
        let v0 = Field::constant(grid, 2.0); // f(u) = K u = 2 = v0
        let v1 = parabolic_step_v(&v0, &u, 0.25, &params(Tau::Parabolic)).expect("step");
        for (a, b) in v1.values().iter().zip(v0.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn free_decay_follows_the_scalar_recurrence() {
        let grid = Grid::line(1.0, 8).expect("grid");
        let u = Field::zeros(grid);
        let mut v = Field::constant(grid, 5.0);
        let dt = 0.3;
        let p = params(Tau::Parabolic);
        let mut expected = 5.0;
        for _ in 0..20 {
            v = parabolic_step_v(&v, &u, dt, &p).expect("step");
            expected /= 1.0 + dt;
            for &x in v.values() {
                assert!((x - expected).abs() <= 1e-12 * expected.max(1e-30));
            }
        }
    }

    #[test]
    fn huge_step_lands_on_the_elliptic_solution() {
        let grid = Grid::line(1.0, 32).expect("grid");
        let u = Field::from_fn(grid, |x, _| 1.0 + (3.0 * x).cos().powi(2));
        let v0 = Field::from_fn(grid, |x, _| 4.0 * x);
        let p = params(Tau::Parabolic);
        let big = parabolic_step_v(&v0, &u, 1e6, &p).expect("step");
        let elliptic = elliptic_solve_v(&u, &p).expect("solve");
        for (a, b) in big.values().iter().zip(elliptic.values()) {
            assert!((a - b).abs() <= 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn two_dimensional_residual_is_tight() {
        let grid = Grid::rect((1.0, 1.5), (12, 9)).expect("grid");
        let u = Field::from_fn(grid, |x, y| (x * y).exp() % 1.0 + 0.1);
        let p = params(Tau::Elliptic);
        let v = elliptic_solve_v(&u, &p).expect("solve");
        let lap = laplacian_neumann(&v);
        let f = p.production_field(&u).expect("production");
        let mut worst = 0.0f64;
        for ((&vi, &li), &fi) in v.values().iter().zip(lap.values()).zip(f.values()) {
            worst = worst.max((vi - li - fi).abs());
        }
        let scale = f.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(worst <= 1e-10 * scale, "residual {worst}");
        assert!(v.min() >= 0.0);
    }
}
