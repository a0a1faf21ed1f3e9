//! Spatial operators: flux divergences, gradients, midpoint quadrature.
//!
//! All stencils are written as sums of face fluxes, so the weighted cell sum
//! of any divergence telescopes to zero exactly (up to roundoff) and mass is
//! conserved by construction.

use super::{neumaier_sum, Field, GridError};

/// Negative values above this floor are treated as exact zeros by power-law
/// evaluations; forward-Euler transport can park a vacuum cell a few ulp
/// below zero.
pub(crate) const NEGATIVE_FLOOR: f64 = -1e-12;

/// Neumann Laplacian: `div(grad u)` with zero-flux boundary faces.
pub fn laplacian_neumann(u: &Field) -> Field {
    let g = *u.grid();
    let (nx, ny) = g.cells();
    let (hx, hy) = g.spacing();
    let v = u.values();

    let ihx2 = 1.0 / (hx * hx);
    let ihy2 = 1.0 / (hy * hy);
    let mut out = vec![0.0; v.len()];
    for j in 0..ny {
        for fi in 0..nx - 1 {
            let l = g.idx(fi, j);
            let r = g.idx(fi + 1, j);
            let flux = (v[r] - v[l]) * ihx2;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    for fj in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let l = g.idx(i, fj);
            let r = g.idx(i, fj + 1);
            let flux = (v[r] - v[l]) * ihy2;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    Field::from_values(g, out).expect("same grid")
}

/// `x^e` for x > 0. Half-integer exponents up to |e| = 3 take the
/// multiply/sqrt route; powf costs an order of magnitude more and these
/// exponents cover nearly every config in practice.
pub(crate) fn half_pow(x: f64, e: f64) -> f64 {
    let doubled = 2.0 * e;
    if doubled == doubled.floor() && doubled.abs() <= 6.0 {
        let mag = e.abs();
        let whole = x.powi(mag as i32);
        let pos = if mag.fract() != 0.0 { whole * x.sqrt() } else { whole };
        if e < 0.0 {
            pos.recip()
        } else {
            pos
        }
    } else {
        x.powf(e)
    }
}

/// `div( D(u) grad u )` with diffusivity `D(u) = (u+1)^(m1-1)` averaged
/// arithmetically onto faces.
pub fn diffusion_flux_divergence(u: &Field, m1: f64) -> Field {
    if m1 == 1.0 {
        // the face mean of the unit diffusivity is exactly 1, so the two
        // operators agree bit for bit
        return laplacian_neumann(u);
    }
    let g = *u.grid();
    let (nx, ny) = g.cells();
    let (hx, hy) = g.spacing();
    let v = u.values();

    let diffusivity: Vec<f64> = v.iter().map(|&c| half_pow(c + 1.0, m1 - 1.0)).collect();

    let ihx2 = 1.0 / (hx * hx);
    let ihy2 = 1.0 / (hy * hy);
    let mut out = vec![0.0; v.len()];
    for j in 0..ny {
        for fi in 0..nx - 1 {
            let l = g.idx(fi, j);
            let r = g.idx(fi + 1, j);
            let d = 0.5 * (diffusivity[l] + diffusivity[r]);
            let flux = d * (v[r] - v[l]) * ihx2;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    for fj in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let l = g.idx(i, fj);
            let r = g.idx(i, fj + 1);
            let d = 0.5 * (diffusivity[l] + diffusivity[r]);
            let flux = d * (v[r] - v[l]) * ihy2;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    Field::from_values(g, out).expect("same grid")
}

/// `div( chi u (u+1)^(m2-1) grad v )`, the chemotactic flux divergence.
///
/// Face velocities are central differences of `v`; the mobility
/// `u (u+1)^(m2-1)` is taken from the upwind cell, so a vacuum cell never
/// loses mass. The sign convention matches the diffusion operator: the time
/// stepper subtracts this from the diffusive divergence.
pub fn chemotaxis_flux_divergence(
    u: &Field,
    v: &Field,
    chi: f64,
    m2: f64,
) -> Result<Field, GridError> {
    if u.grid() != v.grid() {
        return Err(GridError::GridMismatch);
    }
    let g = *u.grid();
    let (nx, ny) = g.cells();
    let (hx, hy) = g.spacing();
    let uv = u.values();
    let vv = v.values();

    let mobility: Vec<f64> = uv.iter().map(|&c| mobility(c, m2)).collect();

    let ihx = 1.0 / hx;
    let ihy = 1.0 / hy;
    let mut out = vec![0.0; uv.len()];
    for j in 0..ny {
        for fi in 0..nx - 1 {
            let l = g.idx(fi, j);
            let r = g.idx(fi + 1, j);
            let w = chi * (vv[r] - vv[l]) * ihx;
            let up = if w >= 0.0 { mobility[l] } else { mobility[r] };
            let flux = up * w * ihx;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    for fj in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let l = g.idx(i, fj);
            let r = g.idx(i, fj + 1);
            let w = chi * (vv[r] - vv[l]) * ihy;
            let up = if w >= 0.0 { mobility[l] } else { mobility[r] };
            let flux = up * w * ihy;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    Ok(Field::from_values(g, out).expect("same grid"))
}

/// Net transport divergence `div(D(u) grad u) - div(chi u (u+1)^(m2-1) grad v)`
/// in a single face sweep. Face fluxes match the two public operators
/// exactly; only the summation interleaving differs, so conservation still
/// telescopes. The step loop uses this to halve its sweeps and allocations.
pub(crate) fn transport_divergence(
    u: &Field,
    v: &Field,
    chi: f64,
    m1: f64,
    m2: f64,
) -> Result<Field, GridError> {
    if u.grid() != v.grid() {
        return Err(GridError::GridMismatch);
    }
    let g = *u.grid();
    let (nx, ny) = g.cells();
    let (hx, hy) = g.spacing();
    let uv = u.values();
    let vv = v.values();

    // empty tables stand for "identically 1" / "no drift"
    let diffusivity: Vec<f64> = if m1 == 1.0 {
        Vec::new()
    } else {
        uv.iter().map(|&c| half_pow(c + 1.0, m1 - 1.0)).collect()
    };
    let drift_mobility: Vec<f64> = if chi == 0.0 {
        Vec::new()
    } else {
        uv.iter().map(|&c| mobility(c, m2)).collect()
    };

    let ihx = 1.0 / hx;
    let ihy = 1.0 / hy;
    let ihx2 = 1.0 / (hx * hx);
    let ihy2 = 1.0 / (hy * hy);
    let mut out = vec![0.0; uv.len()];
    for j in 0..ny {
        for fi in 0..nx - 1 {
            let l = g.idx(fi, j);
            let r = g.idx(fi + 1, j);
            let d = if diffusivity.is_empty() {
                1.0
            } else {
                0.5 * (diffusivity[l] + diffusivity[r])
            };
            let mut flux = d * (uv[r] - uv[l]) * ihx2;
            if chi != 0.0 {
                let w = chi * (vv[r] - vv[l]) * ihx;
                let up = if w >= 0.0 { drift_mobility[l] } else { drift_mobility[r] };
                flux -= up * w * ihx;
            }
            out[l] += flux;
            out[r] -= flux;
        }
    }
    for fj in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let l = g.idx(i, fj);
            let r = g.idx(i, fj + 1);
            let d = if diffusivity.is_empty() {
                1.0
            } else {
                0.5 * (diffusivity[l] + diffusivity[r])
            };
            let mut flux = d * (uv[r] - uv[l]) * ihy2;
            if chi != 0.0 {
                let w = chi * (vv[r] - vv[l]) * ihy;
                let up = if w >= 0.0 { drift_mobility[l] } else { drift_mobility[r] };
                flux -= up * w * ihy;
            }
            out[l] += flux;
            out[r] -= flux;
        }
    }
    Ok(Field::from_values(g, out).expect("same grid"))
}

/// Chemotactic mobility `u (u+1)^(m2-1)`, zero at and below vacuum.
pub(crate) fn mobility(u: f64, m2: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if m2 == 1.0 {
        u
    } else {
        u * half_pow(u + 1.0, m2 - 1.0)
    }
}

/// Pointwise `|grad u|` from central differences with reflected ghosts.
pub fn gradient_magnitude(u: &Field) -> Field {
    let g = *u.grid();
    let (nx, ny) = g.cells();
    let (hx, hy) = g.spacing();
    let v = u.values();

    let mut out = vec![0.0; v.len()];
    for j in 0..ny {
        for i in 0..nx {
            let w = if i > 0 { v[g.idx(i - 1, j)] } else { v[g.idx(i, j)] };
            let e = if i + 1 < nx { v[g.idx(i + 1, j)] } else { v[g.idx(i, j)] };
            let gx = (e - w) / (2.0 * hx);
            let gy = if ny > 1 {
                let s = if j > 0 { v[g.idx(i, j - 1)] } else { v[g.idx(i, j)] };
                let n = if j + 1 < ny { v[g.idx(i, j + 1)] } else { v[g.idx(i, j)] };
                (n - s) / (2.0 * hy)
            } else {
                0.0
            };
            out[g.idx(i, j)] = (gx * gx + gy * gy).sqrt();
        }
    }
    Field::from_values(g, out).expect("same grid")
}

/// Midpoint-rule quadrature `INT_Omega field^p`.
///
/// Integer `p` uses `powi` and accepts any sign. Fractional `p` requires
/// nonnegative values; bases in `(NEGATIVE_FLOOR, 0)` count as zero, anything
/// more negative is a domain error.
pub fn integrate(f: &Field, p: f64) -> Result<f64, GridError> {
    let cell = f.grid().cell_measure();
    let vals = f.values();
    let sum = if p == 1.0 {
        neumaier_sum(vals.iter().copied())
    } else if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        let ip = p as i32;
        neumaier_sum(vals.iter().map(|&x| x.powi(ip)))
    } else {
        for (cell, &x) in vals.iter().enumerate() {
            if x <= NEGATIVE_FLOOR {
                return Err(GridError::NegativeBase {
                    value: x,
                    exponent: p,
                    cell,
                });
            }
        }
        neumaier_sum(vals.iter().map(|&x| if x <= 0.0 { 0.0 } else { half_pow(x, p) }))
    };
    Ok(sum * cell)
}
