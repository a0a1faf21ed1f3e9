//! Problem data: parameter set, admissibility checks, reaction terms B, and
//! the signal production law f.
//!
//! Two damping families are supported. With `NonlocalDamping` the reaction is
//!
//! ```text
//! B(u) = a u^alpha - b u^beta - c INT_Omega u^delta
//! ```
//!
//! and with `GradientDamping` it is
//!
//! ```text
//! B(u) = a u^alpha - b u^alpha INT_Omega u^beta - c |grad u|^delta.
//! ```
//!
//! The production law is fixed to `f(u) = K u^l`, which saturates the bound
//! the boundedness predicates assume for f.

use thiserror::Error;

use crate::grid::{integrate, Field, GridError};

/// Which damping family the reaction term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    /// `a u^alpha - b u^beta - c INT u^delta`
    NonlocalDamping,
    /// `a u^alpha - b u^alpha INT u^beta - c |grad u|^delta`
    GradientDamping,
}

/// Time structure of the signal equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tau {
    /// `0 = Lap v - v + f(u)` solved fresh each step.
    Elliptic,
    /// `v_t = Lap v - v + f(u)` stepped implicitly.
    Parabolic,
}

impl Tau {
    /// The relaxation coefficient: 0 for elliptic, 1 for parabolic.
    pub fn factor(self) -> f64 {
        match self {
            Tau::Elliptic => 0.0,
            Tau::Parabolic => 1.0,
        }
    }
}

/// Every scalar of the problem statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spatial dimension. The predicates accept any n >= 1; the grid runs 1 or 2.
    pub n: u32,
    /// Diffusion exponent: diffusivity is `(u+1)^(m1-1)`.
    pub m1: f64,
    /// Sensitivity exponent: chemotactic mobility is `u (u+1)^(m2-1)`.
    pub m2: f64,
    /// Chemotactic sensitivity coefficient.
    pub chi: f64,
    /// Growth coefficient of `a u^alpha`.
    pub a: f64,
    /// Damping coefficient of the `b` term.
    pub b: f64,
    /// Coefficient of the extra (nonlocal or gradient) damping term.
    pub c: f64,
    /// Growth exponent.
    pub alpha: f64,
    /// Damping exponent.
    pub beta: f64,
    /// Extra-damping exponent.
    pub delta: f64,
    /// Signal-equation time structure.
    pub tau: Tau,
    /// Production scale K in `f(u) = K u^l`.
    pub production_scale: f64,
    /// Production exponent l in `f(u) = K u^l`.
    pub production_exponent: f64,
    /// Damping family of B.
    pub source: SourceKind,
    /// Domain measure |Omega|.
    pub measure: f64,
    /// Numerical switch: when false the reaction B is dropped entirely and
    /// the run is pure transport (used by convergence studies).
    pub sources_enabled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// Breaks a structural requirement; the configuration is rejected.
    Error,
    /// Outside the theory's hypotheses but numerically well defined.
    Warning,
}

/// One violated admissibility clause.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Stable identifier of the broken clause, e.g. `"beta>alpha"`.
    pub clause: &'static str,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("density must be nonnegative, got {0}")]
    NegativeDensity(f64),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] GridError),
}

impl ModelParams {
    /// Checks every admissibility clause and returns the violated ones.
    /// An empty list means the parameters satisfy all structural hypotheses.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        fn push_err(out: &mut Vec<Violation>, clause: &'static str, message: String) {
            out.push(Violation {
                clause,
                message,
                severity: Severity::Error,
            });
        }

        for (name, v) in [
            ("m1", self.m1),
            ("m2", self.m2),
            ("chi", self.chi),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("delta", self.delta),
            ("K", self.production_scale),
            ("l", self.production_exponent),
            ("measure", self.measure),
        ] {
            if !v.is_finite() {
                push_err(&mut out, "finite", format!("{name} must be finite, got {v}"));
            }
        }
        if self.n < 1 {
            push_err(&mut out, "n>=1", "spatial dimension must be at least 1".into());
        }
        if self.chi <= 0.0 {
            push_err(&mut out, "chi>0", format!("chi > 0 required, got {}", self.chi));
        }
        if self.a <= 0.0 {
            push_err(&mut out, "a>0", format!("a > 0 required, got {}", self.a));
        }
        if self.b <= 0.0 {
            push_err(&mut out, "b>0", format!("b > 0 required, got {}", self.b));
        }
        if self.c < 0.0 {
            push_err(&mut out, "c>=0", format!("c >= 0 required, got {}", self.c));
        }
        if self.alpha < 1.0 {
            push_err(&mut out, "alpha>=1", format!("alpha >= 1 required, got {}", self.alpha));
        }
        if self.beta < 1.0 {
            push_err(&mut out, "beta>=1", format!("beta >= 1 required, got {}", self.beta));
        }
        if self.delta < 1.0 {
            push_err(&mut out, "delta>=1", format!("delta >= 1 required, got {}", self.delta));
        }
        if self.production_scale <= 0.0 {
            push_err(
                &mut out,
                "K>0",
                format!("production scale K > 0 required, got {}", self.production_scale),
            );
        }
        if self.production_exponent <= 0.0 {
            push_err(
                &mut out,
                "l>0",
                format!(
                    "production exponent l > 0 required, got {}",
                    self.production_exponent
                ),
            );
        } else if self.production_exponent < 1.0 {
            out.push(Violation {
                clause: "l>=1",
                message: format!(
                    "l = {} in (0,1) makes f non-differentiable at 0; outside the \
                     boundedness theory's regularity hypotheses",
                    self.production_exponent
                ),
                severity: Severity::Warning,
            });
        }
        if self.measure <= 0.0 {
            push_err(&mut out, "measure>0", format!("domain measure > 0 required, got {}", self.measure));
        }

        match self.source {
            SourceKind::NonlocalDamping => {
                if self.beta <= self.alpha {
                    push_err(
                        &mut out,
                        "beta>alpha",
                        format!(
                            "beta > alpha required for nonlocal damping, got beta = {}, alpha = {}",
                            self.beta, self.alpha
                        ),
                    );
                }
                let floor = self.m1.max(1.0);
                if self.delta < floor {
                    push_err(
                        &mut out,
                        "delta>=max(1,m1)",
                        format!(
                            "delta >= max(1, m1) = {} required for nonlocal damping, got {}",
                            floor, self.delta
                        ),
                    );
                }
            }
            SourceKind::GradientDamping => {
                let floor = (self.m1 - self.alpha).max(1.0);
                if self.beta < floor {
                    push_err(
                        &mut out,
                        "beta>=max(1,m1-alpha)",
                        format!(
                            "beta >= max(1, m1 - alpha) = {} required for gradient damping, got {}",
                            floor, self.beta
                        ),
                    );
                }
                if !(1.0..=2.0).contains(&self.delta) {
                    push_err(
                        &mut out,
                        "1<=delta<=2",
                        format!("1 <= delta <= 2 required for gradient damping, got {}", self.delta),
                    );
                }
            }
        }
        out
    }

    /// True when no Error-severity clause is violated (warnings allowed).
    pub fn is_admissible(&self) -> bool {
        self.validate().iter().all(|v| v.severity != Severity::Error)
    }

    /// Signal production `f(u) = K u^l`.
    pub fn production_f(&self, u: f64) -> Result<f64, ModelError> {
        if u < 0.0 {
            return Err(ModelError::NegativeDensity(u));
        }
        Ok(self.production_scale * upow(u, self.production_exponent))
    }

    /// `f` applied cellwise. Roundoff negatives count as vacuum, so this
    /// cannot hit the negative-density guard.
    pub fn production_field(&self, u: &Field) -> Result<Field, ModelError> {
        let vals: Vec<f64> = u
            .values()
            .iter()
            .map(|&x| self.production_scale * upow(x.max(0.0), self.production_exponent))
            .collect();
        Ok(Field::from_values(*u.grid(), vals).expect("same grid"))
    }
}

/// Power law on densities: `u^p` with everything at or below vacuum mapped
/// to 0, so fractional p never produces NaN on roundoff negatives.
pub(crate) fn upow(u: f64, p: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if p == 1.0 {
        u
    } else {
        crate::grid::half_pow(u, p)
    }
}

/// Reaction term evaluated on a field, kept in parts so monitors can drop
/// sign-definite pieces the way the mass-bound derivation does.
#[derive(Debug, Clone)]
pub struct SourceEval {
    /// `a u^alpha`
    pub growth: Vec<f64>,
    /// The `b` term: `b u^beta` or `b u^alpha INT u^beta`.
    pub damping_b: Vec<f64>,
    /// The `c` term: `c INT u^delta` or `c |grad u|^delta`.
    pub damping_c: Vec<f64>,
    /// `INT u^delta` (nonlocal family) or `INT u^beta` (gradient family).
    pub nonlocal_integral: f64,
}

impl SourceEval {
    /// `growth - damping_b - damping_c`, cellwise.
    pub fn pointwise(&self) -> Vec<f64> {
        self.growth
            .iter()
            .zip(&self.damping_b)
            .zip(&self.damping_c)
            .map(|((&g, &db), &dc)| g - db - dc)
            .collect()
    }
}

/// Evaluates the nonlocal-damping reaction. The quadrature is called exactly
/// once; its value is shared by every cell.
pub fn source_nonlocal(
    u: &Field,
    p: &ModelParams,
    quadrature: impl Fn(&Field, f64) -> Result<f64, GridError>,
) -> Result<SourceEval, ModelError> {
    let integral = quadrature(u, p.delta)?;
    let growth: Vec<f64> = u.values().iter().map(|&x| p.a * upow(x, p.alpha)).collect();
    let damping_b: Vec<f64> = u.values().iter().map(|&x| p.b * upow(x, p.beta)).collect();
    let damping_c: Vec<f64> = vec![p.c * integral; u.values().len()];
    Ok(assemble(growth, damping_b, damping_c, integral))
}

/// Evaluates the gradient-damping reaction. `grad_mag` must be the gradient
/// magnitude of `u` on the same grid.
pub fn source_gradient(
    u: &Field,
    grad_mag: &Field,
    p: &ModelParams,
    quadrature: impl Fn(&Field, f64) -> Result<f64, GridError>,
) -> Result<SourceEval, ModelError> {
    if u.grid() != grad_mag.grid() {
        return Err(ModelError::Quadrature(GridError::GridMismatch));
    }
    let integral = quadrature(u, p.beta)?;
    let growth: Vec<f64> = u.values().iter().map(|&x| p.a * upow(x, p.alpha)).collect();
    let damping_b: Vec<f64> = u
        .values()
        .iter()
        .map(|&x| p.b * upow(x, p.alpha) * integral)
        .collect();
    let damping_c: Vec<f64> = grad_mag
        .values()
        .iter()
        .map(|&g| p.c * upow(g, p.delta))
        .collect();
    Ok(assemble(growth, damping_b, damping_c, integral))
}

/// Evaluates whichever family `p.source` selects, with midpoint quadrature
/// and a freshly computed gradient field where needed.
pub fn eval_source(u: &Field, p: &ModelParams) -> Result<SourceEval, ModelError> {
    match p.source {
        SourceKind::NonlocalDamping => source_nonlocal(u, p, integrate),
        SourceKind::GradientDamping => {
            let grad = crate::grid::gradient_magnitude(u);
            source_gradient(u, &grad, p, integrate)
        }
    }
}

fn assemble(growth: Vec<f64>, damping_b: Vec<f64>, damping_c: Vec<f64>, integral: f64) -> SourceEval {
    SourceEval {
        growth,
        damping_b,
        damping_c,
        nonlocal_integral: integral,
    }
}

/// The constant of `(A+B)^s <= coeff (A^s + B^s)` for A, B >= 0 and s >= 1.
pub fn power_split_coeff(s: f64) -> f64 {
    2f64.powf(s - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn base_nonlocal() -> ModelParams {
        ModelParams {
            n: 2,
            m1: 1.0,
            m2: 1.0,
            chi: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            alpha: 1.0,
            beta: 2.0,
            delta: 1.0,
            tau: Tau::Elliptic,
            production_scale: 1.0,
            production_exponent: 1.0,
            source: SourceKind::NonlocalDamping,
            measure: 1.0,
            sources_enabled: true,
        }
    }

    fn base_gradient() -> ModelParams {
        ModelParams {
            beta: 1.0,
            source: SourceKind::GradientDamping,
            ..base_nonlocal()
        }
    }

    #[test]
    fn admissible_params_validate_clean() {
        assert!(base_nonlocal().validate().is_empty());
        assert!(base_gradient().validate().is_empty());
    }

    #[test]
    fn nonlocal_family_requires_strictly_stronger_damping() {
        let p = ModelParams {
            alpha: 2.0,
            beta: 2.0,
            ..base_nonlocal()
        };
        let vs = p.validate();
        assert!(vs.iter().any(|v| v.clause == "beta>alpha"));
        assert!(!p.is_admissible());
    }

    #[test]
    fn gradient_family_caps_delta_at_two() {
        let p = ModelParams {
            delta: 2.5,
            ..base_gradient()
        };
        assert!(p.validate().iter().any(|v| v.clause == "1<=delta<=2"));
    }

    #[test]
    fn sublinear_production_is_flagged_but_admissible() {
        let p = ModelParams {
            production_exponent: 0.5,
            ..base_nonlocal()
        };
        let vs = p.validate();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].severity, Severity::Warning);
        assert!(p.is_admissible());
    }

    #[test]
    fn production_matches_hand_values() {
        let mut p = base_nonlocal();
        assert_eq!(p.production_f(0.0).expect("f"), 0.0);

        p.production_scale = 3.0;
        p.production_exponent = 2.0;
        assert_eq!(p.production_f(1.0).expect("f"), 3.0);

        p.production_scale = 1.0;
        p.production_exponent = 0.5;
        assert_eq!(p.production_f(4.0).expect("f"), 2.0);

        assert!(matches!(
            p.production_f(-0.5),
            Err(ModelError::NegativeDensity(_))
        ));
    }

    #[test]
    fn nonlocal_source_uniform_and_equilibrium() {
        let g = Grid::line(1.0, 4).expect("grid");
        let u = Field::constant(g, 1.0);
        let ev = source_nonlocal(&u, &base_nonlocal(), integrate).expect("eval");
        assert!(ev.pointwise().iter().all(|&x| x == -1.0));
        assert_eq!(ev.nonlocal_integral, 1.0);

        // c = 0 and a u*^alpha = b u*^beta at u* = a/b
        let p = ModelParams {
            a: 3.0,
            b: 2.0,
            c: 0.0,
            ..base_nonlocal()
        };
        let star = Field::constant(g, 1.5);
        let ev = source_nonlocal(&star, &p, integrate).expect("eval");
        assert!(ev.pointwise().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn nonlocal_integral_is_shared_by_all_cells() {
        let g = Grid::line(4.0, 4).expect("grid");
        let u = Field::from_values(g, vec![1.0, 3.0, 0.0, 0.0]).expect("u");
        let p = ModelParams {
            a: 0.0,
            b: 0.0,
            delta: 2.0,
            ..base_nonlocal()
        };
        // a = b = 0 break admissibility but the evaluator itself is total
        let ev = source_nonlocal(&u, &p, integrate).expect("eval");
        assert_eq!(ev.nonlocal_integral, 10.0);
        assert_eq!(ev.pointwise()[0], -10.0);
        assert_eq!(ev.pointwise()[1], -10.0);
    }

    #[test]
    fn gradient_source_uniform_field() {
        // measure-2 domain, u = 1: growth 1, b-term 1 * INT u = 2
        let g = Grid::line(2.0, 8).expect("grid");
        let u = Field::constant(g, 1.0);
        let grad = crate::grid::gradient_magnitude(&u);
        let p = ModelParams {
            c: 0.0,
            measure: 2.0,
            ..base_gradient()
        };
        let ev = source_gradient(&u, &grad, &p, integrate).expect("eval");
        assert!(ev.damping_c.iter().all(|&x| x == 0.0));
        assert!(ev.pointwise().iter().all(|&x| x == -1.0));
    }

    #[test]
    fn gradient_source_is_linear_in_slope_magnitude() {
        let g = Grid::line(1.0, 8).expect("grid");
        let u = Field::from_fn(g, |x, _| 2.0 * x);
        let grad = crate::grid::gradient_magnitude(&u);
        let p = ModelParams {
            a: 0.0,
            b: 0.0,
            ..base_gradient()
        };
        let ev = source_gradient(&u, &grad, &p, integrate).expect("eval");
        for i in 1..7 {
            assert!((ev.pointwise()[i] + 2.0).abs() < 1e-12, "cell {i}");
        }
    }

    #[test]
    fn families_share_the_growth_term() {
        let g = Grid::line(1.0, 8).expect("grid");
        let u = Field::from_fn(g, |x, _| 1.0 + x * x);
        let pa = ModelParams {
            alpha: 1.5,
            beta: 2.0,
            ..base_nonlocal()
        };
        let pb = ModelParams {
            alpha: 1.5,
            ..base_gradient()
        };
        let ea = source_nonlocal(&u, &pa, integrate).expect("a");
        let grad = crate::grid::gradient_magnitude(&u);
        let eb = source_gradient(&u, &grad, &pb, integrate).expect("b");
        assert_eq!(ea.growth, eb.growth);
    }

    proptest! {
        #[test]
        fn reassembly_identity_is_exact(vals in proptest::collection::vec(0.0f64..5.0, 8)) {
            let g = Grid::line(1.0, 8).expect("grid");
            let u = Field::from_values(g, vals).expect("u");
            for p in [base_nonlocal(), base_gradient()] {
                let ev = eval_source(&u, &p).expect("eval");
                for i in 0..8 {
                    let re = ev.growth[i] - ev.damping_b[i] - ev.damping_c[i];
                    prop_assert_eq!(ev.pointwise()[i], re);
                    prop_assert!(ev.pointwise()[i].is_finite());
                }
            }
        }

        #[test]
        fn split_power_bound_holds(a in 0.0f64..100.0, b in 0.0f64..100.0, s in 1.0f64..4.0) {
            let lhs = (a + b).powf(s);
            let rhs = power_split_coeff(s) * (a.powf(s) + b.powf(s));
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
