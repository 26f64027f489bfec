//! Algebraic order conditions on a tableau.
//!
//! The weak order classification rests on 59 polynomial conditions in the
//! tableau coefficients: a scheme is of weak order 2 when all 59 hold, and
//! of weak order 1 when the first 9 hold. Four further conditions govern
//! the deterministic order of the drift part (the classical Runge-Kutta
//! conditions up to order 3).
//!
//! All conditions are evaluated exactly as written: `v'` denotes transpose,
//! `M v` a matrix-vector product, juxtaposition of vectors the
//! component-wise product, and `e` the vector of ones. No rearrangement is
//! performed, so residuals are reproducible bit for bit.

use crate::tableau::ButcherTableau;
use serde::Serialize;
use std::fmt;

/// Residuals at or below this magnitude count as satisfied.
pub const DEFAULT_TOL: f64 = 1e-10;

fn ones(s: usize) -> Vec<f64> {
    vec![1.0; s]
}

/// Left-to-right accumulation; order is part of the contract.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn matv(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Component-wise product.
fn had(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Component-wise k-th power by repeated multiplication.
fn powv(a: &[f64], k: u32) -> Vec<f64> {
    a.iter()
        .map(|&x| {
            let mut p = 1.0;
            for _ in 0..k {
                p *= x;
            }
            p
        })
        .collect()
}

/// Identifies one order condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionId {
    /// One of the 59 weak conditions, 1-based.
    Weak(u8),
    /// Deterministic order 1: alpha' e = 1.
    D1,
    /// Deterministic order 2: alpha' (A0 e) = 1/2.
    D2,
    /// Deterministic order 3: alpha' (A0 e)^2 = 1/3.
    D3a,
    /// Deterministic order 3: alpha' (A0 (A0 e)) = 1/6.
    D3b,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::Weak(i) => write!(f, "{i}"),
            ConditionId::D1 => write!(f, "D1"),
            ConditionId::D2 => write!(f, "D2"),
            ConditionId::D3a => write!(f, "D3a"),
            ConditionId::D3b => write!(f, "D3b"),
        }
    }
}

/// One weak order condition: its 1-based index, a human-readable statement,
/// the required right-hand side, and a pure evaluator for the left-hand
/// side.
pub struct ConditionDef {
    pub index: u8,
    pub description: &'static str,
    pub rhs: f64,
    pub eval: fn(&ButcherTableau) -> f64,
}

/// The evaluation of one condition against a concrete tableau.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionResidual {
    pub id: ConditionId,
    pub description: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub residual: f64,
}

impl ConditionResidual {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.residual.abs() <= tol
    }
}

const fn c(
    index: u8,
    description: &'static str,
    rhs: f64,
    eval: fn(&ButcherTableau) -> f64,
) -> ConditionDef {
    ConditionDef {
        index,
        description,
        rhs,
        eval,
    }
}

/// The full table of 59 weak order conditions, in index order.
///
/// Conditions 1 through 9 make up the weak order 1 set; all 59 together
/// make up the weak order 2 set. Each evaluator is a pure function of the
/// tableau and touches no global state.
pub fn weak_condition_table() -> Vec<ConditionDef> {
    vec![
        c(1, "alpha' e = 1", 1.0, |t| dot(&t.alpha, &ones(t.s))),
        c(2, "beta4' e = 0", 0.0, |t| dot(&t.beta4, &ones(t.s))),
        c(3, "beta3' e = 0", 0.0, |t| dot(&t.beta3, &ones(t.s))),
        c(4, "(beta1' e)^2 = 1", 1.0, |t| {
            let x = dot(&t.beta1, &ones(t.s));
            x * x
        }),
        c(5, "beta2' e = 0", 0.0, |t| dot(&t.beta2, &ones(t.s))),
        c(6, "beta1' (B1 e) = 0", 0.0, |t| {
            dot(&t.beta1, &matv(&t.b1, &ones(t.s)))
        }),
        c(7, "beta4' (A2 e) = 0", 0.0, |t| {
            dot(&t.beta4, &matv(&t.a2, &ones(t.s)))
        }),
        c(8, "beta3' (B2 e) = 0", 0.0, |t| {
            dot(&t.beta3, &matv(&t.b2, &ones(t.s)))
        }),
        c(9, "beta4' (B2 e)^2 = 0", 0.0, |t| {
            let v = matv(&t.b2, &ones(t.s));
            dot(&t.beta4, &had(&v, &v))
        }),
        c(10, "alpha' (A0 e) = 1/2", 0.5, |t| {
            dot(&t.alpha, &matv(&t.a0, &ones(t.s)))
        }),
        c(11, "alpha' (B0 e)^2 = 1/2", 0.5, |t| {
            let v = matv(&t.b0, &ones(t.s));
            dot(&t.alpha, &had(&v, &v))
        }),
        c(12, "(beta1' e)(alpha' (B0 e)) = 1/2", 0.5, |t| {
            dot(&t.beta1, &ones(t.s)) * dot(&t.alpha, &matv(&t.b0, &ones(t.s)))
        }),
        c(13, "(beta1' e)(beta1' (A1 e)) = 1/2", 0.5, |t| {
            dot(&t.beta1, &ones(t.s)) * dot(&t.beta1, &matv(&t.a1, &ones(t.s)))
        }),
        c(14, "beta3' (A2 e) = 0", 0.0, |t| {
            dot(&t.beta3, &matv(&t.a2, &ones(t.s)))
        }),
        c(15, "beta2' (B1 e) = 1", 1.0, |t| {
            dot(&t.beta2, &matv(&t.b1, &ones(t.s)))
        }),
        c(16, "beta4' (B2 e) = 1", 1.0, |t| {
            dot(&t.beta4, &matv(&t.b2, &ones(t.s)))
        }),
        c(17, "(beta1' e)(beta1' (B1 e)^2) = 1/2", 0.5, |t| {
            let v = matv(&t.b1, &ones(t.s));
            dot(&t.beta1, &ones(t.s)) * dot(&t.beta1, &had(&v, &v))
        }),
        c(18, "(beta1' e)(beta3' (B2 e)^2) = 1/2", 0.5, |t| {
            let v = matv(&t.b2, &ones(t.s));
            dot(&t.beta1, &ones(t.s)) * dot(&t.beta3, &had(&v, &v))
        }),
        c(19, "beta1' (B1 (B1 e)) = 0", 0.0, |t| {
            dot(&t.beta1, &matv(&t.b1, &matv(&t.b1, &ones(t.s))))
        }),
        c(20, "beta3' (B2 (B1 e)) = 0", 0.0, |t| {
            dot(&t.beta3, &matv(&t.b2, &matv(&t.b1, &ones(t.s))))
        }),
        c(21, "beta3' (B2 (B1 (B1 e))) = 0", 0.0, |t| {
            dot(
                &t.beta3,
                &matv(&t.b2, &matv(&t.b1, &matv(&t.b1, &ones(t.s)))),
            )
        }),
        c(22, "beta1' (A1 (B0 e)) = 0", 0.0, |t| {
            dot(&t.beta1, &matv(&t.a1, &matv(&t.b0, &ones(t.s))))
        }),
        c(23, "beta3' (A2 (B0 e)) = 0", 0.0, |t| {
            dot(&t.beta3, &matv(&t.a2, &matv(&t.b0, &ones(t.s))))
        }),
        c(24, "beta4' (A2 e)^2 = 0", 0.0, |t| {
            let v = matv(&t.a2, &ones(t.s));
            dot(&t.beta4, &had(&v, &v))
        }),
        c(25, "beta4' (A2 (A0 e)) = 0", 0.0, |t| {
            dot(&t.beta4, &matv(&t.a2, &matv(&t.a0, &ones(t.s))))
        }),
        c(26, "alpha' (B0 (B1 e)) = 0", 0.0, |t| {
            dot(&t.alpha, &matv(&t.b0, &matv(&t.b1, &ones(t.s))))
        }),
        c(27, "beta2' (A1 e) = 0", 0.0, |t| {
            dot(&t.beta2, &matv(&t.a1, &ones(t.s)))
        }),
        c(28, "beta1' ((A1 e)(B1 e)) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(&t.beta1, &had(&matv(&t.a1, &e), &matv(&t.b1, &e)))
        }),
        c(29, "beta3' ((A2 e)(B2 e)) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(&t.beta3, &had(&matv(&t.a2, &e), &matv(&t.b2, &e)))
        }),
        c(30, "beta4' (A2 (B0 e)) = 0", 0.0, |t| {
            dot(&t.beta4, &matv(&t.a2, &matv(&t.b0, &ones(t.s))))
        }),
        c(31, "beta2' (A1 (B0 e)) = 0", 0.0, |t| {
            dot(&t.beta2, &matv(&t.a1, &matv(&t.b0, &ones(t.s))))
        }),
        c(32, "beta4' ((B2 e)^2 (A2 e)) = 0", 0.0, |t| {
            let e = ones(t.s);
            let b2e = matv(&t.b2, &e);
            dot(&t.beta4, &had(&had(&b2e, &b2e), &matv(&t.a2, &e)))
        }),
        c(33, "beta4' (A2 (B0 e)^2) = 0", 0.0, |t| {
            let v = matv(&t.b0, &ones(t.s));
            dot(&t.beta4, &matv(&t.a2, &had(&v, &v)))
        }),
        c(34, "beta2' (A1 (B0 e)^2) = 0", 0.0, |t| {
            let v = matv(&t.b0, &ones(t.s));
            dot(&t.beta2, &matv(&t.a1, &had(&v, &v)))
        }),
        c(35, "beta1' (B1 (A1 e)) = 0", 0.0, |t| {
            dot(&t.beta1, &matv(&t.b1, &matv(&t.a1, &ones(t.s))))
        }),
        c(36, "beta3' (B2 (A1 e)) = 0", 0.0, |t| {
            dot(&t.beta3, &matv(&t.b2, &matv(&t.a1, &ones(t.s))))
        }),
        c(37, "beta2' (B1 e)^2 = 0", 0.0, |t| {
            let v = matv(&t.b1, &ones(t.s));
            dot(&t.beta2, &had(&v, &v))
        }),
        c(38, "beta4' (B2 (B1 e)) = 0", 0.0, |t| {
            dot(&t.beta4, &matv(&t.b2, &matv(&t.b1, &ones(t.s))))
        }),
        c(39, "beta2' (B1 (B1 e)) = 0", 0.0, |t| {
            dot(&t.beta2, &matv(&t.b1, &matv(&t.b1, &ones(t.s))))
        }),
        c(40, "beta1' (B1 e)^3 = 0", 0.0, |t| {
            let v = matv(&t.b1, &ones(t.s));
            dot(&t.beta1, &powv(&v, 3))
        }),
        c(41, "beta3' (B2 e)^3 = 0", 0.0, |t| {
            let v = matv(&t.b2, &ones(t.s));
            dot(&t.beta3, &powv(&v, 3))
        }),
        c(42, "beta1' (B1 (B1 e)^2) = 0", 0.0, |t| {
            let v = matv(&t.b1, &ones(t.s));
            dot(&t.beta1, &matv(&t.b1, &had(&v, &v)))
        }),
        c(43, "beta3' (B2 (B1 e)^2) = 0", 0.0, |t| {
            let v = matv(&t.b1, &ones(t.s));
            dot(&t.beta3, &matv(&t.b2, &had(&v, &v)))
        }),
        c(44, "beta4' (B2 e)^4 = 0", 0.0, |t| {
            let v = matv(&t.b2, &ones(t.s));
            dot(&t.beta4, &powv(&v, 4))
        }),
        c(45, "beta4' (B2 (B1 e))^2 = 0", 0.0, |t| {
            let v = matv(&t.b2, &matv(&t.b1, &ones(t.s)));
            dot(&t.beta4, &had(&v, &v))
        }),
        c(46, "beta4' ((B2 e)(B2 (B1 e))) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.beta4,
                &had(&matv(&t.b2, &e), &matv(&t.b2, &matv(&t.b1, &e))),
            )
        }),
        c(47, "alpha' ((B0 e)(B0 (B1 e))) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.alpha,
                &had(&matv(&t.b0, &e), &matv(&t.b0, &matv(&t.b1, &e))),
            )
        }),
        c(48, "beta1' ((A1 (B0 e))(B1 e)) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.beta1,
                &had(&matv(&t.a1, &matv(&t.b0, &e)), &matv(&t.b1, &e)),
            )
        }),
        c(49, "beta3' ((A2 (B0 e))(B2 e)) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.beta3,
                &had(&matv(&t.a2, &matv(&t.b0, &e)), &matv(&t.b2, &e)),
            )
        }),
        c(50, "beta1' (A1 (B0 (B1 e))) = 0", 0.0, |t| {
            dot(
                &t.beta1,
                &matv(&t.a1, &matv(&t.b0, &matv(&t.b1, &ones(t.s)))),
            )
        }),
        c(51, "beta3' (A2 (B0 (B1 e))) = 0", 0.0, |t| {
            dot(
                &t.beta3,
                &matv(&t.a2, &matv(&t.b0, &matv(&t.b1, &ones(t.s)))),
            )
        }),
        c(52, "beta4' ((B2 (A1 e))(B2 e)) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.beta4,
                &had(&matv(&t.b2, &matv(&t.a1, &e)), &matv(&t.b2, &e)),
            )
        }),
        c(53, "beta1' (B1 (A1 (B0 e))) = 0", 0.0, |t| {
            dot(
                &t.beta1,
                &matv(&t.b1, &matv(&t.a1, &matv(&t.b0, &ones(t.s)))),
            )
        }),
        c(54, "beta3' (B2 (A1 (B0 e))) = 0", 0.0, |t| {
            dot(
                &t.beta3,
                &matv(&t.b2, &matv(&t.a1, &matv(&t.b0, &ones(t.s)))),
            )
        }),
        c(55, "beta1' ((B1 e)(B1 (B1 e))) = 0", 0.0, |t| {
            let b1e = matv(&t.b1, &ones(t.s));
            dot(&t.beta1, &had(&b1e, &matv(&t.b1, &b1e)))
        }),
        c(56, "beta3' ((B2 e)(B2 (B1 e))) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.beta3,
                &had(&matv(&t.b2, &e), &matv(&t.b2, &matv(&t.b1, &e))),
            )
        }),
        c(57, "beta1' (B1 (B1 (B1 e))) = 0", 0.0, |t| {
            dot(
                &t.beta1,
                &matv(&t.b1, &matv(&t.b1, &matv(&t.b1, &ones(t.s)))),
            )
        }),
        c(58, "beta4' ((B2 e)(B2 (B1 e)^2)) = 0", 0.0, |t| {
            let e = ones(t.s);
            let v = matv(&t.b1, &e);
            dot(
                &t.beta4,
                &had(&matv(&t.b2, &e), &matv(&t.b2, &had(&v, &v))),
            )
        }),
        c(59, "beta4' ((B2 e)(B2 (B1 (B1 e)))) = 0", 0.0, |t| {
            let e = ones(t.s);
            dot(
                &t.beta4,
                &had(
                    &matv(&t.b2, &e),
                    &matv(&t.b2, &matv(&t.b1, &matv(&t.b1, &e))),
                ),
            )
        }),
    ]
}

/// Evaluates all 59 weak conditions against a tableau, in index order.
pub fn weak_residuals(t: &ButcherTableau) -> Vec<ConditionResidual> {
    weak_condition_table()
        .iter()
        .map(|def| {
            let lhs = (def.eval)(t);
            ConditionResidual {
                id: ConditionId::Weak(def.index),
                description: def.description,
                lhs,
                rhs: def.rhs,
                residual: lhs - def.rhs,
            }
        })
        .collect()
}

/// Evaluates the four deterministic order conditions (drift part only):
/// D1 and D2 for orders 1 and 2, D3a and D3b jointly for order 3.
pub fn deterministic_residuals(t: &ButcherTableau) -> Vec<ConditionResidual> {
    let defs: [(ConditionId, &'static str, f64, fn(&ButcherTableau) -> f64); 4] = [
        (ConditionId::D1, "alpha' e = 1", 1.0, |t| {
            dot(&t.alpha, &ones(t.s))
        }),
        (ConditionId::D2, "alpha' (A0 e) = 1/2", 0.5, |t| {
            dot(&t.alpha, &matv(&t.a0, &ones(t.s)))
        }),
        (
            ConditionId::D3a,
            "alpha' (A0 e)^2 = 1/3",
            1.0 / 3.0,
            |t| {
                let v = matv(&t.a0, &ones(t.s));
                dot(&t.alpha, &had(&v, &v))
            },
        ),
        (
            ConditionId::D3b,
            "alpha' (A0 (A0 e)) = 1/6",
            1.0 / 6.0,
            |t| dot(&t.alpha, &matv(&t.a0, &matv(&t.a0, &ones(t.s)))),
        ),
    ];
    defs.iter()
        .map(|&(id, description, rhs, eval)| {
            let lhs = eval(t);
            ConditionResidual {
                id,
                description,
                lhs,
                rhs,
                residual: lhs - rhs,
            }
        })
        .collect()
}

/// The outcome of classifying a tableau: attained weak and deterministic
/// orders plus every individual residual (59 weak followed by 4
/// deterministic).
#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    /// 0, 1 or 2.
    pub weak_order: u8,
    /// 0 through 3.
    pub deterministic_order: u8,
    pub residuals: Vec<ConditionResidual>,
    pub tol: f64,
}

impl OrderReport {
    /// The residuals exceeding the report's tolerance.
    pub fn failing(&self) -> Vec<&ConditionResidual> {
        self.residuals
            .iter()
            .filter(|r| !r.satisfied(self.tol))
            .collect()
    }
}

/// Classifies a tableau by evaluating every condition at tolerance `tol`.
pub fn classify(t: &ButcherTableau, tol: f64) -> OrderReport {
    let weak = weak_residuals(t);
    let det = deterministic_residuals(t);

    let weak_ok = |lo: u8, hi: u8| {
        weak.iter()
            .filter(|r| matches!(r.id, ConditionId::Weak(i) if i >= lo && i <= hi))
            .all(|r| r.satisfied(tol))
    };
    let weak_order = if weak_ok(1, 59) {
        2
    } else if weak_ok(1, 9) {
        1
    } else {
        0
    };

    let det_ok = |id: ConditionId| {
        det.iter()
            .find(|r| r.id == id)
            .map(|r| r.satisfied(tol))
            .unwrap_or(false)
    };
    let deterministic_order = if det_ok(ConditionId::D1)
        && det_ok(ConditionId::D2)
        && det_ok(ConditionId::D3a)
        && det_ok(ConditionId::D3b)
    {
        3
    } else if det_ok(ConditionId::D1) && det_ok(ConditionId::D2) {
        2
    } else if det_ok(ConditionId::D1) {
        1
    } else {
        0
    };

    let mut residuals = weak;
    residuals.extend(det);
    OrderReport {
        weak_order,
        deterministic_order,
        residuals,
        tol,
    }
}
