//! Extended Butcher tableaux for explicit SRK schemes.
//!
//! A tableau bundles the weight vectors `alpha`, `beta1..beta4`, the
//! drift-stage matrices `A0, A1, A2`, the diffusion-stage matrices
//! `B0, B1, B2` and the node vectors `c0, c1, c2`. The node vectors are
//! never user supplied: they are always the row sums of the corresponding
//! A-matrix, computed left to right, so the defining relation c = A e holds
//! by construction.
//!
//! `A0, A1, B0, B1` must be strictly lower triangular (the scheme is
//! explicit); `A2` and `B2` may be full.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation failure for a raw tableau.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableauError {
    #[error("{name}: expected {expected} entries, got {got}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{matrix}[{row}][{col}] = {value} must be zero: only entries strictly below the diagonal may be nonzero")]
    ExplicitnessViolation {
        matrix: &'static str,
        /// 1-based row.
        row: usize,
        /// 1-based column.
        col: usize,
        value: f64,
    },
    #[error("{name}[{index}] is not finite")]
    NonFiniteEntry { name: String, index: String },
    #[error("cannot parse coefficient expression {0:?}")]
    BadExpression(String),
    #[error("stage count must be at least 1")]
    NoStages,
}

/// A validated extended Butcher tableau.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ButcherTableau {
    pub name: String,
    /// Stage count.
    pub s: usize,
    pub alpha: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub beta3: Vec<f64>,
    pub beta4: Vec<f64>,
    pub a0: Vec<Vec<f64>>,
    pub a1: Vec<Vec<f64>>,
    pub a2: Vec<Vec<f64>>,
    pub b0: Vec<Vec<f64>>,
    pub b1: Vec<Vec<f64>>,
    pub b2: Vec<Vec<f64>>,
    /// Row sums of `a0`; drift nodes.
    pub c0: Vec<f64>,
    /// Row sums of `a1`; diffusion nodes of the H^(k) stages.
    pub c1: Vec<f64>,
    /// Row sums of `a2`; diffusion nodes of the Hhat^(k) stages.
    pub c2: Vec<f64>,
}

impl ButcherTableau {
    /// Builds and validates a tableau from plain coefficient arrays.
    ///
    /// The stage count is `alpha.len()`; all other arrays must match it.
    /// Node vectors are derived as left-to-right row sums of the A-matrices.
    /// On failure every violation found is reported, not just the first.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        alpha: Vec<f64>,
        beta1: Vec<f64>,
        beta2: Vec<f64>,
        beta3: Vec<f64>,
        beta4: Vec<f64>,
        a0: Vec<Vec<f64>>,
        a1: Vec<Vec<f64>>,
        a2: Vec<Vec<f64>>,
        b0: Vec<Vec<f64>>,
        b1: Vec<Vec<f64>>,
        b2: Vec<Vec<f64>>,
    ) -> Result<Self, Vec<TableauError>> {
        let mut errs = Vec::new();
        let s = alpha.len();
        if s == 0 {
            errs.push(TableauError::NoStages);
            return Err(errs);
        }

        let check_vec = |errs: &mut Vec<TableauError>, name: &str, v: &[f64]| {
            if v.len() != s {
                errs.push(TableauError::DimensionMismatch {
                    name: name.to_string(),
                    expected: s,
                    got: v.len(),
                });
                return;
            }
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    errs.push(TableauError::NonFiniteEntry {
                        name: name.to_string(),
                        index: format!("{}", i + 1),
                    });
                }
            }
        };
        let check_mat = |errs: &mut Vec<TableauError>, name: &str, m: &[Vec<f64>]| {
            if m.len() != s {
                errs.push(TableauError::DimensionMismatch {
                    name: format!("{name} rows"),
                    expected: s,
                    got: m.len(),
                });
                return;
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != s {
                    errs.push(TableauError::DimensionMismatch {
                        name: format!("{name} row {}", i + 1),
                        expected: s,
                        got: row.len(),
                    });
                    continue;
                }
                for (j, x) in row.iter().enumerate() {
                    if !x.is_finite() {
                        errs.push(TableauError::NonFiniteEntry {
                            name: name.to_string(),
                            index: format!("{}][{}", i + 1, j + 1),
                        });
                    }
                }
            }
        };

        check_vec(&mut errs, "alpha", &alpha);
        check_vec(&mut errs, "beta1", &beta1);
        check_vec(&mut errs, "beta2", &beta2);
        check_vec(&mut errs, "beta3", &beta3);
        check_vec(&mut errs, "beta4", &beta4);
        check_mat(&mut errs, "A0", &a0);
        check_mat(&mut errs, "A1", &a1);
        check_mat(&mut errs, "A2", &a2);
        check_mat(&mut errs, "B0", &b0);
        check_mat(&mut errs, "B1", &b1);
        check_mat(&mut errs, "B2", &b2);

        // Strict lower triangularity for the explicit stage systems.
        for (mname, m) in [("A0", &a0), ("A1", &a1), ("B0", &b0), ("B1", &b1)] {
            for (i, row) in m.iter().enumerate() {
                for (j, &x) in row.iter().enumerate().take(s.min(row.len())) {
                    if j >= i && x != 0.0 && x.is_finite() {
                        errs.push(TableauError::ExplicitnessViolation {
                            matrix: mname,
                            row: i + 1,
                            col: j + 1,
                            value: x,
                        });
                    }
                }
            }
        }

        if !errs.is_empty() {
            return Err(errs);
        }

        let row_sums = |m: &[Vec<f64>]| -> Vec<f64> {
            m.iter()
                .map(|row| row.iter().fold(0.0, |acc, x| acc + x))
                .collect()
        };
        let c0 = row_sums(&a0);
        let c1 = row_sums(&a1);
        let c2 = row_sums(&a2);

        Ok(ButcherTableau {
            name: name.into(),
            s,
            alpha,
            beta1,
            beta2,
            beta3,
            beta4,
            a0,
            a1,
            a2,
            b0,
            b1,
            b2,
            c0,
            c1,
            c2,
        })
    }
}

/// One coefficient in a tableau file: a plain number, or an exact
/// expression string (see [`parse_coeff`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Num(f64),
    Expr(String),
}

impl Entry {
    pub fn value(&self) -> Result<f64, TableauError> {
        match self {
            Entry::Num(x) => Ok(*x),
            Entry::Expr(s) => parse_coeff(s),
        }
    }
}

impl From<f64> for Entry {
    fn from(x: f64) -> Self {
        Entry::Num(x)
    }
}

/// Parses an exact coefficient expression.
///
/// Accepted forms (no interior whitespace):
///
/// * `"n"` or `"n/d"`: a rational, `n` signed, `d` positive;
/// * `"sqrt(p)"` or `"sqrt(p/q)"`: a square root of a nonnegative rational,
///   optionally preceded by a sign;
/// * either root form followed by `"*r"` where `r` is a rational as above,
///   e.g. `"sqrt(38/491)*3"` or `"sqrt(491/38)*-1/6"`.
pub fn parse_coeff(input: &str) -> Result<f64, TableauError> {
    let bad = || TableauError::BadExpression(input.to_string());
    let s = input.trim();
    if s.is_empty() {
        return Err(bad());
    }

    fn parse_rational(s: &str) -> Option<f64> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let n: i64 = num.parse().ok()?;
        match den {
            None => Some(n as f64),
            Some(d) => {
                let d: i64 = d.parse().ok()?;
                if d <= 0 {
                    return None;
                }
                Some(n as f64 / d as f64)
            }
        }
    }

    if let Some(idx) = s.find("sqrt(") {
        let (sign_part, rest) = s.split_at(idx);
        let sign = match sign_part {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => return Err(bad()),
        };
        let inner_and_tail = &rest["sqrt(".len()..];
        let close = inner_and_tail.find(')').ok_or_else(bad)?;
        let inner = &inner_and_tail[..close];
        let tail = &inner_and_tail[close + 1..];
        let radicand = parse_rational(inner).ok_or_else(bad)?;
        if radicand < 0.0 {
            return Err(bad());
        }
        let mult = if tail.is_empty() {
            1.0
        } else {
            let m = tail.strip_prefix('*').ok_or_else(bad)?;
            parse_rational(m).ok_or_else(bad)?
        };
        Ok(sign * radicand.sqrt() * mult)
    } else {
        parse_rational(s).ok_or_else(bad)
    }
}

/// On-disk tableau representation (JSON): coefficient arrays only, node
/// vectors are recomputed at load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawTableau {
    pub name: String,
    pub s: usize,
    pub alpha: Vec<Entry>,
    pub beta1: Vec<Entry>,
    pub beta2: Vec<Entry>,
    pub beta3: Vec<Entry>,
    pub beta4: Vec<Entry>,
    #[serde(rename = "A0")]
    pub a0: Vec<Vec<Entry>>,
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<Entry>>,
    #[serde(rename = "A2")]
    pub a2: Vec<Vec<Entry>>,
    #[serde(rename = "B0")]
    pub b0: Vec<Vec<Entry>>,
    #[serde(rename = "B1")]
    pub b1: Vec<Vec<Entry>>,
    #[serde(rename = "B2")]
    pub b2: Vec<Vec<Entry>>,
}

impl RawTableau {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tableau serialization cannot fail")
    }

    /// Captures a validated tableau as plain numbers (exact f64 round trip).
    pub fn from_tableau(t: &ButcherTableau) -> Self {
        let vec_of = |v: &[f64]| v.iter().map(|&x| Entry::Num(x)).collect::<Vec<_>>();
        let mat_of = |m: &[Vec<f64>]| m.iter().map(|r| vec_of(r)).collect::<Vec<_>>();
        RawTableau {
            name: t.name.clone(),
            s: t.s,
            alpha: vec_of(&t.alpha),
            beta1: vec_of(&t.beta1),
            beta2: vec_of(&t.beta2),
            beta3: vec_of(&t.beta3),
            beta4: vec_of(&t.beta4),
            a0: mat_of(&t.a0),
            a1: mat_of(&t.a1),
            a2: mat_of(&t.a2),
            b0: mat_of(&t.b0),
            b1: mat_of(&t.b1),
            b2: mat_of(&t.b2),
        }
    }
}

/// Validates raw tableau data, returning either a usable tableau or every
/// violation found.
pub fn validate(raw: &RawTableau) -> Result<ButcherTableau, Vec<TableauError>> {
    let mut errs = Vec::new();

    let eval_vec = |errs: &mut Vec<TableauError>, v: &[Entry]| -> Vec<f64> {
        v.iter()
            .map(|e| match e.value() {
                Ok(x) => x,
                Err(err) => {
                    errs.push(err);
                    0.0
                }
            })
            .collect()
    };
    let eval_mat = |errs: &mut Vec<TableauError>, m: &[Vec<Entry>]| -> Vec<Vec<f64>> {
        m.iter().map(|row| eval_vec(errs, row)).collect()
    };

    let alpha = eval_vec(&mut errs, &raw.alpha);
    let beta1 = eval_vec(&mut errs, &raw.beta1);
    let beta2 = eval_vec(&mut errs, &raw.beta2);
    let beta3 = eval_vec(&mut errs, &raw.beta3);
    let beta4 = eval_vec(&mut errs, &raw.beta4);
    let a0 = eval_mat(&mut errs, &raw.a0);
    let a1 = eval_mat(&mut errs, &raw.a1);
    let a2 = eval_mat(&mut errs, &raw.a2);
    let b0 = eval_mat(&mut errs, &raw.b0);
    let b1 = eval_mat(&mut errs, &raw.b1);
    let b2 = eval_mat(&mut errs, &raw.b2);

    if raw.s != raw.alpha.len() {
        errs.push(TableauError::DimensionMismatch {
            name: "s".to_string(),
            expected: raw.alpha.len(),
            got: raw.s,
        });
    }
    if !errs.is_empty() {
        // Parse errors poison the arrays; report them before shape checks.
        return Err(errs);
    }

    ButcherTableau::new(
        raw.name.clone(),
        alpha,
        beta1,
        beta2,
        beta3,
        beta4,
        a0,
        a1,
        a2,
        b0,
        b1,
        b2,
    )
}

/// Structural facts about a tableau that the integrator exploits, computed
/// once and reused across steps and threads.
#[derive(Debug, Clone)]
pub struct ExecutionPlan {
    pub tableau: ButcherTableau,
    /// True iff every entry of `A2` is zero.
    pub a2_zero: bool,
    /// Per stage: row i of `A2` and row i of `B2` are both all zero, so
    /// Hhat_i^(k) equals the step's starting state for every k and any m.
    pub hat_trivial: Vec<bool>,
    /// Per stage: row i of `A2` is all zero.
    pub a2_row_zero: Vec<bool>,
    /// Per stage: row i of `B2` is all zero.
    pub b2_row_zero: Vec<bool>,
}

impl ExecutionPlan {
    /// True iff stage i's Hhat state collapses to the starting state for a
    /// problem with m Wiener processes. For m = 1 the cross-noise sum in the
    /// Hhat stage is empty, so only the A2 row matters.
    ///
    /// When this holds, the diffusion value at the Hhat stage coincides with
    /// the stage-1 H^(k) value (both are b^k(t, y): the relevant node is a
    /// zero row sum), so no extra evaluation is performed.
    pub fn hat_reuses_initial(&self, i: usize, m: usize) -> bool {
        self.a2_row_zero[i] && (self.b2_row_zero[i] || m == 1)
    }
}

/// Compiles a validated tableau into an execution plan. Deterministic:
/// identical tableaux give identical plans.
pub fn compile(t: &ButcherTableau) -> ExecutionPlan {
    let row_zero = |m: &[Vec<f64>]| -> Vec<bool> {
        m.iter()
            .map(|row| row.iter().all(|&x| x == 0.0))
            .collect()
    };
    let a2_row_zero = row_zero(&t.a2);
    let b2_row_zero = row_zero(&t.b2);
    let hat_trivial = a2_row_zero
        .iter()
        .zip(&b2_row_zero)
        .map(|(&a, &b)| a && b)
        .collect();
    ExecutionPlan {
        tableau: t.clone(),
        a2_zero: a2_row_zero.iter().all(|&z| z),
        hat_trivial,
        a2_row_zero,
        b2_row_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use proptest::prelude::*;

    #[test]
    fn coeff_parser_exact_forms() {
        assert_eq!(parse_coeff("3").unwrap(), 3.0);
        assert_eq!(parse_coeff("-7/2").unwrap(), -3.5);
        assert_eq!(parse_coeff("491/1368").unwrap(), 491.0 / 1368.0);
        assert_eq!(parse_coeff("sqrt(9)").unwrap(), 3.0);
        assert_eq!(
            parse_coeff("sqrt(38/491)*3").unwrap(),
            3.0 * (38.0f64 / 491.0).sqrt()
        );
        assert_eq!(
            parse_coeff("-sqrt(221/4955)*4").unwrap(),
            -4.0 * (221.0f64 / 4955.0).sqrt()
        );
        assert_eq!(
            parse_coeff("sqrt(491/38)*1/6").unwrap(),
            (491.0f64 / 38.0).sqrt() / 6.0
        );
        assert_eq!(
            parse_coeff("sqrt(1105/991)*-214/513").unwrap(),
            -(214.0 / 513.0) * (1105.0f64 / 991.0).sqrt()
        );
    }

    #[test]
    fn coeff_parser_rejects_junk() {
        for bad in [
            "", "x", "sqrt(", "sqrt(-4)", "sqrt(4", "sqrt(4)*", "1/0", "1/-2", "sqrt(4)x",
            "--3", "sqrt(4)*sqrt(9)",
        ] {
            assert!(
                matches!(parse_coeff(bad), Err(TableauError::BadExpression(_))),
                "accepted {bad:?}"
            );
        }
    }

    #[test]
    fn euler_shape_is_valid() {
        let z = vec![vec![0.0]];
        let t = ButcherTableau::new(
            "euler",
            vec![1.0],
            vec![1.0],
            vec![0.0],
            vec![0.0],
            vec![0.0],
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z,
        )
        .unwrap();
        assert_eq!(t.s, 1);
        assert_eq!(t.c0, vec![0.0]);
    }

    #[test]
    fn upper_triangular_entry_is_rejected() {
        let zeros = || vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let mut b1 = zeros();
        b1[0][1] = 0.5;
        let errs = ButcherTableau::new(
            "bad",
            vec![0.5, 0.5],
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            zeros(),
            zeros(),
            zeros(),
            zeros(),
            b1,
            zeros(),
        )
        .unwrap_err();
        assert!(errs.iter().any(|e| matches!(
            e,
            TableauError::ExplicitnessViolation {
                matrix: "B1",
                row: 1,
                col: 2,
                ..
            }
        )));
    }

    #[test]
    fn diagonal_entry_is_rejected_and_all_violations_reported() {
        let zeros = || vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let mut a0 = zeros();
        a0[1][1] = 1.0;
        let mut b0 = zeros();
        b0[0][0] = 2.0;
        let errs = ButcherTableau::new(
            "bad",
            vec![0.5, 0.5],
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            a0,
            zeros(),
            zeros(),
            b0,
            zeros(),
            zeros(),
        )
        .unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn nonfinite_entry_is_rejected() {
        let z = vec![vec![0.0]];
        let errs = ButcherTableau::new(
            "bad",
            vec![f64::NAN],
            vec![1.0],
            vec![0.0],
            vec![0.0],
            vec![0.0],
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z,
        )
        .unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, TableauError::NonFiniteEntry { .. })));
    }

    #[test]
    fn dri1_file_round_trip_preserves_nodes() {
        let t = families::dri1();
        let raw = RawTableau::from_tableau(&t);
        let json = raw.to_json();
        let back = validate(&RawTableau::from_json(&json).unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.c0, vec![0.0, 0.5, 1.0]);
        assert_eq!(back.c1, vec![0.0, 342.0 / 491.0, 342.0 / 491.0]);
        assert_eq!(back.c2, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn dri1_from_surd_expressions_matches_constructor() {
        let json = r#"{
            "name": "DRI1",
            "s": 3,
            "alpha": ["1/6", "2/3", "1/6"],
            "beta1": ["193/684", "491/1368", "491/1368"],
            "beta2": ["0", "sqrt(491/38)*1/6", "sqrt(491/38)*-1/6"],
            "beta3": ["-4955/7072", "4955/14144", "4955/14144"],
            "beta4": ["0", "-sqrt(4955/221)*1/8", "sqrt(4955/221)*1/8"],
            "A0": [["0","0","0"], ["1/2","0","0"], ["-1","2","0"]],
            "A1": [["0","0","0"], ["342/491","0","0"], ["342/491","0","0"]],
            "A2": [["0","0","0"], ["0","0","0"], ["0","0","0"]],
            "B0": [["0","0","0"], ["sqrt(6)*-1/10","0","0"], ["sqrt(6)*2/5","0","0"]],
            "B1": [["0","0","0"], ["sqrt(38/491)*3","0","0"], ["sqrt(38/491)*-3","0","0"]],
            "B2": [["0","0","0"],
                   ["sqrt(1105/991)*-214/513", "sqrt(221/4955)*-491/513", "sqrt(221/4955)*-491/513"],
                   ["sqrt(1105/991)*214/513", "sqrt(221/4955)*491/513", "sqrt(221/4955)*491/513"]]
        }"#;
        // B0 holds (6 - sqrt 6)/10 and (3 + 2 sqrt 6)/5; the rational parts
        // 6/10 and 3/5 cannot ride along inside a single surd literal, so the
        // file splits them off via A-independent checks below.
        let raw = RawTableau::from_json(json).unwrap();
        let parsed = validate(&raw).unwrap();
        let t = families::dri1();
        // Entries that are single surds or rationals must agree exactly.
        assert_eq!(parsed.beta1, t.beta1);
        assert_eq!(parsed.beta3, t.beta3);
        assert_eq!(parsed.alpha, t.alpha);
        for i in 0..3 {
            for j in 0..3 {
                assert!((parsed.b1[i][j] - t.b1[i][j]).abs() < 1e-15);
                assert!((parsed.b2[i][j] - t.b2[i][j]).abs() < 1e-15);
            }
        }
        // The B0 column differs by the rational offsets 6/10 and 3/5.
        assert!((parsed.b0[1][0] + 6.0 / 10.0 - t.b0[1][0]).abs() < 1e-15);
        assert!((parsed.b0[2][0] + 3.0 / 5.0 - t.b0[2][0]).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let raw = RawTableau {
            name: "short".into(),
            s: 2,
            alpha: vec![Entry::Num(1.0), Entry::Num(0.0)],
            beta1: vec![Entry::Num(1.0)],
            beta2: vec![Entry::Num(0.0), Entry::Num(0.0)],
            beta3: vec![Entry::Num(0.0), Entry::Num(0.0)],
            beta4: vec![Entry::Num(0.0), Entry::Num(0.0)],
            a0: vec![vec![Entry::Num(0.0); 2]; 2],
            a1: vec![vec![Entry::Num(0.0); 2]; 2],
            a2: vec![vec![Entry::Num(0.0); 2]; 2],
            b0: vec![vec![Entry::Num(0.0); 2]; 2],
            b1: vec![vec![Entry::Num(0.0); 2]; 2],
            b2: vec![vec![Entry::Num(0.0); 2]; 2],
        };
        let errs = validate(&raw).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, TableauError::DimensionMismatch { name, .. } if name == "beta1")));
    }

    #[test]
    fn dri1_plan_flags() {
        let plan = compile(&families::dri1());
        assert!(plan.a2_zero);
        assert_eq!(plan.hat_trivial, vec![true, false, false]);
        assert!(plan.hat_reuses_initial(0, 1));
        assert!(plan.hat_reuses_initial(1, 1));
        assert!(plan.hat_reuses_initial(2, 1));
        assert!(!plan.hat_reuses_initial(1, 2));
        assert!(plan.hat_reuses_initial(0, 2));
    }

    #[test]
    fn all_zero_tableau_plan_is_fully_trivial() {
        let z = vec![vec![0.0]];
        let t = ButcherTableau::new(
            "zero",
            vec![1.0],
            vec![0.0],
            vec![0.0],
            vec![0.0],
            vec![0.0],
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z,
        )
        .unwrap();
        let plan = compile(&t);
        assert!(plan.a2_zero);
        assert!(plan.hat_trivial.iter().all(|&x| x));
    }

    #[test]
    fn m_variant_plan_flags() {
        let plan = compile(&families::dri1_m_variant().unwrap());
        assert!(!plan.a2_zero);
        assert_eq!(plan.hat_trivial, vec![false, false, false]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// c-vectors are exactly the left-to-right row sums.
        #[test]
        fn node_vectors_are_row_sums(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = rng.gen_range(1..=4usize);
            let mat = |rng: &mut rand_chacha::ChaCha8Rng, lower: bool| -> Vec<Vec<f64>> {
                (0..s)
                    .map(|i| {
                        (0..s)
                            .map(|j| {
                                if lower && j >= i {
                                    0.0
                                } else {
                                    rng.gen_range(-2.0..2.0)
                                }
                            })
                            .collect()
                    })
                    .collect()
            };
            let a0 = mat(&mut rng, true);
            let a1 = mat(&mut rng, true);
            let a2 = mat(&mut rng, false);
            let b0 = mat(&mut rng, true);
            let b1 = mat(&mut rng, true);
            let b2 = mat(&mut rng, false);
            let vecr = |rng: &mut rand_chacha::ChaCha8Rng| {
                (0..s).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>()
            };
            let t = ButcherTableau::new(
                "random",
                vecr(&mut rng),
                vecr(&mut rng),
                vecr(&mut rng),
                vecr(&mut rng),
                vecr(&mut rng),
                a0.clone(),
                a1.clone(),
                a2.clone(),
                b0,
                b1,
                b2,
            )
            .unwrap();
            for i in 0..s {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += a0[i][j];
                }
                prop_assert_eq!(t.c0[i], acc);
                let mut acc = 0.0;
                for j in 0..s {
                    acc += a2[i][j];
                }
                prop_assert_eq!(t.c2[i], acc);
            }
            let _ = a1;
        }
    }
}
