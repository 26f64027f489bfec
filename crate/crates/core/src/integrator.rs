//! One-step and whole-path execution of the explicit SRK scheme.
//!
//! A [`Stepper`] binds an [`ExecutionPlan`] to an [`SdeProblem`] and owns
//! all scratch storage, so repeated steps allocate nothing. Stage values
//! are computed in dependency order; every drift value is computed once
//! per step and every diffusion value once per (stage, column). The hat
//! stages additionally reuse the stage-one diffusion values whenever the
//! plan proves the hat state collapses to the current state, which is
//! what keeps the per-step effort linear in the number of Wiener
//! processes.
//!
//! All dedup decisions are structural (exact zeros in the tableau), never
//! value comparisons at run time, so the evaluation counters are a pure
//! function of (tableau, d, m) and never depend on the random draws.

use crate::rng::{
    ihat_pair, sample_increments_into, RandomStream, RngError, WeakIncrements,
};
use crate::tableau::ExecutionPlan;
use serde::Serialize;
use std::ops::AddAssign;
use thiserror::Error;

type DriftFn = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
type DiffusionFn = Box<dyn Fn(usize, f64, &[f64], &mut [f64]) + Send + Sync>;

/// An autonomous-or-not Ito SDE dX = a dt + sum_k b^k dW_k with initial
/// state x0 at time t0. The diffusion is exposed column-wise; each call
/// to one column counts as one evaluation.
pub struct SdeProblem {
    pub name: String,
    pub d: usize,
    pub m: usize,
    pub t0: f64,
    pub x0: Vec<f64>,
    drift: DriftFn,
    diffusion: DiffusionFn,
}

impl std::fmt::Debug for SdeProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeProblem")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("m", &self.m)
            .field("t0", &self.t0)
            .field("x0", &self.x0)
            .finish()
    }
}

impl SdeProblem {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        m: usize,
        t0: f64,
        x0: Vec<f64>,
        drift: DriftFn,
        diffusion: DiffusionFn,
    ) -> Self {
        assert!(d >= 1, "state dimension must be at least 1");
        assert!(m >= 1, "noise dimension must be at least 1");
        assert_eq!(x0.len(), d, "x0 length must equal d");
        SdeProblem {
            name: name.into(),
            d,
            m,
            t0,
            x0,
            drift,
            diffusion,
        }
    }

    /// Writes a(t, x) into `out` (length d).
    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out)
    }

    /// Writes the diffusion column b^k(t, x) into `out` (length d);
    /// k is 0-based.
    pub fn diffusion_col(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(k, t, x, out)
    }
}

/// Function-evaluation and random-draw totals; the effort metric is the
/// plain sum of the three fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounters {
    pub drift_evals: u64,
    pub diffusion_evals: u64,
    pub rv_draws: u64,
}

impl AddAssign for EvalCounters {
    fn add_assign(&mut self, rhs: EvalCounters) {
        self.drift_evals += rhs.drift_evals;
        self.diffusion_evals += rhs.diffusion_evals;
        self.rv_draws += rhs.rv_draws;
    }
}

impl EvalCounters {
    pub fn total_effort(&self) -> u64 {
        self.drift_evals + self.diffusion_evals + self.rv_draws
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite state in {stage} at t = {t}")]
    NonFiniteState { t: f64, stage: String },
    #[error("step h = {h} does not divide [{t0}, {t_end}]: span/h = {ratio}")]
    GridMismatch {
        t0: f64,
        t_end: f64,
        h: f64,
        ratio: f64,
    },
    #[error(transparent)]
    Rng(#[from] RngError),
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn flatten(mat: &[Vec<f64>]) -> Vec<f64> {
    mat.iter().flat_map(|row| row.iter().copied()).collect()
}

/// Executes single steps of one scheme on one problem. Owns scratch
/// buffers sized for (s, d, m); construct once per worker and reuse.
pub struct Stepper<'a> {
    plan: &'a ExecutionPlan,
    problem: &'a SdeProblem,
    s: usize,
    d: usize,
    m: usize,
    // tableau matrices flattened row-major (s x s)
    a0f: Vec<f64>,
    a1f: Vec<f64>,
    a2f: Vec<f64>,
    b0f: Vec<f64>,
    b1f: Vec<f64>,
    b2f: Vec<f64>,
    /// stage takes part in the hat phase (beta3 or beta4 nonzero)
    active_hat: Vec<bool>,
    /// hat state of the stage equals y and reuses the stage-one value
    reuse: Vec<bool>,
    /// some hat stage actually reads the mixed increments
    needs_pairs: bool,
    // scratch: stage states and cached evaluations
    h0: Vec<f64>,   // s*d
    hk: Vec<f64>,   // s*m*d
    av: Vec<f64>,   // s*d
    bv: Vec<f64>,   // s*m*d
    hath: Vec<f64>, // d
    bhat: Vec<f64>, // d
    pmat: Vec<f64>, // m*m, Ihat_(k,l)/sqrt(h), diagonal unused
    ypath: Vec<f64>,
    ynext: Vec<f64>,
    inc_buf: WeakIncrements,
}

impl<'a> Stepper<'a> {
    pub fn new(plan: &'a ExecutionPlan, problem: &'a SdeProblem) -> Self {
        let t = &plan.tableau;
        let s = t.s;
        let d = problem.d;
        let m = problem.m;
        let active_hat: Vec<bool> = (0..s)
            .map(|i| t.beta3[i] != 0.0 || t.beta4[i] != 0.0)
            .collect();
        let reuse: Vec<bool> = (0..s).map(|i| plan.hat_reuses_initial(i, m)).collect();
        let needs_pairs = m > 1
            && (0..s).any(|i| active_hat[i] && !reuse[i] && !plan.b2_row_zero[i]);
        Stepper {
            plan,
            problem,
            s,
            d,
            m,
            a0f: flatten(&t.a0),
            a1f: flatten(&t.a1),
            a2f: flatten(&t.a2),
            b0f: flatten(&t.b0),
            b1f: flatten(&t.b1),
            b2f: flatten(&t.b2),
            active_hat,
            reuse,
            needs_pairs,
            h0: vec![0.0; s * d],
            hk: vec![0.0; s * m * d],
            av: vec![0.0; s * d],
            bv: vec![0.0; s * m * d],
            hath: vec![0.0; d],
            bhat: vec![0.0; d],
            pmat: vec![0.0; m * m],
            ypath: vec![0.0; d],
            ynext: vec![0.0; d],
            inc_buf: WeakIncrements::with_capacity(m),
        }
    }

    pub fn plan(&self) -> &ExecutionPlan {
        self.plan
    }

    pub fn problem(&self) -> &SdeProblem {
        self.problem
    }

    /// One step from (t, y) with the given increments; writes the next
    /// state into `out` and bumps the evaluation counters. Random draws
    /// are counted where the increments are sampled, not here.
    pub fn step(
        &mut self,
        t: f64,
        y: &[f64],
        inc: &WeakIncrements,
        counters: &mut EvalCounters,
        out: &mut [f64],
    ) -> Result<(), SimError> {
        let (s, d, m) = (self.s, self.d, self.m);
        assert_eq!(y.len(), d);
        assert_eq!(out.len(), d);
        assert_eq!(inc.ihat.len(), m);
        let h = inc.h;
        let sqrt_h = h.sqrt();
        let plan = self.plan;
        let tab = &plan.tableau;
        let problem = self.problem;

        // Stage sweep: H_i^(0) then its drift value, then H_i^(k) and its
        // diffusion value for every column k. Strict lower triangularity
        // guarantees all referenced values are already present.
        for i in 0..s {
            let base = i * d;
            self.h0[base..base + d].copy_from_slice(y);
            for j in 0..i {
                let a = self.a0f[i * s + j];
                if a != 0.0 {
                    let c = h * a;
                    for r in 0..d {
                        self.h0[base + r] += c * self.av[j * d + r];
                    }
                }
            }
            for j in 0..i {
                let b = self.b0f[i * s + j];
                if b != 0.0 {
                    for l in 0..m {
                        let c = b * inc.ihat[l];
                        let bb = (j * m + l) * d;
                        for r in 0..d {
                            self.h0[base + r] += c * self.bv[bb + r];
                        }
                    }
                }
            }
            if !all_finite(&self.h0[base..base + d]) {
                return Err(SimError::NonFiniteState {
                    t,
                    stage: format!("H0[{}]", i + 1),
                });
            }
            {
                let (h0, av) = (&self.h0, &mut self.av);
                problem.drift(t + tab.c0[i] * h, &h0[base..base + d], &mut av[base..base + d]);
            }
            counters.drift_evals += 1;

            for k in 0..m {
                let kb = (i * m + k) * d;
                self.hk[kb..kb + d].copy_from_slice(y);
                for j in 0..i {
                    let a = self.a1f[i * s + j];
                    if a != 0.0 {
                        let c = h * a;
                        for r in 0..d {
                            self.hk[kb + r] += c * self.av[j * d + r];
                        }
                    }
                }
                for j in 0..i {
                    let b = self.b1f[i * s + j];
                    if b != 0.0 {
                        let c = sqrt_h * b;
                        let bb = (j * m + k) * d;
                        for r in 0..d {
                            self.hk[kb + r] += c * self.bv[bb + r];
                        }
                    }
                }
                if !all_finite(&self.hk[kb..kb + d]) {
                    return Err(SimError::NonFiniteState {
                        t,
                        stage: format!("H{}[{}]", k + 1, i + 1),
                    });
                }
                {
                    let (hk, bv) = (&self.hk, &mut self.bv);
                    problem.diffusion_col(
                        k,
                        t + tab.c1[i] * h,
                        &hk[kb..kb + d],
                        &mut bv[kb..kb + d],
                    );
                }
                counters.diffusion_evals += 1;
            }
        }

        // Update: drift part, then the beta1/beta2 diffusion part.
        out.copy_from_slice(y);
        for i in 0..s {
            if tab.alpha[i] != 0.0 {
                let c = tab.alpha[i] * h;
                for r in 0..d {
                    out[r] += c * self.av[i * d + r];
                }
            }
        }
        for k in 0..m {
            let ihk = inc.ihat[k];
            let diag = ihat_pair(k, k, inc)? / sqrt_h;
            for i in 0..s {
                let w = tab.beta1[i] * ihk + tab.beta2[i] * diag;
                let bb = (i * m + k) * d;
                for r in 0..d {
                    out[r] += w * self.bv[bb + r];
                }
            }
        }

        // Hat phase: beta3/beta4 terms against diffusion values at the
        // hat states. Trivial hat states reuse the stage-one values.
        if self.active_hat.iter().any(|&x| x) {
            if self.needs_pairs {
                for k in 0..m {
                    for l in 0..m {
                        if l != k {
                            self.pmat[k * m + l] = ihat_pair(k, l, inc)? / sqrt_h;
                        }
                    }
                }
            }
            for i in 0..s {
                if !self.active_hat[i] {
                    continue;
                }
                for k in 0..m {
                    let w = tab.beta3[i] * inc.ihat[k] + tab.beta4[i] * sqrt_h;
                    if self.reuse[i] {
                        let bb = k * d;
                        for r in 0..d {
                            out[r] += w * self.bv[bb + r];
                        }
                    } else {
                        self.hath.copy_from_slice(y);
                        for j in 0..s {
                            let a = self.a2f[i * s + j];
                            if a != 0.0 {
                                let c = h * a;
                                for r in 0..d {
                                    self.hath[r] += c * self.av[j * d + r];
                                }
                            }
                        }
                        for j in 0..s {
                            let b = self.b2f[i * s + j];
                            if b != 0.0 {
                                for l in 0..m {
                                    if l == k {
                                        continue;
                                    }
                                    let c = b * self.pmat[k * m + l];
                                    let bb = (j * m + l) * d;
                                    for r in 0..d {
                                        self.hath[r] += c * self.bv[bb + r];
                                    }
                                }
                            }
                        }
                        if !all_finite(&self.hath) {
                            return Err(SimError::NonFiniteState {
                                t,
                                stage: format!("Hhat{}[{}]", k + 1, i + 1),
                            });
                        }
                        {
                            let (hath, bhat) = (&self.hath, &mut self.bhat);
                            problem.diffusion_col(k, t + tab.c2[i] * h, hath, bhat);
                        }
                        counters.diffusion_evals += 1;
                        for r in 0..d {
                            out[r] += w * self.bhat[r];
                        }
                    }
                }
            }
        }

        if !all_finite(out) {
            return Err(SimError::NonFiniteState {
                t,
                stage: "update".to_string(),
            });
        }
        Ok(())
    }
}

/// Integrates one path on the uniform grid from the problem's t0 to
/// t_end and returns the functional of the final state. The span must be
/// an integer multiple of h within 1e-9 relative to one step.
pub fn integrate_path(
    stepper: &mut Stepper<'_>,
    f: &dyn Fn(&[f64]) -> f64,
    t_end: f64,
    h: f64,
    stream: &mut RandomStream,
    counters: &mut EvalCounters,
) -> Result<f64, SimError> {
    let t0 = stepper.problem.t0;
    let d = stepper.d;
    let m = stepper.m;
    let ratio = (t_end - t0) / h;
    let n = ratio.round();
    if !(n >= 1.0) || (ratio - n).abs() > 1e-9 {
        return Err(SimError::GridMismatch {
            t0,
            t_end,
            h,
            ratio,
        });
    }
    let n = n as u64;
    let mut y = std::mem::take(&mut stepper.ypath);
    let mut ynext = std::mem::take(&mut stepper.ynext);
    let mut inc = std::mem::take(&mut stepper.inc_buf);
    y.clear();
    y.extend_from_slice(&stepper.problem.x0);
    ynext.clear();
    ynext.resize(d, 0.0);
    let mut failure = None;
    for step_idx in 0..n {
        let t = t0 + step_idx as f64 * h;
        sample_increments_into(stream, m, h, &mut inc);
        counters.rv_draws += (inc.ihat.len() + inc.itilde.len()) as u64;
        if let Err(e) = stepper.step(t, &y, &inc, counters, &mut ynext) {
            failure = Some(e);
            break;
        }
        std::mem::swap(&mut y, &mut ynext);
    }
    let result = match failure {
        None => Ok(f(&y)),
        Some(e) => Err(e),
    };
    stepper.ypath = y;
    stepper.ynext = ynext;
    stepper.inc_buf = inc;
    result
}

fn nsteps_rec(
    stepper: &mut Stepper<'_>,
    support: &[(WeakIncrements, f64)],
    f: &dyn Fn(&[f64]) -> f64,
    t: f64,
    y: &[f64],
    h: f64,
    n_left: u64,
    counters: &mut EvalCounters,
) -> Result<f64, SimError> {
    if n_left == 0 {
        return Ok(f(y));
    }
    let mut out = vec![0.0; y.len()];
    let mut acc = 0.0;
    for (inc, p) in support {
        stepper.step(t, y, inc, counters, &mut out)?;
        let sub = nsteps_rec(stepper, support, f, t + h, &out, h, n_left - 1, counters)?;
        acc += p * sub;
    }
    Ok(acc)
}

/// Exact expectation of f after n steps of the scheme from (t0, y0) by
/// exhaustive enumeration of the increment support. Cost is 6^(m n)
/// steps; keep m and n small.
pub fn exact_expectation_nsteps(
    plan: &ExecutionPlan,
    problem: &SdeProblem,
    f: &dyn Fn(&[f64]) -> f64,
    t0: f64,
    y0: &[f64],
    h: f64,
    n_steps: u64,
) -> Result<f64, SimError> {
    let support = crate::rng::enumerate_support(problem.m, h)?;
    let mut stepper = Stepper::new(plan, problem);
    let mut counters = EvalCounters::default();
    nsteps_rec(&mut stepper, &support, f, t0, y0, h, n_steps, &mut counters)
}

/// Exact one-step expectation oracle: E[f(Y_1) | Y_0 = y].
pub fn exact_one_step_expectation(
    plan: &ExecutionPlan,
    problem: &SdeProblem,
    f: &dyn Fn(&[f64]) -> f64,
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<f64, SimError> {
    exact_expectation_nsteps(plan, problem, f, t, y, h, 1)
}
