//! Benchmark SDEs with known expectation functionals.
//!
//! Each problem bundles the SDE, the functional f whose expectation is
//! tracked, and the exact value of E f(X(t)) as a function of t, so the
//! Monte Carlo layer can report true mean errors. Exact reference
//! constants are kept as integer ratios and combined in double precision
//! at call time.

use crate::integrator::SdeProblem;

/// An SDE together with a scalar functional and its exact expectation.
pub struct BenchmarkProblem {
    pub sde: SdeProblem,
    pub functional: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub exact_expectation: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub t_end: f64,
    pub functional_desc: String,
}

impl std::fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("sde", &self.sde)
            .field("t_end", &self.t_end)
            .field("functional_desc", &self.functional_desc)
            .finish()
    }
}

fn rat(n: i64, d: i64) -> f64 {
    n as f64 / d as f64
}

/// Scalar SDE with solution sinh(t + W(t)): drift x/2 + sqrt(x^2+1),
/// diffusion sqrt(x^2+1), x0 = 0. Functional p(arsinh x) with
/// p(z) = z^3 - 6z^2 + 8z; E f(X(t)) = t^3 - 3t^2 + 2t.
pub fn problem_sinh() -> BenchmarkProblem {
    let sde = SdeProblem::new(
        "sinh",
        1,
        1,
        0.0,
        vec![0.0],
        Box::new(|_t, x, out| {
            out[0] = 0.5 * x[0] + (x[0] * x[0] + 1.0).sqrt();
        }),
        Box::new(|_k, _t, x, out| {
            out[0] = (x[0] * x[0] + 1.0).sqrt();
        }),
    );
    BenchmarkProblem {
        sde,
        functional: Box::new(|x| {
            let z = x[0].asinh();
            ((z - 6.0) * z + 8.0) * z
        }),
        exact_expectation: Box::new(|t| ((t - 3.0) * t + 2.0) * t),
        t_end: 2.0,
        functional_desc: "p(arsinh x), p(z) = z^3 - 6z^2 + 8z".to_string(),
    }
}

/// Two-dimensional linear SDE with noncommutative two-dimensional noise;
/// E (X^1(t))^2 = exp(-t).
pub fn problem_2d_noncommutative() -> BenchmarkProblem {
    let sq2 = 2.0_f64.sqrt();
    let a11 = -273.0 / 512.0;
    let a21 = -1.0 / 160.0;
    let a22 = -785.0 / 512.0 + sq2 / 8.0;
    let b1_22 = (1.0 - 2.0 * sq2) / 4.0;
    let sde = SdeProblem::new(
        "noncomm2d",
        2,
        2,
        0.0,
        vec![1.0, 1.0],
        Box::new(move |_t, x, out| {
            out[0] = a11 * x[0];
            out[1] = a21 * x[0] + a22 * x[1];
        }),
        Box::new(move |k, _t, x, out| {
            if k == 0 {
                out[0] = 0.25 * x[0];
                out[1] = b1_22 * x[1];
            } else {
                out[0] = x[0] / 16.0;
                out[1] = 0.1 * x[0] + x[1] / 16.0;
            }
        }),
    );
    BenchmarkProblem {
        sde,
        functional: Box::new(|x| x[0] * x[0]),
        exact_expectation: Box::new(|t| (-t).exp()),
        t_end: 10.0,
        functional_desc: "(x^1)^2".to_string(),
    }
}

/// Scalar nonlinear SDE driven by ten Wiener processes: drift x, columns
/// sigma_j sqrt(x^2 + kappa_j); E X(t)^4 has a closed three-term form.
pub fn problem_10_wiener() -> BenchmarkProblem {
    const SIG_KAPPA: [(f64, f64); 10] = [
        (1.0 / 10.0, 1.0 / 2.0),
        (1.0 / 15.0, 1.0 / 4.0),
        (1.0 / 20.0, 1.0 / 5.0),
        (1.0 / 25.0, 1.0 / 10.0),
        (1.0 / 40.0, 1.0 / 20.0),
        (1.0 / 25.0, 1.0 / 2.0),
        (1.0 / 20.0, 1.0 / 4.0),
        (1.0 / 15.0, 1.0 / 5.0),
        (1.0 / 20.0, 1.0 / 10.0),
        (1.0 / 25.0, 1.0 / 20.0),
    ];
    let sde = SdeProblem::new(
        "wiener10",
        1,
        10,
        0.0,
        vec![1.0],
        Box::new(|_t, x, out| out[0] = x[0]),
        Box::new(|k, _t, x, out| {
            let (sig, kap) = SIG_KAPPA[k];
            out[0] = sig * (x[0] * x[0] + kap).sqrt();
        }),
    );
    let c0 = rat(4_625_768_169, 73_570_420_483_600);
    let c1 = rat(-2_998_776_077_847, 113_706_563_209_000);
    let c2 = rat(80_235_120_932_849, 78_178_246_418_000);
    let r1 = rat(731_453, 360_000);
    let r2 = rat(251_453, 60_000);
    BenchmarkProblem {
        sde,
        functional: Box::new(|x| {
            let x2 = x[0] * x[0];
            x2 * x2
        }),
        exact_expectation: Box::new(move |t| c0 + c1 * (r1 * t).exp() + c2 * (r2 * t).exp()),
        t_end: 1.0,
        functional_desc: "x^4".to_string(),
    }
}

/// Geometric Brownian motion dX = a X dt + b X dW from x0 = 1 with the
/// second moment as functional: E X(t)^2 = exp((2a + b^2) t).
pub fn problem_gbm(a: f64, b: f64) -> BenchmarkProblem {
    let sde = SdeProblem::new(
        "gbm",
        1,
        1,
        0.0,
        vec![1.0],
        Box::new(move |_t, x, out| out[0] = a * x[0]),
        Box::new(move |_k, _t, x, out| out[0] = b * x[0]),
    );
    let rate = 2.0 * a + b * b;
    BenchmarkProblem {
        sde,
        functional: Box::new(|x| x[0] * x[0]),
        exact_expectation: Box::new(move |t| (rate * t).exp()),
        t_end: 1.0,
        functional_desc: "x^2".to_string(),
    }
}

pub const PROBLEM_NAMES: [&str; 4] = ["sinh", "noncomm2d", "wiener10", "gbm"];

/// Looks up a benchmark by its CLI name; `gbm` uses a = 0.5, b = 0.3.
pub fn by_name(name: &str) -> Option<BenchmarkProblem> {
    match name {
        "sinh" => Some(problem_sinh()),
        "noncomm2d" => Some(problem_2d_noncommutative()),
        "wiener10" => Some(problem_10_wiener()),
        "gbm" => Some(problem_gbm(0.5, 0.3)),
        _ => None,
    }
}
