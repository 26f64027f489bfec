//! Counter-based random streams and the discrete weak increments.
//!
//! Every simulated path owns an independent stream addressed by
//! `(master_seed, path_index)`, so results do not depend on how paths are
//! distributed over threads.
//!
//! The weak increments per step and noise component k are
//!
//! * `Ihat_k`: three-point, +-sqrt(3h) with probability 1/6 each and 0
//!   with probability 2/3;
//! * `Itilde_k`: two-point, +-sqrt(h) with probability 1/2 each, sampled
//!   only when m > 1 (the mixed increments below never need it for m = 1).
//!
//! The mixed increment `Ihat_(k,l)` is assembled from these by
//! [`ihat_pair`]; it always reads the tilde variable of the smaller index.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RngError {
    #[error("mixed increment index ({k},{l}) out of range for m = {m}")]
    IndexOutOfRange { k: usize, l: usize, m: usize },
    #[error("support enumeration requires m <= {max}, got m = {m}")]
    SupportTooLarge { m: usize, max: usize },
}

/// One independent random stream, addressed by master seed and path index.
///
/// Streams with the same address produce the same sequence on every
/// platform and thread schedule.
pub struct RandomStream {
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(path_index);
        RandomStream { inner }
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// The increments of one step: `ihat[k]` three-point scaled by sqrt(3h),
/// `itilde[k]` two-point scaled by sqrt(h). `itilde` stays empty for
/// m = 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeakIncrements {
    pub h: f64,
    pub ihat: Vec<f64>,
    pub itilde: Vec<f64>,
}

impl WeakIncrements {
    pub fn with_capacity(m: usize) -> Self {
        WeakIncrements {
            h: 0.0,
            ihat: Vec::with_capacity(m),
            itilde: Vec::with_capacity(m),
        }
    }
}

/// Maps one uniform draw to the three-point increment for step size h.
/// The outer sixths map to -+sqrt(3h), the middle two thirds to 0.
pub fn three_point_from_uniform(u: f64, h: f64) -> f64 {
    let s3 = (3.0 * h).sqrt();
    if u < 1.0 / 6.0 {
        -s3
    } else if u >= 5.0 / 6.0 {
        s3
    } else {
        0.0
    }
}

/// Maps one uniform draw to the two-point increment for step size h.
pub fn two_point_from_uniform(u: f64, h: f64) -> f64 {
    let sh = h.sqrt();
    if u < 0.5 {
        -sh
    } else {
        sh
    }
}

/// Draws the increments for one step into a reusable buffer. Consumes
/// exactly m uniforms when m = 1 and 2m uniforms otherwise.
pub fn sample_increments_into(
    stream: &mut RandomStream,
    m: usize,
    h: f64,
    inc: &mut WeakIncrements,
) {
    inc.h = h;
    inc.ihat.clear();
    inc.itilde.clear();
    for _ in 0..m {
        let u = stream.uniform();
        inc.ihat.push(three_point_from_uniform(u, h));
    }
    if m > 1 {
        for _ in 0..m {
            let u = stream.uniform();
            inc.itilde.push(two_point_from_uniform(u, h));
        }
    }
}

/// Draws the increments for one step.
pub fn sample_increments(stream: &mut RandomStream, m: usize, h: f64) -> WeakIncrements {
    let mut inc = WeakIncrements::with_capacity(m);
    sample_increments_into(stream, m, h, &mut inc);
    inc
}

/// The mixed increment `Ihat_(k,l)` (0-based indices):
///
/// * `k = l`: (ihat_k^2 - h) / 2;
/// * `k < l`: (ihat_k ihat_l - sqrt(h) itilde_k) / 2;
/// * `k > l`: (ihat_k ihat_l + sqrt(h) itilde_l) / 2.
pub fn ihat_pair(k: usize, l: usize, inc: &WeakIncrements) -> Result<f64, RngError> {
    let m = inc.ihat.len();
    if k >= m || l >= m {
        return Err(RngError::IndexOutOfRange { k, l, m });
    }
    if k == l {
        Ok(0.5 * (inc.ihat[k] * inc.ihat[k] - inc.h))
    } else if k < l {
        Ok(0.5 * (inc.ihat[k] * inc.ihat[l] - inc.h.sqrt() * inc.itilde[k]))
    } else {
        Ok(0.5 * (inc.ihat[k] * inc.ihat[l] + inc.h.sqrt() * inc.itilde[l]))
    }
}

/// Enumerates the full joint support of one step's increments with exact
/// probabilities: 6 outcomes per noise component (3 for ihat times 2 for
/// itilde), hence 6^m in total. The tilde component is always included,
/// even for m = 1 where the integrator never reads it.
///
/// Only small m are allowed; the support grows too fast beyond m = 6.
pub fn enumerate_support(m: usize, h: f64) -> Result<Vec<(WeakIncrements, f64)>, RngError> {
    const MAX_M: usize = 6;
    if m > MAX_M {
        return Err(RngError::SupportTooLarge { m, max: MAX_M });
    }
    let s3 = (3.0 * h).sqrt();
    let sh = h.sqrt();
    let ihat_opts = [(-s3, 1.0 / 6.0), (0.0, 2.0 / 3.0), (s3, 1.0 / 6.0)];
    let itilde_opts = [(-sh, 0.5), (sh, 0.5)];
    let total = 6usize.pow(m as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut ihat = vec![0.0; m];
        let mut itilde = vec![0.0; m];
        let mut p = 1.0;
        let mut rem = idx;
        for k in 0..m {
            let digit = rem % 6;
            rem /= 6;
            let (iv, ip) = ihat_opts[digit % 3];
            let (tv, tp) = itilde_opts[digit / 3];
            ihat[k] = iv;
            itilde[k] = tv;
            p *= ip * tp;
        }
        out.push((WeakIncrements { h, ihat, itilde }, p));
    }
    Ok(out)
}
