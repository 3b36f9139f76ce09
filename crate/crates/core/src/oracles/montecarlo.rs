//! Seeded Monte-Carlo estimators.
//!
//! Work is split into `stream_count` fixed chunks, each driven by its own
//! ChaCha8 stream, and partial results are merged in stream order. The
//! result is therefore bit-identical for a given [`RngSpec`] no matter how
//! many threads run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::{covariance_exponential_min2, covariance_uniform};
use crate::discrete::{mi_discrete_exact, mi_from_table, DiscreteDist};
use crate::error::{domain, Result};

use super::{OracleKind, OracleReport};

const MIN_SAMPLES: u64 = 1_000;
const BOOTSTRAP_RESAMPLES: u64 = 200;
// Bootstrap resamples draw from streams above this offset so they never
// collide with sampling streams.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_count: u64,
}

impl Default for RngSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            stream_count: 64,
        }
    }
}

impl RngSpec {
    pub fn new(seed: u64, stream_count: u64) -> Result<Self> {
        if stream_count == 0 {
            return Err(domain("stream_count must be ≥ 1"));
        }
        Ok(Self { seed, stream_count })
    }

    pub fn stream(&self, i: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i);
        rng
    }

    /// Number of samples assigned to stream `i` out of `total`.
    pub fn chunk(&self, total: u64, i: u64) -> u64 {
        total / self.stream_count + u64::from(i < total % self.stream_count)
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

fn draw_index(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&f| f <= u).min(cdf.len() - 1)
}

/// Plug-in MI from simulated `(X_(r), X_(m))` pairs with a bootstrap
/// standard error (multinomial resampling of the cell counts).
pub fn mc_mi_discrete(
    n: u64,
    dist: &DiscreteDist,
    r: u64,
    m: u64,
    samples: u64,
    spec: RngSpec,
) -> Result<OracleReport> {
    check_samples(samples)?;
    let closed = mi_discrete_exact(n, dist, r, m)?;
    let k = dist.len();
    let cdf = dist.cdf();
    let (r, m) = (r as usize, m as usize);

    let per_stream: Vec<Vec<u64>> = (0..spec.stream_count)
        .into_par_iter()
        .map(|s| {
            let mut rng = spec.stream(s);
            let mut counts = vec![0u64; k * k];
            let mut draws = vec![0usize; n as usize];
            for _ in 0..spec.chunk(samples, s) {
                for d in draws.iter_mut() {
                    *d = draw_index(&cdf, rng.random::<f64>());
                }
                draws.sort_unstable();
                counts[draws[r - 1] * k + draws[m - 1]] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; k * k];
    for c in &per_stream {
        for (acc, x) in counts.iter_mut().zip(c) {
            *acc += x;
        }
    }

    let to_table = |c: &[u64]| -> Vec<Vec<f64>> {
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| c[i * k + j] as f64 / samples as f64)
                    .collect()
            })
            .collect()
    };
    let estimate = mi_from_table(&to_table(&counts));

    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut rng = spec.stream(BOOTSTRAP_STREAM_BASE + b);
            let mut left = samples;
            let mut mass_left = samples;
            let resampled: Vec<u64> = counts
                .iter()
                .map(|&c| {
                    if c == 0 || left == 0 {
                        return 0;
                    }
                    let x = if c >= mass_left {
                        left
                    } else {
                        let p = c as f64 / mass_left as f64;
                        Binomial::new(left, p)
                            .expect("valid binomial")
                            .sample(&mut rng)
                    };
                    left -= x;
                    mass_left -= c;
                    x
                })
                .collect();
            mi_from_table(&to_table(&resampled))
        })
        .collect();
    let mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let var = boot.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64;

    Ok(
        OracleReport::new(closed, estimate, OracleKind::MonteCarlo, samples)
            .with_stochastic(spec.seed, var.sqrt()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CovarianceFamily {
    Uniform,
    Exponential { lambda: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
struct CoMoment {
    count: u64,
    mean_x: f64,
    mean_y: f64,
    c_xy: f64,
}

impl CoMoment {
    fn push(&mut self, x: f64, y: f64) {
        self.count += 1;
        let nf = self.count as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / nf;
        self.mean_y += (y - self.mean_y) / nf;
        self.c_xy += dx * (y - self.mean_y);
    }

    fn merge(&self, o: &CoMoment) -> CoMoment {
        if self.count == 0 {
            return *o;
        }
        if o.count == 0 {
            return *self;
        }
        let count = self.count + o.count;
        let (na, nb, nf) = (self.count as f64, o.count as f64, count as f64);
        let dx = o.mean_x - self.mean_x;
        let dy = o.mean_y - self.mean_y;
        CoMoment {
            count,
            mean_x: self.mean_x + dx * nb / nf,
            mean_y: self.mean_y + dy * nb / nf,
            c_xy: self.c_xy + o.c_xy + dx * dy * na * nb / nf,
        }
    }

    fn covariance(&self) -> f64 {
        self.c_xy / (self.count as f64 - 1.0)
    }
}

/// Sample covariance of `(X_(r), X_(m))` with a leave-one-stream-out
/// jackknife standard error.
pub fn mc_covariance(
    family: CovarianceFamily,
    n: u64,
    r: u64,
    m: u64,
    samples: u64,
    spec: RngSpec,
) -> Result<OracleReport> {
    check_samples(samples)?;
    if spec.stream_count < 2 {
        return Err(domain("the jackknife needs at least 2 streams"));
    }
    let closed = match family {
        CovarianceFamily::Uniform => covariance_uniform(n, r, m)?,
        CovarianceFamily::Exponential { lambda } => {
            if (r, m) != (1, 2) {
                return Err(domain(format!(
                    "exponential covariance is available for (r, m) = (1, 2) only, got ({r}, {m})"
                )));
            }
            covariance_exponential_min2(n, lambda)?
        }
    };
    let exp = match family {
        CovarianceFamily::Exponential { lambda } => {
            Some(Exp::new(lambda).map_err(|e| domain(e.to_string()))?)
        }
        CovarianceFamily::Uniform => None,
    };
    let (r, m) = (r as usize, m as usize);

    let parts: Vec<CoMoment> = (0..spec.stream_count)
        .into_par_iter()
        .map(|s| {
            let mut rng = spec.stream(s);
            let mut buf = vec![0.0f64; n as usize];
            let mut acc = CoMoment::default();
            for _ in 0..spec.chunk(samples, s) {
                match &exp {
                    Some(e) => buf.iter_mut().for_each(|x| *x = e.sample(&mut rng)),
                    None => buf.iter_mut().for_each(|x| *x = rng.random::<f64>()),
                }
                buf.sort_unstable_by(f64::total_cmp);
                acc.push(buf[r - 1], buf[m - 1]);
            }
            acc
        })
        .collect();

    let total = parts.iter().fold(CoMoment::default(), |a, p| a.merge(p));
    let g = parts.len();
    let leave_out: Vec<f64> = (0..g)
        .map(|j| {
            parts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .fold(CoMoment::default(), |a, (_, p)| a.merge(p))
                .covariance()
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / g as f64;
    let var =
        leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g as f64 - 1.0) / g as f64;

    Ok(
        OracleReport::new(closed, total.covariance(), OracleKind::MonteCarlo, samples)
            .with_stochastic(spec.seed, var.sqrt()),
    )
}
