//! Sampling-based estimates of conditional variances, independent of the
//! Schur-complement algebra in [`crate::gaussian`].

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Quadrature};

/// Rows drawn from one RNG stream.
pub const CHUNK_ROWS: usize = 1 << 16;
/// Minimum average number of samples per bin.
pub const MIN_SAMPLES_PER_BIN: usize = 100;
/// Upper limit on the default bin count per conditioner.
pub const MAX_DEFAULT_BINS: usize = 1000;

const DUMP_MAGIC: &[u8; 5] = b"CVMC1";

/// Phase-space samples, one row of `2 * num_modes` quadratures per draw.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub num_modes: usize,
    /// Seed the batch was drawn with; batches read back from a dump carry 0.
    pub seed: u64,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn width(&self) -> usize {
        2 * self.num_modes
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.width()..(k + 1) * self.width()]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Values of one quadrature across all samples.
    pub fn quadrature(&self, q: Quadrature) -> Result<Vec<f64>> {
        if q.mode >= self.num_modes {
            return Err(Error::ModeOutOfRange {
                mode: q.mode,
                num_modes: self.num_modes,
            });
        }
        let (c, s) = (q.angle.cos(), q.angle.sin());
        Ok(self
            .data
            .chunks_exact(self.width())
            .map(|row| c * row[2 * q.mode] + s * row[2 * q.mode + 1])
            .collect())
    }

    pub fn mean(&self) -> DVector<f64> {
        let n = self.count() as f64;
        let mut m = DVector::zeros(self.width());
        for row in self.data.chunks_exact(self.width()) {
            for (a, v) in row.iter().enumerate() {
                m[a] += v;
            }
        }
        m / n
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let w = self.width();
        let mean = self.mean();
        let mut c = DMatrix::zeros(w, w);
        for row in self.data.chunks_exact(w) {
            for a in 0..w {
                let da = row[a] - mean[a];
                for b in a..w {
                    c[(a, b)] += da * (row[b] - mean[b]);
                }
            }
        }
        for a in 0..w {
            for b in 0..a {
                c[(a, b)] = c[(b, a)];
            }
        }
        c / (self.count() as f64 - 1.0)
    }

    /// Writes the little-endian dump: magic, `u32` mode count, `u64` row
    /// count, then the rows as `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.num_modes as u32).to_le_bytes())?;
        w.write_all(&(self.count() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::InvalidParameter("not a CVMC1 sample dump".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let num_modes = u32::from_le_bytes(u32buf) as usize;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let count = u64::from_le_bytes(u64buf) as usize;
        if num_modes == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut bytes = vec![0u8; count * 2 * num_modes * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        Ok(Self {
            num_modes,
            seed: 0,
            data,
        })
    }
}

/// Lower-triangular-up-to-permutation factor `L` with `cov = L L^T`,
/// tolerant of rank deficiency.
fn pivoted_cholesky(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    let mut a = cov.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = DMatrix::zeros(n, n);
    let scale = cov.diagonal().amax().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (p, dmax) = (k..n)
            .map(|i| (i, a[(i, i)]))
            .fold((k, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if dmax <= 1e-14 * scale {
            break;
        }
        a.swap_rows(k, p);
        a.swap_columns(k, p);
        l.swap_rows(k, p);
        perm.swap(k, p);
        let pivot = dmax.sqrt();
        l[(k, k)] = pivot;
        for i in k + 1..n {
            l[(i, k)] = a[(i, k)] / pivot;
        }
        for i in k + 1..n {
            for j in k + 1..=i {
                let v = a[(i, j)] - l[(i, k)] * l[(j, k)];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    let mut out = DMatrix::zeros(n, n);
    for (row, &orig) in perm.iter().enumerate() {
        out.set_row(orig, &l.row(row));
    }
    out
}

/// Draws `count` i.i.d. phase-space points with the state's mean and
/// covariance. Rows are generated in chunks of [`CHUNK_ROWS`], chunk `k`
/// from stream `k` of a ChaCha8 generator seeded with `seed`, so the output
/// does not depend on thread scheduling.
pub fn sample_wigner(state: &GaussianState, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let phys = state.physicality();
    if !phys.physical {
        return Err(Error::NonPhysical(phys.min_eigenvalue));
    }
    let w = 2 * state.num_modes();
    let l = pivoted_cholesky(state.cov());
    let mean = state.mean().clone();
    let mut data = vec![0.0; count * w];
    data.par_chunks_mut(CHUNK_ROWS * w)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let mut z = vec![0.0; w];
            for row in out.chunks_exact_mut(w) {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for a in 0..w {
                    let mut v = mean[a];
                    for (b, zb) in z.iter().enumerate() {
                        v += l[(a, b)] * zb;
                    }
                    row[a] = v;
                }
            }
        });
    Ok(SampleBatch {
        num_modes: state.num_modes(),
        seed,
        data,
    })
}

/// An estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Two sampling estimates of a conditional variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    /// Pooled within-bin variance over quantile bins.
    pub binned: Estimate,
    /// Residual variance of a least-squares fit on the conditioners.
    pub regression: Estimate,
    pub bins_per_conditioner: usize,
}

/// Default quantile bins per conditioner: as many as keep
/// [`MIN_SAMPLES_PER_BIN`] samples per product bin, capped at
/// [`MAX_DEFAULT_BINS`].
pub fn default_bins(count: usize, num_conditioners: usize) -> usize {
    if num_conditioners == 0 {
        return 1;
    }
    let per_bin = count as f64 / MIN_SAMPLES_PER_BIN as f64;
    let mut b = per_bin.powf(1.0 / num_conditioners as f64).floor() as usize;
    // guard against powf rounding just above an exact root
    while b > 1 && b.pow(num_conditioners as u32) * MIN_SAMPLES_PER_BIN > count {
        b -= 1;
    }
    b.clamp(1, MAX_DEFAULT_BINS)
}

/// Quantile-bin index of every value.
fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let edges: Vec<f64> = (1..bins).map(|k| sorted[k * n / bins]).collect();
    values.iter().map(|v| edges.partition_point(|e| e <= v)).collect()
}

/// Conditional variance of `target` given `conditioners`, estimated from
/// samples. `bins` is the number of equal-population bins per conditioner;
/// `None` picks [`default_bins`].
pub fn empirical_conditional_variance(
    batch: &SampleBatch,
    target: Quadrature,
    conditioners: &[Quadrature],
    bins: Option<usize>,
) -> Result<ConditionalEstimate> {
    if conditioners.iter().any(|q| q.mode == target.mode) {
        return Err(Error::TargetInConditioners(target.mode));
    }
    let n = batch.count();
    let k = conditioners.len();
    let per_dim = bins.unwrap_or_else(|| default_bins(n, k)).max(1);
    let total_bins = per_dim.checked_pow(k as u32).unwrap_or(usize::MAX);
    if total_bins.saturating_mul(MIN_SAMPLES_PER_BIN) > n || n <= k + 1 {
        return Err(Error::InsufficientSamples {
            samples: n,
            bins: total_bins,
        });
    }
    let t = batch.quadrature(target)?;
    let cs = conditioners
        .iter()
        .map(|&q| batch.quadrature(q))
        .collect::<Result<Vec<_>>>()?;

    // product bin index
    let mut index = vec![0usize; n];
    for c in &cs {
        let b = quantile_bins(c, per_dim);
        for (idx, bi) in index.iter_mut().zip(b) {
            *idx = *idx * per_dim + bi;
        }
    }
    let mut counts = vec![0usize; total_bins];
    let mut sums = vec![0.0; total_bins];
    for (&i, &v) in index.iter().zip(&t) {
        counts[i] += 1;
        sums[i] += v;
    }
    let mut ss = 0.0;
    for (&i, &v) in index.iter().zip(&t) {
        let d = v - sums[i] / counts[i] as f64;
        ss += d * d;
    }
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    let dof = (n - occupied) as f64;
    let binned = ss / dof;

    let regression = regression_residual_variance(&t, &cs);
    let reg_dof = (n - k - 1) as f64;
    Ok(ConditionalEstimate {
        binned: Estimate {
            value: binned,
            se: binned * (2.0 / dof).sqrt(),
        },
        regression: Estimate {
            value: regression,
            se: regression * (2.0 / reg_dof).sqrt(),
        },
        bins_per_conditioner: per_dim,
    })
}

fn regression_residual_variance(t: &[f64], cs: &[Vec<f64>]) -> f64 {
    let n = t.len();
    let k = cs.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let mt = mean(t);
    let mc: Vec<f64> = cs.iter().map(|c| mean(c)).collect();
    let mut sxx = DMatrix::zeros(k, k);
    let mut sxt = DVector::zeros(k);
    let mut stt = 0.0;
    for r in 0..n {
        let dt = t[r] - mt;
        stt += dt * dt;
        for a in 0..k {
            let da = cs[a][r] - mc[a];
            sxt[a] += da * dt;
            for b in 0..=a {
                sxx[(a, b)] += da * (cs[b][r] - mc[b]);
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            sxx[(b, a)] = sxx[(a, b)];
        }
    }
    let explained = if k == 0 {
        0.0
    } else {
        crate::gaussian::pinv_quadratic_form(&sxx, &sxt)
    };
    (stt - explained) / (n - k - 1) as f64
}

/// Sample variance of `sum_k coeff_k q_k`.
pub fn combination_variance(batch: &SampleBatch, terms: &[(Quadrature, f64)]) -> Result<Estimate> {
    let n = batch.count();
    if n < 2 {
        return Err(Error::InsufficientSamples { samples: n, bins: 1 });
    }
    let mut combo = vec![0.0; n];
    for &(q, coeff) in terms {
        for (acc, v) in combo.iter_mut().zip(batch.quadrature(q)?) {
            *acc += coeff * v;
        }
    }
    let mean = combo.iter().sum::<f64>() / n as f64;
    let var = combo.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(Estimate {
        value: var,
        se: var * (2.0 / (n - 1) as f64).sqrt(),
    })
}

/// One line of the sampling-versus-exact comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub quantity: String,
    pub exact: f64,
    pub regression: Estimate,
    pub binned: Option<Estimate>,
    /// `(regression - exact) / se`.
    pub z: f64,
}

/// Pass/fail of one sampling property, with the margin in standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McCheck {
    pub name: String,
    pub passed: bool,
    pub worst_margin_sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub count: usize,
    pub seed: u64,
    pub rows: Vec<McRow>,
    pub checks: Vec<McCheck>,
}

impl McReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

/// Compares sampled conditional variances of mode `b` given `a`, `c` and
/// both against the exact Schur complements, and runs the sampling
/// property checks at `sigma` standard errors.
pub fn validate_against_state(
    state: &GaussianState,
    (b, a, c): (usize, usize, usize),
    count: usize,
    seed: u64,
    sigma: f64,
) -> Result<McReport> {
    let batch = sample_wigner(state, count, seed)?;
    let x = Quadrature::x;
    let p = Quadrature::p;
    let cases: [(&str, Quadrature, Vec<Quadrature>); 6] = [
        ("Var(X_B|X_A)", x(b), vec![x(a)]),
        ("Var(P_B|P_A)", p(b), vec![p(a)]),
        ("Var(X_B|X_C)", x(b), vec![x(c)]),
        ("Var(P_B|P_C)", p(b), vec![p(c)]),
        ("Var(X_B|X_A,X_C)", x(b), vec![x(a), x(c)]),
        ("Var(P_B|P_A,P_C)", p(b), vec![p(a), p(c)]),
    ];
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for (label, target, conds) in &cases {
        let exact = state.conditional_variance(*target, conds)?;
        let est = empirical_conditional_variance(&batch, *target, conds, None)?;
        rows.push(McRow {
            quantity: label.to_string(),
            exact,
            regression: est.regression,
            binned: Some(est.binned),
            z: (est.regression.value - exact) / est.regression.se,
        });
        estimates.push((exact, est));
    }
    let s_exact = (rows[4].exact * rows[5].exact).sqrt();
    let (vx, vp) = (rows[4].regression, rows[5].regression);
    let s_emp = (vx.value * vp.value).sqrt();
    let s_se = 0.5 * s_emp * ((vx.se / vx.value).powi(2) + (vp.se / vp.value).powi(2)).sqrt();
    rows.push(McRow {
        quantity: "S_coll".into(),
        exact: s_exact,
        regression: Estimate { value: s_emp, se: s_se },
        binned: None,
        z: (s_emp - s_exact) / s_se,
    });

    let mut checks = Vec::new();

    let margin = estimates
        .iter()
        .map(|(exact, est)| (est.binned.value - exact) / est.binned.se + sigma)
        .fold(f64::INFINITY, f64::min);
    checks.push(McCheck {
        name: "binned estimate not below the exact value".into(),
        passed: margin >= 0.0,
        worst_margin_sigma: margin,
    });

    let mut margin = f64::INFINITY;
    for (target, partner) in [(x(b), x(a)), (x(b), x(c))] {
        let cv = empirical_conditional_variance(&batch, target, &[partner], None)?.regression;
        for k in 0..=40 {
            let g = -4.0 + 0.2 * k as f64;
            let combo = combination_variance(&batch, &[(target, 1.0), (partner, -g)])?;
            let se = combo.se.hypot(cv.se);
            margin = margin.min((combo.value - cv.value) / se + sigma);
        }
    }
    checks.push(McCheck {
        name: "Var(X_B - g X_A) above the conditional variance".into(),
        passed: margin >= 0.0,
        worst_margin_sigma: margin,
    });

    let mut margin = f64::INFINITY;
    for (single, both) in [(0, 4), (2, 4), (1, 5), (3, 5)] {
        let (lo, hi) = (estimates[both].1.regression, estimates[single].1.regression);
        margin = margin.min((hi.value - lo.value) / lo.se.hypot(hi.se) + sigma);
    }
    checks.push(McCheck {
        name: "adding a conditioner never increases the variance".into(),
        passed: margin >= 0.0,
        worst_margin_sigma: margin,
    });

    Ok(McReport {
        count,
        seed,
        rows,
        checks,
    })
}
