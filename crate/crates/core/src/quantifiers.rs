//! Entanglement and steering quantifiers, and the monogamy residuals built
//! from them.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Quadrature, TwoModeReduced, PINV_RELATIVE_CUTOFF};
use crate::optimize::{
    argmin, golden_section, grid_then_golden, linspace, local_minima, periodic_grid_then_golden, Minimum,
};

/// Grid points per angle before golden-section refinement.
pub const ANGLE_GRID: usize = 64;
/// Bracket width at which angle refinement stops.
pub const ANGLE_TOL: f64 = 1e-10;
/// Bracket width, in `ln|g|`, at which gain refinement stops.
pub const GAIN_TOL: f64 = 1e-10;
/// Gains are searched over `|g|` in `[1 / GAIN_LIMIT, GAIN_LIMIT]`.
pub const GAIN_LIMIT: f64 = 1e6;
const GAIN_GRID: usize = 241;
/// `|c|` at or below this is treated as uncorrelated by [`g_sym`].
pub const UNCORRELATED_TOL: f64 = 1e-12;

/// `[Var(X_i - X_j) + Var(P_i + P_j)] / 4`.
pub fn duan_d(state: &GaussianState, i: usize, j: usize) -> Result<f64> {
    let red = state.reduced_two_mode(i, j)?;
    let (np, mp) = (state.cov()[(2 * i + 1, 2 * i + 1)], state.cov()[(2 * j + 1, 2 * j + 1)]);
    // Grouped so that swapping i and j gives a bit-identical result.
    Ok(((red.n + red.m) + (np + mp) + 2.0 * (red.c_p - red.c_x)) / 4.0)
}

/// [`duan_d`] after rotating mode `i` by `theta_i` and mode `j` by `theta_j`,
/// for states whose correlations are not in the standard phase convention.
pub fn duan_d_rotated(state: &GaussianState, i: usize, j: usize, theta_i: f64, theta_j: f64) -> Result<f64> {
    state.check_mode(j)?;
    let rotated = state
        .apply_phase_rotation(i, theta_i)?
        .apply_phase_rotation(j, theta_j)?;
    duan_d(&rotated, i, j)
}

/// `Δ(X_i - g_x X_j) Δ(P_i + g_p P_j) / (1 + g_x g_p)`.
pub fn ent_g(state: &GaussianState, i: usize, j: usize, g_x: f64, g_p: f64) -> Result<f64> {
    EntCost::new(state, i, j)?.eval(g_x, g_p)
}

/// Result of the single-gain minimization of [`ent_g`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntOptimum {
    pub ent: f64,
    pub g: f64,
}

/// Minimum of `ent_g(state, i, j, g, g)` over real `g`.
pub fn ent_opt(state: &GaussianState, i: usize, j: usize) -> Result<EntOptimum> {
    Ok(EntCost::new(state, i, j)?.minimize())
}

/// Variances entering the gain-weighted EPR product of an ordered pair.
#[derive(Clone, Copy, Debug)]
struct EntCost {
    nx: f64,
    mx: f64,
    cx: f64,
    np: f64,
    mp: f64,
    cp: f64,
}

impl EntCost {
    fn new(state: &GaussianState, i: usize, j: usize) -> Result<Self> {
        let red = state.reduced_two_mode(i, j)?;
        let c = state.cov();
        Ok(Self {
            nx: red.n,
            mx: red.m,
            cx: red.c_x,
            np: c[(2 * i + 1, 2 * i + 1)],
            mp: c[(2 * j + 1, 2 * j + 1)],
            cp: red.c_p,
        })
    }

    fn eval(&self, g_x: f64, g_p: f64) -> Result<f64> {
        if !g_x.is_finite() || !g_p.is_finite() {
            return Err(Error::NonFinite("gain"));
        }
        let denom = 1.0 + g_x * g_p;
        if denom <= 0.0 {
            return Err(Error::NonPositiveDenominator(denom));
        }
        Ok(self.product(g_x, g_p) / denom)
    }

    fn product(&self, g_x: f64, g_p: f64) -> f64 {
        let vx = self.nx - 2.0 * g_x * self.cx + g_x * g_x * self.mx;
        let vp = self.np + 2.0 * g_p * self.cp + g_p * g_p * self.mp;
        (vx.max(0.0) * vp.max(0.0)).sqrt()
    }

    fn single(&self, g: f64) -> f64 {
        self.product(g, g) / (1.0 + g * g)
    }

    fn minimize(&self) -> EntOptimum {
        let grid = linspace(-GAIN_LIMIT.ln(), GAIN_LIMIT.ln(), GAIN_GRID);
        let mut best = EntOptimum {
            ent: f64::INFINITY,
            g: 1.0,
        };
        for sign in [1.0, -1.0] {
            let m = grid_then_golden(|u| self.single(sign * u.exp()), &grid, GAIN_TOL);
            if m.value < best.ent {
                best = EntOptimum {
                    ent: m.value,
                    g: sign * m.x.exp(),
                };
            }
        }
        best
    }
}

/// Gain that minimizes the single-gain product for an X–P-symmetric pair,
/// `[n - m + sqrt((n - m)^2 + 4 c^2)] / (2 c)`, carrying the sign of `c_x`.
pub fn g_sym(reduced: &TwoModeReduced) -> Result<f64> {
    let c = reduced.c_x;
    if !(c.is_finite() && reduced.n.is_finite() && reduced.m.is_finite()) {
        return Err(Error::NonFinite("reduced covariance"));
    }
    if c.abs() <= UNCORRELATED_TOL {
        return Err(Error::Uncorrelated(c.abs()));
    }
    let diff = reduced.n - reduced.m;
    let root = diff.hypot(2.0 * c);
    // The second form avoids cancellation when n < m.
    let g = if diff >= 0.0 {
        (diff + root) / (2.0 * c.abs())
    } else {
        2.0 * c.abs() / (root - diff)
    };
    Ok(g.copysign(c))
}

/// `max{1, S^2} / [(1 + g_BA^2)(1 + g_BC^2)]`.
pub fn monogamy_bound_mb(g_ba: f64, g_bc: f64, s_collective: f64) -> f64 {
    (s_collective * s_collective).max(1.0) / ((1.0 + g_ba * g_ba) * (1.0 + g_bc * g_bc))
}

/// Smallest symplectic eigenvalue of the partially transposed covariance of
/// modes `(i, j)`. Values below 1 certify entanglement.
pub fn ppt_min_symplectic_eigenvalue(state: &GaussianState, i: usize, j: usize) -> Result<f64> {
    state.reduced_two_mode(i, j)?;
    let sub = state.partial_trace(&[i, j])?;
    let c = sub.cov();
    let det2 = |r: usize, s: usize| c[(r, s)] * c[(r + 1, s + 1)] - c[(r, s + 1)] * c[(r + 1, s)];
    let delta = det2(0, 0) + det2(2, 2) - 2.0 * det2(0, 2);
    let det_all = c.determinant();
    let disc = (delta * delta - 4.0 * det_all).max(0.0);
    Ok(((delta - disc.sqrt()) / 2.0).max(0.0).sqrt())
}

fn block(cov: &DMatrix<f64>, mi: usize, mj: usize) -> Matrix2<f64> {
    Matrix2::new(
        cov[(2 * mi, 2 * mj)],
        cov[(2 * mi, 2 * mj + 1)],
        cov[(2 * mi + 1, 2 * mj)],
        cov[(2 * mi + 1, 2 * mj + 1)],
    )
}

fn unit(angle: f64) -> Vector2<f64> {
    Vector2::new(angle.cos(), angle.sin())
}

/// `v^T pinv(m) v` for a symmetric positive semidefinite 2x2 `m`.
fn pinv2_quad(m: &Matrix2<f64>, v: &Vector2<f64>) -> f64 {
    let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let half_tr = 0.5 * (a + d);
    let spread = (0.5 * (a - d)).hypot(b);
    let (hi, lo) = (half_tr + spread, half_tr - spread);
    if hi <= 0.0 {
        return 0.0;
    }
    if lo > PINV_RELATIVE_CUTOFF * hi {
        let det = a * d - b * b;
        return (d * v[0] * v[0] - 2.0 * b * v[0] * v[1] + a * v[1] * v[1]) / det;
    }
    let e = if b.abs() > 0.0 {
        Vector2::new(b, hi - a).normalize()
    } else if a >= d {
        Vector2::new(1.0, 0.0)
    } else {
        Vector2::new(0.0, 1.0)
    };
    let proj = e.dot(v);
    proj * proj / hi
}

/// Angle of the best single conditioner quadrature, `pinv(m) w`.
fn best_direction(m: &Matrix2<f64>, w: &Vector2<f64>) -> f64 {
    let det = m.determinant();
    let u = if det.abs() > PINV_RELATIVE_CUTOFF * m.norm_squared() {
        Vector2::new(m[(1, 1)] * w[0] - m[(0, 1)] * w[1], m[(0, 0)] * w[1] - m[(1, 0)] * w[0])
    } else {
        *w
    };
    u[1].atan2(u[0])
}

fn check_roles(state: &GaussianState, steered: usize, steerers: &[usize]) -> Result<()> {
    state.check_mode(steered)?;
    if steerers.is_empty() {
        return Err(Error::EmptyModeList);
    }
    for (k, &m) in steerers.iter().enumerate() {
        state.check_mode(m)?;
        if m == steered {
            return Err(Error::TargetInConditioners(m));
        }
        if steerers[..k].contains(&m) {
            return Err(Error::DuplicateMode(m));
        }
    }
    Ok(())
}

fn fixed_quadrature_steering(state: &GaussianState, steered: usize, steerers: &[usize]) -> Result<f64> {
    let xs: Vec<Quadrature> = steerers.iter().map(|&m| Quadrature::x(m)).collect();
    let ps: Vec<Quadrature> = steerers.iter().map(|&m| Quadrature::p(m)).collect();
    let vx = state.conditional_variance(Quadrature::x(steered), &xs)?;
    let vp = state.conditional_variance(Quadrature::p(steered), &ps)?;
    Ok((vx.max(0.0) * vp.max(0.0)).sqrt())
}

/// Optimal steering of one mode with the angle that attains it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteeringOptimum {
    pub s: f64,
    pub target_angle: f64,
}

/// Minimizes `sqrt(G(θ) G(θ + π/2))` over the target angle, with `G` of
/// period π. The grid is shared between θ and θ + π/2.
fn minimize_over_target<G: FnMut(f64) -> f64>(mut g: G, seeds: &[f64]) -> SteeringOptimum {
    // S(theta) has period pi/2: the grid over [0, pi) pairs each point with
    // its quarter-turn partner.
    let step = PI / ANGLE_GRID as f64;
    let half = ANGLE_GRID / 2;
    let values: Vec<f64> = (0..ANGLE_GRID).map(|k| g(k as f64 * step)).collect();
    let s_grid: Vec<f64> = (0..half)
        .map(|k| (values[k].max(0.0) * values[k + half].max(0.0)).sqrt())
        .collect();
    let k_best = argmin(&s_grid);
    let mut best = Minimum {
        x: k_best as f64 * step,
        value: s_grid[k_best],
    };
    let mut s_of = |theta: f64| (g(theta).max(0.0) * g(theta + FRAC_PI_2).max(0.0)).sqrt();
    for m in local_minima(&s_grid, k_best, true) {
        let centre = m as f64 * step;
        let refined = golden_section(&mut s_of, centre - step, centre + step, ANGLE_TOL);
        if refined.value < best.value {
            best = refined;
        }
    }
    let grid_best = best.value;
    for &theta in seeds {
        let at_seed = s_of(theta);
        if at_seed < grid_best {
            let refined = golden_section(&mut s_of, theta - step, theta + step, ANGLE_TOL);
            for candidate in [Minimum { x: theta, value: at_seed }, refined] {
                if candidate.value < best.value {
                    best = candidate;
                }
            }
        }
    }
    SteeringOptimum {
        s: best.value,
        target_angle: best.x.rem_euclid(FRAC_PI_2),
    }
}

/// Conditional covariance of the steered mode given an entire steerer mode.
/// Its quadratic form in a target direction equals the conditional variance
/// given the best single quadrature of the steerer.
fn schur_block(state: &GaussianState, steered: usize, steerer: usize) -> Matrix2<f64> {
    let c = state.cov();
    let bb = block(c, steered, steered);
    let ba = block(c, steered, steerer);
    let aa = block(c, steerer, steerer);
    let k = Matrix2::from_fn(|r, s| {
        let (er, es) = (ba.row(r).transpose(), ba.row(s).transpose());
        bb[(r, s)] - pinv2_bilinear(&aa, &er, &es)
    });
    (k + k.transpose()) * 0.5
}

fn pinv2_bilinear(m: &Matrix2<f64>, x: &Vector2<f64>, y: &Vector2<f64>) -> f64 {
    // polarization identity on the quadratic form
    0.25 * (pinv2_quad(m, &(x + y)) - pinv2_quad(m, &(x - y)))
}

fn pair_optimum(state: &GaussianState, steered: usize, steerer: usize) -> SteeringOptimum {
    let k = schur_block(state, steered, steerer);
    minimize_over_target(|theta| unit(theta).dot(&(k * unit(theta))), &[])
}

/// EPR steering parameter of `steered` by measurements on `steerer`.
///
/// Without angle optimization this is `Δ_inf X Δ_inf P` for the X and P
/// quadratures. With it, the target quadrature pair is rotated and each
/// inference uses the best steerer quadrature.
pub fn steering_s_pair(state: &GaussianState, steered: usize, steerer: usize, optimize_angles: bool) -> Result<f64> {
    check_roles(state, steered, &[steerer])?;
    if optimize_angles {
        Ok(pair_optimum(state, steered, steerer).s)
    } else {
        fixed_quadrature_steering(state, steered, &[steerer])
    }
}

/// Steering of `steered` by joint measurements on all `steerers`, one
/// quadrature per steerer mode.
pub fn steering_s_collective(
    state: &GaussianState,
    steered: usize,
    steerers: &[usize],
    optimize_angles: bool,
) -> Result<f64> {
    check_roles(state, steered, steerers)?;
    if !optimize_angles {
        return fixed_quadrature_steering(state, steered, steerers);
    }
    Ok(collective_optimum(state, steered, steerers).s)
}

fn collective_optimum(state: &GaussianState, steered: usize, steerers: &[usize]) -> SteeringOptimum {
    let pairs: Vec<SteeringOptimum> = steerers.iter().map(|&m| pair_optimum(state, steered, m)).collect();
    let seeds: Vec<f64> = pairs.iter().map(|p| p.target_angle).collect();
    let joint = match steerers {
        [_] => return pairs[0],
        [a, c] => {
            let problem = TwoSteerers::new(state, steered, *a, *c);
            minimize_over_target(|theta| problem.best_for_target(theta), &seeds)
        }
        _ => {
            let problem = ManySteerers::new(state, steered, steerers);
            minimize_over_target(|theta| problem.best_for_target(theta), &seeds)
        }
    };
    // A single-steerer strategy is also a joint strategy that ignores the
    // other modes; keeping it guards against rounding in the joint path.
    pairs.into_iter().fold(joint, |best, p| if p.s < best.s { p } else { best })
}

fn angle_grid() -> Vec<f64> {
    (0..ANGLE_GRID).map(|k| k as f64 * PI / ANGLE_GRID as f64).collect()
}

/// Covariance blocks for steering mode B from modes A and C.
struct TwoSteerers {
    bb: Matrix2<f64>,
    ba: Matrix2<f64>,
    bc: Matrix2<f64>,
    aa: Matrix2<f64>,
    ac: Matrix2<f64>,
    cc: Matrix2<f64>,
}

impl TwoSteerers {
    fn new(state: &GaussianState, b: usize, a: usize, c: usize) -> Self {
        let cov = state.cov();
        Self {
            bb: block(cov, b, b),
            ba: block(cov, b, a),
            bc: block(cov, b, c),
            aa: block(cov, a, a),
            ac: block(cov, a, c),
            cc: block(cov, c, c),
        }
    }

    /// Minimum over the A quadrature of `Var(t | A_phi, best C quadrature)`.
    fn best_for_target(&self, theta: f64) -> f64 {
        let t = unit(theta);
        let s_tt = t.dot(&(self.bb * t));
        let w_a = self.ba.transpose() * t;
        let w_c = self.bc.transpose() * t;
        let h = |v: &Vector2<f64>| {
            let q = v.dot(&(self.aa * v));
            let alpha = v.dot(&w_a);
            let u = self.ac.transpose() * v;
            if q <= 0.0 {
                return s_tt - pinv2_quad(&self.cc, &w_c);
            }
            let reduced = self.cc - u * u.transpose() / q;
            let cross = w_c - u * (alpha / q);
            s_tt - alpha * alpha / q - pinv2_quad(&reduced, &cross)
        };
        let phi_star = best_direction(&self.aa, &w_a);
        let searched = periodic_grid_then_golden(|phi| h(&unit(phi)), PI, ANGLE_GRID, ANGLE_TOL);
        searched.value.min(h(&unit(phi_star)))
    }
}

/// General steerer list: coordinate descent over all but the last steerer's
/// angle; the last one is optimized in closed form.
struct ManySteerers {
    /// Covariance ordered (steered, steerer_1, ..., steerer_k).
    cov: DMatrix<f64>,
    k: usize,
}

impl ManySteerers {
    fn new(state: &GaussianState, steered: usize, steerers: &[usize]) -> Self {
        let mut keep = vec![steered];
        keep.extend_from_slice(steerers);
        let cov = state
            .partial_trace(&keep)
            .expect("roles were validated")
            .cov()
            .clone();
        Self {
            cov,
            k: steerers.len(),
        }
    }

    fn eval(&self, theta: f64, phis: &[f64]) -> f64 {
        let mut sigma = self.cov.clone();
        for (s, &phi) in phis.iter().enumerate() {
            let idx = 2 * (s + 1);
            let (cs, sn) = (phi.cos(), phi.sin());
            let col = sigma.column(idx) * cs + sigma.column(idx + 1) * sn;
            let q = cs * col[idx] + sn * col[idx + 1];
            if q > PINV_RELATIVE_CUTOFF * sigma.diagonal().amax() {
                sigma -= &col * col.transpose() / q;
            }
        }
        let last = 2 * self.k;
        let t = unit(theta);
        let bb = Matrix2::new(sigma[(0, 0)], sigma[(0, 1)], sigma[(1, 0)], sigma[(1, 1)]);
        let bl = Matrix2::new(
            sigma[(0, last)],
            sigma[(0, last + 1)],
            sigma[(1, last)],
            sigma[(1, last + 1)],
        );
        let ll = Matrix2::new(
            sigma[(last, last)],
            sigma[(last, last + 1)],
            sigma[(last + 1, last)],
            sigma[(last + 1, last + 1)],
        );
        t.dot(&(bb * t)) - pinv2_quad(&ll, &(bl.transpose() * t))
    }

    fn best_for_target(&self, theta: f64) -> f64 {
        let grid = angle_grid();
        let mut phis = vec![0.0; self.k - 1];
        let mut current = self.eval(theta, &phis);
        for _ in 0..20 {
            let before = current;
            for s in 0..phis.len() {
                let mut trial = phis.clone();
                let m = grid_then_golden(
                    |phi| {
                        trial[s] = phi;
                        self.eval(theta, &trial)
                    },
                    &grid,
                    ANGLE_TOL,
                );
                if m.value < current {
                    phis[s] = m.x;
                    current = m.value;
                }
            }
            if before - current <= 1e-13 * before.abs().max(1.0) {
                break;
            }
        }
        current
    }
}

/// All quantifiers and monogamy residuals for steered mode B and the pairs
/// (B, A) and (B, C).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantifierReport {
    #[serde(rename = "D_BA")]
    pub d_ba: f64,
    #[serde(rename = "D_BC")]
    pub d_bc: f64,
    /// Single-gain minimum of the normalized EPR product.
    #[serde(rename = "Ent_BA")]
    pub ent_ba: f64,
    #[serde(rename = "Ent_BC")]
    pub ent_bc: f64,
    #[serde(rename = "g_opt_BA")]
    pub g_opt_ba: f64,
    #[serde(rename = "g_opt_BC")]
    pub g_opt_bc: f64,
    /// `None` when the pair is uncorrelated in X.
    #[serde(rename = "g_sym_BA")]
    pub g_sym_ba: Option<f64>,
    #[serde(rename = "g_sym_BC")]
    pub g_sym_bc: Option<f64>,
    /// Gains used in `M_B`: `g_sym`, or the numeric optimum when undefined.
    #[serde(rename = "g_BA")]
    pub g_ba: f64,
    #[serde(rename = "g_BC")]
    pub g_bc: f64,
    #[serde(rename = "Ent_BA_at_g")]
    pub ent_ba_at_g: f64,
    #[serde(rename = "Ent_BC_at_g")]
    pub ent_bc_at_g: f64,
    #[serde(rename = "S_BA")]
    pub s_ba: f64,
    #[serde(rename = "S_BC")]
    pub s_bc: f64,
    #[serde(rename = "S_coll")]
    pub s_collective: f64,
    /// Collective steering with X and P quadratures everywhere.
    #[serde(rename = "S_coll_fixed")]
    pub s_collective_fixed: f64,
    #[serde(rename = "M_B")]
    pub m_b: f64,
    pub residual_r1: f64,
    pub residual_r2: f64,
    pub residual_r3_product: f64,
    pub residual_r3_sum: f64,
    pub residual_r4: f64,
    /// `S_BA S_BC - 1`.
    pub steering_monogamy: f64,
    /// `min(S_BA, S_BC) - S_coll`.
    pub collective_dominance: f64,
}

impl QuantifierReport {
    pub fn residuals(&self) -> [(&'static str, f64); 5] {
        [
            ("r1", self.residual_r1),
            ("r2", self.residual_r2),
            ("r3_product", self.residual_r3_product),
            ("r3_sum", self.residual_r3_sum),
            ("r4", self.residual_r4),
        ]
    }

    pub fn min_residual(&self) -> f64 {
        self.residuals().iter().map(|r| r.1).fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates every monogamy relation with `b` as the shared mode.
pub fn check_monogamy(state: &GaussianState, b: usize, a: usize, c: usize) -> Result<QuantifierReport> {
    check_roles(state, b, &[a, c])?;

    let d_ba = duan_d(state, b, a)?;
    let d_bc = duan_d(state, b, c)?;

    let cost_ba = EntCost::new(state, b, a)?;
    let cost_bc = EntCost::new(state, b, c)?;
    let opt_ba = cost_ba.minimize();
    let opt_bc = cost_bc.minimize();

    let g_sym_ba = g_sym(&state.reduced_two_mode(b, a)?).ok();
    let g_sym_bc = g_sym(&state.reduced_two_mode(b, c)?).ok();
    let g_ba = g_sym_ba.unwrap_or(opt_ba.g);
    let g_bc = g_sym_bc.unwrap_or(opt_bc.g);
    let ent_ba_at_g = cost_ba.single(g_ba);
    let ent_bc_at_g = cost_bc.single(g_bc);

    let pair_ba = pair_optimum(state, b, a);
    let pair_bc = pair_optimum(state, b, c);
    let coll = collective_optimum(state, b, &[a, c]);
    let s = coll.s;
    let s_fixed = fixed_quadrature_steering(state, b, &[a, c])?;

    let m_b = monogamy_bound_mb(g_ba, g_bc, s);
    let (g, gp) = (opt_ba.g, opt_bc.g);
    let denom = (1.0 + g * g) * (1.0 + gp * gp);

    Ok(QuantifierReport {
        d_ba,
        d_bc,
        ent_ba: opt_ba.ent,
        ent_bc: opt_bc.ent,
        g_opt_ba: opt_ba.g,
        g_opt_bc: opt_bc.g,
        g_sym_ba,
        g_sym_bc,
        g_ba,
        g_bc,
        ent_ba_at_g,
        ent_bc_at_g,
        s_ba: pair_ba.s,
        s_bc: pair_bc.s,
        s_collective: s,
        s_collective_fixed: s_fixed,
        m_b,
        residual_r1: d_ba + d_bc - 1.0,
        residual_r2: d_ba + d_bc - s.max(1.0),
        residual_r3_product: opt_ba.ent * opt_bc.ent - (s * s).max(1.0) / denom,
        residual_r3_sum: opt_ba.ent + opt_bc.ent - s * (2.0 + g * g + gp * gp) / denom,
        residual_r4: ent_ba_at_g * ent_bc_at_g - m_b,
        steering_monogamy: pair_ba.s * pair_bc.s - 1.0,
        collective_dominance: pair_ba.s.min(pair_bc.s) - s,
    })
}
