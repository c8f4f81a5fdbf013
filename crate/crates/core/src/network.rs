//! The tripartite circuit: a two-mode squeezer feeding B and F, optional
//! loss on B, a beam splitter turning F into A and C, optional loss on A and
//! C, and optional thermal seeding of the squeezer inputs.
//!
//! [`build_circuit`] constructs the state from gaussian-core operations.
//! [`closed_form_report`] evaluates the printed analytic expressions for the
//! same scenarios without any matrix algebra, so each path checks the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, TwoModeReduced};
use crate::quantifiers::{g_sym, monogamy_bound_mb, QuantifierReport};

pub const MODE_B: usize = 0;
pub const MODE_A: usize = 1;
pub const MODE_C: usize = 2;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    pub r: f64,
    pub eta0: f64,
    #[serde(rename = "etaB", default = "one")]
    pub eta_b: f64,
    #[serde(rename = "etaA", default = "one")]
    pub eta_a: f64,
    #[serde(rename = "etaC", default = "one")]
    pub eta_c: f64,
    #[serde(rename = "nB", default)]
    pub n_b: f64,
    #[serde(rename = "nF", default)]
    pub n_f: f64,
}

impl CircuitParams {
    pub fn new(r: f64, eta0: f64) -> Self {
        Self {
            r,
            eta0,
            eta_b: 1.0,
            eta_a: 1.0,
            eta_c: 1.0,
            n_b: 0.0,
            n_f: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() {
            return Err(Error::NonFinite("r"));
        }
        for eta in [self.eta0, self.eta_b, self.eta_a, self.eta_c] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidTransmission(eta));
            }
        }
        for n in [self.n_b, self.n_f] {
            if !n.is_finite() {
                return Err(Error::NonFinite("thermal occupation"));
            }
            if n < 0.0 {
                return Err(Error::NegativeOccupation(n));
            }
        }
        Ok(())
    }

    /// Reads a named field, using the JSON key names.
    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "r" => self.r,
            "eta0" => self.eta0,
            "etaB" => self.eta_b,
            "etaA" => self.eta_a,
            "etaC" => self.eta_c,
            "nB" => self.n_b,
            "nF" => self.n_f,
            _ => return Err(Error::InvalidParameter(format!("unknown circuit parameter {name:?}"))),
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "r" => &mut self.r,
            "eta0" => &mut self.eta0,
            "etaB" => &mut self.eta_b,
            "etaA" => &mut self.eta_a,
            "etaC" => &mut self.eta_c,
            "nB" => &mut self.n_b,
            "nF" => &mut self.n_f,
            _ => return Err(Error::InvalidParameter(format!("unknown circuit parameter {name:?}"))),
        };
        *slot = value;
        Ok(())
    }

    fn lossless(&self) -> bool {
        self.eta_b == 1.0 && self.eta_a == 1.0 && self.eta_c == 1.0
    }

    fn noiseless(&self) -> bool {
        self.n_b == 0.0 && self.n_f == 0.0
    }
}

/// Builds the three-mode state, modes ordered (B, A, C).
pub fn build_circuit(params: &CircuitParams) -> Result<GaussianState> {
    params.validate()?;
    GaussianState::thermal_seeded_tms(params.r, params.n_b, params.n_f)?
        .apply_loss(MODE_B, params.eta_b)?
        .tensor(&GaussianState::vacuum(1)?)
        .apply_beamsplitter(1, 2, params.eta0)?
        .apply_loss(MODE_A, params.eta_a)?
        .apply_loss(MODE_C, params.eta_c)
}

/// Total transmission from F through either output: `η0 ηA + (1 - η0) ηC`.
pub fn effective_eta_f(params: &CircuitParams) -> f64 {
    params.eta0 * params.eta_a + (1.0 - params.eta0) * params.eta_c
}

/// Parameter families for which analytic expressions exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioFamily {
    /// No loss, no thermal noise.
    Ideal,
    /// Loss on B only.
    LossB,
    /// Loss on B matching the splitter transmission, `ηB = η0`.
    EqualLoss,
    /// Loss on A and/or C, none on B.
    LossAc,
    /// Thermal seeds, no loss.
    Thermal,
}

impl ScenarioFamily {
    /// The most specific family covering `params`, or `None` for
    /// combinations without analytic expressions.
    pub fn detect(params: &CircuitParams) -> Option<Self> {
        let ac_lossless = params.eta_a == 1.0 && params.eta_c == 1.0;
        if !params.noiseless() {
            return params.lossless().then_some(Self::Thermal);
        }
        if params.lossless() {
            return Some(Self::Ideal);
        }
        if ac_lossless {
            return Some(if params.eta_b == params.eta0 {
                Self::EqualLoss
            } else {
                Self::LossB
            });
        }
        (params.eta_b == 1.0).then_some(Self::LossAc)
    }

    /// Whether this family's expressions are valid for `params`.
    pub fn admits(&self, params: &CircuitParams) -> bool {
        let ac_lossless = params.eta_a == 1.0 && params.eta_c == 1.0;
        match self {
            Self::Ideal => params.lossless() && params.noiseless(),
            Self::LossB => ac_lossless && params.noiseless(),
            Self::EqualLoss => ac_lossless && params.noiseless() && params.eta_b == params.eta0,
            Self::LossAc => params.eta_b == 1.0 && params.noiseless(),
            Self::Thermal => params.lossless(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::LossB => "loss-b",
            Self::EqualLoss => "equal-loss",
            Self::LossAc => "loss-ac",
            Self::Thermal => "thermal",
        }
    }
}

/// Printed covariances of the pairs (B, A) and (B, C), `c_p = -c_x`.
fn pair(n: f64, m: f64, c: f64) -> TwoModeReduced {
    TwoModeReduced { n, m, c_x: c, c_p: -c }
}

pub fn ideal_covariances_ba(r: f64, eta0: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    pair(ch, eta0 * ch + (1.0 - eta0), eta0.sqrt() * sh)
}

pub fn ideal_d_ba(r: f64, eta0: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (eta0 * ch + (1.0 - eta0) + ch - 2.0 * eta0.sqrt() * sh) / 2.0
}

pub fn ideal_d_bc(r: f64, eta0: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    ((1.0 - eta0) * ch + eta0 + ch - 2.0 * (1.0 - eta0).sqrt() * sh) / 2.0
}

pub fn ideal_collective_steering(r: f64) -> f64 {
    1.0 / (2.0 * r).cosh()
}

/// Symmetry gain of the lossless pair (B, A); `(B, C)` follows from
/// `eta0 -> 1 - eta0`.
pub fn ideal_g_sym_ba(r: f64, eta0: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let x = ch * (1.0 - eta0) - (1.0 - eta0);
    let inner = (ch * (1.0 - eta0) - 1.0 + eta0).powi(2) + 4.0 * eta0 * sh * sh;
    (x + inner.sqrt()) / (2.0 * eta0.sqrt() * sh)
}

pub fn loss_b_covariances_ba(r: f64, eta0: f64, eta_b: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    pair(
        eta_b * ch + (1.0 - eta_b),
        eta0 * ch + (1.0 - eta0),
        eta0.sqrt() * eta_b.sqrt() * sh,
    )
}

pub fn loss_b_d_ba(r: f64, eta0: f64, eta_b: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (eta_b * ch + (1.0 - eta_b) + eta0 * ch + (1.0 - eta0) - 2.0 * eta_b.sqrt() * eta0.sqrt() * sh) / 2.0
}

pub fn loss_b_d_bc(r: f64, eta0: f64, eta_b: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (eta_b * ch + 1.0 - eta_b + (1.0 - eta0) * ch + eta0 - 2.0 * eta_b.sqrt() * (1.0 - eta0).sqrt() * sh) / 2.0
}

/// Common value of `D_BA = D_BC` at `η0 = 0.5`.
pub fn loss_b_balanced_d(r: f64, eta_b: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (eta_b * ch + 1.0 - eta_b + 0.5 + 0.5 * ch - 2.0 * eta_b.sqrt() * 0.5f64.sqrt() * sh) / 2.0
}

/// `D_BA = D_BC` at `η0 = ηB = 0.5`.
pub fn bowen_d(r: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * r).exp())
}

pub fn loss_b_collective_steering(r: f64, eta_b: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    eta_b * ch + (1.0 - eta_b) - eta_b * sh * sh / ch
}

pub fn equal_loss_d_ba(r: f64, eta_b: f64) -> f64 {
    1.0 + eta_b * ((-2.0 * r).exp() - 1.0)
}

pub fn equal_loss_d_bc(r: f64, eta_b: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (ch + 1.0 - 2.0 * (eta_b * (1.0 - eta_b)).sqrt() * sh) / 2.0
}

pub fn loss_ac_covariances_ba(r: f64, eta0: f64, eta_a: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    pair(ch, eta0 * eta_a * ch + 1.0 - eta0 * eta_a, (eta_a * eta0).sqrt() * sh)
}

pub fn loss_ac_covariances_bc(r: f64, eta0: f64, eta_c: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    pair(
        ch,
        (1.0 - eta0) * eta_c * ch + 1.0 - (1.0 - eta0) * eta_c,
        (eta_c * (1.0 - eta0)).sqrt() * sh,
    )
}

pub fn loss_ac_d_ba(r: f64, eta0: f64, eta_a: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (eta0 * eta_a * ch + (1.0 - eta0 * eta_a) + ch - 2.0 * (eta0 * eta_a).sqrt() * sh) / 2.0
}

pub fn loss_ac_d_bc(r: f64, eta0: f64, eta_c: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    ((1.0 - eta0) * eta_c * ch + 1.0 - eta_c + eta0 * eta_c + ch - 2.0 * (eta_c * (1.0 - eta0)).sqrt() * sh) / 2.0
}

/// Steering of B by F after loss `eta_b` on B and `eta_f` on F.
pub fn effective_channel_steering(r: f64, eta_b: f64, eta_f: f64) -> f64 {
    let ch = (2.0 * r).cosh();
    1.0 - eta_b * (ch - 1.0) * (2.0 * eta_f - 1.0) / (1.0 - eta_f + eta_f * ch)
}

pub fn thermal_covariances_bf(r: f64, n_b: f64, n_f: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let tot = n_f + n_b + 1.0;
    pair(tot * ch + (n_b - n_f), tot * ch - (n_b - n_f), tot * sh)
}

pub fn thermal_covariances_ba(r: f64, eta0: f64, n_b: f64, n_f: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let tot = n_f + n_b + 1.0;
    pair(
        tot * ch + (n_b - n_f),
        eta0 * tot * ch - eta0 * (n_b - n_f) + 1.0 - eta0,
        eta0.sqrt() * tot * sh,
    )
}

pub fn thermal_covariances_bc(r: f64, eta0: f64, n_b: f64, n_f: f64) -> TwoModeReduced {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let tot = n_f + n_b + 1.0;
    pair(
        tot * ch + (n_b - n_f),
        (1.0 - eta0) * tot * ch - (1.0 - eta0) * (n_b - n_f) + eta0,
        (1.0 - eta0).sqrt() * tot * sh,
    )
}

pub fn thermal_d_ba(r: f64, eta0: f64, n_b: f64, n_f: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let tot = n_b + n_f + 1.0;
    0.5 * (tot * ch + (n_b - n_f) + eta0 * tot * ch - eta0 * (n_b - n_f) + (1.0 - eta0)
        - 2.0 * eta0.sqrt() * tot * sh)
}

pub fn thermal_d_bc(r: f64, eta0: f64, n_b: f64, n_f: f64) -> f64 {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let tot = n_b + n_f + 1.0;
    0.5 * (tot * ch + (n_b - n_f) + (1.0 - eta0) * tot * ch - (1.0 - eta0) * (n_b - n_f) + eta0
        - 2.0 * (1.0 - eta0).sqrt() * tot * sh)
}

/// `n_BF - c_BF^2 / m_BF` for thermal seeds.
pub fn thermal_collective_steering(r: f64, n_b: f64, n_f: f64) -> f64 {
    let red = thermal_covariances_bf(r, n_b, n_f);
    red.n - red.c_x * red.c_x / red.m
}

/// Thermal steering with equal seeds `n_th`: `(2 n_th + 1) / cosh 2r`.
pub fn thermal_symmetric_steering(r: f64, n_th: f64) -> f64 {
    (2.0 * n_th + 1.0) / (2.0 * r).cosh()
}

/// `[n - 2 g c + g^2 m] / (1 + g^2)`.
pub fn ent_from_covariances(red: &TwoModeReduced, g: f64) -> f64 {
    (red.n - 2.0 * g * red.c_x + g * g * red.m) / (1.0 + g * g)
}

/// Analytic values for one parameter point. Quantities without a printed
/// expression in the selected family are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub family: ScenarioFamily,
    #[serde(rename = "D_BA")]
    pub d_ba: f64,
    #[serde(rename = "D_BC")]
    pub d_bc: f64,
    #[serde(rename = "S_coll")]
    pub s_collective: Option<f64>,
    #[serde(rename = "g_sym_BA")]
    pub g_sym_ba: Option<f64>,
    #[serde(rename = "g_sym_BC")]
    pub g_sym_bc: Option<f64>,
    #[serde(rename = "Ent_BA")]
    pub ent_ba: Option<f64>,
    #[serde(rename = "Ent_BC")]
    pub ent_bc: Option<f64>,
    #[serde(rename = "M_B")]
    pub m_b: Option<f64>,
    pub residual_r1: f64,
    pub residual_r2: Option<f64>,
    pub residual_r4: Option<f64>,
}

impl ClosedFormReport {
    /// Largest absolute difference from a constructive report over the
    /// quantities both carry.
    pub fn max_discrepancy(&self, report: &QuantifierReport) -> f64 {
        let pairs = [
            (Some(self.d_ba), Some(report.d_ba)),
            (Some(self.d_bc), Some(report.d_bc)),
            (self.s_collective, Some(report.s_collective)),
            (self.g_sym_ba, report.g_sym_ba),
            (self.g_sym_bc, report.g_sym_bc),
            (self.ent_ba, Some(report.ent_ba_at_g)),
            (self.ent_bc, Some(report.ent_bc_at_g)),
            (self.m_b, Some(report.m_b)),
        ];
        pairs
            .iter()
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
            .fold(0.0, f64::max)
    }
}

/// Evaluates the analytic expressions of `family` at `params`.
pub fn closed_form_report(params: &CircuitParams, family: ScenarioFamily) -> Result<ClosedFormReport> {
    params.validate()?;
    if !family.admits(params) {
        return Err(Error::NoClosedForm(format!(
            "the {} expressions do not cover {:?}",
            family.name(),
            params
        )));
    }
    let CircuitParams {
        r,
        eta0,
        eta_b,
        eta_a,
        eta_c,
        n_b,
        n_f,
    } = *params;

    let (ba, bc, d_ba, d_bc, s) = match family {
        ScenarioFamily::Ideal => (
            ideal_covariances_ba(r, eta0),
            ideal_covariances_ba(r, 1.0 - eta0),
            ideal_d_ba(r, eta0),
            ideal_d_bc(r, eta0),
            Some(ideal_collective_steering(r)),
        ),
        ScenarioFamily::LossB | ScenarioFamily::EqualLoss => {
            let (d_ba, d_bc) = if family == ScenarioFamily::EqualLoss {
                (equal_loss_d_ba(r, eta_b), equal_loss_d_bc(r, eta_b))
            } else if eta0 == 0.5 && eta_b == 0.5 {
                (bowen_d(r), bowen_d(r))
            } else if eta0 == 0.5 {
                (loss_b_balanced_d(r, eta_b), loss_b_balanced_d(r, eta_b))
            } else {
                (loss_b_d_ba(r, eta0, eta_b), loss_b_d_bc(r, eta0, eta_b))
            };
            (
                loss_b_covariances_ba(r, eta0, eta_b),
                loss_b_covariances_ba(r, 1.0 - eta0, eta_b),
                d_ba,
                d_bc,
                Some(loss_b_collective_steering(r, eta_b)),
            )
        }
        ScenarioFamily::LossAc => (
            loss_ac_covariances_ba(r, eta0, eta_a),
            loss_ac_covariances_bc(r, eta0, eta_c),
            loss_ac_d_ba(r, eta0, eta_a),
            loss_ac_d_bc(r, eta0, eta_c),
            Some(effective_channel_steering(r, eta_b, effective_eta_f(params))),
        ),
        ScenarioFamily::Thermal => {
            let s = if n_b == n_f {
                thermal_symmetric_steering(r, n_b)
            } else {
                thermal_collective_steering(r, n_b, n_f)
            };
            (
                thermal_covariances_ba(r, eta0, n_b, n_f),
                thermal_covariances_bc(r, eta0, n_b, n_f),
                thermal_d_ba(r, eta0, n_b, n_f),
                thermal_d_bc(r, eta0, n_b, n_f),
                Some(s),
            )
        }
    };

    let gain = |red: &TwoModeReduced, ideal_eta: f64| -> Option<f64> {
        if family == ScenarioFamily::Ideal && red.c_x.abs() > 0.0 {
            Some(ideal_g_sym_ba(r, ideal_eta))
        } else {
            g_sym(red).ok()
        }
    };
    let g_sym_ba = gain(&ba, eta0);
    let g_sym_bc = gain(&bc, 1.0 - eta0);
    let ent_ba = g_sym_ba.map(|g| ent_from_covariances(&ba, g));
    let ent_bc = g_sym_bc.map(|g| ent_from_covariances(&bc, g));
    let m_b = match (g_sym_ba, g_sym_bc, s) {
        (Some(ga), Some(gc), Some(s)) => Some(monogamy_bound_mb(ga, gc, s)),
        _ => None,
    };
    let residual_r4 = match (ent_ba, ent_bc, m_b) {
        (Some(a), Some(c), Some(m)) => Some(a * c - m),
        _ => None,
    };
    Ok(ClosedFormReport {
        family,
        d_ba,
        d_bc,
        s_collective: s,
        g_sym_ba,
        g_sym_bc,
        ent_ba,
        ent_bc,
        m_b,
        residual_r1: d_ba + d_bc - 1.0,
        residual_r2: s.map(|s| d_ba + d_bc - s.max(1.0)),
        residual_r4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifiers::{check_monogamy, duan_d, steering_s_collective};
    use approx::assert_abs_diff_eq;

    fn assert_reduced(actual: TwoModeReduced, expected: TwoModeReduced) {
        assert_abs_diff_eq!(actual.n, expected.n, epsilon = 1e-11);
        assert_abs_diff_eq!(actual.m, expected.m, epsilon = 1e-11);
        assert_abs_diff_eq!(actual.c_x, expected.c_x, epsilon = 1e-11);
        assert_abs_diff_eq!(actual.c_p, expected.c_p, epsilon = 1e-11);
    }

    #[test]
    fn circuit_covariances_by_family() {
        let p = CircuitParams::new(1.1, 0.3);
        let s = build_circuit(&p).unwrap();
        assert_eq!(s.num_modes(), 3);
        assert_reduced(s.reduced_two_mode(MODE_B, MODE_A).unwrap(), ideal_covariances_ba(1.1, 0.3));
        assert_reduced(s.reduced_two_mode(MODE_B, MODE_C).unwrap(), ideal_covariances_ba(1.1, 0.7));

        let p = CircuitParams { eta_b: 0.4, ..CircuitParams::new(0.8, 0.6) };
        let s = build_circuit(&p).unwrap();
        assert_reduced(s.reduced_two_mode(MODE_B, MODE_A).unwrap(), loss_b_covariances_ba(0.8, 0.6, 0.4));

        let p = CircuitParams {
            eta_a: 0.7,
            eta_c: 0.2,
            ..CircuitParams::new(1.5, 0.35)
        };
        let s = build_circuit(&p).unwrap();
        assert_reduced(s.reduced_two_mode(MODE_B, MODE_A).unwrap(), loss_ac_covariances_ba(1.5, 0.35, 0.7));
        assert_reduced(s.reduced_two_mode(MODE_B, MODE_C).unwrap(), loss_ac_covariances_bc(1.5, 0.35, 0.2));

        let p = CircuitParams {
            n_b: 0.5,
            n_f: 1.5,
            ..CircuitParams::new(0.9, 0.45)
        };
        let s = build_circuit(&p).unwrap();
        assert_reduced(
            s.reduced_two_mode(MODE_B, MODE_A).unwrap(),
            thermal_covariances_ba(0.9, 0.45, 0.5, 1.5),
        );
        assert_reduced(
            s.reduced_two_mode(MODE_B, MODE_C).unwrap(),
            thermal_covariances_bc(0.9, 0.45, 0.5, 1.5),
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = [
            CircuitParams { eta_b: 1.2, ..CircuitParams::new(1.0, 0.5) },
            CircuitParams::new(1.0, -0.1),
            CircuitParams { n_f: -1.0, ..CircuitParams::new(1.0, 0.5) },
            CircuitParams::new(f64::INFINITY, 0.5),
        ];
        for p in bad {
            assert!(build_circuit(&p).is_err());
            assert!(closed_form_report(&p, ScenarioFamily::Ideal).is_err());
        }
    }

    #[test]
    fn effective_eta_cases() {
        let p = |eta0, eta_a, eta_c| CircuitParams {
            eta_a,
            eta_c,
            ..CircuitParams::new(1.0, eta0)
        };
        assert_abs_diff_eq!(effective_eta_f(&p(0.3, 0.6, 0.6)), 0.6, epsilon = 1e-15);
        assert_eq!(effective_eta_f(&p(0.5, 1.0, 0.0)), 0.5);
        assert_abs_diff_eq!(effective_eta_f(&p(0.8, 0.6, 1.0)), 0.68, epsilon = 1e-15);
    }

    #[test]
    fn family_detection() {
        let base = CircuitParams::new(1.0, 0.3);
        assert_eq!(ScenarioFamily::detect(&base), Some(ScenarioFamily::Ideal));
        let lb = CircuitParams { eta_b: 0.5, ..base };
        assert_eq!(ScenarioFamily::detect(&lb), Some(ScenarioFamily::LossB));
        let eq = CircuitParams { eta_b: 0.3, ..base };
        assert_eq!(ScenarioFamily::detect(&eq), Some(ScenarioFamily::EqualLoss));
        assert!(ScenarioFamily::LossB.admits(&eq));
        let ac = CircuitParams { eta_c: 0.5, ..base };
        assert_eq!(ScenarioFamily::detect(&ac), Some(ScenarioFamily::LossAc));
        let th = CircuitParams { n_b: 1.0, ..base };
        assert_eq!(ScenarioFamily::detect(&th), Some(ScenarioFamily::Thermal));
        let mixed = CircuitParams { n_b: 1.0, eta_a: 0.5, ..base };
        assert_eq!(ScenarioFamily::detect(&mixed), None);
        assert!(matches!(
            closed_form_report(&mixed, ScenarioFamily::Thermal),
            Err(Error::NoClosedForm(_))
        ));
        let both = CircuitParams { eta_b: 0.5, eta_a: 0.5, ..base };
        assert_eq!(ScenarioFamily::detect(&both), None);
    }

    #[test]
    fn printed_special_cases() {
        let p = CircuitParams { eta_b: 0.5, ..CircuitParams::new(2.0, 0.5) };
        let cf = closed_form_report(&p, ScenarioFamily::LossB).unwrap();
        assert_abs_diff_eq!(cf.d_ba, 0.5 * (1.0 + (-4.0f64).exp()), epsilon = 1e-15);
        assert_eq!(cf.d_ba, cf.d_bc);

        // the general lossy-B expression agrees with both specializations
        for r in [0.4, 2.0, 4.0] {
            assert_abs_diff_eq!(loss_b_d_ba(r, 0.5, 0.5), bowen_d(r), epsilon = 1e-10);
            assert_abs_diff_eq!(loss_b_balanced_d(r, 0.7), loss_b_d_bc(r, 0.5, 0.7), epsilon = 1e-10);
            assert_abs_diff_eq!(equal_loss_d_ba(r, 0.3), loss_b_d_ba(r, 0.3, 0.3), epsilon = 1e-10);
            assert_abs_diff_eq!(equal_loss_d_bc(r, 0.3), loss_b_d_bc(r, 0.3, 0.3), epsilon = 1e-10);
        }

        let p = CircuitParams { n_b: 1.0, n_f: 1.0, ..CircuitParams::new(1.0, 0.5) };
        let cf = closed_form_report(&p, ScenarioFamily::Thermal).unwrap();
        assert_abs_diff_eq!(cf.s_collective.unwrap(), 3.0 / 2f64.cosh(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            thermal_collective_steering(1.0, 1.0, 1.0),
            thermal_symmetric_steering(1.0, 1.0),
            epsilon = 1e-12
        );

        // lossy B through the effective channel with eta_F = 1
        for eta_b in [0.1, 0.6] {
            assert_abs_diff_eq!(
                effective_channel_steering(1.3, eta_b, 1.0),
                loss_b_collective_steering(1.3, eta_b),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn constructive_matches_closed_form_per_family() {
        let cases = [
            (CircuitParams::new(1.7, 0.25), ScenarioFamily::Ideal),
            (CircuitParams { eta_b: 0.35, ..CircuitParams::new(1.2, 0.6) }, ScenarioFamily::LossB),
            (CircuitParams { eta_b: 0.5, ..CircuitParams::new(2.0, 0.5) }, ScenarioFamily::LossB),
            (CircuitParams { eta_b: 0.7, ..CircuitParams::new(0.6, 0.7) }, ScenarioFamily::EqualLoss),
            (
                CircuitParams { eta_a: 0.3, eta_c: 0.3, ..CircuitParams::new(2.0, 0.8) },
                ScenarioFamily::LossAc,
            ),
            (
                CircuitParams { eta_a: 0.4, eta_c: 1.0, ..CircuitParams::new(2.0, 0.5) },
                ScenarioFamily::LossAc,
            ),
            (CircuitParams { n_b: 0.8, n_f: 0.8, ..CircuitParams::new(1.0, 0.2) }, ScenarioFamily::Thermal),
            (CircuitParams { n_b: 0.2, n_f: 1.4, ..CircuitParams::new(0.7, 0.6) }, ScenarioFamily::Thermal),
        ];
        for (p, family) in cases {
            let state = build_circuit(&p).unwrap();
            let rep = check_monogamy(&state, MODE_B, MODE_A, MODE_C).unwrap();
            let cf = closed_form_report(&p, family).unwrap();
            let gap = cf.max_discrepancy(&rep);
            assert!(gap <= 1e-10, "{family:?} {p:?}: discrepancy {gap:e}");
            assert_abs_diff_eq!(rep.ent_ba, cf.ent_ba.unwrap(), epsilon = 1e-10);
            assert_abs_diff_eq!(rep.ent_bc, cf.ent_bc.unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn mirror_and_balance_symmetries() {
        for (r, eta0, eta_b) in [(0.5, 0.2, 1.0), (2.0, 0.35, 0.6), (1.0, 0.9, 0.1)] {
            let p = CircuitParams { eta_b, ..CircuitParams::new(r, eta0) };
            let m = CircuitParams { eta_b, ..CircuitParams::new(r, 1.0 - eta0) };
            let s = build_circuit(&p).unwrap();
            let sm = build_circuit(&m).unwrap();
            assert_abs_diff_eq!(
                duan_d(&s, MODE_B, MODE_A).unwrap(),
                duan_d(&sm, MODE_B, MODE_C).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(loss_b_d_ba(r, eta0, eta_b), loss_b_d_bc(r, 1.0 - eta0, eta_b), epsilon = 1e-14);

            let bal = build_circuit(&CircuitParams { eta_b, ..CircuitParams::new(r, 0.5) }).unwrap();
            assert_abs_diff_eq!(
                duan_d(&bal, MODE_B, MODE_A).unwrap(),
                duan_d(&bal, MODE_B, MODE_C).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn unequal_steerer_losses_act_as_one_channel() {
        let p = CircuitParams { eta_a: 0.3, eta_c: 0.9, ..CircuitParams::new(1.5, 0.5) };
        let state = build_circuit(&p).unwrap();
        let s = steering_s_collective(&state, MODE_B, &[MODE_A, MODE_C], true).unwrap();
        let expected = effective_channel_steering(1.5, 1.0, effective_eta_f(&p));
        assert_abs_diff_eq!(s, expected, epsilon = 1e-12);
        let cf = closed_form_report(&p, ScenarioFamily::LossAc).unwrap();
        assert_abs_diff_eq!(cf.s_collective.unwrap(), expected, epsilon = 0.0);
    }

    #[test]
    fn params_json_defaults_and_rejection() {
        let p: CircuitParams = serde_json::from_str(r#"{"r": 2, "eta0": 0.5}"#).unwrap();
        assert_eq!(p, CircuitParams::new(2.0, 0.5));
        let p: CircuitParams = serde_json::from_str(r#"{"r": 1, "eta0": 0.5, "nB": 1, "nF": 1}"#).unwrap();
        assert_eq!(p.n_f, 1.0);
        assert!(serde_json::from_str::<CircuitParams>(r#"{"eta0": 0.5}"#).is_err());
        assert!(serde_json::from_str::<CircuitParams>(r#"{"r": 1, "eta0": 0.5, "etaX": 1}"#).is_err());

        let mut q = CircuitParams::new(0.0, 0.0);
        for (k, name) in ["r", "eta0", "etaB", "etaA", "etaC", "nB", "nF"].iter().enumerate() {
            q.set(name, k as f64 / 10.0).unwrap();
            assert_eq!(q.get(name).unwrap(), k as f64 / 10.0);
        }
        assert!(q.get("eta").is_err());
    }
}
