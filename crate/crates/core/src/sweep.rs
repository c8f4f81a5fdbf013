//! Parameter sweeps over the tripartite circuit, written as CSV.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{build_circuit, CircuitParams, ScenarioFamily, MODE_A, MODE_B, MODE_C};
use crate::optimize::linspace;
use crate::quantifiers::{check_monogamy, QuantifierReport};

/// Grid density used by the presets.
pub const PRESET_STEPS: usize = 101;

/// An output column tag. `residuals` expands to five columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    #[serde(rename = "D_BA")]
    DBa,
    #[serde(rename = "D_BC")]
    DBc,
    #[serde(rename = "D_sum")]
    DSum,
    /// Ent at the gain `g_BA` entering the bound.
    #[serde(rename = "Ent_BA")]
    EntBa,
    #[serde(rename = "Ent_BC")]
    EntBc,
    #[serde(rename = "Ent_prod")]
    EntProd,
    #[serde(rename = "S_BA")]
    SBa,
    #[serde(rename = "S_BC")]
    SBc,
    #[serde(rename = "S_coll")]
    SColl,
    #[serde(rename = "g_BA")]
    GBa,
    #[serde(rename = "g_BC")]
    GBc,
    #[serde(rename = "M_B")]
    MB,
    #[serde(rename = "residuals")]
    Residuals,
}

impl Column {
    fn headers(self) -> Vec<&'static str> {
        match self {
            Self::DBa => vec!["D_BA"],
            Self::DBc => vec!["D_BC"],
            Self::DSum => vec!["D_sum"],
            Self::EntBa => vec!["Ent_BA"],
            Self::EntBc => vec!["Ent_BC"],
            Self::EntProd => vec!["Ent_prod"],
            Self::SBa => vec!["S_BA"],
            Self::SBc => vec!["S_BC"],
            Self::SColl => vec!["S_coll"],
            Self::GBa => vec!["g_BA"],
            Self::GBc => vec!["g_BC"],
            Self::MB => vec!["M_B"],
            Self::Residuals => vec!["r1", "r2", "r3_product", "r3_sum", "r4"],
        }
    }

    fn values(self, q: &QuantifierReport) -> Vec<f64> {
        match self {
            Self::DBa => vec![q.d_ba],
            Self::DBc => vec![q.d_bc],
            Self::DSum => vec![q.d_ba + q.d_bc],
            Self::EntBa => vec![q.ent_ba_at_g],
            Self::EntBc => vec![q.ent_bc_at_g],
            Self::EntProd => vec![q.ent_ba_at_g * q.ent_bc_at_g],
            Self::SBa => vec![q.s_ba],
            Self::SBc => vec![q.s_bc],
            Self::SColl => vec![q.s_collective],
            Self::GBa => vec![q.g_ba],
            Self::GBc => vec![q.g_bc],
            Self::MB => vec![q.m_b],
            Self::Residuals => q.residuals().iter().map(|r| r.1).collect(),
        }
    }
}

/// A one-parameter sweep. Parameters listed in `tied` follow the swept
/// value; the rest come from `fixed` and the circuit defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: ScenarioFamily,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    pub sweep_var: String,
    #[serde(default)]
    pub tied: Vec<String>,
    /// `(start, stop, steps)`, endpoints included.
    pub range: (f64, f64, usize),
    pub outputs: Vec<Column>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Circuit parameters at sweep value `x`.
    pub fn params_at(&self, x: f64) -> Result<CircuitParams> {
        // r and eta0 have no defaults and must be fixed or swept.
        let mut p = CircuitParams::new(f64::NAN, f64::NAN);
        for (name, &v) in &self.fixed {
            p.set(name, v)?;
        }
        p.set(&self.sweep_var, x)?;
        for name in &self.tied {
            p.set(name, x)?;
        }
        p.validate()?;
        if !self.scenario.admits(&p) {
            return Err(Error::InvalidParameter(format!(
                "parameters at {}={x} fall outside the {} family",
                self.sweep_var,
                self.scenario.name()
            )));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (start, stop, steps) = self.range;
        if steps < 2 {
            return Err(Error::InvalidParameter("a sweep needs at least 2 steps".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidParameter("no output columns requested".into()));
        }
        if self.fixed.contains_key(&self.sweep_var) || self.tied.iter().any(|t| self.fixed.contains_key(t)) {
            return Err(Error::InvalidParameter("swept parameter also listed as fixed".into()));
        }
        self.params_at(start)?;
        self.params_at(stop)?;
        Ok(())
    }

    pub fn headers(&self) -> Vec<String> {
        std::iter::once(self.sweep_var.clone())
            .chain(self.outputs.iter().flat_map(|c| c.headers()).map(String::from))
            .collect()
    }

    /// Evaluates every grid point in parallel; rows come back in grid order.
    pub fn run(&self) -> Result<Vec<SweepRow>> {
        self.validate()?;
        let (start, stop, steps) = self.range;
        linspace(start, stop, steps)
            .into_par_iter()
            .map(|x| {
                let state = build_circuit(&self.params_at(x)?)?;
                let q = check_monogamy(&state, MODE_B, MODE_A, MODE_C)?;
                let values = self.outputs.iter().flat_map(|c| c.values(&q)).collect();
                Ok(SweepRow { x, values })
            })
            .collect()
    }

    /// Indices of residual columns within `SweepRow::values`.
    pub fn residual_columns(&self) -> Vec<usize> {
        let mut k = 0;
        let mut out = Vec::new();
        for c in &self.outputs {
            let width = c.headers().len();
            if *c == Column::Residuals {
                out.extend(k..k + width);
            }
            k += width;
        }
        out
    }
}

/// Twelve significant digits; scientific notation outside `[1e-4, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if !(1e-4..1e12).contains(&a) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - a.log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], mut out: W) -> Result<()> {
    let mut text = spec.headers().join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&format_number(row.x));
        for v in &row.values {
            text.push(',');
            text.push_str(&format_number(*v));
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

const D_COLUMNS: &[Column] = &[Column::DBa, Column::DBc, Column::DSum, Column::SColl, Column::Residuals];
const ENT_COLUMNS: &[Column] = &[
    Column::EntBa,
    Column::EntBc,
    Column::EntProd,
    Column::MB,
    Column::SColl,
    Column::Residuals,
];
const GAIN_COLUMNS: &[Column] = &[Column::GBa, Column::GBc];
const STEERING_COLUMNS: &[Column] = &[Column::SColl];

fn make(
    scenario: ScenarioFamily,
    fixed: &[(&str, f64)],
    sweep_var: &str,
    tied: &[&str],
    stop: f64,
    outputs: &[Column],
) -> SweepSpec {
    SweepSpec {
        scenario,
        fixed: fixed.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        sweep_var: sweep_var.into(),
        tied: tied.iter().map(|s| s.to_string()).collect(),
        range: (0.0, stop, PRESET_STEPS),
        outputs: outputs.to_vec(),
    }
}

/// Every preset name, aliases included.
pub const PRESETS: &[&str] = &[
    "fig3a", "fig3b", "fig4", "fig4a", "fig4b", "fig4c", "fig4d", "fig5", "fig5a", "fig5b", "fig6a", "fig6b",
    "fig6c", "fig6d", "fig6e", "fig7", "fig7a", "fig7b", "fig7c", "fig7e", "fig8", "fig8a", "fig8b", "fig8c",
    "fig8d", "fig9", "fig9a", "fig9b", "fig9c", "fig9d", "fig10", "fig10a", "fig10b", "fig10c", "fig10d",
    "fig11", "fig11a", "fig11b", "fig11c", "fig11d", "fig11e", "fig12", "fig12a", "fig12b", "fig12c", "fig12d",
];

/// Figure presets. Panels with two values of a parameter use suffixes
/// a/b (and c/d for companion gain or steering panels); the bare name
/// aliases the panel with the larger squeezing or the symmetric split.
/// Thermal presets tie `nB = nF` and sweep it over `[0, 3]`.
pub fn preset(name: &str) -> Result<SweepSpec> {
    use ScenarioFamily::*;
    let thermal = |eta0: f64, outputs| make(Thermal, &[("r", 1.0), ("eta0", eta0)], "nB", &["nF"], 3.0, outputs);
    let loss_ac = |eta0: f64, tie: bool, outputs| {
        if tie {
            make(LossAc, &[("r", 2.0), ("eta0", eta0)], "etaA", &["etaC"], 1.0, outputs)
        } else {
            make(LossAc, &[("r", 2.0), ("eta0", eta0)], "etaA", &[], 1.0, outputs)
        }
    };
    let spec = match name {
        "fig3a" => make(Ideal, &[("r", 0.5)], "eta0", &[], 1.0, D_COLUMNS),
        "fig3b" => make(Ideal, &[("r", 2.0)], "eta0", &[], 1.0, D_COLUMNS),
        "fig4a" => make(EqualLoss, &[("r", 0.5)], "eta0", &["etaB"], 1.0, D_COLUMNS),
        "fig4" | "fig4b" => make(EqualLoss, &[("r", 2.0)], "eta0", &["etaB"], 1.0, D_COLUMNS),
        "fig4c" => make(EqualLoss, &[("r", 0.5)], "eta0", &["etaB"], 1.0, STEERING_COLUMNS),
        "fig4d" => make(EqualLoss, &[("r", 2.0)], "eta0", &["etaB"], 1.0, STEERING_COLUMNS),
        "fig5a" => make(LossB, &[("r", 0.5), ("eta0", 0.5)], "etaB", &[], 1.0, D_COLUMNS),
        "fig5" | "fig5b" => make(LossB, &[("r", 2.0), ("eta0", 0.5)], "etaB", &[], 1.0, D_COLUMNS),
        "fig6a" => loss_ac(0.5, true, D_COLUMNS),
        "fig6b" => loss_ac(0.8, true, D_COLUMNS),
        "fig6c" => loss_ac(0.5, false, D_COLUMNS),
        "fig6d" => loss_ac(0.8, false, D_COLUMNS),
        "fig6e" => loss_ac(0.5, true, STEERING_COLUMNS),
        "fig7a" => thermal(0.2, D_COLUMNS),
        "fig7" | "fig7b" => thermal(0.5, D_COLUMNS),
        "fig7c" => thermal(0.8, D_COLUMNS),
        "fig7e" => thermal(0.5, STEERING_COLUMNS),
        "fig8a" => make(Ideal, &[("r", 0.5)], "eta0", &[], 1.0, ENT_COLUMNS),
        "fig8" | "fig8b" => make(Ideal, &[("r", 2.0)], "eta0", &[], 1.0, ENT_COLUMNS),
        "fig8c" => make(Ideal, &[("r", 0.5)], "eta0", &[], 1.0, GAIN_COLUMNS),
        "fig8d" => make(Ideal, &[("r", 2.0)], "eta0", &[], 1.0, GAIN_COLUMNS),
        "fig9a" => make(EqualLoss, &[("r", 0.5)], "eta0", &["etaB"], 1.0, ENT_COLUMNS),
        "fig9" | "fig9b" => make(EqualLoss, &[("r", 2.0)], "eta0", &["etaB"], 1.0, ENT_COLUMNS),
        "fig9c" => make(EqualLoss, &[("r", 0.5)], "eta0", &["etaB"], 1.0, GAIN_COLUMNS),
        "fig9d" => make(EqualLoss, &[("r", 2.0)], "eta0", &["etaB"], 1.0, GAIN_COLUMNS),
        "fig10" | "fig10a" => make(LossB, &[("r", 2.0), ("eta0", 0.5)], "etaB", &[], 1.0, ENT_COLUMNS),
        "fig10b" => make(LossB, &[("r", 2.0), ("eta0", 0.8)], "etaB", &[], 1.0, ENT_COLUMNS),
        "fig10c" => make(LossB, &[("r", 2.0), ("eta0", 0.5)], "etaB", &[], 1.0, GAIN_COLUMNS),
        "fig10d" => make(LossB, &[("r", 2.0), ("eta0", 0.8)], "etaB", &[], 1.0, GAIN_COLUMNS),
        "fig11" | "fig11a" => loss_ac(0.5, true, ENT_COLUMNS),
        "fig11b" => loss_ac(0.8, true, ENT_COLUMNS),
        "fig11c" => loss_ac(0.5, false, ENT_COLUMNS),
        "fig11d" => loss_ac(0.8, false, ENT_COLUMNS),
        "fig11e" => loss_ac(0.5, true, GAIN_COLUMNS),
        "fig12" | "fig12a" => thermal(0.8, ENT_COLUMNS),
        "fig12b" => thermal(0.5, ENT_COLUMNS),
        "fig12c" => thermal(0.8, GAIN_COLUMNS),
        "fig12d" => thermal(0.5, GAIN_COLUMNS),
        _ => return Err(Error::InvalidParameter(format!("unknown preset {name:?}"))),
    };
    Ok(spec)
}
