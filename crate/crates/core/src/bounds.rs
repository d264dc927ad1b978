//! Closed-form quantitative bounds derived from the growth condition
//! `|F(t, x)| ≤ μ(t)(1 + |x|)`.
//!
//! | bound            | value                                                |
//! |------------------|------------------------------------------------------|
//! | Gronwall upper   | `(|x₀| + 1)·e^{‖μ‖₁} - 1`                            |
//! | escape lower     | `(|x₀| + 1)·e^{-‖μ‖₁} - 1`                           |
//! | a-priori `M`     | `(‖μ‖₁ + (R + 1)·e^{‖μ‖₁} - 1)·e^{‖μ‖₁}`             |
//! | invariant ball   | `(c‖μ‖₁ + d)/(1 - c)` and its Gronwall-corrected form |
//!
//! The invariant-ball radius of the Poincaré operator `P = g ∘ S_F` comes in
//! two flavours. The uncorrected one assumes `S_F(B̄(r)) ⊂ B̄(r + ‖μ‖₁)`, which
//! only follows from the bound `|ẋ| ≤ μ(t)`. Under affine growth the
//! reachable set is `B̄((r + 1)e^{‖μ‖₁} - 1)`, giving the corrected radius
//! `(c(e^{‖μ‖₁} - 1) + d)/(1 - c·e^{‖μ‖₁})`, defined only when
//! `c·e^{‖μ‖₁} < 1`. Solvers use the corrected one.

use serde::Serialize;

/// `c·e^{‖μ‖₁}` this close to 1 counts as the boundary of solvability.
pub const CONTRACTION_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    GronwallUpper,
    EscapeLower,
    AprioriM,
    SchauderRadius,
}

/// Inputs echoed alongside a bound value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundInputs {
    pub x0_norm: Option<f64>,
    pub mu_total: f64,
    pub radius: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub inputs: BoundInputs,
    pub value: f64,
    /// Only for [`BoundKind::SchauderRadius`]: the corrected radius, `None`
    /// when `c·e^{‖μ‖₁} ≥ 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<Option<f64>>,
}

/// `(|x₀| + 1)·e^{‖μ‖₁} - 1`.
pub fn gronwall_upper(x0_norm: f64, mu_total: f64) -> f64 {
    (x0_norm + 1.0) * mu_total.exp() - 1.0
}

/// `(|x₀| + 1)·e^{-‖μ‖₁} - 1`; negative values are vacuous.
pub fn escape_lower(x0_norm: f64, mu_total: f64) -> f64 {
    (x0_norm + 1.0) * (-mu_total).exp() - 1.0
}

/// `(‖μ‖₁ + (R + 1)·e^{‖μ‖₁} - 1)·e^{‖μ‖₁}`.
pub fn apriori_m(radius: f64, mu_total: f64) -> f64 {
    let e = mu_total.exp();
    (mu_total + (radius + 1.0) * e - 1.0) * e
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchauderRadius {
    /// `(c‖μ‖₁ + d)/(1 - c)`.
    pub linear_radius: f64,
    /// Smallest `r` with `c((r + 1)e^{‖μ‖₁} - 1) + d ≤ r`.
    pub corrected_radius: Option<f64>,
}

/// Invariant-ball radii for `P = g ∘ S_F` with `|g(x)| ≤ c‖x‖ + d`.
/// Requires `0 < c < 1` (`None` otherwise).
pub fn schauder_radius(c: f64, d: f64, mu_total: f64) -> Option<SchauderRadius> {
    if !(c > 0.0 && c < 1.0) {
        return None;
    }
    let e = mu_total.exp();
    let linear_radius = (c * mu_total + d) / (1.0 - c);
    let ce = c * e;
    let corrected_radius = if ce < 1.0 - CONTRACTION_MARGIN { Some((c * (e - 1.0) + d) / (1.0 - ce)) } else { None };
    Some(SchauderRadius { linear_radius, corrected_radius })
}

impl BoundReport {
    pub fn gronwall(x0_norm: f64, mu_total: f64) -> Self {
        BoundReport {
            kind: BoundKind::GronwallUpper,
            inputs: BoundInputs { x0_norm: Some(x0_norm), mu_total, ..Default::default() },
            value: gronwall_upper(x0_norm, mu_total),
            corrected: None,
        }
    }

    pub fn escape(x0_norm: f64, mu_total: f64) -> Self {
        BoundReport {
            kind: BoundKind::EscapeLower,
            inputs: BoundInputs { x0_norm: Some(x0_norm), mu_total, ..Default::default() },
            value: escape_lower(x0_norm, mu_total),
            corrected: None,
        }
    }

    pub fn apriori(radius: f64, mu_total: f64) -> Self {
        BoundReport {
            kind: BoundKind::AprioriM,
            inputs: BoundInputs { radius: Some(radius), mu_total, ..Default::default() },
            value: apriori_m(radius, mu_total),
            corrected: None,
        }
    }

    pub fn schauder(c: f64, d: f64, mu_total: f64) -> Option<Self> {
        let radii = schauder_radius(c, d, mu_total)?;
        Some(BoundReport {
            kind: BoundKind::SchauderRadius,
            inputs: BoundInputs { c: Some(c), d: Some(d), mu_total, ..Default::default() },
            value: radii.linear_radius,
            corrected: Some(radii.corrected_radius),
        })
    }
}
