//! Closed-form effective quantities for the critical regime `H = a/ε + c`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fiber1d::m_effective;
use crate::geometry::GeometryData;

/// Tolerance used to detect half-integer ties of `x_center`.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub kappa: f64,
    pub a_field: f64,
    pub c_field: f64,
    pub epsilon: f64,
}

impl PhysParams {
    pub fn new(kappa: f64, a_field: f64, c_field: f64, epsilon: f64) -> Self {
        PhysParams {
            kappa,
            a_field,
            c_field,
            epsilon,
        }
    }

    /// Applied field H = a/ε + c.
    pub fn field(&self) -> f64 {
        self.a_field / self.epsilon + self.c_field
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa = {} must be > 0", self.kappa)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be > 0",
                self.epsilon
            )));
        }
        if !(self.a_field >= 0.0) || !self.c_field.is_finite() {
            return Err(Error::InvalidParameter(
                "a_field must be >= 0 and c_field finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub half_perimeter_l: f64,
    pub gamma0: f64,
    pub params: PhysParams,
    pub x_center: f64,
    pub n0: i64,
    pub i0: f64,
    pub two_minimizers: bool,
    pub e0: f64,
    pub lambda_predicted: f64,
    pub sc_delta_margin: f64,
    pub sc_prime_margin: f64,
}

impl EffectiveModel {
    /// Lattice frequency α_n = nπ/L + γ₀(a/ε + c).
    pub fn alpha_n(&self, n: i64) -> f64 {
        n as f64 * PI / self.half_perimeter_l + self.gamma0 * self.params.field()
    }

    /// β_n = |n + x_center|.
    pub fn beta_n(&self, n: i64) -> f64 {
        (n as f64 + self.x_center).abs()
    }

    /// Λ_κ^ε = (κ² − 𝔢₀)₊ / κ².
    pub fn lambda_kappa(&self) -> f64 {
        let k2 = self.params.kappa * self.params.kappa;
        (k2 - self.e0).max(0.0) / k2
    }
}

/// Rounding of −x with exact half-integers resolved to the smaller integer.
fn nearest_integer_smaller_tie(x: f64) -> (i64, bool) {
    let target = -x;
    let fl = target.floor();
    let frac = target - fl;
    if (frac - 0.5).abs() <= TIE_TOL {
        (fl as i64, true)
    } else if frac < 0.5 {
        (fl as i64, false)
    } else {
        (fl as i64 + 1, false)
    }
}

/// Distance from x to the set ½ℤ.
fn dist_to_half_integers(x: f64) -> f64 {
    let y = 2.0 * x;
    (y - y.round()).abs() / 2.0
}

pub fn effective_model_from_constants(half_perimeter_l: f64, gamma0: f64, p: &PhysParams) -> Result<EffectiveModel> {
    p.validate()?;
    let l = half_perimeter_l;
    let x_center = (l / PI) * (gamma0 * p.field() + 0.5 * p.a_field);
    let (n0, two_minimizers) = nearest_integer_smaller_tie(x_center);
    let i0 = (n0 as f64 + x_center).abs().min(0.5);
    let e0 = p.a_field * p.a_field / 12.0 + (PI * i0 / l).powi(2);
    Ok(EffectiveModel {
        half_perimeter_l: l,
        gamma0,
        params: *p,
        x_center,
        n0,
        i0,
        two_minimizers,
        e0,
        lambda_predicted: e0,
        sc_delta_margin: dist_to_half_integers(x_center),
        sc_prime_margin: p.kappa * p.kappa - e0,
    })
}

pub fn effective_model(geom: &GeometryData, p: &PhysParams) -> Result<EffectiveModel> {
    effective_model_from_constants(geom.half_perimeter_l, geom.gamma0, p)
}

/// (π/L)² inf_n |n + bLγ₀/π|².
pub fn lambda_small_field(geom: &GeometryData, b: f64) -> Result<f64> {
    lambda_small_field_from_constants(geom.half_perimeter_l, geom.gamma0, b)
}

pub fn lambda_small_field_from_constants(l: f64, gamma0: f64, b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::InvalidParameter(format!("b = {b} must be >= 0")));
    }
    let x = b * l * gamma0 / PI;
    let d = (x - x.round()).abs();
    Ok((PI / l * d).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationFlags {
    pub sc: bool,
    pub sc_prime: bool,
}

pub fn separation_check(model: &EffectiveModel, delta: f64) -> Result<SeparationFlags> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    // margins are compared with the same tolerance used for ties
    Ok(SeparationFlags {
        sc: model.sc_delta_margin >= delta - TIE_TOL,
        sc_prime: model.sc_prime_margin >= delta - TIE_TOL,
    })
}

/// Lower bound d₀/2 on λ₂ − λ₁. Returns `f64::INFINITY` when the α-window holds
/// no competitor to n₀.
pub fn gap_prediction(model: &EffectiveModel, delta: f64) -> Result<f64> {
    let flags = separation_check(model, delta)?;
    if !flags.sc {
        return Err(Error::GapUnavailable(format!(
            "separation condition fails at level {delta} (margin {:.3e}); the gap bound is unavailable",
            model.sc_delta_margin
        )));
    }
    let a = model.params.a_field;
    let window = 10.0 * (a + PI / (2.0 * model.half_perimeter_l));
    Ok(0.5 * lattice_gap(model, window))
}

/// d₀ = min over n ≠ n₀ with |α_n| ≤ window of m(α_n) − m(α_{n₀}).
fn lattice_gap(model: &EffectiveModel, window: f64) -> f64 {
    let a = model.params.a_field;
    let step = PI / model.half_perimeter_l;
    let shift = model.gamma0 * model.params.field();
    let n_lo = ((-window - shift) / step).ceil() as i64;
    let n_hi = ((window - shift) / step).floor() as i64;
    let m0 = m_effective(model.alpha_n(model.n0), a);
    let mut best = f64::INFINITY;
    for n in n_lo..=n_hi {
        if n == model.n0 {
            continue;
        }
        best = best.min(m_effective(model.alpha_n(n), a) - m0);
    }
    best
}

/// Minimum of m(α_n, a) over the lattice window, for cross-checking 𝔢₀.
pub fn e0_from_lattice(model: &EffectiveModel) -> f64 {
    let a = model.params.a_field;
    let window = 10.0 * (a + PI / (2.0 * model.half_perimeter_l));
    let step = PI / model.half_perimeter_l;
    let shift = model.gamma0 * model.params.field();
    let n_lo = ((-window - shift) / step).ceil() as i64;
    let n_hi = ((window - shift) / step).floor() as i64;
    (n_lo..=n_hi)
        .map(|n| m_effective(model.alpha_n(n), a))
        .fold(f64::INFINITY, f64::min)
}

pub fn breakdown_threshold(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must be > 0")));
    }
    Ok(2.0 * 3f64.sqrt() * kappa)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LittleParksPoint {
    pub field: f64,
    pub lambda_predicted: f64,
    pub superconducting: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LittleParksSequence {
    pub n: i64,
    pub epsilon: f64,
    pub points: [LittleParksPoint; 3],
}

/// Thickness ε̃_N and fields H⁽¹⁾ < H⁽²⁾ < H⁽³⁾ of the non-monotone construction.
pub fn little_parks_sequence(geom: &GeometryData, kappa: f64, a_field: f64, n: i64) -> Result<LittleParksSequence> {
    let l = geom.half_perimeter_l;
    let g = geom.gamma0;
    let k2 = kappa * kappa;
    let lower = a_field * a_field / 12.0;
    let upper = lower + PI * PI / (4.0 * l * l);
    if !(k2 > lower && k2 < upper) {
        return Err(Error::KappaOutsideWindow {
            kappa_sq: k2,
            lower,
            upper,
        });
    }
    if !((n as f64) > a_field / 2.0) {
        return Err(Error::InvalidParameter(format!("N = {n} must exceed a/2 = {}", a_field / 2.0)));
    }
    let epsilon = a_field * l * g / PI / (n as f64 - a_field / 2.0);
    let h2 = a_field / epsilon;
    let shift = PI / (2.0 * g * l);
    let mk = |field: f64, lambda: f64| LittleParksPoint {
        field,
        lambda_predicted: lambda,
        superconducting: lambda < k2,
    };
    Ok(LittleParksSequence {
        n,
        epsilon,
        points: [mk(h2 - shift, upper), mk(h2, lower), mk(h2 + shift, upper)],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CriticalStatus {
    /// Largest field in the scan range at which λ < κ².
    Found(f64),
    /// λ < κ² still holds at the top of the range.
    RangeExhausted,
    /// λ ≥ κ² on the whole scanned range.
    NeverSuperconducting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalFieldReport {
    pub status: CriticalStatus,
    /// Superconducting intervals (λ < κ²) with bisection-refined endpoints.
    pub intervals: Vec<(f64, f64)>,
    pub samples: Vec<(f64, f64)>,
}

/// Default scan step π/(4γ₀L).
pub fn default_field_step(geom: &GeometryData) -> f64 {
    PI / (4.0 * geom.gamma0 * geom.half_perimeter_l)
}

/// Scan H ∈ [h_min, h_max] upward with `step`, bisect every crossing of λ = κ².
pub fn critical_field<F>(kappa: f64, h_min: f64, h_max: f64, step: f64, mut lambda_fn: F) -> Result<CriticalFieldReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(h_max >= h_min) || !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid scan range [{h_min}, {h_max}] with step {step}"
        )));
    }
    let k2 = kappa * kappa;
    let n = ((h_max - h_min) / step).ceil() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let h = (h_min + i as f64 * step).min(h_max);
        samples.push((h, lambda_fn(h)?));
    }
    let sc = |l: f64| l < k2;
    let mut refine = |mut lo: f64, mut hi: f64, lo_sc: bool| -> Result<f64> {
        for _ in 0..60 {
            if hi - lo <= 1e-10 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if sc(lambda_fn(mid)?) == lo_sc {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut intervals = Vec::new();
    let mut start = if sc(samples[0].1) { Some(samples[0].0) } else { None };
    for w in samples.windows(2) {
        let (h0, l0) = w[0];
        let (h1, l1) = w[1];
        match (sc(l0), sc(l1)) {
            (false, true) => start = Some(refine(h0, h1, false)?),
            (true, false) => {
                let end = refine(h0, h1, true)?;
                intervals.push((start.take().unwrap_or(h0), end));
            }
            _ => {}
        }
    }
    let last = samples.last().unwrap();
    let status = if let Some(s) = start {
        intervals.push((s, last.0));
        CriticalStatus::RangeExhausted
    } else if let Some(&(_, end)) = intervals.last() {
        CriticalStatus::Found(end)
    } else {
        CriticalStatus::NeverSuperconducting
    };
    Ok(CriticalFieldReport {
        status,
        intervals,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_resolves_to_smaller_integer() {
        assert_eq!(nearest_integer_smaller_tie(50.5), (-51, true));
        assert_eq!(nearest_integer_smaller_tie(50.0), (-50, false));
        assert_eq!(nearest_integer_smaller_tie(50.3), (-50, false));
        assert_eq!(nearest_integer_smaller_tie(50.7), (-51, false));
        assert_eq!(nearest_integer_smaller_tie(-0.5), (0, true));
    }

    #[test]
    fn window_without_competitor_gives_infinite_gap() {
        let m = effective_model_from_constants(std::f64::consts::PI, 0.5, &PhysParams::new(1.0, 1.0, 0.5, 0.02)).unwrap();
        assert!(lattice_gap(&m, 1e-3).is_infinite());
    }
}
