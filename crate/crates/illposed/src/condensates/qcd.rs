//! Theory side: running coupling, Adler function, OPE and the perturbative
//! continuum above the data.

use crate::quad::composite_gauss_legendre;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Pion decay constant (GeV).
pub const F_PI: f64 = 0.1307;
/// Λ in the MS-bar scheme for three flavours (GeV).
pub const LAMBDA_MSBAR: f64 = 0.326;
/// Adler function coefficients K_0..K_3.
pub const ADLER_K: [f64; 4] = [1.0, 1.0, 1.64, 6.37];
/// β-function coefficients for da/d ln Q² = −Σ β_n a^{n+2}.
pub const BETA: [f64; 4] = [9.0 / 4.0, 4.0, 10.06, 47.23];
/// Admissible NLO constants of the dimension-6 V−A coefficient.
pub const C6_TILDE: [f64; 2] = [89.0 / 12.0, 247.0 / 12.0];
/// NLO coefficients of the V+A dimension-4 and -6 terms at μ² = −s.
const C4_VPA: f64 = 7.0 / 6.0;
const C6_VPA: f64 = 29.0 / 24.0;

const ANCHOR_Q2: f64 = 1e6;
const RK_TOL: f64 = 1e-11;
const COUPLING_LIMIT: f64 = 10.0;

/// Condensate values O_d keyed by dimension d (GeV^d).
pub type Condensates = BTreeMap<u32, f64>;

/// Strong coupling at one scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// α_s/π.
    pub a: f64,
    pub alpha: f64,
}

fn beta_fn(a: f64, loops: usize) -> f64 {
    -BETA[..loops].iter().enumerate().map(|(n, b)| b * a.powi(n as i32 + 2)).sum::<f64>()
}

fn rk4_step(a: f64, h: f64, loops: usize) -> f64 {
    let k1 = beta_fn(a, loops);
    let k2 = beta_fn(a + 0.5 * h * k1, loops);
    let k3 = beta_fn(a + 0.5 * h * k2, loops);
    let k4 = beta_fn(a + h * k3, loops);
    a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Large-Q² expansion of a in 1/ln(Q²/Λ²), truncated at the loop order.
fn asymptotic_coupling(q2: f64, loops: usize, lambda: f64) -> f64 {
    let t = (q2 / (lambda * lambda)).ln();
    let l = t.ln();
    let b0 = BETA[0];
    let (b1, b2, b3) = (BETA[1] / b0, BETA[2] / b0, BETA[3] / b0);
    let x = 1.0 / (b0 * t);
    let mut a = x;
    if loops >= 2 {
        a -= b1 * l * x * x;
    }
    if loops >= 3 {
        a += (b1 * b1 * (l * l - l - 1.0) + b2) * x.powi(3);
    }
    if loops >= 4 {
        a += (b1.powi(3) * (-l.powi(3) + 2.5 * l * l + 2.0 * l - 0.5) - 3.0 * b1 * b2 * l + 0.5 * b3) * x.powi(4);
    }
    a
}

/// α_s(Q²) at `loops` = 1..4: the asymptotic expansion at Q² = 10⁶ GeV²
/// (pure 1/(β_0 ln(Q²/Λ²)) at one loop), run to Q² with step-doubling RK4
/// in ln Q².
pub fn alpha_s(q2: f64, loops: u32, lambda: f64) -> Result<Coupling> {
    if !(1..=4).contains(&loops) {
        return Err(Error::Parameter(format!("loop order {loops} outside 1..4")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Parameter("Λ must be positive".into()));
    }
    if !(q2 > lambda * lambda) || !q2.is_finite() {
        return Err(Error::Domain(format!("Q² = {q2} must exceed Λ² = {}", lambda * lambda)));
    }
    let loops = loops as usize;
    let t0 = ANCHOR_Q2.ln();
    let t1 = q2.ln();
    let mut a = asymptotic_coupling(ANCHOR_Q2, loops, lambda);
    let mut t = t0;
    let span = t1 - t0;
    let mut h = span / 16.0;
    let mut steps = 0;
    while (t1 - t).abs() > 1e-14 * t1.abs().max(1.0) {
        if (t + h - t1) * span.signum() > 0.0 {
            h = t1 - t;
        }
        let full = rk4_step(a, h, loops);
        let half = rk4_step(rk4_step(a, 0.5 * h, loops), 0.5 * h, loops);
        let err = (half - full).abs() / 15.0;
        if !half.is_finite() || half > COUPLING_LIMIT || half <= 0.0 {
            if h.abs() < 1e-10 {
                return Err(Error::Domain(format!("coupling diverges above Q² = {q2}")));
            }
            h *= 0.25;
            continue;
        }
        if err <= RK_TOL * half.abs() {
            a = half + (half - full) / 15.0;
            t += h;
        }
        let grow = if err > 0.0 { 0.9 * (RK_TOL * half.abs() / err).powf(0.2) } else { 4.0 };
        h *= grow.clamp(0.2, 4.0);
        steps += 1;
        if steps > 100_000 {
            return Err(Error::Numerical("coupling integration did not converge".into()));
        }
    }
    Ok(Coupling { a, alpha: PI * a })
}

/// Hadronic channel of the correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "V-A")]
    VMinusA,
    V,
    A,
    #[serde(rename = "V+A")]
    VPlusA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Order {
    #[default]
    LO,
    NLO,
}

fn default_loops() -> u32 {
    4
}

fn default_lambda() -> f64 {
    LAMBDA_MSBAR
}

/// Theory model for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub channel: Channel,
    #[serde(default)]
    pub order: Order,
    /// NLO constant of the V−A dimension-6 term (0 when unused).
    #[serde(default)]
    pub nlo_c6_tilde: f64,
    /// Condensate dimensions in play.
    pub dims: Vec<u32>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Loop order of the running coupling.
    #[serde(default = "default_loops")]
    pub loops: u32,
    /// Optional K_4 estimate added to the Adler series.
    #[serde(default)]
    pub k4: Option<f64>,
}

impl ChannelModel {
    pub fn new(channel: Channel, dims: &[u32]) -> Result<Self> {
        let m = Self {
            channel,
            order: Order::LO,
            nlo_c6_tilde: 0.0,
            dims: dims.to_vec(),
            lambda: LAMBDA_MSBAR,
            loops: 4,
            k4: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_nlo(mut self, c6_tilde: f64) -> Result<Self> {
        self.order = Order::NLO;
        self.nlo_c6_tilde = c6_tilde;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for &d in &self.dims {
            if ![4, 6, 8, 10].contains(&d) {
                return Err(Error::Parameter(format!("dimension {d} not in {{4, 6, 8, 10}}")));
            }
            if d == 4 && self.channel == Channel::VMinusA {
                return Err(Error::Parameter("the V-A correlator starts at dimension 6".into()));
            }
            if seen.contains(&d) {
                return Err(Error::Parameter(format!("dimension {d} listed twice")));
            }
            seen.push(d);
        }
        let c = self.nlo_c6_tilde;
        if c != 0.0 && !C6_TILDE.iter().any(|v| (v - c).abs() < 1e-12) {
            return Err(Error::Parameter(format!("c6 constant {c} is not one of 0, 89/12, 247/12")));
        }
        if self.order == Order::NLO && matches!(self.channel, Channel::V | Channel::A) {
            return Err(Error::Parameter("NLO coefficients are only available for V-A and V+A".into()));
        }
        if !(1..=4).contains(&self.loops) || !(self.lambda > 0.0) {
            return Err(Error::Parameter("loop order must be 1..4 and Λ positive".into()));
        }
        Ok(())
    }

    pub fn coupling(&self, q2: f64) -> Result<f64> {
        Ok(alpha_s(q2, self.loops, self.lambda)?.a)
    }

    /// Number of Adler functions entering the channel.
    fn adler_multiplicity(&self) -> f64 {
        match self.channel {
            Channel::VMinusA => 0.0,
            Channel::V | Channel::A => 1.0,
            Channel::VPlusA => 2.0,
        }
    }

    fn has_pion_pole_in_ope(&self) -> bool {
        matches!(self.channel, Channel::A | Channel::VPlusA)
    }

    fn check_dims(&self, o: &Condensates) -> Result<()> {
        match o.keys().find(|d| !self.dims.contains(d)) {
            Some(d) => Err(Error::Parameter(format!("dimension {d} is not part of the model"))),
            None => Ok(()),
        }
    }

    /// NLO factor 1 + c_d a(−s) of the dimension-d term.
    fn nlo_factor(&self, d: u32, a: f64) -> f64 {
        if self.order == Order::LO {
            return 1.0;
        }
        let c = match (self.channel, d) {
            (Channel::VMinusA, 6) => 0.25 * self.nlo_c6_tilde,
            (Channel::VPlusA, 4) => C4_VPA,
            (Channel::VPlusA, 6) => C6_VPA,
            _ => 0.0,
        };
        1.0 + c * a
    }
}

/// D(s) = (1/4π²) Σ K_n a(−s)ⁿ for one channel, s < 0.
pub fn adler_d(s: f64, model: &ChannelModel) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::Domain(format!("Adler function needs s < 0, got {s}")));
    }
    let a = model.coupling(-s)?;
    let mut sum = 0.0;
    let mut an = 1.0;
    for k in ADLER_K {
        sum += k * an;
        an *= a;
    }
    if let Some(k4) = model.k4 {
        sum += k4 * an;
    }
    Ok(sum / (4.0 * PI * PI))
}

/// OPE side F_QCD(s) at space-like s.
pub fn ope_f(s: f64, o: &Condensates, model: &ChannelModel) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::Domain(format!("OPE needs s < 0, got {s}")));
    }
    model.check_dims(o)?;
    let a = if model.order == Order::NLO { model.coupling(-s)? } else { 0.0 };
    let mut f = 0.0;
    for (&d, &od) in o {
        let power = od / (-s).powi(d as i32 / 2);
        let multiplicity = if model.channel == Channel::VMinusA { 1.0 } else { d as f64 / 2.0 };
        f += multiplicity * power * model.nlo_factor(d, a);
    }
    let m = model.adler_multiplicity();
    if m > 0.0 {
        f += m * adler_d(s, model)?;
    }
    if model.has_pion_pole_in_ope() {
        f += F_PI * F_PI / s;
    }
    Ok(f)
}

/// Imaginary part above the data, s > 0.
pub fn f_qcd_timelike(s: f64, o: &Condensates, model: &ChannelModel) -> Result<f64> {
    match (model.channel, model.order) {
        (Channel::VMinusA, Order::LO) => Ok(0.0),
        (Channel::VMinusA, Order::NLO) => {
            let o6 = o.get(&6).copied().unwrap_or(0.0);
            if o6 == 0.0 {
                return Ok(0.0);
            }
            let alpha = PI * model.coupling(s)?;
            Ok(o6 / (-s).powi(3) * alpha / 4.0)
        }
        _ => Ok(model.adler_multiplicity() / (4.0 * PI) * (1.0 + model.coupling(s)?)),
    }
}

/// Dispersion kernel with F(s) = (1/π) ∫ K(s, x) f(x) dx for every channel.
pub fn dispersion_kernel(channel: Channel, s: f64, x: f64) -> f64 {
    match channel {
        Channel::VMinusA => 1.0 / (x - s),
        _ => -s / ((x - s) * (x - s)),
    }
}

/// Where the continuum integral above the data starts and stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub s_max: f64,
    /// Upper cut; `None` picks the point where the integrand has fallen
    /// by 1e-12 relative to its value at `s_max`.
    #[serde(default)]
    pub z_cut: Option<f64>,
}

const TAIL_DROP: f64 = 1e-12;
const TAIL_PANELS_PER_DECADE: usize = 4;
const TAIL_ORDER: usize = 10;

fn tail_cut(s: f64, tail: &TailConfig, o: &Condensates, model: &ChannelModel) -> Result<f64> {
    if let Some(z) = tail.z_cut {
        return Ok(z);
    }
    let integrand = |z: f64| -> Result<f64> {
        Ok((dispersion_kernel(model.channel, s, z) * f_qcd_timelike(z, o, model)?).abs())
    };
    let start = integrand(tail.s_max)?;
    if start == 0.0 {
        return Ok(tail.s_max);
    }
    let mut z = tail.s_max;
    for _ in 0..200 {
        z *= 2.0;
        if integrand(z)? < TAIL_DROP * start {
            return Ok(z);
        }
    }
    Ok(z)
}

/// (1/π) ∫_{s_max}^{Z_cut} K(s, z) f_QCD(z) dz, integrated in ln z.
pub fn tail_integral(s: f64, o: &Condensates, model: &ChannelModel, tail: &TailConfig) -> Result<f64> {
    if model.channel == Channel::VMinusA && model.order == Order::LO {
        return Ok(0.0);
    }
    if !(tail.s_max > 0.0) {
        return Err(Error::Parameter("tail must start at s_max > 0".into()));
    }
    let cut = tail_cut(s, tail, o, model)?;
    if cut <= tail.s_max {
        return Ok(0.0);
    }
    let (u0, u1) = (tail.s_max.ln(), cut.ln());
    let panels = ((u1 - u0) / std::f64::consts::LN_10 * TAIL_PANELS_PER_DECADE as f64).ceil().max(1.0) as usize;
    let rule = composite_gauss_legendre(TAIL_ORDER, panels, u0, u1);
    let mut sum = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let z = u.exp();
        sum += w * z * dispersion_kernel(model.channel, s, z) * f_qcd_timelike(z, o, model)?;
    }
    Ok(sum / PI)
}

/// F̃_QCD(s): the OPE side with the pion pole moved over and the continuum
/// above the data removed, i.e. what (1/π)∫_{s_0}^{s_max} K f must equal.
pub fn qcd_prediction_tilde_f(s: f64, o: &Condensates, model: &ChannelModel, tail: &TailConfig) -> Result<f64> {
    let mut f = ope_f(s, o, model)?;
    if model.channel == Channel::VMinusA {
        f -= F_PI * F_PI / s;
    }
    Ok(f - tail_integral(s, o, model, tail)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_loop_matches_closed_form() {
        let q2 = 1.777f64.powi(2);
        let a = alpha_s(q2, 1, LAMBDA_MSBAR).unwrap();
        let exact = 1.0 / (BETA[0] * (q2 / LAMBDA_MSBAR.powi(2)).ln());
        assert!((a.a - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn below_lambda_is_rejected() {
        assert!(matches!(alpha_s(0.1, 2, LAMBDA_MSBAR), Err(Error::Domain(_))));
    }

    #[test]
    fn kernels_agree_in_sign_for_positive_spectra() {
        assert!(dispersion_kernel(Channel::VMinusA, -1.0, 1.0) > 0.0);
        assert!(dispersion_kernel(Channel::V, -1.0, 1.0) > 0.0);
    }
}
