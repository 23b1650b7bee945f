//! Continuum references the lattice resummations are measured against.
//!
//! The instanton equation `ε²f'' + f − f³ = 0` has the closed form
//! `f = tanh(x/(ε√2))`. The Blasius equation `2εy''' + yy'' = 0` has none, so
//! the wall shear `y''(0)` is found by shooting.

use thiserror::Error;

use crate::exact::BigFloat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("invalid shooting configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("secant iteration did not converge in {0} steps")]
    NoConvergence(usize),
    #[error("domain too short: the boundary layer is not contained in [0, L]")]
    DomainTooShort,
}

fn check_epsilon(epsilon: f64) -> Result<(), OracleError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(OracleError::NonPositiveEpsilon(epsilon))
    }
}

/// `f'(0) = 1/(ε√2)`.
pub fn instanton_slope(epsilon: &BigFloat) -> Result<BigFloat, OracleError> {
    if !epsilon.is_positive() {
        return Err(OracleError::NonPositiveEpsilon(epsilon.to_f64()));
    }
    let prec = epsilon.precision();
    let two = BigFloat::from_i64(2, prec);
    Ok(BigFloat::one(prec) / (epsilon * two.sqrt()))
}

/// `tanh(x/(ε√2))`.
pub fn instanton_profile(x: &BigFloat, epsilon: &BigFloat) -> Result<BigFloat, OracleError> {
    if !epsilon.is_positive() {
        return Err(OracleError::NonPositiveEpsilon(epsilon.to_f64()));
    }
    let prec = x.precision().max(epsilon.precision());
    let two = BigFloat::from_i64(2, prec);
    Ok((x / (epsilon * two.sqrt())).tanh())
}

/// `ε²f'' + f − f³` for the closed-form profile, with `f''` taken
/// analytically from `f' = (1 − f²)/(ε√2)`.
pub fn instanton_residual(x: &BigFloat, epsilon: &BigFloat) -> Result<BigFloat, OracleError> {
    let f = instanton_profile(x, epsilon)?;
    let prec = f.precision();
    let one = BigFloat::one(prec);
    let sech2 = &one - &f * &f;
    let eps2 = epsilon * epsilon;
    let f2 = -(&f * &sech2) / &eps2;
    let f3 = &f * &f * &f;
    Ok(eps2 * f2 + &f - f3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingConfig {
    pub epsilon: f64,
    pub domain_length: f64,
    pub step: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self { epsilon: 1.0, domain_length: 10.0, step: 1e-3, tolerance: 1e-13, max_iter: 50 }
    }
}

impl ShootingConfig {
    /// Default grid stretched by `√ε`, the boundary-layer thickness, so the
    /// layer stays inside the domain and the step count is unchanged.
    pub fn for_epsilon(epsilon: f64) -> Self {
        let s = epsilon.sqrt();
        let d = Self::default();
        Self { epsilon, domain_length: d.domain_length * s, step: d.step * s, ..d }
    }

    fn steps(&self) -> Result<usize, OracleError> {
        check_epsilon(self.epsilon)?;
        if !(self.domain_length > 0.0 && self.step > 0.0) {
            return Err(OracleError::InvalidConfig("domain length and step must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(OracleError::InvalidConfig("tolerance must be positive"));
        }
        let n = self.domain_length / self.step;
        let r = n.round();
        if r < 1.0 || (n - r).abs() > 1e-9 * r {
            return Err(OracleError::InvalidConfig("domain length must be a multiple of the step"));
        }
        Ok(r as usize)
    }
}

/// Sampled Blasius solution `(x, y, y', y'')`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlasiusProfile {
    pub wall_shear: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub d2y: Vec<f64>,
}

type State = [f64; 3];

fn rhs(eps2: f64, s: &State) -> State {
    [s[1], s[2], -s[0] * s[2] / eps2]
}

fn rk4_step(eps2: f64, s: &State, h: f64) -> State {
    let add = |a: &State, k: &State, c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2]];
    let k1 = rhs(eps2, s);
    let k2 = rhs(eps2, &add(s, &k1, h / 2.0));
    let k3 = rhs(eps2, &add(s, &k2, h / 2.0));
    let k4 = rhs(eps2, &add(s, &k3, h));
    let mut out = *s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn integrate(cfg: &ShootingConfig, steps: usize, shear: f64, mut visit: impl FnMut(usize, &State)) -> State {
    let eps2 = 2.0 * cfg.epsilon;
    let mut s = [0.0, 0.0, shear];
    visit(0, &s);
    for i in 1..=steps {
        s = rk4_step(eps2, &s, cfg.step);
        visit(i, &s);
    }
    s
}

/// Fraction of the wall shear still present at `x = L`; above this the layer
/// is not contained.
const CONTAINMENT: f64 = 1e-4;
/// Minimal `|∂y'(L)/∂s|`.
const SENSITIVITY: f64 = 1e-8;

/// `y''(0)` such that `y'(L) = 1`, by secant iteration on the shooting
/// parameter.
pub fn blasius_shoot(cfg: &ShootingConfig) -> Result<f64, OracleError> {
    let steps = cfg.steps()?;
    let miss = |s: f64| integrate(cfg, steps, s, |_, _| {})[1] - 1.0;
    let scale = cfg.epsilon.sqrt();
    let (mut s0, mut s1) = (0.2 / scale, 0.5 / scale);
    let (mut f0, mut f1) = (miss(s0), miss(s1));
    for _ in 0..cfg.max_iter {
        let slope = (f1 - f0) / (s1 - s0);
        if !slope.is_finite() || slope.abs() < SENSITIVITY {
            return Err(OracleError::DomainTooShort);
        }
        let s2 = s1 - f1 / slope;
        if !s2.is_finite() {
            return Err(OracleError::NoConvergence(cfg.max_iter));
        }
        (s0, f0) = (s1, f1);
        s1 = s2;
        f1 = miss(s1);
        if (s1 - s0).abs() <= cfg.tolerance * s1.abs().max(1.0) {
            let end = integrate(cfg, steps, s1, |_, _| {});
            if end[2].abs() > CONTAINMENT * s1.abs() {
                return Err(OracleError::DomainTooShort);
            }
            return Ok(s1);
        }
    }
    Err(OracleError::NoConvergence(cfg.max_iter))
}

/// Shoot, then resample the converged solution at `samples + 1` evenly
/// spaced points.
pub fn blasius_profile(cfg: &ShootingConfig, samples: usize) -> Result<BlasiusProfile, OracleError> {
    let shear = blasius_shoot(cfg)?;
    let steps = cfg.steps()?;
    let samples = samples.clamp(1, steps);
    let mut p = BlasiusProfile { wall_shear: shear, x: vec![], y: vec![], dy: vec![], d2y: vec![] };
    integrate(cfg, steps, shear, |i, s| {
        if i * samples % steps < samples {
            p.x.push(i as f64 * cfg.step);
            p.y.push(s[0]);
            p.dy.push(s[1]);
            p.d2y.push(s[2]);
        }
    });
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: usize = 256;

    fn big(x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    #[test]
    fn slope_values() {
        let s = instanton_slope(&big(1.0)).unwrap();
        assert!((s.to_f64() - 0.7071067812).abs() < 1e-9);
        let s = instanton_slope(&big(2.0)).unwrap();
        assert!((s.to_f64() - 0.3535533906).abs() < 1e-9);
        assert_eq!(instanton_slope(&big(0.0)), Err(OracleError::NonPositiveEpsilon(0.0)));
        assert!(instanton_slope(&big(-1.0)).is_err());
    }

    #[test]
    fn profile_boundary_and_residual() {
        assert!(instanton_profile(&big(0.0), &big(0.7)).unwrap().is_zero());
        let tol = BigFloat::from_f64(1e-30, PREC);
        for i in 0..20 {
            let x = big(0.37 * i as f64 - 2.0);
            let r = instanton_residual(&x, &big(0.8)).unwrap();
            assert!(r.abs() < tol, "residual at sample {i}: {r}");
        }
    }

    #[test]
    fn blasius_reference_value() {
        let s = blasius_shoot(&ShootingConfig::default()).unwrap();
        assert!((s - 0.33206).abs() < 1e-5, "{s}");
    }

    #[test]
    fn blasius_scaling() {
        let s4 = blasius_shoot(&ShootingConfig::for_epsilon(4.0)).unwrap();
        assert!((s4 - 0.16603).abs() < 1e-5, "{s4}");
        let base = blasius_shoot(&ShootingConfig::default()).unwrap();
        for eps in [0.25, 1.0, 4.0] {
            let s = blasius_shoot(&ShootingConfig::for_epsilon(eps)).unwrap();
            assert!((s * eps.sqrt() - base).abs() < 1e-6, "eps {eps}: {s}");
        }
    }

    #[test]
    fn blasius_step_halving() {
        let a = blasius_shoot(&ShootingConfig::default()).unwrap();
        let b = blasius_shoot(&ShootingConfig { step: 5e-4, ..ShootingConfig::default() }).unwrap();
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn blasius_errors() {
        let short = ShootingConfig { domain_length: 0.5, ..ShootingConfig::default() };
        assert_eq!(blasius_shoot(&short), Err(OracleError::DomainTooShort));
        let capped = ShootingConfig { max_iter: 1, ..ShootingConfig::default() };
        assert_eq!(blasius_shoot(&capped), Err(OracleError::NoConvergence(1)));
        let ragged = ShootingConfig { step: 3e-3, ..ShootingConfig::default() };
        assert!(matches!(blasius_shoot(&ragged), Err(OracleError::InvalidConfig(_))));
        let neg = ShootingConfig { epsilon: -1.0, ..ShootingConfig::default() };
        assert_eq!(blasius_shoot(&neg), Err(OracleError::NonPositiveEpsilon(-1.0)));
    }

    #[test]
    fn profile_reaches_free_stream() {
        let p = blasius_profile(&ShootingConfig::default(), 100).unwrap();
        assert_eq!(p.x.len(), 101);
        assert_eq!(p.x[0], 0.0);
        assert!((p.x[100] - 10.0).abs() < 1e-9);
        assert!((p.dy[100] - 1.0).abs() < 1e-10);
        assert!(p.dy.windows(2).all(|w| w[1] >= w[0]));
    }
}
