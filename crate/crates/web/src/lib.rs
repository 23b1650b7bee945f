//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string the page plots; the same functions are callable natively.

use serde::Serialize;
use strongcoupling::exact::{parse_rational, PowerSeries};
use strongcoupling::oracles::{blasius_profile, ShootingConfig};
use strongcoupling::pade::{approximant_sweep, FrobeniusSeries};
use strongcoupling::vpt::{optimal_k0, vpt_b0, Strategy, VptProblem};
use strongcoupling::{BigFloat, CoefficientTable, ModelId};
use wasm_bindgen::prelude::*;

/// Generation cost grows fast; keep the page responsive.
pub const MAX_ORDER: usize = 80;
const PREC: usize = 192;

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub real: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub local_minima: Vec<usize>,
    pub complex_windows: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub k0: Vec<f64>,
    pub b0: Vec<f64>,
    /// Selected stationary point, when one exists at this order.
    pub optimum: Option<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct Profile {
    pub wall_shear: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

fn model(name: &str) -> Result<ModelId, String> {
    name.parse()
}

fn table(name: &str, order: usize) -> Result<CoefficientTable, String> {
    if order == 0 || order > MAX_ORDER {
        return Err(format!("order must be in 1..={MAX_ORDER}"));
    }
    Ok(CoefficientTable::generate(model(name)?, order))
}

/// The approach-to-scaling exponents used for each model.
fn exponents(id: ModelId) -> (i64, u32) {
    match id {
        ModelId::Instanton => (-1, 2),
        ModelId::Blasius => (-2, 4),
    }
}

pub fn sweep(model_name: &str, order: usize, m: &str) -> Result<SweepResult, String> {
    let t = table(model_name, order)?;
    let m = parse_rational(m).map_err(|e| e.to_string())?;
    let series = FrobeniusSeries::new(PowerSeries::new(t.site_row(1)), m).map_err(|e| e.to_string())?;
    let sw = approximant_sweep(&series, order, None, PREC).map_err(|e| e.to_string())?;
    Ok(SweepResult {
        points: sw
            .records
            .iter()
            .map(|r| SweepPoint { n: r.n, re: r.s_n.re.to_f64(), im: r.s_n.im.to_f64(), real: r.is_real })
            .collect(),
        local_minima: sw.local_minima.clone(),
        complex_windows: sw.complex_windows.iter().map(|w| (w.start, w.end)).collect(),
    })
}

pub fn curve(model_name: &str, order: usize, k_min: f64, k_max: f64, points: usize) -> Result<Curve, String> {
    if !(k_min > 0.0 && k_max > k_min) || points < 2 {
        return Err("need 0 < k_min < k_max and at least two points".into());
    }
    let t = table(model_name, order)?;
    let (p, q) = exponents(t.model);
    let problem = VptProblem::new(t.site_row(1), p, q).map_err(|e| e.to_string())?;
    let mut out = Curve { k0: Vec::with_capacity(points), b0: Vec::with_capacity(points), optimum: None };
    for i in 0..points {
        let k = k_min * (k_max / k_min).powf(i as f64 / (points - 1) as f64);
        let b = vpt_b0(&problem, order, &BigFloat::from_f64(k, PREC)).map_err(|e| e.to_string())?;
        out.k0.push(k);
        out.b0.push(b.to_f64());
    }
    let strategy = Strategy::for_derivative(q as usize).expect("q >= 1");
    out.optimum = optimal_k0(&problem, order, strategy, PREC).ok().map(|r| (r.k0.to_f64(), r.b0.to_f64()));
    Ok(out)
}

pub fn profile(epsilon: f64, samples: usize) -> Result<Profile, String> {
    if !(epsilon > 0.0) {
        return Err("epsilon must be positive".into());
    }
    let p = blasius_profile(&ShootingConfig::for_epsilon(epsilon), samples.max(2)).map_err(|e| e.to_string())?;
    Ok(Profile { wall_shear: p.wall_shear, x: p.x, y: p.y, dy: p.dy })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = padeSweep)]
pub fn pade_sweep_js(model: &str, order: usize, m: &str) -> Result<String, JsValue> {
    to_js(sweep(model, order, m))
}

#[wasm_bindgen(js_name = b0Curve)]
pub fn b0_curve_js(model: &str, order: usize, k_min: f64, k_max: f64, points: usize) -> Result<String, JsValue> {
    to_js(curve(model, order, k_min, k_max, points))
}

#[wasm_bindgen(js_name = blasiusProfile)]
pub fn blasius_profile_js(epsilon: f64, samples: usize) -> Result<String, JsValue> {
    to_js(profile(epsilon, samples))
}
