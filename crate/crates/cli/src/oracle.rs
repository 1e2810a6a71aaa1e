//! Registry of closed-form statistics exposed by `bridgelab oracle`.

use anyhow::Result;
use bridgelab_core::{ou, wiener, GaussianMoment};

use crate::params::Params;

pub enum Value {
    Number(f64),
    Named(Vec<(&'static str, f64)>),
    Label(String),
}

pub struct Entry {
    pub id: &'static str,
    pub params: &'static str,
    pub formula: &'static str,
    eval: fn(&Params) -> Result<Value>,
}

fn law(m: GaussianMoment) -> Value {
    Value::Named(vec![("mean", m.mean), ("variance", m.variance)])
}

fn num(x: f64) -> Result<Value> {
    Ok(Value::Number(x))
}

pub const REGISTRY: &[Entry] = &[
    Entry {
        id: "wiener.bridge_mean",
        params: "--t [--a --b --T]",
        formula: "E W_t^br = a + (b - a) t/T",
        eval: |p| num(wiener::bridge_mean(p.need_t()?, &p.spec()?)?),
    },
    Entry {
        id: "wiener.bridge_cov",
        params: "--s --t [--T]",
        formula: "Cov(W_s^br, W_t^br) = min(s,t) (T - max(s,t))/T",
        eval: |p| num(wiener::bridge_cov(p.need_s()?, p.need_t()?, p.horizon())?),
    },
    Entry {
        id: "wiener.cov_with_process",
        params: "--kind --t [--T]",
        formula: "Cov(W_t^br, W_t): t(T-t)/T for av and st, (T-t) ln(T/(T-t)) for ir",
        eval: |p| num(wiener::cov_with_process(p.kind()?, p.need_t()?, p.horizon())?),
    },
    Entry {
        id: "wiener.corr_with_process",
        params: "--kind --t [--T]",
        formula: "Corr(W_t^br, W_t): sqrt((T-t)/T) for av and st, (sqrt(T(T-t))/t) ln(T/(T-t)) for ir",
        eval: |p| num(wiener::corr_with_process(p.kind()?, p.need_t()?, p.horizon())?),
    },
    Entry {
        id: "wiener.deviation_law",
        params: "--kind --t [--a --b --T]",
        formula: "mean and variance of (a + W_t) - W_t^br",
        eval: |p| Ok(law(wiener::deviation_law(p.kind()?, p.need_t()?, &p.spec()?)?)),
    },
    Entry {
        id: "wiener.cond_deviation_law",
        params: "--kind --t --d [--b --T]",
        formula: "mean and variance of W_t - W_t^br given W_T = d",
        eval: |p| {
            let m = wiener::cond_deviation_law(p.kind()?, p.need_t()?, p.b.unwrap_or(0.0), p.need_d()?, p.horizon())?;
            Ok(law(m))
        },
    },
    Entry {
        id: "wiener.expected_abs_dev",
        params: "--kind --t [--a --b --T]",
        formula: "E|(a + W_t) - W_t^br|",
        eval: |p| num(wiener::expected_abs_dev(p.kind()?, p.need_t()?, &p.spec()?)?),
    },
    Entry {
        id: "wiener.expected_quad_dev",
        params: "--kind [--a --b --T]",
        formula: "E int_0^T ((a + W_t) - W_t^br)^2 dt: (T/3)(T + (b-a)^2) for av and st, (T/3)(T/2 + (b-a)^2) for ir",
        eval: |p| num(wiener::expected_quad_dev(p.kind()?, &p.spec()?)),
    },
    Entry {
        id: "wiener.expected_cond_quad_dev",
        params: "--kind --d [--b --T]",
        formula: "E(int_0^T (W_t - W_t^br)^2 dt | W_T = d)",
        eval: |p| {
            let spec = p.spec()?;
            num(wiener::expected_cond_quad_dev(p.kind()?, spec.b, p.need_d()?, spec.horizon))
        },
    },
    Entry {
        id: "wiener.region",
        params: "--b-tilde --d-tilde",
        formula: "ordering of the three conditional expected quadratic deviations at (b/sqrt T, d/sqrt T): A av<ir<st, B ir<av<st, C ir<st<av, D av<st<ir",
        eval: |p| Ok(Value::Label(wiener::region_classify(p.region_point()?).to_string())),
    },
    Entry {
        id: "ou.kappa",
        params: "--t --q",
        formula: "kappa(t) = (1 - exp(-2qt))/(2q)",
        eval: |p| num(ou::kappa(p.need_t()?, p.ou()?.q)?),
    },
    Entry {
        id: "ou.kappa_star",
        params: "--t --q [--T]",
        formula: "kappa*_T(t) = kappa(t) kappa(T)/(kappa(T) - kappa(t))",
        eval: |p| num(ou::kappa_star(p.need_t()?, &p.time_change()?)?),
    },
    Entry {
        id: "ou.kappa_star_derivative",
        params: "--t --q [--T]",
        formula: "d/dt kappa*_T(t) = exp(2qt) kappa(T)^2/kappa(T-t)^2",
        eval: |p| num(ou::kappa_star_derivative(p.need_t()?, &p.time_change()?)?),
    },
    Entry {
        id: "ou.t_star",
        params: "--q [--T]",
        formula: "the t in (0,T) with kappa*_T(t) = T",
        eval: |p| num(ou::t_star(&p.time_change()?)),
    },
    Entry {
        id: "ou.bridge_mean",
        params: "--t --q [--a --b --T]",
        formula: "E U_t^br = (a sinh(q(T-t)) + b sinh(qt))/sinh(qT)",
        eval: |p| {
            let spec = p.spec()?;
            num(ou::ou_bridge_mean(p.need_t()?, spec.a, spec.b, &p.time_change()?)?)
        },
    },
    Entry {
        id: "ou.bridge_cov",
        params: "--s --t --q [--sigma --T]",
        formula: "Cov(U_s^br, U_t^br) = (sigma^2/q) sinh(q min(s,t)) sinh(q(T - max(s,t)))/sinh(qT)",
        eval: |p| num(ou::ou_bridge_cov(p.need_s()?, p.need_t()?, &p.time_change()?)?),
    },
    Entry {
        id: "ou.cov_with_process",
        params: "--kind --t --q [--sigma --T]",
        formula: "Cov(U_t^br, U_t) for a process started at 0",
        eval: |p| num(ou::ou_cov_with_process(p.kind()?, p.need_t()?, &p.time_change()?)?),
    },
    Entry {
        id: "ou.deviation_law",
        params: "--kind --t --q [--b --sigma --T]",
        formula: "mean and variance of U_t - U_t^br for a bridge from 0 to b",
        eval: |p| Ok(law(ou::ou_deviation_law(p.kind()?, p.need_t()?, p.b.unwrap_or(0.0), &p.time_change()?)?)),
    },
    Entry {
        id: "ou.expected_quad_dev",
        params: "--kind --q [--b --sigma --T]",
        formula: "E int_0^T (U_t - U_t^br)^2 dt for a bridge from 0 to b, squared-mean term included for every kind",
        eval: |p| num(ou::ou_expected_quad_dev(p.kind()?, p.b.unwrap_or(0.0), &p.time_change()?)?),
    },
    Entry {
        id: "ou.expected_quad_dev_printed",
        params: "--kind --q [--b --sigma --T]",
        formula: "the unsimplified hyperbolic forms term by term; st omits (b^2/(4q))(sinh(2qT) - 2qT)/sinh^2(qT)",
        eval: |p| num(ou::ou_expected_quad_dev_printed(p.kind()?, p.b.unwrap_or(0.0), &p.time_change()?)?),
    },
    Entry {
        id: "ou.j_integral",
        params: "--x",
        formula: "J(x) = int_0^x (1 - exp(-2y)) ln(sinh(x)/sinh(y)) dy",
        eval: |p| num(ou::j_integral(p.need_x()?)?),
    },
];

pub fn lookup(id: &str) -> Option<&'static Entry> {
    REGISTRY.iter().find(|e| e.id == id)
}

impl Entry {
    pub fn evaluate(&self, p: &Params) -> Result<Value> {
        (self.eval)(p)
    }
}

/// `%.15g`: 15 significant digits, trailing zeros dropped.
pub fn fmt15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.14e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let fixed = format!("{x:.*}", (14 - exp) as usize);
        trim(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render(v: &Value) -> String {
    match v {
        Value::Number(x) => fmt15(*x),
        Value::Label(s) => s.clone(),
        Value::Named(items) => {
            items.iter().map(|(k, x)| format!("{k} {}", fmt15(*x))).collect::<Vec<_>>().join("\n")
        }
    }
}

pub fn listing() -> String {
    let width = REGISTRY.iter().map(|e| e.id.len()).max().unwrap_or(0);
    REGISTRY
        .iter()
        .map(|e| format!("{:width$}  {}\n{:width$}  {}", e.id, e.params, "", e.formula))
        .collect::<Vec<_>>()
        .join("\n")
}
