//! Flat, typed scenario configuration with exhaustive validation: every
//! violation is reported, not just the first.

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sphere,
    Curve,
    Graph1d,
    Graph2d,
    Riemann,
    Eigen,
    Convergence,
    Report,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Sphere => "sphere",
            Kind::Curve => "curve",
            Kind::Graph1d => "graph1d",
            Kind::Graph2d => "graph2d",
            Kind::Riemann => "riemann",
            Kind::Eigen => "eigen",
            Kind::Convergence => "convergence",
            Kind::Report => "report",
        }
    }
}

/// A validated scenario: kind plus a flat map of typed parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub output_dir: std::path::PathBuf,
    pub seed: u64,
    pub params: BTreeMap<String, toml::Value>,
}

impl Scenario {
    pub fn f64(&self, key: &str) -> f64 {
        match &self.params[key] {
            toml::Value::Float(v) => *v,
            toml::Value::Integer(v) => *v as f64,
            other => panic!("parameter {key} is not numeric: {other:?}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        match &self.params[key] {
            toml::Value::Integer(v) => *v as usize,
            other => panic!("parameter {key} is not an integer: {other:?}"),
        }
    }

    pub fn bool(&self, key: &str) -> bool {
        match &self.params[key] {
            toml::Value::Boolean(v) => *v,
            other => panic!("parameter {key} is not a boolean: {other:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match &self.params[key] {
            toml::Value::String(v) => v,
            other => panic!("parameter {key} is not a string: {other:?}"),
        }
    }

    pub fn usize_list(&self, key: &str) -> Vec<usize> {
        match &self.params[key] {
            toml::Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => *i as usize,
                    other => panic!("list entry in {key} is not an integer: {other:?}"),
                })
                .collect(),
            other => panic!("parameter {key} is not a list: {other:?}"),
        }
    }

    /// Canonical text form hashed into the manifest.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind = \"{}\"", self.kind.as_str());
        let _ = writeln!(s, "seed = {}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

struct Param {
    key: &'static str,
    check: Check,
    default: Option<toml::Value>,
}

enum Check {
    Float { min: f64, max: f64 },
    PositiveFloat,
    Integer { min: i64, max: i64 },
    Bool,
    OneOf(&'static [&'static str]),
    IntList,
}

fn p(key: &'static str, check: Check, default: Option<toml::Value>) -> Param {
    Param {
        key,
        check,
        default,
    }
}

fn f(v: f64) -> Option<toml::Value> {
    Some(toml::Value::Float(v))
}

fn i(v: i64) -> Option<toml::Value> {
    Some(toml::Value::Integer(v))
}

fn b(v: bool) -> Option<toml::Value> {
    Some(toml::Value::Boolean(v))
}

fn s(v: &str) -> Option<toml::Value> {
    Some(toml::Value::String(v.to_string()))
}

fn schema(kind: Kind) -> Vec<Param> {
    let common_graph = || {
        vec![
            p("cells", Check::Integer { min: 8, max: 1 << 20 }, i(256)),
            p("length", Check::PositiveFloat, f(1.0)),
            p("t_end", Check::PositiveFloat, f(1.0)),
            p("cfl", Check::Float { min: 1e-6, max: 1.0 - 1e-9 }, f(0.45)),
            p("flux", Check::OneOf(&["lax-friedrichs", "rusanov"]), s("lax-friedrichs")),
            p("integrator", Check::OneOf(&["euler", "ssprk2"]), s("euler")),
            p("boundary", Check::OneOf(&["periodic", "outflow"]), s("periodic")),
            p("output_every", Check::Integer { min: 1, max: 1 << 30 }, i(16)),
            p("hyperbolicity_eps", Check::Float { min: 1e-9, max: 0.499 }, f(0.005)),
        ]
    };
    match kind {
        Kind::Sphere => vec![
            p("n", Check::Integer { min: 1, max: 8 }, i(2)),
            p("r0", Check::PositiveFloat, f(1.0)),
            p("sigma0", Check::Float { min: -1e6, max: 1e6 }, f(0.0)),
            p("dt", Check::PositiveFloat, f(1e-5)),
            p("t_end", Check::PositiveFloat, f(5.0)),
            p("r_floor", Check::PositiveFloat, f(1e-4)),
            p("expect_collapse", Check::Bool, b(false)),
        ],
        Kind::Curve | Kind::Report => vec![
            p("shape", Check::OneOf(&["circle", "ellipse"]), s("circle")),
            p("r0", Check::PositiveFloat, f(1.0)),
            p("ax", Check::PositiveFloat, f(1.0)),
            p("by", Check::PositiveFloat, f(0.5)),
            p("m", Check::Integer { min: 8, max: 1 << 20 }, i(256)),
            p("sigma0", Check::Float { min: -1e6, max: 1e6 }, f(0.0)),
            p("dt", Check::PositiveFloat, f(1e-3)),
            p("t_end", Check::PositiveFloat, f(0.5)),
            p("record_every", Check::Integer { min: 1, max: 1 << 30 }, i(1)),
            p("expect_collapse", Check::Bool, b(false)),
        ],
        Kind::Graph1d | Kind::Graph2d => {
            let mut v = common_graph();
            v.extend([
                p("cells_y", Check::Integer { min: 8, max: 1 << 20 }, i(64)),
                p("length_y", Check::PositiveFloat, f(1.0)),
                p("sigma_amp", Check::Float { min: -1e3, max: 1e3 }, f(0.1)),
                p("b_amp", Check::Float { min: -1.0, max: 1.0 }, f(0.1)),
                p("modes", Check::Integer { min: 1, max: 64 }, i(1)),
            ]);
            v
        }
        Kind::Riemann => {
            let mut v = common_graph();
            v.extend([
                p("sigma_left", Check::Float { min: -1e3, max: 1e3 }, f(0.0)),
                p("b_left", Check::Float { min: -1.0, max: 1.0 }, f(0.0)),
                p("sigma_right", Check::Float { min: -1e3, max: 1e3 }, f(0.05)),
                p("b_right", Check::Float { min: -1.0, max: 1.0 }, f(0.0)),
            ]);
            v
        }
        Kind::Eigen => vec![
            p("samples", Check::Integer { min: 1, max: 1 << 24 }, i(1000)),
            p("range", Check::PositiveFloat, f(2.0)),
        ],
        Kind::Convergence => vec![
            p("grids", Check::IntList, Some(toml::Value::Array(
                [64i64, 128, 256, 512].iter().map(|&g| toml::Value::Integer(g)).collect(),
            ))),
            p("reference_cells", Check::Integer { min: 8, max: 1 << 20 }, i(4096)),
            p("t_end", Check::PositiveFloat, f(1.0)),
            p("sigma_amp", Check::Float { min: -1e3, max: 1e3 }, f(0.1)),
            p("b_amp", Check::Float { min: -1.0, max: 1.0 }, f(0.1)),
        ],
    }
}

/// Builds and validates a Scenario from a flat map, collecting every error.
pub fn build_scenario(
    kind: Kind,
    output_dir: std::path::PathBuf,
    seed: u64,
    mut values: BTreeMap<String, toml::Value>,
) -> Result<Scenario, Vec<String>> {
    let mut errors = Vec::new();
    let schema = schema(kind);

    for key in values.keys() {
        if !schema.iter().any(|p| p.key == key) {
            errors.push(format!("unknown parameter `{key}` for kind {}", kind.as_str()));
        }
    }

    let mut params = BTreeMap::new();
    for param in &schema {
        let value = values
            .remove(param.key)
            .or_else(|| param.default.clone());
        let Some(value) = value else {
            errors.push(format!("missing required parameter `{}`", param.key));
            continue;
        };
        match (&param.check, &value) {
            (Check::Float { min, max }, toml::Value::Float(v)) if (*min..=*max).contains(v) => {}
            (Check::Float { min, max }, toml::Value::Integer(v))
                if (*min..=*max).contains(&(*v as f64)) => {}
            (Check::PositiveFloat, toml::Value::Float(v)) if *v > 0.0 && v.is_finite() => {}
            (Check::PositiveFloat, toml::Value::Integer(v)) if *v > 0 => {}
            (Check::Integer { min, max }, toml::Value::Integer(v))
                if (*min..=*max).contains(v) => {}
            (Check::Bool, toml::Value::Boolean(_)) => {}
            (Check::OneOf(opts), toml::Value::String(v)) if opts.contains(&v.as_str()) => {}
            (Check::IntList, toml::Value::Array(a))
                if !a.is_empty()
                    && a.iter()
                        .all(|v| matches!(v, toml::Value::Integer(i) if *i >= 8)) => {}
            _ => {
                errors.push(format!(
                    "parameter `{}` = {value} is invalid for kind {}",
                    param.key,
                    kind.as_str()
                ));
                continue;
            }
        }
        params.insert(param.key.to_string(), value);
    }

    // cross-field physics checks
    if matches!(kind, Kind::Graph1d | Kind::Graph2d | Kind::Riemann) {
        let b_of = |k: &str| match params.get(k) {
            Some(toml::Value::Float(v)) => Some(*v),
            Some(toml::Value::Integer(v)) => Some(*v as f64),
            _ => None,
        };
        let mut check_b = |label: &str, v: Option<f64>| {
            if let Some(v) = v {
                // 2D initial data puts the amplitude in both components
                let b2 = if matches!(kind, Kind::Graph2d) { 2.0 * v * v } else { v * v };
                if b2 >= 0.5 {
                    errors.push(format!(
                        "initial data `{label}` gives |b|^2 = {b2:.3} >= 1/2: outside the \
                         strict-convexity region of the entropy"
                    ));
                }
            }
        };
        match kind {
            Kind::Riemann => {
                check_b("b_left", b_of("b_left"));
                check_b("b_right", b_of("b_right"));
            }
            _ => check_b("b_amp", b_of("b_amp")),
        }
    }

    if errors.is_empty() {
        Ok(Scenario {
            kind,
            output_dir,
            seed,
            params,
        })
    } else {
        Err(errors)
    }
}

/// Parses a flat TOML document into an overlay map (no nesting allowed).
pub fn parse_overlay(text: &str) -> Result<BTreeMap<String, toml::Value>, Vec<String>> {
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => return Err(vec![format!("config parse error: {e}")]),
    };
    let mut errors = Vec::new();
    let mut out = BTreeMap::new();
    for (k, v) in table {
        match v {
            toml::Value::Table(_) => {
                errors.push(format!("nested table `{k}` not allowed: config is flat"))
            }
            other => {
                out.insert(k, other);
            }
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
