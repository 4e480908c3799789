//! Plain-text `key = value` configuration (one pair per line, `#` comments).
//!
//! Geometry keys: `kind = flat|sphere|custom`, `dim`, `B` (row-major, rows
//! separated by `;`), `mass_freq`, `radius`, `field`, `name` (custom only),
//! `chart_radius`.
//!
//! Run keys: `grid.<coord> = min max count` or `grid.<coord> = value` with
//! coordinates `x1..xn`, `p1..pn`; `time` (comma-separated complex vertices,
//! the last one the target); `seed`; `rel_tol`; `abs_tol`; `disk_radius`;
//! `jobs`; `output`; `suite`; `step`; `kde_sigma`; `level`; `function`;
//! `sweep.p_max`; `sweep.shells`; `sweep.per_shell`; `sweep.half_width`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::flow::{ComplexTime, FlowOptions, DEFAULT_DISK_RADIUS};
use crate::geometry::{make_flat_magnetic, ChartData, ChartedGeometry, FlatMagnetic, SphereMagnetic};
use crate::linalg::{c, C, I};

/// Raw key/value pairs with the line each came from.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config { line, message: format!("expected `key = value`, got `{content}`") })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config { line, message: "empty key".into() });
            }
            if entries.insert(key.clone(), (line, value.trim().to_string())).is_some() {
                return Err(Error::Config { line, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self { entries })
    }

    /// Insert or replace a value (command-line and environment overrides).
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config { line: self.line(key), message: format!("`{key}`: {}", message.into()) }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| self.err(key, format!("cannot parse `{v}`"))),
        }
    }

    fn keys(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryConfig {
    Flat { dim: usize, field: DMatrix<f64>, mass_freq: f64, chart_radius: Option<f64> },
    Sphere { radius: f64, field: f64, chart_radius: Option<f64> },
    Custom { name: String },
}

/// Named user geometries available to `kind = custom`.
#[derive(Clone, Default)]
pub struct GeometryRegistry {
    entries: BTreeMap<String, Arc<dyn ChartData>>,
}

impl GeometryRegistry {
    pub fn register(&mut self, name: impl Into<String>, data: Arc<dyn ChartData>) {
        self.entries.insert(name.into(), data);
    }

    pub fn get(&self, name: &str) -> Option<ChartedGeometry> {
        self.entries.get(name).map(|d| ChartedGeometry::from_arc(Arc::clone(d)))
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }
}

fn parse_matrix(text: &str) -> std::result::Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| {
            r.split(|ch: char| ch.is_whitespace() || ch == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| format!("bad matrix entry `{t}`")))
                .collect()
        })
        .collect::<std::result::Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!(
            "matrix must be square, got {n} rows of lengths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl GeometryConfig {
    pub fn from_keys(kv: &KeyValues) -> Result<Self> {
        let kind = kv.get("kind").ok_or_else(|| Error::Config { line: 0, message: "missing `kind`".into() })?;
        let chart_radius = kv.parsed::<f64>("chart_radius")?;
        match kind {
            "flat" => {
                let dim = kv.parsed::<usize>("dim")?;
                let field = match kv.get("B") {
                    Some(t) => parse_matrix(t).map_err(|m| kv.err("B", m))?,
                    None => DMatrix::zeros(dim.unwrap_or(2), dim.unwrap_or(2)),
                };
                let dim = dim.unwrap_or(field.nrows());
                if field.nrows() != dim {
                    return Err(kv.err("B", format!("expected a {dim}×{dim} matrix")));
                }
                let mass_freq = kv.parsed::<f64>("mass_freq")?.unwrap_or(1.0);
                Ok(GeometryConfig::Flat { dim, field, mass_freq, chart_radius })
            }
            "sphere" => {
                if let Some(d) = kv.parsed::<usize>("dim")? {
                    if d != 2 {
                        return Err(kv.err("dim", "the sphere chart is two-dimensional"));
                    }
                }
                let radius = kv.parsed::<f64>("radius")?.unwrap_or(1.0);
                let field = match (kv.parsed::<f64>("field")?, kv.get("B")) {
                    (Some(f), _) => f,
                    (None, Some(t)) => {
                        t.trim().parse::<f64>().map_err(|_| kv.err("B", "sphere field must be a scalar"))?
                    }
                    (None, None) => 0.0,
                };
                Ok(GeometryConfig::Sphere { radius, field, chart_radius })
            }
            "custom" => {
                let name = kv.get("name").ok_or_else(|| kv.err("kind", "custom geometry needs `name`"))?;
                Ok(GeometryConfig::Custom { name: name.to_string() })
            }
            other => Err(kv.err("kind", format!("unknown geometry kind `{other}`"))),
        }
    }

    pub fn build(&self, registry: &GeometryRegistry) -> Result<ChartedGeometry> {
        let wrap = |e: Error| match e {
            Error::InvalidInput(m) => Error::Config { line: 0, message: m },
            other => other,
        };
        match self {
            GeometryConfig::Flat { dim, field, mass_freq, chart_radius } => match chart_radius {
                Some(rho) => Ok(ChartedGeometry::new(
                    FlatMagnetic::new(*dim, field.clone(), *mass_freq).map_err(wrap)?.with_chart_radius(*rho),
                )),
                None => make_flat_magnetic(*dim, field.clone(), *mass_freq).map_err(wrap),
            },
            GeometryConfig::Sphere { radius, field, chart_radius } => {
                let mut s = SphereMagnetic::new(*radius, *field).map_err(wrap)?;
                if let Some(rho) = chart_radius {
                    s = s.with_chart_radius(*rho);
                }
                Ok(ChartedGeometry::new(s))
            }
            GeometryConfig::Custom { name } => registry.get(name).ok_or_else(|| Error::Config {
                line: 0,
                message: format!("no custom geometry registered as `{name}`"),
            }),
        }
    }

    pub fn dim(&self, registry: &GeometryRegistry) -> Result<usize> {
        Ok(match self {
            GeometryConfig::Flat { dim, .. } => *dim,
            GeometryConfig::Sphere { .. } => 2,
            GeometryConfig::Custom { .. } => self.build(registry)?.dim(),
        })
    }
}

/// One grid axis: `count` evenly spaced values in `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn fixed(v: f64) -> Self {
        Self { min: v, max: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + step * k as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub p_max: f64,
    pub shells: usize,
    pub per_shell: usize,
    pub half_width: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { p_max: 3.0, shells: 6, per_shell: 12, half_width: 1.0 }
    }
}

/// Analytic test function `∏ x_k^{m_k}` for `extend`, written like `x1^2*x2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub powers: Vec<(usize, u32)>,
    pub text: String,
}

impl Monomial {
    pub fn parse(text: &str, dim: usize) -> std::result::Result<Self, String> {
        let mut powers = Vec::new();
        for factor in text.split('*').map(str::trim) {
            let (var, exp) = match factor.split_once('^') {
                Some((v, e)) => (v.trim(), e.trim().parse::<u32>().map_err(|_| format!("bad exponent in `{factor}`"))?),
                None => (factor, 1),
            };
            let idx = var
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| (1..=dim).contains(k))
                .ok_or_else(|| format!("unknown variable `{var}` (expected x1..x{dim})"))?;
            powers.push((idx - 1, exp));
        }
        Ok(Self { powers, text: text.trim().to_string() })
    }

    pub fn eval(&self, x: &[C]) -> C {
        self.powers.iter().fold(c(1.0), |acc, &(k, m)| acc * x[k].powu(m))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    /// One axis per coordinate, ordered `x1..xn, p1..pn`.
    pub grid: Vec<GridAxis>,
    pub time: ComplexTime,
    pub seed: u64,
    pub flow: FlowOptions,
    pub jobs: Option<usize>,
    pub output: Option<PathBuf>,
    pub suite: Option<String>,
    pub step: f64,
    pub kde_sigma: f64,
    pub level: u32,
    pub function: Option<Monomial>,
    pub sweep: SweepConfig,
    /// Whether `time` was given explicitly.
    pub time_given: bool,
}

const RUN_KEYS: &[&str] = &[
    "kind",
    "dim",
    "B",
    "mass_freq",
    "radius",
    "field",
    "name",
    "chart_radius",
    "time",
    "seed",
    "rel_tol",
    "abs_tol",
    "disk_radius",
    "jobs",
    "output",
    "suite",
    "step",
    "kde_sigma",
    "level",
    "function",
    "sweep.p_max",
    "sweep.shells",
    "sweep.per_shell",
    "sweep.half_width",
];

impl RunConfig {
    pub fn parse(text: &str, registry: &GeometryRegistry) -> Result<Self> {
        Self::from_keys(&KeyValues::parse(text)?, registry)
    }

    pub fn from_keys(kv: &KeyValues, registry: &GeometryRegistry) -> Result<Self> {
        for key in kv.keys() {
            if !RUN_KEYS.contains(&key.as_str()) && !key.starts_with("grid.") {
                return Err(kv.err(key, "unknown key"));
            }
        }
        let geometry = GeometryConfig::from_keys(kv)?;
        let n = geometry.dim(registry)?;
        let names: Vec<String> = (1..=n).map(|j| format!("x{j}")).chain((1..=n).map(|j| format!("p{j}"))).collect();
        for key in kv.keys().filter(|k| k.starts_with("grid.")) {
            if !names.iter().any(|nm| key == &format!("grid.{nm}")) {
                return Err(kv.err(key, format!("unknown coordinate (expected one of {})", names.join(", "))));
            }
        }
        let mut grid = Vec::with_capacity(2 * n);
        for nm in &names {
            let key = format!("grid.{nm}");
            let axis = match kv.get(&key) {
                None => GridAxis::fixed(0.0),
                Some(v) => {
                    let parts: Vec<&str> = v.split_whitespace().collect();
                    let num = |s: &str| s.parse::<f64>().map_err(|_| kv.err(&key, format!("bad number `{s}`")));
                    match parts.as_slice() {
                        [a] => GridAxis::fixed(num(a)?),
                        [a, b, k] => GridAxis {
                            min: num(a)?,
                            max: num(b)?,
                            count: k
                                .parse::<usize>()
                                .ok()
                                .filter(|&k| k > 0)
                                .ok_or_else(|| kv.err(&key, "count must be a positive integer"))?,
                        },
                        _ => return Err(kv.err(&key, "expected `min max count` or a single value")),
                    }
                }
            };
            grid.push(axis);
        }
        let defaults = FlowOptions::default();
        let flow = FlowOptions {
            rel_tol: kv.parsed("rel_tol")?.unwrap_or(defaults.rel_tol),
            abs_tol: kv.parsed("abs_tol")?.unwrap_or(defaults.abs_tol),
            disk_radius: kv.parsed("disk_radius")?.unwrap_or(DEFAULT_DISK_RADIUS),
            ..defaults
        };
        if !(flow.rel_tol > 0.0 && flow.abs_tol > 0.0) {
            return Err(kv.err("rel_tol", "tolerances must be positive"));
        }
        let time_given = kv.get("time").is_some();
        let time = match kv.get("time") {
            Some(t) => t.parse::<ComplexTime>().map_err(|e| kv.err("time", e.to_string()))?,
            None => ComplexTime::new(I),
        };
        time.check_disk(flow.disk_radius).map_err(|e| kv.err("time", e.to_string()))?;
        let function = match kv.get("function") {
            Some(f) => Some(Monomial::parse(f, n).map_err(|m| kv.err("function", m))?),
            None => None,
        };
        let sd = SweepConfig::default();
        let sweep = SweepConfig {
            p_max: kv.parsed("sweep.p_max")?.unwrap_or(sd.p_max),
            shells: kv.parsed("sweep.shells")?.unwrap_or(sd.shells),
            per_shell: kv.parsed("sweep.per_shell")?.unwrap_or(sd.per_shell),
            half_width: kv.parsed("sweep.half_width")?.unwrap_or(sd.half_width),
        };
        let level = kv.parsed::<u32>("level")?.unwrap_or(1);
        if level == 0 {
            return Err(kv.err("level", "must be positive"));
        }
        let config = Self {
            geometry,
            grid,
            time,
            seed: kv.parsed("seed")?.unwrap_or(0),
            flow,
            jobs: kv.parsed("jobs")?,
            output: kv.get("output").map(PathBuf::from),
            suite: kv.get("suite").map(str::to_string),
            step: kv.parsed("step")?.unwrap_or(crate::diff::DEFAULT_STEP),
            kde_sigma: kv.parsed("kde_sigma")?.unwrap_or(0.3),
            level,
            function,
            sweep,
            time_given,
        };
        config.geometry.build(registry)?;
        Ok(config)
    }

    /// Grid points in lexicographic order, the last coordinate varying fastest.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.grid {
            let vals = axis.values();
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config_with_grid() {
        let text = "# planar field\nkind = flat\ndim = 2\nB = 0 1; -1 0\nmass_freq = 0.5\n\
                    grid.x1 = -1 1 3\ngrid.p1 = 0.5\ntime = 0.8, i  # two segments\nseed = 42\n";
        let cfg = RunConfig::parse(text, &GeometryRegistry::default()).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.time.vertices().len(), 3);
        let pts = cfg.grid_points();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], vec![-1.0, 0.0, 0.5, 0.0]);
        assert_eq!(pts[2], vec![1.0, 0.0, 0.5, 0.0]);
        match cfg.geometry {
            GeometryConfig::Flat { mass_freq, ref field, .. } => {
                assert_eq!(mass_freq, 0.5);
                assert_eq!(field[(1, 0)], -1.0);
            }
            _ => panic!("expected flat"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let err = RunConfig::parse("kind = sphere\n\nbogus = 1\n", &GeometryRegistry::default()).unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
        let err = RunConfig::parse("kind = flat\nB = 0 1; 1 0\n", &GeometryRegistry::default()).unwrap_err();
        assert_eq!(err.reason_code(), "CONFIG");
        let err = RunConfig::parse("kind = sphere\ntime = 2i\n", &GeometryRegistry::default()).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(RunConfig::parse("kind = custom\nname = nope\n", &GeometryRegistry::default()).is_err());
    }

    #[test]
    fn monomials() {
        let m = Monomial::parse("x1^2 * x2", 2).unwrap();
        assert_eq!(m.eval(&[c(3.0), c(2.0)]), c(18.0));
        assert!(Monomial::parse("x3", 2).is_err());
    }
}
