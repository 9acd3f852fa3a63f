//! Run and audit configuration files.
//!
//! Files are TOML. Every key is checked against the set the section accepts,
//! so a typo such as `solvr.dt` is reported by its full path instead of being
//! ignored.

use std::path::PathBuf;

use toml::{Table, Value};

use crate::diagnostics::{AccumulatorSet, Exponents};
use crate::error::{Error, Result};
use crate::initial_data::{InitKind, InitSpec};
use crate::solver::SolverConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorConfig {
    pub epsilon0: f64,
    pub cadence: u64,
    pub accumulators: AccumulatorSet,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            epsilon0: 0.1,
            cadence: 1,
            accumulators: AccumulatorSet::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub diagnostics: String,
    pub checkpoint: String,
    /// Steps between checkpoints; 0 disables checkpointing.
    pub checkpoint_every: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("."),
            diagnostics: "diagnostics.csv".into(),
            checkpoint: "checkpoint.bin".into(),
            checkpoint_every: 0,
        }
    }
}

impl OutputConfig {
    pub fn diagnostics_path(&self) -> PathBuf {
        self.dir.join(&self.diagnostics)
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.dir.join(&self.checkpoint)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub solver: SolverConfig,
    pub init_u: InitSpec,
    pub init_d: InitSpec,
    pub monitor: MonitorConfig,
    pub output: OutputConfig,
}

/// One `(α, p, q)` interpolation parameter set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductParams {
    pub alpha: f64,
    pub exponents: Exponents,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub dim: usize,
    pub n_low: usize,
    pub n_high: usize,
    pub corpus_size: usize,
    pub seed: u64,
    pub slope: f64,
    /// Corpus band `|k_i| <= band`; defaults to `n_low / 3`.
    pub band: i32,
    pub interpolation: Vec<InterpolationParams>,
    pub gn: bool,
    pub products: Vec<ProductParams>,
    pub dir: PathBuf,
    pub report: String,
}

impl AuditConfig {
    pub fn report_path(&self) -> PathBuf {
        self.dir.join(&self.report)
    }
}

/// A table together with its dotted path, for error messages.
struct Section<'a> {
    path: String,
    table: &'a Table,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn first_leaf(path: String, v: &Value) -> String {
    match v {
        Value::Table(t) => match t.iter().next() {
            Some((k, v)) => first_leaf(join(&path, k), v),
            None => path,
        },
        _ => path,
    }
}

fn bad(path: &str, what: &str) -> Error {
    Error::config(path, format!("must be {what}"))
}

impl<'a> Section<'a> {
    fn root(table: &'a Table) -> Self {
        Section {
            path: String::new(),
            table,
        }
    }

    fn key(&self, k: &str) -> String {
        join(&self.path, k)
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        for (k, v) in self.table {
            if !keys.contains(&k.as_str()) {
                return Err(Error::config(
                    first_leaf(self.key(k), v),
                    "is not a recognized key",
                ));
            }
        }
        Ok(())
    }

    fn sub(&self, k: &str) -> Result<Option<Section<'a>>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section {
                path: self.key(k),
                table: t,
            })),
            Some(_) => Err(bad(&self.key(k), "a table")),
        }
    }

    fn require(&self, k: &str) -> Result<Section<'a>> {
        self.sub(k)?
            .ok_or_else(|| Error::config(self.key(k), "is required"))
    }

    fn f64(&self, k: &str) -> Result<Option<f64>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(bad(&self.key(k), "a number")),
        }
    }

    fn int(&self, k: &str) -> Result<Option<i64>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(bad(&self.key(k), "an integer")),
        }
    }

    fn uint(&self, k: &str) -> Result<Option<u64>> {
        match self.int(k)? {
            None => Ok(None),
            Some(i) if i >= 0 => Ok(Some(i as u64)),
            Some(_) => Err(bad(&self.key(k), ">= 0")),
        }
    }

    fn bool(&self, k: &str) -> Result<Option<bool>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(bad(&self.key(k), "true or false")),
        }
    }

    fn str(&self, k: &str) -> Result<Option<&'a str>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(bad(&self.key(k), "a string")),
        }
    }

    fn array(&self, k: &str) -> Result<Option<&'a Vec<Value>>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Array(a)) => Ok(Some(a)),
            Some(_) => Err(bad(&self.key(k), "an array")),
        }
    }

    fn numbers<const L: usize>(&self, k: &str) -> Result<Option<[f64; L]>> {
        let Some(a) = self.array(k)? else {
            return Ok(None);
        };
        number_array(&self.key(k), a).map(Some)
    }
}

fn number_array<const L: usize>(path: &str, a: &[Value]) -> Result<[f64; L]> {
    let what = format!("an array of {L} numbers");
    if a.len() != L {
        return Err(bad(path, &what));
    }
    let mut out = [0.0; L];
    for (o, v) in out.iter_mut().zip(a) {
        *o = match v {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            _ => return Err(bad(path, &what)),
        };
    }
    Ok(out)
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| Error::config("config", format!("is not valid TOML: {}", e.message())))
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(path, "> 0"))
    }
}

fn nonnegative(path: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(path, ">= 0"))
    }
}

fn grid_size(path: &str, n: u64) -> Result<usize> {
    if n >= 8 && n.is_power_of_two() {
        Ok(n as usize)
    } else {
        Err(bad(path, "a power of two >= 8"))
    }
}

fn dimension(path: &str, d: u64) -> Result<usize> {
    if d == 2 || d == 3 {
        Ok(d as usize)
    } else {
        Err(bad(path, "2 or 3"))
    }
}

const INIT_KEYS: &[&str] = &[
    "kind",
    "amplitude",
    "spectrum_slope",
    "seed",
    "theta",
    "wavevector",
    "band",
    "scale",
    "direction",
];

fn parse_init(s: &Section, velocity: bool) -> Result<InitSpec> {
    s.allow(INIT_KEYS)?;
    let kind_path = s.key("kind");
    let name = s
        .str("kind")?
        .ok_or_else(|| Error::config(&kind_path, "is required"))?;
    let kind = InitKind::parse(name)
        .filter(|k| k.is_velocity() == velocity)
        .ok_or_else(|| {
            let allowed = if velocity {
                "taylor_green or random_divfree"
            } else {
                "equatorial, near_harmonic or constant_director"
            };
            Error::config(
                &kind_path,
                format!("must be one of {allowed}, got `{name}`"),
            )
        })?;
    let mut spec = InitSpec::new(kind);
    if let Some(a) = s.f64("amplitude")? {
        spec.amplitude = nonnegative(&s.key("amplitude"), a)?;
    }
    if let Some(v) = s.f64("spectrum_slope")? {
        if !v.is_finite() {
            return Err(bad(&s.key("spectrum_slope"), "finite"));
        }
        spec.spectrum_slope = v;
    }
    if let Some(v) = s.uint("seed")? {
        spec.seed = v;
    }
    if let Some(b) = s.int("band")? {
        if b < 1 || b > i32::MAX as i64 {
            return Err(bad(&s.key("band"), ">= 1"));
        }
        spec.band = Some(b as i32);
    }
    let theta = s.str("theta")?.unwrap_or("sine");
    let wavevector = match s.array("wavevector")? {
        None => [1, 0, 0],
        Some(a) => {
            let w = number_array::<3>(&s.key("wavevector"), a)?;
            if w.iter().any(|x| x.fract() != 0.0 || x.abs() > 1e6) {
                return Err(bad(&s.key("wavevector"), "an array of 3 integers"));
            }
            [w[0] as i32, w[1] as i32, w[2] as i32]
        }
    };
    spec.wavevector = match theta {
        "sine" => Some(wavevector),
        "random" => None,
        other => {
            return Err(Error::config(
                s.key("theta"),
                format!("must be `sine` or `random`, got `{other}`"),
            ))
        }
    };
    if let Some(v) = s.f64("scale")? {
        if !(v > 0.0 && v <= 1.0) {
            return Err(bad(&s.key("scale"), "in (0, 1]"));
        }
        spec.scale = v;
    }
    if let Some(d) = s.numbers::<3>("direction")? {
        if !(d.iter().all(|x| x.is_finite()) && d.iter().any(|&x| x != 0.0)) {
            return Err(bad(&s.key("direction"), "a finite nonzero vector"));
        }
        spec.direction = d;
    }
    Ok(spec)
}

fn parse_accumulators(s: &Section) -> Result<Option<AccumulatorSet>> {
    let Some(list) = s.array("accumulators")? else {
        return Ok(None);
    };
    let path = s.key("accumulators");
    let mut set = AccumulatorSet {
        h2: false,
        bkm: false,
        hw: false,
        llw: false,
    };
    for v in list {
        let flag = match v.as_str() {
            Some("h2") => &mut set.h2,
            Some("bkm") => &mut set.bkm,
            Some("hw") => &mut set.hw,
            Some("llw") => &mut set.llw,
            _ => {
                return Err(bad(
                    &path,
                    "a list drawn from \"h2\", \"bkm\", \"hw\", \"llw\"",
                ))
            }
        };
        *flag = true;
    }
    Ok(Some(set))
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table = parse_table(text)?;
    let root = Section::root(&table);
    root.allow(&["grid", "solver", "init", "monitor", "output"])?;

    let grid = root.require("grid")?;
    grid.allow(&["dim", "n"])?;
    let dim = dimension(
        &grid.key("dim"),
        grid.uint("dim")?
            .ok_or_else(|| Error::config(grid.key("dim"), "is required"))?,
    )?;
    let n = grid_size(
        &grid.key("n"),
        grid.uint("n")?
            .ok_or_else(|| Error::config(grid.key("n"), "is required"))?,
    )?;

    let sv = root.require("solver")?;
    sv.allow(&[
        "dt",
        "t_end",
        "renormalize_every",
        "dealias",
        "nu",
        "lambda",
        "gamma",
    ])?;
    let mut solver = SolverConfig::default();
    solver.dt = positive(
        &sv.key("dt"),
        sv.f64("dt")?
            .ok_or_else(|| Error::config(sv.key("dt"), "is required"))?,
    )?;
    solver.t_end = nonnegative(
        &sv.key("t_end"),
        sv.f64("t_end")?
            .ok_or_else(|| Error::config(sv.key("t_end"), "is required"))?,
    )?;
    if let Some(r) = sv.uint("renormalize_every")? {
        if r == 0 {
            return Err(bad(&sv.key("renormalize_every"), ">= 1"));
        }
        solver.renormalize_every = r;
    }
    if let Some(b) = sv.bool("dealias")? {
        solver.dealias = b;
    }
    for (k, slot) in [
        ("nu", &mut solver.nu),
        ("lambda", &mut solver.lambda),
        ("gamma", &mut solver.gamma),
    ] {
        if let Some(v) = sv.f64(k)? {
            *slot = nonnegative(&sv.key(k), v)?;
        }
    }

    let init = root.require("init")?;
    init.allow(&["u", "d"])?;
    let init_u = parse_init(&init.require("u")?, true)?;
    let init_d = parse_init(&init.require("d")?, false)?;
    if init_d.kind == InitKind::NearHarmonic {
        if dim != 2 {
            return Err(Error::config(
                "init.d.kind",
                "near_harmonic requires grid.dim = 2",
            ));
        }
        if init_d.scale * (n as f64) < 8.0 {
            return Err(Error::config("init.d.scale", "times grid.n must be >= 8"));
        }
    }

    let mut monitor = MonitorConfig::default();
    if let Some(m) = root.sub("monitor")? {
        m.allow(&["epsilon0", "cadence", "accumulators"])?;
        if let Some(e) = m.f64("epsilon0")? {
            monitor.epsilon0 = positive(&m.key("epsilon0"), e)?;
        }
        if let Some(c) = m.uint("cadence")? {
            if c == 0 {
                return Err(bad(&m.key("cadence"), ">= 1"));
            }
            monitor.cadence = c;
        }
        if let Some(a) = parse_accumulators(&m)? {
            monitor.accumulators = a;
        }
    }

    let mut output = OutputConfig::default();
    if let Some(o) = root.sub("output")? {
        o.allow(&["dir", "diagnostics", "checkpoint", "checkpoint_every"])?;
        if let Some(d) = o.str("dir")? {
            output.dir = PathBuf::from(d);
        }
        for (k, slot) in [
            ("diagnostics", &mut output.diagnostics),
            ("checkpoint", &mut output.checkpoint),
        ] {
            if let Some(v) = o.str(k)? {
                if v.is_empty() {
                    return Err(bad(&o.key(k), "a non-empty file name"));
                }
                *slot = v.to_string();
            }
        }
        if let Some(c) = o.uint("checkpoint_every")? {
            output.checkpoint_every = c;
        }
    }

    Ok(RunConfig {
        dim,
        n,
        solver,
        init_u,
        init_d,
        monitor,
        output,
    })
}

fn float(x: f64) -> Value {
    Value::Float(x)
}

fn int(x: u64) -> Value {
    Value::Integer(x as i64)
}

fn table<const L: usize>(entries: [(&str, Value); L]) -> Table {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn init_table(s: &InitSpec) -> Table {
    let mut t = table([
        ("kind", Value::String(s.kind.name().into())),
        ("amplitude", float(s.amplitude)),
        ("spectrum_slope", float(s.spectrum_slope)),
        ("seed", int(s.seed)),
        ("scale", float(s.scale)),
        (
            "direction",
            Value::Array(s.direction.iter().map(|&x| float(x)).collect()),
        ),
    ]);
    match s.wavevector {
        Some(k) => {
            t.insert("theta".into(), Value::String("sine".into()));
            t.insert(
                "wavevector".into(),
                Value::Array(k.iter().map(|&c| Value::Integer(c as i64)).collect()),
            );
        }
        None => {
            t.insert("theta".into(), Value::String("random".into()));
        }
    }
    if let Some(b) = s.band {
        t.insert("band".into(), Value::Integer(b as i64));
    }
    t
}

impl RunConfig {
    pub fn grid(&self) -> Result<crate::spectral::Grid> {
        crate::spectral::Grid::new(self.dim, self.n)
    }

    /// Replaces the seeds of both initial fields: `u` gets `seed`, `d` gets
    /// `seed + 1`.
    pub fn apply_seed(&mut self, seed: u64) {
        self.init_u.seed = seed;
        self.init_d.seed = seed.wrapping_add(1);
    }

    /// The fully resolved configuration, defaults included, as TOML.
    pub fn to_toml(&self) -> String {
        let s = &self.solver;
        let a = self.monitor.accumulators;
        let names = [("h2", a.h2), ("bkm", a.bkm), ("hw", a.hw), ("llw", a.llw)]
            .into_iter()
            .filter(|(_, on)| *on)
            .map(|(n, _)| Value::String(n.into()))
            .collect();
        let root = table([
            (
                "grid",
                Value::Table(table([
                    ("dim", int(self.dim as u64)),
                    ("n", int(self.n as u64)),
                ])),
            ),
            (
                "solver",
                Value::Table(table([
                    ("dt", float(s.dt)),
                    ("t_end", float(s.t_end)),
                    ("renormalize_every", int(s.renormalize_every)),
                    ("dealias", Value::Boolean(s.dealias)),
                    ("nu", float(s.nu)),
                    ("lambda", float(s.lambda)),
                    ("gamma", float(s.gamma)),
                ])),
            ),
            (
                "init",
                Value::Table(table([
                    ("u", Value::Table(init_table(&self.init_u))),
                    ("d", Value::Table(init_table(&self.init_d))),
                ])),
            ),
            (
                "monitor",
                Value::Table(table([
                    ("epsilon0", float(self.monitor.epsilon0)),
                    ("cadence", int(self.monitor.cadence)),
                    ("accumulators", Value::Array(names)),
                ])),
            ),
            (
                "output",
                Value::Table(table([
                    (
                        "dir",
                        Value::String(self.output.dir.to_string_lossy().into_owned()),
                    ),
                    (
                        "diagnostics",
                        Value::String(self.output.diagnostics.clone()),
                    ),
                    ("checkpoint", Value::String(self.output.checkpoint.clone())),
                    ("checkpoint_every", int(self.output.checkpoint_every)),
                ])),
            ),
        ]);
        root.to_string()
    }

    /// Canonical text of the settings a checkpoint must agree with. The
    /// horizon, initial data and output locations are left out so a run can
    /// be resumed with a longer `t_end` or elsewhere.
    pub fn digest_text(&self) -> String {
        let s = &self.solver;
        let a = self.monitor.accumulators;
        format!(
            "dim={} n={} dt={:?} renormalize_every={} dealias={} nu={:?} lambda={:?} gamma={:?} \
             epsilon0={:?} cadence={} accumulators={},{},{},{}",
            self.dim,
            self.n,
            s.dt,
            s.renormalize_every,
            s.dealias,
            s.nu,
            s.lambda,
            s.gamma,
            self.monitor.epsilon0,
            self.monitor.cadence,
            a.h2,
            a.bkm,
            a.hw,
            a.llw
        )
    }
}

fn default_interpolation() -> Vec<InterpolationParams> {
    vec![
        InterpolationParams {
            alpha: 1.0,
            p: 4.0,
            q: 2.0,
        },
        InterpolationParams {
            alpha: 1.0,
            p: 3.0,
            q: 2.0,
        },
    ]
}

fn default_products() -> Vec<ProductParams> {
    vec![ProductParams {
        alpha: 2.0,
        exponents: Exponents {
            p: 2.0,
            p1: 4.0,
            q1: 4.0,
            p2: 4.0,
            q2: 4.0,
        },
    }]
}

/// Parses and validates an audit configuration.
pub fn parse_audit_config(text: &str) -> Result<AuditConfig> {
    let table = parse_table(text)?;
    let root = Section::root(&table);
    root.allow(&["audit", "output"])?;
    let a = root.require("audit")?;
    a.allow(&[
        "dim",
        "n_low",
        "n_high",
        "corpus_size",
        "seed",
        "slope",
        "band",
        "interpolation",
        "gn",
        "product",
    ])?;
    let dim = dimension(&a.key("dim"), a.uint("dim")?.unwrap_or(2))?;
    let n_low = grid_size(&a.key("n_low"), a.uint("n_low")?.unwrap_or(32))?;
    let n_high = grid_size(&a.key("n_high"), a.uint("n_high")?.unwrap_or(64))?;
    if n_high < n_low {
        return Err(bad(&a.key("n_high"), ">= audit.n_low"));
    }
    let corpus_size = a.uint("corpus_size")?.unwrap_or(100) as usize;
    let seed = a.uint("seed")?.unwrap_or(1);
    let slope = a.f64("slope")?.unwrap_or(-3.0);
    if !slope.is_finite() {
        return Err(bad(&a.key("slope"), "finite"));
    }
    let band = match a.int("band")? {
        None => (n_low / 3) as i32,
        Some(b) if (0..=(n_low / 3) as i64).contains(&b) => b as i32,
        Some(_) => return Err(bad(&a.key("band"), "in [0, audit.n_low / 3]")),
    };

    let interpolation = match a.array("interpolation")? {
        None => default_interpolation(),
        Some(list) => {
            let mut out = Vec::new();
            for (i, v) in list.iter().enumerate() {
                let path = format!("{}[{i}]", a.key("interpolation"));
                let [alpha, p, q] = match v {
                    Value::Array(x) => number_array::<3>(&path, x)?,
                    _ => return Err(bad(&path, "an [alpha, p, q] triple")),
                };
                if !(alpha > 0.0 && 1.0 <= q && q < p && p.is_finite()) {
                    return Err(bad(
                        &path,
                        "[alpha, p, q] with alpha > 0 and 1 <= q < p < inf",
                    ));
                }
                out.push(InterpolationParams { alpha, p, q });
            }
            out
        }
    };

    let gn = a.bool("gn")?.unwrap_or(true);

    let products = match a.array("product")? {
        None => default_products(),
        Some(list) => {
            let mut out = Vec::new();
            for (i, v) in list.iter().enumerate() {
                let path = format!("{}[{i}]", a.key("product"));
                let Value::Table(t) = v else {
                    return Err(bad(&path, "a table"));
                };
                let s = Section { path, table: t };
                s.allow(&["alpha", "p", "p1", "q1", "p2", "q2"])?;
                let get = |k: &str| {
                    s.f64(k)?
                        .ok_or_else(|| Error::config(s.key(k), "is required"))
                };
                let alpha = positive(&s.key("alpha"), get("alpha")?)?;
                let exponents = Exponents {
                    p: get("p")?,
                    p1: get("p1")?,
                    q1: get("q1")?,
                    p2: get("p2")?,
                    q2: get("q2")?,
                };
                exponents
                    .validate()
                    .map_err(|e| Error::config(&s.path, format!("is invalid: {e}")))?;
                out.push(ProductParams { alpha, exponents });
            }
            out
        }
    };

    let mut dir = PathBuf::from(".");
    let mut report = String::from("audit.tsv");
    if let Some(o) = root.sub("output")? {
        o.allow(&["dir", "report"])?;
        if let Some(d) = o.str("dir")? {
            dir = PathBuf::from(d);
        }
        if let Some(r) = o.str("report")? {
            if r.is_empty() {
                return Err(bad(&o.key("report"), "a non-empty file name"));
            }
            report = r.to_string();
        }
    }

    Ok(AuditConfig {
        dim,
        n_low,
        n_high,
        corpus_size,
        seed,
        slope,
        band,
        interpolation,
        gn,
        products,
        dir,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
dim = 2
n = 32

[solver]
dt = 1e-3
t_end = 0.1

[init.u]
kind = "taylor_green"

[init.d]
kind = "constant_director"
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!((c.dim, c.n), (2, 32));
        assert_eq!(c.solver.renormalize_every, 1);
        assert!(c.solver.dealias);
        assert_eq!(c.monitor, MonitorConfig::default());
        assert_eq!(c.output, OutputConfig::default());
        assert_eq!(c.init_u.amplitude, 1.0);
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        let echoed = c.to_toml();
        assert_eq!(parse_config(&echoed).unwrap(), c);

        let mut d = c.clone();
        d.init_d = InitSpec::new(InitKind::Equatorial);
        d.init_d.wavevector = None;
        d.init_d.band = Some(4);
        d.monitor.accumulators.hw = false;
        d.solver.dt = 1.0 / 3.0;
        assert_eq!(parse_config(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn zero_dt_is_rejected_by_path() {
        let text = MINIMAL.replace("dt = 1e-3", "dt = 0");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("solver.dt must be > 0"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = format!("{MINIMAL}\n[solvr]\ndt = 1.0\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("solvr.dt"), "{err}");

        let text = MINIMAL.replace("t_end = 0.1", "t_end = 0.1\ndtt = 2");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("solver.dtt"), "{err}");

        let text = MINIMAL.replace(
            "kind = \"taylor_green\"",
            "kind = \"taylor_green\"\nampltude = 1",
        );
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("init.u.ampltude"), "{err}");
    }

    #[test]
    fn missing_and_invalid_values() {
        let err = parse_config(&MINIMAL.replace("n = 32", "")).unwrap_err();
        assert!(err.to_string().contains("grid.n is required"));
        let err = parse_config(&MINIMAL.replace("n = 32", "n = 48")).unwrap_err();
        assert!(err.to_string().contains("grid.n"));
        let err = parse_config(&MINIMAL.replace("\"taylor_green\"", "\"equatorial\"")).unwrap_err();
        assert!(err.to_string().contains("init.u.kind"));
        let err = parse_config(&MINIMAL.replace("dt = 1e-3", "dt = \"fast\"")).unwrap_err();
        assert!(err.to_string().contains("solver.dt must be a number"));
        assert!(parse_config("grid = [").is_err());
    }

    #[test]
    fn digest_ignores_horizon_and_output() {
        let c = parse_config(MINIMAL).unwrap();
        let mut d = c.clone();
        d.solver.t_end = 5.0;
        d.output.dir = PathBuf::from("/elsewhere");
        d.apply_seed(9);
        assert_eq!(c.digest_text(), d.digest_text());
        d.solver.dt = 2e-3;
        assert_ne!(c.digest_text(), d.digest_text());
    }

    #[test]
    fn audit_defaults_and_validation() {
        let a = parse_audit_config("[audit]\n").unwrap();
        assert_eq!(
            (a.n_low, a.n_high, a.corpus_size, a.band),
            (32, 64, 100, 10)
        );
        assert_eq!(a.interpolation.len(), 2);
        assert_eq!(a.products.len(), 1);

        let bad_holder =
            "[audit]\n[[audit.product]]\nalpha = 1\np = 2\np1 = 4\nq1 = 2\np2 = 4\nq2 = 4\n";
        let err = parse_audit_config(bad_holder).unwrap_err().to_string();
        assert!(err.contains("audit.product[0]"), "{err}");

        let err = parse_audit_config("[audit]\ncorpus = 3\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("audit.corpus"), "{err}");
    }
}
