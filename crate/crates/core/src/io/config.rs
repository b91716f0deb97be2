//! TOML run configuration.
//!
//! ```toml
//! [model]
//! nu = 1.0
//! eta = 1.0
//! mu = 1.0
//! sigma1 = 1.0
//! sigma2 = 1.0
//! alpha = 3.0
//! beta = 3.0
//! # transport, coupling, damping = true | false (default true)
//!
//! [grid]            # optional: n = 32, length = 2π, dealias = 2/3
//!
//! [time]
//! t_end = 0.2       # required; dt = 1e-3, cfl_limit = 0.5, scheme = "if-euler"
//!
//! [initial]
//! generator = "taylor-green"   # required; amplitude, seed, kmin, kmax, mode
//!
//! [output]          # optional: stride = 1, dir
//! ```
//!
//! Errors carry the line of the offending key, or of the section header
//! when a required key is missing.

use std::fmt::Write;
use std::path::PathBuf;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::inequality_lab::Generator;
use crate::integrator::{InitialCondition, RunConfig, Scheme};
use crate::operators::{ModelParams, Terms};

const SECTIONS: [&str; 5] = ["model", "grid", "time", "initial", "output"];

/// Key positions in the source text.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    /// 1-based line of `[section]`.
    fn section_line(&self, section: &str) -> Option<usize> {
        self.text.lines().position(|l| header(l) == Some(section)).map(|i| i + 1)
    }

    /// 1-based line of `key = ...` inside `[section]`.
    fn key_line(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = None;
        for (i, line) in self.text.lines().enumerate() {
            if let Some(h) = header(line) {
                current = Some(h);
                continue;
            }
            if current == Some(section) {
                let t = line.trim_start();
                if let Some(rest) = t.strip_prefix(key) {
                    let rest = rest.trim_start();
                    if rest.starts_with('=') {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn error_at(&self, section: &str, key: &str, msg: String) -> Error {
        let line = self.key_line(section, key).or_else(|| self.section_line(section));
        match line {
            Some(l) => Error::Config(format!("line {l}: {msg}")),
            None => Error::Config(msg),
        }
    }
}

fn header(line: &str) -> Option<&str> {
    let t = line.trim();
    let t = t.split('#').next().unwrap_or("").trim();
    t.strip_prefix('[')?.strip_suffix(']').map(str::trim)
}

/// Typed access to one section.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    src: &'a Source<'a>,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn missing(&self, key: &str) -> Error {
        let msg = format!("missing required key '{key}' in [{}]", self.name);
        match self.src.section_line(self.name) {
            Some(l) => Error::Config(format!("line {l}: {msg}")),
            None => Error::Config(format!("{msg} (section absent)")),
        }
    }

    fn wrong_type(&self, key: &str, expected: &str) -> Error {
        self.src.error_at(
            self.name,
            key,
            format!("[{}] {key} must be {expected}", self.name),
        )
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.wrong_type(key, "a number")),
        }
    }

    fn float_req(&self, key: &str) -> Result<f64> {
        self.float(key)?.ok_or_else(|| self.missing(key))
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(self.wrong_type(key, "a non-negative integer")),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(self.wrong_type(key, "an integer")),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.wrong_type(key, "true or false")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.wrong_type(key, "a string")),
        }
    }

    fn check_keys(&self, known: &[&str]) -> Result<()> {
        if let Some(t) = self.table {
            if let Some(k) = t.keys().find(|k| !known.contains(&k.as_str())) {
                return Err(self.src.error_at(self.name, k, format!("unknown key '{k}' in [{}]", self.name)));
            }
        }
        Ok(())
    }

    fn at(&self, key: &str, msg: String) -> Error {
        self.src.error_at(self.name, key, msg)
    }
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let msg = e.message().trim().to_string();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            Error::Config(format!("line {line}: {msg}"))
        }
        None => Error::Config(msg),
    }
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = text.parse().map_err(|e| toml_error(text, e))?;
    let src = Source { text };
    for (key, value) in &root {
        if !SECTIONS.contains(&key.as_str()) || !value.is_table() {
            let line = text
                .lines()
                .position(|l| header(l) == Some(key) || l.trim_start().starts_with(key.as_str()))
                .map(|i| i + 1);
            let msg = format!("unknown section or top-level key '{key}'");
            return Err(match line {
                Some(l) => Error::Config(format!("line {l}: {msg}")),
                None => Error::Config(msg),
            });
        }
    }
    let section = |name: &'static str| Section {
        name,
        table: root.get(name).and_then(Value::as_table),
        src: &src,
    };
    let defaults = RunConfig::default();

    let model = section("model");
    model.check_keys(&[
        "nu", "eta", "mu", "sigma1", "sigma2", "alpha", "beta", "transport", "coupling", "damping",
    ])?;
    let terms = Terms {
        transport: model.boolean("transport")?.unwrap_or(true),
        coupling: model.boolean("coupling")?.unwrap_or(true),
        damping: model.boolean("damping")?.unwrap_or(true),
    };
    let params = ModelParams {
        nu: model.float_req("nu")?,
        eta: model.float_req("eta")?,
        mu: model.float_req("mu")?,
        sigma1: model.float_req("sigma1")?,
        sigma2: model.float_req("sigma2")?,
        alpha: model.float_req("alpha")?,
        beta: model.float_req("beta")?,
        terms,
    };
    if let Err(Error::InvalidParams(msg)) = params.validate() {
        let key = ["sigma1", "sigma2", "alpha", "beta", "nu", "eta", "mu"]
            .into_iter()
            .find(|k| msg.starts_with(k))
            .unwrap_or("nu");
        return Err(model.at(key, msg));
    }

    let grid = section("grid");
    grid.check_keys(&["n", "length", "dealias"])?;
    let n = grid.uint("n")?.map(|n| n as usize).unwrap_or(defaults.n);
    let length = grid.float("length")?.unwrap_or(defaults.length);
    let dealias = grid.float("dealias")?.unwrap_or(defaults.dealias);
    if let Err(e) = crate::grid::Grid::with_params(n, length, dealias) {
        let key = match &e {
            Error::InvalidGrid(m) if m.starts_with("length") => "length",
            Error::InvalidGrid(m) if m.starts_with("dealias") => "dealias",
            _ => "n",
        };
        return Err(grid.at(key, e.to_string()));
    }

    let time = section("time");
    time.check_keys(&["dt", "t_end", "cfl_limit", "scheme"])?;
    let dt = time.float("dt")?.unwrap_or(defaults.dt);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(time.at("dt", format!("dt must be positive, got {dt}")));
    }
    let t_end = time.float_req("t_end")?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(time.at("t_end", format!("t_end must be >= 0, got {t_end}")));
    }
    let cfl_limit = time.float("cfl_limit")?.unwrap_or(defaults.cfl_limit);
    if !(cfl_limit > 0.0) {
        return Err(time.at("cfl_limit", format!("cfl_limit must be positive, got {cfl_limit}")));
    }
    let scheme = match time.string("scheme")? {
        Some(s) => s.parse::<Scheme>().map_err(|e| time.at("scheme", e.to_string()))?,
        None => defaults.scheme,
    };

    let initial = section("initial");
    initial.check_keys(&["generator", "amplitude", "seed", "kmin", "kmax", "mode"])?;
    let generator: Generator = initial
        .string("generator")?
        .ok_or_else(|| initial.missing("generator"))?
        .parse()
        .map_err(|e: Error| initial.at("generator", e.to_string()))?;
    let d = InitialCondition::default();
    let as_u32 = |key: &str, v: Option<u64>, default: u32| -> Result<u32> {
        match v {
            None => Ok(default),
            Some(v) => u32::try_from(v).map_err(|_| initial.at(key, format!("{key} too large: {v}"))),
        }
    };
    let ic = InitialCondition {
        generator,
        amplitude: initial.float("amplitude")?.unwrap_or(d.amplitude),
        seed: initial.uint("seed")?.unwrap_or(d.seed),
        kmin: as_u32("kmin", initial.uint("kmin")?, d.kmin)?,
        kmax: as_u32("kmax", initial.uint("kmax")?, d.kmax)?,
        mode: initial.int("mode")?.unwrap_or(d.mode),
    };
    if !ic.amplitude.is_finite() {
        return Err(initial.at("amplitude", "amplitude must be finite".into()));
    }

    let output = section("output");
    output.check_keys(&["stride", "dir"])?;
    let stride = output.uint("stride")?.map(|s| s as usize).unwrap_or(defaults.stride);
    if stride == 0 {
        return Err(output.at("stride", "stride must be at least 1".into()));
    }
    let out_dir = output.string("dir")?.map(PathBuf::from);

    let cfg = RunConfig {
        params,
        n,
        length,
        dealias,
        dt,
        t_end,
        cfl_limit,
        scheme,
        initial: ic,
        stride,
        out_dir,
    };
    cfg.validate().map_err(|e| match e {
        Error::InvalidArgument(msg) if msg.starts_with("initial band") => initial.at("kmax", msg),
        other => Error::Config(other.to_string()),
    })?;
    Ok(cfg)
}

/// Emits every field of `cfg`; `parse_config` reproduces `cfg` exactly.
pub fn to_canonical_toml(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let ic = &cfg.initial;
    let mut s = String::new();
    let _ = writeln!(s, "[model]");
    for (k, v) in [
        ("nu", p.nu),
        ("eta", p.eta),
        ("mu", p.mu),
        ("sigma1", p.sigma1),
        ("sigma2", p.sigma2),
        ("alpha", p.alpha),
        ("beta", p.beta),
    ] {
        let _ = writeln!(s, "{k} = {v:?}");
    }
    let _ = writeln!(s, "transport = {}", p.terms.transport);
    let _ = writeln!(s, "coupling = {}", p.terms.coupling);
    let _ = writeln!(s, "damping = {}", p.terms.damping);
    let _ = writeln!(s, "\n[grid]\nn = {}\nlength = {:?}\ndealias = {:?}", cfg.n, cfg.length, cfg.dealias);
    let _ = writeln!(
        s,
        "\n[time]\ndt = {:?}\nt_end = {:?}\ncfl_limit = {:?}\nscheme = \"{}\"",
        cfg.dt, cfg.t_end, cfg.cfl_limit, cfg.scheme
    );
    let _ = writeln!(
        s,
        "\n[initial]\ngenerator = \"{}\"\namplitude = {:?}\nseed = {}\nkmin = {}\nkmax = {}\nmode = {}",
        ic.generator, ic.amplitude, ic.seed, ic.kmin, ic.kmax, ic.mode
    );
    let _ = writeln!(s, "\n[output]\nstride = {}", cfg.stride);
    if let Some(dir) = &cfg.out_dir {
        let _ = writeln!(s, "dir = {}", Value::String(dir.to_string_lossy().into_owned()));
    }
    s
}
