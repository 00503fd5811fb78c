//! INI run configuration.
//!
//! ```ini
//! command = lhy
//!
//! [potential]
//! kind = square_well      ; square_well | gaussian | tabulated | zero
//! V0 = 10
//! R = 1
//! ; table_path = profile.csv
//!
//! [physics]
//! N = 16                  ; or a list: N = 2, 3, 4
//! kappa = 0
//! K_policy = default     ; explicit | default | infinite
//! ; K = 12.5
//! ; L = 16                ; torus scale, overriding N^(1-kappa)
//! P = 0,0,0               ; or "all"
//! epsilon = 0
//! d = 4
//!
//! [numerics]
//! ; q_max = 50.27
//! tol = 1e-10
//! max_iter = 2000
//! ; cache_dir = cache
//!
//! [output]
//! format = csv            ; csv | json
//! ; out_path = result.csv
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use bosegas::bogoliubov::{default_low_cutoff, KAPPA_MAX};
use bosegas::{LowCutoff, Momentum, Potential};
use ini::Ini;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scattering,
    Twobody,
    Dispersion,
    Lhy,
    Spectrum,
    Ed,
    Verify,
}

impl Command {
    pub const ALL: [&'static str; 7] = ["scattering", "twobody", "dispersion", "lhy", "spectrum", "ed", "verify"];

    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "scattering" => Command::Scattering,
            "twobody" => Command::Twobody,
            "dispersion" => Command::Dispersion,
            "lhy" => Command::Lhy,
            "spectrum" => Command::Spectrum,
            "ed" => Command::Ed,
            "verify" => Command::Verify,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        Self::ALL[self as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    SquareWell,
    Gaussian,
    Tabulated(PathBuf),
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KPolicy {
    Explicit(f64),
    Default,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub kind: PotentialKind,
    pub v0: f64,
    pub range: Option<f64>,
    pub particles: Vec<usize>,
    pub kappa: f64,
    pub k_policy: KPolicy,
    pub scale: Option<f64>,
    /// `None` selects every total momentum.
    pub total: Option<Momentum>,
    pub epsilon: f64,
    pub levels: usize,
    pub q_max: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
    pub out_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            kind: PotentialKind::SquareWell,
            v0: 10.0,
            range: Some(1.0),
            particles: Vec::new(),
            kappa: 0.0,
            k_policy: KPolicy::Default,
            scale: None,
            total: Some(Momentum::ZERO),
            epsilon: 0.0,
            levels: 4,
            q_max: None,
            tol: 1e-10,
            max_iter: 2000,
            cache_dir: None,
            format: Format::Csv,
            out_path: None,
        }
    }
}

/// A configuration problem tied to one `section.key`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| err(field, format!("cannot parse {value:?}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_file(path).map_err(|e| err("config", format!("{}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                cfg.set(section.unwrap_or(""), key, value)?;
            }
        }
        Ok(cfg)
    }

    /// Applies `section.key=value` (or `key=value` for top-level keys).
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| err(assignment, "expected section.key=value"))?;
        let (section, key) = path.trim().split_once('.').unwrap_or(("", path.trim()));
        self.set(section, key, value.trim())
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let field = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        let f = field.as_str();
        match (section, key) {
            ("" | "run", "command") => {
                self.command = Some(Command::parse(value).ok_or_else(|| {
                    err(f, format!("unknown command {value:?}; expected one of {}", Command::ALL.join(", ")))
                })?)
            }
            ("potential", "kind") => {
                self.kind = match value {
                    "square_well" => PotentialKind::SquareWell,
                    "gaussian" => PotentialKind::Gaussian,
                    "zero" => PotentialKind::Zero,
                    "tabulated" => match &self.kind {
                        PotentialKind::Tabulated(p) => PotentialKind::Tabulated(p.clone()),
                        _ => PotentialKind::Tabulated(PathBuf::new()),
                    },
                    _ => return Err(err(f, format!("unknown potential kind {value:?}"))),
                }
            }
            ("potential", "V0") => self.v0 = number(f, value)?,
            ("potential", "R") => self.range = Some(number(f, value)?),
            ("potential", "table_path") => self.kind = PotentialKind::Tabulated(PathBuf::from(value)),
            ("physics", "N" | "N_list") => {
                self.particles = value
                    .split(',')
                    .map(|s| number::<usize>(f, s))
                    .collect::<Result<_, _>>()?
            }
            ("physics", "kappa") => self.kappa = number(f, value)?,
            ("physics", "K_policy") => {
                self.k_policy = match value {
                    "theorem2-default" | "default" => KPolicy::Default,
                    "infinite" => KPolicy::Infinite,
                    "explicit" => match self.k_policy {
                        KPolicy::Explicit(k) => KPolicy::Explicit(k),
                        _ => KPolicy::Explicit(f64::NAN),
                    },
                    _ => return Err(err(f, format!("unknown policy {value:?}"))),
                }
            }
            ("physics", "K") => {
                self.k_policy = if value == "inf" {
                    KPolicy::Infinite
                } else {
                    KPolicy::Explicit(number(f, value)?)
                }
            }
            ("physics", "L") => self.scale = Some(number(f, value)?),
            ("physics", "P") => {
                self.total = if value == "all" {
                    None
                } else {
                    let c: Vec<i32> = value.split(',').map(|s| number(f, s)).collect::<Result<_, _>>()?;
                    if c.len() != 3 {
                        return Err(err(f, "expected three integer components or \"all\""));
                    }
                    Some(Momentum::new(c[0], c[1], c[2]))
                }
            }
            ("physics", "epsilon") => self.epsilon = number(f, value)?,
            ("physics", "d") => self.levels = number(f, value)?,
            ("numerics", "q_max") => self.q_max = Some(number(f, value)?),
            ("numerics", "tol") => self.tol = number(f, value)?,
            ("numerics", "max_iter") => self.max_iter = number(f, value)?,
            ("numerics", "cache_dir") => self.cache_dir = Some(PathBuf::from(value)),
            ("output", "format") => self.format = parse_format(f, value)?,
            ("output", "out_path") => self.out_path = Some(PathBuf::from(value)),
            _ => return Err(err(f, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..KAPPA_MAX).contains(&self.kappa) {
            return Err(err("physics.kappa", format!("must lie in [0, 2/3), got {}", self.kappa)));
        }
        if let Some(&n) = self.particles.iter().find(|&&n| n < 2) {
            return Err(err("physics.N", format!("must be at least 2, got {n}")));
        }
        if let Some(q) = self.q_max {
            if !(q > 0.0 && q.is_finite()) {
                return Err(err("numerics.q_max", format!("must be positive, got {q}")));
            }
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(err("numerics.tol", format!("must lie in (0, 1e-6], got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(err("numerics.max_iter", "must be at least 1"));
        }
        if let KPolicy::Explicit(k) = self.k_policy {
            if !(k > 0.0) {
                return Err(err("physics.K", "explicit policy needs a positive K"));
            }
        }
        if let Some(l) = self.scale {
            if !(l > 0.0 && l.is_finite()) {
                return Err(err("physics.L", format!("must be positive, got {l}")));
            }
        }
        if !(self.epsilon >= 0.0) {
            return Err(err("physics.epsilon", "must be nonnegative"));
        }
        if self.levels == 0 {
            return Err(err("physics.d", "must be at least 1"));
        }
        if let PotentialKind::Tabulated(p) = &self.kind {
            if p.as_os_str().is_empty() {
                return Err(err("potential.table_path", "required for kind = tabulated"));
            }
        }
        Ok(())
    }

    pub fn potential(&self) -> bosegas::Result<Potential> {
        let range = || {
            self.range
                .ok_or_else(|| bosegas::Error::Invalid("potential.R is required".into()))
        };
        match &self.kind {
            PotentialKind::SquareWell => Potential::square_well(self.v0, range()?),
            PotentialKind::Gaussian => Potential::gaussian_truncated(self.v0, range()?),
            PotentialKind::Tabulated(p) => Potential::tabulated_from_csv(p, self.v0, self.range),
            PotentialKind::Zero => Ok(Potential::zero()),
        }
    }

    /// The single particle number of a command that takes one.
    pub fn single_n(&self) -> Result<usize, ConfigError> {
        match self.particles.as_slice() {
            [n] => Ok(*n),
            [] => Err(err("physics.N", "required by this command")),
            _ => Err(err("physics.N", "this command takes a single N")),
        }
    }

    pub fn n_list(&self) -> Result<&[usize], ConfigError> {
        if self.particles.is_empty() {
            return Err(err("physics.N", "required by this command"));
        }
        Ok(&self.particles)
    }

    /// `L`, either explicit or `N^{1-κ}`.
    pub fn scale_for(&self, particles: usize) -> f64 {
        self.scale.unwrap_or_else(|| (particles as f64).powf(1.0 - self.kappa))
    }

    pub fn low_cutoff(&self, particles: usize, q_max: f64) -> LowCutoff {
        match self.k_policy {
            KPolicy::Explicit(k) => LowCutoff::Finite(k),
            KPolicy::Infinite => LowCutoff::Infinite,
            KPolicy::Default => default_low_cutoff(particles, self.kappa, q_max),
        }
    }
}

pub fn parse_format(field: &str, value: &str) -> Result<Format, ConfigError> {
    match value {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(err(field, format!("expected csv or json, got {value:?}"))),
    }
}
