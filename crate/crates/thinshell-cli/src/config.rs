//! Plain-text `section.key = value` files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thinshell::domain::AmbientScalar;
use thinshell::{Surface, V3};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: PathBuf, line: usize, msg: String },
    #[error("{path}: unknown key '{key}'")]
    UnknownKey { path: PathBuf, key: String },
    #[error("{key}: {msg}")]
    Value { key: String, msg: String },
}

pub type ConfigResult<T> = Result<T, ConfigError>;

pub fn value_error(key: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError::Value { key: key.to_string(), msg: msg.to_string() }
}

#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    pub origin: PathBuf,
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str, origin: &Path) -> ConfigResult<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: &str| ConfigError::Syntax { path: origin.to_path_buf(), line: k + 1, msg: msg.to_string() };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected 'section.key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            let valid = key.split_once('.').is_some_and(|(s, k)| {
                !s.is_empty() && !k.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
            });
            if !valid {
                return Err(syntax(&format!("malformed key '{key}'")));
            }
            if value.is_empty() {
                return Err(syntax(&format!("empty value for '{key}'")));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(syntax(&format!("duplicate key '{key}'")));
            }
        }
        Ok(KeyValues { origin: origin.to_path_buf(), entries })
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn check_known(&self, known: &[&str]) -> ConfigResult<()> {
        match self.entries.keys().find(|k| !known.contains(&k.as_str())) {
            Some(key) => Err(ConfigError::UnknownKey { path: self.origin.clone(), key: key.clone() }),
            None => Ok(()),
        }
    }

    /// Entries of `other` replace those of `self`.
    pub fn merge(&mut self, other: KeyValues) {
        self.entries.extend(other.entries);
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.entries.iter()
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> ConfigResult<T>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| value_error(key, format!("cannot parse '{v}': {e}"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }

    pub fn positive(&self, key: &str, default: f64) -> ConfigResult<f64> {
        let v = self.get(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(value_error(key, format!("must be positive, got {v}")))
        }
    }

    pub fn nonnegative(&self, key: &str, default: f64) -> ConfigResult<f64> {
        let v = self.get(key, default)?;
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(value_error(key, format!("must be nonnegative, got {v}")))
        }
    }

    pub fn list<T: FromStr>(&self, key: &str, default: &str) -> ConfigResult<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        split_list(self.str_or(key, default))
            .map(|s| s.parse().map_err(|e| value_error(key, format!("cannot parse '{s}': {e}"))))
            .collect()
    }

    /// Path relative to the directory holding the file.
    pub fn path(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.origin.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

pub fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn numbers(key: &str, s: &str, n: usize) -> ConfigResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(&[',', ':'][..])
        .map(|x| x.trim().parse::<f64>().map_err(|e| value_error(key, format!("cannot parse '{x}': {e}"))))
        .collect::<ConfigResult<_>>()?;
    if v.len() != n {
        return Err(value_error(key, format!("expected {n} numbers in '{s}'")));
    }
    Ok(v)
}

/// `const:c`, `affine:c,a1,a2,a3` or `azimuthal:c,amp,k`.
pub fn parse_ambient(key: &str, s: &str) -> ConfigResult<AmbientScalar> {
    let (kind, args) = s.split_once(':').ok_or_else(|| value_error(key, format!("expected kind:args, got '{s}'")))?;
    match kind.trim() {
        "const" => Ok(AmbientScalar::Constant(numbers(key, args, 1)?[0])),
        "affine" => {
            let v = numbers(key, args, 4)?;
            Ok(AmbientScalar::Affine { c: v[0], a: V3::new(v[1], v[2], v[3]) })
        }
        "azimuthal" => {
            let v = numbers(key, args, 3)?;
            if v[2] < 0.0 || v[2].fract() != 0.0 {
                return Err(value_error(key, "azimuthal wavenumber must be a nonnegative integer"));
            }
            Ok(AmbientScalar::AzimuthalCos { c: v[0], amp: v[1], k: v[2] as u32 })
        }
        other => Err(value_error(key, format!("unknown function kind '{other}'"))),
    }
}

/// `sphere:R`, `torus:R:a`, `spheroid:L:b` or `profile:<csv path>`.
pub fn parse_surface(kv: &KeyValues, key: &str, s: &str, n_s: usize, n_theta: usize) -> ConfigResult<Surface> {
    let (kind, args) = s.split_once(':').ok_or_else(|| value_error(key, format!("expected kind:args, got '{s}'")))?;
    let built = match kind.trim() {
        "sphere" => Surface::sphere(numbers(key, args, 1)?[0], n_s, n_theta),
        "torus" => {
            let v = numbers(key, args, 2)?;
            Surface::torus(v[0], v[1], n_s, n_theta)
        }
        "spheroid" => {
            let v = numbers(key, args, 2)?;
            Surface::spheroid(v[0], v[1], n_s, n_theta)
        }
        "profile" => {
            let path = kv.path(args.trim());
            if !path.is_file() {
                return Err(value_error(key, format!("profile file {} not found", path.display())));
            }
            Surface::from_profile_csv(&path, n_s, n_theta)
        }
        other => return Err(value_error(key, format!("unknown surface kind '{other}'"))),
    };
    built.map_err(|e| value_error(key, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(text: &str) -> ConfigResult<KeyValues> {
        KeyValues::parse(text, Path::new("/tmp/run.conf"))
    }

    #[test]
    fn parses_sections_and_comments() {
        let c = kv("# header\ngrid.n = 32  # trailing\n\nsolve.scheme=imex-euler\n").unwrap();
        assert_eq!(c.get("grid.n", 0usize).unwrap(), 32);
        assert_eq!(c.str_or("solve.scheme", ""), "imex-euler");
        assert_eq!(c.get("solve.dt", 0.5).unwrap(), 0.5);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(kv("grid.n 32"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(kv("n = 32"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(kv("a.b = 1\na.b = 2"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(kv("a.b ="), Err(ConfigError::Syntax { .. })));
        assert!(kv("grid.n = x").unwrap().get("grid.n", 0usize).is_err());
    }

    #[test]
    fn unknown_keys_are_reported() {
        let c = kv("grid.nn = 3").unwrap();
        assert!(matches!(c.check_known(&["grid.n"]), Err(ConfigError::UnknownKey { .. })));
    }

    #[test]
    fn ambient_and_surface_specs() {
        assert_eq!(parse_ambient("k", "const:0.5").unwrap(), AmbientScalar::Constant(0.5));
        assert_eq!(
            parse_ambient("k", "affine:1,0,0,0.2").unwrap(),
            AmbientScalar::Affine { c: 1.0, a: V3::new(0.0, 0.0, 0.2) }
        );
        assert!(parse_ambient("k", "azimuthal:1,0.1,1.5").is_err());
        assert!(parse_ambient("k", "cubic:1").is_err());
        let c = kv("a.b = 1").unwrap();
        assert!(parse_surface(&c, "k", "torus:3:1", 16, 16).is_ok());
        assert!(parse_surface(&c, "k", "torus:1:3", 16, 16).is_err());
        assert!(parse_surface(&c, "k", "profile:missing.csv", 16, 16).is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let c = kv("a.b = 1").unwrap();
        assert_eq!(c.path("v0.csv"), PathBuf::from("/tmp/v0.csv"));
        assert_eq!(c.path("/abs.csv"), PathBuf::from("/abs.csv"));
    }
}
