//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [kernel]
//! kind = zero            # or: sampled, with file = phi.csv
//! [spectrum]
//! branches = -10..10     # optional; derived from the schedule when absent
//! [horizon]
//! T = 1.5
//! [schedule]
//! l_coef = 1
//! l_exp = 0.25
//! r_coef = 1
//! r_exp = 4
//! n_max = 8
//! n_list = 2,4,6
//! [grids]
//! tail_panels = 512
//! steps_per_unit = 2048
//! oracle_points = 2000
//! [initial]
//! kind = constant        # or: eigen (with branch = k), zero
//! head = 1,0
//! tail = 1,0
//! [output]
//! dir = out
//! ```
//!
//! Complex values are written `re,im`. A `[metadata]` section is accepted and ignored.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::state::{MState, DEFAULT_TAIL_PANELS};
use crate::summation::{PowerLaw, SummationSchedule};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Zero,
    Sampled(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Zero,
    Constant { head: Complex64, tail: Complex64 },
    Eigen { branch: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernel: KernelSpec,
    pub branches: Option<RangeInclusive<i64>>,
    pub horizon: f64,
    pub schedule: SummationSchedule,
    pub n_list: Vec<u32>,
    pub tail_panels: usize,
    pub steps_per_unit: usize,
    pub oracle_points: usize,
    pub initial: InitialSpec,
    pub out_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kernel: KernelSpec::Zero,
            branches: None,
            horizon: 1.5,
            schedule: SummationSchedule::default_rule(8),
            n_list: vec![2, 4, 6],
            tail_panels: DEFAULT_TAIL_PANELS,
            steps_per_unit: crate::sim::DEFAULT_STEPS_PER_UNIT,
            oracle_points: 2000,
            initial: InitialSpec::Constant {
                head: Complex64::new(1.0, 0.0),
                tail: Complex64::new(1.0, 0.0),
            },
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(line, key, format!("expected a number, got `{v}`")))
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::config(line, key, format!("expected an integer, got `{v}`")))
}

fn parse_complex(line: usize, key: &str, v: &str) -> Result<Complex64> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse_f64(line, key, re)?, 0.0)),
        [re, im] => Ok(Complex64::new(
            parse_f64(line, key, re)?,
            parse_f64(line, key, im)?,
        )),
        _ => Err(Error::config(
            line,
            key,
            format!("expected `re,im`, got `{v}`"),
        )),
    }
}

/// `a..b` (inclusive; empty when `a > b`).
pub fn parse_branches(v: &str) -> std::result::Result<RangeInclusive<i64>, String> {
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| format!("expected `a..b`, got `{v}`"))?;
    let a = a
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("bad branch bound `{a}`"))?;
    let b = b
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("bad branch bound `{b}`"))?;
    Ok(a..=b)
}

/// Comma-separated summation orders, each at least 1.
pub fn parse_n_list(v: &str) -> std::result::Result<Vec<u32>, String> {
    let list: Vec<u32> = v
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad summation order `{s}`"))
        })
        .collect::<std::result::Result<_, _>>()?;
    if list.is_empty() || list.contains(&0) {
        return Err("summation orders must be positive".into());
    }
    Ok(list)
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative file paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut c = Config::default();
        let mut section = String::new();
        let mut kind: Option<(usize, String)> = None;
        let mut file: Option<(usize, String)> = None;
        let mut init_kind: Option<(usize, String)> = None;
        let mut init_head = Complex64::new(1.0, 0.0);
        let mut init_tail = Complex64::new(1.0, 0.0);
        let mut init_branch: Option<i64> = None;
        let mut n_max_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(name) = s.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line, s, "unterminated section header"))?;
                section = name.trim().to_string();
                match section.as_str() {
                    "kernel" | "spectrum" | "horizon" | "schedule" | "grids" | "initial"
                    | "output" | "metadata" => {}
                    _ => return Err(Error::config(line, &section, "unknown section")),
                }
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| Error::config(line, s, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let qualified = format!("{section}.{key}");
            let q = qualified.as_str();
            match (section.as_str(), key) {
                ("metadata", _) => {}
                ("kernel", "kind") => kind = Some((line, value.to_string())),
                ("kernel", "file") => file = Some((line, value.to_string())),
                ("spectrum", "branches") => {
                    c.branches = Some(parse_branches(value).map_err(|m| Error::config(line, q, m))?)
                }
                ("horizon", "T") => c.horizon = parse_f64(line, q, value)?,
                ("schedule", "l_coef") => c.schedule.l.coef = parse_f64(line, q, value)?,
                ("schedule", "l_exp") => c.schedule.l.exponent = parse_f64(line, q, value)?,
                ("schedule", "r_coef") => c.schedule.r.coef = parse_f64(line, q, value)?,
                ("schedule", "r_exp") => c.schedule.r.exponent = parse_f64(line, q, value)?,
                ("schedule", "n_max") => {
                    c.schedule.n_max = parse_int(line, q, value)?;
                    n_max_line = line;
                }
                ("schedule", "n_list") => {
                    c.n_list = parse_n_list(value).map_err(|m| Error::config(line, q, m))?
                }
                ("grids", "tail_panels") => c.tail_panels = parse_int(line, q, value)?,
                ("grids", "steps_per_unit") => c.steps_per_unit = parse_int(line, q, value)?,
                ("grids", "oracle_points") => c.oracle_points = parse_int(line, q, value)?,
                ("initial", "kind") => init_kind = Some((line, value.to_string())),
                ("initial", "head") => init_head = parse_complex(line, q, value)?,
                ("initial", "tail") => init_tail = parse_complex(line, q, value)?,
                ("initial", "branch") => init_branch = Some(parse_int(line, q, value)?),
                ("output", "dir") => c.out_dir = resolve(base, value),
                ("", _) => return Err(Error::config(line, key, "key outside any section")),
                _ => return Err(Error::config(line, q, "unknown key")),
            }
        }

        c.kernel = match kind {
            None => KernelSpec::Zero,
            Some((_, k)) if k == "zero" => KernelSpec::Zero,
            Some((line, k)) if k == "sampled" => {
                let (_, f) = file.ok_or_else(|| {
                    Error::config(line, "kernel.file", "sampled kernel needs a file")
                })?;
                KernelSpec::Sampled(resolve(base, &f))
            }
            Some((line, k)) => {
                return Err(Error::config(
                    line,
                    "kernel.kind",
                    format!("unknown kernel `{k}`"),
                ))
            }
        };
        c.initial = match init_kind {
            None => InitialSpec::Constant {
                head: init_head,
                tail: init_tail,
            },
            Some((_, k)) if k == "constant" => InitialSpec::Constant {
                head: init_head,
                tail: init_tail,
            },
            Some((_, k)) if k == "zero" => InitialSpec::Zero,
            Some((line, k)) if k == "eigen" => InitialSpec::Eigen {
                branch: init_branch.ok_or_else(|| {
                    Error::config(line, "initial.branch", "eigen data needs a branch")
                })?,
            },
            Some((line, k)) => {
                return Err(Error::config(
                    line,
                    "initial.kind",
                    format!("unknown initial data `{k}`"),
                ))
            }
        };
        if let Err(Error::Schedule(m)) = c.schedule.validate() {
            return Err(Error::config(n_max_line, "schedule", m));
        }
        c.check().map_err(|m| Error::config(0, "config", m))?;
        Ok(c)
    }

    /// Cross-field checks shared with command-line overrides.
    pub fn check(&self) -> std::result::Result<(), String> {
        if let Some(&n) = self
            .n_list
            .iter()
            .find(|&&n| n == 0 || n > self.schedule.n_max)
        {
            return Err(format!(
                "summation order {n} outside 1..={}",
                self.schedule.n_max
            ));
        }
        if self.tail_panels < 2 || !self.tail_panels.is_multiple_of(2) {
            return Err("grids.tail_panels must be even and at least 2".into());
        }
        if self.steps_per_unit < 2 || !self.steps_per_unit.is_multiple_of(2) {
            return Err("grids.steps_per_unit must be even and at least 2".into());
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<DelayKernel> {
        match &self.kernel {
            KernelSpec::Zero => Ok(DelayKernel::Zero),
            KernelSpec::Sampled(p) => DelayKernel::read_csv(p),
        }
    }

    /// Initial data on `panels` tail panels; eigen data needs the matching root.
    pub fn initial_state(&self, panels: usize, eigen_lambda: Option<Complex64>) -> Result<MState> {
        match self.initial {
            InitialSpec::Zero => MState::zero(panels),
            InitialSpec::Constant { head, tail } => MState::from_fn(head, panels, |_| tail),
            InitialSpec::Eigen { branch } => {
                let lambda = eigen_lambda
                    .ok_or_else(|| Error::Domain(format!("no eigenvalue for branch {branch}")))?;
                MState::eigenvector(lambda, panels)
            }
        }
    }

    /// Serializes to the same format; `parse(to_ini())` gives back an equal config.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let cx = |z: Complex64| format!("{:e},{:e}", z.re, z.im);
        s.push_str("[kernel]\n");
        match &self.kernel {
            KernelSpec::Zero => s.push_str("kind = zero\n"),
            KernelSpec::Sampled(p) => {
                let _ = write!(s, "kind = sampled\nfile = {}\n", p.display());
            }
        }
        if let Some(b) = &self.branches {
            let _ = write!(s, "[spectrum]\nbranches = {}..{}\n", b.start(), b.end());
        }
        let _ = write!(s, "[horizon]\nT = {:e}\n", self.horizon);
        let sc = &self.schedule;
        let _ = write!(
            s,
            "[schedule]\nl_coef = {:e}\nl_exp = {:e}\nr_coef = {:e}\nr_exp = {:e}\nn_max = {}\nn_list = {}\n",
            sc.l.coef,
            sc.l.exponent,
            sc.r.coef,
            sc.r.exponent,
            sc.n_max,
            self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = write!(
            s,
            "[grids]\ntail_panels = {}\nsteps_per_unit = {}\noracle_points = {}\n",
            self.tail_panels, self.steps_per_unit, self.oracle_points
        );
        s.push_str("[initial]\n");
        match self.initial {
            InitialSpec::Zero => s.push_str("kind = zero\n"),
            InitialSpec::Constant { head, tail } => {
                let _ = write!(
                    s,
                    "kind = constant\nhead = {}\ntail = {}\n",
                    cx(head),
                    cx(tail)
                );
            }
            InitialSpec::Eigen { branch } => {
                let _ = write!(s, "kind = eigen\nbranch = {branch}\n");
            }
        }
        let _ = write!(s, "[output]\ndir = {}\n", self.out_dir.display());
        s
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// A schedule with power laws `l_n = c1 n^a`, `R_n = c2 n^b`.
pub fn power_schedule(c1: f64, a: f64, c2: f64, b: f64, n_max: u32) -> Result<SummationSchedule> {
    SummationSchedule::new(
        PowerLaw {
            coef: c1,
            exponent: a,
        },
        PowerLaw {
            coef: c2,
            exponent: b,
        },
        n_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        let c = Config::parse("", Path::new("/tmp")).unwrap();
        assert_eq!(c.kernel, KernelSpec::Zero);
        assert_eq!(c.n_list, vec![2, 4, 6]);
    }

    #[test]
    fn full_config_round_trips() {
        let text = "[kernel]\nkind = sampled\nfile = phi.csv\n[spectrum]\nbranches = -3..3\n\
                    [horizon]\nT = 1.25\n[schedule]\nn_max = 5\nn_list = 1,3\n\
                    [initial]\nkind = eigen\nbranch = -2\n[output]\ndir = res\n[metadata]\nnote = x\n";
        let c = Config::parse(text, Path::new("/data")).unwrap();
        assert_eq!(
            c.kernel,
            KernelSpec::Sampled(PathBuf::from("/data/phi.csv"))
        );
        assert_eq!(c.branches, Some(-3..=3));
        assert_eq!(c.initial, InitialSpec::Eigen { branch: -2 });
        let back = Config::parse(&c.to_ini(), Path::new("/elsewhere")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = Config::parse("[horizon]\n\nT = abc\n", Path::new(".")).unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "horizon.T");
            }
            e => panic!("{e}"),
        }
        let err = Config::parse("[grids]\nfoo = 1\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(Config::parse("[schedule]\nl_exp = 0.7\n", Path::new(".")).is_err());
        assert!(Config::parse("[schedule]\nn_list = 2,40\n", Path::new(".")).is_err());
    }

    #[test]
    fn branch_ranges() {
        assert_eq!(parse_branches("-10..10").unwrap(), -10..=10);
        assert!(parse_branches("1..0").unwrap().is_empty());
        assert!(parse_branches("3").is_err());
    }
}
