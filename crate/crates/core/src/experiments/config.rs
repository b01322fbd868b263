use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::param_select::{build_grid, ParamGrid, SubgradientRule};
use crate::spectral_reg::FilterKind;

use super::data::{DataModel, ImageSource};

/// Keys accepted in config files and as command-line flags.
pub const KEYS: &[&str] = &[
    "model",
    "d",
    "s",
    "sparsity",
    "tau",
    "n",
    "n-mc",
    "grid",
    "filter",
    "loss",
    "seed",
    "trials",
    "out",
    "gamma",
    "tol",
    "max-iter",
    "n-test",
    "n-train",
    "idx",
    "eta",
    "operator-seed",
    "dense-points",
];

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parses flat `key = value` text; `#` starts a comment, later keys override earlier ones.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, got {line:?}")))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(parse_err(format!("unknown key {key:?}")));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config_text(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Spectral,
    Denoise,
    Deblur,
    Tv,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(ModelKind::Spectral),
            "denoise" => Ok(ModelKind::Denoise),
            "deblur" => Ok(ModelKind::Deblur),
            "tv" => Ok(ModelKind::Tv),
            _ => Err(invalid(format!("unknown model {s:?} (spectral|denoise|deblur|tv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterName {
    Tikhonov,
    Landweber,
    Cutoff,
}

impl FromStr for FilterName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tikhonov" => Ok(FilterName::Tikhonov),
            "landweber" => Ok(FilterName::Landweber),
            "cutoff" => Ok(FilterName::Cutoff),
            _ => Err(invalid(format!("unknown filter {s:?} (tikhonov|landweber|cutoff)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossChoice {
    Truncated,
    BregmanSign,
    BregmanCertificate,
    Tv,
}

impl LossChoice {
    pub fn rule(self) -> SubgradientRule {
        match self {
            LossChoice::BregmanSign => SubgradientRule::ReferenceSign,
            _ => SubgradientRule::Certificate,
        }
    }
}

impl FromStr for LossChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated" => Ok(LossChoice::Truncated),
            "bregman-sign" => Ok(LossChoice::BregmanSign),
            "bregman" | "bregman-cert" => Ok(LossChoice::BregmanCertificate),
            "tv" => Ok(LossChoice::Tv),
            _ => Err(invalid(format!(
                "unknown loss {s:?} (truncated|bregman|bregman-sign|tv)"
            ))),
        }
    }
}

/// `lo:hi:N` geometric grid bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub const fn new(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count }
    }

    pub fn build(self) -> Result<ParamGrid> {
        build_grid(self.lo, self.hi, self.count)
    }

    /// Same range widened by one decade on each side, with `count` points.
    pub fn widened(self, count: usize) -> Self {
        Self::new(self.lo / 10.0, self.hi * 10.0, count)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(invalid(format!("grid must be lo:hi:N, got {s:?}")));
        };
        Ok(Self::new(parse_num(lo)?, parse_num(hi)?, parse_num(n)?))
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("cannot parse {s:?} as a number")))
}

/// `v`, `a,b,c` or `lo:hi:N` (log-spaced, endpoints included).
pub fn parse_tau_list(s: &str) -> Result<Vec<f64>> {
    let values = if s.contains(':') {
        let g: GridSpec = s.parse()?;
        build_grid(g.lo, g.hi, g.count)?.values().to_vec()
    } else {
        s.split(',').map(parse_num).collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() || values.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(invalid(format!("noise levels must be finite and >= 0, got {s:?}")));
    }
    Ok(values)
}

/// `n`, `a,b,c` or `lo:hi:step`.
pub fn parse_count_list(s: &str) -> Result<Vec<usize>> {
    let values: Vec<usize> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(invalid(format!("range must be lo:hi:step, got {s:?}")));
        };
        let (lo, hi, step): (usize, usize, usize) = (parse_num(lo)?, parse_num(hi)?, parse_num(step)?);
        if step == 0 {
            return Err(invalid("range step must be >= 1"));
        }
        (lo..=hi).step_by(step).collect()
    } else {
        s.split(',').map(parse_num).collect::<Result<_>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err(invalid(format!("sample counts must be >= 1, got {s:?}")));
    }
    Ok(values)
}

/// Fully resolved settings shared by all subcommands. `None` means "use the study default".
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub model: ModelKind,
    pub d: usize,
    pub s: f64,
    pub sparsity: usize,
    pub taus: Option<Vec<f64>>,
    pub ns: Option<Vec<usize>>,
    pub n_mc: Option<usize>,
    pub grid: Option<GridSpec>,
    pub filters: Vec<FilterName>,
    pub loss: LossChoice,
    pub seed: u64,
    pub trials: Option<usize>,
    pub out: PathBuf,
    pub gamma: f64,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub n_test: usize,
    pub n_train: Option<usize>,
    pub idx: Option<PathBuf>,
    pub eta: f64,
    pub operator_seed: Option<u64>,
    pub dense_points: usize,
}

impl StudyConfig {
    /// Model defaults, used when a key is absent.
    pub fn defaults(model: ModelKind) -> Self {
        let (d, sparsity, filters, loss) = match model {
            ModelKind::Spectral => (
                70,
                1,
                vec![FilterName::Tikhonov, FilterName::Landweber],
                LossChoice::Truncated,
            ),
            ModelKind::Denoise => (1024, 16, Vec::new(), LossChoice::BregmanCertificate),
            ModelKind::Deblur => (256, 8, Vec::new(), LossChoice::BregmanCertificate),
            ModelKind::Tv => (28, 1, Vec::new(), LossChoice::Tv),
        };
        Self {
            model,
            d,
            s: 0.5,
            sparsity,
            taus: None,
            ns: None,
            n_mc: None,
            grid: None,
            filters,
            loss,
            seed: 0,
            trials: None,
            out: PathBuf::from("out"),
            gamma: 0.2,
            tol: None,
            max_iter: 200_000,
            n_test: 50,
            n_train: None,
            idx: None,
            eta: 0.05,
            operator_seed: None,
            dense_points: 1000,
        }
    }

    /// Builds a config from merged key/value settings (flags already layered over the file).
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(invalid(format!("unknown key {k:?}")));
            }
        }
        let model = match map.get("model") {
            Some(m) => m.parse()?,
            None => ModelKind::Spectral,
        };
        let mut c = Self::defaults(model);
        let get = |k: &str| map.get(k).map(String::as_str);
        if let Some(v) = get("d") {
            c.d = parse_num(v)?;
        }
        if let Some(v) = get("s") {
            c.s = parse_num(v)?;
        }
        if let Some(v) = get("sparsity") {
            c.sparsity = parse_num(v)?;
        }
        if let Some(v) = get("tau") {
            c.taus = Some(parse_tau_list(v)?);
        }
        if let Some(v) = get("n") {
            c.ns = Some(parse_count_list(v)?);
        }
        if let Some(v) = get("n-mc") {
            c.n_mc = Some(parse_num(v)?);
        }
        if let Some(v) = get("grid") {
            c.grid = Some(v.parse()?);
        }
        if let Some(v) = get("filter") {
            c.filters = v.split(',').map(|f| f.trim().parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = get("loss") {
            c.loss = v.parse()?;
        }
        if let Some(v) = get("seed") {
            c.seed = parse_num(v)?;
        }
        if let Some(v) = get("trials") {
            c.trials = Some(parse_num(v)?);
        }
        if let Some(v) = get("out") {
            c.out = PathBuf::from(v);
        }
        if let Some(v) = get("gamma") {
            c.gamma = parse_num(v)?;
        }
        if let Some(v) = get("tol") {
            c.tol = Some(parse_num(v)?);
        }
        if let Some(v) = get("max-iter") {
            c.max_iter = parse_num(v)?;
        }
        if let Some(v) = get("n-test") {
            c.n_test = parse_num(v)?;
        }
        if let Some(v) = get("n-train") {
            c.n_train = Some(parse_num(v)?);
        }
        if let Some(v) = get("idx") {
            c.idx = Some(PathBuf::from(v));
        }
        if let Some(v) = get("eta") {
            c.eta = parse_num(v)?;
        }
        if let Some(v) = get("operator-seed") {
            c.operator_seed = Some(parse_num(v)?);
        }
        if let Some(v) = get("dense-points") {
            c.dense_points = parse_num(v)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.model == ModelKind::Spectral && self.filters.is_empty() {
            return Err(invalid("spectral model needs at least one filter"));
        }
        if self.model != ModelKind::Spectral && !self.filters.is_empty() {
            return Err(invalid("filters apply to the spectral model only"));
        }
        let loss_ok = match self.model {
            ModelKind::Spectral => self.loss == LossChoice::Truncated,
            ModelKind::Denoise | ModelKind::Deblur => self.loss != LossChoice::Tv,
            ModelKind::Tv => self.loss == LossChoice::Tv,
        };
        if !loss_ok {
            return Err(invalid(format!("loss {:?} does not fit model {:?}", self.loss, self.model)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.n_test == 0 || self.max_iter == 0 || self.dense_points < 2 {
            return Err(invalid("n-test, max-iter must be >= 1 and dense-points >= 2"));
        }
        if matches!(self.n_mc, Some(0)) || matches!(self.trials, Some(0)) || matches!(self.n_train, Some(0)) {
            return Err(invalid("n-mc, trials and n-train must be >= 1"));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(invalid(format!("tol must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn filter_kind(&self, f: FilterName) -> FilterKind {
        match f {
            FilterName::Tikhonov => FilterKind::Tikhonov,
            FilterName::Landweber => FilterKind::Landweber { gamma: self.gamma },
            FilterName::Cutoff => FilterKind::SpectralCutoff,
        }
    }

    /// The data model at noise level `tau`.
    pub fn data_model(&self, tau: f64) -> DataModel {
        match self.model {
            ModelKind::Spectral => DataModel::SpectralSource {
                d: self.d,
                s: self.s,
                tau,
                operator_seed: self.operator_seed.unwrap_or(self.seed),
            },
            ModelKind::Denoise => DataModel::SparseDenoise {
                d: self.d,
                sparsity: self.sparsity,
                tau,
            },
            ModelKind::Deblur => DataModel::SparseDeblur {
                d: self.d,
                sparsity: self.sparsity,
                tau,
            },
            ModelKind::Tv => DataModel::TvImages {
                source: match &self.idx {
                    Some(p) => ImageSource::Idx(p.clone()),
                    None => ImageSource::Synthetic { side: self.d },
                },
                tau,
            },
        }
    }

    pub fn taus_or(&self, default: &[f64]) -> Vec<f64> {
        self.taus.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn ns_or(&self, default: &[usize]) -> Vec<usize> {
        self.ns.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Single training-set size (first entry of `n`).
    pub fn n_or(&self, default: usize) -> usize {
        self.ns.as_ref().map_or(default, |v| v[0])
    }

    pub fn grid_or(&self, default: GridSpec) -> GridSpec {
        self.grid.unwrap_or(default)
    }
}
