//! Dataset files and CSV output.
//!
//! A dataset file is UTF-8 text:
//!
//! ```text
//! regparam-dataset v1
//! model <name> key=value ...
//! operator identity <d>
//! operator dense <rows> <cols>        followed by <rows> lines of <cols> numbers
//! operator convolution <d> <origin>   followed by one line with the <d> kernel taps
//! pairs <n> <ydim> <xdim>
//! y <ydim numbers>                    <n> times, each followed by
//! x <xdim numbers>
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::operators::{ConvolutionOperator, DenseOperator, ForwardOperator, LinearOperator};
use crate::param_select::TrainingSet;

use super::data::{DataModel, ImageSource};

pub const DATASET_HEADER: &str = "regparam-dataset v1";

#[derive(Debug, Clone)]
pub struct Dataset {
    pub model: DataModel,
    pub operator: ForwardOperator,
    pub data: TrainingSet,
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").expect("string write");
    }
    s
}

fn model_line(model: &DataModel) -> Result<String> {
    Ok(match model {
        DataModel::SpectralSource { d, s, tau, operator_seed } => {
            format!("model spectral d={d} s={s} tau={tau} operator-seed={operator_seed}")
        }
        DataModel::SparseDenoise { d, sparsity, tau } => {
            format!("model denoise d={d} sparsity={sparsity} tau={tau}")
        }
        DataModel::SparseDeblur { d, sparsity, tau } => {
            format!("model deblur d={d} sparsity={sparsity} tau={tau}")
        }
        DataModel::TvImages { source, tau } => match source {
            ImageSource::Synthetic { side } => format!("model tv tau={tau} synthetic={side}"),
            ImageSource::Idx(p) => {
                let path = p.to_str().ok_or_else(|| invalid("image path is not UTF-8"))?;
                if path.chars().any(char::is_whitespace) {
                    return Err(invalid("image path must not contain whitespace"));
                }
                format!("model tv tau={tau} idx={path}")
            }
        },
    })
}

pub fn dataset_to_string(ds: &Dataset) -> Result<String> {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(DATASET_HEADER.to_string());
    line(model_line(&ds.model)?);
    match &ds.operator {
        ForwardOperator::Identity(op) => line(format!("operator identity {}", op.input_dim())),
        ForwardOperator::Dense(op) => {
            let m = op.matrix();
            line(format!("operator dense {} {}", m.nrows(), m.ncols()));
            for r in 0..m.nrows() {
                line(join(m.row(r).iter().copied()));
            }
        }
        ForwardOperator::Convolution(op) => {
            line(format!("operator convolution {} {}", op.input_dim(), op.origin()));
            line(join(op.kernel().iter().copied()));
        }
    }
    line(format!(
        "pairs {} {} {}",
        ds.data.len(),
        ds.data.observation_dim(),
        ds.data.signal_dim()
    ));
    for (y, x) in ds.data.pairs() {
        line(format!("y {}", join(y.iter().copied())));
        line(format!("x {}", join(x.iter().copied())));
    }
    Ok(out)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (i, l) = self.inner.next().ok_or(Error::Parse {
            line: self.current + 1,
            message: "unexpected end of file".into(),
        })?;
        self.current = i + 1;
        Ok(l)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.current,
            message: message.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number {s:?}")))
    }

    fn vector(&self, s: &str, len: usize) -> Result<DVector<f64>> {
        let v = s
            .split_ascii_whitespace()
            .map(|t| self.num::<f64>(t))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != len {
            return Err(self.err(format!("expected {len} values, found {}", v.len())));
        }
        Ok(DVector::from_vec(v))
    }

    fn tagged(&mut self, tag: &str) -> Result<&'a str> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((t, rest)) if t == tag => Ok(rest),
            None if l == tag => Ok(""),
            _ => Err(self.err(format!("expected a {tag:?} line"))),
        }
    }
}

fn parse_model(lines: &Lines, rest: &str) -> Result<DataModel> {
    let mut tokens = rest.split_ascii_whitespace();
    let name = tokens.next().ok_or_else(|| lines.err("missing model name"))?;
    let mut kv = std::collections::BTreeMap::new();
    for t in tokens {
        let (k, v) = t.split_once('=').ok_or_else(|| lines.err(format!("bad field {t:?}")))?;
        kv.insert(k, v);
    }
    let field = |k: &str| kv.get(k).copied().ok_or_else(|| lines.err(format!("missing field {k:?}")));
    Ok(match name {
        "spectral" => DataModel::SpectralSource {
            d: lines.num(field("d")?)?,
            s: lines.num(field("s")?)?,
            tau: lines.num(field("tau")?)?,
            operator_seed: lines.num(field("operator-seed")?)?,
        },
        "denoise" => DataModel::SparseDenoise {
            d: lines.num(field("d")?)?,
            sparsity: lines.num(field("sparsity")?)?,
            tau: lines.num(field("tau")?)?,
        },
        "deblur" => DataModel::SparseDeblur {
            d: lines.num(field("d")?)?,
            sparsity: lines.num(field("sparsity")?)?,
            tau: lines.num(field("tau")?)?,
        },
        "tv" => {
            let source = match (kv.get("synthetic"), kv.get("idx")) {
                (Some(side), None) => ImageSource::Synthetic { side: lines.num(side)? },
                (None, Some(p)) => ImageSource::Idx(PathBuf::from(p)),
                _ => return Err(lines.err("tv model needs exactly one of synthetic= or idx=")),
            };
            DataModel::TvImages {
                source,
                tau: lines.num(field("tau")?)?,
            }
        }
        other => return Err(lines.err(format!("unknown model {other:?}"))),
    })
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        current: 0,
    };
    if lines.next()? != DATASET_HEADER {
        return Err(lines.err(format!("expected header {DATASET_HEADER:?}")));
    }
    let rest = lines.tagged("model")?;
    let model = parse_model(&lines, rest)?;

    let rest = lines.tagged("operator")?;
    let parts: Vec<&str> = rest.split_ascii_whitespace().collect();
    let operator = match parts.as_slice() {
        ["identity", d] => ForwardOperator::identity(lines.num(d)?),
        ["dense", r, c] => {
            let (r, c): (usize, usize) = (lines.num(r)?, lines.num(c)?);
            let mut m = DMatrix::zeros(r, c);
            for i in 0..r {
                let row = lines.next()?;
                let v = lines.vector(row, c)?;
                m.set_row(i, &v.transpose());
            }
            ForwardOperator::Dense(DenseOperator::new(m))
        }
        ["convolution", d, origin] => {
            let (d, origin): (usize, usize) = (lines.num(d)?, lines.num(origin)?);
            let row = lines.next()?;
            let kernel = lines.vector(row, d)?;
            ForwardOperator::Convolution(ConvolutionOperator::with_origin(kernel, origin)?)
        }
        _ => return Err(lines.err("unknown operator descriptor")),
    };

    let rest = lines.tagged("pairs")?;
    let parts: Vec<&str> = rest.split_ascii_whitespace().collect();
    let [n, ny, nx] = parts.as_slice() else {
        return Err(lines.err("pairs line needs <n> <ydim> <xdim>"));
    };
    let (n, ny, nx): (usize, usize, usize) = (lines.num(n)?, lines.num(ny)?, lines.num(nx)?);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let y = lines.tagged("y")?;
        let y = lines.vector(y, ny)?;
        let x = lines.tagged("x")?;
        let x = lines.vector(x, nx)?;
        pairs.push((y, x));
    }
    if operator.output_dim() != ny || operator.input_dim() != nx {
        return Err(invalid("pair dimensions do not match the operator"));
    }
    Ok(Dataset {
        model,
        operator,
        data: TrainingSet::new(pairs)?,
    })
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    fs::write(path, dataset_to_string(ds)?)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&fs::read_to_string(path)?)
}

/// CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Formats a value as a CSV cell.
#[macro_export]
#[doc(hidden)]
macro_rules! cells {
    ($($v:expr),* $(,)?) => { vec![$(format!("{}", $v)),*] };
}
