//! Versioned text checkpoints.
//!
//! ```text
//! qultsf-checkpoint 1
//! kind qultsf
//! meta lookback 336
//! tensor input.weight 2 1024 336
//! <row-major values, whitespace separated>
//! tensor input.bias 1 1024
//! ...
//! end
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! save/load cycle is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &str = "qultsf-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let expected: usize = shape.iter().product();
        if expected != values.len() || name.split_whitespace().count() != 1 {
            return Err(Error::Checkpoint(format!(
                "tensor `{name}` has shape {shape:?} but {} values",
                values.len()
            )));
        }
        Ok(Self { name, shape, values })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub kind: String,
    pub meta: BTreeMap<String, String>,
    pub tensors: Vec<Tensor>,
}

impl Checkpoint {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            ..Self::default()
        }
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor `{name}`")))
    }

    pub fn meta_usize(&self, key: &str) -> Result<usize> {
        self.meta
            .get(key)
            .ok_or_else(|| Error::Checkpoint(format!("missing meta `{key}`")))?
            .parse()
            .map_err(|_| Error::Checkpoint(format!("meta `{key}` is not an integer")))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {FORMAT_VERSION}\nkind {}\n", self.kind);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta {k} {v}");
        }
        for t in &self.tensors {
            let _ = write!(out, "tensor {} {}", t.name, t.shape.len());
            for d in &t.shape {
                let _ = write!(out, " {d}");
            }
            out.push('\n');
            let row = t.shape.last().copied().unwrap_or(1).max(1);
            for chunk in t.values.chunks(row) {
                let line: Vec<String> = chunk.iter().map(|v| format!("{v:?}")).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Checkpoint(m);
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| tokens.next().ok_or_else(|| bad(format!("unexpected end of file, wanted {what}")));

        if next("magic")? != MAGIC {
            return Err(bad("not a checkpoint file".into()));
        }
        let version: u32 = next("version")?.parse().map_err(|_| bad("bad version".into()))?;
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let mut ckpt = Checkpoint::default();
        loop {
            match next("section")? {
                "kind" => ckpt.kind = next("kind")?.to_string(),
                "meta" => {
                    let k = next("meta key")?.to_string();
                    let v = next("meta value")?.to_string();
                    ckpt.meta.insert(k, v);
                }
                "tensor" => {
                    let name = next("tensor name")?.to_string();
                    let rank: usize = next("rank")?.parse().map_err(|_| bad(format!("bad rank for `{name}`")))?;
                    let shape = (0..rank)
                        .map(|_| next("dimension")?.parse().map_err(|_| bad(format!("bad dimension for `{name}`"))))
                        .collect::<Result<Vec<usize>>>()?;
                    let len: usize = shape.iter().product();
                    let values = (0..len)
                        .map(|_| next("value")?.parse().map_err(|_| bad(format!("bad value in `{name}`"))))
                        .collect::<Result<Vec<f64>>>()?;
                    ckpt.tensors.push(Tensor { name, shape, values });
                }
                "end" => break,
                other => return Err(bad(format!("unexpected token `{other}`"))),
            }
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }
}
