//! Versioned JSON documents and the compact cone-spec syntax
//! (`orthant:2`, `sum(lorentz:3, sympsd:2)`).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::barrier::{Barrier, SelfScaledBarrier};
use crate::decompose::DecompositionResult;
use crate::eja::{Algebra, Element, Family, StructureTensor};
use crate::error::{Error, Result};
use crate::ipm::{ConicProblem, IterationRecord, Solution, Status};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeFamily {
    Orthant,
    Lorentz,
    Sympsd,
    Sum,
}

/// Descriptor tree node. Leaves carry `param`; sums carry `children`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDescriptor {
    pub family: ConeFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ConeDescriptor>,
}

impl ConeDescriptor {
    pub fn leaf(family: ConeFamily, param: usize) -> Self {
        Self { family, param: Some(param), children: vec![] }
    }

    pub fn sum(children: Vec<ConeDescriptor>) -> Self {
        Self { family: ConeFamily::Sum, param: None, children }
    }

    pub fn build(&self) -> Result<Arc<Algebra>> {
        let param = || {
            self.param
                .filter(|&p| p > 0)
                .ok_or_else(|| Error::Input(format!("{:?} cone needs a positive integer \"param\"", self.family)))
        };
        match self.family {
            ConeFamily::Orthant => Ok(Algebra::orthant(param()?)),
            ConeFamily::Lorentz => Ok(Algebra::lorentz(param()?)),
            ConeFamily::Sympsd => Ok(Algebra::sym_psd(param()?)),
            ConeFamily::Sum => {
                if self.children.is_empty() {
                    return Err(Error::Input("sum cone needs at least one child".into()));
                }
                let kids = self.children.iter().map(Self::build).collect::<Result<Vec<_>>>()?;
                Ok(Algebra::direct_sum(kids))
            }
        }
    }

    pub fn from_algebra(alg: &Algebra) -> Result<Self> {
        match alg.family() {
            Family::Orthant(n) => Ok(Self::leaf(ConeFamily::Orthant, *n)),
            Family::Lorentz(n) => Ok(Self::leaf(ConeFamily::Lorentz, *n)),
            Family::SymPsd(k) => Ok(Self::leaf(ConeFamily::Sympsd, *k)),
            Family::Sum(c) => Ok(Self::sum(c.iter().map(|a| Self::from_algebra(a)).collect::<Result<_>>()?)),
            Family::Custom(_) => Err(Error::Input("custom algebras have no descriptor; use a tensor document".into())),
        }
    }

    /// Parses `family:param` or `sum(spec, spec, ...)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut p = SpecParser { s: spec.as_bytes(), pos: 0 };
        let d = p.node()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.error("trailing input"));
        }
        Ok(d)
    }
}

impl std::fmt::Display for ConeDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.family {
            ConeFamily::Orthant => "orthant",
            ConeFamily::Lorentz => "lorentz",
            ConeFamily::Sympsd => "sympsd",
            ConeFamily::Sum => {
                f.write_str("sum(")?;
                for (i, c) in self.children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                return f.write_str(")");
            }
        };
        write!(f, "{name}:{}", self.param.unwrap_or(0))
    }
}

struct SpecParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl SpecParser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Input(format!("cone spec: {what} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self, pred: fn(u8) -> bool) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && pred(self.s[self.pos]) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    fn node(&mut self) -> Result<ConeDescriptor> {
        let name = self.word(|c| c.is_ascii_alphabetic()).to_ascii_lowercase();
        let family = match name.as_str() {
            "orthant" => ConeFamily::Orthant,
            "lorentz" => ConeFamily::Lorentz,
            "sympsd" => ConeFamily::Sympsd,
            "sum" => ConeFamily::Sum,
            "" => return Err(self.error("expected a family name")),
            other => return Err(self.error(&format!("unknown family \"{other}\""))),
        };
        if family == ConeFamily::Sum {
            if !self.eat(b'(') {
                return Err(self.error("expected '('"));
            }
            let mut children = vec![self.node()?];
            while self.eat(b',') {
                children.push(self.node()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(ConeDescriptor::sum(children));
        }
        if !self.eat(b':') {
            return Err(self.error("expected ':'"));
        }
        let digits = self.word(|c| c.is_ascii_digit());
        let n: usize = digits.parse().map_err(|_| self.error("expected a positive integer"))?;
        if n == 0 {
            return Err(self.error("dimension must be positive"));
        }
        Ok(ConeDescriptor::leaf(family, n))
    }
}

/// Parses a document, mapping syntax and schema errors to input errors that
/// carry the line and column.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("invalid document: {e}")))
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

fn check_schema(found: u32) -> Result<()> {
    if found == SCHEMA {
        Ok(())
    } else {
        Err(Error::Input(format!("unsupported schema {found}, expected {SCHEMA}")))
    }
}

fn default_schema() -> u32 {
    SCHEMA
}

fn default_weights() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub cone: ConeDescriptor,
    #[serde(default = "default_weights")]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
    /// Columns spanning `L`, in native coordinates.
    #[serde(rename = "L", default)]
    pub l: Vec<Vec<f64>>,
    #[serde(default)]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub s0: Vec<f64>,
}

impl ProblemFile {
    pub fn barrier(&self) -> Result<SelfScaledBarrier> {
        check_schema(self.schema)?;
        SelfScaledBarrier::new(&self.cone.build()?, &self.weights, self.offset)
    }

    pub fn to_problem(&self) -> Result<ConicProblem> {
        let barrier = self.barrier()?;
        let cone = barrier.cone().clone();
        let n = cone.dim();
        for (j, c) in self.l.iter().enumerate() {
            if c.len() != n {
                return Err(Error::Dimension(format!("field \"L\": column {j} has length {}, expected {n}", c.len())));
            }
        }
        let l = DMatrix::from_fn(n, self.l.len(), |i, j| self.l[j][i]);
        let x0 = Element::from_slice(&cone, &self.x0).map_err(|e| field("x0", e))?;
        let s0 = Element::from_slice(&cone, &self.s0).map_err(|e| field("s0", e))?;
        ConicProblem::new(barrier, &l, x0, s0)
    }

    pub fn from_problem(p: &ConicProblem) -> Result<Self> {
        let l = p.subspace();
        Ok(Self {
            schema: SCHEMA,
            cone: ConeDescriptor::from_algebra(p.cone())?,
            weights: p.barrier().weights().to_vec(),
            offset: p.barrier().offset(),
            l: l.column_iter().map(|c| c.iter().copied().collect()).collect(),
            x0: p.x0().coords().iter().copied().collect(),
            s0: p.s0().coords().iter().copied().collect(),
        })
    }
}

fn field(name: &str, e: Error) -> Error {
    match e {
        Error::Dimension(m) => Error::Dimension(format!("field \"{name}\": {m}")),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub schema: u32,
    pub status: Status,
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub history: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl From<&Solution> for SolutionDoc {
    fn from(s: &Solution) -> Self {
        Self {
            schema: SCHEMA,
            status: s.status,
            objective: s.objective,
            gap: s.gap,
            iterations: s.iterations,
            primal_residual: s.primal_residual,
            dual_residual: s.dual_residual,
            x: s.x.coords().iter().copied().collect(),
            s: s.s.coords().iter().copied().collect(),
            history: s.history.clone(),
            message: s.message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDoc {
    pub schema: u32,
    #[serde(flatten)]
    pub tensor: StructureTensor,
}

impl TensorDoc {
    pub fn new(tensor: StructureTensor) -> Self {
        Self { schema: SCHEMA, tensor }
    }

    pub fn into_tensor(self) -> Result<StructureTensor> {
        check_schema(self.schema)?;
        StructureTensor::from_raw(self.tensor.dim(), self.tensor.data().to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub schema: u32,
    #[serde(flatten)]
    pub result: DecompositionResult,
}

impl DecompositionDoc {
    pub fn new(result: DecompositionResult) -> Self {
        Self { schema: SCHEMA, result }
    }
}

/// Either a cone descriptor, a problem file or a tensor document; used by
/// commands that accept any of them.
pub enum AlgebraSource {
    Cone(Arc<Algebra>, Option<SelfScaledBarrier>),
    Tensor(StructureTensor),
}

/// Interprets `input` as a cone spec string or as the text of a JSON
/// document (problem file, bare descriptor or tensor document).
pub fn read_algebra_source(input: &str) -> Result<AlgebraSource> {
    let trimmed = input.trim_start();
    if !trimmed.starts_with('{') {
        return Ok(AlgebraSource::Cone(ConeDescriptor::parse(input)?.build()?, None));
    }
    let value: serde_json::Value = from_json(input)?;
    if value.get("data").is_some() {
        let doc: TensorDoc = from_json(input)?;
        return Ok(AlgebraSource::Tensor(doc.into_tensor()?));
    }
    if value.get("cone").is_some() {
        let doc: ProblemFile = from_json(input)?;
        let b = doc.barrier()?;
        return Ok(AlgebraSource::Cone(b.cone().clone(), Some(b)));
    }
    let d: ConeDescriptor = from_json(input)?;
    Ok(AlgebraSource::Cone(d.build()?, None))
}

/// Coordinates of an element as a plain vector.
pub fn coords_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}
