//! Text and JSON encodings of coins, circuits, rational functions and
//! count records.
//!
//! Complex numbers are written as `{"re": x, "im": y}`; the point at
//! infinity is the string `"inf"`. On input the inline syntax (`"1+2i"`,
//! `"-i"`, `"0.5"`, `"inf"`), bare JSON numbers and `{"a": .., "b": ..}`
//! coin pairs are accepted as well.

use num_complex::Complex64;
use qqbf_core::chain::{BlockCircuit, BlockKind, Node, WireRef};
use qqbf_core::compiler::RationalFunction;
use qqbf_core::estimation::{CountRecord, PauliBasis};
use qqbf_core::{Coin, Extended, Mat2, ProductBranch, SumBranch};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot parse {0:?} as a complex number")]
    Complex(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Circuit(#[from] qqbf_core::CircuitError),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// Parses `x`, `yi`, `x+yi`, `x-yi`, `i`, `-i` and `inf`/`∞`. `j` is
/// accepted in place of `i`.
pub fn parse_extended(text: &str) -> Result<Extended, FormatError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || FormatError::Complex(text.to_string());
    let lower = s.to_ascii_lowercase();
    if matches!(lower.as_str(), "inf" | "+inf" | "infinity" | "∞") {
        return Ok(Extended::Infinity);
    }
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = lower.strip_suffix('i').or_else(|| lower.strip_suffix('j')) else {
        let re: f64 = lower.parse().map_err(|_| err())?;
        return finite(re, 0.0).ok_or_else(err);
    };
    // The real/imaginary split is the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && bytes[k - 1] != b'e');
    let (re_text, im_text) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().map_err(|_| err())?,
    };
    let re: f64 = re_text.parse().map_err(|_| err())?;
    finite(re, im).ok_or_else(err)
}

fn finite(re: f64, im: f64) -> Option<Extended> {
    (re.is_finite() && im.is_finite()).then(|| Extended::Finite(Complex64::new(re, im)))
}

/// A complex value as it may appear in JSON input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Number(f64),
    Text(String),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl ComplexRepr {
    pub fn to_extended(&self) -> Result<Extended, FormatError> {
        match self {
            ComplexRepr::Number(x) => {
                finite(*x, 0.0).ok_or_else(|| invalid("number must be finite"))
            }
            ComplexRepr::Text(t) => parse_extended(t),
            ComplexRepr::Parts { re, im } => {
                finite(*re, *im).ok_or_else(|| invalid("complex parts must be finite"))
            }
        }
    }

    fn to_finite(&self) -> Result<Complex64, FormatError> {
        self.to_extended()?
            .finite()
            .ok_or_else(|| invalid("coefficient must be finite"))
    }
}

/// A coin: either a point of the extended plane or an amplitude pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoinRepr {
    Pair { a: ComplexRepr, b: ComplexRepr },
    Value(ComplexRepr),
}

impl CoinRepr {
    pub fn to_coin(&self) -> Result<Coin, FormatError> {
        match self {
            CoinRepr::Value(v) => Ok(Coin::from(v.to_extended()?)),
            CoinRepr::Pair { a, b } => {
                Coin::new(a.to_finite()?, b.to_finite()?).map_err(|e| invalid(e.to_string()))
            }
        }
    }
}

/// Inline syntax first, JSON as the fallback.
pub fn parse_coin(text: &str) -> Result<Coin, FormatError> {
    match parse_extended(text) {
        Ok(z) => Ok(Coin::from(z)),
        Err(inline) => match serde_json::from_str::<CoinRepr>(text) {
            Ok(repr) => repr.to_coin(),
            Err(_) => Err(inline),
        },
    }
}

/// Comma-separated coefficient list, e.g. `-1,0,1` or `1+i,2`.
pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>, FormatError> {
    text.split(',')
        .map(|item| {
            parse_extended(item)?
                .finite()
                .ok_or_else(|| invalid("coefficient must be finite"))
        })
        .collect()
}

pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn extended_json(z: Extended) -> Value {
    match z {
        Extended::Finite(z) => complex_json(z),
        Extended::Infinity => Value::String("inf".into()),
    }
}

pub fn coin_pair_json(c: &Coin) -> Value {
    json!({ "a": complex_json(c.a()), "b": complex_json(c.b()) })
}

pub fn matrix_json(m: &Mat2) -> Value {
    json!([
        [complex_json(m.get(0, 0)), complex_json(m.get(0, 1))],
        [complex_json(m.get(1, 0)), complex_json(m.get(1, 1))],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireRepr {
    Data(usize),
    Reg(usize),
    Node(usize),
}

impl From<WireRepr> for WireRef {
    fn from(w: WireRepr) -> Self {
        match w {
            WireRepr::Data(i) => WireRef::Data(i),
            WireRepr::Reg(i) => WireRef::Reg(i),
            WireRepr::Node(i) => WireRef::Node(i),
        }
    }
}

impl From<WireRef> for WireRepr {
    fn from(w: WireRef) -> Self {
        match w {
            WireRef::Data(i) => WireRepr::Data(i),
            WireRef::Reg(i) => WireRepr::Reg(i),
            WireRef::Node(i) => WireRepr::Node(i),
        }
    }
}

/// A bare index names a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputRepr {
    Node(usize),
    Wire(WireRepr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRepr {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(rename = "in")]
    pub inputs: Vec<WireRepr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRepr {
    pub data_inputs: usize,
    #[serde(default)]
    pub registers: Vec<CoinRepr>,
    pub nodes: Vec<NodeRepr>,
    pub output: OutputRepr,
}

pub fn parse_product_branch(text: &str) -> Result<ProductBranch, FormatError> {
    match text.to_ascii_lowercase().as_str() {
        "plus" | "+" | "p" => Ok(ProductBranch::Plus),
        "minus" | "-" | "m" => Ok(ProductBranch::Minus),
        _ => Err(invalid(format!(
            "unknown product branch {text:?} (plus or minus)"
        ))),
    }
}

pub fn parse_sum_branch(text: &str) -> Result<SumBranch, FormatError> {
    match text.to_ascii_lowercase().as_str() {
        "s" => Ok(SumBranch::S),
        "i" => Ok(SumBranch::I),
        _ => Err(invalid(format!("unknown sum branch {text:?} (S or I)"))),
    }
}

/// Resolves an operation name plus optional branch. `antiproduct` and
/// `harmonic` carry their branch in the name; an explicit branch must
/// then agree with it.
pub fn parse_block_kind(op: &str, branch: Option<&str>) -> Result<BlockKind, FormatError> {
    let kind = match (op.to_ascii_lowercase().as_str(), branch) {
        ("invert", None) => BlockKind::Invert,
        ("invert", Some(b)) => return Err(invalid(format!("invert takes no branch, got {b:?}"))),
        ("product", b) => {
            BlockKind::Product(b.map_or(Ok(ProductBranch::Plus), parse_product_branch)?)
        }
        ("antiproduct", b) => {
            if b.is_some_and(|b| parse_product_branch(b).ok() != Some(ProductBranch::Minus)) {
                return Err(invalid("antiproduct is the minus branch"));
            }
            BlockKind::Product(ProductBranch::Minus)
        }
        ("sum", b) => BlockKind::Sum(b.map_or(Ok(SumBranch::S), parse_sum_branch)?),
        ("harmonic", b) => {
            if b.is_some_and(|b| parse_sum_branch(b).ok() != Some(SumBranch::I)) {
                return Err(invalid("harmonic is the I branch"));
            }
            BlockKind::Sum(SumBranch::I)
        }
        (other, _) => return Err(invalid(format!("unknown operation {other:?}"))),
    };
    Ok(kind)
}

fn node_repr(node: &Node) -> NodeRepr {
    let (op, branch) = match node.kind {
        BlockKind::Invert => ("invert", None),
        BlockKind::Product(ProductBranch::Plus) => ("product", Some("plus")),
        BlockKind::Product(ProductBranch::Minus) => ("product", Some("minus")),
        BlockKind::Sum(SumBranch::S) => ("sum", Some("S")),
        BlockKind::Sum(SumBranch::I) => ("sum", Some("I")),
    };
    NodeRepr {
        op: op.into(),
        branch: branch.map(Into::into),
        inputs: node.inputs.iter().map(|w| WireRepr::from(*w)).collect(),
    }
}

impl CircuitRepr {
    pub fn from_circuit(c: &BlockCircuit) -> Self {
        CircuitRepr {
            data_inputs: c.n_data_inputs(),
            registers: c
                .registers()
                .iter()
                .map(|r| CoinRepr::Value(extended_repr(r.value())))
                .collect(),
            nodes: c.nodes().iter().map(node_repr).collect(),
            output: match c.output() {
                WireRef::Node(i) => OutputRepr::Node(i),
                w => OutputRepr::Wire(w.into()),
            },
        }
    }

    pub fn to_circuit(&self) -> Result<BlockCircuit, FormatError> {
        let registers = self
            .registers
            .iter()
            .map(CoinRepr::to_coin)
            .collect::<Result<Vec<_>, _>>()?;
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let kind = parse_block_kind(&n.op, n.branch.as_deref())?;
                Ok(Node::new(
                    kind,
                    n.inputs.iter().map(|w| (*w).into()).collect(),
                ))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let output = match self.output {
            OutputRepr::Node(i) => WireRef::Node(i),
            OutputRepr::Wire(w) => w.into(),
        };
        Ok(BlockCircuit::new(
            self.data_inputs,
            registers,
            nodes,
            output,
        )?)
    }
}

fn extended_repr(z: Extended) -> ComplexRepr {
    match z {
        Extended::Finite(z) => ComplexRepr::Parts { re: z.re, im: z.im },
        Extended::Infinity => ComplexRepr::Text("inf".into()),
    }
}

pub fn circuit_json(c: &BlockCircuit) -> Value {
    serde_json::to_value(CircuitRepr::from_circuit(c)).expect("circuit serializes")
}

/// Reads a circuit file. A compilation report is accepted too: its
/// `circuit` member is used.
pub fn parse_circuit(text: &str) -> Result<BlockCircuit, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let inner = match value.get("circuit") {
        Some(c) if value.get("nodes").is_none() => c.clone(),
        _ => value,
    };
    serde_json::from_value::<CircuitRepr>(inner)?.to_circuit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Coefficients {
        num: Vec<ComplexRepr>,
        den: Vec<ComplexRepr>,
    },
    Factored {
        c0: ComplexRepr,
        #[serde(default)]
        zeros: Vec<ComplexRepr>,
        #[serde(default)]
        poles: Vec<ComplexRepr>,
    },
}

impl RationalRepr {
    pub fn to_function(&self) -> Result<RationalFunction, FormatError> {
        let list = |v: &[ComplexRepr]| {
            v.iter()
                .map(ComplexRepr::to_finite)
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(match self {
            RationalRepr::Coefficients { num, den } => RationalFunction::Coefficients {
                num: list(num)?,
                den: list(den)?,
            },
            RationalRepr::Factored { c0, zeros, poles } => RationalFunction::Factored {
                c0: c0.to_finite()?,
                zeros: list(zeros)?,
                poles: list(poles)?,
            },
        })
    }
}

pub fn parse_rational(text: &str) -> Result<RationalFunction, FormatError> {
    serde_json::from_str::<RationalRepr>(text)?.to_function()
}

/// `{"X": [n+, n-], "Y": .., "Z": .., "shots": s}`; absent bases are
/// omitted.
pub fn counts_json(rec: &CountRecord) -> Value {
    let mut map = serde_json::Map::new();
    for b in PauliBasis::ALL {
        if let Some(c) = rec.get(b) {
            map.insert(b.name().into(), json!(c));
        }
    }
    map.insert("shots".into(), json!(rec.shots));
    Value::Object(map)
}

pub fn parse_counts(text: &str) -> Result<CountRecord, FormatError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Repr {
        #[serde(rename = "X")]
        x: Option<[u64; 2]>,
        #[serde(rename = "Y")]
        y: Option<[u64; 2]>,
        #[serde(rename = "Z")]
        z: Option<[u64; 2]>,
        shots: u64,
    }
    let r: Repr = serde_json::from_str(text)?;
    Ok(CountRecord {
        counts: [r.x, r.y, r.z],
        shots: r.shots,
    })
}

/// One experiment row: a single coin (broadcast to every data input) or
/// an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputRow {
    Many(Vec<CoinRepr>),
    One(CoinRepr),
}

impl InputRow {
    pub fn coins(&self) -> Result<Vec<Coin>, FormatError> {
        match self {
            InputRow::One(c) => Ok(vec![c.to_coin()?]),
            InputRow::Many(cs) => cs.iter().map(CoinRepr::to_coin).collect(),
        }
    }
}

/// A JSON array of rows, or one row per non-empty line (JSON or inline
/// syntax, so the output of `sample` can be fed back directly).
pub fn parse_inputs(text: &str) -> Result<Vec<Result<Vec<Coin>, FormatError>>, FormatError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        if let Ok(rows) = serde_json::from_str::<Vec<InputRow>>(text) {
            return Ok(rows.iter().map(InputRow::coins).collect());
        }
    }
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| match serde_json::from_str::<InputRow>(line) {
            Ok(row) => row.coins(),
            Err(_) => parse_coin(line).map(|c| vec![c]),
        })
        .collect())
}
