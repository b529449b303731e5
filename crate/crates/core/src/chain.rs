//! Block circuits: wiring, ideal propagation, the closed-form V model for
//! two-stage chains, and the programmable linear device.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::blocks::{
    self, finish, invert, mean_vector_of, product_coin, product_success_prob, sum_coin,
    sum_success_prob, unit, BlockOutcome, Outcome, ProductBranch, SumBranch,
};
use crate::coin::{Coin, Extended};
use crate::density::Mat2;
use crate::error::{CircuitError, Indefinite};
use crate::numeric::Visibility;

/// A photon wire: a data input, a program register or a node output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WireRef {
    Data(usize),
    Reg(usize),
    Node(usize),
}

impl fmt::Display for WireRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireRef::Data(i) => write!(f, "data[{i}]"),
            WireRef::Reg(i) => write!(f, "reg[{i}]"),
            WireRef::Node(i) => write!(f, "node[{i}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Invert,
    Product(ProductBranch),
    Sum(SumBranch),
}

impl BlockKind {
    pub fn arity(self) -> usize {
        match self {
            BlockKind::Invert => 1,
            _ => 2,
        }
    }

    /// Operation name used in circuit files.
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::Invert => "invert",
            BlockKind::Product(ProductBranch::Plus) => "product",
            BlockKind::Product(ProductBranch::Minus) => "antiproduct",
            BlockKind::Sum(SumBranch::S) => "sum",
            BlockKind::Sum(SumBranch::I) => "harmonic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: BlockKind,
    pub inputs: Vec<WireRef>,
}

impl Node {
    pub fn new(kind: BlockKind, inputs: Vec<WireRef>) -> Self {
        Node { kind, inputs }
    }
}

/// A validated block network.
///
/// Nodes are stored in topological order: a node may only read data
/// inputs, registers and earlier nodes. Each wire carries one photon, so it
/// is consumed at most once, and every node output is consumed by a later
/// node or is the circuit output. Data inputs and registers are handled
/// identically by every evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCircuit {
    n_data_inputs: usize,
    registers: Vec<Coin>,
    nodes: Vec<Node>,
    output: WireRef,
}

impl BlockCircuit {
    pub fn new(
        n_data_inputs: usize,
        registers: Vec<Coin>,
        nodes: Vec<Node>,
        output: WireRef,
    ) -> Result<Self, CircuitError> {
        let c = BlockCircuit {
            n_data_inputs,
            registers,
            nodes,
            output,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), CircuitError> {
        let mut used: Vec<WireRef> = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.inputs.len() != node.kind.arity() {
                return Err(CircuitError::NodeArity {
                    node: i,
                    kind: node.kind.name(),
                    expected: node.kind.arity(),
                    got: node.inputs.len(),
                });
            }
            for w in &node.inputs {
                if !self.wire_exists(*w, i) {
                    return Err(CircuitError::DanglingWire {
                        node: i,
                        wire: format!("{w}"),
                    });
                }
                if used.contains(w) {
                    return Err(CircuitError::WireReused(format!("{w}")));
                }
                used.push(*w);
            }
        }
        if !self.wire_exists(self.output, self.nodes.len()) {
            return Err(CircuitError::BadOutput(format!("{}", self.output)));
        }
        if used.contains(&self.output) {
            return Err(CircuitError::WireReused(format!("{}", self.output)));
        }
        used.push(self.output);
        for i in 0..self.nodes.len() {
            if !used.contains(&WireRef::Node(i)) {
                return Err(CircuitError::UnusedNode(i));
            }
        }
        Ok(())
    }

    fn wire_exists(&self, w: WireRef, before_node: usize) -> bool {
        match w {
            WireRef::Data(j) => j < self.n_data_inputs,
            WireRef::Reg(j) => j < self.registers.len(),
            WireRef::Node(j) => j < before_node,
        }
    }

    pub fn n_data_inputs(&self) -> usize {
        self.n_data_inputs
    }

    pub fn registers(&self) -> &[Coin] {
        &self.registers
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn output(&self) -> WireRef {
        self.output
    }

    /// Number of heralded blocks (products and means); inversions are free.
    pub fn op_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind != BlockKind::Invert)
            .count()
    }

    /// Data inputs and registers that actually feed the network, in
    /// data-then-register order.
    pub fn used_sources(&self) -> Vec<WireRef> {
        let mut all: Vec<WireRef> = self
            .nodes
            .iter()
            .flat_map(|n| n.inputs.iter().copied())
            .chain(core::iter::once(self.output))
            .filter(|w| !matches!(w, WireRef::Node(_)))
            .collect();
        all.sort();
        all
    }

    pub fn photon_count(&self) -> usize {
        self.used_sources().len()
    }

    pub(crate) fn source_coin(&self, w: WireRef, data: &[Coin]) -> Coin {
        match w {
            WireRef::Data(j) => data[j],
            WireRef::Reg(j) => self.registers[j],
            WireRef::Node(_) => unreachable!("not a source wire"),
        }
    }

    pub(crate) fn check_data(&self, data: &[Coin]) -> Result<(), CircuitError> {
        if data.len() != self.n_data_inputs {
            return Err(CircuitError::DataArity {
                expected: self.n_data_inputs,
                got: data.len(),
            });
        }
        Ok(())
    }
}

/// Ideal (V = 1) result of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealEvaluation {
    Defined {
        coin: Coin,
        success_prob: f64,
    },
    /// Some node hit a critical point; the overall probability is 0.
    Indefinite {
        node: usize,
        point: String,
    },
}

impl IdealEvaluation {
    pub fn success_prob(&self) -> f64 {
        match self {
            IdealEvaluation::Defined { success_prob, .. } => *success_prob,
            IdealEvaluation::Indefinite { .. } => 0.0,
        }
    }

    pub fn coin(&self) -> Option<Coin> {
        match self {
            IdealEvaluation::Defined { coin, .. } => Some(*coin),
            IdealEvaluation::Indefinite { .. } => None,
        }
    }
}

/// Propagates ideal coins node by node; the success probability is the
/// product of the per-node heralding probabilities at the actual inputs.
pub fn evaluate_ideal(
    circuit: &BlockCircuit,
    data: &[Coin],
) -> Result<IdealEvaluation, CircuitError> {
    circuit.check_data(data)?;
    let mut values: Vec<Coin> = Vec::with_capacity(circuit.nodes.len());
    let mut prob = 1.0;
    let wire = |w: WireRef, values: &[Coin]| match w {
        WireRef::Node(j) => values[j],
        src => circuit.source_coin(src, data),
    };
    for (i, node) in circuit.nodes.iter().enumerate() {
        let x = wire(node.inputs[0], &values);
        let (coin, p) = match node.kind {
            BlockKind::Invert => (Some(invert(&x)), 1.0),
            BlockKind::Product(br) => {
                let y = wire(node.inputs[1], &values);
                (product_coin(&x, &y, br), product_success_prob(&x, &y))
            }
            BlockKind::Sum(br) => {
                let y = wire(node.inputs[1], &values);
                (sum_coin(&x, &y, br), sum_success_prob(&x, &y, br))
            }
        };
        match coin {
            Some(c) => {
                values.push(c);
                prob *= p;
            }
            None => {
                let y = node.inputs.get(1).map(|w| wire(*w, &values));
                let point = match y {
                    Some(y) => blocks::critical_point(node.kind.name(), &x, &y),
                    None => format!("{} of {}", node.kind.name(), x.value()),
                };
                return Ok(IdealEvaluation::Indefinite { node: i, point });
            }
        }
    }
    Ok(IdealEvaluation::Defined {
        coin: wire(circuit.output, &values),
        success_prob: prob,
    })
}

/// End-to-end success probability with every data input fed the same coin.
pub fn circuit_cost(circuit: &BlockCircuit, z: &Coin) -> f64 {
    let data = vec![*z; circuit.n_data_inputs];
    evaluate_ideal(circuit, &data).map_or(0.0, |e| e.success_prob())
}

/// The four two-stage concatenations: a mean block whose output enters a
/// product block together with a third coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainCombo {
    /// sum, then product
    SP,
    /// harmonic mean, then product
    MP,
    /// sum, then antiproduct
    SA,
    /// harmonic mean, then antiproduct
    MA,
}

impl ChainCombo {
    pub const ALL: [ChainCombo; 4] = [
        ChainCombo::SP,
        ChainCombo::MP,
        ChainCombo::SA,
        ChainCombo::MA,
    ];

    pub fn sum_branch(self) -> SumBranch {
        match self {
            ChainCombo::SP | ChainCombo::SA => SumBranch::S,
            ChainCombo::MP | ChainCombo::MA => SumBranch::I,
        }
    }

    pub fn product_branch(self) -> ProductBranch {
        match self {
            ChainCombo::SP | ChainCombo::MP => ProductBranch::Plus,
            ChainCombo::SA | ChainCombo::MA => ProductBranch::Minus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChainCombo::SP => "SP",
            ChainCombo::MP => "MP",
            ChainCombo::SA => "SA",
            ChainCombo::MA => "MA",
        }
    }

    /// Three data inputs: `mean(z₁, z₂)`, then product with `z₃`.
    pub fn circuit(self) -> BlockCircuit {
        BlockCircuit::new(
            3,
            Vec::new(),
            vec![
                Node::new(
                    BlockKind::Sum(self.sum_branch()),
                    vec![WireRef::Data(0), WireRef::Data(1)],
                ),
                Node::new(
                    BlockKind::Product(self.product_branch()),
                    vec![WireRef::Node(0), WireRef::Data(2)],
                ),
            ],
            WireRef::Node(1),
        )
        .expect("fixed two-stage circuit is valid")
    }
}

/// `P_stage2(mean(z₁, z₂), z₃) · P_stage1(z₁, z₂)`; zero where the mean is
/// indefinite.
pub fn concat3_success_prob(z1: &Coin, z2: &Coin, z3: &Coin, combo: ChainCombo) -> f64 {
    match sum_coin(z1, z2, combo.sum_branch()) {
        Some(w) => product_success_prob(&w, z3) * sum_success_prob(z1, z2, combo.sum_branch()),
        None => 0.0,
    }
}

/// Three-photon output of a mean block followed by a product with `z₃`,
/// weighted by its post-selection probability.
///
/// With `w` the ideal mean vector, `v = (a₃w_a, ±b₃w_b)`, `α = |s(u₁)|²`,
/// `β = |s(u₂)|²`:
///
/// - diagonal: `V|vᵢ|² + (1−V)Mᵢ` with
///   `M = (|a₃|²(α|a₂|² + β|a₁|²), |b₃|²(α|b₂|² + β|b₁|²))`;
/// - coherence: `±(V + V^{3/2})/2 · a₃w_a (b₃w_b)*`;
///
/// all over `32` for unit input vectors.
pub fn chain3_matrix(
    z1: &Coin,
    z2: &Coin,
    sum_branch: SumBranch,
    z3: &Coin,
    product_branch: ProductBranch,
    v: Visibility,
) -> Mat2 {
    let (wa, wb) = mean_vector_of(z1, z2, sum_branch);
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    let (a3, b3) = unit(z3);
    let alpha = sum_branch.trigger_amplitude(z1).norm_sqr() / z1.norm_sqr();
    let beta = sum_branch.trigger_amplitude(z2).norm_sqr() / z2.norm_sqr();
    let v = v.get();
    let top = a3 * wa;
    let bottom = b3 * wb;
    let m0 = a3.norm_sqr() * (alpha * a2.norm_sqr() + beta * a1.norm_sqr());
    let m1 = b3.norm_sqr() * (alpha * b2.norm_sqr() + beta * b1.norm_sqr());
    let coherence = 0.5 * (v + v * v.sqrt()) * product_branch.sign();
    Mat2::hermitian(
        v * top.norm_sqr() + (1.0 - v) * m0,
        top * bottom.conj() * coherence,
        v * bottom.norm_sqr() + (1.0 - v) * m1,
    )
    .scale(1.0 / 32.0)
}

fn chain3_output(
    z1: &Coin,
    z2: &Coin,
    sum_branch: SumBranch,
    z3: &Coin,
    product_branch: ProductBranch,
    v: Visibility,
) -> Result<BlockOutcome, Indefinite> {
    let m = chain3_matrix(z1, z2, sum_branch, z3, product_branch, v);
    let mean = sum_coin(z1, z2, sum_branch);
    let ideal = mean.and_then(|w| product_coin(&w, z3, product_branch));
    finish(m, ideal, || match mean {
        None => blocks::critical_point("mean", z1, z2),
        Some(w) => blocks::critical_point("product", &w, z3),
    })
}

/// V-corrected output of a two-stage concatenation.
pub fn concat3_output(
    z1: &Coin,
    z2: &Coin,
    z3: &Coin,
    combo: ChainCombo,
    v: Visibility,
) -> Result<BlockOutcome, Indefinite> {
    chain3_output(z1, z2, combo.sum_branch(), z3, combo.product_branch(), v)
}

enum Stage {
    Pure(Coin),
    Mean(Coin, Coin, SumBranch),
}

/// Closed-form evaluation with partial distinguishability.
///
/// At `V = 1` every circuit is covered by ideal propagation. Below that,
/// the covered shapes are a single block or a mean→product chain, with
/// inversions allowed on source wires and on the final output.
pub fn evaluate(
    circuit: &BlockCircuit,
    data: &[Coin],
    v: Visibility,
) -> Result<Outcome, CircuitError> {
    circuit.check_data(data)?;
    if v == Visibility::ONE {
        return Ok(match evaluate_ideal(circuit, data)? {
            IdealEvaluation::Defined { coin, success_prob } => Outcome::Heralded(BlockOutcome {
                state: coin.density(),
                success_prob,
                ideal: coin,
            }),
            IdealEvaluation::Indefinite { .. } => Outcome::Indefinite,
        });
    }

    let mut flips = 0usize;
    let mut top = circuit.output;
    while let WireRef::Node(i) = top {
        let node = &circuit.nodes[i];
        if node.kind != BlockKind::Invert {
            break;
        }
        flips += 1;
        top = node.inputs[0];
    }

    let stage = |w: WireRef, allow_mean: bool| -> Option<Stage> {
        let mut w = w;
        let mut flips = 0;
        loop {
            match w {
                WireRef::Node(i) => {
                    let node = &circuit.nodes[i];
                    match node.kind {
                        BlockKind::Invert => {
                            flips += 1;
                            w = node.inputs[0];
                        }
                        BlockKind::Sum(br) if allow_mean && flips == 0 => {
                            let x = pure_wire(circuit, data, node.inputs[0])?;
                            let y = pure_wire(circuit, data, node.inputs[1])?;
                            return Some(Stage::Mean(x, y, br));
                        }
                        _ => return None,
                    }
                }
                src => {
                    let c = circuit.source_coin(src, data);
                    return Some(Stage::Pure(if flips % 2 == 1 { invert(&c) } else { c }));
                }
            }
        }
    };

    let no_closed_form = || CircuitError::NoClosedForm(format!("output {}", circuit.output));
    let result = match top {
        WireRef::Node(i) => {
            let node = &circuit.nodes[i];
            match node.kind {
                BlockKind::Sum(br) => {
                    let x = pure_wire(circuit, data, node.inputs[0]).ok_or_else(no_closed_form)?;
                    let y = pure_wire(circuit, data, node.inputs[1]).ok_or_else(no_closed_form)?;
                    blocks::sum_output(&x, &y, br, v)
                }
                BlockKind::Product(pb) => {
                    let x = stage(node.inputs[0], true).ok_or_else(no_closed_form)?;
                    let y = stage(node.inputs[1], true).ok_or_else(no_closed_form)?;
                    match (x, y) {
                        (Stage::Pure(x), Stage::Pure(y)) => blocks::product_output(&x, &y, pb, v),
                        (Stage::Mean(x1, x2, sb), Stage::Pure(z3))
                        | (Stage::Pure(z3), Stage::Mean(x1, x2, sb)) => {
                            chain3_output(&x1, &x2, sb, &z3, pb, v)
                        }
                        _ => return Err(no_closed_form()),
                    }
                }
                BlockKind::Invert => unreachable!("inversions stripped above"),
            }
        }
        src => {
            let c = circuit.source_coin(src, data);
            Ok(BlockOutcome {
                state: c.density(),
                success_prob: 1.0,
                ideal: c,
            })
        }
    };
    Ok(match result {
        Ok(mut o) => {
            if flips % 2 == 1 {
                o.state = o.state.swapped();
                o.ideal = invert(&o.ideal);
            }
            Outcome::Heralded(o)
        }
        Err(_) => Outcome::Indefinite,
    })
}

fn pure_wire(circuit: &BlockCircuit, data: &[Coin], w: WireRef) -> Option<Coin> {
    let mut w = w;
    let mut flips = 0;
    loop {
        match w {
            WireRef::Node(i) => {
                let node = &circuit.nodes[i];
                if node.kind != BlockKind::Invert {
                    return None;
                }
                flips += 1;
                w = node.inputs[0];
            }
            src => {
                let c = circuit.source_coin(src, data);
                return Some(if flips % 2 == 1 { invert(&c) } else { c });
            }
        }
    }
}

fn finite_param(z: Extended, name: &'static str) -> Result<Complex64, CircuitError> {
    match z.finite() {
        Some(z) if z.re.is_finite() && z.im.is_finite() => Ok(z),
        _ => Err(CircuitError::NonFiniteParameter(name)),
    }
}

/// `g(z) = αz + β`: the mean of `z` and `β/α`, then a product with `2α`.
pub fn program_linear(alpha: Extended, beta: Extended) -> Result<BlockCircuit, CircuitError> {
    let alpha = finite_param(alpha, "alpha")?;
    let beta = finite_param(beta, "beta")?;
    if alpha == Complex64::new(0.0, 0.0) {
        return Err(CircuitError::ZeroAlpha);
    }
    BlockCircuit::new(
        1,
        vec![Coin::finite(beta / alpha), Coin::finite(alpha * 2.0)],
        vec![
            Node::new(
                BlockKind::Sum(SumBranch::S),
                vec![WireRef::Data(0), WireRef::Reg(0)],
            ),
            Node::new(
                BlockKind::Product(ProductBranch::Plus),
                vec![WireRef::Node(0), WireRef::Reg(1)],
            ),
        ],
        WireRef::Node(1),
    )
}

/// `z₁ + z₂` exactly: the arithmetic mean followed by a product with `2`.
pub fn exact_sum() -> BlockCircuit {
    BlockCircuit::new(
        2,
        vec![Coin::real(2.0)],
        vec![
            Node::new(
                BlockKind::Sum(SumBranch::S),
                vec![WireRef::Data(0), WireRef::Data(1)],
            ),
            Node::new(
                BlockKind::Product(ProductBranch::Plus),
                vec![WireRef::Node(0), WireRef::Reg(0)],
            ),
        ],
        WireRef::Node(1),
    )
    .expect("fixed circuit is valid")
}

/// The programmable two-block functions. Templates 1–4 put the mean
/// first, 5–8 the product first; `branch` selects the product sign.
///
/// | id | inputs | function |
/// |----|--------|----------|
/// | 1 | `(a, z, z)` | `(a + z)z/2` |
/// | 2 | `(z, z, a)` | `az` |
/// | 3 | `(a, b, z)` | `(a + b)z/2` |
/// | 4 | `(a, z, b)` | `(z + a)b/2` |
/// | 5 | `(a, z, z)` | `(a + 1)z/2` |
/// | 6 | `(z, z, a)` | `(z² + a)/2` |
/// | 7 | `(a, b, z)` | `(ab + z)/2` |
/// | 8 | `(a, z, b)` | `(az + b)/2` |
///
/// The first two entries of each triple feed the first block, the third
/// joins at the second block. `a` and `b` are register coins (either may
/// be `∞`); `z` marks a data input.
pub fn template_circuit(
    id: u8,
    a: Extended,
    b: Option<Extended>,
    branch: ProductBranch,
) -> Result<BlockCircuit, CircuitError> {
    use WireRef::{Data, Node as N, Reg};
    let need_b = || b.map(Coin::from).ok_or(CircuitError::MissingParameter("b"));
    let a = Coin::from(a);
    let (first_is_mean, n_data, regs, first, second) = match id {
        1 => (true, 2, vec![a], [Reg(0), Data(0)], Data(1)),
        2 => (true, 2, vec![a], [Data(0), Data(1)], Reg(0)),
        3 => (true, 1, vec![a, need_b()?], [Reg(0), Reg(1)], Data(0)),
        4 => (true, 1, vec![a, need_b()?], [Reg(0), Data(0)], Reg(1)),
        5 => (false, 2, vec![a], [Reg(0), Data(0)], Data(1)),
        6 => (false, 2, vec![a], [Data(0), Data(1)], Reg(0)),
        7 => (false, 1, vec![a, need_b()?], [Reg(0), Reg(1)], Data(0)),
        8 => (false, 1, vec![a, need_b()?], [Reg(0), Data(0)], Reg(1)),
        _ => return Err(CircuitError::UnknownTemplate(id)),
    };
    let (k1, k2) = if first_is_mean {
        (BlockKind::Sum(SumBranch::S), BlockKind::Product(branch))
    } else {
        (BlockKind::Product(branch), BlockKind::Sum(SumBranch::S))
    };
    BlockCircuit::new(
        n_data,
        regs,
        vec![
            Node::new(k1, first.to_vec()),
            Node::new(k2, vec![N(0), second]),
        ],
        N(1),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    SumProduct,
    ProductSum,
}

/// Heralding probabilities of `α₁z + α₀` in both orders:
///
/// - sum→product (`program_linear(α₁, α₀)`):
///   `(1 + |α₁z + α₀|²) / (8(1 + |z|²)(1 + |α₀/α₁|²)(1 + 4|α₁|²))`;
/// - product→sum (template 8 with `a = 2α₁`, `b = 2α₀`):
///   `(1 + |α₁z + α₀|²) / (8(1 + |z|²)(1 + 4|α₀|²)(1 + 4|α₁|²))`.
pub fn order_probabilities(alpha0: Complex64, alpha1: Complex64, z: &Coin) -> (f64, f64) {
    let (a, b) = unit(z);
    let num = b.norm_sqr() + (alpha1 * a + alpha0 * b).norm_sqr();
    let common = 8.0 * (1.0 + 4.0 * alpha1.norm_sqr());
    let sp = if alpha1.norm_sqr() == 0.0 {
        0.0
    } else {
        num / (common * (1.0 + (alpha0 / alpha1).norm_sqr()))
    };
    let ps = num / (common * (1.0 + 4.0 * alpha0.norm_sqr()));
    (sp, ps)
}

/// The order with the larger heralding probability. The two expressions
/// differ only in `1 + |α₀|²/|α₁|²` against `1 + 4|α₀|²`, so sum→product
/// wins iff `|α₁|² ≥ 1/4` (ties go to sum→product).
pub fn choose_order(_alpha0: Complex64, alpha1: Complex64) -> Order {
    if alpha1.norm_sqr() >= 0.25 {
        Order::SumProduct
    } else {
        Order::ProductSum
    }
}
