//! Lowering rational functions onto block circuits.
//!
//! `f(z) = c₀ Π(z − pᵢ) / Π(z − qⱼ)` is built from linear factors. Each
//! factor `z − p` is an exact sum: the arithmetic mean of the data coin and
//! a register `−p`, times a register `2`. Numerator and denominator factors
//! are multiplied in two separate chains, the denominator chain is
//! inverted once, and the two are multiplied together. A final product
//! with `c₀` fixes the constant.
//!
//! [`fold_constants`] then removes every register product that only feeds
//! the output through products and inversions, and re-emits their combined
//! constant as a single last product. This brings the count to at most
//! `2h + 2k ≤ 4n` heralded blocks and `h + k + 1 ≤ 2n + 1` registers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::blocks::{ProductBranch, SumBranch};
use crate::chain::{BlockCircuit, BlockKind, Node, WireRef};
use crate::coin::Coin;
use crate::error::CompileError;

const MAX_ITERATIONS: usize = 500;
const STEP_TOL: f64 = 1e-14;
const RESIDUAL_TOL: f64 = 1e-8;
/// Roots closer than this (relative to `max(1, |r|)`) are treated as
/// common to numerator and denominator.
pub const CANCEL_TOL: f64 = 1e-7;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `p(z)` for ascending coefficients.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(zero(), |acc, c| acc * z + c)
}

fn trim(coeffs: &[Complex64]) -> &[Complex64] {
    let len = coeffs
        .iter()
        .rposition(|c| *c != zero())
        .map_or(0, |i| i + 1);
    &coeffs[..len]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub leading: Complex64,
    pub roots: Vec<Complex64>,
}

impl Factorization {
    /// Ascending coefficients of `leading · Π(z − r)`.
    pub fn expand(&self) -> Vec<Complex64> {
        let mut poly = vec![self.leading];
        for r in &self.roots {
            let mut next = vec![zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            poly = next;
        }
        poly
    }
}

/// Leading coefficient and roots of `Σ coeffs[i] zⁱ`.
///
/// Exact zero roots (vanishing low-order coefficients) are split off
/// first; the rest come from Durand–Kerner iteration. At the iteration
/// cap the roots are kept if every residual passes
/// `|p(r)| ≤ 1e-8 · max|coeff| · (1 + |r|)^deg`.
pub fn factor_polynomial(coeffs: &[Complex64]) -> Result<Factorization, CompileError> {
    if coeffs.is_empty() {
        return Err(CompileError::Empty);
    }
    if !coeffs.iter().all(|c| is_finite(*c)) {
        return Err(CompileError::NonFinite);
    }
    let coeffs = trim(coeffs);
    let Some(&leading) = coeffs.last() else {
        return Err(CompileError::ZeroPolynomial);
    };
    let zeros_at_origin = coeffs.iter().position(|c| *c != zero()).unwrap_or(0);
    let reduced = &coeffs[zeros_at_origin..];
    let mut roots = vec![zero(); zeros_at_origin];
    roots.extend(durand_kerner(reduced)?);
    Ok(Factorization { leading, roots })
}

fn durand_kerner(coeffs: &[Complex64]) -> Result<Vec<Complex64>, CompileError> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return Ok(vec![-monic[0]]);
    }
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32)).collect();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut max_step: f64 = 0.0;
        for k in 0..deg {
            let rk = roots[k];
            let mut denom = one();
            for (j, rj) in roots.iter().enumerate() {
                if j != k {
                    let d = rk - rj;
                    denom *= if d == zero() {
                        Complex64::new(1e-300, 0.0)
                    } else {
                        d
                    };
                }
            }
            let step = horner(&monic, rk) / denom;
            if is_finite(step) {
                roots[k] = rk - step;
                max_step = max_step.max(step.norm() / rk.norm().max(1.0));
            }
        }
        if max_step <= STEP_TOL {
            break;
        }
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let residuals: Vec<f64> = roots
        .iter()
        .map(|r| horner(coeffs, *r).norm() / (scale * (1.0 + r.norm()).powi(deg as i32)))
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    if max_residual <= RESIDUAL_TOL && roots.iter().all(|r| is_finite(*r)) {
        Ok(roots)
    } else {
        Err(CompileError::NoConvergence {
            iterations,
            max_residual,
            residuals,
        })
    }
}

/// A rational function over the complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum RationalFunction {
    /// Ascending coefficients `α₀..α_h` over `β₀..β_k`.
    Coefficients {
        num: Vec<Complex64>,
        den: Vec<Complex64>,
    },
    /// `c₀ Π(z − zeros) / Π(z − poles)`.
    Factored {
        c0: Complex64,
        zeros: Vec<Complex64>,
        poles: Vec<Complex64>,
    },
}

/// Numerator and denominator in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct Factored {
    pub c0: Complex64,
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
}

impl RationalFunction {
    pub fn validate(&self) -> Result<(), CompileError> {
        match self {
            RationalFunction::Coefficients { num, den } => {
                if num.is_empty() || den.is_empty() {
                    return Err(CompileError::Empty);
                }
                if !num.iter().chain(den).all(|c| is_finite(*c)) {
                    return Err(CompileError::NonFinite);
                }
                if trim(den).is_empty() {
                    return Err(CompileError::ZeroDenominator);
                }
            }
            RationalFunction::Factored { c0, zeros, poles } => {
                if !core::iter::once(c0)
                    .chain(zeros)
                    .chain(poles)
                    .all(|c| is_finite(*c))
                {
                    return Err(CompileError::NonFinite);
                }
            }
        }
        Ok(())
    }

    /// `n = max(h, k)`.
    pub fn degree(&self) -> usize {
        match self {
            RationalFunction::Coefficients { num, den } => {
                let h = trim(num).len().saturating_sub(1);
                let k = trim(den).len().saturating_sub(1);
                h.max(k)
            }
            RationalFunction::Factored { zeros, poles, .. } => zeros.len().max(poles.len()),
        }
    }

    /// Ascending numerator and denominator coefficients.
    pub fn coefficients(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        match self {
            RationalFunction::Coefficients { num, den } => (num.clone(), den.clone()),
            RationalFunction::Factored { c0, zeros, poles } => (
                Factorization {
                    leading: *c0,
                    roots: zeros.clone(),
                }
                .expand(),
                Factorization {
                    leading: one(),
                    roots: poles.clone(),
                }
                .expand(),
            ),
        }
    }

    /// Factored form; an identically zero numerator gives `c₀ = 0` and no
    /// roots.
    pub fn factored(&self) -> Result<Factored, CompileError> {
        self.validate()?;
        match self {
            RationalFunction::Factored { c0, zeros, poles } => Ok(Factored {
                c0: *c0,
                zeros: zeros.clone(),
                poles: poles.clone(),
            }),
            RationalFunction::Coefficients { num, den } => {
                let d = factor_polynomial(den)?;
                if trim(num).is_empty() {
                    return Ok(Factored {
                        c0: zero(),
                        zeros: Vec::new(),
                        poles: Vec::new(),
                    });
                }
                let n = factor_polynomial(num)?;
                Ok(Factored {
                    c0: n.leading / d.leading,
                    zeros: n.roots,
                    poles: d.roots,
                })
            }
        }
    }

    /// `f(z)` as a coin, using homogeneous coordinates so that poles give
    /// `∞`. `None` where numerator and denominator vanish together.
    pub fn evaluate(&self, z: &Coin) -> Option<Coin> {
        let (num, den) = self.coefficients();
        let (num, den) = (trim(&num), trim(&den));
        let n = num.len().max(den.len()).saturating_sub(1);
        let homogeneous = |c: &[Complex64]| -> Complex64 {
            let (a, b) = (z.a(), z.b());
            let mut acc = zero();
            for (i, ci) in c.iter().enumerate() {
                acc += ci * a.powu(i as u32) * b.powu((n - i) as u32);
            }
            acc
        };
        Coin::new(homogeneous(num), homogeneous(den)).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationReport {
    pub circuit: BlockCircuit,
    /// Heralded blocks (sums and products); inversions are free.
    pub op_count: usize,
    pub degree: usize,
    /// `4n`.
    pub bound: usize,
    pub photons_data: usize,
    pub photons_register: usize,
    pub warnings: Vec<String>,
}

/// Compiles `f` and reports the resource counts.
pub fn compile_rational(f: &RationalFunction) -> Result<CompilationReport, CompileError> {
    let degree = f.degree();
    let mut fac = f.factored()?;
    let mut warnings = Vec::new();
    cancel_common_roots(&mut fac, &mut warnings);
    let circuit = fold_constants(&naive_circuit(&fac));
    Ok(CompilationReport {
        op_count: circuit.op_count(),
        degree,
        bound: 4 * degree,
        photons_data: circuit.n_data_inputs(),
        photons_register: circuit.registers().len(),
        circuit,
        warnings,
    })
}

fn cancel_common_roots(fac: &mut Factored, warnings: &mut Vec<String>) {
    let mut i = 0;
    while i < fac.zeros.len() {
        let p = fac.zeros[i];
        let tol = CANCEL_TOL * p.norm().max(1.0);
        if let Some(j) = fac.poles.iter().position(|q| (q - p).norm() <= tol) {
            let q = fac.poles.remove(j);
            fac.zeros.remove(i);
            warnings.push(format!(
                "cancelled common root {} (zero) against {} (pole)",
                crate::coin::Extended::from(p),
                crate::coin::Extended::from(q)
            ));
        } else {
            i += 1;
        }
    }
}

struct Builder {
    n_data: usize,
    registers: Vec<Coin>,
    nodes: Vec<Node>,
}

impl Builder {
    fn reg(&mut self, c: Coin) -> WireRef {
        self.registers.push(c);
        WireRef::Reg(self.registers.len() - 1)
    }

    fn data(&mut self) -> WireRef {
        self.n_data += 1;
        WireRef::Data(self.n_data - 1)
    }

    fn node(&mut self, kind: BlockKind, inputs: Vec<WireRef>) -> WireRef {
        self.nodes.push(Node::new(kind, inputs));
        WireRef::Node(self.nodes.len() - 1)
    }

    fn product(&mut self, x: WireRef, y: WireRef) -> WireRef {
        self.node(BlockKind::Product(ProductBranch::Plus), vec![x, y])
    }

    /// `z − p`; a zero root is the data wire itself.
    fn linear_factor(&mut self, p: Complex64) -> WireRef {
        let z = self.data();
        if p == zero() {
            return z;
        }
        let shift = self.reg(Coin::finite(-p));
        let mean = self.node(BlockKind::Sum(SumBranch::S), vec![z, shift]);
        let two = self.reg(Coin::real(2.0));
        self.product(mean, two)
    }

    fn chain(&mut self, roots: &[Complex64]) -> Option<WireRef> {
        let mut acc: Option<WireRef> = None;
        for r in roots {
            let f = self.linear_factor(*r);
            acc = Some(match acc {
                None => f,
                Some(a) => self.product(a, f),
            });
        }
        acc
    }
}

/// Unoptimized lowering with explicit `×2` and `×c₀` products.
pub fn naive_circuit(fac: &Factored) -> BlockCircuit {
    let mut b = Builder {
        n_data: 0,
        registers: Vec::new(),
        nodes: Vec::new(),
    };
    let c0 = Coin::finite(fac.c0);
    let output = if fac.c0 == zero() {
        b.reg(Coin::ZERO)
    } else {
        let num = b.chain(&fac.zeros);
        let den = b
            .chain(&fac.poles)
            .map(|d| b.node(BlockKind::Invert, vec![d]));
        let body = match (num, den) {
            (Some(n), Some(d)) => Some(b.product(n, d)),
            (n, d) => n.or(d),
        };
        let k = b.reg(c0);
        match body {
            Some(w) => b.product(w, k),
            None => k,
        }
    };
    BlockCircuit::new(b.n_data, b.registers, b.nodes, output).expect("builder emits valid circuits")
}

/// Removes register products on purely multiplicative paths to the output
/// and re-emits their combined constant as one final product (skipped when
/// the constant is exactly 1). The result equals the input projectively
/// wherever both are defined.
pub fn fold_constants(circuit: &BlockCircuit) -> BlockCircuit {
    let nodes = circuit.nodes();
    let regs = circuit.registers();
    let n = nodes.len();

    let mut consumer: Vec<Option<usize>> = vec![None; n];
    for (i, node) in nodes.iter().enumerate() {
        for w in &node.inputs {
            if let WireRef::Node(j) = w {
                consumer[*j] = Some(i);
            }
        }
    }
    // multiplicative[i]: every block from node i to the output is a product
    // or an inversion; flips[i]: inversions strictly after node i.
    let mut multiplicative = vec![false; n];
    let mut flips = vec![0usize; n];
    for i in (0..n).rev() {
        let own = !matches!(nodes[i].kind, BlockKind::Sum(_));
        match consumer[i] {
            None => multiplicative[i] = own && circuit.output() == WireRef::Node(i),
            Some(c) => {
                multiplicative[i] = own && multiplicative[c];
                flips[i] = flips[c] + usize::from(nodes[c].kind == BlockKind::Invert);
            }
        }
    }

    let foldable = |c: &Coin| c.a() != zero() && c.b() != zero();
    let mut k = one();
    let mut replaced: Vec<Option<WireRef>> = vec![None; n];
    for i in 0..n {
        let BlockKind::Product(branch) = nodes[i].kind else {
            continue;
        };
        if !multiplicative[i] {
            continue;
        }
        let ins = &nodes[i].inputs;
        let pick = ins
            .iter()
            .position(|w| matches!(w, WireRef::Reg(r) if foldable(&regs[*r])));
        if let Some(p) = pick {
            let WireRef::Reg(r) = ins[p] else {
                unreachable!()
            };
            let value = regs[r].a() / regs[r].b() * branch.sign();
            k = if flips[i].is_multiple_of(2) {
                k * value
            } else {
                k / value
            };
            replaced[i] = Some(ins[1 - p]);
        }
    }

    let resolve = |mut w: WireRef| loop {
        match w {
            WireRef::Node(j) => match replaced[j] {
                Some(x) => w = x,
                None => return w,
            },
            other => return other,
        }
    };

    // Rebuild with renumbered nodes and only the registers still in use.
    let mut new_index: Vec<Option<usize>> = vec![None; n];
    let mut new_nodes: Vec<Node> = Vec::new();
    let mut new_regs: Vec<Coin> = Vec::new();
    let mut reg_map: Vec<Option<usize>> = vec![None; regs.len()];
    let mut map_wire =
        |w: WireRef, new_index: &[Option<usize>], new_regs: &mut Vec<Coin>| match resolve(w) {
            WireRef::Node(j) => WireRef::Node(new_index[j].expect("earlier node kept")),
            WireRef::Reg(r) => {
                let idx = *reg_map[r].get_or_insert_with(|| {
                    new_regs.push(regs[r]);
                    new_regs.len() - 1
                });
                WireRef::Reg(idx)
            }
            d => d,
        };
    for i in 0..n {
        if replaced[i].is_some() {
            continue;
        }
        let inputs = nodes[i]
            .inputs
            .iter()
            .map(|w| map_wire(*w, &new_index, &mut new_regs))
            .collect();
        new_nodes.push(Node::new(nodes[i].kind, inputs));
        new_index[i] = Some(new_nodes.len() - 1);
    }
    let mut output = map_wire(circuit.output(), &new_index, &mut new_regs);
    if k != one() {
        new_regs.push(Coin::finite(k));
        new_nodes.push(Node::new(
            BlockKind::Product(ProductBranch::Plus),
            vec![output, WireRef::Reg(new_regs.len() - 1)],
        ));
        output = WireRef::Node(new_nodes.len() - 1);
    }
    BlockCircuit::new(circuit.n_data_inputs(), new_regs, new_nodes, output)
        .expect("folding preserves validity")
}
