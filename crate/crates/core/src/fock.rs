//! Second-quantized simulation of the block interferometers.
//!
//! Photons live in single-particle modes `spatial × polarization × label`;
//! the internal label models distinguishability. Each data or register
//! wire is one photon in its own spatial mode. The optical network is a
//! unitary on `spatial ⊗ polarization` that leaves labels alone. After the
//! whole network, a run is kept only if every trigger mode holds exactly
//! one photon in its heralding polarization, every discard mode is empty
//! and the output mode holds exactly one photon. The output polarization
//! is then reduced over every label and every other mode.
//!
//! Element conventions (creation operators, `a`/`b` in, `c`/`d` out):
//!
//! - beam splitter: `a† → (c† + i d†)/√2`, `b† → (i c† + d†)/√2`;
//! - polarizing beam splitter: `H` transmitted, `V` reflected with phase `i`;
//! - product trigger arm: `diag(1, −1)`, then the `π/8` half-wave plate
//!   `[[1, 1], [1, −1]]/√2`; detecting `H` heralds the product, `V` the
//!   antiproduct;
//! - mean block: both photons must leave the first splitter through port
//!   `c`, a second splitter against vacuum separates them, and the trigger
//!   detects `V` (arithmetic) or `H` (harmonic);
//! - inversion: polarization swap.
//!
//! These phases make the ideal outputs equal the target coins exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::blocks::{unit, BlockOutcome, Outcome, ProductBranch, SumBranch};
use crate::chain::{
    evaluate_ideal, BlockCircuit, BlockKind, ChainCombo, IdealEvaluation, Node, WireRef,
};
use crate::coin::Coin;
use crate::density::{DensityMatrix2, Mat2};
use crate::error::{CircuitError, Indefinite};
use crate::numeric::{NumericPolicy, Visibility};

pub const H: usize = 0;
pub const V: usize = 1;

const MAX_PHOTONS: usize = 3;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Index layout of the single-particle space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeBasis {
    pub spatial: usize,
    pub labels: usize,
}

impl ModeBasis {
    pub fn dim(&self) -> usize {
        self.spatial * 2 * self.labels
    }

    #[inline]
    pub fn index(&self, mode: usize, pol: usize, label: usize) -> usize {
        (mode * 2 + pol) * self.labels + label
    }
}

/// One term of the distinguishability mixture: photon `k` carries
/// internal label `labels[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub labels: Vec<usize>,
}

/// Label assignments and weights for `photons ≤ 3`.
///
/// Two photons: identical with weight `V`, orthogonal with `1 − V`. Three
/// photons: all identical with `V^{3/2}`, each of the three "two identical,
/// one different" arrangements with `V − V^{3/2}`, and all different with
/// the remainder `1 − 3V + 2V^{3/2}`.
pub fn mixture(photons: usize, v: Visibility) -> Vec<MixtureComponent> {
    let v = v.get();
    let comp = |weight: f64, labels: &[usize]| MixtureComponent {
        weight,
        labels: labels.to_vec(),
    };
    match photons {
        0 => vec![comp(1.0, &[])],
        1 => vec![comp(1.0, &[0])],
        2 => vec![comp(v, &[0, 0]), comp(1.0 - v, &[0, 1])],
        3 => {
            let p1 = v * v.sqrt();
            let p2 = v - p1;
            let p3 = 1.0 - p1 - 3.0 * p2;
            vec![
                comp(p1, &[0, 0, 0]),
                comp(p2, &[0, 0, 1]),
                comp(p2, &[0, 1, 0]),
                comp(p2, &[1, 0, 0]),
                comp(p3, &[0, 1, 2]),
            ]
        }
        n => panic!("no mixture model for {n} photons"),
    }
}

/// Sparse multi-photon state: occupation numbers per single-particle mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    dim: usize,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl FockState {
    pub fn vacuum(dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; dim], c(1.0, 0.0));
        FockState { dim, terms }
    }

    /// Applies `Σₖ amps[k] a†ₖ`.
    pub fn create(&self, amps: &[Complex64]) -> FockState {
        assert_eq!(amps.len(), self.dim);
        let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            for (k, a) in amps.iter().enumerate() {
                if *a == c(0.0, 0.0) {
                    continue;
                }
                let mut next = occ.clone();
                next[k] += 1;
                let boson = f64::from(next[k]).sqrt();
                *terms.entry(next).or_insert(c(0.0, 0.0)) += amp * a * boson;
            }
        }
        FockState {
            dim: self.dim,
            terms,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn photon_number(&self) -> Option<usize> {
        self.terms
            .keys()
            .next()
            .map(|occ| occ.iter().map(|&n| n as usize).sum())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u8>, &Complex64)> {
        self.terms.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trigger {
    pub mode: usize,
    pub pol: usize,
}

/// Linear-optical network compiled from a block circuit.
#[derive(Debug, Clone)]
pub struct Network {
    spatial: usize,
    /// `unitary[out][in]` on `spatial ⊗ polarization`, index `mode·2 + pol`.
    unitary: Vec<Vec<Complex64>>,
    sources: Vec<(usize, Coin)>,
    triggers: Vec<Trigger>,
    discards: Vec<usize>,
    output: usize,
}

/// Detection record of one run: heralding polarization seen at each
/// trigger, or `None` when the mode-occupation conditions fail.
pub type Pattern = Option<Vec<usize>>;

impl Network {
    pub fn build(circuit: &BlockCircuit, data: &[Coin]) -> Result<Self, CircuitError> {
        circuit.check_data(data)?;
        let sources = circuit.used_sources();
        if sources.len() > MAX_PHOTONS {
            return Err(CircuitError::TooManyPhotons(sources.len()));
        }
        let extra = circuit
            .nodes()
            .iter()
            .filter(|n| matches!(n.kind, BlockKind::Sum(_)))
            .count();
        let spatial = sources.len() + extra;
        let mut net = Network {
            spatial,
            unitary: identity(2 * spatial),
            sources: sources
                .iter()
                .enumerate()
                .map(|(m, w)| (m, circuit.source_coin(*w, data)))
                .collect(),
            triggers: Vec::new(),
            discards: Vec::new(),
            output: 0,
        };
        let mode_of_source =
            |w: WireRef| sources.iter().position(|s| *s == w).expect("used source");
        let mut node_mode: Vec<usize> = Vec::with_capacity(circuit.nodes().len());
        let mut next_free = sources.len();
        let wire_mode = |w: WireRef, node_mode: &[usize]| match w {
            WireRef::Node(j) => node_mode[j],
            src => mode_of_source(src),
        };
        for Node { kind, inputs } in circuit.nodes() {
            let m1 = wire_mode(inputs[0], &node_mode);
            match kind {
                BlockKind::Invert => {
                    net.polarization(m1, [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
                    node_mode.push(m1);
                }
                BlockKind::Product(branch) => {
                    let m2 = wire_mode(inputs[1], &node_mode);
                    net.pbs(m1, m2);
                    net.polarization(
                        m2,
                        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
                    );
                    let s = core::f64::consts::FRAC_1_SQRT_2;
                    net.polarization(m2, [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]);
                    let pol = match branch {
                        ProductBranch::Plus => H,
                        ProductBranch::Minus => V,
                    };
                    net.triggers.push(Trigger { mode: m2, pol });
                    node_mode.push(m1);
                }
                BlockKind::Sum(branch) => {
                    let m2 = wire_mode(inputs[1], &node_mode);
                    let m3 = next_free;
                    next_free += 1;
                    net.beam_splitter(m1, m2);
                    net.discards.push(m2);
                    net.beam_splitter(m1, m3);
                    let pol = match branch {
                        SumBranch::S => V,
                        SumBranch::I => H,
                    };
                    net.triggers.push(Trigger { mode: m1, pol });
                    node_mode.push(m3);
                }
            }
        }
        net.output = wire_mode(circuit.output(), &node_mode);
        Ok(net)
    }

    pub fn spatial_modes(&self) -> usize {
        self.spatial
    }

    pub fn photons(&self) -> usize {
        self.sources.len()
    }

    pub fn unitary(&self) -> &[Vec<Complex64>] {
        &self.unitary
    }

    fn apply(&mut self, element: Vec<Vec<Complex64>>) {
        self.unitary = matmul(&element, &self.unitary);
    }

    fn polarization(&mut self, m: usize, p: [[Complex64; 2]; 2]) {
        let mut e = identity(2 * self.spatial);
        for (o, row) in p.iter().enumerate() {
            for (i, x) in row.iter().enumerate() {
                e[2 * m + o][2 * m + i] = *x;
            }
        }
        self.apply(e);
    }

    /// Polarization-independent 50:50 splitter; outputs reuse the input
    /// mode indices (`c = a`, `d = b`).
    fn beam_splitter(&mut self, a: usize, b: usize) {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut e = identity(2 * self.spatial);
        for p in 0..2 {
            let (ia, ib) = (2 * a + p, 2 * b + p);
            e[ia][ia] = c(s, 0.0);
            e[ib][ia] = c(0.0, s);
            e[ia][ib] = c(0.0, s);
            e[ib][ib] = c(s, 0.0);
        }
        self.apply(e);
    }

    /// `a_H → c_H`, `a_V → i d_V`, `b_H → d_H`, `b_V → i c_V` with `c = a`,
    /// `d = b`.
    fn pbs(&mut self, a: usize, b: usize) {
        let mut e = identity(2 * self.spatial);
        let (a_v, b_v) = (2 * a + V, 2 * b + V);
        e[a_v][a_v] = c(0.0, 0.0);
        e[b_v][b_v] = c(0.0, 0.0);
        e[b_v][a_v] = c(0.0, 1.0);
        e[a_v][b_v] = c(0.0, 1.0);
        self.apply(e);
    }

    /// The full single-particle transformation `U ⊗ I_labels`.
    pub fn single_particle_matrix(&self, labels: usize) -> Vec<Vec<Complex64>> {
        let basis = ModeBasis {
            spatial: self.spatial,
            labels,
        };
        let mut full = vec![vec![c(0.0, 0.0); basis.dim()]; basis.dim()];
        for (o, row) in self.unitary.iter().enumerate() {
            for (i, x) in row.iter().enumerate() {
                for l in 0..labels {
                    full[basis.index(o / 2, o % 2, l)][basis.index(i / 2, i % 2, l)] = *x;
                }
            }
        }
        full
    }

    /// Output state of one mixture component before any post-selection.
    pub fn propagate(&self, component: &MixtureComponent) -> (ModeBasis, FockState) {
        let labels = component.labels.iter().max().map_or(1, |m| m + 1);
        let basis = ModeBasis {
            spatial: self.spatial,
            labels,
        };
        let mut state = FockState::vacuum(basis.dim());
        for ((mode, coin), &label) in self.sources.iter().zip(&component.labels) {
            let (a, b) = unit(coin);
            let mut amps = vec![c(0.0, 0.0); basis.dim()];
            for (o, row) in self.unitary.iter().enumerate() {
                let x = row[2 * mode + H] * a + row[2 * mode + V] * b;
                amps[basis.index(o / 2, o % 2, label)] = x;
            }
            state = state.create(&amps);
        }
        (basis, state)
    }

    fn occupation(&self, basis: &ModeBasis, occ: &[u8], mode: usize, pol: Option<usize>) -> usize {
        let pols: &[usize] = match pol {
            Some(H) => &[H],
            Some(_) => &[V],
            None => &[H, V],
        };
        pols.iter()
            .flat_map(|&p| (0..basis.labels).map(move |l| (p, l)))
            .map(|(p, l)| occ[basis.index(mode, p, l)] as usize)
            .sum()
    }

    fn classify(&self, basis: &ModeBasis, occ: &[u8]) -> Pattern {
        if self
            .discards
            .iter()
            .any(|&m| self.occupation(basis, occ, m, None) != 0)
        {
            return None;
        }
        if self.occupation(basis, occ, self.output, None) != 1 {
            return None;
        }
        let mut seen = Vec::with_capacity(self.triggers.len());
        for t in &self.triggers {
            if self.occupation(basis, occ, t.mode, None) != 1 {
                return None;
            }
            seen.push(if self.occupation(basis, occ, t.mode, Some(H)) == 1 {
                H
            } else {
                V
            });
        }
        Some(seen)
    }

    /// Probability of every detection pattern for one mixture component.
    pub fn outcome_distribution(&self, component: &MixtureComponent) -> BTreeMap<Pattern, f64> {
        let (basis, state) = self.propagate(component);
        let mut out = BTreeMap::new();
        for (occ, amp) in state.iter() {
            *out.entry(self.classify(&basis, occ)).or_insert(0.0) += amp.norm_sqr();
        }
        out
    }

    /// Heralded output polarization of one component, weighted by its
    /// post-selection probability.
    pub fn heralded_matrix(&self, component: &MixtureComponent) -> Mat2 {
        let (basis, state) = self.propagate(component);
        let wanted: Vec<usize> = self.triggers.iter().map(|t| t.pol).collect();
        let mut branches: BTreeMap<(Vec<u8>, usize), [Complex64; 2]> = BTreeMap::new();
        for (occ, amp) in state.iter() {
            if self.classify(&basis, occ).as_ref() != Some(&wanted) {
                continue;
            }
            let (pol, label) = (0..2)
                .flat_map(|p| (0..basis.labels).map(move |l| (p, l)))
                .find(|&(p, l)| occ[basis.index(self.output, p, l)] == 1)
                .expect("output holds one photon");
            let mut rest = occ.clone();
            rest[basis.index(self.output, pol, label)] = 0;
            branches.entry((rest, label)).or_insert([c(0.0, 0.0); 2])[pol] += amp;
        }
        branches
            .values()
            .fold(Mat2::ZERO, |acc, psi| acc + Mat2::outer(psi[0], psi[1]))
    }

    /// Mixture-weighted heralded matrix.
    pub fn simulate(&self, v: Visibility) -> Mat2 {
        mixture(self.photons(), v)
            .iter()
            .filter(|comp| comp.weight != 0.0)
            .fold(Mat2::ZERO, |acc, comp| {
                acc + self.heralded_matrix(comp).scale(comp.weight)
            })
    }
}

fn identity(n: usize) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

fn matmul(x: &[Vec<Complex64>], y: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = y[0].len();
    x.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(y).map(|(a, yr)| a * yr[j]).sum())
                .collect()
        })
        .collect()
}

/// Oracle evaluation of any circuit with at most three photons.
pub fn simulate_circuit(
    circuit: &BlockCircuit,
    data: &[Coin],
    v: Visibility,
) -> Result<Outcome, CircuitError> {
    let net = Network::build(circuit, data)?;
    let m = net.simulate(v);
    Ok(match evaluate_ideal(circuit, data)? {
        IdealEvaluation::Defined { coin, .. } => match DensityMatrix2::from_unnormalized(m) {
            Some(state) if m.trace().re > NumericPolicy::DEFAULT.vanishing_trace => {
                Outcome::Heralded(BlockOutcome {
                    state,
                    success_prob: m.trace().re,
                    ideal: coin,
                })
            }
            _ => Outcome::Indefinite,
        },
        IdealEvaluation::Indefinite { .. } => Outcome::Indefinite,
    })
}

fn single(
    outcome: Outcome,
    point: impl FnOnce() -> alloc::string::String,
) -> Result<BlockOutcome, Indefinite> {
    match outcome {
        Outcome::Heralded(o) => Ok(o),
        Outcome::Indefinite => Err(Indefinite { point: point() }),
    }
}

/// Oracle for one block; `z2` is ignored by the inversion.
pub fn oracle_block(
    kind: BlockKind,
    z1: &Coin,
    z2: &Coin,
    v: Visibility,
) -> Result<BlockOutcome, Indefinite> {
    let (n, data) = match kind {
        BlockKind::Invert => (1, vec![*z1]),
        _ => (2, vec![*z1, *z2]),
    };
    let inputs = (0..n).map(WireRef::Data).collect();
    let circuit = BlockCircuit::new(
        n,
        Vec::new(),
        vec![Node::new(kind, inputs)],
        WireRef::Node(0),
    )
    .expect("single-block circuit is valid");
    let out = simulate_circuit(&circuit, &data, v).expect("two photons are supported");
    single(out, || crate::blocks::critical_point(kind.name(), z1, z2))
}

/// Oracle for the two-stage concatenations.
pub fn oracle_chain3(
    z1: &Coin,
    z2: &Coin,
    z3: &Coin,
    combo: ChainCombo,
    v: Visibility,
) -> Result<BlockOutcome, Indefinite> {
    let out = simulate_circuit(&combo.circuit(), &[*z1, *z2, *z3], v)
        .expect("three photons are supported");
    single(out, || {
        alloc::format!(
            "{} chain at ({}, {}, {})",
            combo.name(),
            z1.value(),
            z2.value(),
            z3.value()
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{product_output, sum_output};
    use crate::chain::{concat3_output, program_linear, template_circuit};
    use crate::coin::Extended;
    use crate::density::fidelity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vis(x: f64) -> Visibility {
        Visibility::new(x).unwrap()
    }

    fn product() -> BlockKind {
        BlockKind::Product(ProductBranch::Plus)
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        for n in 1..=3 {
            for v in [0.0, 0.3, 0.84, 1.0] {
                let total: f64 = mixture(n, vis(v)).iter().map(|c| c.weight).sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
                assert!(mixture(n, vis(v)).iter().all(|c| c.weight >= -1e-15));
            }
        }
    }

    #[test]
    fn fock_creation_normalization() {
        let dim = 2;
        let s = core::f64::consts::FRAC_1_SQRT_2;
        // two photons in one mode: |2⟩ with amplitude √2
        let st = FockState::vacuum(dim)
            .create(&[c(1.0, 0.0), c(0.0, 0.0)])
            .create(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_abs_diff_eq!(st.norm_sqr(), 2.0, epsilon = 1e-15);
        let st = FockState::vacuum(dim).create(&[c(s, 0.0), c(s, 0.0)]);
        assert_abs_diff_eq!(st.norm_sqr(), 1.0, epsilon = 1e-15);
        assert_eq!(st.photon_number(), Some(1));
    }

    #[test]
    fn block_examples() {
        let i = Coin::finite(c(0.0, 1.0));
        let o = oracle_block(product(), &i, &Coin::ONE, Visibility::ONE).unwrap();
        assert!(o.ideal.approx_eq(&i));
        assert_abs_diff_eq!(fidelity(&o.state, &i.density()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.success_prob, 0.25, epsilon = 1e-12);

        // z₁ + z₂ = 0: coherent part is |0⟩, the distinguishable part adds
        // weight on |H⟩.
        let o = oracle_block(
            BlockKind::Sum(SumBranch::S),
            &Coin::ONE,
            &Coin::real(-1.0),
            vis(0.84),
        )
        .unwrap();
        assert!(o.ideal.approx_eq(&Coin::ZERO));
        assert!(o.state.matrix().max_abs_diff(&Mat2::diag(0.08, 0.92)) <= 1e-12);
        let o = oracle_block(
            BlockKind::Sum(SumBranch::S),
            &Coin::ONE,
            &Coin::real(-1.0),
            Visibility::ONE,
        )
        .unwrap();
        assert!(o.state.matrix().max_abs_diff(Coin::ZERO.density().matrix()) <= 1e-12);

        assert!(oracle_block(product(), &Coin::ZERO, &Coin::INFINITY, vis(0.7)).is_err());

        let o = oracle_block(BlockKind::Invert, &Coin::real(2.0), &Coin::ONE, vis(0.3)).unwrap();
        assert!(o.ideal.approx_eq(&Coin::real(0.5)));
        assert_abs_diff_eq!(o.success_prob, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_examples() {
        let one = Coin::ONE;
        let o = oracle_chain3(&one, &one, &one, ChainCombo::SP, Visibility::ONE).unwrap();
        assert_abs_diff_eq!(o.success_prob, 0.03125, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&o.state, &one.density()), 1.0, epsilon = 1e-12);
        for v in [0.0, 0.5, 0.84, 1.0] {
            let z = Coin::ZERO;
            assert!(oracle_chain3(&z, &z, &z, ChainCombo::MP, vis(v)).is_err());
        }
        let m1 = Coin::real(-1.0);
        let o = oracle_chain3(&one, &m1, &m1, ChainCombo::SA, vis(0.84)).unwrap();
        let cf = concat3_output(&one, &m1, &m1, ChainCombo::SA, vis(0.84)).unwrap();
        assert!(o.state.matrix().max_abs_diff(cf.state.matrix()) <= 1e-12);
    }

    #[test]
    fn network_is_unitary_and_label_blind() {
        let circuits = [
            ChainCombo::SP.circuit(),
            ChainCombo::MA.circuit(),
            template_circuit(
                8,
                Extended::real(0.5),
                Some(Extended::real(2.0)),
                ProductBranch::Minus,
            )
            .unwrap(),
        ];
        let data = [Coin::finite(c(0.3, 0.2)), Coin::real(-2.0), Coin::INFINITY];
        for circ in &circuits {
            let net = Network::build(circ, &data[..circ.n_data_inputs()]).unwrap();
            let u = net.unitary();
            let n = u.len();
            for i in 0..n {
                for j in 0..n {
                    let dot: Complex64 = (0..n).map(|k| u[k][i].conj() * u[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).norm() <= 1e-12);
                }
            }
            let labels = 3;
            let full = net.single_particle_matrix(labels);
            let basis = ModeBasis {
                spatial: net.spatial_modes(),
                labels,
            };
            for (o, row) in full.iter().enumerate().take(basis.dim()) {
                for (i, amp) in row.iter().enumerate().take(basis.dim()) {
                    if o % labels != i % labels {
                        assert_eq!(*amp, c(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn four_photons_rejected() {
        let g = program_linear(Extended::real(0.5), Extended::real(0.5)).unwrap();
        assert!(simulate_circuit(&g, &[Coin::ONE], vis(0.9)).is_ok());
        let four = crate::chain::BlockCircuit::new(
            4,
            Vec::new(),
            vec![
                Node::new(product(), vec![WireRef::Data(0), WireRef::Data(1)]),
                Node::new(product(), vec![WireRef::Data(2), WireRef::Data(3)]),
                Node::new(product(), vec![WireRef::Node(0), WireRef::Node(1)]),
            ],
            WireRef::Node(2),
        )
        .unwrap();
        let data = [Coin::ONE; 4];
        assert_eq!(
            simulate_circuit(&four, &data, vis(0.9)).unwrap_err(),
            CircuitError::TooManyPhotons(4)
        );
    }

    fn arb_coin() -> impl Strategy<Value = Coin> {
        prop_oneof![
            8 => (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(r, i)| Coin::finite(c(r, i))),
            1 => Just(Coin::ZERO),
            1 => Just(Coin::INFINITY),
        ]
    }

    fn arb_kind() -> impl Strategy<Value = BlockKind> {
        prop_oneof![
            Just(BlockKind::Product(ProductBranch::Plus)),
            Just(BlockKind::Product(ProductBranch::Minus)),
            Just(BlockKind::Sum(SumBranch::S)),
            Just(BlockKind::Sum(SumBranch::I)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn probability_completeness(u1 in arb_coin(), u2 in arb_coin(), u3 in arb_coin(), idx in 0usize..4, v in 0.0..=1.0f64) {
            let combo = ChainCombo::ALL[idx];
            let net = Network::build(&combo.circuit(), &[u1, u2, u3]).unwrap();
            for comp in mixture(3, vis(v)) {
                let total: f64 = net.outcome_distribution(&comp).values().sum();
                prop_assert!((total - 1.0).abs() <= 1e-10);
            }
        }

        #[test]
        fn blocks_match_closed_form(kind in arb_kind(), u1 in arb_coin(), u2 in arb_coin(), v in 0.0..=1.0f64) {
            let oracle = oracle_block(kind, &u1, &u2, vis(v));
            let closed = match kind {
                BlockKind::Product(b) => product_output(&u1, &u2, b, vis(v)),
                BlockKind::Sum(b) => sum_output(&u1, &u2, b, vis(v)),
                BlockKind::Invert => unreachable!(),
            };
            match (oracle, closed) {
                (Ok(o), Ok(cf)) => {
                    prop_assert!(o.state.matrix().max_abs_diff(cf.state.matrix()) <= 1e-9);
                    prop_assert!((o.success_prob - cf.success_prob).abs() <= 1e-10);
                    prop_assert!(o.ideal.approx_eq(&cf.ideal));
                    prop_assert!(o.state.matrix().hermiticity_defect() <= 1e-12);
                    prop_assert!(o.state.eigenvalues()[0] >= -1e-12);
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }

        #[test]
        fn chains_match_closed_form(u1 in arb_coin(), u2 in arb_coin(), u3 in arb_coin(), idx in 0usize..4, v in 0.0..=1.0f64) {
            let combo = ChainCombo::ALL[idx];
            match (oracle_chain3(&u1, &u2, &u3, combo, vis(v)), concat3_output(&u1, &u2, &u3, combo, vis(v))) {
                (Ok(o), Ok(cf)) => {
                    prop_assert!(o.state.matrix().max_abs_diff(cf.state.matrix()) <= 1e-9);
                    prop_assert!((o.success_prob - cf.success_prob).abs() <= 1e-10);
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }

        #[test]
        fn product_probability_is_visibility_free(u1 in arb_coin(), u2 in arb_coin(), v in 0.0..=1.0f64) {
            let net = Network::build(
                &BlockCircuit::new(2, Vec::new(), vec![Node::new(product(), vec![WireRef::Data(0), WireRef::Data(1)])], WireRef::Node(0)).unwrap(),
                &[u1, u2],
            ).unwrap();
            let p1 = net.simulate(Visibility::ONE).trace().re;
            let pv = net.simulate(vis(v)).trace().re;
            prop_assert!((p1 - pv).abs() <= 1e-12);
        }
    }
}
