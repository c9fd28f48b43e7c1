//! Qubit resources for running an encoded model on a gate-based device:
//! Pauli expansions, the first-order Trotter product, gate counts and the
//! Trotter error estimate.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, op_norm, sparse_op_norm, CMatrix, SparseMatrix, C64, ONE, ZERO};
use crate::minspace::dimension_bound;

/// Coefficients below this magnitude are dropped.
pub const PAULI_PRUNE: f64 = 1e-12;

/// Pauli string, one letter per qubit; qubit 0 is the most significant bit
/// of the basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString { n_qubits, x: 0, z: 0 }
    }

    /// Parses letters from `IXYZ`.
    pub fn parse(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n > 63 {
            return Err(Error::param("pauli", "at most 63 qubits"));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (i, ch) in s.chars().enumerate() {
            let bit = 1u64 << (n - 1 - i);
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                _ => return Err(Error::param("pauli", format!("unknown letter {ch:?}"))),
            }
        }
        Ok(PauliString { n_qubits: n, x, z })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// `self ⊗ other` on the concatenated register.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let shift = other.n_qubits;
        PauliString {
            n_qubits: self.n_qubits + other.n_qubits,
            x: (self.x << shift) | other.x,
            z: (self.z << shift) | other.z,
        }
    }

    /// `P|k⟩ = phase · |k ⊕ x⟩`.
    fn apply_basis(&self, k: usize) -> (usize, C64) {
        let y_count = (self.x & self.z).count_ones();
        let sign = if (self.z & k as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let phase = match y_count % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        };
        (k ^ self.x as usize, phase)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            let (j, ph) = self.apply_basis(k);
            m[(j, k)] = ph;
        }
        m
    }

    /// `v ← P v`.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (k, &a) in v.iter().enumerate() {
            let (j, ph) = self.apply_basis(k);
            out[j] = ph * a;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_qubits {
            let bit = 1u64 << (self.n_qubits - 1 - i);
            let c = match (self.x & bit != 0, self.z & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `M = Σ_P f_P P` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliExpansion {
    pub n_qubits: usize,
    pub terms: Vec<(PauliString, f64)>,
}

impl PauliExpansion {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(d, d);
        for (p, f) in &self.terms {
            for k in 0..d {
                let (j, ph) = p.apply_basis(k);
                m[(j, k)] += ph * *f;
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> PauliExpansion {
        PauliExpansion {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().filter(|_| s != 0.0).map(|(p, f)| (p.clone(), f * s)).collect(),
        }
    }
}

/// Zero-pads a square matrix to the next power-of-two dimension; the extra
/// basis states are unreachable.
pub fn pad_to_qubits(m: &CMatrix) -> (usize, CMatrix) {
    let d = m.nrows().max(1);
    let n = d.next_power_of_two().trailing_zeros() as usize;
    let mut out = CMatrix::zeros(1 << n, 1 << n);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    (n, out)
}

/// In-place Walsh–Hadamard transform, `out[z] = Σ_j (-1)^{z·j} v[j]`.
fn walsh_hadamard(v: &mut [C64]) {
    let mut h = 1;
    while h < v.len() {
        for blk in (0..v.len()).step_by(2 * h) {
            for j in blk..blk + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Coefficients `Tr(P M)/2^n` of a Hermitian matrix, padded to qubits.
/// Uses one Walsh–Hadamard transform per X-pattern.
pub fn pauli_decompose(m: &CMatrix) -> Result<PauliExpansion> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch("Pauli decomposition needs a square matrix".into()));
    }
    let dev = hermitian_deviation(m);
    if dev > 1e-12 * m.norm().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let (n, p) = pad_to_qubits(m);
    if n > 24 {
        return Err(Error::param("dimension", "too many qubits for a dense decomposition"));
    }
    let d = 1usize << n;
    let mut terms = Vec::new();
    let mut f = vec![ZERO; d];
    for x in 0..d {
        for (j, fj) in f.iter_mut().enumerate() {
            *fj = p[(j, j ^ x)];
        }
        walsh_hadamard(&mut f);
        for (z, &tr) in f.iter().enumerate() {
            let ps = PauliString { n_qubits: n, x: x as u64, z: z as u64 };
            // Tr(P M) = i^{#Y} Σ_j (-1)^{z·j} M[j, j⊕x]
            let phase = match (x & z).count_ones() % 4 {
                0 => ONE,
                1 => C64::new(0.0, 1.0),
                2 => -ONE,
                _ => C64::new(0.0, -1.0),
            };
            let coeff = (phase * tr).re / d as f64;
            if coeff.abs() >= PAULI_PRUNE {
                terms.push((ps, coeff));
            }
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(PauliExpansion { n_qubits: n, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorGroup {
    System,
    Environment,
    Interaction,
}

/// `exp(-i·angle·P)` on the joint register, system qubits first.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterFactor {
    pub group: FactorGroup,
    pub pauli: PauliString,
    pub angle: f64,
}

/// `U_{N_T} = (Π_sys Π_env Π_int)^{N_T}`.
#[derive(Debug, Clone)]
pub struct TrotterSequence {
    pub n_sys_qubits: usize,
    pub n_env_qubits: usize,
    pub n_steps: u64,
    /// Factors of one step, in application order.
    pub step: Vec<TrotterFactor>,
}

impl TrotterSequence {
    /// All factors of the product in application order.
    pub fn factors(&self) -> impl Iterator<Item = &TrotterFactor> {
        (0..self.n_steps).flat_map(move |_| self.step.iter())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_sys_qubits + self.n_env_qubits
    }

    /// Dense unitary of the whole product.
    pub fn to_unitary(&self) -> CMatrix {
        let d = 1usize << self.n_qubits();
        let mut one_step = CMatrix::identity(d, d);
        for f in &self.step {
            // exp(-iθP) = cos θ - i sin θ P
            let (s, c) = f.angle.sin_cos();
            let g = CMatrix::identity(d, d) * C64::new(c, 0.0) + f.pauli.to_matrix() * C64::new(0.0, -s);
            one_step = g * one_step;
        }
        let mut u = CMatrix::identity(d, d);
        for _ in 0..self.n_steps {
            u = &one_step * u;
        }
        u
    }
}

/// One interaction channel `α A_β ⊗ B_β` given as the two expansions.
#[derive(Debug, Clone)]
pub struct InteractionTerm {
    pub system: PauliExpansion,
    pub environment: PauliExpansion,
}

/// First-order Trotter product of `H_S ⊗ 1 + 1 ⊗ H_E + α Σ_β A_β ⊗ B_β`
/// over time `t` with `n_steps` steps.
pub fn trotter_sequence(
    system: &PauliExpansion,
    environment: &PauliExpansion,
    interactions: &[InteractionTerm],
    alpha: f64,
    t: f64,
    n_steps: u64,
) -> Result<TrotterSequence> {
    if n_steps == 0 {
        return Err(Error::param("n_steps", "need at least one Trotter step"));
    }
    let (ns, ne) = (system.n_qubits, environment.n_qubits);
    for term in interactions {
        if term.system.n_qubits != ns || term.environment.n_qubits != ne {
            return Err(Error::DimensionMismatch("interaction expansions must match the registers".into()));
        }
    }
    let dt = t / n_steps as f64;
    let id_s = PauliString::identity(ns);
    let id_e = PauliString::identity(ne);
    let mut step = Vec::new();
    for (p, f) in &system.terms {
        step.push(TrotterFactor { group: FactorGroup::System, pauli: p.tensor(&id_e), angle: f * dt });
    }
    for (p, f) in &environment.terms {
        step.push(TrotterFactor { group: FactorGroup::Environment, pauli: id_s.tensor(p), angle: f * dt });
    }
    for term in interactions {
        for (ps, fs) in &term.system.terms {
            for (pe, fe) in &term.environment.terms {
                step.push(TrotterFactor {
                    group: FactorGroup::Interaction,
                    pauli: ps.tensor(pe),
                    angle: alpha * fs * fe * dt,
                });
            }
        }
    }
    Ok(TrotterSequence { n_sys_qubits: ns, n_env_qubits: ne, n_steps, step })
}

/// CNOTs in the ladder circuit of a weight-`k` Pauli exponential.
pub fn cnot_count(k: u64) -> u64 {
    2 * k.saturating_sub(1)
}

/// Single-qubit gates of a weight-`k` Pauli exponential (basis changes and
/// the rotation).
pub fn single_qubit_count(k: u64) -> u64 {
    2 * k + 1
}

/// Upper bound `N_G = [(4N_S-1)|S_H| + (4N_E-1)|E_H| + (4N_S+4N_E-1) Σ_β |S_β||E_β|]·N_T`.
pub fn gate_count(
    n_sys_qubits: u64,
    n_env_qubits: u64,
    n_sys_terms: u64,
    n_env_terms: u64,
    interaction_terms: &[(u64, u64)],
    n_steps: u64,
) -> u128 {
    let per_s = (4 * n_sys_qubits as u128).saturating_sub(1);
    let per_e = (4 * n_env_qubits as u128).saturating_sub(1);
    let per_se = (4 * (n_sys_qubits + n_env_qubits) as u128).saturating_sub(1);
    let inter: u128 = interaction_terms.iter().map(|&(a, b)| a as u128 * b as u128).sum();
    (per_s * n_sys_terms as u128 + per_e * n_env_terms as u128 + per_se * inter) * n_steps as u128
}

/// `N_G` for expansions already built.
pub fn gate_count_for(
    system: &PauliExpansion,
    environment: &PauliExpansion,
    interactions: &[InteractionTerm],
    n_steps: u64,
) -> u128 {
    let pairs: Vec<(u64, u64)> = interactions
        .iter()
        .map(|t| (t.system.len() as u64, t.environment.len() as u64))
        .collect();
    gate_count(
        system.n_qubits as u64,
        environment.n_qubits as u64,
        system.len() as u64,
        environment.len() as u64,
        &pairs,
        n_steps,
    )
}

fn check_pos(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

/// `ε ≈ N_terms ‖H̃‖² t² / N_T`.
pub fn trotter_error_estimate(n_terms: u64, norm_h: f64, t: f64, n_steps: u64) -> Result<f64> {
    if n_terms == 0 || n_steps == 0 {
        return Err(Error::param("n_terms", "term and step counts must be positive"));
    }
    check_pos("norm_h", norm_h)?;
    check_pos("t", t)?;
    Ok(n_terms as f64 * norm_h * norm_h * t * t / n_steps as f64)
}

/// Smallest `N_T` with estimate at most `eps`.
pub fn trotter_steps_for(n_terms: u64, norm_h: f64, t: f64, eps: f64) -> Result<u64> {
    check_pos("eps", eps)?;
    let one = trotter_error_estimate(n_terms, norm_h, t, 1)?;
    let n = (one / eps).ceil();
    if n > u64::MAX as f64 {
        return Err(Error::param("eps", "step count overflows"));
    }
    Ok((n as u64).max(1))
}

/// Encoded versus original operator norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundReport {
    pub encoded: Vec<f64>,
    pub original: Vec<f64>,
}

impl NormBoundReport {
    pub fn max_excess(&self) -> f64 {
        self.encoded
            .iter()
            .zip(&self.original)
            .map(|(e, o)| e - o)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks `‖B̃_β‖ ≤ ‖B_β‖ + 1e-10` for every `β`.
pub fn norm_bound_check(original: &[CMatrix], encoded: &[SparseMatrix]) -> Result<NormBoundReport> {
    if original.len() != encoded.len() {
        return Err(Error::DimensionMismatch("β indexing differs".into()));
    }
    let original: Vec<f64> = original.iter().map(op_norm).collect();
    let encoded: Vec<f64> = encoded.iter().map(sparse_op_norm).collect();
    for (i, (&e, &o)) in encoded.iter().zip(&original).enumerate() {
        if e > o + 1e-10 {
            return Err(Error::NormBoundViolated { index: i, encoded: e, original: o });
        }
    }
    Ok(NormBoundReport { encoded, original })
}

/// Summary printed by the resources experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub order: u32,
    pub n_omega: u64,
    pub n_beta: u64,
    /// Decimal `d_E` bound.
    pub d_max: String,
    pub n_qubits_env: u64,
    /// Filled when a concrete model was decomposed.
    pub concrete: Option<ConcreteResources>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteResources {
    pub n_sys_qubits: u64,
    pub n_env_qubits: u64,
    pub n_terms: u64,
    pub norm_h: f64,
    pub t: f64,
    pub target_error: f64,
    pub n_trotter: u64,
    pub n_gates: u128,
    pub trotter_error: f64,
}

/// Dimension and qubit count of the order-`n` encoding.
pub fn resource_report(order: u32, n_omega: u64, n_beta: u64) -> Result<ResourceReport> {
    let b = dimension_bound(order, n_omega, n_beta)?;
    Ok(ResourceReport {
        order,
        n_omega,
        n_beta,
        d_max: b.d_max.to_string(),
        n_qubits_env: b.n_qubits,
        concrete: None,
    })
}

/// Term counts, Trotter steps for `target_error` and gates of a concrete
/// model given by `H_S`, `H̃_E` and the couplings `(A_β, B̃_β)`.
pub fn concrete_resources(
    h_sys: &CMatrix,
    h_env: &CMatrix,
    couplings: &[(CMatrix, CMatrix)],
    norm_h: f64,
    t: f64,
    target_error: f64,
) -> Result<ConcreteResources> {
    let sys = pauli_decompose(h_sys)?;
    let env = pauli_decompose(h_env)?;
    let mut inter = Vec::with_capacity(couplings.len());
    for (a, b) in couplings {
        inter.push(InteractionTerm { system: pauli_decompose(a)?, environment: pauli_decompose(b)? });
    }
    let n_terms = sys.len() as u64
        + env.len() as u64
        + inter.iter().map(|t| (t.system.len() * t.environment.len()) as u64).sum::<u64>();
    let n_trotter = trotter_steps_for(n_terms, norm_h, t, target_error)?;
    Ok(ConcreteResources {
        n_sys_qubits: sys.n_qubits as u64,
        n_env_qubits: env.n_qubits as u64,
        n_terms,
        norm_h,
        t,
        target_error,
        n_trotter,
        n_gates: gate_count_for(&sys, &env, &inter, n_trotter),
        trotter_error: trotter_error_estimate(n_terms, norm_h, t, n_trotter)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, unitary_propagator};
    use crate::testutil::random_hermitian;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coeff(e: &PauliExpansion, s: &str) -> f64 {
        let p = PauliString::parse(s).unwrap();
        e.terms.iter().find(|(q, _)| *q == p).map_or(0.0, |t| t.1)
    }

    #[test]
    fn number_operator() {
        let n = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        let e = pauli_decompose(&n).unwrap();
        assert_eq!(e.len(), 2);
        assert!((coeff(&e, "I") - 0.5).abs() < 1e-15);
        assert!((coeff(&e, "Z") + 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_single_term() {
        let e = pauli_decompose(&CMatrix::identity(8, 8)).unwrap();
        assert_eq!(e.terms, vec![(PauliString::identity(3), 1.0)]);
    }

    #[test]
    fn letters_and_big_endian_order() {
        let y = PauliString::parse("Y").unwrap().to_matrix();
        assert_eq!(y, CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]));
        let xi = PauliString::parse("XI").unwrap().to_matrix();
        let x = PauliString::parse("X").unwrap().to_matrix();
        assert_eq!(xi, kron(&x, &CMatrix::identity(2, 2)));
        assert_eq!(PauliString::parse("XIZY").unwrap().to_string(), "XIZY");
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn padding_keeps_block() {
        let m = CMatrix::from_row_slice(3, 3, &[c(1.0), c(2.0), ZERO, c(2.0), c(0.0), c(1.0), ZERO, c(1.0), c(-1.0)]);
        let e = pauli_decompose(&m).unwrap();
        assert_eq!(e.n_qubits, 2);
        let r = e.to_matrix();
        assert!((r.view((0, 0), (3, 3)) - &m).norm() < 1e-12);
        assert!(r.row(3).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(pauli_decompose(&m), Err(Error::NotHermitian(_))));
    }

    proptest! {
        #[test]
        fn decomposition_resums(seed in any::<u64>(), n in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_hermitian(1 << n, &mut rng);
            let e = pauli_decompose(&m).unwrap();
            prop_assert!((e.to_matrix() - &m).norm() < 1e-12);
        }
    }

    fn single(s: &str, f: f64) -> PauliExpansion {
        let p = PauliString::parse(s).unwrap();
        PauliExpansion { n_qubits: p.n_qubits(), terms: vec![(p, f)] }
    }

    fn empty(n: usize) -> PauliExpansion {
        PauliExpansion { n_qubits: n, terms: vec![] }
    }

    #[test]
    fn single_term_exact() {
        let sys = single("Z", 0.7);
        for n in [1, 3, 10] {
            let u = trotter_sequence(&sys, &empty(0), &[], 0.0, 2.3, n).unwrap().to_unitary();
            let want = unitary_propagator(&sys.to_matrix(), 2.3);
            assert!((u - want).norm() < 1e-12);
        }
    }

    #[test]
    fn factor_order_and_angles() {
        let inter = InteractionTerm { system: single("X", 1.0), environment: single("Y", 2.0) };
        let seq = trotter_sequence(&single("Z", 0.5), &single("X", 0.25), &[inter], 0.1, 1.0, 4).unwrap();
        let groups: Vec<_> = seq.step.iter().map(|f| f.group).collect();
        assert_eq!(groups, vec![FactorGroup::System, FactorGroup::Environment, FactorGroup::Interaction]);
        let names: Vec<_> = seq.step.iter().map(|f| f.pauli.to_string()).collect();
        assert_eq!(names, vec!["ZI", "IX", "XY"]);
        assert!((seq.step[2].angle - 0.1 * 2.0 / 4.0).abs() < 1e-15);
        assert_eq!(seq.factors().count(), 12);
    }

    #[test]
    fn empty_interaction_factorises() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hs = random_hermitian(2, &mut rng);
        let he = random_hermitian(4, &mut rng);
        let (es, ee) = (pauli_decompose(&hs).unwrap(), pauli_decompose(&he).unwrap());
        let seq = trotter_sequence(&es, &ee, &[], 0.0, 1.0, 3).unwrap();
        let us = trotter_sequence(&es, &empty(0), &[], 0.0, 1.0, 3).unwrap().to_unitary();
        let ue = trotter_sequence(&empty(0), &ee, &[], 0.0, 1.0, 3).unwrap().to_unitary();
        let want = kron(&us, &ue);
        assert!((seq.to_unitary() - want).norm() < 1e-10);
    }

    #[test]
    fn x_plus_z_first_order() {
        let h = pauli_decompose(&(PauliString::parse("X").unwrap().to_matrix() + PauliString::parse("Z").unwrap().to_matrix())).unwrap();
        let exact = unitary_propagator(&h.to_matrix(), 1.0);
        let err = |n| op_norm(&(trotter_sequence(&h, &empty(0), &[], 0.0, 1.0, n).unwrap().to_unitary() - &exact));
        let ratio = err(8) / err(16);
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn gate_formulas() {
        assert_eq!((cnot_count(1), single_qubit_count(1)), (0, 3));
        assert_eq!(gate_count(1, 1, 1, 1, &[], 1), 6);
        assert_eq!(gate_count(2, 3, 4, 5, &[(2, 3)], 7), ((7 * 4 + 11 * 5 + 19 * 6) * 7) as u128);
    }

    #[test]
    fn error_estimate_scaling() {
        let e1 = trotter_error_estimate(10, 2.0, 1.0, 8).unwrap();
        assert!((trotter_error_estimate(10, 2.0, 1.0, 16).unwrap() - e1 / 2.0).abs() < 1e-15);
        assert!((trotter_error_estimate(10, 2.0, 2.0, 8).unwrap() - 4.0 * e1).abs() < 1e-12);
        let n = trotter_steps_for(10, 2.0, 1.0, e1).unwrap();
        assert_eq!(n, 8);
        assert!(trotter_error_estimate(0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn headline_qubits() {
        assert_eq!(resource_report(2, 1_000_000, 1000).unwrap().n_qubits_env, 30);
        let r = resource_report(2, 401, 1).unwrap();
        assert_eq!((r.d_max.as_str(), r.n_qubits_env), ("402", 9));
        let r = resource_report(4, 2, 1).unwrap();
        assert_eq!((r.d_max.as_str(), r.n_qubits_env), ("7", 3));
    }

    #[test]
    fn norm_bound_cases() {
        let b = CMatrix::from_row_slice(2, 2, &[ZERO, c(0.3), c(0.3), ZERO]);
        let r = norm_bound_check(std::slice::from_ref(&b), &[SparseMatrix::from_dense(&b, 0.0)]).unwrap();
        assert!((r.encoded[0] - 0.3).abs() < 1e-12 && r.max_excess().abs() < 1e-12);
        let big = SparseMatrix::from_dense(&(b.clone() * c(2.0)), 0.0);
        assert!(matches!(norm_bound_check(&[b], &[big]), Err(Error::NormBoundViolated { index: 0, .. })));
    }
}
