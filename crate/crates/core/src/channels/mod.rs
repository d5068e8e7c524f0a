//! Quantum channels and their Choi–Jamiołkowski states.
//!
//! The maximally entangled reference state is always taken in the canonical
//! basis. For a bipartite system S = AB the CJ state lives on A, B, A', B'
//! (in that order), so its subsystem dims are `[d_A, d_B, d_A, d_B]`.

mod file;

pub use file::{parse_channel_file, ChannelFile};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    kron, partial_trace, permute_subsystems, ComplexMatrix, DensityMatrix, ONE, ZERO,
};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    Unitary(ComplexMatrix),
    Kraus(Vec<ComplexMatrix>),
}

/// A CPT map on a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kind: ChannelKind,
    dim: usize,
}

impl Channel {
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square, got {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        let defect = u.unitarity_defect();
        if defect > tolerance::global().unitary {
            return Err(Error::NotUnitary { defect });
        }
        let dim = u.rows();
        Ok(Self {
            kind: ChannelKind::Unitary(u),
            dim,
        })
    }

    pub fn kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = ops
            .first()
            .ok_or_else(|| Error::BadDimension("empty Kraus list".into()))?
            .rows();
        if ops.iter().any(|k| k.dim() != (dim, dim)) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must all be square with equal size".into(),
            ));
        }
        let ch = Self {
            kind: ChannelKind::Kraus(ops),
            dim,
        };
        let defect = ch.completeness_defect();
        if defect > tolerance::global().kraus_completeness {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kind: ChannelKind::Unitary(ComplexMatrix::identity(dim)),
            dim,
        }
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self.kind, ChannelKind::Unitary(_))
    }

    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match &self.kind {
            ChannelKind::Unitary(u) => Some(u),
            ChannelKind::Kraus(_) => None,
        }
    }

    /// Kraus representation; a unitary becomes a single operator.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        match &self.kind {
            ChannelKind::Unitary(u) => vec![u.clone()],
            ChannelKind::Kraus(ops) => ops.clone(),
        }
    }

    /// max |Σ K†K - 1| entrywise.
    pub fn completeness_defect(&self) -> f64 {
        match &self.kind {
            ChannelKind::Unitary(u) => u.unitarity_defect(),
            ChannelKind::Kraus(ops) => {
                let mut s = ComplexMatrix::zeros(self.dim, self.dim);
                for k in ops {
                    s += &(&k.adjoint() * k);
                }
                s.max_abs_diff(&ComplexMatrix::identity(self.dim))
            }
        }
    }

    /// Applies the channel to a bare matrix (no validation).
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "channel on dimension {} applied to {}x{} matrix",
                self.dim,
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(match &self.kind {
            ChannelKind::Unitary(u) => &(u * rho) * &u.adjoint(),
            ChannelKind::Kraus(ops) => {
                let mut out = ComplexMatrix::zeros(self.dim, self.dim);
                for k in ops {
                    out += &(&(k * rho) * &k.adjoint());
                }
                out
            }
        })
    }
}

/// Choi–Jamiołkowski state of a bipartite channel, ordered A, B, A', B'.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    state: DensityMatrix,
    d_a: usize,
    d_b: usize,
}

impl ChoiState {
    /// Wraps a state over `[d_A, d_B, d_A, d_B]`, checking that its reduced
    /// state on the reference A'B' is maximally mixed.
    pub fn from_state(state: DensityMatrix) -> Result<Self> {
        let dims = state.subsystem_dims().to_vec();
        if dims.len() != 4 || dims[0] != dims[2] || dims[1] != dims[3] {
            return Err(Error::DimensionMismatch(format!(
                "CJ state needs dims [d_A, d_B, d_A, d_B], got {dims:?}"
            )));
        }
        let d_s = dims[0] * dims[1];
        let reference = partial_trace(&state, &[2, 3])?;
        let expected = ComplexMatrix::identity(d_s).scale_real(1.0 / d_s as f64);
        let defect = reference.matrix().max_abs_diff(&expected);
        if defect > tolerance::global().trace {
            return Err(Error::InvariantViolation(format!(
                "reference marginal of CJ state deviates from 1/d by {defect:.3e}"
            )));
        }
        Ok(Self {
            state,
            d_a: dims[0],
            d_b: dims[1],
        })
    }

    pub(crate) fn from_state_unchecked(state: DensityMatrix) -> Self {
        let dims = state.subsystem_dims();
        let (d_a, d_b) = (dims[0], dims[1]);
        Self { state, d_a, d_b }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn into_state(self) -> DensityMatrix {
        self.state
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn purity(&self) -> f64 {
        self.state.purity()
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() < tolerance::global().purity
    }
}

/// (1/√d) Σ_j |j⟩|j⟩ as a vector of length d².
pub fn max_entangled_vector(d: usize) -> Vec<Complex64> {
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = vec![ZERO; d * d];
    for j in 0..d {
        psi[j * d + j] = amp;
    }
    psi
}

/// |Φ⟩⟨Φ| on S ⊗ S' with dim(S) = `d`, subsystem dims `[d, d]`.
pub fn max_entangled_state(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::BadDimension(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let psi = max_entangled_vector(d);
    Ok(DensityMatrix::from_parts_unchecked(
        ComplexMatrix::outer(&psi, &psi),
        vec![d, d],
    ))
}

/// |Φ_SS'⟩⟨Φ_SS'| for S = AB, subsystem dims `[d_A, d_B, d_A, d_B]`.
pub fn max_entangled_bipartite(d_a: usize, d_b: usize) -> Result<DensityMatrix> {
    if d_a == 0 || d_b == 0 {
        return Err(Error::BadDimension(format!("local dims {d_a}, {d_b}")));
    }
    max_entangled_state(d_a * d_b)?.with_dims(vec![d_a, d_b, d_a, d_b])
}

/// Applies a channel to a state and validates the output.
pub fn apply(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply_matrix(rho.matrix())?;
    DensityMatrix::new(out, rho.subsystem_dims().to_vec())
}

/// Applies `ch ⊗ 1` where `ch` acts on the subsystems listed in `targets`.
/// Targets are taken in the order given; the remaining subsystems are left
/// untouched.
pub fn apply_to_subsystems(
    ch: &Channel,
    rho: &DensityMatrix,
    targets: &[usize],
) -> Result<DensityMatrix> {
    let dims = rho.subsystem_dims();
    let count = dims.len();
    let mut seen = vec![false; count];
    for &t in targets {
        if t >= count {
            return Err(Error::BadSubsystemIndex { index: t, count });
        }
        if seen[t] {
            return Err(Error::BadPermutation(targets.to_vec()));
        }
        seen[t] = true;
    }
    let target_dim: usize = targets.iter().map(|&t| dims[t]).product();
    if target_dim != ch.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel dimension {} but target subsystems span {target_dim}",
            ch.dim()
        )));
    }
    let mut order = targets.to_vec();
    order.extend((0..count).filter(|&i| !seen[i]));
    let mut inverse = vec![0; count];
    for (new, &old) in order.iter().enumerate() {
        inverse[old] = new;
    }

    let front = permute_subsystems(rho, &order)?;
    let rest_dim = rho.dim() / target_dim;
    let extended = extend_with_identity(ch, rest_dim);
    let evolved = DensityMatrix::from_parts_unchecked(
        extended.apply_matrix(front.matrix())?,
        front.subsystem_dims().to_vec(),
    );
    let back = permute_subsystems(&evolved, &inverse)?;
    DensityMatrix::new(back.into_matrix(), dims.to_vec())
}

/// ch ⊗ 1_{rest}
fn extend_with_identity(ch: &Channel, rest_dim: usize) -> Channel {
    let id = ComplexMatrix::identity(rest_dim);
    let dim = ch.dim() * rest_dim;
    let kind = match ch.kind() {
        ChannelKind::Unitary(u) => ChannelKind::Unitary(kron(u, &id)),
        ChannelKind::Kraus(ops) => ChannelKind::Kraus(ops.iter().map(|k| kron(k, &id)).collect()),
    };
    Channel { kind, dim }
}

/// ρ^CJ = (E ⊗ 1)(|Φ⟩⟨Φ|) over A, B, A', B'.
pub fn choi_state(ch: &Channel, d_a: usize, d_b: usize) -> Result<ChoiState> {
    let d_s = d_a * d_b;
    if d_s != ch.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel dimension {} but d_A·d_B = {d_s}",
            ch.dim()
        )));
    }
    let dims = vec![d_a, d_b, d_a, d_b];
    let ops = ch.kraus_operators();
    let mut rho = ComplexMatrix::zeros(d_s * d_s, d_s * d_s);
    for k in &ops {
        // (K ⊗ 1)|Φ⟩ has amplitude K[s, j]/√d at |s⟩|j⟩.
        let scale = 1.0 / (d_s as f64).sqrt();
        let mut v = vec![ZERO; d_s * d_s];
        for s in 0..d_s {
            for j in 0..d_s {
                v[s * d_s + j] = k[(s, j)] * scale;
            }
        }
        rho += &ComplexMatrix::outer(&v, &v);
    }
    let state = DensityMatrix::new(rho, dims)?;
    Ok(ChoiState::from_state_unchecked(state))
}

/// E_a ⊗ E_b. A unitary paired with a Kraus channel is promoted to a single
/// Kraus operator.
pub fn tensor_channels(a: &Channel, b: &Channel) -> Channel {
    let dim = a.dim() * b.dim();
    let kind = match (a.kind(), b.kind()) {
        (ChannelKind::Unitary(ua), ChannelKind::Unitary(ub)) => ChannelKind::Unitary(kron(ua, ub)),
        _ => {
            let ka = a.kraus_operators();
            let kb = b.kraus_operators();
            ChannelKind::Kraus(
                ka.iter()
                    .flat_map(|x| kb.iter().map(move |y| kron(x, y)))
                    .collect(),
            )
        }
    };
    Channel { kind, dim }
}

/// outer ∘ inner
pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch(format!(
            "composing channels on dimensions {} and {}",
            outer.dim(),
            inner.dim()
        )));
    }
    let kind = match (outer.kind(), inner.kind()) {
        (ChannelKind::Unitary(u), ChannelKind::Unitary(v)) => ChannelKind::Unitary(u * v),
        _ => {
            let ko = outer.kraus_operators();
            let ki = inner.kraus_operators();
            ChannelKind::Kraus(
                ko.iter()
                    .flat_map(|o| ki.iter().map(move |i| o * i))
                    .collect(),
            )
        }
    };
    Ok(Channel {
        kind,
        dim: outer.dim(),
    })
}

/// Standard two-qubit gates in the composite basis |AB⟩.
pub mod gates {
    use super::*;

    /// |kℓ⟩ → |ℓk⟩ on C^d ⊗ C^d.
    pub fn swap(d: usize) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(d * d, d * d);
        for k in 0..d {
            for l in 0..d {
                u[(l * d + k, k * d + l)] = ONE;
            }
        }
        u
    }

    /// Controlled-NOT with A as control, computational basis (|0⟩, |1⟩).
    pub fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    /// |21⟩⟨12| + i(|11⟩⟨21| + |12⟩⟨11| + |22⟩⟨22|), labels 1, 2 mapped to
    /// indices 0, 1. Maximally correlated but not locally equivalent to swap.
    pub fn non_swap_maximal() -> ComplexMatrix {
        let idx = |a: usize, b: usize| (a - 1) * 2 + (b - 1);
        let i = Complex64::new(0.0, 1.0);
        let mut u = ComplexMatrix::zeros(4, 4);
        u[(idx(2, 1), idx(1, 2))] = ONE;
        u[(idx(1, 1), idx(2, 1))] = i;
        u[(idx(1, 2), idx(1, 1))] = i;
        u[(idx(2, 2), idx(2, 2))] = i;
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, trace_distance};
    use crate::random::{random_density_matrix, random_kraus_channel, seeded};

    fn amplitude_damper() -> Channel {
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        let k2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        Channel::kraus(vec![k1, k2]).unwrap()
    }

    #[test]
    fn max_entangled_examples() {
        let bell = max_entangled_state(2).unwrap();
        let m = bell.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(i, j)].re - 0.5).abs() < 1e-15);
        }
        let phi4 = max_entangled_state(4).unwrap();
        let marginal = partial_trace(&phi4, &[0]).unwrap();
        let expected = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(marginal.matrix().max_abs_diff(&expected) < 1e-15);
        for d in 2..=5 {
            let psi = max_entangled_vector(d);
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((max_entangled_state(d).unwrap().purity() - 1.0).abs() < 1e-12);
        }
        assert!(max_entangled_state(1).is_err());
    }

    #[test]
    fn apply_examples() {
        let mut rng = seeded(3);
        let rho = random_density_matrix(&[2], &mut rng);
        let same = apply(&Channel::identity(2), &rho).unwrap();
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let excited = DensityMatrix::basis(2, 0).unwrap();
        let ground = DensityMatrix::basis(2, 1).unwrap();
        let decayed = apply(&amplitude_damper(), &excited).unwrap();
        assert!(decayed.matrix().max_abs_diff(ground.matrix()) < 1e-15);

        let flipped = apply(&Channel::unitary(pauli::x()).unwrap(), &excited).unwrap();
        assert!(flipped.matrix().max_abs_diff(ground.matrix()) < 1e-15);

        assert!(matches!(
            apply(&Channel::identity(4), &rho),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn apply_to_subsystems_matches_brute_force() {
        let phi = max_entangled_state(2).unwrap();
        let ch = amplitude_damper();
        let out = apply_to_subsystems(&ch, &phi, &[0]).unwrap();
        // Σ_k Σ_{a b c d} K[a,b] ρ[(b,c),(d,e)] conj(K[f,d]) -> out[(a,c),(f,e)]
        let ks = ch.kraus_operators();
        let rho = phi.matrix();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for k in &ks {
            for a in 0..2 {
                for c in 0..2 {
                    for f in 0..2 {
                        for e in 0..2 {
                            let mut acc = ZERO;
                            for b in 0..2 {
                                for d in 0..2 {
                                    acc +=
                                        k[(a, b)] * rho[(b * 2 + c, d * 2 + e)] * k[(f, d)].conj();
                                }
                            }
                            expected[(a * 2 + c, f * 2 + e)] += acc;
                        }
                    }
                }
            }
        }
        assert!(out.matrix().max_abs_diff(&expected) < 1e-12);

        let unchanged = apply_to_subsystems(
            &Channel::identity(4),
            &phi.clone().with_dims(vec![2, 2]).unwrap(),
            &[0, 1],
        );
        assert!(unchanged.is_ok());
    }

    #[test]
    fn apply_to_non_leading_subsystem() {
        let mut rng = seeded(8);
        let a = random_density_matrix(&[2], &mut rng);
        let b = random_density_matrix(&[3], &mut rng);
        let ch = random_kraus_channel(3, 2, &mut rng);
        let out = apply_to_subsystems(&ch, &a.tensor(&b), &[1]).unwrap();
        let expected = a.tensor(&apply(&ch, &b).unwrap());
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-13);
    }

    #[test]
    fn swap_on_s_gives_pure_cj_state() {
        let phi = max_entangled_bipartite(2, 2).unwrap();
        let swap = Channel::unitary(gates::swap(2)).unwrap();
        let out = apply_to_subsystems(&swap, &phi, &[0, 1]).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choi_of_identity_is_phi() {
        let c = choi_state(&Channel::identity(4), 2, 2).unwrap();
        let phi = max_entangled_bipartite(2, 2).unwrap();
        assert!(c.state().matrix().max_abs_diff(phi.matrix()) < 1e-15);
        assert!(c.is_pure());
    }

    #[test]
    fn choi_matches_apply_to_subsystems() {
        let mut rng = seeded(9);
        let ch = random_kraus_channel(4, 3, &mut rng);
        let c = choi_state(&ch, 2, 2).unwrap();
        let phi = max_entangled_bipartite(2, 2).unwrap();
        let via_apply = apply_to_subsystems(&ch, &phi, &[0, 1]).unwrap();
        assert!(c.state().matrix().max_abs_diff(via_apply.matrix()) < 1e-13);
        assert!(!c.is_pure());
        assert!(ChoiState::from_state(c.state().clone()).is_ok());
    }

    #[test]
    fn product_channel_choi_is_permuted_tensor() {
        let mut rng = seeded(10);
        let ea = random_kraus_channel(2, 2, &mut rng);
        let eb = random_kraus_channel(2, 2, &mut rng);
        let joint = choi_state(&tensor_channels(&ea, &eb), 2, 2).unwrap();
        let ca = choi_state(&ea, 2, 1).unwrap();
        let cb = choi_state(&eb, 2, 1).unwrap();
        // ρ_A over [A, A'] ⊗ ρ_B over [B, B'] → reorder to A, B, A', B'
        let ta = ca.state().clone().with_dims(vec![2, 2]).unwrap();
        let tb = cb.state().clone().with_dims(vec![2, 2]).unwrap();
        let product = ta.tensor(&tb);
        let permuted = permute_subsystems(&product, &[0, 2, 1, 3]).unwrap();
        assert!(trace_distance(joint.state(), &permuted).unwrap() < 1e-10);
    }

    #[test]
    fn tensor_and_compose() {
        let id4 = tensor_channels(&Channel::identity(2), &Channel::identity(2));
        assert!(id4.is_unitary());
        assert_eq!(id4.as_unitary().unwrap(), &ComplexMatrix::identity(4));

        let e = amplitude_damper();
        let ee = tensor_channels(&e, &e);
        assert_eq!(ee.kraus_operators().len(), 4);
        assert!(ee.completeness_defect() < 1e-15);

        let mut rng = seeded(4);
        let ch = random_kraus_channel(4, 2, &mut rng);
        let c1 = choi_state(&compose(&Channel::identity(4), &ch).unwrap(), 2, 2).unwrap();
        let c2 = choi_state(&ch, 2, 2).unwrap();
        assert!(c1.state().matrix().max_abs_diff(c2.state().matrix()) < 1e-12);

        let u = crate::random::random_unitary(4, &mut rng);
        let uu = compose(
            &Channel::unitary(u.clone()).unwrap(),
            &Channel::unitary(u.adjoint()).unwrap(),
        )
        .unwrap();
        let c = choi_state(&uu, 2, 2).unwrap();
        let phi = max_entangled_bipartite(2, 2).unwrap();
        assert!(c.state().matrix().max_abs_diff(phi.matrix()) < 1e-10);

        assert!(compose(&Channel::identity(2), &ch).is_err());
    }

    #[test]
    fn channel_validation() {
        let not_unitary = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            Channel::unitary(not_unitary.clone()),
            Err(Error::NotUnitary { .. })
        ));
        assert!(matches!(
            Channel::kraus(vec![not_unitary]),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(Channel::kraus(vec![]).is_err());
    }

    #[test]
    fn gate_definitions_are_unitary() {
        assert!(gates::swap(3).unitarity_defect() < 1e-15);
        assert!(gates::cnot().unitarity_defect() < 1e-15);
        assert!(gates::non_swap_maximal().unitarity_defect() < 1e-15);
    }
}
