//! Lindblad generators with a rate matrix and their time evolution.
//!
//! ```text
//! L(ρ) = -i[H, ρ] + Σ_jk a_jk ( L_k ρ L_j† - ½{L_j† L_k, ρ} )
//! ```
//!
//! Evolution uses classic RK4 with step-doubling error control. CJ-state
//! trajectories evolve `L ⊗ 1` on S ⊗ S' starting from |Φ⟩⟨Φ|.

use num_complex::Complex64;

use crate::channels::{max_entangled_state, ChoiState};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, kron, ComplexMatrix, DensityMatrix, I};
use crate::tolerance;

#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: ComplexMatrix,
    jump_ops: Vec<ComplexMatrix>,
    rates: ComplexMatrix,
    dims: Vec<usize>,
    // H - (i/2) Σ a_jk L_j† L_k
    effective: ComplexMatrix,
    jump_adjoints: Vec<ComplexMatrix>,
}

impl LindbladGenerator {
    /// `dims` is the subsystem split of the space the generator acts on.
    pub fn new(
        hamiltonian: ComplexMatrix,
        jump_ops: Vec<ComplexMatrix>,
        rates: ComplexMatrix,
        dims: Vec<usize>,
    ) -> Result<Self> {
        let tol = tolerance::global();
        let n = hamiltonian.rows();
        if !hamiltonian.is_square() || dims.iter().product::<usize>() != n {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian {}x{} with subsystem dims {dims:?}",
                hamiltonian.rows(),
                hamiltonian.cols()
            )));
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > tol.hermitian {
            return Err(Error::NotHermitian { defect });
        }
        if jump_ops.iter().any(|l| l.dim() != (n, n)) {
            return Err(Error::DimensionMismatch(
                "jump operators must match the Hamiltonian dimension".into(),
            ));
        }
        let m = jump_ops.len();
        if m > 0 {
            if rates.dim() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "{m} jump operators but a {}x{} rate matrix",
                    rates.rows(),
                    rates.cols()
                )));
            }
            let defect = rates.hermiticity_defect();
            if defect > tol.hermitian {
                return Err(Error::NotHermitian { defect });
            }
            let min = *hermitian_eigenvalues(&rates)?.last().expect("non-empty");
            if min < -tol.negative_eigenvalue {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
        }

        let jump_adjoints: Vec<ComplexMatrix> = jump_ops.iter().map(|l| l.adjoint()).collect();
        let mut effective = hamiltonian.clone();
        let half_i = I * 0.5;
        for j in 0..m {
            for k in 0..m {
                let a = rates[(j, k)];
                if a != Complex64::new(0.0, 0.0) {
                    effective.axpy(-half_i * a, &(&jump_adjoints[j] * &jump_ops[k]));
                }
            }
        }
        Ok(Self {
            hamiltonian,
            jump_ops,
            rates,
            dims,
            effective,
            jump_adjoints,
        })
    }

    /// Builds a generator from a real rate matrix.
    pub fn with_real_rates(
        hamiltonian: ComplexMatrix,
        jump_ops: Vec<ComplexMatrix>,
        rates: &[Vec<f64>],
        dims: Vec<usize>,
    ) -> Result<Self> {
        if jump_ops.is_empty() {
            return Self::new(hamiltonian, jump_ops, empty_rates(), dims);
        }
        let rows: Vec<&[f64]> = rates.iter().map(Vec::as_slice).collect();
        Self::new(
            hamiltonian,
            jump_ops,
            ComplexMatrix::from_real_rows(&rows)?,
            dims,
        )
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jump_ops(&self) -> &[ComplexMatrix] {
        &self.jump_ops
    }

    pub fn rates(&self) -> &ComplexMatrix {
        &self.rates
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    /// The same generator acting as `L ⊗ 1` on an appended reference space
    /// with the given subsystem dims.
    pub fn extend_with_reference(&self, reference_dims: &[usize]) -> Result<Self> {
        let r: usize = reference_dims.iter().product();
        let id = ComplexMatrix::identity(r);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(reference_dims);
        Self::new(
            kron(&self.hamiltonian, &id),
            self.jump_ops.iter().map(|l| kron(l, &id)).collect(),
            self.rates.clone(),
            dims,
        )
    }

    /// L(ρ)
    pub fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "generator on dimension {} applied to {}x{} matrix",
                self.dim(),
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(self.rhs_unchecked(rho))
    }

    fn rhs_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h_rho = &self.effective * rho;
        let rho_h = rho * &self.effective.adjoint();
        let mut out = (&h_rho - &rho_h).scale(-I);
        let m = self.jump_ops.len();
        if m == 0 {
            return out;
        }
        let l_rho: Vec<ComplexMatrix> = self.jump_ops.iter().map(|l| l * rho).collect();
        for j in 0..m {
            let mut acc: Option<ComplexMatrix> = None;
            for (k, x) in l_rho.iter().enumerate() {
                let a = self.rates[(j, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                match acc.as_mut() {
                    Some(y) => y.axpy(a, x),
                    None => acc = Some(x.scale(a)),
                }
            }
            if let Some(y) = acc {
                out += &(&y * &self.jump_adjoints[j]);
            }
        }
        out
    }
}

fn empty_rates() -> ComplexMatrix {
    // Stand-in for a 0×0 matrix; `new` ignores it when there are no jumps.
    ComplexMatrix::zeros(1, 1)
}

impl LindbladGenerator {
    /// Hamiltonian-only generator.
    pub fn unitary(hamiltonian: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let tol = tolerance::global();
        let defect = hamiltonian.hermiticity_defect();
        if defect > tol.hermitian {
            return Err(Error::NotHermitian { defect });
        }
        if !hamiltonian.is_square() || dims.iter().product::<usize>() != hamiltonian.rows() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian with dims {dims:?}"
            )));
        }
        Ok(Self {
            effective: hamiltonian.clone(),
            hamiltonian,
            jump_ops: Vec::new(),
            rates: empty_rates(),
            dims,
            jump_adjoints: Vec::new(),
        })
    }
}

/// L(ρ) as a free function.
pub fn lindblad_rhs(gen: &LindbladGenerator, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    gen.rhs(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            t_final: 0.0,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
            initial_step: 1e-3,
        }
    }
}

impl EvolutionConfig {
    pub fn until(t_final: f64) -> Self {
        Self {
            t_final,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!(
                "t_final must be >= 0, got {}",
                self.t_final
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.initial_step > 0.0) {
            return Err(Error::Config(
                "tolerances and initial step must be positive".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Adaptive RK4 integration state. The raw state is never renormalised, so
/// checkpoints along one trajectory do not perturb later ones.
#[derive(Debug, Clone)]
pub struct Integrator<'g> {
    gen: &'g LindbladGenerator,
    rho: ComplexMatrix,
    t: f64,
    h: f64,
    steps: usize,
    cfg: EvolutionConfig,
}

impl<'g> Integrator<'g> {
    pub fn new(
        gen: &'g LindbladGenerator,
        rho0: &DensityMatrix,
        cfg: EvolutionConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if rho0.subsystem_dims() != gen.subsystem_dims() {
            return Err(Error::DimensionMismatch(format!(
                "state dims {:?} but generator dims {:?}",
                rho0.subsystem_dims(),
                gen.subsystem_dims()
            )));
        }
        Ok(Self {
            gen,
            rho: rho0.matrix().clone(),
            t: 0.0,
            h: cfg.initial_step,
            steps: 0,
            cfg,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn rk4(&self, y: &ComplexMatrix, h: f64) -> ComplexMatrix {
        let g = self.gen;
        let k1 = g.rhs_unchecked(y);
        let mut tmp = y.clone();
        tmp.axpy(Complex64::new(h / 2.0, 0.0), &k1);
        let k2 = g.rhs_unchecked(&tmp);
        let mut tmp = y.clone();
        tmp.axpy(Complex64::new(h / 2.0, 0.0), &k2);
        let k3 = g.rhs_unchecked(&tmp);
        let mut tmp = y.clone();
        tmp.axpy(Complex64::new(h, 0.0), &k3);
        let k4 = g.rhs_unchecked(&tmp);
        let mut out = y.clone();
        out.axpy(Complex64::new(h / 6.0, 0.0), &k1);
        out.axpy(Complex64::new(h / 3.0, 0.0), &k2);
        out.axpy(Complex64::new(h / 3.0, 0.0), &k3);
        out.axpy(Complex64::new(h / 6.0, 0.0), &k4);
        out
    }

    /// Integrates forward to `t_target`, landing on it exactly.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        if t_target < self.t {
            return Err(Error::Config(format!(
                "cannot integrate backwards from {} to {t_target}",
                self.t
            )));
        }
        while self.t < t_target {
            if self.steps >= self.cfg.max_steps {
                return Err(Error::StepLimitExceeded {
                    max_steps: self.cfg.max_steps,
                    t_target,
                });
            }
            self.steps += 1;
            let remaining = t_target - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };

            let full = self.rk4(&self.rho, h);
            let half = self.rk4(&self.rk4(&self.rho, h / 2.0), h / 2.0);
            let err = (&half - &full).frobenius_norm() / 15.0;
            let allowed = self.cfg.abs_tol + self.cfg.rel_tol * half.frobenius_norm();
            if err <= allowed {
                self.rho = half;
                self.t = if last { t_target } else { self.t + h };
                if err < allowed / 32.0 && !last {
                    self.h *= 2.0;
                }
            } else {
                self.h = h / 2.0;
                if self.h < f64::EPSILON * self.t.max(1.0) {
                    return Err(Error::StepLimitExceeded {
                        max_steps: self.steps,
                        t_target,
                    });
                }
            }
        }
        Ok(())
    }

    /// Validated copy of the current state: re-Hermitised, drift-checked,
    /// trace-renormalised and positivity-checked.
    pub fn state(&self) -> Result<DensityMatrix> {
        let tol = tolerance::global();
        let herm = self.rho.hermitian_part();
        let tr = herm.trace().re;
        let drift = (tr - 1.0).abs();
        if drift > tol.evolution_trace_drift {
            return Err(Error::TraceDrift { drift, t: self.t });
        }
        let normalised = herm.scale_real(1.0 / tr);
        let min = *hermitian_eigenvalues(&normalised)?
            .last()
            .expect("non-empty");
        if min < -tol.evolution_negative_eigenvalue {
            return Err(Error::PositivityLoss {
                min_eigenvalue: min,
                t: self.t,
            });
        }
        DensityMatrix::with_positivity_tolerance(
            normalised,
            self.gen.subsystem_dims().to_vec(),
            tol.evolution_negative_eigenvalue,
        )
    }

    /// The raw (unnormalised) state, for diagnostics.
    pub fn raw_state(&self) -> &ComplexMatrix {
        &self.rho
    }
}

/// ρ(t_final) = e^{t L} ρ₀
pub fn evolve(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    cfg: &EvolutionConfig,
) -> Result<DensityMatrix> {
    let mut it = Integrator::new(gen, rho0, *cfg)?;
    it.advance_to(cfg.t_final)?;
    it.state()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::Config(
            "checkpoint times must be finite, non-negative and ascending".into(),
        ));
    }
    Ok(())
}

/// States at each of the ascending `times`, from a single trajectory.
pub fn evolve_checkpoints(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    times: &[f64],
    cfg: &EvolutionConfig,
) -> Result<Vec<DensityMatrix>> {
    check_times(times)?;
    let mut it = Integrator::new(gen, rho0, *cfg)?;
    times
        .iter()
        .map(|&t| {
            it.advance_to(t)?;
            it.state()
        })
        .collect()
}

fn choi_setup(gen: &LindbladGenerator) -> Result<(LindbladGenerator, DensityMatrix)> {
    let dims = gen.subsystem_dims().to_vec();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "CJ evolution needs a bipartite generator, got dims {dims:?}"
        )));
    }
    let extended = gen.extend_with_reference(&dims)?;
    let phi =
        max_entangled_state(gen.dim())?.with_dims(vec![dims[0], dims[1], dims[0], dims[1]])?;
    Ok((extended, phi))
}

/// CJ state of e^{t_final L}.
pub fn evolve_choi(gen: &LindbladGenerator, cfg: &EvolutionConfig) -> Result<ChoiState> {
    let mut states = evolve_choi_checkpoints(gen, &[cfg.t_final], cfg)?;
    Ok(states.pop().expect("one checkpoint"))
}

/// CJ states of e^{t L} at each of the ascending `times`.
pub fn evolve_choi_checkpoints(
    gen: &LindbladGenerator,
    times: &[f64],
    cfg: &EvolutionConfig,
) -> Result<Vec<ChoiState>> {
    let (extended, phi) = choi_setup(gen)?;
    evolve_checkpoints(&extended, &phi, times, cfg)?
        .into_iter()
        .map(ChoiState::from_state)
        .collect()
}

/// A CJ trajectory that can be resumed and branched, used by searches that
/// need states at times not known in advance.
#[derive(Debug, Clone)]
pub struct ChoiTrajectory {
    extended: LindbladGenerator,
    phi: DensityMatrix,
    cfg: EvolutionConfig,
}

impl ChoiTrajectory {
    pub fn new(gen: &LindbladGenerator, cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let (extended, phi) = choi_setup(gen)?;
        Ok(Self {
            extended,
            phi,
            cfg: *cfg,
        })
    }

    pub fn start(&self) -> Integrator<'_> {
        Integrator::new(&self.extended, &self.phi, self.cfg).expect("dims checked in new")
    }
}

/// Reads a CJ state out of an integrator built by [`ChoiTrajectory`].
pub fn choi_from(it: &Integrator<'_>) -> Result<ChoiState> {
    ChoiState::from_state(it.state()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::random::{random_density_matrix, seeded};

    fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap()
    }

    fn damping(gamma: f64) -> LindbladGenerator {
        LindbladGenerator::with_real_rates(
            ComplexMatrix::zeros(2, 2),
            vec![sigma_minus()],
            &[vec![gamma]],
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn zero_generator_gives_zero() {
        let gen = LindbladGenerator::with_real_rates(
            ComplexMatrix::zeros(2, 2),
            vec![sigma_minus()],
            &[vec![0.0]],
            vec![2],
        )
        .unwrap();
        let rho = random_density_matrix(&[2], &mut seeded(1));
        assert_eq!(gen.rhs(rho.matrix()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn amplitude_damping_rhs() {
        let gamma = 0.7;
        let excited = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let out = damping(gamma).rhs(&excited).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[-gamma, gamma]);
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let mut rng = seeded(2);
        let h = crate::random::random_hermitian(4, &mut rng);
        let l1 = crate::random::ginibre(4, 4, &mut rng);
        let l2 = crate::random::ginibre(4, 4, &mut rng);
        let gen = LindbladGenerator::with_real_rates(
            h,
            vec![l1, l2],
            &[vec![1.0, 0.3], vec![0.3, 0.5]],
            vec![2, 2],
        )
        .unwrap();
        let rho = random_density_matrix(&[2, 2], &mut rng);
        let out = gen.rhs(rho.matrix()).unwrap();
        assert!(out.trace().norm() < 1e-12);
        assert!(out.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn generator_validation() {
        let bad_rates = LindbladGenerator::with_real_rates(
            ComplexMatrix::zeros(2, 2),
            vec![sigma_minus(), sigma_minus()],
            &[vec![1.0, 2.0], vec![2.0, 1.0]],
            vec![2],
        );
        assert!(matches!(bad_rates, Err(Error::NotPositive { .. })));
        let bad_h = LindbladGenerator::unitary(sigma_minus(), vec![2]);
        assert!(matches!(bad_h, Err(Error::NotHermitian { .. })));
        assert!(damping(1.0).rhs(&ComplexMatrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let rho = random_density_matrix(&[2], &mut seeded(3));
        let out = evolve(&damping(1.0), &rho, &EvolutionConfig::until(0.0)).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn amplitude_damping_population() {
        let gamma = 1.3;
        let excited = DensityMatrix::basis(2, 0).unwrap();
        let out = evolve(
            &damping(gamma),
            &excited,
            &EvolutionConfig::until(1.0 / gamma),
        )
        .unwrap();
        assert!((out.matrix()[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn rabi_oscillation() {
        // H = σx/2: population of |0⟩ is cos²(t/2)
        let gen = LindbladGenerator::unitary(pauli::x().scale_real(0.5), vec![2]).unwrap();
        let rho0 = DensityMatrix::basis(2, 0).unwrap();
        let times = [0.5, 1.0, 2.0, 3.0];
        let states = evolve_checkpoints(&gen, &rho0, &times, &EvolutionConfig::default()).unwrap();
        for (t, s) in times.iter().zip(&states) {
            assert!((s.matrix()[(0, 0)].re - (t / 2.0).cos().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn choi_at_zero_is_phi() {
        let gen = LindbladGenerator::unitary(ComplexMatrix::zeros(4, 4), vec![2, 2]).unwrap();
        let c = evolve_choi(&gen, &EvolutionConfig::until(0.0)).unwrap();
        assert!(c.is_pure());
        assert_eq!(c.state().subsystem_dims(), &[2, 2, 2, 2]);
    }

    #[test]
    fn step_limit_reported() {
        let cfg = EvolutionConfig {
            t_final: 10.0,
            max_steps: 3,
            ..EvolutionConfig::default()
        };
        let rho = DensityMatrix::basis(2, 0).unwrap();
        assert!(matches!(
            evolve(&damping(1.0), &rho, &cfg),
            Err(Error::StepLimitExceeded { .. })
        ));
    }

    #[test]
    fn bad_checkpoints_rejected() {
        let rho = DensityMatrix::basis(2, 0).unwrap();
        let cfg = EvolutionConfig::default();
        assert!(evolve_checkpoints(&damping(1.0), &rho, &[1.0, 0.5], &cfg).is_err());
        assert!(evolve_checkpoints(&damping(1.0), &rho, &[-1.0], &cfg).is_err());
    }
}
