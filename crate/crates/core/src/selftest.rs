//! Embedded invariant suites run by `dyncorr selftest`.
//!
//! Each check reports the worst deviation it saw against a fixed bound. The
//! seed changes the random draws but a correct build passes for any seed.

use std::fmt::Write;

use crate::channels::{
    apply_to_subsystems, choi_state, gates, max_entangled_state, tensor_channels, Channel,
};
use crate::correlation::{
    channel_i_bar, check_fundamental_law, i_bar, is_maximally_correlated, LocalMaps,
};
use crate::error::Result;
use crate::linalg::{
    hermitian_eigenvalues, partial_trace, permute_subsystems, trace_distance, ComplexMatrix,
    DensityMatrix,
};
use crate::lindblad::{evolve_choi_checkpoints, EvolutionConfig};
use crate::models::{two_atom_generator, zz_thermal_generator, TwoAtomParams, ZZThermalParams};
use crate::oracles;
use crate::random::{
    random_density_matrix, random_hermitian, random_kraus_channel, random_unitary, seeded,
    SeededRng,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub bound: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst < self.bound
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name)
            .collect()
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<50} {:>6} {:>12} {:>10}  result\n",
            "invariant", "cases", "worst", "bound"
        );
        for c in &self.checks {
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{:<50} {:>6} {:>12.3e} {:>10.1e}  {verdict}",
                c.name, c.cases, c.worst, c.bound
            );
        }
        s
    }
}

fn worst_of(values: impl IntoIterator<Item = f64>) -> (usize, f64) {
    values
        .into_iter()
        .fold((0, 0.0_f64), |(n, w), v| (n + 1, w.max(v)))
}

fn check(name: &'static str, bound: f64, values: Vec<f64>) -> Check {
    let (cases, worst) = worst_of(values);
    Check {
        name,
        cases,
        worst,
        bound,
    }
}

fn reference_values() -> Result<Check> {
    let swap = Channel::unitary(gates::swap(2))?;
    let cnot = Channel::unitary(gates::cnot())?;
    let u_prime_swap = Channel::unitary(&gates::non_swap_maximal() * &gates::swap(2))?;
    let cases = [
        (swap, 1.0),
        (Channel::identity(4), 0.0),
        (cnot, 0.5),
        (u_prime_swap, 0.5),
    ];
    let devs = cases
        .iter()
        .map(|(ch, want)| Ok((channel_i_bar(ch, 2)? - want).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(check(
        "reference values (swap, identity, CNOT, U'·swap)",
        1e-9,
        devs,
    ))
}

fn product_channels_uncorrelated(rng: &mut SeededRng) -> Result<Check> {
    let devs = (0..10)
        .map(|i| {
            let a = random_kraus_channel(2, 1 + i % 3, rng);
            let b = random_kraus_channel(2, 1 + (i + 1) % 3, rng);
            channel_i_bar(&tensor_channels(&a, &b), 2)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(check("Ī vanishes on product channels", 1e-8, devs))
}

/// CJ state of a qubit channel on (A, A').
fn single_party_choi(ch: &Channel) -> Result<DensityMatrix> {
    apply_to_subsystems(ch, &max_entangled_state(2)?, &[0])
}

fn factorization(rng: &mut SeededRng) -> Result<Check> {
    let devs = (0..10)
        .map(|_| {
            let a = random_kraus_channel(2, 2, rng);
            let b = random_kraus_channel(2, 3, rng);
            let joint = choi_state(&tensor_channels(&a, &b), 2, 2)?;
            let ca = single_party_choi(&a)?;
            let cb = single_party_choi(&b)?;
            // (A, A', B, B') -> (A, B, A', B')
            let factored = permute_subsystems(&ca.tensor(&cb), &[0, 2, 1, 3])?;
            trace_distance(joint.state(), &factored)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(check(
        "CJ state of a product is the permuted product",
        1e-10,
        devs,
    ))
}

fn fundamental_law(rng: &mut SeededRng) -> Result<Vec<Check>> {
    let cores = [
        Channel::unitary(gates::cnot())?,
        Channel::unitary(gates::swap(2))?,
        random_kraus_channel(4, 3, rng),
    ];
    let mut increases = Vec::new();
    let mut changes = Vec::new();
    for core in &cores {
        for t in check_fundamental_law(core, 2, 10, LocalMaps::default(), rng)? {
            increases.push(t.increase().max(0.0));
        }
        for t in check_fundamental_law(core, 2, 5, LocalMaps::Unitary, rng)? {
            changes.push(t.increase().abs());
        }
    }
    Ok(vec![
        check("no increase under local CPT maps", 1e-8, increases),
        check("invariance under local unitaries", 1e-9, changes),
    ])
}

/// Disagreements between the reshuffle criterion and |Ī - 1| < 1e-6, and
/// the worst violation of the index-sum form of the maximality condition.
fn maximality_pool(rng: &mut SeededRng) -> Result<Vec<Check>> {
    let swap = gates::swap(2);
    let mut pool: Vec<ComplexMatrix> = Vec::new();
    for _ in 0..8 {
        let before = crate::linalg::kron(&random_unitary(2, rng), &random_unitary(2, rng));
        let after = crate::linalg::kron(&random_unitary(2, rng), &random_unitary(2, rng));
        pool.push(&(&after * &swap) * &before);
    }
    pool.push(gates::non_swap_maximal());
    pool.push(gates::cnot());
    pool.push(ComplexMatrix::identity(4));
    for _ in 0..8 {
        pool.push(random_unitary(4, rng));
    }
    let mut disagreements = Vec::new();
    let mut sum_form = Vec::new();
    for u in &pool {
        let flag = is_maximally_correlated(u, 2, None)?;
        let ib = i_bar(&choi_state(&Channel::unitary(u.clone())?, 2, 2)?)?.i_bar;
        disagreements.push(if flag == ((ib - 1.0).abs() < 1e-6) {
            0.0
        } else {
            1.0
        });
        let oracle_flag = oracles::maximality_condition_defect(u, 2) < 1e-8;
        sum_form.push(if oracle_flag == flag { 0.0 } else { 1.0 });
    }
    Ok(vec![
        check("reshuffle criterion agrees with Ī = 1", 0.5, disagreements),
        check(
            "reshuffle criterion agrees with index-sum form",
            0.5,
            sum_form,
        ),
    ])
}

fn integrator_oracle() -> Result<Check> {
    let mut devs = Vec::new();
    let atoms = TwoAtomParams::default().with_r(0.5);
    let zz = ZZThermalParams::default().with_temperature(0.5);
    let cases = [
        (two_atom_generator(&atoms)?, atoms.gamma0()),
        (zz_thermal_generator(&zz)?, zz.gamma0),
    ];
    for (gen, gamma0) in &cases {
        let times: Vec<f64> = [0.1, 0.7, 2.0].iter().map(|g| g / gamma0).collect();
        let rk = evolve_choi_checkpoints(gen, &times, &EvolutionConfig::default())?;
        for (t, c) in times.iter().zip(&rk) {
            let dense = oracles::choi_dense(gen, *t)?;
            devs.push(trace_distance(c.state(), dense.state())?);
        }
    }
    Ok(check("RK4 against superoperator exponential", 1e-6, devs))
}

fn eig_oracle(rng: &mut SeededRng) -> Result<Check> {
    let mut devs = Vec::new();
    for _ in 0..5 {
        let m = random_hermitian(4, rng);
        let jac = hermitian_eigenvalues(&m)?;
        let poly = oracles::char_poly_eigenvalues(&m);
        if poly.len() != jac.len() {
            devs.push(f64::INFINITY);
            continue;
        }
        devs.extend(jac.iter().zip(&poly).map(|(a, b)| (a - b).abs()));
    }
    Ok(check(
        "eigenvalues against characteristic polynomial",
        1e-8,
        devs,
    ))
}

fn partial_trace_oracle(rng: &mut SeededRng) -> Result<Check> {
    let devs = (0..5)
        .map(|_| {
            let rho = random_density_matrix(&[2, 2, 2, 2], rng);
            let fast = partial_trace(&rho, &[0, 2])?;
            let slow = oracles::partial_trace_four_qubits_keep_0_2(rho.matrix());
            Ok(fast.matrix().max_abs_diff(&slow))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(check("partial trace against index summation", 1e-12, devs))
}

/// Runs every suite. Errors are numerical failures inside a suite, not
/// failed checks.
pub fn run(seed: u64) -> Result<SelftestReport> {
    let mut rng = seeded(seed);
    let mut checks = vec![
        reference_values()?,
        product_channels_uncorrelated(&mut rng)?,
        factorization(&mut rng)?,
    ];
    checks.extend(fundamental_law(&mut rng)?);
    checks.extend(maximality_pool(&mut rng)?);
    checks.push(integrator_oracle()?);
    checks.push(eig_oracle(&mut rng)?);
    checks.push(partial_trace_oracle(&mut rng)?);
    Ok(SelftestReport { seed, checks })
}
