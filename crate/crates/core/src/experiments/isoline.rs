use rayon::prelude::*;

use super::{check_grid, log_grid, with_pool, SweepOptions, SweepRecord};
use crate::correlation::{error_probability, i_bar};
use crate::error::{Error, Result};
use crate::lindblad::{choi_from, ChoiTrajectory, EvolutionConfig, Integrator};
use crate::models::{zz_thermal_generator, ZZThermalParams};
use crate::tolerance;

/// Coarse samples between the bracket ends used to locate the first crossing.
const COARSE_POINTS: usize = 64;

fn p_error_at(it: &Integrator<'_>) -> Result<f64> {
    error_probability(&choi_from(it)?)
}

fn error_model(template: &ZZThermalParams, temperature: f64) -> ZZThermalParams {
    ZZThermalParams {
        include_local_hamiltonian: false,
        ..template.with_temperature(temperature)
    }
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Config(format!(
            "target P_error must lie in (0, 1), got {target}"
        )));
    }
    Ok(())
}

fn check_bracket(bracket: (f64, f64)) -> Result<()> {
    if !(bracket.0 > 0.0 && bracket.1 > bracket.0 && bracket.1.is_finite()) {
        return Err(Error::Config(format!(
            "t bracket must satisfy 0 < lo < hi, got [{}, {}]",
            bracket.0, bracket.1
        )));
    }
    Ok(())
}

/// Time (ω units) where P_error first reaches `target` at one temperature.
///
/// P_error is sampled on a log grid across the bracket up to the first
/// sample at or above the target; it has to increase over those samples.
/// The crossing interval is then bisected, each probe branching off the
/// trajectory at the lower end.
fn solve_one(
    p: &ZZThermalParams,
    target: f64,
    bracket: (f64, f64),
    evolution: &EvolutionConfig,
) -> Result<SweepRecord> {
    let tol = tolerance::global();
    let gamma0 = p.gamma0;
    let (t_lo, t_hi) = (bracket.0 / gamma0, bracket.1 / gamma0);
    let failure = || Error::BracketFailure {
        target,
        temperature: p.temperature,
        t_lo: bracket.0,
        t_hi: bracket.1,
    };
    let gen = zz_thermal_generator(p)?;
    let traj = ChoiTrajectory::new(&gen, evolution)?;

    let mut lower = traj.start();
    lower.advance_to(t_lo)?;
    let mut p_lower = p_error_at(&lower)?;
    if p_lower >= target {
        return Err(failure());
    }
    let coarse = log_grid(t_lo, t_hi, COARSE_POINTS)?;
    let mut upper_t = None;
    for &t in &coarse[1..] {
        let mut next = lower.clone();
        next.advance_to(t)?;
        let p_next = p_error_at(&next)?;
        if p_next < p_lower {
            return Err(Error::NotMonotone {
                temperature: p.temperature,
            });
        }
        if p_next >= target {
            upper_t = Some(t);
            break;
        }
        lower = next;
        p_lower = p_next;
    }
    let mut hi = upper_t.ok_or_else(failure)?;
    let mut lo = lower.time();

    // Bisect far past the required accuracy: neighbouring temperatures at
    // the cold end differ in Ī by less than a coarse stop would jitter it.
    let mut best = None;
    for _ in 0..tol.bisection_max_iterations {
        let mid = 0.5 * (lo + hi);
        let mut probe = lower.clone();
        probe.advance_to(mid)?;
        let pm = p_error_at(&probe)?;
        let done = (pm - target).abs() < 1e-12 || hi - lo < 1e-14 * hi;
        best = Some(probe.clone());
        if done {
            break;
        }
        if pm < target {
            lo = mid;
            lower = probe;
        } else {
            hi = mid;
        }
    }
    let at = best.expect("at least one bisection step");
    let t = at.time();
    let choi = choi_from(&at)?;
    let report = i_bar(&choi)?;

    let mut fresh = traj.start();
    fresh.advance_to(t)?;
    let p_check = p_error_at(&fresh)?;
    if (p_check - target).abs() >= tol.isoline {
        return Err(Error::InvariantViolation(format!(
            "isoline point T = {}, t = {t} re-evaluates to P_error = {p_check}",
            p.temperature
        )));
    }
    Ok(SweepRecord::new(
        vec![
            ("T", p.temperature),
            ("target", target),
            ("t", t),
            ("gamma0_t", t * gamma0),
        ],
        report.i_bar,
        Some(p_check),
    ))
}

/// One point per temperature on the curve P_error(t, T) = `target`, found by
/// bisection in t inside `t_bracket` (units of 1/γ₀). The error model always
/// omits the local Hamiltonian. Records carry T, target, t, gamma0_t.
pub fn isoline_search(
    template: &ZZThermalParams,
    target: f64,
    temperatures: &[f64],
    t_bracket: (f64, f64),
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    isolines(template, &[target], temperatures, t_bracket, opts)
}

/// [`isoline_search`] for several targets, grouped by target in input order.
pub fn isolines(
    template: &ZZThermalParams,
    targets: &[f64],
    temperatures: &[f64],
    t_bracket: (f64, f64),
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    if targets.is_empty() {
        return Err(Error::Config(
            "at least one target P_error is required".into(),
        ));
    }
    targets.iter().try_for_each(|&t| check_target(t))?;
    check_grid("temperatures", temperatures, true)?;
    check_bracket(t_bracket)?;
    template.validate()?;
    opts.evolution.validate()?;
    let jobs: Vec<(f64, f64)> = targets
        .iter()
        .flat_map(|&target| temperatures.iter().map(move |&temp| (target, temp)))
        .collect();
    with_pool(opts.workers, || {
        jobs.par_iter()
            .map(|&(target, temp)| {
                solve_one(
                    &error_model(template, temp),
                    target,
                    t_bracket,
                    &opts.evolution,
                )
                .map_err(|e| e.context(format!("isoline P_error = {target} at T = {temp}")))
            })
            .collect()
    })?
}

/// P_error and Ī of the error model on the product of `temperatures` and
/// `time_grid` (units of 1/γ₀), one trajectory per temperature. Records carry
/// T, t, gamma0_t, grouped by temperature.
pub fn p_error_grid(
    template: &ZZThermalParams,
    temperatures: &[f64],
    time_grid: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    check_grid("temperatures", temperatures, true)?;
    check_grid("time grid", time_grid, false)?;
    template.validate()?;
    opts.evolution.validate()?;
    let mut grid = time_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows: Vec<Vec<SweepRecord>> = with_pool(opts.workers, || {
        temperatures
            .par_iter()
            .map(|&temp| {
                let p = error_model(template, temp);
                let gen = zz_thermal_generator(&p)?;
                let traj = ChoiTrajectory::new(&gen, &opts.evolution)?;
                let mut it = traj.start();
                grid.iter()
                    .map(|&g| {
                        let t = g / p.gamma0;
                        it.advance_to(t)?;
                        let choi = choi_from(&it)?;
                        Ok(SweepRecord::new(
                            vec![("T", temp), ("t", t), ("gamma0_t", g)],
                            i_bar(&choi)?.i_bar,
                            Some(error_probability(&choi)?),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| e.context(format!("P_error grid at T = {temp}")))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isoline_points_hit_target() {
        let recs = isoline_search(
            &ZZThermalParams::default(),
            0.1,
            &[0.1, 1.0],
            (1e-4, 10.0),
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert!((r.p_error.unwrap() - 0.1).abs() < 1e-6);
            assert!(r.param("t").unwrap() > 0.0);
        }
        assert!(recs[0].i_bar > recs[1].i_bar);
        assert!(recs[0].param("t").unwrap() > recs[1].param("t").unwrap());
    }

    #[test]
    fn target_outside_unit_interval_rejected() {
        let p = ZZThermalParams::default();
        let o = SweepOptions::default();
        for bad in [0.0, 1.0, 1.5, -0.2] {
            assert!(matches!(
                isoline_search(&p, bad, &[0.1], (1e-4, 10.0), &o),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn unreachable_target_is_bracket_failure() {
        // a window too short to reach P_error = 0.5
        let err = isoline_search(
            &ZZThermalParams::default(),
            0.5,
            &[0.1],
            (1e-4, 1e-2),
            &SweepOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err.root(), Error::BracketFailure { .. }), "{err}");
    }

    #[test]
    fn target_below_window_is_bracket_failure() {
        let err = isoline_search(
            &ZZThermalParams::default(),
            0.01,
            &[0.1],
            (1.0, 2.0),
            &SweepOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err.root(), Error::BracketFailure { .. }), "{err}");
    }

    #[test]
    fn grid_shape() {
        let g = p_error_grid(
            &ZZThermalParams::default(),
            &[0.1, 1.0],
            &[0.05, 0.1, 0.2],
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[3].param("T"), Some(1.0));
        assert!(g.iter().all(|r| r.p_error.is_some()));
    }
}
