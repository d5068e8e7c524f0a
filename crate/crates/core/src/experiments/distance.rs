use rayon::prelude::*;

use super::{check_grid, with_pool, SweepOptions, SweepRecord};
use crate::correlation::i_bar;
use crate::error::Result;
use crate::lindblad::{choi_from, ChoiTrajectory, EvolutionConfig};
use crate::models::{two_atom_generator, TwoAtomParams};

/// Ī(t) traces for every r and the per-r maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSweep {
    /// Columns r, t, gamma0_t, i_bar; grouped by r in input order.
    pub traces: Vec<SweepRecord>,
    /// Columns r, t_peak, gamma0_t_peak, i_bar (the maximum over the grid).
    pub maxima: Vec<SweepRecord>,
    /// One line per r whose peak sits at either end of the time grid.
    pub warnings: Vec<String>,
}

struct Curve {
    r: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

fn trace_one(p: &TwoAtomParams, grid: &[f64], evolution: &EvolutionConfig) -> Result<Curve> {
    let gamma0 = p.gamma0();
    let gen = two_atom_generator(p)?;
    let traj = ChoiTrajectory::new(&gen, evolution)?;
    let mut it = traj.start();
    let mut times = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    for &g in grid {
        let t = g / gamma0;
        let value = it
            .advance_to(t)
            .and_then(|_| choi_from(&it))
            .and_then(|c| i_bar(&c))
            .map_err(|e| e.context(format!("two-atom evolution at r = {}, γ₀t = {g}", p.r)))?;
        times.push(t);
        values.push(value.i_bar);
    }
    Ok(Curve {
        r: p.r,
        times,
        values,
    })
}

/// Evolves the two-atom CJ state once per r along `time_grid` (units of
/// 1/γ₀) and records Ī at every grid time.
pub fn distance_sweep(
    r_values: &[f64],
    time_grid: &[f64],
    template: &TwoAtomParams,
    opts: &SweepOptions,
) -> Result<DistanceSweep> {
    check_grid("r values", r_values, true)?;
    check_grid("time grid", time_grid, false)?;
    template.validate()?;
    opts.evolution.validate()?;
    let mut grid = time_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let curves: Vec<Curve> = with_pool(opts.workers, || {
        r_values
            .par_iter()
            .map(|&r| trace_one(&template.with_r(r), &grid, &opts.evolution))
            .collect::<Result<Vec<_>>>()
    })??;

    let gamma0 = template.gamma0();
    let mut out = DistanceSweep {
        traces: Vec::with_capacity(curves.len() * grid.len()),
        maxima: Vec::with_capacity(curves.len()),
        warnings: Vec::new(),
    };
    for c in &curves {
        for (&t, &v) in c.times.iter().zip(&c.values) {
            out.traces.push(SweepRecord::new(
                vec![("r", c.r), ("t", t), ("gamma0_t", t * gamma0)],
                v,
                None,
            ));
        }
        let (peak, &best) = c
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        if grid.len() > 1 && (peak == 0 || peak == grid.len() - 1) {
            out.warnings.push(format!(
                "r = {}: maximum Ī = {best:.6} sits at the grid boundary γ₀t = {}",
                c.r,
                c.times[peak] * gamma0
            ));
        }
        out.maxima.push(SweepRecord::new(
            vec![
                ("r", c.r),
                ("t_peak", c.times[peak]),
                ("gamma0_t_peak", c.times[peak] * gamma0),
            ],
            best,
            None,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::log_grid;

    #[test]
    fn order_and_columns() {
        let grid = log_grid(0.01, 5.0, 12).unwrap();
        let s = distance_sweep(
            &[1.0, 0.1],
            &grid,
            &TwoAtomParams::default(),
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(s.traces.len(), 24);
        assert_eq!(s.traces[0].param("r"), Some(1.0));
        assert_eq!(s.traces[12].param("r"), Some(0.1));
        assert_eq!(s.maxima[0].param("r"), Some(1.0));
        assert!(s.maxima[1].i_bar > s.maxima[0].i_bar);
        let rec = &s.traces[3];
        let g0 = TwoAtomParams::default().gamma0();
        assert!((rec.param("gamma0_t").unwrap() - rec.param("t").unwrap() * g0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let grid = log_grid(0.01, 2.0, 6).unwrap();
        let p = TwoAtomParams::default();
        let one = SweepOptions {
            workers: Some(1),
            ..Default::default()
        };
        let three = SweepOptions {
            workers: Some(3),
            ..Default::default()
        };
        let a = distance_sweep(&[0.2, 0.7, 3.0], &grid, &p, &one).unwrap();
        let b = distance_sweep(&[0.2, 0.7, 3.0], &grid, &p, &three).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_empty_inputs() {
        let p = TwoAtomParams::default();
        let o = SweepOptions::default();
        assert!(distance_sweep(&[], &[1.0], &p, &o).is_err());
        assert!(distance_sweep(&[1.0], &[], &p, &o).is_err());
        assert!(distance_sweep(&[-1.0], &[1.0], &p, &o).is_err());
    }

    #[test]
    fn boundary_peak_is_flagged() {
        // at r = 0 Ī keeps growing over a short window
        let grid = log_grid(0.01, 1.0, 5).unwrap();
        let s = distance_sweep(
            &[0.0],
            &grid,
            &TwoAtomParams::default(),
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(s.warnings.len(), 1);
    }
}
