use bellscan::optimize::{log_grid, lowest_threshold_per_noise, StartPolicy};
use bellscan::{
    eta_lower_bound, eta_mes, max_tolerated_noise, sweep, sweep_with, Family, OptimizeOptions,
    SweepRow,
};

fn opts() -> OptimizeOptions {
    OptimizeOptions::default()
}

fn ratios() -> Vec<f64> {
    log_grid(1e-3, 1.0, 50).unwrap()
}

fn rows_for(rows: &[SweepRow], m: usize, q: f64) -> Vec<&SweepRow> {
    rows.iter().filter(|r| r.m == m && r.q == q).collect()
}

#[test]
fn noiseless_thresholds_fall_toward_product_states() {
    let rows = sweep(&Family::Chained(vec![2, 3, 4]), &ratios(), &[0.0], &opts()).unwrap();
    assert_eq!(rows.len(), 150);
    for m in [2, 3, 4] {
        let chain = rows_for(&rows, m, 0.0);
        let etas: Vec<f64> = chain.iter().map(|r| r.best_eta_crit.unwrap()).collect();
        for w in etas.windows(2) {
            assert!(w[0] <= w[1] + 1e-7, "M = {m}: {w:?}");
        }
        for e in &etas {
            assert!(*e >= eta_lower_bound(m) - 1e-10);
        }
        let min = lowest_threshold_per_noise(&rows)
            .into_iter()
            .find(|g| g.m == m)
            .unwrap();
        assert_eq!(min.ratio, Some(1e-3));
        let e = min.eta_crit.unwrap();
        assert!(eta_lower_bound(m) < e && e < eta_mes(m));
    }
}

#[test]
fn warm_and_cold_sweeps_agree() {
    let grid = log_grid(1e-3, 1.0, 15).unwrap();
    let fam = Family::Chained(vec![2, 3]);
    let warm = sweep_with(&fam, &grid, &[0.0, 0.05], &opts(), StartPolicy::Warm).unwrap();
    let cold = sweep_with(&fam, &grid, &[0.0, 0.05], &opts(), StartPolicy::Cold).unwrap();
    for (w, c) in warm.iter().zip(&cold) {
        assert_eq!((w.m, w.q, w.ratio), (c.m, c.q, c.ratio));
        assert!(
            (w.best_value - c.best_value).abs() <= 1e-6,
            "M={} q={} r={}: {} vs {}",
            w.m,
            w.q,
            w.ratio,
            w.best_value,
            c.best_value
        );
    }
}

#[test]
fn best_ratio_grows_with_noise() {
    let qs = [0.01, 0.05, 0.1];
    let grid = ratios();
    let rows = sweep(&Family::Chained(vec![2, 3]), &grid, &qs, &opts()).unwrap();
    let mins = lowest_threshold_per_noise(&rows);
    for m in [2, 3] {
        let best: Vec<f64> = mins
            .iter()
            .filter(|g| g.m == m)
            .map(|g| g.ratio.unwrap())
            .collect();
        assert_eq!(best.len(), 3);
        for r in &best {
            assert!(*r > grid[0] && *r < grid[grid.len() - 1], "M = {m}: {best:?}");
        }
        assert!(best[0] < best[1] && best[1] < best[2], "M = {m}: {best:?}");
    }
}

#[test]
fn violation_boundary_at_maximal_entanglement() {
    let s_max = (2f64.sqrt() - 1.0) / 2.0;
    let q_max = max_tolerated_noise(2, s_max).unwrap();
    let rows = sweep(
        &Family::Chained(vec![2]),
        &[1.0],
        &[q_max - 1e-3, q_max + 1e-3],
        &opts(),
    )
    .unwrap();
    assert!(rows[0].best_eta_crit.is_some());
    assert!(rows[1].best_eta_crit.is_none());
}
