//! The linear gap rates at unit parameters: pre-asymptotic on [10, 1e3],
//! clean once the corrections have died out.

use fwdiss::analysis::rate_fit;
use fwdiss::kernel::{kernel_gap_table, GapOrder};
use fwdiss::{Frame, Grid, Params};

fn slopes(window: (f64, f64), grid: Grid) -> Vec<(GapOrder, u32, f64, f64)> {
    let params = Params::new(3.0, 1.0, 1.0, 1.0).unwrap();
    let (lo, hi) = window;
    let times: Vec<f64> = (0..30)
        .map(|i| lo * (hi / lo).powf(i as f64 / 29.0))
        .collect();
    let mut out = Vec::new();
    for order in [GapOrder::First, GapOrder::Second] {
        for l in [0, 1] {
            for q in [2.0, f64::INFINITY] {
                let rows = kernel_gap_table(&times, l, q, order, &params, &grid).unwrap();
                let samples: Vec<_> = rows.iter().map(|r| (r.t, r.gap)).collect();
                let fit = rate_fit(&samples, window, false).unwrap();
                out.push((order, l, q, fit.slope - order.predicted_slope(q, l)));
            }
        }
    }
    out
}

#[test]
fn unit_parameters_reach_the_predicted_rates_late() {
    let grid = Grid::new(8192.0, 16384, Frame::Comoving).unwrap();
    for (order, l, q, err) in slopes((1e3, 1e5), grid) {
        assert!(err.abs() < 0.01, "{order:?} l={l} q={q}: slope error {err}");
    }
}

#[test]
fn unit_parameters_are_pre_asymptotic_early() {
    let grid = Grid::new(512.0, 8192, Frame::Comoving).unwrap();
    let worst = slopes((10.0, 1e3), grid)
        .into_iter()
        .map(|s| s.3.abs())
        .fold(0.0, f64::max);
    assert!(
        worst > 0.05,
        "expected visible pre-asymptotic drift, worst error {worst}"
    );
}
