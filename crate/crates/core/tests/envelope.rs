use gevrey_tf::corpus::{generate, SignalKind, SignalSpec};
use gevrey_tf::regularity::{classify_window, probe_condition_iii, ClassifyWindow};
use gevrey_tf::stft::stft_region;
use gevrey_tf::{GevreyParams, StftGrid, WeightSpec};

fn synth_grid(params: GevreyParams) -> StftGrid {
    let dt = 1.0 / 4096.0;
    let f = generate(&SignalSpec::new(SignalKind::EnvelopeSynth { params }, dt, 1 << 16)).unwrap();
    let g = classify_window(ClassifyWindow::Gaussian, dt).unwrap();
    stft_region(&f, &g, 0.5, g.len().next_power_of_two(), -1.0, 1.0).unwrap()
}

// Larger tau means a smaller T and a weaker decay requirement.
#[test]
fn envelope_probe_orders_classes_by_tau() {
    let grid = synth_grid(GevreyParams::new(1.0, 1.5, 1.0).unwrap());
    let at = |tau: f64| probe_condition_iii(&grid, &WeightSpec::Unweighted, &GevreyParams::new(tau, 1.5, 1.0).unwrap()).unwrap();
    let (own, weaker, stronger) = (at(1.0), at(2.0), at(0.5));
    assert!(own.pass, "{own:?}");
    assert!(weaker.pass, "{weaker:?}");
    assert!(!stronger.pass, "{stronger:?}");
    assert!(weaker.relative_margin <= own.relative_margin);
    assert!(stronger.relative_margin > own.relative_margin);
}

#[test]
fn envelope_probe_is_scale_invariant() {
    let p = GevreyParams::new(1.0, 1.5, 1.0).unwrap();
    let grid = synth_grid(p);
    let a = probe_condition_iii(&grid, &WeightSpec::Unweighted, &p).unwrap();
    let b = probe_condition_iii(&grid.scaled(gevrey_tf::Complex64::new(0.0, 37.0)), &WeightSpec::Unweighted, &p).unwrap();
    assert!((a.relative_margin / b.relative_margin - 1.0).abs() < 1e-12);
    assert_eq!(a.pass, b.pass);
}
