use std::f64::consts::PI;

use charge_limit::devices::{
    self, DeviceOptions, DeviceSpec, QpcGeometry, SetGeometry, WireGeometry,
};
use charge_limit::noise::{self, OperatingPoint};
use charge_limit::sweep::{self, Spacing, SweepAxis, SweepBase, SweepSpec};
use charge_limit::units::{self, effective_scales, Material, CONSTANTS};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Log-uniform over `decades` decades starting at `low`.
fn log_range(low: f64, decades: f64) -> impl Strategy<Value = f64> {
    (0.0..decades).prop_map(move |x| low * 10f64.powf(x))
}

fn material() -> impl Strategy<Value = Material> {
    (log_range(1e-3, 6.0), log_range(1.0, 6.0))
        .prop_map(|(m, e)| Material::new("p", m, e).unwrap())
}

proptest! {
    #[test]
    fn conversions_round_trip(e in log_range(1e-30, 20.0)) {
        let f = units::energy_to_frequency(e);
        prop_assert!(rel(units::frequency_to_energy(f), e) < 1e-12);
        let t = units::energy_to_temperature(e);
        prop_assert!(rel(units::temperature_to_energy(t), e) < 1e-12);
        let via = units::temperature_to_energy(units::energy_to_temperature(units::frequency_to_energy(f)));
        prop_assert!(rel(units::energy_to_frequency(via), f) < 1e-12);
    }

    #[test]
    fn effective_rydberg_monotone(m in 0.01f64..10.0, eps in 1.0f64..50.0, k in 1.01f64..3.0) {
        let base = effective_scales(&Material::new("a", m, eps).unwrap()).unwrap();
        let heavier = effective_scales(&Material::new("b", m * k, eps).unwrap()).unwrap();
        let screened = effective_scales(&Material::new("c", m, eps * k).unwrap()).unwrap();
        prop_assert!(heavier.ry_star_freq > base.ry_star_freq);
        prop_assert!(screened.ry_star_freq < base.ry_star_freq);
        // Ry*·a* = e²/(2·ε_r) in Gaussian form
        prop_assert!(rel(base.ry_star_energy * base.a_star, CONSTANTS.coulomb_e2() / (2.0 * eps)) < 1e-12);
    }

    #[test]
    fn snr_inverts_to_current(i in log_range(1e-15, 9.0), df in log_range(1.0, 9.0)) {
        let s = noise::snr(&OperatingPoint::from_current(i, df)).unwrap();
        prop_assert!(rel(s * s * 2.0 * CONSTANTS.e * df, i) < 1e-12);
    }

    #[test]
    fn snr_scales_as_inverse_root_bandwidth(i in log_range(1e-12, 6.0)) {
        let reference = noise::snr(&OperatingPoint::from_current(i, 1.0)).unwrap();
        for exp in 0..=7 {
            let df = 10f64.powi(exp);
            let s = noise::snr(&OperatingPoint::from_current(i, df)).unwrap();
            prop_assert!(rel(s * df.sqrt(), reference) < 1e-12);
        }
    }

    #[test]
    fn snr_monotonicity(
        i in log_range(1e-12, 6.0), g in log_range(1e-6, 3.0),
        t in 0.1f64..300.0, df in log_range(1.0, 6.0), k in 1.01f64..2.0,
    ) {
        let op = OperatingPoint::from_current(i, df).with_conductance(g).with_temperature(t);
        let s = noise::snr(&op).unwrap();
        let more_current = OperatingPoint { current: i * k, ..op };
        let wider = OperatingPoint { bandwidth: df * k, ..op };
        let hotter = OperatingPoint { temperature: t * k, ..op };
        prop_assert!(noise::snr(&more_current).unwrap() > s);
        prop_assert!(noise::snr(&wider).unwrap() < s);
        prop_assert!(noise::snr(&hotter).unwrap() < s);
    }

    #[test]
    fn wire_radius_cancels(mat in material(), r1 in log_range(1e-10, 6.0), r2 in log_range(1e-10, 6.0)) {
        let eval = |r: f64| devices::evaluate(
            &DeviceSpec::Wire { geometry: WireGeometry::new(r).unwrap(), material: mat.clone() },
            1.0,
            &DeviceOptions::default(),
        ).unwrap();
        let (a, b) = (eval(r1), eval(r2));
        prop_assert!(rel(a.snr, b.snr) < 1e-12);
        prop_assert!(rel(a.transport.current, devices::wire_sense_current(&mat).unwrap()) < 1e-12);
    }

    #[test]
    fn qpc_forms_agree(mat in material(), w in log_range(1e-10, 6.0), df in log_range(1.0, 6.0)) {
        let g = QpcGeometry::new(w).unwrap();
        let si = devices::qpc_unity_bandwidth(&g, &mat).unwrap();
        let ry = devices::qpc_unity_bandwidth_rydberg(&g, &mat).unwrap();
        prop_assert!(rel((si / df).sqrt(), (ry / df).sqrt()) < 1e-12);
        let r = devices::qpc_snr(&g, &mat, df).unwrap();
        prop_assert!(rel(r.snr, (ry / df).sqrt()) < 1e-12);
        prop_assert!(rel(r.snr, (r.f_unity / df).sqrt()) < 1e-12);
    }

    #[test]
    fn set_forms_agree(eps in log_range(1.0, 6.0), r in log_range(1e-10, 6.0), df in log_range(1.0, 6.0)) {
        let g = SetGeometry::new(r).unwrap();
        let si = devices::set_unity_bandwidth(&g, eps).unwrap();
        let ry = devices::set_unity_bandwidth_rydberg(&g, eps).unwrap();
        prop_assert!(rel(si, ry) < 1e-12);
        let res = devices::set_snr(&g, eps, df).unwrap();
        prop_assert!(rel(res.snr, (ry / df).sqrt()) < 1e-12);
        prop_assert!(rel(res.sensitivity, 1.0 / res.f_unity.sqrt()) < 1e-15);
    }

    #[test]
    fn csv_round_trips_byte_for_byte(start in log_range(1e-10, 3.0), span in 1.5f64..1e3, points in 2usize..20) {
        let base = SweepBase {
            device: DeviceSpec::Qpc { geometry: QpcGeometry { width: 1e-8 }, material: Material::gaas_like() },
            bandwidth: 1e3,
            options: DeviceOptions { temperature: 1.5, ..Default::default() },
        };
        let spec = SweepSpec { axis: SweepAxis::Width, start, stop: start * span, points, spacing: Spacing::Log };
        let rows = sweep::run_sweep(&base, &spec).unwrap();
        let mut first = Vec::new();
        sweep::write_csv(&rows, &mut first).unwrap();
        let parsed = sweep::read_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        sweep::write_csv(&parsed, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}

#[test]
fn scaling_laws() {
    let df = 1.0;
    let wire = |m: f64, eps: f64| {
        devices::wire_snr(&Material::new("w", m, eps).unwrap(), df)
            .unwrap()
            .snr
    };
    // SNR ∝ sqrt(m*)/ε_r
    assert!(rel(wire(0.4, 5.0) / wire(0.1, 5.0), 2.0) < 1e-12);
    assert!(rel(wire(0.1, 10.0) / wire(0.1, 5.0), 0.5) < 1e-12);

    let qpc = |w: f64| {
        devices::qpc_snr(&QpcGeometry::new(w).unwrap(), &Material::gaas_like(), df)
            .unwrap()
            .snr
    };
    assert!(rel(qpc(30e-9) / qpc(10e-9), 1.0 / 3.0) < 1e-12);
    assert!(rel(qpc(80e-9) / qpc(20e-9), 0.25) < 1e-12);

    let set = |r: f64, eps: f64| {
        devices::set_snr(&SetGeometry::new(r).unwrap(), eps, df)
            .unwrap()
            .snr
    };
    assert!(rel(set(40e-9, 4.0) / set(10e-9, 4.0), 0.5) < 1e-12);
    assert!(rel(set(10e-9, 16.0) / set(10e-9, 4.0), 0.5) < 1e-12);
}

#[test]
fn unity_bandwidth_vacuum_set_island() {
    let g = SetGeometry::new(CONSTANTS.a0 * PI / 2.0).unwrap();
    assert!(rel(devices::set_unity_bandwidth(&g, 1.0).unwrap(), CONSTANTS.ry_freq) < 1e-12);
}
