use proptest::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use vbi_core::excitation::{
    displacement_psd, generate_roughness, generate_roughness_with, generate_traffic, RoughnessParams,
    CLASS_A_COEFFICIENT,
};

/// One-sided Welch estimate with a Hann window and 50% overlap: `(n, G(n))`.
fn welch(x: &[f64], spacing: f64, segment: usize) -> Vec<(f64, f64)> {
    let window: Vec<f64> = (0..segment)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / segment as f64).cos())
        .collect();
    let power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment);
    let mut acc = vec![0.0; segment / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + segment <= x.len() {
        let mean = x[start..start + segment].iter().sum::<f64>() / segment as f64;
        let mut buf: Vec<Complex<f64>> = (0..segment)
            .map(|i| Complex::new((x[start + i] - mean) * window[i], 0.0))
            .collect();
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += segment / 2;
    }
    let fs = 1.0 / spacing;
    acc.iter()
        .enumerate()
        .map(|(k, a)| (k as f64 * fs / segment as f64, 2.0 * a / (count as f64 * fs * power)))
        .collect()
}

/// Ratio of estimated to target power in third-octave bands over [0.02, 5] cycles/m.
fn band_ratios(seed: u64) -> Vec<(f64, f64)> {
    let spacing = 0.1;
    let p = generate_roughness(500.0, spacing, CLASS_A_COEFFICIENT, seed).unwrap();
    let est = welch(&p.elevation, spacing, 1024);
    let mut out = Vec::new();
    let mut lo: f64 = 0.02;
    while lo < 5.0 {
        let hi = (lo * 2f64.powf(1.0 / 3.0)).min(5.0);
        let bins: Vec<&(f64, f64)> = est.iter().filter(|(n, _)| *n >= lo && *n < hi).collect();
        if !bins.is_empty() {
            let got: f64 = bins.iter().map(|(_, g)| g).sum();
            let want: f64 = bins.iter().map(|(n, _)| displacement_psd(CLASS_A_COEFFICIENT, *n)).sum();
            out.push((lo, got / want));
        }
        lo = hi;
    }
    out
}

#[test]
fn welch_psd_follows_the_target_law() {
    let r = band_ratios(1);
    assert!(r.len() > 15);
    for (n, ratio) in r {
        assert!((0.5..=2.0).contains(&ratio), "band at {n} cycles/m: ratio {ratio}");
    }
}

fn centred_difference_error(spacing: f64) -> f64 {
    let params = RoughnessParams { band_high: Some(2.0), seed: 9, ..RoughnessParams::default() };
    let p = generate_roughness_with(40.0, spacing, &params).unwrap();
    (1..p.len() - 1)
        .map(|i| ((p.elevation[i + 1] - p.elevation[i - 1]) / (2.0 * spacing) - p.slope[i]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn slope_matches_finite_differences_to_second_order() {
    let coarse = centred_difference_error(0.02);
    let fine = centred_difference_error(0.01);
    let order = (coarse / fine).log2();
    assert!((1.8..2.2).contains(&order), "observed order {order}");
}

#[test]
fn profile_is_sampled_on_the_node_grid() {
    let p = generate_roughness(15.0, 0.1, CLASS_A_COEFFICIENT, 4).unwrap();
    assert_eq!(p.len(), 151);
    assert!((p.sample_positions[150] - 15.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn welch_psd_within_factor_two_for_any_seed(seed in 0u64..1_000_000) {
        for (n, ratio) in band_ratios(seed) {
            prop_assert!((0.5..=2.0).contains(&ratio), "seed {seed}, band {n}: {ratio}");
        }
    }
}

proptest! {
    #[test]
    fn every_traffic_row_carries_the_full_load(
        n in 1usize..80, density in 0.01f64..0.2, seed in any::<u64>(), nodes in 20usize..400,
    ) {
        let m = generate_traffic(2.0, 0.05, nodes, n, density, seed).unwrap();
        let total = n as f64 * 2000.0 * 9.81;
        let active = ((density * (nodes - 2) as f64).ceil() as usize).min(nodes - 2);
        for s in 0..m.steps() {
            prop_assert!((m.row_abs_sum(s) - total).abs() <= 1e-9 * total);
            prop_assert_eq!(m.row(s).len(), active);
            prop_assert!(m.row(s).iter().all(|&(node, f)| f < 0.0 && node > 0 && node + 1 < nodes));
        }
    }

    #[test]
    fn doubling_the_coefficient_scales_rms_by_root_two(seed in any::<u64>()) {
        let a = generate_roughness(20.0, 0.1, CLASS_A_COEFFICIENT, seed).unwrap();
        let b = generate_roughness(20.0, 0.1, 2.0 * CLASS_A_COEFFICIENT, seed).unwrap();
        prop_assert!((b.rms() / a.rms() - 2f64.sqrt()).abs() < 0.01 * 2f64.sqrt());
    }
}
