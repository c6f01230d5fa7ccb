#![allow(clippy::excessive_precision)]

//! Values frozen from an independent 80-digit evaluation of the plain
//! geometric definitions (chord midpoints, tangency points, the kite radius
//! and the normal-ray quadratic for `s_n`).

use smoothk::analysis::{arc_speed, chord_speed, lipschitz_diagnostics};
use smoothk::geometry::{arc_center, arc_radius, midpoint_t, radius_asymptotic_gap, tangency_s};
use smoothk::projection::{arc_params, param_t, solve_param_s};
use smoothk::{build_boundary, AlphaSequence, BoundaryModel, Point2};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn case_a() -> AlphaSequence {
    AlphaSequence::case_a(1.0).unwrap()
}

fn case_b() -> AlphaSequence {
    AlphaSequence::case_b(0.5).unwrap()
}

fn case_c() -> AlphaSequence {
    AlphaSequence::case_c(0.4).unwrap()
}

fn d_t(m: &BoundaryModel, n: usize) -> Point2 {
    let t = param_t(m.seq(), n).unwrap();
    m.project_circle(t).offset / t
}

fn d_s(m: &BoundaryModel, n: usize) -> Point2 {
    let s = solve_param_s(m.seq(), n).unwrap();
    m.project_circle(s).offset / s
}

#[test]
fn case_b_third_kite() {
    let seq = case_b();
    let t = midpoint_t(&seq, 3).unwrap();
    assert!(t.dist(Point2::new(0.952_332_406_457_258_6, 0.288_886_877_190_609_02)) < 2e-16);
    let s = tangency_s(&seq, 3).unwrap();
    assert!(s.dist(Point2::new(0.869_424_127_018_477_7, 0.464_181_706_033_913_7)) < 2e-16);
    assert!(rel(arc_radius(&seq, 3).unwrap(), 0.660_777_886_446_614_8) < 1e-15);
    let o = arc_center(&seq, 3).unwrap();
    assert!(o.dist(Point2::new(0.320_007_393_956_615_67, 0.097_073_181_686_567_67)) < 1e-15);
    assert!(rel(solve_param_s(&seq, 3).unwrap(), 1.080_985_908_770_193) < 1e-15);
    assert!(rel(param_t(&seq, 3).unwrap(), 0.589_048_622_548_086_2) < 1e-15);
}

#[test]
fn case_b_quotients() {
    let seq = case_b();
    let m = build_boundary(&seq, 32).unwrap();
    let cases = [
        (20, -6.241_783_804_869_246e-7, 0.499_999_999_999_438_98, -9.532_906_174_696_699e-7, 0.454_545_454_543_957_9),
        (25, -1.950_557_439_022_878_4e-8, 0.499_999_999_999_999_45, -2.979_033_179_598_574e-8, 0.454_545_454_545_453_08),
        (30, -6.095_491_996_946_499e-10, 0.5, -9.309_478_686_245_562e-10, 0.454_545_454_545_454_54),
    ];
    for (n, tx, ty, sx, sy) in cases {
        let dt = d_t(&m, n);
        let ds = d_s(&m, n);
        assert!(rel(dt.x, tx) < 1e-9 && (dt.y - ty).abs() < 1e-15, "D(t_{n}) = {dt:?}");
        assert!(rel(ds.x, sx) < 1e-9 && (ds.y - sy).abs() < 1e-15, "D(s_{n}) = {ds:?}");
    }
}

#[test]
fn case_b_speeds_and_radii() {
    let seq = case_b();
    let m = build_boundary(&seq, 32).unwrap();
    for (n, zi, arc, gap) in [
        (20, 4.494_084_339_504_880_2e-6, 0.399_999_999_999_659_65, 3.428_468_125_876_380_2e-13),
        (25, 1.404_401_356_096_472_1e-7, 0.399_999_999_999_999_67, 3.348_113_404_176_195_2e-16),
        (30, 4.388_754_237_801_479e-9, 0.4, 3.269_641_996_265_815_6e-19),
    ] {
        let z = chord_speed(&m, n).unwrap();
        assert!(rel((z - Point2::I).norm(), zi) < 1e-6, "z_{n}");
        assert!((arc_speed(&m, n).unwrap().norm() - arc).abs() < 1e-14, "arc_{n}");
        assert!(rel(radius_asymptotic_gap(&seq, n).unwrap(), gap) < 1e-9, "gap_{n}");
    }
    assert!((arc_radius(&seq, 20).unwrap() - 0.666_666_666_666_323_8).abs() < 1e-15);
}

#[test]
fn case_a_values() {
    let seq = case_a();
    let m = build_boundary(&seq, 1002).unwrap();
    let rows = [
        (10, 0.899_973_471_951_430_1, 2.652_804_856_990_270_1e-5, 0.165_616_406_338_754_98, 0.473_664_495_306_226_6, 0.004_368_797_495_054_828, -0.075_281_238_397_827_05),
        (100, 0.989_999_996_966_238_7, 3.033_761_303_212_321_7e-9, 0.015_787_132_466_040_233, 0.497_487_435_142_153_4, 4.621_518_768_244_475e-5, -0.007_815_453_091_331_563),
        (500, 0.997_999_999_995_081_6, 4.918_411_933_138_274_6e-12, 0.003_144_739_246_204_765, 0.499_499_499_496_213_7, 1.859_360_024_076_170_3e-6, -0.001_569_231_519_952_866_5),
        (1000, 0.998_999_999_999_692_1, 3.079_120_197_841_974e-13, 0.001_571_582_349_409_022, 0.499_749_874_937_263_25, 4.651_813_890_010_470_4e-7, -0.000_785_006_213_927_155_3),
    ];
    for (n, r, gap, zi, arc, dts, slope) in rows {
        assert!(rel(arc_radius(&seq, n).unwrap(), r) < 1e-14, "r_{n}");
        assert!(rel(radius_asymptotic_gap(&seq, n).unwrap(), gap) < 1e-8, "gap_{n}");
        // the chord quotient loses about n² eps to the difference of projections
        assert!(rel((chord_speed(&m, n).unwrap() - Point2::I).norm(), zi) < 1e-7, "z_{n}");
        assert!((arc_speed(&m, n).unwrap().norm() - arc).abs() < 1e-10, "arc_{n}");
        assert!(rel((d_t(&m, n) - d_s(&m, n)).norm(), dts) < 1e-6, "gap D_{n}");
        let y = midpoint_t(&seq, n).unwrap().y;
        let x_minus_1 = -m.x_deficit(y).unwrap();
        assert!(rel(x_minus_1 / y, slope) < 1e-12, "slope_{n}");
    }
}

#[test]
fn case_c_values() {
    let seq = case_c();
    let m = build_boundary(&seq, 12).unwrap();
    let rows = [
        (3, 0.020_442_482_568_405_18, 4.306_039_783_804_843e-6, 0.050_772_282_772_400_52, 0.020_024_694_171_065_385, 0.029_474_154_417_884_646, 0.052_339_065_459_943_96),
        (5, 0.000_524_266_015_531_779_2, 3.107_062_669_255_332e-17, 8.435_359_264_623_401e-7, 0.000_523_991_304_698_229_7, 0.000_785_597_255_093_935, 8.441_991_269_793_598e-7),
        (9, 3.435_973_742_352_686_6e-7, 1.278_224_861_435_854e-58, 6.681_429_798_266_744e-26, 3.435_972_561_761_536_4e-7, 5.153_957_166_203_964e-7, 6.681_433_241_848_818e-26),
        (10, 5.497_558_114_701_484e-8, 6.036_246_382_590_44e-73, 1.147_860_733_314_209_4e-32, 5.497_557_812_470_049e-8, 8.246_336_289_536_479e-8, 1.147_860_827_970_673_5e-32),
    ];
    for (n, r, gap, zi, arc, ds, s) in rows {
        assert!(rel(arc_radius(&seq, n).unwrap(), r) < 1e-13, "r_{n}");
        assert!(rel(radius_asymptotic_gap(&seq, n).unwrap(), gap) < 1e-8, "gap_{n}");
        assert!(rel((chord_speed(&m, n).unwrap() - Point2::I).norm(), zi) < 1e-8, "z_{n}");
        assert!(rel(arc_speed(&m, n).unwrap().norm(), arc) < 1e-8, "arc_{n}");
        assert!(rel(d_s(&m, n).y, ds) < 1e-8, "D(s_{n})");
        assert!((d_t(&m, n).y - 0.5).abs() < 1e-6, "D(t_{n})");
        assert!(rel(arc_params(&seq, n).unwrap().s, s) < 1e-14, "s_{n}");
    }
}

#[test]
fn lipschitz_window_bounds() {
    // window n reads the arc C_{n+1}
    let m = build_boundary(&case_c(), 12).unwrap();
    let lip = lipschitz_diagnostics(&m, [2, 9]).unwrap();
    let at = |n: usize| lip.windows.iter().find(|w| w.n == n).unwrap().bound;
    assert!(rel(at(2), 49.107_396_811_075_717) < 1e-12);
    assert!(rel(at(4), 1_907.428_615_197_833_2) < 1e-12);
    assert!(rel(at(8), 2_910_383.125_673_358_8) < 1e-12);
    assert!(rel(at(9), 18_189_894.115_458_563) < 1e-12);

    let m = build_boundary(&case_b(), 32).unwrap();
    let lip = lipschitz_diagnostics(&m, [19, 29]).unwrap();
    assert!(rel(lip.windows[0].bound, 1.500_000_000_046_214_2) < 1e-12);
    assert!(rel(lip.windows.last().unwrap().bound, 1.5) < 1e-14);

    let m = build_boundary(&case_a(), 1002).unwrap();
    let lip = lipschitz_diagnostics(&m, [99, 999]).unwrap();
    assert!(rel(lip.windows[0].bound, 1.010_478_733_927_477_1) < 1e-12);
    assert!(rel(lip.windows.last().unwrap().bound, 1.001_004_709_525_605_7) < 1e-12);
}
