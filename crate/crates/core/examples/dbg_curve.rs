use speclen::representation::schottky_pair;
use speclen::*;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(11);
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    let r1 = schottky_pair(2.6, 1.6, std::f64::consts::FRAC_PI_3).unwrap();
    let r2 = schottky_pair(1.8, 2.6, 1.1).unwrap();
    let t = compute_spectrum(&[(r1, a1.clone()), (r2, a1)], 2, n, &SpectrumOptions::default()).unwrap();
    let policy = WindowPolicy::default();
    let curve = sample_curve(&t, 0, 1, &CurveOptions::default(), &policy).unwrap();
    let (h1, h2) = (curve.h1.value, curve.h2.value);
    println!("h1 {h1:.4} h2 {h2:.4}");
    let mut best = (f64::INFINITY, 0.0);
    for s in &curve.samples {
        let m = s.a / h1 + s.b / h2;
        if m < best.0 { best = (m, s.b); }
    }
    println!("min_b M(b) = {:.4} at b = {:.3}", best.0, best.1);
    let mins = correlation_mins(&t, 0, 1, h1, h2, &policy).unwrap();
    let (a_pt, b_pt) = (mins.s0 * h1 * mins.m, (1.0 - mins.s0) * h2 * mins.m);
    println!("mins M {:.4} s0 {:.3}; point ({:.4},{:.4}); curve a(b_pt) {:.4}; resid {:+.4}",
        mins.m, mins.s0, a_pt, b_pt, curve.a_at(b_pt), curve.a_at(b_pt) - a_pt);
    // curve M(b) profile
    for s in curve.samples.iter().step_by(4) {
        println!("  b {:+.3} a {:+.4} M {:.4}", s.b, s.a, s.a / h1 + s.b / h2);
    }
}
