use speclen::representation::schottky_pair;
use speclen::*;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(14);
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    let pool: Vec<(&str, f64, f64, f64)> = vec![
        ("C1", 1.8, 2.6, 1.1),
        ("D1", 2.2, 2.2, 1.3),
        ("E2", 2.5, 2.0, 1.9),
        ("G1", 2.0, 2.0, 1.9),
        ("F2", 1.9, 2.3, 2.0),
        ("H1", 2.4, 2.0, 1.2),
        ("H2", 2.1, 2.5, 1.7),
        ("S",  3.2, 3.4, std::f64::consts::FRAC_PI_2),
    ];
    let reps: Vec<(String, Representation)> = pool
        .iter()
        .map(|(k, la, lb, ang)| (k.to_string(), schottky_pair(*la, *lb, *ang).unwrap()))
        .collect();
    let policy = WindowPolicy::default();
    let xg = XGridPolicy { points: 12, lo_frac: 0.30, hi_frac: 0.65 };
    let pairs = [
        ("C1","D1"),("C1","E2"),("C1","F2"),("C1","H1"),("C1","S"),
        ("D1","E2"),("D1","F2"),("D1","H2"),("D1","S"),
        ("E2","H2"),("E2","S"),("F2","H1"),("G1","H2"),("H1","H2"),
    ];
    for (k1, k2) in pairs {
        let r1 = &reps.iter().find(|(k, _)| k == k1).unwrap().1;
        let r2 = &reps.iter().find(|(k, _)| k == k2).unwrap().1;
        let t = compute_spectrum(&[(r1.clone(), a1.clone()), (r2.clone(), a1.clone())], 2, n, &SpectrumOptions::default()).unwrap();
        let curve = match sample_curve(&t, 0, 1, &CurveOptions::default(), &policy) {
            Ok(c) => c, Err(e) => { println!("{k1}-{k2}: curve err {e}"); continue }
        };
        let (h1, h2) = (curve.h1.value, curve.h2.value);
        let inter = pressure_intersections(&curve).unwrap();
        let tan = match correlation_tangent(&curve) { Ok(t) => t, Err(e) => { println!("{k1}-{k2}: tan err {e}"); continue } };
        let mins = correlation_mins(&t, 0, 1, h1, h2, &policy);
        let (mm, s0) = match &mins { Ok(r) => (r.m, r.s0), Err(_) => (f64::NAN, f64::NAN) };
        let cnt = correlation_count(&t, 0, 1, h1, h2, 0.6, &xg, curve.h1.window.1);
        let (mc, maxc) = match &cnt {
            Ok(f) => (f.m, f.points.iter().map(|p| p.count).max().unwrap()),
            Err(_) => (f64::NAN, 0),
        };
        let poc = if mm.is_finite() {
            (curve.a_at((1.0 - s0) * h2 * mm) - s0 * h1 * mm).abs()
        } else { f64::NAN };
        println!("{k1}-{k2}: J=({:.3},{:.3}) r-h2={:+.4} cvx={:.5} | Mt={:.4}@{:.2} Mm={:.4}(s0={:.2}) Mc={:.4} mx={} | mg={:+.4} cg={:+.4} poc={:.4} br={}",
            inter.j12, inter.j21, inter.root - h2, curve.convexity_violation,
            tan.m, tan.b, mm, s0, mc, maxc, tan.m - mm, tan.m - mc, poc, tan.slope_bracketed);
    }
}
