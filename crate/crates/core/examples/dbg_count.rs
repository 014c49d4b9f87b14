use speclen::representation::schottky_pair;
use speclen::*;

fn main() {
    let n: usize = 14;
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    let pool: Vec<(&str, f64, f64, f64)> = vec![
        ("C1", 1.8, 2.6, 1.1),
        ("D1", 2.2, 2.2, 1.3),
        ("E2", 2.5, 2.0, 1.9),
        ("H1", 2.4, 2.0, 1.2),
        ("D1p", 2.21, 2.2, 1.3),
    ];
    let reps: Vec<(String, Representation)> = pool
        .iter()
        .map(|(k, la, lb, ang)| (k.to_string(), schottky_pair(*la, *lb, *ang).unwrap()))
        .collect();
    let policy = WindowPolicy::default();
    for (k1, k2) in [("C1","D1"),("C1","E2"),("C1","H1")] {
        let r1 = &reps.iter().find(|(k, _)| k == k1).unwrap().1;
        let r2 = &reps.iter().find(|(k, _)| k == k2).unwrap().1;
        let t = compute_spectrum(&[(r1.clone(), a1.clone()), (r2.clone(), a1.clone())], 2, n, &SpectrumOptions::default()).unwrap();
        let curve = sample_curve(&t, 0, 1, &CurveOptions::default(), &policy).unwrap();
        let (h1, h2) = (curve.h1.value, curve.h2.value);
        let tan = correlation_tangent(&curve).unwrap();
        let mins = correlation_mins(&t, 0, 1, h1, h2, &policy).unwrap();
        print!("{k1}-{k2}: Mt={:.4} Mm={:.4} ends=({:.4},{:.4})", tan.m, mins.m, mins.ends.0, mins.ends.1);
        for (eps, hi) in [(0.6, 0.65), (0.8, 0.65), (0.8, 0.70), (1.0, 0.65)] {
            let xg = XGridPolicy { points: 12, lo_frac: 0.30, hi_frac: hi };
            match correlation_count(&t, 0, 1, h1, h2, eps, &xg, curve.h1.window.1) {
                Ok(f) => {
                    let mx = f.points.iter().map(|p| p.count).max().unwrap();
                    print!("  [e{eps} hi{hi}: Mc={:.4} gap={:+.4} mx={mx}]", f.m, tan.m - f.m);
                }
                Err(e) => print!("  [e{eps} hi{hi}: {e}]"),
            }
        }
        println!();
    }
    // perturbed pair J check
    let r1 = &reps.iter().find(|(k, _)| k == "D1").unwrap().1;
    let r2 = &reps.iter().find(|(k, _)| k == "D1p").unwrap().1;
    let t = compute_spectrum(&[(r1.clone(), a1.clone()), (r2.clone(), a1.clone())], 2, n, &SpectrumOptions::default()).unwrap();
    let curve = sample_curve(&t, 0, 1, &CurveOptions::default(), &policy).unwrap();
    let inter = pressure_intersections(&curve).unwrap();
    let tan = correlation_tangent(&curve).unwrap();
    let mins = correlation_mins(&t, 0, 1, curve.h1.value, curve.h2.value, &policy);
    println!("D1-D1p: J=({:.4},{:.4}) Mt={:.4} mins={:?}", inter.j12, inter.j21, tan.m,
        mins.as_ref().map(|m| m.m).map_err(|e| e.to_string()));
}
