use speclen::representation::schottky_pair;
use speclen::*;

fn main() {
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    let pool: Vec<(&str, f64, f64, f64)> = vec![
        ("A2", 2.6, 1.6, std::f64::consts::FRAC_PI_3),
        ("C2", 2.8, 1.7, 2.1),
        ("D1", 2.2, 2.2, 1.3),
        ("C1", 1.8, 2.6, 1.1),
        ("E2", 2.5, 2.0, 1.9),
    ];
    let policies = [
        ("default", WindowPolicy::default()),
        ("hi085", WindowPolicy { hi_frac: 0.85, ..Default::default() }),
        ("hi080", WindowPolicy { hi_frac: 0.80, ..Default::default() }),
        ("u02", WindowPolicy { u_max: 0.02, ..Default::default() }),
        ("u02hi085", WindowPolicy { u_max: 0.02, hi_frac: 0.85, ..Default::default() }),
        ("lo06", WindowPolicy { lo_frac: 0.6, ..Default::default() }),
    ];
    for (k, la, lb, ang) in &pool {
        let r = schottky_pair(*la, *lb, *ang).unwrap();
        let mut tables = Vec::new();
        for n in [12usize, 13, 14] {
            tables.push(compute_spectrum(&[(r.clone(), a1.clone())], 2, n, &SpectrumOptions::default()).unwrap());
        }
        print!("{k}:");
        for (pname, pol) in &policies {
            let hs: Vec<f64> = tables.iter().map(|t| growth_rate(&t.column_counting(0), None, pol).unwrap().value).collect();
            print!("  {pname} [{:.4} {:.4} {:.4}]", hs[0], hs[1], hs[2]);
        }
        println!();
    }
}
