use speclen::representation::schottky_pair;
use speclen::*;

fn main() {
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    let r1 = schottky_pair(1.8, 2.6, 1.1).unwrap();
    let policy = WindowPolicy::default();
    for n in [10usize, 12, 14] {
        let t = compute_spectrum(&[(r1.clone(), a1.clone())], 2, n, &SpectrumOptions::default()).unwrap();
        let cf = t.column_counting(0);
        let h = growth_rate(&cf, None, &policy).unwrap().value;
        print!("n={n}: h={h:.4}");
        for b in [0.1, 0.3, 0.7] {
            let w: Vec<f64> = cf.values().iter().map(|l| (-b * l).exp()).collect();
            let est = growth_rate(&cf, Some(&w), &policy).unwrap();
            print!("  b={b}: {:+.4}", est.value - (h - b));
        }
        println!();
    }
}
