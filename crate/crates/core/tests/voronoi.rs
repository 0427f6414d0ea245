use std::time::Instant;

use gl3moment::gl2forms::build_eigenform;
use gl3moment::numerics::QuadratureSpec;
use gl3moment::voronoi::{voronoi_lhs, voronoi_rhs, TestWindow, WindowShape};

#[test]
fn summation_identity() {
    let start = Instant::now();
    let q = QuadratureSpec::default().with_tolerance(1e-11);
    for k in [12, 16] {
        let f = build_eigenform(k, 20_000).unwrap();
        for center in [20.0, 100.0] {
            let w = TestWindow::gaussian(center, center / 4.0).unwrap();
            for modulus in [1i64, 2, 3, 5] {
                let mut residues = vec![1i64];
                if modulus > 2 {
                    residues.push(modulus - 1);
                }
                for a in residues {
                    let lhs = voronoi_lhs(&f, a, modulus, &w).unwrap();
                    let rhs = voronoi_rhs(&f, a, modulus, &w, &q).unwrap();
                    assert!(rhs.decayed);
                    let dev = (lhs - rhs.value).norm();
                    eprintln!("k={k} X={center} c={modulus} a={a}: |lhs|={:.3e} dev={dev:.2e} N={}", lhs.norm(), rhs.truncation);
                    assert!(dev <= 1e-8 * (1.0 + lhs.norm()));
                }
            }
        }
    }
    eprintln!("elapsed {:?}", start.elapsed());
}

#[test]
fn compact_bump_identity() {
    let q = QuadratureSpec::default().with_tolerance(1e-11);
    let f = build_eigenform(12, 20_000).unwrap();
    let w = TestWindow::new(60.0, 15.0, WindowShape::PolynomialBump).unwrap();
    let lhs = voronoi_lhs(&f, 2, 3, &w).unwrap();
    let rhs = voronoi_rhs(&f, 2, 3, &w, &q).unwrap();
    assert!((lhs - rhs.value).norm() <= 1e-8 * (1.0 + lhs.norm()), "{lhs} {}", rhs.value);
}

#[test]
fn residue_shift_leaves_both_sides() {
    let q = QuadratureSpec::default().with_tolerance(1e-11);
    let f = build_eigenform(16, 20_000).unwrap();
    let w = TestWindow::gaussian(40.0, 10.0).unwrap();
    let a = voronoi_rhs(&f, 2, 5, &w, &q).unwrap();
    let b = voronoi_rhs(&f, 7, 5, &w, &q).unwrap();
    assert_eq!(a, b);
}
