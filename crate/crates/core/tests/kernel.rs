use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use nekflow::ax::fixtures::{FixtureRng, DEFAULT_SEED};
use nekflow::ax::gll::gll_derivative;
use nekflow::ax::io::{read_binary, read_text, write_binary, write_text, FieldFile};
use nekflow::ax::{ax, ax_element, ax_par, mxm, DerivMatrix, ElementField, GeomFactors, Matrix, ProblemConfig};
use proptest::prelude::*;

fn fixture(n: usize, name: &str) -> Vec<f64> {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "fixtures",
        &format!("ax_n{n}"),
        &format!("{name}.txt"),
    ]
    .iter()
    .collect();
    read_text(BufReader::new(File::open(&path).unwrap())).unwrap()
}

#[test]
fn matches_numpy_fixtures() {
    for n in [2, 3] {
        let np = n * n * n;
        let (u, g, d, w) = (fixture(n, "u"), fixture(n, "g"), fixture(n, "d"), fixture(n, "w"));
        let nelt = u.len() / np;
        let cfg = ProblemConfig::new(n, nelt).unwrap();
        let d = DerivMatrix::new(n, d).unwrap();
        let us: Vec<_> = u
            .chunks(np)
            .map(|c| ElementField::new(n, c.to_vec()).unwrap())
            .collect();
        let gs: Vec<_> = g
            .chunks(6 * np)
            .map(|c| GeomFactors::new(n, c.to_vec()).unwrap())
            .collect();
        let got: Vec<f64> = ax(&us, &gs, &d, &cfg)
            .unwrap()
            .into_iter()
            .flat_map(|e| e.into_values())
            .collect();
        assert_eq!(got.len(), w.len());
        let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().zip(&w) {
            assert!((a - b).abs() <= 1e-13 * scale, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn constant_field_has_zero_gradient_energy() {
    for n in [3, 5, 8] {
        let cfg = ProblemConfig::new(n, 1).unwrap();
        let d = gll_derivative(n).unwrap();
        let g = FixtureRng::new(DEFAULT_SEED).geom_spd(n);
        let u = ElementField::from_fn(n, |_, _, _| 2.5);
        let w = ax_element(&u, &g, &d, &cfg).unwrap();
        assert!(w.max_abs() < 1e-10, "n={n}: {}", w.max_abs());
    }
}

#[test]
fn parallel_matches_serial_bitwise() {
    let n = 5;
    let cfg = ProblemConfig::new(n, 12).unwrap();
    let mut rng = FixtureRng::new(7);
    let d = rng.deriv(n);
    let u: Vec<_> = (0..12).map(|_| rng.field(n)).collect();
    let g: Vec<_> = (0..12).map(|_| rng.geom(n)).collect();
    let a = ax(&u, &g, &d, &cfg).unwrap();
    let b = ax_par(&u, &g, &d, &cfg).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let bx: Vec<u64> = x.values().iter().map(|v| v.to_bits()).collect();
        let by: Vec<u64> = y.values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bx, by);
    }
}

#[test]
fn per_element_results_match_batched() {
    let n = 4;
    let cfg = ProblemConfig::new(n, 2).unwrap();
    let mut rng = FixtureRng::new(11);
    let d = rng.deriv(n);
    let u = [rng.field(n), rng.field(n)];
    let g = [rng.geom(n), rng.geom(n)];
    let w = ax(&u, &g, &d, &cfg).unwrap();
    for e in 0..2 {
        assert_eq!(w[e], ax_element(&u[e], &g[e], &d, &cfg).unwrap());
    }
}

#[test]
fn binary_and_text_round_trip() {
    let mut rng = FixtureRng::new(3);
    let g = rng.vec(6 * 27 * 2);
    let file = FieldFile {
        n: 3,
        nelt: 2,
        components: 6,
        values: g.clone(),
    };
    let mut buf = Vec::new();
    write_binary(&mut buf, &file).unwrap();
    assert_eq!(read_binary(buf.as_slice()).unwrap(), file);

    let mut text = Vec::new();
    write_text(&mut text, &g).unwrap();
    assert_eq!(read_text(text.as_slice()).unwrap(), g);
}

fn naive(a: &Matrix, b: &Matrix) -> Vec<f64> {
    let (r, q, c) = (a.rows(), a.cols(), b.cols());
    let mut out = vec![0.0; r * c];
    for j in 0..c {
        for i in 0..r {
            let mut s = 0.0;
            for l in 0..q {
                s += a.get(i, l) * b.get(l, j);
            }
            out[i + r * j] = s;
        }
    }
    out
}

proptest! {
    #[test]
    fn mxm_matches_triple_loop(r in 1usize..6, q in 1usize..6, c in 1usize..6, seed in any::<u64>()) {
        let mut rng = FixtureRng::new(seed);
        let a = Matrix::new(r, q, rng.vec(r * q)).unwrap();
        let b = Matrix::new(q, c, rng.vec(q * c)).unwrap();
        let p = mxm(&a, &b).unwrap();
        let expect = naive(&a, &b);
        for (x, y) in p.data().iter().zip(&expect) {
            prop_assert!((x - y).abs() <= 1e-14 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn ax_is_linear(n in 2usize..5, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let cfg = ProblemConfig::new(n, 1).unwrap();
        let mut rng = FixtureRng::new(seed);
        let (d, g, u, v) = (rng.deriv(n), rng.geom(n), rng.field(n), rng.field(n));
        let lhs = ax_element(&u.combine(alpha, &v, beta), &g, &d, &cfg).unwrap();
        let rhs = ax_element(&u, &g, &d, &cfg).unwrap().combine(alpha, &ax_element(&v, &g, &d, &cfg).unwrap(), beta);
        let scale = 1.0 + rhs.max_abs();
        prop_assert!(lhs.combine(1.0, &rhs, -1.0).max_abs() <= 1e-12 * scale);
    }
}
