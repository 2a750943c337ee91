//! Regenerate the three shipped 3-manifold data files.
//!
//! Each manifold is built from first principles, Pachner-simplified with a
//! seed sweep to the smallest complex found, certified by its mod-2 and
//! mod-3 Betti numbers, and written in canonical JSON.  Rerunning this
//! example reproduces `data/{s2xs1,torus3,rp3}.json` byte for byte.
//!
//! ```text
//! cargo run --release --example regenerate_data
//! ```

use statesum::io::{render_canonical, triangulation_to_json};
use statesum::mesh::gen::{
    betti_numbers_mod_p, boundary_of_simplex, csaszar_torus, layered_product_s1,
    rp3_barycentric_quotient, simplify_3d,
};
use statesum::mesh::Triangulation;

fn certify_and_write(name: &str, tri: &Triangulation, b2: &[usize], b3: &[usize]) {
    assert!(tri.is_closed(), "{name}: expected a closed manifold");
    assert_eq!(betti_numbers_mod_p(tri, 2), b2, "{name}: mod-2 Betti numbers");
    assert_eq!(betti_numbers_mod_p(tri, 3), b3, "{name}: mod-3 Betti numbers");
    let path = format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"));
    std::fs::write(&path, render_canonical(&triangulation_to_json(tri))).expect("write data file");
    let f = tri.f_vector();
    println!("{name}: wrote {path} with f-vector {f:?}");
}

/// Simplify across seeds, keeping the smallest result that reaches `cap`.
fn shrink(tri: &Triangulation, target: usize, cap: usize, seeds: u64) -> Triangulation {
    let mut best = tri.clone();
    for seed in 0..seeds {
        let candidate = simplify_3d(tri, target, seed).expect("simplification stays valid");
        let better = candidate.vertex_count() < best.vertex_count()
            || (candidate.vertex_count() == best.vertex_count()
                && candidate.simplices().len() < best.simplices().len());
        if better {
            best = candidate;
        }
    }
    assert!(
        best.vertex_count() <= cap,
        "best simplification has {} vertices, cap was {cap}",
        best.vertex_count()
    );
    best
}

fn main() {
    let s2xs1 = {
        let product = layered_product_s1(&boundary_of_simplex(2).unwrap(), 3).unwrap();
        shrink(&product, 10, 14, 16)
    };
    certify_and_write("s2xs1", &s2xs1, &[1, 1, 1, 1], &[1, 1, 1, 1]);

    let torus3 = {
        let product = layered_product_s1(&csaszar_torus().unwrap(), 3).unwrap();
        shrink(&product, 15, 19, 16)
    };
    certify_and_write("torus3", &torus3, &[1, 3, 3, 1], &[1, 3, 3, 1]);

    let rp3 = {
        let quotient = rp3_barycentric_quotient().unwrap();
        shrink(&quotient, 11, 17, 16)
    };
    certify_and_write("rp3", &rp3, &[1, 1, 1, 1], &[1, 0, 0, 1]);
}
