//! Write the sample input files used in the README and the command-line
//! walkthroughs: group algebras, a matrix algebra, cyclic and golden-ratio
//! categories, and a stratified disk with weights.
//!
//! ```text
//! cargo run --example write_sample_inputs
//! ```

use std::collections::BTreeSet;

use statesum::euler::{build_stratified, EulerWeights, Stratum};
use statesum::frob::{group_algebra, matrix_algebra, named_group_table};
use statesum::fusioncat::builtin_category;
use statesum::io::{
    algebra_to_json, category_to_json, render_canonical, stratified_to_json, weights_to_json,
};
use statesum::mesh::builtin_manifold;
use statesum::scalar::{Cx, Rat, Scalar};

fn write(name: &str, v: &serde_json::Value) {
    let path = format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::write(&path, render_canonical(v)).expect("write sample file");
    println!("wrote {path}");
}

fn main() {
    std::fs::create_dir_all(format!("{}/examples/data", env!("CARGO_MANIFEST_DIR")))
        .expect("create data directory");

    // Group algebra of the two-element group with counit eps = (1/2) delta_e.
    // The separability item is informational, so checks still pass.
    let z2 = group_algebra::<Rat>(&named_group_table("z2").unwrap())
        .unwrap()
        .rescale_eps(&Rat::from_ratio(1, 4));
    write("z2.json", &algebra_to_json(&z2));

    // Group algebras in the separable normalisation eps = |G| delta_e.
    for name in ["z3", "s3"] {
        let a = group_algebra::<Rat>(&named_group_table(name).unwrap()).unwrap();
        write(&format!("{name}_algebra.json"), &algebra_to_json(&a));
    }

    // 2x2 matrix algebra: its cylinder state space is one-dimensional.
    write("m2.json", &algebra_to_json(&matrix_algebra::<Rat>(2).unwrap()));

    // Cyclic categories and the golden-ratio category.
    write("vec_z2.json", &category_to_json(&builtin_category::<Rat>("vec_zn", Some(2)).unwrap()));
    write("vec_z3.json", &category_to_json(&builtin_category::<Rat>("vec_zn", Some(3)).unwrap()));
    write("fibonacci.json", &category_to_json(&builtin_category::<Cx>("fibonacci", None).unwrap()));

    // A sphere stratified into a marked vertex and the surrounding bulk,
    // with weights for the invertible Euler theory.
    let sphere = builtin_manifold("sphere2", None).unwrap();
    let mut bulk: BTreeSet<Vec<u32>> = BTreeSet::new();
    for k in 0..=2usize {
        bulk.extend(sphere.faces(k));
    }
    bulk.remove(&vec![0]);
    let strata = vec![
        Stratum { label: "poles".into(), dim: 0, simplices: [vec![0u32]].into_iter().collect() },
        Stratum { label: "bulk".into(), dim: 2, simplices: bulk },
    ];
    let x = build_stratified(sphere, strata, BTreeSet::new()).unwrap();
    write("marked_sphere.json", &stratified_to_json(&x));
    let w = EulerWeights::constant(2, Rat::from_ratio(5, 2));
    write("weights.json", &weights_to_json(&w));
}
