//! Circle state spaces and the point-insertion algebra.
//!
//! The cylinder over a triangulated circle defines a projector P on the
//! space of edge labelings; its image is the state space the theory
//! assigns to the circle.  The rank is independent of how many edges the
//! circle has — for a group algebra it is the number of conjugacy
//! classes — and P is exactly idempotent.  Shrinking the circle to a
//! point turns the image into a commutative algebra: the point-insertion
//! algebra, which for k[G] is the center of k[G].
//!
//! ```text
//! cargo run --example circle_state_spaces
//! ```

use statesum::frob::{group_algebra, matrix_algebra, named_group_table, FrobeniusData};
use statesum::scalar::{Rat, Scalar};
use statesum::tqft2d::{orbifold_state_space, point_insertion_algebra};

fn main() {
    let mut algebras: Vec<(String, FrobeniusData<Rat>)> = Vec::new();
    for name in ["z2", "z3", "z5", "s3"] {
        let table = named_group_table(name).unwrap();
        algebras.push((format!("k[{name}]"), group_algebra(&table).unwrap()));
    }
    algebras.push(("M2(k)".to_string(), matrix_algebra(2).unwrap()));

    println!("state-space rank by circle size (and the projector trace at k = 2):");
    println!("{:<8} {:>6} {:>6} {:>6} {:>12}", "algebra", "k=1", "k=2", "k=3", "trace@2");
    for (name, alg) in &algebras {
        let mut dims = Vec::new();
        let mut trace = String::new();
        for k in 1..=3usize {
            let ss = orbifold_state_space(alg, k, 0.0).unwrap();
            assert!(ss.idempotent, "{name}: the cylinder projector must square to itself");
            dims.push(ss.dimension);
            if k == 2 {
                trace = ss.trace.render();
            }
        }
        println!("{:<8} {:>6} {:>6} {:>6} {:>12}", name, dims[0], dims[1], dims[2], trace);
    }

    // The point-insertion algebra of k[S3]: commutative of dimension 3,
    // i.e. the center of the group algebra, one basis vector per
    // conjugacy class.
    let s3 = group_algebra::<Rat>(&named_group_table("s3").unwrap()).unwrap();
    let pa = point_insertion_algebra(&s3, 0.0).unwrap();
    println!();
    println!(
        "point-insertion algebra of k[s3]: dimension {}, commutative: {}, associative: {}, unital: {}",
        pa.dimension, pa.commutative, pa.associative, pa.unital
    );
    println!("unit coordinates: [{}]", render_vec(&pa.unit));
    for i in 0..pa.dimension {
        for j in i..pa.dimension {
            let coeffs: Vec<String> =
                pa.structure[i][j].iter().map(|c| c.render()).collect();
            println!("  b{i} · b{j} = [{}] in the basis (b0, b1, b2)", coeffs.join(", "));
        }
    }
}

fn render_vec(v: &[Rat]) -> String {
    v.iter().map(|x| x.render()).collect::<Vec<_>>().join(", ")
}
