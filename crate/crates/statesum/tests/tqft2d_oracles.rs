//! Surface evaluations against brute-force gauge counting, cylinder state
//! spaces against conjugacy-class counts, and the point-insertion algebra
//! against the center of the group algebra.

mod common;

use common::{conjugacy_class_count, rational_spectrum, surface_hom_count};
use num_rational::BigRational;
use statesum::frob::{group_algebra, matrix_algebra, named_group_table};
use statesum::mesh::gen::surface_of_genus;
use statesum::scalar::{Rat, Scalar};
use statesum::tqft2d::{evaluate_closed_2d, orbifold_state_space, point_insertion_algebra};

#[test]
fn closed_surfaces_count_homomorphisms_into_the_group() {
    for name in ["z2", "z3", "s3"] {
        let table = named_group_table(name).unwrap();
        let alg = group_algebra::<Rat>(&table).unwrap();
        for genus in 0..=2u32 {
            let surface = surface_of_genus(genus).unwrap();
            let value = evaluate_closed_2d(&alg, &surface).unwrap();
            let expected = Rat::from_ratio(
                surface_hom_count(&table, genus) as i64,
                table.len() as i64,
            );
            assert_eq!(value, expected, "{name}, genus {genus}");
        }
    }
}

#[test]
fn matrix_algebra_surfaces_evaluate_to_euler_powers() {
    // The n×n matrix algebra with counit n·tr is Morita-trivial with one
    // simple block, so the closed genus-g value is the pure Euler weight
    // n^(2g-2): the raw pairing contributes ε(1) = n² per handle-free
    // pattern and the normalisation dim(A)^(-χ) = n^(-2χ) tilts it.
    for n in [2i64, 3] {
        let alg = matrix_algebra::<Rat>(n as usize).unwrap();
        for genus in 0..=2u32 {
            let surface = surface_of_genus(genus).unwrap();
            let value = evaluate_closed_2d(&alg, &surface).unwrap();
            let chi = 2 - 2 * genus as i64;
            assert_eq!(value, Rat::from_int(n).pow_i(-chi).unwrap(), "M{n} genus {genus}");
        }
    }
}

#[test]
fn cylinder_state_space_dimension_is_the_class_count() {
    for name in ["z2", "z3", "z4", "z5", "s3"] {
        let table = named_group_table(name).unwrap();
        let alg = group_algebra::<Rat>(&table).unwrap();
        let expected = conjugacy_class_count(&table);
        for k in 1..=3usize {
            let ss = orbifold_state_space(&alg, k, 0.0).unwrap();
            assert!(ss.idempotent, "{name} k={k}");
            assert_eq!(ss.dimension, expected, "{name} k={k}");
        }
    }
    let m2 = matrix_algebra::<Rat>(2).unwrap();
    for k in 1..=3usize {
        let ss = orbifold_state_space(&m2, k, 0.0).unwrap();
        assert!(ss.idempotent);
        assert_eq!(ss.dimension, 1, "matrix algebra k={k}");
    }
}

/// Multiplication matrix of `elem` (coordinates in the algebra basis) in a
/// commutative algebra given by structure constants.
fn mult_matrix(structure: &[Vec<Vec<Rat>>], elem: &[Rat]) -> Vec<Vec<Rat>> {
    let d = elem.len();
    let mut m = vec![vec![Rat::zero(); d]; d];
    for (i, ci) in elem.iter().enumerate() {
        for j in 0..d {
            for (l, row) in m.iter_mut().enumerate() {
                row[j] = row[j].clone() + ci.clone() * structure[i][j][l].clone();
            }
        }
    }
    m
}

#[test]
fn point_insertion_algebra_is_the_center_of_the_group_algebra() {
    // The center of the rational S₃ group algebra is split semisimple of
    // dimension 3 (all characters are rational), hence isomorphic to ℚ³.
    // A commutative unital 3-dimensional algebra containing an element
    // whose multiplication matrix has three distinct rational eigenvalues
    // is generated by it and is ℚ[x] modulo a split squarefree cubic —
    // also ℚ³.  Exhibiting such an element therefore proves isomorphism.
    let table = named_group_table("s3").unwrap();
    let alg = group_algebra::<Rat>(&table).unwrap();
    let pa = point_insertion_algebra(&alg, 0.0).unwrap();
    assert_eq!(pa.dimension, conjugacy_class_count(&table));
    assert!(pa.closed && pa.commutative && pa.associative && pa.unital);
    assert!(pa.projector_idempotent);

    let d = pa.dimension;
    let mut split_witness: Option<Vec<BigRational>> = None;
    'outer: for a in -2i64..=2 {
        for b in -2i64..=2 {
            for c in -2i64..=2 {
                let elem = vec![Rat::from_int(a), Rat::from_int(b), Rat::from_int(c)];
                let m = mult_matrix(&pa.structure, &elem);
                if let Some(roots) = rational_spectrum(&m) {
                    let distinct =
                        roots.windows(2).all(|w| w[0] != w[1]) && roots.len() == d;
                    if distinct {
                        split_witness = Some(roots);
                        break 'outer;
                    }
                }
            }
        }
    }
    assert!(
        split_witness.is_some(),
        "no generating element with split rational spectrum found"
    );

    // The matrix algebra has trivial center: the insertion algebra is ℚ.
    let m2 = matrix_algebra::<Rat>(2).unwrap();
    let pa = point_insertion_algebra(&m2, 0.0).unwrap();
    assert_eq!(pa.dimension, 1);
    assert!(pa.closed && pa.commutative && pa.associative && pa.unital);
}

#[test]
fn state_space_traces_match_the_torus_value() {
    // The trace of the cylinder projector is the closed torus evaluation,
    // however many edges the circle carries.
    for name in ["z2", "z3", "s3"] {
        let table = named_group_table(name).unwrap();
        let alg = group_algebra::<Rat>(&table).unwrap();
        let torus = surface_of_genus(1).unwrap();
        let z = evaluate_closed_2d(&alg, &torus).unwrap();
        for k in 1..=3usize {
            let ss = orbifold_state_space(&alg, k, 0.0).unwrap();
            assert_eq!(ss.trace, z, "{name} k={k}");
        }
    }
}
