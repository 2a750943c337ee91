//! Evaluate closed oriented surfaces against several Frobenius algebras.
//!
//! For a group algebra k[G] the value of the genus-g surface is the
//! number of flat G-bundles weighted by automorphisms,
//! |Hom(π₁(Σ_g), G)| / |G|, so the printed column doubles as a quick
//! character-theory table.  The n×n matrix algebra has one simple block
//! and evaluates to the pure Euler weight n^(2g−2).
//!
//! ```text
//! cargo run --example surface_gauge_counts
//! ```

use statesum::frob::{group_algebra, matrix_algebra, named_group_table, FrobeniusData};
use statesum::mesh::gen::surface_of_genus;
use statesum::scalar::{Rat, Scalar};
use statesum::tqft2d::evaluate_closed_2d;

fn main() {
    let mut algebras: Vec<(String, FrobeniusData<Rat>)> = Vec::new();
    for name in ["z2", "z3", "z4", "s3"] {
        let table = named_group_table(name).unwrap();
        algebras.push((format!("k[{name}]"), group_algebra(&table).unwrap()));
    }
    algebras.push(("M2(k)".to_string(), matrix_algebra(2).unwrap()));
    algebras.push(("M3(k)".to_string(), matrix_algebra(3).unwrap()));

    println!("{:<8} {:>10} {:>10} {:>10} {:>10}", "algebra", "genus 0", "genus 1", "genus 2", "genus 3");
    for (name, alg) in &algebras {
        let mut row = format!("{name:<8}");
        for genus in 0..=3u32 {
            let surface = surface_of_genus(genus).unwrap();
            let value = evaluate_closed_2d(alg, &surface).unwrap();
            row.push_str(&format!(" {:>10}", value.render()));
        }
        println!("{row}");
    }

    println!();
    println!("Reading the k[G] rows: genus 0 is 1/|G|; genus 1 counts commuting");
    println!("pairs over |G| (the class number); higher genus grows by the sum");
    println!("over irreducibles of (|G|/dim)^(2g-2).  The matrix rows are the");
    println!("bare Euler weights n^(2g-2) of a single simple block.");
}
