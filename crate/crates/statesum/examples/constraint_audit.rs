//! Audit the defining constraints of both kinds of input data.
//!
//! Two-dimensional data (a Frobenius algebra) is checked against the
//! algebra axioms; the separability line is informational, and the demo
//! shows how rescaling the counit keeps every required axiom but loses
//! separability — exactly the degree of freedom that breaks move
//! invariance.  Three-dimensional data (fusion data) is checked against
//! the ten defining constraints: one pentagon, six lens, three bubble.
//! A one-part-in-a-thousand nudge of a single associator entry is caught
//! by the pentagon.
//!
//! ```text
//! cargo run --example constraint_audit
//! ```

use statesum::frob::{check_frobenius_axioms, group_algebra, named_group_table};
use statesum::fusioncat::{builtin_category, FusionData};
use statesum::report::Report;
use statesum::scalar::{Cx, Rat, Scalar};
use statesum::statesum3d::ten_constraints;

fn main() {
    let z3 = group_algebra::<Rat>(&named_group_table("z3").unwrap()).unwrap();
    let rep = check_frobenius_axioms(&z3, 0.0).unwrap();
    print!("{}", Report::from_check("algebra axioms: k[z3]", &rep).render_text());

    // ε ↦ ε/3 : still a symmetric Frobenius algebra, no longer separable.
    let rescaled = z3.rescale_eps(&Rat::from_ratio(1, 3));
    let rep = check_frobenius_axioms(&rescaled, 0.0).unwrap();
    println!();
    print!("{}", Report::from_check("algebra axioms: k[z3] with ε = δ_e", &rep).render_text());

    let vec_z3: FusionData<Rat> = builtin_category("vec_zn", Some(3)).unwrap();
    let rep = ten_constraints(&vec_z3, 0.0).unwrap();
    println!();
    print!("{}", Report::from_constraints("ten constraints: Vec(Z/3)", &rep).render_text());

    let fib: FusionData<Cx> = builtin_category("fibonacci", None).unwrap();
    let rep = ten_constraints(&fib, 1e-9).unwrap();
    println!();
    print!("{}", Report::from_constraints("ten constraints: golden category", &rep).render_text());

    // Nudge one associator entry by 10⁻³ and rebuild the inverse tables
    // honestly: the pentagon flags it.
    let mut bent = fib.clone();
    let key = (1, 1, 1, 1, 0, 0);
    let cur = bent.f.get(&key).unwrap().clone();
    bent.f.insert(key, cur + Cx::from_f64(1e-3).unwrap());
    let bent = FusionData::with_derived_fbar(
        bent.labels.clone(),
        bent.unit,
        bent.dual.clone(),
        bent.n.clone(),
        bent.f.clone(),
        bent.d.clone(),
        bent.phi.clone(),
    )
    .unwrap();
    let rep = ten_constraints(&bent, 1e-9).unwrap();
    println!();
    print!(
        "{}",
        Report::from_constraints("ten constraints: golden with one entry nudged by 1e-3", &rep)
            .render_text()
    );
}
