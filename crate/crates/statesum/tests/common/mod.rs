//! Independent oracles shared by the integration tests.
//!
//! Everything here is computed from first principles — multiplication
//! tables, brute-force enumeration, bisection — never by calling the code
//! under test, so agreement is meaningful evidence.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use statesum::scalar::Rat;

/// |Hom(π₁(Σ_g), G)|: tuples (a₁, b₁, …, a_g, b_g) in G^{2g} whose product
/// of commutators is the identity, counted by brute force.
pub fn surface_hom_count(table: &[Vec<usize>], genus: u32) -> u64 {
    let n = table.len();
    let inv: Vec<usize> = (0..n)
        .map(|g| (0..n).find(|&h| table[g][h] == 0).expect("group inverse"))
        .collect();
    let commutator = |a: usize, b: usize| table[table[table[a][b]][inv[a]]][inv[b]];
    // Walk G^{2g} with an odometer; the recursion depth is tiny.
    let g = genus as usize;
    if g == 0 {
        return 1;
    }
    let mut digits = vec![0usize; 2 * g];
    let mut count = 0u64;
    loop {
        let mut acc = 0usize;
        for pair in digits.chunks(2) {
            acc = table[acc][commutator(pair[0], pair[1])];
        }
        if acc == 0 {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return count;
            }
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Dimension of the center of the group algebra = number of conjugacy
/// classes, found by orbit partitioning under conjugation.
pub fn conjugacy_class_count(table: &[Vec<usize>]) -> usize {
    let n = table.len();
    let inv: Vec<usize> = (0..n)
        .map(|g| (0..n).find(|&h| table[g][h] == 0).expect("group inverse"))
        .collect();
    let mut seen = vec![false; n];
    let mut classes = 0;
    for g in 0..n {
        if seen[g] {
            continue;
        }
        classes += 1;
        for h in 0..n {
            seen[table[table[h][g]][inv[h]]] = true;
        }
    }
    classes
}

/// Positive root of x² + x − 1 by bisection — the golden-ratio reciprocal,
/// derived without any closed-form square root.
pub fn golden_reciprocal_by_bisection() -> f64 {
    let f = |x: f64| x * x + x - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// All rational roots of the characteristic polynomial of a square matrix
/// over ℚ, provided the polynomial splits with distinct roots; `None`
/// otherwise.  Uses Fadeev–LeVerrier for the characteristic polynomial and
/// the rational root theorem on the cleared-denominator form.
pub fn rational_spectrum(m: &[Vec<Rat>]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let a: Vec<Vec<BigRational>> =
        m.iter().map(|row| row.iter().map(|x| x.0.clone()).collect()).collect();
    // Fadeev–LeVerrier: c_n x^n + … with c_n = 1.
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut acc = vec![vec![BigRational::zero(); n]; n]; // M_0 = 0
    for k in 1..=n {
        // acc ← A·(acc + c_{n-k+1}·I)
        let mut shifted = acc.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for (l, srow) in shifted.iter().enumerate() {
                    s += &a[i][l] * &srow[j];
                }
                next[i][j] = s;
            }
        }
        let trace: BigRational = (0..n).map(|i| next[i][i].clone()).sum();
        coeffs[n - k] = -trace / BigRational::from_integer(BigInt::from(k as i64));
        acc = next;
    }
    // Clear denominators to an integer polynomial.
    let mut lcm = BigInt::one();
    for c in &coeffs {
        lcm = num_integer::lcm(lcm.clone(), c.denom().clone());
    }
    let ints: Vec<BigInt> = coeffs.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let lead = ints[n].clone();
    let tail = ints[0].clone();
    // Candidate roots p/q with p | tail, q | lead (both via small divisors).
    let divisors = |x: &BigInt| -> Vec<BigInt> {
        let mut out = Vec::new();
        let ax = x.abs();
        if ax.is_zero() {
            return vec![BigInt::zero()];
        }
        let mut d = BigInt::one();
        while &d * &d <= ax {
            if (&ax % &d).is_zero() {
                out.push(d.clone());
                out.push(&ax / &d);
            }
            d += 1;
        }
        out
    };
    let eval = |x: &BigRational| -> BigRational {
        let mut v = BigRational::zero();
        for c in ints.iter().rev() {
            v = v * x + BigRational::from_integer(c.clone());
        }
        v
    };
    let mut roots = Vec::new();
    for p in divisors(&tail) {
        for q in divisors(&lead) {
            if q.is_zero() {
                continue;
            }
            for sign in [1, -1] {
                let cand = BigRational::new(&p * BigInt::from(sign), q.clone());
                if eval(&cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
            if tail.is_zero() {
                break; // p = 0 root handled once
            }
        }
    }
    if tail.is_zero() && !roots.contains(&BigRational::zero()) {
        roots.push(BigRational::zero());
    }
    if roots.len() == n {
        roots.sort();
        Some(roots)
    } else {
        None
    }
}

// ---------------------------------------------------------------------
// Mesh and stratification helpers shared across the integration tests.
// ---------------------------------------------------------------------

use std::collections::{BTreeMap, BTreeSet};

use statesum::euler::{remove_point, unstratified, StratifiedComplex};
use statesum::mesh::{build_triangulation, Height, MoveKind, Triangulation, VertexId};
use statesum::scalar::Scalar;

pub fn heights_for(ids: &[VertexId]) -> BTreeMap<VertexId, Height> {
    ids.iter().map(|&v| (v, Height::from_integer((v as i64).into()))).collect()
}

/// Six triangles between two rim circles: the triangulated cylinder.
pub fn hexagonal_annulus() -> Triangulation {
    let simplices = vec![
        vec![0, 1, 4],
        vec![0, 3, 4],
        vec![0, 2, 3],
        vec![1, 2, 5],
        vec![1, 4, 5],
        vec![2, 3, 5],
    ];
    let signs = vec![1, -1, -1, 1, -1, 1];
    let boundary: BTreeMap<String, Vec<Vec<VertexId>>> = [
        ("outer".to_string(), vec![vec![0, 1], vec![1, 2], vec![0, 2]]),
        ("inner".to_string(), vec![vec![3, 4], vec![4, 5], vec![3, 5]]),
    ]
    .into();
    build_triangulation(2, heights_for(&[0, 1, 2, 3, 4, 5]), simplices, signs, boundary).unwrap()
}

/// Refine toward the interior until a vertex becomes puncturable, and
/// puncture there. Each round subdivides the simplex with the fewest rim
/// vertices; `remove_point` itself arbitrates removability (a star that
/// touches the rim anywhere would pinch the complement, so the validator
/// rejects it until a fully interior star appears). Returns the complex
/// before and after the puncture.
pub fn puncture_somewhere(
    mut t: Triangulation,
    kind: MoveKind,
    rounds: usize,
) -> (StratifiedComplex, StratifiedComplex) {
    for _ in 0..rounds {
        let rim_vertices: BTreeSet<VertexId> =
            t.boundary_facets().iter().flatten().copied().collect();
        let sites = t.enumerate_oriented_moves(kind).unwrap();
        let site = sites
            .iter()
            .min_by_key(|s| s.simplices[0].iter().filter(|v| rim_vertices.contains(v)).count())
            .unwrap();
        t = t.apply_pachner_move(site).unwrap();

        let x = unstratified(t.clone());
        let interior: Vec<VertexId> = t
            .heights()
            .keys()
            .copied()
            .filter(|v| !t.boundary_facets().iter().any(|f| f.contains(v)))
            .collect();
        if let Some(p) = interior.iter().find_map(|&v| remove_point(&x, v, "end").ok()) {
            return (x, p);
        }
    }
    panic!("no removable interior vertex appeared");
}

// ---------------------------------------------------------------------
// Exact commutative-algebra helpers: multiplication against structure
// constants, and splitting into primitive idempotents over the rationals.
// ---------------------------------------------------------------------

/// Product of two coordinate vectors under structure constants
/// `c[i][j][k]` (e_i·e_j = Σ_k c[i][j][k]·e_k).
pub fn alg_mul<S: Scalar>(structure: &[Vec<Vec<S>>], a: &[S], b: &[S]) -> Vec<S> {
    let n = structure.len();
    let mut out = vec![S::zero(); n];
    for i in 0..n {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if b[j].is_zero() {
                continue;
            }
            for (k, target) in out.iter_mut().enumerate() {
                *target =
                    target.clone() + a[i].clone() * b[j].clone() * structure[i][j][k].clone();
            }
        }
    }
    out
}

/// Matrix of left multiplication by `a`.
pub fn mult_matrix(structure: &[Vec<Vec<Rat>>], a: &[Rat]) -> Vec<Vec<Rat>> {
    let n = structure.len();
    let mut m = vec![vec![Rat::zero(); n]; n];
    for (j, col) in (0..n).map(|j| {
        let mut basis = vec![Rat::zero(); n];
        basis[j] = Rat::one();
        (j, alg_mul(structure, a, &basis))
    }) {
        for i in 0..n {
            m[i][j] = col[i].clone();
        }
    }
    m
}

/// Split a commutative unital algebra over ℚ into primitive idempotents.
///
/// Searches for an element whose left-multiplication matrix has as many
/// distinct rational eigenvalues as the dimension; Lagrange interpolation
/// at that element then yields the idempotents, which are verified to be
/// orthogonal, idempotent, and complete. Finding such an element proves
/// the algebra is isomorphic to ℚ^n with the idempotents as the standard
/// basis; returns None when no generator with split rational spectrum is
/// found in the search box.
pub fn split_idempotents(structure: &[Vec<Vec<Rat>>], unit: &[Rat]) -> Option<Vec<Vec<Rat>>> {
    let n = structure.len();
    let mut coeffs = vec![-2i64; n];
    loop {
        let elem: Vec<Rat> = coeffs.iter().map(|&c| Rat::from_int(c)).collect();
        if let Some(roots) = rational_spectrum(&mult_matrix(structure, &elem)) {
            let mut idems = Vec::new();
            for i in 0..n {
                // e_i = ∏_{j≠i} (t − λ_j) / (λ_i − λ_j)
                let mut e = unit.to_vec();
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let shifted: Vec<Rat> = elem
                        .iter()
                        .zip(unit)
                        .map(|(t, u)| t.clone() - Rat(roots[j].clone()) * u.clone())
                        .collect();
                    let scale = Rat(roots[i].clone() - roots[j].clone()).recip().unwrap();
                    e = alg_mul(structure, &e, &shifted);
                    e = e.into_iter().map(|x| x * scale.clone()).collect();
                }
                idems.push(e);
            }
            // Verify: orthogonal idempotents summing to the unit.
            let zero = vec![Rat::zero(); n];
            let mut total = zero.clone();
            let mut ok = true;
            for i in 0..n {
                for j in 0..n {
                    let p = alg_mul(structure, &idems[i], &idems[j]);
                    let want = if i == j { &idems[i] } else { &zero };
                    ok &= &p == want;
                }
                total = total.iter().zip(&idems[i]).map(|(a, b)| a.clone() + b.clone()).collect();
            }
            ok &= total == unit;
            if ok {
                return Some(idems);
            }
        }
        // odometer over the coefficient box {−2..2}^n
        let mut pos = 0;
        loop {
            if pos == n {
                return None;
            }
            coeffs[pos] += 1;
            if coeffs[pos] <= 2 {
                break;
            }
            coeffs[pos] = -2;
            pos += 1;
        }
    }
}

/// Conjugacy classes of a finite group given by its multiplication table,
/// identity first.
pub fn conjugacy_classes(table: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = table.len();
    let inv: Vec<usize> = (0..n)
        .map(|g| (0..n).find(|&h| table[g][h] == 0).expect("group inverse"))
        .collect();
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for g in 0..n {
        if seen[g] {
            continue;
        }
        let mut class: BTreeSet<usize> = BTreeSet::new();
        for h in 0..n {
            class.insert(table[table[h][g]][inv[h]]);
        }
        for &x in &class {
            seen[x] = true;
        }
        classes.push(class.into_iter().collect());
    }
    classes
}

/// The centre of the rational group algebra, brute force: class sums as a
/// basis, with structure constants obtained by convolving in the group
/// algebra and reading off coefficients classwise. Returns the structure
/// tensor and the unit's coordinates (the identity's class comes first).
pub fn center_structure_constants(table: &[Vec<usize>]) -> (Vec<Vec<Vec<Rat>>>, Vec<Rat>) {
    let n = table.len();
    let classes = conjugacy_classes(table);
    let k = classes.len();
    let mut structure = vec![vec![vec![Rat::zero(); k]; k]; k];
    for (i, ci) in classes.iter().enumerate() {
        for (j, cj) in classes.iter().enumerate() {
            // Convolve the two class sums in the group algebra.
            let mut coeffs = vec![0i64; n];
            for &a in ci {
                for &b in cj {
                    coeffs[table[a][b]] += 1;
                }
            }
            // A central element has constant coefficients on each class;
            // read the coefficient at each class representative.
            for (m, cm) in classes.iter().enumerate() {
                let rep = cm[0];
                assert!(
                    cm.iter().all(|&g| coeffs[g] == coeffs[rep]),
                    "class sums multiply to central elements"
                );
                structure[i][j][m] = Rat::from_int(coeffs[rep]);
            }
        }
    }
    let mut unit = vec![Rat::zero(); k];
    unit[0] = Rat::one(); // the identity is alone in its class, listed first
    (structure, unit)
}
