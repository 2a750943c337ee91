//! Euler-characteristic calculus for stratified complexes and the invertible
//! Euler theory built on it.
//!
//! A stratified complex is a triangulation whose faces (of every dimension)
//! are partitioned into labeled connected strata; the closure of each
//! stratum must satisfy the frontier condition.  The central quantity is the
//! symmetric Euler characteristic of a stratum closure `Y` inside the total
//! complex `X`:
//!
//! ```text
//! χ̃(Y) = 2·χ(Y) − χ(Y ∩ ∂X)
//! ```
//!
//! where boundary components marked as *ends* (open ends created by removing
//! a point, rather than honest boundary) are excluded from the second term.
//! χ̃ is additive under gluing along boundary pieces — the correction terms
//! of χ and of the boundary cancel — which makes the weight product
//!
//! ```text
//! Z(X) = ∏_{strata of dim j ≥ 1} ψ_j^{χ̃(stratum)}
//! ```
//!
//! multiplicative under composition and equal to 1 on cylinders.  Removing
//! an interior point replaces its open star by an end and shifts χ̃ by
//! `2·E_n` with `E_n = χ(S^{n−1}) − 1`, so `E₂ = −1` and `E₃ = +1`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::mesh::{build_triangulation, MeshError, Triangulation, VertexId};
use crate::scalar::{Scalar, ScalarError};

#[derive(Debug, Error)]
pub enum EulerError {
    /// The declared strata do not form a valid stratification.
    #[error("bad stratification: {0}")]
    BadStratification(String),
    /// A weight is zero (or numerically indistinguishable from zero).
    #[error("non-invertible weight: {0}")]
    NonInvertibleWeight(String),
    /// A stratum dimension has no declared weight.
    #[error("no weight declared for stratum dimension {0}")]
    MissingWeight(u8),
    /// The requested vertex cannot be removed.
    #[error("cannot remove point: {0}")]
    BadPoint(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// One stratum: a labeled set of simplices (of mixed dimensions) whose open
/// cells make up the stratum.  `dim` is the dimension of the stratum, i.e.
/// the largest simplex dimension occurring in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub label: String,
    pub dim: u8,
    pub simplices: BTreeSet<Vec<VertexId>>,
}

/// A triangulation with a declared stratification and optional open ends.
#[derive(Clone, Debug)]
pub struct StratifiedComplex {
    underlying: Triangulation,
    strata: Vec<Stratum>,
    /// Boundary mark names that represent removed points (ends at infinity)
    /// rather than honest boundary; they are excluded from the χ̃ boundary
    /// term.
    ends: BTreeSet<String>,
}

/// All faces of a simplex set, the simplices themselves included.
fn closure_of(simplices: &BTreeSet<Vec<VertexId>>) -> BTreeSet<Vec<VertexId>> {
    let mut out = BTreeSet::new();
    for s in simplices {
        // Every nonempty subset of an id-sorted simplex, kept sorted.
        let n = s.len();
        for mask in 1u32..(1 << n) {
            let face: Vec<VertexId> =
                (0..n).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
            out.insert(face);
        }
    }
    out
}

fn alternating_count(faces: &BTreeSet<Vec<VertexId>>) -> i64 {
    faces.iter().map(|f| if f.len() % 2 == 1 { 1i64 } else { -1i64 }).sum()
}

/// χ and χ̃ of one stratum, as reported by [`euler_characteristics`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumChi {
    pub label: String,
    pub dim: u8,
    /// Euler characteristic of the stratum closure.
    pub chi: i64,
    /// Symmetric Euler characteristic 2χ − χ(closure ∩ ∂X), with ends
    /// excluded from the boundary term.
    pub chi_tilde: i64,
}

impl StratifiedComplex {
    pub fn underlying(&self) -> &Triangulation {
        &self.underlying
    }
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }
    pub fn ends(&self) -> &BTreeSet<String> {
        &self.ends
    }

    /// The boundary subcomplex that counts as honest boundary: all faces of
    /// boundary facets that do not belong to an end.
    fn honest_boundary(&self) -> BTreeSet<Vec<VertexId>> {
        let end_facets: BTreeSet<Vec<VertexId>> = self
            .ends
            .iter()
            .filter_map(|name| self.underlying.boundary_marks().get(name))
            .flat_map(|facets| facets.iter().cloned())
            .collect();
        let facets: BTreeSet<Vec<VertexId>> = self
            .underlying
            .boundary_facets()
            .into_iter()
            .filter(|f| !end_facets.contains(f))
            .collect();
        closure_of(&facets)
    }
}

/// Wrap a triangulation as a single-stratum ("bulk") complex with no ends.
pub fn unstratified(t: Triangulation) -> StratifiedComplex {
    let mut simplices = BTreeSet::new();
    for k in 0..=t.dim() as usize {
        simplices.extend(t.faces(k));
    }
    let dim = t.dim();
    StratifiedComplex {
        underlying: t,
        strata: vec![Stratum { label: "bulk".to_string(), dim, simplices }],
        ends: BTreeSet::new(),
    }
}

/// Validate and assemble a stratified complex.  The strata must partition
/// all faces of the triangulation, each stratum must be connected, and the
/// stratum closures must satisfy the frontier condition: if any simplex of
/// stratum `A` is a proper face of a simplex of stratum `B`, then every
/// simplex of `A` is.
pub fn build_stratified(
    underlying: Triangulation,
    strata: Vec<Stratum>,
    ends: BTreeSet<String>,
) -> Result<StratifiedComplex, EulerError> {
    let mut all_faces: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    for k in 0..=underlying.dim() as usize {
        all_faces.extend(underlying.faces(k));
    }

    let mut seen: BTreeSet<&Vec<VertexId>> = BTreeSet::new();
    let mut labels: BTreeSet<&str> = BTreeSet::new();
    for stratum in &strata {
        if !labels.insert(&stratum.label) {
            return Err(EulerError::BadStratification(format!(
                "duplicate stratum label {:?}",
                stratum.label
            )));
        }
        if stratum.simplices.is_empty() {
            return Err(EulerError::BadStratification(format!(
                "stratum {:?} is empty",
                stratum.label
            )));
        }
        let mut max_dim = 0usize;
        for s in &stratum.simplices {
            if !all_faces.contains(s) {
                return Err(EulerError::BadStratification(format!(
                    "stratum {:?} lists {s:?}, which is not a face of the complex",
                    stratum.label
                )));
            }
            if !seen.insert(s) {
                return Err(EulerError::BadStratification(format!(
                    "simplex {s:?} appears in more than one stratum"
                )));
            }
            max_dim = max_dim.max(s.len() - 1);
        }
        if max_dim != stratum.dim as usize {
            return Err(EulerError::BadStratification(format!(
                "stratum {:?} declares dimension {} but its largest simplex has dimension {}",
                stratum.label, stratum.dim, max_dim
            )));
        }
        if !stratum_connected(stratum) {
            return Err(EulerError::BadStratification(format!(
                "stratum {:?} is not connected",
                stratum.label
            )));
        }
    }
    if seen.len() != all_faces.len() {
        let missing = all_faces.iter().find(|f| !seen.contains(f)).cloned().unwrap_or_default();
        return Err(EulerError::BadStratification(format!(
            "faces not covered by any stratum, e.g. {missing:?}"
        )));
    }

    // Frontier condition between every ordered pair of strata.
    for a in &strata {
        for b in &strata {
            if a.label == b.label {
                continue;
            }
            let touches = a
                .simplices
                .iter()
                .any(|s| b.simplices.iter().any(|t| is_proper_face(s, t)));
            if touches {
                let contained = a
                    .simplices
                    .iter()
                    .all(|s| b.simplices.iter().any(|t| is_proper_face(s, t)));
                if !contained {
                    return Err(EulerError::BadStratification(format!(
                        "strata {:?} and {:?} violate the frontier condition",
                        a.label, b.label
                    )));
                }
            }
        }
    }

    for name in &ends {
        if !underlying.boundary_marks().contains_key(name) {
            return Err(EulerError::BadStratification(format!(
                "end {name:?} is not a boundary mark"
            )));
        }
    }

    Ok(StratifiedComplex { underlying, strata, ends })
}

fn is_proper_face(small: &[VertexId], big: &[VertexId]) -> bool {
    small.len() < big.len() && small.iter().all(|v| big.contains(v))
}

/// Connectivity of the open stratum: simplices are adjacent when one is a
/// face of the other inside the stratum.
fn stratum_connected(stratum: &Stratum) -> bool {
    let members: Vec<&Vec<VertexId>> = stratum.simplices.iter().collect();
    let m = members.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if is_proper_face(members[i], members[j]) || is_proper_face(members[j], members[i]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let root = find(&mut parent, 0);
    (0..m).all(|i| find(&mut parent, i) == root)
}

/// χ and χ̃ for every stratum, in declaration order.
pub fn euler_characteristics(x: &StratifiedComplex) -> Vec<StratumChi> {
    let boundary = x.honest_boundary();
    x.strata
        .iter()
        .map(|stratum| {
            let closure = closure_of(&stratum.simplices);
            let chi = alternating_count(&closure);
            let on_boundary: BTreeSet<Vec<VertexId>> =
                closure.intersection(&boundary).cloned().collect();
            let chi_tilde = 2 * chi - alternating_count(&on_boundary);
            StratumChi { label: stratum.label.clone(), dim: stratum.dim, chi, chi_tilde }
        })
        .collect()
}

/// Invertible weights per stratum dimension.  Dimension-zero strata carry
/// no weight.
#[derive(Clone, Debug)]
pub struct EulerWeights<S: Scalar> {
    pub psi: BTreeMap<u8, S>,
}

impl<S: Scalar> EulerWeights<S> {
    pub fn constant(dim: u8, value: S) -> Self {
        EulerWeights { psi: (1..=dim).map(|j| (j, value.clone())).collect() }
    }
}

/// Evaluate the invertible Euler theory: `∏ ψ_j^{χ̃(stratum)}` over all
/// strata of dimension at least one.
pub fn z_euler_evaluate<S: Scalar>(
    x: &StratifiedComplex,
    w: &EulerWeights<S>,
) -> Result<S, EulerError> {
    let mut acc = S::one();
    for chi in euler_characteristics(x) {
        if chi.dim == 0 {
            continue;
        }
        let psi = w.psi.get(&chi.dim).ok_or(EulerError::MissingWeight(chi.dim))?;
        if psi.is_zero() {
            return Err(EulerError::NonInvertibleWeight(format!(
                "ψ_{} = {}",
                chi.dim,
                psi.render()
            )));
        }
        let factor = psi.pow_i(chi.chi_tilde).map_err(|_| {
            EulerError::NonInvertibleWeight(format!("ψ_{} = {}", chi.dim, psi.render()))
        })?;
        acc = acc * factor;
    }
    Ok(acc)
}

/// Remove an interior point: delete the closed star of `v` and mark the
/// link sphere as an end named `end_name`.  Strata lose the simplices
/// containing `v`; χ̃ of the ambient stratum shifts by `2·E_n`.
pub fn remove_point(
    x: &StratifiedComplex,
    v: VertexId,
    end_name: &str,
) -> Result<StratifiedComplex, EulerError> {
    let t = &x.underlying;
    if !t.heights().contains_key(&v) {
        return Err(EulerError::BadPoint(format!("vertex {v} does not exist")));
    }
    if t.boundary_facets().iter().any(|f| f.contains(&v)) {
        return Err(EulerError::BadPoint(format!("vertex {v} lies on the boundary")));
    }
    if t.boundary_marks().contains_key(end_name) {
        return Err(EulerError::BadPoint(format!(
            "boundary name {end_name:?} is already in use"
        )));
    }

    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    let mut link = Vec::new();
    for (idx, s) in t.simplices().iter().enumerate() {
        if s.contains(&v) {
            link.push(s.iter().copied().filter(|u| *u != v).collect::<Vec<_>>());
        } else {
            simplices.push(s.clone());
            signs.push(t.height_sign(idx));
        }
    }
    if simplices.is_empty() {
        return Err(EulerError::BadPoint(format!(
            "the star of vertex {v} is the whole complex"
        )));
    }
    let kept_vertices: BTreeSet<VertexId> = simplices.iter().flatten().copied().collect();
    let heights = t
        .heights()
        .iter()
        .filter(|(u, _)| kept_vertices.contains(u))
        .map(|(u, h)| (*u, h.clone()))
        .collect();

    let mut boundary: BTreeMap<String, Vec<Vec<VertexId>>> = BTreeMap::new();
    for (name, facets) in t.boundary_marks() {
        let kept: Vec<Vec<VertexId>> =
            facets.iter().filter(|f| !f.contains(&v)).cloned().collect();
        if !kept.is_empty() {
            boundary.insert(name.clone(), kept);
        }
    }
    boundary.insert(end_name.to_string(), link);

    let underlying = build_triangulation(t.dim(), heights, simplices, signs, boundary)?;

    let strata: Vec<Stratum> = x
        .strata
        .iter()
        .filter_map(|stratum| {
            let simplices: BTreeSet<Vec<VertexId>> = stratum
                .simplices
                .iter()
                .filter(|s| !s.contains(&v))
                .cloned()
                .collect();
            if simplices.is_empty() {
                None
            } else {
                Some(Stratum { label: stratum.label.clone(), dim: stratum.dim, simplices })
            }
        })
        .collect();

    let mut ends = x.ends.clone();
    ends.insert(end_name.to_string());
    build_stratified(underlying, strata, ends)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{builtin_manifold, Height, MoveKind};
    use crate::scalar::Rat;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from_ratio(n, d)
    }

    fn disk_triangle() -> Triangulation {
        let heights: BTreeMap<VertexId, Height> =
            (0..3).map(|x| (x, Height::from_integer((x as i64).into()))).collect();
        let boundary: BTreeMap<String, Vec<Vec<VertexId>>> =
            [("rim".to_string(), vec![vec![0, 1], vec![1, 2], vec![0, 2]])].into();
        build_triangulation(2, heights, vec![vec![0, 1, 2]], vec![1], boundary).unwrap()
    }

    #[test]
    fn closed_surfaces_double_their_euler_characteristic() {
        for (name, chi) in [("sphere2", 2i64), ("torus2", 0)] {
            let x = unstratified(builtin_manifold(name, None).unwrap());
            let report = euler_characteristics(&x);
            assert_eq!(report.len(), 1);
            assert_eq!(report[0].chi, chi);
            assert_eq!(report[0].chi_tilde, 2 * chi);
        }
    }

    #[test]
    fn disk_and_its_boundary_term() {
        let x = unstratified(disk_triangle());
        let report = euler_characteristics(&x);
        assert_eq!(report[0].chi, 1);
        // The rim circle has χ = 0, so χ̃ = 2·1 − 0 = 2.
        assert_eq!(report[0].chi_tilde, 2);
    }

    #[test]
    fn weights_power_up_the_symmetric_characteristic() {
        let sphere = unstratified(builtin_manifold("sphere2", None).unwrap());
        let w = EulerWeights::constant(2, rat(3, 2));
        assert_eq!(z_euler_evaluate(&sphere, &w).unwrap(), rat(81, 16));

        let torus = unstratified(builtin_manifold("torus2", None).unwrap());
        assert_eq!(z_euler_evaluate(&torus, &w).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let sphere = unstratified(builtin_manifold("sphere2", None).unwrap());
        let w = EulerWeights::constant(2, Rat::from_int(0));
        assert!(matches!(
            z_euler_evaluate(&sphere, &w),
            Err(EulerError::NonInvertibleWeight(_))
        ));
        let none: EulerWeights<Rat> = EulerWeights { psi: BTreeMap::new() };
        assert!(matches!(z_euler_evaluate(&sphere, &none), Err(EulerError::MissingWeight(2))));
    }

    #[test]
    fn point_stratum_carries_no_weight() {
        let t = builtin_manifold("sphere2", None).unwrap();
        let mut bulk = BTreeSet::new();
        for k in 0..=2usize {
            bulk.extend(t.faces(k));
        }
        bulk.remove(&vec![0u32]);
        let strata = vec![
            Stratum { label: "marked point".into(), dim: 0, simplices: [vec![0u32]].into() },
            Stratum { label: "bulk".into(), dim: 2, simplices: bulk },
        ];
        let x = build_stratified(t, strata, BTreeSet::new()).unwrap();
        let report = euler_characteristics(&x);
        assert_eq!(report[0].chi_tilde, 2); // the point itself: 2·1 − 0
        assert_eq!(report[1].chi_tilde, 4); // bulk closure is the whole sphere
        let w = EulerWeights::constant(2, rat(5, 1));
        assert_eq!(z_euler_evaluate(&x, &w).unwrap(), Rat::from_int(625));
    }

    #[test]
    fn stratification_validation_catches_misuse() {
        let t = builtin_manifold("sphere2", None).unwrap();
        // Not a partition: leave out one vertex.
        let mut partial = BTreeSet::new();
        for k in 0..=2usize {
            partial.extend(t.faces(k));
        }
        partial.remove(&vec![0u32]);
        let strata = vec![Stratum { label: "bulk".into(), dim: 2, simplices: partial.clone() }];
        assert!(matches!(
            build_stratified(t.clone(), strata, BTreeSet::new()),
            Err(EulerError::BadStratification(_))
        ));

        // Two isolated vertices are not a connected stratum.
        let mut bulk = partial.clone();
        bulk.remove(&vec![1u32]);
        let strata = vec![
            Stratum { label: "points".into(), dim: 0, simplices: [vec![0u32], vec![1u32]].into() },
            Stratum { label: "bulk".into(), dim: 2, simplices: bulk },
        ];
        assert!(matches!(
            build_stratified(t.clone(), strata, BTreeSet::new()),
            Err(EulerError::BadStratification(_))
        ));

        // Declared dimension must match the simplices.
        let mut everything = BTreeSet::new();
        for k in 0..=2usize {
            everything.extend(t.faces(k));
        }
        let strata =
            vec![Stratum { label: "bulk".into(), dim: 1, simplices: everything }];
        assert!(matches!(
            build_stratified(t, strata, BTreeSet::new()),
            Err(EulerError::BadStratification(_))
        ));
    }

    #[test]
    fn removing_a_point_costs_two_in_dimension_two() {
        // Subdivide the disk until some interior vertex has a star lying
        // properly inside the complex, then puncture there.  Vertices whose
        // star leaks onto the rim are rejected by the validator, so asking
        // `remove_point` is the honest test for removability.
        let mut disk = disk_triangle();
        let mut found = None;
        for _ in 0..6 {
            // Prefer subdividing a triangle with no rim edge: the vertex it
            // creates has a link lying fully in the interior.
            let rim: BTreeSet<Vec<VertexId>> =
                disk.boundary_facets().iter().cloned().collect();
            let sites = disk.enumerate_oriented_moves(MoveKind::Expand13).unwrap();
            let site = sites
                .iter()
                .find(|s| {
                    let t = &s.simplices[0];
                    !(0..t.len()).any(|k| {
                        let mut e = t.clone();
                        e.remove(k);
                        rim.contains(&e)
                    })
                })
                .unwrap_or(&sites[0]);
            disk = disk.apply_pachner_move(site).unwrap();
            let x = unstratified(disk.clone());
            let interior: Vec<VertexId> = disk
                .heights()
                .keys()
                .copied()
                .filter(|v| !disk.boundary_facets().iter().any(|f| f.contains(v)))
                .collect();
            if let Some(p) = interior.iter().find_map(|&v| remove_point(&x, v, "end").ok()) {
                found = Some((x, p));
                break;
            }
        }
        let (x, punctured) = found.expect("a removable interior vertex appears");
        let before = euler_characteristics(&x)[0].chi_tilde;
        assert_eq!(before, 2);
        let after = euler_characteristics(&punctured);
        // One bulk stratum remains; χ̃ drops by 2 (E₂ = −1).
        assert_eq!(after.len(), 1);
        assert_eq!(after[0].chi_tilde, before - 2);

        // With the end mark excluded, any weight still evaluates: ψ^0 = 1.
        let w = EulerWeights::constant(2, rat(7, 3));
        assert_eq!(z_euler_evaluate(&punctured, &w).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn point_removal_rejects_boundary_vertices() {
        let x = unstratified(disk_triangle());
        assert!(matches!(remove_point(&x, 0, "end"), Err(EulerError::BadPoint(_))));
        assert!(matches!(remove_point(&x, 99, "end"), Err(EulerError::BadPoint(_))));
    }

    #[test]
    fn additivity_of_the_symmetric_characteristic_under_cutting() {
        // Cut one triangle out of the sphere: χ̃(sphere) = χ̃(rest) + χ̃(disk).
        let sphere = builtin_manifold("sphere2", None).unwrap();
        let whole = euler_characteristics(&unstratified(sphere.clone()))[0].chi_tilde;
        let target = sphere.simplices()[0].clone();
        let rest = sphere.cut_out(&target, "seam").unwrap();
        let rest_tilde = euler_characteristics(&unstratified(rest))[0].chi_tilde;
        let disk_tilde = euler_characteristics(&unstratified(disk_triangle()))[0].chi_tilde;
        assert_eq!(whole, rest_tilde + disk_tilde);
    }
}
