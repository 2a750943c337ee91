//! Two-dimensional state sums for symmetric Frobenius algebras.
//!
//! Every oriented triangle contributes a cyclic word in the algebra: with
//! vertices `u < v < w` in height order, a positively signed triangle is
//! traversed `u → v → w → u` and a negatively signed one `u → w → v → u`,
//! always starting at the lowest vertex.  Each traversal step crosses one
//! edge, either along its canonical direction (low height to high height,
//! "aligned") or against it ("anti").  The face tensor is
//! `C_{abc} = ε(μ(μ(e_a, e_b), e_c))` read in traversal order with all slots
//! lowered; an anti occurrence of an *interior* edge is converted to the dual
//! basis by folding one factor of the inverse pairing `g^{ab}` into the face,
//! so that gluing interior edges becomes a plain index match.  Boundary slots
//! always stay lowered.
//!
//! Evaluations carry a global normalisation `dim(A)^{-χ}` where `χ` is the
//! Euler characteristic of the complex.  Bordism operators are matrices
//! `matrix[out][in]` whose incoming slots are raised with `g^{-1}`, so that
//! operator composition is ordinary matrix multiplication.
//!
//! The cylinder projector over a circle with `k` edges is assembled from a
//! single square (two triangles over four vertices) whose seam slots are
//! chained with the inverse pairing and traced around the circle.  Its image
//! is the state space attached to the circle; for `k = 1` that image carries
//! the point-insertion product `u ∘ v = P(μ(u, v))`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::frob::{check_frobenius_axioms, FrobError, FrobeniusData};
use crate::fusioncat::ConstraintReport;
use crate::mesh::{
    build_triangulation, Height, MeshError, MoveKind, MoveSite, Triangulation, VertexId,
};
use crate::scalar::{Scalar, ScalarError};

/// Errors from the two-dimensional evaluator.
#[derive(Debug, Error)]
pub enum TqftError {
    /// The algebra fails one of its defining axioms (or its pairing is
    /// degenerate), so the state sum is not well defined.
    #[error("invalid algebra datum: {0}")]
    InvalidDatum(String),
    /// A closed evaluation was asked of a complex with boundary.
    #[error("the complex is not closed: {0}")]
    NotClosed(String),
    /// The complex has the wrong dimension for this operation.
    #[error("expected a {expected}-dimensional complex, got {got}")]
    WrongDimension { expected: u8, got: u8 },
    /// Boundary names passed to a bordism evaluation do not partition the
    /// boundary into coherent circles.
    #[error("bad boundary names: {0}")]
    BadBoundaryNames(String),
    /// A contraction or operator would exceed the supported size.
    #[error("evaluation too large: {0}")]
    TooLarge(String),
    /// Internal invariant violated; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Frob(#[from] FrobError),
}

/// An edge of a triangulation, as its id-sorted vertex pair.
pub type EdgeKey = Vec<VertexId>;

// ---------------------------------------------------------------------------
// Sparse factors and variable elimination
// ---------------------------------------------------------------------------

/// A sparse multilinear factor over a set of edge variables.  Keys are
/// mixed-radix encodings of the label tuple: the label of `vars[p]`
/// occupies the digit with stride `rank^p`.
struct Factor<S: Scalar> {
    vars: Vec<usize>,
    entries: Vec<(u64, S)>,
}

fn pow_checked(rank: usize, len: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..len {
        acc = acc.checked_mul(rank as u64)?;
    }
    Some(acc)
}

fn digit(key: u64, pos: usize, rank: usize) -> usize {
    ((key / (rank as u64).pow(pos as u32)) % rank as u64) as usize
}

fn decode(key: u64, len: usize, rank: usize) -> Vec<usize> {
    let mut k = key;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((k % rank as u64) as usize);
        k /= rank as u64;
    }
    out
}

impl<S: Scalar> Factor<S> {
    fn width_guard(len: usize, rank: usize) -> Result<(), TqftError> {
        pow_checked(rank, len).map(|_| ()).ok_or_else(|| {
            TqftError::TooLarge(format!(
                "contraction width {len} at rank {rank} exceeds the key space"
            ))
        })
    }

    /// Pointwise product, joining on shared variables.  The result's
    /// variables are `self.vars` followed by the variables of `other` not
    /// already present, so keys of `self` survive unchanged.
    fn product(&self, other: &Factor<S>, rank: usize) -> Result<Factor<S>, TqftError> {
        let shared: Vec<usize> =
            other.vars.iter().copied().filter(|v| self.vars.contains(v)).collect();
        let fresh: Vec<usize> =
            other.vars.iter().copied().filter(|v| !self.vars.contains(v)).collect();
        let mut vars = self.vars.clone();
        vars.extend(fresh.iter().copied());
        Factor::<S>::width_guard(vars.len(), rank)?;
        let shift = pow_checked(rank, self.vars.len()).unwrap();

        // Positions of the shared variables inside each factor, in one
        // common order, plus positions of the fresh variables in `other`.
        let pos_self: Vec<usize> =
            shared.iter().map(|v| self.vars.iter().position(|x| x == v).unwrap()).collect();
        let pos_other: Vec<usize> =
            shared.iter().map(|v| other.vars.iter().position(|x| x == v).unwrap()).collect();
        let pos_fresh: Vec<usize> =
            fresh.iter().map(|v| other.vars.iter().position(|x| x == v).unwrap()).collect();

        let subkey = |key: u64, positions: &[usize]| -> u64 {
            let mut acc = 0u64;
            for (p, &pos) in positions.iter().enumerate() {
                acc += digit(key, pos, rank) as u64 * (rank as u64).pow(p as u32);
            }
            acc
        };

        // Group the right factor by shared subkey; store the fresh digits.
        let mut groups: BTreeMap<u64, Vec<(u64, &S)>> = BTreeMap::new();
        for (key, val) in &other.entries {
            groups.entry(subkey(*key, &pos_other)).or_default().push((subkey(*key, &pos_fresh), val));
        }

        let mut entries = Vec::new();
        for (key, val) in &self.entries {
            if let Some(matches) = groups.get(&subkey(*key, &pos_self)) {
                for (fresh_key, other_val) in matches {
                    let v = val.clone() * (*other_val).clone();
                    if !v.is_zero() {
                        entries.push((key + fresh_key * shift, v));
                    }
                }
            }
        }
        entries.sort_by_key(|(k, _)| *k);
        Ok(Factor { vars, entries })
    }

    /// Sum over one variable, removing it from the factor.
    fn sum_out(&self, var: usize, rank: usize) -> Factor<S> {
        let pos = self.vars.iter().position(|v| *v == var).expect("variable present");
        let low = (rank as u64).pow(pos as u32);
        let high = low * rank as u64;
        let mut acc: BTreeMap<u64, S> = BTreeMap::new();
        for (key, val) in &self.entries {
            let reduced = key % low + (key / high) * low;
            match acc.entry(reduced) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(val.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let v = e.get().clone() + val.clone();
                    *e.get_mut() = v;
                }
            }
        }
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let entries = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Factor { vars, entries }
    }

    /// Re-key to ascending variable order.
    fn sorted_vars(&self, rank: usize) -> Factor<S> {
        let mut order: Vec<usize> = (0..self.vars.len()).collect();
        order.sort_by_key(|&p| self.vars[p]);
        let vars: Vec<usize> = order.iter().map(|&p| self.vars[p]).collect();
        let mut entries: Vec<(u64, S)> = self
            .entries
            .iter()
            .map(|(key, val)| {
                let mut new_key = 0u64;
                for (new_pos, &old_pos) in order.iter().enumerate() {
                    new_key += digit(*key, old_pos, rank) as u64 * (rank as u64).pow(new_pos as u32);
                }
                (new_key, val.clone())
            })
            .collect();
        entries.sort_by_key(|(k, _)| *k);
        Factor { vars, entries }
    }
}

/// Largest number of nonzero entries any single intermediate factor may
/// reach during contraction before the evaluation refuses to continue.
const MAX_FACTOR_NNZ: usize = 1 << 23;

/// Minimum-fill elimination order over the variable interaction graph:
/// every factor's variable set is a clique, and eliminating a variable
/// connects its surviving neighbours.  Fill-in is the classic proxy for
/// keeping intermediate factors narrow.
fn min_fill_order(
    factors: &[Vec<usize>],
    keep: &BTreeSet<usize>,
) -> Vec<usize> {
    let mut adjacency: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for vars in factors {
        for &v in vars {
            let nbrs = adjacency.entry(v).or_default();
            nbrs.extend(vars.iter().copied().filter(|&u| u != v));
        }
    }
    let mut remaining: BTreeSet<usize> =
        adjacency.keys().copied().filter(|v| !keep.contains(v)).collect();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize, usize)> = None; // (fill, degree, var)
        for &v in &remaining {
            let nbrs: Vec<usize> = adjacency[&v]
                .iter()
                .copied()
                .filter(|u| remaining.contains(u) || keep.contains(u))
                .collect();
            let mut fill = 0usize;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if !adjacency[&a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            let cand = (fill, nbrs.len(), v);
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
        let (_, _, var) = best.expect("remaining is non-empty");
        let nbrs: Vec<usize> = adjacency[&var]
            .iter()
            .copied()
            .filter(|u| remaining.contains(u) || keep.contains(u))
            .collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adjacency.get_mut(&a).expect("adjacency row").insert(b);
                adjacency.get_mut(&b).expect("adjacency row").insert(a);
            }
        }
        remaining.remove(&var);
        order.push(var);
    }
    order
}

/// Contract a collection of factors down to the variables in `keep`,
/// eliminating all others along a minimum-fill order.
fn contract_all<S: Scalar>(
    mut factors: Vec<Factor<S>>,
    keep: &BTreeSet<usize>,
    rank: usize,
) -> Result<Factor<S>, TqftError> {
    let var_sets: Vec<Vec<usize>> = factors.iter().map(|f| f.vars.clone()).collect();
    for var in min_fill_order(&var_sets, keep) {
        let (mut involved, rest): (Vec<Factor<S>>, Vec<Factor<S>>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        // Multiply the smaller factors first to keep intermediates sparse.
        involved.sort_by_key(|f| f.entries.len());
        let mut merged = involved
            .pop()
            .ok_or_else(|| TqftError::Internal(format!("variable {var} not in any factor")))?;
        while let Some(f) = involved.pop() {
            merged = merged.product(&f, rank)?;
            if merged.entries.len() > MAX_FACTOR_NNZ {
                return Err(TqftError::TooLarge(format!(
                    "an intermediate factor grew to {} entries",
                    merged.entries.len()
                )));
            }
        }
        factors.push(merged.sum_out(var, rank));
    }

    let mut result = Factor { vars: Vec::new(), entries: vec![(0, S::one())] };
    for f in factors {
        result = result.product(&f, rank)?;
        if result.entries.len() > MAX_FACTOR_NNZ {
            return Err(TqftError::TooLarge(format!(
                "the kept-variable factor grew to {} entries",
                result.entries.len()
            )));
        }
    }
    Ok(result.sorted_vars(rank))
}

// ---------------------------------------------------------------------------
// Face factors and local tensors
// ---------------------------------------------------------------------------

/// Dense `C[a][b][c] = ε(μ(μ(e_a, e_b), e_c))`, flattened as `a + n·b + n²·c`.
fn cyclic_face_tensor<S: Scalar>(alg: &FrobeniusData<S>) -> Vec<S> {
    let n = alg.dim;
    // left[a][b][k]: coefficients of e_a·e_b; then pair with e_c and ε.
    let mut out = vec![S::zero(); n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    if alg.mu[a][b][k].is_zero() {
                        continue;
                    }
                    for m in 0..n {
                        if alg.mu[k][c][m].is_zero() || alg.eps[m].is_zero() {
                            continue;
                        }
                        acc = acc
                            + alg.mu[a][b][k].clone()
                                * alg.mu[k][c][m].clone()
                                * alg.eps[m].clone();
                    }
                }
                out[a + n * b + n * n * c] = acc;
            }
        }
    }
    out
}

/// Check the defining axioms and reject the datum if a required one fails.
/// Informational flags (symmetry of ε, separability) do not gate evaluation.
fn require_datum<S: Scalar>(alg: &FrobeniusData<S>) -> Result<(), TqftError> {
    let tol = if S::is_exact() { 0.0 } else { 1e-9 };
    let report = check_frobenius_axioms(alg, tol)?;
    if !report.passed() {
        let failed: Vec<&str> = report
            .items
            .iter()
            .filter(|i| i.required && !i.passed)
            .map(|i| i.name.as_str())
            .collect();
        return Err(TqftError::InvalidDatum(format!(
            "required axioms failed: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

/// The three traversal steps of a triangle, as directed vertex pairs in
/// traversal order.  `verts` must be in increasing height order.
fn traversal(verts: &[VertexId], sign: i8) -> [(VertexId, VertexId); 3] {
    let (u, v, w) = (verts[0], verts[1], verts[2]);
    if sign >= 0 {
        [(u, v), (v, w), (w, u)]
    } else {
        [(u, w), (w, v), (v, u)]
    }
}

fn edge_key(a: VertexId, b: VertexId) -> EdgeKey {
    if a < b {
        vec![a, b]
    } else {
        vec![b, a]
    }
}

/// Contract all interior edges of a two-dimensional complex, leaving one
/// lowered slot per boundary edge.  Returns the boundary edges in ascending
/// key order together with the sparse tensor entries over their labels.
/// No global `dim^{-χ}` factor is applied here.
fn local_tensor_2d<S: Scalar>(
    alg: &FrobeniusData<S>,
    m: &Triangulation,
) -> Result<(Vec<EdgeKey>, BTreeMap<Vec<usize>, S>), TqftError> {
    if m.dim() != 2 {
        return Err(TqftError::WrongDimension { expected: 2, got: m.dim() });
    }
    let n = alg.dim;
    let ginv = alg.pairing_inverse()?;
    let base = cyclic_face_tensor(alg);
    let c_at = |a: usize, b: usize, c: usize| &base[a + n * b + n * n * c];

    let edges: Vec<EdgeKey> = m.faces(1).into_iter().collect();
    let edge_ix: BTreeMap<EdgeKey, usize> =
        edges.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let boundary = m.boundary_facets();

    let mut factors: Vec<Factor<S>> = Vec::new();
    for idx in 0..m.simplices().len() {
        let verts = m.by_height(idx);
        let steps = traversal(&verts, m.height_sign(idx));
        // Traversal slot p reads edge steps[p]; fold the inverse pairing
        // exactly at interior anti occurrences (direction high → low).
        let slot_edges: Vec<EdgeKey> = steps.iter().map(|(a, b)| edge_key(*a, *b)).collect();
        let fold: Vec<bool> = steps
            .iter()
            .zip(&slot_edges)
            .map(|((from, to), e)| {
                let anti = m.height(*from) > m.height(*to);
                anti && !boundary.contains(e)
            })
            .collect();
        let vars: Vec<usize> = slot_edges.iter().map(|e| edge_ix[e]).collect();

        let mut entries = Vec::new();
        for x0 in 0..n {
            for x1 in 0..n {
                for x2 in 0..n {
                    let xs = [x0, x1, x2];
                    // Sum the base tensor over folded slots.
                    let mut acc = S::zero();
                    let ranges: Vec<Vec<usize>> = (0..3)
                        .map(|p| if fold[p] { (0..n).collect() } else { vec![xs[p]] })
                        .collect();
                    for &a in &ranges[0] {
                        for &b in &ranges[1] {
                            for &c in &ranges[2] {
                                let mut term = c_at(a, b, c).clone();
                                if term.is_zero() {
                                    continue;
                                }
                                if fold[0] {
                                    term = term * ginv[a][x0].clone();
                                }
                                if fold[1] {
                                    term = term * ginv[b][x1].clone();
                                }
                                if fold[2] {
                                    term = term * ginv[c][x2].clone();
                                }
                                acc = acc + term;
                            }
                        }
                    }
                    if !acc.is_zero() {
                        let key = x0 as u64 + (n as u64) * x1 as u64 + (n as u64).pow(2) * x2 as u64;
                        entries.push((key, acc));
                    }
                }
            }
        }
        entries.sort_by_key(|(k, _)| *k);
        factors.push(Factor { vars, entries });
    }

    let keep: BTreeSet<usize> = boundary.iter().map(|e| edge_ix[e]).collect();
    let result = contract_all(factors, &keep, n)?;

    let slots: Vec<EdgeKey> = result.vars.iter().map(|&v| edges[v].clone()).collect();
    let len = slots.len();
    let map = result
        .entries
        .into_iter()
        .map(|(key, val)| (decode(key, len, n), val))
        .collect();
    Ok((slots, map))
}

// ---------------------------------------------------------------------------
// Closed evaluation and bordism operators
// ---------------------------------------------------------------------------

/// Evaluate a closed oriented surface.  The result carries the global
/// normalisation `dim(A)^{-χ}`.
pub fn evaluate_closed_2d<S: Scalar>(
    alg: &FrobeniusData<S>,
    m: &Triangulation,
) -> Result<S, TqftError> {
    if m.dim() != 2 {
        return Err(TqftError::WrongDimension { expected: 2, got: m.dim() });
    }
    if !m.is_closed() {
        return Err(TqftError::NotClosed(format!(
            "{} boundary edges present",
            m.boundary_facets().len()
        )));
    }
    require_datum(alg)?;
    let (slots, map) = local_tensor_2d(alg, m)?;
    debug_assert!(slots.is_empty());
    let raw = map.get(&Vec::new()).cloned().unwrap_or_else(S::zero);
    let scale = S::from_int(alg.dim as i64).pow_i(-m.chi())?;
    Ok(raw * scale)
}

/// One boundary circle of a bordism: its name and its edges in walk order.
#[derive(Clone, Debug)]
pub struct Circle {
    pub name: String,
    /// Edges in the order the induced boundary orientation visits them,
    /// starting from the lowest vertex of the circle.
    pub slots: Vec<EdgeKey>,
}

/// A linear map assembled from a surface with named boundary circles.
/// `matrix[out][in]` indexes labelings of the outgoing and incoming edges
/// in mixed radix (first slot fastest); incoming slots are raised with the
/// inverse pairing so that composition is matrix multiplication.
#[derive(Clone, Debug)]
pub struct BordismOperator<S: Scalar> {
    pub inputs: Vec<Circle>,
    pub outputs: Vec<Circle>,
    pub matrix: Vec<Vec<S>>,
}

/// The induced traversal direction of a boundary edge: the directed pair
/// under which its unique face crosses it.
fn boundary_direction(
    m: &Triangulation,
    edge: &EdgeKey,
) -> Result<(VertexId, VertexId), TqftError> {
    let mut hit = None;
    for idx in 0..m.simplices().len() {
        let s = &m.simplices()[idx];
        if edge.iter().all(|v| s.contains(v)) {
            if hit.is_some() {
                return Err(TqftError::Internal(format!("edge {edge:?} is not on the boundary")));
            }
            hit = Some(idx);
        }
    }
    let idx = hit.ok_or_else(|| TqftError::Internal(format!("edge {edge:?} not found")))?;
    let verts = m.by_height(idx);
    traversal(&verts, m.height_sign(idx))
        .into_iter()
        .find(|(a, b)| edge_key(*a, *b) == *edge)
        .ok_or_else(|| TqftError::Internal("traversal misses its own edge".into()))
}

/// Order the edges of one named boundary component into a coherent circle.
fn circle_walk(m: &Triangulation, name: &str) -> Result<Circle, TqftError> {
    let facets = m
        .boundary_marks()
        .get(name)
        .ok_or_else(|| TqftError::BadBoundaryNames(format!("no boundary named {name:?}")))?;
    if facets.is_empty() {
        return Err(TqftError::BadBoundaryNames(format!("boundary {name:?} is empty")));
    }
    let mut next: BTreeMap<VertexId, (VertexId, EdgeKey)> = BTreeMap::new();
    for edge in facets {
        let (from, to) = boundary_direction(m, edge)?;
        if next.insert(from, (to, edge.clone())).is_some() {
            return Err(TqftError::BadBoundaryNames(format!(
                "boundary {name:?} is not a single coherent circle"
            )));
        }
    }
    let start = next
        .keys()
        .min_by_key(|v| m.height(**v))
        .copied()
        .ok_or_else(|| TqftError::BadBoundaryNames(format!("boundary {name:?} is empty")))?;
    let mut slots = Vec::new();
    let mut at = start;
    loop {
        let (to, edge) = next
            .get(&at)
            .ok_or_else(|| {
                TqftError::BadBoundaryNames(format!("boundary {name:?} does not close up"))
            })?
            .clone();
        slots.push(edge);
        at = to;
        if at == start {
            break;
        }
        if slots.len() > facets.len() {
            return Err(TqftError::BadBoundaryNames(format!(
                "boundary {name:?} does not close up"
            )));
        }
    }
    if slots.len() != facets.len() {
        return Err(TqftError::BadBoundaryNames(format!(
            "boundary {name:?} has more than one circle"
        )));
    }
    Ok(Circle { name: name.to_string(), slots })
}

const MAX_OPERATOR_ENTRIES: u64 = 1 << 24;

/// Evaluate a surface with boundary as a linear map from the circles named
/// in `inputs` to the circles named in `outputs`.  Every boundary component
/// must appear in exactly one of the two lists.
pub fn evaluate_bordism_2d<S: Scalar>(
    alg: &FrobeniusData<S>,
    m: &Triangulation,
    inputs: &[&str],
    outputs: &[&str],
) -> Result<BordismOperator<S>, TqftError> {
    if m.dim() != 2 {
        return Err(TqftError::WrongDimension { expected: 2, got: m.dim() });
    }
    require_datum(alg)?;
    let n = alg.dim;

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for name in inputs.iter().chain(outputs.iter()) {
        if !seen.insert(name) {
            return Err(TqftError::BadBoundaryNames(format!("{name:?} listed twice")));
        }
    }
    let named: BTreeSet<String> = m.boundary_marks().keys().cloned().collect();
    for name in &named {
        if !seen.contains(name.as_str()) {
            return Err(TqftError::BadBoundaryNames(format!(
                "boundary {name:?} is neither an input nor an output"
            )));
        }
    }
    let marked: BTreeSet<EdgeKey> =
        m.boundary_marks().values().flat_map(|s| s.iter().cloned()).collect();
    for edge in m.boundary_facets() {
        if !marked.contains(&edge) {
            return Err(TqftError::BadBoundaryNames(format!(
                "boundary edge {edge:?} carries no name"
            )));
        }
    }

    let ins: Vec<Circle> =
        inputs.iter().map(|name| circle_walk(m, name)).collect::<Result<_, _>>()?;
    let outs: Vec<Circle> =
        outputs.iter().map(|name| circle_walk(m, name)).collect::<Result<_, _>>()?;

    let in_slots: Vec<EdgeKey> = ins.iter().flat_map(|c| c.slots.iter().cloned()).collect();
    let out_slots: Vec<EdgeKey> = outs.iter().flat_map(|c| c.slots.iter().cloned()).collect();
    let in_dim = pow_checked(n, in_slots.len())
        .ok_or_else(|| TqftError::TooLarge("incoming index space".into()))?;
    let out_dim = pow_checked(n, out_slots.len())
        .ok_or_else(|| TqftError::TooLarge("outgoing index space".into()))?;
    if in_dim.saturating_mul(out_dim) > MAX_OPERATOR_ENTRIES {
        return Err(TqftError::TooLarge(format!(
            "operator would hold {} entries",
            in_dim.saturating_mul(out_dim)
        )));
    }

    let (slots, map) = local_tensor_2d(alg, m)?;
    let slot_pos: BTreeMap<EdgeKey, usize> =
        slots.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let in_pos: Vec<usize> = in_slots.iter().map(|e| slot_pos[e]).collect();
    let out_pos: Vec<usize> = out_slots.iter().map(|e| slot_pos[e]).collect();

    let ginv = alg.pairing_inverse()?;
    let ginv_rows: Vec<Vec<(usize, S)>> = ginv
        .iter()
        .map(|row| {
            row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect()
        })
        .collect();

    let mut matrix = vec![vec![S::zero(); in_dim as usize]; out_dim as usize];
    for (labels, val) in &map {
        let out_key: u64 = out_pos
            .iter()
            .enumerate()
            .map(|(p, &pos)| labels[pos] as u64 * (n as u64).pow(p as u32))
            .sum();
        // Raise the incoming slots one at a time.
        let mut frontier: Vec<(u64, S)> = vec![(0, val.clone())];
        for (p, &pos) in in_pos.iter().enumerate() {
            let stride = (n as u64).pow(p as u32);
            let mut grown = Vec::with_capacity(frontier.len());
            for (key, v) in &frontier {
                for (j, g) in &ginv_rows[labels[pos]] {
                    let w = v.clone() * g.clone();
                    if !w.is_zero() {
                        grown.push((key + *j as u64 * stride, w));
                    }
                }
            }
            frontier = grown;
        }
        let row = &mut matrix[out_key as usize];
        for (in_key, v) in frontier {
            let cell = &mut row[in_key as usize];
            *cell = cell.clone() + v;
        }
    }

    let scale = S::from_int(n as i64).pow_i(-m.chi())?;
    for row in &mut matrix {
        for cell in row {
            if !cell.is_zero() {
                *cell = cell.clone() * scale.clone();
            }
        }
    }

    Ok(BordismOperator { inputs: ins, outputs: outs, matrix })
}

// ---------------------------------------------------------------------------
// Cylinder projectors and state spaces
// ---------------------------------------------------------------------------

fn rat_height(x: i64) -> Height {
    Height::from_integer(x.into())
}

/// The square: two triangles over four vertices, with the diagonal interior.
/// Boundary edges in ascending key order are bottom `[0,1]`, left `[0,2]`,
/// right `[1,3]`, top `[2,3]`; the induced boundary directions run
/// `0→1→3→2→0`, so chaining squares left-to-right along their seams yields a
/// coherently oriented annulus.
fn square_complex() -> Result<Triangulation, MeshError> {
    let heights: BTreeMap<VertexId, Height> = (0..4).map(|v| (v, rat_height(v as i64))).collect();
    build_triangulation(
        2,
        heights,
        vec![vec![0, 1, 3], vec![0, 2, 3]],
        vec![1, -1],
        BTreeMap::new(),
    )
}

/// The state space attached to a circle with `k` edges: the image of the
/// cylinder projector `P`, with `P` exposed as a sparse matrix over
/// mixed-radix label keys (digit `i` is the label of the `i`-th edge, with
/// stride `rank^i`).
#[derive(Clone, Debug)]
pub struct StateSpace<S: Scalar> {
    pub circle_edges: usize,
    /// Rank of the projector, i.e. the dimension of the state space.
    pub dimension: usize,
    /// Whether `P∘P = P` held (exactly, or within `tol` in float mode).
    pub idempotent: bool,
    /// Largest entry of `P·v − v` over the column basis, for reporting.
    /// Since the basis spans the image of `P`, this vanishes exactly when
    /// `P∘P = P`.
    pub idempotent_residual: f64,
    pub trace: S,
    pub projector: BTreeMap<(u64, u64), S>,
    /// Reduced basis of the column space, sorted by pivot position.  Each
    /// vector maps a label key to its coefficient.
    pub basis: Vec<BTreeMap<u64, S>>,
}

const MAX_STATE_KEYS: u64 = 1 << 20;

/// Build the cylinder projector over a circle with `k` edges and extract its
/// image.  The cylinder is a chain of `k` squares glued along their seams
/// (with the inverse pairing) and closed into a loop; bottom slots are the
/// incoming index and are raised, top slots stay lowered.
pub fn orbifold_state_space<S: Scalar>(
    alg: &FrobeniusData<S>,
    k: usize,
    tol: f64,
) -> Result<StateSpace<S>, TqftError> {
    if k == 0 {
        return Err(TqftError::BadBoundaryNames("a circle needs at least one edge".into()));
    }
    require_datum(alg)?;
    let n = alg.dim;
    let dim = pow_checked(n, k)
        .filter(|d| *d <= MAX_STATE_KEYS)
        .ok_or_else(|| TqftError::TooLarge(format!("{n}^{k} circle labelings")))?;

    let square = square_complex()?;
    let (slots, entries) = local_tensor_2d(alg, &square)?;
    // Ascending edge keys of the square: bottom, left, right, top.
    debug_assert_eq!(slots, vec![vec![0, 1], vec![0, 2], vec![1, 3], vec![2, 3]]);

    let ginv = alg.pairing_inverse()?;
    let ginv_rows: Vec<Vec<(usize, S)>> = ginv
        .iter()
        .map(|row| {
            row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect()
        })
        .collect();

    // Seam-chained square: fold the inverse pairing into the right slot, so
    // consecutive squares contract by a plain index match.  Group by the
    // seam pair (left, chained-right) for the transfer expansion.
    let mut slices: BTreeMap<(usize, usize), Vec<(usize, usize, S)>> = BTreeMap::new();
    for (labels, val) in &entries {
        let (b, l, r, t) = (labels[0], labels[1], labels[2], labels[3]);
        for (lp, g) in &ginv_rows[r] {
            let v = val.clone() * g.clone();
            if !v.is_zero() {
                slices.entry((l, *lp)).or_default().push((t, b, v));
            }
        }
    }

    // Trace over the seam labels: for each seam vector, expand the tensor
    // product of the per-position slices into (top key, bottom key) pairs.
    let mut raw: BTreeMap<(u64, u64), S> = BTreeMap::new();
    let mut seam = vec![0usize; k];
    loop {
        let mut frontier: Vec<(u64, u64, S)> = vec![(0, 0, S::one())];
        for i in 0..k {
            let slice = slices.get(&(seam[i], seam[(i + 1) % k]));
            let Some(slice) = slice else {
                frontier.clear();
                break;
            };
            let stride = (n as u64).pow(i as u32);
            let mut grown = Vec::with_capacity(frontier.len() * slice.len());
            for (tk, bk, v) in &frontier {
                for (t, b, w) in slice {
                    let prod = v.clone() * w.clone();
                    if !prod.is_zero() {
                        grown.push((tk + *t as u64 * stride, bk + *b as u64 * stride, prod));
                    }
                }
            }
            frontier = grown;
            if frontier.is_empty() {
                break;
            }
        }
        for (tk, bk, v) in frontier {
            let cell = raw.entry((tk, bk)).or_insert_with(S::zero);
            *cell = cell.clone() + v;
        }
        // Advance the seam counter.
        let mut i = 0;
        while i < k {
            seam[i] += 1;
            if seam[i] < n {
                break;
            }
            seam[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }

    // Raise the bottom slots.
    let mut projector: BTreeMap<(u64, u64), S> = BTreeMap::new();
    for ((tk, bk_raw), v) in &raw {
        if v.is_zero() {
            continue;
        }
        let digits = decode(*bk_raw, k, n);
        let mut frontier: Vec<(u64, S)> = vec![(0, v.clone())];
        for (i, &d) in digits.iter().enumerate() {
            let stride = (n as u64).pow(i as u32);
            let mut grown = Vec::with_capacity(frontier.len());
            for (key, w) in &frontier {
                for (j, g) in &ginv_rows[d] {
                    let prod = w.clone() * g.clone();
                    if !prod.is_zero() {
                        grown.push((key + *j as u64 * stride, prod));
                    }
                }
            }
            frontier = grown;
        }
        for (bk, w) in frontier {
            let cell = projector.entry((*tk, bk)).or_insert_with(S::zero);
            *cell = cell.clone() + w;
        }
    }
    projector.retain(|_, v| !v.is_zero());

    let basis = column_space_basis(&projector, tol);

    // Idempotency: P∘P = P holds exactly when P fixes its own image, and
    // the image is spanned by the reduced column basis — so checking
    // P·v = v on each basis vector is equivalent to comparing P² with P
    // entrywise, at the cost of a few sparse products instead of a full
    // matrix square.
    let mut columns: BTreeMap<u64, Vec<(u64, S)>> = BTreeMap::new();
    for ((r, c), v) in &projector {
        columns.entry(*c).or_default().push((*r, v.clone()));
    }
    let mut residual = 0.0f64;
    for v in &basis {
        let mut image: BTreeMap<u64, S> = BTreeMap::new();
        for (c, vc) in v {
            if let Some(col) = columns.get(c) {
                for (r, w) in col {
                    let cell = image.entry(*r).or_insert_with(S::zero);
                    *cell = cell.clone() + w.clone() * vc.clone();
                }
            }
        }
        let rows: BTreeSet<u64> = image.keys().chain(v.keys()).copied().collect();
        for r in rows {
            let a = image.get(&r).cloned().unwrap_or_else(S::zero);
            let b = v.get(&r).cloned().unwrap_or_else(S::zero);
            residual = residual.max((a - b).abs_f64());
        }
    }
    let idempotent = if S::is_exact() { residual == 0.0 } else { residual <= tol };

    let mut trace = S::zero();
    for x in 0..dim {
        if let Some(v) = projector.get(&(x, x)) {
            trace = trace + v.clone();
        }
    }

    Ok(StateSpace {
        circle_edges: k,
        dimension: basis.len(),
        idempotent,
        idempotent_residual: residual,
        trace,
        projector,
        basis,
    })
}

/// Reduced (RREF-style) basis of the column space of a sparse matrix.
fn column_space_basis<S: Scalar>(
    matrix: &BTreeMap<(u64, u64), S>,
    tol: f64,
) -> Vec<BTreeMap<u64, S>> {
    let mut columns: BTreeMap<u64, BTreeMap<u64, S>> = BTreeMap::new();
    for ((r, c), v) in matrix {
        columns.entry(*c).or_default().insert(*r, v.clone());
    }
    let pivot_tol = if S::is_exact() { 0.0 } else { tol.max(1e-12) };
    let nonzero = |v: &S| if S::is_exact() { !v.is_zero() } else { v.abs_f64() > pivot_tol };

    let mut pivots: Vec<(u64, BTreeMap<u64, S>)> = Vec::new();
    for (_, mut col) in columns {
        for (pr, pv) in &pivots {
            if let Some(coeff) = col.get(pr).cloned() {
                if !coeff.is_zero() {
                    for (r, v) in pv {
                        let cur = col.get(r).cloned().unwrap_or_else(S::zero);
                        let next = cur - coeff.clone() * v.clone();
                        if next.is_zero() {
                            col.remove(r);
                        } else {
                            col.insert(*r, next);
                        }
                    }
                }
            }
        }
        col.retain(|_, v| nonzero(v));
        let pivot_row = if S::is_exact() {
            col.keys().next().copied()
        } else {
            col.iter()
                .max_by(|a, b| {
                    a.1.abs_f64().partial_cmp(&b.1.abs_f64()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .map(|(r, _)| *r)
        };
        let Some(pr) = pivot_row else { continue };
        let Ok(inv) = col[&pr].clone().recip() else { continue };
        let normalized: BTreeMap<u64, S> =
            col.iter().map(|(r, v)| (*r, v.clone() * inv.clone())).collect();
        // Clear the new pivot row from the existing basis vectors.
        for (_, pv) in pivots.iter_mut() {
            if let Some(coeff) = pv.get(&pr).cloned() {
                if !coeff.is_zero() {
                    for (r, v) in &normalized {
                        let cur = pv.get(r).cloned().unwrap_or_else(S::zero);
                        let next = cur - coeff.clone() * v.clone();
                        if next.is_zero() || (!S::is_exact() && next.abs_f64() <= pivot_tol) {
                            pv.remove(r);
                        } else {
                            pv.insert(*r, next);
                        }
                    }
                }
            }
        }
        pivots.push((pr, normalized));
    }
    pivots.sort_by_key(|(pr, _)| *pr);
    pivots.into_iter().map(|(_, v)| v).collect()
}

// ---------------------------------------------------------------------------
// Point-insertion algebra
// ---------------------------------------------------------------------------

/// The algebra carried by the one-edge circle: the image of the cylinder
/// projector `P₁` with the product `u ∘ v = P₁(μ(u, v))`.  Coordinates are
/// relative to the reduced basis of the image inside the ambient algebra.
#[derive(Clone, Debug)]
pub struct PointAlgebra<S: Scalar> {
    pub ambient_dim: usize,
    pub dimension: usize,
    /// Basis vectors of the image, as dense ambient coordinate vectors.
    pub basis: Vec<Vec<S>>,
    /// Coordinates of `P₁(1)` in `basis`.
    pub unit: Vec<S>,
    /// `structure[i][j][l]`: coefficient of `basis[l]` in `basis[i] ∘ basis[j]`.
    pub structure: Vec<Vec<Vec<S>>>,
    pub projector_idempotent: bool,
    /// Whether every product landed in the span of the basis.
    pub closed: bool,
    pub commutative: bool,
    pub associative: bool,
    pub unital: bool,
}

pub fn point_insertion_algebra<S: Scalar>(
    alg: &FrobeniusData<S>,
    tol: f64,
) -> Result<PointAlgebra<S>, TqftError> {
    let n = alg.dim;
    let ss = orbifold_state_space(alg, 1, tol)?;
    let eq = |a: &S, b: &S| {
        if S::is_exact() {
            a == b
        } else {
            a.approx_eq(b, tol)
        }
    };

    let basis: Vec<Vec<S>> = ss
        .basis
        .iter()
        .map(|v| {
            let mut dense = vec![S::zero(); n];
            for (r, x) in v {
                dense[*r as usize] = x.clone();
            }
            dense
        })
        .collect();
    let pivots: Vec<usize> = ss
        .basis
        .iter()
        .map(|v| {
            // The reduced basis has a designated unit coordinate per vector.
            v.iter()
                .find(|(_, x)| eq(x, &S::one()))
                .map(|(r, _)| *r as usize)
                .unwrap_or_else(|| *v.keys().next().unwrap() as usize)
        })
        .collect();
    let d = basis.len();

    let apply_p = |x: &[S]| -> Vec<S> {
        let mut out = vec![S::zero(); n];
        for ((r, c), v) in &ss.projector {
            if !x[*c as usize].is_zero() {
                out[*r as usize] = out[*r as usize].clone() + v.clone() * x[*c as usize].clone();
            }
        }
        out
    };
    let multiply = |u: &[S], v: &[S]| -> Vec<S> {
        let mut out = vec![S::zero(); n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() {
                    continue;
                }
                for l in 0..n {
                    if !alg.mu[i][j][l].is_zero() {
                        out[l] = out[l].clone()
                            + alg.mu[i][j][l].clone() * u[i].clone() * v[j].clone();
                    }
                }
            }
        }
        out
    };
    // Coordinates in the reduced basis: read off the pivot rows, then check
    // the remainder vanishes.
    let mut closed = true;
    let coords = |x: &[S], closed: &mut bool| -> Vec<S> {
        let cs: Vec<S> = pivots.iter().map(|&p| x[p].clone()).collect();
        let mut rem = x.to_vec();
        for (c, b) in cs.iter().zip(&basis) {
            for (r, rv) in rem.iter_mut().zip(b) {
                *r = r.clone() - c.clone() * rv.clone();
            }
        }
        if !rem.iter().all(|r| if S::is_exact() { r.is_zero() } else { r.abs_f64() <= tol }) {
            *closed = false;
        }
        cs
    };

    let mut structure = vec![vec![Vec::new(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let prod = apply_p(&multiply(&basis[i], &basis[j]));
            structure[i][j] = coords(&prod, &mut closed);
        }
    }
    let eta_dense: Vec<S> = alg.eta.clone();
    let unit = coords(&apply_p(&eta_dense), &mut closed);

    let commutative = (0..d).all(|i| {
        (0..d).all(|j| (0..d).all(|l| eq(&structure[i][j][l], &structure[j][i][l])))
    });
    let associative = (0..d).all(|i| {
        (0..d).all(|j| {
            (0..d).all(|k| {
                (0..d).all(|l| {
                    let mut lhs = S::zero();
                    let mut rhs = S::zero();
                    for m in 0..d {
                        lhs = lhs + structure[i][j][m].clone() * structure[m][k][l].clone();
                        rhs = rhs + structure[j][k][m].clone() * structure[i][m][l].clone();
                    }
                    eq(&lhs, &rhs)
                })
            })
        })
    });
    let unital = (0..d).all(|j| {
        (0..d).all(|l| {
            let mut left = S::zero();
            let mut right = S::zero();
            for m in 0..d {
                left = left + unit[m].clone() * structure[m][j][l].clone();
                right = right + unit[m].clone() * structure[j][m][l].clone();
            }
            let want = if j == l { S::one() } else { S::zero() };
            eq(&left, &want) && eq(&right, &want)
        })
    });

    Ok(PointAlgebra {
        ambient_dim: n,
        dimension: d,
        basis,
        unit,
        structure,
        projector_idempotent: ss.idempotent,
        closed,
        commutative,
        associative,
        unital,
    })
}

// ---------------------------------------------------------------------------
// Pachner invariance
// ---------------------------------------------------------------------------

fn compare_maps<S: Scalar>(
    alg: &FrobeniusData<S>,
    a: &BTreeMap<Vec<usize>, S>,
    b: &BTreeMap<Vec<usize>, S>,
    tol: f64,
) -> (bool, f64, Option<String>) {
    let mut residual = 0.0f64;
    let mut witness = None;
    let keys: BTreeSet<&Vec<usize>> = a.keys().chain(b.keys()).collect();
    for key in keys {
        let x = a.get(key).cloned().unwrap_or_else(S::zero);
        let y = b.get(key).cloned().unwrap_or_else(S::zero);
        let diff = x.clone() - y.clone();
        let gap = diff.abs_f64();
        let equal = if S::is_exact() { diff.is_zero() } else { gap <= tol };
        if !equal && gap >= residual {
            let names: Vec<&str> = key.iter().map(|&l| alg.labels[l].as_str()).collect();
            witness = Some(format!(
                "labels [{}]: before {} vs after {}",
                names.join(", "),
                x.render(),
                y.render()
            ));
        }
        residual = residual.max(gap);
    }
    let passed = if S::is_exact() { witness.is_none() } else { residual <= tol };
    (passed, residual, if passed { None } else { witness })
}

/// Extract the consumed simplices of a move site as a standalone complex,
/// keeping heights, signs and hence all boundary readings.
fn local_patch(base: &Triangulation, site: &MoveSite) -> Result<Triangulation, TqftError> {
    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    let mut heights = BTreeMap::new();
    for s in &site.simplices {
        let idx = base
            .simplices()
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| TqftError::Internal(format!("site simplex {s:?} not in complex")))?;
        simplices.push(s.clone());
        signs.push(base.height_sign(idx));
        for v in s {
            heights.insert(*v, base.height(*v).clone());
        }
    }
    Ok(build_triangulation(base.dim(), heights, simplices, signs, BTreeMap::new())?)
}

/// Check invariance of the local tensor under every oriented 2-2 and 1-3
/// move available on `base`.  One report line per site; the free boundary of
/// the consumed patch is compared slot by slot between the two sides.
pub fn check_pachner_2d<S: Scalar>(
    alg: &FrobeniusData<S>,
    base: &Triangulation,
    tol: f64,
) -> Result<ConstraintReport, TqftError> {
    if base.dim() != 2 {
        return Err(TqftError::WrongDimension { expected: 2, got: base.dim() });
    }
    require_datum(alg)?;

    let mut report = ConstraintReport::default();
    let mut sites = base.enumerate_oriented_moves(MoveKind::Flip22)?;
    sites.extend(base.enumerate_oriented_moves(MoveKind::Expand13)?);

    for site in &sites {
        let before = local_patch(base, site)?;
        let after = before.apply_pachner_move(site)?;
        let (slots_b, map_b) = local_tensor_2d(alg, &before)?;
        let (slots_a, map_a) = local_tensor_2d(alg, &after)?;
        if slots_b != slots_a {
            return Err(TqftError::Internal(
                "move changed the free boundary of its patch".into(),
            ));
        }
        let (passed, residual, witness) = compare_maps(alg, &map_b, &map_a, tol);

        let mut verts: BTreeSet<VertexId> = site.simplices.iter().flatten().copied().collect();
        let name = match site.kind {
            MoveKind::Flip22 => {
                let list: Vec<String> = verts.iter().map(|v| v.to_string()).collect();
                format!("2-2 @{}", list.join("-"))
            }
            MoveKind::Expand13 => {
                let class = site
                    .new_height
                    .as_ref()
                    .map(|h| verts.iter().filter(|v| before.height(**v) < h).count())
                    .unwrap_or(0);
                let list: Vec<String> = verts.iter().map(|v| v.to_string()).collect();
                format!("1-3 @{} k={}", list.join("-"), class)
            }
            other => {
                verts.clear();
                format!("{other:?}")
            }
        };
        report.push(&name, passed, residual, witness);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frob::{group_algebra, matrix_algebra, named_group_table};
    use crate::mesh::builtin_manifold;
    use crate::scalar::Rat;

    fn zn(n: usize) -> FrobeniusData<Rat> {
        group_algebra(&named_group_table(&format!("z{n}")).unwrap()).unwrap()
    }

    #[test]
    fn closed_surfaces_count_homomorphisms() {
        let sphere = builtin_manifold("sphere2", None).unwrap();
        let torus = builtin_manifold("torus2", None).unwrap();
        assert_eq!(evaluate_closed_2d(&zn(2), &sphere).unwrap(), Rat::from_ratio(1, 2));
        assert_eq!(evaluate_closed_2d(&zn(2), &torus).unwrap(), Rat::from_int(2));
        assert_eq!(evaluate_closed_2d(&zn(3), &torus).unwrap(), Rat::from_int(3));
    }

    #[test]
    fn torus_counts_matrix_blocks() {
        let torus = builtin_manifold("torus2", None).unwrap();
        let m2 = matrix_algebra::<Rat>(2).unwrap();
        assert_eq!(evaluate_closed_2d(&m2, &torus).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn closed_evaluation_rejects_bad_input() {
        let alg = zn(2);
        let ball = builtin_manifold("sphere3", None).unwrap();
        assert!(matches!(
            evaluate_closed_2d(&alg, &ball),
            Err(TqftError::WrongDimension { expected: 2, got: 3 })
        ));
        let disk = disk_triangle();
        assert!(matches!(evaluate_closed_2d(&alg, &disk), Err(TqftError::NotClosed(_))));
    }

    fn disk_triangle() -> Triangulation {
        let heights: BTreeMap<VertexId, Height> =
            (0..3).map(|v| (v, rat_height(v as i64))).collect();
        let boundary: BTreeMap<String, Vec<Vec<VertexId>>> =
            [("rim".to_string(), vec![vec![0, 1], vec![1, 2], vec![0, 2]])].into();
        build_triangulation(2, heights, vec![vec![0, 1, 2]], vec![1], boundary).unwrap()
    }

    #[test]
    fn disk_operator_reads_the_cyclic_word() {
        let alg = zn(2);
        let op = evaluate_bordism_2d(&alg, &disk_triangle(), &[], &["rim"]).unwrap();
        assert!(op.inputs.is_empty());
        assert_eq!(op.outputs.len(), 1);
        // Walk from the lowest vertex along the induced direction 0→1→2→0.
        assert_eq!(op.outputs[0].slots, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(op.matrix.len(), 8);
        assert_eq!(op.matrix[0].len(), 1);
        // ε((e_a e_b) e_c) = 2·[a+b+c = 0 mod 2], scaled by dim^{-χ} = 1/2.
        for key in 0..8u64 {
            let labels = decode(key, 3, 2);
            let want = if (labels[0] + labels[1] + labels[2]) % 2 == 0 {
                Rat::from_int(1)
            } else {
                Rat::from_int(0)
            };
            assert_eq!(op.matrix[key as usize][0], want, "labels {labels:?}");
        }
    }

    #[test]
    fn bordism_requires_complete_boundary_names() {
        let alg = zn(2);
        let disk = disk_triangle();
        assert!(matches!(
            evaluate_bordism_2d(&alg, &disk, &[], &[]),
            Err(TqftError::BadBoundaryNames(_))
        ));
        assert!(matches!(
            evaluate_bordism_2d(&alg, &disk, &["rim"], &["rim"]),
            Err(TqftError::BadBoundaryNames(_))
        ));
        assert!(matches!(
            evaluate_bordism_2d(&alg, &disk, &[], &["rim", "ghost"]),
            Err(TqftError::BadBoundaryNames(_))
        ));
    }

    #[test]
    fn cylinder_projector_group_algebras() {
        for (n, k) in [(2usize, 1usize), (2, 3), (3, 2)] {
            let ss = orbifold_state_space(&zn(n), k, 0.0).unwrap();
            assert!(ss.idempotent, "P² = P for z{n}, k={k}");
            assert_eq!(ss.dimension, n, "state space of z{n} has dimension {n}");
            assert_eq!(ss.trace, Rat::from_int(n as i64), "trace equals the torus value");
        }
    }

    #[test]
    fn cylinder_projector_matrix_algebra() {
        let m2 = matrix_algebra::<Rat>(2).unwrap();
        let ss = orbifold_state_space(&m2, 1, 0.0).unwrap();
        assert!(ss.idempotent);
        assert_eq!(ss.dimension, 1);
        assert_eq!(ss.trace, Rat::from_int(1));
    }

    #[test]
    fn projector_trace_matches_torus_value() {
        let torus = builtin_manifold("torus2", None).unwrap();
        for n in [2usize, 3] {
            let alg = zn(n);
            let z = evaluate_closed_2d(&alg, &torus).unwrap();
            let ss = orbifold_state_space(&alg, 2, 0.0).unwrap();
            assert_eq!(ss.trace, z);
        }
    }

    #[test]
    fn point_insertion_is_commutative_for_groups() {
        let pa = point_insertion_algebra(&zn(3), 0.0).unwrap();
        assert_eq!(pa.dimension, 3);
        assert!(pa.projector_idempotent && pa.closed);
        assert!(pa.commutative && pa.associative && pa.unital);

        let m2 = matrix_algebra::<Rat>(2).unwrap();
        let pa = point_insertion_algebra(&m2, 0.0).unwrap();
        assert_eq!(pa.dimension, 1);
        assert!(pa.commutative && pa.associative && pa.unital);
    }

    #[test]
    fn pachner_moves_hold_for_group_algebras() {
        let sphere = builtin_manifold("sphere2", None).unwrap();
        let report = check_pachner_2d(&zn(3), &sphere, 0.0).unwrap();
        assert!(!report.items.is_empty());
        assert!(report.passed(), "failures: {:?}", report.failures());
        // Four refining moves per face plus the edge flips.
        let expand = report.items.iter().filter(|i| i.name.starts_with("1-3")).count();
        assert_eq!(expand, 4 * sphere.simplices().len());
    }

    #[test]
    fn wrong_normalisation_breaks_refining_moves_only() {
        // Rescale ε so that ε = δ_e: still a symmetric Frobenius structure,
        // but the refinement normalisation is off.
        let alg = zn(2).rescale_eps(&Rat::from_ratio(1, 2));
        let sphere = builtin_manifold("sphere2", None).unwrap();
        let report = check_pachner_2d(&alg, &sphere, 0.0).unwrap();
        let flips_ok = report
            .items
            .iter()
            .filter(|i| i.name.starts_with("2-2"))
            .all(|i| i.passed);
        let some_expand_fails = report
            .items
            .iter()
            .any(|i| i.name.starts_with("1-3") && !i.passed);
        assert!(flips_ok, "edge flips are insensitive to the normalisation");
        assert!(some_expand_fails, "refining moves detect the normalisation");
        assert!(report.items.iter().filter(|i| !i.passed).all(|i| i.witness.is_some()));
    }
}
