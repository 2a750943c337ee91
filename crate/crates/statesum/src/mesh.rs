//! Oriented triangulations with totally ordered vertices.
//!
//! A [`Triangulation`] is a pure simplicial complex of dimension 2 or 3
//! given by its top-dimensional simplices, together with
//!
//! * an injective rational *height* on vertices — the total order that
//!   every state-sum convention in this crate is phrased against,
//! * a sign per top simplex — its orientation relative to the listing of
//!   its vertices in increasing id order, and
//! * named boundary components used for gluing.
//!
//! Everything is validated at construction: heights injective, facets
//! shared by at most two top simplices, vertex and edge links of manifold
//! type, and signs globally consistent. Oriented Pachner moves are
//! enumerated as [`MoveSite`]s — one site per height-order class for the
//! expanding moves — and applied purely, returning a new complex.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

pub mod gen;

pub type VertexId = u32;
pub type Height = BigRational;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("duplicate height {height} on vertices {a} and {b}")]
    DuplicateHeight { a: VertexId, b: VertexId, height: String },
    #[error("not a manifold: {0}")]
    NonManifold(String),
    #[error("orientation signs are inconsistent: {0}")]
    NonOrientable(String),
    #[error("vertex {0} lies in no top simplex")]
    DanglingVertex(VertexId),
    #[error("move kind {kind} does not apply in dimension {dim}")]
    KindDimensionMismatch { kind: MoveKind, dim: u8 },
    #[error("move site is stale or invalid: {0}")]
    StaleSite(String),
    #[error("boundary components do not match: {0}")]
    BoundaryMismatch(String),
    #[error("boundary orientations clash: {0}")]
    OrientationClash(String),
    #[error("unknown built-in manifold `{0}`")]
    UnknownName(String),
    #[error("bad parameters for built-in manifold: {0}")]
    BadParams(String),
    #[error("malformed triangulation data: {0}")]
    BadData(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// The oriented bistellar move kinds in dimensions 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Flip22,
    Expand13,
    Contract31,
    Expand23,
    Contract32,
    Expand14,
    Contract41,
}

impl MoveKind {
    pub fn dim(self) -> u8 {
        match self {
            MoveKind::Flip22 | MoveKind::Expand13 | MoveKind::Contract31 => 2,
            _ => 3,
        }
    }
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Flip22 => "2-2",
            MoveKind::Expand13 => "1-3",
            MoveKind::Contract31 => "3-1",
            MoveKind::Expand23 => "2-3",
            MoveKind::Contract32 => "3-2",
            MoveKind::Expand14 => "1-4",
            MoveKind::Contract41 => "4-1",
        }
    }
    pub fn parse(s: &str) -> Option<MoveKind> {
        Some(match s {
            "2-2" => MoveKind::Flip22,
            "1-3" => MoveKind::Expand13,
            "3-1" => MoveKind::Contract31,
            "2-3" => MoveKind::Expand23,
            "3-2" => MoveKind::Contract32,
            "1-4" => MoveKind::Expand14,
            "4-1" => MoveKind::Contract41,
            _ => return None,
        })
    }
    /// True for moves that insert a new vertex and need a height for it.
    pub fn expands(self) -> bool {
        matches!(self, MoveKind::Expand13 | MoveKind::Expand14)
    }
}

impl std::fmt::Display for MoveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A concrete place where a move applies, identified by the consumed top
/// simplices (as vertex sets, robust against index shuffling).
#[derive(Debug, Clone, PartialEq)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub simplices: Vec<Vec<VertexId>>,
    /// Height for the inserted vertex of an expanding move.
    pub new_height: Option<Height>,
}

/// Parity (±1) of the permutation sorting `items` (all distinct).
pub fn sort_parity<T: Ord + Clone>(items: &[T]) -> i8 {
    let mut v: Vec<T> = items.to_vec();
    let mut parity = 1i8;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if v[j] < v[i] {
                v.swap(i, j);
                parity = -parity;
            }
        }
    }
    parity
}

fn sorted(mut v: Vec<VertexId>) -> Vec<VertexId> {
    v.sort_unstable();
    v
}

/// An oriented simplicial complex of dimension 2 or 3. See module docs.
#[derive(Debug, Clone)]
pub struct Triangulation {
    dim: u8,
    heights: BTreeMap<VertexId, Height>,
    /// Top simplices, each with vertices sorted by id.
    simplices: Vec<Vec<VertexId>>,
    /// Orientation of each top simplex relative to its vertices listed in
    /// increasing height order.
    signs: Vec<i8>,
    /// Named boundary components: name -> set of boundary facets.
    boundary: BTreeMap<String, BTreeSet<Vec<VertexId>>>,
}

/// Validating constructor — the only way to make a [`Triangulation`].
pub fn build_triangulation(
    dim: u8,
    heights: BTreeMap<VertexId, Height>,
    simplices: Vec<Vec<VertexId>>,
    signs: Vec<i8>,
    boundary: BTreeMap<String, Vec<Vec<VertexId>>>,
) -> Result<Triangulation, MeshError> {
    if dim != 2 && dim != 3 {
        return Err(MeshError::BadData(format!("dimension must be 2 or 3, got {dim}")));
    }
    if simplices.len() != signs.len() {
        return Err(MeshError::BadData(format!(
            "{} simplices but {} signs",
            simplices.len(),
            signs.len()
        )));
    }
    if simplices.is_empty() {
        return Err(MeshError::BadData("no top simplices".into()));
    }
    if let Some(s) = signs.iter().find(|s| **s != 1 && **s != -1) {
        return Err(MeshError::BadData(format!("sign must be +1 or -1, got {s}")));
    }
    // Heights: present for every vertex referenced, injective overall.
    let mut by_height: BTreeMap<Height, VertexId> = BTreeMap::new();
    for (&v, h) in &heights {
        if let Some(&w) = by_height.get(h) {
            return Err(MeshError::DuplicateHeight { a: w, b: v, height: h.to_string() });
        }
        by_height.insert(h.clone(), v);
    }
    let mut seen: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut sorted_simplices = Vec::with_capacity(simplices.len());
    for s in &simplices {
        let t = sorted(s.clone());
        if t.len() != (dim + 1) as usize || t.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeshError::BadData(format!(
                "top simplex {s:?} must have {} distinct vertices",
                dim + 1
            )));
        }
        for &v in &t {
            if !heights.contains_key(&v) {
                return Err(MeshError::BadData(format!("vertex {v} has no height")));
            }
            used.insert(v);
        }
        if !seen.insert(t.clone()) {
            return Err(MeshError::NonManifold(format!("top simplex {t:?} appears twice")));
        }
        sorted_simplices.push(t);
    }
    for &v in heights.keys() {
        if !used.contains(&v) {
            return Err(MeshError::DanglingVertex(v));
        }
    }

    let tri = Triangulation {
        dim,
        heights,
        simplices: sorted_simplices,
        signs,
        boundary: BTreeMap::new(),
    };

    // Facet condition: every codimension-1 face in one or two tops.
    let inc = tri.facet_incidence();
    for (f, tops) in &inc {
        if tops.len() > 2 {
            return Err(MeshError::NonManifold(format!(
                "facet {f:?} lies in {} top simplices",
                tops.len()
            )));
        }
    }
    // Signs must agree across every interior facet.
    for (f, tops) in &inc {
        if let [(s, es), (t, et)] = tops.as_slice() {
            if tri.id_sign(*s) * es != -(tri.id_sign(*t) * et) {
                return Err(MeshError::NonOrientable(format!(
                    "facet {f:?} is induced with equal orientations by {:?} and {:?}",
                    tri.simplices[*s], tri.simplices[*t]
                )));
            }
        }
    }
    tri.check_links()?;

    // Boundary marks: actual boundary facets, no facet marked twice.
    let bd: BTreeSet<Vec<VertexId>> =
        inc.iter().filter(|(_, t)| t.len() == 1).map(|(f, _)| f.clone()).collect();
    let mut marked: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    let mut bmap = BTreeMap::new();
    for (name, facets) in boundary {
        let mut set = BTreeSet::new();
        for f in facets {
            let f = sorted(f);
            if !bd.contains(&f) {
                return Err(MeshError::BadData(format!(
                    "marked facet {f:?} in `{name}` is not a boundary facet"
                )));
            }
            if !marked.insert(f.clone()) {
                return Err(MeshError::BadData(format!(
                    "facet {f:?} is marked in more than one boundary component"
                )));
            }
            set.insert(f);
        }
        bmap.insert(name, set);
    }
    let mut tri = tri;
    tri.boundary = bmap;
    Ok(tri)
}

impl Triangulation {
    pub fn dim(&self) -> u8 {
        self.dim
    }
    pub fn heights(&self) -> &BTreeMap<VertexId, Height> {
        &self.heights
    }
    pub fn height(&self, v: VertexId) -> &Height {
        &self.heights[&v]
    }
    pub fn simplices(&self) -> &[Vec<VertexId>] {
        &self.simplices
    }
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
    pub fn boundary_marks(&self) -> &BTreeMap<String, BTreeSet<Vec<VertexId>>> {
        &self.boundary
    }
    pub fn vertex_count(&self) -> usize {
        self.heights.len()
    }

    /// Parity of the permutation from the id-sorted listing of a top
    /// simplex to its height-sorted listing.
    fn height_parity(&self, idx: usize) -> i8 {
        let keys: Vec<&Height> = self.simplices[idx].iter().map(|v| &self.heights[v]).collect();
        sort_parity(&keys)
    }

    /// Orientation of a top simplex relative to increasing vertex *ids* —
    /// the convention in which facet omission signs (-1)^i live.
    fn id_sign(&self, idx: usize) -> i8 {
        self.signs[idx] * self.height_parity(idx)
    }

    /// facet (sorted) -> [(top index, (-1)^position-of-omitted-vertex)].
    fn facet_incidence(&self) -> BTreeMap<Vec<VertexId>, Vec<(usize, i8)>> {
        let mut map: BTreeMap<Vec<VertexId>, Vec<(usize, i8)>> = BTreeMap::new();
        for (idx, s) in self.simplices.iter().enumerate() {
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                let eps = if i % 2 == 0 { 1 } else { -1 };
                map.entry(f).or_default().push((idx, eps));
            }
        }
        map
    }

    /// All boundary facets (sorted tuples), marked or not.
    pub fn boundary_facets(&self) -> BTreeSet<Vec<VertexId>> {
        self.facet_incidence()
            .into_iter()
            .filter(|(_, t)| t.len() == 1)
            .map(|(f, _)| f)
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_facets().is_empty()
    }

    /// All k-faces of the complex, deduplicated and sorted.
    pub fn faces(&self, k: usize) -> BTreeSet<Vec<VertexId>> {
        let mut out = BTreeSet::new();
        for s in &self.simplices {
            subsets_of_size(s, k + 1, &mut out);
        }
        out
    }

    pub fn f_vector(&self) -> Vec<usize> {
        (0..=self.dim as usize).map(|k| self.faces(k).len()).collect()
    }

    pub fn chi(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) })
            .sum()
    }

    /// χ of the boundary complex.
    pub fn boundary_chi(&self) -> i64 {
        let facets = self.boundary_facets();
        let mut faces: Vec<BTreeSet<Vec<VertexId>>> = vec![BTreeSet::new(); self.dim as usize];
        for f in &facets {
            for (k, bucket) in faces.iter_mut().enumerate() {
                subsets_of_size(f, k + 1, bucket);
            }
        }
        faces
            .iter()
            .enumerate()
            .map(|(k, set)| if k % 2 == 0 { set.len() as i64 } else { -(set.len() as i64) })
            .sum()
    }

    /// Link conditions that make the complex a manifold (with boundary).
    fn check_links(&self) -> Result<(), MeshError> {
        if self.dim == 2 {
            for (&v, _) in &self.heights {
                self.check_circle_link(
                    &[v],
                    &format!("vertex {v}"),
                )?;
            }
        } else {
            for e in self.faces(1) {
                self.check_circle_link(&e, &format!("edge {e:?}"))?;
            }
            for (&v, _) in &self.heights {
                self.check_surface_link(v)?;
            }
        }
        Ok(())
    }

    /// The link of `pivot` (a vertex in dim 2, an edge in dim 3) must be a
    /// single path or cycle.
    fn check_circle_link(&self, pivot: &[VertexId], what: &str) -> Result<(), MeshError> {
        let pset: BTreeSet<VertexId> = pivot.iter().copied().collect();
        // Link vertices and link edges (pairs) from incident top simplices.
        let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for s in &self.simplices {
            if pset.iter().all(|v| s.contains(v)) {
                let rest: Vec<VertexId> =
                    s.iter().copied().filter(|v| !pset.contains(v)).collect();
                if rest.len() == 2 {
                    adj.entry(rest[0]).or_default().push(rest[1]);
                    adj.entry(rest[1]).or_default().push(rest[0]);
                }
            }
        }
        if adj.is_empty() {
            return Ok(());
        }
        let mut odd = 0usize;
        for (v, ns) in &adj {
            if ns.len() > 2 {
                return Err(MeshError::NonManifold(format!(
                    "link of {what} branches at vertex {v}"
                )));
            }
            if ns.len() == 1 {
                odd += 1;
            }
        }
        if odd != 0 && odd != 2 {
            return Err(MeshError::NonManifold(format!(
                "link of {what} has {odd} path endpoints"
            )));
        }
        // Connectivity of the link graph.
        let start = *adj.keys().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[&v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        if seen.len() != adj.len() {
            return Err(MeshError::NonManifold(format!("link of {what} is disconnected")));
        }
        Ok(())
    }

    /// In dimension 3 the link of a vertex must be a 2-sphere (interior)
    /// or a disk (boundary): a connected surface with the right χ.
    fn check_surface_link(&self, v: VertexId) -> Result<(), MeshError> {
        let star: Vec<&Vec<VertexId>> =
            self.simplices.iter().filter(|s| s.contains(&v)).collect();
        let link_tris: Vec<Vec<VertexId>> = star
            .iter()
            .map(|s| s.iter().copied().filter(|&w| w != v).collect())
            .collect();
        let mut edge_count: BTreeMap<Vec<VertexId>, usize> = BTreeMap::new();
        let mut verts: BTreeSet<VertexId> = BTreeSet::new();
        for t in &link_tris {
            verts.extend(t.iter().copied());
            for i in 0..3 {
                for j in (i + 1)..3 {
                    *edge_count.entry(vec![t[i], t[j]]).or_default() += 1;
                }
            }
        }
        if edge_count.values().any(|&c| c > 2) {
            return Err(MeshError::NonManifold(format!("link of vertex {v} is not a surface")));
        }
        let open_edges = edge_count.values().filter(|&&c| c == 1).count() as i64;
        let chi = verts.len() as i64 - edge_count.len() as i64 + link_tris.len() as i64;
        let want = if open_edges == 0 { 2 } else { 1 };
        if chi != want {
            return Err(MeshError::NonManifold(format!(
                "link of vertex {v} has Euler characteristic {chi}, expected {want}"
            )));
        }
        // Connectivity through shared edges.
        let mut seen = vec![false; link_tris.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, t) in link_tris.iter().enumerate() {
                if !seen[j] && shares_pair(&link_tris[i], t) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(MeshError::NonManifold(format!("link of vertex {v} is disconnected")));
        }
        Ok(())
    }

    /// Orientation of a top simplex relative to its vertices sorted by
    /// increasing *height* — the stored convention.
    pub fn height_sign(&self, idx: usize) -> i8 {
        self.signs[idx]
    }

    /// Vertices of a top simplex in increasing height order.
    pub fn by_height(&self, idx: usize) -> Vec<VertexId> {
        let mut vs = self.simplices[idx].clone();
        vs.sort_by(|a, b| self.heights[a].cmp(&self.heights[b]));
        vs
    }

    /// Mirror image: all orientations reversed.
    pub fn mirror(&self) -> Triangulation {
        let mut t = self.clone();
        for s in &mut t.signs {
            *s = -*s;
        }
        t
    }

    /// Remove one top simplex and expose its facets as a new named
    /// boundary component. The facets must currently be interior.
    pub fn cut_out(&self, simplex: &[VertexId], name: &str) -> Result<Triangulation, MeshError> {
        let target = sorted(simplex.to_vec());
        let idx = self
            .simplices
            .iter()
            .position(|s| *s == target)
            .ok_or_else(|| MeshError::BadData(format!("no top simplex {target:?}")))?;
        if self.boundary.contains_key(name) {
            return Err(MeshError::BadData(format!("boundary name `{name}` already in use")));
        }
        let mut simplices = self.simplices.clone();
        let mut signs = self.signs.clone();
        simplices.remove(idx);
        signs.remove(idx);
        let mut boundary: BTreeMap<String, Vec<Vec<VertexId>>> = self
            .boundary
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
            .collect();
        let mut facets = Vec::new();
        for i in 0..target.len() {
            let mut f = target.clone();
            f.remove(i);
            facets.push(f);
        }
        boundary.insert(name.to_string(), facets);
        let mut heights = self.heights.clone();
        heights.retain(|v, _| simplices.iter().any(|s| s.contains(v)));
        build_triangulation(self.dim, heights, simplices, signs, boundary)
    }

    pub fn rename_boundary_mark(&self, from: &str, to: &str) -> Result<Triangulation, MeshError> {
        let mut t = self.clone();
        let set = t
            .boundary
            .remove(from)
            .ok_or_else(|| MeshError::BadData(format!("no boundary component `{from}`")))?;
        if t.boundary.contains_key(to) {
            return Err(MeshError::BadData(format!("boundary name `{to}` already in use")));
        }
        t.boundary.insert(to.to_string(), set);
        Ok(t)
    }

    /// Canonical form under relabelling by height rank: isomorphism between
    /// complexes is equality of canonical keys.
    pub fn canonical_key(&self) -> String {
        let mut order: Vec<VertexId> = self.heights.keys().copied().collect();
        order.sort_by(|a, b| self.heights[a].cmp(&self.heights[b]));
        let rank: BTreeMap<VertexId, usize> =
            order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let relabel = |s: &Vec<VertexId>| -> Vec<usize> {
            let mut t: Vec<usize> = s.iter().map(|v| rank[v]).collect();
            t.sort_unstable();
            t
        };
        let mut tops: Vec<(Vec<usize>, i8)> = self
            .simplices
            .iter()
            .enumerate()
            // Rank order is height order, so the stored sign carries over.
            .map(|(i, s)| (relabel(s), self.signs[i]))
            .collect();
        tops.sort();
        let mut bd: Vec<(String, Vec<Vec<usize>>)> = self
            .boundary
            .iter()
            .map(|(name, fs)| {
                let mut v: Vec<Vec<usize>> = fs.iter().map(relabel).collect();
                v.sort();
                (name.clone(), v)
            })
            .collect();
        bd.sort();
        format!("d{};t{:?};b{:?}", self.dim, tops, bd)
    }

    pub fn isomorphic(&self, other: &Triangulation) -> bool {
        self.canonical_key() == other.canonical_key()
    }

    /// A height strictly inside (lo, hi) — or beyond all heights when one
    /// bound is open — distinct from every existing height.
    fn fresh_height(&self, lo: Option<&Height>, hi: Option<&Height>) -> Height {
        let taken: BTreeSet<&Height> = self.heights.values().collect();
        match (lo, hi) {
            (None, Some(h)) => {
                let mut c = h - BigRational::one();
                if let Some(min) = self.heights.values().min() {
                    if min < h {
                        c = min - BigRational::one();
                    }
                }
                c
            }
            (Some(l), None) => {
                let mut c = l + BigRational::one();
                if let Some(max) = self.heights.values().max() {
                    if max > l {
                        c = max + BigRational::one();
                    }
                }
                c
            }
            (Some(l), Some(h)) => {
                let two = BigRational::from_integer(BigInt::from(2));
                let mut c = (l + h) / &two;
                while taken.contains(&c) {
                    c = (l + &c) / &two;
                }
                c
            }
            (None, None) => unreachable!("at least one bound is always given"),
        }
    }

    fn next_vertex_id(&self) -> VertexId {
        self.heights.keys().copied().max().map_or(0, |m| m + 1)
    }

    /// Enumerate all sites where `kind` applies. Expanding kinds yield one
    /// site per height-order class of the new vertex relative to the
    /// consumed simplex (4 classes per triangle, 5 per tetrahedron).
    pub fn enumerate_oriented_moves(&self, kind: MoveKind) -> Result<Vec<MoveSite>, MeshError> {
        if kind.dim() != self.dim {
            return Err(MeshError::KindDimensionMismatch { kind, dim: self.dim });
        }
        let inc = self.facet_incidence();
        let edges = self.faces(1);
        let mut sites = Vec::new();
        match kind {
            MoveKind::Flip22 => {
                for (f, tops) in &inc {
                    let [(s, _), (t, _)] = tops.as_slice() else { continue };
                    let a = apex(&self.simplices[*s], f);
                    let b = apex(&self.simplices[*t], f);
                    if edges.contains(&sorted(vec![a, b])) {
                        continue;
                    }
                    let n0 = sorted(vec![a, b, f[0]]);
                    let n1 = sorted(vec![a, b, f[1]]);
                    if self.simplices.contains(&n0) || self.simplices.contains(&n1) {
                        continue;
                    }
                    sites.push(MoveSite {
                        kind,
                        simplices: vec![self.simplices[*s].clone(), self.simplices[*t].clone()],
                        new_height: None,
                    });
                }
            }
            MoveKind::Expand13 | MoveKind::Expand14 => {
                for s in &self.simplices {
                    let mut hs: Vec<&Height> = s.iter().map(|v| &self.heights[v]).collect();
                    hs.sort();
                    let mut bounds: Vec<(Option<&Height>, Option<&Height>)> =
                        vec![(None, Some(hs[0]))];
                    for w in hs.windows(2) {
                        bounds.push((Some(w[0]), Some(w[1])));
                    }
                    bounds.push((Some(hs[hs.len() - 1]), None));
                    for (lo, hi) in bounds {
                        sites.push(MoveSite {
                            kind,
                            simplices: vec![s.clone()],
                            new_height: Some(self.fresh_height(lo, hi)),
                        });
                    }
                }
            }
            MoveKind::Contract31 | MoveKind::Contract41 => {
                let want = if kind == MoveKind::Contract31 { 3 } else { 4 };
                for (&v, _) in &self.heights {
                    let star: Vec<usize> = (0..self.simplices.len())
                        .filter(|&i| self.simplices[i].contains(&v))
                        .collect();
                    if star.len() != want {
                        continue;
                    }
                    let mut link: BTreeSet<VertexId> = BTreeSet::new();
                    for &i in &star {
                        link.extend(self.simplices[i].iter().filter(|&&w| w != v));
                    }
                    if link.len() != want {
                        continue;
                    }
                    let link: Vec<VertexId> = link.into_iter().collect();
                    // The simplex that would close the star must be fresh.
                    if self.faces(self.dim as usize).contains(&link) {
                        continue;
                    }
                    // v must be interior: every facet through v is shared.
                    let interior = star.iter().all(|&i| {
                        let s = &self.simplices[i];
                        (0..s.len()).all(|k| {
                            let mut f = s.clone();
                            f.remove(k);
                            !f.contains(&v) || inc[&f].len() == 2
                        })
                    });
                    if !interior {
                        continue;
                    }
                    sites.push(MoveSite {
                        kind,
                        simplices: star.iter().map(|&i| self.simplices[i].clone()).collect(),
                        new_height: None,
                    });
                }
            }
            MoveKind::Expand23 => {
                for (f, tops) in &inc {
                    let [(s, _), (t, _)] = tops.as_slice() else { continue };
                    let p = apex(&self.simplices[*s], f);
                    let q = apex(&self.simplices[*t], f);
                    if edges.contains(&sorted(vec![p, q])) {
                        continue;
                    }
                    sites.push(MoveSite {
                        kind,
                        simplices: vec![self.simplices[*s].clone(), self.simplices[*t].clone()],
                        new_height: None,
                    });
                }
            }
            MoveKind::Contract32 => {
                let tris = self.faces(2);
                for e in &edges {
                    let star: Vec<usize> = (0..self.simplices.len())
                        .filter(|&i| e.iter().all(|v| self.simplices[i].contains(v)))
                        .collect();
                    if star.len() != 3 {
                        continue;
                    }
                    let mut others: BTreeMap<VertexId, usize> = BTreeMap::new();
                    for &i in &star {
                        for &w in &self.simplices[i] {
                            if !e.contains(&w) {
                                *others.entry(w).or_default() += 1;
                            }
                        }
                    }
                    if others.len() != 3 || others.values().any(|&c| c != 2) {
                        continue;
                    }
                    let abc: Vec<VertexId> = others.keys().copied().collect();
                    if tris.contains(&abc) {
                        continue;
                    }
                    // Edge must be interior: each triangle through it in 2 tets.
                    let interior = others.keys().all(|&x| {
                        let t = sorted(vec![e[0], e[1], x]);
                        inc.get(&t).map_or(false, |v| v.len() == 2)
                    });
                    if !interior {
                        continue;
                    }
                    sites.push(MoveSite {
                        kind,
                        simplices: star.iter().map(|&i| self.simplices[i].clone()).collect(),
                        new_height: None,
                    });
                }
            }
        }
        Ok(sites)
    }

    /// Apply a move, returning the new complex. Errors with `StaleSite` if
    /// the consumed simplices are gone or no longer form the right pattern.
    pub fn apply_pachner_move(&self, site: &MoveSite) -> Result<Triangulation, MeshError> {
        if site.kind.dim() != self.dim {
            return Err(MeshError::KindDimensionMismatch { kind: site.kind, dim: self.dim });
        }
        let mut consumed = Vec::new();
        for s in &site.simplices {
            let t = sorted(s.clone());
            let idx = self
                .simplices
                .iter()
                .position(|u| *u == t)
                .ok_or_else(|| MeshError::StaleSite(format!("top simplex {t:?} not present")))?;
            consumed.push(idx);
        }
        consumed.sort_unstable();
        consumed.dedup();
        if consumed.len() != site.simplices.len() {
            return Err(MeshError::StaleSite("site lists a simplex twice".into()));
        }

        let produced: Vec<Vec<VertexId>> = match site.kind {
            MoveKind::Flip22 => {
                let [s, t] = consumed.as_slice() else {
                    return Err(MeshError::StaleSite("2-2 needs two simplices".into()));
                };
                let f = shared_facet(&self.simplices[*s], &self.simplices[*t])
                    .ok_or_else(|| MeshError::StaleSite("simplices share no edge".into()))?;
                let a = apex(&self.simplices[*s], &f);
                let b = apex(&self.simplices[*t], &f);
                if self.faces(1).contains(&sorted(vec![a, b])) {
                    return Err(MeshError::StaleSite("flipped edge already exists".into()));
                }
                vec![sorted(vec![a, b, f[0]]), sorted(vec![a, b, f[1]])]
            }
            MoveKind::Expand13 | MoveKind::Expand14 => {
                let [s] = consumed.as_slice() else {
                    return Err(MeshError::StaleSite("expanding move needs one simplex".into()));
                };
                let x = self.next_vertex_id();
                let base = &self.simplices[*s];
                (0..base.len())
                    .map(|i| {
                        let mut t = base.clone();
                        t.remove(i);
                        t.push(x);
                        sorted(t)
                    })
                    .collect()
            }
            MoveKind::Contract31 | MoveKind::Contract41 => {
                let verts: BTreeMap<VertexId, usize> = count_vertices(
                    consumed.iter().map(|&i| &self.simplices[i]),
                );
                let centre = *verts
                    .iter()
                    .find(|(_, &c)| c == consumed.len())
                    .map(|(v, _)| v)
                    .ok_or_else(|| MeshError::StaleSite("no common centre vertex".into()))?;
                let link: Vec<VertexId> =
                    verts.keys().copied().filter(|&v| v != centre).collect();
                if link.len() != self.dim as usize + 1 {
                    return Err(MeshError::StaleSite("link is not a simplex boundary".into()));
                }
                vec![link]
            }
            MoveKind::Expand23 => {
                let [s, t] = consumed.as_slice() else {
                    return Err(MeshError::StaleSite("2-3 needs two simplices".into()));
                };
                let f = shared_facet(&self.simplices[*s], &self.simplices[*t])
                    .ok_or_else(|| MeshError::StaleSite("tetrahedra share no face".into()))?;
                let p = apex(&self.simplices[*s], &f);
                let q = apex(&self.simplices[*t], &f);
                if self.faces(1).contains(&sorted(vec![p, q])) {
                    return Err(MeshError::StaleSite("connecting edge already exists".into()));
                }
                (0..3)
                    .map(|i| {
                        let mut keep: Vec<VertexId> =
                            f.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &v)| v).collect();
                        keep.push(p);
                        keep.push(q);
                        sorted(keep)
                    })
                    .collect()
            }
            MoveKind::Contract32 => {
                let verts: BTreeMap<VertexId, usize> =
                    count_vertices(consumed.iter().map(|&i| &self.simplices[i]));
                let e: Vec<VertexId> =
                    verts.iter().filter(|(_, &c)| c == 3).map(|(&v, _)| v).collect();
                let abc: Vec<VertexId> =
                    verts.iter().filter(|(_, &c)| c == 2).map(|(&v, _)| v).collect();
                if e.len() != 2 || abc.len() != 3 {
                    return Err(MeshError::StaleSite("not a 3-2 bipyramid".into()));
                }
                vec![sorted([abc.clone(), vec![e[0]]].concat()), sorted([abc, vec![e[1]]].concat())]
            }
        };

        // New vertex bookkeeping for expanding moves.
        let mut heights = self.heights.clone();
        if site.kind.expands() {
            let h = site
                .new_height
                .clone()
                .ok_or_else(|| MeshError::StaleSite("expanding move needs new_height".into()))?;
            if heights.values().any(|g| *g == h) {
                return Err(MeshError::StaleSite(format!("height {h} already taken")));
            }
            heights.insert(self.next_vertex_id(), h);
        }

        // Frontier facets of the consumed region, with the orientation the
        // old side induced on them. The new side must induce the same.
        let consumed_set: BTreeSet<usize> = consumed.iter().copied().collect();
        let mut frontier: BTreeMap<Vec<VertexId>, i8> = BTreeMap::new();
        {
            let mut count: BTreeMap<Vec<VertexId>, Vec<(usize, i8)>> = BTreeMap::new();
            for &i in &consumed {
                let s = &self.simplices[i];
                for k in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(k);
                    let eps = if k % 2 == 0 { 1 } else { -1 };
                    count.entry(f).or_default().push((i, eps));
                }
            }
            for (f, tops) in count {
                if tops.len() == 1 {
                    let (i, eps) = tops[0];
                    frontier.insert(f, self.id_sign(i) * eps);
                }
            }
        }

        let mut new_signs: Vec<Option<i8>> = vec![None; produced.len()];
        for (j, s) in produced.iter().enumerate() {
            for k in 0..s.len() {
                let mut f = s.clone();
                f.remove(k);
                if let Some(&want) = frontier.get(&f) {
                    let eps = if k % 2 == 0 { 1 } else { -1 };
                    let forced = want * eps;
                    match new_signs[j] {
                        None => new_signs[j] = Some(forced),
                        Some(prev) if prev != forced => {
                            return Err(MeshError::Internal(format!(
                                "inconsistent orientation for produced simplex {s:?}"
                            )))
                        }
                        _ => {}
                    }
                }
            }
        }

        let mut simplices = Vec::new();
        let mut signs = Vec::new();
        for i in 0..self.simplices.len() {
            if !consumed_set.contains(&i) {
                simplices.push(self.simplices[i].clone());
                signs.push(self.signs[i]);
            }
        }
        for (j, s) in produced.iter().enumerate() {
            let id_sign = new_signs[j].ok_or_else(|| {
                MeshError::Internal(format!("no frontier facet pins simplex {s:?}"))
            })?;
            // Convert from the id convention back to the stored
            // height-relative convention.
            let keys: Vec<&Height> = s.iter().map(|v| &heights[v]).collect();
            simplices.push(s.clone());
            signs.push(id_sign * sort_parity(&keys));
        }
        // Contracting moves may orphan the centre vertex's height.
        heights.retain(|v, _| simplices.iter().any(|s| s.contains(v)));

        let boundary: BTreeMap<String, Vec<Vec<VertexId>>> = self
            .boundary
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
            .collect();
        build_triangulation(self.dim, heights, simplices, signs, boundary)
    }

    /// Apply `steps` random moves drawn from `kinds` (seeded, reproducible).
    pub fn pachner_scramble(
        &self,
        kinds: &[MoveKind],
        steps: usize,
        seed: u64,
    ) -> Result<Triangulation, MeshError> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut cur = self.clone();
        for _ in 0..steps {
            let mut options = Vec::new();
            for &k in kinds {
                if k.dim() == self.dim {
                    options.extend(cur.enumerate_oriented_moves(k)?);
                }
            }
            if options.is_empty() {
                break;
            }
            let site = options[rng.gen_range(0..options.len())].clone();
            cur = cur.apply_pachner_move(&site)?;
        }
        Ok(cur)
    }
}

fn subsets_of_size(s: &[VertexId], k: usize, out: &mut BTreeSet<Vec<VertexId>>) {
    let n = s.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.insert(idx.iter().map(|&i| s[i]).collect());
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn shares_pair(a: &[VertexId], b: &[VertexId]) -> bool {
    a.iter().filter(|v| b.contains(v)).count() >= 2
}

fn apex(simplex: &[VertexId], facet: &[VertexId]) -> VertexId {
    *simplex.iter().find(|v| !facet.contains(v)).expect("facet of its simplex")
}

fn shared_facet(a: &[VertexId], b: &[VertexId]) -> Option<Vec<VertexId>> {
    let f: Vec<VertexId> = a.iter().copied().filter(|v| b.contains(v)).collect();
    if f.len() == a.len() - 1 {
        Some(f)
    } else {
        None
    }
}

fn count_vertices<'a>(simplices: impl Iterator<Item = &'a Vec<VertexId>>) -> BTreeMap<VertexId, usize> {
    let mut map = BTreeMap::new();
    for s in simplices {
        for &v in s {
            *map.entry(v).or_default() += 1;
        }
    }
    map
}

/// Find a consistent orientation (sign per top simplex, relative to
/// increasing vertex ids) by propagation, anchored at the first simplex.
/// `None` if the complex is non-orientable. When heights are assigned in
/// id order the result is also height-relative.
pub fn solve_orientation(simplices: &[Vec<VertexId>]) -> Option<Vec<i8>> {
    let n = simplices.len();
    let mut inc: HashMap<Vec<VertexId>, Vec<(usize, i8)>> = HashMap::new();
    for (i, s) in simplices.iter().enumerate() {
        let mut t = s.clone();
        t.sort_unstable();
        for k in 0..t.len() {
            let mut f = t.clone();
            f.remove(k);
            inc.entry(f).or_default().push((i, if k % 2 == 0 { 1 } else { -1 }));
        }
    }
    let mut signs: Vec<Option<i8>> = vec![None; n];
    for start in 0..n {
        if signs[start].is_some() {
            continue;
        }
        signs[start] = Some(1);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let si = signs[i].unwrap();
            let mut t = simplices[i].clone();
            t.sort_unstable();
            for k in 0..t.len() {
                let mut f = t.clone();
                f.remove(k);
                let ei = if k % 2 == 0 { 1 } else { -1 };
                for &(j, ej) in &inc[&f] {
                    if j == i {
                        continue;
                    }
                    let want = -si * ei * ej;
                    match signs[j] {
                        None => {
                            signs[j] = Some(want);
                            stack.push(j);
                        }
                        Some(have) if have != want => return None,
                        _ => {}
                    }
                }
            }
        }
    }
    Some(signs.into_iter().map(|s| s.unwrap()).collect())
}

/// Height-rank matching between two named boundary components: the i-th
/// lowest vertex of one is glued to the i-th lowest of the other.
pub fn boundary_matching(
    a: &Triangulation,
    name_a: &str,
    b: &Triangulation,
    name_b: &str,
) -> Result<Vec<(VertexId, VertexId)>, MeshError> {
    let fa = a
        .boundary
        .get(name_a)
        .ok_or_else(|| MeshError::BoundaryMismatch(format!("no component `{name_a}`")))?;
    let fb = b
        .boundary
        .get(name_b)
        .ok_or_else(|| MeshError::BoundaryMismatch(format!("no component `{name_b}`")))?;
    let verts = |fs: &BTreeSet<Vec<VertexId>>| -> BTreeSet<VertexId> {
        fs.iter().flat_map(|f| f.iter().copied()).collect()
    };
    let mut va: Vec<VertexId> = verts(fa).into_iter().collect();
    let mut vb: Vec<VertexId> = verts(fb).into_iter().collect();
    if va.len() != vb.len() || fa.len() != fb.len() {
        return Err(MeshError::BoundaryMismatch(format!(
            "`{name_a}` has {} vertices / {} facets; `{name_b}` has {} / {}",
            va.len(),
            fa.len(),
            vb.len(),
            fb.len()
        )));
    }
    va.sort_by(|x, y| a.heights[x].cmp(&a.heights[y]));
    vb.sort_by(|x, y| b.heights[x].cmp(&b.heights[y]));
    Ok(vb.into_iter().zip(va).map(|(x, y)| (x, y)).collect())
}

/// Glue two triangulations along named boundary components.
///
/// Vertices are matched by height rank; the matched facet sets must agree
/// and must be oppositely oriented. The second complex keeps its
/// orientation; its non-interface vertices are relabelled and lifted above
/// all existing heights (relative order preserved).
pub fn glue_along_boundary(
    a: &Triangulation,
    b: &Triangulation,
    name_a: &str,
    name_b: &str,
) -> Result<Triangulation, MeshError> {
    glue_with_map(a, b, name_a, name_b).map(|(t, _)| t)
}

/// Like [`glue_along_boundary`], additionally returning the full vertex
/// relabelling applied to the second complex (interface vertices map to
/// their partners in the first complex, the rest to fresh ids).
pub fn glue_with_map(
    a: &Triangulation,
    b: &Triangulation,
    name_a: &str,
    name_b: &str,
) -> Result<(Triangulation, BTreeMap<VertexId, VertexId>), MeshError> {
    if a.dim != b.dim {
        return Err(MeshError::BoundaryMismatch(format!(
            "dimension {} vs {}",
            a.dim, b.dim
        )));
    }
    let matching = boundary_matching(a, name_a, b, name_b)?;
    let to_a: BTreeMap<VertexId, VertexId> = matching.iter().copied().collect();
    let fa = &a.boundary[name_a];
    let fb = &b.boundary[name_b];
    let mapped: BTreeSet<Vec<VertexId>> =
        fb.iter().map(|f| sorted(f.iter().map(|v| to_a[v]).collect())).collect();
    if &mapped != fa {
        return Err(MeshError::BoundaryMismatch(
            "matched facet sets differ under the height-rank bijection".into(),
        ));
    }

    // Induced orientation of each interface facet from both sides; they
    // must be opposite once transported through the vertex bijection.
    let induced = |t: &Triangulation, f: &Vec<VertexId>| -> i8 {
        let inc = t.facet_incidence();
        let &(i, eps) = &inc[f][0];
        t.id_sign(i) * eps
    };
    for f in fb {
        let fa_key = sorted(f.iter().map(|v| to_a[v]).collect());
        let ea = induced(a, &fa_key);
        // Transport b's induced sign through the relabelling.
        let relab: Vec<VertexId> = f.iter().map(|v| to_a[v]).collect();
        let eb = induced(b, f) * sort_parity(&relab);
        if ea != -eb {
            return Err(MeshError::OrientationClash(format!(
                "facet {fa_key:?} is induced with the same orientation from both sides"
            )));
        }
    }

    // Relabel b into a's id space.
    let mut relabel: BTreeMap<VertexId, VertexId> = to_a.clone();
    let mut next = a.next_vertex_id();
    let mut rest: Vec<VertexId> =
        b.heights.keys().copied().filter(|v| !to_a.contains_key(v)).collect();
    rest.sort_by(|x, y| b.heights[x].cmp(&b.heights[y]));
    let max_h = a.heights.values().max().cloned().unwrap_or_else(|| BigRational::one());
    let mut heights = a.heights.clone();
    for (k, v) in rest.iter().enumerate() {
        relabel.insert(*v, next);
        heights.insert(next, &max_h + BigRational::from_integer(BigInt::from(k as i64 + 1)));
        next += 1;
    }

    let mut simplices = a.simplices.clone();
    let mut signs = a.signs.clone();
    for (i, s) in b.simplices.iter().enumerate() {
        // Transport through the relabelling (id convention), then convert
        // to the stored height-relative convention under the new heights.
        let relab: Vec<VertexId> = s.iter().map(|v| relabel[v]).collect();
        let id_sign = b.id_sign(i) * sort_parity(&relab);
        let srt = sorted(relab);
        let keys: Vec<&Height> = srt.iter().map(|v| &heights[v]).collect();
        signs.push(id_sign * sort_parity(&keys));
        simplices.push(srt);
    }

    let mut boundary: BTreeMap<String, Vec<Vec<VertexId>>> = BTreeMap::new();
    for (name, fs) in &a.boundary {
        if name == name_a {
            continue;
        }
        boundary.insert(name.clone(), fs.iter().cloned().collect());
    }
    for (name, fs) in &b.boundary {
        if name == name_b {
            continue;
        }
        let mut name2 = name.clone();
        while boundary.contains_key(&name2) {
            name2.push_str("+b");
        }
        boundary.insert(
            name2,
            fs.iter().map(|f| sorted(f.iter().map(|v| relabel[v]).collect())).collect(),
        );
    }

    let glued = build_triangulation(a.dim, heights, simplices, signs, boundary)?;
    Ok((glued, relabel))
}

/// Built-in manifolds. `param` is the genus for `surface_genus` and must
/// be absent otherwise.
pub fn builtin_manifold(name: &str, param: Option<i64>) -> Result<Triangulation, MeshError> {
    match (name, param) {
        ("sphere2", None) => gen::boundary_of_simplex(2),
        ("sphere3", None) => gen::boundary_of_simplex(3),
        ("torus2", None) => gen::csaszar_torus(),
        ("surface_genus", Some(g)) if g >= 0 => gen::surface_of_genus(g as u32),
        ("surface_genus", _) => Err(MeshError::BadParams(
            "surface_genus requires a non-negative genus".into(),
        )),
        ("s2xs1", None) => gen::from_embedded_json(gen::S2XS1_JSON),
        ("torus3", None) => gen::from_embedded_json(gen::TORUS3_JSON),
        ("rp3", None) => gen::from_embedded_json(gen::RP3_JSON),
        ("sphere2" | "sphere3" | "torus2" | "s2xs1" | "torus3" | "rp3", Some(_)) => {
            Err(MeshError::BadParams(format!("`{name}` takes no parameter")))
        }
        _ => Err(MeshError::UnknownName(name.to_string())),
    }
}
