//! Generators for the built-in manifolds: simplex boundaries, the
//! seven-vertex torus, genus-g surfaces, layered circle products, the
//! antipodal-quotient model of projective 3-space, plus a greedy Pachner
//! simplifier and mod-p Betti numbers used to certify the shipped data.

use super::*;
use itertools::Itertools;

pub const S2XS1_JSON: &str = include_str!("../../data/s2xs1.json");
pub const TORUS3_JSON: &str = include_str!("../../data/torus3.json");
pub const RP3_JSON: &str = include_str!("../../data/rp3.json");

pub fn from_embedded_json(text: &str) -> Result<Triangulation, MeshError> {
    crate::io::triangulation_from_json(text).map_err(|e| MeshError::BadData(e.to_string()))
}

/// Heights equal to vertex ids — the convention of every generator here,
/// which makes id-relative and height-relative signs coincide.
fn rank_heights(n: u32) -> BTreeMap<VertexId, Height> {
    (0..n).map(|v| (v, BigRational::from_integer(BigInt::from(v)))).collect()
}

/// The boundary of the (dim+1)-simplex with its alternating facet signs.
pub fn boundary_of_simplex(dim: u8) -> Result<Triangulation, MeshError> {
    let n = dim as u32 + 2;
    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    for omit in 0..n {
        simplices.push((0..n).filter(|&v| v != omit).collect::<Vec<_>>());
        signs.push(if omit % 2 == 0 { 1 } else { -1 });
    }
    build_triangulation(dim, rank_heights(n), simplices, signs, BTreeMap::new())
}

/// The seven-vertex torus: faces {i, i+1, i+3} and {i, i+2, i+3} mod 7.
pub fn csaszar_torus() -> Result<Triangulation, MeshError> {
    let mut simplices = Vec::new();
    for i in 0u32..7 {
        simplices.push(sorted(vec![i, (i + 1) % 7, (i + 3) % 7]));
        simplices.push(sorted(vec![i, (i + 2) % 7, (i + 3) % 7]));
    }
    let signs = solve_orientation(&simplices)
        .ok_or_else(|| MeshError::Internal("seven-vertex torus must be orientable".into()))?;
    build_triangulation(2, rank_heights(7), simplices, signs, BTreeMap::new())
}

/// Glue, mirroring the second piece if the orientations clash.
pub fn glue_or_mirror(
    a: &Triangulation,
    b: &Triangulation,
    name_a: &str,
    name_b: &str,
) -> Result<Triangulation, MeshError> {
    match glue_along_boundary(a, b, name_a, name_b) {
        Err(MeshError::OrientationClash(_)) => glue_along_boundary(a, &b.mirror(), name_a, name_b),
        r => r,
    }
}

/// Closed oriented surface of genus g, built by chaining cut-open tori.
pub fn surface_of_genus(g: u32) -> Result<Triangulation, MeshError> {
    match g {
        0 => boundary_of_simplex(2),
        1 => csaszar_torus(),
        _ => {
            let one_hole = || csaszar_torus()?.cut_out(&[0, 1, 3], "cut");
            let mut cur = one_hole()?;
            for k in 2..=g {
                if k < g {
                    let piece = csaszar_torus()?
                        .cut_out(&[0, 1, 3], "cut1")?
                        .cut_out(&[2, 4, 5], "cut2")?;
                    cur = glue_or_mirror(&cur, &piece, "cut", "cut1")?;
                    cur = cur.rename_boundary_mark("cut2", "cut")?;
                } else {
                    cur = glue_or_mirror(&cur, &one_hole()?, "cut", "cut")?;
                }
            }
            Ok(cur)
        }
    }
}

/// Product of a closed surface with the circle, triangulated layer by
/// layer: each prism over a base triangle splits into three tetrahedra
/// whose wall diagonals always run from the lower base vertex on the
/// lower layer to the higher base vertex on the upper layer, so adjacent
/// prisms agree.
pub fn layered_product_s1(base: &Triangulation, layers: u32) -> Result<Triangulation, MeshError> {
    if base.dim() != 2 || !base.is_closed() {
        return Err(MeshError::BadParams("base must be a closed surface".into()));
    }
    if layers < 3 {
        return Err(MeshError::BadParams("need at least three layers".into()));
    }
    let mut order: Vec<VertexId> = base.heights().keys().copied().collect();
    order.sort_by(|a, b| base.heights()[a].cmp(&base.heights()[b]));
    let rank: BTreeMap<VertexId, u32> =
        order.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let nv = order.len() as u32;
    let id = |b: VertexId, l: u32| -> VertexId { rank[&b] * layers + (l % layers) };
    let mut simplices = Vec::new();
    for s in base.simplices() {
        let mut vs = s.clone();
        vs.sort_by(|a, b| base.heights()[a].cmp(&base.heights()[b]));
        let (u0, u1, u2) = (vs[0], vs[1], vs[2]);
        for l in 0..layers {
            let lp = l + 1;
            simplices.push(sorted(vec![id(u0, l), id(u1, l), id(u2, l), id(u2, lp)]));
            simplices.push(sorted(vec![id(u0, l), id(u1, l), id(u1, lp), id(u2, lp)]));
            simplices.push(sorted(vec![id(u0, l), id(u0, lp), id(u1, lp), id(u2, lp)]));
        }
    }
    let signs = solve_orientation(&simplices)
        .ok_or_else(|| MeshError::Internal("circle product must be orientable".into()))?;
    build_triangulation(3, rank_heights(nv * layers), simplices, signs, BTreeMap::new())
}

/// Projective 3-space as the antipodal quotient of the barycentric
/// subdivision of the 4-dimensional cross-polytope boundary.
///
/// A proper face of the cross-polytope boundary picks a sign for each
/// axis in a nonempty subset of the four axes — encoded `(mask, neg)`
/// with `neg ⊆ mask`. Subdivision vertices are such faces; top simplices
/// are complete flags F₁ ⊂ F₂ ⊂ F₃ ⊂ F₄. A flag never contains a face
/// together with its antipode, so the quotient by `neg ↦ neg ^ mask`
/// stays simplicial: 40 vertices, 192 tetrahedra.
pub fn rp3_barycentric_quotient() -> Result<Triangulation, MeshError> {
    let canon = |mask: u8, neg: u8| -> (u8, u8) {
        let anti = neg ^ mask;
        (mask, neg.min(anti))
    };
    let mut verts: BTreeSet<(u8, u8)> = BTreeSet::new();
    for mask in 1u8..16 {
        for neg in 0u8..16 {
            if neg & !mask == 0 {
                verts.insert(canon(mask, neg));
            }
        }
    }
    let index: BTreeMap<(u8, u8), VertexId> =
        verts.iter().enumerate().map(|(i, &f)| (f, i as VertexId)).collect();
    let mut tets: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    for neg in 0u8..16 {
        for perm in (0u8..4).permutations(4) {
            let mut mask = 0u8;
            let mut flag = Vec::with_capacity(4);
            for &ax in &perm {
                mask |= 1 << ax;
                flag.push(index[&canon(mask, neg & mask)]);
            }
            tets.insert(sorted(flag));
        }
    }
    let simplices: Vec<Vec<VertexId>> = tets.into_iter().collect();
    let signs = solve_orientation(&simplices)
        .ok_or_else(|| MeshError::Internal("projective 3-space must be orientable".into()))?;
    build_triangulation(3, rank_heights(index.len() as u32), simplices, signs, BTreeMap::new())
}

/// Greedy Pachner simplification of a closed 3-manifold: contract while
/// possible (4-1 before 3-2), with seeded 2-3 expansions to escape local
/// minima. Stops at `target` vertices or when the budget runs out.
pub fn simplify_3d(
    tri: &Triangulation,
    target: usize,
    seed: u64,
) -> Result<Triangulation, MeshError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut cur = tri.clone();
    let mut budget = 4000usize;
    let tet_cap = 4 * tri.simplices().len().max(64);
    while cur.vertex_count() > target && budget > 0 {
        budget -= 1;
        if let Some(site) = cur.enumerate_oriented_moves(MoveKind::Contract41)?.first() {
            cur = cur.apply_pachner_move(site)?;
            continue;
        }
        if let Some(site) = cur.enumerate_oriented_moves(MoveKind::Contract32)?.first() {
            cur = cur.apply_pachner_move(site)?;
            continue;
        }
        if cur.simplices().len() >= tet_cap {
            break;
        }
        let escapes = cur.enumerate_oriented_moves(MoveKind::Expand23)?;
        if escapes.is_empty() {
            break;
        }
        let site = &escapes[rng.gen_range(0..escapes.len())];
        cur = cur.apply_pachner_move(site)?;
    }
    Ok(cur)
}

/// Ranks (b₀, …, b_dim) of simplicial homology with F_p coefficients.
pub fn betti_numbers_mod_p(tri: &Triangulation, p: u64) -> Vec<usize> {
    let dim = tri.dim() as usize;
    let mut faces: Vec<Vec<Vec<VertexId>>> = Vec::new();
    let mut lookup: Vec<BTreeMap<Vec<VertexId>, usize>> = Vec::new();
    for k in 0..=dim {
        let fs: Vec<Vec<VertexId>> = tri.faces(k).into_iter().collect();
        lookup.push(fs.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect());
        faces.push(fs);
    }
    // Boundary matrix ∂_k: rows (k-1)-faces, columns k-faces.
    let mut ranks = vec![0usize; dim + 2];
    for k in 1..=dim {
        let mut m: Vec<Vec<u64>> = vec![vec![0; faces[k].len()]; faces[k - 1].len()];
        for (j, f) in faces[k].iter().enumerate() {
            for i in 0..f.len() {
                let mut sub = f.clone();
                sub.remove(i);
                let row = lookup[k - 1][&sub];
                let entry = if i % 2 == 0 { 1 } else { p - 1 };
                m[row][j] = (m[row][j] + entry) % p;
            }
        }
        ranks[k] = rank_mod_p(m, p);
    }
    (0..=dim).map(|k| faces[k].len() - ranks[k] - ranks[k + 1]).collect()
}

fn rank_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let inv = |a: u64| -> u64 {
        // Fermat inverse; p is prime and a ≠ 0 mod p.
        let mut base = a % p;
        let mut exp = p - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc
    };
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(pivot) = (row..rows).find(|&r| m[r][col] % p != 0) else { continue };
        m.swap(row, pivot);
        let iv = inv(m[row][col]);
        for c in col..cols {
            m[row][c] = m[row][c] * iv % p;
        }
        for r in 0..rows {
            if r != row && m[r][col] % p != 0 {
                let f = m[r][col];
                for c in col..cols {
                    m[r][c] = (m[r][c] + (p - f % p) * m[row][c]) % p;
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csaszar_is_a_neighborly_torus() {
        let t = csaszar_torus().unwrap();
        assert_eq!(t.f_vector(), vec![7, 21, 14]);
        assert_eq!(betti_numbers_mod_p(&t, 2), vec![1, 2, 1]);
        assert_eq!(betti_numbers_mod_p(&t, 3), vec![1, 2, 1]);
    }

    #[test]
    fn genus_two_betti_numbers() {
        let s = surface_of_genus(2).unwrap();
        assert_eq!(betti_numbers_mod_p(&s, 5), vec![1, 4, 1]);
    }

    #[test]
    fn sphere_product_has_circle_factor_homology() {
        let m = layered_product_s1(&boundary_of_simplex(2).unwrap(), 3).unwrap();
        assert_eq!(m.f_vector()[0], 12);
        assert_eq!(m.simplices().len(), 36);
        assert!(m.is_closed());
        assert_eq!(betti_numbers_mod_p(&m, 2), vec![1, 1, 1, 1]);
        assert_eq!(betti_numbers_mod_p(&m, 3), vec![1, 1, 1, 1]);
    }

    #[test]
    fn three_torus_product_has_rank_three_homology() {
        let m = layered_product_s1(&csaszar_torus().unwrap(), 3).unwrap();
        assert_eq!(m.f_vector()[0], 21);
        assert_eq!(m.simplices().len(), 126);
        assert_eq!(betti_numbers_mod_p(&m, 2), vec![1, 3, 3, 1]);
    }

    #[test]
    fn projective_space_quotient_is_simplicial_with_two_torsion() {
        let m = rp3_barycentric_quotient().unwrap();
        assert_eq!(m.f_vector(), vec![40, 232, 384, 192]);
        assert!(m.is_closed());
        // b₁ detects the 2-torsion only mod 2.
        assert_eq!(betti_numbers_mod_p(&m, 2), vec![1, 1, 1, 1]);
        assert_eq!(betti_numbers_mod_p(&m, 3), vec![1, 0, 0, 1]);
    }

    #[test]
    fn simplifier_shrinks_the_projective_space_model() {
        let m = rp3_barycentric_quotient().unwrap();
        let small = simplify_3d(&m, 15, 1).unwrap();
        assert!(small.vertex_count() <= 25, "still {} vertices", small.vertex_count());
        assert_eq!(betti_numbers_mod_p(&small, 2), vec![1, 1, 1, 1]);
        assert_eq!(betti_numbers_mod_p(&small, 3), vec![1, 0, 0, 1]);
    }
}
