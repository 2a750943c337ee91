//! Finite-dimensional algebras with Frobenius structure and the axiom
//! checks that qualify them as 2D orbifold data.
//!
//! A [`FrobeniusData`] packages a multiplication tensor, unit, counit and
//! (optionally) a comultiplication over any [`Scalar`] field. The checker
//! evaluates associativity, unit, coassociativity, counit, the Frobenius
//! compatibility, symmetry of the pairing ε∘μ, and Δ-separability
//! (μ∘Δ = id), reporting one residual per axiom. When Δ is absent it is
//! derived canonically from (μ, ε) through the inverse pairing.

use crate::scalar::{Scalar, ScalarError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrobError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("the pairing ε∘μ is degenerate")]
    DegeneratePairing,
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("group order is not invertible in this scalar field: {0}")]
    BadCharacteristic(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// An algebra A with chosen basis: e_i·e_j = Σ_k mu[i][j][k] e_k, unit
/// Σ_i eta[i] e_i, counit ε(e_i) = eps[i], and optionally
/// Δ(e_i) = Σ_{j,k} delta[i][j][k] e_j ⊗ e_k.
#[derive(Clone, Debug)]
pub struct FrobeniusData<S: Scalar> {
    pub dim: usize,
    pub labels: Vec<String>,
    pub mu: Vec<Vec<Vec<S>>>,
    pub eta: Vec<S>,
    pub eps: Vec<S>,
    pub delta: Option<Vec<Vec<Vec<S>>>>,
}

/// One axiom's outcome. `required` distinguishes the defining algebra
/// axioms from informational structure flags (symmetry, separability).
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub required: bool,
    pub witness: Option<String>,
}

/// Outcome of an axiom suite; `passed()` gates on required items only.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn push(
        &mut self,
        name: &str,
        passed: bool,
        residual: f64,
        required: bool,
        witness: Option<String>,
    ) {
        self.items.push(CheckItem { name: name.to_string(), passed, residual, required, witness });
    }

    /// All required axioms hold.
    pub fn passed(&self) -> bool {
        self.items.iter().filter(|i| i.required).all(|i| i.passed)
    }

    /// Every item holds, informational ones included.
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.items.iter().map(|i| i.residual).fold(0.0, f64::max)
    }
}

fn zeros3<S: Scalar>(n: usize) -> Vec<Vec<Vec<S>>> {
    vec![vec![vec![S::zero(); n]; n]; n]
}

impl<S: Scalar> FrobeniusData<S> {
    pub fn new(
        mu: Vec<Vec<Vec<S>>>,
        eta: Vec<S>,
        eps: Vec<S>,
        delta: Option<Vec<Vec<Vec<S>>>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, FrobError> {
        let dim = eta.len();
        let labels =
            labels.unwrap_or_else(|| (0..dim).map(|i| format!("e{i}")).collect());
        let data = FrobeniusData { dim, labels, mu, eta, eps, delta };
        data.validate_shape()?;
        Ok(data)
    }

    pub fn validate_shape(&self) -> Result<(), FrobError> {
        let n = self.dim;
        let shape3 = |t: &Vec<Vec<Vec<S>>>, what: &str| -> Result<(), FrobError> {
            if t.len() != n || t.iter().any(|p| p.len() != n || p.iter().any(|q| q.len() != n)) {
                return Err(FrobError::DimensionMismatch(format!(
                    "{what} must be a {n}×{n}×{n} tensor"
                )));
            }
            Ok(())
        };
        shape3(&self.mu, "mu")?;
        if let Some(d) = &self.delta {
            shape3(d, "delta")?;
        }
        if self.eta.len() != n || self.eps.len() != n || self.labels.len() != n {
            return Err(FrobError::DimensionMismatch(format!(
                "eta, eps and labels must have length {n}"
            )));
        }
        Ok(())
    }

    /// The invariant pairing g_{ij} = ε(e_i e_j).
    pub fn pairing(&self) -> Vec<Vec<S>> {
        let n = self.dim;
        let mut g = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    acc = acc + self.mu[i][j][k].clone() * self.eps[k].clone();
                }
                g[i][j] = acc;
            }
        }
        g
    }

    /// Inverse pairing, or `DegeneratePairing`.
    pub fn pairing_inverse(&self) -> Result<Vec<Vec<S>>, FrobError> {
        invert_matrix(&self.pairing()).ok_or(FrobError::DegeneratePairing)
    }

    /// The canonical comultiplication Δ(e_i) = Σ_{a,b} g^{ab} (e_i e_a) ⊗ e_b.
    pub fn derived_delta(&self) -> Result<Vec<Vec<Vec<S>>>, FrobError> {
        let n = self.dim;
        let ginv = self.pairing_inverse()?;
        let mut d = zeros3::<S>(n);
        for i in 0..n {
            for c in 0..n {
                for b in 0..n {
                    let mut acc = S::zero();
                    for a in 0..n {
                        acc = acc + self.mu[i][a][c].clone() * ginv[a][b].clone();
                    }
                    d[i][c][b] = acc;
                }
            }
        }
        Ok(d)
    }

    /// The comultiplication actually in force: provided or derived.
    pub fn effective_delta(&self) -> Result<Vec<Vec<Vec<S>>>, FrobError> {
        match &self.delta {
            Some(d) => Ok(d.clone()),
            None => self.derived_delta(),
        }
    }

    /// Same algebra with the two multiplication arguments swapped.
    pub fn opposite(&self) -> FrobeniusData<S> {
        let n = self.dim;
        let mut mu = zeros3::<S>(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    mu[i][j][k] = self.mu[j][i][k].clone();
                }
            }
        }
        let delta = self.delta.as_ref().map(|d| {
            let mut dd = zeros3::<S>(n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        dd[i][j][k] = d[i][k][j].clone();
                    }
                }
            }
            dd
        });
        FrobeniusData {
            dim: n,
            labels: self.labels.clone(),
            mu,
            eta: self.eta.clone(),
            eps: self.eps.clone(),
            delta,
        }
    }

    /// Counit rescaled by λ; Δ is dropped so it re-derives from the new ε.
    pub fn rescale_eps(&self, lambda: &S) -> FrobeniusData<S> {
        let mut out = self.clone();
        out.eps = out.eps.into_iter().map(|x| x * lambda.clone()).collect();
        out.delta = None;
        out
    }
}

/// Block direct sum of two algebras.
pub fn direct_sum<S: Scalar>(
    a: &FrobeniusData<S>,
    b: &FrobeniusData<S>,
) -> Result<FrobeniusData<S>, FrobError> {
    let n = a.dim + b.dim;
    let mut mu = zeros3::<S>(n);
    for i in 0..a.dim {
        for j in 0..a.dim {
            for k in 0..a.dim {
                mu[i][j][k] = a.mu[i][j][k].clone();
            }
        }
    }
    for i in 0..b.dim {
        for j in 0..b.dim {
            for k in 0..b.dim {
                mu[a.dim + i][a.dim + j][a.dim + k] = b.mu[i][j][k].clone();
            }
        }
    }
    let eta = a.eta.iter().chain(&b.eta).cloned().collect();
    let eps = a.eps.iter().chain(&b.eps).cloned().collect();
    let labels = a
        .labels
        .iter()
        .map(|l| format!("a.{l}"))
        .chain(b.labels.iter().map(|l| format!("b.{l}")))
        .collect();
    FrobeniusData::new(mu, eta, eps, None, Some(labels))
}

/// Gauss–Jordan inverse; `None` when singular. In float mode pivots are
/// chosen by magnitude and near-zero pivots count as singular.
pub fn invert_matrix<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| {
                a[x][col].abs_f64().partial_cmp(&a[y][col].abs_f64()).unwrap()
            })?;
        if a[pivot][col].abs_f64() < 1e-250 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let iv = a[col][col].recip().ok()?;
        for c in 0..n {
            a[col][c] = a[col][c].clone() * iv.clone();
            inv[col][c] = inv[col][c].clone() * iv.clone();
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    a[r][c] = a[r][c].clone() - f.clone() * a[col][c].clone();
                    inv[r][c] = inv[r][c].clone() - f.clone() * inv[col][c].clone();
                }
            }
        }
    }
    Some(inv)
}

/// Evaluate every axiom of a Δ-separable symmetric Frobenius algebra and
/// report residuals. Required axioms: associativity, unit, coassociativity,
/// counit, Frobenius compatibility, and (when Δ was given) agreement with
/// the derived Δ. Symmetry and Δ-separability are reported but optional —
/// they single out the algebras whose 2D state sum is move-invariant.
pub fn check_frobenius_axioms<S: Scalar>(
    a: &FrobeniusData<S>,
    tol: f64,
) -> Result<CheckReport, FrobError> {
    a.validate_shape()?;
    let n = a.dim;
    let delta = a.effective_delta()?;
    let mut report = CheckReport::default();
    let close = |x: &S, y: &S| x.approx_eq(y, tol);

    // associativity: (e_i e_j) e_k = e_i (e_j e_k)
    {
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut lhs = S::zero();
                        let mut rhs = S::zero();
                        for t in 0..n {
                            lhs = lhs + a.mu[i][j][t].clone() * a.mu[t][k][m].clone();
                            rhs = rhs + a.mu[j][k][t].clone() * a.mu[i][t][m].clone();
                        }
                        if !close(&lhs, &rhs) && witness.is_none() {
                            witness = Some(format!("(i,j,k,m)=({i},{j},{k},{m})"));
                        }
                        worst = worst.max((lhs - rhs).abs_f64());
                    }
                }
            }
        }
        report.push("associativity", witness.is_none(), worst, true, witness);
    }

    // unit: η e_j = e_j = e_j η
    {
        let mut worst = 0.0f64;
        let mut witness = None;
        for j in 0..n {
            for k in 0..n {
                let mut left = S::zero();
                let mut right = S::zero();
                for i in 0..n {
                    left = left + a.eta[i].clone() * a.mu[i][j][k].clone();
                    right = right + a.eta[i].clone() * a.mu[j][i][k].clone();
                }
                let target = if j == k { S::one() } else { S::zero() };
                for (side, v) in [("left", &left), ("right", &right)] {
                    if !close(v, &target) && witness.is_none() {
                        witness = Some(format!("{side} unit at (j,k)=({j},{k})"));
                    }
                    worst = worst.max((v.clone() - target.clone()).abs_f64());
                }
            }
        }
        report.push("unit", witness.is_none(), worst, true, witness);
    }

    // coassociativity: (Δ⊗id)Δ = (id⊗Δ)Δ
    {
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let mut lhs = S::zero();
                        let mut rhs = S::zero();
                        for t in 0..n {
                            lhs = lhs + delta[i][t][z].clone() * delta[t][x][y].clone();
                            rhs = rhs + delta[i][x][t].clone() * delta[t][y][z].clone();
                        }
                        if !close(&lhs, &rhs) && witness.is_none() {
                            witness = Some(format!("(i,x,y,z)=({i},{x},{y},{z})"));
                        }
                        worst = worst.max((lhs - rhs).abs_f64());
                    }
                }
            }
        }
        report.push("coassociativity", witness.is_none(), worst, true, witness);
    }

    // counit: (ε⊗id)Δ = id = (id⊗ε)Δ
    {
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for x in 0..n {
                let mut left = S::zero();
                let mut right = S::zero();
                for t in 0..n {
                    left = left + delta[i][t][x].clone() * a.eps[t].clone();
                    right = right + delta[i][x][t].clone() * a.eps[t].clone();
                }
                let target = if i == x { S::one() } else { S::zero() };
                for (side, v) in [("left", &left), ("right", &right)] {
                    if !close(v, &target) && witness.is_none() {
                        witness = Some(format!("{side} counit at (i,x)=({i},{x})"));
                    }
                    worst = worst.max((v.clone() - target.clone()).abs_f64());
                }
            }
        }
        report.push("counit", witness.is_none(), worst, true, witness);
    }

    // Frobenius compatibility: Δ∘μ = (μ⊗id)(id⊗Δ) = (id⊗μ)(Δ⊗id)
    {
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for j in 0..n {
                for x in 0..n {
                    for y in 0..n {
                        let mut mid = S::zero();
                        let mut lhs = S::zero();
                        let mut rhs = S::zero();
                        for t in 0..n {
                            mid = mid + a.mu[i][j][t].clone() * delta[t][x][y].clone();
                            lhs = lhs + delta[j][t][y].clone() * a.mu[i][t][x].clone();
                            rhs = rhs + delta[i][x][t].clone() * a.mu[t][j][y].clone();
                        }
                        for (side, v) in [("(μ⊗id)(id⊗Δ)", &lhs), ("(id⊗μ)(Δ⊗id)", &rhs)] {
                            if !close(v, &mid) && witness.is_none() {
                                witness =
                                    Some(format!("{side} at (i,j,x,y)=({i},{j},{x},{y})"));
                            }
                            worst = worst.max((v.clone() - mid.clone()).abs_f64());
                        }
                    }
                }
            }
        }
        report.push("frobenius", witness.is_none(), worst, true, witness);
    }

    // symmetric: ε(e_i e_j) = ε(e_j e_i)
    {
        let g = a.pairing();
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for j in 0..n {
                if !close(&g[i][j], &g[j][i]) && witness.is_none() {
                    witness = Some(format!("(i,j)=({i},{j})"));
                }
                worst = worst.max((g[i][j].clone() - g[j][i].clone()).abs_f64());
            }
        }
        report.push("symmetric", witness.is_none(), worst, false, witness);
    }

    // Δ-separability: μ∘Δ = id
    {
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for k in 0..n {
                let mut v = S::zero();
                for x in 0..n {
                    for y in 0..n {
                        v = v + delta[i][x][y].clone() * a.mu[x][y][k].clone();
                    }
                }
                let target = if i == k { S::one() } else { S::zero() };
                if !close(&v, &target) && witness.is_none() {
                    witness = Some(format!("μ∘Δ(e_{i}) has e_{k} coefficient {v}"));
                }
                worst = worst.max((v - target).abs_f64());
            }
        }
        report.push("delta_separable", witness.is_none(), worst, false, witness);
    }

    // If Δ was supplied, it must agree with the derived one.
    if a.delta.is_some() {
        let derived = a.derived_delta()?;
        let mut worst = 0.0f64;
        let mut witness = None;
        for i in 0..n {
            for x in 0..n {
                for y in 0..n {
                    if !close(&delta[i][x][y], &derived[i][x][y]) && witness.is_none() {
                        witness = Some(format!("(i,x,y)=({i},{x},{y})"));
                    }
                    worst = worst
                        .max((delta[i][x][y].clone() - derived[i][x][y].clone()).abs_f64());
                }
            }
        }
        report.push("delta_matches_derived", witness.is_none(), worst, true, witness);
    }

    Ok(report)
}

/// Multiplication tables of the built-in groups; entries are element
/// indices, index 0 is the identity.
pub fn named_group_table(name: &str) -> Result<Vec<Vec<usize>>, FrobError> {
    match name {
        "z2" | "z3" | "z4" | "z5" => {
            let n = name[1..].parse::<usize>().unwrap();
            Ok((0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect())
        }
        "s3" => {
            // Elements: e, r, r², s, sr, sr² with r³ = s² = e, rs = sr².
            // Encode g = (t, k) ↦ index 3t + k, meaning sᵗ rᵏ.
            let idx = |t: usize, k: usize| 3 * t + k;
            let mut table = vec![vec![0usize; 6]; 6];
            for t1 in 0..2 {
                for k1 in 0..3 {
                    for t2 in 0..2 {
                        for k2 in 0..3 {
                            // sᵗ¹ rᵏ¹ · sᵗ² rᵏ² = sᵗ¹⁺ᵗ² r^(±k1+k2)
                            let k = if t2 == 1 { (3 - k1) % 3 + k2 } else { k1 + k2 };
                            table[idx(t1, k1)][idx(t2, k2)] =
                                idx((t1 + t2) % 2, k % 3);
                        }
                    }
                }
            }
            Ok(table)
        }
        _ => Err(FrobError::NotAGroup(format!("unknown built-in group `{name}`"))),
    }
}

fn validate_group(table: &[Vec<usize>]) -> Result<usize, FrobError> {
    let n = table.len();
    if n == 0 {
        return Err(FrobError::NotAGroup("empty table".into()));
    }
    for row in table {
        if row.len() != n || row.iter().any(|&x| x >= n) {
            return Err(FrobError::NotAGroup("table is not square over valid indices".into()));
        }
    }
    // Latin square.
    for i in 0..n {
        let mut row: Vec<usize> = table[i].clone();
        let mut col: Vec<usize> = (0..n).map(|j| table[j][i]).collect();
        row.sort_unstable();
        col.sort_unstable();
        if row != (0..n).collect::<Vec<_>>() || col != (0..n).collect::<Vec<_>>() {
            return Err(FrobError::NotAGroup(format!(
                "row or column {i} is not a permutation"
            )));
        }
    }
    // Two-sided identity.
    let e = (0..n)
        .find(|&e| (0..n).all(|j| table[e][j] == j && table[j][e] == j))
        .ok_or_else(|| FrobError::NotAGroup("no identity element".into()))?;
    // Associativity.
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if table[table[i][j]][k] != table[i][table[j][k]] {
                    return Err(FrobError::NotAGroup(format!(
                        "associativity fails at ({i},{j},{k})"
                    )));
                }
            }
        }
    }
    Ok(e)
}

/// The group algebra k[G] from a multiplication table, with the
/// separable normalization ε(g) = |G|·δ_{g,e}, so that the derived Δ
/// satisfies μ∘Δ = id. The scalar type selects the field mode.
pub fn group_algebra<S: Scalar>(table: &[Vec<usize>]) -> Result<FrobeniusData<S>, FrobError> {
    let e = validate_group(table)?;
    let n = table.len();
    // Guards the (unreachable over ℚ and ℂ) modular case where |G| = 0.
    S::from_int(n as i64)
        .recip()
        .map_err(|_| FrobError::BadCharacteristic(format!("|G| = {n}")))?;
    let mut mu = zeros3::<S>(n);
    for (i, row) in table.iter().enumerate() {
        for (j, &k) in row.iter().enumerate() {
            mu[i][j][k] = S::one();
        }
    }
    let mut eta = vec![S::zero(); n];
    eta[e] = S::one();
    let mut eps = vec![S::zero(); n];
    eps[e] = S::from_int(n as i64);
    let labels = (0..n).map(|i| format!("g{i}")).collect();
    FrobeniusData::new(mu, eta, eps, None, Some(labels))
}

/// The n×n matrix algebra with ε = n·tr — the separable normalization.
pub fn matrix_algebra<S: Scalar>(n: usize) -> Result<FrobeniusData<S>, FrobError> {
    let d = n * n;
    let id = |i: usize, j: usize| i * n + j;
    let mut mu = zeros3::<S>(d);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if j == k {
                        mu[id(i, j)][id(k, l)][id(i, l)] = S::one();
                    }
                }
            }
        }
    }
    let mut eta = vec![S::zero(); d];
    let mut eps = vec![S::zero(); d];
    for i in 0..n {
        eta[id(i, i)] = S::one();
        eps[id(i, i)] = S::from_int(n as i64);
    }
    let labels = (0..n)
        .flat_map(|i| (0..n).map(move |j| format!("e{i}{j}")))
        .collect();
    FrobeniusData::new(mu, eta, eps, None, Some(labels))
}
