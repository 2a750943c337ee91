//! Multiplicity-free fusion data: labels, admissible triples, associator
//! matrices, quantum dimensions and a global weight. This is the algebraic
//! input of the three-dimensional state sum, and the home of the
//! ten-constraint checker that certifies a datum as a valid orbifold input
//! (delegating the geometric evaluations to [`crate::statesum3d`]).
//!
//! Conventions, fixed once and used everywhere:
//!
//! * `n` holds the admissible triples `(a, b, c)` with fusion multiplicity
//!   one; every other triple has multiplicity zero. Triples are read as
//!   "`c` appears in `a ⊗ b`".
//! * An associator key `(a, b, c, d, e, f)` is admissible when all four of
//!   `(a, b, e)`, `(e, c, d)`, `(b, c, f)`, `(a, f, d)` are admissible:
//!   `e` is the intermediate channel of `(a ⊗ b) ⊗ c → d` and `f` the
//!   intermediate channel of `a ⊗ (b ⊗ c) → d`.
//! * `f[key]` is the associator matrix entry `[F^{abc}_d]_{e f}`.
//! * `fbar[key]` is the entry `[(F^{abc}_d)^{-1}]_{f e}` — the inverse
//!   matrix read at the *transposed* position, so that the two maps are
//!   consumed at identical key order by the tetrahedron weights. The
//!   defining relations are, per block `(a, b, c, d)`:
//!   `Σ_f f[(…, e, f)] · fbar[(…, e', f)] = δ_{e e'}` and
//!   `Σ_e fbar[(…, e, f)] · f[(…, e, f')] = δ_{f f'}`.

use crate::frob::CheckReport;
use crate::scalar::{product, sum, Scalar, ScalarError};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Errors produced while building or checking fusion data.
#[derive(Debug, Error)]
pub enum FusionError {
    /// Structural defect: shapes, stray associator keys, a singular
    /// associator block, or failed well-formedness checks.
    #[error("invalid fusion data: {0}")]
    InvalidFusionData(String),
    /// No built-in category with this name.
    #[error("unknown category name: {0}")]
    UnknownName(String),
    /// A builder was called with out-of-range parameters.
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Associator key `(a, b, c, d, e, f)`; see the module documentation.
pub type FKey = (usize, usize, usize, usize, usize, usize);

/// One named constraint with its worst residual and, when it failed, the
/// label assignment that witnessed the failure.
#[derive(Clone, Debug)]
pub struct ConstraintItem {
    pub name: String,
    pub passed: bool,
    /// Largest absolute deviation encountered; exactly 0.0 for a clean
    /// pass in exact arithmetic.
    pub residual: f64,
    /// Human-readable worst-case witness (labels of the offending
    /// configuration), present when `passed` is false.
    pub witness: Option<String>,
}

/// Outcome of a constraint family: one item per constraint, all evaluated
/// (no early exit), so a report always shows the full picture.
#[derive(Clone, Debug, Default)]
pub struct ConstraintReport {
    pub items: Vec<ConstraintItem>,
}

impl ConstraintReport {
    pub fn push(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        residual: f64,
        witness: Option<String>,
    ) {
        self.items.push(ConstraintItem {
            name: name.into(),
            passed,
            residual,
            witness,
        });
    }

    /// True when every constraint passed.
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.items.iter().map(|i| i.residual).fold(0.0, f64::max)
    }

    pub fn item(&self, name: &str) -> Option<&ConstraintItem> {
        self.items.iter().find(|i| i.name == name)
    }

    /// Names of the failing constraints, in report order.
    pub fn failures(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter(|i| !i.passed)
            .map(|i| i.name.as_str())
            .collect()
    }
}

/// Multiplicity-free fusion data over the scalar `S`.
#[derive(Clone, Debug)]
pub struct FusionData<S: Scalar> {
    /// Display names, one per label; the index into this list is the label.
    pub labels: Vec<String>,
    /// Index of the tensor unit.
    pub unit: usize,
    /// Dual label per label; an involution fixing nothing in particular.
    pub dual: Vec<usize>,
    /// Admissible triples `(a, b, c)`.
    pub n: BTreeSet<(usize, usize, usize)>,
    /// Associator entries on admissible keys; absent means zero.
    pub f: BTreeMap<FKey, S>,
    /// Inverse associator entries, stored transposed (module docs).
    pub fbar: BTreeMap<FKey, S>,
    /// Quantum dimension per label.
    pub d: Vec<S>,
    /// Global weight (for the built-ins this equals `Σ_a d_a²`, but it is
    /// carried as independent data and checked, not assumed).
    pub phi: S,
}

impl<S: Scalar> FusionData<S> {
    /// Number of labels.
    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// Fusion multiplicity of `(a, b, c)` as a bool.
    pub fn n0(&self, a: usize, b: usize, c: usize) -> bool {
        self.n.contains(&(a, b, c))
    }

    /// Whether an associator key is admissible (all four triangles fuse).
    pub fn admissible_key(&self, k: FKey) -> bool {
        let (a, b, c, d, e, f) = k;
        self.n0(a, b, e) && self.n0(e, c, d) && self.n0(b, c, f) && self.n0(a, f, d)
    }

    /// Associator entry, zero when absent.
    pub fn f_get(&self, k: FKey) -> S {
        self.f.get(&k).cloned().unwrap_or_else(S::zero)
    }

    /// Inverse-associator entry, zero when absent.
    pub fn fbar_get(&self, k: FKey) -> S {
        self.fbar.get(&k).cloned().unwrap_or_else(S::zero)
    }

    /// Label index by display name.
    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// The admissible `e`-channels and `f`-channels of the block
    /// `(a, b, c, d)`.
    pub fn block_channels(&self, a: usize, b: usize, c: usize, d: usize) -> (Vec<usize>, Vec<usize>) {
        let es = (0..self.rank())
            .filter(|&e| self.n0(a, b, e) && self.n0(e, c, d))
            .collect();
        let fs = (0..self.rank())
            .filter(|&f| self.n0(b, c, f) && self.n0(a, f, d))
            .collect();
        (es, fs)
    }

    /// Σ_a d_a², the canonical global weight of the built-ins.
    pub fn total_dim(&self) -> S {
        sum(self.d.iter().map(|x| x.clone() * x.clone()))
    }

    /// Build fusion data from everything except `fbar`, deriving `fbar`
    /// by inverting each associator block. Fails when a block is not
    /// square, is singular, or when `f` carries entries at inadmissible
    /// keys.
    pub fn with_derived_fbar(
        labels: Vec<String>,
        unit: usize,
        dual: Vec<usize>,
        n: BTreeSet<(usize, usize, usize)>,
        f: BTreeMap<FKey, S>,
        d: Vec<S>,
        phi: S,
    ) -> Result<Self, FusionError> {
        let mut data = FusionData {
            labels,
            unit,
            dual,
            n,
            f,
            fbar: BTreeMap::new(),
            d,
            phi,
        };
        data.check_shapes()?;
        for (&k, _) in &data.f {
            if !data.admissible_key(k) {
                return Err(FusionError::InvalidFusionData(format!(
                    "associator entry at inadmissible key {k:?}"
                )));
            }
        }
        let rank = data.rank();
        let mut fbar = BTreeMap::new();
        for a in 0..rank {
            for b in 0..rank {
                for c in 0..rank {
                    for dd in 0..rank {
                        let (es, fs) = data.block_channels(a, b, c, dd);
                        if es.is_empty() && fs.is_empty() {
                            continue;
                        }
                        if es.len() != fs.len() {
                            return Err(FusionError::InvalidFusionData(format!(
                                "block ({a},{b},{c},{dd}) has {} rows but {} columns",
                                es.len(),
                                fs.len()
                            )));
                        }
                        let m: Vec<Vec<S>> = es
                            .iter()
                            .map(|&e| fs.iter().map(|&ff| data.f_get((a, b, c, dd, e, ff))).collect())
                            .collect();
                        let inv = crate::frob::invert_matrix(&m).ok_or_else(|| {
                            FusionError::InvalidFusionData(format!(
                                "associator block ({a},{b},{c},{dd}) is singular"
                            ))
                        })?;
                        // inv[fi][ei] = [M^{-1}]_{f e}; stored at key (…, e, f).
                        for (fi, &ff) in fs.iter().enumerate() {
                            for (ei, &e) in es.iter().enumerate() {
                                let v = inv[fi][ei].clone();
                                if !v.is_zero() {
                                    fbar.insert((a, b, c, dd, e, ff), v);
                                }
                            }
                        }
                    }
                }
            }
        }
        data.fbar = fbar;
        Ok(data)
    }

    fn check_shapes(&self) -> Result<(), FusionError> {
        let rank = self.rank();
        if rank == 0 {
            return Err(FusionError::InvalidFusionData("no labels".into()));
        }
        if self.labels.iter().collect::<BTreeSet<_>>().len() != rank {
            return Err(FusionError::InvalidFusionData("duplicate label names".into()));
        }
        if self.unit >= rank {
            return Err(FusionError::InvalidFusionData(format!(
                "unit index {} out of range",
                self.unit
            )));
        }
        if self.dual.len() != rank || self.d.len() != rank {
            return Err(FusionError::InvalidFusionData(
                "dual/dimension vectors must have one entry per label".into(),
            ));
        }
        if let Some(&x) = self.dual.iter().find(|&&x| x >= rank) {
            return Err(FusionError::InvalidFusionData(format!(
                "dual index {x} out of range"
            )));
        }
        if let Some(t) = self
            .n
            .iter()
            .find(|(a, b, c)| *a >= rank || *b >= rank || *c >= rank)
        {
            return Err(FusionError::InvalidFusionData(format!(
                "admissible triple {t:?} out of range"
            )));
        }
        Ok(())
    }
}

/// Well-formedness of fusion data, reported item by item. Required items:
/// shapes, unit rules, dual pairing rule, involutivity of the dual,
/// fusion associativity, admissible associator support, blockwise
/// two-sided inverses, invertible dimensions and weight. Everything is
/// checked; nothing exits early.
pub fn validate_fusion_data<S: Scalar>(c: &FusionData<S>, tol: f64) -> CheckReport {
    let mut report = CheckReport::default();
    let rank = c.rank();

    let shapes_ok = c.check_shapes().is_ok();
    report.push("shapes", shapes_ok, if shapes_ok { 0.0 } else { 1.0 }, true, c.check_shapes().err().map(|e| e.to_string()));
    if !shapes_ok {
        // Everything below indexes by label; stop at the structural defect.
        return report;
    }

    // Unit rules: 1 ⊗ a = a = a ⊗ 1, in multiplicity language.
    let mut unit_res = 0.0f64;
    let mut unit_wit = None;
    for a in 0..rank {
        for b in 0..rank {
            let want = usize::from(a == b) as f64;
            let left = c.n0(c.unit, a, b) as usize as f64;
            let right = c.n0(a, c.unit, b) as usize as f64;
            for (side, got) in [("1⊗a", left), ("a⊗1", right)] {
                let r = (got - want).abs();
                if r > unit_res {
                    unit_res = r;
                    unit_wit = Some(format!(
                        "{side} at a={}, b={}",
                        c.labels[a], c.labels[b]
                    ));
                }
            }
        }
    }
    report.push("unit_rule", unit_res == 0.0, unit_res, true, if unit_res == 0.0 { None } else { unit_wit });

    // Dual pairing: the unit appears in a ⊗ b exactly when b = a*.
    let mut dual_res = 0.0f64;
    let mut dual_wit = None;
    for a in 0..rank {
        for b in 0..rank {
            let want = usize::from(b == c.dual[a]) as f64;
            let got = c.n0(a, b, c.unit) as usize as f64;
            let r = (got - want).abs();
            if r > dual_res {
                dual_res = r;
                dual_wit = Some(format!("a={}, b={}", c.labels[a], c.labels[b]));
            }
        }
        if c.dual[c.dual[a]] != a {
            dual_res = dual_res.max(1.0);
            dual_wit = Some(format!("dual not involutive at {}", c.labels[a]));
        }
    }
    report.push("dual_pairing", dual_res == 0.0, dual_res, true, if dual_res == 0.0 { None } else { dual_wit });

    // Fusion associativity: Σ_e N(a,b,e) N(e,c,d) = Σ_f N(b,c,f) N(a,f,d).
    let mut assoc_res = 0.0f64;
    let mut assoc_wit = None;
    for a in 0..rank {
        for b in 0..rank {
            for cc in 0..rank {
                for dd in 0..rank {
                    let (es, fs) = c.block_channels(a, b, cc, dd);
                    let r = (es.len() as f64 - fs.len() as f64).abs();
                    if r > assoc_res {
                        assoc_res = r;
                        assoc_wit = Some(format!(
                            "({},{},{}) → {}: {} left channels vs {} right",
                            c.labels[a],
                            c.labels[b],
                            c.labels[cc],
                            c.labels[dd],
                            es.len(),
                            fs.len()
                        ));
                    }
                }
            }
        }
    }
    report.push("fusion_associative", assoc_res == 0.0, assoc_res, true, if assoc_res == 0.0 { None } else { assoc_wit });

    // Associator entries may live on admissible keys only.
    let stray_f = c.f.keys().find(|&&k| !c.admissible_key(k));
    let stray_fbar = c.fbar.keys().find(|&&k| !c.admissible_key(k));
    let stray = stray_f.or(stray_fbar);
    report.push("associator_support", stray.is_none(), if stray.is_none() { 0.0 } else { 1.0 }, true, stray.map(|k| format!("entry at inadmissible key {k:?}")));

    // Blockwise two-sided inverse: F·F̄ = 1 and F̄·F = 1 on every block.
    let mut inv_res = 0.0f64;
    let mut inv_wit = None;
    for a in 0..rank {
        for b in 0..rank {
            for cc in 0..rank {
                for dd in 0..rank {
                    let (es, fs) = c.block_channels(a, b, cc, dd);
                    if es.is_empty() || es.len() != fs.len() {
                        continue; // associativity item already reports this
                    }
                    for (i, &e1) in es.iter().enumerate() {
                        for (j, &e2) in es.iter().enumerate() {
                            let s = sum(fs.iter().map(|&ff| {
                                c.f_get((a, b, cc, dd, e1, ff))
                                    * c.fbar_get((a, b, cc, dd, e2, ff))
                            }));
                            let want = if i == j { S::one() } else { S::zero() };
                            let r = (s.clone() - want).abs_f64();
                            if r > inv_res {
                                inv_res = r;
                                inv_wit = Some(format!(
                                    "F·F̄ block ({},{},{},{}) rows {},{}",
                                    c.labels[a], c.labels[b], c.labels[cc], c.labels[dd],
                                    c.labels[e1], c.labels[e2]
                                ));
                            }
                        }
                    }
                    for (i, &f1) in fs.iter().enumerate() {
                        for (j, &f2) in fs.iter().enumerate() {
                            let s = sum(es.iter().map(|&e| {
                                c.fbar_get((a, b, cc, dd, e, f1))
                                    * c.f_get((a, b, cc, dd, e, f2))
                            }));
                            let want = if i == j { S::one() } else { S::zero() };
                            let r = (s.clone() - want).abs_f64();
                            if r > inv_res {
                                inv_res = r;
                                inv_wit = Some(format!(
                                    "F̄·F block ({},{},{},{}) cols {},{}",
                                    c.labels[a], c.labels[b], c.labels[cc], c.labels[dd],
                                    c.labels[f1], c.labels[f2]
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    report.push("associator_invertible", inv_res <= tol, inv_res, true, if inv_res <= tol { None } else { inv_wit });

    // Dimensions and the global weight must be invertible, and the unit
    // must have dimension one.
    let mut dim_res = 0.0f64;
    let mut dim_wit = None;
    for (i, di) in c.d.iter().enumerate() {
        if di.is_zero() {
            dim_res = 1.0;
            dim_wit = Some(format!("d_{} = 0", c.labels[i]));
        }
    }
    let unit_dim_res = (c.d[c.unit].clone() - S::one()).abs_f64();
    if unit_dim_res > dim_res {
        dim_res = unit_dim_res;
        dim_wit = Some("unit dimension differs from 1".into());
    }
    if c.phi.is_zero() {
        dim_res = dim_res.max(1.0);
        dim_wit = Some("global weight is 0".into());
    }
    report.push("dims_invertible", dim_res <= tol, dim_res, true, if dim_res <= tol { None } else { dim_wit });

    // Informational: does the weight equal Σ d²? True for all built-ins,
    // but a datum is free to carry a different (invertible) weight; the
    // geometric constraints below are what actually arbitrate.
    let tot_res = (c.phi.clone() - c.total_dim()).abs_f64();
    report.push("weight_is_total_dim", tot_res <= tol, tot_res, false, None);

    report
}

/// Built-in fusion data by name.
///
/// * `"trivial"` — one label, everything 1.
/// * `"vec_zn"` — group-graded lines over ℤ/N (`param` = N ≥ 1): labels
///   are residues, all associators 1, all dimensions 1, weight N.
/// * `"fibonacci"` — two labels `1, tau` with `tau ⊗ tau = 1 ⊕ tau`,
///   golden-ratio dimension and the symmetric self-inverse associator on
///   the all-`tau` block. Requires the float scalar: the golden ratio is
///   irrational, so exact mode refuses it.
pub fn builtin_category<S: Scalar>(
    name: &str,
    param: Option<i64>,
) -> Result<FusionData<S>, FusionError> {
    match name {
        "trivial" => {
            if param.is_some() {
                return Err(FusionError::BadParams("trivial takes no parameter".into()));
            }
            vec_zn_category(1)
        }
        "vec_zn" => {
            let n = param.ok_or_else(|| {
                FusionError::BadParams("vec_zn needs the group order as parameter".into())
            })?;
            if !(1..=64).contains(&n) {
                return Err(FusionError::BadParams(format!(
                    "vec_zn order must be in 1..=64, got {n}"
                )));
            }
            vec_zn_category(n as usize)
        }
        "fibonacci" => {
            if param.is_some() {
                return Err(FusionError::BadParams("fibonacci takes no parameter".into()));
            }
            fibonacci_category()
        }
        other => Err(FusionError::UnknownName(other.to_string())),
    }
}

fn vec_zn_category<S: Scalar>(n: usize) -> Result<FusionData<S>, FusionError> {
    let labels = (0..n).map(|i| i.to_string()).collect();
    let dual = (0..n).map(|i| (n - i) % n).collect();
    let mut triples = BTreeSet::new();
    let mut f = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            triples.insert((a, b, (a + b) % n));
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                // One admissible key per (a, b, c): channels are forced.
                f.insert((a, b, c, (a + b + c) % n, (a + b) % n, (b + c) % n), S::one());
            }
        }
    }
    FusionData::with_derived_fbar(
        labels,
        0,
        dual,
        triples,
        f,
        vec![S::one(); n],
        S::from_int(n as i64),
    )
}

fn fibonacci_category<S: Scalar>() -> Result<FusionData<S>, FusionError> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let phi_label = S::from_f64(golden)?;
    let weight = S::from_f64(1.0 + golden * golden)?;
    let unit = 0usize;
    let tau = 1usize;
    let triples: BTreeSet<_> = [
        (unit, unit, unit),
        (unit, tau, tau),
        (tau, unit, tau),
        (tau, tau, unit),
        (tau, tau, tau),
    ]
    .into_iter()
    .collect();
    let mut f: BTreeMap<FKey, S> = BTreeMap::new();
    // Blocks with a unit among (a, b, c) are 1×1 with entry 1; channels
    // are forced by the fusion rules.
    for a in 0..2usize {
        for b in 0..2usize {
            for c in 0..2usize {
                for d in 0..2usize {
                    if a == tau && b == tau && c == tau && d == tau {
                        continue;
                    }
                    for e in 0..2usize {
                        for ff in 0..2usize {
                            let key = (a, b, c, d, e, ff);
                            let adm = triples.contains(&(a, b, e))
                                && triples.contains(&(e, c, d))
                                && triples.contains(&(b, c, ff))
                                && triples.contains(&(a, ff, d));
                            if adm {
                                f.insert(key, S::one());
                            }
                        }
                    }
                }
            }
        }
    }
    // The all-tau block over channels (e, f) ∈ {1, tau}²:
    // [[1/φ, 1/√φ], [1/√φ, −1/φ]], symmetric and self-inverse.
    let inv_phi = S::from_f64(1.0 / golden)?;
    let inv_sqrt_phi = S::from_f64(1.0 / golden.sqrt())?;
    f.insert((tau, tau, tau, tau, unit, unit), inv_phi.clone());
    f.insert((tau, tau, tau, tau, unit, tau), inv_sqrt_phi.clone());
    f.insert((tau, tau, tau, tau, tau, unit), inv_sqrt_phi);
    f.insert((tau, tau, tau, tau, tau, tau), -inv_phi);
    FusionData::with_derived_fbar(
        vec!["1".into(), "tau".into()],
        unit,
        vec![0, 1],
        triples,
        f,
        vec![S::one(), phi_label],
        weight,
    )
}

/// Full certification of a fusion datum as orbifold input: structural
/// well-formedness first (an [`FusionError::InvalidFusionData`] error if
/// that fails), then the ten defining constraints — one pentagon, six
/// lens constraints (one per tetrahedron edge slot) and three bubble
/// constraints (one per insertion height class) — each evaluated as an
/// equality of small ball evaluations over all boundary labelings.
pub fn check_special_orbifold_datum<S: Scalar>(
    c: &FusionData<S>,
    tol: f64,
) -> Result<ConstraintReport, FusionError> {
    let wf = validate_fusion_data(c, tol);
    if !wf.passed() {
        let names: Vec<_> = wf
            .items
            .iter()
            .filter(|i| i.required && !i.passed)
            .map(|i| i.name.clone())
            .collect();
        return Err(FusionError::InvalidFusionData(format!(
            "well-formedness failed: {}",
            names.join(", ")
        )));
    }
    crate::statesum3d::ten_constraints(c, tol)
        .map_err(|e| FusionError::InvalidFusionData(format!("constraint evaluation failed: {e}")))
}

/// dim(a ⊗ b) bookkeeping helper: Σ_c N(a,b,c) d_c, used by tests and by
/// the bubble constraint's closed form.
pub fn fused_dimension<S: Scalar>(c: &FusionData<S>, a: usize, b: usize) -> S {
    sum((0..c.rank()).filter(|&x| c.n0(a, b, x)).map(|x| c.d[x].clone()))
}

#[allow(dead_code)]
fn product_of_dims<S: Scalar>(c: &FusionData<S>, labels: &[usize]) -> S {
    product(labels.iter().map(|&l| c.d[l].clone()))
}
