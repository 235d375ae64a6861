//! The chord-tangent composition `p∘q` on plane cubics and cubic surfaces, the
//! induced symmetric quasigroups, the abelianness test `(t_p t_q t_r)^2 = 1` and
//! the group law `pq := u∘(p∘q)`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cubic::{tangent_section, CubicError, CubicForm, CubicSurface, CurveTag, PlaneCubicCurve};
use crate::field::{Field, FieldElem};
use crate::linalg;
use crate::projective::{line_through, ProjectiveError, ProjectiveLine, ProjectivePoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChordError {
    #[error("point {0} is singular")]
    SingularInput(ProjectivePoint),
    #[error("point {0} is not on the curve")]
    NotOnCurve(ProjectivePoint),
    #[error("composition of elements {0} and {1} is not a unique point")]
    PartialLaw(usize, usize),
    #[error("element {0} is not in the carrier")]
    NotInCarrier(usize),
    #[error("law is not abelian: (t_p t_q t_r)^2 moves {3} for (p,q,r) = ({0},{1},{2})")]
    NotAbelian(usize, usize, usize, usize),
    #[error("group axiom {0} fails")]
    GroupAxiom(String),
    #[error(transparent)]
    Cubic(#[from] CubicError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// Result of composing two points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CollinearOutcome {
    /// The third point, with the intersection cycle as (point, multiplicity).
    Unique {
        point: ProjectivePoint,
        cycle: Vec<(ProjectivePoint, usize)>,
    },
    /// The joining line lies in the cubic.
    LineInSurface(ProjectiveLine),
    /// `p = q` on a surface: the tangent plane section through `p`.
    TangentSection(Box<PlaneCubicCurve>),
    Undefined(String),
}

impl CollinearOutcome {
    pub fn point(&self) -> Option<&ProjectivePoint> {
        match self {
            CollinearOutcome::Unique { point, .. } => Some(point),
            _ => None,
        }
    }
}

fn cycle_of(p: &ProjectivePoint, q: &ProjectivePoint, r: &ProjectivePoint) -> Vec<(ProjectivePoint, usize)> {
    let mut m: BTreeMap<ProjectivePoint, usize> = BTreeMap::new();
    for x in [p, q, r] {
        *m.entry(x.clone()).or_default() += 1;
    }
    m.into_iter().collect()
}

/// Third intersection of the line through two points of `F = 0` (the tangent
/// line when they coincide), given the gradients at both points.
///
/// Uses `F(λa + μb) = λ²μ ∇F(a)·b + λμ² ∇F(b)·a` for points `a, b` on `F = 0`.
fn third_point(
    f: &CubicForm,
    p: &ProjectivePoint,
    gp: &[FieldElem],
    q: &ProjectivePoint,
    gq: &[FieldElem],
) -> Result<CollinearOutcome, ChordError> {
    let field = f.field();
    if p != q {
        let c2 = linalg::dot(gp, q.coords());
        let c1 = linalg::dot(gq, p.coords());
        if c1.is_zero() && c2.is_zero() {
            return Ok(CollinearOutcome::LineInSurface(line_through(p, q)?));
        }
        let r = ProjectivePoint::new(p.combine(&c1, q, &-&c2))?;
        return Ok(CollinearOutcome::Unique {
            cycle: cycle_of(p, q, &r),
            point: r,
        });
    }
    if p.dim() == 4 {
        return Ok(CollinearOutcome::Undefined(format!("tangent direction at {p} is not unique")));
    }
    // tangent line: a second point d with ∇F(p)·d = 0
    let k = linalg::kernel(&[gp.to_vec()], p.dim(), field);
    let d = k
        .into_iter()
        .filter_map(|v| ProjectivePoint::new(v).ok())
        .find(|d| d != p)
        .expect("tangent line has a second point");
    let c1 = linalg::dot(&f.gradient(&d)?, p.coords());
    let c0 = f.evaluate(&d)?;
    if c1.is_zero() && c0.is_zero() {
        return Ok(CollinearOutcome::LineInSurface(line_through(p, &d)?));
    }
    let r = ProjectivePoint::new(p.combine(&c0, &d, &-&c1))?;
    Ok(CollinearOutcome::Unique {
        cycle: cycle_of(p, p, &r),
        point: r,
    })
}

fn smooth_gradient(f: &CubicForm, p: &ProjectivePoint, on_error: fn(ProjectivePoint) -> ChordError) -> Result<Vec<FieldElem>, ChordError> {
    if !f.evaluate(p)?.is_zero() {
        return Err(on_error(p.clone()));
    }
    let g = f.gradient(p)?;
    if g.iter().all(FieldElem::is_zero) {
        return Err(ChordError::SingularInput(p.clone()));
    }
    Ok(g)
}

/// `p∘q` on a plane cubic: the residual point of the line `pq` (tangent if `p = q`).
pub fn third_point_on_curve(c: &PlaneCubicCurve, p: &ProjectivePoint, q: &ProjectivePoint) -> Result<CollinearOutcome, ChordError> {
    let f = c.form();
    let gp = smooth_gradient(f, p, ChordError::NotOnCurve)?;
    let gq = smooth_gradient(f, q, ChordError::NotOnCurve)?;
    third_point(f, p, &gp, q, &gq)
}

/// `p∘q` on a cubic surface.
pub fn compose_on_surface(v: &CubicSurface, p: &ProjectivePoint, q: &ProjectivePoint) -> Result<CollinearOutcome, ChordError> {
    let f = v.form();
    let gp = v.tangent_plane(p).map(|_| f.gradient(p))??;
    if p == q {
        return Ok(CollinearOutcome::TangentSection(Box::new(tangent_section(v, p)?)));
    }
    let gq = v.tangent_plane(q).map(|_| f.gradient(q))??;
    third_point(f, p, &gp, q, &gq)
}

/// A finite symmetric quasigroup given by its composition table.
#[derive(Debug, Clone)]
pub struct QuasigroupView {
    n: usize,
    table: Vec<Option<u32>>,
    points: Option<Vec<ProjectivePoint>>,
    index: HashMap<ProjectivePoint, usize>,
    curve_tag: Option<(CurveTag, Field)>,
    pub origin: Option<usize>,
}

impl QuasigroupView {
    /// Builds a view from an explicit table (`None` marks a non-unique composition).
    pub fn from_table(n: usize, table: Vec<Option<u32>>) -> Self {
        assert_eq!(table.len(), n * n);
        Self {
            n,
            table,
            points: None,
            index: HashMap::new(),
            curve_tag: None,
            origin: None,
        }
    }

    /// Smooth rational points of a plane cubic over F_p with the chord-tangent law.
    pub fn from_curve(c: &PlaneCubicCurve) -> Result<Self, ChordError> {
        let pts = c.smooth_points();
        let f = c.form();
        let grads: Vec<Vec<FieldElem>> = pts.iter().map(|p| f.gradient(p)).collect::<Result<_, _>>()?;
        let index: HashMap<ProjectivePoint, usize> = pts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let n = pts.len();
        let mut table = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let out = third_point(f, &pts[i], &grads[i], &pts[j], &grads[j])?;
                let r = out.point().and_then(|r| index.get(r)).map(|&r| r as u32);
                table[i * n + j] = r;
                table[j * n + i] = r;
            }
        }
        let tag = crate::cubic::classify_curve(c).ok().map(|t| (t.tag, c.field()));
        Ok(Self {
            n,
            table,
            points: Some(pts),
            index,
            curve_tag: tag,
            origin: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn points(&self) -> Option<&[ProjectivePoint]> {
        self.points.as_deref()
    }

    pub fn index_of(&self, p: &ProjectivePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn compose(&self, i: usize, j: usize) -> Option<usize> {
        self.table[i * self.n + j].map(|r| r as usize)
    }

    pub fn is_total(&self) -> bool {
        self.table.iter().all(Option::is_some)
    }

    /// Checks `p∘q = q∘p` and `p∘(p∘q) = q`; returns the first failing pair.
    pub fn check_laws(&self) -> Result<(), (usize, usize)> {
        for i in 0..self.n {
            for j in 0..self.n {
                let Some(r) = self.compose(i, j) else {
                    return Err((i, j));
                };
                if self.compose(j, i) != Some(r) || self.compose(i, r) != Some(j) {
                    return Err((i, j));
                }
            }
        }
        Ok(())
    }

    fn total_table(&self) -> Result<Vec<u32>, ChordError> {
        self.table
            .iter()
            .enumerate()
            .map(|(k, r)| r.ok_or(ChordError::PartialLaw(k / self.n, k % self.n)))
            .collect()
    }
}

/// The permutation `t_p: q ↦ p∘q`.
pub fn translation_involution(s: &QuasigroupView, p: usize) -> Result<Vec<usize>, ChordError> {
    if p >= s.n {
        return Err(ChordError::NotInCarrier(p));
    }
    (0..s.n).map(|q| s.compose(p, q).ok_or(ChordError::PartialLaw(p, q))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianReport {
    pub carrier_size: usize,
    pub exhaustive: bool,
    pub triples_checked: u64,
    pub seed: Option<u64>,
    /// First `(p, q, r, x)` with `(t_p t_q t_r)^2 x ≠ x`.
    pub violation: Option<(usize, usize, usize, usize)>,
}

impl AbelianReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Triple budget below which the abelianness check is always exhaustive.
pub const EXHAUSTIVE_TRIPLES: u64 = 10_000;
/// Seed of the sampled abelianness check.
pub const ABELIAN_SEED: u64 = 0x5eed_abe1;

/// Verifies `(t_p t_q t_r)^2 = id`, i.e. `t_p t_q t_r = t_r t_q t_p`, on all
/// points for every (or a seeded sample of) triple.
pub fn check_abelian(s: &QuasigroupView, exhaustive: bool) -> Result<AbelianReport, ChordError> {
    let n = s.n;
    let t = s.total_table()?;
    let total = (n as u64).pow(3);
    let full = exhaustive || total <= EXHAUSTIVE_TRIPLES;
    let check = |p: usize, q: usize, r: usize| -> Option<usize> {
        let (tp, tq, tr) = (&t[p * n..(p + 1) * n], &t[q * n..(q + 1) * n], &t[r * n..(r + 1) * n]);
        (0..n).find(|&x| {
            let a = tp[tq[tr[x] as usize] as usize];
            let b = tr[tq[tp[x] as usize] as usize];
            a != b
        })
    };
    let mut report = AbelianReport {
        carrier_size: n,
        exhaustive: full,
        triples_checked: 0,
        seed: None,
        violation: None,
    };
    if full {
        // the identity is symmetric in p and r
        for p in 0..n {
            for q in 0..n {
                for r in p..n {
                    report.triples_checked += 1;
                    if let Some(x) = check(p, q, r) {
                        report.violation = Some((p, q, r, x));
                        return Ok(report);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(ABELIAN_SEED);
        report.seed = Some(ABELIAN_SEED);
        for _ in 0..EXHAUSTIVE_TRIPLES {
            let (p, q, r) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            report.triples_checked += 1;
            if let Some(x) = check(p, q, r) {
                report.violation = Some((p, q, r, x));
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GroupStructure {
    CyclicOfOrder(usize),
    IsomorphicKstar,
    IsomorphicKplus,
    NonsplitTorus,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupAnalysis {
    pub order: usize,
    pub structure: GroupStructure,
    pub origin: usize,
    pub identity: usize,
    pub exponent: usize,
    /// Element order → number of elements of that order.
    pub order_counts: BTreeMap<usize, usize>,
    pub generator_witness: Option<usize>,
}

impl GroupAnalysis {
    pub fn to_json(&self, s: &QuasigroupView) -> serde_json::Value {
        let label = |i: usize| -> serde_json::Value {
            match s.points() {
                Some(p) => p[i].to_string().into(),
                None => i.into(),
            }
        };
        serde_json::json!({
            "order": self.order,
            "structure": self.structure,
            "exponent": self.exponent,
            "order_counts": self.order_counts,
            "witnesses": {
                "origin": label(self.origin),
                "identity": label(self.identity),
                "generator": self.generator_witness.map(label),
            }
        })
    }
}

/// Multiplication table of `pq := u∘(p∘q)`.
pub fn group_table(s: &QuasigroupView, u: usize) -> Result<Vec<u32>, ChordError> {
    let n = s.n;
    let t = s.total_table()?;
    Ok((0..n * n).map(|k| t[u * n + t[k] as usize]).collect())
}

/// Builds `pq := u∘(p∘q)`, verifies the abelian group axioms exhaustively and
/// determines the isomorphism type.
pub fn group_law(s: &QuasigroupView, u: usize) -> Result<GroupAnalysis, ChordError> {
    let n = s.n;
    if u >= n {
        return Err(ChordError::NotInCarrier(u));
    }
    let ab = check_abelian(s, true)?;
    if let Some((p, q, r, x)) = ab.violation {
        return Err(ChordError::NotAbelian(p, q, r, x));
    }
    let m = group_table(s, u)?;
    let mul = |a: usize, b: usize| m[a * n + b] as usize;
    let identity = (0..n)
        .find(|&e| (0..n).all(|p| mul(e, p) == p))
        .ok_or_else(|| ChordError::GroupAxiom("identity".into()))?;
    for a in 0..n {
        if !(0..n).any(|b| mul(a, b) == identity) {
            return Err(ChordError::GroupAxiom(format!("inverse of {a}")));
        }
        for b in 0..n {
            if mul(a, b) != mul(b, a) {
                return Err(ChordError::GroupAxiom(format!("commutativity at ({a},{b})")));
            }
            let ab = mul(a, b);
            for c in 0..n {
                if mul(ab, c) != mul(a, mul(b, c)) {
                    return Err(ChordError::GroupAxiom(format!("associativity at ({a},{b},{c})")));
                }
            }
        }
    }
    let orders: Vec<usize> = (0..n)
        .map(|a| {
            let mut x = a;
            let mut k = 1;
            while x != identity {
                x = mul(x, a);
                k += 1;
            }
            k
        })
        .collect();
    let mut order_counts = BTreeMap::new();
    for &o in &orders {
        *order_counts.entry(o).or_insert(0) += 1;
    }
    let exponent = orders.iter().fold(1usize, |acc, &o| num_integer::lcm(acc, o));
    let generator_witness = orders.iter().position(|&o| o == n);
    let cyclic = generator_witness.is_some();
    let structure = match s.curve_tag {
        Some((CurveTag::Multiplicative, Field::Prime(p))) if cyclic && n == p as usize - 1 => GroupStructure::IsomorphicKstar,
        Some((CurveTag::Additive, Field::Prime(p))) if n == p as usize && exponent == p as usize => GroupStructure::IsomorphicKplus,
        Some((CurveTag::TwistedMultiplicative, Field::Prime(p))) if cyclic && n == p as usize + 1 => GroupStructure::NonsplitTorus,
        _ if cyclic => GroupStructure::CyclicOfOrder(n),
        _ => GroupStructure::Other,
    };
    Ok(GroupAnalysis {
        order: n,
        structure,
        origin: u,
        identity,
        exponent,
        order_counts,
        generator_witness,
    })
}

/// A random totally symmetric quasigroup (`p∘q = q∘p`, `p∘(p∘q) = q`) on `n`
/// elements, found by randomized backtracking; `None` if none exists.
pub fn random_symmetric_quasigroup(n: usize, seed: u64) -> Option<QuasigroupView> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = vec![None; n * n];
    fn set(t: &mut [Option<u32>], n: usize, a: usize, b: usize, c: usize) -> bool {
        // assigns a∘b = c with all its forced consequences
        let forced = [(a, b, c), (b, a, c), (a, c, b), (c, a, b), (b, c, a), (c, b, a)];
        for &(x, y, z) in &forced {
            if let Some(v) = t[x * n + y] {
                if v as usize != z {
                    return false;
                }
            }
        }
        for &(x, y, z) in &forced {
            t[x * n + y] = Some(z as u32);
        }
        true
    }
    fn solve(t: &mut Vec<Option<u32>>, n: usize, rng: &mut ChaCha8Rng, budget: &mut u64) -> bool {
        let Some(k) = t.iter().position(Option::is_none) else {
            return true;
        };
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let (a, b) = (k / n, k % n);
        let mut cand: Vec<usize> = (0..n).collect();
        cand.shuffle(rng);
        for c in cand {
            let saved = t.clone();
            if set(t, n, a, b, c) && solve(t, n, rng, budget) {
                return true;
            }
            *t = saved;
        }
        false
    }
    let mut budget = 1_000_000;
    solve(&mut table, n, &mut rng, &mut budget).then(|| QuasigroupView::from_table(n, table))
}
