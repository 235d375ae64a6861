//! Field reconstruction from (M, A, μ) data, geometric (C_m, C_a)
//! configurations on a cubic surface, curve-equation recovery, and the
//! tetrahedral reconstruction of a surface from four plane sections.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::chord_tangent::{group_table, ChordError, QuasigroupView};
use crate::cubic::{classify_curve, monomial_name, restrict_to_plane, CubicError, CubicForm, CubicSurface, CurveTag, PlaneCubicCurve};
use crate::field::FieldElem;
use crate::linalg;
use crate::poly::{cubic_monomials, Poly};
use crate::projective::{line_through, ProjectiveError, ProjectiveLine, ProjectivePlane, ProjectivePoint};

pub const MU_FORMAT: &str = "mu-config/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cardinality mismatch: |M| + 2 = {m} but |A| + 1 = {a}")]
    CardinalityMismatch { m: usize, a: usize },
    #[error("nu is not well defined: {0}")]
    NotWellDefined(String),
    #[error("nu is not bijective: {0} and {1} have the same image")]
    NotBijective(String, String),
    #[error("field axiom {axiom} fails at {witness:?}")]
    AxiomFailure { axiom: String, witness: Vec<String> },
    #[error("point {point} has type {actual}, expected {expected}")]
    WrongType {
        point: ProjectivePoint,
        actual: CurveTag,
        expected: CurveTag,
    },
    #[error("points {0} and {1} lie on a common line of the surface")]
    CommonLine(ProjectivePoint, ProjectivePoint),
    #[error("constraint (C) violated: {0}")]
    ConstraintCViolated(String),
    #[error("intersection is not rational: {0}")]
    IrrationalIntersection(String),
    #[error("cycle mismatch: {0}")]
    CycleMismatch(String),
    #[error("graph G is disconnected")]
    DisconnectedGraph,
    #[error("incompatible scalars on edge ({0},{1}) at monomial {2}")]
    IncompatibleScalars(usize, usize, String),
    #[error(transparent)]
    Cubic(#[from] CubicError),
    #[error(transparent)]
    Chord(#[from] ChordError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// A finite group given by its Cayley table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<u32>,
    identity: usize,
    inverse: Vec<u32>,
}

impl FiniteGroup {
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n * n).map(|k| ((k / n + k % n) % n) as u32).collect();
        Self::from_flat(n, table).expect("cyclic group")
    }

    pub fn from_flat(n: usize, table: Vec<u32>) -> Result<Self, ReconError> {
        if table.len() != n * n || table.iter().any(|&x| x as usize >= n) {
            return Err(ReconError::InvalidConfig("group table has wrong shape".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e * n + x] as usize == x && table[x * n + e] as usize == x))
            .ok_or_else(|| ReconError::InvalidConfig("group has no identity".into()))?;
        let inverse = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a * n + b] as usize == identity)
                    .map(|b| b as u32)
                    .ok_or_else(|| ReconError::InvalidConfig(format!("element {a} has no inverse")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            n,
            table,
            identity,
            inverse,
        })
    }

    /// Direct product of cyclic groups; element index is mixed-radix.
    pub fn product_of_cyclic(orders: &[usize]) -> Self {
        let n: usize = orders.iter().product();
        let digits = |mut x: usize| -> Vec<usize> {
            orders
                .iter()
                .map(|&o| {
                    let d = x % o;
                    x /= o;
                    d
                })
                .collect()
        };
        let undigits = |d: &[usize]| -> usize { d.iter().zip(orders).rev().fold(0, |acc, (&x, &o)| acc * o + x) };
        let table = (0..n * n)
            .map(|k| {
                let (a, b) = (digits(k / n), digits(k % n));
                let s: Vec<usize> = a.iter().zip(&b).zip(orders).map(|((x, y), o)| (x + y) % o).collect();
                undigits(&s) as u32
            })
            .collect();
        Self::from_flat(n, table).expect("product group")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.n.max(1)).map(<[u32]>::to_vec).collect()
    }
}

/// Abstract (M, A, μ) data. Elements of the extended M are `0..|M|` (proper),
/// `|M|` (0_m) and `|M|+1` (∞_m); elements of the extended A are `0..|A|`
/// (proper) and `|A|` (∞_a). The identity of M is 1_m, that of A is 0_a.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuConfiguration {
    pub m: FiniteGroup,
    pub a: FiniteGroup,
    pub mu: Vec<usize>,
    pub m_labels: Option<Vec<String>>,
    pub a_labels: Option<Vec<String>>,
}

impl MuConfiguration {
    pub fn new(m: FiniteGroup, a: FiniteGroup, mu: Vec<usize>) -> Result<Self, ReconError> {
        let cfg = Self {
            m,
            a,
            mu,
            m_labels: None,
            a_labels: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn zero_m(&self) -> usize {
        self.m.len()
    }

    pub fn inf_m(&self) -> usize {
        self.m.len() + 1
    }

    pub fn inf_a(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<(), ReconError> {
        let (mn, an) = (self.m.len(), self.a.len());
        if mn + 2 != an + 1 {
            return Err(ReconError::CardinalityMismatch { m: mn + 2, a: an + 1 });
        }
        if self.mu.len() != mn + 2 || self.mu.iter().any(|&x| x > an) {
            return Err(ReconError::InvalidConfig("mu must map every element of M ∪ {0_m, ∞_m}".into()));
        }
        let mut seen = vec![false; an + 1];
        for &y in &self.mu {
            if std::mem::replace(&mut seen[y], true) {
                return Err(ReconError::InvalidConfig("mu is not a bijection".into()));
            }
        }
        for (name, x) in [("1_m", self.m.identity()), ("0_m", self.zero_m()), ("∞_m", self.inf_m())] {
            if self.mu[x] == self.inf_a() {
                return Err(ReconError::InvalidConfig(format!("mu maps {name} to ∞_a")));
            }
        }
        Ok(())
    }

    fn mu_inv(&self) -> Vec<usize> {
        let mut inv = vec![0; self.mu.len()];
        for (x, &y) in self.mu.iter().enumerate() {
            inv[y] = x;
        }
        inv
    }

    pub fn m_label(&self, x: usize) -> String {
        match x {
            x if x == self.zero_m() => "0_m".into(),
            x if x == self.inf_m() => "inf_m".into(),
            x => self.m_labels.as_ref().map_or_else(|| x.to_string(), |l| l[x].clone()),
        }
    }

    pub fn a_label(&self, y: usize) -> String {
        if y == self.inf_a() {
            return "inf_a".into();
        }
        self.a_labels.as_ref().map_or_else(|| y.to_string(), |l| l[y].clone())
    }

    /// JSON file format: groups as `{"cyclic": n}` or `{"table": [[..]]}`,
    /// μ as a list of `[m, a]` pairs with the improper labels `"0_m"`,
    /// `"inf_m"`, `"inf_a"`.
    pub fn to_json(&self) -> Value {
        let group = |g: &FiniteGroup| json!({ "table": g.rows() });
        let mu: Vec<Value> = self
            .mu
            .iter()
            .enumerate()
            .map(|(x, &y)| {
                let mx = if x >= self.m.len() { Value::from(self.m_label(x)) } else { Value::from(x) };
                let ay = if y == self.inf_a() { Value::from("inf_a") } else { Value::from(y) };
                json!([mx, ay])
            })
            .collect();
        let mut v = json!({ "format": MU_FORMAT, "M": group(&self.m), "A": group(&self.a), "mu": mu });
        if let Some(l) = &self.m_labels {
            v["M"]["labels"] = json!(l);
        }
        if let Some(l) = &self.a_labels {
            v["A"]["labels"] = json!(l);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, ReconError> {
        let bad = |m: &str| ReconError::InvalidConfig(m.to_string());
        let group = |g: &Value| -> Result<FiniteGroup, ReconError> {
            if let Some(n) = g.get("cyclic").and_then(Value::as_u64) {
                return Ok(FiniteGroup::cyclic(n as usize));
            }
            if let Some(orders) = g.get("product").and_then(Value::as_array) {
                let o: Vec<usize> = orders.iter().filter_map(Value::as_u64).map(|x| x as usize).collect();
                return Ok(FiniteGroup::product_of_cyclic(&o));
            }
            let rows = g.get("table").and_then(Value::as_array).ok_or_else(|| bad("group needs cyclic, product or table"))?;
            let n = rows.len();
            let mut flat = Vec::with_capacity(n * n);
            for r in rows {
                let r = r.as_array().ok_or_else(|| bad("table rows must be arrays"))?;
                if r.len() != n {
                    return Err(bad("table must be square"));
                }
                for x in r {
                    flat.push(x.as_u64().ok_or_else(|| bad("table entries must be integers"))? as u32);
                }
            }
            FiniteGroup::from_flat(n, flat)
        };
        let labels = |g: &Value| -> Option<Vec<String>> {
            g.get("labels")?.as_array().map(|l| l.iter().map(|x| x.as_str().unwrap_or_default().to_string()).collect())
        };
        let mv = v.get("M").ok_or_else(|| bad("missing M"))?;
        let av = v.get("A").ok_or_else(|| bad("missing A"))?;
        let m = group(mv)?;
        let a = group(av)?;
        let (mn, an) = (m.len(), a.len());
        if mn + 2 != an + 1 {
            return Err(ReconError::CardinalityMismatch { m: mn + 2, a: an + 1 });
        }
        let mut mu = vec![usize::MAX; mn + 2];
        for pair in v.get("mu").and_then(Value::as_array).ok_or_else(|| bad("missing mu"))? {
            let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("mu entries are pairs"))?;
            let x = match &p[0] {
                Value::String(s) if s == "0_m" => mn,
                Value::String(s) if s == "inf_m" => mn + 1,
                Value::Number(k) => k.as_u64().filter(|&k| (k as usize) < mn).ok_or_else(|| bad("M index out of range"))? as usize,
                _ => return Err(bad("bad M label")),
            };
            let y = match &p[1] {
                Value::String(s) if s == "inf_a" => an,
                Value::Number(k) => k.as_u64().filter(|&k| (k as usize) < an).ok_or_else(|| bad("A index out of range"))? as usize,
                _ => return Err(bad("bad A label")),
            };
            mu[x] = y;
        }
        if mu.contains(&usize::MAX) {
            return Err(bad("mu is not total"));
        }
        let mut cfg = Self::new(m, a, mu)?;
        cfg.m_labels = labels(mv);
        cfg.a_labels = labels(av);
        Ok(cfg)
    }
}

/// The map ν on M ∪ {0_m, ∞_m} with its bijectivity verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuMap {
    pub nu: Vec<usize>,
    pub bijective: bool,
}

/// Evaluates ν in the form
/// `ν(x) = Φ(x) − Φ(0_m)`, `Φ(x) = μ(μ⁻¹(μ(x) − μ(∞_m)) · m)`,
/// `m = μ⁻¹(∞_a) · i(μ⁻¹(0_a))`, with `0_m·m = 0_m`, `∞_m·m = ∞_m`, `q ± ∞_a = ∞_a`.
pub fn nu_map(cfg: &MuConfiguration) -> Result<NuMap, ReconError> {
    cfg.validate()?;
    let (mn, inf_a) = (cfg.m.len(), cfg.inf_a());
    let mu_inv = cfg.mu_inv();
    let pre0 = mu_inv[cfg.a.identity()];
    let pre_inf = mu_inv[inf_a];
    if pre0 >= mn || pre_inf >= mn {
        return Err(ReconError::NotWellDefined(
            "μ⁻¹(0_a) and μ⁻¹(∞_a) must be proper elements of M".into(),
        ));
    }
    let m = cfg.m.op(pre_inf, cfg.m.inv(pre0));
    let sub = |u: usize, v: usize| -> usize {
        if u == inf_a || v == inf_a {
            inf_a
        } else {
            cfg.a.op(u, cfg.a.inv(v))
        }
    };
    let mul_m = |x: usize| -> usize { if x >= mn { x } else { cfg.m.op(x, m) } };
    let phi = |x: usize| -> usize { cfg.mu[mul_m(mu_inv[sub(cfg.mu[x], cfg.mu[cfg.inf_m()])])] };
    let c = phi(cfg.zero_m());
    if c == inf_a {
        return Err(ReconError::NotWellDefined("Φ(0_m) = ∞_a".into()));
    }
    let nu: Vec<usize> = (0..mn + 2).map(|x| sub(phi(x), c)).collect();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (x, &y) in nu.iter().enumerate() {
        if let Some(&x0) = seen.get(&y) {
            return Err(ReconError::NotBijective(cfg.m_label(x0), cfg.m_label(x)));
        }
        seen.insert(y, x);
    }
    Ok(NuMap { nu, bijective: true })
}

/// Field order up to which axioms are checked on all triples.
pub const EXHAUSTIVE_FIELD_ORDER: usize = 256;
pub const FIELD_SAMPLE_SEED: u64 = 0xf1e1d;
const FIELD_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReconstructedField {
    pub order: usize,
    pub zero: usize,
    pub one: usize,
    pub add: Vec<u32>,
    pub mul: Vec<u32>,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    /// For prime order: the residue of each element under the unique ring isomorphism.
    pub iso_witness: Option<Vec<u64>>,
}

impl ReconstructedField {
    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.order + y] as usize
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.order + y] as usize
    }

    pub fn to_json(&self, cfg: &MuConfiguration) -> Value {
        json!({
            "order": self.order,
            "zero": cfg.a_label(self.zero),
            "one": cfg.a_label(self.one),
            "exhaustive": self.exhaustive,
            "seed": self.seed,
            "labels": (0..self.order).map(|y| cfg.a_label(y)).collect::<Vec<_>>(),
            "add": self.add.chunks(self.order).collect::<Vec<_>>(),
            "mul": self.mul.chunks(self.order).collect::<Vec<_>>(),
            "iso_to_prime_field": self.iso_witness,
        })
    }
}

/// Transports the multiplication of M onto A through ν and verifies the field axioms.
pub fn reconstruct_field(cfg: &MuConfiguration) -> Result<ReconstructedField, ReconError> {
    let nu = nu_map(cfg)?.nu;
    let n = cfg.a.len();
    let mn = cfg.m.len();
    let mut nu_inv = vec![0usize; n + 1];
    for (x, &y) in nu.iter().enumerate() {
        nu_inv[y] = x;
    }
    let zero = nu[cfg.zero_m()];
    let one = nu[cfg.m.identity()];
    if zero != cfg.a.identity() || nu[cfg.inf_m()] != cfg.inf_a() {
        return Err(ReconError::NotWellDefined("ν does not fix 0 and ∞".into()));
    }
    let ext_mul = |x: usize, y: usize| -> Option<usize> {
        match (x >= mn, y >= mn) {
            (false, false) => Some(cfg.m.op(x, y)),
            _ if x == cfg.inf_m() || y == cfg.inf_m() => None,
            _ => Some(cfg.zero_m()),
        }
    };
    let mut mul = vec![0u32; n * n];
    for x in 0..n {
        for y in 0..n {
            let prod = ext_mul(nu_inv[x], nu_inv[y]).ok_or_else(|| ReconError::NotWellDefined("product with ∞_m".into()))?;
            let v = nu[prod];
            if v == cfg.inf_a() {
                return Err(ReconError::NotWellDefined("product maps to ∞_a".into()));
            }
            mul[x * n + y] = v as u32;
        }
    }
    let add: Vec<u32> = (0..n * n).map(|k| cfg.a.op(k / n, k % n) as u32).collect();
    let mut field = ReconstructedField {
        order: n,
        zero,
        one,
        add,
        mul,
        exhaustive: n <= EXHAUSTIVE_FIELD_ORDER,
        seed: None,
        iso_witness: None,
    };
    let fail = |axiom: &str, w: &[usize]| ReconError::AxiomFailure {
        axiom: axiom.to_string(),
        witness: w.iter().map(|&x| cfg.a_label(x)).collect(),
    };
    // pairwise axioms
    for x in 0..n {
        if field.mul(x, one) != x {
            return Err(fail("multiplicative identity", &[x]));
        }
        if field.mul(x, zero) != zero {
            return Err(fail("absorbing zero", &[x]));
        }
        if x != zero && !(0..n).any(|y| field.mul(x, y) == one) {
            return Err(fail("multiplicative inverse", &[x]));
        }
        for y in 0..n {
            if field.add(x, y) != field.add(y, x) {
                return Err(fail("additive commutativity", &[x, y]));
            }
            if field.mul(x, y) != field.mul(y, x) {
                return Err(fail("multiplicative commutativity", &[x, y]));
            }
        }
    }
    let triple = |x: usize, y: usize, z: usize| -> Result<(), ReconError> {
        if field.add(field.add(x, y), z) != field.add(x, field.add(y, z)) {
            return Err(fail("additive associativity", &[x, y, z]));
        }
        if field.mul(field.mul(x, y), z) != field.mul(x, field.mul(y, z)) {
            return Err(fail("multiplicative associativity", &[x, y, z]));
        }
        if field.mul(x, field.add(y, z)) != field.add(field.mul(x, y), field.mul(x, z)) {
            return Err(fail("distributivity", &[x, y, z]));
        }
        Ok(())
    };
    if field.exhaustive {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    triple(x, y, z)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(FIELD_SAMPLE_SEED);
        for _ in 0..FIELD_SAMPLES {
            triple(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
        }
        field.seed = Some(FIELD_SAMPLE_SEED);
    }
    if crate::field::is_prime(n as u64) {
        // k·1 ↦ k
        let mut w = vec![0u64; n];
        let mut x = zero;
        for k in 0..n as u64 {
            w[x] = k;
            x = field.add(x, one);
        }
        for x in 0..n {
            for y in 0..n {
                if w[field.mul(x, y)] != w[x] * w[y] % n as u64 {
                    return Err(fail("isomorphism to the prime field", &[x, y]));
                }
            }
        }
        field.iso_witness = Some(w);
    }
    Ok(field)
}

/// Two tangent plane sections of a surface forming a (C_m, C_a) configuration.
#[derive(Debug, Clone)]
pub struct CmCaConfiguration {
    pub p_m: ProjectivePoint,
    pub p_a: ProjectivePoint,
    pub plane_m: ProjectivePlane,
    pub plane_a: ProjectivePlane,
    pub c_m: PlaneCubicCurve,
    pub c_a: PlaneCubicCurve,
    pub l: ProjectiveLine,
    pub zero_m: ProjectivePoint,
    pub inf_m: ProjectivePoint,
    pub zero_a: ProjectivePoint,
    pub inf_a: ProjectivePoint,
    pub one_m: ProjectivePoint,
    /// Base points on C_m and C_a (ambient coordinates) giving 1_m and 0_a.
    pub u_m: ProjectivePoint,
    pub u_a: ProjectivePoint,
}

impl CmCaConfiguration {
    pub fn marked_json(&self) -> Value {
        json!({
            "p_m": self.p_m.to_string(), "p_a": self.p_a.to_string(),
            "P_m": self.plane_m.to_string(), "P_a": self.plane_a.to_string(),
            "0_m": self.zero_m.to_string(), "inf_m": self.inf_m.to_string(),
            "0_a": self.zero_a.to_string(), "inf_a": self.inf_a.to_string(),
            "1_m": self.one_m.to_string(),
            "u_m": self.u_m.to_string(), "u_a": self.u_a.to_string(),
        })
    }
}

/// Projection from `center` of `x` onto the plane `target`.
fn project(center: &ProjectivePoint, x: &ProjectivePoint, target: &ProjectivePlane) -> Option<ProjectivePoint> {
    line_through(center, x).ok()?.meet(target.coeffs())
}

fn ambient_smooth_points(c: &PlaneCubicCurve) -> Vec<ProjectivePoint> {
    let mut pts: Vec<ProjectivePoint> = c.smooth_points().iter().map(|u| c.to_ambient(u)).collect();
    pts.sort();
    pts
}

/// Builds the configuration with the default base points: the smallest smooth
/// rational points of C_a and C_m keeping 0_m, ∞_m, 0_a, ∞_a, 1_m distinct.
pub fn build_cm_ca(v: &CubicSurface, p_m: &ProjectivePoint, p_a: &ProjectivePoint) -> Result<CmCaConfiguration, ReconError> {
    build_cm_ca_with(v, p_m, p_a, None, None)
}

/// As [`build_cm_ca`], with explicit base points `u_m` on C_m and `u_a` on C_a.
pub fn build_cm_ca_with(
    v: &CubicSurface,
    p_m: &ProjectivePoint,
    p_a: &ProjectivePoint,
    u_m: Option<&ProjectivePoint>,
    u_a: Option<&ProjectivePoint>,
) -> Result<CmCaConfiguration, ReconError> {
    let plane_m = v.tangent_plane(p_m)?;
    let plane_a = v.tangent_plane(p_a)?;
    if p_m == p_a {
        return Err(ReconError::InvalidConfig("p_m = p_a".into()));
    }
    if v.line_in_surface(&line_through(p_m, p_a)?) {
        return Err(ReconError::CommonLine(p_m.clone(), p_a.clone()));
    }
    if plane_a.contains(p_m) || plane_m.contains(p_a) {
        return Err(ReconError::InvalidConfig("p_m must lie off P_a and p_a off P_m".into()));
    }
    let c_m = restrict_to_plane(v.form(), &plane_m, &plane_m.basis())?;
    let c_a = restrict_to_plane(v.form(), &plane_a, &plane_a.basis())?;
    let t_m = classify_curve(&c_m)?;
    if t_m.tag != CurveTag::Multiplicative {
        return Err(ReconError::WrongType {
            point: p_m.clone(),
            actual: t_m.tag,
            expected: CurveTag::Multiplicative,
        });
    }
    let t_a = classify_curve(&c_a)?;
    if t_a.tag != CurveTag::Additive {
        return Err(ReconError::WrongType {
            point: p_a.clone(),
            actual: t_a.tag,
            expected: CurveTag::Additive,
        });
    }
    let l = plane_m.intersect(&plane_a).ok_or_else(|| ReconError::InvalidConfig("P_m = P_a".into()))?;
    let on_l = |dir: &ProjectivePoint, center: &ProjectivePoint, curve: &PlaneCubicCurve, other: &ProjectivePlane| {
        project(center, &curve.to_ambient(dir), other)
            .ok_or_else(|| ReconError::InvalidConfig("tangent line lies in the other plane".into()))
    };
    let zero_m = on_l(&t_m.tangent_dirs[0], p_m, &c_m, &plane_a)?;
    let inf_m = on_l(&t_m.tangent_dirs[1], p_m, &c_m, &plane_a)?;
    let inf_a = on_l(&t_a.tangent_dirs[0], p_a, &c_a, &plane_m)?;
    if inf_a == zero_m || inf_a == inf_m {
        return Err(ReconError::ConstraintCViolated(format!("∞_a = {inf_a} collides with a node tangent")));
    }
    let beta = |x: &ProjectivePoint| project(p_a, x, &plane_m);
    let alpha = |x: &ProjectivePoint| project(p_m, x, &plane_a);
    let pick = |given: Option<&ProjectivePoint>, curve: &PlaneCubicCurve, f: &dyn Fn(&ProjectivePoint) -> Option<ProjectivePoint>, avoid: &[&ProjectivePoint]| -> Result<(ProjectivePoint, ProjectivePoint), ReconError> {
        let ok = |u: &ProjectivePoint| -> Option<ProjectivePoint> {
            let uu = curve.from_ambient(u)?;
            if !curve.is_smooth_point(&uu) {
                return None;
            }
            f(u).filter(|img| !avoid.contains(&img))
        };
        match given {
            Some(u) => ok(u).map(|img| (u.clone(), img)).ok_or_else(|| {
                ReconError::ConstraintCViolated(format!("base point {u} is not a smooth point with a distinct image"))
            }),
            None => {
                if !curve.field().is_finite() {
                    return Err(ReconError::InvalidConfig("base points must be given over Q".into()));
                }
                ambient_smooth_points(curve)
                    .into_iter()
                    .find_map(|u| ok(&u).map(|img| (u, img)))
                    .ok_or_else(|| ReconError::ConstraintCViolated("no admissible base point".into()))
            }
        }
    };
    let (u_a, zero_a) = pick(u_a, &c_a, &beta, &[&zero_m, &inf_m, &inf_a])?;
    let (u_m, one_m) = pick(u_m, &c_m, &alpha, &[&zero_m, &inf_m, &inf_a, &zero_a])?;
    Ok(CmCaConfiguration {
        p_m: p_m.clone(),
        p_a: p_a.clone(),
        plane_m,
        plane_a,
        c_m,
        c_a,
        l,
        zero_m,
        inf_m,
        zero_a,
        inf_a,
        one_m,
        u_m,
        u_a,
    })
}

/// Smooth rational points of `v` whose tangent section has type `tag`.
pub fn points_of_type(v: &CubicSurface, tag: CurveTag) -> Vec<ProjectivePoint> {
    v.rational_points()
        .into_iter()
        .filter(|p| v.is_smooth_point(p))
        .filter(|p| {
            crate::cubic::tangent_section(v, p)
                .ok()
                .and_then(|c| classify_curve(&c).ok())
                .is_some_and(|t| t.tag == tag)
        })
        .collect()
}

/// The first (C_m, C_a) configuration in canonical point order, over a finite field.
pub fn find_cm_ca(v: &CubicSurface) -> Option<CmCaConfiguration> {
    let ms = points_of_type(v, CurveTag::Multiplicative);
    let as_ = points_of_type(v, CurveTag::Additive);
    ms.iter().find_map(|pm| as_.iter().find_map(|pa| build_cm_ca(v, pm, pa).ok()))
}

/// μ := β⁻¹∘α with M, A the groups of smooth points of C_m, C_a.
pub fn mu_from_geometry(cfg: &CmCaConfiguration) -> Result<MuConfiguration, ReconError> {
    if !cfg.c_m.field().is_finite() {
        return Err(ReconError::InvalidConfig("μ from geometry needs a finite field".into()));
    }
    let qm = QuasigroupView::from_curve(&cfg.c_m)?;
    let qa = QuasigroupView::from_curve(&cfg.c_a)?;
    let um = qm.index_of(&cfg.c_m.from_ambient(&cfg.u_m).expect("u_m on P_m")).expect("u_m smooth");
    let ua = qa.index_of(&cfg.c_a.from_ambient(&cfg.u_a).expect("u_a on P_a")).expect("u_a smooth");
    let m = FiniteGroup::from_flat(qm.len(), group_table(&qm, um)?)?;
    let a = FiniteGroup::from_flat(qa.len(), group_table(&qa, ua)?)?;
    let m_pts: Vec<ProjectivePoint> = qm.points().unwrap().iter().map(|u| cfg.c_m.to_ambient(u)).collect();
    let a_pts: Vec<ProjectivePoint> = qa.points().unwrap().iter().map(|u| cfg.c_a.to_ambient(u)).collect();
    // β⁻¹ on l
    let mut beta_inv: HashMap<ProjectivePoint, usize> = HashMap::new();
    for (j, x) in a_pts.iter().enumerate() {
        let img = project(&cfg.p_a, x, &cfg.plane_m).ok_or_else(|| ReconError::IrrationalIntersection(format!("β({x})")))?;
        if beta_inv.insert(img, j).is_some() {
            return Err(ReconError::InvalidConfig("β is not injective".into()));
        }
    }
    beta_inv.insert(cfg.inf_a.clone(), a.len());
    let lookup = |t: &ProjectivePoint| -> Result<usize, ReconError> {
        beta_inv.get(t).copied().ok_or_else(|| ReconError::IrrationalIntersection(format!("β⁻¹({t})")))
    };
    let mut mu = Vec::with_capacity(m.len() + 2);
    for x in &m_pts {
        let t = project(&cfg.p_m, x, &cfg.plane_a).ok_or_else(|| ReconError::IrrationalIntersection(format!("α({x})")))?;
        mu.push(lookup(&t)?);
    }
    mu.push(lookup(&cfg.zero_m)?);
    mu.push(lookup(&cfg.inf_m)?);
    let mut out = MuConfiguration::new(m, a, mu)?;
    out.m_labels = Some(m_pts.iter().map(ToString::to_string).collect());
    out.a_labels = Some(a_pts.iter().map(ToString::to_string).collect());
    Ok(out)
}

/// Intersection cycle of a plane section with the line `l` of its plane, as
/// (point, multiplicity); `None` if it is not supported on rational points.
pub fn intersection_cycle(c: &PlaneCubicCurve, l: &ProjectiveLine) -> Option<Vec<(ProjectivePoint, usize)>> {
    let (a, b) = l.points_spanning();
    let (ua, ub) = (c.from_ambient(a)?, c.from_ambient(b)?);
    let g = c.form().restrict_to_line(&ua, &ub); // λ^3, λ^2 μ, λ μ^2, μ^3
    if g.iter().all(FieldElem::is_zero) {
        return None;
    }
    let field = c.field();
    let mut out = Vec::new();
    // roots (λ:μ); μ = 0 root has multiplicity = number of leading zero coefficients
    let lead_zero = g.iter().take_while(|x| x.is_zero()).count();
    if lead_zero > 0 {
        out.push((a.clone(), lead_zero));
    }
    // t = λ/μ, combined in plane coordinates since `from_ambient` rescales
    let uni = crate::poly::UniPoly::new(field, g.iter().rev().cloned().collect());
    for (t, k) in uni.roots()? {
        let u = ProjectivePoint::new(ua.combine(&t, &ub, &field.one())).ok()?;
        out.push((c.to_ambient(&u), k));
    }
    (out.iter().map(|x| x.1).sum::<usize>() == 3).then(|| {
        out.sort();
        out
    })
}

/// Which curve of the configuration a normal form refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Multiplicative,
    Additive,
}

/// Coordinates (z1, z2) on l: `x = z1·B + z2·A` where `A`, `B` are the points
/// with `z1 = 0` and `z2 = 0`.
fn l_coords(x: &ProjectivePoint, a: &ProjectivePoint, b: &ProjectivePoint) -> Option<(FieldElem, FieldElem)> {
    let field = x.field();
    let rows: Vec<Vec<FieldElem>> = (0..4)
        .map(|i| vec![b.coords()[i].clone(), a.coords()[i].clone(), x.coords()[i].clone()])
        .collect();
    let k = linalg::kernel(&rows, 3, field);
    if k.len() != 1 || k[0][2].is_zero() {
        return None;
    }
    let s = -&k[0][2].try_inv().ok()?;
    Some((&k[0][0] * &s, &k[0][1] * &s))
}

fn frame(cfg: &CmCaConfiguration, which: Section) -> (&ProjectivePoint, &ProjectivePoint, &ProjectivePoint) {
    // (point with z1 = 0, point with z2 = 0, singular point)
    match which {
        Section::Multiplicative => (&cfg.zero_m, &cfg.inf_m, &cfg.p_m),
        Section::Additive => (&cfg.inf_a, &cfg.zero_a, &cfg.p_a),
    }
}

/// Recovers the normal forms `z1 z2 z3 + c(z1, z2)` of C_m and
/// `z1² z3 + c'(z1, z2)` of C_a from the intersection cycles with `l`. The
/// coordinates put the singular point at (0:0:1) and `l` at `z3 = 0`, with
/// 0_m = (0:1:0), ∞_m = (1:0:0) for C_m and 0_a = (1:0:0), ∞_a = (0:1:0) for C_a;
/// `c` is scaled so that its first nonzero coefficient is 1.
pub fn recover_curve_equations(
    cfg: &CmCaConfiguration,
    cycle_m: &[(ProjectivePoint, usize)],
    cycle_a: &[(ProjectivePoint, usize)],
) -> Result<(CubicForm, CubicForm), ReconError> {
    let field = cfg.p_m.field();
    let one = field.one();
    let build = |which: Section, cycle: &[(ProjectivePoint, usize)]| -> Result<CubicForm, ReconError> {
        if cycle.iter().map(|x| x.1).sum::<usize>() != 3 {
            return Err(ReconError::CycleMismatch("cycle must have degree 3".into()));
        }
        let (a, b, _) = frame(cfg, which);
        let mut c = Poly::constant(3, one.clone());
        for (x, k) in cycle {
            if !cfg.l.contains(x) {
                return Err(ReconError::CycleMismatch(format!("{x} is not on l")));
            }
            let (z1, z2) = l_coords(x, a, b).ok_or_else(|| ReconError::CycleMismatch(format!("{x} is not on l")))?;
            let lin = Poly::linear(&[z2, -&z1, field.zero()]);
            c = c.mul(&lin.pow(*k as u32));
        }
        // scale c so that its first nonzero coefficient is 1
        let first = cubic_monomials(3).into_iter().map(|e| c.coeff(&e)).find(|x| !x.is_zero()).expect("c is nonzero");
        let c = c.scale(&first.try_inv().expect("nonzero"));
        let lead = match which {
            Section::Multiplicative => vec![1, 1, 1],
            Section::Additive => vec![2, 0, 1],
        };
        Ok(CubicForm::new(c.add(&Poly::from_terms(3, field, [(lead, one.clone())])))?)
    };
    Ok((build(Section::Multiplicative, cycle_m)?, build(Section::Additive, cycle_a)?))
}

/// The actual section in the normal coordinates of [`recover_curve_equations`],
/// rescaled so that it is comparable coefficient by coefficient.
pub fn normal_form(v: &CubicSurface, cfg: &CmCaConfiguration, which: Section) -> Result<CubicForm, ReconError> {
    let (a, b, s) = frame(cfg, which);
    let cols = vec![b.coords().to_vec(), a.coords().to_vec(), s.coords().to_vec()];
    let g = v.form().linear_substitute(&cols);
    let lead = match which {
        Section::Multiplicative => [1u8, 1, 1],
        Section::Additive => [2, 0, 1],
    };
    let kappa = g.coeff(&lead);
    // c(z1, z2) part: any z3-free coefficient that is nonzero
    let eps = cubic_monomials(3)
        .into_iter()
        .filter(|e| e[2] == 0)
        .map(|e| g.coeff(&e))
        .find(|c| !c.is_zero());
    let (Some(eps), false) = (eps, kappa.is_zero()) else {
        return Err(ReconError::InvalidConfig("section is not in normal position".into()));
    };
    // multiply by 1/ε and rescale z3 by ε/κ: κ z3 + ε c ↦ z3 + c
    let s3 = eps.try_div(&kappa).map_err(|_| ReconError::InvalidConfig("κ = 0".into()))?;
    let inv = eps.try_inv().map_err(|_| ReconError::InvalidConfig("ε = 0".into()))?;
    let field = g.field();
    let scaled = g.substitute(&[
        Poly::linear(&[field.one(), field.zero(), field.zero()]),
        Poly::linear(&[field.zero(), field.one(), field.zero()]),
        Poly::linear(&[field.zero(), field.zero(), s3]),
    ]);
    Ok(CubicForm::new(scaled.scale(&inv))?)
}

/// Four plane sections `g^(i)` of a surface in coordinates where the i-th
/// plane is `z_i = 0`; each `g^(i)` is a 4-variable form without `z_i`.
#[derive(Debug, Clone)]
pub struct TetrahedralConfig {
    pub points: Option<[ProjectivePoint; 4]>,
    pub planes: Option<[ProjectivePlane; 4]>,
    pub types: Option<[CurveTag; 4]>,
    pub sections: [CubicForm; 4],
    /// Rows are the plane equations: `w = T z`.
    pub coord_change: Option<Vec<Vec<FieldElem>>>,
}

fn restrict_to_face(f: &CubicForm, i: usize) -> Result<CubicForm, CubicError> {
    let poly = Poly::from_terms(
        4,
        f.field(),
        f.poly().terms().filter(|(e, _)| e[i] == 0).map(|(e, c)| (e.clone(), c.clone())),
    );
    CubicForm::new(poly)
}

impl TetrahedralConfig {
    /// Sections by the coordinate tetrahedron `z_i = 0`.
    pub fn coordinate(v: &CubicSurface) -> Result<Self, ReconError> {
        let f = v.form();
        let s = |i| restrict_to_face(f, i);
        Ok(Self {
            points: None,
            planes: None,
            types: None,
            sections: [s(0)?, s(1)?, s(2)?, s(3)?],
            coord_change: None,
        })
    }

    /// Tangent planes at four points as the tetrahedron. Requires independent
    /// planes and each section Multiplicative or Additive with both types present.
    pub fn from_tangent_points(v: &CubicSurface, pts: &[ProjectivePoint; 4]) -> Result<Self, ReconError> {
        let planes: Vec<ProjectivePlane> = pts.iter().map(|p| v.tangent_plane(p)).collect::<Result<_, _>>()?;
        let rows: Vec<Vec<FieldElem>> = planes.iter().map(|p| p.coeffs().to_vec()).collect();
        let inv = linalg::inverse(&rows).ok_or_else(|| ReconError::InvalidConfig("tangent planes are dependent".into()))?;
        let mut types = [CurveTag::Unknown; 4];
        for (i, p) in pts.iter().enumerate() {
            let t = classify_curve(&restrict_to_plane(v.form(), &planes[i], &planes[i].basis())?)?;
            if !matches!(t.tag, CurveTag::Multiplicative | CurveTag::Additive) {
                return Err(ReconError::WrongType {
                    point: p.clone(),
                    actual: t.tag,
                    expected: CurveTag::Multiplicative,
                });
            }
            types[i] = t.tag;
        }
        if !types.contains(&CurveTag::Multiplicative) || !types.contains(&CurveTag::Additive) {
            return Err(ReconError::InvalidConfig("both section types must be represented".into()));
        }
        // F'(w) = F(T^{-1} w); columns of T^{-1}
        let cols: Vec<Vec<FieldElem>> = (0..4).map(|j| (0..4).map(|i| inv[i][j].clone()).collect()).collect();
        let fw = CubicForm::new(v.form().linear_substitute(&cols))?;
        let s = |i| restrict_to_face(&fw, i);
        Ok(Self {
            points: Some(pts.clone()),
            planes: Some([planes[0].clone(), planes[1].clone(), planes[2].clone(), planes[3].clone()]),
            types: Some(types),
            sections: [s(0)?, s(1)?, s(2)?, s(3)?],
            coord_change: Some(rows),
        })
    }

    /// Transforms a form in tetrahedral coordinates back to the original ones.
    pub fn to_original(&self, fw: &CubicForm) -> Result<CubicForm, ReconError> {
        match &self.coord_change {
            None => Ok(fw.clone()),
            Some(t) => {
                let cols: Vec<Vec<FieldElem>> = (0..4).map(|j| (0..4).map(|i| t[i][j].clone()).collect()).collect();
                Ok(CubicForm::new(fw.linear_substitute(&cols))?)
            }
        }
    }
}

/// Degree-3 monomials in the two variables other than `i` and `j`.
fn shared_monomials(i: usize, j: usize) -> Vec<Vec<u8>> {
    cubic_monomials(4).into_iter().filter(|e| e[i] == 0 && e[j] == 0).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphG {
    pub edges: Vec<(usize, usize)>,
    pub connected: bool,
}

/// Edge `{i, j}` when a monomial free of `z_i` and `z_j` has nonzero
/// coefficient in both `g^(i)` and `g^(j)`.
pub fn build_graph_g(gs: &[CubicForm; 4]) -> GraphG {
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if shared_monomials(i, j)
                .iter()
                .any(|e| !gs[i].coeff(e).is_zero() && !gs[j].coeff(e).is_zero())
            {
                edges.push((i, j));
            }
        }
    }
    let mut seen = [false; 4];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(a, b) in &edges {
            let w = if a == v { b } else if b == v { a } else { continue };
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    GraphG {
        connected: seen.iter().all(|&s| s),
        edges,
    }
}

/// Solves for scalars `c_i` making `{c_i g^(i)}` compatible and assembles `F`.
pub fn tetrahedral_reconstruct(gs: &[CubicForm; 4]) -> Result<CubicForm, ReconError> {
    for (i, g) in gs.iter().enumerate() {
        if g.nvars() != 4 || g.poly().terms().any(|(e, _)| e[i] != 0) {
            return Err(ReconError::InvalidConfig(format!("section {i} must be a form in 4 variables without z{}", i + 1)));
        }
    }
    let field = gs[0].field();
    let graph = build_graph_g(gs);
    if !graph.connected {
        return Err(ReconError::DisconnectedGraph);
    }
    let mut c: [Option<FieldElem>; 4] = [Some(field.one()), None, None, None];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &(a, b) in &graph.edges {
            let j = if a == i { b } else if b == i { a } else { continue };
            if c[j].is_some() {
                continue;
            }
            let e = shared_monomials(i, j)
                .into_iter()
                .find(|e| !gs[i].coeff(e).is_zero() && !gs[j].coeff(e).is_zero())
                .expect("edge has a shared monomial");
            let ci = c[i].clone().unwrap();
            c[j] = Some(&(&ci * &gs[i].coeff(&e)) * &gs[j].coeff(&e).try_inv().expect("nonzero"));
            queue.push_back(j);
        }
    }
    let c: Vec<FieldElem> = c.into_iter().map(Option::unwrap).collect();
    for i in 0..4 {
        for j in i + 1..4 {
            for e in shared_monomials(i, j) {
                if &c[i] * &gs[i].coeff(&e) != &c[j] * &gs[j].coeff(&e) {
                    return Err(ReconError::IncompatibleScalars(i, j, monomial_name(&e)));
                }
            }
        }
    }
    let mut terms = BTreeMap::new();
    for e in cubic_monomials(4) {
        let i = e.iter().position(|&k| k == 0).expect("a cubic monomial misses a variable");
        let v = &c[i] * &gs[i].coeff(&e);
        if !v.is_zero() {
            terms.insert(e, v);
        }
    }
    Ok(CubicForm::new(Poly::from_terms(4, field, terms))?)
}

/// `f = λ g` for some nonzero scalar λ.
pub fn proportional(f: &CubicForm, g: &CubicForm) -> bool {
    if f.nvars() != g.nvars() || f.field() != g.field() {
        return false;
    }
    let Some((e, c)) = f.poly().terms().next() else {
        return false;
    };
    let d = g.coeff(e);
    if d.is_zero() {
        return false;
    }
    let lambda = c.try_div(&d).expect("nonzero");
    f.poly() == &g.poly().scale(&lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn cyclic_cfg(mu: Vec<usize>) -> MuConfiguration {
        MuConfiguration::new(FiniteGroup::cyclic(4), FiniteGroup::cyclic(5), mu).unwrap()
    }

    #[test]
    fn cardinality_and_identity_rules() {
        let r = MuConfiguration::new(FiniteGroup::cyclic(3), FiniteGroup::cyclic(5), vec![0, 1, 2, 3, 4]);
        assert!(matches!(r, Err(ReconError::CardinalityMismatch { .. })));
        // mu(1_m) = ∞_a is rejected
        let r = MuConfiguration::new(FiniteGroup::cyclic(4), FiniteGroup::cyclic(5), vec![5, 1, 2, 3, 0, 4]);
        assert!(matches!(r, Err(ReconError::InvalidConfig(_))));
    }

    #[test]
    fn nu_fixes_zero_and_infinity() {
        // any admissible mu: ν(0_m) = 0_a, ν(∞_m) = ∞_a
        let cfg = cyclic_cfg(vec![1, 5, 0, 3, 2, 4]);
        let nu = nu_map(&cfg).unwrap();
        assert!(nu.bijective);
        assert_eq!(nu.nu[cfg.zero_m()], 0);
        assert_eq!(nu.nu[cfg.inf_m()], cfg.inf_a());
    }

    #[test]
    fn json_round_trip() {
        let cfg = cyclic_cfg(vec![1, 5, 0, 3, 2, 4]);
        let back = MuConfiguration::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let v: Value = serde_json::from_str(
            r#"{"M":{"cyclic":4},"A":{"cyclic":5},"mu":[[0,1],[1,"inf_a"],[2,0],[3,3],["0_m",2],["inf_m",4]]}"#,
        )
        .unwrap();
        assert_eq!(MuConfiguration::from_json(&v).unwrap(), cfg);
    }

    #[test]
    fn graph_examples() {
        let q = Field::Rational;
        let v = CubicSurface::diagonal(q, &[1, 2, 3, 4]).unwrap();
        let tc = TetrahedralConfig::coordinate(&v).unwrap();
        let g = build_graph_g(&tc.sections);
        assert_eq!(g.edges.len(), 6);
        assert!(g.connected);
        let f = CubicForm::from_int_terms(q, 4, &[(&[3, 0, 0, 0], 1), (&[0, 3, 0, 0], 1), (&[1, 1, 1, 0], 1), (&[1, 1, 0, 1], 1)]).unwrap();
        let tc = TetrahedralConfig::coordinate(&CubicSurface::new(f).unwrap()).unwrap();
        let g = build_graph_g(&tc.sections);
        assert_eq!(g.edges, vec![(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(g.connected);
    }
}
