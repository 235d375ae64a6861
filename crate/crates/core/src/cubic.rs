//! Cubic forms in 3 or 4 variables, cubic surfaces, plane sections and the
//! singular-curve classification (smooth, split node, cusp, twisted node).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElem, FieldError};
use crate::linalg;
use crate::poly::{cubic_monomials, resultant_y, Poly, UniPoly};
use crate::projective::{all_points, line_through, ProjectiveError, ProjectiveLine, ProjectivePlane, ProjectivePoint};

/// Largest prime for which singular points are found by scanning P^2(F_p).
const BRUTE_FORCE_PRIME: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubicError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("form is zero")]
    ZeroForm,
    #[error("form is not a homogeneous cubic in 3 or 4 variables")]
    NotCubic,
    #[error("point {0} is singular")]
    SingularPoint(ProjectivePoint),
    #[error("point {0} is not on the surface")]
    NotOnSurface(ProjectivePoint),
    #[error("basis does not span the plane")]
    DegenerateBasis,
    #[error("the plane lies in the surface")]
    ZeroRestriction,
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("surface is not diagonal")]
    NotDiagonal,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cannot parse cubic form: {0}")]
    Parse(String),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A nonzero homogeneous cubic form in 3 or 4 variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubicForm {
    poly: Poly,
}

impl CubicForm {
    pub fn new(poly: Poly) -> Result<Self, CubicError> {
        if poly.is_zero() {
            return Err(CubicError::ZeroForm);
        }
        if !(3..=4).contains(&poly.nvars()) || !poly.is_homogeneous_of_degree(3) {
            return Err(CubicError::NotCubic);
        }
        Ok(Self { poly })
    }

    /// `Σ a_i z_i^3`.
    pub fn diagonal(coeffs: &[FieldElem]) -> Result<Self, CubicError> {
        let n = coeffs.len();
        let field = coeffs.first().ok_or(CubicError::ZeroForm)?.field();
        let terms = coeffs.iter().enumerate().map(|(i, a)| {
            let mut e = vec![0; n];
            e[i] = 3;
            (e, a.clone())
        });
        Self::new(Poly::from_terms(n, field, terms))
    }

    pub fn diagonal_ints(field: Field, coeffs: &[i64]) -> Result<Self, CubicError> {
        Self::diagonal(&coeffs.iter().map(|&a| field.from_i64(a)).collect::<Vec<_>>())
    }

    pub fn from_int_terms(field: Field, nvars: usize, terms: &[(&[u8], i64)]) -> Result<Self, CubicError> {
        Self::new(Poly::from_terms(
            nvars,
            field,
            terms.iter().map(|(e, c)| (e.to_vec(), field.from_i64(*c))),
        ))
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn field(&self) -> Field {
        self.poly.field()
    }

    pub fn coeff(&self, e: &[u8]) -> FieldElem {
        self.poly.coeff(e)
    }

    fn check_dim(&self, p: &ProjectivePoint) -> Result<(), CubicError> {
        if p.dim() != self.nvars() {
            return Err(CubicError::DimensionMismatch {
                expected: self.nvars(),
                got: p.dim(),
            });
        }
        if p.field() != self.field() {
            return Err(FieldError::MixedFields(self.field(), p.field()).into());
        }
        Ok(())
    }

    pub fn evaluate(&self, p: &ProjectivePoint) -> Result<FieldElem, CubicError> {
        self.check_dim(p)?;
        Ok(self.poly.eval(p.coords()))
    }

    pub fn partials(&self) -> Vec<Poly> {
        (0..self.nvars()).map(|i| self.poly.derivative(i)).collect()
    }

    pub fn gradient(&self, p: &ProjectivePoint) -> Result<Vec<FieldElem>, CubicError> {
        self.check_dim(p)?;
        Ok(self.partials().iter().map(|d| d.eval(p.coords())).collect())
    }

    /// A point of the zero set where every partial derivative vanishes.
    pub fn is_singular_at(&self, p: &ProjectivePoint) -> Result<bool, CubicError> {
        Ok(self.evaluate(p)?.is_zero() && self.gradient(p)?.iter().all(FieldElem::is_zero))
    }

    /// Diagonal coefficients when the form is `Σ a_i z_i^3`.
    pub fn diagonal_coeffs(&self) -> Option<Vec<FieldElem>> {
        let n = self.nvars();
        let mut out = vec![self.field().zero(); n];
        for (e, c) in self.poly.terms() {
            let i = e.iter().position(|&k| k == 3)?;
            out[i] = c.clone();
        }
        Some(out)
    }

    /// Reduction of a form with rational coefficients into another field.
    pub fn map_field(&self, target: Field) -> Result<CubicForm, CubicError> {
        let mut terms = Vec::new();
        for (e, c) in self.poly.terms() {
            let v = match c {
                FieldElem::Rational(r) => target.from_bigint(r.numer()).try_div(&target.from_bigint(r.denom()))?,
                FieldElem::Residue { .. } if c.field() == target => c.clone(),
                FieldElem::Residue { .. } => return Err(FieldError::MixedFields(c.field(), target).into()),
            };
            terms.push((e.clone(), v));
        }
        CubicForm::new(Poly::from_terms(self.nvars(), target, terms))
    }

    /// `F(T·u)` where column `j` of `T` is `cols[j]`.
    pub fn linear_substitute(&self, cols: &[Vec<FieldElem>]) -> Poly {
        let n = self.nvars();
        let images: Vec<Poly> = (0..n)
            .map(|i| Poly::linear(&cols.iter().map(|c| c[i].clone()).collect::<Vec<_>>()))
            .collect();
        self.poly.substitute(&images)
    }

    /// Binary cubic `F(λ·a + μ·b)` as coefficients of `λ^3, λ^2 μ, λ μ^2, μ^3`.
    pub fn restrict_to_line(&self, a: &ProjectivePoint, b: &ProjectivePoint) -> [FieldElem; 4] {
        let g = self.linear_substitute(&[a.coords().to_vec(), b.coords().to_vec()]);
        [g.coeff(&[3, 0]), g.coeff(&[2, 1]), g.coeff(&[1, 2]), g.coeff(&[0, 3])]
    }

    /// JSON object mapping monomial strings such as `"z1^2*z3"` to coefficients.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, String> = self
            .poly
            .terms()
            .map(|(e, c)| (monomial_name(e), c.to_string()))
            .collect();
        serde_json::json!({ "field": self.field().to_string(), "nvars": self.nvars(), "terms": map })
    }

    /// Parses either the diagonal shorthand `"[a1,a2,a3,a4]"` or a JSON object
    /// of monomial strings (optionally wrapped as produced by [`CubicForm::to_json`]).
    pub fn parse(field: Field, s: &str) -> Result<CubicForm, CubicError> {
        let v: serde_json::Value = serde_json::from_str(s.trim()).map_err(|e| CubicError::Parse(e.to_string()))?;
        Self::from_json(field, &v)
    }

    pub fn from_json(field: Field, v: &serde_json::Value) -> Result<CubicForm, CubicError> {
        let err = |m: &str| CubicError::Parse(m.to_string());
        if let Some(arr) = v.as_array() {
            let coeffs = arr
                .iter()
                .map(|x| field.parse(&json_scalar(x).ok_or_else(|| err("bad coefficient"))?).map_err(Into::into))
                .collect::<Result<Vec<_>, CubicError>>()?;
            return Self::diagonal(&coeffs);
        }
        let obj = v.as_object().ok_or_else(|| err("expected array or object"))?;
        let (terms, nvars_hint) = match obj.get("terms") {
            Some(t) => (
                t.as_object().ok_or_else(|| err("terms must be an object"))?,
                obj.get("nvars").and_then(|n| n.as_u64()).map(|n| n as usize),
            ),
            None => (obj, None),
        };
        let mut parsed = Vec::new();
        let mut maxvar = 0;
        for (k, c) in terms {
            let vars = parse_monomial(k).ok_or_else(|| err(&format!("bad monomial {k:?}")))?;
            maxvar = maxvar.max(vars.iter().map(|&(i, _)| i).max().unwrap_or(0));
            let c = field.parse(&json_scalar(c).ok_or_else(|| err("bad coefficient"))?)?;
            parsed.push((vars, c));
        }
        let nvars = nvars_hint.unwrap_or(if maxvar <= 3 { 3 } else { 4 });
        if maxvar > nvars {
            return Err(err("variable index exceeds nvars"));
        }
        let mut poly = Poly::zero(nvars, field);
        for (vars, c) in parsed {
            let mut e = vec![0u8; nvars];
            for (i, k) in vars {
                e[i - 1] += k;
            }
            poly.add_term(e, c);
        }
        Self::new(poly)
    }
}

impl fmt::Display for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.poly.terms().collect::<Vec<_>>().into_iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*{}", monomial_name(e))?;
        }
        Ok(())
    }
}

fn json_scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn monomial_name(e: &[u8]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { format!("z{}", i + 1) } else { format!("z{}^{k}", i + 1) })
        .collect();
    parts.join("*")
}

fn parse_monomial(s: &str) -> Option<Vec<(usize, u8)>> {
    s.split('*')
        .map(|f| {
            let f = f.trim().strip_prefix('z')?;
            let (i, k) = match f.split_once('^') {
                Some((i, k)) => (i.parse().ok()?, k.parse().ok()?),
                None => (f.parse().ok()?, 1),
            };
            (1..=4).contains(&i).then_some((i, k))
        })
        .collect()
}

/// A cubic surface in P^3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicSurface {
    form: CubicForm,
    diagonal_coeffs: Option<Vec<FieldElem>>,
}

impl CubicSurface {
    pub fn new(form: CubicForm) -> Result<Self, CubicError> {
        if form.nvars() != 4 {
            return Err(CubicError::DimensionMismatch {
                expected: 4,
                got: form.nvars(),
            });
        }
        let diagonal_coeffs = form.diagonal_coeffs();
        Ok(Self { form, diagonal_coeffs })
    }

    pub fn diagonal(field: Field, a: &[i64]) -> Result<Self, CubicError> {
        Self::new(CubicForm::diagonal_ints(field, a)?)
    }

    pub fn form(&self) -> &CubicForm {
        &self.form
    }

    pub fn field(&self) -> Field {
        self.form.field()
    }

    pub fn diagonal_coeffs(&self) -> Option<&[FieldElem]> {
        self.diagonal_coeffs.as_deref()
    }

    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        self.form.evaluate(p).is_ok_and(|v| v.is_zero())
    }

    fn check_smooth_point(&self, p: &ProjectivePoint) -> Result<Vec<FieldElem>, CubicError> {
        if !self.form.evaluate(p)?.is_zero() {
            return Err(CubicError::NotOnSurface(p.clone()));
        }
        let g = self.form.gradient(p)?;
        if g.iter().all(FieldElem::is_zero) {
            return Err(CubicError::SingularPoint(p.clone()));
        }
        Ok(g)
    }

    pub fn is_smooth_point(&self, p: &ProjectivePoint) -> bool {
        self.check_smooth_point(p).is_ok()
    }

    pub fn tangent_plane(&self, p: &ProjectivePoint) -> Result<ProjectivePlane, CubicError> {
        let g = self.check_smooth_point(p)?;
        Ok(ProjectivePlane::new(g)?)
    }

    /// Smoothness over the algebraic closure. Exact for diagonal forms; for
    /// other forms over F_p only rational singular points are detected, and
    /// `None` means none were found.
    pub fn is_smooth(&self) -> Option<bool> {
        if let Some(a) = &self.diagonal_coeffs {
            return Some(self.field().characteristic() != 3 && a.iter().all(|x| !x.is_zero()));
        }
        if self.field().is_finite() && !self.rational_points().iter().all(|p| self.is_smooth_point(p)) {
            return Some(false);
        }
        let ch = self.field().characteristic();
        if (ch == 0 || ch >= 5) && self.form.nvars() == 4 && macaulay_certifies_smooth(&self.form) {
            return Some(true);
        }
        None
    }

    /// All F_p-points of the surface (empty over Q).
    pub fn rational_points(&self) -> Vec<ProjectivePoint> {
        if !self.field().is_finite() {
            return Vec::new();
        }
        all_points(self.field(), 4).into_iter().filter(|p| self.contains(p)).collect()
    }

    pub fn line_in_surface(&self, l: &ProjectiveLine) -> bool {
        let (a, b) = l.points_spanning();
        let field = self.field();
        if field.characteristic() >= 3 {
            // a binary cubic vanishing at four distinct points is zero
            let f = self.form.poly();
            return (0..4).all(|t| {
                let (lam, mu) = if t == 0 { (1, 0) } else { (t - 1, 1) };
                f.eval(&a.combine(&field.from_i64(lam), b, &field.from_i64(mu))).is_zero()
            });
        }
        self.form.restrict_to_line(a, b).iter().all(FieldElem::is_zero)
    }

    /// All rational lines contained in the surface.
    pub fn lines(&self) -> Result<Vec<ProjectiveLine>, CubicError> {
        match self.field() {
            Field::Prime(_) => Ok(all_lines_p3(self.field())
                .into_iter()
                .filter(|l| self.line_in_surface(l))
                .collect()),
            Field::Rational => {
                let a = self.diagonal_coeffs.as_ref().ok_or_else(|| {
                    CubicError::Unsupported("line search over Q needs a diagonal form".into())
                })?;
                Ok(diagonal_rational_lines(a))
            }
        }
    }
}

/// All lines of P^3(F_p), one per reduced row echelon form.
pub fn all_lines_p3(field: Field) -> Vec<ProjectiveLine> {
    let els = field.elements().expect("finite field");
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            // free entries: row0 at columns > i except j; row1 at columns > j
            let free0: Vec<usize> = (i + 1..4).filter(|&c| c != j).collect();
            let free1: Vec<usize> = (j + 1..4).collect();
            let slots = free0.len() + free1.len();
            let total = els.len().pow(slots as u32);
            for mut idx in 0..total {
                let mut r0 = vec![field.zero(); 4];
                let mut r1 = vec![field.zero(); 4];
                r0[i] = field.one();
                r1[j] = field.one();
                for &c in free0.iter() {
                    r0[c] = els[idx % els.len()].clone();
                    idx /= els.len();
                }
                for &c in free1.iter() {
                    r1[c] = els[idx % els.len()].clone();
                    idx /= els.len();
                }
                let a = ProjectivePoint::new(r0).expect("nonzero row");
                let b = ProjectivePoint::new(r1).expect("nonzero row");
                out.push(line_through(&a, &b).expect("independent rows"));
            }
        }
    }
    out
}

/// Rational cube root of a rational number.
pub fn rational_cbrt(x: &BigRational) -> Option<BigRational> {
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.abs().cbrt();
        (&(&r * &r) * &r == n.abs()).then(|| if n.is_negative() { -r } else { r })
    };
    Some(BigRational::new(root(x.numer())?, root(x.denom())?))
}

/// Lines `z_i + c z_j = z_k + c' z_l = 0` with `c^3 = a_j/a_i`, `c'^3 = a_l/a_k`.
fn diagonal_rational_lines(a: &[FieldElem]) -> Vec<ProjectiveLine> {
    let k = Field::Rational;
    let mut out = Vec::new();
    if a.iter().any(FieldElem::is_zero) {
        return out;
    }
    for (i, j, kk, l) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
        let c = |x: usize, y: usize| -> Option<FieldElem> {
            let ratio = a[y].try_div(&a[x]).ok()?;
            rational_cbrt(ratio.as_rational()?).map(FieldElem::Rational)
        };
        let (Some(c1), Some(c2)) = (c(i, j), c(kk, l)) else {
            continue;
        };
        let mut p = vec![k.zero(); 4];
        p[i] = -&c1;
        p[j] = k.one();
        let mut q = vec![k.zero(); 4];
        q[kk] = -&c2;
        q[l] = k.one();
        let p = ProjectivePoint::new(p).expect("nonzero");
        let q = ProjectivePoint::new(q).expect("nonzero");
        out.push(line_through(&p, &q).expect("distinct"));
    }
    out
}

/// A plane cubic curve, optionally embedded in a plane of P^3 through a chart basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneCubicCurve {
    form: CubicForm,
    ambient_plane: Option<ProjectivePlane>,
    chart_basis: Option<[ProjectivePoint; 3]>,
}

impl PlaneCubicCurve {
    pub fn new(form: CubicForm) -> Result<Self, CubicError> {
        if form.nvars() != 3 {
            return Err(CubicError::DimensionMismatch {
                expected: 3,
                got: form.nvars(),
            });
        }
        Ok(Self {
            form,
            ambient_plane: None,
            chart_basis: None,
        })
    }

    pub fn from_int_terms(field: Field, terms: &[(&[u8], i64)]) -> Result<Self, CubicError> {
        Self::new(CubicForm::from_int_terms(field, 3, terms)?)
    }

    pub fn form(&self) -> &CubicForm {
        &self.form
    }

    pub fn field(&self) -> Field {
        self.form.field()
    }

    pub fn ambient_plane(&self) -> Option<&ProjectivePlane> {
        self.ambient_plane.as_ref()
    }

    pub fn chart_basis(&self) -> Option<&[ProjectivePoint; 3]> {
        self.chart_basis.as_ref()
    }

    /// Plane coordinates to a point of P^3 (identity when not embedded).
    pub fn to_ambient(&self, u: &ProjectivePoint) -> ProjectivePoint {
        match &self.chart_basis {
            None => u.clone(),
            Some(b) => {
                let field = self.field();
                let v: Vec<FieldElem> = (0..4)
                    .map(|i| {
                        (0..3).fold(field.zero(), |acc, j| &acc + &(&u.coords()[j] * &b[j].coords()[i]))
                    })
                    .collect();
                ProjectivePoint::new(v).expect("independent basis")
            }
        }
    }

    /// Plane coordinates of an ambient point, `None` if it is off the plane.
    pub fn from_ambient(&self, x: &ProjectivePoint) -> Option<ProjectivePoint> {
        let Some(b) = &self.chart_basis else {
            return (x.dim() == 3).then(|| x.clone());
        };
        if x.dim() != 4 || x.field() != self.field() {
            return None;
        }
        let rows: Vec<Vec<FieldElem>> = (0..4)
            .map(|i| vec![b[0].coords()[i].clone(), b[1].coords()[i].clone(), b[2].coords()[i].clone(), x.coords()[i].clone()])
            .collect();
        let k = linalg::kernel(&rows, 4, self.field());
        if k.len() != 1 || k[0][3].is_zero() {
            return None;
        }
        ProjectivePoint::new(k[0][..3].to_vec()).ok()
    }

    pub fn contains(&self, u: &ProjectivePoint) -> bool {
        self.form.evaluate(u).is_ok_and(|v| v.is_zero())
    }

    pub fn is_smooth_point(&self, u: &ProjectivePoint) -> bool {
        self.contains(u) && self.form.gradient(u).is_ok_and(|g| g.iter().any(|c| !c.is_zero()))
    }

    /// All F_p-points of the curve in the order of [`all_points`].
    pub fn rational_points(&self) -> Vec<ProjectivePoint> {
        if !self.field().is_finite() {
            return Vec::new();
        }
        all_points(self.field(), 3).into_iter().filter(|p| self.contains(p)).collect()
    }

    pub fn smooth_points(&self) -> Vec<ProjectivePoint> {
        self.rational_points().into_iter().filter(|p| self.is_smooth_point(p)).collect()
    }
}

/// Restricts a surface form to a plane given by three spanning points.
pub fn restrict_to_plane(
    f: &CubicForm,
    plane: &ProjectivePlane,
    basis: &[ProjectivePoint; 3],
) -> Result<PlaneCubicCurve, CubicError> {
    if f.nvars() != 4 {
        return Err(CubicError::DimensionMismatch {
            expected: 4,
            got: f.nvars(),
        });
    }
    if basis.iter().any(|b| !plane.contains(b)) {
        return Err(CubicError::DegenerateBasis);
    }
    let rows: Vec<Vec<FieldElem>> = basis.iter().map(|b| b.coords().to_vec()).collect();
    if linalg::rank(&rows) != 3 {
        return Err(CubicError::DegenerateBasis);
    }
    let g = f.linear_substitute(&rows);
    if g.is_zero() {
        return Err(CubicError::ZeroRestriction);
    }
    Ok(PlaneCubicCurve {
        form: CubicForm::new(g)?,
        ambient_plane: Some(plane.clone()),
        chart_basis: Some(basis.clone()),
    })
}

/// The tangent plane section at a smooth point, with the plane's default basis.
pub fn tangent_section(v: &CubicSurface, p: &ProjectivePoint) -> Result<PlaneCubicCurve, CubicError> {
    let plane = v.tangent_plane(p)?;
    let basis = plane.basis();
    restrict_to_plane(v.form(), &plane, &basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CurveTag {
    Smooth,
    Multiplicative,
    Additive,
    TwistedMultiplicative,
    TwistedAdditive,
    Reducible,
    MultipleSingular,
    Unknown,
}

impl fmt::Display for CurveTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveType {
    pub tag: CurveTag,
    pub singular_point: Option<ProjectivePoint>,
    /// Points `d` such that the line through the singular point and `d` is a
    /// tangent of the singular point; one entry for a cusp, two for a split node.
    pub tangent_dirs: Vec<ProjectivePoint>,
    pub note: Option<String>,
}

impl CurveType {
    fn bare(tag: CurveTag) -> Self {
        Self {
            tag,
            singular_point: None,
            tangent_dirs: Vec::new(),
            note: None,
        }
    }

    fn with_note(tag: CurveTag, note: &str) -> Self {
        Self {
            note: Some(note.to_string()),
            ..Self::bare(tag)
        }
    }

    pub fn tangent_lines(&self) -> Vec<ProjectiveLine> {
        let Some(s) = &self.singular_point else {
            return Vec::new();
        };
        self.tangent_dirs.iter().filter_map(|d| line_through(s, d).ok()).collect()
    }
}

enum SingularLocus {
    Finite(Vec<ProjectivePoint>),
    Infinite,
}

/// Classifies a plane cubic by its rational singular locus and tangent cone.
pub fn classify_curve(c: &PlaneCubicCurve) -> Result<CurveType, CubicError> {
    let f = c.form();
    let field = f.field();
    let ch = field.characteristic();
    let small = matches!(field, Field::Prime(p) if p <= BRUTE_FORCE_PRIME);
    if ch == 2 || ch == 3 {
        return classify_small_char(c);
    }
    if !discriminant_test(f).is_zero() {
        return Ok(CurveType::bare(CurveTag::Smooth));
    }
    let locus = if small {
        Some(brute_force_singular(c))
    } else {
        algebraic_singular(f)
    };
    let Some(locus) = locus else {
        return Ok(CurveType::with_note(CurveTag::Unknown, "rational singular points could not be certified"));
    };
    match locus {
        SingularLocus::Infinite => Ok(CurveType::with_note(CurveTag::MultipleSingular, "curve has a multiple component")),
        SingularLocus::Finite(pts) if pts.len() == 1 => classify_at(f, &pts[0]),
        SingularLocus::Finite(pts) => Ok(CurveType {
            singular_point: pts.first().cloned(),
            ..CurveType::with_note(CurveTag::Reducible, "singular but not with exactly one rational singular point")
        }),
    }
}

/// Characteristic 2 and 3: rational singular points by scanning, smoothness by
/// excluding line components and conjugate line triples.
fn classify_small_char(c: &PlaneCubicCurve) -> Result<CurveType, CubicError> {
    let f = c.form();
    match brute_force_singular(c) {
        SingularLocus::Infinite => Ok(CurveType::with_note(CurveTag::MultipleSingular, "curve has a multiple component")),
        SingularLocus::Finite(pts) if pts.len() == 1 => classify_at(f, &pts[0]),
        SingularLocus::Finite(pts) if pts.len() > 1 => Ok(CurveType {
            singular_point: pts.first().cloned(),
            ..CurveType::bare(CurveTag::Reducible)
        }),
        SingularLocus::Finite(_) => {
            // No rational singular point: singular only if a rational line is a
            // component, or the curve is three conjugate lines (no rational points).
            if c.rational_points().is_empty() {
                return Ok(CurveType::with_note(CurveTag::Reducible, "three conjugate lines"));
            }
            let field = f.field();
            let pts = all_points(field, 3);
            for eq in &pts {
                let on: Vec<&ProjectivePoint> = pts.iter().filter(|p| linalg::dot(p.coords(), eq.coords()).is_zero()).take(2).collect();
                if f.restrict_to_line(on[0], on[1]).iter().all(FieldElem::is_zero) {
                    return Ok(CurveType::with_note(CurveTag::Reducible, "rational line component"));
                }
            }
            Ok(CurveType::bare(CurveTag::Smooth))
        }
    }
}

fn brute_force_singular(c: &PlaneCubicCurve) -> SingularLocus {
    let f = c.form();
    let partials = f.partials();
    let field = f.field();
    let mut out = Vec::new();
    for p in all_points(field, 3) {
        if f.poly().eval(p.coords()).is_zero() && partials.iter().all(|d| d.eval(p.coords()).is_zero()) {
            out.push(p);
        }
    }
    // A reduced cubic has at most three singular points; more means a multiple component.
    if out.len() > 3 {
        SingularLocus::Infinite
    } else {
        SingularLocus::Finite(out)
    }
}

/// 6x6 determinant of the coefficient vectors of the three partials and the
/// three partials of the Hessian; vanishes exactly on singular curves when the
/// characteristic is 0 or at least 5.
pub fn discriminant_test(f: &CubicForm) -> FieldElem {
    let d = f.partials();
    let h: Vec<Vec<Poly>> = (0..3).map(|i| (0..3).map(|j| d[i].derivative(j)).collect()).collect();
    let minor = |a: usize, b: usize, c: usize, e: usize| h[1][a].mul(&h[2][b]).sub(&h[1][c].mul(&h[2][e]));
    let hess = h[0][0]
        .mul(&minor(1, 2, 2, 1))
        .sub(&h[0][1].mul(&minor(0, 2, 2, 0)))
        .add(&h[0][2].mul(&minor(0, 1, 1, 0)));
    let basis: [[u8; 3]; 6] = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];
    let mut rows = Vec::new();
    for q in d.iter().chain((0..3).map(|i| hess.derivative(i)).collect::<Vec<_>>().iter()) {
        rows.push(basis.iter().map(|e| q.coeff(e)).collect::<Vec<_>>());
    }
    linalg::det(&rows)
}

/// Rational singular points via resultants; `None` when root search is capped.
fn algebraic_singular(f: &CubicForm) -> Option<SingularLocus> {
    let field = f.field();
    let d = f.partials();
    let mut out = Vec::new();
    // chart z = 1
    let g: Vec<Vec<UniPoly>> = d.iter().map(|q| bivariate(&q.specialize(2, &field.one()))).collect();
    let combos: [[i64; 3]; 4] = [[1, 0, 0], [1, 2, 3], [2, 5, 1], [3, 1, 7]];
    let mut xs: Option<UniPoly> = None;
    'outer: for a in &combos {
        for b in &combos {
            if a == b {
                continue;
            }
            let h1 = combine(&g, a, field);
            let h2 = combine(&g, &[b[1], b[2], b[0]], field);
            let r = resultant_y(&h1, &h2, field);
            if !r.is_zero() {
                xs = Some(r);
                break 'outer;
            }
        }
    }
    let Some(r) = xs else {
        return Some(SingularLocus::Infinite);
    };
    for (x0, _) in r.roots()? {
        let spec: Vec<UniPoly> = d
            .iter()
            .map(|q| bivariate_at_x(&q.specialize(2, &field.one()), &x0))
            .collect();
        let gg = spec[0].gcd(&spec[1]).gcd(&spec[2]);
        if gg.is_zero() {
            return Some(SingularLocus::Infinite);
        }
        for (y0, _) in gg.roots()? {
            out.push(ProjectivePoint::new(vec![x0.clone(), y0, field.one()]).ok()?);
        }
    }
    // line z = 0: points (x:1:0) and (1:0:0)
    let at_inf: Vec<UniPoly> = d
        .iter()
        .map(|q| {
            let q = q.specialize(2, &field.zero()).specialize(1, &field.one());
            q.to_univariate(0).expect("single variable left")
        })
        .collect();
    let gg = at_inf[0].gcd(&at_inf[1]).gcd(&at_inf[2]);
    if gg.is_zero() {
        return Some(SingularLocus::Infinite);
    }
    for (x0, _) in gg.roots()? {
        out.push(ProjectivePoint::new(vec![x0, field.one(), field.zero()]).ok()?);
    }
    let e = ProjectivePoint::new(vec![field.one(), field.zero(), field.zero()]).ok()?;
    if d.iter().all(|q| q.eval(e.coords()).is_zero()) {
        out.push(e);
    }
    out.sort();
    out.dedup();
    Some(if out.len() > 3 { SingularLocus::Infinite } else { SingularLocus::Finite(out) })
}

/// `Σ_k c_k(x) y^k` from a polynomial in (x, y, ·) with the third exponent zero.
fn bivariate(q: &Poly) -> Vec<UniPoly> {
    let field = q.field();
    let mut out: Vec<Vec<FieldElem>> = vec![Vec::new(); 4];
    for (e, c) in q.terms() {
        let (i, j) = (e[0] as usize, e[1] as usize);
        if out[j].len() <= i {
            out[j].resize(i + 1, field.zero());
        }
        out[j][i] = c.clone();
    }
    let mut res: Vec<UniPoly> = out.into_iter().map(|v| UniPoly::new(field, v)).collect();
    while res.len() > 1 && res.last().is_some_and(UniPoly::is_zero) {
        res.pop();
    }
    res
}

fn bivariate_at_x(q: &Poly, x0: &FieldElem) -> UniPoly {
    let b = bivariate(q);
    UniPoly::new(q.field(), b.iter().map(|c| c.eval(x0)).collect())
}

fn combine(g: &[Vec<UniPoly>], w: &[i64; 3], field: Field) -> Vec<UniPoly> {
    let n = g.iter().map(Vec::len).max().unwrap_or(1);
    let mut out = vec![UniPoly::zero(field); n];
    for (gi, &wi) in g.iter().zip(w) {
        let s = field.from_i64(wi);
        for (k, c) in gi.iter().enumerate() {
            out[k] = out[k].add(&c.scale(&s));
        }
    }
    while out.len() > 1 && out.last().is_some_and(UniPoly::is_zero) {
        out.pop();
    }
    out
}

/// Tangent-cone analysis at the unique rational singular point `s`.
fn classify_at(f: &CubicForm, s: &ProjectivePoint) -> Result<CurveType, CubicError> {
    let field = f.field();
    let t = completing_basis(s);
    let g = f.linear_substitute(&t);
    let a = g.coeff(&[2, 0, 1]);
    let b = g.coeff(&[1, 1, 1]);
    let c = g.coeff(&[0, 2, 1]);
    let f3: [FieldElem; 4] = [g.coeff(&[3, 0, 0]), g.coeff(&[2, 1, 0]), g.coeff(&[1, 2, 0]), g.coeff(&[0, 3, 0])];
    let f3_at = |d: &(FieldElem, FieldElem)| -> FieldElem {
        let (u, v) = d;
        &(&(&f3[0] * &u.pow(3)) + &(&f3[1] * &(&u.pow(2) * v))) + &(&(&f3[2] * &(u * &v.pow(2))) + &(&f3[3] * &v.pow(3)))
    };
    let to_point = |d: &(FieldElem, FieldElem)| -> ProjectivePoint {
        let v: Vec<FieldElem> = (0..3).map(|i| &(&d.0 * &t[0][i]) + &(&d.1 * &t[1][i])).collect();
        ProjectivePoint::new(v).expect("independent columns")
    };
    let mut out = CurveType {
        singular_point: Some(s.clone()),
        ..CurveType::bare(CurveTag::Reducible)
    };
    if a.is_zero() && b.is_zero() && c.is_zero() {
        out.note = Some("triple point".into());
        return Ok(out);
    }
    // roots (u:v) of a u^2 + b uv + c v^2
    let one = field.one();
    let zero = field.zero();
    let roots: Option<Vec<(FieldElem, FieldElem)>> = if a.is_zero() {
        if b.is_zero() {
            Some(vec![(one.clone(), zero.clone())])
        } else {
            Some(vec![(one.clone(), zero.clone()), (-&c, b.clone())])
        }
    } else if field.characteristic() == 2 {
        let q = UniPoly::new(field, vec![c.clone(), b.clone(), a.clone()]);
        let r = q.roots().ok_or_else(|| CubicError::UnsupportedField("characteristic 2 root search".into()))?;
        if r.is_empty() {
            None
        } else {
            Some(r.into_iter().map(|(t, _)| (t, one.clone())).collect())
        }
    } else {
        let disc = &(&b * &b) - &(&field.from_i64(4) * &(&a * &c));
        let two_a = &field.from_i64(2) * &a;
        match disc.sqrt() {
            Some(sq) if sq.is_zero() => Some(vec![((-&b).try_div(&two_a)?, one.clone())]),
            Some(sq) => Some(vec![
                ((&-&b + &sq).try_div(&two_a)?, one.clone()),
                ((&-&b - &sq).try_div(&two_a)?, one.clone()),
            ]),
            None => None,
        }
    };
    match roots {
        None => {
            if field.characteristic() == 2 {
                return Err(CubicError::UnsupportedField("twisted type in characteristic 2".into()));
            }
            // conjugate tangents: line components iff the cone divides f3
            let cone = UniPoly::new(field, vec![c.clone(), b.clone(), a.clone()]);
            let cub = UniPoly::new(field, vec![f3[3].clone(), f3[2].clone(), f3[1].clone(), f3[0].clone()]);
            if cub.divrem(&cone).1.is_zero() {
                out.note = Some("node with conjugate line components".into());
                return Ok(out);
            }
            out.tag = CurveTag::TwistedMultiplicative;
            Ok(out)
        }
        Some(r) => {
            out.tangent_dirs = r.iter().map(to_point).collect();
            out.tangent_dirs.sort();
            if r.iter().any(|d| f3_at(d).is_zero()) {
                out.note = Some("a tangent line is a component".into());
                return Ok(out);
            }
            out.tag = if r.len() == 2 { CurveTag::Multiplicative } else { CurveTag::Additive };
            Ok(out)
        }
    }
}

/// Columns `[e_a, e_b, s]` of an invertible matrix with `s` last.
fn completing_basis(s: &ProjectivePoint) -> Vec<Vec<FieldElem>> {
    let field = s.field();
    let unit = |i: usize| -> Vec<FieldElem> { (0..3).map(|j| if i == j { field.one() } else { field.zero() }).collect() };
    let k = (0..3).rev().find(|&i| !s.coords()[i].is_zero()).expect("nonzero point");
    let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    vec![unit(others[0]), unit(others[1]), s.coords().to_vec()]
}

/// Type of the tangent section at a smooth point of a diagonal surface, read
/// from `D = Π a_i z_i`: zero gives the cusp type, a nonzero square the split
/// node, a nonsquare the twisted node. The D = 0 case is reported as Additive;
/// the tangent-cone computation is what decides it in the tests.
pub fn diagonal_point_type(v: &CubicSurface, p: &ProjectivePoint) -> Result<CurveTag, CubicError> {
    let a = v.diagonal_coeffs().ok_or(CubicError::NotDiagonal)?;
    v.tangent_plane(p)?;
    let d = a
        .iter()
        .zip(p.coords())
        .fold(v.field().one(), |acc, (ai, zi)| &acc * &(ai * zi));
    Ok(if d.is_zero() {
        CurveTag::Additive
    } else if d.is_square() {
        CurveTag::Multiplicative
    } else {
        CurveTag::TwistedMultiplicative
    })
}

/// All degree-3 monomials of a form with nonzero coefficient.
pub fn support(f: &CubicForm) -> Vec<Vec<u8>> {
    cubic_monomials(f.nvars()).into_iter().filter(|e| !f.coeff(e).is_zero()).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn macaulay_certificate_examples() {
        for p in [5u32, 7, 13] {
            let f = Field::Prime(p);
            let d = CubicForm::diagonal_ints(f, &[1, 2, 3, 4]).unwrap();
            assert!(super::macaulay_certifies_smooth(&d));
            // cone over a plane cubic: singular at (0:0:0:1)
            let cone = CubicForm::from_int_terms(f, 4, &[(&[3, 0, 0, 0], 1), (&[0, 3, 0, 0], 1), (&[0, 0, 3, 0], 1)]).unwrap();
            assert!(!super::macaulay_certifies_smooth(&cone));
            // singular only at the conjugate points x = y = 0, z^2 + w^2 = 0 style loci
            let nodal = CubicForm::from_int_terms(f, 4, &[(&[1, 1, 1, 0], 1), (&[1, 1, 0, 1], 1), (&[0, 3, 0, 0], 1), (&[3, 0, 0, 0], 1), (&[0, 0, 2, 1], 1)]).unwrap();
            let s = CubicSurface::new(nodal).unwrap();
            if s.rational_points().iter().any(|q| !s.is_smooth_point(q)) {
                assert_ne!(s.is_smooth(), Some(true));
            }
        }
    }

    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    fn pt(field: Field, c: &[i64]) -> ProjectivePoint {
        ProjectivePoint::from_ints(field, c).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = CubicForm::diagonal_ints(q(), &[1, 2, 3, 4]).unwrap();
        assert!(f.evaluate(&pt(q(), &[1, -1, -1, 1])).unwrap().is_zero());
        let f = CubicForm::diagonal_ints(q(), &[1, 2, 3, 5]).unwrap();
        assert!(f.evaluate(&pt(q(), &[0, 1, 1, -1])).unwrap().is_zero());
        assert!(f.evaluate(&pt(q(), &[1, 6, 4, -5])).unwrap().is_zero());
        assert!(matches!(
            f.evaluate(&pt(q(), &[1, 0, 0])),
            Err(CubicError::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn gradient_examples() {
        let f = CubicForm::diagonal_ints(q(), &[1, 2, 3, 4]).unwrap();
        let g = f.gradient(&pt(q(), &[1, -1, -1, 1])).unwrap();
        assert_eq!(g, [3, 6, 9, 12].map(|v| q().from_i64(v)).to_vec());
        let f = CubicForm::from_int_terms(q(), 3, &[(&[3, 0, 0], 1)]).unwrap();
        assert!(f.gradient(&pt(q(), &[0, 0, 1])).unwrap().iter().all(FieldElem::is_zero));
        let f = CubicForm::diagonal_ints(q(), &[1, 1, 7, 7]).unwrap();
        let g = f.gradient(&pt(q(), &[0, 0, 1, -1])).unwrap();
        assert_eq!(g, [0, 0, 21, 21].map(|v| q().from_i64(v)).to_vec());
    }

    #[test]
    fn tangent_plane_examples() {
        let v = CubicSurface::diagonal(q(), &[1, 2, 3, 4]).unwrap();
        assert_eq!(v.tangent_plane(&pt(q(), &[1, -1, -1, 1])).unwrap(), ProjectivePlane::from_ints(q(), &[1, 2, 3, 4]).unwrap());
        let v = CubicSurface::diagonal(q(), &[1, 1, 7, 7]).unwrap();
        assert_eq!(v.tangent_plane(&pt(q(), &[1, -1, 0, 0])).unwrap(), ProjectivePlane::from_ints(q(), &[1, 1, 0, 0]).unwrap());
        assert!(matches!(v.tangent_plane(&pt(q(), &[1, 0, 0, 0])), Err(CubicError::NotOnSurface(_))));
    }

    #[test]
    fn restriction_examples() {
        let v = CubicSurface::diagonal(q(), &[1, 1, 7, 7]).unwrap();
        let plane = ProjectivePlane::from_ints(q(), &[1, 1, 0, 0]).unwrap();
        let basis = [pt(q(), &[1, -1, 0, 0]), pt(q(), &[0, 0, 1, 0]), pt(q(), &[0, 0, 0, 1])];
        let c = restrict_to_plane(v.form(), &plane, &basis).unwrap();
        let expect = CubicForm::from_int_terms(q(), 3, &[(&[0, 3, 0], 7), (&[0, 0, 3], 7)]).unwrap();
        assert_eq!(c.form(), &expect);
        assert_eq!(classify_curve(&c).unwrap().tag, CurveTag::Reducible);
        let bad = [pt(q(), &[1, 0, 0, 0]), pt(q(), &[0, 0, 1, 0]), pt(q(), &[0, 0, 0, 1])];
        assert_eq!(restrict_to_plane(v.form(), &plane, &bad), Err(CubicError::DegenerateBasis));

        let v = CubicSurface::diagonal(q(), &[1, 2, 3, 4]).unwrap();
        let p0 = pt(q(), &[1, -1, -1, 1]);
        let c = tangent_section(&v, &p0).unwrap();
        let u = c.from_ambient(&p0).unwrap();
        assert!(c.form().is_singular_at(&u).unwrap());
        assert_eq!(c.to_ambient(&u), p0);
    }

    #[test]
    fn classify_examples() {
        let f7 = Field::prime(7).unwrap();
        let node = PlaneCubicCurve::from_int_terms(f7, &[(&[1, 1, 1], 1), (&[3, 0, 0], 1), (&[0, 3, 0], 1)]).unwrap();
        let t = classify_curve(&node).unwrap();
        assert_eq!(t.tag, CurveTag::Multiplicative);
        assert_eq!(t.singular_point, Some(pt(f7, &[0, 0, 1])));
        assert_eq!(t.tangent_dirs, vec![pt(f7, &[0, 1, 0]), pt(f7, &[1, 0, 0])]);
        let cusp = PlaneCubicCurve::from_int_terms(f7, &[(&[2, 0, 1], 1), (&[0, 3, 0], 1)]).unwrap();
        let t = classify_curve(&cusp).unwrap();
        assert_eq!(t.tag, CurveTag::Additive);
        assert_eq!(t.tangent_dirs, vec![pt(f7, &[0, 1, 0])]);
        let smooth = PlaneCubicCurve::from_int_terms(f7, &[(&[0, 2, 1], 1), (&[3, 0, 0], -1), (&[0, 0, 3], -1)]).unwrap();
        assert_eq!(classify_curve(&smooth).unwrap().tag, CurveTag::Smooth);
        // x^2 z + y^3 + ... over Q: cusp, and nodal cubic with conjugate tangents
        let cusp_q = PlaneCubicCurve::from_int_terms(q(), &[(&[2, 0, 1], 1), (&[0, 3, 0], 1)]).unwrap();
        assert_eq!(classify_curve(&cusp_q).unwrap().tag, CurveTag::Additive);
        let tw = PlaneCubicCurve::from_int_terms(q(), &[(&[2, 0, 1], 1), (&[0, 2, 1], 1), (&[3, 0, 0], 1)]).unwrap();
        assert_eq!(classify_curve(&tw).unwrap().tag, CurveTag::TwistedMultiplicative);
        // conic plus tangent line: one singular point, reducible
        let tac = PlaneCubicCurve::from_int_terms(q(), &[(&[0, 1, 2], 1), (&[2, 1, 0], -1)]).unwrap();
        assert_eq!(classify_curve(&tac).unwrap().tag, CurveTag::Reducible);
        // double line times a line
        let dbl = PlaneCubicCurve::from_int_terms(q(), &[(&[2, 1, 0], 1)]).unwrap();
        assert_eq!(classify_curve(&dbl).unwrap().tag, CurveTag::MultipleSingular);
    }

    #[test]
    fn lines_over_q() {
        let v = CubicSurface::diagonal(q(), &[1, 1, 7, 7]).unwrap();
        let lines = v.lines().unwrap();
        let l = line_through(&pt(q(), &[0, 0, 1, -1]), &pt(q(), &[1, -1, 0, 0])).unwrap();
        assert!(lines.contains(&l));
        assert!(v.line_in_surface(&l));
        let v = CubicSurface::diagonal(q(), &[1, 2, 3, 5]).unwrap();
        assert!(v.lines().unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let f = CubicForm::from_int_terms(q(), 4, &[(&[2, 0, 1, 0], 3), (&[0, 0, 0, 3], -2)]).unwrap();
        let j = f.to_json();
        assert_eq!(CubicForm::from_json(q(), &j).unwrap(), f);
        let d = CubicForm::parse(q(), "[1,2,3,4]").unwrap();
        assert_eq!(d, CubicForm::diagonal_ints(q(), &[1, 2, 3, 4]).unwrap());
        let g = CubicForm::parse(q(), r#"{"z1^2*z3": "1", "z2^3": 1}"#).unwrap();
        assert_eq!(g.nvars(), 3);
    }
}

fn monomials_of_degree(nvars: usize, d: u8) -> Vec<Vec<u8>> {
    if nvars == 1 {
        return vec![vec![d]];
    }
    (0..=d)
        .rev()
        .flat_map(|k| {
            monomials_of_degree(nvars - 1, d - k).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

/// Nonvanishing of the Macaulay matrix of the four partials in degree 5
/// implies nonvanishing of their resultant, hence no singular point over the
/// algebraic closure. Retries under a few unimodular coordinate changes since
/// the matrix determinant carries an extraneous factor.
fn macaulay_certifies_smooth(f: &CubicForm) -> bool {
    let field = f.field();
    let cols = monomials_of_degree(4, 5);
    let index: std::collections::HashMap<Vec<u8>, usize> = cols.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    for shift in 0..6i64 {
        let g = if shift == 0 {
            f.clone()
        } else {
            let sub: Vec<Vec<FieldElem>> = (0..4)
                .map(|j| {
                    (0..4)
                        .map(|i| {
                            let v = if i == j {
                                1
                            } else if i + 1 == j {
                                shift
                            } else if j == 0 && i == 3 {
                                shift + 1
                            } else {
                                0
                            };
                            field.from_i64(v)
                        })
                        .collect()
                })
                .collect();
            match CubicForm::new(f.linear_substitute(&sub)) {
                Ok(g) => g,
                Err(_) => continue,
            }
        };
        let partials: Vec<Poly> = (0..4).map(|i| g.poly().derivative(i)).collect();
        let rows: Vec<Vec<FieldElem>> = cols
            .iter()
            .map(|alpha| {
                let i = alpha.iter().position(|&a| a >= 2).expect("degree 5 in 4 variables");
                let mut shift_exp = alpha.clone();
                shift_exp[i] -= 2;
                let mut row = vec![field.zero(); cols.len()];
                for (e, c) in partials[i].terms() {
                    let m: Vec<u8> = e.iter().zip(&shift_exp).map(|(a, b)| a + b).collect();
                    row[index[&m]] = c.clone();
                }
                row
            })
            .collect();
        if crate::linalg::rank(&rows) == cols.len() {
            return true;
        }
    }
    false
}
