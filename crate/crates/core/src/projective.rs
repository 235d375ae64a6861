//! Canonical projective points, lines and planes over Q or F_p.
//!
//! Points are always stored in canonical form, so structural equality is
//! projective equality:
//! * over Q the coordinates are coprime integers with the first nonzero one positive;
//! * over F_p the first nonzero coordinate is 1.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::{Field, FieldElem, FieldError};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectiveError {
    #[error("all coordinates are zero")]
    ZeroVector,
    #[error("points coincide")]
    CoincidentPoints,
    #[error("points are collinear")]
    CollinearInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot parse point {0:?}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Returns the canonical representative of a nonzero coordinate vector.
pub fn canonicalize(coords: &[FieldElem]) -> Result<Vec<FieldElem>, ProjectiveError> {
    let Some(lead) = coords.iter().position(|c| !c.is_zero()) else {
        return Err(ProjectiveError::ZeroVector);
    };
    let field = coords[lead].field();
    if let Some(c) = coords.iter().find(|c| c.field() != field) {
        return Err(FieldError::MixedFields(field, c.field()).into());
    }
    match field {
        Field::Prime(_) => {
            let inv = coords[lead].try_inv()?;
            Ok(coords.iter().map(|c| c * &inv).collect())
        }
        Field::Rational => {
            let rats: Vec<&BigRational> = coords.iter().map(|c| c.as_rational().unwrap()).collect();
            let lcm = rats
                .iter()
                .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            let ints: Vec<BigInt> = rats
                .iter()
                .map(|r| r.numer() * (&lcm / r.denom()))
                .collect();
            let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if ints[lead].is_negative() {
                g = -g;
            }
            Ok(ints
                .iter()
                .map(|x| FieldElem::Rational(BigRational::from_integer(x / &g)))
                .collect())
        }
    }
}

/// A point of P^2 or P^3 in canonical coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjectivePoint {
    coords: Vec<FieldElem>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<FieldElem>) -> Result<Self, ProjectiveError> {
        Ok(Self {
            coords: canonicalize(&coords)?,
        })
    }

    pub fn from_ints(field: Field, coords: &[i64]) -> Result<Self, ProjectiveError> {
        Self::new(coords.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn coords(&self) -> &[FieldElem] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn field(&self) -> Field {
        self.coords[0].field()
    }

    /// Coprime integer coordinates (over F_p: residues).
    pub fn integer_coords(&self) -> Vec<BigInt> {
        self.coords
            .iter()
            .map(|c| c.to_bigint().expect("canonical coordinates are integral"))
            .collect()
    }

    pub fn parse(field: Field, s: &str) -> Result<Self, ProjectiveError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(|| ProjectiveError::Parse(s.to_string()))?;
        let coords = inner
            .split(':')
            .map(|c| field.parse(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ProjectiveError::Parse(s.to_string()))?;
        if !(3..=4).contains(&coords.len()) {
            return Err(ProjectiveError::Parse(s.to_string()));
        }
        Self::new(coords)
    }

    fn check_dim(&self, other: &ProjectivePoint) -> Result<(), ProjectiveError> {
        if self.dim() != other.dim() {
            return Err(ProjectiveError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// `λ·self + μ·other` (not canonicalized; may be the zero vector).
    pub fn combine(&self, lambda: &FieldElem, other: &ProjectivePoint, mu: &FieldElem) -> Vec<FieldElem> {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| &(lambda * a) + &(mu * b))
            .collect()
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(":"))
    }
}

impl FromStr for ProjectivePoint {
    type Err = ProjectiveError;
    /// Parses a point over Q.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(Field::Rational, s)
    }
}

impl Ord for ProjectivePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.field()
            .cmp(&other.field())
            .then_with(|| self.dim().cmp(&other.dim()))
            .then_with(|| self.integer_coords().cmp(&other.integer_coords()))
    }
}

impl PartialOrd for ProjectivePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A line spanned by two distinct points. Equality compares the spanned subspace.
#[derive(Debug, Clone)]
pub struct ProjectiveLine {
    through: [ProjectivePoint; 2],
    rref: Vec<Vec<FieldElem>>,
}

impl PartialEq for ProjectiveLine {
    fn eq(&self, other: &Self) -> bool {
        self.rref == other.rref
    }
}

impl Eq for ProjectiveLine {}

impl Hash for ProjectiveLine {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rref.hash(state);
    }
}

pub fn line_through(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<ProjectiveLine, ProjectiveError> {
    p.check_dim(q)?;
    if p.field() != q.field() {
        return Err(FieldError::MixedFields(p.field(), q.field()).into());
    }
    if p == q {
        return Err(ProjectiveError::CoincidentPoints);
    }
    let (rref, _) = linalg::rref(&[p.coords.clone(), q.coords.clone()]);
    Ok(ProjectiveLine {
        through: [p.clone(), q.clone()],
        rref,
    })
}

impl ProjectiveLine {
    pub fn points_spanning(&self) -> (&ProjectivePoint, &ProjectivePoint) {
        (&self.through[0], &self.through[1])
    }

    pub fn dim(&self) -> usize {
        self.through[0].dim()
    }

    pub fn field(&self) -> Field {
        self.through[0].field()
    }

    /// The point `λ·p + μ·q` of the parametrization.
    pub fn point_at(&self, lambda: &FieldElem, mu: &FieldElem) -> Result<ProjectivePoint, ProjectiveError> {
        ProjectivePoint::new(self.through[0].combine(lambda, &self.through[1], mu))
    }

    pub fn contains(&self, x: &ProjectivePoint) -> bool {
        x.dim() == self.dim()
            && x.field() == self.field()
            && linalg::rank(&[
                self.through[0].coords.clone(),
                self.through[1].coords.clone(),
                x.coords.clone(),
            ]) == 2
    }

    /// All rational points over a finite field, in parameter order
    /// `(1:0), (0:1), (1:1), ..., (p-1:1)`.
    pub fn points(&self) -> Option<Vec<ProjectivePoint>> {
        let field = self.field();
        let els = field.elements()?;
        let mut out = vec![self.through[0].clone()];
        for t in els {
            out.push(self.point_at(&t, &field.one()).expect("independent span"));
        }
        Some(out)
    }

    /// Linear forms cutting out the line (one in P^2, two in P^3).
    pub fn equations(&self) -> Vec<ProjectivePoint> {
        linalg::kernel(&self.rref, self.dim(), self.field())
            .into_iter()
            .map(|v| ProjectivePoint::new(v).expect("kernel vector is nonzero"))
            .collect()
    }

    /// Intersection with a plane of P^3 (or a line of P^2 given by its equation).
    /// `None` when the line lies in it.
    pub fn meet(&self, equation: &[FieldElem]) -> Option<ProjectivePoint> {
        let a = linalg::dot(self.through[0].coords(), equation);
        let b = linalg::dot(self.through[1].coords(), equation);
        if a.is_zero() && b.is_zero() {
            return None;
        }
        Some(self.point_at(&b, &-&a).expect("nonzero combination"))
    }
}

impl fmt::Display for ProjectiveLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} , {}]", self.through[0], self.through[1])
    }
}

/// A plane of P^3, stored by its canonical coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePlane {
    coeffs: ProjectivePoint,
}

impl ProjectivePlane {
    pub fn new(coeffs: Vec<FieldElem>) -> Result<Self, ProjectiveError> {
        if coeffs.len() != 4 {
            return Err(ProjectiveError::DimensionMismatch {
                expected: 4,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            coeffs: ProjectivePoint::new(coeffs)?,
        })
    }

    pub fn from_ints(field: Field, coeffs: &[i64]) -> Result<Self, ProjectiveError> {
        Self::new(coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        self.coeffs.coords()
    }

    pub fn as_point(&self) -> &ProjectivePoint {
        &self.coeffs
    }

    pub fn field(&self) -> Field {
        self.coeffs.field()
    }

    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        p.dim() == 4 && p.field() == self.field() && linalg::dot(self.coeffs(), p.coords()).is_zero()
    }

    pub fn contains_line(&self, l: &ProjectiveLine) -> bool {
        let (a, b) = l.points_spanning();
        self.contains(a) && self.contains(b)
    }

    /// Three independent points spanning the plane, in a deterministic order.
    pub fn basis(&self) -> [ProjectivePoint; 3] {
        let k = linalg::kernel(&[self.coeffs().to_vec()], 4, self.field());
        let pts: Vec<ProjectivePoint> = k
            .into_iter()
            .map(|v| ProjectivePoint::new(v).expect("kernel vector is nonzero"))
            .collect();
        [pts[0].clone(), pts[1].clone(), pts[2].clone()]
    }

    pub fn intersect(&self, other: &ProjectivePlane) -> Option<ProjectiveLine> {
        if self == other {
            return None;
        }
        let k = linalg::kernel(
            &[self.coeffs().to_vec(), other.coeffs().to_vec()],
            4,
            self.field(),
        );
        let a = ProjectivePoint::new(k[0].clone()).ok()?;
        let b = ProjectivePoint::new(k[1].clone()).ok()?;
        line_through(&a, &b).ok()
    }

    /// All rational points of the plane over a finite field.
    pub fn points(&self) -> Option<Vec<ProjectivePoint>> {
        let field = self.field();
        let els = field.elements()?;
        let [b0, b1, b2] = self.basis();
        let mut out = Vec::new();
        let zero = field.zero();
        let one = field.one();
        let comb = |x: &FieldElem, y: &FieldElem, z: &FieldElem| -> ProjectivePoint {
            let v: Vec<FieldElem> = (0..4)
                .map(|i| &(&(x * &b0.coords[i]) + &(y * &b1.coords[i])) + &(z * &b2.coords[i]))
                .collect();
            ProjectivePoint::new(v).expect("independent basis")
        };
        for x in &els {
            for y in &els {
                out.push(comb(x, y, &one));
            }
            out.push(comb(x, &one, &zero));
        }
        out.push(comb(&one, &zero, &zero));
        Some(out)
    }
}

impl fmt::Display for ProjectivePlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeffs)
    }
}

pub fn plane_through(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    r: &ProjectivePoint,
) -> Result<ProjectivePlane, ProjectiveError> {
    p.check_dim(q)?;
    p.check_dim(r)?;
    if p.dim() != 4 {
        return Err(ProjectiveError::DimensionMismatch {
            expected: 4,
            got: p.dim(),
        });
    }
    let rows = [p.coords.clone(), q.coords.clone(), r.coords.clone()];
    let k = linalg::kernel(&rows, 4, p.field());
    if k.len() != 1 {
        return Err(ProjectiveError::CollinearInput);
    }
    ProjectivePlane::new(k[0].clone())
}

/// All points of P^{n-1}(F_p), n = 3 or 4, in a deterministic order.
pub fn all_points(field: Field, n: usize) -> Vec<ProjectivePoint> {
    let els = field.elements().expect("finite field");
    let p = els.len();
    let mut out = Vec::new();
    // leading coordinate 1 at position `lead`, zeros before it
    for lead in 0..n {
        let tail = n - lead - 1;
        let count = p.pow(tail as u32);
        for mut idx in 0..count {
            let mut v = vec![field.zero(); n];
            v[lead] = field.one();
            for j in (lead + 1..n).rev() {
                v[j] = els[idx % p].clone();
                idx /= p;
            }
            out.push(ProjectivePoint { coords: v });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pq(c: &[i64]) -> ProjectivePoint {
        ProjectivePoint::from_ints(Field::Rational, c).unwrap()
    }

    #[test]
    fn canonical_forms_over_q() {
        assert_eq!(pq(&[2, -2, -2, 2]).to_string(), "(1:-1:-1:1)");
        assert_eq!(pq(&[0, 3, 6, 9]).to_string(), "(0:1:2:3)");
        assert_eq!(pq(&[0, -3, 6, 9]).to_string(), "(0:1:-2:-3)");
        assert_eq!(
            ProjectivePoint::from_ints(Field::Rational, &[0, 0, 0, 0]),
            Err(ProjectiveError::ZeroVector)
        );
        let half = ProjectivePoint::new(vec![
            Field::Rational.from_ratio(1, 2).unwrap(),
            Field::Rational.from_ratio(-1, 3).unwrap(),
            Field::Rational.zero(),
        ])
        .unwrap();
        assert_eq!(half.to_string(), "(3:-2:0)");
    }

    #[test]
    fn canonical_forms_over_fp() {
        let p = ProjectivePoint::from_ints(Field::Prime(7), &[0, 3, 6, 2]).unwrap();
        assert_eq!(p.to_string(), "(0:1:2:3)");
    }

    #[test]
    fn parse_round_trip() {
        let p: ProjectivePoint = "(1:6:4:-5)".parse().unwrap();
        assert_eq!(p.to_string(), "(1:6:4:-5)");
        assert!("(1:6".parse::<ProjectivePoint>().is_err());
        assert!("(0:0:0)".parse::<ProjectivePoint>().is_err());
        let r = ProjectivePoint::parse(Field::Prime(5), "(2:4:1)").unwrap();
        assert_eq!(r.to_string(), "(1:2:3)");
    }

    #[test]
    fn line_parametrization_and_membership() {
        let p = pq(&[0, 0, 1, -1]);
        let q = pq(&[1, -1, 0, 0]);
        let l = line_through(&p, &q).unwrap();
        let k = Field::Rational;
        // λ·p + μ·q = (μ : -μ : λ : -λ)
        let x = l.point_at(&k.from_i64(2), &k.from_i64(5)).unwrap();
        assert_eq!(x, pq(&[5, -5, 2, -2]));
        assert!(l.contains(&x));
        assert!(!l.contains(&pq(&[1, 0, 0, 0])));
        assert_eq!(line_through(&p, &p), Err(ProjectiveError::CoincidentPoints));
        assert_eq!(l, line_through(&q, &p).unwrap());
    }

    #[test]
    fn plane_line_equation() {
        let l = line_through(&pq(&[1, 0, 0]), &pq(&[0, 1, 0])).unwrap();
        assert_eq!(l.equations(), vec![pq(&[0, 0, 1])]);
    }

    #[test]
    fn planes_through_points() {
        let e = plane_through(&pq(&[1, 0, 0, 0]), &pq(&[0, 1, 0, 0]), &pq(&[0, 0, 1, 0])).unwrap();
        assert_eq!(e, ProjectivePlane::from_ints(Field::Rational, &[0, 0, 0, 1]).unwrap());
        let collinear = plane_through(&pq(&[1, 0, 0, 0]), &pq(&[0, 1, 0, 0]), &pq(&[1, 1, 0, 0]));
        assert_eq!(collinear, Err(ProjectiveError::CollinearInput));
        let a = pq(&[1, -1, -1, 1]);
        let b = pq(&[0, 1, 1, -1]);
        let c = pq(&[1, 1, -1, 0]);
        let pl = plane_through(&a, &b, &c).unwrap();
        assert!(pl.contains(&a) && pl.contains(&b) && pl.contains(&c));
        // kernel of the 3x4 matrix by hand: c1 = 0, c2 = c3, c4 = c2 + c3
        assert_eq!(pl.as_point(), &pq(&[0, 1, 1, 2]));
    }

    #[test]
    fn enumeration_counts() {
        let f5 = Field::Prime(5);
        assert_eq!(all_points(f5, 3).len(), 31);
        assert_eq!(all_points(f5, 4).len(), 156);
        let pl = ProjectivePlane::from_ints(f5, &[1, 2, 3, 4]).unwrap();
        let pts = pl.points().unwrap();
        assert_eq!(pts.len(), 31);
        assert!(pts.iter().all(|x| pl.contains(x)));
        let l = line_through(&pts[0], &pts[1]).unwrap();
        assert_eq!(l.points().unwrap().len(), 6);
    }

    #[test]
    fn projective_equivalence_exhaustive_f5() {
        let f = Field::Prime(5);
        let els = f.elements().unwrap();
        for x in all_points(f, 3) {
            for c in els.iter().filter(|c| !c.is_zero()) {
                let scaled: Vec<FieldElem> = x.coords().iter().map(|v| v * c).collect();
                assert_eq!(ProjectivePoint::new(scaled).unwrap(), x);
            }
        }
    }
}
