//! Exact polynomial arithmetic: sparse multivariate polynomials, dense
//! univariate polynomials, resultants and root finding in the ground field.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::field::{Field, FieldElem};

/// Exponent vector of a monomial.
pub type Exponents = Vec<u8>;

/// A sparse polynomial in `nvars` variables. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    field: Field,
    terms: BTreeMap<Exponents, FieldElem>,
}

impl Poly {
    pub fn zero(nvars: usize, field: Field) -> Self {
        Self {
            nvars,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: FieldElem) -> Self {
        let mut p = Self::zero(nvars, c.field());
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The linear form `Σ coeffs_i · x_i`.
    pub fn linear(coeffs: &[FieldElem]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n, coeffs[0].field());
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, field: Field, terms: impl IntoIterator<Item = (Exponents, FieldElem)>) -> Self {
        let mut p = Self::zero(nvars, field);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &FieldElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u8]) -> FieldElem {
        self.terms.get(e).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn add_term(&mut self, e: Exponents, c: FieldElem) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&-&self.field.one()))
    }

    pub fn scale(&self, c: &FieldElem) -> Poly {
        let mut out = Poly::zero(self.nvars, self.field);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars, self.field);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::constant(self.nvars, self.field.one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[FieldElem]) -> FieldElem {
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = &t * xi;
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars, self.field);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * &self.field.from_i64(e[var] as i64));
        }
        out
    }

    /// `self(L_1(y), ..., L_n(y))` where each `L_i` is a polynomial in the new variables.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars);
        let m = images[0].nvars;
        let mut out = Poly::zero(m, self.field);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(m, c.clone());
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&img.pow(k as u32));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Total degree (None for the zero polynomial).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max()
    }

    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        self.terms
            .keys()
            .all(|e| e.iter().map(|&k| k as u32).sum::<u32>() == d)
    }

    /// Terms with the given exponent of `var`, with that variable removed from
    /// the exponent bookkeeping left as zero.
    pub fn slice(&self, var: usize, k: u8) -> Poly {
        let mut out = Poly::zero(self.nvars, self.field);
        for (e, c) in &self.terms {
            if e[var] == k {
                let mut e2 = e.clone();
                e2[var] = 0;
                out.add_term(e2, c.clone());
            }
        }
        out
    }

    /// Specializes one variable to a value, keeping the variable count.
    pub fn specialize(&self, var: usize, value: &FieldElem) -> Poly {
        let mut out = Poly::zero(self.nvars, self.field);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[var];
            e2[var] = 0;
            out.add_term(e2, c * &value.pow(k as u32));
        }
        out
    }

    /// View as a univariate polynomial in `var` when every other variable has exponent zero.
    pub fn to_univariate(&self, var: usize) -> Option<UniPoly> {
        let mut coeffs = Vec::new();
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(i, &k)| i != var && k != 0) {
                return None;
            }
            let d = e[var] as usize;
            if coeffs.len() <= d {
                coeffs.resize(d + 1, self.field.zero());
            }
            coeffs[d] = c.clone();
        }
        Some(UniPoly::new(self.field, coeffs))
    }
}

/// Dense univariate polynomial, coefficients from low to high degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    field: Field,
    coeffs: Vec<FieldElem>,
}

impl UniPoly {
    pub fn new(field: Field, mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(FieldElem::is_zero) {
            coeffs.pop();
        }
        Self { field, coeffs }
    }

    pub fn zero(field: Field) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn constant(c: FieldElem) -> Self {
        Self::new(c.field(), vec![c])
    }

    pub fn x(field: Field) -> Self {
        Self::new(field, vec![field.zero(), field.one()])
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> FieldElem {
        self.coeffs.last().cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn eval(&self, x: &FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn add(&self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new(self.field, (0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new(self.field, (0..n).map(|i| &self.coeff(i) - &o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero(self.field);
        }
        let mut c = vec![self.field.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        UniPoly::new(self.field, c)
    }

    pub fn scale(&self, s: &FieldElem) -> UniPoly {
        UniPoly::new(self.field, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let inv = d.lead().try_inv().expect("nonzero lead");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (UniPoly::zero(self.field), self.clone());
        }
        let mut q = vec![self.field.zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = &r[i] * &inv;
            if c.is_zero() {
                continue;
            }
            for j in 0..=dd {
                let s = &c * &d.coeffs[j];
                r[i - dd + j] = &r[i - dd + j] - &s;
            }
            q[i - dd] = c;
        }
        (UniPoly::new(self.field, q), UniPoly::new(self.field, r))
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().try_inv().unwrap())
    }

    pub fn gcd(&self, o: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &self.field.from_i64(i as i64))
                .collect(),
        )
    }

    /// Distinct roots in the ground field, sorted, with multiplicities.
    /// `None` when the search is not supported (huge prime, or rational
    /// coefficients too large to factor at desk scale).
    pub fn roots(&self) -> Option<Vec<(FieldElem, usize)>> {
        if self.is_zero() {
            return None;
        }
        let candidates = match self.field {
            Field::Prime(p) => {
                if p > 1 << 20 {
                    return None;
                }
                self.field.elements().unwrap()
            }
            Field::Rational => rational_root_candidates(self)?,
        };
        let mut out = Vec::new();
        for r in candidates {
            let mut m = 0;
            let mut f = self.clone();
            let lin = UniPoly::new(self.field, vec![-&r, self.field.one()]);
            loop {
                if f.is_zero() || !f.eval(&r).is_zero() {
                    break;
                }
                f = f.divrem(&lin).0;
                m += 1;
            }
            if m > 0 {
                out.push((r, m));
            }
        }
        Some(out)
    }
}

/// Integer bound above which rational root search gives up.
const RATIONAL_ROOT_LIMIT: u64 = 1 << 50;

fn rational_root_candidates(f: &UniPoly) -> Option<Vec<FieldElem>> {
    let rats: Vec<BigRational> = f.coeffs.iter().map(|c| c.as_rational().unwrap().clone()).collect();
    let lcm = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = rats.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let mut out = vec![];
    // strip x^k factors: zero is a root
    let low = ints.iter().position(|c| !c.is_zero())?;
    if low > 0 {
        out.push(Field::Rational.zero());
    }
    let a0 = ints[low].abs();
    let an = ints.last().unwrap().abs();
    let (a0, an) = (a0.to_u64()?, an.to_u64()?);
    if a0 > RATIONAL_ROOT_LIMIT || an > RATIONAL_ROOT_LIMIT {
        return None;
    }
    let num = divisors(a0);
    let den = divisors(an);
    let mut seen = std::collections::BTreeSet::new();
    for &n in &num {
        for &d in &den {
            if n.gcd(&d) != 1 {
                continue;
            }
            for s in [1i64, -1] {
                let r = BigRational::new(BigInt::from(s) * BigInt::from(n), BigInt::from(d));
                if seen.insert(r.clone()) {
                    out.push(FieldElem::Rational(r));
                }
            }
        }
    }
    out.sort_by(|a, b| a.as_rational().unwrap().cmp(b.as_rational().unwrap()));
    out.dedup();
    Some(out)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = vec![];
    let mut large = vec![];
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Determinant of a small matrix of univariate polynomials (Laplace expansion).
pub fn poly_det(m: &[Vec<UniPoly>], field: Field) -> UniPoly {
    let n = m.len();
    if n == 0 {
        return UniPoly::constant(field.one());
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = UniPoly::zero(field);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<UniPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, c)| c.clone()).collect())
            .collect();
        let t = m[0][j].mul(&poly_det(&minor, field));
        acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Resultant of `f = Σ f_i y^i` and `g = Σ g_j y^j` (coefficients in K[x]) with
/// respect to `y`, using the formal degrees `f.len()-1` and `g.len()-1`.
pub fn resultant_y(f: &[UniPoly], g: &[UniPoly], field: Field) -> UniPoly {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return UniPoly::constant(field.one());
    }
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![UniPoly::zero(field); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![UniPoly::zero(field); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    poly_det(&rows, field)
}

/// All degree-3 exponent vectors in `n` variables, in lexicographically decreasing order.
pub fn cubic_monomials(n: usize) -> Vec<Exponents> {
    let mut out = Vec::new();
    fn rec(n: usize, left: u8, prefix: &mut Vec<u8>, out: &mut Vec<Exponents>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    rec(n, 3, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uq(c: &[i64]) -> UniPoly {
        UniPoly::new(Field::Rational, c.iter().map(|&v| Field::Rational.from_i64(v)).collect())
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(cubic_monomials(3).len(), 10);
        assert_eq!(cubic_monomials(4).len(), 20);
        assert_eq!(cubic_monomials(3)[0], vec![3, 0, 0]);
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (2x - 1)^2 (x + 3) = 4x^3 + 8x^2 - 11x + 3
        let f = uq(&[3, -11, 8, 4]);
        let r = f.roots().unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], (Field::Rational.from_i64(-3), 1));
        assert_eq!(r[1], (Field::Rational.from_ratio(1, 2).unwrap(), 2));
        assert_eq!(uq(&[0, 0, 1]).roots().unwrap(), vec![(Field::Rational.zero(), 2)]);
        assert!(uq(&[-2, 0, 1]).roots().unwrap().is_empty());
    }

    #[test]
    fn gcd_and_division() {
        let a = uq(&[-1, 0, 1]); // x^2 - 1
        let b = uq(&[1, 2, 1]); // (x+1)^2
        assert_eq!(a.gcd(&b), uq(&[1, 1]));
        let (q, r) = uq(&[3, -11, 8, 4]).divrem(&uq(&[3, 1]));
        assert!(r.is_zero());
        assert_eq!(q, uq(&[1, -4, 4]));
    }

    #[test]
    fn resultant_detects_common_root() {
        // f = y^2 - x, g = y - 1 ; Res_y = 1 - x
        let f = vec![uq(&[0, -1]), uq(&[]), uq(&[1])];
        let g = vec![uq(&[-1]), uq(&[1])];
        let r = resultant_y(&f, &g, Field::Rational);
        assert_eq!(r.roots().unwrap(), vec![(Field::Rational.one(), 1)]);
    }

    #[test]
    fn substitution_expands() {
        let k = Field::Rational;
        // (x + y)^3 evaluated through substitution of x -> u + v, y -> u - v gives 8u^3
        let f = Poly::linear(&[k.one(), k.one()]).pow(3);
        let img = vec![Poly::linear(&[k.one(), k.one()]), Poly::linear(&[k.one(), -k.one()])];
        let g = f.substitute(&img);
        assert_eq!(g, Poly::from_terms(2, k, [(vec![3, 0], k.from_i64(8))]));
    }
}
