//! Height-ordered rational points on diagonal cubic surfaces
//! `Σ a_i x_i³ = 0`, weak generation, one-step descent and count fits.

use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const POINTS_FORMAT: &str = "mw-points/1";
pub const REPORT_FORMAT: &str = "mw-report/1";

/// Default memory budget for the meet-in-the-middle table.
pub const DEFAULT_MEMORY_BUDGET: usize = 512 << 20;
/// Upper limit on residue shards before giving up.
pub const MAX_SHARDS: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MwError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("memory budget exceeded: {needed} bytes per shard at {shards} shards; shard the search by residue class of x1 or raise the budget")]
    MemoryBudgetExceeded { needed: usize, shards: usize },
    #[error("insufficient data: {0} off-line points, at least 100 needed")]
    InsufficientData(usize),
    #[error("point {0} is not on the surface")]
    NotOnSurface(String),
    #[error("point {0} is not in the list")]
    NotInList(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Sum,
    Max,
}

impl Norm {
    pub fn height(self, x: &[i64; 4]) -> u64 {
        let it = x.iter().map(|v| v.unsigned_abs());
        match self {
            Norm::Sum => it.sum(),
            Norm::Max => it.max().unwrap_or(0),
        }
    }
}

/// Primitive integer point with first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HeightPoint {
    pub x: [i64; 4],
    pub h: u64,
    pub on_line: bool,
}

impl fmt::Display for HeightPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", point_string(&self.x))
    }
}

pub fn point_string(x: &[i64; 4]) -> String {
    format!("({}:{}:{}:{})", x[0], x[1], x[2], x[3])
}

/// Parses `(x1:x2:x3:x4)` and returns the canonical primitive representative.
pub fn parse_point(s: &str) -> Result<[i64; 4], MwError> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<i64> = body
        .split([':', ','])
        .map(|t| t.trim().parse::<i64>().map_err(|e| MwError::Parse(format!("{s}: {e}"))))
        .collect::<Result<_, _>>()?;
    let x: [i64; 4] = parts.try_into().map_err(|_| MwError::Parse(format!("{s}: expected four coordinates")))?;
    canonical(&x.map(i128::from)).ok_or_else(|| MwError::Parse(format!("{s}: zero or oversized point")))
}

/// Primitive representative with first nonzero coordinate positive.
pub fn canonical(x: &[i128; 4]) -> Option<[i64; 4]> {
    let g = x.iter().fold(0i128, |g, v| g.gcd(v));
    if g == 0 {
        return None;
    }
    let s = if x.iter().find(|v| **v != 0).is_some_and(|v| *v < 0) { -g } else { g };
    let mut out = [0i64; 4];
    for i in 0..4 {
        out[i] = i64::try_from(x[i] / s).ok()?;
    }
    Some(out)
}

/// A diagonal cubic surface `Σ a_i x_i³ = 0` over Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalSurface {
    pub a: [i64; 4],
    lines: Vec<[[usize; 2]; 2]>,
}

const PAIRINGS: [[[usize; 2]; 2]; 3] = [[[0, 1], [2, 3]], [[0, 2], [1, 3]], [[0, 3], [1, 2]]];

fn is_cube(n: i128) -> bool {
    let r = (n.unsigned_abs() as f64).cbrt().round() as i128;
    (r - 1..=r + 1).any(|c| c * c * c == n.abs())
}

impl DiagonalSurface {
    pub fn new(a: [i64; 4]) -> Result<Self, MwError> {
        if a.iter().any(|&c| c == 0) {
            return Err(MwError::InvalidConfig("diagonal coefficients must be nonzero".into()));
        }
        // x_i = -ρ x_j is rational iff a_j / a_i is a rational cube
        let ratio_cube = |i: usize, j: usize| is_cube(a[i] as i128 * a[i] as i128 * a[j] as i128);
        let lines = PAIRINGS
            .iter()
            .filter(|[[i, j], [k, l]]| ratio_cube(*i, *j) && ratio_cube(*k, *l))
            .copied()
            .collect();
        Ok(Self { a, lines })
    }

    pub fn parse(s: &str) -> Result<Self, MwError> {
        let v: Vec<i64> = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| MwError::InvalidConfig(format!("surface {s}: {e}"))))
            .collect::<Result<_, _>>()?;
        let a: [i64; 4] = v.try_into().map_err(|_| MwError::InvalidConfig(format!("surface {s}: four coefficients expected")))?;
        Self::new(a)
    }

    pub fn eval(&self, x: &[i64; 4]) -> i128 {
        (0..4).map(|i| self.a[i] as i128 * (x[i] as i128).pow(3)).sum()
    }

    pub fn contains(&self, x: &[i64; 4]) -> bool {
        self.eval(x) == 0
    }

    /// Pairings `{i,j},{k,l}` whose line `a_i x_i³ + a_j x_j³ = a_k x_k³ + a_l x_l³ = 0` is rational.
    pub fn rational_lines(&self) -> &[[[usize; 2]; 2]] {
        &self.lines
    }

    fn on_line(&self, x: &[i64; 4], line: &[[usize; 2]; 2]) -> bool {
        let part = |[i, j]: [usize; 2]| self.a[i] as i128 * (x[i] as i128).pow(3) + self.a[j] as i128 * (x[j] as i128).pow(3);
        part(line[0]) == 0 && part(line[1]) == 0
    }

    pub fn lines_through(&self, x: &[i64; 4]) -> Vec<usize> {
        (0..self.lines.len()).filter(|&i| self.on_line(x, &self.lines[i])).collect()
    }

    pub fn is_on_line(&self, x: &[i64; 4]) -> bool {
        !self.lines_through(x).is_empty()
    }

    fn point(&self, x: [i64; 4], norm: Norm) -> HeightPoint {
        HeightPoint { h: norm.height(&x), on_line: self.is_on_line(&x), x }
    }

    fn check_bound(&self, h: u64) -> Result<(), MwError> {
        if h == 0 {
            return Err(MwError::InvalidConfig("height bound must be at least 1".into()));
        }
        let amax = self.a.iter().map(|c| c.unsigned_abs() as u128).max().unwrap();
        if (h as u128).pow(3) * amax * 4 >= i64::MAX as u128 {
            return Err(MwError::InvalidConfig(format!("height bound {h} overflows 64-bit cube sums")));
        }
        Ok(())
    }
}

fn sort_points(v: &mut Vec<HeightPoint>) {
    v.sort_unstable_by(|p, q| (p.h, p.x).cmp(&(q.h, q.x)));
    v.dedup_by(|p, q| p.x == q.x);
}

/// Reference enumeration by four nested loops over the height ball.
pub fn enumerate_points(v: &DiagonalSurface, bound: u64, norm: Norm) -> Result<Vec<HeightPoint>, MwError> {
    v.check_bound(bound)?;
    let h = bound as i64;
    let cubes: Vec<[i64; 4]> = (-h..=h).map(|x| v.a.map(|c| c * x * x * x)).collect();
    let c = |i: usize, x: i64| cubes[(x + h) as usize][i];
    let rest = |used: i64| match norm {
        Norm::Sum => h - used,
        Norm::Max => h,
    };
    let mut out: Vec<HeightPoint> = (-h..=h)
        .into_par_iter()
        .flat_map_iter(|x1| {
            let mut found = Vec::new();
            let r1 = rest(x1.abs());
            for x2 in -r1..=r1 {
                let r2 = rest(x1.abs() + x2.abs());
                let s2 = c(0, x1) + c(1, x2);
                for x3 in -r2..=r2 {
                    let r3 = rest(x1.abs() + x2.abs() + x3.abs());
                    let s3 = s2 + c(2, x3);
                    for x4 in -r3..=r3 {
                        if s3 + c(3, x4) == 0 {
                            if let Some(x) = canonical(&[x1, x2, x3, x4].map(i128::from)) {
                                if x == [x1, x2, x3, x4] {
                                    found.push(v.point(x, norm));
                                }
                            }
                        }
                    }
                }
            }
            found
        })
        .collect();
    sort_points(&mut out);
    Ok(out)
}

/// Meet-in-the-middle enumeration: hashes `a_1x_1³ + a_2x_2³` over left pairs
/// and probes with `−(a_3x_3³ + a_4x_4³)`, sharded by key residue so that one
/// shard of the table fits in `memory_budget` bytes.
pub fn meet_in_middle_enumerate(v: &DiagonalSurface, bound: u64, norm: Norm, memory_budget: usize) -> Result<Vec<HeightPoint>, MwError> {
    v.check_bound(bound)?;
    let h = bound as i64;
    let left_pairs: usize = (0..=h)
        .map(|x1| match norm {
            Norm::Sum => 2 * (h - x1.abs()) as usize + 1,
            Norm::Max => 2 * h as usize + 1,
        })
        .sum();
    const ENTRY_BYTES: usize = 32;
    let mut shards = 1usize;
    while left_pairs * ENTRY_BYTES / shards > memory_budget {
        shards *= 2;
        if shards > MAX_SHARDS {
            return Err(MwError::MemoryBudgetExceeded {
                needed: left_pairs * ENTRY_BYTES / MAX_SHARDS,
                shards: MAX_SHARDS,
            });
        }
    }
    let cube = |i: usize, x: i64| v.a[i] * x * x * x;
    let width = |used: i64| match norm {
        Norm::Sum => h - used,
        Norm::Max => h,
    };
    let shard_of = |key: i64| (key as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40 & (shards as u64 - 1);
    let mut out = Vec::new();
    for shard in 0..shards as u64 {
        let mut left: Vec<(i64, i64, i64)> = Vec::new();
        // canonical points have (x1, x2) ≥ 0 lexicographically
        for x1 in 0..=h {
            let w = width(x1.abs());
            for x2 in if x1 == 0 { 0 } else { -w }..=w {
                let key = cube(0, x1) + cube(1, x2);
                if shard_of(key) == shard {
                    left.push((key, x1, x2));
                }
            }
        }
        left.sort_unstable();
        let mut index: FxHashMap<i64, (u32, u32)> = FxHashMap::default();
        let mut i = 0;
        while i < left.len() {
            let mut j = i;
            while j < left.len() && left[j].0 == left[i].0 {
                j += 1;
            }
            index.insert(left[i].0, (i as u32, j as u32));
            i = j;
        }
        let found: Vec<HeightPoint> = (-h..=h)
            .into_par_iter()
            .flat_map_iter(|x3| {
                let mut found = Vec::new();
                let w = width(x3.abs());
                for x4 in -w..=w {
                    let probe = -(cube(2, x3) + cube(3, x4));
                    if shard_of(probe) != shard {
                        continue;
                    }
                    let Some(&(s, e)) = index.get(&probe) else { continue };
                    for &(_, x1, x2) in &left[s as usize..e as usize] {
                        let x = [x1, x2, x3, x4];
                        let ok = match norm {
                            Norm::Sum => norm.height(&x) <= bound,
                            Norm::Max => true,
                        };
                        if ok && canonical(&x.map(i128::from)) == Some(x) {
                            found.push(v.point(x, norm));
                        }
                    }
                }
                found
            })
            .collect();
        out.extend(found);
    }
    sort_points(&mut out);
    Ok(out)
}

/// An enumerated list with a coordinate index.
#[derive(Debug, Clone)]
pub struct PointList {
    pub surface: DiagonalSurface,
    pub bound: u64,
    pub norm: Norm,
    pub points: Vec<HeightPoint>,
    index: FxHashMap<[i64; 4], u32>,
}

impl PointList {
    pub fn new(surface: DiagonalSurface, bound: u64, norm: Norm, points: Vec<HeightPoint>) -> Self {
        let index = points.iter().enumerate().map(|(i, p)| (p.x, i as u32)).collect();
        Self {
            surface,
            bound,
            norm,
            points,
            index,
        }
    }

    pub fn enumerate(surface: DiagonalSurface, bound: u64, norm: Norm) -> Result<Self, MwError> {
        let pts = meet_in_middle_enumerate(&surface, bound, norm, DEFAULT_MEMORY_BUDGET)?;
        Ok(Self::new(surface, bound, norm, pts))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, x: &[i64; 4]) -> Option<usize> {
        self.index.get(x).map(|&i| i as usize)
    }

    /// JSONL, one `{"p","h","on_line"}` record per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s.push_str(&json!({"p": p.to_string(), "h": p.h, "on_line": p.on_line}).to_string());
            s.push('\n');
        }
        s
    }

    /// Reads a JSONL points file; points are rechecked against the surface.
    pub fn from_jsonl(surface: DiagonalSurface, norm: Norm, text: &str) -> Result<Self, MwError> {
        #[derive(Deserialize)]
        struct Rec {
            p: String,
        }
        let mut pts = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let r: Rec = serde_json::from_str(line).map_err(|e| MwError::Parse(e.to_string()))?;
            let x = parse_point(&r.p)?;
            if !surface.contains(&x) {
                return Err(MwError::NotOnSurface(r.p));
            }
            pts.push(surface.point(x, norm));
        }
        sort_points(&mut pts);
        let bound = pts.last().map_or(0, |p| p.h);
        Ok(Self::new(surface, bound, norm, pts))
    }

    /// Off-line points with height at most `h`.
    pub fn count_off_line(&self, h: u64) -> usize {
        self.points.iter().filter(|p| p.h <= h && !p.on_line).count()
    }
}

/// Outcome of intersecting the line through two distinct points with V.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThirdPoint {
    Point([i64; 4]),
    LineInSurface,
}

/// Third intersection of the line `pq` with V for `p ≠ q`: `F(sp + tq) =
/// st(As + Bt)` gives `r = Bp − Aq`.
pub fn third_point(v: &DiagonalSurface, p: &[i64; 4], q: &[i64; 4]) -> ThirdPoint {
    let (mut a, mut b) = (0i128, 0i128);
    for i in 0..4 {
        let (pi, qi, c) = (p[i] as i128, q[i] as i128, v.a[i] as i128);
        a += 3 * c * pi * pi * qi;
        b += 3 * c * pi * qi * qi;
    }
    if a == 0 && b == 0 {
        return ThirdPoint::LineInSurface;
    }
    let r: [i128; 4] = std::array::from_fn(|i| b * p[i] as i128 - a * q[i] as i128);
    match canonical(&r) {
        Some(x) => ThirdPoint::Point(x),
        None => ThirdPoint::LineInSurface,
    }
}

/// Weak composition within the list: the third point when unique, all list
/// points of a common line in V, or all list points of the tangent section.
pub fn weak_compose(list: &PointList, p: usize, q: usize) -> Vec<usize> {
    let v = &list.surface;
    let (x, y) = (&list.points[p].x, &list.points[q].x);
    if p == q {
        let n: [i128; 4] = std::array::from_fn(|i| v.a[i] as i128 * (x[i] as i128).pow(2));
        return (0..list.len())
            .filter(|&i| {
                let z = &list.points[i].x;
                (0..4).map(|k| n[k] * z[k] as i128).sum::<i128>() == 0
            })
            .collect();
    }
    match third_point(v, x, y) {
        ThirdPoint::Point(r) => list.index_of(&r).into_iter().collect(),
        ThirdPoint::LineInSurface => {
            let lx = v.lines_through(x);
            let Some(&l) = v.lines_through(y).iter().find(|l| lx.contains(l)) else {
                return Vec::new();
            };
            (0..list.len()).filter(|&i| v.lines_through(&list.points[i].x).contains(&l)).collect()
        }
    }
}

/// A nonassociative commutative word over generator indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Word {
    Gen(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationRecord {
    pub point: usize,
    pub word_length: usize,
    pub max_intermediate_height: u64,
    #[serde(skip)]
    pub word: Word,
}

/// Weak closure result. `records[i]` is the first word reaching list point `i`.
#[derive(Debug, Clone)]
pub struct Closure {
    pub records: Vec<Option<GenerationRecord>>,
    pub budget_exhausted: bool,
    pub pairs_composed: u64,
}

impl Closure {
    pub fn is_generated(&self, i: usize) -> bool {
        self.records[i].is_some()
    }

    /// Word as a parenthesized string over `g0, g1, ...`.
    pub fn word_string(&self, i: usize) -> Option<String> {
        let r = self.records[i].as_ref()?;
        Some(match r.word {
            Word::Gen(g) => format!("g{g}"),
            Word::Pair(a, b) => format!("({}*{})", self.word_string(a)?, self.word_string(b)?),
        })
    }

    /// Evaluates the word of point `i` weakly and reports whether `i` is among the values.
    pub fn reevaluates(&self, list: &PointList, i: usize) -> bool {
        match self.records[i].as_ref().map(|r| &r.word) {
            Some(Word::Gen(_)) => true,
            Some(Word::Pair(a, b)) => weak_compose(list, *a, *b).contains(&i),
            None => false,
        }
    }
}

/// Breadth-first weak closure by word length. Words of length `n` combine
/// every pair of points first reached at lengths `n1 + n2 = n`; compositions
/// falling outside the list are dropped. Stops at `max_word_length` or after
/// `max_pairs` compositions, marking the result as budget-exhausted.
pub fn weak_closure(list: &PointList, gens: &[usize], max_word_length: usize, max_pairs: u64) -> Closure {
    let n = list.len();
    let mut records: Vec<Option<GenerationRecord>> = vec![None; n];
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (g, &i) in gens.iter().enumerate() {
        if records[i].is_none() {
            records[i] = Some(GenerationRecord {
                point: i,
                word_length: 1,
                max_intermediate_height: list.points[i].h,
                word: Word::Gen(g),
            });
            levels[1].push(i);
        }
    }
    let mut pairs = 0u64;
    let mut exhausted = false;
    let mut len = 2;
    loop {
        let top = levels.iter().rposition(|l| !l.is_empty()).unwrap_or(0);
        if top == 0 || len > 2 * top {
            break;
        }
        if len > max_word_length {
            exhausted = true;
            break;
        }
        let mut tasks: Vec<(usize, usize)> = Vec::new();
        for n1 in 1..=len / 2 {
            let n2 = len - n1;
            if n2 >= levels.len() {
                continue;
            }
            for (ia, &a) in levels[n1].iter().enumerate() {
                let start = if n1 == n2 { ia } else { 0 };
                for &b in &levels[n2][start..] {
                    tasks.push((a, b));
                }
            }
        }
        if pairs + tasks.len() as u64 > max_pairs {
            tasks.truncate((max_pairs - pairs) as usize);
            exhausted = true;
        }
        pairs += tasks.len() as u64;
        let results: Vec<Vec<usize>> = tasks.par_iter().map(|&(a, b)| weak_compose(list, a, b)).collect();
        let mut level = Vec::new();
        for (&(a, b), rs) in tasks.iter().zip(results) {
            for r in rs {
                if records[r].is_none() {
                    let ha = records[a].as_ref().unwrap().max_intermediate_height;
                    let hb = records[b].as_ref().unwrap().max_intermediate_height;
                    records[r] = Some(GenerationRecord {
                        point: r,
                        word_length: len,
                        max_intermediate_height: ha.max(hb).max(list.points[r].h),
                        word: Word::Pair(a, b),
                    });
                    level.push(r);
                }
            }
        }
        levels.push(level);
        if exhausted {
            break;
        }
        len += 1;
    }
    Closure {
        records,
        budget_exhausted: exhausted,
        pairs_composed: pairs,
    }
}

/// Summary of a closure against the height-ordered list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationSummary {
    /// Off-line points in the longest fully generated prefix (line points skipped).
    pub nr: usize,
    /// The same prefix counted with line points.
    pub nr_with_lines: usize,
    pub h_bad: Option<u64>,
    pub l: usize,
    pub generated: usize,
    pub generated_off_line: usize,
    pub budget_exhausted: bool,
    pub pairs_composed: u64,
}

pub fn summarize(list: &PointList, c: &Closure) -> GenerationSummary {
    let pts = &list.points;
    let first_bad = (0..pts.len()).find(|&i| !pts[i].on_line && !c.is_generated(i));
    let prefix = first_bad.unwrap_or(pts.len());
    let len = |i: usize| c.records[i].as_ref().map_or(0, |r| r.word_length);
    GenerationSummary {
        nr: (0..prefix).filter(|&i| !pts[i].on_line).count(),
        nr_with_lines: (0..prefix).take_while(|&i| c.is_generated(i)).count(),
        h_bad: first_bad.map(|i| pts[i].h),
        l: (0..prefix).map(len).max().unwrap_or(0),
        generated: (0..pts.len()).filter(|&i| c.is_generated(i)).count(),
        generated_off_line: (0..pts.len()).filter(|&i| c.is_generated(i) && !pts[i].on_line).count(),
        budget_exhausted: c.budget_exhausted,
        pairs_composed: c.pairs_composed,
    }
}

/// One-step descent witness `p = q∘r` with `h(q), h(r) < h(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Descent {
    pub q: usize,
    pub r: usize,
}

/// For each off-line point, the first descent witness in list order, if any.
/// Only unique third points count; `q ≠ r`.
pub fn descent_witnesses(list: &PointList) -> Vec<Option<Descent>> {
    let pts = &list.points;
    (0..pts.len())
        .into_par_iter()
        .map(|p| {
            if pts[p].on_line {
                return None;
            }
            let hp = pts[p].h;
            for q in 0..pts.len() {
                if pts[q].h >= hp {
                    break;
                }
                if let ThirdPoint::Point(r) = third_point(&list.surface, &pts[p].x, &pts[q].x) {
                    if let Some(r) = list.index_of(&r) {
                        if r != q && pts[r].h < hp {
                            return Some(Descent { q, r });
                        }
                    }
                }
            }
            None
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentRow {
    pub h: u64,
    pub points: usize,
    pub descendable: usize,
    pub d: Option<f64>,
}

/// Cumulative descent fractions at the given heights.
pub fn descent_table(list: &PointList, witnesses: &[Option<Descent>], heights: &[u64]) -> Vec<DescentRow> {
    heights
        .iter()
        .map(|&h| {
            let idx = (0..list.len()).filter(|&i| list.points[i].h <= h && !list.points[i].on_line);
            let (mut n, mut d) = (0, 0);
            for i in idx {
                n += 1;
                d += witnesses[i].is_some() as usize;
            }
            DescentRow {
                h,
                points: n,
                descendable: d,
                d: (n > 0).then(|| d as f64 / n as f64),
            }
        })
        .collect()
}

/// Heights at each tenth of the bound.
pub fn deciles(bound: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=10).map(|k| (bound * k).div_ceil(10)).collect();
    v.dedup();
    v
}

/// `bound, bound/2, ...` with `steps` rungs, ascending.
pub fn geometric_ladder(bound: u64, steps: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..steps).map(|k| bound >> k).filter(|&h| h >= 2).collect();
    v.reverse();
    v.dedup();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub h: u64,
    pub n: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountFit {
    pub picard_rank: u32,
    pub rows: Vec<CountRow>,
    pub constant: f64,
    pub rms_relative_residual: f64,
    pub max_over_min: f64,
}

/// Rows `N(H)` and `N(H) / (H (log H)^{r−1})`.
pub fn count_rows(counts: &[(u64, usize)], picard_rank: u32) -> Vec<CountRow> {
    counts
        .iter()
        .map(|&(h, n)| {
            let hf = h as f64;
            CountRow {
                h,
                n,
                ratio: n as f64 / (hf * hf.ln().powi(picard_rank as i32 - 1)),
            }
        })
        .collect()
}

pub fn list_counts(list: &PointList, ladder: &[u64]) -> Vec<(u64, usize)> {
    ladder.iter().map(|&h| (h, list.count_off_line(h))).collect()
}

/// Fits `N(H) ≈ c · H (log H)^{r−1}` over `ladder` with `c` the mean ratio.
pub fn count_fit_counts(counts: &[(u64, usize)], picard_rank: u32) -> Result<CountFit, MwError> {
    let total = counts.iter().map(|c| c.1).max().unwrap_or(0);
    if total < 100 {
        return Err(MwError::InsufficientData(total));
    }
    if picard_rank == 0 {
        return Err(MwError::InvalidConfig("picard rank must be at least 1".into()));
    }
    let rows = count_rows(counts, picard_rank);
    let k = rows.len() as f64;
    let constant = rows.iter().map(|r| r.ratio).sum::<f64>() / k;
    let rms = (rows.iter().map(|r| ((r.ratio - constant) / constant).powi(2)).sum::<f64>() / k).sqrt();
    let max = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
    Ok(CountFit {
        picard_rank,
        rows,
        constant,
        rms_relative_residual: rms,
        max_over_min: if min > 0.0 { max / min } else { f64::INFINITY },
    })
}

pub fn count_fit(list: &PointList, picard_rank: u32, ladder: &[u64]) -> Result<CountFit, MwError> {
    count_fit_counts(&list_counts(list, ladder), picard_rank)
}

/// CSV with columns `H, N(H), ratio, d`; missing values are empty.
pub fn csv_table(counts: &[CountRow], descent: &[DescentRow]) -> String {
    let mut hs: Vec<u64> = counts.iter().map(|r| r.h).chain(descent.iter().map(|r| r.h)).collect();
    hs.sort_unstable();
    hs.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["H", "N(H)", "ratio", "d"]).unwrap();
    for h in hs {
        let c = counts.iter().find(|r| r.h == h);
        let d = descent.iter().find(|r| r.h == h);
        let n = c.map(|c| c.n).or(d.map(|d| d.points));
        w.write_record([
            h.to_string(),
            n.map_or(String::new(), |n| n.to_string()),
            c.map_or(String::new(), |c| format!("{:.6}", c.ratio)),
            d.and_then(|d| d.d).map_or(String::new(), |d| format!("{d:.6}")),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Run report `{surface, gen, Nr, H_bad, L, d_table, count_table}`.
pub fn run_report(
    list: &PointList,
    gens: &[usize],
    closure: &Closure,
    descent: &[DescentRow],
    counts: &[CountRow],
) -> Value {
    let s = summarize(list, closure);
    json!({
        "format": REPORT_FORMAT,
        "surface": list.surface.a,
        "norm": list.norm,
        "list_bound": list.bound,
        "list_size": list.len(),
        "gen": gens.iter().map(|&g| list.points[g].to_string()).collect::<Vec<_>>(),
        "Nr": s.nr,
        "Nr_with_lines": s.nr_with_lines,
        "H_bad": s.h_bad,
        "L": s.l,
        "generated": s.generated,
        "generated_off_line": s.generated_off_line,
        "budget_exhausted": s.budget_exhausted,
        "pairs_composed": s.pairs_composed,
        "d_table": descent,
        "count_table": counts,
    })
}
