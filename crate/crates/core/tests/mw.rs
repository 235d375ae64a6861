use std::collections::BTreeSet;

use cubic_core::chord_tangent::compose_on_surface;
use cubic_core::cubic::CubicSurface;
use cubic_core::field::Field;
use cubic_core::mw::*;
use cubic_core::projective::ProjectivePoint;

const APPENDIX: [[i64; 4]; 4] = [[1, 2, 3, 4], [1, 2, 3, 5], [1, 1, 5, 25], [1, 1, 7, 7]];

fn surface(a: [i64; 4]) -> DiagonalSurface {
    DiagonalSurface::new(a).unwrap()
}

/// Brute force over the full box, keeping points by projective class.
fn brute_force(a: [i64; 4], bound: i64, norm: Norm) -> BTreeSet<[i64; 4]> {
    let mut out = BTreeSet::new();
    for x1 in -bound..=bound {
        for x2 in -bound..=bound {
            for x3 in -bound..=bound {
                for x4 in -bound..=bound {
                    let x = [x1, x2, x3, x4];
                    if x == [0; 4] || norm.height(&x) > bound as u64 {
                        continue;
                    }
                    let s: i128 = (0..4).map(|i| a[i] as i128 * (x[i] as i128).pow(3)).sum();
                    if s == 0 {
                        out.insert(canonical(&x.map(i128::from)).unwrap());
                    }
                }
            }
        }
    }
    out
}

fn coords(v: &[HeightPoint]) -> BTreeSet<[i64; 4]> {
    v.iter().map(|p| p.x).collect()
}

fn list(a: [i64; 4], bound: u64) -> PointList {
    PointList::enumerate(surface(a), bound, Norm::Sum).unwrap()
}

#[test]
fn small_lists_contain_known_points() {
    let l = list([1, 2, 3, 4], 4);
    assert!(l.index_of(&[1, -1, -1, 1]).is_some());
    let l = list([1, 1, 7, 7], 2);
    for x in [[0, 0, 1, -1], [1, -1, 0, 0]] {
        assert!(l.points[l.index_of(&x).unwrap()].on_line);
    }
    let l = list([1, 2, 3, 5], 3);
    assert!(l.index_of(&[0, 1, 1, -1]).is_some() && l.index_of(&[1, 1, -1, 0]).is_some());
    assert!(list([1, 1, 7, 7], 1).is_empty());
}

#[test]
fn enumerators_match_brute_force() {
    for a in APPENDIX {
        for (bound, norm) in [(12, Norm::Sum), (6, Norm::Max)] {
            let want = brute_force(a, bound, norm);
            let naive = enumerate_points(&surface(a), bound as u64, norm).unwrap();
            let mitm = meet_in_middle_enumerate(&surface(a), bound as u64, norm, DEFAULT_MEMORY_BUDGET).unwrap();
            assert_eq!(coords(&naive), want, "{a:?} {norm:?}");
            assert_eq!(naive, mitm);
        }
    }
}

#[test]
fn meet_in_middle_matches_naive_at_fifty_and_when_sharded() {
    for a in APPENDIX {
        let naive = enumerate_points(&surface(a), 50, Norm::Sum).unwrap();
        assert_eq!(naive, meet_in_middle_enumerate(&surface(a), 50, Norm::Sum, 4096).unwrap());
    }
    assert!(matches!(
        meet_in_middle_enumerate(&surface([1, 2, 3, 4]), 50, Norm::Sum, 0),
        Err(MwError::MemoryBudgetExceeded { .. })
    ));
    assert!(matches!(enumerate_points(&surface([1, 2, 3, 4]), 0, Norm::Sum), Err(MwError::InvalidConfig(_))));
    assert!(DiagonalSurface::new([1, 0, 3, 4]).is_err());
}

#[test]
fn lists_are_sorted_unique_and_on_the_surface() {
    for a in APPENDIX {
        let l = list(a, 60);
        let v = surface(a);
        for w in l.points.windows(2) {
            assert!((w[0].h, w[0].x) < (w[1].h, w[1].x));
        }
        for p in &l.points {
            assert!(v.contains(&p.x));
            assert_eq!(canonical(&p.x.map(i128::from)), Some(p.x));
            assert_eq!(p.on_line, v.is_on_line(&p.x));
        }
    }
}

#[test]
fn points_file_round_trip() {
    let l = list([1, 2, 3, 5], 40);
    let text = l.to_jsonl();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["p"], l.points[0].to_string());
    let back = PointList::from_jsonl(surface([1, 2, 3, 5]), Norm::Sum, &text).unwrap();
    assert_eq!(back.points, l.points);
    assert!(matches!(
        PointList::from_jsonl(surface([1, 2, 3, 5]), Norm::Sum, "{\"p\":\"(1:1:1:1)\"}"),
        Err(MwError::NotOnSurface(_))
    ));
}

fn rational(x: &[i64; 4]) -> ProjectivePoint {
    ProjectivePoint::from_ints(Field::Rational, x).unwrap()
}

#[test]
fn third_point_agrees_with_exact_composition() {
    for a in [[1, 2, 3, 5], [1, 2, 3, 4]] {
        let l = list(a, 30);
        let v = CubicSurface::diagonal(Field::Rational, &a).unwrap();
        for p in l.points.iter().take(8) {
            for q in l.points.iter().take(8) {
                if p == q {
                    continue;
                }
                let exact = compose_on_surface(&v, &rational(&p.x), &rational(&q.x)).unwrap();
                match third_point(&l.surface, &p.x, &q.x) {
                    ThirdPoint::Point(r) => assert_eq!(exact.point(), Some(&rational(&r))),
                    ThirdPoint::LineInSurface => assert!(exact.point().is_none()),
                }
            }
        }
    }
}

#[test]
fn weak_composition_cases() {
    let l = list([1, 2, 3, 5], 20);
    let (p, q) = (l.index_of(&[0, 1, 1, -1]).unwrap(), l.index_of(&[1, 1, -1, 0]).unwrap());
    assert_eq!(weak_compose(&l, p, q), vec![l.index_of(&[1, 6, 4, -5]).unwrap()]);
    let small = list([1, 2, 3, 5], 10);
    let (p, q) = (small.index_of(&[0, 1, 1, -1]).unwrap(), small.index_of(&[1, 1, -1, 0]).unwrap());
    assert!(weak_compose(&small, p, q).is_empty());

    let l = list([1, 1, 7, 7], 12);
    let (p, q) = (l.index_of(&[1, -1, 0, 0]).unwrap(), l.index_of(&[0, 0, 1, -1]).unwrap());
    let want: Vec<usize> = (0..l.len()).filter(|&i| {
        let x = l.points[i].x;
        x[0] == -x[1] && x[2] == -x[3]
    }).collect();
    assert!(want.len() > 2);
    assert_eq!(weak_compose(&l, p, q), want);

    let l = list([1, 2, 3, 4], 60);
    let g = l.index_of(&[1, -1, -1, 1]).unwrap();
    let want: Vec<usize> = (0..l.len()).filter(|&i| {
        let x = l.points[i].x;
        x[0] + 2 * x[1] + 3 * x[2] + 4 * x[3] == 0
    }).collect();
    assert!(want.contains(&g) && want.len() > 3);
    assert_eq!(weak_compose(&l, g, g), want);
}

/// Minimal leaf counts by relaxation over every weak composition.
fn min_word_lengths(l: &PointList, gens: &[usize]) -> Vec<Option<usize>> {
    let n = l.len();
    let mut best = vec![usize::MAX; n];
    for &g in gens {
        best[g] = 1;
    }
    let mut table = Vec::new();
    for a in 0..n {
        for b in a..n {
            table.push((a, b, weak_compose(l, a, b)));
        }
    }
    loop {
        let mut changed = false;
        for (a, b, rs) in &table {
            if best[*a] == usize::MAX || best[*b] == usize::MAX {
                continue;
            }
            for &r in rs {
                if best[*a] + best[*b] < best[r] {
                    best[r] = best[*a] + best[*b];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    best.into_iter().map(|b| (b != usize::MAX).then_some(b)).collect()
}

#[test]
fn closure_finds_shortest_words() {
    let l = list([1, 2, 3, 4], 600);
    let g = l.index_of(&[1, -1, -1, 1]).unwrap();
    let c = weak_closure(&l, &[g], usize::MAX, u64::MAX);
    assert!(!c.budget_exhausted);
    let want = min_word_lengths(&l, &[g]);
    for i in 0..l.len() {
        assert_eq!(c.records[i].as_ref().map(|r| r.word_length), want[i], "{}", l.points[i]);
        if c.is_generated(i) {
            assert!(c.reevaluates(&l, i));
            let r = c.records[i].as_ref().unwrap();
            assert!(r.max_intermediate_height >= l.points[i].h);
            let w = c.word_string(i).unwrap();
            assert_eq!(w.matches('g').count(), r.word_length);
        }
    }
}

#[test]
fn closure_trivial_cases_and_monotonicity() {
    let l = list([1, 2, 3, 5], 80);
    let all: Vec<usize> = (0..l.len()).collect();
    let s = summarize(&l, &weak_closure(&l, &all, 20, u64::MAX));
    assert_eq!((s.nr_with_lines, s.l, s.h_bad), (l.len(), 1, None));
    let s = summarize(&l, &weak_closure(&l, &[], 20, u64::MAX));
    assert_eq!((s.nr, s.generated), (0, 0));

    let gens: Vec<usize> = ["(0:1:1:-1)", "(1:1:-1:0)", "(2:-2:1:1)"].iter().map(|p| l.index_of(&parse_point(p).unwrap()).unwrap()).collect();
    let small = weak_closure(&l, &gens[..1], 6, u64::MAX);
    let more_gens = weak_closure(&l, &gens, 6, u64::MAX);
    let longer = weak_closure(&l, &gens[..1], 9, u64::MAX);
    let capped = weak_closure(&l, &gens, 6, 10);
    assert!(capped.budget_exhausted);
    for i in 0..l.len() {
        if small.is_generated(i) {
            assert!(more_gens.is_generated(i) && longer.is_generated(i));
        }
    }
    let bigger = list([1, 2, 3, 5], 160);
    let big_gens: Vec<usize> = gens.iter().map(|&g| bigger.index_of(&l.points[g].x).unwrap()).collect();
    let wider = weak_closure(&bigger, &big_gens, 6, u64::MAX);
    for i in 0..l.len() {
        if more_gens.is_generated(i) {
            assert!(wider.is_generated(bigger.index_of(&l.points[i].x).unwrap()));
        }
    }
    assert!(summarize(&l, &more_gens).nr > 0);
}

#[test]
fn descent_witnesses_are_valid() {
    let l = list([1, 2, 3, 4], 400);
    let w = descent_witnesses(&l);
    let v = CubicSurface::diagonal(Field::Rational, &[1, 2, 3, 4]).unwrap();
    let mut found = 0;
    for (p, d) in w.iter().enumerate() {
        let Some(d) = d else { continue };
        found += 1;
        let (x, q, r) = (&l.points[p], &l.points[d.q], &l.points[d.r]);
        assert!(q.h < x.h && r.h < x.h && d.q != d.r);
        let exact = compose_on_surface(&v, &rational(&q.x), &rational(&r.x)).unwrap();
        assert_eq!(exact.point(), Some(&rational(&x.x)));
    }
    assert!(found > 0);
    // the two points of height 3 have no lower points to descend to
    for (i, p) in l.points.iter().enumerate().filter(|(_, p)| p.h == 3) {
        assert!(w[i].is_none(), "{p}");
    }
    let t = descent_table(&l, &w, &deciles(400));
    assert_eq!(t.len(), 10);
    assert_eq!(t.last().unwrap().points, l.count_off_line(400));
}

#[test]
fn count_fit_on_sample_surface() {
    let l = list([1, 1, 7, 7], 300);
    let fit = count_fit(&l, 2, &geometric_ladder(300, 3)).unwrap();
    assert_eq!(fit.rows.len(), 3);
    for r in &fit.rows {
        assert_eq!(r.n, l.count_off_line(r.h));
        assert!((r.ratio - r.n as f64 / (r.h as f64 * (r.h as f64).ln())).abs() < 1e-12);
    }
    assert!(matches!(count_fit(&list([1, 2, 3, 4], 50), 1, &[25, 50]), Err(MwError::InsufficientData(_))));
    let csv = csv_table(&fit.rows, &[]);
    assert!(csv.starts_with("H,N(H),ratio,d\n"));
    assert_eq!(csv.lines().count(), 4);
}
