use std::collections::BTreeSet;

use cubic_core::chord_tangent::{check_abelian, random_symmetric_quasigroup, QuasigroupView};
use cubic_core::combinatorial::*;
use cubic_core::cubic::{CubicForm, CubicSurface, CurveTag, PlaneCubicCurve};
use cubic_core::field::Field;
use cubic_core::linalg;
use cubic_core::projective::{all_points, ProjectivePoint};
use cubic_core::reconstruction::{build_cm_ca, points_of_type};

fn geometric_surface(p: u32) -> CubicSurface {
    let f = Field::Prime(p);
    match p {
        5 => CubicSurface::new(CubicForm::from_int_terms(f, 4, &[(&[3, 0, 0, 0], 1), (&[0, 3, 0, 0], 1), (&[0, 0, 3, 0], 1), (&[0, 0, 0, 3], 1), (&[1, 1, 1, 0], 4)]).unwrap()).unwrap(),
        _ => CubicSurface::new(CubicForm::from_int_terms(f, 4, &[(&[3, 0, 0, 0], 1), (&[0, 3, 0, 0], 1), (&[0, 0, 3, 0], 3), (&[0, 0, 0, 3], 1), (&[1, 1, 1, 0], 3)]).unwrap()).unwrap(),
    }
}

fn diagonal(p: u32, a: &[i64]) -> CubicSurface {
    CubicSurface::diagonal(Field::Prime(p), a).unwrap()
}

fn assert_fails(cs: &CombStructure, axiom: &str) {
    let r = check_all_axioms(cs);
    let v = r.verdict(axiom).unwrap();
    assert!(!v.pass, "{axiom} should fail");
    assert!(v.witness.as_ref().is_some_and(|w| !w.is_empty()), "{axiom} needs a witness");
}

#[test]
fn geometric_structures_satisfy_all_axioms() {
    for v in [geometric_surface(5), diagonal(5, &[1, 2, 3, 4]), geometric_surface(7), diagonal(7, &[1, 2, 3, 4])] {
        let cs = from_geometric(&v).unwrap();
        assert_eq!(cs.len(), v.rational_points().len());
        let r = check_all_axioms(&cs);
        assert!(r.passed(), "{:?}", r.verdicts);
        assert_eq!(r.verdicts.len(), 7);
        assert!(r.verdicts.iter().all(|x| x.checked > 0 || x.axiom == AX_LINES));
    }
}

#[test]
fn lines_are_detected_and_closed() {
    // x = -y, z = -w lies on the Fermat surface
    let cs = from_geometric(&diagonal(5, &[1, 1, 1, 1])).unwrap();
    let r = check_collinearity_axioms(&cs);
    assert!(r.passed());
    let want: BTreeSet<String> = ["(1:4:0:0)", "(0:0:1:4)", "(1:4:1:4)", "(1:4:2:3)", "(1:4:3:2)", "(1:4:4:1)"].map(String::from).into();
    assert!(r.lines.iter().any(|l| l.iter().cloned().collect::<BTreeSet<_>>() == want), "{:?}", r.lines);
}

#[test]
fn singular_surface_is_rejected() {
    let v = CubicSurface::new(CubicForm::from_int_terms(Field::Prime(5), 4, &[(&[3, 0, 0, 0], 1), (&[0, 3, 0, 0], 1), (&[0, 0, 3, 0], 1)]).unwrap()).unwrap();
    assert_eq!(from_geometric(&v), Err(CombError::SingularSurface));
}

#[test]
fn json_round_trip() {
    let cs = from_geometric(&geometric_surface(5)).unwrap();
    let j = cs.to_json();
    assert_eq!(j["format"], COMB_FORMAT);
    let back = CombStructure::from_json(&j).unwrap();
    assert_eq!(back, cs);
    let t = cs.collinear_triples().into_iter().find(|t| t[0] != t[1]).unwrap();
    let broken = cs.without_collinear(&[t]);
    let j = broken.to_json();
    assert!(j.get("collinear").is_none() && j.get("collinear_ordered").is_some());
    assert_eq!(CombStructure::from_json(&j).unwrap(), broken);
    assert!(matches!(CombStructure::from_json(&serde_json::json!({"points": ["a"], "collinear": [["a", "a", "b"]], "sections": []})), Err(CombError::Parse(_))));
}

#[test]
fn existence_failure() {
    let cs = from_geometric(&geometric_surface(5)).unwrap();
    let drop: Vec<[u32; 3]> = cs.thirds(0, 1).iter().map(|&r| [0, 1, r]).collect();
    assert_fails(&cs.without_collinear(&drop), AX_EXISTENCE);
}

#[test]
fn symmetry_failure() {
    let cs = from_geometric(&geometric_surface(5)).unwrap();
    let [a, b, c] = cs.collinear_triples().into_iter().find(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2]).unwrap();
    assert_fails(&cs.without_collinear(&[[b, a, c]]), AX_SYMMETRY);
}

#[test]
fn line_closure_failure() {
    let cs = from_geometric(&diagonal(5, &[1, 1, 1, 1])).unwrap();
    let l: Vec<u32> = cs.lines()[0].clone();
    assert_fails(&cs.without_collinear(&[[l[0], l[1], l[2]]]), AX_LINES);
}

#[test]
fn tangent_section_failure() {
    let cs = from_geometric(&geometric_surface(7)).unwrap();
    let c = cs.tangent_section(0);
    let idx = cs.sections().iter().position(|s| *s == c).unwrap();
    assert_fails(&cs.without_section(idx), AX_TANGENT);
}

fn non_abelian_quasigroup(n: usize) -> QuasigroupView {
    (0..1000)
        .filter_map(|seed| random_symmetric_quasigroup(n, seed))
        .find(|q| !check_abelian(q, true).unwrap().passed())
        .expect("a non-abelian symmetric quasigroup")
}

fn table_triples(q: &QuasigroupView, offset: u32) -> Vec<[u32; 3]> {
    let n = q.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let z = q.compose(x, y).unwrap();
            out.push([x as u32 + offset, y as u32 + offset, z as u32 + offset]);
        }
    }
    CombStructure::symmetrize(out)
}

#[test]
fn composition_failure_on_plane_section() {
    let q = non_abelian_quasigroup(6);
    let labels: Vec<String> = (0..6).map(|i| i.to_string()).collect();
    let cs = CombStructure::new(labels, table_triples(&q, 0), vec![(0..6).collect()]);
    assert_fails(&cs, AX_COMPOSITION);
}

#[test]
fn composition_failure_on_tangent_section() {
    // t is tangent to every point of the quasigroup carrier
    let q = non_abelian_quasigroup(6);
    let mut triples = table_triples(&q, 1);
    triples.extend(CombStructure::symmetrize((1..7).map(|x| [0, 0, x])));
    let labels: Vec<String> = std::iter::once("t".to_string()).chain((0..6).map(|i| i.to_string())).collect();
    let cs = CombStructure::new(labels, triples, vec![(0..7).collect()]);
    assert_eq!(cs.tangent_section(0), (0..7).collect::<Vec<u32>>());
    assert_fails(&cs, AX_COMPOSITION_TANGENT);
}

#[test]
fn pencil_failure() {
    let cs = from_geometric(&geometric_surface(5)).unwrap();
    let tangents: BTreeSet<Vec<u32>> = (0..cs.len() as u32).map(|p| cs.tangent_section(p)).collect();
    let idx = cs.sections().iter().position(|s| s.len() >= 3 && !tangents.contains(s)).unwrap();
    assert_fails(&cs.without_section(idx), AX_PENCILS);
}

#[test]
fn detection_matches_geometry() {
    let v = diagonal(11, &[1, 2, 3, 4]);
    let cs = from_geometric(&v).unwrap();
    let ms = points_of_type(&v, CurveTag::Multiplicative);
    let as_ = points_of_type(&v, CurveTag::Additive);
    let mut found = 0;
    for pm in &ms {
        let i = cs.index_of(&pm.to_string()).unwrap();
        assert_eq!(is_additive_like(&cs, i), Some(false));
        for pa in &as_ {
            let j = cs.index_of(&pa.to_string()).unwrap();
            let meet = cs.tangent_section(i).iter().filter(|x| cs.tangent_section(j).contains(x)).count();
            let geo = build_cm_ca(&v, pm, pa);
            match detect_cm_ca(&cs, i, j) {
                Ok(c) => {
                    found += 1;
                    assert_eq!(c.field.order, 11);
                    assert!(c.field.exhaustive);
                    assert_eq!(c.mu.m.len(), 10);
                    assert_eq!(c.mu.a.len(), 11);
                    let g = geo.expect("geometric configuration");
                    // combinatorial 0_m, ∞_m are the projections from p_a of the geometric ones
                    for x in [c.zero_m, c.inf_m] {
                        let x = ProjectivePoint::parse(Field::Prime(11), cs.label(x)).unwrap();
                        assert!([&g.zero_m, &g.inf_m].iter().any(|y| {
                            linalg::rank(&[x.coords().to_vec(), y.coords().to_vec(), pa.coords().to_vec()]) == 2
                        }));
                    }
                }
                Err(_) => assert!(geo.is_err() || meet != 3),
            }
        }
    }
    for pa in &as_ {
        assert_eq!(is_additive_like(&cs, cs.index_of(&pa.to_string()).unwrap()), Some(true));
    }
    assert!(found > 0);
}

#[test]
fn detection_preconditions() {
    let cs = from_geometric(&diagonal(5, &[1, 1, 1, 1])).unwrap();
    assert!(matches!(detect_cm_ca(&cs, 0, 0), Err(CombError::Precondition(_))));
    let l = cs.lines()[0].clone();
    assert!(matches!(detect_cm_ca(&cs, l[0], l[1]), Err(CombError::Precondition(_))));
}

#[test]
fn desarguesian_planes_are_pappian() {
    for p in [2, 3, 5, 7] {
        let (n, lines) = desarguesian_plane(p);
        assert_eq!(n as u32, p * p + p + 1);
        let r = check_projective_plane(n, &lines);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.pappus.checked > 0, p > 2);
    }
}

#[test]
fn broken_planes_fail_incidence() {
    let (n, mut lines) = desarguesian_plane(3);
    lines.pop();
    let r = check_projective_plane(n, &lines);
    assert!(!r.incidence.pass);
    // a triangle has no quadrangle
    let r = check_projective_plane(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
    assert!(!r.incidence.pass);
}

#[test]
fn nearfield_plane_fails_pappus() {
    let (n, lines) = nearfield_plane_9();
    let r = check_projective_plane(n, &lines);
    assert!(r.incidence.pass);
    assert!(!r.pappus.pass);
    assert!(r.pappus.witness.is_some());
}

/// Cycles of a smooth plane cubic over F_p and, for every point of P², the
/// cycles whose line passes through it.
fn curve_pencils(p: u32) -> (usize, Vec<[u32; 3]>, Vec<Vec<[u32; 3]>>) {
    let f = Field::Prime(p);
    let c = PlaneCubicCurve::from_int_terms(f, &[(&[0, 2, 1], 1), (&[3, 0, 0], -1), (&[1, 0, 2], -1), (&[0, 0, 3], -1)]).unwrap();
    let q = QuasigroupView::from_curve(&c).unwrap();
    let pts = q.points().unwrap().to_vec();
    let mut collinear = Vec::new();
    for x in 0..pts.len() {
        for y in 0..pts.len() {
            collinear.push([x as u32, y as u32, q.compose(x, y).unwrap() as u32]);
        }
    }
    let mut line_cycles: Vec<(Vec<_>, [u32; 3])> = Vec::new();
    for l in all_points(f, 3) {
        let on: Vec<usize> = (0..pts.len()).filter(|&i| linalg::dot(l.coords(), pts[i].coords()).is_zero()).collect();
        let cycle = match on.len() {
            1 => {
                let g = c.form().gradient(&pts[on[0]]).unwrap();
                let tangent = linalg::rank(&[g, l.coords().to_vec()]) == 1;
                (tangent && q.compose(on[0], on[0]) == Some(on[0])).then(|| [on[0]; 3])
            }
            2 => Some([on[0], on[1], q.compose(on[0], on[1]).unwrap()]),
            3 => Some([on[0], on[1], on[2]]),
            _ => None,
        };
        if let Some(mut t) = cycle {
            t.sort_unstable();
            line_cycles.push((l.coords().to_vec(), t.map(|i| i as u32)));
        }
    }
    let pencils = all_points(f, 3)
        .iter()
        .map(|x| line_cycles.iter().filter(|(l, _)| linalg::dot(l, x.coords()).is_zero()).map(|(_, t)| *t).collect())
        .collect();
    (pts.len(), collinear, pencils)
}

#[test]
fn curves_over_small_fields_are_not_large_field_curves() {
    for p in [5, 7] {
        let (n, collinear, pencils) = curve_pencils(p);
        let r = check_large_field_curve(n, &collinear, &pencils);
        assert_eq!(r.cycles, cycles_of(&collinear).len());
        assert!(!r.passed());
        assert!(!r.plane.passed() || r.clauses.iter().any(|c| !c.pass));
    }
}

#[test]
fn toy_structure_satisfies_every_clause() {
    let toy = search_large_field_toy(12).unwrap();
    let r = check_large_field_curve(toy.n, &toy.collinear, &toy.pencils);
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.cycles, 7);
    let mut broken = toy.pencils.clone();
    broken.pop();
    assert!(!check_large_field_curve(toy.n, &toy.collinear, &broken).passed());
}
