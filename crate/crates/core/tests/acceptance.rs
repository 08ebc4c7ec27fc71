//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Set `USFP_SLOW=1` to include the 5-dimensional table row and the full
//! 5-dimensional R10 scan. The process fails only when the set of failing
//! criteria differs from `KNOWN_FAILING`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use usfp_core::classify::{
    bundled_corpus, check_inclusions, classify_corpus, generate_dim2_corpus, Classification,
    ClassifyOptions, CorpusEntry,
};
use usfp_core::ewald::{
    find_star_ewald_point, is_star_witness, star_ewald, strong_ewald, strong_ewald_transform,
};
use usfp_core::fixtures::{example2_amended, Fixture};
use usfp_core::matroid::{has_r10_restriction, is_sfpdg, LinearMatroid};
use usfp_core::monotone::{
    deeply_smooth_via_displacements, frame_pair_witnesses, is_deeply_smooth, is_ut_free,
    vertex_is_negated_frame_sum,
};
use usfp_core::polytope::{is_unimodular_polytope, unimodular_equivalent};
use usfp_core::tumatrix::{ghouila_houri_is_tu, is_totally_unimodular, row_split, standard_form};
use usfp_core::{IntMatrix, LatticePolytope};

/// Criteria that fail for documented reasons; see the README.
const KNOWN_FAILING: &[u32] = &[13];

fn slow() -> bool {
    std::env::var("USFP_SLOW").is_ok_and(|v| v == "1")
}

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn polytopes(entries: &[CorpusEntry]) -> Vec<(String, LatticePolytope)> {
    entries
        .iter()
        .map(|e| {
            (
                e.id.clone(),
                e.polytope().expect("bundled entries are valid"),
            )
        })
        .collect()
}

fn usfps(dims: &[usize]) -> Vec<(String, LatticePolytope)> {
    dims.iter()
        .flat_map(|&d| polytopes(&bundled_corpus(d).unwrap()))
        .filter(|(_, p)| is_unimodular_polytope(p))
        .collect()
}

fn table_check(c: &Classification, dim: usize, want: (usize, usize, usize, usize, usize)) -> Check {
    let got = c.table.row(dim).map(|r| r.tuple());
    check(
        got == Some(want),
        format!("dim {dim}: got {got:?}, expected {want:?}"),
    )
}

fn criterion_1() -> Check {
    let gen = generate_dim2_corpus();
    let c = classify_corpus(&gen, ClassifyOptions::default());
    let mut t = table_check(&c, 2, (5, 5, 5, 5, 5));
    let bundled = polytopes(&bundled_corpus(2).unwrap());
    let matched = gen.iter().all(|g| {
        let p = g.polytope().unwrap();
        bundled
            .iter()
            .filter(|(_, b)| matches!(unimodular_equivalent(&p, b), Ok(Some(_))))
            .count()
            == 1
    });
    t.pass &= matched;
    t.detail += &format!("; generated classes match bundled one-to-one: {matched}");
    t
}

fn criterion_4() -> Check {
    let m = Fixture::Example1.matrix();
    match row_split(&m, &[0, 1, 2, 3, 4, 5]) {
        Ok(s) => {
            let sum: Vec<String> = s.sum.iter().map(BigInt::to_string).collect();
            let ok = s.plus == [0, 1, 2, 3] && s.minus == [4, 5] && sum == ["1", "-1", "1", "1"];
            check(
                ok,
                format!(
                    "plus {:?}, minus {:?}, sum ({})",
                    s.plus,
                    s.minus,
                    sum.join(",")
                ),
            )
        }
        Err(e) => check(false, e.to_string()),
    }
}

fn criterion_5() -> Check {
    let ex2 = LatticePolytope::new(example2_amended()).unwrap();
    let (u2, f2, g2) = (
        is_unimodular_polytope(&ex2),
        ex2.is_smooth_fano(),
        is_sfpdg(&ex2).unwrap(),
    );
    let m3 = Fixture::Example3.matrix();
    let ex3 = LatticePolytope::new(m3.clone()).unwrap();
    let tu3 = is_totally_unimodular(&m3).is_tu;
    let (f3, u3) = (ex3.is_smooth_fano(), is_unimodular_polytope(&ex3));
    let graphic3 = LinearMatroid::new(m3).is_graphic_matroid().unwrap();
    let pass = u2 && f2 && g2.is_none() && tu3 && f3 && u3 && graphic3.is_none();
    let printed = LatticePolytope::new(Fixture::Example2.matrix()).unwrap();
    println!(
        "    info: printed example 2 matrix: unimodular {}, smooth Fano {} (row 3 amended to (1,-1,1,0) above)",
        is_unimodular_polytope(&printed),
        printed.is_smooth_fano()
    );
    check(
        pass,
        format!(
            "example 2 (amended): unimodular {u2}, smooth Fano {f2}, digraph {}; example 3: TU {tu3}, smooth Fano {f3}, USFP {u3}, graphic {}",
            g2.is_some(),
            graphic3.is_some()
        ),
    )
}

fn in_cube(m: &IntMatrix) -> bool {
    m.iter_rows().flatten().all(|x| x.abs() <= BigInt::one())
}

fn criterion_6() -> Check {
    let mut failures = Vec::new();
    let polys = usfps(&[2, 3, 4]);
    let mut faces = 0usize;
    for (id, p) in &polys {
        for v in 0..p.num_vertices() {
            let ok = strong_ewald_transform(p, v).is_ok_and(|t| {
                let img = p.vertices().mul(&t).unwrap();
                t.det().unwrap().abs().is_one()
                    && in_cube(&img)
                    && img.row(v).iter().all(One::is_one)
            });
            if !ok {
                failures.push(format!("{id}: transform at vertex {v}"));
            }
        }
        let q = p.dual().unwrap();
        for face in q.faces().unwrap().iter().filter(|f| f.dim < q.dim()) {
            faces += 1;
            let ok = find_star_ewald_point(p, face)
                .is_ok_and(|l| is_star_witness(p, &face.facet_indices, &l));
            if !ok {
                failures.push(format!(
                    "{id}: star point for face {:?}",
                    face.vertex_indices
                ));
            }
        }
        if !strong_ewald(p).is_ok_and(|o| o.holds()) || !star_ewald(p).is_ok_and(|o| o.holds()) {
            failures.push(format!("{id}: definitional scan"));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} USFPs, {faces} dual faces, failures {failures:?}",
            polys.len()
        ),
    )
}

fn criterion_7() -> Check {
    let mut failures = Vec::new();
    let mut n = 0;
    for (id, p) in usfps(&[2, 3]) {
        for k in 0..p.facets().unwrap().len() {
            n += 1;
            if !standard_form(&p, k).is_ok_and(|m| is_totally_unimodular(&m).is_tu) {
                failures.push(format!("{id} facet {k}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{n} standard forms, failures {failures:?}"),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng) -> IntMatrix {
    let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
    let rows: Vec<Vec<i64>> = (0..r)
        .map(|_| (0..c).map(|_| rng.gen_range(-1..=1)).collect())
        .collect();
    IntMatrix::from_i64_rows(&rows).unwrap()
}

/// A random signed submatrix of a TU fixture, so both answers are well represented.
fn random_tu_submatrix(rng: &mut ChaCha8Rng, src: &IntMatrix) -> IntMatrix {
    let rows: Vec<usize> = (0..src.rows())
        .filter(|_| rng.gen_bool(0.6))
        .take(6)
        .collect();
    let cols: Vec<usize> = (0..src.cols())
        .filter(|_| rng.gen_bool(0.6))
        .take(6)
        .collect();
    let (rows, cols) = (
        if rows.is_empty() { vec![0] } else { rows },
        if cols.is_empty() { vec![0] } else { cols },
    );
    let flip: Vec<i64> = rows
        .iter()
        .map(|_| if rng.gen_bool(0.5) { -1 } else { 1 })
        .collect();
    let out: Vec<Vec<i64>> = rows
        .iter()
        .zip(&flip)
        .map(|(&i, s)| {
            cols.iter()
                .map(|&j| s * i64::try_from(&src.row(i)[j]).unwrap())
                .collect()
        })
        .collect();
    IntMatrix::from_i64_rows(&out).unwrap()
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7u64 << 32 | 2024);
    let mut mats: Vec<IntMatrix> = (0..1000).map(|_| random_matrix(&mut rng)).collect();
    let sources = [
        Fixture::Example1.matrix(),
        Fixture::K5Dual.matrix(),
        Fixture::R10.matrix(),
    ];
    for k in 0..300 {
        mats.push(random_tu_submatrix(&mut rng, &sources[k % sources.len()]));
    }
    mats.extend(Fixture::ALL.iter().map(|f| f.matrix()));
    let mut disagreements = 0;
    let mut tu = 0;
    for m in &mats {
        let a = is_totally_unimodular(m).is_tu;
        tu += usize::from(a);
        if a != ghouila_houri_is_tu(m) {
            disagreements += 1;
        }
    }
    check(
        disagreements == 0,
        format!(
            "{} matrices ({tu} TU), {disagreements} disagreements",
            mats.len()
        ),
    )
}

fn criterion_9(classes: &[&Classification]) -> Check {
    let bad: Vec<&str> = classes
        .iter()
        .flat_map(|c| &c.records)
        .filter(|r| r.flags.dual_dmp == Some(true) && r.flags.usfp != Some(true))
        .map(|r| r.id.as_str())
        .collect();
    let dmp = classes
        .iter()
        .flat_map(|c| &c.records)
        .filter(|r| r.flags.dual_dmp == Some(true))
        .count();
    check(
        bad.is_empty(),
        format!("{dmp} DMP duals, counterexamples {bad:?}"),
    )
}

fn duals(dims: &[usize]) -> Vec<(String, LatticePolytope)> {
    dims.iter()
        .flat_map(|&d| polytopes(&bundled_corpus(d).unwrap()))
        .map(|(id, p)| (id, p.dual().unwrap()))
        .collect()
}

fn criterion_10() -> Check {
    let qs = duals(&[2, 3]);
    let bad: Vec<String> = qs
        .iter()
        .filter(|(_, q)| is_deeply_smooth(q).ok() != deeply_smooth_via_displacements(q).ok())
        .map(|(id, _)| id.clone())
        .collect();
    check(
        bad.is_empty(),
        format!("{} duals, disagreements {bad:?}", qs.len()),
    )
}

fn criterion_11() -> Check {
    let (mut vertices, mut pairs) = (0, 0);
    let mut bad = Vec::new();
    for (id, q) in duals(&[2, 3]) {
        if is_ut_free(&q).unwrap() {
            for v in 0..q.num_vertices() {
                vertices += 1;
                if !vertex_is_negated_frame_sum(&q, v).is_ok_and(|c| c.holds) {
                    bad.push(format!("{id} vertex {v}"));
                }
            }
        }
        if is_deeply_smooth(&q).unwrap() {
            for w in frame_pair_witnesses(&q).unwrap() {
                pairs += 1;
                if !w.holds() {
                    bad.push(format!("{id} vertex {} pair {:?}", w.vertex, w.pair));
                }
            }
        }
    }
    check(bad.is_empty(), format!("{vertices} vertices of UT-free duals, {pairs} frame pairs of DMP duals, failures {bad:?}"))
}

fn criterion_12() -> Check {
    let r10 = Fixture::R10.matrix();
    let rows_sum_one = r10.iter_rows().all(|r| r.iter().sum::<BigInt>().is_one());
    let projective = LatticePolytope::from_points(&r10).is_projective();
    let dim5 = bundled_corpus(5).unwrap();
    if dim5.is_empty() {
        return check(false, "no 5-dimensional corpus bundled");
    }
    let limit = if slow() { usize::MAX } else { 40 };
    let mut tested = 0;
    let mut hits = Vec::new();
    for (id, p) in polytopes(&dim5) {
        if tested >= limit {
            break;
        }
        if !is_unimodular_polytope(&p) {
            continue;
        }
        let m = LinearMatroid::new(p.vertices().clone());
        if m.rank() != 5 {
            continue;
        }
        tested += 1;
        if has_r10_restriction(&m).unwrap_or(true) {
            hits.push(id);
        }
    }
    let scope = if slow() { "all" } else { "first" };
    check(
        rows_sum_one && !projective && hits.is_empty() && tested > 0,
        format!(
            "rows sum to 1: {rows_sum_one}; conv of rows projective: {projective}; R10 restriction in {}/{tested} ({scope}) dim-5 USFPs {hits:?}",
            hits.len()
        ),
    )
}

fn criterion_13(classes: &[&Classification]) -> Check {
    let records: Vec<_> = classes
        .iter()
        .flat_map(|c| c.records.iter().cloned())
        .collect();
    let rep = check_inclusions(&records);
    check(
        rep.ut_free_not_usfp.is_empty(),
        format!(
            "{} records, UT-free dual but not USFP: {:?} (empirical evidence, not proof; implication violations: {})",
            rep.records,
            rep.ut_free_not_usfp,
            rep.violations.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut failing = BTreeSet::new();
    let mut run = |n: u32, name: &str, f: &mut dyn FnMut() -> Check| {
        let t = Instant::now();
        let c = f();
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {n:>2}. {name}: {} ({:.2?})",
            c.detail,
            t.elapsed()
        );
        if !c.pass {
            failing.insert(n);
        }
    };

    let opts = ClassifyOptions::default();
    let mut t2 = None;
    let mut t3 = None;
    let mut t4 = None;
    run(1, "count table, dim 2 (generated)", &mut criterion_1);
    run(2, "count table, dim 3", &mut || {
        let c = classify_corpus(&bundled_corpus(2).unwrap(), opts);
        t2 = Some(c);
        let c = classify_corpus(&bundled_corpus(3).unwrap(), opts);
        let r = table_check(&c, 3, (18, 16, 16, 16, 16));
        t3 = Some(c);
        r
    });
    run(3, "count table, dim 4", &mut || {
        let c = classify_corpus(&bundled_corpus(4).unwrap(), opts);
        let mut r = table_check(&c, 4, (124, 74, 72, 95, 96));
        t4 = Some(c);
        if slow() {
            let c5 = classify_corpus(&bundled_corpus(5).unwrap(), opts);
            let r5 = table_check(&c5, 5, (866, 336, 300, 551, 554));
            r.pass &= r5.pass;
            r.detail += &format!("; {}", r5.detail);
        } else {
            r.detail += "; dim 5 skipped (set USFP_SLOW=1)";
        }
        r
    });
    run(4, "row split of the 6 x 4 example", &mut criterion_4);
    run(5, "example fixtures", &mut criterion_5);
    run(
        6,
        "strong and star Ewald constructions, dims 2-4",
        &mut criterion_6,
    );
    run(7, "standard forms are TU, dims 2-3", &mut criterion_7);
    run(8, "TU oracle agreement", &mut criterion_8);
    let classes: Vec<&Classification> = [&t2, &t3, &t4].into_iter().flatten().collect();
    run(9, "DMP duals come from USFPs, dims 2-4", &mut || {
        criterion_9(&classes)
    });
    run(
        10,
        "deep smoothness via displacements, dims 2-3",
        &mut criterion_10,
    );
    run(
        11,
        "frame sum and frame pair identities, dims 2-3",
        &mut criterion_11,
    );
    run(12, "R10 checks", &mut criterion_12);
    run(13, "UT-free duals come from USFPs, dims 2-4", &mut || {
        criterion_13(&classes)
    });

    let known: BTreeSet<u32> = KNOWN_FAILING.iter().copied().collect();
    println!("failing: {failing:?}; known failing: {known:?}");
    if failing == known {
        ExitCode::SUCCESS
    } else {
        println!("acceptance outcome differs from the documented known failures");
        ExitCode::FAILURE
    }
}
