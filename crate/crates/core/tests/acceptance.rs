//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treelike::cluster::{calinski_harabasz, cluster_and_score};
use treelike::hyperbolicity::quadruple_delta;
use treelike::io::{load_distance_matrix, write_distance_matrix, FileFormat};
use treelike::preprocess::pca_fit_transform;
use treelike::report::{read_report, InputKind};
use treelike::synthetic::{compare_synthetic_spaces, tree_metric_fixture, ultrametric_fixture, SyntheticKind};
use treelike::ultrametricity::triple_violation;
use treelike::{
    argmin_q_pair, build_distance_matrix, euclidean_distance, exact_delta, exact_ultrametricity,
    nj_scores, poincare_distance, q_matrix, sample_delta, DeltaFormula, DistanceMatrix,
    EmbeddingSet, MetricKind, MetricTag, Mode, Seed,
};

const BIN: &str = env!("CARGO_BIN_EXE_treelike");

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_points(n: usize, dim: usize, seed: u64) -> EmbeddingSet {
    let mut r = rng(seed);
    let rows = (0..n).map(|_| (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    EmbeddingSet::from_rows(rows).unwrap()
}

fn random_metric(n: usize, seed: u64) -> DistanceMatrix {
    build_distance_matrix(&random_points(n, 5, seed), MetricKind::Euclidean).unwrap()
}

fn distinct<const K: usize>(r: &mut ChaCha8Rng, n: usize) -> [usize; K] {
    loop {
        let mut q = [0; K];
        for x in q.iter_mut() {
            *x = r.gen_range(0..n);
        }
        if (0..K).all(|a| (a + 1..K).all(|b| q[a] != q[b])) {
            return q;
        }
    }
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for w in 0..4 {
                    let p = [a, b, c, w];
                    if (0..4).all(|x| (x + 1..4).all(|y| p[x] != p[y])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

type Outcome = Result<(), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn tree_fixtures_have_zero_delta() -> Outcome {
    for s in 0..20 {
        let t = tree_metric_fixture(24, Seed(s)).unwrap();
        let start = Instant::now();
        let stats = exact_delta(&t.matrix, DeltaFormula::FourPoint).unwrap();
        within(start.elapsed(), Duration::from_secs(5), "exact delta on 24 leaves")?;
        check(stats.delta_max <= 1e-9, || format!("seed {s}: delta_max {}", stats.delta_max))?;
    }
    Ok(())
}

fn ultrametric_fixtures_are_clean() -> Outcome {
    for s in 0..20 {
        let d = ultrametric_fixture(60, Seed(s)).unwrap();
        let u = exact_ultrametricity(&d, 1e-9).unwrap();
        check(u.num_violations == 0, || format!("seed {s}: {} violations", u.num_violations))?;
        let mut r = rng(1000 + s);
        for _ in 0..20 {
            let mut idx: Vec<usize> = (0..60).collect();
            for i in 0..15 {
                let j = r.gen_range(i..60);
                idx.swap(i, j);
            }
            let sub = d.submatrix(&idx[..15]).unwrap();
            let delta = exact_delta(&sub, DeltaFormula::FourPoint).unwrap().delta_max;
            check(delta <= 1e-9, || format!("seed {s}: sub-sample delta {delta}"))?;
        }
    }
    Ok(())
}

fn sampled_delta_consistent_with_exact() -> Outcome {
    for s in 0..10 {
        let d = build_distance_matrix(&random_points(15, 8, s), MetricKind::Euclidean).unwrap();
        let exact = exact_delta(&d, DeltaFormula::FourPoint).unwrap();
        let big = sample_delta(&d, 50_000, Seed(s), DeltaFormula::FourPoint).unwrap();
        check(big.delta_max <= exact.delta_max, || format!("seed {s}: sampled max above exact"))?;
        check(big.mode == Mode::Exact, || format!("seed {s}: 50000 >= C(15,4) should enumerate"))?;
        for (a, b, name) in [
            (big.delta_max, exact.delta_max, "max"),
            (big.delta_avg, exact.delta_avg, "avg"),
            (big.delta_std, exact.delta_std, "std"),
        ] {
            check((a - b).abs() <= 1e-12, || format!("seed {s}: enumeration {name} {a} vs exact {b}"))?;
        }
        let small = sample_delta(&d, 500, Seed(s), DeltaFormula::FourPoint).unwrap();
        check(small.mode == Mode::Sampled, || "500 samples should sample".into())?;
        check(small.delta_max <= exact.delta_max, || format!("seed {s}: 500-sample max above exact"))?;
    }
    Ok(())
}

fn four_point_is_max_slack() -> Outcome {
    let perms = permutations4();
    let mut r = rng(4);
    for t in 0..500 {
        let d = random_metric(8, 40_000 + t / 50);
        let q: [usize; 4] = distinct(&mut r, 8);
        let fp = quadruple_delta(&d, q, DeltaFormula::FourPoint).unwrap();
        let max_slack = perms
            .iter()
            .map(|p| quadruple_delta(&d, p.map(|i| q[i]), DeltaFormula::Slack).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        check((fp - max_slack).abs() <= 1e-12, || format!("{q:?}: four_point {fp} vs slack {max_slack}"))?;
    }
    Ok(())
}

fn violation_is_top_gap() -> Outcome {
    let d = random_metric(40, 5);
    let mut r = rng(5);
    for _ in 0..10_000 {
        let [i, j, k] = distinct::<3>(&mut r, 40);
        let mut sides = [d.get(i, j), d.get(i, k), d.get(j, k)];
        sides.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let nu = triple_violation(&d, i, j, k).unwrap();
        check((nu - (sides[0] - sides[1])).abs() <= 1e-12, || format!("({i},{j},{k}): {nu}"))?;
    }
    Ok(())
}

fn nj_small_cases() -> Outcome {
    for s in 0..100 {
        let d = random_metric(3, 6_000 + s);
        let total = d.get(0, 1) + d.get(0, 2) + d.get(1, 2);
        let q = q_matrix(&d).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let v = q[i * 3 + j].abs();
            check((v - total).abs() <= 1e-12, || format!("seed {s}: |Q({i},{j})| {v} vs sum {total}"))?;
        }
        let st = nj_scores(&d);
        check(st.nj_std == 0.0, || format!("seed {s}: nj_std {}", st.nj_std))?;
    }
    let two = DistanceMatrix::from_rows(&[vec![0.0, 3.0], vec![3.0, 0.0]], MetricTag::External).unwrap();
    let st = nj_scores(&two);
    check((st.nj_max, st.nj_avg, st.nj_std) == (0.0, 0.0, 0.0), || format!("n=2 gave {st:?}"))
}

fn nj_picks_cherries() -> Outcome {
    let mut r = rng(7);
    for s in 0..50 {
        let leaves = r.gen_range(5..=12);
        let t = tree_metric_fixture(leaves, Seed(7_000 + s)).unwrap();
        let pair = argmin_q_pair(&t.matrix).unwrap();
        check(t.is_cherry(pair), || format!("seed {s}, {leaves} leaves: {pair:?} not in {:?}", t.cherries))?;
    }
    Ok(())
}

fn closed_forms() -> Outcome {
    for r in [0.1, 0.5, 0.9] {
        let got = poincare_distance(&[0.0, 0.0], &[r, 0.0]).unwrap();
        let want = ((1.0 + r) / (1.0 - r)).ln();
        check((got - want).abs() <= 1e-12, || format!("r={r}: {got} vs {want}"))?;
    }
    let e = euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
    check(e == 5.0, || format!("euclidean gave {e}"))
}

fn synthetic_ordering() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<Seed> = (0..10).map(Seed).collect();
    let table = compare_synthetic_spaces(50, 10, 0.8, &seeds).unwrap();
    within(start.elapsed(), Duration::from_secs(60), "synthetic comparison")?;
    let mean = |k: SyntheticKind| table.spaces.iter().find(|s| s.kind == k).unwrap().mean_delta_avg;
    let (sphere, graph, disk) =
        (mean(SyntheticKind::Sphere), mean(SyntheticKind::DenseGraph), mean(SyntheticKind::PoincareDisk));
    println!("    mean delta_avg: sphere {sphere:.4}, dense graph {graph:.4}, poincare disk {disk:.4}");
    check(sphere > 0.0 && graph > 0.0 && disk > 0.0, || "all means must be positive".into())?;
    check(disk <= sphere && disk <= graph, || {
        format!("disk mean {disk:.4} is not the smallest (sphere {sphere:.4}, dense graph {graph:.4})")
    })
}

fn analyze_is_deterministic(dir: &Path) -> Outcome {
    let mut r = rng(10);
    let mut csv = String::new();
    for _ in 0..200 {
        let row: Vec<String> = (0..64).map(|_| format!("{:?}", gaussian(&mut r))).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let input = dir.join("emb_200x64.csv");
    std::fs::write(&input, csv).unwrap();
    let start = Instant::now();
    let mut reports = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.join(format!("report_w{workers}.json"));
        let status = Command::new(BIN)
            .args(["analyze", "--input"])
            .arg(&input)
            .args(["--seed", "42", "--workers", workers, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        check(status.success(), || format!("analyze with {workers} workers exited {status}"))?;
        reports.push(std::fs::read(&out).unwrap());
    }
    within(start.elapsed(), Duration::from_secs(30), "two analyze runs")?;
    check(reports[0] == reports[1], || "reports differ between 1 and 8 workers".into())
}

fn blobs(separation: f64, seed: u64) -> (EmbeddingSet, Vec<usize>) {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for c in 0..2 {
        for _ in 0..100 {
            rows.push(vec![c as f64 * separation + gaussian(&mut r), gaussian(&mut r)]);
            truth.push(c);
        }
    }
    (EmbeddingSet::from_rows(rows).unwrap(), truth)
}

fn clustering_sanity() -> Outcome {
    let (set, truth) = blobs(10.0, 11);
    let d = build_distance_matrix(&set, MetricKind::Euclidean).unwrap();
    let res = cluster_and_score(&set, &d, 2, Seed(42), 300, 1e-6).unwrap();
    let same = res.assignments.iter().zip(&truth).all(|(a, t)| a == t);
    let swapped = res.assignments.iter().zip(&truth).all(|(a, t)| *a == 1 - t);
    check(same || swapped, || "assignments do not match the generating blobs".into())?;
    check(res.silhouette >= 0.8, || format!("silhouette {}", res.silhouette))?;
    check(res.davies_bouldin <= 0.3, || format!("davies_bouldin {}", res.davies_bouldin))?;
    let ch: Vec<f64> = [2.0, 5.0, 10.0]
        .iter()
        .map(|&sep| {
            let (set, truth) = blobs(sep, 12);
            calinski_harabasz(&set, &truth).unwrap()
        })
        .collect();
    check(ch[0] < ch[1] && ch[1] < ch[2], || format!("calinski_harabasz not increasing: {ch:?}"))
}

fn pca_recovers_subspace() -> Outcome {
    let mut r = rng(12);
    let basis: Vec<Vec<f64>> = (0..3).map(|_| (0..50).map(|_| gaussian(&mut r)).collect()).collect();
    let rows = (0..200)
        .map(|_| {
            let c: Vec<f64> = (0..3).map(|_| gaussian(&mut r)).collect();
            (0..50)
                .map(|j| (0..3).map(|k| c[k] * basis[k][j]).sum::<f64>() + 1e-8 * gaussian(&mut r))
                .collect()
        })
        .collect();
    let set = EmbeddingSet::from_rows(rows).unwrap();
    let (out, model) = pca_fit_transform(&set, 0.99).unwrap();
    check(out.dim() == 3, || format!("output dim {}", out.dim()))?;
    for a in 0..model.components.len() {
        for b in 0..model.components.len() {
            let dot: f64 = model.components[a].iter().zip(&model.components[b]).map(|(x, y)| x * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            check((dot - want).abs() <= 1e-9, || format!("components {a},{b}: dot {dot}"))?;
        }
    }
    Ok(())
}

/// Invariants that hold for any metric, checked on a matrix read back from disk.
fn metric_invariants(d: &DistanceMatrix, label: &str) -> Outcome {
    let n = d.n();
    let exact = exact_delta(d, DeltaFormula::FourPoint).unwrap();
    let sampled = sample_delta(d, 2_000, Seed(1), DeltaFormula::FourPoint).unwrap();
    check(sampled.delta_max <= exact.delta_max, || format!("{label}: sampled max above exact"))?;
    let perms = permutations4();
    let mut r = rng(13);
    for _ in 0..200 {
        let q: [usize; 4] = distinct(&mut r, n);
        let fp = quadruple_delta(d, q, DeltaFormula::FourPoint).unwrap();
        let ms = perms
            .iter()
            .map(|p| quadruple_delta(d, p.map(|i| q[i]), DeltaFormula::Slack).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        check((fp - ms).abs() <= 1e-12, || format!("{label}: {q:?} four_point {fp} vs slack {ms}"))?;
        let [i, j, k] = [q[0], q[1], q[2]];
        let mut sides = [d.get(i, j), d.get(i, k), d.get(j, k)];
        sides.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let nu = triple_violation(d, i, j, k).unwrap();
        check((nu - (sides[0] - sides[1])).abs() <= 1e-12, || format!("{label}: nu mismatch"))?;
        let sub = d.submatrix(&[i, j, k]).unwrap();
        let total = sides.iter().sum::<f64>();
        let q3 = q_matrix(&sub).unwrap();
        check((q3[1].abs() - total).abs() <= 1e-12, || format!("{label}: n=3 collapse"))?;
    }
    Ok(())
}

fn external_matrix_full_report(dir: &Path) -> Outcome {
    let tree = tree_metric_fixture(20, Seed(99)).unwrap();
    let eucl = random_metric(20, 98);
    for (name, d, format) in [
        ("tree.csv", &tree.matrix, FileFormat::Csv),
        ("euclid.bin", &eucl, FileFormat::RawF64),
    ] {
        let path = dir.join(name);
        write_distance_matrix(d, &path, format).unwrap();
        let out = dir.join(format!("{name}.json"));
        let fmt = if format == FileFormat::Csv { "csv" } else { "raw_f64" };
        let status = Command::new(BIN)
            .args(["analyze", "--distance-matrix", "--format", fmt, "--input"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        check(status.success(), || format!("{name}: analyze exited {status}"))?;
        let report = read_report(&out).map_err(|e| e.to_string())?;
        check(report.input.kind == InputKind::DistanceMatrix, || format!("{name}: input kind"))?;
        check(report.metric == MetricTag::External, || format!("{name}: metric tag"))?;
        check(report.input.n == 20, || format!("{name}: n"))?;
        let delta = report.delta.ok_or(format!("{name}: no delta section"))?;
        let ultra = report.ultra.ok_or(format!("{name}: no ultra section"))?;
        let nj = report.nj.ok_or(format!("{name}: no nj section"))?;
        check(delta.mode == Mode::Exact && delta.samples_evaluated == 4845, || format!("{name}: delta mode"))?;
        check(ultra.total_triples == 1140, || format!("{name}: ultra triples {}", ultra.total_triples))?;
        check(nj.n == 20, || format!("{name}: nj n"))?;
        let text = std::fs::read_to_string(&out).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["schema_version", "tool_version", "input", "preprocessing", "metric", "delta", "ultra", "nj"] {
            check(value.get(key).is_some(), || format!("{name}: report lacks {key:?}"))?;
        }

        let loaded = load_distance_matrix(&path, format, false).map_err(|e| e.to_string())?;
        check(loaded.matrix.as_flat() == d.as_flat(), || format!("{name}: matrix changed on reload"))?;
        metric_invariants(&loaded.matrix, name)?;
    }
    let reloaded = load_distance_matrix(&dir.join("tree.csv"), FileFormat::Csv, false).unwrap().matrix;
    let delta = exact_delta(&reloaded, DeltaFormula::FourPoint).unwrap().delta_max;
    check(delta <= 1e-9, || format!("reloaded tree metric delta {delta}"))?;
    let pair = argmin_q_pair(&reloaded).unwrap();
    check(tree.is_cherry(pair), || format!("reloaded tree: {pair:?} not a cherry"))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let criteria: Vec<Criterion> = vec![
        ("1 tree metrics have zero delta", Box::new(tree_fixtures_have_zero_delta)),
        ("2 ultrametric fixtures have no violations", Box::new(ultrametric_fixtures_are_clean)),
        ("3 sampled delta consistent with exact", Box::new(sampled_delta_consistent_with_exact)),
        ("4 four_point equals max slack over labellings", Box::new(four_point_is_max_slack)),
        ("5 violation equals largest minus second side", Box::new(violation_is_top_gap)),
        ("6 NJ collapse at n=3 and guard at n=2", Box::new(nj_small_cases)),
        ("7 NJ argmin is a cherry", Box::new(nj_picks_cherries)),
        ("8 Poincare and Euclidean closed forms", Box::new(closed_forms)),
        ("9 synthetic spaces ordering", Box::new(synthetic_ordering)),
        ("10 analyze byte-identical across workers", Box::new(move || analyze_is_deterministic(d))),
        ("11 clustering sanity on Gaussian blobs", Box::new(clustering_sanity)),
        ("12 PCA recovers a 3-dim subspace", Box::new(pca_recovers_subspace)),
        ("13 external matrix gives full report and invariants", Box::new(move || external_matrix_full_report(d))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS criterion {name} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.2}s): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
