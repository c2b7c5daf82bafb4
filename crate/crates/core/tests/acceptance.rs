//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use whitehead_pr::classifiers::{
    build_quantizer, fisher_scatter, fit_linear, kmeans, node_stats, KMeansInit, LabeledSet,
    LinearMethod, QuantizerKind,
};
use whitehead_pr::features::builtin_map;
use whitehead_pr::freegroup::{minimize, CyclicWord};
use whitehead_pr::harness::{
    clustering_experiment, evaluate, generate_dataset, train_pipeline, ClusterConfig, ClusterInit,
    DatasetKind, DatasetSpec, EvaluationReport, Label, LabeledWordSet, PipelineConfig,
    DEFAULT_STRATA,
};
use whitehead_pr::numerics::{
    least_squares, matrix_from_rows, mean_and_covariance, sym_eigen, RealMatrix, RealVector,
};

const SEEDS: [u64; 3] = [1, 2, 3];
const MAX_LEN: usize = 1000;
const PER_LEN: usize = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, name: &str, started: Instant, limit: Option<Duration>, outcome: Outcome) -> bool {
    let elapsed = started.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = outcome.pass && in_time;
    let timing = match limit {
        Some(l) => format!("{:.1}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    println!(
        "{} {n}. {name}: {} [{timing}]",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail
    );
    pass
}

// ---------------------------------------------------------------------------
// 1. minimization against a breadth-first orbit search

/// Rank-2 words as strings over `aAbB`, handled without the library.
mod oracle {
    pub fn inv(c: char) -> char {
        if c.is_ascii_lowercase() {
            c.to_ascii_uppercase()
        } else {
            c.to_ascii_lowercase()
        }
    }

    pub fn reduce(s: &str) -> String {
        let mut out: Vec<char> = Vec::new();
        for c in s.chars() {
            if out.last() == Some(&inv(c)) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        let mut v = &out[..];
        while v.len() >= 2 && v[0] == inv(v[v.len() - 1]) {
            v = &v[1..v.len() - 1];
        }
        v.iter().collect()
    }

    /// Least rotation under the order a < A < b < B.
    pub fn canonical(s: &str) -> String {
        let key = |c: char| "aAbB".find(c).unwrap();
        let chars: Vec<char> = s.chars().collect();
        (0..chars.len().max(1))
            .map(|r| chars[r..].iter().chain(&chars[..r]).copied().collect::<Vec<char>>())
            .min_by(|x, y| x.iter().map(|&c| key(c)).cmp(y.iter().map(|&c| key(c))))
            .unwrap_or_default()
            .into_iter()
            .collect()
    }

    /// The eight proper type II automorphisms of F(a, b), as images of a and b.
    pub const MOVES: [(&str, &str); 8] = [
        ("a", "ba"),
        ("a", "Ab"),
        ("a", "bA"),
        ("a", "ab"),
        ("ab", "b"),
        ("Ba", "b"),
        ("aB", "b"),
        ("ba", "b"),
    ];

    pub fn apply(mv: (&str, &str), w: &str) -> String {
        let image = |c: char| -> String {
            let base = if c.eq_ignore_ascii_case(&'a') { mv.0 } else { mv.1 };
            if c.is_ascii_lowercase() {
                base.to_string()
            } else {
                base.chars().rev().map(inv).collect()
            }
        };
        canonical(&reduce(&w.chars().map(image).collect::<String>()))
    }

    /// Canonical cyclically reduced words of every length up to `max`.
    pub fn all_cyclic(max: usize) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        let mut layer: Vec<String> = vec![String::new()];
        for _ in 0..max {
            let mut next = Vec::new();
            for w in &layer {
                for c in "aAbB".chars() {
                    if !w.ends_with(inv(c)) {
                        next.push(format!("{w}{c}"));
                    }
                }
            }
            for w in &next {
                let first = w.chars().next().unwrap();
                let last = w.chars().last().unwrap();
                if w.len() == 1 || first != inv(last) {
                    out.insert(canonical(w));
                }
            }
            layer = next;
        }
        out.into_iter().collect()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn criterion_minimization() -> Outcome {
    const CHECK: usize = 8;
    const SEARCH: usize = 12;
    let words = oracle::all_cyclic(SEARCH);
    let index: HashMap<&str, usize> = words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..words.len()).collect();
    for (i, w) in words.iter().enumerate() {
        for mv in oracle::MOVES {
            let img = oracle::apply(mv, w);
            if let Some(&j) = index.get(img.as_str()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut comp_min: HashMap<usize, usize> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        let root = find(&mut parent, i);
        let e = comp_min.entry(root).or_insert(usize::MAX);
        *e = (*e).min(w.len());
    }
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for (i, w) in words.iter().enumerate().filter(|(_, w)| w.len() <= CHECK) {
        let expected = comp_min[&find(&mut parent, i)];
        let got = minimize(&CyclicWord::parse(w, 2).unwrap()).0.len();
        checked += 1;
        if got != expected {
            mismatches.push(format!("{w}: greedy {got}, orbit {expected}"));
        }
    }
    Outcome {
        pass: mismatches.is_empty() && checked > 0,
        detail: format!(
            "{checked} cyclic words of length <= {CHECK}, search bound {SEARCH}, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    }
}

// ---------------------------------------------------------------------------
// 2, 3, 5. classification on D / Se

struct Split {
    train: LabeledWordSet,
    test: LabeledWordSet,
}

fn splits() -> Vec<Split> {
    SEEDS
        .iter()
        .map(|&s| {
            let spec = |kind, seed| DatasetSpec {
                per_length: PER_LEN,
                ..DatasetSpec::new(kind, 2, MAX_LEN, seed)
            };
            Split {
                train: generate_dataset(&spec(DatasetKind::D, 1000 + s)).unwrap(),
                test: generate_dataset(&spec(DatasetKind::Se, 2000 + s)).unwrap(),
            }
        })
        .collect()
}

fn run_protocol(splits: &[Split], features: &str) -> Vec<EvaluationReport> {
    splits
        .iter()
        .map(|s| {
            let p = train_pipeline(&s.train, &PipelineConfig::with_features(features)).unwrap();
            evaluate(&p, &s.test, &DEFAULT_STRATA, 50).unwrap()
        })
        .collect()
}

/// Accuracy per seed in stratum `|w| > t`, and whether all lie within
/// `spread` of their mean.
fn stratum(reports: &[EvaluationReport], t: usize, spread: f64) -> (Vec<f64>, bool) {
    let acc: Vec<f64> = reports.iter().map(|r| r.accuracy(t).unwrap_or(0.0)).collect();
    let mean = acc.iter().sum::<f64>() / acc.len() as f64;
    let stable = acc.iter().all(|a| (a - mean).abs() <= spread);
    (acc, stable)
}

fn fmt_acc(acc: &[f64]) -> String {
    acc.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join("/")
}

fn criterion_f6_accuracy(reports: &[EvaluationReport]) -> Outcome {
    let (all, stable_all) = stratum(reports, 0, 0.03);
    let (long, stable_long) = stratum(reports, 100, 0.03);
    let pass = all.iter().all(|&a| a >= 0.95) && long.iter().all(|&a| a >= 0.97) && stable_all && stable_long;
    Outcome {
        pass,
        detail: format!(
            "f6 regression, A(|w|>0) = {} (>= 0.95), A(|w|>100) = {} (>= 0.97), seeds {:?}",
            fmt_acc(&all),
            fmt_acc(&long),
            SEEDS
        ),
    }
}

fn criterion_small_maps(fstar: &[EvaluationReport], f1: &[EvaluationReport]) -> Outcome {
    let (a_star, stable_star) = stratum(fstar, 0, 0.03);
    let (a_f1, stable_f1) = stratum(f1, 0, 0.03);
    let pass = a_star.iter().all(|&a| a >= 0.96) && a_f1.iter().all(|&a| a >= 0.92) && stable_star && stable_f1;
    Outcome {
        pass,
        detail: format!(
            "fstar A = {} (>= 0.96), f1 A = {} (>= 0.92)",
            fmt_acc(&a_star),
            fmt_acc(&a_f1)
        ),
    }
}

fn criterion_separation(reports: &[EvaluationReport]) -> Outcome {
    let r = &reports[0];
    let beyond = r.mass_beyond(0.5);
    let overlap = r.histogram.overlap_mass();
    Outcome {
        pass: beyond <= 0.05 && overlap <= 0.05,
        detail: format!(
            "f6 scores on Se: mass on the wrong side of 0.5 = {beyond:.4}, shared histogram mass ({} bins) = {overlap:.4} (both <= 0.05)",
            r.histogram.bins.len()
        ),
    }
}

// ---------------------------------------------------------------------------
// 4. clustering

fn criterion_clustering(splits: &[Split]) -> Outcome {
    let set = splits[0].train.filter(Label::Nonminimal);
    let map = builtin_map("f2", 2).unwrap();
    let seed = 7;
    let est = clustering_experiment(&set, &map, &ClusterConfig::new(ClusterInit::Estimated, seed)).unwrap();
    let rnd = clustering_experiment(&set, &map, &ClusterConfig::new(ClusterInit::Random, seed)).unwrap();
    let clustered = est.model.assignments.len();
    let (e, r) = (&est.report, &rnd.report);
    Outcome {
        pass: clustered >= 4000 && e.avg_r_max >= 0.90 && e.avg_r_max >= r.avg_r_max,
        detail: format!(
            "{clustered} clustered words; estimated avg/max/min R_max = {:.3}/{:.3}/{:.3}; random = {:.3}/{:.3}/{:.3}",
            e.avg_r_max, e.max_r_max, e.min_r_max, r.avg_r_max, r.max_r_max, r.min_r_max
        ),
    }
}

// ---------------------------------------------------------------------------
// 6. numerics properties

const INSTANCES: usize = 1000;

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect()
}

fn random_two_class(rng: &mut ChaCha8Rng) -> LabeledSet {
    let d = rng.gen_range(1..6);
    let n = rng.gen_range(4..40);
    let rows = random_rows(rng, n, d);
    let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    labels[0] = 1;
    labels[1] = 2;
    LabeledSet::new(rows, labels, 2).unwrap()
}

fn criterion_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut failures: Vec<String> = Vec::new();
    let fail = |name: &str, ok: bool, failures: &mut Vec<String>| {
        if !ok && !failures.iter().any(|f| f == name) {
            failures.push(name.to_string());
        }
    };

    for _ in 0..INSTANCES {
        // covariance is positive semidefinite
        let d = rng.gen_range(1..9);
        let n = rng.gen_range(2..30);
        let samples: Vec<RealVector> = random_rows(&mut rng, n, d)
            .into_iter()
            .map(RealVector::from_vec)
            .collect();
        let (_, cov) = mean_and_covariance(&samples).unwrap();
        let e = sym_eigen(&cov).unwrap();
        fail(
            "covariance PSD",
            e.values[d - 1] >= -1e-9 * e.values[0].abs().max(f64::MIN_POSITIVE),
            &mut failures,
        );

        // eigen reconstruction
        let d = rng.gen_range(1..11);
        let a = RealMatrix::from_fn(d, d, |_, _| rng.gen_range(-5.0..5.0));
        let c = &a + a.transpose();
        let e = sym_eigen(&c).unwrap();
        let rel = (e.reconstruct() - &c).norm() / c.norm().max(f64::MIN_POSITIVE);
        fail("eigen reconstruction", rel < 1e-9, &mut failures);

        // normal equation residual, well-conditioned systems
        let d = rng.gen_range(1..7);
        let n = rng.gen_range(d + 5..40);
        let a = matrix_from_rows(&random_rows(&mut rng, n, d)).unwrap();
        let ata = a.tr_mul(&a);
        let ev = sym_eigen(&ata).unwrap().values;
        if ev[d - 1] > 1e-3 * ev[0] {
            let b = RealVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let v = least_squares(&a, &b).unwrap();
            let residual = a.tr_mul(&(&a * v - &b)).norm();
            fail("normal-equation residual", residual < 1e-8, &mut failures);
        }

        // scatter decomposition
        let set = random_two_class(&mut rng);
        let s = fisher_scatter(&set).unwrap();
        fail(
            "S = S_w + S_b",
            (&s.total - (&s.within + &s.between)).amax() < 1e-10,
            &mut failures,
        );

        // χ² − PR is fixed by the node totals
        let m = rng.gen_range(2..5);
        let totals: Vec<usize> = (0..m).map(|_| rng.gen_range(0..50)).collect();
        if totals.iter().sum::<usize>() > 0 {
            let mut diffs = Vec::new();
            for _ in 0..5 {
                let left: Vec<usize> = totals.iter().map(|&t| rng.gen_range(0..=t)).collect();
                let right: Vec<usize> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
                let (pr, chi2) = node_stats(&left, &right).unwrap();
                diffs.push(chi2 - pr);
            }
            fail(
                "chi2 - PR constant",
                diffs.iter().all(|d| (d - diffs[0]).abs() < 1e-9),
                &mut failures,
            );
        }

        // hard-margin SVM on separable data through the origin
        let d = rng.gen_range(2..5);
        let normal: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = rng.gen_range(4..25);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        while rows.len() < n {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let side = x.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>() / norm;
            if side.abs() >= 0.3 {
                labels.push(if side > 0.0 { 1 } else { 2 });
                rows.push(x);
            }
        }
        if labels.contains(&1) && labels.contains(&2) {
            let set = LabeledSet::new(rows.clone(), labels.clone(), 2).unwrap();
            match fit_linear(&set, LinearMethod::Svm) {
                Ok(model) => {
                    let ok = rows.iter().zip(&labels).all(|(x, &l)| {
                        let y = if l == 1 { 1.0 } else { -1.0 };
                        y * model.score(x).unwrap() >= 1.0 - 1e-6
                    });
                    fail("SVM margins", ok, &mut failures);
                }
                Err(_) => fail("SVM margins", false, &mut failures),
            }
        }

        // K-means squared objective never increases
        let n = rng.gen_range(4..60);
        let d = rng.gen_range(1..4);
        let points = random_rows(&mut rng, n, d);
        let k = rng.gen_range(1..5.min(n));
        let model = kmeans(&points, k, KMeansInit::Sample(rng.gen()), 100).unwrap();
        let ok = model
            .objective_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-9 * w[0].max(1.0));
        fail("k-means monotone", ok, &mut failures);

        // min-error quantizer never worse than equal interval
        let n = rng.gen_range(4..80);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
        let bins = rng.gen_range(2..12);
        let me = build_quantizer(&scores, &labels, bins, QuantizerKind::MinError).unwrap();
        let ei = build_quantizer(&scores, &labels, bins, QuantizerKind::EqualInterval).unwrap();
        fail(
            "min-error quantizer",
            me.error(&scores, &labels) <= ei.error(&scores, &labels) + 1e-12,
            &mut failures,
        );
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{INSTANCES} instances each of 8 properties")
        } else {
            format!("violated: {}", failures.join(", "))
        },
    }
}

// ---------------------------------------------------------------------------
// 7. determinism across thread counts

fn artifacts() -> Vec<String> {
    let spec = |kind, seed| DatasetSpec {
        per_length: 10,
        size: 800,
        ..DatasetSpec::new(kind, 2, 300, seed)
    };
    let mut out = Vec::new();
    for kind in [DatasetKind::D, DatasetKind::S10, DatasetKind::SR, DatasetKind::SP] {
        out.push(generate_dataset(&spec(kind, 5)).unwrap().to_tsv_string());
    }
    let train = generate_dataset(&spec(DatasetKind::D, 6)).unwrap();
    let test = generate_dataset(&spec(DatasetKind::Se, 7)).unwrap();
    let pipeline = train_pipeline(&train, &PipelineConfig::default()).unwrap();
    out.push(pipeline.to_json().unwrap());
    let r = evaluate(&pipeline, &test, &DEFAULT_STRATA, 50).unwrap();
    let mut csv = Vec::new();
    r.write_accuracy_csv(&mut csv).unwrap();
    r.histogram.write_csv(&mut csv).unwrap();
    out.push(String::from_utf8(csv).unwrap());
    let cl = clustering_experiment(
        &train.filter(Label::Nonminimal),
        &builtin_map("f2", 2).unwrap(),
        &ClusterConfig::new(ClusterInit::Random, 3),
    )
    .unwrap();
    out.push(cl.centers.to_json().unwrap());
    out
}

fn criterion_determinism() -> Outcome {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(artifacts)
    };
    let one = run(1);
    let four = run(4);
    let again = run(4);
    let differing: Vec<usize> = (0..one.len()).filter(|&i| one[i] != four[i] || four[i] != again[i]).collect();
    Outcome {
        pass: differing.is_empty(),
        detail: format!(
            "{} artifacts (4 datasets, model, reports, centers) compared across 1 and 4 threads, {} differ",
            one.len(),
            differing.len()
        ),
    }
}

fn main() {
    let _ = env_logger::builder().is_test(true).try_init();
    let mut ok = true;

    let t = Instant::now();
    ok &= report(1, "minimization matches orbit search", t, Some(Duration::from_secs(300)), criterion_minimization());

    let t = Instant::now();
    let data = splits();
    let f6 = run_protocol(&data, "f6");
    let gen_time = t.elapsed();
    ok &= report(2, "f6 classification accuracy", t, Some(Duration::from_secs(600)), criterion_f6_accuracy(&f6));

    let t = Instant::now();
    let fstar = run_protocol(&data, "fstar");
    let f1 = run_protocol(&data, "f1");
    ok &= report(3, "small feature map accuracy", t, None, criterion_small_maps(&fstar, &f1));

    let t = Instant::now();
    ok &= report(4, "reducing-move clustering", t, Some(Duration::from_secs(300)), criterion_clustering(&data));

    let t = Instant::now();
    ok &= report(5, "discriminant score separation", t, None, criterion_separation(&f6));

    let t = Instant::now();
    ok &= report(6, "numerics properties", t, Some(Duration::from_secs(120)), criterion_numerics());

    let t = Instant::now();
    ok &= report(7, "determinism", t, None, criterion_determinism());

    log::info!("dataset generation and f6 protocol took {:.1}s", gen_time.as_secs_f64());
    if !ok {
        std::process::exit(1);
    }
}
