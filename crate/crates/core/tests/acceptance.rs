//! One line per acceptance criterion. Exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use naxbench::eval::{evaluate_batch, evaluate_objectives};
use naxbench::metrics::{
    hypervolume, kendall_tau, median, rank_sum_test, wilcoxon_rank_sum, Comparison,
};
use naxbench::moea::{
    das_dennis, nondominated_indices, nsga2_run, population_size, random_search_run, Nsga2Config,
};
use naxbench::rpc::{session_streams, Client, Request, Server};
use naxbench::spaces::{self, SPACE_NAMES};
use naxbench::store::{gen_synthetic, SyntheticProfile, TabularDb};
use naxbench::suite::{self, instance_from_bundle, Suite};
use naxbench::{instantiate, Genotype};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// Transcribed row by row from the published suite definitions.
const REGISTRY: [(&str, usize, &str, usize, &str, &str); 18] = [
    ("c10mop", 1, "nb101", 26, "fe params", "0.1534 3.2427e7"),
    ("c10mop", 2, "nb101", 26, "fe params flops", "0.1577 3.2427e7 9.5450e9"),
    ("c10mop", 3, "nats", 5, "fe params flops", "0.2021 5.7995e5 2.5706e8"),
    ("c10mop", 4, "nats", 5, "fe params flops gpu/latency", "0.2021 5.7995e5 2.5706e8 2.0064e-2"),
    (
        "c10mop",
        5,
        "nb201",
        6,
        "fe params flops gpu/latency gpu/energy",
        "0.9000 1.0735e6 1.5327e8 6.8889e-3 3.2651e-2",
    ),
    (
        "c10mop",
        6,
        "nb201",
        6,
        "fe params flops eyeriss/latency eyeriss/energy eyeriss/arithmetic_intensity",
        "0.5098 1.0735e6 1.5327e8 1.0527e-2 2.0139e-3 26.596",
    ),
    (
        "c10mop",
        7,
        "nb201",
        6,
        "fe params flops gpu/latency gpu/energy eyeriss/latency eyeriss/energy eyeriss/arithmetic_intensity",
        "0.9000 1.0735e6 1.5327e8 8.1821e-3 3.4711e-2 1.0527e-2 2.0139e-3 27.078",
    ),
    ("c10mop", 8, "darts", 32, "fe params", "0.2750 1.6724e6"),
    ("c10mop", 9, "darts", 32, "fe params flops", "0.2750 1.6724e6 2.7034e8"),
    ("in1kmop", 1, "resnet50", 25, "fe params", "0.3124 4.4114e7"),
    ("in1kmop", 2, "resnet50", 25, "fe flops", "0.3124 1.4577e10"),
    ("in1kmop", 3, "resnet50", 25, "fe params flops", "0.3124 4.4114e7 1.4577e10"),
    ("in1kmop", 4, "transformer", 34, "fe params", "0.1832 7.4134e7"),
    ("in1kmop", 5, "transformer", 34, "fe flops", "0.1832 1.5403e10"),
    ("in1kmop", 6, "transformer", 34, "fe params flops", "0.1832 7.4134e7 1.5403e10"),
    ("in1kmop", 7, "mnv3", 21, "fe params", "0.2980 1.0198e7"),
    ("in1kmop", 8, "mnv3", 21, "fe params flops", "0.2980 1.0198e7 1.3768e9"),
    (
        "in1kmop",
        9,
        "mnv3",
        21,
        "fe params flops note10/latency",
        "0.2980 1.0198e7 1.3768e9 7.0386e-2",
    ),
];

fn registry_fidelity() -> Check {
    let mut seen = 0;
    for (suite, index, space, dim, objectives, reference) in REGISTRY {
        let suite: Suite = suite.parse().map_err(text)?;
        let e = suite::entry(suite, index).map_err(text)?;
        let label = e.label();
        ensure(e.space == space, || format!("{label}: space {}", e.space))?;
        ensure(e.dim == dim, || format!("{label}: D {}", e.dim))?;
        let space_dim = spaces::by_name(space).map_err(text)?.descriptor().dim();
        ensure(space_dim == dim, || {
            format!("{label}: space has D={space_dim}")
        })?;
        let want: Vec<&str> = objectives.split(' ').collect();
        ensure(e.objectives == want.as_slice(), || {
            format!("{label}: objectives {:?}", e.objectives)
        })?;
        ensure(e.n_obj() == want.len(), || {
            format!("{label}: M {}", e.n_obj())
        })?;
        let want: Vec<f64> = reference.split(' ').map(|t| t.parse().unwrap()).collect();
        let got = suite::reference_point(suite, index).map_err(text)?;
        let same = got.len() == want.len()
            && got
                .iter()
                .zip(&want)
                .all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(same, || format!("{label}: reference point {got:?}"))?;
        seen += 1;
    }
    ensure(suite::all_entries().count() == 18, || {
        "registry size".into()
    })?;
    Ok(format!(
        "{seen} rows and reference points match bit for bit"
    ))
}

fn cardinality() -> Check {
    let nb201 = spaces::enumerate(spaces::by_name("nb201").map_err(text)?.as_ref())
        .map_err(text)?
        .count();
    let nats = spaces::enumerate(spaces::by_name("nats").map_err(text)?.as_ref())
        .map_err(text)?
        .count();
    ensure(nb201 == 15_625 && nats == 32_768, || {
        format!("nb201={nb201} nats={nats}")
    })?;
    Ok(format!("nb201={nb201} nats={nats}"))
}

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

fn population_schedule() -> Check {
    let rows = [
        (2, 99, 0, 100),
        (3, 13, 0, 105),
        (4, 7, 0, 120),
        (5, 5, 0, 126),
        (6, 4, 1, 132),
        (8, 3, 2, 156),
    ];
    let mut counts = Vec::new();
    for (m, h1, h2, n) in rows {
        let got = population_size(m).map_err(text)?;
        ensure(got == (h1, h2, n), || format!("M={m}: {got:?}"))?;
        let formula = binomial(h1 + m - 1, m - 1)
            + if h2 > 0 {
                binomial(h2 + m - 1, m - 1)
            } else {
                0
            };
        let dirs = das_dennis(m, h1, h2).map_err(text)?;
        ensure(dirs.len() == formula && formula == n, || {
            format!("M={m}: {} directions, formula {formula}", dirs.len())
        })?;
        counts.push(dirs.len().to_string());
    }
    Ok(format!("directions {}", counts.join("/")))
}

fn mean_time<F: FnMut()>(runs: usize, mut f: F) -> Duration {
    let start = Instant::now();
    for _ in 0..runs {
        f();
    }
    start.elapsed() / runs as u32
}

fn throughput() -> Check {
    let root = common::data_root();
    let tabular = instantiate(Suite::C10Mop, 2, root).map_err(text)?;
    let db = tabular
        .evaluators()
        .tabular_db()
        .cloned()
        .ok_or("no tabular db")?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<Genotype> = (0..1000)
        .map(|_| db.records()[rng.random_range(0..db.len())].x.clone())
        .collect();
    let mut noise = ChaCha8Rng::seed_from_u64(12);
    let t_tab = mean_time(31, || {
        evaluate_batch(&tabular, &xs, &mut noise).expect("tabular batch");
    });

    let surrogate = instantiate(Suite::In1kMop, 9, root).map_err(text)?;
    let xs = spaces::sample(surrogate.space(), &mut rng, 1000).map_err(text)?;
    let t_sur = mean_time(31, || {
        evaluate_batch(&surrogate, &xs, &mut noise).expect("surrogate batch");
    });
    let detail = format!(
        "1000 rows, mean of 31: tabular {:.4}s (<1.0), surrogate {:.4}s (<0.4)",
        t_tab.as_secs_f64(),
        t_sur.as_secs_f64()
    );
    ensure(
        t_tab < Duration::from_secs(1) && t_sur < Duration::from_millis(400),
        || detail.clone(),
    )?;
    Ok(detail)
}

fn inclusion_exclusion(front: &[Vec<f64>], r: &[f64]) -> f64 {
    let n = front.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let members: Vec<&Vec<f64>> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &front[i])
            .collect();
        let volume: f64 = (0..r.len())
            .map(|k| (r[k] - members.iter().map(|p| p[k]).fold(f64::MIN, f64::max)).max(0.0))
            .product();
        total += if members.len() % 2 == 1 {
            volume
        } else {
            -volume
        };
    }
    total
}

fn random_front(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let g: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.05).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = rng.random_range(0.9..1.1);
            g.iter().map(|v| scale * v / norm).collect()
        })
        .collect()
}

fn hv_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ie: f64 = 0.0;
    for m in [2, 3] {
        for _ in 0..10 {
            let n = rng.random_range(1..=10);
            let front: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
                .collect();
            let r = vec![1.0; m];
            let diff =
                (hypervolume(&front, &r).map_err(text)? - inclusion_exclusion(&front, &r)).abs();
            worst_ie = worst_ie.max(diff);
        }
    }
    ensure(worst_ie <= 1e-12, || {
        format!("inclusion-exclusion gap {worst_ie:e}")
    })?;

    const SAMPLES: usize = 1_000_000;
    let mut worst_z: f64 = 0.0;
    for case in 0..20 {
        let m = 4 + case % 5;
        let n = rng.random_range(10..=50);
        let front = random_front(&mut rng, n, m);
        let r = vec![1.2; m];
        let exact = hypervolume(&front, &r).map_err(text)?;
        let lo: Vec<f64> = (0..m)
            .map(|k| front.iter().map(|p| p[k]).fold(f64::MAX, f64::min))
            .collect();
        let box_volume: f64 = lo.iter().zip(&r).map(|(a, b)| b - a).product();
        let mut hits = 0usize;
        let mut z = vec![0.0; m];
        for _ in 0..SAMPLES {
            for k in 0..m {
                z[k] = rng.random_range(lo[k]..r[k]);
            }
            if front.iter().any(|p| p.iter().zip(&z).all(|(a, b)| a <= b)) {
                hits += 1;
            }
        }
        let p = hits as f64 / SAMPLES as f64;
        let estimate = box_volume * p;
        let se = box_volume * (p * (1.0 - p) / SAMPLES as f64).sqrt();
        let dev = (exact - estimate).abs() / se;
        worst_z = worst_z.max(dev);
        ensure(dev <= 3.0, || {
            format!("M={m} n={n}: exact {exact} vs {estimate} ({dev:.2} SE)")
        })?;
    }
    Ok(format!(
        "inclusion-exclusion max gap {worst_ie:.1e}; Monte-Carlo max deviation {worst_z:.2} SE over 20 fronts"
    ))
}

fn codec_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for name in SPACE_NAMES {
        let space = spaces::by_name(name).map_err(text)?;
        for x in spaces::sample(space.as_ref(), &mut rng, 10_000).map_err(text)? {
            ensure(space.is_valid(&x).map_err(text)?, || {
                format!("{name}: invalid sample {x:?}")
            })?;
            let p = space.decode(&x).map_err(text)?;
            let back = space.encode(&p).map_err(text)?;
            let again = space.decode(&back).map_err(text)?;
            ensure(again == p, || format!("{name}: {p} re-decodes as {again}"))?;
        }
    }
    Ok(format!("{} spaces x 10000 genotypes", SPACE_NAMES.len()))
}

fn noise_model() -> Check {
    let instance = instantiate(Suite::C10Mop, 7, common::data_root()).map_err(text)?;
    let db = instance
        .evaluators()
        .tabular_db()
        .cloned()
        .ok_or("no tabular db")?;
    let record = db
        .records()
        .iter()
        .find(|r| {
            r.fe_reps
                .iter()
                .map(|v| v.to_bits())
                .collect::<BTreeSet<_>>()
                .len()
                == 3
        })
        .ok_or("no record with three distinct repetitions")?;
    let reps: BTreeSet<u64> = record.fe_reps.iter().map(|v| v.to_bits()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let first = evaluate_objectives(&instance, &record.x, &mut rng).map_err(text)?;
    let mut seen = BTreeSet::new();
    seen.insert(first[0].to_bits());
    for _ in 1..300 {
        let f = evaluate_objectives(&instance, &record.x, &mut rng).map_err(text)?;
        ensure(reps.contains(&f[0].to_bits()), || {
            format!("error {} not a stored repetition", f[0])
        })?;
        let same = f[1..]
            .iter()
            .zip(&first[1..])
            .all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(same, || "deterministic components changed".into())?;
        seen.insert(f[0].to_bits());
    }
    ensure(seen == reps, || {
        format!("observed {} of 3 repetitions", seen.len())
    })?;
    Ok(format!(
        "300 draws saw all 3 repetitions; {} deterministic objectives constant",
        first.len() - 1
    ))
}

fn strict_local_minima(db: &TabularDb) -> usize {
    let cards = [5u32; 6];
    db.records()
        .iter()
        .filter(|r| {
            let e = r.mean_error();
            (0..6).all(|i| {
                (0..cards[i]).filter(|&v| v != r.x[i]).all(|v| {
                    let mut y = r.x.to_vec();
                    y[i] = v;
                    db.get(&y).expect("exhaustive").mean_error() > e
                })
            })
        })
        .count()
}

fn landscape_pathology() -> Check {
    let space = spaces::by_name("nb201").map_err(text)?;
    let profile = SyntheticProfile::for_space("nb201");
    ensure(profile.rho == 0.95, || "default rho".into())?;
    let mut taus = Vec::new();
    let mut minima = Vec::new();
    for seed in 0..5 {
        let db = gen_synthetic(space.as_ref(), &profile, seed).map_err(text)?;
        let rows: Vec<Vec<f64>> = db
            .records()
            .iter()
            .map(|r| {
                vec![
                    r.mean_error(),
                    r.metric("params").unwrap(),
                    r.metric("flops").unwrap(),
                ]
            })
            .collect();
        let nd = nondominated_indices(&rows);
        let a: Vec<f64> = nd.iter().map(|&i| rows[i][1]).collect();
        let b: Vec<f64> = nd.iter().map(|&i| rows[i][2]).collect();
        taus.push(kendall_tau(&a, &b).map_err(text)?);
        minima.push(strict_local_minima(&db));
    }
    let tau_min = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let minima_min = *minima.iter().min().unwrap();
    let detail = format!(
        "rho=0.95 nondominated-set tau min {tau_min:.3} over 5 seeds; strict 1-Hamming local minima {minima:?}"
    );
    ensure(tau_min > 0.9 && minima_min >= 2, || detail.clone())?;
    Ok(detail)
}

fn end_to_end() -> Check {
    let space = spaces::by_name("nb201").map_err(text)?;
    let (bundle, _) = suite::load_bundle(common::data_root(), "nb201").map_err(text)?;
    let instance = instance_from_bundle(
        "nb201 error/params".into(),
        Arc::new(bundle),
        &["fe", "params"],
        None,
    )
    .map_err(text)?;
    ensure(
        instance.descriptor().name == space.descriptor().name,
        || "space".into(),
    )?;
    let (_, _, n) = population_size(2).map_err(text)?;
    let config = Nsga2Config {
        trace: false,
        ..Nsga2Config::new(n, 10_000)
    };
    let mut nsga = Vec::new();
    let mut random = Vec::new();
    for seed in 1..=11 {
        nsga.push(
            nsga2_run(&instance, &config, seed)
                .map_err(text)?
                .final_hv(),
        );
        random.push(
            random_search_run(&instance, 10_000, seed)
                .map_err(text)?
                .final_hv(),
        );
    }
    let (ma, mb) = (median(&nsga), median(&random));
    let test = rank_sum_test(&nsga, &random).map_err(text)?;
    let verdict = wilcoxon_rank_sum(&nsga, &random, 0.05).map_err(text)?;
    let detail = format!(
        "median HV nsga2 {ma:.1} vs random {mb:.1}, rank-sum p={:.2e} ({verdict:?})",
        test.p_value
    );
    ensure(ma > mb && verdict == Comparison::Better, || detail.clone())?;
    Ok(detail)
}

fn rpc_transparency() -> Check {
    let root = common::data_root();
    let handle = Server::bind("127.0.0.1:0", root)
        .map_err(text)?
        .spawn()
        .map_err(text)?;
    let mut client = Client::connect(handle.addr()).map_err(text)?;
    let mut sessions = Vec::new();
    for (suite, index, seed) in [(Suite::C10Mop, 5, 42u64), (Suite::In1kMop, 9, 43)] {
        let reply = client
            .request(&Request::create(suite.key(), index, seed))
            .map_err(text)?;
        ensure(reply.is_ok(), || {
            format!("create failed: {:?}", reply.message)
        })?;
        let local = instantiate(suite, index, root).map_err(text)?;
        sessions.push((reply.id, local, session_streams(seed).0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rows = 0;
    for batch in 0..100 {
        let (id, local, stream) = &mut sessions[batch % 2];
        let n = rng.random_range(1..=200);
        let xs = spaces::sample(local.space(), &mut rng, n).map_err(text)?;
        let wire: Vec<Vec<i64>> = xs
            .iter()
            .map(|x| x.iter().map(|&v| v as i64).collect())
            .collect();
        let reply = client.request(&Request::evaluate(id, wire)).map_err(text)?;
        ensure(reply.is_ok(), || {
            format!("batch {batch}: {:?}", reply.message)
        })?;
        let expected = evaluate_batch(local, &xs, stream).map_err(text)?;
        let remote = reply.f.ok_or("reply without F")?;
        let same = remote.len() == expected.len()
            && remote
                .iter()
                .flatten()
                .zip(expected.iter().flatten())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(same, || format!("batch {batch}: remote F differs"))?;
        rows += n;
    }
    handle.shutdown();
    Ok(format!(
        "100 batches, {rows} rows, bit-identical over tabular and surrogate sessions"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "registry fidelity",
            Duration::from_secs(1),
            registry_fidelity,
        ),
        ("cardinality", Duration::from_secs(5), cardinality),
        (
            "population schedule",
            Duration::from_secs(1),
            population_schedule,
        ),
        ("throughput", Duration::from_secs(120), throughput),
        (
            "hypervolume correctness",
            Duration::from_secs(120),
            hv_correctness,
        ),
        (
            "codec round trip",
            Duration::from_secs(30),
            codec_round_trip,
        ),
        ("noise model", Duration::from_secs(60), noise_model),
        (
            "landscape pathology",
            Duration::from_secs(120),
            landscape_pathology,
        ),
        (
            "nsga2 beats random search",
            Duration::from_secs(300),
            end_to_end,
        ),
        (
            "rpc transparency",
            Duration::from_secs(120),
            rpc_transparency,
        ),
    ];
    // data generation is setup, not part of any criterion's runtime
    common::data_root();
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took longer than {}s", limit.as_secs())),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
