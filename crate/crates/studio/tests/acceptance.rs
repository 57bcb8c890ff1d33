//! Acceptance gate: runs each criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion. Exits non-zero if any fails.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slider_core::{
    build_point_cloud, cosine, sgns_step, train_embeddings, Dimension, Image, LatentImageModel, PoleLabels,
};
use slider_studio::service::{router, AppState, ServiceConfig};
use slider_studio::store::{self, StoredModel};
use slider_studio::wire::{probe_json, serialize_point_cloud};
use slider_studio::StudioError;
use tower::ServiceExt;

use common::{block_config, block_corpus_text, cold_hot_model, half_dark_classes, random_images, weather_model};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-4;
    let cases = 200;
    let mut worst = 0.0f64;
    let loss = |v: &[f64], pos: &[f64], negs: &[Vec<f64>]| {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let sigma = |x: f64| 1.0 / (1.0 + (-x).exp());
        -sigma(dot(v, pos)).ln() - negs.iter().map(|u| sigma(-dot(v, u)).ln()).sum::<f64>()
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
    for _ in 0..cases {
        let d = rng.random_range(2..=16);
        let k = rng.random_range(1..=6);
        let mut vec = || (0..d).map(|_| rng.random_range(-1.5..1.5)).collect::<Vec<f64>>();
        let v = vec();
        let pos = vec();
        let negs: Vec<Vec<f64>> = (0..k).map(|_| vec()).collect();
        let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let g = sgns_step(&v, &pos, &refs).map_err(|e| e.to_string())?;

        // one perturbed slot at a time: 0 = v, 1 = pos, 2.. = negatives
        for slot in 0..2 + k {
            let analytic = match slot {
                0 => &g.grad_v,
                1 => &g.grad_u_pos,
                j => &g.grad_u_negs[j - 2],
            };
            for i in 0..d {
                let eval = |delta: f64| {
                    let (mut v2, mut p2, mut n2) = (v.clone(), pos.clone(), negs.clone());
                    match slot {
                        0 => v2[i] += delta,
                        1 => p2[i] += delta,
                        j => n2[j - 2][i] += delta,
                    }
                    loss(&v2, &p2, &n2)
                };
                let fd = (eval(h) - eval(-h)) / (2.0 * h);
                worst = worst.max(rel(analytic[i], fd));
            }
        }
    }
    ensure(worst < 1e-4, || format!("max relative error {worst:.3e}"))?;
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("{cases} cases, max rel err {worst:.2e}, {took:.2?}"))
}

fn planted_structure() -> Outcome {
    let start = Instant::now();
    let tokens = slider_core::tokenize(&block_corpus_text(1));
    let model = train_embeddings(&tokens, &block_config()).map_err(|e| e.to_string())?;
    let vec = |w: &str| model.vector(w).unwrap();
    let (mut within_sum, mut within_n, mut cross_sum, mut cross_n) = (0.0, 0, 0.0, 0);
    for block in [&common::BLOCK_A, &common::BLOCK_B] {
        for i in 0..5 {
            for j in i + 1..5 {
                within_sum += cosine(vec(block[i]), vec(block[j])).map_err(|e| e.to_string())?;
                within_n += 1;
            }
        }
    }
    for a in common::BLOCK_A {
        for b in common::BLOCK_B {
            cross_sum += cosine(vec(a), vec(b)).map_err(|e| e.to_string())?;
            cross_n += 1;
        }
    }
    let margin = within_sum / within_n as f64 - cross_sum / cross_n as f64;
    ensure(margin >= 0.2, || format!("margin {margin:.4}"))?;

    let dim = Dimension::from_words(&model, &common::BLOCK_A, &common::BLOCK_B, PoleLabels::new("A", "B"))
        .map_err(|e| e.to_string())?;
    let order = dim.project_vocabulary(&model, None).map_err(|e| e.to_string())?;
    let first_b = order.iter().position(|(w, _)| w.starts_with('b')).unwrap_or(order.len());
    ensure(order[first_b..].iter().all(|(w, _)| w.starts_with('b')), || format!("order {order:?}"))?;
    ensure(first_b == 5, || format!("order {order:?}"))?;
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!("margin {margin:.3}, A before B, {took:.2?}"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_slider")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = tmp.path().join("corpus.txt");
    std::fs::write(&corpus, block_corpus_text(1)).map_err(|e| e.to_string())?;
    let mut vectors = Vec::new();
    let mut clouds = Vec::new();
    for run in 0..2 {
        let model = tmp.path().join(format!("m{run}"));
        let cloud = tmp.path().join(format!("cloud{run}.json"));
        let (c, m, o) = (corpus.to_str().unwrap(), model.to_str().unwrap(), cloud.to_str().unwrap());
        run_cli(&["train-words", "--corpus", c, "--out", m, "--dim", "16", "--epochs", "15", "--seed", "1"])?;
        run_cli(&["slider", "--model", m, "--pole-a", "a1,a2,a3", "--pole-b", "b1,b2,b3", "--labels", "A,B"])?;
        run_cli(&["pointcloud", "--model", m, "--slider", "s1", "--out", o])?;
        vectors.push(read(&model.join("vectors.bin"))?);
        clouds.push(read(&cloud)?);
    }
    ensure(vectors[0] == vectors[1], || "vectors.bin differs".into())?;
    ensure(clouds[0] == clouds[1], || "point cloud JSON differs".into())?;
    Ok(format!("vectors.bin {} bytes, cloud {} bytes identical", vectors[0].len(), clouds[0].len()))
}

fn reconstruction_error(model: &LatentImageModel, images: &[Image]) -> Result<f64, String> {
    let mut total = 0.0;
    for img in images {
        let z = model.encode(img).map_err(|e| e.to_string())?;
        let back = model.decode_unclamped(&z).map_err(|e| e.to_string())?;
        total += back.iter().zip(img.pixels()).map(|(b, p)| (b - *p as f64).powi(2)).sum::<f64>();
    }
    Ok(total)
}

fn pca_properties() -> Outcome {
    let mut worst_recon = 0.0f64;
    let mut worst_ortho = 0.0f64;
    for seed in 0..20 {
        let images = random_images(8, 4, 4, seed);
        let full = LatentImageModel::fit(&images, 7).map_err(|e| e.to_string())?;
        for img in &images {
            let back = full.decode_unclamped(&full.encode(img).unwrap()).unwrap();
            for (b, p) in back.iter().zip(img.pixels()) {
                worst_recon = worst_recon.max((b - *p as f64).abs());
            }
        }
        let errors: Vec<f64> = (1..=7)
            .map(|q| reconstruction_error(&LatentImageModel::fit(&images, q).unwrap(), &images))
            .collect::<Result<_, _>>()?;
        ensure(errors.windows(2).all(|w| w[1] <= w[0] + 1e-9), || format!("seed {seed}: errors {errors:?}"))?;
        for i in 0..7 {
            for j in 0..7 {
                let d: f64 = full.component(i).iter().zip(full.component(j)).map(|(a, b)| *a as f64 * *b as f64).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst_ortho = worst_ortho.max((d - want).abs());
            }
        }
    }
    ensure(worst_recon < 1e-5, || format!("reconstruction error {worst_recon:.3e}"))?;
    ensure(worst_ortho < 1e-6, || format!("orthonormality error {worst_ortho:.3e}"))?;
    Ok(format!("20 image sets, recon {worst_recon:.1e}, ortho {worst_ortho:.1e}, monotone"))
}

fn slider_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let tol = 1e-6;
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() < tol);
    let cases = 500;
    for case in 0..cases {
        let d = rng.random_range(2..=12);
        let mut vec = || (0..d).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>();
        let (a, b, anchor) = (vec(), vec(), vec());
        let (t1, t2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let dim = Dimension::from_centroids(&a, &b, PoleLabels::new("a", "b")).map_err(|e| e.to_string())?;
        let swapped = dim.swapped();
        let fail = |what: &str| format!("case {case}: {what}");

        let p = dim.place(&anchor, t1).unwrap();
        ensure(close(&swapped.place(&anchor, -t1).unwrap(), &p), || fail("pole swap"))?;
        let own = dim.coordinate(&anchor).unwrap();
        ensure(close(&dim.place(&anchor, own).unwrap(), &anchor), || fail("identity"))?;
        ensure((dim.coordinate(&p).unwrap() - t1).abs() < tol, || fail("coordinate round trip"))?;
        let p2 = dim.place(&anchor, t2).unwrap();
        let step: Vec<f64> = dim.axis_unit().iter().map(|u| (t2 - t1) * dim.half_span() * u).collect();
        let diff: Vec<f64> = p2.iter().zip(&p).map(|(x, y)| x - y).collect();
        ensure(close(&diff, &step), || fail("linearity"))?;
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("{cases} dimensions, {took:.2?}"))
}

fn cold_hot() -> Outcome {
    let model = cold_hot_model();
    let dim = Dimension::from_words(&model, &["cold"], &["hot"], PoleLabels::new("cold", "hot"))
        .map_err(|e| e.to_string())?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let axis = dim.axis_unit();
    ensure((axis[0] + s).abs() < 1e-5 && (axis[1] - s).abs() < 1e-5, || format!("axis {axis:?}"))?;
    let c = dim.coordinate(model.vector("cold").unwrap()).unwrap();
    ensure((c + 1.0).abs() < 1e-6, || format!("coordinate(cold) = {c}"))?;
    let probe = dim.probe_words(&model, "cold", 1.0, 1).map_err(|e| e.to_string())?;
    let hot = model.vector("hot").unwrap();
    let landed = probe.probe_point.iter().zip(hot).all(|(p, h)| (p - *h as f64).abs() < 1e-6);
    ensure(landed, || format!("probe point {:?}", probe.probe_point))?;
    Ok(format!("axis ({:.5}, {:.5}), coordinate(cold) {c}", axis[0], axis[1]))
}

fn image_separation() -> Outcome {
    let (class_a, class_b) = half_dark_classes();
    let all: Vec<Image> = class_a.iter().chain(&class_b).cloned().collect();
    let model = LatentImageModel::fit(&all, 4).map_err(|e| e.to_string())?;
    let dim = Dimension::from_images(&model, &class_a, &class_b, PoleLabels::new("left", "right"))
        .map_err(|e| e.to_string())?;
    let coord = |img: &Image| dim.coordinate(&model.encode(img).unwrap()).unwrap();
    let ca: Vec<f64> = class_a.iter().map(coord).collect();
    let cb: Vec<f64> = class_b.iter().map(coord).collect();
    ensure(ca.iter().all(|c| *c < 0.0) && cb.iter().all(|c| *c > 0.0), || format!("A {ca:?} B {cb:?}"))?;
    let probe = dim.probe_image(&model, -1.0, None).map_err(|e| e.to_string())?;
    let got = model.decode_unclamped(&probe.probe_point).unwrap();
    let want = model.decode_unclamped(&dim.centroid_a()).unwrap();
    let err = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    ensure(err < 1e-5, || format!("probe(-1) off by {err:.3e}"))?;
    Ok(format!("A max {:.3}, B min {:.3}, probe err {err:.1e}", ca.iter().cloned().fold(f64::MIN, f64::max), cb.iter().cloned().fold(f64::MAX, f64::min)))
}

fn store_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tokens = slider_core::tokenize(&block_corpus_text(4));
    let words = StoredModel::Words(train_embeddings(&tokens, &block_config()).map_err(|e| e.to_string())?);
    let images = StoredModel::Images(LatentImageModel::fit(&random_images(8, 5, 3, 9), 5).unwrap());
    let mut checked = 0;
    for (name, model, payload) in [("w", &words, "vectors.bin"), ("i", &images, "mean.bin")] {
        let dir = tmp.path().join(name);
        store::save_model(model, &dir).map_err(|e| e.to_string())?;
        let loaded = store::load_model(&dir).map_err(|e| e.to_string())?;
        ensure(&loaded == model, || format!("{name}: loaded model differs"))?;
        let path = dir.join(payload);
        let pristine = read(&path)?;
        for offset in [0, pristine.len() / 2, pristine.len() - 1] {
            let mut bytes = pristine.clone();
            bytes[offset] ^= 0x5a;
            std::fs::write(&path, &bytes).map_err(|e| e.to_string())?;
            match store::load_model(&dir) {
                Err(StudioError::CorruptStore(_)) => checked += 1,
                other => return Err(format!("{name}@{offset}: expected CorruptStore, got {other:?}")),
            }
        }
        std::fs::write(&path, &pristine).map_err(|e| e.to_string())?;
    }
    Ok(format!("words + images bit-identical, {checked} corruptions detected"))
}

async fn get(app: &axum::Router, uri: &str) -> Result<Vec<u8>, String> {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .map_err(|e| e.to_string())?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes().to_vec();
    ensure(status == StatusCode::OK, || format!("{uri}: {status} {}", String::from_utf8_lossy(&bytes)))?;
    Ok(bytes)
}

fn service_equivalence() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tokens = slider_core::tokenize(&block_corpus_text(2));
    let trained = train_embeddings(&tokens, &block_config()).map_err(|e| e.to_string())?;
    for (id, model, a, b) in [
        ("weather", weather_model(), ["cold", "icy"], ["hot", "warm"]),
        ("blocks", trained, ["a1", "a2"], ["b1", "b2"]),
    ] {
        let dir = tmp.path().join("models").join(id);
        store::save_model(&StoredModel::Words(model.clone()), &dir).map_err(|e| e.to_string())?;
        let dim = Dimension::from_words(&model, &a, &b, PoleLabels::new("a", "b")).map_err(|e| e.to_string())?;
        store::save_slider(&dim, &dir, None).map_err(|e| e.to_string())?;
    }
    let state = AppState::open(ServiceConfig { data_dir: tmp.path().to_path_buf(), static_dir: None })
        .map_err(|e| e.to_string())?;
    let app = router(state);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let mut compared = 0;
    runtime.block_on(async {
        for (id, bases) in [("weather", ["cold", "rain", "mild"]), ("blocks", ["a3", "b5", "a1"])] {
            let dir = tmp.path().join("models").join(id);
            let StoredModel::Words(model) = store::load_model(&dir).map_err(|e| e.to_string())? else {
                return Err("wrong model type".to_string());
            };
            let dim = store::load_slider(&dir, "s1").map_err(|e| e.to_string())?;
            for base in bases {
                for t in [-1.5, -1.0, 0.0, 0.37, 1.0, 2.25] {
                    let http = get(&app, &format!("/models/{id}/sliders/s1/probe?t={t}&base={base}&k=4")).await?;
                    let direct = probe_json(&dim.probe_words(&model, base, t, 4).map_err(|e| e.to_string())?);
                    ensure(http == direct, || format!("{id} probe t={t} base={base} differs"))?;
                    compared += 1;
                }
            }
            for (query, slider, max) in [("", None, 200), ("?slider=s1&max_points=4", Some(&dim), 4)] {
                let http = get(&app, &format!("/models/{id}/pointcloud{query}")).await?;
                let direct = serialize_point_cloud(&build_point_cloud(&model, slider, max).map_err(|e| e.to_string())?);
                ensure(http == direct, || format!("{id} pointcloud{query} differs"))?;
                compared += 1;
            }
        }
        Ok(())
    })?;
    Ok(format!("{compared} responses byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("gradient correctness", gradient_correctness),
        ("planted-structure learning", planted_structure),
        ("determinism", determinism),
        ("PCA properties", pca_properties),
        ("slider algebra", slider_algebra),
        ("two-word exact case", cold_hot),
        ("image-class separation", image_separation),
        ("store round trip", store_round_trip),
        ("service oracle equivalence", service_equivalence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
