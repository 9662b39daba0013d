//! End-to-end acceptance checks. Each criterion prints one PASS, FAIL or
//! SKIP line; the target exits non-zero if any criterion fails.
//!
//! Set `VOCALIS_OSF_EXPERT` to a converted expert session manifest to run the
//! dataset-dependent correlation check.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vocalis_cli::config::Config;
use vocalis_cli::correlate::correlate_session;
use vocalis_core::dataset::schedule::DEFAULT_BPM;
use vocalis_core::dataset::{format_spn, load_session, parse_spn, scale_schedule};
use vocalis_core::dsp::envelope::{hilbert_envelope, trim_count};
use vocalis_core::dsp::spectral::{spr, stft_magnitude, SprConfig};
use vocalis_core::dsp::stability::{stability_of_values, DEFAULT_ENVELOPE_FLOOR};
use vocalis_core::dsp::MvcProtocol;
use vocalis_core::geometry::{vocal_cord_length, LandmarkSet, Point};
use vocalis_core::stats::wilcoxon::{wilcoxon_signed_rank, PValueMethod, PairedSample, ZeroPolicy};
use vocalis_core::stats::{bh_fdr, pca};
use vocalis_core::synth::SyntheticSession;
use vocalis_core::SampledSignal;
use vocalis_engine::{build_reference, grid_metrics, FeedbackFrame, MetricsConfig, ReplaySource, SessionConfig, SessionState};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Runner {
    failed: Vec<&'static str>,
}

impl Runner {
    fn run(&mut self, name: &'static str, limit: Option<Duration>, check: impl FnOnce() -> Check) {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let timing = match limit {
            Some(l) => format!("{:.3}s / {:.0}s", elapsed.as_secs_f64(), l.as_secs_f64()),
            None => format!("{:.3}s", elapsed.as_secs_f64()),
        };
        let result = result.and_then(|detail| match limit {
            Some(l) if elapsed > l => Err(format!("{detail}; over time limit")),
            _ => Ok(detail),
        });
        match result {
            Ok(detail) => println!("PASS  {name} [{timing}] {detail}"),
            Err(detail) => {
                println!("FAIL  {name} [{timing}] {detail}");
                self.failed.push(name);
            }
        }
    }

    fn skip(&self, name: &str, reason: &str) {
        println!("SKIP  {name} {reason}");
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn sine(freq: f64, rate: f64, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / rate).sin()).collect()
}

fn stability_criterion() -> Check {
    let s = |v: &[f64]| stability_of_values(v, DEFAULT_ENVELOPE_FLOOR).unwrap().s;
    ensure(s(&[0.7; 100]) == 0.0, || "constant envelope is not 0".into())?;

    let alt: Vec<f64> = (0..101).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
    let expected = 20.0 * 2f64.log10();
    let got = s(&alt);
    ensure((got - expected).abs() < 1e-9, || format!("alternating gives {got}"))?;
    ensure((expected - 6.020599913).abs() < 1e-9, || "20·log10 2 mismatch".into())?;
    for c in [1e-3, 1.0, 1e3] {
        let scaled: Vec<f64> = alt.iter().map(|v| v * c).collect();
        ensure(s(&scaled) == got, || format!("scale {c} changes the alternating score"))?;
    }

    // arbitrary envelopes: scaling rounds each sample, so allow a few ulps
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let v: Vec<f64> = (0..200).map(|_| rng.random_range(0.01..10.0)).collect();
        let base = s(&v);
        for c in [1e-3, 1.0, 1e3] {
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            worst = worst.max((s(&scaled) - base).abs() / base);
        }
    }
    ensure(worst < 1e-12, || format!("relative scale error {worst:e}"))?;
    Ok(format!("s(alt)={got:.12}, random-envelope scale error {worst:.1e}"))
}

fn envelope_criterion() -> Check {
    let rate = 48_000.0;
    let x = sine(1000.0, rate, 48_000, 1.0);
    let env = hilbert_envelope(&SampledSignal::mono(x.clone(), rate).unwrap(), 0.05).unwrap();
    let worst = env.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 0.01, || format!("max deviation {worst}"))?;
    let k = trim_count(x.len(), 0.05);
    let below = env.values().iter().zip(&x[k..]).map(|(e, s)| s.abs() - e).fold(f64::NEG_INFINITY, f64::max);
    ensure(below <= 1e-6, || format!("envelope under |x| by {below}"))?;
    Ok(format!("max |env-1| {worst:.2e}"))
}

fn segment_spr(x: &[f64], rate: f64) -> f64 {
    let spec = stft_magnitude(&SampledSignal::mono(x.to_vec(), rate).unwrap(), 2048, 512).unwrap();
    spr(&spec, &SprConfig::default()).unwrap().segment_db
}

fn spr_criterion() -> Check {
    let rate = 48_000.0;
    let n = 96_000;
    let tones: Vec<f64> = sine(750.0, rate, n, 0.5).iter().zip(sine(3000.0, rate, n, 0.5)).map(|(a, b)| a + b).collect();
    let equal = segment_spr(&tones, rate);
    ensure(equal.abs() <= 0.5, || format!("equal tones give {equal} dB"))?;

    // flat spectrum: band powers scale with width, 2000 Hz over 500 Hz
    let oracle = 10.0 * 4f64.log10();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise: Vec<f64> = (0..10 * 48_000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let white = segment_spr(&noise, rate);
    ensure((white - oracle).abs() <= 1.0, || format!("white noise gives {white} dB"))?;

    let base = segment_spr(&noise[..48_000], rate);
    let mut worst = 0.0f64;
    for c in [1e-3, 0.5, 7.0, 1e3] {
        let scaled: Vec<f64> = noise[..48_000].iter().map(|s| s * c).collect();
        worst = worst.max((segment_spr(&scaled, rate) - base).abs());
    }
    ensure(worst < 1e-9, || format!("gain changes SPR by {worst} dB"))?;
    Ok(format!("equal {equal:+.3} dB, white {white:+.3} dB, gain drift {worst:.1e} dB"))
}

fn set(vs: Point, vl1: Point, vl2: Point, vr1: Point, vr2: Point) -> LandmarkSet {
    LandmarkSet { vs, vl1, vl2, vr1, vr2, frame_index: 0, pitch: None, calibration_mm_per_px: None }
}

fn length_criterion() -> Check {
    // both midpoints sit 5 px from VS: (3, 4) and (-4, 3)
    let fixture = set(
        Point::new(0.0, 0.0),
        Point::new(2.0, 4.0),
        Point::new(4.0, 4.0),
        Point::new(-4.0, 2.0),
        Point::new(-4.0, 4.0),
    );
    let l = vocal_cord_length(&fixture).unwrap().length;
    ensure(l == 5.0, || format!("3-4-5 fixture gives {l}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut p = || Point::new(rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0));
    let base_set = set(p(), p(), p(), p(), p());
    let base = vocal_cord_length(&base_set).unwrap().length;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let (dx, dy) = (rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3));
        let (s, c) = angle.sin_cos();
        let moved = base_set.map_points(|q| Point::new(c * q.x - s * q.y + dx, s * q.x + c * q.y + dy));
        worst = worst.max((vocal_cord_length(&moved).unwrap().length - base).abs());
    }
    ensure(worst < 1e-9, || format!("rigid motion changes L by {worst}"))?;
    Ok(format!("L=5 exact, rigid drift {worst:.1e}"))
}

/// Two-sided p from all 2^n sign flips of the ranks.
fn enumeration_p(signed_ranks: &[f64]) -> f64 {
    let n = signed_ranks.len();
    let ranks: Vec<f64> = signed_ranks.iter().map(|r| r.abs()).collect();
    let total: f64 = ranks.iter().sum();
    let obs_plus: f64 = signed_ranks.iter().filter(|r| **r > 0.0).sum();
    let obs = obs_plus.min(total - obs_plus);
    let hits = (0u64..1 << n)
        .filter(|mask| {
            let plus: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            plus.min(total - plus) <= obs
        })
        .count();
    hits as f64 / (1u64 << n) as f64
}

fn bh_oracle(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    p.iter()
        .map(|&pi| {
            let start = sorted.iter().position(|&s| s == pi).unwrap();
            (start..m).map(|j| (m as f64 * sorted[j] / (j + 1) as f64).min(1.0)).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn wilcoxon_criterion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = 1 + trial % 12;
        let mut mags: Vec<f64> = (1..=n).map(|k| k as f64 * 0.37 + rng.random_range(0.0..0.3)).collect();
        mags.shuffle(&mut rng);
        let d: Vec<f64> = mags.into_iter().map(|m| if rng.random_bool(0.5) { m } else { -m }).collect();
        let test = wilcoxon_signed_rank(&PairedSample::from_differences(&d).unwrap(), ZeroPolicy::Wilcoxon).unwrap();
        ensure(test.method == PValueMethod::Exact, || format!("n={n} not exact"))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
        let mut signed = vec![0.0; n];
        for (rank, &i) in order.iter().enumerate() {
            signed[i] = (rank + 1) as f64 * d[i].signum();
        }
        worst = worst.max((test.p_value - enumeration_p(&signed)).abs());
    }
    ensure(worst <= 1e-12, || format!("exact p off by {worst}"))?;

    let mut bh_worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..40);
        let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0f64).powi(2)).collect();
        for (a, b) in bh_fdr(&p).unwrap().iter().zip(bh_oracle(&p)) {
            bh_worst = bh_worst.max((a - b).abs());
        }
    }
    ensure(bh_worst <= 1e-12, || format!("BH off by {bh_worst}"))?;
    Ok(format!("p error {worst:.1e}, BH error {bh_worst:.1e}"))
}

fn pca_criterion() -> Check {
    let rank1: Vec<Vec<f64>> = (1..=8).map(|i| vec![i as f64, -2.5 * i as f64]).collect();
    let r = pca(&rank1, false).unwrap();
    let ratios = &r.explained_variance_ratio;
    ensure((ratios[0] - 1.0).abs() < 1e-9 && ratios[1].abs() < 1e-9, || format!("rank-1 ratios {ratios:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<Vec<f64>> = (0..30)
        .map(|_| {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            vec![a, 0.5 * a + 0.3 * b, rng.random_range(-0.2..0.2) - b]
        })
        .collect();
    let r = pca(&data, false).unwrap();
    let mut ortho = 0.0f64;
    for (i, u) in r.components.iter().enumerate() {
        for (j, v) in r.components.iter().enumerate() {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            ortho = ortho.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure(ortho < 1e-9, || format!("loadings not orthonormal: {ortho}"))?;

    // independent decomposition of the same covariance
    let n = data.len();
    let m = DMatrix::from_fn(n, 3, |i, j| data[i][j]);
    let means = m.row_mean();
    let c = DMatrix::from_fn(n, 3, |i, j| m[(i, j)] - means[j]);
    let cov = (c.transpose() * &c) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut worst = 0.0f64;
    for (k, &idx) in order.iter().enumerate() {
        worst = worst.max((r.eigenvalues[k] - eig.eigenvalues[idx]).abs());
        let v = eig.eigenvectors.column(idx);
        let sign = if r.components[k].iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for j in 0..3 {
            worst = worst.max((r.components[k][j] - sign * v[j]).abs());
        }
    }
    ensure(worst < 1e-9, || format!("oracle mismatch {worst}"))?;
    Ok(format!("orthonormality {ortho:.1e}, oracle {worst:.1e}"))
}

fn schedule_criterion() -> Check {
    let sched = scale_schedule(&parse_spn("G2").unwrap(), &parse_spn("E6").unwrap(), DEFAULT_BPM, 2.0, true).unwrap();
    ensure(sched.events.len() == 27, || format!("{} events", sched.events.len()))?;
    ensure(sched.events.iter().all(|e| e.duration_s() == 2.0), || "event not 2.0 s".into())?;
    for midi in 0..=127 {
        let label = parse_spn(&format_spn(midi)).map_err(|e| e.to_string())?;
        ensure(label.midi() == midi, || format!("midi {midi} round-trips to {}", label.midi()))?;
    }
    Ok(format!("{} .. {}", sched.events[0].label, sched.events[26].label))
}

fn replay(state: &mut SessionState, emg: &SampledSignal, audio: &SampledSignal, chunk_ms: f64) -> Vec<FeedbackFrame> {
    let mut frames = Vec::new();
    for chunk in ReplaySource::new(Some(emg.clone()), Some(audio.clone()), chunk_ms) {
        frames.extend(state.process_chunk(&chunk.unwrap()).unwrap());
    }
    frames
}

fn pipeline_fixture() -> (tempfile::TempDir, vocalis_core::dataset::Session) {
    let dir = tempfile::tempdir().unwrap();
    let mut synth = SyntheticSession::new("E01", parse_spn("G2").unwrap(), parse_spn("E6").unwrap());
    synth.tail_s = 6.0;
    synth.with_landmarks = false;
    let session = load_session(&synth.write(dir.path()).unwrap()).unwrap();
    (dir, session)
}

fn pipeline_criterion(session: &vocalis_core::dataset::Session) -> Check {
    let cfg = MetricsConfig::default();
    let reference = Arc::new(build_reference(session, &cfg, &MvcProtocol::default()).map_err(|e| e.to_string())?);
    let (emg, audio) = (session.emg().unwrap(), session.audio().unwrap());
    let duration = emg.duration_s();
    let start = || {
        let mut s = SessionState::new(SessionConfig::new(Some(2000.0), Some(48_000.0))).unwrap();
        s.start_calibration().unwrap();
        s.set_calibration(reference.calibration).unwrap();
        s.start_practice(reference.clone(), reference.schedule.clone()).unwrap();
        s
    };

    let mut live = start();
    let frames = replay(&mut live, emg, audio, 40.0);
    let expected = (duration * 30.0).round() as i64;
    ensure(expected == 1800, || format!("fixture lasts {duration} s"))?;
    ensure((frames.len() as i64 - expected).abs() <= 1, || format!("{} frames", frames.len()))?;

    let batch = grid_metrics(Some(emg), Some(audio), Some(&reference.calibration), &cfg).map_err(|e| e.to_string())?;
    ensure(batch.len() == live.bins().len(), || format!("{} batch bins vs {} live", batch.len(), live.bins().len()))?;
    let mut worst = 0.0f64;
    for (l, b) in live.bins().iter().zip(&batch) {
        let m = &b.metrics;
        for (x, y) in [
            (l.rms_norm, m.rms_norm),
            (l.stability_window, m.stability_window),
            (l.envelope_mean, m.envelope_mean),
            (l.spr, m.spr),
        ] {
            worst = worst.max((x - y).abs());
        }
        ensure(l.f0.is_some() == m.f0.is_some(), || "voicing differs".into())?;
        if let (Some(a), Some(b)) = (l.f0, m.f0) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("live vs batch differ by {worst}"))?;

    let cut_s = 21.37;
    let mut part_state = start();
    let part = replay(
        &mut part_state,
        &emg.slice(0, (cut_s * 2000.0) as usize),
        &audio.slice(0, (cut_s * 48_000.0) as usize),
        100.0,
    );
    ensure(!part.is_empty() && part[..] == frames[..part.len()], || "truncated replay diverges".into())?;
    Ok(format!("{} frames, {} bins, max diff {worst:.1e}, prefix {} frames", frames.len(), batch.len(), part.len()))
}

fn osf_path() -> Option<PathBuf> {
    std::env::var_os("VOCALIS_OSF_EXPERT").map(PathBuf::from).filter(|p| p.is_file())
}

fn main() {
    let mut runner = Runner { failed: Vec::new() };
    runner.run("stability metric", secs(1), stability_criterion);
    runner.run("envelope", secs(1), envelope_criterion);
    runner.run("singing power ratio", secs(5), spr_criterion);
    runner.run("vocal-fold length", secs(1), length_criterion);
    runner.run("wilcoxon and fdr", secs(30), wilcoxon_criterion);
    runner.run("pca", secs(1), pca_criterion);
    let (_dir, session) = pipeline_fixture();
    runner.run("pipeline equivalence", secs(10), || pipeline_criterion(&session));
    runner.run("scale schedule", None, schedule_criterion);
    match osf_path() {
        Some(path) => runner.run("expert emg-spr correlation", None, || {
            let report = correlate_session(&path, &Config::default()).map_err(|e| e.to_string())?;
            let r = report.overall.r;
            ensure((0.70..=0.80).contains(&r), || format!("r = {r:.3}"))?;
            Ok(format!("r = {r:.3}, p = {:.2e}", report.overall.p))
        }),
        None => runner.skip("expert emg-spr correlation", "(VOCALIS_OSF_EXPERT not set to a session manifest)"),
    }
    if !runner.failed.is_empty() {
        println!("acceptance: {} failed: {:?}", runner.failed.len(), runner.failed);
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
