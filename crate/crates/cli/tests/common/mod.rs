#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use vocalis_core::dataset::emg_csv::{read_emg_csv, write_emg_csv};
use vocalis_core::dataset::parse_spn;
use vocalis_core::synth::SyntheticSession;
use vocalis_core::SampledSignal;

pub fn synth(pid: &str, low: &str, high: &str, seed: u64) -> SyntheticSession {
    let mut s = SyntheticSession::new(pid, parse_spn(low).unwrap(), parse_spn(high).unwrap());
    s.audio_rate_hz = 16_000;
    s.seed = seed;
    s
}

/// Replace the EMG inside `[start_s, end_s)` with a steady 150 Hz tone,
/// whose envelope is far flatter than the noise it replaces.
pub fn steady_segment(session_dir: &Path, start_s: f64, end_s: f64) {
    let path = session_dir.join("emg.csv");
    let emg = read_emg_csv(&path).unwrap();
    let rate = emg.rate_hz();
    let channels: Vec<Vec<f64>> = emg
        .channels()
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let t = i as f64 / rate;
                    if t >= start_s && t < end_s {
                        0.5 * (2.0 * PI * 150.0 * t).sin()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    write_emg_csv(&path, &SampledSignal::new(channels, rate, 0.0).unwrap()).unwrap();
}

/// Twelve participants over G3–G4, pre and post; post sessions get a steady
/// E4 when `shift_e4` is set. With `identical`, post copies pre exactly.
pub fn compare_fixture(root: &Path, shift_e4: bool, identical: bool) -> (PathBuf, PathBuf) {
    let pre = root.join("pre");
    let post = root.join("post");
    for p in 1..=12u64 {
        let pid = format!("P{p:02}");
        synth(&pid, "G3", "G4", p).write(&pre.join(&pid)).unwrap();
        let seed = if identical { p } else { 100 + p };
        let dir = post.join(&pid);
        synth(&pid, "G3", "G4", seed).write(&dir).unwrap();
        if shift_e4 {
            // G3 A3 B3 C4 D4 E4: the sixth two-second event
            steady_segment(&dir, 10.0, 12.0);
        }
    }
    (pre, post)
}

pub fn run(args: &[&str], env: Option<&Path>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["vocalis"];
    full.extend_from_slice(args);
    let code = vocalis_cli::run_with_env(full, env, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
