//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nr_threat::defense::{simulate_dos_probability, simulate_rotating_blacklist, AttackerModel, ScenarioRandomization, SearchConfig};
use nr_threat::grid::{ChannelKind, GridConfig};
use nr_threat::jamsim::{
    dos_threshold, failure_sweep, level_crossing, simulate_ber, simulate_bler, simulate_pss_detection, DetectorSetup,
    JammerSpec, LinkConfig, SimResult, Sweep,
};
use nr_threat::rng::{derive_seed, trial_rng};
use nr_threat::sequences::{gen_pss, gen_sss, gen_zadoff_chu, CellId};
use nr_threat::threat::{assess, default_attack_table, jamming_gain, ranking_scatter, Attack};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Wilson score interval at 95%; stays non-degenerate at 0 and 1 events.
fn wilson(events: usize, trials: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = events as f64 / n;
    let centre = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
    (centre - half, centre + half)
}

/// No later point sits significantly below an earlier one.
fn non_decreasing_within_ci(rates: &[(f64, &SimResult)]) -> Result<(), String> {
    for (i, (xa, a)) in rates.iter().enumerate() {
        for (xb, b) in &rates[i + 1..] {
            let (lo_a, _) = wilson(a.events, a.trials);
            let (_, hi_b) = wilson(b.events, b.trials);
            ensure(hi_b >= lo_a, || format!("{} at {xa} dB exceeds {} at {xb} dB", a.estimate, b.estimate))?;
        }
    }
    Ok(())
}

fn sparsity() -> Check {
    let entries = assess(&GridConfig::reference(), &default_attack_table()).map_err(|e| e.to_string())?;
    let by: BTreeMap<Attack, f64> = entries.iter().map(|e| (e.attack, 100.0 * e.re_fraction)).collect();
    let expected = [
        (Attack::Pbch, 1.7, 0.3),
        (Attack::PbchDmrs, 0.4, 0.3),
        (Attack::Sss, 0.3, 0.3),
        (Attack::PssSpoofing, 0.1, 0.3),
        (Attack::Pdcch, 7.0, 0.3),
        (Attack::Pdsch, 90.0, 0.3),
        (Attack::Pucch, 10.0, 2.0),
        (Attack::Prach, 2.0, 2.0),
        (Attack::Pusch, 90.0, 2.0),
    ];
    let mut got = Vec::new();
    for (attack, pct, tol) in expected {
        let v = by[&attack];
        ensure((v - pct).abs() <= tol, || format!("{attack}: {v:.3}% vs {pct}% +-{tol}"))?;
        got.push(format!("{attack} {v:.2}%"));
    }
    Ok(got.join(", "))
}

fn js_frame_column() -> Check {
    let printed = [
        (Attack::Pdsch, -1.0),
        (Attack::Pbch, -17.0),
        (Attack::Pdcch, -11.0),
        (Attack::Pusch, -1.0),
        (Attack::Pucch, -10.0),
        (Attack::Prach, -7.0),
        (Attack::PssSpoofing, -20.0),
        (Attack::Sss, -15.0),
        (Attack::PbchDmrs, -21.0),
    ];
    let entries = assess(&GridConfig::reference(), &default_attack_table()).map_err(|e| e.to_string())?;
    ensure(entries.len() == 9, || format!("{} rows", entries.len()))?;
    let mut worst: f64 = 0.0;
    for (attack, js_f) in printed {
        let e = entries.iter().find(|e| e.attack == attack).ok_or(format!("{attack} missing"))?;
        let diff = (e.js_frame_db - js_f).abs();
        ensure(diff <= 1.0, || format!("{attack}: {:.2} dB vs {js_f} dB", e.js_frame_db))?;
        worst = worst.max(diff);
    }
    Ok(format!("nine rows, worst deviation {worst:.2} dB"))
}

fn ssb_band_gain() -> Check {
    let g = jamming_gain(240.0 / 1272.0).map_err(|e| e.to_string())?;
    let oracle = 10.0 * (1272.0_f64 / 240.0).log10();
    ensure((g - oracle).abs() < 1e-12, || format!("{g} vs {oracle}"))?;
    ensure((g - 7.2).abs() <= 0.05 && (g - 7.0).abs() <= 0.5, || format!("gain {g:.3} dB"))?;
    Ok(format!("{g:.2} dB"))
}

fn scatter_structure() -> Check {
    let entries = assess(&GridConfig::reference(), &default_attack_table()).map_err(|e| e.to_string())?;
    let points = ranking_scatter(&entries);
    let strong_free: Vec<Attack> =
        points.iter().filter(|p| p.complexity_score == 0 && p.efficiency_db >= 15.0).map(|p| p.attack).collect();
    ensure(strong_free == [Attack::PssSpoofing], || format!("complexity-0, >= 15 dB: {strong_free:?}"))?;
    let best_c1 = points
        .iter()
        .filter(|p| p.complexity_score == 1)
        .max_by(|a, b| a.efficiency_db.total_cmp(&b.efficiency_db))
        .ok_or("no complexity-1 attack")?;
    let pbch_ties = points
        .iter()
        .filter(|p| p.complexity_score == 1 && p.attack != Attack::Pbch && p.efficiency_db >= best_c1.efficiency_db)
        .count();
    ensure(best_c1.attack == Attack::Pbch && pbch_ties == 0, || format!("best complexity-1: {:?}", best_c1.attack))?;
    for p in points.iter().filter(|p| matches!(p.attack, Attack::Pdsch | Attack::Pusch)) {
        ensure(p.efficiency_db <= 1.0, || format!("{}: {:.2} dB", p.attack, p.efficiency_db))?;
    }
    Ok(format!("PSS spoofing unique, PBCH tops complexity 1 at {:.2} dB", best_c1.efficiency_db))
}

fn periodic(a: &[i8], b: &[i8], lag: usize) -> i32 {
    (0..a.len()).map(|n| i32::from(a[(n + lag) % a.len()]) * i32::from(b[n])).sum()
}

fn rotation_class(s: &[i8]) -> Vec<i8> {
    (0..s.len()).map(|r| s[r..].iter().chain(&s[..r]).copied().collect::<Vec<_>>()).min().unwrap()
}

fn sequences() -> Check {
    for id in 0..3u8 {
        let p = gen_pss(id).map_err(|e| e.to_string())?;
        let v = p.values();
        for lag in 0..v.len() {
            let c = periodic(v, v, lag);
            let want = if lag == 0 { 127 } else { -1 };
            ensure(c == want, || format!("PSS {id} lag {lag}: {c}"))?;
        }
    }

    let sss: Vec<Vec<i8>> = (0..1008u16)
        .map(|c| Ok(gen_sss(CellId::from_cell_id(c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.values().to_vec()))
        .collect::<Result<_, String>>()?;
    let distinct: HashSet<&Vec<i8>> = sss.iter().collect();
    ensure(distinct.len() == 1008, || format!("{} distinct SSS", distinct.len()))?;

    let mut lag0_max = 0;
    for (i, a) in sss.iter().enumerate() {
        for b in &sss[i + 1..] {
            lag0_max = lag0_max.max(periodic(a, b, 0).abs());
        }
    }
    ensure(lag0_max <= 17, || format!("lag-0 cross-correlation {lag0_max}"))?;

    let classes: Vec<Vec<i8>> = sss.iter().map(|s| rotation_class(s)).collect();
    let mut rng = trial_rng(5, 0);
    let (mut pairs, mut all_lag_max) = (0, 0);
    while pairs < 500 {
        let (i, j) = (rng.random_range(0..1008), rng.random_range(0..1008));
        if classes[i] == classes[j] {
            continue;
        }
        for lag in 0..127 {
            all_lag_max = all_lag_max.max(periodic(&sss[i], &sss[j], lag).abs());
        }
        pairs += 1;
    }
    ensure(all_lag_max <= 17, || format!("sampled cross-correlation {all_lag_max}"))?;

    for (root, len) in [(1, 139), (25, 139), (129, 839), (838, 839), (2, 63)] {
        let zc = gen_zadoff_chu(root, len).map_err(|e| e.to_string())?;
        let x = &zc.values;
        ensure(x.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12), || format!("ZC({root},{len}) modulus"))?;
        let n = x.len();
        for lag in 1..n {
            let c: num_complex::Complex64 = (0..n).map(|k| x[(k + lag) % n] * x[k].conj()).sum();
            ensure(c.norm() < 1e-8 * n as f64, || format!("ZC({root},{len}) lag {lag}: {}", c.norm()))?;
        }
    }
    Ok(format!("1008 distinct SSS, lag-0 max {lag0_max}, sampled max {all_lag_max}"))
}

fn ber_calibration() -> Check {
    let seed = derive_seed(1, 1);
    let mut got = Vec::new();
    for ebn0 in [0.0, 2.0, 4.0, 6.0, 8.0] {
        let r = simulate_ber(ebn0, 1_000_000, seed).map_err(|e| e.to_string())?;
        // Q(sqrt(2 Eb/N0)) as an independent oracle via statrs erfc
        let q = 0.5 * statrs::function::erf::erfc((10f64.powf(ebn0 / 10.0)).sqrt());
        ensure(r.trials == 1_000_000, || format!("{} bits", r.trials))?;
        ensure((r.estimate - q).abs() <= r.ci_halfwidth_95, || {
            format!("{ebn0} dB: {:.3e} +- {:.1e} vs {q:.3e}", r.estimate, r.ci_halfwidth_95)
        })?;
        got.push(format!("{ebn0}:{:.2e}", r.estimate));
    }
    Ok(got.join(" "))
}

fn polar_dos() -> Check {
    let trials = 2000;
    let edge = |snr: f64| simulate_bler(&LinkConfig::control_channel(snr, trials, 7), &JammerSpec::off());
    let low = edge(-10.0).map_err(|e| e.to_string())?;
    let high = edge(10.0).map_err(|e| e.to_string())?;
    ensure(low.estimate >= 0.99, || format!("BLER {} at SINR -10 dB", low.estimate))?;
    ensure(high.estimate <= 0.01, || format!("BLER {} at SINR +10 dB", high.estimate))?;

    let link = LinkConfig::control_channel(10.0, trials, derive_seed(1, 10));
    let report = dos_threshold(ChannelKind::Pbch, &link, &Sweep::default()).map_err(|e| e.to_string())?;
    let curve: Vec<(f64, &SimResult)> = report.points.iter().map(|p| (p.js_ch_db, &p.failure)).collect();
    non_decreasing_within_ci(&curve)?;
    let threshold = report.threshold_db.ok_or("no threshold")?;
    Ok(format!("BLER {:.4} at -10 dB, {:.4} at +10 dB, PBCH threshold {threshold} dB at SNR 10 dB", low.estimate, high.estimate))
}

fn pss_detection() -> Check {
    let trials = 2000;
    let setup = DetectorSetup::with_defaults(20.0, 11).map_err(|e| e.to_string())?;
    let clean = simulate_pss_detection(f64::NEG_INFINITY, trials, 4, &setup).map_err(|e| e.to_string())?;
    ensure(clean.estimate >= 0.999, || format!("unjammed Pd {}", clean.estimate))?;

    let link = LinkConfig::control_channel(20.0, trials, 4);
    let sweep = Sweep { start_db: -10.0, stop_db: 30.0, step_db: 1.0 };
    let report = failure_sweep(ChannelKind::Pss, &link, &sweep).map_err(|e| e.to_string())?;
    let missed: Vec<(f64, &SimResult)> = report.points.iter().map(|p| (p.js_ch_db, &p.failure)).collect();
    non_decreasing_within_ci(&missed)?;
    let pd: Vec<(f64, f64)> = report.points.iter().map(|p| (p.js_ch_db, 1.0 - p.failure.estimate)).collect();
    let js50 = level_crossing(&pd, 0.5).ok_or("Pd never crosses 0.5")?;
    Ok(format!("unjammed Pd {:.4}, J/S_50 {js50:.2} dB", clean.estimate))
}

fn defense() -> Check {
    let trials = 1000;
    let attacker = AttackerModel::fake_pss(3, 6.0);
    let rand = ScenarioRandomization::default();
    let off = simulate_dos_probability(&attacker, &SearchConfig::new(false), &rand, trials, 1).map_err(|e| e.to_string())?;
    let on = simulate_dos_probability(&attacker, &SearchConfig::new(true), &rand, trials, 1).map_err(|e| e.to_string())?;
    ensure(off.estimate >= 0.9, || format!("unmitigated P_DoS {}", off.estimate))?;
    ensure(on.estimate < off.estimate, || format!("{} vs {}", on.estimate, off.estimate))?;
    let (on_w, off_w) = (wilson(on.events, on.trials), wilson(off.events, off.trials));
    ensure(on_w.1 < off_w.0 && on.ci().1 < off.ci().0, || format!("CIs overlap: {on_w:?} {off_w:?}"))?;

    let duration = 10_000.0;
    let rotating = AttackerModel { rotate_each_frame: true, ..attacker };
    let decay = 100.0;
    let finite = SearchConfig { blacklist_decay_ms: Some(decay), ..SearchConfig::new(true) };
    let forever = SearchConfig { blacklist_decay_ms: None, ..finite };
    let f = simulate_rotating_blacklist(&rotating, &finite, duration, 1).map_err(|e| e.to_string())?;
    let g = simulate_rotating_blacklist(&rotating, &forever, duration, 1).map_err(|e| e.to_string())?;
    // at most n_fake insertions per period survive for `decay` ms
    let bound = rotating.n_fake_pss * ((decay / rotating.period_ms).ceil() as usize + 1);
    ensure(f.max_size <= bound, || format!("finite-decay blacklist reached {} > {bound}", f.max_size))?;
    ensure(f.max_after(duration / 2.0) <= f.max_size, || "late growth".into())?;
    ensure(g.final_size > bound, || format!("no-decay blacklist only reached {}", g.final_size))?;
    Ok(format!(
        "P_DoS off {:.3} on {:.3}; blacklist max {} (bound {bound}) vs {} without decay",
        off.estimate, on.estimate, f.max_size, g.final_size
    ))
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.insert(entry.file_name().to_string_lossy().into_owned(), bytes);
    }
    Ok(files)
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_nr-threat");
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sim_config = work.path().join("simulate.json");
    fs::write(
        &sim_config,
        r#"{
  "trials": 200,
  "ber": { "ebn0_db": [0, 4], "bits": 100000 },
  "bler": { "sweep": { "start_db": -5, "stop_db": 10, "step_db": 5 } },
  "pss": { "calibration_trials": 2000, "sweep": { "start_db": 0, "stop_db": 20, "step_db": 5 } },
  "thresholds": {
    "channels": [{ "channel": "PBCH", "snr_db": 10 }, { "channel": "SSS", "snr_db": 20 }],
    "sweep": { "start_db": -10, "stop_db": 20, "step_db": 10 }
  }
}"#,
    )
    .map_err(|e| e.to_string())?;
    let runs: [(&str, Vec<String>); 4] = [
        ("grid", vec![]),
        ("threat", vec![]),
        ("simulate", vec!["--config".into(), sim_config.display().to_string(), "--seed".into(), "9".into()]),
        ("defend", vec!["--trials".into(), "300".into()]),
    ];
    let mut total = 0;
    for (cmd, extra) in runs {
        let mut snaps = Vec::new();
        for rep in 0..2 {
            let out = work.path().join(format!("{cmd}-{rep}"));
            let status = Command::new(bin)
                .arg(cmd)
                .arg("--out")
                .arg(&out)
                .args(&extra)
                .env("SOURCE_DATE_EPOCH", "1700000000")
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("{cmd} exited with {status}"))?;
            snaps.push(snapshot(&out)?);
        }
        ensure(snaps[0].contains_key("manifest.json"), || format!("{cmd}: no manifest"))?;
        let names: Vec<&String> = snaps[0].keys().collect();
        ensure(names == snaps[1].keys().collect::<Vec<_>>(), || format!("{cmd}: file sets differ"))?;
        for (name, bytes) in &snaps[0] {
            ensure(snaps[1][name] == *bytes, || format!("{cmd}: {name} differs between runs"))?;
        }
        total += names.len();
    }
    Ok(format!("{total} files byte-identical across reruns of all four commands"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("sparsity column", sparsity, Some(Duration::from_secs(1))),
        ("J/S_F column", js_frame_column, Some(Duration::from_secs(1))),
        ("SSB-band jamming gain", ssb_band_gain, Some(Duration::from_secs(1))),
        ("ranking scatter structure", scatter_structure, Some(Duration::from_secs(1))),
        ("sequence properties", sequences, Some(Duration::from_secs(30))),
        ("QPSK BER calibration", ber_calibration, Some(Duration::from_secs(120))),
        ("polar DoS properties", polar_dos, Some(Duration::from_secs(300))),
        ("PSS detection properties", pss_detection, Some(Duration::from_secs(300))),
        ("fake-PSS defense", defense, Some(Duration::from_secs(120))),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, budget) {
            if took > limit {
                result = Err(format!("took {took:.2?}, budget {limit:?}"));
            }
        }
        match result {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({took:.2?}) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({took:.2?}) {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
