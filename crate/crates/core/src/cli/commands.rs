use serde_json::json;

use super::config::{DefendConfig, SimulateConfig, ThreatConfig};
use super::{digest, load_config, manifest, CliError, CommonArgs, OutDir};
use crate::defense::{
    cell_search, simulate_dos_probability, simulate_rotating_blacklist, AttackerModel, BlacklistTrace,
    DefenseError, SearchConfig,
};
use crate::grid::{build_grid, occupancy_map, ChannelKind, GridConfig, GridError};
use crate::jamsim::{
    failure_sweep, level_crossing, simulate_ber, simulate_bler, simulate_pss_detection, theoretical_qpsk_ber,
    DetectorSetup, JammerSpec, LinkConfig, Modulation, SimError, SimResult,
};
use crate::rng::derive_seed;
use crate::sequences::SequenceError;
use crate::threat::{
    apply_overrides, assess, default_attack_table, jamming_gain, ranking_scatter, round_db, ThreatError,
    REPORT_HEADER,
};

fn num(x: f64) -> String {
    format!("{x}")
}

fn grid_err(e: GridError) -> CliError {
    CliError::Config(e.to_string())
}

fn threat_err(e: ThreatError) -> CliError {
    CliError::Config(e.to_string())
}

fn sim_err(e: SimError) -> CliError {
    match e {
        SimError::InvalidConfig(_)
        | SimError::UnsupportedChannel { .. }
        | SimError::Sequence(SequenceError::InvalidDetector(_) | SequenceError::TooShort(..)) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn defense_err(e: DefenseError) -> CliError {
    match e {
        DefenseError::ClockRegression { .. } => CliError::Runtime(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn rate_cells(r: &SimResult) -> Vec<String> {
    vec![
        num(r.estimate),
        num(r.ci_halfwidth_95),
        r.events.to_string(),
        r.trials.to_string(),
        r.ci_valid.to_string(),
    ]
}

fn rate_header<'a>(x: &'a str, y: &'a str) -> Vec<&'a str> {
    vec![x, y, "ci_halfwidth_95", "events", "trials", "ci_valid"]
}

pub(super) fn grid(args: &CommonArgs) -> Result<(), CliError> {
    let config: GridConfig = load_config(args.config.as_deref())?;
    let grid = build_grid(&config).map_err(grid_err)?;
    let map = occupancy_map(&grid);
    let mut out = OutDir::create(&args.out)?;

    let mut csv_bytes = Vec::new();
    map.write_csv(&mut csv_bytes).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.write("occupancy.csv", &csv_bytes)?;
    let mut text = map.to_json().map_err(|e| CliError::Runtime(e.to_string()))?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    out.write("occupancy.json", text.as_bytes())?;

    let rows: Vec<Vec<String>> = ChannelKind::ALL
        .into_iter()
        .filter(|k| k.direction() == Some(config.direction) || (k.direction().is_none() && grid.re_count(*k) > 0))
        .map(|k| {
            vec![
                k.to_string(),
                grid.re_count(k).to_string(),
                num(grid.re_count(k) as f64 / grid.dims().res_per_frame as f64),
                grid.footprint_count(k).to_string(),
                num(grid.footprint_fraction(k)),
            ]
        })
        .collect();
    out.write_csv(
        "sparsity.csv",
        &["channel", "re_count", "fraction", "footprint_re_count", "footprint_fraction"],
        &rows,
    )?;

    let mut notes = Vec::new();
    if !config.is_reference_setup() {
        notes.push("grid differs from the 20 MHz / 30 kHz / below-3 GHz reference setup".into());
    }
    out.finish(manifest("grid", digest(&config)?, None, notes))
}

pub(super) fn threat(args: &CommonArgs) -> Result<(), CliError> {
    let config: ThreatConfig = load_config(args.config.as_deref())?;
    let mut table = default_attack_table();
    apply_overrides(&mut table, &config.overrides).map_err(threat_err)?;
    let entries = assess(&config.grid, &table).map_err(threat_err)?;
    let scatter = ranking_scatter(&entries);
    let mut out = OutDir::create(&args.out)?;

    let report: Vec<Vec<String>> = entries.iter().map(|e| e.report_row().to_vec()).collect();
    out.write_csv("threat_table.csv", &REPORT_HEADER, &report)?;

    let raw: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.attack.to_string(),
                e.modulation.clone(),
                e.coding.clone(),
                num(e.re_fraction),
                e.sync_required.to_string(),
                e.params_required.to_string(),
                num(e.js_ch_db),
                num(e.js_frame_db),
                round_db(e.js_ch_db).to_string(),
                round_db(e.js_frame_db).to_string(),
                e.complexity_score.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "threat_entries.csv",
        &[
            "attack",
            "modulation",
            "coding",
            "re_fraction",
            "sync_required",
            "params_required",
            "js_ch_db",
            "js_frame_db",
            "js_ch_db_display",
            "js_frame_db_display",
            "complexity_score",
        ],
        &raw,
    )?;

    let points: Vec<Vec<String>> = scatter
        .iter()
        .map(|p| vec![p.attack.to_string(), num(p.efficiency_db), p.complexity_score.to_string()])
        .collect();
    out.write_csv("scatter.csv", &["attack", "efficiency_db", "complexity_score"], &points)?;

    let dims = crate::numerology::grid_dimensions(config.grid.bw_mhz, config.grid.scs_khz)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let ssb_gain = jamming_gain(crate::grid::SSB_SUBCARRIERS as f64 / dims.subcarriers as f64).ok();
    out.write_json(
        "threat.json",
        &json!({
            "reference_setup": config.grid.is_reference_setup(),
            "ssb_band_jamming_gain_db": ssb_gain,
            "entries": entries,
            "scatter": scatter,
        }),
    )?;

    let mut notes = Vec::new();
    if !config.grid.is_reference_setup() {
        notes.push("grid differs from the 20 MHz / 30 kHz / below-3 GHz reference setup".into());
    }
    if !config.overrides.is_empty() {
        notes.push("attack table overridden".into());
    }
    out.finish(manifest("threat", digest(&config)?, None, notes))
}

pub(super) fn simulate(args: &CommonArgs) -> Result<(), CliError> {
    let mut config: SimulateConfig = load_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if config.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let seed = config.seed;
    let trials = config.trials;
    let mut out = OutDir::create(&args.out)?;
    let mut results = serde_json::Map::new();
    results.insert("seed".into(), json!(seed));
    results.insert("trials".into(), json!(trials));

    if let Some(ber) = &config.ber {
        if ber.ebn0_db.is_empty() {
            return Err(CliError::Config("ber.ebn0_db is empty".into()));
        }
        let ber_seed = derive_seed(seed, 1);
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for &ebn0 in &ber.ebn0_db {
            let r = simulate_ber(ebn0, ber.bits, ber_seed).map_err(sim_err)?;
            let theory = theoretical_qpsk_ber(ebn0);
            let mut row = vec![num(ebn0)];
            row.extend(rate_cells(&r));
            row.push(num(theory));
            rows.push(row);
            records.push(json!({ "ebn0_db": ebn0, "theory": theory, "result": r }));
        }
        let mut header = rate_header("ebn0_db", "ber");
        header.push("theory");
        out.write_csv("ber.csv", &header, &rows)?;
        results.insert("ber".into(), json!({ "config": ber, "points": records }));
    }

    if let Some(bler) = &config.bler {
        let link = LinkConfig {
            snr_db: bler.snr_db,
            modulation: Modulation::Qpsk,
            code: bler.code,
            trials,
            seed: derive_seed(seed, 2),
        };
        link.validate().map_err(sim_err)?;
        bler.sweep.validate().map_err(sim_err)?;
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for js in bler.sweep.points() {
            let r = simulate_bler(&link, &JammerSpec::on_channel(bler.target, js)).map_err(sim_err)?;
            let mut row = vec![num(js)];
            row.extend(rate_cells(&r));
            rows.push(row);
            records.push(json!({ "js_ch_db": js, "result": r }));
        }
        out.write_csv("bler.csv", &rate_header("js_ch_db", "bler"), &rows)?;
        results.insert("bler".into(), json!({ "config": bler, "link": link, "points": records }));
    }

    if let Some(pss) = &config.pss {
        pss.sweep.validate().map_err(sim_err)?;
        let setup = DetectorSetup::calibrate(
            pss.window_len,
            pss.snr_db,
            pss.false_alarm,
            pss.calibration_trials,
            derive_seed(seed, 3),
        )
        .map_err(sim_err)?;
        let pss_seed = derive_seed(seed, 4);
        let mut rows = Vec::new();
        let mut curve = Vec::new();
        let mut records = Vec::new();
        for js in pss.sweep.points() {
            let r = simulate_pss_detection(js, trials, pss_seed, &setup).map_err(sim_err)?;
            let mut row = vec![num(js)];
            row.extend(rate_cells(&r));
            rows.push(row);
            curve.push((js, r.estimate));
            records.push(json!({ "js_ch_db": js, "result": r }));
        }
        out.write_csv("pss_detection.csv", &rate_header("js_ch_db", "pd"), &rows)?;
        results.insert(
            "pss".into(),
            json!({
                "config": pss,
                "calibration": setup.calibration,
                "js_50_db": level_crossing(&curve, 0.5),
                "points": records,
            }),
        );
    }

    if let Some(section) = &config.thresholds {
        section.sweep.validate().map_err(sim_err)?;
        let mut summary = Vec::new();
        let mut reports = Vec::new();
        for (i, target) in section.channels.iter().enumerate() {
            let link = LinkConfig {
                snr_db: target.snr_db,
                modulation: Modulation::Qpsk,
                code: section.code,
                trials,
                seed: derive_seed(seed, 10 + i as u64),
            };
            let report = failure_sweep(target.channel, &link, &section.sweep).map_err(sim_err)?;
            summary.push(vec![
                target.channel.to_string(),
                num(target.snr_db),
                report.threshold_db.map(num).unwrap_or_default(),
            ]);
            let rows: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|p| {
                    let mut row = vec![num(p.js_ch_db)];
                    row.extend(rate_cells(&p.failure));
                    row
                })
                .collect();
            let name = format!("threshold_sweep_{i}_{}.csv", target.channel.as_str().to_lowercase());
            out.write_csv(&name, &rate_header("js_ch_db", "failure"), &rows)?;
            reports.push(json!({ "snr_db": target.snr_db, "link": link, "report": report }));
        }
        out.write_csv("thresholds.csv", &["channel", "snr_db", "threshold_db"], &summary)?;
        results.insert("thresholds".into(), json!(reports));
    }

    out.write_json("results.json", &results)?;
    out.finish(manifest("simulate", digest(&config)?, Some(seed), Vec::new()))
}

fn trace_summary(t: &BlacklistTrace, duration_ms: f64) -> serde_json::Value {
    json!({
        "decay_ms": t.decay_ms,
        "max_size": t.max_size,
        "max_size_second_half": t.max_after(duration_ms / 2.0),
        "final_size": t.final_size,
        "insertions": t.samples.len(),
    })
}

pub(super) fn defend(args: &CommonArgs) -> Result<(), CliError> {
    let mut config: DefendConfig = load_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if config.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    config.attacker.validate().map_err(defense_err)?;
    config.search.validate().map_err(defense_err)?;
    config.randomization.validate().map_err(defense_err)?;
    let off = SearchConfig { mitigation_enabled: false, ..config.search };
    let on = SearchConfig { mitigation_enabled: true, ..config.search };
    let arms = |attacker: &AttackerModel| -> Result<(SimResult, SimResult), CliError> {
        let a = simulate_dos_probability(attacker, &off, &config.randomization, config.trials, config.seed);
        let b = simulate_dos_probability(attacker, &on, &config.randomization, config.trials, config.seed);
        Ok((a.map_err(defense_err)?, b.map_err(defense_err)?))
    };
    let mut out = OutDir::create(&args.out)?;

    let (p_off, p_on) = arms(&config.attacker)?;
    let separated = p_on.estimate + p_on.ci_halfwidth_95 < p_off.estimate - p_off.ci_halfwidth_95;

    let mut rows = Vec::new();
    let mut sweep = Vec::new();
    for &offset in &config.power_offsets_db {
        let attacker = AttackerModel { power_offset_db: offset, ..config.attacker };
        attacker.validate().map_err(defense_err)?;
        let (a, b) = arms(&attacker)?;
        rows.push(vec![num(offset), num(a.estimate), num(a.ci_halfwidth_95), num(b.estimate), num(b.ci_halfwidth_95)]);
        sweep.push(json!({ "power_offset_db": offset, "mitigation_off": a, "mitigation_on": b }));
    }
    out.write_csv(
        "dos_sweep.csv",
        &["power_offset_db", "p_dos_off", "ci_halfwidth_95_off", "p_dos_on", "ci_halfwidth_95_on"],
        &rows,
    )?;

    let searches = if config.beacons.is_empty() {
        serde_json::Value::Null
    } else {
        let a = cell_search(&config.beacons, &config.attacker, &off, config.seed).map_err(defense_err)?;
        let b = cell_search(&config.beacons, &config.attacker, &on, config.seed).map_err(defense_err)?;
        json!({ "mitigation_off": a, "mitigation_on": b })
    };

    let rotating = match &config.rotating {
        None => serde_json::Value::Null,
        Some(r) => {
            let attacker = AttackerModel { rotate_each_frame: true, ..config.attacker };
            let finite = SearchConfig { blacklist_decay_ms: Some(r.decay_ms), ..on };
            let forever = SearchConfig { blacklist_decay_ms: None, ..on };
            let f = simulate_rotating_blacklist(&attacker, &finite, r.duration_ms, config.seed).map_err(defense_err)?;
            let g = simulate_rotating_blacklist(&attacker, &forever, r.duration_ms, config.seed).map_err(defense_err)?;
            let rows: Vec<Vec<String>> = [(&f, num(r.decay_ms)), (&g, "none".to_string())]
                .into_iter()
                .flat_map(|(t, label)| {
                    t.samples.iter().map(move |(ms, n)| vec![label.clone(), num(*ms), n.to_string()])
                })
                .collect();
            out.write_csv("blacklist_trace.csv", &["decay_ms", "time_ms", "size"], &rows)?;
            json!({
                "duration_ms": r.duration_ms,
                "finite_decay": trace_summary(&f, r.duration_ms),
                "no_decay": trace_summary(&g, r.duration_ms),
            })
        }
    };

    out.write_json(
        "defend.json",
        &json!({
            "trials": config.trials,
            "seed": config.seed,
            "mitigation_off": p_off,
            "mitigation_on": p_on,
            "ci_separated": separated,
            "power_offset_sweep": sweep,
            "searches": searches,
            "rotating": rotating,
        }),
    )?;
    out.finish(manifest("defend", digest(&config)?, Some(config.seed), Vec::new()))
}
