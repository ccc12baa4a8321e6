use proptest::prelude::*;

use super::*;

fn small(schemes: &str, extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"scheme": {schemes}, "M": 4, "r_u_th": 1.0, "r_d_th": 2.0, "seeds": 2{extra}}}"#
    ))
    .unwrap()
}

fn csv_bytes(res: &ExperimentResult) -> (Vec<u8>, Vec<u8>) {
    let mut s = Vec::new();
    let mut t = Vec::new();
    write_summary_csv(&res.summary, &mut s).unwrap();
    write_trace_csv(&res.trace, &mut t).unwrap();
    (s, t)
}

#[test]
fn minimal_config_takes_defaults() {
    let cfg = small(r#""star-fd""#, "");
    assert_eq!(cfg.schemes(), vec![Scheme::StarFd]);
    assert_eq!(cfg.seeds.to_vec(), vec![0, 1]);
    assert_eq!(cfg.noise_u_dbm, -80.0);
    assert_eq!(cfg.solver, SolverConfig::default());
    let pts = cfg.points().unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].channel.num_elements, 4);
    assert!((pts[0].noise.sigma_u_sq - 1e-8).abs() < 1e-22);
}

#[test]
fn config_round_trips_through_json() {
    let cfg = figure_config(4, 3).unwrap();
    assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
}

#[test]
fn config_errors() {
    let bad = [
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "typo": 1}"#,
        r#"{"scheme": "star-xd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2}"#,
        r#"{"scheme": [], "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 0}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": -1, "r_d_th": 2, "seeds": 2}"#,
        r#"{"scheme": "con-fd", "M": 5, "r_u_th": 1, "r_d_th": 2, "seeds": 2}"#,
        r#"{"scheme": "star-fd", "M": 0, "r_u_th": 1, "r_d_th": 2, "seeds": 2}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "sweep": {"param": "M", "values": [4, 4.5]}}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "sweep": {"param": "K", "values": [1]}}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "sweep": {"param": "M", "values": []}}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "solver": {"eps2": 0}}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "channel": {"d0": -1}}"#,
        r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "channel": {"num_elements": 4}}"#,
        r#"not json"#,
    ];
    for text in bad {
        assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
    }
}

#[test]
fn seed_list_and_sweeps() {
    let cfg = ExperimentConfig::from_json(
        r#"{"scheme": ["star-hd", "con-fd"], "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": [7, 3],
            "sweep": {"param": "si_pathloss_db", "values": [-90, -120]}}"#,
    )
    .unwrap();
    assert_eq!(cfg.seeds.to_vec(), vec![7, 3]);
    let pts = cfg.points().unwrap();
    assert_eq!(pts.iter().map(|p| p.channel.si_pathloss_db).collect::<Vec<_>>(), vec![-90.0, -120.0]);
    let cfg = small(r#""star-fd""#, r#", "sweep": {"param": "r_d_th", "values": [1, 3]}"#);
    let rds: Vec<f64> = cfg.points().unwrap().iter().map(|p| p.req.r_d_th).collect();
    assert_eq!(rds, vec![1.0, 3.0]);
}

#[test]
fn duplicate_seed_key_is_rejected() {
    let text = r#"{"scheme": "star-fd", "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2, "seeds": 3}"#;
    assert!(ExperimentConfig::from_json(text).is_err());
}

#[test]
fn rows_follow_point_scheme_seed_order() {
    let cfg = small(
        r#"["con-fd", "star-hd", "star-fd"]"#,
        r#", "sweep": {"param": "M", "values": [4, 6]}"#,
    );
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.summary.len(), 2 * 3 * 2);
    let keys: Vec<(f64, Scheme, u64)> = res
        .summary
        .iter()
        .map(|r| (r.sweep_value.unwrap(), r.scheme, r.seed))
        .collect();
    let mut expect = Vec::new();
    for m in [4.0, 6.0] {
        for s in [Scheme::ConFd, Scheme::StarHd, Scheme::StarFd] {
            for seed in [0, 1] {
                expect.push((m, s, seed));
            }
        }
    }
    assert_eq!(keys, expect);
    let failed: Vec<_> = res.summary.iter().filter(|r| r.status.is_failure()).collect();
    assert!(failed.is_empty(), "{failed:?}");
    for r in &res.summary {
        assert!((r.r_u_achieved.unwrap() - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.r_d_achieved.unwrap() - 2.0).abs() < 1e-6, "{r:?}");
        assert!((r.p_u.unwrap() + r.p_d.unwrap() - r.total.unwrap()).abs() <= 1e-12 * r.total.unwrap());
        assert_eq!(r.hd_slot_pu.is_some(), r.scheme == Scheme::StarHd);
    }
    // one trace row per HD run, one per AO iteration otherwise
    let per_run: usize = res.summary.iter().map(|r| r.iterations).sum();
    assert_eq!(res.trace.len(), per_run);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let cfg = small(r#"["star-fd", "star-hd", "con-fd"]"#, "");
    let a = csv_bytes(&run_experiment(&cfg).unwrap());
    let b = csv_bytes(&run_experiment(&cfg).unwrap());
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = single.install(|| csv_bytes(&run_experiment(&cfg).unwrap()));
    assert_eq!(a, c);
}

#[test]
fn summary_csv_layout() {
    let cfg = small(r#""star-hd""#, r#", "sweep": {"param": "si_pathloss_db", "values": [-130, -80]}"#);
    let res = run_experiment(&cfg).unwrap();
    let (s, t) = csv_bytes(&res);
    let text = String::from_utf8(s).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_HEADER.join(","));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.len(), 14);
        assert_eq!(r[0], "star-hd");
        assert_eq!(r[1], "si_pathloss_db");
        assert_eq!(r[13], "ok");
    }
    // HD ignores the SI sweep: same seed, same bytes in every power column
    assert_eq!(rows[0][4..9], rows[2][4..9]);
    assert_eq!(rows[1][4..9], rows[3][4..9]);
    assert_eq!(rows[0][2], "-130");
    let trace = String::from_utf8(t).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER.join(","));
    assert_eq!(trace.lines().count(), 5);
}

#[test]
fn failures_become_rows() {
    // one transmit element cannot null the interference and SI at 0 dB swamps the uplink
    let cfg = ExperimentConfig::from_json(
        r#"{"scheme": "con-fd", "M": 2, "r_u_th": 1, "r_d_th": 6, "seeds": 2, "channel": {"si_pathloss_db": 0}}"#,
    )
    .unwrap();
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.summary.len(), 2);
    assert_eq!(res.failures(), 2);
    for r in &res.summary {
        assert!(r.status.label().starts_with("failed: initialization"), "{}", r.status.label());
        assert!(r.total.is_none());
    }
    let (s, _) = csv_bytes(&res);
    let text = String::from_utf8(s).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn outputs_land_in_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(r#""star-hd""#, "");
    let res = run_experiment(&cfg).unwrap();
    write_outputs(&cfg, &res, dir.path()).unwrap();
    for f in ["summary.csv", "trace.csv", "config.json"] {
        assert!(dir.path().join(f).is_file());
    }
    let back = ExperimentConfig::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn figure_configs() {
    assert_eq!(figure_config(2, 5).unwrap().points().unwrap().len(), 1);
    let f3 = figure_config(3, 20).unwrap();
    assert_eq!(f3.points().unwrap().len() * f3.schemes().len() * f3.seeds.to_vec().len(), 240);
    assert_eq!(figure_config(4, 1).unwrap().points().unwrap().len(), 6);
    let f5 = figure_config(5, 1).unwrap();
    assert_eq!(f5.sweep.as_ref().unwrap().values.first(), Some(&-130.0));
    assert!(figure_config(6, 1).is_err());
}

#[test]
fn zero_power_formats_as_negative_infinity() {
    assert_eq!(format_float(mw_to_dbm(0.0)), "-inf");
    assert_eq!(dbm_to_mw("-inf".parse().unwrap()), 0.0);
    assert!((mw_to_dbm(1e-8) + 80.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn dbm_text_round_trips(exp in -15.0f64..6.0, frac in 1.0f64..10.0) {
        let mw = frac * 10f64.powf(exp);
        let text = format_float(mw_to_dbm(mw));
        let back = dbm_to_mw(text.parse::<f64>().unwrap());
        prop_assert!((back - mw).abs() <= 1e-12 * mw);
    }
}
