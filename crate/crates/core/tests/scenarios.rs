use gridlag::harness::config::ScenarioConfig;
use gridlag::harness::metrics::to_csv_bytes;
use gridlag::harness::{compare, run, sweep, SweepParam};
use gridlag::net::PredictorMode;

fn cfg(body: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(body).unwrap()
}

fn base(kind: &str, bots: &str, extra: &str) -> String {
    format!(
        r#"
seed = 42
[topology]
kind = "{kind}"
clients = 3
link = "lossless"
[grid]
latency_rate_ms = 400.0
[game]
players = 3
mu = 100
duration_ticks = 20
ball_start = [5.0, 5.0]
player_starts = [[1.0, 1.0], [1.0, 2.0], [9.0, 9.0]]
[bots]
kind = "{bots}"
reverse_every = 5
{extra}
"#
    )
}

#[test]
fn same_seed_same_hash_and_csv() {
    let c = cfg(&base(
        "client_server",
        "chase",
        "[prediction]\ndrop_prob = 0.2",
    ));
    let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
    assert_eq!(a.final_hash, b.final_hash);
    assert_eq!(
        to_csv_bytes(&a.metrics).unwrap(),
        to_csv_bytes(&b.metrics).unwrap()
    );
    let mut other = c.clone();
    other.seed = 43;
    assert_ne!(run(&other).unwrap().metrics, a.metrics);
}

#[test]
fn short_lossless_run_never_predicts() {
    let c =
        cfg(&base("client_server", "chase", "")
            .replace("duration_ticks = 20", "duration_ticks = 2"));
    let out = run(&c).unwrap();
    assert_eq!(out.metrics.len(), 2);
    assert!(out.metrics.iter().all(|m| !m.predicted && !m.stalled));
    assert_eq!(out.final_state, out.shadow_state);
}

#[test]
fn latency_sweep_slows_the_game_down() {
    let c = cfg(&base("client_server", "chase", "[bots.x]")
        .replace("[bots.x]", "")
        .replace(
            "player_starts = [[1.0, 1.0], [1.0, 2.0], [9.0, 9.0]]",
            "player_starts = [[5.0, 5.0]]",
        ));
    let values = [50.0, 500.0, 5000.0, 5e6];
    let rows = sweep(&c, SweepParam::L, &values).unwrap();
    let intervals: Vec<f64> = rows.iter().map(|r| r.mean_interval).collect();
    assert!(intervals.windows(2).all(|w| w[1] <= w[0]), "{intervals:?}");
    // at L = 5e6 the interval is theta*G/L itself
    assert!((intervals[3] - 100.0 / 5e6).abs() < 1e-15);
    assert!(
        rows[3].mean_ball_disp < 1e-3 * 10.0,
        "{}",
        rows[3].mean_ball_disp
    );
    assert!(rows[0].mean_ball_disp > 0.0);
}

#[test]
fn sweep_results_are_sorted_and_match_single_runs() {
    let c = cfg(&base(
        "client_server",
        "chase",
        "[prediction]\ndrops = [4, 8]",
    ));
    let rows = sweep(&c, SweepParam::G, &[3.0, 1.0, 2.0]).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.value).collect::<Vec<_>>(),
        vec![1.0, 2.0, 3.0]
    );

    let single = sweep(&c, SweepParam::L, &[400.0]).unwrap();
    let direct = run(&c).unwrap();
    assert_eq!(single[0].final_hash, direct.final_hash);
    assert_eq!(single[0].mean_pred_error, direct.summary.mean_pred_error);
    assert_eq!(single[0].stall_fraction, direct.summary.stall_fraction);

    assert!(sweep(&c, SweepParam::L, &[]).is_err());
    assert!(sweep(&c, SweepParam::G, &[1.5]).is_err());
    assert!("speed".parse::<SweepParam>().is_err());
}

#[test]
fn loss_sweep_raises_prediction_load() {
    let c = cfg(&base("client_server", "linear", ""));
    let rows = sweep(&c, SweepParam::LossProb, &[0.0, 0.5]).unwrap();
    assert_eq!(rows[0].predicted_ticks, 0);
    assert!(rows[1].predicted_ticks > 0);
}

#[test]
fn both_predictors_exact_on_straight_lines() {
    let c = cfg(&base(
        "client_server",
        "linear",
        "[prediction]\ndrops = [3, 7, 12]",
    ));
    let table = compare(&c).unwrap();
    assert_eq!(table.len(), 2);
    assert_eq!(table[0].predictor, PredictorMode::Grid);
    for row in &table {
        assert_eq!(row.predicted_ticks, 3);
        assert_eq!(row.max_error, 0.0, "{row:?}");
    }
}

#[test]
fn both_predictors_exact_when_nobody_moves() {
    let c = cfg(&base(
        "p2p",
        "stationary",
        "[prediction]\ndrops = [3, 7, 12]\ndrop_clients = [2, 3]",
    ));
    for row in compare(&c).unwrap() {
        assert!(row.predicted_ticks > 0);
        assert_eq!(row.max_error, 0.0, "{row:?}");
    }
}

#[test]
fn reversals_fool_both_predictors() {
    let c = cfg(&base(
        "client_server",
        "reverse",
        "[prediction]\ndrops = [5, 10, 15]",
    ));
    for row in compare(&c).unwrap() {
        assert!(row.mean_error > 0.0, "{row:?}");
    }
}

#[test]
fn network_server_sends_two_extra_messages_per_round() {
    let c = cfg(&base("network_server", "chase", ""));
    let out = run(&c).unwrap();
    assert!(out.metrics.iter().all(|m| m.messages_sent == 2 * 3 + 2));
    assert!(out.metrics.iter().all(|m| !m.predicted));
    assert_eq!(out.final_state, out.shadow_state);
}

#[test]
fn traffic_is_conserved_on_lossy_links() {
    let text = base("client_server", "chase", "").replace(
        "link = \"lossless\"",
        "link = { base_latency_ms = 30.0, jitter_ms = 25.0, loss_prob = 0.2 }",
    );
    let out = run(&cfg(&text)).unwrap();
    let t = out.traffic;
    assert_eq!(t.in_flight, 0);
    assert_eq!(t.sent, t.delivered + t.dropped);
    assert!(t.dropped > 0);
    assert!(out.metrics.iter().any(|m| m.predicted));
}

#[test]
fn measured_latency_tracks_the_link() {
    let text = base("client_server", "stationary", "")
        .replace("latency_rate_ms = 400.0", "")
        .replace("link = \"lossless\"", "link = \"wifi-like\"");
    let out = run(&cfg(&text)).unwrap();
    // nominal RTT before any sample, then the smoothed round trip of two 5 +/- 3 ms legs
    assert_eq!(out.metrics[0].latency_ms, 10.0);
    for m in &out.metrics[2..] {
        assert!((4.0..=16.0).contains(&m.latency_ms), "{}", m.latency_ms);
    }
}

#[test]
fn inputs_arriving_after_the_window_are_lost() {
    let text = base("client_server", "linear", "")
        .replace("link = \"lossless\"", "link = { base_latency_ms = 101.0 }");
    let out = run(&cfg(&text)).unwrap();
    assert!(out.metrics[0].stalled);
    for m in &out.metrics[1..] {
        assert!(
            m.predicted && m.late_inputs == 3 && m.lost_inputs == 3,
            "{m:?}"
        );
    }
    // no input ever landed, so nobody moved: the first tick stalled and every
    // later prediction extrapolates a motionless history
    let start = ScenarioConfig::resolve(&cfg(&text)).unwrap();
    let s0 = gridlag::game::default_state(&start.setup, &start.spec, &start.rules).unwrap();
    assert_eq!(out.final_state.players, s0.players);
    assert!(out.metrics.last().unwrap().divergence > 0.0);
}

#[test]
fn config_file_errors_point_at_lines() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("links.toml"),
        "[slow]\nbase_latency_ms = 80.0\njitter_ms = 10.0\n",
    )
    .unwrap();
    let good = base("client_server", "chase", "").replace(
        "link = \"lossless\"",
        "link = \"slow\"\npresets = \"links.toml\"",
    );
    let path = dir.path().join("s.toml");
    std::fs::write(&path, &good).unwrap();
    let c = ScenarioConfig::from_path(&path).unwrap();
    assert_eq!(c.client_link().unwrap().base_latency_ms, 80.0);

    let bad = good.replace("mu = 100", "mu = 0");
    std::fs::write(&path, bad).unwrap();
    let err = ScenarioConfig::from_path(&path).unwrap_err().to_string();
    assert!(err.contains("line 12") && err.contains("mu"), "{err}");
}
