//! Runs one scenario: bots, the lossy networked server and a lossless shadow
//! world in lockstep.

use std::collections::{BTreeMap, BTreeSet};

use tracing::info;

use super::bots::Bots;
use super::config::ScenarioConfig;
use super::metrics::{MetricsRecord, Summary};
use crate::error::Result;
use crate::game::snapshot::state_hash;
use crate::game::{default_state, step, GameState};
use crate::grid::repartition;
use crate::net::server::InputBatch;
use crate::net::transport::TrafficStats;
use crate::net::{SeededStream, Server, ServerConfig, Simulation};
use crate::predictor::entity_error;
use crate::region::unfrozen_count;

const BOT_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;
const DROP_STREAM: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Vec<MetricsRecord>,
    pub summary: Summary,
    pub final_state: GameState,
    pub final_hash: String,
    /// Final state of the lossless shadow run.
    pub shadow_state: GameState,
    pub traffic: TrafficStats,
}

pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let r = cfg.resolve()?;
    let rules = r.rules.clone();
    let s0 = default_state(&r.setup, &r.spec, &rules)?;
    let clients = r.topology.clients;
    let owners = ServerConfig::round_robin(r.setup.players, clients);
    let server = Server::new(
        ServerConfig {
            rules: rules.clone(),
            mode: cfg.prediction.mode,
            guard: cfg.prediction.ball_guard,
            pinned_latency: cfg.grid.latency_rate_ms,
            initial_latency: r.initial_latency,
            clients,
            owners: owners.clone(),
        },
        r.spec.clone(),
        s0.clone(),
    )?;
    let mut sim = Simulation::new(r.topology, server, rules.tick_ms, cfg.seed);
    let mut bots = Bots::new(&cfg.bots, cfg.seed ^ BOT_STREAM);
    let mut drop_rng = SeededStream::new(cfg.seed ^ DROP_STREAM);
    let scripted: BTreeSet<u64> = cfg.prediction.drops.iter().copied().collect();
    let drop_clients: BTreeSet<u32> = match &cfg.prediction.drop_clients {
        Some(cs) => cs.iter().copied().collect(),
        None => (1..=clients).collect(),
    };

    let mut shadow = s0.clone();
    let mut shadow_spec = r.spec.clone();
    let mut committed = s0;
    let mut rows = Vec::with_capacity(cfg.game.duration_ticks as usize);
    for tick in 1..=cfg.game.duration_ticks {
        let issued_at = (tick - 1) as f64 * rules.tick_ms;
        let inputs = bots.decide(&shadow, &shadow_spec, tick, issued_at);
        let mut batches: BTreeMap<u32, InputBatch> = BTreeMap::new();
        for ev in &inputs {
            if let Some(c) = owners.get(&ev.player) {
                batches.entry(*c).or_default().push(ev.clone());
            }
        }
        let mut dropped = BTreeSet::new();
        for c in 1..=clients {
            let random = drop_rng.unit() < cfg.prediction.drop_prob;
            if random || (scripted.contains(&tick) && drop_clients.contains(&c)) {
                dropped.insert(c);
            }
        }
        sim.submit_inputs(tick, &batches, &dropped);
        let report = sim.run_tick(tick)?;
        let spec = &report.spec;

        if spec.interval != shadow_spec.interval {
            shadow = repartition(&shadow, spec.rho, &shadow_spec, rules.mu)?.0;
        }
        shadow_spec = spec.clone();
        shadow = step(&shadow, &inputs, spec, &rules)?.state;

        let i = spec.interval;
        let i_y = rules.heights.i_y;
        let mut errors = Vec::new();
        if let Some(raw) = &report.raw_prediction {
            for id in &report.predicted_players {
                if let (Some(p), Some(t)) = (raw.player(*id), shadow.player(*id)) {
                    errors.push(entity_error(&p.pos, &t.pos, i, i_y));
                }
            }
            if report.predicted_ball {
                errors.push(entity_error(&raw.ball.pos, &shadow.ball.pos, i, i_y));
            }
        }
        let state = &report.state;
        let divergence: f64 = state
            .players
            .iter()
            .zip(&shadow.players)
            .map(|(a, b)| entity_error(&a.pos, &b.pos, i, i_y))
            .sum::<f64>()
            + entity_error(&state.ball.pos, &shadow.ball.pos, i, i_y);
        let (bx, bz) = committed.ball.pos.xz();
        let (nx, nz) = state.ball.pos.xz();
        rows.push(MetricsRecord {
            tick,
            latency_ms: report.latency_ms,
            rho: spec.rho,
            interval: i,
            predicted: report.predicted,
            predicted_entities: errors.len() as u32,
            pred_error_mean: if errors.is_empty() {
                0.0
            } else {
                errors.iter().sum::<f64>() / errors.len() as f64
            },
            pred_error_max: errors.iter().copied().fold(0.0, f64::max),
            unfrozen: unfrozen_count(state) as u32,
            messages_sent: 0,
            repartition: report.repartitioned,
            lost_inputs: report.missing_clients.len() as u32,
            late_inputs: report.late_inputs,
            divergence,
            ball_disp: (nx - bx).hypot(nz - bz),
            stalled: report.stalled,
        });
        committed = report.state;
    }
    sim.finish();
    for row in &mut rows {
        row.messages_sent = sim.round_messages(row.tick);
    }
    let summary = Summary::from_rows(&rows);
    let final_hash = state_hash(&committed);
    info!(
        ticks = rows.len(),
        predicted = summary.predicted_ticks,
        hash = %final_hash,
        "scenario finished"
    );
    Ok(RunOutput {
        metrics: rows,
        summary,
        final_state: committed,
        final_hash,
        shadow_state: shadow,
        traffic: sim.stats(),
    })
}
