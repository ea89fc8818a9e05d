//! Bundled reference scenarios with exact geometric checks.

use super::config::ScenarioConfig;
use super::metrics::to_csv_bytes;
use super::runner::run;
use crate::error::{Error, Result};
use crate::game::{default_state, validate, GameState};
use crate::grid::GridSpec;
use crate::kinematics::player_move_candidates;

const TOL: f64 = 1e-9;

pub const NAMES: [&str; 3] = ["fig6", "fig10", "fig11"];

pub fn source(name: &str) -> Result<&'static str> {
    match name {
        "fig6" => Ok(include_str!("../../fixtures/fig6.toml")),
        "fig10" => Ok(include_str!("../../fixtures/fig10.toml")),
        "fig11" => Ok(include_str!("../../fixtures/fig11.toml")),
        other => Err(Error::Config(format!("unknown fixture `{other}`"))),
    }
}

pub fn config(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml_str(source(name)?)
        .map_err(|e| Error::Config(format!("fixture {name}: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_owned(),
            passed,
            detail: detail.into(),
        }
    }
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= TOL && (a.1 - b.1).abs() <= TOL
}

fn initial(cfg: &ScenarioConfig) -> Result<(GameState, GridSpec)> {
    let r = cfg.resolve()?;
    Ok((default_state(&r.setup, &r.spec, &r.rules)?, r.spec))
}

fn corners_match(got: &[(f64, f64); 4], want: &[(f64, f64); 4]) -> bool {
    got.iter().zip(want).all(|(g, w)| close(*g, *w))
}

fn fig6(cfg: &ScenarioConfig, out: &mut Vec<Check>) -> Result<()> {
    let want = [(1.0, 2.0), (1.0, 4.0), (3.0, 2.0), (3.0, 4.0)];
    let (s0, spec) = initial(cfg)?;
    out.push(Check::new(
        "interval is 1",
        spec.interval == 1.0,
        format!("I = {}", spec.interval),
    ));
    out.push(Check::new(
        "region corners",
        corners_match(&s0.mdr.corners, &want),
        format!("{:?}", s0.mdr.corners),
    ));
    let end = run(cfg)?.final_state;
    out.push(Check::new(
        "region corners after run",
        corners_match(&end.mdr.corners, &want),
        format!("{:?}", end.mdr.corners),
    ));
    Ok(())
}

fn fig10(cfg: &ScenarioConfig, out: &mut Vec<Check>) -> Result<()> {
    let (s0, spec) = initial(cfg)?;
    out.push(Check::new(
        "interval is 0.02",
        (spec.interval - 0.02).abs() <= TOL,
        format!("I = {}", spec.interval),
    ));
    let lattice = spec.lattice()?;
    for v in [0.64, 0.66, 0.92] {
        out.push(Check::new(
            &format!("lattice contains {v}"),
            lattice.contains(v, TOL),
            format!("{} points", lattice.len()),
        ));
    }
    let want = [
        (0.66, 0.92),
        (0.64, 0.92),
        (0.68, 0.92),
        (0.66, 0.90),
        (0.66, 0.94),
    ];
    let p = s0.player(1).ok_or(Error::MissingEntity(1))?;
    let got = player_move_candidates(p, &spec);
    let same = got.len() == want.len() && got.iter().zip(&want).all(|(g, w)| close(*g, *w));
    out.push(Check::new("five move candidates", same, format!("{got:?}")));
    Ok(())
}

fn fig11(cfg: &ScenarioConfig, out: &mut Vec<Check>) -> Result<()> {
    let r = cfg.resolve()?;
    let s0 = default_state(&r.setup, &r.spec, &r.rules)?;
    out.push(Check::new(
        "interval is 0.5",
        r.spec.interval == 0.5,
        format!("I = {}", r.spec.interval),
    ));
    let co_located = s0.ball.holder == Some(1)
        && s0.player(1).is_some_and(|p| close(p.pos.xz(), (6.0, 5.5)))
        && close(s0.ball.pos.xz(), (6.0, 5.5));
    out.push(Check::new(
        "holder and ball co-located",
        co_located,
        format!("{:?}", s0.ball),
    ));
    let other = s0.player(2).is_some_and(|p| close(p.pos.xz(), (5.0, 4.5)));
    out.push(Check::new("second player at (5.0, 4.5)", other, ""));
    let verdict = validate(&s0, &r.spec, &r.rules);
    out.push(Check::new(
        "state validates",
        verdict.is_ok(),
        format!("{verdict:?}"),
    ));
    Ok(())
}

/// Geometric checks plus a replay check for one fixture.
pub fn check(name: &str) -> Result<Vec<Check>> {
    let cfg = config(name)?;
    let mut out = Vec::new();
    match name {
        "fig6" => fig6(&cfg, &mut out)?,
        "fig10" => fig10(&cfg, &mut out)?,
        _ => fig11(&cfg, &mut out)?,
    }
    let (a, b) = (run(&cfg)?, run(&cfg)?);
    let replay =
        to_csv_bytes(&a.metrics)? == to_csv_bytes(&b.metrics)? && a.final_hash == b.final_hash;
    out.push(Check::new("replay is byte-identical", replay, a.final_hash));
    Ok(out)
}
