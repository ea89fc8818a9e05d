//! Canonical binary snapshot of a [`GameState`].
//!
//! Layout (version 1, little-endian, floats as IEEE-754 binary64):
//!
//! ```text
//! magic "GLSN" | u16 version
//! u64 index | f64 time | f64 interval | u64 rng_cursor
//! u32 player_count, then per player (ascending id):
//!     u32 id | f64 x | f64 y | f64 z | u8 phi (1 = ordinary) | u8 has_ball | u8 frozen
//! ball: f64 x | f64 y | f64 z | u8 tau | u8 has_holder | u32 holder (0 when none)
//! mdr:  f64 anchor_x | f64 anchor_z | u32 mu | f64 interval | 4 x (f64 x, f64 z) corners
//!       | f64 bound_x | f64 bound_z
//! ```

use sha2::{Digest, Sha256};

use super::GameState;
use crate::error::{Error, Result};
use crate::kinematics::{BallState, PlayerState, Talent, Vec3};
use crate::region::Region;

pub const MAGIC: &[u8; 4] = b"GLSN";
pub const VERSION: u16 = 1;

pub fn encode(state: &GameState) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + state.players.len() * 31 + 120);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&state.index.to_le_bytes());
    put_f64(&mut out, state.time);
    put_f64(&mut out, state.interval);
    out.extend_from_slice(&state.rng_cursor.to_le_bytes());

    out.extend_from_slice(&(state.players.len() as u32).to_le_bytes());
    for p in &state.players {
        out.extend_from_slice(&p.id.to_le_bytes());
        put_vec3(&mut out, &p.pos);
        out.push(p.talent.phi());
        out.push(u8::from(p.has_ball));
        out.push(u8::from(p.frozen));
    }

    let b = &state.ball;
    put_vec3(&mut out, &b.pos);
    out.push(b.tau);
    out.push(u8::from(b.holder.is_some()));
    out.extend_from_slice(&b.holder.unwrap_or(0).to_le_bytes());

    let r = &state.mdr;
    put_f64(&mut out, r.anchor.0);
    put_f64(&mut out, r.anchor.1);
    out.extend_from_slice(&r.mu.to_le_bytes());
    put_f64(&mut out, r.interval);
    for (x, z) in r.corners {
        put_f64(&mut out, x);
        put_f64(&mut out, z);
    }
    put_f64(&mut out, r.bounds.0);
    put_f64(&mut out, r.bounds.1);
    out
}

/// Hex SHA-256 of the canonical encoding.
pub fn state_hash(state: &GameState) -> String {
    hex::encode(Sha256::digest(encode(state)))
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_vec3(out: &mut Vec<u8>, v: &Vec3) {
    put_f64(out, v.x);
    put_f64(out, v.y);
    put_f64(out, v.z);
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.buf.len() < N {
            return Err(Error::Snapshot("truncated".into()));
        }
        let (head, rest) = self.buf.split_at(N);
        self.buf = rest;
        Ok(head.try_into().expect("split_at gives N bytes"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::Snapshot(format!("bad flag byte {v}"))),
        }
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<GameState> {
    let mut r = Reader { buf: bytes };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let index = r.u64()?;
    let time = r.f64()?;
    let interval = r.f64()?;
    let rng_cursor = r.u64()?;
    let count = r.u32()? as usize;
    let mut players = Vec::with_capacity(count.min(4096));
    for _ in 0..count {
        let id = r.u32()?;
        let pos = r.vec3()?;
        let talent = match r.u8()? {
            1 => Talent::Ordinary,
            phi => Talent::special(phi).map_err(|e| Error::Snapshot(e.to_string()))?,
        };
        players.push(PlayerState {
            id,
            pos,
            talent,
            has_ball: r.flag()?,
            frozen: r.flag()?,
        });
    }
    let pos = r.vec3()?;
    let tau = r.u8()?;
    let has_holder = r.flag()?;
    let holder = r.u32()?;
    let ball = BallState {
        pos,
        tau,
        holder: has_holder.then_some(holder),
    };
    let anchor = (r.f64()?, r.f64()?);
    let mu = r.u32()?;
    let region_interval = r.f64()?;
    let mut corners = [(0.0, 0.0); 4];
    for c in &mut corners {
        *c = (r.f64()?, r.f64()?);
    }
    let bounds = (r.f64()?, r.f64()?);
    if !r.buf.is_empty() {
        return Err(Error::Snapshot(format!("{} trailing bytes", r.buf.len())));
    }
    Ok(GameState {
        index,
        time,
        interval,
        players,
        ball,
        mdr: Region {
            anchor,
            mu,
            interval: region_interval,
            corners,
            bounds,
        },
        rng_cursor,
    })
}
