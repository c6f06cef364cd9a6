//! Versioned little-endian snapshot of a [`Population`] for resumable runs.
//!
//! Layout: magic `LDMC`, `u16` version, `u64` particle count, `f64` tau,
//! `f64` next event time, `u64` seed, 32-byte generator key, `u64` stream,
//! `u128` word position, `f64` event rate, `f64` ceiling, `u8` entrant tag
//! plus `f64` cap, `u64` counters (events, conversions, overflow), then per
//! particle `f64` base value and `f64` touch time.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::population::{EntrantRule, Population};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LDMC";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 8 + 8 + 8 + 32 + 8 + 16 + 8 + 8 + 1 + 8 + 8 + 8 + 8;
const WORD_POS_LIMIT: u128 = 1 << 68;

pub fn encode(pop: &Population) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * pop.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(pop.len() as u64).to_le_bytes());
    out.extend_from_slice(&pop.tau.to_le_bytes());
    out.extend_from_slice(&pop.next_event.to_le_bytes());
    out.extend_from_slice(&pop.seed.to_le_bytes());
    out.extend_from_slice(&pop.rng.get_seed());
    out.extend_from_slice(&pop.rng.get_stream().to_le_bytes());
    out.extend_from_slice(&pop.rng.get_word_pos().to_le_bytes());
    out.extend_from_slice(&pop.event_rate.to_le_bytes());
    out.extend_from_slice(&pop.ceiling.to_le_bytes());
    let (tag, cap) = match pop.entrant {
        EntrantRule::Adopt => (0u8, 0.0),
        EntrantRule::Cap(c) => (1u8, c),
    };
    out.push(tag);
    out.extend_from_slice(&f64::to_le_bytes(cap));
    out.extend_from_slice(&pop.events.to_le_bytes());
    out.extend_from_slice(&pop.conversions.to_le_bytes());
    out.extend_from_slice(&pop.overflow.to_le_bytes());
    for (b, t) in pop.base.iter().zip(&pop.touched) {
        out.extend_from_slice(&b.to_le_bytes());
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| bad(format!("truncated at {what} (offset {})", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("length checked"))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn decode(bytes: &[u8]) -> Result<Population> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if &r.take::<4>("magic")? != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes(r.take("version")?);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = r.u64("particle count")?;
    if n < 2 {
        return Err(bad(format!("particle count {n} below 2")));
    }
    let body = (bytes.len().saturating_sub(HEADER_LEN)) as u64;
    if n.checked_mul(16) != Some(body) || bytes.len() < HEADER_LEN {
        return Err(bad(format!(
            "{} bytes do not hold {n} particles",
            bytes.len()
        )));
    }
    let n = n as usize;
    let tau = r.f64("tau")?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(bad(format!("tau {tau} is not a finite nonnegative time")));
    }
    let next_event = r.f64("next event")?;
    if !(next_event > tau) {
        return Err(bad(format!(
            "next event {next_event} does not follow tau {tau}"
        )));
    }
    let seed = r.u64("seed")?;
    let key: [u8; 32] = r.take("generator key")?;
    let stream = r.u64("stream")?;
    let word_pos = u128::from_le_bytes(r.take("word position")?);
    if word_pos >= WORD_POS_LIMIT {
        return Err(bad("word position out of range"));
    }
    let event_rate = r.f64("event rate")?;
    if !(event_rate >= 0.0 && event_rate.is_finite()) {
        return Err(bad(format!("event rate {event_rate} invalid")));
    }
    if (event_rate == 0.0) != next_event.is_infinite() {
        return Err(bad("next event time inconsistent with the event rate"));
    }
    let ceiling = r.f64("ceiling")?;
    if !(ceiling > 0.0) {
        return Err(bad(format!("ceiling {ceiling} invalid")));
    }
    let tag = r.take::<1>("entrant tag")?[0];
    let cap = r.f64("entrant cap")?;
    let entrant = match tag {
        0 if cap.to_bits() == 0 => EntrantRule::Adopt,
        0 => return Err(bad("adopt rule with a nonzero cap field")),
        1 if cap > 0.0 && cap.is_finite() => EntrantRule::Cap(cap),
        1 => return Err(bad(format!("entrant cap {cap} invalid"))),
        t => return Err(bad(format!("unknown entrant tag {t}"))),
    };
    let events = r.u64("event count")?;
    let conversions = r.u64("conversion count")?;
    let overflow = r.u64("overflow count")?;
    let mut base = Vec::with_capacity(n);
    let mut touched = Vec::with_capacity(n);
    for i in 0..n {
        let b = r.f64("particle value")?;
        let t = r.f64("touch time")?;
        if !(b >= 0.0) {
            return Err(bad(format!("particle {i}: value {b} invalid")));
        }
        if !(t >= 0.0 && t <= tau) {
            return Err(bad(format!(
                "particle {i}: touch time {t} outside [0, {tau}]"
            )));
        }
        base.push(b);
        touched.push(t);
    }
    let localized = base.iter().filter(|b| b.is_finite()).count();
    if conversions > localized as u64 {
        return Err(bad("more conversions than localized particles"));
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng.set_word_pos(word_pos);
    Ok(Population {
        base,
        touched,
        tau,
        next_event,
        seed,
        rng,
        event_rate,
        ceiling,
        entrant,
        events,
        conversions,
        overflow,
        localized,
    })
}

pub fn save(pop: &Population, path: &Path) -> Result<()> {
    fs::write(path, encode(pop))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Population> {
    decode(&fs::read(path)?)
}
