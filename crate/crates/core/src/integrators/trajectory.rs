use std::io::{self, Write};

use super::{PlanarMap, PlanarState};
use crate::error::{CanardError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The implicit step was singular (exact pole).
    SingularStep,
    /// `det(Id - h/2 Df)` changed sign between consecutive states.
    DenominatorSignChange,
    /// The iterate overflowed to a non-finite value.
    NonFinite,
}

/// Early termination of an iteration. `index` is the last index that was
/// reached; the trajectory ends there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryEvent {
    pub index: i64,
    pub kind: EventKind,
}

/// Contiguous orbit segment `states[k]` at index `start_index + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<PlanarState>,
    pub start_index: i64,
    pub map: PlanarMap,
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    pub fn end_index(&self) -> i64 {
        self.start_index + self.states.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<PlanarState> {
        let k = n - self.start_index;
        if k < 0 {
            return None;
        }
        self.states.get(k as usize).copied()
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, PlanarState)> + '_ {
        self.states
            .iter()
            .enumerate()
            .map(move |(k, s)| (self.start_index + k as i64, *s))
    }

    pub fn terminated_early(&self) -> bool {
        !self.events.is_empty()
    }

    pub fn singular_index(&self) -> Option<i64> {
        self.events.first().map(|e| e.index)
    }

    pub fn max_abs_x(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |m, s| m.max(s.x.abs()))
    }
}

/// Walk `steps` iterates in one direction, stopping at the first pole event.
fn walk(map: &PlanarMap, s0: PlanarState, steps: u64, forward: bool) -> Result<(Vec<PlanarState>, Option<EventKind>)> {
    let mut out = Vec::with_capacity(steps.min(1 << 22) as usize);
    let mut s = s0;
    let mut den = map.denominator(s, forward);
    for _ in 0..steps {
        let next = if forward { map.step(s) } else { map.inverse_step(s) };
        let next = match next {
            Ok(v) => v,
            Err(CanardError::SingularStep { .. }) => return Ok((out, Some(EventKind::SingularStep))),
            Err(e) => return Err(e),
        };
        if !next.is_finite() {
            return Ok((out, Some(EventKind::NonFinite)));
        }
        out.push(next);
        if let Some(d0) = den {
            let d1 = map.denominator(next, forward).unwrap_or(d0);
            if d0.signum() != d1.signum() {
                return Ok((out, Some(EventKind::DenominatorSignChange)));
            }
            den = Some(d1);
        }
        s = next;
    }
    Ok((out, None))
}

/// Iterate `map` from `s0` (index 0) over `n_from..=n_to`.
///
/// Backward indices use the birational inverse. A pole (singular step,
/// denominator sign change or overflow) ends the walk in that direction and
/// is recorded as an event rather than returned as an error.
pub fn iterate(map: &PlanarMap, s0: PlanarState, n_from: i64, n_to: i64) -> Result<Trajectory> {
    if n_from > 0 || n_to < 0 {
        return Err(CanardError::InvalidParameter(format!(
            "index range must contain 0, got {n_from}..={n_to}"
        )));
    }
    if n_from < 0 && !map.is_invertible() {
        return Err(CanardError::Unsupported(format!(
            "backward iteration of the {} map",
            map.id()
        )));
    }
    let mut events = Vec::new();
    let (mut back, back_event) = walk(map, s0, n_from.unsigned_abs(), false)?;
    let start_index = -(back.len() as i64);
    if let Some(kind) = back_event {
        events.push(TrajectoryEvent { index: start_index, kind });
    }
    let (fwd, fwd_event) = walk(map, s0, n_to as u64, true)?;
    if let Some(kind) = fwd_event {
        events.push(TrajectoryEvent { index: fwd.len() as i64, kind });
    }
    back.reverse();
    back.push(s0);
    back.extend(fwd);
    Ok(Trajectory { states: back, start_index, map: *map, events })
}

/// CSV with a `# config:` line, header `n,x,y`, 17 significant digits and a
/// trailing `# singular at n=<N>` line for each termination event.
pub fn write_csv<W: Write>(out: &mut W, traj: &Trajectory, config: &str) -> io::Result<()> {
    writeln!(out, "# config: {config}")?;
    writeln!(out, "n,x,y")?;
    for (n, s) in traj.indexed() {
        writeln!(out, "{n},{:.16e},{:.16e}", s.x, s.y)?;
    }
    for e in &traj.events {
        match e.kind {
            EventKind::NonFinite => writeln!(out, "# non-finite after n={}", e.index)?,
            _ => writeln!(out, "# singular at n={}", e.index)?,
        }
    }
    Ok(())
}
