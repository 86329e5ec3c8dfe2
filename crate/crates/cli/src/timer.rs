//! Live transfer-time capture.
//!
//! The operator drives a small state machine with single-letter commands,
//! one per line. Finished cycles are appended to `transfers.csv` as soon as
//! the timer stops.

use std::io::{BufRead, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::Result;
use cegb::ingest;
use cegb::model::{ParticipantGroup, TransferCycle, TransferFault};

pub trait Clock {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
}

pub struct MonotonicClock(Instant);

impl MonotonicClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Key {
    StartStop,
    Fault(TransferFault),
    Abort,
    Quit,
}

impl Key {
    pub fn parse(line: &str) -> Option<Self> {
        match line.trim() {
            "" | "s" => Some(Key::StartStop),
            "m" => Some(Key::Fault(TransferFault::MechanicalMisalignment)),
            "e" => Some(Key::Fault(TransferFault::ElectricalConnector)),
            "c" => Some(Key::Fault(TransferFault::SoftwareComm)),
            "a" => Some(Key::Abort),
            "q" => Some(Key::Quit),
            _ => None,
        }
    }
}

pub const HELP: &str = "Enter or s: start/stop, m: mechanical fault, e: electrical fault, \
c: software/communication fault, a: abort cycle, q: quit";

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Started,
    Stopped(TransferCycle),
    FaultMarked(TransferFault),
    Aborted,
    /// The key has no effect in the current state.
    Ignored,
    Quit,
}

enum State {
    Idle,
    Running { start: Duration, faults: Vec<TransferFault> },
}

pub struct TransferTimer<C: Clock> {
    clock: C,
    group: ParticipantGroup,
    participant: String,
    state: State,
}

/// Seconds rounded to whole milliseconds.
pub fn round_ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1000.0).round() / 1000.0
}

impl<C: Clock> TransferTimer<C> {
    pub fn new(clock: C, group: ParticipantGroup, participant: impl Into<String>) -> Self {
        Self {
            clock,
            group,
            participant: participant.into(),
            state: State::Idle,
        }
    }

    pub fn is_running(&self) -> bool {
        matches!(self.state, State::Running { .. })
    }

    pub fn press(&mut self, key: Key) -> Event {
        match (&mut self.state, key) {
            (_, Key::Quit) => {
                self.state = State::Idle;
                Event::Quit
            }
            (State::Idle, Key::StartStop) => {
                self.state = State::Running {
                    start: self.clock.now(),
                    faults: Vec::new(),
                };
                Event::Started
            }
            (State::Running { start, faults }, Key::StartStop) => {
                let elapsed = self.clock.now().saturating_sub(*start);
                let cycle = TransferCycle {
                    participant_id: self.participant.clone(),
                    group: self.group.clone(),
                    duration_s: round_ms(elapsed),
                    faults: faults.iter().copied().collect(),
                };
                self.state = State::Idle;
                Event::Stopped(cycle)
            }
            (State::Running { faults, .. }, Key::Fault(f)) => {
                faults.push(f);
                Event::FaultMarked(f)
            }
            (State::Running { .. }, Key::Abort) => {
                self.state = State::Idle;
                Event::Aborted
            }
            (State::Idle, Key::Fault(_) | Key::Abort) => Event::Ignored,
        }
    }
}

/// Runs the interactive loop until `q` or end of input. A cycle still
/// running at that point is discarded. Returns the number of rows written.
pub fn run<C: Clock>(
    timer: &mut TransferTimer<C>,
    input: impl BufRead,
    mut prompt: impl Write,
    out: &Path,
) -> Result<usize> {
    writeln!(prompt, "{HELP}")?;
    let mut written = 0;
    for line in input.lines() {
        let line = line?;
        let Some(key) = Key::parse(&line) else {
            writeln!(prompt, "unknown command `{}`; {HELP}", line.trim())?;
            continue;
        };
        match timer.press(key) {
            Event::Started => writeln!(prompt, "timing...")?,
            Event::Stopped(cycle) => {
                ingest::append_transfers(out, std::slice::from_ref(&cycle))?;
                written += 1;
                writeln!(prompt, "{:.3} s, {} fault(s) recorded", cycle.duration_s, cycle.faults.len())?;
            }
            Event::FaultMarked(f) => writeln!(prompt, "fault marked: {f:?}")?,
            Event::Aborted => writeln!(prompt, "cycle aborted, nothing written")?,
            Event::Ignored => writeln!(prompt, "timer not running")?,
            Event::Quit => break,
        }
    }
    if timer.is_running() {
        writeln!(prompt, "input ended with the timer running; cycle discarded")?;
    }
    Ok(written)
}
