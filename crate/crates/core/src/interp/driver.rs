use crate::cps::TargetTerm;
use crate::kernel::{Ident, Intrinsic};

use super::{resume, start, Counters, Effects, EvalError, Step, TValue};

/// A suspension observed while driving a target program.
#[derive(Debug, Clone, PartialEq)]
pub enum SusEvent {
    Assume(Ident),
    Weight(Ident, f64),
}

#[derive(Debug, Clone)]
pub struct DriveOutcome<'t> {
    pub value: TValue<'t>,
    pub events: Vec<SusEvent>,
}

/// The trivial driver: every suspension is handled by `fx` and resumed at
/// once, so the run matches direct evaluation of the original program.
pub fn drive<'t>(
    t: &'t TargetTerm,
    fx: &mut dyn Effects,
    counters: &mut Counters,
) -> Result<DriveOutcome<'t>, EvalError> {
    let mut events = Vec::new();
    let mut step = start(t, fx, counters)?;
    loop {
        step = match step {
            Step::Done(value) => return Ok(DriveOutcome { value, events }),
            Step::Assume { label, dist, k } => {
                let v = fx.assume(&dist).map_err(|e| EvalError::from(e).at(&label))?;
                events.push(SusEvent::Assume(label));
                resume(&k, TValue::Const(v), fx, counters)?
            }
            Step::Weight { label, weight, k } => {
                fx.weight(weight);
                events.push(SusEvent::Weight(label, weight));
                resume(&k, TValue::Const(Intrinsic::Unit), fx, counters)?
            }
        }
    }
}
