//! Source text to analyzed and transformed program.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::{analyze, AnalysisConfig, AnalysisError, AnalysisResult};
use crate::cps::{all_labels, selective_cps, CpsError, TargetTerm, Vars};
use crate::frontend::{anf, parse, AnfTerm, ParseError};
use crate::kernel::desugar;

/// Which labels the CPS transformation selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpsMode {
    /// No labels: the program stays in direct style.
    None,
    /// The labels the suspension analysis marks.
    Selective,
    /// Every label and lambda parameter.
    Full,
}

impl CpsMode {
    pub const ALL: [CpsMode; 3] = [CpsMode::None, CpsMode::Selective, CpsMode::Full];
}

impl fmt::Display for CpsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CpsMode::None => "none",
            CpsMode::Selective => "selective",
            CpsMode::Full => "full",
        })
    }
}

impl FromStr for CpsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(CpsMode::None),
            "selective" => Ok(CpsMode::Selective),
            "full" => Ok(CpsMode::Full),
            other => Err(format!(
                "unknown CPS mode `{other}` (expected none, selective, or full)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse error at {0}")]
    Parse(ParseError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Cps(#[from] CpsError),
}

impl From<ParseError> for PipelineError {
    fn from(e: ParseError) -> Self {
        PipelineError::Parse(e)
    }
}

/// Parses, desugars, and normalizes `src`.
pub fn compile(src: &str) -> Result<AnfTerm, PipelineError> {
    Ok(anf(&desugar(&parse(src)?)))
}

/// The labels selected by `mode`, with the analysis result when one was run.
pub fn select(
    t: &AnfTerm,
    mode: CpsMode,
    cfg: AnalysisConfig,
) -> Result<(Vars, Option<AnalysisResult>), PipelineError> {
    Ok(match mode {
        CpsMode::None => (Vars::new(), None),
        CpsMode::Selective => {
            let r = analyze(t, cfg)?;
            (r.suspend.clone(), Some(r))
        }
        CpsMode::Full => (all_labels(t), None),
    })
}

/// Selects labels according to `mode` and transforms `t`.
pub fn transform(t: &AnfTerm, mode: CpsMode, cfg: AnalysisConfig) -> Result<TargetTerm, PipelineError> {
    let (vars, _) = select(t, mode, cfg)?;
    Ok(selective_cps(&vars, t)?)
}
