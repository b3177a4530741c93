//! Self-contained, copy-pasteable encodings of runs and explorations.

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verify::explore::ExploreConfig;
use crate::verify::run::RunConfig;

const PREFIX: &str = "pa1.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Replay {
    Run(RunConfig),
    Explore(ExploreConfig),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay encoding must start with {PREFIX:?}")]
    Prefix,
    #[error("replay encoding is not valid base64: {0}")]
    Base64(#[from] base64::DecodeError),
    #[error("replay encoding does not hold a valid configuration: {0}")]
    Json(#[from] serde_json::Error),
}

impl Replay {
    pub fn encode(&self) -> String {
        let json = serde_json::to_vec(self).expect("replay serializes");
        format!("{PREFIX}{}", URL_SAFE_NO_PAD.encode(json))
    }

    pub fn decode(encoding: &str) -> Result<Self, ReplayError> {
        let body = encoding.trim().strip_prefix(PREFIX).ok_or(ReplayError::Prefix)?;
        Ok(serde_json::from_slice(&URL_SAFE_NO_PAD.decode(body)?)?)
    }
}
