use std::path::PathBuf;
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::{Computed, Model, ModelSpec};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

/// Request file written for each external evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalRequest {
    pub id: String,
    pub fidelity: Vec<u32>,
    pub params: Vec<f64>,
}

/// Reply file the solver must write before exiting with status 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalReply {
    pub id: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

/// A solver run as a child process: `command... <request.json> <reply.json>`.
pub struct ExternalModel {
    spec: ModelSpec,
    program: String,
    args: Vec<String>,
    scratch: Option<PathBuf>,
}

impl ExternalModel {
    /// `command[0]` is the program, the rest are leading arguments placed
    /// before the request and reply paths.
    pub fn new(spec: ModelSpec, command: &[String]) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::config("model.command", "empty command"))?;
        Ok(ExternalModel {
            spec,
            program: program.clone(),
            args: args.to_vec(),
            scratch: None,
        })
    }

    /// Directory under which per-request scratch directories are created.
    pub fn with_scratch_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.scratch = Some(dir.into());
        self
    }

    fn request_id(alpha: &MultiIndex, y: &[f64]) -> String {
        let mut id = String::from("a");
        for a in alpha.components() {
            id.push_str(&format!("{a}-"));
        }
        id.push('y');
        for v in y {
            id.push_str(&format!("{:016x}", v.to_bits()));
        }
        id
    }
}

impl Model for ExternalModel {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn compute(&self, alpha: &MultiIndex, y: &[f64]) -> Result<Computed> {
        let fail = |reason: String| Error::Evaluation {
            alpha: alpha.clone(),
            y: y.to_vec(),
            reason,
        };
        let dir = match &self.scratch {
            Some(base) => std::fs::create_dir_all(base)
                .and_then(|_| tempfile::Builder::new().prefix("req").tempdir_in(base)),
            None => tempfile::Builder::new().prefix("mfuq-req").tempdir(),
        }
        .map_err(|e| fail(format!("cannot create scratch dir: {e}")))?;
        let req_path = dir.path().join("request.json");
        let reply_path = dir.path().join("reply.json");

        let request = ExternalRequest {
            id: Self::request_id(alpha, y),
            fidelity: alpha.components().to_vec(),
            params: y.to_vec(),
        };
        std::fs::write(&req_path, serde_json::to_vec(&request)?)
            .map_err(|e| fail(format!("cannot write request: {e}")))?;

        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(&req_path)
            .arg(&reply_path)
            .output()
            .map_err(|e| fail(format!("cannot spawn {}: {e}", self.program)))?;
        if !output.status.success() {
            return Err(fail(format!(
                "solver exited with {}; stderr: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let raw = std::fs::read(&reply_path)
            .map_err(|e| fail(format!("missing reply file: {e}")))?;
        let reply: ExternalReply = serde_json::from_slice(&raw)
            .map_err(|e| fail(format!("malformed reply: {e}")))?;
        if reply.id != request.id {
            return Err(fail(format!(
                "reply id {:?} does not match request id {:?}",
                reply.id, request.id
            )));
        }
        if !reply.value.is_finite() {
            return Err(fail("non-finite value in reply".into()));
        }
        Ok(Computed {
            value: reply.value,
            cost: reply.cost,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reply_cost_is_optional() {
        let r: ExternalReply = serde_json::from_str(r#"{"id":"x","value":1.5e1}"#).unwrap();
        assert_eq!(r.value, 15.0);
        assert_eq!(r.cost, None);
        let r: ExternalReply =
            serde_json::from_str(r#"{"id":"x","value":2,"cost":64.0}"#).unwrap();
        assert_eq!(r.cost, Some(64.0));
    }

    #[test]
    fn request_layout() {
        let req = ExternalRequest {
            id: "abc".into(),
            fidelity: vec![2],
            params: vec![1.5, 0.25],
        };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"id":"abc","fidelity":[2],"params":[1.5,0.25]}"#
        );
    }
}
