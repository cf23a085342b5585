use std::time::Duration;

use serde_json::Value;

use crate::error::CliError;

/// Minimal JSON client for the lottery service.
pub struct ApiClient {
    agent: ureq::Agent,
    base: String,
}

impl ApiClient {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        ApiClient {
            agent,
            base: base_url.trim_end_matches('/').to_string(),
        }
    }

    pub fn get(&self, path: &str, query: &[(&str, &str)]) -> Result<Value, CliError> {
        let mut req = self.agent.get(format!("{}{path}", self.base));
        for (k, v) in query {
            req = req.query(*k, *v);
        }
        Self::finish(path, req.call())
    }

    pub fn post(&self, path: &str, body: &Value) -> Result<Value, CliError> {
        let resp = self.agent.post(format!("{}{path}", self.base)).send_json(body);
        Self::finish(path, resp)
    }

    fn finish(
        path: &str,
        resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<Value, CliError> {
        let mut resp = resp.map_err(|e| CliError::Transport(format!("{path}: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| CliError::Transport(format!("{path}: {e}")))?;
        let body: Value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        if (200..300).contains(&status) {
            return Ok(body);
        }
        Err(CliError::Rejected {
            status,
            code: body["error"].as_str().unwrap_or("HttpError").to_string(),
            message: body["message"]
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| body.to_string()),
        })
    }
}
