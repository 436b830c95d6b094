use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tool version, hash of the run configuration and the seed of stochastic runs.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Meta {
    /// Hashes the serialized arguments together with the contents of the input files.
    pub fn new(config: &impl Serialize, inputs: &[Vec<u8>], seed: Option<u64>) -> Self {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(config).expect("arguments serialise"));
        for input in inputs {
            h.update((input.len() as u64).to_le_bytes());
            h.update(input);
        }
        let config_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Meta {
            tool: "disclab",
            version: VERSION,
            config_hash,
            seed,
        }
    }

    pub fn comment_lines(&self) -> String {
        let mut s = format!("# {} {}\n# config {}\n", self.tool, self.version, self.config_hash);
        if let Some(seed) = self.seed {
            s += &format!("# seed {seed}\n");
        }
        s
    }

    pub fn wrap(&self, result: impl Serialize) -> String {
        let doc = json!({ "meta": self, "result": result });
        let mut s = serde_json::to_string_pretty(&doc).expect("json output");
        s.push('\n');
        s
    }
}

pub fn json_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("json output")
}

pub fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}
