use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Experiment parameters. Every field is optional so that flags can be
/// layered over a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// toric, product, random-product, ghz, cluster, cluster-cylinder,
    /// low-depth, random-mps, ghz-mps, random-ring.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long = "Lx")]
    #[serde(skip_serializing_if = "Option::is_none", alias = "Lx")]
    pub lx: Option<usize>,
    #[arg(long = "Ly")]
    #[serde(skip_serializing_if = "Option::is_none", alias = "Ly")]
    pub ly: Option<usize>,
    /// Toric-code flux: 1, e, m, em, a superposition such as 1+e, or uniform.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<String>,
    /// Circuit depth for low-depth states.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// levin-wen or kitaev-preskill.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Region scale for TEE and recovery regions.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    /// Number of edge blocks.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    /// Annulus width.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Gradient tolerance of the Gibbs fit.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    /// nearest-neighbor, two-block or both.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Cutoffs, comma separated.
    #[arg(long = "Lambda", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", alias = "Lambda")]
    pub lambda: Option<Vec<f64>>,
    /// edge-hamiltonian or exact-log.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparator: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_low: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_high: Option<f64>,
    /// MPS tensors as JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mps_file: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bond: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phys: Option<usize>,
    /// Environment dimension traced out of ring tensors.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<usize>,
    /// Chain lengths or ring sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
    /// Number of leading sites kept in MPS convergence curves.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corners: Option<usize>,
}

/// Effective configuration of one run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: String,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub format: Format,
    pub params: Params,
}

#[derive(Debug, Default)]
pub struct Globals {
    pub config: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn take<T: for<'de> Deserialize<'de>>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| schema(format!("config field {key}: {e}"))),
    }
}

/// Merges the config file (if any) with command-line values, which win.
pub fn resolve(experiment: Option<&str>, flags: &Params, globals: Globals) -> Result<Resolved, CliError> {
    let mut file = Map::new();
    if let Some(path) = &globals.config {
        let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read config {path}: {e}")))?;
        match serde_json::from_str(&text).map_err(|e| schema(format!("config {path}: {e}")))? {
            Value::Object(m) => file = m,
            _ => return Err(schema("config must be a JSON object")),
        }
    }
    let file_experiment: Option<String> = take(&mut file, "experiment")?;
    let experiment = match (experiment, file_experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(schema(format!("config is for experiment {b}, not {a}")));
        }
        (Some(a), _) => a.to_string(),
        (None, Some(b)) => b,
        (None, None) => return Err(schema("config does not name an experiment")),
    };
    let seed = globals.seed.or(take(&mut file, "seed")?);
    let out = globals.out.or(take(&mut file, "out")?);
    let threads = globals.threads.or(take(&mut file, "threads")?);
    let format = globals.format.or(take(&mut file, "format")?).unwrap_or(Format::Json);
    let from_file: Params =
        serde_json::from_value(Value::Object(file)).map_err(|e| schema(format!("config: {e}")))?;
    let object = |p: &Params| match serde_json::to_value(p).expect("params serialize") {
        Value::Object(m) => m,
        _ => unreachable!("params serialize to an object"),
    };
    let mut merged = object(&from_file);
    merged.extend(object(flags));
    let params: Params = serde_json::from_value(Value::Object(merged)).expect("merged params deserialize");
    Ok(Resolved { experiment, seed, out, threads, format, params })
}

impl Resolved {
    /// Canonical JSON of everything that affects the numbers.
    pub fn canonical(&self) -> Value {
        let mut v = serde_json::to_value(&self.params).expect("params serialize");
        let map = v.as_object_mut().expect("object");
        map.insert("experiment".into(), Value::from(self.experiment.clone()));
        if let Some(s) = self.seed {
            map.insert("seed".into(), Value::from(s));
        }
        v
    }

    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.canonical()).expect("serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| schema(format!("{what} is randomized and needs --seed")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_file(text: &str) -> (tempfile::TempDir, Globals) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, text).unwrap();
        let globals = Globals { config: Some(path.to_str().unwrap().into()), ..Globals::default() };
        (dir, globals)
    }

    #[test]
    fn flags_override_aliased_file_keys() {
        let (_d, g) = with_file(r#"{"experiment": "tee", "Lx": 4, "Ly": 5, "seed": 9}"#);
        let flags = Params { lx: Some(3), ..Params::default() };
        let r = resolve(None, &flags, g).unwrap();
        assert_eq!((r.params.lx, r.params.ly, r.seed), (Some(3), Some(5), Some(9)));
    }

    #[test]
    fn hash_ignores_spelling_and_key_order() {
        let (_d1, g1) = with_file(r#"{"experiment": "tee", "Lx": 4, "model": "product"}"#);
        let (_d2, g2) = with_file(r#"{"model": "product", "lx": 4, "experiment": "tee"}"#);
        let a = resolve(None, &Params::default(), g1).unwrap();
        let b = resolve(None, &Params::default(), g2).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = resolve(Some("tee"), &Params { lx: Some(5), ..Params::default() }, Globals::default()).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn schema_violations() {
        let (_d, g) = with_file(r#"{"experiment": "tee", "width": "wide"}"#);
        assert!(matches!(resolve(None, &Params::default(), g), Err(CliError::Schema(_))));
        assert!(matches!(resolve(None, &Params::default(), Globals::default()), Err(CliError::Schema(_))));
    }
}
