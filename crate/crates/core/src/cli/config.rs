use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{CliError, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "pca")]
    Pca,
    #[serde(rename = "markov estimate")]
    MarkovEstimate,
    #[serde(rename = "markov simulate")]
    MarkovSimulate,
    #[serde(rename = "markov embed")]
    MarkovEmbed,
    #[serde(rename = "markov order")]
    MarkovOrder,
    #[serde(rename = "markov master")]
    MarkovMaster,
    #[serde(rename = "sde fit")]
    SdeFit,
    #[serde(rename = "sde sample")]
    SdeSample,
    #[serde(rename = "sde cycles")]
    SdeCycles,
    #[serde(rename = "sde helmholtz")]
    SdeHelmholtz,
    #[serde(rename = "sde plot")]
    SdePlot,
    #[serde(rename = "nullmodel")]
    Nullmodel,
    #[serde(rename = "hinge")]
    Hinge,
    #[serde(rename = "demography simulate")]
    DemographySimulate,
    #[serde(rename = "demography loglik")]
    DemographyLoglik,
    #[serde(rename = "demography fit")]
    DemographyFit,
}

impl Command {
    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).expect("unit variant")
    }
}

/// A fully resolved run: every default filled in, every path absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub params: Value,
}

/// Values given on the command line; they override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Parameters of one subcommand.
pub(crate) trait Params: Serialize + DeserializeOwned {
    /// Input files, resolved and checked before the run.
    fn inputs(&mut self) -> Vec<&mut PathBuf>;

    /// Seed used when neither the flag nor the config sets one.
    fn default_seed(&self) -> Result<u64, CliError> {
        Ok(0)
    }
}

pub(crate) fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    let joined = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let mut out = PathBuf::new();
    for c in joined.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir if out.file_name().is_some() => {
                out.pop();
            }
            c => out.push(c),
        }
    }
    out
}

/// Parses `params`, makes its input paths absolute and checks they exist.
pub(crate) fn prepare<P: Params>(params: Value, base: &Path) -> Result<(Value, u64), CliError> {
    let mut p: P = serde_json::from_value(params).map_err(|e| CliError::schema(format!("invalid parameters: {e}")))?;
    for path in p.inputs() {
        *path = resolve_path(base, path);
        if !path.is_file() {
            return Err(CliError::input("input file does not exist").at(path.display().to_string()));
        }
    }
    let seed = p.default_seed()?;
    Ok((serde_json::to_value(&p).expect("serialisable"), seed))
}

pub(crate) fn parse<P: Params>(params: &Value) -> Result<P, CliError> {
    serde_json::from_value(params.clone()).map_err(|e| CliError::schema(format!("invalid parameters: {e}")))
}

fn cwd() -> Result<PathBuf, CliError> {
    std::env::current_dir().map_err(|e| CliError::input(format!("cannot read the working directory: {e}")))
}

impl RunConfig {
    /// Builds a run from an optional JSON config file plus flag overrides.
    ///
    /// The keys `seed`, `out` and `format` are global; every other key
    /// belongs to the subcommand. Relative paths in the file resolve against
    /// the file's directory, relative flag paths against the working
    /// directory.
    pub fn load(command: Command, config: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let cwd = cwd()?;
        let (mut map, base) = match config {
            Some(path) => {
                let path = resolve_path(&cwd, path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::input(format!("cannot read config: {e}")).at(path.display().to_string()))?;
                let value: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::schema(format!("config is not valid JSON: {e}")).at(path.display().to_string()))?;
                let Value::Object(map) = value else {
                    return Err(CliError::schema("config must be a JSON object").at(path.display().to_string()));
                };
                let base = path.parent().map_or_else(|| cwd.clone(), Path::to_path_buf);
                (map, base)
            }
            None => (Map::new(), cwd.clone()),
        };
        let seed = take::<u64>(&mut map, "seed")?;
        let out = take::<PathBuf>(&mut map, "out")?.map(|p| resolve_path(&base, &p));
        let format = take::<Format>(&mut map, "format")?;
        Self::build(command, Value::Object(map), &base, seed, out, format, overrides)
    }

    /// Re-validates a stored run, e.g. one read back from a manifest.
    pub fn revalidate(&self, overrides: &Overrides) -> Result<Self, CliError> {
        let cwd = cwd()?;
        Self::build(
            self.command,
            self.params.clone(),
            &cwd,
            Some(self.seed),
            Some(self.out.clone()),
            Some(self.format),
            overrides,
        )
    }

    fn build(
        command: Command,
        params: Value,
        base: &Path,
        seed: Option<u64>,
        out: Option<PathBuf>,
        format: Option<Format>,
        overrides: &Overrides,
    ) -> Result<Self, CliError> {
        let cwd = cwd()?;
        let (params, default_seed) = super::pipelines::prepare(command, params, base)?;
        Ok(RunConfig {
            command,
            seed: overrides.seed.or(seed).unwrap_or(default_seed),
            out: overrides.out.as_ref().map(|p| resolve_path(&cwd, p)).or(out).unwrap_or(cwd),
            format: overrides.format.or(format).unwrap_or_default(),
            params,
        })
    }
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| CliError::schema(format!("invalid `{key}`: {e}"))),
    }
}
