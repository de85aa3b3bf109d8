//! Run configuration: command-line flags, optionally merged with a TOML file
//! using the same keys.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use threedot::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Field,
    Block,
    Stationary,
    Iid,
    Rot3,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SourceKind::Field => "field",
            SourceKind::Block => "block",
            SourceKind::Stationary => "stationary",
            SourceKind::Iid => "iid",
            SourceKind::Rot3 => "rot3",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pbm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Field,
    Block,
    Regions,
    Odometer,
    Stationarity,
    Lemma,
    Dichotomy,
    /// Every exact suite (stationarity needs `--seed` and runs separately).
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Sample,
    Law,
    Verify,
    Profile,
}

/// Every flag of every command. A config file may set any of them, plus
/// `command` to choose the command when none is given on the command line.
#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    #[arg(skip)]
    #[serde(default)]
    pub command: Option<CommandName>,

    /// Process to sample or analyse.
    #[arg(long, value_enum)]
    pub source: Option<SourceKind>,
    /// Field rectangle as WIDTHxHEIGHT.
    #[arg(long)]
    pub rect: Option<String>,
    /// Lower-left corner of the rectangle as I,J (default: centred on the origin).
    #[arg(long, allow_hyphen_values = true)]
    pub corner: Option<String>,
    /// One-dimensional window as START:LEN.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Run seed; required by every stochastic command.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of samples.
    #[arg(short = 'N', long = "samples")]
    #[serde(alias = "N")]
    pub samples: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Largest scale exponent for the field suite.
    #[arg(long)]
    pub nmax: Option<u32>,
    /// Alphabet size for the lemma search.
    #[arg(long)]
    pub alphabet: Option<u32>,
    /// Largest marginal denominator scanned by the lemma search.
    #[arg(long)]
    pub grid: Option<u32>,
    /// Window length (side length for the field).
    #[arg(long)]
    pub len: Option<usize>,
    /// Block level.
    #[arg(long)]
    pub k: Option<u32>,
    /// Lattice radius for the region suite.
    #[arg(long)]
    pub radius: Option<i64>,
    /// Census horizon for the dichotomy suite.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Skeleton digits S_0 S_1 ... for conditioned stationary sampling.
    #[arg(long)]
    pub skeleton: Option<String>,

    /// Triple shifts as A..B (exponents, inclusive).
    #[arg(long)]
    pub triples: Option<String>,
    /// Pair shifts as gaps=A..B (inclusive).
    #[arg(long)]
    pub pairs: Option<String>,
    /// Number of cylinders per coordinate in the joining distance.
    #[arg(long)]
    pub depth: Option<u64>,
}

impl Flags {
    /// Flags given on the command line win over the file.
    pub fn or(self, file: Flags) -> Flags {
        Flags {
            command: self.command.or(file.command),
            source: self.source.or(file.source),
            rect: self.rect.or(file.rect),
            corner: self.corner.or(file.corner),
            window: self.window.or(file.window),
            seed: self.seed.or(file.seed),
            samples: self.samples.or(file.samples),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
            suite: self.suite.or(file.suite),
            nmax: self.nmax.or(file.nmax),
            alphabet: self.alphabet.or(file.alphabet),
            grid: self.grid.or(file.grid),
            len: self.len.or(file.len),
            k: self.k.or(file.k),
            radius: self.radius.or(file.radius),
            horizon: self.horizon.or(file.horizon),
            skeleton: self.skeleton.or(file.skeleton),
            triples: self.triples.or(file.triples),
            pairs: self.pairs.or(file.pairs),
            depth: self.depth.or(file.depth),
        }
    }

    pub fn load(path: &Path) -> Result<Flags, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn require_source(&self) -> Result<SourceKind, CliError> {
        self.source.ok_or_else(|| CliError::Usage("--source is required".into()))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage("--seed is required for sampling".into()))
    }

    pub fn rect(&self) -> Result<Option<threedot::Window2D>, CliError> {
        let Some(text) = &self.rect else { return Ok(None) };
        let (w, h) = text
            .split_once(['x', 'X'])
            .ok_or_else(|| CliError::Usage(format!("--rect {text:?}: expected WIDTHxHEIGHT")))?;
        let w: usize = parse_num(w, "--rect")?;
        let h: usize = parse_num(h, "--rect")?;
        if w == 0 || h == 0 {
            return Err(CliError::Usage(format!("--rect {text:?}: sides must be positive")));
        }
        let corner = match &self.corner {
            Some(c) => {
                let (i, j) = c
                    .split_once(',')
                    .ok_or_else(|| CliError::Usage(format!("--corner {c:?}: expected I,J")))?;
                (parse_num(i, "--corner")?, parse_num(j, "--corner")?)
            }
            None => (-(w as i64 / 2), -(h as i64 / 2)),
        };
        Ok(Some(threedot::Window2D::new(corner, w, h)))
    }

    pub fn window(&self) -> Result<Option<(i64, usize)>, CliError> {
        let Some(text) = &self.window else { return Ok(None) };
        let (s, l) = text
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("--window {text:?}: expected START:LEN")))?;
        let len: usize = parse_num(l, "--window")?;
        if len == 0 {
            return Err(CliError::Usage(format!("--window {text:?}: length must be positive")));
        }
        Ok(Some((parse_num(s, "--window")?, len)))
    }

    pub fn skeleton(&self) -> Result<Option<threedot::SkeletonState>, CliError> {
        let Some(text) = &self.skeleton else { return Ok(None) };
        let digits = text
            .chars()
            .map(|c| c.to_digit(3).map(|d| d as u8))
            .collect::<Option<Vec<u8>>>()
            .ok_or_else(|| CliError::Usage(format!("--skeleton {text:?}: digits must be 0, 1 or 2")))?;
        Ok(Some(threedot::SkeletonState::new(digits)?))
    }

    pub fn triples(&self) -> Result<Option<(u32, u32)>, CliError> {
        self.triples.as_deref().map(|t| parse_range(t, "--triples")).transpose()
    }

    pub fn pairs(&self) -> Result<Option<(u32, u32)>, CliError> {
        self.pairs
            .as_deref()
            .map(|t| {
                let range = t
                    .strip_prefix("gaps=")
                    .ok_or_else(|| CliError::Usage(format!("--pairs {t:?}: expected gaps=A..B")))?;
                parse_range(range, "--pairs")
            })
            .transpose()
    }
}

fn parse_num<T: std::str::FromStr>(text: &str, flag: &str) -> Result<T, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{flag}: cannot parse {text:?}")))
}

/// Inclusive range `A..B`.
fn parse_range(text: &str, flag: &str) -> Result<(u32, u32), CliError> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| CliError::Usage(format!("{flag} {text:?}: expected A..B")))?;
    let (a, b): (u32, u32) = (parse_num(a, flag)?, parse_num(b, flag)?);
    if a > b {
        return Err(CliError::Usage(format!("{flag} {text:?}: empty range")));
    }
    Ok((a, b))
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    Usage(String),
    /// A size bound of the exact engine was hit; exit code 3.
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Resource(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::LengthBound { .. } | Error::TruncationLimit { .. } => CliError::Resource(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}
