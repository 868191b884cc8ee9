//! Dataset ingestion, model-specification parsing and synthetic data
//! generation.
//!
//! # CSV datasets
//!
//! Comma-delimited UTF-8 with a header row, decimal points, no thousands
//! separators. The choice column holds 0-based alternative indices;
//! availability columns (when the model declares them) hold 0/1.
//!
//! # Model specification text format
//!
//! Line oriented; `#` starts a comment. Keys:
//!
//! ```text
//! alternatives: car, bus, walk
//! choice: chosen
//! availability: car = av_car, bus = av_bus, walk = av_walk
//! param b_time: time_car @ car, time_bus @ bus, time_walk @ walk
//! param asc_bus: 1 @ bus
//! ```
//!
//! Each `param` line declares one parameter (duplicates rejected) together
//! with the terms it enters: `column @ alternative`, where the column `1`
//! stands for the constant (an alternative-specific constant). A parameter
//! listed for several alternatives is a generic coefficient.
//!
//! # Synthetic specifications
//!
//! TOML documents describing alternatives, ground-truth parameters and
//! covariate distributions; see [`SyntheticSpec`]. Covariates are i.i.d.
//! normal per column, choices are drawn from the exact model probabilities
//! at the true parameters, and everything is a pure function of the seed.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ColumnRef, Dataset, ModelSpec, TermSpec};

/// Parses the line-oriented model specification format.
pub fn parse_model_spec_str(text: &str) -> Result<ModelSpec> {
    let mut alternatives: Option<Vec<String>> = None;
    let mut choice: Option<String> = None;
    let mut availability: Option<Vec<(String, String)>> = None;
    let mut parameters: Vec<String> = Vec::new();
    let mut terms: Vec<TermSpec> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(':').ok_or_else(|| Error::Parse {
            line,
            message: "expected 'key: value'".into(),
        })?;
        let key = key.trim();
        let rest = rest.trim();
        match key {
            "alternatives" => {
                if alternatives.is_some() {
                    return Err(Error::Parse {
                        line,
                        message: "alternatives listed twice".into(),
                    });
                }
                let alts: Vec<String> = rest
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if alts.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: "no alternatives given".into(),
                    });
                }
                alternatives = Some(alts);
            }
            "choice" => {
                if choice.is_some() {
                    return Err(Error::Parse {
                        line,
                        message: "choice column listed twice".into(),
                    });
                }
                if rest.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: "missing choice column name".into(),
                    });
                }
                choice = Some(rest.to_string());
            }
            "availability" => {
                if availability.is_some() {
                    return Err(Error::Parse {
                        line,
                        message: "availability listed twice".into(),
                    });
                }
                let mut pairs = Vec::new();
                for part in rest.split(',') {
                    let (alt, col) = part.split_once('=').ok_or_else(|| Error::Parse {
                        line,
                        message: format!("expected 'alternative = column', got '{part}'"),
                    })?;
                    pairs.push((alt.trim().to_string(), col.trim().to_string()));
                }
                availability = Some(pairs);
            }
            _ if key.starts_with("param ") || key.starts_with("param\t") => {
                let name = key["param".len()..].trim().to_string();
                if name.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: "missing parameter name".into(),
                    });
                }
                if parameters.contains(&name) {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate parameter '{name}'"),
                    });
                }
                for part in rest.split(',') {
                    let (col, alt) = part.split_once('@').ok_or_else(|| Error::Parse {
                        line,
                        message: format!("expected 'column @ alternative', got '{part}'"),
                    })?;
                    let col = col.trim();
                    let alt = alt.trim().to_string();
                    let column = if col == "1" {
                        ColumnRef::Constant
                    } else {
                        ColumnRef::Column(col.to_string())
                    };
                    terms.push(TermSpec {
                        parameter: name.clone(),
                        alternative: alt,
                        column,
                    });
                }
                parameters.push(name);
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key '{other}'"),
                });
            }
        }
    }

    let alternatives = alternatives.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing 'alternatives:' line".into(),
    })?;
    let choice_column = choice.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing 'choice:' line".into(),
    })?;

    let availability_columns = match availability {
        None => None,
        Some(pairs) => {
            let mut cols = vec![String::new(); alternatives.len()];
            for (alt, col) in pairs {
                let idx = alternatives
                    .iter()
                    .position(|a| *a == alt)
                    .ok_or_else(|| Error::ModelSpec(format!("unknown alternative '{alt}' in availability")))?;
                cols[idx] = col;
            }
            if let Some(i) = cols.iter().position(|c| c.is_empty()) {
                return Err(Error::ModelSpec(format!(
                    "availability missing for alternative '{}'",
                    alternatives[i]
                )));
            }
            Some(cols)
        }
    };

    let spec = ModelSpec {
        alternatives,
        parameters,
        terms,
        choice_column,
        availability_columns,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads and parses a model specification file.
pub fn parse_model_spec(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_model_spec_str(&text)
}

/// Renders a [`ModelSpec`] back into the text format.
pub fn model_spec_to_string(spec: &ModelSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alternatives: {}", spec.alternatives.join(", "));
    let _ = writeln!(out, "choice: {}", spec.choice_column);
    if let Some(avail) = &spec.availability_columns {
        let pairs: Vec<String> = spec
            .alternatives
            .iter()
            .zip(avail.iter())
            .map(|(a, c)| format!("{a} = {c}"))
            .collect();
        let _ = writeln!(out, "availability: {}", pairs.join(", "));
    }
    for name in &spec.parameters {
        let entries: Vec<String> = spec
            .terms
            .iter()
            .filter(|t| t.parameter == *name)
            .map(|t| match &t.column {
                ColumnRef::Constant => format!("1 @ {}", t.alternative),
                ColumnRef::Column(c) => format!("{c} @ {}", t.alternative),
            })
            .collect();
        let _ = writeln!(out, "param {name}: {}", entries.join(", "));
    }
    out
}

fn referenced_columns(spec: &ModelSpec) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for term in &spec.terms {
        if let ColumnRef::Column(name) = &term.column {
            if !cols.contains(name) {
                cols.push(name.clone());
            }
        }
    }
    cols
}

/// Loads a CSV dataset against a model specification, enforcing the dataset
/// invariants. Columns not referenced by the model are ignored.
pub fn load_csv(path: &Path, spec: &ModelSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad header row: {e}"),
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let col_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::ModelSpec(format!("column '{name}' not found in CSV header")))
    };

    let data_names = referenced_columns(spec);
    let data_idx: Vec<usize> = data_names
        .iter()
        .map(|n| col_of(n))
        .collect::<Result<_>>()?;
    let choice_idx = col_of(&spec.choice_column)?;
    let avail_idx: Option<Vec<usize>> = match &spec.availability_columns {
        Some(names) => Some(names.iter().map(|n| col_of(n)).collect::<Result<_>>()?),
        None => None,
    };

    let j = spec.alternative_count();
    let mut values: Vec<f64> = Vec::new();
    let mut choices: Vec<u32> = Vec::new();
    let mut avail: Vec<u8> = Vec::new();

    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data {
            row,
            message: format!("unreadable record: {e}"),
        })?;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Data {
                row,
                message: format!("missing field {idx}"),
            })
        };
        for (name, &idx) in data_names.iter().zip(&data_idx) {
            let raw = field(idx)?;
            let v: f64 = raw.parse().map_err(|_| Error::Data {
                row,
                message: format!("column '{name}': '{raw}' is not numeric"),
            })?;
            values.push(v);
        }
        let raw_choice = field(choice_idx)?;
        let c: i64 = raw_choice.parse().map_err(|_| Error::Data {
            row,
            message: format!(
                "choice column '{}': '{raw_choice}' is not an integer",
                spec.choice_column
            ),
        })?;
        if c < 0 || c >= j as i64 {
            return Err(Error::Data {
                row,
                message: format!("choice {c} out of range 0..{j}"),
            });
        }
        choices.push(c as u32);
        if let Some(idxs) = &avail_idx {
            for (&idx, name) in idxs.iter().zip(spec.availability_columns.as_ref().unwrap()) {
                let raw = field(idx)?;
                match raw {
                    "0" => avail.push(0),
                    "1" => avail.push(1),
                    _ => {
                        return Err(Error::Data {
                            row,
                            message: format!("availability column '{name}': '{raw}' is not 0/1"),
                        })
                    }
                }
            }
        }
    }

    let n = choices.len();
    if n == 0 {
        return Err(Error::EmptyInput("CSV contains no data rows"));
    }
    let columns = Array2::from_shape_vec((n, data_names.len()), values)
        .map_err(|e| Error::ModelSpec(format!("ragged CSV: {e}")))?;
    let availability = if avail_idx.is_some() {
        Some(
            Array2::from_shape_vec((n, j), avail)
                .map_err(|e| Error::ModelSpec(format!("ragged availability: {e}")))?,
        )
    } else {
        None
    };

    Dataset::new(
        data_names,
        columns,
        choices,
        spec.choice_column.clone(),
        availability,
        spec.availability_columns.clone(),
        j,
    )
}

/// Writes a dataset as CSV (explanatory columns, availability columns when
/// present, then the choice column). Floats print in shortest round-trip
/// form, so a write/load cycle reproduces values exactly.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv_to(data, &mut w)
}

/// [`write_csv`] against an open writer (lets callers prepend header
/// comments).
pub fn write_csv_to<W: std::io::Write>(data: &Dataset, w: &mut W) -> Result<()> {
    let mut header: Vec<String> = data.column_names().to_vec();
    if let Some(names) = data.availability_names() {
        header.extend(names.iter().cloned());
    }
    header.push(data.choice_name().to_string());
    writeln!(w, "{}", header.join(","))?;

    let n = data.n_obs();
    let c = data.column_names().len();
    let j = data.n_alternatives();
    let mut line = String::new();
    for row in 0..n {
        line.clear();
        for col in 0..c {
            if col > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", data.value(row, col));
        }
        if data.availability_names().is_some() {
            for alt in 0..j {
                let _ = write!(line, ",{}", u8::from(data.is_available(row, alt)));
            }
        }
        let _ = write!(line, ",{}", data.choices()[row]);
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// How a synthetic parameter enters the utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// One column per alternative, single shared coefficient.
    Generic,
    /// One column on one alternative.
    Specific,
    /// Alternative-specific constant (no data column).
    Constant,
}

/// One ground-truth parameter of a synthetic model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticParam {
    pub name: String,
    pub kind: SynthKind,
    pub true_value: f64,
    /// Required for `specific` and `constant` kinds.
    #[serde(default)]
    pub alternative: Option<String>,
    /// Covariate distribution (normal) for generated columns.
    #[serde(default)]
    pub mean: f64,
    #[serde(default = "default_std")]
    pub std: f64,
}

fn default_std() -> f64 {
    1.0
}

/// Recipe for a synthetic choice dataset with known true parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_obs: usize,
    pub alternatives: Vec<String>,
    pub seed: u64,
    pub params: Vec<SyntheticParam>,
}

impl SyntheticSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad synthetic spec: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_obs < 1 {
            return Err(Error::Config("n_obs must be >= 1".into()));
        }
        if self.alternatives.len() < 2 {
            return Err(Error::Config("need at least two alternatives".into()));
        }
        for p in &self.params {
            if !p.true_value.is_finite() {
                return Err(Error::Config(format!("true value of '{}' not finite", p.name)));
            }
            match p.kind {
                SynthKind::Generic => {}
                SynthKind::Specific | SynthKind::Constant => {
                    let alt = p.alternative.as_ref().ok_or_else(|| {
                        Error::Config(format!("parameter '{}' needs an alternative", p.name))
                    })?;
                    if !self.alternatives.contains(alt) {
                        return Err(Error::Config(format!(
                            "parameter '{}' references unknown alternative '{alt}'",
                            p.name
                        )));
                    }
                }
            }
            if !(p.std > 0.0) && p.kind != SynthKind::Constant {
                return Err(Error::Config(format!("std of '{}' must be > 0", p.name)));
            }
        }
        Ok(())
    }
}

/// The [`ModelSpec`] matching a synthetic recipe (generated column names are
/// `<param>_<alternative>`; the choice column is `choice`).
pub fn synthetic_model_spec(spec: &SyntheticSpec) -> ModelSpec {
    let mut terms = Vec::new();
    for p in &spec.params {
        match p.kind {
            SynthKind::Generic => {
                for alt in &spec.alternatives {
                    terms.push(TermSpec {
                        parameter: p.name.clone(),
                        alternative: alt.clone(),
                        column: ColumnRef::Column(format!("{}_{alt}", p.name)),
                    });
                }
            }
            SynthKind::Specific => {
                let alt = p.alternative.clone().expect("validated");
                terms.push(TermSpec {
                    parameter: p.name.clone(),
                    alternative: alt.clone(),
                    column: ColumnRef::Column(format!("{}_{alt}", p.name)),
                });
            }
            SynthKind::Constant => {
                terms.push(TermSpec {
                    parameter: p.name.clone(),
                    alternative: p.alternative.clone().expect("validated"),
                    column: ColumnRef::Constant,
                });
            }
        }
    }
    ModelSpec {
        alternatives: spec.alternatives.clone(),
        parameters: spec.params.iter().map(|p| p.name.clone()).collect(),
        terms,
        choice_column: "choice".into(),
        availability_columns: None,
    }
}

/// Standard normal draw (Box-Muller over the seeded uniform stream; the
/// sampling algorithm is pinned here so datasets reproduce across releases).
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws a synthetic dataset: normal covariates per declared column, choices
/// sampled from the exact logit probabilities at the true parameters.
/// Returns the dataset and the true parameter vector (ordered like the
/// parameters of [`synthetic_model_spec`]).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Array1<f64>)> {
    spec.validate()?;
    let model = synthetic_model_spec(spec);
    model.validate()?;
    let n = spec.n_obs;
    let j = spec.alternatives.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // generated data columns with their covariate distributions
    let mut col_names: Vec<String> = Vec::new();
    let mut col_meta: Vec<(f64, f64)> = Vec::new();
    let mut push_col = |name: String, mean: f64, std: f64| -> Result<()> {
        if col_names.contains(&name) {
            return Err(Error::Config(format!("generated column '{name}' clashes")));
        }
        col_names.push(name);
        col_meta.push((mean, std));
        Ok(())
    };
    for p in &spec.params {
        match p.kind {
            SynthKind::Generic => {
                for alt in &spec.alternatives {
                    push_col(format!("{}_{alt}", p.name), p.mean, p.std)?;
                }
            }
            SynthKind::Specific => {
                let alt = p.alternative.as_ref().expect("validated");
                push_col(format!("{}_{alt}", p.name), p.mean, p.std)?;
            }
            SynthKind::Constant => {}
        }
    }

    let mut columns = Array2::<f64>::zeros((n, col_names.len()));
    for row in 0..n {
        for (c, &(mean, std)) in col_meta.iter().enumerate() {
            columns[[row, c]] = mean + std * normal(&mut rng);
        }
    }

    let theta_star = Array1::from_iter(spec.params.iter().map(|p| p.true_value));

    // resolve term wiring once, outside the row loop
    struct Wire {
        alt: usize,
        param: usize,
        col: Option<usize>,
    }
    let wires: Vec<Wire> = model
        .terms
        .iter()
        .map(|term| Wire {
            alt: model.alternative_index(&term.alternative).unwrap(),
            param: model.parameter_index(&term.parameter).unwrap(),
            col: match &term.column {
                ColumnRef::Constant => None,
                ColumnRef::Column(name) => {
                    Some(col_names.iter().position(|cn| cn == name).unwrap())
                }
            },
        })
        .collect();

    let mut choices = Vec::with_capacity(n);
    let mut utils = vec![0.0f64; j];
    for row in 0..n {
        utils.fill(0.0);
        for wire in &wires {
            let x = match wire.col {
                None => 1.0,
                Some(c) => columns[[row, c]],
            };
            utils[wire.alt] += theta_star[wire.param] * x;
        }
        let max_u = utils.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = utils.iter().map(|u| (u - max_u).exp()).collect();
        let total: f64 = weights.iter().sum();
        let draw: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = j - 1;
        for (alt, w) in weights.iter().enumerate() {
            acc += w;
            if draw < acc {
                chosen = alt;
                break;
            }
        }
        choices.push(chosen as u32);
    }

    let data = Dataset::new(
        col_names,
        columns,
        choices,
        "choice".into(),
        None,
        None,
        j,
    )?;
    Ok((data, theta_star))
}
