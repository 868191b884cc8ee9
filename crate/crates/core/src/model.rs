//! Multinomial logit model definition and log-likelihood evaluation.
//!
//! Utilities are linear in the parameters and described by a declarative term
//! list: each term attaches one parameter to one alternative, multiplied by a
//! data column (or by the constant 1 for alternative-specific constants). A
//! parameter shared by several alternatives (a "generic" coefficient) simply
//! appears in several terms.
//!
//! [`LogLikelihood`] binds a [`ModelSpec`] to a [`Dataset`] and computes the
//! log likelihood together with its exact analytic gradient and Hessian over
//! any [`Batch`] of observations. For an observation with choice `i`,
//! probabilities `P_j` and per-alternative parameter loadings `z_j`:
//!
//! ```text
//! grad ln P(i)  =  z_i - sum_j P_j z_j
//! hess ln P(i)  =  zbar zbar' - sum_j P_j z_j z_j'     with zbar = sum_j P_j z_j
//! ```
//!
//! Utilities are shifted by their row maximum before exponentiation, so large
//! parameter values cannot overflow the softmax.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Reference to the data behind one utility term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    /// Constant 1 (alternative-specific constant).
    Constant,
    /// Named dataset column.
    Column(String),
}

/// One linear utility term: `parameter * column` entering `alternative`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSpec {
    pub parameter: String,
    pub alternative: String,
    pub column: ColumnRef,
}

/// Declarative multinomial logit model: J alternatives, K parameters, and the
/// term list wiring them to data columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub alternatives: Vec<String>,
    /// Unique parameter names; their order fixes the layout of theta.
    pub parameters: Vec<String>,
    pub terms: Vec<TermSpec>,
    pub choice_column: String,
    /// Per-alternative 0/1 availability columns (parallel to `alternatives`),
    /// or `None` when every alternative is always available.
    pub availability_columns: Option<Vec<String>>,
}

impl ModelSpec {
    pub fn parameter_count(&self) -> usize {
        self.parameters.len()
    }

    pub fn alternative_count(&self) -> usize {
        self.alternatives.len()
    }

    pub fn parameter_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p == name)
    }

    pub fn alternative_index(&self, name: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a == name)
    }

    /// Checks the structural invariants: K >= 1, J >= 2, unique names, term
    /// references resolve, and at most one constant per alternative with at
    /// least one alternative left without a constant (normalization).
    pub fn validate(&self) -> Result<()> {
        if self.alternative_count() < 2 {
            return Err(Error::ModelSpec("need at least two alternatives".into()));
        }
        if self.parameters.is_empty() {
            return Err(Error::ModelSpec("need at least one parameter".into()));
        }
        for (i, name) in self.alternatives.iter().enumerate() {
            if self.alternatives[..i].contains(name) {
                return Err(Error::ModelSpec(format!("duplicate alternative '{name}'")));
            }
        }
        for (i, name) in self.parameters.iter().enumerate() {
            if self.parameters[..i].contains(name) {
                return Err(Error::ModelSpec(format!("duplicate parameter '{name}'")));
            }
        }
        let mut used = vec![false; self.parameter_count()];
        let mut constants = vec![0usize; self.alternative_count()];
        for term in &self.terms {
            let p = self
                .parameter_index(&term.parameter)
                .ok_or_else(|| Error::ModelSpec(format!("unknown parameter '{}'", term.parameter)))?;
            let a = self.alternative_index(&term.alternative).ok_or_else(|| {
                Error::ModelSpec(format!("unknown alternative '{}'", term.alternative))
            })?;
            used[p] = true;
            if term.column == ColumnRef::Constant {
                constants[a] += 1;
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(Error::ModelSpec(format!(
                "parameter '{}' appears in no term",
                self.parameters[p]
            )));
        }
        if let Some(a) = constants.iter().position(|&c| c > 1) {
            return Err(Error::ModelSpec(format!(
                "alternative '{}' has more than one constant",
                self.alternatives[a]
            )));
        }
        if constants.iter().all(|&c| c == 1) {
            return Err(Error::ModelSpec(
                "every alternative has a constant; omit one for normalization".into(),
            ));
        }
        if let Some(avail) = &self.availability_columns {
            if avail.len() != self.alternative_count() {
                return Err(Error::ModelSpec(
                    "availability columns must list one column per alternative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Immutable, validated observation table bound to a model's column set.
///
/// Holds the referenced explanatory columns, the observed choice per row and
/// the per-row availability mask. Evaluation is read-only, so a `Dataset` can
/// be shared freely across threads.
#[derive(Debug, Clone)]
pub struct Dataset {
    column_names: Vec<String>,
    /// N x C, one column per entry of `column_names`.
    columns: Array2<f64>,
    choice: Vec<u32>,
    choice_name: String,
    /// N x J 0/1 mask, `None` = everything available.
    availability: Option<Array2<u8>>,
    availability_names: Option<Vec<String>>,
    n_alternatives: usize,
}

impl Dataset {
    /// Builds a dataset and enforces its invariants (N >= 1, finite values,
    /// choices in range and available).
    pub fn new(
        column_names: Vec<String>,
        columns: Array2<f64>,
        choice: Vec<u32>,
        choice_name: String,
        availability: Option<Array2<u8>>,
        availability_names: Option<Vec<String>>,
        n_alternatives: usize,
    ) -> Result<Self> {
        let n = columns.nrows();
        if n == 0 {
            return Err(Error::EmptyInput("dataset has no observations"));
        }
        if choice.len() != n {
            return Err(Error::ModelSpec("choice length mismatch".into()));
        }
        if columns.ncols() != column_names.len() {
            return Err(Error::ModelSpec("column name/width mismatch".into()));
        }
        for (row, col_vals) in columns.rows().into_iter().enumerate() {
            if let Some(c) = col_vals.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data {
                    row,
                    message: format!("non-finite value in column '{}'", column_names[c]),
                });
            }
        }
        let ds = Dataset {
            column_names,
            columns,
            choice,
            choice_name,
            availability,
            availability_names,
            n_alternatives,
        };
        for row in 0..n {
            let chosen = ds.choice[row] as usize;
            if chosen >= n_alternatives {
                return Err(Error::Data {
                    row,
                    message: format!(
                        "choice {} out of range (J = {})",
                        ds.choice[row], n_alternatives
                    ),
                });
            }
            if !ds.is_available(row, chosen) {
                return Err(Error::Data {
                    row,
                    message: format!("chosen alternative {chosen} is not available"),
                });
            }
        }
        Ok(ds)
    }

    pub fn n_obs(&self) -> usize {
        self.columns.nrows()
    }

    pub fn n_alternatives(&self) -> usize {
        self.n_alternatives
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn choice_name(&self) -> &str {
        &self.choice_name
    }

    pub fn choices(&self) -> &[u32] {
        &self.choice
    }

    pub fn availability_names(&self) -> Option<&[String]> {
        self.availability_names.as_deref()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[[row, col]]
    }

    pub fn is_available(&self, row: usize, alternative: usize) -> bool {
        match &self.availability {
            Some(mask) => mask[[row, alternative]] != 0,
            None => true,
        }
    }
}

/// A subset of observation rows, drawn without replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    indices: Vec<u32>,
}

impl Batch {
    /// Checked constructor: indices must be distinct, non-empty and < n.
    pub fn new(indices: Vec<u32>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput("batch has no indices"));
        }
        if indices.len() > n {
            return Err(Error::Config(format!(
                "batch size {} exceeds dataset size {n}",
                indices.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            let i = i as usize;
            if i >= n {
                return Err(Error::Config(format!("batch index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::Config(format!("batch index {i} repeated")));
            }
            seen[i] = true;
        }
        Ok(Batch { indices })
    }

    pub(crate) fn from_raw(indices: Vec<u32>) -> Self {
        Batch { indices }
    }

    /// The full dataset, in row order.
    pub fn full(n: usize) -> Self {
        Batch {
            indices: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }
}

/// What to compute in [`LogLikelihood::evaluate`]. Higher orders include the
/// lower ones: requesting the Hessian also fills value and gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOrder {
    Value,
    Gradient,
    Hessian,
}

/// Log likelihood (and derivatives) of a batch at a given theta.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// `sum_{n in batch} ln P_n(i_n)`, always <= 0.
    pub value: f64,
    /// `None` only for [`EvalOrder::Value`] requests.
    pub gradient: Option<Array1<f64>>,
    pub hessian: Option<Array2<f64>>,
    /// N' / N of the batch this was computed on.
    pub batch_fraction: f64,
}

impl Evaluation {
    /// Gradient of an evaluation that was requested with at least
    /// [`EvalOrder::Gradient`].
    pub fn gradient(&self) -> &Array1<f64> {
        self.gradient.as_ref().expect("gradient was not requested")
    }
}

struct BoundTerm {
    parameter: usize,
    /// column in the term-value matrix, or `None` for the constant 1
    is_constant: bool,
}

/// A [`ModelSpec`] bound to a [`Dataset`]: the log-likelihood evaluator.
pub struct LogLikelihood {
    /// N x T matrix of term data values (constant terms hold 1.0).
    term_values: Array2<f64>,
    /// Parameter index of each term (terms sorted by alternative).
    term_param: Vec<usize>,
    /// Half-open term ranges per alternative.
    alt_ranges: Vec<std::ops::Range<usize>>,
    choices: Vec<u32>,
    availability: Option<Array2<u8>>,
    n_params: usize,
    n_alts: usize,
    n_obs: usize,
}

impl LogLikelihood {
    /// Validates the spec against the dataset and extracts the term-value
    /// matrix. The dataset can be dropped afterwards.
    pub fn bind(spec: &ModelSpec, data: &Dataset) -> Result<Self> {
        spec.validate()?;
        if data.n_alternatives() != spec.alternative_count() {
            return Err(Error::ModelSpec(format!(
                "dataset was loaded for J = {} but the model has J = {}",
                data.n_alternatives(),
                spec.alternative_count()
            )));
        }
        let n = data.n_obs();
        let n_alts = spec.alternative_count();

        // group terms per alternative so each row evaluation walks contiguous ranges
        let mut per_alt: Vec<Vec<(usize, BoundTerm)>> = (0..n_alts).map(|_| Vec::new()).collect();
        for term in &spec.terms {
            let p = spec.parameter_index(&term.parameter).unwrap();
            let a = spec.alternative_index(&term.alternative).unwrap();
            let col = match &term.column {
                ColumnRef::Constant => None,
                ColumnRef::Column(name) => Some(data.column_index(name).ok_or_else(|| {
                    Error::ModelSpec(format!("column '{name}' not present in dataset"))
                })?),
            };
            per_alt[a].push((
                col.unwrap_or(usize::MAX),
                BoundTerm {
                    parameter: p,
                    is_constant: col.is_none(),
                },
            ));
        }

        let n_terms = spec.terms.len();
        let mut term_values = Array2::<f64>::zeros((n, n_terms));
        let mut term_param = Vec::with_capacity(n_terms);
        let mut alt_ranges = Vec::with_capacity(n_alts);
        let mut t = 0;
        for alt_terms in &per_alt {
            let start = t;
            for (col, bound) in alt_terms {
                for row in 0..n {
                    term_values[[row, t]] = if bound.is_constant {
                        1.0
                    } else {
                        data.value(row, *col)
                    };
                }
                term_param.push(bound.parameter);
                t += 1;
            }
            alt_ranges.push(start..t);
        }

        Ok(LogLikelihood {
            term_values,
            term_param,
            alt_ranges,
            choices: data.choices().to_vec(),
            availability: data.availability.clone(),
            n_params: spec.parameter_count(),
            n_alts,
            n_obs: n,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_alternatives(&self) -> usize {
        self.n_alts
    }

    fn available(&self, row: usize, alt: usize) -> bool {
        match &self.availability {
            Some(mask) => mask[[row, alt]] != 0,
            None => true,
        }
    }

    /// Utilities of every alternative for one row (unavailable ones get NaN
    /// and are skipped by the caller).
    fn utilities(&self, theta: &[f64], row: &[f64], out: &mut [f64], row_idx: usize) -> Result<()> {
        for (alt, range) in self.alt_ranges.iter().enumerate() {
            if !self.available(row_idx, alt) {
                out[alt] = f64::NAN;
                continue;
            }
            let mut u = 0.0;
            for t in range.clone() {
                u += row[t] * theta[self.term_param[t]];
            }
            if !u.is_finite() {
                return Err(Error::Evaluation {
                    row: row_idx,
                    message: "non-finite utility".into(),
                });
            }
            out[alt] = u;
        }
        Ok(())
    }

    /// Choice probabilities for one observation row: a point on the simplex
    /// over available alternatives, exactly 0 for unavailable ones.
    pub fn choice_probabilities(&self, theta: &[f64], row: usize) -> Result<Array1<f64>> {
        assert_eq!(theta.len(), self.n_params, "theta has wrong length");
        let values = self.term_values.as_slice().expect("contiguous");
        let t = self.term_values.ncols();
        let row_vals = &values[row * t..(row + 1) * t];
        let mut utils = vec![0.0; self.n_alts];
        self.utilities(theta, row_vals, &mut utils, row)?;

        let max_u = utils
            .iter()
            .filter(|u| u.is_finite())
            .fold(f64::NEG_INFINITY, |m, &u| m.max(u));
        let mut probs = Array1::<f64>::zeros(self.n_alts);
        let mut denom = 0.0;
        for alt in 0..self.n_alts {
            if utils[alt].is_finite() {
                let e = (utils[alt] - max_u).exp();
                probs[alt] = e;
                denom += e;
            }
        }
        probs.mapv_inplace(|p| p / denom);
        Ok(probs)
    }

    /// Log likelihood over a batch, with analytic derivatives up to `order`.
    pub fn evaluate(&self, theta: &[f64], batch: &Batch, order: EvalOrder) -> Result<Evaluation> {
        assert_eq!(theta.len(), self.n_params, "theta has wrong length");
        let k = self.n_params;
        let t_count = self.term_values.ncols();
        let values = self.term_values.as_slice().expect("contiguous");

        let mut total = 0.0f64;
        let mut gradient = match order {
            EvalOrder::Value => None,
            _ => Some(Array1::<f64>::zeros(k)),
        };
        let mut hessian = match order {
            EvalOrder::Hessian => Some(Array2::<f64>::zeros((k, k))),
            _ => None,
        };

        let mut utils = vec![0.0f64; self.n_alts];
        let mut probs = vec![0.0f64; self.n_alts];
        let mut zbar = vec![0.0f64; k];

        for &row_u32 in batch.indices() {
            let row = row_u32 as usize;
            let row_vals = &values[row * t_count..(row + 1) * t_count];
            self.utilities(theta, row_vals, &mut utils, row)?;

            let chosen = self.choices[row] as usize;
            if !self.available(row, chosen) {
                return Err(Error::Data {
                    row,
                    message: format!("chosen alternative {chosen} is not available"),
                });
            }

            let max_u = utils
                .iter()
                .filter(|u| u.is_finite())
                .fold(f64::NEG_INFINITY, |m, &u| m.max(u));
            let mut denom = 0.0;
            for alt in 0..self.n_alts {
                probs[alt] = if utils[alt].is_finite() {
                    let e = (utils[alt] - max_u).exp();
                    denom += e;
                    e
                } else {
                    0.0
                };
            }
            for p in probs.iter_mut() {
                *p /= denom;
            }

            let ln_p = utils[chosen] - max_u - denom.ln();
            if !ln_p.is_finite() {
                return Err(Error::Evaluation {
                    row,
                    message: "log probability of chosen alternative is not finite".into(),
                });
            }
            total += ln_p;

            if let Some(grad) = gradient.as_mut() {
                let g = grad.as_slice_mut().expect("contiguous");
                // zbar = sum_j P_j z_j
                zbar.fill(0.0);
                for (alt, range) in self.alt_ranges.iter().enumerate() {
                    let p = probs[alt];
                    if p == 0.0 {
                        continue;
                    }
                    for t in range.clone() {
                        zbar[self.term_param[t]] += p * row_vals[t];
                    }
                }
                for t in self.alt_ranges[chosen].clone() {
                    g[self.term_param[t]] += row_vals[t];
                }
                for (gi, zi) in g.iter_mut().zip(zbar.iter()) {
                    *gi -= zi;
                }

                if let Some(hess) = hessian.as_mut() {
                    let h = hess.as_slice_mut().expect("contiguous");
                    // + zbar zbar'
                    for a in 0..k {
                        let za = zbar[a];
                        if za == 0.0 {
                            continue;
                        }
                        let hrow = &mut h[a * k..(a + 1) * k];
                        for (hb, zb) in hrow.iter_mut().zip(zbar.iter()) {
                            *hb += za * zb;
                        }
                    }
                    // - sum_j P_j z_j z_j'
                    for (alt, range) in self.alt_ranges.iter().enumerate() {
                        let p = probs[alt];
                        if p == 0.0 {
                            continue;
                        }
                        for t1 in range.clone() {
                            let p1 = self.term_param[t1];
                            let w = p * row_vals[t1];
                            let hrow = &mut h[p1 * k..(p1 + 1) * k];
                            for t2 in range.clone() {
                                hrow[self.term_param[t2]] -= w * row_vals[t2];
                            }
                        }
                    }
                }
            }
        }

        Ok(Evaluation {
            value: total,
            gradient,
            hessian,
            batch_fraction: batch.len() as f64 / self.n_obs as f64,
        })
    }
}
