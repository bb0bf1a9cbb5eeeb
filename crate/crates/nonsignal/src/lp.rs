//! Exact rational LP representation (maximize c.x subject to Ax = b,
//! x >= 0), primal/dual optimality certificates, JSON formats, and
//! independent certificate verification.

use crate::rational::{format_rat, parse_rat, Rat};
use num::Zero;
use serde::{Deserialize, Serialize};

/// Sparse equality row: sum of terms equals rhs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub terms: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

/// Sparse equality-constrained LP over exact rationals. The objective is
/// maximized; every variable is bounded below by zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLP {
    pub variables: Vec<String>,
    pub objective: Vec<(usize, Rat)>,
    pub rows: Vec<Row>,
}

impl RationalLP {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Objective as a dense vector.
    pub fn dense_objective(&self) -> Vec<Rat> {
        let mut c = vec![Rat::zero(); self.num_vars()];
        for (j, v) in &self.objective {
            c[*j] = v.clone();
        }
        c
    }

    pub fn validate(&self) -> Result<(), String> {
        for (j, _) in &self.objective {
            if *j >= self.num_vars() {
                return Err(format!("objective references unknown variable {j}"));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, _) in &row.terms {
                if *j >= self.num_vars() {
                    return Err(format!("row {i} references unknown variable {j}"));
                }
            }
        }
        Ok(())
    }
}

/// Exact primal/dual pair with matching objective value; acceptance by
/// `verify_certificate` proves LP optimality without trusting any solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub primal: Vec<(usize, Rat)>,
    pub dual: Vec<(usize, Rat)>,
    pub objective: Rat,
}

impl Certificate {
    pub fn dense_primal(&self, num_vars: usize) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); num_vars];
        for (j, v) in &self.primal {
            x[*j] = v.clone();
        }
        x
    }

    pub fn dense_dual(&self, num_rows: usize) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); num_rows];
        for (i, v) in &self.dual {
            y[*i] = v.clone();
        }
        y
    }
}

/// Why a certificate was rejected; the first violation found.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("primal entry for variable {var} ({label}) is negative")]
    PrimalNegative { var: usize, label: String },
    #[error("primal violates equality row {row}: lhs {lhs} != rhs {rhs}")]
    PrimalRow { row: usize, lhs: String, rhs: String },
    #[error("dual infeasible at column {col} ({label}): A^T y = {aty} < c = {c}")]
    DualColumn {
        col: usize,
        label: String,
        aty: String,
        c: String,
    },
    #[error("objective mismatch: c.x = {cx}, b.y = {by}, claimed {claimed}")]
    ObjectiveMismatch {
        cx: String,
        by: String,
        claimed: String,
    },
    #[error("certificate references out-of-range index {index}")]
    BadIndex { index: usize },
}

/// Exact check of primal feasibility, dual feasibility, and objective
/// equality. Acceptance is independent of how the certificate was found.
pub fn verify_certificate(lp: &RationalLP, cert: &Certificate) -> Result<(), Rejection> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    for (j, _) in &cert.primal {
        if *j >= n {
            return Err(Rejection::BadIndex { index: *j });
        }
    }
    for (i, _) in &cert.dual {
        if *i >= m {
            return Err(Rejection::BadIndex { index: *i });
        }
    }
    let x = cert.dense_primal(n);
    for (j, v) in x.iter().enumerate() {
        if *v < Rat::zero() {
            return Err(Rejection::PrimalNegative {
                var: j,
                label: lp.variables[j].clone(),
            });
        }
    }
    // Primal feasibility: every equality row holds exactly.
    for (i, row) in lp.rows.iter().enumerate() {
        let mut lhs = Rat::zero();
        for (j, a) in &row.terms {
            if !x[*j].is_zero() {
                lhs += a * &x[*j];
            }
        }
        if lhs != row.rhs {
            return Err(Rejection::PrimalRow {
                row: i,
                lhs: format_rat(&lhs),
                rhs: format_rat(&row.rhs),
            });
        }
    }
    // Dual feasibility: A^T y >= c componentwise (y free).
    let y = cert.dense_dual(m);
    let mut aty = vec![Rat::zero(); n];
    for (i, row) in lp.rows.iter().enumerate() {
        if y[i].is_zero() {
            continue;
        }
        for (j, a) in &row.terms {
            aty[*j] += a * &y[i];
        }
    }
    let c = lp.dense_objective();
    for j in 0..n {
        if aty[j] < c[j] {
            return Err(Rejection::DualColumn {
                col: j,
                label: lp.variables[j].clone(),
                aty: format_rat(&aty[j]),
                c: format_rat(&c[j]),
            });
        }
    }
    // Matching objective values.
    let cx: Rat = lp
        .objective
        .iter()
        .map(|(j, v)| v * &x[*j])
        .fold(Rat::zero(), |acc, t| acc + t);
    let by: Rat = lp
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| &row.rhs * &y[i])
        .fold(Rat::zero(), |acc, t| acc + t);
    if cx != cert.objective || by != cert.objective {
        return Err(Rejection::ObjectiveMismatch {
            cx: format_rat(&cx),
            by: format_rat(&by),
            claimed: format_rat(&cert.objective),
        });
    }
    Ok(())
}

// -- JSON formats (bit-exact golden-file targets) --

#[derive(Serialize, Deserialize)]
struct RowJson {
    rhs: String,
    terms: Vec<(usize, String)>,
}

#[derive(Serialize, Deserialize)]
struct LpJson {
    variables: Vec<String>,
    objective: Vec<(usize, String)>,
    rows: Vec<RowJson>,
}

#[derive(Serialize, Deserialize)]
struct CertJson {
    primal: Vec<(usize, String)>,
    dual: Vec<(usize, String)>,
    objective: String,
}

pub fn lp_to_json(lp: &RationalLP) -> String {
    let json = LpJson {
        variables: lp.variables.clone(),
        objective: lp
            .objective
            .iter()
            .map(|(j, v)| (*j, format_rat(v)))
            .collect(),
        rows: lp
            .rows
            .iter()
            .map(|r| RowJson {
                rhs: format_rat(&r.rhs),
                terms: r.terms.iter().map(|(j, v)| (*j, format_rat(v))).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&json).expect("LP serialization cannot fail")
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] crate::rational::ParseRatError),
    #[error("inconsistent LP: {0}")]
    Inconsistent(String),
}

pub fn lp_from_json(text: &str) -> Result<RationalLP, FormatError> {
    let json: LpJson = serde_json::from_str(text)?;
    let parse_terms = |terms: &[(usize, String)]| -> Result<Vec<(usize, Rat)>, FormatError> {
        terms
            .iter()
            .map(|(j, s)| Ok((*j, parse_rat(s)?)))
            .collect()
    };
    let lp = RationalLP {
        variables: json.variables,
        objective: parse_terms(&json.objective)?,
        rows: json
            .rows
            .iter()
            .map(|r| {
                Ok(Row {
                    rhs: parse_rat(&r.rhs)?,
                    terms: parse_terms(&r.terms)?,
                })
            })
            .collect::<Result<_, FormatError>>()?,
    };
    lp.validate().map_err(FormatError::Inconsistent)?;
    Ok(lp)
}

pub fn certificate_to_json(cert: &Certificate) -> String {
    let json = CertJson {
        primal: cert
            .primal
            .iter()
            .map(|(j, v)| (*j, format_rat(v)))
            .collect(),
        dual: cert.dual.iter().map(|(i, v)| (*i, format_rat(v))).collect(),
        objective: format_rat(&cert.objective),
    };
    serde_json::to_string(&json).expect("certificate serialization cannot fail")
}

pub fn certificate_from_json(text: &str) -> Result<Certificate, FormatError> {
    let json: CertJson = serde_json::from_str(text)?;
    let parse_terms = |terms: &[(usize, String)]| -> Result<Vec<(usize, Rat)>, FormatError> {
        terms
            .iter()
            .map(|(j, s)| Ok((*j, parse_rat(s)?)))
            .collect()
    };
    Ok(Certificate {
        primal: parse_terms(&json.primal)?,
        dual: parse_terms(&json.dual)?,
        objective: parse_rat(&json.objective)?,
    })
}

/// Sparse vector from a dense one, dropping zeros.
pub fn sparsify(dense: &[Rat]) -> Vec<(usize, Rat)> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| (j, v.clone()))
        .collect()
}
