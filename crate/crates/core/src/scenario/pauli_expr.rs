//! Real linear combinations of Pauli words, e.g. `"0.5*XY + 0.5*YX - pi/4 * ZI"`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::{pauli, ComplexMatrix, HermitianOperator, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("empty Pauli expression")]
    Empty,
    #[error("unknown letter `{0}` in Pauli word (allowed: I, X, Y, Z)")]
    UnknownLetter(char),
    #[error("Pauli word `{word}` has {found} letters, expected {expected}")]
    WordLength {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("non-real coefficient `{0}`: only real coefficients keep the operator Hermitian")]
    NonRealCoefficient(String),
    #[error("malformed term `{0}`")]
    Malformed(String),
    #[error("term `{0}` has no Pauli word")]
    MissingWord(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Splits at top-level `+`/`-`, keeping exponent signs such as `1e-3` inside numbers.
fn split_terms(expr: &str) -> Vec<(f64, String)> {
    let chars: Vec<char> = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut cur = String::new();
    for (i, &ch) in chars.iter().enumerate() {
        let exponent = i > 0
            && matches!(chars[i - 1], 'e' | 'E')
            && i > 1
            && (chars[i - 2].is_ascii_digit() || chars[i - 2] == '.');
        if (ch == '+' || ch == '-') && !exponent {
            if !cur.is_empty() {
                terms.push((sign, std::mem::take(&mut cur)));
                sign = 1.0;
            }
            if ch == '-' {
                sign = -sign;
            }
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        terms.push((sign, cur));
    }
    terms
}

fn is_word(token: &str) -> bool {
    token.chars().all(|c| c.is_ascii_uppercase())
}

fn parse_factor(token: &str, term: &str) -> Result<f64, PauliError> {
    if token == "pi" {
        return Ok(PI);
    }
    if token.ends_with('i') || token.ends_with('j') {
        return Err(PauliError::NonRealCoefficient(token.to_string()));
    }
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| PauliError::Malformed(term.to_string()))
}

fn word_matrix(word: &str) -> Result<ComplexMatrix, PauliError> {
    let mut acc: Option<ComplexMatrix> = None;
    for ch in word.chars() {
        let m = pauli::letter(ch).ok_or(PauliError::UnknownLetter(ch))?;
        acc = Some(match acc {
            None => m,
            Some(a) => a.kron(&m)?,
        });
    }
    acc.ok_or(PauliError::Empty)
}

/// Parses a Pauli expression; `qubits`, when given, fixes the word length.
pub fn pauli_string(expr: &str, qubits: Option<usize>) -> Result<HermitianOperator, PauliError> {
    let terms = split_terms(expr);
    if terms.is_empty() {
        return Err(PauliError::Empty);
    }
    let mut expected = qubits;
    let mut total: Option<ComplexMatrix> = None;
    for (sign, term) in terms {
        let mut coeff = sign;
        let mut word: Option<String> = None;
        let mut divide = false;
        let mut rest = term.as_str();
        loop {
            let end = rest.find(['*', '/']).unwrap_or(rest.len());
            let token = &rest[..end];
            if token.is_empty() {
                return Err(PauliError::Malformed(term.clone()));
            }
            if is_word(token) && token.chars().all(|c| pauli::letter(c).is_some()) {
                if word.is_some() || divide {
                    return Err(PauliError::Malformed(term.clone()));
                }
                word = Some(token.to_string());
            } else if token.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                let bad = token.chars().find(|&c| pauli::letter(c).is_none()).unwrap_or('?');
                return Err(PauliError::UnknownLetter(bad));
            } else {
                let v = parse_factor(token, &term)?;
                coeff = if divide { coeff / v } else { coeff * v };
            }
            if end == rest.len() {
                break;
            }
            divide = rest.as_bytes()[end] == b'/';
            rest = &rest[end + 1..];
        }
        let word = word.ok_or_else(|| PauliError::MissingWord(term.clone()))?;
        let n = word.chars().count();
        match expected {
            Some(e) if e != n => {
                return Err(PauliError::WordLength {
                    word,
                    expected: e,
                    found: n,
                })
            }
            _ => expected = Some(n),
        }
        let m = word_matrix(&word)?.scale_real(coeff);
        total = Some(match total {
            None => m,
            Some(t) => &t + &m,
        });
    }
    let total = total.ok_or(PauliError::Empty)?;
    Ok(HermitianOperator::symmetrize(&total))
}
