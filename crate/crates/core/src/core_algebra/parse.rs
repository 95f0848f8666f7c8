use super::pauli::{Pauli, PauliHamiltonian, PauliString};
use crate::error::{Error, Result};

/// Parses text such as `0.3*XZI + 0.4*ZZI - 1e-2*IIY`. Whitespace is
/// ignored, a missing coefficient means 1.
pub fn parse_hamiltonian(text: &str) -> Result<PauliHamiltonian> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(Error::Parse("empty Hamiltonian".into()));
    }
    let mut pos = 0;
    let mut terms = Vec::new();
    while pos < chars.len() {
        let mut sign = 1.0;
        if chars[pos] == '+' || chars[pos] == '-' {
            if chars[pos] == '-' {
                sign = -1.0;
            }
            pos += 1;
        } else if !terms.is_empty() {
            return Err(Error::Parse(format!("expected '+' or '-' at offset {pos}")));
        }
        let start = pos;
        while pos < chars.len() && is_number_char(&chars, pos) {
            pos += 1;
        }
        let coeff = if pos > start {
            let lit: String = chars[start..pos].iter().collect();
            let v: f64 = lit.parse().map_err(|_| Error::Parse(format!("bad coefficient '{lit}'")))?;
            if pos >= chars.len() || chars[pos] != '*' {
                return Err(Error::Parse(format!("expected '*' after coefficient '{lit}'")));
            }
            pos += 1;
            v
        } else {
            1.0
        };
        let word_start = pos;
        let mut ops = Vec::new();
        while pos < chars.len() {
            match Pauli::from_char(chars[pos]) {
                Some(p) => ops.push(p),
                None => break,
            }
            pos += 1;
        }
        if ops.is_empty() {
            let rest: String = chars[word_start..].iter().take(8).collect();
            return Err(Error::Parse(format!("expected a Pauli word at '{rest}'")));
        }
        terms.push((sign * coeff, PauliString::new(ops)?));
    }
    PauliHamiltonian::new(terms).map_err(|e| match e {
        Error::InvalidInput(m) => Error::Parse(m),
        other => other,
    })
}

fn is_number_char(chars: &[char], pos: usize) -> bool {
    let c = chars[pos];
    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
        return true;
    }
    // exponent sign
    (c == '+' || c == '-') && pos > 0 && (chars[pos - 1] == 'e' || chars[pos - 1] == 'E')
}
