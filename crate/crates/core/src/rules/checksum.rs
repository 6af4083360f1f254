//! Check-digit validation for card numbers (Luhn) and IBANs (ISO 7064 mod 97-10).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChecksumError {
    #[error("input contains non-digit characters")]
    NotDigits,
    #[error("expected 12 to 19 digits, got {0}")]
    BadLength(usize),
    #[error("not shaped like an IBAN")]
    BadFormat,
}

/// Luhn check over an arbitrary-length digit string. Returns `false` for
/// anything that is not pure ASCII digits.
pub fn luhn_checksum_ok(digits: &[u8]) -> bool {
    if digits.is_empty() || !digits.iter().all(u8::is_ascii_digit) {
        return false;
    }
    let sum: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, b)| {
            let d = u32::from(b - b'0');
            if i % 2 == 1 {
                let d2 = d * 2;
                if d2 > 9 {
                    d2 - 9
                } else {
                    d2
                }
            } else {
                d
            }
        })
        .sum();
    sum.is_multiple_of(10)
}

/// Validates a payment-card number. Spaces and hyphens are ignored; the
/// remaining 12 to 19 digits must satisfy the Luhn check.
pub fn luhn_valid(input: &str) -> Result<bool, ChecksumError> {
    let digits: Vec<u8> = input
        .bytes()
        .filter(|b| *b != b' ' && *b != b'-')
        .collect();
    if !digits.iter().all(u8::is_ascii_digit) {
        return Err(ChecksumError::NotDigits);
    }
    if !(12..=19).contains(&digits.len()) {
        return Err(ChecksumError::BadLength(digits.len()));
    }
    Ok(luhn_checksum_ok(&digits))
}

/// Strips spaces and checks the IBAN shape: two letters, two digits, up to
/// 30 alphanumerics. Lowercase letters are accepted and upper-cased.
fn normalize_iban(input: &str) -> Result<Vec<u8>, ChecksumError> {
    let s: Vec<u8> = input
        .bytes()
        .filter(|b| *b != b' ')
        .map(|b| b.to_ascii_uppercase())
        .collect();
    let shaped = s.len() >= 4
        && s.len() <= 34
        && s[..2].iter().all(u8::is_ascii_uppercase)
        && s[2..4].iter().all(u8::is_ascii_digit)
        && s[4..].iter().all(u8::is_ascii_alphanumeric);
    if shaped {
        Ok(s)
    } else {
        Err(ChecksumError::BadFormat)
    }
}

/// Residue of the rearranged, letter-expanded IBAN modulo 97.
fn iban_residue(iban: &[u8]) -> u32 {
    let (head, body) = iban.split_at(4);
    body.iter().chain(head).fold(0u32, |acc, &b| {
        if b.is_ascii_digit() {
            (acc * 10 + u32::from(b - b'0')) % 97
        } else {
            // letters expand to two digits: A=10 .. Z=35
            (acc * 100 + u32::from(b - b'A') + 10) % 97
        }
    })
}

/// Standard IBAN check: the rearranged number must be congruent to 1 mod 97.
/// Check digits 00, 01 and 99 are never issued (they alias 97, 98 and 02
/// under the modulus), so they are rejected outright.
pub fn iban_valid(input: &str) -> Result<bool, ChecksumError> {
    let s = normalize_iban(input)?;
    let check = u32::from(s[2] - b'0') * 10 + u32::from(s[3] - b'0');
    Ok((2..=98).contains(&check) && iban_residue(&s) == 1)
}

/// Computes the two check digits that make `country` + digits + `bban` valid.
pub fn iban_check_digits(country: &str, bban: &str) -> Result<String, ChecksumError> {
    let probe = format!("{country}00{bban}");
    let s = normalize_iban(&probe)?;
    let residue = iban_residue(&s);
    Ok(format!("{:02}", 98 - residue))
}
