//! Check-character routines of the supported identifier schemes.
//!
//! All functions expect the caller to have verified the character shape
//! with the scheme pattern; unexpected characters make them return `false`.

fn digit(b: u8) -> Option<u32> {
    (b as char).to_digit(10)
}

/// ISO 7064 MOD 11-2 check character for a string of decimal digits.
pub fn mod11_2_check_char(base: &str) -> Option<char> {
    let mut total: u32 = 0;
    for b in base.bytes() {
        total = (total + digit(b)?) * 2 % 11;
    }
    let result = (12 - total % 11) % 11;
    Some(if result == 10 {
        'X'
    } else {
        char::from_digit(result, 10).expect("below ten")
    })
}

/// ORCID iD `NNNN-NNNN-NNNN-NNNC` with a MOD 11-2 check character.
pub fn orcid_checksum_ok(orcid: &str) -> bool {
    let compact: String = orcid.chars().filter(|c| *c != '-').collect();
    if compact.len() != 16 || !compact.is_ascii() {
        return false;
    }
    let (base, check) = compact.split_at(15);
    mod11_2_check_char(base)
        .is_some_and(|c| check.starts_with(c))
}

/// ISSN `NNNN-NNNC`: weights 8..2, check = (11 - sum mod 11) mod 11, X for 10.
pub fn issn_checksum_ok(issn: &str) -> bool {
    let compact: Vec<u8> = issn.bytes().filter(|b| *b != b'-').collect();
    if compact.len() != 8 {
        return false;
    }
    let mut sum = 0;
    for (i, b) in compact[..7].iter().enumerate() {
        match digit(*b) {
            Some(d) => sum += d * (8 - i as u32),
            None => return false,
        }
    }
    let check = (11 - sum % 11) % 11;
    match compact[7] {
        b'X' | b'x' => check == 10,
        b => digit(b) == Some(check),
    }
}

/// ISBN-10 (weights 10..1, sum ≡ 0 mod 11, final X = 10) or ISBN-13
/// (weights 1,3 alternating, sum ≡ 0 mod 10). Hyphens and spaces are ignored.
pub fn isbn_checksum_ok(isbn: &str) -> bool {
    let compact: Vec<u8> = isbn.bytes().filter(|b| *b != b'-' && *b != b' ').collect();
    match compact.len() {
        10 => {
            let mut sum = 0;
            for (i, b) in compact.iter().enumerate() {
                let value = match (i, b) {
                    (9, b'X' | b'x') => 10,
                    (_, b) => match digit(*b) {
                        Some(d) => d,
                        None => return false,
                    },
                };
                sum += value * (10 - i as u32);
            }
            sum % 11 == 0
        }
        13 => {
            let mut sum = 0;
            for (i, b) in compact.iter().enumerate() {
                match digit(*b) {
                    Some(d) => sum += d * if i % 2 == 0 { 1 } else { 3 },
                    None => return false,
                }
            }
            sum % 10 == 0
        }
        _ => false,
    }
}
