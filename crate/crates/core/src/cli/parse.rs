use crate::holonomy::{BraidLetter, BraidWord};
use crate::{Error, Result};

fn err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

/// Reads a run of ASCII digits starting at `pos`; returns the value and the
/// position after it.
fn integer(bytes: &[u8], pos: usize, what: &str) -> Result<(u64, usize)> {
    let end = pos + bytes[pos..].iter().take_while(|b| b.is_ascii_digit()).count();
    if end == pos {
        return Err(err(pos, format!("expected {what}")));
    }
    let text = std::str::from_utf8(&bytes[pos..end]).expect("ascii digits");
    let value = text.parse::<u64>().map_err(|_| err(pos, format!("{what} too large")))?;
    Ok((value, end))
}

/// Parses `word := term (WS term)*`, `term := "s" INT ("^" "-"? INT)?`.
///
/// An exponent expands to that many copies of the letter with the
/// exponent's sign. Whitespace-only input is the empty word. Generator
/// indices are checked against the strand count later, at run time.
pub fn parse_braid_word(text: &str) -> Result<BraidWord> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut letters = Vec::new();
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(&mut pos);
    while pos < bytes.len() {
        let start = pos;
        if bytes[pos] != b's' {
            return Err(err(pos, format!("unexpected {:?}, expected 's'", char_at(text, pos))));
        }
        pos += 1;
        let (index, next) = integer(bytes, pos, "generator index")?;
        if index == 0 {
            return Err(err(start, "generator index must be at least 1"));
        }
        pos = next;
        let mut exponent: i64 = 1;
        if pos < bytes.len() && bytes[pos] == b'^' {
            pos += 1;
            let negative = pos < bytes.len() && bytes[pos] == b'-';
            if negative {
                pos += 1;
            }
            let exp_start = pos;
            let (e, next) = integer(bytes, pos, "exponent")?;
            if e == 0 {
                return Err(err(exp_start, "exponent must be at least 1"));
            }
            if e > 1 << 20 {
                return Err(err(exp_start, "exponent too large"));
            }
            exponent = if negative { -(e as i64) } else { e as i64 };
            pos = next;
        }
        let index = usize::try_from(index).map_err(|_| err(start, "generator index too large"))?;
        let sign = if exponent < 0 { -1 } else { 1 };
        letters.extend(std::iter::repeat_n(BraidLetter::new(index, sign), exponent.unsigned_abs() as usize));
        if pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            return Err(err(pos, format!("unexpected {:?} after term", char_at(text, pos))));
        }
        skip_ws(&mut pos);
    }
    Ok(BraidWord::new(letters))
}

fn char_at(text: &str, pos: usize) -> char {
    text[pos..].chars().next().unwrap_or('?')
}

/// `"suN"` with `N ≥ 2`; returns `N`.
pub fn parse_algebra(text: &str) -> Result<usize> {
    let rank = text
        .strip_prefix("su")
        .and_then(|r| r.parse::<usize>().ok())
        .ok_or_else(|| Error::Config(format!("algebra must look like su2, su3, ...; got {text:?}")))?;
    if rank < 2 {
        return Err(Error::RankTooSmall(rank));
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letters(text: &str) -> Vec<(usize, i8)> {
        parse_braid_word(text).unwrap().letters().iter().map(|l| (l.index, l.sign)).collect()
    }

    fn offset(text: &str) -> usize {
        match parse_braid_word(text) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn examples() {
        assert_eq!(letters("s1 s2^-1"), vec![(1, 1), (2, -1)]);
        assert_eq!(letters("s2^3"), vec![(2, 1); 3]);
        assert_eq!(letters("  s1\ts3^-2 "), vec![(1, 1), (3, -1), (3, -1)]);
        assert!(letters("").is_empty());
        assert_eq!(letters("s12"), vec![(12, 1)]);
    }

    #[test]
    fn error_offsets() {
        assert_eq!(offset("s0"), 0);
        assert_eq!(offset("s1 s0"), 3);
        assert_eq!(offset("s1^0"), 3);
        assert_eq!(offset("s1^"), 3);
        assert_eq!(offset("s1^-"), 4);
        assert_eq!(offset("s1 x"), 3);
        assert_eq!(offset("s1s2"), 2);
        assert_eq!(offset("s"), 1);
        assert_eq!(offset("s1^+2"), 3);
        assert_eq!(offset("s1 ,"), 3);
        assert_eq!(offset("s99999999999999999999999"), 1);
    }

    #[test]
    fn algebra_names() {
        assert_eq!(parse_algebra("su2").unwrap(), 2);
        assert_eq!(parse_algebra("su3").unwrap(), 3);
        assert!(parse_algebra("su1").is_err());
        assert!(parse_algebra("so3").is_err());
        assert!(parse_algebra("su").is_err());
    }
}
