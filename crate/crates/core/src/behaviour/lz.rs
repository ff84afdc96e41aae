//! Lempel-Ziv 1976 complexity: the phrase count of the exhaustive-history
//! parsing (not LZ78/LZW). Each phrase is the longest prefix of the
//! remainder reproducible from anywhere earlier in the string (overlap
//! allowed) plus one innovation symbol; the final phrase may be purely
//! reproducible.

use crate::error::{Error, Result};

/// Phrase count of the LZ76 exhaustive-history parsing, via the classic
/// two-pointer scan.
pub fn lz76_complexity<T: PartialEq>(s: &[T]) -> Result<usize> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptyInput("LZ76 of an empty sequence"));
    }
    let mut c = 1usize; // the first symbol is always a phrase
    let mut phrase_start = 1usize;
    let mut probe = 0usize;
    let mut k = 1usize;
    let mut k_max = 1usize;
    if phrase_start + 1 > n {
        return Ok(c);
    }
    loop {
        if s[probe + k - 1] == s[phrase_start + k - 1] {
            k += 1;
            if phrase_start + k > n {
                // Reproduction ran to the end: final phrase, no innovation.
                c += 1;
                break;
            }
        } else {
            if k > k_max {
                k_max = k;
            }
            probe += 1;
            if probe == phrase_start {
                // Every earlier start tried: phrase = longest match + 1.
                c += 1;
                phrase_start += k_max;
                if phrase_start + 1 > n {
                    break;
                }
                probe = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    Ok(c)
}
