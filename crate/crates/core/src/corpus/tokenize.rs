use alloc::string::String;
use alloc::vec::Vec;
use core::iter::Peekable;
use core::str::Chars;

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Lowercased tokens of `text`: maximal alphabetic runs, which may contain an apostrophe
/// or hyphen only between two letters. Everything else separates tokens.
///
/// ```
/// use semdrift_core::corpus::tokenize;
/// assert_eq!(tokenize("L'operazione ha permesso"), ["l'operazione", "ha", "permesso"]);
/// ```
pub fn tokenize(text: &str) -> Vec<String> {
    Tokens::new(text).collect()
}

/// Streaming form of [`tokenize`].
pub struct Tokens<'a> {
    chars: Peekable<Chars<'a>>,
}

impl<'a> Tokens<'a> {
    pub fn new(text: &'a str) -> Self {
        Tokens {
            chars: text.chars().peekable(),
        }
    }
}

impl Iterator for Tokens<'_> {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let mut token = String::new();
        while let Some(c) = self.chars.next() {
            if c.is_alphabetic() {
                // Some lowercase mappings emit combining marks; keep letters only so a
                // second pass over the output sees the same token.
                token.extend(c.to_lowercase().filter(|l| l.is_alphabetic()));
            } else if is_joiner(c)
                && !token.is_empty()
                && self.chars.peek().is_some_and(|n| n.is_alphabetic())
            {
                token.push(if c == '-' { '-' } else { '\'' });
            } else if !token.is_empty() {
                return Some(token);
            }
        }
        (!token.is_empty()).then_some(token)
    }
}
