//! Identifier sub-token splitting.
//!
//! Method names are compared as sequences of lowercase sub-tokens, split on
//! CamelCase and snake_case boundaries. The exact rules, in order:
//!
//! * `_`, `$`, and any other non-alphanumeric character separate tokens and
//!   are dropped;
//! * a boundary sits before an uppercase letter that follows a
//!   non-uppercase character (`getApple` → `get`, `Apple`);
//! * a boundary sits before the last capital of an uppercase run that is
//!   followed by a lowercase letter (`parseHTTPResponse` → `parse`, `HTTP`,
//!   `Response`);
//! * with digit splitting enabled (the default), a boundary sits at every
//!   letter↔digit transition (`md5Hash` → `md`, `5`, `Hash`);
//! * all tokens are lowercased, empty fragments are dropped.

/// Options for [`split_subtokens_with`].
#[derive(Debug, Clone, Copy)]
pub struct SplitOptions {
    /// Split at letter↔digit transitions so digit runs form their own
    /// sub-tokens.
    pub split_digits: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { split_digits: true }
    }
}

/// Splits an identifier into lowercase sub-tokens with default options.
pub fn split_subtokens(identifier: &str) -> Vec<String> {
    split_subtokens_with(identifier, SplitOptions::default())
}

pub fn split_subtokens_with(identifier: &str, options: SplitOptions) -> Vec<String> {
    let chars: Vec<char> = identifier.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();

    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            flush(&mut tokens, &mut current);
            continue;
        }
        if i > 0 && is_boundary(&chars, i, options) {
            flush(&mut tokens, &mut current);
        }
        current.extend(c.to_lowercase());
    }
    flush(&mut tokens, &mut current);
    tokens
}

fn flush(tokens: &mut Vec<String>, current: &mut String) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

fn is_boundary(chars: &[char], i: usize, options: SplitOptions) -> bool {
    let prev = chars[i - 1];
    let cur = chars[i];
    if !prev.is_alphanumeric() {
        return false; // a separator already flushed the token
    }
    // getApple, value→X, and (with digits kept together) md5→Hash.
    if cur.is_uppercase() && !prev.is_uppercase() {
        return true;
    }
    // Last capital of an uppercase run: HTTP|Response.
    if prev.is_uppercase() && cur.is_lowercase() && i >= 2 && chars[i - 2].is_uppercase() {
        return true;
    }
    if options.split_digits {
        let prev_digit = prev.is_numeric();
        let cur_digit = cur.is_numeric();
        if prev_digit != cur_digit {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_camel_case() {
        assert_eq!(split_subtokens("getApple"), ["get", "apple"]);
    }

    #[test]
    fn splits_snake_case() {
        assert_eq!(split_subtokens("snake_case_name"), ["snake", "case", "name"]);
    }

    #[test]
    fn single_letter() {
        assert_eq!(split_subtokens("x"), ["x"]);
    }

    // Hand-computed oracle covering the acronym and digit rules.
    #[test]
    fn hand_oracle() {
        let cases: &[(&str, &[&str])] = &[
            ("getApple", &["get", "apple"]),
            ("parseHTTPResponse", &["parse", "http", "response"]),
            ("snake_case_name", &["snake", "case", "name"]),
            ("x", &["x"]),
            ("HTTPServer", &["http", "server"]),
            ("XMLHttpRequest", &["xml", "http", "request"]),
            ("md5Hash", &["md", "5", "hash"]),
            ("value2", &["value", "2"]),
            ("__init__", &["init"]),
            ("ALL_CAPS", &["all", "caps"]),
            ("IOError", &["io", "error"]),
            ("toUTF8", &["to", "utf", "8"]),
            ("a1b2", &["a", "1", "b", "2"]),
            ("HTML", &["html"]),
            ("getX", &["get", "x"]),
            ("Point3D", &["point", "3", "d"]),
            ("USERName", &["user", "name"]),
            ("foo_Bar", &["foo", "bar"]),
            ("camelCase", &["camel", "case"]),
            ("base64Decode", &["base", "64", "decode"]),
        ];
        for (input, expected) in cases {
            assert_eq!(&split_subtokens(input), expected, "input {input:?}");
        }
    }

    #[test]
    fn digit_splitting_can_be_disabled() {
        let opts = SplitOptions {
            split_digits: false,
        };
        assert_eq!(split_subtokens_with("md5Hash", opts), ["md5", "hash"]);
        assert_eq!(split_subtokens_with("base64", opts), ["base64"]);
    }

    #[test]
    fn concatenation_matches_lowercased_identifier() {
        // Joined tokens must equal the identifier lowercased with separators
        // removed.
        for id in ["getApple", "parseHTTPResponse", "a_b$c", "Point3D", "x9y"] {
            let joined = split_subtokens(id).concat();
            let expected: String = id
                .chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect();
            assert_eq!(joined, expected, "identifier {id:?}");
        }
    }
}
