//! Lenient parsing of `{'column': true}`-style replies.

use super::prompt::python_str_repr;
use super::{LlmError, LlmVerdict};

/// Canonical single-key answer, e.g. `{'ID': true}`.
pub fn render_verdict(column: &str, personal: bool) -> String {
    format!("{{{}: {}}}", python_str_repr(column), personal)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> Option<()> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Some(())
        } else {
            None
        }
    }

    fn quoted(&mut self) -> Option<String> {
        self.skip_ws();
        let quote = self.s[self.pos..].chars().next().filter(|c| *c == '\'' || *c == '"')?;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.s[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    let (_, esc) = chars.next()?;
                    out.push(match esc {
                        'n' => '\n',
                        'r' => '\r',
                        't' => '\t',
                        'x' => {
                            let hi = chars.next()?.1.to_digit(16)?;
                            let lo = chars.next()?.1.to_digit(16)?;
                            char::from_u32(hi * 16 + lo)?
                        }
                        other => other,
                    });
                }
                c if c == quote => {
                    self.pos += i + 1;
                    return Some(out);
                }
                c => out.push(c),
            }
        }
        None
    }

    fn boolean(&mut self) -> Option<bool> {
        self.skip_ws();
        for (word, value) in [
            ("true", true),
            ("True", true),
            ("TRUE", true),
            ("false", false),
            ("False", false),
            ("FALSE", false),
        ] {
            if self.s[self.pos..].starts_with(word) {
                self.pos += word.len();
                return Some(value);
            }
        }
        None
    }
}

/// Tries to read `{ <quoted key> : <bool> }` starting at a `{`.
fn dict_at(s: &str, start: usize) -> Option<(String, bool, usize)> {
    let mut c = Cursor { s, pos: start };
    c.eat('{')?;
    let key = c.quoted()?;
    c.eat(':')?;
    let value = c.boolean()?;
    c.eat('}')?;
    Some((key, value, c.pos))
}

/// Extracts the single `{key: bool}` dictionary from a model reply. Code
/// fences and surrounding prose are ignored; anything other than exactly one
/// such dictionary is unparseable.
pub fn parse_verdict(reply: &str, expected_column: &str) -> Result<LlmVerdict, LlmError> {
    let unparseable = || LlmError::UnparseableReply(reply.to_string());
    let mut found = Vec::new();
    let mut i = 0;
    while let Some(off) = reply[i..].find('{') {
        let start = i + off;
        match dict_at(reply, start) {
            Some((key, value, end)) => {
                found.push((key, value));
                i = end;
            }
            None => i = start + 1,
        }
    }
    let [(key, value)] = &found[..] else {
        return Err(unparseable());
    };
    if key != expected_column {
        return Err(LlmError::ColumnMismatch {
            got: key.clone(),
            expected: expected_column.to_string(),
        });
    }
    Ok(LlmVerdict {
        column_name: expected_column.to_string(),
        is_personal: *value,
        raw_reply: reply.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_quoted_true() {
        let v = parse_verdict("{'ID': true}", "ID").unwrap();
        assert!(v.is_personal);
        assert_eq!(v.column_name, "ID");
        assert_eq!(v.raw_reply, "{'ID': true}");
    }

    #[test]
    fn double_quoted_python_false() {
        assert!(!parse_verdict("{\"ID\": False}", "ID").unwrap().is_personal);
    }

    #[test]
    fn key_must_match() {
        match parse_verdict("{'Age': true}", "ID") {
            Err(LlmError::ColumnMismatch { got, expected }) => {
                assert_eq!((got.as_str(), expected.as_str()), ("Age", "ID"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fences_and_prose_are_stripped() {
        let reply = "Sure! Here is the result:\n```json\n{\"Age\": TRUE}\n```\nHope this helps.";
        assert!(parse_verdict(reply, "Age").unwrap().is_personal);
        assert!(!parse_verdict("{ 'Age' :false }", "Age").unwrap().is_personal);
    }

    #[test]
    fn garbage_is_unparseable() {
        for reply in [
            "",
            "I think so",
            "{'ID': maybe}",
            "{'ID': true, 'Age': false}",
            "{'ID': true} {'ID': false}",
            "{ID: true}",
            "{'ID': true",
        ] {
            assert!(
                matches!(parse_verdict(reply, "ID"), Err(LlmError::UnparseableReply(_))),
                "{reply:?}"
            );
        }
    }

    #[test]
    fn renders_canonically() {
        assert_eq!(render_verdict("ID", true), "{'ID': true}");
        assert_eq!(render_verdict("it's", false), "{\"it's\": false}");
    }

    proptest! {
        #[test]
        fn render_then_parse_roundtrips(name in "\\PC{0,12}[\\x00-\\x1f]?\\PC{1,12}", personal in any::<bool>()) {
            let v = parse_verdict(&render_verdict(&name, personal), &name).unwrap();
            prop_assert_eq!(v.column_name, name);
            prop_assert_eq!(v.is_personal, personal);
        }
    }
}
