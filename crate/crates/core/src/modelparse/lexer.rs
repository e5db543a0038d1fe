//! Tokenizer for model, library and constraint files. Unicode operator
//! glyphs are folded into the same tokens as their ASCII spellings.

use super::error::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    DotDot,
    At,
    Prime,
    Bar,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    And,
    Or,
    Not,
    Implies,
    In,
    NotIn,
    True,
    False,
    Exists,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    pub fn spelling(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::At => "@",
            Tok::Prime => "'",
            Tok::Bar => "|",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::Implies => "=>",
            Tok::In => "in",
            Tok::NotIn => "not in",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Exists => "exists",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

fn is_ident_start(c: char) -> bool {
    c == '_' || (c.is_alphabetic() && !is_glyph(c))
}

fn is_ident_char(c: char) -> bool {
    c == '_' || c.is_ascii_digit() || (c.is_alphanumeric() && !is_glyph(c))
}

fn is_glyph(c: char) -> bool {
    matches!(c, '∧' | '∨' | '¬' | '⇒' | '→' | '≠' | '≤' | '≥' | '∈' | '∉' | '⊤' | '⊥' | '∃' | '′' | '−')
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "in" => Tok::In,
        "true" => Tok::True,
        "false" => Tok::False,
        "exists" => Tok::Exists,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let peek = chars.get(i + 1).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && peek == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (i, line, col);
        let (tok, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            (keyword(&word).unwrap_or(Tok::Ident(word)), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let value = text.parse::<i64>().map_err(|_| ParseError {
                kind: ParseErrorKind::Lexical,
                line,
                column: col,
                message: "integer literal out of range".into(),
                token: text.clone(),
            })?;
            (Tok::Int(value), j - i)
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match two.as_str() {
                ".." => (Tok::DotDot, 2),
                "!=" => (Tok::Ne, 2),
                "<=" => (Tok::Le, 2),
                ">=" => (Tok::Ge, 2),
                "=>" => (Tok::Implies, 2),
                "->" => (Tok::Implies, 2),
                "/\\" => (Tok::And, 2),
                "\\/" => (Tok::Or, 2),
                "&&" => (Tok::And, 2),
                "||" => (Tok::Or, 2),
                _ => {
                    let t = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        ';' => Tok::Semi,
                        ':' => Tok::Colon,
                        '.' => Tok::Dot,
                        '@' => Tok::At,
                        '\'' | '′' => Tok::Prime,
                        '|' => Tok::Bar,
                        '=' => Tok::Eq,
                        '<' => Tok::Lt,
                        '>' => Tok::Gt,
                        '+' => Tok::Plus,
                        '-' | '−' => Tok::Minus,
                        '!' | '¬' => Tok::Not,
                        '∧' => Tok::And,
                        '∨' => Tok::Or,
                        '⇒' | '→' => Tok::Implies,
                        '≠' => Tok::Ne,
                        '≤' => Tok::Le,
                        '≥' => Tok::Ge,
                        '∈' => Tok::In,
                        '∉' => Tok::NotIn,
                        '⊤' => Tok::True,
                        '⊥' => Tok::False,
                        '∃' => Tok::Exists,
                        _ => {
                            return Err(ParseError {
                                kind: ParseErrorKind::Lexical,
                                line,
                                column: col,
                                message: format!("unexpected character `{c}`"),
                                token: c.to_string(),
                            })
                        }
                    };
                    (t, 1)
                }
            }
        };
        i += len;
        col += len;
        out.push(Token {
            tok,
            text: chars[start.0..i].iter().collect(),
            line: start.1,
            column: start.2,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        text: String::new(),
        line,
        column: col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn unicode_and_ascii_fold() {
        assert_eq!(toks("a′ ≠ b ∧ c"), toks("a' != b and c"));
        assert_eq!(toks("x /\\ y \\/ z"), toks("x && y || z"));
        assert_eq!(toks("x − 1"), toks("x - 1"));
    }

    #[test]
    fn comments_and_ranges() {
        assert_eq!(
            toks("int[-3..3] -- trailing"),
            vec![
                Tok::Ident("int".into()),
                Tok::LBracket,
                Tok::Minus,
                Tok::Int(3),
                Tok::DotDot,
                Tok::Int(3),
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn greek_identifiers() {
        assert_eq!(toks("Φ"), vec![Tok::Ident("Φ".into()), Tok::Eof]);
    }

    #[test]
    fn bad_character_is_located() {
        let err = tokenize("a\n  $").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert_eq!(err.kind, ParseErrorKind::Lexical);
    }
}
