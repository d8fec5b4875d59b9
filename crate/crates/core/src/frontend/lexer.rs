use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Let,
    Rec,
    In,
    If,
    Then,
    Else,
    Lam,
    Assume,
    Weight,
    Observe,
    True,
    False,
    Ident(String, Option<u32>),
    Int(i64),
    Real(f64),
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Lt,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '%'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '=' => Some(Tok::Eq),
            '<' => Some(Tok::Lt),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '\\' | 'λ' => Some(Tok::Lam),
            _ => None,
        };
        if let Some(tok) = single {
            bump!();
            out.push(Token { tok, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let mut real = false;
            // `2.` is a real literal, but `x. 2` style lambda dots never
            // follow a digit, so a dot here always belongs to the number
            if i < chars.len() && chars[i] == '.' {
                real = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col);
                bump!();
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    real = true;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                } else {
                    (i, line, col) = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Real(
                    text.parse()
                        .map_err(|_| ParseError::new(pos.line, pos.col, format!("bad real literal `{text}`")))?,
                )
            } else {
                Tok::Int(text.parse().map_err(|_| {
                    ParseError::new(pos.line, pos.col, format!("integer literal `{text}` out of range"))
                })?)
            };
            out.push(Token { tok, pos });
            continue;
        }
        if ident_start(c) {
            let start = i;
            bump!();
            while i < chars.len() && ident_continue(chars[i]) {
                bump!();
            }
            let name: String = chars[start..i].iter().collect();
            let mut id = None;
            if i < chars.len() && chars[i] == '#' {
                bump!();
                let ds = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let digits: String = chars[ds..i].iter().collect();
                id = Some(digits.parse().map_err(|_| {
                    ParseError::new(pos.line, pos.col, format!("malformed identifier suffix on `{name}`"))
                })?);
            }
            let tok = match (name.as_str(), id) {
                ("let", None) => Tok::Let,
                ("rec", None) => Tok::Rec,
                ("in", None) => Tok::In,
                ("if", None) => Tok::If,
                ("then", None) => Tok::Then,
                ("else", None) => Tok::Else,
                ("lam", None) => Tok::Lam,
                ("assume", None) => Tok::Assume,
                ("weight", None) => Tok::Weight,
                ("observe", None) => Tok::Observe,
                ("true", None) => Tok::True,
                ("false", None) => Tok::False,
                _ => Tok::Ident(name, id),
            };
            out.push(Token { tok, pos });
            continue;
        }
        return Err(ParseError::new(line, col, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_dots() {
        assert_eq!(
            toks("lam x. 2. 3 1.5e2"),
            vec![
                Tok::Lam,
                Tok::Ident("x".into(), None),
                Tok::Dot,
                Tok::Real(2.0),
                Tok::Int(3),
                Tok::Real(150.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_suffixed_identifiers() {
        assert_eq!(
            toks("-- a comment\n%t3#12 x' -"),
            vec![
                Tok::Ident("%t3".into(), Some(12)),
                Tok::Ident("x'".into(), None),
                Tok::Minus,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn reports_position_of_bad_character() {
        let err = tokenize("let x =\n  $").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }
}
