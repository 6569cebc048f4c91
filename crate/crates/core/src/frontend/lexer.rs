use crate::solver::{DiagKind, Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Identifier followed directly by `'`.
    Primed(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Primed(s) => format!("`{}'`", s),
            Tok::Num(v) => format!("number {}", v),
            Tok::Sym(s) => format!("`{}`", s),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

const SYMBOLS: [&str; 19] = [
    "<=", ">=", "<", ">", "=", "+", "-", "*", "(", ")", "[", "]", "{", "}", ",", ";", "&", "|", "!",
];

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            if chars.get(i) == Some(&'\'') {
                i += 1;
                col += 1;
                out.push((Tok::Primed(word), pos));
            } else {
                out.push((Tok::Ident(word), pos));
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push((Tok::Num(v), pos)),
                _ => {
                    return Err(Diagnostic::new(
                        DiagKind::Syntax,
                        pos,
                        format!("malformed number `{}`", s),
                    ))
                }
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), pos));
            }
            None => {
                return Err(Diagnostic::new(
                    DiagKind::Syntax,
                    pos,
                    format!("unexpected character `{}`", c),
                ))
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
