use super::{ParseError, ParseErrorKind, SourceLocation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Semi,
    Slash,
    Eq,
    If,
    Plus,
    Minus,
    Hash,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::If => "`:-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Hash => "`#`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: start_line, col: start_col });
        match c {
            '\n' => {
                chars.next();
                push(Tok::Newline);
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '%' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                col += s.chars().count();
                push(Tok::Ident(s));
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                    s.push(c);
                    chars.next();
                }
                col += s.len();
                let n = s.parse().map_err(|_| lexical(start_line, start_col, c))?;
                push(Tok::Int(n));
                continue;
            }
            ':' => {
                chars.next();
                if chars.peek() != Some(&'-') {
                    return Err(lexical(start_line, start_col, ':'));
                }
                chars.next();
                col += 2;
                push(Tok::If);
                continue;
            }
            _ => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ';' => Tok::Semi,
                    '/' => Tok::Slash,
                    '=' => Tok::Eq,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '#' => Tok::Hash,
                    other => return Err(lexical(start_line, start_col, other)),
                };
                chars.next();
                push(tok);
            }
        }
        col += 1;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

fn lexical(line: usize, col: usize, c: char) -> ParseError {
    ParseError { loc: SourceLocation::new(line, col), kind: ParseErrorKind::Lexical(c) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hyphenated_names_and_rules() {
        assert_eq!(
            toks("happy(X):-WANTS-TO-MARRY(Y,X)."),
            vec![
                Tok::Ident("happy".into()),
                Tok::LParen,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::If,
                Tok::Ident("WANTS-TO-MARRY".into()),
                Tok::LParen,
                Tok::Ident("Y".into()),
                Tok::Comma,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::Dot,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn bias_keys() {
        assert_eq!(toks("datalog+ = a/1")[..2], [Tok::Ident("datalog".into()), Tok::Plus]);
        assert_eq!(toks("datalog- = a/1")[0], Tok::Ident("datalog-".into()));
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("% header\n  foo.").unwrap();
        assert_eq!(t[0].tok, Tok::Newline);
        assert_eq!((t[1].line, t[1].col), (2, 3));
        let err = tokenize("a ? b").unwrap_err();
        assert_eq!((err.loc.line, err.loc.col), (1, 3));
    }
}
