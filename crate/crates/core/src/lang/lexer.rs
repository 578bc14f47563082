use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Name(String),
    /// Unsigned magnitude; sign is handled by the parser.
    Int(u64),
    Kw(Kw),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Semi,
    Bar,
    TripleBar,
    Chain,
    Walrus,
    Question,
    Bang,
    Eq,
    Ne,
    Lt,
    Le,
    At,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Kw {
    Globals,
    New,
    Dispose,
    Release,
    Acquire,
    Skip,
    Assert,
}

impl Kw {
    fn from_word(w: &str) -> Option<Kw> {
        Some(match w {
            "globals" => Kw::Globals,
            "new" => Kw::New,
            "dispose" => Kw::Dispose,
            "release" => Kw::Release,
            "acquire" => Kw::Acquire,
            "skip" => Kw::Skip,
            "assert" => Kw::Assert,
            _ => return None,
        })
    }
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Kw(k) => format!("keyword `{}`", format!("{k:?}").to_lowercase()),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Bar => "|",
            Tok::TripleBar => "|||",
            Tok::Chain => ">>",
            Tok::Walrus => ":=",
            Tok::Question => "?",
            Tok::Bang => "!",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::At => "@",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            _ => "",
        }
    }
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub span: Span,
    pub message: String,
}

pub(crate) fn lex(src: &str) -> Result<Vec<(Tok, Span)>, LexError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '/' && src[i..].starts_with("//") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = j + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &src[i..end];
            let tok = Kw::from_word(word).map_or_else(|| Tok::Name(word.to_string()), Tok::Kw);
            out.push((tok, Span::new(i, end)));
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    end = j + 1;
                    chars.next();
                } else {
                    break;
                }
            }
            let span = Span::new(i, end);
            let value = src[i..end].parse::<u64>().map_err(|_| LexError {
                span,
                message: "integer literal out of range".to_string(),
            })?;
            out.push((Tok::Int(value), span));
            continue;
        }
        let rest = &src[i..];
        let table: &[(&str, Tok)] = &[
            ("|||", Tok::TripleBar),
            (">>", Tok::Chain),
            (":=", Tok::Walrus),
            ("!=", Tok::Ne),
            ("<=", Tok::Le),
            ("|", Tok::Bar),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("{", Tok::LBrace),
            ("}", Tok::RBrace),
            (":", Tok::Colon),
            (";", Tok::Semi),
            ("?", Tok::Question),
            ("!", Tok::Bang),
            ("=", Tok::Eq),
            ("<", Tok::Lt),
            ("@", Tok::At),
            ("+", Tok::Plus),
            ("-", Tok::Minus),
            ("*", Tok::Star),
            ("/", Tok::Slash),
            ("\u{2212}", Tok::Minus),
            ("\u{00d7}", Tok::Star),
            ("\u{00f7}", Tok::Slash),
            ("\u{2260}", Tok::Ne),
            ("\u{2264}", Tok::Le),
        ];
        match table.iter().find(|(text, _)| rest.starts_with(text)) {
            Some((text, tok)) => {
                let end = i + text.len();
                while chars.peek().is_some_and(|&(j, _)| j < end) {
                    chars.next();
                }
                out.push((tok.clone(), Span::new(i, end)));
            }
            None => {
                return Err(LexError {
                    span: Span::new(i, i + c.len_utf8()),
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, Span::new(src.len(), src.len())));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn operators_are_greedy() {
        assert_eq!(
            toks("||| | >> := != <="),
            vec![
                Tok::TripleBar,
                Tok::Bar,
                Tok::Chain,
                Tok::Walrus,
                Tok::Ne,
                Tok::Le,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_unicode_operators() {
        assert_eq!(
            toks("x \u{00f7} 2 // trailing\n\u{2260}"),
            vec![
                Tok::Name("x".into()),
                Tok::Slash,
                Tok::Int(2),
                Tok::Ne,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn rejects_stray_characters() {
        let err = lex("t:(skip) #").unwrap_err();
        assert_eq!(err.span, Span::new(9, 10));
    }
}
