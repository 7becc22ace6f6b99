//! Tokenizer for the guest scripting language.
//!
//! Indentation-sensitive: emits `Indent`/`Dedent` pairs from leading
//! whitespace (tab = advance to the next multiple of 8), suppresses newlines
//! inside brackets, honors backslash line joins, and records comments on the
//! side so token-level scans can inspect them even when parsing fails.

/// Keywords of the guest language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    False,
    None,
    True,
    And,
    As,
    Assert,
    Async,
    Await,
    Break,
    Class,
    Continue,
    Def,
    Del,
    Elif,
    Else,
    Except,
    Finally,
    For,
    From,
    Global,
    If,
    Import,
    In,
    Is,
    Lambda,
    Nonlocal,
    Not,
    Or,
    Pass,
    Raise,
    Return,
    Try,
    While,
    With,
    Yield,
}

fn keyword(name: &str) -> Option<Kw> {
    Some(match name {
        "False" => Kw::False,
        "None" => Kw::None,
        "True" => Kw::True,
        "and" => Kw::And,
        "as" => Kw::As,
        "assert" => Kw::Assert,
        "async" => Kw::Async,
        "await" => Kw::Await,
        "break" => Kw::Break,
        "class" => Kw::Class,
        "continue" => Kw::Continue,
        "def" => Kw::Def,
        "del" => Kw::Del,
        "elif" => Kw::Elif,
        "else" => Kw::Else,
        "except" => Kw::Except,
        "finally" => Kw::Finally,
        "for" => Kw::For,
        "from" => Kw::From,
        "global" => Kw::Global,
        "if" => Kw::If,
        "import" => Kw::Import,
        "in" => Kw::In,
        "is" => Kw::Is,
        "lambda" => Kw::Lambda,
        "nonlocal" => Kw::Nonlocal,
        "not" => Kw::Not,
        "or" => Kw::Or,
        "pass" => Kw::Pass,
        "raise" => Kw::Raise,
        "return" => Kw::Return,
        "try" => Kw::Try,
        "while" => Kw::While,
        "with" => Kw::With,
        "yield" => Kw::Yield,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Kw(Kw),
    Int(i64),
    BigInt(String),
    Float(f64),
    Str {
        /// Decoded text for plain strings; `None` for f-strings whose value
        /// depends on interpolation.
        value: Option<String>,
        fstring: bool,
        bytes: bool,
    },
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
}

/// A `#` comment; `text` excludes the hash.
#[derive(Debug, Clone)]
pub struct Comment {
    pub line: usize,
    pub text: String,
}

/// First problem found in the source, with a 1-indexed line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub struct LexedSource {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
    pub error: Option<Diagnostic>,
}

const OPS3: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const OPS2: &[&str] = &[
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=", "+=", "-=", "*=", "/=", "%=", "@=",
    "&=", "|=", "^=",
];
const OPS1: &[&str] = &[
    "+", "-", "*", "/", "%", "@", "&", "|", "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",",
    ":", ".", ";", "=",
];

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    at_line_start: bool,
    logical_line_empty: bool,
    indents: Vec<usize>,
    brackets: Vec<(char, usize)>,
    tokens: Vec<Token>,
    comments: Vec<Comment>,
}

/// Tokenize the full source. Always returns the tokens and comments read so
/// far; `error` is set when lexing had to stop early.
pub fn lex(source: &str) -> LexedSource {
    let mut lexer = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        at_line_start: true,
        logical_line_empty: true,
        indents: vec![0],
        brackets: Vec::new(),
        tokens: Vec::new(),
        comments: Vec::new(),
    };
    let error = lexer.run().err();
    LexedSource {
        tokens: lexer.tokens,
        comments: lexer.comments,
        error,
    }
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok) {
        self.logical_line_empty = matches!(tok, Tok::Newline);
        self.tokens.push(Token {
            tok,
            line: self.line,
        });
    }

    fn err(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line: self.line,
            message: message.into(),
        }
    }

    fn run(&mut self) -> Result<(), Diagnostic> {
        loop {
            if self.at_line_start && self.brackets.is_empty() {
                if self.handle_indentation()? {
                    break; // EOF while measuring indentation
                }
                self.at_line_start = false;
            }
            match self.peek() {
                None => break,
                Some(' ') | Some('\t') => {
                    self.bump();
                }
                Some('\r') => {
                    self.bump();
                }
                Some('\n') => {
                    self.bump();
                    if self.brackets.is_empty() {
                        if !self.logical_line_empty {
                            self.tokens.push(Token {
                                tok: Tok::Newline,
                                line: self.line - 1,
                            });
                            self.logical_line_empty = true;
                        }
                        self.at_line_start = true;
                    }
                }
                Some('#') => self.read_comment(),
                Some('\\')
                    if self.peek_at(1) == Some('\n')
                        || (self.peek_at(1) == Some('\r') && self.peek_at(2) == Some('\n')) =>
                {
                    self.bump();
                    if self.peek() == Some('\r') {
                        self.bump();
                    }
                    self.bump();
                }
                Some(c) if c.is_ascii_digit() => self.read_number()?,
                Some('.') if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                    self.read_number()?
                }
                Some(c) if is_ident_start(c) => self.read_name_or_string()?,
                Some('"') | Some('\'') => self.read_string(false, false, false)?,
                Some(_) => self.read_operator()?,
            }
        }
        // Close out the final logical line and any open indentation.
        if !self.logical_line_empty {
            self.push(Tok::Newline);
        }
        if let Some((open, line)) = self.brackets.last() {
            return Err(Diagnostic {
                line: *line,
                message: format!("'{open}' was never closed"),
            });
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent);
        }
        self.push(Tok::Eof);
        Ok(())
    }

    /// Measure leading whitespace of the next line; emit Indent/Dedent.
    /// Returns true at end of input.
    fn handle_indentation(&mut self) -> Result<bool, Diagnostic> {
        loop {
            let mut width = 0usize;
            loop {
                match self.peek() {
                    Some(' ') => {
                        width += 1;
                        self.bump();
                    }
                    Some('\t') => {
                        width = (width / 8 + 1) * 8;
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.peek() {
                None => return Ok(true),
                Some('\n') => {
                    self.bump();
                    continue; // blank line
                }
                Some('\r') if self.peek_at(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                    continue;
                }
                Some('#') => {
                    self.read_comment();
                    continue; // comment-only line
                }
                Some(_) => {
                    let current = *self.indents.last().expect("indent stack never empty");
                    if width > current {
                        self.indents.push(width);
                        self.push(Tok::Indent);
                    } else if width < current {
                        while width < *self.indents.last().expect("indent stack never empty") {
                            self.indents.pop();
                            self.push(Tok::Dedent);
                        }
                        if width != *self.indents.last().expect("indent stack never empty") {
                            return Err(
                                self.err("unindent does not match any outer indentation level")
                            );
                        }
                    }
                    return Ok(false);
                }
            }
        }
    }

    fn read_comment(&mut self) {
        let line = self.line;
        self.bump(); // '#'
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            text.push(c);
            self.bump();
        }
        self.comments.push(Comment { line, text });
    }

    fn read_number(&mut self) -> Result<(), Diagnostic> {
        let mut raw = String::new();
        if self.peek() == Some('0')
            && matches!(
                self.peek_at(1),
                Some('x') | Some('X') | Some('o') | Some('O') | Some('b') | Some('B')
            )
        {
            self.bump();
            let base_char = self.bump().expect("peeked radix marker");
            let radix = match base_char.to_ascii_lowercase() {
                'x' => 16,
                'o' => 8,
                _ => 2,
            };
            while let Some(c) = self.peek() {
                if c == '_' || c.is_ascii_alphanumeric() {
                    raw.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            let digits: String = raw.chars().filter(|c| *c != '_').collect();
            if digits.is_empty() {
                return Err(self.err("invalid numeric literal"));
            }
            match i64::from_str_radix(&digits, radix) {
                Ok(v) => self.push(Tok::Int(v)),
                Err(_) => self.push(Tok::BigInt(digits)),
            }
            return Ok(());
        }

        let mut is_float = false;
        let mut is_imaginary = false;
        while let Some(c) = self.peek() {
            match c {
                '0'..='9' | '_' => {
                    raw.push(c);
                    self.bump();
                }
                '.' if !is_float && self.peek_at(1) != Some('.') => {
                    is_float = true;
                    raw.push(c);
                    self.bump();
                }
                'e' | 'E'
                    if self
                        .peek_at(1)
                        .is_some_and(|n| n.is_ascii_digit() || n == '+' || n == '-') =>
                {
                    is_float = true;
                    raw.push(c);
                    self.bump();
                    let sign = self.peek().expect("exponent continues");
                    if sign == '+' || sign == '-' {
                        raw.push(sign);
                        self.bump();
                    }
                }
                'j' | 'J' => {
                    is_imaginary = true;
                    self.bump();
                    break;
                }
                _ => break,
            }
        }
        let digits: String = raw.chars().filter(|c| *c != '_').collect();
        if is_float || is_imaginary {
            let value: f64 = digits
                .parse()
                .map_err(|_| self.err(format!("invalid numeric literal '{digits}'")))?;
            self.push(Tok::Float(value));
        } else {
            match digits.parse::<i64>() {
                Ok(v) => self.push(Tok::Int(v)),
                Err(_) => self.push(Tok::BigInt(digits)),
            }
        }
        Ok(())
    }

    /// An identifier-start char begins either a name/keyword or a prefixed
    /// string literal (r'', f"", b'', rb'', ...).
    fn read_name_or_string(&mut self) -> Result<(), Diagnostic> {
        let start = self.pos;
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if is_ident_continue(c) {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if name.len() <= 2 && matches!(self.peek(), Some('"') | Some('\'')) {
            let lower = name.to_ascii_lowercase();
            if lower.chars().all(|c| matches!(c, 'r' | 'b' | 'f' | 'u')) {
                let raw = lower.contains('r');
                let fstring = lower.contains('f');
                let bytes = lower.contains('b');
                return self.read_string(raw, fstring, bytes);
            }
            // Not a valid prefix: fall through, treat as a name followed by
            // the string token.
            let _ = start;
        }
        match keyword(&name) {
            Some(kw) => self.push(Tok::Kw(kw)),
            None => self.push(Tok::Name(name)),
        }
        Ok(())
    }

    fn read_string(&mut self, raw: bool, fstring: bool, bytes: bool) -> Result<(), Diagnostic> {
        let quote = self.bump().expect("caller saw a quote");
        let start_line = self.line;
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        let mut value = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(Diagnostic {
                    line: start_line,
                    message: if triple {
                        "unterminated triple-quoted string literal".into()
                    } else {
                        "unterminated string literal".into()
                    },
                });
            };
            if !triple && c == '\n' {
                return Err(Diagnostic {
                    line: start_line,
                    message: "unterminated string literal".into(),
                });
            }
            if c == quote {
                if triple {
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        self.bump();
                        self.bump();
                        self.bump();
                        break;
                    }
                    value.push(c);
                    self.bump();
                } else {
                    self.bump();
                    break;
                }
            } else if c == '\\' && !raw {
                self.bump();
                let Some(esc) = self.bump() else {
                    return Err(Diagnostic {
                        line: start_line,
                        message: "unterminated string literal".into(),
                    });
                };
                match esc {
                    'n' => value.push('\n'),
                    't' => value.push('\t'),
                    'r' => value.push('\r'),
                    '0' => value.push('\0'),
                    '\\' => value.push('\\'),
                    '\'' => value.push('\''),
                    '"' => value.push('"'),
                    '\n' => {} // line continuation inside string
                    'x' => {
                        let mut hex = String::new();
                        for _ in 0..2 {
                            if let Some(h) = self.peek() {
                                if h.is_ascii_hexdigit() {
                                    hex.push(h);
                                    self.bump();
                                }
                            }
                        }
                        if let Ok(code) = u8::from_str_radix(&hex, 16) {
                            value.push(code as char);
                        }
                    }
                    other => {
                        // Unknown escape: keep both chars, like the guest
                        // runtime does.
                        value.push('\\');
                        value.push(other);
                    }
                }
            } else if c == '\\' && raw {
                value.push(c);
                self.bump();
                if let Some(next) = self.peek() {
                    if !triple && next == '\n' {
                        return Err(Diagnostic {
                            line: start_line,
                            message: "unterminated string literal".into(),
                        });
                    }
                    value.push(next);
                    self.bump();
                }
            } else {
                value.push(c);
                self.bump();
            }
        }
        let tok_value = if fstring || bytes { None } else { Some(value) };
        self.tokens.push(Token {
            tok: Tok::Str {
                value: tok_value,
                fstring,
                bytes,
            },
            line: start_line,
        });
        self.logical_line_empty = false;
        Ok(())
    }

    fn read_operator(&mut self) -> Result<(), Diagnostic> {
        let remaining: String = self.chars[self.pos..self.pos + 3.min(self.chars.len() - self.pos)]
            .iter()
            .collect();
        for table in [OPS3, OPS2, OPS1] {
            for op in table {
                if remaining.starts_with(op) {
                    for _ in 0..op.len() {
                        self.bump();
                    }
                    match *op {
                        "(" | "[" | "{" => self
                            .brackets
                            .push((op.chars().next().expect("bracket"), self.line)),
                        ")" | "]" | "}" => {
                            let expected = match *op {
                                ")" => '(',
                                "]" => '[',
                                _ => '{',
                            };
                            match self.brackets.pop() {
                                Some((open, _)) if open == expected => {}
                                Some((open, _)) => {
                                    return Err(self.err(format!(
                                        "closing '{op}' does not match opening '{open}'"
                                    )));
                                }
                                None => {
                                    return Err(self.err(format!("unmatched '{op}'")));
                                }
                            }
                        }
                        _ => {}
                    }
                    self.push(Tok::Op(op));
                    return Ok(());
                }
            }
        }
        let c = self.peek().expect("caller saw a char");
        Err(self.err(format!("invalid character {c:?}")))
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}
