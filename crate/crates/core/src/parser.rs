//! Tokenizer, parser and pretty-printer for the ludemic game-description
//! language.
//!
//! A description is a single S-expression built from parenthesised compounds,
//! brace-delimited lists, bare identifiers, quoted strings, numbers and the
//! booleans `True`/`False`.  `//` starts a comment that runs to end of line.
//!
//! ```text
//! (game "Tic-Tac-Toe"
//!     (players 2)
//!     (equipment {
//!         (board (square 3))
//!         (piece "Disc" P1)
//!         (piece "Cross" P2)
//!     })
//!     (rules
//!         (play (move Add (to (sites Empty))))
//!         (end (if (is Line 3) (result Mover Win)))
//!     )
//! )
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Lexical classes produced by [`tokenize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Ident,
    Str,
    Number,
    Boolean,
}

/// A single token with its source position (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

/// Errors raised while tokenizing or parsing a description.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unterminated string starting at {line}:{col}")]
    UnterminatedString { line: u32, col: u32 },
    #[error("illegal character {ch:?} at {line}:{col}")]
    IllegalCharacter { ch: char, line: u32, col: u32 },
    #[error("unbalanced delimiter at {line}:{col}")]
    UnbalancedDelimiter { line: u32, col: u32 },
    #[error("empty compound at {line}:{col}")]
    EmptyCompound { line: u32, col: u32 },
    #[error("compound head must be an identifier at {line}:{col}")]
    BadCompoundHead { line: u32, col: u32 },
    #[error("unexpected trailing input at {line}:{col}")]
    TrailingTokens { line: u32, col: u32 },
    #[error("input contains no expression")]
    EmptyInput,
    #[error("malformed number {text:?} at {line}:{col}")]
    BadNumber { text: String, line: u32, col: u32 },
}

/// Parse tree for a ludemic description.
///
/// `Compound` carries the head identifier plus the argument nodes,
/// e.g. `(players 2)`.  `List` is a `{ ... }` sequence.  Bare identifiers
/// become `Keyword` nodes; quoted strings, numbers and booleans become the
/// corresponding value nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum LudemeTree {
    Compound { head: String, args: Vec<LudemeTree> },
    List(Vec<LudemeTree>),
    Keyword(String),
    Str(String),
    Number(f64),
    Boolean(bool),
}

impl LudemeTree {
    /// Head identifier if this node is a compound.
    pub fn head(&self) -> Option<&str> {
        match self {
            LudemeTree::Compound { head, .. } => Some(head),
            _ => None,
        }
    }

    /// Arguments if this node is a compound.
    pub fn args(&self) -> &[LudemeTree] {
        match self {
            LudemeTree::Compound { args, .. } => args,
            LudemeTree::List(items) => items,
            _ => &[],
        }
    }

    pub fn as_keyword(&self) -> Option<&str> {
        match self {
            LudemeTree::Keyword(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            LudemeTree::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            LudemeTree::Number(n) => Some(*n),
            _ => None,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Split `text` into tokens, skipping whitespace and `//` comments.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        ($c:expr) => {{
            if $c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }};
    }

    while let Some(&c) = chars.peek() {
        let (tok_line, tok_col) = (line, col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                chars.next();
                bump!(c);
            }
            '/' => {
                chars.next();
                bump!(c);
                if chars.peek() == Some(&'/') {
                    while let Some(&n) = chars.peek() {
                        chars.next();
                        bump!(n);
                        if n == '\n' {
                            break;
                        }
                    }
                } else {
                    return Err(ParseError::IllegalCharacter {
                        ch: '/',
                        line: tok_line,
                        col: tok_col,
                    });
                }
            }
            '(' | ')' | '{' | '}' => {
                chars.next();
                bump!(c);
                let kind = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '{' => TokenKind::LBrace,
                    _ => TokenKind::RBrace,
                };
                tokens.push(Token {
                    kind,
                    text: c.to_string(),
                    line: tok_line,
                    col: tok_col,
                });
            }
            '"' => {
                chars.next();
                bump!(c);
                let mut s = String::new();
                let mut closed = false;
                while let Some(&n) = chars.peek() {
                    chars.next();
                    bump!(n);
                    if n == '"' {
                        closed = true;
                        break;
                    }
                    if n == '\n' {
                        break;
                    }
                    s.push(n);
                }
                if !closed {
                    return Err(ParseError::UnterminatedString {
                        line: tok_line,
                        col: tok_col,
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Str,
                    text: s,
                    line: tok_line,
                    col: tok_col,
                });
            }
            _ if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_digit()
                        || n == '-'
                        || n == '+'
                        || n == '.'
                        || n == 'e'
                        || n == 'E'
                    {
                        s.push(n);
                        chars.next();
                        bump!(n);
                    } else {
                        break;
                    }
                }
                if s.parse::<f64>().is_err() {
                    return Err(ParseError::BadNumber {
                        text: s,
                        line: tok_line,
                        col: tok_col,
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Number,
                    text: s,
                    line: tok_line,
                    col: tok_col,
                });
            }
            _ if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&n) = chars.peek() {
                    if is_ident_continue(n) {
                        s.push(n);
                        chars.next();
                        bump!(n);
                    } else {
                        break;
                    }
                }
                let kind = if s == "True" || s == "False" {
                    TokenKind::Boolean
                } else {
                    TokenKind::Ident
                };
                tokens.push(Token {
                    kind,
                    text: s,
                    line: tok_line,
                    col: tok_col,
                });
            }
            _ => {
                return Err(ParseError::IllegalCharacter {
                    ch: c,
                    line: tok_line,
                    col: tok_col,
                });
            }
        }
    }
    Ok(tokens)
}

struct TokenCursor<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> TokenCursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn last_pos(&self) -> (u32, u32) {
        self.tokens
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }
}

fn parse_node(cur: &mut TokenCursor) -> Result<LudemeTree, ParseError> {
    let tok = match cur.next() {
        Some(t) => t,
        None => {
            let (line, col) = cur.last_pos();
            return Err(ParseError::UnbalancedDelimiter { line, col });
        }
    };
    match tok.kind {
        TokenKind::LParen => {
            let head_tok = match cur.peek() {
                Some(t) => t,
                None => {
                    return Err(ParseError::UnbalancedDelimiter {
                        line: tok.line,
                        col: tok.col,
                    })
                }
            };
            if head_tok.kind == TokenKind::RParen {
                return Err(ParseError::EmptyCompound {
                    line: tok.line,
                    col: tok.col,
                });
            }
            if head_tok.kind != TokenKind::Ident {
                return Err(ParseError::BadCompoundHead {
                    line: head_tok.line,
                    col: head_tok.col,
                });
            }
            let head = head_tok.text.clone();
            cur.next();
            let mut args = Vec::new();
            loop {
                match cur.peek() {
                    Some(t) if t.kind == TokenKind::RParen => {
                        cur.next();
                        return Ok(LudemeTree::Compound { head, args });
                    }
                    Some(_) => args.push(parse_node(cur)?),
                    None => {
                        return Err(ParseError::UnbalancedDelimiter {
                            line: tok.line,
                            col: tok.col,
                        })
                    }
                }
            }
        }
        TokenKind::LBrace => {
            let mut items = Vec::new();
            loop {
                match cur.peek() {
                    Some(t) if t.kind == TokenKind::RBrace => {
                        cur.next();
                        return Ok(LudemeTree::List(items));
                    }
                    Some(_) => items.push(parse_node(cur)?),
                    None => {
                        return Err(ParseError::UnbalancedDelimiter {
                            line: tok.line,
                            col: tok.col,
                        })
                    }
                }
            }
        }
        TokenKind::RParen | TokenKind::RBrace => Err(ParseError::UnbalancedDelimiter {
            line: tok.line,
            col: tok.col,
        }),
        TokenKind::Ident => Ok(LudemeTree::Keyword(tok.text.clone())),
        TokenKind::Str => Ok(LudemeTree::Str(tok.text.clone())),
        TokenKind::Boolean => Ok(LudemeTree::Boolean(tok.text == "True")),
        TokenKind::Number => {
            let n = tok.text.parse::<f64>().map_err(|_| ParseError::BadNumber {
                text: tok.text.clone(),
                line: tok.line,
                col: tok.col,
            })?;
            Ok(LudemeTree::Number(n))
        }
    }
}

/// Parse a token stream into a single tree.
pub fn parse_tokens(tokens: &[Token]) -> Result<LudemeTree, ParseError> {
    let mut cur = TokenCursor { tokens, pos: 0 };
    if cur.peek().is_none() {
        return Err(ParseError::EmptyInput);
    }
    let node = parse_node(&mut cur)?;
    if let Some(t) = cur.peek() {
        return Err(ParseError::TrailingTokens {
            line: t.line,
            col: t.col,
        });
    }
    Ok(node)
}

/// Tokenize and parse `text` into a single description tree.
pub fn parse(text: &str) -> Result<LudemeTree, ParseError> {
    let tokens = tokenize(text)?;
    parse_tokens(&tokens)
}

/// Collect the ludeme set of a tree: every compound head plus every bare
/// keyword, lower-cased.  Strings, numbers and booleans are not ludemes.
pub fn extract_ludemes(tree: &LudemeTree) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_ludemes(tree, &mut out);
    out
}

fn collect_ludemes(node: &LudemeTree, out: &mut BTreeSet<String>) {
    match node {
        LudemeTree::Compound { head, args } => {
            out.insert(head.to_ascii_lowercase());
            for a in args {
                collect_ludemes(a, out);
            }
        }
        LudemeTree::List(items) => {
            for i in items {
                collect_ludemes(i, out);
            }
        }
        LudemeTree::Keyword(k) => {
            out.insert(k.to_ascii_lowercase());
        }
        LudemeTree::Str(_) | LudemeTree::Number(_) | LudemeTree::Boolean(_) => {}
    }
}

const INDENT: &str = "    ";
const LINE_BUDGET: usize = 72;

fn render_number(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 9e15 {
        format!("{}", n as i64)
    } else {
        // f64 Display uses the shortest representation that round-trips.
        format!("{n}")
    }
}

fn render_inline(node: &LudemeTree, out: &mut String) {
    match node {
        LudemeTree::Compound { head, args } => {
            out.push('(');
            out.push_str(head);
            for a in args {
                out.push(' ');
                render_inline(a, out);
            }
            out.push(')');
        }
        LudemeTree::List(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                render_inline(item, out);
            }
            out.push('}');
        }
        LudemeTree::Keyword(k) => out.push_str(k),
        LudemeTree::Str(s) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        LudemeTree::Number(n) => out.push_str(&render_number(*n)),
        LudemeTree::Boolean(b) => out.push_str(if *b { "True" } else { "False" }),
    }
}

fn inline_width(node: &LudemeTree) -> usize {
    let mut s = String::new();
    render_inline(node, &mut s);
    s.len()
}

fn is_value(node: &LudemeTree) -> bool {
    matches!(
        node,
        LudemeTree::Keyword(_)
            | LudemeTree::Str(_)
            | LudemeTree::Number(_)
            | LudemeTree::Boolean(_)
    )
}

fn render_block(node: &LudemeTree, depth: usize, out: &mut String) {
    let pad = INDENT.repeat(depth);
    if depth * INDENT.len() + inline_width(node) <= LINE_BUDGET {
        render_inline(node, out);
        return;
    }
    match node {
        LudemeTree::Compound { head, args } => {
            out.push('(');
            out.push_str(head);
            let mut rest = &args[..];
            // Leading simple values stay on the head line: (game "Name" ...
            while let Some(first) = rest.first() {
                if is_value(first) {
                    out.push(' ');
                    render_inline(first, out);
                    rest = &rest[1..];
                } else {
                    break;
                }
            }
            // A single trailing list hugs the head: (equipment { ... }).
            if rest.len() == 1 {
                if let LudemeTree::List(items) = &rest[0] {
                    out.push_str(" {\n");
                    for item in items {
                        out.push_str(&pad);
                        out.push_str(INDENT);
                        render_block(item, depth + 1, out);
                        out.push('\n');
                    }
                    out.push_str(&pad);
                    out.push_str("})");
                    return;
                }
            }
            for arg in rest {
                out.push('\n');
                out.push_str(&pad);
                out.push_str(INDENT);
                render_block(arg, depth + 1, out);
            }
            out.push('\n');
            out.push_str(&pad);
            out.push(')');
        }
        LudemeTree::List(items) => {
            out.push_str("{\n");
            for item in items {
                out.push_str(&pad);
                out.push_str(INDENT);
                render_block(item, depth + 1, out);
                out.push('\n');
            }
            out.push_str(&pad);
            out.push('}');
        }
        _ => render_inline(node, out),
    }
}

/// Render a tree back to canonical description text.
///
/// The output is a pure function of the tree and parses back to an equal
/// tree: `parse(&pretty_print(t)) == Ok(t)`.
pub fn pretty_print(tree: &LudemeTree) -> String {
    let mut out = String::new();
    render_block(tree, 0, &mut out);
    out.push('\n');
    out
}

impl fmt::Display for LudemeTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        render_inline(self, &mut s);
        f.write_str(&s)
    }
}
