//! Recursive-descent parser for the rule language, with line/column
//! diagnostics.

use thiserror::Error;

use crate::kb::{Literal, Name, DBB};

use super::{BuiltinRegistry, Rule, RuleAtom, Term};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{line}:{col}: unexpected character `{ch}`")]
    UnexpectedChar { line: usize, col: usize, ch: char },
    #[error("{line}:{col}: unterminated string literal")]
    UnterminatedString { line: usize, col: usize },
    #[error("{line}:{col}: expected {expected}, found `{found}`")]
    Unexpected {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: rule `{label}` has no body atoms")]
    EmptyBody { line: usize, col: usize, label: String },
    #[error("{line}:{col}: rule `{label}` has no head atoms")]
    EmptyHead { line: usize, col: usize, label: String },
    #[error("{line}:{col}: head variable ?{var} of rule `{label}` does not appear in the body")]
    UnsafeHeadVariable {
        line: usize,
        col: usize,
        label: String,
        var: String,
    },
    #[error("{line}:{col}: built-ins are not allowed in rule heads ({name})")]
    BuiltinInHead { line: usize, col: usize, name: Name },
    #[error("{line}:{col}: unknown built-in {name}; registered built-ins: {known}")]
    UnknownBuiltin {
        line: usize,
        col: usize,
        name: Name,
        known: String,
    },
    #[error("{line}:{col}: built-in {name} expects {expected} arguments, got {got}")]
    BuiltinArity {
        line: usize,
        col: usize,
        name: Name,
        expected: usize,
        got: usize,
    },
    #[error("{line}:{col}: atom {name}/{arity} must have 1 (class) or 2 (property) arguments")]
    AtomArity {
        line: usize,
        col: usize,
        name: Name,
        arity: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ident(String),
    Variable(String),
    Number(f64),
    Str(String),
    Caret,
    Arrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    /// `.` or one-or-more blank lines between rules.
    Separator,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: usize,
    col: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Variable(v) => format!("?{v}"),
            TokenKind::Number(n) => format!("{n}"),
            TokenKind::Str(s) => format!("\"{s}\""),
            TokenKind::Caret => "^".into(),
            TokenKind::Arrow => "->".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
            TokenKind::LBracket => "[".into(),
            TokenKind::RBracket => "]".into(),
            TokenKind::Comma => ",".into(),
            TokenKind::Colon => ":".into(),
            TokenKind::Separator => "<rule separator>".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    // Count of newlines seen since the last substantive token; two or
    // more (one fully blank line) act as a rule separator.
    let mut pending_newlines = 0usize;

    macro_rules! flush_separator {
        () => {
            if pending_newlines >= 2 && !tokens.is_empty() {
                if !matches!(
                    tokens.last().map(|t: &Token| &t.kind),
                    Some(TokenKind::Separator)
                ) {
                    tokens.push(Token {
                        kind: TokenKind::Separator,
                        line,
                        col,
                    });
                }
            }
            pending_newlines = 0;
        };
    }

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
                pending_newlines += 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                // line comment
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            _ => {
                flush_separator!();
                let tok_line = line;
                let tok_col = col;
                let kind = match c {
                    '^' => {
                        chars.next();
                        col += 1;
                        TokenKind::Caret
                    }
                    '(' => {
                        chars.next();
                        col += 1;
                        TokenKind::LParen
                    }
                    ')' => {
                        chars.next();
                        col += 1;
                        TokenKind::RParen
                    }
                    '[' => {
                        chars.next();
                        col += 1;
                        TokenKind::LBracket
                    }
                    ']' => {
                        chars.next();
                        col += 1;
                        TokenKind::RBracket
                    }
                    ',' => {
                        chars.next();
                        col += 1;
                        TokenKind::Comma
                    }
                    ':' => {
                        chars.next();
                        col += 1;
                        TokenKind::Colon
                    }
                    '.' => {
                        chars.next();
                        col += 1;
                        TokenKind::Separator
                    }
                    '-' => {
                        chars.next();
                        col += 1;
                        match chars.peek() {
                            Some('>') => {
                                chars.next();
                                col += 1;
                                TokenKind::Arrow
                            }
                            Some(d) if d.is_ascii_digit() => {
                                let (n, used) = lex_number(&mut chars, tok_line, tok_col)?;
                                col += used;
                                TokenKind::Number(-n)
                            }
                            _ => {
                                return Err(ParseError::UnexpectedChar {
                                    line: tok_line,
                                    col: tok_col,
                                    ch: '-',
                                })
                            }
                        }
                    }
                    '?' => {
                        chars.next();
                        col += 1;
                        let mut name = String::new();
                        match chars.peek() {
                            Some(&c2) if c2.is_ascii_alphabetic() => {}
                            other => {
                                return Err(ParseError::UnexpectedChar {
                                    line: tok_line,
                                    col: tok_col,
                                    ch: other.copied().unwrap_or('?'),
                                })
                            }
                        }
                        while let Some(&c2) = chars.peek() {
                            if c2.is_ascii_alphanumeric() || c2 == '_' {
                                name.push(c2);
                                chars.next();
                                col += 1;
                            } else {
                                break;
                            }
                        }
                        TokenKind::Variable(name)
                    }
                    '"' => {
                        chars.next();
                        col += 1;
                        let mut s = String::new();
                        loop {
                            match chars.next() {
                                Some('"') => {
                                    col += 1;
                                    break;
                                }
                                Some('\n') | None => {
                                    return Err(ParseError::UnterminatedString {
                                        line: tok_line,
                                        col: tok_col,
                                    })
                                }
                                Some(c2) => {
                                    s.push(c2);
                                    col += 1;
                                }
                            }
                        }
                        TokenKind::Str(s)
                    }
                    c2 if c2.is_ascii_alphanumeric() || c2 == '_' => {
                        let mut word = String::new();
                        let mut has_alpha = false;
                        while let Some(&c3) = chars.peek() {
                            if c3.is_ascii_alphanumeric() || c3 == '_' {
                                has_alpha |= !c3.is_ascii_digit();
                                word.push(c3);
                                chars.next();
                                col += 1;
                            } else {
                                break;
                            }
                        }
                        if has_alpha {
                            TokenKind::Ident(word)
                        } else {
                            // all digits so far; a `.digits` suffix makes it fractional
                            let mut number = word;
                            let mut clone = chars.clone();
                            if clone.next() == Some('.') {
                                if let Some(d) = clone.peek() {
                                    if d.is_ascii_digit() {
                                        chars.next();
                                        number.push('.');
                                        col += 1;
                                        while let Some(&c3) = chars.peek() {
                                            if c3.is_ascii_digit() {
                                                number.push(c3);
                                                chars.next();
                                                col += 1;
                                            } else {
                                                break;
                                            }
                                        }
                                    }
                                }
                            }
                            TokenKind::Number(number.parse().expect("digits parse as f64"))
                        }
                    }
                    other => {
                        return Err(ParseError::UnexpectedChar {
                            line: tok_line,
                            col: tok_col,
                            ch: other,
                        })
                    }
                };
                tokens.push(Token {
                    kind,
                    line: tok_line,
                    col: tok_col,
                });
            }
        }
    }
    Ok(tokens)
}

fn lex_number(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    _line: usize,
    _col: usize,
) -> Result<(f64, usize), ParseError> {
    let mut s = String::new();
    let mut used = 0usize;
    while let Some(&c) = chars.peek() {
        if c.is_ascii_digit() {
            s.push(c);
            chars.next();
            used += 1;
        } else {
            break;
        }
    }
    let mut clone = chars.clone();
    if clone.next() == Some('.') {
        if let Some(d) = clone.peek() {
            if d.is_ascii_digit() {
                chars.next();
                s.push('.');
                used += 1;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        used += 1;
                    } else {
                        break;
                    }
                }
            }
        }
    }
    Ok((s.parse().expect("digits parse as f64"), used))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    registry: &'a BuiltinRegistry,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn last_pos(&self) -> (usize, usize) {
        self.tokens
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<Token, ParseError> {
        match self.next() {
            Some(t) if t.kind == *kind => Ok(t),
            Some(t) => Err(ParseError::Unexpected {
                line: t.line,
                col: t.col,
                expected: what.into(),
                found: t.describe(),
            }),
            None => {
                let (line, col) = self.last_pos();
                Err(ParseError::Unexpected {
                    line,
                    col,
                    expected: what.into(),
                    found: "end of input".into(),
                })
            }
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Separator)) {
            self.pos += 1;
        }
    }

    fn parse_file(&mut self) -> Result<Vec<Rule>, ParseError> {
        let mut rules = Vec::new();
        self.skip_separators();
        while self.peek().is_some() {
            rules.push(self.parse_rule(rules.len())?);
            self.skip_separators();
        }
        Ok(rules)
    }

    fn parse_rule(&mut self, index: usize) -> Result<Rule, ParseError> {
        let start = self.peek().cloned().expect("caller checked non-empty");
        let label = if matches!(start.kind, TokenKind::LBracket) {
            self.next();
            let tok = self.next();
            let name = match tok {
                Some(Token {
                    kind: TokenKind::Ident(s),
                    ..
                }) => s,
                Some(t) => {
                    return Err(ParseError::Unexpected {
                        line: t.line,
                        col: t.col,
                        expected: "rule label".into(),
                        found: t.describe(),
                    })
                }
                None => {
                    let (line, col) = self.last_pos();
                    return Err(ParseError::Unexpected {
                        line,
                        col,
                        expected: "rule label".into(),
                        found: "end of input".into(),
                    });
                }
            };
            self.expect(&TokenKind::RBracket, "`]`")?;
            name
        } else {
            format!("rule_{index}")
        };

        let mut body = Vec::new();
        if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Arrow)) {
            loop {
                body.push(self.parse_atom()?);
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Caret) => {
                        self.next();
                    }
                    _ => break,
                }
            }
        }
        let arrow = self.expect(&TokenKind::Arrow, "`->`")?;
        if body.is_empty() {
            return Err(ParseError::EmptyBody {
                line: start.line,
                col: start.col,
                label,
            });
        }

        let mut head = Vec::new();
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Ident(_)) => {}
                _ => break,
            }
            let atom_tok = self.peek().cloned().unwrap();
            let atom = self.parse_atom()?;
            if let RuleAtom::Builtin { name, .. } = &atom {
                return Err(ParseError::BuiltinInHead {
                    line: atom_tok.line,
                    col: atom_tok.col,
                    name: name.clone(),
                });
            }
            head.push(atom);
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Caret) => {
                    self.next();
                }
                _ => break,
            }
        }
        if head.is_empty() {
            return Err(ParseError::EmptyHead {
                line: arrow.line,
                col: arrow.col,
                label,
            });
        }

        // safety: every head variable must occur in the body
        let body_vars: std::collections::BTreeSet<&str> =
            body.iter().flat_map(|a| a.variables()).collect();
        for atom in &head {
            for v in atom.variables() {
                if !body_vars.contains(v) {
                    return Err(ParseError::UnsafeHeadVariable {
                        line: arrow.line,
                        col: arrow.col,
                        label,
                        var: v.to_string(),
                    });
                }
            }
        }

        Ok(Rule { label, body, head })
    }

    fn parse_atom(&mut self) -> Result<RuleAtom, ParseError> {
        let (name, name_tok) = self.parse_name("atom name")?;
        self.expect(&TokenKind::LParen, "`(`")?;
        let mut args = vec![self.parse_term()?];
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Comma)) {
            self.next();
            args.push(self.parse_term()?);
        }
        self.expect(&TokenKind::RParen, "`)`")?;

        if self.registry.is_builtin_prefix(&name.prefix) {
            let Some(builtin) = self.registry.get(&name) else {
                let known = self
                    .registry
                    .names()
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(ParseError::UnknownBuiltin {
                    line: name_tok.line,
                    col: name_tok.col,
                    name,
                    known,
                });
            };
            if args.len() != builtin.arity() {
                return Err(ParseError::BuiltinArity {
                    line: name_tok.line,
                    col: name_tok.col,
                    name,
                    expected: builtin.arity(),
                    got: args.len(),
                });
            }
            return Ok(RuleAtom::Builtin { name, args });
        }

        match args.len() {
            1 => Ok(RuleAtom::Class {
                class: name,
                arg: args.pop().unwrap(),
            }),
            2 => {
                let object = args.pop().unwrap();
                let subject = args.pop().unwrap();
                Ok(RuleAtom::Property {
                    prop: name,
                    subject,
                    object,
                })
            }
            n => Err(ParseError::AtomArity {
                line: name_tok.line,
                col: name_tok.col,
                name,
                arity: n,
            }),
        }
    }

    fn parse_name(&mut self, what: &str) -> Result<(Name, Token), ParseError> {
        let tok = match self.next() {
            Some(t) => t,
            None => {
                let (line, col) = self.last_pos();
                return Err(ParseError::Unexpected {
                    line,
                    col,
                    expected: what.into(),
                    found: "end of input".into(),
                });
            }
        };
        let first = match &tok.kind {
            TokenKind::Ident(s) => s.clone(),
            _ => {
                return Err(ParseError::Unexpected {
                    line: tok.line,
                    col: tok.col,
                    expected: what.into(),
                    found: tok.describe(),
                })
            }
        };
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Colon)) {
            self.next();
            let local_tok = self.next();
            match local_tok {
                Some(Token {
                    kind: TokenKind::Ident(local),
                    ..
                }) => Ok((Name::new(first, local), tok)),
                Some(t) => Err(ParseError::Unexpected {
                    line: t.line,
                    col: t.col,
                    expected: "local name after `:`".into(),
                    found: t.describe(),
                }),
                None => {
                    let (line, col) = self.last_pos();
                    Err(ParseError::Unexpected {
                        line,
                        col,
                        expected: "local name after `:`".into(),
                        found: "end of input".into(),
                    })
                }
            }
        } else {
            Ok((Name::new(DBB, first), tok))
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::Variable(v),
                ..
            }) => {
                self.next();
                Ok(Term::Variable(v))
            }
            Some(Token {
                kind: TokenKind::Number(n),
                ..
            }) => {
                self.next();
                Ok(Term::LiteralValue(Literal::Real(n)))
            }
            Some(Token {
                kind: TokenKind::Str(s),
                ..
            }) => {
                self.next();
                Ok(Term::LiteralValue(Literal::Str(s)))
            }
            Some(Token {
                kind: TokenKind::Ident(ref s),
                ..
            }) if s == "true" || s == "false" => {
                self.next();
                Ok(Term::LiteralValue(Literal::Bool(s == "true")))
            }
            Some(Token {
                kind: TokenKind::Ident(_),
                ..
            }) => {
                let (name, _) = self.parse_name("argument")?;
                Ok(Term::Individual(name))
            }
            Some(t) => Err(ParseError::Unexpected {
                line: t.line,
                col: t.col,
                expected: "argument".into(),
                found: t.describe(),
            }),
            None => {
                let (line, col) = self.last_pos();
                Err(ParseError::Unexpected {
                    line,
                    col,
                    expected: "argument".into(),
                    found: "end of input".into(),
                })
            }
        }
    }
}

/// Parse a rule file. Built-in names are resolved against `registry`
/// so arities and unknown built-ins are rejected at parse time.
pub fn parse_rules(text: &str, registry: &BuiltinRegistry) -> Result<Vec<Rule>, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        registry,
    };
    parser.parse_file()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::RuleAtom;

    fn registry() -> BuiltinRegistry {
        crate::registry::default_registry(Default::default(), Default::default())
    }

    #[test]
    fn mast_style_rule() {
        let r = registry();
        let rules = parse_rules(
            "Vertical_BoundingBox(?x) ^ hasHeight(?x, ?h) ^ swrlb:greaterThan(?h, 4.0) -> Mast(?x)",
            &r,
        )
        .unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].body.len(), 3);
        assert_eq!(rules[0].head.len(), 1);
        assert!(matches!(rules[0].body[2], RuleAtom::Builtin { .. }));
    }

    #[test]
    fn detection_builtin_atom() {
        let r = registry();
        let rules = parse_rules(
            "Scene(?s) ^ 3D_swrlb_Processing:VerticalElementDetection(?Vert, ?s) -> Vertical_BoundingBox(?Vert)",
            &r,
        )
        .unwrap();
        match &rules[0].body[1] {
            RuleAtom::Builtin { name, args } => {
                assert_eq!(name.to_string(), "3D_swrlb_Processing:VerticalElementDetection");
                assert_eq!(args[0], Term::Variable("Vert".into()));
            }
            other => panic!("expected builtin atom, got {other:?}"),
        }
    }

    #[test]
    fn unsafe_head_variable_rejected() {
        let r = registry();
        let err = parse_rules("Geometry(?y) -> Mast(?x)", &r);
        assert!(matches!(err, Err(ParseError::UnsafeHeadVariable { var, .. }) if var == "x"));
    }

    #[test]
    fn empty_body_rejected() {
        let r = registry();
        assert!(matches!(
            parse_rules("-> Mast(dbb:geo_1)", &r),
            Err(ParseError::EmptyBody { .. })
        ));
    }

    #[test]
    fn unknown_builtin_lists_registered() {
        let r = registry();
        let err = parse_rules("swrlb:noSuchThing(?x, ?y) -> Mast(?x)", &r);
        match err {
            Err(ParseError::UnknownBuiltin { known, .. }) => {
                assert!(known.contains("swrlb:greaterThan"));
            }
            other => panic!("expected unknown builtin, got {other:?}"),
        }
    }

    #[test]
    fn builtin_arity_checked() {
        let r = registry();
        assert!(matches!(
            parse_rules("swrlb:greaterThan(?x) -> Mast(?x)", &r),
            Err(ParseError::BuiltinArity { .. })
        ));
    }

    #[test]
    fn rules_split_on_blank_line_and_dot() {
        let r = registry();
        let text = "Geometry(?x) -> Mast(?x)\n\nGeometry(?y) -> Schaltanlage(?y) . Geometry(?z) -> Mast(?z)";
        let rules = parse_rules(text, &r).unwrap();
        assert_eq!(rules.len(), 3);
    }

    #[test]
    fn labels_and_comments() {
        let r = registry();
        let text = "# a comment\n[my_rule]\nGeometry(?x) -> Mast(?x)";
        let rules = parse_rules(text, &r).unwrap();
        assert_eq!(rules[0].label, "my_rule");
    }

    #[test]
    fn syntax_error_has_position() {
        let r = registry();
        let err = parse_rules("Geometry(?x -> Mast(?x)", &r);
        match err {
            Err(ParseError::Unexpected { line, col, .. }) => {
                assert_eq!(line, 1);
                assert!(col > 1);
            }
            other => panic!("expected positioned error, got {other:?}"),
        }
    }

    #[test]
    fn normalize_print_is_fixpoint() {
        let r = registry();
        let text = "Vertical_BoundingBox(?x)^hasHeight(?x,?h)^swrlb:greaterThan(?h,4.0)->Mast(?x)^FacilityElement(?x)";
        let once = parse_rules(text, &r).unwrap();
        let printed: Vec<String> = once.iter().map(|ru| ru.to_string()).collect();
        let reparsed = parse_rules(&printed.join("\n\n"), &r).unwrap();
        let reprinted: Vec<String> = reparsed.iter().map(|ru| ru.to_string()).collect();
        assert_eq!(printed, reprinted);
    }
}
