//! Text form of programs.
//!
//! ```text
//! program  := call
//! call     := rule '(' [arg (',' arg)*] ')'
//! arg      := 'scene' | call | literal
//! literal  := bare | '"' (char | '\"' | '\\')* '"'
//! bare     := run of characters other than ( ) , " with surrounding space trimmed
//! ```
//!
//! Scene-reading rules take `scene` as their first argument. Child calls and
//! literals may appear in any order; serialization writes children first.

use super::{slot_kind, ArgSlot, InputKind, ProgramError, ProgramNode, RuleName};
use crate::scene::{NameKind, Vocabulary};

const SCENE: &str = "scene";

pub fn parse_program(text: &str, vocab: &Vocabulary) -> Result<ProgramNode, ProgramError> {
    let mut p = Parser { src: text, pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("trailing input after program"));
    }
    match expr {
        Expr::Call(node) => {
            check_literals(&node, vocab)?;
            Ok(node)
        }
        _ => Err(ProgramError::Syntax {
            pos: 0,
            message: "program must be a rule call".into(),
        }),
    }
}

pub fn serialize_program(node: &ProgramNode) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(node.children().len() + node.args().len() + 1);
    if node.rule().signature().input == InputKind::Scene {
        parts.push(SCENE.to_string());
    }
    parts.extend(node.children().iter().map(serialize_program));
    parts.extend(node.args().iter().map(|a| quote_literal(a)));
    format!("{}({})", node.rule().as_str(), parts.join(", "))
}

/// Writes a literal bare when it would parse back unchanged, quoted
/// otherwise.
pub fn quote_literal(value: &str) -> String {
    let needs_quotes = value.is_empty()
        || value == SCENE
        || value.trim() != value
        || value
            .chars()
            .any(|c| matches!(c, '(' | ')' | ',' | '"' | '\\') || c.is_control());
    if !needs_quotes {
        return value.to_string();
    }
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

enum Expr {
    Scene,
    Literal(String),
    Call(ProgramNode),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ProgramError {
        ProgramError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn expr(&mut self) -> Result<Expr, ProgramError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('"') => self.quoted().map(Expr::Literal),
            Some('(' | ')' | ',') => Err(self.error("expected an argument")),
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if matches!(c, '(' | ')' | ',' | '"') {
                        break;
                    }
                    self.pos += c.len_utf8();
                }
                let word = self.src[start..self.pos].trim();
                if self.peek() == Some('(') {
                    self.call(start, word).map(Expr::Call)
                } else if self.peek() == Some('"') {
                    Err(self.error("unexpected quote inside bare literal"))
                } else if word == SCENE {
                    Ok(Expr::Scene)
                } else {
                    Ok(Expr::Literal(word.to_string()))
                }
            }
        }
    }

    fn quoted(&mut self) -> Result<String, ProgramError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(ProgramError::Syntax {
                    pos: start,
                    message: "unterminated string".into(),
                });
            };
            self.pos += c.len_utf8();
            match c {
                '"' => return Ok(out),
                '\\' => {
                    let Some(e) = self.peek() else {
                        return Err(self.error("dangling escape"));
                    };
                    self.pos += e.len_utf8();
                    out.push(e);
                }
                c => out.push(c),
            }
        }
    }

    fn call(&mut self, start: usize, name: &str) -> Result<ProgramNode, ProgramError> {
        let rule: RuleName = name
            .parse()
            .map_err(|name| ProgramError::UnknownRule { pos: start, name })?;
        self.pos += 1; // '('
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
        } else {
            loop {
                let at = {
                    self.skip_ws();
                    self.pos
                };
                items.push((at, self.expr()?));
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected ',' or ')'")),
                }
            }
        }

        let mut items = items.into_iter().peekable();
        if rule.signature().input == InputKind::Scene {
            match items.next() {
                Some((_, Expr::Scene)) => {}
                Some((at, _)) => {
                    return Err(ProgramError::Syntax {
                        pos: at,
                        message: format!("{rule} reads the scene; first argument must be 'scene'"),
                    })
                }
                None => {
                    return Err(ProgramError::Arity {
                        rule,
                        expected: "the scene as first argument".into(),
                        found: "no arguments".into(),
                    })
                }
            }
        }
        let mut args = Vec::new();
        let mut children = Vec::new();
        for (at, item) in items {
            match item {
                Expr::Scene => {
                    return Err(ProgramError::Syntax {
                        pos: at,
                        message: format!("'scene' is not an argument of {rule}"),
                    })
                }
                Expr::Literal(s) => args.push(s),
                Expr::Call(n) => children.push(n),
            }
        }
        ProgramNode::new(rule, args, children)
    }
}

fn check_literals(node: &ProgramNode, vocab: &Vocabulary) -> Result<(), ProgramError> {
    let sig = node.rule().signature();
    let slots = sig.args.iter().chain(sig.optional_args);
    let mut choice_kind: Option<NameKind> = None;
    for (slot, value) in slots.zip(node.args()) {
        let unknown = |kind: &str| ProgramError::UnknownLiteral {
            kind: kind.to_string(),
            value: value.clone(),
        };
        match *slot {
            ArgSlot::AllFlag => {
                if value != "all" {
                    return Err(unknown("flag (expected 'all')"));
                }
            }
            ArgSlot::Choice => {
                let kind = [NameKind::Object, NameKind::Action]
                    .into_iter()
                    .find(|k| vocab.contains(*k, value))
                    .ok_or_else(|| unknown("object or action"))?;
                if choice_kind.is_some_and(|k| k != kind) {
                    return Err(ProgramError::Arity {
                        rule: node.rule(),
                        expected: "options of one kind".into(),
                        found: "an object and an action".into(),
                    });
                }
                choice_kind = Some(kind);
            }
            s => {
                let kind = slot_kind(s).expect("vocabulary slot");
                if !vocab.contains(kind, value) {
                    return Err(unknown(&kind.to_string()));
                }
            }
        }
    }
    node.children()
        .iter()
        .try_for_each(|c| check_literals(c, vocab))
}
