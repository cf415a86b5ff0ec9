//! Ground disjunctive logic programs and their line-oriented text format.
//!
//! A rule has the shape `a1 | ... | ak :- b1, ..., bm, not c1, ..., not cn.`
//! Facts drop the `:-` part, constraints drop the head. `%` starts a comment
//! that runs to the end of the line.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense index of an atom inside its program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub usize);

impl AtomId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub id: AtomId,
    pub name: String,
}

/// A rule `head <- pos_body, not neg_body`. Each part is a sorted set of atom ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Vec<AtomId>,
    pub pos_body: Vec<AtomId>,
    pub neg_body: Vec<AtomId>,
}

fn normalize(ids: &mut Vec<AtomId>) {
    ids.sort_unstable();
    ids.dedup();
}

impl Rule {
    pub fn new(
        mut head: Vec<AtomId>,
        mut pos_body: Vec<AtomId>,
        mut neg_body: Vec<AtomId>,
    ) -> Self {
        normalize(&mut head);
        normalize(&mut pos_body);
        normalize(&mut neg_body);
        Rule {
            head,
            pos_body,
            neg_body,
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_disjunctive(&self) -> bool {
        self.head.len() >= 2
    }

    /// Number of literal occurrences (head atoms plus body literals).
    pub fn size(&self) -> usize {
        self.head.len() + self.pos_body.len() + self.neg_body.len()
    }

    /// `M |= r` iff `(head ∪ neg_body) ∩ M ≠ ∅` or `pos_body \ M ≠ ∅`.
    pub fn satisfied_by(&self, m: &Interpretation) -> bool {
        self.head.iter().any(|&a| m.contains(a))
            || self.neg_body.iter().any(|&a| m.contains(a))
            || self.pos_body.iter().any(|&a| !m.contains(a))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    atoms: Vec<Atom>,
    rules: Vec<Rule>,
    by_name: HashMap<String, AtomId>,
}

impl GroundProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, registering it if it is new.
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = AtomId(self.atoms.len());
        self.atoms.push(Atom {
            id,
            name: name.to_string(),
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    /// Appends a rule. Panics if it references an atom that does not exist.
    pub fn add_rule(&mut self, rule: Rule) {
        let n = self.atoms.len();
        assert!(
            rule.head
                .iter()
                .chain(&rule.pos_body)
                .chain(&rule.neg_body)
                .all(|a| a.0 < n),
            "rule references an unknown atom"
        );
        self.rules.push(rule);
    }

    /// Builds a rule from atom names, interning them in order of appearance.
    pub fn add_named_rule(&mut self, head: &[&str], pos_body: &[&str], neg_body: &[&str]) {
        let head = head.iter().map(|n| self.intern(n)).collect();
        let pos = pos_body.iter().map(|n| self.intern(n)).collect();
        let neg = neg_body.iter().map(|n| self.intern(n)).collect();
        self.rules.push(Rule::new(head, pos, neg));
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.by_name.get(name).copied()
    }

    pub fn atom_name(&self, id: AtomId) -> &str {
        &self.atoms[id.0].name
    }

    pub fn is_disjunctive(&self) -> bool {
        self.rules.iter().any(Rule::is_disjunctive)
    }

    /// Total literal occurrences over all rules.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Rule::size).sum()
    }

    /// `M |= P`.
    pub fn satisfied_by(&self, m: &Interpretation) -> bool {
        self.rules.iter().all(|r| r.satisfied_by(m))
    }

    /// Atoms that head at least one rule.
    pub fn head_atoms(&self) -> Vec<bool> {
        let mut heads = vec![false; self.num_atoms()];
        for r in &self.rules {
            for a in &r.head {
                heads[a.0] = true;
            }
        }
        heads
    }

    /// Non-fatal oddities worth reporting to a user.
    pub fn lint(&self) -> Vec<Lint> {
        let mut out = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            for a in &r.head {
                if r.pos_body.contains(a) || r.neg_body.contains(a) {
                    out.push(Lint::HeadBodyOverlap {
                        rule: i,
                        atom: self.atom_name(*a).to_string(),
                    });
                }
            }
        }
        out
    }

    /// Parses an interpretation given as atom names.
    pub fn interpretation<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Interpretation, UnknownAtom> {
        let mut m = Interpretation::empty(self.num_atoms());
        for name in names {
            let id = self
                .atom_id(name)
                .ok_or_else(|| UnknownAtom(name.to_string()))?;
            m.insert(id);
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lint {
    HeadBodyOverlap { rule: usize, atom: String },
}

impl fmt::Display for Lint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lint::HeadBodyOverlap { rule, atom } => write!(
                f,
                "rule {} mentions `{}` in both head and body",
                rule + 1,
                atom
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown atom `{0}`")]
pub struct UnknownAtom(pub String);

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let head: Vec<&str> = r.head.iter().map(|&a| self.atom_name(a)).collect();
            write!(f, "{}", head.join(" | "))?;
            let body: Vec<String> = r
                .pos_body
                .iter()
                .map(|&a| self.atom_name(a).to_string())
                .chain(
                    r.neg_body
                        .iter()
                        .map(|&a| format!("not {}", self.atom_name(a))),
                )
                .collect();
            if !body.is_empty() {
                if !head.is_empty() {
                    write!(f, " ")?;
                }
                write!(f, ":- {}", body.join(", "))?;
            } else if head.is_empty() {
                write!(f, ":- ")?;
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

/// A set of true atoms over a program of `len` atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interpretation {
    truth: Vec<bool>,
}

impl Interpretation {
    pub fn empty(num_atoms: usize) -> Self {
        Interpretation {
            truth: vec![false; num_atoms],
        }
    }

    /// Bit `i` of `mask` gives the truth value of atom `i`.
    pub fn from_mask(num_atoms: usize, mask: u64) -> Self {
        Interpretation {
            truth: (0..num_atoms).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn from_bools(truth: Vec<bool>) -> Self {
        Interpretation { truth }
    }

    pub fn from_atoms(num_atoms: usize, atoms: impl IntoIterator<Item = AtomId>) -> Self {
        let mut m = Self::empty(num_atoms);
        for a in atoms {
            m.insert(a);
        }
        m
    }

    pub fn num_atoms(&self) -> usize {
        self.truth.len()
    }

    pub fn contains(&self, a: AtomId) -> bool {
        self.truth[a.0]
    }

    pub fn insert(&mut self, a: AtomId) {
        self.truth[a.0] = true;
    }

    pub fn remove(&mut self, a: AtomId) {
        self.truth[a.0] = false;
    }

    pub fn len(&self) -> usize {
        self.truth.iter().filter(|&&t| t).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `τ+`, the true atoms in increasing id order.
    pub fn true_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.truth
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| AtomId(i))
    }

    /// `τ-`, the false atoms.
    pub fn false_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.truth
            .iter()
            .enumerate()
            .filter(|(_, &t)| !t)
            .map(|(i, _)| AtomId(i))
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.truth
    }

    pub fn is_subset_of(&self, other: &Interpretation) -> bool {
        self.truth.iter().zip(&other.truth).all(|(&a, &b)| !a || b)
    }

    pub fn display<'a>(&'a self, program: &'a GroundProgram) -> DisplayInterpretation<'a> {
        DisplayInterpretation { m: self, program }
    }
}

pub struct DisplayInterpretation<'a> {
    m: &'a Interpretation,
    program: &'a GroundProgram,
}

impl fmt::Display for DisplayInterpretation<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .m
            .true_atoms()
            .map(|a| self.program.atom_name(a))
            .collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    Bar,
    Comma,
    If,
    Dot,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Not => f.write_str("`not`"),
            Token::Bar => f.write_str("`|`"),
            Token::Comma => f.write_str("`,`"),
            Token::If => f.write_str("`:-`"),
            Token::Dot => f.write_str("`.`"),
        }
    }
}

struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line_no = lno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let column = i + 1;
            let token = match chars[i] {
                '%' => break,
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                '|' => Token::Bar,
                ',' => Token::Comma,
                '.' => Token::Dot,
                ':' if chars.get(i + 1) == Some(&'-') => {
                    i += 1;
                    Token::If
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i + 1 < chars.len()
                        && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_')
                    {
                        i += 1;
                    }
                    let word: String = chars[start..=i].iter().collect();
                    if word == "not" {
                        Token::Not
                    } else {
                        Token::Ident(word)
                    }
                }
                ':' => {
                    return Err(ParseError {
                        line: line_no,
                        column,
                        message: "expected `:-`".into(),
                    })
                }
                other => {
                    return Err(ParseError {
                        line: line_no,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push(Spanned {
                token,
                line: line_no,
                column,
            });
            i += 1;
        }
    }
    Ok(out)
}

/// Parses a ground program. Atom ids follow first textual occurrence.
pub fn parse_program(text: &str) -> Result<GroundProgram, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        program: GroundProgram::new(),
        end: end_position(text),
    };
    while parser.pos < tokens.len() {
        parser.rule()?;
    }
    Ok(parser.program)
}

fn end_position(text: &str) -> (usize, usize) {
    let lines: Vec<&str> = text.lines().collect();
    match lines.last() {
        Some(last) => (lines.len(), last.chars().count() + 1),
        None => (1, 1),
    }
}

struct Parser<'t> {
    tokens: &'t [Spanned],
    pos: usize,
    program: GroundProgram,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = match self.tokens.get(self.pos) {
            Some(s) => (s.line, s.column),
            None => self.end,
        };
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(tok) => self.error_here(format!("expected {expected}, found {tok}")),
            None => self.error_here(format!("expected {expected}, found end of input")),
        }
    }

    fn ident(&mut self) -> Result<AtomId, ParseError> {
        match self.peek() {
            Some(Token::Ident(name)) => {
                let id = self.program.intern(&name.clone());
                self.pos += 1;
                Ok(id)
            }
            _ => Err(self.unexpected("an atom")),
        }
    }

    fn rule(&mut self) -> Result<(), ParseError> {
        let mut head = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        if matches!(self.peek(), Some(Token::Ident(_))) {
            head.push(self.ident()?);
            while self.peek() == Some(&Token::Bar) {
                self.pos += 1;
                head.push(self.ident()?);
            }
        }
        match self.peek() {
            Some(Token::Dot) if !head.is_empty() => {}
            Some(Token::If) => {
                self.pos += 1;
                // `:- .` is an empty body.
                if self.peek() != Some(&Token::Dot) {
                    loop {
                        if self.peek() == Some(&Token::Not) {
                            self.pos += 1;
                            neg.push(self.ident()?);
                        } else {
                            pos.push(self.ident()?);
                        }
                        match self.peek() {
                            Some(Token::Comma) => self.pos += 1,
                            _ => break,
                        }
                    }
                }
            }
            _ if head.is_empty() => return Err(self.unexpected("an atom or `:-`")),
            _ => return Err(self.unexpected("`|`, `:-` or `.`")),
        }
        if self.peek() != Some(&Token::Dot) {
            return Err(self.unexpected("`.`"));
        }
        self.pos += 1;
        self.program.rules.push(Rule::new(head, pos, neg));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const GUARDED_CYCLE: &str =
        "p0 | p1.\nq0 | q1.\nq0 :- w.\nq1 :- w.\nw :- p0.\nw :- p1, q1.\n:- not w.\n";

    #[test]
    fn smallest_disjunctive_rule() {
        let p = parse_program("a | b.").unwrap();
        assert_eq!(p.num_atoms(), 2);
        assert_eq!(p.rules().len(), 1);
        let r = &p.rules()[0];
        assert_eq!(r.head, vec![AtomId(0), AtomId(1)]);
        assert!(r.pos_body.is_empty() && r.neg_body.is_empty());
        assert!(p.is_disjunctive());
    }

    #[test]
    fn guarded_cycle_shape() {
        let p = parse_program(GUARDED_CYCLE).unwrap();
        let names: Vec<&str> = p.atoms().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["p0", "p1", "q0", "q1", "w"]);
        assert_eq!(p.rules().len(), 7);
        let r7 = &p.rules()[6];
        assert!(r7.head.is_empty());
        assert!(r7.pos_body.is_empty());
        assert_eq!(r7.neg_body, vec![p.atom_id("w").unwrap()]);
    }

    #[test]
    fn missing_period_is_an_error() {
        let err = parse_program(":- not x").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("`.`"), "{err}");
    }

    #[test]
    fn error_positions() {
        let err = parse_program("a.\nb :- c d.\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 8));
        let err = parse_program("a | not b.").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        let err = parse_program("a :- b,.").unwrap_err();
        assert_eq!((err.line, err.column), (1, 8));
        let err = parse_program("a# b.").unwrap_err();
        assert_eq!((err.line, err.column), (1, 2));
        assert!(parse_program(".").is_err());
        assert!(parse_program("a : b.").is_err());
    }

    #[test]
    fn comments_blank_lines_and_several_rules_per_line() {
        let p = parse_program("% header\n\na :- b. b :- a. c :- a. % trailing\n").unwrap();
        assert_eq!(p.rules().len(), 3);
        assert_eq!(p.num_atoms(), 3);
    }

    #[test]
    fn duplicate_head_atoms_collapse() {
        let p = parse_program("a | a | b :- c, c, not d, not d.").unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.head.len(), 2);
        assert_eq!(r.pos_body.len(), 1);
        assert_eq!(r.neg_body.len(), 1);
    }

    #[test]
    fn empty_program() {
        let p = parse_program("  % nothing\n").unwrap();
        assert_eq!(p.num_atoms(), 0);
        assert!(p.rules().is_empty());
        assert!(p.satisfied_by(&Interpretation::empty(0)));
    }

    #[test]
    fn satisfaction_examples() {
        let p = parse_program(GUARDED_CYCLE).unwrap();
        let m1 = p.interpretation(["p0", "w", "q0", "q1"]).unwrap();
        assert!(p.rules()[4].satisfied_by(&m1));
        assert!(p.satisfied_by(&m1));
        let m = p.interpretation(["p1", "q1", "w"]).unwrap();
        assert!(!p.rules()[2].satisfied_by(&m));

        let fact = parse_program("a | b.").unwrap();
        assert!(!fact.rules()[0].satisfied_by(&Interpretation::empty(2)));
    }

    #[test]
    fn overlap_lint() {
        let p = parse_program("a :- a. b :- c.").unwrap();
        let lints = p.lint();
        assert_eq!(lints.len(), 1);
        assert!(lints[0].to_string().contains("`a`"));
    }

    #[test]
    fn unknown_atom_in_interpretation() {
        let p = parse_program("a.").unwrap();
        assert_eq!(p.interpretation(["z"]), Err(UnknownAtom("z".into())));
    }
}
