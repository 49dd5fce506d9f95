//! Text grammar and JSON mirror for operad terms.
//!
//! ```text
//! term    := name | u@colour(m) | gamma(term; pasting) | [term | term] | r[p,n](term) | (term)
//! pasting := item (*[n,p] item)*          left-associative
//! item    := term | d[k,n](pasting) | (pasting)
//! ```
//! Names are resolved exactly first; failing a unique reading, copies of a
//! family (`mu`/`nu`, `u`/`v`/`w`, `#i` and `@k` suffixes) are tried and the
//! well-typed readings kept.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Operad, OperadError, TermData, TermId};
use crate::pasting::Pasting;
use crate::trees::{Tree, TreeMatrix};

/// Parsed, not yet typed, term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Name(String),
    Unit {
        colour: String,
        dim: usize,
    },
    Gamma(Box<RawTerm>, Box<RawPasting>),
    Con(Box<RawTerm>, Box<RawTerm>),
    Refl {
        p: usize,
        n: usize,
        base: Box<RawTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawPasting {
    Term(RawTerm),
    Degen {
        k: usize,
        n: usize,
        inner: Box<RawPasting>,
    },
    Star {
        n: usize,
        p: usize,
        left: Box<RawPasting>,
        right: Box<RawPasting>,
    },
}

/// JSON form of a term; pastings list their leaf labels only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TermJson {
    Unit {
        colour: String,
        dim: usize,
    },
    Gen {
        name: String,
    },
    Gamma {
        outer: Box<TermJson>,
        tree: TreeMatrix,
        leaves: Vec<TermJson>,
    },
    Contraction {
        source: Box<TermJson>,
        target: Box<TermJson>,
    },
    Reflex {
        colour: String,
        p: usize,
        n: usize,
    },
}

const READING_CAP: usize = 256;

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> OperadError {
        OperadError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), OperadError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{tok}`")))
        }
    }

    fn number(&mut self) -> Result<usize, OperadError> {
        self.ws();
        let digits: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if digits.is_empty() {
            return Err(self.err("expected a number"));
        }
        self.pos += digits.len();
        Ok(digits.parse().unwrap())
    }

    fn pair(&mut self) -> Result<(usize, usize), OperadError> {
        let a = self.number()?;
        self.expect(",")?;
        let b = self.number()?;
        self.expect("]")?;
        Ok((a, b))
    }

    /// `gamma`, `γ`, optionally followed by `_digits` or `_{digits}`.
    fn gamma_keyword(&mut self) -> bool {
        self.ws();
        let save = self.pos;
        let matched = if self.rest().starts_with("gamma") {
            self.pos += 5;
            true
        } else if self.rest().starts_with('γ') {
            self.pos += 'γ'.len_utf8();
            true
        } else {
            false
        };
        if !matched {
            return false;
        }
        if self.rest().starts_with("_{") {
            let end = self.rest().find('}').map(|i| i + 1).unwrap_or(0);
            self.pos += end;
        } else if self.rest().starts_with('_') {
            self.pos += 1;
            while self.rest().starts_with(|c: char| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.eat("(") {
            true
        } else {
            self.pos = save;
            false
        }
    }

    fn term(&mut self) -> Result<RawTerm, OperadError> {
        self.ws();
        if self.gamma_keyword() {
            let outer = self.term()?;
            self.expect(";")?;
            let inner = self.pasting()?;
            self.expect(")")?;
            return Ok(RawTerm::Gamma(Box::new(outer), Box::new(inner)));
        }
        if self.eat("[") {
            let x = self.term()?;
            if !self.eat("|") {
                self.expect(";")?;
            }
            let y = self.term()?;
            self.expect("]")?;
            return Ok(RawTerm::Con(Box::new(x), Box::new(y)));
        }
        if self.eat("r[") {
            let (p, n) = self.pair()?;
            self.expect("(")?;
            let base = self.term()?;
            self.expect(")")?;
            return Ok(RawTerm::Refl {
                p,
                n,
                base: Box::new(base),
            });
        }
        if self.eat("(") {
            let t = self.term()?;
            self.expect(")")?;
            return Ok(t);
        }
        if self.rest().starts_with("u@") {
            self.pos += 2;
            let colour: String = self.rest().chars().take_while(|&c| c != '(').collect();
            self.pos += colour.len();
            self.expect("(")?;
            let dim = self.number()?;
            self.expect(")")?;
            return Ok(RawTerm::Unit {
                colour: colour.trim().to_string(),
                dim,
            });
        }
        self.name().map(RawTerm::Name)
    }

    fn name(&mut self) -> Result<String, OperadError> {
        self.ws();
        let start = self.pos;
        let ident: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        if ident.is_empty() {
            return Err(self.err("expected a term"));
        }
        self.pos += ident.len();
        let rest = self.rest();
        if rest.starts_with('(') {
            let close = rest.find(')');
            if let Some(close) = close {
                let args = &rest[1..close];
                if !args.is_empty()
                    && args
                        .chars()
                        .all(|c| c.is_ascii_digit() || c == ',' || c == ' ')
                {
                    self.pos += close + 1;
                }
            }
        }
        loop {
            let rest = self.rest();
            if (rest.starts_with('#') || rest.starts_with('@'))
                && rest[1..].starts_with(|c: char| c.is_ascii_digit())
            {
                self.pos += 1;
                while self.rest().starts_with(|c: char| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        Ok(self.s[start..self.pos].replace(' ', ""))
    }

    fn pasting(&mut self) -> Result<RawPasting, OperadError> {
        let mut left = self.item()?;
        while self.eat("*[") {
            let (n, p) = self.pair()?;
            let right = self.item()?;
            left = RawPasting::Star {
                n,
                p,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn item(&mut self) -> Result<RawPasting, OperadError> {
        if self.eat("d[") {
            let (k, n) = self.pair()?;
            self.expect("(")?;
            let inner = self.pasting()?;
            self.expect(")")?;
            return Ok(RawPasting::Degen {
                k,
                n,
                inner: Box::new(inner),
            });
        }
        self.ws();
        if self.rest().starts_with('(') {
            self.pos += 1;
            let p = self.pasting()?;
            self.expect(")")?;
            return Ok(p);
        }
        Ok(RawPasting::Term(self.term()?))
    }
}

pub fn parse_raw(text: &str) -> Result<RawTerm, OperadError> {
    let mut p = Parser { s: text, pos: 0 };
    let t = p.term()?;
    p.ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

pub fn parse_raw_pasting(text: &str) -> Result<RawPasting, OperadError> {
    let mut p = Parser { s: text, pos: 0 };
    let t = p.pasting()?;
    p.ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

/// Family key used when resolving names loosely.
fn loose_key(name: &str) -> String {
    let mut s = name.to_string();
    while let Some(i) = s.rfind(['#', '@']) {
        if s[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < s.len() {
            s.truncate(i);
        } else {
            break;
        }
    }
    if let Some(rest) = s.strip_prefix("nu(") {
        return format!("mu({rest}");
    }
    let mut cs = s.chars();
    if let Some(c) = cs.next() {
        let tail: String = cs.collect();
        if matches!(c, 'u' | 'v' | 'w')
            && !tail.is_empty()
            && tail.chars().all(|c| c.is_ascii_digit())
        {
            return format!("u{tail}");
        }
    }
    s
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if v.len() < READING_CAP && !v.contains(&x) {
        v.push(x);
    }
}

impl Operad {
    fn resolve_name(&mut self, name: &str, loose: bool) -> Vec<TermId> {
        let key = loose_key(name);
        let matches: Vec<String> = self
            .base()
            .cells()
            .iter()
            .filter(|c| {
                if loose {
                    loose_key(&c.name) == key
                } else {
                    c.name == name
                }
            })
            .map(|c| c.name.clone())
            .collect();
        let mut out = Vec::new();
        for m in matches {
            if let Some((g, d)) = self.base().unit_key(&m) {
                let c = self.colour_index(&g).unwrap();
                push_unique(&mut out, self.unit(c, d));
            } else if let Some(g) = self.base_gen(&m) {
                push_unique(&mut out, self.gen_term(g));
            }
        }
        out
    }

    fn read_term(&mut self, t: &RawTerm, loose: bool) -> Vec<TermId> {
        let mut out = Vec::new();
        match t {
            RawTerm::Name(n) => return self.resolve_name(n, loose),
            RawTerm::Unit { colour, dim } => {
                if let Some(c) = self.colour_index(colour) {
                    out.push(self.unit(c, *dim));
                }
            }
            RawTerm::Gamma(o, p) => {
                let outers = self.read_term(o, loose);
                let inners = self.read_pasting(p, loose);
                for &o in &outers {
                    for q in &inners {
                        if let Ok(t) = self.gamma(o, q) {
                            push_unique(&mut out, t);
                        }
                    }
                }
            }
            RawTerm::Con(x, y) => {
                let xs = self.read_term(x, loose);
                let ys = self.read_term(y, loose);
                for &x in &xs {
                    for &y in &ys {
                        if let Ok(g) = self.contraction_gen(x, y) {
                            let t = self.gen_term(g);
                            push_unique(&mut out, t);
                        }
                    }
                }
            }
            RawTerm::Refl { p, n, base } => {
                for b in self.read_term(base, loose) {
                    if self.dim(b) != *p || *n <= *p {
                        continue;
                    }
                    let r = if let TermData::Unit { colour, .. } = *self.data(b) {
                        self.refl_gen(colour, *p, *n).map(|g| self.gen_term(g))
                    } else {
                        let mut cur = Ok(b);
                        for _ in *p..*n {
                            cur = cur.and_then(|c| self.reflexivity_cell(c));
                        }
                        cur
                    };
                    if let Ok(r) = r {
                        push_unique(&mut out, r);
                    }
                }
            }
        }
        out
    }

    fn read_pasting(&mut self, p: &RawPasting, loose: bool) -> Vec<Pasting<TermId>> {
        let mut out = Vec::new();
        match p {
            RawPasting::Term(t) => {
                for x in self.read_term(t, loose) {
                    push_unique(&mut out, self.eta(x));
                }
                if let RawTerm::Refl { p, n, base } = t {
                    for b in self.read_term(base, loose) {
                        if self.dim(b) == *p && n > p {
                            if let Ok(d) = self.eta(b).degenerate(*n) {
                                push_unique(&mut out, d);
                            }
                        }
                    }
                }
            }
            RawPasting::Degen { k, n, inner } => {
                for q in self.read_pasting(inner, loose) {
                    if q.dim() != *k {
                        continue;
                    }
                    if n == k {
                        push_unique(&mut out, q);
                    } else if let Ok(d) = q.degenerate(*n) {
                        push_unique(&mut out, d);
                    }
                }
            }
            RawPasting::Star { n, p, left, right } => {
                let ls = self.read_pasting(left, loose);
                let rs = self.read_pasting(right, loose);
                for a in &ls {
                    for b in &rs {
                        if a.dim() != *n || b.dim() != *n {
                            continue;
                        }
                        if let Ok(s) = a.star(b, *p) {
                            push_unique(&mut out, s);
                        }
                    }
                }
            }
        }
        out
    }

    /// Every well-typed reading of a term (exact names if any reading uses them).
    pub fn parse_all(&mut self, text: &str) -> Result<Vec<TermId>, OperadError> {
        let raw = parse_raw(text)?;
        let exact = self.read_term(&raw, false);
        if !exact.is_empty() {
            return Ok(exact);
        }
        Ok(self.read_term(&raw, true))
    }

    /// The unique reading of a term, optionally constrained by output colour.
    pub fn parse_typed(
        &mut self,
        text: &str,
        out_colour: Option<usize>,
    ) -> Result<TermId, OperadError> {
        let raw = parse_raw(text)?;
        for loose in [false, true] {
            let mut rs = self.read_term(&raw, loose);
            if let Some(c) = out_colour {
                rs.retain(|&t| self.info(t).out_colour == c);
            }
            match rs.len() {
                0 => continue,
                1 => return Ok(rs[0]),
                k => return Err(OperadError::Ambiguous(text.to_string(), k)),
            }
        }
        Err(OperadError::NoInterpretation(text.to_string()))
    }

    pub fn parse(&mut self, text: &str) -> Result<TermId, OperadError> {
        self.parse_typed(text, None)
    }

    /// The unique reading of a pasting of terms.
    pub fn parse_pasting(&mut self, text: &str) -> Result<Pasting<TermId>, OperadError> {
        let raw = parse_raw_pasting(text)?;
        for loose in [false, true] {
            let rs = self.read_pasting(&raw, loose);
            match rs.len() {
                0 => continue,
                1 => return Ok(rs.into_iter().next().unwrap()),
                k => return Err(OperadError::Ambiguous(text.to_string(), k)),
            }
        }
        Err(OperadError::NoInterpretation(text.to_string()))
    }

    /// Interprets a parsed term into its normal form.
    pub fn normalize(&mut self, raw: &RawTerm) -> Result<TermId, OperadError> {
        for loose in [false, true] {
            let rs = self.read_term(raw, loose);
            match rs.len() {
                0 => continue,
                1 => return Ok(rs[0]),
                k => return Err(OperadError::Ambiguous(format!("{raw:?}"), k)),
            }
        }
        Err(OperadError::NoInterpretation(format!("{raw:?}")))
    }

    pub fn print(&self, t: TermId) -> String {
        match self.data(t) {
            TermData::Unit { colour, dim } => self.unit_name(*colour, *dim),
            TermData::Node { gen, inner } => {
                let name = self.gen_name(*gen);
                if inner.labels.iter().all(|&l| self.is_unit(l)) {
                    name
                } else {
                    format!("gamma({name}; {})", self.print_pasting(inner))
                }
            }
        }
    }

    pub fn print_pasting(&self, p: &Pasting<TermId>) -> String {
        let n = p.dim();
        let items: Vec<String> = p
            .leaf_labels()
            .iter()
            .map(|&l| {
                let d = self.dim(l);
                if d == n {
                    self.print(l)
                } else {
                    format!("d[{d},{n}]({})", self.print(l))
                }
            })
            .collect();
        let junctions = p.shape.matrix().bot;
        print_chain(&items, &junctions, n, false)
    }

    pub fn to_json(&self, t: TermId) -> TermJson {
        match self.data(t) {
            TermData::Unit { colour, dim } => TermJson::Unit {
                colour: self.colour_name(*colour).to_string(),
                dim: *dim,
            },
            TermData::Node { gen, inner } => {
                let bare = match &self.gen(*gen).kind {
                    super::GenKind::Base(_) => TermJson::Gen {
                        name: self.gen_name(*gen),
                    },
                    super::GenKind::Con(x, y) => TermJson::Contraction {
                        source: Box::new(self.to_json(*x)),
                        target: Box::new(self.to_json(*y)),
                    },
                    super::GenKind::Refl { colour, p, n } => TermJson::Reflex {
                        colour: self.colour_name(*colour).to_string(),
                        p: *p,
                        n: *n,
                    },
                };
                if inner.labels.iter().all(|&l| self.is_unit(l)) {
                    bare
                } else {
                    TermJson::Gamma {
                        outer: Box::new(bare),
                        tree: inner.shape.matrix(),
                        leaves: inner
                            .leaf_labels()
                            .iter()
                            .map(|&l| self.to_json(l))
                            .collect(),
                    }
                }
            }
        }
    }

    pub fn from_json(&mut self, j: &TermJson) -> Result<TermId, OperadError> {
        match j {
            TermJson::Unit { colour, dim } => {
                let c = self
                    .colour_index(colour)
                    .ok_or_else(|| OperadError::UnknownColour(colour.clone()))?;
                Ok(self.unit(c, *dim))
            }
            TermJson::Gen { name } => {
                if let Some((g, d)) = self.base().unit_key(name) {
                    let c = self.colour_index(&g).unwrap();
                    return Ok(self.unit(c, d));
                }
                let g = self
                    .base_gen(name)
                    .ok_or_else(|| OperadError::UnknownGenerator(name.clone()))?;
                Ok(self.gen_term(g))
            }
            TermJson::Contraction { source, target } => {
                let x = self.from_json(source)?;
                let y = self.from_json(target)?;
                let g = self.contraction_gen(x, y)?;
                Ok(self.gen_term(g))
            }
            TermJson::Reflex { colour, p, n } => {
                let c = self
                    .colour_index(colour)
                    .ok_or_else(|| OperadError::UnknownColour(colour.clone()))?;
                let g = self.refl_gen(c, *p, *n)?;
                Ok(self.gen_term(g))
            }
            TermJson::Gamma {
                outer,
                tree,
                leaves,
            } => {
                let o = self.from_json(outer)?;
                let shape = Tree::from_matrix(tree)?;
                let leaves = leaves
                    .iter()
                    .map(|l| self.from_json(l))
                    .collect::<Result<Vec<_>, _>>()?;
                let q = self.fill(shape, leaves)?;
                self.gamma(o, &q)
            }
        }
    }

    /// Names of the generators occurring in a term, outermost first.
    pub fn generators_in(&self, t: TermId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(t) = stack.pop() {
            if let TermData::Node { gen, inner } = self.data(t) {
                out.insert(self.gen_name(*gen));
                stack.extend(inner.leaf_labels());
            }
        }
        out
    }
}

fn print_chain(items: &[String], junctions: &[usize], n: usize, nested: bool) -> String {
    if items.len() == 1 {
        return items[0].clone();
    }
    let m = *junctions.iter().min().unwrap();
    let mut segments = Vec::new();
    let mut start = 0;
    for (j, &b) in junctions.iter().enumerate() {
        if b == m {
            segments.push((start, j + 1));
            start = j + 1;
        }
    }
    segments.push((start, items.len()));
    let parts: Vec<String> = segments
        .iter()
        .map(|&(a, b)| {
            print_chain(
                &items[a..b],
                &junctions[a..b.saturating_sub(1).max(a)],
                n,
                true,
            )
        })
        .collect();
    let body = parts.join(&format!(" *[{n},{m}] "));
    if nested {
        format!("({body})")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loose_keys() {
        assert_eq!(loose_key("nu(1,0)#2"), "mu(1,0)");
        assert_eq!(loose_key("F1#1"), "F1");
        assert_eq!(loose_key("w3"), "u3");
        assert_eq!(loose_key("u1@4"), "u1");
        assert_eq!(loose_key("alpha(1)"), "alpha(1)");
    }

    #[test]
    fn raw_grammar() {
        let t = parse_raw("gamma(F1; gamma_1(mu(1,0); u1 *[1,0] mu(1,0)))").unwrap();
        assert!(matches!(t, RawTerm::Gamma(..)));
        let c = parse_raw("[x | y]").unwrap();
        assert!(matches!(c, RawTerm::Con(..)));
        let r = parse_raw("r[0,1](u@1(0))").unwrap();
        assert_eq!(
            r,
            RawTerm::Refl {
                p: 0,
                n: 1,
                base: Box::new(RawTerm::Unit {
                    colour: "1".into(),
                    dim: 0
                })
            }
        );
        assert!(parse_raw("gamma(F1").is_err());
    }

    #[test]
    fn chain_printing_parenthesizes_higher_junctions() {
        let items = vec!["a".to_string(), "b".into(), "c".into()];
        assert_eq!(
            print_chain(&items, &[0, 1], 2, false),
            "a *[2,0] (b *[2,1] c)"
        );
        assert_eq!(
            print_chain(&items, &[0, 0], 1, false),
            "a *[1,0] b *[1,0] c"
        );
    }
}
