//! Hand-written lexer and recursive-descent parser for spec files.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use igusa_core::genfun::Poly;
use igusa_core::grothring::ResClass;

use crate::ast::*;
use crate::error::{CliError, Diagnostic};

const KEYWORDS: &[&str] = &[
    "set", "region", "weight", "map", "symbol", "strata", "zeros", "gamma", "fiber", "on",
    "kappa", "omega", "matrix", "units", "rho", "normalization", "exists", "and", "or", "not",
    "true", "false", "mod",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => format!("keyword `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const PUNCTS: &[&str] = &[
    ">=", "<=", "==", "!=", "{", "}", "(", ")", "[", "]", ";", ":", ",", ".", "*", "/", "+",
    "-", "^", ">", "<",
];

fn lex(src: &str) -> Result<Vec<Spanned>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let j = (i..chars.len())
                .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                .unwrap_or(chars.len());
            let s: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let j = (i..chars.len()).find(|&j| !chars[j].is_ascii_digit()).unwrap_or(chars.len());
            let s: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            Tok::Int(s.parse().expect("digits"))
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    i += p.len();
                    col += p.len();
                    Tok::Punct(p)
                }
                None => {
                    return Err(Diagnostic {
                        line,
                        column: col,
                        found: format!("character `{c}`"),
                        expected: Vec::new(),
                    })
                }
            }
        };
        out.push(Spanned {
            tok,
            line: start.0,
            column: start.1,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

const LIN_START: &[&str] = &["integer", "identifier", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> Diagnostic {
        let s = &self.toks[self.pos];
        Diagnostic {
            line: s.line,
            column: s.column,
            found: s.tok.describe(),
            expected: expected.iter().map(|e| e.to_string()).collect(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &'static str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{p}`")]))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{k}`")]))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn int(&mut self) -> PResult<BigInt> {
        let neg = self.eat_punct("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.error(if neg { &["integer"] } else { &["integer", "`-`"] })),
        }
    }

    fn rational(&mut self) -> PResult<BigRational> {
        let n = self.int()?;
        if self.eat_punct("/") {
            let d = match self.peek().clone() {
                Tok::Int(d) if !d.is_zero() => d,
                _ => return Err(self.error(&["positive integer"])),
            };
            self.bump();
            return Ok(BigRational::new(n, d));
        }
        Ok(BigRational::from_integer(n))
    }

    fn small(&mut self) -> PResult<u32> {
        let at = self.pos;
        let n = self.int()?;
        u32::try_from(&n).map_err(|_| {
            self.pos = at;
            self.error(&["nonnegative integer"])
        })
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect_punct("[")?;
        let mut out = Vec::new();
        if self.eat_punct("]") {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_punct("]") {
                return Ok(out);
            }
            if !self.eat_punct(",") {
                return Err(self.error(&["`,`", "`]`"]));
            }
        }
    }

    fn name_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.name()?];
        while self.eat_punct(",") {
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn opt_vars(&mut self) -> PResult<Option<Vec<String>>> {
        if !self.eat_punct("(") {
            return Ok(None);
        }
        if self.eat_punct(")") {
            return Ok(Some(Vec::new()));
        }
        let vs = self.name_list()?;
        self.expect_punct(")")?;
        Ok(Some(vs))
    }

    fn document(&mut self) -> PResult<SpecDocument> {
        let mut doc = SpecDocument::default();
        loop {
            let decl = match self.peek() {
                Tok::Eof => return Ok(doc),
                Tok::Ident(k) => match k.as_str() {
                    "set" => self.set_decl()?,
                    "region" => self.region_decl()?,
                    "weight" => self.weight_decl()?,
                    "map" => self.map_decl()?,
                    "symbol" => self.symbol_decl()?,
                    "rho" => {
                        self.bump();
                        let v = self.list(Self::small)?;
                        self.expect_punct(";")?;
                        Decl::Rho(v)
                    }
                    "kappa" => {
                        self.bump();
                        let v = self.list(Self::rational)?;
                        self.expect_punct(";")?;
                        Decl::Kappa(v)
                    }
                    "normalization" => {
                        self.bump();
                        let n = if self.eat_kw_soft("paper") {
                            Normalization::UnitIdeal
                        } else if self.eat_kw_soft("classical") {
                            Normalization::Classical
                        } else {
                            return Err(self.error(&["`paper`", "`classical`"]));
                        };
                        self.expect_punct(";")?;
                        Decl::Normalization(n)
                    }
                    _ => return Err(self.error(TOP)),
                },
                _ => return Err(self.error(TOP)),
            };
            doc.decls.push(decl);
        }
    }

    fn eat_kw_soft(&mut self, word: &str) -> bool {
        self.eat_kw(word)
    }

    fn set_decl(&mut self) -> PResult<Decl> {
        self.expect_kw("set")?;
        let name = self.name()?;
        let vars = self.opt_vars()?;
        let formula = self.braced_formula()?;
        Ok(Decl::Set(SetDecl { name, vars, formula }))
    }

    fn braced_formula(&mut self) -> PResult<FormulaAst> {
        self.expect_punct("{")?;
        let f = self.formula()?;
        self.expect_punct("}")?;
        Ok(f)
    }

    fn region_decl(&mut self) -> PResult<Decl> {
        self.expect_kw("region")?;
        let name = self.name()?;
        let coords = self.opt_vars()?;
        self.expect_punct("{")?;
        let mut strata = Vec::new();
        while !self.eat_punct("}") {
            if !self.is_kw("strata") {
                return Err(self.error(&["`strata`", "`}`"]));
            }
            strata.push(self.stratum()?);
        }
        Ok(Decl::Region(RegionDecl { name, coords, strata }))
    }

    fn stratum(&mut self) -> PResult<StratumDecl> {
        self.expect_kw("strata")?;
        self.expect_punct("{")?;
        let mut zeros = Vec::new();
        if self.eat_kw("zeros") {
            zeros = self.list(|p| match p.peek().clone() {
                Tok::Int(n) => {
                    p.bump();
                    Ok(n.to_string())
                }
                _ => p.name().map_err(|_| p.error(&["identifier", "integer"])),
            })?;
            self.expect_punct(";")?;
        }
        self.expect_kw("gamma")?;
        let gamma = self.braced_formula()?;
        self.expect_punct(";")?;
        let mut fibers = Vec::new();
        while self.eat_kw("fiber") {
            let class = self.res_class()?;
            let on = if self.eat_kw("on") {
                Some(self.braced_formula()?)
            } else {
                None
            };
            self.expect_punct(";")?;
            fibers.push(FiberDecl { class, on });
        }
        if !self.eat_punct("}") {
            return Err(self.error(&["`fiber`", "`}`"]));
        }
        Ok(StratumDecl { zeros, gamma, fibers })
    }

    fn res_class(&mut self) -> PResult<ResClass> {
        let start = self.pos;
        let mut text = String::new();
        let mut first = true;
        loop {
            if self.eat_punct("-") {
                text.push('-');
            } else if self.eat_punct("+") || first {
                if !first {
                    text.push('+');
                }
            } else {
                break;
            }
            first = false;
            loop {
                match self.peek().clone() {
                    Tok::Int(n) => text.push_str(&n.to_string()),
                    Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => text.push_str(&s),
                    _ => return Err(self.error(&["integer", "identifier"])),
                }
                self.bump();
                if self.eat_punct("^") {
                    text.push('^');
                    let k = self.small()?;
                    text.push_str(&k.to_string());
                }
                if !self.eat_punct("*") {
                    break;
                }
                text.push('*');
            }
        }
        ResClass::parse(&text).map_err(|e| {
            self.pos = start;
            let mut d = self.error(&["residue class"]);
            d.found = format!("{} ({e})", d.found);
            d
        })
    }

    fn weight_decl(&mut self) -> PResult<Decl> {
        self.expect_kw("weight")?;
        let name = self.name()?;
        self.expect_punct("{")?;
        let mut kappa = Vec::new();
        let mut omega = None;
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.eat_kw("kappa") {
                let at = self.pos;
                let i = self.small()?;
                if i == 0 {
                    self.pos = at;
                    return Err(self.error(&["positive integer"]));
                }
                self.expect_punct(":")?;
                kappa.push((i as usize, self.lin()?));
            } else if self.eat_kw("omega") {
                self.expect_punct(":")?;
                omega = Some(self.lin()?);
            } else {
                return Err(self.error(&["`kappa`", "`omega`", "`}`"]));
            }
            self.expect_punct(";")?;
        }
        Ok(Decl::Weight(WeightDecl { name, kappa, omega }))
    }

    fn map_decl(&mut self) -> PResult<Decl> {
        self.expect_kw("map")?;
        let name = self.name()?;
        self.expect_punct("{")?;
        self.expect_kw("matrix")?;
        let matrix = self.list(|p| p.list(Self::int))?;
        self.expect_punct(";")?;
        self.expect_kw("units")?;
        let units = self.list(Self::int)?;
        self.expect_punct(";")?;
        self.expect_punct("}")?;
        Ok(Decl::Map(MapDecl { name, matrix, units }))
    }

    fn symbol_decl(&mut self) -> PResult<Decl> {
        self.expect_kw("symbol")?;
        let name = self.name()?;
        self.expect_punct("{")?;
        let count = self.q_poly()?;
        self.expect_punct("}")?;
        Ok(Decl::Symbol(SymbolDecl { name, count }))
    }

    /// Laurent polynomial in `q` with rational coefficients.
    fn q_poly(&mut self) -> PResult<Poly> {
        let mut out = Poly::zero();
        let mut first = true;
        loop {
            let sign = if self.eat_punct("-") {
                -BigRational::one()
            } else if first || self.eat_punct("+") {
                BigRational::one()
            } else {
                return Ok(out);
            };
            first = false;
            let (coef, mono) = match self.peek().clone() {
                Tok::Int(_) => {
                    let c = self.rational()?;
                    if self.eat_punct("*") {
                        (c, true)
                    } else {
                        (c, false)
                    }
                }
                Tok::Ident(s) if s == "q" => (BigRational::one(), true),
                _ => return Err(self.error(&["integer", "`q`"])),
            };
            let mut exp = 0i64;
            if mono {
                if !matches!(self.peek(), Tok::Ident(s) if s == "q") {
                    return Err(self.error(&["`q`"]));
                }
                self.bump();
                exp = 1;
                if self.eat_punct("^") {
                    let at = self.pos;
                    let e = self.int()?;
                    exp = i64::try_from(&e).map_err(|_| {
                        self.pos = at;
                        self.error(&["small exponent"])
                    })?;
                }
            }
            out = out.add(&Poly::monomial(sign * coef, vec![exp]));
        }
    }

    fn formula(&mut self) -> PResult<FormulaAst> {
        if self.eat_kw("exists") {
            let vs = self.name_list()?;
            self.expect_punct(".")?;
            let body = self.formula()?;
            return Ok(FormulaAst::Exists(vs, Box::new(body)));
        }
        let mut parts = vec![self.conjunction()?];
        while self.eat_kw("or") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FormulaAst::Or(parts) })
    }

    fn conjunction(&mut self) -> PResult<FormulaAst> {
        let mut parts = vec![self.unary()?];
        while self.eat_kw("and") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FormulaAst::And(parts) })
    }

    fn unary(&mut self) -> PResult<FormulaAst> {
        if self.eat_kw("not") {
            return Ok(FormulaAst::Not(Box::new(self.unary()?)));
        }
        if self.is_kw("exists") {
            return self.formula();
        }
        if self.eat_kw("true") {
            return Ok(FormulaAst::True);
        }
        if self.eat_kw("false") {
            return Ok(FormulaAst::False);
        }
        if self.eat_punct("(") {
            let f = self.formula()?;
            self.expect_punct(")")?;
            return Ok(f);
        }
        match self.peek() {
            Tok::Int(_) | Tok::Punct("-") => {}
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {}
            _ => return Err(self.error(FORMULA_START)),
        }
        let lhs = self.lin()?;
        let cmp = match self.peek() {
            Tok::Punct(">=") => Cmp::Ge,
            Tok::Punct(">") => Cmp::Gt,
            Tok::Punct("<=") => Cmp::Le,
            Tok::Punct("<") => Cmp::Lt,
            Tok::Punct("==") => Cmp::Eq,
            Tok::Punct("!=") => Cmp::Ne,
            _ => return Err(self.error(&["`>=`", "`>`", "`<=`", "`<`", "`==`", "`!=`", "`+`", "`-`"])),
        };
        self.bump();
        let rhs = self.lin()?;
        if cmp == Cmp::Eq
            && self.is_punct("(")
            && matches!(self.peek_at(1), Tok::Ident(s) if s == "mod")
        {
            self.bump();
            self.bump();
            let at = self.pos;
            let m = self.int()?;
            if !m.is_positive() {
                self.pos = at;
                return Err(self.error(&["positive integer"]));
            }
            self.expect_punct(")")?;
            return Ok(FormulaAst::Congruent { lhs, rhs, modulus: m });
        }
        Ok(FormulaAst::Compare { lhs, cmp, rhs })
    }

    fn lin(&mut self) -> PResult<LinExpr> {
        let mut out = LinExpr::default();
        let mut first = true;
        loop {
            let neg = if self.eat_punct("-") {
                true
            } else if first || self.eat_punct("+") {
                false
            } else {
                break;
            };
            first = false;
            let sign = if neg { -BigRational::one() } else { BigRational::one() };
            match self.peek().clone() {
                Tok::Int(_) => {
                    let c = self.rational()?;
                    if self.eat_punct("*") {
                        let v = self.name()?;
                        out.add_term(&v, sign * c);
                    } else {
                        out.constant += sign * c;
                    }
                }
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                    self.bump();
                    out.add_term(&s, sign);
                }
                _ => return Err(self.error(LIN_START)),
            }
        }
        out.terms.retain(|(_, c)| !c.is_zero());
        Ok(out)
    }
}

const TOP: &[&str] = &[
    "`set`", "`region`", "`weight`", "`map`", "`symbol`", "`rho`", "`kappa`", "`normalization`",
];

const FORMULA_START: &[&str] = &[
    "integer", "identifier", "`-`", "`(`", "`not`", "`exists`", "`true`", "`false`",
];

/// Parses a whole spec file.
pub fn parse_document(src: &str) -> Result<SpecDocument, CliError> {
    let toks = lex(src).map_err(CliError::Syntax)?;
    let mut p = Parser { toks, pos: 0 };
    p.document().map_err(CliError::Syntax)
}

/// Parses a standalone formula, as used by tests and the `qe` command line form.
pub fn parse_formula(src: &str) -> Result<FormulaAst, CliError> {
    let toks = lex(src).map_err(CliError::Syntax)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula().map_err(CliError::Syntax)?;
    if p.peek() != &Tok::Eof {
        return Err(CliError::Syntax(p.error(&["end of input", "`and`", "`or`"])));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_rhs_points_at_brace() {
        let err = parse_document("set D { x >= }").unwrap_err();
        let CliError::Syntax(d) = err else { panic!("not a syntax error") };
        assert_eq!((d.line, d.column), (1, 14));
        assert_eq!(d.found, "`}`");
        assert!(d.expected.contains(&"integer".to_string()));
    }

    #[test]
    fn symbol_polynomial() {
        let doc = parse_document("symbol E { q^2 + q + 1 }").unwrap();
        let Decl::Symbol(s) = &doc.decls[0] else { panic!() };
        let expected = Poly::q().pow(2).add(&Poly::q()).add(&Poly::one());
        assert_eq!(s.count, expected);
        let again = parse_document(&doc.to_string()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn congruence_and_exists() {
        let f = parse_formula("exists y. x == 2*y + 1 and y >= 0").unwrap();
        let FormulaAst::Exists(vs, body) = &f else { panic!() };
        assert_eq!(vs, &["y".to_string()]);
        assert!(matches!(**body, FormulaAst::And(_)));
        let g = parse_formula("x == 1 (mod 3) or not x < 0").unwrap();
        assert_eq!(g.to_string(), "x == 1 (mod 3) or not x < 0");
        assert_eq!(parse_formula(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn region_round_trip() {
        let src = "region R(x, y) {\n  strata {\n    gamma { x >= 0 and y >= 2*x };\n    fiber u^2 on { x >= 1 };\n    fiber u*v on { x <= 0 };\n  }\n  strata {\n    zeros [y];\n    gamma { x >= 0 };\n    fiber u;\n  }\n}\n";
        let doc = parse_document(src).unwrap();
        assert_eq!(doc.to_string(), src);
    }
}
