use std::fmt;

use igusa_core::genfun::Poly;
use igusa_core::grothring::ResClass;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `Σ c·name + constant`, with names in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub terms: Vec<(String, BigRational)>,
    pub constant: BigRational,
}

impl LinExpr {
    pub fn add_term(&mut self, name: &str, c: BigRational) {
        match self.terms.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v += c,
            None => self.terms.push((name.to_string(), c)),
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (n, c) in &other.terms {
            out.add_term(n, -c);
        }
        out.constant -= &other.constant;
        out
    }

    pub fn coeff(&self, name: &str) -> BigRational {
        self.terms
            .iter()
            .filter(|(n, _)| n == name)
            .map(|(_, c)| c.clone())
            .sum()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(n, _)| n.as_str())
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.terms {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
                (true, false) => {}
            }
            if !mag.is_one() {
                write_rat(f, &mag)?;
                f.write_str("*")?;
            }
            f.write_str(n)?;
            first = false;
        }
        if first {
            return write_rat(f, &self.constant);
        }
        if !self.constant.is_zero() {
            f.write_str(if self.constant.is_negative() { " - " } else { " + " })?;
            write_rat(f, &self.constant.abs())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Ne,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaAst {
    True,
    False,
    Compare { lhs: LinExpr, cmp: Cmp, rhs: LinExpr },
    Congruent { lhs: LinExpr, rhs: LinExpr, modulus: BigInt },
    Not(Box<FormulaAst>),
    And(Vec<FormulaAst>),
    Or(Vec<FormulaAst>),
    Exists(Vec<String>, Box<FormulaAst>),
}

impl FormulaAst {
    /// Free variables in order of first appearance.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let push = |e: &LinExpr, bound: &Vec<String>, out: &mut Vec<String>| {
            for n in e.names() {
                if !bound.iter().any(|b| b == n) && !out.iter().any(|o| o == n) {
                    out.push(n.to_string());
                }
            }
        };
        match self {
            FormulaAst::True | FormulaAst::False => {}
            FormulaAst::Compare { lhs, rhs, .. } | FormulaAst::Congruent { lhs, rhs, .. } => {
                push(lhs, bound, out);
                push(rhs, bound, out);
            }
            FormulaAst::Not(f) => f.collect_free(bound, out),
            FormulaAst::And(fs) | FormulaAst::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            FormulaAst::Exists(vs, body) => {
                let k = bound.len();
                bound.extend(vs.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(k);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FormulaAst::Exists(..) => 0,
            FormulaAst::Or(_) => 1,
            FormulaAst::And(_) => 2,
            _ => 3,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, child: &FormulaAst, min: u8) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for FormulaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaAst::True => f.write_str("true"),
            FormulaAst::False => f.write_str("false"),
            FormulaAst::Compare { lhs, cmp, rhs } => write!(f, "{lhs} {} {rhs}", cmp.symbol()),
            FormulaAst::Congruent { lhs, rhs, modulus } => {
                write!(f, "{lhs} == {rhs} (mod {modulus})")
            }
            FormulaAst::Not(g) => {
                f.write_str("not ")?;
                self.write_child(f, g, 3)
            }
            FormulaAst::And(gs) | FormulaAst::Or(gs) => {
                let (sep, min) = match self {
                    FormulaAst::And(_) => (" and ", 3),
                    _ => (" or ", 2),
                };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.write_child(f, g, min)?;
                }
                Ok(())
            }
            FormulaAst::Exists(vs, body) => write!(f, "exists {}. {body}", vs.join(", ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDecl {
    pub name: String,
    pub vars: Option<Vec<String>>,
    pub formula: FormulaAst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberDecl {
    pub class: ResClass,
    pub on: Option<FormulaAst>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumDecl {
    pub zeros: Vec<String>,
    pub gamma: FormulaAst,
    pub fibers: Vec<FiberDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionDecl {
    pub name: String,
    pub coords: Option<Vec<String>>,
    pub strata: Vec<StratumDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightDecl {
    pub name: String,
    pub kappa: Vec<(usize, LinExpr)>,
    pub omega: Option<LinExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapDecl {
    pub name: String,
    pub matrix: Vec<Vec<BigInt>>,
    pub units: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: String,
    pub count: Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `vol(𝔪) = 1`, so `vol(𝒪) = q`.
    UnitIdeal,
    /// `vol(𝒪) = 1`.
    Classical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Set(SetDecl),
    Region(RegionDecl),
    Weight(WeightDecl),
    Map(MapDecl),
    Symbol(SymbolDecl),
    Rho(Vec<u32>),
    Kappa(Vec<BigRational>),
    Normalization(Normalization),
}

impl Decl {
    pub fn name(&self) -> Option<&str> {
        match self {
            Decl::Set(d) => Some(&d.name),
            Decl::Region(d) => Some(&d.name),
            Decl::Weight(d) => Some(&d.name),
            Decl::Map(d) => Some(&d.name),
            Decl::Symbol(d) => Some(&d.name),
            _ => None,
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    f.write_str("[")?;
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("]")
}

fn write_header(f: &mut fmt::Formatter<'_>, kw: &str, name: &str, vars: &Option<Vec<String>>) -> fmt::Result {
    write!(f, "{kw} {name}")?;
    if let Some(vs) = vars {
        write!(f, "({})", vs.join(", "))?;
    }
    Ok(())
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Set(d) => {
                write_header(f, "set", &d.name, &d.vars)?;
                write!(f, " {{ {} }}", d.formula)
            }
            Decl::Region(d) => {
                write_header(f, "region", &d.name, &d.coords)?;
                f.write_str(" {\n")?;
                for s in &d.strata {
                    f.write_str("  strata {\n")?;
                    if !s.zeros.is_empty() {
                        f.write_str("    zeros ")?;
                        write_list(f, &s.zeros)?;
                        f.write_str(";\n")?;
                    }
                    writeln!(f, "    gamma {{ {} }};", s.gamma)?;
                    for fib in &s.fibers {
                        write!(f, "    fiber {}", fib.class)?;
                        if let Some(on) = &fib.on {
                            write!(f, " on {{ {on} }}")?;
                        }
                        f.write_str(";\n")?;
                    }
                    f.write_str("  }\n")?;
                }
                f.write_str("}")
            }
            Decl::Weight(d) => {
                writeln!(f, "weight {} {{", d.name)?;
                for (i, e) in &d.kappa {
                    writeln!(f, "  kappa {i}: {e};")?;
                }
                if let Some(w) = &d.omega {
                    writeln!(f, "  omega: {w};")?;
                }
                f.write_str("}")
            }
            Decl::Map(d) => {
                writeln!(f, "map {} {{", d.name)?;
                f.write_str("  matrix [")?;
                for (i, row) in d.matrix.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_list(f, row)?;
                }
                f.write_str("];\n  units ")?;
                write_list(f, &d.units)?;
                f.write_str(";\n}")
            }
            Decl::Symbol(d) => write!(f, "symbol {} {{ {} }}", d.name, d.count),
            Decl::Rho(v) => {
                f.write_str("rho ")?;
                write_list(f, v)?;
                f.write_str(";")
            }
            Decl::Kappa(v) => {
                let shown: Vec<String> = v
                    .iter()
                    .map(|r| if r.is_integer() { r.numer().to_string() } else { r.to_string() })
                    .collect();
                f.write_str("kappa ")?;
                write_list(f, &shown)?;
                f.write_str(";")
            }
            Decl::Normalization(n) => write!(
                f,
                "normalization {};",
                match n {
                    Normalization::UnitIdeal => "paper",
                    Normalization::Classical => "classical",
                }
            ),
        }
    }
}

/// Parsed spec file: named declarations plus run parameters.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecDocument {
    pub decls: Vec<Decl>,
}

impl SpecDocument {
    pub fn find(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name() == Some(name))
    }

    pub fn rho(&self) -> Option<&[u32]> {
        self.decls.iter().find_map(|d| match d {
            Decl::Rho(v) => Some(v.as_slice()),
            _ => None,
        })
    }

    pub fn kappa(&self) -> Option<&[BigRational]> {
        self.decls.iter().find_map(|d| match d {
            Decl::Kappa(v) => Some(v.as_slice()),
            _ => None,
        })
    }

    pub fn normalization(&self) -> Normalization {
        self.decls
            .iter()
            .find_map(|d| match d {
                Decl::Normalization(n) => Some(*n),
                _ => None,
            })
            .unwrap_or(Normalization::UnitIdeal)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &SymbolDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Symbol(s) => Some(s),
            _ => None,
        })
    }
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
