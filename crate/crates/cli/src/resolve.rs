//! Binds parsed declarations to engine objects.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use igusa_core::grothring::SymbolRegistry;
use igusa_core::num::lcm;
use igusa_core::presburger::{Formula, LinTerm, PresburgerSet};
use igusa_core::qlinear::{QAtom, QLin};
use igusa_core::semilinear::{QFormula, SemilinearSet};
use igusa_core::vfrag::{MonomialMap, MonomialRegion, Stratum, ValWeight};

use crate::ast::*;
use crate::error::CliError;

/// Variable names in scope, outermost first.
#[derive(Clone, Debug)]
struct Scope {
    names: Vec<String>,
}

impl Scope {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().rposition(|n| n == name)
    }
}

fn rat_to_vec(e: &LinExpr, scope: &Scope, owner: &str) -> Result<QLin, CliError> {
    let n = scope.names.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for (name, c) in &e.terms {
        let i = scope
            .index(name)
            .ok_or_else(|| CliError::resolve(owner, format!("unknown variable `{name}`")))?;
        coeffs[i] += c;
    }
    Ok(QLin::new(coeffs, e.constant.clone()))
}

/// Clears denominators: `d·form` with `d > 0` minimal.
fn integral(form: &QLin) -> (LinTerm, BigInt) {
    let d = form
        .coeffs
        .iter()
        .chain(std::iter::once(&form.constant))
        .fold(BigInt::one(), |acc, c| lcm(&acc, c.denom()));
    let dr = BigRational::from_integer(d.clone());
    let int = |c: &BigRational| (c * &dr).to_integer();
    (LinTerm::new(form.coeffs.iter().map(int).collect(), int(&form.constant)), d)
}

fn presburger(f: &FormulaAst, scope: &mut Scope, owner: &str) -> Result<Formula, CliError> {
    Ok(match f {
        FormulaAst::True => Formula::True,
        FormulaAst::False => Formula::False,
        FormulaAst::Compare { lhs, cmp, rhs } => {
            let (t, _) = integral(&rat_to_vec(&lhs.sub(rhs), scope, owner)?);
            match cmp {
                Cmp::Ge => Formula::ge(t),
                Cmp::Gt => Formula::gt(t),
                Cmp::Le => Formula::le(t),
                Cmp::Lt => Formula::lt(t),
                Cmp::Eq => Formula::eq(t),
                Cmp::Ne => Formula::not(Formula::eq(t)),
            }
        }
        FormulaAst::Congruent { lhs, rhs, modulus } => {
            let (t, d) = integral(&rat_to_vec(&lhs.sub(rhs), scope, owner)?);
            Formula::cong(t, modulus * d)
        }
        FormulaAst::Not(g) => Formula::not(presburger(g, scope, owner)?),
        FormulaAst::And(gs) => Formula::And(
            gs.iter().map(|g| presburger(g, scope, owner)).collect::<Result<_, _>>()?,
        ),
        FormulaAst::Or(gs) => Formula::Or(
            gs.iter().map(|g| presburger(g, scope, owner)).collect::<Result<_, _>>()?,
        ),
        FormulaAst::Exists(vs, body) => {
            let k = scope.names.len();
            scope.names.extend(vs.iter().cloned());
            let mut inner = presburger(body, scope, owner);
            scope.names.truncate(k);
            // innermost binder is the last coordinate
            for _ in vs {
                inner = inner.map(Formula::exists);
            }
            inner?
        }
    })
}

fn dense(f: &FormulaAst, scope: &Scope, owner: &str) -> Result<QFormula, CliError> {
    Ok(match f {
        FormulaAst::True => QFormula::True,
        FormulaAst::False => QFormula::False,
        FormulaAst::Compare { lhs, cmp, rhs } => {
            let e = rat_to_vec(&lhs.sub(rhs), scope, owner)?;
            match cmp {
                Cmp::Ge => QFormula::atom(QAtom::ge(e)),
                Cmp::Gt => QFormula::atom(QAtom::gt(e)),
                Cmp::Le => QFormula::atom(QAtom::ge(e.neg())),
                Cmp::Lt => QFormula::atom(QAtom::gt(e.neg())),
                Cmp::Eq => QFormula::atom(QAtom::eq(e)),
                Cmp::Ne => QFormula::not(QFormula::atom(QAtom::eq(e))),
            }
        }
        FormulaAst::Congruent { .. } => {
            return Err(CliError::resolve(owner, "congruences have no meaning over Q"))
        }
        FormulaAst::Exists(..) => {
            return Err(CliError::resolve(owner, "quantifiers are not supported over Q"))
        }
        FormulaAst::Not(g) => QFormula::not(dense(g, scope, owner)?),
        FormulaAst::And(gs) => {
            QFormula::And(gs.iter().map(|g| dense(g, scope, owner)).collect::<Result<_, _>>()?)
        }
        FormulaAst::Or(gs) => {
            QFormula::Or(gs.iter().map(|g| dense(g, scope, owner)).collect::<Result<_, _>>()?)
        }
    })
}

/// A set declaration compiled over `Z^n`, with its variable names.
#[derive(Clone, Debug)]
pub struct ResolvedSet {
    pub names: Vec<String>,
    pub set: PresburgerSet,
}

fn set_vars(d: &SetDecl) -> Result<Vec<String>, CliError> {
    let free = d.formula.free_vars();
    match &d.vars {
        None => Ok(free),
        Some(vs) => {
            if let Some(x) = free.iter().find(|x| !vs.contains(x)) {
                return Err(CliError::resolve(&d.name, format!("unknown variable `{x}`")));
            }
            Ok(vs.clone())
        }
    }
}

fn compile_set(names: &[String], f: &FormulaAst, owner: &str) -> Result<PresburgerSet, CliError> {
    let mut scope = Scope { names: names.to_vec() };
    let formula = presburger(f, &mut scope, owner)?;
    formula.to_set(names.len()).map_err(|e| CliError::Engine {
        command: owner.to_string(),
        source: e,
    })
}

/// Typed view of a [`SpecDocument`].
pub struct Resolver<'a> {
    doc: &'a SpecDocument,
}

impl<'a> Resolver<'a> {
    /// Rejects duplicate names up front.
    pub fn new(doc: &'a SpecDocument) -> Result<Self, CliError> {
        let mut seen = BTreeMap::new();
        for d in &doc.decls {
            if let Some(n) = d.name() {
                if seen.insert(n.to_string(), ()).is_some() {
                    return Err(CliError::resolve(n, "declared more than once"));
                }
            }
        }
        Ok(Resolver { doc })
    }

    fn lookup(&self, name: &str) -> Result<&'a Decl, CliError> {
        self.doc
            .find(name)
            .ok_or_else(|| CliError::resolve(name, "no declaration with this name"))
    }

    fn set_decl(&self, name: &str) -> Result<&'a SetDecl, CliError> {
        match self.lookup(name)? {
            Decl::Set(d) => Ok(d),
            _ => Err(CliError::resolve(name, "not a set")),
        }
    }

    pub fn set(&self, name: &str) -> Result<ResolvedSet, CliError> {
        let d = self.set_decl(name)?;
        let names = set_vars(d)?;
        let set = compile_set(&names, &d.formula, name)?;
        Ok(ResolvedSet { names, set })
    }

    pub fn dense_set(&self, name: &str) -> Result<(Vec<String>, SemilinearSet), CliError> {
        let d = self.set_decl(name)?;
        let names = set_vars(d)?;
        let f = dense(&d.formula, &Scope { names: names.clone() }, name)?;
        let set = SemilinearSet::decompose(names.len(), &f);
        Ok((names, set))
    }

    pub fn symbols(&self) -> SymbolRegistry {
        let mut reg = SymbolRegistry::default();
        for s in self.doc.symbols() {
            reg.register(&s.name, s.count.clone());
        }
        reg
    }

    fn region_decl(&self, name: &str) -> Result<&'a RegionDecl, CliError> {
        match self.lookup(name)? {
            Decl::Region(d) => Ok(d),
            _ => Err(CliError::resolve(name, "not a region")),
        }
    }

    /// Coordinate names of a region: declared, or in order of first use.
    pub fn region_coords(&self, name: &str) -> Result<Vec<String>, CliError> {
        let d = self.region_decl(name)?;
        if let Some(c) = &d.coords {
            return Ok(c.clone());
        }
        let mut out: Vec<String> = Vec::new();
        for s in &d.strata {
            for z in &s.zeros {
                if z.parse::<usize>().is_err() && !out.contains(z) {
                    out.push(z.clone());
                }
            }
            for v in s.gamma.free_vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        Ok(out)
    }

    pub fn region(&self, name: &str) -> Result<(Vec<String>, MonomialRegion), CliError> {
        let d = self.region_decl(name)?;
        let coords = self.region_coords(name)?;
        let n = coords.len();
        let mut strata = Vec::new();
        for (k, s) in d.strata.iter().enumerate() {
            let owner = format!("{name} stratum {}", k + 1);
            let mut zeros = Vec::new();
            for z in &s.zeros {
                let i = match z.parse::<usize>() {
                    Ok(i) if (1..=n).contains(&i) => i - 1,
                    Ok(i) => {
                        return Err(CliError::resolve(&owner, format!("coordinate {i} out of range")))
                    }
                    Err(_) => coords
                        .iter()
                        .position(|c| c == z)
                        .ok_or_else(|| CliError::resolve(&owner, format!("unknown coordinate `{z}`")))?,
                };
                zeros.push(i);
            }
            zeros.sort_unstable();
            zeros.dedup();
            let free: Vec<String> = (0..n)
                .filter(|i| !zeros.contains(i))
                .map(|i| coords[i].clone())
                .collect();
            let base = compile_set(&free, &s.gamma, &owner)?;
            if s.fibers.is_empty() {
                return Err(CliError::resolve(&owner, "stratum has no fiber"));
            }
            let m = free.len();
            let mut fibers = Vec::new();
            for fib in &s.fibers {
                let piece = match &fib.on {
                    None => PresburgerSet::universe(m),
                    Some(f) => compile_set(&free, f, &owner)?,
                };
                for cell in piece.into_cells() {
                    fibers.push((cell, fib.class.clone()));
                }
            }
            strata.push(Stratum { zeros, base, fibers });
        }
        let region = MonomialRegion::new(n, strata).map_err(|e| CliError::Engine {
            command: format!("region {name}"),
            source: e,
        })?;
        Ok((coords, region.with_symbols(self.symbols())))
    }

    /// Weight forms bound to the given coordinate names.
    pub fn weight(&self, name: &str, coords: &[String]) -> Result<ValWeight, CliError> {
        let d = match self.lookup(name)? {
            Decl::Weight(d) => d,
            _ => return Err(CliError::resolve(name, "not a weight")),
        };
        let scope = Scope { names: coords.to_vec() };
        let mut w = ValWeight::trivial();
        for (i, e) in &d.kappa {
            if w.kappa.insert(*i, rat_to_vec(e, &scope, name)?).is_some() {
                return Err(CliError::resolve(name, format!("kappa {i} given twice")));
            }
        }
        if let Some(e) = &d.omega {
            w.omega = Some(rat_to_vec(e, &scope, name)?);
        }
        Ok(w)
    }

    pub fn map(&self, name: &str) -> Result<MonomialMap, CliError> {
        let d = match self.lookup(name)? {
            Decl::Map(d) => d,
            _ => return Err(CliError::resolve(name, "not a map")),
        };
        let n = d.matrix.len();
        if d.matrix.iter().any(|r| r.len() != n) || d.units.len() != n {
            return Err(CliError::resolve(name, "matrix must be square and match the units"));
        }
        MonomialMap::new(d.matrix.clone(), d.units.clone()).map_err(|e| CliError::Engine {
            command: format!("map {name}"),
            source: e,
        })
    }
}
