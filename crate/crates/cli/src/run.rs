//! Command dispatch over a parsed spec document.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use igusa_core::genfun::{sum_over_set, uniform_family, ExponentData, RatFun};
use igusa_core::num::lcm;
use igusa_core::padic::{compare, FieldKind, LocalFieldConfig};
use igusa_core::presburger::LinTerm;
use igusa_core::qlinear::QLin;
use igusa_core::vfrag::{
    change_of_variables, check_measure_preserving, integral_class, integrate_ordered, zeta,
    zeta_pieces, MonomialRegion, ValWeight,
};
use igusa_core::semilinear::Verdict;

use crate::ast::{Normalization, SpecDocument};
use crate::error::CliError;
use crate::resolve::Resolver;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    /// Quantifier-free form of a set over `Z^n`.
    Qe { set: String },
    /// Both Euler characteristics of a set read over `Q^n`.
    Euler { set: String },
    /// Class of a region in tensor form.
    Class { region: String, weight: Option<String> },
    /// `Σ_{x∈D} q^{-(Σx + ω(x))} Π T_i^{f_i(x)}`.
    Sum { set: String, weight: Option<String> },
    Zeta { region: String, weight: Option<String> },
    /// Iterated integrals in every coordinate order against the direct one.
    FubiniCheck { region: String, weight: Option<String> },
    CovCheck { region: String, weight: Option<String>, map: String },
    Family { region: String, weight: Option<String> },
    OracleCheck {
        region: String,
        weight: Option<String>,
        field: FieldKind,
        p: u32,
        delta: u32,
        precision: u32,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Qe { .. } => "qe",
            Command::Euler { .. } => "euler",
            Command::Class { .. } => "class",
            Command::Sum { .. } => "sum",
            Command::Zeta { .. } => "zeta",
            Command::FubiniCheck { .. } => "fubini-check",
            Command::CovCheck { .. } => "cov-check",
            Command::Family { .. } => "family",
            Command::OracleCheck { .. } => "oracle-check",
        }
    }

    /// `name arg...` as typed on the command line.
    pub fn echo(&self) -> String {
        let mut parts = vec![self.name().to_string()];
        let mut push = |s: &str| parts.push(s.to_string());
        match self {
            Command::Qe { set } | Command::Euler { set } => push(set),
            Command::Sum { set, weight } => {
                push(set);
                weight.iter().for_each(|w| push(w));
            }
            Command::Class { region, weight }
            | Command::Zeta { region, weight }
            | Command::FubiniCheck { region, weight }
            | Command::Family { region, weight } => {
                push(region);
                weight.iter().for_each(|w| push(w));
            }
            Command::CovCheck { region, weight, map } => {
                push(region);
                weight.iter().for_each(|w| push(w));
                push(map);
            }
            Command::OracleCheck { region, weight, field, p, delta, precision } => {
                push(region);
                weight.iter().for_each(|w| push(w));
                push(&format!("--kind {field} --p {p} --delta {delta} --precision {precision}"));
            }
        }
        parts.join(" ")
    }
}

/// Overrides for the run parameters stored in the document.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub rho: Option<Vec<u32>>,
    pub kappa: Option<Vec<BigRational>>,
    /// Digits after the point for rational outputs.
    pub decimal: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    /// Echo of the command and its arguments.
    pub command: String,
    pub text: String,
    pub json: Value,
    pub passed: bool,
}

impl CommandOutput {
    fn ok(text: String, json: Value) -> Self {
        CommandOutput {
            command: String::new(),
            text,
            json,
            passed: true,
        }
    }

    /// Machine-readable envelope: command echo, payload and arithmetic note.
    pub fn envelope(&self) -> Value {
        json!({
            "command": self.command,
            "result": self.json,
            "arithmetic": "exact rational",
        })
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            4
        }
    }
}

/// Fixed-point decimal rounded half away from zero.
pub fn decimal(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (r.abs() * BigRational::from_integer(scale.clone()) + BigRational::new(1.into(), 2.into()))
        .floor()
        .to_integer();
    let sign = if r.is_negative() && !scaled.is_zero() { "-" } else { "" };
    let int = &scaled / &scale;
    if digits == 0 {
        return format!("{sign}{int}");
    }
    let frac = (&scaled % &scale).to_string();
    format!("{sign}{int}.{}{frac}", "0".repeat(digits - frac.len()))
}

struct Ctx<'a> {
    doc: &'a SpecDocument,
    res: Resolver<'a>,
    opts: &'a Options,
    command: &'static str,
}

impl Ctx<'_> {
    fn engine<T>(&self, r: igusa_core::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| CliError::Engine {
            command: self.command.to_string(),
            source: e,
        })
    }

    fn region_weight(
        &self,
        region: &str,
        weight: &Option<String>,
    ) -> Result<(Vec<String>, MonomialRegion, ValWeight), CliError> {
        let (coords, r) = self.res.region(region)?;
        let w = match weight {
            Some(w) => self.res.weight(w, &coords)?,
            None => ValWeight::trivial(),
        };
        Ok((coords, r, w))
    }

    fn rhos(&self, default: &[u32]) -> Vec<u32> {
        self.opts
            .rho
            .clone()
            .or_else(|| self.doc.rho().map(<[u32]>::to_vec))
            .unwrap_or_else(|| default.to_vec())
    }

    /// Single ramification parameter: the flag must give one value; a
    /// document list contributes its first entry.
    fn rho(&self) -> Result<u32, CliError> {
        let r = match &self.opts.rho {
            Some(v) if v.len() != 1 => {
                return Err(CliError::resolve(
                    self.command,
                    format!("expected a single rho, got {v:?}"),
                ))
            }
            Some(v) => v[0],
            None => self.doc.rho().and_then(|v| v.first().copied()).unwrap_or(1),
        };
        if r == 0 {
            return Err(CliError::resolve(self.command, "rho must be positive"));
        }
        Ok(r)
    }

    fn normalize(&self, z: RatFun, n: usize) -> RatFun {
        match self.doc.normalization() {
            Normalization::UnitIdeal => z,
            Normalization::Classical => z.shift(&[-(n as i64)]),
        }
    }

    fn show(&self, r: &BigRational) -> String {
        match self.opts.decimal {
            Some(k) => decimal(r, k),
            None => r.to_string(),
        }
    }
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Accepted => json!({ "accepted": true }),
        Verdict::Rejected { reason, witness } => json!({
            "accepted": false,
            "reason": reason,
            "witness": witness.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        }),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// `Σ_{x∈D} q^{-(Σx+ω)} Π T_i^{f_i}` with a common denominator for the forms.
fn exponent_data(n: usize, w: &ValWeight) -> ExponentData {
    let mut lq = QLin::from_ints(&vec![1; n], 0);
    if let Some(o) = &w.omega {
        lq = lq.add(o);
    }
    let k = w.num_t();
    let lt: Vec<QLin> = (1..=k)
        .map(|i| w.kappa.get(&i).cloned().unwrap_or_else(|| QLin::zero(n)))
        .collect();
    let den = std::iter::once(&lq)
        .chain(lt.iter())
        .flat_map(|f| f.coeffs.iter().chain(std::iter::once(&f.constant)))
        .fold(BigInt::one(), |acc, c| lcm(&acc, c.denom()));
    let dr = BigRational::from_integer(den.clone());
    let term = |f: &QLin| {
        let int = |c: &BigRational| (c * &dr).to_integer();
        LinTerm::new(f.coeffs.iter().map(int).collect(), int(&f.constant))
    };
    ExponentData::new(term(&lq), lt.iter().map(term).collect()).with_den(den)
}

/// Runs one command against a parsed document.
pub fn run(doc: &SpecDocument, command: &Command, opts: &Options) -> Result<CommandOutput, CliError> {
    let mut out = dispatch(doc, command, opts)?;
    out.command = command.echo();
    Ok(out)
}

fn dispatch(doc: &SpecDocument, command: &Command, opts: &Options) -> Result<CommandOutput, CliError> {
    let ctx = Ctx {
        doc,
        res: Resolver::new(doc)?,
        opts,
        command: command.name(),
    };
    match command {
        Command::Qe { set } => {
            let r = ctx.res.set(set)?;
            let text = r.set.display_with(&r.names);
            Ok(CommandOutput::ok(
                text.clone(),
                json!({ "vars": r.names, "cells": r.set.cells().len(), "empty": r.set.is_empty(), "set": text }),
            ))
        }
        Command::Euler { set } => {
            let (_, s) = ctx.res.dense_set(set)?;
            let e = s.euler();
            Ok(CommandOutput::ok(
                format!("chi_g = {}\nchi_b = {}\nclass = {}", e.chi_g, e.chi_b, e.class),
                json!({ "chi_g": e.chi_g, "chi_b": e.chi_b, "class": e.class.to_string() }),
            ))
        }
        Command::Class { region, weight } => {
            let (_, r, w) = ctx.region_weight(region, weight)?;
            let c = ctx.engine(integral_class(&r, &w))?;
            Ok(CommandOutput::ok(c.to_string(), c.to_json()))
        }
        Command::Sum { set, weight } => {
            let r = ctx.res.set(set)?;
            let w = match weight {
                Some(w) => ctx.res.weight(w, &r.names)?,
                None => ValWeight::trivial(),
            };
            let n = r.names.len();
            let z = ctx.engine(sum_over_set(&r.set, &exponent_data(n, &w)))?;
            Ok(CommandOutput::ok(z.to_string(), z.to_json()))
        }
        Command::Zeta { region, weight } => {
            let (coords, r, w) = ctx.region_weight(region, weight)?;
            let z = ctx.engine(zeta(&r, &w, ctx.rho()?))?;
            let z = ctx.normalize(z, coords.len());
            Ok(CommandOutput::ok(z.to_string(), z.to_json()))
        }
        Command::FubiniCheck { region, weight } => {
            let (coords, r, w) = ctx.region_weight(region, weight)?;
            let rho = ctx.rho()?;
            let direct = ctx.engine(zeta(&r, &w, rho))?;
            let mut lines = vec![format!("direct: {direct}")];
            let mut rows = Vec::new();
            let mut passed = true;
            for order in permutations(coords.len()) {
                let z = ctx.engine(integrate_ordered(&r, &w, &order, rho))?;
                let same = z == direct;
                passed &= same;
                let names: Vec<&str> = order.iter().map(|&i| coords[i].as_str()).collect();
                lines.push(format!(
                    "{}: {}",
                    names.join(" > "),
                    if same { "agree" } else { "DIFFER" }
                ));
                rows.push(json!({ "order": names, "zeta": z.to_string(), "agrees": same }));
            }
            Ok(CommandOutput {
                command: String::new(),
                text: lines.join("\n"),
                json: json!({ "direct": direct.to_string(), "orders": rows, "passed": passed }),
                passed,
            })
        }
        Command::CovCheck { region, weight, map } => {
            let (_, r, w) = ctx.region_weight(region, weight)?;
            let m = ctx.res.map(map)?;
            let rho = ctx.rho()?;
            let (r2, w2) = ctx.engine(change_of_variables(&r, &w, &m))?;
            let before = ctx.engine(zeta(&r, &w, rho))?;
            let after = ctx.engine(zeta(&r2, &w2, rho))?;
            let verdict = ctx.engine(check_measure_preserving(
                &m,
                (&r, w.omega.as_ref()),
                (&r2, w2.omega.as_ref()),
            ))?;
            let same = before == after;
            let passed = same && verdict.is_accepted();
            let mut text = format!(
                "source: {before}\ntarget: {after}\nzeta: {}\nmeasure: {}",
                if same { "agree" } else { "DIFFER" },
                if verdict.is_accepted() { "preserved" } else { "NOT preserved" }
            );
            if let Verdict::Rejected { reason, witness } = &verdict {
                let w: Vec<String> = witness.iter().map(|x| x.to_string()).collect();
                text.push_str(&format!(" ({reason} at [{}])", w.join(", ")));
            }
            Ok(CommandOutput {
                command: String::new(),
                text,
                json: json!({
                    "source": before.to_string(),
                    "target": after.to_string(),
                    "zeta_agrees": same,
                    "measure": verdict_json(&verdict),
                    "passed": passed,
                }),
                passed,
            })
        }
        Command::Family { region, weight } => {
            let (_, r, w) = ctx.region_weight(region, weight)?;
            let rhos = ctx.rhos(&[1, 2, 3, 4]);
            if rhos.contains(&0) {
                return Err(CliError::resolve("family", "rho values must be positive"));
            }
            let pieces = ctx.engine(zeta_pieces(&r, &w))?;
            let rep = ctx.engine(uniform_family(&pieces, &rhos))?;
            let passed = rep.all_certified();
            let mut lines = Vec::new();
            let mut entries = Vec::new();
            for e in &rep.entries {
                lines.push(format!(
                    "rho {}: {} summands, reproduces {}: {}",
                    e.rho,
                    e.summands.len(),
                    e.reproduces,
                    e.zeta
                ));
                entries.push(json!({
                    "rho": e.rho,
                    "zeta": e.zeta.to_string(),
                    "summands": e.summands.iter().map(|s| json!({
                        "m": s.m,
                        "piece": s.piece,
                        "residue": s.residue.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "coefficient": s.coefficient.to_string(),
                        "base": s.base.to_string(),
                    })).collect::<Vec<_>>(),
                    "reproduces": e.reproduces,
                }));
            }
            let certified = rep.checks.iter().filter(|c| c.certified).count();
            lines.push(format!(
                "scaling checks: {certified}/{} certified; mu = {}, nu = {}",
                rep.checks.len(),
                rep.mu,
                rep.nu
            ));
            Ok(CommandOutput {
                command: String::new(),
                text: lines.join("\n"),
                json: json!({
                    "entries": entries,
                    "checks": { "total": rep.checks.len(), "certified": certified },
                    "mu": rep.mu,
                    "nu": rep.nu,
                    "passed": passed,
                }),
                passed,
            })
        }
        Command::OracleCheck { region, weight, field, p, delta, precision } => {
            let (_, r, w) = ctx.region_weight(region, weight)?;
            let cfg = ctx.engine(LocalFieldConfig::new(*field, *p, *delta, *precision))?;
            let kappa = ctx
                .opts
                .kappa
                .clone()
                .or_else(|| ctx.doc.kappa().map(<[BigRational]>::to_vec))
                .unwrap_or_else(|| vec![BigRational::one(); w.num_t()]);
            if kappa.len() != w.num_t() {
                return Err(CliError::resolve(
                    "oracle-check",
                    format!("need {} kappa values, got {}", w.num_t(), kappa.len()),
                ));
            }
            let symbolic = ctx.engine(zeta(&r, &w, 1))?;
            let rep = ctx.engine(compare(&symbolic, &r, &w, &kappa, &cfg))?;
            let mut json = rep.to_json();
            json["field"] = json!(format!("{field}"));
            json["q"] = json!(cfg.q());
            json["precision"] = json!(precision);
            if let Some(k) = ctx.opts.decimal {
                for key in ["truncated", "tail_bound", "symbolic"] {
                    json[format!("{key}_decimal")] = json!(decimal(
                        match key {
                            "truncated" => &rep.truncated,
                            "tail_bound" => &rep.tail_bound,
                            _ => &rep.symbolic,
                        },
                        k
                    ));
                }
            }
            let text = format!(
                "field {field} q={} N={precision}\nsymbolic  = {}\ntruncated = {}\ntail      = {}\nverdict: {}",
                cfg.q(),
                ctx.show(&rep.symbolic),
                ctx.show(&rep.truncated),
                ctx.show(&rep.tail_bound),
                if rep.pass { "pass" } else { "fail" }
            );
            Ok(CommandOutput {
                command: String::new(),
                text,
                json,
                passed: rep.pass,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use igusa_core::num::rat;

    #[test]
    fn decimals_round() {
        assert_eq!(decimal(&rat(80, 27), 4), "2.9630");
        assert_eq!(decimal(&rat(-1, 3), 2), "-0.33");
        assert_eq!(decimal(&rat(1, 200), 2), "0.01");
        assert_eq!(decimal(&rat(7, 2), 0), "4");
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }
}
