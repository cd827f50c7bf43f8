//! Multi-edge-type degree distributions.
//!
//! Text format, one distribution per line:
//!
//! ```text
//! # rate 0.02 ensemble
//! nu  = 0.0225 r1 x1^2 x2^52 + 0.0175 r1 x1^3 x2^57 + 0.96 r1 x3
//! rho = 0.0165 x1^4 + 0.0035 x1^9 + 0.2475 x2^3 x3 + 0.7125 x2^2 x3
//! ```
//!
//! `r1` marks a transmitted variable type and `r0` a punctured one. Fractions
//! are per variable node (`nu`) and per variable node as well for checks
//! (`rho`), so `sum(nu) = 1` and the rate is `1 - sum(rho) / sum(nu over r1)`.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VariableType {
    pub fraction: f64,
    pub transmitted: bool,
    /// Degree per edge type.
    pub degrees: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckType {
    pub fraction: f64,
    pub degrees: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetEnsemble {
    pub edge_types: usize,
    pub variables: Vec<VariableType>,
    pub checks: Vec<CheckType>,
}

impl VariableType {
    pub fn total_degree(&self) -> u32 {
        self.degrees.iter().sum()
    }
}

impl CheckType {
    pub fn total_degree(&self) -> u32 {
        self.degrees.iter().sum()
    }
}

struct Term {
    coef: f64,
    transmitted: Option<bool>,
    powers: Vec<(usize, u32)>,
}

fn parse_poly(src: &str) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    for raw in src.split('+') {
        let mut toks = raw.split_whitespace();
        let coef_tok = toks.next().ok_or_else(|| Error::Ensemble(format!("empty term in `{src}`")))?;
        let coef: f64 = coef_tok
            .parse()
            .map_err(|_| Error::Ensemble(format!("bad coefficient `{coef_tok}`")))?;
        let mut term = Term { coef, transmitted: None, powers: Vec::new() };
        for tok in toks {
            // allow "x1^2*x2^52" as well as space separation
            for t in tok.split('*').filter(|s| !s.is_empty()) {
                if let Some(r) = t.strip_prefix('r') {
                    term.transmitted = Some(match r {
                        "0" => false,
                        "1" => true,
                        _ => return Err(Error::Ensemble(format!("bad channel marker `{t}`"))),
                    });
                } else if let Some(x) = t.strip_prefix('x') {
                    let (idx, pow) = match x.split_once('^') {
                        Some((i, p)) => (i, p),
                        None => (x, "1"),
                    };
                    let idx: usize = idx.parse().map_err(|_| Error::Ensemble(format!("bad edge type `{t}`")))?;
                    let pow: u32 = pow.parse().map_err(|_| Error::Ensemble(format!("bad degree `{t}`")))?;
                    if idx == 0 {
                        return Err(Error::Ensemble("edge types are numbered from 1".into()));
                    }
                    term.powers.push((idx - 1, pow));
                } else {
                    return Err(Error::Ensemble(format!("unexpected token `{t}`")));
                }
            }
        }
        terms.push(term);
    }
    Ok(terms)
}

fn degree_vec(powers: &[(usize, u32)], n: usize) -> Vec<u32> {
    let mut d = vec![0; n];
    for &(i, p) in powers {
        d[i] += p;
    }
    d
}

impl MetEnsemble {
    pub fn parse(text: &str) -> Result<Self> {
        let mut nu = None;
        let mut rho = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::Ensemble(format!("expected `nu = ...` or `rho = ...`, got `{line}`")))?;
            match key.trim() {
                "nu" => nu = Some(parse_poly(val)?),
                "rho" => rho = Some(parse_poly(val)?),
                k => return Err(Error::Ensemble(format!("unknown distribution `{k}`"))),
            }
        }
        let nu = nu.ok_or_else(|| Error::Ensemble("missing `nu`".into()))?;
        let rho = rho.ok_or_else(|| Error::Ensemble("missing `rho`".into()))?;
        let edge_types = nu
            .iter()
            .chain(&rho)
            .flat_map(|t| t.powers.iter().map(|p| p.0 + 1))
            .max()
            .unwrap_or(0);
        let variables = nu
            .iter()
            .map(|t| VariableType {
                fraction: t.coef,
                transmitted: t.transmitted.unwrap_or(true),
                degrees: degree_vec(&t.powers, edge_types),
            })
            .collect();
        let checks = rho
            .iter()
            .map(|t| CheckType { fraction: t.coef, degrees: degree_vec(&t.powers, edge_types) })
            .collect();
        let e = MetEnsemble { edge_types, variables, checks };
        e.validate()?;
        Ok(e)
    }

    /// The rate-0.02 ensemble used throughout.
    pub fn rate_002() -> Self {
        Self::parse(
            "nu = 0.0225 r1 x1^2 x2^52 + 0.0175 r1 x1^3 x2^57 + 0.96 r1 x3\n\
             rho = 0.0165 x1^4 + 0.0035 x1^9 + 0.2475 x2^3 x3 + 0.7125 x2^2 x3",
        )
        .expect("built-in ensemble is valid")
    }

    /// Standard single-edge-type regular ensemble.
    pub fn regular(dv: u32, dc: u32) -> Result<Self> {
        Self::parse(&format!("nu = 1 r1 x1^{dv}\nrho = {} x1^{dc}", dv as f64 / dc as f64))
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() || self.checks.is_empty() {
            return Err(Error::Ensemble("empty distribution".into()));
        }
        for (name, f) in self
            .variables
            .iter()
            .map(|v| ("nu", v.fraction))
            .chain(self.checks.iter().map(|c| ("rho", c.fraction)))
        {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Ensemble(format!("{name} coefficient {f} must be positive")));
            }
        }
        if self.variables.iter().any(|v| v.total_degree() == 0) || self.checks.iter().any(|c| c.total_degree() == 0) {
            return Err(Error::Ensemble("node type without edges".into()));
        }
        let s: f64 = self.variables.iter().map(|v| v.fraction).sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::Ensemble(format!("nu coefficients sum to {s}, not 1")));
        }
        for t in 0..self.edge_types {
            let (ev, ec) = (self.var_edges(t), self.check_edges(t));
            if (ev - ec).abs() > SUM_TOL * ev.max(1.0) {
                return Err(Error::Ensemble(format!(
                    "edge type {} unbalanced: {ev} variable sockets vs {ec} check sockets per node",
                    t + 1
                )));
            }
        }
        let r = self.rate();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Ensemble(format!("design rate {r} outside (0, 1)")));
        }
        Ok(())
    }

    /// Edge sockets of type `t` per variable node, variable side.
    pub fn var_edges(&self, t: usize) -> f64 {
        self.variables.iter().map(|v| v.fraction * v.degrees[t] as f64).sum()
    }

    pub fn check_edges(&self, t: usize) -> f64 {
        self.checks.iter().map(|c| c.fraction * c.degrees[t] as f64).sum()
    }

    pub fn transmitted_fraction(&self) -> f64 {
        self.variables.iter().filter(|v| v.transmitted).map(|v| v.fraction).sum()
    }

    pub fn rate(&self) -> f64 {
        let checks: f64 = self.checks.iter().map(|c| c.fraction).sum();
        let tx = self.transmitted_fraction();
        (tx - checks) / tx
    }

    pub fn to_text(&self) -> String {
        fn mono(d: &[u32]) -> String {
            d.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| if p == 1 { format!("x{}", i + 1) } else { format!("x{}^{p}", i + 1) })
                .collect::<Vec<_>>()
                .join(" ")
        }
        let nu: Vec<String> = self
            .variables
            .iter()
            .map(|v| format!("{} r{} {}", v.fraction, v.transmitted as u8, mono(&v.degrees)))
            .collect();
        let rho: Vec<String> = self.checks.iter().map(|c| format!("{} {}", c.fraction, mono(&c.degrees))).collect();
        format!("nu = {}\nrho = {}\n", nu.join(" + "), rho.join(" + "))
    }

    /// Content hash used to key matrix cache files.
    pub fn hash(&self) -> String {
        let d = Sha256::digest(self.to_text().as_bytes());
        d[..12].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same ensemble with edge types renumbered, `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.edge_types];
        if perm.len() != self.edge_types || perm.iter().any(|&p| p >= self.edge_types || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::param("perm", "not a permutation of the edge types"));
        }
        let remap = |d: &[u32]| {
            let mut out = vec![0; d.len()];
            for (old, &deg) in d.iter().enumerate() {
                out[perm[old]] = deg;
            }
            out
        };
        Ok(MetEnsemble {
            edge_types: self.edge_types,
            variables: self.variables.iter().map(|v| VariableType { degrees: remap(&v.degrees), ..v.clone() }).collect(),
            checks: self.checks.iter().map(|c| CheckType { degrees: remap(&c.degrees), ..c.clone() }).collect(),
        })
    }
}
