//! Parity-check matrix construction for a MET ensemble.
//!
//! Node counts are rounded from the ensemble fractions and the residual socket
//! mismatch per edge type is absorbed by moving single sockets on check nodes.
//! Edges are then placed by random socket matching that rejects repeated
//! edges and, while it can, 4-cycles.
//!
//! When the ensemble has the usual low-rate shape (an accumulator edge type
//! whose checks carry only that type, plus one degree-one variable hanging off
//! every other check) the accumulator is laid out as a staircase so that the
//! code is systematically encodable in linear time. Other ensembles get no
//! encoder and their decoding benchmarks use the all-zero codeword.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::ensemble::MetEnsemble;
use crate::error::{Error, Result};
use crate::random::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct ParityMatrix {
    pub n: usize,
    pub m: usize,
    /// Dimension of the code, `n - rank(H)` for the layouts built here.
    pub k: usize,
    /// Edge endpoints, edges sorted by check.
    pub edge_var: Vec<u32>,
    pub edge_type: Vec<u8>,
    pub check_ptr: Vec<u32>,
    /// Edge ids grouped by variable.
    pub var_ptr: Vec<u32>,
    pub var_edges: Vec<u32>,
    pub var_type: Vec<u8>,
    pub encoder: Option<Staircase>,
    pub ensemble_hash: String,
    pub seed: String,
}

/// Linear-time encoder layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Staircase {
    /// Free positions, filled with data.
    pub info: Vec<u32>,
    /// Accumulator checks in staircase order.
    pub acc_checks: Vec<u32>,
    /// `parity[j]` joins `acc_checks[j]` and `acc_checks[j + 1]`; the last
    /// one closes the chain on checks `r1`, `r2` and the last check.
    pub parity: Vec<u32>,
    pub closing: (u32, u32),
    /// For every other check, the degree-one variable it determines.
    pub tail: Vec<(u32, u32)>,
}

impl ParityMatrix {
    pub fn check_range(&self, c: usize) -> std::ops::Range<usize> {
        self.check_ptr[c] as usize..self.check_ptr[c + 1] as usize
    }

    pub fn var_range(&self, v: usize) -> std::ops::Range<usize> {
        self.var_ptr[v] as usize..self.var_ptr[v + 1] as usize
    }

    pub fn edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_range(v).len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_range(c).len()
    }

    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        (0..self.m).all(|c| self.check_range(c).fold(0u8, |s, e| s ^ bits[self.edge_var[e] as usize]) == 0)
    }

    /// Number of unsatisfied checks.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        (0..self.m)
            .filter(|&c| self.check_range(c).fold(0u8, |s, e| s ^ bits[self.edge_var[e] as usize]) != 0)
            .count()
    }

    /// Random codeword, or the all-zero word when the layout has no encoder.
    pub fn random_codeword(&self, rng: &mut impl Rng) -> Vec<u8> {
        let mut bits = vec![0u8; self.n];
        let Some(st) = &self.encoder else { return bits };
        for &v in &st.info {
            bits[v as usize] = rng.random::<bool>() as u8;
        }
        // accumulator syndromes from the data bits already placed
        let acc: Vec<u8> = st
            .acc_checks
            .iter()
            .map(|&c| self.check_range(c as usize).fold(0u8, |s, e| s ^ bits[self.edge_var[e] as usize]))
            .collect();
        let m = acc.len();
        let (r1, r2) = (st.closing.0 as usize, st.closing.1 as usize);
        // p_j = a_j ^ b_j z, with z the closing parity
        let mut a = vec![0u8; m - 1];
        let mut b = vec![0u8; m - 1];
        for j in 0..m - 1 {
            let hit = (j == r1 || j == r2) as u8;
            let (pa, pb) = if j == 0 { (0, 0) } else { (a[j - 1], b[j - 1]) };
            a[j] = acc[j] ^ pa;
            b[j] = pb ^ hit;
        }
        let z = acc[m - 1] ^ a[m - 2];
        for j in 0..m - 1 {
            bits[st.parity[j] as usize] = a[j] ^ (b[j] & z);
        }
        bits[st.parity[m - 1] as usize] = z;
        for &(c, v) in &st.tail {
            let s = self
                .check_range(c as usize)
                .filter(|&e| self.edge_var[e] != v)
                .fold(0u8, |s, e| s ^ bits[self.edge_var[e] as usize]);
            bits[v as usize] = s;
        }
        bits
    }

    /// Number of 4-cycles. Quadratic in check degree, meant for test sizes.
    pub fn four_cycles(&self) -> usize {
        let mut pairs: std::collections::HashMap<(u32, u32), usize> = Default::default();
        for c in 0..self.m {
            let vs: Vec<u32> = self.check_range(c).map(|e| self.edge_var[e]).collect();
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let key = (vs[i].min(vs[j]), vs[i].max(vs[j]));
                    *pairs.entry(key).or_default() += 1;
                }
            }
        }
        pairs.values().map(|&k| k * (k - 1) / 2).sum()
    }

    fn from_edges(
        n: usize,
        m: usize,
        k: usize,
        mut edges: Vec<(u32, u32, u8)>,
        var_type: Vec<u8>,
        encoder: Option<Staircase>,
        ensemble_hash: String,
        seed: String,
    ) -> Self {
        edges.sort_unstable_by_key(|&(c, v, _)| (c, v));
        let mut check_ptr = vec![0u32; m + 1];
        for &(c, _, _) in &edges {
            check_ptr[c as usize + 1] += 1;
        }
        for i in 0..m {
            check_ptr[i + 1] += check_ptr[i];
        }
        let mut var_ptr = vec![0u32; n + 1];
        for &(_, v, _) in &edges {
            var_ptr[v as usize + 1] += 1;
        }
        for i in 0..n {
            var_ptr[i + 1] += var_ptr[i];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0u32; edges.len()];
        for (e, &(_, v, _)) in edges.iter().enumerate() {
            var_edges[fill[v as usize] as usize] = e as u32;
            fill[v as usize] += 1;
        }
        ParityMatrix {
            n,
            m,
            k,
            edge_var: edges.iter().map(|e| e.1).collect(),
            edge_type: edges.iter().map(|e| e.2).collect(),
            check_ptr,
            var_ptr,
            var_edges,
            var_type,
            encoder,
            ensemble_hash,
            seed,
        }
    }

    /// Plain-text cache: header line then one `check var type` triple per edge.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "parity {} {} {} {} {} {}", self.n, self.m, self.k, self.edges(), self.ensemble_hash, self.seed)?;
        writeln!(w, "types {}", self.var_type.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "))?;
        match &self.encoder {
            None => writeln!(w, "encoder none")?,
            Some(st) => {
                let list = |xs: &[u32]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                writeln!(w, "encoder {} {}", st.closing.0, st.closing.1)?;
                writeln!(w, "info {}", list(&st.info))?;
                writeln!(w, "acc {}", list(&st.acc_checks))?;
                writeln!(w, "parity {}", list(&st.parity))?;
                let tail: Vec<u32> = st.tail.iter().flat_map(|&(c, v)| [c, v]).collect();
                writeln!(w, "tail {}", list(&tail))?;
            }
        }
        for c in 0..self.m {
            for e in self.check_range(c) {
                writeln!(w, "{c} {} {}", self.edge_var[e], self.edge_type[e])?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bad = |what: &str| Error::Format(format!("{}: {what}", path.display()));
        let mut lines = BufReader::new(fs::File::open(path)?).lines();
        let mut next = || -> Result<String> { lines.next().ok_or_else(|| bad("truncated"))?.map_err(Error::from) };
        let head = next()?;
        let h: Vec<&str> = head.split_whitespace().collect();
        if h.len() != 7 || h[0] != "parity" {
            return Err(bad("bad header"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number"));
        let (n, m, k, ne) = (num(h[1])?, num(h[2])?, num(h[3])?, num(h[4])?);
        let (hash, seed) = (h[5].to_string(), h[6].to_string());
        let nums = |line: &str, tag: &str| -> Result<Vec<u32>> {
            let rest = line.strip_prefix(tag).ok_or_else(|| bad(tag))?;
            rest.split_whitespace().map(|s| s.parse::<u32>().map_err(|_| bad(tag))).collect()
        };
        let var_type: Vec<u8> = nums(&next()?, "types")?.into_iter().map(|t| t as u8).collect();
        let enc_line = next()?;
        let encoder = if enc_line == "encoder none" {
            None
        } else {
            let cl = nums(&enc_line, "encoder")?;
            if cl.len() != 2 {
                return Err(bad("encoder"));
            }
            let info = nums(&next()?, "info")?;
            let acc_checks = nums(&next()?, "acc")?;
            let parity = nums(&next()?, "parity")?;
            let tail = nums(&next()?, "tail")?;
            Some(Staircase { info, acc_checks, parity, closing: (cl[0], cl[1]), tail: tail.chunks(2).map(|p| (p[0], p[1])).collect() })
        };
        let mut edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let l = next()?;
            let t = nums(&l, "")?;
            if t.len() != 3 {
                return Err(bad("edge line"));
            }
            edges.push((t[0], t[1], t[2] as u8));
        }
        if var_type.len() != n {
            return Err(bad("type list length"));
        }
        Ok(Self::from_edges(n, m, k, edges, var_type, encoder, hash, seed))
    }

    /// Load from `dir` when a cache entry exists, otherwise build and store it.
    pub fn cached(ensemble: &MetEnsemble, n: usize, src: &RandomSource, dir: &Path) -> Result<Self> {
        let path = dir.join(format!("H-{}-{n}-{}.txt", ensemble.hash(), src.fingerprint()));
        if path.exists() {
            return Self::load(&path);
        }
        let h = construct_matrix(ensemble, n, src)?;
        fs::create_dir_all(dir)?;
        h.save(&path)?;
        Ok(h)
    }
}

/// Node counts for a length-`n` instance.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCounts {
    pub vars: Vec<usize>,
    /// Per check node, per edge type degree. Nodes are grouped by check type.
    pub check_degrees: Vec<Vec<u32>>,
    pub check_type: Vec<usize>,
}

fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let s: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / s * total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut left = total - out.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

pub fn node_counts(e: &MetEnsemble, n: usize) -> Result<NodeCounts> {
    let nt = e.edge_types;
    let check_n: Vec<usize> = e.checks.iter().map(|c| (c.fraction * n as f64).round() as usize).collect();
    let check_sockets = |t: usize| -> usize { e.checks.iter().zip(&check_n).map(|(c, &k)| k * c.degrees[t] as usize).sum() };

    // degree-one variable types are pinned to the check sockets of their edge type
    let mut vars = vec![None; e.variables.len()];
    for t in 0..nt {
        let single: Vec<usize> = (0..e.variables.len())
            .filter(|&i| e.variables[i].total_degree() == 1 && e.variables[i].degrees[t] == 1)
            .collect();
        if single.len() == 1 && e.variables.iter().all(|v| v.degrees[t] == 0 || v.total_degree() == 1) {
            vars[single[0]] = Some(check_sockets(t));
        }
    }
    let pinned: usize = vars.iter().flatten().sum();
    if pinned > n {
        return Err(Error::Construction(format!("n = {n} too small for the degree-one population")));
    }
    let free: Vec<usize> = (0..vars.len()).filter(|&i| vars[i].is_none()).collect();
    let fill = largest_remainder(&free.iter().map(|&i| e.variables[i].fraction).collect::<Vec<_>>(), n - pinned);
    for (&i, k) in free.iter().zip(fill) {
        vars[i] = Some(k);
    }
    let vars: Vec<usize> = vars.into_iter().map(|v| v.unwrap_or(0)).collect();
    if vars.iter().zip(&e.variables).any(|(&k, v)| k == 0 && v.fraction * n as f64 >= 0.5) {
        return Err(Error::Construction("degree rounding emptied a variable type".into()));
    }

    let mut check_degrees = Vec::new();
    let mut check_type = Vec::new();
    for (j, c) in e.checks.iter().enumerate() {
        for _ in 0..check_n[j] {
            check_degrees.push(c.degrees.clone());
            check_type.push(j);
        }
    }
    let m = check_degrees.len();
    for t in 0..nt {
        let want: usize = vars.iter().zip(&e.variables).map(|(&k, v)| k * v.degrees[t] as usize).sum();
        let have = check_sockets(t);
        let cands: Vec<usize> = (0..m).filter(|&c| check_degrees[c][t] > 0).collect();
        if cands.is_empty() && want > 0 {
            return Err(Error::Construction(format!("edge type {} has no check sockets", t + 1)));
        }
        // spread single-socket changes evenly over the check nodes carrying this type
        let diff = want as i64 - have as i64;
        let mut moved = 0;
        let mut i = 0;
        let stride = (cands.len() / (diff.unsigned_abs() as usize).max(1)).max(1);
        let mut passes = 0;
        while moved < diff.unsigned_abs() as usize {
            if i >= cands.len() {
                i = passes + 1;
                passes += 1;
                if passes > stride + 1 {
                    return Err(Error::Construction(format!("cannot balance edge type {}", t + 1)));
                }
                continue;
            }
            let c = cands[i];
            let d = &mut check_degrees[c];
            if diff > 0 {
                d[t] += 1;
                moved += 1;
            } else if d[t] > 1 || (d[t] == 1 && d.iter().sum::<u32>() > 2) {
                d[t] -= 1;
                moved += 1;
            }
            i += stride;
        }
    }
    Ok(NodeCounts { vars, check_degrees, check_type })
}

/// Staircase roles, if the ensemble admits them.
struct Shape {
    acc: usize,
    tail: usize,
}

fn encodable_shape(e: &MetEnsemble) -> Option<Shape> {
    let nt = e.edge_types;
    let tail = (0..nt).find(|&t| {
        e.variables.iter().any(|v| v.degrees[t] == 1 && v.total_degree() == 1)
            && e.variables.iter().all(|v| v.degrees[t] == 0 || v.total_degree() == 1)
    })?;
    let acc = (0..nt).find(|&t| {
        t != tail
            && e.checks.iter().all(|c| c.degrees[t] == 0 || c.total_degree() == c.degrees[t])
            && e.checks.iter().all(|c| c.degrees[t] > 0 || c.degrees[tail] > 0)
            && e.variables.iter().any(|v| v.degrees[t] == 2 && v.degrees[tail] == 0)
            && e.variables.iter().any(|v| v.degrees[t] == 3 && v.degrees[tail] == 0)
    })?;
    Some(Shape { acc, tail })
}

struct Placer {
    /// Variables already attached to each check, excluding degree-one tails.
    check_vars: Vec<Vec<u32>>,
    edges: Vec<(u32, u32, u8)>,
    cycles_accepted: usize,
}

impl Placer {
    /// Attach all `sockets` of variable `v` on edge type `t`, drawing checks
    /// from `pool`. `near` holds the variables within distance two of `v`.
    fn attach(
        &mut self,
        v: u32,
        t: usize,
        sockets: u32,
        pool: &mut Vec<u32>,
        mine: &mut Vec<u32>,
        near: &mut HashSet<u32>,
        rng: &mut ChaCha20Rng,
    ) -> Result<()> {
        for _ in 0..sockets {
            if pool.is_empty() {
                return Err(Error::Construction("ran out of check sockets".into()));
            }
            let mut pick = None;
            let mut fallback = None;
            for _ in 0..64 {
                let i = rng.random_range(0..pool.len());
                let c = pool[i];
                if mine.contains(&c) {
                    continue;
                }
                if self.check_vars[c as usize].iter().any(|w| near.contains(w)) {
                    fallback.get_or_insert(i);
                    continue;
                }
                pick = Some(i);
                break;
            }
            let i = match pick.or(fallback) {
                Some(i) => i,
                None => {
                    // dense end of the matching, scan for any legal socket
                    let found = (0..pool.len()).find(|&i| !mine.contains(&pool[i]));
                    let i = found.ok_or_else(|| Error::Construction(format!("variable {v} cannot avoid a repeated edge")))?;
                    if self.check_vars[pool[i] as usize].iter().any(|w| near.contains(w)) {
                        self.cycles_accepted += 1;
                    }
                    i
                }
            };
            if pick.is_none() && fallback == Some(i) {
                self.cycles_accepted += 1;
            }
            let c = pool.swap_remove(i);
            mine.push(c);
            near.extend(self.check_vars[c as usize].iter().copied());
            self.check_vars[c as usize].push(v);
            self.edges.push((c, v, t as u8));
        }
        Ok(())
    }
}

/// Build a length-`n` parity-check matrix. Deterministic in `src`.
pub fn construct_matrix(e: &MetEnsemble, n: usize, src: &RandomSource) -> Result<ParityMatrix> {
    e.validate()?;
    let counts = node_counts(e, n)?;
    let mut rng = src.child("parity-matrix", n as u64).rng();
    let nt = e.edge_types;
    let m = counts.check_degrees.len();

    let mut var_type = Vec::with_capacity(n);
    for (i, &k) in counts.vars.iter().enumerate() {
        var_type.extend(std::iter::repeat_n(i as u8, k));
    }
    let vdeg = |v: usize| &e.variables[var_type[v] as usize].degrees;

    let mut placer = Placer { check_vars: vec![Vec::new(); m], edges: Vec::new(), cycles_accepted: 0 };
    let shape = encodable_shape(e);
    let mut encoder = None;

    // per edge type pools of check sockets
    let mut pools: Vec<Vec<u32>> = (0..nt)
        .map(|t| {
            let mut p = Vec::new();
            for (c, d) in counts.check_degrees.iter().enumerate() {
                p.extend(std::iter::repeat_n(c as u32, d[t] as usize));
            }
            p
        })
        .collect();

    let mut core: Vec<u32> = (0..n as u32).filter(|&v| vdeg(v as usize).iter().sum::<u32>() > 1).collect();
    core.shuffle(&mut rng);

    let mut pre_placed: Vec<Vec<u32>> = vec![Vec::new(); n];
    if let Some(sh) = &shape {
        let mut acc_checks: Vec<u32> = (0..m as u32).filter(|&c| counts.check_degrees[c as usize][sh.acc] > 0).collect();
        acc_checks.shuffle(&mut rng);
        let ma = acc_checks.len();
        let deg2: Vec<u32> = core.iter().copied().filter(|&v| vdeg(v as usize)[sh.acc] == 2).collect();
        let deg3 = core.iter().copied().find(|&v| vdeg(v as usize)[sh.acc] == 3);
        let accdeg = |c: u32| counts.check_degrees[c as usize][sh.acc];
        if ma >= 3 && deg2.len() >= ma - 1 && deg3.is_some() && acc_checks.iter().all(|&c| accdeg(c) >= 2) {
            let mut parity: Vec<u32> = deg2[..ma - 1].to_vec();
            parity.push(deg3.unwrap_or_default());
            // closing rows need a spare socket beyond the two chain edges
            let spare: Vec<usize> = (0..ma - 1).filter(|&j| accdeg(acc_checks[j]) >= if j == 0 { 2 } else { 3 }).collect();
            if spare.len() >= 2 {
                let a = spare[rng.random_range(0..spare.len())];
                let mut b = a;
                while b == a {
                    b = spare[rng.random_range(0..spare.len())];
                }
                let (r1, r2) = (a.min(b), a.max(b));
                let mut chain = Vec::new();
                for j in 0..ma - 1 {
                    chain.push((acc_checks[j], parity[j]));
                    chain.push((acc_checks[j + 1], parity[j]));
                }
                for c in [acc_checks[ma - 1], acc_checks[r1], acc_checks[r2]] {
                    chain.push((c, parity[ma - 1]));
                }
                let pool = &mut pools[sh.acc];
                let mut used: std::collections::HashMap<u32, u32> = Default::default();
                for &(c, _) in &chain {
                    *used.entry(c).or_default() += 1;
                }
                // drop the consumed sockets from the pool
                pool.retain(|&c| match used.get_mut(&c) {
                    Some(k) if *k > 0 => {
                        *k -= 1;
                        false
                    }
                    _ => true,
                });
                for &(c, v) in &chain {
                    placer.check_vars[c as usize].push(v);
                    placer.edges.push((c, v, sh.acc as u8));
                    pre_placed[v as usize].push(c);
                }
                let parity_set: HashSet<u32> = parity.iter().copied().collect();
                encoder = Some((acc_checks, parity, (r1 as u32, r2 as u32), parity_set));
            }
        }
    }

    // high-degree variables first keeps the tail of the matching loose
    core.sort_by_key(|&v| std::cmp::Reverse(vdeg(v as usize).iter().sum::<u32>()));
    let tail_type = shape.as_ref().map(|s| s.tail);
    for &v in &core {
        let mut mine = pre_placed[v as usize].clone();
        let mut near: HashSet<u32> = mine.iter().flat_map(|&c| placer.check_vars[c as usize].iter().copied()).collect();
        let placed_acc = mine.len() as u32;
        for t in 0..nt {
            let mut want = vdeg(v as usize)[t];
            if Some(t) != tail_type && shape.as_ref().map(|s| s.acc) == Some(t) {
                want -= placed_acc.min(want);
            }
            if want > 0 {
                placer.attach(v, t, want, &mut pools[t], &mut mine, &mut near, &mut rng)?;
            }
        }
    }

    // degree-one variables: a plain random matching, they cannot close cycles
    let mut tails = Vec::new();
    for t in 0..nt {
        let mut ones: Vec<u32> = (0..n as u32)
            .filter(|&v| vdeg(v as usize).iter().sum::<u32>() == 1 && vdeg(v as usize)[t] == 1)
            .collect();
        if ones.is_empty() {
            continue;
        }
        if ones.len() != pools[t].len() {
            return Err(Error::Construction(format!("edge type {} socket mismatch", t + 1)));
        }
        ones.shuffle(&mut rng);
        for (v, c) in ones.into_iter().zip(pools[t].drain(..)) {
            placer.edges.push((c, v, t as u8));
            tails.push((c, v));
        }
    }
    if let Some(t) = pools.iter().position(|p| !p.is_empty()) {
        return Err(Error::Construction(format!("edge type {} has {} unmatched sockets", t + 1, pools[t].len())));
    }

    let (encoder, k) = match encoder {
        Some((acc_checks, parity, closing, parity_set)) => {
            let sh = shape.as_ref().expect("encoder implies shape");
            // one determined tail per non-accumulator check, extra tails are free
            tails.sort_unstable();
            let mut det = Vec::new();
            let mut determined = HashSet::new();
            let mut last = u32::MAX;
            for &(c, v) in &tails {
                if c != last && counts.check_degrees[c as usize][sh.acc] == 0 {
                    det.push((c, v));
                    determined.insert(v);
                    last = c;
                }
            }
            let nonacc = (0..m).filter(|&c| counts.check_degrees[c][sh.acc] == 0).count();
            if det.len() != nonacc {
                (None, n.saturating_sub(m))
            } else {
                let info: Vec<u32> = (0..n as u32).filter(|v| !parity_set.contains(v) && !determined.contains(v)).collect();
                let k = info.len();
                (Some(Staircase { info, acc_checks, parity, closing, tail: det }), k)
            }
        }
        None => (None, n.saturating_sub(m)),
    };
    let h = ParityMatrix::from_edges(n, m, k, placer.edges, var_type, encoder, e.hash(), src.fingerprint());
    Ok(h)
}
