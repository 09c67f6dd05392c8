//! Command implementations behind the `mpgame` binary, kept in the library
//! so that reports can be produced and checked from tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counterexample::{build_cex_game, horizon_flip, k_star, write_flip_csv};
use crate::entropy::{
    self, brute_force_entropy_values, random_entropy_game, solve_entropy_game, verify_log_certificate, AlternatingEntropyGame,
    EntropyBruteError, EntropyGame, EntropySolveError, EntropySpec, ParamError, ParamRequest,
};
use crate::numeric::{parse_ratio, Ext, ExtVec, Int, RationalInterval};
use crate::stochastic::{
    brute_force_values, random_game, solve_constant_value, solve_full, solve_top_class, verify_certificate, winner,
    AlternatingGame, BruteForceError, RandomSpec, SolveError, StochasticGame,
};
use crate::value_iteration::{Certificate, Direction, Winner};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("iteration cap reached after {0} iterations")]
    Exhausted(u64),
    #[error("{0}")]
    Budget(String),
    #[error("certificate {index} fails at state {state}: {detail}")]
    Rejected { index: usize, state: String, detail: String },
}

impl CliError {
    /// 1 input, 2 iteration cap, 3 budget, 4 rejected certificate.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Exhausted(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Rejected { .. } => 4,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::TooLarge => CliError::Budget(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<BruteForceError> for CliError {
    fn from(e: BruteForceError) -> Self {
        CliError::Budget(e.to_string())
    }
}

impl From<EntropyBruteError> for CliError {
    fn from(e: EntropyBruteError) -> Self {
        match e {
            EntropyBruteError::Budget { .. } => CliError::Budget(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<EntropySolveError> for CliError {
    fn from(e: EntropySolveError) -> Self {
        match &e {
            EntropySolveError::Params(ParamError::Budget { .. }) => CliError::Budget(e.to_string()),
            EntropySolveError::Dominion(crate::dominion::DominionError::CallLimit(_)) => {
                CliError::Budget(e.to_string())
            }
            EntropySolveError::Iteration(_) => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum InstanceStats {
    Smpg { n: usize, m: u64, w: u64, s: usize },
    Entropy { n: usize, w: u64, r: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueRepr {
    Exact(String),
    Interval { lo: String, hi: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateValue {
    pub state: String,
    pub value: ValueRepr,
}

/// A certificate over the states it names. Entropy certificates are in the
/// log domain and also name the Tribune and People states of their block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertRecord {
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_states: Option<Vec<String>>,
    pub lam: String,
    pub vec: Vec<String>,
    pub direction: Direction,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyMaps {
    pub sigma: BTreeMap<String, String>,
    pub tau: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub stats: Option<InstanceStats>,
    pub verdict: Option<String>,
    pub values: Vec<StateValue>,
    pub top_class: Option<Vec<String>>,
    pub certificates: Vec<CertRecord>,
    pub strategies: Option<StrategyMaps>,
    pub oracle_calls: Option<u64>,
    pub iterations: Option<u64>,
    pub wall_time_us: u64,
    pub notes: BTreeMap<String, String>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            command,
            stats: None,
            verdict: None,
            values: Vec::new(),
            top_class: None,
            certificates: Vec::new(),
            strategies: None,
            oracle_calls: None,
            iterations: None,
            wall_time_us: 0,
            notes: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(input)
    }

    /// Plain-text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(v) = &self.verdict {
            out += &format!("{v}\n");
        }
        if let Some(tc) = &self.top_class {
            out += &format!("top class: {}\n", tc.join(" "));
        }
        for sv in &self.values {
            match &sv.value {
                ValueRepr::Exact(v) => out += &format!("{}\t{}\n", sv.state, v),
                ValueRepr::Interval { lo, hi } => out += &format!("{}\t[{}, {}]\n", sv.state, lo, hi),
            }
        }
        if let Some(s) = &self.strategies {
            for (a, b) in &s.sigma {
                out += &format!("sigma {a} -> {b}\n");
            }
            for (a, b) in &s.tau {
                out += &format!("tau {a} -> {b}\n");
            }
        }
        for (k, v) in &self.notes {
            out += &format!("{k}: {v}\n");
        }
        if let Some(c) = self.oracle_calls {
            out += &format!("oracle calls: {c}\n");
        }
        out
    }
}

/// Anything that carries certificates, a full report included.
#[derive(Debug, Clone, Deserialize)]
pub struct CertificateFile {
    pub certificates: Vec<CertRecord>,
}

pub enum Instance {
    Smpg(StochasticGame),
    Entropy(EntropyGame),
}

#[derive(Deserialize)]
struct Tag {
    #[serde(rename = "type")]
    kind: String,
}

/// Dispatches on the `"type"` field: `smpg`, `smpg-alt`, `entropy` or
/// `entropy-alt`.
pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    let tag: Tag = serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid JSON: {e}")))?;
    match tag.kind.as_str() {
        "smpg" => Ok(Instance::Smpg(StochasticGame::from_json(text).map_err(input)?)),
        "smpg-alt" => {
            let g = AlternatingGame::from_json(text).map_err(input)?;
            Ok(Instance::Smpg(g.convert().map_err(input)?))
        }
        "entropy" => Ok(Instance::Entropy(EntropyGame::from_json(text).map_err(input)?)),
        "entropy-alt" => {
            let g = AlternatingEntropyGame::from_json(text).map_err(input)?;
            Ok(Instance::Entropy(g.convert().map_err(input)?))
        }
        other => Err(CliError::Input(format!("unknown game type {other:?}"))),
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Winner,
    Value,
    TopClass,
    Full,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub budget: Option<u128>,
    pub tol: BigRational,
    pub params: ParamRequest,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            budget: None,
            tol: BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64)),
            params: ParamRequest::Certified,
        }
    }
}

fn ext_str<I: Int>(e: &Ext<I>) -> String {
    match e {
        Ext::NegInf => "-inf".into(),
        Ext::Fin(r) => r.to_string(),
    }
}

fn parse_ext<I: Int>(s: &str) -> Result<Ext<I>, CliError> {
    if s.trim() == "-inf" {
        Ok(Ext::NegInf)
    } else {
        parse_ratio(s).map(Ext::Fin).map_err(CliError::Input)
    }
}

/// Fractional digits `d` with `10^-d ≤ tol`, at most 60.
fn digits_for(tol: &BigRational) -> usize {
    let mut d = 0;
    let mut unit = BigRational::one();
    let ten = BigRational::from_integer(BigInt::from(10));
    while unit > *tol && d < 60 {
        unit /= &ten;
        d += 1;
    }
    d
}

fn decimal(v: &BigInt, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let (q, r) = v.abs().div_rem(&scale);
    let sign = if v.is_negative() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{q}");
    }
    format!("{sign}{q}.{:0>width$}", r.to_string(), width = digits)
}

/// Decimal endpoints rounded outward.
pub fn decimal_interval(iv: &RationalInterval<BigInt>, digits: usize) -> (String, String) {
    let scale = BigRational::from_integer(BigInt::from(10).pow(digits as u32));
    let lo = (&iv.lo * &scale).floor().to_integer();
    let hi = (&iv.hi * &scale).ceil().to_integer();
    (decimal(&lo, digits), decimal(&hi, digits))
}

fn cert_record<I: Int>(cert: &Certificate<I>, states: Vec<String>) -> CertRecord {
    CertRecord {
        states,
        t_states: None,
        p_states: None,
        lam: cert.lam.to_string(),
        vec: cert.vec.iter().map(ext_str).collect(),
        direction: cert.direction,
    }
}

fn ids(all: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| all[i].clone()).collect()
}

fn smpg_stats(game: &StochasticGame) -> InstanceStats {
    let s = game.stats();
    InstanceStats::Smpg { n: s.n, m: s.m, w: s.w, s: s.s }
}

fn solve_smpg(game: &StochasticGame, mode: Mode, report: &mut RunReport) -> Result<(), CliError> {
    report.stats = Some(smpg_stats(game));
    let all: Vec<String> = game.min_ids.clone();
    match mode {
        Mode::Winner => match winner(game) {
            Winner::Decided(v) => {
                report.verdict = Some(v.outcome.to_string());
                report.iterations = Some(v.iterations);
                report.notes.insert("witness".into(), v.witness.iter().map(ext_str).collect::<Vec<_>>().join(" "));
            }
            Winner::Exhausted { iterations, .. } => {
                report.verdict = Some("Exhausted".into());
                report.iterations = Some(iterations);
                return Err(CliError::Exhausted(iterations));
            }
        },
        Mode::Value => {
            let cv = solve_constant_value(game)?;
            report.verdict = Some(cv.value.to_string());
            report.values = all
                .iter()
                .map(|s| StateValue { state: s.clone(), value: ValueRepr::Exact(cv.value.to_string()) })
                .collect();
            report.certificates = vec![cert_record(&cv.sub, all.clone()), cert_record(&cv.sup, all.clone())];
            report.strategies = Some(StrategyMaps {
                sigma: cv.strategies.sigma.iter().enumerate().map(|(j, &i)| (all[j].clone(), game.max_ids[i].clone())).collect(),
                tau: cv.strategies.tau.iter().enumerate().map(|(i, &k)| (game.max_ids[i].clone(), game.nat_ids[k].clone())).collect(),
            });
            report.oracle_calls = Some(cv.oracle_calls);
            report.iterations = Some(cv.iterations);
        }
        Mode::TopClass => {
            let tc = solve_top_class(game)?;
            report.top_class = Some(ids(&all, &tc.states));
            report.oracle_calls = Some(tc.oracle_calls);
        }
        Mode::Full => {
            let fs = solve_full(game)?;
            let top = ids(&all, &fs.top.states);
            report.verdict = Some(fs.value.value.to_string());
            report.values = top
                .iter()
                .map(|s| StateValue { state: s.clone(), value: ValueRepr::Exact(fs.value.value.to_string()) })
                .collect();
            report.certificates = vec![cert_record(&fs.value.sub, top.clone()), cert_record(&fs.value.sup, top.clone())];
            report.strategies = Some(StrategyMaps {
                sigma: fs.sigma.iter().zip(&top).map(|(&i, s)| (s.clone(), game.max_ids[i].clone())).collect(),
                tau: fs.tau.iter().zip(&fs.max_states).map(|(&k, &i)| (game.max_ids[i].clone(), game.nat_ids[k].clone())).collect(),
            });
            report.top_class = Some(top);
            report.oracle_calls = Some(fs.top.oracle_calls + fs.value.oracle_calls);
            report.iterations = Some(fs.value.iterations);
        }
    }
    Ok(())
}

fn solve_entropy(game: &EntropyGame, mode: Mode, opts: &Options, report: &mut RunReport) -> Result<(), CliError> {
    report.stats = Some(InstanceStats::Entropy { n: game.n(), w: game.w(), r: None });
    if mode == Mode::Winner {
        return Err(CliError::Input("winner mode applies to stochastic games only".into()));
    }
    let budget = opts.budget.unwrap_or(entropy::ENTROPY_PAIR_BUDGET);
    let sol = solve_entropy_game(game, &opts.params, budget)?;
    let digits = digits_for(&opts.tol);
    report.top_class = Some(ids(&game.d_ids, &sol.blocks[0].states));
    report.oracle_calls = Some(sol.oracle_calls());
    report.notes.insert("blocks".into(), sol.blocks.len().to_string());
    if mode == Mode::TopClass {
        return Ok(());
    }
    report.values = sol
        .values
        .iter()
        .zip(&game.d_ids)
        .map(|(iv, s)| {
            let (lo, hi) = decimal_interval(iv, digits);
            StateValue { state: s.clone(), value: ValueRepr::Interval { lo, hi } }
        })
        .collect();
    if mode == Mode::Full {
        report.strategies = Some(StrategyMaps {
            sigma: sol.strategies.sigma.iter().enumerate().map(|(d, &t)| (game.d_ids[d].clone(), game.t_ids[t].clone())).collect(),
            tau: sol.strategies.tau.iter().enumerate().map(|(t, &p)| (game.t_ids[t].clone(), game.p_ids[p].clone())).collect(),
        });
        for b in &sol.blocks {
            for c in [&b.sub, &b.sup] {
                let mut rec = cert_record(c, ids(&game.d_ids, &b.states));
                rec.t_states = Some(ids(&game.t_ids, &b.t_states));
                rec.p_states = Some(ids(&game.p_ids, &b.p_states));
                report.certificates.push(rec);
            }
        }
    }
    Ok(())
}

fn finish(report: &mut RunReport, start: Instant) {
    report.wall_time_us = u64::try_from(start.elapsed().as_micros()).unwrap_or(u64::MAX);
}

/// `solve`. On an exhausted iteration cap the partial report is returned
/// alongside the error.
pub fn cmd_solve(
    instance: &Instance,
    mode: Mode,
    opts: &Options,
    command: Vec<String>,
) -> (RunReport, Result<(), CliError>) {
    let start = Instant::now();
    let mut report = RunReport::new(command);
    let res = match instance {
        Instance::Smpg(g) => solve_smpg(g, mode, &mut report),
        Instance::Entropy(g) => solve_entropy(g, mode, opts, &mut report),
    };
    finish(&mut report, start);
    (report, res)
}

fn index_of(all: &[String], names: &[String]) -> Result<Vec<usize>, CliError> {
    names
        .iter()
        .map(|s| all.iter().position(|x| x == s).ok_or_else(|| CliError::Input(format!("unknown state {s:?}"))))
        .collect()
}

fn parse_cert<I: Int>(rec: &CertRecord) -> Result<Certificate<I>, CliError> {
    Ok(Certificate {
        lam: parse_ratio(&rec.lam).map_err(CliError::Input)?,
        vec: ExtVec(rec.vec.iter().map(|s| parse_ext(s)).collect::<Result<_, _>>()?),
        direction: rec.direction,
    })
}

fn mask(idx: &[usize], n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in idx {
        m[i] = true;
    }
    m
}

/// Exact re-verification of every certificate; the first failure names
/// the violated state.
pub fn cmd_certify(instance: &Instance, certs: &[CertRecord], command: Vec<String>) -> (RunReport, Result<(), CliError>) {
    let start = Instant::now();
    let mut report = RunReport::new(command);
    let res = certify_all(instance, certs);
    report.verdict = Some(match &res {
        Ok(()) => "pass".into(),
        Err(e) => format!("fail: {e}"),
    });
    report.notes.insert("certificates".into(), certs.len().to_string());
    finish(&mut report, start);
    (report, res)
}

fn certify_all(instance: &Instance, certs: &[CertRecord]) -> Result<(), CliError> {
    for (index, rec) in certs.iter().enumerate() {
        match instance {
            Instance::Smpg(g) => {
                let states = index_of(&g.min_ids, &rec.states)?;
                let cert: Certificate<i128> = parse_cert(rec)?;
                if cert.vec.len() != states.len() {
                    return Err(CliError::Input(format!("certificate {index}: vector length {} for {} states", cert.vec.len(), states.len())));
                }
                let full = states.len() == g.n() && states.iter().enumerate().all(|(k, &j)| k == j);
                let subset = if full { None } else { Some(states.as_slice()) };
                if let Some(s) = subset {
                    if !crate::stochastic::graph_is_dominion(g, s) {
                        return Err(CliError::Input(format!("certificate {index}: states are not a dominion")));
                    }
                }
                verify_certificate(g, subset, &cert).map_err(|v| CliError::Rejected {
                    index,
                    state: rec.states[v.coord].clone(),
                    detail: v.to_string(),
                })?;
            }
            Instance::Entropy(g) => {
                let d = index_of(&g.d_ids, &rec.states)?;
                let t = index_of(&g.t_ids, rec.t_states.as_deref().unwrap_or_default())?;
                let p = index_of(&g.p_ids, rec.p_states.as_deref().unwrap_or_default())?;
                let sub = if rec.t_states.is_none() && d.len() == g.n() {
                    g.clone()
                } else {
                    g.induced(&mask(&d, g.n()), &mask(&t, g.t_ids.len()), &mask(&p, g.p_ids.len())).map_err(input)?.0
                };
                let cert: Certificate<BigInt> = parse_cert(rec)?;
                if cert.vec.len() != sub.n() {
                    return Err(CliError::Input(format!("certificate {index}: vector length {} for {} states", cert.vec.len(), sub.n())));
                }
                verify_log_certificate(&sub, &cert).map_err(|v| CliError::Rejected {
                    index,
                    state: rec.states[v.coord].clone(),
                    detail: v.to_string(),
                })?;
            }
        }
    }
    Ok(())
}

/// Pair table rows for `brute`: one row per pair, one column per state.
pub struct PairTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn cmd_brute(instance: &Instance, opts: &Options, command: Vec<String>) -> Result<(RunReport, PairTable), CliError> {
    let start = Instant::now();
    let mut report = RunReport::new(command);
    let table = match instance {
        Instance::Smpg(g) => {
            report.stats = Some(smpg_stats(g));
            let b = brute_force_values(g, None, None)?;
            report.values = g
                .min_ids
                .iter()
                .zip(&b.chi)
                .map(|(s, v)| StateValue { state: s.clone(), value: ValueRepr::Exact(v.to_string()) })
                .collect();
            report.top_class = Some(ids(&g.min_ids, &b.argmax()));
            let mut header = vec!["sigma".to_string(), "tau".to_string()];
            header.extend(g.min_ids.iter().cloned());
            let rows = b
                .pairs
                .iter()
                .map(|pg| {
                    let mut row = vec![join(&pg.pair.sigma, &g.max_ids), join(&pg.pair.tau, &g.nat_ids)];
                    row.extend(pg.gains.iter().map(|v| v.to_string()));
                    row
                })
                .collect();
            PairTable { header, rows }
        }
        Instance::Entropy(g) => {
            let budget = opts.budget.unwrap_or(entropy::ENTROPY_PAIR_BUDGET);
            let b = brute_force_entropy_values(g, budget)?;
            report.stats = Some(InstanceStats::Entropy { n: g.n(), w: g.w(), r: Some(b.profile.r) });
            let digits = digits_for(&opts.tol);
            report.values = g
                .d_ids
                .iter()
                .zip(&b.values)
                .map(|(s, iv)| {
                    let (lo, hi) = decimal_interval(iv, digits);
                    StateValue { state: s.clone(), value: ValueRepr::Interval { lo, hi } }
                })
                .collect();
            report.top_class = Some(ids(&g.d_ids, &b.argmax()));
            let mut header = vec!["sigma".to_string(), "tau".to_string()];
            header.extend(g.d_ids.iter().map(|s| format!("{s}_lo")).chain(g.d_ids.iter().map(|s| format!("{s}_hi"))));
            let rows = b
                .pairs
                .iter()
                .map(|(pair, cls)| {
                    let mut row = vec![join(&pair.sigma, &g.t_ids), join(&pair.tau, &g.p_ids)];
                    let ivs: Vec<(String, String)> = cls.iter().map(|&c| decimal_interval(&b.classes[c], digits)).collect();
                    row.extend(ivs.iter().map(|x| x.0.clone()));
                    row.extend(ivs.iter().map(|x| x.1.clone()));
                    row
                })
                .collect();
            PairTable { header, rows }
        }
    };
    finish(&mut report, start);
    Ok((report, table))
}

fn join(idx: &[usize], names: &[String]) -> String {
    idx.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(" ")
}

pub fn write_table<W: std::io::Write>(table: &PairTable, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the counterexample game and reports the `k*` bracket and, when
/// asked, the first flip horizon.
pub fn cmd_gen_cex(
    n: usize,
    w: u64,
    out: &Path,
    flip: Option<usize>,
    trace: Option<&mut dyn std::io::Write>,
    opts: &Options,
    command: Vec<String>,
) -> Result<RunReport, CliError> {
    if n < 2 || w < 1 {
        return Err(CliError::Input("gen-cex needs n >= 2 and W >= 1".into()));
    }
    let start = Instant::now();
    let mut report = RunReport::new(command);
    let cex = build_cex_game(n, w);
    fs::write(out, cex.game.to_json()).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    report.stats = Some(InstanceStats::Entropy { n: cex.game.n(), w: cex.game.w(), r: None });
    let k = k_star(n, w, &opts.tol);
    let (lo, hi) = decimal_interval(&k, digits_for(&opts.tol));
    report.notes.insert("k_star".into(), format!("[{lo}, {hi}]"));
    report.notes.insert("significant_people".into(), cex.significant_people().to_string());
    if let Some(k_max) = flip {
        let t = horizon_flip(n, w, k_max);
        report.notes.insert("flip".into(), t.flip.map_or("none".into(), |f| f.to_string()));
        if let Some(sink) = trace {
            write_flip_csv(&t, sink).map_err(input)?;
        }
    }
    finish(&mut report, start);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenBackend {
    Smpg,
    Entropy,
}

/// `count` games from consecutive seeds starting at `seed`, as JSON.
pub fn cmd_gen_random(backend: GenBackend, seed: u64, count: usize) -> Vec<String> {
    (0..count as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            match backend {
                GenBackend::Smpg => random_game(&RandomSpec::default(), &mut rng).to_json(),
                GenBackend::Entropy => random_entropy_game(&EntropySpec::default(), &mut rng).to_json(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub micros: u64,
    pub oracle_calls: u64,
    pub status: String,
}

/// Times `solve` on random instances.
pub fn cmd_bench(backend: GenBackend, mode: Mode, seed: u64, count: usize, opts: &Options) -> Vec<BenchRow> {
    cmd_gen_random(backend, seed, count)
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let inst = parse_instance(text).expect("generated games parse");
            let n = match &inst {
                Instance::Smpg(g) => g.n(),
                Instance::Entropy(g) => g.n(),
            };
            let (rep, res) = cmd_solve(&inst, mode, opts, Vec::new());
            BenchRow {
                seed: seed.wrapping_add(i as u64),
                n,
                micros: rep.wall_time_us,
                oracle_calls: rep.oracle_calls.unwrap_or(0),
                status: match res {
                    Ok(()) => "ok".into(),
                    Err(e) => format!("exit {}", e.exit_code()),
                },
            }
        })
        .collect()
}

pub fn write_bench<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a tolerance given as `p/q`, a decimal or scientific notation.
pub fn parse_tol(s: &str) -> Result<BigRational, CliError> {
    let t = s.trim();
    let r = match t.split_once(['e', 'E']) {
        Some((m, e)) => {
            let m: BigRational = parse_ratio(m).map_err(CliError::Input)?;
            let e: i32 = e.parse().map_err(|_| CliError::Input(format!("bad exponent in {t:?}")))?;
            let p = BigRational::from_integer(BigInt::from(10).pow(e.unsigned_abs()));
            if e < 0 {
                m / p
            } else {
                m * p
            }
        }
        None => parse_ratio(t).map_err(CliError::Input)?,
    };
    if !r.is_positive() {
        return Err(CliError::Input("tolerance must be positive".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CYCLE: &str = r#"{"type":"smpg","min_states":["a"],"max_states":["b"],"nat_states":["c"],
        "edges":[{"from":"a","to":"b","a":0},{"from":"b","to":"c","b":2},{"from":"c","to":"a"}],"denominator":1}"#;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimals_round_outward() {
        let iv = RationalInterval { lo: q(-1, 3), hi: q(2, 3) };
        assert_eq!(decimal_interval(&iv, 3), ("-0.334".to_string(), "0.667".to_string()));
        assert_eq!(decimal_interval(&RationalInterval::point(q(5, 1)), 2), ("5.00".to_string(), "5.00".to_string()));
        assert_eq!(digits_for(&q(1, 1_000_000_000)), 9);
        assert_eq!(digits_for(&q(3, 1000)), 3);
    }

    #[test]
    fn tolerances_parse() {
        assert_eq!(parse_tol("1e-9").unwrap(), q(1, 1_000_000_000));
        assert_eq!(parse_tol("1/8").unwrap(), q(1, 8));
        assert_eq!(parse_tol("0.25").unwrap(), q(1, 4));
        assert!(parse_tol("0").is_err());
        assert!(parse_tol("x").is_err());
    }

    #[test]
    fn winner_on_the_cycle() {
        let inst = parse_instance(CYCLE).unwrap();
        let (rep, res) = cmd_solve(&inst, Mode::Winner, &Options::default(), vec![]);
        assert!(res.is_ok());
        assert_eq!(rep.verdict.as_deref(), Some("MaxWinsAll"));
    }

    #[test]
    fn unknown_type_is_an_input_error() {
        let e = parse_instance(r#"{"type":"parity"}"#).err().unwrap();
        assert_eq!(e.exit_code(), 1);
        assert_eq!(parse_instance("{").err().unwrap().exit_code(), 1);
    }

    #[test]
    fn corrupted_certificate_is_rejected() {
        let inst = parse_instance(CYCLE).unwrap();
        let (rep, _) = cmd_solve(&inst, Mode::Value, &Options::default(), vec![]);
        assert!(cmd_certify(&inst, &rep.certificates, vec![]).1.is_ok());
        let mut bad = rep.certificates.clone();
        let lam: BigRational = parse_ratio(&bad[0].lam).unwrap();
        bad[0].lam = (lam + BigRational::one()).to_string();
        match cmd_certify(&inst, &bad, vec![]).1 {
            Err(CliError::Rejected { index: 0, state, .. }) => assert_eq!(state, "a"),
            r => panic!("{r:?}"),
        }
    }
}
