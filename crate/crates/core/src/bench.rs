//! Benchmark harness: instance suites, timed decision calls and table/CSV output.

use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::engine::is_totally_unimodular;
use crate::error::Error;
use crate::generators::{gen_network_matrix, gen_odd_cycle_violator, gen_random_signed};
use crate::matrix::TernaryMatrix;
use crate::oracles::{ce_ghouila_houri, st_camion, OracleVerdict};

pub const RANDOM_REPLICATES: usize = 10;
pub const RANDOM_DENSITIES: [f64; 2] = [0.5, 0.25];
/// Times below this are shown as omitted and aggregated as `CLAMPED_SECONDS`.
pub const OMIT_BELOW: f64 = 0.1;
pub const CLAMPED_SECONDS: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Random,
    Network,
    Oddcycle,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Suite::Random),
            "network" => Ok(Suite::Network),
            "oddcycle" => Ok(Suite::Oddcycle),
            _ => Err(Error::Input(format!("unknown suite '{s}'"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Random => "random",
            Suite::Network => "network",
            Suite::Oddcycle => "oddcycle",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Camion submatrix enumeration.
    St,
    /// Ghouila-Houri column enumeration.
    Ce,
    /// Decomposition test.
    Dt,
    /// Decomposition test plus minimal violator.
    Dtv,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "st" => Ok(Method::St),
            "ce" => Ok(Method::Ce),
            "dt" => Ok(Method::Dt),
            "dtv" => Ok(Method::Dtv),
            _ => Err(Error::Input(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::St => "ST",
            Method::Ce => "CE",
            Method::Dt => "DT",
            Method::Dtv => "DTV",
        })
    }
}

pub fn parse_list<T: FromStr<Err = Error>>(s: &str) -> Result<Vec<T>, Error> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Tu,
    NotTu,
    Timeout,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Tu => "tu",
            Verdict::NotTu => "non-tu",
            Verdict::Timeout => "timeout",
        })
    }
}

/// Runs `f` on a worker thread; `None` if it does not finish within `limit`.
/// A timed-out worker is detached and left to finish on its own.
pub fn run_with_limit<T, F>(limit: Option<Duration>, f: F) -> Option<T>
where
    T: Send + 'static,
    F: FnOnce() -> T + Send + 'static,
{
    let Some(limit) = limit else {
        return Some(f());
    };
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(f());
    });
    rx.recv_timeout(limit).ok()
}

/// Wall-clock time of one decision call.
pub fn decide(method: Method, a: &TernaryMatrix, limit: Option<Duration>) -> Result<(Verdict, f64), Error> {
    let start = Instant::now();
    let verdict = match method {
        Method::St | Method::Ce => {
            let v = if method == Method::St { st_camion(a, limit) } else { ce_ghouila_houri(a, limit) };
            match v {
                OracleVerdict::Tu => Verdict::Tu,
                OracleVerdict::NotTu(_) => Verdict::NotTu,
                OracleVerdict::Timeout { .. } => Verdict::Timeout,
            }
        }
        Method::Dt | Method::Dtv => {
            let a = a.clone();
            let want = method == Method::Dtv;
            match run_with_limit(limit, move || is_totally_unimodular(&a, want)) {
                Some(r) => {
                    if r?.tu {
                        Verdict::Tu
                    } else {
                        Verdict::NotTu
                    }
                }
                None => Verdict::Timeout,
            }
        }
    };
    let secs = start.elapsed().as_secs_f64();
    Ok((verdict, secs))
}

pub fn geometric_mean(seconds: &[f64]) -> f64 {
    if seconds.is_empty() {
        return 0.0;
    }
    let s: f64 = seconds.iter().map(|&t| if t < OMIT_BELOW { CLAMPED_SECONDS } else { t }.ln()).sum();
    (s / seconds.len() as f64).exp()
}

fn mix(seed: u64, size: usize, p_index: usize, rep: usize) -> u64 {
    seed ^ ((size as u64) << 32) ^ ((p_index as u64) << 24) ^ rep as u64
}

/// Edge probability for the network suite at a given row count.
pub fn network_p(size: usize) -> f64 {
    (6.0 / (size + 1) as f64).min(0.9)
}

/// Instances of one size, grouped by density.
pub fn suite_instances(suite: Suite, size: usize, seed: u64) -> Result<Vec<(Option<f64>, Vec<TernaryMatrix>)>, Error> {
    match suite {
        Suite::Random => RANDOM_DENSITIES
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let ms = (0..RANDOM_REPLICATES)
                    .map(|r| gen_random_signed(size, p, mix(seed, size, k, r)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((Some(p), ms))
            })
            .collect(),
        Suite::Network => {
            let p = network_p(size);
            let (a, _) = gen_network_matrix(size + 1, p, mix(seed, size, 0, 0))?;
            Ok(vec![(Some(p), vec![a])])
        }
        Suite::Oddcycle => Ok(vec![(None, vec![gen_odd_cycle_violator(size, false, seed)?])]),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub suite: Suite,
    pub size: usize,
    pub p: Option<f64>,
    pub method: Method,
    pub verdicts: Vec<Verdict>,
    /// Geometric mean over replicates, with timeouts counted at the limit.
    pub seconds: f64,
    pub timeout: bool,
}

impl Cell {
    /// The common verdict of all replicates, or "mixed".
    pub fn verdict(&self) -> String {
        match self.verdicts.first() {
            Some(v) if self.verdicts.iter().all(|w| w == v) => v.to_string(),
            Some(_) => "mixed".into(),
            None => "none".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub suite: Suite,
    pub methods: Vec<Method>,
    pub sizes: Vec<usize>,
    pub time_limit: Option<Duration>,
    pub seed: u64,
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<Cell>, Error> {
    let mut cells = Vec::new();
    for &size in &cfg.sizes {
        for (p, matrices) in suite_instances(cfg.suite, size, cfg.seed)? {
            for &method in &cfg.methods {
                let mut verdicts = Vec::new();
                let mut times = Vec::new();
                for a in &matrices {
                    let (v, t) = decide(method, a, cfg.time_limit)?;
                    let t = match (v, cfg.time_limit) {
                        (Verdict::Timeout, Some(l)) => l.as_secs_f64(),
                        _ => t,
                    };
                    verdicts.push(v);
                    times.push(t);
                }
                let timeout = verdicts.contains(&Verdict::Timeout);
                cells.push(Cell { suite: cfg.suite, size, p, method, verdicts, seconds: geometric_mean(&times), timeout });
            }
        }
    }
    Ok(cells)
}

fn fmt_p(p: Option<f64>) -> String {
    p.map_or(String::new(), |p| format!("{p:.4}").trim_end_matches('0').trim_end_matches('.').to_string())
}

pub fn format_csv(cells: &[Cell]) -> String {
    let mut s = String::from("suite,size,p,method,verdict,seconds,timeout\n");
    for c in cells {
        s.push_str(&format!(
            "{},{},{},{},{},{:.4},{}\n",
            c.suite,
            c.size,
            fmt_p(c.p),
            c.method,
            c.verdict(),
            c.seconds,
            c.timeout
        ));
    }
    s
}

/// One row per (size, p), one column per method. Times under 0.1 s are shown
/// as "-", timeouts as ">limit".
pub fn format_table(cells: &[Cell], time_limit: Option<Duration>) -> String {
    let mut methods: Vec<Method> = Vec::new();
    let mut keys: Vec<(usize, Option<f64>)> = Vec::new();
    for c in cells {
        if !methods.contains(&c.method) {
            methods.push(c.method);
        }
        if !keys.contains(&(c.size, c.p)) {
            keys.push((c.size, c.p));
        }
    }
    let mut header = vec!["size".to_string(), "p".into()];
    header.extend(methods.iter().map(|m| m.to_string()));
    header.push("verdict".into());
    let mut rows = vec![header];
    for &(size, p) in &keys {
        let mut row = vec![format!("{size}"), fmt_p(p)];
        let mut verdict = String::new();
        for m in &methods {
            let Some(c) = cells.iter().find(|c| c.size == size && c.p == p && c.method == *m) else {
                row.push(String::new());
                continue;
            };
            row.push(if c.timeout {
                format!(">{}", time_limit.map_or(0.0, |l| l.as_secs_f64()))
            } else if c.seconds < OMIT_BELOW {
                "-".into()
            } else {
                format!("{:.1}", c.seconds)
            });
            let v = c.verdict();
            if verdict.is_empty() && v != "timeout" {
                verdict = v;
            }
        }
        row.push(verdict);
        rows.push(row);
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|k| rows.iter().map(|r| r[k].len()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(x, w)| format!("{x:>w$}")).collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}
