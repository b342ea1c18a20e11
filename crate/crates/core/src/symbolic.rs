//! Periodic orbits of the map, their L/R words, rotation and firing numbers,
//! the Farey tree of words and staircase checks on parameter scans.

use std::fmt;

use num_rational::Rational64;

use crate::bifurcation::ScanSeries;
use crate::error::{Error, Result};
use crate::flow::{hybrid_flow_with, Numerics};
use crate::model::SystemParams;
use crate::strobo::{StroboMap, BORDER_TOL};

pub type Ratio = Rational64;

/// Settings for cycle detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub burn_in: usize,
    pub max_period: usize,
    pub tol: f64,
    /// Extra blocks of `burn_in` iterations allowed while the orbit is still
    /// closing in on a cycle (slowly contracting maps).
    pub max_extensions: usize,
}

/// Required shrink factor of the best return distance per extension block.
const EXTENSION_DECAY: f64 = 0.5;

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions { burn_in: 500, max_period: 64, tol: 1e-9, max_extensions: 64 }
    }
}

/// One period of a periodic orbit, starting from its smallest point.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<f64>,
    pub period: usize,
    /// Lowest spike count along the orbit.
    pub branch_n: u32,
    pub per_point_spikes: Vec<u32>,
}

impl Orbit {
    /// Total spikes over one period of the orbit.
    pub fn total_spikes(&self) -> u64 {
        self.per_point_spikes.iter().map(|&s| s as u64).sum()
    }

    /// Exact firing number `s / p` from the spike counts.
    pub fn eta(&self) -> Ratio {
        Ratio::new(self.total_spikes() as i64, self.period as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detection {
    Periodic(Orbit),
    /// No period up to the cap was found.
    Aperiodic,
}

/// Iterates the map past a burn-in and returns the smallest period whose
/// return distance stays under `tol` for a whole period. When no period
/// closes but the best return distance is still shrinking geometrically, the
/// burn-in is extended block by block, up to `max_extensions` blocks.
pub fn detect_orbit_with(map: &StroboMap, x0: f64, opts: &DetectOptions) -> Result<Detection> {
    if opts.max_period == 0 {
        return Err(Error::InvalidParameter("max_period must be >= 1".into()));
    }
    let mut x = x0;
    for _ in 0..opts.burn_in {
        x = map.step(x)?.0;
    }
    let len = 2 * opts.max_period;
    let block = opts.burn_in.max(len);
    let mut previous = f64::INFINITY;
    let mut xs = Vec::with_capacity(len + 1);
    let mut spikes = Vec::with_capacity(len);
    for extension in 0..=opts.max_extensions {
        xs.clear();
        spikes.clear();
        xs.push(x);
        for _ in 0..len {
            let (y, n) = map.step(x)?;
            spikes.push(n);
            xs.push(y);
            x = y;
        }
        let mut best = f64::INFINITY;
        for p in 1..=opts.max_period {
            let dist = (0..p).map(|k| (xs[k + p] - xs[k]).abs()).fold(0.0, f64::max);
            if dist <= opts.tol && (0..p).all(|k| spikes[k + p] == spikes[k]) {
                return Ok(Detection::Periodic(build_orbit(&xs[..p], &spikes[..p])?));
            }
            best = best.min(dist);
        }
        if extension == opts.max_extensions || !(best < EXTENSION_DECAY * previous) {
            break;
        }
        previous = best;
        for _ in len..block {
            x = map.step(x)?.0;
        }
    }
    Ok(Detection::Aperiodic)
}

fn build_orbit(xs: &[f64], spikes: &[u32]) -> Result<Orbit> {
    let p = xs.len();
    let start = (0..p)
        .min_by(|&a, &b| xs[a].total_cmp(&xs[b]))
        .unwrap_or(0);
    let points: Vec<f64> = (0..p).map(|i| xs[(start + i) % p]).collect();
    let per_point_spikes: Vec<u32> = (0..p).map(|i| spikes[(start + i) % p]).collect();
    let lo = *per_point_spikes.iter().min().unwrap_or(&0);
    let hi = *per_point_spikes.iter().max().unwrap_or(&0);
    if hi > lo + 1 {
        return Err(Error::InvalidParameter(format!(
            "orbit visits non-adjacent spike classes {lo} and {hi}"
        )));
    }
    Ok(Orbit { points, period: p, branch_n: lo, per_point_spikes })
}

/// [`detect_orbit_with`] at default numerics.
pub fn detect_orbit(system: &SystemParams, x0: f64, opts: &DetectOptions) -> Result<Detection> {
    detect_orbit_with(&StroboMap::new(system)?, x0, opts)
}

/// A cyclic word over `{L, R}` stored in its lexicographically minimal rotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicSequence(String);

impl SymbolicSequence {
    /// Canonical word from a symbol string. Accepts `L`/`R` with optional
    /// exponents written as superscript digits or `^k`.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(Self::canonical(&expand(s)?))
    }

    /// Canonical rotation of an already expanded `L`/`R` string.
    pub fn canonical(word: &str) -> Self {
        SymbolicSequence(min_rotation(word))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn r_count(&self) -> usize {
        self.0.bytes().filter(|&b| b == b'R').count()
    }

    /// Run-length form such as `L²RLR`.
    pub fn compact(&self) -> String {
        compact(&self.0)
    }
}

impl fmt::Display for SymbolicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn expand(s: &str) -> Result<String> {
    let mut out = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        let sym = match c {
            'L' | 'R' => c,
            _ => return Err(Error::InvalidParameter(format!("bad symbol `{c}` in word `{s}`"))),
        };
        let mut digits = String::new();
        if chars.peek() == Some(&'^') {
            chars.next();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(d);
                chars.next();
            }
        } else {
            while let Some(&d) = chars.peek() {
                match SUPERSCRIPTS.iter().position(|&u| u == d) {
                    Some(v) => {
                        digits.push(char::from(b'0' + v as u8));
                        chars.next();
                    }
                    None => break,
                }
            }
        }
        let k: usize = if digits.is_empty() {
            1
        } else {
            digits.parse().map_err(|_| Error::InvalidParameter(format!("bad exponent in `{s}`")))?
        };
        out.extend(std::iter::repeat_n(sym, k));
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    Ok(out)
}

fn compact(w: &str) -> String {
    let mut out = String::new();
    let b = w.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let mut j = i;
        while j < b.len() && b[j] == b[i] {
            j += 1;
        }
        out.push(b[i] as char);
        let run = j - i;
        if run > 1 {
            for d in run.to_string().bytes() {
                out.push(SUPERSCRIPTS[(d - b'0') as usize]);
            }
        }
        i = j;
    }
    out
}

fn min_rotation(w: &str) -> String {
    let n = w.len();
    if n == 0 {
        return String::new();
    }
    let doubled = format!("{w}{w}");
    (0..n)
        .map(|i| &doubled[i..i + n])
        .min()
        .unwrap_or(w)
        .to_string()
}

/// Word of an orbit relative to the lower spike count `n`: points with `n`
/// spikes read `L`, points with `n + 1` read `R`.
fn word_relative(orbit: &Orbit, n: u32) -> Result<String> {
    orbit
        .per_point_spikes
        .iter()
        .map(|&s| match s.checked_sub(n) {
            Some(0) => Ok('L'),
            Some(1) => Ok('R'),
            _ => Err(Error::InvalidParameter(format!("spike count {s} outside window {n}"))),
        })
        .collect()
}

/// Encodes an orbit in its own window. A fixed point reads `L`.
pub fn encode_with(orbit: &Orbit, map: &StroboMap) -> Result<SymbolicSequence> {
    if orbit.period == 1 {
        return Ok(SymbolicSequence("L".into()));
    }
    let n = orbit.branch_n;
    if let Some(sigma) = map.sigma(n + 1)? {
        if let Some(&x) = orbit.points.iter().find(|&&x| (x - sigma).abs() <= BORDER_TOL) {
            return Err(Error::DegenerateBoundary { x, n: n + 1, sigma });
        }
    }
    Ok(SymbolicSequence::canonical(&word_relative(orbit, n)?))
}

pub fn encode(orbit: &Orbit, system: &SystemParams) -> Result<SymbolicSequence> {
    encode_with(orbit, &StroboMap::new(system)?)
}

/// Fraction of `R` symbols.
pub fn rotation_number(seq: &SymbolicSequence) -> Ratio {
    Ratio::new(seq.r_count() as i64, seq.len().max(1) as i64)
}

/// `eta = n + rho`.
pub fn firing_number(seq: &SymbolicSequence, n: u32) -> Ratio {
    Ratio::from_integer(n as i64) + rotation_number(seq)
}

/// Spikes per unit time, `eta / T`.
pub fn firing_rate(eta: Ratio, t: f64) -> f64 {
    *eta.numer() as f64 / *eta.denom() as f64 / t
}

/// Spike count of the hybrid flow over `[0, horizon]` divided by the horizon.
pub fn empirical_firing_rate(system: &SystemParams, x0: f64, horizon: f64) -> Result<f64> {
    let tr = hybrid_flow_with(system, x0, horizon, 0, &Numerics::default())?;
    Ok(tr.spike_times.len() as f64 / horizon)
}

/// Rotation statistics of a word on window `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationStats {
    pub rho: Ratio,
    pub eta: Ratio,
    pub rate: f64,
}

pub fn rotation_stats(seq: &SymbolicSequence, n: u32, t: f64) -> RotationStats {
    let eta = firing_number(seq, n);
    RotationStats { rho: rotation_number(seq), eta, rate: firing_rate(eta, t) }
}

/// Outcome class of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Periodic,
    /// No period up to the cap.
    Aperiodic,
    /// An orbit point sits within tolerance of the discontinuity.
    Degenerate,
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> &str {
        match self {
            PointStatus::Periodic => "periodic",
            PointStatus::Aperiodic => "aperiodic",
            PointStatus::Degenerate => "degenerate",
            PointStatus::Failed(_) => "error",
        }
    }
}

/// Compact per-point record used by scans and sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSummary {
    pub status: PointStatus,
    pub period: Option<u32>,
    /// Lower spike count of the window the word is written in.
    pub branch_n: Option<u32>,
    pub word: Option<SymbolicSequence>,
    pub rho: Option<Ratio>,
    pub eta: Option<Ratio>,
}

impl OrbitSummary {
    fn empty(status: PointStatus) -> Self {
        OrbitSummary { status, period: None, branch_n: None, word: None, rho: None, eta: None }
    }

    pub fn failed(msg: String) -> Self {
        Self::empty(PointStatus::Failed(msg))
    }

    pub fn is_periodic(&self) -> bool {
        self.status == PointStatus::Periodic
    }

    /// 64-bit FNV-1a hash of the canonical word.
    pub fn word_hash(&self) -> Option<u64> {
        self.word.as_ref().map(|w| fnv1a(w.as_str().as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Detects and classifies the orbit reached from `x0`. With `window = Some(n)`
/// the word is written relative to spike counts `{n, n + 1}`, so a fixed point
/// on `S_{n+1}` reads `R`; otherwise the orbit's own window is used.
pub fn summarize(map: &StroboMap, x0: f64, opts: &DetectOptions, window: Option<u32>) -> OrbitSummary {
    match summarize_inner(map, x0, opts, window) {
        Ok(s) => s,
        Err(e) => OrbitSummary::empty(PointStatus::Failed(e.to_string())),
    }
}

fn summarize_inner(
    map: &StroboMap,
    x0: f64,
    opts: &DetectOptions,
    window: Option<u32>,
) -> Result<OrbitSummary> {
    let orbit = match detect_orbit_with(map, x0, opts)? {
        Detection::Aperiodic => return Ok(OrbitSummary::empty(PointStatus::Aperiodic)),
        Detection::Periodic(o) => o,
    };
    let eta = orbit.eta();
    let mut status = PointStatus::Periodic;
    let (n, word) = match window {
        Some(n) => match word_relative(&orbit, n) {
            Ok(w) => (n, SymbolicSequence::canonical(&w)),
            Err(_) => (orbit.branch_n, own_word(&orbit)),
        },
        None => (orbit.branch_n, own_word(&orbit)),
    };
    if orbit.period > 1 {
        if let Err(Error::DegenerateBoundary { .. }) = encode_with(&orbit, map) {
            status = PointStatus::Degenerate;
        }
    }
    Ok(OrbitSummary {
        status,
        period: Some(orbit.period as u32),
        branch_n: Some(n),
        rho: Some(eta - Ratio::from_integer(n as i64)),
        eta: Some(eta),
        word: Some(word),
    })
}

fn own_word(orbit: &Orbit) -> SymbolicSequence {
    if orbit.period == 1 {
        return SymbolicSequence("L".into());
    }
    SymbolicSequence::canonical(&word_relative(orbit, orbit.branch_n).unwrap_or_default())
}

/// A node of the Farey tree of adding words.
#[derive(Debug, Clone, PartialEq)]
pub struct FareyNode {
    pub word: SymbolicSequence,
    pub rho: Ratio,
    pub depth: u32,
    /// Indices of the two generating nodes; `None` for the roots `L` and `R`.
    pub parents: Option<(usize, usize)>,
}

/// Farey tree of words to `depth`: roots `L` (0/1) and `R` (1/1), and at
/// each level the concatenation of every adjacent pair with the mediant
/// rotation number. Nodes are listed by depth, then by rotation number.
pub fn farey_tree(depth: u32) -> Vec<FareyNode> {
    let mut nodes = vec![
        FareyNode { word: SymbolicSequence("L".into()), rho: Ratio::new(0, 1), depth: 0, parents: None },
        FareyNode { word: SymbolicSequence("R".into()), rho: Ratio::new(1, 1), depth: 0, parents: None },
    ];
    // current left-to-right order of node indices
    let mut row = vec![0usize, 1];
    for level in 1..=depth {
        let mut next = Vec::with_capacity(2 * row.len());
        for w in row.windows(2) {
            let (a, b) = (w[0], w[1]);
            next.push(a);
            let (na, nb) = (&nodes[a], &nodes[b]);
            let word = SymbolicSequence(format!("{}{}", na.word.0, nb.word.0));
            let rho = Ratio::new(
                na.rho.numer() + nb.rho.numer(),
                na.rho.denom() + nb.rho.denom(),
            );
            nodes.push(FareyNode { word, rho, depth: level, parents: Some((a, b)) });
            next.push(nodes.len() - 1);
        }
        next.push(*row.last().unwrap());
        row = next;
    }
    nodes
}

/// A maximal run of consecutive periodic scan points with equal firing number.
#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    pub rho: Ratio,
    pub eta: Ratio,
    pub word: SymbolicSequence,
    pub period: u32,
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub count: usize,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.lambda_end - self.lambda_start
    }
}

/// Merges a scan into plateaus and checks that the firing number never
/// decreases along it. Non-periodic points are skipped.
pub fn staircase(series: &ScanSeries) -> Result<Vec<Plateau>> {
    let mut out: Vec<Plateau> = Vec::new();
    for (i, s) in series.summaries.iter().enumerate() {
        let (Some(rho), Some(eta), Some(word), Some(p)) = (s.rho, s.eta, s.word.as_ref(), s.period) else {
            continue;
        };
        if !s.is_periodic() {
            continue;
        }
        let lambda = series.lambda[i];
        if let Some(last) = out.last_mut() {
            if eta < last.eta {
                return Err(Error::MonotonicityViolation {
                    detail: format!(
                        "firing number drops from {} to {} at lambda={lambda}",
                        last.eta, eta
                    ),
                });
            }
            if eta == last.eta {
                last.lambda_end = lambda;
                last.count += 1;
                continue;
            }
        }
        out.push(Plateau {
            rho,
            eta,
            word: word.clone(),
            period: p,
            lambda_start: lambda,
            lambda_end: lambda,
            count: 1,
        });
    }
    Ok(out)
}

/// Checks that a window scan starts at `rho = 0` and ends at `rho = 1`.
pub fn check_endpoints(plateaus: &[Plateau]) -> Result<()> {
    let (first, last) = match (plateaus.first(), plateaus.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::MonotonicityViolation { detail: "empty staircase".into() }),
    };
    if first.rho != Ratio::new(0, 1) || last.rho != Ratio::new(1, 1) {
        return Err(Error::MonotonicityViolation {
            detail: format!("endpoints rho={} and rho={}, expected 0 and 1", first.rho, last.rho),
        });
    }
    Ok(())
}

/// One verified adding step: between `left` and `right` lies `child`.
#[derive(Debug, Clone, PartialEq)]
pub struct AddingStep {
    pub left: SymbolicSequence,
    pub right: SymbolicSequence,
    pub child: SymbolicSequence,
    pub level: u32,
    /// Whether the child plateau was only found after a refined scan.
    pub refined: bool,
    pub lambda: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AddingReport {
    pub steps: Vec<AddingStep>,
}

/// Verifies the adding rule on a window scan: between plateaus with words
/// `s1` and `s2` there is a plateau with word `s1 s2`, recursively to
/// `depth` levels starting from the outermost pair. When the base scan
/// misses a child, `refine(l0, l1)` is called for a denser scan of the gap.
pub fn adding_check(
    series: &ScanSeries,
    refine: &dyn Fn(f64, f64) -> Result<ScanSeries>,
    depth: u32,
) -> Result<AddingReport> {
    let mut pool = staircase(series)?;
    check_endpoints(&pool)?;
    let left = pool.first().cloned().unwrap();
    let right = pool.last().cloned().unwrap();
    let mut report = AddingReport::default();
    adding_recurse(&mut pool, &left, &right, 1, depth, refine, &mut report)?;
    Ok(report)
}

fn find_between(pool: &[Plateau], word: &SymbolicSequence, lo: f64, hi: f64) -> Option<Plateau> {
    pool.iter()
        .find(|p| &p.word == word && p.lambda_start > lo && p.lambda_end < hi)
        .cloned()
}

fn adding_recurse(
    pool: &mut Vec<Plateau>,
    left: &Plateau,
    right: &Plateau,
    level: u32,
    depth: u32,
    refine: &dyn Fn(f64, f64) -> Result<ScanSeries>,
    report: &mut AddingReport,
) -> Result<()> {
    if level > depth {
        return Ok(());
    }
    let child_word = SymbolicSequence::canonical(&format!("{}{}", left.word.0, right.word.0));
    let (lo, hi) = (left.lambda_end, right.lambda_start);
    let mut refined = false;
    let child = match find_between(pool, &child_word, lo, hi) {
        Some(c) => c,
        None => {
            refined = true;
            let extra = staircase(&refine(lo, hi)?)?;
            pool.extend(extra);
            find_between(pool, &child_word, lo, hi).ok_or_else(|| Error::AddingViolation {
                detail: format!(
                    "no plateau {} between {} and {} in lambda ({lo}, {hi})",
                    child_word.compact(),
                    left.word.compact(),
                    right.word.compact()
                ),
            })?
        }
    };
    report.steps.push(AddingStep {
        left: left.word.clone(),
        right: right.word.clone(),
        child: child.word.clone(),
        level,
        refined,
        lambda: (child.lambda_start, child.lambda_end),
    });
    adding_recurse(pool, left, &child, level + 1, depth, refine, report)?;
    adding_recurse(pool, &child, right, level + 1, depth, refine, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ForcingParams, VectorFieldSpec};
    use proptest::prelude::*;

    const L1: VectorFieldSpec = VectorFieldSpec::Linear { a: -1.0, b: 0.5 };

    fn l1(a: f64, d: f64, t: f64) -> SystemParams {
        SystemParams::new(L1, ForcingParams::new(a, d, t).unwrap(), 1.0).unwrap()
    }

    fn w(s: &str) -> SymbolicSequence {
        SymbolicSequence::parse(s).unwrap()
    }

    #[test]
    fn parse_and_compact() {
        assert_eq!(w("L²RLR").as_str(), "LLRLR");
        assert_eq!(w("L^4R").as_str(), "LLLLR");
        assert_eq!(w("RL").as_str(), "LR");
        assert_eq!(w("LRLR²").compact(), "LRLR²");
        assert_eq!(w("L¹²R").len(), 13);
        assert!(SymbolicSequence::parse("LXR").is_err());
        assert!(SymbolicSequence::parse("").is_err());
    }

    #[test]
    fn rotation_and_firing_numbers() {
        assert_eq!(rotation_number(&w("LR")), Ratio::new(1, 2));
        assert_eq!(rotation_number(&w("L")), Ratio::new(0, 1));
        assert_eq!(rotation_number(&w("R")), Ratio::new(1, 1));
        assert_eq!(rotation_number(&w("L²RLR")), Ratio::new(2, 5));
        assert_eq!(firing_number(&w("LRLR²"), 0), Ratio::new(3, 5));
        assert_eq!(firing_number(&w("L"), 2), Ratio::new(2, 1));
        assert_eq!(firing_number(&w("LR⁴"), 0), Ratio::new(4, 5));
        assert!((firing_rate(Ratio::new(1, 2), 1.9) - 0.2631578947368421).abs() < 1e-15);
        assert_eq!(firing_rate(Ratio::new(0, 1), 3.0), 0.0);
    }

    #[test]
    fn detect_examples() {
        let opts = DetectOptions::default();
        let Detection::Periodic(o) = detect_orbit(&l1(0.3, 0.5, 1.9), 0.0, &opts).unwrap() else {
            panic!("expected periodic");
        };
        assert_eq!((o.period, o.branch_n), (1, 0));

        let s = l1(0.8, 0.5, 1.9);
        let Detection::Periodic(o) = detect_orbit(&s, 0.0, &opts).unwrap() else { panic!() };
        assert_eq!(o.period, 2);
        assert_eq!(o.per_point_spikes, vec![0, 1]);
        assert_eq!(encode(&o, &s).unwrap().as_str(), "LR");

        let Detection::Periodic(o) = detect_orbit(&l1(2.0, 0.5, 1.9), 0.0, &opts).unwrap() else { panic!() };
        assert_eq!(o.period, 1);
        assert!(o.branch_n >= 1);
        assert_eq!(encode(&o, &l1(2.0, 0.5, 1.9)).unwrap().as_str(), "L");
    }

    #[test]
    fn degenerate_boundary_reported() {
        let s = l1(0.8, 0.5, 1.9);
        let m = StroboMap::new(&s).unwrap();
        let sigma = m.sigma(1).unwrap().unwrap();
        let fake = Orbit { points: vec![0.3, sigma], period: 2, branch_n: 0, per_point_spikes: vec![0, 1] };
        assert!(matches!(encode_with(&fake, &m), Err(Error::DegenerateBoundary { .. })));
    }

    #[test]
    fn farey_examples() {
        let t = farey_tree(4);
        let at = |d: u32| -> Vec<(String, Ratio)> {
            t.iter().filter(|n| n.depth == d).map(|n| (n.word.0.clone(), n.rho)).collect()
        };
        assert_eq!(at(0), vec![("L".into(), Ratio::new(0, 1)), ("R".into(), Ratio::new(1, 1))]);
        assert_eq!(at(1), vec![("LR".into(), Ratio::new(1, 2))]);
        assert_eq!(
            at(2),
            vec![("LLR".into(), Ratio::new(1, 3)), ("LRR".into(), Ratio::new(2, 3))]
        );
        let l2rlr = t.iter().find(|n| n.word.as_str() == "LLRLR").unwrap();
        let (a, b) = l2rlr.parents.unwrap();
        assert_eq!((t[a].word.as_str(), t[b].word.as_str()), ("LLR", "LR"));
        for p5 in ["L⁴R", "L²RLR", "LRLR²", "LR⁴"] {
            assert!(t.iter().any(|n| n.word == w(p5)), "{p5}");
        }
    }

    #[test]
    fn farey_words_are_canonical_and_complete() {
        let t = farey_tree(6);
        for n in &t {
            assert_eq!(n.word, SymbolicSequence::canonical(n.word.as_str()));
            assert_eq!(rotation_number(&n.word), n.rho);
            if let Some((a, b)) = n.parents {
                assert_eq!(n.word.0, format!("{}{}", t[a].word.0, t[b].word.0));
                let (ra, rb) = (t[a].rho, t[b].rho);
                assert_eq!(n.rho, Ratio::new(ra.numer() + rb.numer(), ra.denom() + rb.denom()));
            }
        }
        for p in 1..=6i64 {
            for m in 1..p {
                if num_integer_gcd(m, p) == 1 {
                    assert!(t.iter().any(|n| n.rho == Ratio::new(m, p)), "{m}/{p}");
                }
            }
        }
    }

    fn num_integer_gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    #[test]
    fn empirical_rate_matches_two_cycle() {
        let s = l1(0.8, 0.5, 1.9);
        let r = empirical_firing_rate(&s, 0.0, 2000.0 * 1.9).unwrap();
        assert!((r - 0.5 / 1.9).abs() <= 2.0 / 3800.0);
        assert_eq!(empirical_firing_rate(&l1(0.3, 0.5, 1.9), 0.0, 3800.0).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn rho_invariant_under_rotation(bits in proptest::collection::vec(any::<bool>(), 1..40), k in 0usize..40) {
            let s: String = bits.iter().map(|&b| if b { 'R' } else { 'L' }).collect();
            let k = k % s.len();
            let rotated = format!("{}{}", &s[k..], &s[..k]);
            let a = SymbolicSequence::canonical(&s);
            let b = SymbolicSequence::canonical(&rotated);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(rotation_number(&a), Ratio::new(s.matches('R').count() as i64, s.len() as i64));
        }

        #[test]
        fn word_r_count_matches_spikes(a in 0.7f64..0.93) {
            let s = l1(a, 0.5, 1.9);
            let m = StroboMap::new(&s).unwrap();
            if let Detection::Periodic(o) = detect_orbit_with(&m, 0.0, &DetectOptions::default()).unwrap() {
                let word = SymbolicSequence::canonical(&word_relative(&o, o.branch_n).unwrap());
                let expected = o.total_spikes() - o.branch_n as u64 * o.period as u64;
                prop_assert_eq!(word.r_count() as u64, expected);
            }
        }
    }
}
