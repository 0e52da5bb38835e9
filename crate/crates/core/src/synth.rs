//! Clifford+T approximations of single-qubit Z and Y rotations.
//!
//! Every Clifford+T operator has a unique normal form
//! `[T] (HT | SHT)* C` with `C` one of the 24 single-qubit Cliffords
//! (operator order, rightmost factor applied first). The search enumerates
//! normal forms by increasing T-count and splits each into a left half
//! `[T] S_1…S_a` and a right half `S_{a+1}…S_m C`. Right halves are indexed
//! in a 4D grid over their SU(2) quaternions; for every left half `L` the
//! grid is probed around `L†U`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;
use crate::error::{Error, Result};
use crate::C64;

/// Smallest tolerance accepted unless the caller lowers it.
pub const DEFAULT_EPSILON_FLOOR: f64 = 5e-3;

/// Default T-count budget of the search.
pub const DEFAULT_MAX_T: usize = 32;

/// Published T and total gate counts for approximating
/// `Ry(2 arccos √(1/3))`: `(error, t_count, total_count)`.
pub const REFERENCE_RY_COUNTS: [(f64, usize, usize); 7] = [
    (1e-1, 8, 28),
    (9e-3, 22, 64),
    (1e-3, 34, 91),
    (8e-6, 60, 158),
    (1e-7, 82, 215),
    (7e-11, 130, 340),
    (1e-13, 168, 432),
];

type M2 = [C64; 4];

const I2: M2 = [
    C64 { re: 1.0, im: 0.0 },
    C64 { re: 0.0, im: 0.0 },
    C64 { re: 0.0, im: 0.0 },
    C64 { re: 1.0, im: 0.0 },
];

fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn adjoint(a: &M2) -> M2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn kind_matrix(k: &GateKind) -> M2 {
    k.matrix_1q().expect("single-qubit gate kind")
}

/// Matrix of a word given in circuit order.
pub fn word_matrix(word: &[GateKind]) -> M2 {
    word.iter().fold(I2, |acc, k| mul(&kind_matrix(k), &acc))
}

/// `U = a·I − i(b·X + c·Y + d·Z)` after scaling to unit determinant, with
/// the sign fixed so the first nonzero coordinate is positive.
fn quaternion(m: &M2) -> [f64; 4] {
    let det = m[0] * m[3] - m[1] * m[2];
    let s = det.sqrt();
    let u: Vec<C64> = m.iter().map(|z| z / s).collect();
    let q = [u[0].re, -u[1].im, u[2].re, -u[0].im];
    let lead = q.iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
    if lead < 0.0 {
        q.map(|x| -x)
    } else {
        q
    }
}

fn quat_distance(p: &[f64; 4], q: &[f64; 4]) -> f64 {
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    (2.0 * (1.0 - dot.abs())).max(0.0).sqrt()
}

fn unitarity_error(m: &M2) -> f64 {
    let p = mul(&adjoint(m), m);
    (0..4).map(|i| (p[i] - I2[i]).norm()).fold(0.0, f64::max)
}

/// `min_φ ‖U − e^{iφ}V‖` in the operator norm.
pub fn operator_norm_distance(u: &M2, v: &M2) -> Result<f64> {
    for m in [u, v] {
        if unitarity_error(m) > 1e-9 {
            return Err(Error::InvalidArgument("operator is not unitary".into()));
        }
    }
    Ok(quat_distance(&quaternion(u), &quaternion(v)))
}

pub fn rz_matrix(theta: f64) -> M2 {
    kind_matrix(&GateKind::Rz(theta))
}

pub fn ry_matrix(theta: f64) -> M2 {
    kind_matrix(&GateKind::Ry(theta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    /// Gates in circuit order.
    pub word: Vec<GateKind>,
    pub t_count: usize,
    pub total_count: usize,
    pub error: f64,
}

impl SynthesisResult {
    fn from_word(word: Vec<GateKind>, target: &M2) -> Result<Self> {
        let error = operator_norm_distance(target, &word_matrix(&word))?;
        Ok(SynthesisResult {
            t_count: word.iter().filter(|k| k.is_t_like()).count(),
            total_count: word.len(),
            word,
            error,
        })
    }

    /// Space-separated gate names, `-` for the empty word.
    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            return "-".into();
        }
        let names: Vec<&str> = self.word.iter().map(GateKind::name).collect();
        names.join(" ")
    }
}

pub fn parse_word(s: &str) -> Result<Vec<GateKind>> {
    s.split_whitespace()
        .filter(|t| *t != "-")
        .map(|t| match t {
            "H" => Ok(GateKind::H),
            "T" => Ok(GateKind::T),
            "TDG" => Ok(GateKind::Tdg),
            "S" => Ok(GateKind::S),
            "SDG" => Ok(GateKind::Sdg),
            "X" => Ok(GateKind::X),
            "Y" => Ok(GateKind::Y),
            "Z" => Ok(GateKind::Z),
            "SX" => Ok(GateKind::Sx),
            "SXDG" => Ok(GateKind::Sxdg),
            other => Err(Error::InvalidArgument(format!(
                "unknown gate `{other}` in word"
            ))),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    /// Requests below this tolerance are refused.
    pub epsilon_floor: f64,
    pub max_t: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            max_t: DEFAULT_MAX_T,
        }
    }
}

/// The 24 single-qubit Cliffords modulo phase, each with a shortest word
/// over `{H, S, S†, X, Z}` (operator order).
fn cliffords() -> Vec<(M2, Vec<GateKind>)> {
    let gens = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::X,
        GateKind::Z,
    ];
    let key = |m: &M2| quaternion(m).map(|x| (x * 1e6).round() as i64);
    let mut seen = HashMap::new();
    let mut out: Vec<(M2, Vec<GateKind>)> = vec![(I2, Vec::new())];
    seen.insert(key(&I2), 0usize);
    let mut head = 0;
    while head < out.len() {
        let (m, w) = out[head].clone();
        head += 1;
        for g in &gens {
            let n = mul(&m, &kind_matrix(g));
            let k = key(&n);
            if let Entry::Vacant(e) = seen.entry(k) {
                e.insert(out.len());
                let mut nw = w.clone();
                nw.push(g.clone());
                out.push((n, nw));
            }
        }
    }
    debug_assert_eq!(out.len(), 24);
    out
}

/// Syllable `b` of a normal form: `0` is `HT`, `1` is `SHT` (operator order).
fn syllable(bit: bool) -> M2 {
    let ht = mul(&kind_matrix(&GateKind::H), &kind_matrix(&GateKind::T));
    if bit {
        mul(&kind_matrix(&GateKind::S), &ht)
    } else {
        ht
    }
}

/// Products `S_{bit 0} · S_{bit 1} ⋯` for all `2^len` syllable strings,
/// indexed by the bit pattern.
fn syllable_products(len: usize, start: M2) -> Vec<M2> {
    let s = [syllable(false), syllable(true)];
    let mut cur = vec![start];
    for depth in 0..len {
        let mut next = vec![I2; cur.len() * 2];
        for (bits, m) in cur.iter().enumerate() {
            next[bits] = mul(m, &s[0]);
            next[bits | 1 << depth] = mul(m, &s[1]);
        }
        cur = next;
    }
    cur
}

fn syllable_word(bits: usize, len: usize) -> Vec<GateKind> {
    let mut w = Vec::new();
    for i in 0..len {
        if bits >> i & 1 == 1 {
            w.push(GateKind::S);
        }
        w.push(GateKind::H);
        w.push(GateKind::T);
    }
    w
}

type CellKey = [i32; 4];

/// Right halves with `len` syllables, sorted by grid cell.
struct RightTable {
    len: usize,
    quats: Vec<[f64; 4]>,
    cells: Vec<(CellKey, u32)>,
}

impl RightTable {
    fn new(len: usize, cliffords: &[(M2, Vec<GateKind>)], cell: f64) -> Self {
        let prods = syllable_products(len, I2);
        let mut quats = Vec::with_capacity(prods.len() * cliffords.len());
        for p in &prods {
            for (c, _) in cliffords {
                quats.push(quaternion(&mul(p, c)));
            }
        }
        let mut cells: Vec<(CellKey, u32)> = quats
            .iter()
            .enumerate()
            .map(|(i, q)| (q.map(|x| (x / cell).floor() as i32), i as u32))
            .collect();
        cells.sort_unstable();
        RightTable { len, quats, cells }
    }

    /// Entries within `eps` of `v` (either sign), as `(index, distance)`.
    fn near(&self, v: &[f64; 4], eps: f64, cell: f64, out: &mut Vec<(u32, f64)>) {
        for sign in [1.0, -1.0] {
            let p = v.map(|x| x * sign);
            let lo = p.map(|x| ((x - eps) / cell).floor() as i32);
            let hi = p.map(|x| ((x + eps) / cell).floor() as i32);
            for k0 in lo[0]..=hi[0] {
                for k1 in lo[1]..=hi[1] {
                    for k2 in lo[2]..=hi[2] {
                        for k3 in lo[3]..=hi[3] {
                            let key = [k0, k1, k2, k3];
                            let start = self.cells.partition_point(|e| e.0 < key);
                            for e in self.cells[start..].iter().take_while(|e| e.0 == key) {
                                let d = quat_distance(v, &self.quats[e.1 as usize]);
                                if d <= eps {
                                    out.push((e.1, d));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    total: usize,
    error: f64,
    lead: bool,
    left: usize,
    right: u32,
}

impl Candidate {
    fn better_than(&self, o: &Candidate) -> bool {
        (self.total, self.error, self.lead, self.left, self.right)
            .partial_cmp(&(o.total, o.error, o.lead, o.left, o.right))
            .map(|c| c.is_lt())
            .unwrap_or(false)
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.better_than(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Approximates an arbitrary single-qubit unitary, minimizing T-count.
fn synthesize_unitary(target: &M2, eps: f64, opts: &SynthOptions) -> Result<SynthesisResult> {
    if eps.is_nan() || eps <= 0.0 || eps < opts.epsilon_floor {
        return Err(Error::InvalidArgument(format!(
            "tolerance {eps:e} is below the floor {:e}",
            opts.epsilon_floor
        )));
    }
    let cliffs = cliffords();
    let cell = 2.0 * eps;
    let t_gate = kind_matrix(&GateKind::T);
    let mut tables: HashMap<usize, RightTable> = HashMap::new();
    let mut best_seen = f64::INFINITY;
    for t in 0..=opts.max_t {
        let mut found: Option<Candidate> = None;
        for lead in [false, true] {
            let Some(m) = t.checked_sub(usize::from(lead)) else {
                continue;
            };
            let b = m.div_ceil(2);
            let a = m - b;
            tables.retain(|&k, _| k + 1 >= b);
            let table = tables
                .entry(b)
                .or_insert_with(|| RightTable::new(b, &cliffs, cell));
            let start = if lead { t_gate } else { I2 };
            let lefts = syllable_products(a, start);
            let clifford_len = |r: u32| cliffs[r as usize % 24].1.len();
            let syll_s = |bits: usize, len: usize| (bits & ((1 << len) - 1)).count_ones() as usize;
            let (cand, seen) = lefts
                .par_iter()
                .enumerate()
                .map(|(left, l)| {
                    let v = quaternion(&mul(&adjoint(l), target));
                    let mut hits = Vec::new();
                    table.near(&v, eps, cell, &mut hits);
                    let mut local: Option<Candidate> = None;
                    let mut seen = f64::INFINITY;
                    for (right, d) in hits {
                        seen = seen.min(d);
                        let rbits = right as usize / 24;
                        let total = usize::from(lead)
                            + 2 * m
                            + syll_s(left, a)
                            + syll_s(rbits, table.len)
                            + clifford_len(right);
                        let c = Candidate {
                            total,
                            error: d,
                            lead,
                            left,
                            right,
                        };
                        local = pick(local, Some(c));
                    }
                    (local, seen)
                })
                .reduce(
                    || (None, f64::INFINITY),
                    |x, y| (pick(x.0, y.0), x.1.min(y.1)),
                );
            best_seen = best_seen.min(seen);
            found = pick(found, cand);
        }
        if let Some(c) = found {
            let table = &tables[&(t - usize::from(c.lead)).div_ceil(2)];
            let m = t - usize::from(c.lead);
            let a = m - table.len;
            let rbits = c.right as usize / 24;
            let mut op_word = Vec::new();
            if c.lead {
                op_word.push(GateKind::T);
            }
            op_word.extend(syllable_word(c.left, a));
            op_word.extend(syllable_word(rbits, table.len));
            op_word.extend(cliffs[c.right as usize % 24].1.iter().cloned());
            op_word.reverse();
            return SynthesisResult::from_word(op_word, target);
        }
    }
    Err(Error::SynthesisFailed {
        requested: eps,
        best: best_seen,
    })
}

/// Clifford+T word within `eps` of `Rz(theta)` up to global phase, with the
/// smallest T-count the search budget allows.
pub fn synthesize_rz(theta: f64, eps: f64) -> Result<SynthesisResult> {
    synthesize_rz_with(theta, eps, &SynthOptions::default())
}

pub fn synthesize_rz_with(theta: f64, eps: f64, opts: &SynthOptions) -> Result<SynthesisResult> {
    synthesize_unitary(&rz_matrix(theta), eps, opts)
}

/// `Ry(θ) = SX† Rz(θ) SX`: the `Rz` word wrapped in `SX … SX†` (circuit
/// order). `θ = 0` gives the empty word.
pub fn synthesize_ry(theta: f64, eps: f64) -> Result<SynthesisResult> {
    synthesize_ry_with(theta, eps, &SynthOptions::default())
}

pub fn synthesize_ry_with(theta: f64, eps: f64, opts: &SynthOptions) -> Result<SynthesisResult> {
    if theta == 0.0 {
        return SynthesisResult::from_word(Vec::new(), &ry_matrix(0.0));
    }
    let rz = synthesize_rz_with(theta, eps, opts)?;
    let mut word = vec![GateKind::Sx];
    word.extend(rz.word);
    word.push(GateKind::Sxdg);
    SynthesisResult::from_word(word, &ry_matrix(theta))
}

/// Which rotation axis a cached word approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Y,
    Z,
}

/// Plain-text table of synthesized angles, one per line:
/// `axis theta epsilon t_count total error word…`.
#[derive(Debug, Clone, Default)]
pub struct SynthCache {
    entries: HashMap<(Axis, u64, u64), SynthesisResult>,
}

impl SynthCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, axis: Axis, theta: f64, eps: f64) -> Option<&SynthesisResult> {
        self.entries.get(&(axis, theta.to_bits(), eps.to_bits()))
    }

    pub fn insert(&mut self, axis: Axis, theta: f64, eps: f64, r: SynthesisResult) {
        self.entries
            .insert((axis, theta.to_bits(), eps.to_bits()), r);
    }

    /// Cached result, or a fresh synthesis that is then stored.
    pub fn synthesize(
        &mut self,
        axis: Axis,
        theta: f64,
        eps: f64,
        opts: &SynthOptions,
    ) -> Result<SynthesisResult> {
        if let Some(r) = self.get(axis, theta, eps) {
            return Ok(r.clone());
        }
        let r = match axis {
            Axis::Y => synthesize_ry_with(theta, eps, opts)?,
            Axis::Z => synthesize_rz_with(theta, eps, opts)?,
        };
        self.insert(axis, theta, eps, r.clone());
        Ok(r)
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let mut s = String::new();
        for ((axis, theta, eps), r) in rows {
            let _ = writeln!(
                s,
                "{:?} {:.17e} {:.17e} {} {} {:.6e} {}",
                axis,
                f64::from_bits(*theta),
                f64::from_bits(*eps),
                r.t_count,
                r.total_count,
                r.error,
                r.word_string()
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cache = SynthCache::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let fields: Vec<&str> = line.splitn(7, ' ').collect();
            if fields.len() != 7 {
                return Err(bad("expected 7 fields"));
            }
            let axis = match fields[0] {
                "Y" => Axis::Y,
                "Z" => Axis::Z,
                _ => return Err(bad("axis must be Y or Z")),
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            let theta = num(fields[1])?;
            let eps = num(fields[2])?;
            let word = parse_word(fields[6]).map_err(|e| bad(&e.to_string()))?;
            let target = match axis {
                Axis::Y => ry_matrix(theta),
                Axis::Z => rz_matrix(theta),
            };
            let r = SynthesisResult::from_word(word, &target)?;
            if r.error > eps * (1.0 + 1e-9) {
                return Err(bad("word does not meet its tolerance"));
            }
            cache.insert(axis, theta, eps, r);
        }
        Ok(cache)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}
