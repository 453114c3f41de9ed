//! Sparse test signals, Gaussian measurement ensembles and affine one-bit
//! quantization `y_i = sign(<a_i, x> + b_i)` with `sign(0) = +1`.

use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::rng::{Stream, StreamFactory};

/// Ground-truth vector with its sparsity budget and norm annulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    pub values: Vec<f64>,
    /// Sorted support indices.
    pub support: Vec<usize>,
    pub sparsity: usize,
    pub r: f64,
    pub big_r: f64,
}

impl SparseSignal {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.values)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws an `s`-sparse signal: uniform support, Gaussian direction on the
/// support, Euclidean norm uniform on `[r, big_r]`.
pub fn generate_sparse_signal(n: usize, s: usize, r: f64, big_r: f64, seed: u64) -> Result<SparseSignal> {
    if s == 0 || s > n {
        return Err(Error::InvalidDimension(format!("need 0 < s <= n, got s = {s}, n = {n}")));
    }
    if !(r > 0.0) || !(r <= big_r) || !big_r.is_finite() {
        return Err(Error::InvalidDimension(format!(
            "need 0 < r <= R, got r = {r}, R = {big_r}"
        )));
    }
    let streams = StreamFactory::new(seed);
    let mut shape_rng = streams.stream(Stream::SignalShape);
    let mut support = rand::seq::index::sample(&mut shape_rng, n, s).into_vec();
    support.sort_unstable();
    let direction: Vec<f64> = support.iter().map(|_| shape_rng.sample(StandardNormal)).collect();

    let u: f64 = streams.stream(Stream::SignalNorm).random();
    let target = if r == big_r { r } else { r + (big_r - r) * u };
    let scale = target / norm2(&direction);

    let mut values = vec![0.0; n];
    for (&j, g) in support.iter().zip(&direction) {
        values[j] = g * scale;
    }
    Ok(SparseSignal {
        values,
        support,
        sparsity: s,
        r,
        big_r,
    })
}

/// How the affine shifts `b_i` are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftKind {
    /// `b_i ~ N(0, tau^2)` i.i.d.
    GaussianDither { tau: f64 },
    /// `b_i = -tau` for all `i`, so `y_i = sign(<a_i, x> - tau)`.
    ConstantThreshold { tau: f64 },
    /// `b_i = 0`: classical one-bit measurements, no magnitude information.
    Zero,
}

impl ShiftKind {
    pub fn tau(&self) -> Option<f64> {
        match *self {
            ShiftKind::GaussianDither { tau } | ShiftKind::ConstantThreshold { tau } => Some(tau),
            ShiftKind::Zero => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(tau) = self.tau() {
            ensure(tau > 0.0 && tau.is_finite(), || {
                format!("threshold tau must be positive and finite, got {tau}")
            })?;
        }
        Ok(())
    }

    fn label(&self) -> &'static str {
        match self {
            ShiftKind::GaussianDither { .. } => "gaussian",
            ShiftKind::ConstantThreshold { .. } => "constant",
            ShiftKind::Zero => "zero",
        }
    }
}

/// Measurement matrix `A` (row-major, i.i.d. `N(0,1)`) and shift vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    m: usize,
    n: usize,
    matrix: Vec<f64>,
    shifts: Vec<f64>,
    shift_kind: ShiftKind,
    seed: u64,
}

fn fill_row(streams: &StreamFactory, i: usize, row: &mut [f64]) {
    let mut rng = streams.stream(Stream::MatrixRow(i as u64));
    for v in row.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

fn shift_value(streams: &StreamFactory, kind: ShiftKind, i: usize) -> f64 {
    match kind {
        ShiftKind::GaussianDither { tau } => {
            let g: f64 = streams.stream(Stream::Shift(i as u64)).sample(StandardNormal);
            tau * g
        }
        ShiftKind::ConstantThreshold { tau } => -tau,
        ShiftKind::Zero => 0.0,
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("need m, n >= 1, got m = {m}, n = {n}")));
    }
    Ok(())
}

/// Rows per rayon task when generating or streaming the matrix.
const ROW_CHUNK: usize = 256;

impl MeasurementEnsemble {
    /// Generates an ensemble. Row `i` of `A` and shift `b_i` come from their
    /// own substreams of `seed`, so the first `k` rows of an ensemble with
    /// `m > k` equal the ensemble with `m = k`.
    pub fn build(m: usize, n: usize, shift_kind: ShiftKind, seed: u64) -> Result<Self> {
        check_dims(m, n)?;
        shift_kind.validate()?;
        let streams = StreamFactory::new(seed);
        let mut matrix = vec![0.0; m * n];
        matrix
            .par_chunks_mut(n)
            .with_min_len(ROW_CHUNK)
            .enumerate()
            .for_each(|(i, row)| fill_row(&streams, i, row));
        let shifts = (0..m).map(|i| shift_value(&streams, shift_kind, i)).collect();
        Ok(Self {
            m,
            n,
            matrix,
            shifts,
            shift_kind,
            seed,
        })
    }

    /// Assembles an ensemble from explicit data (for imported files).
    pub fn from_parts(
        m: usize,
        n: usize,
        matrix: Vec<f64>,
        shifts: Vec<f64>,
        shift_kind: ShiftKind,
        seed: u64,
    ) -> Result<Self> {
        check_dims(m, n)?;
        shift_kind.validate()?;
        if matrix.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: matrix.len(),
            });
        }
        if shifts.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: shifts.len(),
            });
        }
        Ok(Self {
            m,
            n,
            matrix,
            shifts,
            shift_kind,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major `m x n` matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n..(i + 1) * self.n]
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn shift_kind(&self) -> ShiftKind {
        self.shift_kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `y_i = sign(<a_i, x> + b_i)`.
    pub fn quantize(&self, x: &[f64]) -> Result<SignVector> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let bits = (0..self.m)
            .into_par_iter()
            .with_min_len(ROW_CHUNK)
            .map(|i| sign(dot(self.row(i), x) + self.shifts[i]))
            .collect();
        Ok(SignVector { bits })
    }

    /// Writes the ensemble as CSV: two `#` header lines, then one line per
    /// row holding `a_i1,...,a_in,b_i`. Floats use Rust's shortest
    /// round-trip formatting so a read-back is bit-exact.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# onebit-ensemble v1")?;
        writeln!(
            w,
            "# m={} n={} shift={} tau={} seed={}",
            self.m,
            self.n,
            self.shift_kind.label(),
            self.shift_kind.tau().unwrap_or(0.0),
            self.seed
        )?;
        let mut line = String::new();
        for i in 0..self.m {
            line.clear();
            for v in self.row(i) {
                line.push_str(&format!("{v:?},"));
            }
            line.push_str(&format!("{:?}", self.shifts[i]));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let magic = lines.next().transpose()?.unwrap_or_default();
        if magic.trim() != "# onebit-ensemble v1" {
            return Err(Error::Parse(format!("bad ensemble header: {magic:?}")));
        }
        let meta = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Parse("missing ensemble metadata line".into()))?;
        let meta = meta
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("metadata line must start with '#'".into()))?;
        let (mut m, mut n, mut kind, mut tau, mut seed) = (None, None, None, None, None);
        for field in meta.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata field {field:?}")))?;
            match k {
                "m" => m = Some(parse_num::<usize>(v)?),
                "n" => n = Some(parse_num::<usize>(v)?),
                "shift" => kind = Some(v.to_string()),
                "tau" => tau = Some(parse_num::<f64>(v)?),
                "seed" => seed = Some(parse_num::<u64>(v)?),
                _ => return Err(Error::Parse(format!("unknown metadata key {k:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("metadata is missing {k}"));
        let (m, n) = (m.ok_or_else(|| missing("m"))?, n.ok_or_else(|| missing("n"))?);
        let tau = tau.ok_or_else(|| missing("tau"))?;
        let shift_kind = match kind.ok_or_else(|| missing("shift"))?.as_str() {
            "gaussian" => ShiftKind::GaussianDither { tau },
            "constant" => ShiftKind::ConstantThreshold { tau },
            "zero" => ShiftKind::Zero,
            other => return Err(Error::Parse(format!("unknown shift kind {other:?}"))),
        };
        let mut matrix = Vec::with_capacity(m * n);
        let mut shifts = Vec::with_capacity(m);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| parse_num::<f64>(f.trim()))
                .collect::<Result<_>>()?;
            if fields.len() != n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    got: fields.len(),
                });
            }
            matrix.extend_from_slice(&fields[..n]);
            shifts.push(fields[n]);
        }
        Self::from_parts(m, n, matrix, shifts, shift_kind, seed.ok_or_else(|| missing("seed"))?)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("cannot parse {s:?} as a number")))
}

pub fn build_ensemble(m: usize, n: usize, shift_kind: ShiftKind, seed: u64) -> Result<MeasurementEnsemble> {
    MeasurementEnsemble::build(m, n, shift_kind, seed)
}

pub fn quantize(ensemble: &MeasurementEnsemble, x: &[f64]) -> Result<SignVector> {
    ensemble.quantize(x)
}

/// Quantizes `x` against the ensemble `(m, n, shift_kind, seed)` without
/// materializing the matrix. Bit-identical to
/// `MeasurementEnsemble::build(..)?.quantize(x)`.
pub fn quantize_streaming(m: usize, n: usize, shift_kind: ShiftKind, seed: u64, x: &[f64]) -> Result<SignVector> {
    check_dims(m, n)?;
    shift_kind.validate()?;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let streams = StreamFactory::new(seed);
    let bits = (0..m)
        .into_par_iter()
        .with_min_len(ROW_CHUNK)
        .map_init(
            || vec![0.0; n],
            |row, i| {
                fill_row(&streams, i, row);
                sign(dot(row, x) + shift_value(&streams, shift_kind, i))
            },
        )
        .collect();
    Ok(SignVector { bits })
}

#[inline]
fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// One-bit measurements, each exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    bits: Vec<i8>,
}

impl SignVector {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b != 1 && b != -1) {
            return Err(Error::InvalidParameter(format!("sign entries must be +1 or -1, found {b}")));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_negative(&self) -> usize {
        self.bits.iter().filter(|&&b| b < 0).count()
    }

    /// One sign per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for b in &self.bits {
            writeln!(w, "{b}")?;
        }
        Ok(())
    }

    /// Accepts whitespace, comma or newline separated `+1`/`-1`/`1` tokens;
    /// lines starting with `#` are ignored.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut bits = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim_start().starts_with('#') {
                continue;
            }
            for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                bits.push(parse_num::<i8>(tok.trim_start_matches('+'))?);
            }
        }
        Self::new(bits)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<&str> = self.bits.iter().map(|&b| if b > 0 { "+" } else { "-" }).collect();
        f.write_str(&s.concat())
    }
}
