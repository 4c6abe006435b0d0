//! Multiparameter indices, control maps and regime classification.
//!
//! A control map sends an index `n` in `N^d` injectively into `R^l` with a
//! discrete image; the limit points of that image index the limit laws of a
//! family. Injectivity and discreteness can only be probed on finite index
//! sets at runtime, see [`probe_injectivity`] and [`probe_separation`].

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::special::ln_factorial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("multi-index must have at least one coordinate")]
    EmptyIndex,
    #[error("multi-index coordinate {axis} is zero; coordinates start at 1")]
    ZeroCoordinate { axis: usize },
    #[error("sampling sequence has {got} components, index has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row index n must be at least 1")]
    ZeroRow,
    #[error("geometric sampling ratio must be finite and > 1, got {0}")]
    BadRatio(f64),
    #[error("sampling sequence term k_{0} does not fit in 64 bits")]
    TermOverflow(u64),
}

/// A point of `N^d`; every coordinate is at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u64>);

impl MultiIndex {
    pub fn new(coords: Vec<u64>) -> Result<Self, ControlError> {
        if coords.is_empty() {
            return Err(ControlError::EmptyIndex);
        }
        if let Some(axis) = coords.iter().position(|&c| c == 0) {
            return Err(ControlError::ZeroCoordinate { axis });
        }
        Ok(Self(coords))
    }

    pub fn scalar(n: u64) -> Result<Self, ControlError> {
        Self::new(vec![n])
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n| = n_1 * ... * n_d`, as a float since products overflow quickly.
    pub fn volume(&self) -> f64 {
        self.0.iter().map(|&c| c as f64).product()
    }

    /// All indices of the box `{1..=side}^dim`, in lexicographic order.
    pub fn grid(dim: usize, side: u64) -> Vec<MultiIndex> {
        let mut out = vec![Vec::new()];
        for _ in 0..dim {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (1..=side).map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Strictly increasing sampling sequence `k_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingSequence {
    /// `k_n = n`.
    Identity,
    /// `k_n = n^2`.
    Square,
    /// `k_0 = 1`, `k_n = max(round(c^n), k_{n-1} + 1)`; for `c >= 2` this is
    /// plain `round(c^n)`.
    Geometric { ratio: f64 },
}

impl SamplingSequence {
    pub fn geometric(ratio: f64) -> Result<Self, ControlError> {
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(ControlError::BadRatio(ratio));
        }
        Ok(Self::Geometric { ratio })
    }

    pub fn powers_of_two() -> Self {
        Self::Geometric { ratio: 2.0 }
    }

    /// `k_n` as a float; exact whenever the integer term is representable.
    pub fn term_f64(&self, n: u64) -> f64 {
        match *self {
            Self::Identity => n as f64,
            Self::Square => (n as f64) * (n as f64),
            Self::Geometric { ratio } if ratio >= 2.0 => ratio.powf(n as f64).round(),
            Self::Geometric { .. } => match self.term(n) {
                Ok(k) => k as f64,
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// `k_n` as an integer.
    pub fn term(&self, n: u64) -> Result<u64, ControlError> {
        match *self {
            Self::Identity => Ok(n),
            Self::Square => n.checked_mul(n).ok_or(ControlError::TermOverflow(n)),
            Self::Geometric { ratio } if ratio >= 2.0 => {
                let v = ratio.powf(n as f64).round();
                if v < 18_446_744_073_709_551_616.0 {
                    Ok(v as u64)
                } else {
                    Err(ControlError::TermOverflow(n))
                }
            }
            Self::Geometric { ratio } => {
                let mut k = 1u64;
                for p in 1..=n {
                    let r = ratio.powf(p as f64).round();
                    if r >= 18_446_744_073_709_551_616.0 {
                        return Err(ControlError::TermOverflow(n));
                    }
                    k = (r as u64).max(k.checked_add(1).ok_or(ControlError::TermOverflow(n))?);
                }
                Ok(k)
            }
        }
    }

    /// All terms `k_0 < k_1 < ...` representable in 64 bits, starting at
    /// `k_0 = 1`. Only meaningful for geometric sequences.
    pub fn blocks(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut p = 0;
        while let Ok(k) = self.term(p) {
            if p > 0 && k <= *out.last().unwrap() {
                break;
            }
            out.push(k);
            p += 1;
            if p > 4096 {
                break;
            }
        }
        out
    }
}

/// `phi(n, N) = (1/n, N_1/k_{n,1}, ..., N_d/k_{n,d})`.
///
/// `k_seq` carries one sequence per coordinate of `big_n`, or a single
/// sequence shared by all coordinates.
pub fn phi_triangular(n: u64, big_n: &MultiIndex, k_seq: &[SamplingSequence]) -> Result<Vec<f64>, ControlError> {
    if n == 0 {
        return Err(ControlError::ZeroRow);
    }
    let d = big_n.dim();
    if k_seq.len() != d && k_seq.len() != 1 {
        return Err(ControlError::DimensionMismatch { expected: d, got: k_seq.len() });
    }
    let mut out = Vec::with_capacity(d + 1);
    out.push(1.0 / n as f64);
    for (i, &c) in big_n.coords().iter().enumerate() {
        let seq = k_seq.get(i).unwrap_or(&k_seq[0]);
        out.push(c as f64 / seq.term_f64(n));
    }
    Ok(out)
}

/// Nonnegative real or `+inf`, used for coordinates of allocation control
/// points where `e^{T/U}` can exceed the double range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn from_ln(ln_value: f64) -> Self {
        Extended::from(ln_value.exp())
    }

    pub fn value(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Extended::Finite(v) if v == 0.0)
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Extended::PosInfinity
        } else {
            Extended::Finite(v)
        }
    }
}

/// A point `(g, d)` in the allocation control space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimePoint {
    pub g: Extended,
    pub d: Extended,
}

impl RegimePoint {
    pub fn new(g: f64, d: f64) -> Self {
        Self { g: g.into(), d: d.into() }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.g.value(), self.d.value()]
    }
}

/// Limit law attached to a regime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitTag {
    Normal,
    PoissonStd { lambda: f64 },
    Undefined,
}

/// Allocation control map `phi_r(T, U)` for `T` balls and `U` boxes:
///
/// * `r = 0`: `(2U/T^2, e^{T/U}/U)`
/// * `r = 1`: `(U/T^2, e^{T/U}/T)`
/// * `r >= 2`: `(1/T, r! U^{r-1} / T^r * e^{T/U})`
///
/// The exponential factor is combined in log space; a coordinate whose value
/// exceeds the double range comes back as [`Extended::PosInfinity`].
pub fn phi_alloc(r: u32, balls: u64, boxes: u64) -> RegimePoint {
    assert!(balls >= 1 && boxes >= 1, "phi_alloc needs T >= 1 and U >= 1");
    let t = balls as f64;
    let u = boxes as f64;
    let ratio = t / u;
    match r {
        0 => RegimePoint { g: Extended::Finite(2.0 * u / (t * t)), d: Extended::from_ln(ratio - u.ln()) },
        1 => RegimePoint { g: Extended::Finite(u / (t * t)), d: Extended::from_ln(ratio - t.ln()) },
        _ => {
            let r64 = r as u64;
            let ln_d = ln_factorial(r64) + (r as f64 - 1.0) * u.ln() - r as f64 * t.ln() + ratio;
            RegimePoint { g: Extended::Finite(1.0 / t), d: Extended::from_ln(ln_d) }
        }
    }
}

/// Limit law for the standardized count of boxes holding exactly `r` balls
/// at a limit point. Exact zero tests; infinite or negative coordinates are
/// outside every limit set.
pub fn classify_regime(r: u32, point: RegimePoint) -> LimitTag {
    let (g, d) = match (point.g, point.d) {
        (Extended::Finite(g), Extended::Finite(d)) if g >= 0.0 && d >= 0.0 => (g, d),
        _ => return LimitTag::Undefined,
    };
    if r == 0 {
        match (g == 0.0, d == 0.0) {
            (true, true) => LimitTag::Normal,
            (false, true) => LimitTag::PoissonStd { lambda: 1.0 / g },
            (true, false) => LimitTag::PoissonStd { lambda: 1.0 / d },
            (false, false) => LimitTag::Undefined,
        }
    } else if g != 0.0 {
        LimitTag::Undefined
    } else if d == 0.0 {
        LimitTag::Normal
    } else {
        LimitTag::PoissonStd { lambda: 1.0 / d }
    }
}

/// Injective map from `N^d` into `R^l` with discrete image.
pub trait ControlMap: Send + Sync {
    fn dimension_in(&self) -> usize;
    fn dimension_out(&self) -> usize;
    fn eval(&self, index: &MultiIndex) -> Vec<f64>;
    /// Membership in the limit-point set of the image.
    fn in_delta(&self, point: &[f64]) -> bool;
    fn name(&self) -> String;
}

/// `(n, N) -> (1/n, N/k_n)` on `N^{1+d}`; limit set `{0} x [0, inf)^d`.
///
/// Injective since `1/n` recovers `n` and then `N = k_n * (N/k_n)`.
/// Discrete because the first coordinate separates rows by at least
/// `1/n - 1/(n+1)` and within a row the points sit on the grid `Z^d / k_n`.
#[derive(Debug, Clone)]
pub struct TriangularControl {
    pub k_seq: Vec<SamplingSequence>,
}

impl ControlMap for TriangularControl {
    fn dimension_in(&self) -> usize {
        1 + self.k_seq.len()
    }
    fn dimension_out(&self) -> usize {
        1 + self.k_seq.len()
    }
    fn eval(&self, index: &MultiIndex) -> Vec<f64> {
        let c = index.coords();
        let big_n = MultiIndex(c[1..].to_vec());
        phi_triangular(c[0], &big_n, &self.k_seq).expect("triangular control evaluated on a malformed index")
    }
    fn in_delta(&self, point: &[f64]) -> bool {
        point.len() == self.dimension_out() && point[0] == 0.0 && point[1..].iter().all(|&t| t.is_finite() && t >= 0.0)
    }
    fn name(&self) -> String {
        "triangular".into()
    }
}

/// `(n, N) -> (1/n, N/n)` on `N^{2d}` (componentwise), for normalized
/// partial sums of random fields. Limit set `{0} x [0, inf)^d`.
#[derive(Debug, Clone, Copy)]
pub struct FieldControl {
    pub dim: usize,
}

impl ControlMap for FieldControl {
    fn dimension_in(&self) -> usize {
        2 * self.dim
    }
    fn dimension_out(&self) -> usize {
        2 * self.dim
    }
    fn eval(&self, index: &MultiIndex) -> Vec<f64> {
        let c = index.coords();
        let (n, big_n) = c.split_at(self.dim);
        n.iter()
            .map(|&x| 1.0 / x as f64)
            .chain(n.iter().zip(big_n).map(|(&x, &y)| y as f64 / x as f64))
            .collect()
    }
    fn in_delta(&self, point: &[f64]) -> bool {
        point.len() == 2 * self.dim
            && point[..self.dim].iter().all(|&x| x == 0.0)
            && point[self.dim..].iter().all(|&t| t.is_finite() && t >= 0.0)
    }
    fn name(&self) -> String {
        "field".into()
    }
}

/// `(T, U) -> phi_r(T, U)`; see [`phi_alloc`]. Limit sets are
/// `(R_+ x {0}) u ({0} x R_+)` for `r = 0` and `{0} x R_+` otherwise.
///
/// For `r = 0` the pair `(2U/T^2, T/U + ...)` determines `U/T^2` and the
/// ratio `T/U`, hence `T` and `U`; the other orders invert the same way.
#[derive(Debug, Clone, Copy)]
pub struct AllocationControl {
    pub r: u32,
}

impl ControlMap for AllocationControl {
    fn dimension_in(&self) -> usize {
        2
    }
    fn dimension_out(&self) -> usize {
        2
    }
    fn eval(&self, index: &MultiIndex) -> Vec<f64> {
        let c = index.coords();
        phi_alloc(self.r, c[0], c[1]).as_vec()
    }
    fn in_delta(&self, point: &[f64]) -> bool {
        point.len() == 2 && classify_regime(self.r, RegimePoint::new(point[0], point[1])) != LimitTag::Undefined
    }
    fn name(&self) -> String {
        format!("allocation(r={})", self.r)
    }
}

/// `n -> (1/n, psi(n))` with `psi` the mantissa of `n` relative to the block
/// sequence; limit set `{0} x [1, c]`.
#[derive(Debug, Clone)]
pub struct MantissaControl {
    pub seq: SamplingSequence,
    blocks: Vec<u64>,
}

impl MantissaControl {
    pub fn new(seq: SamplingSequence) -> Self {
        Self { seq, blocks: seq.blocks() }
    }
}

impl ControlMap for MantissaControl {
    fn dimension_in(&self) -> usize {
        1
    }
    fn dimension_out(&self) -> usize {
        2
    }
    fn eval(&self, index: &MultiIndex) -> Vec<f64> {
        let n = index.coords()[0];
        let p = match self.blocks.binary_search(&n) {
            Ok(p) => p,
            Err(p) => p - 1,
        };
        vec![1.0 / n as f64, n as f64 / self.blocks[p] as f64]
    }
    fn in_delta(&self, point: &[f64]) -> bool {
        let c = match self.seq {
            SamplingSequence::Geometric { ratio } => ratio,
            _ => return false,
        };
        point.len() == 2 && point[0] == 0.0 && (1.0..=c).contains(&point[1])
    }
    fn name(&self) -> String {
        "mantissa".into()
    }
}

/// Closure-backed map, mostly for tests and ad hoc probes.
pub struct FnControl<F> {
    pub dim_in: usize,
    pub dim_out: usize,
    pub f: F,
}

impl<F> ControlMap for FnControl<F>
where
    F: Fn(&MultiIndex) -> Vec<f64> + Send + Sync,
{
    fn dimension_in(&self) -> usize {
        self.dim_in
    }
    fn dimension_out(&self) -> usize {
        self.dim_out
    }
    fn eval(&self, index: &MultiIndex) -> Vec<f64> {
        (self.f)(index)
    }
    fn in_delta(&self, _point: &[f64]) -> bool {
        false
    }
    fn name(&self) -> String {
        "closure".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    pub injective: bool,
    /// A colliding pair, in probe order.
    pub witness: Option<(MultiIndex, MultiIndex)>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        // +0 and -0 must compare equal here
        let o = if x == y { Ordering::Equal } else { x.total_cmp(y) };
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Checks that `map` is injective on `probe` by sorting the images.
pub fn probe_injectivity(map: &dyn ControlMap, probe: &[MultiIndex]) -> InjectivityReport {
    assert!(!probe.is_empty(), "probe set must be nonempty");
    let images: Vec<Vec<f64>> = probe.iter().map(|i| map.eval(i)).collect();
    let mut order: Vec<usize> = (0..probe.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&images[a], &images[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        if lex_cmp(&images[a], &images[b]) == Ordering::Equal && probe[a] != probe[b] {
            let (first, second) = if a < b { (a, b) } else { (b, a) };
            return InjectivityReport { injective: false, witness: Some((probe[first].clone(), probe[second].clone())) };
        }
    }
    InjectivityReport { injective: true, witness: None }
}

/// Smallest Euclidean distance between images of distinct probe indices.
/// Infinite coordinates are skipped. Quadratic in the probe size.
pub fn probe_separation(map: &dyn ControlMap, probe: &[MultiIndex]) -> f64 {
    let images: Vec<Vec<f64>> = probe.iter().map(|i| map.eval(i)).collect();
    let mut best = f64::INFINITY;
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            let d2: f64 = images[i]
                .iter()
                .zip(&images[j])
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.min(d2);
        }
    }
    best.sqrt()
}
