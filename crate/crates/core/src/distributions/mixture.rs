//! Mixtures `x -> ∫ F_t(x) dρ(t)` of a parametric family against a mixing law.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution as _, Poisson, StandardNormal};

use super::{check_param, DistError, Distribution, LogarithmicLaw, Normal, StandardizedPoisson, Support};
use crate::index::{classify_regime, LimitTag, RegimePoint};
use crate::quadrature::Simpson;

/// Weakly continuous family `t -> μ_t` indexed by points of a limit set.
pub trait LimitFamily: Send + Sync + fmt::Debug {
    fn parameter_dim(&self) -> usize;

    fn law(&self, t: &[f64]) -> Result<Arc<dyn Distribution>, DistError>;

    fn name(&self) -> &'static str;

    /// `F_t(x)`; override when it is cheaper than building the law.
    fn component_cdf(&self, t: &[f64], x: f64) -> Result<f64, DistError> {
        Ok(self.law(t)?.cdf(x))
    }

    /// One draw from `μ_t`.
    fn component_sample(&self, t: &[f64], rng: &mut dyn RngCore) -> Result<f64, DistError> {
        Ok(self.law(t)?.sample(rng))
    }
}

fn check_dim(family: &dyn LimitFamily, t: &[f64]) -> Result<(), DistError> {
    if t.len() != family.parameter_dim() {
        return Err(DistError::Dimension { family: family.parameter_dim(), mixing: t.len() });
    }
    Ok(())
}

/// `t -> N(0, variance_scale * t_1 * ... * t_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianScaleFamily {
    dim: usize,
    variance_scale: f64,
}

impl GaussianScaleFamily {
    pub fn new(dim: usize, variance_scale: f64) -> Result<Self, DistError> {
        check_param("variance scale", "finite and >= 0", variance_scale, variance_scale.is_finite() && variance_scale >= 0.0)?;
        check_param("parameter dimension", ">= 1", dim as f64, dim >= 1)?;
        Ok(Self { dim, variance_scale })
    }

    /// `t -> N(0, t)`.
    pub fn scalar() -> Self {
        Self { dim: 1, variance_scale: 1.0 }
    }

    fn variance(&self, t: &[f64]) -> Result<f64, DistError> {
        check_dim(self, t)?;
        if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DistError::OutsideFamily { point: t.to_vec(), reason: "coordinates must be finite and >= 0".into() });
        }
        Ok(self.variance_scale * t.iter().product::<f64>())
    }
}

impl LimitFamily for GaussianScaleFamily {
    fn parameter_dim(&self) -> usize {
        self.dim
    }

    fn law(&self, t: &[f64]) -> Result<Arc<dyn Distribution>, DistError> {
        Ok(Arc::new(Normal::with_variance(0.0, self.variance(t)?)?))
    }

    fn name(&self) -> &'static str {
        "gaussian-scale"
    }

    fn component_cdf(&self, t: &[f64], x: f64) -> Result<f64, DistError> {
        let v = self.variance(t)?;
        if v == 0.0 {
            return Ok(if x >= 0.0 { 1.0 } else { 0.0 });
        }
        Ok(crate::special::std_normal_cdf(x / v.sqrt()))
    }

    fn component_sample(&self, t: &[f64], rng: &mut dyn RngCore) -> Result<f64, DistError> {
        let v = self.variance(t)?;
        let z: f64 = StandardNormal.sample(rng);
        Ok(v.sqrt() * z)
    }
}

/// `t -> π*_{1/t}` for `t > 0`, extended by `N(0, 1)` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StdPoissonFamily;

impl StdPoissonFamily {
    fn lambda(&self, t: &[f64]) -> Result<Option<f64>, DistError> {
        check_dim(self, t)?;
        let t = t[0];
        if !t.is_finite() || t < 0.0 {
            return Err(DistError::OutsideFamily { point: vec![t], reason: "parameter must be finite and >= 0".into() });
        }
        Ok(if t == 0.0 { None } else { Some(1.0 / t) })
    }
}

impl LimitFamily for StdPoissonFamily {
    fn parameter_dim(&self) -> usize {
        1
    }

    fn law(&self, t: &[f64]) -> Result<Arc<dyn Distribution>, DistError> {
        Ok(match self.lambda(t)? {
            Some(lambda) => Arc::new(StandardizedPoisson::new(lambda)?),
            None => Arc::new(Normal::standard()),
        })
    }

    fn name(&self) -> &'static str {
        "standardized-poisson"
    }

    fn component_sample(&self, t: &[f64], rng: &mut dyn RngCore) -> Result<f64, DistError> {
        Ok(match self.lambda(t)? {
            Some(lambda) => poisson_std_draw(lambda, rng)?,
            None => StandardNormal.sample(rng),
        })
    }
}

fn poisson_std_draw(lambda: f64, rng: &mut dyn RngCore) -> Result<f64, DistError> {
    let p = Poisson::new(lambda)
        .map_err(|_| DistError::Parameter { name: "lambda", constraint: "finite and > 0", value: lambda })?;
    let k: f64 = p.sample(rng);
    Ok((k - lambda) / lambda.sqrt())
}

/// Limit laws of the standardized count of boxes holding exactly `r` balls,
/// indexed by regime points `(g, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFamily {
    pub r: u32,
}

impl RegimeFamily {
    pub fn new(r: u32) -> Self {
        Self { r }
    }

    fn tag(&self, t: &[f64]) -> Result<LimitTag, DistError> {
        check_dim(self, t)?;
        match classify_regime(self.r, RegimePoint::new(t[0], t[1])) {
            LimitTag::Undefined => Err(DistError::OutsideFamily {
                point: t.to_vec(),
                reason: format!("not a limit point for r = {}", self.r),
            }),
            tag => Ok(tag),
        }
    }
}

impl LimitFamily for RegimeFamily {
    fn parameter_dim(&self) -> usize {
        2
    }

    fn law(&self, t: &[f64]) -> Result<Arc<dyn Distribution>, DistError> {
        Ok(match self.tag(t)? {
            LimitTag::PoissonStd { lambda } => Arc::new(StandardizedPoisson::new(lambda)?),
            _ => Arc::new(Normal::standard()),
        })
    }

    fn name(&self) -> &'static str {
        "allocation-regime"
    }

    fn component_sample(&self, t: &[f64], rng: &mut dyn RngCore) -> Result<f64, DistError> {
        Ok(match self.tag(t)? {
            LimitTag::PoissonStd { lambda } => poisson_std_draw(lambda, rng)?,
            _ => StandardNormal.sample(rng),
        })
    }
}

/// The same law at every parameter.
#[derive(Debug, Clone)]
pub struct ConstantFamily {
    dim: usize,
    law: Arc<dyn Distribution>,
}

impl ConstantFamily {
    pub fn new(dim: usize, law: Arc<dyn Distribution>) -> Self {
        Self { dim, law }
    }
}

impl LimitFamily for ConstantFamily {
    fn parameter_dim(&self) -> usize {
        self.dim
    }

    fn law(&self, t: &[f64]) -> Result<Arc<dyn Distribution>, DistError> {
        check_dim(self, t)?;
        Ok(self.law.clone())
    }

    fn name(&self) -> &'static str {
        "constant"
    }
}

/// Absolutely continuous mixing law on a box.
pub trait ContinuousMixing: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `(lower, upper)` corners of the box carrying the density.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);

    fn density(&self, t: &[f64]) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;
}

/// Uniform law on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    inv_volume: f64,
}

impl UniformBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DistError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(DistError::Dimension { family: lower.len(), mixing: upper.len() });
        }
        for (a, b) in lower.iter().zip(&upper) {
            check_param("box upper bound", "finite and > lower bound", *b, a.is_finite() && b.is_finite() && b > a)?;
        }
        let volume: f64 = lower.iter().zip(&upper).map(|(a, b)| b - a).product();
        Ok(Self { lower, upper, inv_volume: 1.0 / volume })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self, DistError> {
        Self::new(vec![a], vec![b])
    }
}

impl ContinuousMixing for UniformBox {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lower.clone(), self.upper.clone())
    }

    fn density(&self, t: &[f64]) -> f64 {
        let inside = t.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (a, b))| x >= a && x <= b);
        if inside {
            self.inv_volume
        } else {
            0.0
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| {
                let u: f64 = rng.random();
                a + u * (b - a)
            })
            .collect()
    }
}

/// The logarithmic law on `[1, c]` as a mixing law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogarithmicMixing(pub LogarithmicLaw);

impl LogarithmicMixing {
    pub fn new(c: f64) -> Result<Self, DistError> {
        Ok(Self(LogarithmicLaw::new(c)?))
    }
}

impl ContinuousMixing for LogarithmicMixing {
    fn dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![1.0], vec![self.0.c()])
    }

    fn density(&self, t: &[f64]) -> f64 {
        self.0.density(t[0])
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        vec![self.0.sample(rng)]
    }
}

/// The law `ρ` of the limit parameter.
#[derive(Debug, Clone)]
pub enum MixingLaw {
    Discrete(Vec<(Vec<f64>, f64)>),
    Continuous(Arc<dyn ContinuousMixing>),
}

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
const DENSITY_MASS_TOLERANCE: f64 = 1e-6;

impl MixingLaw {
    /// Finitely many atoms `(t_i, w_i)`; weights must be nonnegative and sum to 1.
    pub fn discrete(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self, DistError> {
        if atoms.is_empty() {
            return Err(DistError::WeightSum(0.0));
        }
        let dim = atoms[0].0.len();
        for (t, w) in &atoms {
            if t.len() != dim {
                return Err(DistError::Dimension { family: dim, mixing: t.len() });
            }
            check_param("mixing weight", "finite and >= 0", *w, w.is_finite() && *w >= 0.0)?;
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(DistError::WeightSum(total));
        }
        Ok(MixingLaw::Discrete(atoms))
    }

    /// Dirac mass at `t`.
    pub fn point(t: Vec<f64>) -> Self {
        MixingLaw::Discrete(vec![(t, 1.0)])
    }

    /// Continuous mixing law; the density mass is checked by quadrature.
    pub fn continuous(law: Arc<dyn ContinuousMixing>) -> Result<Self, DistError> {
        let (lower, upper) = law.bounds();
        let mass = match Simpson::default().integrate_box(|t| law.density(t), &lower, &upper) {
            Ok(m) => m,
            Err(e) => e.estimate,
        };
        if (mass - 1.0).abs() > DENSITY_MASS_TOLERANCE {
            return Err(DistError::DensityMass(mass));
        }
        Ok(MixingLaw::Continuous(law))
    }

    pub fn dim(&self) -> usize {
        match self {
            MixingLaw::Discrete(atoms) => atoms[0].0.len(),
            MixingLaw::Continuous(law) => law.dim(),
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        match self {
            MixingLaw::Discrete(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (t, w) in atoms {
                    acc += w;
                    if u < acc {
                        return t.clone();
                    }
                }
                atoms.iter().rev().find(|(_, w)| *w > 0.0).unwrap_or(&atoms[atoms.len() - 1]).0.clone()
            }
            MixingLaw::Continuous(law) => law.sample(rng),
        }
    }
}

/// The law `∫ μ_t dρ(t)`.
#[derive(Clone)]
pub struct MixtureLaw {
    family: Arc<dyn LimitFamily>,
    mixing: MixingLaw,
    /// Components of a discrete mixing law, built once.
    components: Vec<(Arc<dyn Distribution>, f64)>,
    quadrature: Simpson,
}

impl fmt::Debug for MixtureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixtureLaw")
            .field("family", &self.family.name())
            .field("mixing", &self.mixing)
            .finish()
    }
}

impl MixtureLaw {
    pub fn new(family: Arc<dyn LimitFamily>, mixing: MixingLaw) -> Result<Self, DistError> {
        if family.parameter_dim() != mixing.dim() {
            return Err(DistError::Dimension { family: family.parameter_dim(), mixing: mixing.dim() });
        }
        let components = match &mixing {
            MixingLaw::Discrete(atoms) => {
                atoms.iter().map(|(t, w)| Ok((family.law(t)?, *w))).collect::<Result<Vec<_>, DistError>>()?
            }
            MixingLaw::Continuous(_) => Vec::new(),
        };
        Ok(Self { family, mixing, components, quadrature: Simpson::default() })
    }

    pub fn with_quadrature(mut self, quadrature: Simpson) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn family(&self) -> &dyn LimitFamily {
        self.family.as_ref()
    }

    pub fn mixing(&self) -> &MixingLaw {
        &self.mixing
    }

    fn weighted(&self, f: impl Fn(&dyn Distribution) -> f64) -> f64 {
        let v: f64 = self.components.iter().map(|(d, w)| w * f(d.as_ref())).sum();
        v.clamp(0.0, 1.0)
    }

    fn integrate(&self, law: &Arc<dyn ContinuousMixing>, x: f64) -> Result<f64, DistError> {
        let (lower, upper) = law.bounds();
        let failure: RefCell<Option<DistError>> = RefCell::new(None);
        let integrand = |t: &[f64]| {
            let rho = law.density(t);
            if rho == 0.0 {
                return 0.0;
            }
            match self.family.component_cdf(t, x) {
                Ok(v) => rho * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let result = self.quadrature.integrate_box(integrand, &lower, &upper);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(result?.clamp(0.0, 1.0))
    }
}

impl Distribution for MixtureLaw {
    fn cdf(&self, x: f64) -> f64 {
        match mixture_cdf(self, x) {
            Ok(v) => v,
            Err(DistError::Quadrature(e)) => e.estimate.clamp(0.0, 1.0),
            Err(_) => f64::NAN,
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        match &self.mixing {
            MixingLaw::Discrete(_) => self.weighted(|d| d.cdf_left(x)),
            MixingLaw::Continuous(_) => self.cdf(x),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        mixture_sample(self, rng)
    }

    fn support(&self) -> Support {
        if self.components.is_empty() {
            return Support::Interval { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
        }
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        let mut all_atomic = true;
        for (d, _) in &self.components {
            let s = d.support();
            if matches!(s, Support::Interval { .. } | Support::Mixed { .. }) {
                all_atomic = false;
            }
            let (a, b) = s.bounds();
            lower = lower.min(a);
            upper = upper.max(b);
        }
        if all_atomic {
            Support::Atoms(self.jump_points())
        } else {
            Support::Mixed { lower, upper }
        }
    }

    fn jump_points(&self) -> Vec<f64> {
        let mut jumps: Vec<f64> = self.components.iter().filter(|(_, w)| *w > 0.0).flat_map(|(d, _)| d.jump_points()).collect();
        jumps.sort_unstable_by(f64::total_cmp);
        jumps.dedup();
        jumps
    }
}

/// `∫ F_t(x) dρ(t)`: an exact weighted sum for discrete mixing, adaptive
/// Simpson quadrature otherwise.
pub fn mixture_cdf(m: &MixtureLaw, x: f64) -> Result<f64, DistError> {
    check_param("x", "finite", x, x.is_finite())?;
    match &m.mixing {
        MixingLaw::Discrete(_) => Ok(m.weighted(|d| d.cdf(x))),
        MixingLaw::Continuous(law) => m.integrate(law, x),
    }
}

/// Two-stage draw: `t ~ ρ`, then `x ~ μ_t`.
pub fn mixture_sample(m: &MixtureLaw, rng: &mut dyn RngCore) -> f64 {
    match &m.mixing {
        MixingLaw::Discrete(_) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (d, w) in &m.components {
                acc += w;
                if u < acc {
                    return d.sample(rng);
                }
            }
            let (d, _) = m.components.iter().rev().find(|(_, w)| *w > 0.0).unwrap_or(&m.components[0]);
            d.sample(rng)
        }
        MixingLaw::Continuous(law) => {
            let t = law.sample(rng);
            // the mixing law lives inside the family's index set, checked at construction
            m.family.component_sample(&t, rng).unwrap_or(f64::NAN)
        }
    }
}
