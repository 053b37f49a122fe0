use super::{Context, EnvError};
use rand::Rng;
use serde::{Deserialize, Serialize};

const HOLDER_TOL: f64 = 1e-9;

/// Closed-form expected-reward shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldKind {
    Constant {
        value: f64,
    },
    /// `intercept + slopes · x`.
    LinearRamp {
        intercept: f64,
        slopes: Vec<f64>,
    },
    /// A cone of height `peak - base` over `center`, flat `base` outside `radius`.
    Bump {
        center: Vec<f64>,
        base: f64,
        peak: f64,
        radius: f64,
    },
    /// Piecewise-linear along one axis through `(x, value)` knots, constant past the ends.
    Piecewise {
        axis: usize,
        knots: Vec<(f64, f64)>,
    },
    /// Multilinear interpolation on a regular grid with `nodes_per_axis` nodes per axis.
    /// `values` is row-major with the last axis varying fastest.
    Table {
        nodes_per_axis: usize,
        values: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Noise {
    #[default]
    Bernoulli,
    /// Uniform on `[p - h, p + h]` with `h = min(half_width, p, 1 - p)`.
    UniformBand { half_width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardField {
    dim: usize,
    kind: FieldKind,
    noise: Noise,
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

impl RewardField {
    pub fn new(dim: usize, kind: FieldKind, noise: Noise) -> Result<Self, EnvError> {
        let bad = |msg: String| Err(EnvError::InvalidField(msg));
        if dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        match &kind {
            FieldKind::Constant { value } => {
                if !in_unit(*value) {
                    return bad(format!("constant {value} outside [0, 1]"));
                }
            }
            FieldKind::LinearRamp { intercept, slopes } => {
                if slopes.len() != dim {
                    return bad(format!("{} slopes for dimension {dim}", slopes.len()));
                }
                let lo = intercept + slopes.iter().map(|s| s.min(0.0)).sum::<f64>();
                let hi = intercept + slopes.iter().map(|s| s.max(0.0)).sum::<f64>();
                if !(in_unit(lo) && in_unit(hi)) {
                    return bad(format!("ramp ranges over [{lo}, {hi}], outside [0, 1]"));
                }
            }
            FieldKind::Bump {
                center,
                base,
                peak,
                radius,
            } => {
                if center.len() != dim {
                    return bad(format!("bump center has {} coordinates", center.len()));
                }
                if !(in_unit(*base) && in_unit(*peak)) {
                    return bad("bump base and peak must lie in [0, 1]".into());
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("bump radius {radius} must be positive"));
                }
            }
            FieldKind::Piecewise { axis, knots } => {
                if *axis >= dim {
                    return bad(format!("axis {axis} out of range for dimension {dim}"));
                }
                if knots.is_empty() {
                    return bad("piecewise field needs at least one knot".into());
                }
                if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return bad("piecewise knots must be strictly increasing in x".into());
                }
                if let Some((x, v)) = knots.iter().find(|(x, v)| !in_unit(*x) || !in_unit(*v)) {
                    return bad(format!("knot ({x}, {v}) outside [0, 1]^2"));
                }
            }
            FieldKind::Table { nodes_per_axis, values } => {
                if *nodes_per_axis < 2 {
                    return bad("table needs at least 2 nodes per axis".into());
                }
                let expected = nodes_per_axis
                    .checked_pow(dim as u32)
                    .ok_or_else(|| EnvError::InvalidField("table too large".into()))?;
                if values.len() != expected {
                    return bad(format!("table has {} values, expected {expected}", values.len()));
                }
                if let Some(v) = values.iter().find(|v| !in_unit(**v)) {
                    return bad(format!("table value {v} outside [0, 1]"));
                }
            }
        }
        if let Noise::UniformBand { half_width } = noise {
            if !(0.0..=0.5).contains(&half_width) {
                return bad(format!("band half-width {half_width} outside [0, 0.5]"));
            }
        }
        Ok(Self { dim, kind, noise })
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self, EnvError> {
        Self::new(dim, FieldKind::Constant { value }, Noise::Bernoulli)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    /// `π_f(x)`.
    pub fn expected_reward(&self, x: &Context) -> Result<f64, EnvError> {
        x.check_dim(self.dim)?;
        Ok(self.eval(x.coords()))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        let v = match &self.kind {
            FieldKind::Constant { value } => *value,
            FieldKind::LinearRamp { intercept, slopes } => {
                intercept + slopes.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>()
            }
            FieldKind::Bump {
                center,
                base,
                peak,
                radius,
            } => {
                let d = center
                    .iter()
                    .zip(x)
                    .map(|(c, xi)| (c - xi) * (c - xi))
                    .sum::<f64>()
                    .sqrt();
                let w = (1.0 - d / radius).max(0.0);
                w * peak + (1.0 - w) * base
            }
            FieldKind::Piecewise { axis, knots } => piecewise(knots, x[*axis]),
            FieldKind::Table { nodes_per_axis, values } => multilinear(*nodes_per_axis, values, x),
        };
        v.clamp(0.0, 1.0)
    }

    pub fn sample_reward<R: Rng + ?Sized>(&self, x: &Context, rng: &mut R) -> Result<f64, EnvError> {
        let p = self.expected_reward(x)?;
        Ok(self.noise.sample(p, rng))
    }
}

impl Noise {
    pub fn sample<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> f64 {
        match *self {
            Noise::Bernoulli => {
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            Noise::UniformBand { half_width } => {
                let h = half_width.min(p).min(1.0 - p);
                if h <= 0.0 {
                    p
                } else {
                    rng.gen_range(p - h..=p + h)
                }
            }
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Noise::Bernoulli)
    }
}

fn piecewise(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = knots.partition_point(|(kx, _)| *kx <= x);
    let (x0, y0) = knots[k - 1];
    let (x1, y1) = knots[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn multilinear(n: usize, values: &[f64], x: &[f64]) -> f64 {
    let dim = x.len();
    let step = (n - 1) as f64;
    let mut base = Vec::with_capacity(dim);
    let mut frac = Vec::with_capacity(dim);
    for &xi in x {
        let s = xi * step;
        let i = (s.floor() as usize).min(n - 2);
        base.push(i);
        frac.push(s - i as f64);
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut weight = 1.0;
        let mut index = 0;
        for d in 0..dim {
            let bit = (corner >> d) & 1;
            weight *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
            index = index * n + base[d] + bit;
        }
        if weight != 0.0 {
            acc += weight * values[index];
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub passed: bool,
    /// Largest `|Δπ| / (L ‖Δx‖^α)` seen.
    pub worst_ratio: f64,
    /// A violating pair, when one was found.
    pub witness: Option<(Context, Context)>,
}

/// Samples `n_pairs` uniform context pairs and checks `|Δπ| ≤ L ‖Δx‖^α`.
pub fn verify_holder<R: Rng + ?Sized>(
    field: &RewardField,
    l: f64,
    alpha: f64,
    n_pairs: usize,
    rng: &mut R,
) -> HolderReport {
    let dim = field.dim();
    let mut worst_ratio: f64 = 0.0;
    let mut witness = None;
    for _ in 0..n_pairs.max(1) {
        let a: super::Coords = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let b: super::Coords = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let (xa, xb) = (Context::from_coords_unchecked(a), Context::from_coords_unchecked(b));
        let dist = xa.distance(&xb);
        if dist == 0.0 {
            continue;
        }
        let diff = (field.eval(xa.coords()) - field.eval(xb.coords())).abs();
        let bound = l * dist.powf(alpha);
        let ratio = diff / bound;
        if ratio > worst_ratio {
            worst_ratio = ratio;
        }
        if diff > bound + HOLDER_TOL && witness.is_none() {
            witness = Some((xa, xb));
        }
    }
    HolderReport {
        passed: witness.is_none(),
        worst_ratio,
        witness,
    }
}
