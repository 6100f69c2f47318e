//! Forward passes of the decoder's attention blocks on small dense tensors.
//!
//! * cSE: global average pool per channel, a two-layer bottleneck, and a
//!   sigmoid gate per channel.
//! * sSE: a 1×1 projection across channels and a sigmoid gate per pixel.
//! * P-scSE: both of the above in parallel, fused by addition and,
//!   optionally, by an elementwise max.
//! * Attention gate: additive attention between a skip feature map `x` and
//!   a gating signal `g` that yields one coefficient per pixel.
//!
//! There are no gradients here; these kernels exist to pin down the math.

use crate::error::{Error, Result};

/// Reduction ratio used by [`SqueezeParams::zeros`] when none is given.
pub const DEFAULT_REDUCTION: usize = 2;
/// Below this many channels the max-out branch of P-scSE is skipped.
pub const MAXOUT_MIN_CHANNELS: usize = 8;

/// Dense `(channels, height, width)` tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: [usize; 3],
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: format!("{len} values for shape {shape:?}"),
                actual: format!("{} values", data.len()),
            });
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite tensor value {v}"
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: [usize; 3]) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.shape[0]
    }

    fn plane(&self) -> usize {
        self.shape[1] * self.shape[2]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.shape[1] + i) * self.shape[2] + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        debug_assert_eq!(self.shape, other.shape);
        Tensor {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Values of every channel at one spatial position.
    fn column(&self, pixel: usize) -> Vec<f64> {
        let plane = self.plane();
        (0..self.channels())
            .map(|c| self.data[c * plane + pixel])
            .collect()
    }
}

/// Fully connected layer, equivalently a 1×1 convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn new(inputs: usize, outputs: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weight.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::DimensionMismatch {
                expected: format!("{outputs}x{inputs} weights and {outputs} biases"),
                actual: format!("{} weights and {} biases", weight.len(), bias.len()),
            });
        }
        Ok(Self {
            inputs,
            outputs,
            weight,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.inputs);
        self.weight
            .chunks(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

/// Weights of the channel (`reduce`, `expand`) and spatial excitations.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeParams {
    pub reduce: Linear,
    pub expand: Linear,
    pub spatial: Linear,
    pub reduction: usize,
}

impl SqueezeParams {
    pub fn new(reduce: Linear, expand: Linear, spatial: Linear, reduction: usize) -> Result<Self> {
        let c = reduce.inputs;
        let consistent = reduction >= 1
            && c.is_multiple_of(reduction)
            && reduce.outputs == c / reduction
            && expand.inputs == reduce.outputs
            && expand.outputs == c
            && spatial.inputs == c
            && spatial.outputs == 1;
        if !consistent {
            return Err(Error::InvalidParameter(format!(
                "inconsistent squeeze parameters for {c} channels with reduction {reduction}"
            )));
        }
        Ok(Self {
            reduce,
            expand,
            spatial,
            reduction,
        })
    }

    pub fn zeros(channels: usize, reduction: usize) -> Result<Self> {
        if reduction == 0 || !channels.is_multiple_of(reduction) {
            return Err(Error::InvalidParameter(format!(
                "reduction {reduction} must divide {channels} channels"
            )));
        }
        let hidden = channels / reduction;
        Self::new(
            Linear::zeros(channels, hidden),
            Linear::zeros(hidden, channels),
            Linear::zeros(channels, 1),
            reduction,
        )
    }

    pub fn channels(&self) -> usize {
        self.reduce.inputs
    }

    fn check(&self, u: &Tensor) -> Result<()> {
        if u.channels() != self.channels() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} channels", self.channels()),
                actual: format!("{} channels", u.channels()),
            });
        }
        Ok(())
    }
}

/// Projections of the additive attention gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w_x: Linear,
    pub w_g: Linear,
    pub psi: Linear,
}

impl GateParams {
    pub fn new(w_x: Linear, w_g: Linear, psi: Linear) -> Result<Self> {
        if w_x.outputs != w_g.outputs || psi.inputs != w_x.outputs || psi.outputs != 1 {
            return Err(Error::InvalidParameter(format!(
                "gate projections disagree: w_x -> {}, w_g -> {}, psi {} -> {}",
                w_x.outputs, w_g.outputs, psi.inputs, psi.outputs
            )));
        }
        Ok(Self { w_x, w_g, psi })
    }

    pub fn zeros(channels_x: usize, channels_g: usize, inter: usize) -> Self {
        Self {
            w_x: Linear::zeros(channels_x, inter),
            w_g: Linear::zeros(channels_g, inter),
            psi: Linear::zeros(inter, 1),
        }
    }
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[inline]
fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// Per-channel excitation `s` of cSE.
pub fn channel_gate(u: &Tensor, p: &SqueezeParams) -> Result<Vec<f64>> {
    p.check(u)?;
    let plane = u.plane().max(1) as f64;
    let z: Vec<f64> = u
        .data
        .chunks(u.plane().max(1))
        .map(|ch| ch.iter().sum::<f64>() / plane)
        .collect();
    let hidden: Vec<f64> = p.reduce.apply(&z).into_iter().map(relu).collect();
    Ok(p.expand.apply(&hidden).into_iter().map(sigmoid).collect())
}

/// Per-pixel excitation `q` of sSE, row-major over the spatial grid.
pub fn spatial_gate(u: &Tensor, p: &SqueezeParams) -> Result<Vec<f64>> {
    p.check(u)?;
    Ok((0..u.plane())
        .map(|px| sigmoid(p.spatial.apply(&u.column(px))[0]))
        .collect())
}

pub fn cse_forward(u: &Tensor, p: &SqueezeParams) -> Result<Tensor> {
    let s = channel_gate(u, p)?;
    let plane = u.plane();
    let mut out = u.clone();
    for (i, v) in out.data.iter_mut().enumerate() {
        *v *= s[i / plane];
    }
    Ok(out)
}

pub fn sse_forward(u: &Tensor, p: &SqueezeParams) -> Result<Tensor> {
    let q = spatial_gate(u, p)?;
    let plane = u.plane();
    let mut out = u.clone();
    for (i, v) in out.data.iter_mut().enumerate() {
        *v *= q[i % plane];
    }
    Ok(out)
}

/// Whether P-scSE should use its max-out branch for this channel count.
pub fn maxout_default(channels: usize) -> bool {
    channels >= MAXOUT_MIN_CHANNELS
}

/// `cse + sse`, plus `max(cse, sse)` when `maxout_enabled`.
pub fn pscse_forward(u: &Tensor, p: &SqueezeParams, maxout_enabled: bool) -> Result<Tensor> {
    let c = cse_forward(u, p)?;
    let s = sse_forward(u, p)?;
    let added = c.zip_with(&s, |a, b| a + b);
    if !maxout_enabled {
        return Ok(added);
    }
    let maxed = c.zip_with(&s, f64::max);
    Ok(added.zip_with(&maxed, |a, m| a + m))
}

/// Returns the `(1, h, w)` coefficient map `α` and `x` scaled by it.
///
/// `g` must already be resampled onto the spatial grid of `x`.
pub fn attention_gate_forward(x: &Tensor, g: &Tensor, p: &GateParams) -> Result<(Tensor, Tensor)> {
    let [cx, h, w] = x.shape;
    let [cg, gh, gw] = g.shape;
    if (h, w) != (gh, gw) {
        return Err(Error::DimensionMismatch {
            expected: format!("gating signal on a {h}x{w} grid"),
            actual: format!("{gh}x{gw}"),
        });
    }
    if cx != p.w_x.inputs || cg != p.w_g.inputs {
        return Err(Error::DimensionMismatch {
            expected: format!("{} and {} channels", p.w_x.inputs, p.w_g.inputs),
            actual: format!("{cx} and {cg} channels"),
        });
    }

    let alpha: Vec<f64> = (0..h * w)
        .map(|px| {
            let theta_x = p.w_x.apply(&x.column(px));
            let phi_g = p.w_g.apply(&g.column(px));
            let joined: Vec<f64> = theta_x
                .iter()
                .zip(&phi_g)
                .map(|(a, b)| relu(a + b))
                .collect();
            sigmoid(p.psi.apply(&joined)[0])
        })
        .collect();

    let plane = h * w;
    let mut gated = x.clone();
    for (i, v) in gated.data.iter_mut().enumerate() {
        *v *= alpha[i % plane];
    }
    Ok((
        Tensor {
            shape: [1, h, w],
            data: alpha,
        },
        gated,
    ))
}
