use crate::scalar::{dot, log_sigmoid, sigmoid, Real};

/// Whether a (center, context) pair was observed or drawn from the noise
/// distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairLabel {
    Positive,
    Negative,
}

impl PairLabel {
    fn target<T: Real>(self) -> T {
        match self {
            PairLabel::Positive => T::one(),
            PairLabel::Negative => T::zero(),
        }
    }
}

/// Negative-sampling loss of a single pair:
/// `-log σ(v'·v)` for positives, `-log σ(-v'·v)` for negatives.
pub fn pair_loss<T: Real>(center: &[T], context: &[T], label: PairLabel) -> T {
    let s = dot(center, context);
    match label {
        PairLabel::Positive => -log_sigmoid(s),
        PairLabel::Negative => -log_sigmoid(-s),
    }
}

/// Gradients of [`pair_loss`] with respect to the center (input) vector and
/// the context (output) vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient<T> {
    pub center: Vec<T>,
    pub context: Vec<T>,
}

/// `∂L/∂v = (σ(v'·v) - y) v'` and `∂L/∂v' = (σ(v'·v) - y) v`.
pub fn pair_gradient<T: Real>(center: &[T], context: &[T], label: PairLabel) -> PairGradient<T> {
    let g = pair_coefficient(center, context, label);
    PairGradient {
        center: context.iter().map(|&x| g * x).collect(),
        context: center.iter().map(|&x| g * x).collect(),
    }
}

/// Shared scalar factor `σ(v'·v) - y` of both gradients.
#[inline]
pub(crate) fn pair_coefficient<T: Real>(center: &[T], context: &[T], label: PairLabel) -> T {
    sigmoid(dot(center, context)) - label.target()
}
