use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on the input sums before internal renormalization.
const SUM_TOLERANCE: f64 = 1e-6;

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn entropy<F: Real>(p: &[F]) -> F {
    -p.iter()
        .filter(|&&x| x > F::zero())
        .map(|&x| x * x.log2())
        .sum::<F>()
}

fn normalized<F: Real>(p: &[F], name: &str) -> Result<Vec<F>> {
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < F::zero()) {
        return Err(Error::InvalidDistribution(format!("{name} has entry {bad}")));
    }
    let total: F = p.iter().copied().sum();
    if (total.as_f64() - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("{name} sums to {total}")));
    }
    Ok(p.iter().map(|&x| x / total).collect())
}

/// Jensen-Shannon divergence `H(m) - (H(p) + H(q)) / 2` with `m = (p + q) / 2`,
/// in bits, so the result lies in `[0, 1]`.
pub fn jsd<F: Real>(p: &[F], q: &[F]) -> Result<F> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let p = normalized(p, "p")?;
    let q = normalized(q, "q")?;
    let half = F::lit(0.5);
    let m: Vec<F> = p.iter().zip(&q).map(|(&a, &b)| (a + b) * half).collect();
    let d = entropy(&m) - (entropy(&p) + entropy(&q)) * half;
    Ok(d.max(F::zero()).min(F::one()))
}
