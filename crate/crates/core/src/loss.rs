//! Strongly convex, differentiable node losses.
//!
//! Every supported loss has a derivative of the form
//! `linear·x + cubic·x³ + offset` with `linear > 0` and `cubic >= 0`, so a
//! sum of losses is again of that form. [`LossGroup`] stores such a sum by its
//! three coefficients, which makes pooling a block of nodes O(1) and lets the
//! inverse of the pooled derivative be computed without touching the members.

use crate::error::{Error, Result};
use crate::roots::solve_increasing;

/// Relative tolerance on `|f'(x) - s|` for inverse-derivative evaluations.
pub const INVERSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum LossFunction {
    /// `½·w·(x − y)²`
    Quadratic { w: f64, y: f64 },
    /// `a·x² + b·x⁴ + c·x`
    Quartic { a: f64, b: f64, c: f64 },
    /// `base(x) + slope·x`
    LinearShift { base: Box<LossFunction>, slope: f64 },
}

impl LossFunction {
    pub fn quadratic(w: f64, y: f64) -> Result<Self> {
        let loss = LossFunction::Quadratic { w, y };
        loss.validate()?;
        Ok(loss)
    }

    pub fn quartic(a: f64, b: f64, c: f64) -> Result<Self> {
        let loss = LossFunction::Quartic { a, b, c };
        loss.validate()?;
        Ok(loss)
    }

    /// Wraps `self` with an additional linear term `slope·x`.
    pub fn shifted(self, slope: f64) -> Self {
        LossFunction::LinearShift {
            base: Box::new(self),
            slope,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossFunction::Quadratic { w, y } => {
                if !(w.is_finite() && *w > 0.0) {
                    return Err(Error::InvalidLoss(format!("quadratic weight must be positive and finite, got {w}")));
                }
                if !y.is_finite() {
                    return Err(Error::InvalidLoss(format!("quadratic target must be finite, got {y}")));
                }
            }
            LossFunction::Quartic { a, b, c } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidLoss(format!("quartic `a` must be positive and finite, got {a}")));
                }
                if !(b.is_finite() && *b >= 0.0) {
                    return Err(Error::InvalidLoss(format!("quartic `b` must be nonnegative and finite, got {b}")));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidLoss(format!("quartic `c` must be finite, got {c}")));
                }
            }
            LossFunction::LinearShift { base, slope } => {
                if !slope.is_finite() {
                    return Err(Error::InvalidLoss(format!("shift slope must be finite, got {slope}")));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            LossFunction::Quadratic { w, y } => 0.5 * w * (x - y) * (x - y),
            LossFunction::Quartic { a, b, c } => {
                let x2 = x * x;
                a * x2 + b * x2 * x2 + c * x
            }
            LossFunction::LinearShift { base, slope } => base.value(x) + slope * x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            LossFunction::Quadratic { w, y } => w * (x - y),
            LossFunction::Quartic { a, b, c } => 2.0 * a * x + 4.0 * b * x * x * x + c,
            LossFunction::LinearShift { base, slope } => base.derivative(x) + slope,
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            LossFunction::Quadratic { w, .. } => *w,
            LossFunction::Quartic { a, b, .. } => 2.0 * a + 12.0 * b * x * x,
            LossFunction::LinearShift { base, .. } => base.second_derivative(x),
        }
    }

    /// `(f*)'(s)`: the unique `x` with `f'(x) = s`.
    pub fn inverse_derivative(&self, s: f64) -> f64 {
        match self {
            LossFunction::Quadratic { w, y } => y + s / w,
            _ => LossGroup::new(self).inverse_derivative(s),
        }
    }

    /// Unconstrained minimizer, `(f*)'(0)`.
    pub fn minimizer(&self) -> f64 {
        self.inverse_derivative(0.0)
    }

    pub fn is_quadratic(&self) -> bool {
        match self {
            LossFunction::Quadratic { .. } => true,
            LossFunction::Quartic { b, .. } => *b == 0.0,
            LossFunction::LinearShift { base, .. } => base.is_quadratic(),
        }
    }

    fn coefficients(&self) -> (f64, f64, f64) {
        match self {
            LossFunction::Quadratic { w, y } => (*w, 0.0, -w * y),
            LossFunction::Quartic { a, b, c } => (2.0 * a, 4.0 * b, *c),
            LossFunction::LinearShift { base, slope } => {
                let (l, k, o) = base.coefficients();
                (l, k, o + slope)
            }
        }
    }
}

/// The sum of one or more losses, kept as the coefficients of its derivative
/// `linear·x + cubic·x³ + offset`.
///
/// `offset` caches the constant part, which includes every linear shift of
/// the members. A group is never empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossGroup {
    linear: f64,
    cubic: f64,
    offset: f64,
    len: usize,
}

impl LossGroup {
    pub fn new(loss: &LossFunction) -> Self {
        let (linear, cubic, offset) = loss.coefficients();
        LossGroup {
            linear,
            cubic,
            offset,
            len: 1,
        }
    }

    pub fn from_losses<'a, I>(losses: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a LossFunction>,
    {
        let mut iter = losses.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::ContractViolation("loss group must be nonempty".into()))?;
        let mut group = LossGroup::new(first);
        for loss in iter {
            group.push(loss);
        }
        Ok(group)
    }

    pub fn push(&mut self, loss: &LossFunction) {
        self.merge(&LossGroup::new(loss));
    }

    pub fn merge(&mut self, other: &LossGroup) {
        self.linear += other.linear;
        self.cubic += other.cubic;
        self.offset += other.offset;
        self.len += other.len;
    }

    pub fn merged(mut self, other: &LossGroup) -> Self {
        self.merge(other);
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// True when every member is quadratic, so the inverse is closed form.
    pub fn is_quadratic(&self) -> bool {
        self.cubic == 0.0
    }

    /// `Σ f_i'(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.linear * x + self.cubic * x * x * x + self.offset
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.linear + 3.0 * self.cubic * x * x
    }

    /// `((Σ f_i)*)'(s)`: the common value `x` with `Σ f_i'(x) = s`.
    pub fn inverse_derivative(&self, s: f64) -> f64 {
        if self.is_quadratic() {
            (s - self.offset) / self.linear
        } else {
            self.inverse_derivative_iterative(s)
        }
    }

    /// Always uses the root finder, even for all-quadratic groups.
    pub fn inverse_derivative_iterative(&self, s: f64) -> f64 {
        // With cubic >= 0 the root lies between 0 and the linear-only root,
        // and Newton from the linear-only root approaches it monotonically.
        let guess = (s - self.offset) / self.linear;
        solve_increasing(
            |x| (self.derivative(x), self.second_derivative(x)),
            s,
            guess,
            INVERSE_TOLERANCE * (1.0 + s.abs()),
        )
    }
}

/// The parameter `t` at which the pooled block value `((Σ_B f)*)'(t + beta)`
/// meets the attached node's value `(f*)'(−t)`.
///
/// Both sides equal a common `x` with `Σ_B f'(x) + f'(x) = beta`, so the
/// search is a single inverse-derivative evaluation on the enlarged group.
pub fn equilibrium_t(group: &LossGroup, beta: f64, attach: &LossFunction) -> (f64, f64) {
    let x = group.merged(&LossGroup::new(attach)).inverse_derivative(beta);
    (-attach.derivative(x), x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(w: f64, y: f64) -> LossFunction {
        LossFunction::quadratic(w, y).unwrap()
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(quad(1.0, 4.0).derivative(3.0), -1.0);
        let f5 = LossFunction::quartic(1.0, 0.25, 0.0).unwrap();
        assert_eq!(f5.derivative(4.0), 72.0);
        assert_eq!(quad(1.0, 2.0).shifted(3.0).derivative(2.0), 3.0);
    }

    #[test]
    fn inverse_derivative_examples() {
        assert_eq!(quad(1.0, 4.0).inverse_derivative(0.0), 4.0);
        let f5 = LossFunction::quartic(1.0, 0.25, 0.0).unwrap();
        assert!(f5.inverse_derivative(0.0).abs() < 1e-15);
        let x = f5.inverse_derivative(3.0);
        assert!((x - 1.0).abs() < 1e-12);
        assert!((f5.derivative(x) - 3.0).abs() <= 1e-12 * 4.0);
    }

    #[test]
    fn group_examples() {
        let g = LossGroup::from_losses(&[quad(1.0, 4.0), quad(1.0, 2.0), quad(1.0, 2.0)]).unwrap();
        assert!((g.inverse_derivative(4.0) - 4.0).abs() < 1e-15);
        assert!((g.inverse_derivative(1.0) - 3.0).abs() < 1e-15);
        let g4 = g.merged(&LossGroup::new(&quad(1.0, 8.0)));
        assert!((g4.inverse_derivative(0.0) - 4.0).abs() < 1e-15);
        let single = LossFunction::quartic(0.7, 0.3, -1.0).unwrap();
        let gs = LossGroup::new(&single);
        assert_eq!(gs.inverse_derivative(2.5), single.inverse_derivative(2.5));
    }

    #[test]
    fn empty_group_is_a_contract_violation() {
        let none: [LossFunction; 0] = [];
        assert!(matches!(LossGroup::from_losses(&none), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(LossFunction::quadratic(0.0, 1.0).is_err());
        assert!(LossFunction::quadratic(1.0, f64::NAN).is_err());
        assert!(LossFunction::quartic(0.0, 1.0, 0.0).is_err());
        assert!(LossFunction::quartic(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn equilibrium_examples() {
        let (t, x) = equilibrium_t(&LossGroup::new(&quad(1.0, 4.0)), 0.0, &quad(1.0, 2.0));
        assert!((t + 1.0).abs() < 1e-14 && (x - 3.0).abs() < 1e-14);

        let g = LossGroup::from_losses(&[quad(1.0, 4.0), quad(1.0, 2.0), quad(1.0, 2.0)]).unwrap();
        let (t, _) = equilibrium_t(&g, 0.0, &quad(1.0, 8.0));
        assert!((t - 4.0).abs() < 1e-14);

        // The root lies below -3: at t = -3 the block sits at 3 and the
        // attached quartic at 1, and the gap increases with t.
        let f5 = LossFunction::quartic(1.0, 0.25, 0.0).unwrap();
        let gap = |t: f64| g.inverse_derivative(t + 4.0) - f5.inverse_derivative(-t);
        assert!((gap(-3.0) - 2.0).abs() < 1e-12);
        let (t, _) = equilibrium_t(&g, 4.0, &f5);
        assert!(t < -3.0);
        assert!(gap(t).abs() <= 1e-10 * (1.0 + t.abs()));
    }
}
