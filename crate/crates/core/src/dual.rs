//! Dual numbers for forward-mode differentiation.
//!
//! A dual number `a + a′ε` with `ε² = 0` carries a value and one directional
//! derivative. Seeding input `i` with tangent 1 and all others with 0 makes
//! the tangent of the result the partial derivative `∂f/∂xᵢ`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::expr::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Dual {
        Dual { value, deriv }
    }

    /// Independent variable: tangent 1.
    pub fn variable(value: f64) -> Dual {
        Dual::new(value, 1.0)
    }

    pub fn constant(value: f64) -> Dual {
        Dual::new(value, 0.0)
    }

    /// Inputs for `∂/∂x_direction`: every coordinate constant except one.
    pub fn seed(point: &[f64], direction: usize) -> Vec<Dual> {
        point
            .iter()
            .enumerate()
            .map(|(j, &v)| Dual::new(v, if j == direction { 1.0 } else { 0.0 }))
            .collect()
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value / rhs.value,
            (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Dual {
        Dual::constant(v)
    }

    fn value(self) -> f64 {
        self.value
    }

    fn tangent(self) -> f64 {
        self.deriv
    }

    fn exp(self) -> Dual {
        let e = self.value.exp();
        Dual::new(e, self.deriv * e)
    }

    fn ln(self) -> Dual {
        Dual::new(self.value.ln(), self.deriv / self.value)
    }

    fn sqrt(self) -> Dual {
        let s = self.value.sqrt();
        let d = if self.deriv == 0.0 {
            0.0
        } else {
            self.deriv / (2.0 * s)
        };
        Dual::new(s, d)
    }

    fn powf(self, exponent: Dual) -> Dual {
        let (a, b) = (self.value, exponent.value);
        let value = a.powf(b);
        let mut deriv = 0.0;
        // Skip zero-tangent terms so 0 · ∞ never appears.
        if self.deriv != 0.0 {
            deriv += b * a.powf(b - 1.0) * self.deriv;
        }
        if exponent.deriv != 0.0 {
            deriv += value * a.ln() * exponent.deriv;
        }
        Dual::new(value, deriv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual::variable(3.0);
        let y = x * x + Dual::constant(2.0) * x;
        assert_eq!(y, Dual::new(15.0, 8.0));
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::variable(2.0);
        let y = Dual::constant(1.0) / x;
        assert_eq!(y, Dual::new(0.5, -0.25));
    }

    #[test]
    fn transcendental() {
        let x = Dual::variable(4.0);
        assert_eq!(x.sqrt(), Dual::new(2.0, 0.25));
        assert_eq!(Scalar::ln(x).deriv, 0.25);
        assert_eq!(Scalar::exp(Dual::variable(0.0)), Dual::new(1.0, 1.0));
        let p = x.powf(Dual::constant(3.0));
        assert_eq!(p, Dual::new(64.0, 48.0));
        let q = Dual::constant(2.0).powf(Dual::variable(3.0));
        assert!((q.deriv - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn seeding() {
        let s = Dual::seed(&[1.0, 2.0, 3.0], 1);
        assert_eq!(
            s.iter().map(|d| d.deriv).collect::<Vec<_>>(),
            vec![0.0, 1.0, 0.0]
        );
    }
}
