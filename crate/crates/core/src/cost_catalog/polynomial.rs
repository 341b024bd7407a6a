//! Multivariate polynomials of low degree, used for the perturbation terms
//! `f(x)` and `g(y)` of the perturbed quadratic cost.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_DEGREE: u32 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<T> {
    pub coef: T,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    dim: usize,
    terms: Vec<Monomial<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(dim: usize, terms: Vec<Monomial<T>>) -> Result<Self> {
        for t in &terms {
            if t.powers.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.powers.len() });
            }
            let deg: u32 = t.powers.iter().sum();
            if deg > MAX_DEGREE {
                return Err(Error::InvalidCost(format!("monomial degree {deg} exceeds {MAX_DEGREE}")));
            }
            if !t.coef.is_finite() {
                return Err(Error::InvalidCost("non-finite polynomial coefficient".into()));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    /// `scale * |x|^2`
    pub fn scaled_square_norm(dim: usize, scale: T) -> Self {
        let terms = (0..dim)
            .map(|k| Monomial { coef: scale, powers: (0..dim).map(|j| if j == k { 2 } else { 0 }).collect() })
            .collect();
        Self { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == T::zero())
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.partial(x, &[])
    }

    /// Partial derivative with respect to the listed coordinates (with
    /// repetition), e.g. `[0, 0, 1]` is `d^3 / dx0^2 dx1`.
    pub fn partial(&self, x: &[T], idx: &[usize]) -> T {
        let mut mult = vec![0u32; self.dim];
        for &i in idx {
            mult[i] += 1;
        }
        let mut total = T::zero();
        'terms: for t in &self.terms {
            let mut v = t.coef;
            for k in 0..self.dim {
                let (e, m) = (t.powers[k], mult[k]);
                if m > e {
                    continue 'terms;
                }
                for r in 0..m {
                    v = v * T::from_u32(e - r).unwrap();
                }
                v = v * x[k].powi((e - m) as i32);
            }
            total = total + v;
        }
        total
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        (0..self.dim).map(|i| self.partial(x, &[i])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partials_of_cubic() {
        // p = 2 x0^2 x1 + x1^3
        let p = Polynomial::new(
            2,
            vec![Monomial { coef: 2.0, powers: vec![2, 1] }, Monomial { coef: 1.0, powers: vec![0, 3] }],
        )
        .unwrap();
        let x = [1.5, -0.5];
        assert_eq!(p.eval(&x), 2.0 * 2.25 * -0.5 + -0.125);
        assert_eq!(p.partial(&x, &[0]), 4.0 * 1.5 * -0.5);
        assert_eq!(p.partial(&x, &[0, 1]), 4.0 * 1.5);
        assert_eq!(p.partial(&x, &[1, 0, 0]), 4.0);
        assert_eq!(p.partial(&x, &[1, 1, 1]), 6.0);
        assert_eq!(p.partial(&x, &[0, 0, 0]), 0.0);
    }

    #[test]
    fn degree_limit_enforced() {
        let bad = Polynomial::new(1, vec![Monomial { coef: 1.0, powers: vec![5] }]);
        assert!(matches!(bad, Err(Error::InvalidCost(_))));
    }
}
