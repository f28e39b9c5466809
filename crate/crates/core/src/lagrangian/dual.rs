use std::ops::{Add, Mul, Neg, Sub};

/// Second-order forward-mode dual number over `N` independent variables:
/// value, gradient and (full, symmetric) Hessian are propagated through
/// arithmetic exactly.
///
/// `N` is the number of point-local quantities a Lagrangian density depends
/// on (field values, gradients, divergences), so it stays small and the
/// arrays live on the stack.
#[derive(Clone, Copy, Debug)]
pub struct Dual2<const N: usize> {
    pub val: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
}

impl<const N: usize> Dual2<N> {
    #[inline]
    pub fn constant(val: f64) -> Self {
        Dual2 { val, grad: [0.0; N], hess: [[0.0; N]; N] }
    }

    /// Seeds variable `index` with unit first derivative.
    #[inline]
    pub fn variable(val: f64, index: usize) -> Self {
        let mut d = Self::constant(val);
        d.grad[index] = 1.0;
        d
    }

    #[inline]
    pub fn scale(mut self, s: f64) -> Self {
        self.val *= s;
        for g in &mut self.grad {
            *g *= s;
        }
        for row in &mut self.hess {
            for h in row {
                *h *= s;
            }
        }
        self
    }

    #[inline]
    pub fn add_scalar(mut self, s: f64) -> Self {
        self.val += s;
        self
    }

    /// Composes with a scalar function given its value and first two
    /// derivatives at `self.val` (univariate chain rule).
    #[inline]
    pub fn chain(&self, value: f64, d1: f64, d2: f64) -> Self {
        let mut out = Self::constant(value);
        for i in 0..N {
            out.grad[i] = d1 * self.grad[i];
        }
        for i in 0..N {
            for j in 0..N {
                out.hess[i][j] = d1 * self.hess[i][j] + d2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    #[inline]
    pub fn squared(&self) -> Self {
        self.chain(self.val * self.val, 2.0 * self.val, 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
    }
}

impl<const N: usize> Add for Dual2<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.val += o.val;
        for i in 0..N {
            self.grad[i] += o.grad[i];
        }
        for i in 0..N {
            for j in 0..N {
                self.hess[i][j] += o.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Dual2<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.val -= o.val;
        for i in 0..N {
            self.grad[i] -= o.grad[i];
        }
        for i in 0..N {
            for j in 0..N {
                self.hess[i][j] -= o.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Dual2<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Dual2<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.val * o.val);
        for i in 0..N {
            out.grad[i] = self.val * o.grad[i] + o.val * self.grad[i];
        }
        for i in 0..N {
            for j in 0..N {
                out.hess[i][j] = self.val * o.hess[i][j]
                    + o.val * self.hess[i][j]
                    + self.grad[i] * o.grad[j]
                    + o.grad[i] * self.grad[j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        // f(a, b) = a * b at (2, 3)
        let a = Dual2::<2>::variable(2.0, 0);
        let b = Dual2::<2>::variable(3.0, 1);
        let f = a * b;
        assert_eq!(f.val, 6.0);
        assert_eq!(f.grad, [3.0, 2.0]);
        assert_eq!(f.hess[0][1], 1.0);
        assert_eq!(f.hess[1][0], 1.0);
        assert_eq!(f.hess[0][0], 0.0);
    }

    #[test]
    fn chain_rule_against_finite_differences() {
        // f(a, b) = g(a*b + a) with g known analytically: g(t) = t^3
        let eval = |av: f64, bv: f64| -> f64 {
            let t = av * bv + av;
            t * t * t
        };
        let at = |av: f64, bv: f64| -> Dual2<2> {
            let a = Dual2::<2>::variable(av, 0);
            let b = Dual2::<2>::variable(bv, 1);
            let t = a * b + a;
            let (v, d1, d2) = (t.val.powi(3), 3.0 * t.val * t.val, 6.0 * t.val);
            t.chain(v, d1, d2)
        };
        let (av, bv, h) = (1.3, -0.7, 1e-5);
        let f = at(av, bv);
        let d_a = (eval(av + h, bv) - eval(av - h, bv)) / (2.0 * h);
        let d_b = (eval(av, bv + h) - eval(av, bv - h)) / (2.0 * h);
        assert!((f.grad[0] - d_a).abs() < 1e-8);
        assert!((f.grad[1] - d_b).abs() < 1e-8);
        let h_ab = (eval(av + h, bv + h) - eval(av + h, bv - h) - eval(av - h, bv + h)
            + eval(av - h, bv - h))
            / (4.0 * h * h);
        assert!((f.hess[0][1] - h_ab).abs() < 1e-6);
        let h_aa = (eval(av + h, bv) - 2.0 * eval(av, bv) + eval(av - h, bv)) / (h * h);
        assert!((f.hess[0][0] - h_aa).abs() < 1e-5);
    }

    #[test]
    fn squared_matches_mul() {
        let a = Dual2::<3>::variable(1.7, 2);
        let s = a.squared();
        let m = a * a;
        assert_eq!(s.val, m.val);
        assert_eq!(s.grad, m.grad);
        assert_eq!(s.hess, m.hess);
    }
}
