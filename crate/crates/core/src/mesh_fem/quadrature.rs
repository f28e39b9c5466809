use super::mesh::Point;

/// Quadrature rule on the reference cell ([0,1] or the unit triangle).
///
/// Both rules are exact for polynomials of degree four and higher than
/// needed for the mass and stiffness terms of quadratic elements.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Three-point Gauss rule on [0, 1] (degree 5).
    pub fn interval() -> Self {
        let s = (0.6f64).sqrt();
        QuadratureRule {
            points: vec![[0.5 * (1.0 - s), 0.0], [0.5, 0.0], [0.5 * (1.0 + s), 0.0]],
            weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
        }
    }

    /// Six-point rule on the reference triangle (degree 4); weights sum to 1/2.
    pub fn triangle() -> Self {
        let a = 0.445_948_490_915_965;
        let wa = 0.223_381_589_678_011 / 2.0;
        let b = 0.091_576_213_509_771;
        let wb = 0.109_951_743_655_322 / 2.0;
        QuadratureRule {
            points: vec![
                [a, a],
                [1.0 - 2.0 * a, a],
                [a, 1.0 - 2.0 * a],
                [b, b],
                [1.0 - 2.0 * b, b],
                [b, 1.0 - 2.0 * b],
            ],
            weights: vec![wa, wa, wa, wb, wb, wb],
        }
    }

    pub fn for_dimension(dim: usize) -> Self {
        match dim {
            1 => Self::interval(),
            _ => Self::triangle(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_reference_measure() {
        let q1 = QuadratureRule::interval();
        assert!((q1.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let q2 = QuadratureRule::triangle();
        assert!((q2.weights.iter().sum::<f64>() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn interval_rule_is_degree_four_exact() {
        let q = QuadratureRule::interval();
        for p in 0..=4u32 {
            let num: f64 = q
                .points
                .iter()
                .zip(&q.weights)
                .map(|(pt, w)| w * pt[0].powi(p as i32))
                .sum();
            let exact = 1.0 / (p as f64 + 1.0);
            assert!((num - exact).abs() < 1e-14, "degree {p}: {num} vs {exact}");
        }
    }

    #[test]
    fn triangle_rule_is_degree_four_exact() {
        let q = QuadratureRule::triangle();
        // int over unit triangle of x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u64| (1..=n).product::<u64>().max(1) as f64;
        for a in 0..=4u64 {
            for b in 0..=(4 - a) {
                let num: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(pt, w)| w * pt[0].powi(a as i32) * pt[1].powi(b as i32))
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((num - exact).abs() < 1e-14, "x^{a} y^{b}: {num} vs {exact}");
            }
        }
    }
}
