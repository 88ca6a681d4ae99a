//! Sparse polynomials in the four spacetime coordinates.

use serde::{Deserialize, Serialize};

/// `coefficient · x0^e0 · x1^e1 · x2^e2 · x3^e3`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub powers: [u32; 4],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Self { terms: vec![Term { coef: c, powers: [0; 4] }] }
    }

    /// `Σ c_a x^a + d`
    pub fn linear(coeffs: [f64; 4], offset: f64) -> Self {
        let mut terms: Vec<Term> = (0..4)
            .filter(|&a| coeffs[a] != 0.0)
            .map(|a| {
                let mut powers = [0; 4];
                powers[a] = 1;
                Term { coef: coeffs[a], powers }
            })
            .collect();
        if offset != 0.0 {
            terms.push(Term { coef: offset, powers: [0; 4] });
        }
        Self { terms }
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * (0..4).map(|a| x[a].powi(t.powers[a] as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[axis] > 0)
            .map(|t| {
                let mut powers = t.powers;
                powers[axis] -= 1;
                Term { coef: t.coef * t.powers[axis] as f64, powers }
            })
            .collect();
        Polynomial { terms }
    }

    pub fn gradient(&self, x: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|a| self.derivative(a).eval(x))
    }
}
