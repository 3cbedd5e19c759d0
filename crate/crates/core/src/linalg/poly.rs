use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold under which extreme coefficients are treated as zero.
const TRIM_THRESHOLD: f64 = 1e-14;

/// Iteration budget of the Aberth-Ehrlich solver.
pub const ROOT_ITERATION_BUDGET: usize = 200;

/// Residual bound accepted for each returned root, relative to
/// `max|c_j| * (1 + |root|)^D`.
const RESIDUAL_BOUND: f64 = 1e-8;

/// `c_0 + c_1 y + ... + c_D y^D` with `c_D != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    coefficients: Vec<Complex64>,
}

impl ComplexPolynomial {
    /// Coefficients in ascending degree. Trailing (highest-degree) coefficients
    /// below `1e-14 * max|c_j|` are dropped.
    pub fn new(mut coefficients: Vec<Complex64>) -> Result<Self> {
        let scale = max_modulus(&coefficients);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(
                "polynomial coefficients must be finite and not all zero".into(),
            ));
        }
        while coefficients
            .last()
            .is_some_and(|c| c.norm() <= TRIM_THRESHOLD * scale)
        {
            coefficients.pop();
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, y: Complex64) -> Complex64 {
        horner(&self.coefficients, y)
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.coefficients.iter().map(|c| c * factor).collect())
    }

    pub fn derivative(&self) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * j as f64)
            .collect()
    }

    /// Expands `lead * prod (y - r)`.
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Result<Self> {
        let mut coefficients = vec![lead];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coefficients.len() + 1];
            for (j, &c) in coefficients.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= c * r;
            }
            coefficients = next;
        }
        Self::new(coefficients)
    }
}

/// All `D` roots of `poly`, with multiplicity, in no particular order.
///
/// Low-order coefficients below the trim threshold are split off as exact
/// zero roots. The rest is solved by Aberth-Ehrlich iteration started from
/// `D` points on a circle whose radius is the geometric mean of the Cauchy
/// upper and lower root bounds.
pub fn roots(poly: &ComplexPolynomial) -> Result<Vec<Complex64>> {
    let degree = poly.degree();
    if degree == 0 {
        return Err(Error::InvalidParameter(
            "cannot root a constant polynomial".into(),
        ));
    }
    let scale = max_modulus(poly.coefficients());
    let zeros = poly
        .coefficients()
        .iter()
        .take_while(|c| c.norm() <= TRIM_THRESHOLD * scale)
        .count();
    let reduced = &poly.coefficients()[zeros..];
    let mut found = vec![Complex64::new(0.0, 0.0); zeros];
    match reduced.len() - 1 {
        0 => {}
        1 => found.push(-reduced[0] / reduced[1]),
        _ => found.extend(aberth(reduced)?),
    }

    for &r in &found {
        let residual = poly.eval(r).norm();
        let bound = RESIDUAL_BOUND * scale * (1.0 + r.norm()).powi(degree as i32);
        if !(residual <= bound) {
            return Err(Error::NonConvergence {
                what: "Aberth-Ehrlich root finder",
                budget: ROOT_ITERATION_BUDGET,
            });
        }
    }
    Ok(found)
}

fn aberth(coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coefficients.len() - 1;
    let lead = coefficients[degree].norm();
    let constant = coefficients[0].norm();
    let upper = 1.0
        + coefficients[..degree]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
    let lower = constant
        / (constant
            + coefficients[1..]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max));
    let radius = (upper * lower).sqrt();

    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / degree as f64 + 0.4))
        .collect();
    let mut done = vec![false; degree];
    let reversed: Vec<Complex64> = coefficients.iter().rev().copied().collect();

    for _ in 0..ROOT_ITERATION_BUDGET {
        let mut all_done = true;
        for k in 0..degree {
            if done[k] {
                continue;
            }
            let Some(ratio) = newton_ratio(coefficients, &reversed, z[k]) else {
                done[k] = true;
                continue;
            };
            all_done = false;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[k] -= step;
            if !(z[k].re.is_finite() && z[k].im.is_finite()) {
                return Err(Error::NonConvergence {
                    what: "Aberth-Ehrlich root finder",
                    budget: ROOT_ITERATION_BUDGET,
                });
            }
            if step.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if all_done {
            break;
        }
    }
    Ok(z)
}

/// `p(z) / p'(z)`, or `None` when `|p(z)|` is already at the rounding level
/// of its evaluation. Points outside the unit disk are evaluated through the
/// reversed polynomial to avoid overflow.
fn newton_ratio(
    coefficients: &[Complex64],
    reversed: &[Complex64],
    z: Complex64,
) -> Option<Complex64> {
    let degree = (coefficients.len() - 1) as f64;
    if z.norm() <= 1.0 {
        let (p, dp, bound) = horner_with_derivative(coefficients, z);
        if p.norm() <= 4.0 * f64::EPSILON * bound {
            return None;
        }
        Some(p / dp)
    } else {
        let w = z.inv();
        let (r, dr, bound) = horner_with_derivative(reversed, w);
        if r.norm() <= 4.0 * f64::EPSILON * bound {
            return None;
        }
        // p(z) = z^D r(1/z)  =>  p/p' = z r / (D r - w r')
        Some(z * r / (degree * r - w * dr))
    }
}

/// Newton iteration on the derivative, converging to a double root of the
/// polynomial from a nearby starting point.
pub fn refine_double_root(poly: &ComplexPolynomial, start: Complex64) -> Complex64 {
    let first = poly.derivative();
    if first.len() < 2 {
        return start;
    }
    let mut z = start;
    for _ in 0..20 {
        let (d1, d2, _) = horner_with_derivative(&first, z);
        if d2.norm() == 0.0 {
            break;
        }
        let step = d1 / d2;
        z -= step;
        if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Value, derivative and the rounding-error scale `sum |c_j| |z|^j`.
fn horner_with_derivative(coefficients: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let modulus = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for &c in coefficients.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        bound = bound * modulus + c.norm();
    }
    (p, dp, bound)
}

fn horner(coefficients: &[Complex64], z: Complex64) -> Complex64 {
    coefficients
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn max_modulus(values: &[Complex64]) -> f64 {
    values.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
