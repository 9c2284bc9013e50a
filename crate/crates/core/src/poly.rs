//! Dense polynomials with non-negative integer coefficients.
//!
//! Multiplication packs each operand into one big integer (Kronecker
//! substitution at a power of two larger than every product coefficient),
//! multiplies once, and reads the product's coefficients back off the bits.

use std::collections::BTreeMap;

use rug::integer::Order;
use rug::Integer;
use thiserror::Error;

/// Below this degree the schoolbook product is used.
const SCHOOLBOOK_DEGREE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("subtraction would make the coefficient of x^{exponent} negative")]
    NegativeCoefficient { exponent: usize },
    #[error("product coefficients may reach {needed}, above the supplied bound {bound}")]
    BoundExceeded { needed: u128, bound: u64 },
    #[error("coefficient overflow at x^{exponent}")]
    Overflow { exponent: usize },
}

/// `coeffs[i]` is the coefficient of `x^i`; trailing zeros are trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CoeffPoly {
    coeffs: Vec<u64>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        CoeffPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        CoeffPoly { coeffs: vec![1] }
    }

    pub fn from_coeffs(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        CoeffPoly { coeffs }
    }

    /// `count * x^exponent`.
    pub fn monomial(exponent: usize, count: u64) -> Self {
        let mut coeffs = vec![0; exponent + 1];
        coeffs[exponent] = count;
        Self::from_coeffs(coeffs)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn coeff(&self, exponent: usize) -> u64 {
        self.coeffs.get(exponent).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Sum of all coefficients, i.e. the value at 1.
    pub fn mass(&self) -> u128 {
        self.coeffs.iter().map(|&c| c as u128).sum()
    }

    pub fn max_coeff(&self) -> u64 {
        self.coeffs.iter().copied().max().unwrap_or(0)
    }

    /// Adds `count * x^exponent` in place.
    pub fn add_term(&mut self, exponent: usize, count: u64) {
        if count == 0 {
            return;
        }
        if self.coeffs.len() <= exponent {
            self.coeffs.resize(exponent + 1, 0);
        }
        self.coeffs[exponent] = self.coeffs[exponent]
            .checked_add(count)
            .expect("coefficient overflow");
    }

    /// Non-zero terms as `(exponent, coefficient)` in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(e, &c)| (e, c))
    }

    /// Exponent -> coefficient map of the non-zero terms.
    pub fn to_map(&self) -> BTreeMap<usize, u64> {
        self.terms().collect()
    }

    pub fn evaluate(&self, x: &Integer) -> Integer {
        self.coeffs
            .iter()
            .rev()
            .fold(Integer::new(), |acc, &c| acc * x + c)
    }
}

pub fn poly_add(p: &CoeffPoly, q: &CoeffPoly) -> CoeffPoly {
    let (long, short) = if p.coeffs.len() >= q.coeffs.len() {
        (p, q)
    } else {
        (q, p)
    };
    let mut coeffs = long.coeffs.clone();
    for (c, &s) in coeffs.iter_mut().zip(&short.coeffs) {
        *c = c.checked_add(s).expect("coefficient overflow");
    }
    CoeffPoly::from_coeffs(coeffs)
}

pub fn poly_add_assign(p: &mut CoeffPoly, q: &CoeffPoly) {
    if p.coeffs.len() < q.coeffs.len() {
        p.coeffs.resize(q.coeffs.len(), 0);
    }
    for (c, &s) in p.coeffs.iter_mut().zip(&q.coeffs) {
        *c = c.checked_add(s).expect("coefficient overflow");
    }
}

/// Coefficient-wise `p - q`; `q` must not exceed `p` anywhere.
pub fn poly_sub_nonneg(p: &CoeffPoly, q: &CoeffPoly) -> Result<CoeffPoly, PolyError> {
    let mut coeffs = p.coeffs.clone();
    for (exponent, &s) in q.coeffs.iter().enumerate() {
        match coeffs.get_mut(exponent) {
            Some(c) if *c >= s => *c -= s,
            _ if s == 0 => {}
            _ => return Err(PolyError::NegativeCoefficient { exponent }),
        }
    }
    Ok(CoeffPoly::from_coeffs(coeffs))
}

/// Drops every term of degree above `max_degree`.
pub fn poly_truncate(p: &CoeffPoly, max_degree: usize) -> CoeffPoly {
    let keep = p.coeffs.len().min(max_degree + 1);
    CoeffPoly::from_coeffs(p.coeffs[..keep].to_vec())
}

/// Exact product, given that no product coefficient exceeds `coeff_bound`.
///
/// The bound is checked up front against
/// `min(max(p) * mass(q), max(q) * mass(p))`, which dominates every product
/// coefficient; a bound below that is rejected.
pub fn poly_mul(p: &CoeffPoly, q: &CoeffPoly, coeff_bound: u64) -> Result<CoeffPoly, PolyError> {
    if p.is_zero() || q.is_zero() {
        return Ok(CoeffPoly::zero());
    }
    let needed = (p.max_coeff() as u128 * q.mass()).min(q.max_coeff() as u128 * p.mass());
    if needed > coeff_bound as u128 {
        return Err(PolyError::BoundExceeded {
            needed,
            bound: coeff_bound,
        });
    }
    if p.coeffs.len().min(q.coeffs.len()) <= SCHOOLBOOK_DEGREE {
        return Ok(schoolbook(&p.coeffs, &q.coeffs));
    }
    let width = digit_width(coeff_bound);
    let a = pack(&p.coeffs, width);
    let product = if p == q {
        a.square()
    } else {
        a * pack(&q.coeffs, width)
    };
    let len = p.coeffs.len() + q.coeffs.len() - 1;
    Ok(CoeffPoly::from_coeffs(unpack(&product, width, len)))
}

/// `p * p`, under the same bound contract as [`poly_mul`].
pub fn poly_square(p: &CoeffPoly, coeff_bound: u64) -> Result<CoeffPoly, PolyError> {
    poly_mul(p, p, coeff_bound)
}

/// Bits per packed coefficient: the exponent of the smallest power of two
/// strictly greater than `bound`.
fn digit_width(bound: u64) -> u32 {
    (u64::BITS - bound.leading_zeros()).max(1)
}

fn schoolbook(p: &[u64], q: &[u64]) -> CoeffPoly {
    let mut out = vec![0u64; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (o, &b) in out[i..].iter_mut().zip(q) {
            *o += a * b;
        }
    }
    CoeffPoly::from_coeffs(out)
}

fn pack(coeffs: &[u64], width: u32) -> Integer {
    let total_bits = coeffs.len() as u64 * width as u64;
    let mut words = vec![0u64; total_bits.div_ceil(64) as usize + 1];
    let mut bit = 0u64;
    for &c in coeffs {
        let word = (bit / 64) as usize;
        let offset = (bit % 64) as u32;
        words[word] |= c << offset;
        if offset + width > 64 {
            words[word + 1] |= c >> (64 - offset);
        }
        bit += width as u64;
    }
    Integer::from_digits(&words, Order::Lsf)
}

fn unpack(value: &Integer, width: u32, len: usize) -> Vec<u64> {
    let mut words = value.to_digits::<u64>(Order::Lsf);
    words.resize((len as u64 * width as u64).div_ceil(64) as usize + 1, 0);
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    (0..len as u64)
        .map(|i| {
            let bit = i * width as u64;
            let word = (bit / 64) as usize;
            let offset = (bit % 64) as u32;
            let mut acc = words[word] >> offset;
            if offset + width > 64 {
                acc |= words[word + 1] << (64 - offset);
            }
            acc & mask
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[u64]) -> CoeffPoly {
        CoeffPoly::from_coeffs(c.to_vec())
    }

    #[test]
    fn add_examples() {
        assert_eq!(poly_add(&p(&[1, 1]), &p(&[0, 1])), p(&[1, 2]));
        assert_eq!(poly_add(&p(&[3, 0, 2]), &CoeffPoly::zero()), p(&[3, 0, 2]));
        assert_eq!(poly_add(&p(&[0, 0, 1]), &p(&[1])), p(&[1, 0, 1]));
    }

    #[test]
    fn sub_examples() {
        assert_eq!(
            poly_sub_nonneg(&p(&[1, 4, 4]), &p(&[1, 0, 2])).unwrap(),
            p(&[0, 4, 2])
        );
        assert!(poly_sub_nonneg(&p(&[2, 5]), &p(&[2, 5])).unwrap().is_zero());
        assert_eq!(
            poly_sub_nonneg(&p(&[1]), &p(&[0, 1])),
            Err(PolyError::NegativeCoefficient { exponent: 1 })
        );
    }

    #[test]
    fn mul_examples() {
        assert_eq!(poly_mul(&p(&[1, 2]), &p(&[3, 1]), 8).unwrap(), p(&[3, 7, 2]));
        assert_eq!(poly_mul(&p(&[4, 0, 9]), &CoeffPoly::one(), 9).unwrap(), p(&[4, 0, 9]));
        assert_eq!(
            poly_mul(&p(&[1, 1, 1]), &p(&[1, 1, 1]), 9).unwrap(),
            p(&[1, 2, 3, 2, 1])
        );
        assert!(matches!(
            poly_mul(&p(&[1, 2]), &p(&[3, 1]), 5),
            Err(PolyError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn kronecker_path_matches_schoolbook_above_crossover() {
        let a: Vec<u64> = (0..100).map(|i| (i * 37 % 101) as u64).collect();
        let b: Vec<u64> = (0..80).map(|i| (i * 13 % 97) as u64).collect();
        let expected = schoolbook(&a, &b);
        let got = poly_mul(&p(&a), &p(&b), 100 * 96 * 80).unwrap();
        assert_eq!(got, expected);
        let sq = poly_square(&p(&a), 100 * 100 * 100).unwrap();
        assert_eq!(sq, schoolbook(&a, &a));
    }

    #[test]
    fn wide_digits_round_trip() {
        // 64-bit digits straddle word boundaries in every position.
        let a = vec![u32::MAX as u64; 40];
        let bound = u64::MAX;
        let got = poly_mul(&p(&a), &p(&[1; 40]), bound).unwrap();
        assert_eq!(got, schoolbook(&a, &[1; 40]));
    }

    #[test]
    fn truncate_examples() {
        let x = p(&[1, 1, 0, 0, 0, 1]);
        assert_eq!(poly_truncate(&x, 2), p(&[1, 1]));
        assert_eq!(poly_truncate(&x, 5), x);
        assert_eq!(poly_truncate(&x, 0), p(&[1]));
    }

    #[test]
    fn digit_width_is_smallest_power_above_bound() {
        assert_eq!(digit_width(0), 1);
        assert_eq!(digit_width(1), 1);
        assert_eq!(digit_width(7), 3);
        assert_eq!(digit_width(8), 4);
        assert_eq!(digit_width(u64::MAX), 64);
    }
}
