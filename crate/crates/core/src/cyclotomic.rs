//! Exact arithmetic in the cyclotomic ring Q(ω), ω = exp(2πi/d).
//!
//! A [`CycNumber`] stores rational coefficients against the power basis
//! `1, ω, …, ω^{φ(d)−1}`, which is the remainder of any polynomial in ω modulo
//! the d-th cyclotomic polynomial. Because that representation is unique,
//! equality and zero tests are exact.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficients of Φ_d in ascending degree, e.g. `[1, 0, 1]` for x² + 1.
pub fn cyclotomic_polynomial(d: u32) -> Result<Vec<i64>> {
    if d == 0 {
        return Err(Error::invalid("cyclotomic polynomial order must be positive"));
    }
    Ok(cached_phi(d).as_ref().clone())
}

fn phi_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_phi(d: u32) -> Arc<Vec<i64>> {
    if let Some(p) = phi_cache().lock().unwrap().get(&d) {
        return p.clone();
    }
    // x^d - 1 divided by every Φ_k with k a proper divisor of d.
    let mut poly = vec![0i64; d as usize + 1];
    poly[0] = -1;
    poly[d as usize] = 1;
    for k in divisors(d).into_iter().filter(|&k| k != d) {
        poly = div_exact_monic(&poly, &cached_phi(k));
    }
    let poly = Arc::new(poly);
    phi_cache().lock().unwrap().insert(d, poly.clone());
    poly
}

pub(crate) fn divisors(n: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (1..=n).filter(|k| n.is_multiple_of(*k)).collect();
    out.sort_unstable();
    out
}

/// Exact quotient of `num` by a monic divisor; panics if the remainder is nonzero.
fn div_exact_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    debug_assert_eq!(den[dn], 1);
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (dn..num.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        quot[i - dn] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i - dn + j] -= c * dj;
        }
    }
    assert!(rem.iter().all(|&r| r == 0), "non-exact cyclotomic division");
    quot
}

/// Euler's totient.
pub fn totient(n: u32) -> u32 {
    (1..=n).filter(|&k| k.gcd(&n) == 1).count() as u32
}

/// An exact element of Q(ω_d) in canonical power-basis form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNumber {
    order: u32,
    coeffs: Vec<BigRational>,
}

impl CycNumber {
    pub fn zero(order: u32) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let n = totient(order) as usize;
        CycNumber { order, coeffs: vec![BigRational::zero(); n] }
    }

    pub fn from_integer(order: u32, value: i64) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = BigRational::from_integer(value.into());
        z
    }

    /// ω^k with k taken mod `order`.
    pub fn root_power(order: u32, k: i64) -> Self {
        Self::from_root_multiset(order, std::iter::once(k))
    }

    /// Σ ω^{k} over the given exponents, reduced once at the end.
    pub fn from_root_multiset<I: IntoIterator<Item = i64>>(order: u32, exponents: I) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let mut dense = vec![0i64; order as usize];
        for k in exponents {
            dense[k.rem_euclid(order as i64) as usize] += 1;
        }
        Self::from_dense_integers(order, &dense)
    }

    /// Canonicalizes Σ_i c_i ω^i for arbitrary length coefficient input.
    pub fn from_dense_integers(order: u32, dense: &[i64]) -> Self {
        let dense: Vec<BigRational> = dense.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect();
        Self::canonicalize(order, dense)
    }

    pub fn from_dense(order: u32, dense: Vec<BigRational>) -> Self {
        Self::canonicalize(order, dense)
    }

    fn canonicalize(order: u32, dense: Vec<BigRational>) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let d = order as usize;
        let mut folded = vec![BigRational::zero(); d];
        for (i, c) in dense.into_iter().enumerate() {
            if !c.is_zero() {
                folded[i % d] += c;
            }
        }
        let phi = cached_phi(order);
        let deg = phi.len() - 1;
        for i in (deg..d).rev() {
            if folded[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut folded[i]);
            for (j, &pj) in phi.iter().enumerate().take(deg) {
                if pj != 0 {
                    folded[i - deg + j] -= &c * BigRational::from_integer(BigInt::from(pj));
                }
            }
        }
        folded.truncate(deg);
        CycNumber { order, coeffs: folded }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Returns the rational value if the number lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeffs.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CycNumber { order: self.order, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CycNumber { order: self.order, coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.coeffs.len();
        let mut dense = vec![BigRational::zero(); 2 * n.max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    dense[i + j] += a * b;
                }
            }
        }
        Ok(Self::canonicalize(self.order, dense))
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        CycNumber { order: self.order, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn neg(&self) -> Self {
        CycNumber { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    /// Complex conjugate, i.e. ω ↦ ω^{-1}.
    pub fn conj(&self) -> Self {
        let d = self.order as usize;
        let mut dense = vec![BigRational::zero(); d];
        for (i, c) in self.coeffs.iter().enumerate() {
            dense[(d - i % d) % d] += c;
        }
        Self::canonicalize(self.order, dense)
    }

    /// Re-expresses the number in Q(ω_N) for N a multiple of the current order,
    /// using ω_d = ω_N^{N/d}.
    pub fn lift(&self, new_order: u32) -> Result<Self> {
        if new_order == 0 || !new_order.is_multiple_of(self.order) {
            return Err(Error::invalid(format!("cannot lift order {} to {}: not a multiple", self.order, new_order)));
        }
        let stride = (new_order / self.order) as usize;
        let mut dense = vec![BigRational::zero(); new_order as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            dense[(i * stride) % new_order as usize] += c;
        }
        Ok(Self::canonicalize(new_order, dense))
    }

    /// Lifts both operands to lcm(order_a, order_b).
    pub fn unify(a: &Self, b: &Self) -> (Self, Self) {
        let l = a.order.lcm(&b.order);
        (a.lift(l).expect("lcm is a multiple"), b.lift(l).expect("lcm is a multiple"))
    }

    pub fn to_complex(&self) -> Complex64 {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / self.order as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc += pow * ratio_to_f64(c);
            pow *= w;
        }
        acc
    }

    /// Coefficients rendered as `p` or `p/q` strings.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNumber(d={}, {})", self.order, self)
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}·")?;
                    }
                    if i == 1 {
                        write!(f, "ω")?;
                    } else {
                        write!(f, "ω^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1).unwrap(), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2).unwrap(), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4).unwrap(), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6).unwrap(), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12).unwrap(), vec![1, 0, -1, 0, 1]);
        assert!(cyclotomic_polynomial(0).is_err());
    }

    #[test]
    fn divisor_products_rebuild_x_pow_d_minus_one() {
        for d in 1..=64u32 {
            let mut prod = vec![1i64];
            for k in divisors(d) {
                prod = poly_mul(&prod, &cyclotomic_polynomial(k).unwrap());
            }
            let mut expect = vec![0i64; d as usize + 1];
            expect[0] = -1;
            expect[d as usize] = 1;
            assert_eq!(prod, expect, "d = {d}");
            assert_eq!(cyclotomic_polynomial(d).unwrap().len() - 1, totient(d) as usize);
        }
    }

    #[test]
    fn root_powers() {
        assert_eq!(CycNumber::root_power(4, 2), CycNumber::from_integer(4, -1));
        let s = CycNumber::from_root_multiset(3, 0..3);
        assert!(s.is_zero());
        let w = CycNumber::root_power(12, 5).to_complex();
        let e = Complex64::from_polar(1.0, 10.0 * std::f64::consts::PI / 12.0);
        assert!((w - e).norm() < 1e-12);
        assert_eq!(CycNumber::root_power(5, -1), CycNumber::root_power(5, 4));
    }

    #[test]
    fn ring_examples() {
        let a = CycNumber::root_power(9, 2);
        assert_eq!(a.checked_add(&CycNumber::zero(9)).unwrap(), a);
        assert!(CycNumber::from_root_multiset(5, 0..5).is_zero());

        let one = CycNumber::from_integer(4, 1);
        let w = CycNumber::root_power(4, 1);
        let prod = one.checked_add(&w).unwrap().checked_mul(&one.checked_sub(&w).unwrap()).unwrap();
        assert_eq!(prod, CycNumber::from_integer(4, 2));

        assert!(one.checked_add(&CycNumber::root_power(4, 2)).unwrap().is_zero());
        let s7 = CycNumber::from_root_multiset(7, [0, 1]);
        assert!(!s7.is_zero());
        assert!(s7.to_complex().norm() > 1e-3);
    }

    #[test]
    fn order_mismatch_is_rejected_and_lift_fixes_it() {
        let a = CycNumber::root_power(2, 1);
        let b = CycNumber::root_power(3, 1);
        assert!(matches!(a.checked_add(&b), Err(Error::OrderMismatch { .. })));
        let (a6, b6) = CycNumber::unify(&a, &b);
        let sum = a6.checked_add(&b6).unwrap();
        let expect = a.to_complex() + b.to_complex();
        assert!((sum.to_complex() - expect).norm() < 1e-12);
        assert!(a.lift(5).is_err());
    }

    #[test]
    fn complex_embedding_examples() {
        assert_eq!(CycNumber::zero(7).to_complex(), Complex64::new(0.0, 0.0));
        let i = CycNumber::root_power(4, 1).to_complex();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let r2 = CycNumber::from_root_multiset(8, [1, 7]).to_complex();
        assert!((r2 - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn conj_matches_embedding() {
        let a = CycNumber::from_dense_integers(12, &[1, 2, 0, -3, 5, 1, 0, 0, 2, 0, 0, 7]);
        assert!((a.conj().to_complex() - a.to_complex().conj()).norm() < 1e-9);
    }

    fn random_cyc(rng: &mut ChaCha8Rng, d: u32) -> CycNumber {
        let n = totient(d) as usize;
        let dense: Vec<i64> = (0..n).map(|_| rng.gen_range(-10..=10)).collect();
        CycNumber::from_dense_integers(d, &dense)
    }

    #[test]
    fn multiplication_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let d = rng.gen_range(1..=24);
            let a = random_cyc(&mut rng, d);
            let b = random_cyc(&mut rng, d);
            let lhs = a.checked_mul(&b).unwrap().to_complex();
            let rhs = a.to_complex() * b.to_complex();
            assert!((lhs - rhs).norm() < 1e-9, "d={d} a={a} b={b}");
        }
    }

    #[test]
    fn zero_test_agrees_with_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let d = rng.gen_range(1..=24);
            let a = random_cyc(&mut rng, d);
            if a.is_zero() {
                assert!(a.to_complex().norm() < 1e-9);
            } else {
                assert!(a.to_complex().norm() > 1e-9, "d={d} a={a}");
            }
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(CycNumber::zero(5).to_string(), "0");
        assert_eq!(CycNumber::from_dense_integers(5, &[2, -1, 0, 3]).to_string(), "2 - ω + 3·ω^3");
    }
}
