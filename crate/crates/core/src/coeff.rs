//! Coefficient systems.
//!
//! Every cochain in this crate takes values in a module over a ring of
//! scalars. Four systems are supported: exact rationals `Q`, the integers
//! `Z`, prime fields `Zp:<p>` and real vectors `Rd:<d>` (a module over the
//! reals with tolerance-based equality). The [`Coefficients`] trait is the
//! single abstraction the cochain code is written against.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};
use serde_json::Value as Json;
use thiserror::Error;

/// Default comparison tolerance for real-vector coefficients.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("unknown coefficient system `{0}` (expected Q, Z, Zp:<p> or Rd:<d>)")]
    Unknown(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("real vector dimension must be at least 1")]
    ZeroDimension,
    #[error("value {value} does not belong to coefficient system {system}")]
    MixedSystems { system: String, value: String },
    #[error("cannot decode a {system} value from `{found}`")]
    Decode { system: String, found: String },
}

/// Descriptor of a coefficient system, as named on the command line and in
/// JSON files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientSystem {
    Rationals,
    Integers,
    PrimeField(u64),
    RealVectors(usize),
}

impl CoefficientSystem {
    pub fn is_field(&self) -> bool {
        matches!(self, Self::Rationals | Self::PrimeField(_))
    }

    pub fn is_pid(&self) -> bool {
        matches!(self, Self::Integers)
    }

    pub fn is_approximate(&self) -> bool {
        matches!(self, Self::RealVectors(_))
    }
}

impl fmt::Display for CoefficientSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rationals => write!(f, "Q"),
            Self::Integers => write!(f, "Z"),
            Self::PrimeField(p) => write!(f, "Zp:{p}"),
            Self::RealVectors(d) => write!(f, "Rd:{d}"),
        }
    }
}

impl FromStr for CoefficientSystem {
    type Err = CoeffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "Q" => return Ok(Self::Rationals),
            "Z" => return Ok(Self::Integers),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("Zp:") {
            let p: u64 = p.parse().map_err(|_| CoeffError::Unknown(s.to_string()))?;
            if !is_prime(p) {
                return Err(CoeffError::NotPrime(p));
            }
            return Ok(Self::PrimeField(p));
        }
        if let Some(d) = s.strip_prefix("Rd:") {
            let d: usize = d.parse().map_err(|_| CoeffError::Unknown(s.to_string()))?;
            if d == 0 {
                return Err(CoeffError::ZeroDimension);
            }
            return Ok(Self::RealVectors(d));
        }
        Err(CoeffError::Unknown(s.to_string()))
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2u64;
    while k.saturating_mul(k) <= p {
        if p.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// A module of values over a ring of scalars.
///
/// Implementations carry their runtime parameters (the prime, the vector
/// dimension), so every operation takes `&self`.
pub trait Coefficients: Clone + fmt::Debug + Send + Sync {
    type Scalar: Clone + fmt::Debug + PartialEq + Send + Sync;
    type Value: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn system(&self) -> CoefficientSystem;

    fn zero(&self) -> Self::Value;
    fn is_zero(&self, v: &Self::Value) -> bool;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;

    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value {
        self.add(a, &self.neg(b))
    }

    /// Multiplies `v` by `sign`, which is expected to be -1, 0 or 1.
    fn signed(&self, sign: i64, v: &Self::Value) -> Self::Value {
        match sign.signum() {
            1 => v.clone(),
            -1 => self.neg(v),
            _ => self.zero(),
        }
    }

    /// The scalar action `r · v`.
    fn scale(&self, r: &Self::Scalar, v: &Self::Value) -> Self::Value;

    fn scalar_from_int(&self, n: i64) -> Self::Scalar;
    fn scalar_add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_is_zero(&self, r: &Self::Scalar) -> bool;
    fn scalar_approx_eq(&self, a: &Self::Scalar, b: &Self::Scalar, tol: f64) -> bool;

    /// A small pseudo-random value, used by test generators.
    fn random_value(&self, rng: &mut dyn RngCore) -> Self::Value;

    /// Rejects values that cannot come from this system.
    fn check_value(&self, v: &Self::Value) -> Result<(), CoeffError>;

    /// Exact equality for exact systems (`tol` ignored), max-norm distance
    /// at most `tol` for real vectors.
    fn approx_eq(&self, a: &Self::Value, b: &Self::Value, tol: f64) -> bool;

    fn value_to_json(&self, v: &Self::Value) -> Json;
    fn value_from_json(&self, j: &Json) -> Result<Self::Value, CoeffError>;
}

/// Checked scalar action: both operands must belong to `coeff`.
pub fn scalar_action<C: Coefficients>(
    coeff: &C,
    r: &C::Scalar,
    v: &C::Value,
) -> Result<C::Value, CoeffError> {
    coeff.check_value(v)?;
    Ok(coeff.scale(r, v))
}

pub fn approx_equal<C: Coefficients>(coeff: &C, a: &C::Value, b: &C::Value, tol: f64) -> bool {
    coeff.approx_eq(a, b, tol)
}

fn decode_err(system: CoefficientSystem, found: &Json) -> CoeffError {
    CoeffError::Decode {
        system: system.to_string(),
        found: found.to_string(),
    }
}

/// Exact rationals with arbitrary-precision numerator and denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

impl Coefficients for Rationals {
    type Scalar = BigRational;
    type Value = BigRational;

    fn system(&self) -> CoefficientSystem {
        CoefficientSystem::Rationals
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn is_zero(&self, v: &BigRational) -> bool {
        v.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn scale(&self, r: &BigRational, v: &BigRational) -> BigRational {
        r * v
    }
    fn scalar_from_int(&self, n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn scalar_mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn scalar_add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn scalar_is_zero(&self, r: &BigRational) -> bool {
        r.is_zero()
    }
    fn scalar_approx_eq(&self, a: &BigRational, b: &BigRational, _tol: f64) -> bool {
        a == b
    }
    fn random_value(&self, rng: &mut dyn RngCore) -> BigRational {
        let n: i64 = rng.gen_range(-5..=5);
        let d: i64 = rng.gen_range(1..=4);
        BigRational::new(n.into(), d.into())
    }
    fn check_value(&self, _v: &BigRational) -> Result<(), CoeffError> {
        Ok(())
    }
    fn approx_eq(&self, a: &BigRational, b: &BigRational, _tol: f64) -> bool {
        a == b
    }
    fn value_to_json(&self, v: &BigRational) -> Json {
        Json::String(format!("{}/{}", v.numer(), v.denom()))
    }
    fn value_from_json(&self, j: &Json) -> Result<BigRational, CoeffError> {
        match j {
            Json::String(s) => parse_rational(s),
            Json::Number(n) => n.as_i64().map(|n| BigRational::from_integer(n.into())),
            _ => None,
        }
        .ok_or_else(|| decode_err(self.system(), j))
    }
}

/// The integers, a principal ideal domain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Integers;

impl Coefficients for Integers {
    type Scalar = BigInt;
    type Value = BigInt;

    fn system(&self) -> CoefficientSystem {
        CoefficientSystem::Integers
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn is_zero(&self, v: &BigInt) -> bool {
        v.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn scale(&self, r: &BigInt, v: &BigInt) -> BigInt {
        r * v
    }
    fn scalar_from_int(&self, n: i64) -> BigInt {
        n.into()
    }
    fn scalar_mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn scalar_add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn scalar_is_zero(&self, r: &BigInt) -> bool {
        r.is_zero()
    }
    fn scalar_approx_eq(&self, a: &BigInt, b: &BigInt, _tol: f64) -> bool {
        a == b
    }
    fn random_value(&self, rng: &mut dyn RngCore) -> BigInt {
        rng.gen_range(-5i64..=5).into()
    }
    fn check_value(&self, _v: &BigInt) -> Result<(), CoeffError> {
        Ok(())
    }
    fn approx_eq(&self, a: &BigInt, b: &BigInt, _tol: f64) -> bool {
        a == b
    }
    fn value_to_json(&self, v: &BigInt) -> Json {
        match v.to_i64() {
            Some(n) => Json::from(n),
            None => Json::String(v.to_string()),
        }
    }
    fn value_from_json(&self, j: &Json) -> Result<BigInt, CoeffError> {
        match j {
            Json::Number(n) => n.as_i64().map(BigInt::from),
            Json::String(s) => s.trim().parse().ok(),
            _ => None,
        }
        .ok_or_else(|| decode_err(self.system(), j))
    }
}

/// The prime field `Z/p`. Values are kept reduced in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, CoeffError> {
        if !is_prime(p) {
            return Err(CoeffError::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(t0.rem_euclid(self.p as i128) as u64)
    }
}

impl Coefficients for PrimeField {
    type Scalar = u64;
    type Value = u64;

    fn system(&self) -> CoefficientSystem {
        CoefficientSystem::PrimeField(self.p)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn is_zero(&self, v: &u64) -> bool {
        *v == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a % self.p) % self.p
    }
    fn scale(&self, r: &u64, v: &u64) -> u64 {
        self.mul(*r, *v)
    }
    fn scalar_from_int(&self, n: i64) -> u64 {
        self.reduce(n)
    }
    fn scalar_mul(&self, a: &u64, b: &u64) -> u64 {
        self.mul(*a, *b)
    }
    fn scalar_add(&self, a: &u64, b: &u64) -> u64 {
        self.add(a, b)
    }
    fn scalar_is_zero(&self, r: &u64) -> bool {
        *r == 0
    }
    fn scalar_approx_eq(&self, a: &u64, b: &u64, _tol: f64) -> bool {
        a % self.p == b % self.p
    }
    fn random_value(&self, rng: &mut dyn RngCore) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn check_value(&self, v: &u64) -> Result<(), CoeffError> {
        if *v < self.p {
            Ok(())
        } else {
            Err(CoeffError::MixedSystems {
                system: self.system().to_string(),
                value: v.to_string(),
            })
        }
    }
    fn approx_eq(&self, a: &u64, b: &u64, _tol: f64) -> bool {
        a % self.p == b % self.p
    }
    fn value_to_json(&self, v: &u64) -> Json {
        Json::from(*v)
    }
    fn value_from_json(&self, j: &Json) -> Result<u64, CoeffError> {
        j.as_i64()
            .map(|n| self.reduce(n))
            .ok_or_else(|| decode_err(self.system(), j))
    }
}

/// Real vectors of a fixed dimension, a module over the reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealVectors {
    dim: usize,
}

impl RealVectors {
    pub fn new(dim: usize) -> Result<Self, CoeffError> {
        if dim == 0 {
            return Err(CoeffError::ZeroDimension);
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Max-norm distance of two vectors of equal length.
pub fn max_norm_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl Coefficients for RealVectors {
    type Scalar = f64;
    type Value = Vec<f64>;

    fn system(&self) -> CoefficientSystem {
        CoefficientSystem::RealVectors(self.dim)
    }
    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }
    fn is_zero(&self, v: &Vec<f64>) -> bool {
        v.iter().all(|x| *x == 0.0)
    }
    fn add(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn neg(&self, a: &Vec<f64>) -> Vec<f64> {
        a.iter().map(|x| -x).collect()
    }
    fn sub(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }
    fn scale(&self, r: &f64, v: &Vec<f64>) -> Vec<f64> {
        v.iter().map(|x| r * x).collect()
    }
    fn scalar_from_int(&self, n: i64) -> f64 {
        n as f64
    }
    fn scalar_mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn scalar_add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn scalar_is_zero(&self, r: &f64) -> bool {
        *r == 0.0
    }
    fn scalar_approx_eq(&self, a: &f64, b: &f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }
    fn random_value(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
    fn check_value(&self, v: &Vec<f64>) -> Result<(), CoeffError> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(CoeffError::MixedSystems {
                system: self.system().to_string(),
                value: format!("{v:?}"),
            })
        }
    }
    fn approx_eq(&self, a: &Vec<f64>, b: &Vec<f64>, tol: f64) -> bool {
        a.len() == b.len() && max_norm_distance(a, b) <= tol
    }
    fn value_to_json(&self, v: &Vec<f64>) -> Json {
        Json::from(v.clone())
    }
    fn value_from_json(&self, j: &Json) -> Result<Vec<f64>, CoeffError> {
        let v: Option<Vec<f64>> = j
            .as_array()
            .and_then(|xs| xs.iter().map(Json::as_f64).collect());
        match v {
            Some(v) if v.len() == self.dim => Ok(v),
            _ => Err(decode_err(self.system(), j)),
        }
    }
}

/// `1` as a scalar.
pub fn scalar_one<C: Coefficients>(coeff: &C) -> C::Scalar {
    coeff.scalar_from_int(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_system_strings() {
        assert_eq!("Q".parse(), Ok(CoefficientSystem::Rationals));
        assert_eq!("Z".parse(), Ok(CoefficientSystem::Integers));
        assert_eq!("Zp:5".parse(), Ok(CoefficientSystem::PrimeField(5)));
        assert_eq!("Rd:3".parse(), Ok(CoefficientSystem::RealVectors(3)));
        assert_eq!(
            "Zp:6".parse::<CoefficientSystem>(),
            Err(CoeffError::NotPrime(6))
        );
        assert!("Rd:0".parse::<CoefficientSystem>().is_err());
        assert!("R".parse::<CoefficientSystem>().is_err());
        for s in ["Q", "Z", "Zp:97", "Rd:2"] {
            assert_eq!(s.parse::<CoefficientSystem>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn system_flags() {
        assert!(CoefficientSystem::Rationals.is_field());
        assert!(CoefficientSystem::PrimeField(2).is_field());
        assert!(CoefficientSystem::Integers.is_pid());
        assert!(!CoefficientSystem::Integers.is_field());
        assert!(CoefficientSystem::RealVectors(2).is_approximate());
    }

    #[test]
    fn scalar_action_examples() {
        assert_eq!(
            scalar_action(&Rationals, &q(2, 3), &q(3, 4)).unwrap(),
            q(1, 2)
        );
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(scalar_action(&f5, &3, &4).unwrap(), 2);
        let r2 = RealVectors::new(2).unwrap();
        assert_eq!(
            scalar_action(&r2, &0.5, &vec![1.0, -2.0]).unwrap(),
            vec![0.5, -1.0]
        );
    }

    #[test]
    fn scalar_action_rejects_foreign_values() {
        let r2 = RealVectors::new(2).unwrap();
        assert!(matches!(
            scalar_action(&r2, &1.0, &vec![1.0, 2.0, 3.0]),
            Err(CoeffError::MixedSystems { .. })
        ));
        let f5 = PrimeField::new(5).unwrap();
        assert!(scalar_action(&f5, &1, &7).is_err());
    }

    #[test]
    fn approx_equal_examples() {
        assert!(approx_equal(&Rationals, &q(1, 3), &q(1, 3), 0.0));
        let r2 = RealVectors::new(2).unwrap();
        assert!(approx_equal(&r2, &vec![1.0, 0.0], &vec![1.0, 1e-13], 1e-12));
        assert!(!approx_equal(&r2, &vec![1.0, 0.0], &vec![1.0, 1e-6], 1e-12));
    }

    #[test]
    fn prime_field_inverses() {
        for p in (2..=97).filter(|p| is_prime(*p)) {
            let f = PrimeField::new(p).unwrap();
            assert_eq!(f.inverse(0), None);
            for x in 1..p {
                assert_eq!(f.mul(x, f.inverse(x).unwrap()), 1, "p={p} x={x}");
            }
        }
    }

    fn distributivity<C: Coefficients>(coeff: &C, scalars: impl Fn(&mut ChaCha8Rng) -> C::Scalar) {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let r = scalars(&mut rng);
            let s = scalars(&mut rng);
            let v = coeff.random_value(&mut rng);
            let w = coeff.random_value(&mut rng);
            let lhs = coeff.scale(&coeff.scalar_add(&r, &s), &v);
            let rhs = coeff.add(&coeff.scale(&r, &v), &coeff.scale(&s, &v));
            assert!(coeff.approx_eq(&lhs, &rhs, DEFAULT_TOLERANCE));
            let lhs = coeff.scale(&r, &coeff.add(&v, &w));
            let rhs = coeff.add(&coeff.scale(&r, &v), &coeff.scale(&r, &w));
            assert!(coeff.approx_eq(&lhs, &rhs, DEFAULT_TOLERANCE));
            let one = scalar_one(coeff);
            assert!(coeff.approx_eq(&coeff.scale(&one, &v), &v, 0.0));
        }
    }

    #[test]
    fn module_axioms_hold_on_random_triples() {
        distributivity(&Rationals, |rng| Rationals.random_value(rng));
        distributivity(&Integers, |rng| Integers.random_value(rng));
        let f7 = PrimeField::new(7).unwrap();
        distributivity(&f7, |rng| rng.gen_range(0..7));
        let r3 = RealVectors::new(3).unwrap();
        distributivity(&r3, |rng| rng.gen_range(-2.0..2.0));
    }

    #[test]
    fn json_round_trip() {
        let v = q(-7, 3);
        let j = Rationals.value_to_json(&v);
        assert_eq!(j, Json::String("-7/3".into()));
        assert_eq!(Rationals.value_from_json(&j).unwrap(), v);
        assert_eq!(Rationals.value_from_json(&Json::from(4)).unwrap(), q(4, 1));
        assert!(Rationals
            .value_from_json(&Json::String("1/0".into()))
            .is_err());
        let r2 = RealVectors::new(2).unwrap();
        assert!(r2.value_from_json(&serde_json::json!([1.0])).is_err());
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.value_from_json(&Json::from(-1)).unwrap(), 4);
    }
}
