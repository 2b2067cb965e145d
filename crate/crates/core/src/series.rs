//! Truncated formal power series with exact rational coefficients.
//!
//! [`BiSeries`] is a dense table of coefficients of g^n z^p for
//! `0 <= n <= order_n`, `0 <= p <= order_p`; [`USeries`] is its univariate
//! counterpart in g. Binary operations truncate to the smaller of the two
//! operand orders.
//!
//! Products and quotients run on a common-denominator integer form, so the
//! inner loops only touch big integers and every coefficient is reduced
//! once at the end.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Rational from a pair of machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("constant term must be 1 (got {0})")]
    ConstantNotOne(Rational),
    #[error("constant term must be nonzero")]
    ZeroConstant,
    #[error("constant term must be zero")]
    NonzeroConstant,
    #[error("substituted series must have zero constant term and vanish at z = 0")]
    BadSubstitution,
    #[error("fixed-point iteration did not stabilize after {0} steps")]
    NoFixpoint(usize),
}

/// Lowest common denominator and scaled numerators of a slice of rationals.
fn common_form(cs: &[Rational]) -> (BigInt, Vec<BigInt>) {
    let mut den = BigInt::one();
    for c in cs {
        if !c.is_zero() && !c.denom().is_one() {
            den = den.lcm(c.denom());
        }
    }
    let nums = cs
        .iter()
        .map(|c| {
            if c.is_zero() {
                BigInt::zero()
            } else if c.denom() == &den {
                c.numer().clone()
            } else {
                c.numer() * (&den / c.denom())
            }
        })
        .collect();
    (den, nums)
}

fn from_common(den: &BigInt, nums: Vec<BigInt>) -> Vec<Rational> {
    if den.is_one() {
        nums.into_iter().map(Rational::from_integer).collect()
    } else {
        nums.into_iter().map(|v| Rational::new(v, den.clone())).collect()
    }
}

/// Truncated bivariate series in g (area) and z (half-perimeter).
#[derive(Clone, PartialEq, Eq)]
pub struct BiSeries {
    order_n: usize,
    order_p: usize,
    coeffs: Vec<Rational>,
}

impl fmt::Debug for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiSeries({}x{}) [", self.order_n, self.order_p)?;
        let mut first = true;
        for n in 0..=self.order_n {
            for p in 0..=self.order_p {
                let c = self.coeff(n, p);
                if !c.is_zero() {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}*g^{}z^{}", c, n, p)?;
                    first = false;
                }
            }
        }
        write!(f, "]")
    }
}

impl BiSeries {
    pub fn zero(order_n: usize, order_p: usize) -> Self {
        BiSeries {
            order_n,
            order_p,
            coeffs: vec![Rational::zero(); (order_n + 1) * (order_p + 1)],
        }
    }

    pub fn constant(order_n: usize, order_p: usize, c: Rational) -> Self {
        let mut s = Self::zero(order_n, order_p);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order_n: usize, order_p: usize) -> Self {
        Self::constant(order_n, order_p, Rational::one())
    }

    /// c * g^n z^p (zero if the monomial lies outside the window).
    pub fn monomial(order_n: usize, order_p: usize, n: usize, p: usize, c: Rational) -> Self {
        let mut s = Self::zero(order_n, order_p);
        if n <= order_n && p <= order_p {
            s.coeffs[n * (order_p + 1) + p] = c;
        }
        s
    }

    pub fn from_fn(
        order_n: usize,
        order_p: usize,
        mut f: impl FnMut(usize, usize) -> Rational,
    ) -> Self {
        let mut coeffs = Vec::with_capacity((order_n + 1) * (order_p + 1));
        for n in 0..=order_n {
            for p in 0..=order_p {
                coeffs.push(f(n, p));
            }
        }
        BiSeries { order_n, order_p, coeffs }
    }

    /// Builds a series from its z-columns: `cols[p]` is the coefficient of z^p.
    pub fn from_z_columns(order_n: usize, order_p: usize, cols: &[USeries]) -> Self {
        Self::from_fn(order_n, order_p, |n, p| match cols.get(p) {
            Some(c) if n <= c.order() => c.coeff(n).clone(),
            _ => Rational::zero(),
        })
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn order_p(&self) -> usize {
        self.order_p
    }

    #[inline]
    fn idx(&self, n: usize, p: usize) -> usize {
        n * (self.order_p + 1) + p
    }

    /// Coefficient of g^n z^p. Panics outside the window.
    pub fn coeff(&self, n: usize, p: usize) -> &Rational {
        assert!(n <= self.order_n && p <= self.order_p, "coefficient outside truncation window");
        &self.coeffs[self.idx(n, p)]
    }

    pub fn set_coeff(&mut self, n: usize, p: usize, c: Rational) {
        let i = self.idx(n, p);
        self.coeffs[i] = c;
    }

    pub fn constant_term(&self) -> &Rational {
        &self.coeffs[0]
    }

    /// The coefficient of z^p as a series in g.
    pub fn z_coeff(&self, p: usize) -> USeries {
        USeries::from_fn(self.order_n, |n| self.coeff(n, p).clone())
    }

    /// Restriction to a smaller window.
    pub fn truncate(&self, order_n: usize, order_p: usize) -> Self {
        let on = order_n.min(self.order_n);
        let op = order_p.min(self.order_p);
        Self::from_fn(on, op, |n, p| self.coeff(n, p).clone())
    }

    fn common_window(&self, other: &Self) -> (usize, usize) {
        (self.order_n.min(other.order_n), self.order_p.min(other.order_p))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (on, op) = self.common_window(other);
        Self::from_fn(on, op, |n, p| self.coeff(n, p) + other.coeff(n, p))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (on, op) = self.common_window(other);
        Self::from_fn(on, op, |n, p| self.coeff(n, p) - other.coeff(n, p))
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.order_n, self.order_p, |n, p| -self.coeff(n, p))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_fn(self.order_n, self.order_p, |n, p| self.coeff(n, p) * c)
    }

    /// Adds a constant to the g^0 z^0 coefficient.
    pub fn add_constant(&self, c: &Rational) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = &s.coeffs[0] + c;
        s
    }

    /// Multiplies by g^a z^b, dropping what falls outside the window.
    pub fn shift(&self, a: usize, b: usize) -> Self {
        Self::from_fn(self.order_n, self.order_p, |n, p| {
            if n >= a && p >= b {
                self.coeff(n - a, p - b).clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// True when every coefficient of `self` is <= the matching one of `other`.
    pub fn le_coefficientwise(&self, other: &Self) -> bool {
        let (on, op) = self.common_window(other);
        (0..=on).all(|n| (0..=op).all(|p| self.coeff(n, p) <= other.coeff(n, p)))
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let (on, op) = self.common_window(other);
        let a = self.truncate(on, op);
        let b = other.truncate(on, op);
        let (da, na) = common_form(&a.coeffs);
        let (db, nb) = common_form(&b.coeffs);
        let w = op + 1;
        let b_nonzero: Vec<(usize, usize)> = (0..=on)
            .flat_map(|n| (0..=op).map(move |p| (n, p)))
            .filter(|&(n, p)| !nb[n * w + p].is_zero())
            .collect();
        let mut out = vec![BigInt::zero(); (on + 1) * w];
        for n1 in 0..=on {
            for p1 in 0..=op {
                let x = &na[n1 * w + p1];
                if x.is_zero() {
                    continue;
                }
                for &(n2, p2) in &b_nonzero {
                    if n1 + n2 > on || p1 + p2 > op {
                        continue;
                    }
                    out[(n1 + n2) * w + p1 + p2] += x * &nb[n2 * w + p2];
                }
            }
        }
        BiSeries { order_n: on, order_p: op, coeffs: from_common(&(da * db), out) }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.order_n, self.order_p);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// `self / other`; the divisor needs a nonzero constant term.
    pub fn div_unit(&self, other: &Self) -> Result<Self, SeriesError> {
        if other.constant_term().is_zero() {
            return Err(SeriesError::ZeroConstant);
        }
        let (on, op) = self.common_window(other);
        let a = self.truncate(on, op);
        let b = other.truncate(on, op);
        let w = op + 1;
        let b_nonzero: Vec<(usize, usize)> = (0..=on)
            .flat_map(|n| (0..=op).map(move |p| (n, p)))
            .filter(|&(n, p)| (n, p) != (0, 0) && !b.coeff(n, p).is_zero())
            .collect();
        let b0 = b.constant_term();
        if b.is_integral() && b0.numer().abs().is_one() {
            // Integer path: A / B with B(0) = +-1 stays integral.
            let (da, na) = common_form(&a.coeffs);
            let nb: Vec<BigInt> = b.coeffs.iter().map(|c| c.numer().clone()).collect();
            let sign = b0.numer().clone();
            let mut out = vec![BigInt::zero(); (on + 1) * w];
            for n in 0..=on {
                for p in 0..=op {
                    let mut acc = na[n * w + p].clone();
                    for &(i, j) in &b_nonzero {
                        if i > n || j > p {
                            continue;
                        }
                        let c = &out[(n - i) * w + (p - j)];
                        if !c.is_zero() {
                            acc -= &nb[i * w + j] * c;
                        }
                    }
                    out[n * w + p] = acc * &sign;
                }
            }
            return Ok(BiSeries { order_n: on, order_p: op, coeffs: from_common(&da, out) });
        }
        let inv0 = b0.recip();
        let mut out = vec![Rational::zero(); (on + 1) * w];
        for n in 0..=on {
            for p in 0..=op {
                let mut acc = a.coeff(n, p).clone();
                for &(i, j) in &b_nonzero {
                    if i > n || j > p {
                        continue;
                    }
                    let c = &out[(n - i) * w + (p - j)];
                    if !c.is_zero() {
                        acc -= b.coeff(i, j) * c;
                    }
                }
                out[n * w + p] = acc * &inv0;
            }
        }
        Ok(BiSeries { order_n: on, order_p: op, coeffs: out })
    }

    /// Euler operator g d/dg + z d/dz: multiplies c[n][p] by n + p.
    fn euler(&self) -> Self {
        Self::from_fn(self.order_n, self.order_p, |n, p| {
            self.coeff(n, p) * BigInt::from(n + p)
        })
    }

    /// Formal logarithm of a series with constant term 1.
    pub fn log_unit(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::ConstantNotOne(self.constant_term().clone()));
        }
        let q = self.euler().div_unit(self)?;
        Ok(Self::from_fn(self.order_n, self.order_p, |n, p| {
            if n + p == 0 {
                Rational::zero()
            } else {
                q.coeff(n, p) / BigInt::from(n + p)
            }
        }))
    }

    /// Formal exponential of a series with zero constant term.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let (on, op) = (self.order_n, self.order_p);
        let e = self.euler();
        let w = op + 1;
        let mut out = vec![Rational::zero(); (on + 1) * w];
        out[0] = Rational::one();
        for n in 0..=on {
            for p in 0..=op {
                if n + p == 0 {
                    continue;
                }
                let mut acc = Rational::zero();
                for i in 0..=n {
                    for j in 0..=p {
                        if i + j == 0 {
                            continue;
                        }
                        let c = e.coeff(i, j);
                        if !c.is_zero() {
                            acc += c * &out[(n - i) * w + (p - j)];
                        }
                    }
                }
                out[n * w + p] = acc / BigInt::from(n + p);
            }
        }
        Ok(BiSeries { order_n: on, order_p: op, coeffs: out })
    }

    /// Iterator over `(n, p, coefficient)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        let w = self.order_p + 1;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i / w, i % w, c))
    }
}

/// Solves `F = map(F)` by iteration from `seed`, requiring exact
/// stabilization within `order_n + order_p + 1` steps.
pub fn fixpoint_solve<M>(map: M, seed: BiSeries) -> Result<BiSeries, SeriesError>
where
    M: Fn(&BiSeries) -> BiSeries,
{
    let bound = seed.order_n() + seed.order_p() + 1;
    let mut cur = seed;
    for _ in 0..=bound {
        let next = map(&cur);
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
    Err(SeriesError::NoFixpoint(bound))
}

/// Replaces each Z^p of `s(g, Z)` by `zsub(g, z)^p`.
pub fn substitute_boundary_weight(s: &BiSeries, zsub: &BiSeries) -> Result<BiSeries, SeriesError> {
    let (on, op) = s.common_window(zsub);
    for n in 0..=on {
        if !zsub.coeff(n, 0).is_zero() {
            return Err(SeriesError::BadSubstitution);
        }
    }
    let zsub = zsub.truncate(on, op);
    let mut out = BiSeries::zero(on, op);
    let mut power = BiSeries::one(on, op);
    for p in 0..=op {
        let col = s.z_coeff(p).truncate(on);
        if !col.is_zero() {
            out = out.add(&power.mul_useries(&col));
        }
        if p < op {
            power = power.mul(&zsub);
        }
    }
    Ok(out)
}

impl BiSeries {
    /// Product with a series in g alone.
    pub fn mul_useries(&self, u: &USeries) -> BiSeries {
        self.mul(&u.to_bi(self.order_n.min(u.order()), self.order_p))
    }
}

/// Truncated univariate series in g.
#[derive(Clone, PartialEq, Eq)]
pub struct USeries {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for USeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter().map(|c| alloc::format!("{}", c))).finish()
    }
}

impl USeries {
    pub fn zero(order: usize) -> Self {
        USeries { coeffs: vec![Rational::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Rational::one();
        s
    }

    pub fn constant(order: usize, c: Rational) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Rational) -> Self {
        USeries { coeffs: (0..=order).map(f).collect() }
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty());
        USeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let o = order.min(self.order());
        USeries { coeffs: self.coeffs[..=o].to_vec() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Lifts to a bivariate series supported on z^0.
    pub fn to_bi(&self, order_n: usize, order_p: usize) -> BiSeries {
        BiSeries::from_fn(order_n, order_p, |n, p| {
            if p == 0 && n <= self.order() {
                self.coeffs[n].clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        let o = self.order().min(other.order());
        Self::from_fn(o, |n| &self.coeffs[n] + &other.coeffs[n])
    }

    pub fn sub(&self, other: &Self) -> Self {
        let o = self.order().min(other.order());
        Self::from_fn(o, |n| &self.coeffs[n] - &other.coeffs[n])
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_fn(self.order(), |n| &self.coeffs[n] * c)
    }

    pub fn add_constant(&self, c: &Rational) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = &s.coeffs[0] + c;
        s
    }

    /// Multiplies by g^k, truncating.
    pub fn shift(&self, k: usize) -> Self {
        Self::from_fn(self.order(), |n| {
            if n >= k {
                self.coeffs[n - k].clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Divides by g^k. The first k coefficients must vanish; the result has
    /// order `order - k`.
    pub fn unshift(&self, k: usize) -> Option<Self> {
        if self.coeffs.iter().take(k).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::from_fn(self.order() - k.min(self.order()), |n| self.coeffs[n + k].clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let o = self.order().min(other.order());
        let (da, na) = common_form(&self.coeffs[..=o]);
        let (db, nb) = common_form(&other.coeffs[..=o]);
        let mut out = vec![BigInt::zero(); o + 1];
        for (i, x) in na.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in nb.iter().enumerate().take(o + 1 - i) {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        USeries { coeffs: from_common(&(da * db), out) }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.order());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn div_unit(&self, other: &Self) -> Result<Self, SeriesError> {
        if other.coeffs[0].is_zero() {
            return Err(SeriesError::ZeroConstant);
        }
        let o = self.order().min(other.order());
        let inv0 = other.coeffs[0].recip();
        let mut out: Vec<Rational> = Vec::with_capacity(o + 1);
        for n in 0..=o {
            let mut acc = self.coeffs[n].clone();
            for i in 1..=n {
                let b = &other.coeffs[i];
                if !b.is_zero() && !out[n - i].is_zero() {
                    acc -= b * &out[n - i];
                }
            }
            out.push(acc * &inv0);
        }
        Ok(USeries { coeffs: out })
    }

    pub fn log_unit(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::ConstantNotOne(self.coeffs[0].clone()));
        }
        let e = Self::from_fn(self.order(), |n| &self.coeffs[n] * BigInt::from(n));
        let q = e.div_unit(self)?;
        Ok(Self::from_fn(self.order(), |n| {
            if n == 0 {
                Rational::zero()
            } else {
                q.coeff(n) / BigInt::from(n)
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(on: usize, op: usize) -> BiSeries {
        BiSeries::monomial(on, op, 1, 0, int(1))
    }
    fn z(on: usize, op: usize) -> BiSeries {
        BiSeries::monomial(on, op, 0, 1, int(1))
    }

    #[test]
    fn add_examples() {
        let one = BiSeries::one(4, 4);
        let s = one.add(&g(4, 4)).add(&one.sub(&g(4, 4)));
        assert_eq!(s, BiSeries::constant(4, 4, int(2)));
        let gz = g(4, 4).mul(&z(4, 4));
        assert_eq!(gz.add(&gz), gz.scale(&int(2)));
        assert_eq!(gz.add(&BiSeries::zero(4, 4)), gz);
    }

    #[test]
    fn mul_examples() {
        let one = BiSeries::one(4, 3);
        let a = one.add(&g(4, 3));
        let sq = a.mul(&a);
        assert_eq!(*sq.coeff(0, 0), int(1));
        assert_eq!(*sq.coeff(1, 0), int(2));
        assert_eq!(*sq.coeff(2, 0), int(1));
        assert!(sq.coeff(3, 0).is_zero());
        let b = one.add(&z(4, 3)).mul(&a);
        for (n, p, c) in b.iter() {
            let expect = if n <= 1 && p <= 1 { int(1) } else { int(0) };
            assert_eq!(*c, expect, "({n},{p})");
        }
        assert_eq!(sq.mul(&one), sq);
    }

    #[test]
    fn mixed_orders_truncate_to_minimum() {
        let a = BiSeries::one(5, 2).add(&g(5, 2));
        let b = BiSeries::one(3, 4).add(&z(3, 4));
        let c = a.mul(&b);
        assert_eq!((c.order_n(), c.order_p()), (3, 2));
        assert_eq!(a.add(&b).order_n(), 3);
    }

    #[test]
    fn fixpoint_tree_series() {
        let (on, op) = (6, 0);
        let three_g = g(on, op).scale(&int(3));
        let r = fixpoint_solve(|f| BiSeries::one(on, op).add(&three_g.mul(&f.square())), BiSeries::one(on, op))
            .unwrap();
        // oracle: r_k = 3 * sum_{i+j=k-1} r_i r_j
        let mut oracle = vec![BigInt::one()];
        for k in 1..=on {
            let mut s = BigInt::zero();
            for i in 0..k {
                s += &oracle[i] * &oracle[k - 1 - i];
            }
            oracle.push(s * 3);
        }
        for k in 0..=on {
            assert_eq!(r.coeff(k, 0), &Rational::from_integer(oracle[k].clone()));
        }
        assert_eq!(*r.coeff(3, 0), int(135));
    }

    #[test]
    fn fixpoint_catalan() {
        let (on, op) = (0, 8);
        let zz = z(on, op);
        let w = fixpoint_solve(|f| BiSeries::one(on, op).add(&zz.mul(&f.square())), BiSeries::one(on, op))
            .unwrap();
        let mut cat = vec![BigInt::one()];
        for k in 1..=op {
            let mut s = BigInt::zero();
            for i in 0..k {
                s += &cat[i] * &cat[k - 1 - i];
            }
            cat.push(s);
        }
        for p in 0..=op {
            assert_eq!(w.coeff(0, p), &Rational::from_integer(cat[p].clone()));
        }
    }

    #[test]
    fn fixpoint_x_series() {
        let on = 5;
        let three_g = g(on, 0).scale(&int(3));
        let one = BiSeries::one(on, 0);
        let r = fixpoint_solve(|f| one.add(&three_g.mul(&f.square())), one.clone()).unwrap();
        let gr2 = g(on, 0).mul(&r.square());
        let x = fixpoint_solve(|f| gr2.mul(&one.add(f).add(&f.square())), BiSeries::zero(on, 0)).unwrap();
        assert_eq!(*x.coeff(1, 0), int(1));
        assert_eq!(*x.coeff(2, 0), int(7));
    }

    #[test]
    fn fixpoint_rejects_non_contraction() {
        let one = BiSeries::one(3, 3);
        let r = fixpoint_solve(|f| f.add(&one), one.clone());
        assert!(matches!(r, Err(SeriesError::NoFixpoint(_))));
    }

    #[test]
    fn log_examples() {
        let one = BiSeries::one(5, 2);
        assert!(one.log_unit().unwrap().is_zero());
        let l = one.add(&g(5, 2)).log_unit().unwrap();
        for n in 1..=5 {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(*l.coeff(n, 0), rat(sign, n as i64));
        }
        let a = one.add(&g(5, 2)).add(&z(5, 2));
        assert_eq!(a.log_unit().unwrap().exp().unwrap(), a);
        assert!(matches!(
            BiSeries::constant(2, 2, int(2)).log_unit(),
            Err(SeriesError::ConstantNotOne(_))
        ));
    }

    #[test]
    fn div_examples() {
        let one = BiSeries::one(5, 5);
        let num = one.sub(&g(5, 5).square());
        let den = one.sub(&g(5, 5));
        assert_eq!(num.div_unit(&den).unwrap(), one.add(&g(5, 5)));
        let s = one.add(&g(5, 5).scale(&rat(2, 3))).add(&z(5, 5));
        assert_eq!(s.div_unit(&s).unwrap(), one);
        let gz = g(5, 5).mul(&z(5, 5));
        let geo = one.div_unit(&one.sub(&gz)).unwrap();
        for (n, p, c) in geo.iter() {
            assert_eq!(*c, if n == p { int(1) } else { int(0) });
        }
        assert_eq!(one.div_unit(&g(5, 5)), Err(SeriesError::ZeroConstant));
        // rational constant term goes through the general path
        let half = BiSeries::constant(5, 5, rat(1, 2)).add(&z(5, 5));
        assert_eq!(half.mul(&one.div_unit(&half).unwrap()), one);
    }

    #[test]
    fn substitution_examples() {
        let (on, op) = (3, 4);
        let s = BiSeries::from_fn(on, op, |n, p| int((n * 7 + p * 3 + 1) as i64));
        assert_eq!(substitute_boundary_weight(&s, &z(on, op)).unwrap(), s);
        let onez = BiSeries::one(on, op).add(&z(on, op));
        let zz = z(on, op).square();
        assert_eq!(
            substitute_boundary_weight(&onez, &zz).unwrap(),
            BiSeries::one(on, op).add(&zz)
        );
        let bad = BiSeries::one(on, op);
        assert_eq!(substitute_boundary_weight(&s, &bad), Err(SeriesError::BadSubstitution));
        let bad = g(on, op);
        assert_eq!(substitute_boundary_weight(&s, &bad), Err(SeriesError::BadSubstitution));
    }

    #[test]
    fn useries_basics() {
        let one = USeries::one(6);
        let gs = one.shift(1);
        let a = one.add(&gs);
        assert_eq!(a.mul(&a).coeff(2), &int(1));
        let inv = one.div_unit(&one.sub(&gs)).unwrap();
        assert!(inv.coeffs().iter().all(|c| c == &int(1)));
        let l = a.log_unit().unwrap();
        assert_eq!(l.coeff(3), &rat(1, 3));
        assert_eq!(gs.unshift(1).unwrap().order(), 5);
        assert!(one.unshift(1).is_none());
        assert_eq!(a.pow(3).coeff(2), &int(3));
    }

    fn arb_series(on: usize, op: usize) -> impl Strategy<Value = BiSeries> {
        proptest::collection::vec((-5i64..6, 1i64..4), (on + 1) * (op + 1)).prop_map(move |v| {
            let mut it = v.into_iter();
            BiSeries::from_fn(on, op, |_, _| {
                let (a, b) = it.next().unwrap();
                rat(a, b)
            })
        })
    }

    fn arb_unit(on: usize, op: usize) -> impl Strategy<Value = BiSeries> {
        arb_series(on, op).prop_map(|mut s| {
            s.set_coeff(0, 0, int(1));
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn ring_axioms(a in arb_series(3, 2), b in arb_series(3, 2), c in arb_series(3, 2)) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn log_exp_round_trip(a in arb_unit(3, 3)) {
            prop_assert_eq!(a.log_unit().unwrap().exp().unwrap(), a.clone());
            let b = a.sub(&BiSeries::one(3, 3));
            prop_assert_eq!(b.exp().unwrap().log_unit().unwrap(), b);
        }

        #[test]
        fn division_inverts_product(a in arb_series(3, 3), b in arb_unit(3, 3)) {
            prop_assert_eq!(a.mul(&b).div_unit(&b).unwrap(), a);
        }

        #[test]
        fn truncation_commutes(a in arb_series(4, 3), b in arb_unit(4, 3)) {
            prop_assert_eq!(a.mul(&b).truncate(2, 2), a.truncate(2, 2).mul(&b.truncate(2, 2)));
            prop_assert_eq!(a.div_unit(&b).unwrap().truncate(3, 1), a.truncate(3, 1).div_unit(&b.truncate(3, 1)).unwrap());
            prop_assert_eq!(b.log_unit().unwrap().truncate(2, 2), b.truncate(2, 2).log_unit().unwrap());
        }

        #[test]
        fn fixpoint_reproduces_itself(k in 1i64..5) {
            let (on, op) = (4, 3);
            let kg = g(on, op).scale(&int(k));
            let zz = z(on, op);
            let one = BiSeries::one(on, op);
            let map = |f: &BiSeries| one.add(&kg.mul(&f.square())).add(&zz.mul(f));
            let f = fixpoint_solve(map, one.clone()).unwrap();
            prop_assert_eq!(map(&f), f);
        }
    }
}
