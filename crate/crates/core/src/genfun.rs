//! Discrete generating functions for pointed quadrangulations with a
//! boundary, their closed-form coefficients, exact distance laws, and the
//! exact identity suite.
//!
//! Conventions: g weights inner faces, z weights half boundary edges. The
//! self-avoiding series live in (g, Z) and the loop series in (g, y); both
//! reuse the second slot of [`BiSeries`].

use alloc::borrow::Cow;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::combin::{binomial, fact_ratio};
use crate::series::{fixpoint_solve, int, substitute_boundary_weight, BiSeries, Rational, SeriesError, USeries};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenfunError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("distance {d} exceeds the precomputed table bound d_max = {d_max}")]
    DMaxExceeded { d: usize, d_max: usize },
    #[error("T_d(s,s') needs d, s, s' of equal parity (got d={d}, s={s}, s'={s_prime})")]
    Parity { d: usize, s: usize, s_prime: usize },
    #[error("kernel orders ({order_n}, {order_p}) do not cover the request ({n}, {p})")]
    Truncation { order_n: usize, order_p: usize, n: usize, p: usize },
    #[error("invalid query: {0}")]
    Invalid(String),
}

/// Generating functions that can be requested from [`series_family`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// W = lim W_d.
    W,
    /// log W.
    LogW,
    /// W_0, rooted maps with the origin on the boundary.
    W0,
    /// W_d, origin at distance at most d from the boundary.
    Wd(usize),
    /// log W_d.
    LogWd(usize),
    /// G_d = log(W_d / W_{d-1}), G_0 = log W_0.
    Gd(usize),
    /// T_d, boundary-boundary distance d (T_0 = W_0^2 - W_0).
    Td(usize),
    /// T_d(s, s'), refined by the two boundary arcs; supported on z^{(s+s')/2}.
    TdSs { d: usize, s: usize, s_prime: usize },
    /// W~_0 in (g, Z).
    TildeW0,
    /// W~_d in (g, Z).
    TildeWd(usize),
    /// W~'_d in (g, Z).
    TildeWdPrime(usize),
    /// G~_d in (g, Z).
    TildeGd(usize),
    /// Omega_d in (g, y).
    OmegaD(usize),
    /// Gamma_d in (g, y).
    GammaD(usize),
}

/// Families with a closed closed-form z^p (or Z^p) coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZpFamily {
    Wd(usize),
    LogWd(usize),
    Td(usize),
    TildeW0,
    TildeWd(usize),
    TildeWdPrime(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountFamily {
    W0,
    W,
    TildeW0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountQuery {
    pub family: CountFamily,
    pub n: usize,
    pub p: usize,
}

/// Solved series and derived tables shared by every discrete formula.
#[derive(Debug, Clone)]
pub struct KernelSeries {
    order_n: usize,
    order_p: usize,
    d_max: usize,
    r: USeries,
    x: USeries,
    w_big: BiSeries,
    w: BiSeries,
    lambda: BiSeries,
    brackets: Vec<USeries>,
    f: Vec<USeries>,
    r_ell: Vec<USeries>,
    w_d: Vec<BiSeries>,
    w_tilde: BiSeries,
}

fn solve_univariate(order: usize, map: impl Fn(&BiSeries) -> BiSeries, seed: BiSeries) -> USeries {
    let s = fixpoint_solve(map, seed).expect("contraction in g");
    debug_assert_eq!(s.order_n(), order);
    s.z_coeff(0)
}

/// Builds the kernel with the default table bound d_max = order_n + 2.
pub fn build_kernel(order_n: usize, order_p: usize) -> KernelSeries {
    build_kernel_with(order_n, order_p, order_n + 2)
}

pub fn build_kernel_with(order_n: usize, order_p: usize, d_max: usize) -> KernelSeries {
    let on = order_n;
    let op = order_p;
    let one_u = BiSeries::one(on, 0);
    let g_u = BiSeries::monomial(on, 0, 1, 0, int(1));

    let three_g = g_u.scale(&int(3));
    let r = solve_univariate(on, |f| one_u.add(&three_g.mul(&f.square())), one_u.clone());
    let gr2 = g_u.mul_useries(&r.mul(&r));
    let x = solve_univariate(
        on,
        |f| gr2.mul(&one_u.add(f).add(&f.square())),
        BiSeries::zero(on, 0),
    );

    // [l] = 1 + x + ... + x^(l-1)
    let n_br = d_max + op + 6;
    let mut brackets = Vec::with_capacity(n_br + 1);
    brackets.push(USeries::zero(on));
    let mut xp = USeries::one(on);
    for l in 1..=n_br {
        let next = brackets[l - 1].add(&xp);
        brackets.push(next);
        xp = xp.mul(&x);
    }
    let f: Vec<USeries> = (0..=d_max + 3)
        .map(|d| x.mul(&brackets[d]).div_unit(&brackets[d + 2]).unwrap())
        .collect();
    let r_ell: Vec<USeries> = (0..=d_max + op + 2)
        .map(|l| {
            let num = r.mul(&brackets[l]).mul(&brackets[l + 3]);
            num.div_unit(&brackets[l + 1].mul(&brackets[l + 2])).unwrap()
        })
        .collect();

    let one = BiSeries::one(on, op);
    let z_r = r.to_bi(on, op).shift(0, 1);
    let w_big = fixpoint_solve(|f| one.add(&z_r.mul(&f.square())), one.clone()).expect("contraction in z");
    let w = w_big.add_constant(&int(-1));
    let w_d: Vec<BiSeries> = (0..=d_max + 2)
        .map(|d| {
            let num = w_big.mul(&one.sub(&w.mul_useries(&f[d + 1])));
            num.div_unit(&one.sub(&w.mul_useries(&f[d]))).unwrap()
        })
        .collect();
    let x_bi = x.to_bi(on, op);
    let lambda = x_bi
        .mul(&w.sub(&x_bi))
        .div_unit(&one.sub(&x_bi.mul(&w)))
        .unwrap();
    let f1 = f[1].to_bi(on, op);
    let w_tilde = fixpoint_solve(
        |t| {
            let den = one.sub(&f1.mul(t));
            z_r.div_unit(&den.square()).unwrap()
        },
        BiSeries::zero(on, op),
    )
    .expect("contraction in Z");

    KernelSeries { order_n, order_p, d_max, r, x, w_big, w, lambda, brackets, f, r_ell, w_d, w_tilde }
}

impl KernelSeries {
    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn order_p(&self) -> usize {
        self.order_p
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// R, the tree series (g only).
    pub fn r(&self) -> &USeries {
        &self.r
    }

    pub fn x(&self) -> &USeries {
        &self.x
    }

    /// W = 1 + z R W^2.
    pub fn w_big(&self) -> &BiSeries {
        &self.w_big
    }

    /// w = W - 1.
    pub fn w(&self) -> &BiSeries {
        &self.w
    }

    pub fn lambda(&self) -> &BiSeries {
        &self.lambda
    }

    /// [l] = (1 - x^l) / (1 - x).
    pub fn bracket(&self, l: usize) -> &USeries {
        &self.brackets[l]
    }

    /// f_d = x [d] / [d+2], available for d <= d_max + 3.
    pub fn f(&self, d: usize) -> &USeries {
        &self.f[d]
    }

    /// R_l, the series of well-labeled trees with root label l and labels >= 1.
    pub fn r_ell(&self, l: usize) -> &USeries {
        &self.r_ell[l]
    }

    pub fn r_ell_len(&self) -> usize {
        self.r_ell.len()
    }

    /// W_d for d <= d_max + 2.
    pub fn w_d(&self, d: usize) -> &BiSeries {
        &self.w_d[d]
    }

    /// w~ = W~ - 1 in (g, Z).
    pub fn w_tilde(&self) -> &BiSeries {
        &self.w_tilde
    }

    fn bracket_at(&self, l: usize) -> Cow<'_, USeries> {
        if l < self.brackets.len() {
            return Cow::Borrowed(&self.brackets[l]);
        }
        let mut acc = self.brackets[self.brackets.len() - 1].clone();
        let mut xp = self.x.pow(self.brackets.len() - 1);
        for _ in self.brackets.len()..=l {
            acc = acc.add(&xp);
            xp = xp.mul(&self.x);
        }
        Cow::Owned(acc)
    }

    /// f_d for any d, computed on demand past the table.
    fn f_at(&self, d: usize) -> Cow<'_, USeries> {
        if d < self.f.len() {
            return Cow::Borrowed(&self.f[d]);
        }
        Cow::Owned(self.x.mul(&self.bracket_at(d)).div_unit(&self.bracket_at(d + 2)).unwrap())
    }

    /// f_1 / f_{d+1} = [d+3] / ([3][d+1]).
    fn f1_over(&self, d: usize) -> USeries {
        self.bracket_at(d + 3)
            .div_unit(&self.brackets[3].mul(&self.bracket_at(d + 1)))
            .unwrap()
    }

    fn one(&self) -> BiSeries {
        BiSeries::one(self.order_n, self.order_p)
    }

    fn lift(&self, u: &USeries) -> BiSeries {
        u.to_bi(self.order_n, self.order_p)
    }

    fn check_d(&self, d: usize) -> Result<(), GenfunError> {
        if d > self.d_max {
            Err(GenfunError::DMaxExceeded { d, d_max: self.d_max })
        } else {
            Ok(())
        }
    }

    fn tilde_w0(&self) -> BiSeries {
        let f1 = self.lift(&self.f[1]);
        let one = self.one();
        one.add(&self.w_tilde).mul(&one.sub(&f1.mul(&self.w_tilde)))
    }

    /// (1 - w~ f_{d+1}) / ((1 - f_1 w~)(1 - w~ f_d)) = W~_d - (W~_0 - 1).
    fn tilde_core(&self, d: usize) -> BiSeries {
        let one = self.one();
        let wt = &self.w_tilde;
        let num = one.sub(&wt.mul_useries(&self.f[d + 1]));
        let den = one
            .sub(&wt.mul_useries(&self.f[1]))
            .mul(&one.sub(&wt.mul_useries(&self.f[d])));
        num.div_unit(&den).unwrap()
    }

    fn t_d(&self, d: usize) -> BiSeries {
        let w0 = &self.w_d[0];
        if d == 0 {
            return w0.square().sub(w0);
        }
        let q = self.f1_over(d);
        let f1 = &self.f[1];
        let w = &self.w;
        let inner = self
            .lift(&q)
            .sub(&w.mul_useries(f1).scale(&int(2)))
            .add(&w.square().mul_useries(&f1.mul(&self.f[d + 1])));
        self.w_big.square().mul(&w.pow(d)).mul(&inner)
    }

    fn omega(&self, d: usize) -> Result<BiSeries, GenfunError> {
        let a = self.tilde_w0();
        let b = series_family(Family::TildeWdPrime(d), self)?;
        let cols: Vec<USeries> = (0..=self.order_p).map(|p| a.z_coeff(p).mul(&b.z_coeff(p))).collect();
        Ok(BiSeries::from_z_columns(self.order_n, self.order_p, &cols))
    }
}

/// Ballot number: paths of s steps +-1 from 0 to height d staying >= 0.
pub fn ballot(s: usize, d: usize) -> BigInt {
    if d > s || (s - d) % 2 == 1 {
        return BigInt::zero();
    }
    let k = ((s - d) / 2) as i64;
    binomial(s as i64, k) - binomial(s as i64, k - 1)
}

/// The requested generating function, truncated to the kernel's window.
pub fn series_family(family: Family, kernel: &KernelSeries) -> Result<BiSeries, GenfunError> {
    let k = kernel;
    match family {
        Family::W => Ok(k.w_big.clone()),
        Family::LogW => Ok(k.w_big.log_unit()?),
        Family::W0 => Ok(k.w_d[0].clone()),
        Family::Wd(d) => {
            k.check_d(d)?;
            Ok(k.w_d[d].clone())
        }
        Family::LogWd(d) => {
            k.check_d(d)?;
            Ok(k.w_d[d].log_unit()?)
        }
        Family::Gd(d) => {
            k.check_d(d)?;
            if d == 0 {
                Ok(k.w_d[0].log_unit()?)
            } else {
                Ok(k.w_d[d].div_unit(&k.w_d[d - 1])?.log_unit()?)
            }
        }
        Family::Td(d) => {
            k.check_d(d)?;
            Ok(k.t_d(d))
        }
        Family::TdSs { d, s, s_prime } => {
            k.check_d(d)?;
            if (s + d) % 2 == 1 || (s_prime + d) % 2 == 1 {
                return Err(GenfunError::Parity { d, s, s_prime });
            }
            let p = (s + s_prime) / 2;
            let mut out = BiSeries::zero(k.order_n, k.order_p);
            if p > k.order_p {
                return Ok(out);
            }
            let c = |a: usize, b: usize| Rational::from_integer(ballot(a, b));
            let (c_sd, c_spd) = (c(s, d), c(s_prime, d));
            let (c_sd2, c_spd2) = (c(s, d + 2), c(s_prime, d + 2));
            let q = k.f1_over(d);
            let f1 = &k.f[1];
            let body = q
                .scale(&(&c_sd * &c_spd))
                .sub(&f1.scale(&(&c_sd * &c_spd2 + &c_sd2 * &c_spd)))
                .add(&f1.mul(&k.f[d + 1]).scale(&(&c_sd2 * &c_spd2)));
            let col = k.r.pow(p).mul(&body);
            for n in 0..=k.order_n {
                out.set_coeff(n, p, col.coeff(n).clone());
            }
            Ok(out)
        }
        Family::TildeW0 => Ok(k.tilde_w0()),
        Family::TildeWd(d) => {
            k.check_d(d)?;
            Ok(k.tilde_core(d).add(&k.tilde_w0()).add_constant(&int(-1)))
        }
        Family::TildeWdPrime(d) => {
            k.check_d(d)?;
            Ok(k.tilde_core(d).log_unit()?.add(&k.tilde_w0()).add_constant(&int(-1)))
        }
        Family::TildeGd(d) => {
            k.check_d(d)?;
            if d == 0 {
                Ok(k.tilde_w0().add_constant(&int(-1)))
            } else {
                Ok(k.tilde_core(d).div_unit(&k.tilde_core(d - 1))?.log_unit()?)
            }
        }
        Family::OmegaD(d) => {
            k.check_d(d)?;
            k.omega(d)
        }
        Family::GammaD(d) => {
            k.check_d(d)?;
            if d == 0 {
                k.omega(0)
            } else {
                Ok(k.omega(d)?.sub(&k.omega(d - 1)?))
            }
        }
    }
}

/// Closed-form counts. Out-of-range self-avoiding queries (p > n + 1) return 0.
pub fn closed_count(q: CountQuery) -> Result<BigInt, GenfunError> {
    let (n, p) = (q.n as i64, q.p as i64);
    if p < 1 {
        return Err(GenfunError::Invalid(format!("half-perimeter must be >= 1 (got {})", p)));
    }
    let three = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(BigInt::from(3).pow(e as u32))
        } else {
            Rational::new(BigInt::one(), BigInt::from(3).pow((-e) as u32))
        }
    };
    let v = match q.family {
        CountFamily::W0 => {
            three(n)
                * fact_ratio(&[2 * p], &[p, p - 1])
                * fact_ratio(&[2 * n + p - 1], &[n, n + p + 1])
        }
        CountFamily::W => {
            three(n)
                * fact_ratio(&[2 * p], &[p - 1, p + 1])
                * fact_ratio(&[2 * n + p - 1], &[n, n + p])
        }
        CountFamily::TildeW0 => {
            if p > n + 1 {
                return Ok(BigInt::zero());
            }
            three(n - p)
                * fact_ratio(&[3 * p], &[p, 2 * p - 1])
                * fact_ratio(&[2 * n + p - 1], &[n - p + 1, n + 2 * p])
        }
    };
    assert!(v.is_integer(), "closed form produced a non-integer");
    Ok(v.to_integer())
}

fn rpow_shift(k: &KernelSeries, g_pow: usize, r_pow: usize) -> USeries {
    k.r.pow(r_pow).shift(g_pow)
}

/// Closed-form coefficient of z^p (Z^p for the self-avoiding families) as a
/// series in g.
pub fn coeff_zp(family: ZpFamily, p: usize, kernel: &KernelSeries) -> Result<USeries, GenfunError> {
    let k = kernel;
    let on = k.order_n;
    let pi = p as i64;
    let check = |d: usize| k.check_d(d);
    match family {
        ZpFamily::Wd(d) => {
            let (fd, fd1) = (&*k.f_at(d), &*k.f_at(d + 1));
            let mut sum = USeries::zero(on);
            let mut fpow = USeries::one(on);
            for kk in 1..=pi {
                let c = fact_ratio(&[2 * pi], &[pi - kk, pi + kk + 1]) * int(2 * kk + 1);
                sum = sum.add(&fpow.scale(&c));
                fpow = fpow.mul(fd);
            }
            let lead = USeries::constant(on, fact_ratio(&[2 * pi], &[pi, pi + 1]));
            Ok(k.r.pow(p).mul(&lead.sub(&fd1.sub(fd).mul(&sum))))
        }
        ZpFamily::LogWd(d) => {
            if p == 0 {
                return Ok(USeries::zero(on));
            }
            let (fd, fd1) = (&*k.f_at(d), &*k.f_at(d + 1));
            let mut sum = USeries::zero(on);
            for kk in 1..=pi {
                let c = fact_ratio(&[2 * pi - 1], &[pi - kk, pi + kk]);
                let diff = fd1.pow(kk as usize).sub(&fd.pow(kk as usize));
                sum = sum.add(&diff.scale(&c));
            }
            let lead = USeries::constant(on, fact_ratio(&[2 * pi - 1], &[pi, pi]));
            Ok(k.r.pow(p).mul(&lead.sub(&sum.scale(&int(2)))))
        }
        ZpFamily::Td(d) => {
            let di = d as i64;
            if d > p {
                return Ok(USeries::zero(on));
            }
            let q = k.f1_over(d);
            let f1 = &k.f[1];
            let a = fact_ratio(&[2 * pi + 1], &[pi - di, pi + di + 2]) * int(di + 1);
            let b = fact_ratio(&[2 * pi + 1], &[pi - di - 1, pi + di + 3]) * int(2 * (di + 2));
            let c = fact_ratio(&[2 * pi + 1], &[pi - di - 2, pi + di + 4]) * int(di + 3);
            let body = q
                .scale(&a)
                .sub(&f1.scale(&b))
                .add(&f1.mul(&k.f_at(d + 1)).scale(&c));
            let general = k.r.pow(p).mul(&body).scale(&int(2));
            if d == 0 {
                // the general expression at d = 0 is W_0^2
                return Ok(general.sub(&coeff_zp(ZpFamily::Wd(0), p, k)?));
            }
            Ok(general)
        }
        ZpFamily::TildeW0 => Ok(tilde_w0_zp(k, p)),
        ZpFamily::TildeWd(d) => {
            check(d)?;
            if p == 0 {
                return Ok(USeries::one(on));
            }
            let (fd, fd1) = (&k.f[d], &k.f[d + 1]);
            let diff = fd1.sub(fd);
            let lead = rpow_shift(k, p, 3 * p).scale(&fact_ratio(&[3 * pi], &[pi, 2 * pi + 1]));
            let mut sum = USeries::zero(on);
            let mut fpow = USeries::one(on);
            for kk in 1..=p {
                let ki = kk as i64;
                let c = fact_ratio(&[3 * pi - ki], &[pi - ki, 2 * pi + 1]) * int(2 * ki + 1);
                let term = rpow_shift(k, p - kk, 3 * p - 2 * kk).mul(&fpow).scale(&c);
                sum = sum.add(&term);
                fpow = fpow.mul(fd);
            }
            Ok(lead.sub(&diff.mul(&sum)).add(&tilde_w0_zp(k, p)))
        }
        ZpFamily::TildeWdPrime(d) => {
            check(d)?;
            if p == 0 {
                return Ok(USeries::zero(on));
            }
            let (fd, fd1) = (&k.f[d], &k.f[d + 1]);
            let lead = rpow_shift(k, p, 3 * p).scale(&fact_ratio(&[3 * pi - 1], &[pi, 2 * pi]));
            let mut sum = USeries::zero(on);
            for kk in 1..=p {
                let ki = kk as i64;
                let c = fact_ratio(&[3 * pi - ki - 1], &[pi - ki, 2 * pi]);
                let diff = fd1.pow(kk).sub(&fd.pow(kk));
                sum = sum.add(&rpow_shift(k, p - kk, 3 * p - 2 * kk).mul(&diff).scale(&c));
            }
            Ok(lead.sub(&sum.scale(&int(2))).add(&tilde_w0_zp(k, p)))
        }
    }
}

fn tilde_w0_zp(k: &KernelSeries, p: usize) -> USeries {
    if p == 0 {
        return USeries::one(k.order_n);
    }
    let pi = p as i64;
    let c = fact_ratio(&[3 * pi - 3], &[pi, 2 * pi - 1]);
    let a = rpow_shift(k, p - 1, 3 * p - 2).scale(&int(pi));
    let b = rpow_shift(k, p, 3 * p).scale(&int(2 - 3 * pi));
    a.add(&b).scale(&c)
}

/// Ensemble in which a distance law is taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ensemble {
    /// Fixed area n and half-perimeter p.
    FixedNp { n: usize, p: usize },
    /// Fixed area n, half-perimeter weighted by z^p.
    FixedZ { n: usize, z: Rational },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Distance from the origin to the boundary.
    BulkBoundary,
    /// Distance between two boundary vertices.
    BoundaryBoundary,
}

/// Relative size below which the tail of a fixed-z sum over p is dropped.
pub const FIXED_Z_TAIL: f64 = 1e-40;

fn check_z(z: &Rational) -> Result<(), GenfunError> {
    if !z.is_positive() || z >= &Rational::new(BigInt::one(), BigInt::from(4)) {
        return Err(GenfunError::Invalid(format!("z must lie in (0, 1/4) (got {})", z)));
    }
    Ok(())
}

fn tail_small(term: &Rational, total: &Rational) -> bool {
    // term < total * 1e-40
    let scale = Rational::from_integer(BigInt::from(10).pow(40));
    term * scale < *total
}

/// Exact law of the requested distance, indexed by d. For the fixed-z
/// ensemble the sum over p is cut once the remaining terms fall below
/// [`FIXED_Z_TAIL`] relative to the total; the returned value is the exact
/// rational of the truncated sums.
pub fn pmf_table(
    kernel: &KernelSeries,
    ensemble: &Ensemble,
    statistic: Statistic,
) -> Result<Vec<Rational>, GenfunError> {
    let k = kernel;
    match ensemble {
        Ensemble::FixedNp { n, p } => {
            let (n, p) = (*n, *p);
            if n > k.order_n || p > k.order_p || p == 0 {
                return Err(GenfunError::Truncation { order_n: k.order_n, order_p: k.order_p, n, p });
            }
            match statistic {
                Statistic::BulkBoundary => {
                    if n > k.d_max {
                        return Err(GenfunError::DMaxExceeded { d: n, d_max: k.d_max });
                    }
                    let total = k.w_big.log_unit()?.coeff(n, p).clone();
                    let mut prev = Rational::zero();
                    let mut out = Vec::with_capacity(n + 1);
                    for d in 0..=n {
                        let cur = k.w_d[d].log_unit()?.coeff(n, p).clone();
                        out.push((&cur - &prev) / &total);
                        prev = cur;
                    }
                    Ok(out)
                }
                Statistic::BoundaryBoundary => {
                    let total = k.w_d[0].coeff(n, p) * BigInt::from(2 * p);
                    (0..=p).map(|d| Ok(coeff_zp(ZpFamily::Td(d), p, k)?.coeff(n) / &total)).collect()
                }
            }
        }
        Ensemble::FixedZ { n, z } => {
            let n = *n;
            check_z(z)?;
            if n > k.order_n {
                return Err(GenfunError::Truncation { order_n: k.order_n, order_p: k.order_p, n, p: 0 });
            }
            match statistic {
                Statistic::BulkBoundary => {
                    if n > k.d_max {
                        return Err(GenfunError::DMaxExceeded { d: n, d_max: k.d_max });
                    }
                    let mut num = vec![Rational::zero(); n + 1];
                    let mut total = Rational::zero();
                    let mut zp = Rational::one();
                    let mut last = None::<Rational>;
                    for p in 1.. {
                        zp = &zp * z;
                        let lead = fact_ratio(&[2 * p as i64 - 1], &[p as i64, p as i64]);
                        let term_total = k.r.pow(p).coeff(n) * lead * &zp;
                        let mut prev = Rational::zero();
                        for (d, slot) in num.iter_mut().enumerate() {
                            let cur = coeff_zp(ZpFamily::LogWd(d), p, k)?.coeff(n).clone();
                            *slot += (&cur - &prev) * &zp;
                            prev = cur;
                        }
                        total += &term_total;
                        let decreasing = last.as_ref().map_or(false, |l| &term_total <= l);
                        if p > 2 && decreasing && tail_small(&term_total, &total) {
                            break;
                        }
                        last = Some(term_total);
                    }
                    Ok(num.into_iter().map(|v| v / &total).collect())
                }
                Statistic::BoundaryBoundary => {
                    let mut num: Vec<Rational> = Vec::new();
                    let mut total = Rational::zero();
                    let mut zp = Rational::one();
                    let mut last = None::<Rational>;
                    for p in 1.. {
                        zp = &zp * z;
                        let w0 = coeff_zp(ZpFamily::Wd(0), p, k)?.coeff(n).clone();
                        let term_total = w0 * BigInt::from(2 * p) * &zp;
                        num.resize(p + 1, Rational::zero());
                        for (d, slot) in num.iter_mut().enumerate() {
                            let t = coeff_zp(ZpFamily::Td(d), p, k)?.coeff(n).clone();
                            *slot += t * &zp;
                        }
                        total += &term_total;
                        let decreasing = last.as_ref().map_or(false, |l| &term_total <= l);
                        if p > 2 && decreasing && tail_small(&term_total, &total) {
                            break;
                        }
                        last = Some(term_total);
                    }
                    Ok(num.into_iter().map(|v| v / &total).collect())
                }
            }
        }
    }
}

/// Exact probability that the statistic equals d (zero outside the support).
pub fn pmf_exact(
    kernel: &KernelSeries,
    ensemble: &Ensemble,
    statistic: Statistic,
    d: usize,
) -> Result<Rational, GenfunError> {
    let table = pmf_table(kernel, ensemble, statistic)?;
    Ok(table.get(d).cloned().unwrap_or_else(Rational::zero))
}

/// One line of the identity report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: String, passed: bool) {
        self.checks.push(IdentityCheck { name, passed });
    }
}

/// Truncated continued fraction 1/(1 - z R_{d+1}/(1 - z R_{d+2}/(...))) with
/// `depth` levels.
pub fn continued_fraction(kernel: &KernelSeries, d: usize, depth: usize) -> BiSeries {
    let (on, op) = (kernel.order_n, kernel.order_p);
    let mut cur = BiSeries::one(on, op);
    for level in (1..=depth).rev() {
        let l = d + level;
        let zr = kernel.r_ell[l].to_bi(on, op).shift(0, 1);
        let one = BiSeries::one(on, op);
        cur = one.div_unit(&one.sub(&zr.mul(&cur))).unwrap();
    }
    cur
}

/// Left side of the summation identity behind the self-avoiding critical
/// point: sum_k 3^k (3p-k)! / ((p-k)! (2p+1)!) (2k+1).
pub fn sa_sum_lhs(p: usize) -> Rational {
    let pi = p as i64;
    (1..=pi)
        .map(|k| {
            Rational::from_integer(BigInt::from(3).pow(k as u32))
                * fact_ratio(&[3 * pi - k], &[pi - k, 2 * pi + 1])
                * int(2 * k + 1)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// Right side: 3 (3p)! / ((p-1)! (2p+1)!).
pub fn sa_sum_rhs(p: usize) -> Rational {
    let pi = p as i64;
    fact_ratio(&[3 * pi], &[pi - 1, 2 * pi + 1]) * int(3)
}

/// Runs the exact identity suite for d = 0..=d_max (capped by the kernel's
/// own table bound).
pub fn verify_identities(kernel: &KernelSeries, d_max: usize) -> Result<IdentityReport, GenfunError> {
    let k = kernel;
    let (on, op) = (k.order_n, k.order_p);
    let d_max = d_max.min(k.d_max);
    let one = BiSeries::one(on, op);
    let mut report = IdentityReport::default();

    for d in 0..=d_max {
        let zr = k.lift(&k.r_ell[d + 1]).shift(0, 1);
        let rhs = one.add(&zr.mul(&k.w_d[d]).mul(&k.w_d[d + 1]));
        report.push(format!("recursion W_d = 1 + z R_(d+1) W_d W_(d+1), d={}", d), rhs == k.w_d[d]);
    }

    let gz = BiSeries::monomial(on, op, 1, 1, int(1));
    let r_bi = k.lift(&k.r);
    let invariant = k.w_big.sub(&gz.mul(&r_bi.pow(3)).mul(&k.w_big.pow(3)));
    for d in 0..=d_max {
        let rr = k.r_ell[d].mul(&k.r_ell[d + 1]).mul(&k.r_ell[d + 2]);
        let ww = k.w_d[d].mul(&k.w_d[d + 1]).mul(&k.w_d[d + 2]);
        let lhs = k.w_d[d].sub(&gz.mul(&k.lift(&rr)).mul(&ww));
        report.push(format!("conserved quantity, d={}", d), lhs == invariant);
    }

    for d in 0..=d_max {
        let full = continued_fraction(k, d, op);
        let mut ok = full == k.w_d[d];
        if d == 0 {
            for depth in 0..op {
                let t = continued_fraction(k, d, depth);
                ok &= t.truncate(on, depth) == k.w_d[d].truncate(on, depth);
            }
        }
        report.push(format!("continued fraction truncations, d={}", d), ok);
    }

    let w0 = &k.w_d[0];
    let zsub = w0.square().shift(0, 1);
    let tw0 = k.tilde_w0();
    report.push(
        String::from("W~_0(g, z W_0^2) = W_0"),
        substitute_boundary_weight(&tw0, &zsub)? == *w0,
    );
    for d in 1..=d_max {
        let twd = series_family(Family::TildeWd(d), k)?;
        let rhs = w0.mul(&substitute_boundary_weight(&twd.sub(&tw0), &zsub)?);
        report.push(format!("W_d - W_0 = W_0 (W~_d - W~_0), d={}", d), k.w_d[d].sub(w0) == rhs);
    }

    let mut ok = true;
    for p in 1..=op.max(1) {
        ok &= sa_sum_lhs(p) == sa_sum_rhs(p);
    }
    report.push(String::from("self-avoiding summation identity"), ok);

    let mut ok = true;
    for n in 0..=on {
        for p in 1..=op {
            let lhs = k.w_big.coeff(n, p) * BigInt::from(p + 1);
            let rhs = w0.coeff(n, p) * BigInt::from(n + p + 1);
            ok &= lhs == rhs;
        }
    }
    report.push(String::from("closest-edge ratio 2p/(p+1)"), ok);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(u: &USeries, upto: usize) -> Vec<i64> {
        (0..=upto).map(|n| i64::try_from(u.coeff(n).to_integer()).unwrap()).collect()
    }

    #[test]
    fn kernel_examples() {
        let k = build_kernel(4, 4);
        assert_eq!(ints(k.r(), 3), [1, 3, 18, 135]);
        let w_g0: Vec<_> = (0..=3).map(|p| k.w_big().coeff(0, p).clone()).collect();
        assert_eq!(w_g0, [int(1), int(1), int(2), int(5)]);
        assert_eq!(ints(k.f(1), 2), [0, 1, 6]);
        assert!(k.f(0).is_zero());
        // f_1 = g R^2
        assert_eq!(*k.f(1), k.r().mul(k.r()).shift(1));
        let x = k.x();
        let one = USeries::one(4);
        let rhs = k.r().mul(k.r()).shift(1).mul(&one.add(x).add(&x.mul(x)));
        assert_eq!(*x, rhs);
        let lam = k.lambda();
        let one2 = BiSeries::one(4, 4);
        let xb = x.to_bi(4, 4);
        assert_eq!(lam.mul(&one2.sub(&xb.mul(k.w()))), xb.mul(&k.w().sub(&xb)));
    }

    #[test]
    fn family_examples() {
        let k = build_kernel(5, 4);
        for d in 0..=4 {
            let wd = series_family(Family::Wd(d), &k).unwrap();
            for n in 0..=5 {
                assert_eq!(*wd.coeff(n, 0), if n == 0 { int(1) } else { int(0) });
            }
        }
        assert_eq!(*series_family(Family::W0, &k).unwrap().coeff(1, 1), int(2));
        let w0 = k.w_d(0);
        assert_eq!(series_family(Family::Td(0), &k).unwrap(), w0.square().sub(w0));
        assert!(matches!(
            series_family(Family::TdSs { d: 1, s: 2, s_prime: 1 }, &k),
            Err(GenfunError::Parity { .. })
        ));
        assert!(matches!(series_family(Family::Wd(99), &k), Err(GenfunError::DMaxExceeded { .. })));
    }

    #[test]
    fn count_examples() {
        let q = |family, n, p| closed_count(CountQuery { family, n, p }).unwrap();
        assert_eq!(q(CountFamily::W0, 1, 1), BigInt::from(2));
        let cats = [1, 2, 5, 14, 42];
        for (i, c) in cats.iter().enumerate() {
            assert_eq!(q(CountFamily::W0, 0, i + 1), BigInt::from(*c));
        }
        assert_eq!(q(CountFamily::W, 1, 1), BigInt::from(3));
        assert_eq!(q(CountFamily::TildeW0, 2, 2), BigInt::from(10));
        assert_eq!(q(CountFamily::TildeW0, 2, 4), BigInt::zero());
        assert!(closed_count(CountQuery { family: CountFamily::W, n: 1, p: 0 }).is_err());
    }

    #[test]
    fn zp_examples() {
        let k = build_kernel(6, 4);
        // the p = 1 coefficient of W_d is a single tree with root label d + 1
        for d in 0..=5 {
            assert_eq!(coeff_zp(ZpFamily::Wd(d), 1, &k).unwrap(), *k.r_ell(d + 1));
        }
        let cats = [1, 1, 2, 5, 14];
        for p in 0..=4 {
            assert_eq!(*coeff_zp(ZpFamily::Wd(0), p, &k).unwrap().coeff(0), int(cats[p]));
        }
        for d in 2..=5 {
            for p in 1..d {
                assert!(coeff_zp(ZpFamily::Td(d), p, &k).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn sum_identity_small() {
        assert_eq!(sa_sum_lhs(1), int(3));
        assert_eq!(sa_sum_rhs(1), int(3));
        for p in 1..40 {
            assert_eq!(sa_sum_lhs(p), sa_sum_rhs(p));
        }
    }

    #[test]
    fn pmf_examples() {
        let k = build_kernel(6, 4);
        for (n, p) in [(0, 1), (1, 1), (3, 2), (6, 4)] {
            let t = pmf_table(&k, &Ensemble::FixedNp { n, p }, Statistic::BulkBoundary).unwrap();
            assert_eq!(t.iter().fold(Rational::zero(), |a, b| a + b), int(1));
            let t = pmf_table(&k, &Ensemble::FixedNp { n, p }, Statistic::BoundaryBoundary).unwrap();
            assert_eq!(t.iter().fold(Rational::zero(), |a, b| a + b), int(1));
            assert!(t.len() <= p + 1);
        }
        let e = Ensemble::FixedNp { n: 3, p: 2 };
        assert!(pmf_exact(&k, &e, Statistic::BoundaryBoundary, 3).unwrap().is_zero());
        assert!(pmf_table(&k, &Ensemble::FixedNp { n: 7, p: 1 }, Statistic::BulkBoundary).is_err());
        let bad = Ensemble::FixedZ { n: 2, z: crate::series::rat(1, 3) };
        assert!(pmf_table(&k, &bad, Statistic::BulkBoundary).is_err());
    }

    #[test]
    fn identities_small_window() {
        let k = build_kernel(6, 4);
        let rep = verify_identities(&k, 4).unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{}", c.name);
        }
    }
}
