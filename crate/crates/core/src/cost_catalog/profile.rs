//! One-variable profiles `h(s)` with derivatives up to fourth order.
//!
//! Every catalog cost except the perturbed quadratic is `h(s)` of a single
//! inner variable: `s = |x - y|^2` for the Euclidean radial costs and
//! `s = x . y` for the sphere costs.

use crate::scalar::{lit, Real};

/// `[h, h', h'', h''', h'''']` at a point.
pub type Jet<T> = [T; 5];

pub fn half_linear<T: Real>(s: T) -> Jet<T> {
    let z = T::zero();
    [s / lit(2.0), lit(0.5), z, z, z]
}

pub fn linear<T: Real>(s: T) -> Jet<T> {
    let z = T::zero();
    [s, T::one(), z, z, z]
}

/// `sign / p * s^{p/2}` (a power of the distance `|x-y|^p`).
pub fn power<T: Real>(s: T, p: T, sign: T) -> Jet<T> {
    let half = p / lit(2.0);
    let mut out = [T::zero(); 5];
    let mut coef = sign / p;
    for (k, o) in out.iter_mut().enumerate() {
        if coef != T::zero() {
            *o = coef * s.powf(half - T::from_usize(k).unwrap());
        }
        coef = coef * (half - T::from_usize(k).unwrap());
    }
    out
}

/// `(1 + s)^{1/2}`
pub fn sqrt_one_plus<T: Real>(s: T) -> Jet<T> {
    let mut out = [T::zero(); 5];
    let mut coef = T::one();
    let half = lit::<T>(0.5);
    let base = T::one() + s;
    for (k, o) in out.iter_mut().enumerate() {
        *o = coef * base.powf(half - T::from_usize(k).unwrap());
        coef = coef * (half - T::from_usize(k).unwrap());
    }
    out
}

/// `-1/2 log s`
pub fn neg_half_log<T: Real>(s: T) -> Jet<T> {
    let half = lit::<T>(0.5);
    [
        -half * s.ln(),
        -half / s,
        half / (s * s),
        -T::one() / (s * s * s),
        lit::<T>(3.0) / (s * s * s * s),
    ]
}

/// `-1/2 log(2 - 2s)`: the logarithmic cost restricted to the unit sphere,
/// as a function of `s = x . y`.
pub fn neg_half_log_chord<T: Real>(s: T) -> Jet<T> {
    let half = lit::<T>(0.5);
    let u = T::one() - s;
    [
        -half * (lit::<T>(2.0) * u).ln(),
        half / u,
        half / (u * u),
        T::one() / (u * u * u),
        lit::<T>(3.0) / (u * u * u * u),
    ]
}

/// `1/2 arccos(s)^2`, the half squared geodesic distance on the unit sphere
/// as a function of `s = x . y`.
///
/// `y = arccos(s)^2` solves `(1 - s^2) y'' - s y' = 2`, which is regular at
/// `s = 1`. Near `s = 1` the power series in `u = 1 - s` is used; its
/// coefficients obey `a_1 = 2`, `a_{m+1} = m^2 a_m / ((m+1)(2m+1))` and the
/// series converges for `u < 2`. Elsewhere the closed form for `y'` is
/// differentiated through the same ODE.
pub fn half_arccos_sq<T: Real>(s: T) -> Jet<T> {
    let u = T::one() - s;
    let mut y = [T::zero(); 5];
    if u < lit(0.5) {
        const TERMS: usize = 48;
        let mut a = [T::zero(); TERMS + 1];
        a[1] = lit(2.0);
        for m in 1..TERMS {
            let mf = T::from_usize(m).unwrap();
            a[m + 1] = mf * mf * a[m] / ((mf + T::one()) * (lit::<T>(2.0) * mf + T::one()));
        }
        // d^m/ds^m = (-1)^m d^m/du^m; Horner over sum_k k!/(k-m)! a_k u^{k-m}
        for (order, slot) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in (order..=TERMS).rev() {
                let mut ff = T::one();
                for r in 0..order {
                    ff = ff * T::from_usize(k - r).unwrap();
                }
                acc = acc * u + ff * a[k];
            }
            *slot = if order % 2 == 0 { acc } else { -acc };
        }
    } else {
        let theta = s.acos();
        let w = T::one() - s * s;
        y[0] = theta * theta;
        y[1] = -lit::<T>(2.0) * theta / w.sqrt();
        y[2] = (lit::<T>(2.0) + s * y[1]) / w;
        y[3] = (lit::<T>(3.0) * s * y[2] + y[1]) / w;
        y[4] = (lit::<T>(5.0) * s * y[3] + lit::<T>(4.0) * y[2]) / w;
    }
    y.map(|v| v / lit(2.0))
}
