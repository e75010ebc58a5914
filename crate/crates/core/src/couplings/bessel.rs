//! Bessel functions of the first kind for integer order.
//!
//! Orders are produced together by Miller's backward recurrence,
//! normalised with `J_0 + 2 Σ J_2k = 1`. Small arguments use the power series.

use crate::{Error, Result};

/// Largest supported `|x|`.
pub const MAX_ARGUMENT: f64 = 50.0;

const SERIES_THRESHOLD: f64 = 0.5;
const RESCALE: f64 = 1e250;

/// `J_n(x)` for integer `n` and `|x| <= 50`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    check_argument(x)?;
    let order = n.unsigned_abs() as usize;
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x).
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    Ok(sign * orders_nonneg(order, x.abs())[order])
}

/// `[J_0(x), J_1(x), …, J_max_order(x)]`.
pub fn bessel_j_orders(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let mut v = orders_nonneg(max_order, x.abs());
    if x < 0.0 {
        v.iter_mut().skip(1).step_by(2).for_each(|j| *j = -*j);
    }
    Ok(v)
}

fn check_argument(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() <= MAX_ARGUMENT {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

fn orders_nonneg(max_order: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; max_order + 1];
        v[0] = 1.0;
        return v;
    }
    if x < SERIES_THRESHOLD {
        return (0..=max_order).map(|n| series(n, x)).collect();
    }
    miller(max_order, x)
}

fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(max_order: usize, x: f64) -> Vec<f64> {
    let top = (max_order as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut out = vec![0.0; max_order + 1];
    let mut above = 0.0;
    let mut current = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        // `current` now holds the unnormalised J_{k-1}.
        let idx = k - 1;
        if idx <= max_order {
            out[idx] = current;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE {
            current /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut().skip(idx) {
                *v /= RESCALE;
            }
        }
    }
    norm += current;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}
