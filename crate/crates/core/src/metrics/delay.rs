//! AP, AL and DAL.
//!
//! Lag vectors are stored 0-indexed (`g[0]` belongs to the first target
//! token); the formulas below are written with 1-indexed `j = idx + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::program::Program;

fn check_lengths(g: &[usize], src_len: usize, tgt_len: usize) -> Result<()> {
    if g.len() != tgt_len {
        return Err(Error::LengthMismatch {
            expected: tgt_len,
            actual: g.len(),
        });
    }
    if src_len == 0 || tgt_len == 0 {
        return Err(Error::InvalidConfig("delay metrics need non-empty lengths".into()));
    }
    Ok(())
}

/// AP = sum_j g(j) / (|x| |y|).
pub fn average_proportion(g: &[usize], src_len: usize, tgt_len: usize) -> Result<f64> {
    check_lengths(g, src_len, tgt_len)?;
    let total: usize = g.iter().sum();
    Ok(total as f64 / (src_len as f64 * tgt_len as f64))
}

/// AL, averaged up to the first target token written after the whole source was read.
pub fn average_lagging(g: &[usize], src_len: usize, tgt_len: usize) -> Result<f64> {
    check_lengths(g, src_len, tgt_len)?;
    let rate = tgt_len as f64 / src_len as f64;
    let tau = g
        .iter()
        .position(|&lag| lag >= src_len)
        .ok_or(Error::IncompleteRead)?
        + 1;
    let sum: f64 = g[..tau]
        .iter()
        .enumerate()
        .map(|(idx, &lag)| lag as f64 - idx as f64 / rate)
        .sum();
    Ok(sum / tau as f64)
}

/// Adjusted lags `g'(j) = max(g(j), g'(j-1) + |x|/|y|)` with `g'(0) = 0`.
pub fn dal_adjusted_lags(g: &[usize], src_len: usize, tgt_len: usize) -> Vec<f64> {
    let step = src_len as f64 / tgt_len as f64;
    let mut prev = 0.0;
    g.iter()
        .map(|&lag| {
            prev = (lag as f64).max(prev + step);
            prev
        })
        .collect()
}

pub fn differentiable_al(g: &[usize], src_len: usize, tgt_len: usize) -> Result<f64> {
    check_lengths(g, src_len, tgt_len)?;
    let step = src_len as f64 / tgt_len as f64;
    let sum: f64 = dal_adjusted_lags(g, src_len, tgt_len)
        .iter()
        .enumerate()
        .map(|(idx, &lag)| lag - idx as f64 * step)
        .sum();
    Ok(sum / tgt_len as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub ap: f64,
    pub al: f64,
    pub dal: f64,
    pub g: Vec<usize>,
    pub g_prime: Vec<f64>,
    pub src_len: usize,
    pub tgt_len: usize,
}

pub fn delay_report(p: &Program, src_len: usize, tgt_len: usize) -> Result<DelayReport> {
    if !p.is_valid(src_len, tgt_len).boundary_valid {
        return Err(Error::InvalidProgram { src_len, tgt_len });
    }
    let g = p.g_vector();
    Ok(DelayReport {
        ap: average_proportion(&g, src_len, tgt_len)?,
        al: average_lagging(&g, src_len, tgt_len)?,
        dal: differentiable_al(&g, src_len, tgt_len)?,
        g_prime: dal_adjusted_lags(&g, src_len, tgt_len),
        g,
        src_len,
        tgt_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::wait_k;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ap_examples() {
        assert!(close(average_proportion(&[3, 3, 3], 3, 3).unwrap(), 1.0));
        assert!(close(average_proportion(&[1, 2, 3], 3, 3).unwrap(), 6.0 / 9.0));
        assert!(close(average_proportion(&[1, 2, 3, 4], 4, 4).unwrap(), 0.625));
        assert!(average_proportion(&[1, 2], 3, 3).is_err());
    }

    #[test]
    fn al_examples() {
        assert!(close(average_lagging(&[3, 3, 3], 3, 3).unwrap(), 3.0));
        assert!(close(average_lagging(&[1, 2, 3, 4], 4, 4).unwrap(), 1.0));
        assert!(close(average_lagging(&[1, 2, 2], 2, 3).unwrap(), 7.0 / 6.0));
        assert_eq!(average_lagging(&[1, 1], 2, 2), Err(Error::IncompleteRead));
    }

    #[test]
    fn dal_examples() {
        assert_eq!(dal_adjusted_lags(&[3, 3, 3], 3, 3), vec![3.0, 4.0, 5.0]);
        assert!(close(differentiable_al(&[3, 3, 3], 3, 3).unwrap(), 3.0));
        assert!(close(differentiable_al(&[1, 2, 3, 4], 4, 4).unwrap(), 1.0));
        let gp = dal_adjusted_lags(&[1, 2, 2], 2, 3);
        assert!(close(gp[2], 8.0 / 3.0));
        assert!(close(differentiable_al(&[1, 2, 2], 2, 3).unwrap(), 11.0 / 9.0));
        assert!(differentiable_al(&[1], 2, 3).is_err());
    }

    #[test]
    fn report_examples() {
        let r = delay_report(&wait_k(100, 5, 4).unwrap(), 5, 4).unwrap();
        assert_eq!(r.ap, 1.0);
        assert!(close(r.al, 5.0) && close(r.dal, 5.0));

        for n in 1..12 {
            let r = delay_report(&wait_k(1, n, n).unwrap(), n, n).unwrap();
            assert!(close(r.ap, (n + 1) as f64 / (2 * n) as f64));
            assert!(close(r.al, 1.0) && close(r.dal, 1.0));
        }

        let diag: Program = "RWRWRW".parse().unwrap();
        let r = delay_report(&diag, 3, 3).unwrap();
        assert!(close(r.ap, 2.0 / 3.0) && close(r.al, 1.0) && close(r.dal, 1.0));

        let bad: Program = "WRRW".parse().unwrap();
        assert!(delay_report(&bad, 2, 2).is_err());
    }

    #[test]
    fn al_can_drop_when_delay_reaches_the_full_read_earlier() {
        let p: Program = "RRRRWWRRRRRRRRRRWRWWWRWWWWWWWWWWW".parse().unwrap();
        let q = crate::program::add_delay(&p, 1).unwrap();
        let (before, after) = (delay_report(&p, 16, 17).unwrap(), delay_report(&q, 16, 17).unwrap());
        assert!(after.g.iter().zip(&before.g).all(|(a, b)| a >= b));
        assert!(after.ap > before.ap && after.dal > before.dal);
        assert!(after.al < before.al);
    }

    mod props {
        use super::*;
        use crate::program::{add_delay, tests::valid_program};
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ap_and_dal_grow_with_delay(p in valid_program(20), d in 0usize..6) {
                let (s, t) = (p.read_count(), p.write_count());
                let a = delay_report(&add_delay(&p, d).unwrap(), s, t).unwrap();
                let b = delay_report(&add_delay(&p, d + 1).unwrap(), s, t).unwrap();
                prop_assert!(b.ap >= a.ap - 1e-12);
                prop_assert!(b.dal >= a.dal - 1e-12);
            }

            #[test]
            fn dal_recurrence_matches_brute_force(p in valid_program(20)) {
                let (s, t) = (p.read_count(), p.write_count());
                let g = p.g_vector();
                let step = s as f64 / t as f64;
                let gp = dal_adjusted_lags(&g, s, t);
                for j in 0..t {
                    // unrolled: max over k <= j of g(k) + (j - k) / r, and the j / r floor from g'(0) = 0
                    let brute = (0..=j)
                        .map(|k| g[k] as f64 + (j - k) as f64 * step)
                        .fold((j + 1) as f64 * step, f64::max);
                    prop_assert!((gp[j] - brute).abs() < 1e-9);
                    prop_assert!(gp[j] >= g[j] as f64);
                    if j > 0 {
                        prop_assert!(gp[j] - gp[j - 1] >= step - 1e-12);
                    }
                }
            }

            #[test]
            fn ap_is_one_only_for_read_all_first(p in valid_program(12)) {
                let (s, t) = (p.read_count(), p.write_count());
                let r = delay_report(&p, s, t).unwrap();
                let read_first = p.to_string() == "R".repeat(s) + &"W".repeat(t);
                prop_assert_eq!(r.ap == 1.0, read_first);
            }
        }
    }
}
