//! Gravity demand and the per-commodity profit term.
//!
//! Demand between `o` and `d` at travel time `T` is `P_o P_d / T^r`. A
//! commodity routed in time `t'` earns `R P_o P_d (t_direct - t') / t'^r`,
//! which is non-increasing and convex in `t'` on `(0, t_direct]`.

use crate::error::GravityError;
use crate::model::{DerivedTimes, TimeMatrix, TIME_EPS};

/// `t^r` evaluated as `exp(r ln t)` for every exponent.
#[inline]
pub fn real_pow(t: f64, r: f64) -> f64 {
    (r * t.ln()).exp()
}

pub fn demand(pop_origin: f64, pop_destination: f64, time: f64, r: f64) -> Result<f64, GravityError> {
    if !(time > 0.0) {
        return Err(GravityError::NonPositiveTime(time));
    }
    Ok(pop_origin * pop_destination / real_pow(time, r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfitTerm {
    /// Revenue per unit of time saved.
    pub revenue: f64,
    pub pop_origin: f64,
    pub pop_destination: f64,
    pub t_direct: f64,
    pub r: f64,
}

impl ProfitTerm {
    fn check(&self, t_prime: f64) -> Result<(), GravityError> {
        if !(t_prime > 0.0) {
            return Err(GravityError::NonPositiveTime(t_prime));
        }
        if t_prime > self.t_direct + TIME_EPS {
            return Err(GravityError::SlowerThanDirect {
                t_prime,
                t_direct: self.t_direct,
            });
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.revenue * self.pop_origin * self.pop_destination
    }

    /// Final demand at realized time `t_prime`.
    pub fn demand(&self, t_prime: f64) -> Result<f64, GravityError> {
        demand(self.pop_origin, self.pop_destination, t_prime, self.r)
    }
}

pub fn profit(term: &ProfitTerm, t_prime: f64) -> Result<f64, GravityError> {
    term.check(t_prime)?;
    Ok(term.scale() * (term.t_direct - t_prime) / real_pow(t_prime, term.r))
}

/// First derivative of [`profit`] in `t'`.
pub fn profit_d1(term: &ProfitTerm, t_prime: f64) -> Result<f64, GravityError> {
    term.check(t_prime)?;
    let r = term.r;
    Ok(term.scale() * ((r - 1.0) * t_prime - r * term.t_direct) / real_pow(t_prime, r + 1.0))
}

/// Second derivative of [`profit`] in `t'`.
pub fn profit_d2(term: &ProfitTerm, t_prime: f64) -> Result<f64, GravityError> {
    term.check(t_prime)?;
    let r = term.r;
    Ok(term.scale() * r * ((r + 1.0) * term.t_direct - (r - 1.0) * t_prime) / real_pow(t_prime, r + 2.0))
}

/// Travel time of `origin -> hubs[0] -> ... -> hubs[k-1] -> destination`,
/// summed leg by leg in path order: access leg, discounted hub legs, exit leg.
pub fn path_time(
    origin: usize,
    hubs: &[usize],
    destination: usize,
    times: &TimeMatrix,
    derived: &DerivedTimes,
    alpha: f64,
) -> Result<f64, GravityError> {
    if hubs.len() < 2 {
        return Err(GravityError::TooFewHubs(hubs.len()));
    }
    let first = hubs[0];
    let last = hubs[hubs.len() - 1];
    let mut total = times.get(origin, first) + derived.access[first];
    for w in hubs.windows(2) {
        total += alpha * times.get(w[0], w[1]);
    }
    total += times.get(last, destination) + derived.exit[last];
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(revenue: f64, t_direct: f64, r: f64) -> ProfitTerm {
        ProfitTerm {
            revenue,
            pop_origin: 1.0,
            pop_destination: 1.0,
            t_direct,
            r,
        }
    }

    #[test]
    fn demand_examples() {
        assert!((demand(1.0, 1.0, 1.0, 1.7).unwrap() - 1.0).abs() < 1e-15);
        assert!((demand(2.0, 3.0, 2.0, 1.0).unwrap() - 3.0).abs() < 1e-15);
        // 6 * 2^-1.7, reference from mpmath at 30 digits.
        let expected = 1.846_716_620_017_374_5;
        assert!((demand(2.0, 3.0, 2.0, 1.7).unwrap() - expected).abs() < 1e-14);
        assert!(demand(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(demand(1.0, 1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn profit_examples() {
        assert_eq!(profit(&term(1.0, 2.0, 1.7), 2.0).unwrap(), 0.0);
        assert!((profit(&term(1.0, 2.0, 1.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        // 1.5 * 0.5^-1.7, reference from mpmath.
        let expected = 4.873_514_378_137_413;
        assert!((profit(&term(1.0, 2.0, 1.7), 0.5).unwrap() - expected).abs() < 1e-13);
        assert!(matches!(
            profit(&term(1.0, 2.0, 1.0), 2.5),
            Err(GravityError::SlowerThanDirect { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let zero = term(0.0, 2.0, 1.7);
        assert_eq!(profit_d1(&zero, 1.0).unwrap(), 0.0);
        assert_eq!(profit_d2(&zero, 1.0).unwrap(), 0.0);
        assert!((profit_d1(&term(1.0, 2.0, 1.0), 1.0).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn path_time_example() {
        let times = TimeMatrix::from_rows(&[
            vec![0.0, 1.0, 3.0, 4.0],
            vec![1.0, 0.0, 2.0, 3.0],
            vec![3.0, 2.0, 0.0, 1.0],
            vec![4.0, 3.0, 1.0, 0.0],
        ]);
        let derived = DerivedTimes::uniform(4, 0.5);
        let t = path_time(0, &[1, 2], 3, &times, &derived, 0.5).unwrap();
        assert!((t - 4.0).abs() < 1e-15);
        // Origin and destination are themselves hubs.
        let t = path_time(1, &[1, 2], 2, &times, &derived, 0.5).unwrap();
        assert!((t - 2.0).abs() < 1e-15);
        assert!(path_time(0, &[1], 3, &times, &derived, 0.5).is_err());
    }
}
