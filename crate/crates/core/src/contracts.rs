//! Convertible bond terms, market inputs and the price bounds they impose.
//!
//! Contract clocks run in forward time `t` (years from today). The solver marches in
//! backward time `tau = T - t` and log-moneyness `x = ln(S / S_int)`; the helpers
//! here translate between the two.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Time interval in forward time with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub start: T,
    pub end: T,
    pub start_open: bool,
    pub end_open: bool,
}

impl<T: Real> Window<T> {
    pub fn closed(start: T, end: T) -> Self {
        Self {
            start,
            end,
            start_open: false,
            end_open: false,
        }
    }

    /// `(start, end]`
    pub fn left_open(start: T, end: T) -> Self {
        Self {
            start,
            end,
            start_open: true,
            end_open: false,
        }
    }

    /// Membership test; `tol` absorbs round-off in grid times near the end points.
    pub fn contains(&self, t: T, tol: T) -> bool {
        let after_start = if self.start_open {
            t > self.start + tol
        } else {
            t >= self.start - tol
        };
        let before_end = if self.end_open {
            t < self.end - tol
        } else {
            t <= self.end + tol
        };
        after_start && before_end
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end || (self.start == self.end && (self.start_open || self.end_open))
    }

    fn intersects(&self, other: &Window<T>) -> bool {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo < hi {
            return true;
        }
        lo == hi && self.contains(lo, T::zero()) && other.contains(lo, T::zero())
    }
}

impl<T: Real> fmt::Display for Window<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.start_open { '(' } else { '[' },
            self.start,
            self.end,
            if self.end_open { ')' } else { ']' }
        )
    }
}

/// Parses interval notation such as `[3, 5]` or `(2, 3]`.
impl<T: Real> FromStr for Window<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("malformed interval `{s}`; expected e.g. `(2, 3]`"));
        let open = s.chars().next().ok_or_else(bad)?;
        let close = s.chars().last().ok_or_else(bad)?;
        let start_open = match open {
            '(' => true,
            '[' => false,
            _ => return Err(bad()),
        };
        let end_open = match close {
            ')' => true,
            ']' => false,
            _ => return Err(bad()),
        };
        let inner = &s[1..s.len() - 1];
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        Ok(Self {
            start: T::lit(a),
            end: T::lit(b),
            start_open,
            end_open,
        })
    }
}

/// Issuer call or holder put right: a clean exercise price and the window in which it applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provision<T> {
    pub clean_price: T,
    pub window: Window<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BondContract<T> {
    pub face_value: T,
    /// Cash amount paid at every coupon date.
    pub coupon_amount: T,
    /// Strictly increasing coupon dates in `(0, maturity]`.
    pub coupon_times: Vec<T>,
    /// Shares received per bond on conversion.
    pub conversion_ratio: T,
    pub call: Option<Provision<T>>,
    pub put: Option<Provision<T>>,
    pub maturity: T,
}

/// Market inputs. The stock growth rate is taken equal to `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<T> {
    pub r: T,
    pub r_c: T,
    pub sigma: T,
    pub s_int: T,
}

impl<T: Real> MarketParams<T> {
    pub fn new(r: T, r_c: T, sigma: T, s_int: T) -> Result<Self> {
        let m = Self {
            r,
            r_c,
            sigma,
            s_int,
        };
        m.validate()?;
        Ok(m)
    }

    /// r = 5%, credit spread 2%, volatility 20%, spot 100.
    pub fn benchmark() -> Self {
        Self {
            r: T::lit(0.05),
            r_c: T::lit(0.02),
            sigma: T::lit(0.2),
            s_int: T::lit(100.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.sigma > T::zero()) || !self.sigma.is_finite() {
            problems.push(format!("sigma must be > 0 (got {})", self.sigma));
        }
        if !(self.s_int > T::zero()) || !self.s_int.is_finite() {
            problems.push(format!("s_int must be > 0 (got {})", self.s_int));
        }
        if !(self.r >= T::zero()) || !self.r.is_finite() {
            problems.push(format!("r must be >= 0 (got {})", self.r));
        }
        if !(self.r_c >= T::zero()) || !self.r_c.is_finite() {
            problems.push(format!("r_c must be >= 0 (got {})", self.r_c));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Stock price at log-moneyness `x`.
    #[inline]
    pub fn stock_price(&self, x: T) -> T {
        self.s_int * x.exp()
    }
}

impl<T: Real> BondContract<T> {
    /// Validating constructor.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        face_value: T,
        coupon_amount: T,
        coupon_times: Vec<T>,
        conversion_ratio: T,
        call: Option<Provision<T>>,
        put: Option<Provision<T>>,
        maturity: T,
    ) -> Result<Self> {
        let c = Self {
            face_value,
            coupon_amount,
            coupon_times,
            conversion_ratio,
            call,
            put,
            maturity,
        };
        c.validate()?;
        Ok(c)
    }

    /// Five-year bond, face 100, semiannual coupon 4, one share per bond, callable at 110
    /// over `(3, 5]`, puttable at 105 over `(2, 3]`.
    pub fn benchmark() -> Self {
        let half = T::lit(0.5);
        Self {
            face_value: T::lit(100.0),
            coupon_amount: T::lit(4.0),
            coupon_times: (1..=10).map(|i| half * T::from_count(i)).collect(),
            conversion_ratio: T::one(),
            call: Some(Provision {
                clean_price: T::lit(110.0),
                window: Window::left_open(T::lit(3.0), T::lit(5.0)),
            }),
            put: Some(Provision {
                clean_price: T::lit(105.0),
                window: Window::left_open(T::lit(2.0), T::lit(3.0)),
            }),
            maturity: T::lit(5.0),
        }
    }

    /// Collects every violated invariant into one error.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let zero = T::zero();
        if !(self.maturity > zero) || !self.maturity.is_finite() {
            problems.push(format!("maturity must be > 0 (got {})", self.maturity));
        }
        if !(self.face_value > zero) || !self.face_value.is_finite() {
            problems.push(format!("face_value must be > 0 (got {})", self.face_value));
        }
        if !(self.coupon_amount >= zero) || !self.coupon_amount.is_finite() {
            problems.push(format!(
                "coupon_amount must be >= 0 (got {})",
                self.coupon_amount
            ));
        }
        if !(self.conversion_ratio >= zero) || !self.conversion_ratio.is_finite() {
            problems.push(format!(
                "conversion_ratio must be >= 0 (got {})",
                self.conversion_ratio
            ));
        }
        let mut prev = zero;
        for (i, &t) in self.coupon_times.iter().enumerate() {
            if !(t > prev) {
                problems.push(format!(
                    "coupon_times must be strictly increasing and > 0 (entry {i} = {t})"
                ));
            }
            if t > self.maturity {
                problems.push(format!("coupon_times[{i}] = {t} exceeds maturity"));
            }
            prev = t;
        }
        for (name, p) in [("call", &self.call), ("put", &self.put)] {
            if let Some(p) = p {
                let w = p.window;
                if w.start < zero || w.end > self.maturity || w.start > w.end {
                    problems.push(format!("{name} window {w} must lie within [0, maturity]"));
                }
                if !(p.clean_price > zero) || !p.clean_price.is_finite() {
                    problems.push(format!("{name} clean price must be > 0"));
                }
            }
        }
        if let (Some(c), Some(p)) = (&self.call, &self.put) {
            if c.window.intersects(&p.window) && p.clean_price > c.clean_price {
                problems.push(format!(
                    "put price {} exceeds call price {} on overlapping windows",
                    p.clean_price, c.clean_price
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Round-off allowance used when comparing grid times against contract dates.
    #[inline]
    pub fn time_tolerance(&self) -> T {
        self.maturity * T::epsilon() * T::lit(1024.0)
    }

    /// Stand-in for an infinite call price outside the call window.
    #[inline]
    pub fn call_guard(&self) -> T {
        self.face_value * T::lit(1e9)
    }

    fn check_time(&self, t: T) -> Result<()> {
        let tol = self.time_tolerance();
        if t.is_nan() || t < -tol || t > self.maturity + tol {
            return Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.maturity
            )));
        }
        Ok(())
    }

    /// Forward time for a backward time `tau`.
    #[inline]
    pub fn forward_time(&self, tau: T) -> T {
        self.maturity - tau
    }

    /// Coupon dates expressed in backward time, `T - t_i`.
    pub fn coupon_taus(&self) -> Vec<T> {
        self.coupon_times
            .iter()
            .map(|&t| self.maturity - t)
            .collect()
    }

    /// Whether a backward time `tau > 0` coincides with a coupon date.
    pub fn is_coupon_tau(&self, tau: T) -> bool {
        let tol = self.time_tolerance();
        tau > tol
            && self
                .coupon_times
                .iter()
                .any(|&ti| (self.maturity - ti - tau).abs() <= tol)
    }

    /// Pro-rata share of the pending coupon at forward time `t`. Coupon periods are
    /// half-open `(t_{i-1}, t_i]` with `t_0 = 0`, so the full coupon is accrued exactly
    /// on a payment date and accrual restarts right after it.
    pub fn accrued_interest(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        let tol = self.time_tolerance();
        let mut prev = T::zero();
        for &ti in &self.coupon_times {
            if t <= ti + tol {
                if t <= prev + tol {
                    return Ok(T::zero());
                }
                let frac = ((t - prev) / (ti - prev)).min(T::one());
                return Ok(self.coupon_amount * frac);
            }
            prev = ti;
        }
        Ok(T::zero())
    }

    /// Dirty call price, or [`call_guard`](Self::call_guard) when the bond is not callable at `t`.
    pub fn dirty_call_price(&self, t: T) -> Result<T> {
        let acc = self.accrued_interest(t)?;
        Ok(match &self.call {
            Some(c) if c.window.contains(t, self.time_tolerance()) => c.clean_price + acc,
            _ => self.call_guard(),
        })
    }

    /// Dirty put price, or zero when the bond is not puttable at `t`.
    pub fn dirty_put_price(&self, t: T) -> Result<T> {
        let acc = self.accrued_interest(t)?;
        Ok(match &self.put {
            Some(p) if p.window.contains(t, self.time_tolerance()) => p.clean_price + acc,
            _ => T::zero(),
        })
    }

    /// Conversion value `k S_int e^x`.
    #[inline]
    pub fn conversion_value(&self, x: T, market: &MarketParams<T>) -> T {
        self.conversion_ratio * market.stock_price(x)
    }
}

/// Dirty put/call prices at one backward time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExercisePrices<T> {
    pub put: T,
    pub call: T,
    pub put_active: bool,
    pub call_active: bool,
}

impl<T: Real> ExercisePrices<T> {
    pub fn at_tau(contract: &BondContract<T>, tau: T) -> Result<Self> {
        let t = contract.forward_time(tau);
        let tol = contract.time_tolerance();
        Ok(Self {
            put: contract.dirty_put_price(t)?,
            call: contract.dirty_call_price(t)?,
            put_active: contract.put.is_some_and(|p| p.window.contains(t, tol)),
            call_active: contract.call.is_some_and(|c| c.window.contains(t, tol)),
        })
    }

    /// `(max(B_put, kS), max(B_call, kS))` for a conversion value `ks`.
    #[inline]
    pub fn bounds(&self, ks: T) -> (T, T) {
        (self.put.max(ks), self.call.max(ks))
    }
}

/// Lower and upper bounds on the bond value at `(x, tau)`.
pub fn constraint_bounds<T: Real>(
    x: T,
    tau: T,
    contract: &BondContract<T>,
    market: &MarketParams<T>,
) -> Result<(T, T)> {
    if tau.is_nan()
        || tau < -contract.time_tolerance()
        || tau > contract.maturity + contract.time_tolerance()
    {
        return Err(Error::Domain(format!("tau {tau} outside [0, T]")));
    }
    let prices = ExercisePrices::at_tau(contract, tau)?;
    Ok(prices.bounds(contract.conversion_value(x, market)))
}

/// Values `(U, V)` at maturity for log-moneyness `x`; ties go to redemption.
pub fn terminal_payoff<T: Real>(
    x: T,
    contract: &BondContract<T>,
    market: &MarketParams<T>,
) -> (T, T) {
    let redemption = contract.face_value + contract.coupon_amount;
    let ks = contract.conversion_value(x, market);
    if redemption >= ks {
        (redemption, redemption)
    } else {
        (ks, T::zero())
    }
}
