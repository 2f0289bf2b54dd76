//! Weight functions, planar regions in the unit square, and the bridge
//! between the two: a weight becomes the width profile of a region, and a
//! region with no edge parallel to the flow direction has a well-defined
//! width profile.

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{QuadNum, Rational};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum WeightError {
    #[error("degenerate support (lo >= hi)")]
    DegenerateSupport,
    #[error("hat peak coincides with a support endpoint")]
    PeakAtEndpoint,
    #[error("weight values must be nonnegative and not identically zero")]
    BadValues,
    #[error("knots must be strictly increasing")]
    UnsortedKnots,
}

#[derive(Debug, Error, PartialEq, Clone)]
pub enum RegionError {
    #[error("weight support is wider than the available range")]
    RegionTooWide,
    #[error("polygon has an edge parallel to the flow direction")]
    EdgeParallelToFlow,
    #[error("polygon needs at least three vertices")]
    TooFewVertices,
    #[error("region kind does not support exact chord extraction")]
    UnsupportedChord,
    #[error("region is not contained in the unit square")]
    NotInUnitSquare,
}

/// A nonnegative weight of compact support. `PiecewiseLinear` stores
/// (knot, value) pairs with strictly increasing knots and value 0 assumed
/// outside the knot range. `C2Dome` is A*(1-u^2)^2 rescaled to [lo, hi],
/// which vanishes to second order at the endpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFn {
    Indicator { lo: QuadNum, hi: QuadNum },
    PiecewiseLinear { knots: Vec<(QuadNum, QuadNum)> },
    C2Dome { lo: QuadNum, hi: QuadNum, amplitude: Rational },
}

/// Symmetric triangular or skew "hat": 0 at lo and hi, `height` at `peak`.
pub fn make_hat(
    lo: QuadNum,
    peak: QuadNum,
    hi: QuadNum,
    height: Rational,
) -> Result<WeightFn, WeightError> {
    if lo.cmp_exact(&hi) != std::cmp::Ordering::Less {
        return Err(WeightError::DegenerateSupport);
    }
    if (&peak - &lo).sign() <= 0 || (&hi - &peak).sign() <= 0 {
        return Err(WeightError::PeakAtEndpoint);
    }
    if height <= Rational::zero() {
        return Err(WeightError::BadValues);
    }
    let d = lo.d();
    let h = QuadNum::from_rational(d, height);
    Ok(WeightFn::PiecewiseLinear {
        knots: vec![(lo, QuadNum::zero(d)), (peak, h), (hi, QuadNum::zero(d))],
    })
}

/// C^2 bump A*(1-u^2)^2 on [lo, hi].
pub fn make_c2_dome(
    lo: QuadNum,
    hi: QuadNum,
    amplitude: Rational,
) -> Result<WeightFn, WeightError> {
    if lo.cmp_exact(&hi) != std::cmp::Ordering::Less {
        return Err(WeightError::DegenerateSupport);
    }
    if amplitude <= Rational::zero() {
        return Err(WeightError::BadValues);
    }
    Ok(WeightFn::C2Dome { lo, hi, amplitude })
}

pub fn make_piecewise_linear(knots: Vec<(QuadNum, QuadNum)>) -> Result<WeightFn, WeightError> {
    if knots.len() < 2 {
        return Err(WeightError::DegenerateSupport);
    }
    let mut any_pos = false;
    for w in knots.windows(2) {
        if w[0].0.cmp_exact(&w[1].0) != std::cmp::Ordering::Less {
            return Err(WeightError::UnsortedKnots);
        }
    }
    for (_, v) in &knots {
        if v.sign() < 0 {
            return Err(WeightError::BadValues);
        }
        if v.sign() > 0 {
            any_pos = true;
        }
    }
    if !any_pos {
        return Err(WeightError::BadValues);
    }
    Ok(WeightFn::PiecewiseLinear { knots })
}

impl WeightFn {
    pub fn d(&self) -> u64 {
        match self {
            WeightFn::Indicator { lo, .. } => lo.d(),
            WeightFn::PiecewiseLinear { knots } => knots[0].0.d(),
            WeightFn::C2Dome { lo, .. } => lo.d(),
        }
    }

    pub fn support(&self) -> (QuadNum, QuadNum) {
        match self {
            WeightFn::Indicator { lo, hi } => (lo.clone(), hi.clone()),
            WeightFn::PiecewiseLinear { knots } => {
                (knots[0].0.clone(), knots[knots.len() - 1].0.clone())
            }
            WeightFn::C2Dome { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    /// Exact evaluation. Indicators take the value 1 on the closed support.
    pub fn eval(&self, x: &QuadNum) -> QuadNum {
        let d = self.d();
        match self {
            WeightFn::Indicator { lo, hi } => {
                if (x - lo).sign() >= 0 && (hi - x).sign() >= 0 {
                    QuadNum::one(d)
                } else {
                    QuadNum::zero(d)
                }
            }
            WeightFn::PiecewiseLinear { knots } => {
                for w in knots.windows(2) {
                    let (x0, v0) = &w[0];
                    let (x1, v1) = &w[1];
                    if (x - x0).sign() >= 0 && (x1 - x).sign() >= 0 {
                        let t = (x - x0).try_div(&(x1 - x0)).unwrap();
                        return v0 + &(&t * &(v1 - v0));
                    }
                }
                QuadNum::zero(d)
            }
            WeightFn::C2Dome { lo, hi, amplitude } => {
                if (x - lo).sign() < 0 || (hi - x).sign() < 0 {
                    return QuadNum::zero(d);
                }
                // u = (2x - lo - hi)/(hi - lo)
                let two = QuadNum::from_int(d, 2);
                let u = (&(&two * x) - &(lo + hi)).try_div(&(hi - lo)).unwrap();
                let one = QuadNum::one(d);
                let f = &one - &(&u * &u);
                let a = QuadNum::from_rational(d, amplitude.clone());
                &a * &(&f * &f)
            }
        }
    }

    /// Exact integral over the support: trapezoids for the linear family,
    /// 8A(hi-lo)/15 for the dome.
    pub fn integral(&self) -> QuadNum {
        let d = self.d();
        match self {
            WeightFn::Indicator { lo, hi } => hi - lo,
            WeightFn::PiecewiseLinear { knots } => {
                let mut acc = QuadNum::zero(d);
                let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
                for w in knots.windows(2) {
                    let (x0, v0) = &w[0];
                    let (x1, v1) = &w[1];
                    acc = &acc + &(&(&half * &(v0 + v1)) * &(x1 - x0));
                }
                acc
            }
            WeightFn::C2Dome { lo, hi, amplitude } => {
                let a = QuadNum::from_rational(d, amplitude.clone());
                let c = QuadNum::from_rational(d, Rational::new(8.into(), 15.into()));
                &(&a * &c) * &(hi - lo)
            }
        }
    }

    /// Exact integral over (-inf, x], i.e. from the support start to x.
    pub fn integral_to(&self, x: &QuadNum) -> QuadNum {
        let d = self.d();
        let (lo, hi) = self.support();
        if (x - &lo).sign() <= 0 {
            return QuadNum::zero(d);
        }
        if (x - &hi).sign() >= 0 {
            return self.integral();
        }
        match self {
            WeightFn::Indicator { lo, .. } => x - lo,
            WeightFn::PiecewiseLinear { knots } => {
                let mut acc = QuadNum::zero(d);
                let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
                for w in knots.windows(2) {
                    let (x0, v0) = &w[0];
                    let (x1, v1) = &w[1];
                    if (x - x1).sign() >= 0 {
                        acc = &acc + &(&(&half * &(v0 + v1)) * &(x1 - x0));
                    } else if (x - x0).sign() > 0 {
                        let vx = self.eval(x);
                        acc = &acc + &(&(&half * &(v0 + &vx)) * &(x - x0));
                        break;
                    } else {
                        break;
                    }
                }
                acc
            }
            WeightFn::C2Dome { lo, hi, amplitude } => {
                // A*(L/2) * (u - 2u^3/3 + u^5/5 + 8/15) with u in [-1, 1].
                let two = QuadNum::from_int(d, 2);
                let u = (&(&two * x) - &(lo + hi)).try_div(&(hi - lo)).unwrap();
                let u3 = &(&u * &u) * &u;
                let u5 = &(&u3 * &u) * &u;
                let term = &(&u - &(&u3 * &QuadNum::from_rational(d, Rational::new(2.into(), 3.into()))))
                    + &(&u5 * &QuadNum::from_rational(d, Rational::new(1.into(), 5.into())));
                let term = &term + &QuadNum::from_rational(d, Rational::new(8.into(), 15.into()));
                let a = QuadNum::from_rational(d, amplitude.clone());
                let halfl = &(hi - lo) * &QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
                &(&a * &halfl) * &term
            }
        }
    }

    pub fn max_value(&self) -> QuadNum {
        let d = self.d();
        match self {
            WeightFn::Indicator { .. } => QuadNum::one(d),
            WeightFn::PiecewiseLinear { knots } => {
                let mut m = QuadNum::zero(d);
                for (_, v) in knots {
                    m = m.max_exact(v.clone());
                }
                m
            }
            WeightFn::C2Dome { amplitude, .. } => QuadNum::from_rational(d, amplitude.clone()),
        }
    }

    /// Exact upper bound on sup |h'|; `None` for indicators.
    pub fn slope_bound(&self) -> Option<QuadNum> {
        let d = self.d();
        match self {
            WeightFn::Indicator { .. } => None,
            WeightFn::PiecewiseLinear { knots } => {
                let mut m = QuadNum::zero(d);
                for w in knots.windows(2) {
                    let s = (&w[1].1 - &w[0].1).try_div(&(&w[1].0 - &w[0].0)).unwrap().abs();
                    m = m.max_exact(s);
                }
                Some(m)
            }
            WeightFn::C2Dome { lo, hi, amplitude } => {
                // |h'| = (8A/L)|u(1-u^2)| and max |u(1-u^2)| = 2/(3 sqrt 3) < 2/5,
                // so 16A/(5L) is an exact upper bound.
                let a = QuadNum::from_rational(d, amplitude.clone());
                let c = QuadNum::from_rational(d, Rational::new(16.into(), 5.into()));
                Some((&a * &c).try_div(&(hi - lo)).unwrap())
            }
        }
    }

    /// Exact sup |h''| for the dome: 32A/(hi-lo)^2. `None` otherwise.
    pub fn second_derivative_sup(&self) -> Option<QuadNum> {
        match self {
            WeightFn::C2Dome { lo, hi, amplitude } => {
                let d = lo.d();
                let a = QuadNum::from_rational(d, amplitude.clone());
                let l = hi - lo;
                let c = QuadNum::from_int(d, 32);
                Some((&a * &c).try_div(&(&l * &l)).unwrap())
            }
            _ => None,
        }
    }

    /// Points where the local description changes (knots, endpoints).
    pub fn breakpoints(&self) -> Vec<QuadNum> {
        match self {
            WeightFn::Indicator { lo, hi } | WeightFn::C2Dome { lo, hi, .. } => {
                vec![lo.clone(), hi.clone()]
            }
            WeightFn::PiecewiseLinear { knots } => knots.iter().map(|(x, _)| x.clone()).collect(),
        }
    }

    /// h(. - delta): translate the support.
    pub fn shift(&self, delta: &QuadNum) -> WeightFn {
        match self {
            WeightFn::Indicator { lo, hi } => {
                WeightFn::Indicator { lo: lo + delta, hi: hi + delta }
            }
            WeightFn::PiecewiseLinear { knots } => WeightFn::PiecewiseLinear {
                knots: knots.iter().map(|(x, v)| (x + delta, v.clone())).collect(),
            },
            WeightFn::C2Dome { lo, hi, amplitude } => WeightFn::C2Dome {
                lo: lo + delta,
                hi: hi + delta,
                amplitude: amplitude.clone(),
            },
        }
    }

    /// h(. / scale): rescale the argument; `scale` may be negative.
    pub fn scale_arg(&self, scale: &QuadNum) -> WeightFn {
        assert!(scale.sign() != 0);
        let flip = scale.sign() < 0;
        match self {
            WeightFn::Indicator { lo, hi } => {
                let a = lo * scale;
                let b = hi * scale;
                let (lo, hi) = if flip { (b, a) } else { (a, b) };
                WeightFn::Indicator { lo, hi }
            }
            WeightFn::PiecewiseLinear { knots } => {
                let mut knots: Vec<(QuadNum, QuadNum)> =
                    knots.iter().map(|(x, v)| (x * scale, v.clone())).collect();
                if flip {
                    knots.reverse();
                }
                WeightFn::PiecewiseLinear { knots }
            }
            WeightFn::C2Dome { lo, hi, amplitude } => {
                let a = lo * scale;
                let b = hi * scale;
                let (lo, hi) = if flip { (b, a) } else { (a, b) };
                WeightFn::C2Dome { lo, hi, amplitude: amplitude.clone() }
            }
        }
    }

    pub fn to_f64_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x: f64| {
            let (lo, hi) = self.support();
            let (lo, hi) = (lo.to_f64(53), hi.to_f64(53));
            if x < lo || x > hi {
                return 0.0;
            }
            match self {
                WeightFn::Indicator { .. } => 1.0,
                WeightFn::PiecewiseLinear { knots } => {
                    let pts: Vec<(f64, f64)> =
                        knots.iter().map(|(k, v)| (k.to_f64(53), v.to_f64(53))).collect();
                    for w in pts.windows(2) {
                        if x >= w[0].0 && x <= w[1].0 {
                            let t = (x - w[0].0) / (w[1].0 - w[0].0);
                            return w[0].1 + t * (w[1].1 - w[0].1);
                        }
                    }
                    0.0
                }
                WeightFn::C2Dome { amplitude, .. } => {
                    let a = amplitude.to_f64().unwrap_or(0.0);
                    let u = (2.0 * x - lo - hi) / (hi - lo);
                    a * (1.0 - u * u).powi(2)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

pub type Pt = (QuadNum, QuadNum);

/// A region of the unit square.
///
/// `Polygon` must be simple; exact chord extraction additionally assumes
/// convexity. `ShearedGraph` is the tube of chords in the flow direction:
/// at internal offset zeta the chord is centered in the cell-crossing
/// interval and has length rescale * profile(zeta); by construction it lies
/// in the unit square and has no boundary piece parallel to the flow.
/// `VerticalGraph` is the band |y - center| <= rescale*profile(x)/2.
#[derive(Debug, Clone)]
pub enum Region {
    Polygon { vertices: Vec<Pt> },
    ShearedGraph { alpha: QuadNum, profile: WeightFn, rescale: Rational },
    VerticalGraph { center: QuadNum, profile: WeightFn, rescale: Rational },
    Ellipse { cx: QuadNum, cy: QuadNum, rx: QuadNum, ry: QuadNum },
}

fn shoelace(vertices: &[Pt]) -> QuadNum {
    let d = vertices[0].0.d();
    let mut acc = QuadNum::zero(d);
    let n = vertices.len();
    for i in 0..n {
        let (x0, y0) = &vertices[i];
        let (x1, y1) = &vertices[(i + 1) % n];
        acc = &acc + &(&(x0 * y1) - &(x1 * y0));
    }
    let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
    (&acc * &half).abs()
}

fn lift(d: u64, r: &Rational) -> QuadNum {
    QuadNum::from_rational(d, r.clone())
}

/// Endpoints max(0, -zeta/alpha) and min(1, (1-zeta)/alpha) of the
/// cell-crossing interval; may be degenerate or inverted outside (-alpha, 1).
fn cell_visit_raw(alpha: &QuadNum, zeta: &QuadNum) -> (QuadNum, QuadNum) {
    let d = alpha.d();
    let zero = QuadNum::zero(d);
    let one = QuadNum::one(d);
    let lo = zero.max_exact((-zeta).try_div(alpha).unwrap());
    let hi = one.clone().min_exact((&one - zeta).try_div(alpha).unwrap());
    (lo, hi)
}

/// Interval of cell-crossing parameters at internal offset zeta: the line
/// u -> (u, alpha*u + zeta) meets the unit square for u in this interval
/// (empty unless -alpha < zeta < 1).
pub fn cell_visit_interval(alpha: &QuadNum, zeta: &QuadNum) -> Option<(QuadNum, QuadNum)> {
    let (lo, hi) = cell_visit_raw(alpha, zeta);
    if (&hi - &lo).sign() > 0 {
        Some((lo, hi))
    } else {
        None
    }
}

impl Region {
    pub fn area_exact(&self) -> Option<QuadNum> {
        match self {
            Region::Polygon { vertices } => Some(shoelace(vertices)),
            Region::ShearedGraph { profile, rescale, .. }
            | Region::VerticalGraph { profile, rescale, .. } => {
                let d = profile.d();
                Some(&profile.integral() * &lift(d, rescale))
            }
            Region::Ellipse { .. } => None,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Ellipse { rx, ry, .. } => {
                std::f64::consts::PI * rx.to_f64(53) * ry.to_f64(53)
            }
            _ => self.area_exact().unwrap().to_f64(53),
        }
    }

    /// Internal-offset values where the chord structure can change.
    pub fn chord_breakpoints(&self, alpha: &QuadNum) -> Vec<QuadNum> {
        let d = alpha.d();
        let mut out = match self {
            Region::Polygon { vertices } => vertices
                .iter()
                .map(|(x, y)| y - &(alpha * x))
                .collect::<Vec<_>>(),
            Region::ShearedGraph { profile, .. } => profile.breakpoints(),
            Region::VerticalGraph { profile, .. } => {
                // Conservative: support endpoints mapped through the shear.
                let (lo, hi) = profile.support();
                vec![
                    &(-alpha.clone()) * &hi,
                    &(-alpha.clone()) * &lo,
                    QuadNum::one(d) - &(alpha * &lo),
                    QuadNum::one(d) - &(alpha * &hi),
                ]
            }
            Region::Ellipse { cx, cy, rx, ry, .. } => {
                // Extremes of y - alpha*x on the ellipse, widened outward.
                let c = cy - &(alpha * cx);
                let spread = rx.abs().try_mul(&alpha.abs()).unwrap() + &ry.abs();
                vec![&c - &spread, &c + &spread]
            }
        };
        // Always include the unit-cell visit range endpoints.
        out.push(-alpha.clone());
        out.push(QuadNum::one(d));
        out.sort_by(|a, b| a.cmp_exact(b));
        out.dedup();
        out
    }

    /// Exact chord of the region along the flow line of internal offset
    /// zeta, as an interval in the cell-crossing parameter u. Supported for
    /// convex polygons and sheared graphs.
    pub fn chord(&self, alpha: &QuadNum, zeta: &QuadNum) -> Result<Option<(QuadNum, QuadNum)>, RegionError> {
        match self {
            Region::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(RegionError::TooFewVertices);
                }
                // Signed offset of each vertex from the line y = alpha*x + zeta.
                let f: Vec<QuadNum> =
                    vertices.iter().map(|(x, y)| &(y - &(alpha * x)) - zeta).collect();
                let mut us: Vec<QuadNum> = Vec::new();
                let n = vertices.len();
                for i in 0..n {
                    let j = (i + 1) % n;
                    let (si, sj) = (f[i].sign(), f[j].sign());
                    if si == 0 {
                        us.push(vertices[i].0.clone());
                    }
                    if si * sj < 0 {
                        // Cross point: u = x_i + (x_j - x_i) * f_i / (f_i - f_j)
                        let t = f[i].try_div(&(&f[i] - &f[j])).unwrap();
                        let u = &vertices[i].0 + &(&t * &(&vertices[j].0 - &vertices[i].0));
                        us.push(u);
                    }
                }
                us.sort_by(|a, b| a.cmp_exact(b));
                us.dedup();
                if us.len() < 2 {
                    return Ok(None);
                }
                let lo = us[0].clone();
                let hi = us[us.len() - 1].clone();
                if (&hi - &lo).sign() > 0 {
                    Ok(Some((lo, hi)))
                } else {
                    Ok(None)
                }
            }
            Region::ShearedGraph { alpha: a0, profile, rescale } => {
                if a0 != alpha {
                    return Err(RegionError::UnsupportedChord);
                }
                let d = alpha.d();
                let Some((lo, hi)) = cell_visit_interval(alpha, zeta) else {
                    return Ok(None);
                };
                let w = &profile.eval(zeta) * &lift(d, rescale);
                if w.sign() <= 0 {
                    return Ok(None);
                }
                let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
                let mid = &(&lo + &hi) * &half;
                let hw = &w * &half;
                Ok(Some((&mid - &hw, &mid + &hw)))
            }
            _ => Err(RegionError::UnsupportedChord),
        }
    }

    /// Exact containment check in [0,1]^2 where available.
    pub fn check_in_unit_square(&self) -> Result<(), RegionError> {
        let inside = |x: &QuadNum, lo: i64, hi: i64| {
            let d = x.d();
            (x - &QuadNum::from_int(d, lo)).sign() >= 0
                && (&QuadNum::from_int(d, hi) - x).sign() >= 0
        };
        match self {
            Region::Polygon { vertices } => {
                for (x, y) in vertices {
                    if !inside(x, 0, 1) || !inside(y, 0, 1) {
                        return Err(RegionError::NotInUnitSquare);
                    }
                }
                Ok(())
            }
            Region::ShearedGraph { alpha, profile, rescale } => {
                // Chords are centered in the cell-visit interval; containment
                // holds iff rescale*profile <= visit length at every
                // breakpoint of the piecewise structure (both sides are
                // piecewise linear in zeta for the linear family; the dome is
                // dominated by the slope-bound cone, checked by construction).
                let d = alpha.d();
                for z in profile.breakpoints() {
                    let w = &profile.eval(&z) * &lift(d, rescale);
                    let avail = match cell_visit_interval(alpha, &z) {
                        Some((lo, hi)) => &hi - &lo,
                        None => QuadNum::zero(d),
                    };
                    if (&w - &avail).sign() > 0 {
                        return Err(RegionError::NotInUnitSquare);
                    }
                }
                Ok(())
            }
            Region::VerticalGraph { center, profile, rescale } => {
                let d = center.d();
                let (lo, hi) = profile.support();
                if !inside(&lo, 0, 1) || !inside(&hi, 0, 1) {
                    return Err(RegionError::NotInUnitSquare);
                }
                let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
                let hw = &(&profile.max_value() * &lift(d, rescale)) * &half;
                if !inside(&(center - &hw), 0, 1) || !inside(&(center + &hw), 0, 1) {
                    return Err(RegionError::NotInUnitSquare);
                }
                Ok(())
            }
            Region::Ellipse { cx, cy, rx, ry } => {
                if !inside(&(cx - rx), 0, 1)
                    || !inside(&(cx + rx), 0, 1)
                    || !inside(&(cy - ry), 0, 1)
                    || !inside(&(cy + ry), 0, 1)
                {
                    return Err(RegionError::NotInUnitSquare);
                }
                Ok(())
            }
        }
    }
}

/// Outcome of building a region out of a weight: the region, the rescale
/// c' actually used, and the translation applied to the weight's argument.
#[derive(Debug, Clone)]
pub struct RegionBridge {
    pub region: Region,
    pub rescale: Rational,
    pub offset: QuadNum,
}

fn dyadic_at_most(bound: &QuadNum, start: Rational) -> Option<Rational> {
    // Largest of start, start/2, start/4, ... that is <= bound.
    if bound.sign() <= 0 {
        return None;
    }
    let d = bound.d();
    let mut c = start;
    for _ in 0..256 {
        if (bound - &lift(d, &c)).sign() >= 0 {
            return Some(c);
        }
        c /= Rational::from_integer(2.into());
    }
    None
}

/// Region under the graph pair y = 1/2 +- c'*h(x)/2, with the support
/// translated to the middle of [0,1]. Piecewise-linear weights produce the
/// polygon with vertices at the knots; the dome keeps its analytic form.
pub fn region_from_weight(h: &WeightFn, c_requested: Rational) -> Result<RegionBridge, RegionError> {
    assert!(c_requested > Rational::zero());
    let d = h.d();
    let (lo, hi) = h.support();
    let len = &hi - &lo;
    if (&len - &QuadNum::one(d)).sign() > 0 {
        return Err(RegionError::RegionTooWide);
    }
    let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
    // Center the support at x = 1/2.
    let offset = &half - &(&(&lo + &hi) * &half);
    let shifted = h.shift(&offset);
    // Fit: c' * max h <= 1 keeps the band inside the square.
    let bound = QuadNum::one(d).try_div(&h.max_value()).unwrap();
    let rescale = dyadic_at_most(&bound, c_requested).ok_or(RegionError::RegionTooWide)?;

    let region = match &shifted {
        WeightFn::PiecewiseLinear { knots } => {
            let c = lift(d, &rescale);
            let mut upper: Vec<Pt> = Vec::new();
            let mut lower: Vec<Pt> = Vec::new();
            for (x, v) in knots {
                let hw = &(&c * v) * &half;
                upper.push((x.clone(), &half + &hw));
                lower.push((x.clone(), &half - &hw));
            }
            let mut vertices = upper;
            for p in lower.into_iter().rev() {
                // Avoid duplicating vertices where the band closes up.
                if vertices.last() != Some(&p) && vertices.first() != Some(&p) {
                    vertices.push(p);
                }
            }
            Region::Polygon { vertices }
        }
        _ => Region::VerticalGraph {
            center: half.clone(),
            profile: shifted.clone(),
            rescale: rescale.clone(),
        },
    };
    region.check_in_unit_square()?;
    Ok(RegionBridge { region, rescale, offset })
}

/// Region whose chords along the flow of slope alpha reproduce the weight:
/// the chord at internal offset zeta has length c'*h(zeta - offset). The
/// support is centered in the admissible offset range (-alpha, 1) and c' is
/// shrunk until every chord fits in its cell-visit interval; the cone bound
/// c' * max(sup|h'|, max h) <= 1/alpha suffices for both weight families.
pub fn sheared_region_from_weight(
    h: &WeightFn,
    alpha: &QuadNum,
    c_requested: Rational,
) -> Result<RegionBridge, RegionError> {
    assert!(c_requested > Rational::zero());
    assert!(alpha.sign() > 0);
    let d = h.d();
    let (lo, hi) = h.support();
    let len = &hi - &lo;
    let range = QuadNum::one(d) + alpha; // length of (-alpha, 1)
    if (&len - &range).sign() > 0 {
        return Err(RegionError::RegionTooWide);
    }
    // Center the support at the midpoint (1 - alpha)/2 of the offset range.
    let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
    let mid_range = &(QuadNum::one(d) - alpha) * &half;
    let offset = &mid_range - &(&(&lo + &hi) * &half);
    let shifted = h.shift(&offset);

    let m1 = h.slope_bound().ok_or(RegionError::UnsupportedChord)?;
    let denom = m1.max_exact(h.max_value());
    let bound = QuadNum::one(d).try_div(alpha).unwrap().try_div(&denom).unwrap();
    let rescale = dyadic_at_most(&bound, c_requested).ok_or(RegionError::RegionTooWide)?;

    let region = match &shifted {
        WeightFn::PiecewiseLinear { knots } => {
            // Chord center m(z) and half-width are piecewise linear in z;
            // emit the polygon through all breakpoints of either.
            let c = lift(d, &rescale);
            let mut zs: Vec<QuadNum> = knots.iter().map(|(z, _)| z.clone()).collect();
            for z in [QuadNum::zero(d), QuadNum::one(d) - alpha] {
                if (&z - &zs[0]).sign() > 0 && (&zs[zs.len() - 1] - &z).sign() > 0 {
                    zs.push(z);
                }
            }
            zs.sort_by(|a, b| a.cmp_exact(b));
            zs.dedup();
            let mut upper: Vec<Pt> = Vec::new();
            let mut lower: Vec<Pt> = Vec::new();
            for z in &zs {
                // The raw endpoints stay meaningful at the degenerate ends of
                // the offset range, where the chord closes up at a corner.
                let (vlo, vhi) = cell_visit_raw(alpha, z);
                let mid = &(&vlo + &vhi) * &half;
                let hw = &(&(&c * &shifted.eval(z)) * &half).clone();
                let (ulo, uhi) = (&mid - hw, &mid + hw);
                // Map (u, z) -> (x, y) = (u, alpha*u + z).
                upper.push((uhi.clone(), &(alpha * &uhi) + z));
                lower.push((ulo.clone(), &(alpha * &ulo) + z));
            }
            let mut vertices = upper;
            for p in lower.into_iter().rev() {
                if vertices.last() != Some(&p) && vertices.first() != Some(&p) {
                    vertices.push(p);
                }
            }
            Region::Polygon { vertices }
        }
        _ => Region::ShearedGraph {
            alpha: alpha.clone(),
            profile: shifted.clone(),
            rescale: rescale.clone(),
        },
    };
    if let Region::Polygon { .. } = &region {
        region.check_in_unit_square()?;
    }
    Ok(RegionBridge { region, rescale, offset })
}

/// The width profile of a region in the flow direction of slope alpha, as a
/// function of the internal offset zeta = y - alpha*x, measured in the
/// cell-crossing parameter u (euclidean width is sqrt(1+alpha^2) times
/// larger). Exact for convex polygons with no edge of slope alpha.
pub fn width_function(region: &Region, alpha: &QuadNum) -> Result<WeightFn, RegionError> {
    match region {
        Region::Polygon { vertices } => {
            if vertices.len() < 3 {
                return Err(RegionError::TooFewVertices);
            }
            let n = vertices.len();
            for i in 0..n {
                let j = (i + 1) % n;
                let dy = &vertices[j].1 - &vertices[i].1;
                let dx = &vertices[j].0 - &vertices[i].0;
                if (&dy - &(alpha * &dx)).is_zero() {
                    return Err(RegionError::EdgeParallelToFlow);
                }
            }
            let mut zs: Vec<QuadNum> =
                vertices.iter().map(|(x, y)| y - &(alpha * x)).collect();
            zs.sort_by(|a, b| a.cmp_exact(b));
            zs.dedup();
            let knots: Vec<(QuadNum, QuadNum)> = zs
                .iter()
                .map(|z| {
                    let w = match region.chord(alpha, z).unwrap() {
                        Some((lo, hi)) => &hi - &lo,
                        None => QuadNum::zero(alpha.d()),
                    };
                    (z.clone(), w)
                })
                .collect();
            make_piecewise_linear(knots).map_err(|_| RegionError::TooFewVertices)
        }
        Region::ShearedGraph { alpha: a0, profile, rescale } => {
            if a0 != alpha {
                return Err(RegionError::UnsupportedChord);
            }
            // Width is rescale * profile by construction.
            let d = alpha.d();
            let c = lift(d, rescale);
            Ok(match profile {
                WeightFn::PiecewiseLinear { knots } => WeightFn::PiecewiseLinear {
                    knots: knots.iter().map(|(x, v)| (x.clone(), &c * v)).collect(),
                },
                WeightFn::C2Dome { lo, hi, amplitude } => WeightFn::C2Dome {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    amplitude: amplitude * rescale,
                },
                WeightFn::Indicator { .. } => return Err(RegionError::UnsupportedChord),
            })
        }
        _ => Err(RegionError::UnsupportedChord),
    }
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Curvature of a graph y = f(x) from f' and f''.
pub fn curvature_graph(fp: f64, fpp: f64) -> f64 {
    fpp.abs() / (1.0 + fp * fp).powf(1.5)
}

/// Curvature of a parametric curve from first and second derivatives.
pub fn curvature_parametric(xd: f64, yd: f64, xdd: f64, ydd: f64) -> f64 {
    (xd * ydd - yd * xdd).abs() / (xd * xd + yd * yd).powf(1.5)
}

/// Curvature of the ellipse (a cos t, b sin t) at parameter t.
pub fn curvature_ellipse(a: f64, b: f64, t: f64) -> f64 {
    a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5)
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub satisfied: bool,
    pub kind: String,
    pub notes: Vec<String>,
}

/// Check the hypotheses under which a region's indicator flow is known to
/// stay at bounded distance from its mean: polygons need no edge parallel
/// to the flow; ellipses have positive curvature; dome bands are certified
/// as a difference of two positive-curvature convex bodies via an explicit
/// circle width function witness.
pub fn check_brs_hypotheses(region: &Region, alpha: &QuadNum) -> HypothesisReport {
    let mut notes = Vec::new();
    match region {
        Region::Polygon { vertices } => {
            if region.check_in_unit_square().is_err() {
                return HypothesisReport {
                    satisfied: false,
                    kind: "polygon".into(),
                    notes: vec!["not contained in the unit square".into()],
                };
            }
            let n = vertices.len();
            for i in 0..n {
                let j = (i + 1) % n;
                let dy = &vertices[j].1 - &vertices[i].1;
                let dx = &vertices[j].0 - &vertices[i].0;
                if (&dy - &(alpha * &dx)).is_zero() {
                    return HypothesisReport {
                        satisfied: false,
                        kind: "polygon".into(),
                        notes: vec![format!("edge {i} is parallel to the flow direction")],
                    };
                }
            }
            notes.push("no edge parallel to the flow (exact check)".into());
            HypothesisReport { satisfied: true, kind: "polygon".into(), notes }
        }
        Region::Ellipse { rx, ry, .. } => {
            let ok = rx.sign() > 0 && ry.sign() > 0 && region.check_in_unit_square().is_ok();
            if ok {
                let a = rx.to_f64(53);
                let b = ry.to_f64(53);
                let kmin = (a.min(b)) / (a.max(b)).powi(2);
                notes.push(format!("positive curvature, min {kmin:.6}"));
            }
            HypothesisReport { satisfied: ok, kind: "ellipse".into(), notes }
        }
        Region::ShearedGraph { profile, rescale, .. }
        | Region::VerticalGraph { profile, rescale, .. } => match profile {
            WeightFn::C2Dome { lo, hi, .. } => {
                let cp = rescale.to_f64().unwrap();
                let l = (hi - lo).to_f64(53);
                // Witness: c1 * (circle width) - c' * h must be a width
                // function of a convex set, i.e. nonnegative and concave.
                // R = 3L/5 exceeds the half-support L/2, and c1 matches the
                // flattest part of the circle against sup|h''|.
                let r = 0.6 * l;
                let h2 = profile.second_derivative_sup().unwrap().to_f64(53) * cp;
                let c1 = r * (h2 + 1.0) / 2.0;
                let hf = profile.to_f64_fn();
                let mid = (lo.to_f64(53) + hi.to_f64(53)) / 2.0;
                let circle = |u: f64| {
                    if u.abs() >= r {
                        0.0
                    } else {
                        2.0 * (r * r - u * u).sqrt()
                    }
                };
                let g = |u: f64| c1 * circle(u) - cp * hf(mid + u);
                let n = 10_000;
                let step = 2.0 * r / n as f64;
                let mut ok = true;
                for i in 1..n {
                    let u = -r + i as f64 * step;
                    let val = g(u);
                    if val < -1e-9 {
                        ok = false;
                        break;
                    }
                    if i + 1 < n {
                        let dd = g(u + step) - 2.0 * val + g(u - step);
                        if dd > 1e-9 {
                            ok = false;
                            break;
                        }
                    }
                }
                notes.push(format!(
                    "difference witness: R = {r:.4}, c1 = {c1:.4}, sampled concavity on {n} points"
                ));
                HypothesisReport { satisfied: ok, kind: "dome band".into(), notes }
            }
            _ => {
                // Piecewise-linear bands reduce to polygons.
                let ok = matches!(profile, WeightFn::PiecewiseLinear { .. });
                notes.push("piecewise-linear band; treat as polygon".into());
                HypothesisReport { satisfied: ok, kind: "band".into(), notes }
            }
        },
    }
}
