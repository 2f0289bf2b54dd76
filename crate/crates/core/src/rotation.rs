//! Toral rotations and the linear flow on the 2-torus: exact orbit
//! bookkeeping, discrepancy (deficiency) of discrete rotations, Kesten's
//! lattice criterion for intervals, and the exact distributional error
//! Delta_t of a region under the flow (1, alpha).

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::exactnum::{QuadNum, Rational};
use crate::weights::{Region, RegionError};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum RotationError {
    #[error("interval must satisfy 0 <= lo < hi <= 1")]
    BadInterval,
    #[error("slope must be positive")]
    BadSlope,
    #[error("region error: {0}")]
    Region(#[from] RegionError),
}

/// Deficiency of the first n rotation points: #{k < n : {x0 + k*alpha} in
/// [lo, hi)} - n*(hi - lo), exact in the field.
pub fn discrete_deficiency(
    alpha: &QuadNum,
    lo: &QuadNum,
    hi: &QuadNum,
    x0: &QuadNum,
    n: u64,
) -> Result<QuadNum, RotationError> {
    let d = alpha.d();
    let zero = QuadNum::zero(d);
    let one = QuadNum::one(d);
    if (lo - &zero).sign() < 0
        || (hi - lo).sign() <= 0
        || (&one - hi).sign() < 0
    {
        return Err(RotationError::BadInterval);
    }
    let mut count: i64 = 0;
    let mut x = x0.fract();
    for _ in 0..n {
        if (&x - lo).sign() >= 0 && (hi - &x).sign() > 0 {
            count += 1;
        }
        x = (&x + alpha).fract();
    }
    let len = hi - lo;
    let nq = QuadNum::from_int(d, n as i64);
    Ok(&QuadNum::from_int(d, count) - &(&nq * &len))
}

/// Kesten's criterion: an interval of length L has bounded deficiency under
/// rotation by alpha iff L = m + n*alpha for integers m, n.
#[derive(Debug, Clone, PartialEq)]
pub struct KestenResult {
    pub in_lattice: bool,
    pub m: Option<BigInt>,
    pub n: Option<BigInt>,
}

pub fn kesten_test(length: &QuadNum, alpha: &QuadNum) -> KestenResult {
    assert!(!alpha.is_rational(), "rotation number must be irrational");
    // length = m + n*alpha forces n = b_L / b_alpha in the field basis.
    let n_rat = length.irr_part() / alpha.irr_part();
    if !n_rat.is_integer() {
        return KestenResult { in_lattice: false, m: None, n: None };
    }
    let m_rat = length.rat_part() - &n_rat * alpha.rat_part();
    if !m_rat.is_integer() {
        return KestenResult { in_lattice: false, m: None, n: None };
    }
    KestenResult {
        in_lattice: true,
        m: Some(m_rat.to_integer()),
        n: Some(n_rat.to_integer()),
    }
}

/// A maximal flow segment inside one unit cell: for s in [start, end) the
/// orbit (x1 + s, x2 + alpha*s) stays in the cell with corner `cell`.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    pub start: QuadNum,
    pub end: QuadNum,
    pub cell: (i64, i64),
}

/// Split [0, t_max) at every horizontal and vertical wrap of the flow.
pub fn orbit_segments(
    alpha: &QuadNum,
    x: (&QuadNum, &QuadNum),
    t_max: &QuadNum,
) -> Result<Vec<OrbitSegment>, RotationError> {
    if alpha.sign() <= 0 {
        return Err(RotationError::BadSlope);
    }
    let d = alpha.d();
    let zero = QuadNum::zero(d);
    assert!((t_max - &zero).sign() > 0);
    // Event times: s = k - x1 (horizontal) and s = (k - x2)/alpha (vertical).
    let mut events: Vec<QuadNum> = vec![zero.clone()];
    let k_lo = (x.0 + &zero).floor_int();
    let k_hi = (x.0 + t_max).floor_int();
    let mut k = k_lo.clone();
    while k <= k_hi {
        let s = &QuadNum::from_rational(d, Rational::from_integer(k.clone())) - x.0;
        if s.sign() > 0 && (&s - t_max).sign() < 0 {
            events.push(s);
        }
        k += 1;
    }
    let y_end = x.1 + &(alpha * t_max);
    let k_lo = x.1.floor_int();
    let k_hi = y_end.floor_int();
    let mut k = k_lo;
    while k <= k_hi {
        let s = (&QuadNum::from_rational(d, Rational::from_integer(k.clone())) - x.1)
            .try_div(alpha)
            .unwrap();
        if s.sign() > 0 && (&s - t_max).sign() < 0 {
            events.push(s);
        }
        k += 1;
    }
    events.push(t_max.clone());
    events.sort_by(|a, b| a.cmp_exact(b));
    events.dedup();
    let half = QuadNum::from_rational(d, Rational::new(1.into(), 2.into()));
    let mut out = Vec::with_capacity(events.len() - 1);
    for w in events.windows(2) {
        let mid = &(&w[0] + &w[1]) * &half;
        let cx = (x.0 + &mid).floor_int().to_i64().expect("cell index overflow");
        let cy = (x.1 + &(alpha * &mid)).floor_int().to_i64().expect("cell index overflow");
        out.push(OrbitSegment { start: w[0].clone(), end: w[1].clone(), cell: (cx, cy) });
    }
    Ok(out)
}

fn overlap(a: &(QuadNum, QuadNum), b: &(QuadNum, QuadNum)) -> QuadNum {
    let lo = a.0.clone().max_exact(b.0.clone());
    let hi = a.1.clone().min_exact(b.1.clone());
    let len = &hi - &lo;
    if len.sign() > 0 {
        len
    } else {
        QuadNum::zero(a.0.d())
    }
}

/// Time spent in the region by the flow started at x over [0, t), exact.
///
/// Works cell by cell: while the first coordinate crosses [j, j+1), the
/// orbit traces the line u -> (u, zeta_j + alpha*u) wrapped vertically, and
/// the time inside the region is the total overlap of the region's chords
/// with the traversed u-interval.
pub fn occupation_time(
    region: &Region,
    alpha: &QuadNum,
    x: (&QuadNum, &QuadNum),
    t: &QuadNum,
) -> Result<QuadNum, RotationError> {
    if alpha.sign() <= 0 {
        return Err(RotationError::BadSlope);
    }
    let d = alpha.d();
    let zero = QuadNum::zero(d);
    let one = QuadNum::one(d);
    if t.sign() == 0 {
        return Ok(zero);
    }
    assert!(t.sign() > 0, "time must be nonnegative");
    let j_lo = x.0.floor_int().to_i64().expect("range overflow");
    let j_hi = (x.0 + t).floor_int().to_i64().expect("range overflow");
    let mut acc = zero.clone();
    for j in j_lo..=j_hi {
        let jq = QuadNum::from_int(d, j);
        // s-range within this cell: [max(0, j - x1), min(t, j+1 - x1)).
        let s0 = zero.clone().max_exact(&jq - x.0);
        let s1 = t.clone().min_exact(&(&jq + &one) - x.0);
        if (&s1 - &s0).sign() <= 0 {
            continue;
        }
        let u0 = &(x.0 + &s0) - &jq;
        let u1 = &(x.0 + &s1) - &jq;
        // zeta_j = x2 + alpha*(j - x1); the visited offsets are zeta_j - k.
        let zeta_j = x.1 + &(alpha * &(&jq - x.0));
        // k with zeta_j - k in (-alpha, 1): k in (zeta_j - 1, zeta_j + alpha).
        let k_lo = (&zeta_j - &one).floor_int();
        let k_hi = (&zeta_j + alpha).floor_int();
        let mut k = k_lo;
        while k <= k_hi {
            let z = &zeta_j - &QuadNum::from_rational(d, Rational::from_integer(k.clone()));
            if let Some(ch) = region.chord(alpha, &z)? {
                acc = &acc + &overlap(&ch, &(u0.clone(), u1.clone()));
            }
            k += 1;
        }
    }
    Ok(acc)
}

/// Distributional error Delta_t = occupation time - t * area(region), exact
/// for regions with exact chords and areas.
pub fn delta_t(
    region: &Region,
    alpha: &QuadNum,
    x: (&QuadNum, &QuadNum),
    t: &QuadNum,
) -> Result<QuadNum, RotationError> {
    let occ = occupation_time(region, alpha, x, t)?;
    let area = region
        .area_exact()
        .ok_or(RegionError::UnsupportedChord)?;
    Ok(&occ - &(t * &area))
}

#[derive(Debug, Clone)]
pub struct ScanCheckpoint {
    pub t: QuadNum,
    pub delta: QuadNum,
    pub running_sup: QuadNum,
}

#[derive(Debug, Clone)]
pub struct DeltaScan {
    /// sup |Delta_t| over [0, t_max], attained at a flow event.
    pub sup_abs: QuadNum,
    pub argmax: QuadNum,
    pub checkpoints: Vec<ScanCheckpoint>,
    pub events: usize,
}

/// Exact supremum of |Delta_t| over [0, t_max]. Delta is piecewise linear
/// in t with breakpoints exactly where the orbit crosses a chord endpoint
/// or a cell wall, so the sup is attained on the event set.
pub fn delta_sup_scan(
    region: &Region,
    alpha: &QuadNum,
    x: (&QuadNum, &QuadNum),
    t_max: &QuadNum,
    checkpoints: &[QuadNum],
) -> Result<DeltaScan, RotationError> {
    if alpha.sign() <= 0 {
        return Err(RotationError::BadSlope);
    }
    let d = alpha.d();
    let zero = QuadNum::zero(d);
    let one = QuadNum::one(d);
    let area = region.area_exact().ok_or(RegionError::UnsupportedChord)?;

    // Gather event times: cell walls plus chord-endpoint crossings.
    let mut events: Vec<QuadNum> = vec![zero.clone(), t_max.clone()];
    let j_lo = x.0.floor_int().to_i64().expect("range overflow");
    let j_hi = (x.0 + t_max).floor_int().to_i64().expect("range overflow");
    for j in j_lo..=j_hi {
        let jq = QuadNum::from_int(d, j);
        let s_wall = &jq - x.0;
        if s_wall.sign() > 0 && (&s_wall - t_max).sign() < 0 {
            events.push(s_wall);
        }
        let zeta_j = x.1 + &(alpha * &(&jq - x.0));
        let k_lo = (&zeta_j - &one).floor_int();
        let k_hi = (&zeta_j + alpha).floor_int();
        let mut k = k_lo;
        while k <= k_hi {
            let z = &zeta_j - &QuadNum::from_rational(d, Rational::from_integer(k.clone()));
            if let Some((clo, chi)) = region.chord(alpha, &z)? {
                for u in [clo, chi] {
                    if u.sign() >= 0 && (&u - &one).sign() <= 0 {
                        let s = &(&jq + &u) - x.0;
                        if s.sign() > 0 && (&s - t_max).sign() < 0 {
                            events.push(s);
                        }
                    }
                }
            }
            k += 1;
        }
    }
    let mut cps: Vec<QuadNum> = checkpoints.to_vec();
    cps.sort_by(|a, b| a.cmp_exact(b));
    events.extend(cps.iter().cloned());
    events.sort_by(|a, b| a.cmp_exact(b));
    events.dedup();

    // Walk the events accumulating the occupation time incrementally.
    let mut occ = zero.clone();
    let mut sup = zero.clone();
    let mut argmax = zero.clone();
    let mut out_cps: Vec<ScanCheckpoint> = Vec::new();
    let mut cp_iter = cps.iter().peekable();
    let mut prev = zero.clone();
    for e in events.iter().skip(1) {
        let step = occupation_time_between(region, alpha, x, &prev, e)?;
        occ = &occ + &step;
        let delta = &occ - &(e * &area);
        let a = delta.abs();
        if (&a - &sup).sign() > 0 {
            sup = a;
            argmax = e.clone();
        }
        while let Some(cp) = cp_iter.peek() {
            if (*cp - e).sign() <= 0 {
                if *cp == e {
                    out_cps.push(ScanCheckpoint {
                        t: e.clone(),
                        delta: delta.clone(),
                        running_sup: sup.clone(),
                    });
                }
                cp_iter.next();
            } else {
                break;
            }
        }
        prev = e.clone();
    }
    Ok(DeltaScan { sup_abs: sup, argmax, checkpoints: out_cps, events: events.len() })
}

fn occupation_time_between(
    region: &Region,
    alpha: &QuadNum,
    x: (&QuadNum, &QuadNum),
    s0: &QuadNum,
    s1: &QuadNum,
) -> Result<QuadNum, RotationError> {
    // Occupation over [s0, s1) = occupation from the advanced start point.
    let x1 = x.0 + s0;
    let x2 = x.1 + &(alpha * s0);
    let dt = s1 - s0;
    occupation_time(region, alpha, (&x1, &x2), &dt)
}
