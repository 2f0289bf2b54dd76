//! Bounded-distance laboratory: weighted Dirac combs realized from
//! cut-and-project schemes, defect profiles against their mean density,
//! sup-over-intervals comparison of measures, the exact correspondence
//! between weighted combs and occupation times of a sheared region under
//! the torus flow, and a pipeline chaining all the certificates.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::cfrac::{cf_expand, gl_condition, CfError};
use crate::exactnum::{QuadNum, Rational};
use crate::rotation::{kesten_test, occupation_time, RotationError};
use crate::scheme::{quad_normalize, Scheme, SchemeError, Window};
use crate::weights::{
    check_brs_hypotheses, sheared_region_from_weight, RegionBridge, RegionError, WeightFn,
};

#[derive(Debug, Error, Clone)]
pub enum BdError {
    #[error("scheme error: {0}")]
    Scheme(#[from] SchemeError),
    #[error("region error: {0}")]
    Region(#[from] RegionError),
    #[error("rotation error: {0}")]
    Rotation(#[from] RotationError),
    #[error("continued fraction error: {0}")]
    Cfrac(#[from] CfError),
    #[error("slope must be positive after normalization")]
    BadSlope,
    #[error("comparing two purely continuous measures is not supported")]
    TwoContinuous,
    #[error("combs must share the same base interval")]
    SpanMismatch,
}

// ---------------------------------------------------------------------------
// Combs and defect profiles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Atom {
    pub position: QuadNum,
    pub mass: QuadNum,
    pub lattice: (i64, i64),
}

/// A weighted Dirac comb on an interval, with its exact mean density.
#[derive(Debug, Clone)]
pub struct CombMeasure {
    /// Sorted by position.
    pub atoms: Vec<Atom>,
    pub span: (QuadNum, QuadNum),
    pub mean: QuadNum,
}

/// Realize the weighted comb of a scheme on [lo, hi]: one atom per CPS
/// point, with mass h(internal coordinate). Zero-mass atoms are dropped.
pub fn realize_comb(
    s: &Scheme,
    weight: Option<&WeightFn>,
    lo: &QuadNum,
    hi: &QuadNum,
) -> CombMeasure {
    let pts = s.enumerate_points(lo, hi);
    let mut atoms = Vec::with_capacity(pts.len());
    for p in pts {
        let mass = match weight {
            None => QuadNum::one(s.d),
            Some(h) => h.eval(&p.internal),
        };
        if !mass.is_zero() {
            atoms.push(Atom { position: p.direct, mass, lattice: p.lattice_coords });
        }
    }
    CombMeasure { atoms, span: (lo.clone(), hi.clone()), mean: s.density(weight) }
}

impl CombMeasure {
    /// Total mass of atoms with position <= t (or < t when `strict`).
    pub fn cdf(&self, t: &QuadNum, strict: bool) -> QuadNum {
        let d = self.span.0.d();
        let mut acc = QuadNum::zero(d);
        for a in &self.atoms {
            let s = (&a.position - t).sign();
            if s < 0 || (!strict && s == 0) {
                acc = &acc + &a.mass;
            } else if s > 0 {
                break;
            }
        }
        acc
    }

    pub fn total_mass(&self) -> QuadNum {
        let d = self.span.0.d();
        self.atoms
            .iter()
            .fold(QuadNum::zero(d), |acc, a| &acc + &a.mass)
    }
}

/// Signed linear combination of combs over the same base interval.
pub fn linear_combination(
    parts: &[(Rational, &CombMeasure)],
) -> Result<CombMeasure, BdError> {
    assert!(!parts.is_empty());
    let span = parts[0].1.span.clone();
    let d = span.0.d();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut mean = QuadNum::zero(d);
    for (c, comb) in parts {
        if comb.span != span {
            return Err(BdError::SpanMismatch);
        }
        let cq = QuadNum::from_rational(d, c.clone());
        mean = &mean + &(&cq * &comb.mean);
        for a in &comb.atoms {
            atoms.push(Atom {
                position: a.position.clone(),
                mass: &cq * &a.mass,
                lattice: a.lattice,
            });
        }
    }
    atoms.sort_by(|a, b| a.position.cmp_exact(&b.position));
    // Merge coincident atoms and drop exact cancellations.
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        if let Some(last) = merged.last_mut() {
            if last.position == a.position {
                last.mass = &last.mass + &a.mass;
                continue;
            }
        }
        merged.push(a);
    }
    merged.retain(|a| !a.mass.is_zero());
    Ok(CombMeasure { atoms: merged, span, mean })
}

#[derive(Debug, Clone)]
pub struct DefectProfile {
    /// F(t) = comb([span.0, t]) - mean * (t - span.0).
    pub sup: QuadNum,
    pub inf: QuadNum,
    pub max_abs: QuadNum,
    pub final_value: QuadNum,
    pub atom_count: usize,
    pub checkpoints: Vec<(QuadNum, QuadNum)>,
}

/// Exact event-driven defect of a comb against its mean: F jumps by the
/// atom mass and decreases linearly in between, so the extrema live at the
/// jump times and the interval ends.
pub fn defect_profile(comb: &CombMeasure, checkpoints: &[QuadNum]) -> DefectProfile {
    let d = comb.span.0.d();
    let zero = QuadNum::zero(d);
    let mut sup = zero.clone();
    let mut inf = zero.clone();
    let mut acc = zero.clone(); // running atom mass
    let mut cps: Vec<QuadNum> = checkpoints.to_vec();
    cps.sort_by(|a, b| a.cmp_exact(b));
    let mut cp_out: Vec<(QuadNum, QuadNum)> = Vec::new();
    let mut cp_i = 0usize;
    let f_at = |acc: &QuadNum, t: &QuadNum| -> QuadNum {
        acc - &(&comb.mean * &(t - &comb.span.0))
    };
    for a in &comb.atoms {
        // Checkpoints strictly before this atom use the current mass.
        while cp_i < cps.len() && (&cps[cp_i] - &a.position).sign() < 0 {
            cp_out.push((cps[cp_i].clone(), f_at(&acc, &cps[cp_i])));
            cp_i += 1;
        }
        let before = f_at(&acc, &a.position);
        if (&before - &inf).sign() < 0 {
            inf = before;
        }
        acc = &acc + &a.mass;
        let after = f_at(&acc, &a.position);
        if (&after - &sup).sign() > 0 {
            sup = after.clone();
        }
        if (&after - &inf).sign() < 0 {
            inf = after;
        }
    }
    while cp_i < cps.len() {
        cp_out.push((cps[cp_i].clone(), f_at(&acc, &cps[cp_i])));
        cp_i += 1;
    }
    let final_value = f_at(&acc, &comb.span.1);
    if (&final_value - &inf).sign() < 0 {
        inf = final_value.clone();
    }
    if (&final_value - &sup).sign() > 0 {
        sup = final_value.clone();
    }
    let max_abs = sup.clone().abs().max_exact(inf.clone().abs());
    DefectProfile {
        sup,
        inf,
        max_abs,
        final_value,
        atom_count: comb.atoms.len(),
        checkpoints: cp_out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// Classify (T, sup|F| over [0,T]) samples: a plateau (growth factor at
/// most 1.2 from the first to the last sample) reads as bounded; a gain of
/// at least +1 across two decades reads as unbounded.
pub fn classify_defect(samples: &[(f64, f64)]) -> Verdict {
    if samples.len() < 2 {
        return Verdict::Inconclusive;
    }
    let (t0, s0) = samples[0];
    let (t1, s1) = samples[samples.len() - 1];
    if t1 < 10.0 * t0 {
        return Verdict::Inconclusive;
    }
    if s1 <= 1.2 * s0 {
        Verdict::Bounded
    } else if s1 >= s0 + 1.0 && t1 >= 100.0 * t0 {
        Verdict::Unbounded
    } else {
        Verdict::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Measure comparison
// ---------------------------------------------------------------------------

/// A measure on [0, t_max] for interval comparison: a comb, a multiple of
/// Lebesgue measure, or a periodically repeated density profile.
#[derive(Debug, Clone)]
pub enum Measure {
    Comb(CombMeasure),
    Lebesgue { density: QuadNum },
    Periodic { profile: WeightFn, period: QuadNum },
}

impl Measure {
    fn d(&self) -> u64 {
        match self {
            Measure::Comb(c) => c.span.0.d(),
            Measure::Lebesgue { density } => density.d(),
            Measure::Periodic { period, .. } => period.d(),
        }
    }

    fn is_continuous(&self) -> bool {
        !matches!(self, Measure::Comb(_))
    }

    /// Measure of [0, t] (atoms at t included unless `strict`).
    pub fn cdf(&self, t: &QuadNum, strict: bool) -> QuadNum {
        match self {
            Measure::Comb(c) => c.cdf(t, strict),
            Measure::Lebesgue { density } => density * t,
            Measure::Periodic { profile, period } => {
                let d = period.d();
                if t.sign() <= 0 {
                    return QuadNum::zero(d);
                }
                let k = t.try_div(period).unwrap().floor_int();
                let kq = QuadNum::from_rational(d, Rational::from_integer(k));
                let rem = t - &(&kq * period);
                &(&kq * &profile.integral()) + &profile.integral_to(&rem)
            }
        }
    }

    /// Times in (0, t_max) where the local structure changes.
    fn events(&self, t_max: &QuadNum) -> Vec<QuadNum> {
        match self {
            Measure::Comb(c) => c
                .atoms
                .iter()
                .map(|a| a.position.clone())
                .filter(|p| p.sign() > 0 && (p - t_max).sign() < 0)
                .collect(),
            Measure::Lebesgue { .. } => Vec::new(),
            Measure::Periodic { profile, period } => {
                let d = period.d();
                let mut out = Vec::new();
                let mut base = QuadNum::zero(d);
                'outer: loop {
                    for b in profile.breakpoints() {
                        let t = &base + &b;
                        if (&t - t_max).sign() >= 0 {
                            break 'outer;
                        }
                        if t.sign() > 0 {
                            out.push(t);
                        }
                    }
                    base = &base + period;
                    if (&base - t_max).sign() >= 0 {
                        break;
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    /// sup over closed intervals [a,b] in [0, t_max] of |mu([a,b]) - nu([a,b])|.
    pub sup_interval: QuadNum,
    pub events: usize,
    /// Largest value found over the seeded random intervals (a lower
    /// witness; always <= sup_interval).
    pub random_max: QuadNum,
}

/// Exact sup-over-intervals distance of two measures on [0, t_max], via the
/// sup - inf reduction of the running difference G(t) = mu([0,t]) - nu([0,t]).
/// G is monotone between events as long as at most one side is continuous,
/// so the extrema live on the event set (one-sided limits included).
pub fn bd_compare(
    mu: &Measure,
    nu: &Measure,
    t_max: &QuadNum,
    n_random: usize,
    seed: u64,
) -> Result<CompareReport, BdError> {
    if mu.is_continuous() && nu.is_continuous() {
        return Err(BdError::TwoContinuous);
    }
    let d = mu.d();
    let zero = QuadNum::zero(d);
    let mut events = mu.events(t_max);
    events.extend(nu.events(t_max));
    events.push(t_max.clone());
    events.sort_by(|a, b| a.cmp_exact(b));
    events.dedup();

    let g = |t: &QuadNum, strict: bool| -> QuadNum {
        &mu.cdf(t, strict) - &nu.cdf(t, strict)
    };
    let mut vmax = zero.clone();
    let mut vmin = zero.clone();
    for e in &events {
        for strict in [true, false] {
            let v = g(e, strict);
            if (&v - &vmax).sign() > 0 {
                vmax = v.clone();
            }
            if (&v - &vmin).sign() < 0 {
                vmin = v;
            }
        }
    }
    let sup_interval = &vmax - &vmin;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut random_max = zero.clone();
    let denom = 1i64 << 20;
    for _ in 0..n_random {
        let mut a = Rational::new(rng.gen_range(0..=denom).into(), denom.into());
        let mut b = Rational::new(rng.gen_range(0..=denom).into(), denom.into());
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let aq = &QuadNum::from_rational(d, a) * t_max;
        let bq = &QuadNum::from_rational(d, b) * t_max;
        let v = (&g(&bq, false) - &g(&aq, true)).abs();
        debug_assert!((&v - &sup_interval).sign() <= 0);
        if (&v - &random_max).sign() > 0 {
            random_max = v;
        }
    }
    Ok(CompareReport { sup_interval, events: events.len(), random_max })
}

// ---------------------------------------------------------------------------
// Weighted comb <-> torus flow bridge
// ---------------------------------------------------------------------------

/// One integer-lattice piece of the correspondence: a Z^2 scheme, the
/// transported weight on its internal coordinate, the sheared region whose
/// chords reproduce the weight, and the flow start point aligned so the
/// occupation time of cell j equals the comb mass of lattice column m = -j.
#[derive(Debug, Clone)]
pub struct BrsPart {
    pub scheme: Scheme,
    pub weight: WeightFn,
    pub bridge: RegionBridge,
    pub alpha: QuadNum,
    pub start: (QuadNum, QuadNum),
    /// original direct coordinate = direct_scale * part direct coordinate
    /// (exact whenever the normalization admits the affine correspondence).
    pub direct_scale: Option<QuadNum>,
}

#[derive(Debug, Clone)]
pub struct BrsSetup {
    pub parts: Vec<BrsPart>,
    /// Number of splits per axis (parts.len() = split_n^2).
    pub split_n: u32,
    pub normalized: bool,
}

fn identity_basis(s: &Scheme) -> bool {
    let one = QuadNum::one(s.d);
    let zero = QuadNum::zero(s.d);
    s.basis[0] == [one.clone(), zero.clone()] && s.basis[1] == [zero, one]
}

/// Set up the comb <-> flow correspondence for a scheme and weight:
/// normalize substitution lattices to Z^2 (transporting the weight through
/// the internal coordinate change), split until the weight support fits the
/// admissible offset range of length 1 + alpha, and build the sheared
/// region for each part.
pub fn wcps_to_brs(
    s: &Scheme,
    weight: &WeightFn,
    c_requested: Rational,
) -> Result<BrsSetup, BdError> {
    let d = s.d;
    let one = QuadNum::one(d);
    let (base, h, normalized, affine) = if identity_basis(s) {
        (s.clone(), weight.clone(), false, Some(one.clone()))
    } else {
        let norm = quad_normalize(s)?;
        let h = weight.scale_arg(&norm.internal_scale);
        (norm.scheme, h, true, norm.affine_scale)
    };
    let alpha = base.slope.clone();
    if alpha.sign() <= 0 {
        return Err(BdError::BadSlope);
    }

    // Choose the split factor: support/n must fit in (-alpha, 1).
    let (slo, shi) = h.support();
    let len = &shi - &slo;
    let range = &one + &alpha;
    let mut n: u32 = 1;
    loop {
        let nq = QuadNum::from_int(d, n as i64);
        if (&len - &(&nq * &range)).sign() <= 0 {
            break;
        }
        n += 1;
    }

    let mut parts = Vec::new();
    if n == 1 {
        parts.push(make_part(&base, &h, &alpha, &c_requested, affine.clone())?);
    } else {
        let inv_n = one
            .try_div(&QuadNum::from_int(d, n as i64))
            .expect("n > 0");
        for sub in base.split(n)? {
            // Rescale the sublattice n*Z^2 + (k,l) by 1/n back to Z^2 with a
            // fractional translate; internal coordinates scale by 1/n too.
            let window = Window::new(
                &sub.window.lo * &inv_n,
                &sub.window.hi * &inv_n,
                sub.window.convention,
            )?;
            let part_scheme = Scheme::build(
                d,
                [[one.clone(), QuadNum::zero(d)], [QuadNum::zero(d), one.clone()]],
                [&sub.translate[0] * &inv_n, &sub.translate[1] * &inv_n],
                alpha.clone(),
                window,
                sub.axes,
            )?;
            let part_weight = h.scale_arg(&inv_n);
            let part_affine = affine
                .as_ref()
                .map(|a| a * &QuadNum::from_int(d, n as i64));
            parts.push(make_part(&part_scheme, &part_weight, &alpha, &c_requested, part_affine)?);
        }
    }
    Ok(BrsSetup { parts, split_n: n, normalized })
}

fn make_part(
    scheme: &Scheme,
    weight: &WeightFn,
    alpha: &QuadNum,
    c_requested: &Rational,
    direct_scale: Option<QuadNum>,
) -> Result<BrsPart, BdError> {
    let bridge = sheared_region_from_weight(weight, alpha, c_requested.clone())?;
    // Flow start (0, offset + ty - alpha*tx) pairs cell j with column m = -j.
    let x2 = &(&bridge.offset + &scheme.translate[1]) - &(alpha * &scheme.translate[0]);
    let zero = QuadNum::zero(alpha.d());
    Ok(BrsPart {
        scheme: scheme.clone(),
        weight: weight.clone(),
        bridge,
        alpha: alpha.clone(),
        start: (zero, x2),
        direct_scale,
    })
}

/// Comb mass of lattice columns m = 0, -1, ..., -(t_cells - 1): the sum of
/// h over the window hits in those columns, scaled by the region rescale.
fn column_sum(part: &BrsPart, t_cells: u32) -> QuadNum {
    let d = part.alpha.d();
    let mut acc = QuadNum::zero(d);
    let (slo, shi) = part.weight.support();
    for j in 0..t_cells as i64 {
        let m = -j;
        // z = z0 - alpha*m + n; n runs over [slo + alpha*m - z0, shi + ...].
        let mq = QuadNum::from_int(d, m);
        let z0 = &part.scheme.translate[1] - &(&part.alpha * &part.scheme.translate[0]);
        let base = &z0 - &(&part.alpha * &mq);
        let n_lo = (&slo - &base).floor_int().to_i64().unwrap();
        let n_hi = (&shi - &base).floor_int().to_i64().unwrap() + 1;
        for n in n_lo..=n_hi {
            let z = &base + &QuadNum::from_int(d, n);
            acc = &acc + &part.weight.eval(&z);
        }
    }
    let c = QuadNum::from_rational(d, part.bridge.rescale.clone());
    &acc * &c
}

#[derive(Debug, Clone)]
pub struct BridgeCheck {
    pub exact: bool,
    pub flow_side: QuadNum,
    pub comb_side: QuadNum,
    pub f64_gap: f64,
}

/// Verify the identity: the occupation time of the region over t_cells unit
/// cells of the flow equals the rescaled comb mass of the matching lattice
/// columns. Exact for both weight families; also reports the f64 gap.
pub fn bridge_identity_check(part: &BrsPart, t_cells: u32) -> Result<BridgeCheck, BdError> {
    let d = part.alpha.d();
    let t = QuadNum::from_int(d, t_cells as i64);
    let flow = occupation_time(
        &part.bridge.region,
        &part.alpha,
        (&part.start.0, &part.start.1),
        &t,
    )?;
    let comb = column_sum(part, t_cells);
    let exact = flow == comb;
    let f64_gap = (flow.to_f64(64) - comb.to_f64(64)).abs();
    Ok(BridgeCheck { exact, flow_side: flow, comb_side: comb, f64_gap })
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GlSummary {
    pub converged: bool,
    pub last_partial_sum: f64,
    pub bounded_quotients: bool,
    pub max_quotient: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectSample {
    pub t: f64,
    pub sup_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub normalized: bool,
    pub split_n: u32,
    pub slope: String,
    pub slope_f64: f64,
    pub window_length: String,
    pub kesten_in_lattice: bool,
    pub gl: GlSummary,
    pub region_kind: String,
    pub region_area: f64,
    pub rescale: String,
    pub hypotheses_satisfied: bool,
    pub hypothesis_notes: Vec<String>,
    pub bridge_exact: bool,
    pub bridge_cells_checked: u32,
    pub defect_samples: Vec<DefectSample>,
    pub verdict: Verdict,
}

/// Run the full certificate chain for a scheme and weight: normalize,
/// expand the slope's continued fraction and test the admissibility sums,
/// build the region, check its hypotheses, verify the exact bridge on the
/// first cells, and measure the defect growth of the weighted comb.
pub fn main_theorem_pipeline(
    s: &Scheme,
    weight: Option<&WeightFn>,
    c_requested: Rational,
    t_samples: &[u32],
) -> Result<PipelineReport, BdError> {
    let d = s.d;
    // Effective weight: the window indicator when none is given.
    let h = match weight {
        Some(h) => h.clone(),
        None => WeightFn::Indicator { lo: s.window.lo.clone(), hi: s.window.hi.clone() },
    };

    // Defect growth of the comb itself (in the original coordinates).
    let mut samples = Vec::new();
    let zero = QuadNum::zero(d);
    for &t in t_samples {
        let hi = QuadNum::from_int(d, t as i64);
        let comb = realize_comb(s, weight, &zero, &hi);
        let profile = defect_profile(&comb, &[]);
        samples.push(DefectSample { t: t as f64, sup_abs: profile.max_abs.to_f64(53) });
    }
    let verdict = classify_defect(
        &samples.iter().map(|s| (s.t, s.sup_abs)).collect::<Vec<_>>(),
    );

    // Continued fraction of the slope and the admissibility sums.
    let cf = cf_expand(&s.slope)?;
    let gl = gl_condition(&cf, 200);
    let (bounded, maxq) = cf.bounded_quotients();
    let gl = GlSummary {
        converged: gl.converged,
        last_partial_sum: *gl.partial_sums.last().unwrap_or(&0.0),
        bounded_quotients: bounded,
        max_quotient: maxq.to_u64(),
    };

    let kesten = kesten_test(&s.window.length(), &s.slope);

    // Bridge setup; indicator weights have no slope bound, so fall back to
    // reporting without a region in that case.
    let setup = match &h {
        WeightFn::Indicator { .. } => None,
        _ => Some(wcps_to_brs(s, &h, c_requested.clone())?),
    };

    let (region_kind, region_area, rescale, hyp_ok, hyp_notes, bridge_exact, cells) =
        match &setup {
            Some(setup) => {
                let part = &setup.parts[0];
                let rep = check_brs_hypotheses(&part.bridge.region, &part.alpha);
                let mut exact = true;
                let cells = 25u32;
                for t in [1u32, 2, 5, 10, cells] {
                    if !bridge_identity_check(part, t)?.exact {
                        exact = false;
                    }
                }
                let kind = match &part.bridge.region {
                    crate::weights::Region::Polygon { .. } => "polygon",
                    crate::weights::Region::ShearedGraph { .. } => "sheared graph",
                    crate::weights::Region::VerticalGraph { .. } => "vertical graph",
                    crate::weights::Region::Ellipse { .. } => "ellipse",
                };
                (
                    kind.to_string(),
                    part.bridge.region.area(),
                    part.bridge.rescale.to_string(),
                    rep.satisfied,
                    rep.notes,
                    exact,
                    cells,
                )
            }
            None => (
                "none (indicator weight)".to_string(),
                0.0,
                "1".to_string(),
                kesten.in_lattice,
                vec!["interval window: lattice criterion applies directly".to_string()],
                false,
                0,
            ),
        };

    Ok(PipelineReport {
        normalized: setup.as_ref().map(|s| s.normalized).unwrap_or(false),
        split_n: setup.as_ref().map(|s| s.split_n).unwrap_or(1),
        slope: s.slope.to_string(),
        slope_f64: s.slope.to_f64(53),
        window_length: s.window.length().to_string(),
        kesten_in_lattice: kesten.in_lattice,
        gl,
        region_kind,
        region_area,
        rescale,
        hypotheses_satisfied: hyp_ok,
        hypothesis_notes: hyp_notes,
        bridge_exact,
        bridge_cells_checked: cells,
        defect_samples: samples,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    #[allow(unused_imports)]
    use num_traits::{One, Zero};
    use crate::scheme::{fibonacci_preset, FibonacciKind};
    use crate::weights::{make_c2_dome, make_hat};

    fn q(n: i64, m: i64) -> QuadNum {
        QuadNum::from_rational(5, Rational::new(n.into(), m.into()))
    }

    #[test]
    fn integer_comb_defect_is_one() {
        // Atoms at 0..=100 with mass 1 against mean density 1:
        // sup F = 1 (right after each atom), inf F = 0, sup - inf = 1.
        let atoms: Vec<Atom> = (0..=100)
            .map(|k| Atom { position: q(k, 1), mass: q(1, 1), lattice: (k as i64, 0) })
            .collect();
        let comb = CombMeasure { atoms, span: (q(0, 1), q(100, 1)), mean: q(1, 1) };
        let p = defect_profile(&comb, &[]);
        assert_eq!(p.sup, q(1, 1));
        assert_eq!(p.inf, q(0, 1));
        let mu = Measure::Comb(comb);
        let nu = Measure::Lebesgue { density: q(1, 1) };
        let rep = bd_compare(&mu, &nu, &q(100, 1), 50, 7).unwrap();
        assert_eq!(rep.sup_interval, q(1, 1));
    }

    #[test]
    fn fibonacci_defect_checkpoints() {
        let fib = fibonacci_preset(FibonacciKind::Full);
        let comb = realize_comb(&fib, None, &q(0, 1), &q(200, 1));
        let cps = [q(50, 1), q(100, 1), q(200, 1)];
        let p = defect_profile(&comb, &cps);
        assert_eq!(p.checkpoints.len(), 3);
        // Defect stays small for the full window.
        assert!(p.max_abs.to_f64(53) < 2.5);
        // bd_compare against the exact density agrees with sup - inf.
        let mu = Measure::Comb(comb);
        let nu = Measure::Lebesgue { density: fib.density(None) };
        let rep = bd_compare(&mu, &nu, &q(200, 1), 100, 3).unwrap();
        assert_eq!(rep.sup_interval, &p.sup - &p.inf);
        assert!((&rep.random_max - &rep.sup_interval).sign() <= 0);
    }

    #[test]
    fn periodic_measure_cdf() {
        // Period-1 repetition of a hat of integral 1/2.
        let h = make_hat(q(0, 1), q(1, 2), q(1, 1), Rational::one()).unwrap();
        let m = Measure::Periodic { profile: h.clone(), period: q(1, 1) };
        assert_eq!(m.cdf(&q(3, 1), false), q(3, 2));
        assert_eq!(m.cdf(&q(7, 2), false), &q(3, 2) + &h.integral_to(&q(1, 2)));
        // Against its own average it stays within one period's worth.
        let nu = Measure::Lebesgue { density: q(1, 2) };
        let comb_side = Measure::Comb(CombMeasure {
            atoms: vec![Atom { position: q(1, 2), mass: q(0, 1) + &q(1, 2), lattice: (0, 0) }],
            span: (q(0, 1), q(1, 1)),
            mean: q(1, 2),
        });
        // Periodic vs comb and periodic vs lebesgue both run; two continuous
        // sides are rejected.
        bd_compare(&m, &comb_side, &q(10, 1), 20, 1).unwrap();
        assert!(matches!(bd_compare(&m, &nu, &q(10, 1), 0, 0), Err(BdError::TwoContinuous)));
    }

    #[test]
    fn bridge_identity_fibonacci_hat() {
        let fib = fibonacci_preset(FibonacciKind::Full);
        // Hat supported on the window.
        let h = make_hat(
            fib.window.lo.clone(),
            q(1, 4),
            fib.window.hi.clone(),
            Rational::one(),
        )
        .unwrap();
        let setup = wcps_to_brs(&fib, &h, Rational::one()).unwrap();
        assert_eq!(setup.split_n, 1);
        assert!(setup.normalized);
        let part = &setup.parts[0];
        for t in [1u32, 2, 3, 5, 8, 13, 21] {
            let chk = bridge_identity_check(part, t).unwrap();
            assert!(chk.exact, "t={t}: {} vs {}", chk.flow_side, chk.comb_side);
            assert!(chk.f64_gap <= 1e-15);
        }
    }

    #[test]
    fn bridge_identity_dome() {
        let fib = fibonacci_preset(FibonacciKind::Full);
        let h = make_c2_dome(
            fib.window.lo.clone(),
            fib.window.hi.clone(),
            Rational::new(2.into(), 1.into()),
        )
        .unwrap();
        let setup = wcps_to_brs(&fib, &h, Rational::one()).unwrap();
        let part = &setup.parts[0];
        for t in [1u32, 4, 9] {
            let chk = bridge_identity_check(part, t).unwrap();
            assert!(chk.exact, "t={t}: {} vs {}", chk.flow_side, chk.comb_side);
        }
    }

    #[test]
    fn split_bridge_still_exact() {
        // Force a split by using a window wider than 1 + alpha on Z^2.
        let tau = QuadNum::tau();
        let wlo = q(-3, 1);
        let whi = q(3, 1);
        let s = crate::scheme::integer_lattice_scheme(
            5,
            tau.clone(),
            Window::new(wlo.clone(), whi.clone(), crate::scheme::Convention::HalfOpenRight)
                .unwrap(),
        )
        .unwrap();
        let h = make_hat(wlo, q(0, 1), whi, Rational::one()).unwrap();
        let setup = wcps_to_brs(&s, &h, Rational::one()).unwrap();
        assert!(setup.split_n >= 2);
        assert_eq!(setup.parts.len(), (setup.split_n * setup.split_n) as usize);
        for part in &setup.parts {
            for t in [1u32, 3, 7] {
                let chk = bridge_identity_check(part, t).unwrap();
                assert!(chk.exact, "t={t}: {} vs {}", chk.flow_side, chk.comb_side);
            }
        }
    }

    #[test]
    fn linear_combination_defect() {
        let fib = fibonacci_preset(FibonacciKind::Full);
        let lo = q(0, 1);
        let hi = q(100, 1);
        let h = make_hat(fib.window.lo.clone(), q(0, 1), fib.window.hi.clone(), Rational::one())
            .unwrap();
        let c1 = realize_comb(&fib, None, &lo, &hi);
        let c2 = realize_comb(&fib, Some(&h), &lo, &hi);
        let combo = linear_combination(&[
            (Rational::new(2.into(), 1.into()), &c1),
            (Rational::new((-3).into(), 1.into()), &c2),
        ])
        .unwrap();
        // Mean combines linearly.
        let two = q(2, 1);
        let three = q(3, 1);
        assert_eq!(combo.mean, &(&two * &c1.mean) - &(&three * &c2.mean));
        // Defect is dominated by the same combination of the parts' bounds.
        let p = defect_profile(&combo, &[]);
        let p1 = defect_profile(&c1, &[]);
        let p2 = defect_profile(&c2, &[]);
        let bound = &(&two * &p1.max_abs) + &(&three * &p2.max_abs);
        assert!((&p.max_abs - &bound).sign() <= 0);
        // Total mass is the linear combination of the masses.
        assert_eq!(
            combo.total_mass(),
            &(&two * &c1.total_mass()) - &(&three * &c2.total_mass())
        );
    }

    #[test]
    fn kesten_dichotomy_matches_growth() {
        // Half window: not in the lattice, defect grows; full window: in the
        // lattice, defect plateaus.
        let full = fibonacci_preset(FibonacciKind::Full);
        let half = fibonacci_preset(FibonacciKind::Half);
        assert!(kesten_test(&full.window.length(), &full.slope).in_lattice);
        assert!(!kesten_test(&half.window.length(), &half.slope).in_lattice);
        let mut sups_full = Vec::new();
        let mut sups_half = Vec::new();
        for t in [100i64, 1000] {
            let hi = q(t, 1);
            let pf = defect_profile(&realize_comb(&full, None, &q(0, 1), &hi), &[]);
            let ph = defect_profile(&realize_comb(&half, None, &q(0, 1), &hi), &[]);
            sups_full.push((t as f64, pf.max_abs.to_f64(53)));
            sups_half.push((t as f64, ph.max_abs.to_f64(53)));
        }
        assert_eq!(classify_defect(&sups_full), Verdict::Bounded);
        // The half window's defect strictly grows even over one decade.
        assert!(sups_half[1].1 > sups_half[0].1);
    }

    #[test]
    fn pipeline_runs_on_fibonacci() {
        let fib = fibonacci_preset(FibonacciKind::Full);
        let h = make_hat(fib.window.lo.clone(), q(0, 1), fib.window.hi.clone(), Rational::one())
            .unwrap();
        let rep = main_theorem_pipeline(&fib, Some(&h), Rational::one(), &[100, 1000]).unwrap();
        assert!(rep.normalized);
        assert!(rep.gl.converged);
        assert!(rep.gl.bounded_quotients);
        assert!(rep.hypotheses_satisfied);
        assert!(rep.bridge_exact);
        assert_eq!(rep.verdict, Verdict::Bounded);
        // Serializes to JSON.
        let text = serde_json::to_string_pretty(&rep).unwrap();
        assert!(text.contains("verdict"));
    }
}
