//! Continued fraction expansion of quadratic irrationals, convergents, and
//! the admissibility partial sums for the "almost all slopes" condition.

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{sqrt_rational_lower, Int, NumError, QuadNum, Rational};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum CfError {
    #[error("input is rational; expansion of rationals is out of scope")]
    RationalInput,
    #[error("arithmetic error: {0}")]
    Num(#[from] NumError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Eventually periodic continued fraction `[preperiod; (period)]`.
///
/// `a_0` may be any integer; all later partial quotients are >= 1. The period
/// is the minimal repeating block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFExpansion {
    pub preperiod: Vec<Int>,
    pub period: Vec<Int>,
}

impl CFExpansion {
    /// Partial quotient a_i (period repeats forever).
    pub fn quotient(&self, i: usize) -> Int {
        if i < self.preperiod.len() {
            self.preperiod[i].clone()
        } else {
            let j = (i - self.preperiod.len()) % self.period.len();
            self.period[j].clone()
        }
    }

    /// Max partial quotient over preperiod and period; periodic expansions
    /// always have bounded quotients.
    pub fn bounded_quotients(&self) -> (bool, Int) {
        let max = self
            .preperiod
            .iter()
            .chain(self.period.iter())
            .max()
            .cloned()
            .unwrap_or_else(Int::zero);
        (true, max)
    }
}

impl fmt::Display for CFExpansion {
    /// Text form `[a0; a1, a2, (b1 b2 ...)]` with parentheses on the period.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.preperiod.first().map(|a| a.to_string()).unwrap_or_default())?;
        write!(f, ";")?;
        let rest: Vec<String> = self.preperiod[1..].iter().map(|a| a.to_string()).collect();
        if !rest.is_empty() {
            write!(f, " {},", rest.join(", "))?;
        }
        let per: Vec<String> = self.period.iter().map(|a| a.to_string()).collect();
        write!(f, " ({})]", per.join(" "))
    }
}

/// Parse the text form `[a0; a1, a2, (b1 b2 ...)]`.
pub fn parse_cf(s: &str) -> Result<CFExpansion, CfError> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| CfError::Parse("expected [...]".into()))?;
    let (head, tail) = inner
        .split_once(';')
        .ok_or_else(|| CfError::Parse("expected ';' after a0".into()))?;
    let a0: Int = head
        .trim()
        .parse()
        .map_err(|_| CfError::Parse(format!("bad a0: {head:?}")))?;
    let tail = tail.trim();
    let (pre_str, per_str) = match tail.find('(') {
        Some(i) => {
            let close = tail
                .rfind(')')
                .ok_or_else(|| CfError::Parse("missing ')'".into()))?;
            (&tail[..i], &tail[i + 1..close])
        }
        None => return Err(CfError::Parse("missing period (...)".into())),
    };
    let mut preperiod = vec![a0];
    for tok in pre_str.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        preperiod.push(
            tok.parse()
                .map_err(|_| CfError::Parse(format!("bad quotient: {tok:?}")))?,
        );
    }
    let mut period = Vec::new();
    for tok in per_str
        .split(|c: char| c == ',' || c.is_whitespace())
        .map(str::trim)
        .filter(|t| !t.is_empty())
    {
        period.push(
            tok.parse()
                .map_err(|_| CfError::Parse(format!("bad period entry: {tok:?}")))?,
        );
    }
    if period.is_empty() {
        return Err(CfError::Parse("empty period".into()));
    }
    Ok(CFExpansion { preperiod, period })
}

/// Expand a quadratic irrational into its periodic continued fraction by the
/// classical cycle-detection algorithm on complete quotients.
pub fn cf_expand(x: &QuadNum) -> Result<CFExpansion, CfError> {
    if x.is_rational() {
        return Err(CfError::RationalInput);
    }
    let mut quotients: Vec<Int> = Vec::new();
    let mut states: Vec<QuadNum> = Vec::new();
    let mut y = x.clone();
    loop {
        // The complete quotient determines the whole tail, so the first
        // repeated state yields the minimal preperiod and minimal period.
        // a_0 always stays in the preperiod (skip state 0 when matching),
        // so tau reads [1; (1)] rather than [(1)].
        if let Some(j) = states
            .iter()
            .skip(1)
            .position(|s| *s == y)
            .map(|p| p + 1)
        {
            let preperiod = quotients[..j].to_vec();
            let period = quotients[j..].to_vec();
            debug_assert!(minimal_period(&period));
            return Ok(CFExpansion { preperiod, period });
        }
        states.push(y.clone());
        let a = y.floor_int();
        quotients.push(a.clone());
        let frac = y.try_sub(&QuadNum::from_rational(
            y.d(),
            Rational::from_integer(a),
        ))?;
        y = QuadNum::one(y.d()).try_div(&frac)?;
    }
}

fn minimal_period(period: &[Int]) -> bool {
    let n = period.len();
    for p in 1..n {
        if n % p == 0 && (0..n).all(|i| period[i] == period[i % p]) {
            return false;
        }
    }
    true
}

/// Row of a convergent table: index, numerator, denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub index: usize,
    pub p: Int,
    pub q: Int,
}

/// Convergents p_l/q_l for l = 0..=m via the standard recurrence with
/// q_{-1} = 0, q_0 = 1.
pub fn cf_convergents(cf: &CFExpansion, m: usize) -> Vec<Convergent> {
    let mut rows = Vec::with_capacity(m + 1);
    let (mut p_prev, mut q_prev) = (Int::one(), Int::zero());
    let (mut p_curr, mut q_curr) = (cf.quotient(0), Int::one());
    rows.push(Convergent { index: 0, p: p_curr.clone(), q: q_curr.clone() });
    for l in 1..=m {
        let a = cf.quotient(l);
        let p_next = &a * &p_curr + &p_prev;
        let q_next = &a * &q_curr + &q_prev;
        p_prev = std::mem::replace(&mut p_curr, p_next);
        q_prev = std::mem::replace(&mut q_curr, q_next);
        rows.push(Convergent { index: l, p: p_curr.clone(), q: q_curr.clone() });
    }
    rows
}

/// Partial sums S_0..S_m of the slope-admissibility series
/// sum_l (a_{l+1}/sqrt(q_l)) * sum_{k=1}^{l+1} a_k.
///
/// The constant the series must stay below is existential, so partial sums
/// are reported rather than thresholded; a convergence flag marks
/// stabilization (delta < 1e-9 over 50 consecutive terms).
#[derive(Debug, Clone)]
pub struct GlReport {
    pub partial_sums: Vec<f64>,
    pub converged: bool,
}

pub fn gl_condition(cf: &CFExpansion, m: usize) -> GlReport {
    let conv = cf_convergents(cf, m);
    let mut acc = Rational::zero();
    let mut inner = Rational::zero(); // sum_{k=1}^{l+1} a_k
    let mut sums = Vec::with_capacity(m + 1);
    for l in 0..=m {
        inner += Rational::from_integer(cf.quotient(l + 1));
        let q = Rational::from_integer(conv[l].q.clone());
        // 256-bit rational approximation of 1/sqrt(q_l).
        let sqrt_q = sqrt_rational_lower(&q, 256).max(Rational::new(Int::one(), Int::from(2)));
        let term = Rational::from_integer(cf.quotient(l + 1)) * &inner / sqrt_q;
        acc += term;
        sums.push(acc.to_f64().unwrap_or(f64::INFINITY));
    }
    let converged = sums.len() > 50 && {
        let last = *sums.last().unwrap();
        sums[sums.len() - 50..].iter().all(|s| (last - s).abs() < 1e-9)
    };
    GlReport { partial_sums: sums, converged }
}

/// Closed-form majorant sum_{l>=0} c*(l+1)*c / tau^{(l-1)/2} for expansions
/// with quotients bounded by c: denominators satisfy q_l >= tau^{l-1}, so
/// every partial sum of the series stays below this value.
pub fn bounded_quotient_majorant(c: f64) -> f64 {
    // sum (l+1) x^{l-1} = (1/x) / (1-x)^2 with x = tau^{-1/2}
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let x = 1.0 / tau.sqrt();
    c * c * tau.sqrt() / ((1.0 - x) * (1.0 - x))
}

/// Evaluate a periodic expansion back to the quadratic irrational it denotes.
/// Solves the fixed-point quadratic of the periodic tail, then folds the
/// preperiod backwards.
pub fn cf_eval(cf: &CFExpansion) -> Result<QuadNum, CfError> {
    assert!(!cf.period.is_empty());
    // Matrix of the period block: prod [[a,1],[1,0]].
    let (mut m11, mut m12, mut m21, mut m22) =
        (Int::one(), Int::zero(), Int::zero(), Int::one());
    for a in &cf.period {
        let (n11, n12) = (a * &m11 + &m21, a * &m12 + &m22);
        let (n21, n22) = (m11, m12);
        m11 = n11;
        m12 = n12;
        m21 = n21;
        m22 = n22;
    }
    // y = (m11 y + m12)/(m21 y + m22)  =>  m21 y^2 + (m22-m11) y - m12 = 0
    let a2 = m21;
    let b2 = &m22 - &m11;
    let c2 = -m12;
    let disc = &b2 * &b2 - Int::from(4) * &a2 * &c2;
    let (square, d) = squarefree_decompose(&disc);
    if d == 1 {
        return Err(CfError::Parse("period evaluates to a rational".into()));
    }
    // y = (-b2 + square*sqrt(d)) / (2 a2); take the root > 1.
    let two_a = Rational::from_integer(Int::from(2) * &a2);
    let mut y = QuadNum::new(
        d,
        Rational::from_integer(-&b2) / &two_a,
        Rational::from_integer(square.clone()) / &two_a,
    )?;
    let one = QuadNum::one(d);
    if y.try_sub(&one)?.sign() <= 0 {
        y = QuadNum::new(
            d,
            Rational::from_integer(-&b2) / &two_a,
            Rational::from_integer(-square) / &two_a,
        )?;
    }
    // Fold the preperiod: x = a_i + 1/next.
    for a in cf.preperiod.iter().rev() {
        let inv = QuadNum::one(d).try_div(&y)?;
        y = QuadNum::from_rational(d, Rational::from_integer(a.clone())).try_add(&inv)?;
    }
    Ok(y)
}

/// Split n >= 0 as square^2 * d with d square-free.
fn squarefree_decompose(n: &Int) -> (Int, u64) {
    assert!(!n.is_negative());
    let mut m = n.clone();
    let mut square = Int::one();
    let mut d = Int::one();
    let mut p = Int::from(2);
    while &p * &p <= m {
        let mut count = 0u32;
        while (&m % &p).is_zero() {
            m /= &p;
            count += 1;
        }
        if count > 0 {
            square *= p.pow(count / 2);
            if count % 2 == 1 {
                d *= &p;
            }
        }
        p += 1;
    }
    // Remaining m is 1 or prime.
    d *= m;
    (
        square,
        d.to_u64().expect("square-free part exceeds u64"),
    )
}
