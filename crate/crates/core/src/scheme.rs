//! 1x1 cut-and-project schemes: definition, validation, exact point
//! enumeration, density, lattice splitting, and normalization of
//! substitution-type lattices to the integer lattice.

use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{parse_quadnum, Int, NumError, QuadNum, Rational};
use crate::weights::WeightFn;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum SchemeError {
    #[error("singular lattice basis")]
    SingularBasis,
    #[error("rational slope; internal projection of the lattice is not dense")]
    RationalSlope,
    #[error("empty window (lo >= hi)")]
    EmptyWindow,
    #[error("direct projection is not injective on the lattice")]
    NonInjectiveProjection,
    #[error("internal projection of the lattice is not dense")]
    NonDenseInternal,
    #[error("operation requires the integer lattice (identity basis)")]
    NotIntegerLattice,
    #[error("operation requires basis columns (1,1),(beta,beta')")]
    NotSubstitutionBasis,
    #[error("beta must be a quadratic irrational")]
    RationalBeta,
    #[error("arithmetic error: {0}")]
    Num(#[from] NumError),
    #[error("scheme file error: {0}")]
    File(String),
}

/// Which endpoints of the window select points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    HalfOpenRight,
    Closed,
    HalfOpenLeft,
}

/// Projection convention: `Coordinate` projects onto the coordinate axes
/// (direct = x, internal = y; the substitution/Fibonacci picture).
/// `Orthogonal` takes the direct space to be the line of slope alpha, with
/// the direct coordinate in the `t -> (t, alpha*t)` parametrization and the
/// internal coordinate the offset `y - alpha*x`; the skew pair keeps the
/// density formula with `|det M|` intact and all values inside the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axes {
    Coordinate,
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lo: QuadNum,
    pub hi: QuadNum,
    pub convention: Convention,
}

impl Window {
    pub fn new(lo: QuadNum, hi: QuadNum, convention: Convention) -> Result<Self, SchemeError> {
        if lo.cmp_exact(&hi) != std::cmp::Ordering::Less {
            return Err(SchemeError::EmptyWindow);
        }
        Ok(Window { lo, hi, convention })
    }

    pub fn length(&self) -> QuadNum {
        &self.hi - &self.lo
    }

    /// Exact membership per the boundary convention.
    pub fn contains(&self, z: &QuadNum) -> bool {
        let lo = (z - &self.lo).sign();
        let hi = (z - &self.hi).sign();
        match self.convention {
            Convention::HalfOpenRight => lo >= 0 && hi < 0,
            Convention::Closed => lo >= 0 && hi <= 0,
            Convention::HalfOpenLeft => lo > 0 && hi <= 0,
        }
    }
}

/// A CPS point: its direct coordinate, internal (star map) coordinate, and
/// the lattice coordinates it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CpsPoint {
    pub direct: QuadNum,
    pub internal: QuadNum,
    pub lattice_coords: (i64, i64),
}

/// A validated 1x1 cut-and-project scheme over Q(sqrt(d)).
#[derive(Debug, Clone)]
pub struct Scheme {
    pub d: u64,
    /// Columns are the lattice generators.
    pub basis: [[QuadNum; 2]; 2],
    pub translate: [QuadNum; 2],
    pub slope: QuadNum,
    pub window: Window,
    pub axes: Axes,
    // Cached linear forms: direct = t0 + m*ta + n*tb, internal = z0 + m*za + n*zb.
    t0: QuadNum,
    ta: QuadNum,
    tb: QuadNum,
    z0: QuadNum,
    za: QuadNum,
    zb: QuadNum,
}

fn ratio_is_rational(u: &QuadNum, v: &QuadNum) -> bool {
    // u, v rationally dependent: v = r*u for rational r (or u = 0).
    if u.is_zero() {
        return true;
    }
    v.try_div(u).map(|q| q.is_rational()).unwrap_or(false)
}

impl Scheme {
    /// Validate and build a scheme; precomputes the direct/internal linear
    /// forms for the chosen projection convention.
    pub fn build(
        d: u64,
        basis: [[QuadNum; 2]; 2],
        translate: [QuadNum; 2],
        slope: QuadNum,
        window: Window,
        axes: Axes,
    ) -> Result<Self, SchemeError> {
        let det = &basis[0][0] * &basis[1][1] - &basis[1][0] * &basis[0][1];
        if det.is_zero() {
            return Err(SchemeError::SingularBasis);
        }
        if slope.is_rational() {
            return Err(SchemeError::RationalSlope);
        }

        // Direct/internal coordinates of a lattice point m*col0 + n*col1 + translate.
        let (project_t, project_z): (Box<dyn Fn(&QuadNum, &QuadNum) -> QuadNum>, Box<dyn Fn(&QuadNum, &QuadNum) -> QuadNum>) =
            match axes {
                Axes::Coordinate => (
                    Box::new(|x: &QuadNum, _y: &QuadNum| x.clone()),
                    Box::new(|_x: &QuadNum, y: &QuadNum| y.clone()),
                ),
                Axes::Orthogonal => {
                    let a = slope.clone();
                    let denom = QuadNum::one(d) + &a * &a;
                    let a2 = slope.clone();
                    (
                        Box::new(move |x: &QuadNum, y: &QuadNum| {
                            (x + &(&a * y)).try_div(&denom).unwrap()
                        }),
                        Box::new(move |x: &QuadNum, y: &QuadNum| y - &(&a2 * x)),
                    )
                }
            };

        let t0 = project_t(&translate[0], &translate[1]);
        let z0 = project_z(&translate[0], &translate[1]);
        let ta = project_t(&basis[0][0], &basis[0][1]);
        let za = project_z(&basis[0][0], &basis[0][1]);
        let tb = project_t(&basis[1][0], &basis[1][1]);
        let zb = project_z(&basis[1][0], &basis[1][1]);

        // pi_1 injective on the lattice and pi_2(lattice) dense both come down
        // to rational independence of the generators' projections.
        if ratio_is_rational(&ta, &tb) || ratio_is_rational(&tb, &ta) {
            return Err(SchemeError::NonInjectiveProjection);
        }
        if ratio_is_rational(&za, &zb) || ratio_is_rational(&zb, &za) {
            return Err(SchemeError::NonDenseInternal);
        }

        Ok(Scheme { d, basis, translate, slope, window, axes, t0, ta, tb, z0, za, zb })
    }

    pub fn det(&self) -> QuadNum {
        &self.basis[0][0] * &self.basis[1][1] - &self.basis[1][0] * &self.basis[0][1]
    }

    /// Direct and internal coordinates of lattice point (m, n).
    pub fn project(&self, m: i64, n: i64) -> (QuadNum, QuadNum) {
        let mq = QuadNum::from_int(self.d, m);
        let nq = QuadNum::from_int(self.d, n);
        let t = &self.t0 + &(&mq * &self.ta) + &nq * &self.tb;
        let z = &self.z0 + &(&mq * &self.za) + &nq * &self.zb;
        (t, z)
    }

    /// The star map on one lattice point: `None` if the internal coordinate
    /// falls outside the window under the scheme's boundary convention.
    pub fn star_map(&self, coords: (i64, i64)) -> Option<CpsPoint> {
        let (direct, internal) = self.project(coords.0, coords.1);
        if self.window.contains(&internal) {
            Some(CpsPoint { direct, internal, lattice_coords: coords })
        } else {
            None
        }
    }

    /// All CPS points with direct coordinate in [lo, hi], sorted ascending.
    ///
    /// Completeness: the inverse linear map sends the box
    /// [lo,hi] x [window] to a parallelogram in lattice coordinates; its
    /// corner values bound m exactly, and for each m the window constraint
    /// bounds n exactly.
    pub fn enumerate_points(&self, lo: &QuadNum, hi: &QuadNum) -> Vec<CpsPoint> {
        assert!(lo.cmp_exact(hi) == std::cmp::Ordering::Less, "empty interval");
        let det2 = &self.ta * &self.zb - &self.tb * &self.za;
        debug_assert!(!det2.is_zero());

        // m = ( zb*(t - t0) - tb*(z - z0) ) / det2 at the four corners.
        let corners = [
            (lo.clone(), self.window.lo.clone()),
            (lo.clone(), self.window.hi.clone()),
            (hi.clone(), self.window.lo.clone()),
            (hi.clone(), self.window.hi.clone()),
        ];
        let mut m_min: Option<QuadNum> = None;
        let mut m_max: Option<QuadNum> = None;
        for (t, z) in &corners {
            let dt = t - &self.t0;
            let dz = z - &self.z0;
            let m = (&(&self.zb * &dt) - &(&self.tb * &dz)).try_div(&det2).unwrap();
            m_min = Some(match m_min {
                None => m.clone(),
                Some(cur) => cur.min_exact(m.clone()),
            });
            m_max = Some(match m_max {
                None => m.clone(),
                Some(cur) => cur.max_exact(m.clone()),
            });
        }
        let m_lo = m_min.unwrap().floor_int();
        let m_hi = m_max.unwrap().floor_int() + Int::from(1);
        let m_lo = m_lo.to_i64().expect("enumeration range too large");
        let m_hi = m_hi.to_i64().expect("enumeration range too large");

        let mut out = Vec::new();
        for m in m_lo..=m_hi {
            let mq = QuadNum::from_int(self.d, m);
            // window.lo <= z0 + m*za + n*zb <= window.hi  (outer bounds; the
            // exact convention test runs per point below).
            let base = &self.z0 + &(&mq * &self.za);
            let lo_n = (&self.window.lo - &base).try_div(&self.zb).unwrap();
            let hi_n = (&self.window.hi - &base).try_div(&self.zb).unwrap();
            let (n_lo, n_hi) = if self.zb.sign() > 0 {
                (lo_n.floor_int(), hi_n.floor_int() + Int::from(1))
            } else {
                (hi_n.floor_int(), lo_n.floor_int() + Int::from(1))
            };
            let n_lo = n_lo.to_i64().expect("enumeration range too large");
            let n_hi = n_hi.to_i64().expect("enumeration range too large");
            for n in n_lo..=n_hi {
                if let Some(p) = self.star_map((m, n)) {
                    if (&p.direct - lo).sign() >= 0 && (&p.direct - hi).sign() <= 0 {
                        out.push(p);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.direct.cmp_exact(&b.direct));
        out
    }

    /// Density of the (weighted) CPS: lambda(W)/|det M| for the unweighted
    /// case, integral(h)/|det M| for a weight supported in the window. Exact
    /// in the field (weight integrals of the built-in families are exact).
    pub fn density(&self, weight: Option<&WeightFn>) -> QuadNum {
        let numer = match weight {
            None => self.window.length(),
            Some(h) => h.integral(),
        };
        numer.try_div(&self.det().abs()).unwrap()
    }

    /// Split a Z^2 scheme into n^2 sub-schemes with basis n*I and translates
    /// (k, l), 0 <= k, l < n; their lattices partition Z^2.
    pub fn split(&self, n: u32) -> Result<Vec<Scheme>, SchemeError> {
        assert!(n >= 1);
        let one = QuadNum::one(self.d);
        let zero = QuadNum::zero(self.d);
        if self.basis[0] != [one.clone(), zero.clone()] || self.basis[1] != [zero.clone(), one.clone()] {
            return Err(SchemeError::NotIntegerLattice);
        }
        let nq = QuadNum::from_int(self.d, n as i64);
        let mut out = Vec::with_capacity((n * n) as usize);
        for k in 0..n {
            for l in 0..n {
                let basis = [
                    [nq.clone(), zero.clone()],
                    [zero.clone(), nq.clone()],
                ];
                let translate = [
                    &self.translate[0] + &QuadNum::from_int(self.d, k as i64),
                    &self.translate[1] + &QuadNum::from_int(self.d, l as i64),
                ];
                out.push(Scheme::build(
                    self.d,
                    basis,
                    translate,
                    self.slope.clone(),
                    self.window.clone(),
                    self.axes,
                )?);
            }
        }
        Ok(out)
    }
}

/// Result of normalizing a substitution lattice <(1,1),(beta,beta')> to Z^2.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub scheme: Scheme,
    /// The matrix M with M*(1,1)^T = e1 and M*(beta,beta')^T = e2 (rows).
    pub matrix: [[QuadNum; 2]; 2],
    pub slope: QuadNum,
    /// When beta*beta' = -1 the direct coordinates correspond exactly under
    /// original_direct = scale * normalized_direct.
    pub affine_scale: Option<QuadNum>,
    /// Internal coordinates transform as new_z = internal_scale * old_z.
    pub internal_scale: QuadNum,
}

/// Map a scheme with basis columns (1,1),(beta,beta') to the integer lattice
/// with slope derived from the image of the direct axis, transporting the
/// window. Applies the sign symmetry of Z^2 to keep the slope positive.
pub fn quad_normalize(s: &Scheme) -> Result<Normalized, SchemeError> {
    let one = QuadNum::one(s.d);
    if s.basis[0] != [one.clone(), one.clone()] {
        return Err(SchemeError::NotSubstitutionBasis);
    }
    let beta = s.basis[1][0].clone();
    let beta_conj = s.basis[1][1].clone();
    if beta.is_rational() {
        return Err(SchemeError::RationalBeta);
    }
    if beta_conj != beta.conjugate() {
        return Err(SchemeError::NotSubstitutionBasis);
    }
    // M = 1/(beta - beta') * [ -beta'  beta ; 1  -1 ]
    let denom = &beta - &beta_conj;
    let m00 = (-&beta_conj).try_div(&denom)?;
    let m01 = beta.try_div(&denom)?;
    let m10 = one.try_div(&denom)?;
    let m11 = (-&one).try_div(&denom)?;
    let matrix = [[m00, m01], [m10, m11]];

    // Image of the direct axis direction (1,0): (-beta', 1)/(beta-beta'),
    // i.e. slope alpha0 = -1/beta'. Negative slopes flip via (m,n) -> (m,-n).
    let alpha0 = (-&one).try_div(&beta_conj)?;
    let flip = alpha0.sign() < 0;
    let alpha = if flip { -alpha0.clone() } else { alpha0.clone() };

    // Old internal coordinate w = i + j*beta'; new z = n - alpha0*m with
    // (m,n) = (i,j) gives z = w/beta'; the flip negates z.
    let mut scale = one.try_div(&beta_conj)?;
    if flip {
        scale = -scale;
    }
    let e1 = (&s.window.lo * &scale).clone();
    let e2 = (&s.window.hi * &scale).clone();
    let reversed = scale.sign() < 0;
    let (lo, hi) = if reversed { (e2, e1) } else { (e1, e2) };
    let convention = if reversed {
        match s.window.convention {
            Convention::HalfOpenRight => Convention::HalfOpenLeft,
            Convention::HalfOpenLeft => Convention::HalfOpenRight,
            Convention::Closed => Convention::Closed,
        }
    } else {
        s.window.convention
    };

    let zero = QuadNum::zero(s.d);
    let new_translate = {
        // M applied to the old translate, with the flip on the second row.
        let tx = &matrix[0][0] * &s.translate[0] + &matrix[0][1] * &s.translate[1];
        let ty = &matrix[1][0] * &s.translate[0] + &matrix[1][1] * &s.translate[1];
        [tx, if flip { -ty } else { ty }]
    };
    let scheme = Scheme::build(
        s.d,
        [[one.clone(), zero.clone()], [zero.clone(), one.clone()]],
        new_translate,
        alpha.clone(),
        Window { lo, hi, convention },
        Axes::Orthogonal,
    )?;

    // Exact pointwise affine correspondence of direct coordinates requires
    // beta*beta' = -1 (then i*beta' - j = beta' * (i + j*beta)):
    // original = (1 + alpha^2) * normalized.
    let bb = (&beta * &beta_conj).rat_part().clone();
    let affine_scale = if beta.try_mul(&beta_conj)?.is_rational()
        && bb == -Rational::one()
    {
        Some(&one + &(&alpha * &alpha))
    } else {
        None
    };

    Ok(Normalized { scheme, matrix, slope: alpha, affine_scale, internal_scale: scale })
}

/// The Fibonacci cut-and-project scheme: lattice <(1,1),(tau,-1/tau)>, with
/// the full window of length tau or the half window of length tau/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FibonacciKind {
    Full,
    Half,
}

pub fn fibonacci_preset(kind: FibonacciKind) -> Scheme {
    let tau = QuadNum::tau();
    let one = QuadNum::one(5);
    let zero = QuadNum::zero(5);
    let minus_inv_tau = tau.conjugate(); // -1/tau
    let window = match kind {
        FibonacciKind::Full => Window {
            lo: minus_inv_tau.clone(),
            hi: one.clone(),
            convention: Convention::HalfOpenRight,
        },
        FibonacciKind::Half => Window {
            lo: zero.clone(),
            hi: tau.try_div(&QuadNum::from_int(5, 2)).unwrap(),
            convention: Convention::HalfOpenRight,
        },
    };
    Scheme::build(
        5,
        [[one.clone(), one.clone()], [tau.clone(), minus_inv_tau]],
        [zero.clone(), zero],
        tau,
        window,
        Axes::Coordinate,
    )
    .expect("fibonacci preset is valid")
}

/// Convenience: build a Z^2 scheme with the given slope and window, in the
/// orthogonal (torus-flow) convention.
pub fn integer_lattice_scheme(
    d: u64,
    slope: QuadNum,
    window: Window,
) -> Result<Scheme, SchemeError> {
    let one = QuadNum::one(d);
    let zero = QuadNum::zero(d);
    Scheme::build(
        d,
        [[one.clone(), zero.clone()], [zero.clone(), one]],
        [zero.clone(), zero],
        slope,
        window,
        Axes::Orthogonal,
    )
}

// ---------------------------------------------------------------------------
// JSON description files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WindowFile {
    lo: String,
    hi: String,
    convention: Convention,
}

#[derive(Serialize, Deserialize)]
struct SchemeFile {
    d: u64,
    basis: [[String; 2]; 2],
    #[serde(default)]
    translate: Option<[String; 2]>,
    slope: String,
    window: WindowFile,
    axes: Axes,
}

impl Scheme {
    pub fn to_json(&self) -> String {
        let file = SchemeFile {
            d: self.d,
            basis: [
                [self.basis[0][0].to_string(), self.basis[0][1].to_string()],
                [self.basis[1][0].to_string(), self.basis[1][1].to_string()],
            ],
            translate: Some([self.translate[0].to_string(), self.translate[1].to_string()]),
            slope: self.slope.to_string(),
            window: WindowFile {
                lo: self.window.lo.to_string(),
                hi: self.window.hi.to_string(),
                convention: self.window.convention,
            },
            axes: self.axes,
        };
        serde_json::to_string_pretty(&file).expect("scheme serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let file: SchemeFile =
            serde_json::from_str(text).map_err(|e| SchemeError::File(e.to_string()))?;
        let d = file.d;
        let q = |s: &str| -> Result<QuadNum, SchemeError> {
            parse_quadnum(s, Some(d)).map_err(SchemeError::Num)
        };
        let basis = [
            [q(&file.basis[0][0])?, q(&file.basis[0][1])?],
            [q(&file.basis[1][0])?, q(&file.basis[1][1])?],
        ];
        let translate = match &file.translate {
            Some([x, y]) => [q(x)?, q(y)?],
            None => [QuadNum::zero(d), QuadNum::zero(d)],
        };
        let window = Window::new(q(&file.window.lo)?, q(&file.window.hi)?, file.window.convention)?;
        Scheme::build(d, basis, translate, q(&file.slope)?, window, file.axes)
    }
}

/// Count helper used by tests and the CLI: number of points on [0, T].
pub fn count_points(s: &Scheme, t_max: i64) -> usize {
    s.enumerate_points(
        &QuadNum::zero(s.d),
        &QuadNum::from_int(s.d, t_max),
    )
    .len()
}

/// Multiset equality of the direct coordinates of two point lists.
pub fn same_point_multiset(a: &[CpsPoint], b: &[CpsPoint]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut av: Vec<&QuadNum> = a.iter().map(|p| &p.direct).collect();
    let mut bv: Vec<&QuadNum> = b.iter().map(|p| &p.direct).collect();
    av.sort_by(|x, y| x.cmp_exact(y));
    bv.sort_by(|x, y| x.cmp_exact(y));
    av == bv
}
