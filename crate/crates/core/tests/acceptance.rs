//! End-to-end acceptance checks. Each test prints a single pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).

use num_traits::{One, ToPrimitive};

use cutbound::bdlab::{
    bridge_identity_check, defect_profile, linear_combination, realize_comb, wcps_to_brs, Atom,
    CombMeasure,
};
use cutbound::cfrac::{bounded_quotient_majorant, cf_expand, gl_condition};
use cutbound::exactnum::{QuadNum, Rational};
use cutbound::rotation::{delta_t, kesten_test};
use cutbound::scheme::{
    fibonacci_preset, quad_normalize, same_point_multiset, FibonacciKind, Scheme,
};
use cutbound::weights::{
    curvature_ellipse, curvature_graph, curvature_parametric, make_c2_dome, make_hat,
    sheared_region_from_weight,
};

fn q(n: i64, m: i64) -> QuadNum {
    QuadNum::from_rational(5, Rational::new(n.into(), m.into()))
}

fn report(name: &str, ok: bool) {
    println!("criterion {name}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {name} failed");
}

/// Truncate a comb to [0, t], keeping the exact mean.
fn prefix(comb: &CombMeasure, t: i64) -> CombMeasure {
    let hi = q(t, 1);
    CombMeasure {
        atoms: comb
            .atoms
            .iter()
            .filter(|a| (&a.position - &hi).sign() <= 0)
            .cloned()
            .collect(),
        span: (comb.span.0.clone(), hi),
        mean: comb.mean.clone(),
    }
}

#[test]
fn criterion_01_interval_lattice_dichotomy() {
    // Window length tau lies in Z + tau*Z; length tau/2 does not. Exact.
    let full = fibonacci_preset(FibonacciKind::Full);
    let half = fibonacci_preset(FibonacciKind::Half);
    let r_full = kesten_test(&full.window.length(), &full.slope);
    let r_half = kesten_test(&half.window.length(), &half.slope);
    let ok = r_full.in_lattice
        && r_full.m == Some(0.into())
        && r_full.n == Some(1.into())
        && !r_half.in_lattice;
    report("01 interval lattice dichotomy", ok);
}

#[test]
fn criterion_02_density_convergence() {
    // |count/T - tau/sqrt(5)| <= 2/T at T = 10^3 and 10^4.
    let fib = fibonacci_preset(FibonacciKind::Full);
    let dens = fib.density(None).to_f64(64);
    let pts = fib.enumerate_points(&q(0, 1), &q(10_000, 1));
    let mut ok = true;
    for t in [1_000i64, 10_000] {
        let hi = q(t, 1);
        let count = pts.iter().filter(|p| (&p.direct - &hi).sign() <= 0).count();
        let err = (count as f64 / t as f64 - dens).abs();
        ok &= err <= 2.0 / t as f64;
    }
    report("02 density convergence", ok);
}

#[test]
fn criterion_03_kesten_growth_dichotomy() {
    // Full window: defect sup plateaus (factor <= 1.2 per decade jump);
    // half window: defect sup gains at least +1 from T=10^2 to T=10^5.
    let full = fibonacci_preset(FibonacciKind::Full);
    let half = fibonacci_preset(FibonacciKind::Half);
    let comb_full = realize_comb(&full, None, &q(0, 1), &q(100_000, 1));
    let comb_half = realize_comb(&half, None, &q(0, 1), &q(100_000, 1));
    let sup = |comb: &CombMeasure, t: i64| defect_profile(&prefix(comb, t), &[]).max_abs.to_f64(53);
    let plateau = sup(&comb_full, 100_000) <= 1.2 * sup(&comb_full, 10_000);
    let growth = sup(&comb_half, 100_000) >= sup(&comb_half, 100) + 1.0;
    report("03 bounded vs growing deficiency", plateau && growth);
}

#[test]
fn criterion_04_weighted_comb_plateau() {
    // Hat and dome weighted combs: defect sup plateaus between ~10^3 and
    // ~10^5 atoms (factor <= 1.2).
    let fib = fibonacci_preset(FibonacciKind::Full);
    let hat = make_hat(fib.window.lo.clone(), q(1, 5), fib.window.hi.clone(), Rational::one())
        .unwrap();
    let dome =
        make_c2_dome(fib.window.lo.clone(), fib.window.hi.clone(), Rational::one()).unwrap();
    let mut ok = true;
    for w in [hat, dome] {
        let comb = realize_comb(&fib, Some(&w), &q(0, 1), &q(150_000, 1));
        let small = prefix(&comb, 1_500);
        assert!(small.atoms.len() >= 1_000);
        assert!(comb.atoms.len() >= 100_000);
        let s_small = defect_profile(&small, &[]).max_abs.to_f64(53);
        let s_large = defect_profile(&comb, &[]).max_abs.to_f64(53);
        ok &= s_large <= 1.2 * s_small;
    }
    report("04 weighted comb plateau", ok);
}

#[test]
fn criterion_05_bridge_identity() {
    // Five hat weights: comb column sums equal region occupation times,
    // exactly, for 1..=100 cells; f64 views differ by at most 1e-15.
    let fib = fibonacci_preset(FibonacciKind::Full);
    let peaks = [q(-1, 2), q(-1, 5), q(0, 1), q(1, 4), q(3, 5)];
    let mut ok = true;
    for peak in peaks {
        let h = make_hat(fib.window.lo.clone(), peak, fib.window.hi.clone(), Rational::one())
            .unwrap();
        let setup = wcps_to_brs(&fib, &h, Rational::one()).unwrap();
        let part = &setup.parts[0];
        for t in 1..=100u32 {
            let chk = bridge_identity_check(part, t).unwrap();
            ok &= chk.exact && chk.f64_gap <= 1e-15;
        }
    }
    report("05 comb/flow bridge identity", ok);
}

#[test]
fn criterion_06_delta_additivity() {
    // Delta_{t+s}(x) = Delta_t(x) + Delta_s(flow_t(x)), exactly, at 100
    // seeded random rational times.
    use rand::{Rng, SeedableRng};
    let alpha = QuadNum::tau();
    let h = make_hat(q(-1, 2), q(0, 1), q(1, 2), Rational::one()).unwrap();
    let bridge = sheared_region_from_weight(&h, &alpha, Rational::one()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut ok = true;
    for _ in 0..100 {
        let t = q(rng.gen_range(1..400), 8);
        let s = q(rng.gen_range(1..400), 8);
        let x1 = q(rng.gen_range(0..16), 16);
        let x2 = q(rng.gen_range(0..16), 16);
        let whole = delta_t(&bridge.region, &alpha, (&x1, &x2), &(&t + &s)).unwrap();
        let first = delta_t(&bridge.region, &alpha, (&x1, &x2), &t).unwrap();
        let mx1 = &x1 + &t;
        let mx2 = &x2 + &(&alpha * &t);
        let second = delta_t(&bridge.region, &alpha, (&mx1, &mx2), &s).unwrap();
        ok &= whole == &first + &second;
    }
    report("06 distributional error additivity", ok);
}

#[test]
fn criterion_07_splitting_consistency() {
    // Splitting into n^2 sublattices (n = 2, 3): the sub-scheme point sets
    // partition the original as a multiset, and the sum of the sub-combs
    // has the same defect profile as the whole.
    let tau = QuadNum::tau();
    let s = cutbound::scheme::integer_lattice_scheme(
        5,
        tau,
        cutbound::scheme::Window::new(
            q(0, 1),
            q(1, 2),
            cutbound::scheme::Convention::HalfOpenRight,
        )
        .unwrap(),
    )
    .unwrap();
    let lo = q(0, 1);
    let hi = q(500, 1);
    let whole_pts = s.enumerate_points(&lo, &hi);
    let whole = realize_comb(&s, None, &lo, &hi);
    let base = defect_profile(&whole, &[]);
    let mut ok = true;
    for n in [2u32, 3] {
        let parts = s.split(n).unwrap();
        let mut union = Vec::new();
        let mut combs = Vec::new();
        for p in &parts {
            union.extend(p.enumerate_points(&lo, &hi));
            combs.push(realize_comb(p, None, &lo, &hi));
        }
        ok &= same_point_multiset(&whole_pts, &union);
        let refs: Vec<(Rational, &CombMeasure)> =
            combs.iter().map(|c| (Rational::one(), c)).collect();
        let summed = linear_combination(&refs).unwrap();
        let p = defect_profile(&summed, &[]);
        ok &= p.sup == base.sup && p.inf == base.inf;
    }
    report("07 splitting consistency", ok);
}

#[test]
fn criterion_08_normalization() {
    // The normalizing matrix sends the lattice basis to e1, e2 exactly, and
    // point sets correspond under the exact affine scale on [0, 100].
    let fib = fibonacci_preset(FibonacciKind::Full);
    let norm = quad_normalize(&fib).unwrap();
    let mut ok = true;
    for (col, expect) in [(0usize, (1i64, 0i64)), (1, (0i64, 1i64))] {
        let x = &norm.matrix[0][0] * &fib.basis[col][0] + &norm.matrix[0][1] * &fib.basis[col][1];
        let y = &norm.matrix[1][0] * &fib.basis[col][0] + &norm.matrix[1][1] * &fib.basis[col][1];
        ok &= x == QuadNum::from_int(5, expect.0) && y == QuadNum::from_int(5, expect.1);
    }
    let scale = match &norm.affine_scale {
        Some(s) => s.clone(),
        None => {
            report("08 lattice normalization", false);
            return;
        }
    };
    let lo = q(0, 1);
    let hi = q(100, 1);
    let original = fib.enumerate_points(&lo, &hi);
    let normalized = norm.scheme.enumerate_points(&lo, &hi.try_div(&scale).unwrap());
    ok &= original.len() == normalized.len();
    for (o, n) in original.iter().zip(normalized.iter()) {
        ok &= o.direct == &n.direct * &scale;
    }
    report("08 lattice normalization", ok);
}

#[test]
fn criterion_09_admissibility_sums() {
    // S_0 = 1 and S_1 = 3 for the golden ratio; the partial sums stabilize
    // within 200 terms and stay below the bounded-quotient majorant.
    let cf = cf_expand(&QuadNum::tau()).unwrap();
    let rep = gl_condition(&cf, 200);
    let maj = bounded_quotient_majorant(cf.bounded_quotients().1.to_f64().unwrap());
    let ok = (rep.partial_sums[0] - 1.0).abs() < 1e-12
        && (rep.partial_sums[1] - 3.0).abs() < 1e-12
        && rep.converged
        && rep.partial_sums.iter().all(|s| *s < maj);
    report("09 admissibility sums", ok);
}

#[test]
fn criterion_10_curvature() {
    // Known curvature values, and graph/parametric agreement within 1e-12
    // at 100 points of an ellipse arc.
    let mut ok = (curvature_graph(0.0, 2.0) - 2.0).abs() < 1e-15; // parabola apex
    let t = 1.1f64;
    let k = curvature_parametric(-2.0 * t.sin(), 2.0 * t.cos(), -2.0 * t.cos(), -2.0 * t.sin());
    ok &= (k - 0.5).abs() < 1e-14; // circle of radius 2
    ok &= (curvature_ellipse(2.0, 1.0, 0.0) - 2.0).abs() < 1e-14;
    ok &= (curvature_ellipse(2.0, 1.0, std::f64::consts::FRAC_PI_2) - 0.25).abs() < 1e-14;
    let (a, b) = (0.4f64, 0.3f64);
    for i in 0..100 {
        let t = 0.3 + (std::f64::consts::PI - 0.6) * i as f64 / 99.0;
        let kp = curvature_parametric(-a * t.sin(), b * t.cos(), -a * t.cos(), -b * t.sin());
        let x = a * t.cos();
        let s = (1.0 - x * x / (a * a)).sqrt();
        let fp = -b * x / (a * a * s);
        let fpp = -b / (a * a * s) - b * x * x / (a * a * a * a * s * s * s);
        let kg = curvature_graph(fp, fpp);
        ok &= (kp - kg).abs() < 1e-12;
    }
    report("10 curvature", ok);
}

// A couple of scheme-level sanity checks that the criteria rely on.
#[test]
fn scheme_roundtrip_and_star_map() {
    let fib = fibonacci_preset(FibonacciKind::Full);
    let text = fib.to_json();
    let back = Scheme::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    let p = back.star_map((0, 1)).unwrap();
    assert_eq!(p.direct, QuadNum::tau());
}

#[test]
fn defect_profile_is_exact_on_integers() {
    // Integer comb vs mean 1: sup 1, inf 0 exactly.
    let atoms: Vec<Atom> = (0..=50)
        .map(|k| Atom { position: q(k, 1), mass: q(1, 1), lattice: (k as i64, 0) })
        .collect();
    let comb = CombMeasure { atoms, span: (q(0, 1), q(50, 1)), mean: q(1, 1) };
    let p = defect_profile(&comb, &[]);
    assert_eq!(p.sup, q(1, 1));
    assert_eq!(p.inf, q(0, 1));
}
