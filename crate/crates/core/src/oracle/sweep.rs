//! Parametric-family sweeps and the random suites behind `verify`.
//!
//! Every family coupling must stay inside the sharp interval computed from
//! the family's exact moments; the beta sweeps are Monte Carlo and get a
//! five-sigma allowance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde_json::json;

use crate::bounds::{bounds_all_known, CovarianceInterval};
use crate::domain::{BoxDomain, MomentSpec};
use crate::families::{BetaFamily, ThreePointFamily};
use crate::oracle::report::CheckRecord;
use crate::oracle::verify::verify_bounds;
use crate::parallel::par_map;
use crate::standardize::example_family_ratios;

/// Slack for exact (non-sampled) containment checks, relative to `(b-a)(d-c)`.
const EXACT_TOL: f64 = 1e-12;
const SIGMAS: f64 = 5.0;
/// Draws per beta configuration in [`beta_suite`].
pub const DEFAULT_BETA_SAMPLES: usize = 100_000;

fn family_params(f: &ThreePointFamily, bx: &BoxDomain) -> serde_json::Value {
    json!({
        "alpha": f.alpha, "beta": f.beta, "r": f.r, "s": f.s,
        "a": bx.a(), "b": bx.b(), "c": bx.c(), "d": bx.d(),
    })
}

fn containment(
    check: &str,
    params: serde_json::Value,
    bounds: &CovarianceInterval,
    cov: f64,
    slack: f64,
) -> CheckRecord {
    let inside = bounds.contains(cov, slack);
    let (closed, gap) = match check {
        c if c.ends_with("antitone") => (bounds.lower, cov - bounds.lower),
        c if c.ends_with("comonotone") => (bounds.upper, bounds.upper - cov),
        _ => (0.0, cov.abs()),
    };
    CheckRecord::new(check, params)
        .param("lower", bounds.lower)
        .param("upper", bounds.upper)
        .values(Some(closed), Some(cov))
        .gap(gap)
        .pass(inside && gap >= -slack)
}

/// Independent, comonotone and antitone couplings of three-point marginals
/// against the sharp bounds, plus the log-odds ratio formulas and the
/// direction in which the means-only bound loses to Cauchy-Schwarz.
pub fn sweep_three_point_family(bx: &BoxDomain, families: &[ThreePointFamily]) -> Vec<CheckRecord> {
    par_map(families, |f| three_point_checks(bx, f))
        .into_iter()
        .flatten()
        .collect()
}

fn three_point_checks(bx: &BoxDomain, f: &ThreePointFamily) -> Vec<CheckRecord> {
    let params = family_params(f, bx);
    let spec = f.spec(bx);
    let bounds = match bounds_all_known(bx, &spec) {
        Ok(b) => b,
        Err(e) => {
            return vec![CheckRecord::new("three_point_bounds", params).param("error", e.code())]
        }
    };
    let slack = EXACT_TOL * bx.area();
    let mut out = Vec::with_capacity(7);
    let couplings = [
        ("three_point_independent", f.independent(bx)),
        ("three_point_comonotone", f.comonotone(bx)),
        ("three_point_antitone", f.antitone(bx)),
    ];
    for (check, joint) in couplings {
        out.push(match joint {
            Ok(j) => {
                let mut rec = containment(check, params.clone(), &bounds, j.cov(), slack);
                if check == "three_point_independent" {
                    rec.pass &= j.cov().abs() <= slack;
                }
                rec
            }
            Err(e) => CheckRecord::new(check, params.clone()).param("error", e.code()),
        });
    }

    let ratios = match example_family_ratios(f.alpha, f.beta, f.r, f.s) {
        Ok(r) => r,
        Err(e) => {
            out.push(CheckRecord::new("three_point_ratio", params).param("error", e.code()));
            return out;
        }
    };
    let spread = (1.0 - f.r) * (1.0 - f.s);
    let sides = [
        ("lower", ratios.lower_ratio, ratios.lower_direct),
        ("upper", ratios.upper_ratio, ratios.upper_direct),
    ];
    for (side, formula, direct) in sides {
        let gap = (formula - direct).abs();
        out.push(
            CheckRecord::new(format!("three_point_ratio_{side}"), params.clone())
                .values(Some(formula), Some(direct))
                .gap(gap)
                .pass(gap <= EXACT_TOL * direct.max(1.0)),
        );
        // At r = s = 0 the ratio is its numerator, never above 1; concentrating
        // mass at the mean only inflates it, past 1 once (1-r)(1-s) drops below
        // the squared numerator.
        let numerator = formula * spread.sqrt();
        let squared = numerator * numerator;
        let exceeds = formula > 1.0;
        let decided = (squared - spread).abs() > 1e-9;
        let pass = numerator <= 1.0 + EXACT_TOL
            && formula >= numerator * (1.0 - EXACT_TOL)
            && (!decided || exceeds == (spread < squared));
        out.push(
            CheckRecord::new(format!("three_point_crossover_{side}"), params.clone())
                .values(Some(numerator), Some(formula))
                .gap((formula - numerator).max(0.0))
                .pass(pass),
        );
    }
    out
}

/// Monte Carlo check of the beta family: moment agreement with the
/// three-point family, then independent, comonotone and antitone samples
/// against the sharp bounds with five-sigma slack.
///
/// Configuration `i` draws from ChaCha8 stream `i` of `seed`, so results do
/// not depend on thread count.
pub fn sweep_beta_family(
    bx: &BoxDomain,
    families: &[BetaFamily],
    samples: usize,
    seed: u64,
) -> Vec<CheckRecord> {
    let indexed: Vec<(u64, BetaFamily)> = families
        .iter()
        .enumerate()
        .map(|(i, f)| (i as u64, *f))
        .collect();
    par_map(&indexed, |&(stream, f)| {
        beta_checks(bx, &f, samples, seed, stream)
    })
    .into_iter()
    .flatten()
    .collect()
}

fn beta_checks(
    bx: &BoxDomain,
    f: &BetaFamily,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Vec<CheckRecord> {
    let params = json!({
        "alpha": f.alpha, "beta": f.beta, "r": f.r, "s": f.s,
        "a": bx.a(), "b": bx.b(), "c": bx.c(), "d": bx.d(),
        "samples": samples, "seed": seed, "stream": stream,
    });
    let mut out = Vec::with_capacity(4);

    let beta_spec = f.spec(bx);
    let twin_spec = f.three_point_twin().spec(bx);
    let unit_gap = moment_gap(bx, &beta_spec, &twin_spec);
    out.push(
        CheckRecord::new("beta_moments", params.clone())
            .values(twin_spec.var_x, beta_spec.var_x)
            .gap(unit_gap)
            .pass(unit_gap <= EXACT_TOL),
    );

    let bounds = match bounds_all_known(bx, &beta_spec) {
        Ok(b) => b,
        Err(e) => {
            out.push(CheckRecord::new("beta_bounds", params).param("error", e.code()));
            return out;
        }
    };
    let (Ok(dx), Ok(dy)) = (
        Beta::new(f.shapes_x().0, f.shapes_x().1),
        Beta::new(f.shapes_y().0, f.shapes_y().1),
    ) else {
        out.push(CheckRecord::new("beta_sampler", params).param("error", "INVALID_PARAMETER"));
        return out;
    };
    if samples < 2 {
        out.push(CheckRecord::new("beta_sampler", params).param("error", "TOO_FEW_SAMPLES"));
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut xs: Vec<f64> = (0..samples)
        .map(|_| bx.from_unit_x(dx.sample(&mut rng)))
        .collect();
    let mut ys: Vec<f64> = (0..samples)
        .map(|_| bx.from_unit_y(dy.sample(&mut rng)))
        .collect();

    let (cov, sigma) = empirical_cov(&xs, &ys);
    out.push(
        containment(
            "beta_independent",
            params.clone(),
            &bounds,
            cov,
            SIGMAS * sigma,
        )
        .param("sigma", sigma),
    );
    // Sorting both samples gives the empirical comonotone coupling; reversing
    // one of them the antitone one.
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (cov, sigma) = empirical_cov(&xs, &ys);
    out.push(
        containment(
            "beta_comonotone",
            params.clone(),
            &bounds,
            cov,
            SIGMAS * sigma,
        )
        .param("sigma", sigma),
    );
    ys.reverse();
    let (cov, sigma) = empirical_cov(&xs, &ys);
    out.push(
        containment("beta_antitone", params, &bounds, cov, SIGMAS * sigma).param("sigma", sigma),
    );
    out
}

fn moment_gap(bx: &BoxDomain, a: &MomentSpec, b: &MomentSpec) -> f64 {
    let (wx, wy) = (bx.width_x(), bx.width_y());
    let diff = |p: Option<f64>, q: Option<f64>, scale: f64| match (p, q) {
        (Some(p), Some(q)) => ((p - q) / scale).abs(),
        _ => f64::INFINITY,
    };
    diff(a.mean_x, b.mean_x, wx)
        .max(diff(a.mean_y, b.mean_y, wy))
        .max(diff(a.var_x, b.var_x, wx * wx))
        .max(diff(a.var_y, b.var_y, wy * wy))
}

/// Population covariance and the standard error of the mean product.
fn empirical_cov(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let products: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    let cov = products.iter().sum::<f64>() / n;
    let var = products.iter().map(|p| (p - cov) * (p - cov)).sum::<f64>() / (n - 1.0);
    (cov, (var / n).sqrt())
}

fn random_box(rng: &mut ChaCha8Rng) -> BoxDomain {
    let a = rng.random_range(-5.0..5.0);
    let c = rng.random_range(-5.0..5.0);
    let wx = rng.random_range(0.5..5.0);
    let wy = rng.random_range(0.5..5.0);
    BoxDomain::new(a, a + wx, c, c + wy).expect("positive widths")
}

/// Random specs checked against the grid LP: a means-only spec per case,
/// plus a full spec whose variances the grid can realize when
/// `resolution >= 3`.
pub fn lp_suite(cases: usize, resolution: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / (resolution.max(2) - 1) as f64;
    let mut specs = Vec::with_capacity(2 * cases);
    for _ in 0..cases {
        let bx = random_box(&mut rng);
        let alpha = rng.random_range(0.02..0.98);
        let beta = rng.random_range(0.02..0.98);
        specs.push((
            bx,
            MomentSpec::means(bx.from_unit_x(alpha), bx.from_unit_y(beta)),
        ));
        if resolution >= 3 {
            // Any variance in [h^2/4, alpha(1-alpha)] is attainable on the grid.
            let floor = h * h / 4.0 * 1.01;
            let pick = |rng: &mut ChaCha8Rng| loop {
                let m: f64 = rng.random_range(0.02..0.98);
                if m * (1.0 - m) >= 2.0 * floor {
                    let v = floor + rng.random::<f64>() * (m * (1.0 - m) - floor);
                    break (m, v);
                }
            };
            let (ax, vx) = pick(&mut rng);
            let (ay, vy) = pick(&mut rng);
            let (wx, wy) = (bx.width_x(), bx.width_y());
            specs.push((
                bx,
                MomentSpec::full(
                    bx.from_unit_x(ax),
                    bx.from_unit_y(ay),
                    vx * wx * wx,
                    vy * wy * wy,
                ),
            ));
        }
    }
    par_map(&specs, |(bx, spec)| verify_bounds(bx, spec, resolution))
        .into_iter()
        .flatten()
        .map(|rec| rec.param("seed", seed))
        .collect()
}

/// Random three-point families on random boxes.
pub fn three_point_suite(cases: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(BoxDomain, ThreePointFamily)> = (0..cases)
        .map(|_| {
            let bx = random_box(&mut rng);
            let f = ThreePointFamily {
                alpha: rng.random_range(0.01..0.99),
                beta: rng.random_range(0.01..0.99),
                r: rng.random_range(0.0..0.99),
                s: rng.random_range(0.0..0.99),
            };
            (bx, f)
        })
        .collect();
    par_map(&draws, |(bx, f)| three_point_checks(bx, f))
        .into_iter()
        .flatten()
        .map(|rec| rec.param("seed", seed))
        .collect()
}

/// Random beta families on the unit box, `samples` draws each.
pub fn beta_suite(cases: usize, samples: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let families: Vec<BetaFamily> = (0..cases)
        .map(|_| BetaFamily {
            alpha: rng.random_range(0.1..0.9),
            beta: rng.random_range(0.1..0.9),
            r: rng.random_range(0.1..0.9),
            s: rng.random_range(0.1..0.9),
        })
        .collect();
    // Streams 1.. so the family draws above never overlap the samples.
    sweep_beta_family(&BoxDomain::unit(), &families, samples, seed.wrapping_add(1))
        .into_iter()
        .map(|rec| rec.param("suite_seed", seed))
        .collect()
}
