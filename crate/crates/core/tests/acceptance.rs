//! Acceptance criteria 1-11. Runs without the libtest harness so each
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any failure.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use padic_bessel::battery::standard_battery;
use padic_bessel::green_function::{green_bounds_certify, green_delta_residual, green_g, GreenParams};
use padic_bessel::heat_kernel::{cauchy_solve, grid_mass, heat_z, mass_evolution, nonpositivity_certify, HeatQuery};
use padic_bessel::oracle_grid::{
    compare_suite, oracle_kernel_value, oracle_setup, point_with_norm, sphere_character_sum, OracleMode,
};
use padic_bessel::padic_core::{
    unit_sphere_char_integral, FiniteGrid, NormExponent, PadicRational, PadicVector, PrimeDim,
};
use padic_bessel::radial_transform::{kernel_k, kernel_mass, GreenProfile, HeatProfile, SymbolProfile, TestFunction};
use padic_bessel::semigroup_measures::{
    delta_limit_scan, grid_samples, kernel_grid_mass, probability_verdict, symbol_semigroup_identity,
};
use padic_bessel::symbol_algebra::{
    parse_symbol_spec, BesselSymbol, ProfileTable, RadialSpec, TableDefault, TowerTerm,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

const TOL: f64 = 1e-12;

fn dims(p: u32, n: u32) -> PrimeDim {
    PrimeDim::new(p, n).unwrap()
}

fn all_dims() -> Vec<PrimeDim> {
    [(2, 1), (2, 2), (3, 1), (3, 2)].iter().map(|&(p, n)| dims(p, n)).collect()
}

fn worked() -> BesselSymbol {
    BesselSymbol::parse("const:1", "power:a=1,b=2", 1.0, dims(2, 1)).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn sphere_formula() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in all_dims() {
        let ones = PadicVector::from_integers(d.p(), &vec![1; d.n() as usize]);
        for x0 in [PadicVector::with_norm(d, 0), ones] {
            for j in -3..=4 {
                let exact = unit_sphere_char_integral(j, d);
                let brute = sphere_character_sum(d, j, &x0, j.max(1) as u32).map_err(e)?;
                worst = worst.max((exact - brute).abs());
                count += 1;
                ensure((exact - brute).abs() <= 1e-10, || {
                    format!("p={} n={} j={j}: formula {exact} vs sum {brute}", d.p(), d.n())
                })?;
            }
        }
    }
    Ok(format!("{count} sums, worst difference {worst:.2e}"))
}

/// `S(ρ) = max(1, ρ²)^{-1}` summed shell by shell, without the library.
fn worked_kernel_closed_form(gamma: i32) -> f64 {
    let s = |k: i32| 1.0 / 1f64.max(4f64.powi(k));
    let mut sum = 0.0;
    for j in 0..400 {
        sum += 0.5 * 0.5f64.powi(j) * s(-gamma - j);
    }
    2f64.powi(-gamma) * (sum - s(-gamma + 1))
}

fn kernel_golden() -> Outcome {
    let grid = FiniteGrid::new(dims(2, 1), 4, 4).map_err(e)?;
    let profile = SymbolProfile(worked());
    let mut notes = Vec::new();
    for (gamma, golden) in [(0, 0.75), (1, 0.0), (-1, 1.125)] {
        let closed = worked_kernel_closed_form(gamma);
        let k = kernel_k(&worked(), NormExponent::Finite(gamma), TOL).map_err(e)?;
        ensure((closed - golden).abs() <= TOL, || format!("closed form at {gamma} is {closed}"))?;
        ensure((k.value - closed).abs() <= TOL, || format!("K({gamma}) = {} vs {closed}", k.value))?;
        let x = point_with_norm(&grid.dual(), gamma).map_err(e)?;
        let o = oracle_kernel_value(&profile, &x, &grid, OracleMode::Direct).map_err(e)?;
        let diff = (o.value - Complex64::new(k.value, 0.0)).norm();
        ensure(diff <= k.tail_bound + o.estimate, || {
            format!("oracle at {gamma}: {} vs {}, allowed {}", o.value, k.value, k.tail_bound + o.estimate)
        })?;
        notes.push(format!("K({gamma})={}", k.value));
    }
    Ok(notes.join(", "))
}

fn oracle_battery() -> Outcome {
    struct Case {
        label: String,
        dims: PrimeDim,
        symbol: BesselSymbol,
        kind: u8,
        gamma: i32,
    }
    let mut cases = Vec::new();
    for d in all_dims() {
        for (i, s) in standard_battery(d).map_err(e)?.into_iter().enumerate() {
            for gamma in -6..=6 {
                for (kind, name) in [(0u8, "K"), (1, "G"), (2, "Z")] {
                    cases.push(Case {
                        label: format!("{name} p={} n={} symbol#{i} gamma={gamma}", d.p(), d.n()),
                        dims: d,
                        symbol: s.clone(),
                        kind,
                        gamma,
                    });
                }
            }
        }
    }
    let report = compare_suite(
        &cases,
        |c| c.label.clone(),
        |c| {
            let at = NormExponent::Finite(c.gamma);
            match c.kind {
                0 => kernel_k(&c.symbol, at, TOL),
                1 => green_g(&GreenParams::new(c.symbol.clone(), 1.0)?, at, TOL),
                _ => heat_z(&HeatQuery::new(c.symbol.clone(), 1.0)?, at, TOL),
            }
        },
        |c| {
            let (grid, x) = oracle_setup(c.dims, c.gamma, 2)?;
            match c.kind {
                0 => oracle_kernel_value(&SymbolProfile(c.symbol.clone()), &x, &grid, OracleMode::Auto),
                1 => {
                    oracle_kernel_value(&GreenProfile { symbol: c.symbol.clone(), m: 1.0 }, &x, &grid, OracleMode::Auto)
                }
                _ => {
                    oracle_kernel_value(&HeatProfile { symbol: c.symbol.clone(), t: 1.0 }, &x, &grid, OracleMode::Auto)
                }
            }
        },
    );
    if let Some(bad) = report.cases.iter().find(|c| !c.pass) {
        return Err(format!(
            "{}: diff {:.3e} allowed {:.3e} {}",
            bad.case,
            bad.diff,
            bad.allowed,
            bad.error.clone().unwrap_or_default()
        ));
    }
    Ok(format!("{} comparisons, worst margin {:.3e}", report.cases.len(), report.worst_margin))
}

fn semigroup() -> Outcome {
    let d = dims(2, 1);
    let grid = FiniteGrid::new(d, 4, 4).map_err(e)?;
    let gammas: Vec<i32> = (-3..=3).collect();
    let (mut fourier, mut physical): (f64, f64) = (0.0, 0.0);
    for s in standard_battery(d).map_err(e)? {
        for (a1, a2) in [(1.0, 1.0), (0.5, 1.5), (2.0, 3.0)] {
            let r = symbol_semigroup_identity(&s, a1, a2, &gammas, &grid).map_err(e)?;
            fourier = fourier.max(r.fourier_residual);
            physical = physical.max(r.physical_residual);
            ensure(r.fourier_residual <= 1e-14, || {
                format!("{s} ({a1},{a2}): Fourier residual {}", r.fourier_residual)
            })?;
            if let Some(row) = r.rows.iter().find(|row| !row.pass) {
                return Err(format!("{s} ({a1},{a2}) gamma={}: {} > {}", row.gamma, row.residual, row.allowed));
            }
        }
    }
    Ok(format!("Fourier residual {fourier:.1e}, physical residual {physical:.1e}"))
}

fn mass_and_probability() -> Outcome {
    let mut probabilities = 0;
    for d in all_dims() {
        let grid = FiniteGrid::new(d, 2, 3).map_err(e)?;
        for s in standard_battery(d).map_err(e)? {
            let c = match s.psi1() {
                RadialSpec::Constant { c } => *c,
                other => return Err(format!("unexpected psi1 {other}")),
            };
            let expect = c.powf(-s.alpha());
            let mass = kernel_mass(&s).map_err(e)?;
            ensure((mass - expect).abs() <= TOL, || format!("{s}: mass {mass} vs {expect}"))?;
            let gm = kernel_grid_mass(&s, &grid, TOL).map_err(e)?;
            ensure((gm.mass - expect).abs() <= gm.estimate, || {
                format!("{s} p={} n={}: grid mass {} vs {expect} (estimate {})", d.p(), d.n(), gm.mass, gm.estimate)
            })?;
            if c == 1.0 {
                let v = probability_verdict(&s).map_err(e)?;
                ensure(v.is_probability && v.positivity.passed, || {
                    format!("{s}: verdict {} positivity min {}", v.is_probability, v.positivity.min_value)
                })?;
                probabilities += 1;
            }
        }
    }
    Ok(format!("16 masses agree with the grid, {probabilities} probability measures certified"))
}

fn green_bounds() -> Outcome {
    let mut worst = f64::INFINITY;
    for d in all_dims() {
        for s in standard_battery(d).map_err(e)? {
            for m in [0.5, 1.0, 2.0] {
                let params = GreenParams::new(s.clone(), m).map_err(e)?;
                let r = green_bounds_certify(&params, -10..=10).map_err(e)?;
                worst = worst.min(r.min_margin);
                if let Some(row) = r.rows.iter().find(|row| !row.pass) {
                    return Err(format!(
                        "{s} m={m} p={} n={} gamma={}: normalized {} outside [-{}, {}]",
                        d.p(),
                        d.n(),
                        row.gamma,
                        row.normalized,
                        r.k1,
                        r.k2
                    ));
                }
            }
        }
    }
    let g = green_g(&GreenParams::new(worked(), 1.0).map_err(e)?, NormExponent::Finite(0), TOL).map_err(e)?;
    ensure((g.value + 0.3).abs() <= TOL, || format!("G(0) = {}", g.value))?;
    Ok(format!("48 families, smallest margin {worst:.3e}, G(0) = {}", g.value))
}

fn green_delta() -> Outcome {
    let d = dims(2, 1);
    let grid = FiniteGrid::new(d, 4, 4).map_err(e)?;
    let one = Complex64::new(1.0, 0.0);
    let quarter = PadicVector(vec![PadicRational::new(2, 1, 2)]);
    let phis = [
        TestFunction::unit_ball(d),
        TestFunction::ball(d, quarter.clone(), -1, one).map_err(e)?,
        TestFunction::ball(d, PadicVector::zero(d), -2, Complex64::new(2.0, 0.0)).map_err(e)?,
        TestFunction::ball(d, PadicVector::from_integers(2, &[3]), 2, one).map_err(e)?,
        TestFunction::unit_ball(d)
            .with_ball(quarter, -1, Complex64::new(0.5, -1.5))
            .map_err(e)?
            .with_ball(PadicVector::with_norm(d, -1), -3, Complex64::new(-2.0, 0.0))
            .map_err(e)?,
    ];
    let mut worst: f64 = 0.0;
    for s in [worked(), BesselSymbol::parse("const:2", "power:a=1,b=1", 0.5, d).map_err(e)?] {
        let params = GreenParams::new(s.clone(), 1.0).map_err(e)?;
        for (i, phi) in phis.iter().enumerate() {
            let r = green_delta_residual(&params, phi, &grid, TOL).map_err(e)?;
            worst = worst.max(r.residual);
            ensure(r.residual <= 1e-6, || format!("{s} phi#{i}: residual {}", r.residual))?;
        }
    }
    Ok(format!("5 test functions x 2 symbols, worst residual {worst:.2e}"))
}

fn heat_nonpositive() -> Outcome {
    let mut max_value = f64::NEG_INFINITY;
    for d in all_dims() {
        for s in standard_battery(d).map_err(e)? {
            let r = nonpositivity_certify(&s, -10..=10, &[0.1, 1.0, 10.0], false).map_err(e)?;
            max_value = max_value.max(r.max_value);
            ensure(r.outside > 0 && r.boundary > 0 && r.inside > 0, || {
                format!("{s}: case groups {} {} {}", r.outside, r.boundary, r.inside)
            })?;
            if let Some(row) = r.rows.iter().find(|row| !row.pass) {
                return Err(format!("{s} gamma={} t={}: Z = {}", row.gamma, row.t, row.value.value));
            }
        }
    }
    let z = heat_z(&HeatQuery::new(worked(), 1.0).map_err(e)?, NormExponent::Finite(0), TOL).map_err(e)?;
    let golden = (-1f64).exp() - (-0.25f64).exp();
    ensure((z.value - golden).abs() <= TOL, || format!("Z(1, 0) = {} vs {golden}", z.value))?;
    Ok(format!("largest Z over 16 families is {max_value:.3e}; Z(1, 0) = {}", z.value))
}

fn cauchy() -> Outcome {
    let d = dims(2, 1);
    let grid = FiniteGrid::new(d, 3, 3).map_err(e)?;
    let u0 = TestFunction::unit_ball(d);
    let samples = grid_samples(&grid).map_err(e)?;
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for x in &samples {
            let u = cauchy_solve(&worked(), &u0, x, t).map_err(e)?;
            let inside = match x.norm_exponent() {
                NormExponent::Zero => true,
                NormExponent::Finite(g) => g <= 0,
            };
            let expect = if inside { (-t).exp() } else { 0.0 };
            ensure((u - Complex64::new(expect, 0.0)).norm() <= TOL, || format!("t={t} x={x:?}: {u}"))?;
        }
    }
    let mixed = TestFunction::ball(d, PadicVector::with_norm(d, 2), -1, Complex64::new(0.5, 2.0))
        .map_err(e)?
        .with_ball(PadicVector::zero(d), 1, Complex64::new(-1.0, 0.0))
        .map_err(e)?;
    for f in [&u0, &mixed] {
        for x in &samples {
            ensure(cauchy_solve(&worked(), f, x, 0.0).map_err(e)? == f.eval(x), || format!("t=0 at {x:?}"))?;
        }
    }
    let real = TestFunction::ball(d, PadicVector::with_norm(d, 2), -1, Complex64::new(3.0, 0.0))
        .map_err(e)?
        .with_ball(PadicVector::zero(d), 1, Complex64::new(-1.0, 0.0))
        .map_err(e)?;
    let other = BesselSymbol::parse("const:2", "power:a=1,b=1", 0.5, d).map_err(e)?;
    let mut worst: f64 = 0.0;
    for s in [worked(), other] {
        for f in [&u0, &real] {
            for t in [0.0, 0.3, 1.0, 4.0] {
                let exact = mass_evolution(&s, f, t).map_err(e)?;
                let expect = (-t * s.at_origin().map_err(e)?).exp() * f.integral().re;
                let on_grid = grid_mass(&s, f, t, &grid).map_err(e)?;
                worst = worst.max((exact - on_grid).abs());
                ensure((exact - expect).abs() <= TOL && (exact - on_grid).abs() <= 1e-8, || {
                    format!("{s} t={t}: mass {exact}, formula {expect}, grid {on_grid}")
                })?;
            }
        }
    }
    Ok(format!("closed form holds on {} points; mass agreement {worst:.1e}", samples.len()))
}

fn delta_limit() -> Outcome {
    let d = dims(2, 1);
    let samples = grid_samples(&FiniteGrid::new(d, 3, 3).map_err(e)?).map_err(e)?;
    let s = BesselSymbol::parse("const:2", "power:a=1,b=2", 1.0, d).map_err(e)?;
    let phi =
        TestFunction::unit_ball(d).with_ball(PadicVector::with_norm(d, 2), -1, Complex64::new(-0.5, 0.0)).map_err(e)?;
    let r = delta_limit_scan(&s, &phi, &[1e-2, 1e-4, 1e-6], &samples).map_err(e)?;
    let devs: Vec<String> = r.rows.iter().map(|(_, v)| format!("{v:.3e}")).collect();
    ensure(r.strictly_decreasing, || format!("deviations not strictly decreasing: {devs:?}"))?;
    ensure(r.rows[2].1 <= 1e-5, || format!("final deviation {}", r.rows[2].1))?;
    Ok(format!("deviations {}", devs.join(", ")))
}

fn random_value(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    match rng.gen_range(0..3) {
        0 => rng.gen_range(lo..hi),
        1 => (rng.gen_range(lo..hi) * 1000.0).round() / 1000.0,
        _ => {
            let v = rng.gen_range(lo..hi);
            v * 10f64.powi(rng.gen_range(-20..20))
        }
    }
}

fn random_table(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ProfileTable {
    let mut entries = BTreeMap::new();
    for _ in 0..rng.gen_range(1..6) {
        entries.insert(rng.gen_range(-300..300), random_value(rng, lo, hi).clamp(lo, hi));
    }
    ProfileTable::new(entries).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng) -> RadialSpec {
    let positive = |rng: &mut ChaCha8Rng| random_value(rng, 1e-3, 50.0);
    match rng.gen_range(0..5) {
        0 => RadialSpec::Constant { c: if rng.gen_bool(0.1) { 0.0 } else { positive(rng) } },
        1 => RadialSpec::Power { a: positive(rng), b: positive(rng) },
        2 => {
            let mut terms: Vec<TowerTerm> = (0..rng.gen_range(1..4))
                .map(|_| TowerTerm {
                    coeff: if rng.gen_bool(0.2) { 0.0 } else { positive(rng) },
                    degree: rng.gen_range(1..6),
                })
                .collect();
            terms[0].coeff = positive(rng);
            RadialSpec::ExpTower { height: rng.gen_range(1..=16), terms }
        }
        3 => RadialSpec::OneMinusJHat { jhat: random_table(rng, -1.0, 1.0) },
        _ => RadialSpec::Table {
            table: random_table(rng, -100.0, 100.0),
            default: if rng.gen_bool(0.5) {
                TableDefault::Hold
            } else {
                TableDefault::Value(random_value(rng, -5.0, 5.0))
            },
        },
    }
}

fn parser() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..1000 {
        let spec = random_spec(&mut rng);
        let text = spec.to_string();
        let back = parse_symbol_spec(&text).map_err(|err| format!("#{i} {text:?}: {err}"))?;
        ensure(back == spec, || format!("#{i} {text:?} parsed to {back:?}"))?;
        ensure(back.to_string() == text, || format!("#{i} {text:?} printed back as {back}"))?;
    }
    let malformed: [(&str, usize, &str); 20] = [
        ("", 0, "const:"),
        ("cosnt:1", 0, "power:"),
        ("const:", 6, "number"),
        ("const:-1", 6, "non-negative number"),
        ("const:1x", 7, "end of input"),
        ("const:1.", 8, "digit"),
        ("const:1e", 8, "digit"),
        ("power:a=-1,b=2", 8, "positive number"),
        ("power:a=1;b=2", 9, ",b="),
        ("power:a=1,b=0", 12, "positive number"),
        ("power:b=1,a=2", 6, "a="),
        ("tower:j=0;terms=1*y^1", 8, "tower height in 1..=16"),
        ("tower:j=17;terms=1*y^1", 8, "tower height in 1..=16"),
        ("tower:j=1;terms=1*y^0", 20, "positive integer"),
        ("tower:j=1;terms=0*y^1", 16, "at least one positive coefficient"),
        ("tower:j=1;terms=1*x^1", 17, "*y^"),
        ("oneminusjhat:table=0:1.5", 21, "value in [-1, 1]"),
        ("oneminusjhat:table=0:1,0:0", 23, "distinct exponent"),
        ("table:0:1,1:2", 13, ";default="),
        ("table:0:1;default=maybe", 18, "hold"),
    ];
    for (text, offset, expected) in malformed {
        match parse_symbol_spec(text) {
            Ok(spec) => return Err(format!("{text:?} was accepted as {spec:?}")),
            Err(err) => ensure(err.offset == offset && err.expected.iter().any(|x| x == expected), || {
                format!("{text:?}: got {err}, wanted offset {offset} expecting {expected}")
            })?,
        }
    }
    Ok("1000 round trips, 20 malformed inputs located".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("sphere formula vs exhaustive character sums", sphere_formula, Some(Duration::from_secs(10))),
        ("kernel golden values", kernel_golden, Some(Duration::from_secs(5))),
        ("oracle equivalence battery", oracle_battery, Some(Duration::from_secs(300))),
        ("semigroup identity", semigroup, None),
        ("mass and probability", mass_and_probability, None),
        ("Green function bounds", green_bounds, None),
        ("Green function delta identity", green_delta, None),
        ("heat kernel non-positivity", heat_nonpositive, None),
        ("Cauchy problem", cauchy, None),
        ("delta limit", delta_limit, None),
        ("spec parser", parser, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > *limit {
                outcome = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {:>2} [PASS] {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} [FAIL] {name} ({elapsed:.2?}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
