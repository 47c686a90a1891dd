//! Dispatches a parsed [`ExperimentConfig`] to the modules and collects a
//! [`RunReport`]. Case `i` draws from child stream `i` of the seed, so cases
//! are independent and adding a case does not perturb the others.

use num_complex::Complex64;

use crate::classl::{
    classl_factor_check, construct_classl_mixture, selfdecomp_cf_check, uniform_cf, BernoulliLt, CfCheckReport,
    CfFactorOutcome, FactorCheckReport,
};
use crate::config::{
    ClasslSpec, ClasslSubject, Expectation, ExperimentConfig, ExperimentSpec, GridSpec, ScaledLimitSpec, MaxSpec,
    MidCheckSpec, MidFixture, MidSampleSpec, MixtureIdSpec, NsSpec, PgfSpec, SubordinateSpec, SumSpec,
};
use crate::error::{PhimixError, Result};
use crate::id_laws::{mixture_cf, sample_mixture_id, LinnikLaw, StableExponent};
use crate::limits::{ns_family_check, CheckMode, ConvergenceReport, MaxExperiment, Norming, NsFamily, SumExperiment};
use crate::mid::{
    fixtures, frechet_axis, mid_power_check, mixture_mid_df, sample_extremal_at_random_time, support_rectangle_check,
    JointDf, MidLaw, ViolationKind,
};
use crate::mixing::{linspace, MixingKind, MixingLaw};
use crate::pgf::{check_scaled_limit, CountingSpec};
use crate::report::{CheckLine, ConvergenceLine, RunReport, Table, Verdict};
use crate::rng::SeedStream;
use crate::stats::{empirical_cf, empirical_joint_df, kde_mode_count, ks_distance, ks_two_sample};
use crate::subordination::SubordinatedSpec;

/// At most this many located violations are listed per check.
const MAX_LISTED_VIOLATIONS: usize = 10;

/// Runs the experiment on `workers` threads. Errors are configuration or
/// parameter problems; threshold failures are reported in the result.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<RunReport> {
    config.validate()?;
    let stream = SeedStream::new(config.seed);
    let n = config.samples();
    let workers = workers.max(1);
    match &config.spec {
        ExperimentSpec::Pgf(s) => run_pgf(s, n, &stream, workers),
        ExperimentSpec::ScaledLimit(s) => run_scaled_limit(s),
        ExperimentSpec::ConvergeSum(s) => run_sum(s, n, &stream, workers),
        ExperimentSpec::ConvergeMax(s) => run_max(s, n, &stream, workers),
        ExperimentSpec::MidCheck(s) => run_mid_check(s),
        ExperimentSpec::MidSample(s) => run_mid_sample(s, n, &stream, workers),
        ExperimentSpec::MixtureId(s) => run_mixture_id(s, n, &stream, workers),
        ExperimentSpec::Subordinate(s) => run_subordinate(s, n, &stream, workers),
        ExperimentSpec::Classl(s) => run_classl(s, n, &stream, workers),
        ExperimentSpec::NsCheck(s) => run_ns(s),
    }
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn norming_name(n: Norming) -> &'static str {
    match n {
        Norming::Attraction => "attraction",
        Norming::KAdjusted => "k-adjusted",
        Norming::MeanCount => "mean-count",
    }
}

fn ns_name(f: &NsFamily) -> String {
    match f {
        NsFamily::ExpAbs {} => "exp-abs".into(),
        NsFamily::ExpSquare {} => "exp-square".into(),
        NsFamily::Stable { lambda, alpha, beta } => format!("stable(λ={lambda}, α={alpha}, β={beta})"),
        NsFamily::Rational {} => "rational".into(),
    }
}

fn expect_name(e: Expectation) -> &'static str {
    match e {
        Expectation::Valid => "valid",
        Expectation::Invalid => "invalid",
    }
}

fn noise_bound(n: usize, slack: f64) -> f64 {
    3.0 / (n as f64).sqrt() + slack
}

/// Collects failing check rows into failure messages.
fn failing_rows(lines: &[CheckLine], from: usize) -> Vec<String> {
    lines[from..]
        .iter()
        .filter(|l| l.verdict == Verdict::Fail)
        .map(|l| {
            let at = l.point.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            format!(
                "case {} {} at {at}: value {} vs reference {} (error {} > bound {})",
                l.case, l.check, l.value, l.reference, l.abs_error, l.bound
            )
        })
        .collect()
}

fn run_pgf(spec: &PgfSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    let nf = n as f64;
    for (i, case) in spec.cases.iter().enumerate() {
        let start = lines.len();
        let theta = case.counting.theta.expect("validated");
        let fam = case.counting.family(theta)?;
        let draws = stream.child(i as u64).sample(n, workers, |r| fam.sample(r));

        for s in case.s_points() {
            let exact = fam.pgf_eval(s)?;
            let empirical = draws.iter().map(|&k| s.powi(k.min(i32::MAX as u64) as i32)).sum::<f64>() / nf;
            lines.push(CheckLine::within(i, "pgf", vec![s], empirical, exact, 3.0 / nf.sqrt()));
        }

        let table = fam.pmf(case.m_max)?;
        let total = table.probs.iter().sum::<f64>() + table.tail;
        lines.push(CheckLine::within(i, "pmf-total", vec![], total, 1.0, 1e-12));

        if let MixingKind::Exponential { scale } = *case.counting.mixing.kind() {
            // Geometric law on the support: (θ/(θ+σ))·(σ/(θ+σ))^m.
            let p = theta / (theta + scale);
            for (m, &prob) in table.probs.iter().enumerate() {
                let geometric = p * (1.0 - p).powi(m as i32);
                lines.push(CheckLine::within(i, "geometric", vec![table.support[m] as f64], prob, geometric, 1e-12));
            }
        }

        // Simulation vs closed form: 4 binomial standard errors plus one count.
        let stride = case.counting.stride as u64;
        let shift = case.counting.shift as u64;
        let mut counts = vec![0usize; case.m_max + 1];
        let mut tail = 0usize;
        for &d in &draws {
            match counts.get_mut(((d - shift) / stride) as usize) {
                Some(c) => *c += 1,
                None => tail += 1,
            }
        }
        let four_sigma = |p: f64| 4.0 * (p * (1.0 - p) / nf).sqrt() + 1.0 / nf;
        for (m, &prob) in table.probs.iter().enumerate() {
            let freq = counts[m] as f64 / nf;
            lines.push(CheckLine::within(i, "pmf-simulated", vec![table.support[m] as f64], freq, prob, four_sigma(prob)));
        }
        lines.push(CheckLine::within(i, "tail-simulated", vec![], tail as f64 / nf, table.tail, four_sigma(table.tail)));

        let case_failures = failing_rows(&lines, start);
        summary.push(format!(
            "case {i}: {} θ={theta} j={} k={}: {} checks, {}",
            case.counting.mixing.kind().name(),
            case.counting.shift,
            case.counting.stride,
            lines.len() - start,
            verdict_word(case_failures.is_empty())
        ));
        failures.extend(case_failures);
    }
    Ok(RunReport { table: Table::Checks(lines), summary, failures })
}

fn sequence_failures(i: usize, decreasing: bool, final_ok: bool, last: f64, threshold: f64) -> Vec<String> {
    let mut f = Vec::new();
    if !decreasing {
        f.push(format!("case {i}: sup_error is not strictly decreasing in θ"));
    }
    if !final_ok {
        f.push(format!("case {i}: final sup_error {last} is not below threshold {threshold}"));
    }
    f
}

fn fmt_errors(errors: impl Iterator<Item = f64>) -> String {
    errors.map(|e| format!("{e:.6}")).collect::<Vec<_>>().join(", ")
}

fn run_scaled_limit(spec: &ScaledLimitSpec) -> Result<RunReport> {
    let v = spec.v_points();
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (i, c) in spec.cases.iter().enumerate() {
        let r = check_scaled_limit(&c.mixing, c.shift, c.stride, &spec.thetas, &v, spec.threshold)?;
        for row in &r.rows {
            for &(vv, scaled, limit) in &row.points {
                lines.push(ConvergenceLine {
                    case: i,
                    theta: row.theta,
                    grid_point: vec![vv],
                    empirical: Complex64::new(scaled, 0.0),
                    target: Complex64::new(limit, 0.0),
                    sup_error: row.sup_error,
                });
            }
        }
        let last = r.rows.last().map_or(f64::NAN, |r| r.sup_error);
        summary.push(format!(
            "case {i}: {} j={} k={}: sup errors {}: {}",
            c.mixing.kind().name(),
            c.shift,
            c.stride,
            fmt_errors(r.rows.iter().map(|r| r.sup_error)),
            verdict_word(r.pass)
        ));
        failures.extend(sequence_failures(i, r.decreasing, r.final_below_threshold, last, spec.threshold));
    }
    Ok(RunReport { table: Table::Convergence(lines), summary, failures })
}

fn convergence_lines(i: usize, r: &ConvergenceReport, lines: &mut Vec<ConvergenceLine>) {
    for row in &r.rows {
        for v in &row.values {
            lines.push(ConvergenceLine {
                case: i,
                theta: row.theta,
                grid_point: v.point.clone(),
                empirical: v.empirical,
                target: v.target,
                sup_error: row.sup_error,
            });
        }
    }
}

fn convergence_failures(i: usize, r: &ConvergenceReport, threshold: f64, exact: bool) -> Vec<String> {
    let mut f = Vec::new();
    if exact {
        for row in r.rows.iter().filter(|row| row.sup_error >= threshold) {
            f.push(format!("case {i} θ={}: sup_error {} is not below threshold {threshold}", row.theta, row.sup_error));
        }
    } else {
        let last = r.rows.last().map_or(f64::NAN, |row| row.sup_error);
        f.extend(sequence_failures(i, r.decreasing, r.final_below_threshold, last, threshold));
    }
    if r.ks_pass == Some(false) {
        for row in &r.rows {
            if let Some(ks) = row.ks {
                f.push(format!("case {i} θ={}: KS distance {ks} (limit d.f.)", row.theta));
            }
        }
    }
    f
}

fn counting_parts(c: &CountingSpec) -> (MixingLaw, u32, u32) {
    (c.mixing, c.shift, c.stride)
}

fn run_sum(spec: &SumSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (i, c) in spec.cases.iter().enumerate() {
        let (mixing, shift, stride) = counting_parts(&c.counting);
        let threshold = c.threshold.unwrap_or(spec.threshold);
        let exp = SumExperiment {
            mixing,
            shift,
            stride,
            increments: c.increments,
            norming: c.norming,
            thetas: spec.thetas.clone(),
            samples: n,
            grid: spec.grid_points(),
            threshold,
            mode: c.mode,
            ks_threshold: c.ks_threshold,
        };
        let r = exp.run(&stream.child(i as u64), workers)?;
        convergence_lines(i, &r, &mut lines);
        let ks = r
            .rows
            .iter()
            .filter_map(|row| row.ks.map(|k| format!("{k:.5}")))
            .collect::<Vec<_>>()
            .join(", ");
        summary.push(format!(
            "case {i}: {} j={shift} k={stride} {} norming, {} mode: sup errors {}; noise floor {:.6}{}: {}",
            mixing.kind().name(),
            norming_name(c.norming),
            if c.mode == CheckMode::Exact { "exact" } else { "limit" },
            fmt_errors(r.rows.iter().map(|r| r.sup_error)),
            r.noise_floor,
            if ks.is_empty() { String::new() } else { format!("; KS {ks}") },
            verdict_word(r.pass)
        ));
        failures.extend(convergence_failures(i, &r, threshold, c.mode == CheckMode::Exact));
    }
    Ok(RunReport { table: Table::Convergence(lines), summary, failures })
}

fn axes_points(axes: &[GridSpec]) -> Vec<Vec<f64>> {
    axes.iter().map(GridSpec::points).collect()
}

fn run_max(spec: &MaxSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (i, c) in spec.cases.iter().enumerate() {
        let (mixing, shift, stride) = counting_parts(&c.counting);
        let threshold = c.threshold.unwrap_or(spec.threshold);
        let exp = MaxExperiment {
            mixing,
            shift,
            stride,
            axes: c.axes.as_deref().map(axes_points).unwrap_or_else(|| MaxExperiment::default_axes(&c.mid)),
            mid: c.mid.clone(),
            norming: c.norming,
            thetas: spec.thetas.clone(),
            samples: n,
            threshold,
            mode: c.mode,
        };
        let r = exp.run(&stream.child(i as u64), workers)?;
        convergence_lines(i, &r, &mut lines);
        let zero_rate = r.rows.iter().map(|row| row.zero_count_rate).fold(0.0, f64::max);
        summary.push(format!(
            "case {i}: {} j={shift} k={stride} {} norming: sup errors {}; noise floor {:.6}; max N=0 redraw rate {zero_rate:.6}: {}",
            mixing.kind().name(),
            norming_name(c.norming),
            fmt_errors(r.rows.iter().map(|r| r.sup_error)),
            r.noise_floor,
            verdict_word(r.pass)
        ));
        failures.extend(convergence_failures(i, &r, threshold, c.mode == CheckMode::Exact));
    }
    Ok(RunReport { table: Table::Convergence(lines), summary, failures })
}

/// Default grid for a built-in MID law, shifted to its lower corner.
fn default_mid_axes(mid: &MidLaw) -> Vec<Vec<f64>> {
    let base = if mid.is_frechet() { frechet_axis() } else { linspace(0.1, 4.0, 8) };
    mid.lower().iter().map(|l| base.iter().map(|x| x + l).collect()).collect()
}

fn violation_name(kind: ViolationKind) -> String {
    match kind {
        ViolationKind::Range => "range".into(),
        ViolationKind::Monotone { axis } => format!("monotone-axis-{axis}"),
        ViolationKind::RectangleMass => "rectangle-mass".into(),
    }
}

fn run_mid_check(spec: &MidCheckSpec) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (i, c) in spec.cases.iter().enumerate() {
        let (subject, name, default_axes): (Box<dyn JointDf>, String, Vec<Vec<f64>>) = match (&c.mid, c.fixture) {
            (Some(m), _) => {
                let name = if m.is_frechet() { "product-frechet" } else { "product-exponential" };
                (Box::new(m.clone()), name.into(), default_mid_axes(m))
            }
            (None, Some(MidFixture::Countermonotone)) => {
                (Box::new(fixtures::Countermonotone), "countermonotone".into(), fixtures::grid())
            }
            (None, Some(MidFixture::TwoAtom)) => (Box::new(fixtures::TwoAtom), "two-atom".into(), fixtures::grid()),
            (None, None) => unreachable!("validated"),
        };
        let axes = c.axes.as_deref().map(axes_points).unwrap_or(default_axes);
        let power = mid_power_check(subject.as_ref(), &c.s_list, &axes, spec.tol)?;
        let rect = support_rectangle_check(subject.as_ref(), &axes);
        let info = |check: String, point: Vec<f64>, value: f64| CheckLine {
            case: i,
            check,
            point,
            value,
            reference: 0.0,
            abs_error: value.abs(),
            bound: spec.tol,
            verdict: Verdict::Info,
        };
        lines.push(info("power-check-violations".into(), vec![], power.violations.len() as f64));
        for v in power.violations.iter().take(MAX_LISTED_VIOLATIONS) {
            lines.push(info(format!("violation {} s={}", violation_name(v.kind), v.s), v.at.clone(), v.value));
        }
        lines.push(info("rectangle-check-mismatches".into(), vec![], rect.mismatches.len() as f64));
        for at in rect.mismatches.iter().take(MAX_LISTED_VIOLATIONS) {
            lines.push(info("rectangle-mismatch".into(), at.clone(), subject.df(at)));
        }
        let valid = power.pass && rect.pass;
        let ok = match c.expect {
            Expectation::Valid => valid,
            Expectation::Invalid => !power.pass && !rect.pass,
        };
        summary.push(format!(
            "case {i}: {name}: {} power violations over {} points, {} rectangle mismatches; expected {}: {}",
            power.violations.len(),
            power.points_checked,
            rect.mismatches.len(),
            expect_name(c.expect),
            verdict_word(ok)
        ));
        if !ok {
            failures.push(format!(
                "case {i}: {name} expected {} but power check pass={} and rectangle check pass={}",
                expect_name(c.expect), power.pass, rect.pass
            ));
        }
    }
    Ok(RunReport { table: Table::Checks(lines), summary, failures })
}

fn run_mid_sample(spec: &MidSampleSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (i, c) in spec.cases.iter().enumerate() {
        let start = lines.len();
        let axes = c.axes.as_deref().map(axes_points).unwrap_or_else(|| default_mid_axes(&c.mid));
        if axes.len() != c.mid.dim() {
            return Err(PhimixError::Config(format!("case {i}: {} axes for a {}-dimensional law", axes.len(), c.mid.dim())));
        }
        let flat: Vec<f64> = stream
            .child(i as u64)
            .sample(n, workers, |r| sample_extremal_at_random_time(&c.mixing, &c.mid, r))
            .into_iter()
            .flatten()
            .collect();
        let mut sup = 0.0f64;
        crate::mid::for_each_index(&axes, |idx| {
            let x: Vec<f64> = idx.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
            let target = mixture_mid_df(&c.mixing, &c.mid, &x);
            let line = CheckLine::within(i, "joint-df", x.clone(), empirical_joint_df(&flat, &x), target, spec.threshold);
            sup = sup.max(line.abs_error);
            lines.push(line);
        });
        for spot in &c.spots {
            let target = mixture_mid_df(&c.mixing, &c.mid, &spot.at);
            lines.push(CheckLine::within(i, "spot-target", spot.at.clone(), target, spot.value, 1e-12));
            let emp = empirical_joint_df(&flat, &spot.at);
            lines.push(CheckLine::within(i, "spot-empirical", spot.at.clone(), emp, spot.value, spec.threshold));
        }
        let case_failures = failing_rows(&lines, start);
        summary.push(format!(
            "case {i}: {} mixing: sup joint d.f. distance {sup:.6} over {} points: {}",
            c.mixing.kind().name(),
            lines.len() - start - 2 * c.spots.len(),
            verdict_word(case_failures.is_empty())
        ));
        failures.extend(case_failures);
    }
    Ok(RunReport { table: Table::Checks(lines), summary, failures })
}

fn cf_line(case: usize, check: &str, t: f64, empirical: Complex64, target: Complex64, bound: f64) -> CheckLine {
    let abs_error = (empirical - target).norm();
    CheckLine {
        case,
        check: check.into(),
        point: vec![t],
        value: empirical.re,
        reference: target.re,
        abs_error,
        bound,
        verdict: Verdict::from_bool(abs_error <= bound),
    }
}

/// Laplace d.f. when the mixture is exponential-in-time Gaussian: `Z ~ Exp(σ)`
/// (or gamma with unit shape) and `ψ = λt²` give `CF = 1/(1 + σλt²)`.
fn laplace_df(mixing: &MixingLaw, id: &StableExponent) -> Option<impl Fn(f64) -> f64> {
    let sigma = match *mixing.kind() {
        MixingKind::Exponential { scale } => scale,
        MixingKind::Gamma { shape: 1.0, scale } => scale,
        _ => return None,
    };
    if id.alpha() != 2.0 || id.beta() != 0.0 {
        return None;
    }
    let b = (sigma * id.lambda()).sqrt();
    Some(move |x: f64| if x < 0.0 { 0.5 * (x / b).exp() } else { 1.0 - 0.5 * (-x / b).exp() })
}

fn run_mixture_id(spec: &MixtureIdSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    let grid = spec.grid_points();
    let bound = noise_bound(n, spec.cf_slack);
    for (i, c) in spec.cases.iter().enumerate() {
        let start = lines.len();
        let sampler = c.id.sampler()?;
        let xs = stream.child(i as u64).sample(n, workers, |r| sample_mixture_id(&c.mixing, &sampler, r));
        let mut sup = 0.0f64;
        for &t in &grid {
            let line = cf_line(i, "cf", t, empirical_cf(&xs, t), mixture_cf(&c.mixing, &c.id, t)?, bound);
            sup = sup.max(line.abs_error);
            lines.push(line);
        }
        let mut ks_note = String::new();
        if let Some(f) = laplace_df(&c.mixing, &c.id) {
            let d = ks_distance(&xs, f);
            lines.push(CheckLine::within(i, "ks-laplace", vec![], d, 0.0, spec.ks_threshold));
            ks_note = format!("; KS vs Laplace {d:.5}");
        }
        let case_failures = failing_rows(&lines, start);
        summary.push(format!(
            "case {i}: {} mixing, α={} β={} λ={}: sup CF distance {sup:.6} (bound {bound:.6}){ks_note}: {}",
            c.mixing.kind().name(),
            c.id.alpha(),
            c.id.beta(),
            c.id.lambda(),
            verdict_word(case_failures.is_empty())
        ));
        failures.extend(case_failures);
    }
    Ok(RunReport { table: Table::Checks(lines), summary, failures })
}

fn run_subordinate(spec: &SubordinateSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    let grid = spec.grid_points();
    let bound = noise_bound(n, spec.cf_slack);
    for (i, c) in spec.cases.iter().enumerate() {
        let start = lines.len();
        let sub = SubordinatedSpec::new(c.base, c.directing, c.times.clone())?;
        let case_stream = stream.child(i as u64);
        let paths = case_stream.child(0).sample(n, workers, |r| sub.sample_path(r));
        let mut sups = Vec::new();
        for (k, &time) in sub.times().iter().enumerate() {
            let xs: Vec<f64> = paths.iter().map(|p| p[k]).collect();
            let mut sup = 0.0f64;
            for &t in &grid {
                let line = cf_line(i, &format!("cf time={time}"), t, empirical_cf(&xs, t), sub.cf(time, t)?, bound);
                sup = sup.max(line.abs_error);
                lines.push(line);
            }
            sups.push(format!("{sup:.6}"));
        }
        let mut ks_note = String::new();
        if let Some(k) = sub.times().iter().position(|&t| t == 1.0) {
            let ends: Vec<f64> = paths.iter().map(|p| p[k]).collect();
            let sampler = c.base.sampler()?;
            let direct = case_stream.child(1).sample(n, workers, |r| sample_mixture_id(&c.directing, &sampler, r));
            let ks = ks_two_sample(&ends, &direct);
            lines.push(CheckLine {
                case: i,
                check: "ks-two-sample-p-value time=1".into(),
                point: vec![1.0],
                value: ks.p_value,
                reference: spec.ks_level,
                abs_error: ks.statistic,
                bound: spec.ks_level,
                verdict: Verdict::from_bool(ks.p_value > spec.ks_level),
            });
            ks_note = format!("; two-sample KS at t=1: D={:.5}, p={:.4}", ks.statistic, ks.p_value);
        }
        let case_failures = failing_rows(&lines, start);
        summary.push(format!(
            "case {i}: {} clock: sup CF distance per time [{}] (bound {bound:.6}){ks_note}: {}",
            c.directing.kind().name(),
            sups.join(", "),
            verdict_word(case_failures.is_empty())
        ));
        failures.extend(case_failures);
    }
    Ok(RunReport { table: Table::Checks(lines), summary, failures })
}

fn factor_lines(i: usize, r: &FactorCheckReport, tol: f64, lines: &mut Vec<CheckLine>) {
    for row in &r.rows {
        lines.push(CheckLine {
            case: i,
            check: format!("lt-factor-cm c={} orders={:?}", row.c, row.report.failing_orders),
            point: row.report.worst_at.into_iter().collect(),
            value: row.report.worst_violation,
            reference: 0.0,
            abs_error: row.report.worst_violation,
            bound: tol,
            verdict: Verdict::from_bool(row.report.pass),
        });
    }
}

fn cf_check_lines(i: usize, r: &CfCheckReport, tol: f64, lines: &mut Vec<CheckLine>) {
    for row in &r.rows {
        let line = match &row.outcome {
            CfFactorOutcome::Checked { toeplitz, max_modulus } => CheckLine {
                case: i,
                check: format!("cf-factor-psd c={} max|g|={max_modulus}", row.c),
                point: vec![],
                value: toeplitz.min_eigenvalue,
                reference: 0.0,
                abs_error: (-toeplitz.min_eigenvalue).max(0.0),
                bound: tol,
                verdict: Verdict::from_bool(row.pass),
            },
            CfFactorOutcome::RealZero { t } => CheckLine {
                case: i,
                check: format!("cf-real-zero c={}", row.c),
                point: vec![*t],
                value: 0.0,
                reference: 0.0,
                abs_error: 0.0,
                bound: tol,
                verdict: Verdict::Fail,
            },
        };
        lines.push(line);
    }
}

fn run_classl(spec: &ClasslSpec, n: usize, stream: &SeedStream, workers: usize) -> Result<RunReport> {
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    let (c_grid, s_grid, t_grid) = (spec.c_points(), spec.s_points(), spec.t_points());
    let tol = spec.tol;
    for (i, case) in spec.cases.iter().enumerate() {
        let (name, valid) = match &case.subject {
            ClasslSubject::Mixing { mixing } => {
                let r = classl_factor_check(mixing, &c_grid, &s_grid, tol)?;
                factor_lines(i, &r, tol, &mut lines);
                (format!("{} LT factor check", mixing.kind().name()), r.pass)
            }
            ClasslSubject::BernoulliLt {} => {
                let r = classl_factor_check(&BernoulliLt, &c_grid, &s_grid, tol)?;
                factor_lines(i, &r, tol, &mut lines);
                ("Bernoulli-scaled LT factor check".into(), r.pass)
            }
            ClasslSubject::Linnik { lambda, alpha, beta, nu, unimodality } => {
                let law = LinnikLaw::new(*lambda, *alpha, *beta, *nu)?;
                let r = selfdecomp_cf_check(|t| law.cf(t), &c_grid, &t_grid, tol)?;
                cf_check_lines(i, &r, tol, &mut lines);
                if *unimodality {
                    let sampler = law.exponent().sampler()?;
                    let mixing = law.mixing();
                    let xs = stream.child(i as u64).sample(n, workers, |r| sample_mixture_id(&mixing, &sampler, r));
                    let modes = kde_mode_count(&xs, 200);
                    lines.push(CheckLine {
                        case: i,
                        check: "kde-modes".into(),
                        point: vec![],
                        value: modes as f64,
                        reference: 1.0,
                        abs_error: (modes as f64 - 1.0).abs(),
                        bound: 0.0,
                        verdict: if modes == 1 { Verdict::Pass } else { Verdict::Warn },
                    });
                }
                (format!("Linnik(λ={lambda}, α={alpha}, β={beta}, ν={nu}) CF check"), r.pass)
            }
            ClasslSubject::Gaussian { lambda } => {
                let r = selfdecomp_cf_check(|t| Complex64::new((-lambda * t * t).exp(), 0.0), &c_grid, &t_grid, tol)?;
                cf_check_lines(i, &r, tol, &mut lines);
                (format!("Gaussian(λ={lambda}) CF check"), r.pass)
            }
            ClasslSubject::UniformCf {} => {
                let r = selfdecomp_cf_check(uniform_cf, &c_grid, &t_grid, tol)?;
                cf_check_lines(i, &r, tol, &mut lines);
                ("uniform(-1, 1) CF check".into(), r.pass)
            }
            ClasslSubject::Mixture { mixing, id } => {
                let name = format!("{} mixture of stable(α={}) CF check", mixing.kind().name(), id.alpha());
                match construct_classl_mixture(*mixing, *id) {
                    Ok(m) => {
                        let r = selfdecomp_cf_check(|t| m.cf(t), &c_grid, &t_grid, tol)?;
                        cf_check_lines(i, &r, tol, &mut lines);
                        (name, r.pass)
                    }
                    Err(PhimixError::NotClassL { c, worst_violation }) => {
                        lines.push(CheckLine {
                            case: i,
                            check: format!("construct c={c}"),
                            point: vec![],
                            value: worst_violation,
                            reference: 0.0,
                            abs_error: worst_violation,
                            bound: tol,
                            verdict: Verdict::Fail,
                        });
                        (name, false)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let ok = valid == (case.expect == Expectation::Valid);
        summary.push(format!(
            "case {i}: {name}: {}; expected {}: {}",
            if valid { "passes" } else { "fails" },
            expect_name(case.expect),
            verdict_word(ok)
        ));
        if !ok {
            failures.push(format!("case {i}: {name} expected {} but the check {}", expect_name(case.expect), if valid { "passed" } else { "failed" }));
        }
    }
    Ok(RunReport { table: Table::Checks(lines), summary, failures })
}

fn run_ns(spec: &NsSpec) -> Result<RunReport> {
    let t = spec.t_points();
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (i, c) in spec.cases.iter().enumerate() {
        let r = ns_family_check(&c.family, &spec.thetas, &t, spec.threshold)?;
        for row in &r.rows {
            for v in &row.values {
                lines.push(ConvergenceLine {
                    case: i,
                    theta: row.theta,
                    grid_point: v.point.clone(),
                    empirical: v.empirical,
                    target: v.target,
                    sup_error: row.sup_error,
                });
            }
        }
        let last = r.rows.last().map_or(f64::NAN, |r| r.sup_error);
        summary.push(format!(
            "case {i}: {}: sup errors {}: {}",
            ns_name(&c.family),
            fmt_errors(r.rows.iter().map(|r| r.sup_error)),
            verdict_word(r.pass)
        ));
        failures.extend(sequence_failures(i, r.decreasing, r.final_below_threshold, last, spec.threshold));
    }
    Ok(RunReport { table: Table::Convergence(lines), summary, failures })
}
