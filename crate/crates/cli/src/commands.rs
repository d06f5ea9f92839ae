//! The five subcommands. Each returns its reports; the caller maps them to an
//! exit code.

use std::path::{Path, PathBuf};

use slowmix::arithmetic::verify::{approx_bounds_verify, best_approx_verify, DEFAULT_SCAN_CAP};
use slowmix::arithmetic::{build_liouville_pair, Axis, TranslationVector};
use slowmix::ceiling::{ceiling_assemble, coboundary_check, verify_xtilde_properties, CeilingFunction};
use slowmix::criteria::{
    coverage_check, displacement_check, lower_level_check, overlap_check, rigid_start_points, scpa_band_check, singularity_partial_sums,
    stretch_check_x, stretch_check_y, MixingBandSpec, SCPASpec, SpectralProbe,
};
use slowmix::dynamics::{reparam_ode_advance, section_inverse, section_map, FlowEngine, FlowPoint, TorusPoint};
use slowmix::numeric::rng::stream;
use slowmix::report::{fmt_f64, CriterionReport, Status};
use slowmix::spectral::{
    grid_series, orbit_series, periodogram, sample_mu, separation_report, standard_family, CorrelationEstimate, CorrelationSeries, FiberBump,
    Observable,
};

use crate::artifacts::{self as art, CEILING_FILE, COEFFICIENTS_FILE, CONVERGENTS_FILE, GROWTH_FILE, VECTOR_FILE};
use crate::config::{ObservableSpec, RunConfig};
use crate::exit::Failure;

/// Output of one command: reports plus the digests recorded with them.
pub struct Outcome {
    pub reports: Vec<CriterionReport>,
    pub digests: Digests,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(CriterionReport::passed)
    }
}

type Digests = Vec<(String, String)>;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub vector: Option<PathBuf>,
    pub points: Option<PathBuf>,
}

impl Context {
    fn vector_path(&self) -> PathBuf {
        self.vector.clone().unwrap_or_else(|| self.out.join(VECTOR_FILE))
    }

    fn load_vector(&self) -> Result<(TranslationVector, String), Failure> {
        let path = self.vector_path();
        let text = art::read(&path)?;
        let tv = art::parse_vector(&text, &path.display().to_string())?;
        Ok((tv, art::sha256_hex(text.as_bytes())))
    }

    fn assemble(&self, tv: &TranslationVector) -> Result<CeilingFunction, Failure> {
        let c = &self.cfg;
        Ok(ceiling_assemble(tv, &c.regime(), c.usize("n0"), c.usize("n_max"), &c.assemble_options())?)
    }

    /// Vector and ceiling, with the stored coefficient table checked against a rebuild.
    fn load_ceiling(&self) -> Result<(TranslationVector, CeilingFunction, Digests), Failure> {
        let (coeff, vector_digest) = art::check_ceiling_artifacts(&self.out)?;
        let (tv, vd) = self.load_vector()?;
        if vd != vector_digest {
            return Err(Failure::usage(format!("{} is not the vector the ceiling was built from", self.vector_path().display())));
        }
        let cf = self.assemble(&tv)?;
        if art::sha256_hex(art::coefficients_csv(&cf).as_bytes()) != coeff {
            return Err(Failure::usage(format!("stored {COEFFICIENTS_FILE} does not match the current configuration; rerun build-ceiling")));
        }
        Ok((tv, cf, vec![(VECTOR_FILE.into(), vd), (COEFFICIENTS_FILE.into(), coeff)]))
    }
}

pub fn gen_vector(ctx: &Context) -> Result<Outcome, Failure> {
    let c = &ctx.cfg;
    let tv = build_liouville_pair(&c.policy(), c.u64("precision"))?;
    let vector = art::vector_text(&tv);
    art::write(&ctx.out, VECTOR_FILE, &vector)?;
    art::write(&ctx.out, CONVERGENTS_FILE, &art::convergents_csv(&tv))?;
    art::write(&ctx.out, GROWTH_FILE, &art::growth_csv(&tv))?;

    let mut growth = CriterionReport::new("growth.realized").param("policy", c.policy().mode()).param("levels", tv.levels());
    growth.samples = tv.growth.len() as u64;
    growth.margin = tv.growth.iter().filter(|g| g.holds).count() as f64 / tv.growth.len().max(1) as f64;
    growth.decide();
    if let Some(g) = tv.growth.iter().find(|g| !g.holds) {
        growth.witness = Some(format!("n={} lhs={} bound={}", g.n, g.lhs, g.bound));
    }
    let mut reports = vec![growth];
    for axis in [Axis::X, Axis::Y] {
        let last = tv.cf(axis).last_index();
        let mut best = CriterionReport::new(format!("best_approx.{}", axis.as_str()));
        let mut bounds = CriterionReport::new(format!("approx_bounds.{}", axis.as_str()));
        best.tolerance = 0.0;
        bounds.tolerance = 0.0;
        for n in 1..=last {
            if tv.cf(axis).table.q(n).is_some_and(|q| q <= &DEFAULT_SCAN_CAP.into()) {
                best.absorb(&best_approx_verify(&tv, axis, n, DEFAULT_SCAN_CAP)?);
                best.add_param("row", n);
            }
            if n < last {
                bounds.absorb(&approx_bounds_verify(&tv, axis, n, c.u64("precision"))?);
            }
        }
        reports.extend([best, bounds]);
    }
    Ok(Outcome { reports, digests: vec![(VECTOR_FILE.into(), art::sha256_hex(vector.as_bytes()))] })
}

/// Per-level ceiling reports with the configured margin on band and slope.
fn xtilde_reports(cf: &CeilingFunction, c: &RunConfig) -> Vec<CriterionReport> {
    let tol = c.f64("tol_xtilde");
    let mut out = Vec::new();
    for n in cf.n0..=cf.n_max {
        let (_, parts) = verify_xtilde_properties(cf, n, c.u64("r_max") as u32, &c.sample_options());
        for mut r in parts {
            if r.id.starts_with("xtilde.band") || r.id.starts_with("xtilde.slope") {
                r.tolerance = tol;
                if matches!(r.status, Status::Pass | Status::Fail) {
                    r.decide();
                }
            }
            out.push(r);
        }
    }
    out
}

pub fn build_ceiling(ctx: &Context) -> Result<Outcome, Failure> {
    let (tv, vd) = ctx.load_vector()?;
    let cf = ctx.assemble(&tv)?;
    let table = art::coefficients_csv(&cf);
    let coeff = art::sha256_hex(table.as_bytes());
    art::write(&ctx.out, COEFFICIENTS_FILE, &table)?;
    art::write(&ctx.out, CEILING_FILE, &art::ceiling_text(&cf, &coeff, &vd))?;
    let mut positivity = CriterionReport::new("ceiling.positivity").param("inf_bound", fmt_f64(cf.inf_bound)).param("sup_bound", fmt_f64(cf.sup_bound));
    positivity.margin = cf.inf_bound;
    positivity.tolerance = 0.0;
    positivity.status = if cf.inf_bound > 0.0 { Status::Pass } else { Status::Fail };
    let mut reports = vec![positivity];
    reports.extend(xtilde_reports(&cf, &ctx.cfg));
    Ok(Outcome { reports, digests: vec![(VECTOR_FILE.into(), vd), (COEFFICIENTS_FILE.into(), coeff)] })
}

fn singularity_report(eng: &FlowEngine, cf: &CeilingFunction, tv: &TranslationVector, c: &RunConfig) -> Result<CriterionReport, Failure> {
    let chi = FiberBump::for_floor(eng.inf())?;
    let f = Observable::character([1, 0], chi)?;
    let spec = SCPASpec::from_vector(tv, cf.n_max, c.f64("gamma"), c.f64("tau"))?;
    let seed = c.u64("seed");
    let starts = rigid_start_points(cf, c.usize("starts"), (chi.lo, chi.hi), seed)?;
    let probe = SpectralProbe { f, tau: spec.tau, k: spec.k, starts, draws: c.usize("draws"), floor: c.f64("floor"), seed };
    let mut rep = singularity_partial_sums(eng, &probe)?;
    rep.tolerance = c.f64("tol_singularity");
    if matches!(rep.status, Status::Pass | Status::Fail) {
        rep.decide();
    }
    Ok(rep)
}

pub fn verify(ctx: &Context) -> Result<Outcome, Failure> {
    let (tv, cf, digests) = ctx.load_ceiling()?;
    let c = &ctx.cfg;
    let opts = c.sample_options();
    let seed = c.u64("seed");
    let eng = FlowEngine::new(&cf, &tv)?;
    let upper = (cf.n0 + 1)..=cf.n_max;
    let mut reports = Vec::new();
    for check in c.which().map_err(Failure::usage)? {
        match check.as_str() {
            "xtilde" => reports.extend(xtilde_reports(&cf, c)),
            "coboundary" => {
                for n in cf.n0..=cf.n_max {
                    reports.push(coboundary_check(&cf, n, tv.rotation(Axis::X), c.u64("coboundary_bits") as u32, c.f64("coboundary_tol")));
                }
            }
            "lower" => {
                for n in cf.n0..=cf.n_max {
                    reports.push(lower_level_check(&cf, &tv, n, c.usize("lower_grid"))?);
                }
            }
            "stretch" => {
                for n in cf.n0..=cf.n_max {
                    reports.push(stretch_check_x(&cf, &tv, &MixingBandSpec::x_default(&tv, &cf.regime, n)?, &opts)?);
                    reports.push(stretch_check_y(&cf, &tv, &MixingBandSpec::y_default(&tv, &cf.regime, n)?, &opts)?);
                }
            }
            "scpa" => {
                if upper.is_empty() {
                    let mut r = CriterionReport::new("scpa.band");
                    r.status = Status::InsufficientData;
                    r.note("needs a level above n0");
                    reports.push(r);
                }
                for n in upper.clone() {
                    reports.push(scpa_band_check(&cf, &tv, n, &opts)?);
                    reports.push(displacement_check(&eng, &cf, n, c.usize("displacement_samples"), seed)?);
                }
            }
            "overlap" => {
                for n in cf.n0..=cf.n_max {
                    reports.push(overlap_check(&eng, &cf, n, c.f64("gamma"), c.usize("overlap_balls"), c.usize("overlap_per_ball"), seed)?);
                }
            }
            "coverage" => reports.push(coverage_check(&eng, &cf, c.usize("coverage_samples"), seed)?),
            "singularity" => reports.push(singularity_report(&eng, &cf, &tv, c)?),
            other => return Err(Failure::usage(format!("unknown check '{other}'"))),
        }
    }
    Ok(Outcome { reports, digests })
}

/// `x,y,s` rows (header optional); `s` must lie under the ceiling.
fn read_points(path: &Path, eng: &FlowEngine) -> Result<Vec<FlowPoint>, Failure> {
    let text = art::read(path)?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with('x')) {
            continue;
        }
        let bad = || Failure::usage(format!("{}:{}: expected x,y,s", path.display(), i + 1));
        let v: Vec<f64> = line.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [x, y, s] = v[..] else { return Err(bad()) };
        if !(x.is_finite() && y.is_finite()) {
            return Err(bad());
        }
        let base = TorusPoint::from_f64(x, y);
        if !(0.0..eng.phi(base)).contains(&s) {
            return Err(Failure::usage(format!("{}:{}: s={s} outside [0, phi(x, y))", path.display(), i + 1)));
        }
        pts.push(FlowPoint { base, s });
    }
    if pts.is_empty() {
        return Err(Failure::usage(format!("{}: no points", path.display())));
    }
    Ok(pts)
}

pub fn simulate(ctx: &Context) -> Result<Outcome, Failure> {
    let (tv, cf, digests) = ctx.load_ceiling()?;
    let c = &ctx.cfg;
    let eng = FlowEngine::new(&cf, &tv)?;
    let times = c.times().map_err(Failure::usage)?;
    let pts = match &ctx.points {
        Some(p) => read_points(p, &eng)?,
        None => {
            let mut rng = stream(c.u64("seed"), 0x51a0);
            (0..c.usize("points")).map(|_| sample_mu(&eng, &mut rng)).collect()
        }
    };
    let tol = c.f64("ode_tol");
    let mut csv = String::from("point_id,t,x,y,s,ode_x,ode_y,ode_s,discrepancy\n");
    let (mut worst_ode, mut worst_semi) = (0.0f64, 0.0f64);
    let mut rows = 0u64;
    for (id, &p) in pts.iter().enumerate() {
        let mut prev: Option<(f64, FlowPoint)> = None;
        for &t in &times {
            let a = eng.advance(p, t)?;
            let (u, _) = reparam_ode_advance(section_map(p, &eng), t, &eng, tol)?;
            let b = section_inverse(u, &eng);
            let d = u.dist(section_map(a, &eng));
            worst_ode = worst_ode.max(d);
            if let Some((t0, q)) = prev {
                worst_semi = worst_semi.max(eng.distance(eng.advance(q, t - t0)?, a));
            }
            prev = Some((t, a));
            let (ax, ay) = a.base.to_f64();
            let (bx, by) = b.base.to_f64();
            csv.push_str(&format!(
                "{id},{},{},{},{},{},{},{},{}\n",
                fmt_f64(t),
                fmt_f64(ax),
                fmt_f64(ay),
                fmt_f64(a.s),
                fmt_f64(bx),
                fmt_f64(by),
                fmt_f64(b.s),
                fmt_f64(d)
            ));
            rows += 1;
        }
    }
    art::write(&ctx.out, "trajectory.csv", &csv)?;
    let bound = |id: &str, worst: f64, limit: f64| {
        let mut r = CriterionReport::new(id).param("max_distance", fmt_f64(worst)).param("limit", fmt_f64(limit)).param("points", pts.len());
        r.samples = rows;
        r.margin = if worst > 0.0 { limit / worst } else { f64::INFINITY };
        r.decide();
        r
    };
    let reports = vec![bound("simulate.conjugacy", worst_ode, 1e-6), bound("simulate.semigroup", worst_semi, 1e-9)];
    Ok(Outcome { reports, digests })
}

fn family(c: &RunConfig, chi: FiberBump) -> Result<Vec<Observable>, Failure> {
    let all = standard_family(chi)?;
    match c.observable_spec().map_err(Failure::usage)? {
        ObservableSpec::All => Ok(all),
        ObservableSpec::Index(i) => Ok(vec![all[i].clone()]),
        ObservableSpec::Character(k) => Ok(vec![Observable::character(k, chi)?]),
    }
}

fn series_csv(series: &[CorrelationSeries]) -> String {
    let mut s = String::from("observable,t,value_re,value_im,error\n");
    for (i, ser) in series.iter().enumerate() {
        for line in ser.to_csv().lines().skip(1) {
            s.push_str(&format!("{i},{line}\n"));
        }
    }
    s
}

/// Grid quadrature against the orbit average on the first lags.
fn consistency_report(grid: &[CorrelationSeries], orbit: &[CorrelationSeries]) -> CriterionReport {
    let mut rep = CriterionReport::new("spectral.consistency").param("lags", grid.first().map_or(0, |s| s.len().saturating_sub(1)));
    let mut worst = f64::INFINITY;
    for (i, (g, o)) in grid.iter().zip(orbit).enumerate() {
        for j in 0..g.len() {
            let a = CorrelationEstimate { value: g.values[j], error: g.errors[j], estimator: g.estimator };
            let b = CorrelationEstimate { value: o.values[j], error: o.errors[j], estimator: o.estimator };
            let diff = (a.value - b.value).norm();
            let ratio = if diff > 0.0 { 5.0 * (a.error + b.error) / diff } else { f64::INFINITY };
            rep.samples += 1;
            if ratio < worst {
                worst = ratio;
                rep.witness = Some(format!("observable={i} lag={j}"));
            }
            if a.inconsistent_with(&b) {
                rep.note(format!("observable {i} lag {j}: grid {} vs orbit {}", a.value, b.value));
            }
        }
    }
    rep.margin = worst;
    rep.decide();
    if rep.passed() {
        rep.witness = None;
    }
    rep
}

pub fn spectrum(ctx: &Context) -> Result<Outcome, Failure> {
    let (tv, cf, digests) = ctx.load_ceiling()?;
    let c = &ctx.cfg;
    let eng = FlowEngine::new(&cf, &tv)?;
    let control = FlowEngine::new(&CeilingFunction::constant_one(cf.regime.clone()), &tv)?;
    let chi = FiberBump::for_floor(eng.inf())?;
    let fs = family(c, chi)?;
    let opts = c.correlation_options();
    let lags = c.usize("lags");
    let ours = orbit_series(&fs, &eng, 1.0, lags, &opts)?;
    let theirs = orbit_series(&fs, &control, 1.0, lags, &opts)?;
    art::write(&ctx.out, "autocorrelation.csv", &series_csv(&ours))?;
    art::write(&ctx.out, "control.csv", &series_csv(&theirs))?;
    let mut spec = String::from("observable,freq,density\n");
    for (i, s) in ours.iter().enumerate() {
        for line in periodogram(s, c.window())?.to_csv().lines().skip(1) {
            spec.push_str(&format!("{i},{line}\n"));
        }
    }
    art::write(&ctx.out, "spectrum.csv", &spec)?;
    let mut reports = vec![separation_report(&ours, &theirs, &opts)];
    let grid_lags = c.usize("grid_lags").min(lags);
    if grid_lags > 0 {
        let grid = grid_series(&fs, &eng, 1.0, grid_lags, &opts)?;
        reports.push(consistency_report(&grid, &ours));
    }
    Ok(Outcome { reports, digests })
}
