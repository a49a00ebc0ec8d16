//! Seeded property suite behind `chaoslab verify`.

use chaoslab_core::bounds::{
    abstract_bounds, gamma_m, kolmogorov_bound, wasserstein_bound, HoeffdingDecomposition,
};
use chaoslab_core::chaos::stroock_kernel;
use chaoslab_core::construct::order_one_excess;
use chaoslab_core::distance::exact_distances;
use chaoslab_core::kernel::{square_defect, symmetrized_square_norms, SymmetrizedTensor};
use chaoslab_core::malliavin::*;
use chaoslab_core::model::Caps;
use chaoslab_core::moments::*;
use chaoslab_core::numeric::factorial;
use chaoslab_core::{ChaosVector, Kernel, RademacherModel, ValueTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub instances: usize,
    pub max_order: usize,
    pub max_horizon: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub caps: CapsConfig,
    pub fault: FaultConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            instances: 50,
            max_order: 3,
            max_horizon: 10,
            p_min: 0.1,
            p_max: 0.9,
            caps: CapsConfig::default(),
            fault: FaultConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsConfig {
    pub enumeration: usize,
    pub stroock: usize,
    pub factorized_support: usize,
}

impl Default for CapsConfig {
    fn default() -> Self {
        let c = Caps::default();
        CapsConfig {
            enumeration: c.enumeration,
            stroock: c.stroock,
            factorized_support: c.factorized_support,
        }
    }
}

/// Deliberate corruption of constants, used to check that the suite fails.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FaultConfig {
    pub gamma_scale: f64,
    pub bound_scale: f64,
}

impl Default for FaultConfig {
    fn default() -> Self {
        FaultConfig {
            gamma_scale: 1.0,
            bound_scale: 1.0,
        }
    }
}

impl VerifyConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: VerifyConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.max_order == 0 || self.max_order > self.max_horizon {
            return bad(format!(
                "max_order must lie in 1..=max_horizon, got {}",
                self.max_order
            ));
        }
        let limit = self.caps.stroock.min(self.caps.enumeration);
        if self.max_horizon > limit {
            return bad(format!(
                "max_horizon {} exceeds the decomposition/enumeration cap {limit}",
                self.max_horizon
            ));
        }
        if !(0.0 < self.p_min && self.p_min <= self.p_max && self.p_max < 1.0) {
            return bad(format!(
                "need 0 < p_min <= p_max < 1, got {} and {}",
                self.p_min, self.p_max
            ));
        }
        Ok(())
    }

    fn caps(&self) -> Caps {
        Caps {
            enumeration: self.caps.enumeration,
            stroock: self.caps.stroock,
            factorized_support: self.caps.factorized_support,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Equality,
    Inequality,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub kind: CheckKind,
    pub instances: usize,
    /// Largest residual for equalities, largest violation `lhs - rhs` for
    /// inequalities.
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.check.len()).max().unwrap_or(0);
        let mut out = format!("seed {}  instances {}\n", self.seed, self.instances);
        for c in &self.checks {
            out.push_str(&format!(
                "{}  {:<width$}  {:>10.3e}  tol {:.0e}  n={}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.check,
                c.max_residual,
                c.tolerance,
                c.instances
            ));
        }
        let failed = self.failed().count();
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            failed
        ));
        out
    }
}

#[derive(Default)]
struct Ledger {
    checks: Vec<CheckResult>,
}

impl Ledger {
    fn entry(&mut self, check: &'static str, kind: CheckKind, tol: f64) -> &mut CheckResult {
        if let Some(i) = self.checks.iter().position(|c| c.check == check) {
            return &mut self.checks[i];
        }
        self.checks.push(CheckResult {
            check,
            kind,
            instances: 0,
            max_residual: f64::NEG_INFINITY,
            tolerance: tol,
            passed: true,
        });
        self.checks.last_mut().expect("just pushed")
    }

    fn add(&mut self, check: &'static str, kind: CheckKind, residual: f64, tol: f64) {
        let e = self.entry(check, kind, tol);
        e.instances += 1;
        // NaN counts as a failure
        e.max_residual = if residual.is_nan() {
            f64::NAN
        } else {
            e.max_residual.max(residual)
        };
        e.passed &= residual <= tol;
    }

    fn equal(&mut self, check: &'static str, residual: f64, tol: f64) {
        self.add(check, CheckKind::Equality, residual, tol);
    }

    fn at_most(&mut self, check: &'static str, lhs: f64, rhs: f64) {
        self.add(check, CheckKind::Inequality, lhs - rhs, 1e-10);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

struct Instance {
    model: RademacherModel,
    f: Kernel,
    g: Kernel,
    h: ValueTable,
}

fn draw(rng: &mut ChaCha8Rng, cfg: &VerifyConfig, i: usize) -> chaoslab_core::Result<Instance> {
    let m = 1 + i % cfg.max_order;
    let n = rng.random_range(m.max(2)..=cfg.max_horizon.max(m.max(2)));
    let probs = (0..n)
        .map(|_| rng.random_range(cfg.p_min..=cfg.p_max))
        .collect();
    let model = RademacherModel::new(probs)?.with_caps(cfg.caps());
    let f = Kernel::random(m, n, rng)?.normalized()?;
    let k = 1 + rng.random_range(0..cfg.max_order.min(n));
    let g = Kernel::random(k, n, rng)?;
    let h = ValueTable::new(
        n,
        (0..1usize << n)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect(),
    )?;
    Ok(Instance { model, f, g, h })
}

fn calculus_checks(
    x: &Instance,
    rng: &mut ChaCha8Rng,
    led: &mut Ledger,
) -> chaoslab_core::Result<()> {
    let Instance { model, f, g, h } = x;
    let n = model.horizon();
    let m = f.order();
    let fc = ChaosVector::integral(f);
    let ft = fc.to_table(model)?;
    let hc = ChaosVector::decompose(h, model)?;

    led.equal(
        "chaos decomposition round trip",
        hc.to_table(model)?.max_abs_diff(h),
        1e-10,
    );
    if n <= 8 {
        let direct = stroock_kernel(h, model, m)?;
        led.equal("stroock formula", direct.max_abs_diff(&hc.kernel(m)), 1e-12);
    }

    let scale = 1.0 + ft.sup_norm() * h.sup_norm();
    let spectral = carre_du_champ(&fc, &hc, model)?;
    led.equal(
        "carre du champ pathwise form",
        spectral.max_abs_diff(&gamma0(&ft, h, model)?) / scale,
        1e-10,
    );
    led.equal(
        "carre du champ jump form",
        gamma0_jump_form(&ft, h, model).max_abs_diff(&gamma0(&ft, h, model)?) / scale,
        1e-10,
    );
    let lh = generator_jump_form(h, model);
    led.equal(
        "generator jump and gradient forms",
        lh.max_abs_diff(&generator_gradient_form(h, model)?) / (1.0 + h.sup_norm()),
        1e-10,
    );
    let lhs = (h * &generator_jump_form(&ft, model)).expectation(model)?;
    let rhs = -gamma0(h, &ft, model)?.expectation(model)?;
    led.equal("integration by parts", rel(lhs, rhs), 1e-10);

    let div = divergence(&gradient_process(&hc)?)?;
    led.equal(
        "generator is minus divergence of gradient",
        div.max_abs_diff(&hc.generator().scale(-1.0)),
        1e-10,
    );
    let u: Process = (0..n)
        .map(|_| {
            let v = (0..1usize << n)
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            ChaosVector::decompose(&ValueTable::new(n, v)?, model)
        })
        .collect::<chaoslab_core::Result<_>>()?;
    let (a, b) = skorohod_isometry(&u, model)?;
    led.equal("skorohod isometry", rel(a, b), 1e-9);

    let gt = ChaosVector::integral(g).to_table(model)?;
    let cross = (&ft * &gt).expectation(model)?;
    let want = if g.order() == m {
        factorial(m) * f.inner(g)
    } else {
        0.0
    };
    led.equal("multiple integral isometry", rel(cross, want), 1e-10);

    if m + g.order() <= n {
        let prod = fc.multiply(&ChaosVector::integral(g), model)?;
        let expected = SymmetrizedTensor::new(f, g)?.off_diagonal();
        led.equal(
            "product top kernel",
            prod.kernel(m + g.order()).max_abs_diff(&expected),
            1e-10,
        );
    }
    Ok(())
}

fn moment_checks(x: &Instance, cfg: &VerifyConfig, led: &mut Ledger) -> chaoslab_core::Result<()> {
    let Instance { model, f, .. } = x;
    let m = f.order();
    let gamma = gamma_m(m) * cfg.fault.gamma_scale;

    let total: f64 = f.influences().iter().sum();
    led.equal(
        "influence additivity",
        (total - m as f64 * f.entries().map(|(_, v)| v * v).sum::<f64>()).abs(),
        1e-12,
    );
    led.at_most("square defect nonnegative", 0.0, square_defect(f));
    let diag = symmetrized_square_norms(f).diagonal;
    led.at_most(
        "diagonal part bound",
        diag,
        gamma * f.second_moment() * f.sup_influence(),
    );

    let pv = projection_variances(f, model)?;
    led.at_most("projection variance bound", pv.lower_sum, pv.bound);
    let gv = gamma_variance(f, model)?;
    led.equal(
        "gamma variance spectral form",
        rel(gv.pathwise, gv.spectral),
        1e-10,
    );
    led.at_most("gamma variance bound", gv.spectral, gv.bound);
    led.at_most(
        "gamma square mean bound",
        gv.gamma_square_mean,
        gv.fourth_moment,
    );
    led.at_most(
        "weighted gamma mean bound",
        gv.weighted_gamma_mean,
        gv.fourth_moment,
    );
    let qg = quartic_gradient(f, model)?;
    led.equal(
        "quartic gradient identity",
        rel(qg.value, qg.identity),
        1e-9,
    );
    led.at_most("quartic gradient bound", qg.value, qg.bound);
    let kt = kolmogorov_term(f, model)?;
    led.at_most("kolmogorov term bound", kt.value, kt.bound);

    if f.support_len() <= cfg.caps.factorized_support {
        let e = fourth_moment(f, model, Engine::Enumerate)?;
        let z = fourth_moment(f, model, Engine::Factorized)?;
        led.equal("fourth moment engines agree", (e - z).abs() / e.abs(), 1e-9);
    }
    let sym = RademacherModel::symmetric(model.horizon()).with_caps(cfg.caps());
    let a = fourth_moment(f, &sym, Engine::Enumerate)?;
    let b = fourth_moment(f, &sym, Engine::SymmetricFast)?;
    led.equal("symmetric fast path agrees", (a - b).abs() / a.abs(), 1e-9);

    if m == 1 {
        let hom = RademacherModel::homogeneous(model.p(0), model.horizon())?.with_caps(cfg.caps());
        let (lhs, rhs) = order_one_excess(f, &hom)?;
        led.equal("order one fourth moment identity", (lhs - rhs).abs(), 1e-10);
    }
    Ok(())
}

fn bound_checks(x: &Instance, cfg: &VerifyConfig, led: &mut Ledger) -> chaoslab_core::Result<()> {
    let Instance { model, f, .. } = x;
    let fc = ChaosVector::integral(f);
    let t = fc.to_table(model)?;
    let fourth = t.moment(model, 4)?;
    let d = exact_distances(&t, model)?;
    let s = cfg.fault.bound_scale;
    let wb = wasserstein_bound(fourth, f.sup_influence(), f.order())?;
    let kb = kolmogorov_bound(fourth, f.sup_influence(), f.order())?;
    led.at_most("wasserstein bound validity", d.wasserstein, s * wb.value);
    led.at_most("kolmogorov bound validity", d.kolmogorov, s * kb.value);
    let ab = abstract_bounds(&fc, model)?;
    led.at_most(
        "kolmogorov gap term dominates distance",
        d.kolmogorov,
        ab.kolmogorov_gap,
    );
    led.at_most(
        "wasserstein gap term dominates distance",
        d.wasserstein,
        ab.wasserstein_gap,
    );

    let h = HoeffdingDecomposition::new(&t, model)?;
    led.equal(
        "hoeffding reconstruction",
        h.reconstruct()?.max_abs_diff(&t),
        1e-9,
    );
    let mut worst: f64 = 0.0;
    for (s, _) in h.components() {
        if s.len() != f.order() {
            worst = worst.max(h.component_table(s)?.sup_norm());
        }
    }
    led.equal("hoeffding components are degenerate", worst, 1e-12);
    Ok(())
}

pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut led = Ledger::default();
    for i in 0..cfg.instances {
        let x = draw(&mut rng, cfg, i)?;
        calculus_checks(&x, &mut rng, &mut led)?;
        moment_checks(&x, cfg, &mut led)?;
        bound_checks(&x, cfg, &mut led)?;
    }
    let passed = led.checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        seed: cfg.seed,
        instances: cfg.instances,
        passed,
        checks: led.checks,
    })
}
