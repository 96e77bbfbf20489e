//! One function per subcommand; each reads its inputs from the loaded
//! config and returns a `Table`. Sweeps fan out over a rayon pool sized
//! by --jobs with an order-preserving map, so the emitted rows do not
//! depend on the worker count.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use spx_core::classes::{
    classify, classification_grid, order_formula, ConvexDecayFunction, OrderKind, OrderSetting,
    Trend,
};
use spx_core::element::Domain;
use spx_core::extremal::{
    best_subspace_width, constrained_nterm, gamma_excluded_error, kolmogorov_plateaus, nterm,
    ConstraintKind,
};
use spx_core::identities::{
    bernstein_check, direct_identity, inverse_bound_check, inverse_identity, smoothness_modulus,
};
use spx_core::index::Index;
use spx_core::jackson::{cnap_upper_bound, in_integral, jackson_checks, sigma_series_with_tol, JacksonMeasure};
use spx_core::linmethods::{
    apply_method, method_error, method_rate_report, MultiplierMethod, RatePairing,
};
use spx_core::oracle::{gamma_error_oracle, nterm_oracle, OracleOptions};
use spx_core::psi::{char_sequences, rearrangement};

use crate::config::{norm_exponent_of, LoadedConfig, MethodSpec, Params};
use crate::output::{Cell, Table};

pub struct Ctx {
    pub loaded: LoadedConfig,
    pub tol: f64,
    pub seed: u64,
    pub jobs: usize,
}

impl Ctx {
    fn params(&self) -> &Params {
        &self.loaded.run.params
    }

    /// Order-preserving parallel map over sweep items.
    fn par_rows<T, F>(&self, items: &[T], f: F) -> Result<Vec<Vec<Cell>>>
    where
        T: Sync,
        F: Fn(&T) -> Result<Vec<Cell>> + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .context("cannot build worker pool")?;
        pool.install(|| items.par_iter().map(&f).collect())
    }
}

fn index_label(ix: &Index) -> String {
    match ix {
        Index::Scalar(k) => k.to_string(),
        Index::Lattice(v) => {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        }
    }
}

fn witness_label(witness: &[Index]) -> String {
    witness.iter().map(index_label).collect::<Vec<_>>().join(";")
}

fn trend_label(t: Trend) -> &'static str {
    match t {
        Trend::Increasing => "increasing",
        Trend::Decreasing => "decreasing",
        Trend::Flat => "flat",
    }
}

fn profile_of(params: &Params) -> Result<ConvexDecayFunction> {
    let rule = params
        .profile
        .clone()
        .context("set [params.profile] with family = \"power\" | \"power-log\" | \"log\" | \"exp\"")?;
    Ok(ConvexDecayFunction::from_rule(rule)?)
}

fn order_kind_of(params: &Params) -> Result<OrderKind> {
    match params.kind.as_deref() {
        Some("nterm") => Ok(OrderKind::NTerm),
        Some("width") => Ok(OrderKind::Width),
        Some(other) => bail!("params.kind must be nterm or width, got '{other}'"),
        None => bail!("set params.kind = \"nterm\" or \"width\""),
    }
}

fn order_setting_of(params: &Params) -> Result<OrderSetting> {
    match params.setting.as_deref() {
        Some("scalar") | None => Ok(OrderSetting::Scalar),
        Some("radial") => {
            let d = params.dimension.context("radial setting needs params.dimension")?;
            Ok(OrderSetting::Radial { d, r: norm_exponent_of(&params.norm) })
        }
        Some(other) => bail!("params.setting must be scalar or radial, got '{other}'"),
    }
}

pub fn charseq(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let levels = ctx.params().levels.unwrap_or(8);
    let cs = char_sequences(&psi, levels)?;
    let mut t = Table::new(vec!["n", "epsilon", "delta"]).with_plot(0, 1);
    for (i, (eps, delta)) in cs.epsilon.iter().zip(&cs.delta).enumerate() {
        t.push(vec![Cell::UInt(i as u64 + 1), Cell::Float(*eps), Cell::UInt(*delta)]);
    }
    Ok(t)
}

pub fn rearrange(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let count = ctx.params().count.unwrap_or(32);
    let vals = rearrangement(&psi, count)?;
    let mut t = Table::new(vec!["rank", "value"]).with_plot(0, 1);
    for (i, v) in vals.iter().enumerate() {
        t.push(vec![Cell::UInt(i as u64 + 1), Cell::Float(*v)]);
    }
    Ok(t)
}

pub fn region(ctx: &Ctx) -> Result<Table> {
    let spec = ctx.params().region.as_ref().context("set [params.region]")?;
    let set = spec.to_set()?;
    let cols: Vec<String> = (1..=spec.d).map(|i| format!("k{i}")).collect();
    let mut t = Table::new(cols);
    for ix in set.points()? {
        match ix {
            Index::Lattice(v) => {
                t.push(v.into_iter().map(Cell::Int).collect());
            }
            Index::Scalar(k) => t.push(vec![Cell::UInt(k)]),
        }
    }
    Ok(t)
}

pub fn count(ctx: &Ctx) -> Result<Table> {
    let p = ctx.params();
    let d = p.dimension.context("set params.dimension")?;
    let r = norm_exponent_of(&p.norm);
    let m_hi = p.m_max.context("set params.m-max")?;
    let m_lo = p.m_min.unwrap_or(1);
    if m_lo > m_hi || m_lo == 0 {
        bail!("count needs 1 <= m-min <= m-max");
    }
    let mut t = Table::new(vec!["m", "count", "normalized"]).with_plot(0, 2);
    for m in m_lo..=m_hi {
        let c = spx_core::index::lattice_count(d, r, m)?;
        let normalized = c as f64 / (m as f64).powi(d as i32);
        t.push(vec![Cell::UInt(m), Cell::UInt(c), Cell::Float(normalized)]);
    }
    Ok(t)
}

pub fn extremal_gamma(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let spec = ctx.params().gamma.as_ref().context("set [params.gamma]")?;
    let set = spec.to_set()?;
    let report = gamma_excluded_error(&psi, &set, p, q)?;
    let mut t = Table::new(vec!["value", "regime", "beta", "witness"]);
    t.push(vec![
        Cell::Float(report.value),
        Cell::Text(report.regime.to_string()),
        Cell::from(report.beta),
        match &report.witness {
            Some(ix) => Cell::Text(index_label(ix)),
            None => Cell::Empty,
        },
    ]);
    Ok(t)
}

pub fn extremal_widths(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let w = best_subspace_width(&psi, n, p, q)?;
        Ok(vec![Cell::UInt(n), Cell::Float(w.value), Cell::Text(witness_label(&w.witness))])
    })?;
    let mut t = Table::new(vec!["n", "value", "witness"]).with_plot(0, 1);
    t.rows = rows;
    Ok(t)
}

pub fn extremal_kwidth(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let p = ctx.params().need_p()?;
    let levels = ctx.params().levels.unwrap_or(8);
    let rows = kolmogorov_plateaus(&psi, p, levels)?;
    let mut t = Table::new(vec!["level", "m_lo", "m_hi", "value"]);
    for row in rows {
        t.push(vec![
            Cell::UInt(row.level as u64),
            Cell::UInt(row.m_lo),
            Cell::UInt(row.m_hi),
            Cell::Float(row.value),
        ]);
    }
    Ok(t)
}

pub fn extremal_nterm(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let r = nterm(&psi, n, p, q)?;
        Ok(vec![
            Cell::UInt(n),
            Cell::Float(r.value),
            Cell::from(r.s_star),
            Cell::Bool(r.attained),
            Cell::Text(r.regime.to_string()),
        ])
    })?;
    let mut t = Table::new(vec!["n", "value", "s_star", "attained", "regime"]).with_plot(0, 1);
    t.rows = rows;
    Ok(t)
}

pub fn extremal_constrained(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let kind = match ctx.params().constraint.as_deref() {
        Some("blocks") | None => ConstraintKind::Blocks,
        Some("windows") => ConstraintKind::Windows,
        Some(other) => bail!("params.constraint must be blocks or windows, got '{other}'"),
    };
    let kind_name = match kind {
        ConstraintKind::Blocks => "blocks",
        ConstraintKind::Windows => "windows",
    };
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let r = constrained_nterm(&psi, n, p, q, kind)?;
        Ok(vec![
            Cell::UInt(n),
            Cell::Float(r.value),
            Cell::UInt(r.s_star),
            Cell::Bool(r.exact),
            Cell::Text(kind_name.to_string()),
        ])
    })?;
    let mut t = Table::new(vec!["n", "value", "s_star", "exact", "constraint"]).with_plot(0, 1);
    t.rows = rows;
    Ok(t)
}

pub fn identity(ctx: &Ctx, inverse: bool) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let f = ctx.loaded.element()?;
    let p = ctx.params().need_p()?;
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let rep = if inverse {
            inverse_identity(&psi, &f, n, p)?
        } else {
            direct_identity(&psi, &f, n, p)?
        };
        Ok(vec![
            Cell::UInt(rep.n),
            Cell::Float(rep.lhs),
            Cell::Float(rep.rhs),
            Cell::Float(rep.residual),
        ])
    })?;
    let mut t = Table::new(vec!["n", "lhs", "rhs", "residual"]);
    t.rows = rows;
    Ok(t)
}

pub fn modulus(ctx: &Ctx) -> Result<Table> {
    let f = ctx.loaded.element()?;
    let alpha = ctx.params().need_alpha()?;
    let p = ctx.params().need_p()?;
    let grid = ctx.params().grid.unwrap_or(64);
    let steps = ctx.params().steps()?;
    let rows = ctx.par_rows(&steps, |&t| {
        let w = smoothness_modulus(&f, alpha, t, p, grid)?;
        Ok(vec![Cell::Float(t), Cell::Float(w)])
    })?;
    let mut t = Table::new(vec!["t", "value"]).with_plot(0, 1);
    t.rows = rows;
    Ok(t)
}

pub fn bernstein(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let tau = ctx.loaded.element()?;
    let p = ctx.params().need_p()?;
    let rep = bernstein_check(&psi, &tau, ctx.params().n, p)?;
    let mut t = Table::new(vec!["n", "eps_n", "derivative_norm", "bound", "holds"]);
    t.push(vec![
        Cell::UInt(rep.n),
        Cell::Float(rep.eps_n),
        Cell::Float(rep.derivative_norm),
        Cell::Float(rep.bound),
        Cell::Bool(rep.holds),
    ]);
    Ok(t)
}

pub fn inverse_bound(ctx: &Ctx) -> Result<Table> {
    let f = ctx.loaded.element()?;
    let alpha = ctx.params().need_alpha()?;
    let p = ctx.params().need_p()?;
    let grid = ctx.params().grid.unwrap_or(64);
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let rep = inverse_bound_check(&f, alpha, n, p, grid)?;
        Ok(vec![
            Cell::UInt(n),
            Cell::Float(rep.modulus),
            Cell::Float(rep.bound_exact),
            Cell::from(rep.bound_relaxed),
            Cell::Bool(rep.holds_exact),
            Cell::from(rep.holds_relaxed),
        ])
    })?;
    let mut t = Table::new(vec![
        "n",
        "modulus",
        "bound_exact",
        "bound_relaxed",
        "holds_exact",
        "holds_relaxed",
    ]);
    t.rows = rows;
    Ok(t)
}

pub fn jackson_in(ctx: &Ctx) -> Result<Table> {
    let p = ctx.params();
    let lambdas = p.lambda_values.clone().context("set params.lambda-values")?;
    let tau = p.tau.unwrap_or(std::f64::consts::PI);
    let degrees = p.degrees()?;
    let pairs: Vec<(u64, f64)> =
        degrees.iter().flat_map(|&n| lambdas.iter().map(move |&l| (n, l))).collect();
    let rows = ctx.par_rows(&pairs, |&(n, lambda)| {
        let rep = in_integral(n, lambda, tau, &JacksonMeasure::Sin)?;
        Ok(vec![
            Cell::UInt(n),
            Cell::Float(lambda),
            Cell::Float(rep.value),
            Cell::from(rep.argmin),
            Cell::Float(rep.limit),
        ])
    })?;
    let mut t = Table::new(vec!["n", "lambda", "value", "argmin", "limit"]).with_plot(0, 2);
    t.rows = rows;
    Ok(t)
}

pub fn jackson_sigma(ctx: &Ctx) -> Result<Table> {
    let lambdas =
        ctx.params().lambda_values.clone().context("set params.lambda-values")?;
    let mut t = Table::new(vec!["lambda", "sigma"]).with_plot(0, 1);
    for lambda in lambdas {
        let s = sigma_series_with_tol(lambda, ctx.tol)?;
        t.push(vec![Cell::Float(lambda), Cell::Float(s)]);
    }
    Ok(t)
}

pub fn jackson_check(ctx: &Ctx) -> Result<Table> {
    let f = ctx.loaded.element()?;
    let alpha = ctx.params().need_alpha()?;
    let p = ctx.params().need_p()?;
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let rep = jackson_checks(&f, alpha, p, n)?;
        Ok(vec![
            Cell::UInt(rep.n),
            Cell::Float(rep.e_n),
            Cell::Float(rep.modulus_at_pin),
            Cell::Float(rep.in_value),
            Cell::Float(rep.rhs_averaged),
            Cell::Bool(rep.holds_averaged),
            Cell::Float(rep.bound_corrected),
            Cell::Bool(rep.holds_corrected),
            Cell::from(rep.bound_integral),
            Cell::from(rep.holds_integral),
            Cell::Float(rep.bound_uniform),
            Cell::Bool(rep.holds_uniform),
        ])
    })?;
    let mut t = Table::new(vec![
        "n",
        "e_n",
        "modulus",
        "in_value",
        "rhs_averaged",
        "holds_averaged",
        "bound_corrected",
        "holds_corrected",
        "bound_integral",
        "holds_integral",
        "bound_uniform",
        "holds_uniform",
    ]);
    t.rows = rows;
    Ok(t)
}

pub fn jackson_cnap(ctx: &Ctx) -> Result<Table> {
    let alpha = ctx.params().need_alpha()?;
    let p = ctx.params().need_p()?;
    let tau = ctx.params().tau.unwrap_or(std::f64::consts::PI);
    let atoms = ctx.params().atoms.unwrap_or(16);
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let v = cnap_upper_bound(n, alpha, p, tau, atoms)?;
        Ok(vec![Cell::UInt(n), Cell::Float(v)])
    })?;
    let mut t = Table::new(vec!["n", "bound"]).with_plot(0, 1);
    t.rows = rows;
    Ok(t)
}

pub fn classify_cmd(ctx: &Ctx) -> Result<Table> {
    let profile = profile_of(ctx.params())?;
    let t_end = ctx.params().t_end.unwrap_or(4096.0);
    let points = ctx.params().grid_points.unwrap_or(257);
    let grid = classification_grid(t_end, points)?;
    let label = classify(&profile, &grid)?;
    let mut t = Table::new(vec![
        "class",
        "mu_min",
        "mu_max",
        "mu_trend",
        "alpha_min",
        "alpha_max",
        "alpha_trend",
        "rho_min",
        "rho_max",
        "rho_trend",
        "doubling_constant",
        "doubling_holds",
        "convex",
        "decreasing",
    ]);
    t.push(vec![
        Cell::Text(label.class.as_str().to_string()),
        Cell::Float(label.mu.min),
        Cell::Float(label.mu.max),
        Cell::Text(trend_label(label.mu.trend).to_string()),
        Cell::Float(label.alpha.min),
        Cell::Float(label.alpha.max),
        Cell::Text(trend_label(label.alpha.trend).to_string()),
        Cell::Float(label.rho.min),
        Cell::Float(label.rho.max),
        Cell::Text(trend_label(label.rho.trend).to_string()),
        Cell::Float(label.doubling_constant),
        Cell::Bool(label.doubling_holds),
        Cell::Bool(label.convex),
        Cell::Bool(label.decreasing),
    ]);
    Ok(t)
}

pub fn order_cmd(ctx: &Ctx) -> Result<Table> {
    let profile = profile_of(ctx.params())?;
    let kind = order_kind_of(ctx.params())?;
    let setting = order_setting_of(ctx.params())?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let v = order_formula(kind, &setting, p, q, &profile, n)?;
        Ok(vec![
            Cell::UInt(n),
            Cell::Float(v.value),
            Cell::Text(v.branch.to_string()),
            Cell::Bool(v.exact),
            Cell::Text(v.class.as_str().to_string()),
            Cell::from(v.shell),
        ])
    })?;
    let mut t = Table::new(vec!["n", "value", "branch", "exact", "class", "shell"]).with_plot(0, 1);
    t.rows = rows;
    Ok(t)
}

pub fn ratio_cmd(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let profile = profile_of(ctx.params())?;
    let kind = order_kind_of(ctx.params())?;
    let setting = order_setting_of(ctx.params())?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let band = ctx.params().band.unwrap_or(10.0);
    if !(band > 1.0) {
        bail!("params.band must exceed 1");
    }
    let degrees = ctx.params().degrees()?;
    let rows = ctx.par_rows(&degrees, |&n| {
        let exact = match kind {
            OrderKind::NTerm => nterm(&psi, n, p, q)?.value,
            OrderKind::Width => best_subspace_width(&psi, n, p, q)?.value,
        };
        let order = order_formula(kind, &setting, p, q, &profile, n)?;
        let ratio = exact / order.value;
        Ok(vec![
            Cell::UInt(n),
            Cell::Float(exact),
            Cell::Float(order.value),
            Cell::Float(ratio),
            Cell::Bool(ratio >= 1.0 / band && ratio <= band),
        ])
    })?;
    let mut t = Table::new(vec!["n", "exact", "order", "ratio", "in_band"]).with_plot(0, 3);
    t.rows = rows;
    Ok(t)
}

fn method_from_spec(spec: &MethodSpec, n: Option<u64>, rho: Option<f64>) -> Result<MultiplierMethod> {
    let need_n = || n.or(spec.n).context("method needs n");
    let need_rho = || rho.or(spec.rho).context("method needs rho");
    let m = match spec.name.as_str() {
        "partial" => spx_core::linmethods::partial(need_n()?),
        "fejer" => spx_core::linmethods::fejer(need_n()?),
        "abel-poisson" => {
            spx_core::linmethods::abel_poisson(need_rho()?, spec.s.unwrap_or(1.0))?
        }
        "tap" => spx_core::linmethods::tap(need_rho()?, spec.r.unwrap_or(1))?,
        other => bail!("method name must be partial, fejer, abel-poisson or tap, got '{other}'"),
    };
    Ok(m)
}

pub fn linmethod_apply(ctx: &Ctx) -> Result<Table> {
    let f = ctx.loaded.element()?;
    let spec = ctx.params().method.as_ref().context("set [params.method]")?;
    let method = method_from_spec(spec, None, None)?;
    let g = apply_method(&f, &method)?;
    let mut cols: Vec<String> = match g.domain() {
        Domain::Scalar => vec!["k".to_string()],
        Domain::Lattice(d) => (1..=d).map(|i| format!("k{i}")).collect(),
    };
    cols.push("re".to_string());
    cols.push("im".to_string());
    let mut t = Table::new(cols);
    for (ix, c) in g.iter() {
        let mut row: Vec<Cell> = match ix {
            Index::Scalar(k) => vec![Cell::UInt(*k)],
            Index::Lattice(v) => v.iter().map(|x| Cell::Int(*x)).collect(),
        };
        row.push(Cell::Float(c.re));
        row.push(Cell::Float(c.im));
        t.push(row);
    }
    Ok(t)
}

pub fn linmethod_error(ctx: &Ctx) -> Result<Table> {
    let f = ctx.loaded.element()?;
    let p = ctx.params().need_p()?;
    let spec = ctx.params().method.as_ref().context("set [params.method]")?;
    let degree_sweep = matches!(spec.name.as_str(), "partial" | "fejer");
    if degree_sweep {
        let degrees = ctx.params().degrees()?;
        let rows = ctx.par_rows(&degrees, |&n| {
            let m = method_from_spec(spec, Some(n), None)?;
            Ok(vec![Cell::UInt(n), Cell::Float(method_error(&f, &m, p)?)])
        })?;
        let mut t = Table::new(vec!["n", "error"]).with_plot(0, 1);
        t.rows = rows;
        Ok(t)
    } else {
        let rhos = ctx.params().rho_sweep()?;
        let rows = ctx.par_rows(&rhos, |&rho| {
            let m = method_from_spec(spec, None, Some(rho))?;
            Ok(vec![Cell::Float(rho), Cell::Float(method_error(&f, &m, p)?)])
        })?;
        let mut t = Table::new(vec!["rho", "error"]).with_plot(0, 1);
        t.rows = rows;
        Ok(t)
    }
}

pub fn linmethod_rate(ctx: &Ctx) -> Result<Table> {
    let f = ctx.loaded.element()?;
    let p = ctx.params().need_p()?;
    let exponent = ctx
        .params()
        .omega
        .as_ref()
        .context("set [params.omega] with exponent = <float>")?
        .exponent;
    if !(exponent > 0.0 && exponent.is_finite()) {
        bail!("omega exponent must be positive");
    }
    let (pairing, sweep) = match ctx.params().pairing.as_deref() {
        Some("fejer") => {
            let sweep: Vec<f64> = ctx.params().degrees()?.iter().map(|&n| n as f64).collect();
            (RatePairing::FejerError, sweep)
        }
        Some("tap") => {
            let r = ctx.params().r.context("tap pairing needs params.r")?;
            (RatePairing::TapError { r }, ctx.params().rho_sweep()?)
        }
        Some("poisson") => {
            let r = ctx.params().r.context("poisson pairing needs params.r")?;
            (RatePairing::DerivativePoissonNorm { r }, ctx.params().rho_sweep()?)
        }
        Some(other) => bail!("params.pairing must be fejer, tap or poisson, got '{other}'"),
        None => bail!("set params.pairing = \"fejer\" | \"tap\" | \"poisson\""),
    };
    let report = method_rate_report(&f, p, pairing, |t| t.powf(exponent), &sweep)?;
    let mut t = Table::new(vec!["param", "quantity", "majorant", "ratio"]).with_plot(0, 3);
    for row in &report.rows {
        t.push(vec![
            Cell::Float(row.param),
            Cell::Float(row.quantity),
            Cell::Float(row.majorant),
            Cell::Float(row.ratio),
        ]);
    }
    Ok(t)
}

pub fn oracle_cmd(ctx: &Ctx) -> Result<Table> {
    let psi = ctx.loaded.system()?;
    let p = ctx.params().need_p()?;
    let q = ctx.params().need_q()?;
    let count = ctx.params().count.unwrap_or(256);
    let moduli = rearrangement(&psi, count)?;
    let opt = OracleOptions {
        restarts: ctx.params().restarts.unwrap_or_else(|| OracleOptions::default().restarts),
        iters: ctx.params().iters.unwrap_or_else(|| OracleOptions::default().iters),
        seed: ctx.seed,
    };
    let mut t = Table::new(vec!["kind", "count", "keep", "n", "p", "q", "value"]);
    match ctx.params().kind.as_deref() {
        Some("gamma") => {
            let keep = ctx.params().keep.unwrap_or(0);
            if keep > moduli.len() {
                bail!("keep exceeds the enumerated moduli ({})", moduli.len());
            }
            let value = gamma_error_oracle(&moduli[keep..], p, q, opt);
            t.push(vec![
                Cell::Text("gamma".into()),
                Cell::UInt(moduli.len() as u64),
                Cell::UInt(keep as u64),
                Cell::Empty,
                Cell::Float(p),
                Cell::Float(q),
                Cell::Float(value),
            ]);
        }
        Some("nterm") => {
            let n = ctx.params().n.context("oracle nterm needs params.n")?;
            let value = nterm_oracle(&moduli, n as usize, p, q, opt);
            t.push(vec![
                Cell::Text("nterm".into()),
                Cell::UInt(moduli.len() as u64),
                Cell::Empty,
                Cell::UInt(n),
                Cell::Float(p),
                Cell::Float(q),
                Cell::Float(value),
            ]);
        }
        Some(other) => bail!("params.kind must be gamma or nterm, got '{other}'"),
        None => bail!("set params.kind = \"gamma\" or \"nterm\""),
    }
    Ok(t)
}
