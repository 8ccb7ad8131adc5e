use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use hormander::disk::{
    adjoint_kernel_basis, apply_operator, fredholm_report, kernel_basis, project_out_kernel, regularity_probe,
    solvability_residuals, solve, AprioriOptions, DiskBvpProblem, DiskField, NormRequest, ProblemInput,
    SolveOptions,
};
use hormander::green::{adjoint_system_residual, green_pairing_check, green_residual, GreenCheckInput, QuadratureSpec};
use hormander::interpolation::{build_psi, check_direct_sum, check_pseudoconcavity, interp_norm};
use hormander::ro::{
    analytic_indices, check_ro_membership, classical_solution_criterion, embed_criterion, estimate_indices,
    IndexEstimateOptions, IntegralOptions, RoWeight,
};
use hormander::spectra::{
    analyze_circle, derivative_multiplier_bound, embedding_ratio, hnorm, smoothed_modulus, CircleSpectrum,
    LatticeSpectrum, Spectrum,
};
use hormander::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{BvpCommand, CliError, CliResult, Command, GreenCommand, InterpCommand, RoCommand, RunConfig};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Inline JSON, or `@path` to read it from a file.
fn parse_json_arg<T: DeserializeOwned>(arg: &str) -> CliResult<T> {
    let text = match arg.strip_prefix('@') {
        Some(p) => read_text(Path::new(p))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("invalid JSON argument: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    Power,
    PowerLog,
    Oscillating,
}

/// A weight from flags (`--kind` and parameters) or from `--weight JSON`.
#[derive(Debug, Clone, Args)]
pub struct WeightArgs {
    #[arg(long, value_enum)]
    pub kind: Option<WeightKind>,
    /// Power exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// Iterated-log exponents (power_log) or the inner exponent (oscillating).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Vec<f64>,
    #[arg(long)]
    pub t_switch: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Weight as JSON, e.g. '{"kind":"power","s":1}', or @file.
    #[arg(long, conflicts_with = "kind")]
    pub weight: Option<String>,
}

impl WeightArgs {
    pub fn build(&self) -> CliResult<RoWeight> {
        if let Some(w) = &self.weight {
            let w: RoWeight = parse_json_arg(w)?;
            w.validate()?;
            return Ok(w);
        }
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::input(format!("--{name} is required for this weight kind")));
        let w = match self.kind {
            None => return Err(CliError::input("give --kind or --weight")),
            Some(WeightKind::Power) => RoWeight::power(need(self.s, "s")?),
            Some(WeightKind::PowerLog) => {
                let s = need(self.s, "s")?;
                match self.t_switch {
                    Some(t) => RoWeight::power_log_with_switch(s, self.r.clone(), t)?,
                    None => RoWeight::power_log(s, self.r.clone()),
                }
            }
            Some(WeightKind::Oscillating) => RoWeight::oscillating(
                need(self.theta, "theta")?,
                need(self.delta, "delta")?,
                self.r.first().copied().unwrap_or(1.0),
            )?,
        };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Debug, Args)]
pub struct RoIndexArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 1e8)]
    pub tmax: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct RoCheckArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Upper end of the λ interval `[1, b]`.
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1e6)]
    pub tmax: f64,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Points at which to evaluate the weight.
    #[arg(long, value_delimiter = ',')]
    pub at: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct RoEmbedArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1e4)]
    pub tcut: f64,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct RoClassicalArgs {
    /// Interior weight as JSON or @file.
    #[arg(long)]
    pub phi1: String,
    /// Boundary weight as JSON or @file.
    #[arg(long)]
    pub phi2: String,
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub q: u32,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 1e4)]
    pub tcut: f64,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Spectrum file: JSON `{"coeffs": [[k, re, im], ...]}`, a lattice
    /// `{"n", "k_max", "coeffs"}`, or CSV `k,re,im`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON array of `[re, im]` samples at uniform angles, analyzed up to `--k`.
    #[arg(long, conflicts_with = "input")]
    pub samples: Option<PathBuf>,
    /// Truncation for analysis, random spectra and weight-ratio checks.
    #[arg(long = "k")]
    pub k_max: Option<usize>,
    /// Draw a random spectrum with coefficients decaying like ⟨k⟩^{-decay}.
    #[arg(long, conflicts_with_all = ["input", "samples"])]
    pub random: bool,
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,
    /// Second weight η for the embedding ratio α/η.
    #[arg(long)]
    pub eta: Option<String>,
    /// Order l of the tangential derivative multiplier bound.
    #[arg(long)]
    pub derivative: Option<u32>,
    /// Integer frequency vector for ⟨ξ⟩.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Vec<i64>,
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub s0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s1: f64,
}

#[derive(Debug, Args)]
pub struct InterpVerifyArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Spectrum file (JSON or CSV); otherwise random spectra are drawn.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "k", default_value_t = 64)]
    pub k_max: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Components in the direct-sum check.
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,
}

#[derive(Debug, Args)]
pub struct InterpPsiArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Points at which to tabulate ψ.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,10,100,1000")]
    pub at: Vec<f64>,
    #[arg(long, default_value_t = 1e12)]
    pub tmax: f64,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct BvpSolveArgs {
    /// Problem JSON `{"m", "f", "g", "K", "R"}`.
    #[arg(long, required_unless_present = "apply")]
    pub input: Option<PathBuf>,
    /// Instead of solving, apply the operator to this field (JSON).
    #[arg(long, conflicts_with = "input")]
    pub apply: Option<PathBuf>,
    /// Boundary order for `--apply`.
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Norms of the solution, JSON list such as '[{"kind":"interior","s":2}]' or @file.
    #[arg(long)]
    pub norms: Option<String>,
}

#[derive(Debug, Args)]
pub struct BvpFredholmArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long = "k")]
    pub k_max: Option<usize>,
    /// Include kernel and adjoint-kernel bases in the report.
    #[arg(long)]
    pub basis: bool,
}

#[derive(Debug, Args)]
pub struct BvpAprioriArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 3.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long = "k")]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub radial_terms: usize,
    #[arg(long, default_value_t = 5.0)]
    pub decay: f64,
}

#[derive(Debug, Args)]
pub struct BvpRegularityArgs {
    /// Data `ĝ_k = ⟨k⟩^{-decay}`.
    #[arg(long, default_value_t = 6.0)]
    pub decay: f64,
    /// Extra factor `ln(⟨k⟩)^{-r}` in the data.
    #[arg(long, allow_hyphen_values = true)]
    pub log_r: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long = "ks", value_delimiter = ',', default_value = "16,32,64,128,256")]
    pub truncations: Vec<usize>,
    /// Sobolev orders t of the trace norms.
    #[arg(long, value_delimiter = ',', default_value = "6,6.5,7,7.5,8")]
    pub ladder: Vec<f64>,
    /// Extra ladder weights as a JSON list or @file.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub normal_orders: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct GreenVerifyArgs {
    /// Quadruple JSON `{"u", "v", "w", "h", "quadrature"}`; otherwise random.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "k", default_value_t = 16)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 6)]
    pub radial_terms: usize,
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,
    #[arg(long, default_value_t = 128)]
    pub radial_points: usize,
    #[arg(long, default_value_t = 128)]
    pub angular_points: usize,
    /// Also check the adjoint basis and its pairings with `u`.
    #[arg(long)]
    pub adjoint: bool,
}

pub fn dispatch(cmd: &Command, cfg: &mut RunConfig) -> CliResult<Value> {
    match cmd {
        Command::Ro(RoCommand::Index(a)) => ro_index(a),
        Command::Ro(RoCommand::Check(a)) => ro_check(a),
        Command::Ro(RoCommand::Embed(a)) => ro_embed(a),
        Command::Ro(RoCommand::Classical(a)) => ro_classical(a),
        Command::Norm(a) => norm(a, cfg),
        Command::Interp(InterpCommand::Verify(a)) => interp_verify(a, cfg),
        Command::Interp(InterpCommand::Psi(a)) => interp_psi(a),
        Command::Bvp(BvpCommand::Solve(a)) => bvp_solve(a, cfg),
        Command::Bvp(BvpCommand::Fredholm(a)) => bvp_fredholm(a, cfg),
        Command::Bvp(BvpCommand::Apriori(a)) => bvp_apriori(a, cfg),
        Command::Bvp(BvpCommand::Regularity(a)) => bvp_regularity(a),
        Command::Green(GreenCommand::Verify(a)) => green_verify(a, cfg),
    }
}

fn ro_index(a: &RoIndexArgs) -> CliResult<Value> {
    let w = a.weight.build()?;
    let opts = IndexEstimateOptions {
        t_max: a.tmax,
        lambda_grid: a.lambdas.clone(),
        t_grid_size: a.grid,
    };
    let est = estimate_indices(&w, &opts)?;
    Ok(json!({
        "weight": to_value(&w),
        "analytic": analytic_indices(&w).ok().map(|p| to_value(&p)),
        "estimate": to_value(&est),
        "options": to_value(&opts),
    }))
}

fn ro_check(a: &RoCheckArgs) -> CliResult<Value> {
    let w = a.weight.build()?;
    let values = a
        .at
        .iter()
        .map(|&t| Ok(json!({"t": t, "value": w.eval(t)?})))
        .collect::<CliResult<Vec<Value>>>()?;
    let mem = check_ro_membership(&w, a.b, a.tmax, a.grid)?;
    Ok(json!({
        "weight": to_value(&w),
        "values": values,
        "membership": to_value(&mem),
        "b": a.b,
        "t_max": a.tmax,
        "grid": a.grid,
    }))
}

fn ro_embed(a: &RoEmbedArgs) -> CliResult<Value> {
    let w = a.weight.build()?;
    let opts = IntegralOptions {
        t_cut: a.tcut,
        quadrature_points: a.points,
    };
    let v = embed_criterion(&w, a.p, a.n, &opts)?;
    let mut out = to_value(&v);
    out["weight"] = to_value(&w);
    out["p"] = json!(a.p);
    out["n"] = json!(a.n);
    out["options"] = to_value(&opts);
    Ok(out)
}

fn ro_classical(a: &RoClassicalArgs) -> CliResult<Value> {
    let phi1: RoWeight = parse_json_arg(&a.phi1)?;
    let phi2: RoWeight = parse_json_arg(&a.phi2)?;
    phi1.validate()?;
    phi2.validate()?;
    let opts = IntegralOptions {
        t_cut: a.tcut,
        quadrature_points: a.points,
    };
    let v = classical_solution_criterion(&phi1, &phi2, a.n, a.q, a.m, &opts)?;
    let mut out = to_value(&v);
    out["n"] = json!(a.n);
    out["q"] = json!(a.q);
    out["m"] = json!(a.m);
    out["options"] = to_value(&opts);
    Ok(out)
}

fn parse_complex_samples(path: &Path) -> CliResult<Vec<Complex64>> {
    let raw: Vec<[f64; 2]> = read_json(path)?;
    Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

enum AnySpectrum {
    Circle(CircleSpectrum),
    Lattice(LatticeSpectrum),
}

impl AnySpectrum {
    fn as_dyn(&self) -> &dyn Spectrum {
        match self {
            AnySpectrum::Circle(c) => c,
            AnySpectrum::Lattice(l) => l,
        }
    }
}

fn read_spectrum(path: &Path) -> CliResult<AnySpectrum> {
    let text = read_text(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok(AnySpectrum::Circle(CircleSpectrum::from_csv(&text)?));
    }
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if v.get("n").is_some() {
        let l: LatticeSpectrum = serde_json::from_value(v).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        // re-validate shape
        let l = LatticeSpectrum::new(l.dim(), l.k_max(), l.modes().into_iter().map(|m| m.1).collect())?;
        return Ok(AnySpectrum::Lattice(l));
    }
    let c: CircleSpectrum = serde_json::from_value(v).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(AnySpectrum::Circle(c))
}

fn norm(a: &NormArgs, cfg: &RunConfig) -> CliResult<Value> {
    let w = a.weight.build()?;
    let k_max = a.k_max.unwrap_or(cfg.truncations.k_max);
    let mut out = json!({"weight": to_value(&w), "K": k_max});
    let spectrum = if let Some(p) = &a.input {
        Some(read_spectrum(p)?)
    } else if let Some(p) = &a.samples {
        let s = analyze_circle(&parse_complex_samples(p)?, k_max)?;
        out["spectrum"] = to_value(&s);
        Some(AnySpectrum::Circle(s))
    } else if a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let s = CircleSpectrum::random(k_max, a.decay, &mut rng);
        out["spectrum"] = to_value(&s);
        Some(AnySpectrum::Circle(s))
    } else {
        None
    };
    if let Some(s) = &spectrum {
        out["hnorm"] = json!(hnorm(s.as_dyn(), &w));
        out["l2_norm"] = json!(hnorm(s.as_dyn(), &RoWeight::power(0.0)));
    }
    if let Some(eta) = &a.eta {
        let eta: RoWeight = parse_json_arg(eta)?;
        eta.validate()?;
        out["eta"] = to_value(&eta);
        out["embedding"] = to_value(&embedding_ratio(&w, &eta, k_max));
    }
    if let Some(l) = a.derivative {
        out["derivative_order"] = json!(l);
        out["derivative_multiplier_bound"] = json!(derivative_multiplier_bound(l, &w, k_max));
    }
    if !a.xi.is_empty() {
        out["xi"] = json!(a.xi);
        out["smoothed_modulus"] = json!(smoothed_modulus(&a.xi));
    }
    Ok(out)
}

fn interp_verify(a: &InterpVerifyArgs, cfg: &RunConfig) -> CliResult<Value> {
    let setup = build_psi(a.setup.weight.build()?, a.setup.s0, a.setup.s1)?;
    let alpha = setup.alpha().clone();
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut add = |label: String, s: &dyn Spectrum| {
        let i = interp_norm(s, &setup);
        let h = hnorm(s, &alpha);
        let r = if h == 0.0 { (i - h).abs() } else { rel(i, h) };
        worst = worst.max(r);
        rows.push(json!({"spectrum": label, "interp_norm": i, "hnorm": h, "relative_difference": r}));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if let Some(p) = &a.input {
        let s = read_spectrum(p)?;
        add(p.display().to_string(), s.as_dyn());
    } else {
        for t in 0..a.trials {
            let s = CircleSpectrum::random(a.k_max, a.decay, &mut rng);
            add(format!("random {t}"), &s);
        }
    }
    let parts: Vec<CircleSpectrum> = (0..a.components)
        .map(|_| CircleSpectrum::random(a.k_max, a.decay, &mut rng))
        .collect();
    let dyns: Vec<&dyn Spectrum> = parts.iter().map(|p| p as &dyn Spectrum).collect();
    let setups = vec![setup.clone(); parts.len()];
    let residual = check_direct_sum(&setups, &dyns)?;
    let total = parts.iter().map(|p| interp_norm(p, &setup).powi(2)).sum::<f64>().sqrt();
    Ok(json!({
        "setup": to_value(&setup),
        "indices": to_value(&setup.indices()),
        "K": a.k_max,
        "decay": a.decay,
        "norms": rows,
        "max_relative_difference": worst,
        "direct_sum": {
            "components": a.components,
            "residual": residual,
            "relative_residual": if total > 0.0 { residual / total } else { residual },
        },
    }))
}

fn interp_psi(a: &InterpPsiArgs) -> CliResult<Value> {
    let setup = build_psi(a.setup.weight.build()?, a.setup.s0, a.setup.s1)?;
    let table: Vec<Value> = a.at.iter().map(|&t| json!({"t": t, "psi": setup.psi(t)})).collect();
    Ok(json!({
        "setup": to_value(&setup),
        "indices": to_value(&setup.indices()),
        "psi": table,
        "pseudoconcavity": to_value(&check_pseudoconcavity(&setup, a.tmax, a.grid)),
        "t_max": a.tmax,
        "grid": a.grid,
    }))
}

fn bvp_solve(a: &BvpSolveArgs, cfg: &mut RunConfig) -> CliResult<Value> {
    let norms: Vec<NormRequest> = match &a.norms {
        Some(n) => parse_json_arg(n)?,
        None => Vec::new(),
    };
    if let Some(p) = &a.apply {
        cfg.input_path = Some(p.clone());
        let u: DiskField = read_json(p)?;
        let (f, g) = apply_operator(&u, a.m);
        let residuals = solvability_residuals(&f, &g, a.m)?;
        return Ok(json!({
            "m": a.m,
            "K": u.k_max(),
            "f": to_value(&f),
            "g": to_value(&g),
            "solvability_residuals": to_value(&residuals),
        }));
    }
    let path = a.input.as_ref().expect("clap enforces --input or --apply");
    cfg.input_path = Some(path.clone());
    let input: ProblemInput = read_json(path)?;
    let problem: DiskBvpProblem = input.into_problem()?;
    let report = solve(&problem, &norms, SolveOptions { threads: cfg.threads })?;
    let scale = problem.f.l2_norm() + problem.g.l2_norm();
    let ok = report.operator_residual <= cfg.tolerances.operator * scale.max(1.0);
    let mut out = to_value(&report);
    out["operator_residual_ok"] = json!(ok);
    out["tolerance"] = json!(cfg.tolerances.operator);
    Ok(out)
}

fn bvp_fredholm(a: &BvpFredholmArgs, cfg: &RunConfig) -> CliResult<Value> {
    let k_max = a.k_max.unwrap_or((a.m.max(1) - 1) as usize).max(a.m.saturating_sub(1) as usize);
    let _ = cfg;
    let rep = fredholm_report(a.m, k_max)?;
    let mut out = to_value(&rep);
    if a.basis {
        out["kernel_basis"] = to_value(&kernel_basis(a.m, k_max)?);
        if a.m == 2 {
            out["adjoint_kernel_basis"] = to_value(&adjoint_kernel_basis(k_max)?);
        }
    }
    Ok(out)
}

fn bvp_apriori(a: &BvpAprioriArgs, cfg: &RunConfig) -> CliResult<Value> {
    let opts = AprioriOptions {
        trials: a.trials,
        s: a.s,
        lambda: a.lambda,
        seed: cfg.seed,
        m: a.m,
        k_max: a.k_max.unwrap_or(cfg.truncations.k_max),
        radial_terms: a.radial_terms,
        decay: a.decay,
    };
    Ok(to_value(&hormander::disk::apriori_probe(&opts)?))
}

fn bvp_regularity(a: &BvpRegularityArgs) -> CliResult<Value> {
    let mut beta = RoWeight::power(a.decay);
    if let Some(r) = a.log_r {
        beta = RoWeight::product(beta, RoWeight::power_log(0.0, vec![r]));
    }
    let mut ladder: Vec<RoWeight> = a.ladder.iter().map(|&t| RoWeight::power(t)).collect();
    if let Some(w) = &a.weights {
        let extra: Vec<RoWeight> = parse_json_arg(w)?;
        ladder.extend(extra);
    }
    let rep = regularity_probe(&beta, a.m, &a.truncations, &ladder, &a.normal_orders)?;
    let mut out = to_value(&rep);
    out["decay"] = json!(a.decay);
    out["truncations"] = json!(a.truncations);
    // threshold for the trace of order j under pure power decay
    out["predicted_thresholds"] = a
        .normal_orders
        .iter()
        .map(|&j| json!({"normal_order": j, "t": a.decay + a.m as f64 - j as f64 - 0.5}))
        .collect();
    Ok(out)
}

fn green_verify(a: &GreenVerifyArgs, cfg: &mut RunConfig) -> CliResult<Value> {
    let quadrature = QuadratureSpec {
        radial_points: a.radial_points,
        angular_points: a.angular_points,
    };
    let inputs: Vec<GreenCheckInput> = match &a.input {
        Some(p) => {
            cfg.input_path = Some(p.clone());
            vec![read_json(p)?]
        }
        None => (0..a.trials as u64)
            .map(|t| {
                let mut g = GreenCheckInput::random(a.k_max, a.radial_terms, a.decay, cfg.seed, t);
                g.quadrature = quadrature;
                g
            })
            .collect(),
    };
    let mut results = Vec::new();
    let mut worst: f64 = 0.0;
    for inp in &inputs {
        let r = green_residual(inp)?;
        worst = worst.max(r.residual);
        results.push(to_value(&r));
    }
    let mut out = json!({
        "K": a.k_max,
        "trials": inputs.len(),
        "results": results,
        "max_residual": worst,
        "ok": worst <= cfg.tolerances.green,
        "tolerance": cfg.tolerances.green,
    });
    if a.adjoint {
        let k = inputs.iter().map(GreenCheckInput::k_max).max().unwrap_or(1).max(1);
        let triples = adjoint_kernel_basis(k)?;
        let checks: Vec<Value> = triples
            .iter()
            .map(|t| {
                let pairings: Vec<f64> = inputs
                    .iter()
                    .map(|i| green_pairing_check(&project_out_kernel(&i.u, 2), t))
                    .collect();
                json!({"system": to_value(&adjoint_system_residual(t)), "pairings": pairings})
            })
            .collect();
        out["adjoint"] = json!(checks);
    }
    Ok(out)
}
