use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use slope_core::experiments::{cv_grid, emit_csv, emit_svg, evaluate_assertions, manifest_json, run_experiment};
use slope_core::io::{parse_text_vector, read_matrix, read_vector, write_matrix, write_vector};
use slope_core::solvers::fit;
use slope_core::{
    cross_validate, gen_design, gen_noise, gen_signal, gen_weights, m_lambda, noise_sensitivity, optimal_risk,
    prox_sorted_l1, solve_se, DesignKind, DesignSpec, EstimatorKind, ExperimentSpec, LinearModelInstance,
    SEProblem, SignalKind, SignalSpec, SolverOptions, WeightKind, WeightSpec, WeightVector,
};

use crate::{pretty, Cli, Command, DomainError, GlobalOptions};

type CmdResult = Result<(), DomainError>;

/// Parses a kebab-case enum through its serde representation.
fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn say(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(g: &GlobalOptions, value: &T) -> CmdResult {
    let v = serde_json::to_value(value)?;
    if g.pretty {
        say(&pretty::table(&v))
    } else {
        say(&format!("{}\n", serde_json::to_string(&v)?))
    }
}

pub fn dispatch(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Prox(a) => prox(g, a),
        Command::Fit(a) => fit_cmd(g, a),
        Command::Se(a) => se(g, a),
        Command::Phase(a) => phase(g, a),
        Command::Gen(a) => gen(g, a),
        Command::Experiment { action } => match action {
            ExperimentAction::Run(a) => experiment_run(g, a),
        },
    }
}

#[derive(Args, Debug)]
pub struct WeightArgs {
    /// Weight family.
    #[arg(long, value_parser = kebab::<WeightKind>, default_value = "bh")]
    pub weights_kind: WeightKind,
    /// Explicit nonincreasing weights (vector file); overrides --weights-kind.
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Target FDR of the BH weights.
    #[arg(long, default_value_t = 0.5)]
    pub q_bh: f64,
}

impl WeightArgs {
    fn weights(&self, p: usize) -> Result<WeightVector, DomainError> {
        if let Some(path) = &self.weights_file {
            let w = WeightVector::new(read_vector(path)?)?;
            if w.p() != p {
                return Err(DomainError(format!("weights file has {} entries, expected {p}", w.p())));
            }
            return Ok(w);
        }
        let spec = WeightSpec {
            q_bh: self.q_bh,
            ..WeightSpec::new(self.weights_kind, p)
        };
        Ok(gen_weights(&spec)?)
    }
}

#[derive(Args, Debug)]
pub struct ProxArgs {
    /// Text file: the vector u on the first line, the weights on the second.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

fn prox(g: &GlobalOptions, a: &ProxArgs) -> CmdResult {
    let text = fs::read_to_string(&a.input).map_err(|e| DomainError(format!("{}: {e}", a.input.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let (Some(u), Some(w)) = (lines.next(), lines.next()) else {
        return Err(DomainError("prox input needs two lines: the vector, then the weights".into()));
    };
    let u = parse_text_vector(u)?;
    let lambda = WeightVector::new(parse_text_vector(w)?)?;
    let r = prox_sorted_l1(&u, a.gamma, &lambda)?;
    let groups: Vec<Value> = r
        .groups
        .iter()
        .map(|grp| json!({ "value": grp.value, "members": r.members(grp) }))
        .collect();
    let mut text = String::new();
    if g.pretty {
        text.push_str(&format!("eta: {:?}\n", r.eta));
        for (i, grp) in groups.iter().enumerate() {
            text.push_str(&format!("group {i}: |eta|={} members={}\n", grp["value"], grp["members"]));
        }
    } else {
        text.push_str(&format!("{}\n", json!({ "eta": r.eta })));
        for grp in groups {
            text.push_str(&format!("{}\n", json!({ "group": grp })));
        }
    }
    say(&text)
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Design matrix (binary, or CSV with a .csv extension).
    #[arg(long)]
    pub design: PathBuf,
    /// Response vector.
    #[arg(long)]
    pub response: PathBuf,
    #[arg(long, value_parser = ["slope", "lasso", "ridge", "bridge"], default_value = "slope")]
    pub estimator: String,
    /// Penalty level; cross-validated over --grid when omitted.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bridge exponent.
    #[arg(long, default_value_t = 1.5)]
    pub q: f64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 5)]
    pub cv_folds: usize,
    /// Comma-separated CV penalties; default 40 log-spaced values scaled to the data.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iter: usize,
}

fn fit_cmd(g: &GlobalOptions, a: &FitArgs) -> CmdResult {
    let design = read_matrix(&a.design)?;
    let y = read_vector(&a.response)?;
    let inst = LinearModelInstance::new(design, y)?;
    let kind = match a.estimator.as_str() {
        "slope" => EstimatorKind::Slope {
            weights: a.weights.weights(inst.p())?,
        },
        "lasso" => EstimatorKind::Lasso,
        "ridge" => EstimatorKind::Ridge,
        _ => EstimatorKind::Bridge { q: a.q },
    };
    let opts = SolverOptions::new(a.tol, a.max_iter);
    let (gamma, cv) = match a.gamma {
        Some(gamma) => (gamma, None),
        None => {
            let grid = a.grid.clone().unwrap_or_else(|| cv_grid(inst.gradient_scale(), 40));
            let cv = cross_validate(&inst, &kind, &grid, a.cv_folds, g.seed(), &opts)?;
            (cv.best_gamma, Some(cv))
        }
    };
    let result = fit(&inst, &kind, gamma, &opts)?;
    if !result.converged {
        log::warn!("fit stopped after {} iterations before reaching tolerance", result.iterations);
    }
    let mut out = json!({ "estimator": kind.name(), "fit": result });
    if let Some(cv) = cv {
        out["cv"] = serde_json::to_value(cv)?;
    }
    emit(g, &out)
}

#[derive(Args, Debug)]
pub struct SignalArgs {
    /// Signal vector file; overrides --signal-kind.
    #[arg(long)]
    pub signal_file: Option<PathBuf>,
    #[arg(long, value_parser = kebab::<SignalKind>, default_value = "bernoulli-scaled")]
    pub signal_kind: SignalKind,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 5.0)]
    pub amplitude: f64,
    /// Dimension of a generated signal.
    #[arg(long, default_value_t = 1000)]
    pub p: usize,
}

impl SignalArgs {
    fn signal(&self, seed: u64) -> Result<Vec<f64>, DomainError> {
        match &self.signal_file {
            Some(path) => Ok(read_vector(path)?),
            None => {
                let spec = SignalSpec {
                    amplitude: self.amplitude,
                    ..SignalSpec::new(self.signal_kind, self.epsilon, self.p)
                };
                Ok(gen_signal(&spec, seed)?)
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct SeArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub sigma_z: f64,
    /// Penalty level to solve at.
    #[arg(long, required_unless_present = "optimal", conflicts_with = "optimal")]
    pub gamma: Option<f64>,
    /// Minimize the predicted MSE over the penalty instead.
    #[arg(long)]
    pub optimal: bool,
    #[arg(long, default_value_t = 2000)]
    pub mc_samples: usize,
}

fn se(g: &GlobalOptions, a: &SeArgs) -> CmdResult {
    let x = a.signal.signal(g.seed())?;
    let lambda = a.weights.weights(x.len())?;
    let prob = SEProblem::new(x, lambda, a.delta, a.sigma_z)
        .with_mc_samples(a.mc_samples)
        .with_seed(g.seed());
    match a.gamma {
        Some(gamma) => emit(g, &solve_se(&prob, gamma)?),
        None => emit(g, &optimal_risk(&prob)?),
    }
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 1000)]
    pub p: usize,
    /// Sparsity fraction; k = round(εp).
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Undersampling ratio for the noise-sensitivity column.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Weight families (comma-separated); default all built-in families.
    #[arg(long, value_delimiter = ',', value_parser = kebab::<WeightKind>)]
    pub families: Option<Vec<WeightKind>>,
    #[arg(long, default_value_t = 0.5)]
    pub q_bh: f64,
    #[arg(long, default_value_t = 2000)]
    pub mc_samples: usize,
}

fn kind_name(k: WeightKind) -> String {
    serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn phase(g: &GlobalOptions, a: &PhaseArgs) -> CmdResult {
    let families = a.families.clone().unwrap_or_else(|| {
        vec![
            WeightKind::Constant,
            WeightKind::LinearUniform,
            WeightKind::Bh,
            WeightKind::Max2,
            WeightKind::Equispaced,
        ]
    });
    if !(0.0..=1.0).contains(&a.epsilon) {
        return Err(DomainError(format!("epsilon must lie in [0, 1], got {}", a.epsilon)));
    }
    let k = (a.epsilon * a.p as f64).round() as usize;
    let mut out = String::from("weights,k,p,m_lambda,std_err,alpha,delta,noise_sensitivity\n");
    for fam in families {
        let spec = WeightSpec {
            q_bh: a.q_bh,
            ..WeightSpec::new(fam, a.p)
        };
        let lambda = gen_weights(&spec)?;
        let est = m_lambda(k, &lambda, a.mc_samples, g.seed())?;
        let (delta, sens) = match a.delta {
            Some(d) => (d.to_string(), noise_sensitivity(d, est.value)?.value.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{k},{},{},{},{},{delta},{sens}\n",
            kind_name(fam),
            a.p,
            est.value,
            est.std_err,
            est.alpha
        ));
    }
    if g.pretty {
        let table: String = out
            .lines()
            .map(|line| line.split(',').map(|c| format!("{c:>18}")).collect::<String>() + "\n")
            .collect();
        say(&table)
    } else {
        say(&out)
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub what: GenWhat,
    /// Output file (binary, or CSV with a .csv extension).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GenWhat {
    /// n×p design matrix.
    Design {
        #[arg(long, value_parser = kebab::<DesignKind>, default_value = "iid-gaussian")]
        kind: DesignKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value_t = 3)]
        df: u32,
    },
    /// Sparse signal vector.
    Signal {
        #[arg(long, value_parser = kebab::<SignalKind>, default_value = "bernoulli-scaled")]
        kind: SignalKind,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 5.0)]
        amplitude: f64,
    },
    /// Gaussian noise vector.
    Noise {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma_z: f64,
    },
    /// Weight sequence.
    Weights {
        #[arg(long, value_parser = kebab::<WeightKind>, default_value = "bh")]
        kind: WeightKind,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0.5)]
        q_bh: f64,
    },
}

fn gen(g: &GlobalOptions, a: &GenArgs) -> CmdResult {
    let seed = g.seed();
    let out = a.out.as_ref().map(|p| g.resolve(p));
    let (what, rows, cols) = match &a.what {
        GenWhat::Design { kind, n, p, rho, df } => {
            let spec = DesignSpec {
                rho: *rho,
                df: *df,
                ..DesignSpec::new(*kind, *n, *p)
            };
            let m = gen_design(&spec, seed)?;
            match &out {
                Some(path) => write_matrix(path, &m)?,
                None => say(&slope_core::io::matrix_to_csv(&m))?,
            }
            ("design", *n, *p)
        }
        GenWhat::Signal { kind, p, epsilon, amplitude } => {
            let spec = SignalSpec {
                amplitude: *amplitude,
                ..SignalSpec::new(*kind, *epsilon, *p)
            };
            write_or_print(&out, &gen_signal(&spec, seed)?)?;
            ("signal", *p, 1)
        }
        GenWhat::Noise { n, sigma_z } => {
            write_or_print(&out, &gen_noise(*n, *sigma_z, seed)?)?;
            ("noise", *n, 1)
        }
        GenWhat::Weights { kind, p, q_bh } => {
            let spec = WeightSpec {
                q_bh: *q_bh,
                ..WeightSpec::new(*kind, *p)
            };
            write_or_print(&out, gen_weights(&spec)?.as_slice())?;
            ("weights", *p, 1)
        }
    };
    if let Some(path) = out {
        emit(g, &json!({ "generated": what, "path": path, "rows": rows, "cols": cols, "seed": seed }))?;
    }
    Ok(())
}

fn write_or_print(out: &Option<PathBuf>, v: &[f64]) -> CmdResult {
    match out {
        Some(path) => write_vector(path, v)?,
        None => say(&format!("{}\n", serde_json::to_string(v)?))?,
    }
    Ok(())
}

#[derive(Subcommand, Debug)]
pub enum ExperimentAction {
    /// Run an experiment spec and write CSV, SVG and a provenance manifest.
    Run(RunArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub spec: PathBuf,
    /// Exit with status 1 when any assertion in the spec fails.
    #[arg(long)]
    pub assert: bool,
}

fn load_spec(path: &Path) -> Result<ExperimentSpec, DomainError> {
    let text = fs::read_to_string(path).map_err(|e| DomainError(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        DomainError(format!("{}: invalid spec at key `{key}`: {}", path.display(), e.inner()))
    })?;
    Ok(spec.normalized())
}

fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect();
    let parts: Vec<&str> = s.split('-').filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        "experiment".into()
    } else {
        parts.join("-")
    }
}

fn experiment_run(g: &GlobalOptions, a: &RunArgs) -> CmdResult {
    let mut spec = load_spec(&a.spec)?;
    if let Some(seed) = g.seed {
        spec.base_seed = seed;
    }
    spec.validate()?;
    let table = run_experiment(&spec)?;
    let stem = slug(&spec.name);
    let path = |given: &Option<String>, ext: &str| g.resolve(Path::new(&given.clone().unwrap_or(format!("{stem}.{ext}"))));
    let csv = path(&spec.outputs.csv, "csv");
    let svg = path(&spec.outputs.svg, "svg");
    let manifest = path(&spec.outputs.manifest, "manifest.json");
    for p in [&csv, &svg, &manifest] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
    }
    emit_csv(&table, &csv)?;
    emit_svg(&table, &svg)?;
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    fs::write(&manifest, manifest_json(&spec, &table, created))?;

    let outcomes = evaluate_assertions(&table, &spec.assertions);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let summary = json!({
        "name": spec.name,
        "spec_hash": table.provenance.spec_hash,
        "rows": table.rows.len(),
        "csv": csv,
        "svg": svg,
        "manifest": manifest,
        "notes": table.provenance.notes,
        "assertions": outcomes.iter().map(|o| json!({
            "description": o.description,
            "passed": o.passed,
            "detail": o.detail,
        })).collect::<Vec<_>>(),
    });
    emit(g, &summary)?;
    if a.assert && failed > 0 {
        return Err(DomainError(format!("{failed} of {} assertions failed", outcomes.len())));
    }
    Ok(())
}
