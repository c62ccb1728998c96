use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thetapair::bootstrap::{ci_basic, ci_bca, ci_normal, ci_percentile, jackknife, run_bootstrap};
use thetapair::kernels::silverman_density_bw;
use thetapair::numerics::normal_pdf;
use thetapair::simulate::{correlation_oracle, sample_sas, theta_independent_oracle, theta_oracle};
use thetapair::{
    BootstrapResult, CiKind, EstimatorSpec, Method, PairedSample, ResamplingScheme, RngStream, Seed, SinhArcsinhParams,
};

use crate::config::{DataSource, OutputFormat, RunConfig};
use crate::error::CliError;
use crate::ingest::ingest_csv;
use crate::report::{IntervalCell, ReportRow, ThetaReport};

/// Stream reserved for drawing simulated data; bootstrap replicates use the
/// low stream indices of the same seed.
pub const DATA_STREAM: u64 = u64::MAX;

const DENSITY_GRID: usize = 512;

pub fn load_data(source: &DataSource, seed: Seed) -> Result<PairedSample, CliError> {
    match source {
        DataSource::Input(path) => ingest_csv(path),
        DataSource::Simulate { params, n } => Ok(sample_sas(params, *n, RngStream::new(seed, DATA_STREAM))?),
    }
}

/// A finished `estimate` run: the table plus the bootstrap distributions
/// behind each successful row.
pub struct EstimateOutput {
    pub report: ThetaReport,
    pub bootstraps: Vec<(Method, BootstrapResult)>,
}

pub fn estimate_command(cfg: &RunConfig) -> Result<EstimateOutput, CliError> {
    cfg.validate()?;
    let data = load_data(&cfg.source, cfg.seed)?;
    let run = || estimate_on(&data, cfg);
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {t} threads: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Runs every configured estimator on `data`. Estimator failures are recorded
/// in their own row; the other rows are unaffected.
pub fn estimate_on(data: &PairedSample, cfg: &RunConfig) -> Result<EstimateOutput, CliError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut bootstraps = Vec::new();
    for &method in &cfg.methods {
        let spec = EstimatorSpec::new(method);
        let scheme = ResamplingScheme::default_for(method);
        match run_bootstrap(data, &spec, scheme, cfg.replicates, cfg.seed) {
            Ok(r) => {
                let jack = jackknife(data, &spec, scheme);
                let intervals = CiKind::ALL
                    .into_iter()
                    .map(|kind| {
                        let ci = match kind {
                            CiKind::Normal => ci_normal(&r, cfg.level),
                            CiKind::Basic => ci_basic(&r, cfg.level),
                            CiKind::Percentile => ci_percentile(&r, cfg.level),
                            CiKind::BCa => jack.clone().and_then(|j| ci_bca(&r, &j, cfg.level)),
                        };
                        IntervalCell::from_result(kind, ci)
                    })
                    .collect();
                rows.push(ReportRow {
                    method,
                    scheme,
                    estimate: Some(r.point.value),
                    intervals,
                    error: None,
                });
                bootstraps.push((method, r));
            }
            Err(e) => rows.push(ReportRow {
                method,
                scheme,
                estimate: None,
                intervals: Vec::new(),
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(EstimateOutput {
        report: ThetaReport {
            n: data.len(),
            replicates: cfg.replicates,
            level: cfg.level,
            seed: cfg.seed.0,
            rows,
        },
        bootstraps,
    })
}

/// Writes `replicates_<method>.csv` and `density_<method>.csv` into `dir` for
/// every bootstrapped method, returning the paths written.
pub fn export_replicates(dir: &Path, bootstraps: &[(Method, BootstrapResult)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut written = Vec::new();
    for (method, r) in bootstraps {
        let mut reps = String::from("replicate_index,theta\n");
        for (i, v) in r.replicates.iter().enumerate() {
            let _ = writeln!(reps, "{i},{v}");
        }
        let path = dir.join(format!("replicates_{}.csv", method.slug()));
        write_file(&path, &reps)?;
        written.push(path);

        // A constant replicate set has no density to draw.
        if let Some(curve) = density_curve(&r.replicates) {
            let mut dens = String::from("grid_z,density\n");
            for (z, d) in curve {
                let _ = writeln!(dens, "{z},{d}");
            }
            let path = dir.join(format!("density_{}.csv", method.slug()));
            write_file(&path, &dens)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Gaussian kernel density of `values` on 512 points spanning the data
/// plus three bandwidths on either side.
pub fn density_curve(values: &[f64]) -> Option<Vec<(f64, f64)>> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return None;
    }
    let h = silverman_density_bw(values).ok()?.get();
    let (lo, hi) = (min - 3.0 * h, max + 3.0 * h);
    let n = values.len() as f64;
    Some(
        (0..DENSITY_GRID)
            .map(|i| {
                let z = lo + (hi - lo) * i as f64 / (DENSITY_GRID - 1) as f64;
                let d = values.iter().map(|v| normal_pdf((z - v) / h)).sum::<f64>() / (n * h);
                (z, d)
            })
            .collect(),
    )
}

/// The simulated sample as CSV text with 17 significant digits, enough to
/// read every value back exactly.
pub fn simulate_command(params: &SinhArcsinhParams, n: usize, seed: Seed) -> Result<String, CliError> {
    if n < 2 {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let sample = sample_sas(params, n, RngStream::new(seed, DATA_STREAM))?;
    let mut out = String::with_capacity(48 * n);
    out.push_str("x,y\n");
    for (x, y) in sample.pairs() {
        let _ = writeln!(out, "{x:.16e},{y:.16e}");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValues {
    pub theta: f64,
    pub theta_independent: f64,
    pub correlation: f64,
    pub tolerance: f64,
}

pub fn oracle_command(params: &SinhArcsinhParams, tolerance: f64) -> Result<OracleValues, CliError> {
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if !(tolerance > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tolerance}")));
    }
    Ok(OracleValues {
        theta: theta_oracle(params, tolerance)?,
        theta_independent: theta_independent_oracle(params, tolerance)?,
        correlation: correlation_oracle(params, tolerance)?,
        tolerance,
    })
}

impl OracleValues {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => format!(
                "theta              {:.6}\ntheta_independent  {:.6}\ncorrelation        {:.6}\ntolerance          {:e}\n",
                self.theta, self.theta_independent, self.correlation, self.tolerance
            ),
            OutputFormat::Csv => format!(
                "theta,theta_independent,correlation,tolerance\n{},{},{},{}\n",
                self.theta, self.theta_independent, self.correlation, self.tolerance
            ),
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("serializes") + "\n",
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
