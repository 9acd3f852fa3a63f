//! The `run`, `resume`, `audit` and `inspect-checkpoint` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::checkpoint::{self, CheckpointHeader, ConfigDigest};
use super::config::{parse_audit_config, parse_config, AuditConfig, RunConfig};
use super::csv::CsvWriter;
use crate::diagnostics::{
    audit_commutator_product, audit_gn_inequalities, corpus, AuditRow, DiagnosticsRecord, Monitor,
};
use crate::error::{Error, Result};
use crate::littlewood_paley::{
    audit_interpolation, audit_interpolation_sobolev, build_cutoff_bank, TRUNCATION_NOTE,
};
use crate::par;
use crate::solver::{run, RunHooks, RunPlan, State, SCHEME_TAG};
use crate::spectral::{Grid, SpectralField};

/// Command-line overrides applied on top of a configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read {}: {e}", path.display()),
        ))
    })
}

pub fn load_run_config(path: &Path, o: &Overrides) -> Result<RunConfig> {
    let mut cfg = parse_config(&read_text(path)?)?;
    if let Some(d) = &o.output_dir {
        cfg.output.dir = d.clone();
    }
    if let Some(s) = o.seed {
        cfg.apply_seed(s);
    }
    Ok(cfg)
}

pub fn load_audit_config(path: &Path, o: &Overrides) -> Result<AuditConfig> {
    let mut cfg = parse_audit_config(&read_text(path)?)?;
    if let Some(d) = &o.output_dir {
        cfg.dir = d.clone();
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Outcome of a run or resume.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dim: usize,
    pub steps: u64,
    pub t: f64,
    pub epsilon0: f64,
    pub sup_besov_u: f64,
    pub sup_besov_grad_d: f64,
    pub criterion_ok: bool,
    /// Reason the run stopped early, if it did.
    pub terminated: Option<String>,
}

impl RunSummary {
    pub fn blew_up(&self) -> bool {
        self.terminated.is_some()
    }

    pub fn line(&self) -> String {
        let watched = if self.dim == 3 {
            "max(besov_u, besov_grad_d)"
        } else {
            "besov_grad_d"
        };
        let verdict = if self.criterion_ok {
            "held"
        } else {
            "violated"
        };
        let mut s = format!(
            "steps {} t {:e}: sup besov_u = {:e}, sup besov_grad_d = {:e}; {watched} <= epsilon0 = {:e} {verdict}",
            self.steps, self.t, self.sup_besov_u, self.sup_besov_grad_d, self.epsilon0
        );
        if let Some(r) = &self.terminated {
            let _ = write!(s, "; run stopped: {r}");
        }
        s
    }
}

struct Sink {
    csv: CsvWriter,
    checkpoint_path: PathBuf,
    checkpoint_every: u64,
    digest: ConfigDigest,
}

impl RunHooks for Sink {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.csv.write(record)
    }

    fn on_step(&mut self, step: u64, state: &State, monitor: &Monitor) -> Result<()> {
        if self.checkpoint_every > 0 && step.is_multiple_of(self.checkpoint_every) {
            let g = state.grid();
            let header = CheckpointHeader {
                dim: g.dim(),
                n: g.n(),
                t: state.t,
                step,
                scheme: SCHEME_TAG.into(),
                digest: self.digest,
                monitor: monitor.snapshot(),
            };
            self.csv.flush()?;
            checkpoint::save(&self.checkpoint_path, &header, state)?;
        }
        Ok(())
    }
}

fn csv_comments(cfg: &RunConfig, digest: &ConfigDigest) -> Vec<String> {
    let watched = if cfg.dim == 3 {
        "max(besov_u, besov_grad_d)"
    } else {
        "besov_grad_d"
    };
    vec![
        format!(
            "grid dim={} N={}; dt={:e} cadence={} scheme={SCHEME_TAG}",
            cfg.dim, cfg.n, cfg.solver.dt, cfg.monitor.cadence
        ),
        format!(
            "criterion_ok: {watched} <= epsilon0 = {:e} in every record so far",
            cfg.monitor.epsilon0
        ),
        format!("config digest {}", checkpoint::hex(digest)),
    ]
}

fn execute(
    cfg: &RunConfig,
    init: State,
    start_step: u64,
    mut monitor: Monitor,
    csv: CsvWriter,
) -> Result<RunSummary> {
    let digest = checkpoint::digest(&cfg.digest_text());
    let mut sink = Sink {
        csv,
        checkpoint_path: cfg.output.checkpoint_path(),
        checkpoint_every: cfg.output.checkpoint_every,
        digest,
    };
    let plan = RunPlan {
        start_step,
        cadence: cfg.monitor.cadence,
    };
    let result = run(init, &cfg.solver, &plan, &mut monitor, &mut sink);
    sink.csv.flush()?;
    let outcome = result?;
    let (sup_u, sup_d) = monitor.sup_criterion();
    Ok(RunSummary {
        dim: cfg.dim,
        steps: outcome.steps,
        t: outcome.state.t,
        epsilon0: cfg.monitor.epsilon0,
        sup_besov_u: sup_u,
        sup_besov_grad_d: sup_d,
        criterion_ok: monitor.criterion_ok(),
        terminated: outcome.terminated.map(|e| e.to_string()),
    })
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot create output directory {}: {e}", dir.display()),
        ))
    })
}

/// Runs from the configured initial data, writing the diagnostics CSV and
/// periodic checkpoints.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    prepare_dir(&cfg.output.dir)?;
    let digest = checkpoint::digest(&cfg.digest_text());
    let csv = CsvWriter::create(&cfg.output.diagnostics_path(), &csv_comments(cfg, &digest))?;
    let grid = cfg.grid()?;
    let u = cfg
        .init_u
        .velocity(&grid)
        .map_err(|e| Error::config("init.u", format!("is invalid: {e}")))?;
    let d = cfg
        .init_d
        .director(&grid)
        .map_err(|e| Error::config("init.d", format!("is invalid: {e}")))?;
    let init = State::new(0.0, u, d)?;
    let monitor = Monitor::new(&grid, cfg.monitor.epsilon0, cfg.monitor.accumulators)?;
    execute(cfg, init, 0, monitor, csv)
}

/// Continues from a checkpoint written under the same grid, solver and
/// monitor settings. Rows of the existing CSV past the checkpoint time are
/// discarded before new rows are appended.
pub fn cmd_resume(cfg: &RunConfig, path: Option<&Path>) -> Result<RunSummary> {
    let path = path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output.checkpoint_path());
    let ck = checkpoint::load(&path)?;
    let want = checkpoint::digest(&cfg.digest_text());
    if ck.header.digest != want {
        return Err(Error::config(
            "checkpoint",
            format!(
                "{} was written under a different configuration (digest {} != {}); \
                 grid, solver and monitor settings must match the original run",
                path.display(),
                checkpoint::hex(&ck.header.digest),
                checkpoint::hex(&want)
            ),
        ));
    }
    if ck.header.scheme != SCHEME_TAG {
        return Err(Error::config(
            "checkpoint",
            format!(
                "uses scheme `{}`, this build steps with `{SCHEME_TAG}`",
                ck.header.scheme
            ),
        ));
    }
    if ck.header.step > cfg.solver.total_steps() {
        return Err(Error::config(
            "solver.t_end",
            format!("must be >= the checkpoint time {:e}", ck.header.t),
        ));
    }
    prepare_dir(&cfg.output.dir)?;
    let csv_path = cfg.output.diagnostics_path();
    let csv = if csv_path.exists() {
        CsvWriter::resume(&csv_path, ck.header.t)?
    } else {
        CsvWriter::create(&csv_path, &csv_comments(cfg, &want))?
    };
    let grid = ck.state.grid().clone();
    let mut monitor = Monitor::new(&grid, cfg.monitor.epsilon0, cfg.monitor.accumulators)?;
    monitor.restore(ck.header.monitor);
    execute(cfg, ck.state, ck.header.step, monitor, csv)
}

/// One inequality evaluated at both audit resolutions.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditLine {
    pub low: AuditRow,
    pub high: AuditRow,
}

impl AuditLine {
    pub fn id(&self) -> &str {
        &self.low.id
    }

    /// `|high − low| / low` of the corpus max ratios.
    pub fn rel_delta(&self) -> f64 {
        (self.high.max_ratio - self.low.max_ratio).abs() / self.low.max_ratio
    }

    pub fn evaluated(&self) -> bool {
        self.low.evaluated > 0 && self.high.evaluated > 0
    }
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub lines: Vec<AuditLine>,
    pub text: String,
}

impl AuditReport {
    pub fn line(&self, id: &str) -> Option<&AuditLine> {
        self.lines.iter().find(|l| l.id() == id)
    }
}

pub fn interpolation_id(alpha: f64, p: f64, q: f64, sobolev: bool) -> String {
    if sobolev {
        format!("interpolation sobolev α={alpha} p={p} q=2")
    } else {
        format!("interpolation besov α={alpha} p={p} q={q}")
    }
}

/// Every configured audit at one resolution.
pub fn audit_rows(cfg: &AuditConfig, n: usize) -> Result<Vec<AuditRow>> {
    let grid = Grid::new(cfg.dim, n)?;
    let fields = corpus(&grid, cfg.corpus_size, cfg.band, cfg.slope, cfg.seed);
    let mut rows = Vec::new();
    if !cfg.interpolation.is_empty() {
        let bank = build_cutoff_bank(&grid)?;
        for ip in &cfg.interpolation {
            let besov = par::map(&fields, |f| {
                audit_interpolation(&bank, f, ip.alpha, ip.p, ip.q)
            });
            let mut row = AuditRow::new(interpolation_id(ip.alpha, ip.p, ip.q, false));
            for a in besov {
                let a = a?;
                row.absorb(a.lhs, a.low_factor * a.high_factor);
            }
            rows.push(row);
            if ip.q == 2.0 {
                let sob = par::map(&fields, |f| {
                    audit_interpolation_sobolev(&bank, f, ip.alpha, ip.p)
                });
                let mut row = AuditRow::new(interpolation_id(ip.alpha, ip.p, ip.q, true));
                for a in sob {
                    let a = a?;
                    row.absorb(a.lhs, a.low_factor * a.high_factor);
                }
                rows.push(row);
            }
        }
    }
    if cfg.gn {
        rows.extend(audit_gn_inequalities(&fields, cfg.dim)?);
    }
    if !cfg.products.is_empty() {
        let pairs: Vec<(SpectralField, SpectralField)> = (0..fields.len())
            .map(|i| (fields[i].clone(), fields[(i + 1) % fields.len()].clone()))
            .collect();
        for pp in &cfg.products {
            rows.extend(audit_commutator_product(&pairs, pp.alpha, &pp.exponents)?);
        }
    }
    Ok(rows)
}

pub const AUDIT_COLUMNS: [&str; 6] = [
    "id",
    "max_ratio_low",
    "max_ratio_high",
    "rel_delta",
    "evaluated",
    "skipped",
];

/// Runs every audit at both resolutions and writes the report table.
/// Inequalities with no evaluable corpus member at either resolution are
/// listed as comments and left out of the table.
pub fn cmd_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    prepare_dir(&cfg.dir)?;
    let report_path = cfg.report_path();
    fs::write(&report_path, "")?;
    let low = audit_rows(cfg, cfg.n_low)?;
    let high = audit_rows(cfg, cfg.n_high)?;
    let lines: Vec<AuditLine> = low
        .into_iter()
        .zip(high)
        .map(|(low, high)| AuditLine { low, high })
        .collect();

    let mut text = String::new();
    let _ = writeln!(
        text,
        "# nlcsim audit: dim={} corpus={} seed={} slope={:e} band={} N_low={} N_high={}",
        cfg.dim, cfg.corpus_size, cfg.seed, cfg.slope, cfg.band, cfg.n_low, cfg.n_high
    );
    let _ = writeln!(text, "# {TRUNCATION_NOTE}");
    for l in lines.iter().filter(|l| !l.evaluated()) {
        let _ = writeln!(
            text,
            "# skipped: {} ({} fields skipped at N_low, {} at N_high)",
            l.id(),
            l.low.skipped,
            l.high.skipped
        );
    }
    let _ = writeln!(text, "{}", AUDIT_COLUMNS.join("\t"));
    for l in lines.iter().filter(|l| l.evaluated()) {
        let _ = writeln!(
            text,
            "{}\t{:e}\t{:e}\t{:e}\t{}\t{}",
            l.id(),
            l.low.max_ratio,
            l.high.max_ratio,
            l.rel_delta(),
            l.low.evaluated + l.high.evaluated,
            l.low.skipped + l.high.skipped
        );
    }
    fs::write(&report_path, &text)?;
    Ok(AuditReport { lines, text })
}

/// Human-readable description of a checkpoint, validating the payload.
pub fn cmd_inspect(path: &Path) -> Result<String> {
    let h = checkpoint::read_header(path)?;
    let size = fs::metadata(path)?.len();
    let mut s = String::new();
    let _ = writeln!(s, "file       {}", path.display());
    let _ = writeln!(s, "grid       dim {} N {}", h.dim, h.n);
    let _ = writeln!(s, "time       t {:e} after {} steps", h.t, h.step);
    let _ = writeln!(s, "scheme     {}", h.scheme);
    let _ = writeln!(s, "digest     {}", checkpoint::hex(&h.digest));
    let m = &h.monitor;
    let _ = writeln!(
        s,
        "monitor    acc_H2 {:e} acc_bkm {:e} acc_hw {:e} acc_llw {:e}",
        m.accumulators[0], m.accumulators[1], m.accumulators[2], m.accumulators[3]
    );
    let _ = writeln!(
        s,
        "criterion  ok {} sup besov_u {:e} sup besov_grad_d {:e}",
        m.criterion_ok, m.sup_besov_u, m.sup_besov_grad_d
    );
    let _ = writeln!(
        s,
        "payload    {} bytes expected, file is {size} bytes",
        h.payload_len()
    );
    checkpoint::load(path)?;
    let _ = writeln!(s, "status     ok");
    Ok(s)
}

/// Process exit status for an error: 1 for usage and configuration problems,
/// 2 for a detected blow-up, 3 for I/O and checkpoint file failures.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BlowUp { .. } | Error::ConstraintLoss { .. } => 2,
        Error::Io(_) | Error::Checkpoint(_) => 3,
        _ => 1,
    }
}
