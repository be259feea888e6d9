use serde::{Deserialize, Serialize};

use super::config::Config;
use super::manifest::RunManifest;
use super::svg::{self, Plot, Series};
use super::{parse_range, CliError, Command};
use crate::basis::{self, Convention, ScalingCheck, ScalingDirection, ScalingMap};
use crate::odecore::{
    inverse_energy_scale, EigenParams, PhiState, Termination, ToleranceSpec, Trajectory,
    DEFAULT_RESOLUTION,
};
use crate::parity::{
    self, Component, DependenceFit, Pairing, ParityAssignment, ParityReport, SuperpositionTest,
};
use crate::repro::{self, FigureId, FigurePreset, GrowthReport};
use crate::spectrum::{self, BoundaryScan, GridSpec, PersistentDip, Potential, ShootingSystem};

const COLORS: [&str; 6] = [
    "#c0392b", "#2457a6", "#2e8b57", "#8e44ad", "#d68910", "#555555",
];

/// Files produced by a run, written only after the whole run succeeded.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Vec<String>,
    /// Set when a self-test or negative control did not behave as expected.
    pub mismatch: Option<String>,
}

impl RunOutput {
    fn json<T: Serialize>(&mut self, name: String, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        self.files.push((name, bytes));
    }

    fn text(&mut self, name: String, text: String) {
        self.files.push((name, text.into_bytes()));
    }

    fn manifest(&mut self, prefix: &str, m: &RunManifest) {
        self.json(format!("{prefix}_manifest.json"), m);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceParams {
    pub figure: u32,
    pub flip_slopes: bool,
    pub as_published: bool,
    pub y_min: f64,
    pub y_max: f64,
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityParams {
    pub figure: Option<u32>,
    pub partner: Option<u32>,
    pub window: f64,
    pub grid_step: f64,
    pub flip_slopes: bool,
    pub self_test: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    pub figure: u32,
    pub negative_control: bool,
    pub scaling_window: f64,
    pub flip_slopes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    pub max_spacing: f64,
    pub threshold: f64,
    pub targets: Vec<f64>,
    pub eps_window: (f64, f64),
    pub free_particle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_step: f64,
    #[serde(rename = "Y")]
    pub y: Vec<f64>,
    pub oscillator: bool,
    pub renorm_threshold: f64,
    pub match_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Reproduce(ReproduceParams),
    Parity(ParityParams),
    Basis(BasisParams),
    Spectrum(SpectrumParams),
    Scan(ScanParams),
}

fn default_partner(id: FigureId) -> Option<FigureId> {
    match id {
        FigureId::Fig9 => Some(FigureId::Fig10),
        FigureId::Fig10 => Some(FigureId::Fig9),
        FigureId::Fig11 => None,
    }
}

impl Job {
    pub(super) fn from_command(cmd: Command, cfg: &Config) -> Result<Job, CliError> {
        let job = match cmd {
            Command::Reproduce(a) => Job::Reproduce(ReproduceParams {
                figure: a.figure,
                flip_slopes: a.flip_slopes,
                as_published: a.as_published,
                y_min: a.y_min.unwrap_or(-10.0),
                y_max: a.y_max.unwrap_or(10.0),
                resolution: a
                    .resolution
                    .or(cfg.resolution)
                    .unwrap_or(DEFAULT_RESOLUTION),
            }),
            Command::Parity(a) => {
                let partner = match (a.partner, a.figure) {
                    (Some(p), _) => Some(p),
                    (None, Some(f)) => {
                        default_partner(FigureId::from_number(f)?).map(|p| p.number())
                    }
                    (None, None) => None,
                };
                Job::Parity(ParityParams {
                    figure: a.figure,
                    partner,
                    window: a.window.or(cfg.window).unwrap_or(parity::DEFAULT_WINDOW),
                    grid_step: a
                        .grid_step
                        .or(cfg.grid_step)
                        .unwrap_or(parity::DEFAULT_STEP),
                    flip_slopes: a.flip_slopes,
                    self_test: a.self_test,
                })
            }
            Command::Basis(a) => Job::Basis(BasisParams {
                figure: a.figure,
                negative_control: a.negative_control,
                scaling_window: a.scaling_window.unwrap_or(4.0),
                flip_slopes: a.flip_slopes,
            }),
            Command::Spectrum(a) => {
                let w = parse_range(&a.eps_window, 2)?;
                Job::Spectrum(SpectrumParams {
                    l: a.l,
                    n: a.n,
                    max_spacing: a.max_spacing,
                    threshold: a.threshold,
                    targets: a.targets,
                    eps_window: (w[0], w[1]),
                    free_particle: a.free_particle,
                })
            }
            Command::Scan(a) => {
                let r = parse_range(&a.eps, 3)?;
                Job::Scan(ScanParams {
                    eps_min: r[0],
                    eps_max: r[1],
                    eps_step: r[2],
                    y: a.y,
                    oscillator: a.oscillator,
                    renorm_threshold: a
                        .renorm_threshold
                        .or(cfg.renorm_threshold)
                        .unwrap_or(spectrum::DEFAULT_RENORM_THRESHOLD),
                    match_tol: a.match_tol,
                })
            }
            Command::Rerun(_) => unreachable!("rerun is resolved from its manifest"),
        };
        Ok(job)
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Job, CliError> {
        fn p<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T, CliError> {
            serde_json::from_value(v.clone())
                .map_err(|e| CliError::Usage(format!("bad manifest parameters: {e}")))
        }
        Ok(match m.subcommand.as_str() {
            "reproduce" => Job::Reproduce(p(&m.parameters)?),
            "parity" => Job::Parity(p(&m.parameters)?),
            "basis" => Job::Basis(p(&m.parameters)?),
            "spectrum" => Job::Spectrum(p(&m.parameters)?),
            "scan" => Job::Scan(p(&m.parameters)?),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown subcommand {other:?} in manifest"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Job::Reproduce(_) => "reproduce",
            Job::Parity(_) => "parity",
            Job::Basis(_) => "basis",
            Job::Spectrum(_) => "spectrum",
            Job::Scan(_) => "scan",
        }
    }

    pub fn parameters(&self) -> serde_json::Value {
        let v = match self {
            Job::Reproduce(p) => serde_json::to_value(p),
            Job::Parity(p) => serde_json::to_value(p),
            Job::Basis(p) => serde_json::to_value(p),
            Job::Spectrum(p) => serde_json::to_value(p),
            Job::Scan(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }

    pub fn run(&self, m: &RunManifest) -> Result<RunOutput, CliError> {
        match self {
            Job::Reproduce(p) => run_reproduce(p, m),
            Job::Parity(p) if p.self_test => run_parity_self_test(p, m),
            Job::Parity(p) => run_parity(p, m),
            Job::Basis(p) => run_basis(p, m),
            Job::Spectrum(p) if p.free_particle => run_free_spectrum(p, m),
            Job::Spectrum(p) => run_spectrum(p, m),
            Job::Scan(p) => run_scan(p, m),
        }
    }
}

/// Overflow is a result and is reported; a step failure is not.
fn reject_step_failure(traj: &Trajectory) -> Result<(), CliError> {
    match traj.termination {
        Termination::StepFailure(y) => Err(crate::Error::StepFailure { y }.into()),
        _ => Ok(()),
    }
}

fn full_trajectory(id: FigureId, flip: bool, tol: ToleranceSpec) -> Result<Trajectory, CliError> {
    let p = repro::preset(id, flip);
    let traj = repro::reproduce_preset(&p, tol, p.span, DEFAULT_RESOLUTION)?.0;
    reject_step_failure(&traj)?;
    Ok(traj)
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("y,phi1,dphi1,phi2,dphi2\n");
    for p in traj.ascending() {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            p.y, p.phi1, p.dphi1, p.phi2, p.dphi2
        ));
    }
    s
}

fn phi_plot(
    title: &str,
    y: &[f64],
    phi1: &[f64],
    phi2: &[f64],
    x_range: Option<(f64, f64)>,
) -> String {
    svg::render(&Plot {
        title,
        x_label: "y",
        y_label: "φ",
        x_range,
        series: vec![
            Series {
                label: "φ₁",
                color: COLORS[0],
                points: y.iter().copied().zip(phi1.iter().copied()).collect(),
            },
            Series {
                label: "φ₂",
                color: COLORS[1],
                points: y.iter().copied().zip(phi2.iter().copied()).collect(),
            },
        ],
    })
}

#[derive(Serialize)]
struct PublishedSummary {
    max_abs_phi1: f64,
    max_abs_phi2: f64,
}

#[derive(Serialize)]
struct ReproduceReport<'a> {
    manifest: &'a RunManifest,
    figure: u32,
    preset: FigurePreset,
    termination: Termination,
    #[serde(flatten)]
    growth: GrowthReport,
    published: Option<PublishedSummary>,
}

fn run_reproduce(p: &ReproduceParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    let id = FigureId::from_number(p.figure)?;
    let preset = repro::preset(id, p.flip_slopes);
    let (traj, growth) =
        repro::reproduce_preset(&preset, m.tolerances, (p.y_min, p.y_max), p.resolution)?;
    reject_step_failure(&traj)?;
    let asc = traj.ascending();
    let y: Vec<f64> = asc.iter().map(|s| s.y).collect();
    let phi1: Vec<f64> = asc.iter().map(|s| s.phi1).collect();
    let phi2: Vec<f64> = asc.iter().map(|s| s.phi2).collect();

    let mut out = RunOutput::default();
    let tag = id.to_string();
    out.text(format!("{tag}_trajectory.csv"), trajectory_csv(&traj));
    out.text(
        format!("{tag}.svg"),
        phi_plot(&format!("{tag}: full range"), &y, &phi1, &phi2, None),
    );
    out.text(
        format!("{tag}_detail.svg"),
        phi_plot(
            &format!("{tag}: detail"),
            &y,
            &phi1,
            &phi2,
            Some(preset.detail_window),
        ),
    );

    let published = if p.as_published {
        let c = repro::as_published_transform(&traj)?;
        let mut csv = String::from("y,phi1,phi2\n");
        for i in 0..c.y.len() {
            csv.push_str(&format!("{},{},{}\n", c.y[i], c.phi1[i], c.phi2[i]));
        }
        out.text(format!("{tag}_published.csv"), csv);
        out.text(
            format!("{tag}_published.svg"),
            phi_plot(
                &format!("{tag}: rebuilt from y ≥ 0"),
                &c.y,
                &c.phi1,
                &c.phi2,
                None,
            ),
        );
        let mx = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let s = PublishedSummary {
            max_abs_phi1: mx(&c.phi1),
            max_abs_phi2: mx(&c.phi2),
        };
        out.summary.push(format!(
            "{tag} as published: max |phi1| = {:.6e}, max |phi2| = {:.6e}",
            s.max_abs_phi1, s.max_abs_phi2
        ));
        Some(s)
    } else {
        None
    };

    out.summary.push(format!(
        "{tag}: |phi1({})| = {:.6e}, |phi2({})| = {:.6e}, max |phi2| on [{}, {}] = {:.6e}, termination = {:?}",
        growth.y_neg,
        growth.endpoint_neg.phi1,
        growth.y_neg,
        growth.endpoint_neg.phi2,
        growth.y_neg,
        growth.y_neg + 1.0,
        growth.max_neg_window,
        traj.termination
    ));
    out.json(
        format!("{tag}_report.json"),
        &ReproduceReport {
            manifest: m,
            figure: p.figure,
            preset,
            termination: traj.termination,
            growth,
            published,
        },
    );
    out.manifest(&tag, m);
    Ok(out)
}

#[derive(Serialize)]
struct Defects {
    phi1: ParityReport,
    phi2: ParityReport,
}

#[derive(Serialize)]
struct MirrorResiduals {
    window: f64,
    swapped: f64,
    unswapped: f64,
}

#[derive(Serialize)]
struct ParityOutput<'a> {
    manifest: &'a RunManifest,
    figure: u32,
    partner: Option<u32>,
    window: f64,
    grid_step: f64,
    defects: Defects,
    mirrored_pair_residual: MirrorResiduals,
    dependence_fit: DependenceFit,
    superposition: Vec<SuperpositionTest>,
}

fn run_parity(p: &ParityParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    let fig = p
        .figure
        .ok_or_else(|| CliError::Usage("--figure is required".into()))?;
    let id = FigureId::from_number(fig)?;
    let traj = full_trajectory(id, p.flip_slopes, m.tolerances)?;
    let partner = match p.partner {
        Some(n) => {
            let pid = FigureId::from_number(n)?;
            if repro::preset(pid, false).epsilon != repro::preset(id, false).epsilon {
                return Err(CliError::Usage(format!(
                    "partner fig{n} has a different epsilon than fig{fig}"
                )));
            }
            Some(full_trajectory(pid, p.flip_slopes, m.tolerances)?)
        }
        None => None,
    };
    let (lo, hi) = traj.range();
    let mirror_window = (-lo).min(hi);
    let defects = Defects {
        phi1: parity::parity_defect(&traj, Component::Phi1, p.window, p.grid_step)?,
        phi2: parity::parity_defect(&traj, Component::Phi2, p.window, p.grid_step)?,
    };
    let mirrored = MirrorResiduals {
        window: mirror_window,
        swapped: parity::mirrored_pair_residual(
            &traj,
            mirror_window,
            p.grid_step,
            Pairing::Swapped,
        )?,
        unswapped: parity::mirrored_pair_residual(
            &traj,
            mirror_window,
            p.grid_step,
            Pairing::Unswapped,
        )?,
    };
    let fit = parity::dependence_fit(&traj, p.window, p.grid_step)?;
    let superposition = match &partner {
        Some(b) => ParityAssignment::BOTH
            .iter()
            .map(|&a| parity::superposition_parity_test(&traj, b, p.window, p.grid_step, a))
            .collect::<crate::Result<Vec<_>>>()?,
        None => Vec::new(),
    };

    let mut out = RunOutput::default();
    let tag = id.to_string();
    out.summary.push(format!(
        "{tag}: phi2 odd defect {:.4}, even defect {:.4}; mirrored residual {:.3e} (no-swap control {:.3e}); fit k = {:.6}, residual {:.4}",
        defects.phi2.odd_defect, defects.phi2.even_defect, mirrored.swapped, mirrored.unswapped, fit.k, fit.residual
    ));
    for s in &superposition {
        out.summary.push(format!(
            "{tag}: superposition {:?} sigma_min {:.4}",
            s.assignment, s.sigma_min
        ));
    }
    out.json(
        format!("{tag}_parity.json"),
        &ParityOutput {
            manifest: m,
            figure: fig,
            partner: p.partner,
            window: p.window,
            grid_step: p.grid_step,
            defects,
            mirrored_pair_residual: mirrored,
            dependence_fit: fit,
            superposition,
        },
    );
    out.manifest(&format!("{tag}_parity"), m);
    Ok(out)
}

/// Trajectory-shaped container for synthetic data sampled on nodes only.
fn synthetic(
    window: f64,
    step: f64,
    f1: impl Fn(f64) -> f64,
    f2: impl Fn(f64) -> f64,
) -> Result<Trajectory, CliError> {
    let samples = parity::symmetric_grid(window, step)?
        .into_iter()
        .map(|y| PhiState::new(y, f1(y), 0.0, f2(y), 0.0))
        .collect();
    Ok(Trajectory::from_samples(
        EigenParams::new(2.0),
        samples,
        Termination::CompletedSpan,
        ToleranceSpec::default(),
    )?)
}

#[derive(Serialize)]
struct ParitySelfTest<'a> {
    manifest: &'a RunManifest,
    even_input: ParityReport,
    odd_input: ParityReport,
    vacuous_superposition: SuperpositionTest,
    passed: bool,
}

fn run_parity_self_test(p: &ParityParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    let even = parity::parity_defect_fn(|y| y * y, p.window, p.grid_step)?;
    let odd = parity::parity_defect_fn(|y| y * y * y, p.window, p.grid_step)?;
    let t = synthetic(p.window, p.grid_step, |y| y * y * y - y, |y| y * y + 1.0)?;
    let vac = parity::superposition_parity_test(
        &t,
        &t,
        p.window,
        p.grid_step,
        ParityAssignment::OddEven,
    )?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10;
    let passed = close(even.even_defect, 0.0)
        && close(even.odd_defect, 2.0)
        && close(odd.odd_defect, 0.0)
        && close(odd.even_defect, 2.0)
        && vac.sigma_min == 0.0;
    let mut out = RunOutput::default();
    out.summary.push(format!(
        "parity self-test: y^2 defects (odd {}, even {}), y^3 defects (odd {}, even {}), vacuous sigma_min {}",
        even.odd_defect, even.even_defect, odd.odd_defect, odd.even_defect, vac.sigma_min
    ));
    if !passed {
        out.mismatch = Some("parity self-test did not reproduce the exact even/odd values".into());
    }
    out.json(
        "parity_self_test.json".into(),
        &ParitySelfTest {
            manifest: m,
            even_input: even,
            odd_input: odd,
            vacuous_superposition: vac,
            passed,
        },
    );
    out.manifest("parity_self_test", m);
    Ok(out)
}

#[derive(Serialize)]
struct Scaling {
    roundtrip_max_error: f64,
    x_domain: ScalingCheck,
}

#[derive(Serialize)]
struct NegativeControl {
    flipped_sign_residual: f64,
    flipped_sign_conjugation: f64,
    /// `Ψ₂*` from this figure, `Ψ₁*` from an independent solution.
    mixed_conjugate_residual: f64,
    partner: String,
    passed: bool,
}

#[derive(Serialize)]
struct BasisOutput<'a> {
    manifest: &'a RunManifest,
    figure: u32,
    conjugation_identity: f64,
    complex_system_residual: f64,
    conjugate_pair_residual: f64,
    /// Max over samples of `| |Ψ₁|² + |Ψ₂|² − φ₁² − φ₂² |` relative to `φ₁² + φ₂²`.
    norm_identity: f64,
    scaling: Scaling,
    negative_control: Option<NegativeControl>,
}

const CONTROL_FLOOR: f64 = 0.1;

fn run_basis(p: &BasisParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    let id = FigureId::from_number(p.figure)?;
    let traj = full_trajectory(id, p.flip_slopes, m.tolerances)?;
    let params = traj.params;
    let cp = basis::compose_complex(&traj);
    let conj = basis::conjugation_identity(&cp);
    let sys = basis::complex_system_residual(&cp, &params)?;
    let conj_pair = basis::conjugate_pair_residual(&cp, &params)?;
    let norm_identity = cp
        .samples
        .iter()
        .zip(&traj.samples)
        .fold(0.0_f64, |a, (c, s)| {
            let want = s.phi1 * s.phi1 + s.phi2 * s.phi2;
            let got = c.psi1.norm_sqr() + c.psi2.norm_sqr();
            if want == 0.0 {
                a.max(got)
            } else {
                a.max((got - want).abs() / want)
            }
        });
    let map = ScalingMap::new(ScalingDirection::XFromY);
    let roundtrip = traj.samples.iter().fold(0.0_f64, |a, s| {
        let r = basis::scaling_roundtrip(s, &map);
        let d = [
            r.y - s.y,
            r.dphi1 - s.dphi1,
            r.dphi2 - s.dphi2,
            r.phi1 - s.phi1,
            r.phi2 - s.phi2,
        ];
        let scale =
            s.y.abs()
                .max(s.dphi1.abs())
                .max(s.dphi2.abs())
                .max(s.phi1.abs())
                .max(s.phi2.abs())
                .max(1.0);
        d.iter().fold(a, |a, v| a.max(v.abs() / scale))
    });
    let init = traj.sample(0.0)?;
    let x_domain = basis::x_domain_agreement(&traj, &init, p.scaling_window, &m.tolerances)?;

    let mut out = RunOutput::default();
    let tag = id.to_string();
    let negative_control = if p.negative_control {
        let bad = basis::compose_complex_with(&traj, Convention::FlippedSign);
        let (partner_name, partner) = match default_partner(id) {
            Some(pid) => (
                pid.to_string(),
                full_trajectory(pid, p.flip_slopes, m.tolerances)?,
            ),
            None => (format!("{tag} swap-mirrored"), parity::swap_mirror(&traj)?),
        };
        let mixed =
            basis::conjugate_pair_residual_mixed(&cp, &basis::compose_complex(&partner), &params)?;
        let flipped = basis::complex_system_residual(&bad, &params)?;
        let flipped_conj = basis::conjugation_identity(&bad);
        let passed =
            flipped > CONTROL_FLOOR && flipped_conj > CONTROL_FLOOR && mixed > CONTROL_FLOOR;
        out.summary.push(format!(
            "{tag} controls: flipped-sign residual {flipped:.3e}, flipped conjugation {flipped_conj:.3e}, mixed conjugate residual {mixed:.3e}"
        ));
        if !passed {
            out.mismatch = Some(format!("{tag}: a negative control was not detected"));
        }
        Some(NegativeControl {
            flipped_sign_residual: flipped,
            flipped_sign_conjugation: flipped_conj,
            mixed_conjugate_residual: mixed,
            partner: partner_name,
            passed,
        })
    } else {
        None
    };
    out.summary.push(format!(
        "{tag}: conjugation identity {conj:.3e}, complex residual {sys:.3e}, conjugate residual {conj_pair:.3e}, x/y agreement {:.3e}",
        x_domain.max_rel_error
    ));
    out.json(
        format!("{tag}_basis.json"),
        &BasisOutput {
            manifest: m,
            figure: p.figure,
            conjugation_identity: conj,
            complex_system_residual: sys,
            conjugate_pair_residual: conj_pair,
            norm_identity,
            scaling: Scaling {
                roundtrip_max_error: roundtrip,
                x_domain,
            },
            negative_control,
        },
    );
    out.manifest(&format!("{tag}_basis"), m);
    Ok(out)
}

fn grids(p: &SpectrumParams) -> Result<Vec<GridSpec>, CliError> {
    match &p.n {
        Some(ns) => {
            if ns.len() != p.l.len() {
                return Err(CliError::Usage(format!(
                    "--N has {} values but --L has {}",
                    ns.len(),
                    p.l.len()
                )));
            }
            Ok(p.l
                .iter()
                .zip(ns)
                .map(|(&l, &n)| GridSpec::new(l, n))
                .collect::<crate::Result<_>>()?)
        }
        None => Ok(p
            .l
            .iter()
            .map(|&l| GridSpec::with_max_spacing(l, p.max_spacing))
            .collect::<crate::Result<_>>()?),
    }
}

#[derive(Serialize)]
struct GridSummary {
    grid: GridSpec,
    lowest_scaled: f64,
    lowest_eps: f64,
    levels: usize,
}

#[derive(Serialize)]
struct TargetShift {
    l_from: f64,
    l_to: f64,
    eps_from: f64,
    eps_to: f64,
    shift: f64,
    converged: bool,
}

#[derive(Serialize)]
struct TargetReport {
    target: f64,
    nearest: Vec<f64>,
    shifts: Vec<TargetShift>,
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    manifest: &'a RunManifest,
    threshold: f64,
    eps_window: (f64, f64),
    grids: Vec<GridSummary>,
    lowest_strictly_decreasing: bool,
    targets: Vec<TargetReport>,
    table: Vec<spectrum::ConvergenceRow>,
}

fn run_spectrum(p: &SpectrumParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    let gs = grids(p)?;
    let scan = spectrum::spectrum_scan(&gs, Potential::Coupled, p.threshold, p.eps_window)?;
    let mut out = RunOutput::default();
    let mut csv = String::from("L,N,index,e_scaled,eps\n");
    for r in &scan.results {
        for (i, (s, e)) in r
            .eigenvalues_scaled
            .iter()
            .zip(&r.eigenvalues_eps)
            .enumerate()
        {
            csv.push_str(&format!("{},{},{},{},{}\n", r.grid.l, r.grid.n, i, s, e));
        }
    }
    let targets: Vec<TargetReport> = p
        .targets
        .iter()
        .map(|&t| {
            let nearest: Vec<f64> = scan.results.iter().map(|r| r.nearest_eps(t)).collect();
            let shifts = (1..nearest.len())
                .map(|i| {
                    let shift = (nearest[i] - nearest[i - 1]).abs();
                    TargetShift {
                        l_from: scan.results[i - 1].grid.l,
                        l_to: scan.results[i].grid.l,
                        eps_from: nearest[i - 1],
                        eps_to: nearest[i],
                        shift,
                        converged: shift <= p.threshold,
                    }
                })
                .collect();
            TargetReport {
                target: t,
                nearest,
                shifts,
            }
        })
        .collect();
    for r in &scan.results {
        out.summary.push(format!(
            "L = {}: N = {}, lowest E' = {:.6}",
            r.grid.l, r.grid.n, r.lowest
        ));
    }
    for t in &targets {
        for s in &t.shifts {
            out.summary.push(format!(
                "eps near {}: L {} -> {}: {:.6} -> {:.6}, shift {:.4} ({})",
                t.target,
                s.l_from,
                s.l_to,
                s.eps_from,
                s.eps_to,
                s.shift,
                if s.converged {
                    "converged"
                } else {
                    "not converged"
                }
            ));
        }
    }
    let k = inverse_energy_scale();
    out.text("spectrum_eigenvalues.csv".into(), csv);
    out.json(
        "spectrum_report.json".into(),
        &SpectrumOutput {
            manifest: m,
            threshold: p.threshold,
            eps_window: p.eps_window,
            grids: scan
                .results
                .iter()
                .map(|r| GridSummary {
                    grid: r.grid,
                    lowest_scaled: r.lowest,
                    lowest_eps: k * r.lowest,
                    levels: r.eigenvalues_scaled.len(),
                })
                .collect(),
            lowest_strictly_decreasing: scan.lowest_strictly_decreasing(),
            targets,
            table: scan.table,
        },
    );
    out.manifest("spectrum", m);
    Ok(out)
}

#[derive(Serialize)]
struct FreeLevel {
    n: usize,
    computed: f64,
    analytic: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct FreeGrid {
    grid: GridSpec,
    levels: Vec<FreeLevel>,
}

#[derive(Serialize)]
struct FreeOutput<'a> {
    manifest: &'a RunManifest,
    tolerance: f64,
    max_rel_error: f64,
    grids: Vec<FreeGrid>,
    passed: bool,
}

const FREE_TOLERANCE: f64 = 1e-3;

fn run_free_spectrum(p: &SpectrumParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    let mut out_grids = Vec::new();
    let mut worst = 0.0_f64;
    for g in grids(p)? {
        let r = spectrum::compute_spectrum(&g, Potential::Free)?;
        // each level appears twice, once per component
        let levels: Vec<FreeLevel> = r
            .eigenvalues_scaled
            .iter()
            .step_by(2)
            .take(5)
            .enumerate()
            .map(|(i, &v)| {
                let n = i + 1;
                let analytic = (n as f64 * std::f64::consts::PI / (2.0 * g.l)).powi(2);
                let rel_error = ((v - analytic) / analytic).abs();
                worst = worst.max(rel_error);
                FreeLevel {
                    n,
                    computed: v,
                    analytic,
                    rel_error,
                }
            })
            .collect();
        out_grids.push(FreeGrid { grid: g, levels });
    }
    let passed = worst <= FREE_TOLERANCE;
    let mut out = RunOutput::default();
    out.summary.push(format!(
        "free operator: max relative error of the first five levels {worst:.3e}"
    ));
    if !passed {
        out.mismatch = Some(format!(
            "free-particle levels off by {worst:.3e} (> {FREE_TOLERANCE})"
        ));
    }
    out.json(
        "spectrum_free.json".into(),
        &FreeOutput {
            manifest: m,
            tolerance: FREE_TOLERANCE,
            max_rel_error: worst,
            grids: out_grids,
            passed,
        },
    );
    out.manifest("spectrum_free", m);
    Ok(out)
}

#[derive(Serialize)]
struct DipList {
    #[serde(rename = "Y")]
    y: f64,
    eps: Vec<f64>,
}

#[derive(Serialize)]
struct SelfTestLevels {
    expected_eps: Vec<f64>,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    manifest: &'a RunManifest,
    system: ShootingSystem,
    match_tol: f64,
    dips: Vec<DipList>,
    persistent: Vec<PersistentDip>,
    oscillator_check: Option<SelfTestLevels>,
    scans: Vec<BoundaryScan>,
}

fn run_scan(p: &ScanParams, m: &RunManifest) -> Result<RunOutput, CliError> {
    if p.y.is_empty() {
        return Err(CliError::Usage("--Y needs at least one half-width".into()));
    }
    let system = if p.oscillator {
        ShootingSystem::Oscillator
    } else {
        ShootingSystem::Coupled
    };
    let scans =
        p.y.iter()
            .map(|&y| {
                spectrum::boundedness_scan(
                    (p.eps_min, p.eps_max),
                    p.eps_step,
                    y,
                    &m.tolerances,
                    system,
                    p.renorm_threshold,
                )
            })
            .collect::<crate::Result<Vec<_>>>()?;
    let prefix = if p.oscillator {
        "oscillator_scan"
    } else {
        "scan"
    };
    let mut out = RunOutput::default();

    let mut csv = String::from("eps");
    for s in &scans {
        csv.push_str(&format!(",sigma_min_Y{}", s.y_half));
    }
    csv.push('\n');
    for i in 0..scans[0].epsilons.len() {
        csv.push_str(&format!("{}", scans[0].epsilons[i]));
        for s in &scans {
            csv.push_str(&format!(",{}", s.sigma_min[i]));
        }
        csv.push('\n');
    }
    out.text(format!("{prefix}_sigma.csv"), csv);

    let labels: Vec<String> = scans.iter().map(|s| format!("Y = {}", s.y_half)).collect();
    out.text(
        format!("{prefix}.svg"),
        svg::render(&Plot {
            title: "boundary map: log10(σ_min/σ_max)",
            x_label: "ε",
            y_label: "log10 σ",
            x_range: None,
            series: scans
                .iter()
                .zip(&labels)
                .enumerate()
                .map(|(i, (s, l))| Series {
                    label: l,
                    color: COLORS[i % COLORS.len()],
                    points: s
                        .epsilons
                        .iter()
                        .zip(&s.sigma_min)
                        .map(|(&e, &v)| (e, v.max(1e-300).log10()))
                        .collect(),
                })
                .collect(),
        }),
    );

    let dips: Vec<DipList> = scans
        .iter()
        .map(|s| DipList {
            y: s.y_half,
            eps: s.dips(),
        })
        .collect();
    let persistent = spectrum::persistent_dips(&scans, p.match_tol);
    for d in &dips {
        out.summary
            .push(format!("Y = {}: dips at {:?}", d.y, d.eps));
    }
    out.summary.push(format!(
        "dips present at every Y (within {}): {:?}",
        p.match_tol,
        persistent.iter().map(|d| d.center()).collect::<Vec<_>>()
    ));

    let oscillator_check = if p.oscillator {
        let k = inverse_energy_scale();
        let expected: Vec<f64> = [1.0, 3.0, 5.0, 7.0, 9.0]
            .iter()
            .map(|e| e * k)
            .filter(|&e| e > p.eps_min && e < p.eps_max)
            .collect();
        let tolerance = p.eps_step;
        let passed = !expected.is_empty()
            && dips.iter().all(|d| {
                expected
                    .iter()
                    .all(|&e| d.eps.iter().any(|&x| (x - e).abs() <= tolerance + 1e-9))
            });
        if !passed {
            out.mismatch = Some("oscillator levels were not all detected".into());
        }
        out.summary.push(format!(
            "oscillator levels expected at eps = {expected:?}: {}",
            if passed { "found" } else { "MISSING" }
        ));
        Some(SelfTestLevels {
            expected_eps: expected,
            tolerance,
            passed,
        })
    } else {
        None
    };

    out.json(
        format!("{prefix}_report.json"),
        &ScanOutput {
            manifest: m,
            system,
            match_tol: p.match_tol,
            dips,
            persistent,
            oscillator_check,
            scans,
        },
    );
    out.manifest(prefix, m);
    Ok(out)
}
