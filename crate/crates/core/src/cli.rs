//! Command-line front end: `design`, `verify`, `analyze`, `table1`, `figures`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bezout::{self, Method};
use crate::error::Error;
use crate::factorize::{
    design, hilbert_slope, verify_pr, vanishing_moment_slope, Design, FilterBank, PhaseChoice,
};
use crate::poly::{LaurentFilter, RealPoly};
use crate::spectral::{self, GridParams};

pub const SCHEMA_VERSION: &str = "1";
pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const MOMENT_SLOPE_TOL: f64 = 0.1;
pub const HILBERT_SLOPE_TOL: f64 = 0.2;

#[derive(Parser, Debug)]
#[command(
    name = "hilbert-pair",
    version,
    about = "Common-factor approximate Hilbert wavelet pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Design a filter bank and write it as JSON
    Design(DesignArgs),
    /// Check a filter bank document against the design constraints
    Verify(VerifyArgs),
    /// Quasi-analyticity report for a filter bank document
    Analyze(AnalyzeArgs),
    /// Sobolev exponents over a grid of (M, L)
    Table1(Table1Args),
    /// CSV and SVG data for the three figures
    Figures(FiguresArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    /// every root inside the unit circle
    Mid,
    /// alternate inside/outside per root group
    Min,
}

impl From<PhaseArg> for PhaseChoice {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Mid => PhaseChoice::AllInsideUnitCircle,
            PhaseArg::Min => PhaseChoice::AlternatingPairs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Recursive,
    Linear,
    Exact,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Recursive => Method::RecursiveInterp,
            MethodArg::Linear => Method::LinearSystem,
            MethodArg::Exact => Method::ExactRational,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    /// Thiran order (approximation order 2L+1)
    #[arg(long = "L")]
    pub order: usize,
    /// Vanishing moments
    #[arg(long = "M")]
    pub moments: usize,
    /// Root selection; "mid" takes every root inside the unit circle
    #[arg(long, value_enum, default_value = "mid")]
    pub phase: PhaseArg,
    #[arg(long, value_enum, default_value = "recursive")]
    pub method: MethodArg,
    #[arg(long = "tol-pr", default_value_t = 1e-8)]
    pub tol_pr: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    pub path: PathBuf,
    #[arg(long = "tol-pr", default_value_t = 1e-8)]
    pub tol_pr: f64,
    /// Reference coefficients (JSON with `h0` and optionally `g0`)
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long = "tol-ref", default_value_t = 1e-8)]
    pub tol_ref: f64,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long = "omega-max", default_value_t = spectral::DEFAULT_OMEGA_MAX)]
    pub omega_max: f64,
    #[arg(long = "grid-n", default_value_t = spectral::DEFAULT_GRID_N)]
    pub grid_n: usize,
    #[arg(long = "cascade-depth", default_value_t = spectral::DEFAULT_CASCADE_DEPTH)]
    pub cascade_depth: u32,
    #[arg(long = "beta-terms", default_value_t = spectral::DEFAULT_BETA_TERMS)]
    pub beta_terms: u32,
}

impl GridArgs {
    pub fn params(&self) -> GridParams {
        GridParams {
            omega_max: self.omega_max,
            n: self.grid_n,
            depth: self.cascade_depth,
            beta_terms: self.beta_terms,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    pub path: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write the spectra as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Table1Args {
    #[arg(long = "l-max", default_value_t = 8)]
    pub l_max: usize,
    #[arg(long = "m-max", default_value_t = 8)]
    pub m_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FiguresArgs {
    /// 1, 2 or 3; all three when omitted
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: Option<u8>,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pr_defect: f64,
    pub bezout_residual: f64,
    pub h0_at_1: f64,
}

/// JSON form of a designed bank. `h1` and `g1` are stored delayed so that
/// they start at `z^0`; every array lists coefficients of increasing powers
/// of `z^-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterBankDocument {
    pub schema_version: String,
    #[serde(rename = "L")]
    pub order: usize,
    #[serde(rename = "M")]
    pub moments: usize,
    pub phase: String,
    pub method: String,
    pub h0: Vec<f64>,
    pub g0: Vec<f64>,
    pub h1: Vec<f64>,
    pub g1: Vec<f64>,
    pub r_coeffs: Vec<f64>,
    pub q_coeffs: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl FilterBankDocument {
    pub fn from_design(d: &Design) -> Self {
        let b = &d.bank;
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            order: b.order,
            moments: b.moments,
            phase: b.phase.label().to_string(),
            method: d.solution.method.label().to_string(),
            h0: b.h0.coeffs().to_vec(),
            g0: b.g0.coeffs().to_vec(),
            h1: b.h1.coeffs().to_vec(),
            g1: b.g1.coeffs().to_vec(),
            r_coeffs: d.solution.r.coeffs().to_vec(),
            q_coeffs: b.q_poly.coeffs().to_vec(),
            diagnostics: Diagnostics {
                pr_defect: verify_pr(b),
                bezout_residual: d.solution.residual,
                h0_at_1: b.h0.sum(),
            },
        }
    }

    pub fn parse(text: &str) -> crate::Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {:?}",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn to_bank(&self) -> crate::Result<FilterBank> {
        let phase = PhaseChoice::from_label(&self.phase)
            .ok_or_else(|| Error::Parse(format!("unknown phase {:?}", self.phase)))?;
        let all = [&self.h0, &self.g0, &self.h1, &self.g1];
        if all.iter().any(|v| v.is_empty()) {
            return Err(Error::Parse("filter arrays must be nonempty".into()));
        }
        if all.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::Parse("filter coefficients must be finite".into()));
        }
        let h0 = LaurentFilter::causal(self.h0.clone());
        let g0 = LaurentFilter::causal(self.g0.clone());
        let h1 = LaurentFilter::new(h0.qmf().lo(), self.h1.clone());
        let g1 = LaurentFilter::new(g0.qmf().lo(), self.g1.clone());
        Ok(FilterBank {
            order: self.order,
            moments: self.moments,
            phase,
            h0,
            g0,
            h1,
            g1,
            q_poly: RealPoly::new(self.q_coeffs.clone()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pr_defect: f64,
    pub h0_at_1_error: f64,
    pub g0_at_1_error: f64,
    /// `null` when the defect sits below rounding over the fit range.
    pub vanishing_moment_slope: Option<f64>,
    pub hilbert_slope: Option<f64>,
    pub reference_max_diff: Option<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Deserialize)]
struct ReferenceFilters {
    h0: Vec<f64>,
    #[serde(default)]
    g0: Option<Vec<f64>>,
}

/// Leading/trailing zeros dropped and sign fixed so the first coefficient
/// is positive.
pub fn canonicalize(coeffs: &[f64]) -> Vec<f64> {
    let f = LaurentFilter::causal(coeffs.to_vec());
    let sign = if f.coeffs().first().is_some_and(|c| *c < 0.0) { -1.0 } else { 1.0 };
    f.coeffs().iter().map(|c| sign * c).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn slope_or_underflow(r: crate::Result<f64>) -> crate::Result<Option<f64>> {
    match r {
        Ok(s) => Ok(Some(s)),
        Err(Error::DegenerateFit { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn cmd_design(args: &DesignArgs) -> crate::Result<(FilterBankDocument, bool)> {
    let d = design(
        args.order,
        args.moments,
        args.phase.into(),
        args.method.into(),
    )?;
    let doc = FilterBankDocument::from_design(&d);
    let ok = doc.diagnostics.pr_defect <= args.tol_pr;
    Ok((doc, ok))
}

pub fn cmd_verify(doc: &FilterBankDocument, args: &VerifyArgs) -> crate::Result<VerifyReport> {
    let bank = doc.to_bank()?;
    let pr_defect = verify_pr(&bank);
    let h_err = (bank.h0.sum() - SQRT_2).abs();
    let g_err = (bank.g0.sum() - SQRT_2).abs();
    let vm = slope_or_underflow(vanishing_moment_slope(&bank.h0))?;
    let hs = slope_or_underflow(hilbert_slope(bank.order, &bank.h0, &bank.g0))?;
    let m = bank.moments as f64;
    let target = (2 * bank.order + 1) as f64;
    let mut checks = vec![
        Check {
            name: "perfect_reconstruction".into(),
            passed: pr_defect <= args.tol_pr,
            detail: format!("defect {pr_defect:e} <= {:e}", args.tol_pr),
        },
        Check {
            name: "normalization".into(),
            passed: h_err <= NORMALIZATION_TOL && g_err <= NORMALIZATION_TOL,
            detail: format!("|H0(1)-sqrt2| = {h_err:e}, |G0(1)-sqrt2| = {g_err:e}"),
        },
        Check {
            name: "vanishing_moments".into(),
            passed: vm.is_none_or(|s| (s - m).abs() <= MOMENT_SLOPE_TOL),
            detail: match vm {
                Some(s) => format!("slope {s} vs M = {m}"),
                None => "defect below rounding (underflow)".into(),
            },
        },
        Check {
            name: "hilbert_order".into(),
            passed: hs.is_none_or(|s| s >= target - HILBERT_SLOPE_TOL),
            detail: match hs {
                Some(s) => format!("slope {s} vs 2L+1 = {target}"),
                None => "defect below rounding (underflow)".into(),
            },
        },
    ];
    let mut reference_max_diff = None;
    if let Some(path) = &args.reference {
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::Parse(e.to_string()))?;
            let r: ReferenceFilters =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let mut diff = max_diff(&canonicalize(&doc.h0), &canonicalize(&r.h0));
            if let Some(g0) = &r.g0 {
                diff = diff.max(max_diff(&canonicalize(&doc.g0), &canonicalize(g0)));
            }
            reference_max_diff = Some(diff);
            checks.push(Check {
                name: "reference".into(),
                passed: diff <= args.tol_ref,
                detail: format!("max coefficient difference {diff:e} <= {:e}", args.tol_ref),
            });
        } else {
            checks.push(Check {
                name: "reference".into(),
                passed: true,
                detail: format!("{} not found, skipped", path.display()),
            });
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        pr_defect,
        h0_at_1_error: h_err,
        g0_at_1_error: g_err,
        vanishing_moment_slope: vm,
        hilbert_slope: hs,
        reference_max_diff,
        checks,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyzeOutput {
    #[serde(rename = "L")]
    pub order: usize,
    #[serde(rename = "M")]
    pub moments: usize,
    pub omega_max: f64,
    pub grid_n: usize,
    pub cascade_depth: u32,
    pub beta_terms: u32,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "uL_max")]
    pub ul_max: f64,
    pub bound_violations: usize,
    /// `null` when the defect underflows.
    pub hilbert_slope: Option<f64>,
    pub sobolev_exponent: f64,
    pub phase_relation_defects: [f64; 2],
}

pub fn cmd_analyze(
    doc: &FilterBankDocument,
    params: &GridParams,
) -> crate::Result<(AnalyzeOutput, spectral::SpectrumGrid)> {
    let bank = doc.to_bank()?;
    let (report, grid) = spectral::analyze(&bank, params)?;
    let (phi, psi) = spectral::verify_phase_relations(&grid, bank.order, params.beta_terms);
    Ok((
        AnalyzeOutput {
            order: bank.order,
            moments: bank.moments,
            omega_max: params.omega_max,
            grid_n: params.n,
            cascade_depth: params.depth,
            beta_terms: params.beta_terms,
            e1: report.e1,
            e2: report.e2,
            ul_max: report.ul_max_on_grid,
            bound_violations: report.bound_violations,
            hilbert_slope: report.hilbert_slope.is_finite().then_some(report.hilbert_slope),
            sobolev_exponent: report.sobolev_exponent,
            phase_relation_defects: [phi, psi],
        },
        grid,
    ))
}

pub fn spectra_csv(grid: &spectral::SpectrumGrid, header: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {header}");
    let _ = writeln!(
        out,
        "# cascade_depth={} beta_terms={} n={}",
        grid.cascade_depth,
        grid.beta_terms,
        grid.omega.len()
    );
    out.push_str("omega,psi_h_re,psi_h_im,psi_g_re,psi_g_im,abs_psi_h,abs_analytic\n");
    let analytic = spectral::analytic_modulus(grid);
    for k in 0..grid.omega.len() {
        let (h, g) = (grid.psi_h[k], grid.psi_g[k]);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            grid.omega[k],
            h.re,
            h.im,
            g.re,
            g.im,
            h.norm(),
            analytic[k]
        );
    }
    out
}

/// One row per `M`, one column per `L`, "." where no value could be produced.
pub fn cmd_table1(l_max: usize, m_max: usize) -> String {
    let cells: Vec<(usize, usize)> = (1..=m_max)
        .flat_map(|m| (1..=l_max).map(move |l| (m, l)))
        .collect();
    let values: Vec<std::result::Result<f64, String>> = cells
        .par_iter()
        .map(|&(m, l)| {
            design(l, m, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp)
                .and_then(|d| spectral::sobolev_exponent(&d.bank))
                .map_err(|e| format!("L={l}: {e}"))
        })
        .collect();
    let linear_ill: Vec<bool> = cells
        .par_iter()
        .map(|&(m, l)| matches!(bezout::linear_system(l, m), Err(Error::IllConditioned { .. })))
        .collect();

    let mut out = String::new();
    out.push_str("# Sobolev exponent of psi_H; rows M, columns L; method=recursive phase=mid\n");
    out.push_str("# \".\" marks cells that could not be computed; reason lists why, and where the linear-system method is ill-conditioned\n");
    out.push('M');
    for l in 1..=l_max {
        let _ = write!(out, ",L={l}");
    }
    out.push_str(",reason\n");
    for m in 1..=m_max {
        let _ = write!(out, "{m}");
        let mut reasons = Vec::new();
        let mut ill = Vec::new();
        for l in 1..=l_max {
            let idx = (m - 1) * l_max + (l - 1);
            match &values[idx] {
                Ok(v) => {
                    let _ = write!(out, ",{v}");
                }
                Err(e) => {
                    out.push_str(",.");
                    reasons.push(e.clone());
                }
            }
            if linear_ill[idx] {
                ill.push(l.to_string());
            }
        }
        if !ill.is_empty() {
            reasons.push(format!("linear system ill-conditioned at L={}", ill.join("/")));
        }
        let _ = writeln!(out, ",{}", reasons.join("; "));
    }
    out
}

/// A plotted curve: label and `(x, y)` points.
pub type Series = (String, Vec<(f64, f64)>);

pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
    pub log_y: bool,
}

const COLORS: [&str; 6] = ["#000000", "#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#ff7f0e"];

/// Stacked polyline panels as a standalone SVG document.
pub fn render_svg(title: &str, xlabel: &str, panels: &[Panel]) -> String {
    let (width, panel_h, margin) = (800.0, 280.0, 60.0);
    let height = 40.0 + panels.len() as f64 * (panel_h + margin);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        width / 2.0,
        title
    );
    for (p, panel) in panels.iter().enumerate() {
        let top = 40.0 + p as f64 * (panel_h + margin);
        let (left, right) = (margin, width - 150.0);
        let bottom = top + panel_h;
        let tf = |y: f64| if panel.log_y { y.max(1e-300).log10() } else { y };
        let pts = panel.series.iter().flat_map(|s| s.1.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(tf(y));
            y1 = y1.max(tf(y));
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
        let sy = |y: f64| bottom - (tf(y) - y0) / (y1 - y0) * panel_h;
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{top}" width="{}" height="{panel_h}" fill="none" stroke="black"/>"#,
            right - left
        );
        let _ = writeln!(
            s,
            r#"<text x="{left}" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
            top - 6.0,
            panel.title
        );
        let ylab = |v: f64| if panel.log_y { format!("1e{v:.1}") } else { format!("{v:.3}") };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 4.0,
            top + 10.0,
            ylab(y1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{bottom}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 4.0,
            ylab(y0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{left}" y="{}" font-family="sans-serif" font-size="11">{x0:.3}</text>"#,
            bottom + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{right}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{x1:.3}</text>"#,
            bottom + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{xlabel}</text>"#,
            (left + right) / 2.0,
            bottom + 28.0
        );
        for (k, (label, points)) in panel.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                path.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{label}</text>"#,
                right + 10.0,
                top + 16.0 + 16.0 * k as f64
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub const FIGURE1_ORDERS: [usize; 4] = [2, 4, 8, 16];
pub const FIGURE1_PARAMS: (f64, usize) = (8.0 * PI, 4097);
pub const FIGURE2_MOMENTS: [usize; 3] = [2, 3, 4];
pub const FIGURE2_ORDERS: [usize; 3] = [2, 4, 8];
pub const FIGURE2_PARAMS: (f64, usize) = (6.0 * PI, 2049);
pub const FIGURE3_MOMENTS: [usize; 3] = [2, 3, 4];
pub const FIGURE3_ORDERS: std::ops::RangeInclusive<usize> = 1..=8;

/// `|1 - e^{i eta_L(w)}|` for `L` in 2, 4, 8, 16: CSV and SVG.
pub fn figure1(terms: u32) -> (String, String) {
    let (omega_max, n) = FIGURE1_PARAMS;
    let grid = GridParams { omega_max, n, ..GridParams::default() }.omega();
    let columns: Vec<Vec<f64>> = FIGURE1_ORDERS
        .iter()
        .map(|&l| grid.par_iter().map(|&w| spectral::eta_step(l, w, terms)).collect())
        .collect();
    let mut csv = String::new();
    let _ = writeln!(csv, "# |1 - exp(i eta_L(omega))|; omega_max={omega_max} n={n} beta_terms={terms}");
    csv.push_str("omega");
    for l in FIGURE1_ORDERS {
        let _ = write!(csv, ",L={l}");
    }
    csv.push('\n');
    for (k, w) in grid.iter().enumerate() {
        let _ = write!(csv, "{w}");
        for c in &columns {
            let _ = write!(csv, ",{}", c[k]);
        }
        csv.push('\n');
    }
    let series = FIGURE1_ORDERS
        .iter()
        .zip(&columns)
        .map(|(l, c)| (format!("L={l}"), grid.iter().copied().zip(c.iter().copied()).collect()))
        .collect();
    let svg = render_svg(
        "|1 - exp(i eta_L)|",
        "omega",
        &[Panel { title: "L = 2, 4, 8, 16".into(), series, log_y: false }],
    );
    (csv, svg)
}

/// `|psi_H|` and `|psi_H + i psi_G|` for `M` in 2, 3, 4 and `L` in 2, 4, 8.
pub fn figure2(params: &GridParams) -> crate::Result<(String, Vec<(usize, String)>)> {
    let (omega_max, n) = FIGURE2_PARAMS;
    let gp = GridParams { omega_max, n, ..*params };
    let combos: Vec<(usize, usize)> = FIGURE2_MOMENTS
        .iter()
        .flat_map(|&m| FIGURE2_ORDERS.iter().map(move |&l| (m, l)))
        .collect();
    let grids = combos
        .iter()
        .map(|&(m, l)| {
            let d = design(l, m, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp)?;
            spectral::cascade_spectra(&d.bank, &gp)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let omega = gp.omega();
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# |psi_H| and |psi_H + i psi_G|; omega_max={omega_max} n={n} cascade_depth={} phase=mid method=recursive",
        gp.depth
    );
    csv.push_str("omega");
    for (m, l) in &combos {
        let _ = write!(csv, ",abs_psi_h_M{m}_L{l}");
    }
    for (m, l) in &combos {
        let _ = write!(csv, ",abs_analytic_M{m}_L{l}");
    }
    csv.push('\n');
    let analytic: Vec<Vec<f64>> = grids.iter().map(spectral::analytic_modulus).collect();
    for (k, w) in omega.iter().enumerate() {
        let _ = write!(csv, "{w}");
        for g in &grids {
            let _ = write!(csv, ",{}", g.psi_h[k].norm());
        }
        for a in &analytic {
            let _ = write!(csv, ",{}", a[k]);
        }
        csv.push('\n');
    }
    let mut svgs = Vec::new();
    for &m in &FIGURE2_MOMENTS {
        let pick = |f: &dyn Fn(usize) -> Vec<f64>| -> Vec<Series> {
            combos
                .iter()
                .enumerate()
                .filter(|(_, c)| c.0 == m)
                .map(|(i, c)| {
                    (format!("L={}", c.1), omega.iter().copied().zip(f(i)).collect())
                })
                .collect()
        };
        let top = pick(&|i| grids[i].psi_h.iter().map(|z| z.norm()).collect());
        let bottom = pick(&|i| analytic[i].clone());
        let svg = render_svg(
            &format!("M = {m}"),
            "omega",
            &[
                Panel { title: "|psi_H|".into(), series: top, log_y: false },
                Panel { title: "|psi_H + i psi_G|".into(), series: bottom, log_y: false },
            ],
        );
        svgs.push((m, svg));
    }
    Ok((csv, svgs))
}

/// `E1`, `E2` against `L` for `M` in 2, 3, 4.
pub fn figure3_values(params: &GridParams) -> crate::Result<Vec<(usize, usize, f64, f64)>> {
    let combos: Vec<(usize, usize)> = FIGURE3_MOMENTS
        .iter()
        .flat_map(|&m| FIGURE3_ORDERS.map(move |l| (m, l)))
        .collect();
    combos
        .iter()
        .map(|&(m, l)| {
            let d = design(l, m, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp)?;
            let grid = spectral::cascade_spectra(&d.bank, params)?;
            let (e1, e2) = spectral::leakage_measures(&grid);
            Ok((m, l, e1, e2))
        })
        .collect()
}

pub fn figure3(params: &GridParams) -> crate::Result<(String, String)> {
    let values = figure3_values(params)?;
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# E1 and E2 against L; omega_max={} n={} cascade_depth={} phase=mid method=recursive",
        params.omega_max, params.n, params.depth
    );
    csv.push('L');
    for m in FIGURE3_MOMENTS {
        let _ = write!(csv, ",E1_M{m},E2_M{m}");
    }
    csv.push('\n');
    for l in FIGURE3_ORDERS {
        let _ = write!(csv, "{l}");
        for m in FIGURE3_MOMENTS {
            let v = values.iter().find(|v| v.0 == m && v.1 == l).expect("every cell computed");
            let _ = write!(csv, ",{},{}", v.2, v.3);
        }
        csv.push('\n');
    }
    let series = |pick: fn(&(usize, usize, f64, f64)) -> f64| -> Vec<Series> {
        FIGURE3_MOMENTS
            .iter()
            .map(|&m| {
                let pts = values
                    .iter()
                    .filter(|v| v.0 == m)
                    .map(|v| (v.1 as f64, pick(v)))
                    .collect();
                (format!("M={m}"), pts)
            })
            .collect()
    };
    let svg = render_svg(
        "Leakage against L",
        "L",
        &[
            Panel { title: "E1 (log scale)".into(), series: series(|v| v.2), log_y: true },
            Panel { title: "E2 (log scale)".into(), series: series(|v| v.3), log_y: true },
        ],
    );
    Ok((csv, svg))
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_document(path: &Path) -> anyhow::Result<FilterBankDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FilterBankDocument::parse(&text)?)
}

fn structured_error(err: &anyhow::Error) -> String {
    let kind = err
        .downcast_ref::<Error>()
        .map(Error::kind)
        .unwrap_or("Io");
    let value = serde_json::json!({ "error": kind, "message": format!("{err:#}") });
    value.to_string()
}

/// Run one command. Exit status 0 means every declared tolerance was met,
/// 1 that a check failed, 2 that the command could not complete.
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", structured_error(&e));
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Design(args) => {
            let (doc, ok) = cmd_design(&args)?;
            write_or_print(args.out.as_deref(), &doc.to_json())?;
            if !ok {
                eprintln!(
                    "pr_defect {:e} exceeds --tol-pr {:e}",
                    doc.diagnostics.pr_defect, args.tol_pr
                );
            }
            Ok(ok)
        }
        Command::Verify(args) => {
            let doc = read_document(&args.path)?;
            let report = cmd_verify(&doc, &args)?;
            for c in &report.checks {
                println!("{:<24} {} ({})", c.name, if c.passed { "ok" } else { "FAIL" }, c.detail);
            }
            Ok(report.passed)
        }
        Command::Analyze(args) => {
            let doc = read_document(&args.path)?;
            let params = args.grid.params();
            let (out, grid) = cmd_analyze(&doc, &params)?;
            let mut text = serde_json::to_string_pretty(&out)?;
            text.push('\n');
            write_or_print(args.out.as_deref(), &text)?;
            if let Some(csv) = &args.csv {
                let header = format!("spectra for L={} M={} omega_max={}", out.order, out.moments, params.omega_max);
                fs::write(csv, spectra_csv(&grid, &header))
                    .with_context(|| format!("writing {}", csv.display()))?;
            }
            Ok(out.bound_violations == 0)
        }
        Command::Table1(args) => {
            write_or_print(args.out.as_deref(), &cmd_table1(args.l_max, args.m_max))?;
            Ok(true)
        }
        Command::Figures(args) => {
            let params = args.grid.params();
            params.validate()?;
            fs::create_dir_all(&args.out)
                .with_context(|| format!("creating {}", args.out.display()))?;
            let want = |k: u8| args.which.is_none_or(|w| w == k);
            let put = |name: &str, text: &str| -> anyhow::Result<()> {
                let p = args.out.join(name);
                fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
            };
            if want(1) {
                let (csv, svg) = figure1(params.beta_terms);
                put("figure1.csv", &csv)?;
                put("figure1.svg", &svg)?;
            }
            if want(2) {
                let (csv, svgs) = figure2(&params)?;
                put("figure2.csv", &csv)?;
                for (m, svg) in svgs {
                    put(&format!("figure2_M{m}.svg"), &svg)?;
                }
            }
            if want(3) {
                let (csv, svg) = figure3(&params)?;
                put("figure3.csv", &csv)?;
                put("figure3.svg", &svg)?;
            }
            Ok(true)
        }
    }
}
