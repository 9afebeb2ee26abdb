use std::f64::consts::TAU;
use std::path::Path;

use linsys_quanta::classical::{compute_modes, ModeSet};
use linsys_quanta::hermite::evaluate;
use linsys_quanta::linalg::{c, max_abs_c, real_part, CMatrix};
use linsys_quanta::model::{reduce as reduce_model, GeneralHamiltonian};
use linsys_quanta::packet::{propagate, PacketState};
use linsys_quanta::riccati::{default_dt, select_modes, GroundSelection};
use linsys_quanta::states::{
    build_basis, coherent_direct, coherent_factored, expand_coherent, expansion_value, psi_n, spectrum as levels,
    CoherentState, SpectrumBasis, MAX_TRUNCATION,
};
use linsys_quanta::verify::{eigen_residual, gram, Grid};
use linsys_quanta::{CoefficientVector, HermiteContext, MultiIndex, NormalForm};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::report::{self, Complex};
use crate::{parse, Options};

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

fn load(path: &Path) -> Result<GeneralHamiltonian, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(GeneralHamiltonian::from_json(&text)?)
}

fn normal_form(path: &Path) -> Result<NormalForm, CliError> {
    Ok(reduce_model(&load(path)?)?)
}

fn check_positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::argument(flag, format!("must be positive, got {v}")))
    }
}

/// Writes `file` under `--out`, or prints to stdout.
fn emit(o: &Options, file: &str, contents: &str) -> Result<(), CliError> {
    match &o.out {
        Some(dir) => {
            let io = |source| CliError::Io {
                path: dir.clone(),
                source,
            };
            std::fs::create_dir_all(dir).map_err(io)?;
            let path = dir.join(file);
            std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
            log::info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{contents}");
            if !contents.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn emit_json(o: &Options, file: &str, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    emit(o, file, &(text + "\n"))
}

fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

struct Pipeline {
    nf: NormalForm,
    modes: ModeSet,
    ground: GroundSelection,
}

impl Pipeline {
    fn new(path: &Path) -> Result<Self, CliError> {
        let nf = normal_form(path)?;
        let modes = compute_modes(&nf)?;
        let ground = select_modes(&modes, nf.mass)?;
        Ok(Pipeline { nf, modes, ground })
    }

    fn basis(&self, hbar: f64) -> Result<SpectrumBasis, CliError> {
        check_positive("--hbar", hbar)?;
        Ok(build_basis(
            &self.modes,
            &self.ground.shape.selection,
            &self.ground.shape.k0,
            self.nf.mass,
            hbar,
        )?)
    }
}

fn label(n: &MultiIndex) -> String {
    n.0.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("_")
}

pub fn reduce(path: &Path, o: &Options) -> Result<(), CliError> {
    let nf = normal_form(path)?;
    emit_json(
        o,
        "reduce.json",
        &json!({
            "dim": nf.dim,
            "mass": nf.mass,
            "omega": report::rows(&nf.omega),
            "v": report::rows(&nf.v),
            "g": nf.g,
            "transform": report::rows(&nf.transform),
            "stretch": report::rows(&nf.stretch),
            "momentum_shift": nf.momentum_shift,
        }),
    )
}

pub fn modes(path: &Path, o: &Options) -> Result<(), CliError> {
    let ms = compute_modes(&normal_form(path)?)?;
    emit_json(
        o,
        "modes.json",
        &report::Modes {
            freqs: ms.freqs.iter().map(|&w| w.into()).collect(),
            amps: ms
                .amps
                .iter()
                .map(|a| report::Amplitude {
                    r: report::complexes(&a.r),
                    p: report::complexes(&a.p),
                })
                .collect(),
            pairing: ms.pairing.clone(),
        },
    )
}

pub fn ground(path: &Path, o: &Options) -> Result<(), CliError> {
    let hbar = check_positive("--hbar", o.hbar)?;
    let p = Pipeline::new(path)?;
    let s = &p.ground.shape;
    emit_json(
        o,
        "ground.json",
        &report::Ground {
            k0: (&s.k0).into(),
            selection: s.selection.chosen.clone(),
            residual: s.residual,
            min_eigenvalue_re: s.min_real_eigenvalue,
            trace_imag: s.trace_imag,
            zero_point_energy: hbar * 0.5 * real_part(&s.k0).trace(),
            physical_selections: p.ground.physical.len(),
        },
    )
}

pub fn spectrum(path: &Path, o: &Options) -> Result<(), CliError> {
    let b = Pipeline::new(path)?.basis(o.hbar)?;
    let out: Vec<report::Level> = levels(&b, o.max_total.unwrap_or(3))?
        .into_iter()
        .map(|s| report::Level {
            index: s.index.0,
            energy: s.energy,
        })
        .collect();
    emit_json(o, "spectrum.json", &out)
}

pub fn states(path: &Path, o: &Options) -> Result<(), CliError> {
    let b = Pipeline::new(path)?.basis(o.hbar)?;
    let max_total = o.max_total.unwrap_or(2);
    let grid = Grid::auto(&b.ground, max_total, o.grid_points)?;
    let sts = levels(&b, max_total)?;
    let axes: Vec<String> = (0..b.dim).map(|i| format!("x{i}")).collect();
    let values: Vec<Vec<Complex64>> = sts
        .iter()
        .map(|st| (0..grid.len()).map(|k| psi_n(&b, st, &grid.point(k))).collect())
        .collect::<Result<_, _>>()?;
    let table = |cols: &[usize]| {
        let mut header = axes.clone();
        for &s in cols {
            let l = label(&sts[s].index);
            header.push(format!("re_{l}"));
            header.push(format!("im_{l}"));
        }
        csv_text(
            &header,
            (0..grid.len()).map(|k| {
                let mut row = grid.point(k);
                for &s in cols {
                    row.push(values[s][k].re);
                    row.push(values[s][k].im);
                }
                row
            }),
        )
    };
    if o.out.is_some() {
        for s in 0..sts.len() {
            emit(o, &format!("state_{}.csv", label(&sts[s].index)), &table(&[s]))?;
        }
        Ok(())
    } else {
        emit(o, "states.csv", &table(&(0..sts.len()).collect::<Vec<_>>()))
    }
}

fn vector_flag(flag: &str, s: Option<&str>, dim: usize) -> Result<DVector<f64>, CliError> {
    match s {
        None => Ok(DVector::zeros(dim)),
        Some(s) => {
            let v = parse::reals(flag, s)?;
            if v.len() != dim {
                return Err(CliError::argument(flag, format!("expected {dim} entries, got {}", v.len())));
            }
            Ok(DVector::from_vec(v))
        }
    }
}

pub fn evolve(path: &Path, o: &Options, shape_scale: f64, r0: Option<&str>, p0: Option<&str>) -> Result<(), CliError> {
    let hbar = check_positive("--hbar", o.hbar)?;
    check_positive("--shape-scale", shape_scale)?;
    let nf = normal_form(path)?;
    let n = nf.dim;
    let ms = compute_modes(&nf).ok();
    let k0 = match ms.as_ref().map(|ms| select_modes(ms, nf.mass)) {
        Some(Ok(g)) => g.shape.k0,
        _ => {
            log::info!("no stationary shape; starting from K = identity");
            CMatrix::identity(n, n)
        }
    };
    let dt = match o.dt {
        Some(dt) => check_positive("--dt", dt)?,
        None => ms.as_ref().map(default_dt).unwrap_or(1e-2),
    };
    let tmax = match o.tmax {
        Some(t) => check_positive("--tmax", t)?,
        None => ms
            .as_ref()
            .and_then(|ms| {
                let w = ms.positive_freqs().iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min);
                (w > 0.0 && w.is_finite()).then(|| TAU / w)
            })
            .unwrap_or(10.0),
    };
    let s0 = PacketState::new(
        k0 * c(shape_scale, 0.0),
        vector_flag("--r0", r0, n)?,
        vector_flag("--p0", p0, n)?,
        hbar,
        nf.mass,
    )?;
    let path = propagate(&s0, &nf, (0.0, tmax), dt)?;
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for j in i..n {
            header.push(format!("K{i}{j}_re"));
            header.push(format!("K{i}{j}_im"));
        }
    }
    header.extend((0..n).map(|i| format!("R{i}")));
    header.extend((0..n).map(|i| format!("P{i}")));
    header.push("normN".into());
    header.push("phase".into());
    let rows = path.iter().map(|(t, s)| {
        let mut row = vec![*t];
        for i in 0..n {
            for j in i..n {
                row.push(s.k[(i, j)].re);
                row.push(s.k[(i, j)].im);
            }
        }
        row.extend(s.r.iter());
        row.extend(s.p.iter());
        row.push(s.norm);
        row.push(s.phase);
        row
    });
    emit(o, "evolve.csv", &csv_text(&header, rows))
}

const FORM_TOLERANCE: f64 = 1e-8;

pub fn coherent(path: &Path, o: &Options, lambda: Option<&str>, t: f64, phi0: f64) -> Result<(), CliError> {
    let p = Pipeline::new(path)?;
    let b = p.basis(o.hbar)?;
    let n = b.dim;
    let lambdas = match lambda {
        Some(s) => {
            let v = parse::complexes("--lambda", s)?;
            if v.len() != n {
                return Err(CliError::argument("--lambda", format!("expected {n} weights, got {}", v.len())));
            }
            v
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
            (0..n)
                .map(|_| Complex64::from_polar(rng.random_range(0.0..0.5), rng.random_range(0.0..TAU)))
                .collect()
        }
    };
    let truncation = o.max_total.unwrap_or(12);
    if truncation > MAX_TRUNCATION {
        return Err(linsys_quanta::Error::TruncationTooLarge {
            order: truncation,
            max: MAX_TRUNCATION,
        }
        .into());
    }
    let cs = CoherentState::new(CoefficientVector::new(lambdas.clone()), phi0);
    let (r, pc) = cs.center(&b, t)?;
    let coeffs = expand_coherent(&cs, &b, truncation, t)?;

    let grid_check = if n <= 3 {
        let grid = Grid::auto(&b.ground, 4, o.grid_points)?;
        let (mut scale, mut form, mut exp) = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..grid.len() {
            let x = grid.point(k);
            let d = coherent_direct(&cs, &b, &p.nf.v, t, &x)?;
            let f = coherent_factored(&cs, &b, t, &x)?;
            let e = expansion_value(&coeffs, &b, &x)?;
            scale = scale.max(d.norm());
            form = form.max((d - f).norm());
            exp = exp.max((d - e).norm());
        }
        let form_difference = form / scale;
        if form_difference.is_nan() || form_difference > FORM_TOLERANCE {
            return Err(linsys_quanta::Error::FormMismatch { difference: form_difference }.into());
        }
        Some(report::GridCheck {
            points: grid.points.clone(),
            extent: grid.extent.clone(),
            form_difference,
            expansion_difference: exp / scale,
        })
    } else {
        None
    };

    emit_json(
        o,
        "coherent.json",
        &report::Coherent {
            lambdas: lambdas.iter().map(|&z| z.into()).collect(),
            t,
            center: report::Center {
                r: report::vector(&r),
                p: report::vector(&pc),
            },
            phase: cs.phase(&b, &p.nf.v, t)?,
            truncation,
            coefficients: coeffs
                .into_iter()
                .map(|(idx, v)| report::Coefficient {
                    index: idx.0,
                    re: v.re,
                    im: v.im,
                })
                .collect(),
            grid_check,
        },
    )
}

pub fn verify(path: &Path, o: &Options, tolerance: f64, format: Format) -> Result<(), CliError> {
    check_positive("--tolerance", tolerance)?;
    let p = Pipeline::new(path)?;
    let b = p.basis(o.hbar)?;
    let max_total = o.max_total.unwrap_or(0);
    let grid = Grid::auto(&b.ground, max_total, o.grid_points)?;
    let sts = levels(&b, max_total)?;
    let g = gram(&b, &sts, &grid)?;
    let mut checks = Vec::with_capacity(sts.len());
    for (i, st) in sts.iter().enumerate() {
        checks.push(report::StateCheck {
            index: st.index.0.clone(),
            energy: st.energy,
            residual: eigen_residual(&p.nf, &b, st, &grid)?,
            norm_error: (g[(i, i)].re - 1.0).abs(),
        });
    }
    let off = max_abs_c(&(&g - CMatrix::from_diagonal(&g.diagonal())));
    let pass = checks.iter().all(|s| s.residual <= tolerance && s.norm_error <= tolerance) && off <= tolerance;
    let rep = report::Verify {
        points: grid.points.clone(),
        extent: grid.extent.clone(),
        tolerance,
        states: checks,
        max_gram_offdiagonal: off,
        pass,
    };
    if o.out.is_some() {
        emit_json(o, "verify.json", &rep)?;
        emit(o, "verify.txt", &rep.table())?;
    } else {
        match format {
            Format::Json => emit_json(o, "verify.json", &rep)?,
            Format::Text => emit(o, "verify.txt", &rep.table())?,
        }
    }
    if pass {
        Ok(())
    } else {
        let worst = rep.states.iter().map(|s| s.residual.max(s.norm_error)).fold(off, f64::max);
        Err(CliError::VerificationFailed(format!(
            "grid check exceeded tolerance {tolerance:e} (worst {worst:.3e})"
        )))
    }
}

pub fn hermite_eval(o: &Options, gamma: &str, index: Option<&str>, x: &str) -> Result<(), CliError> {
    let ctx = HermiteContext::new(parse::matrix("--gamma", gamma)?)?;
    let x = parse::complexes("--x", x)?;
    if x.len() != ctx.dim() {
        return Err(CliError::argument("--x", format!("expected {} entries, got {}", ctx.dim(), x.len())));
    }
    let indices = match index {
        Some(s) => vec![parse::index("--index", s)?],
        None => MultiIndex::up_to_total(ctx.dim(), o.max_total.unwrap_or(3)),
    };
    let values = indices
        .into_iter()
        .map(|n| {
            let v = evaluate(&ctx, &n, &x)?;
            Ok(report::Coefficient {
                index: n.0,
                re: v.re,
                im: v.im,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit_json(
        o,
        "hermite.json",
        &report::HermiteValues {
            x: x.iter().map(|&z| Complex::from(z)).collect(),
            values,
        },
    )
}
