//! File formats: problem JSON (with "inf"/"-inf" extended bounds), cone
//! block lists, solve reports, certificates, oracle reports, instance
//! sidecars and the trace CSVs.

use std::io::Write;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::cone::Certificate;
use crate::error::{CoreError, Result};
use crate::geometry::{ConeBlock, ConeSpec};
use crate::iht::{SolveReport, SolveStatus, TraceRow};
use crate::instance::InstanceSpec;
use crate::model::{ConeL0Problem, ExtendedBox, L0Problem, ObjectiveKind, SmoothObjective};
use crate::oracle::EnumerationResult;
use crate::pg::PGTraceRow;

/// Extended real serialized as a number or the strings "inf"/"-inf".
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Num(f64),
    Word(String),
}

impl Bound {
    fn to_f64(&self) -> Result<f64> {
        match self {
            Bound::Num(v) => Ok(*v),
            Bound::Word(w) => match w.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(CoreError::Malformed(format!("bad bound string {other:?}"))),
            },
        }
    }

    fn from_f64(v: f64) -> Bound {
        if v == f64::INFINITY {
            Bound::Word("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Word("-inf".into())
        } else {
            Bound::Num(v)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveJson {
    LeastSquares {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lipschitz_l: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        strong_modulus: Option<f64>,
    },
    Quadratic {
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lipschitz_l: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        strong_modulus: Option<f64>,
    },
    Perturbed {
        base: Box<ObjectiveJson>,
        nu: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxJson {
    pub l: Vec<Bound>,
    pub u: Vec<Bound>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeBlockJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub objective: ObjectiveJson,
    #[serde(rename = "box")]
    pub bounds: BoxJson,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<Vec<ConeBlockJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(rename = "A")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opnorm_a: Option<f64>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<Array2<f64>> {
    if rows.is_empty() {
        return Err(CoreError::Malformed(format!("{what}: empty matrix")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(CoreError::Malformed(format!("{what}: ragged or empty rows")));
    }
    let mut m = Array2::zeros((rows.len(), ncols));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    Ok(m)
}

fn matrix_to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn objective_from_json(json: &ObjectiveJson) -> Result<SmoothObjective> {
    match json {
        ObjectiveJson::LeastSquares { a, b, lipschitz_l, strong_modulus } => {
            let design = matrix_from_rows(a, "objective.a")?;
            let target = Array1::from_vec(b.clone());
            match (lipschitz_l, strong_modulus) {
                (Some(l), Some(s)) => {
                    SmoothObjective::least_squares_with_constants(design, target, *l, *s)
                }
                _ => SmoothObjective::least_squares(design, target),
            }
        }
        ObjectiveJson::Quadratic { q, c, lipschitz_l, strong_modulus } => {
            let hessian = matrix_from_rows(q, "objective.q")?;
            let linear = Array1::from_vec(c.clone());
            match (lipschitz_l, strong_modulus) {
                (Some(l), Some(s)) => {
                    SmoothObjective::quadratic_with_constants(hessian, linear, *l, *s)
                }
                _ => SmoothObjective::quadratic(hessian, linear),
            }
        }
        ObjectiveJson::Perturbed { base, nu } => {
            SmoothObjective::perturbed(objective_from_json(base)?, *nu)
        }
    }
}

fn objective_to_json(obj: &SmoothObjective) -> ObjectiveJson {
    use crate::model::SmoothOracle;
    match obj.kind() {
        ObjectiveKind::LeastSquares { design, target } => ObjectiveJson::LeastSquares {
            a: matrix_to_rows(design),
            b: target.to_vec(),
            lipschitz_l: Some(obj.lipschitz()),
            strong_modulus: Some(obj.strong_modulus()),
        },
        ObjectiveKind::Quadratic { hessian, linear } => ObjectiveJson::Quadratic {
            q: matrix_to_rows(hessian),
            c: linear.to_vec(),
            lipschitz_l: Some(obj.lipschitz()),
            strong_modulus: Some(obj.strong_modulus()),
        },
        ObjectiveKind::Perturbed { base, nu } => ObjectiveJson::Perturbed {
            base: Box::new(objective_to_json(base)),
            nu: *nu,
        },
    }
}

fn cone_from_json(blocks: &[ConeBlockJson]) -> Result<ConeSpec> {
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        out.push(match b.kind.as_str() {
            "zero" => ConeBlock::Zero(b.dim),
            "free" => ConeBlock::Free(b.dim),
            "nonneg" => ConeBlock::NonnegOrthant(b.dim),
            "soc" => ConeBlock::SecondOrder(b.dim),
            other => {
                return Err(CoreError::Malformed(format!("unknown cone block type {other:?}")))
            }
        });
    }
    ConeSpec::new(out)
}

fn cone_to_json(cone: &ConeSpec) -> Vec<ConeBlockJson> {
    cone.blocks()
        .iter()
        .map(|b| {
            let (kind, dim) = match b {
                ConeBlock::Zero(d) => ("zero", *d),
                ConeBlock::Free(d) => ("free", *d),
                ConeBlock::NonnegOrthant(d) => ("nonneg", *d),
                ConeBlock::SecondOrder(d) => ("soc", *d),
            };
            ConeBlockJson { kind: kind.into(), dim }
        })
        .collect()
}

fn bounds_from_json(json: &BoxJson) -> Result<ExtendedBox> {
    let l: Result<Vec<f64>> = json.l.iter().map(Bound::to_f64).collect();
    let u: Result<Vec<f64>> = json.u.iter().map(Bound::to_f64).collect();
    ExtendedBox::new(Array1::from_vec(l?), Array1::from_vec(u?))
}

fn bounds_to_json(bounds: &ExtendedBox) -> BoxJson {
    BoxJson {
        l: bounds.lower().iter().map(|&v| Bound::from_f64(v)).collect(),
        u: bounds.upper().iter().map(|&v| Bound::from_f64(v)).collect(),
    }
}

/// A problem file can carry either the box-constrained or the
/// cone-constrained assembly.
#[derive(Debug, Clone)]
pub enum LoadedProblem {
    Box(L0Problem),
    Cone(ConeL0Problem),
}

impl LoadedProblem {
    pub fn dim(&self) -> usize {
        match self {
            LoadedProblem::Box(p) => p.dim(),
            LoadedProblem::Cone(p) => p.dim(),
        }
    }
}

pub fn problem_from_json(json: &ProblemJson) -> Result<LoadedProblem> {
    let objective = objective_from_json(&json.objective)?;
    let bounds = bounds_from_json(&json.bounds)?;
    match (&json.cone, &json.a, &json.b) {
        (None, None, None) => {
            Ok(LoadedProblem::Box(L0Problem::new(objective, bounds, json.lambda)?))
        }
        (Some(cone), Some(a), Some(b)) => {
            let a = matrix_from_rows(a, "A")?;
            let b = Array1::from_vec(b.clone());
            let cone = cone_from_json(cone)?;
            let p = match json.opnorm_a {
                Some(op) => ConeL0Problem::with_opnorm(
                    objective,
                    bounds,
                    json.lambda,
                    a,
                    b,
                    cone,
                    op,
                )?,
                None => ConeL0Problem::new(objective, bounds, json.lambda, a, b, cone)?,
            };
            Ok(LoadedProblem::Cone(p))
        }
        _ => Err(CoreError::Malformed(
            "cone problems need all of cone, A and b; box problems none of them".into(),
        )),
    }
}

pub fn problem_to_json(problem: &LoadedProblem) -> ProblemJson {
    match problem {
        LoadedProblem::Box(p) => ProblemJson {
            objective: objective_to_json(&p.objective),
            bounds: bounds_to_json(&p.bounds),
            lambda: p.lambda,
            cone: None,
            a: None,
            b: None,
            opnorm_a: None,
        },
        LoadedProblem::Cone(p) => ProblemJson {
            objective: objective_to_json(&p.objective),
            bounds: bounds_to_json(&p.bounds),
            lambda: p.lambda,
            cone: Some(cone_to_json(&p.cone)),
            a: Some(matrix_to_rows(&p.a)),
            b: Some(p.b.to_vec()),
            opnorm_a: Some(p.opnorm_a()),
        },
    }
}

pub fn read_problem(reader: impl std::io::Read) -> Result<LoadedProblem> {
    let json: ProblemJson = serde_json::from_reader(reader)?;
    problem_from_json(&json)
}

pub fn write_problem(writer: impl Write, problem: &LoadedProblem) -> Result<()> {
    serde_json::to_writer_pretty(writer, &problem_to_json(problem))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub feas_residual: f64,
    pub complementarity: f64,
    pub stationarity_residual: f64,
    pub epsilon: f64,
    pub holds: bool,
    pub mu: Vec<f64>,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            feas_residual: c.feas_residual,
            complementarity: c.complementarity,
            stationarity_residual: c.stationarity_residual,
            epsilon: c.epsilon,
            holds: c.holds,
            mu: c.mu.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReportJson {
    pub x_star: Vec<f64>,
    /// 0-based indices of the zero coordinates of x_star.
    pub support_zero: Vec<usize>,
    #[serde(rename = "F_value")]
    pub f_total: f64,
    #[serde(rename = "f_value")]
    pub f_smooth: f64,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub max_inner_per_outer: usize,
    pub support_changes: usize,
    pub delta: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
}

pub fn report_to_json(report: &SolveReport, certificate: Option<&Certificate>) -> SolveReportJson {
    SolveReportJson {
        x_star: report.x_star.to_vec(),
        support_zero: report.support_zero.as_slice().to_vec(),
        f_total: report.objective_value,
        f_smooth: report.smooth_value,
        outer_iters: report.outer_iters,
        inner_iters_total: report.inner_iters_total,
        max_inner_per_outer: report.max_inner_per_outer,
        support_changes: report.support_changes,
        delta: report.delta,
        status: match report.status {
            SolveStatus::Converged => "converged".into(),
            SolveStatus::IterationCapped => "iteration-capped".into(),
        },
        certificate: certificate.map(CertificateJson::from),
    }
}

/// Trace CSV: (iter, F, dx_norm, L_used, support_changed); cone runs gain
/// (rho, feas_residual) columns.
pub fn write_solve_trace(mut w: impl Write, trace: &[TraceRow]) -> Result<()> {
    let cone = trace.iter().any(|r| r.rho.is_some());
    if cone {
        writeln!(w, "iter,F,dx_norm,L_used,support_changed,rho,feas_residual")?;
    } else {
        writeln!(w, "iter,F,dx_norm,L_used,support_changed")?;
    }
    for row in trace {
        if cone {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                row.iter,
                row.objective,
                row.dx_norm,
                row.l_used,
                row.support_changed as u8,
                row.rho.unwrap_or(f64::NAN),
                row.feas_residual.unwrap_or(f64::NAN),
            )?;
        } else {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.iter, row.objective, row.dx_norm, row.l_used, row.support_changed as u8
            )?;
        }
    }
    Ok(())
}

/// Projected-gradient trace CSV: (iter, value, gnorm).
pub fn write_pg_trace(mut w: impl Write, trace: &[PGTraceRow]) -> Result<()> {
    writeln!(w, "iter,value,gnorm")?;
    for row in trace {
        writeln!(w, "{},{},{}", row.iter, row.value, row.gnorm)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarJson {
    pub x_true: Vec<f64>,
    pub seed: u64,
    pub spec: InstanceSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportRecordJson {
    /// 0-based pinned zero set.
    pub indices: Vec<usize>,
    pub feasible: bool,
    pub x: Vec<f64>,
    pub f_value: f64,
    #[serde(rename = "F_value")]
    pub objective_value: f64,
    pub consistent: bool,
    pub is_local_min: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_norm: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReportJson {
    pub records: Vec<SupportRecordJson>,
    pub best_x: Vec<f64>,
    #[serde(rename = "F_star")]
    pub best_value: f64,
    pub locals: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_hat: Option<f64>,
}

pub fn oracle_report_to_json(result: &EnumerationResult) -> OracleReportJson {
    OracleReportJson {
        records: result
            .records
            .iter()
            .map(|r| SupportRecordJson {
                indices: r.indices.as_slice().to_vec(),
                feasible: r.feasible,
                x: r.x.to_vec(),
                f_value: r.f_value,
                objective_value: r.objective_value,
                consistent: r.consistent,
                is_local_min: r.is_local_min,
                mu_norm: r.mu_norm,
                converged: r.converged,
            })
            .collect(),
        best_x: result.best_x.to_vec(),
        best_value: result.best_value,
        locals: result.locals.iter().map(|l| l.to_vec()).collect(),
        t_hat: result.t_hat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_round_trip_box() {
        let text = r#"{
            "objective": {"kind": "quadratic", "q": [[1.0, 0.0], [0.0, 2.0]], "c": [0.5, -0.5]},
            "box": {"l": ["-inf", -1.0], "u": [1.0, "inf"]},
            "lambda": 0.25
        }"#;
        let loaded = read_problem(text.as_bytes()).unwrap();
        let p = match &loaded {
            LoadedProblem::Box(p) => p,
            _ => panic!("expected box problem"),
        };
        assert_eq!(p.lambda, 0.25);
        assert_eq!(p.bounds.lower()[0], f64::NEG_INFINITY);
        assert_eq!(p.bounds.upper()[1], f64::INFINITY);
        let mut buf = Vec::new();
        write_problem(&mut buf, &loaded).unwrap();
        let reloaded = read_problem(buf.as_slice()).unwrap();
        assert_eq!(reloaded.dim(), 2);
    }

    #[test]
    fn problem_round_trip_cone() {
        let text = r#"{
            "objective": {"kind": "least_squares", "a": [[1.0, 0.0], [0.0, 1.0]], "b": [1.0, 2.0]},
            "box": {"l": [-3.0, -3.0], "u": [3.0, 3.0]},
            "lambda": 0.1,
            "cone": [{"type": "nonneg", "dim": 1}, {"type": "soc", "dim": 2}],
            "A": [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            "b": [0.0, 0.0, 1.0]
        }"#;
        let loaded = read_problem(text.as_bytes()).unwrap();
        match &loaded {
            LoadedProblem::Cone(p) => {
                assert_eq!(p.constraint_dim(), 3);
                assert_eq!(p.cone.blocks().len(), 2);
            }
            _ => panic!("expected cone problem"),
        }
        let mut buf = Vec::new();
        write_problem(&mut buf, &loaded).unwrap();
        assert!(matches!(read_problem(buf.as_slice()).unwrap(), LoadedProblem::Cone(_)));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = r#"{
            "objective": {"kind": "quadratic", "q": [[1.0]], "c": [0.0]},
            "box": {"l": [-1.0, -1.0], "u": [1.0, 1.0]},
            "lambda": 0.1
        }"#;
        assert!(read_problem(text.as_bytes()).is_err());
    }

    #[test]
    fn partial_cone_fields_rejected() {
        let text = r#"{
            "objective": {"kind": "quadratic", "q": [[1.0]], "c": [0.0]},
            "box": {"l": [-1.0], "u": [1.0]},
            "lambda": 0.1,
            "b": [0.0]
        }"#;
        assert!(read_problem(text.as_bytes()).is_err());
    }

    #[test]
    fn trace_csv_columns() {
        let rows = vec![TraceRow {
            iter: 1,
            objective: 2.5,
            dx_norm: 0.1,
            l_used: 1.1,
            support_changed: true,
            rho: None,
            feas_residual: None,
        }];
        let mut buf = Vec::new();
        write_solve_trace(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,F,dx_norm,L_used,support_changed\n"));
        assert!(text.contains("1,2.5,0.1,1.1,1"));

        let cone_rows = vec![TraceRow { rho: Some(4.0), feas_residual: Some(0.25), ..rows[0] }];
        let mut buf2 = Vec::new();
        write_solve_trace(&mut buf2, &cone_rows).unwrap();
        let text2 = String::from_utf8(buf2).unwrap();
        assert!(text2.starts_with("iter,F,dx_norm,L_used,support_changed,rho,feas_residual\n"));
        assert!(text2.contains(",4,0.25"));
    }
}
