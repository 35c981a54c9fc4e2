//! Derivative-free minimization by linear approximation, after Powell's
//! COBYLA, specialized to the unconstrained case.
//!
//! The method keeps `n + 1` interpolation points (a simplex). The best point
//! is the pole; the simplex edges define a linear model whose steepest
//! descent step of length `ρ` is tried next. The trust radius `ρ` halves
//! whenever a step fails to achieve a tenth of its predicted reduction on a
//! well-shaped simplex, and the run ends once `ρ` reaches `ρ_end` or the
//! evaluation budget is spent.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simplex acceptability: edges longer than `BETA·ρ` or vertices closer
/// than `ALPHA·ρ` to the opposite face trigger a geometry step.
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
/// Geometry steps have length `GAMMA·ρ`.
const GAMMA: f64 = 0.5;
/// Replacement prefers vertices farther than `DELTA·ρ` from the new point.
const DELTA: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_evals: usize,
    pub rho_begin: f64,
    pub rho_end: f64,
}

impl OptimizerConfig {
    pub const DEFAULT_RHO_BEGIN: f64 = 0.5;
    pub const DEFAULT_RHO_END: f64 = 1e-4;

    /// Budget of 50 evaluations per qubit.
    pub fn for_qubits(num_qubits: usize) -> Self {
        Self::with_budget(50 * num_qubits)
    }

    pub fn with_budget(max_evals: usize) -> Self {
        Self {
            max_evals,
            rho_begin: Self::DEFAULT_RHO_BEGIN,
            rho_end: Self::DEFAULT_RHO_END,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::InvalidConfig("max_evals must be at least 1".into()));
        }
        if !(self.rho_begin > self.rho_end && self.rho_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need rho_begin > rho_end > 0, got {} and {}",
                self.rho_begin, self.rho_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimization {
    pub best_x: Vec<f64>,
    pub best_cost: f64,
    pub evals: usize,
    /// Every `(x, cost)` in call order.
    pub log: Vec<(Vec<f64>, f64)>,
}

struct Budgeted<F> {
    f: F,
    max: usize,
    log: Vec<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Budgeted<F> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.log.len() >= self.max {
            return Ok(None);
        }
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteCost {
                value: v,
                eval: self.log.len() + 1,
            });
        }
        self.log.push((x.to_vec(), v));
        Ok(Some(v))
    }

    fn finish(self) -> Minimization {
        let (best_i, _) = self
            .log
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, (_, v))| {
                if *v < bv {
                    (i, *v)
                } else {
                    (bi, bv)
                }
            });
        let (best_x, best_cost) = self.log[best_i].clone();
        Minimization {
            best_x,
            best_cost,
            evals: self.log.len(),
            log: self.log,
        }
    }
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

/// Linear model around the pole.
struct Model {
    pole: usize,
    /// Non-pole vertex indices, matching the rows of `edges`.
    others: Vec<usize>,
    /// Columns of the inverse edge matrix; `|col_k|⁻¹` is vertex k's
    /// distance from the opposite face.
    inverse: DMatrix<f64>,
    gradient: DVector<f64>,
    edge_len: Vec<f64>,
    face_dist: Vec<f64>,
}

impl Simplex {
    fn pole(&self) -> usize {
        // first minimum keeps the incumbent on ties
        (0..self.values.len()).fold(0, |b, i| if self.values[i] < self.values[b] { i } else { b })
    }

    fn model(&self) -> Option<Model> {
        let n = self.points[0].len();
        let pole = self.pole();
        let others: Vec<usize> = (0..=n).filter(|&i| i != pole).collect();
        let edges = DMatrix::from_fn(n, n, |r, c| self.points[others[r]][c] - self.points[pole][c]);
        let diffs = DVector::from_fn(n, |r, _| self.values[others[r]] - self.values[pole]);
        let inverse = edges.clone().try_inverse()?;
        if inverse.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let gradient = &inverse * diffs;
        let edge_len = (0..n).map(|r| edges.row(r).norm()).collect();
        let face_dist = (0..n).map(|k| 1.0 / inverse.column(k).norm()).collect();
        Some(Model {
            pole,
            others,
            inverse,
            gradient,
            edge_len,
            face_dist,
        })
    }
}

impl Model {
    fn acceptable(&self, rho: f64) -> bool {
        self.edge_len.iter().all(|&e| e <= BETA * rho) && self.face_dist.iter().all(|&s| s >= ALPHA * rho)
    }
}

/// Minimizes `f` from `x0` without derivatives. Never calls `f` more than
/// `config.max_evals` times and returns the best of all evaluated points.
pub fn minimize<F>(f: F, x0: &[f64], config: &OptimizerConfig) -> Result<Minimization>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    config.validate()?;
    let n = x0.len();
    let mut ev = Budgeted {
        f,
        max: config.max_evals,
        log: Vec::new(),
    };
    let mut rho = config.rho_begin;

    let Some(f0) = ev.eval(x0)? else { unreachable!("budget is at least one") };
    if n == 0 {
        return Ok(ev.finish());
    }
    let mut simplex = Simplex {
        points: vec![x0.to_vec()],
        values: vec![f0],
    };
    if !initial_simplex(&mut ev, &mut simplex, x0, rho)? {
        return Ok(ev.finish());
    }

    // after a geometry step the next step is always a trust-region step
    let mut geometry_done = false;
    loop {
        let model = match simplex.model() {
            Some(m) => m,
            None => {
                let pole = simplex.points[simplex.pole()].clone();
                let v = simplex.values[simplex.pole()];
                simplex = Simplex {
                    points: vec![pole.clone()],
                    values: vec![v],
                };
                if !initial_simplex(&mut ev, &mut simplex, &pole, rho)? {
                    break;
                }
                continue;
            }
        };
        let acceptable = model.acceptable(rho);

        if !geometry_done && !acceptable {
            if !geometry_step(&mut ev, &mut simplex, &model, rho)? {
                break;
            }
            geometry_done = true;
            continue;
        }

        let gnorm = model.gradient.norm();
        let mut improved_enough = false;
        if gnorm > 0.0 && gnorm.is_finite() {
            let step = -&model.gradient * (rho / gnorm);
            let pole_x = &simplex.points[model.pole];
            let trial: Vec<f64> = pole_x.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let Some(f_trial) = ev.eval(&trial)? else { break };
            let predicted = rho * gnorm;
            let actual = simplex.values[model.pole] - f_trial;
            replace_after_step(&mut simplex, &model, &step, trial, f_trial, actual, rho);
            improved_enough = actual > 0.0 && actual >= 0.1 * predicted;
        }
        if improved_enough {
            continue;
        }
        if !acceptable {
            geometry_done = false;
            continue;
        }
        if rho > config.rho_end {
            rho *= 0.5;
            if rho <= 1.5 * config.rho_end {
                rho = config.rho_end;
            }
        } else {
            break;
        }
    }
    Ok(ev.finish())
}

/// Fills the simplex with `base + ρ e_j`. Returns false if the budget ran out.
fn initial_simplex<F>(ev: &mut Budgeted<F>, simplex: &mut Simplex, base: &[f64], rho: f64) -> Result<bool>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    for j in 0..base.len() {
        let mut x = base.to_vec();
        x[j] += rho;
        let Some(v) = ev.eval(&x)? else { return Ok(false) };
        simplex.points.push(x);
        simplex.values.push(v);
    }
    Ok(true)
}

/// Replaces the worst-shaped vertex by a point `GAMMA·ρ` from the pole along
/// the direction that restores its distance to the opposite face.
fn geometry_step<F>(ev: &mut Budgeted<F>, simplex: &mut Simplex, model: &Model, rho: f64) -> Result<bool>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = model.others.len();
    let too_long = (0..n)
        .filter(|&k| model.edge_len[k] > BETA * rho)
        .max_by(|&a, &b| model.edge_len[a].total_cmp(&model.edge_len[b]));
    let k = too_long.unwrap_or_else(|| {
        (0..n)
            .min_by(|&a, &b| model.face_dist[a].total_cmp(&model.face_dist[b]))
            .expect("n >= 1")
    });
    let dir = model.inverse.column(k);
    let mut step: DVector<f64> = dir * (GAMMA * rho / dir.norm());
    if step.dot(&model.gradient) > 0.0 {
        step = -step;
    }
    let pole_x = &simplex.points[model.pole];
    let x: Vec<f64> = pole_x.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
    let Some(v) = ev.eval(&x)? else { return Ok(false) };
    let slot = model.others[k];
    simplex.points[slot] = x;
    simplex.values[slot] = v;
    Ok(true)
}

/// Chooses which vertex the trial point replaces, if any.
fn replace_after_step(
    simplex: &mut Simplex,
    model: &Model,
    step: &DVector<f64>,
    trial: Vec<f64>,
    f_trial: f64,
    actual_reduction: f64,
    rho: f64,
) {
    let n = model.others.len();
    // the step in simplex coordinates: step = Σ_k sigma_k edge_k
    let sigma: Vec<f64> = (0..n).map(|k| model.inverse.column(k).dot(step).abs()).collect();

    let mut best = if actual_reduction > 0.0 { 0.0 } else { 1.0 };
    let mut drop = None;
    for (k, &s) in sigma.iter().enumerate() {
        if s > best {
            best = s;
            drop = Some(k);
        }
    }

    // prefer a far vertex whose replacement keeps the simplex nondegenerate
    let mut far = DELTA * rho;
    let mut far_k = None;
    for k in 0..n {
        let scaled = sigma[k] * model.face_dist[k];
        if scaled >= ALPHA * rho || scaled >= model.face_dist[k] {
            let dist = if actual_reduction > 0.0 {
                let v = &simplex.points[model.others[k]];
                v.iter().zip(&trial).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            } else {
                model.edge_len[k]
            };
            if dist > far {
                far = dist;
                far_k = Some(k);
            }
        }
    }
    if let Some(k) = far_k.or(drop) {
        let slot = model.others[k];
        simplex.points[slot] = trial;
        simplex.values[slot] = f_trial;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(max_evals: usize) -> OptimizerConfig {
        OptimizerConfig::with_budget(max_evals)
    }

    #[test]
    fn one_dimensional_quadratic() {
        let r = minimize(|x| Ok((x[0] - 1.0).powi(2)), &[0.0], &cfg(50)).unwrap();
        assert!((r.best_x[0] - 1.0).abs() < 1e-3, "{:?}", r.best_x);
        assert!(r.evals <= 50);
    }

    #[test]
    fn single_evaluation_budget() {
        let r = minimize(|x| Ok(x[0] * x[0] + 3.0), &[2.0, 1.0], &cfg(1)).unwrap();
        assert_eq!(r.evals, 1);
        assert_eq!(r.best_x, vec![2.0, 1.0]);
        assert_eq!(r.best_cost, 7.0);
    }

    #[test]
    fn constant_function_terminates() {
        let r = minimize(|_| Ok(4.0), &[0.3, 0.1, 0.2], &cfg(500)).unwrap();
        assert_eq!(r.best_cost, 4.0);
        assert!(r.evals <= 500);
        assert!(r.evals < 500, "should stop on rho_end, used {}", r.evals);
    }

    #[test]
    fn rosenbrock_progress() {
        let rosen = |x: &[f64]| Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let r = minimize(rosen, &[-1.2, 1.0], &cfg(2000)).unwrap();
        // linear models crawl along the curved valley; only require steady descent
        assert!(r.best_cost < 1.0, "{} after {} evals", r.best_cost, r.evals);
    }

    #[test]
    fn quadratic_in_many_dimensions() {
        let target: Vec<f64> = (0..10).map(|i| (i as f64 * 0.37).sin()).collect();
        let t = target.clone();
        let f = move |x: &[f64]| Ok(x.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>());
        let r = minimize(f, &[0.0; 10], &cfg(1000)).unwrap();
        assert!(r.best_cost < 1e-5, "{}", r.best_cost);
    }

    #[test]
    fn best_is_minimum_of_log() {
        let f = |x: &[f64]| Ok((x[0] * 3.0).sin() + (x[1] * 2.0).cos() + 0.1 * x[0] * x[1]);
        let r = minimize(f, &[0.5, -0.5], &cfg(60)).unwrap();
        let min = r.log.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_cost, min);
        assert_eq!(r.log.len(), r.evals);
        assert!(r.evals <= 60);
    }

    #[test]
    fn non_finite_cost_is_an_error() {
        let err = minimize(|x| Ok(if x[0] > 0.2 { f64::NAN } else { 0.0 }), &[0.0], &cfg(10)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteCost { eval: 2, .. }));
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig { rho_end: 1.0, ..cfg(10) }.validate().is_err());
        assert!(cfg(0).validate().is_err());
        assert_eq!(OptimizerConfig::for_qubits(6).max_evals, 300);
    }
}
