//! Limited-memory BFGS with a projected, monotone Armijo backtracking search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub memory: usize,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            grad_tol: 1e-7,
            memory: 10,
            armijo: 1e-4,
            max_backtracks: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after the start and after every accepted step.
    pub trace: Vec<f64>,
    /// Whether the projection changed any iterate.
    pub projection_active: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `f` from `x0`. `project` maps a point into the feasible set in
/// place and reports whether it moved. `stop` is polled once per iteration.
pub fn minimize<F, P, S>(x0: Vec<f64>, mut f: F, mut project: P, stop: S, opts: LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    P: FnMut(&mut [f64]) -> bool,
    S: Fn() -> bool,
{
    let mut x = x0;
    let mut active = project(&mut x);
    let (mut fx, mut g) = f(&x);
    let mut trace = vec![fx];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        if inf_norm(&g) <= opts.grad_tol {
            converged = true;
            break;
        }
        if stop() {
            break;
        }
        let mut d = direction(&g, &memory);
        if dot(&d, &g) >= 0.0 {
            memory.clear();
            d = direction(&g, &memory);
        }
        let mut accepted = None;
        for attempt in 0..2 {
            let mut t = 1.0;
            for _ in 0..opts.max_backtracks {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                let moved = project(&mut trial);
                active |= moved;
                let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                let decrease = dot(&g, &step);
                if decrease >= 0.0 {
                    t *= 0.5;
                    continue;
                }
                let (ft, gt) = f(&trial);
                if ft.is_finite() && ft <= fx + opts.armijo * decrease && ft <= fx {
                    accepted = Some((trial, ft, gt, step, moved));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() || attempt == 1 || memory.is_empty() {
                break;
            }
            memory.clear();
            d = direction(&g, &memory);
        }
        let Some((xn, fnew, gn, s, moved)) = accepted else {
            break;
        };
        active |= moved;
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        fx = fnew;
        g = gn;
        trace.push(fx);
        iterations += 1;
    }
    if !converged && inf_norm(&g) <= opts.grad_tol {
        converged = true;
    }
    LbfgsOutcome {
        x,
        value: fx,
        grad: g,
        iterations,
        converged,
        trace,
        projection_active: active,
    }
}

/// Two-loop recursion; without history, a steepest-descent step capped to
/// unit infinity norm.
fn direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    if memory.is_empty() {
        let scale = 1.0 / inf_norm(g).max(1.0);
        return q.iter().map(|v| -v * scale).collect();
    }
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let (s, y, _) = memory.back().expect("history");
    let gamma = dot(s, y) / dot(y, y);
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter().map(|v| -v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (v, g)
        };
        let out = minimize(vec![-1.2, 1.0], f, |_| false, || false, LbfgsOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn projection_onto_box() {
        let f = |x: &[f64]| ((x[0] - 3.0).powi(2), vec![2.0 * (x[0] - 3.0)]);
        let clamp = |x: &mut [f64]| {
            let moved = x[0] > 1.0;
            x[0] = x[0].min(1.0);
            moved
        };
        let out = minimize(vec![0.0], f, clamp, || false, LbfgsOptions { max_iter: 50, ..Default::default() });
        assert!((out.x[0] - 1.0).abs() < 1e-12);
        assert!(out.projection_active);
        assert!(!out.converged);
    }
}
