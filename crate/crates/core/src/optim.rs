//! Derivative-free minimisation (Nelder-Mead with optional box projection).

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Convergence when the spread of simplex values falls below
    /// `ftol * (|f_best| + ftol)` and the simplex diameter below `xtol`.
    pub ftol: f64,
    pub xtol: f64,
    /// Initial simplex offset per coordinate.
    pub step: f64,
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            ftol: 1e-10,
            xtol: 1e-8,
            step: 0.1,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    fn project(&self, x: &mut [f64]) {
        if let Some((lo, hi)) = &self.bounds {
            for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
                *v = v.clamp(*l, *h);
            }
        }
    }

    /// Minimises `f` from `x0`. Non-finite objective values are treated as `+inf`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };
        if n == 0 {
            let fx = eval(x0);
            return Minimum {
                x: Vec::new(),
                fx,
                iterations: 0,
                converged: true,
            };
        }

        let mut start = x0.to_vec();
        self.project(&mut start);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = eval(&start);
        simplex.push((start.clone(), f0));
        for i in 0..n {
            let mut x = start.clone();
            let step = if x[i].abs() > 1e-8 {
                self.step * x[i].abs().max(0.5)
            } else {
                self.step
            };
            x[i] += step;
            self.project(&mut x);
            if x[i] == start[i] {
                x[i] -= 2.0 * step;
                self.project(&mut x);
            }
            let fx = eval(&x);
            simplex.push((x, fx));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            let spread = worst - best;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.is_finite()
                && spread <= self.ftol * (best.abs() + self.ftol)
                && diameter <= self.xtol.max(1e-12)
            {
                converged = true;
                break;
            }
            if spread.is_finite() && spread == 0.0 && diameter <= self.xtol * 1e3 {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c += v / n as f64;
                }
            }
            let along = |coef: f64| -> Vec<f64> {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect();
                self.project(&mut p);
                p
            };

            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink toward the best vertex
            let best_x = simplex[0].0.clone();
            for (x, fx) in simplex[1..].iter_mut() {
                for (v, b) in x.iter_mut().zip(&best_x) {
                    *v = b + 0.5 * (*v - b);
                }
                self.project(x);
                *fx = eval(x);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, fx) = simplex.swap_remove(0);
        Minimum {
            x,
            fx,
            iterations,
            converged,
        }
    }
}
