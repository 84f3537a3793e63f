//! Nonlinear conjugate gradient (Polak–Ribière+) with central-difference
//! gradients and a Brent line minimization.

const GOLDEN: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgParams {
    pub gradient_step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64, out: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        out[i] = (up - down) / (2.0 * h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` starting from `x0`.
pub(crate) fn minimize(f: impl Fn(&[f64]) -> f64, x0: Vec<f64>, params: CgParams) -> CgOutcome {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = vec![0.0; n];
    gradient(&f, &x, params.gradient_step, &mut g);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut g_new = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut step = 0.1;
    let mut quiet = 0;

    for it in 0..params.max_iterations {
        let gg = dot(&g, &g);
        if gg == 0.0 {
            return CgOutcome {
                x,
                f: fx,
                iterations: it,
                converged: true,
            };
        }
        if dot(&g, &d) >= 0.0 {
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        }
        let dnorm = dot(&d, &d).sqrt();
        let line = |a: f64| {
            let mut p = vec![0.0; n];
            for i in 0..n {
                p[i] = x[i] + a * d[i];
            }
            f(&p)
        };
        let (alpha, f_new) = line_minimum(&line, fx, (step / dnorm).max(1e-12));
        if alpha != 0.0 {
            step = (alpha.abs() * dnorm).clamp(1e-8, 1.0);
        }
        for i in 0..n {
            trial[i] = x[i] + alpha * d[i];
        }
        let decrease = fx - f_new;
        if f_new <= fx {
            std::mem::swap(&mut x, &mut trial);
            fx = f_new;
        }
        gradient(&f, &x, params.gradient_step, &mut g_new);

        if decrease.abs() <= params.tolerance * (1.0 + fx.abs()) {
            quiet += 1;
            // Two quiet steps in a row, the second from a steepest-descent
            // restart, count as convergence.
            if quiet >= 2 {
                return CgOutcome {
                    x,
                    f: fx,
                    iterations: it + 1,
                    converged: true,
                };
            }
        } else {
            quiet = 0;
        }

        let beta = if quiet > 0 || (it + 1) % n == 0 {
            0.0
        } else {
            let y: f64 = g_new.iter().zip(&g).map(|(a, b)| a * (a - b)).sum();
            (y / gg).max(0.0)
        };
        for i in 0..n {
            d[i] = -g_new[i] + beta * d[i];
        }
        std::mem::swap(&mut g, &mut g_new);
    }
    CgOutcome {
        x,
        f: fx,
        iterations: params.max_iterations,
        converged: false,
    }
}

/// Minimizes `phi(a)` along a ray, returning `(a, phi(a))` with
/// `phi(a) <= phi(0) = f0`.
fn line_minimum(phi: &impl Fn(f64) -> f64, f0: f64, initial: f64) -> (f64, f64) {
    let (a, b, c, fb) = bracket(phi, f0, initial);
    let (xmin, fmin) = brent(phi, a, b, c, fb);
    if fmin <= f0 {
        (xmin, fmin)
    } else {
        (0.0, f0)
    }
}

/// Finds `a < b < c` with `phi(b) <= phi(a), phi(c)`.
fn bracket(phi: &impl Fn(f64) -> f64, f0: f64, initial: f64) -> (f64, f64, f64, f64) {
    let mut b = initial;
    let mut fb = phi(b);
    // Shrink toward zero until the first probe is an improvement.
    let mut shrinks = 0;
    while fb > f0 {
        if shrinks == 40 {
            return (0.0, 0.0, b, f0);
        }
        let c = b;
        b *= CGOLD;
        fb = phi(b);
        shrinks += 1;
        if fb <= f0 {
            return (0.0, b, c, fb);
        }
    }
    let mut a = 0.0;
    let mut c = b + GOLDEN * b;
    let mut fc = phi(c);
    let mut grows = 0;
    while fc < fb && grows < 60 {
        a = b;
        b = c;
        fb = fc;
        c = b + GOLDEN * (b - a);
        fc = phi(c);
        grows += 1;
    }
    (a, b, c, fb)
}

/// Brent's parabolic-interpolation minimizer on the bracket `(a, b, c)`.
fn brent(phi: &impl Fn(f64) -> f64, a: f64, b: f64, c: f64, fb: f64) -> (f64, f64) {
    const ITMAX: usize = 100;
    const TOL: f64 = 2e-8;
    const ZEPS: f64 = 1e-18;
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..ITMAX {
        let xm = 0.5 * (lo + hi);
        let tol1 = TOL * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() >= (0.5 * q * etemp).abs() || p <= q * (lo - x) || p >= q * (hi - x) {
                e = if x >= xm { lo - x } else { hi - x };
                d = CGOLD * e;
            } else {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
            }
        } else {
            e = if x >= xm { lo - x } else { hi - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = phi(u);
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: CgParams = CgParams {
        gradient_step: 1e-6,
        tolerance: 1e-12,
        max_iterations: 10_000,
    };

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2);
        let out = minimize(f, vec![5.0, 5.0], PARAMS);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, vec![-1.2, 1.0], PARAMS);
        assert!(out.f < 1e-8, "{out:?}");
    }

    #[test]
    fn periodic_objective() {
        let f = |x: &[f64]| -(x[0].cos() * x[1].sin());
        let out = minimize(f, vec![0.3, 0.4], PARAMS);
        assert!((out.f + 1.0).abs() < 1e-10);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, vec![-1.2, 1.0], CgParams { max_iterations: 2, ..PARAMS });
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }
}
