#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss–Legendre nodes and weights on `[a, b]` (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    let nf = order as f64;
    for k in 1..=order {
        let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=order {
                let mf = m as f64;
                let p2 = ((2.0 * mf - 1.0) * x * p1 - (mf - 1.0) * p0) / mf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w));
    }
    out
}

pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, order: usize) -> f64 {
    let rule = gauss_legendre(order, 0.0, 1.0);
    let mut total = 0.0;
    for &(x, wx) in &rule {
        for &(y, wy) in &rule {
            total += wx * wy * f(x, y);
        }
    }
    total
}

/// `S_ij = Σ sgn(i−k) sgn(j−l) Δ_kl`, straight from the definition.
pub fn brute_force_potential(d: &Array2<f64>) -> Array2<f64> {
    let n = d.nrows();
    let sgn = |a: usize, b: usize| (a as f64 - b as f64).signum() * (a != b) as i32 as f64;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += sgn(i, k) * sgn(j, l) * d[[k, l]];
            }
        }
        s
    })
}

pub fn brute_force_tau(d: &Array2<f64>) -> f64 {
    let s = brute_force_potential(d);
    d.iter().zip(s.iter()).map(|(a, b)| a * b).sum()
}

pub fn info(d: &Array2<f64>) -> f64 {
    let n2 = (d.nrows() * d.nrows()) as f64;
    d.iter()
        .map(|&m| if m > 0.0 { m * (n2 * m).ln() } else { 0.0 })
        .sum()
}

/// Orthogonal projection onto matrices with zero row and column sums.
fn project_tangent(g: &Array2<f64>) -> Array2<f64> {
    let n = g.nrows();
    let nf = n as f64;
    let rows: Vec<f64> = (0..n).map(|i| g.row(i).sum() / nf).collect();
    let cols: Vec<f64> = (0..n).map(|j| g.column(j).sum() / nf).collect();
    let mean = g.sum() / (nf * nf);
    Array2::from_shape_fn((n, n), |(i, j)| g[[i, j]] - rows[i] - cols[j] + mean)
}

/// Projected steepest descent on the affine hull of the marginal
/// constraints. Step sizes are chosen from gradients alone (largest doubling
/// or halving of the previous step that does not pass the minimum along the
/// ray), which keeps the iteration accurate long after objective differences
/// drop below rounding.
fn projected_descent<G>(n: usize, start: Option<Array2<f64>>, grad: G) -> Array2<f64>
where
    G: Fn(&Array2<f64>) -> Array2<f64>,
{
    let mut x = start.unwrap_or_else(|| Array2::from_elem((n, n), 1.0 / (n * n) as f64));
    let mut step = 0.01;
    for _ in 0..100_000 {
        let g = project_tangent(&grad(&x));
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < 1e-14 {
            break;
        }
        step *= 2.0;
        loop {
            let trial = &x - &(&g * step);
            if trial.iter().all(|&v| v > 0.0) {
                let slope: f64 = grad(&trial).iter().zip(g.iter()).map(|(a, b)| a * b).sum();
                if slope >= 0.0 {
                    x = trial;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-30 {
                return x;
            }
        }
    }
    x
}

/// Minimizer of `Σ Δ ln(n²Δ) − λ τ(Δ)` over doubly stochastic `Δ`.
pub fn penalized_reference(n: usize, lambda: f64) -> Array2<f64> {
    let n2 = (n * n) as f64;
    projected_descent(n, None, |d| {
        let s = brute_force_potential(d);
        Array2::from_shape_fn((n, n), |(i, j)| {
            (n2 * d[[i, j]]).ln() + 1.0 - 2.0 * lambda * s[[i, j]]
        })
    })
}

/// Minimum-information density with `τ(Δ) = target` by an augmented
/// Lagrangian around the projected-gradient descent.
pub fn constrained_reference(n: usize, target: f64) -> Array2<f64> {
    let n2 = (n * n) as f64;
    let rho = 50.0;
    let mut mu = 0.0;
    let mut x: Option<Array2<f64>> = None;
    for _ in 0..100 {
        let grad = |d: &Array2<f64>| {
            let s = brute_force_potential(d);
            let c = brute_force_tau(d) - target;
            Array2::from_shape_fn((n, n), |(i, j)| {
                (n2 * d[[i, j]]).ln() + 1.0 + (rho * c - mu) * 2.0 * s[[i, j]]
            })
        };
        let next = projected_descent(n, x.take(), grad);
        let c = brute_force_tau(&next) - target;
        mu -= rho * c;
        x = Some(next);
        if c.abs() < 1e-13 {
            break;
        }
    }
    x.unwrap()
}

/// Random positive doubly stochastic matrix (Sinkhorn on a random kernel).
pub fn random_doubly_stochastic(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut m = Array2::from_shape_fn((n, n), |_| (rng.gen::<f64>() * 4.0 - 2.0).exp());
    let target = 1.0 / n as f64;
    for _ in 0..10_000 {
        for i in 0..n {
            let s = m.row(i).sum();
            m.row_mut(i).mapv_inplace(|v| v * target / s);
        }
        for j in 0..n {
            let s = m.column(j).sum();
            m.column_mut(j).mapv_inplace(|v| v * target / s);
        }
        let err = (0..n)
            .map(|i| (m.row(i).sum() - target).abs())
            .fold(0.0, f64::max);
        if err < 1e-15 {
            break;
        }
    }
    m
}

/// Random feasible densities with `τ = target`: a random doubly stochastic
/// matrix mixed with a fixed high- or low-τ density, the weight found by
/// bisection (τ is continuous along the segment).
pub fn random_feasible(n: usize, target: f64, count: usize, seed: u64) -> Vec<Array2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    // near-comonotone and near-countermonotone anchors
    let hi = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.9 / nf
        } else {
            0.1 / (nf * (nf - 1.0))
        }
    });
    let lo = Array2::from_shape_fn((n, n), |(i, j)| hi[[n - 1 - i, j]]);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = random_doubly_stochastic(n, &mut rng);
        let tr = brute_force_tau(&r);
        let anchor = if tr < target { &hi } else { &lo };
        let mix = |w: f64| &r * (1.0 - w) + anchor * w;
        let g = |w: f64| brute_force_tau(&mix(w)) - target;
        let (mut a, mut b) = (0.0, 1.0);
        if g(a).signum() == g(b).signum() {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m).signum() == g(a).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(mix(0.5 * (a + b)));
    }
    out
}

pub fn sup_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
