//! Finite-difference oracles shared by the gradient and acceptance suites.

#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twinslice::ddpg::agent::{actor_objective_and_grad, critic_loss_and_grad, td_targets, Batch};
use twinslice::ddpg::mlp::{Head, Mlp};
use twinslice::geometry::Position;
use twinslice::mobility::{coverage_objective, objective_gradient};

pub const STEP: f64 = 1e-6;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

/// Worst relative error between `analytic` and central differences of `f`
/// over every parameter of `net`.
pub fn worst_fd_error(net: &Mlp, analytic: &[f64], f: impl Fn(&Mlp) -> f64) -> f64 {
    let base = net.params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for k in 0..base.len() {
        let mut p = base.clone();
        p[k] = base[k] + STEP;
        probe.set_params(&p).unwrap();
        let up = f(&probe);
        p[k] = base[k] - STEP;
        probe.set_params(&p).unwrap();
        let down = f(&probe);
        worst = worst.max(rel_err(analytic[k], (up - down) / (2.0 * STEP)));
    }
    worst
}

/// A tiny net with every parameter drawn from `[-0.8, 0.8]`, so no layer
/// starts near zero.
pub fn tiny_net(sizes: &[usize], rng: &mut ChaCha8Rng) -> Mlp {
    let mut net = Mlp::zeros(sizes);
    let params: Vec<f64> = (0..net.num_params()).map(|_| rng.random_range(-0.8..0.8)).collect();
    net.set_params(&params).unwrap();
    net
}

/// Critic TD-loss gradient check on one random instance.
pub fn critic_instance(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sd, ad, n) = (3, 2, 5);
    let critic = tiny_net(&[sd + ad, 4, 3, 1], &mut rng);
    let target_actor = tiny_net(&[sd, 4, ad], &mut rng);
    let target_critic = tiny_net(&[sd + ad, 4, 1], &mut rng);
    let batch = Batch {
        states: random_matrix(n, sd, &mut rng),
        actions: random_matrix(n, ad, &mut rng),
        rewards: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        next_states: random_matrix(n, sd, &mut rng),
        not_done: (0..n).map(|k| if k == n - 1 { 0.0 } else { 1.0 }).collect(),
    };
    let targets = td_targets(&target_actor, &target_critic, &batch, 0.9);
    let (_, grads) = critic_loss_and_grad(&critic, &batch, &targets);
    worst_fd_error(&critic, &grads.flatten(), |c| critic_loss_and_grad(c, &batch, &targets).0)
}

/// Policy-gradient check on one random instance; odd seeds use a bounded
/// actor head.
pub fn actor_instance(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sd, ad, n) = (4, 3, 6);
    let mut actor = tiny_net(&[sd, 5, 4, ad], &mut rng);
    if seed % 2 == 1 {
        actor = actor.with_head(Head::Tanh(1.5));
    }
    let critic = tiny_net(&[sd + ad, 5, 1], &mut rng);
    let states = random_matrix(n, sd, &mut rng);
    let (_, grads) = actor_objective_and_grad(&actor, &critic, &states);
    worst_fd_error(&actor, &grads.flatten(), |a| actor_objective_and_grad(a, &critic, &states).0)
}

/// FBS objective-gradient check on one random layout; odd layouts use
/// demand weights.
pub fn fbs_layout(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..40);
    let ues: Vec<Position> = (0..m)
        .map(|_| Position::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0)))
        .collect();
    let fbs = Position::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
    let h = rng.random_range(20.0..300.0);
    let weights: Option<Vec<f64>> = (seed % 2 == 1).then(|| {
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    });
    let w = weights.as_deref();
    let (gx, gy) = objective_gradient(&ues, fbs, h, w);
    let j = |x: f64, y: f64| coverage_objective(&ues, Position::new(x, y), h, w);
    // Distances are O(100) m; a millimetre step keeps cancellation small.
    let step = 1e-3;
    let nx = (j(fbs.x + step, fbs.y) - j(fbs.x - step, fbs.y)) / (2.0 * step);
    let ny = (j(fbs.x, fbs.y + step) - j(fbs.x, fbs.y - step)) / (2.0 * step);
    (gx - nx).hypot(gy - ny) / gx.hypot(gy).max(1e-8)
}
