//! Shared oracles for the integration suites.
//!
//! Gradient checks compare analytic gradients computed in `T` against central
//! differences evaluated in double precision on the same (T-rounded) inputs,
//! so the single-precision check measures the f32 code path against a clean
//! reference. Networks with more than `FULL_LIMIT` parameters are probed on a
//! random subset of coordinates.
//!
//! Central differences are only meaningful where the function is smooth on
//! the scale of the step. Every probe is therefore taken at both `EPS` and
//! `EPS / 2`; when the two disagree, a ReLU kink lies within the step and the
//! instance is redrawn. The test depends only on the function, never on the
//! analytic gradient, so it cannot hide a wrong gradient.
#![allow(dead_code)]

pub mod td3;
pub mod windows;

use histenc_td3::agent::{Batch, Td3Bundle, Td3Config};
use histenc_td3::encoder::{Encoder, EncoderConfig, EncoderVariant, HistoryWindow};
use histenc_td3::envs::ActionBounds;
use histenc_td3::nn::{
    cast_slice, relative_error, HiddenActivation, MlpSpec, OutputActivation, Scalar,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-5;
pub const TOL_F64: f64 = 1e-5;
pub const TOL_F32: f64 = 1e-3;
const FULL_LIMIT: usize = 600;
const PROBES: usize = 64;
/// Largest disagreement between the two step sizes on a smooth function.
/// Truncation and round-off keep smooth instances below about 1e-9; a kink
/// inside the step shows up at 1e-4 and above.
const SMOOTHNESS: f64 = 1e-6;

/// Worst relative error over a family of random instances, and how many
/// draws were rejected for a kink within the finite-difference step.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    pub instances: usize,
    pub worst: f64,
    pub redrawn: usize,
}

impl OracleReport {
    fn new() -> Self {
        Self { instances: 0, worst: 0.0, redrawn: 0 }
    }

    /// True while more instances are needed. Gives up (with an infinite
    /// error) if kinks keep rejecting draws, which smooth code never does.
    fn wants(&mut self, instances: usize) -> bool {
        if self.redrawn > instances {
            self.worst = f64::INFINITY;
            return false;
        }
        self.instances < instances
    }

    fn record(&mut self, errors: &[Option<f64>]) {
        if errors.iter().any(Option::is_none) {
            self.redrawn += 1;
            return;
        }
        self.instances += 1;
        for err in errors.iter().flatten() {
            if err.is_nan() || *err > self.worst {
                self.worst = if err.is_nan() { f64::INFINITY } else { *err };
            }
        }
    }
}

pub fn tolerance<T: Scalar>() -> f64 {
    if std::mem::size_of::<T>() == 4 {
        TOL_F32
    } else {
        TOL_F64
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Rounds through `T` so both sides of a check see identical values.
fn through<T: Scalar>(v: &[f64]) -> Vec<f64> {
    cast_slice::<T, f64>(&cast_slice::<f64, T>(v))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative error between `analytic` and central differences of `f` at `at`,
/// or `None` when `f` is not smooth on the scale of the step there.
pub fn compare<T: Scalar>(
    analytic: &[T],
    at: &[f64],
    mut f: impl FnMut(&[f64]) -> f64,
    rng: &mut ChaCha8Rng,
) -> Option<f64> {
    let analytic: Vec<f64> = cast_slice(analytic);
    let coords: Vec<usize> = if at.len() <= FULL_LIMIT {
        (0..at.len()).collect()
    } else {
        sample(rng, at.len(), PROBES).into_vec()
    };
    let mut probe = at.to_vec();
    let mut central = |i: usize, h: f64| {
        probe[i] = at[i] + h;
        let plus = f(&probe);
        probe[i] = at[i] - h;
        let minus = f(&probe);
        probe[i] = at[i];
        (plus - minus) / (2.0 * h)
    };
    let fd: Vec<f64> = coords.iter().map(|&i| central(i, EPS)).collect();
    let half: Vec<f64> = coords.iter().map(|&i| central(i, EPS / 2.0)).collect();
    if relative_error(&fd, &half) > SMOOTHNESS {
        return None;
    }
    let picked: Vec<f64> = coords.iter().map(|&i| analytic[i]).collect();
    Some(relative_error(&picked, &fd))
}

fn random_mlp(rng: &mut ChaCha8Rng) -> MlpSpec {
    let layers = rng.random_range(2..=4);
    let widths: Vec<usize> = (0..layers).map(|_| rng.random_range(1..=8)).collect();
    let hidden = if rng.random_bool(0.5) { HiddenActivation::Relu } else { HiddenActivation::Tanh };
    let output = if rng.random_bool(0.5) { OutputActivation::Identity } else { OutputActivation::Tanh };
    MlpSpec::new(widths, hidden, output).unwrap()
}

/// The MLP shapes of the default configuration on a 3-wide observation with
/// one action: embedding, combiner, actor head and critic head.
pub fn default_mlp_shapes() -> Vec<MlpSpec> {
    let config = Td3Config::default();
    let bundle =
        Td3Bundle::<f64>::new(3, EncoderConfig::default(), config, ActionBounds::symmetric(2.0, 1), 0).unwrap();
    let parallel = bundle.actor_network().encoder().parallel().unwrap();
    vec![
        parallel.embed_spec().clone(),
        parallel.combiner_spec().clone(),
        bundle.actor_network().head().clone(),
        bundle.critic_network().head().clone(),
    ]
}

/// Parameter and input gradients of `mlp_backward` over `instances` triples,
/// alternating between the default shapes and small random shapes.
pub fn mlp_oracle<T: Scalar>(instances: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let defaults = default_mlp_shapes();
    let mut report = OracleReport::new();
    while report.wants(instances) {
        let i = report.instances;
        let spec = if i % 2 == 0 { defaults[(i / 2) % defaults.len()].clone() } else { random_mlp(&mut rng) };
        let mut params: Vec<f64> = spec.init(rng.random());
        for p in params.iter_mut() {
            *p += rng.random_range(-0.1..0.1);
        }
        let params = through::<T>(&params);
        let input = through::<T>(&uniform(&mut rng, spec.input_width(), 1.0));
        let upstream = through::<T>(&uniform(&mut rng, spec.output_width(), 1.0));

        let params_t: Vec<T> = cast_slice(&params);
        let input_t: Vec<T> = cast_slice(&input);
        let trace = spec.forward_trace(&params_t, &input_t).unwrap();
        let mut grads = vec![T::zero(); params.len()];
        let input_grad = spec.backward(&params_t, &trace, &cast_slice(&upstream), &mut grads).unwrap();

        let e_params = compare(&grads, &params, |p| dot(&upstream, &spec.forward(p, &input).unwrap()), &mut rng);
        let e_input = compare(&input_grad, &input, |x| dot(&upstream, &spec.forward(&params, x).unwrap()), &mut rng);
        report.record(&[e_params, e_input]);
    }
    report
}

pub fn random_encoder_config(variant: EncoderVariant, rng: &mut ChaCha8Rng) -> EncoderConfig {
    let hidden = rng.random_range(0..=1);
    EncoderConfig {
        variant,
        window_length: rng.random_range(1..=5),
        embed_width: rng.random_range(1..=6),
        combiner_hidden_widths: (0..hidden).map(|_| rng.random_range(1..=6)).collect(),
        context_width: rng.random_range(1..=5),
    }
}

fn random_window(rng: &mut ChaCha8Rng, length: usize, width: usize) -> HistoryWindow<f64> {
    HistoryWindow::full(uniform(rng, length * width, 1.0), width).unwrap()
}

fn window_through<T: Scalar>(w: &HistoryWindow<f64>) -> HistoryWindow<f64> {
    w.cast::<T>().cast::<f64>()
}

/// Parameter and window gradients of the encoder for `variant`. Every tenth
/// instance uses the default encoder widths.
pub fn encoder_oracle<T: Scalar>(variant: EncoderVariant, instances: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::new();
    while report.wants(instances) {
        let i = report.instances;
        let (config, width) = if i % 10 == 0 {
            (EncoderConfig { variant, ..EncoderConfig::default() }, 3)
        } else {
            (random_encoder_config(variant, &mut rng), rng.random_range(1..=5))
        };
        let encoder = Encoder::new(config, width).unwrap();
        let mut params: Vec<f64> = encoder.init(rng.random());
        for p in params.iter_mut() {
            *p += rng.random_range(-0.1..0.1);
        }
        let params = through::<T>(&params);
        let window = window_through::<T>(&random_window(&mut rng, encoder.window_length(), width));
        let upstream = through::<T>(&uniform(&mut rng, encoder.context_width(), 1.0));

        let params_t: Vec<T> = cast_slice(&params);
        let (grads, window_grad) = encoder
            .encode_backward(&params_t, &window.cast::<T>(), &cast_slice(&upstream))
            .unwrap();
        let e_params = compare(&grads, &params, |p| dot(&upstream, &encoder.encode(p, &window).unwrap()), &mut rng);
        let e_window = compare(
            &window_grad,
            window.as_flat(),
            |rows| {
                let w = HistoryWindow::full(rows.to_vec(), width).unwrap();
                dot(&upstream, &encoder.encode(&params, &w).unwrap())
            },
            &mut rng,
        );
        report.record(&[e_params, e_window]);
    }
    report
}

/// A small random agent (in both precisions, identical parameters) and a
/// random batch for it. Every tenth instance uses the desk-scale widths.
pub struct LossInstance<T> {
    pub bundle: Td3Bundle<T>,
    pub bundle64: Td3Bundle<f64>,
    pub batch: Batch<T>,
    pub batch64: Batch<f64>,
    pub targets64: Vec<f64>,
}

pub fn desk_encoder() -> EncoderConfig {
    EncoderConfig {
        variant: EncoderVariant::Parallel,
        window_length: 5,
        embed_width: 16,
        combiner_hidden_widths: vec![64],
        context_width: 32,
    }
}

pub fn loss_instance<T: Scalar>(index: usize, rng: &mut ChaCha8Rng) -> LossInstance<T> {
    let variants = [EncoderVariant::Parallel, EncoderVariant::Recurrent, EncoderVariant::None];
    let (encoder, width, hidden) = if index % 10 == 0 {
        (desk_encoder(), 3, vec![64, 64])
    } else {
        let variant = variants[index % 3];
        let hidden: Vec<usize> = (0..rng.random_range(1..=2)).map(|_| rng.random_range(1..=8)).collect();
        (random_encoder_config(variant, rng), rng.random_range(1..=4), hidden)
    };
    let action_width = rng.random_range(1..=3);
    let limit = rng.random_range(0.5..2.5);
    let config = Td3Config {
        actor_hidden: hidden.clone(),
        critic_hidden: hidden,
        ..Td3Config::default()
    };
    let bounds = ActionBounds::symmetric(limit, action_width);
    let seed: u64 = rng.random();
    let mut bundle64 = Td3Bundle::<f64>::new(width, encoder, config, bounds, seed).unwrap();
    for params in [&mut bundle64.actor, &mut bundle64.critic1] {
        for p in params.iter_mut() {
            *p += rng.random_range(-0.1..0.1);
        }
        *params = through::<T>(params);
    }
    let length = bundle64.window_length();
    let rows = rng.random_range(1..=6);
    let mut batch64 = Batch {
        windows: Vec::new(),
        actions: Vec::new(),
        rewards: Vec::new(),
        next_windows: Vec::new(),
        terminated: Vec::new(),
    };
    for _ in 0..rows {
        batch64.windows.push(window_through::<T>(&random_window(rng, length, width)));
        batch64.next_windows.push(window_through::<T>(&random_window(rng, length, width)));
        batch64.actions.push(through::<T>(&uniform(rng, action_width, limit)));
        batch64.rewards.push(through::<T>(&[rng.random_range(-2.0..2.0)])[0]);
        batch64.terminated.push(rng.random_bool(0.3));
    }
    let targets64 = through::<T>(&uniform(rng, rows, 3.0));

    let mut bundle =
        Td3Bundle::<T>::new(width, bundle64.actor_network().encoder().config().clone(), bundle64.config().clone(), bundle64.action_bounds().clone(), seed)
            .unwrap();
    bundle.actor = cast_slice(&bundle64.actor);
    bundle.critic1 = cast_slice(&bundle64.critic1);
    let batch = Batch {
        windows: batch64.windows.iter().map(|w| w.cast()).collect(),
        actions: batch64.actions.iter().map(|a| cast_slice(a)).collect(),
        rewards: cast_slice(&batch64.rewards),
        next_windows: batch64.next_windows.iter().map(|w| w.cast()).collect(),
        terminated: batch64.terminated.clone(),
    };
    LossInstance { bundle, bundle64, batch, batch64, targets64 }
}

/// Critic mean-squared-error gradient against fixed targets.
pub fn critic_loss_oracle<T: Scalar>(instances: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::new();
    while report.wants(instances) {
        let i = report.instances;
        let inst = loss_instance::<T>(i, &mut rng);
        let (_, grads) = inst
            .bundle
            .critic_loss_and_gradients(&inst.bundle.critic1, &inst.batch, &cast_slice(&inst.targets64))
            .unwrap();
        let err = compare(
            &grads,
            &inst.bundle64.critic1,
            |p| inst.bundle64.critic_loss_and_gradients(p, &inst.batch64, &inst.targets64).unwrap().0,
            &mut rng,
        );
        report.record(&[err]);
    }
    report
}

/// Actor loss `-mean Q1(w, actor(w))` gradient with respect to the actor.
pub fn actor_loss_oracle<T: Scalar>(instances: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::new();
    while report.wants(instances) {
        let i = report.instances;
        let inst = loss_instance::<T>(i, &mut rng);
        let (_, grads) = inst
            .bundle
            .actor_loss_and_gradients(&inst.bundle.actor, &inst.bundle.critic1, &inst.batch.windows)
            .unwrap();
        let err = compare(
            &grads,
            &inst.bundle64.actor,
            |p| {
                inst.bundle64
                    .actor_loss_and_gradients(p, &inst.bundle64.critic1, &inst.batch64.windows)
                    .unwrap()
                    .0
            },
            &mut rng,
        );
        report.record(&[err]);
    }
    report
}

/// Every gradient family at both precisions: (label, report, tolerance).
pub fn all_gradient_oracles(instances: usize) -> Vec<(String, OracleReport, f64)> {
    fn families<T: Scalar>(tag: &str, n: usize, out: &mut Vec<(String, OracleReport, f64)>) {
        let tol = tolerance::<T>();
        out.push((format!("mlp {tag}"), mlp_oracle::<T>(n, 1), tol));
        out.push((format!("parallel encoder {tag}"), encoder_oracle::<T>(EncoderVariant::Parallel, n, 2), tol));
        out.push((format!("recurrent encoder {tag}"), encoder_oracle::<T>(EncoderVariant::Recurrent, n, 3), tol));
        out.push((format!("critic loss {tag}"), critic_loss_oracle::<T>(n, 4), tol));
        out.push((format!("actor loss {tag}"), actor_loss_oracle::<T>(n, 5), tol));
    }
    let mut out = Vec::new();
    families::<f64>("f64", instances, &mut out);
    families::<f32>("f32", instances, &mut out);
    out
}
