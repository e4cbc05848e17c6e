"""Adversarial training: generator vs. K per-warden discriminators plus
Bob's decoder, trained alternately on the min-max objective with a hard
transmit-power projection.

Conventions: discriminator output 1 means "classified as noise" (H0), 0
means "transmission detected"; the generator therefore minimizes
sum_i lambda_i E[log(1 - D_i(y_i))] + mu * MSE(m, m_hat).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import propagate, propagate_adjoint
from .neuralnet import (
    AdamState,
    DenseNet,
    LayerSpec,
    adam_step,
    bce_loss,
    log_clamped,
    mse_loss,
)
from .numerics import DomainError, RngStream, from_reim, to_reim
from .scenarios import ScenarioPreset

_CLAMP = 1e-7


class ConfigError(ValueError):
    """Raised on inconsistent training configuration."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Transmitter shape: message and latent sizes, slot length, power budget."""

    message_bits: int = 8
    noise_dim: int = 16
    n: int = 32
    power: float = 10.0
    hidden: tuple[int, ...] = (64, 64, 64)
    dropout: float = 0.2

    def __post_init__(self):
        if self.message_bits < 1 or self.noise_dim < 1 or self.n < 1:
            raise DomainError("message_bits, noise_dim and n must be positive")
        if self.power <= 0:
            raise DomainError(f"power budget must be > 0, got {self.power}")


@dataclass
class TrainConfig:
    iterations: int = 2000
    batch: int = 64
    lr: float = 1e-4
    beta1: float = 0.5
    mu: float = 1.0
    loss_mode: str = "standard"  # or "wasserstein"
    clip: float = 0.05
    disc_warmup: int = 100
    snapshot_every: int = 100
    snapshot_trials: int = 512
    train_snr_db: float = 20.0
    target_pf: float = 0.1
    epsilon: float = 0.1

    def __post_init__(self):
        if self.iterations < 1 or self.batch < 1:
            raise ConfigError("iterations and batch must be >= 1")
        if self.loss_mode not in ("standard", "wasserstein"):
            raise ConfigError(f"unknown loss mode {self.loss_mode!r}")
        if self.loss_mode == "wasserstein" and self.clip <= 0:
            raise ConfigError("wasserstein mode needs a positive clip bound")


@dataclass
class TrainLog:
    """Per-iteration loss traces plus periodic metric snapshots."""

    seed: int
    iterations: list[int] = field(default_factory=list)
    gen_loss: list[float] = field(default_factory=list)
    covert_loss: list[float] = field(default_factory=list)
    decode_mse: list[float] = field(default_factory=list)
    disc_loss: list[list[float]] = field(default_factory=list)
    covert_metric: list[float] = field(default_factory=list)
    snapshots: list[dict] = field(default_factory=list)

    def rows(self):
        """Line-record view (one dict per iteration) for jsonl streaming."""
        for j, it in enumerate(self.iterations):
            yield {
                "iteration": it,
                "gen_loss": self.gen_loss[j],
                "covert_loss": self.covert_loss[j],
                "decode_mse": self.decode_mse[j],
                "disc_loss": self.disc_loss[j],
                "covert_metric": self.covert_metric[j],
            }


@dataclass
class System:
    """Trained (or in-training) nets plus the scenario they were built for."""

    generator: DenseNet
    decoder: DenseNet
    discriminators: list[DenseNet]
    gen_spec: GeneratorSpec
    scenario: ScenarioPreset
    lambdas: np.ndarray
    bob_sigma2: float
    loss_mode: str = "standard"


def snr_db_to_bob_sigma2(power: float, snr_db: float) -> float:
    """SNR at Bob is defined as P / sigma_B^2."""
    return power / (10.0 ** (snr_db / 10.0))


def decoder_input(y_b: np.ndarray, bob_taps: np.ndarray) -> np.ndarray:
    """Decoder features: matched-filtered received slot plus the CSI taps.

    Bob has perfect CSI, so the channel-matched filter (correlate with the
    conjugate taps) is applied before the learned decoder; it is linear in
    y_b and removes the arbitrary channel phase the MLP would otherwise
    have to learn to invert.
    """
    return np.concatenate([to_reim(propagate_adjoint(y_b, bob_taps)),
                           to_reim(bob_taps)], axis=1)


def decoder_input_backward(grad_feat: np.ndarray, bob_taps: np.ndarray) -> np.ndarray:
    """Push a gradient w.r.t. the matched-filter output back to y_b."""
    return propagate(grad_feat, bob_taps)


def build_system(gen_spec: GeneratorSpec, scenario: ScenarioPreset, rng: RngStream,
                 bob_sigma2: float | None = None, loss_mode: str = "standard",
                 disc_hidden: tuple[int, ...] = (64, 64, 64),
                 dec_hidden: tuple[int, ...] = (64, 64, 64),
                 train_snr_db: float = 20.0) -> System:
    """Construct generator, decoder and one discriminator per warden."""
    if bob_sigma2 is None:
        bob_sigma2 = snr_db_to_bob_sigma2(gen_spec.power, train_snr_db)
    n2 = 2 * gen_spec.n
    gen_layers = []
    dims = [gen_spec.message_bits + gen_spec.noise_dim, *gen_spec.hidden]
    for a, b in zip(dims, dims[1:]):
        gen_layers.append(LayerSpec(a, b, "relu", gen_spec.dropout))
    gen_layers.append(LayerSpec(dims[-1], n2, "linear"))
    generator = DenseNet(gen_layers, rng.child(1))

    disc_out = "linear" if loss_mode == "wasserstein" else "sigmoid"
    discs = []
    for i in range(scenario.k):
        layers = []
        ddims = [n2, *disc_hidden]
        for a, b in zip(ddims, ddims[1:]):
            layers.append(LayerSpec(a, b, "leaky-relu"))
        layers.append(LayerSpec(ddims[-1], 1, disc_out))
        discs.append(DenseNet(layers, rng.child(10 + i)))

    # decoder sees y_B plus Bob's (perfect-CSI) tap gains as re/im pairs
    dec_layers = []
    cdims = [n2 + 2 * scenario.n_taps, *dec_hidden]
    for a, b in zip(cdims, cdims[1:]):
        dec_layers.append(LayerSpec(a, b, "relu"))
    dec_layers.append(LayerSpec(cdims[-1], gen_spec.message_bits, "tanh"))
    decoder = DenseNet(dec_layers, rng.child(2))

    lambdas = np.full(scenario.k, 1.0 / scenario.k)
    return System(generator, decoder, discs, gen_spec, scenario, lambdas,
                  bob_sigma2, loss_mode)


# ---------------------------------------------------------------------------
# signal generation with power projection
# ---------------------------------------------------------------------------

def project_power(s: np.ndarray, power: float):
    """Scale each row onto the energy-P ball; feasible rows pass untouched."""
    e = np.sum(np.abs(s) ** 2, axis=-1)
    scale = np.where(e > power, np.sqrt(power / np.maximum(e, 1e-300)), 1.0)
    return s * scale[..., None], scale


def project_power_backward(grad: np.ndarray, s_raw: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Adjoint of the power projection at s_raw (real-linear in re/im pairs)."""
    clipped = scale < 1.0
    if not np.any(clipped):
        return grad
    norm = np.sqrt(np.sum(np.abs(s_raw) ** 2, axis=-1))
    u = s_raw / np.maximum(norm, 1e-300)[..., None]
    dot = np.real(np.sum(np.conj(u) * grad, axis=-1))
    radial = scale[..., None] * (grad - u * dot[..., None])
    return np.where(clipped[..., None], radial, grad)


def generate_signal(system: System, m: np.ndarray, z: np.ndarray,
                    train: bool = False, rng: np.random.Generator | None = None):
    """Map (message, latent) batches to power-feasible complex slot signals.

    Returns (s, aux); aux carries what the backward pass needs and is
    None in eval mode.
    """
    m = np.atleast_2d(m)
    z = np.atleast_2d(z)
    if m.shape[1] != system.gen_spec.message_bits or z.shape[1] != system.gen_spec.noise_dim:
        raise DomainError("message/latent width does not match the generator spec")
    out, cache = system.generator.forward(np.concatenate([m, z], axis=1),
                                          train=train, rng=rng)
    s_raw = from_reim(out)
    s, scale = project_power(s_raw, system.gen_spec.power)
    aux = (cache, s_raw, scale) if train else None
    return s, aux


def signal_gradient_to_generator(system: System, grad_s: np.ndarray, aux):
    """Push a gradient w.r.t. the emitted signal back to generator parameters."""
    cache, s_raw, scale = aux
    grad_raw = project_power_backward(grad_s, s_raw, scale)
    return system.generator.backward(cache, to_reim(grad_raw))[0]


# ---------------------------------------------------------------------------
# channel sampling for training batches
# ---------------------------------------------------------------------------

def _doppler_phase(scenario: ScenarioPreset, n: int, slots: np.ndarray) -> np.ndarray:
    t = slots * n * scenario.symbol_duration
    return np.exp(2j * np.pi * scenario.doppler_hz * t)


def sample_warden_taps(scenario: ScenarioPreset, batch: int, gen: np.random.Generator,
                       slots: np.ndarray | None = None, n: int = 0) -> np.ndarray:
    """Draw (K, batch, L) warden tap gains, optionally cross-warden correlated."""
    corr = scenario.warden_config(0).correlation()
    factor = np.linalg.cholesky(corr.entries)

    def draw():
        w = gen.standard_normal((batch, scenario.n_taps)) \
            + 1j * gen.standard_normal((batch, scenario.n_taps))
        return (w / np.sqrt(2.0)) @ factor.T

    if scenario.correlated_wardens:
        shared = draw()
        mix = scenario.warden_mix
        taps = np.stack([np.sqrt(mix) * shared + np.sqrt(1.0 - mix) * draw()
                         for _ in range(scenario.k)])
    else:
        taps = np.stack([draw() for _ in range(scenario.k)])
    if slots is not None:
        taps = taps * _doppler_phase(scenario, n, slots)[None, :, None]
    return taps


def sample_bob_taps(scenario: ScenarioPreset, batch: int, gen: np.random.Generator,
                    slots: np.ndarray | None = None, n: int = 0) -> np.ndarray:
    corr = scenario.warden_config(0).correlation()
    factor = np.linalg.cholesky(corr.entries)
    w = gen.standard_normal((batch, scenario.n_taps)) \
        + 1j * gen.standard_normal((batch, scenario.n_taps))
    taps = (w / np.sqrt(2.0)) @ factor.T
    if slots is not None:
        taps = taps * _doppler_phase(scenario, n, slots)[:, None]
    return taps


def _cgn(gen: np.random.Generator, shape, variance: float) -> np.ndarray:
    return np.sqrt(variance / 2.0) * (gen.standard_normal(shape)
                                      + 1j * gen.standard_normal(shape))


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def discriminator_loss(disc: DenseNet, noise_batch: np.ndarray,
                       signal_batch: np.ndarray) -> float:
    """Value the discriminator ascends: E[log D(n)] + E[log(1 - D(y1))].

    Batches are complex slot signals; maximal value 0 for a perfect
    (post-clamp) discriminator, 2 log 0.5 for an uninformative one.
    """
    d0, _ = disc.forward(to_reim(noise_batch))
    d1, _ = disc.forward(to_reim(signal_batch))
    return float(np.mean(log_clamped(d0)) + np.mean(np.log(np.clip(1.0 - d1, _CLAMP, 1.0))))


def generator_loss(system: System, m, z, warden_taps, warden_noise,
                   bob_taps, bob_noise, mu: float = 1.0,
                   rng: np.random.Generator | None = None):
    """Composite generator objective with full-chain gradients.

    All randomness (latents, taps, noises, dropout rng) is supplied by the
    caller so the gradient is checkable against finite differences.
    Returns (loss, covert_term, decode_mse, gen_grads, dec_grads, d1_means).
    """
    s, aux = generate_signal(system, m, z, train=True, rng=rng)
    batch = s.shape[0]
    grad_s = np.zeros_like(s)
    covert = 0.0
    d1_means = []
    for i, disc in enumerate(system.discriminators):
        y1 = propagate(s, warden_taps[i]) + warden_noise[i]
        d1, dcache = disc.forward(to_reim(y1), train=True, rng=rng)
        p = d1[:, 0]
        d1_means.append(float(np.mean(p)))
        lam = system.lambdas[i]
        if system.loss_mode == "wasserstein":
            covert += lam * float(-np.mean(p))
            gp = np.full_like(d1, -lam / batch)
        else:
            pc = np.clip(p, _CLAMP, 1.0 - _CLAMP)
            covert += lam * float(np.mean(np.log(1.0 - pc)))
            gp = np.where((p > _CLAMP) & (p < 1.0 - _CLAMP),
                          -lam / (1.0 - pc) / batch, 0.0)[:, None]
        _, gin = disc.backward(dcache, gp)
        grad_s += propagate_adjoint(from_reim(gin), warden_taps[i])

    y_b = propagate(s, bob_taps) + bob_noise
    m_hat, dec_cache = system.decoder.forward(decoder_input(y_b, bob_taps),
                                              train=True, rng=rng)
    mse, gpred = mse_loss(m_hat, m)
    dec_grads, gin = system.decoder.backward(dec_cache, mu * gpred)
    n2 = 2 * system.gen_spec.n
    grad_y_b = decoder_input_backward(from_reim(gin[:, :n2]), bob_taps)
    grad_s += propagate_adjoint(grad_y_b, bob_taps)

    gen_grads = signal_gradient_to_generator(system, grad_s, aux)
    loss = covert + mu * mse
    return loss, covert, mse, gen_grads, dec_grads, d1_means


def wasserstein_losses(system: System, noise_batch: np.ndarray,
                       signal_batches: list[np.ndarray]):
    """Critic and generator objective values in wasserstein mode.

    Returns (critic_objectives per warden, generator_objective).
    """
    if system.loss_mode != "wasserstein":
        raise ConfigError("wasserstein_losses requires a wasserstein-mode system")
    critic_objs = []
    gen_obj = 0.0
    for disc, y1 in zip(system.discriminators, signal_batches):
        c0, _ = disc.forward(to_reim(noise_batch))
        c1, _ = disc.forward(to_reim(y1))
        critic_objs.append(float(np.mean(c0) - np.mean(c1)))
        gen_obj += float(np.mean(c1))
    return critic_objs, gen_obj


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def _disc_update(disc: DenseNet, adam: AdamState, y0: np.ndarray, y1: np.ndarray,
                 loss_mode: str, clip: float,
                 rng: np.random.Generator) -> float:
    """One ascent step on the warden objective; returns the logged value."""
    x = np.concatenate([to_reim(y0), to_reim(y1)], axis=0)
    out, cache = disc.forward(x, train=True, rng=rng)
    b0 = y0.shape[0]
    if loss_mode == "wasserstein":
        # maximize mean c(noise) - mean c(signal)
        gout = np.zeros_like(out)
        gout[:b0] = -1.0 / b0
        gout[b0:] = 1.0 / y1.shape[0]
        grads, _ = disc.backward(cache, gout)
        adam_step(adam, disc, grads)
        disc.clip_weights(clip)
        return float(np.mean(out[:b0]) - np.mean(out[b0:]))
    labels = np.concatenate([np.ones((b0, 1)), np.zeros((y1.shape[0], 1))])
    _, gout = bce_loss(out, labels)
    grads, _ = disc.backward(cache, gout)
    adam_step(adam, disc, grads)
    p0 = np.clip(out[:b0], _CLAMP, 1 - _CLAMP)
    p1 = np.clip(out[b0:], _CLAMP, 1 - _CLAMP)
    return float(np.mean(np.log(p0)) + np.mean(np.log(1 - p1)))


def snapshot_metrics(system: System, rng: RngStream, trials: int = 512,
                     calib: int = 2000, target_pf: float = 0.1,
                     epsilon: float = 0.1) -> dict:
    """Quick eval-mode metrics: learned-warden pd/CSR, genie pd, BER.

    Learned-warden decisions come from per-discriminator thresholds
    calibrated on fresh H0 samples at the target false-alarm rate; CSR is
    the fraction of H1 cases no warden flags.
    """
    gen = rng.generator()
    spec = system.gen_spec
    scen = system.scenario
    m = np.sign(gen.standard_normal((trials, spec.message_bits)) + 1e-12)
    z = gen.standard_normal((trials, spec.noise_dim))
    s, _ = generate_signal(system, m, z)
    taps = sample_warden_taps(scen, trials, gen)
    detected = np.zeros((scen.k, trials), dtype=bool)
    pd_learned = []
    pf_learned = []
    pd_lrt = []
    from .detection import pd_at_target_pf  # local import avoids a cycle
    for i, disc in enumerate(system.discriminators):
        sigma2 = scen.warden_sigma2[i]
        x1 = propagate(s, taps[i])
        y1 = x1 + _cgn(gen, s.shape, sigma2)
        y0 = _cgn(gen, (calib, spec.n), sigma2)
        out1 = disc.forward(to_reim(y1))[0][:, 0]
        out0 = disc.forward(to_reim(y0))[0][:, 0]
        thr = np.quantile(out0, target_pf)
        detected[i] = out1 < thr
        pd_learned.append(float(np.mean(detected[i])))
        pf_learned.append(float(np.mean(out0 < thr)))
        ex = np.sum(np.abs(x1) ** 2, axis=1)
        pd_lrt.append(float(np.mean(pd_at_target_pf(ex, sigma2, target_pf))))
    csr = float(np.mean(~np.any(detected, axis=0)))

    bob_taps = sample_bob_taps(scen, trials, gen)
    y_b = propagate(s, bob_taps) + _cgn(gen, s.shape, system.bob_sigma2)
    m_hat = system.decoder.forward(decoder_input(y_b, bob_taps))[0]
    ber = float(np.mean(np.sign(m_hat + 1e-12) != m))
    return {
        "csr": csr,
        "ber": ber,
        "pd_learned": pd_learned,
        "pf_learned": pf_learned,
        "pd_lrt": pd_lrt,
        "mean_pd_learned": float(np.mean(pd_learned)),
        "mean_pd_lrt": float(np.mean(pd_lrt)),
        "mean_signal_energy": float(np.mean(np.sum(np.abs(s) ** 2, axis=1))),
        "trials": trials,
    }


def train(cfg: TrainConfig, scenario: ScenarioPreset, rng: RngStream,
          gen_spec: GeneratorSpec | None = None,
          system: System | None = None) -> tuple[System, TrainLog]:
    """Run the alternating adversarial training loop.

    Per iteration: sample latents, per-warden channels and noises, take
    one ascent step per discriminator on fresh H0/H1 batches, then one
    descent step on the generator's composite loss (decoder updated on
    the same pass). Fully deterministic given (cfg, scenario, rng).
    """
    if gen_spec is None:
        gen_spec = GeneratorSpec()
    if system is None:
        system = build_system(gen_spec, scenario, rng.child(0),
                              loss_mode=cfg.loss_mode,
                              train_snr_db=cfg.train_snr_db)
    elif system.loss_mode != cfg.loss_mode:
        raise ConfigError("system loss mode does not match the training config")
    gen = rng.child(100).generator()
    log = TrainLog(seed=rng.seed)

    adam_g = AdamState(system.generator.param_count(), lr=cfg.lr, beta1=cfg.beta1)
    adam_dec = AdamState(system.decoder.param_count(), lr=cfg.lr, beta1=cfg.beta1)
    adam_d = [AdamState(d.param_count(), lr=cfg.lr, beta1=cfg.beta1)
              for d in system.discriminators]

    spec = system.gen_spec
    k = scenario.k
    slot = 0

    def sample_round(batch):
        nonlocal slot
        m = np.sign(gen.standard_normal((batch, spec.message_bits)) + 1e-12)
        z = gen.standard_normal((batch, spec.noise_dim))
        slots = np.arange(slot, slot + batch, dtype=float)
        slot += batch
        w_taps = sample_warden_taps(scenario, batch, gen, slots, spec.n)
        w_noise = np.stack([_cgn(gen, (batch, spec.n), scenario.warden_sigma2[i])
                            for i in range(k)])
        w_noise0 = np.stack([_cgn(gen, (batch, spec.n), scenario.warden_sigma2[i])
                             for i in range(k)])
        b_taps = sample_bob_taps(scenario, batch, gen, slots, spec.n)
        b_noise = _cgn(gen, (batch, spec.n), system.bob_sigma2)
        return m, z, w_taps, w_noise, w_noise0, b_taps, b_noise

    # discriminator warm-up so the first CSR snapshot reflects trained wardens
    for _ in range(cfg.disc_warmup):
        m, z, w_taps, w_noise, w_noise0, _, _ = sample_round(cfg.batch)
        s, _ = generate_signal(system, m, z)
        for i, disc in enumerate(system.discriminators):
            y1 = propagate(s, w_taps[i]) + w_noise[i]
            _disc_update(disc, adam_d[i], w_noise0[i], y1, cfg.loss_mode, cfg.clip, gen)

    snap_rng = rng.child(200)
    if cfg.snapshot_every:
        snap = snapshot_metrics(system, snap_rng.child(0), trials=cfg.snapshot_trials,
                                target_pf=cfg.target_pf, epsilon=cfg.epsilon)
        snap["iteration"] = 0
        log.snapshots.append(snap)

    for it in range(1, cfg.iterations + 1):
        m, z, w_taps, w_noise, w_noise0, b_taps, b_noise = sample_round(cfg.batch)

        s, _ = generate_signal(system, m, z)
        d_losses = []
        for i, disc in enumerate(system.discriminators):
            y1 = propagate(s, w_taps[i]) + w_noise[i]
            d_losses.append(_disc_update(disc, adam_d[i], w_noise0[i], y1,
                                         cfg.loss_mode, cfg.clip, gen))

        loss, covert, mse, g_grads, dec_grads, d1_means = generator_loss(
            system, m, z, w_taps, w_noise, b_taps, b_noise, mu=cfg.mu, rng=gen)
        if not np.isfinite(loss):
            raise RuntimeError(
                f"non-finite generator loss at iteration {it}: "
                f"covert={covert} mse={mse} disc={d_losses}")
        adam_step(adam_g, system.generator, g_grads)
        adam_step(adam_dec, system.decoder, dec_grads)

        log.iterations.append(it)
        log.gen_loss.append(loss)
        log.covert_loss.append(covert)
        log.decode_mse.append(mse)
        log.disc_loss.append(d_losses)
        log.covert_metric.append(float(np.mean(d1_means)))

        if cfg.snapshot_every and it % cfg.snapshot_every == 0:
            snap = snapshot_metrics(system, snap_rng.child(it),
                                    trials=cfg.snapshot_trials,
                                    target_pf=cfg.target_pf, epsilon=cfg.epsilon)
            snap["iteration"] = it
            log.snapshots.append(snap)

    return system, log


def adaptive_warden_loop(system: System, rng: RngStream, period: int = 1000,
                         window: int = 500, total: int = 5000,
                         batch: int = 8, retrain_steps: int = 100,
                         lr: float = 1e-3) -> np.ndarray:
    """Freeze the generator against freshly deployed wardens that
    periodically retrain on what they recently observed; returns the
    per-iteration covertness metric (mean warden output on H1 samples).

    The adaptive wardens start uninformed rather than inheriting the
    training-time discriminators: a deployed adversary never saw the
    transmitter being built. Their final layer starts at zero so the
    initial verdict is exactly 1/2 everywhere, and the metric degrades
    from there as they learn. Retraining augments the stored observations
    with random global phase rotations: both hypotheses are circularly
    symmetric (tap phases are uniform, noise is circular), so the
    rotation is distribution preserving and keeps the small replay
    buffer from being memorized.
    """
    gen = rng.generator()
    spec = system.gen_spec
    scen = system.scenario
    wardens = []
    for d in system.discriminators:
        fresh = DenseNet(d.specs, gen)
        fresh.weights[-1][:] = 0.0
        wardens.append(fresh)
    buffers: list[list[np.ndarray]] = [[] for _ in range(scen.k)]
    adams = [AdamState(d.param_count(), lr=lr, beta1=0.5) for d in wardens]
    metric = np.zeros(total)
    for it in range(total):
        m = np.sign(gen.standard_normal((batch, spec.message_bits)) + 1e-12)
        z = gen.standard_normal((batch, spec.noise_dim))
        s, _ = generate_signal(system, m, z)
        taps = sample_warden_taps(scen, batch, gen)
        vals = []
        for i, disc in enumerate(wardens):
            y1 = propagate(s, taps[i]) + _cgn(gen, s.shape, scen.warden_sigma2[i])
            vals.append(float(np.mean(disc.forward(to_reim(y1))[0])))
            buffers[i].append(y1)
        metric[it] = np.mean(vals)
        if (it + 1) % period == 0:
            for i, disc in enumerate(wardens):
                seen = np.concatenate(buffers[i], axis=0)[-window:]
                for _ in range(retrain_steps):
                    pick = gen.integers(0, seen.shape[0], size=min(64, seen.shape[0]))
                    y1 = seen[pick] * np.exp(2j * np.pi * gen.random((pick.size, 1)))
                    y0 = _cgn(gen, y1.shape, scen.warden_sigma2[i])
                    _disc_update(disc, adams[i], y0, y1, system.loss_mode, 0.05, gen)
                buffers[i] = [seen]
    return metric
