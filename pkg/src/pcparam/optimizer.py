"""Staged stochastic minimization of the combined parametrization objective.

One stage is a fixed number of epochs at a fixed distortion bandwidth sigma
and a linearly ramped sharpness alpha. Between stages sigma shrinks by
sqrt(2), the alpha ramp restarts where it ended and doubles its endpoint,
the epoch count halves, and both batch sizes double, all clamped to their
limits. Training stops after the stage that saw the point batch reach the
full cloud. Both networks step with RMSprop plus momentum on the
preconditioned gradient.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import Domain
from .geometry import TriangleMesh, angle_distortion, as_cloud, pairwise_distances
from .losses import LossBreakdown, ObjectiveConfig, total_loss_with_grad
from .neural import (
    NetworkSpec,
    backward,
    default_lambda_spec,
    default_map_spec,
    forward,
    init_params,
    param_count,
)

__all__ = [
    "RmsPropConfig",
    "RmsPropState",
    "rmsprop_step",
    "alpha_schedule",
    "StageConfig",
    "advance_stage",
    "StageRecord",
    "TrainLog",
    "TrainResult",
    "TrainingError",
    "train",
]


@dataclass(frozen=True)
class RmsPropConfig:
    """RMSprop with momentum applied to the preconditioned step."""

    learning_rate: float = 1e-4
    rho: float = 0.99
    momentum: float = 0.9
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if not (np.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must be in [0, 1), got {self.rho}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass
class RmsPropState:
    """Per-parameter running statistics: v is the squared-gradient average,
    m the momentum buffer."""

    v: np.ndarray
    m: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "RmsPropState":
        return cls(v=np.zeros(n), m=np.zeros(n))


def rmsprop_step(
    params: np.ndarray, grad: np.ndarray, state: RmsPropState, cfg: RmsPropConfig
) -> np.ndarray:
    """One update: v <- rho v + (1-rho) g^2; m <- mu m + g / sqrt(v + eps);
    theta <- theta - lr m. Mutates `state`, returns the new parameters."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != params.shape:
        raise ValueError(f"grad shape {grad.shape} != params shape {params.shape}")
    bad = ~np.isfinite(grad)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise FloatingPointError(f"non-finite gradient at parameter index {idx}")
    state.v = cfg.rho * state.v + (1.0 - cfg.rho) * grad * grad
    state.m = cfg.momentum * state.m + grad / np.sqrt(state.v + cfg.eps)
    return params - cfg.learning_rate * state.m


def alpha_schedule(epoch: int, n_epochs: int, alpha_init: float, alpha_final: float) -> float:
    """Sharpness for 1-based `epoch` of `n_epochs`, linear from init to final.

    A single-epoch stage uses alpha_init.
    """
    if not 1 <= epoch <= n_epochs:
        raise ValueError(f"epoch must be in [1, {n_epochs}], got {epoch}")
    if n_epochs == 1:
        return alpha_init
    return alpha_init + (epoch - 1) * (alpha_final - alpha_init) / (n_epochs - 1)


@dataclass(frozen=True)
class StageConfig:
    """Knobs for the first stage; later stages derive via advance_stage."""

    epochs: int = 10000
    batch_points: int = 1024
    batch_domain: int = 1024
    sigma: float = 0.5
    alpha_init: float = 2.0
    alpha_final: float = 20.0
    sigma_min: float = 1e-3
    alpha_max: float = 100.0
    epochs_min: int = 1000

    def __post_init__(self) -> None:
        for name in ("epochs", "batch_points", "batch_domain", "epochs_min"):
            val = getattr(self, name)
            if not (isinstance(val, (int, np.integer)) and val >= 1):
                raise ValueError(f"{name} must be a positive integer, got {val!r}")
        for name in ("sigma", "alpha_init", "alpha_final", "sigma_min", "alpha_max"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val!r}")


def advance_stage(cfg: StageConfig, n_points: int, n_domain: int) -> StageConfig:
    """The next stage's knobs given the cloud size and the domain sample cap."""
    return dataclasses.replace(
        cfg,
        sigma=max(cfg.sigma / math.sqrt(2.0), cfg.sigma_min),
        alpha_init=cfg.alpha_final,
        alpha_final=min(2.0 * cfg.alpha_final, cfg.alpha_max),
        epochs=max(cfg.epochs // 2, cfg.epochs_min),
        batch_points=min(2 * cfg.batch_points, n_points),
        batch_domain=min(2 * cfg.batch_domain, n_domain),
    )


@dataclass
class StageRecord:
    """What one stage did and where it ended.

    Loss fields are the last minibatch's breakdown; eval fields are computed
    on the full cloud against a fixed held-out domain sample at stage end.
    eval_mean_abs_angle needs an evaluation mesh and eval_landmark_hausdorff
    needs landmarks, otherwise they stay None.
    """

    stage: int
    sigma: float
    alpha_init: float
    alpha_final: float
    epochs: int
    batch_points: int
    batch_domain: int
    loss_total: float
    loss_leg: float
    loss_hand: float
    loss_landmark: float
    eval_hausdorff: float
    eval_mean_abs_angle: float | None
    eval_landmark_hausdorff: float | None


_CSV_FIELDS = [f.name for f in dataclasses.fields(StageRecord)]


@dataclass
class TrainLog:
    records: list[StageRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        """Deterministic CSV, one row per stage, repr-formatted floats."""
        buf = io.StringIO()
        buf.write(",".join(_CSV_FIELDS) + "\n")
        for rec in self.records:
            cells = []
            for name in _CSV_FIELDS:
                val = getattr(rec, name)
                cells.append("" if val is None else repr(val))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


@dataclass
class TrainResult:
    """Trained parameters plus the per-stage log."""

    map_spec: NetworkSpec
    map_params: np.ndarray
    lambda_spec: NetworkSpec | None
    lambda_params: np.ndarray | None
    log: TrainLog
    final_stage: StageConfig


class TrainingError(RuntimeError):
    """Raised when a loss or gradient goes non-finite, naming the batch."""


def _chunked_hausdorff(a: np.ndarray, b: np.ndarray, chunk: int = 1024) -> float:
    """Exact Hausdorff max(sup-inf, sup-inf) without the full (n, m) matrix."""
    worst_ab = 0.0
    col_min = np.full(len(b), np.inf)
    for lo in range(0, len(a), chunk):
        d = pairwise_distances(a[lo : lo + chunk], b)
        worst_ab = max(worst_ab, float(d.min(axis=1).max()))
        np.minimum(col_min, d.min(axis=0), out=col_min)
    return max(worst_ab, float(col_min.max()))


def _flatten_landmarks(landmarks, n_points: int) -> tuple[list[np.ndarray], np.ndarray]:
    groups = []
    for k, rows in enumerate(landmarks):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        if rows.size == 0:
            raise ValueError(f"landmark group {k} is empty")
        if rows.min() < 0 or rows.max() >= n_points:
            raise ValueError(f"landmark group {k} has an index outside [0, {n_points})")
        groups.append(rows)
    seen: set[int] = set()
    flat: list[int] = []
    for rows in groups:
        for i in rows.tolist():
            if i not in seen:
                seen.add(i)
                flat.append(i)
    return groups, np.array(flat, dtype=np.int64)


def train(
    points,
    domain: Domain,
    objective: ObjectiveConfig | None = None,
    stage: StageConfig | None = None,
    optimizer: RmsPropConfig | None = None,
    map_spec: NetworkSpec | None = None,
    lambda_spec: NetworkSpec | None = None,
    landmarks=None,
    targets=None,
    seed: int = 0,
    domain_size: int = 4096,
    fixed_domain_pool: bool = False,
    eval_mesh: TriangleMesh | None = None,
    eval_sample_size: int = 4096,
    batch_callback=None,
    stage_callback=None,
) -> TrainResult:
    """Fit the parametrization map (and inverse-factor net) to a cloud.

    Every epoch permutes the cloud and walks it in batches of batch_points
    (the last batch is whatever remains); landmark points not already in a
    batch are appended to it, and the domain surrogate term only sees the
    non-landmark rows. The domain comparison set is resampled fresh per batch
    (capped at domain_size points per stage) unless fixed_domain_pool is set,
    in which case batches subsample one pool of domain_size points drawn up
    front. Stages follow advance_stage until the point batch covers the whole
    cloud; that final full-batch stage still runs.

    With objective.beta1 == 0 no inverse-factor net is created and the
    distortion term is skipped (shape matching only). Otherwise lambda_spec
    defaults to a small softplus-headed net over the input dimension.

    Fully deterministic for fixed inputs and seed. batch_callback, if given,
    is called as batch_callback(stage, epoch, batch_index, breakdown) after
    every step; stage_callback as stage_callback(stage, record, map_params,
    lambda_params) with parameter snapshots at each stage end.
    """
    x = as_cloud(points)
    n_points = len(x)
    objective = ObjectiveConfig() if objective is None else objective
    stage_cfg = StageConfig() if stage is None else stage
    opt_cfg = RmsPropConfig() if optimizer is None else optimizer
    if map_spec is None:
        map_spec = default_map_spec(x.shape[1])
    if map_spec.input_dim != x.shape[1] or map_spec.output_dim != 2:
        raise ValueError(
            f"map network must be {x.shape[1]} -> 2, got "
            f"{map_spec.input_dim} -> {map_spec.output_dim}"
        )
    use_lambda = objective.beta1 > 0
    if use_lambda:
        if lambda_spec is None:
            lambda_spec = default_lambda_spec(x.shape[1])
        if lambda_spec.input_dim != x.shape[1] or lambda_spec.output_dim != 1:
            raise ValueError(
                f"inverse-factor network must be {x.shape[1]} -> 1, got "
                f"{lambda_spec.input_dim} -> {lambda_spec.output_dim}"
            )
        if lambda_spec.output_activation != "softplus":
            raise ValueError("inverse-factor network needs a softplus output")
    else:
        lambda_spec = None

    landmarks = [] if landmarks is None else list(landmarks)
    targets = [] if targets is None else [as_cloud(t, dim=2) for t in targets]
    if len(landmarks) != len(targets):
        raise ValueError(f"{len(landmarks)} landmark groups vs {len(targets)} targets")
    groups, flat_landmarks = _flatten_landmarks(landmarks, n_points)

    if domain_size < stage_cfg.batch_domain:
        raise ValueError(
            f"domain_size {domain_size} is smaller than batch_domain {stage_cfg.batch_domain}"
        )
    if eval_mesh is not None and not np.array_equal(eval_mesh.vertices, x):
        raise ValueError("eval_mesh vertices must be exactly the training cloud")

    root = np.random.SeedSequence(seed)
    ss_map, ss_lambda, ss_eval, ss_pool = root.spawn(4)
    map_params = init_params(map_spec, np.random.default_rng(ss_map))
    map_state = RmsPropState.zeros(param_count(map_spec))
    if use_lambda:
        lambda_params = init_params(lambda_spec, np.random.default_rng(ss_lambda))
        lambda_state = RmsPropState.zeros(param_count(lambda_spec))
    else:
        lambda_params = None
        lambda_state = None

    eval_rng = np.random.default_rng(ss_eval)
    w_eval = domain.sample_area(eval_sample_size, eval_rng)
    pool = None
    if fixed_domain_pool:
        pool = domain.sample_area(domain_size, np.random.default_rng(ss_pool))

    stage_cfg = dataclasses.replace(
        stage_cfg,
        batch_points=min(stage_cfg.batch_points, n_points),
        batch_domain=min(stage_cfg.batch_domain, domain_size),
    )

    log = TrainLog()
    keep_going = True
    stage_idx = 0
    while keep_going:
        stage_idx += 1
        if stage_cfg.batch_points == n_points:
            keep_going = False
        stage_rng = np.random.default_rng(root.spawn(1)[0])
        cfg_sigma = dataclasses.replace(
            objective, leg=dataclasses.replace(objective.leg, sigma=stage_cfg.sigma)
        )
        last_breakdown: LossBreakdown | None = None

        for epoch in range(1, stage_cfg.epochs + 1):
            alpha = alpha_schedule(
                epoch, stage_cfg.epochs, stage_cfg.alpha_init, stage_cfg.alpha_final
            )
            cfg_e = dataclasses.replace(
                cfg_sigma, hand=dataclasses.replace(cfg_sigma.hand, alpha=alpha)
            )
            perm = stage_rng.permutation(n_points)
            n_batches = -(-n_points // stage_cfg.batch_points)
            for bi in range(n_batches):
                chunk = perm[bi * stage_cfg.batch_points : (bi + 1) * stage_cfg.batch_points]
                if flat_landmarks.size:
                    in_chunk = set(chunk.tolist())
                    extra = np.array(
                        [i for i in flat_landmarks.tolist() if i not in in_chunk],
                        dtype=np.int64,
                    )
                    rows = np.concatenate([chunk, extra]) if extra.size else chunk
                else:
                    rows = chunk
                x_batch = x[rows]
                pos = {int(r): p for p, r in enumerate(rows)}
                landmark_rows = [
                    np.array([pos[int(i)] for i in g], dtype=np.int64) for g in groups
                ]

                if pool is not None:
                    sel = stage_rng.choice(domain_size, stage_cfg.batch_domain, replace=False)
                    w = pool[np.sort(sel)]
                else:
                    w = domain.sample_area(stage_cfg.batch_domain, stage_rng)

                mapped = forward(map_spec, map_params, x_batch)
                # coordinates past ~1e150 overflow every squared distance
                # downstream, which would surface as a cryptic validation
                # error deep inside the loss; report the divergence here
                worst = float(np.abs(mapped).max())
                if not (worst < 1e150):
                    raise TrainingError(
                        f"stage {stage_idx} epoch {epoch} batch {bi}: mapped "
                        f"coordinates diverged (max magnitude {worst:g})"
                    )
                if use_lambda:
                    lam_inv = forward(lambda_spec, lambda_params, x_batch).ravel()
                    if not np.isfinite(lam_inv).all():
                        raise TrainingError(
                            f"stage {stage_idx} epoch {epoch} batch {bi}: "
                            "inverse factors diverged"
                        )
                    # a strongly negative pre-activation underflows softplus
                    # to exact zero; floor at the smallest positive normal so
                    # a coincident pair of such points cannot zero a pair sum
                    np.maximum(lam_inv, np.finfo(np.float64).tiny, out=lam_inv)
                else:
                    lam_inv = None
                breakdown, g_mapped, g_v = total_loss_with_grad(
                    x_batch, mapped, lam_inv, w, landmark_rows, targets,
                    cfg_e, n_base=len(chunk),
                )
                if not np.isfinite(breakdown.total):
                    raise TrainingError(
                        f"stage {stage_idx} epoch {epoch} batch {bi}: "
                        f"loss is {breakdown.total}"
                    )
                try:
                    g_map, _ = backward(map_spec, map_params, x_batch, g_mapped)
                    map_params = rmsprop_step(map_params, g_map, map_state, opt_cfg)
                    if use_lambda:
                        g_lam, _ = backward(
                            lambda_spec, lambda_params, x_batch, g_v[:, None]
                        )
                        lambda_params = rmsprop_step(
                            lambda_params, g_lam, lambda_state, opt_cfg
                        )
                except FloatingPointError as exc:
                    raise TrainingError(
                        f"stage {stage_idx} epoch {epoch} batch {bi}: {exc}"
                    ) from exc
                last_breakdown = breakdown
                if batch_callback is not None:
                    batch_callback(stage_idx, epoch, bi, breakdown)

        mapped_all = forward(map_spec, map_params, x)
        if not np.isfinite(mapped_all).all():
            raise TrainingError(
                f"stage {stage_idx}: mapped coordinates diverged at evaluation"
            )
        eval_h = _chunked_hausdorff(mapped_all, w_eval)
        eval_angle = None
        if eval_mesh is not None:
            eval_angle = float(angle_distortion(eval_mesh, mapped_all).mean_abs)
        eval_lm = None
        if groups:
            eval_lm = max(
                _chunked_hausdorff(mapped_all[g], q) for g, q in zip(groups, targets)
            )
        assert last_breakdown is not None
        record = StageRecord(
            stage=stage_idx,
            sigma=stage_cfg.sigma,
            alpha_init=stage_cfg.alpha_init,
            alpha_final=stage_cfg.alpha_final,
            epochs=stage_cfg.epochs,
            batch_points=stage_cfg.batch_points,
            batch_domain=stage_cfg.batch_domain,
            loss_total=last_breakdown.total,
            loss_leg=last_breakdown.leg,
            loss_hand=last_breakdown.hand,
            loss_landmark=last_breakdown.landmark,
            eval_hausdorff=eval_h,
            eval_mean_abs_angle=eval_angle,
            eval_landmark_hausdorff=eval_lm,
        )
        log.records.append(record)
        if stage_callback is not None:
            stage_callback(
                stage_idx,
                record,
                map_params.copy(),
                None if lambda_params is None else lambda_params.copy(),
            )
        if keep_going:
            stage_cfg = advance_stage(stage_cfg, n_points, domain_size)

    return TrainResult(
        map_spec=map_spec,
        map_params=map_params,
        lambda_spec=lambda_spec,
        lambda_params=lambda_params,
        log=log,
        final_stage=stage_cfg,
    )
