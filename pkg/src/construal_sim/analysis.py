"""Efficiency comparison across resource regimes and grid-search model fitting."""

from __future__ import annotations

import csv
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace

from .baselines import ProbePair, maximal_planner, random_construal_planner, reconstructive_response
from .baselines import recall_link, signal_detection_response
from .errors import CapExceeded, ConstrualSimError, DataFileError, DegenerateInput, NoOverlap, Unreachable
from .jit import JitParams, estimate_construal, run_jit_plan
from .metrics import binary_loglik, pearson_r, rmse, total_variation, wasserstein1  # noqa: F401
from .parallel import pmap
from .physics import EngineConfig, NoiseParams, run_rollout
from .planner import PlannerParams
from .rng import derive_seed, stream
from .vgc import VgcParams, construal_weights, vgc_grid
from .worlds import GridWorld

MODEL_ORDER = ("maximal", "vgc", "jit", "random")
DEFAULT_ALPHAS = (0.0, 0.001, 0.01, 0.1, 1.0)
DEFAULT_BETAS = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0)
MEASURES = ("recall", "confidence", "hover", "collision")


@dataclass(frozen=True)
class EfficiencyRecord:
    model: str
    world_id: str
    plan_utility: float
    compute_cost: float
    representation_cost: float

    def __post_init__(self):
        if self.compute_cost < 0 or self.representation_cost < 0:
            raise ValueError("costs must be >= 0")


def algorithmic_utility(record: EfficiencyRecord, alpha: float, beta: float) -> float:
    if alpha < 0 or beta < 0:
        raise ValueError("cost weights must be >= 0")
    return record.plan_utility - alpha * record.compute_cost - beta * record.representation_cost


# -- efficiency sweep ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepSettings:
    planner: PlannerParams = PlannerParams(alpha_d=0.0, alpha_h=1.0)
    jit: JitParams = JitParams(gamma=0.0)
    vgc: VgcParams = VgcParams(luce_alpha=0.1, value_rollouts=50)
    rollouts: int = 20
    inclusion_p: float = 0.5


def _mean(xs):
    return math.fsum(xs) / len(xs)


def _record(model, world_id, samples):
    u, c, r = zip(*samples)
    return EfficiencyRecord(model, world_id, _mean(u), _mean(c), _mean(r))


def efficiency_records(world: GridWorld, world_id: str, seed: int, models=MODEL_ORDER,
                       settings: SweepSettings = SweepSettings()) -> list[EfficiencyRecord]:
    """One averaged record per model for a single world and seed."""
    failure = settings.vgc.failure_for(world)
    n_obj = len(world.objects)
    out = []
    for model in models:
        if model == "vgc":
            res = vgc_grid(world, settings.planner, settings.vgc, derive_seed(seed, "sweep", world_id, "vgc"))
            out.append(EfficiencyRecord("vgc", world_id, res.expected_utility(), float(res.expansions),
                                        res.expected_size()))
            continue
        samples = []
        for k in range(settings.rollouts):
            rng = stream(seed, "sweep", world_id, model, k)
            if model == "maximal":
                try:
                    plan, exp, _ = maximal_planner(world, settings.planner, rng)
                    samples.append((-float(plan.steps), exp, n_obj))
                except (Unreachable, CapExceeded) as exc:
                    samples.append((failure, exc.expansions, n_obj))
            elif model == "jit":
                try:
                    o = run_jit_plan(world, settings.planner, settings.jit, rng)
                    samples.append((-float(o.steps), o.expansions, len(o.trace.present)))
                except ConstrualSimError as exc:
                    samples.append((failure, getattr(exc, "expansions", 0), n_obj))
            elif model == "random":
                steps, exp, c = random_construal_planner(world, settings.planner, settings.inclusion_p, rng)
                samples.append((failure if steps is None else -float(steps), exp, len(c)))
            else:
                raise ValueError(f"unknown model {model!r}")
        out.append(_record(model, world_id, samples))
    return out


@dataclass
class SweepCell:
    alpha: float
    beta: float
    mean_v: dict[str, float]
    winner: str


@dataclass
class SweepResult:
    records: list[EfficiencyRecord]
    cells: list[SweepCell]
    models: tuple[str, ...]

    def winner(self, alpha, beta) -> str:
        for c in self.cells:
            if c.alpha == alpha and c.beta == beta:
                return c.winner
        raise KeyError((alpha, beta))

    def rows(self):
        for c in self.cells:
            for m in self.models:
                yield {"alpha": c.alpha, "beta": c.beta, "model": m,
                       "mean_V": c.mean_v[m], "winner": int(m == c.winner)}

    def mean_cost(self, model: str, attr: str) -> float:
        return _mean([getattr(r, attr) for r in self.records if r.model == model])


def _records_task(world, world_id, seed, models, settings):
    return efficiency_records(world, world_id, seed, models, settings)


def regime_sweep(worlds, models=MODEL_ORDER, alphas=DEFAULT_ALPHAS, betas=DEFAULT_BETAS,
                 seeds=(0,), settings: SweepSettings = SweepSettings()) -> SweepResult:
    """Winning model for every (alpha, beta) cell.

    ``worlds`` is a sequence of ``(world_id, GridWorld)``. Records depend only on
    world, seed, and model, so they are computed once and rescored per cell.
    Ties go to the earlier model in the fixed order maximal, vgc, jit, random.
    """
    worlds = list(worlds)
    if not worlds:
        raise ValueError("regime_sweep needs at least one world")
    models = tuple(m for m in MODEL_ORDER if m in models)
    tasks = [(w, wid, s, models, settings) for wid, w in worlds for s in seeds]
    records = [r for batch in pmap(_records_task, tasks) for r in batch]
    by_model = defaultdict(list)
    for r in records:
        by_model[r.model].append(r)
    cells = []
    for a in alphas:
        for b in betas:
            mean_v = {m: _mean([algorithmic_utility(r, a, b) for r in by_model[m]]) for m in models}
            best = models[0]
            for m in models[1:]:
                if mean_v[m] > mean_v[best]:
                    best = m
            cells.append(SweepCell(a, b, mean_v, best))
    return SweepResult(records, cells, models)


# -- human data ---------------------------------------------------------------------

@dataclass(frozen=True)
class HumanRow:
    world_id: str
    object_id: str
    participant_id: str
    measure: str
    value: float


HUMAN_COLUMNS = ("world_id", "object_id", "participant_id", "measure", "value")


def load_human_data(path) -> list[HumanRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in HUMAN_COLUMNS):
            raise DataFileError(f"{path}: header must contain {', '.join(HUMAN_COLUMNS)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if row["measure"] not in MEASURES:
                raise DataFileError(f"{path}: row {lineno}: unknown measure {row['measure']!r}")
            try:
                value = float(row["value"])
            except (TypeError, ValueError):
                raise DataFileError(f"{path}: row {lineno}: value {row['value']!r} is not a number") from None
            if not math.isfinite(value) or not row["world_id"] or not row["object_id"]:
                raise DataFileError(f"{path}: row {lineno}: incomplete row")
            rows.append(HumanRow(row["world_id"], row["object_id"], row["participant_id"], row["measure"], value))
    return rows


def write_human_data(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HUMAN_COLUMNS)
        for r in rows:
            w.writerow([r.world_id, r.object_id, r.participant_id, r.measure, repr(float(r.value))])


# -- grid-search fitting ------------------------------------------------------------

@dataclass
class FitResult:
    best_params: dict[str, float]
    objective_value: float
    objective: str
    grid: list[tuple[dict[str, float], float | None]] = field(default_factory=list)


def _score(objective, preds, data, keys):
    if objective == "loglik":
        ps = [preds[(r.world_id, r.object_id)] for r in data]
        return binary_loglik(ps, [1 if r.value >= 0.5 else 0 for r in data])
    groups = defaultdict(list)
    for r in data:
        groups[(r.world_id, r.object_id)].append(r.value)
    x = [preds[k] for k in keys]
    y = [_mean(groups[k]) for k in keys]
    if objective == "pearson":
        return pearson_r(x, y)
    return rmse(x, y)


def grid_search_fit(runner, data, grids: dict, objective: str = "pearson", measure: str | None = None) -> FitResult:
    """Exhaustive search over the product of ``grids``.

    ``runner(params)`` maps a parameter dict to ``{(world_id, object_id): prediction}``.
    Pearson and log likelihood are maximized, RMSE minimized; ties go to the
    lexicographically smallest parameter tuple (names in sorted order).
    Grid points where the objective is undefined are skipped.
    """
    if objective not in ("pearson", "rmse", "loglik"):
        raise ValueError(f"unknown objective {objective!r}")
    if not grids or any(len(v) == 0 for v in grids.values()):
        raise ValueError("every parameter grid must be nonempty")
    data = [r for r in data if measure is None or r.measure == measure]
    if len({r.measure for r in data}) > 1:
        raise ValueError("data mixes several measures; pick one")
    names = sorted(grids)
    points = sorted(itertools.product(*(sorted(grids[n]) for n in names)))
    sign = -1.0 if objective == "rmse" else 1.0
    best = None
    examined = []
    for point in points:
        params = dict(zip(names, point))
        preds = runner(params)
        rows = [r for r in data if (r.world_id, r.object_id) in preds]
        keys = sorted({(r.world_id, r.object_id) for r in rows})
        if not keys:
            raise NoOverlap("no (world_id, object_id) in the data matches a model prediction")
        try:
            value = _score(objective, preds, rows, keys)
        except DegenerateInput:
            examined.append((params, None))
            continue
        examined.append((params, value))
        if best is None or sign * value > sign * best[1]:
            best = (params, value)
    if best is None:
        raise DegenerateInput(f"{objective} is undefined at every grid point")
    return FitResult(best[0], best[1], objective, examined)


# -- model runners for fitting --------------------------------------------------------

PLANNER_KEYS = ("alpha_d", "alpha_h")
JIT_KEYS = ("gamma", "spotlight_radius")
NOISE_KEYS = ("sigma_sq", "kappa", "s_sq")


def _split(params, base_planner, base_jit, base_noise):
    planner = replace(base_planner, **{k: params[k] for k in PLANNER_KEYS if k in params})
    jit = replace(base_jit, **{k: params[k] for k in JIT_KEYS if k in params})
    noise = replace(base_noise, **{k: params[k] for k in NOISE_KEYS if k in params})
    return planner, jit, noise


def collision_probabilities(world, noise, config, rollouts, seed) -> dict[str, float]:
    """Fraction of full-world rollouts in which the ball touches each obstacle."""
    counts = dict.fromkeys(world.object_ids, 0)
    for k in range(rollouts):
        t = run_rollout(world, noise, config, stream(seed, "rollout", k, "physics"))
        for oid in t.hit_ids() | {oid for _, oid in t.teleport_events}:
            if oid in counts:
                counts[oid] += 1
    return {oid: c / rollouts for oid, c in counts.items()}


@dataclass
class ModelRunner:
    """Callable mapping a parameter dict to per-object predictions.

    ``model`` is one of jit, vgc, signal, reconstructive. The measure picks the
    link from construal weight to the predicted quantity: recall goes through
    the two-alternative link, collision is the full-world hit probability, and
    anything else is the weight itself.
    """

    model: str
    worlds: dict
    measure: str = "recall"
    rollouts: int = 200
    seed: int = 0
    planner: PlannerParams = PlannerParams()
    jit: JitParams = JitParams()
    noise: NoiseParams = NoiseParams()
    config: EngineConfig = EngineConfig()
    vgc: VgcParams = VgcParams(luce_alpha=20.0)
    probes: list[ProbePair] = field(default_factory=list)

    def __call__(self, params: dict) -> dict:
        planner, jit, noise = _split(params, self.planner, self.jit, self.noise)
        out = {}
        if self.model in ("signal", "reconstructive"):
            return self._probe_predictions(params, planner, jit, noise)
        for wid in sorted(self.worlds):
            world = self.worlds[wid]
            seed = derive_seed(self.seed, "fit", wid)
            if self.measure == "collision":
                if isinstance(world, GridWorld):
                    raise ValueError("collision predictions need Plinko worlds")
                weights = collision_probabilities(world, noise, self.config, self.rollouts, seed)
            elif self.model == "jit":
                weights = estimate_construal(world, jit, planner=planner, noise=noise, config=self.config,
                                             n_rollouts=self.rollouts, seed=seed).weights
            elif self.model == "vgc":
                vgc = replace(self.vgc, value_rollouts=self.rollouts,
                              **({"luce_alpha": params["luce_alpha"]} if "luce_alpha" in params else {}))
                weights = construal_weights(world, vgc, seed, planner=planner, noise=noise,
                                            config=self.config).marginals
            else:
                raise ValueError(f"unknown model {self.model!r}")
            for oid, w in weights.items():
                out[(wid, oid)] = recall_link(w) if self.measure == "recall" else w
        return out

    def _probe_predictions(self, params, planner, jit, noise):
        alpha = params.get("choice_alpha", 1.0)
        out = {}
        cache = {}
        for probe in self.probes:
            world = self.worlds.get(probe.world_id)
            if world is None:
                continue
            seed = derive_seed(self.seed, "fit", probe.world_id)
            if self.model == "signal":
                if probe.world_id not in cache:
                    cache[probe.world_id] = estimate_construal(
                        world, jit, planner=planner, noise=noise, config=self.config,
                        n_rollouts=self.rollouts, seed=seed).mean_steps_present
                n = max(0, int(math.floor(cache[probe.world_id].get(probe.object_id, 0.0) + 0.5)))
                p = signal_detection_response(n, probe, params.get("kappa_sd", 20.0), alpha)
            else:
                p = reconstructive_response(world, probe, noise, self.config, self.rollouts, alpha, seed)
            out[(probe.world_id, probe.object_id)] = p
        return out
