"""Averaging experiments over lifted codes and the density searches built on them.

Two test functions are supported. ``indicator`` is the ball of radius r;
``rogers`` is the radial profile

    f_r(rho) = t/d                   for rho <  r e^((1-t)/d)
             = 1/d - log(rho / r)    for rho <= r e^(1/d)
             = 0                     beyond,

whose integral is V_d r^d e (1 - e^-t) / d. Sums run over primitive vectors
of the lift scaled by beta_p, so every average is compared with
integral(f) / (zeta(d) Vol(O^t)).
"""

from __future__ import annotations

import itertools
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from . import aminima
from .algebra import build_invariant_form
from .catalog import Family, FamilySpec, build
from .codes import Code, CodeParams, code_count, iter_codes, sample_code
from .lattice import (DensityReport, LatticeInstance, ambient_gram, beta_scale, density_from,
                      is_primitive, lift_code, log_density, short_vectors, svp, unit_form)
from .numerics import log_ball_volume, zeta
from .residue import build_reduction, gl_order
from . import _exact

__all__ = [
    "TestFunction", "integral", "lattice_sum", "mc_average", "target_radius",
    "density_search", "effective_conditions", "zeta", "MCEstimate", "SearchResult",
]

WORKERS_ENV = "DIVPACK_WORKERS"
CHECKPOINT_EVERY = 10_000
EXHAUSTIVE_CAP = 1_000_000


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class TestFunction:
    kind: str  # "indicator" or "rogers"
    r: float
    d: int
    t: int = 1

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.kind not in ("indicator", "rogers"):
            raise SearchError(f"unknown test function {self.kind!r}")
        if self.r < 0:
            raise SearchError("radius must be non-negative")

    @property
    def support(self) -> float:
        return self.r if self.kind == "indicator" else self.r * math.exp(1 / self.d)

    def __call__(self, rho: float) -> float:
        if self.kind == "indicator":
            return 1.0 if rho <= self.r else 0.0
        d, t, r = self.d, self.t, self.r
        if rho < r * math.exp((1 - t) / d):
            return t / d
        if rho <= r * math.exp(1 / d):
            return 1 / d - math.log(rho / r)
        return 0.0


def integral(f: TestFunction) -> float:
    if f.r == 0:
        return 0.0
    base = math.exp(log_ball_volume(f.d) + f.d * math.log(f.r))
    if f.kind == "indicator":
        return base
    return base * math.e * (1 - math.exp(-f.t)) / f.d


def ball_radius(volume: float, d: int) -> float:
    """r with V_d r^d = volume."""
    if volume <= 0:
        return 0.0
    return math.exp((math.log(volume) - log_ball_volume(d)) / d)


def target_radius(mode: str, eps: float, g0_order: int, vol: float, d: int, t: int = 1) -> float:
    """Radius solving the volume equation of the indicator or rogers search."""
    if not 0 < eps <= 1:
        raise SearchError("epsilon must lie in (0, 1]")
    rhs = (1 - eps) * g0_order * zeta(d) * vol
    if mode == "indicator":
        return ball_radius(rhs, d)
    if mode == "rogers":
        return ball_radius(rhs * t / (math.e * (1 - math.exp(-t))), d)
    raise SearchError(f"unknown mode {mode!r}")


def lattice_sum(f: TestFunction, inst: LatticeInstance, scale: float) -> float:
    """Sum of f(scale * |v|) over primitive vectors v of the (unscaled) lattice."""
    if f.r == 0:
        return 0.0
    bound = (f.support / scale) ** 2
    total = 0.0
    for coeffs, nrm in short_vectors(inst, bound):
        if is_primitive(coeffs):
            total += 2 * f(scale * math.sqrt(nrm))  # +-v
    return total


def order_power_volume(a, t: int) -> float:
    """Vol(O^t) under q_a, from the exact Gram determinant."""
    det = _exact.bareiss_det(ambient_gram(a, t))
    return math.exp(0.5 * math.log(det))


# --------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int
    target: float
    exhaustive: bool
    values: tuple[float, ...] = ()

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples,
                "target": self.target, "exhaustive": self.exhaustive}


def _context(family: Family | FamilySpec, p: int, a=None):
    fam = build(family) if isinstance(family, FamilySpec) else family
    smap = build_reduction(fam, p)
    a = a or build_invariant_form(fam.group)
    return fam, smap, a


def _mc_chunk(args) -> list[float]:
    spec, p, a, f, beta, rows = args
    smap = build_reduction(build(spec), p)
    return [lattice_sum(f, lift_code(smap, code, a), beta) for code in rows]


def mc_average(family: Family | FamilySpec, k: int, t: int, p: int, f: TestFunction,
               n_samples: int | None, rng: random.Random, a=None, workers: int | None = None) -> MCEstimate:
    """Average of lattice_sum over codes: all of them when n_samples is None, else uniform draws.

    Codes are drawn in this process, so the values do not depend on ``workers``.
    """
    fam, smap, a = _context(family, p, a)
    order = fam.order
    params = CodeParams(order.n, t, k, p)
    if not params.in_search_range:
        raise SearchError(f"k={k} outside the range ((n-1)t, nt)")
    beta = beta_scale(p, order.n, order.m, t, k)
    vol = order_power_volume(a, t)
    target = integral(f) / (zeta(order.dim_total * t) * vol)
    if n_samples is None:
        codes: Iterable[Code] = iter_codes(params)
    else:
        codes = (sample_code(params, rng) for _ in range(n_samples))
    workers = workers or worker_count()
    if workers == 1:
        values = [lattice_sum(f, lift_code(smap, c, a), beta) for c in codes]
    else:
        codes = list(codes)
        step = -(-len(codes) // workers)
        chunks = [(fam.spec, p, a, f, beta, codes[i:i + step]) for i in range(0, len(codes), step)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            values = [v for out in ex.map(_mc_chunk, chunks) for v in out]
    n = len(values)
    if n == 0:
        raise SearchError("no samples")
    mean = math.fsum(values) / n
    if n_samples is None or n < 2:
        stderr = 0.0
    else:
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        stderr = math.sqrt(var / n)
    return MCEstimate(mean, stderr, n, target, n_samples is None, tuple(values))


# --------------------------------------------------------------- density search


@dataclass
class CodeRecord:
    index: int
    lambda1_sq: int
    density: float
    ball_count: int
    hit: bool
    balanced_density: float | None = None
    selected: bool | None = None

    @property
    def key(self) -> float:
        return self.balanced_density if self.balanced_density is not None else self.density

    def to_row(self) -> dict:
        return {"index": self.index, "lambda1_sq": self.lambda1_sq, "density": self.density,
                "ball_count": self.ball_count, "hit": self.hit,
                "balanced_density": self.balanced_density, "selected": self.selected}

    @classmethod
    def from_row(cls, row: dict) -> "CodeRecord":
        return cls(**row)


@dataclass
class SearchResult:
    family: str
    p: int
    t: int
    k: int
    mode: str
    sampling: str
    seed: int | None
    codes_tried: int
    target_radius: float
    target_density: float
    hit: bool
    best: DensityReport | None
    best_code: dict | None
    balanced_best: dict | None = None
    orbit_violations: list = field(default_factory=list)
    records: list = field(default_factory=list)
    best_instance: LatticeInstance | None = None

    def to_json(self) -> dict:
        return {
            "family": self.family, "p": self.p, "t": self.t, "k": self.k, "mode": self.mode,
            "sampling": self.sampling, "seed": self.seed, "codes_tried": self.codes_tried,
            "target_radius": self.target_radius, "target_density": self.target_density,
            "hit": self.hit,
            "best": self.best.to_json() if self.best else None,
            "best_code": self.best_code,
            "balanced_best": self.balanced_best,
            "orbit_violations": self.orbit_violations,
        }


@dataclass(frozen=True)
class _Job:
    spec: FamilySpec
    t: int
    k: int
    p: int
    mode: str
    eps: float
    shard: int
    shards: int
    sampling: str
    budget: int | None
    seed: int | None
    start: int = 0


@dataclass(frozen=True)
class _Setup:
    fam: Family
    smap: object
    a: object
    params: CodeParams
    beta: float
    d: int
    radius: float
    radius_sq_unscaled: float


def _setup(spec: FamilySpec, t: int, k: int, p: int, mode: str, eps: float) -> _Setup:
    fam = build(spec)
    order = fam.order
    params = CodeParams(order.n, t, k, p)
    if not params.in_search_range:
        raise SearchError(f"k={k} outside the range ((n-1)t, nt)")
    if mode == "rogers" and t < 2:
        raise SearchError("rogers mode needs t >= 2")
    smap = build_reduction(fam, p)
    a = build_invariant_form(fam.group)
    beta = beta_scale(p, order.n, order.m, t, k)
    d = order.dim_total * t
    r = target_radius(mode, eps, fam.g0_order, order_power_volume(a, t), d, t)
    # the closed ball of radius r in the scaled lattice, in unscaled norms
    return _Setup(fam, smap, a, params, beta, d, r, (r / beta) ** 2)


def _evaluate(st: _Setup, inst: LatticeInstance, index: int, mode: str) -> tuple[CodeRecord, dict]:
    vecs = short_vectors(inst, st.radius_sq_unscaled)
    count = 2 * sum(1 for c, _ in vecs if is_primitive(c))
    lam = vecs[0][1] if vecs else svp(inst).min_sq
    rep = density_from(inst.dimension, lam, inst.covolume_sq, st.fam.g0_order)
    rec = CodeRecord(index, lam, rep.density, count, count == 0)
    extra: dict = {}
    t = st.params.t
    if mode == "rogers":
        prof = aminima.successive_minima(inst)
        scaled = [st.beta * v for v in prof.minima]
        r = st.radius
        rec.selected = bool(sum(math.log(v / r) for v in scaled) > 0
                            and min(scaled) >= r * math.exp((1 - t) / st.d) * (1 - 1e-12))
        rec.hit = rec.selected
        if rec.selected:
            bal = aminima.balance(inst, prof)
            bm = aminima.balanced_minimum(bal)
            ld = log_density(inst.dimension, Fraction(bm.lambda1_sq), Fraction(bal.covolume ** 2))
            rec.balanced_density = math.exp(ld)
            extra = {"balanced_lambda1_sq": bm.lambda1_sq, "certified": bm.certified,
                     "minima_sq": list(prof.minima_sq),
                     "geometric_mean_sq": aminima.geometric_mean_sq(prof),
                     "density": rec.balanced_density}
    return rec, extra


def _shard_codes(job: _Job, params: CodeParams):
    """(global index, code) pairs handled by one shard, in a fixed order."""
    if job.sampling == "exhaustive":
        it = ((i, c) for i, c in enumerate(iter_codes(params))
              if i % job.shards == job.shard and i >= job.start)
        if job.budget is not None:
            it = itertools.islice(it, job.budget)
        return it
    rng = random.Random(f"{job.seed}:{job.shard}")
    total = job.budget or 0
    per = total // job.shards + (1 if job.shard < total % job.shards else 0)
    return ((i * job.shards + job.shard, sample_code(params, rng)) for i in range(per))


def _run_shard(job: _Job, progress: Callable | None = None) -> list[CodeRecord]:
    st = _setup(job.spec, job.t, job.k, job.p, job.mode, job.eps)
    records = []
    for n, (idx, code) in enumerate(_shard_codes(job, st.params)):
        inst = lift_code(st.smap, code, st.a, st.fam.g0_order)
        rec, _ = _evaluate(st, inst, idx, job.mode)
        records.append(rec)
        if progress and (n + 1) % CHECKPOINT_EVERY == 0:
            progress(records)
    return records


def code_at(job: _Job, params: CodeParams, index: int) -> Code:
    """Regenerate the code evaluated under a global index."""
    if job.sampling == "exhaustive":
        return next(itertools.islice(iter_codes(params), index, None))
    shard = index % job.shards
    sub = _Job(**{**job.__dict__, "shard": shard})
    for idx, code in _shard_codes(sub, params):
        if idx == index:
            return code
    raise SearchError(f"no code with index {index}")


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def density_search(spec: FamilySpec, t: int, k: int, p: int, mode: str = "indicator",
                   sampling: str = "exhaustive", budget: int | None = None, seed: int | None = None,
                   eps: float = 0.01, workers: int | None = None, start: int = 0,
                   prior: Iterable[CodeRecord] = (), progress: Callable | None = None) -> SearchResult:
    """Scan lifted codes for a lattice beating the symmetric target.

    Indicator mode declares a hit when the closed ball of radius r (from the
    volume equation) contains no nonzero scaled lattice vector, so the hit
    density is at least (1 - eps) |G0| zeta(d) / 2^d. Rogers mode (t >= 2)
    selects codes whose A-minima have geometric mean above r and balances them.
    ``start`` and ``prior`` resume an exhaustive scan from a checkpoint.
    """
    if sampling not in ("exhaustive", "sampled"):
        raise SearchError(f"unknown sampling {sampling!r}")
    st = _setup(spec, t, k, p, mode, eps)
    fam = st.fam
    if sampling == "exhaustive" and code_count(st.params) > EXHAUSTIVE_CAP:
        raise SearchError("too many codes for exhaustive mode; use sampled")
    if sampling == "sampled" and budget is None:
        raise SearchError("sampled mode needs a budget")
    workers = workers or worker_count()
    if sampling == "exhaustive" and budget is not None and workers > 1:
        raise SearchError("a budget with exhaustive mode needs a single worker")
    if mode == "indicator":
        target_density = (1 - eps) * fam.g0_order * zeta(st.d) * 2.0 ** -st.d
    else:
        target_density = ((1 - eps) * fam.g0_order * zeta(st.d) * t * 2.0 ** -st.d
                          / (math.e * (1 - math.exp(-t))))
    jobs = [_Job(spec, t, k, p, mode, eps, s, workers, sampling, budget, seed, start)
            for s in range(workers)]
    if budget == 0:
        records: list[CodeRecord] = list(prior)
    elif workers == 1:
        records = list(prior) + _run_shard(jobs[0], progress)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(prior) + [rec for out in ex.map(_run_shard, jobs) for rec in out]
    records.sort(key=lambda rec: rec.index)
    violations = [rec.to_row() for rec in records if rec.ball_count % fam.g0_order != 0]
    hit = any(rec.hit for rec in records)
    result = SearchResult(spec.tag, p, t, k, mode, sampling, seed, len(records), st.radius,
                          target_density, hit, None, None, None, violations, records)
    if not records:
        return result
    # deterministic reduction: largest key, ties to the lowest index
    top = max(records, key=lambda rec: (rec.key, -rec.index))
    code = code_at(jobs[0], st.params, top.index)
    inst = lift_code(st.smap, code, st.a, fam.g0_order, {"index": top.index})
    res = svp(inst)
    result.best = density_from(st.d, res.min_sq, inst.covolume_sq, fam.g0_order, res.kissing,
                               inst.provenance)
    result.best_code = code.to_json()
    result.best_instance = inst
    if mode == "rogers":
        result.balanced_best = _evaluate(st, inst, top.index, mode)[1] or None
    if mode == "indicator" and top.hit:
        # certificate: the exact minimum of the reported lattice clears the radius
        if not res.min_sq * st.beta ** 2 > st.radius ** 2:
            raise SearchError("hit certificate failed: exact minimum does not clear the radius")
    return result


# --------------------------------------------------------------- effective conditions


def effective_conditions(spec: FamilySpec, p: int, eps: float, t: int, c: float = 1.0) -> dict:
    """Finite-p checks for the effective construction.

    ``ratio`` is |M_n(F_p)|^2 / (|M_n(F_p)|^2 - |M_n minus GL_n|^2) against 1 + eps/3;
    ``volume_condition`` compares (n^2 m)^2 Vol(O)^(2/(m n^2)) |G0|^(-1/(m n^2))
    with p^(1/(m n)), a strict inequality standing in for an asymptotic one;
    ``rank_condition`` is p > c t^2.
    """
    fam = build(spec)
    order = fam.order
    n, m = order.n, order.m
    big = p ** (n * n)
    sing = big - gl_order(n, p)
    ratio = Fraction(big * big, big * big - sing * sing)
    vol = order_power_volume(unit_form(order), 1)
    lhs = (n * n * m) ** 2 * vol ** (2 / (m * n * n)) * fam.g0_order ** (-1 / (m * n * n))
    rhs = p ** (1 / (m * n))
    return {
        "family": spec.tag, "p": p, "t": t, "epsilon": eps,
        "ratio": float(ratio), "ratio_exact": f"{ratio.numerator}/{ratio.denominator}",
        "ratio_condition": float(ratio) <= 1 + eps / 3,
        "volume_lhs": lhs, "volume_rhs": rhs, "volume_margin": rhs / lhs,
        "volume_condition": lhs < rhs,
        "rank_constant": c, "rank_condition": p > c * t * t,
    }
