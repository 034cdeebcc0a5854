"""Monte Carlo simulation of ``W(t) = B(T(L(t)))``.

* ``L(t)`` is the first passage of ``A(s) = H1(s) + (2k)^{1/b} H2(s)`` above
  ``t``, where ``H1`` and ``H2`` are independent one-sided stable
  subordinators of indices ``2b`` and ``b``.
* ``T`` is a tempered stable subordinator (index ``alpha``, rate ``lam``).
* ``B`` is Brownian motion with ``E B(s)^2 = 2s``.

Each trajectory ``i`` draws from its own stream ``(seed, i)`` with separate
stages for ``L``, ``T`` and ``B``, so ensembles do not depend on how the work
is scheduled.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytic import CattaneoParams
from .stable import RngStream, TemperedParams, kanter_factor, sample_tempered

__all__ = [
    "CattaneoParams",
    "TrajectoryEnsemble",
    "ValidationReport",
    "sample_summed_subordinator",
    "sample_inverse_subordinator",
    "sample_W",
    "run_ensemble",
    "empirical_cf",
    "compare",
    "write_ensemble_csv",
    "read_ensemble_csv",
]

STAGE_L, STAGE_T, STAGE_B = 0, 1, 2


def _unit_stables(gen: np.random.Generator, a1: float, a2: float, size=None):
    """Independent unit one-sided stables of indices ``a1`` and ``a2``."""
    u = math.pi * (1.0 - gen.random((2,) if size is None else (2, size)))
    e = gen.standard_exponential((2,) if size is None else (2, size))
    s1 = (kanter_factor(a1, u[0]) / e[0]) ** ((1 - a1) / a1)
    s2 = (kanter_factor(a2, u[1]) / e[1]) ** ((1 - a2) / a2)
    return s1, s2


def sample_summed_subordinator(p: CattaneoParams, s: float, rng, size=None):
    """Draw(s) of ``A(s) = H1^{2b}(s) + (2k)^{1/b} H2^b(s)`` at a single level ``s``."""
    p.require_simulable()
    gen = rng.generator(STAGE_L) if isinstance(rng, RngStream) else rng
    s1, s2 = _unit_stables(gen, 2 * p.beta, p.beta, size)
    c = (2 * p.k) ** (1 / p.beta)
    return s ** (1 / (2 * p.beta)) * s1 + c * s ** (1 / p.beta) * s2


def _passage(p: CattaneoParams, t, s1, s2):
    # A(s) = s^{1/2b} S1 + c s^{1/b} S2 is quadratic in y = s^{1/2b}
    c = (2 * p.k) ** (1 / p.beta)
    y = 2 * t / (s1 + np.sqrt(s1 * s1 + 4 * c * s2 * t))
    return y ** (2 * p.beta)


def sample_inverse_subordinator(p: CattaneoParams, t: float, rng, size=None):
    """First-passage time ``L(t) = inf{s : A(s) >= t}``.

    One pair of unit stables ``(S1, S2)`` is drawn and the self-similar family
    ``A~(s) = s^{1/(2b)} S1 + (2k)^{1/b} s^{1/b} S2`` is used. For every fixed
    ``s``, ``A~(s)`` has the law of ``A(s)``, and ``A~`` is increasing, so
    ``P(L~ <= s) = P(A(s) >= t)``: the marginal law of ``L(t)`` is exact.
    The crossing solves a quadratic in ``y = s^{1/(2b)}`` in closed form.
    Draws for different ``t`` from the same stream are coupled
    monotonically, but joint laws across ``t`` are not those of the
    process.

    Parameters
    ----------
    p : CattaneoParams
        Requires ``beta`` in ``(0, 1/2)``.
    t : float
        ``t >= 0``.
    rng : RngStream or numpy.random.Generator
        For an ``RngStream`` the draws come from its ``L`` stage.
    size : int, optional

    Returns
    -------
    float or numpy.ndarray
    """
    p.require_simulable()
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    gen = rng.generator(STAGE_L) if isinstance(rng, RngStream) else rng
    s1, s2 = _unit_stables(gen, 2 * p.beta, p.beta, size)
    out = _passage(p, t, s1, s2)
    if not np.all(np.isfinite(out)) or np.any(out < 0):
        raise FloatingPointError(f"first-passage computation failed at t={t}")
    return float(out) if size is None else out


def sample_W(p: CattaneoParams, t: float, rng: RngStream, *, order: str = "BTL") -> float:
    """One draw of ``W(t) = B(T(L(t)))``.

    ``order="BLT"`` composes ``B(L(T(t)))`` instead; it exists only as a
    deliberately wrong variant for mutation tests.
    """
    p.require_simulable()
    if order == "BTL":
        ell = sample_inverse_subordinator(p, t, rng)
        tau = sample_tempered(TemperedParams(p.alpha, p.lam, ell), rng.generator(STAGE_T)) if ell > 0 else 0.0
    elif order == "BLT":
        tt = sample_tempered(TemperedParams(p.alpha, p.lam, t), rng.generator(STAGE_T))
        tau = sample_inverse_subordinator(p, tt, rng)
    else:
        raise ValueError(f"unknown composition order {order!r}")
    if tau == 0:
        return 0.0
    return math.sqrt(2 * tau) * float(rng.generator(STAGE_B).standard_normal())


def _sample_X1(p: CattaneoParams, rng: RngStream) -> float:
    tau = sample_tempered(TemperedParams(p.alpha, p.lam, 1.0), rng.generator(STAGE_T))
    return math.sqrt(2 * tau) * float(rng.generator(STAGE_B).standard_normal())


_QUANTITIES = {
    "W": lambda p, t, r: sample_W(p, t, r),
    "W_swapped": lambda p, t, r: sample_W(p, t, r, order="BLT"),
    "L": lambda p, t, r: sample_inverse_subordinator(p, t, r),
    "X1": lambda p, t, r: _sample_X1(p, r),
}


def _chunk(args):
    p, t, master, lo, hi, quantity = args
    draw = _QUANTITIES[quantity]
    return np.array([draw(p, t, RngStream(master, i)) for i in range(lo, hi)])


@dataclass
class TrajectoryEnsemble:
    """``n`` independent draws of a process at time ``t``."""

    t: float
    samples: np.ndarray = field(repr=False)
    seed: RngStream
    params: CattaneoParams
    quantity: str = "W"

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("ensemble contains non-finite samples")

    @property
    def n(self) -> int:
        return self.samples.size

    def mean(self) -> tuple[float, float]:
        """Sample mean and its standard error."""
        x = self.samples
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return float(x.mean()), se

    def variance(self) -> tuple[float, float]:
        """Unbiased sample variance and its (fourth-moment) standard error."""
        x = self.samples
        n = x.size
        if n < 2:
            return 0.0, 0.0
        d = x - x.mean()
        v = float(d @ d / (n - 1))
        m4 = float(np.mean(d**4))
        se = math.sqrt(max(m4 - v * v, 0.0) / n)
        return v, se

    def moments(self) -> dict:
        m, m_se = self.mean()
        v, v_se = self.variance()
        return {"n": self.n, "mean": m, "mean_se": m_se, "var": v, "var_se": v_se}


def run_ensemble(
    p: CattaneoParams,
    t: float,
    n: int,
    seed,
    *,
    threads: int = 1,
    quantity: str = "W",
) -> TrajectoryEnsemble:
    """Draw ``n`` independent trajectories; trajectory ``i`` uses stream ``(seed, i)``.

    Parameters
    ----------
    p : CattaneoParams
    t : float
    n : int
    seed : int or RngStream
        Master seed (an ``RngStream``'s own ``stream_id`` is not used).
    threads : int
        Worker processes; the samples are identical for any value.
    quantity : {"W", "L", "X1", "W_swapped"}
        "L" samples ``L(t)``; "X1" samples ``B(T(1))`` (``t`` ignored);
        "W_swapped" is the wrong composition ``B(L(T(t)))``.
    """
    p.require_simulable()
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if quantity not in _QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    master = seed.master_seed if isinstance(seed, RngStream) else int(seed)
    stream = RngStream(master, 0)
    n = int(n)
    threads = max(1, int(threads))
    if threads == 1 or n < 2 * threads:
        samples = _chunk((p, t, master, 0, n, quantity))
    else:
        bounds = np.linspace(0, n, 4 * threads + 1).astype(int)
        jobs = [(p, t, master, int(a), int(b), quantity) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            samples = np.concatenate(list(ex.map(_chunk, jobs)))
    return TrajectoryEnsemble(t=t, samples=samples, seed=stream, params=p, quantity=quantity)


def empirical_cf(e: TrajectoryEnsemble, xi: float) -> tuple[complex, float]:
    """``(mean of exp(i xi X), standard error of its real part)``."""
    phase = xi * e.samples
    c = np.cos(phase)
    s = np.sin(phase)
    se = float(c.std(ddof=1) / math.sqrt(e.n)) if e.n > 1 else 0.0
    return complex(c.mean(), s.mean()), se


@dataclass
class ValidationReport:
    """Monte Carlo estimate against an oracle.

    ``verdict`` is "pass"/"fail" for asserted checks and "reported" for
    checks that only record a comparison.
    """

    quantity: str
    mc_estimate: float | complex
    std_error: float
    oracle: float | complex
    z_score: float
    verdict: str
    threshold: str
    kind: str = "asserted"
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("mc_estimate", "oracle"):
            v = d[key]
            if isinstance(v, complex):
                d[key] = {"re": v.real, "im": v.imag}
        return d

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "reported")


def compare(
    quantity: str,
    estimate,
    std_error: float,
    oracle,
    *,
    n_se: float = 4.0,
    floor: float = 0.0,
    rel: float | None = None,
    kind: str = "asserted",
    note: str = "",
) -> ValidationReport:
    """Build a :class:`ValidationReport`.

    Passes when ``|estimate - oracle| <= max(floor, n_se * std_error)``, or,
    if ``rel`` is given, when ``|estimate - oracle| <= rel * |oracle|``.
    """
    diff = abs(estimate - oracle)
    z = diff / std_error if std_error > 0 else (0.0 if diff == 0 else math.inf)
    if rel is not None:
        ok = diff <= rel * abs(oracle)
        threshold = f"rel <= {rel:g}"
    else:
        ok = diff <= max(floor, n_se * std_error)
        threshold = f"|diff| <= max({floor:g}, {n_se:g} SE)"
    verdict = "reported" if kind == "reported" else ("pass" if ok else "fail")
    return ValidationReport(quantity, estimate, std_error, oracle, float(z), verdict, threshold, kind, note)


# {{{ serialization


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_ensemble_csv(e: TrajectoryEnsemble, path, extra: dict | None = None, wall_time: float | None = None):
    """Write one sample per row and a ``<path>.json`` sidecar with provenance."""
    from . import __version__

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "t", e.quantity])
        for i, v in enumerate(e.samples):
            w.writerow([i, _fmt(e.t), _fmt(v)])
    meta = {
        "params": asdict(e.params),
        "t": e.t,
        "n": e.n,
        "quantity": e.quantity,
        "seed": {"master_seed": e.seed.master_seed, "stream_id": "trajectory index"},
        "moments": e.moments(),
        "tool": "cattaneo",
        "version": __version__,
        "wall_time_s": wall_time,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        meta.update(extra)
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2)


def read_ensemble_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[2]) for r in rows[1:]])


# }}}
