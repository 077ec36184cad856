"""Instance generators and the plain-text instance format.

All randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``),
so a seed reproduces the same instance on every platform.  Sizes are in
kilobytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .online import OnlineInstance, OnlineRequest
from .stochastic import StochasticProfile
from .tape import InvalidInstance, RequestSet, Tape

FAMILIES = ("lognormal", "equal", "fiff-adversarial", "zigzag", "landsat")
PPM = 1_000_000
OFFLINE = -1


@dataclass(frozen=True)
class Instance:
    """A tape with requests and optional probabilities and release times.

    ``order`` is the line order used by the text format; the offline FIFO
    arrival order and the online request order follow it.
    """

    tape: Tape
    requests: RequestSet
    probs_ppm: tuple[int, ...] = ()
    releases: tuple[int, ...] = ()
    order: tuple[int, ...] = ()
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.tape.n
        if len(self.requests.weights) != n:
            raise InvalidInstance(f"{len(self.requests.weights)} request flags for a {n}-file tape")
        probs = tuple(self.probs_ppm) or tuple(PPM * w for w in self.requests.weights)
        releases = tuple(self.releases) or (OFFLINE,) * n
        order = tuple(self.order) or tuple(range(1, n + 1))
        if len(probs) != n or len(releases) != n:
            raise InvalidInstance("probability and release columns must have one entry per file")
        if any(not 0 <= p <= PPM for p in probs):
            raise InvalidInstance("probabilities must lie in 0..1000000 ppm")
        if any(r < OFFLINE for r in releases):
            raise InvalidInstance("releases must be -1 (offline) or non-negative")
        if sorted(order) != list(range(1, n + 1)):
            raise InvalidInstance("line order must list every file exactly once")
        object.__setattr__(self, "probs_ppm", probs)
        object.__setattr__(self, "releases", releases)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def n(self) -> int:
        return self.tape.n

    def profile(self) -> StochasticProfile:
        return StochasticProfile(tuple(Fraction(p, PPM) for p in self.probs_ppm))

    def arrival_order(self) -> tuple[int, ...]:
        return tuple(i for i in self.order if i in self.requests)

    @property
    def is_online(self) -> bool:
        return any(r != OFFLINE for r in self.releases)

    def online(self) -> OnlineInstance:
        """Files with a release time become requests, in line order."""
        reqs = tuple(OnlineRequest(i, self.releases[i - 1]) for i in self.order if self.releases[i - 1] != OFFLINE)
        return OnlineInstance(self.tape, reqs)


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    n: int = 100
    mu: float = 13.04
    sigma: float = 2.38
    p: float = 1.0
    seed: int = 0
    tiles: int = 15
    files_per_tile: int = 12
    bands: tuple[int, ...] = (4, 5)
    cloud_threshold: float = 30.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInstance(f"unknown family {self.family!r}; choose from {FAMILIES}")


def _check_positive(name: str, value) -> None:
    if not value > 0:
        raise InvalidInstance(f"{name} must be positive, got {value}")


def lognormal_cap(mu: float, sigma: float, quantile: float = 0.9) -> float:
    """Analytic quantile of the log-normal distribution (in bytes)."""
    return math.exp(mu + sigma * NormalDist().inv_cdf(quantile))


def lognormal_draws(n: int, mu: float, sigma: float, seed: int) -> np.ndarray:
    """Raw log-normal sizes in bytes, before truncation and unit conversion."""
    if n < 1:
        raise InvalidInstance("n must be at least 1")
    _check_positive("sigma", sigma)
    return np.random.default_rng(seed).lognormal(mu, sigma, n)


def gen_lognormal_tape(n: int, mu: float = 13.04, sigma: float = 2.38, seed: int = 0) -> Tape:
    """Log-normal sizes capped at the 90% quantile, converted to whole kilobytes (at least 1)."""
    raw = lognormal_draws(n, mu, sigma, seed)
    capped = np.minimum(raw, lognormal_cap(mu, sigma))
    kb = np.maximum(np.rint(capped / 1000.0), 1).astype(np.int64)
    return Tape(tuple(int(s) for s in kb))


def gen_bernoulli_requests(n: int, p: float, seed: int = 0) -> tuple[RequestSet, int]:
    """Independent Bernoulli(p) request flags.

    An all-zero draw is redrawn with seed + 1, seed + 2, ...; the seed that
    produced the result is returned alongside it.
    """
    if not 0 < p <= 1:
        raise InvalidInstance(f"p must lie in (0, 1], got {p}")
    if n < 1:
        raise InvalidInstance("n must be at least 1")
    current = seed
    while True:
        flags = np.random.default_rng(current).random(n) < p
        if flags.any():
            return RequestSet(tuple(int(f) for f in flags)), current
        current += 1


def gen_fiff_adversarial(n: int) -> Instance:
    """Unit files around one unrequested n^2-sized file in second position."""
    if n < 4:
        raise InvalidInstance("the construction needs n >= 4")
    sizes = (1, n * n) + (1,) * (n - 2)
    requests = RequestSet.from_ids(n, [1, *range(3, n + 1)])
    return Instance(Tape(sizes), requests, provenance=(f"family=fiff-adversarial n={n}",))


def zigzag_order(n: int) -> tuple[int, ...]:
    if n < 4 or n % 2:
        raise InvalidInstance("the zigzag family needs an even n >= 4")
    half = n // 2
    order = [half]
    for k in range(1, half + 1):
        if half + k <= n:
            order.append(half + k)
        if half - k >= 1:
            order.append(half - k)
    return tuple(order)


def gen_zigzag(n: int) -> Instance:
    """Unit files all released at time 0 in a middle-out alternating order."""
    order = zigzag_order(n)
    return Instance(
        Tape((1,) * n),
        RequestSet.all(n),
        releases=(0,) * n,
        order=order,
        provenance=(f"family=zigzag n={n}",),
    )


def gen_landsat(
    tiles: int = 15,
    files_per_tile: int = 12,
    mean_size: int = 280_000,
    size_std: float = 500.0,
    request_pattern: Iterable[int] = (4, 5),
    seed: int = 0,
    cloud_threshold: float = 30.0,
) -> Instance:
    """Satellite-tile tapes: one file per band, nearly equal sizes.

    Each tile gets a cloud cover drawn uniformly from [0, 100); tiles at or
    below ``cloud_threshold`` have the bands in ``request_pattern`` (1-based)
    requested.  If no tile passes, the least cloudy one is used so that the
    instance is never empty.
    """
    if tiles < 1 or files_per_tile < 1:
        raise InvalidInstance("tiles and files_per_tile must be positive")
    bands = sorted(set(int(b) for b in request_pattern))
    if not bands or bands[0] < 1 or bands[-1] > files_per_tile:
        raise InvalidInstance(f"band indices must lie in 1..{files_per_tile}, got {bands}")
    rng = np.random.default_rng(seed)
    n = tiles * files_per_tile
    sizes = np.maximum(np.rint(rng.normal(mean_size, size_std, n)), 1).astype(np.int64)
    cover = rng.uniform(0.0, 100.0, tiles)
    passing = [t for t in range(tiles) if cover[t] <= cloud_threshold]
    if not passing:
        passing = [int(np.argmin(cover))]
    ids = [t * files_per_tile + b for t in passing for b in bands]
    return Instance(
        Tape(tuple(int(s) for s in sizes)),
        RequestSet.from_ids(n, ids),
        provenance=(
            f"family=landsat tiles={tiles} files_per_tile={files_per_tile} bands={','.join(map(str, bands))} "
            f"cloud_threshold={cloud_threshold} seed={seed}",
        ),
    )


def _child_seeds(seed: int) -> tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2)
    return int(state[0]), int(state[1])


def generate(spec: InstanceSpec) -> Instance:
    """Build the instance described by ``spec``; a pure function of its fields."""
    fam = spec.family
    if fam == "fiff-adversarial":
        return gen_fiff_adversarial(spec.n)
    if fam == "zigzag":
        return gen_zigzag(spec.n)
    if fam == "landsat":
        return gen_landsat(
            spec.tiles, spec.files_per_tile, request_pattern=spec.bands, seed=spec.seed,
            cloud_threshold=spec.cloud_threshold,
        )
    size_seed, request_seed = _child_seeds(spec.seed)
    if fam == "lognormal":
        tape = gen_lognormal_tape(spec.n, spec.mu, spec.sigma, size_seed)
    else:
        size = max(1, round(math.exp(spec.mu) / 1000))
        tape = Tape((size,) * spec.n)
    requests, used = gen_bernoulli_requests(spec.n, spec.p, request_seed)
    ppm = round(spec.p * PPM)
    note = f"family={fam} n={spec.n} mu={spec.mu} sigma={spec.sigma} p={spec.p} seed={spec.seed} request_seed={used}"
    return Instance(tape, requests, probs_ppm=(ppm,) * spec.n, provenance=(note,))


def format_instance(inst: Instance) -> str:
    lines = [f"# {p}" for p in inst.provenance]
    lines.append(str(inst.n))
    for i in inst.order:
        k = i - 1
        lines.append(f"{i} {inst.tape.sizes[k]} {inst.requests.weights[k]} {inst.probs_ppm[k]} {inst.releases[k]}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Instance:
    provenance: list[str] = []
    rows: list[list[int]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if n is None:
                provenance.append(line[1:].strip())
            continue
        try:
            fields = [int(x) for x in line.split()]
        except ValueError:
            raise InvalidInstance(f"line {lineno}: expected integers, got {raw!r}") from None
        if n is None:
            if len(fields) != 1 or fields[0] < 1:
                raise InvalidInstance(f"line {lineno}: first line must hold the file count")
            n = fields[0]
            continue
        if len(fields) != 5:
            raise InvalidInstance(f"line {lineno}: expected 'id size weight prob_ppm release'")
        rows.append(fields)
    if n is None:
        raise InvalidInstance("empty instance")
    if len(rows) != n:
        raise InvalidInstance(f"expected {n} file lines, found {len(rows)}")
    by_id = {}
    for row in rows:
        if row[0] in by_id:
            raise InvalidInstance(f"file {row[0]} listed twice")
        by_id[row[0]] = row
    if sorted(by_id) != list(range(1, n + 1)):
        raise InvalidInstance(f"file ids must be 1..{n}")
    cols = [by_id[i] for i in range(1, n + 1)]
    return Instance(
        Tape(tuple(c[1] for c in cols)),
        RequestSet(tuple(c[2] for c in cols)),
        probs_ppm=tuple(c[3] for c in cols),
        releases=tuple(c[4] for c in cols),
        order=tuple(r[0] for r in rows),
        provenance=tuple(provenance),
    )


def read_instance(path: str | Path) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst))


def with_requests(inst: Instance, requests: RequestSet | Sequence[int]) -> Instance:
    if not isinstance(requests, RequestSet):
        requests = RequestSet.from_ids(inst.n, requests)
    return Instance(inst.tape, requests, inst.probs_ppm, inst.releases, inst.order, inst.provenance)
