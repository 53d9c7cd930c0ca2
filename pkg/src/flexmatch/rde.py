"""Population dynamics for the recursive distributional equation on the
2-type Galton-Watson tree, and the matching rate it implies.

A law on [0, 1] is represented by an empirical sample. One application of
the operator draws, for each new sample of type x,

    Y_x = 1 / (1 + sum_{i <= N_x} 1 / (sum_{j <= N'_i} X_ij))

where N_x is the offspring count, child types follow ``a_left[x]``, N'_i is
an excess count on the demand side and each X_ij is resampled from the
population mixture ``sum_x' a_right[y, x'] pop_x'``. An empty inner sum is
zero, its reciprocal is infinite and forces ``Y_x = 0``; ``N_x = 0`` gives 1.

The numba kernel and the numpy fallback draw from different random streams,
so the two backends agree in distribution, not sample by sample.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.stats import poisson

from ._accel import USE_NUMBA, jit
from .bounded import FiniteDegreeLaw, truncated_poisson_law
from .model import ModelSpec

DEFAULT_ITERS = 200
NP_BLOCK = 65_536
MAX_BUFFER = 1 << 22
POISSON_TAIL = 1e-17
CDF_BINS = 100
ROOT_KEY = 2


# ---------------------------------------------------------------- laws

@dataclass(frozen=True)
class OffspringLaw:
    """Poisson(rate), or a finitely supported law."""

    rate: float | None = None
    finite: FiniteDegreeLaw | None = None

    def __post_init__(self):
        if (self.rate is None) == (self.finite is None):
            raise ValueError("give exactly one of rate or finite")
        if self.rate is not None and self.rate < 0:
            raise ValueError("rate must be nonnegative")

    @classmethod
    def poisson(cls, rate: float) -> OffspringLaw:
        return cls(rate=float(rate))

    @classmethod
    def truncated(cls, rate: float, d: int) -> OffspringLaw:
        return cls(finite=truncated_poisson_law(rate, d))

    @property
    def kind(self) -> str:
        return "poisson" if self.rate is not None else "finite"

    def excess(self) -> OffspringLaw:
        # a Poisson law is its own excess law
        if self.rate is not None:
            return self
        return OffspringLaw(finite=self.finite.excess())

    def pmf(self) -> np.ndarray:
        if self.finite is not None:
            return np.array(self.finite.weights)
        if self.rate == 0.0:
            return np.ones(1)
        kmax = int(self.rate + 12.0 * np.sqrt(self.rate) + 40.0)
        ks = np.arange(kmax + 1)
        sf = poisson.sf(ks, self.rate)
        cut = int(np.argmax(sf < POISSON_TAIL))
        return poisson.pmf(ks[:cut + 1], self.rate)

    def cdf_table(self) -> np.ndarray:
        c = np.cumsum(self.pmf())
        c /= c[-1]
        c[-1] = 1.0
        return c

    def mean(self) -> float:
        return self.rate if self.rate is not None else self.finite.mean()


@dataclass(frozen=True, eq=False)
class RdeLaws:
    """All degree laws the operator needs, as CDF tables."""

    root_left: tuple[np.ndarray, np.ndarray]
    inner_left: tuple[np.ndarray, np.ndarray]
    inner_right: tuple[np.ndarray, np.ndarray]
    a_left: np.ndarray
    a_right: np.ndarray

    @classmethod
    def build(cls, model: ModelSpec, truncation: int | None = None) -> RdeLaws:
        if truncation is None:
            left = [OffspringLaw.poisson(r) for r in model.lam]
            right = [OffspringLaw.poisson(r) for r in model.big_m]
        else:
            left = [OffspringLaw.truncated(r, truncation) for r in model.lam]
            right = [OffspringLaw.truncated(r, truncation) for r in model.big_m]
        return cls(
            root_left=tuple(law.cdf_table() for law in left),
            inner_left=tuple(law.excess().cdf_table() for law in left),
            inner_right=tuple(law.excess().cdf_table() for law in right),
            a_left=np.ascontiguousarray(model.a_left, dtype=float),
            a_right=np.ascontiguousarray(model.a_right, dtype=float),
        )


# ---------------------------------------------------------------- state

@dataclass(frozen=True)
class IterationDiagnostics:
    iteration: int
    positivity: tuple[float, float]
    means: tuple[float, float]
    cdf_distance: float


@dataclass(frozen=True, eq=False)
class PopulationState:
    pop: np.ndarray  # shape (2, size)
    iteration: int = 0
    diagnostics: tuple[IterationDiagnostics, ...] = field(default=())

    @classmethod
    def ones(cls, size: int) -> PopulationState:
        if size < 1:
            raise ValueError("population size must be >= 1")
        return cls(np.ones((2, size)))

    @property
    def size(self) -> int:
        return int(self.pop.shape[1])

    @property
    def pop_1(self) -> np.ndarray:
        return self.pop[0]

    @property
    def pop_2(self) -> np.ndarray:
        return self.pop[1]

    def dump(self, path) -> None:
        """Plain text: a ``pop <type> <size>`` header, then one value per line."""
        lines = []
        for x in range(2):
            lines.append(f"pop {x + 1} {self.size}")
            lines.extend(f"{v:.17g}" for v in self.pop[x])
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> PopulationState:
        rows = Path(path).read_text().split("\n")
        pops = []
        k = 0
        while k < len(rows) and rows[k].strip():
            tag, _, size = rows[k].split()
            size = int(size)
            pops.append(np.array([float(v) for v in rows[k + 1:k + 1 + size]]))
            k += 1 + size
        return cls(np.vstack(pops))


# ---------------------------------------------------------------- kernels

@jit
def _draw(cdf, u):
    lo = 0
    hi = cdf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if u < cdf[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@jit
def _theta_kernel_jit(pop, cdf_n, a_left_row, cdf_r0, cdf_r1, a_right, u, start, count, out):
    """Fill out[start:count] using the uniforms in ``u``.

    Returns the index of the first sample not written; a sample that would
    run past the end of ``u`` is abandoned and redone by the next call.
    """
    size = pop.shape[1]
    m = u.shape[0]
    pos = 0
    for s in range(start, count):
        if pos >= m:
            return s
        n_children = _draw(cdf_n, u[pos])
        pos += 1
        if n_children == 0:
            out[s] = 1.0
            continue
        acc = 0.0
        hit_zero = False
        for i in range(n_children):
            if pos + 2 > m:
                return s
            y = 0 if u[pos] < a_left_row[0] else 1
            if y == 0:
                n_grand = _draw(cdf_r0, u[pos + 1])
            else:
                n_grand = _draw(cdf_r1, u[pos + 1])
            pos += 2
            if pos + 2 * n_grand > m:
                return s
            inner = 0.0
            for j in range(n_grand):
                x2 = 0 if u[pos] < a_right[y, 0] else 1
                inner += pop[x2, int(u[pos + 1] * size)]
                pos += 2
            if inner == 0.0:
                hit_zero = True
            else:
                acc += 1.0 / inner
        out[s] = 0.0 if hit_zero else 1.0 / (1.0 + acc)
    return count


def _draw_np(cdf, u):
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def _theta_block_np(rng, pop, cdf_n, a_left_row, cdf_r, a_right, count):
    n_children = _draw_np(cdf_n, rng.random(count))
    owner = np.repeat(np.arange(count), n_children)
    total = owner.size
    y = (rng.random(total) >= a_left_row[0]).astype(np.int64)
    n_grand = np.empty(total, np.int64)
    for yy in range(2):
        sel = y == yy
        n_grand[sel] = _draw_np(cdf_r[yy], rng.random(int(sel.sum())))
    g_owner = np.repeat(np.arange(total), n_grand)
    g_y = y[g_owner]
    x2 = (rng.random(g_owner.size) >= a_right[g_y, 0]).astype(np.int64)
    vals = pop[x2, rng.integers(0, pop.shape[1], size=g_owner.size)]
    inner = np.bincount(g_owner, weights=vals, minlength=total)
    is_zero = inner == 0.0
    recip = np.where(is_zero, 0.0, 1.0 / np.where(is_zero, 1.0, inner))
    acc = np.bincount(owner, weights=recip, minlength=count)
    zero_seen = np.bincount(owner, weights=is_zero.astype(float), minlength=count) > 0
    return np.where(n_children == 0, 1.0, np.where(zero_seen, 0.0, 1.0 / (1.0 + acc)))


def _mean_of(cdf: np.ndarray) -> float:
    pmf = np.diff(cdf, prepend=0.0)
    return float(np.arange(cdf.size) @ pmf)


def _buffer_size(laws: RdeLaws, cdf_n: np.ndarray, count: int) -> int:
    """Uniforms expected for ``count`` samples, with headroom, capped."""
    per = 1.0 + _mean_of(cdf_n) * (2.0 + 2.0 * max(_mean_of(c) for c in laws.inner_right))
    return int(min(max(1.25 * per * count + 64, 1024), MAX_BUFFER))


def sample_theta(pop: np.ndarray, laws: RdeLaws, x: int, count: int, root: bool,
                 seq: np.random.SeedSequence, use_numba: bool | None = None) -> np.ndarray:
    """``count`` draws of Y_x given the current populations."""
    if use_numba is None:
        use_numba = USE_NUMBA
    cdf_n = (laws.root_left if root else laws.inner_left)[x]
    pop = np.ascontiguousarray(pop, dtype=float)
    out = np.empty(count)
    if count == 0:
        return out
    if use_numba:
        rng = np.random.default_rng(seq)
        buf = _buffer_size(laws, cdf_n, count)
        done = 0
        while done < count:
            nxt = _theta_kernel_jit(pop, cdf_n, laws.a_left[x], laws.inner_right[0], laws.inner_right[1],
                                    laws.a_right, rng.random(buf), done, count, out)
            if nxt == done:  # a single sample needs more than the buffer
                buf *= 2
            done = nxt
    else:
        for k, start in enumerate(range(0, count, NP_BLOCK)):
            stop = min(start + NP_BLOCK, count)
            rng = np.random.default_rng(np.random.SeedSequence(seq.entropy, spawn_key=seq.spawn_key + (k,)))
            out[start:stop] = _theta_block_np(rng, pop, cdf_n, laws.a_left[x], laws.inner_right,
                                              laws.a_right, stop - start)
    return out


# ---------------------------------------------------------------- operations

def positivity_vector(state: PopulationState, model: ModelSpec) -> tuple[float, float]:
    frac = (state.pop > 0.0).mean(axis=1)
    t = model.a_right @ frac
    return float(t[0]), float(t[1])


def _cdf_distance(a: np.ndarray, b: np.ndarray) -> float:
    edges = np.linspace(0.0, 1.0, CDF_BINS + 1)
    worst = 0.0
    for x in range(2):
        ca = np.searchsorted(np.sort(a[x]), edges, side="right") / a.shape[1]
        cb = np.searchsorted(np.sort(b[x]), edges, side="right") / b.shape[1]
        worst = max(worst, float(np.abs(ca - cb).max()))
    return worst


def theta_step(state: PopulationState, model: ModelSpec, root_laws: bool, seed: int,
               laws: RdeLaws | None = None, use_numba: bool | None = None) -> PopulationState:
    """One application of the operator; ``root_laws`` uses the root offspring law."""
    if laws is None:
        laws = RdeLaws.build(model)
    return _step(state, laws, root_laws, np.random.SeedSequence(int(seed)), use_numba)


def _step(state, laws, root, seq, use_numba):
    new = np.empty_like(state.pop)
    for x in range(2):
        sub = np.random.SeedSequence(seq.entropy, spawn_key=seq.spawn_key + (x,))
        new[x] = sample_theta(state.pop, laws, x, state.size, root, sub, use_numba)
    return PopulationState(new, state.iteration + 1, state.diagnostics)


def solve_fixed_point(model: ModelSpec, pop_size: int, iters: int = DEFAULT_ITERS, seed: int = 0,
                      truncation: int | None = None, use_numba: bool | None = None) -> PopulationState:
    """Iterate the interior operator from the all-ones populations.

    Each iteration appends its positivity vector, population means and the
    sup distance between successive empirical CDFs (on a 100-bin grid).
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    laws = RdeLaws.build(model, truncation)
    state = PopulationState.ones(pop_size)
    diags = []
    for k in range(1, iters + 1):
        nxt = _step(state, laws, False, np.random.SeedSequence(int(seed), spawn_key=(1, k)), use_numba)
        diags.append(IterationDiagnostics(
            k, positivity_vector(nxt, model), tuple(float(v) for v in nxt.pop.mean(axis=1)),
            _cdf_distance(state.pop, nxt.pop)))
        state = nxt
    return replace(state, diagnostics=tuple(diags))


@dataclass(frozen=True, eq=False)
class RdeEstimate:
    eta_hat: float
    std_err: float
    state: PopulationState
    positivity: tuple[float, float]

    def __iter__(self):
        return iter((self.eta_hat, self.std_err))


def root_values(state: PopulationState, model: ModelSpec, root_samples: int, seed: int,
                truncation: int | None = None, use_numba: bool | None = None) -> tuple[float, float]:
    """Mean of the root value and its standard error, stratified by supply type."""
    laws = RdeLaws.build(model, truncation)
    mean = 0.0
    var = 0.0
    for x in range(2):
        if model.p[x] == 0.0:
            continue
        m = max(int(round(root_samples * model.p[x])), 2)
        seq = np.random.SeedSequence(int(seed), spawn_key=(ROOT_KEY, x))
        r = sample_theta(state.pop, laws, x, m, True, seq, use_numba)
        mean += model.p[x] * r.mean()
        var += model.p[x] ** 2 * r.var(ddof=1) / m
    return float(mean), float(np.sqrt(var))


def rde_matching_rate(model: ModelSpec, pop_size: int, iters: int = DEFAULT_ITERS,
                      root_samples: int = 10 ** 6, seed: int = 0, truncation: int | None = None,
                      use_numba: bool | None = None) -> RdeEstimate:
    state = solve_fixed_point(model, pop_size, iters, seed, truncation, use_numba)
    mean_r, se = root_values(state, model, root_samples, seed, truncation, use_numba)
    return RdeEstimate(1.0 - mean_r, se, state, positivity_vector(state, model))
