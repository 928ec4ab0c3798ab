"""Finite spaces with a distance-like function, and Fano bounds built on
neighborhood sizes.

The classical Fano inequality controls P(Vhat != V). Replacing the
mismatch event with {rho(Vhat, V) > t} turns the cardinality |V| of the
alphabet into the ratio |V| / N_t_max, where N_t_max is the largest
number of points within distance t of any point. This module computes
those neighborhood counts exactly and evaluates the resulting
inequalities.

Conventions kept exactly as stated by the inequalities themselves:
neighborhoods use rho <= t, the error event uses the strict rho > t, and
ties at exactly t therefore count as success.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .info import (
    LN2,
    DomainError,
    EnumerationLimitError,
    MarkovChainSpec,
    binary_entropy,
    conditional_entropy,
)
from .results import BoundResult
from .streams import SPACE_STREAM, stream

__all__ = [
    "DiscreteSpace",
    "NeighborhoodProfile",
    "neighborhood_sizes",
    "sparse_sign_space",
    "sparse_sign_cardinality",
    "sparse_sign_neighborhood_exact",
    "sparse_sign_neighborhood_upper",
    "fano_inequality_sides",
    "fano_tail_lower_bound",
    "fano_conditional_form",
    "PAIR_ENUM_CUTOFF",
    "VECTOR_PAIR_CUTOFF",
]

# Pairwise-evaluation budgets for exact enumeration. The scalar budget
# counts Python-level rho calls; the vector budget counts block-processed
# matrix entries for the built-in Hamming fast path, which is ~100x
# cheaper per pair (the d=10 sparse sign spaces need 2.4e8 pairs).
PAIR_ENUM_CUTOFF = 10**8
VECTOR_PAIR_CUTOFF = 10**9

_MATRIX_CACHE_CUTOFF = 10**7          # distance_matrix entries
_SYMMETRY_EXHAUSTIVE_PAIRS = 250_000  # above this, symmetry is spot-checked
_SYMMETRY_SAMPLES = 4096
_UPPER_BOUND_SELFCHECK_POINTS = 200_000


class DiscreteSpace:
    """Finite point set with a symmetric real-valued distance-like function.

    rho needs no positivity and no triangle inequality, but symmetry is
    required: it is validated exhaustively for small spaces and by seeded
    random sampling for large ones, and asymmetric inputs are rejected.

    homogeneous=True asserts that every point sees the same multiset of
    distances (all neighborhoods are congruent), which lets neighborhood
    counting scan a single center. Constructors only set it when the
    symmetry group of the construction guarantees it.
    """

    def __init__(self, points: Sequence, rho: Callable, *, homogeneous: bool = False):
        self._points = list(points)
        if len(self._points) < 2:
            raise DomainError("a discrete space needs at least 2 points")
        self._rho = rho
        self._mode = "callable"
        self._vectors = None
        self._matrix = None
        self.homogeneous = bool(homogeneous)
        self._check_symmetry()

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_matrix(cls, matrix, points: Sequence | None = None) -> "DiscreteSpace":
        """Space given by an explicit symmetric distance matrix."""
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise DomainError("distance matrix must be square with >= 2 points")
        if not np.array_equal(m, m.T):
            raise DomainError("rho must be symmetric; matrix differs from its transpose")
        self = cls.__new__(cls)
        self._points = list(points) if points is not None else list(range(m.shape[0]))
        if len(self._points) != m.shape[0]:
            raise DomainError("points length must match matrix size")
        m = m.copy()
        m.flags.writeable = False
        self._matrix = m
        self._vectors = None
        self._rho = None
        self._mode = "matrix"
        self.homogeneous = False
        return self

    @classmethod
    def hamming(cls, vectors, *, homogeneous: bool = False) -> "DiscreteSpace":
        """Integer-vector space under Hamming distance (vectorized fast path)."""
        v = np.asarray(vectors)
        if v.ndim != 2 or v.shape[0] < 2:
            raise DomainError("need a (n, d) array with n >= 2")
        v = np.ascontiguousarray(v, dtype=np.int8)
        v.flags.writeable = False
        self = cls.__new__(cls)
        self._points = v
        self._vectors = v
        self._matrix = None
        self._rho = lambda a, b: float((np.asarray(a) != np.asarray(b)).sum())
        self._mode = "hamming"
        self.homogeneous = bool(homogeneous)
        return self

    @classmethod
    def zero_one(cls, k: int) -> "DiscreteSpace":
        """k labelled points under the 0-1 metric."""
        if k < 2:
            raise DomainError("need k >= 2")
        mat = 1.0 - np.eye(k)
        space = cls.from_matrix(mat, points=list(range(k)))
        space.homogeneous = True  # every point sees the same distance multiset
        return space

    # -- basics ------------------------------------------------------------

    @property
    def n_points(self) -> int:
        return len(self._points)

    @property
    def points(self):
        return self._points

    @property
    def vectors(self) -> np.ndarray | None:
        return self._vectors

    def rho(self, a, b) -> float:
        """rho between two point values (not indices), for callable/hamming modes."""
        if self._mode == "matrix":
            raise DomainError("matrix-backed space: use rho_index")
        return float(self._rho(a, b))

    def rho_index(self, i: int, j: int) -> float:
        """rho between points[i] and points[j]."""
        if self._mode == "matrix":
            return float(self._matrix[i, j])
        if self._mode == "hamming":
            return float((self._vectors[i] != self._vectors[j]).sum())
        return float(self._rho(self._points[i], self._points[j]))

    def rho_rows(self, idx: np.ndarray) -> np.ndarray:
        """Rows of the pairwise distance matrix for the given center indices."""
        idx = np.asarray(idx, dtype=np.int64)
        if self._mode == "matrix":
            return self._matrix[idx]
        if self._mode == "hamming":
            return self._hamming_block(idx)
        n = self.n_points
        out = np.empty((idx.size, n), dtype=np.float64)
        for r, i in enumerate(idx):
            pi = self._points[i]
            out[r] = [self._rho(pi, pj) for pj in self._points]
        return out

    @cached_property
    def _onehot(self) -> np.ndarray:
        values = np.unique(self._vectors)
        return np.concatenate([(self._vectors == v) for v in values],
                              axis=1).astype(np.float32)

    def _hamming_block(self, idx: np.ndarray) -> np.ndarray:
        """Hamming distances from the indexed centers to every point.

        Small queries broadcast directly; large blocks go through a
        one-hot matmul (equal-coordinate counts are exact integers below
        2^24, so float32 is lossless).
        """
        n, d = self._vectors.shape
        if idx.size * n * d <= 2**25:
            centers = self._vectors[idx]
            return (centers[:, None, :] != self._vectors[None, :, :]).sum(
                axis=2).astype(np.float64)
        equal = self._onehot[idx] @ self._onehot.T
        return (d - equal).astype(np.float64)

    @cached_property
    def _distance_matrix(self) -> np.ndarray:
        n = self.n_points
        if self._mode == "matrix":
            return self._matrix
        if n * n > _MATRIX_CACHE_CUTOFF:
            raise EnumerationLimitError(
                f"distance matrix would have {n * n} entries "
                f"(cutoff {_MATRIX_CACHE_CUTOFF}); stream rho_rows instead")
        m = self.rho_rows(np.arange(n))
        m.flags.writeable = False
        return m

    def distance_matrix(self) -> np.ndarray:
        """Full pairwise distance matrix (cached; guarded by an entry cutoff)."""
        return self._distance_matrix

    def _check_symmetry(self):
        n = self.n_points
        if n * n <= _SYMMETRY_EXHAUSTIVE_PAIRS:
            pairs = itertools.combinations(range(n), 2)
        else:
            g = stream(0, SPACE_STREAM)
            ii = g.integers(0, n, _SYMMETRY_SAMPLES)
            jj = g.integers(0, n, _SYMMETRY_SAMPLES)
            pairs = zip(ii.tolist(), jj.tolist())
        for i, j in pairs:
            a = self._rho(self._points[i], self._points[j])
            b = self._rho(self._points[j], self._points[i])
            if a != b:
                raise DomainError(
                    f"rho must be symmetric: rho(p{i}, p{j}) = {a!r} but rho(p{j}, p{i}) = {b!r}")


@dataclass(frozen=True)
class NeighborhoodProfile:
    """Extreme neighborhood sizes at radius t: counts of {v' : rho(v, v') <= t}."""

    t: float
    n_max: int
    n_min: int

    def __post_init__(self):
        if self.n_min > self.n_max or self.n_min < 0:
            raise DomainError(f"need 0 <= n_min <= n_max, got {self.n_min}, {self.n_max}")


def neighborhood_sizes(space: DiscreteSpace, t: float, *, block: int = 1024) -> NeighborhoodProfile:
    """Exact max/min over centers v of card{v' : rho(v, v') <= t}.

    Enumeration is streamed in blocks of centers; the max/min reduction is
    order-independent, so any internal parallelization over blocks would
    give identical results. Spaces beyond the pairwise budget raise and
    point the caller at structured formulas such as
    sparse_sign_neighborhood_upper.
    """
    n = space.n_points
    if space.homogeneous:
        count = int((space.rho_rows(np.array([0])) <= t).sum())
        return NeighborhoodProfile(t=t, n_max=count, n_min=count)
    budget = PAIR_ENUM_CUTOFF if space._mode == "callable" else VECTOR_PAIR_CUTOFF
    if n * n > budget:
        raise EnumerationLimitError(
            f"{n * n} pairwise evaluations exceed the enumeration budget {budget}; "
            "use a structured formula (e.g. sparse_sign_neighborhood_upper) instead")
    n_max, n_min = 0, n + 1
    for lo in range(0, n, block):
        rows = space.rho_rows(np.arange(lo, min(lo + block, n)))
        counts = (rows <= t).sum(axis=1)
        n_max = max(n_max, int(counts.max()))
        n_min = min(n_min, int(counts.min()))
    return NeighborhoodProfile(t=t, n_max=n_max, n_min=n_min)


def sparse_sign_cardinality(d: int, s: int) -> int:
    """|{v in {-1,0,1}^d : exactly s nonzeros}| = 2^s * C(d, s), exactly."""
    if not 1 <= s <= d:
        raise DomainError(f"need 1 <= s <= d, got s={s}, d={d}")
    return (2**s) * math.comb(d, s)


def sparse_sign_space(d: int, s: int, *, max_points: int = 2_000_000) -> DiscreteSpace:
    """Materialize the s-sparse sign vectors in {-1,0,1}^d under Hamming distance.

    The space is homogeneous: signed coordinate permutations act
    transitively on it and preserve Hamming distance, so every
    neighborhood is congruent and exact counts need only one center scan.
    For cardinalities beyond max_points, work with
    sparse_sign_cardinality and sparse_sign_neighborhood_upper instead.
    """
    card = sparse_sign_cardinality(d, s)
    if card > max_points:
        raise EnumerationLimitError(
            f"2^s * C(d, s) = {card} exceeds max_points={max_points}; "
            "use the counting forms instead of materializing")
    out = np.zeros((card, d), dtype=np.int8)
    row = 0
    for support in itertools.combinations(range(d), s):
        cols = list(support)
        for signs in itertools.product((-1, 1), repeat=s):
            out[row, cols] = signs
            row += 1
    return DiscreteSpace.hamming(out, homogeneous=True)


def sparse_sign_neighborhood_exact(d: int, s: int, t: float) -> int:
    """Exact neighborhood size at radius t in the s-sparse sign space.

    The space is homogeneous, so the count around any one center is the
    count everywhere. A neighbor at Hamming distance 2a + f zeroes a
    support coordinates, flips f support signs, and activates a
    off-support coordinates with free signs (sparsity forces the zeroed
    and activated counts to match); summing the choices enumerates the
    neighborhood without materializing the space.
    """
    if not 1 <= s <= d:
        raise DomainError(f"need 1 <= s <= d, got s={s}, d={d}")
    if t < 0:
        return 0
    radius = int(math.floor(t))
    total = 0
    for a in range(0, min(s, d - s, radius // 2) + 1):
        for f in range(0, min(s - a, radius - 2 * a) + 1):
            total += math.comb(s, a) * math.comb(s - a, f) * math.comb(d - s, a) * 2**a
    return total


def sparse_sign_neighborhood_upper(d: int, s: int) -> tuple[int, int]:
    """Radius floor(s/4) and the combinatorial ceiling on its max neighborhood size.

    Returns (t, ceil(s/4) * 2^t * C(d, t)) with t = floor(s/4). For small
    spaces the exact count is recomputed on the spot and a violation of
    the ceiling raises: the ceiling is asserted, not assumed.
    """
    if s < 1 or d < s:
        raise DomainError(f"need 1 <= s <= d, got s={s}, d={d}")
    t = s // 4
    bound = math.ceil(s / 4) * (2**t) * math.comb(d, t)
    if sparse_sign_cardinality(d, s) <= _UPPER_BOUND_SELFCHECK_POINTS:
        exact = neighborhood_sizes(sparse_sign_space(d, s), t).n_max
        if exact > bound:
            raise RuntimeError(
                f"neighborhood ceiling violated at (d={d}, s={s}): exact {exact} > bound {bound}")
    return t, bound


def fano_inequality_sides(chain: MarkovChainSpec, space: DiscreteSpace,
                          t: float) -> tuple[float, float]:
    """Both sides of the distance-based Fano inequality, as (lhs, rhs).

    lhs = h2(P_t) + P_t * ln((|V| - N_min) / N_max) + ln(N_max) with
    P_t = P(rho(Vhat, V) > t), and rhs = H(V | Vhat). The inequality under
    test is lhs >= rhs; it comes from conditioning the uncertainty about V
    on the binary indicator of the event {rho(Vhat, V) <= t}, which is why
    both extreme neighborhood sizes appear. The chain's V and Vhat
    alphabets must both be the space's point set, in order.
    """
    n = space.n_points
    if chain.n_v != n or chain.n_vhat != n:
        raise DomainError(
            f"alphabet mismatch: space has {n} points, chain has |V|={chain.n_v}, "
            f"|Vhat|={chain.n_vhat}")
    joint = chain.joint_v_vhat()
    dmat = space.distance_matrix()
    # joint[v, vhat] against the event rho(vhat, v) > t
    p_t = float(joint[dmat.T > t].sum())
    p_t = min(max(p_t, 0.0), 1.0)
    prof = neighborhood_sizes(space, t)
    # P_t > 0 forces N_min < |V|: some neighborhood misses a point, so the
    # middle term's log argument is positive whenever the term is nonzero.
    middle = p_t * math.log((n - prof.n_min) / prof.n_max) if p_t > 0 else 0.0
    lhs = binary_entropy(p_t) + middle + math.log(prof.n_max)
    rhs = conditional_entropy(chain)
    return lhs, rhs


def fano_tail_lower_bound(card: int, profile: NeighborhoodProfile, mi: float) -> BoundResult:
    """Mutual-information tail bound: P(rho(Vhat, V) > t) >= 1 - (I + ln 2) / ln(card / N_max).

    Requires V uniform on the space. The side condition
    (card - N_min) > N_max is what licenses the inequality; its failure
    (or a nonpositive log-ratio) sets valid=False. A merely negative
    value clamps to 0 with valid=True: vacuous but correct.
    """
    if card < 2:
        raise DomainError("need card >= 2")
    if mi < 0:
        raise DomainError("mutual information must be >= 0")
    log_ratio = math.log(card / profile.n_max)
    side_ok = (card - profile.n_min) > profile.n_max
    valid = side_ok and log_ratio > 0
    value = max(0.0, 1.0 - (mi + LN2) / log_ratio) if log_ratio > 0 else 0.0
    return BoundResult(value=value, valid=valid, ingredients={
        "mi_bound": mi, "log_ratio": log_ratio, "t": profile.t,
        "card": card, "n_max": profile.n_max, "n_min": profile.n_min,
    })


def fano_conditional_form(hvx: float, card: int, profile: NeighborhoodProfile) -> BoundResult:
    """Conditional-entropy tail bound, valid for any distribution of V.

    P(rho(Vhat, V) > t) >= (H(V|X) - ln N_max - ln 2) / ln((card - N_min) / N_max),
    provided the denominator is positive (else valid=False, value 0).
    """
    if hvx < 0:
        raise DomainError("conditional entropy must be >= 0")
    if card < 2:
        raise DomainError("need card >= 2")
    ratio = (card - profile.n_min) / profile.n_max
    if ratio <= 1.0:
        den = math.log(ratio) if ratio > 0 else -math.inf
        return BoundResult(value=0.0, valid=False, ingredients={
            "hvx": hvx, "denominator": den, "t": profile.t,
            "card": card, "n_max": profile.n_max, "n_min": profile.n_min,
        })
    den = math.log(ratio)
    value = max(0.0, (hvx - math.log(profile.n_max) - LN2) / den)
    return BoundResult(value=value, valid=True, ingredients={
        "hvx": hvx, "denominator": den, "t": profile.t,
        "card": card, "n_max": profile.n_max, "n_min": profile.n_min,
    })
