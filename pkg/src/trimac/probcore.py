"""Dense joint distributions over named finite axes, and their information measures.

A JointPMF is a numpy tensor with one named axis per variable.  All region
evaluations in this package reduce to building one joint tensor by chaining
conditionals and then reading entropies off marginals.  Tensors are capped at
1e8 cells; axis names are unique per tensor; all masses are validated at
construction.

Entropies are in bits throughout, with the 0 log 0 = 0 convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Alphabet",
    "JointPMF",
    "ConditionalPMF",
    "entropy",
    "conditional_entropy",
    "mutual_information",
    "binary_entropy",
    "binary_entropy_inverse",
    "tv_distance",
    "chain",
    "push_forward",
    "marginalize",
    "add_derived_axis",
    "deterministic_conditional",
    "sample_cells",
]

MAX_CELLS = 10**8
MASS_TOL = 1e-12
# Mutual information may come out slightly negative from float round-off.
MI_CLAMP = -1e-10


@dataclass(frozen=True)
class Alphabet:
    """A finite symbol set {0, ..., size-1} with an optional display label."""

    size: int
    label: str = ""

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet size must be >= 1")


def _norm_axes(axes) -> tuple[tuple[str, Alphabet], ...]:
    out = []
    for item in axes:
        name, alpha = item
        if isinstance(alpha, int):
            alpha = Alphabet(alpha)
        if not isinstance(name, str) or not name:
            raise ValueError("axis names must be non-empty strings")
        out.append((name, alpha))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate axis names in {names}")
    return tuple(out)


def _norm_names(names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


class JointPMF:
    """Joint distribution over named finite axes, stored dense and read-only."""

    def __init__(self, axes, probs):
        self.axes = _norm_axes(axes)
        shape = tuple(a.size for _, a in self.axes)
        cells = int(np.prod([*shape, 1], dtype=np.int64))
        if cells > MAX_CELLS:
            raise ValueError(f"{cells} cells exceeds the {MAX_CELLS} dense-tensor cap")
        p = np.array(probs, dtype=np.float64, copy=True).reshape(shape)
        if p.size and p.min() < 0.0:
            raise ValueError("negative probability mass")
        total = float(p.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {total!r} is not 1 within {MASS_TOL}")
        p = np.ascontiguousarray(p)
        p.flags.writeable = False
        self.probs = p

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    def axis_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no axis named {name!r}; have {self.names}") from None

    def alphabet(self, name: str) -> Alphabet:
        return self.axes[self.axis_index(name)][1]

    def marginal_array(self, keep) -> np.ndarray:
        """Marginal tensor over `keep` in the given order."""
        keep = _norm_names(keep)
        idx = [self.axis_index(n) for n in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        m = self.probs.sum(axis=drop) if drop else self.probs
        kept_in_orig = [i for i in range(len(self.axes)) if i not in drop]
        perm = [kept_in_orig.index(i) for i in idx]
        return np.transpose(m, axes=perm)

    def to_json(self) -> dict:
        return {
            "axes": [{"name": n, "size": a.size} for n, a in self.axes],
            "probs": [float(x) for x in self.probs.ravel()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointPMF":
        axes = [(ax["name"], Alphabet(int(ax["size"]))) for ax in obj["axes"]]
        return cls(axes, np.array(obj["probs"], dtype=np.float64))


class ConditionalPMF:
    """P(targets | givens), stored as a tensor of shape given_shape + target_shape."""

    def __init__(self, given_axes, target_axes, table):
        self.given_axes = _norm_axes(given_axes) if given_axes else ()
        self.target_axes = _norm_axes(target_axes)
        g_names = {n for n, _ in self.given_axes}
        if any(n in g_names for n, _ in self.target_axes):
            raise ValueError("target axes overlap given axes")
        g_shape = tuple(a.size for _, a in self.given_axes)
        t_shape = tuple(a.size for _, a in self.target_axes)
        tab = np.array(table, dtype=np.float64, copy=True).reshape(g_shape + t_shape)
        if tab.size and tab.min() < 0.0:
            raise ValueError("negative conditional mass")
        flat = tab.reshape(int(np.prod([*g_shape, 1], dtype=np.int64)), -1)
        sums = flat.sum(axis=1)
        if sums.size and np.abs(sums - 1.0).max() > MASS_TOL:
            worst = float(np.abs(sums - 1.0).max())
            raise ValueError(f"a conditional slice misses mass 1 by {worst!r}")
        tab = np.ascontiguousarray(tab)
        tab.flags.writeable = False
        self.table = tab

    @property
    def given_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.given_axes)

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.target_axes)

    @classmethod
    def from_joint(cls, joint: JointPMF) -> "ConditionalPMF":
        """Wrap an unconditional law as a conditional with no given axes."""
        return cls((), joint.axes, joint.probs)


def marginalize(p: JointPMF, keep) -> JointPMF:
    """Marginal joint over `keep`, axes in the requested order."""
    keep = _norm_names(keep)
    idx = [p.axis_index(n) for n in keep]
    drop = tuple(i for i in range(len(p.axes)) if i not in idx)
    m = p.probs.sum(axis=drop) if drop else p.probs
    kept_in_orig = [i for i in range(len(p.axes)) if i not in drop]
    perm = [kept_in_orig.index(i) for i in idx]
    m = np.transpose(m, axes=perm)
    return JointPMF([p.axes[i] for i in idx], m)


def entropy(p: JointPMF, axes=None) -> float:
    """H of the marginal over `axes` (all axes when omitted), in bits."""
    if axes is None:
        m = p.probs
    else:
        axes = _norm_names(axes)
        idx = sorted(p.axis_index(n) for n in axes)
        drop = tuple(i for i in range(len(p.axes)) if i not in idx)
        m = p.probs.sum(axis=drop) if drop else p.probs
    flat = m.ravel()
    pos = flat[flat > 0.0]
    return float(-(pos * np.log2(pos)).sum()) + 0.0  # keep -0.0 out of reports


def conditional_entropy(p: JointPMF, target, given=()) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    target = _norm_names(target)
    given = _norm_names(given)
    if set(target) & set(given):
        raise ValueError("target and given overlap")
    if not given:
        return entropy(p, target)
    return entropy(p, target + given) - entropy(p, given)


def mutual_information(p: JointPMF, a, b, given=()) -> float:
    """I(a; b | given) in bits, clamped at tiny negative round-off."""
    a = _norm_names(a)
    b = _norm_names(b)
    given = _norm_names(given)
    if (set(a) & set(b)) or (set(a) & set(given)) or (set(b) & set(given)):
        raise ValueError("a, b, given must be pairwise disjoint")
    mi = conditional_entropy(p, a, given) - conditional_entropy(p, a, b + given)
    if mi < 0.0:
        if mi < MI_CLAMP:
            raise ValueError(f"mutual information {mi!r} below round-off clamp {MI_CLAMP}")
        mi = 0.0
    return mi


def binary_entropy(p: float) -> float:
    """h_b(p) in bits for p in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def binary_entropy_inverse(h: float) -> float:
    """The p in [0, 1/2] with h_b(p) = h, by bisection to |h_b(p) - h| <= 1e-12."""
    if not 0.0 <= h <= 1.0:
        raise ValueError("h must lie in [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    mid = 0.25
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = binary_entropy(mid)
        if abs(val - h) <= 1e-12:
            return mid
        if val < h:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-18:
            break
    return mid


def tv_distance(p: JointPMF, r: JointPMF) -> float:
    """Total variation distance; the two laws must share identical axes."""
    if p.axes != r.axes:
        raise ValueError("axes mismatch")
    return 0.5 * float(np.abs(p.probs - r.probs).sum())


def chain(base: JointPMF, cond: ConditionalPMF) -> JointPMF:
    """Extend `base` by the conditional law, giving a joint over both axis sets.

    cond's given axes must all be present in base; target axes are appended.
    Mass is preserved exactly up to float arithmetic.
    """
    for name, alpha in cond.given_axes:
        if base.alphabet(name).size != alpha.size:
            raise ValueError(f"axis {name!r} size mismatch between base and conditional")
    t_shape = tuple(a.size for _, a in cond.target_axes)
    # Align cond.table to base's axis order, singleton for non-given axes.
    given = cond.given_names
    perm = sorted(range(len(given)), key=lambda i: base.axis_index(given[i]))
    tab = np.transpose(
        cond.table,
        axes=[*perm, *range(len(given), len(given) + len(t_shape))],
    )
    aligned_shape = tuple(
        base.shape[i] if base.names[i] in given else 1 for i in range(len(base.shape))
    )
    tab = tab.reshape(aligned_shape + t_shape)
    out = base.probs.reshape(base.shape + (1,) * len(t_shape)) * tab
    return JointPMF(base.axes + cond.target_axes, out)


def push_forward(p: JointPMF, mapping, new_axes, vectorized: bool = False) -> JointPMF:
    """Image law of `p` under `mapping`.

    mapping takes one symbol index per axis of p (scalars, or flat index
    arrays when vectorized=True) and returns one index per new axis.
    """
    new_axes = _norm_axes(new_axes)
    out_shape = tuple(a.size for _, a in new_axes)
    out = np.zeros(out_shape, dtype=np.float64)
    grids = np.indices(p.shape).reshape(len(p.shape), -1)
    flat = p.probs.ravel()
    if vectorized:
        dest = mapping(*grids)
        dest = (dest,) if not isinstance(dest, tuple) else dest
        np.add.at(out, tuple(np.asarray(d) for d in dest), flat)
    else:
        for cell in range(flat.shape[0]):
            dest = mapping(*(int(g[cell]) for g in grids))
            dest = (dest,) if not isinstance(dest, tuple) else dest
            out[tuple(int(d) for d in dest)] += flat[cell]
    return JointPMF(new_axes, out)


def add_derived_axis(p: JointPMF, name: str, size: int, fn, vectorized: bool = False) -> JointPMF:
    """Append a deterministic function of the existing axes as a new axis."""
    grids = np.indices(p.shape).reshape(len(p.shape), -1)
    if vectorized:
        vals = np.asarray(fn(*grids))
    else:
        vals = np.array([fn(*(int(g[c]) for g in grids)) for c in range(grids.shape[1])])
    if vals.min() < 0 or vals.max() >= size:
        raise ValueError(f"derived axis {name!r} values escape [0, {size})")
    out = np.zeros(p.shape + (size,), dtype=np.float64)
    flat_idx = tuple(grids) + (vals,)
    out[flat_idx] = p.probs.ravel()
    return JointPMF(p.axes + ((name, Alphabet(size)),), out)


def deterministic_conditional(given_axes, target_axes, fn, vectorized: bool = False) -> ConditionalPMF:
    """Conditional that puts mass 1 on fn(given symbols) for every given cell."""
    given_axes = _norm_axes(given_axes)
    target_axes = _norm_axes(target_axes)
    g_shape = tuple(a.size for _, a in given_axes)
    t_shape = tuple(a.size for _, a in target_axes)
    table = np.zeros(g_shape + t_shape, dtype=np.float64)
    grids = np.indices(g_shape).reshape(len(g_shape), -1)
    if vectorized:
        dest = fn(*grids)
        dest = (dest,) if not isinstance(dest, tuple) else dest
        table[tuple(grids) + tuple(np.asarray(d) for d in dest)] = 1.0
    else:
        for cell in range(grids.shape[1]):
            dest = fn(*(int(g[cell]) for g in grids))
            dest = (dest,) if not isinstance(dest, tuple) else dest
            table[tuple(int(g[cell]) for g in grids) + tuple(int(d) for d in dest)] = 1.0
    return ConditionalPMF(given_axes, target_axes, table)


def sample_cells(p: JointPMF, count: int, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
    """Draw iid cells from the joint; returns one index array per axis."""
    cdf = np.cumsum(p.probs.ravel())
    cdf[-1] = 1.0
    u = rng.random(count)
    flat = np.searchsorted(cdf, u, side="right")
    return np.unravel_index(flat, p.shape)
