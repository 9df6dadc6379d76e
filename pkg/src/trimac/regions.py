"""Exact evaluators for the single-letter sufficient-condition families.

Every evaluator composes one dense joint law from the supplied factors
(source, common-part relabelings, coordination layers, zero-sum linear
layer, channel) and reads each inequality off that tensor with exact
entropy arithmetic; nothing in this module samples.  A report row keeps
(id, lhs, rhs, slack) so violations are attributable.

Four condition families are covered: the two-user layered region and the
two-user feedback rate region, the three-user layered region, the hybrid
layered+linear region (extra zero-sum uniform layer V and the additive
relabeling T of the sources), and the feedback block-Markov region built
on a two-copy joint in which the current block's V is a fixed linear image
of the previous block's T.

The quaternary example gets dedicated helpers: the noise-threshold
gamma_star, the eta penalty curves, the three reduced conditions of the
X1 = V1 xor E1 construction, the sigma0 frontier, the product-strategy
mutual-information search, and the total-variation separation check
between structured and product input laws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channels import DMChannel, quaternary_noise_law
from .coding import PAIRS, USER_PAIRS
from .commonparts import additive_common_search, gkw_mutual, gkw_pairwise
from .gfcore import FieldSpec
from .probcore import (
    MI_CLAMP,
    ConditionalPMF,
    JointPMF,
    add_derived_axis,
    binary_entropy,
    binary_entropy_inverse,
    chain,
    conditional_entropy,
    deterministic_conditional,
    entropy,
    marginalize,
    mutual_information,
    push_forward,
)
from .rng import stream
from .sources import SourceModel, make_sigma_gamma_triple

__all__ = [
    "SLACK_FLOOR",
    "FACTOR_TOL",
    "W_SUBSETS",
    "USER_SUBSETS",
    "HYBRID_CES3_SHARED",
    "CSV_HEADER",
    "FactorizationError",
    "InequalityRecord",
    "RegionReport",
    "CES2Dist",
    "CESDist",
    "HybridDist",
    "MacFBDist",
    "MacFBReport",
    "eval_ces2",
    "eval_cl2",
    "eval_ces3",
    "eval_hybrid",
    "eval_macfb",
    "eta1",
    "eta2",
    "gamma_star",
    "example_conditions",
    "FrontierPoint",
    "sigma0_frontier",
    "ProductSearchConfig",
    "ProductSearchResult",
    "max_product_mi",
    "product_conditionals",
    "product_ces_dist",
    "lift_ces_to_hybrid",
    "hybrid_example_dist",
    "structured_pair_joint",
    "min_tv_to_structured",
    "TVSample",
    "TVBoundReport",
    "tv_bound_check",
    "linear_threshold",
    "default_coupling_matrix",
]

SLACK_FLOOR = -1e-9
FACTOR_TOL = 1e-9

W_SUBSETS = (
    (),
    ("12",),
    ("13",),
    ("23",),
    ("12", "13"),
    ("12", "23"),
    ("13", "23"),
    ("12", "13", "23"),
)
USER_SUBSETS = ((), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3))

PAIR_USERS = {"12": (1, 2), "13": (1, 3), "23": (2, 3)}
PAIR_COMPLEMENT = {"12": 3, "13": 2, "23": 1}

CSV_HEADER = ("inequality", "lhs_bits", "rhs_bits", "slack_bits")


class FactorizationError(ValueError):
    """The supplied factors do not form a member of the announced class."""


def _subset_tag(subset) -> str:
    return "+".join(str(b) for b in subset) if subset else "none"


def _pair_name(i: int, k: int) -> str:
    return f"{min(i, k)}{max(i, k)}"


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class InequalityRecord:
    """One condition row; equality rows score slack as -|rhs - lhs|."""

    ineq_id: str
    lhs: float
    rhs: float
    equality: bool = False

    @property
    def slack(self) -> float:
        gap = self.rhs - self.lhs
        return -abs(gap) if self.equality else gap

    @property
    def satisfied(self) -> bool:
        return self.slack >= SLACK_FLOOR


@dataclass(frozen=True)
class RegionReport:
    family: str
    records: tuple[InequalityRecord, ...]

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.records)

    @property
    def worst(self) -> InequalityRecord:
        return min(self.records, key=lambda r: r.slack)

    def record(self, ineq_id: str) -> InequalityRecord:
        for r in self.records:
            if r.ineq_id == ineq_id:
                return r
        raise KeyError(f"no inequality {ineq_id!r} in family {self.family!r}")

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "satisfied": self.satisfied,
            "records": [
                {
                    "inequality": r.ineq_id,
                    "lhs_bits": r.lhs,
                    "rhs_bits": r.rhs,
                    "slack_bits": r.slack,
                    "equality": r.equality,
                }
                for r in self.records
            ],
        }

    def csv_rows(self) -> list[tuple[str, str, str, str]]:
        """Data rows for CSV_HEADER; floats via repr for byte stability."""
        return [(r.ineq_id, repr(r.lhs), repr(r.rhs), repr(r.slack)) for r in self.records]


# ---------------------------------------------------------------------------
# distribution classes
#
# The dataclasses carry plain conditional tables; evaluators rebuild
# axis-named conditionals themselves, so only table layout matters:
# given axes first, in the documented order, then the target axis.


@dataclass(frozen=True)
class CES2Dist:
    """Two-user layered input: shared layer U12, inputs X_i | (S_i, U12).

    x1_cond table layout (|S1|, |U12|, |X1|); same pattern for x2_cond.
    """

    u12: JointPMF
    x1_cond: ConditionalPMF
    x2_cond: ConditionalPMF

    def __post_init__(self):
        if len(self.u12.shape) != 1:
            raise FactorizationError("u12 must be a one-axis law")
        nu = self.u12.shape[0]
        for lbl, cond in (("x1", self.x1_cond), ("x2", self.x2_cond)):
            if cond.table.ndim != 3 or cond.table.shape[1] != nu:
                raise FactorizationError(
                    f"{lbl} conditional must be laid out (|S|, {nu}, |X|); got {cond.table.shape}"
                )


def _check_layered_tables(u123, pair_conds, x_conds, v_size: int | None):
    if len(u123.shape) != 1:
        raise FactorizationError("u123 must be a one-axis law")
    nu = u123.shape[0]
    if set(pair_conds) != set(PAIRS):
        raise FactorizationError(f"pair_conds needs exactly the keys {PAIRS}")
    for b in PAIRS:
        t = pair_conds[b].table
        if t.ndim != 3 or t.shape[1] != nu:
            raise FactorizationError(
                f"pair layer {b} must be laid out (|W{b}|, {nu}, |U{b}|); got {t.shape}"
            )
    if len(x_conds) != 3:
        raise FactorizationError("x_conds must hold one conditional per user")
    want_ndim = 5 if v_size is None else 6
    for i in (1, 2, 3):
        t = x_conds[i - 1].table
        ba, bb = USER_PAIRS[i]
        if t.ndim != want_ndim or t.shape[1] != nu:
            raise FactorizationError(
                f"x{i} conditional needs layout (|S{i}|, {nu}, |U{ba}|, |U{bb}|"
                + ("" if v_size is None else f", {v_size}")
                + f", |X{i}|); got {t.shape}"
            )
        if t.shape[2] != pair_conds[ba].table.shape[2] or t.shape[3] != pair_conds[bb].table.shape[2]:
            raise FactorizationError(f"x{i} conditional disagrees with the pair-layer sizes")
        if v_size is not None and t.shape[4] != v_size:
            raise FactorizationError(f"x{i} conditional needs a size-{v_size} V axis")


@dataclass(frozen=True)
class CESDist:
    """Three-user layered input class.

    u123: law of the common layer.  pair_conds[b]: table (|Wb|, |U123|,
    |Ub|) for b in ("12", "13", "23"), where |Wb| must match the pairwise
    common part of the source being evaluated.  x_conds[i-1]: table
    (|S_i|, |U123|, |U_first|, |U_second|, |X_i|) with the user's two pair
    layers ordered as in USER_PAIRS.
    """

    u123: JointPMF
    pair_conds: dict
    x_conds: tuple

    def __post_init__(self):
        _check_layered_tables(self.u123, self.pair_conds, self.x_conds, None)


@dataclass(frozen=True)
class HybridDist:
    """Layered class plus a zero-sum uniform linear layer over F_q.

    x_conds[i-1]: table (|S_i|, |U123|, |U_first|, |U_second|, q, |X_i|);
    the V marginal is pinned to the uniform zero-sum plane internally.
    """

    q: int
    u123: JointPMF
    pair_conds: dict
    x_conds: tuple

    def __post_init__(self):
        FieldSpec(self.q)
        _check_layered_tables(self.u123, self.pair_conds, self.x_conds, self.q)


@dataclass(frozen=True)
class MacFBDist:
    """Feedback block class: U and, per user, X_i | (U, T_i, V_i).

    T_i is uniform on F_q and V is uniform on the zero-sum plane by
    definition of the class, so only q, the U law, and the three input
    conditionals (tables (|U|, q, q, |X_i|)) are free.
    """

    q: int
    p_u: JointPMF
    x_conds: tuple

    def __post_init__(self):
        FieldSpec(self.q)
        if len(self.p_u.shape) != 1:
            raise FactorizationError("p_u must be a one-axis law")
        if len(self.x_conds) != 3:
            raise FactorizationError("x_conds must hold one conditional per user")
        nu = self.p_u.shape[0]
        for i in (1, 2, 3):
            t = self.x_conds[i - 1].table
            if t.ndim != 4 or t.shape[:3] != (nu, self.q, self.q):
                raise FactorizationError(
                    f"x{i} conditional needs layout ({nu}, {self.q}, {self.q}, |X{i}|); got {t.shape}"
                )


# ---------------------------------------------------------------------------
# composition helpers


def _cond(table, given_axes, target_axes) -> ConditionalPMF:
    return ConditionalPMF(given_axes, target_axes, table)


def _indep(axes, probs) -> ConditionalPMF:
    return ConditionalPMF((), axes, probs)


def _plane_probs(q: int) -> np.ndarray:
    grids = np.indices((q, q, q))
    probs = np.where((grids.sum(axis=0)) % q == 0, 1.0 / q**2, 0.0)
    return probs


def _uniform_cube(q: int) -> np.ndarray:
    return np.full((q, q, q), 1.0 / q**3)


def _derive_label_axis(joint: JointPMF, name: str, size: int, labels, anchor_pos: int) -> JointPMF:
    lab = np.asarray(labels, dtype=np.int64)
    return add_derived_axis(
        joint, name, size, lambda *g, lab=lab, p=anchor_pos: lab[g[p]], vectorized=True
    )


def _with_common_parts(source: SourceModel):
    """Source joint extended by W123 and the three pairwise W axes.

    All labels are anchored on the lowest-index user of the part, so the
    derived axes agree a.s. with any other anchoring.
    """
    mutual = gkw_mutual(source)
    joint = _derive_label_axis(
        source.joint, "W123", mutual.component_count, mutual.labelings[0], 0
    )
    w_sizes = {"W123": mutual.component_count}
    for b in PAIRS:
        i, j = PAIR_USERS[b]
        res = gkw_pairwise(marginalize(source.joint, (f"S{i}", f"S{j}")))
        joint = _derive_label_axis(joint, f"W{b}", res.component_count, res.labelings[0], i - 1)
        w_sizes[f"W{b}"] = res.component_count
    return joint, w_sizes


def _chain_layers(joint, w_sizes, u123, pair_conds, x_conds, channel_sizes, channel_table,
                  source_sizes, v_size=None):
    """Common tail of the three-user evaluators: U layers, V, inputs, output."""
    nu = u123.shape[0]
    joint = chain(joint, _indep([("U123", nu)], u123.probs))
    for b in PAIRS:
        t = pair_conds[b].table
        if t.shape[0] != w_sizes[f"W{b}"]:
            raise FactorizationError(
                f"pair layer {b} was built for |W{b}|={t.shape[0]} but the source has "
                f"{w_sizes[f'W{b}']} components"
            )
        joint = chain(
            joint,
            _cond(t, [("W" + b, t.shape[0]), ("U123", nu)], [("U" + b, t.shape[2])]),
        )
    if v_size is not None:
        joint = chain(
            joint,
            _indep([("V1", v_size), ("V2", v_size), ("V3", v_size)], _plane_probs(v_size)),
        )
    for i in (1, 2, 3):
        t = x_conds[i - 1].table
        if t.shape[0] != source_sizes[i - 1]:
            raise FactorizationError(
                f"x{i} conditional covers {t.shape[0]} source symbols, expected {source_sizes[i - 1]}"
            )
        if t.shape[-1] != channel_sizes[i - 1]:
            raise FactorizationError(
                f"x{i} conditional feeds {t.shape[-1]} symbols into a channel expecting "
                f"{channel_sizes[i - 1]}"
            )
        ba, bb = USER_PAIRS[i]
        given = [(f"S{i}", t.shape[0]), ("U123", nu), ("U" + ba, t.shape[2]), ("U" + bb, t.shape[3])]
        if v_size is not None:
            given.append((f"V{i}", v_size))
        joint = chain(joint, _cond(t, given, [(f"X{i}", t.shape[-1])]))
    ny = channel_table.shape[-1]
    joint = chain(
        joint,
        _cond(channel_table, [("X" + str(i), channel_sizes[i - 1]) for i in (1, 2, 3)], [("Y", ny)]),
    )
    return joint


# ---------------------------------------------------------------------------
# two-user evaluators


def eval_ces2(pair_joint: JointPMF, channel_cond: ConditionalPMF, dist: CES2Dist) -> RegionReport:
    """Two-user layered conditions for a correlated source pair.

    pair_joint's first axis is user 1; channel_cond's table is laid out
    (|X1|, |X2|, |Y|).
    """
    if len(pair_joint.shape) != 2:
        raise FactorizationError("pair_joint must have exactly two axes")
    if channel_cond.table.ndim != 3:
        raise FactorizationError("two-user channel table must be (|X1|, |X2|, |Y|)")
    n1, n2 = pair_joint.shape
    nu = dist.u12.shape[0]
    tx1, tx2 = dist.x1_cond.table, dist.x2_cond.table
    if tx1.shape[0] != n1 or tx2.shape[0] != n2:
        raise FactorizationError("input conditionals do not cover the source alphabets")
    wt = channel_cond.table
    if tx1.shape[2] != wt.shape[0] or tx2.shape[2] != wt.shape[1]:
        raise FactorizationError("input conditionals do not match the channel alphabet")

    base = JointPMF([("S1", n1), ("S2", n2)], pair_joint.probs)
    pairw = gkw_pairwise(base)
    joint = _derive_label_axis(base, "W12", pairw.component_count, pairw.labelings[0], 0)
    joint = chain(joint, _indep([("U12", nu)], dist.u12.probs))
    joint = chain(joint, _cond(tx1, [("S1", n1), ("U12", nu)], [("X1", tx1.shape[2])]))
    joint = chain(joint, _cond(tx2, [("S2", n2), ("U12", nu)], [("X2", tx2.shape[2])]))
    joint = chain(joint, _cond(wt, [("X1", wt.shape[0]), ("X2", wt.shape[1])], [("Y", wt.shape[2])]))

    rows = (
        InequalityRecord(
            "solo-1",
            conditional_entropy(joint, ("S1",), ("S2",)),
            mutual_information(joint, ("X1",), ("Y",), ("X2", "S2", "U12")),
        ),
        InequalityRecord(
            "solo-2",
            conditional_entropy(joint, ("S2",), ("S1",)),
            mutual_information(joint, ("X2",), ("Y",), ("X1", "S1", "U12")),
        ),
        InequalityRecord(
            "pair-w",
            conditional_entropy(joint, ("S1", "S2"), ("W12",)),
            mutual_information(joint, ("X1", "X2"), ("Y",), ("W12", "U12")),
        ),
        InequalityRecord(
            "sum",
            entropy(joint, ("S1", "S2")),
            mutual_information(joint, ("X1", "X2"), ("Y",)),
        ),
    )
    return RegionReport("ces2", rows)


def eval_cl2(rates, channel_cond: ConditionalPMF, p_u: JointPMF,
             x1_cond: ConditionalPMF, x2_cond: ConditionalPMF) -> RegionReport:
    """Two-user feedback rate conditions under a shared layer U.

    x conditionals are laid out (|U|, |X_i|); channel as in eval_ces2.
    """
    r1, r2 = (float(r) for r in rates)
    if min(r1, r2) < 0.0:
        raise ValueError("rates must be non-negative")
    if len(p_u.shape) != 1:
        raise FactorizationError("p_u must be a one-axis law")
    nu = p_u.shape[0]
    t1, t2, wt = x1_cond.table, x2_cond.table, channel_cond.table
    if t1.ndim != 2 or t2.ndim != 2 or t1.shape[0] != nu or t2.shape[0] != nu:
        raise FactorizationError("input conditionals must be laid out (|U|, |X|)")
    if wt.ndim != 3 or t1.shape[1] != wt.shape[0] or t2.shape[1] != wt.shape[1]:
        raise FactorizationError("input conditionals do not match the channel alphabet")

    joint = JointPMF([("U", nu)], p_u.probs)
    joint = chain(joint, _cond(t1, [("U", nu)], [("X1", t1.shape[1])]))
    joint = chain(joint, _cond(t2, [("U", nu)], [("X2", t2.shape[1])]))
    joint = chain(joint, _cond(wt, [("X1", wt.shape[0]), ("X2", wt.shape[1])], [("Y", wt.shape[2])]))

    rows = (
        InequalityRecord("rate-1", r1, mutual_information(joint, ("X1",), ("Y",), ("X2", "U"))),
        InequalityRecord("rate-2", r2, mutual_information(joint, ("X2",), ("Y",), ("X1", "U"))),
        InequalityRecord("rate-sum", r1 + r2, mutual_information(joint, ("X1", "X2"), ("Y",))),
    )
    return RegionReport("cl2", rows)


# ---------------------------------------------------------------------------
# three-user layered evaluator


def eval_ces3(source: SourceModel, channel: DMChannel, dist: CESDist) -> RegionReport:
    joint, w_sizes = _with_common_parts(source)
    joint = _chain_layers(
        joint, w_sizes, dist.u123, dist.pair_conds, dist.x_conds,
        channel.input_sizes, channel.transition.table, source.sizes,
    )

    all_u = ("U123", "U12", "U13", "U23")
    rows = []
    for i in (1, 2, 3):
        j, k = sorted({1, 2, 3} - {i})
        rows.append(InequalityRecord(
            f"solo-{i}",
            conditional_entropy(joint, (f"S{i}",), (f"S{j}", f"S{k}")),
            mutual_information(
                joint, (f"X{i}",), ("Y",),
                (f"S{j}", f"S{k}", f"X{j}", f"X{k}") + all_u,
            ),
        ))
    for b in PAIRS:
        i, j = PAIR_USERS[b]
        k = PAIR_COMPLEMENT[b]
        rows.append(InequalityRecord(
            f"pair-{b}",
            conditional_entropy(joint, (f"S{i}", f"S{j}"), (f"S{k}",)),
            mutual_information(
                joint, (f"X{i}", f"X{j}"), ("Y",),
                (f"S{k}", "U123", "U" + _pair_name(i, k), "U" + _pair_name(j, k), f"X{k}"),
            ),
        ))
        rows.append(InequalityRecord(
            f"pair-{b}-wpair",
            conditional_entropy(joint, (f"S{i}", f"S{j}"), (f"S{k}", f"W{b}")),
            mutual_information(
                joint, (f"X{i}", f"X{j}"), ("Y",),
                (f"S{k}", f"W{b}") + all_u + (f"X{k}",),
            ),
        ))
    for subset in W_SUBSETS:
        tag = _subset_tag(subset)
        w_axes = tuple("W" + b for b in subset)
        u_axes = tuple("U" + b for b in subset)
        rows.append(InequalityRecord(
            f"joint-wgroup-{tag}",
            conditional_entropy(joint, ("S1", "S2", "S3"), ("W123",) + w_axes),
            mutual_information(
                joint, ("X1", "X2", "X3"), ("Y",),
                ("W123",) + w_axes + ("U123",) + u_axes,
            ),
        ))
    rows.append(InequalityRecord(
        "sum",
        entropy(joint, ("S1", "S2", "S3")),
        mutual_information(joint, ("X1", "X2", "X3"), ("Y",)),
    ))
    return RegionReport("ces3", tuple(rows))


# ---------------------------------------------------------------------------
# hybrid layered + linear evaluator


def _lin_margin(joint: JointPMF, keep, a: int, b: int, q: int) -> JointPMF:
    """Marginal over keep plus derived TL = aT1+bT2 and VL = aV1+bV2 (mod q)."""
    m = marginalize(joint, tuple(keep) + ("T1", "T2", "V1", "V2"))
    for name, ax1, ax2 in (("TL", "T1", "T2"), ("VL", "V1", "V2")):
        i1, i2 = m.axis_index(ax1), m.axis_index(ax2)
        m = add_derived_axis(
            m, name, q,
            lambda *g, i1=i1, i2=i2: (a * g[i1] + b * g[i2]) % q,
            vectorized=True,
        )
    return m


def eval_hybrid(source: SourceModel, channel: DMChannel, dist: HybridDist) -> RegionReport:
    """Full hybrid condition family; raises if the source admits no additive part."""
    q = dist.q
    additive = additive_common_search(source, q)
    if not additive.found:
        raise ValueError(
            f"source has no additive relabeling over F_{q}; the hybrid family is undefined"
        )
    joint, w_sizes = _with_common_parts(source)
    for i, fn in enumerate(additive.functions, start=1):
        joint = _derive_label_axis(joint, f"T{i}", q, fn, i - 1)
    joint = _chain_layers(
        joint, w_sizes, dist.u123, dist.pair_conds, dist.x_conds,
        channel.input_sizes, channel.transition.table, source.sizes, v_size=q,
    )

    S = ("S1", "S2", "S3")
    X = ("X1", "X2", "X3")
    T = ("T1", "T2", "T3")
    V = ("V1", "V2", "V3")
    all_u = ("U123", "U12", "U13", "U23")
    rows = []
    for i in (1, 2, 3):
        j, k = sorted({1, 2, 3} - {i})
        rows.append(InequalityRecord(
            f"solo-{i}",
            conditional_entropy(joint, (f"S{i}",), (f"S{j}", f"S{k}")),
            mutual_information(
                joint, (f"X{i}",), ("Y",),
                (f"S{j}", f"S{k}") + all_u + V + (f"X{j}", f"X{k}"),
            ),
        ))
    for b, subset in itertools.product(PAIRS, W_SUBSETS):
        tag = _subset_tag(subset)
        i, j = PAIR_USERS[b]
        k = PAIR_COMPLEMENT[b]
        w_axes = tuple("W" + s for s in subset)
        # U_ik and U_jk always participate; the subset adds its own layers.
        u_axes = tuple(dict.fromkeys(
            ("U123", "U" + _pair_name(i, k), "U" + _pair_name(j, k)) + tuple("U" + s for s in subset)
        ))
        rows.append(InequalityRecord(
            f"pair-{b}-wgroup-{tag}",
            conditional_entropy(joint, (f"S{i}", f"S{j}"), (f"S{k}",) + w_axes),
            mutual_information(
                joint, (f"X{i}", f"X{j}"), ("Y",),
                (f"S{k}",) + w_axes + u_axes + (f"V{k}", f"X{k}"),
            ),
        ))
        rows.append(InequalityRecord(
            f"pair-{b}-wgroup-{tag}-t",
            conditional_entropy(joint, (f"S{i}", f"S{j}"), (f"S{k}",) + w_axes + T),
            mutual_information(
                joint, (f"X{i}", f"X{j}"), ("Y",),
                (f"S{k}",) + w_axes + u_axes + T + V + (f"X{k}",),
            ),
        ))
    for subset in W_SUBSETS:
        tag = _subset_tag(subset)
        w_axes = ("W123",) + tuple("W" + s for s in subset)
        u_axes = ("U123",) + tuple("U" + s for s in subset)
        rows.append(InequalityRecord(
            f"joint-wgroup-{tag}-t",
            conditional_entropy(joint, S, w_axes + T),
            mutual_information(joint, X, ("Y",), w_axes + u_axes + T + V),
        ))
    rows.append(InequalityRecord(
        "sum-t",
        conditional_entropy(joint, S, T),
        mutual_information(joint, X, ("Y",), T + V),
    ))
    for a, b2 in itertools.product(range(q), repeat=2):
        if (a, b2) == (0, 0):
            # conditioning on 0*T1+0*T2 is conditioning on a constant
            rows.append(InequalityRecord(
                "sum-lin-00-unconditioned",
                entropy(joint, S),
                mutual_information(joint, X, ("Y",)),
            ))
            continue
        m = _lin_margin(joint, S + X + ("Y",), a, b2, q)
        rows.append(InequalityRecord(
            f"sum-lin-{a}{b2}",
            conditional_entropy(m, S, ("TL",)),
            mutual_information(m, X, ("Y",), ("TL", "VL")),
        ))
    for subset, (a, b2) in itertools.product(W_SUBSETS, itertools.product(range(q), repeat=2)):
        tag = _subset_tag(subset)
        w_axes = ("W123",) + tuple("W" + s for s in subset)
        u_axes = ("U123",) + tuple("U" + s for s in subset)
        if (a, b2) == (0, 0):
            rows.append(InequalityRecord(
                f"joint-wgroup-{tag}-lin-00-unconditioned",
                conditional_entropy(joint, S, w_axes),
                mutual_information(joint, X, ("Y",), w_axes + u_axes),
            ))
            continue
        m = _lin_margin(joint, S + X + ("Y",) + w_axes + u_axes, a, b2, q)
        rows.append(InequalityRecord(
            f"joint-wgroup-{tag}-lin-{a}{b2}",
            conditional_entropy(m, S, w_axes + ("TL",)),
            mutual_information(m, X, ("Y",), w_axes + u_axes + ("TL", "VL")),
        ))
    return RegionReport("hybrid", tuple(rows))


def _shared_rows() -> tuple[tuple[str, str], ...]:
    pairs = [(f"solo-{i}", f"solo-{i}") for i in (1, 2, 3)]
    pairs += [(f"pair-{b}-wgroup-none", f"pair-{b}") for b in PAIRS]
    pairs += [(f"pair-{b}-wgroup-{b}", f"pair-{b}-wpair") for b in PAIRS]
    pairs.append(("sum-lin-00-unconditioned", "sum"))
    pairs += [
        (f"joint-wgroup-{_subset_tag(s)}-lin-00-unconditioned", f"joint-wgroup-{_subset_tag(s)}")
        for s in W_SUBSETS
    ]
    return tuple(pairs)


# (hybrid id, layered id) rows that coincide whenever X_i is independent of V_i
HYBRID_CES3_SHARED = _shared_rows()


# ---------------------------------------------------------------------------
# quaternary example: thresholds and frontier


def _noise_entropy(delta: float) -> float:
    return entropy(JointPMF([("N", 4)], quaternary_noise_law(delta)))


def eta1(alpha: float, delta: float) -> float:
    """Entropy cost H((E + N) mod 4) - H(N) of a Bernoulli(alpha) corruption."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    noise = quaternary_noise_law(delta)
    base = JointPMF([("E", 2), ("N", 4)], np.outer([1.0 - alpha, alpha], noise))
    image = push_forward(base, lambda e, n: ((e + n) % 4,), [("Z", 4)], vectorized=True)
    return entropy(image) - _noise_entropy(delta)


def eta2(alpha: float, delta: float) -> float:
    """Output-uniformity penalty 2 - H(((V xor E) + V + N) mod 4)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    noise = quaternary_noise_law(delta)
    probs = np.multiply.outer([0.5, 0.5], np.outer([1.0 - alpha, alpha], noise))
    base = JointPMF([("V", 2), ("E", 2), ("N", 4)], probs)
    image = push_forward(
        base, lambda v, e, n: (((v ^ e) + v + n) % 4,), [("Z", 4)], vectorized=True
    )
    return 2.0 - entropy(image)


def gamma_star(delta: float) -> float:
    """Bias threshold: h_b inverse of the structured-input information 2 - H(N)."""
    return binary_entropy_inverse(2.0 - _noise_entropy(delta))


def example_conditions(sigma: float, gamma: float, delta: float, alpha: float) -> RegionReport:
    """Reduced three-row report of the X1 = V1 xor E1 construction."""
    for name, val in (("sigma", sigma), ("gamma", gamma)):
        if not 0.0 <= val <= 0.5:
            raise ValueError(f"{name} must lie in [0, 1/2]")
    cap = 2.0 - _noise_entropy(delta)
    hg = binary_entropy(gamma)
    hs = binary_entropy(sigma)
    rows = (
        InequalityRecord("gamma-line", hg, (1.0 - alpha) * cap),
        InequalityRecord("sigma-line", hs, eta1(alpha, delta)),
        InequalityRecord("sum-line", hg + hs, cap - eta2(alpha, delta)),
    )
    return RegionReport("frontier-example", rows)


@dataclass(frozen=True)
class FrontierPoint:
    gamma: float
    delta: float
    sigma0: float
    alpha: float
    level: float


def _golden_max(f, lo: float, hi: float, iters: int):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    mid = 0.5 * (lo + hi)
    return mid, f(mid)


def sigma0_frontier(gamma: float, delta: float, grid_step: float = 1e-3) -> FrontierPoint:
    """Largest sigma the construction supports at bias gamma.

    Maximizes min(eta1(a), cap - eta2(a) - h_b(gamma)) over the admissible
    corruption rates a, by dense grid plus golden refinement, then inverts
    h_b.  gamma must not exceed gamma_star(delta).
    """
    cap = 2.0 - _noise_entropy(delta)
    gstar = binary_entropy_inverse(cap)
    if gamma > gstar + 1e-12:
        raise ValueError(f"gamma {gamma} exceeds the threshold {gstar}")
    if not 0.0 <= gamma:
        raise ValueError("gamma must be non-negative")
    hg = binary_entropy(min(gamma, 0.5))
    alpha_max = max(0.0, 1.0 - hg / cap)

    def objective(a: float) -> float:
        return min(eta1(a, delta), cap - eta2(a, delta) - hg)

    count = max(2, int(math.ceil(alpha_max / grid_step)) + 1) if alpha_max > 0.0 else 1
    alphas = np.linspace(0.0, alpha_max, count)
    values = np.array([objective(float(a)) for a in alphas])
    best = int(np.argmax(values))
    alpha_hat, level = float(alphas[best]), float(values[best])
    if count > 1:
        lo = float(alphas[max(0, best - 1)])
        hi = float(alphas[min(count - 1, best + 1)])
        a_ref, v_ref = _golden_max(objective, lo, hi, iters=48)
        if v_ref > level:
            alpha_hat, level = a_ref, v_ref
    # At the threshold bias the admissible interval collapses to {0} and the
    # objective is zero up to bisection residue; snap that residue to an
    # exact endpoint rather than reporting h_b^{-1}(1e-13).
    if level <= 1e-11:
        return FrontierPoint(gamma, delta, 0.0, alpha_hat, level)
    return FrontierPoint(gamma, delta, binary_entropy_inverse(level), alpha_hat, level)


# ---------------------------------------------------------------------------
# product-strategy search


@dataclass(frozen=True)
class ProductSearchConfig:
    coarse_step: float = 0.1
    top_k: int = 32
    sweeps: int = 4
    golden_iters: int = 48
    chunk: int = 1 << 18

    def __post_init__(self):
        if not 0.0 < self.coarse_step <= 0.5:
            raise ValueError("coarse_step must lie in (0, 1/2]")
        if self.top_k < 1 or self.sweeps < 1 or self.golden_iters < 1 or self.chunk < 1:
            raise ValueError("search sizes must be positive")


@dataclass(frozen=True)
class ProductSearchResult:
    value: float
    params: tuple[float, ...]
    candidates: tuple


def _mi_kernel(source_probs: np.ndarray, channel_table: np.ndarray):
    """Batch map from 6 flip parameters to I(X1X2X3; Y), in bits.

    Parameter layout per row: (p1|s=0, p1|s=1, p2|s=0, ..., p3|s=1) where
    p_i|s = P(X_i = 1 | S_i = s).
    """
    w = channel_table
    wpos = np.where(w > 0.0, w, 1.0)
    hcond = -(w * np.log2(wpos)).sum(axis=-1)

    def batch(params: np.ndarray) -> np.ndarray:
        cs = [np.stack([1.0 - params[:, 2 * u:2 * u + 2], params[:, 2 * u:2 * u + 2]], axis=2)
              for u in range(3)]
        induced = np.einsum("abc,gaw,gbx,gcy->gwxy", source_probs, cs[0], cs[1], cs[2])
        ylaw = np.einsum("gwxy,wxyz->gz", induced, w)
        hy = -np.where(ylaw > 0.0, ylaw * np.log2(np.where(ylaw > 0.0, ylaw, 1.0)), 0.0).sum(axis=1)
        hyx = np.einsum("gwxy,wxy->g", induced, hcond)
        return hy - hyx

    return batch


def max_product_mi(channel: DMChannel, source: SourceModel,
                   config: ProductSearchConfig | None = None) -> ProductSearchResult:
    """Deterministic maximization of I(inputs; output) over product strategies.

    Coarse 6-dimensional grid, then coordinate-wise golden refinement of
    the best grid points.  candidates holds every refined (value, params)
    pair, best first.
    """
    if channel.input_sizes != (2, 2, 2) or source.sizes != (2, 2, 2):
        raise ValueError("product search expects binary sources and binary channel inputs")
    cfg = config or ProductSearchConfig()
    batch = _mi_kernel(source.joint.probs, channel.transition.table)

    m = int(round(1.0 / cfg.coarse_step)) + 1
    values = np.linspace(0.0, 1.0, m)
    total = m**6
    kept_vals: list[np.ndarray] = []
    kept_params: list[np.ndarray] = []
    for start in range(0, total, cfg.chunk):
        ids = np.arange(start, min(start + cfg.chunk, total), dtype=np.int64)
        params = np.empty((ids.shape[0], 6))
        rest = ids
        for pos in range(5, -1, -1):
            params[:, pos] = values[rest % m]
            rest = rest // m
        vals = batch(params)
        take = min(cfg.top_k, vals.shape[0])
        part = np.argpartition(-vals, take - 1)[:take]
        kept_vals.append(vals[part])
        kept_params.append(params[part])
    all_vals = np.concatenate(kept_vals)
    all_params = np.concatenate(kept_params)
    order = np.argsort(-all_vals, kind="stable")[:cfg.top_k]

    refined = []
    for idx in order:
        p = all_params[idx].copy()
        val = float(all_vals[idx])
        for _ in range(cfg.sweeps):
            for c in range(6):
                lo = max(0.0, p[c] - cfg.coarse_step)
                hi = min(1.0, p[c] + cfg.coarse_step)

                def line(t: float, c=c, p=p) -> float:
                    row = p.copy()
                    row[c] = t
                    return float(batch(row[None, :])[0])

                t_best, v_best = _golden_max(line, lo, hi, cfg.golden_iters)
                if v_best > val:
                    p[c] = t_best
                    val = v_best
        refined.append((val, tuple(float(x) for x in p)))
    refined.sort(key=lambda r: -r[0])
    best_val, best_params = refined[0]
    return ProductSearchResult(best_val, best_params, tuple(refined))


def product_conditionals(params) -> tuple[ConditionalPMF, ConditionalPMF, ConditionalPMF]:
    """Three (|S_i|, |X_i|) = (2, 2) flip conditionals from a 6-parameter row."""
    params = tuple(float(x) for x in params)
    if len(params) != 6 or not all(0.0 <= x <= 1.0 for x in params):
        raise ValueError("params must be six probabilities")
    conds = []
    for u in range(3):
        p0, p1 = params[2 * u], params[2 * u + 1]
        table = np.array([[1.0 - p0, p0], [1.0 - p1, p1]])
        conds.append(_cond(table, [(f"S{u + 1}", 2)], [(f"X{u + 1}", 2)]))
    return tuple(conds)


def product_ces_dist(source: SourceModel, x_tables) -> CESDist:
    """Layered spec with every coordination layer trivial and product inputs."""
    u123 = JointPMF([("U123", 1)], [1.0])
    pair_conds = {}
    for b in PAIRS:
        i, j = PAIR_USERS[b]
        res = gkw_pairwise(marginalize(source.joint, (f"S{i}", f"S{j}")))
        pair_conds[b] = _cond(
            np.ones((res.component_count, 1, 1)),
            [("W" + b, res.component_count), ("U123", 1)],
            [("U" + b, 1)],
        )
    x_conds = []
    for i, raw in enumerate(x_tables, start=1):
        table = np.asarray(raw.table if isinstance(raw, ConditionalPMF) else raw, dtype=np.float64)
        ba, bb = USER_PAIRS[i]
        x_conds.append(_cond(
            table.reshape(table.shape[0], 1, 1, 1, table.shape[-1]),
            [(f"S{i}", table.shape[0]), ("U123", 1), ("U" + ba, 1), ("U" + bb, 1)],
            [(f"X{i}", table.shape[-1])],
        ))
    return CESDist(u123, pair_conds, tuple(x_conds))


def lift_ces_to_hybrid(dist: CESDist, q: int = 2) -> HybridDist:
    """Embed a layered spec by giving every input a vacuous V axis."""
    x_conds = []
    for i in (1, 2, 3):
        t = dist.x_conds[i - 1].table
        lifted = np.broadcast_to(t[:, :, :, :, None, :], t.shape[:4] + (q, t.shape[-1])).copy()
        ba, bb = USER_PAIRS[i]
        x_conds.append(_cond(
            lifted,
            [(f"S{i}", t.shape[0]), ("U123", t.shape[1]), ("U" + ba, t.shape[2]),
             ("U" + bb, t.shape[3]), (f"V{i}", q)],
            [(f"X{i}", t.shape[-1])],
        ))
    return HybridDist(q, dist.u123, dist.pair_conds, tuple(x_conds))


def hybrid_example_dist(source: SourceModel, alpha: float) -> HybridDist:
    """The binary construction X1 = V1 xor E1 (E1 ~ Ber(alpha)), X2 = V2, X3 = V3."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    u123 = JointPMF([("U123", 1)], [1.0])
    pair_conds = {}
    for b in PAIRS:
        i, j = PAIR_USERS[b]
        res = gkw_pairwise(marginalize(source.joint, (f"S{i}", f"S{j}")))
        pair_conds[b] = _cond(
            np.ones((res.component_count, 1, 1)),
            [("W" + b, res.component_count), ("U123", 1)],
            [("U" + b, 1)],
        )
    x_conds = []
    for i in (1, 2, 3):
        ns = source.sizes[i - 1]
        table = np.zeros((ns, 1, 1, 1, 2, 2))
        for v in range(2):
            if i == 1:
                table[:, 0, 0, 0, v, v] = 1.0 - alpha
                table[:, 0, 0, 0, v, v ^ 1] = alpha
            else:
                table[:, 0, 0, 0, v, v] = 1.0
        ba, bb = USER_PAIRS[i]
        x_conds.append(_cond(
            table,
            [(f"S{i}", ns), ("U123", 1), ("U" + ba, 1), ("U" + bb, 1), (f"V{i}", 2)],
            [(f"X{i}", 2)],
        ))
    return HybridDist(2, u123, pair_conds, tuple(x_conds))


# ---------------------------------------------------------------------------
# total-variation separation


def structured_pair_joint(p00: float, p01: float) -> JointPMF:
    """Member of the structured family: X3 = X1 xor X2 a.s. with X3 uniform."""
    for v in (p00, p01):
        if not 0.0 <= v <= 0.5:
            raise ValueError("cell masses must lie in [0, 1/2]")
    probs = np.zeros((2, 2, 2))
    probs[0, 0, 0] = p00
    probs[1, 1, 0] = 0.5 - p00
    probs[0, 1, 1] = p01
    probs[1, 0, 1] = 0.5 - p01
    return JointPMF([("X1", 2), ("X2", 2), ("X3", 2)], probs)


def min_tv_to_structured(input_joint: JointPMF, grid_step: float = 1.0 / 400.0):
    """Grid minimum of TV(input law, structured member) and its argmin.

    The structured family has two free cell masses, gridded over [0, 1/2].
    """
    if input_joint.shape != (2, 2, 2):
        raise ValueError("input law must be over three binary axes")
    p = input_joint.probs
    a00, a11, a01, a10 = p[0, 0, 0], p[1, 1, 0], p[0, 1, 1], p[1, 0, 1]
    off = 1.0 - (a00 + a11 + a01 + a10)
    m = int(round(0.5 / grid_step)) + 1
    g = np.linspace(0.0, 0.5, m)
    d_a = np.abs(a00 - g) + np.abs(a11 - (0.5 - g))
    d_b = np.abs(a01 - g) + np.abs(a10 - (0.5 - g))
    tv = 0.5 * (off + d_a[:, None] + d_b[None, :])
    flat = int(np.argmin(tv))
    i, j = divmod(flat, m)
    return float(tv[i, j]), (float(g[i]), float(g[j]))


@dataclass(frozen=True)
class TVSample:
    sigma: float
    gamma: float
    params: tuple[float, ...]
    tv: float


@dataclass(frozen=True)
class TVBoundReport:
    delta: float
    gamma_star: float
    bound: float
    grid_slack: float
    samples: tuple[TVSample, ...]
    min_tv: float

    @property
    def satisfied(self) -> bool:
        return self.min_tv >= self.bound - self.grid_slack


def tv_bound_check(delta: float, sample_count: int, seed: int,
                   grid_step: float = 1.0 / 400.0) -> TVBoundReport:
    """Sampled check that product strategies stay TV-far from structured laws.

    Each sample draws a non-degenerate source (sigma in (0, 1/2], gamma in
    (0, gamma_star]) and random flip conditionals, forms the induced input
    law, and measures its grid-minimum TV distance to the structured family.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    gstar = gamma_star(delta)
    bound = 1.0 / 6.0 - gstar / 3.0
    rng = stream(seed, 40)
    samples = []
    for _ in range(sample_count):
        sigma = 0.5 * (1.0 - float(rng.random()))
        gamma = gstar * (1.0 - float(rng.random()))
        params = rng.random(6)
        source = make_sigma_gamma_triple(sigma, gamma)
        cs = [np.array([[1.0 - params[2 * u], params[2 * u]],
                        [1.0 - params[2 * u + 1], params[2 * u + 1]]]) for u in range(3)]
        induced = np.einsum("abc,aw,bx,cy->wxy", source.joint.probs, cs[0], cs[1], cs[2])
        law = JointPMF([("X1", 2), ("X2", 2), ("X3", 2)], induced)
        tv, _ = min_tv_to_structured(law, grid_step)
        samples.append(TVSample(sigma, gamma, tuple(float(x) for x in params), tv))
    min_tv = min(s.tv for s in samples)
    return TVBoundReport(delta, gstar, bound, grid_step, tuple(samples), min_tv)


def linear_threshold(p: float, delta: float) -> bool:
    """Whether a doubly-symmetric bias-p pair fits through the erasure-like MAC."""
    if not 0.0 <= p <= 0.5 or not 0.0 <= delta <= 0.5:
        raise ValueError("p and delta must lie in [0, 1/2]")
    return (1.0 - binary_entropy(delta)) - binary_entropy(p) >= SLACK_FLOOR


# ---------------------------------------------------------------------------
# feedback block conditions


def default_coupling_matrix(q: int) -> tuple[tuple[int, ...], ...]:
    """Zero-sum-preserving coupling: V = (T1, T2, -(T1 + T2)) from the prior block."""
    return ((1, 0, q - 1), (0, 1, q - 1), (0, 0, 0))


class _EntropyLedger:
    """Memoized group entropies over one joint, with lazily derived axes.

    derived maps an axis name to (base axis names, coefficients, modulus);
    the axis is materialized on a marginal, never on the full joint.
    """

    def __init__(self, joint: JointPMF, derived: dict | None = None):
        self._joint = joint
        self._derived = dict(derived or {})
        self._axes = set(joint.names)
        self.terms: dict[frozenset, float] = {}

    def entropy_of(self, group) -> float:
        key = frozenset(group)
        if key in self.terms:
            return self.terms[key]
        lifted = sorted(n for n in key if n in self._derived)
        plain = sorted(n for n in key if n not in self._derived)
        if any(n not in self._axes for n in plain):
            missing = [n for n in plain if n not in self._axes]
            raise KeyError(f"unknown axes {missing}")
        if not lifted:
            val = entropy(self._joint, tuple(plain))
        else:
            base_needed = sorted(set(plain) | {b for n in lifted for b in self._derived[n][0]})
            m = marginalize(self._joint, tuple(base_needed))
            for n in lifted:
                base, coeffs, q = self._derived[n]
                idx = tuple(m.axis_index(x) for x in base)
                m = add_derived_axis(
                    m, n, q,
                    lambda *g, idx=idx, coeffs=coeffs, q=q:
                        sum(int(c) * g[i] for i, c in zip(idx, coeffs)) % q,
                    vectorized=True,
                )
            val = entropy(m, tuple(sorted(key)))
        self.terms[key] = val
        return val

    def mi(self, a, b, given=()):
        """I(a; b | given) and its signed entropy-group decomposition."""
        a, b, g = frozenset(a), frozenset(b), frozenset(given)
        groups = ((1, a | g), (1, b | g), (-1, a | b | g), (-1, g))
        val = sum(sign * self.entropy_of(grp) for sign, grp in groups)
        if val < 0.0:
            if val < MI_CLAMP:
                raise ValueError(f"mutual information {val!r} below round-off clamp")
            val = 0.0
        return val, groups


@dataclass(frozen=True)
class MacFBReport(RegionReport):
    """Feedback-block report plus the tensors and terms behind every row.

    entropy_terms / w_entropy_terms map frozen axis groups to bits;
    mi_groups / w_groups map a row id to ((sign, group), ...) so each side
    can be recomputed term by term; derived_axes describes the linear axes
    (TA*, WA*) as {"base": names, "coeffs": ints, "q": modulus}.
    """

    joint: JointPMF
    w_joint: JointPMF
    entropy_terms: dict
    w_entropy_terms: dict
    mi_groups: dict
    w_groups: dict
    derived_axes: dict
    alpha: float


def _rename(table: np.ndarray, given, target) -> ConditionalPMF:
    return ConditionalPMF(given, target, table)


def eval_macfb(rates, alpha: float, dist: MacFBDist, channel: DMChannel,
               a_matrix=None, w_laws=None) -> MacFBReport:
    """Feedback block conditions from the two-copy joint.

    The previous block (axes suffixed t) is a full class member; the
    current block reuses its T axes through V = T_prior @ A.  rates are
    matched against alpha * H(W_i) as equalities; the remaining rows bound
    scaled W entropies by mutual informations on the two-copy joint.
    """
    rates = tuple(float(r) for r in rates)
    if len(rates) != 3 or min(rates) < 0.0:
        raise ValueError("rates must be three non-negative numbers")
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    q = dist.q
    nu = dist.p_u.shape[0]
    for i in (1, 2, 3):
        if dist.x_conds[i - 1].table.shape[-1] != channel.input_sizes[i - 1]:
            raise FactorizationError(
                f"x{i} conditional does not match channel input {i}"
            )

    a_arr = np.asarray(a_matrix if a_matrix is not None else default_coupling_matrix(q), dtype=np.int64)
    if a_arr.shape != (3, 3) or a_arr.min() < 0 or a_arr.max() >= q:
        raise FactorizationError("coupling matrix must be 3x3 over the field residues")
    plane = _plane_probs(q)
    pushed = push_forward(
        JointPMF([("T1", q), ("T2", q), ("T3", q)], _uniform_cube(q)),
        lambda t1, t2, t3: tuple((t1 * a_arr[0, c] + t2 * a_arr[1, c] + t3 * a_arr[2, c]) % q
                                 for c in range(3)),
        [("V1", q), ("V2", q), ("V3", q)],
        vectorized=True,
    )
    if np.abs(pushed.probs - plane).max() > FACTOR_TOL:
        raise FactorizationError("coupling matrix does not preserve the zero-sum V law")

    if w_laws is None:
        w_laws = tuple(np.full(q, 1.0 / q) for _ in range(3))
    if len(w_laws) != 3:
        raise ValueError("w_laws must hold one law per user")
    w_joint = JointPMF(
        [("W1", q), ("W2", q), ("W3", q)],
        np.einsum("a,b,c->abc", *(np.asarray(w, dtype=np.float64) for w in w_laws)),
    )
    for i in (1, 2, 3):
        col = a_arr[:, i - 1]
        w_joint = add_derived_axis(
            w_joint, f"WA{i}", q,
            lambda w1, w2, w3, *_, col=col:
                (w1 * int(col[0]) + w2 * int(col[1]) + w3 * int(col[2])) % q,
            vectorized=True,
        )

    # two-copy joint: prior block first, then the current one
    joint = JointPMF([("Ut", nu)], dist.p_u.probs)
    joint = chain(joint, _indep([("V1t", q), ("V2t", q), ("V3t", q)], plane))
    joint = chain(joint, _indep([("T1t", q), ("T2t", q), ("T3t", q)], _uniform_cube(q)))
    for i in (1, 2, 3):
        t = dist.x_conds[i - 1].table
        joint = chain(joint, _rename(
            t, [("Ut", nu), (f"T{i}t", q), (f"V{i}t", q)], [(f"X{i}t", t.shape[-1])]
        ))
    ct = channel.transition.table
    joint = chain(joint, _rename(
        ct, [(f"X{i}t", channel.input_sizes[i - 1]) for i in (1, 2, 3)], [("Yt", ct.shape[-1])]
    ))
    joint = chain(joint, _indep([("U", nu)], dist.p_u.probs))
    vmap = deterministic_conditional(
        [(f"T{i}t", q) for i in (1, 2, 3)],
        [(f"V{i}", q) for i in (1, 2, 3)],
        lambda t1, t2, t3: tuple((t1 * a_arr[0, c] + t2 * a_arr[1, c] + t3 * a_arr[2, c]) % q
                                 for c in range(3)),
        vectorized=True,
    )
    joint = chain(joint, vmap)
    joint = chain(joint, _indep([("T1", q), ("T2", q), ("T3", q)], _uniform_cube(q)))
    for i in (1, 2, 3):
        t = dist.x_conds[i - 1].table
        joint = chain(joint, _rename(
            t, [("U", nu), (f"T{i}", q), (f"V{i}", q)], [(f"X{i}", t.shape[-1])]
        ))
    joint = chain(joint, _rename(
        ct, [(f"X{i}", channel.input_sizes[i - 1]) for i in (1, 2, 3)], [("Y", ct.shape[-1])]
    ))

    derived = {
        f"TA{i}": (("T1", "T2", "T3"), tuple(int(c) for c in a_arr[:, i - 1]), q)
        for i in (1, 2, 3)
    }
    derived_axes = {
        name: {"base": base, "coeffs": coeffs, "q": mod}
        for name, (base, coeffs, mod) in derived.items()
    }
    for i in (1, 2, 3):
        derived_axes[f"WA{i}"] = {
            "base": ("W1", "W2", "W3"),
            "coeffs": tuple(int(c) for c in a_arr[:, i - 1]),
            "q": q,
        }
    ledger = _EntropyLedger(joint, derived)
    w_ledger = _EntropyLedger(w_joint)

    rows = []
    mi_groups: dict[str, tuple] = {}
    w_groups: dict[str, tuple] = {}

    def w_entropy(target, given=()):
        tg, gg = frozenset(target), frozenset(given)
        groups = ((1, tg | gg),) if not gg else ((1, tg | gg), (-1, gg))
        return sum(s * w_ledger.entropy_of(grp) for s, grp in groups), groups

    for i in (1, 2, 3):
        lhs, groups = w_entropy((f"W{i}",))
        rows.append(InequalityRecord(f"rate-match-{i}", alpha * lhs, rates[i - 1], equality=True))
        w_groups[f"rate-match-{i}"] = groups
        mi_groups[f"rate-match-{i}"] = ()

    for i in (1, 2, 3):
        lhs, groups = w_entropy((f"WA{i}",), (f"W{i}",))
        rhs, gmi = ledger.mi((f"TA{i}",), ("Y",), ("U", f"T{i}", f"V{i}", f"X{i}"))
        rid = f"sum-decode-{i}"
        rows.append(InequalityRecord(rid, alpha * lhs, rhs))
        w_groups[rid] = groups
        mi_groups[rid] = gmi

    for i in (1, 2, 3):
        j, k = sorted({1, 2, 3} - {i})
        lhs, groups = w_entropy((f"W{j}", f"W{k}"), (f"WA{i}", f"W{i}"))
        rhs, gmi = ledger.mi(
            (f"T{j}t", f"X{j}t", f"T{k}t", f"X{k}t"),
            ("Y", "Yt"),
            ("Ut", f"X{i}t", f"T{i}t", f"V{i}t", "U", f"X{i}", f"T{i}", f"V{i}",
             f"V{j}t", f"V{k}t"),
        )
        rid = f"cross-pair-{i}"
        rows.append(InequalityRecord(rid, alpha * lhs, rhs))
        w_groups[rid] = groups
        mi_groups[rid] = gmi

    for subset in USER_SUBSETS:
        tag = _subset_tag(subset)
        rid = f"list-{tag}"
        if subset:
            lhs, groups = w_entropy(tuple(f"W{i}" for i in subset))
        else:
            lhs, groups = 0.0, ()
        rest = tuple(sorted({1, 2, 3} - set(subset)))
        given = ("U",) + tuple(f"{ax}{i}" for i in rest for ax in ("X", "T", "V"))
        given = given + ("V1t", "V2t", "V3t")
        rhs1, gmi1 = ledger.mi(tuple(f"X{i}" for i in subset), ("Y",), given)
        rhs2, gmi2 = ledger.mi(("U",), ("Y",))
        rows.append(InequalityRecord(rid, alpha * lhs, rhs1 + rhs2))
        w_groups[rid] = groups
        mi_groups[rid] = gmi1 + gmi2

    return MacFBReport(
        "macfb", tuple(rows), joint, w_joint,
        dict(ledger.terms), dict(w_ledger.terms), mi_groups, w_groups, derived_axes, alpha,
    )
