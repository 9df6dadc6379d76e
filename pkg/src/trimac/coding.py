"""Block coding schemes for the three-user MAC with correlated sources.

Four scheme families:

  * linear: identical affine maps x_i = s_i G + b_i with one shared square
    uniform matrix and zero-sum offsets, so the transmitted triple is
    zero-sum at every position;
  * unstructured: independent random codebooks, one codeword per source
    block, entries drawn symbolwise from per-user conditionals;
  * layered (conferencing): superposition codebooks on the mutual and
    pairwise common parts, then per-user codewords conditioned on the
    cloud centers;
  * hybrid: the layered construction plus an affine layer on the additive
    common part, with per-user codewords conditioned additionally on the
    affine layer.

All encoders are deterministic given (scheme seed, block content), so a
decoder can re-expand any candidate block.  Decoders return a DecodeResult;
ties and empty typical sets are failures, never silent guesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import DMChannel
from .commonparts import additive_common_search, gkw_mutual, gkw_pairwise
from .probcore import (
    ConditionalPMF,
    JointPMF,
    chain,
    deterministic_conditional,
    marginalize,
)
from .rng import stream
from .sources import SourceModel, sample_iid

__all__ = [
    "CodingScheme",
    "DecodeResult",
    "SimReport",
    "build_linear_jscc",
    "build_unstructured_jscc",
    "build_layered_ces",
    "build_hybrid_scheme",
    "ml_decode",
    "ml_decode_additive_pair",
    "typicality_decode",
    "monte_carlo_error",
    "wilson_interval",
]

MAX_CANDIDATES = 2**26
PAIRS = ("12", "13", "23")
# the two pair labels involving each user, lexicographic
USER_PAIRS = {1: ("12", "13"), 2: ("12", "23"), 3: ("13", "23")}


@dataclass
class CodingScheme:
    kind: str
    n: int
    source: SourceModel
    per_user: tuple[Callable, Callable, Callable]
    design_joint_builder: Callable[[DMChannel], JointPMF]
    layer_blocks: Callable
    meta: dict = field(default_factory=dict)

    def encode(self, s1, s2, s3):
        return tuple(f(np.asarray(s)) for f, s in zip(self.per_user, (s1, s2, s3)))

    def design_joint(self, channel: DMChannel) -> JointPMF:
        return self.design_joint_builder(channel)


@dataclass(frozen=True)
class DecodeResult:
    blocks: tuple | None
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _sub_seed(seed: int, *path: int) -> int:
    return int(stream(seed, *path).integers(0, 2**62))


def _zero_sum_input_law(q: int) -> JointPMF:
    probs = np.zeros((q, q, q))
    for a in range(q):
        for b in range(q):
            probs[a, b, (-a - b) % q] = 1.0 / (q * q)
    return JointPMF([("X1", q), ("X2", q), ("X3", q)], probs)


def build_linear_jscc(source: SourceModel, q: int, n: int, seed: int) -> CodingScheme:
    """Identical affine scheme: one uniform n x n matrix, zero-sum offsets."""
    if any(s > q for s in source.sizes):
        raise ValueError("source symbols must embed into Z_q")
    if n < 1:
        raise ValueError("block length must be positive")
    g = stream(seed, 0).integers(0, q, size=(n, n))
    off_rng = stream(seed, 1)
    b1 = off_rng.integers(0, q, size=n)
    b2 = off_rng.integers(0, q, size=n)
    offsets = (b1, b2, (-(b1 + b2)) % q)

    def make_encoder(b):
        def enc(s):
            return (np.asarray(s, dtype=np.int64) @ g + b) % q

        return enc

    def design_builder(channel: DMChannel) -> JointPMF:
        base = chain(source.joint, ConditionalPMF.from_joint(_zero_sum_input_law(q)))
        return chain(base, channel.transition)

    return CodingScheme(
        kind="linear-jscc",
        n=n,
        source=source,
        per_user=tuple(make_encoder(b) for b in offsets),
        design_joint_builder=design_builder,
        layer_blocks=lambda s1, s2, s3: {},
        meta={"q": q, "matrix": g, "offsets": offsets, "seed": seed},
    )


class _CodebookCache:
    """Content-addressed symbolwise codeword draws.

    The stream for a codeword is derived from (scheme seed, layer tag, block
    digits), so repeated queries agree and query order is irrelevant.
    """

    def __init__(self, seed: int, tag: int):
        self.seed = seed
        self.tag = tag
        self.memo: dict[bytes, np.ndarray] = {}

    def lookup(self, content: tuple[np.ndarray, ...], draw) -> np.ndarray:
        key = b"".join(np.ascontiguousarray(c, dtype=np.int64).tobytes() for c in content)
        hit = self.memo.get(key)
        if hit is None:
            digits = np.concatenate([np.asarray(c).ravel() for c in content]).astype(int)
            rng = stream(self.seed, self.tag, *digits.tolist())
            hit = draw(rng)
            self.memo[key] = hit
        return hit


def _draw_rows(rng: np.random.Generator, table: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """One symbol per row-index from a conditional table; rows is 1-D."""
    cdf = np.cumsum(table, axis=-1)
    picked = cdf[tuple(rows.T)] if rows.ndim > 1 else cdf[rows]
    u = rng.random(picked.shape[0])
    return (picked < u[:, None]).sum(axis=1).astype(np.int64)


def build_unstructured_jscc(source: SourceModel, conditionals, n: int, seed: int) -> CodingScheme:
    """Independent random codebooks with symbolwise conditional draws."""
    tables = [np.asarray(t, dtype=np.float64) for t in conditionals]
    if len(tables) != 3:
        raise ValueError("need three conditional tables")
    for t, s in zip(tables, source.sizes):
        if t.ndim != 2 or t.shape[0] != s:
            raise ValueError("conditional rows must match source alphabet")
        if np.abs(t.sum(axis=1) - 1.0).max() > 1e-12:
            raise ValueError("conditional rows must sum to 1")
    caches = [_CodebookCache(seed, i) for i in range(3)]

    def make_encoder(i):
        table = tables[i]

        def encode_one(block: np.ndarray) -> np.ndarray:
            return caches[i].lookup(
                (block,), lambda rng: _draw_rows(rng, table, block)
            )

        def enc(s):
            s = np.asarray(s, dtype=np.int64)
            if s.ndim == 1:
                return encode_one(s)
            return np.stack([encode_one(row) for row in s])

        return enc

    def design_builder(channel: DMChannel) -> JointPMF:
        out = source.joint
        for i in range(3):
            cond = ConditionalPMF(
                [(f"S{i + 1}", source.sizes[i])],
                [(f"X{i + 1}", tables[i].shape[1])],
                tables[i],
            )
            out = chain(out, cond)
        return chain(out, channel.transition)

    return CodingScheme(
        kind="unstructured-jscc",
        n=n,
        source=source,
        per_user=tuple(make_encoder(i) for i in range(3)),
        design_joint_builder=design_builder,
        layer_blocks=lambda s1, s2, s3: {},
        meta={"conditionals": tables, "seed": seed},
    )


def _conferencing_parts(source: SourceModel):
    """GKW labelings: mutual part and the three pairwise parts."""
    mutual = gkw_mutual(source)
    pair_parts = {}
    for b in PAIRS:
        i, j = int(b[0]), int(b[1])
        pair_parts[b] = gkw_pairwise(marginalize(source.joint, (f"S{i}", f"S{j}")))
    return mutual, pair_parts


def _pair_side(b: str, user: int) -> int:
    return 0 if int(b[0]) == user else 1


class _LayeredEncoders:
    """Shared machinery for the layered and hybrid schemes."""

    def __init__(self, source, u123_pmf, pair_conds, seed):
        self.source = source
        self.mutual, self.pair_parts = _conferencing_parts(source)
        self.u123_pmf = np.asarray(u123_pmf.probs, dtype=np.float64)
        self.pair_tables = {b: np.asarray(pair_conds[b].table) for b in PAIRS}
        for b in PAIRS:
            tab = self.pair_tables[b]
            want = self.pair_parts[b].component_count
            if tab.ndim != 3 or tab.shape[0] != want:
                raise ValueError(
                    f"pair layer {b}: conditional must be indexed by the {want} "
                    "common-part labels and the shared layer symbol"
                )
            if tab.shape[1] != self.u123_pmf.shape[0]:
                raise ValueError(f"pair layer {b}: shared-layer axis size mismatch")
        self.cache_u123 = _CodebookCache(seed, 4)
        self.cache_pair = {b: _CodebookCache(seed, 5 + k) for k, b in enumerate(PAIRS)}

    def w_blocks(self, user: int, s_block: np.ndarray) -> dict:
        out = {"W123": np.asarray(self.mutual.labelings[user - 1])[s_block]}
        for b in USER_PAIRS[user]:
            side = _pair_side(b, user)
            out[f"W{b}"] = np.asarray(self.pair_parts[b].labelings[side])[s_block]
        return out

    def u123_block(self, w123: np.ndarray) -> np.ndarray:
        return self.cache_u123.lookup(
            (w123,),
            lambda rng: _draw_rows(rng, np.broadcast_to(self.u123_pmf, (1, self.u123_pmf.size)),
                                   np.zeros(w123.shape[0], dtype=np.int64)),
        )

    def pair_block(self, b: str, w_b: np.ndarray, u123: np.ndarray) -> np.ndarray:
        table = self.pair_tables[b]
        return self.cache_pair[b].lookup(
            (w_b, u123),
            lambda rng: _draw_rows(rng, table, np.stack([w_b, u123], axis=1)),
        )

    def cloud_blocks(self, user: int, s_block: np.ndarray) -> dict:
        blocks = self.w_blocks(user, s_block)
        u123 = self.u123_block(blocks["W123"])
        blocks["U123"] = u123
        for b in USER_PAIRS[user]:
            blocks[f"U{b}"] = self.pair_block(b, blocks[f"W{b}"], u123)
        return blocks

    def design_base(self) -> JointPMF:
        """P(S, W layers, U layers), before any per-user input layer."""
        out = self.source.joint
        labels = self.mutual.labelings[0]
        out = chain(
            out,
            deterministic_conditional(
                [("S1", self.source.sizes[0])],
                [("W123", self.mutual.component_count)],
                lambda s: np.asarray(labels)[s],
                vectorized=True,
            ),
        )
        for b in PAIRS:
            anchor_user = int(b[0])
            side_labels = np.asarray(self.pair_parts[b].labelings[0])
            out = chain(
                out,
                deterministic_conditional(
                    [(f"S{anchor_user}", self.source.sizes[anchor_user - 1])],
                    [(f"W{b}", self.pair_parts[b].component_count)],
                    lambda s, lab=side_labels: lab[s],
                    vectorized=True,
                ),
            )
        out = chain(
            out,
            ConditionalPMF((), [("U123", self.u123_pmf.shape[0])], self.u123_pmf),
        )
        for b in PAIRS:
            tab = self.pair_tables[b]
            out = chain(
                out,
                ConditionalPMF(
                    [(f"W{b}", tab.shape[0]), ("U123", tab.shape[1])],
                    [(f"U{b}", tab.shape[2])],
                    tab,
                ),
            )
        return out


def _check_refactorization(design: JointPMF, conds: list[tuple[ConditionalPMF, tuple[str, ...], str]]):
    """Numerical factorization check at 1e-9: each supplied conditional must
    be recoverable from the composed design wherever the givens have mass."""
    for cond, given, target in conds:
        joint = marginalize(design, given + (target,))
        g = joint.probs.reshape(-1, joint.shape[-1])
        mass = g.sum(axis=1)
        table = cond.table.reshape(-1, joint.shape[-1])
        ok = mass > 0
        ratio = g[ok] / mass[ok, None]
        if np.abs(ratio - table[ok]).max() > 1e-9:
            raise ValueError(f"design does not factor through the supplied {target} conditional")


def build_layered_ces(source: SourceModel, dist, n: int, seed: int) -> CodingScheme:
    """Conferencing superposition scheme from a CES distribution spec.

    dist must expose u123 (a one-axis JointPMF), pair_conds (dict over
    "12","13","23" of ConditionalPMF given (W_b, U123)), and x_conds (three
    ConditionalPMF given (S_i, U123, U_ij, U_ik)).
    """
    layers = _LayeredEncoders(source, dist.u123, dist.pair_conds, seed)
    x_tables = [np.asarray(dist.x_conds[i].table) for i in range(3)]
    caches = [_CodebookCache(seed, 10 + i) for i in range(3)]

    def make_encoder(user):
        table = x_tables[user - 1]

        def encode_one(block):
            cloud = layers.cloud_blocks(user, block)
            rows = np.stack(
                (block, cloud["U123"],
                 cloud[f"U{USER_PAIRS[user][0]}"], cloud[f"U{USER_PAIRS[user][1]}"]),
                axis=1,
            )
            return caches[user - 1].lookup(
                (block,), lambda rng: _draw_rows(rng, table, rows)
            )

        def enc(s):
            s = np.asarray(s, dtype=np.int64)
            if s.ndim == 1:
                return encode_one(s)
            return np.stack([encode_one(row) for row in s])

        return enc

    def layer_blocks(s1, s2, s3):
        out = {}
        for user, block in ((1, s1), (2, s2), (3, s3)):
            cloud = layers.cloud_blocks(user, np.asarray(block, dtype=np.int64))
            for name, arr in cloud.items():
                out.setdefault(name, arr)
        return out

    def design_builder(channel: DMChannel) -> JointPMF:
        out = layers.design_base()
        for user in (1, 2, 3):
            cond = dist.x_conds[user - 1]
            bj, bk = USER_PAIRS[user]
            out = chain(
                out,
                ConditionalPMF(
                    [(f"S{user}", source.sizes[user - 1]),
                     ("U123", layers.u123_pmf.shape[0]),
                     (f"U{bj}", layers.pair_tables[bj].shape[2]),
                     (f"U{bk}", layers.pair_tables[bk].shape[2])],
                    [(f"X{user}", cond.table.shape[-1])],
                    cond.table,
                ),
            )
        _check_refactorization(
            out,
            [(dist.x_conds[u - 1],
              (f"S{u}", "U123", f"U{USER_PAIRS[u][0]}", f"U{USER_PAIRS[u][1]}"),
              f"X{u}") for u in (1, 2, 3)],
        )
        return chain(out, channel.transition)

    return CodingScheme(
        kind="layered-ces",
        n=n,
        source=source,
        per_user=tuple(make_encoder(u) for u in (1, 2, 3)),
        design_joint_builder=design_builder,
        layer_blocks=layer_blocks,
        meta={"seed": seed},
    )


def build_hybrid_scheme(source: SourceModel, dist, n: int, seed: int) -> CodingScheme:
    """Layered scheme plus an affine layer on the additive common part.

    dist additionally exposes q and x_conds given (S_i, U123, U_ij, U_ik, V_i).
    The additive part must exist for the source at modulus q.
    """
    q = dist.q
    additive = additive_common_search(source, q)
    if not additive.found:
        raise ValueError(f"source has no additive common part over Z_{q}")
    fns = [np.asarray(f) for f in additive.functions]
    layers = _LayeredEncoders(source, dist.u123, dist.pair_conds, seed)
    g = stream(seed, 20).integers(0, q, size=(n, n))
    off_rng = stream(seed, 21)
    b1 = off_rng.integers(0, q, size=n)
    b2 = off_rng.integers(0, q, size=n)
    offsets = (b1, b2, (-(b1 + b2)) % q)
    x_tables = [np.asarray(dist.x_conds[i].table) for i in range(3)]
    caches = [_CodebookCache(seed, 10 + i) for i in range(3)]

    def affine_block(user, s_block):
        t = fns[user - 1][s_block]
        return t, (t @ g + offsets[user - 1]) % q

    def make_encoder(user):
        table = x_tables[user - 1]

        def encode_one(block):
            cloud = layers.cloud_blocks(user, block)
            _, v = affine_block(user, block)
            rows = np.stack(
                (block, cloud["U123"],
                 cloud[f"U{USER_PAIRS[user][0]}"], cloud[f"U{USER_PAIRS[user][1]}"], v),
                axis=1,
            )
            return caches[user - 1].lookup((block,), lambda rng: _draw_rows(rng, table, rows))

        def enc(s):
            s = np.asarray(s, dtype=np.int64)
            if s.ndim == 1:
                return encode_one(s)
            return np.stack([encode_one(row) for row in s])

        return enc

    def layer_blocks(s1, s2, s3):
        out = {}
        for user, block in ((1, s1), (2, s2), (3, s3)):
            block = np.asarray(block, dtype=np.int64)
            cloud = layers.cloud_blocks(user, block)
            for name, arr in cloud.items():
                out.setdefault(name, arr)
            t, v = affine_block(user, block)
            out[f"T{user}"] = t
            out[f"V{user}"] = v
        return out

    def design_builder(channel: DMChannel) -> JointPMF:
        out = layers.design_base()
        for user in (1, 2, 3):
            lab = fns[user - 1]
            out = chain(
                out,
                deterministic_conditional(
                    [(f"S{user}", source.sizes[user - 1])],
                    [(f"T{user}", q)],
                    lambda s, lab=lab: lab[s],
                    vectorized=True,
                ),
            )
        v_law = _zero_sum_input_law(q)
        v_axes = [("V1", q), ("V2", q), ("V3", q)]
        out = chain(out, ConditionalPMF((), v_axes, v_law.probs))
        for user in (1, 2, 3):
            cond = dist.x_conds[user - 1]
            bj, bk = USER_PAIRS[user]
            out = chain(
                out,
                ConditionalPMF(
                    [(f"S{user}", source.sizes[user - 1]),
                     ("U123", layers.u123_pmf.shape[0]),
                     (f"U{bj}", layers.pair_tables[bj].shape[2]),
                     (f"U{bk}", layers.pair_tables[bk].shape[2]),
                     (f"V{user}", q)],
                    [(f"X{user}", cond.table.shape[-1])],
                    cond.table,
                ),
            )
        return chain(out, channel.transition)

    return CodingScheme(
        kind="hybrid",
        n=n,
        source=source,
        per_user=tuple(make_encoder(u) for u in (1, 2, 3)),
        design_joint_builder=design_builder,
        layer_blocks=layer_blocks,
        meta={
            "q": q,
            "matrix": g,
            "offsets": offsets,
            "additive_functions": additive.functions,
            "seed": seed,
        },
    )


def _candidate_space(source: SourceModel, n: int):
    """All support^n candidate triples, mixed-radix over the support list."""
    support = source.support()
    m = support.shape[0]
    total = m**n
    if total > MAX_CANDIDATES:
        raise ValueError(f"candidate space {total} exceeds the {MAX_CANDIDATES} guard")
    return support, m, total


def _digits_chunk(start: int, stop: int, m: int, n: int) -> np.ndarray:
    ids = np.arange(start, stop, dtype=np.int64)
    out = np.empty((ids.shape[0], n), dtype=np.int64)
    rest = ids.copy()
    for pos in range(n - 1, -1, -1):
        out[:, pos] = rest % m
        rest //= m
    return out


_BINARY_WORDS: dict[int, np.ndarray] = {}


def _binary_words(n: int) -> np.ndarray:
    """All of {0,1}^n as rows, cached; read-only."""
    hit = _BINARY_WORDS.get(n)
    if hit is None:
        hit = _digits_chunk(0, 2**n, 2, n)
        hit.setflags(write=False)
        _BINARY_WORDS[n] = hit
    return hit


def ml_decode(channel: DMChannel, scheme: CodingScheme, y_block) -> DecodeResult:
    """Exact maximum a posteriori block decoding over the support candidates.

    Zero-prior blocks can never be the argmax, so enumerating support^n is
    exhaustive.  An exact score tie is a decode failure.
    """
    y = np.asarray(y_block, dtype=np.int64)
    n = y.shape[0]
    if n != scheme.n:
        raise ValueError("block length mismatch")
    support, m, total = _candidate_space(scheme.source, n)
    with np.errstate(divide="ignore"):
        log_t = np.log(channel.transition.table)
        log_prior = np.log(scheme.source.support_probs())

    best_score = -np.inf
    best_digits = None
    tie = False
    chunk = 1 << 18
    for start in range(0, total, chunk):
        digits = _digits_chunk(start, min(start + chunk, total), m, n)
        s1, s2, s3 = (support[:, i][digits] for i in range(3))
        x1, x2, x3 = scheme.encode(s1, s2, s3)
        scores = log_t[x1, x2, x3, y].sum(axis=1) + log_prior[digits].sum(axis=1)
        top = int(np.argmax(scores))
        top_score = float(scores[top])
        count = int((scores == top_score).sum())
        if top_score > best_score:
            best_score = top_score
            best_digits = digits[top]
            tie = count > 1
        elif top_score == best_score:
            tie = True
    if best_score == -np.inf:
        return DecodeResult(None, "zero-likelihood")
    if tie:
        return DecodeResult(None, "tie")
    s = tuple(support[:, i][best_digits] for i in range(3))
    return DecodeResult(s)


def ml_decode_additive_pair(channel: DMChannel, scheme: CodingScheme, y_block) -> DecodeResult:
    """Exact ML for the linear scheme on the additive-pair channel.

    With zero-sum affine inputs the channel stays in its clean state, the
    posterior factors across users 1 and 2, and the third block is their
    xor.  Requires a product law on (S1, S2); exactness against ml_decode
    is established in the tests.
    """
    if channel.kind != "additive-pair":
        raise ValueError("decoder specific to the additive-pair channel")
    if scheme.kind != "linear-jscc" or scheme.meta["q"] != 2:
        raise ValueError("decoder specific to binary linear schemes")
    delta = channel.params["delta"]
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2) for finite log-likelihoods")
    src = scheme.source
    p12 = marginalize(src.joint, ("S1", "S2")).probs
    m1, m2 = p12.sum(axis=1), p12.sum(axis=0)
    if np.abs(p12 - np.outer(m1, m2)).max() > 1e-12:
        raise ValueError("(S1, S2) must be a product law")
    zero_sum = src.support()
    if not all(s3 == s1 ^ s2 for s1, s2, s3 in zero_sum):
        raise ValueError("source support must satisfy s3 = s1 xor s2")

    y = np.asarray(y_block, dtype=np.int64)
    n = y.shape[0]
    y1, y2 = y >> 1, y & 1
    g = scheme.meta["matrix"]
    noise_llr = float(np.log(delta) - np.log(1.0 - delta))
    cands = _binary_words(n)
    # float32 keeps the matmul fast; entries stay small exact integers
    cands_f = cands.astype(np.float32)
    g_f = g.astype(np.float32)
    w = cands.sum(axis=1)

    decoded = []
    for marg, b, y_obs in (
        (m1, scheme.meta["offsets"][0], y1),
        (m2, scheme.meta["offsets"][1], y2),
    ):
        if not 0.0 < marg[1] < 1.0:
            raise ValueError("degenerate source marginal")
        x = (cands_f @ g_f + b.astype(np.float32)) % 2.0
        wx = x.sum(axis=1)
        d = (wx + y_obs.sum() - 2.0 * (x @ y_obs.astype(np.float32))).astype(np.int64)
        prior_llr = float(np.log(marg[1]) - np.log(marg[0]))
        scores = d * noise_llr + w * prior_llr
        top = int(np.argmax(scores))
        if int((scores == scores[top]).sum()) > 1:
            return DecodeResult(None, "tie")
        decoded.append(cands[top])
    s1, s2 = decoded
    return DecodeResult((s1, s2, s1 ^ s2))


def typicality_decode(channel: DMChannel, scheme: CodingScheme, y_block, eps: float) -> DecodeResult:
    """Unique strongly typical candidate decoding.

    A candidate passes when the empirical type of the full per-symbol tuple
    (sources, layer variables, inputs, output) deviates from the design law
    by at most eps divided by the design support size in every cell, with no
    mass on null cells.  No typical candidate is an E0 failure; more than
    one is an E1 failure.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    y = np.asarray(y_block, dtype=np.int64)
    n = y.shape[0]
    if n != scheme.n:
        raise ValueError("block length mismatch")
    design = scheme.design_joint(channel)
    probs = design.probs
    thr = eps / float((probs > 0).sum())
    support, m, total = _candidate_space(scheme.source, n)

    flat = probs.ravel()
    must_appear = np.flatnonzero(flat > thr)
    positive = flat > 0.0

    names = design.names
    hit = None
    for cid in range(total):
        digits = _digits_chunk(cid, cid + 1, m, n)[0]
        s1, s2, s3 = (support[:, i][digits] for i in range(3))
        x1, x2, x3 = scheme.encode(s1, s2, s3)
        layer = scheme.layer_blocks(s1, s2, s3)
        per_axis = []
        for name in names:
            if name == "Y":
                per_axis.append(y)
            elif name in ("S1", "S2", "S3"):
                per_axis.append((s1, s2, s3)[int(name[1]) - 1])
            elif name in ("X1", "X2", "X3"):
                per_axis.append((x1, x2, x3)[int(name[1]) - 1])
            else:
                per_axis.append(layer[name])
        cells = np.ravel_multi_index(tuple(per_axis), probs.shape)
        if not positive[cells].all():
            continue
        uniq, cnt = np.unique(cells, return_counts=True)
        emp = cnt / float(n)
        if np.abs(emp - flat[uniq]).max() > thr:
            continue
        # cells with design mass above the threshold must appear
        if not np.isin(must_appear, uniq).all():
            continue
        if hit is not None:
            return DecodeResult(None, "ambiguous")
        hit = (s1, s2, s3)
    if hit is None:
        return DecodeResult(None, "none-typical")
    return DecodeResult(hit)


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95 percent Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SimReport:
    n: int
    trials: int
    errors: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    seed: int
    scheme_kind: str
    channel_kind: str

    CSV_HEADER = "n,trials,errors,p_hat,ci_lo,ci_hi,seed,scheme_kind,channel_kind"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "errors": self.errors,
            "p_hat": self.p_hat,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "seed": self.seed,
            "scheme_kind": self.scheme_kind,
            "channel_kind": self.channel_kind,
        }

    def to_csv_row(self) -> str:
        return (
            f"{self.n},{self.trials},{self.errors},{self.p_hat!r},{self.ci_lo!r},"
            f"{self.ci_hi!r},{self.seed},{self.scheme_kind},{self.channel_kind}"
        )


def monte_carlo_error(
    source: SourceModel,
    channel: DMChannel,
    scheme_factory: Callable[[int], CodingScheme],
    decoder: Callable,
    n: int,
    trials: int,
    seed: int,
    scheme_per_trial: bool = True,
    workers: int = 1,
) -> SimReport:
    """Block error rate of (scheme, decoder) over independent trials.

    Every trial draws a fresh source block and fresh channel noise; with
    scheme_per_trial (the default) the codebooks are regenerated per trial
    as well, matching the random-coding ensembles.  All randomness is
    derived from (seed, trial index), so the result is independent of the
    worker partition.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    shared = None if scheme_per_trial else scheme_factory(_sub_seed(seed, 0, 3))

    def run_trial(t: int) -> int:
        scheme = scheme_factory(_sub_seed(seed, t, 0)) if scheme_per_trial else shared
        s = sample_iid(source, n, _sub_seed(seed, t, 1))
        x = scheme.encode(*s)
        y = _transmit_with(channel, x, _sub_seed(seed, t, 2))
        res = decoder(channel, scheme, y)
        if not res.ok:
            return 1
        return 0 if all(np.array_equal(a, b) for a, b in zip(res.blocks, s)) else 1

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = sum(pool.map(run_trial, range(trials)))
    else:
        errors = sum(run_trial(t) for t in range(trials))

    lo, hi = wilson_interval(errors, trials)
    scheme_kind = shared.kind if shared is not None else scheme_factory(_sub_seed(seed, 0, 0)).kind
    return SimReport(
        n=n,
        trials=trials,
        errors=errors,
        p_hat=errors / trials,
        ci_lo=lo,
        ci_hi=hi,
        seed=seed,
        scheme_kind=scheme_kind,
        channel_kind=channel.kind,
    )


def _transmit_with(channel: DMChannel, blocks, seed: int) -> np.ndarray:
    from .channels import transmit

    return transmit(channel, blocks, seed)
