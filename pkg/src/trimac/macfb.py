"""Block-Markov feedback simulation and codebook-structure metrics.

All three encoders share one uniformly drawn binary generator matrix.
Fresh messages ride the first channel component; the second component
carries one-block-delayed retransmissions from users 1 and 2 while user 3
sends its estimate of the bitwise message sum, recovered from the fed-back
first-component output after cancelling its own codeword.  The receiver
unwinds each message block in three steps: recover the two retransmitted
messages from the next block's pair component, cancel their sum from the
stored first-component output, then read off the third message.

The sumset helpers measure why the matched codebooks matter: a shared
linear code keeps the sum-candidate set as small as the code itself,
while independent codebooks nearly square it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import build_fb_parallel_channel, transmit
from .coding import SimReport, _binary_words, _sub_seed, wilson_interval
from .gfcore import sample_uniform_matrix
from .rng import stream

__all__ = [
    "MAX_SUM_MESSAGE_BITS",
    "MAX_SUMSET_PAIRS",
    "FBConfig",
    "FBReport",
    "SumsetReport",
    "ProbeRow",
    "ProbeReport",
    "linear_codebook",
    "sumset",
    "run_fb_simulation",
    "ptp_simulation",
    "structure_necessity_probe",
]

MAX_SUM_MESSAGE_BITS = 20  # exhaustive decoders enumerate 2^k candidates
MAX_SUMSET_PAIRS = 10**8  # pairwise-XOR enumeration guard
MAX_PACKED_BITS = 62  # words are packed into signed int64 keys

_EVENT_KINDS = ("sum", "pair", "third", "message")


@dataclass(frozen=True)
class FBConfig:
    """Run parameters; each of the three messages carries k bits per block."""

    k: int
    n: int
    blocks: int
    delta: float
    seed: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if self.k > MAX_SUM_MESSAGE_BITS:
            raise ValueError(
                f"k > {MAX_SUM_MESSAGE_BITS} puts 2^k beyond the exhaustive decoders"
            )
        if self.blocks < 2:
            raise ValueError("need at least two blocks to deliver a message")
        if not 0.0 <= self.delta < 0.5:
            raise ValueError("delta must lie in [0, 1/2)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class SumsetReport:
    """Codebook sizes, their pairwise-XOR set size, and the rate gap."""

    n: int
    size_a: int
    size_b: int
    size_sum: int

    @property
    def gap(self) -> float:
        """Extra decoding rate forced by the sum set, in bits per channel use."""
        return abs(math.log2(self.size_sum) - math.log2(self.size_a)) / self.n

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "size_a": self.size_a,
            "size_b": self.size_b,
            "size_sum": self.size_sum,
            "gap_bits_per_use": self.gap,
        }


@dataclass(frozen=True)
class FBReport:
    """Per-block error indicators for one feedback run.

    Entries cover message blocks 1..blocks-1; the final block only carries
    retransmissions, so its fresh messages are never delivered.  ``sum`` is
    user 3's decode of the message sum off the feedback, ``pair`` the
    receiver's decode of the two retransmitted messages, ``third`` the
    receiver's decode of the remaining message after cancellation.  A
    delivered triple counts as wrong when either receiver step fails; sum
    errors poison the next block's pair component rather than their own,
    so they are tallied separately.
    """

    config: FBConfig
    sum_errors: tuple[int, ...]
    pair_errors: tuple[int, ...]
    third_errors: tuple[int, ...]
    code_sumset: SumsetReport | None

    CSV_HEADER = "block,sum_error_count,pair_error_count,third_error_count,message_error_count"

    @property
    def delivered(self) -> int:
        return len(self.sum_errors)

    @property
    def message_errors(self) -> tuple[int, ...]:
        return tuple(max(p, t) for p, t in zip(self.pair_errors, self.third_errors))

    def events(self, kind: str) -> tuple[int, ...]:
        table = {
            "sum": self.sum_errors,
            "pair": self.pair_errors,
            "third": self.third_errors,
            "message": self.message_errors,
        }
        try:
            return table[kind]
        except KeyError:
            raise ValueError(f"unknown event kind {kind!r}") from None

    def error_rate(self, kind: str = "message") -> float:
        events = self.events(kind)
        return sum(events) / len(events)

    def error_ci(self, kind: str = "message") -> tuple[float, float]:
        events = self.events(kind)
        return wilson_interval(sum(events), len(events))

    def to_json(self) -> dict:
        out = {
            "config": {
                "k": self.config.k,
                "n": self.config.n,
                "blocks": self.config.blocks,
                "delta": self.config.delta,
                "seed": self.config.seed,
            },
            "delivered_blocks": self.delivered,
            "events": {},
            "code_sumset": None if self.code_sumset is None else self.code_sumset.to_json(),
        }
        for kind in _EVENT_KINDS:
            events = self.events(kind)
            lo, hi = wilson_interval(sum(events), len(events))
            out["events"][kind] = {
                "errors": sum(events),
                "rate": sum(events) / len(events),
                "ci_lo": lo,
                "ci_hi": hi,
            }
        return out

    def csv_rows(self) -> list[str]:
        rows = []
        for block, events in enumerate(
            zip(self.sum_errors, self.pair_errors, self.third_errors, self.message_errors)
        ):
            rows.append(f"{block + 1}," + ",".join(str(e) for e in events))
        return rows


@dataclass(frozen=True)
class ProbeRow:
    """One arm of the paired sum-decoding comparison."""

    scheme: str
    trials: int
    errors: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    sumset: SumsetReport

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "trials": self.trials,
            "errors": self.errors,
            "p_hat": self.p_hat,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "sumset": self.sumset.to_json(),
        }


@dataclass(frozen=True)
class ProbeReport:
    """Matched-rate comparison of codebook pairings for sum decoding."""

    k: int
    n: int
    delta: float
    trials: int
    seed: int
    rows: tuple[ProbeRow, ...]

    CSV_HEADER = (
        "scheme,k,n,delta,trials,errors,p_hat,ci_lo,ci_hi,sumset_size,gap_bits_per_use"
    )

    def row(self, scheme: str) -> ProbeRow:
        for row in self.rows:
            if row.scheme == scheme:
                return row
        raise KeyError(scheme)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "delta": self.delta,
            "trials": self.trials,
            "seed": self.seed,
            "rows": [row.to_json() for row in self.rows],
        }

    def csv_rows(self) -> list[str]:
        rows = []
        for row in self.rows:
            rows.append(
                f"{row.scheme},{self.k},{self.n},{self.delta!r},{row.trials},"
                f"{row.errors},{row.p_hat!r},{row.ci_lo!r},{row.ci_hi!r},"
                f"{row.sumset.size_sum},{row.sumset.gap!r}"
            )
        return rows


def _pack(words: np.ndarray) -> np.ndarray:
    """Bit rows to int64 keys, most significant bit first."""
    n = words.shape[-1]
    shifts = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    return words.astype(np.int64) @ shifts


def _packed_codebook(code) -> tuple[np.ndarray, int]:
    arr = np.asarray(code, dtype=np.int64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("codebook must be a nonempty 2-D bit array")
    if arr.shape[1] > MAX_PACKED_BITS:
        raise ValueError(f"words longer than {MAX_PACKED_BITS} bits do not pack into int64")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("codebook entries must be bits")
    return np.unique(_pack(arr)), arr.shape[1]


def _xor_closure(packed_a: np.ndarray, packed_b: np.ndarray) -> np.ndarray:
    """Sorted distinct pairwise XORs, chunked to keep peak memory modest."""
    out = None
    chunk = max(1, (1 << 22) // max(1, packed_b.size))
    for start in range(0, packed_a.size, chunk):
        block = np.bitwise_xor.outer(packed_a[start : start + chunk], packed_b).ravel()
        fresh = np.unique(block)
        out = fresh if out is None else np.unique(np.concatenate((out, fresh)))
    return out


def linear_codebook(generator) -> np.ndarray:
    """All 2^k codewords spanned by the rows of a binary generator.

    Row i is the codeword of message i (bits of i, most significant first),
    so duplicate words appear whenever the generator is rank deficient.
    """
    g = np.asarray(generator, dtype=np.int64)
    if g.ndim != 2 or g.size == 0:
        raise ValueError("generator must be a nonempty 2-D array")
    if not np.isin(g, (0, 1)).all():
        raise ValueError("generator entries must be bits")
    if g.shape[0] > MAX_SUM_MESSAGE_BITS:
        raise ValueError(f"refusing to enumerate more than 2^{MAX_SUM_MESSAGE_BITS} codewords")
    return (_binary_words(g.shape[0]) @ g) % 2


def sumset(code_a, code_b) -> SumsetReport:
    """Exact pairwise-XOR set of two binary codebooks (rows are words).

    Duplicate words collapse before counting, and the bracket
    max(|A|,|B|) <= |A xor B| <= |A|*|B| is asserted on every call.
    """
    packed_a, n_a = _packed_codebook(code_a)
    packed_b, n_b = _packed_codebook(code_b)
    if n_a != n_b:
        raise ValueError("codebooks must share a word length")
    if packed_a.size * packed_b.size > MAX_SUMSET_PAIRS:
        raise ValueError("pairwise enumeration above guard; shrink the codebooks")
    size_sum = int(_xor_closure(packed_a, packed_b).size)
    report = SumsetReport(n_a, int(packed_a.size), int(packed_b.size), size_sum)
    assert max(report.size_a, report.size_b) <= size_sum <= report.size_a * report.size_b
    return report


def _nearest(codebook: np.ndarray, word: np.ndarray) -> tuple[int, bool]:
    """Lexicographically first nearest codeword and whether the minimum tied."""
    dists = np.count_nonzero(codebook != word, axis=1)
    idx = int(np.argmin(dists))
    tie = int(np.count_nonzero(dists == dists[idx])) > 1
    return idx, tie


def _sum_decode(codebook: np.ndarray, z: np.ndarray, mode: str, threshold: float):
    dists = np.count_nonzero(codebook != z, axis=1)
    idx = int(np.argmin(dists))
    if mode == "ml":
        failed = int(np.count_nonzero(dists == dists[idx])) > 1
        return idx, failed
    hits = np.flatnonzero(dists <= threshold)
    if hits.size == 1:
        return int(hits[0]), False
    # no unique typical word: declared failure, transmit the nearest anyway
    return idx, True


def run_fb_simulation(
    config: FBConfig, sum_decoder: str = "ml", typicality_margin: float = 0.08
) -> FBReport:
    """Run one feedback simulation and tally per-block error events.

    ``sum_decoder`` picks how user 3 recovers the message sum: "ml" is an
    exact nearest-codeword search over all 2^k candidates, "typicality"
    accepts only a unique codeword within radius n*(delta + margin) and
    declares failure otherwise.  Either way user 3 transmits the nearest
    codeword, so the channel-2 state stays well defined after a failure.
    Blocks run sequentially by construction: each one needs the previous
    block's feedback.
    """
    if sum_decoder not in ("ml", "typicality"):
        raise ValueError("sum_decoder must be 'ml' or 'typicality'")
    if typicality_margin <= 0.0:
        raise ValueError("typicality_margin must be positive")
    k, n, blocks = config.k, config.n, config.blocks
    g = sample_uniform_matrix(2, k, n, _sub_seed(config.seed, 60)).as_array()
    words = _binary_words(k)
    codebook = linear_codebook(g)
    channel = build_fb_parallel_channel(config.delta)
    msgs = stream(config.seed, 61).integers(0, 2, size=(blocks, 3, k))
    threshold = n * (config.delta + typicality_margin)

    y_first = np.empty((blocks, n), dtype=np.int64)
    y_pair = np.empty((blocks, 2, n), dtype=np.int64)
    sum_hat = np.empty((blocks - 1, n), dtype=np.int64)
    sum_ok = np.zeros(blocks - 1, dtype=bool)
    sum_errors = []

    prev_first = None
    for block in range(blocks):
        first = (msgs[block] @ g) % 2
        if block == 0:
            second = np.zeros((3, n), dtype=np.int64)
        else:
            second = np.vstack((prev_first[0], prev_first[1], sum_hat[block - 1]))
            if sum_ok[block - 1]:
                # a correct sum decode must leave channel 2 in the clean state
                assert np.array_equal(second[2], second[0] ^ second[1])
        inputs = tuple(2 * first[i] + second[i] for i in range(3))
        y = transmit(channel, inputs, _sub_seed(config.seed, 62, block))
        y_first[block] = y >> 2
        y_pair[block, 0] = (y >> 1) & 1
        y_pair[block, 1] = y & 1
        if block < blocks - 1:
            # feedback leg: cancel own codeword, decode the running sum
            z = y_first[block] ^ first[2]
            idx, failed = _sum_decode(codebook, z, sum_decoder, threshold)
            truth = msgs[block, 0] ^ msgs[block, 1]
            ok = not failed and np.array_equal(words[idx], truth)
            sum_ok[block] = ok
            sum_errors.append(0 if ok else 1)
            sum_hat[block] = codebook[idx]
        prev_first = first

    # receiver pass; the pair likelihood factorizes under the clean-state
    # model, so per-user nearest-codeword search is the joint ML decision
    pair_errors = []
    third_errors = []
    for block in range(blocks - 1):
        i1, t1 = _nearest(codebook, y_pair[block + 1, 0])
        i2, t2 = _nearest(codebook, y_pair[block + 1, 1])
        bad = (
            t1
            or t2
            or not np.array_equal(words[i1], msgs[block, 0])
            or not np.array_equal(words[i2], msgs[block, 1])
        )
        pair_errors.append(int(bad))
        cleaned = y_first[block] ^ codebook[i1] ^ codebook[i2]
        i3, t3 = _nearest(codebook, cleaned)
        third_errors.append(int(t3 or not np.array_equal(words[i3], msgs[block, 2])))

    code_sumset = None
    if n <= MAX_PACKED_BITS and 4**k <= MAX_SUMSET_PAIRS:
        code_sumset = sumset(codebook, codebook)
    return FBReport(
        config, tuple(sum_errors), tuple(pair_errors), tuple(third_errors), code_sumset
    )


def ptp_simulation(config: FBConfig, trials: int | None = None) -> SimReport:
    """Single-user BSC(delta) run with the same linear code.

    User 3's feedback leg sees exactly this channel: the first component
    XORs the three codewords and flips each bit with probability delta,
    and user 3 cancels its own word before decoding.  Default trial count
    matches the delivered blocks of the feedback run.
    """
    if trials is None:
        trials = config.blocks - 1
    if trials < 1:
        raise ValueError("trials must be positive")
    g = sample_uniform_matrix(2, config.k, config.n, _sub_seed(config.seed, 60)).as_array()
    codebook = linear_codebook(g)
    words = _binary_words(config.k)
    sent = stream(config.seed, 63).integers(0, 2, size=(trials, config.k))
    noise_rng = stream(config.seed, 64)
    errors = 0
    for t in range(trials):
        x = (sent[t] @ g) % 2
        y = x ^ (noise_rng.random(config.n) < config.delta).astype(np.int64)
        idx, tie = _nearest(codebook, y)
        errors += int(tie or not np.array_equal(words[idx], sent[t]))
    lo, hi = wilson_interval(errors, trials)
    return SimReport(
        config.n, trials, errors, errors / trials, lo, hi, config.seed,
        "identical-linear-ptp", "bsc",
    )


def _sum_trials(
    book_a: np.ndarray,
    book_b: np.ndarray,
    candidates: np.ndarray,
    delta: float,
    trials: int,
    rng: np.random.Generator,
) -> int:
    """Word-level sum-decoding errors over the exact candidate set."""
    n = book_a.shape[1]
    errors = 0
    chunk = max(1, (1 << 22) // max(1, candidates.size))
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        ia = rng.integers(0, book_a.shape[0], size=m)
        ib = rng.integers(0, book_b.shape[0], size=m)
        sums = book_a[ia] ^ book_b[ib]
        noise = (rng.random((m, n)) < delta).astype(np.int64)
        received = _pack(sums ^ noise)
        truth = _pack(sums)
        dists = np.bitwise_count(candidates[None, :] ^ received[:, None])
        best = dists.min(axis=1)
        ties = (dists == best[:, None]).sum(axis=1) > 1
        decoded = candidates[np.argmin(dists, axis=1)]
        errors += int(np.count_nonzero(ties | (decoded != truth)))
        done += m
    return errors


def structure_necessity_probe(
    k: int, n: int, delta: float, trials: int, seed: int
) -> ProbeReport:
    """Compare matched linear codebooks against independent random ones.

    Both arms repeat user 3's feedback task: recover the XOR of two
    codewords from n BSC(delta) observations, searching the exact set of
    possible sums.  Sharing one generator keeps that set as small as the
    code itself; independent books hand the decoder nearly the squared
    count.  Errors are scored at the word level (decoded sum word wrong
    or tied), which keeps the two arms comparable.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if n > MAX_PACKED_BITS:
        raise ValueError(f"words longer than {MAX_PACKED_BITS} bits do not pack into int64")
    if not 0.0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    if trials < 1:
        raise ValueError("trials must be positive")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    g = sample_uniform_matrix(2, k, n, _sub_seed(seed, 60)).as_array()
    linear = linear_codebook(g)
    random_books = stream(seed, 65).integers(0, 2, size=(2, 2**k, n))
    arms = (
        ("identical-linear", linear, linear),
        ("independent-random", random_books[0], random_books[1]),
    )
    rows = []
    for arm, (scheme, book_a, book_b) in enumerate(arms):
        report = sumset(book_a, book_b)
        candidates = _xor_closure(*(np.unique(_pack(b)) for b in (book_a, book_b)))
        errors = _sum_trials(book_a, book_b, candidates, delta, trials, stream(seed, 66, arm))
        lo, hi = wilson_interval(errors, trials)
        rows.append(ProbeRow(scheme, trials, errors, errors / trials, lo, hi, report))
    return ProbeReport(k, n, delta, trials, seed, tuple(rows))
