"""Deleted-interpolation conditional distributions.

One generic estimator backs the baseline trigram and all three components
of the structured LM. A model is a stack of back-off orders (most specific
context first, usually ending in the empty context) plus a uniform floor;
mixture weights live in buckets keyed by the count of the most specific
context and are fit by EM on held-out events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

Context = tuple[int, ...]
Event = int

MAX_BUCKETS = 16
EM_TOL = 1e-7
EM_MAX_ITERS = 100


class NgramError(ValueError):
    """Raised on invalid estimator input."""


def bucket_of(count: float, n_buckets: int) -> int:
    """Log-spaced count bucket: 0 for counts below one, then edges 1,2,4,8,..."""
    if count < 1.0:
        return 0
    return min(1 + int(math.log2(count)), n_buckets - 1)


@dataclass
class HeldOutSplit:
    """Disjoint development / held-out event streams for weight estimation.

    Each event is (full context, event id, fractional count).
    """

    dev: list[tuple[Context, Event, float]]
    heldout: list[tuple[Context, Event, float]]

    def __post_init__(self):
        if not self.dev or not self.heldout:
            raise NgramError("development and held-out portions must both be non-empty")


def split_events(
    events: Sequence[tuple[Context, Event, float]], heldout_fraction: float = 0.1
) -> HeldOutSplit:
    """Split an event stream into leading development and trailing held-out parts."""
    if not 0.0 < heldout_fraction < 1.0:
        raise NgramError("heldout_fraction must be in (0,1)")
    cut = max(1, int(round(len(events) * (1.0 - heldout_fraction))))
    cut = min(cut, len(events) - 1)
    if cut < 1:
        raise NgramError("too few events to split")
    return HeldOutSplit(dev=list(events[:cut]), heldout=list(events[cut:]))


@dataclass
class DIModel:
    """Counts at each back-off order plus bucketed mixture weights.

    ``masks`` lists, per order, which positions of the full context tuple
    that order conditions on (most specific first; the final order is
    usually the empty tuple). The uniform floor always gets the last
    mixture weight, so weight vectors have ``len(masks) + 1`` entries.
    """

    masks: tuple[tuple[int, ...], ...]
    event_space_size: int
    n_buckets: int = MAX_BUCKETS
    counts: list[dict[Context, dict[Event, float]]] = field(default_factory=list)
    totals: list[dict[Context, float]] = field(default_factory=list)
    weights: dict[int, list[float]] = field(default_factory=dict)
    em_loglik_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.event_space_size < 1:
            raise NgramError("event space must be non-empty")
        if not self.counts:
            self.counts = [dict() for _ in self.masks]
        if not self.totals:
            self.totals = [dict() for _ in self.masks]

    @property
    def n_orders(self) -> int:
        return len(self.masks)

    def project(self, context: Context, order: int) -> Context:
        return tuple(context[i] for i in self.masks[order])

    def _default_weights(self) -> list[float]:
        m = self.n_orders + 1
        return [1.0 / m] * m

    def bucket_for_context(self, context: Context) -> int:
        top = self.project(context, 0)
        return bucket_of(self.totals[0].get(top, 0.0), self.n_buckets)

    def order_freqs(self, context: Context, event: Event) -> list[float]:
        """Per-order relative frequencies plus the uniform floor.

        An order whose projected context is unseen falls through to the
        next less specific order so each component stays normalized.
        """
        freqs = [0.0] * (self.n_orders + 1)
        freqs[-1] = 1.0 / self.event_space_size
        below = freqs[-1]
        for o in range(self.n_orders - 1, -1, -1):
            ctx = self.project(context, o)
            total = self.totals[o].get(ctx, 0.0)
            if total > 0.0:
                below = self.counts[o][ctx].get(event, 0.0) / total
            freqs[o] = below
        return freqs

    def accumulate(self, context: Context, event: Event, weight: float = 1.0) -> None:
        """Add ``weight`` to the (context, event) cell at every back-off order."""
        if weight < 0.0:
            raise NgramError("negative count weight")
        if weight == 0.0:
            return
        for o in range(self.n_orders):
            ctx = self.project(context, o)
            by_event = self.counts[o].setdefault(ctx, {})
            by_event[event] = by_event.get(event, 0.0) + weight
            self.totals[o][ctx] = self.totals[o].get(ctx, 0.0) + weight

    def prob(self, context: Context, event: Event) -> float:
        """Mixture probability of ``event`` given ``context``; strictly positive."""
        lam = self.weights.get(self.bucket_for_context(context))
        if lam is None:
            lam = self._default_weights()
        freqs = self.order_freqs(context, event)
        return sum(l * f for l, f in zip(lam, freqs))

    def logprob(self, context: Context, event: Event) -> float:
        return math.log(self.prob(context, event))


def accumulate_events(model: DIModel, events: Iterable[tuple[Context, Event, float]]) -> DIModel:
    for context, event, weight in events:
        model.accumulate(context, event, weight)
    return model


def estimate_weights(model: DIModel, heldout: HeldOutSplit | Sequence[tuple[Context, Event, float]],
                     n_buckets: int | None = None) -> DIModel:
    """Fit per-bucket mixture weights by EM on the held-out events.

    Held-out log-likelihood is non-decreasing across iterations (asserted);
    iteration stops below a 1e-7 nats/event improvement or at 100 rounds.
    """
    events = heldout.heldout if isinstance(heldout, HeldOutSplit) else list(heldout)
    if not events:
        raise NgramError("empty held-out set")
    if n_buckets is not None:
        model.n_buckets = n_buckets
    m = model.n_orders + 1

    prepared: list[tuple[int, list[float], float]] = []
    total_weight = 0.0
    for context, event, weight in events:
        if weight <= 0.0:
            continue
        bucket = model.bucket_for_context(context)
        prepared.append((bucket, model.order_freqs(context, event), weight))
        total_weight += weight
    if not prepared:
        raise NgramError("held-out set has no positive-weight events")

    lam = {b: model._default_weights() for b in sorted({p[0] for p in prepared})}
    prev_ll = -math.inf
    trace: list[float] = []
    for _ in range(EM_MAX_ITERS):
        post = {b: [0.0] * m for b in lam}
        ll = 0.0
        for bucket, freqs, weight in prepared:
            lb = lam[bucket]
            parts = [l * f for l, f in zip(lb, freqs)]
            p = sum(parts)
            ll += weight * math.log(p)
            acc = post[bucket]
            for o in range(m):
                acc[o] += weight * parts[o] / p
        assert ll >= prev_ll - 1e-9 * max(1.0, abs(ll)), "EM held-out log-likelihood decreased"
        trace.append(ll)
        improved = ll - prev_ll
        prev_ll = ll
        for b, acc in post.items():
            norm = sum(acc)
            if norm > 0.0:
                lam[b] = [a / norm for a in acc]
        if improved < EM_TOL * total_weight:
            break

    model.weights = {b: list(v) for b, v in lam.items()}
    model.em_loglik_trace = trace
    return model


def train_di_model(
    masks: tuple[tuple[int, ...], ...],
    event_space_size: int,
    events: Sequence[tuple[Context, Event, float]],
    heldout_fraction: float = 0.1,
    n_buckets: int = MAX_BUCKETS,
) -> DIModel:
    """Split an event stream, count the development part, fit weights on the rest."""
    split = split_events(events, heldout_fraction)
    model = DIModel(masks=masks, event_space_size=event_space_size, n_buckets=n_buckets)
    accumulate_events(model, split.dev)
    return estimate_weights(model, split)


# --- trigram specialization -------------------------------------------------

TRIGRAM_MASKS: tuple[tuple[int, ...], ...] = ((0, 1), (0,), ())


def trigram_events(sentences: Iterable[Sequence[int]], sb: int, se: int) -> list[tuple[Context, Event, float]]:
    """Per-token prediction events with begin padding and an end event.

    Context tuples are (previous word, word before that).
    """
    events = []
    for tokens in sentences:
        prev2, prev1 = sb, sb
        for w in tokens:
            events.append(((prev1, prev2), w, 1.0))
            prev2, prev1 = prev1, w
        events.append(((prev1, prev2), se, 1.0))
    return events


def trigram_prob(model: DIModel, w: Event, w1: int, w2: int) -> float:
    """P(w | previous word w1, word before that w2)."""
    return model.prob((w1, w2), w)


# --- serialization ----------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def dimodel_lines(model: DIModel) -> Iterator[str]:
    """Canonical line rendering: byte-identical for equal models."""
    yield "dimodel v1"
    yield f"orders {model.n_orders}"
    for o, mask in enumerate(model.masks):
        yield "mask " + " ".join([str(o)] + [str(i) for i in mask])
    yield f"event_space {model.event_space_size}"
    yield f"buckets {model.n_buckets}"
    for b in sorted(model.weights):
        yield "weights " + " ".join([str(b)] + [_fmt(x) for x in model.weights[b]])
    for o in range(model.n_orders):
        contexts = sorted(model.counts[o])
        yield f"order {o} contexts {len(contexts)}"
        for ctx in contexts:
            yield "ctx " + " ".join([str(len(ctx))] + [str(c) for c in ctx]) + " " + _fmt(model.totals[o][ctx])
            by_event = model.counts[o][ctx]
            for e in sorted(by_event):
                yield f"ev {e} {_fmt(by_event[e])}"
    yield "end dimodel"


class _LineScanner:
    """Sequential reader with one-line lookahead over stripped lines."""

    def __init__(self, lines: Iterable[str]):
        self._it = iter(lines)
        self._peeked: str | None = None

    def peek(self) -> str:
        if self._peeked is None:
            self._peeked = next(self._it).strip()
        return self._peeked

    def take(self) -> str:
        line = self.peek()
        self._peeked = None
        return line


def parse_dimodel(scanner: "_LineScanner | Iterable[str]") -> DIModel:
    if not isinstance(scanner, _LineScanner):
        scanner = _LineScanner(scanner)
    header = scanner.take()
    if header != "dimodel v1":
        raise NgramError(f"bad model header {header!r}")
    n_orders = int(scanner.take().split()[1])
    masks = []
    for _ in range(n_orders):
        parts = scanner.take().split()
        masks.append(tuple(int(x) for x in parts[2:]))
    event_space = int(scanner.take().split()[1])
    n_buckets = int(scanner.take().split()[1])
    model = DIModel(masks=tuple(masks), event_space_size=event_space, n_buckets=n_buckets)
    while scanner.peek().startswith("weights "):
        parts = scanner.take().split()
        model.weights[int(parts[1])] = [float(x) for x in parts[2:]]
    while scanner.peek().startswith("order "):
        parts = scanner.take().split()
        o, n_contexts = int(parts[1]), int(parts[3])
        for _ in range(n_contexts):
            ctx_parts = scanner.take().split()
            if ctx_parts[0] != "ctx":
                raise NgramError(f"expected ctx line, got {ctx_parts[0]!r}")
            k = int(ctx_parts[1])
            ctx = tuple(int(x) for x in ctx_parts[2 : 2 + k])
            model.totals[o][ctx] = float(ctx_parts[2 + k])
            by_event: dict[Event, float] = {}
            while scanner.peek().startswith("ev "):
                _, e, c = scanner.take().split()
                by_event[int(e)] = float(c)
            model.counts[o][ctx] = by_event
    trailer = scanner.take()
    if trailer != "end dimodel":
        raise NgramError(f"bad model trailer {trailer!r}")
    return model
