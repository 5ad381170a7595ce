"""Monte Carlo harness for the two-hop watchdog experiments.

A trial draws random source symbols and nonzero coefficients, runs the
relay (honest, or injecting bit errors at p_adv with a consistently
recomputed hash), overhears everything through BSCs, and returns the
watchdog's consistency probability p*.

Randomness is split into named per-trial sub-streams (hash, symbols,
channels, adversary) derived from (seed, trial, tag). Honest and
adversarial runs of the same trial therefore share the exact same symbols
and channel noise, which makes the null adversary (p_adv = 0) produce
bit-identical p* values and gives every sweep common random numbers.

Also provides the brute-force enumeration oracle for p*, empirical
threshold calibration, and the matched-codeword counting experiment.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import Bsc, ball_radius, hamming, transmit
from .gfield import default_field
from .hashing import collision_list, hash_eval, sample_hash
from .inference import (
    InferenceError,
    Overheard,
    WatchdogObservation,
    build_and_run_trellis,
    consistency_probability,
    matched_codewords,
)
from .packet import corrupt_payload, make_packet

_HASH, _SYMBOLS, _CHANNELS, _ADVERSARY = range(4)


@dataclass(frozen=True)
class TwoHopConfig:
    """One operating point: m sources feed a relay, source 1 is the watchdog.

    p_s is the source-to-watchdog overhearing rate (all peers equal), and
    p_relay the relay-to-watchdog rate. pruning_eps, when set, drops
    transition-row candidates outside the 1-eps channel ball; it is echoed
    into every emitted result so runs stay comparable.
    """

    m: int = 3
    n: int = 10
    delta: int = 2
    p_s: float = 0.1
    p_relay: float = 0.1
    p_adv: float = 0.1
    iterations: int = 1000
    seed: int = 0
    pruning_eps: float | None = None
    hash_family: str = "affine"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one source")
        if self.hash_family not in ("affine", "poly"):
            raise ValueError("hash_family must be 'affine' or 'poly'")
        if not 0 <= self.delta <= self.n:
            raise ValueError("delta must be in [0, n]")
        if not 0.0 <= self.p_adv <= 1.0:
            raise ValueError("p_adv must be in [0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        Bsc(self.p_s), Bsc(self.p_relay)  # range checks


@dataclass(frozen=True)
class ExperimentStats:
    """Aggregate p* statistics for one operating point.

    Variances are population variances of the per-trial p* samples, which
    is what the experiment error bars report; standard deviations are
    derived accessors.
    """

    mean_p_relay: float
    var_relay: float
    mean_p_adv: float
    var_adv: float
    relay_samples: np.ndarray | None = None
    adv_samples: np.ndarray | None = None

    @property
    def std_relay(self) -> float:
        return math.sqrt(self.var_relay)

    @property
    def std_adv(self) -> float:
        return math.sqrt(self.var_adv)

    @property
    def separation(self) -> float:
        return self.mean_p_relay - self.mean_p_adv


def _stream(seed: int, trial: int, tag: int):
    return np.random.default_rng(np.random.SeedSequence((seed, trial, tag)))


def simulate_observation(
    cfg: TwoHopConfig, adversarial: bool, trial: int = 0
) -> WatchdogObservation:
    """Draw one full trial and return the watchdog's observation of it.

    Draw order is fixed: hash spec, then m symbols and m coefficients, then
    the adversary's flip mask, then channel noise for peers 2..m and the
    relay. Headers arrive error-free, so peer hashes and coefficients in
    the observation are exact.
    """
    field = default_field(cfg.n)
    spec = sample_hash(_stream(cfg.seed, trial, _HASH), cfg.hash_family, cfg.n, cfg.delta)

    sym_rng = _stream(cfg.seed, trial, _SYMBOLS)
    symbols = [int(s) for s in sym_rng.integers(0, field.order, size=cfg.m)]
    coeffs = tuple(1 + int(c) for c in sym_rng.integers(0, field.order - 1, size=cfg.m))

    ids = range(1, cfg.m + 1)
    pkt = make_packet(dict(zip(ids, symbols)), dict(zip(ids, coeffs)), spec, field)
    if adversarial:
        pkt = corrupt_payload(pkt, cfg.p_adv, spec, _stream(cfg.seed, trial, _ADVERSARY))

    ch_rng = _stream(cfg.seed, trial, _CHANNELS)
    ch_s, ch_r = Bsc(cfg.p_s), Bsc(cfg.p_relay)
    peers = tuple(
        Overheard(transmit(ch_s, x, cfg.n, ch_rng), hash_eval(spec, x), ch_s)
        for x in symbols[1:]
    )
    relay = Overheard(transmit(ch_r, pkt.payload, cfg.n, ch_rng), pkt.own_hash, ch_r)
    return WatchdogObservation(
        own_symbol=symbols[0],
        coeffs=coeffs,
        overheard=peers,
        relay_overheard=relay,
        hash_spec=spec,
        field=field,
        prune_eps=cfg.pruning_eps,
    )


def run_trial(cfg: TwoHopConfig, adversarial: bool, trial: int = 0) -> float:
    """p* for one trial; deterministic in (cfg.seed, trial, adversarial).

    With pruning enabled a candidate set can come up empty, meaning the
    overheard data is inconsistent with every remaining explanation; that
    is maximal suspicion and reported as p* = 0.
    """
    obs = simulate_observation(cfg, adversarial, trial)
    try:
        return consistency_probability(build_and_run_trellis(obs), obs)
    except InferenceError:
        return 0.0


def _trial_block(cfg: TwoHopConfig, adversarial: bool, lo: int, hi: int) -> list[float]:
    return [run_trial(cfg, adversarial, t) for t in range(lo, hi)]


def _samples(cfg: TwoHopConfig, adversarial: bool, workers: int) -> np.ndarray:
    if workers <= 1 or cfg.iterations < 4 * workers:
        return np.array(_trial_block(cfg, adversarial, 0, cfg.iterations))
    bounds = np.linspace(0, cfg.iterations, workers + 1, dtype=int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            _trial_block,
            itertools.repeat(cfg),
            itertools.repeat(adversarial),
            bounds[:-1],
            bounds[1:],
        )
        return np.concatenate([np.array(p) for p in parts])


def run_experiment(
    cfg: TwoHopConfig, keep_samples: bool = False, workers: int = 1
) -> ExperimentStats:
    """Paired honest/adversarial runs of cfg.iterations trials each.

    Deterministic for a fixed config regardless of worker count: trials are
    seeded individually and aggregated in index order.
    """
    relay = _samples(cfg, False, workers)
    adv = _samples(cfg, True, workers)
    return ExperimentStats(
        mean_p_relay=float(relay.mean()),
        var_relay=float(relay.var()),
        mean_p_adv=float(adv.mean()),
        var_adv=float(adv.var()),
        relay_samples=relay if keep_samples else None,
        adv_samples=adv if keep_samples else None,
    )


SWEEP_AXES = ("p_adv", "delta", "p_s", "m")


def run_sweep(
    cfg: TwoHopConfig, axis: str, values, keep_samples: bool = False, workers: int = 1
) -> list[tuple[float, ExperimentStats]]:
    """run_experiment at each value of one config axis, seed held fixed."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}")
    values = list(values)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("sweep values must be strictly increasing")
    out = []
    for v in values:
        point = replace(cfg, **{axis: v})
        out.append((v, run_experiment(point, keep_samples=keep_samples, workers=workers)))
    return out


def brute_force_consistency(obs: WatchdogObservation) -> float:
    """p* by exhaustive enumeration; the verification oracle for the trellis.

    Enumerates every hash-consistent tuple of peer symbols, weights it by
    its normalized product of channel likelihoods, and sums the inverse
    transition term at the implied linear combination. Plain float
    arithmetic throughout: no trellis, no shared state collapsing, no log
    domain. Enumeration is exponential in the peer count, hence the n <= 6
    guard.
    """
    n = obs.field.n
    if n > 6:
        raise ValueError("enumeration oracle is limited to n <= 6")
    spec, field = obs.hash_spec, obs.field
    codebook = obs.codebook if obs.codebook is not None else range(field.order)

    def candidates(o: Overheard) -> tuple[list[int], list[float]]:
        cands = collision_list(spec, o.hash_value, codebook)
        if obs.prune_eps is not None:
            r = ball_radius(o.channel, n, obs.prune_eps)
            cands = [y for y in cands if hamming(o.symbol, y) <= r]
        liks = [
            o.channel.p ** hamming(o.symbol, y)
            * (1.0 - o.channel.p) ** (n - hamming(o.symbol, y))
            for y in cands
        ]
        total = sum(liks)
        if total == 0.0:
            raise InferenceError("no candidate consistent with hash")
        return cands, [w / total for w in liks]

    relay = obs.relay_overheard
    relay_cands = collision_list(spec, relay.hash_value, codebook)
    norm = sum(
        relay.channel.p ** hamming(relay.symbol, y)
        * (1.0 - relay.channel.p) ** (n - hamming(relay.symbol, y))
        for y in relay_cands
    )
    if norm == 0.0:
        raise InferenceError("observation impossible under a noiseless relay channel")

    def inv_term(s: int) -> float:
        if hash_eval(spec, s) != relay.hash_value:
            return 0.0
        d = hamming(relay.symbol, s)
        return relay.channel.p**d * (1.0 - relay.channel.p) ** (n - d) / norm

    per_peer = []
    for coeff, peer in zip(obs.coeffs[1:], obs.overheard):
        cands, probs = candidates(peer)
        per_peer.append([(field.mul(coeff, y), w) for y, w in zip(cands, probs)])

    start = field.mul(obs.coeffs[0], obs.own_symbol)
    total = 0.0
    for combo in itertools.product(*per_peer):
        s, w = start, 1.0
        for shifted, prob in combo:
            s ^= shifted
            w *= prob
        total += w * inv_term(s)
    return total


def calibrate_threshold(
    cfg: TwoHopConfig, target_gamma: float, window: int = 1, workers: int = 1
) -> float:
    """Empirical threshold for the decision rule from honest-only trials.

    Returns the target_gamma quantile of the honest decision statistic so
    that flagging at p* <= t accuses an honest relay with frequency about
    target_gamma. ``window`` calibrates against means of that many
    consecutive samples, matching rolling-mean verdicts; window=1 is the
    plain per-observation rule.
    """
    if not 0.0 < target_gamma < 1.0:
        raise ValueError("target_gamma must be in (0, 1)")
    if window < 1 or cfg.iterations < window:
        raise ValueError("window must be in [1, iterations]")
    samples = _samples(cfg, False, workers)
    if window > 1:
        groups = len(samples) // window
        samples = samples[: groups * window].reshape(groups, window).mean(axis=1)
    return float(np.quantile(samples, target_gamma))


def matched_count_trial(
    n: int,
    peer_count: int,
    delta: int,
    p: float,
    seed: int = 0,
    trial: int = 0,
    pruning_eps: float = 0.5,
) -> int:
    """Matched codewords one honest trial produces, median-ball pruned.

    The counting argument behind the expected-count formula restricts each
    candidate set to the Hamming ball of the channel's expected distance;
    pruning_eps=0.5 (the median ball) realizes that construction. The
    formula also assumes idealized hash randomness (collision classes
    independent of Hamming geometry), which the field-polynomial family
    provides; the integer affine family's classes are low-bit aligned and
    inflate the count an order of magnitude. A trial whose pruned
    candidate sets come up empty counts zero matched states.
    """
    cfg = TwoHopConfig(
        m=peer_count + 1, n=n, delta=delta, p_s=p, p_relay=p, p_adv=0.0,
        iterations=1, seed=seed, pruning_eps=pruning_eps, hash_family="poly",
    )
    obs = simulate_observation(cfg, False, trial)
    try:
        trellis = build_and_run_trellis(obs)
    except InferenceError:
        return 0
    return len(matched_codewords(trellis, obs.relay_overheard.hash_value, obs.hash_spec))


def mean_matched_count(
    n: int, peer_count: int, delta: int, p: float, trials: int, seed: int = 0
) -> float:
    """Empirical mean matched-codeword count over honest trials."""
    counts = [
        matched_count_trial(n, peer_count, delta, p, seed=seed, trial=t)
        for t in range(trials)
    ]
    return float(np.mean(counts))


def sign_test_pvalue(diffs, alternative: str = "greater") -> float:
    """Exact one-sided sign test p-value on paired differences.

    Tests the null that positive and negative differences are equally
    likely; ties are discarded. alternative='greater' asks whether positive
    differences dominate.
    """
    pos = sum(1 for d in diffs if d > 0)
    neg = sum(1 for d in diffs if d < 0)
    total = pos + neg
    if total == 0:
        return 1.0
    k = pos if alternative == "greater" else neg
    tail = sum(math.comb(total, j) for j in range(k, total + 1))
    return tail / 2.0**total
