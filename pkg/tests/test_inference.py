import numpy as np
import pytest

from algwatch.channel import Bsc
from algwatch.gfield import default_field
from algwatch.hashing import HashSpec, hash_eval, sample_hash
from algwatch.inference import (
    InferenceError,
    Overheard,
    Verdict,
    WatchdogObservation,
    build_and_run_trellis,
    consistency_probability,
    decide,
    inverse_transition,
    matched_codewords,
    transition_row,
)
from algwatch.packet import Codebook

LOW2 = HashSpec("affine", 4, 2, (1, 0))
IDENT = HashSpec("affine", 4, 4, (1, 0))


def test_transition_row_injective_hash():
    row = transition_row(0b0110, 9, Bsc(0.2), IDENT)
    assert row.items() == [(9, 1.0)]


def test_transition_row_uniform_channel():
    row = transition_row(2, 2, Bsc(0.5), LOW2)
    assert row.candidates.tolist() == [2, 6, 10, 14]
    assert row.probs.tolist() == pytest.approx([0.25] * 4)


def test_transition_row_weights_hand_computed():
    # candidates {2, 6, 10, 14} at distances {0, 1, 1, 2} from the observation
    row = transition_row(2, 2, Bsc(0.1), LOW2)
    raw = [0.9**4, 0.9**3 * 0.1, 0.9**3 * 0.1, 0.9**2 * 0.1**2]
    expect = [w / sum(raw) for w in raw]
    assert row.candidates.tolist() == [2, 6, 10, 14]
    assert row.probs.tolist() == pytest.approx(expect, rel=1e-12)
    assert row.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_transition_row_restricted_codebook_can_be_empty():
    cb = Codebook(4, frozenset({3, 7}))  # nothing hashing to 2 mod 4
    with pytest.raises(InferenceError):
        transition_row(2, 2, Bsc(0.1), LOW2, codebook=cb)


def test_transition_row_pruning_drops_far_candidates():
    # eps = 0.6 gives radius 0 at p=0.1, n=4: only the observation survives
    row = transition_row(2, 2, Bsc(0.1), LOW2, prune_eps=0.6)
    assert row.items() == [(2, 1.0)]
    # pruning away every candidate is a structural error
    with pytest.raises(InferenceError):
        transition_row(3, 2, Bsc(0.1), LOW2, prune_eps=0.6)


def _obs(m, coeffs, x1, peers, relay, spec, n=4, prune=None):
    f = default_field(n)
    return WatchdogObservation(
        own_symbol=x1,
        coeffs=coeffs,
        overheard=peers,
        relay_overheard=relay,
        hash_spec=spec,
        field=f,
        prune_eps=prune,
    )


def test_trellis_single_source():
    relay = Overheard(0, hash_eval(IDENT, 0), Bsc(0.1))
    obs = _obs(1, (3,), 9, (), relay, IDENT)
    trellis = build_and_run_trellis(obs)
    f = default_field(4)
    assert trellis.layers == [{f.mul(3, 9): 1.0}]


def test_trellis_injective_hash_collapses():
    f = default_field(4)
    x1, x2, a = 5, 11, (1, 1)
    peer = Overheard(x2, hash_eval(IDENT, x2), Bsc(0.2))
    relay = Overheard(x1 ^ x2, hash_eval(IDENT, x1 ^ x2), Bsc(0.2))
    trellis = build_and_run_trellis(_obs(2, a, x1, (peer,), relay, IDENT))
    assert trellis.layers[1] == {x1 ^ x2: pytest.approx(1.0)}


def test_trellis_layer_two_hand_computed():
    # peer row {2, 6, 10, 14}; unit coefficients xor with a_1 x_1 = 5
    peer = Overheard(2, 2, Bsc(0.1))
    relay = Overheard(0, 0, Bsc(0.1))
    trellis = build_and_run_trellis(_obs(2, (1, 1), 5, (peer,), relay, LOW2))
    raw = [0.9**4, 0.9**3 * 0.1, 0.9**3 * 0.1, 0.9**2 * 0.1**2]
    expect = {5 ^ c: w / sum(raw) for c, w in zip([2, 6, 10, 14], raw)}
    got = trellis.layers[1]
    assert set(got) == set(expect)
    for s, w in expect.items():
        assert got[s] == pytest.approx(w, rel=1e-12)


def test_trellis_layer_mass_conserved():
    rng = np.random.default_rng(17)
    for n in (4, 6, 8):
        f = default_field(n)
        for _ in range(10):
            spec = sample_hash(rng, "affine", n, int(rng.integers(0, 3)))
            m = int(rng.integers(1, 5))
            coeffs = tuple(1 + int(c) for c in rng.integers(0, f.order - 1, size=m))
            peers = tuple(
                Overheard(
                    int(rng.integers(0, f.order)),
                    hash_eval(spec, int(rng.integers(0, f.order))),
                    Bsc(0.15),
                )
                for _ in range(m - 1)
            )
            relay = Overheard(0, 0, Bsc(0.1))
            obs = _obs(m, coeffs, int(rng.integers(0, f.order)), peers, relay, spec, n=n)
            trellis = build_and_run_trellis(obs)
            for layer in trellis.layers:
                assert sum(layer.values()) == pytest.approx(1.0, abs=1e-9)


def test_trellis_shift_is_permutation():
    # extending a layer by one candidate maps distinct states to distinct states
    f = default_field(4)
    for a in (1, 7, 15):
        for x in range(16):
            shift = f.mul(a, x)
            assert len({s ^ shift for s in range(16)}) == 16


def test_inverse_transition_hash_mismatch_is_zero():
    assert inverse_transition(3, 2, 2, Bsc(0.1), LOW2) == 0.0


def test_inverse_transition_injective_hash():
    assert inverse_transition(9, 2, 9, Bsc(0.1), IDENT) == pytest.approx(1.0)


def test_inverse_transition_hand_computed():
    norm = 0.9**4 + 2 * (0.9**3 * 0.1) + 0.9**2 * 0.1**2
    got = inverse_transition(6, 2, 2, Bsc(0.1), LOW2)
    assert got == pytest.approx(0.9**3 * 0.1 / norm, rel=1e-12)


def test_consistency_probability_noiseless_honest():
    f = default_field(4)
    x1, x2, a = 5, 11, (2, 7)
    true = f.lincomb(a, [x1, x2])
    peer = Overheard(x2, hash_eval(IDENT, x2), Bsc(0.0))
    relay = Overheard(true, hash_eval(IDENT, true), Bsc(0.0))
    obs = _obs(2, a, x1, (peer,), relay, IDENT)
    assert consistency_probability(build_and_run_trellis(obs), obs) == pytest.approx(1.0)


def test_consistency_probability_no_matched_state():
    f = default_field(4)
    x1, x2 = 5, 11
    true = f.lincomb((1, 1), [x1, x2])
    peer = Overheard(x2, hash_eval(IDENT, x2), Bsc(0.1))
    # relay announces a hash no reachable state carries
    relay = Overheard(true, hash_eval(IDENT, true ^ 1), Bsc(0.1))
    obs = _obs(2, (1, 1), x1, (peer,), relay, IDENT)
    assert consistency_probability(build_and_run_trellis(obs), obs) == 0.0


def test_consistency_probability_structural_error_when_class_empty():
    cb = Codebook(4, frozenset({3, 7}))
    peer = Overheard(3, hash_eval(LOW2, 3), Bsc(0.1))
    relay = Overheard(2, 2, Bsc(0.1))
    f = default_field(4)
    obs = WatchdogObservation(
        own_symbol=1, coeffs=(1, 1), overheard=(peer,), relay_overheard=relay,
        hash_spec=LOW2, field=f, codebook=cb,
    )
    trellis = build_and_run_trellis(obs)
    with pytest.raises(InferenceError):
        consistency_probability(trellis, obs)


def test_matched_codewords():
    f = default_field(4)
    x1, x2, a = 5, 11, (1, 1)
    true = f.lincomb(a, [x1, x2])
    # delta = 0: every positive-weight final state is matched
    zero = HashSpec("affine", 4, 0, (1, 0))
    peer = Overheard(x2, 0, Bsc(0.1))
    relay = Overheard(true, 0, Bsc(0.1))
    obs = _obs(2, a, x1, (peer,), relay, zero)
    trellis = build_and_run_trellis(obs)
    support = sorted(trellis.layers[-1])
    assert matched_codewords(trellis, 0, zero) == support
    # honest noiseless chain: the true combination is always matched
    peer = Overheard(x2, hash_eval(LOW2, x2), Bsc(0.1))
    relay = Overheard(true, hash_eval(LOW2, true), Bsc(0.1))
    obs = _obs(2, a, x1, (peer,), relay, LOW2)
    assert true in matched_codewords(build_and_run_trellis(obs), relay.hash_value, LOW2)


def test_decide():
    assert decide(0.0, 0.0) is Verdict.MALICIOUS
    assert decide(0.3, 0.0) is Verdict.WELL_BEHAVING
    assert decide(0.5, 1.0) is Verdict.MALICIOUS
    assert decide(0.3, 0.25) is Verdict.WELL_BEHAVING
    with pytest.raises(ValueError):
        decide(0.5, 1.5)


def test_observation_validation():
    peer = Overheard(2, 2, Bsc(0.1))
    relay = Overheard(0, 0, Bsc(0.1))
    f = default_field(4)
    with pytest.raises(ValueError):
        WatchdogObservation(1, (1,), (peer,), relay, LOW2, f)  # coeff count off
    with pytest.raises(ValueError):
        WatchdogObservation(1, (1, 0), (peer,), relay, LOW2, f)  # zero coeff
    with pytest.raises(ValueError):
        WatchdogObservation(99, (1, 1), (peer,), relay, LOW2, f)  # symbol too wide
