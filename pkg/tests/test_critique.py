import hashlib

import numpy as np
import pytest

from test_network import TOY, toy_net
from xrec.nn.tensor import Tensor
from xrec.critique.core import (
    CritiqueError,
    CritiqueParams,
    apply_critique,
    apply_critique_batch,
    impose_edits,
    make_critique_vector,
)
from xrec.critique.session import (
    multistep_step,
    read_session_snapshot,
    rerank_after_critique,
    reset_session,
    start_session,
    write_session_snapshot,
)


def checksum(net):
    digest = hashlib.sha256()
    for name, p in sorted(net.named_parameters().items()):
        digest.update(name.encode())
        digest.update(p.data.tobytes())
    return digest.hexdigest()


# ------------------------------------------------------------------- params


def test_critique_params_validation():
    params = CritiqueParams(threshold=0.015, decay=0.9, max_iters=50)
    assert params.as_dict() == {"threshold": 0.015, "decay": 0.9, "max_iters": 50}
    with pytest.raises(ValueError):
        CritiqueParams(threshold=0.0)
    with pytest.raises(ValueError):
        CritiqueParams(decay=0.0)
    with pytest.raises(ValueError):
        CritiqueParams(decay=1.5)
    with pytest.raises(ValueError):
        CritiqueParams(max_iters=0)


# -------------------------------------------------------------------- edits


def test_impose_edits_sets_bits_idempotently():
    bits = np.array([1.0, 0.0, 1.0, 0.0], dtype=np.float32)
    edits = [(0, "remove"), (3, "add")]
    once = impose_edits(bits, edits)
    np.testing.assert_array_equal(once, [0.0, 0.0, 1.0, 1.0])
    np.testing.assert_array_equal(impose_edits(once, edits), once)
    np.testing.assert_array_equal(bits, [1.0, 0.0, 1.0, 0.0])  # input untouched


def test_impose_edits_matrix_form():
    bits = np.zeros((3, 4), dtype=np.float32)
    out = impose_edits(bits, [(2, "add")])
    np.testing.assert_array_equal(out[:, 2], 1.0)
    assert out.sum() == 3.0


def test_impose_edits_validation():
    bits = np.zeros(4, dtype=np.float32)
    with pytest.raises(CritiqueError) as err:
        impose_edits(bits, [(7, "add")])
    assert err.value.reason == "bad-index"
    with pytest.raises(CritiqueError) as err:
        impose_edits(bits, [(1, "toggle")])
    assert err.value.reason == "bad-action"


def test_make_critique_vector_validates_state():
    bits = np.array([1.0, 0.0], dtype=np.float32)
    out = make_critique_vector(bits, [(0, "remove"), (1, "add")])
    np.testing.assert_array_equal(out, [0.0, 1.0])

    with pytest.raises(CritiqueError) as err:
        make_critique_vector(bits, [(0, "add")])
    assert err.value.reason == "redundant-edit"
    with pytest.raises(CritiqueError) as err:
        make_critique_vector(bits, [(1, "remove")])
    assert err.value.reason == "redundant-edit"


def test_make_critique_vector_sequence_semantics():
    bits = np.array([1.0, 0.0], dtype=np.float32)
    # remove then re-add the same index is legal: state is tracked through
    # the sequence
    out = make_critique_vector(bits, [(0, "remove"), (0, "add")])
    np.testing.assert_array_equal(out, [1.0, 0.0])
    with pytest.raises(CritiqueError):
        make_critique_vector(bits, [(0, "remove"), (0, "remove")])
    with pytest.raises(CritiqueError):
        make_critique_vector(np.zeros((2, 2), dtype=np.float32), [(0, "add")])


# ----------------------------------------------------------------- schedule


def test_step_norms_follow_decay_schedule(rng):
    net = toy_net(seed=1)
    params = CritiqueParams(threshold=1e-4, decay=0.9, max_iters=12)
    z0 = rng.standard_normal(TOY["d_model"]).astype(np.float32)
    target = np.array([1.0, 0.0, 1.0, 0.0], dtype=np.float32)
    _, trace = apply_critique(net, z0, target, params)
    assert trace.iterations > 0
    expected = [0.9 ** t for t in range(trace.iterations)]
    np.testing.assert_allclose(trace.step_norms, expected, atol=1e-6)
    assert len(trace.gaps) == trace.iterations + 1


def test_latent_moves_by_exact_step(rng):
    net = toy_net(seed=1)
    params = CritiqueParams(threshold=1e-4, decay=0.8, max_iters=1)
    z0 = rng.standard_normal(TOY["d_model"]).astype(np.float32)
    target = np.ones(4, dtype=np.float32)
    z1, trace = apply_critique(net, z0, target, params)
    assert trace.iterations == 1
    assert np.linalg.norm(z1 - z0) == pytest.approx(1.0, abs=1e-5)


def test_converged_trace_ends_at_threshold(rng):
    net = toy_net(seed=2)
    params = CritiqueParams(threshold=0.35, decay=0.9, max_iters=50)
    z0 = rng.standard_normal(TOY["d_model"]).astype(np.float32)
    probs = net.explain_keyphrases(Tensor(z0[None, :]))[0][0]
    target = (probs > 0.5).astype(np.float32)
    z1, trace = apply_critique(net, z0, target, params)
    if trace.converged:
        assert trace.gaps[-1] <= params.threshold
        assert trace.reason == "converged"
    else:
        assert trace.reason in ("max-iters", "vanished-gradient")


def test_zero_iteration_idempotence(rng):
    net = toy_net(seed=3)
    params = CritiqueParams(threshold=0.75, decay=0.9, max_iters=50)
    z0 = rng.standard_normal(TOY["d_model"]).astype(np.float32)
    target = np.array([1.0, 0.0, 0.0, 1.0], dtype=np.float32)
    # probabilities live in (0,1) so the initial gap cannot exceed 0.75...
    z1, trace = apply_critique(net, z0, target, params)
    assert trace.iterations == 0
    assert trace.converged
    assert trace.step_norms == []
    assert len(trace.gaps) == 1
    np.testing.assert_array_equal(z1, z0)


def test_vanished_gradient_reported(rng):
    net = toy_net(seed=4)
    # cut the head off from the latent: logits become a constant
    net.p["kp"]["l1"]["w"].data[:] = 0.0
    params = CritiqueParams(threshold=0.01, decay=0.9, max_iters=5)
    z0 = rng.standard_normal(TOY["d_model"]).astype(np.float32)
    target = np.ones(4, dtype=np.float32)
    z1, trace = apply_critique(net, z0, target, params)
    assert trace.reason == "vanished-gradient"
    assert not trace.converged
    assert trace.iterations == 0
    np.testing.assert_array_equal(z1, z0)


def test_critique_never_touches_parameters(rng):
    net = toy_net(seed=5)
    before = checksum(net)
    flags = [p.requires_grad for p in net.parameters()]
    z0 = rng.standard_normal((3, TOY["d_model"])).astype(np.float32)
    targets = (rng.random((3, 4)) > 0.5).astype(np.float32)
    apply_critique_batch(net, z0, targets, CritiqueParams(max_iters=8))
    assert checksum(net) == before
    assert [p.requires_grad for p in net.parameters()] == flags


def test_critique_deterministic(rng):
    net = toy_net(seed=6)
    z0 = rng.standard_normal((2, TOY["d_model"])).astype(np.float32)
    targets = np.array([[1, 0, 1, 0], [0, 1, 0, 1]], dtype=np.float32)
    params = CritiqueParams(max_iters=10)
    za, ta = apply_critique_batch(net, z0, targets, params)
    zb, tb = apply_critique_batch(net, z0, targets, params)
    np.testing.assert_array_equal(za, zb)
    assert [t.as_dict() for t in ta] == [t.as_dict() for t in tb]


def test_critique_batch_shape_validation(rng):
    net = toy_net()
    with pytest.raises(CritiqueError) as err:
        apply_critique_batch(net, np.zeros((2, TOY["d_model"]), dtype=np.float32),
                             np.zeros((3, 4), dtype=np.float32), CritiqueParams())
    assert err.value.reason == "bad-shape"


def test_batch_rows_share_schedule_prefix(rng):
    net = toy_net(seed=7)
    params = CritiqueParams(threshold=0.05, decay=0.9, max_iters=15)
    z0 = rng.standard_normal((4, TOY["d_model"])).astype(np.float32)
    targets = (rng.random((4, 4)) > 0.5).astype(np.float32)
    _, traces = apply_critique_batch(net, z0, targets, params)
    for trace in traces:
        expected = [0.9 ** t for t in range(trace.iterations)]
        np.testing.assert_allclose(trace.step_norms, expected, atol=1e-6)


# ----------------------------------------------------------------- sessions


FAST = CritiqueParams(threshold=0.05, decay=0.9, max_iters=5)


def test_start_session_structure(tiny_scorer):
    user = tiny_scorer.ct.users[0]
    session = start_session(tiny_scorer, user, n_candidates=6)
    assert session.user_id == user
    assert len(session.candidate_rows) == 6
    assert np.all(np.diff(session.candidate_rows) > 0)
    assert session.ranking.shape == (6,)
    assert sorted(session.ranking.tolist()) == list(range(6))
    order = session.scores[session.ranking]
    assert all(a >= b for a, b in zip(order, order[1:]))
    assert session.explanation_bits.shape == (6, tiny_scorer.net.n_keyphrases)
    assert (session.explanation_bits.sum(axis=1) == tiny_scorer.net.hyper.top_m).all()
    assert isinstance(session.justification, list)
    np.testing.assert_array_equal(session.latents, session.base_latents)


def test_start_session_unknown_user(tiny_scorer):
    with pytest.raises(CritiqueError) as err:
        start_session(tiny_scorer, "nobody")
    assert err.value.reason == "unknown-entity"
    with pytest.raises(CritiqueError) as err:
        start_session(tiny_scorer, tiny_scorer.ct.users[0], n_candidates=0)
    assert err.value.reason == "bad-candidates"


def test_empty_edit_list_is_noop(tiny_scorer):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[1], n_candidates=5)
    latents = session.latents.copy()
    ranking = session.ranking.copy()
    rerank_after_critique(tiny_scorer, session, [], FAST)
    np.testing.assert_array_equal(session.latents, latents)
    np.testing.assert_array_equal(session.ranking, ranking)
    assert session.history == []
    assert session.last_traces is None


def test_critique_validates_against_displayed_top(tiny_scorer):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[2], n_candidates=5)
    top_bits = session.explanation_bits[session.top_position]
    on = int(np.nonzero(top_bits == 1.0)[0][0])
    with pytest.raises(CritiqueError) as err:
        rerank_after_critique(tiny_scorer, session, [(on, "add")], FAST)
    assert err.value.reason == "redundant-edit"
    assert session.history == []


def test_critiques_move_latents_and_compound(tiny_scorer):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[3], n_candidates=5)
    base = session.latents.copy()
    top_bits = session.explanation_bits[session.top_position]
    on = int(np.nonzero(top_bits == 1.0)[0][0])
    rerank_after_critique(tiny_scorer, session, [(on, "remove")], FAST, timestamp=1.0)
    after_first = session.latents.copy()
    assert not np.array_equal(after_first, base)
    assert len(session.history) == 1
    assert session.history[0].keyphrase_index == on
    assert session.history[0].action == "remove"
    assert session.history[0].timestamp == 1.0
    assert session.last_traces is not None
    assert len(session.last_traces) == 5

    top_bits = session.explanation_bits[session.top_position]
    off = int(np.nonzero(top_bits == 0.0)[0][0])
    rerank_after_critique(tiny_scorer, session, [(off, "add")], FAST, timestamp=2.0)
    assert not np.array_equal(session.latents, after_first)
    assert len(session.history) == 2


def test_reset_restores_initial_state(tiny_scorer):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[4], n_candidates=5)
    initial_ranking = session.ranking.copy()
    initial_scores = session.scores.copy()
    top_bits = session.explanation_bits[session.top_position]
    on = int(np.nonzero(top_bits == 1.0)[0][0])
    rerank_after_critique(tiny_scorer, session, [(on, "remove")], FAST)
    reset_session(tiny_scorer, session)
    np.testing.assert_array_equal(session.latents, session.base_latents)
    np.testing.assert_array_equal(session.ranking, initial_ranking)
    np.testing.assert_array_equal(session.scores, initial_scores)
    assert session.history == []
    assert session.last_traces is None


def test_snapshot_roundtrip(tiny_scorer, tmp_path):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[5], n_candidates=4,
                            session_id="snap-1")
    top_bits = session.explanation_bits[session.top_position]
    on = int(np.nonzero(top_bits == 1.0)[0][0])
    rerank_after_critique(tiny_scorer, session, [(on, "remove")], FAST, timestamp=5.0)
    path = tmp_path / "session.jsonl"
    write_session_snapshot(path, session)
    snap = read_session_snapshot(path)
    assert snap["meta"]["session_id"] == "snap-1"
    assert snap["meta"]["user_id"] == session.user_id
    assert snap["meta"]["candidate_rows"] == session.candidate_rows.tolist()
    assert snap["meta"]["ranking"] == session.ranking.tolist()
    assert len(snap["events"]) == 1
    assert snap["events"][0]["keyphrase_index"] == on
    restored = np.array(
        [snap["latents"][row] for row in session.candidate_rows.tolist()], dtype=np.float32
    )
    np.testing.assert_array_equal(restored, session.latents)


def test_snapshot_rejects_other_files(tmp_path):
    path = tmp_path / "other.jsonl"
    path.write_text('{"version": 1, "kind": "report"}\n')
    with pytest.raises(ValueError):
        read_session_snapshot(path)


def test_multistep_saturated_when_covered(tiny_scorer):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[0], n_candidates=4,
                            generate_text=False)
    displayed = session.explanation_bits[session.top_position]
    target_bits = displayed.copy()  # nothing missing
    before = session.latents.copy()
    out = multistep_step(tiny_scorer, session, 0, target_bits,
                         np.random.default_rng(0), FAST)
    assert out.saturated
    assert out.keyphrase_index is None
    np.testing.assert_array_equal(session.latents, before)
    assert session.history == []


def test_multistep_adds_missing_target_bit(tiny_scorer):
    session = start_session(tiny_scorer, tiny_scorer.ct.users[1], n_candidates=4,
                            generate_text=False)
    displayed = session.explanation_bits[session.top_position]
    target_bits = np.ones_like(displayed)
    out = multistep_step(tiny_scorer, session, 0, target_bits,
                         np.random.default_rng(0), FAST)
    assert not out.saturated
    assert displayed[out.keyphrase_index] == 0.0
    assert len(session.history) == 1
    assert session.history[0].action == "add"
    assert session.history[0].keyphrase_index == out.keyphrase_index
