"""Dev probe: how critiques move latents and what that does to ratings."""

import sys

import numpy as np

sys.path.insert(0, "src")

from xrec.critique.core import CritiqueParams, apply_critique, impose_edits
from xrec.critique.session import start_session
from xrec.experiments.pipeline import restore
from xrec.model.infer import Scorer

RUN = "/tmp/xrec_dev/run2"


def main():
    net, prepared, _ = restore(f"{RUN}/model.ckpt", f"{RUN}/corpus")
    scorer = Scorer(net, prepared.tensors, kp_phrases=prepared.vocab.phrases)
    params = CritiqueParams()
    rng = np.random.default_rng(21)
    users = prepared.tensors.users

    norms, gap0s, ratings_before, ratings_after = [], [], [], []
    drop_affected, drop_unaffected = [], []
    for trial in range(12):
        u = users[int(rng.integers(len(users)))]
        sess = start_session(scorer, u, generate_text=False)
        top = sess.top_position
        z_all = sess.latents
        norms.append(float(np.linalg.norm(z_all, axis=1).mean()))
        present = np.nonzero(sess.explanation_bits[top] > 0)[0]
        k = int(present[int(rng.integers(len(present)))])
        affected = sess.explanation_bits[:, k] > 0

        r_before = scorer.ratings(z_all)
        # critique every candidate toward its own target
        targets = np.stack([impose_edits(sess.explanation_bits[i], [(k, "remove")])
                            for i in range(len(z_all))])
        from xrec.critique.core import apply_critique_batch
        z_after, traces = apply_critique_batch(net, z_all, targets, params)
        r_after = scorer.ratings(z_after)

        move = np.linalg.norm(z_after - z_all, axis=1)
        gap0s.append(float(np.mean([t.gaps[0] for t in traces])))
        conv = sum(t.converged for t in traces)
        drop = r_before - r_after
        drop_affected.append(float(drop[affected].mean()))
        drop_unaffected.append(float(drop[~affected].mean()))
        if trial < 4:
            print(f"trial {trial}: |z| {np.linalg.norm(z_all, axis=1).mean():.2f} "
                  f"move {move.mean():.2f} (max {move.max():.2f}) conv {conv}/{len(z_all)} "
                  f"gap0 {np.mean([t.gaps[0] for t in traces]):.3f} "
                  f"gap_end {np.mean([t.gaps[-1] for t in traces]):.3f} "
                  f"iters {np.mean([t.iterations for t in traces]):.1f}")
            print(f"  rating drop affected {drop[affected].mean():+.4f} "
                  f"unaffected {drop[~affected].mean():+.4f} "
                  f"(n_affected {affected.sum()})")
    print(f"\nmean |z| {np.mean(norms):.2f}, mean initial gap {np.mean(gap0s):.3f}")
    print(f"mean rating drop: affected {np.mean(drop_affected):+.4f} "
          f"unaffected {np.mean(drop_unaffected):+.4f}")

    # how steep is the kp head? single unit-norm random step effect on probs
    sess = start_session(scorer, users[0], generate_text=False)
    z = sess.latents[sess.top_position]
    p0 = scorer.keyphrase_probs(z[None, :])[0]
    step = rng.standard_normal(z.shape).astype(z.dtype)
    step /= np.linalg.norm(step)
    p1 = scorer.keyphrase_probs((z + step)[None, :])[0]
    print(f"unit random step: mean |dP| {np.abs(p1 - p0).mean():.4f}, "
          f"max {np.abs(p1 - p0).max():.4f}")
    r0 = scorer.ratings(z[None, :])[0]
    r1 = scorer.ratings((z + step)[None, :])[0]
    print(f"rating response to unit step: {r1 - r0:+.4f} (r0 {r0:.3f})")


if __name__ == "__main__":
    main()
