"""Dev harness: exercise critiquing, F-MAP, multistep, and conditioning
against a trained checkpoint."""

import json
import sys
import time

import numpy as np

sys.path.insert(0, "src")

from xrec.critique.core import CritiqueParams, apply_critique, impose_edits
from xrec.critique.session import rerank_after_critique, start_session
from xrec.experiments.drivers import run_fmap_experiment, run_multistep_experiment
from xrec.experiments.evaluate import justification_eval, keyphrase_eval, leave_one_out
from xrec.experiments.pipeline import restore
from xrec.model.infer import Scorer

RUN = "/tmp/xrec_dev/run4"


def main():
    t0 = time.time()
    net, prepared, _ = restore(f"{RUN}/model.ckpt", f"{RUN}/corpus")
    scorer = Scorer(net, prepared.tensors, kp_phrases=prepared.vocab.phrases)
    print(f"restore+precompute: {time.time()-t0:.1f}s")
    params = CritiqueParams()

    # 1. single critiques: convergence behavior
    t0 = time.time()
    rng = np.random.default_rng(11)
    n_users = len(prepared.tensors.users)
    conv, iters = [], []
    for _ in range(30):
        u = int(rng.integers(n_users))
        sess = start_session(scorer, prepared.tensors.users[u], generate_text=False)
        top = sess.top_position
        present = np.nonzero(sess.explanation_bits[top] > 0)[0]
        if len(present) == 0:
            continue
        k = int(present[0])
        target = impose_edits(sess.explanation_bits[top], [(k, "remove")])
        z, trace = apply_critique(net, sess.latents[top], target, params)
        conv.append(trace.converged)
        iters.append(trace.iterations)
    print(f"single-critique: converged {sum(conv)}/{len(conv)}, "
          f"iters mean {np.mean(iters):.1f} max {max(iters)}, {time.time()-t0:.1f}s")

    # 2. F-MAP over 60 pairs
    t0 = time.time()
    out = run_fmap_experiment(scorer, params, n_pairs=60, n_values=(10, 20), seed=3)
    print("f-map:", json.dumps(out["summary"], indent=1), f"{time.time()-t0:.1f}s")

    # 3. multistep over 25 users
    t0 = time.time()
    out = run_multistep_experiment(scorer, params, n_users=25, max_steps=5, seed=5)
    s = out["summary"]
    print("multistep precision:", [round(v, 4) for v in s["curves"]["precision"]])
    print("multistep recall:   ", [round(v, 4) for v in s["curves"]["recall"]])
    print("multistep r_kw:     ", [None if v is None else round(v, 4) for v in s["curves"]["r_kw"]])
    print(f"saturated {s['saturated_users']}/{s['users']}, {time.time()-t0:.1f}s")

    # 4. conditioning ablation
    t0 = time.time()
    out = justification_eval(scorer, max_pairs=80, seed=9)
    out.pop("records")
    print("justification eval:", json.dumps(out, indent=1), f"{time.time()-t0:.1f}s")

    # 5. keyphrase eval vs popularity + leave-one-out
    t0 = time.time()
    out = keyphrase_eval(scorer, n=10)
    print("keyphrase eval:", json.dumps(out, indent=1))
    out = leave_one_out(scorer, seed=1)
    print("leave-one-out:", json.dumps(out, indent=1), f"{time.time()-t0:.1f}s")


if __name__ == "__main__":
    main()
