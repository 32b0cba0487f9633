"""Command line: synthesize corpora, train, evaluate, serve.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from ..corpus import SyntheticConfig
from ..critique.core import CritiqueParams
from ..experiments.drivers import run_fmap_experiment, run_multistep_experiment
from ..experiments.evaluate import (
    keyphrase_eval,
    leave_one_out,
    rating_rank_correlation,
)
from ..experiments.pipeline import (
    CorpusOptions,
    build_network,
    checkpoint_header,
    prepare_corpus,
    restore,
    synthesize_corpus_dir,
)
from ..experiments.reports import format_summary, write_report
from ..model.hyper import HyperParams
from ..model.infer import Scorer
from ..model.train import TrainConfig, TrainingDiverged, train_model
from .manifest import RunManifest

DATA_DIR_VAR = "XREC_DATA_DIR"


def _data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_VAR, "."))


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise click.UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"config file is not valid JSON: {exc}")


def _build(cls, section: dict, what: str):
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"invalid {what} config: {exc}")


@click.group()
def cli():
    """Explainable recommender with critiquing."""


@cli.command()
@click.option("--out", type=click.Path(), default=None, help="Corpus output directory.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with synthetic/corpus sections.")
@click.option("--seed", type=int, default=None, help="Override both generator seeds.")
def synth(out, config_path, seed):
    """Generate a synthetic corpus with ground truth."""
    config = _load_config(config_path)
    syn_section = dict(config.get("synthetic", {}))
    opt_section = dict(config.get("corpus", {}))
    if seed is not None:
        syn_section["seed"] = seed
        opt_section["seed"] = seed
    cfg = _build(SyntheticConfig, syn_section, "synthetic")
    opts = _build(CorpusOptions, opt_section, "corpus")
    out_dir = Path(out) if out else _data_dir() / "corpus"
    manifest = RunManifest.start("synth", {"synthetic": syn_section, "corpus": opts.to_dict()},
                                 seed=cfg.seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    synthesize_corpus_dir(cfg, out_dir, opts)
    outputs = sorted(str(p) for p in out_dir.glob("*.json*"))
    manifest.finish(outputs).write(out_dir / "manifest.json")
    click.echo(f"corpus written to {out_dir} ({len(outputs)} files)")


@cli.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None, help="Checkpoint path.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with hyper/train/corpus sections.")
@click.option("--seed", type=int, default=0)
@click.option("--epochs", type=int, default=None)
@click.option("--d-model", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--lambda-r", type=float, default=None)
@click.option("--lambda-kp", type=float, default=None)
@click.option("--lambda-just", type=float, default=None)
def train(corpus_dir, out, config_path, seed, epochs, d_model, batch_size,
          lambda_r, lambda_kp, lambda_just):
    """Train a model on a prepared corpus directory."""
    config = _load_config(config_path)
    hyper_section = dict(config.get("hyper", {}))
    train_section = dict(config.get("train", {}))
    opt_section = dict(config.get("corpus", {}))
    overrides = {
        "d_model": d_model,
        "batch_size": batch_size,
        "lambda_rating": lambda_r,
        "lambda_keyphrase": lambda_kp,
        "lambda_justification": lambda_just,
    }
    for key, value in overrides.items():
        if value is not None:
            hyper_section[key] = value
    if epochs is not None:
        train_section["epochs"] = epochs
    train_section["seed"] = seed
    hyper = _build(HyperParams, hyper_section, "hyper")
    opts = _build(CorpusOptions, opt_section, "corpus")
    corpus = Path(corpus_dir) if corpus_dir else _data_dir() / "corpus"
    ckpt = Path(out) if out else _data_dir() / "model.ckpt"
    ckpt.parent.mkdir(parents=True, exist_ok=True)
    log_path = ckpt.with_suffix(".train_log.jsonl")
    train_section.setdefault("log_path", str(log_path))
    tc = _build(TrainConfig, train_section, "train")
    manifest = RunManifest.start(
        "train", {"hyper": hyper.to_dict(), "train": {"epochs": tc.epochs, "seed": tc.seed},
                  "corpus": opts.to_dict(), "lambdas": [hyper.lambda_rating,
                                                        hyper.lambda_keyphrase,
                                                        hyper.lambda_justification]},
        seed=seed, inputs=[corpus])
    prepared = prepare_corpus(corpus, opts, hyper.max_just_len)
    net = build_network(prepared, hyper, seed=seed)
    try:
        result = train_model(net, prepared.tensors, tc)
    except TrainingDiverged as exc:
        manifest.finish([str(log_path)]).write(ckpt.with_suffix(".manifest.json"))
        raise RuntimeError(f"training diverged: {exc}")
    net.save(ckpt, checkpoint_header(prepared, opts))
    manifest.finish([str(ckpt), str(log_path)]).write(ckpt.with_suffix(".manifest.json"))
    last = result.history[-1]
    click.echo(f"trained {len(result.history)} epochs, "
               f"valid loss {last['valid_loss']:.4f} "
               f"(parts {json.dumps(last['valid_parts'], sort_keys=True)})")
    click.echo(f"checkpoint {ckpt}")


@cli.command("eval")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--protocol", type=click.Choice(["rank", "fmap", "multistep", "loo"]),
              required=True)
@click.option("--out", type=click.Path(), default=None, help="Report output directory.")
@click.option("--seed", type=int, default=0)
@click.option("--pairs", type=int, default=500, help="fmap: sampled user-keyphrase pairs.")
@click.option("--steps", type=int, default=5, help="multistep: critique steps per user.")
@click.option("--users", "n_users", type=int, default=200, help="multistep: sampled users.")
@click.option("--topn", type=int, default=10)
@click.option("--critique-t", "critique_t", type=float, default=0.015)
@click.option("--critique-zeta", type=float, default=0.9)
@click.option("--max-iters", type=int, default=50)
def eval_cmd(checkpoint, corpus_dir, protocol, out, seed, pairs, steps, n_users, topn,
             critique_t, critique_zeta, max_iters):
    """Run an evaluation protocol and write a report."""
    out_dir = Path(out) if out else _data_dir() / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)
    params = CritiqueParams(threshold=critique_t, decay=critique_zeta, max_iters=max_iters)
    manifest = RunManifest.start(
        "eval", {"protocol": protocol, "pairs": pairs, "steps": steps, "users": n_users,
                 "topn": topn, "critique": params.as_dict()},
        seed=seed, inputs=[checkpoint, corpus_dir])
    net, prepared, _ = restore(checkpoint, corpus_dir)
    scorer = Scorer(net, prepared.tensors, kp_phrases=prepared.vocab.phrases)
    report_path = out_dir / f"{protocol}.jsonl"

    if protocol == "rank":
        summary = {}
        for n in (5, 10, 20):
            for key, value in keyphrase_eval(scorer, n=n).items():
                summary[f"{key}@{n}" if not key.endswith("relevant") else key] = value
        summary.update(rating_rank_correlation(scorer))
        write_report(report_path, "rank", summary)
    elif protocol == "fmap":
        result = run_fmap_experiment(scorer, params, n_pairs=pairs, n_values=(topn,), seed=seed)
        summary = result["summary"]
        write_report(report_path, "fmap", summary, result["records"])
    elif protocol == "multistep":
        result = run_multistep_experiment(scorer, params, n_users=n_users,
                                          max_steps=steps, n=topn, seed=seed)
        summary = result["summary"]
        write_report(report_path, "multistep", summary, result["records"])
    else:
        summary = leave_one_out(scorer, n=topn, seed=seed)
        write_report(report_path, "loo", summary)
    manifest.finish([str(report_path)]).write(out_dir / f"{protocol}.manifest.json")
    click.echo(format_summary(protocol, summary))
    click.echo(f"report {report_path}")


@cli.command()
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8571)
@click.option("--topn", type=int, default=20)
@click.option("--snapshot-dir", type=click.Path(), default=None)
@click.option("--critique-t", "critique_t", type=float, default=0.015)
@click.option("--critique-zeta", type=float, default=0.9)
@click.option("--max-iters", type=int, default=50)
def serve(checkpoint, corpus_dir, host, port, topn, snapshot_dir,
          critique_t, critique_zeta, max_iters):
    """Serve the HTTP session API."""
    from ..service.app import ServiceConfig, run_service

    params = CritiqueParams(threshold=critique_t, decay=critique_zeta, max_iters=max_iters)
    config = ServiceConfig(checkpoint_path=checkpoint, corpus_dir=corpus_dir,
                           host=host, port=port, topn_default=topn,
                           snapshot_dir=snapshot_dir, critique=params)
    manifest = RunManifest.start(
        "serve", {"host": host, "port": port, "topn": topn, "critique": params.as_dict()},
        seed=None, inputs=[checkpoint])
    manifest.finish([]).write(Path(config.snapshot_dir or ".") / "serve.manifest.json"
                              if config.snapshot_dir else Path("serve.manifest.json"))
    run_service(config)


def main(argv=None) -> int:
    """Dispatch with stable exit codes instead of click's SystemExit."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
