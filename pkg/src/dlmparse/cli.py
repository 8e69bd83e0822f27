"""Command-line pipeline: train, parse, extract-dlm, filter-agree, eval.

A config file of ``key = value`` lines (optionally ``subcommand.key``)
supplies defaults that flags override.  All subcommands exit 0 on success
and nonzero with a single-line error otherwise.  Corpora are streamed;
parse and extract-dlm can fan out over worker processes without changing
their output.
"""

from __future__ import annotations

import hashlib
import multiprocessing
from collections import Counter
from typing import Dict, List, Optional, Tuple

import click

from . import dlm as dlm_mod
from .agreement import filter_agreement
from .conll import (
    AlignmentError,
    ConllParseError,
    Treebank,
    TreeValidationError,
    iter_conll,
    read_conll_file,
    write_conll_file,
    write_sentence,
)
from .evaluation import PUNCT_RULES, evaluate
from .features import DLMSet, TEMPLATE_SETS
from .learner import (
    Model,
    ModelFormatError,
    TrainConfig,
    TrainingError,
    decode,
    load_model_file,
    save_model_file,
    train,
)

_ERRORS = (
    ConllParseError,
    TreeValidationError,
    AlignmentError,
    dlm_mod.DlmFormatError,
    ModelFormatError,
    TrainingError,
    ValueError,
    OSError,
)


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _read_config_file(path: str) -> Dict[str, Dict[str, str]]:
    sections: Dict[str, Dict[str, str]] = {}
    flat: Dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _fail(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if "." in key:
                section, _, opt = key.partition(".")
                sections.setdefault(section, {})[opt] = value
            else:
                flat[key] = value
    for cmd in ("train", "parse", "extract-dlm", "filter-agree", "eval"):
        merged = dict(flat)
        merged.update(sections.get(cmd, {}))
        sections[cmd] = merged
    return sections


def _file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_dlm_files(paths: Tuple[str, ...]) -> Tuple[Optional[DLMSet], List[Tuple[int, str]]]:
    if not paths:
        return None, []
    tables = [dlm_mod.load_file(p) for p in paths]
    ds = DLMSet(tables=tables)
    manifest = [(t.order, _file_digest(p)) for t, p in zip(tables, paths)]
    return ds, manifest


@click.group()
@click.option(
    "--config",
    "config_path",
    type=str,
    default=None,
    help="Config file of key = value defaults (keys may be subcommand.option).",
)
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str]) -> None:
    """Dependency parsing with dependency language model features."""
    if config_path is not None:
        ctx.default_map = _read_config_file(config_path)


@main.command("train")
@click.argument("gold", type=str)
@click.option("--dlm", "dlm_paths", multiple=True, type=str, help="DLM table file; repeatable.")
@click.option("--beam", default=40, show_default=True, help="Beam width for training and decoding.")
@click.option("--epochs", default=10, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--shuffle/--no-shuffle", default=True, show_default=True)
@click.option("--dlm-on-shift/--no-dlm-on-shift", default=True, show_default=True)
@click.option(
    "--template-set",
    type=click.Choice(TEMPLATE_SETS),
    default="full",
    show_default=True,
)
@click.option("-o", "--output", "model_out", required=True, type=str, help="Model file to write.")
def cmd_train(gold, dlm_paths, beam, epochs, seed, shuffle, dlm_on_shift, template_set, model_out):
    """Train a parser on a gold CoNLL-X treebank."""
    try:
        tb = read_conll_file(gold)
        ds, manifest = _load_dlm_files(dlm_paths)
        cfg = TrainConfig(
            beam_width=beam,
            epochs=epochs,
            seed=seed,
            shuffle=shuffle,
            dlm_on_shift=dlm_on_shift,
            template_set=template_set,
        )

        def progress(info):
            if info["event"] == "start":
                click.echo(
                    f"training on {info['usable']} sentences"
                    f" (skipped non-projective={info['skipped_nonprojective']}"
                    f" multi-root={info['skipped_multiroot']})",
                    err=True,
                )
            else:
                click.echo(
                    f"epoch {info['epoch']}: updates={info['updates']}"
                    f" early={info['early_updates']}"
                    f" exact_match={info['exact_match']:.4f}",
                    err=True,
                )

        model = train(tb, cfg, ds, progress)
        model.dlm_manifest = manifest
        save_model_file(model, model_out)
        click.echo(f"model written to {model_out}", err=True)
    except _ERRORS as exc:
        raise _fail(str(exc)) from exc


def _check_manifest(model: Model, manifest: List[Tuple[int, str]]) -> None:
    if model.dlm_manifest and model.dlm_manifest != manifest:
        raise _fail(
            "DLM files do not match the model's manifest "
            f"(expected {model.dlm_manifest}, got {manifest})"
        )
    want = list(model.config.get("dlm_orders", []))
    if want and [o for o, _ in manifest] != want:
        raise _fail(f"model requires DLM tables of orders {want}")
    if not want and manifest:
        raise _fail("model was trained without DLM tables; do not pass --dlm")


_worker_state: dict = {}


def _parse_init(model: Model, ds: Optional[DLMSet], beam: Optional[int]) -> None:
    _worker_state["model"] = model
    _worker_state["ds"] = ds
    _worker_state["beam"] = beam


def _parse_one(sentence):
    parsed, _ = decode(
        _worker_state["model"], sentence, _worker_state["beam"], _worker_state["ds"]
    )
    return parsed


@main.command("parse")
@click.argument("model_path", metavar="MODEL", type=str)
@click.argument("input_path", metavar="INPUT", type=str)
@click.option("--dlm", "dlm_paths", multiple=True, type=str)
@click.option("--beam", default=None, type=int, help="Override the model's beam width.")
@click.option("--jobs", default=1, show_default=True, help="Worker processes.")
@click.option("-o", "--output", required=True, type=str)
def cmd_parse(model_path, input_path, dlm_paths, beam, jobs, output):
    """Parse a CoNLL-X file, writing predicted heads and labels."""
    try:
        model = load_model_file(model_path)
        ds, manifest = _load_dlm_files(dlm_paths)
        _check_manifest(model, manifest)
        n = 0
        with open(input_path, encoding="utf-8") as inp, open(
            output, "w", encoding="utf-8", newline="\n"
        ) as out:
            sentences = iter_conll(inp)
            if jobs <= 1:
                _parse_init(model, ds, beam)
                results = map(_parse_one, sentences)
                for parsed in results:
                    write_sentence(parsed, out)
                    n += 1
            else:
                with multiprocessing.Pool(
                    jobs, initializer=_parse_init, initargs=(model, ds, beam)
                ) as pool:
                    for parsed in pool.imap(_parse_one, sentences, chunksize=8):
                        write_sentence(parsed, out)
                        n += 1
        click.echo(f"parsed {n} sentences to {output}", err=True)
    except _ERRORS as exc:
        raise _fail(str(exc)) from exc


def _parse_orders(spec: str) -> List[int]:
    try:
        orders = [int(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise _fail(f"bad --orders value {spec!r}; expected e.g. '1' or '1,2,3'") from None
    if not orders or any(b <= a for a, b in zip(orders, orders[1:])):
        raise _fail(f"--orders must be non-empty and strictly increasing, got {spec!r}")
    return orders


def _count_chunk(args):
    sentences, orders, unit_mode = args
    return {o: dlm_mod.count_events(sentences, o, unit_mode) for o in orders}


def _chunks(iterable, size):
    chunk = []
    for item in iterable:
        chunk.append(item)
        if len(chunk) >= size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


@main.command("extract-dlm")
@click.argument("parsed", type=str)
@click.option("--orders", default="1", show_default=True, help="Comma-separated DLM orders (m).")
@click.option(
    "--unit",
    "unit_mode",
    type=click.Choice(dlm_mod.UNIT_MODES),
    default="form",
    show_default=True,
)
@click.option("--min-count", default=3, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("-o", "--output", "prefix", required=True, type=str, help="Output file prefix.")
def cmd_extract_dlm(parsed, orders, unit_mode, min_count, jobs, prefix):
    """Build one bucketed DLM table per order from a parsed corpus."""
    try:
        order_list = _parse_orders(orders)
        counts: Dict[int, Counter] = {o: Counter() for o in order_list}
        with open(parsed, encoding="utf-8") as inp:
            sentences = iter_conll(inp)
            if jobs <= 1:
                for s in sentences:
                    for o in order_list:
                        counts[o].update(dlm_mod.extract_events(s, o, unit_mode))
            else:
                tasks = ((chunk, order_list, unit_mode) for chunk in _chunks(sentences, 200))
                with multiprocessing.Pool(jobs) as pool:
                    for part in pool.imap_unordered(_count_chunk, tasks):
                        for o, cnt in part.items():
                            counts[o].update(cnt)
        for o in order_list:
            table = dlm_mod.assign_buckets(
                dlm_mod.table_from_counts(counts[o], o, unit_mode, min_count)
            )
            path = f"{prefix}.order{o}.dlm"
            dlm_mod.save_file(table, path)
            sizes = {"PH": 0, "PM": 0, "PL": 0}
            for e in table.entries.values():
                sizes[e.bucket] += 1
            click.echo(
                f"order {o}: {len(table)} entries"
                f" (PH={sizes['PH']} PM={sizes['PM']} PL={sizes['PL']}) -> {path}",
                err=True,
            )
            if len(table) == 0:
                click.echo(f"warning: order {o} table is empty after filtering", err=True)
    except _ERRORS as exc:
        raise _fail(str(exc)) from exc


@main.command("filter-agree")
@click.argument("corpus_a", type=str)
@click.argument("corpus_b", type=str)
@click.option("--unlabeled", is_flag=True, help="Compare heads only, ignoring labels.")
@click.option("-o", "--output", required=True, type=str)
def cmd_filter_agree(corpus_a, corpus_b, unlabeled, output):
    """Keep the sentences on which two parses agree."""
    try:
        a = read_conll_file(corpus_a)
        b = read_conll_file(corpus_b)
        kept, report = filter_agreement(a, b, labeled=not unlabeled)
        write_conll_file(kept, output)
        click.echo(
            f"kept {report.agreed} of {report.total} sentences"
            f" (mean length {report.mean_length_agreed:.2f}"
            f" vs {report.mean_length_all:.2f} overall)",
            err=True,
        )
        click.echo(report.record())
    except _ERRORS as exc:
        raise _fail(str(exc)) from exc


@main.command("eval")
@click.argument("gold", type=str)
@click.argument("pred", type=str)
@click.option(
    "--punct",
    type=click.Choice(PUNCT_RULES),
    default="gold-pos",
    show_default=True,
    help="Punctuation exclusion rule.",
)
@click.option("-o", "--output", default=None, type=str, help="Also write the record to a file.")
def cmd_eval(gold, pred, punct, output):
    """Score a parsed file against gold (LAS/UAS, POS accuracy)."""
    try:
        report = evaluate(read_conll_file(gold), read_conll_file(pred), punct_rule=punct)
        click.echo(report.text(), err=True)
        click.echo(report.record())
        if output is not None:
            with open(output, "w", encoding="utf-8", newline="\n") as f:
                f.write(report.record())
                f.write("\n")
    except _ERRORS as exc:
        raise _fail(str(exc)) from exc


if __name__ == "__main__":
    main()
