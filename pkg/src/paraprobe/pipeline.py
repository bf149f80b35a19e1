"""End-to-end pipeline: ingest through paired evaluation and rank statistics.

Stages run in a fixed order; each writes its artifacts to the output
directory and its intermediate results to a content-addressed cache, so a
rerun with the same config performs no client calls and an added model
reuses every upstream stage.  Per-example failures are logged and the
example excluded; a stage that fails for every item aborts the run.

Artifacts are deterministic byte-for-byte for a fixed config, fixture
inputs, and seed: no timestamps, no absolute paths, sorted JSON keys.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ._version import __version__
from .cache import StageCache, digest, file_digest
from .clients import EmbedClient, TextGenClient, make_embed_client, make_textgen_client
from .config import RunConfig
from .conllu import DepTree, read_conllu
from .errors import (
    CalibrationError,
    ConfigError,
    FilterError,
    GenerationError,
    ParaprobeError,
    TokenizationError,
)
from .ingest import Benchmark, Example, load_benchmark
from .paraphrase import GenConfig, generate_paraphrases, prompt_template
from .ranking import RankedParaphrase, rank_paraphrases
from .semfilter import (
    FilterConfig,
    OverlapRecord,
    apply_cosine_filter,
    cosine_similarity,
    distribution_tables,
    overlap_record,
)
from .sqleval import (
    ExecLimits,
    ItemOutcome,
    ModelEvalState,
    PairedEvalRecord,
    evaluate_rank,
    usable_examples,
)
from .stats import stratified_curves, tau_report

log = logging.getLogger(__name__)

STAGE_ORDER = (
    "ingest",
    "paraphrase",
    "parse_import",
    "rank",
    "filter",
    "evaluate",
    "stats",
    "report",
)


class StageFatalError(ParaprobeError):
    """A stage failed for every item or on a run-level precondition."""


@dataclass
class RunResult:
    out_dir: Path
    fatal: bool = False
    fatal_reason: str = ""
    completed_stages: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    client_calls: dict[str, int] = field(default_factory=dict)


def _tree_payload(tree: DepTree) -> dict:
    return {
        "labels": [node.label for node in tree.nodes],
        "parents": list(tree.parents),
    }


def _json_line(payload) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)


class Pipeline:
    """Runs the stage sequence for one config; stages share state here."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.cache = StageCache(config.resolve(config.cache_dir))
        self.out_dir = config.resolve(config.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.errors: list[str] = []
        self.excluded: dict[str, list[str]] = {}

        self.benchmark: Benchmark | None = None
        self.bench_digest = ""
        self.parasets: dict[str, dict] = {}
        self.trees: dict[str, DepTree] = {}
        self.parse_report: dict = {}
        self.ranked: dict[str, list[dict]] = {}
        self.filtered: dict[str, list[dict]] = {}
        self.overlaps: list[OverlapRecord] = []
        self.usable: set[str] = set()
        self.eval_payloads: dict[str, dict] = {}
        self.stats_payloads: dict[str, dict] = {}

        self._gen_client: TextGenClient | None = None
        self._embed_client: EmbedClient | None = None
        self._model_clients: dict[str, TextGenClient] = {}

    # -- client plumbing ----------------------------------------------------

    def _resolve_client_spec(self, spec: dict) -> dict:
        resolved = dict(spec)
        for key in ("transcript", "fixture"):
            if key in resolved:
                resolved[key] = str(self.config.resolve(resolved[key]))
        return resolved

    def _client_fingerprint(self, spec: dict) -> dict:
        """Config slice identifying a client by behavior, not by file path."""
        fp = dict(spec)
        for key in ("transcript", "fixture"):
            if key in fp:
                path = self.config.resolve(fp.pop(key))
                if not path.exists():
                    raise ConfigError(f"client fixture not found: {path}")
                fp[f"{key}_digest"] = file_digest(path)
        return fp

    def gen_client(self) -> TextGenClient:
        if self._gen_client is None:
            self._gen_client = make_textgen_client(
                self._resolve_client_spec(self.config.generation.client)
            )
        return self._gen_client

    def embed_client(self) -> EmbedClient:
        if self._embed_client is None:
            self._embed_client = make_embed_client(
                self._resolve_client_spec(self.config.filter.client)
            )
        return self._embed_client

    def model_client(self, spec: dict) -> TextGenClient:
        model_id = spec["model_id"]
        if model_id not in self._model_clients:
            self._model_clients[model_id] = make_textgen_client(
                self._resolve_client_spec(spec)
            )
        return self._model_clients[model_id]

    def client_calls(self) -> dict[str, int]:
        calls = {
            "generator": self._gen_client.calls if self._gen_client else 0,
            "embedder": self._embed_client.calls if self._embed_client else 0,
        }
        for model_id, client in self._model_clients.items():
            calls[model_id] = client.calls
        return calls

    # -- helpers ------------------------------------------------------------

    def _map(self, fn, items: list):
        if self.config.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(fn, items))

    def _exclude(self, stage: str, example_id: str, reason: str) -> None:
        message = f"{stage}: {example_id}: {reason}"
        log.warning("%s; example excluded", message)
        self.errors.append(message)
        self.excluded.setdefault(stage, []).append(example_id)

    def _meta(self) -> dict:
        return {"seed": self.config.stats.seed, "B": self.config.stats.bootstrap_samples}

    def _write_jsonl(self, name: str, rows: list) -> None:
        lines = [_json_line({"meta": self._meta()})]
        lines += [_json_line(row) for row in rows]
        (self.out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def _write_json(self, name: str, payload: dict) -> None:
        payload = {**self._meta(), **payload}
        text = json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2)
        (self.out_dir / name).write_text(text + "\n", encoding="utf-8")

    def _write_csv(self, name: str, header: str, rows: list[str]) -> None:
        meta = self._meta()
        lines = [f"# seed={meta['seed']} B={meta['B']}", header, *rows]
        (self.out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")

    # -- stages -------------------------------------------------------------

    def stage_ingest(self) -> None:
        cfg = self.config.benchmark
        bench_path = self.config.resolve(cfg.path)
        dev_file = bench_path / "dev.json"
        if not dev_file.exists():
            raise StageFatalError(f"benchmark dev set not found: {dev_file}")

        # content digest covers the dev set and every database file, so a
        # cache entry cannot outlive the data it was derived from
        db_files = sorted(bench_path.rglob("*.sqlite"))
        self.bench_digest = digest(
            {
                "dev": file_digest(dev_file),
                "dbs": {str(p.relative_to(bench_path)): file_digest(p) for p in db_files},
            }
        )
        config_slice = {"format": cfg.format}

        def compute() -> dict:
            benchmark = load_benchmark(bench_path, cfg.format)
            return {
                "release_tag": benchmark.release_tag,
                "db_root_rel": str(benchmark.db_root.relative_to(bench_path)),
                "skipped": benchmark.skipped,
                "examples": [
                    {
                        "id": e.id,
                        "db_id": e.db_id,
                        "question": e.question,
                        "context_turns": list(e.context_turns),
                        "gold_sql": e.gold_sql,
                        "schema_text": e.schema_text,
                    }
                    for e in benchmark.examples
                ],
            }

        payload = self.cache.get_or_compute("ingest", self.bench_digest, config_slice, compute)
        self.benchmark = Benchmark(
            name=cfg.format,
            release_tag=payload["release_tag"],
            examples=[
                Example(
                    id=e["id"],
                    db_id=e["db_id"],
                    question=e["question"],
                    context_turns=tuple(e["context_turns"]),
                    gold_sql=e["gold_sql"],
                    schema_text=e["schema_text"],
                )
                for e in payload["examples"]
            ],
            db_root=bench_path / payload["db_root_rel"],
            skipped=list(payload["skipped"]),
        )
        if not self.benchmark.examples:
            raise StageFatalError("benchmark contains no usable examples")
        log.info(
            "ingest: %d examples, %d skipped",
            len(self.benchmark.examples),
            len(self.benchmark.skipped),
        )
        self._write_jsonl(
            "examples.jsonl",
            [
                {
                    "id": e.id,
                    "db_id": e.db_id,
                    "question": e.question,
                    "context_turns": list(e.context_turns),
                    "gold_sql": e.gold_sql,
                    "schema_digest": digest(e.schema_text),
                }
                for e in self.benchmark.examples
            ],
        )

    def stage_paraphrase(self) -> None:
        gen = self.config.generation
        gen_config = GenConfig(
            num_queries=gen.num_queries,
            temperature=gen.temperature,
            model_id=str(gen.client.get("model_id", gen.client.get("kind", ""))),
            max_attempts=gen.max_attempts,
        )
        config_slice = {
            "num_queries": gen.num_queries,
            "temperature": gen.temperature,
            "max_attempts": gen.max_attempts,
            "template": digest(prompt_template()),
            "client": self._client_fingerprint(gen.client),
        }

        def for_example(example: Example):
            input_digest = digest(
                {
                    "question": example.question,
                    "context_turns": list(example.context_turns),
                    "gold_sql": example.gold_sql,
                    "schema": example.schema_text,
                }
            )

            def compute() -> dict:
                result = generate_paraphrases(example, self.gen_client(), gen_config)
                return {
                    "candidates": result.candidates,
                    "shortfall": result.shortfall,
                    "generator_model": result.generator_model,
                }

            try:
                return example.id, self.cache.get_or_compute(
                    "paraphrase", input_digest, config_slice, compute
                )
            except (GenerationError, ConfigError) as exc:
                self._exclude("paraphrase", example.id, str(exc))
                return example.id, None

        results = self._map(for_example, self.benchmark.examples)
        self.parasets = {eid: payload for eid, payload in results if payload is not None}
        if not self.parasets:
            raise StageFatalError("paraphrase generation failed for every example")
        log.info("paraphrase: %d/%d examples have candidates",
                 len(self.parasets), len(self.benchmark.examples))

        self._write_jsonl(
            "paraphrases.jsonl",
            [
                {"example_id": eid, **self.parasets[eid]}
                for eid in self._para_ids()
            ],
        )
        self._write_jsonl("parse_requests.jsonl", self.parse_requests())

    def _para_ids(self) -> list[str]:
        """Example ids with paraphrases, in benchmark order."""
        return [e.id for e in self.benchmark.examples if e.id in self.parasets]

    def parse_requests(self) -> list[dict]:
        """Sentences the external dependency parser must process.

        Originals come first, then candidates in generation order; the id
        convention (`<example_id>` and `<example_id>#p<j>`) is what
        parse_import joins on.
        """
        requests = []
        by_id = {e.id: e for e in self.benchmark.examples}
        for eid in self._para_ids():
            requests.append({"id": eid, "text": by_id[eid].question})
        for eid in self._para_ids():
            for j, text in enumerate(self.parasets[eid]["candidates"], start=1):
                requests.append({"id": f"{eid}#p{j}", "text": text})
        return requests

    def stage_parse_import(self) -> None:
        self.trees = {}
        sentence_count = 0
        for name in self.config.parses.files:
            path = self.config.resolve(name)
            if not path.exists():
                raise StageFatalError(f"parse file not found: {path}")
            for tree in read_conllu(path.read_text(encoding="utf-8")):
                sentence_count += 1
                if tree.sent_id is None:
                    log.warning("%s: sentence without sent_id ignored", path)
                    continue
                if tree.sent_id in self.trees:
                    raise StageFatalError(
                        f"duplicate sent_id {tree.sent_id!r} across parse files"
                    )
                self.trees[tree.sent_id] = tree

        originals = candidates = 0
        missing_candidates: list[str] = []
        kept: dict[str, dict] = {}
        for eid in self._para_ids():
            if eid not in self.trees:
                self._exclude("parse_import", eid, "no parse for original question")
                continue
            originals += 1
            kept[eid] = self.parasets[eid]
            for j in range(1, len(self.parasets[eid]["candidates"]) + 1):
                if f"{eid}#p{j}" in self.trees:
                    candidates += 1
                else:
                    missing_candidates.append(f"{eid}#p{j}")
                    log.warning("parse_import: no parse for %s#p%d; candidate dropped",
                                eid, j)
        self.parasets = kept
        if not self.parasets:
            raise StageFatalError("no example has a parsed original question")
        self.parse_report = {
            "files": list(self.config.parses.files),
            "sentences": sentence_count,
            "originals_matched": originals,
            "candidates_matched": candidates,
            "candidates_missing": missing_candidates,
            "examples_dropped": self.excluded.get("parse_import", []),
        }
        log.info("parse_import: %d sentences, %d originals, %d candidates",
                 sentence_count, originals, candidates)
        self._write_json("parses_report.json", self.parse_report)

    def stage_rank(self) -> None:
        def for_example(eid: str):
            orig_tree = self.trees[eid]
            pairs = []
            for j, text in enumerate(self.parasets[eid]["candidates"], start=1):
                tree = self.trees.get(f"{eid}#p{j}")
                if tree is not None:
                    pairs.append((text, tree))
            if not pairs:
                self._exclude("rank", eid, "no parsed candidates")
                return eid, None
            input_digest = digest(
                {
                    "original": _tree_payload(orig_tree),
                    "candidates": [[text, _tree_payload(tree)] for text, tree in pairs],
                }
            )

            def compute() -> list[dict]:
                ranked = rank_paraphrases(orig_tree, pairs)
                return [
                    {"text": p.text, "ted": p.ted, "ted_norm": p.ted_norm, "rank": p.rank}
                    for p in ranked
                ]

            return eid, self.cache.get_or_compute(
                "rank", input_digest, {"costs": "unit"}, compute
            )

        results = self._map(for_example, self._para_ids())
        self.ranked = {eid: payload for eid, payload in results if payload is not None}
        if not self.ranked:
            raise StageFatalError("ranking failed for every example")
        log.info("rank: %d examples ranked", len(self.ranked))
        self._write_jsonl(
            "ranked.jsonl",
            [
                {"example_id": eid, "paraphrases": self.ranked[eid]}
                for eid in self._ranked_ids()
            ],
        )

    def _ranked_ids(self) -> list[str]:
        return [e.id for e in self.benchmark.examples if e.id in self.ranked]

    def _filtered_ids(self) -> list[str]:
        return [e.id for e in self.benchmark.examples if e.id in self.filtered]

    def stage_filter(self) -> None:
        fcfg = self.config.filter
        filter_config = FilterConfig(
            cosine_threshold=fcfg.cosine_threshold,
            embed_model_id=str(fcfg.client.get("model_id", fcfg.client.get("kind", ""))),
            jaccard_bins=[tuple(b) for b in fcfg.jaccard_bins],
            length_bins=fcfg.length_bins,
        )
        config_slice = {
            "cosine_threshold": fcfg.cosine_threshold,
            "client": self._client_fingerprint(fcfg.client),
        }
        by_id = {e.id: e for e in self.benchmark.examples}

        def for_example(eid: str):
            question = by_id[eid].question
            entries = self.ranked[eid]
            input_digest = digest(
                {"original": question, "candidates": [e["text"] for e in entries]}
            )

            def compute() -> list[dict]:
                ranked = [
                    RankedParaphrase(
                        text=e["text"], tree=None, ted=e["ted"],
                        ted_norm=e["ted_norm"], rank=e["rank"],
                    )
                    for e in entries
                ]
                apply_cosine_filter(ranked, question, self.embed_client(), filter_config)
                return [
                    {
                        "text": p.text, "ted": p.ted, "ted_norm": p.ted_norm,
                        "rank": p.rank, "cosine": p.cosine, "retained": p.retained,
                    }
                    for p in ranked
                ]

            try:
                return eid, self.cache.get_or_compute(
                    "filter", input_digest, config_slice, compute
                )
            except FilterError as exc:
                self._exclude("filter", eid, str(exc))
                return eid, None

        results = self._map(for_example, self._ranked_ids())
        self.filtered = {eid: payload for eid, payload in results if payload is not None}
        if not self.filtered:
            raise StageFatalError("semantic filtering failed for every example")

        self.overlaps = []
        for eid in self._filtered_ids():
            for entry in self.filtered[eid]:
                try:
                    self.overlaps.append(
                        overlap_record(eid, entry["rank"], by_id[eid].question, entry["text"])
                    )
                except TokenizationError as exc:
                    log.warning("overlap: %s rank %d: %s", eid, entry["rank"], exc)

        retained = sum(
            1 for entries in self.filtered.values() for e in entries if e["retained"]
        )
        total = sum(len(entries) for entries in self.filtered.values())
        log.info("filter: retained %d/%d paraphrases at threshold %.3f",
                 retained, total, fcfg.cosine_threshold)

        self._write_jsonl(
            "filtered.jsonl",
            [
                {"example_id": eid, "paraphrases": self.filtered[eid]}
                for eid in self._filtered_ids()
            ],
        )
        tables = distribution_tables(
            self.overlaps, set(range(1, self.config.generation.num_queries + 1)),
            filter_config,
        )
        rows = [
            f"{table},{rank},{lo!r},{hi!r},{n}"
            for table in ("length", "jaccard")
            for rank, lo, hi, n in tables[table]
        ]
        self._write_csv("overlap.csv", "table,rank,bin_lo,bin_hi,count", rows)

    def stage_evaluate(self) -> None:
        limits = ExecLimits(
            timeout_s=self.config.evaluation.timeout_s,
            row_cap=self.config.evaluation.row_cap,
        )
        ranks = list(range(1, self.config.generation.num_queries + 1))
        filtered_digest = digest({eid: self.filtered[eid] for eid in self._filtered_ids()})

        usable_payload = self.cache.get_or_compute(
            "usable",
            self.bench_digest,
            {"timeout_s": limits.timeout_s, "row_cap": limits.row_cap},
            lambda: sorted(usable_examples(self.benchmark, limits)),
        )
        self.usable = set(usable_payload)
        if not self.usable:
            raise StageFatalError("no example has executable gold SQL")

        nl2sql_template = (
            resources.files("paraprobe.assets")
            .joinpath("nl2sql_prompt.txt")
            .read_text(encoding="utf-8")
        )
        paraphrases = {
            eid: [
                RankedParaphrase(
                    text=e["text"], tree=None, ted=e["ted"], ted_norm=e["ted_norm"],
                    rank=e["rank"], cosine=e["cosine"], retained=e["retained"],
                )
                for e in self.filtered[eid]
            ]
            for eid in self._filtered_ids()
        }

        self.eval_payloads = {}
        for spec in self.config.evaluation.models:
            model_id = spec["model_id"]
            config_slice = {
                "model": self._client_fingerprint(spec),
                "limits": {"timeout_s": limits.timeout_s, "row_cap": limits.row_cap},
                "ranks": ranks,
                "template": digest(nl2sql_template),
            }
            input_digest = digest({"benchmark": self.bench_digest, "filtered": filtered_digest})

            def compute(spec=spec, model_id=model_id) -> dict:
                client = self.model_client(spec)
                state = ModelEvalState()
                records, outcomes = [], []
                for rank in ranks:
                    record, items = evaluate_rank(
                        self.benchmark, paraphrases, rank, client,
                        limits=limits, state=state, usable=self.usable,
                    )
                    if record is None:
                        continue
                    records.append(vars(record))
                    outcomes.extend(vars(o) for o in items)
                if outcomes and all(o["error_class"] == "PredictionError" for o in outcomes):
                    raise StageFatalError(
                        f"model {model_id}: every prediction failed; client unreachable?"
                    )
                return {"records": records, "outcomes": outcomes}

            self.eval_payloads[model_id] = self.cache.get_or_compute(
                "evaluate", input_digest, config_slice, compute
            )
            log.info("evaluate: %s covered %d ranks",
                     model_id, len(self.eval_payloads[model_id]["records"]))

        self._write_csv(
            "eval_records.csv",
            "model_id,dataset,rank,n_pairs,acc_orig,acc_para,delta",
            [
                ",".join([
                    r["model_id"], r["dataset"], str(r["rank"]), str(r["n_pairs"]),
                    repr(r["acc_orig"]), repr(r["acc_para"]), repr(r["delta"]),
                ])
                for model_id in sorted(self.eval_payloads)
                for r in self.eval_payloads[model_id]["records"]
            ],
        )
        self._write_jsonl(
            "outcomes.jsonl",
            [
                o
                for model_id in sorted(self.eval_payloads)
                for o in self.eval_payloads[model_id]["outcomes"]
            ],
        )

    def stage_stats(self) -> None:
        scfg = self.config.stats
        jaccard_by_key = {(r.example_id, r.rank): r.jaccard for r in self.overlaps}

        @dataclass(frozen=True)
        class CurveItem:
            rank: int
            jaccard: float
            correct: bool

        self.stats_payloads = {}
        for model_id in sorted(self.eval_payloads):
            payload = self.eval_payloads[model_id]
            records = [PairedEvalRecord(**r) for r in payload["records"]]
            dataset = records[0].dataset if records else self.benchmark.release_tag

            input_digest = digest(
                {
                    "eval": payload,
                    "overlaps": [
                        [r.example_id, r.rank, r.jaccard] for r in self.overlaps
                    ],
                }
            )
            config_slice = {
                "B": scfg.bootstrap_samples,
                "seed": scfg.seed,
                "rank_filters": list(scfg.rank_filters),
                "jaccard_bins": [list(b) for b in self.config.filter.jaccard_bins],
            }

            def compute(payload=payload, records=records, dataset=dataset,
                        model_id=model_id) -> dict:
                reports = []
                for rank_filter in scfg.rank_filters:
                    try:
                        report = tau_report(
                            records, rank_filter, B=scfg.bootstrap_samples,
                            seed=scfg.seed, model_id=model_id, dataset=dataset,
                        )
                    except Exception as exc:
                        log.warning("stats: %s/%s: %s", model_id, rank_filter, exc)
                        continue
                    reports.append({
                        "model_id": report.model_id,
                        "dataset": report.dataset,
                        "rank_filter": report.rank_filter,
                        "tau": report.estimate.tau,
                        "n": report.estimate.n,
                        "n_c": report.estimate.n_c,
                        "n_d": report.estimate.n_d,
                        "ci_lo": report.ci_lo,
                        "ci_hi": report.ci_hi,
                        "point_outside_ci": report.point_outside_ci,
                        "resamples": report.resamples,
                    })
                items = [
                    CurveItem(o["rank"], jaccard_by_key[(o["example_id"], o["rank"])],
                              o["correct"])
                    for o in payload["outcomes"]
                    if o["side"] == "paraphrase"
                    and (o["example_id"], o["rank"]) in jaccard_by_key
                ]
                curves = []
                if items:
                    for curve in stratified_curves(items, list(self.config.filter.jaccard_bins)):
                        curves.append({
                            "bin": curve.bin_label,
                            "points": [vars(p) for p in curve.points],
                            "tau": vars(curve.tau) if curve.tau else None,
                        })
                return {"tau_reports": reports, "curves": curves}

            self.stats_payloads[model_id] = self.cache.get_or_compute(
                "stats", input_digest, config_slice, compute
            )

        all_reports = [
            r
            for model_id in sorted(self.stats_payloads)
            for r in self.stats_payloads[model_id]["tau_reports"]
        ]
        self._write_json("tau.json", {"reports": all_reports})
        self._write_csv(
            "tau.csv",
            "model_id,dataset,rank_filter,tau,ci_lo,ci_hi,n,B,seed",
            [
                ",".join([
                    r["model_id"], r["dataset"], r["rank_filter"],
                    repr(r["tau"]), repr(r["ci_lo"]), repr(r["ci_hi"]),
                    str(r["n"]), str(scfg.bootstrap_samples), str(scfg.seed),
                ])
                for r in all_reports
            ],
        )
        self._write_json(
            "curves.json",
            {
                "models": {
                    model_id: self.stats_payloads[model_id]["curves"]
                    for model_id in sorted(self.stats_payloads)
                }
            },
        )

    def stage_report(self) -> None:
        manifest = {
            "package": {"name": "paraprobe", "version": __version__},
            "config": self.config.raw,
            "benchmark": {
                "release_tag": self.benchmark.release_tag,
                "content_digest": self.bench_digest,
                "examples": len(self.benchmark.examples),
                "skipped": self.benchmark.skipped,
                "usable_gold": sorted(self.usable),
            },
            "counts": {
                "paraphrase_sets": len(self.parasets),
                "ranked": len(self.ranked),
                "filtered": len(self.filtered),
                "overlap_records": len(self.overlaps),
                "models_evaluated": sorted(self.eval_payloads),
            },
            "parse_report": self.parse_report,
            "excluded": {stage: sorted(ids) for stage, ids in sorted(self.excluded.items())},
        }
        self._write_json("manifest.json", manifest)
        log.info("report: bundle written to %s", self.out_dir)

    # -- entry points -------------------------------------------------------

    def run(self, until: str = "report") -> RunResult:
        if until not in STAGE_ORDER:
            raise ConfigError(f"unknown stage {until!r}")
        result = RunResult(out_dir=self.out_dir)
        stages = STAGE_ORDER[: STAGE_ORDER.index(until) + 1]
        for stage in stages:
            try:
                getattr(self, f"stage_{stage}")()
            except ParaprobeError as exc:
                # per-example errors are absorbed inside each stage; anything
                # escaping here means the stage as a whole cannot proceed
                log.error("fatal at stage %s: %s", stage, exc)
                result.fatal = True
                result.fatal_reason = f"{stage}: {exc}"
                break
            result.completed_stages.append(stage)
        result.errors = list(self.errors)
        result.client_calls = self.client_calls()
        return result

    def calibrate(self, sample_size: int) -> list[tuple[float, float, int]]:
        """Cosine histogram over (original, paraphrase) pairs for threshold picking.

        Runs ingest and paraphrase generation (cache-backed), embeds pairs
        from the first ``sample_size`` examples, and returns rows of
        (bin_lo, bin_hi, count) over [-1, 1]; also written to
        calibration.csv.
        """
        self.stage_ingest()
        self.stage_paraphrase()
        ids = self._para_ids()
        if sample_size < len(ids):
            ids = ids[:sample_size]
        else:
            log.info("calibrate: sample_size %d >= corpus %d; using full corpus",
                     sample_size, len(ids))
        by_id = {e.id: e for e in self.benchmark.examples}
        cosines: list[float] = []
        for eid in ids:
            texts = [by_id[eid].question] + self.parasets[eid]["candidates"]
            try:
                vectors = self.embed_client().embed(texts)
            except Exception as exc:
                self._exclude("calibrate", eid, str(exc))
                continue
            cosines.extend(
                cosine_similarity(vectors[0], v) for v in vectors[1:]
            )
        if not cosines:
            raise CalibrationError("no (original, paraphrase) pairs available")
        edges = [round(-1.0 + 0.1 * i, 1) for i in range(21)]
        rows = []
        for lo, hi in zip(edges, edges[1:]):
            if hi == 1.0:
                count = sum(1 for c in cosines if lo <= c <= hi)
            else:
                count = sum(1 for c in cosines if lo <= c < hi)
            rows.append((lo, hi, count))
        self._write_csv(
            "calibration.csv",
            "bin_lo,bin_hi,count",
            [f"{lo!r},{hi!r},{n}" for lo, hi, n in rows],
        )
        return rows
