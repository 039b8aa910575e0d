"""Command-line driver for batch analysis and corpus management.

Commands:
  analyze   full per-leaf report (frames, pencil, focal data) for one spec
  classify  verdict document plus the verdict exit code
  corpus    generate or verify the deterministic corpus
  serve     run the HTTP service

Exit codes: 0 Cylinder/Cone or plain success, 1 parse/validation/IO error,
2 HypothesisFailure, 3 Undetermined, 4 NonDegenerate, 5 corpus mismatch.
All reports embed the configuration and seed; rerunning a command with the
same input and seed reproduces its output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import (
    RunConfig, base_samples, chart_samples_for, classify, max_residual_of,
)
from .corpus import (
    build_default_corpus, load_corpus, make_duality_pairs, verify_corpus,
    write_corpus,
)
from .errors import GaussKitError
from .expr import ExprMap
from .focal import factor_focal, focal_hypercone, focal_polynomial, leaf_focal_roots
from .frames import check_basic_equations, extract_leaf_data
from .gauss import rank_profile
from .pencil import select_regular_pair
from .report import canonical_dumps, to_jsonable
from .ruled import RuledSpec, parse_spec_obj


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausskit",
        description="Rank, ruled-frame, and focal analysis of parametrized "
                    "submanifolds with degenerate tangent spread.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, fmt=True):
        p.add_argument("--tol-rank", type=float, default=RunConfig.tol_rank,
                       help="singular value cutoff for rank decisions")
        p.add_argument("--tol-gap", type=float, default=RunConfig.tol_gap,
                       help="minimum relative gap between pencil eigenvalues")
        p.add_argument("--tol-coincide", type=float,
                       default=RunConfig.tol_coincide,
                       help="angular tolerance for coincident focal covectors")
        p.add_argument("--tol-residual", type=float,
                       default=RunConfig.tol_residual,
                       help="acceptance threshold for frame and factor residuals")
        p.add_argument("--samples", type=int, default=RunConfig.samples,
                       help="number of base sample points")
        p.add_argument("--seed", type=int, default=RunConfig.seed,
                       help="seed for sample points and pencil search")
        p.add_argument("--out", type=Path, default=None,
                       help="write the report here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    pa = sub.add_parser("analyze", help="full report for one spec file")
    pa.add_argument("input", type=Path)
    add_common(pa, fmt=False)

    pc = sub.add_parser("classify", help="verdict document for one spec file")
    pc.add_argument("input", type=Path)
    add_common(pc)

    pco = sub.add_parser("corpus", help="corpus management")
    corpus_sub = pco.add_subparsers(dest="corpus_command", required=True)
    pg = corpus_sub.add_parser("gen", help="write the corpus to a directory")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", type=Path, required=True)
    pg.add_argument("--pairs", action="store_true",
                    help="also write the projective duality pairs")
    pv = corpus_sub.add_parser("verify", help="re-check corpus expectations")
    pv.add_argument("dir", type=Path)
    add_common(pv)

    ps = sub.add_parser("serve", help="run the HTTP service")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8000)
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        tol_rank=args.tol_rank, tol_gap=args.tol_gap,
        tol_coincide=args.tol_coincide, tol_residual=args.tol_residual,
        samples=args.samples, seed=args.seed)


def load_spec(path: Path) -> RuledSpec | ExprMap:
    try:
        text = path.read_text()
    except OSError as exc:
        raise GaussKitError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GaussKitError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if isinstance(obj, dict) and isinstance(obj.get("spec"), dict) \
            and str(obj.get("schema", "")).startswith("gausskit/corpus-entry"):
        obj = obj["spec"]
    return parse_spec_obj(obj)


def analysis_document(spec: RuledSpec | ExprMap, cfg: RunConfig) -> dict:
    """Per-leaf frames, pencil, and focal objects, as one JSON document."""
    doc: dict = {"schema": "gausskit/analysis/v1", "config": cfg.to_obj()}
    if isinstance(spec, ExprMap):
        rng = np.random.default_rng(cfg.seed)
        samples = [rng.uniform(-cfg.sample_radius, cfg.sample_radius,
                               size=spec.n_params)
                   for _ in range(cfg.samples)]
        profile = rank_profile(spec, samples, tol=cfg.tol_rank)
        doc["kind"] = "chart"
        doc["rank_profile"] = profile.to_obj()
        doc["note"] = ("leaf analysis needs a ruled parametrization; "
                       "only the rank profile is reported for a chart")
        return doc

    doc["kind"] = "ruled"
    doc["declared"] = {"r": spec.r, "l": spec.l, "n": spec.n, "N": spec.N}
    samples = base_samples(spec, cfg)
    profile = rank_profile(spec.chart(), chart_samples_for(spec, samples, cfg),
                           tol=cfg.tol_rank)
    doc["rank_profile"] = profile.to_obj()
    leaves = []
    for u in samples:
        entry: dict = {"u": [float(x) for x in u]}
        leaves.append(entry)
        try:
            data = extract_leaf_data(spec, u, tol=cfg.tol_rank)
        except GaussKitError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            continue
        entry["leaf"] = data.to_obj()
        entry["basic_equations"] = check_basic_equations(
            data, tol=cfg.tol_residual).to_obj()
        entry["focal"] = focal_polynomial(data).to_obj()
        if data.B.shape[0] > 0:
            entry["hypercone"] = focal_hypercone(data.B, tol=cfg.tol_rank).to_obj()
        if spec.l == 1:
            entry["finite_focal_roots"] = to_jsonable(leaf_focal_roots(data))
        try:
            pa = select_regular_pair(data.B, seed=cfg.seed, tol_gap=cfg.tol_gap)
            entry["pencil"] = pa.to_obj()
            entry["decomposition"] = factor_focal(
                data, pa, tol=cfg.tol_residual).to_obj()
        except GaussKitError as exc:
            entry["pencil_error"] = f"{type(exc).__name__}: {exc}"
    doc["leaves"] = leaves
    return doc


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _csv_summary(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "r", "l", "m", "verdict", "max_residual"])
    for row in rows:
        writer.writerow([row["name"], row["r"], row["l"], row["m"],
                         row["verdict"], f"{row['max_residual']:.3e}"])
    return buf.getvalue()


def cmd_analyze(args) -> int:
    cfg = config_from_args(args)
    spec = load_spec(args.input)
    doc = analysis_document(spec, cfg)
    _emit(canonical_dumps(doc), args.out)
    return 0


def cmd_classify(args) -> int:
    cfg = config_from_args(args)
    spec = load_spec(args.input)
    cls = classify(spec, cfg=cfg)
    if args.format == "csv":
        row = {"name": args.input.stem, "r": cls.r, "l": cls.l, "m": cls.m,
               "verdict": cls.verdict,
               "max_residual": max_residual_of(cls.evidence)}
        _emit(_csv_summary([row]), args.out)
    else:
        _emit(canonical_dumps(cls.to_obj()), args.out)
    return cls.exit_code


def cmd_corpus_gen(args) -> int:
    entries = build_default_corpus(args.seed)
    try:
        manifest = write_corpus(entries, args.out)
    except OSError as exc:
        sys.stderr.write(f"cannot write corpus to {args.out}: {exc}\n")
        return 1
    sys.stdout.write(f"wrote {len(entries)} entries, manifest {manifest}\n")
    if args.pairs:
        pairs = make_duality_pairs(args.seed)
        pairs_doc = {"schema": "gausskit/duality-pairs/v1",
                     "seed": args.seed,
                     "pairs": [p.to_obj() for p in pairs]}
        path = Path(args.out) / "pairs.json"
        path.write_text(canonical_dumps(pairs_doc))
        sys.stdout.write(f"wrote {len(pairs)} duality pairs to {path}\n")
    return 0


def cmd_corpus_verify(args) -> int:
    cfg = config_from_args(args)
    try:
        entries = load_corpus(args.dir)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        sys.stderr.write(f"cannot load corpus from {args.dir}: {exc}\n")
        return 1
    results = verify_corpus(entries, cfg)
    if args.format == "csv":
        rows = []
        for entry, res in zip(entries, results):
            cls = classify(entry.spec, cfg=cfg)
            rows.append({"name": entry.name, "r": cls.r, "l": cls.l,
                         "m": cls.m, "verdict": cls.verdict,
                         "max_residual": max_residual_of(cls.evidence)})
        _emit(_csv_summary(rows), args.out)
    else:
        doc = {"schema": "gausskit/corpus-verify/v1",
               "config": cfg.to_obj(), "results": results}
        _emit(canonical_dumps(doc), args.out)
    return 0 if all(r["ok"] for r in results) else 5


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "classify":
            return cmd_classify(args)
        if args.command == "corpus":
            if args.corpus_command == "gen":
                return cmd_corpus_gen(args)
            return cmd_corpus_verify(args)
        if args.command == "serve":
            return cmd_serve(args)
    except GaussKitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    parser.error(f"unknown command {args.command!r}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
