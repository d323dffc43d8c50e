"""Command-line entry point, report rendering and the bundled benchmark corpus.

Exit codes: 0 success, 2 unusable counterexample, 3 source errors, 1 anything
else (including a failing benchmark comparison).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .lang import LangError, LoopBoundExceeded, parse
from .localize import CounterExampleError, McsReport, locfaults
from .solver import DEFAULT_DOMAIN

log = logging.getLogger(__name__)

__all__ = [
    "RunConfig", "FixtureMismatch", "run", "render_json", "render_text", "report_dict",
    "parse_bindings", "corpus_dir", "corpus_names", "load_corpus", "bench_reports", "bench", "main",
]

EXIT_OK, EXIT_ERROR, EXIT_CE, EXIT_SOURCE = 0, 1, 2, 3
BENCH_KS = (0, 1, 2, 3)


class FixtureMismatch(Exception):
    def __init__(self, diffs):
        super().__init__("\n".join(diffs))
        self.diffs = list(diffs)


@dataclass
class RunConfig:
    source: str
    ce: str  # JSON file path or inline "i=0,j=1"
    k_max: int = 3
    mcs_bound: int = 3
    unroll: int = 10
    domain: tuple = DEFAULT_DOMAIN
    format: str = "text"
    deviation_hard: str = "last"

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if self.mcs_bound < 1:
            raise ValueError("mcs_bound must be >= 1")
        if self.unroll < 1:
            raise ValueError("unroll bound must be >= 1")
        if self.format not in ("text", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        lo, hi = self.domain
        if lo > hi:
            raise ValueError("empty domain")


def parse_bindings(text: str) -> dict:
    """``"i=0, j=-1"`` -> ``{"i": 0, "j": -1}``."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise CounterExampleError(f"expected name=value, got {item!r}")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise CounterExampleError(f"binding {item!r} is not an integer") from None
    return out


def _load_ce(spec: str) -> dict:
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise CounterExampleError(f"{spec}: {e}") from None
        if not isinstance(data, dict):
            raise CounterExampleError(f"{spec}: expected a JSON object")
        return data
    return parse_bindings(spec)


# -- rendering ---------------------------------------------------------------

def report_dict(report: McsReport, timings: bool = True) -> dict:
    d = {
        "counterexample": dict(report.counterexample),
        "entries": [{"deviations": list(e.deviations), "mcs": [list(m) for m in e.mcs_lines]}
                    for e in report.entries],
    }
    if timings:
        d["timings"] = {k: round(v, 3) for k, v in report.timings.items()}
    return d


def render_json(report: McsReport, timings: bool = True) -> str:
    return json.dumps(report_dict(report, timings), sort_keys=True, indent=2) + "\n"


def _set(lines, mark=""):
    return "{" + ",".join(f"{x}{mark}" for x in lines) + "}"


def render_text(report: McsReport) -> str:
    """One row per entry; deviated condition lines carry a '*'."""
    ce = ", ".join(f"{k}={v}" for k, v in report.counterexample.items())
    out = [f"{report.program}  CE: {ce}  k_max={report.k_max}  mcs_bound={report.mcs_bound}"]
    for e in report.entries:
        parts = [_set(e.deviations, "*")] if e.deviations else []
        parts += [_set(m) for m in e.mcs_lines]
        out.append("  " + (" ".join(parts) if parts else "(no MCS within bound)"))
    t = report.timings
    out.append(f"  preprocess {t.get('preprocess_ms', 0):.1f} ms, localize {t.get('localize_ms', 0):.1f} ms")
    return "\n".join(out) + "\n"


# -- run ---------------------------------------------------------------------

def run(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        source = Path(config.source).read_text()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    try:
        program = parse(source)
    except LangError as e:
        print(f"error: {config.source}: {e}", file=sys.stderr)
        return EXIT_SOURCE
    try:
        ce = _load_ce(config.ce)
        report = locfaults(program, ce, config.k_max, config.mcs_bound, config.unroll,
                           default_domain=tuple(config.domain),
                           deviation_hard=config.deviation_hard)
    except CounterExampleError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CE
    except LoopBoundExceeded as e:
        print(f"error: {e} (raise --unroll)", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    out.write(render_json(report) if config.format == "json" else render_text(report))
    return EXIT_OK


# -- bundled corpus ----------------------------------------------------------

def corpus_dir() -> Path:
    return Path(str(resources.files("locfaults") / "corpus"))


def corpus_names(directory: Optional[Path] = None) -> list:
    d = Path(directory) if directory else corpus_dir()
    return sorted(p.stem for p in d.glob("*.imp"))


def load_corpus(name: str, directory: Optional[Path] = None):
    """(program, counterexample, labels) of one bundled benchmark."""
    d = Path(directory) if directory else corpus_dir()
    program = parse((d / f"{name}.imp").read_text())
    ce = json.loads((d / f"{name}.ce.json").read_text())
    labels_path = d / f"{name}.labels.json"
    labels = json.loads(labels_path.read_text()) if labels_path.exists() else {}
    return program, ce, labels


def bench_reports(names: Sequence[str], directory: Optional[Path] = None, ks=BENCH_KS) -> dict:
    """name -> {k: McsReport}."""
    out = {}
    for name in names:
        program, ce, _ = load_corpus(name, directory)
        out[name] = {k: locfaults(program, ce, k_max=k, mcs_bound=3) for k in ks}
    return out


def _fixture_payload(runs: dict) -> dict:
    return {str(k): report_dict(r, timings=False) for k, r in runs.items()}


def _diff(name, expected: dict, got: dict) -> list:
    diffs = []
    for k in sorted(set(expected) | set(got)):
        e, g = expected.get(k), got.get(k)
        if e != g:
            diffs.append(f"{name} k={k}: expected {json.dumps(e, sort_keys=True)}, "
                         f"got {json.dumps(g, sort_keys=True)}")
    return diffs


def bench(directory: Optional[Path] = None, name_filter: Optional[str] = None,
          update: bool = False) -> dict:
    """Run the corpus for every k in BENCH_KS and compare with the golden files.

    Returns ``{name: {k: report_dict}}`` (timings included); raises
    FixtureMismatch listing all differences.
    """
    d = Path(directory) if directory else corpus_dir()
    names = [n for n in corpus_names(d) if not name_filter or name_filter in n]
    if not names:
        raise FixtureMismatch([f"no corpus program matches {name_filter!r}"])
    result, diffs = {}, []
    for name, runs in bench_reports(names, d).items():
        payload = _fixture_payload(runs)
        fixture = d / f"{name}.expected.json"
        if update:
            fixture.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        elif not fixture.exists():
            diffs.append(f"{name}: missing fixture {fixture.name}")
        else:
            diffs.extend(_diff(name, json.loads(fixture.read_text()), payload))
        result[name] = {str(k): report_dict(r) for k, r in runs.items()}
    if diffs:
        raise FixtureMismatch(diffs)
    return result


def _bench_table(result: dict) -> str:
    rows = [f"{'program':<18} {'k':>2} {'prep ms':>8} {'loc ms':>8}  MCS"]
    for name, runs in result.items():
        for k, r in runs.items():
            cells = []
            for e in r["entries"]:
                cells.append((_set(e["deviations"], "*") if e["deviations"] else "")
                             + "".join(_set(m) for m in e["mcs"]))
            t = r["timings"]
            rows.append(f"{name:<18} {k:>2} {t['preprocess_ms']:8.2f} {t['localize_ms']:8.2f}  "
                        + " ".join(cells))
    return "\n".join(rows) + "\n"


# -- argparse ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="locfaults", description="Counterexample-guided fault localization.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="localize the fault revealed by one counterexample")
    r.add_argument("--source", required=True, help="program file (.imp)")
    r.add_argument("--ce", required=True, help="JSON file or inline bindings such as 'i=0,j=1'")
    r.add_argument("--kmax", type=int, default=3, help="maximum number of deviated conditions")
    r.add_argument("--mcs-bound", type=int, default=3, help="maximum MCS cardinality")
    r.add_argument("--unroll", type=int, default=10, help="loop unrolling bound")
    r.add_argument("--domain", type=int, nargs=2, metavar=("LO", "HI"), default=list(DEFAULT_DOMAIN),
                   help="default integer domain of every variable")
    r.add_argument("--deviation-hard", choices=("last", "all"), default="last",
                   help="deviated conditions kept as hard constraints in the MCS store")
    r.add_argument("--format", choices=("text", "json"), default="text")

    b = sub.add_parser("bench", help="run the bundled corpus and compare with golden files")
    b.add_argument("--filter", default=None, help="substring of the program names to run")
    b.add_argument("--format", choices=("text", "json"), default="text")
    b.add_argument("--corpus", type=Path, default=None, help="alternative corpus directory")
    b.add_argument("--update", action="store_true", help="rewrite the golden files")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        try:
            config = RunConfig(args.source, args.ce, args.kmax, args.mcs_bound, args.unroll,
                               tuple(args.domain), args.format, args.deviation_hard)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
        return run(config)
    t0 = time.perf_counter()
    try:
        result = bench(args.corpus, args.filter, args.update)
    except FixtureMismatch as e:
        print("FixtureMismatch:", file=sys.stderr)
        for line in e.diffs:
            print("  " + line, file=sys.stderr)
        return EXIT_ERROR
    if args.format == "json":
        sys.stdout.write(json.dumps(result, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(_bench_table(result))
        print(f"{len(result)} programs OK in {time.perf_counter() - t0:.2f} s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
