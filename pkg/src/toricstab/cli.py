"""Command-line front end.

Every command produces a report envelope: tool version, a digest of the
input files, the command line, the result payload and the wall time.
Exact numbers are written as ``p/q`` strings; where a float rendering is
given next to one it is advisory only.

Exit codes: 0 semistable or pass, 1 unstable or fail, 2 inconclusive,
3 input error, 4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from ._exact import Fraction, fmt
from .chow import INCONCLUSIVE, SEMISTABLE, UNSTABLE, decide_chow, default_cap, linear_obstruction
from .envelope import classify, concave_pl_from_json, concave_pl_to_json, integral_dv, boundary_integral
from .errors import InputError, ResourceError, ToricStabError
from .geometry import (
    boundary_volume,
    count_lattice_points,
    ehrhart,
    polytope_from_json,
    polytope_to_json,
    verify_delzant,
    vertices_from_json,
    volume,
)
from .relative import (
    crease_family,
    decide_relative_chow,
    extremal_affine,
    k_semistable_for_toric_degenerations,
    p_leading_check,
    q_leading_check,
    relative_chow_inequality,
    relative_k_semistable,
)
from .search import destabilizer_search

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3, 4
COMMANDS = ("verify", "ehrhart", "chow", "kstab", "relative", "scan")
FORMATS = ("json", "csv", "text")

_VERDICT_EXIT = {SEMISTABLE: EXIT_OK, UNSTABLE: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}


@dataclass(frozen=True)
class JobSpec:
    command: str
    polytope: Path | None = None
    levels: tuple[int, ...] = (1,)
    function: Path | None = None
    cap: int | None = None
    output: Path | None = None
    format: str = "json"
    mode: str = "exact"  # exact | search
    method: str = "auto"
    kmax: int = 32
    budget: int = 2000
    seed: int = 0
    directory: Path | None = None
    timing: bool = True
    argv: tuple[str, ...] = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise InputError(f"unknown format {self.format!r}")
        if any(i <= 0 for i in self.levels):
            raise InputError("levels must be positive")
        if self.cap is not None and self.cap <= 0:
            raise InputError("cap must be positive")
        if self.kmax < 4:
            raise InputError("kmax must be at least 4")


@dataclass
class ReportEnvelope:
    command: tuple[str, ...]
    input_digest: str
    result: dict
    exit_code: int
    wall_time: float | None = None
    tables: dict = field(default_factory=dict)  # name -> list of CSV rows
    tool: str = "toricstab"
    version: str = __version__

    def to_json(self):
        return {
            "tool": self.tool,
            "version": self.version,
            "input_digest": self.input_digest,
            "command": list(self.command),
            "exit_code": self.exit_code,
            "result": self.result,
            "wall_time": self.wall_time,
        }

    def render(self, fmt_name: str) -> str:
        if fmt_name == "json":
            return json.dumps(self.to_json(), indent=2) + "\n"
        if fmt_name == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            for name in sorted(self.tables):
                rows = self.tables[name]
                if len(self.tables) > 1:
                    writer.writerow([f"# {name}"])
                writer.writerows(rows)
            return buf.getvalue()
        return _text(self.result) + "\n"


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            return pad + " ".join(str(x) for x in obj)
        return "\n".join(_text(x, indent) for x in obj)
    return f"{pad}{obj}"


def number(q) -> dict:
    """Exact value with an advisory float rendering."""
    q = Fraction(q)
    return {"exact": fmt(q), "approx": float(q)}


# ---------------------------------------------------------------------------
# input handling


def _read_json(path: Path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return raw, json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _digest(blobs) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    return "sha256:" + h.hexdigest()


def _load(job: JobSpec):
    if job.polytope is None:
        raise InputError(f"{job.command} needs --polytope")
    raw, data = _read_json(job.polytope)
    return raw, data


def _load_function(job: JobSpec, poly):
    if job.function is None:
        return None, None
    raw, data = _read_json(job.function)
    return raw, concave_pl_from_json(poly, data)


# ---------------------------------------------------------------------------
# commands


def _cmd_verify(job):
    raw, data = _load(job)
    check = verify_delzant(vertices_from_json(data))
    return [raw], check.to_json(), (EXIT_OK if check.ok else EXIT_FAIL), {}


def _cmd_ehrhart(job):
    raw, data = _load(job)
    poly = polytope_from_json(data)
    E = ehrhart(poly)
    bvol, _ = boundary_volume(poly)
    counts = [[str(t), str(E(t))] for t in range(0, max(job.levels) + 1)]
    result = {
        "polynomial": str(E),
        "coefficients": [fmt(c) for c in E.coefficients],
        "volume": number(volume(poly)),
        "boundary_volume": number(bvol),
        "counts": counts,
    }
    return [raw], result, EXIT_OK, {"counts": [["t", "E(t)"]] + counts}


def _chow_result(report):
    out = report.to_json()
    out["obstruction_residual"] = [number(r) for r in report.residual]
    return out


def _cmd_chow(job):
    raw, data = _load(job)
    poly = polytope_from_json(data)
    results, codes = [], []
    for i in job.levels:
        if job.mode == "search":
            report = destabilizer_search(poly, i, budget=job.budget, seed=job.seed)
        else:
            report = decide_chow(poly, i, cap=job.cap, method=job.method)
        if not report.verify():
            raise ToricStabError("certificate failed re-verification")
        results.append(_chow_result(report))
        codes.append(_VERDICT_EXIT[report.verdict])
    result = results[0] if len(results) == 1 else {"levels": results}
    return [raw], result, max(codes), {}


def _profile_json(profile):
    return {
        "limit": number(profile.limit),
        "constant": number(profile.constant),
        "bound_holds": profile.holds,
        "expansion": [fmt(c) for c in profile.expansion],
        "expansion_exact": profile.expansion_exact,
        "expansion_constant": number(profile.expansion_constant) if profile.expansion else None,
        "converges": profile.converges,
    }


def _profile_rows(profile):
    rows = [["k", "value", "value_float", "normalised", "normalised_float", "error"]]
    for k, raw, v, e in profile.to_rows():
        rows.append([str(k), fmt(raw), repr(float(raw)), fmt(v), repr(float(v)), fmt(e)])
    return rows


def _family_json(verdicts):
    return [dict(v.to_json(), function=concave_pl_to_json(v.function)) for v in verdicts]


def _cmd_kstab(job):
    raw, data = _load(job)
    poly = polytope_from_json(data)
    graw, g = _load_function(job, poly)
    blobs = [raw] + ([graw] if graw else [])
    bvol, _ = boundary_volume(poly)
    result = {"volume": number(volume(poly)), "boundary_volume": number(bvol)}
    tables = {}
    if g is not None:
        level = g.minimal_level
        verdict = k_semistable_for_toric_degenerations(poly, [g])[0]
        profile = p_leading_check(poly, level, g, kmax=job.kmax)
        result.update({
            "level": level,
            "integral": number(integral_dv(g)),
            "boundary_integral": number(boundary_integral(g)),
            "verdict": verdict.to_json(),
            "profile": _profile_json(profile),
        })
        tables["profile"] = _profile_rows(profile)
        code = EXIT_OK if verdict.semistable else EXIT_FAIL
    else:
        verdicts = k_semistable_for_toric_degenerations(poly, crease_family(poly))
        result["family"] = _family_json(verdicts)
        result["all_nonnegative"] = all(v.semistable for v in verdicts)
        tables["family"] = [["index", "leading", "branch"]] + [
            [str(j), fmt(v.leading), v.branch] for j, v in enumerate(verdicts)]
        code = EXIT_OK if result["all_nonnegative"] else EXIT_FAIL
    return blobs, result, code, tables


def _cmd_relative(job):
    raw, data = _load(job)
    poly = polytope_from_json(data)
    graw, g = _load_function(job, poly)
    blobs = [raw] + ([graw] if graw else [])
    theta = extremal_affine(poly)
    result = {"theta": theta.to_json()}
    tables = {}
    codes = []
    levels = []
    for i in job.levels:
        report = decide_relative_chow(poly, i, cap=job.cap, method=job.method)
        if not report.verify():
            raise ToricStabError("certificate failed re-verification")
        entry = _chow_result(report)
        if g is not None and classify(g, i).in_pl:
            entry["inequality_for_g"] = number(relative_chow_inequality(poly, i, g))
        levels.append(entry)
        codes.append(_VERDICT_EXIT[report.verdict])
    result["levels"] = levels
    if g is not None:
        level = g.minimal_level
        verdict = relative_k_semistable(poly, [g])[0]
        profile = q_leading_check(poly, level, g, kmax=job.kmax)
        result["function"] = {"level": level, "verdict": verdict.to_json(),
                              "profile": _profile_json(profile)}
        tables["profile"] = _profile_rows(profile)
    return blobs, result, max(codes), tables


def _cmd_scan(job):
    if job.directory is None:
        raise InputError("scan needs --dir")
    root = Path(job.directory)
    if not root.is_dir():
        raise InputError(f"{root} is not a directory")
    cap = job.cap if job.cap is not None else default_cap()
    header = ["file", "delzant", "level", "points", "residual", "verdict", "error"]
    rows, entries, blobs = [header], [], []
    for path in sorted(root.glob("*.json")):
        raw = path.read_bytes()
        blobs.append(path.name.encode() + b"\0" + raw)
        entry = {"file": path.name}
        try:
            data = json.loads(raw)
            check = verify_delzant(vertices_from_json(data))
        except (ToricStabError, ValueError) as exc:
            entry["error"] = str(exc)
            rows.append([path.name, "", "", "", "", "", str(exc)])
            entries.append(entry)
            continue
        entry["delzant"] = check.ok
        if not check.ok:
            entry["violations"] = [v.to_json() for v in check.violations]
            rows.append([path.name, "false", "", "", "", "", "; ".join(map(str, check.violations))])
            entries.append(entry)
            continue
        poly = polytope_from_json(data)
        entry["levels"] = []
        for i in job.levels:
            residual = linear_obstruction(poly, i)
            res_text = " ".join(fmt(r) for r in residual)
            points = count_lattice_points(poly, i)
            try:
                verdict = decide_chow(poly, i, cap=cap, method=job.method).verdict
                err = ""
            except ResourceError:
                verdict, err = "", f"above cap {cap}"
            entry["levels"].append({"level": i, "points": points,
                                    "residual": [fmt(r) for r in residual],
                                    "verdict": verdict or None})
            rows.append([path.name, "true", str(i), str(points), res_text, verdict, err])
        entries.append(entry)
    return blobs, {"directory": root.name, "entries": entries}, EXIT_OK, {"summary": rows}


_DISPATCH = {
    "verify": _cmd_verify,
    "ehrhart": _cmd_ehrhart,
    "chow": _cmd_chow,
    "kstab": _cmd_kstab,
    "relative": _cmd_relative,
    "scan": _cmd_scan,
}


def run(job: JobSpec) -> ReportEnvelope:
    """Execute a job; errors become reports with exit code 3 or 4."""
    start = time.perf_counter()
    try:
        blobs, result, code, tables = _DISPATCH[job.command](job)
        digest = _digest(blobs)
    except ResourceError as exc:
        result, code, tables, digest = {"error": "resource", "message": str(exc)}, EXIT_RESOURCE, {}, ""
    except (InputError, ValueError) as exc:
        result, code, tables, digest = {"error": "input", "message": str(exc)}, EXIT_INPUT, {}, ""
    elapsed = time.perf_counter() - start if job.timing else None
    return ReportEnvelope(job.argv, digest, result, code, elapsed, tables)


# ---------------------------------------------------------------------------
# argument parsing


def _levels(text):
    try:
        levels = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be comma-separated integers: {text!r}")
    if not levels or any(i <= 0 for i in levels):
        raise argparse.ArgumentTypeError("levels must be positive")
    return levels


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not "inconclusive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toricstab",
                                     description="Exact stability checks for Delzant polytopes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, polytope=True):
        if polytope:
            p.add_argument("--polytope", type=Path, required=True, help="polytope JSON file")
        p.add_argument("--output", type=Path, help="write the report here instead of stdout")
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--no-timing", dest="timing", action="store_false",
                       help="omit wall time so reports are byte-identical across runs")

    common(sub.add_parser("verify", help="check the Delzant conditions"))

    p = sub.add_parser("ehrhart", help="Ehrhart polynomial, volume and boundary volume")
    common(p)
    p.add_argument("--level", dest="levels", type=_levels, default=(5,),
                   help="tabulate E(t) up to this t")

    p = sub.add_parser("chow", help="torus Chow semistability at the given levels")
    common(p)
    p.add_argument("--level", dest="levels", type=_levels, default=(1,))
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--search", dest="mode", action="store_const", const="search")
    p.add_argument("--method", choices=("auto", "enumerate", "generate"), default="auto")
    p.add_argument("--cap", type=int, help="largest lattice point count for the exact path")
    p.add_argument("--budget", type=int, default=2000, help="subgradient steps for --search")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(mode="exact")

    p = sub.add_parser("kstab", help="leading coefficients for toric degenerations")
    common(p)
    p.add_argument("--g", dest="function", type=Path, help="concave PL function JSON")
    p.add_argument("--kmax", type=int, default=32)

    p = sub.add_parser("relative", help="relative Chow and relative K-semistability")
    common(p)
    p.add_argument("--level", dest="levels", type=_levels, default=(1,))
    p.add_argument("--g", dest="function", type=Path, help="concave PL function JSON")
    p.add_argument("--kmax", type=int, default=32)
    p.add_argument("--method", choices=("auto", "enumerate", "generate"), default="auto")
    p.add_argument("--cap", type=int)

    p = sub.add_parser("scan", help="screen a directory of polytope files")
    common(p, polytope=False)
    p.add_argument("--dir", dest="directory", type=Path, required=True)
    p.add_argument("--level", dest="levels", type=_levels, default=(1,))
    p.add_argument("--method", choices=("auto", "enumerate", "generate"), default="auto")
    p.add_argument("--cap", type=int)
    return parser


def job_from_args(args, argv) -> JobSpec:
    fields = {k: v for k, v in vars(args).items() if k in JobSpec.__dataclass_fields__}
    return JobSpec(argv=tuple(argv), **fields)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args, argv)
    except InputError as exc:
        print(f"toricstab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = run(job)
    text = report.render(job.format)
    if job.output is not None:
        job.output.write_text(text)
    else:
        sys.stdout.write(text)
    if "error" in report.result:
        print(f"toricstab: {report.result['error']} error: {report.result['message']}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
