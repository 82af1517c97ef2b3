"""Command-line experiment runner.

Usage::

    limsup-lab <command> --config <file> [--seed N] [--out DIR]
    limsup-lab fixtures --out DIR

Configs are flat ``key=value`` files (``#`` starts a comment line).  Lists
are comma separated and every number is read as an exact fraction.  Each run
writes ``<command>.csv``, optional gnuplot data ``<command>.dat`` and a
``<command>.manifest.json`` into the output directory.  Files are written to a
temporary name and renamed, so an interrupted or failed run leaves nothing.

Exit codes: 0 success, 1 bad input, 2 hypothesis or precondition failure,
3 budget exhausted.  The environment variable ``LIMSUP_LAB_BUDGET`` (an
integer) overrides the ``budget`` key, which caps box-count cells and solver
candidates.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .approx import ApproxSpec, FullMeasureShortcut, balance_rho_padic, balance_rho_real, series_partial_sums
from .dimension import (
    ClosedFormCase,
    Setting,
    closed_form,
    grid_optimize_lower_bound,
    mtpr_lower_bound,
    problem_for,
    select_exponents,
)
from .errors import (
    BudgetExceeded,
    HypothesisViolated,
    LimsupError,
    MissingRequired,
    ParseError,
    PreconditionUnmet,
    UnknownKey,
)
from .lab import (
    BOX_HEADER,
    COVER_HEADER,
    SCAN_HEADER,
    DichotomyScan,
    MembershipQuery,
    box_count_dimension,
    covering_sum,
    covering_transition,
    is_member_truncated,
    measure_scan,
)
from .rings import (
    Kind,
    RingDescriptor,
    ambient_from_fraction,
    count_shell,
    format_integer,
    hurwitz_units,
    sample_uniform,
)
from .solver import (
    DEFAULT_MAX_CANDIDATES,
    LinearFormSystem,
    Status,
    Strategy,
    certify_minkowski,
    parse_ring,
    read_matrix,
    solution_header,
    solution_row,
    solve,
)

__all__ = [
    "Command",
    "ExperimentConfig",
    "RunManifest",
    "RunResult",
    "parse_config",
    "run",
    "emit_fixture_suite",
    "main",
    "BUDGET_ENV",
    "SCHEMA_VERSION",
]

BUDGET_ENV = "LIMSUP_LAB_BUDGET"
SCHEMA_VERSION = 1

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_BUDGET = 0, 1, 2, 3


class Command(str, Enum):
    DIM_EVAL = "dim_eval"
    DIM_SEARCH = "dim_search"
    SOLVE = "solve"
    CERTIFY = "certify"
    MEASURE_SCAN = "measure_scan"
    BOX_DIM = "box_dim"
    SERIES = "series"
    UBIQUITY = "ubiquity"


# ---------------------------------------------------------------------------
# config parsing


def _frac(text: str) -> Fraction:
    return Fraction(text.strip())


def _fracs(text: str) -> tuple[Fraction, ...]:
    return tuple(_frac(x) for x in text.split(","))


def _int(text: str) -> int:
    return int(text.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(_int(x) for x in text.split(","))


def _strs(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text: str) -> str:
    return text.strip()


_TYPES: dict[str, Callable[[str], object]] = {
    "command": _str,
    "seed": _int,
    "out": _str,
    "budget": _int,
    "setting": _str,
    "m": _int,
    "n": _int,
    "tau": _fracs,
    "strict": _bool,
    "grid_resolution": _int,
    "proof_point": _bool,
    "padic_box": _bool,
    "ring": _str,
    "matrix_file": _str,
    "error_bounds": _fracs,
    "height_bounds": _fracs,
    "companion_bounds": _fracs,
    "strategy": _str,
    "trials": _int,
    "right_multiply": _bool,
    "samples": _int,
    "ladder": _ints,
    "tail_starts": _ints,
    "modes": _strs,
    "Q": _int,
    "scales": _ints,
    "family": _str,
    "s": _fracs,
    "q_max": _int,
    "s_min": _frac,
    "s_max": _frac,
    "s_step": _frac,
    "blocks": _int,
    "R": _int,
    "k": _int,
    "constant_c": _frac,
    "ball_center": _fracs,
    "ball_radius": _frac,
    "scale": _frac,
    "schedule_M": _int,
    "k_max": _int,
}

_COMMON = {"command", "seed", "out", "budget"}

# (required, optional) per command; "spec.*" stands for any key spec.<id>
_KEYS: dict[Command, tuple[set[str], set[str]]] = {
    Command.DIM_EVAL: ({"setting", "tau"}, {"m", "n", "strict"}),
    Command.DIM_SEARCH: ({"setting", "tau"}, {"m", "n", "grid_resolution", "proof_point", "padic_box"}),
    Command.SOLVE: (
        {"ring", "error_bounds", "height_bounds"},
        {"m", "n", "matrix_file", "strategy", "companion_bounds", "right_multiply"},
    ),
    Command.CERTIFY: (
        {"ring", "m", "n", "error_bounds", "height_bounds", "seed"},
        {"trials", "companion_bounds", "right_multiply"},
    ),
    Command.MEASURE_SCAN: ({"seed", "samples", "ladder", "spec.*"}, {"ring", "m", "tail_starts", "modes"}),
    Command.BOX_DIM: ({"setting", "tau", "Q"}, {"m", "n", "scales"}),
    Command.SERIES: (
        {"family"},
        {"setting", "tau", "m", "n", "s", "q_max", "s_min", "s_max", "s_step", "blocks", "R", "schedule_M"},
    ),
    Command.UBIQUITY: (
        {"ring", "tau", "k", "seed"},
        {"samples", "constant_c", "ball_center", "ball_radius", "scale", "schedule_M", "k_max"},
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: Command
    params: dict = field(default_factory=dict)
    specs: tuple[tuple[str, tuple[Fraction, ...]], ...] = ()
    lines: dict = field(default_factory=dict, repr=False, compare=False)
    base_dir: Path = field(default=Path("."), compare=False)

    @property
    def seed(self) -> int | None:
        return self.params.get("seed")

    def get(self, key, default=None):
        return self.params.get(key, default)

    def canonical_text(self) -> str:
        """Sorted ``key=value`` form; the config hash is taken over it."""
        items = [("command", self.command.value)]
        items += [(k, _render(v)) for k, v in self.params.items() if k != "command"]
        items += [(f"spec.{sid}", _render(tau)) for sid, tau in self.specs]
        return "".join(f"{k}={v}\n" for k, v in sorted(items))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def with_overrides(self, seed: int | None = None, out: str | None = None) -> "ExperimentConfig":
        params = dict(self.params)
        if seed is not None:
            params["seed"] = seed
        if out is not None:
            params["out"] = out
        return ExperimentConfig(self.command, params, self.specs, self.lines, self.base_dir)


def _render(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_render(x) for x in v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def parse_config(
    text: str,
    base_dir: str | Path = ".",
    default_command: str | None = None,
    seed: int | None = None,
) -> ExperimentConfig:
    """Strict parse of the flat ``key=value`` format.

    ``default_command`` applies when the text has no ``command`` line and
    ``seed`` overrides any seed in the text (both come from the command line).
    """
    raw: dict[str, tuple[int, str]] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ParseError(f"expected key=value, got {s!r}", ln)
        key, val = (x.strip() for x in s.split("=", 1))
        if not key:
            raise ParseError("empty key", ln)
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", ln)
        raw[key] = (ln, val)
    if "command" not in raw:
        if default_command is None:
            raise MissingRequired("missing required key 'command'")
        raw["command"] = (0, default_command)
    if seed is not None:
        raw["seed"] = (raw.get("seed", (0, ""))[0], str(seed))
    ln, cmd_text = raw["command"]
    try:
        cmd = Command(cmd_text)
    except ValueError:
        raise ParseError(f"unknown command {cmd_text!r}", ln) from None
    required, optional = _KEYS[cmd]
    allowed = _COMMON | required | optional
    params: dict = {}
    specs = []
    for key, (ln, val) in raw.items():
        if key.startswith("spec.") and "spec.*" in allowed:
            sid = key[5:]
            if not sid:
                raise ParseError("empty spec id", ln)
            try:
                specs.append((sid, _fracs(val)))
            except (ValueError, ZeroDivisionError) as e:
                raise ParseError(f"bad value for {key}: {e}", ln) from None
            continue
        if key not in allowed or key not in _TYPES:
            raise UnknownKey(f"unknown key {key!r} for {cmd.value}", ln)
        try:
            params[key] = _TYPES[key](val)
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(f"bad value for {key}: {e}", ln) from None
    params["command"] = cmd.value
    for key in sorted(required):
        if key == "spec.*":
            if not specs:
                raise MissingRequired("at least one spec.<id>=tau line is required")
        elif key not in params:
            raise MissingRequired(f"missing required key {key!r}")
    if cmd is Command.SOLVE and "matrix_file" not in params:
        for key in ("seed", "m", "n"):
            if key not in params:
                raise MissingRequired(f"a sampled matrix (no matrix_file) needs {key!r}")
    if cmd is Command.SERIES:
        fam = params["family"]
        need = {"cover": ("setting", "tau"), "volume": ("tau", "R")}.get(fam)
        if need is None:
            raise ParseError(f"family must be cover or volume, not {fam!r}", raw["family"][0])
        for key in need:
            if key not in params:
                raise MissingRequired(f"family={fam} needs {key!r}")
    lines = {k: v[0] for k, v in raw.items()}
    return ExperimentConfig(cmd, params, tuple(specs), lines, Path(base_dir))


# ---------------------------------------------------------------------------
# output helpers


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_hash: str
    tool_version: str
    started: str
    finished: str
    inputs: dict
    outputs: dict
    command: str
    seed: int | None
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def verify(directory: str | Path, manifest_name: str) -> bool:
        """Recompute every output digest recorded in the manifest."""
        d = Path(directory)
        data = json.loads((d / manifest_name).read_text())
        return all(_digest((d / name).read_text()) == dig for name, dig in data["outputs"].items())


@dataclass
class RunResult:
    exit_code: int
    files: dict[str, Path] = field(default_factory=dict)
    message: str = ""


# ---------------------------------------------------------------------------
# command implementations; each returns {filename suffix: text}


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def _seq(xs) -> str:
    return ";".join(_fmt(x) for x in xs)


def _case(cfg: ExperimentConfig) -> ClosedFormCase:
    name = cfg.get("setting").lower()
    tau = cfg.get("tau")
    m = cfg.get("m", 1)
    if cfg.get("n", len(tau)) != len(tau):
        raise PreconditionUnmet(f"n = {cfg.get('n')} but tau has {len(tau)} entries")
    if name in ("two_dim", "twodim"):
        return ClosedFormCase.two_dim(tau)
    try:
        setting = Setting(name)
    except ValueError:
        raise PreconditionUnmet(f"unknown setting {name!r}") from None
    return ClosedFormCase(setting, tau, m)


def _budget(cfg: ExperimentConfig, default: int) -> int:
    env = os.environ.get(BUDGET_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"{BUDGET_ENV} must be an integer, got {env!r}") from None
    return cfg.get("budget", default)


def _dim_eval(cfg):
    case = _case(cfg)
    res = closed_form(case, strict=cfg.get("strict", False))
    header = ["setting", "m", "n", "tau", "value", "argmin", "hypothesis_ok", "full_dimension", "reason"]
    row = [
        case.setting.value,
        str(case.m),
        str(case.n),
        _seq(case.tau),
        _fmt(res.value),
        _seq(j + 1 for j in res.argmin),
        str(res.hypothesis_ok).lower(),
        _fmt(case.full_dimension),
        res.reason or "",
    ]
    return {"csv": _csv_text(header, [row])}


def _dim_search(cfg):
    case = _case(cfg)
    cf = closed_form(case, strict=True)
    sel = select_exponents(case)
    mt = mtpr_lower_bound(problem_for(case, sel.a))
    grid = grid_optimize_lower_bound(
        case,
        grid_resolution=cfg.get("grid_resolution", 16),
        include_proof_point=cfg.get("proof_point", True),
        padic_box=cfg.get("padic_box", True),
    )
    header = [
        "setting", "m", "n", "tau", "closed_form", "selection", "selected_a", "selected_value",
        "grid_value", "grid_a", "grid_evaluated", "grid_from_proof_point", "notes",
    ]
    row = [
        case.setting.value, str(case.m), str(case.n), _seq(case.tau), _fmt(cf.value),
        sel.tag.value, _seq(sel.a), _fmt(mt.value), _fmt(grid.value), _seq(grid.a),
        str(grid.evaluated), str(grid.from_proof_point).lower(), " | ".join(grid.notes),
    ]
    return {"csv": _csv_text(header, [row])}


def _solve(cfg):
    if "matrix_file" in cfg.params:
        path = cfg.base_dir / cfg.get("matrix_file")
        ring, A = read_matrix(path.read_text())
        cfg_ring = parse_ring(cfg.get("ring"))
        if cfg_ring.describe() != ring.describe():
            raise PreconditionUnmet(f"matrix ring {ring.describe()} differs from ring={cfg.get('ring')}")
        m, n = len(A), len(A[0])
    else:
        ring = parse_ring(cfg.get("ring"))
        m, n = cfg.get("m"), cfg.get("n")
        A = sample_uniform(ring, (m, n), cfg.seed)
    sys_ = LinearFormSystem(
        ring, A, cfg.get("error_bounds"), cfg.get("height_bounds"), None,
        cfg.get("companion_bounds"), cfg.get("right_multiply", False),
    )
    strategy = Strategy(cfg.get("strategy", Strategy.FIRST_FOUND.value))
    rec = solve(sys_, strategy, max_candidates=_budget(cfg, DEFAULT_MAX_CANDIDATES))
    text = _csv_text(solution_header(m, n) + ["examined"], [solution_row(rec, m, n) + [str(rec.examined)]])
    out = {"csv": text}
    if rec.status is Status.SEARCH_EXHAUSTED:
        raise _Exhausted(out)
    return out


class _Exhausted(Exception):
    """Budget ran out; outputs are still worth writing."""

    def __init__(self, outputs):
        self.outputs = outputs


def _certify(cfg):
    ring = parse_ring(cfg.get("ring"))
    rep = certify_minkowski(
        ring, cfg.get("m"), cfg.get("n"), cfg.get("error_bounds"), cfg.get("height_bounds"),
        trials=cfg.get("trials", 200), seed=cfg.seed, companion_bounds=cfg.get("companion_bounds"),
        max_candidates=_budget(cfg, DEFAULT_MAX_CANDIDATES), right_multiply=cfg.get("right_multiply", False),
    )
    header = ["ring", "m", "n", "trials", "found", "summary", "product_condition", "volume_condition", "failures", "detail"]
    row = [
        rep.ring, str(rep.m), str(rep.n), str(rep.trials), str(rep.found), rep.summary,
        str(rep.product_condition).lower(), str(rep.volume_condition).lower(), _seq(rep.failures), rep.detail,
    ]
    return {"csv": _csv_text(header, [row])}


def _measure_scan(cfg):
    ring = parse_ring(cfg.get("ring", "real"))
    m = cfg.get("m", 1)
    specs = tuple((sid, ApproxSpec.power_law(m, len(tau), tau)) for sid, tau in cfg.specs)
    ladder = cfg.get("ladder")
    scan = DichotomyScan(
        specs, cfg.get("samples"), ladder, cfg.seed, ring,
        tail_starts=cfg.get("tail_starts", ()), modes=cfg.get("modes", ("full", "tail")),
    )
    rows = measure_scan(scan)
    blocks = []
    for sid in dict.fromkeys(r.spec_id for r in rows):
        lines = [f"# {sid}: H fraction"] + [f"{r.H} {r.fraction:.6f}" for r in rows if r.spec_id == sid]
        blocks.append("\n".join(lines))
    return {"csv": _csv_text(SCAN_HEADER, [r.as_list() for r in rows]), "dat": "\n\n\n".join(blocks) + "\n"}


def _box_dim(cfg):
    case = _case(cfg)
    Q = cfg.get("Q")
    est = box_count_dimension(case, (Q, 2 * Q), cfg.get("scales"), budget=_budget(cfg, 50_000_000))
    dat = "# -log(eps) log(count)\n" + "".join(
        f"{-le:.12g} {lc:.12g}\n" for le, lc in zip(est.log_eps, est.log_counts)
    )
    return {"csv": _csv_text(BOX_HEADER, est.rows()), "dat": dat}


def _s_grid(cfg) -> list[Fraction]:
    if "s" in cfg.params:
        return list(cfg.get("s"))
    lo, hi, step = cfg.get("s_min", Fraction(1, 20)), cfg.get("s_max"), cfg.get("s_step", Fraction(1, 20))
    if hi is None:
        raise MissingRequired("family=cover needs s or s_max")
    out, x = [], lo
    while x <= hi:
        out.append(x)
        x += step
    return out


def _series(cfg):
    if cfg.get("family") == "volume":
        tau = cfg.get("tau")
        spec = ApproxSpec.power_law(cfg.get("m", 1), len(tau), tau, M=cfg.get("schedule_M", 2))
        R = cfg.get("R")
        rows = []
        r = 1
        while r <= R:
            direct, cond = series_partial_sums(spec, r)
            rows.append([str(r), _fmt(direct) if isinstance(direct, Fraction) else repr(direct),
                         _fmt(cond) if isinstance(cond, Fraction) else repr(cond)])
            r *= 2
        return {"csv": _csv_text(["R", "direct", "condensed"], rows)}
    case = _case(cfg)
    q_max = cfg.get("q_max", 1 << 16)
    grid = _s_grid(cfg)
    rows, blocks = [], []
    for s in grid:
        part = covering_sum(case, s, (1, q_max))
        rows += [r.as_list() for r in part]
        blocks.append("\n".join([f"# s={_fmt(s)}: Q partial_sum"] + [f"{r.Q} {r.partial_sum!r}" for r in part]))
    out = {"csv": _csv_text(COVER_HEADER, rows), "dat": "\n\n\n".join(blocks) + "\n"}
    if len(grid) >= 2:
        tr = covering_transition(case, grid, blocks=cfg.get("blocks", 20))
        cf = closed_form(case)
        trows = [[_fmt(s), "divergent" if d else "convergent"] for s, d in zip(tr.grid, tr.divergent)]
        trows.append(["lower", _fmt(tr.lower) if tr.lower is not None else ""])
        trows.append(["upper", _fmt(tr.upper) if tr.upper is not None else ""])
        trows.append(["closed_form", _fmt(cf.value)])
        trows.append(["brackets", str(tr.brackets(cf.value)).lower()])
        out["transition.csv"] = _csv_text(["s", "verdict"], trows)
    return out


def _ubiquity(cfg):
    from .solver import empirical_ubiquity_check

    ring = parse_ring(cfg.get("ring"))
    tau = cfg.get("tau")
    spec = ApproxSpec.power_law(1, len(tau), tau, M=cfg.get("schedule_M", 2), k_max=cfg.get("k_max", 12))
    if ring.kind is Kind.PADIC:
        rho = balance_rho_padic(spec, ring.p)
    else:
        rho = balance_rho_real(spec)
    if isinstance(rho, FullMeasureShortcut):
        raise PreconditionUnmet(f"full-measure regime: {rho.reason}")
    kwargs = {}
    if "ball_center" in cfg.params:
        kwargs["ball_center"] = cfg.get("ball_center")
    rep = empirical_ubiquity_check(
        ring, spec, rho, cfg.get("k"), samples=cfg.get("samples", 2000),
        constant_c=cfg.get("constant_c", Fraction(1, 2)), ball_radius=cfg.get("ball_radius", Fraction(1, 2)),
        seed=cfg.seed, scale=cfg.get("scale", 1), **kwargs,
    )
    header = ["ring", "k", "u", "samples", "hits", "fraction", "constant", "meets_constant"]
    row = [ring.describe(), str(cfg.get("k")), str(rep.u), str(rep.samples), str(rep.hits),
           f"{rep.fraction:.6f}", _fmt(rep.constant), str(rep.meets_constant).lower()]
    return {"csv": _csv_text(header, [row])}


_DISPATCH = {
    Command.DIM_EVAL: _dim_eval,
    Command.DIM_SEARCH: _dim_search,
    Command.SOLVE: _solve,
    Command.CERTIFY: _certify,
    Command.MEASURE_SCAN: _measure_scan,
    Command.BOX_DIM: _box_dim,
    Command.SERIES: _series,
    Command.UBIQUITY: _ubiquity,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_outputs(cfg: ExperimentConfig, outputs: dict, out_dir: Path, started: str, inputs: dict) -> dict[str, Path]:
    name = cfg.command.value
    files: dict[str, Path] = {}
    digests = {}
    for suffix, text in outputs.items():
        fname = f"{name}.{suffix}" if "." not in suffix else f"{name}_{suffix}"
        path = out_dir / fname
        _atomic_write(path, text)
        files[fname] = path
        digests[fname] = _digest(text)
    man = RunManifest(cfg.hash, __version__, started, _now(), inputs, digests, name, cfg.seed)
    mpath = out_dir / f"{name}.manifest.json"
    _atomic_write(mpath, man.to_json())
    files[mpath.name] = mpath
    return files


def run(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunResult:
    """Dispatch a parsed config and persist its artifacts.

    Failures map to exit codes and leave no output files behind, except
    ``SearchExhausted`` solves whose partial record is still written."""
    started = _now()
    out = Path(out_dir if out_dir is not None else config.get("out", "."))
    if not out.is_absolute() and out_dir is None and "out" in config.params:
        out = config.base_dir / out
    inputs = {}
    if "matrix_file" in config.params:
        p = config.base_dir / config.get("matrix_file")
        if p.exists():
            inputs[p.name] = _digest(p.read_text())
    code = EXIT_OK
    msg = ""
    try:
        outputs = _DISPATCH[config.command](config)
    except _Exhausted as e:
        outputs, code, msg = e.outputs, EXIT_BUDGET, "search exhausted before the height bounds"
    except (HypothesisViolated, PreconditionUnmet) as e:
        return RunResult(EXIT_PRECONDITION, {}, str(e))
    except BudgetExceeded as e:
        return RunResult(EXIT_BUDGET, {}, str(e))
    except (ParseError, OSError) as e:
        return RunResult(EXIT_INPUT, {}, str(e))
    files = _write_outputs(config, outputs, out, started, inputs)
    return RunResult(code, files, msg)


# ---------------------------------------------------------------------------
# golden fixtures


def emit_fixture_suite(path: str | Path) -> dict[str, Path]:
    """Regenerate the golden fixture files from scratch into ``path``."""
    out = Path(path)
    files: dict[str, Path] = {}

    def put(name, header, rows):
        p = out / name
        _atomic_write(p, _csv_text(header, rows))
        files[name] = p

    F = Fraction
    cases = [
        ("padic_m2_n1_tau4", ClosedFormCase.padic(2, (4,))),
        ("twodim_3_2", ClosedFormCase.two_dim((3, 2))),
        ("real_m1_n1_tau2", ClosedFormCase.real(1, (2,))),
        ("complex_m1_n1_tau3", ClosedFormCase.complex(1, (3,))),
        ("complex_m1_n1_tau5_2", ClosedFormCase.complex(1, (F(5, 2),))),
        ("quaternion_m1_n1_tau3", ClosedFormCase.quaternion(1, (3,))),
        ("laurent_m1_n2_tau2_3", ClosedFormCase.laurent(1, (2, 3))),
    ]
    rows = []
    for cid, case in cases:
        res = closed_form(case)
        rows.append([cid, case.setting.value, str(case.m), str(case.n), _seq(case.tau), _fmt(res.value)])
    put("closed_forms.csv", ["id", "setting", "m", "n", "tau", "value"], rows)

    rows = []
    g = RingDescriptor.complex()
    for m in (1, 2):
        for Q in range(0, 6):
            rows.append(["gaussian", str(m), str(Q), str(count_shell(g, m, Q))])
    for t in (2, 3):
        L = RingDescriptor.laurent(t)
        for m in (1, 2):
            for r in range(0, 4):
                rows.append([f"laurent_t{t}", str(m), f"{t}^{r}", str(count_shell(L, m, t**r))])
    put("shell_counts.csv", ["ring", "m", "height", "count"], rows)

    put("hurwitz_units.csv", ["index", "unit"], [[str(i), format_integer(u)] for i, u in enumerate(hurwitz_units())])

    real = RingDescriptor.real()
    X = [[ambient_from_fraction(real, 2**0.5 - 1), ambient_from_fraction(real, 3**0.5 - 1)]]
    spec = ApproxSpec.power_law(1, 2, (2, 2))
    hit, rec = is_member_truncated(MembershipQuery(real, X, spec, 50))
    witness = format_integer(rec.q[0]) if hit else ""
    put("membership.csv", ["matrix", "psi", "H", "hit", "witness_q"],
        [["sqrt2-1;sqrt3-1", "q^-2;q^-2", "50", str(hit).lower(), witness]])

    rep = certify_minkowski(RingDescriptor.complex(), 1, 1, (1,), (1,), trials=100, seed=0)
    put("certify.csv", ["ring", "m", "n", "trials", "summary"], [[rep.ring, "1", "1", "100", rep.summary]])
    return files


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="limsup-lab", description="Limsup-set experiments: dimensions, solvers, scans.")
    ap.add_argument("command", choices=[c.value for c in Command] + ["fixtures"])
    ap.add_argument("--config", help="key=value config file")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--out", help="output directory (default: config 'out' or the current directory)")
    ap.add_argument("--version", action="version", version=f"limsup-lab {__version__}")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "fixtures":
        files = emit_fixture_suite(args.out or "fixtures")
        for name in sorted(files):
            print(files[name])
        return EXIT_OK
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_INPUT
    cfg_path = Path(args.config)
    try:
        cfg = parse_config(cfg_path.read_text(), cfg_path.parent, args.command, args.seed)
    except (OSError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.command.value != args.command:
        print(f"error: config is for {cfg.command.value}, not {args.command}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result = run(cfg, args.out)
    except LimsupError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    for name in sorted(result.files):
        print(result.files[name])
    if result.message:
        print(result.message, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
