"""Command-line harness: ``verify``, ``experiment``, ``incidence`` and ``bounds``.

Configuration is a flat ``key = value`` file (``--config``); command-line
flags override it. Exit status is 0 on success, 1 when a verification fails
and 2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from .energy import Variant
from .field import FieldError, PrimeField
from .functions import ExpanderSpec, FunctionTable, parse_family
from .incidence import incidence_report
from .sets import FSet, SetFamilySpec, derive_seed, generate
from .theorems import compare_bounds, conditional_growth_check, verify_theorem

log = logging.getLogger("fpexpand")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    p: int = 101
    variant: str = "both"
    family_A: str = "random"
    family_B: str = "random"
    family_C: str = "random"
    g: str = "identity"
    h: str = "identity"
    size: int = 8
    sizes: str = "8,16,32"
    m: int = 1
    trials: int = 1
    seed: int = 0
    out: str | None = None
    format: str = "json"
    deterministic: bool = False
    selfcheck: bool = False
    collinear_budget: int = 200_000
    oracle_budget: int = 1_000_000
    incidence_budget: int = 100_000
    eps: float | None = None
    growth: bool = False

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.variant not in ("mult", "add", "both"):
            raise ConfigError("variant must be mult, add or both")
        try:
            PrimeField(self.p)
        except FieldError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    @property
    def variants(self) -> list[Variant]:
        if self.variant == "both":
            return [Variant.MULTIPLICATIVE, Variant.ADDITIVE]
        return [Variant.parse(self.variant)]

    @property
    def size_grid(self) -> list[int]:
        try:
            return [int(s) for s in str(self.sizes).replace(";", ",").split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"bad size grid {self.sizes!r}") from None


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, raw):
    ftype = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if raw is None or isinstance(raw, bool):
        return raw
    text = str(raw).strip()
    if "bool" in ftype:
        if text.lower() not in _BOOL:
            raise ConfigError(f"{name}: expected a boolean, got {text!r}")
        return _BOOL[text.lower()]
    if ftype.startswith("int"):
        try:
            return int(text.replace("_", ""), 0)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {text!r}") from None
    if ftype.startswith("float"):
        if text.lower() in ("", "none"):
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {text!r}") from None
    return text


def _key(name: str) -> str:
    name = name.strip().replace("-", "_")
    if name.lower().startswith("family_") and len(name) == 8:
        return "family_" + name[-1].upper()
    return name.lower()


def read_config(path: str | Path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _key(key)
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(read_config(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = _coerce(f.name, v)
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- instances

@dataclass
class Instance:
    trial: int
    A: FSet
    B: FSet
    C: FSet
    tags: tuple[str, str, str]


def _set_for(text: str, n: int, seed: int, field: PrimeField) -> tuple[FSet, str]:
    spec = SetFamilySpec.parse(text)
    if spec.n is None and spec.kind in ("random", "interval", "geometric"):
        spec = spec.with_size(n)
    spec = spec.with_seed(seed)
    return generate(spec, field), spec.tag()


def make_instance(cfg: ExperimentConfig, trial: int, n: int) -> Instance:
    """Sets A, B, C for one trial; a family value of ``A`` reuses set A."""
    field = cfg.field
    out: dict[str, tuple[FSet, str]] = {}
    for slot, text in enumerate((cfg.family_A, cfg.family_B, cfg.family_C)):
        name = "ABC"[slot]
        if text.strip() in ("A", "B") and text.strip() in out:
            out[name] = (out[text.strip()][0], text.strip())
            continue
        out[name] = _set_for(text, n, derive_seed(cfg.seed, trial, slot), field)
    return Instance(trial, out["A"][0], out["B"][0], out["C"][0], (out["A"][1], out["B"][1], out["C"][1]))


def make_spec(cfg: ExperimentConfig) -> ExpanderSpec:
    field = cfg.field
    g: FunctionTable = parse_family(cfg.g, field)
    h: FunctionTable = parse_family(cfg.h, field)
    if g.domain != h.domain:
        common = FSet(tuple(set(g.domain) & set(h.domain)), field.p, True)
        g, h = g.restrict(common), h.restrict(common)
    return ExpanderSpec(g, h)


# ---------------------------------------------------------------- records

TRIAL_FIELDS = (
    "trial", "p", "variant", "size_A", "size_B", "size_C",
    "family_A", "family_B", "family_C", "g", "h",
    "m", "sum_E", "E", "size_fAB", "size_BC", "size_R", "size_S", "incidences",
    "k_exact", "k_paper", "rudnev_rhs", "rudnev_ratio",
    "bound_new", "bound_hh", "measured_max", "chain_ok",
)
GROWTH_FIELDS = (
    "eps", "eps_readback", "hypothesis_holds", "size_min_sum_prod", "size_fAA",
    "predicted_exponent", "realized_exponent", "ratio_prod", "ratio_sum",
)
INCIDENCE_FIELDS = (
    "trial", "p", "variant", "size_A", "size_B", "size_C", "g", "h",
    "size_T", "size_fAB", "size_R", "size_S", "incidences", "oracle_incidences", "method",
    "k_exact", "k_paper", "k_corrected", "rudnev_rhs", "rudnev_ratio", "p2_gate", "E", "E_le_I",
)
BOUND_FIELDS = ("size_A", "size_B", "size_C", "m", "p", "bound_hh", "bound_new", "larger", "gate_ok", "gate_edge")


def trial_record(cfg: ExperimentConfig, inst: Instance, variant: Variant, spec: ExpanderSpec) -> dict:
    v = verify_theorem(
        variant, inst.A, inst.B, inst.C, spec, cfg.field,
        strict=False,
        incidence_budget=cfg.incidence_budget,
        collinear_budget=cfg.collinear_budget,
        oracle_budget=cfg.oracle_budget,
    )
    ir = v.incidence
    if not v.chain_ok:
        log.error("trial %d (%s): chain failed at %s", inst.trial, variant.value, v.violations)
    return {
        "trial": inst.trial,
        "p": cfg.p,
        "variant": variant.value,
        "size_A": len(inst.A),
        "size_B": len(inst.B),
        "size_C": len(inst.C),
        "family_A": inst.tags[0],
        "family_B": inst.tags[1],
        "family_C": inst.tags[2],
        "g": spec.g.family,
        "h": spec.h.family,
        "m": v.m,
        "sum_E": v.energy.sum_E,
        "E": v.energy.E,
        "size_fAB": v.size_fAB,
        "size_BC": v.size_BC,
        "size_R": ir.size_R,
        "size_S": ir.size_S,
        "incidences": ir.incidences,
        "k_exact": -1 if ir.k_exact is None else ir.k_exact,
        "k_paper": ir.k_paper,
        "rudnev_rhs": ir.rudnev_rhs,
        "rudnev_ratio": ir.rudnev_ratio,
        "bound_new": v.bound.bound,
        "bound_hh": v.bound_hh,
        "measured_max": v.measured_max,
        "chain_ok": v.chain_ok,
    }


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(format(value, ".6g"))
    return value


def render(records: list[dict], columns, fmt: str, deterministic: bool, command: str) -> str:
    if fmt == "json":
        rows = [{k: _json_value(r.get(k)) for k in columns} for r in records]
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    if not deterministic:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')} by fpexpand {command}\n")
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_NONE, escapechar="\\")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt(r.get(k)) for k in columns])
    return buf.getvalue()


def parse_rendered(text: str, fmt: str) -> list[dict]:
    if fmt == "json":
        return json.loads(text)
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        rec = {}
        for k, v in row.items():
            if v in ("true", "false"):
                rec[k] = v == "true"
            else:
                try:
                    rec[k] = int(v)
                except ValueError:
                    try:
                        rec[k] = float(v)
                    except ValueError:
                        rec[k] = v
        out.append(rec)
    return out


def check_record(rec: dict) -> list[str]:
    """Invariants every emitted trial record must satisfy."""
    bad = []
    a, b, c = rec["size_A"], rec["size_B"], rec["size_C"]
    if not rec["chain_ok"]:
        bad.append("chain_ok is false")
    if rec["size_R"] != rec["size_S"]:
        bad.append("|R| != |S|")
    if rec["incidences"] > rec["size_R"] * rec["size_S"]:
        bad.append("I(R,S) > |R||S|")
    if rec["E"] > rec["incidences"]:
        bad.append("E > I(R,S)")
    if rec["sum_E"] > a * b * c or rec["sum_E"] * rec["m"] < a * b * c:
        bad.append("first moment outside [|A||B||C|/m, |A||B||C|]")
    if rec["sum_E"] ** 2 > rec["E"] * rec["size_BC"]:
        bad.append("Cauchy-Schwarz fails")
    if rec["k_exact"] >= 0 and rec["k_exact"] > rec["k_paper"]:
        bad.append("k_exact > k_paper")
    if rec["measured_max"] != max(rec["size_fAB"], rec["size_BC"]):
        bad.append("measured_max mismatch")
    return bad


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def selfcheck(text: str, fmt: str) -> int:
    failures = 0
    for i, rec in enumerate(parse_rendered(text, fmt)):
        for msg in check_record(rec):
            log.error("selfcheck record %d: %s", i, msg)
            failures += 1
    return failures


# ---------------------------------------------------------------- commands

def cmd_verify(cfg: ExperimentConfig) -> int:
    spec = make_spec(cfg)
    records = []
    for t in range(cfg.trials):
        inst = make_instance(cfg, t, cfg.size)
        for variant in cfg.variants:
            records.append(trial_record(cfg, inst, variant, spec))
    text = render(records, TRIAL_FIELDS, cfg.format, cfg.deterministic, "verify")
    failed = sum(not r["chain_ok"] for r in records)
    summary = {
        "command": "verify",
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
        "records": len(records),
        "chain_failures": failed,
        "all_chain_ok": failed == 0,
    }
    if not cfg.deterministic:
        summary["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    emit(text, cfg.out)
    if cfg.out:
        sys.stdout.write(json.dumps(summary, indent=1) + "\n")
    else:
        sys.stderr.write(json.dumps(summary) + "\n")
    status = EXIT_OK if failed == 0 else EXIT_FAIL
    if cfg.selfcheck and selfcheck(text, cfg.format):
        status = EXIT_FAIL
    return status


def aggregate(records: list[dict]) -> list[dict]:
    """Realized exponents log(measured_max) / log|A| grouped by (variant, |A|)."""
    groups: dict[tuple[str, int], list[float]] = {}
    for r in records:
        n = r["size_A"]
        e = math.log(r["measured_max"]) / math.log(n) if n > 1 else math.nan
        groups.setdefault((r["variant"], n), []).append(e)
    rows = []
    for (variant, n), es in sorted(groups.items()):
        finite = [e for e in es if math.isfinite(e)]
        rows.append({
            "variant": variant,
            "size_A": n,
            "trials": len(es),
            "exponent_mean": sum(finite) / len(finite) if finite else math.nan,
            "exponent_min": min(finite) if finite else math.nan,
            "exponent_max": max(finite) if finite else math.nan,
            "target_exponent": 1.2,
            "below_target": sum(e < 1.2 for e in finite),
        })
    return rows


AGGREGATE_FIELDS = ("variant", "size_A", "trials", "exponent_mean", "exponent_min", "exponent_max",
                    "target_exponent", "below_target")


def _aggregate_path(out: str, fmt: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + "_aggregate." + fmt))


def cmd_experiment(cfg: ExperimentConfig) -> int:
    spec = make_spec(cfg)
    field = cfg.field
    growth = cfg.growth or cfg.eps is not None
    columns = TRIAL_FIELDS + (GROWTH_FIELDS if growth else ())
    records = []
    trial = 0
    for n in cfg.size_grid:
        for _ in range(cfg.trials):
            inst = make_instance(cfg, trial, n)
            gr = None
            if growth and len(inst.A) > 1:
                gr = conditional_growth_check(inst.A, spec, field, cfg.eps)
            for variant in cfg.variants:
                rec = trial_record(cfg, inst, variant, spec)
                if gr is not None:
                    rec.update({
                        "eps": gr.eps,
                        "eps_readback": gr.eps_readback,
                        "hypothesis_holds": gr.hypothesis_holds,
                        "size_min_sum_prod": gr.size_min,
                        "size_fAA": gr.size_fAA,
                        "predicted_exponent": gr.predicted_exponent,
                        "realized_exponent": gr.realized_exponent,
                        "ratio_prod": gr.ratio_prod,
                        "ratio_sum": gr.ratio_sum,
                    })
                records.append(rec)
            trial += 1
    text = render(records, columns, cfg.format, cfg.deterministic, "experiment")
    agg = aggregate(records)
    agg_text = render(agg, AGGREGATE_FIELDS, cfg.format, cfg.deterministic, "experiment")
    emit(text, cfg.out)
    if cfg.out:
        emit(agg_text, _aggregate_path(cfg.out, cfg.format))
    else:
        sys.stdout.write(agg_text)
    failed = sum(not r["chain_ok"] for r in records)
    status = EXIT_OK if failed == 0 else EXIT_FAIL
    if cfg.selfcheck and selfcheck(text, cfg.format):
        status = EXIT_FAIL
    return status


def cmd_incidence(cfg: ExperimentConfig) -> int:
    spec = make_spec(cfg)
    from .energy import lambda_counts
    from .theorems import multiplicity

    records = []
    bad = 0
    for t in range(cfg.trials):
        inst = make_instance(cfg, t, cfg.size)
        for variant in cfg.variants:
            lc = lambda_counts(variant, inst.A, inst.B, inst.C, spec)
            ir = incidence_report(
                variant, inst.A, inst.B, inst.C, spec,
                m_A=multiplicity(variant, spec, on=inst.A), E=lc.E,
                incidence_budget=cfg.incidence_budget,
                collinear_budget=cfg.collinear_budget,
                oracle_budget=cfg.oracle_budget,
            )
            if ir.oracle_ok is False or ir.E_le_I is False or ir.structure_ok is False:
                log.error("trial %d (%s): incidence cross-check failed", t, variant.value)
                bad += 1
            records.append({
                "trial": t, "p": cfg.p, "variant": variant.value,
                "size_A": len(inst.A), "size_B": len(inst.B), "size_C": len(inst.C),
                "g": spec.g.family, "h": spec.h.family,
                "size_T": ir.size_T, "size_fAB": ir.size_fAB, "size_R": ir.size_R, "size_S": ir.size_S,
                "incidences": ir.incidences,
                "oracle_incidences": -1 if ir.oracle_incidences is None else ir.oracle_incidences,
                "method": ir.method,
                "k_exact": -1 if ir.k_exact is None else ir.k_exact,
                "k_paper": ir.k_paper, "k_corrected": ir.k_corrected,
                "rudnev_rhs": ir.rudnev_rhs, "rudnev_ratio": ir.rudnev_ratio,
                "p2_gate": ir.p2_gate, "E": lc.E, "E_le_I": ir.E_le_I,
            })
    emit(render(records, INCIDENCE_FIELDS, cfg.format, cfg.deterministic, "incidence"), cfg.out)
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_bounds(cfg: ExperimentConfig) -> int:
    rows = []
    for n in cfg.size_grid:
        cmp = compare_bounds((n, n, n), cfg.m, cfg.p)
        rows.append({
            "size_A": n, "size_B": n, "size_C": n, "m": cfg.m, "p": cfg.p,
            "bound_hh": cmp.hh, "bound_new": cmp.new, "larger": cmp.larger,
            "gate_ok": cmp.gate_ok, "gate_edge": cmp.gate_edge,
        })
    emit(render(rows, BOUND_FIELDS, cfg.format, cfg.deterministic, "bounds"), cfg.out)
    if not cfg.deterministic:
        sys.stderr.write(f"note: {compare_bounds((1, 1, 1), 1, cfg.p).note}\n")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "incidence": cmd_incidence,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--p", type=str)
    common.add_argument("--variant", choices=["mult", "add", "both"])
    common.add_argument("--family-A", dest="family_A", metavar="FAMILY",
                        help="random[:n], interval[:n[:start]], geometric[:n[:start[:ratio]]], subgroup:d, explicit:e1;e2")
    common.add_argument("--family-B", dest="family_B", metavar="FAMILY", help="as --family-A, or A to reuse set A")
    common.add_argument("--family-C", dest="family_C", metavar="FAMILY", help="as --family-A, or A to reuse set A")
    common.add_argument("--g", help="identity, constant:<c>, inverse, monomial:<k>, explicit:<csv>")
    common.add_argument("--h", help="as --g")
    common.add_argument("--size", type=str, help="set size when the family leaves it open")
    common.add_argument("--sizes", help="comma-separated size grid (experiment, bounds)")
    common.add_argument("--m", type=str, help="multiplicity for the bounds table")
    common.add_argument("--trials", type=str)
    common.add_argument("--seed", type=str)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--deterministic", action="store_const", const=True, default=None)
    common.add_argument("--selfcheck", action="store_const", const=True, default=None)
    common.add_argument("--collinear-budget", dest="collinear_budget", type=str)
    common.add_argument("--oracle-budget", dest="oracle_budget", type=str)
    common.add_argument("--incidence-budget", dest="incidence_budget", type=str)
    common.add_argument("--eps", type=str, help="epsilon for the conditional growth columns")
    common.add_argument("--growth", action="store_const", const=True, default=None,
                        help="add conditional growth columns with epsilon read back from A")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fpexpand", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="check the exact counting chain over seeded trials")
    sub.add_parser("experiment", parents=[common], help="sweep |A| and tabulate realized exponents")
    sub.add_parser("incidence", parents=[common], help="incidence and collinearity statistics")
    sub.add_parser("bounds", parents=[common], help="baseline vs new bound table")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"fpexpand: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
