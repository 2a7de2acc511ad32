"""Command-line front end: single computations, sweeps, and report export.

Exit codes: 0 success, 1 usage error, 2 computation failure (the message
names the failing stage).  All randomness flows from --seed; per-job seeds
are derived by stable hashing of the job key, so results do not depend on
sweep parallelism or execution order.  Reports for identical jobs are served
from the JSONL result store unless --force is given.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import json
import sys

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import geometry, schemas, tickets
from .errors import NeurovarietyError
from .network import (
    Architecture,
    WeightSet,
    ambient_dim,
    derive_seed,
    param_count,
)
from .polycore import COMPLEX, RATIONAL, MERSENNE61, ScalarField, prime_field
from .store import ResultStore, field_key, job_key

DEFAULT_STORE = "neurovariety_results.jsonl"

CSV_COLUMNS = ["arch", "r", "dim", "edim", "defect"]


class StageFailure(NeurovarietyError):
    """Computation failure annotated with the CLI stage that raised it."""


def _field_option(name: str, prime: int) -> ScalarField:
    if name == "fp":
        return prime_field(prime)
    if name == "float":
        return COMPLEX
    if name == "exact":
        return RATIONAL
    raise click.UsageError(f"unknown field {name!r}")


def _parse_arch(text: str, degree: int) -> Architecture:
    try:
        return Architecture.parse(text, degree)
    except NeurovarietyError as exc:
        raise click.UsageError(str(exc)) from None


def _emit(report: dict, fmt: str, out: str | None, kind: str) -> None:
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True)
    elif fmt in ("csv", "md"):
        rows = _defect_rows(report, kind)
        if rows is None:
            raise click.UsageError(
                f"--format {fmt} is only available for dimension reports "
                f"and sweeps, not {kind}")
        text = _render_csv(rows) if fmt == "csv" else _render_md(rows)
    else:
        raise click.UsageError(f"unknown format {fmt!r}")
    click.echo(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _defect_rows(report: dict, kind: str) -> list[dict] | None:
    if kind in ("dim", "defect", "fiber-check"):
        body = report["report"] if kind == "fiber-check" else report
        return [_defect_row(body)]
    return None


def _defect_row(rep: dict) -> dict:
    return {
        "arch": ",".join(str(w) for w in rep["arch"]),
        "r": rep["degree"],
        "dim": rep["dim"],
        "edim": rep["edim"],
        "defect": rep["defect"],
    }


def _render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _render_md(rows: list[dict]) -> str:
    lines = ["| " + " | ".join(CSV_COLUMNS) + " |",
             "|" + "|".join("---" for _ in CSV_COLUMNS) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(str(row[c]) for c in CSV_COLUMNS) + " |")
    return "\n".join(lines)


def _load_toml_or_json(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".json"):
        return json.loads(raw)
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError:
        return json.loads(raw)


# Flag names whose Python parameter name differs (click matches the latter).
_CONFIG_ALIASES = {"field": "field_name", "store": "store_path",
                   "format": "fmt", "input": "input_path",
                   "family": "family_name", "random": "random_spec"}


def _config_keys(section: dict) -> dict:
    out = {}
    for key, value in section.items():
        key = key.replace("-", "_")
        out[_CONFIG_ALIASES.get(key, key)] = value
    return out


def _config_defaults(path: str) -> dict:
    """Flat config keys become defaults for every command; flags win."""
    data = _load_toml_or_json(path)
    flat = _config_keys({k: v for k, v in data.items()
                         if not isinstance(v, dict)})
    defaults = {}
    for command in ("dim", "edim", "defect", "threshold", "sweep", "ticket",
                    "zero-witness", "homogeneity-check", "fiber-check"):
        merged = dict(flat)
        section = data.get(command.replace("-", "_"), data.get(command, {}))
        if isinstance(section, dict):
            merged.update(_config_keys(section))
        defaults[command] = merged
    return defaults


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML (or JSON) config file; flags win.")
@click.pass_context
def cli(ctx, config):
    """Dimension, defect, threshold and ticket analysis for polynomial networks."""
    if config:
        ctx.default_map = _config_defaults(config)


def _common_options(f):
    f = click.option("--field", "field_name",
                     type=click.Choice(["fp", "float", "exact"]),
                     default="fp", show_default=True,
                     help="Scalar field for genericity sampling.")(f)
    f = click.option("--prime", type=int, default=MERSENNE61,
                     show_default=False,
                     help="Prime modulus for --field fp (default 2^61-1).")(f)
    f = click.option("--trials", type=int, default=3, show_default=True)(f)
    f = click.option("--seed", type=int, default=0, show_default=True,
                     help="Master seed; per-job seeds are derived from it.")(f)
    f = click.option("--store", "store_path", type=click.Path(dir_okay=False),
                     default=DEFAULT_STORE, show_default=True,
                     help="JSONL result cache.")(f)
    f = click.option("--force", is_flag=True, default=False,
                     help="Recompute even on a cache hit.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "csv", "md"]),
                     default="json", show_default=True)(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Also write the report to this file.")(f)
    return f


def _dim_report_dict(widths: tuple[int, ...], degree: int, field: ScalarField,
                     trials: int, seed: int, store: ResultStore,
                     force: bool) -> tuple[dict, bool]:
    """Report for one (arch, degree) via the store; returns (report, cache_hit)."""
    key = job_key("dim", arch=widths, degree=degree, field=field,
                  seed=seed, trials=trials)
    if not force:
        cached = store.get(key)
        if cached is not None:
            return cached, True
    arch = Architecture(widths, degree)
    job_seed = derive_seed(seed, "dim", arch.arch_str(), degree,
                           field_key(field), trials)
    report = geometry.dim(arch, field=field, trials=trials,
                          seed=job_seed).to_json_dict()
    store.put(key, "dim", report)
    return report, False


def _guard(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except NeurovarietyError as exc:
        raise StageFailure(f"{stage}: {type(exc).__name__}: {exc}") from exc


@cli.command(name="dim")
@click.option("--arch", required=True, help='Widths "d0,d1,...,dL".')
@click.option("--degree", type=int, required=True, help="Activation degree r.")
@_common_options
def cmd_dim(arch, degree, field_name, prime, trials, seed, store_path, force,
            fmt, out):
    """Neurovariety dimension, defect and fiber report."""
    _run_dim_like("dim", arch, degree, field_name, prime, trials, seed,
                  store_path, force, fmt, out)


@cli.command(name="defect")
@click.option("--arch", required=True, help='Widths "d0,d1,...,dL".')
@click.option("--degree", type=int, required=True)
@_common_options
def cmd_defect(arch, degree, field_name, prime, trials, seed, store_path,
               force, fmt, out):
    """Alias of dim that highlights the defect (shares the dim cache)."""
    _run_dim_like("defect", arch, degree, field_name, prime, trials, seed,
                  store_path, force, fmt, out)


def _run_dim_like(kind, arch, degree, field_name, prime, trials, seed,
                  store_path, force, fmt, out):
    architecture = _parse_arch(arch, degree)
    field = _field_option(field_name, prime)
    if field == RATIONAL:
        raise click.UsageError(
            "genericity sampling needs --field fp or float, not exact")
    store = ResultStore(store_path)
    report, _ = _guard(kind, _dim_report_dict, architecture.widths, degree,
                       field, trials, seed, store, force)
    _emit(report, fmt, out, kind)


@cli.command(name="edim")
@click.option("--arch", required=True, help='Widths "d0,d1,...,dL".')
@click.option("--degree", type=int, required=True)
@_common_options
def cmd_edim(arch, degree, field_name, prime, trials, seed, store_path, force,
             fmt, out):
    """Expected dimension with the active branch of the min."""
    architecture = _parse_arch(arch, degree)

    def compute():
        value, branch = geometry.edim(architecture)
        return {
            "schema_version": schemas.SCHEMA_VERSION,
            "arch": list(architecture.widths),
            "degree": degree,
            "params": param_count(architecture),
            "ambient": ambient_dim(architecture),
            "edim": value,
            "edim_branch": branch,
        }

    store = ResultStore(store_path)
    key = job_key("edim", arch=architecture.widths, degree=degree)
    report = None if force else store.get(key)
    if report is None:
        report = _guard("edim", compute)
        store.put(key, "edim", report)
    _emit(report, fmt, out, "edim")


@cli.command(name="threshold")
@click.option("--arch", required=True, help='Widths "d0,d1,...,dL".')
@click.option("--rmax", type=int, required=True,
              help="Probe degrees 1..rmax (the estimate is verified only up to rmax).")
@_common_options
def cmd_threshold(arch, rmax, field_name, prime, trials, seed, store_path,
                  force, fmt, out):
    """Empirical activation-threshold probe plus the closed-form bound."""
    if rmax < 1:
        raise click.UsageError("--rmax must be >= 1")
    architecture = _parse_arch(arch, rmax)
    field = _field_option(field_name, prime)
    if field == RATIONAL:
        raise click.UsageError(
            "genericity sampling needs --field fp or float, not exact")
    store = ResultStore(store_path)
    key = job_key("threshold", arch=architecture.widths, rmax=rmax,
                  field=field, seed=seed, trials=trials)
    report = None if force else store.get(key)
    if report is None:
        job_seed = derive_seed(seed, "threshold", architecture.arch_str(),
                               rmax, field_key(field), trials)
        report = _guard(
            "threshold",
            lambda: geometry.threshold_probe(
                architecture.widths, rmax, field=field, trials=trials,
                seed=job_seed).to_json_dict())
        store.put(key, "threshold", report)
    _emit(report, fmt, out, "threshold")


@cli.command(name="fiber-check")
@click.option("--arch", required=True, help='Widths "d0,d1,...,dL".')
@click.option("--degree", type=int, required=True)
@_common_options
def cmd_fiber_check(arch, degree, field_name, prime, trials, seed,
                    store_path, force, fmt, out):
    """Check params - dim >= sum of hidden widths; exits 2 when violated."""
    architecture = _parse_arch(arch, degree)
    field = _field_option(field_name, prime)
    if field == RATIONAL:
        raise click.UsageError(
            "genericity sampling needs --field fp or float, not exact")
    store = ResultStore(store_path)
    report, _ = _guard("fiber-check", _dim_report_dict, architecture.widths,
                       degree, field, trials, seed, store, force)
    bound = sum(architecture.hidden_widths)
    check = {
        "schema_version": schemas.SCHEMA_VERSION,
        "arch": list(architecture.widths),
        "degree": degree,
        "fiber_dim": report["fiber_dim"],
        "lower_bound": bound,
        "ok": report["fiber_dim"] >= bound,
        "report": report,
    }
    _emit(check, fmt, out, "fiber-check")
    if not check["ok"]:
        raise StageFailure("fiber-check: fiber dimension below the hidden-width bound")


@cli.command(name="homogeneity-check")
@click.option("--arch", required=True, help='Widths "d0,d1,...,dL".')
@click.option("--degree", type=int, required=True)
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--prime", type=int, default=MERSENNE61)
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_homogeneity_check(arch, degree, trials, seed, prime, fmt, out):
    """Verify exact invariance under weight rescaling; exits 2 on mismatch."""
    architecture = _parse_arch(arch, degree)
    result = _guard("homogeneity-check", geometry.homogeneity_check,
                    architecture, trials=trials, seed=seed,
                    field=prime_field(prime))
    _emit(result.to_json_dict(), fmt, out, "homogeneity-check")
    if not result.passed:
        raise StageFailure(
            f"homogeneity-check: mismatch at trial seed {result.failed_seed}")


@cli.command(name="zero-witness")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Weight-set JSON over complex floats.")
@click.option("--degree", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_zero_witness(input_path, degree, fmt, out):
    """Find a nontrivial network zero when some weight matrix is singular."""
    with open(input_path, "r", encoding="utf-8") as fh:
        weights = WeightSet.from_json(json.load(fh))
    witness = _guard("zero-witness", geometry.zero_witness, weights, degree)
    if witness is None:
        report = {"schema_version": schemas.SCHEMA_VERSION, "found": False}
    else:
        report = witness.to_json_dict()
    _emit(report, fmt, out, "zero-witness")


@cli.command(name="ticket")
@click.option("--input", "input_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Family file: JSON list of polynomial objects.")
@click.option("--family", "family_name", type=click.Choice(["builtin"]),
              default=None, help="Use the stock family {x, y, x+y, x-y}.")
@click.option("--random", "random_spec", default=None,
              help='Sample a family: "k,num_vars,degree".')
@click.option("--mmax", type=int, required=True)
@click.option("--field", "field_name", type=click.Choice(["fp", "exact"]),
              default="fp", show_default=True,
              help="Working field: prime-field screen or rationals only.")
@click.option("--prime", type=int, default=MERSENNE61)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--store", "store_path", type=click.Path(dir_okay=False),
              default=DEFAULT_STORE, show_default=True)
@click.option("--force", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_ticket(input_path, family_name, random_spec, mmax, field_name, prime,
               seed, store_path, force, fmt, out):
    """Ticket of a polynomial family: dependent powers with certificates."""
    sources = [s for s in (input_path, family_name, random_spec) if s]
    if len(sources) != 1:
        raise click.UsageError(
            "give exactly one of --input, --family, --random")
    if mmax < 1:
        raise click.UsageError("--mmax must be >= 1")
    if field_name == "exact" and random_spec:
        raise click.UsageError("--random samples over the prime field")
    work = prime_field(prime) if field_name == "fp" else RATIONAL
    if input_path:
        with open(input_path, "r", encoding="utf-8") as fh:
            objs = json.load(fh)
        family = _guard("ticket", tickets.PolyFamily.from_json, objs,
                        work_field=work)
        digest = hashlib.blake2b(
            json.dumps(objs, sort_keys=True).encode(), digest_size=8).hexdigest()
        source = f"file:{digest}"
    elif family_name == "builtin":
        family = tickets.builtin_family(work)
        source = "builtin"
    else:
        try:
            k, num_vars, degree = (int(p) for p in random_spec.split(","))
        except ValueError:
            raise click.UsageError(
                '--random expects "k,num_vars,degree"') from None
        family = _guard("ticket", tickets.random_family, k, num_vars, degree,
                        derive_seed(seed, "family", k, num_vars, degree),
                        field=work)
        source = f"random:{k},{num_vars},{degree}:seed={seed}"
    store = ResultStore(store_path)
    key = job_key("ticket", source=source, mmax=mmax, field=work)
    report = None if force else store.get(key)
    if report is None:
        report = _guard("ticket",
                        lambda: tickets.ticket(family, mmax).to_json_dict())
        store.put(key, "ticket", report)
    _emit(report, fmt, out, "ticket")


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def _parse_sweep_spec(data: dict) -> dict:
    archs: list[tuple[int, ...]] = []
    for text in data.get("architectures", []):
        if isinstance(text, str):
            widths = tuple(int(p) for p in text.split(","))
        else:
            widths = tuple(int(p) for p in text)
        archs.append(widths)
    grid = data.get("equi_width")
    if grid:
        d_lo, d_hi = grid["d"]
        l_lo, l_hi = grid["L"]
        for d in range(int(d_lo), int(d_hi) + 1):
            for L in range(int(l_lo), int(l_hi) + 1):
                archs.append((d,) * (L + 1))
    degrees_raw = data.get("degrees")
    if isinstance(degrees_raw, dict):
        degrees = list(range(int(degrees_raw["start"]),
                             int(degrees_raw["stop"]) + 1))
    elif degrees_raw:
        degrees = [int(r) for r in degrees_raw]
    else:
        degrees = []
    if not archs or not degrees:
        raise click.UsageError(
            "sweep spec needs non-empty architectures and degrees")
    options = data.get("options", {})
    return {"architectures": archs, "degrees": degrees, "options": options}


def _sweep_job(args):
    widths, degree, prime, trials, job_seed = args
    try:
        report = geometry.dim(Architecture(widths, degree),
                              field=prime_field(prime), trials=trials,
                              seed=job_seed).to_json_dict()
        return widths, degree, report, None
    except NeurovarietyError as exc:
        return widths, degree, None, f"{type(exc).__name__}: {exc}"


@cli.command(name="sweep")
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes.")
@click.option("--store", "store_path", type=click.Path(dir_okay=False),
              default=DEFAULT_STORE, show_default=True)
@click.option("--force", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "md"]),
              default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Defect table destination (CSV or JSONL per --format).")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--prime", type=int, default=None)
def cmd_sweep(spec_file, jobs, store_path, force, fmt, out, trials, seed, prime):
    """Run a (architecture x degree) grid of dimension jobs with caching."""
    spec = _parse_sweep_spec(_load_toml_or_json(spec_file))
    options = spec["options"]
    trials = trials if trials is not None else int(options.get("trials", 3))
    seed = seed if seed is not None else int(options.get("seed", 0))
    prime = prime if prime is not None else int(options.get("prime", MERSENNE61))
    field = prime_field(prime)
    out = out or options.get("out")
    store = ResultStore(store_path)

    pending = []
    records = []
    failures = {}
    for widths in spec["architectures"]:
        for degree in spec["degrees"]:
            key = job_key("dim", arch=widths, degree=degree, field=field,
                          seed=seed, trials=trials)
            cached = None if force else store.get(key)
            if cached is not None:
                records.append(cached)
                continue
            arch_str = ",".join(str(w) for w in widths)
            job_seed = derive_seed(seed, "dim", arch_str, degree,
                                   field_key(field), trials)
            pending.append((key, (widths, degree, prime, trials, job_seed)))

    if pending:
        if jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_job,
                                        [args for _, args in pending]))
        else:
            results = [_sweep_job(args) for _, args in pending]
        for (key, _), (widths, degree, report, error) in zip(pending, results):
            label = ",".join(str(w) for w in widths) + f" r={degree}"
            if error is not None:
                failures[label] = error
                continue
            store.put(key, "dim", report)
            records.append(report)

    records.sort(key=lambda r: (r["arch"], r["degree"]))
    rows = [_defect_row(r) for r in records]
    summary = _render_md(rows)
    for label, message in sorted(failures.items()):
        summary += f"\nskipped {label}: {message}"
    click.echo(summary)
    if out:
        if fmt == "json":
            text = "\n".join(json.dumps(r, sort_keys=True) for r in records)
        elif fmt == "csv":
            text = _render_csv(rows)
        else:
            text = _render_md(rows)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if not records:
        raise StageFailure("sweep: every job failed")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, prog_name="neurovariety", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except NeurovarietyError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
