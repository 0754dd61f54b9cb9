"""
Command-Line Entry Point.

``deforge <subcommand> ...`` runs one batch computation and writes a single
JSON report. Exit codes: 0 when every internal cross-check passed (a lemma that
fails is a result, not an error), 1 when a cross-check failed, 2 on usage,
parse or validation errors.
"""

import argparse
import logging
import sys
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from deforge import DeforgeError, __version__
from deforge.calculus import InvariantViolation, LieAlgebraPresentation, ce_d
from deforge.catalog import ParseError, UnknownName
from deforge.catalog.builtin import CatalogEntry, builtin, is_builtin
from deforge.catalog.fileformat import load, load_form
from deforge.catalog.report import FactModel, ReportModel, emit_report
from deforge.config import Config, ConfigurationError, init_logging
from deforge.constants import (
    DEFAULT_MAJORANT_ORDER,
    DEFAULT_ORDER,
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    MAX_MAJORANT_ORDER,
    MAX_SERIES_ORDER,
)
from deforge.deformation import ObstructionHit
from deforge.deformation.balanced import extend_balanced, form_power, verify_balanced_system
from deforge.deformation.kahler import extend_kahler, verify_reduction
from deforge.deformation.kuranishi import (
    KuranishiFamily,
    fixed_point_residual,
    integrability_residual,
    kuranishi,
)
from deforge.deformation.majorant import MajorantParams, dominates, majorant, power_bound_holds
from deforge.deformation.projection import (
    ProjectionVariant,
    extend_dclosed_projection,
    projection_residual,
)
from deforge.deformation.verify import ResidualReport, verify_extension_closed
from deforge.exterior import Form
from deforge.hodge import HermitianMetric, HodgeComplex
from deforge.identities import DegreeMismatch, fuzz_identity, resolve_identity_names
from deforge.lemmata import LemmaKind, check_lemma, classify, nilpotent_filtration
from deforge.linalg import Matrix
from deforge.positivity import ConstructionFailed
from deforge.positivity.extremal import ExtremalKind, construct_extremal
from deforge.positivity.grassmannian import pluecker_codim
from deforge.positivity.hermitian import canonical_form
from deforge.positivity.transversality import positive_index_bound_check, transversality
from deforge.scalars import GaussianRational, ScalarField, get_field
from deforge.schemas.config_schemas import (
    Backend,
    CommandConfig,
    ConstructKind,
    LemmaChoice,
    Structure,
    Subcommand,
    Theory,
)
from deforge.utils.parallel import run_ordered
from deforge.utils.validation import (
    parse_bidegree,
    validate_bidegree,
    validate_order,
    validate_positive_rational,
)

logger = logging.getLogger(__name__)

USAGE_ERRORS = (
    ParseError,
    UnknownName,
    InvariantViolation,
    ConfigurationError,
    DegreeMismatch,
    KeyError,
    ValueError,
    OSError,
)


class UsageError(DeforgeError):
    """A flag value was rejected after parsing."""


@dataclass
class Source:
    """Resolved algebra with its metric and, for catalog names, the catalog entry."""

    algebra: LieAlgebraPresentation
    metric: HermitianMetric
    entry: Optional[CatalogEntry] = None


@dataclass
class Outcome:
    results: dict[str, Any]
    passed: bool = True


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------


def _add_globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--backend", choices=[b.value for b in Backend], default=default)
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    parser.add_argument("--output", "-o", default=default, help="Report path (default stdout)")
    parser.add_argument("--threads", type=int, default=default, help="Worker thread cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deforge",
        description="Deformations of complex structures on nilmanifolds, in exact arithmetic.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    p = subparsers.add_parser("cohomology", parents=[common], help="Cohomology dimensions")
    p.add_argument("source", help="Catalog name or structure file")
    p.add_argument("--theory", required=True, choices=[t.value for t in Theory])
    group = p.add_mutually_exclusive_group()
    group.add_argument("--bidegree", help="p,q")
    group.add_argument("--all", action="store_true", help="Every bidegree (default)")

    p = subparsers.add_parser("lemma", parents=[common], help="Check a ddbar-lemma variant")
    p.add_argument("source")
    p.add_argument("--kind", required=True, choices=[k.value for k in LemmaChoice])
    p.add_argument("--bidegree", help="p,q (full lemma only)")

    p = subparsers.add_parser("classify", parents=[common], help="Classify the complex structure")
    p.add_argument("source")

    p = subparsers.add_parser("kuranishi", parents=[common], help="Kuranishi family")
    p.add_argument("source")
    p.add_argument("--order", default=None)
    p.add_argument("--direction", help="Harmonic coefficients, ';' between parameters")

    p = subparsers.add_parser("extend", parents=[common], help="Extend a special metric")
    p.add_argument("source")
    p.add_argument("--structure", required=True, choices=[s.value for s in Structure])
    p.add_argument("--order", default=None)
    p.add_argument("--metric", help="YAML file with the coframe metric matrix 'h'")
    p.add_argument("--direction", help="Harmonic coefficients, ';' between parameters")
    p.add_argument("--variant", choices=[v.value for v in ProjectionVariant], default="bc")

    p = subparsers.add_parser("positivity", parents=[common], help="Transversality of (p,p)-forms")
    p.add_argument("source", nargs="?")
    p.add_argument("--form", help="File with 'n=' and 'form =' lines")
    p.add_argument("--p", dest="p", type=int, required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--construct", choices=[c.value for c in ConstructKind])

    p = subparsers.add_parser("fuzz", parents=[common], help="Fuzz algebraic identities")
    p.add_argument("source")
    p.add_argument("--identities", default="all")
    p.add_argument("--cases", type=int)

    p = subparsers.add_parser("majorant", parents=[common], help="Majorant series checks")
    p.add_argument("--beta", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--order", default=None)
    p.add_argument("--against", help="YAML file with a 'coefficients' list")
    return parser


def _order(value: Optional[str], default: int, max_order: int = MAX_SERIES_ORDER) -> int:
    if value is None:
        return default
    is_valid, error, order = validate_order(value, max_order)
    if not is_valid:
        raise UsageError(error)
    return order


def command_config(args: argparse.Namespace, settings: Config) -> CommandConfig:
    """Validate the parsed arguments into a CommandConfig."""
    fields = {"subcommand", "source", "backend", "order", "seed", "output", "threads"}
    options = {k: v for k, v in vars(args).items() if k not in fields}
    data: dict[str, Any] = {
        "subcommand": args.subcommand,
        "source": getattr(args, "source", None),
        "seed": args.seed,
        "output": args.output,
        "threads": args.threads,
        "backend": args.backend or settings.engine().backend,
        "options": options,
    }
    if args.subcommand == Subcommand.MAJORANT.value:
        data["order"] = _order(args.order, DEFAULT_MAJORANT_ORDER, MAX_MAJORANT_ORDER)
    elif getattr(args, "order", None) is not None:
        data["order"] = _order(args.order, DEFAULT_ORDER)
    return CommandConfig.model_validate(data)


# ----------------------------------------------------------------------
# Inputs
# ----------------------------------------------------------------------


def _field(cmd: CommandConfig, settings: Config) -> ScalarField:
    return get_field(cmd.backend.value, settings.engine().tolerance)


def _metric_in(metric: HermitianMetric, fld: ScalarField) -> HermitianMetric:
    return metric if metric.field == fld else HermitianMetric(Matrix(metric.h.rows, fld))


def load_metric(path: str, n: int, fld: ScalarField) -> HermitianMetric:
    """Read ``h: [[...], ...]`` with Gaussian-rational entries.

    Raises:
        UsageError: If the matrix is missing or has the wrong size.
    """
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    rows = data.get("h") if isinstance(data, dict) else None
    if not isinstance(rows, list) or len(rows) != n or any(len(r) != n for r in rows):
        raise UsageError(f"{path}: 'h' must be a {n}x{n} matrix")
    return HermitianMetric(Matrix([[GaussianRational.parse(str(x)) for x in r] for r in rows], fld))


def resolve_source(name: str, fld: ScalarField) -> Source:
    """Catalog name or structure file, converted to the requested backend."""
    if is_builtin(name):
        entry = builtin(name)
        alg = entry.algebra if entry.algebra.field == fld else entry.algebra.with_field(fld)
        return Source(alg, _metric_in(entry.metric, fld), entry)
    if not Path(name).exists():
        raise UnknownName(f"{name!r} is neither a catalog name nor a file")
    alg = load(name, fld)
    return Source(alg, HermitianMetric.standard(alg.n, fld))


def _bidegree(text: str, n: int) -> tuple[int, int]:
    is_valid, error, bidegree = parse_bidegree(text)
    if not is_valid:
        raise UsageError(error)
    is_valid, error = validate_bidegree(n, *bidegree)
    if not is_valid:
        raise UsageError(error)
    return bidegree


def _rational(text: str, name: str) -> Fraction:
    is_valid, error, value = validate_positive_rational(text)
    if not is_valid:
        raise UsageError(f"--{name}: {error}")
    return value


def _direction(text: Optional[str], size: int) -> list[list[GaussianRational]]:
    """Default: the first harmonic direction."""
    if text is None:
        return [[GaussianRational(1 if k == 0 else 0) for k in range(size)]] if size else [[]]
    rows = []
    for part in text.split(";"):
        row = [GaussianRational.parse(c) for c in part.split(",") if c.strip()]
        if len(row) != size:
            raise UsageError(f"direction has {len(row)} coefficients, harmonic basis has {size}")
        rows.append(row)
    return rows


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def run_cohomology(cmd: CommandConfig, source: Source, workers: Optional[int]) -> Outcome:
    alg = source.algebra
    n = alg.n
    theory = cmd.options["theory"]
    hc = HodgeComplex(alg, source.metric)
    if cmd.options.get("bidegree"):
        bidegrees = [_bidegree(cmd.options["bidegree"], n)]
    else:
        bidegrees = [(p, q) for p in range(n + 1) for q in range(n + 1)]

    def compute(bidegree: tuple[int, int]) -> dict[str, Any]:
        p, q = bidegree
        entry: dict[str, Any] = {"dim": hc.cohomology_dim(theory, p, q)}
        if theory in (Theory.BC.value, Theory.AEPPLI.value):
            dims = hc.decomposition_dims(p, q)[theory]
            entry["decomposition"] = dims
            parts = sum(v for k, v in dims.items() if k != "total")
            entry["decomposition_consistent"] = (
                parts == dims["total"] and dims["harmonic"] == entry["dim"]
            )
            if p < n and q < n and theory == Theory.AEPPLI.value:
                entry["green_identities"] = hc.check_green_identities(p, q)
        return entry

    values = run_ordered(compute, bidegrees, workers)
    dims = {f"{p},{q}": v for (p, q), v in zip(bidegrees, values)}
    chain = {
        "aeppli": hc.cohomology_dim("aeppli", n - 1, n),
        "del": hc.cohomology_dim("del", n - 1, n),
        "bc": hc.cohomology_dim("bc", n - 1, n),
    }
    chain["holds"] = chain["aeppli"] <= chain["del"] <= chain["bc"]
    passed = chain["holds"] and all(
        v.get("decomposition_consistent", True) and all(v.get("green_identities", {}).values())
        for v in values
    )
    return Outcome({"theory": theory, "dims": dims, "top_chain": chain}, passed)


def run_lemma(cmd: CommandConfig, source: Source, workers: Optional[int]) -> Outcome:
    kind = LemmaKind(LemmaChoice(cmd.options["kind"]).kind_value)
    bidegree = None
    if cmd.options.get("bidegree"):
        if kind is not LemmaKind.FULL:
            raise UsageError("--bidegree applies to the full lemma only")
        bidegree = _bidegree(cmd.options["bidegree"], source.algebra.n)
    hc = HodgeComplex(source.algebra, source.metric)
    verdict = check_lemma(source.algebra, kind, bidegree, hc)
    results = {
        "kind": verdict.kind,
        "bidegree": list(verdict.bidegree),
        "holds": verdict.holds,
        "witness": verdict.witness,
        "preimage": verdict.preimage,
        "details": verdict.details,
        "nilmanifold_conclusion": verdict.nilmanifold_conclusion,
    }
    return Outcome(results, verdict.consistent)


def run_classify(cmd: CommandConfig, source: Source, workers: Optional[int]) -> Outcome:
    return Outcome(
        {
            "classification": classify(source.algebra),
            "filtration": nilpotent_filtration(source.algebra),
        }
    )


def _family(cmd: CommandConfig, source: Source, hc: HodgeComplex, workers) -> KuranishiFamily:
    size = len(hc.harmonic_basis("dbar", 0, 1, vector=True))
    direction = _direction(cmd.options.get("direction"), size)
    return kuranishi(source.algebra, source.metric, cmd.order, direction, hc, workers)


def run_kuranishi(cmd: CommandConfig, source: Source, workers: Optional[int]) -> Outcome:
    alg = source.algebra
    hc = HodgeComplex(alg, source.metric)
    family = _family(cmd, source, hc, workers)
    fixed = fixed_point_residual(alg, family.phi, hc)
    integrable = integrability_residual(alg, family.phi)
    results = {
        "order": cmd.order,
        "harmonic_dim": len(family.basis),
        "directions": family.directions,
        "phi": family.phi,
        "obstructions": {str(k): hits for k, hits in family.obstructions.items()},
        "unobstructed": family.unobstructed,
        "first_obstructed_order": family.first_obstructed_order,
        "fixed_point_residual_zero": fixed.is_zero(),
        "integrability_residual_zero": integrable.is_zero(),
    }
    passed = fixed.is_zero() and (not family.unobstructed or integrable.is_zero())
    return Outcome(results, passed)


def _dclosed_input(alg: LieAlgebraPresentation, metric: HermitianMetric) -> Form:
    omega = metric.fundamental_form()
    if ce_d(alg, omega).is_zero():
        return omega
    power = form_power(omega, alg.n - 1)
    if ce_d(alg, power).is_zero():
        return power
    raise UsageError("neither ω nor ω^{n-1} of the metric is d-closed")


def run_extend(cmd: CommandConfig, source: Source, workers: Optional[int]) -> Outcome:
    alg = source.algebra
    metric = source.metric
    if cmd.options.get("metric"):
        metric = load_metric(cmd.options["metric"], alg.n, alg.field)
    hc = HodgeComplex(alg, metric)
    family = _family(cmd, source, hc, workers)
    phi = family.phi
    structure = Structure(cmd.options["structure"])
    omega0 = metric.fundamental_form()
    results: dict[str, Any] = {"structure": structure, "order": cmd.order, "phi": phi}
    reports: list[ResidualReport] = []
    try:
        if structure is Structure.KAHLER:
            omega = extend_kahler(alg, metric, omega0, phi, cmd.order, hc)
            reports.append(verify_reduction(alg, omega, phi))
        elif structure is Structure.BALANCED:
            omega, tilde = extend_balanced(alg, metric, omega0, phi, cmd.order, hc)
            reports.append(verify_balanced_system(alg, tilde, phi))
            initial = form_power(omega0, alg.n - 1)
            results["initial_matches"] = omega.at(omega.origin).equals(initial)
            results["real"] = omega.is_real()
        else:
            variant = ProjectionVariant(cmd.options["variant"])
            start = _dclosed_input(alg, metric)
            omega = extend_dclosed_projection(alg, metric, start, phi, cmd.order, variant, hc)
            results["variant"] = variant
            results["projection_residual_zero"] = projection_residual(
                alg, phi, omega, variant
            ).is_zero()
        bott_chern = results.get("variant") is ProjectionVariant.BOTT_CHERN
        if structure is not Structure.DCLOSED or bott_chern:
            reports.append(verify_extension_closed(alg, omega, phi))
    except ObstructionHit as e:
        logger.info(f"Extension of {structure.value} structure obstructed at order {e.order}")
        results["obstruction"] = {"order": e.order, "equation": e.equation, "witness": e.witness}
        return Outcome(results, True)
    results["series"] = omega
    results["residuals"] = [r.summary() for r in reports]
    passed = all(r.passed for r in reports) and all(
        results.get(key, True) for key in ("initial_matches", "real", "projection_residual_zero")
    )
    return Outcome(results, passed)


def run_positivity(cmd: CommandConfig, source: Optional[Source], workers, settings: Config):
    options = cmd.options
    fld = _field(cmd, settings)
    pos = settings.positivity()
    samples = options.get("samples") or pos.samples
    p = options["p"]
    metric = source.metric if source else None
    results: dict[str, Any] = {"p": p}
    if options.get("form"):
        omega = load_form(options["form"], fld)
        n = omega.n
    elif source is not None:
        n = source.algebra.n
        omega = form_power(source.metric.fundamental_form(), p)
    else:
        raise UsageError("positivity needs a source or --form")
    if metric is not None and metric.n != n:
        metric = None
    if not 1 <= p <= n - 1:
        raise UsageError(f"--p must lie in 1..{n - 1}")

    construct = options.get("construct")
    if construct:
        kind = ExtremalKind(ConstructKind(construct).name.lower())
        try:
            omega = construct_extremal(n, p, kind, cmd.seed, samples, pos.extremal_retries)
        except ConstructionFailed as e:
            results["construction"] = {"failed": str(e), "witness": e.witness}
            return Outcome(results, False)
        results["construction"] = {"kind": kind, "form": omega}

    verdict = transversality(omega, count=samples, seed=cmd.seed, margin=pos.margin, p=p)
    bound = positive_index_bound_check(omega, metric, verdict, samples, cmd.seed)
    canonical = canonical_form(omega, metric, p)
    results.update(
        {
            "form": omega,
            "transversality": verdict,
            "index_bound": bound,
            "canonical": {
                "lambdas": canonical.lambdas,
                "positive_index": canonical.positive_index,
                "negative_index": canonical.negative_index,
                "exact": canonical.exact,
                "notes": canonical.notes,
            },
        }
    )
    passed = bound.holds is not False
    if source is not None and not options.get("form"):
        results["d_closed"] = ce_d(source.algebra, omega).is_zero()
    if construct == ConstructKind.EXACT_INDEX.value:
        expected = bound.bound
        results["construction"]["expected_index"] = expected
        passed = passed and canonical.positive_index == expected
    if canonical.exact:
        passed = passed and canonical.reassemble().equals(omega)
    results["pluecker_codim"] = pluecker_codim(n, n - p)
    return Outcome(results, passed)


def run_fuzz(cmd: CommandConfig, source: Source, workers: Optional[int], settings: Config):
    names = resolve_identity_names(cmd.options.get("identities") or "all")
    cases = cmd.options.get("cases") or settings.fuzz().cases
    summaries = [fuzz_identity(source.algebra, name, cases, cmd.seed, workers) for name in names]
    results = {
        "cases": cases,
        "identities": {
            s.name: {
                "holds": s.holds,
                "passed": s.passed,
                "not_applicable": s.not_applicable,
                "first_failure": s.first_failure,
                "failure_detail": s.failure_detail,
            }
            for s in summaries
        },
    }
    return Outcome(results, all(s.holds for s in summaries))


def run_majorant(cmd: CommandConfig) -> Outcome:
    options = cmd.options
    params = MajorantParams(
        _rational(options["beta"], "beta"), _rational(options["gamma"], "gamma"), max(cmd.order, 1)
    )
    coefficients = majorant(params)
    results: dict[str, Any] = {
        "beta": params.beta,
        "gamma": params.gamma,
        "coefficients": coefficients,
        "square_bound_holds": power_bound_holds(params, 2),
    }
    if options.get("against"):
        with open(options["against"], encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        values = data.get("coefficients") if isinstance(data, dict) else None
        if not isinstance(values, list):
            raise UsageError(f"{options['against']}: expected a 'coefficients' list")
        norms = [Fraction(str(v)) for v in values]
        results["dominated"] = dominates(norms, coefficients)
        results["violations"] = [
            m for m, (b, a) in enumerate(zip(norms, coefficients)) if m >= 1 and b > a
        ]
    return Outcome(results, results["square_bound_holds"])


_HANDLERS: dict[Subcommand, Callable[..., Outcome]] = {
    Subcommand.COHOMOLOGY: run_cohomology,
    Subcommand.LEMMA: run_lemma,
    Subcommand.CLASSIFY: run_classify,
    Subcommand.KURANISHI: run_kuranishi,
    Subcommand.EXTEND: run_extend,
}


def execute(cmd: CommandConfig, settings: Config) -> ReportModel:
    """Run one command and assemble its report."""
    fld = _field(cmd, settings)
    workers = cmd.threads or settings.engine().threads or None
    source = resolve_source(cmd.source, fld) if cmd.source else None
    logger.info(f"Running {cmd.subcommand.value} on {cmd.source} with the {fld.name} backend")

    if cmd.subcommand is Subcommand.MAJORANT:
        outcome = run_majorant(cmd)
    elif cmd.subcommand is Subcommand.POSITIVITY:
        outcome = run_positivity(cmd, source, workers, settings)
    elif cmd.subcommand is Subcommand.FUZZ:
        outcome = run_fuzz(cmd, source, workers, settings)
    else:
        outcome = _HANDLERS[cmd.subcommand](cmd, source, workers)

    facts = []
    if source is not None and source.entry is not None:
        facts = [FactModel(**fact.to_dict()) for fact in source.entry.facts]
    return ReportModel(
        command=cmd.subcommand.value,
        algebra=source.algebra.name if source else None,
        backend=cmd.backend.value,
        seed=cmd.seed,
        passed=outcome.passed,
        results=outcome.results,
        facts=facts,
    )


def _write(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info(f"Report written to {output}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        init_logging()
        settings = Config()
        cmd = command_config(args, settings)
        report = execute(cmd, settings)
        _write(emit_report(report, settings.report().indent), cmd.output)
    except (UsageError, *USAGE_ERRORS) as e:
        logger.error(f"Usage error: {e}")
        print(f"deforge: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DeforgeError as e:
        logger.error(f"Internal check failed: {e}")
        print(f"deforge: check failed: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED

    if not report.passed:
        logger.error(f"{cmd.subcommand.value}: an internal cross-check failed")
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
