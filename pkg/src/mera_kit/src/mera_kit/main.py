"""Main entry point for the mera-kit command-line tool."""

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np

from .checks import FLOW_TOL_PER_TERM, run_bench, run_oracle_suite
from .cone import correlator, expect_local, rdm
from .config import MeraKitConfig, get_config
from .errors import ArgumentError, MeraKitError, UsageErrorMixin
from .logger import get_logger, setup_logging
from .mera import MeraMode, build_random, param_count, validate
from .operators import OPERATOR_NAMES, bond_matrix, named_operator, nearest_neighbor_terms
from .oracle import full_state, oracle_correlator, oracle_expectation
from .renorm import (
    LocalOperator,
    block_entropy,
    correlation_exponent,
    effective_hamiltonians,
    hamiltonian_expectation,
)
from .report import RunReport, write_document
from .serialization import load, save
from .tensor_core import TOL_HERM, TOL_PSD, TOL_TRACE, hermitian_violation
from .version import get_version

EXPONENT_REL_TOL = 0.10

Handler = Callable[[argparse.Namespace, MeraKitConfig], RunReport]


def _int_list(text: str) -> list[int]:
    """Parse ``"0,1,2"`` or a range ``"0-3"``."""
    try:
        if "-" in text and "," not in text:
            start, stop = (int(x) for x in text.split("-", 1))
            return list(range(start, stop + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected integers like 0,1,2 or 0-3, got {text!r}") from e


def _chi(text: str) -> int | list[int]:
    values = _int_list(text)
    return values[0] if len(values) == 1 and "," not in text else values


def _matrix_summary(matrix: np.ndarray) -> dict:
    eigenvalues = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
    return {
        "matrix": matrix,
        "trace": complex(np.trace(matrix)),
        "min_eigenvalue": float(eigenvalues[0]),
        "hermitian_violation": hermitian_violation(matrix),
    }


def cmd_build(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("build", vars_of(args))
    with report.phase("build"):
        m = build_random(
            args.sites, args.chi, args.seed, mode=args.mode, site_dim=args.site_dim,
            keep_parents=args.keep_parents,
        )
    with report.phase("validate"):
        validation = validate(m)
    with report.phase("save"):
        save(m, args.out)
    report.results = {
        "file": str(args.out),
        "n_layers": m.n_layers,
        "depth": m.depth,
        "chi_max": m.chi_max,
        "param_count": param_count(m).to_dict(),
    }
    report.check("max_constraint_violation", validation.max_violation, validation.tolerance)
    return report


def cmd_validate(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("validate", vars_of(args))
    with report.phase("load"):
        m = load(args.input)
    with report.phase("validate"):
        validation = validate(m, args.tol)
    report.results = {
        "n_sites": m.n_sites,
        "mode": m.mode.value,
        "param_count": param_count(m).to_dict(),
        "validation": validation.to_dict(),
    }
    report.check("max_constraint_violation", validation.max_violation, validation.tolerance)
    return report


def cmd_rdm(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("rdm", vars_of(args))
    m = load(args.input)
    with report.phase("rdm"):
        rho = rdm(m, args.sites, level=args.level, override=args.override, max_wires=config.max_cone_wires)
    summary = _matrix_summary(rho.matrix)
    report.results = {"sites": args.sites, "level": args.level, **summary}
    report.check("hermitian_violation", summary["hermitian_violation"], TOL_HERM)
    report.check("trace_deviation", abs(summary["trace"] - 1.0), TOL_TRACE)
    report.check("negative_eigenvalue", max(0.0, -summary["min_eigenvalue"]), TOL_PSD)
    return report


def cmd_expect(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("expect", vars_of(args))
    m = load(args.input)
    d = m.wire_dim(args.level)
    names = args.op.split(",")
    if len(names) == 1:
        names = names * len(args.sites)
    if len(names) != len(args.sites):
        raise ArgumentError(f"{len(names)} operators for {len(args.sites)} sites")
    matrix = np.array([[1.0]], dtype=np.complex128)
    for name in names:
        matrix = np.kron(matrix, named_operator(name, d))
    with report.phase("expect"):
        value = expect_local(m, LocalOperator(args.level, tuple(args.sites), matrix), override=args.override)
    report.results = {"value": value.value, "imag_residual": value.imag_residual, "hermitian": value.hermitian}
    if value.hermitian:
        report.check("imag_residual", value.imag_residual, 1e-10)
    if args.oracle:
        with report.phase("oracle"):
            psi = full_state(m, level=args.level, max_amplitudes=config.max_amplitudes)
            exact = oracle_expectation(psi, matrix, args.sites)
        report.results["oracle_value"] = exact
        report.check("oracle_deviation", abs(exact - value.value), 1e-10)
    return report


def cmd_correlate(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("correlate", vars_of(args))
    m = load(args.input)
    a = named_operator(args.op_a, m.site_dim)
    b = named_operator(args.op_b or args.op_a, m.site_dim)
    with report.phase("correlate"):
        value = correlator(m, a, b, args.s1, args.s2)
        mean_a = expect_local(m, LocalOperator(0, (args.s1,), a)).value
        mean_b = expect_local(m, LocalOperator(0, (args.s2,), b)).value
    report.results = {"value": value, "connected": value - mean_a * mean_b, "mean_a": mean_a, "mean_b": mean_b}
    if args.oracle:
        with report.phase("oracle"):
            exact = oracle_correlator(full_state(m, max_amplitudes=config.max_amplitudes), a, b, args.s1, args.s2)
        report.results["oracle_value"] = exact
        report.check("oracle_deviation", abs(exact - value), 1e-10)
    return report


def cmd_entropy(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("entropy", vars_of(args))
    m = load(args.input)
    with report.phase("entropy"):
        result = block_entropy(m, args.block, method=args.method, max_amplitudes=config.max_amplitudes)
    report.results = result.to_dict()
    report.check("entropy_minus_bound", result.entropy_bits - result.bound_bits, 0.0)
    return report


def cmd_hflow(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("hflow", vars_of(args))
    m = load(args.input)
    h0 = nearest_neighbor_terms(m.n_sites, bond_matrix(args.model, m.site_dim, args.field, args.seed))
    with report.phase("ascend"):
        flow = effective_hamiltonians(m, h0)
    with report.phase("expectations"):
        energies = [hamiltonian_expectation(m, h) for h in flow]
    report.results = {
        "levels": [
            {"level": h.level, "n_terms": len(h), "max_support": h.max_support, "energy": e}
            for h, e in zip(flow, energies, strict=True)
        ]
    }
    tolerance = FLOW_TOL_PER_TERM * len(h0)
    report.check("level_spread", max(energies) - min(energies), tolerance)
    if args.oracle:
        with report.phase("oracle"):
            psi = full_state(m, max_amplitudes=config.max_amplitudes)
            exact = sum(oracle_expectation(psi, t.matrix, t.support) for t in h0.terms).real
        report.results["oracle_energy"] = exact
        report.check("oracle_deviation", max(abs(e - exact) for e in energies), tolerance)
    return report


def cmd_scaling(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("scaling", vars_of(args))
    m = load(args.input)
    a = named_operator(args.op, m.site_dim)
    b = named_operator(args.op_b or args.op, m.site_dim)
    with report.phase("fit"):
        fit = correlation_exponent(
            m, a, b, args.distances, site=args.site,
            project_traceless=not args.keep_trace, connected=not args.raw,
        )
    report.results = fit.to_dict()
    report.tolerances["relative_deviation"] = EXPONENT_REL_TOL
    if fit.flagged:
        report.results["status"] = "flagged"
        report.passed = True
    else:
        ok = report.check("relative_deviation", fit.relative_deviation, EXPONENT_REL_TOL)
        report.results["status"] = "pass" if ok else "fail"
    return report


def cmd_check(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("check", vars_of(args))
    m = load(args.input)
    with report.phase("validate"):
        validation = validate(m)
    report.check("max_constraint_violation", validation.max_violation, validation.tolerance)
    if args.oracle:
        with report.phase("oracle"):
            results = run_oracle_suite(
                m, args.seeds, base_seed=args.seed, threads=config.threads,
                max_amplitudes=config.max_amplitudes,
            )
        report.results["instances"] = [r.to_dict() for r in results]
        report.check("max_rdm_deviation", max(r.max_rdm_deviation for r in results), 1e-10)
        report.check("max_correlator_deviation", max(r.max_correlator_deviation for r in results), 1e-10)
        report.check(
            "max_flow_deviation_per_term",
            max(r.max_flow_deviation / r.n_terms for r in results),
            FLOW_TOL_PER_TERM,
        )
    return report


def cmd_bench(args: argparse.Namespace, config: MeraKitConfig) -> RunReport:
    report = RunReport("bench", vars_of(args))
    with report.phase("bench"):
        report.results = run_bench(args.sizes, args.chi, seed=args.seed, repeats=args.repeats, mode=args.mode)
    # timings depend on the machine; no pass/fail
    return report


def vars_of(args: argparse.Namespace) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "handler"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mera-kit",
        description="MERA toolkit - build networks, measure local observables, check against a state vector",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  mera-kit build --sites 16 --chi 2 --seed 7 --mode scale_invariant --out m.json
  mera-kit validate --in m.json
  mera-kit check --in m.json --oracle --seeds 5
  mera-kit scaling --in m.json --op pauli-z --distances 2,4,8,16
        """.strip(),
    )
    parser.add_argument("--version", action="version", version=f"mera-kit v{get_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    modes = [mode.value for mode in MeraMode]

    def command(name: str, handler: Handler, help_text: str, needs_input: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        if needs_input:
            p.add_argument("--in", dest="input", type=Path, required=True, help="network file")
            p.add_argument("--out", type=Path, help="report file (default: stdout)")
        return p

    p = command("build", cmd_build, "build a random network", needs_input=False)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--chi", type=_chi, required=True, help="bond dimension, or one per layer: 2,3,3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=modes, default=MeraMode.GENERIC.value)
    p.add_argument("--site-dim", type=int)
    p.add_argument("--keep-parents", action="store_true", help="store parent unitaries of w and t")
    p.add_argument("--out", type=Path, required=True, help="network file to write")

    p = command("validate", cmd_validate, "check every tensor constraint")
    p.add_argument("--tol", type=float, default=1e-10)

    p = command("rdm", cmd_rdm, "reduced density matrix from the causal cone")
    p.add_argument("--sites", type=_int_list, required=True)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--override", action="store_true", help="lift the site-count and cone guards")

    p = command("expect", cmd_expect, "expectation value of a local operator")
    p.add_argument("--sites", type=_int_list, required=True)
    p.add_argument("--op", required=True, help=f"operator name or one per site; names: {', '.join(OPERATOR_NAMES)}")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--override", action="store_true")
    p.add_argument("--oracle", action="store_true", help="compare with the state vector")

    p = command("correlate", cmd_correlate, "two-site correlator")
    p.add_argument("--s1", type=int, required=True)
    p.add_argument("--s2", type=int, required=True)
    p.add_argument("--op-a", default="pauli-z")
    p.add_argument("--op-b")
    p.add_argument("--oracle", action="store_true")

    p = command("entropy", cmd_entropy, "block entropy and its logarithmic bound")
    p.add_argument("--block", type=_int_list, required=True)
    p.add_argument("--method", choices=["cone", "oracle", "guard"], default="guard")

    p = command("hflow", cmd_hflow, "effective Hamiltonians along the coarse-graining flow")
    p.add_argument("--model", choices=["heisenberg", "ising", "random"], default="heisenberg")
    p.add_argument("--field", type=float, default=1.0, help="transverse field of the Ising model")
    p.add_argument("--seed", type=int, default=0, help="seed of the random model")
    p.add_argument("--oracle", action="store_true")

    p = command("scaling", cmd_scaling, "correlation exponent of a scale-invariant network")
    p.add_argument("--op", default="pauli-z")
    p.add_argument("--op-b")
    p.add_argument("--distances", type=_int_list, required=True)
    p.add_argument("--site", type=int, default=0)
    p.add_argument("--keep-trace", action="store_true", help="do not project operators to traceless parts")
    p.add_argument("--raw", action="store_true", help="fit the full correlator instead of the connected one")

    p = command("check", cmd_check, "validate and cross-check against the state vector")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--seeds", type=int, default=5, help="number of random networks of the same structure")
    p.add_argument("--seed", type=int, default=0, help="first seed")

    p = command("bench", cmd_bench, "one-site RDM runtime against log2 N", needs_input=False)
    p.add_argument("--chi", type=int, default=2)
    p.add_argument("--sizes", type=_int_list, default=[64, 256, 1024, 4096, 16384])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=modes, default=MeraMode.TRANSLATION_INVARIANT.value)
    p.add_argument("--out", type=Path, help="report file (default: stdout)")
    return parser


def _summary(report: RunReport) -> str:
    if report.passed is None:
        return f"{report.command} finished"
    failed = [name for name, c in report.results.get("checks", {}).items() if not c["pass"]]
    if report.passed:
        return f"✅ {report.command}: all checks passed"
    return f"❌ {report.command}: failed {', '.join(failed)}"


def run(argv: Sequence[str] | None = None) -> int:
    """Run one command and return the exit code (0 pass, 1 failed check or error, 2 usage)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        config = get_config()
        config.validate()
    except MeraKitError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2

    setup_logging(config.get_log_level(), config.log_file)
    logger = get_logger()
    logger.debug(f"Configuration: {config}")

    try:
        report = args.handler(args, config)
    except KeyboardInterrupt:
        logger.warning("🛑 Interrupted by user")
        return 130
    except MeraKitError as e:
        logger.error(f"❌ {args.command}: {e}")
        if isinstance(e, UsageErrorMixin):
            parser.print_usage(sys.stderr)
            return 2
        return 1
    except Exception as e:
        logger.critical(f"Unhandled exception in {args.command}: {e}", exc_info=True)
        return 1

    write_document(report.to_document(), None if args.command == "build" else args.out)
    logger.info(_summary(report))
    return 1 if report.passed is False else 0


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
