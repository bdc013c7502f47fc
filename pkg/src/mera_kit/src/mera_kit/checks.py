"""Oracle cross-checks and the log-N runtime sweep used by the command-line tool."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .cone import ConeSlice, correlator, cone_of, descend_step, rdm, top_density
from .config import DEFAULT_MAX_AMPLITUDES
from .logger import get_logger
from .mera import Mera, MeraMode, build_random, validate
from .operators import random_hermitian, random_terms, traceless
from .oracle import full_state, oracle_correlator, oracle_rdm
from .renorm import effective_hamiltonians, hamiltonian_expectation
from .tensor_core import max_abs, partial_trace

RDM_TOL = 1e-10
CORRELATOR_TOL = 1e-10
FLOW_TOL_PER_TERM = 1e-9


@dataclass
class InstanceCheck:
    label: str
    max_rdm_deviation: float
    max_correlator_deviation: float
    max_flow_deviation: float
    n_terms: int
    max_constraint_violation: float

    @property
    def passed(self) -> bool:
        return (
            self.max_rdm_deviation <= RDM_TOL
            and self.max_correlator_deviation <= CORRELATOR_TOL
            and self.max_flow_deviation <= FLOW_TOL_PER_TERM * self.n_terms
        )

    def to_dict(self) -> dict[str, Any]:
        return {**vars(self), "pass": self.passed}


def site_sets(n_sites: int) -> list[list[int]]:
    """Every single site, every adjacent pair and one pair half the system apart."""
    singles = [[s] for s in range(n_sites)]
    adjacent = [[s, (s + 1) % n_sites] for s in range(n_sites)]
    return singles + adjacent + [[0, n_sites // 2]]


def check_instance(
    m: Mera, label: str, seed: int = 0, max_amplitudes: int = DEFAULT_MAX_AMPLITUDES
) -> InstanceCheck:
    """Compare cone RDMs, correlators and the Hamiltonian flow of ``m`` against its state vector."""
    psi = full_state(m, max_amplitudes=max_amplitudes)
    n = m.n_sites

    rdm_dev = 0.0
    for sites in site_sets(n):
        rdm_dev = max(rdm_dev, max_abs(rdm(m, sites).matrix - oracle_rdm(psi, sites).matrix))

    op = traceless(random_hermitian(m.site_dim, seed))
    corr_dev = 0.0
    for s1, s2 in [p for p in site_sets(n) if len(p) == 2]:
        corr_dev = max(corr_dev, abs(correlator(m, op, op, s1, s2) - oracle_correlator(psi, op, op, s1, s2)))

    h0 = random_terms(n, m.site_dim, seed)
    reference = sum(oracle_rdm(psi, t.support).expectation(t.matrix) for t in h0.terms).real
    flow_dev = max(abs(hamiltonian_expectation(m, h) - reference) for h in effective_hamiltonians(m, h0))

    return InstanceCheck(
        label=label,
        max_rdm_deviation=rdm_dev,
        max_correlator_deviation=corr_dev,
        max_flow_deviation=flow_dev,
        n_terms=len(h0),
        max_constraint_violation=validate(m).max_violation,
    )


def rebuild_like(m: Mera, seed: int) -> Mera:
    """Random network with the same size, dimensions and mode as ``m``."""
    chis = [layer.chi_out for layer in m.layers]
    return build_random(m.n_sites, chis, seed, mode=m.mode, site_dim=m.site_dim)


def run_oracle_suite(
    m: Mera, n_seeds: int, base_seed: int = 0, threads: int = 1,
    max_amplitudes: int = DEFAULT_MAX_AMPLITUDES,
) -> list[InstanceCheck]:
    """Check ``m`` itself plus ``n_seeds`` random networks of the same structure.

    Results come back in seed order whatever order the workers finish in.
    """
    jobs = [(m, "input", base_seed)]
    jobs += [(rebuild_like(m, base_seed + i), f"seed={base_seed + i}", base_seed + i) for i in range(n_seeds)]
    logger = get_logger()
    logger.debug(f"Running {len(jobs)} oracle checks on {threads} threads")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(check_instance, net, label, seed, max_amplitudes) for net, label, seed in jobs]
        results = [future.result() for future in futures]
    for result in results:
        marker = "✅" if result.passed else "❌"
        logger.debug(f"{marker} {result.label}: rdm {result.max_rdm_deviation:.2e}")
    return results


def timed_rdm(m: Mera, site: int = 0) -> tuple[float, list[float]]:
    """One-site RDM by explicit descent; returns total seconds and seconds per descend step."""
    start = time.perf_counter()
    slices = cone_of(m, [site])
    top_wires = slices[-1].wires
    current = ConeSlice(m.n_layers, top_wires, partial_trace(top_density(m), top_wires))
    steps = []
    for causal in reversed(slices[:-1]):
        t0 = time.perf_counter()
        current = descend_step(current, m.layers[causal.level], causal.wires)
        steps.append(time.perf_counter() - t0)
    return time.perf_counter() - start, steps


def run_bench(
    sizes: list[int], chi: int, seed: int = 0, repeats: int = 5,
    mode: MeraMode | str = MeraMode.TRANSLATION_INVARIANT,
) -> dict[str, Any]:
    """Best-of-``repeats`` one-site RDM time per N and an affine fit against log₂N."""
    points = []
    for n_sites in sizes:
        m = build_random(n_sites, chi, seed, mode=mode)
        runs = [timed_rdm(m) for _ in range(max(1, repeats))]
        best_total, best_steps = min(runs, key=lambda run: run[0])
        points.append(
            {
                "n_sites": n_sites,
                "seconds": best_total,
                "mean_step_seconds": float(np.mean(best_steps)),
                "layers": m.n_layers,
            }
        )
        get_logger().debug(f"bench N={n_sites}: {best_total * 1e3:.3f} ms")

    result: dict[str, Any] = {"points": points}
    if len(points) >= 2:
        x = np.log2([p["n_sites"] for p in points])
        t = np.array([p["seconds"] for p in points])
        slope, intercept = np.polyfit(x, t, 1)
        fitted = slope * x + intercept
        residuals = np.abs(t - fitted) / np.abs(fitted)
        steps = [p["mean_step_seconds"] for p in points]
        result["fit"] = {
            "intercept": float(intercept),
            "slope_per_log2n": float(slope),
            "relative_residuals": residuals.tolist(),
            "max_relative_residual": float(residuals.max()),
        }
        result["step_time_ratio"] = float(max(steps) / min(steps))
    return result
