"""Batch driver: run a factoring job or a static count report.

Reports are JSON documents with a fixed key order; the wall time lives in
a single ``wall_time_s`` key so golden comparisons can mask it.  Exit
codes: 0 success, 2 invalid configuration, 3 resource exhaustion.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

from . import partition, shor
from .circuit import count_gates, dump
from .netsim import ResourceLedger
from .qstate import RandomSource
from .revarith import RegisterLayout, build_cm_m, gate_count_formula
from .qft import FourierSpec, build_inverse_qft

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_EXHAUSTED = 3


@dataclass
class RunConfig:
    N: int
    a: int | None = None
    m: int | None = None
    mode: str = shor.MONOLITHIC
    seed: int = 0
    max_rounds: int | None = None
    report_path: str | None = None
    dump_path: str | None = None
    counts_only: bool = False

    def validate(self) -> str | None:
        if self.N < 3 or self.N % 2 == 0:
            return "N must be odd and at least 3"
        if self.a is not None:
            if not 1 < self.a < self.N:
                return "base must lie strictly between 1 and N"
            if math.gcd(self.a, self.N) != 1:
                return "base shares a factor with N"
        if self.mode not in (shor.MONOLITHIC, shor.DISTRIBUTED):
            return f"unknown mode {self.mode!r}"
        if self.m is not None and self.m < 1:
            return "m must be positive"
        return None

    @property
    def n(self) -> int:
        return self.N.bit_length()

    @property
    def m_effective(self) -> int:
        return self.m if self.m is not None else 2 * self.n


def _config_dict(config: RunConfig) -> dict:
    return {
        "N": config.N,
        "a": config.a,
        "m": config.m_effective,
        "mode": config.mode,
        "seed": config.seed,
        "max_rounds": config.max_rounds,
    }


def _counts_section(config: RunConfig) -> dict:
    """Static analysis: measured gate counts of the built circuits next to
    the closed-form predictions, plus the communication rollup."""
    n, m = config.n, config.m_effective
    a = config.a if config.a is not None else _default_base(config.N)
    layout = RegisterLayout.packed(n, m)

    measured: dict[str, int] = {}
    from .revarith import (build_adder, build_an, build_fa, build_ha,
                           build_m, build_mf, build_xan)
    plain = list(range(n))
    chain = list(range(n, 2 * n))
    measured["FA"] = count_gates(
        build_fa(0, plain, chain, 2 * n)).total
    measured["HA"] = count_gates(build_ha(0, plain, chain)).total
    measured["AN"] = count_gates(build_an(a % config.N, config.N,
                                          layout)).total
    measured["XAN"] = count_gates(build_xan(a % config.N, config.N,
                                            layout)).total
    measured["A"] = count_gates(build_adder(a % config.N, config.N,
                                            layout)).total
    measured["MF"] = count_gates(build_mf(a, config.N, layout)).total
    measured["M"] = count_gates(build_m(a, config.N, layout)).total
    measured["c_m(M)"] = count_gates(build_cm_m(a, config.N, m,
                                                layout)).total
    measured["QFT_inv"] = count_gates(
        build_inverse_qft(FourierSpec(m), list(range(m)))).total

    predicted = {lvl: gate_count_formula(lvl, n, m)
                 for lvl in ("FA", "HA", "AN", "XAN", "A", "MF", "M",
                             "c_m(M)", "QFT_inv")}
    # the transform prediction excludes its swap network
    deltas = {lvl: measured[lvl] - predicted[lvl] for lvl in predicted}

    plan = partition.plan_placement(n, m)
    program = partition.build_distributed_order_program(a, config.N, plan)
    census = partition.census_from_program(program, plan)
    nlt = partition.count_nl_t(census, n, m)
    return {
        "G_measured": measured,
        "G_closed_form": predicted,
        "G_delta": deltas,
        "NL_T": nlt.as_dict(),
        "predictions": {
            "NL(AN)": 8,
            "NL(c_m(M))": 44 * m * n,
            "T(SHOR)": 12 * m * n,
            "G(c_m(M))": gate_count_formula("c_m(M)", n, m),
            "qubits_monolithic": 5 * n + m + 1,
            "qubits_distributed": 7 * n + 1 if m == 2 * n else 5 * n + m + 1,
            "nodes": 7,
            "node_capacity": plan.capacity,
        },
    }


def report_counts(config: RunConfig) -> tuple[int, dict]:
    """Static count report only, no quantum execution."""
    counts_config = RunConfig(
        N=config.N, a=config.a, m=config.m, mode=config.mode,
        seed=config.seed, counts_only=True)
    return run(counts_config)


def _default_base(N: int) -> int:
    for cand in range(2, N):
        if math.gcd(cand, N) == 1:
            return cand
    raise ValueError("no coprime base exists")


def run(config: RunConfig) -> tuple[int, dict]:
    """Execute one factoring job and build its report."""
    started = time.perf_counter()
    error = config.validate()
    if error is None and not config.counts_only:
        error = shor.classical_rejection(config.N)
    if error is not None:
        report = {"config": _config_dict(config), "error": error}
        return EXIT_BAD_CONFIG, report

    report: dict = {"config": _config_dict(config)}
    status = EXIT_OK
    if config.counts_only:
        report["counts"] = _counts_section(config)
    else:
        rng = RandomSource(config.seed)
        outcome = shor.factor(config.N, rng, a=config.a, m=config.m,
                              mode=config.mode,
                              max_rounds=config.max_rounds)
        rounds = []
        ledger = ResourceLedger()
        for order in outcome.order_results:
            for rnd in order.transcript:
                rounds.append({"a": order.a, "j": rnd.j,
                               "candidates": rnd.candidates,
                               "r_found": rnd.r_found})
            if order.ledger is not None:
                ledger.merge(order.ledger)
        report["outcome"] = (
            {"factors": sorted(outcome.factors)} if outcome.factors
            else {"failure": outcome.failure})
        report["rounds"] = rounds
        report["ledger"] = ledger.as_dict()
        report["counts"] = _counts_section(config)
        if outcome.factors is None:
            status = EXIT_EXHAUSTED
    report["wall_time_s"] = round(time.perf_counter() - started, 3)
    return status, report


def _write_dump(config: RunConfig):
    a = config.a if config.a is not None else _default_base(config.N)
    layout = RegisterLayout.packed(config.n, config.m_effective)
    circ = build_cm_m(a, config.N, config.m_effective, layout)
    with open(config.dump_path, "w") as fh:
        fh.write(dump(circ))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="distshor",
        description="Factor an odd composite on a simulated quantum "
                    "network and account for every entangled pair and "
                    "classical bit.")
    parser.add_argument("--N", type=int, required=True,
                        help="odd composite to factor")
    parser.add_argument("--a", type=int, default=None,
                        help="fixed base (default: random per attempt)")
    parser.add_argument("--m", type=int, default=None,
                        help="estimation register width (default 2n)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", choices=[shor.MONOLITHIC,
                                           shor.DISTRIBUTED],
                        default=shor.MONOLITHIC)
    parser.add_argument("--max-rounds", type=int, default=None)
    parser.add_argument("--report", default=None, metavar="PATH",
                        help="write the JSON report here (default stdout)")
    parser.add_argument("--dump-circuit", default=None, metavar="PATH",
                        help="write the power-ladder circuit text here")
    parser.add_argument("--counts-only", action="store_true",
                        help="static gate/communication analysis, no "
                             "quantum execution")
    args = parser.parse_args(argv)

    config = RunConfig(N=args.N, a=args.a, m=args.m, mode=args.mode,
                       seed=args.seed, max_rounds=args.max_rounds,
                       report_path=args.report,
                       dump_path=args.dump_circuit,
                       counts_only=args.counts_only)
    status, report = run(config)
    text = json.dumps(report, indent=2)
    if config.report_path:
        with open(config.report_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if status == EXIT_BAD_CONFIG:
        print(f"error: {report['error']}", file=sys.stderr)
    if config.dump_path and status == EXIT_OK:
        _write_dump(config)
    return status


if __name__ == "__main__":
    sys.exit(main())
