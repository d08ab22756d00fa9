"""Adaptive RR-sampling engine with a certified stopping rule.

The engine draws two independent RR collections of equal size, selects seeds
greedily on the first, and brackets the result: an upper bound on the best
achievable spread from the first collection, a lower bound on the selected
spread from the second. It stops as soon as the bracket certifies the target
ratio 1/2 - epsilon, doubling both collections otherwise, up to a worst-case
sample size that guarantees the ratio even without an early stop.

Variants: "rr-opim-plus" (round-robin greedy + tightened coverage upper
bound), "rr-opim" (round-robin greedy + the plain doubled-coverage bound),
and "mg-opim" (global greedy + the plain bound).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Instance, SeedAssignment
from .rrsets import RRCollection, RRMemoryBudgetExceeded
from .seeding import NS_CHI, NS_RR1, NS_RR2, child_seed, substream
from .selectors import CoverageGainOracle, mg_greedy, rr_greedy

VARIANTS = ("rr-opim-plus", "rr-opim", "mg-opim")


@dataclass
class OpimParams:
    epsilon: float = 0.1
    delta: float = 0.01
    variant: str = "rr-opim-plus"
    seed: int = 0
    max_rr_per_collection: int | None = None
    member_budget_bytes: int | None = None
    chi_draws: int = 1  # best-of-t random assignments for the chi lower bound

    def validate(self) -> None:
        if not (0.0 < self.epsilon < 0.5):
            raise ValueError("epsilon must lie in (0, 1/2)")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.chi_draws < 1:
            raise ValueError("chi_draws must be >= 1")


@dataclass
class IterationRecord:
    i: int
    theta1: int
    theta2: int
    lambda1: int
    lambda_upper: int
    sigma_upper: float
    sigma_lower: float
    ratio: float


@dataclass
class BoundReport:
    n_p: int
    chi: int
    theta_max: int
    theta0: int
    i_max: int
    p_f: float
    variant: str
    iterations: list[IterationRecord] = field(default_factory=list)
    stop_reason: str = "empty-problem"
    guaranteed: bool = False

    @property
    def achieved_ratio(self) -> float | None:
        return self.iterations[-1].ratio if self.iterations else None

    @property
    def total_rr_sets(self) -> int:
        if not self.iterations:
            return 0
        last = self.iterations[-1]
        return last.theta1 + last.theta2

    def to_json_lines(self, **context) -> str:
        lines = []
        for rec in self.iterations:
            row = dict(context)
            row.update(vars(rec))
            row.update(chi=self.chi, theta_max=self.theta_max, i_max=self.i_max,
                       p_f=self.p_f, variant=self.variant,
                       stop_reason=self.stop_reason, guaranteed=self.guaranteed)
            lines.append(json.dumps(row, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


def random_feasible_assignment(inst: Instance, rng: np.random.Generator,
                               ) -> tuple[SeedAssignment, int]:
    """A random matroid-feasible assignment maximizing distinct seeds.

    Visits the distinct candidate PPs in uniformly random order and hands
    each to a uniformly random AP friend that still has capacity, skipping
    PPs whose AP friends are all full. Every assigned seed is distinct, so
    chi (the count) is a lower bound on the optimal spread.
    """
    sa = SeedAssignment()
    if inst.k == 0:
        return sa, 0
    aps_of: dict[int, list[int]] = {}
    for u in inst.ap_list:
        for v in inst.candidates[u]:
            aps_of.setdefault(v, []).append(u)
    nodes = sorted(aps_of)
    order = rng.permutation(len(nodes))
    taken = {u: 0 for u in inst.ap_list}
    chi = 0
    for idx in order:
        v = nodes[int(idx)]
        avail = [u for u in aps_of[v] if taken[u] < inst.k]
        if not avail:
            continue
        u = avail[int(rng.integers(len(avail)))]
        sa.add(u, v)
        taken[u] += 1
        chi += 1
    return sa, chi


@dataclass(frozen=True)
class ThetaPlan:
    theta_max: int
    theta0: int
    i_max: int
    log_binom_sum: float


def log_feasible_assignments(inst: Instance) -> float:
    """ln of the number of full feasible assignments, as a sum of
    log-binomials (the product itself would overflow on real graphs)."""
    acc = np.longdouble(0.0)
    for u in inst.ap_list:
        c = len(inst.candidates[u])
        take = min(inst.k, c)
        acc += (math.lgamma(c + 1) - math.lgamma(take + 1) - math.lgamma(c - take + 1))
    return float(acc)


def theta_max_plan(inst: Instance, epsilon: float, delta: float, chi: int) -> ThetaPlan:
    """Worst-case sample size, initial size, and doubling count.

    theta0 = ceil(eps^2 / n_p * theta_max); i_max comes from the algebraic
    ratio theta_max/theta0 = n_p/eps^2 before any integer rounding, avoiding
    an off-by-one from stacking two ceilings.
    """
    if chi < 1:
        raise ValueError("chi must be >= 1 (empty problems are handled upstream)")
    n_p = inst.pp.n
    log_binom = log_feasible_assignments(inst)
    ln6d = math.log(6.0 / delta)
    inner = 0.5 * math.sqrt(ln6d) + math.sqrt(0.5 * (log_binom + ln6d))
    theta_max = math.ceil(2.0 * n_p * inner * inner / (epsilon * epsilon * chi))
    theta0 = math.ceil(epsilon * epsilon / n_p * theta_max)
    i_max = math.ceil(math.log2(n_p / (epsilon * epsilon)))
    return ThetaPlan(theta_max=int(theta_max), theta0=int(theta0),
                     i_max=max(1, int(i_max)), log_binom_sum=log_binom)


def sigma_upper(coverage_upper: float, theta1: int, n_p: int, p_f: float) -> float:
    """Spread upper bound from a coverage upper bound on theta1 RR sets."""
    if not (0.0 < p_f < 1.0):
        raise ValueError("p_f must lie in (0, 1)")
    if theta1 < 1:
        raise ValueError("theta1 must be >= 1")
    half_log = math.log(1.0 / p_f) / 2.0
    root = math.sqrt(coverage_upper + half_log) + math.sqrt(half_log)
    return root * root * n_p / theta1


def sigma_lower(lambda2: float, theta2: int, n_p: int, p_f: float) -> float:
    """Spread lower bound from the observed coverage on theta2 RR sets."""
    if not (0.0 < p_f < 1.0):
        raise ValueError("p_f must lie in (0, 1)")
    if theta2 < 1:
        raise ValueError("theta2 must be >= 1")
    if lambda2 <= 0:
        return 0.0  # the expression is identically zero at zero coverage
    log_term = math.log(1.0 / p_f)
    root = math.sqrt(lambda2 + 2.0 * log_term / 9.0) - math.sqrt(log_term / 2.0)
    value = (root * root - log_term / 18.0) * n_p / theta2
    return max(0.0, value)


def tightened_coverage_upper(coll: RRCollection, inst: Instance,
                             sa: SeedAssignment) -> int:
    """Coverage upper bound for the (unknown) optimal assignment.

    For each greedy prefix S^t (the first t selections of every AP,
    t = 0..k-1), the optimum's coverage is at most the prefix coverage plus,
    per AP, the k largest marginal coverages over its candidates. The bound
    returned is the minimum over all prefixes and over twice the coverage of
    the full selection, whichever is smallest.
    """
    full_nodes = sa.distinct_seeds()
    best = 2 * coll.coverage(full_nodes)
    coll.reset_coverage()
    committed: set[int] = set()
    for t in range(inst.k):
        phi = coll.covered_count
        for u in inst.ap_list:
            cand = inst.candidates[u]
            if not cand:
                continue
            gains = sorted((coll.peek_marginal(v) for v in cand), reverse=True)
            phi += sum(gains[:inst.k])
        best = min(best, phi)
        # Advance the prefix to S^{t+1}: commit round-t picks of every AP.
        for u, seeds in sa.lists.items():
            if t < len(seeds) and seeds[t] not in committed:
                committed.add(seeds[t])
                coll.commit(seeds[t])
    return best


def run(inst: Instance, model: str, params: OpimParams,
        ) -> tuple[SeedAssignment, BoundReport]:
    """Full adaptive run; returns the selection and its bound report.

    Stop reasons: "early" (certified ratio), "exhausted-i_max" (worst-case
    samples reached; still guaranteed), "budget-exceeded" (sample cap hit;
    result flagged non-guaranteed), "empty-problem".
    """
    params.validate()
    n_p = inst.pp.n
    if inst.candidate_edge_count == 0 or inst.k == 0:
        report = BoundReport(n_p=n_p, chi=0, theta_max=0, theta0=0, i_max=0,
                             p_f=0.0, variant=params.variant,
                             stop_reason="empty-problem", guaranteed=False)
        return SeedAssignment(), report

    chi_rng = substream(params.seed, NS_CHI)
    chi = 0
    for _ in range(params.chi_draws):
        _, drawn = random_feasible_assignment(inst, chi_rng)
        chi = max(chi, drawn)
    plan = theta_max_plan(inst, params.epsilon, params.delta, chi)
    p_f = params.delta / (3.0 * plan.i_max)

    r1 = RRCollection(inst.pp, model, child_seed(params.seed, NS_RR1),
                      member_budget_bytes=params.member_budget_bytes)
    r2 = RRCollection(inst.pp, model, child_seed(params.seed, NS_RR2),
                      member_budget_bytes=params.member_budget_bytes)
    report = BoundReport(n_p=n_p, chi=chi, theta_max=plan.theta_max,
                         theta0=plan.theta0, i_max=plan.i_max, p_f=p_f,
                         variant=params.variant)
    try:
        r1.extend(plan.theta0)
        r2.extend(plan.theta0)
    except RRMemoryBudgetExceeded:
        report.stop_reason = "budget-exceeded"
        return SeedAssignment(), report

    select = mg_greedy if params.variant == "mg-opim" else rr_greedy
    target = 0.5 - params.epsilon
    sa = SeedAssignment()
    for i in range(1, plan.i_max + 1):
        sa = select(inst, CoverageGainOracle(r1))
        lam1 = r1.coverage(sa.distinct_seeds())
        if params.variant == "rr-opim-plus":
            lam_u = tightened_coverage_upper(r1, inst, sa)
        else:
            lam_u = 2 * lam1
        sig_u = sigma_upper(lam_u, r1.theta, n_p, p_f)
        lam2 = r2.coverage(sa.distinct_seeds())
        sig_l = sigma_lower(lam2, r2.theta, n_p, p_f)
        ratio = sig_l / sig_u if sig_u > 0 else 0.0
        report.iterations.append(IterationRecord(
            i=i, theta1=r1.theta, theta2=r2.theta, lambda1=lam1,
            lambda_upper=lam_u, sigma_upper=sig_u, sigma_lower=sig_l, ratio=ratio))
        if ratio >= target:
            report.stop_reason = "early"
            report.guaranteed = True
            return sa, report
        if i == plan.i_max:
            report.stop_reason = "exhausted-i_max"
            report.guaranteed = True
            return sa, report
        if (params.max_rr_per_collection is not None
                and 2 * r1.theta > params.max_rr_per_collection):
            report.stop_reason = "budget-exceeded"
            return sa, report
        try:
            r1.extend(r1.theta)
            r2.extend(r2.theta)
        except RRMemoryBudgetExceeded:
            report.stop_reason = "budget-exceeded"
            return sa, report
    return sa, report  # not reached; loop always exits via a stop reason
