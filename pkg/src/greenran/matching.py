"""UE association and BS sleeping via many-to-many swap matching.

A matching is the binary serving matrix under the per-UE cap L and per-BS cap
N; BSs with no UE sleep. Starting from a received-power initialization, the
swap phase repeatedly scans candidate moves (pair exchanges plus single-UE
add/remove/replace through empty slots) and commits every move that all
affected players weakly prefer with one strict improvement. Because every
player shares the network-wide objective, a move is approved exactly when it
keeps QoS satisfied and strictly raises EE; from a QoS-violating state the
preference is lexicographic (total rate shortfall first, EE second) so the
scan can climb back into the feasible region. Termination follows from strict
lexicographic improvement over a finite matching space.

Power inside the scan comes from one of the controllers (slmdb, fipc, qopc,
eipc); any heuristic mode gets a final slmdb refinement once the matching has
converged.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .netmodel import ConfigError, CorrelationSet, FrameConfig, ScenarioParams
from .powerctl import (PowerSolution, QosSpec, SolveDiagnostics, SolverSettings,
                       eipc, fipc, qopc_solve, slmdb_solve)
from .powermodel import (AffinePowerForm, BsPowerConfig, SystemPowerParams,
                         build_affine_form)
from .rates import Association, link_coefficients, rates_from_coeffs
from .statistics import CoefficientTensor

POWER_MODES = ("slmdb", "fipc", "qopc", "eipc")


@dataclass
class EvaluationContext:
    """Everything needed to score a matching, plus the per-mode result cache."""
    scenario: ScenarioParams
    frame: FrameConfig
    corr: CorrelationSet
    tensor: CoefficientTensor
    bs_config: BsPowerConfig
    system: SystemPowerParams
    qos: QosSpec
    settings: SolverSettings
    no_sleep: bool = False
    _cache: dict = field(default_factory=dict, repr=False)
    _forms: dict = field(default_factory=dict, repr=False)

    def clone(self, **overrides) -> "EvaluationContext":
        kw = dict(scenario=self.scenario, frame=self.frame, corr=self.corr,
                  tensor=self.tensor, bs_config=self.bs_config, system=self.system,
                  qos=self.qos, settings=self.settings, no_sleep=self.no_sleep)
        kw.update(overrides)
        return EvaluationContext(**kw)

    def form_for(self, assoc: Association) -> AffinePowerForm:
        n_active = self.scenario.M if self.no_sleep else assoc.active_count
        if n_active not in self._forms:
            self._forms[n_active] = build_affine_form(
                assoc, self.bs_config, self.system, M=self.scenario.M,
                n_active=n_active)
        return self._forms[n_active]


@dataclass(frozen=True)
class EvalResult:
    ee: float
    qos_ok: bool
    shortfall_bps: float         # sum of per-UE rate deficits (0 exactly iff qos_ok)
    power: PowerSolution


@dataclass(frozen=True)
class SwapMove:
    """Candidate matching mutation; None marks an empty slot.

    exchange: both UEs swap the named serving BSs.
    add/remove/replace: single-UE moves through the empty-slot cases.
    """
    kind: str
    ue_i: int
    bs_m: int | None = None      # BS leaving S(ue_i)
    ue_j: int | None = None
    bs_n: int | None = None      # BS entering S(ue_i)


@dataclass(frozen=True)
class PreferenceOutcome:
    ee_before: float
    ee_after: float
    qos_ok_before: bool
    qos_ok_after: bool
    approved: bool


@dataclass(frozen=True)
class SolutionReport:
    matching: Association
    power: PowerSolution
    ee: float
    swap_count: int
    evaluation_count: int
    stable: bool
    infeasible: bool


# ---------------------------------------------------------------------------
# Association rules
# ---------------------------------------------------------------------------

def recp_init(corr: CorrelationSet, scenario: ScenarioParams,
              delta_percent: float) -> Association:
    """Received-power prefix selection.

    Per UE (index order): BSs sorted by descending gain; the minimal prefix
    whose cumulative gain reaches delta% of the UE's total is kept, truncated
    to L. BSs already serving N UEs are unavailable.
    """
    if not 0 < delta_percent <= 100:
        raise ConfigError("delta_percent must lie in (0, 100]")
    beta = corr.beta
    M, K = beta.shape
    S = np.zeros((M, K), dtype=bool)
    bs_load = np.zeros(M, dtype=int)
    for k in range(K):
        target = delta_percent / 100.0 * beta[:, k].sum()
        order = np.lexsort((np.arange(M), -beta[:, k]))
        cum = 0.0
        taken = 0
        for m in order:
            if bs_load[m] >= scenario.N:
                continue
            S[m, k] = True
            bs_load[m] += 1
            cum += beta[m, k]
            taken += 1
            if cum >= target * (1 - 1e-12) or taken >= scenario.L:
                break
    return Association(S=S, max_per_ue=scenario.L, max_per_bs=scenario.N)


def llsf_assoc(corr: CorrelationSet, scenario: ScenarioParams) -> Association:
    """Single strongest-gain BS per UE, ties to the lowest index."""
    beta = corr.beta
    M, K = beta.shape
    S = np.zeros((M, K), dtype=bool)
    bs_load = np.zeros(M, dtype=int)
    for k in range(K):
        for m in np.lexsort((np.arange(M), -beta[:, k])):
            if bs_load[m] < scenario.N:
                S[m, k] = True
                bs_load[m] += 1
                break
    return Association(S=S, max_per_ue=scenario.L, max_per_bs=scenario.N)


def tsap_assoc(corr: CorrelationSet, scenario: ScenarioParams) -> Association:
    """Neighborhood selection: every BS within 30% of the UE's best gain
    (inclusive), strongest L kept, capacity respected."""
    beta = corr.beta
    M, K = beta.shape
    S = np.zeros((M, K), dtype=bool)
    bs_load = np.zeros(M, dtype=int)
    for k in range(K):
        thresh = 0.3 * beta[:, k].max()
        taken = 0
        for m in np.lexsort((np.arange(M), -beta[:, k])):
            if beta[m, k] < thresh or taken >= scenario.L:
                break
            if bs_load[m] >= scenario.N:
                continue
            S[m, k] = True
            bs_load[m] += 1
            taken += 1
    return Association(S=S, max_per_ue=scenario.L, max_per_bs=scenario.N)


# ---------------------------------------------------------------------------
# Evaluation with caching
# ---------------------------------------------------------------------------

def evaluate(matching: Association, power_mode: str, ctx: EvaluationContext) -> EvalResult:
    """Score a matching: run the selected controller, compute rates and EE."""
    if power_mode not in POWER_MODES:
        raise ConfigError(f"unknown power mode {power_mode!r}")
    key = matching.S.tobytes()
    mode_cache = ctx._cache.setdefault(power_mode, {})
    hit = mode_cache.get(key)
    if hit is not None:
        return hit

    lc = link_coefficients(matching, ctx.tensor)
    form = ctx.form_for(matching)
    if power_mode == "slmdb":
        sol = slmdb_solve(lc, ctx.frame, form, ctx.qos, ctx.settings)
    else:
        if power_mode == "fipc":
            p = fipc(ctx.scenario.K, ctx.qos)
        elif power_mode == "eipc":
            p = eipc(matching, ctx.corr, ctx.qos)
        else:
            p, _ = qopc_solve(lc, ctx.frame, ctx.qos, ctx.settings)
        rates = rates_from_coeffs(p, lc, ctx.frame)
        total = form.total(p, rates)
        sol = PowerSolution(p=p, ee=float(np.sum(rates)) / total, rates=rates,
                            feasible=True, diagnostics=SolveDiagnostics())

    slack = ctx.settings.qos_rate_rtol * ctx.qos.r_min_bps
    deficit = np.maximum(0.0, ctx.qos.r_min_bps - sol.rates - slack)
    shortfall = float(np.sum(deficit))
    qos_ok = shortfall == 0.0
    if power_mode == "slmdb":
        qos_ok = qos_ok and sol.feasible
    result = EvalResult(ee=sol.ee, qos_ok=qos_ok, shortfall_bps=shortfall, power=sol)
    mode_cache[key] = result
    return result


def _eval_count(ctx: EvaluationContext, power_mode: str) -> int:
    return len(ctx._cache.get(power_mode, {}))


# ---------------------------------------------------------------------------
# Moves
# ---------------------------------------------------------------------------

def apply_move(matching: Association, move: SwapMove, ctx: EvaluationContext):
    """New Association after the move, or None when preconditions fail."""
    S = matching.S
    M, K = S.shape
    L, N = ctx.scenario.L, ctx.scenario.N
    i = move.ue_i
    if not 0 <= i < K:
        raise ConfigError("ue_i out of range")
    new = S.copy()
    if move.kind == "exchange":
        j, m, n = move.ue_j, move.bs_m, move.bs_n
        if j is None or m is None or n is None:
            raise ConfigError("exchange requires both UEs and both BSs")
        if not (0 <= j < K and 0 <= m < M and 0 <= n < M) or i == j:
            raise ConfigError("exchange indices out of range")
        if not (S[m, i] and S[n, j]) or S[n, i] or S[m, j]:
            return None
        new[m, i] = False
        new[n, i] = True
        new[n, j] = False
        new[m, j] = True
    elif move.kind == "add":
        n = move.bs_n
        if n is None or move.bs_m is not None or move.ue_j is not None:
            raise ConfigError("add takes only the entering BS")
        if not 0 <= n < M:
            raise ConfigError("bs_n out of range")
        if S[n, i] or S[:, i].sum() >= L or S[n].sum() >= N:
            return None
        new[n, i] = True
    elif move.kind == "remove":
        m = move.bs_m
        if m is None or move.bs_n is not None or move.ue_j is not None:
            raise ConfigError("remove takes only the leaving BS")
        if not 0 <= m < M:
            raise ConfigError("bs_m out of range")
        if not S[m, i]:
            return None
        new[m, i] = False
    elif move.kind == "replace":
        m, n = move.bs_m, move.bs_n
        if m is None or n is None or move.ue_j is not None:
            raise ConfigError("replace takes a leaving and an entering BS")
        if not (0 <= m < M and 0 <= n < M):
            raise ConfigError("replace indices out of range")
        if not S[m, i] or S[n, i] or S[n].sum() >= N:
            return None
        new[m, i] = False
        new[n, i] = True
    else:
        raise ConfigError(f"unknown move kind {move.kind!r}")

    if ctx.no_sleep and matching.A[~new.any(axis=1)].any():
        return None    # move would put a serving BS to sleep
    if np.array_equal(new, S):
        return None
    return Association(S=new, max_per_ue=L, max_per_bs=N)


def _pair_moves(S: np.ndarray, i: int, j: int | None):
    """Candidate moves for the ordered pair (UE i, UE j) against the current S."""
    M = S.shape[0]
    if j is None:
        for n in range(M):
            if not S[n, i]:
                yield SwapMove(kind="add", ue_i=i, bs_n=n)
        for m in np.flatnonzero(S[:, i]):
            yield SwapMove(kind="remove", ue_i=i, bs_m=int(m))
        for m in np.flatnonzero(S[:, i]):
            for n in range(M):
                if not S[n, i]:
                    yield SwapMove(kind="replace", ue_i=i, bs_m=int(m), bs_n=n)
    else:
        for m in np.flatnonzero(S[:, i]):
            for n in np.flatnonzero(S[:, j]):
                if not S[n, i] and not S[m, j]:
                    yield SwapMove(kind="exchange", ue_i=i, bs_m=int(m),
                                   ue_j=j, bs_n=int(n))


def _pair_order(K: int):
    for i in range(K):
        for j in list(range(K)) + [None]:
            if j == i:
                continue
            yield i, j


def is_swap_blocking(matching: Association, move: SwapMove, power_mode: str,
                     ctx: EvaluationContext) -> PreferenceOutcome:
    """Approve the move iff it strictly improves (shortfall, EE) lexicographically.

    With QoS currently met that reduces to: QoS stays met and EE strictly
    increases (the shared-preference reading of a blocking pair).
    """
    before = evaluate(matching, power_mode, ctx)
    swapped = apply_move(matching, move, ctx)
    if swapped is None:
        return PreferenceOutcome(ee_before=before.ee, ee_after=before.ee,
                                 qos_ok_before=before.qos_ok,
                                 qos_ok_after=before.qos_ok, approved=False)
    after = evaluate(swapped, power_mode, ctx)
    approved = (after.shortfall_bps < before.shortfall_bps
                or (after.shortfall_bps == before.shortfall_bps
                    and after.ee > before.ee))
    return PreferenceOutcome(ee_before=before.ee, ee_after=after.ee,
                             qos_ok_before=before.qos_ok, qos_ok_after=after.qos_ok,
                             approved=approved)


def verify_stability(matching: Association, power_mode: str,
                     ctx: EvaluationContext) -> bool:
    """True iff no candidate move is approved from this matching."""
    K = matching.S.shape[1]
    for i, j in _pair_order(K):
        for move in _pair_moves(matching.S, i, j):
            if is_swap_blocking(matching, move, power_mode, ctx).approved:
                return False
    return True


# ---------------------------------------------------------------------------
# The full matching algorithm and the oracle
# ---------------------------------------------------------------------------

def trimsm(ctx: EvaluationContext, power_mode: str = "slmdb",
           initial: Association | None = None) -> SolutionReport:
    """Initialization + swap phase + (for heuristic modes) final slmdb pass."""
    settings = ctx.settings
    if initial is None:
        matching = recp_init(ctx.corr, ctx.scenario, settings.recp_delta_percent)
    else:
        matching = initial
    structural_gap = False
    if ctx.no_sleep:
        matching, structural_gap = _repair_empty_bs(matching, ctx)

    swap_count = 0
    converged = False
    for _ in range(settings.max_sweeps):
        approved_any = False
        for i, j in _pair_order(ctx.scenario.K):
            for move in _pair_moves(matching.S, i, j):
                outcome = is_swap_blocking(matching, move, power_mode, ctx)
                if outcome.approved:
                    matching = apply_move(matching, move, ctx)
                    swap_count += 1
                    approved_any = True
        if not approved_any:
            converged = True
            break

    final = evaluate(matching, "slmdb", ctx)
    stable = converged and verify_stability(matching, power_mode, ctx)
    return SolutionReport(
        matching=matching, power=final.power, ee=final.ee,
        swap_count=swap_count,
        evaluation_count=_eval_count(ctx, power_mode) + (_eval_count(ctx, "slmdb")
                                                         if power_mode != "slmdb" else 0),
        stable=stable, infeasible=(not final.qos_ok) or structural_gap)


def nos_assoc(ctx: EvaluationContext, power_mode: str = "eipc") -> SolutionReport:
    """No-sleeping variant: every BS must keep at least one UE; A is all ones."""
    no_sleep_ctx = ctx if ctx.no_sleep else ctx.clone(no_sleep=True)
    return trimsm(no_sleep_ctx, power_mode)


def _repair_empty_bs(matching: Association, ctx: EvaluationContext):
    """Give every empty BS a UE when capacity allows; returns (matching, gap)."""
    S = matching.S.copy()
    beta = ctx.corr.beta
    M, K = S.shape
    L, Ncap = ctx.scenario.L, ctx.scenario.N
    for m in range(M):
        if S[m].any():
            continue
        order = np.lexsort((np.arange(K), -beta[m]))
        placed = False
        for k in order:
            if S[:, k].sum() < L:
                S[m, k] = True
                placed = True
                break
        if not placed:
            for k in order:
                serving = np.flatnonzero(S[:, k])
                removable = [m2 for m2 in serving if S[m2].sum() >= 2]
                if removable:
                    weakest = min(removable, key=lambda m2: (beta[m2, k], -m2))
                    S[weakest, k] = False
                    S[m, k] = True
                    placed = True
                    break
    gap = bool((~S.any(axis=1)).any())
    return Association(S=S, max_per_ue=L, max_per_bs=Ncap), gap


def exhaustive_search(ctx: EvaluationContext) -> SolutionReport:
    """Enumerate every admissible matching and keep the best feasible one.

    Ties break toward fewer active BSs, then the lexicographically smallest
    matrix. Guarded to M*K <= 16.
    """
    M, K = ctx.scenario.M, ctx.scenario.K
    if M * K > 16:
        raise ConfigError(f"exhaustive search guard: M*K = {M * K} exceeds 16")
    L, Ncap = ctx.scenario.L, ctx.scenario.N
    choices = []
    for size in range(0, L + 1):
        choices.extend(combinations(range(M), size))

    best = None          # (ee, n_active, key, matching, result)
    best_bad = None      # least-infeasible fallback
    counts = np.zeros(M, dtype=int)
    S = np.zeros((M, K), dtype=bool)

    def recurse(k: int):
        nonlocal best, best_bad
        if k == K:
            matching = Association(S=S.copy(), max_per_ue=L, max_per_bs=Ncap)
            res = evaluate(matching, "slmdb", ctx)
            key = matching.S.tobytes()
            if res.qos_ok:
                cand = (-res.ee, matching.active_count, key)
                if best is None or cand < best[0]:
                    best = (cand, matching, res)
            else:
                cand = (res.shortfall_bps, -res.ee, key)
                if best_bad is None or cand < best_bad[0]:
                    best_bad = (cand, matching, res)
            return
        for subset in choices:
            ok = all(counts[m] < Ncap for m in subset)
            if not ok:
                continue
            for m in subset:
                counts[m] += 1
                S[m, k] = True
            recurse(k + 1)
            for m in subset:
                counts[m] -= 1
                S[m, k] = False

    recurse(0)
    chosen, res = (best[1], best[2]) if best is not None else (best_bad[1], best_bad[2])
    return SolutionReport(matching=chosen, power=res.power, ee=res.ee,
                          swap_count=0, evaluation_count=_eval_count(ctx, "slmdb"),
                          stable=True, infeasible=best is None)
