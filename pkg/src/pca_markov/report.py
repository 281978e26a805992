"""One-stop condition report for a transition matrix.

Collects the individual checks and turns them into a verdict per structure:
the zigzag on the line (``HZ``) and on a cycle (``HZ(n)``), and a single
row on the line (``H``) and on a cycle (``H(n)``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import PCAError, TransitionMatrix, check_cond_tauxg, is_positive_rate
from .cyclic import analyze_hz_cyclic, check_diag_powers, cyclic_kmax
from .hz import EPS_COND, Verdict, analyze_hz, check_cond_gibbs1, check_cond_gibbs_g
from .line import classify_kappa1
from .oracle import EPS_ORACLE, STATE_BUDGET, exact_stationary, is_cmc
from .spectral import EPS_EIG

__all__ = ["SCHEMA_VERSION", "ConditionReport", "build_report", "render_text"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConditionReport:
    kappa: int
    n: int | None
    positive_rate: bool
    tauxg: bool
    cond_gibbs1: tuple  # (ok, residual, witness)
    cond_gibbs_g: tuple
    cond_commut: tuple | None  # (ok, commutator norm)
    cond_cyclic_diag: tuple | None  # (ok, residual, kmax)
    verdicts: dict
    solution: dict | None = None
    kappa1: dict | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def cond(c, keys):
            return None if c is None else dict(zip(keys, c))

        return {
            "schema_version": SCHEMA_VERSION,
            "kappa": self.kappa,
            "n": self.n,
            "positive_rate": self.positive_rate,
            "tauxg": self.tauxg,
            "cond_gibbs1": cond(self.cond_gibbs1, ("ok", "residual", "witness")),
            "cond_gibbs_g": cond(self.cond_gibbs_g, ("ok", "residual", "witness")),
            "cond_commut": cond(self.cond_commut, ("ok", "commutator_norm")),
            "cond_cyclic_diag": cond(self.cond_cyclic_diag, ("ok", "residual", "kmax")),
            "verdicts": dict(self.verdicts),
            "solution": self.solution,
            "kappa1": self.kappa1,
            "notes": list(self.notes),
        }


def _arr(a):
    return np.asarray(a, dtype=float).tolist()


def _witness(w):
    return None if w is None else [int(v) for v in w]


def build_report(
    tm: TransitionMatrix,
    n: int | None = None,
    eps_cond: float = EPS_COND,
    eps_eig: float = EPS_EIG,
    eps_oracle: float = EPS_ORACLE,
    oracle_budget: int = STATE_BUDGET,
) -> ConditionReport:
    """Run every applicable check; ``n=None`` means all circumferences."""
    notes = []
    pos = is_positive_rate(tm)
    taux = check_cond_tauxg(tm)
    g1 = (False, None, None)
    if taux:
        r = check_cond_gibbs1(tm, eps_cond)
        g1 = (r.ok, r.residual, _witness(r.witness))
    r = check_cond_gibbs_g(tm, eps_cond)
    gg = (r.ok, r.residual, _witness(r.witness))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        hz = analyze_hz(tm, eps_cond, eps_eig)
    notes += [str(w.message) for w in caught]
    hzn = analyze_hz_cyclic(tm, n, eps_cond, eps_eig)

    commut = diag = sol_dict = None
    sol = hz.solution
    if sol is not None:
        commut = (sol.commutator_norm <= eps_cond, sol.commutator_norm)
        kmax = cyclic_kmax(tm.kappa, n)
        c8 = check_diag_powers(sol.d, sol.u, kmax, eps_cond)
        diag = (c8.ok, c8.residual, kmax)
        sol_dict = {
            "nu": _arr(sol.nu),
            "lambda": float(sol.lam),
            "gamma": _arr(sol.gamma),
            "mu": _arr(sol.mu),
            "rho": _arr(sol.rho),
            "D": _arr(sol.d),
            "U": _arr(sol.u),
            "M": _arr(sol.m),
            "diag_residual": float(sol.diag_residual),
        }

    verdicts = {"HZ": hz.verdict.value, "HZ(n)": hzn.verdict.value}

    k1 = None
    h = Verdict.MARKOV_PROVEN if hz.ok else Verdict.INCONCLUSIVE
    if tm.kappa == 1 and pos:
        c = classify_kappa1(tm, eps_cond)
        k1 = {
            "cond_i": c.cond_i,
            "residual_i": c.residual_i,
            "cond_ii_a": c.cond_ii_a,
            "residual_ii_a": c.residual_ii_a,
            "cond_ii_b": c.cond_ii_b,
            "residual_ii_b": c.residual_ii_b,
            "rho0": c.rho0,
            "m_candidates": [_arr(m) for m in c.m_candidates],
        }
        # the two-letter positive-rate classification is complete
        h = Verdict.MARKOV_PROVEN if c.markov_on_line else Verdict.NOT_MARKOV_PROVEN
    verdicts["H"] = h.value

    hn = Verdict.MARKOV_PROVEN if hzn.ok else Verdict.INCONCLUSIVE
    if hn is not Verdict.MARKOV_PROVEN and n is not None and pos and n >= 3:
        try:
            fit = is_cmc(exact_stationary(tm, n, eps_oracle, oracle_budget), eps_oracle)
            hn = Verdict.MARKOV_PROVEN if fit.ok else Verdict.NOT_MARKOV_PROVEN
            notes.append(f"H(n) decided by the exact oracle at n={n}")
        except PCAError as exc:
            notes.append(f"H(n) oracle skipped: {exc}")
    verdicts["H(n)"] = hn.value

    return ConditionReport(
        kappa=tm.kappa,
        n=n,
        positive_rate=pos,
        tauxg=taux,
        cond_gibbs1=g1,
        cond_gibbs_g=gg,
        cond_commut=commut,
        cond_cyclic_diag=diag,
        verdicts=verdicts,
        solution=sol_dict,
        kappa1=k1,
        notes=notes,
    )


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def render_text(d: dict) -> str:
    """Human-readable rendering of :meth:`ConditionReport.to_dict` output.

    Floats are printed with ``repr`` so the numbers match the JSON exactly.
    """
    lines = [f"kappa: {d['kappa']}  n: {d['n'] if d['n'] is not None else 'all'}"]
    lines.append(f"positive rate: {d['positive_rate']}")
    lines.append(f"T(a,b,0)>0 and T(0,0,c)>0: {d['tauxg']}")
    for key in ("cond_gibbs1", "cond_gibbs_g", "cond_commut", "cond_cyclic_diag"):
        c = d[key]
        if c is None:
            lines.append(f"{key}: n/a")
        else:
            parts = " ".join(f"{k}={_fmt(v)}" for k, v in c.items() if k != "ok")
            lines.append(f"{key}: {'PASS' if c['ok'] else 'FAIL'} {parts}")
    sol = d["solution"]
    if sol is not None:
        for key in ("nu", "lambda", "gamma", "mu", "rho", "D", "U", "diag_residual"):
            lines.append(f"{key}: {_fmt(sol[key])}")
    if d["kappa1"] is not None:
        lines.append("two-letter classification:")
        for k, v in d["kappa1"].items():
            lines.append(f"  {k}: {_fmt(v)}")
    lines.append("verdicts:")
    for k, v in d["verdicts"].items():
        lines.append(f"  {k}: {v}")
    for note in d["notes"]:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
