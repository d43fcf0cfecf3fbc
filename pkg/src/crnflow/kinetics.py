"""Mass-action kinetics on reaction networks.

Forward and backward one-way fluxes follow mass action on the head and
tail compositions of each edge. Three equivalent edge coordinate systems
appear throughout: one-way fluxes (jplus, jminus), net flux and force
(j, f), and force and activity (f, w), linked by

    j = jplus - jminus        f = log(jplus / jminus)
    w = 2 sqrt(jplus jminus)  j = w sinh(f / 2)

Rate constants likewise split into an equilibrium part K = kplus/kminus
and a frenetic part kappa = sqrt(kplus kminus).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import ReactionNetwork


class ConvergenceError(RuntimeError):
    """Iterative solver failed to reach tolerance.

    Attributes:
        best: the last iterate.
        residual: its stationarity residual.
        iterations: iterations spent.
    """

    def __init__(self, message: str, best=None, residual: float = np.nan, iterations: int = 0):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class EdgePair:
    """One-way flux pair on the edges, with derived coordinates."""

    jplus: np.ndarray
    jminus: np.ndarray

    def __post_init__(self):
        jp = np.asarray(self.jplus, dtype=float)
        jm = np.asarray(self.jminus, dtype=float)
        if jp.shape != jm.shape or jp.ndim != 1:
            raise ValueError("jplus and jminus must be 1-d vectors of equal length")
        if not (np.all(jp > 0) and np.all(jm > 0)):
            raise ValueError("one-way fluxes must be strictly positive")
        object.__setattr__(self, "jplus", jp)
        object.__setattr__(self, "jminus", jm)

    @property
    def flux(self) -> np.ndarray:
        return self.jplus - self.jminus

    @property
    def force(self) -> np.ndarray:
        return np.log(self.jplus / self.jminus)

    @property
    def activity(self) -> np.ndarray:
        """Edge activity 2 sqrt(jplus jminus); satisfies flux = activity sinh(force/2)."""
        return 2.0 * np.sqrt(self.jplus * self.jminus)


@dataclass(frozen=True)
class KineticSplit:
    """Equilibrium/frenetic factorization of the rate constants.

    kplus = kappa sqrt(keq), kminus = kappa / sqrt(keq). The map between
    (kplus, kminus) and (kappa, keq) is a bijection on positive vectors.
    """

    kappa: np.ndarray
    keq: np.ndarray

    @classmethod
    def from_rates(cls, kplus, kminus) -> "KineticSplit":
        kp = np.asarray(kplus, dtype=float)
        km = np.asarray(kminus, dtype=float)
        if not (np.all(kp > 0) and np.all(km > 0)):
            raise ValueError("rates must be strictly positive")
        return cls(kappa=np.sqrt(kp * km), keq=kp / km)

    def rates(self) -> tuple[np.ndarray, np.ndarray]:
        root = np.sqrt(self.keq)
        return self.kappa * root, self.kappa / root


def _monomials(x: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Columnwise monomials prod_i x_i^E[i, e] for integer E >= 0.

    Uses integer powers, so it stays finite (and smooth) when trial
    states dip to zero or slightly below during ODE stepping.
    """
    return np.prod(x[:, None] ** exponents, axis=0)


def mass_action_flux(net: ReactionNetwork, x, kplus=None, kminus=None) -> EdgePair:
    """One-way mass-action fluxes at state x > 0.

    Rate constants default to the network's; pass kplus/kminus to
    evaluate the same topology under different rates.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n_species,):
        raise ValueError(f"state must have length {net.n_species}")
    if not np.all(x > 0):
        raise ValueError("state must be strictly positive")
    kp = net.kplus if kplus is None else np.asarray(kplus, dtype=float)
    km = net.kminus if kminus is None else np.asarray(kminus, dtype=float)
    jp = kp * _monomials(x, net.head_compositions)
    jm = km * _monomials(x, net.tail_compositions)
    return EdgePair(jplus=jp, jminus=jm)


def net_flux_raw(net: ReactionNetwork, x, kplus=None, kminus=None) -> np.ndarray:
    """Net flux as a polynomial in x, defined for any real state.

    Equals mass_action_flux(...).flux on the positive orthant but does
    not require positivity, which keeps ODE right-hand sides total.
    """
    x = np.asarray(x, dtype=float)
    kp = net.kplus if kplus is None else np.asarray(kplus, dtype=float)
    km = net.kminus if kminus is None else np.asarray(kminus, dtype=float)
    return kp * _monomials(x, net.head_compositions) - km * _monomials(x, net.tail_compositions)


def mass_action_force_activity(net: ReactionNetwork, x) -> tuple[np.ndarray, np.ndarray]:
    """Edge force and activity at state x > 0, computed in the log domain.

    force    = log K + stoich.T log x
    activity = 2 kappa exp(0.5 (head + tail compositions).T log x)
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n_species,) or not np.all(x > 0):
        raise ValueError("state must be strictly positive with matching length")
    logx = np.log(x)
    f = np.log(net.kplus / net.kminus) + net.stoich.T @ logx
    half_sum = 0.5 * (net.head_compositions + net.tail_compositions).T @ logx
    w = 2.0 * np.sqrt(net.kplus * net.kminus) * np.exp(half_sum)
    return f, w


def entropy_production(pair: EdgePair) -> float:
    """EPR <j, f> = sum (jplus - jminus) log(jplus / jminus) >= 0."""
    return float(np.sum(pair.flux * pair.force))


def pseudo_entropy_production(pair: EdgePair) -> float:
    """Quadratic lower bound 2 sum (jplus - jminus)^2 / (jplus + jminus)."""
    d = pair.flux
    return float(2.0 * np.sum(d * d / (pair.jplus + pair.jminus)))


def wegscheider_check(net: ReactionNetwork, tol: float = 1e-10) -> dict:
    """Test whether the rate constants admit a detailed-balanced state.

    The condition is that every stoichiometric cycle carries zero
    affinity: cycle_basis.T log K = 0. The returned potential is the
    minimum-norm species vector y with log K = -stoich.T y up to the
    returned residual force, which is orthogonal to the image of
    stoich.T (zero iff the condition holds).
    """
    logk = np.log(net.kplus / net.kminus)
    affinity = net.cycle_basis.T.astype(float) @ logk
    st = net.stoich.T.astype(float)
    y, *_ = np.linalg.lstsq(st, -logk, rcond=None)
    residual = logk + st @ y
    return {
        "is_equilibrium": bool(np.max(np.abs(affinity), initial=0.0) < tol),
        "cycle_affinity": affinity,
        "potential": y,
        "residual_force": residual,
        "tol": tol,
    }


def classify_state(net: ReactionNetwork, x, tol: float = 1e-8) -> dict:
    """Classify a positive state by which flux balances hold.

    detailed_balance: every edge flux vanishes.
    complex_balanced: incidence @ flux = 0 (flux conserved at each
        hypervertex) but some edge flux is nonzero.
    steady: stoich @ flux = 0 but flux not complex balanced.
    transient: otherwise.

    The three balance classes are nested (each implies the next).
    """
    pair = mass_action_flux(net, x)
    j = pair.flux
    flux_residual = float(np.max(np.abs(j), initial=0.0))
    complex_residual = float(np.max(np.abs(net.incidence @ j), initial=0.0))
    species_residual = float(np.max(np.abs(net.stoich @ j), initial=0.0))
    if flux_residual < tol:
        label = "detailed_balance"
    elif complex_residual < tol:
        label = "complex_balanced"
    elif species_residual < tol:
        label = "steady"
    else:
        label = "transient"
    return {
        "label": label,
        "flux_residual": flux_residual,
        "complex_residual": complex_residual,
        "species_residual": species_residual,
        "tol": tol,
    }


def _flux_jacobian(net: ReactionNetwork, x: np.ndarray, pair: EdgePair) -> np.ndarray:
    # d j_e / d x_i = (head[i,e] jplus[e] - tail[i,e] jminus[e]) / x_i
    num = net.head_compositions * pair.jplus[None, :] - net.tail_compositions * pair.jminus[None, :]
    return (num / x[:, None]).T


def find_steady_state(
    net: ReactionNetwork,
    x0,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> np.ndarray:
    """Positive steady state on the stoichiometric leaf through x0.

    Damped Newton iteration on the square-free system
    [stoich @ flux(x); cons_basis @ (x - x0)] = 0, solved in the least
    squares sense per step with backtracking that keeps x positive.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (net.n_species,) or not np.all(x > 0):
        raise ValueError("x0 must be a strictly positive state")
    u = net.cons_basis.astype(float)
    target = u @ x

    def residual(xv):
        pair = mass_action_flux(net, xv)
        return np.concatenate([net.stoich @ pair.flux, u @ xv - target]), pair

    r, pair = residual(x)
    scale = 1.0 + float(np.max(np.abs(r)))
    for it in range(max_iter):
        norm = float(np.max(np.abs(r)))
        if norm < tol * scale:
            return x
        jac = np.vstack([net.stoich @ _flux_jacobian(net, x, pair), u])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        alpha = 1.0
        while alpha > 1e-14:
            trial = x + alpha * step
            if np.all(trial > 0):
                r_trial, pair_trial = residual(trial)
                if np.max(np.abs(r_trial)) < (1.0 - 1e-4 * alpha) * norm or norm == 0.0:
                    x, r, pair = trial, r_trial, pair_trial
                    break
            alpha *= 0.5
        else:
            raise ConvergenceError(
                "steady-state search stalled", best=x, residual=norm, iterations=it
            )
    raise ConvergenceError(
        "steady-state search did not converge",
        best=x,
        residual=float(np.max(np.abs(r))),
        iterations=max_iter,
    )
