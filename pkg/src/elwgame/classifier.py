"""Case-by-case search for equilibria of the maximally entangled game.

The search is organised by the support sizes ``(M, N)`` of the two canonical
strategies.  Every case reduces to statements about the top eigenspaces of
the best-response matrices, which are settled here by exact linear algebra
where possible and by deterministic scans otherwise.  Each candidate that a
case produces is run through ``verify_nash`` and, independently, through a
brute-force grid oracle that evaluates payoffs with the quaternion product
directly.

Bob's two-atom strategy in the ``N = 2`` cases is ``{e0 with rho, q with 1-rho}``
with ``q`` pure imaginary; by the stability shift every two-atom strategy can
be brought to this form.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .engine import ELW_PAYOFFS, as_payoffs, genericity_check, payoff_grid
from .grid import covering_radius, fibonacci_s2, oracle_grid
from .measures import MixedStrategy, mixed_payoff, second_moment, uniform
from .nash import (
    best_response_matrix_A, best_response_matrix_B, family_member,
    maximal_eigenspace, verify_nash,
)
from .quaternion import BASIS, E0, as_unit, inverse, left_mul_matrix, mul, right_mul_matrix

DISCREPANT = "DISCREPANT-WITH-PAPER"
CASE_LABELS = ("N1", "N2-axis", "N2-caseA", "N2-caseB", "M3", "M4", "N3plus-i", "N3plus-ii")

SOLUTION_TOL = 1e-9      # residual below which a consistency system counts as solved
SCAN_RESOLUTION = 1e-3   # (theta, sigma) step in the Bob-side consistency scans
ROOT_XTOL = 1e-10        # bisection tolerance on t = q3^2


class NonGenericPayoffs(ValueError):
    """Raised when the payoff vector violates the genericity conditions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("non-generic payoffs: " + ", ".join(self.violations))


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class OracleConfig:
    """Grid of ``K`` lattice points (plus the 48 binary-octahedral points) and a slack ``epsilon``."""

    K: int = 4096
    seed: int = 0
    epsilon: float = 1e-3

    def __post_init__(self):
        if int(self.K) < 1:
            raise ValueError(f"grid size must be positive, got {self.K}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")

    @property
    def grid(self):
        return oracle_grid(int(self.K), int(self.seed))

    @property
    def covering_radius(self):
        return covering_radius(int(self.K), int(self.seed))

    def epsilon_bound(self, X=ELW_PAYOFFS):
        """Worst-case shortfall of a grid maximum: ``2 * radius * (max X - min X)``."""
        return 2.0 * self.covering_radius * as_payoffs(X).spread

    def to_json(self, X=ELW_PAYOFFS):
        return {
            "K": int(self.K),
            "seed": int(self.seed),
            "epsilon": float(self.epsilon),
            "grid_points": int(len(self.grid)),
            "covering_radius": self.covering_radius,
            "epsilon_bound": self.epsilon_bound(X),
        }


class OracleVerdict(NamedTuple):
    passed: bool
    gains: tuple


def epsilon_nash_oracle(mu, nu, X=ELW_PAYOFFS, cfg=None):
    """Largest payoff gain either player can get by a pure deviation on the grid.

    Payoffs are linear in each player's own measure, so pure deviations are
    enough.  The evaluation goes through the quaternion product only.
    """
    cfg = cfg or OracleConfig()
    G = cfg.grid
    base_a, base_b = mixed_payoff(mu, nu, X)
    dev_a, _ = payoff_grid(G[:, None, :], nu.points[None, :, :], X)
    _, dev_b = payoff_grid(mu.points[:, None, :], G[None, :, :], X)
    gain_a = float((dev_a @ nu.weights).max() - base_a)
    gain_b = float((mu.weights @ dev_b).max() - base_b)
    return OracleVerdict(bool(gain_a <= cfg.epsilon and gain_b <= cfg.epsilon), (gain_a, gain_b))


# ---------------------------------------------------------------------------
# results


@dataclass(eq=False)
class Finding:
    """A candidate strategy pair with both the verifier's and the oracle's verdict."""

    description: str
    alice: MixedStrategy
    bob: MixedStrategy
    report: object
    oracle: OracleVerdict
    params: dict = field(default_factory=dict)
    flags: tuple = ()

    @property
    def verified(self):
        return bool(self.report.verdict)

    def sort_key(self):
        return (self.description, repr(sorted(self.params.items())))

    def to_json(self):
        out = {
            "description": self.description,
            "params": _jsonable(self.params),
            "verdict": self.verified,
            "oracle": {"passed": self.oracle.passed, "gains": list(self.oracle.gains)},
            "report": self.report.to_json(),
            "flags": list(self.flags),
        }
        if self.verified:
            out["alice"] = self.alice.to_json()
            out["bob"] = self.bob.to_json()
        return out


def make_finding(description, mu, nu, X, cfg, params=None, flags=()):
    return Finding(description, mu, nu, verify_nash(mu, nu, X),
                   epsilon_nash_oracle(mu, nu, X, cfg), dict(params or {}), tuple(flags))


@dataclass(eq=False)
class CaseResult:
    label: str
    findings: list = field(default_factory=list)
    scan: dict = field(default_factory=dict)
    conclusion: str = ""
    rows: list = field(default_factory=list)
    status: str = "ok"
    warnings: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.findings = sorted(self.findings, key=Finding.sort_key)

    @property
    def equilibria(self):
        return [f for f in self.findings if f.verified]

    def to_json(self):
        return {
            "case": self.label,
            "status": self.status,
            "conclusion": self.conclusion,
            "warnings": list(self.warnings),
            "scan": _jsonable(self.scan),
            "extras": _jsonable(self.extras),
            "findings": [f.to_json() for f in self.findings],
        }

    def csv_text(self):
        return rows_to_csv(self.rows)


def rows_to_csv(rows):
    """Render scan rows (dicts) as CSV, columns in first-seen order."""
    columns = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(str(_csv_cell(x)) for x in v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def _rejected(label, X):
    generic, violations = genericity_check(X)
    if generic:
        return None
    return CaseResult(label, status="rejected", warnings=[f"non-generic payoffs: {v}" for v in violations],
                      conclusion="not analysed: payoffs are not generic")


# ---------------------------------------------------------------------------
# shared linear algebra


def two_atom_Y(Q, rho, X=ELW_PAYOFFS):
    """``Y`` against ``{e0 with rho, q with 1 - rho}``, batched over leading axes of ``Q``."""
    D = np.diag(as_payoffs(X).vector)
    M = right_mul_matrix(Q)
    return rho * D + (1.0 - rho) * np.einsum("...ba,bc,...cd->...ad", M, D, M)


def _bob_matrix(p, X):
    D = np.diag(as_payoffs(X).tilde)
    M = left_mul_matrix(p)
    return M.T @ D @ M


def _uw_to_theta_sigma(u, w):
    """Invert ``(u - 1/2, w) = (sigma - 1/2)(cos 2theta, sin 2theta)``; theta is ``None`` when free."""
    d = math.hypot(u - 0.5, w)
    if d < 1e-12:
        return None, 0.5
    return 0.5 * math.atan2(w, u - 0.5), 0.5 + d


@lru_cache(maxsize=4)
def _uw_scan_points(h):
    theta = np.arange(0.0, math.pi / 2, h)
    sigma = np.linspace(0.0, 1.0, int(round(1.0 / h)) + 1)
    T, S = np.meshgrid(theta, sigma, indexing="ij")
    c2, s2 = np.cos(T) ** 2, np.sin(T) ** 2
    U = (S * c2 + (1 - S) * s2).ravel()
    W = ((2 * S - 1) * np.cos(T) * np.sin(T)).ravel()
    return U, W, U * U, U * W, W * W, len(theta), len(sigma)


@dataclass(frozen=True, eq=False)
class PlaneConsistency:
    """Whether some Alice measure on ``plane`` puts both of Bob's atoms in Z's top eigenspace.

    An Alice measure on the plane spanned by orthonormal ``a, b`` is
    ``{sigma (c a + s b), (1 - sigma)(-s a + c b)}`` with ``c, s = cos, sin theta``.
    Her ``Z`` is ``A22 + u (A11 - A22) + w C`` with ``u = sigma c^2 + (1-sigma) s^2``
    and ``w = (2 sigma - 1) c s``, and ``(u, w)`` fills the disk of radius 1/2
    about ``(1/2, 0)``.  Bob's conditions (plane invariance, no cross term,
    equal diagonal) are linear in ``(u, w)``.
    """

    plane: tuple
    bob_pair: tuple
    min_residual: float
    argmin: tuple
    scan_min: float    # nan when no (theta, sigma) scan was requested
    scan_points: int
    solutions: list   # (theta or None, sigma) with both atoms in the top eigenspace

    @property
    def consistent(self):
        return bool(self.solutions)

    def alice_strategy(self, theta=None, sigma=None):
        if theta is None and sigma is None:
            theta, sigma = _uw_to_theta_sigma(*self.argmin)
        theta = 0.0 if theta is None else theta
        a, b = self.plane
        c, s = math.cos(theta), math.sin(theta)
        return MixedStrategy([sigma, 1 - sigma], [c * a + s * b, -s * a + c * b])


def plane_consistency(plane, bob_pair, X=ELW_PAYOFFS, h=SCAN_RESOLUTION, tol=SOLUTION_TOL):
    a, b = (np.asarray(v, dtype=float) for v in plane)
    b1, b2 = (np.asarray(v, dtype=float) for v in bob_pair)
    D = np.diag(as_payoffs(X).tilde)
    Ma, Mb = left_mul_matrix(a), left_mul_matrix(b)
    A11, A22 = Ma.T @ D @ Ma, Mb.T @ D @ Mb
    C = Ma.T @ D @ Mb + Mb.T @ D @ Ma
    perp = np.eye(4) - np.outer(b1, b1) - np.outer(b2, b2)

    def conditions(Z):
        return np.concatenate([perp @ Z @ b1, perp @ Z @ b2, [b1 @ Z @ b2, b1 @ Z @ b1 - b2 @ Z @ b2]])

    L = np.stack([conditions(A22), conditions(A11 - A22), conditions(C)], axis=1)
    H = L.T @ L

    def residual(u, w):
        x = np.array([1.0, u, w])
        return math.sqrt(max(0.0, x @ H @ x))

    B, rhs = L[:, 1:], -L[:, 0]
    z, _, rank, _ = np.linalg.lstsq(B, rhs, rcond=None)
    centre = np.array([0.5, 0.0])
    if rank == 2:
        null = np.zeros((2, 0))
    else:
        null = np.linalg.svd(B)[2][rank:].T
    # closest point of the LS solution set to the disk centre
    zc = z + null @ (null.T @ (centre - z)) if null.size else z
    if np.linalg.norm(zc - centre) <= 0.5:
        best = tuple(zc)
    else:
        def on_circle(phi):
            return residual(0.5 + 0.5 * math.cos(phi), 0.5 * math.sin(phi))
        phis = np.linspace(0, 2 * math.pi, 4097)
        vals = [on_circle(p) for p in phis]
        k = int(np.argmin(vals))
        opt = minimize_scalar(on_circle, bounds=(phis[max(k - 1, 0)], phis[min(k + 1, 4096)]),
                              method="bounded", options={"xatol": 1e-12})
        phi = opt.x if opt.fun <= vals[k] else phis[k]
        best = (0.5 + 0.5 * math.cos(phi), 0.5 * math.sin(phi))
    min_res = residual(*best)

    scan_min, n_scan = math.nan, 0
    if h:
        U, W, UU, UW, WW, _, _ = _uw_scan_points(h)
        r2 = (H[0, 0] + 2 * H[0, 1] * U + 2 * H[0, 2] * W
              + H[1, 1] * UU + 2 * H[1, 2] * UW + H[2, 2] * WW)
        scan_min = math.sqrt(max(0.0, float(r2.min())))
        n_scan = len(U)

    solutions = []
    if min_res < tol:
        if null.shape[1] == 0:
            candidates = [np.array(best)]
        else:
            # sample the feasible part of the solution line (or disk)
            candidates = [np.array(best)]
            for k in range(null.shape[1]):
                n = null[:, k]
                for t in np.linspace(-1, 1, 11):
                    p = np.array(best) + t * n
                    if np.linalg.norm(p - centre) <= 0.5 + 1e-12:
                        candidates.append(p)
        seen = set()
        for u, w in candidates:
            Z = A22 + u * (A11 - A22) + w * C
            eig = maximal_eigenspace(Z)
            if max(eig.residual(b1), eig.residual(b2)) < tol:
                theta, sigma = _uw_to_theta_sigma(u, w)
                key = (None if theta is None else round(theta, 9), round(sigma, 9))
                if key not in seen:
                    seen.add(key)
                    solutions.append((theta, sigma))
    return PlaneConsistency((a, b), (b1, b2), min_res, best, scan_min, n_scan, solutions)


def _axis_candidates(vals, others_tol=1e-12):
    """Pairs of indices whose linear functions ``vals[k](rho)`` cross at the top for some rho in (0, 1)."""
    out = []
    for i, j in itertools.combinations(range(4), 2):
        (ai, bi), (aj, bj) = vals[i], vals[j]   # value = a + b * rho
        if abs(bi - bj) < 1e-15:
            continue
        rho = (aj - ai) / (bi - bj)
        if not 0.0 < rho < 1.0:
            continue
        v = ai + bi * rho
        rest = [vals[k][0] + vals[k][1] * rho for k in range(4) if k not in (i, j)]
        if all(v > r + others_tol for r in rest):
            out.append((i, j, rho, v))
    return out


# ---------------------------------------------------------------------------
# N = 1


def classify_N1(X=ELW_PAYOFFS, cfg=None):
    """Bob pure (shifted to e0): Alice answers with the axis of the largest payoff; test Bob's reply."""
    rejected = _rejected("N1", X)
    if rejected:
        return rejected
    cfg = cfg or OracleConfig()
    X = as_payoffs(X)
    bob = MixedStrategy([1.0], [E0])
    Y = best_response_matrix_A(bob, X)
    a_star = int(np.argmax(X.vector))
    alice = MixedStrategy([1.0], [BASIS[a_star]])
    eig_b = maximal_eigenspace(best_response_matrix_B(alice, X))
    top_b = eig_b.top_basis[:, 0]
    rows = []
    for a in range(4):
        eig = maximal_eigenspace(best_response_matrix_B(MixedStrategy([1.0], [BASIS[a]]), X))
        rows.append({"alice_axis": a, "alice_payoff": float(Y.matrix[a, a]),
                     "bob_top_value": eig.top_value, "bob_e0_residual": eig.residual(E0),
                     "alice_best": a == a_star})
    finding = make_finding("pure pair: Alice best axis, Bob e0", alice, bob, X, cfg,
                           {"alice_axis": a_star})
    if finding.verified:
        conclusion = f"(1,1) equilibrium (e{a_star}, e0) and its stability orbit"
    else:
        axis = int(np.argmax(np.abs(top_b)))
        conclusion = (f"no equilibrium with N=1: Alice's best reply is e{a_star}, "
                      f"against which Bob's top response is e{axis} (value {eig_b.top_value:g})")
    return CaseResult("N1", [finding], {"bob": "e0 (stability shift)"}, conclusion, rows,
                      extras={"alice_best_axis": a_star, "alice_payoff": float(X.vector[a_star]),
                              "bob_top_response": top_b, "bob_top_value": eig_b.top_value,
                              "simple_top": Y.matrix[a_star, a_star] > np.sort(X.vector)[-2]})


# ---------------------------------------------------------------------------
# N = 2, q along an axis


def classify_N2_axis(X=ELW_PAYOFFS, cfg=None, rho_steps=999):
    """q = e_k: Y is diagonal, so top degeneracies are crossings of linear functions of rho."""
    rejected = _rejected("N2-axis", X)
    if rejected:
        return rejected
    cfg = cfg or OracleConfig()
    X = as_payoffs(X)
    rows, findings, families = [], [], []
    rhos = np.arange(1, rho_steps + 1) / (rho_steps + 1)
    for k in (1, 2, 3):
        q = BASIS[k]
        perm_diag = np.diag(two_atom_Y(q, 0.0, X))
        vals = [(perm_diag[a], X.vector[a] - perm_diag[a]) for a in range(4)]
        for rho in rhos:
            d = np.sort(X.vector * rho + perm_diag * (1 - rho))[::-1]
            rows.append({"q_axis": k, "rho": rho, "top_gap": d[0] - d[1], "kind": "scan"})
        for i, j, rho, value in _axis_candidates(vals):
            pc = plane_consistency((BASIS[i], BASIS[j]), (E0, q), X)
            bob = MixedStrategy([rho, 1 - rho], [E0, q])
            if pc.solutions:
                for theta, sigma in pc.solutions:
                    mu = pc.alice_strategy(theta, sigma)
                    params = {"q_axis": k, "rho": rho, "plane": (i, j), "sigma": sigma,
                              "theta": "free" if theta is None else theta}
                    f = make_finding("axis crossing: Bob-consistent", mu, bob, X, cfg, params)
                    findings.append(f)
                    if f.verified:
                        families.append(params)
            else:
                mu = pc.alice_strategy()
                findings.append(make_finding(
                    "axis crossing: closest Alice measure", mu, bob, X, cfg,
                    {"q_axis": k, "rho": rho, "plane": (i, j)}))
            rows.append({"q_axis": k, "rho": rho, "top_gap": 0.0, "kind": "crossing",
                         "plane": f"e{i} e{j}", "top_value": value,
                         "bob_min_residual": pc.min_residual, "bob_scan_min": pc.scan_min,
                         "consistent": pc.consistent})
    if families:
        conclusion = "families found: " + "; ".join(
            f"q=e{p['q_axis']}, rho={p['rho']:g}, Alice on span(e{p['plane'][0]}, e{p['plane'][1]}), "
            f"sigma={p['sigma']:g}, theta {p['theta'] if p['theta'] == 'free' else round(p['theta'], 6)}"
            for p in families)
    else:
        conclusion = "no axis family"
    return CaseResult("N2-axis", findings, {"rho_steps": rho_steps, "resolution": SCAN_RESOLUTION},
                      conclusion, rows, extras={"families": families})


# ---------------------------------------------------------------------------
# N = 2, case (a): one of q1, q2 vanishes

_SLICES = {"q1=0": (2, 3), "q2=0": (1, 3)}
_PAIRINGS = (("hi", "hi"), ("hi", "lo"), ("lo", "hi"), ("lo", "lo"))


def slice_quaternion(slice_label, t):
    """The pure-imaginary unit quaternion of the slice with ``q3^2 = t``."""
    j, k = _SLICES[slice_label]
    t = np.asarray(t, dtype=float)
    Q = np.zeros(t.shape + (4,))
    Q[..., j] = np.sqrt(np.clip(1.0 - t, 0.0, 1.0))
    Q[..., k] = np.sqrt(np.clip(t, 0.0, 1.0))
    return Q


def _block_structure(Y):
    """Index pairs of the two 2x2 diagonal blocks of ``Y`` (from its sparsity pattern)."""
    linked = np.abs(Y) > 1e-12
    blocks = []
    for i in range(4):
        if any(i in b for b in blocks):
            continue
        group = [i] + [j for j in range(i + 1, 4) if linked[i, j]]
        blocks.append(tuple(group))
    if sorted(len(b) for b in blocks) != [2, 2]:
        raise RuntimeError(f"unexpected block structure {blocks}")
    return blocks


def _block_eigs(Y, block):
    i, j = block
    a, d, b = Y[..., i, i], Y[..., j, j], Y[..., i, j]
    mean, rad = (a + d) / 2, np.sqrt(((a - d) / 2) ** 2 + b * b)
    return {"hi": mean + rad, "lo": mean - rad}


def _block_vector(Y, block, which):
    i, j = block
    w, V = np.linalg.eigh(Y[np.ix_(block, block)])
    v = np.zeros(4)
    v[[i, j]] = V[:, 1 if which == "hi" else 0]
    return v


def classify_N2_caseA(X=ELW_PAYOFFS, cfg=None, rho_grid=None, t_points=2001, h=SCAN_RESOLUTION):
    """Slices q1 = 0 and q2 = 0: find t = q3^2 where two eigenvalues of Y meet.

    In each slice ``Y`` splits into two 2x2 blocks, so a degeneracy is a root of
    one of the four differences between a block-1 and a block-2 eigenvalue.
    Roots are bracketed on a t grid and bisected.  A root is *top* when the
    shared value is the largest eigenvalue.  For every root the degenerate
    plane is tested for Bob-side consistency.
    """
    rejected = _rejected("N2-caseA", X)
    if rejected:
        return rejected
    cfg = cfg or OracleConfig()
    X = as_payoffs(X)
    if rho_grid is None:
        rho_grid = np.arange(1, 100) / 100
    rho_grid = np.asarray(rho_grid, dtype=float)
    ts = np.linspace(0.0, 1.0, t_points)
    rows, findings = [], []
    top_rhos, any_rhos, identically = set(), set(), []
    failures, consistent_off_half = [], []
    spread = X.spread

    for slice_label in _SLICES:
        blocks = _block_structure(two_atom_Y(slice_quaternion(slice_label, 0.37), 0.3, X))
        for rho in rho_grid:
            Ys = two_atom_Y(slice_quaternion(slice_label, ts), rho, X)
            e1, e2 = _block_eigs(Ys, blocks[0]), _block_eigs(Ys, blocks[1])
            found = False
            for w1, w2 in _PAIRINGS:
                f = e1[w1] - e2[w2]
                if np.abs(f).max() < 1e-12 * max(1.0, spread):
                    identically.append((slice_label, float(rho), w1, w2))
                    found = True
                    top = w1 == "hi" and w2 == "hi"
                    if top:
                        top_rhos.add(float(rho))
                    any_rhos.add(float(rho))
                    rows.append({"slice": slice_label, "rho": rho, "pairing": f"{w1}-{w2}",
                                 "t": "all", "kind": "identical", "top": top})
                    continue
                for idx in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
                    def gap(t, w1=w1, w2=w2):
                        Y = two_atom_Y(slice_quaternion(slice_label, t), rho, X)
                        return float(_block_eigs(Y, blocks[0])[w1] - _block_eigs(Y, blocks[1])[w2])
                    try:
                        t_root = bisect(gap, ts[idx], ts[idx + 1], xtol=ROOT_XTOL)
                    except (ValueError, RuntimeError) as exc:
                        failures.append({"slice": slice_label, "rho": float(rho), "error": str(exc)})
                        continue
                    found = True
                    q = slice_quaternion(slice_label, t_root)
                    Y = two_atom_Y(q, rho, X)
                    eigs = np.linalg.eigvalsh(Y)
                    value = _block_eigs(Y, blocks[0])[w1]
                    top = bool(value >= eigs.max() - 1e-9 * max(1.0, spread))
                    plane = (_block_vector(Y, blocks[0], w1), _block_vector(Y, blocks[1], w2))
                    pc = plane_consistency(plane, (E0, q), X, h=h)
                    any_rhos.add(float(rho))
                    if top:
                        top_rhos.add(float(rho))
                    if pc.consistent and abs(rho - 0.5) > 1e-12:
                        consistent_off_half.append((slice_label, float(rho), float(t_root)))
                    bob = MixedStrategy([rho, 1 - rho], [E0, q])
                    findings.append(make_finding(
                        "degenerate plane: closest Alice measure", pc.alice_strategy(), bob, X, cfg,
                        {"slice": slice_label, "rho": float(rho), "t": float(t_root),
                         "pairing": f"{w1}-{w2}", "top": top}))
                    rows.append({"slice": slice_label, "rho": rho, "pairing": f"{w1}-{w2}",
                                 "t": t_root, "q": q, "kind": "root", "top": top,
                                 "residual_gap": gap(t_root), "value": value,
                                 "bob_min_residual": pc.min_residual, "bob_scan_min": pc.scan_min,
                                 "consistent": pc.consistent})
            if not found:
                rows.append({"slice": slice_label, "rho": rho, "kind": "no degeneracy"})

    # at rho = 1/2 every t is degenerate; the endpoint t = 1 is the axis q = e3
    recovered = []
    for slice_label, rho, w1, w2 in identically:
        if w1 == "hi" and w2 == "hi":
            for t_end in (0.0, 1.0):
                q = slice_quaternion(slice_label, t_end)
                Y = two_atom_Y(q, rho, X)
                eig = maximal_eigenspace(Y)
                if eig.multiplicity != 2:
                    continue
                pc = plane_consistency(tuple(eig.top_basis.T), (E0, q), X, h=h)
                for theta, sigma in pc.solutions:
                    bob = MixedStrategy([rho, 1 - rho], [E0, q])
                    f = make_finding("rho=1/2 endpoint: Bob-consistent", pc.alice_strategy(theta, sigma),
                                     bob, X, cfg, {"slice": slice_label, "rho": rho, "t": t_end,
                                                   "sigma": sigma,
                                                   "theta": "free" if theta is None else theta})
                    findings.append(f)
                    if f.verified:
                        recovered.append({"slice": slice_label, "rho": rho, "q": q, "sigma": sigma,
                                          "theta": "free" if theta is None else theta})

    top_off_half = sorted(r for r in top_rhos if abs(r - 0.5) > 1e-12)
    parts = [f"top-degenerate rho values: {sorted(top_rhos)}"]
    if recovered:
        parts.append("rho=1/2 recovers the axis solution q=" + ", ".join(
            "(" + ", ".join(f"{x:g}" for x in r["q"]) + ")" for r in recovered))
    parts.append("Bob-side consistency " + (
        "fails at every root with rho != 1/2" if not consistent_off_half
        else f"holds at {consistent_off_half}"))
    return CaseResult(
        "N2-caseA", findings,
        {"rho_grid": rho_grid, "t_points": t_points, "root_xtol": ROOT_XTOL,
         "theta_sigma_resolution": h, "slices": list(_SLICES)},
        "; ".join(parts), rows,
        warnings=[f"root finding failed: {f}" for f in failures],
        extras={"top_degenerate_rhos": sorted(top_rhos), "degenerate_rhos": sorted(any_rhos),
                "top_degenerate_off_half": top_off_half,
                "identically_degenerate": identically, "recovered": recovered,
                "consistent_off_half": consistent_off_half})


# ---------------------------------------------------------------------------
# N = 2, case (b): rho = 1/2 and q with at least two nonzero components


def classify_N2_caseB(X=ELW_PAYOFFS, cfg=None, n_grid=500, h=None):
    """At rho = 1/2, ``Y`` commutes with ``m~(q)``; pick ``p1`` with ``p1_0 = 0`` and ``p2 = m~(q) p1``."""
    rejected = _rejected("N2-caseB", X)
    if rejected:
        return rejected
    cfg = cfg or OracleConfig()
    X = as_payoffs(X)
    grid = fibonacci_s2(n_grid)
    controls = np.array([BASIS[1], BASIS[2], BASIS[3], [0, 0, 1 / math.sqrt(2), 1 / math.sqrt(2)]])
    rows, findings = [], []
    worst_comm_Y = worst_comm_Z = worst_pair_gap = 0.0
    passes = []
    for idx, q in enumerate(np.vstack([grid, controls])):
        control = idx >= n_grid
        nonzero = int(np.sum(np.abs(q) > 1e-12))
        Y = two_atom_Y(q, 0.5, X)
        Mq = right_mul_matrix(q)
        comm_Y = float(np.linalg.norm(Y @ Mq - Mq @ Y))
        w = np.linalg.eigvalsh(Y)[::-1]
        pair_gap = float(max(w[0] - w[1], w[2] - w[3]))
        eig = maximal_eigenspace(Y)
        B = eig.top_basis
        if abs(B[0, 0]) < 1e-14 and (B.shape[1] == 1 or abs(B[0, 1]) < 1e-14):
            p1 = B[:, 0]
        else:
            p1 = B[:, 0] * B[0, 1] - B[:, 1] * B[0, 0] if B.shape[1] > 1 else B[:, 0]
        p1 = p1 / np.linalg.norm(p1)
        p2 = Mq @ p1
        Z = 0.5 * (_bob_matrix(p1, X) + _bob_matrix(p2, X))
        Lq = left_mul_matrix(q)
        comm_Z = float(np.linalg.norm(Z @ Lq - Lq @ Z))
        e0_res = maximal_eigenspace(Z).residual(E0)
        pc = plane_consistency((p1, p2), (E0, q), X, h=h)
        if not control:
            worst_comm_Y = max(worst_comm_Y, comm_Y)
            worst_comm_Z = max(worst_comm_Z, comm_Z)
            worst_pair_gap = max(worst_pair_gap, pair_gap)
        mu = MixedStrategy([0.5, 0.5], [p1, p2])
        nu = MixedStrategy([0.5, 0.5], [E0, q])
        f = make_finding("control" if control else "grid", mu, nu, X, cfg,
                         {"q": q, "nonzero_components": nonzero})
        findings.append(f)
        if f.verified:
            passes.append({"q": q, "nonzero_components": nonzero})
        rows.append({"index": idx, "control": control, "q": q, "nonzero_components": nonzero,
                     "comm_Y": comm_Y, "pair_gap": pair_gap, "top_multiplicity": eig.multiplicity,
                     "comm_Z": comm_Z, "e0_residual": e0_res, "bob_min_residual": pc.min_residual,
                     "bob_scan_min": pc.scan_min, "verdict": f.verified})
    multi = [p for p in passes if p["nonzero_components"] >= 2]
    conclusion = (f"{n_grid} grid points: max |[Y, m~(q)]| = {worst_comm_Y:.2e}, "
                  f"max |[Z, m(q)]| = {worst_comm_Z:.2e}; "
                  + ("no solution with two or more nonzero components of q"
                     if not multi else f"solutions at {multi}"))
    return CaseResult("N2-caseB", findings, {"n_grid": n_grid, "grid": "spherical Fibonacci",
                                             "theta_sigma_resolution": h}, conclusion, rows,
                      extras={"max_comm_Y": worst_comm_Y, "max_comm_Z": worst_comm_Z,
                              "max_pair_gap": worst_pair_gap, "passing": passes})


# ---------------------------------------------------------------------------
# N = 2, M = 3 and M = 4


def _T_space(Y, alpha):
    """Orthonormal basis of ``{v : v_alpha = 0, (Y v)_alpha = 0}``."""
    A = np.vstack([np.eye(4)[alpha], Y[alpha]])
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    return Vt[rank:].T


def classify_M3(X=ELW_PAYOFFS, cfg=None, n_grid=500, rho_grid=None):
    """A triple top eigenvalue would contain ``T^(alpha)`` for some alpha; measure how far Y is from scalar on it."""
    rejected = _rejected("M3", X)
    if rejected:
        return rejected
    X = as_payoffs(X)
    if rho_grid is None:
        rho_grid = np.arange(1, 10) / 10
    rows = []
    worst_generic = math.inf
    for q in fibonacci_s2(n_grid):
        for rho in rho_grid:
            Y = two_atom_Y(q, rho, X)
            defects = []
            for alpha in range(4):
                T = _T_space(Y, alpha)
                YT = Y @ T
                lam = np.trace(T.T @ YT) / T.shape[1]
                defects.append(float(np.linalg.norm(YT - lam * T)))
            best = min(defects)
            worst_generic = min(worst_generic, best)
            rows.append({"q": q, "rho": rho, "min_defect": best, "defects": defects})
    # axis q: Y is diagonal and a triple eigenvalue needs three equal entries
    axis_triple = []
    for k in (1, 2, 3):
        perm_diag = np.diag(two_atom_Y(BASIS[k], 0.0, X))
        vals = [(perm_diag[a], X.vector[a] - perm_diag[a]) for a in range(4)]
        for i, j in itertools.combinations(range(4), 2):
            (ai, bi), (aj, bj) = vals[i], vals[j]
            if abs(bi - bj) < 1e-15:
                continue
            rho = (aj - ai) / (bi - bj)
            if 0 < rho < 1:
                d = X.vector * rho + perm_diag * (1 - rho)
                if np.sum(np.abs(d - d[i]) < 1e-12) >= 3:
                    axis_triple.append((k, rho))
        rows.append({"q": BASIS[k], "rho": "all", "axis_triple": bool(axis_triple)})
    conclusion = (f"T^(alpha) never lies in one eigenspace for generic q "
                  f"(smallest defect {worst_generic:.3e} over the scan); "
                  + ("no triple degeneracy on the axes" if not axis_triple
                     else f"axis triple degeneracies at {axis_triple}"))
    return CaseResult("M3", [], {"n_grid": n_grid, "rho_grid": rho_grid}, conclusion, rows,
                      extras={"min_defect": worst_generic, "axis_triple": axis_triple})


def classify_M4(X=ELW_PAYOFFS, cfg=None, n_grid=500, rho_grid=None):
    """``Y = lambda I`` is impossible: generic q leaves off-diagonal terms, axis q needs equal pair sums."""
    rejected = _rejected("M4", X)
    if rejected:
        return rejected
    X = as_payoffs(X)
    if rho_grid is None:
        rho_grid = np.arange(1, 10) / 10
    rows = []
    min_offdiag = math.inf
    for q in fibonacci_s2(n_grid):
        for rho in rho_grid:
            Y = two_atom_Y(q, rho, X)
            off = float(np.linalg.norm(Y - np.diag(np.diag(Y))))
            min_offdiag = min(min_offdiag, off)
            rows.append({"q": q, "rho": rho, "offdiag_norm": off,
                         "diag_spread": float(np.ptp(np.diag(Y)))})
    # two-component example: the (1,2) entry is proportional to q1 q2
    q12 = np.array([0, 1, 1, 0]) / math.sqrt(2)
    Y12 = two_atom_Y(q12, 0.5, X)
    # axis q: diagonal with entries rho X_a + (1 - rho) X_pi(a); scalar only if two pair sums agree
    axis = []
    for k in (1, 2, 3):
        perm_diag = np.diag(two_atom_Y(BASIS[k], 0.0, X))
        pairs = sorted({tuple(sorted((a, int(np.argmin(np.abs(X.vector - perm_diag[a])))))) for a in range(4)})
        sums = [X.vector[a] + X.vector[b] for a, b in pairs]
        axis.append({"q_axis": k, "pairs": pairs, "pair_sums": sums,
                     "scalar_possible": bool(abs(sums[0] - sums[1]) < 1e-12)})
    Y_e3 = maximal_eigenspace(two_atom_Y(BASIS[3], 0.5, X))
    conclusion = (f"Y is never scalar: min off-diagonal norm {min_offdiag:.3e} for generic q; "
                  f"axis q would need equal pair sums; q=e3, rho=1/2 has multiplicities "
                  f"{list(Y_e3.multiplicities)}")
    return CaseResult("M4", [], {"n_grid": n_grid, "rho_grid": rho_grid}, conclusion, rows,
                      extras={"min_offdiag": min_offdiag, "two_component_offdiag": Y12[1, 2],
                              "axis": axis, "e3_half_multiplicities": list(Y_e3.multiplicities),
                              "e3_half_values": list(Y_e3.values)})


def classify_M34(X=ELW_PAYOFFS, cfg=None, n_grid=500):
    return classify_M3(X, cfg, n_grid), classify_M4(X, cfg, n_grid)


# ---------------------------------------------------------------------------
# N >= 3


def _simplex_grid(n, res):
    steps = int(round(1 / res))
    pts = [c for c in itertools.product(range(1, steps), repeat=n - 1) if sum(c) < steps]
    P = np.array([list(c) + [steps - sum(c)] for c in pts], dtype=float)
    return P / steps


def _axis_conditions(diag_rows, support, others):
    """Linear system making the payoff diagonal flat on ``support`` for probabilities on ``others``."""
    A = [diag_rows[:, support[0]] - diag_rows[:, s] for s in support[1:]]
    A.append(np.ones(len(others)))
    b = np.zeros(len(A))
    b[-1] = 1.0
    return np.array(A), b


def _flat_defect(vals, support):
    """How far a diagonal is from being equal on ``support`` and maximal there (0 when exact)."""
    on = vals[..., list(support)]
    off = np.delete(vals, list(support), axis=-1)
    spread = on.max(axis=-1) - on.min(axis=-1)
    excess = np.clip(off.max(axis=-1) - on.min(axis=-1), 0, None) if off.shape[-1] else 0.0
    return spread + excess


def classify_N3plus_i(X=ELW_PAYOFFS, cfg=None, res=1e-2):
    """Both players on three of the four axes: exact solve per support pair plus a probability-simplex scan."""
    rejected = _rejected("N3plus-i", X)
    if rejected:
        return rejected
    cfg = cfg or OracleConfig()
    X = as_payoffs(X)
    # against an axis atom the other player's matrix is diagonal
    PY = np.array([np.diag(best_response_matrix_A(MixedStrategy([1.0], [BASIS[b]]), X).matrix) for b in range(4)])
    PZ = np.array([np.diag(best_response_matrix_B(MixedStrategy([1.0], [BASIS[a]]), X).matrix) for a in range(4)])
    subsets = list(itertools.combinations(range(4), 3))
    simplex = _simplex_grid(3, res)
    rows, findings = [], []

    def solve(diag_by_atom, own, other):
        rows_ = diag_by_atom[list(other)]
        A, b = _axis_conditions(rows_, own, other)
        try:
            probs = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            return None
        if np.any(probs <= 1e-12):
            return None
        vals = probs @ rows_
        return probs if _flat_defect(vals, own) < 1e-10 else None

    for SA, SB in itertools.product(subsets, subsets):
        # Bob's probabilities must flatten Alice's Y on SA; Alice's must flatten Bob's Z on SB
        bob_probs = solve(PY, SA, SB)
        alice_probs = solve(PZ, SB, SA)
        defect_a = _flat_defect(simplex @ PY[list(SB)], SA)
        defect_b = _flat_defect(simplex @ PZ[list(SA)], SB)
        ka, kb = int(np.argmin(defect_a)), int(np.argmin(defect_b))
        if bob_probs is not None and alice_probs is not None:
            mu = MixedStrategy(alice_probs, BASIS[list(SA)])
            nu = MixedStrategy(bob_probs, BASIS[list(SB)])
            desc = "exact solution"
        else:
            mu = MixedStrategy(simplex[kb], BASIS[list(SA)])
            nu = MixedStrategy(simplex[ka], BASIS[list(SB)])
            desc = "closest scan point"
        f = make_finding(desc, mu, nu, X, cfg, {"alice_axes": SA, "bob_axes": SB})
        findings.append(f)
        rows.append({"alice_axes": SA, "bob_axes": SB,
                     "alice_side_min_defect": float(defect_a[ka]),
                     "bob_side_min_defect": float(defect_b[kb]),
                     "alice_side_exact": bob_probs is not None,
                     "bob_side_exact": alice_probs is not None,
                     "verdict": f.verified})
    ok = [f for f in findings if f.verified]
    conclusion = ("no equilibrium with both players on three axes" if not ok
                  else f"{len(ok)} equilibria on three axes")
    return CaseResult("N3plus-i", findings, {"simplex_resolution": res, "support_pairs": len(rows)},
                      conclusion, rows)


def classify_N3plus_ii(X=ELW_PAYOFFS, cfg=None):
    """Both players uniform over an orthonormal frame (taken to be the standard basis)."""
    rejected = _rejected("N3plus-ii", X)
    if rejected:
        return rejected
    cfg = cfg or OracleConfig()
    X = as_payoffs(X)
    mu = nu = uniform(BASIS)
    Y = best_response_matrix_A(nu, X).matrix
    Z = best_response_matrix_B(mu, X).matrix
    f = make_finding("uniform over the standard basis", mu, nu, X, cfg, {"frame": "e0 e1 e2 e3"},
                     flags=(DISCREPANT,))
    mean = float(np.mean(X.vector))
    scalar = bool(np.allclose(Y, mean * np.eye(4), atol=1e-12) and np.allclose(Z, mean * np.eye(4), atol=1e-12))
    conclusion = (f"Y = Z = {mean:g} I, verifier verdict {f.verified}, oracle {f.oracle.passed}; "
                  f"flagged {DISCREPANT}")
    return CaseResult("N3plus-ii", [f], {"frame": "standard basis"}, conclusion,
                      [{"Y_scalar": scalar, "value": mean, "verdict": f.verified,
                        "oracle": f.oracle.passed}],
                      extras={"scalar": scalar, "value": mean})


def classify_N3plus(X=ELW_PAYOFFS, cfg=None):
    return classify_N3plus_i(X, cfg), classify_N3plus_ii(X, cfg)


# ---------------------------------------------------------------------------
# full classification


CASES = {
    "N1": classify_N1,
    "N2-axis": classify_N2_axis,
    "N2-caseA": classify_N2_caseA,
    "N2-caseB": classify_N2_caseB,
    "M3": classify_M3,
    "M4": classify_M4,
    "N3plus-i": classify_N3plus_i,
    "N3plus-ii": classify_N3plus_ii,
}


@dataclass(eq=False)
class CatalogueEntry:
    label: str
    base: Finding
    sources: list
    parameters: dict
    members_checked: int
    members_verified: int
    members_oracle_passed: int
    flags: tuple = ()

    @property
    def flagged(self):
        return bool(self.flags)

    @property
    def all_passed(self):
        return self.members_verified == self.members_checked == self.members_oracle_passed

    def to_json(self):
        return {
            "label": self.label,
            "flags": list(self.flags),
            "sources": sorted(self.sources),
            "parameters": _jsonable(self.parameters),
            "report": self.base.report.to_json(),
            "alice": self.base.alice.to_json(),
            "bob": self.base.bob.to_json(),
            "members_checked": self.members_checked,
            "members_verified": self.members_verified,
            "members_oracle_passed": self.members_oracle_passed,
        }


def _support_key(f):
    return (tuple(np.round(second_moment(f.alice), 8).ravel()),
            tuple(np.round(second_moment(f.bob), 8).ravel()))


def _shift(strategy, r, left):
    pts = [mul(p, r) if left else mul(inverse(r), p) for p in strategy.points]
    return MixedStrategy(strategy.weights, pts)


def _catalogue_members(f, cfg, n_theta=12, n_rotors=3):
    """Members of the orbit of ``f``: stability shifts, sign flips and, when free, the plane angle."""
    rng = np.random.default_rng(cfg.seed)
    rotors = [E0] + [as_unit(v, renormalize=True) for v in rng.normal(size=(n_rotors, 4))]
    theta_free = f.params.get("theta") == "free"
    thetas = [2 * math.pi * k / n_theta for k in range(n_theta)] if theta_free else [None]
    members = []
    for r, sign, theta in itertools.product(rotors, (1, -1), thetas):
        if theta is not None and len(f.alice) == 2 and len(f.bob) == 2:
            plane = tuple(f.alice.points)
            members.append(family_member(plane, tuple(f.bob.points), theta, r, sign)
                           if np.allclose(f.alice.weights, 0.5) else None)
        else:
            mu = _shift(f.alice, r, left=True)
            nu = _shift(f.bob, r, left=False)
            if sign < 0:
                flipped = nu.points.copy()
                flipped[-1] *= -1
                nu = MixedStrategy(nu.weights, flipped)
            members.append((mu, nu))
    params = {"rotors": rotors, "signs": [1, -1], "sigma": f.params.get("sigma")}
    if theta_free:
        params["theta_grid"] = thetas
        params["alice_plane"] = f.alice.points
        params["bob_pair"] = f.bob.points
    return [m for m in members if m is not None], params


@dataclass(eq=False)
class ClassificationReport:
    X: tuple
    cfg: OracleConfig
    cases: list
    catalogue: list

    @property
    def unflagged(self):
        return [e for e in self.catalogue if not e.flagged]

    @property
    def flagged(self):
        return [e for e in self.catalogue if e.flagged]

    def case(self, label):
        for c in self.cases:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_json(self):
        return {
            "payoffs": list(self.X),
            "oracle": self.cfg.to_json(self.X),
            "catalogue": [e.to_json() for e in self.catalogue],
            "cases": [c.to_json() for c in self.cases],
        }

    def summary_json(self):
        return {
            "payoffs": list(self.X),
            "oracle": self.cfg.to_json(self.X),
            "catalogue": [e.to_json() for e in self.catalogue],
            "cases": [{"case": c.label, "status": c.status, "conclusion": c.conclusion,
                       "findings": len(c.findings), "verified": len(c.equilibria),
                       "scan": _jsonable(c.scan)} for c in self.cases],
        }


def build_catalogue(cases, X, cfg):
    """Merge verified findings with the same supports and check their orbits with both verifiers."""
    groups = {}
    for case in cases:
        for f in case.equilibria:
            key = _support_key(f)
            if key in groups:
                groups[key][1].append(case.label)
                if f.params.get("theta") == "free":
                    groups[key][0] = f
            else:
                groups[key] = [f, [case.label]]
    entries = []
    for f, sources in groups.values():
        members, params = _catalogue_members(f, cfg)
        verified = sum(verify_nash(mu, nu, X).verdict for mu, nu in members)
        passed = sum(epsilon_nash_oracle(mu, nu, X, cfg).passed for mu, nu in members)
        label = "family" if f.params.get("theta") == "free" else "isolated"
        if DISCREPANT in f.flags:
            label = "uniform-basis"
        entries.append(CatalogueEntry(label, f, sorted(set(sources)), params, len(members),
                                      int(verified), int(passed), f.flags))
    entries.sort(key=lambda e: (e.flagged, e.label, e.sources))
    return entries


def classify_all(X=ELW_PAYOFFS, cfg=None, cases=None):
    """Run the selected cases (all by default) and assemble the equilibrium catalogue."""
    X = as_payoffs(X)
    generic, violations = genericity_check(X)
    if not generic:
        raise NonGenericPayoffs(violations)
    cfg = cfg or OracleConfig()
    labels = CASE_LABELS if cases is None else tuple(cases)
    unknown = [c for c in labels if c not in CASES]
    if unknown:
        raise ValueError(f"unknown case labels {unknown}; choose from {list(CASE_LABELS)}")
    results = [CASES[label](X, cfg) for label in labels]
    return ClassificationReport(X.X, cfg, results, build_catalogue(results, X, cfg))
