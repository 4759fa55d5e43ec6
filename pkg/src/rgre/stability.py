"""Linear stability analysis for multistep methods and their extrapolations.

Membership in the region of absolute stability is decided through the roots
of the characteristic polynomial

    pi(z; mu) = rho(z) - mu * sigma(z),
    rho(z) = sum_j alpha_j z^j,   sigma(z) = sum_j beta_j z^j,

with mu = h*lambda. The extrapolated method combines runs on steps h/2^j, so
its region is implemented as the intersection over j = 0..ell of the base
tests at mu/2^j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .methods import LmmCoefficients

ROOT_TOL = 1e-9  # default tolerance for unit-modulus / simplicity / exclusion tests


def companion_matrix(coeffs: LmmCoefficients) -> np.ndarray:
    """k x k companion matrix of the alpha polynomial.

    First row is (-alpha_{k-1}, ..., -alpha_0) / alpha_k; the block below is
    the (k-1) x (k-1) identity. By consistency 1 is always an eigenvalue.
    """
    k = coeffs.k
    mat = np.zeros((k, k))
    mat[0, :] = -coeffs.alpha[k - 1:: -1] / coeffs.alpha[k]
    if k > 1:
        mat[1:, : k - 1] = np.eye(k - 1)
    return mat


@dataclass(frozen=True)
class RootConditionReport:
    satisfied: bool
    eigenvalues: np.ndarray
    message: str

    def __bool__(self) -> bool:
        return self.satisfied


def check_root_condition(coeffs: LmmCoefficients, tol: float = 1e-8) -> RootConditionReport:
    """Zero-stability: companion spectrum in the closed unit disk, the only
    unit-modulus eigenvalue being a simple eigenvalue at 1."""
    eig = np.linalg.eigvals(companion_matrix(coeffs))
    moduli = np.abs(eig)
    if np.any(moduli > 1.0 + tol):
        worst = eig[np.argmax(moduli)]
        return RootConditionReport(False, eig,
                                   f"eigenvalue {worst:.6g} has modulus {abs(worst):.6g} > 1")
    on_circle = np.abs(moduli - 1.0) <= tol
    n_on = int(np.count_nonzero(on_circle))
    if n_on != 1:
        return RootConditionReport(False, eig,
                                   f"{n_on} eigenvalues lie on the unit circle, expected exactly 1")
    principal = eig[on_circle][0]
    if abs(principal - 1.0) > tol:
        return RootConditionReport(False, eig,
                                   f"unit-modulus eigenvalue {principal:.6g} is not 1")
    return RootConditionReport(True, eig, "spectrum satisfies the root condition")


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    mu: complex
    stable: bool
    excluded: bool
    max_root_modulus: float | None


@dataclass(frozen=True, eq=False)
class BoundaryLocus:
    theta_samples: np.ndarray
    mu_points: np.ndarray  # complex mu(theta) = rho(e^{i theta}) / sigma(e^{i theta})


# ---------------------------------------------------------------------------
# vectorized membership core
# ---------------------------------------------------------------------------

def _roots_batch(coeff_rows: np.ndarray) -> np.ndarray:
    """Roots of many degree-k polynomials (rows of ascending-power coefficients)
    via stacked companion-matrix eigenvalues. Rows must have nonzero leads."""
    n, width = coeff_rows.shape
    k = width - 1
    monic = coeff_rows / coeff_rows[:, -1:]
    comp = np.zeros((n, k, k), dtype=complex)
    comp[:, 0, :] = -monic[:, k - 1:: -1]
    if k > 1:
        comp[:, 1:, : k - 1] = np.eye(k - 1)
    return np.linalg.eigvals(comp)


def membership(coeffs: LmmCoefficients, mus: np.ndarray, tol: float = ROOT_TOL):
    """Classify many mu values at once.

    Returns (stable, excluded, max_root_modulus) arrays. A point is excluded
    when the leading coefficient alpha_k - mu*beta_k (nearly) vanishes; there
    max_root_modulus is NaN. Stability requires every root modulus <= 1 - tol
    or within tol of 1 while simple (|pi'(root)| > tol).
    """
    mus = np.asarray(mus, dtype=complex).ravel()
    k = coeffs.k
    rows = coeffs.alpha[None, :] - mus[:, None] * coeffs.beta[None, :]
    excluded = np.abs(rows[:, k]) < tol

    stable = np.zeros(mus.shape, dtype=bool)
    max_mod = np.full(mus.shape, np.nan)
    active = ~excluded
    if np.any(active):
        roots = _roots_batch(rows[active])
        moduli = np.abs(roots)
        max_mod[active] = moduli.max(axis=1)

        inside = moduli <= 1.0 - tol
        near_unit = np.abs(moduli - 1.0) <= tol
        # pi'(z) = sum_{j>=1} j c_j z^{j-1}, evaluated at each root
        deriv_coeffs = rows[active][:, 1:] * np.arange(1, k + 1)
        deriv = np.zeros_like(roots)
        power = np.ones_like(roots)
        for j in range(k):
            deriv += deriv_coeffs[:, j][:, None] * power
            power = power * roots
        simple = np.abs(deriv) > tol
        stable[active] = np.all(inside | (near_unit & simple), axis=1)
    return stable, excluded, max_mod


def rgre_membership(coeffs: LmmCoefficients, mus: np.ndarray, ell: int,
                    tol: float = ROOT_TOL):
    """Intersection membership: stable iff mu / 2^j passes the base test for
    every component grid j = 0..ell, none of them excluded."""
    mus = np.asarray(mus, dtype=complex).ravel()
    stable = np.ones(mus.shape, dtype=bool)
    excluded = np.zeros(mus.shape, dtype=bool)
    max_mod = np.full(mus.shape, -np.inf)
    for j in range(ell + 1):
        s_j, e_j, m_j = membership(coeffs, mus / 2 ** j, tol)
        stable &= s_j
        excluded |= e_j
        max_mod = np.fmax(max_mod, m_j)
    stable &= ~excluded
    max_mod[excluded] = np.nan
    return stable, excluded, max_mod


def in_stability_region(coeffs: LmmCoefficients, mu: complex,
                        tol: float = ROOT_TOL) -> StabilityVerdict:
    stable, excluded, max_mod = membership(coeffs, np.array([mu]), tol)
    if excluded[0]:
        return StabilityVerdict(complex(mu), False, True, None)
    return StabilityVerdict(complex(mu), bool(stable[0]), False, float(max_mod[0]))


def in_rgre_stability_region(coeffs: LmmCoefficients, ell: int, mu: complex,
                             tol: float = ROOT_TOL) -> StabilityVerdict:
    if ell < 1:
        raise ValueError("ell must be at least 1; use in_stability_region for the base method")
    stable, excluded, max_mod = rgre_membership(coeffs, np.array([mu]), ell, tol)
    if excluded[0]:
        return StabilityVerdict(complex(mu), False, True, None)
    return StabilityVerdict(complex(mu), bool(stable[0]), False, float(max_mod[0]))


# ---------------------------------------------------------------------------
# boundary locus and sector angles
# ---------------------------------------------------------------------------

def boundary_locus(coeffs: LmmCoefficients, n_theta: int = 1024) -> BoundaryLocus:
    """Sample mu(theta) = rho(e^{i theta}) / sigma(e^{i theta}) uniformly in theta,
    skipping poles of sigma."""
    if n_theta < 16:
        raise ValueError("n_theta must be at least 16")
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    z = np.exp(1j * theta)
    rho = np.polyval(coeffs.alpha[::-1], z)
    sigma = np.polyval(coeffs.beta[::-1], z)
    keep = np.abs(sigma) > 1e-12
    if not np.any(keep):
        raise ValueError("sigma vanishes at every sample; no boundary locus")
    return BoundaryLocus(theta[keep], rho[keep] / sigma[keep])


def _sector_gap(mu: np.ndarray) -> np.ndarray:
    """Angular distance of each point from the negative real axis, i.e.
    |arg(-mu)| in [0, pi]."""
    return math.pi - np.abs(np.angle(mu))


def _critical_radii(coeffs: LmmCoefficients, ell: int) -> np.ndarray:
    """Radii where the region boundary comes angularly closest to the left
    sector. Log-spaced probing alone cannot resolve the tangency (the ray
    grazes the boundary lobe), so the bisection probes these radii too."""
    locus = boundary_locus(coeffs, 8192)
    mu = locus.mu_points
    mask = np.abs(mu) > 1e-9
    mu = mu[mask]
    theta = locus.theta_samples[mask]
    if mu.size == 0:
        return np.array([])
    gaps = _sector_gap(mu)
    idx = int(np.argmin(gaps))

    def gap_at(t: float) -> float:
        z = complex(math.cos(t), math.sin(t))
        val = np.polyval(coeffs.alpha[::-1], z) / np.polyval(coeffs.beta[::-1], z)
        if abs(val) < 1e-12:
            return math.pi
        return math.pi - abs(np.angle(val))

    span = 2.0 * math.pi / locus.theta_samples.size
    res = minimize_scalar(gap_at, bounds=(theta[idx] - span, theta[idx] + span),
                          method="bounded", options={"xatol": 1e-12})
    z = complex(math.cos(res.x), math.sin(res.x))
    r_star = abs(np.polyval(coeffs.alpha[::-1], z) / np.polyval(coeffs.beta[::-1], z))
    radii = r_star * np.geomspace(0.98, 1.02, 9)
    return np.concatenate([radii * 2 ** j for j in range(ell + 1)])


def alpha_angle(coeffs: LmmCoefficients, ell: int = 0, angular_tol: float = 0.01) -> float | None:
    """Largest sector half-angle alpha (degrees) such that every probe with
    |arg(-mu)| <= alpha is stable; None if even the negative real axis fails.

    Probes lie on rays packed against the candidate angle, at 60 log-spaced
    radii in [1e-3, 1e6] plus radii where the boundary is angularly closest
    to the sector (and their 2^j multiples for extrapolated regions). The
    angle is located by bisection to angular_tol degrees and capped at 90.
    """
    radii = np.geomspace(1e-3, 1e6, 60)
    extra = _critical_radii(coeffs, ell)
    if extra.size:
        radii = np.unique(np.concatenate([radii, extra]))

    def ray_stable(phi: float) -> bool:
        fractions = (1.0, 0.9, 0.75, 0.5, 0.25) if phi > 0 else (1.0,)
        for frac in fractions:
            mus = -radii * np.exp(1j * phi * frac)
            if ell == 0:
                stable, excluded, _ = membership(coeffs, mus)
            else:
                stable, excluded, _ = rgre_membership(coeffs, mus, ell)
            if not np.all(stable & ~excluded):
                return False
        return True

    if not ray_stable(0.0):
        return None
    hi = math.pi / 2.0
    if ray_stable(hi):
        return 90.0
    lo = 0.0
    tol_rad = math.radians(angular_tol)
    while hi - lo > tol_rad:
        mid = 0.5 * (lo + hi)
        if ray_stable(mid):
            lo = mid
        else:
            hi = mid
    return math.degrees(lo)


# ---------------------------------------------------------------------------
# sampled regions (CSV export, inclusion tests)
# ---------------------------------------------------------------------------

def sample_region(coeffs: LmmCoefficients, ell: int, re_range: tuple[float, float],
                  im_range: tuple[float, float], nx: int, ny: int,
                  tol: float = ROOT_TOL):
    """Classify a rectangular mu grid; returns (mus, stable, excluded) with the
    grid flattened row-major (imaginary part varying slowest)."""
    res = np.linspace(re_range[0], re_range[1], nx)
    ims = np.linspace(im_range[0], im_range[1], ny)
    grid = (res[None, :] + 1j * ims[:, None]).ravel()
    if ell == 0:
        stable, excluded, _ = membership(coeffs, grid, tol)
    else:
        stable, excluded, _ = rgre_membership(coeffs, grid, ell, tol)
    return grid, stable, excluded


def distance_to_locus(points: np.ndarray, coeffs: LmmCoefficients, ell: int = 0,
                      n_theta: int = 131072) -> np.ndarray:
    """Distance from each complex point to the sampled region boundary
    (the boundary locus, plus its 2^j-scaled copies for extrapolated regions)."""
    from scipy.spatial import cKDTree

    locus = boundary_locus(coeffs, n_theta).mu_points
    copies = [locus * 2 ** j for j in range(ell + 1)]
    boundary = np.concatenate(copies)
    tree = cKDTree(np.column_stack([boundary.real, boundary.imag]))
    pts = np.asarray(points, dtype=complex).ravel()
    dist, _ = tree.query(np.column_stack([pts.real, pts.imag]))
    return dist
