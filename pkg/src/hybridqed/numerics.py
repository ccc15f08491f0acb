"""Dense/sparse complex linear algebra backend.

All routines are pure functions of their inputs. Matrices may be numpy arrays
or scipy sparse matrices; superoperators below ``DENSE_LIMIT`` rows are
handled densely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceFailure,
    DegenerateKernel,
    NonHermitianInput,
    SingularMatrix,
    StepFailure,
)

#: Operators with fewer rows than this are handled with dense LAPACK routines.
DENSE_LIMIT = 40 ** 2

HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-9
COND_LIMIT = 1e14
KERNEL_GAP = 1e-6
REFINEMENT_STEPS = 2
#: Bordered systems at most this dense (nonzeros per row) are factorized directly;
#: denser ones use GMRES preconditioned by the supplied approximation.
DIRECT_NNZ_PER_ROW = 12


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return len(self.values)

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values) @ v.conj().T


def _dense(m) -> np.ndarray:
    if sp.issparse(m):
        return m.toarray()
    return np.asarray(m)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate each column so that its largest-magnitude entry is real positive."""
    v = np.array(v, dtype=complex, copy=True)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    # rounding keeps the pivot choice stable against last-bit noise
    mags = np.round(np.abs(v), 12)
    idx = np.argmax(mags, axis=0)
    piv = v[idx, np.arange(v.shape[1])]
    nz = np.abs(piv) > 0
    v[:, nz] *= (np.abs(piv[nz]) / piv[nz])[None, :]
    return v[:, 0] if squeeze else v


def _canonical_degenerate_basis(sub: np.ndarray) -> np.ndarray:
    # Echelon basis of the degenerate subspace: the first vector has the
    # largest weight on the lowest-index bare state, the second has none there, ...
    q, _ = scipy.linalg.qr(sub.T)
    return sub @ q.conj()


def hermitian_eig(m, *, hermitian_tol: float = HERMITIAN_TOL,
                  degeneracy_tol: float = DEGENERACY_TOL) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix with deterministic output.

    Eigenvalues are ascending. Eigenvalues closer than ``degeneracy_tol`` are
    treated as one degenerate level whose basis is put in echelon form with
    respect to the input basis ordering. Every eigenvector is phase-fixed with
    :func:`fix_phase`.

    Raises
    ------
    NonHermitianInput
        If ``max|m - m^H| > hermitian_tol * max|m|``.
    ConvergenceFailure
        If LAPACK fails to converge.
    """
    m = _dense(m).astype(complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonHermitianInput("matrix has non-finite entries")
    scale = np.max(np.abs(m)) if m.size else 0.0
    asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if asym > hermitian_tol * max(scale, np.finfo(float).tiny):
        raise NonHermitianInput(f"Hermiticity residual {asym:.3e} exceeds tolerance")
    h = 0.5 * (m + m.conj().T)
    try:
        w, v = scipy.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc

    n = len(w)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] < degeneracy_tol:
            stop += 1
        if stop - start > 1:
            v[:, start:stop] = _canonical_degenerate_basis(v[:, start:stop])
        start = stop
    return EigenDecomposition(values=w, vectors=fix_phase(v))


def linear_solve(A, rhs, *, cond_limit: float = COND_LIMIT,
                 residual_tol: float = 1e-10) -> np.ndarray:
    """Solve ``A x = rhs`` for dense or sparse square ``A``.

    One step of iterative refinement is applied when the first residual
    exceeds ``residual_tol``.

    Raises
    ------
    SingularMatrix
        If the condition estimate exceeds ``cond_limit``.
    """
    rhs = np.asarray(rhs, dtype=complex)
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    bnorm = np.linalg.norm(rhs)
    if sp.issparse(A):
        A = sp.csc_matrix(A, dtype=complex)
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise SingularMatrix(str(exc)) from exc
        inv = spla.LinearOperator(A.shape, matvec=lu.solve,
                                  rmatvec=lambda y: lu.solve(y, trans="H"),
                                  dtype=complex)
        cond = spla.onenormest(A) * spla.onenormest(inv)
        solve = lu.solve
    else:
        A = np.asarray(A, dtype=complex)
        cond = np.linalg.cond(A)
        lu = None
        if np.isfinite(cond) and cond <= cond_limit:
            lu = scipy.linalg.lu_factor(A)

        def solve(b):
            return scipy.linalg.lu_solve(lu, b)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularMatrix(f"condition estimate {cond:.3e} exceeds {cond_limit:.1e}")
    if bnorm == 0:
        return np.zeros(A.shape[0], dtype=complex)
    x = solve(rhs)
    r = rhs - A @ x
    if np.linalg.norm(r) > residual_tol * bnorm:
        x = x + solve(r)
    return x


def _bordered(L, u, w):
    n = L.shape[0]
    return sp.bmat([[sp.csc_matrix(L), sp.csc_matrix(u.reshape(n, 1))],
                    [sp.csc_matrix(w.reshape(1, n)), None]], format="csc")


def _spectral_norm_bound(A):
    # ||A||_2 <= sqrt(||A||_1 ||A||_inf), cheap and deterministic
    return float(np.sqrt(spla.norm(A, 1) * spla.norm(A, np.inf)))


def null_vector(L, *, normalization=None, preconditioner=None,
                check_gap: bool = True, gap: float = KERNEL_GAP,
                residual_tol: float = 1e-9) -> np.ndarray:
    """One-dimensional kernel of ``L``.

    Parameters
    ----------
    L : array or sparse matrix
    normalization : array, optional
        Row vector ``w``; the result is scaled so that ``w @ x == 1``. When
        omitted the result has unit 2-norm and fixed phase.
    preconditioner : sparse matrix, optional
        An approximation of ``L`` (same sparsity class) whose LU factorization
        is used to precondition GMRES on the sparse path. Without it the
        sparse path factorizes ``L`` directly.
    check_gap : bool
        Verify that the kernel is one-dimensional.

    Notes
    -----
    Below ``DENSE_LIMIT`` rows the kernel comes from a full SVD and the
    one-dimensionality test uses the second-smallest singular value. Above,
    the bordered system ``[[L, u], [w, 0]]`` with ``u = conj(w)`` is solved
    and its smallest singular value is estimated by inverse power iteration.

    Raises
    ------
    DegenerateKernel
        If the kernel is (numerically) more than one-dimensional.
    ConvergenceFailure
        If the returned vector fails the residual check.
    """
    n = L.shape[0]
    w = None if normalization is None else np.asarray(normalization, dtype=complex)
    if n < DENSE_LIMIT:
        Ld = _dense(L).astype(complex)
        _, s, vh = scipy.linalg.svd(Ld)
        x = vh[-1].conj()
        if check_gap and n > 1 and s[-2] < gap * s[0]:
            raise DegenerateKernel(
                f"second-smallest singular value {s[-2]:.3e} < {gap:g} x {s[0]:.3e}")
        lnorm = s[0]
    else:
        if w is None:
            w = np.ones(n, dtype=complex)
        L = sp.csc_matrix(L, dtype=complex)
        u = w.conj() / np.linalg.norm(w)
        B = _bordered(L, u, w)
        rhs = np.zeros(n + 1, dtype=complex)
        rhs[-1] = 1.0
        direct = preconditioner is None or B.nnz <= DIRECT_NNZ_PER_ROW * B.shape[0]
        solve, solve_h = _bordered_solvers(B, None if direct
                                           else _bordered(preconditioner, u, w))
        sol = solve(rhs)
        # Refinement resolves entries far below the global residual scale
        for _ in range(REFINEMENT_STEPS):
            r = rhs - B @ sol
            if not np.any(r):
                break
            sol = sol + solve(r)
        x = sol[:n]
        lnorm = _spectral_norm_bound(L)
        if check_gap:
            smin = _smallest_singular_estimate(solve, solve_h, n + 1)
            if smin < gap * _spectral_norm_bound(B):
                raise DegenerateKernel(
                    f"bordered system nearly singular (sigma_min ~ {smin:.3e})")
    if w is not None:
        scale = w @ x
        if scale == 0:
            raise DegenerateKernel("kernel vector is orthogonal to the normalization row")
        x = x / scale
    else:
        x = fix_phase(x / np.linalg.norm(x))
    res = np.linalg.norm(L @ x)
    if res > residual_tol * lnorm * np.linalg.norm(x):
        raise ConvergenceFailure(f"kernel residual {res:.3e} too large")
    return x


def _bordered_solvers(B, P):
    try:
        lu = spla.splu(B if P is None else P)
    except RuntimeError as exc:
        raise DegenerateKernel(f"bordered system is singular: {exc}") from exc
    if P is None:
        return lu.solve, (lambda y: lu.solve(y, trans="H"))
    M = spla.LinearOperator(B.shape, matvec=lu.solve, dtype=complex)
    Mh = spla.LinearOperator(B.shape, matvec=lambda y: lu.solve(y, trans="H"),
                             dtype=complex)
    Bh = B.conj().T.tocsc()

    def _gmres(A, pre, b):
        x, info = spla.gmres(A, b, M=pre, rtol=1e-13, atol=0.0,
                             restart=60, maxiter=500)
        if info != 0:
            raise ConvergenceFailure(f"GMRES did not converge (info={info})")
        return x

    return (lambda b: _gmres(B, M, b)), (lambda b: _gmres(Bh, Mh, b))


def _smallest_singular_estimate(solve, solve_h, n, iters=3):
    rng = np.random.default_rng(2024)
    z = rng.standard_normal(n) + 0j
    lam = 0.0
    for _ in range(iters):
        z /= np.linalg.norm(z)
        z = solve_h(solve(z))
        lam = np.linalg.norm(z)
    return 1.0 / np.sqrt(lam) if lam > 0 else np.inf


def propagate(L, v0, t: float) -> np.ndarray:
    """Return ``exp(L t) v0``.

    Raises
    ------
    StepFailure
        If the result is not finite.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    v0 = np.asarray(v0, dtype=complex)
    if t == 0:
        return v0.copy()
    out = spla.expm_multiply(t * _as_operand(L), v0)
    if not np.all(np.isfinite(out)):
        raise StepFailure(f"non-finite state after propagation to t={t}")
    return out


def propagate_grid(L, v0, times) -> np.ndarray:
    """``exp(L t) v0`` for every ``t`` in an ascending grid; one row per time."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-D grid")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and ascending")
    v0 = np.asarray(v0, dtype=complex)
    A = _as_operand(L)
    steps = np.diff(times)
    if len(times) > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0):
        out = spla.expm_multiply(A, v0, start=times[0], stop=times[-1],
                                 num=len(times), endpoint=True)
    else:
        out = np.empty((len(times), len(v0)), dtype=complex)
        v = propagate(A, v0, times[0])
        out[0] = v
        for i, dt in enumerate(steps, start=1):
            v = propagate(A, v, dt) if dt > 0 else v
            out[i] = v
    if not np.all(np.isfinite(out)):
        raise StepFailure("non-finite state during grid propagation")
    return out


def _as_operand(L):
    if sp.issparse(L):
        return sp.csr_matrix(L)
    return np.asarray(L, dtype=complex)
