"""Fourier-diagonal backend: K = Lambda^{-1} on an equispaced grid.

With N = 2 k_max nodes the DtN inverse is applied exactly by FFT.  For the
dense Newton solve the operator is reduced to the D_m-symmetric subspace
(values on [0, pi/m]) by summing the circulant kernel over each orbit.
"""
import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse.linalg import LinearOperator, gmres

from ..errors import SingularJacobian
from ..greenkernel import spectrum
from ..specfun import K_MAX_DEFAULT
from .mesh import UniformGrid


class SpectralOperator:
    backend = "spectral"

    def __init__(self, m=1, k_max=K_MAX_DEFAULT):
        # the grid must carry the symmetry, so k_max is rounded up to a multiple of m
        self.k_max = m * (-(-int(k_max) // m))
        self.grid = UniformGrid(2 * self.k_max, m)
        self.m = m
        self.inv_lam = 1.0 / spectrum(self.k_max).lam
        self._matrix = None

    @property
    def n(self):
        return self.grid.n_fund

    def full(self, f):
        return self.grid.expand(f)

    def apply_full(self, f_full):
        """Lambda^{-1} f on the whole grid."""
        return np.fft.irfft(np.fft.rfft(f_full) * self.inv_lam, self.grid.n)

    def apply(self, f):
        return self.apply_full(self.full(f))[: self.n]

    @property
    def matrix(self):
        if self._matrix is None:
            N, m, n = self.grid.n, self.m, self.n
            c = np.fft.irfft(self.inv_lam, N)
            i = np.arange(n)
            diff = np.subtract.outer(i, i)
            K = np.zeros((n, n))
            for s in range(m):
                sh = s * N // m
                K += c[(diff - sh) % N]
                K += c[(np.add.outer(i, i) - sh) % N]
            # f = 0 and f = N/2m are their own mirror images
            K[:, 0] *= 0.5
            K[:, -1] *= 0.5
            self._matrix = K
        return self._matrix

    def jacobian_solve(self, d, rhs):
        """Solve (I - K diag(d)) x = rhs on the symmetric subspace.

        K is applied by FFT and the system is solved by GMRES, preconditioned
        with the Fourier-diagonal operator (I - mean(d) K)^{-1}; the dense
        reduced matrix is the fallback when GMRES stalls.
        """
        n = self.n
        dbar = float(np.mean(self.full(d)))
        pre = 1.0 - dbar * self.inv_lam
        if np.min(np.abs(pre)) > 1e-8:
            def prec(y):
                return np.fft.irfft(np.fft.rfft(self.full(y)) / pre, self.grid.n)[:n]

            def mat(y):
                z = prec(y)
                return z - self.apply(d * z)

            A = LinearOperator((n, n), matvec=mat, dtype=float)
            z, info = gmres(A, rhs, rtol=1e-14, atol=0.0, restart=120, maxiter=4)
            if info == 0:
                x = prec(z)
                r = rhs - (x - self.apply(d * x))
                if np.max(np.abs(r)) <= 1e-12 * max(1.0, np.max(np.abs(rhs))):
                    return x
        J = np.eye(n) - self.matrix * d[None, :]
        lu = lu_factor(J)
        if np.min(np.abs(np.diag(lu[0]))) == 0.0:
            raise SingularJacobian("zero pivot in the spectral Jacobian")
        return lu_solve(lu, rhs)

    def modes(self, f):
        """Complex Fourier coefficients of K[f] for k = 0..k_max (rfft scaled by 1/N)."""
        return np.fft.rfft(self.full(f)) * self.inv_lam / self.grid.n

    def evaluate(self, f, theta):
        """K[f] at arbitrary angles by summing the Fourier series."""
        return _fourier_eval(self.modes(f), theta)

    def interpolate(self, u, theta):
        """Trigonometric interpolant of nodal values at arbitrary angles."""
        F = np.fft.rfft(self.full(u)) / self.grid.n
        return _fourier_eval(F, theta)


def _fourier_eval(F, theta):
    """Real trigonometric sum with rfft-style coefficients (Nyquist counted once)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k = np.arange(F.size)
    wgt = np.full(F.size, 2.0)
    wgt[0] = 1.0
    wgt[-1] = 1.0
    c = wgt * F
    out = np.empty(theta.size)
    for r0 in range(0, theta.size, 256):
        sl = slice(r0, r0 + 256)
        out[sl] = np.real(np.exp(1j * np.outer(theta[sl], k)) @ c)
    return out
