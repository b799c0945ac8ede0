"""Dense reference implementations used as independent oracles."""
import numpy as np


def dense_op1(m, q, n):
    """Full 2^n matrix of ``m`` on qubit ``q`` (qubit 0 is the rightmost factor)."""
    out = np.eye(1, dtype=complex)
    for k in reversed(range(n)):
        out = np.kron(out, m if k == q else np.eye(2))
    return out


def dense_op2(m, q0, q1, n):
    """Full matrix of a 4x4 ``m`` acting on ``|b(q0) b(q1)>`` built elementwise."""
    d = 1 << n
    out = np.zeros((d, d), dtype=complex)
    for col in range(d):
        b0, b1 = (col >> q0) & 1, (col >> q1) & 1
        s = 2 * b0 + b1
        rest = col & ~((1 << q0) | (1 << q1))
        for r in range(4):
            row = rest | ((r >> 1) << q0) | ((r & 1) << q1)
            out[row, col] += m[r, s]
    return out


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_amps(n, rng):
    a = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return a / np.linalg.norm(a)


def bit_permutation(perm, n):
    """Permutation matrix sending bit ``q`` of the index to bit ``perm[q]``."""
    d = 1 << n
    out = np.zeros((d, d))
    for k in range(d):
        j = sum(((k >> q) & 1) << perm[q] for q in range(n))
        out[j, k] = 1.0
    return out


def kron_op2(m, q0, q1, n):
    """Same as :func:`dense_op2` but from ``kron(m, I)`` and a bit permutation.

    ``kron(m, I)`` acts with ``m`` on the two highest bits (``n-1`` high,
    ``n-2`` low); the permutation moves ``q0 -> n-1`` and ``q1 -> n-2``.
    """
    others = [q for q in range(n) if q not in (q0, q1)]
    perm = [0] * n
    perm[q0], perm[q1] = n - 1, n - 2
    for pos, q in enumerate(others):
        perm[q] = pos
    p = bit_permutation(perm, n)
    return p.T @ np.kron(m, np.eye(1 << (n - 2))) @ p
