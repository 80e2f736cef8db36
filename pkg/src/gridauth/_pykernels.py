"""Pure-Python hot kernels.

Reference for ``_ckernels.pyx``; both modules expose the same functions
and must agree bit for bit.
"""


def _double(X, Y, Z, a, p):
    if Z == 0 or Y == 0:
        return 0, 1, 0
    YY = Y * Y % p
    ZZ = Z * Z % p
    S = 4 * X * YY % p
    M = (3 * X * X + a * ZZ * ZZ) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YY * YY) % p
    Z3 = 2 * Y * Z % p
    return X3, Y3, Z3


def _add_affine(X, Y, Z, x, y, a, p):
    # Jacobian (X, Y, Z) + affine (x, y)
    if Z == 0:
        return x, y, 1
    ZZ = Z * Z % p
    U2 = x * ZZ % p
    S2 = y * ZZ * Z % p
    H = (U2 - X) % p
    R = (S2 - Y) % p
    if H == 0:
        if R == 0:
            return _double(X, Y, Z, a, p)
        return 0, 1, 0
    HH = H * H % p
    HHH = HH * H % p
    V = X * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - Y * HHH) % p
    Z3 = Z * H % p
    return X3, Y3, Z3


def ec_mul(k, x, y, a, p):
    """Return ``k * (x, y)`` on ``y^2 = x^3 + a*x + b`` over GF(p).

    The base point is affine and not the identity; ``k >= 0``.  The result
    is an affine ``(x, y)`` tuple, or ``None`` for the point at infinity.
    """
    if k <= 0:
        return None
    X, Y, Z = x, y, 1
    for i in range(k.bit_length() - 2, -1, -1):
        X, Y, Z = _double(X, Y, Z, a, p)
        if (k >> i) & 1:
            X, Y, Z = _add_affine(X, Y, Z, x, y, a, p)
    if Z == 0:
        return None
    zi = pow(Z, -1, p)
    zi2 = zi * zi % p
    return X * zi2 % p, Y * zi2 * zi % p


def majority_decode(word, rho):
    """Decode a repetition codeword given as one 0/1 value per byte.

    Each consecutive ``rho``-byte block maps to the majority bit; ties
    (only possible for even ``rho``) decode to 0.
    """
    n = len(word)
    if rho <= 0 or n % rho:
        raise ValueError("codeword length %d is not a multiple of %d" % (n, rho))
    half = rho // 2
    return bytes(
        1 if sum(word[i:i + rho]) > half else 0 for i in range(0, n, rho)
    )
