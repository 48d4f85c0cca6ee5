# cython: language_level=3
"""Compiled arithmetic kernel: GMP-backed twin of _purekernel.PureKernel.

Same contract, operation for operation — points are (x, y) int tuples with
None at infinity, F_{q^2} elements are (a, b) int tuples — but the ladders run
on mpz_t locals with no Python objects inside the loops.  Python ints cross
the boundary once per call via big-endian byte export/import.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AsString

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef unsigned long mp_bitcnt_t

    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    void mpz_set(mpz_t, mpz_t)
    void mpz_set_ui(mpz_t, unsigned long)
    int mpz_cmp(mpz_t, mpz_t)
    int mpz_cmp_ui(mpz_t, unsigned long)
    int mpz_sgn(mpz_t)
    void mpz_add(mpz_t, mpz_t, mpz_t)
    void mpz_sub(mpz_t, mpz_t, mpz_t)
    void mpz_mul(mpz_t, mpz_t, mpz_t)
    void mpz_mod(mpz_t, mpz_t, mpz_t)
    void mpz_powm(mpz_t, mpz_t, mpz_t, mpz_t)
    int mpz_invert(mpz_t, mpz_t, mpz_t)
    size_t mpz_sizeinbase(mpz_t, int)
    int mpz_tstbit(mpz_t, mp_bitcnt_t)
    void mpz_import(mpz_t, size_t, int, size_t, int, size_t, void *)
    void mpz_export(void *, size_t *, int, size_t, int, size_t, mpz_t)


# ---------------------------------------------------------------------------
# Python int <-> mpz boundary
# ---------------------------------------------------------------------------

cdef int _set_mpz(mpz_t out, object v) except -1:
    cdef bytes b
    if v < 0:
        raise ValueError("negative value crossing kernel boundary")
    b = v.to_bytes((v.bit_length() + 7) // 8 or 1, "big")
    mpz_import(out, len(b), 1, 1, 1, 0, <char *> b)
    return 0


cdef object _get_int(mpz_t v):
    cdef size_t n = (mpz_sizeinbase(v, 2) + 7) // 8
    cdef size_t written = 0
    if mpz_sgn(v) == 0:
        return 0
    buf = PyBytes_FromStringAndSize(NULL, n)
    mpz_export(PyBytes_AsString(buf), &written, 1, 1, 1, 0, v)
    return int.from_bytes(buf[:written], "big")


# ---------------------------------------------------------------------------
# modular helpers; operands must already be reduced into [0, q)
# ---------------------------------------------------------------------------

cdef inline void addm(mpz_t r, mpz_t a, mpz_t b, mpz_t q):
    mpz_add(r, a, b)
    if mpz_cmp(r, q) >= 0:
        mpz_sub(r, r, q)

cdef inline void subm(mpz_t r, mpz_t a, mpz_t b, mpz_t q):
    mpz_sub(r, a, b)
    if mpz_sgn(r) < 0:
        mpz_add(r, r, q)

cdef inline void mulm(mpz_t r, mpz_t a, mpz_t b, mpz_t q):
    mpz_mul(r, a, b)
    mpz_mod(r, r, q)

cdef inline void negm(mpz_t r, mpz_t a, mpz_t q):
    if mpz_sgn(a) == 0:
        mpz_set_ui(r, 0)
    else:
        mpz_sub(r, q, a)


cdef class FastKernel:
    """Arithmetic for one curve: E(F_q)[p] and mu_p in F_{q^2}."""

    cdef mpz_t q_z, p_z, h_z, sqrt_z
    cdef readonly object q, p, h
    cdef readonly str name
    cdef bytes h_naf          # NAF digits of h, MSB first, encoded 0/1/2
    cdef long p_top           # index of p's most significant bit

    def __cinit__(self):
        mpz_init(self.q_z)
        mpz_init(self.p_z)
        mpz_init(self.h_z)
        mpz_init(self.sqrt_z)

    def __dealloc__(self):
        mpz_clear(self.q_z)
        mpz_clear(self.p_z)
        mpz_clear(self.h_z)
        mpz_clear(self.sqrt_z)

    def __init__(self, q, p, h):
        if q % 4 != 3:
            raise ValueError("field prime must be 3 mod 4")
        if h * p != q + 1:
            raise ValueError("group order and cofactor must satisfy h*p == q+1")
        self.name = "compiled"
        self.q, self.p, self.h = q, p, h
        _set_mpz(self.q_z, q)
        _set_mpz(self.p_z, p)
        _set_mpz(self.h_z, h)
        _set_mpz(self.sqrt_z, (q + 1) // 4)
        self.p_top = p.bit_length() - 1
        digits = []
        k = h
        while k:
            if k & 1:
                d = 2 - (k & 3)
                k -= d
            else:
                d = 0
            digits.append(d & 3)  # -1 -> 3? no: encode below
            k >>= 1
        # encode 0 -> 0, 1 -> 1, -1 -> 2, MSB first
        self.h_naf = bytes(1 if d == 1 else (2 if d == 3 else 0)
                           for d in reversed(digits))

    # ------------------------------------------------------------------
    # E(F_q) point arithmetic
    # ------------------------------------------------------------------

    def g0_is_on_curve(self, P):
        if P is None:
            return True
        x, y = P
        if not (0 <= x < self.q and 0 <= y < self.q):
            return False
        return (y * y - (x * x * x + x)) % self.q == 0

    def g0_neg(self, P):
        if P is None:
            return None
        x, y = P
        return (x, (self.q - y) % self.q)

    def g0_add(self, P, Q):
        cdef mpz_t x1, y1, x2, y2, lam, t, x3, y3
        if P is None:
            return Q
        if Q is None:
            return P
        px, py = P
        qx, qy = Q
        if px == qx:
            if (py + qy) % self.q == 0:
                return None
        mpz_init(x1); mpz_init(y1); mpz_init(x2); mpz_init(y2)
        mpz_init(lam); mpz_init(t); mpz_init(x3); mpz_init(y3)
        try:
            _set_mpz(x1, px % self.q); _set_mpz(y1, py % self.q)
            _set_mpz(x2, qx % self.q); _set_mpz(y2, qy % self.q)
            if px == qx:
                # tangent: lam = (3 x^2 + 1) / (2 y)
                mulm(lam, x1, x1, self.q_z)
                addm(t, lam, lam, self.q_z)
                addm(lam, t, lam, self.q_z)
                mpz_set_ui(t, 1)
                addm(lam, lam, t, self.q_z)
                addm(t, y1, y1, self.q_z)
            else:
                # chord: lam = (y2 - y1) / (x2 - x1)
                subm(lam, y2, y1, self.q_z)
                subm(t, x2, x1, self.q_z)
            if mpz_invert(t, t, self.q_z) == 0:
                raise ValueError("point addition hit a non-invertible divisor")
            mulm(lam, lam, t, self.q_z)
            mulm(x3, lam, lam, self.q_z)
            subm(x3, x3, x1, self.q_z)
            subm(x3, x3, x2, self.q_z)
            subm(t, x1, x3, self.q_z)
            mulm(y3, lam, t, self.q_z)
            subm(y3, y3, y1, self.q_z)
            return (_get_int(x3), _get_int(y3))
        finally:
            mpz_clear(x1); mpz_clear(y1); mpz_clear(x2); mpz_clear(y2)
            mpz_clear(lam); mpz_clear(t); mpz_clear(x3); mpz_clear(y3)

    def g0_mul(self, P, k):
        """[k]P by Jacobian double-and-add; one inversion to return affine."""
        cdef mpz_t X, Y, Z, xp, yp, kz
        cdef mpz_t A, B, C, D, T, E, t1, t2
        cdef long i, top
        if P is None or k == 0:
            return None
        if k < 0:
            return self.g0_mul(self.g0_neg(P), -k)
        mpz_init(X); mpz_init(Y); mpz_init(Z); mpz_init(xp); mpz_init(yp)
        mpz_init(kz); mpz_init(A); mpz_init(B); mpz_init(C); mpz_init(D)
        mpz_init(T); mpz_init(E); mpz_init(t1); mpz_init(t2)
        try:
            _set_mpz(xp, P[0] % self.q); _set_mpz(yp, P[1] % self.q)
            _set_mpz(kz, k)
            mpz_set(X, xp); mpz_set(Y, yp); mpz_set_ui(Z, 1)
            top = mpz_sizeinbase(kz, 2) - 1
            for i in range(top - 1, -1, -1):
                _jac_dbl(X, Y, Z, A, B, C, D, T, E, t1, self.q_z)
                if mpz_tstbit(kz, i):
                    _jac_madd(X, Y, Z, xp, yp, A, B, C, D, T, E, t1, t2, self.q_z)
            if mpz_sgn(Z) == 0:
                return None
            if mpz_invert(t1, Z, self.q_z) == 0:
                raise ValueError("point normalization hit a non-invertible Z")
            mulm(t2, t1, t1, self.q_z)
            mulm(X, X, t2, self.q_z)
            mulm(t2, t2, t1, self.q_z)
            mulm(Y, Y, t2, self.q_z)
            return (_get_int(X), _get_int(Y))
        finally:
            mpz_clear(X); mpz_clear(Y); mpz_clear(Z); mpz_clear(xp); mpz_clear(yp)
            mpz_clear(kz); mpz_clear(A); mpz_clear(B); mpz_clear(C); mpz_clear(D)
            mpz_clear(T); mpz_clear(E); mpz_clear(t1); mpz_clear(t2)

    def solve_y(self, x):
        """Smaller square root of x^3 + x, or None if it is a non-residue."""
        cdef mpz_t xv, v, y, t
        mpz_init(xv); mpz_init(v); mpz_init(y); mpz_init(t)
        try:
            _set_mpz(xv, x % self.q)
            mulm(v, xv, xv, self.q_z)
            mulm(v, v, xv, self.q_z)
            addm(v, v, xv, self.q_z)
            if mpz_sgn(v) == 0:
                return None
            mpz_powm(y, v, self.sqrt_z, self.q_z)
            mulm(t, y, y, self.q_z)
            if mpz_cmp(t, v) != 0:
                return None
            mpz_sub(t, self.q_z, y)
            if mpz_cmp(t, y) < 0:
                mpz_set(y, t)
            return _get_int(y)
        finally:
            mpz_clear(xv); mpz_clear(v); mpz_clear(y); mpz_clear(t)

    def clear_cofactor(self, P):
        return self.g0_mul(P, self.h)

    def in_subgroup(self, P):
        return self.g0_is_on_curve(P) and self.g0_mul(P, self.p) is None

    # ------------------------------------------------------------------
    # F_{q^2} arithmetic
    # ------------------------------------------------------------------

    def gt_mul(self, u, v):
        q = self.q
        a, b = u
        c, d = v
        ac = a * c % q
        bd = b * d % q
        cross = ((a + b) * (c + d) - ac - bd) % q
        return ((ac - bd) % q, cross)

    def gt_sqr(self, u):
        q = self.q
        a, b = u
        return ((a - b) * (a + b) % q, 2 * a * b % q)

    def gt_inv(self, u):
        q = self.q
        a, b = u
        n = (a * a + b * b) % q
        ni = pow(n, -1, q)
        return (a * ni % q, (q - b) * ni % q)

    def gt_conj(self, u):
        a, b = u
        return (a, (self.q - b) % self.q)

    def gt_exp(self, u, k):
        cdef mpz_t a, b, ra, rb, t1, t2, t3, kz
        cdef long i, top
        if k < 0:
            return self.gt_exp(self.gt_inv(u), -k)
        if k == 0:
            return (1, 0)
        mpz_init(a); mpz_init(b); mpz_init(ra); mpz_init(rb)
        mpz_init(t1); mpz_init(t2); mpz_init(t3); mpz_init(kz)
        try:
            _set_mpz(a, u[0] % self.q); _set_mpz(b, u[1] % self.q)
            _set_mpz(kz, k)
            mpz_set_ui(ra, 1); mpz_set_ui(rb, 0)
            top = mpz_sizeinbase(kz, 2) - 1
            for i in range(top, -1, -1):
                _fq2_sqr(ra, rb, t1, t2, t3, self.q_z)
                if mpz_tstbit(kz, i):
                    _fq2_mul(ra, rb, a, b, t1, t2, t3, self.q_z)
            return (_get_int(ra), _get_int(rb))
        finally:
            mpz_clear(a); mpz_clear(b); mpz_clear(ra); mpz_clear(rb)
            mpz_clear(t1); mpz_clear(t2); mpz_clear(t3); mpz_clear(kz)

    def gt_is_valid(self, u):
        """Membership in mu_p: unit norm and order dividing p."""
        q = self.q
        a, b = u
        if not (0 <= a < q and 0 <= b < q) or (a == 0 and b == 0):
            return False
        if (a * a + b * b) % q != 1:
            return False
        return self.gt_exp(u, self.p) == (1, 0)

    # ------------------------------------------------------------------
    # Reduced Tate pairing
    # ------------------------------------------------------------------

    def pair(self, P, Q):
        """e(P, Q) = f_{p,P}(phi(Q)) ^ ((q^2-1)/p); bilinear and symmetric."""
        cdef mpz_t X, Y, Z, xp, yp, xe, ye
        cdef mpz_t A, B, C, D, T, E, t1, t2, t3
        cdef mpz_t fa, fb, lre, lim_
        cdef long i
        cdef char dig
        if P is None or Q is None:
            return (1, 0)
        mpz_init(X); mpz_init(Y); mpz_init(Z); mpz_init(xp); mpz_init(yp)
        mpz_init(xe); mpz_init(ye)
        mpz_init(A); mpz_init(B); mpz_init(C); mpz_init(D); mpz_init(T)
        mpz_init(E); mpz_init(t1); mpz_init(t2); mpz_init(t3)
        mpz_init(fa); mpz_init(fb); mpz_init(lre); mpz_init(lim_)
        try:
            _set_mpz(xp, P[0] % self.q); _set_mpz(yp, P[1] % self.q)
            _set_mpz(xe, (self.q - Q[0]) % self.q)  # x of phi(Q)
            _set_mpz(ye, Q[1] % self.q)             # i-coefficient of phi(Q) y
            mpz_set(X, xp); mpz_set(Y, yp); mpz_set_ui(Z, 1)
            mpz_set_ui(fa, 1); mpz_set_ui(fb, 0)
            for i in range(self.p_top - 1, -1, -1):
                # tangent line at R fused with R = 2R
                mulm(A, X, X, self.q_z)
                mulm(B, Y, Y, self.q_z)
                mulm(C, B, B, self.q_z)
                addm(D, X, B, self.q_z)
                mulm(D, D, D, self.q_z)
                subm(D, D, A, self.q_z)
                subm(D, D, C, self.q_z)
                addm(D, D, D, self.q_z)
                mulm(T, Z, Z, self.q_z)
                mulm(E, T, T, self.q_z)
                addm(t1, A, A, self.q_z)
                addm(t1, t1, A, self.q_z)
                addm(E, E, t1, self.q_z)
                # l_re = E*(X - T*xe) - 2B   (uses pre-update X, B)
                mulm(t1, T, xe, self.q_z)
                subm(t1, X, t1, self.q_z)
                mulm(lre, E, t1, self.q_z)
                addm(t1, B, B, self.q_z)
                subm(lre, lre, t1, self.q_z)
                # Z3 = 2YZ;  l_im = Z3*T*ye
                mulm(t2, Y, Z, self.q_z)
                addm(t2, t2, t2, self.q_z)          # t2 = Z3
                mulm(lim_, t2, T, self.q_z)
                mulm(lim_, lim_, ye, self.q_z)
                # X3 = E^2 - 2D ; Y3 = E(D - X3) - 8C ; Z = Z3
                mulm(t1, E, E, self.q_z)
                subm(t1, t1, D, self.q_z)
                subm(t1, t1, D, self.q_z)           # t1 = X3
                subm(t3, D, t1, self.q_z)
                mulm(t3, E, t3, self.q_z)
                addm(C, C, C, self.q_z)
                addm(C, C, C, self.q_z)
                addm(C, C, C, self.q_z)
                subm(Y, t3, C, self.q_z)
                mpz_set(X, t1)
                mpz_set(Z, t2)
                # f = f^2 * l
                _fq2_sqr(fa, fb, t1, t2, t3, self.q_z)
                _fq2_mul(fa, fb, lre, lim_, t1, t2, t3, self.q_z)
                if mpz_tstbit(self.p_z, i):
                    # chord through R and P fused with R = R + P
                    mulm(T, Z, Z, self.q_z)
                    mulm(t1, xp, T, self.q_z)       # U2
                    mulm(t2, yp, T, self.q_z)
                    mulm(t2, t2, Z, self.q_z)       # S2
                    subm(t1, t1, X, self.q_z)       # H
                    subm(t2, t2, Y, self.q_z)       # r
                    if mpz_sgn(t1) == 0 and mpz_sgn(t2) != 0:
                        # vertical line: R + P = infinity, line lies in F_q
                        mpz_set_ui(X, 0); mpz_set_ui(Y, 1); mpz_set_ui(Z, 0)
                        continue
                    mulm(A, t1, t1, self.q_z)       # H^2
                    mulm(B, A, t1, self.q_z)        # H^3
                    mulm(C, X, A, self.q_z)         # X*H^2
                    mulm(D, t2, t2, self.q_z)
                    subm(D, D, B, self.q_z)
                    subm(D, D, C, self.q_z)
                    subm(D, D, C, self.q_z)         # X3
                    subm(E, C, D, self.q_z)
                    mulm(E, t2, E, self.q_z)
                    mulm(t3, Y, B, self.q_z)
                    subm(E, E, t3, self.q_z)        # Y3
                    mulm(Z, Z, t1, self.q_z)        # Z3
                    mpz_set(X, D)
                    mpz_set(Y, E)
                    # l_re = r*(xp - xe) - Z3*yp ; l_im = Z3*ye
                    subm(t3, xp, xe, self.q_z)
                    mulm(lre, t2, t3, self.q_z)
                    mulm(t3, Z, yp, self.q_z)
                    subm(lre, lre, t3, self.q_z)
                    mulm(lim_, Z, ye, self.q_z)
                    _fq2_mul(fa, fb, lre, lim_, t1, t2, t3, self.q_z)
            # final exponentiation: f^(q-1) then ^h with NAF and conjugates
            _fq2_inv(t1, t2, fa, fb, t3, A, self.q_z)
            negm(fb, fb, self.q_z)                  # conj(f)
            _fq2_mul(fa, fb, t1, t2, A, B, C, self.q_z)
            mpz_set(t1, fa); mpz_set(t2, fb)        # u = f^(q-1)
            mpz_set_ui(fa, 1); mpz_set_ui(fb, 0)
            for dig in self.h_naf:
                _fq2_sqr(fa, fb, A, B, C, self.q_z)
                if dig == 1:
                    _fq2_mul(fa, fb, t1, t2, A, B, C, self.q_z)
                elif dig == 2:
                    negm(t3, t2, self.q_z)
                    _fq2_mul(fa, fb, t1, t3, A, B, C, self.q_z)
            return (_get_int(fa), _get_int(fb))
        finally:
            mpz_clear(X); mpz_clear(Y); mpz_clear(Z); mpz_clear(xp); mpz_clear(yp)
            mpz_clear(xe); mpz_clear(ye)
            mpz_clear(A); mpz_clear(B); mpz_clear(C); mpz_clear(D); mpz_clear(T)
            mpz_clear(E); mpz_clear(t1); mpz_clear(t2); mpz_clear(t3)
            mpz_clear(fa); mpz_clear(fb); mpz_clear(lre); mpz_clear(lim_)


# ---------------------------------------------------------------------------
# shared C-level formulas
# ---------------------------------------------------------------------------

cdef void _jac_dbl(mpz_t X, mpz_t Y, mpz_t Z,
                   mpz_t A, mpz_t B, mpz_t C, mpz_t D, mpz_t T, mpz_t E,
                   mpz_t t1, mpz_t q):
    """(X:Y:Z) = 2(X:Y:Z) in place; infinity normalized to (0:1:0)."""
    if mpz_sgn(Z) == 0 or mpz_sgn(Y) == 0:
        mpz_set_ui(X, 0); mpz_set_ui(Y, 1); mpz_set_ui(Z, 0)
        return
    mulm(A, X, X, q)
    mulm(B, Y, Y, q)
    mulm(C, B, B, q)
    addm(D, X, B, q)
    mulm(D, D, D, q)
    subm(D, D, A, q)
    subm(D, D, C, q)
    addm(D, D, D, q)
    mulm(T, Z, Z, q)
    mulm(E, T, T, q)
    addm(t1, A, A, q)
    addm(t1, t1, A, q)
    addm(E, E, t1, q)
    mulm(Z, Y, Z, q)
    addm(Z, Z, Z, q)
    mulm(t1, E, E, q)
    subm(t1, t1, D, q)
    subm(t1, t1, D, q)          # X3
    subm(X, D, t1, q)
    mulm(X, E, X, q)
    addm(C, C, C, q)
    addm(C, C, C, q)
    addm(C, C, C, q)
    subm(Y, X, C, q)            # Y3
    mpz_set(X, t1)


cdef void _jac_madd(mpz_t X, mpz_t Y, mpz_t Z, mpz_t xp, mpz_t yp,
                    mpz_t A, mpz_t B, mpz_t C, mpz_t D, mpz_t T, mpz_t E,
                    mpz_t t1, mpz_t t2, mpz_t q):
    """(X:Y:Z) += affine (xp, yp) in place; infinity normalized to (0:1:0)."""
    if mpz_sgn(Z) == 0:
        mpz_set(X, xp); mpz_set(Y, yp); mpz_set_ui(Z, 1)
        return
    mulm(T, Z, Z, q)
    mulm(t1, xp, T, q)          # U2
    mulm(t2, yp, T, q)
    mulm(t2, t2, Z, q)          # S2
    subm(t1, t1, X, q)          # H
    subm(t2, t2, Y, q)          # r
    if mpz_sgn(t1) == 0:
        if mpz_sgn(t2) == 0:
            _jac_dbl(X, Y, Z, A, B, C, D, T, E, t1, q)
        else:
            mpz_set_ui(X, 0); mpz_set_ui(Y, 1); mpz_set_ui(Z, 0)
        return
    mulm(A, t1, t1, q)          # H^2
    mulm(B, A, t1, q)           # H^3
    mulm(C, X, A, q)            # X*H^2
    mulm(D, t2, t2, q)
    subm(D, D, B, q)
    subm(D, D, C, q)
    subm(D, D, C, q)            # X3
    subm(E, C, D, q)
    mulm(E, t2, E, q)
    mulm(t2, Y, B, q)
    subm(Y, E, t2, q)           # Y3
    mulm(Z, Z, t1, q)
    mpz_set(X, D)


cdef void _fq2_sqr(mpz_t a, mpz_t b, mpz_t t1, mpz_t t2, mpz_t t3, mpz_t q):
    """(a, b) = (a, b)^2 in place."""
    subm(t1, a, b, q)
    addm(t2, a, b, q)
    mulm(t3, a, b, q)
    mulm(a, t1, t2, q)
    addm(b, t3, t3, q)


cdef void _fq2_mul(mpz_t a, mpz_t b, mpz_t c, mpz_t d,
                   mpz_t t1, mpz_t t2, mpz_t t3, mpz_t q):
    """(a, b) = (a, b) * (c, d) in place (Karatsuba)."""
    mulm(t1, a, c, q)           # ac
    mulm(t2, b, d, q)           # bd
    addm(t3, a, b, q)
    addm(b, c, d, q)
    mulm(b, t3, b, q)
    subm(b, b, t1, q)
    subm(b, b, t2, q)           # cross
    subm(a, t1, t2, q)


cdef void _fq2_inv(mpz_t ra, mpz_t rb, mpz_t a, mpz_t b, mpz_t t1, mpz_t t2,
                   mpz_t q):
    """(ra, rb) = (a, b)^-1; raises if (a, b) is zero."""
    mulm(t1, a, a, q)
    mulm(t2, b, b, q)
    addm(t1, t1, t2, q)
    if mpz_invert(t1, t1, q) == 0:
        raise ValueError("zero element has no inverse in F_q^2")
    mulm(ra, a, t1, q)
    negm(t2, b, q)
    mulm(rb, t2, t1, q)
