"""Pure-Python arithmetic kernel for the supersingular pairing backend.

This is the fallback selected when the compiled extension is unavailable, and
the executable reference its Cython twin mirrors operation for operation.

Conventions:
  * Points on E: y^2 = x^3 + x over F_q are affine ``(x, y)`` int tuples;
    ``None`` is the point at infinity.
  * Elements of F_{q^2} = F_q[i]/(i^2 + 1) are ``(a, b)`` pairs meaning a + b*i
    (q = 3 mod 4 makes x^2 + 1 irreducible).
  * The reduced Tate pairing sends the second argument through the distortion
    map (x, y) -> (-x, i*y), runs Miller's algorithm over the group order with
    the point in Jacobian coordinates, and eliminates denominators: vertical
    lines and line-normalization factors lie in F_q, which the final
    exponentiation (q^2 - 1)/p = (q - 1) * h annihilates.

Scalar multiplication is plain double-and-add from the top bit; Miller line
evaluations are fused into the doubling/addition formulas so no modular
inversion happens inside any loop.
"""

from __future__ import annotations

from typing import Optional, Tuple

Point = Optional[Tuple[int, int]]
Fq2 = Tuple[int, int]

GT_ONE: Fq2 = (1, 0)


class PureKernel:
    """Arithmetic for one curve: E(F_q)[p] and mu_p in F_{q^2}."""

    name = "pure"

    def __init__(self, q: int, p: int, h: int):
        if q % 4 != 3:
            raise ValueError("field prime must be 3 mod 4")
        if h * p != q + 1:
            raise ValueError("group order and cofactor must satisfy h*p == q+1")
        self.q = q
        self.p = p
        self.h = h
        self._sqrt_exp = (q + 1) // 4
        # MSB-first bit strings drive the ladders below
        self._p_bits = bin(p)[3:]
        self._h_naf = _naf(h)

    # ------------------------------------------------------------------
    # E(F_q) point arithmetic
    # ------------------------------------------------------------------

    def g0_is_on_curve(self, P: Point) -> bool:
        if P is None:
            return True
        x, y = P
        if not (0 <= x < self.q and 0 <= y < self.q):
            return False
        return (y * y - (x * x * x + x)) % self.q == 0

    def g0_neg(self, P: Point) -> Point:
        if P is None:
            return None
        x, y = P
        return (x, (self.q - y) % self.q)

    def g0_add(self, P: Point, Q: Point) -> Point:
        q = self.q
        if P is None:
            return Q
        if Q is None:
            return P
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % q == 0:
                return None
            lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, q) % q
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
        x3 = (lam * lam - x1 - x2) % q
        y3 = (lam * (x1 - x3) - y1) % q
        return (x3, y3)

    def g0_mul(self, P: Point, k: int) -> Point:
        """[k]P by Jacobian double-and-add; one inversion to return affine."""
        if P is None or k == 0:
            return None
        if k < 0:
            return self.g0_mul(self.g0_neg(P), -k)
        q = self.q
        xp, yp = P
        X, Y, Z = xp, yp, 1
        for bit in bin(k)[3:]:
            X, Y, Z = self._jac_dbl(X, Y, Z)
            if bit == "1":
                X, Y, Z = self._jac_madd(X, Y, Z, xp, yp)
        return self._jac_to_affine(X, Y, Z)

    def _jac_dbl(self, X, Y, Z):
        q = self.q
        if Z == 0 or Y == 0:
            return (0, 1, 0)
        A = X * X % q
        B = Y * Y % q
        C = B * B % q
        D = 2 * ((X + B) * (X + B) - A - C) % q
        T = Z * Z % q
        E = (3 * A + T * T) % q
        X3 = (E * E - 2 * D) % q
        Y3 = (E * (D - X3) - 8 * C) % q
        Z3 = 2 * Y * Z % q
        return (X3, Y3, Z3)

    def _jac_madd(self, X, Y, Z, xp, yp):
        """Mixed addition (X:Y:Z) + (xp, yp); returns (0,1,0) for infinity."""
        q = self.q
        if Z == 0:
            return (xp, yp, 1)
        T = Z * Z % q
        U2 = xp * T % q
        S2 = yp * T % q * Z % q
        H = (U2 - X) % q
        r = (S2 - Y) % q
        if H == 0:
            if r == 0:
                return self._jac_dbl(X, Y, Z)
            return (0, 1, 0)
        H2 = H * H % q
        H3 = H2 * H % q
        XH2 = X * H2 % q
        X3 = (r * r - H3 - 2 * XH2) % q
        Y3 = (r * (XH2 - X3) - Y * H3) % q
        Z3 = Z * H % q
        return (X3, Y3, Z3)

    def _jac_to_affine(self, X, Y, Z) -> Point:
        if Z == 0:
            return None
        q = self.q
        zi = pow(Z, -1, q)
        zi2 = zi * zi % q
        return (X * zi2 % q, Y * zi2 % q * zi % q)

    def solve_y(self, x: int) -> Optional[int]:
        """Smaller square root of x^3 + x, or None if it is a non-residue."""
        q = self.q
        v = (x * x * x + x) % q
        if v == 0:
            return None
        y = pow(v, self._sqrt_exp, q)
        if y * y % q != v:
            return None
        return min(y, q - y)

    def clear_cofactor(self, P: Point) -> Point:
        return self.g0_mul(P, self.h)

    def in_subgroup(self, P: Point) -> bool:
        return self.g0_is_on_curve(P) and self.g0_mul(P, self.p) is None

    # ------------------------------------------------------------------
    # F_{q^2} arithmetic (multiplicative group; G1 lives in mu_p)
    # ------------------------------------------------------------------

    def gt_mul(self, u: Fq2, v: Fq2) -> Fq2:
        q = self.q
        a, b = u
        c, d = v
        ac = a * c % q
        bd = b * d % q
        # Karatsuba: ad + bc = (a+b)(c+d) - ac - bd
        cross = ((a + b) * (c + d) - ac - bd) % q
        return ((ac - bd) % q, cross)

    def gt_sqr(self, u: Fq2) -> Fq2:
        q = self.q
        a, b = u
        return ((a - b) * (a + b) % q, 2 * a * b % q)

    def gt_inv(self, u: Fq2) -> Fq2:
        q = self.q
        a, b = u
        n = (a * a + b * b) % q
        ni = pow(n, -1, q)
        return (a * ni % q, (q - b) * ni % q)

    def gt_conj(self, u: Fq2) -> Fq2:
        a, b = u
        return (a, (self.q - b) % self.q)

    def gt_exp(self, u: Fq2, k: int) -> Fq2:
        if k < 0:
            return self.gt_exp(self.gt_inv(u), -k)
        r = GT_ONE
        if k == 0:
            return r
        for bit in bin(k)[2:]:
            r = self.gt_sqr(r)
            if bit == "1":
                r = self.gt_mul(r, u)
        return r

    def gt_is_valid(self, u: Fq2) -> bool:
        """Membership in mu_p: unit norm and order dividing p."""
        q = self.q
        a, b = u
        if not (0 <= a < q and 0 <= b < q) or (a == 0 and b == 0):
            return False
        if (a * a + b * b) % q != 1:
            return False
        return self.gt_exp(u, self.p) == GT_ONE

    # ------------------------------------------------------------------
    # Reduced Tate pairing
    # ------------------------------------------------------------------

    def pair(self, P: Point, Q: Point) -> Fq2:
        """e(P, Q) = f_{p,P}(phi(Q)) ^ ((q^2-1)/p); bilinear and symmetric."""
        if P is None or Q is None:
            return GT_ONE
        q = self.q
        xe = (q - Q[0]) % q  # x-coordinate of phi(Q)
        ye = Q[1]            # i-coefficient of phi(Q)'s y
        f = self._miller(P, xe, ye)
        return self._final_exp(f)

    def _miller(self, P: Point, xe: int, ye: int) -> Fq2:
        q = self.q
        xp, yp = P
        fa, fb = GT_ONE
        X, Y, Z = xp, yp, 1
        for bit in self._p_bits:
            # tangent line at R, evaluated at (xe, ye*i), fused with doubling
            A = X * X % q
            B = Y * Y % q
            C = B * B % q
            D = 2 * ((X + B) * (X + B) - A - C) % q
            T = Z * Z % q
            E = (3 * A + T * T) % q
            X3 = (E * E - 2 * D) % q
            Y3 = (E * (D - X3) - 8 * C) % q
            Z3 = 2 * Y * Z % q
            l_re = (E * (X - T * xe) - 2 * B) % q
            l_im = Z3 * T % q * ye % q
            # f = f^2 * l
            sa = (fa - fb) * (fa + fb) % q
            sb = 2 * fa * fb % q
            ac = sa * l_re % q
            bd = sb * l_im % q
            cross = ((sa + sb) * (l_re + l_im) - ac - bd) % q
            fa, fb = (ac - bd) % q, cross
            X, Y, Z = X3, Y3, Z3
            if bit == "1":
                # chord through R and P, evaluated at (xe, ye*i), fused with R += P
                T = Z * Z % q
                U2 = xp * T % q
                S2 = yp * T % q * Z % q
                H = (U2 - X) % q
                r = (S2 - Y) % q
                if H == 0 and r != 0:
                    # vertical line: R + P is infinity, line lies in F_q
                    X, Y, Z = 0, 1, 0
                    continue
                H2 = H * H % q
                H3 = H2 * H % q
                XH2 = X * H2 % q
                X3 = (r * r - H3 - 2 * XH2) % q
                Y3 = (r * (XH2 - X3) - Y * H3) % q
                Z3 = Z * H % q
                l_re = (r * (xp - xe) - Z3 * yp) % q
                l_im = Z3 * ye % q
                ac = fa * l_re % q
                bd = fb * l_im % q
                cross = ((fa + fb) * (l_re + l_im) - ac - bd) % q
                fa, fb = (ac - bd) % q, cross
                X, Y, Z = X3, Y3, Z3
        return (fa, fb)

    def _final_exp(self, f: Fq2) -> Fq2:
        # f^(q-1) = conj(f) / f, after which f is unitary and inversion is
        # conjugation, so the remaining ^h ladder can use a signed digit form.
        u = self.gt_mul(self.gt_conj(f), self.gt_inv(f))
        r = GT_ONE
        for digit in self._h_naf:
            r = self.gt_sqr(r)
            if digit == 1:
                r = self.gt_mul(r, u)
            elif digit == -1:
                r = self.gt_mul(r, self.gt_conj(u))
        return r


def _naf(k: int):
    """Non-adjacent form of k, most significant digit first."""
    digits = []
    while k:
        if k & 1:
            d = 2 - (k & 3)
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    digits.reverse()
    return digits
