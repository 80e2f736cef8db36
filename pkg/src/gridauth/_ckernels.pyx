# cython: boundscheck=False, wraparound=False, cdivision=True
"""GMP-backed versions of the functions in ``_pykernels``."""

from libc.stdlib cimport malloc, free

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef __mpz_struct *mpz_ptr
    ctypedef const __mpz_struct *mpz_srcptr

    void mpz_init(mpz_ptr)
    void mpz_clear(mpz_ptr)
    void mpz_set(mpz_ptr, mpz_srcptr)
    void mpz_set_ui(mpz_ptr, unsigned long)
    int mpz_set_str(mpz_ptr, const char *, int)
    char *mpz_get_str(char *, int, mpz_srcptr)
    size_t mpz_sizeinbase(mpz_srcptr, int)
    void mpz_add(mpz_ptr, mpz_srcptr, mpz_srcptr)
    void mpz_sub(mpz_ptr, mpz_srcptr, mpz_srcptr)
    void mpz_mul(mpz_ptr, mpz_srcptr, mpz_srcptr)
    void mpz_mul_ui(mpz_ptr, mpz_srcptr, unsigned long)
    void mpz_mod(mpz_ptr, mpz_srcptr, mpz_srcptr)
    int mpz_invert(mpz_ptr, mpz_srcptr, mpz_srcptr)
    int mpz_sgn(mpz_srcptr)
    int mpz_tstbit(mpz_srcptr, unsigned long)


cdef int _load(mpz_ptr z, object v) except -1:
    cdef bytes s = format(v, "x").encode("ascii")
    if mpz_set_str(z, s, 16) != 0:
        raise ValueError("cannot load integer into GMP")
    return 0


cdef object _store(mpz_srcptr z):
    cdef size_t size = mpz_sizeinbase(z, 16) + 2
    cdef char *buf = <char *>malloc(size)
    if buf == NULL:
        raise MemoryError()
    try:
        mpz_get_str(buf, 16, z)
        return int(buf.decode("ascii"), 16)
    finally:
        free(buf)


cdef struct _scratch:
    mpz_t t1, t2, t3, t4, t5, t6


cdef class _Curve:
    cdef mpz_t p, a, x, y
    cdef mpz_t X, Y, Z
    cdef _scratch s

    def __cinit__(self):
        mpz_init(self.p); mpz_init(self.a); mpz_init(self.x); mpz_init(self.y)
        mpz_init(self.X); mpz_init(self.Y); mpz_init(self.Z)
        mpz_init(self.s.t1); mpz_init(self.s.t2); mpz_init(self.s.t3)
        mpz_init(self.s.t4); mpz_init(self.s.t5); mpz_init(self.s.t6)

    def __dealloc__(self):
        mpz_clear(self.p); mpz_clear(self.a); mpz_clear(self.x); mpz_clear(self.y)
        mpz_clear(self.X); mpz_clear(self.Y); mpz_clear(self.Z)
        mpz_clear(self.s.t1); mpz_clear(self.s.t2); mpz_clear(self.s.t3)
        mpz_clear(self.s.t4); mpz_clear(self.s.t5); mpz_clear(self.s.t6)

    cdef void double(self):
        # t1=YY t2=ZZ t3=S t4=M t5=X3
        if mpz_sgn(self.Z) == 0 or mpz_sgn(self.Y) == 0:
            mpz_set_ui(self.X, 0); mpz_set_ui(self.Y, 1); mpz_set_ui(self.Z, 0)
            return
        mpz_mul(self.s.t1, self.Y, self.Y); mpz_mod(self.s.t1, self.s.t1, self.p)
        mpz_mul(self.s.t2, self.Z, self.Z); mpz_mod(self.s.t2, self.s.t2, self.p)
        mpz_mul(self.s.t3, self.X, self.s.t1); mpz_mul_ui(self.s.t3, self.s.t3, 4)
        mpz_mod(self.s.t3, self.s.t3, self.p)
        mpz_mul(self.s.t4, self.X, self.X); mpz_mul_ui(self.s.t4, self.s.t4, 3)
        mpz_mul(self.s.t6, self.s.t2, self.s.t2); mpz_mod(self.s.t6, self.s.t6, self.p)
        mpz_mul(self.s.t6, self.s.t6, self.a)
        mpz_add(self.s.t4, self.s.t4, self.s.t6); mpz_mod(self.s.t4, self.s.t4, self.p)
        mpz_mul(self.s.t5, self.s.t4, self.s.t4)
        mpz_sub(self.s.t5, self.s.t5, self.s.t3); mpz_sub(self.s.t5, self.s.t5, self.s.t3)
        mpz_mod(self.s.t5, self.s.t5, self.p)
        # Z3 = 2*Y*Z (uses old Y)
        mpz_mul(self.Z, self.Y, self.Z); mpz_mul_ui(self.Z, self.Z, 2)
        mpz_mod(self.Z, self.Z, self.p)
        # Y3 = M*(S - X3) - 8*YY^2
        mpz_sub(self.s.t3, self.s.t3, self.s.t5)
        mpz_mul(self.Y, self.s.t4, self.s.t3)
        mpz_mul(self.s.t1, self.s.t1, self.s.t1); mpz_mul_ui(self.s.t1, self.s.t1, 8)
        mpz_sub(self.Y, self.Y, self.s.t1); mpz_mod(self.Y, self.Y, self.p)
        mpz_set(self.X, self.s.t5)

    cdef void add_base(self):
        # t1=ZZ t2=U2 t3=S2 t4=H t5=R t6=scratch
        if mpz_sgn(self.Z) == 0:
            mpz_set(self.X, self.x); mpz_set(self.Y, self.y); mpz_set_ui(self.Z, 1)
            return
        mpz_mul(self.s.t1, self.Z, self.Z); mpz_mod(self.s.t1, self.s.t1, self.p)
        mpz_mul(self.s.t2, self.x, self.s.t1); mpz_mod(self.s.t2, self.s.t2, self.p)
        mpz_mul(self.s.t3, self.y, self.s.t1); mpz_mul(self.s.t3, self.s.t3, self.Z)
        mpz_mod(self.s.t3, self.s.t3, self.p)
        mpz_sub(self.s.t4, self.s.t2, self.X); mpz_mod(self.s.t4, self.s.t4, self.p)
        mpz_sub(self.s.t5, self.s.t3, self.Y); mpz_mod(self.s.t5, self.s.t5, self.p)
        if mpz_sgn(self.s.t4) == 0:
            if mpz_sgn(self.s.t5) == 0:
                self.double()
            else:
                mpz_set_ui(self.X, 0); mpz_set_ui(self.Y, 1); mpz_set_ui(self.Z, 0)
            return
        # t1 = HH, t2 = HHH, t3 = V = X*HH
        mpz_mul(self.s.t1, self.s.t4, self.s.t4); mpz_mod(self.s.t1, self.s.t1, self.p)
        mpz_mul(self.s.t2, self.s.t1, self.s.t4); mpz_mod(self.s.t2, self.s.t2, self.p)
        mpz_mul(self.s.t3, self.X, self.s.t1); mpz_mod(self.s.t3, self.s.t3, self.p)
        # X3 = R^2 - HHH - 2V
        mpz_mul(self.s.t6, self.s.t5, self.s.t5)
        mpz_sub(self.s.t6, self.s.t6, self.s.t2)
        mpz_sub(self.s.t6, self.s.t6, self.s.t3); mpz_sub(self.s.t6, self.s.t6, self.s.t3)
        mpz_mod(self.X, self.s.t6, self.p)
        # Y3 = R*(V - X3) - Y*HHH
        mpz_sub(self.s.t3, self.s.t3, self.X)
        mpz_mul(self.s.t3, self.s.t5, self.s.t3)
        mpz_mul(self.s.t6, self.Y, self.s.t2)
        mpz_sub(self.Y, self.s.t3, self.s.t6); mpz_mod(self.Y, self.Y, self.p)
        # Z3 = Z*H
        mpz_mul(self.Z, self.Z, self.s.t4); mpz_mod(self.Z, self.Z, self.p)


def ec_mul(k, x, y, a, p):
    """Return ``k * (x, y)`` as an affine tuple, or ``None`` for infinity."""
    if k <= 0:
        return None
    cdef _Curve c = _Curve()
    cdef mpz_t kk
    cdef long i
    _load(c.p, p)
    _load(c.a, a % p)
    _load(c.x, x)
    _load(c.y, y)
    mpz_set(c.X, c.x); mpz_set(c.Y, c.y); mpz_set_ui(c.Z, 1)
    mpz_init(kk)
    try:
        _load(kk, k)
        for i in range(k.bit_length() - 2, -1, -1):
            c.double()
            if mpz_tstbit(kk, i):
                c.add_base()
    finally:
        mpz_clear(kk)
    if mpz_sgn(c.Z) == 0:
        return None
    # affine: x = X/Z^2, y = Y/Z^3
    mpz_invert(c.s.t1, c.Z, c.p)
    mpz_mul(c.s.t2, c.s.t1, c.s.t1); mpz_mod(c.s.t2, c.s.t2, c.p)
    mpz_mul(c.s.t3, c.X, c.s.t2); mpz_mod(c.s.t3, c.s.t3, c.p)
    mpz_mul(c.s.t4, c.Y, c.s.t2); mpz_mul(c.s.t4, c.s.t4, c.s.t1)
    mpz_mod(c.s.t4, c.s.t4, c.p)
    return _store(c.s.t3), _store(c.s.t4)


def majority_decode(const unsigned char[:] word, int rho):
    """Decode a repetition codeword given as one 0/1 value per byte."""
    cdef Py_ssize_t n = word.shape[0]
    if rho <= 0 or n % rho:
        raise ValueError("codeword length %d is not a multiple of %d" % (n, rho))
    cdef Py_ssize_t blocks = n // rho
    cdef bytearray out = bytearray(blocks)
    cdef unsigned char[:] view = out
    cdef Py_ssize_t b, j
    cdef int total, half = rho // 2
    for b in range(blocks):
        total = 0
        for j in range(rho):
            total += word[b * rho + j]
        view[b] = 1 if total > half else 0
    return bytes(out)
