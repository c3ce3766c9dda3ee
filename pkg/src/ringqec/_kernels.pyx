# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels for dense density-matrix simulation.

A superoperator here is a matrix acting on the vectorized 2x2 (or 4x4) block
of the density matrix belonging to the target qubit(s); index convention is
(row_bits, col_bits) flattened row-major, and slot 0 is the most significant
bit of the state index.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.complex128_t cplx


cdef inline Py_ssize_t _insert_bit(Py_ssize_t r, int m) nogil:
    return ((r >> m) << (m + 1)) | (r & ((<Py_ssize_t>1 << m) - 1))


def apply_superop_1q(cplx[:, ::1] rho, cplx[:, ::1] out, cplx[:, ::1] s,
                     int q, int n):
    cdef int m = n - 1 - q
    cdef Py_ssize_t stride = <Py_ssize_t>1 << m
    cdef Py_ssize_t half = <Py_ssize_t>1 << (n - 1)
    cdef Py_ssize_t ri, cj, i0, i1, j0, j1
    cdef cplx v0, v1, v2, v3
    with nogil:
        for ri in range(half):
            i0 = _insert_bit(ri, m)
            i1 = i0 | stride
            for cj in range(half):
                j0 = _insert_bit(cj, m)
                j1 = j0 | stride
                v0 = rho[i0, j0]
                v1 = rho[i0, j1]
                v2 = rho[i1, j0]
                v3 = rho[i1, j1]
                out[i0, j0] = s[0, 0] * v0 + s[0, 1] * v1 + s[0, 2] * v2 + s[0, 3] * v3
                out[i0, j1] = s[1, 0] * v0 + s[1, 1] * v1 + s[1, 2] * v2 + s[1, 3] * v3
                out[i1, j0] = s[2, 0] * v0 + s[2, 1] * v1 + s[2, 2] * v2 + s[2, 3] * v3
                out[i1, j1] = s[3, 0] * v0 + s[3, 1] * v1 + s[3, 2] * v2 + s[3, 3] * v3


def apply_superop_2q(cplx[:, ::1] rho, cplx[:, ::1] out, cplx[:, ::1] s,
                     int q1, int q2, int n):
    cdef int m1 = n - 1 - q1
    cdef int m2 = n - 1 - q2
    cdef int mhi = m1 if m1 > m2 else m2
    cdef int mlo = m2 if m1 > m2 else m1
    cdef Py_ssize_t s1 = <Py_ssize_t>1 << m1
    cdef Py_ssize_t s2 = <Py_ssize_t>1 << m2
    cdef Py_ssize_t quarter = <Py_ssize_t>1 << (n - 2)
    cdef Py_ssize_t ri, cj, ib, jb, k, l, w
    cdef Py_ssize_t irow[4]
    cdef Py_ssize_t jcol[4]
    cdef cplx v[16]
    cdef cplx acc
    with nogil:
        for ri in range(quarter):
            ib = _insert_bit(_insert_bit(ri, mlo), mhi)
            irow[0] = ib
            irow[1] = ib | s2
            irow[2] = ib | s1
            irow[3] = ib | s1 | s2
            for cj in range(quarter):
                jb = _insert_bit(_insert_bit(cj, mlo), mhi)
                jcol[0] = jb
                jcol[1] = jb | s2
                jcol[2] = jb | s1
                jcol[3] = jb | s1 | s2
                for k in range(4):
                    for l in range(4):
                        v[4 * k + l] = rho[irow[k], jcol[l]]
                for k in range(4):
                    for l in range(4):
                        acc = 0
                        for w in range(16):
                            acc = acc + s[4 * k + l, w] * v[w]
                        out[irow[k], jcol[l]] = acc
    return


def prob_zero(cplx[:, ::1] rho, int q, int n):
    cdef int m = n - 1 - q
    cdef Py_ssize_t half = <Py_ssize_t>1 << (n - 1)
    cdef Py_ssize_t ri, i0
    cdef double p = 0.0
    with nogil:
        for ri in range(half):
            i0 = _insert_bit(ri, m)
            p += rho[i0, i0].real
    return p


def project_z(cplx[:, ::1] rho, int q, int outcome, int n):
    """Zero out the blocks not matching `outcome`; returns the kept trace."""
    cdef Py_ssize_t dim = <Py_ssize_t>1 << n
    cdef int m = n - 1 - q
    cdef Py_ssize_t i, j
    cdef double tr = 0.0
    cdef int bit
    with nogil:
        for i in range(dim):
            bit = <int>((i >> m) & 1)
            if bit != outcome:
                for j in range(dim):
                    rho[i, j] = 0
                    rho[j, i] = 0
            else:
                tr += rho[i, i].real
    return tr


NAME = "compiled"
