# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of dnasim._kernels_py. Semantics must stay bit-identical."""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport qsort
from libc.string cimport memset

cnp.import_array()

BACKEND = "c"

cdef extern from *:
    """
    #include <stdint.h>
    static uint64_t dnasim_mix64(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static int dnasim_cmp_i64(const void *a, const void *b) {
        int64_t x = *(const int64_t *)a, y = *(const int64_t *)b;
        return (x > y) - (x < y);
    }
    """
    cnp.uint64_t dnasim_mix64(cnp.uint64_t z) nogil
    int dnasim_cmp_i64(const void *a, const void *b) nogil

DEF GOLD1 = 0x9E3779B97F4A7C15
DEF GOLD2 = 0xC2B2AE3D27D4EB4F


def payload_block(seed, long long j_lo, long long j_hi, long long num_indices,
                  long long payload_space):
    cdef cnp.uint64_t state = dnasim_mix64((<cnp.uint64_t> (seed & 0xFFFFFFFFFFFFFFFF))
                                           + <cnp.uint64_t> GOLD1)
    cdef long long J = j_hi - j_lo
    out_arr = np.empty((J, num_indices), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef long long i, m
    cdef cnp.uint64_t h, p = <cnp.uint64_t> payload_space
    with nogil:
        for i in range(J):
            h = dnasim_mix64(state ^ (<cnp.uint64_t> (j_lo + i) * <cnp.uint64_t> GOLD1))
            for m in range(num_indices):
                out[i, m] = <cnp.int64_t> (dnasim_mix64(
                    h ^ (<cnp.uint64_t> m * <cnp.uint64_t> GOLD2)) % p)
    return out_arr


def resolve_batch(reads, long long num_indices, long long payload_space,
                  double threshold):
    cdef cnp.int64_t[:, ::1] r = np.ascontiguousarray(reads, dtype=np.int64)
    cdef long long B = r.shape[0], N = r.shape[1]
    out_arr = np.full((B, num_indices), -1, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    buf_arr = np.empty(N, dtype=np.int64)
    cdef cnp.int64_t[::1] buf = buf_arr
    cdef long long b, n, run_val, run_cnt, cur_idx, idx, pay
    cdef long long best_cnt, best_pay, second_cnt
    with nogil:
        for b in range(B):
            for n in range(N):
                buf[n] = r[b, n]
            qsort(&buf[0], <size_t> N, sizeof(cnp.int64_t), dnasim_cmp_i64)
            cur_idx = -1
            best_cnt = 0
            best_pay = -1
            second_cnt = 0
            run_val = buf[0]
            run_cnt = 1
            for n in range(1, N + 1):
                if n < N and buf[n] == run_val:
                    run_cnt += 1
                    continue
                # close the run (run_val, run_cnt)
                idx = run_val / payload_space
                pay = run_val - idx * payload_space
                if idx != cur_idx:
                    if cur_idx >= 0 and (<double> best_cnt >= threshold
                                         and best_cnt > second_cnt):
                        out[b, cur_idx] = best_pay
                    cur_idx = idx
                    best_cnt = run_cnt
                    best_pay = pay
                    second_cnt = 0
                elif run_cnt > best_cnt:
                    second_cnt = best_cnt
                    best_cnt = run_cnt
                    best_pay = pay
                elif run_cnt > second_cnt:
                    second_cnt = run_cnt
                if n < N:
                    run_val = buf[n]
                    run_cnt = 1
            if cur_idx >= 0 and (<double> best_cnt >= threshold
                                 and best_cnt > second_cnt):
                out[b, cur_idx] = best_pay
    return out_arr


def decode_batch(decided, codebook, transmitted):
    cdef cnp.int64_t[:, ::1] dec = np.ascontiguousarray(decided, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] cb = np.ascontiguousarray(codebook, dtype=np.int64)
    cdef cnp.int64_t[::1] tx = np.ascontiguousarray(transmitted, dtype=np.int64)
    cdef long long B = dec.shape[0], M = dec.shape[1], C = cb.shape[0]
    best_arr = np.zeros(B, dtype=np.int64)
    bestd_arr = np.empty(B, dtype=np.int64)
    truthd_arr = np.zeros(B, dtype=np.int64)
    cdef cnp.int64_t[::1] best = best_arr, bestd = bestd_arr, truthd = truthd_arr
    cdef long long b, c, m, d, bd, bj, t
    with nogil:
        for b in range(B):
            bd = M + 1
            bj = 0
            for c in range(C):
                d = 0
                for m in range(M):
                    if dec[b, m] >= 0 and dec[b, m] != cb[c, m]:
                        d += 1
                        if d >= bd:
                            break
                if d < bd:
                    bd = d
                    bj = c
            best[b] = bj
            bestd[b] = bd
            t = tx[b]
            d = 0
            for m in range(M):
                if dec[b, m] >= 0 and dec[b, m] != cb[t, m]:
                    d += 1
            truthd[b] = d
    return best_arr, bestd_arr, truthd_arr


def classify_batch(draws, errors, read_index, decided, truth_payload,
                   double threshold):
    cdef cnp.int64_t[:, ::1] dr = np.ascontiguousarray(draws, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] er = np.ascontiguousarray(errors, dtype=np.uint8)
    cdef cnp.int64_t[:, ::1] ri = np.ascontiguousarray(read_index, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] dec = np.ascontiguousarray(decided, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] tp = np.ascontiguousarray(truth_payload, dtype=np.int64)
    cdef long long B = dr.shape[0], N = dr.shape[1], M = dec.shape[1]
    out_arr = np.empty((B, 7), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    dup_arr = np.zeros(M, dtype=np.int64)
    km_arr = np.zeros(M, dtype=np.int64)
    vm_arr = np.zeros(M, dtype=np.int64)
    cdef cnp.int64_t[::1] dup = dup_arr, km = km_arr, vm = vm_arr
    cdef long long b, n, m, n_sam, n_cbt, n_eat, n_e, n_u, K
    cdef double rhs_e, rhs_u
    with nogil:
        for b in range(B):
            memset(&dup[0], 0, M * sizeof(cnp.int64_t))
            memset(&km[0], 0, M * sizeof(cnp.int64_t))
            memset(&vm[0], 0, M * sizeof(cnp.int64_t))
            K = 0
            for n in range(N):
                dup[dr[b, n]] += 1
                if er[b, n]:
                    K += 1
                    km[dr[b, n]] += 1
                    if ri[b, n] != dr[b, n]:
                        vm[ri[b, n]] += 1
            n_sam = 0
            n_cbt = 0
            n_eat = 0
            n_e = 0
            n_u = 0
            for m in range(M):
                if <double> dup[m] < threshold:
                    n_sam += 1
                elif <double> (dup[m] - km[m]) < threshold:
                    n_cbt += 1
                if <double> vm[m] >= threshold:
                    n_eat += 1
                if dec[b, m] < 0:
                    n_e += 1
                elif dec[b, m] != tp[b, m]:
                    n_u += 1
            rhs_e = n_sam + (1.0 + 1.0 / threshold) * K + 1e-9
            rhs_u = K / threshold + 1e-9
            out[b, 0] = n_sam
            out[b, 1] = n_cbt
            out[b, 2] = n_eat
            out[b, 3] = n_e
            out[b, 4] = n_u
            out[b, 5] = K
            out[b, 6] = 1 if (n_e <= rhs_e and n_u <= rhs_u) else 0
    return out_arr


def pair_histogram(payloads):
    cdef cnp.int64_t[:, ::1] p = np.ascontiguousarray(payloads, dtype=np.int64)
    cdef long long C = p.shape[0], M = p.shape[1]
    hist_arr = np.zeros((C, M + 1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] hist = hist_arr
    cdef long long i, j, m, d
    with nogil:
        for i in range(C):
            for j in range(i + 1, C):
                d = 0
                for m in range(M):
                    if p[i, m] != p[j, m]:
                        d += 1
                hist[i, d] += 1
                hist[j, d] += 1
    return hist_arr
