# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernel.

Twin of ``siaflow._core_py``: same class, same entry points, and the same
floating-point operations in the same order, so results are bit-for-bit
identical with the pure-Python fallback.  Keep the two files in sync when
editing either.
"""

from libc.math cimport fabs, sqrt

import numpy as np

BACKEND = "cython"

cdef double _INF = float("inf")


cdef inline double _flow(double xi, double thresh, double d) noexcept nogil:
    cdef double m, root
    if thresh > 0.0:
        m = fabs(d) - thresh
        if m <= 0.0:
            return 0.0
        root = sqrt(m)
        if d >= 0.0:
            return xi * root
        return -xi * root
    if d >= 0.0:
        return xi * sqrt(d)
    return -xi * sqrt(-d)


cdef class Core:
    """Flattened circuit arrays plus the RK4/bisection stepping loops."""

    cdef int[:] node_kind
    cdef double[:] node_fixed_p
    cdef int[:] node_act
    cdef int[:] act_node
    cdef double[:] act_vcap
    cdef int[:] coef_off
    cdef double[:] coef
    cdef int[:] jn_nodes
    cdef int[:] jn_edge_off
    cdef int[:] jn_edge_idx
    cdef int[:] jn_edge_sign
    cdef bint single_sweep
    cdef int[:] edge_from
    cdef int[:] edge_to
    cdef double[:] edge_xi
    cdef double[:] edge_thresh

    cdef int n_nodes, n_edges, n_act, n_jn
    cdef double[:] _p
    cdef double[:] _k1
    cdef double[:] _k2
    cdef double[:] _k3
    cdef double[:] _k4
    cdef double[:] _vt
    cdef double[:] _vol
    cdef int[:] _open

    def __init__(self, node_kind, node_fixed_p, node_act,
                 act_node, act_vcap, coef_off, coef,
                 jn_nodes, jn_edge_off, jn_edge_idx, jn_edge_sign, single_sweep,
                 edge_from, edge_to, edge_xi, edge_thresh):
        self.node_kind = np.ascontiguousarray(node_kind, dtype=np.intc)
        self.node_fixed_p = np.ascontiguousarray(node_fixed_p, dtype=np.float64)
        self.node_act = np.ascontiguousarray(node_act, dtype=np.intc)
        self.act_node = np.ascontiguousarray(act_node, dtype=np.intc)
        self.act_vcap = np.ascontiguousarray(act_vcap, dtype=np.float64)
        self.coef_off = np.ascontiguousarray(coef_off, dtype=np.intc)
        self.coef = np.ascontiguousarray(coef, dtype=np.float64)
        self.jn_nodes = np.ascontiguousarray(jn_nodes, dtype=np.intc)
        self.jn_edge_off = np.ascontiguousarray(jn_edge_off, dtype=np.intc)
        self.jn_edge_idx = np.ascontiguousarray(jn_edge_idx, dtype=np.intc)
        self.jn_edge_sign = np.ascontiguousarray(jn_edge_sign, dtype=np.intc)
        self.single_sweep = bool(single_sweep)
        self.edge_from = np.ascontiguousarray(edge_from, dtype=np.intc)
        self.edge_to = np.ascontiguousarray(edge_to, dtype=np.intc)
        self.edge_xi = np.ascontiguousarray(edge_xi, dtype=np.float64)
        self.edge_thresh = np.ascontiguousarray(edge_thresh, dtype=np.float64)

        self.n_nodes = self.node_kind.shape[0]
        self.n_edges = self.edge_from.shape[0]
        self.n_act = self.act_node.shape[0]
        self.n_jn = self.jn_nodes.shape[0]

        self._p = np.zeros(self.n_nodes)
        self._k1 = np.zeros(self.n_act)
        self._k2 = np.zeros(self.n_act)
        self._k3 = np.zeros(self.n_act)
        self._k4 = np.zeros(self.n_act)
        self._vt = np.zeros(self.n_act)
        self._vol = np.zeros(self.n_act)
        self._open = np.zeros(self.n_edges, dtype=np.intc)

    # -- right-hand side -------------------------------------------------

    cdef double _poly(self, int a, double v) noexcept nogil:
        cdef int lo = self.coef_off[a]
        cdef int i = self.coef_off[a + 1] - 1
        cdef double acc = 0.0
        while i >= lo:
            acc = self.coef[i] + v * acc
            i -= 1
        return v * acc

    cdef double _junction_net(self, int jslot, int[:] open_mask, double[:] p,
                              double x) noexcept nogil:
        cdef double net = 0.0
        cdef int t, e
        for t in range(self.jn_edge_off[jslot], self.jn_edge_off[jslot + 1]):
            e = self.jn_edge_idx[t]
            if not open_mask[e]:
                continue
            if self.jn_edge_sign[t] > 0:
                net += _flow(self.edge_xi[e], self.edge_thresh[e],
                             p[self.edge_from[e]] - x)
            else:
                net -= _flow(self.edge_xi[e], self.edge_thresh[e],
                             x - p[self.edge_to[e]])
        return net

    cdef void _solve_junction(self, int jslot, int[:] open_mask, double[:] p) noexcept nogil:
        cdef int j = self.jn_nodes[jslot]
        cdef int lo_e = self.jn_edge_off[jslot]
        cdef int hi_e = self.jn_edge_off[jslot + 1]
        cdef double pmin = _INF
        cdef double pmax = -_INF
        cdef bint any_open = False
        cdef int t, e, other, it
        cdef double pn, lo, hi, mid, net, best, best_net, cand
        for t in range(lo_e, hi_e):
            e = self.jn_edge_idx[t]
            if not open_mask[e]:
                continue
            if self.jn_edge_sign[t] > 0:
                other = self.edge_from[e]
            else:
                other = self.edge_to[e]
            pn = p[other]
            any_open = True
            if pn < pmin:
                pmin = pn
            if pn > pmax:
                pmax = pn
        if not any_open:
            p[j] = 0.0
            return
        if pmin == pmax:
            # all open neighbours agree; the balance point is exact and
            # bisection would only stall on the float grid around it
            p[j] = pmin
            return
        lo = pmin - 1.0
        hi = pmax + 1.0
        for it in range(48):
            mid = 0.5 * (lo + hi)
            if self._junction_net(jslot, open_mask, p, mid) > 0.0:
                lo = mid
            else:
                hi = mid
        # the bracket bottoms out on the float grid near the root; take the
        # candidate with the smallest residual so phantom flows stay minimal
        best = 0.5 * (lo + hi)
        best_net = fabs(self._junction_net(jslot, open_mask, p, best))
        for it in range(2):
            cand = lo if it == 0 else hi
            net = fabs(self._junction_net(jslot, open_mask, p, cand))
            if net < best_net:
                best = cand
                best_net = net
        p[j] = best

    cdef void _pressures(self, double[:] vol, int[:] open_mask, double[:] p) noexcept nogil:
        cdef int i, kind, sweeps, s, jslot
        for i in range(self.n_nodes):
            kind = self.node_kind[i]
            if kind == 1:
                p[i] = self._poly(self.node_act[i], vol[self.node_act[i]])
            elif kind == 3:
                p[i] = 0.0
            else:
                p[i] = self.node_fixed_p[i]
        if self.n_jn:
            sweeps = 1 if self.single_sweep else 16
            for s in range(sweeps):
                for jslot in range(self.n_jn):
                    self._solve_junction(jslot, open_mask, p)

    cdef void _rhs(self, double[:] vol, int[:] open_mask, double[:] dvdt) noexcept nogil:
        cdef double[:] p = self._p
        cdef int a, e, at, af
        cdef double f
        self._pressures(vol, open_mask, p)
        for a in range(self.n_act):
            dvdt[a] = 0.0
        for e in range(self.n_edges):
            if not open_mask[e]:
                continue
            f = _flow(self.edge_xi[e], self.edge_thresh[e],
                      p[self.edge_from[e]] - p[self.edge_to[e]])
            at = self.node_act[self.edge_to[e]]
            if at >= 0:
                dvdt[at] += f
            af = self.node_act[self.edge_from[e]]
            if af >= 0:
                dvdt[af] -= f

    # -- public entry points ----------------------------------------------

    def evaluate(self, vol_arr, open_mask_arr, p_out, q_out, dvdt_out):
        """Node pressures, edge flows and actuator flux at one state."""
        cdef double[:] vol = self._vol
        cdef int[:] open_mask = self._open
        cdef double[:] pv = p_out
        cdef double[:] qv = q_out
        cdef double[:] dv = dvdt_out
        cdef double[:] p = self._p
        cdef int i, a, e, at, af
        cdef double f
        for a in range(self.n_act):
            vol[a] = vol_arr[a]
        for e in range(self.n_edges):
            open_mask[e] = open_mask_arr[e]
        self._pressures(vol, open_mask, p)
        for i in range(self.n_nodes):
            pv[i] = p[i]
        for a in range(self.n_act):
            dv[a] = 0.0
        for e in range(self.n_edges):
            if open_mask[e]:
                f = _flow(self.edge_xi[e], self.edge_thresh[e],
                          p[self.edge_from[e]] - p[self.edge_to[e]])
            else:
                f = 0.0
            qv[e] = f
            at = self.node_act[self.edge_to[e]]
            if at >= 0:
                dv[at] += f
            af = self.node_act[self.edge_from[e]]
            if af >= 0:
                dv[af] -= f

    cdef void _record(self, double[:] vol, int[:] open_mask, double t, int row,
                      double[:] rec_t, double[:, :] rec_p, double[:, :] rec_v,
                      double[:, :] rec_q) noexcept nogil:
        cdef double[:] p = self._p
        cdef int i, a, e
        self._pressures(vol, open_mask, p)
        rec_t[row] = t
        for i in range(self.n_nodes):
            rec_p[row, i] = p[i]
        for a in range(self.n_act):
            rec_v[row, a] = vol[a]
        for e in range(self.n_edges):
            if open_mask[e]:
                rec_q[row, e] = _flow(self.edge_xi[e], self.edge_thresh[e],
                                      p[self.edge_from[e]] - p[self.edge_to[e]])
            else:
                rec_q[row, e] = 0.0

    def integrate(self, vol_arr, open_mask_arr, times_arr, recflags_arr,
                  rec_t_arr, rec_p_arr, rec_v_arr, rec_q_arr, int row0,
                  clamp_t_arr, clamp_act_arr, clamp_hi_arr, int nclamp0):
        """March classical RK4 over consecutive boundary times.

        Same contract as the pure-Python twin: returns
        (next_row, total_clamps, diverged_actuator_or_minus1, time).
        """
        cdef double[:] vol = self._vol
        cdef int[:] open_mask = self._open
        cdef double[:] times = np.ascontiguousarray(times_arr, dtype=np.float64)
        cdef unsigned char[:] rec = np.ascontiguousarray(recflags_arr, dtype=np.uint8)
        cdef double[:] rec_t = rec_t_arr
        cdef double[:, :] rec_p = rec_p_arr
        cdef double[:, :] rec_v = rec_v_arr
        cdef double[:, :] rec_q = rec_q_arr
        cdef double[:] clamp_t = clamp_t_arr
        cdef int[:] clamp_act = clamp_act_arr
        cdef unsigned char[:] clamp_hi = clamp_hi_arr
        cdef double[:] k1 = self._k1
        cdef double[:] k2 = self._k2
        cdef double[:] k3 = self._k3
        cdef double[:] k4 = self._k4
        cdef double[:] vt = self._vt
        cdef int row = row0
        cdef int nclamp = nclamp0
        cdef int cap = clamp_t.shape[0]
        cdef int n_act = self.n_act
        cdef int i, a, b, e
        cdef double t1, h, v

        for a in range(n_act):
            vol[a] = vol_arr[a]
        for e in range(self.n_edges):
            open_mask[e] = open_mask_arr[e]

        for i in range(times.shape[0] - 1):
            t1 = times[i + 1]
            h = t1 - times[i]
            self._rhs(vol, open_mask, k1)
            for a in range(n_act):
                vt[a] = vol[a] + 0.5 * h * k1[a]
            self._rhs(vt, open_mask, k2)
            for a in range(n_act):
                vt[a] = vol[a] + 0.5 * h * k2[a]
            self._rhs(vt, open_mask, k3)
            for a in range(n_act):
                vt[a] = vol[a] + h * k3[a]
            self._rhs(vt, open_mask, k4)
            for a in range(n_act):
                v = vol[a] + (h / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
                if v != v or v == _INF or v == -_INF:
                    for b in range(n_act):
                        vol_arr[b] = vol[b]
                    return row, nclamp, a, t1
                if v < 0.0:
                    if nclamp < cap:
                        clamp_t[nclamp] = t1
                        clamp_act[nclamp] = a
                        clamp_hi[nclamp] = 0
                    nclamp += 1
                    v = 0.0
                elif v > self.act_vcap[a]:
                    if nclamp < cap:
                        clamp_t[nclamp] = t1
                        clamp_act[nclamp] = a
                        clamp_hi[nclamp] = 1
                    nclamp += 1
                    v = self.act_vcap[a]
                vol[a] = v
            if rec[i + 1]:
                self._record(vol, open_mask, t1, row, rec_t, rec_p, rec_v, rec_q)
                row += 1

        for a in range(n_act):
            vol_arr[a] = vol[a]
        return row, nclamp, -1, 0.0
