"""Pure-Python integration kernel.

Fallback twin of the compiled extension ``siaflow._core``.  Both implement the
same ``Core`` class; every floating-point operation is written in the same
order in both so that results are bit-for-bit identical.  Keep the two files
in sync when editing either.

Node kinds: 0 = source, 1 = actuator, 2 = outlet, 3 = junction.
"""

import math

BACKEND = "python"

_INF = math.inf


def _flow(xi, thresh, d):
    if thresh > 0.0:
        m = abs(d) - thresh
        if m <= 0.0:
            return 0.0
        root = math.sqrt(m)
        return xi * root if d >= 0.0 else -xi * root
    if d >= 0.0:
        return xi * math.sqrt(d)
    return -xi * math.sqrt(-d)


class Core:
    """Flattened circuit arrays plus the RK4/bisection stepping loops.

    Junction pressures carry no state: they are re-solved from scratch at
    every right-hand-side evaluation by bisection on the net-flux balance,
    which is monotone in the junction pressure.  When no two junctions are
    adjacent a single sweep is exact; otherwise a fixed number of sweeps is
    used so results stay deterministic.
    """

    def __init__(self, node_kind, node_fixed_p, node_act,
                 act_node, act_vcap, coef_off, coef,
                 jn_nodes, jn_edge_off, jn_edge_idx, jn_edge_sign, single_sweep,
                 edge_from, edge_to, edge_xi, edge_thresh):
        self.node_kind = [int(x) for x in node_kind]
        self.node_fixed_p = [float(x) for x in node_fixed_p]
        self.node_act = [int(x) for x in node_act]
        self.act_node = [int(x) for x in act_node]
        self.act_vcap = [float(x) for x in act_vcap]
        self.coef_off = [int(x) for x in coef_off]
        self.coef = [float(x) for x in coef]
        self.jn_nodes = [int(x) for x in jn_nodes]
        self.jn_edge_off = [int(x) for x in jn_edge_off]
        self.jn_edge_idx = [int(x) for x in jn_edge_idx]
        self.jn_edge_sign = [int(x) for x in jn_edge_sign]
        self.single_sweep = bool(single_sweep)
        self.edge_from = [int(x) for x in edge_from]
        self.edge_to = [int(x) for x in edge_to]
        self.edge_xi = [float(x) for x in edge_xi]
        self.edge_thresh = [float(x) for x in edge_thresh]

        self.n_nodes = len(self.node_kind)
        self.n_edges = len(self.edge_from)
        self.n_act = len(self.act_node)
        self.n_jn = len(self.jn_nodes)

        self._p = [0.0] * self.n_nodes
        self._k1 = [0.0] * self.n_act
        self._k2 = [0.0] * self.n_act
        self._k3 = [0.0] * self.n_act
        self._k4 = [0.0] * self.n_act
        self._vt = [0.0] * self.n_act

    # -- right-hand side -------------------------------------------------

    def _poly(self, a, v):
        lo = self.coef_off[a]
        hi = self.coef_off[a + 1]
        acc = 0.0
        i = hi - 1
        while i >= lo:
            acc = self.coef[i] + v * acc
            i -= 1
        return v * acc

    def _junction_net(self, jslot, open_mask, p, x):
        net = 0.0
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

    def _solve_junction(self, jslot, open_mask, p):
        j = self.jn_nodes[jslot]
        lo_e = self.jn_edge_off[jslot]
        hi_e = self.jn_edge_off[jslot + 1]
        pmin = _INF
        pmax = -_INF
        any_open = False
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
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            if self._junction_net(jslot, open_mask, p, mid) > 0.0:
                lo = mid
            else:
                hi = mid
        # the bracket bottoms out on the float grid near the root; take the
        # candidate with the smallest residual so phantom flows stay minimal
        best = 0.5 * (lo + hi)
        best_net = abs(self._junction_net(jslot, open_mask, p, best))
        for cand in (lo, hi):
            net = abs(self._junction_net(jslot, open_mask, p, cand))
            if net < best_net:
                best = cand
                best_net = net
        p[j] = best

    def _pressures(self, vol, open_mask, p):
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
            for _ in range(sweeps):
                for jslot in range(self.n_jn):
                    self._solve_junction(jslot, open_mask, p)

    def _rhs(self, vol, open_mask, dvdt):
        p = self._p
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
        vol = [float(x) for x in vol_arr]
        open_mask = [int(x) for x in open_mask_arr]
        p = self._p
        self._pressures(vol, open_mask, p)
        for i in range(self.n_nodes):
            p_out[i] = p[i]
        for a in range(self.n_act):
            dvdt_out[a] = 0.0
        for e in range(self.n_edges):
            if open_mask[e]:
                f = _flow(self.edge_xi[e], self.edge_thresh[e],
                          p[self.edge_from[e]] - p[self.edge_to[e]])
            else:
                f = 0.0
            q_out[e] = f
            at = self.node_act[self.edge_to[e]]
            if at >= 0:
                dvdt_out[at] += f
            af = self.node_act[self.edge_from[e]]
            if af >= 0:
                dvdt_out[af] -= f

    def _record(self, vol, open_mask, t, row, rec_t, rec_p, rec_v, rec_q):
        p = self._p
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
                  rec_t, rec_p, rec_v, rec_q, row0,
                  clamp_t, clamp_act, clamp_hi, nclamp0):
        """March classical RK4 over consecutive boundary times.

        ``times_arr`` holds the substep boundaries for one valve-state
        segment; states are recorded at boundaries flagged in
        ``recflags_arr``.  Volumes are clamped to [0, capacity] after each
        step; clamp events are logged into the ``clamp_*`` arrays up to their
        capacity while the total count keeps increasing.

        Returns (next_row, total_clamps, diverged_actuator_or_minus1, time).
        """
        vol = [float(x) for x in vol_arr]
        open_mask = [int(x) for x in open_mask_arr]
        times = [float(x) for x in times_arr]
        rec = [int(x) for x in recflags_arr]
        k1, k2, k3, k4, vt = self._k1, self._k2, self._k3, self._k4, self._vt
        row = row0
        nclamp = nclamp0
        cap = len(clamp_t)
        n_act = self.n_act

        for i in range(len(times) - 1):
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
