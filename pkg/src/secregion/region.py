"""The linearized feasible region over stacked variables (w, x).

A :class:`LinearRegion` stores two dense constraint blocks in the
constant-inside convention::

    a_eq  @ z + f_eq  = 0
    a_in  @ z + f_in <= 0        z = (w_1..w_nw, x_1..x_nx)

The w columns always come first.  For power-system regions, x stacks the
bus voltage magnitudes, bus angles, generator active and reactive
outputs, in ascending bus/generator order; see ``variable_index``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import NetworkCase, RegSpec, ValidationError
from .simplex import FeasibilityTemplate, LpProblem, LpStatus, feasible, solve


@dataclass(frozen=True)
class BuildOptions:
    """Row-selection switches for :func:`build_linear_region`.

    include_ramp
        Emit generator ramp rows (needs ``p_last`` on the generator).
    reverse_branch_rows
        Also limit each branch flow in the to->from orientation
        (only differs from the default rows under asymmetric limits).
    """

    include_ramp: bool = False
    reverse_branch_rows: bool = False


@dataclass(frozen=True)
class LinearRegion:
    n_w: int
    n_x: int
    a_eq: np.ndarray
    f_eq: np.ndarray
    a_in: np.ndarray
    f_in: np.ndarray
    variable_index: dict = field(default_factory=dict)
    reg_nodes: tuple | None = None
    w_max: np.ndarray | None = None

    def __post_init__(self):
        n = self.n_w + self.n_x
        a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n) if np.size(self.a_eq) \
            else np.zeros((0, n))
        a_in = np.asarray(self.a_in, dtype=float).reshape(-1, n) if np.size(self.a_in) \
            else np.zeros((0, n))
        f_eq = np.asarray(self.f_eq, dtype=float).reshape(a_eq.shape[0])
        f_in = np.asarray(self.f_in, dtype=float).reshape(a_in.shape[0])
        for name, arr in (("a_eq", a_eq), ("f_eq", f_eq), ("a_in", a_in), ("f_in", f_in)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        wmax = self.w_max
        if wmax is not None:
            wmax = np.asarray(wmax, dtype=float).reshape(self.n_w)
            wmax.setflags(write=False)
        object.__setattr__(self, "w_max", wmax)

    @property
    def n_vars(self) -> int:
        return self.n_w + self.n_x

    @property
    def eq_block(self):
        return self.a_eq, self.f_eq

    @property
    def ineq_block(self):
        return self.a_in, self.f_in

    def to_dict(self) -> dict:
        return {
            "n_w": self.n_w,
            "n_x": self.n_x,
            "eq_block": {"a": self.a_eq.tolist(), "f": self.f_eq.tolist()},
            "ineq_block": {"a": self.a_in.tolist(), "f": self.f_in.tolist()},
            "variable_index": dict(self.variable_index),
            "reg_nodes": list(self.reg_nodes) if self.reg_nodes is not None else None,
            "w_max": self.w_max.tolist() if self.w_max is not None else None,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearRegion":
        return cls(
            n_w=int(doc["n_w"]), n_x=int(doc["n_x"]),
            a_eq=np.asarray(doc["eq_block"]["a"], dtype=float),
            f_eq=np.asarray(doc["eq_block"]["f"], dtype=float),
            a_in=np.asarray(doc["ineq_block"]["a"], dtype=float),
            f_in=np.asarray(doc["ineq_block"]["f"], dtype=float),
            variable_index=dict(doc.get("variable_index") or {}),
            reg_nodes=tuple(doc["reg_nodes"]) if doc.get("reg_nodes") else None,
            w_max=doc.get("w_max"),
        )


def membership_lp(region: LinearRegion, w) -> LpProblem:
    """Feasibility LP over x with the w columns pinned to the given values."""
    w = np.asarray(w, dtype=float).reshape(region.n_w)
    nw = region.n_w
    return LpProblem(
        objective=np.zeros(region.n_x),
        a_eq=region.a_eq[:, nw:],
        b_eq=-region.f_eq - region.a_eq[:, :nw] @ w,
        a_in=region.a_in[:, nw:],
        b_in=-region.f_in - region.a_in[:, :nw] @ w,
        bounds=None)


def membership(region: LinearRegion, w) -> bool:
    """True iff some x completes w into a point of the region."""
    w = np.asarray(w, dtype=float).reshape(region.n_w)
    nw = region.n_w
    tmpl = getattr(region, "_feas_template", None)
    if tmpl is None:
        tmpl = FeasibilityTemplate(region.a_eq[:, nw:], region.a_in[:, nw:])
        object.__setattr__(region, "_feas_template", tmpl)
    return tmpl.feasible(-region.f_eq - region.a_eq[:, :nw] @ w,
                         -region.f_in - region.a_in[:, :nw] @ w)


def segment_lp(region: LinearRegion, a, b) -> LpProblem:
    """max lambda over the segment a + lambda (b - a) staying in the region.

    Variables are (lambda, x) with lambda in [0, 1]; the objective is
    written as min -lambda.
    """
    a = np.asarray(a, dtype=float).reshape(region.n_w)
    b = np.asarray(b, dtype=float).reshape(region.n_w)
    nw, nx = region.n_w, region.n_x
    delta = b - a
    bounds = np.full((1 + nx, 2), (-np.inf, np.inf))
    bounds[0] = (0.0, 1.0)
    objective = np.zeros(1 + nx)
    objective[0] = -1.0
    return LpProblem(
        objective=objective,
        a_eq=np.column_stack([region.a_eq[:, :nw] @ delta, region.a_eq[:, nw:]]),
        b_eq=-region.f_eq - region.a_eq[:, :nw] @ a,
        a_in=np.column_stack([region.a_in[:, :nw] @ delta, region.a_in[:, nw:]]),
        b_in=-region.f_in - region.a_in[:, :nw] @ a,
        bounds=bounds)


def support_lp(region: LinearRegion, direction) -> LpProblem:
    """LP whose optimum is -max(direction . w) over the region."""
    direction = np.asarray(direction, dtype=float).reshape(region.n_w)
    objective = np.zeros(region.n_vars)
    objective[:region.n_w] = -direction
    return LpProblem(objective=objective,
                     a_eq=region.a_eq, b_eq=-region.f_eq,
                     a_in=region.a_in, b_in=-region.f_in,
                     bounds=None)


def support_value(region: LinearRegion, direction) -> float:
    """max(direction . w) over the region; +inf when unbounded."""
    res = solve(support_lp(region, direction))
    if res.status == LpStatus.UNBOUNDED:
        return np.inf
    if res.status != LpStatus.OPTIMAL:
        raise ValidationError("support LP infeasible: region is empty")
    return -res.objective_value


# ---------------------------------------------------------------------------
# Power-system region assembly


def _bus_admittance(case: NetworkCase, index: dict) -> np.ndarray:
    n = len(case.buses)
    y = np.zeros((n, n), dtype=complex)
    for br in case.branches:
        f, t = index[br.from_bus], index[br.to_bus]
        ys = 1.0 / complex(br.r, br.x_series)
        y[f, f] += ys + 0.5j * br.b_charging
        y[t, t] += ys + 0.5j * br.b_charging
        y[f, t] -= ys
        y[t, f] -= ys
    return y


def build_linear_region(case: NetworkCase, reg: RegSpec,
                        opts: BuildOptions = BuildOptions()) -> LinearRegion:
    """Assemble the linearized feasible region for a case with REG hosts.

    Variables are (w; v, theta, p_g, q_g).  Nodal balance rows use the
    first-order expansion of the power-flow equations at (v, theta) = (1, 0)
    with bus-admittance entries; branch rows use each branch's own series
    conductance/susceptance.  The zero-REG operating point must be feasible
    or a ValidationError is raised.
    """
    case.validate()
    reg.validate_against(case)
    reg = reg.sorted_by_node()

    buses = sorted(case.buses, key=lambda b: b.id)
    bus_pos = {b.id: k for k, b in enumerate(buses)}
    nb = len(buses)
    ng = len(case.generators)
    nw = len(reg.nodes)
    nx = 2 * nb + 2 * ng
    nv = nw + nx

    col_w = {node: k for k, node in enumerate(reg.nodes)}
    col_v = nw
    col_th = nw + nb
    col_pg = nw + 2 * nb
    col_qg = nw + 2 * nb + ng

    variable_index = {}
    for node, k in col_w.items():
        variable_index[f"w:{node}"] = k
    for b, k in bus_pos.items():
        variable_index[f"v:{b}"] = col_v + k
        variable_index[f"theta:{b}"] = col_th + k
    for g in range(ng):
        variable_index[f"pg:{g}"] = col_pg + g
        variable_index[f"qg:{g}"] = col_qg + g

    ybus = _bus_admittance(case, bus_pos)
    g_bus, b_bus = ybus.real, ybus.imag
    gens_at = {k: [] for k in range(nb)}
    for gi, gen in enumerate(case.generators):
        gens_at[bus_pos[gen.bus]].append(gi)

    eq_rows, eq_consts = [], []
    # Active balance: p_i(v, theta) - sum(p_g at i) - w_i + p_load_i = 0
    for i, bus in enumerate(buses):
        row = np.zeros(nv)
        row[col_v + i] += g_bus[i].sum()
        row[col_v:col_v + nb] += g_bus[i]
        row[col_th + i] += b_bus[i].sum()
        row[col_th:col_th + nb] -= b_bus[i]
        for gi in gens_at[i]:
            row[col_pg + gi] -= 1.0
        if bus.id in col_w:
            row[col_w[bus.id]] -= 1.0
        eq_rows.append(row)
        eq_consts.append(-g_bus[i].sum() + bus.p_load)
    # Reactive balance: q_i(v, theta) - sum(q_g at i) + q_load_i = 0
    for i, bus in enumerate(buses):
        row = np.zeros(nv)
        row[col_th + i] += g_bus[i].sum()
        row[col_th:col_th + nb] -= g_bus[i]
        row[col_v + i] -= b_bus[i].sum()
        row[col_v:col_v + nb] -= b_bus[i]
        for gi in gens_at[i]:
            row[col_qg + gi] -= 1.0
        eq_rows.append(row)
        eq_consts.append(b_bus[i].sum() + bus.q_load)
    # Angle reference at the slack bus.
    slack_pos = next(i for i, b in enumerate(buses) if b.type == "slack")
    row = np.zeros(nv)
    row[col_th + slack_pos] = 1.0
    eq_rows.append(row)
    eq_consts.append(0.0)

    in_rows, in_consts = [], []

    def bound_rows(col, lo, hi):
        if np.isfinite(hi):
            row = np.zeros(nv)
            row[col] = 1.0
            in_rows.append(row)
            in_consts.append(-hi)
        if np.isfinite(lo):
            row = np.zeros(nv)
            row[col] = -1.0
            in_rows.append(row)
            in_consts.append(lo)

    for gi, gen in enumerate(case.generators):
        bound_rows(col_pg + gi, gen.p_min, gen.p_max)
        bound_rows(col_qg + gi, gen.q_min, gen.q_max)
    if opts.include_ramp:
        for gi, gen in enumerate(case.generators):
            if gen.p_last is None:
                continue
            bound_rows(col_pg + gi,
                       gen.p_last - gen.ramp_dn if np.isfinite(gen.ramp_dn) else -np.inf,
                       gen.p_last + gen.ramp_up if np.isfinite(gen.ramp_up) else np.inf)
    for i, bus in enumerate(buses):
        bound_rows(col_v + i, bus.v_min, bus.v_max)

    for br in case.branches:
        f, t = bus_pos[br.from_bus], bus_pos[br.to_bus]
        ys = 1.0 / complex(br.r, br.x_series)
        flow = np.zeros(nv)
        flow[col_v + t] += ys.real
        flow[col_v + f] -= ys.real
        flow[col_th + f] += ys.imag
        flow[col_th + t] -= ys.imag
        orientations = [flow] + ([-flow] if opts.reverse_branch_rows else [])
        for expr in orientations:
            if np.isfinite(br.p_max):
                in_rows.append(expr.copy())
                in_consts.append(-br.p_max)
            if np.isfinite(br.p_min):
                in_rows.append(-expr)
                in_consts.append(br.p_min)

    for node in reg.nodes:
        row = np.zeros(nv)
        row[col_w[node]] = -1.0
        in_rows.append(row)
        in_consts.append(0.0)

    region = LinearRegion(
        n_w=nw, n_x=nx,
        a_eq=np.asarray(eq_rows), f_eq=np.asarray(eq_consts),
        a_in=np.asarray(in_rows), f_in=np.asarray(in_consts),
        variable_index=variable_index,
        reg_nodes=reg.nodes,
        w_max=np.asarray(reg.w_max))

    if not membership(region, np.zeros(nw)):
        raise ValidationError(
            "zero-REG operating point is infeasible for this case; "
            "the region has no valid interior anchor")
    return region
