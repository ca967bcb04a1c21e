"""Declarative cost graphs mapping bounded variables to a scalar cost.

A :class:`CostGraph` is built node by node; every node refers only to
nodes created before it, so the graph is acyclic by construction. Node
values are one of

* ``vector``  -- a real or complex 1-D array,
* ``pwc``     -- a PWC scalar (values plus segment durations),
* ``operator``-- a PWC operator series (matrices plus durations),
* ``scalar``  -- a real cost value.

The graph is evaluated with JAX, which supplies exact gradients; the same
graph can be written to and read from JSON for the command-line front end.

Examples
--------
>>> g = CostGraph()
>>> omega = g.variables(4, lower=0.0, upper=1e7)
>>> drive = g.drive(g.pwc(omega, duration=1e-6), 0.5 * np.array([[0, 0], [1, 0]]))
>>> g.set_output(g.optimal_cost(drive, np.array([[0, 1], [1, 0]])))
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import costs, transforms
from ._jax import jax, jnp
from ..pwc import Segmentation, joint_segments

__all__ = ["CostGraph", "Node", "register_op", "complex_to_json", "complex_from_json"]


@dataclass(frozen=True)
class Node:
    """Handle to a graph node."""

    id: str
    kind: str
    size: int = None
    dim: int = None


class _Pwc:
    __slots__ = ("values", "durations")

    def __init__(self, values, durations):
        self.values = values
        self.durations = durations


class _Op:
    __slots__ = ("matrices", "durations")

    def __init__(self, matrices, durations):
        self.matrices = matrices
        self.durations = durations


def complex_to_json(a):
    """Nested lists with every complex entry written as ``[re, im]``."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def complex_from_json(data):
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex values must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# parameters holding complex matrices, serialized as [re, im] pairs
_COMPLEX_PARAMS = {"operator", "target", "noise_operator", "noise_operators", "initial", "final", "value"}

_CUSTOM_OPS = {}


def register_op(name, evaluate, meta):
    """Register an additional node type.

    Parameters
    ----------
    name : str
    evaluate : callable
        ``evaluate(params, *input_values) -> value``; must be JAX traceable.
    meta : callable
        ``meta(params, *input_nodes) -> (kind, size, dim, durations)``.
    """
    _CUSTOM_OPS[name] = (evaluate, meta)


class CostGraph:
    """Composable differentiable cost.

    Variables are declared with :meth:`variables`, which also records
    their bounds. Build nodes with the methods below, then call
    :meth:`set_output` on a scalar node.
    """

    def __init__(self):
        self._nodes = []
        self._meta = {}
        self._lower = []
        self._upper = []
        self._var_names = []
        self.output = None
        self._compiled = None

    # ----------------------------------------------------------- structure
    @property
    def variable_count(self) -> int:
        return len(self._lower)

    @property
    def bounds(self):
        """``(lower, upper)`` arrays for all variables."""
        return np.array(self._lower, dtype=float), np.array(self._upper, dtype=float)

    @property
    def nodes(self):
        return list(self._nodes)

    def _add(self, op, inputs=(), params=None, kind=None, size=None, dim=None, durations=None,
             name=None):
        ids = [n.id if isinstance(n, Node) else n for n in inputs]
        for i in ids:
            if i not in self._meta:
                raise ValueError(f"unknown input node {i!r}")
        node_id = name or f"n{len(self._nodes)}"
        if node_id in self._meta:
            raise ValueError(f"duplicate node id {node_id!r}")
        self._nodes.append({"id": node_id, "op": op, "inputs": ids, "params": params or {}})
        self._meta[node_id] = {"kind": kind, "size": size, "dim": dim, "durations": durations}
        self._compiled = None
        return Node(node_id, kind, size, dim)

    def _m(self, node):
        return self._meta[node.id if isinstance(node, Node) else node]

    def _expect(self, node, *kinds):
        kind = self._m(node)["kind"]
        if kind not in kinds:
            raise ValueError(f"node {getattr(node, 'id', node)!r} is {kind}, expected {kinds}")

    # ------------------------------------------------------------- sources
    def variables(self, count: int, lower=-np.inf, upper=np.inf, name=None) -> Node:
        """A block of ``count`` optimization variables with box bounds."""
        if count < 1:
            raise ValueError("variable blocks must be non-empty")
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (count,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (count,))
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        offset = self.variable_count
        self._lower.extend(lower.tolist())
        self._upper.extend(upper.tolist())
        params = {"offset": offset, "count": int(count), "lower": lower.tolist(), "upper": upper.tolist()}
        return self._add("variables", (), params, "vector", int(count), name=name)

    def constant(self, value, name=None) -> Node:
        value = np.asarray(value)
        kind = "scalar" if value.ndim == 0 else "vector"
        return self._add("constant", (), {"value": value}, kind, value.size, name=name)

    # ----------------------------------------------------------- waveforms
    def pwc(self, values: Node, duration: float = None, durations=None, name=None) -> Node:
        """PWC scalar taking ``values`` on uniform segments of ``duration``.

        ``durations`` may be given instead, either as explicit segment
        durations or as a vector node (variable durations).
        """
        self._expect(values, "vector")
        n = self._m(values)["size"]
        inputs = [values]
        params = {}
        if isinstance(durations, Node):
            self._expect(durations, "vector")
            if self._m(durations)["size"] != n:
                raise ValueError("durations node length differs from the values")
            inputs.append(durations)
            static = None
        else:
            if durations is None:
                if duration is None:
                    raise ValueError("duration or durations is required")
                static = Segmentation.uniform(n, duration).durations
            else:
                static = Segmentation(durations).durations
                if static.size != n:
                    raise ValueError("durations length differs from the values")
            params["durations"] = static.tolist()
        return self._add("pwc", inputs, params, "pwc", n, durations=static, name=name)

    def lti_filter(self, pulse: Node, kernel, segments: int, extend: str = "zero", name=None) -> Node:
        """Filter a PWC pulse and re-discretize it on ``segments`` uniform segments."""
        self._expect(pulse, "pwc")
        durations = self._m(pulse)["durations"]
        if durations is None:
            raise ValueError("filtering requires fixed segment durations")
        if isinstance(kernel, dict):
            kernel = transforms.kernel_from_dict(kernel)
        seg = Segmentation(durations)
        M = transforms.filter_matrix(kernel, seg, segments, extend)
        params = {"kernel": kernel.to_dict(), "segments": int(segments), "extend": extend, "_matrix": M}
        out = Segmentation.uniform(segments, seg.duration).durations
        return self._add("lti_filter", [pulse], params, "pwc", int(segments), durations=out, name=name)

    def crab(self, coefficients: Node, basis, duration: float, segments: int, name=None) -> Node:
        """Basis-function expansion sampled on ``segments`` uniform segments."""
        self._expect(coefficients, "vector")
        M = transforms.crab_matrix(basis, duration, segments)
        if M.shape[1] != self._m(coefficients)["size"]:
            raise ValueError("coefficient count differs from the basis size")
        params = {"basis": basis if isinstance(basis, dict) else None, "duration": duration,
                  "segments": int(segments), "_matrix": M}
        durations = Segmentation.uniform(segments, duration).durations
        return self._add("crab", [coefficients], params, "pwc", int(segments), durations=durations,
                         name=name)

    def symmetrize(self, node: Node, odd: bool = False, name=None) -> Node:
        """Mirror a vector or PWC pulse: ``[a, b, c] -> [a, b, c, c, b, a]``."""
        self._expect(node, "vector", "pwc")
        meta = self._m(node)
        idx = transforms.symmetrize_indices(meta["size"], odd)
        durations = None if meta["durations"] is None else np.asarray(meta["durations"])[idx]
        return self._add("symmetrize", [node], {"odd": bool(odd)}, meta["kind"], idx.size,
                         durations=durations, name=name)

    def mask(self, node: Node, mask, name=None) -> Node:
        """Elementwise product with a binary mask."""
        self._expect(node, "vector")
        mask = np.asarray(mask, dtype=float)
        if mask.shape != (self._m(node)["size"],):
            raise ValueError("mask length does not match the variables")
        if not np.all((mask == 0) | (mask == 1)):
            raise ValueError("mask entries must be 0 or 1")
        return self._add("mask", [node], {"mask": mask.tolist()}, "vector", mask.size, name=name)

    def scale(self, node: Node, factor: float, name=None) -> Node:
        meta = self._m(node)
        return self._add("scale", [node], {"factor": float(factor)}, meta["kind"], meta["size"],
                         meta["dim"], meta["durations"], name=name)

    def _paired(self, op, a, b, name):
        self._expect(a, "pwc")
        self._expect(b, "pwc")
        ma, mb = self._m(a), self._m(b)
        if ma["size"] != mb["size"]:
            raise ValueError("paired pulses must have equal segment counts")
        return self._add(op, [a, b], {}, "pwc", ma["size"], durations=ma["durations"], name=name)

    def polar(self, modulus: Node, phase: Node, name=None) -> Node:
        """Complex pulse ``modulus * exp(i phase)``."""
        return self._paired("polar", modulus, phase, name)

    def cartesian(self, i_quad: Node, q_quad: Node, name=None) -> Node:
        """Complex pulse ``I + iQ``."""
        return self._paired("cartesian", i_quad, q_quad, name)

    # ---------------------------------------------------------- operators
    def drive(self, pulse: Node, operator, name=None) -> Node:
        """Operator series ``gamma(t) C + h.c.``."""
        self._expect(pulse, "pwc")
        op = np.asarray(operator, dtype=complex)
        meta = self._m(pulse)
        return self._add("drive", [pulse], {"operator": op}, "operator", meta["size"], op.shape[0],
                         meta["durations"], name=name)

    def shift(self, pulse: Node, operator, name=None) -> Node:
        """Operator series ``alpha(t) A`` with Hermitian ``A``."""
        self._expect(pulse, "pwc")
        op = np.asarray(operator, dtype=complex)
        if not np.allclose(op, op.conj().T, atol=1e-12):
            raise ValueError("shift operators must be Hermitian")
        meta = self._m(pulse)
        return self._add("shift", [pulse], {"operator": op}, "operator", meta["size"], op.shape[0],
                         meta["durations"], name=name)

    def static_operator(self, operator, duration: float, name=None) -> Node:
        """Constant Hermitian term (e.g. a drift) over ``duration``."""
        op = np.asarray(operator, dtype=complex)
        if not np.allclose(op, op.conj().T, atol=1e-12):
            raise ValueError("static operators must be Hermitian")
        return self._add("static_operator", [], {"operator": op, "duration": float(duration)},
                         "operator", 1, op.shape[0], np.array([float(duration)]), name=name)

    def operator_sum(self, terms, name=None) -> Node:
        """Sum of operator series, resampled onto their joint segmentation."""
        terms = list(terms)
        if not terms:
            raise ValueError("operator_sum needs at least one term")
        metas = [self._m(t) for t in terms]
        for t in terms:
            self._expect(t, "operator")
        dims = {m["dim"] for m in metas}
        if len(dims) != 1:
            raise ValueError(f"operator dimensions differ: {dims}")
        if any(m["durations"] is None for m in metas):
            if len({m["size"] for m in metas}) != 1:
                raise ValueError("variable-duration terms must share one segmentation")
            params = {"_index": None}
            durations, size = None, metas[0]["size"]
        else:
            series = [(np.arange(m["size"]), Segmentation(m["durations"])) for m in metas]
            grid = joint_segments(*series)
            params = {"_index": [np.asarray(v) for v in grid.values]}
            durations, size = grid.segmentation.durations, grid.segmentation.count
        return self._add("operator_sum", terms, params, "operator", size, dims.pop(), durations,
                         name=name)

    # --------------------------------------------------------------- costs
    def _hamiltonian(self, H):
        self._expect(H, "operator")
        return self._m(H)

    def _static_durations(self, H):
        durations = self._m(H)["durations"]
        if durations is None:
            raise ValueError("filter-function costs require fixed segment durations")
        return durations

    @staticmethod
    def _projector(projector, dim):
        if projector is None:
            return np.ones(dim)
        p = np.asarray(getattr(projector, "diagonal", projector), dtype=float)
        if p.shape != (dim,):
            raise ValueError("projector dimension mismatch")
        return p

    def optimal_cost(self, H: Node, target, projector=None, name=None) -> Node:
        """Subspace gate infidelity of the total propagator."""
        meta = self._hamiltonian(H)
        target = np.asarray(target, dtype=complex)
        if target.shape != (meta["dim"], meta["dim"]):
            raise ValueError("target dimension mismatch")
        params = {"target": target, "projector": self._projector(projector, meta["dim"]).tolist()}
        return self._add("optimal_cost", [H], params, "scalar", name=name)

    def state_cost(self, H: Node, initial, final, name=None) -> Node:
        """State-transfer infidelity ``1 - |<final| U |initial>|^2``."""
        meta = self._hamiltonian(H)
        initial = np.asarray(initial, dtype=complex).ravel()
        final = np.asarray(final, dtype=complex).ravel()
        if initial.size != meta["dim"] or final.size != meta["dim"]:
            raise ValueError("state dimension mismatch")
        return self._add("state_cost", [H], {"initial": initial, "final": final}, "scalar", name=name)

    def _noise_params(self, H, projector, samples):
        meta = self._hamiltonian(H)
        durations = self._static_durations(H)
        m = samples or max(1000, 10 * durations.size)
        return meta, {"projector": self._projector(projector, meta["dim"]).tolist(), "samples": int(m)}

    def quasi_static_cost(self, H: Node, noise_operators, projector=None, samples=None, name=None) -> Node:
        """``sum_k F_k(0) / 2 pi``."""
        meta, params = self._noise_params(H, projector, samples)
        params["noise_operators"] = np.asarray([np.asarray(n, dtype=complex) for n in noise_operators])
        return self._add("quasi_static_cost", [H], params, "scalar", name=name)

    def fixed_freq_cost(self, H: Node, noise_operator, frequency: float, projector=None, samples=None,
                        name=None) -> Node:
        """``F(omega) / 2 pi`` at a single angular frequency."""
        meta, params = self._noise_params(H, projector, samples)
        params.update(noise_operator=np.asarray(noise_operator, dtype=complex), frequency=float(frequency))
        return self._add("fixed_freq_cost", [H], params, "scalar", name=name)

    def band_cost(self, H: Node, noise_operator, band, psd=1.0, points: int = 64, projector=None,
                  samples=None, name=None) -> Node:
        """``(1/2pi) int_band S(omega) F(omega) d omega`` with a one-sided PSD.

        ``psd`` is a constant, a callable, or a ``OneSidedPsd``.
        """
        meta, params = self._noise_params(H, projector, samples)
        w1, w2 = map(float, band)
        if not 0 <= w1 < w2:
            raise ValueError("band must satisfy 0 <= w1 < w2")
        freqs = np.linspace(w1, w2, int(points))
        if callable(psd):
            values = np.asarray(psd(freqs), dtype=float)
        else:
            values = np.broadcast_to(np.asarray(psd, dtype=float), freqs.shape)
        params.update(noise_operator=np.asarray(noise_operator, dtype=complex), band=[w1, w2],
                      frequencies=freqs.tolist(), psd=values.tolist())
        return self._add("band_cost", [H], params, "scalar", name=name)

    def duration_penalty(self, source: Node, max_duration: float, weight: float = 1.0, name=None) -> Node:
        """Quadratic hinge on total duration.

        ``source`` is a vector node of durations or any pulse/operator node,
        whose total duration is used.
        """
        self._expect(source, "vector", "pwc", "operator")
        params = {"max_duration": float(max_duration), "weight": float(weight)}
        return self._add("duration_penalty", [source], params, "scalar", name=name)

    def weighted_sum(self, terms, weights=None, name=None) -> Node:
        """Linear combination of scalar costs with non-negative weights."""
        terms = list(terms)
        for t in terms:
            self._expect(t, "scalar")
        weights = np.ones(len(terms)) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (len(terms),) or np.any(weights < 0) or not np.any(weights > 0):
            raise ValueError("weights must be non-negative with at least one positive entry")
        return self._add("weighted_sum", terms, {"weights": weights.tolist()}, "scalar", name=name)

    def custom(self, fn, inputs, kind="scalar", size=None, dim=None, durations=None, name=None) -> Node:
        """Arbitrary JAX-traceable function of input node values (not serializable)."""
        return self._add("custom", inputs, {"fn": fn}, kind, size, dim, durations, name=name)

    def node(self, op, inputs=(), name=None, **params) -> Node:
        """Add a registered custom node type."""
        if op not in _CUSTOM_OPS:
            raise ValueError(f"unknown node type {op!r}")
        _, meta = _CUSTOM_OPS[op]
        kind, size, dim, durations = meta(params, *[self._m(i) for i in inputs])
        return self._add(op, inputs, params, kind, size, dim, durations, name=name)

    def set_output(self, node: Node):
        self._expect(node, "scalar")
        self.output = node.id if isinstance(node, Node) else node
        self._compiled = None
        return self

    # ---------------------------------------------------------- evaluation
    def _evaluate_node(self, node, args, v):
        op, p = node["op"], node["params"]
        if op == "variables":
            return v[p["offset"]:p["offset"] + p["count"]]
        if op == "constant":
            return jnp.asarray(p["value"])
        if op == "pwc":
            durations = args[1] if len(args) > 1 else np.asarray(p["durations"])
            return _Pwc(args[0], durations)
        if op in ("lti_filter", "crab"):
            src = args[0].values if isinstance(args[0], _Pwc) else args[0]
            M = p["_matrix"]
            return _Pwc(jnp.asarray(M) @ src, self._meta[node["id"]]["durations"])
        if op == "symmetrize":
            x = args[0]
            if isinstance(x, _Pwc):
                idx = transforms.symmetrize_indices(x.values.shape[0], p["odd"])
                return _Pwc(x.values[idx], x.durations[idx])
            return x[transforms.symmetrize_indices(x.shape[0], p["odd"])]
        if op == "mask":
            return args[0] * jnp.asarray(p["mask"])
        if op == "scale":
            x = args[0]
            if isinstance(x, _Pwc):
                return _Pwc(x.values * p["factor"], x.durations)
            if isinstance(x, _Op):
                return _Op(x.matrices * p["factor"], x.durations)
            return x * p["factor"]
        if op == "polar":
            return _Pwc(args[0].values * jnp.exp(1j * args[1].values), args[0].durations)
        if op == "cartesian":
            return _Pwc(args[0].values + 1j * args[1].values, args[0].durations)
        if op == "drive":
            part = args[0].values[:, None, None] * jnp.asarray(p["operator"])
            return _Op(part + jnp.conj(jnp.swapaxes(part, -1, -2)), args[0].durations)
        if op == "shift":
            return _Op(jnp.real(args[0].values)[:, None, None] * jnp.asarray(p["operator"]),
                       args[0].durations)
        if op == "static_operator":
            return _Op(jnp.asarray(p["operator"])[None], np.array([p["duration"]]))
        if op == "operator_sum":
            index = p["_index"]
            if index is None:
                total = sum(a.matrices for a in args)
                return _Op(total, args[0].durations)
            total = sum(a.matrices[jnp.asarray(ix)] for a, ix in zip(args, index))
            return _Op(total, self._meta[node["id"]]["durations"])
        if op == "optimal_cost":
            H = args[0]
            return costs.optimal_cost(H.matrices, H.durations, p["target"], p["projector"])
        if op == "state_cost":
            H = args[0]
            return costs.state_cost(H.matrices, H.durations, p["initial"], p["final"])
        if op == "quasi_static_cost":
            H = args[0]
            return costs.quasi_static_cost(H.matrices, H.durations, p["noise_operators"],
                                           p["projector"], p["samples"])
        if op == "fixed_freq_cost":
            H = args[0]
            return costs.fixed_freq_cost(H.matrices, H.durations, p["noise_operator"], p["frequency"],
                                         p["projector"], p["samples"])
        if op == "band_cost":
            H = args[0]
            return costs.band_cost(H.matrices, H.durations, p["noise_operator"], p["frequencies"],
                                   p["psd"], p["projector"], p["samples"])
        if op == "duration_penalty":
            x = args[0]
            durations = x.durations if isinstance(x, (_Pwc, _Op)) else x
            return costs.duration_penalty(jnp.asarray(durations), p["max_duration"], p["weight"])
        if op == "weighted_sum":
            return sum(w * a for w, a in zip(p["weights"], args))
        if op == "custom":
            return p["fn"](*args)
        if op in _CUSTOM_OPS:
            return _CUSTOM_OPS[op][0](p, *args)
        raise ValueError(f"unknown node type {op!r}")

    def _forward(self, v, output=None):
        output = output or self.output
        values = {}
        for node in self._nodes:
            args = [values[i] for i in node["inputs"]]
            values[node["id"]] = self._evaluate_node(node, args, v)
            if node["id"] == output:
                break
        return jnp.real(values[output])

    def _compile(self):
        if self.output is None:
            raise ValueError("graph output is not set")
        if self._compiled is None:
            f = lambda v: self._forward(v)  # noqa: E731
            self._compiled = (jax.jit(f), jax.jit(jax.value_and_grad(f)))
        return self._compiled

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.variable_count,):
            raise ValueError(f"expected {self.variable_count} variables, got shape {v.shape}")
        return v

    def evaluate(self, v) -> float:
        """Cost at ``v``."""
        return float(self._compile()[0](self._check(v)))

    def value_and_grad(self, v):
        """Cost and gradient at ``v`` as numpy values."""
        value, grad = self._compile()[1](self._check(v))
        return float(value), np.asarray(grad, dtype=float)

    def gradient(self, v) -> np.ndarray:
        return self.value_and_grad(v)[1]

    def evaluate_node(self, node, v):
        """Value of an intermediate node (numpy), useful for inspecting pulses."""
        node_id = node.id if isinstance(node, Node) else node
        values = {}
        for n in self._nodes:
            values[n["id"]] = self._evaluate_node(n, [values[i] for i in n["inputs"]],
                                                  jnp.asarray(self._check(v)))
            if n["id"] == node_id:
                break
        out = values[node_id]
        if isinstance(out, _Pwc):
            return np.asarray(out.values), np.asarray(out.durations)
        if isinstance(out, _Op):
            return np.asarray(out.matrices), np.asarray(out.durations)
        return np.asarray(out)

    # --------------------------------------------------------------- JSON
    def to_dict(self) -> dict:
        nodes = []
        for node in self._nodes:
            if node["op"] == "custom":
                raise ValueError("graphs with custom Python nodes cannot be serialized")
            params = {}
            for key, val in node["params"].items():
                if key.startswith("_"):
                    continue
                if key in _COMPLEX_PARAMS:
                    params[key] = complex_to_json(val)
                elif isinstance(val, np.ndarray):
                    params[key] = val.tolist()
                else:
                    params[key] = val
            if node["op"] == "crab" and params.get("basis") is None:
                raise ValueError("CRAB nodes with callable bases cannot be serialized")
            nodes.append({"id": node["id"], "op": node["op"], "inputs": list(node["inputs"]),
                          "params": params})
        return {"nodes": nodes, "output": self.output}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "CostGraph":
        """Rebuild a graph written by :meth:`to_dict`."""
        from .. import scenarios  # noqa: F401  (registers scenario node types)

        g = cls()
        handles = {}

        def ref(i):
            if i not in handles:
                raise ValueError(f"node refers to unknown or later node {i!r}")
            return handles[i]

        for node in data["nodes"]:
            op, p, nid = node["op"], dict(node.get("params", {})), node["id"]
            inputs = [ref(i) for i in node.get("inputs", [])]
            for key in list(p):
                if key in _COMPLEX_PARAMS:
                    p[key] = complex_from_json(p[key])
            if op == "variables":
                h = g.variables(p["count"], np.asarray(p.get("lower", -np.inf), dtype=float),
                                np.asarray(p.get("upper", np.inf), dtype=float), name=nid)
            elif op == "constant":
                h = g.constant(p["value"].real if np.all(p["value"].imag == 0) else p["value"], name=nid)
            elif op == "pwc":
                if len(inputs) > 1:
                    h = g.pwc(inputs[0], durations=inputs[1], name=nid)
                elif "durations" in p:
                    h = g.pwc(inputs[0], durations=p["durations"], name=nid)
                else:
                    h = g.pwc(inputs[0], duration=p["duration"], name=nid)
            elif op == "lti_filter":
                h = g.lti_filter(inputs[0], p["kernel"], p["segments"], p.get("extend", "zero"), name=nid)
            elif op == "crab":
                h = g.crab(inputs[0], p["basis"], p["duration"], p["segments"], name=nid)
            elif op == "symmetrize":
                h = g.symmetrize(inputs[0], p.get("odd", False), name=nid)
            elif op == "mask":
                h = g.mask(inputs[0], p["mask"], name=nid)
            elif op == "scale":
                h = g.scale(inputs[0], p["factor"], name=nid)
            elif op in ("polar", "cartesian"):
                h = getattr(g, op)(inputs[0], inputs[1], name=nid)
            elif op in ("drive", "shift"):
                h = getattr(g, op)(inputs[0], p["operator"], name=nid)
            elif op == "static_operator":
                h = g.static_operator(p["operator"], p["duration"], name=nid)
            elif op == "operator_sum":
                h = g.operator_sum(inputs, name=nid)
            elif op == "optimal_cost":
                h = g.optimal_cost(inputs[0], p["target"], p.get("projector"), name=nid)
            elif op == "state_cost":
                h = g.state_cost(inputs[0], p["initial"], p["final"], name=nid)
            elif op == "quasi_static_cost":
                h = g.quasi_static_cost(inputs[0], list(p["noise_operators"]), p.get("projector"),
                                        p.get("samples"), name=nid)
            elif op == "fixed_freq_cost":
                h = g.fixed_freq_cost(inputs[0], p["noise_operator"], p["frequency"],
                                      p.get("projector"), p.get("samples"), name=nid)
            elif op == "band_cost":
                freqs = np.asarray(p["frequencies"], dtype=float)
                psd = np.asarray(p["psd"], dtype=float)
                h = g.band_cost(inputs[0], p["noise_operator"], p["band"],
                                psd=lambda w, f=freqs, s=psd: np.interp(w, f, s),
                                points=len(freqs), projector=p.get("projector"),
                                samples=p.get("samples"), name=nid)
            elif op == "duration_penalty":
                h = g.duration_penalty(inputs[0], p["max_duration"], p.get("weight", 1.0), name=nid)
            elif op == "weighted_sum":
                h = g.weighted_sum(inputs, p.get("weights"), name=nid)
            elif op in _CUSTOM_OPS:
                h = g.node(op, inputs, name=nid, **p)
            else:
                raise ValueError(f"unknown node type {op!r}")
            handles[nid] = h
        if data.get("output") is None:
            raise ValueError("graph output is not declared")
        g.set_output(ref(data["output"]))
        return g

    @classmethod
    def from_json(cls, text: str) -> "CostGraph":
        return cls.from_dict(json.loads(text))
