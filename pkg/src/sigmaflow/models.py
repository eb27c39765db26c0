"""Built-in model manifolds with soliton data and golden curvature values.

The catalog covers the flat space, the round sphere in the stereographic
chart, hyperbolic space in the Poincare ball, the product of a line with a
round sphere, the diagonal log-cosh metric on R^n, and warped products over
an interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .curvature import GeometryError, MetricChart, curvature_at, curvature_taylor, values
from .tensor import TensorValue


@dataclass
class ModelManifold:
    name: str
    chart: MetricChart
    potential: "ex.Expr | None" = None      # gradient soliton potential f
    vector_field: list | None = None        # contravariant Expr components
    lam: "ex.Expr | None" = None            # soliton function lambda
    k: int = 1
    l: int = 1
    golden: list = field(default_factory=list)  # (quantity, expected, tol, note)


def _sq_norm(n: int, start: int = 1) -> str:
    return "(" + " + ".join(f"x{i}^2" for i in range(start, start + n)) + ")"


def _diag_chart(n: int, entry: str, box: float) -> MetricChart:
    comps = [[entry if i == j else "0" for j in range(n)] for i in range(n)]
    return MetricChart(n, comps, [(-box, box)] * n)


def _logq_const(n: int, k: int, l: int, base: float) -> float:
    """log(sigma_k/sigma_l) for constant Schouten eigenvalue ``base``."""
    sk = math.comb(n, k) * base ** k
    sl = math.comb(n, l) * base ** l
    if sk * sl <= 0:
        raise GeometryError(f"cone condition fails for (k,l)=({k},{l})")
    return math.log(abs(sk)) - math.log(abs(sl))


# -- the catalog -----------------------------------------------------------


def euclidean(n: int) -> ModelManifold:
    chart = _diag_chart(n, "1", 2.0)
    return ModelManifold(
        name=f"euclidean:{n}", chart=chart,
        golden=[("scalar", 0.0, 1e-12, "flat space"),
                ("riemann_sup", 0.0, 1e-12, "flat space")],
    )


def sphere(n: int, k: int = 2, l: int = 1, v=None) -> ModelManifold:
    """Round unit sphere, stereographic chart g = 4 (1+|x|^2)^-2 delta.

    Soliton data: f = h_v (ambient height pulled back through the inverse
    stereographic map), lambda = h_v + log(sigma_k/sigma_l)."""
    if n < 3:
        raise GeometryError("sigma-bearing models need n >= 3")
    chart = _diag_chart(n, f"4/(1+{_sq_norm(n)})^2", 0.9)
    if v is None:
        v = np.arange(1.0, n + 2.0)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    h = _sphere_height(n, v)
    logq = _logq_const(n, k, l, 0.5)
    lam = f"({h}) + {logq!r}"
    golden = [("scalar", float(n * (n - 1)), 1e-9, "round sphere"),
              ("schouten_vs_metric", 0.5, 1e-9, "A = g/2")]
    golden += [(f"sigma:{j}", math.comb(n, j) / 2 ** j, 1e-9, "sigma table")
               for j in range(1, n + 1)]
    return ModelManifold(
        name=f"sphere:{n}", chart=chart,
        potential=ex.parse(h), lam=ex.parse(lam), k=k, l=l, golden=golden,
    )


def _sphere_height(n: int, v) -> str:
    s = _sq_norm(n)
    lin = " + ".join(f"{float(v[i - 1])!r}*x{i}" for i in range(1, n + 1))
    return f"(2*({lin}) + {float(v[n])!r}*(1 - {s})) / (1 + {s})"


def hyperbolic(n: int, k: int = 3, l: int = 1, v=None) -> ModelManifold:
    """Hyperbolic space, Poincare ball chart g = 4 (1-|x|^2)^-2 delta.

    Soliton data: f = h_v with the ball-to-hyperboloid height, lambda =
    -h_v + log(sigma_k/sigma_l); requires k = l (mod 2) for the cone
    condition."""
    if n < 3:
        raise GeometryError("sigma-bearing models need n >= 3")
    if (k - l) % 2 != 0:
        raise GeometryError(
            f"hyperbolic quotient needs k = l (mod 2); got ({k},{l})")
    box = 0.85 / math.sqrt(n)
    chart = _diag_chart(n, f"4/(1-{_sq_norm(n)})^2", box)
    if v is None:
        vp = 0.1 * np.arange(1.0, n + 1.0)  # spatial part, arbitrary
        v = np.concatenate(([math.sqrt(1.0 + vp @ vp)], vp))
    v = np.asarray(v, dtype=float)
    h = _hyperbolic_height(n, v)
    logq = _logq_const(n, k, l, -0.5)
    lam = f"-({h}) + {logq!r}"
    golden = [("scalar", float(-n * (n - 1)), 1e-9, "hyperbolic space"),
              ("schouten_vs_metric", -0.5, 1e-9, "A = -g/2")]
    golden += [(f"sigma:{j}", (-1) ** j * math.comb(n, j) / 2 ** j, 1e-9, "sigma table")
               for j in range(1, n + 1)]
    return ModelManifold(
        name=f"hyperbolic:{n}", chart=chart,
        potential=ex.parse(h), lam=ex.parse(lam), k=k, l=l, golden=golden,
    )


def _hyperbolic_height(n: int, v) -> str:
    # hyperboloid embedding of the ball: X_1 = (1+s)/(1-s), X_{i+1} = 2 x_i/(1-s);
    # h_v = <X, v> in the Lorentzian pairing -X_1 v_1 + sum X_{i+1} v_{i+1}
    s = _sq_norm(n)
    lin = " + ".join(f"{float(v[i])!r}*x{i}" for i in range(1, n + 1))
    return f"(-{float(v[0])!r}*(1 + {s}) + 2*({lin})) / (1 - {s})"


def product_line_sphere(n: int) -> ModelManifold:
    """R x S^n with f = t: the trivial quotient soliton with k = l.

    The paper's displayed metric dt^2 + g_{R^n} is read as a typo for
    dt^2 + g_{S^n}; with flat g_{R^n} every sigma_j would vanish and no
    quotient could be formed."""
    dim = n + 1
    s = _sq_norm(n, start=2)
    comps = [["0"] * dim for _ in range(dim)]
    comps[0][0] = "1"
    for i in range(1, dim):
        comps[i][i] = f"4/(1+{s})^2"
    domain = [(-1.0, 1.0)] + [(-0.9, 0.9)] * n
    chart = MetricChart(dim, comps, domain)
    # sigma_1 computes to (n-1)/2 here, not the n/2 the source example quotes;
    # with k = l the quotient is 1 either way and the soliton is trivial.
    golden = [("sigma:1", (n - 1) / 2.0, 1e-9, "product line x sphere")]
    return ModelManifold(
        name=f"product_line_sphere:{n}", chart=chart,
        potential=ex.parse("x1"), lam=ex.parse("0"), k=1, l=1, golden=golden,
    )


def example4(n: int, k: int = 3, l: int = 1) -> ModelManifold:
    """Diagonal metric g_ii = e^{2 u_i} on R^n with u_i = log cosh(x_{tau(i)})
    for even i (tau the n-cycle), zero for odd i.

    For even n this is a product of hyperbolic planes, hence Einstein with
    Ric = -g; for odd n one coordinate direction stays flat and the metric
    is not Einstein (the golden Einstein values are only attached for even
    n).  X with components (0,1,0,1,...) is a Killing field either way."""
    if n < 4:
        raise GeometryError("the log-cosh model needs n >= 4")
    comps = [["0"] * n for _ in range(n)]
    for i in range(1, n + 1):
        if i % 2 == 0:
            tau = i + 1 if i < n else 1
            comps[i - 1][i - 1] = f"cosh(x{tau})^2"
        else:
            comps[i - 1][i - 1] = "1"
    chart = MetricChart(n, comps, [(-1.0, 1.0)] * n)
    xfield = [ex.parse("1" if i % 2 == 0 else "0") for i in range(1, n + 1)]
    golden = []
    if n % 2 == 0:
        base = -0.5 / (n - 1)  # Schouten eigenvalue of an Einstein Ric = -g
        logq = _logq_const(n, k, l, base)
        golden = [("ricci_vs_metric", -1.0, 1e-9, "product of hyperbolic planes")]
        golden += [(f"sigma:{j}",
                    (-1) ** j * math.comb(n, j) / (2 ** j * (n - 1) ** j),
                    1e-9, "Einstein sigma table") for j in range(1, n + 1)]
    else:
        # odd n: one direction stays flat, the metric is not Einstein and the
        # Schouten spectrum has mixed signs.  The quotient curvature is still
        # constant (the metric is homogeneous), but the default quotient pair
        # may violate the cone condition; fall back to the first admissible
        # pair and compute log(sigma_k/sigma_l) once through the pipeline.
        from .sigma import sigma_profile
        pack = curvature_at(chart, np.full(n, 0.2))
        try:
            prof = sigma_profile(pack, k, l)
        except GeometryError:
            prof = None
            for kk in range(2, n + 1):
                for ll in range(1, kk):
                    try:
                        prof = sigma_profile(pack, kk, ll)
                        k, l = kk, ll
                        break
                    except GeometryError:
                        continue
                if prof is not None:
                    break
            if prof is None:
                raise
        logq = prof.log_quotient
    return ModelManifold(
        name=f"example4:{n}", chart=chart,
        vector_field=xfield, lam=ex.parse(repr(logq)), k=k, l=l, golden=golden,
    )


# -- warped products -------------------------------------------------------


@dataclass
class WarpedProductSpec:
    fiber: ModelManifold
    xi: "ex.Expr"                 # warping factor as an expression in x1 = t
    interval: tuple[float, float]


def warped(xi, fiber: ModelManifold, interval=(0.5, 1.5)) -> ModelManifold:
    """Warped product dt^2 + xi(t)^2 g_fiber; fiber coordinates shift up by
    one so that x1 is the interval coordinate."""
    spec = warped_spec(xi, fiber, interval)
    return ModelManifold(name=f"warped[{ex.unparse(spec.xi)};{fiber.name}]",
                         chart=warped_chart(spec))


def warped_spec(xi, fiber: ModelManifold, interval=(0.5, 1.5)) -> WarpedProductSpec:
    xi = ex.parse(xi) if isinstance(xi, str) else xi
    lo, hi = interval
    for t in np.linspace(lo, hi, 7):
        if ex.eval_float(xi, [t]) <= 0.0:
            raise GeometryError(f"warping factor must be positive on the interval; "
                                f"fails at t = {t}")
    return WarpedProductSpec(fiber=fiber, xi=xi, interval=(float(lo), float(hi)))


def warped_chart(spec: WarpedProductSpec) -> MetricChart:
    m = spec.fiber.chart.dim
    dim = m + 1
    xi2 = ex.Bin("^", spec.xi, ex.Num(2.0))
    comps = [[ex.Num(0.0)] * dim for _ in range(dim)]
    comps[0][0] = ex.Num(1.0)
    for i in range(m):
        for j in range(m):
            fib = ex.shift_vars(spec.fiber.chart.comps[i][j], 1)
            comps[i + 1][j + 1] = ex.Bin("*", xi2, fib)
    domain = [spec.interval] + spec.fiber.chart.domain
    return MetricChart(dim, comps, domain)


def warped_ricci_formula(spec: WarpedProductSpec, point) -> TensorValue:
    """Ricci of dt^2 + xi^2 g_F assembled from the warped-product formula
    Ric = Ric^F - (n-1)(xi''/xi) dt (x) dt - [(n-2) xi'^2 + xi xi''] g^F,
    in the coordinates of ``warped_chart`` (fiber block unscaled by xi^2)."""
    point = np.asarray(point, dtype=float)
    m = spec.fiber.chart.dim
    n = m + 1
    t, fiber_pt = point[0], point[1:]
    xt = ex.eval_taylor(spec.xi, [t])
    xi, dxi, ddxi = xt.value, xt.derivative((1,)), xt.derivative((2,))
    if xi <= 0.0:
        raise GeometryError(f"warping factor non-positive at t = {t}")
    fiber_pack = curvature_at(spec.fiber.chart, fiber_pt)
    gf = fiber_pack.g
    out = np.zeros((n, n))
    out[0, 0] = -(n - 1) * ddxi / xi
    out[1:, 1:] = fiber_pack.ricci - ((n - 2) * dxi ** 2 + xi * ddxi) * gf
    return TensorValue(n, (0, 2), out)


# -- name resolution -------------------------------------------------------

_XI_NAMES = {"one": "1", "sinh": "sinh(x1)", "cosh": "cosh(x1)"}


def builtin(name: str) -> ModelManifold:
    """Resolve a CLI-style model name such as ``sphere:4`` or
    ``warped:sinh:sphere:3``."""
    parts = name.replace("(", ":").replace(")", "").split(":")
    kind = parts[0]
    try:
        if kind == "euclidean":
            return euclidean(int(parts[1]))
        if kind == "sphere":
            return sphere(int(parts[1]))
        if kind == "hyperbolic":
            return hyperbolic(int(parts[1]))
        if kind == "product_line_sphere":
            return product_line_sphere(int(parts[1]))
        if kind == "example4":
            return example4(int(parts[1]))
        if kind == "warped":
            xi = _XI_NAMES.get(parts[1], parts[1])
            fiber = builtin(":".join(parts[2:]))
            interval = (0.5, 1.5) if "sinh" in xi else (-1.0, 1.0)
            return warped(xi, fiber, interval)
    except (IndexError, ValueError) as err:
        raise GeometryError(f"malformed model name {name!r}: {err}") from err
    raise GeometryError(f"unknown model {name!r}")


# -- golden-value runner ---------------------------------------------------


def check_golden(model: ModelManifold, points) -> list[tuple[str, float, float, bool]]:
    """Evaluate every golden entry at every point.  Returns
    (quantity, worst error, tolerance, passed) rows."""
    from .sigma import sigma_profile

    rows = []
    for quantity, expected, tol, _note in model.golden:
        worst = 0.0
        for x in points:
            pack = curvature_at(model.chart, x)
            if quantity == "scalar":
                err = abs(pack.scalar - expected) / max(1.0, abs(expected))
            elif quantity == "riemann_sup":
                err = float(np.max(np.abs(pack.riemann)))
            elif quantity == "ricci_vs_metric":
                err = float(np.max(np.abs(pack.ricci - expected * pack.g)))
            elif quantity == "schouten_vs_metric":
                err = float(np.max(np.abs(pack.schouten - expected * pack.g)))
            elif quantity.startswith("sigma:"):
                j = int(quantity.split(":")[1])
                prof = sigma_profile(pack, model.k, model.l)
                err = abs(prof.sigmas[j] - expected) / max(1.0, abs(expected))
            else:
                raise ValueError(f"unknown golden quantity {quantity!r}")
            worst = max(worst, err)
        rows.append((quantity, worst, tol, worst < tol))
    return rows
