"""sigma_k-curvatures, quotient curvature, Newton tensors and the conformal
transformation laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from . import taylor
from .curvature import (CurvaturePack, GeometryError, MetricChart, TaylorCurvature,
                        _as_expr, _obj, curvature_taylor, values)
from .tensor import (SymmetricSpectrum, TensorValue, elementary_all,
                     sigmas_from_power_sums, sym_eigenvalues)


class ConeConditionError(GeometryError):
    """sigma_k * sigma_l <= 0: the quotient curvature is undefined."""

    def __init__(self, k, l, sigma_k, sigma_l):
        super().__init__(
            f"cone condition violated: sigma_{k} = {sigma_k:.6g}, "
            f"sigma_{l} = {sigma_l:.6g}, product <= 0"
        )
        self.sigma_k = sigma_k
        self.sigma_l = sigma_l


@dataclass(frozen=True)
class SigmaProfile:
    n: int
    sigmas: np.ndarray          # sigma_0 .. sigma_n
    k: int
    l: int
    log_quotient: float
    cone_ok: bool


def sigma_profile(pack: CurvaturePack, k: int, l: int) -> SigmaProfile:
    """All sigma_j of g^{-1}A at the pack's point plus log(sigma_k/sigma_l).

    Raises ConeConditionError when sigma_k * sigma_l <= 0.
    """
    n = pack.dim
    if n < 3:
        raise GeometryError("sigma-curvatures need dimension >= 3")
    if not (0 <= k <= n and 0 <= l <= n):
        raise GeometryError(f"quotient indices ({k},{l}) out of range 0..{n}")
    endo = TensorValue(n, (1, 1), pack.endo)
    spec = sym_eigenvalues(endo, pack.g)
    sigmas = elementary_all(spec.eigenvalues)
    sk, sl = sigmas[k], sigmas[l]
    cone_ok = sk * sl > 0.0
    if not cone_ok:
        raise ConeConditionError(k, l, sk, sl)
    # log of the positive ratio, computed as a difference of log-magnitudes
    logq = math.log(abs(sk)) - math.log(abs(sl))
    return SigmaProfile(n=n, sigmas=sigmas, k=k, l=l, log_quotient=logq, cone_ok=True)


@dataclass(frozen=True)
class NewtonTensor:
    k: int
    value: TensorValue  # (1,1)


def newton_tensor(pack: CurvaturePack, k: int) -> NewtonTensor:
    """T_k = sum_{j<=k} (-1)^j sigma_{k-j} (g^{-1}A)^j, by Horner evaluation."""
    n = pack.dim
    if not 0 <= k <= n - 1:
        raise GeometryError(f"Newton tensor index k={k} out of range 0..{n - 1}")
    endo = TensorValue(n, (1, 1), pack.endo)
    spec = sym_eigenvalues(endo, pack.g)
    sigmas = elementary_all(spec.eigenvalues)
    a = pack.endo
    # Horner: T_k = sigma_k I - A(sigma_{k-1} I - A(... sigma_0 I))
    acc = sigmas[0] * np.eye(n)
    for j in range(1, k + 1):
        acc = sigmas[j] * np.eye(n) - a @ acc
    return NewtonTensor(k, TensorValue(n, (1, 1), acc))


def sigma_taylor(tc: TaylorCurvature):
    """sigma_0..sigma_n of g^{-1}A as Taylor scalars (Newton's identities on
    power traces; no eigenvalues needed in the Taylor ring)."""
    n = tc.dim
    a = tc.endo
    ctx = a[0, 0].ctx
    powers = []
    cur = a
    for _ in range(n):
        tr = ctx.constant(0.0)
        for i in range(n):
            tr = tr + cur[i, i]
        powers.append(tr)
        cur = _mat_mul(cur, a)
    return sigmas_from_power_sums(powers, n)


def _mat_mul(a, b):
    n = a.shape[0]
    out = _obj((n, n))
    for i in range(n):
        for j in range(n):
            acc = a[i, 0] * b[0, j]
            for k in range(1, n):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc
    return out


def newton_tensor_taylor(tc: TaylorCurvature, k: int):
    n = tc.dim
    sig = sigma_taylor(tc)
    ctx = tc.scalar.ctx
    eye = _obj((n, n))
    for i in range(n):
        for j in range(n):
            eye[i, j] = ctx.constant(1.0 if i == j else 0.0)
    acc = eye  # sigma_0 I
    for j in range(1, k + 1):
        prod = _mat_mul(tc.endo, acc)
        acc = _obj((n, n))
        for a_ in range(n):
            for b_ in range(n):
                acc[a_, b_] = (sig[j] if a_ == b_ else ctx.constant(0.0)) - prod[a_, b_]
    return acc


def log_quotient_taylor(tc: TaylorCurvature, k: int, l: int):
    """log(sigma_k/sigma_l) as a Taylor scalar (log|sigma_k| - log|sigma_l|),
    guarded by the cone condition."""
    sig = sigma_taylor(tc)
    sk, sl = sig[k], sig[l]
    if sk.value * sl.value <= 0.0:
        raise ConeConditionError(k, l, sk.value, sl.value)
    return taylor.log_abs(sk) - taylor.log_abs(sl)


def divergence_newton(chart: MetricChart, x, k: int) -> TensorValue:
    """(div T_k)_j = nabla_i (T_k)^i_j by pipeline re-differentiation.

    Returned for inspection; the vanishing div T_k = 0 is only asserted on
    (locally) conformally flat charts, where the identity is established.
    """
    tc = curvature_taylor(chart, x)
    if not 0 <= k <= tc.dim - 1:
        raise GeometryError(f"Newton tensor index k={k} out of range 0..{tc.dim - 1}")
    tk = newton_tensor_taylor(tc, k)
    div = tc.div_endomorphism(tk)
    return TensorValue(tc.dim, (0, 1), values(div))


# -- conformal transformation laws ----------------------------------------


def _conformal_schouten_taylor(tc0: TaylorCurvature, w):
    """Schouten of e^{2w} g_0 from base-chart data (Taylor level):
    A = A_0 - hess_0 w + dw (x) dw - 1/2 |dw|^2_0 g_0."""
    n = tc0.dim
    hess = tc0.hessian_scalar(w)
    dw = [w.deriv(i) for i in range(n)]
    grad2 = w.ctx.constant(0.0)
    for i in range(n):
        for j in range(n):
            grad2 = grad2 + tc0.ginv[i, j] * dw[i] * dw[j]
    out = _obj((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = (tc0.schouten[i, j] - hess[i, j]
                                     + dw[i] * dw[j] - 0.5 * grad2 * tc0.g[i, j])
    return out


def conformal_schouten(chart0: MetricChart, x, phi) -> TensorValue:
    """Schouten tensor of g = phi^2 g_0 via the conformal transformation law,
    for a positive factor phi given as an expression over the base chart."""
    phi = _as_expr(phi)
    pt = ex.eval_taylor(phi, x)
    if pt.value <= 0.0:
        raise GeometryError(f"conformal factor must be positive, got {pt.value}")
    tc0 = curvature_taylor(chart0, x)
    w = taylor.log(pt)
    return TensorValue(tc0.dim, (0, 2), values(_conformal_schouten_taylor(tc0, w)))


def conformal_ricci(chart0: MetricChart, x, phi) -> TensorValue:
    """Ricci of g = phi^2 g_0 via the conformal law
    Ric = Ric_0 - (n-2)(hess_0 w - dw dw) - (lap_0 w + (n-2)|dw|^2_0) g_0,
    with w = log phi."""
    phi = _as_expr(phi)
    pt = ex.eval_taylor(phi, x)
    if pt.value <= 0.0:
        raise GeometryError(f"conformal factor must be positive, got {pt.value}")
    tc0 = curvature_taylor(chart0, x)
    n = tc0.dim
    w = taylor.log(pt)
    hess = tc0.hessian_scalar(w)
    dw = [w.deriv(i) for i in range(n)]
    grad2 = w.ctx.constant(0.0)
    for i in range(n):
        for j in range(n):
            grad2 = grad2 + tc0.ginv[i, j] * dw[i] * dw[j]
    lap = tc0.laplacian_scalar(w)
    out = _obj((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = (
                tc0.ricci[i, j]
                - (n - 2) * (hess[i, j] - dw[i] * dw[j])
                - (lap + (n - 2) * grad2) * tc0.g[i, j]
            )
    return TensorValue(n, (0, 2), values(out))
