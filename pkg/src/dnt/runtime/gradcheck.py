"""Central finite-difference gradient checking."""

from dataclasses import dataclass, field

import numpy as np

from ..data.rng import Rng


@dataclass
class GradCheckReport:
    max_rel_error: float
    per_tensor: dict = field(default_factory=dict)
    checked: int = 0

    def passed(self, tol):
        return self.max_rel_error < tol

    def __str__(self):
        parts = ", ".join(f"{k}={v:.2e}" for k, v in self.per_tensor.items())
        return f"max rel err {self.max_rel_error:.3e} over {self.checked} entries ({parts})"


def relative_error(analytic, numeric):
    a = np.abs(analytic)
    n = np.abs(numeric)
    return np.abs(analytic - numeric) / np.maximum(np.maximum(a, n), 1e-8)


def check_scalar_function(loss_fn, tensors, analytic, step=1e-5, max_entries=None, seed=0):
    """Compare ``analytic[name]`` with central differences of ``loss_fn()``.

    ``tensors`` maps names to arrays that ``loss_fn`` reads; they are
    perturbed in place and restored. With ``max_entries`` only a seeded
    random subset of each tensor's entries is probed.
    """
    rng = Rng(seed)
    report = GradCheckReport(0.0)
    for name, arr in tensors.items():
        flat = arr.reshape(-1)
        if not np.shares_memory(flat, arr):
            raise ValueError(f"{name}: tensor must be contiguous to perturb in place")
        grad = np.asarray(analytic[name]).reshape(-1)
        idx = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            perm = rng.permutation(flat.size)
            idx = np.sort(np.array(perm[:max_entries]))
        worst = 0.0
        for j in idx:
            orig = flat[j]
            flat[j] = orig + step
            f_plus = loss_fn()
            flat[j] = orig - step
            f_minus = loss_fn()
            flat[j] = orig
            numeric = (f_plus - f_minus) / (2 * step)
            worst = max(worst, float(relative_error(grad[j], numeric)))
        report.per_tensor[name] = worst
        report.checked += len(idx)
        report.max_rel_error = max(report.max_rel_error, worst)
    return report


def _as_tuple(x):
    return x if isinstance(x, tuple) else (x,)


def gradient_check(op, input_shapes, seed=0, step=1e-5, max_entries=None, check_inputs=True):
    """Gradient-check a layer-like ``op`` on random float64 inputs.

    ``op`` needs ``forward(*inputs)``, ``backward(dout)`` returning the input
    gradient(s) and optionally ``parameters()``. The scalar probed is
    ``sum(out * R)`` for a fixed random ``R``, so ``dout = R``. If ``op`` has
    an ``rng`` attribute (dropout) its state is rewound before every forward
    so all evaluations share one mask.
    """
    rng = Rng(seed)
    inputs = [rng.normal(shape) for shape in input_shapes]
    op_rng = getattr(op, "rng", None)
    rng_state = op_rng.state if op_rng is not None else None
    params = op.parameters() if hasattr(op, "parameters") else []

    def run():
        if op_rng is not None:
            op_rng.state = rng_state
        return op.forward(*inputs)

    out = run()
    proj = rng.normal(np.shape(out))
    for p in params:
        p.zero_grad()
    dxs = _as_tuple(op.backward(proj))

    tensors, analytic = {}, {}
    if check_inputs:
        for k, (x, dx) in enumerate(zip(inputs, dxs)):
            tensors[f"input{k}"] = x
            analytic[f"input{k}"] = np.array(dx, copy=True)
    for p in params:
        tensors[p.name] = p.value
        analytic[p.name] = p.grad.copy()

    def loss_fn():
        return float(np.sum(run() * proj))

    return check_scalar_function(loss_fn, tensors, analytic, step=step, max_entries=max_entries,
                                 seed=seed)
