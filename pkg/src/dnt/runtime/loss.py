import numpy as np

from ..errors import UsageError


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over a batch.

    Accepts a single logit vector with an int label or a (batch, Y) array
    with a label vector. Returns ``(loss, probs, dlogits)`` where
    ``dlogits = (probs - onehot) / batch``.
    """
    single = np.ndim(logits) == 1
    logits = np.atleast_2d(logits)
    labels = np.atleast_1d(np.asarray(labels))
    n, y = logits.shape
    if y < 2:
        raise UsageError(f"need at least 2 classes, got {y}")
    if labels.shape != (n,):
        raise UsageError(f"expected {n} labels, got shape {labels.shape}")
    if np.any(labels < 0) or np.any(labels >= y):
        raise UsageError(f"label out of range [0, {y}): {labels.tolist()}")
    labels = labels.astype(np.int64)
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    probs = np.exp(z - log_norm[:, None])
    loss = float(np.mean(log_norm - z[np.arange(n), labels]))
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    if single:
        return loss, probs[0], grad[0]
    return loss, probs, grad
