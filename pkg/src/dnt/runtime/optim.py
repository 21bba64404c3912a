from ..errors import ConfigError


def sgd_step(params, lr):
    """Plain SGD: ``value -= lr * grad`` for every parameter, then zero the grads."""
    if not lr > 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    for p in params:
        p.value -= lr * p.grad
        p.zero_grad()


def zero_grads(params):
    for p in params:
        p.zero_grad()
