"""Shared test utilities: the finite-difference gradient checker."""

import numpy as np

from cuphaptics import backward, init_model
from cuphaptics.mlp import _forward_batch
from cuphaptics.rng import make_generator

FD_STEP = 1e-6
KINK_EPS = 1e-7
SMALL_SIZES = (3, 6, 4, 2)


def batch_loss(weights, biases, x, t):
    activations, _ = _forward_batch(weights, biases, x)
    return float(np.mean((activations[-1] - t) ** 2))


def gradient_check_trials(n_trials, base_seed=10_000, sizes=SMALL_SIZES):
    """Compare backprop to central finite differences on random small nets.

    Trials where any hidden pre-activation sits within KINK_EPS of the
    ReLU kink are skipped (the subgradient convention makes the two
    derivatives legitimately disagree there). Returns (checked_trials,
    skipped_trials, worst_ratio) where worst_ratio is max |bp-fd|/tol;
    raises AssertionError on the first component out of tolerance.
    """
    checked = skipped = 0
    worst = 0.0
    for trial in range(n_trials):
        seed = base_seed + trial
        rng = make_generator(seed)
        model = init_model(seed, layer_sizes=sizes)
        n = int(rng.integers(1, 6))
        x = rng.normal(0.0, 1.0, size=(n, sizes[0]))
        t = rng.normal(0.0, 1.0, size=(n, sizes[-1]))
        _, preacts = _forward_batch(model.weights, model.biases, x)
        if any(np.any(np.abs(z) < KINK_EPS) for z in preacts[:-1]):
            skipped += 1
            continue
        grad_w, grad_b = backward(model, x, t)
        params = list(model.weights) + list(model.biases)
        grads = grad_w + grad_b
        for p, g in zip(params, grads):
            flat_p, flat_g = p.ravel(), g.ravel()
            for j in range(flat_p.size):
                orig = flat_p[j]
                flat_p[j] = orig + FD_STEP
                loss_plus = batch_loss(model.weights, model.biases, x, t)
                flat_p[j] = orig - FD_STEP
                loss_minus = batch_loss(model.weights, model.biases, x, t)
                flat_p[j] = orig
                fd = (loss_plus - loss_minus) / (2.0 * FD_STEP)
                bp = flat_g[j]
                tol = max(1e-6, 1e-4 * max(abs(bp), abs(fd)))
                diff = abs(bp - fd)
                worst = max(worst, diff / tol)
                assert diff <= tol, (
                    f"trial {trial}: backprop {bp} vs finite diff {fd} "
                    f"(|diff| {diff} > tol {tol})"
                )
        checked += 1
    return checked, skipped, worst
