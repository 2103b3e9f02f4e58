#!/usr/bin/env python3
"""Train the 16-8-8-3 toy classifier and write it with a 50-point test set.

Deterministic: fixed seed, plain numpy, full-batch gradient descent.
Outputs data/toy_net.json and data/toy_points.json.
"""
import argparse
import json
import pathlib

import numpy as np


def make_blobs(rng, n, centers):
    labels = rng.integers(0, len(centers), size=n)
    x = centers[labels] + 0.13 * rng.standard_normal((n, centers.shape[1]))
    return np.clip(x, 0.0, 1.0), labels


def relu(z):
    return np.maximum(z, 0.0)


def forward(params, x):
    acts = [x]
    for i, (w, b) in enumerate(params):
        z = acts[-1] @ w.T + b
        acts.append(relu(z) if i + 1 < len(params) else z)
    return acts


def train(rng, x, y, sizes, epochs, lr):
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in)
        params.append((w, np.zeros(fan_out)))
    onehot = np.eye(sizes[-1])[y]
    for _ in range(epochs):
        acts = forward(params, x)
        logits = acts[-1]
        p = np.exp(logits - logits.max(axis=1, keepdims=True))
        p /= p.sum(axis=1, keepdims=True)
        grad = (p - onehot) / len(x)
        new = []
        for i in reversed(range(len(params))):
            w, b = params[i]
            gw = grad.T @ acts[i]
            gb = grad.sum(axis=0)
            if i > 0:
                grad = (grad @ w) * (acts[i] > 0)
            new.append((w - lr * gw, b - lr * gb))
        params = list(reversed(new))
    return params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    centers = rng.uniform(0.2, 0.8, size=(3, 16))
    x_train, y_train = make_blobs(rng, 600, centers)
    x_test, y_test = make_blobs(rng, 50, centers)
    params = train(rng, x_train, y_train, [16, 8, 8, 3], epochs=1500, lr=0.5)

    acc = (forward(params, x_test)[-1].argmax(axis=1) == y_test).mean()
    print(f"test accuracy {acc:.2f}")

    layers = []
    for i, (w, b) in enumerate(params):
        layers.append({
            "weights": np.round(w, 6).tolist(),
            "bias": np.round(b, 6).tolist(),
            "activation": "relu" if i + 1 < len(params) else "none",
        })
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "toy_net.json").write_text(json.dumps({"input_dim": 16, "layers": layers}, indent=1) + "\n")
    points = [{"x": np.round(xi, 6).tolist(), "label": int(yi)} for xi, yi in zip(x_test, y_test)]
    doc = {"points": points, "valid_lower": [0.0] * 16, "valid_upper": [1.0] * 16}
    (out / "toy_points.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
