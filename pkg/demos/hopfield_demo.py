"""Perron-weighted certificate for a two-neuron Hopfield network, then a
simulated pair of trajectories converging at the certified rate.

Run: python3 demos/hopfield_demo.py
"""
from pathlib import Path

import numpy as np

from conecontract import flow_pair, weighted_norm
from conecontract.models import as_vector_field, hopfield_certificate, load_model

HERE = Path(__file__).parent


def main():
    net = load_model(HERE / "models" / "hopfield_two_neuron.json")
    cert = hopfield_certificate(net, p=1, n_samples=500)
    print(f"rate c = {cert.c:.4f}, eta = {np.round(cert.eta, 4)}, verdict passed = {cert.passed}")

    vf = as_vector_field(net)
    tx, ty = flow_pair(vf, [1.5, -1.0], [-0.5, 2.0], 0.0, 6.0)
    d0 = weighted_norm(tx.x[0] - ty.x[0], cert.ns)
    for t in (0.0, 1.0, 2.0, 4.0, 6.0):
        d = weighted_norm(tx(t) - ty(t), cert.ns)
        print(f"t={t:4.1f}  distance={d:.6f}  bound={np.exp(-cert.c * t) * d0:.6f}")


if __name__ == "__main__":
    main()
