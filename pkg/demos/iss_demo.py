"""Small-gain certificate for two coupled storage functions and the
resulting input-to-state envelope under a constant input.

Run: python3 demos/iss_demo.py
"""
from pathlib import Path

import numpy as np

from conecontract import NormSpec, VectorField, flow
from conecontract.models import iss_envelope, load_model, matrosov_certify

HERE = Path(__file__).parent


def main():
    spec = load_model(HERE / "models" / "comparison.json")
    ns = NormSpec.identity(1)
    for c in (1.0, 2.0):
        cert = matrosov_certify(spec, ns, c, n_samples=500)
        print(f"c={c}: {'certified' if cert.passed else 'refuted'} "
              f"(worst margin {cert.worst_margin:+.3f})")

    c = 1.0
    cert = matrosov_certify(spec, ns, c, n_samples=500)
    gu = spec.input_gain(np.array([0.3, 0.1]))
    tr = flow(VectorField(spec.n, lambda t, v: spec.field(v) + gu), 0.0, [2.0, 0.5], 5.0)
    env = iss_envelope(spec, ns, c, tr.t, tr.x, np.tile(gu, (tr.t.size, 1)), x_norms=tr.x,
                       certificate=cert)
    for t in (0.0, 1.0, 2.5, 5.0):
        k = int(np.searchsorted(tr.t, t))
        k = min(k, tr.t.size - 1)
        print(f"t={tr.t[k]:4.2f}  V={np.round(tr.x[k], 4)}  envelope={np.round(env.envelope[k], 4)}")
    print("envelope holds:", env.passed)


if __name__ == "__main__":
    main()
