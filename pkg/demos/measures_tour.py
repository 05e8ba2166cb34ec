"""Classical vs conic measures on a few small matrices.

Run: python3 demos/measures_tour.py
"""
import json
from pathlib import Path

import numpy as np

from conecontract import NormSpec, conic_measure, conic_measure_limit_oracle, matrix_measure

HERE = Path(__file__).parent


def show(label, A, ns):
    mu = matrix_measure(A, ns)
    mup = conic_measure(A, ns)
    oracle = conic_measure_limit_oracle(A, ns, n_samples=500)
    print(f"{label:<28} mu={mu.value:+.4f}  mu+={mup.value:+.4f} ({mup.method}, {mup.bound})"
          f"  oracle={float(oracle):+.4f}")


def main():
    A = np.array([[-2.0, -1.0], [0.5, -2.0]])
    # at p=1 a non-Metzler A separates the l1 closed form (the pairing
    # supremum over the cone) from the limit quotient; see README
    show("l1, identity", A, NormSpec.identity(1))
    show("l_inf, diag(1,2)", A, NormSpec.diag("inf", [1.0, 2.0]))
    show("l2, identity", A, NormSpec.identity(2))

    # Metzler matrices: the conic and classical measures coincide
    M = np.array([[-2.0, 1.0], [0.5, -1.5]])
    show("Metzler, l1", M, NormSpec.identity(1))

    # mu+ can be negative while mu is positive under a non-monotonic norm
    spec = json.loads((HERE / "models" / "counterexample_matrix.json").read_text())
    ns = NormSpec.general("inf", spec["norm"]["weight"]["general"])
    show("general R, l_inf", np.array(spec["matrix"]), ns)


if __name__ == "__main__":
    main()
