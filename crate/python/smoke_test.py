#!/usr/bin/env python3
"""Smoke test for the mnlfit_py extension module.

Builds nothing itself: compile the extension first with

    cargo build -p mnlfit-py --release

then run

    python3 python/smoke_test.py

The script locates the compiled cdylib, imports it, generates a synthetic
dataset, estimates it with a deterministic and a hybrid algorithm, and checks
that both land on the same optimum with sane parameter recovery.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_extension():
    candidates = [
        REPO / "target" / "release" / "libmnlfit_py.so",
        REPO / "target" / "debug" / "libmnlfit_py.so",
        REPO / "target" / "release" / "libmnlfit_py.dylib",
        REPO / "target" / "debug" / "libmnlfit_py.dylib",
    ]
    existing = [p for p in candidates if p.exists()]
    if not existing:
        sys.exit(
            "extension not built; run `cargo build -p mnlfit-py --release` first"
        )
    return max(existing, key=lambda p: p.stat().st_mtime)


def import_module():
    lib = locate_extension()
    stage = Path(tempfile.mkdtemp(prefix="mnlfit_py_"))
    shutil.copy(lib, stage / "mnlfit_py.so")
    sys.path.insert(0, str(stage))
    import mnlfit_py

    return mnlfit_py


SYNTH = """
n_obs = 20000
alternatives = ["car", "bus", "walk"]
seed = 8

[[params]]
name = "b_cost"
kind = "generic"
true_value = -0.9

[[params]]
name = "b_time"
kind = "generic"
true_value = -0.4

[[params]]
name = "asc_bus"
kind = "constant"
true_value = 0.5
alternative = "bus"

[[params]]
name = "asc_walk"
kind = "constant"
true_value = -0.2
alternative = "walk"
"""


def check(label, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"{status} {label}{': ' + detail if detail else ''}")
    if not ok:
        sys.exit(1)


def main():
    m = import_module()
    algos = m.algorithms()
    check("algorithm catalog lists 15 entries", len(algos) == 15, ", ".join(algos))

    data, spec, theta_star = m.generate_synthetic(SYNTH)
    check(
        "synthetic generation",
        data.n_obs == 20000 and len(spec.parameters) == 4,
        repr(data),
    )

    probs = m.choice_probabilities(spec, data, [0.0] * 4, 0)
    check(
        "zero-theta probabilities are uniform",
        all(abs(p - 1.0 / 3.0) < 1e-12 for p in probs),
    )

    newton = m.estimate(spec, data, algorithm="NM", std_errors=True)
    check("NM converges", newton.converged, repr(newton))

    within = all(
        abs(est - true) <= 3.0 * se
        for est, true, se in zip(newton.theta, theta_star, newton.std_errors)
    )
    check(
        "parameters recovered within 3 standard errors",
        within,
        " ".join(f"{e:+.3f}/{t:+.3f}" for e, t in zip(newton.theta, theta_star)),
    )

    hamabs = m.estimate(spec, data, algorithm="HAMABS", seed=3)
    check("HAMABS converges", hamabs.converged, repr(hamabs))

    rel = abs(hamabs.final_ll - newton.final_ll) / abs(newton.final_ll)
    check("optima agree across algorithms", rel < 1e-5, f"rel diff {rel:.2e}")

    trace = hamabs.trace()
    predicate_ok = all(
        (row["order"] == "second") == (row["batch_size"] / data.n_obs <= 0.30)
        for row in trace
    )
    check("hybrid switching follows the batch-fraction rule", predicate_ok)

    ll, grad = m.log_likelihood(spec, data, list(hamabs.theta))
    gnorm = math.sqrt(sum(g * g for g in grad))
    check("gradient is numerically flat at the optimum", gnorm < 1.0, f"|g| = {gnorm:.2e}")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
