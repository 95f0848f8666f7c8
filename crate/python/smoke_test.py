"""Smoke test for the lcu_lab extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/lcu_lab-*.whl
"""

import math

import numpy as np

import lcu_lab


def check_hamiltonian():
    h = lcu_lab.PauliHamiltonian("0.5*ZI + 0.3*XX - 0.2*IY")
    assert h.n_qubits == 2
    assert math.isclose(h.l1_norm, 1.0)
    dense = np.array(h.to_dense())
    assert np.allclose(dense, dense.conj().T)
    psi = np.array(lcu_lab.parse_state("0+"))
    exact = float(np.real(psi.conj() @ dense @ psi))
    assert math.isclose(h.expectation("0+"), exact, abs_tol=1e-12)
    assert np.allclose(h.apply(list(psi)), dense @ psi)


def check_hamsim():
    h = lcu_lab.PauliHamiltonian("X")
    z = lcu_lab.PauliHamiltonian("Z")
    report = lcu_lab.hamsim_estimate(h, 0.7, z, "0", eps=0.05, seed=11)
    assert abs(report["ratio"] - math.cos(1.4)) < 0.05, report["ratio"]
    again = lcu_lab.hamsim_estimate(h, 0.7, z, "0", eps=0.05, seed=11)
    assert again["ratio"] == report["ratio"]


def check_walks():
    chain = lcu_lab.MarkovChain.cycle(8)
    assert chain.reversible and not chain.ergodic
    assert np.allclose(chain.stationary(), np.full(8, 1 / 8))
    assert math.isclose(chain.lazy().hitting_time([0]), 24.0, rel_tol=1e-9)
    search = lcu_lab.WalkSearch(chain, [0], kind="power")
    oracle = search.success_oracle()
    hits, _ = search.run_trials(4000, seed=2)
    sigma = math.sqrt(oracle * (1 - oracle) / 4000)
    assert abs(hits / 4000 - oracle) < 4 * sigma, (hits, oracle)
    assert search.theorem1_slack() >= 0


def check_harness():
    report = lcu_lab.run("decomp-check", kind="exp", t=3)
    assert report["command"] == "decomp-check"
    assert report["config"]["t"] == 3
    report = lcu_lab.run("walks-search", graph="cycle:8", marked="0", trials=500, seed=3)
    for key in ("HT", "T", "empirical_success", "oracle_success", "theorem1_slack"):
        assert key in report["results"], key
    csv = lcu_lab.sweep_csv(target="decomp-check", axis="t", values="2,4")
    assert len([l for l in csv.splitlines() if not l.startswith("#")]) == 3


def check_errors():
    for call, exc, code in [
        (lambda: lcu_lab.run("gsp", bogus=1), lcu_lab.ConfigError, 2),
        (lambda: lcu_lab.PauliHamiltonian("1.0*XQ"), lcu_lab.ConfigError, 2),
        (lambda: lcu_lab.run("walks-search", marked=""), lcu_lab.InputError, 3),
        (lambda: lcu_lab.run("analog-gsp", gap=0.001), lcu_lab.ConvergenceError, 4),
    ]:
        try:
            call()
        except exc as e:
            assert isinstance(e, lcu_lab.LcuError)
            assert e.exit_code == code
        else:
            raise AssertionError("expected an error")


if __name__ == "__main__":
    check_hamiltonian()
    check_hamsim()
    check_walks()
    check_harness()
    check_errors()
    print("lcu_lab smoke test passed")
