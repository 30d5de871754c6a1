"""Acceptance suite: every primary criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with -s or -rA to see them all).
The statistical criteria use fixed seeds, so outcomes are reproducible
bit-for-bit; runtimes range from milliseconds to a few minutes per
criterion.
"""

import json
import math

import numpy as np
import pytest

from orthant.model import (
    build_asymmetric_atlas, build_symmetric_atlas, closed_form_rinv_asym,
    closed_form_rinv_sym, derived_params, r_inverse,
)
from orthant.skorokhod import BrownianDriver, simulate_ensemble
from orthant.coupling import (
    WeightedNormParams, contraction_check, couple, crossing_log_from_flags,
    monotonicity_check, domination_check,
)
from orthant.derivative import derivative_evolve, rw_distribution_mc, wasserstein_bound_estimate
from orthant.harness import ExperimentConfig, run_experiment
from orthant.stationary import (
    PerturbationSpec, alpha_Y, atlas_stationary_rates, n_schedule,
    sample_atlas_stationary,
)


def report(name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {tag}: {name}" + (f" [{detail}]" if detail else ""))
    assert ok, f"{name}: {detail}"


class TestClosedFormInverse:
    def test_closed_form_matches_inversion(self):
        worst = 0.0
        for d in range(1, 21):
            Rinv = r_inverse(build_symmetric_atlas(d).P)
            closed = np.array([[closed_form_rinv_sym(d, i, j)
                                for j in range(1, d + 1)] for i in range(1, d + 1)])
            worst = max(worst, float(np.max(np.abs(Rinv - closed))))
        for p in (0.6, 0.75, 0.9):
            for d in range(1, 21):
                Rinv = r_inverse(build_asymmetric_atlas(d, p).P) if d > 1 else \
                    r_inverse(build_asymmetric_atlas(1, p).P)
                closed = np.array([[closed_form_rinv_asym(d, p, i, j)
                                    for j in range(1, d + 1)] for i in range(1, d + 1)])
                worst = max(worst, float(np.max(np.abs(Rinv - closed))))
        report("closed-form R^{-1} vs inversion (d<=20)", worst <= 1e-10,
               f"max discrepancy {worst:.2e}")


class TestParameterIdentities:
    def test_symmetric_row_sum_identity(self):
        spec = build_symmetric_atlas(50)
        worst = 0.0
        for k in range(1, 51):
            a_k = derived_params(spec, k).a_k
            ref = k * (k + 1) / math.sqrt(2.0)
            worst = max(worst, abs(a_k / ref - 1.0))
        report("symmetric a^(d') identity (d'<=50)", worst <= 1e-12,
               f"max rel err {worst:.2e}")

    def test_asymmetric_drift_floor(self):
        ok = True
        worst = math.inf
        for p in (0.6, 0.75, 0.9):
            q = 1.0 - p
            b0 = (p - q) / p ** 2
            spec = build_asymmetric_atlas(20, p)
            for k in range(1, 21):
                margin = derived_params(spec, k).b_low_k - b0
                worst = min(worst, margin)
                ok &= margin >= -1e-12
        report("asymmetric b_low^(k) >= (p-q)/p^2 (k<=20)", ok,
               f"worst margin {worst:.2e}")


class TestStationarity:
    def test_exact_start_stays_stationary(self):
        d, n, h = 5, 2000, 1e-3
        spec = build_symmetric_atlas(d)
        rng = np.random.default_rng(np.random.SeedSequence([2025, 7]))
        starts = np.stack([sample_atlas_stationary(d, rng=rng)
                           for _ in range(n)])[:, None, :]
        res = simulate_ensemble(spec, starts, T=5.0, h=h, master_seed=314,
                                t_snapshots=(1.0, 5.0))
        expect = 1.0 / atlas_stationary_rates(d)
        worst_z = 0.0
        for k in range(2):
            X = res.X_snapshots[k, :, 0, :]
            z = (X.mean(axis=0) - expect) / (X.std(axis=0, ddof=1) / math.sqrt(n))
            worst_z = max(worst_z, float(np.max(np.abs(z))))
        report("stationarity of exact-start means (t in {1,5})", worst_z <= 3.0,
               f"worst |z| {worst_z:.2f}")


class TestMonotonicitySuite:
    def test_200_ordered_coupled_runs(self):
        d, n_runs, h, T = 10, 200, 1e-3, 10.0
        spec = build_symmetric_atlas(d)
        rng = np.random.default_rng(np.random.SeedSequence([901, 1]))
        xt = np.stack([sample_atlas_stationary(d, rng=rng) for _ in range(n_runs)])
        bump = rng.uniform(0.2, 1.0, size=(n_runs, d))
        starts = np.stack([xt + bump, xt], axis=1)
        Rinv_T = np.linalg.inv(spec.R).T
        floor = -(bump @ Rinv_T)          # -R^{-1}(x - x~) per run
        tol = 1e-9
        state = {"L_diff": np.zeros((n_runs, d)),
                 "Y_prev": bump @ Rinv_T,
                 "violations": 0}

        def check(j, X, dl):
            dX = X[:, 0, :] - X[:, 1, :]
            state["L_diff"] += dl[:, 0, :] - dl[:, 1, :]
            L_diff = state["L_diff"]
            Y = dX @ Rinv_T
            bad = (
                int(np.count_nonzero(dX < -tol))
                + int(np.count_nonzero(L_diff > tol))
                + int(np.count_nonzero(dl[:, 0, :] - dl[:, 1, :] > tol))
                + int(np.count_nonzero(L_diff - floor < -tol))
                + int(np.count_nonzero(Y < -tol))
                + int(np.count_nonzero(Y - state["Y_prev"] > tol))
            )
            state["violations"] += bad
            state["Y_prev"] = Y

        simulate_ensemble(spec, starts, T=T, h=h, master_seed=777, per_step=check)
        # canonical per-path checker on a handful of the same runs
        for r in range(5):
            inc = BrownianDriver.sub(777, r, spec.m, h).block(int(T / h))
            c = couple(spec, starts[r, 0], starts[r, 1], T=T, h=h, increments=inc)
            rep = monotonicity_check(c, tol=tol)
            state["violations"] += len(rep.violations)
        report("monotonicity of 200 ordered coupled runs",
               state["violations"] == 0, f"{state['violations']} violations")


class TestDominationSuite:
    def test_100_projected_runs(self):
        spec = build_symmetric_atlas(6)
        violations = 0
        for seed in range(100):
            rep = domination_check(spec, np.full(6, 0.5), k=3, T=5.0, h=1e-3,
                                   seed=seed, tol=1e-9)
            violations += len(rep.violations)
        report("domination of the k=3 projection (100 runs)",
               violations == 0, f"{violations} violations")


class TestContractionSuite:
    def test_asymmetric_full_cycle_contraction(self):
        p, d, T, h = 0.75, 5, 30.0, 0.01
        spec = build_asymmetric_atlas(d, p)
        constants = {"C": 1 / (2 * p - 1), "M": 1 / (2 * p - 1), "alpha": (1 - p) / p}
        params = WeightedNormParams(beta=math.sqrt(constants["alpha"]),
                                    delta=constants["alpha"] ** 0.25)
        x = np.ones(d)
        inconclusive = 0
        failures = 0
        for seed in range(200):
            c = couple(spec, x, np.zeros(d), T=T, h=h, seed=seed)
            rep = contraction_check(c, params, d_prime=d, constants=constants)
            if not rep.conclusive:
                inconclusive += 1
                continue
            if not (rep.drop_bound_ok and rep.lambda_ok):
                failures += 1
        rate = inconclusive / 200
        report("lambda-contraction over first full hit cycle (200 runs)",
               failures == 0 and rate < 0.2,
               f"{failures} failures, exclusion rate {rate:.2%}, "
               f"lambda={1 - 1 / (2 * max(1.0, constants['C'] / (1 - constants['alpha'] / params.beta) + constants['M'] * params.beta / (1 - params.beta))):.4f}")


class TestDerivativeTriple:
    def test_triple_agreement(self):
        d, n_seeds, T, h, eps = 5, 100, 1.0, 1e-4, 1e-4
        spec = build_symmetric_atlas(d)
        x = 1.0 / atlas_stationary_rates(d)
        e1 = np.eye(d)[0]
        starts = np.broadcast_to(np.stack([x, x + eps * e1]), (n_seeds, 2, d))
        res = simulate_ensemble(spec, starts, T=T, h=h, master_seed=4242,
                                record_hits=True)
        mass_worst = 0.0
        gaps = []
        divergent = 0
        walk_checked = walk_ok = 0
        for r in range(n_seeds):
            base_log = crossing_log_from_flags(res.hits[r, 0], h, 1, d)
            pert_log = crossing_log_from_flags(res.hits[r, 1], h, 1, d)
            state = derivative_evolve(base_log, 1, spec.R, T)
            mass_worst = max(mass_worst, state.max_mass_defect)
            if base_log.coordinates() != pert_log.coordinates():
                divergent += 1
            else:
                grad = (res.final_X[r, 1] - res.final_X[r, 0]) / eps
                gaps.append(float(np.max(np.abs(grad - state.S))))
            if r < 25:
                freq = rw_distribution_mc(base_log, 1, T, 100_000, seed=r)
                exact = state.distribution()
                se = np.sqrt(np.maximum(exact * (1 - exact), 0.0) / 100_000)
                within = np.abs(freq - exact) <= 3 * se + 1e-12
                walk_checked += within.size
                walk_ok += int(np.count_nonzero(within))

        report("derivative mass conservation <= 1e-12", mass_worst <= 1e-12,
               f"max defect {mass_worst:.2e}")
        nondiv = 1.0 - divergent / n_seeds
        worst_gap = max(gaps) if gaps else math.inf
        report("finite difference vs recursion (sup gap <= 0.05 on >= 90%)",
               nondiv >= 0.9 and worst_gap <= 0.05,
               f"non-divergent {nondiv:.0%}, worst gap {worst_gap:.3f}")
        frac = walk_ok / walk_checked
        report("quenched walk MC within 3 sigma on >= 99% of states",
               frac >= 0.99, f"{walk_ok}/{walk_checked} states")


class TestWassersteinInequality:
    def test_twenty_configurations(self):
        failures = []
        n_cfg = 0
        for d in (2, 3, 5):
            spec = build_symmetric_atlas(d)
            x = 1.0 / atlas_stationary_rates(d)
            directions = [np.eye(d)[0], np.eye(d)[-1], 0.5 * np.ones(d)]
            for t in (1.0, 5.0):
                for k, direction in enumerate(directions):
                    n_cfg += 1
                    res = wasserstein_bound_estimate(
                        spec, x, x + direction, t=t, n_grid=8, n_walk=120,
                        seed=100 * d + 10 * int(t) + k, h=0.01)
                    if not res.holds:
                        failures.append((d, t, k, res.lhs, res.rhs))
        # two extra replicated configurations round out the battery
        spec = build_symmetric_atlas(5)
        x = 1.0 / atlas_stationary_rates(5)
        for seed in (9001, 9002):
            n_cfg += 1
            res = wasserstein_bound_estimate(spec, x, x + np.eye(5)[0], t=5.0,
                                             n_grid=8, n_walk=120, seed=seed,
                                             h=0.01)
            if not res.holds:
                failures.append((5, 5.0, seed, res.lhs, res.rhs))
        report("crossing-survival bound on 20 configurations",
               n_cfg == 20 and not failures,
               f"{n_cfg} configs, failures: {failures if failures else 'none'}")


DECAY_BETA = math.sqrt(1.0 / 3.0)


def decay_doc(d: int) -> dict:
    return {
        "experiment": "decay",
        "model": {"builder": "asymmetric_atlas", "d": d, "p": 0.75},
        "start": {"kind": "fixed", "vector": [1.0] * d},
        "comparison_start": {"kind": "stationary"},
        "t_grid": [1.0, 10.0, 50.0],
        "h": 0.01,
        "n_reps": 500,
        "seed": 20250811,
        "beta": DECAY_BETA,
        "B": 1.5,
        "burn_T": 30.0,
        "burn_h": 0.02,
    }


@pytest.fixture(scope="module")
def decay_results():
    out = {}
    for d in (10, 20, 40):
        csv_text, manifest = run_experiment(
            ExperimentConfig.from_json_dict(decay_doc(d)))
        curve = {}
        for line in csv_text.strip().split("\n")[1:]:
            parts = line.split(",")
            if parts[1] == "weighted_l1_beta":
                curve[float(parts[0])] = float(parts[2])
        out[d] = (curve, manifest)
    return out


class TestDecayDimensionFree:
    def test_curves_decay(self, decay_results):
        ratios = {d: curve[1.0] / curve[50.0] for d, (curve, _) in decay_results.items()}
        ok = all(r >= 2.0 for r in ratios.values())
        report("weighted distance decays by >= 2x from t=1 to t=50",
               ok, ", ".join(f"d={d}: {r:.1f}x" for d, r in sorted(ratios.items())))

    def test_dimension_free_at_t10(self, decay_results):
        v10 = decay_results[10][0][10.0]
        rel = {d: abs(decay_results[d][0][10.0] / v10 - 1.0) for d in (20, 40)}
        ok = all(r <= 0.25 for r in rel.values())
        report("t=10 weighted distance within 25% of the d=10 value", ok,
               ", ".join(f"d={d}: {100 * r:.1f}%" for d, r in sorted(rel.items())))

    def test_start_inside_start_set(self, decay_results):
        warned = any(m["warnings"] for _, m in decay_results.values())
        report("ones start lies in the declared start set", not warned)


class TestPerturbationDecay:
    def test_constant_perturbation_halves(self):
        doc = {
            "experiment": "perturbation",
            "model": {"builder": "symmetric_atlas", "d": 10},
            "start": {"kind": "stationary_perturbed",
                      "pspec": {"kind": "constant", "values": [1.0]}},
            "comparison_start": {"kind": "stationary"},
            "t_grid": [1.0, 10.0, 50.0],
            "h": 0.01,
            "n_reps": 500,
            "seed": 628,
        }
        csv_text, _ = run_experiment(ExperimentConfig.from_json_dict(doc))
        curve = {}
        for line in csv_text.strip().split("\n")[1:]:
            parts = line.split(",")
            if parts[1] == "l1":
                curve[float(parts[0])] = float(parts[2])
        ok = curve[50.0] <= 0.5 * curve[1.0]
        report("constant-perturbation distance halves by t=50", ok,
               f"l1(1)={curve[1.0]:.4f}, l1(50)={curve[50.0]:.4f}")

    def test_exp_rates_tail_bound_dominates(self):
        pspec = PerturbationSpec.exp_rates(1.0)
        grid = [2.0, 5.0, 10.0, 50.0, 200.0, 1e4, 1e6]
        ok = True
        worst = -math.inf
        for t in grid:
            n_t = n_schedule(pspec, t)
            val = alpha_Y(pspec, n_t)
            bound = 2.0 * t ** (-3.0 / 64.0)
            worst = max(worst, val - bound)
            ok &= val <= bound + 1e-12
        report("alpha_Y(n(t)) dominated by (2/beta) t^{-3/64} for t >= 2", ok,
               f"worst excess {worst:.2e}")


class TestDeterminism:
    def test_experiments_byte_identical(self):
        docs = [
            decay_doc(4) | {"n_reps": 12, "t_grid": [0.5, 1.0], "burn_T": 2.0},
            {
                "experiment": "perturbation",
                "model": {"builder": "symmetric_atlas", "d": 4},
                "start": {"kind": "stationary_perturbed",
                          "pspec": {"kind": "exp_rates", "beta_exp": 1.0}},
                "t_grid": [2.0], "h": 0.05, "n_reps": 10, "seed": 3,
            },
            {
                "experiment": "derivative_validation",
                "model": {"builder": "symmetric_atlas", "d": 3},
                "t_grid": [0.5], "h": 1e-3, "n_reps": 5, "n_walk": 1000,
                "seed": 6,
            },
        ]
        ok = True
        for doc in docs:
            a, _ = run_experiment(ExperimentConfig.from_json_dict(json.loads(json.dumps(doc))))
            b, _ = run_experiment(ExperimentConfig.from_json_dict(json.loads(json.dumps(doc))))
            ok &= a.encode() == b.encode()
        report("experiments byte-identical under config+seed reruns", ok)
