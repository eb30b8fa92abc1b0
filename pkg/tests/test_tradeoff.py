import math

import numpy as np
import pytest

from nonsig_lab.errors import InputError
from nonsig_lab.quantum import quantum_value_closed_form
from nonsig_lab.tradeoff import (
    TSIRELSON,
    best_k,
    bound_chain,
    bound_gen_chain,
    bound_general,
    bound_quantum_chsh,
    curves_to_csv,
    default_k,
    epsilon_grid,
    epsilon_threshold,
    figure_data,
    raw_bound_gen_chain,
    raw_bound_general,
    read_curves_csv,
)


class TestGeneralBound:
    def test_hand_value(self):
        # CHSH at Tsirelson: (2 * 2 * 0.5 - (4 - 2 sqrt 2)) / 2 = sqrt(2) - 1
        assert bound_general(2, 2, 0.5, TSIRELSON, 4) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)

    def test_clamped_at_zero(self):
        assert bound_general(2, 2, 0.1, TSIRELSON, 4) == 0.0
        assert raw_bound_general(2, 2, 0.1, TSIRELSON, 4) < 0

    def test_pr_box_is_tight(self):
        for eps in np.linspace(0, 0.5, 6):
            assert bound_general(2, 2, eps, 4, 4) == pytest.approx(2 * eps)

    def test_chain_helper(self):
        assert bound_chain(4, 0.3, 7.0) == bound_general(4, 2, 0.3, 7.0, 8)

    @pytest.mark.parametrize("args", [(2, 2, 0.6, 3, 4), (2, 2, -0.01, 3, 4), (2, 2, 0.1, 5, 4), (0, 2, 0.1, 1, 4)])
    def test_domain(self, args):
        with pytest.raises(InputError):
            bound_general(*args)

    def test_threshold(self):
        assert epsilon_threshold(2, 2, TSIRELSON, 4) == pytest.approx(1 - 1 / math.sqrt(2))
        assert epsilon_threshold(2, 2, 0, 4) == 0.5
        assert bound_general(2, 2, epsilon_threshold(2, 2, TSIRELSON, 4), TSIRELSON, 4) == pytest.approx(0, abs=1e-15)
        with pytest.raises(InputError):
            epsilon_threshold(2, 0, 1, 4)


class TestGenChainBound:
    def test_k1_matches_chain_at_quantum_value(self):
        for n in (2, 5, 17):
            for eps in (0.0, 0.2, 0.5):
                beta = quantum_value_closed_form(n)
                assert raw_bound_gen_chain(n, 1, eps) == pytest.approx(
                    raw_bound_general(n, 2, eps, beta, 2 * n), abs=1e-12)

    def test_matches_general_with_closed_form(self):
        for n, k in [(6, 2), (10, 3), (40, 6)]:
            beta = quantum_value_closed_form(n, k)
            assert raw_bound_gen_chain(n, k, 0.4) == pytest.approx(
                raw_bound_general(n, 2 * k, 0.4, beta, 2 * k * n), abs=1e-10)

    def test_domain(self):
        with pytest.raises(InputError):
            bound_gen_chain(6, 4, 0.1)

    def test_best_k(self):
        k, value = best_k(100, 0.5)
        assert value == max(bound_gen_chain(100, kk, 0.5) for kk in range(1, 51))
        assert k == 5

    def test_best_k_tie_prefers_small(self):
        # every k gives zero at epsilon = 0
        assert best_k(20, 0.0) == (1, 0.0)

    def test_default_k(self):
        assert [default_k(n) for n in (2, 10, 100, 1000)] == [1, 2, 6, 15]


class TestQuantumChsh:
    def test_hand_value(self):
        assert bound_quantum_chsh(0.2, TSIRELSON) == pytest.approx(0.5 * (TSIRELSON - math.sqrt(8 - 0.64)))

    def test_zero_at_eps_zero(self):
        assert bound_quantum_chsh(0.0, TSIRELSON) == pytest.approx(0, abs=1e-15)

    @pytest.mark.parametrize("beta", [-0.1, 2.9])
    def test_domain(self, beta):
        with pytest.raises(InputError):
            bound_quantum_chsh(0.1, beta)


class TestFigures:
    def test_grid(self):
        g = epsilon_grid(0.005)
        assert len(g) == 101 and g[0] == 0 and g[-1] == 0.5
        assert epsilon_grid(0.3)[-1] == 0.5
        with pytest.raises(InputError):
            epsilon_grid(0)

    def test_figure1_labels(self):
        curves = figure_data(1)
        assert [c.label for c in curves] == ["ns_chsh", "quantum_chsh"]
        q = curves[1]
        assert q.d_min[-1] == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_figure2_default(self):
        labels = [c.label for c in figure_data(2)]
        assert labels == ["chain_n0002", "chain_n0004", "chain_n0008", "chain_n0016"]

    def test_figure2_threshold_shrinks(self):
        th = [c.meta["eps_threshold"] for c in figure_data(2, n_list=[2, 4, 8, 16, 32])]
        assert th == sorted(th, reverse=True)

    def test_figure3_genchain_dominates(self):
        curves = {c.label: c for c in figure_data(3, eps_step=0.1, n_list=[500])}
        chain = curves["chain_n0500"]
        gen = next(c for lbl, c in curves.items() if lbl.startswith("genchain"))
        assert gen.meta["k"] == default_k(500)
        assert gen.meta["beta"] == pytest.approx(gen.meta["beta_closed_form"], rel=1e-9)
        assert gen.d_min[-1] > chain.d_min[-1]

    def test_unknown_figure(self):
        with pytest.raises(InputError):
            figure_data(4)

    def test_csv_roundtrip(self):
        curves = figure_data(2, eps_step=0.1, n_list=[4, 2])
        text = curves_to_csv(curves)
        assert text.splitlines()[0] == "epsilon,label,d_min,raw"
        assert text.splitlines()[1].split(",")[1] == "chain_n0002"
        parsed = read_curves_csv(text)
        for c in curves:
            np.testing.assert_allclose(parsed[c.label]["d_min"], c.d_min, rtol=1e-11)


class TestWorkedValues:
    def test_general(self):
        assert bound_general(2, 2, 0.5, 4, 4) == 1
        assert raw_bound_general(2, 2, 0.2, TSIRELSON, 4) == pytest.approx(-0.18579, abs=1e-5)

    def test_chain_at_quantum_value(self):
        beta = 8 * math.cos(math.pi / 8)
        assert bound_chain(4, 0.5, beta) == pytest.approx(0.34776, abs=1e-5)
        th = 2 * (1 - math.cos(math.pi / 8))
        assert epsilon_threshold(4, 2, beta, 8) == pytest.approx(th, abs=1e-15)
        assert bound_chain(4, th, beta) == pytest.approx(0, abs=1e-14)

    def test_chain_without_locality(self):
        for n in (2, 7):
            assert bound_chain(n, 0.3, 2 * n) == pytest.approx(1.2 / n)
        assert epsilon_threshold(5, 3, 10, 10) == 0

    def test_generalized_beats_chain_at_100(self):
        assert bound_gen_chain(100, 2, 0.3) > bound_chain(100, 0.3, 200 * math.cos(math.pi / 200))
        assert all(bound_gen_chain(50, k, 0.0) == 0 for k in range(1, 26))

    def test_best_k_small_n(self):
        assert best_k(4, 0.01)[0] == 1
        k, value = best_k(100, 0.5)
        assert k > 1 and value > bound_gen_chain(100, 1, 0.5)

    def test_quantum_chsh(self):
        assert bound_quantum_chsh(0.5, TSIRELSON) == pytest.approx(math.sqrt(2) - 1)
        # 0.5 * (2 sqrt 2 - sqrt 7.36)
        assert bound_quantum_chsh(0.2, TSIRELSON) == pytest.approx(0.0577476, abs=1e-7)

    def test_asymptotic_advantage_scan(self):
        eps = 0.4
        wins = [n for n in range(10, 400, 10)
                if bound_gen_chain(n, default_k(n), eps) > bound_chain(n, eps, 2 * n * math.cos(math.pi / (2 * n)))]
        # k jumps make small n irregular; past some n0 the advantage is permanent
        losses = [n for n in range(10, 400, 10) if n not in wins]
        n0 = max(losses) + 10
        assert n0 <= 100
        assert wins[-(400 - n0) // 10:] == list(range(n0, 400, 10))
